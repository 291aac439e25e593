//! Auditing Android apps listed in a children's store catalog against
//! declarative compliance rules.

pub mod catalog;
pub mod container;
pub mod detectors;
pub mod annotations;
pub mod rules;
pub mod report;
pub mod pipeline;
pub mod fixture;
