use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use appaudit::annotations::{load_annotations, AnnotationMap};
use appaudit::catalog::{aggregate_distribution, detect_teacher_approved, load_catalog_with_warnings, Dimension};
use appaudit::detectors::{load_lexicon, Detectors, SeedConfig, StoreFlags, SynonymLexicon};
use appaudit::fixture::{write_corpus, DEFAULT_SEED};
use appaudit::pipeline::{audit, scan_path, AuditConfig, AuditInputs};
use appaudit::report::{emit_csv, emit_distribution_markdown, emit_json, emit_markdown};
use appaudit::rules::load_rules;

const EXIT_ERROR: u8 = 1;
const EXIT_INDICATIONS: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "appaudit", version, about = "Audit children's Android apps against compliance rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a distribution table for a catalog.
    CatalogStats {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, value_enum, default_value_t = DimensionArg::AgeRating)]
        dimension: DimensionArg,
        #[arg(long, value_enum, default_value_t = StatsFormat::Markdown)]
        format: StatsFormat,
    },
    /// Decode one package and print its feature profile as JSON.
    Scan {
        package: PathBuf,
        /// Store page HTML used for the Teacher Approved badge.
        #[arg(long)]
        store_page: Option<PathBuf>,
        #[command(flatten)]
        detectors: DetectorArgs,
    },
    /// Run the full pipeline and write a compliance report.
    Audit(AuditArgs),
    /// List the active rules with their legal citations.
    RulesList {
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Write the synthetic fixture corpus and its expected report.
    FixturesGen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct DetectorArgs {
    /// Synonym lexicon replacing the bundled one.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// JSON file overriding detector seed phrases.
    #[arg(long)]
    seeds: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    apk_dir: PathBuf,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[command(flatten)]
    detectors: DetectorArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Keep not-applicable verdicts in the per-app listing.
    #[arg(long)]
    verbose: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Do not join packages to records by manifest package id.
    #[arg(long)]
    no_package_id_fallback: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatsFormat {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DimensionArg {
    AgeRating,
    Category,
    Country,
    CategoryByAgeRating,
    CountryByAgeRating,
}

impl From<DimensionArg> for Dimension {
    fn from(d: DimensionArg) -> Dimension {
        match d {
            DimensionArg::AgeRating => Dimension::AgeRating,
            DimensionArg::Category => Dimension::Category,
            DimensionArg::Country => Dimension::Country,
            DimensionArg::CategoryByAgeRating => Dimension::CategoryByAgeRating,
            DimensionArg::CountryByAgeRating => Dimension::CountryByAgeRating,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::CatalogStats {
            catalog,
            dimension,
            format,
        } => catalog_stats(&catalog, dimension.into(), format),
        Command::Scan {
            package,
            store_page,
            detectors,
        } => scan(&package, store_page.as_deref(), &detectors),
        Command::Audit(args) => run_audit(&args),
        Command::RulesList { rules } => rules_list(rules.as_deref()),
        Command::FixturesGen { out, seed } => {
            let report = write_corpus(&out, seed)
                .with_context(|| format!("cannot generate fixtures in {}", out.display()))?;
            println!(
                "wrote {} apps to {} (expected report included)",
                report.meta.corpus_size,
                out.display()
            );
            Ok(0)
        }
    }
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn catalog_stats(path: &Path, dimension: Dimension, format: StatsFormat) -> Result<u8> {
    let parsed = load_catalog_with_warnings(path)
        .with_context(|| format!("cannot load catalog {}", path.display()))?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    let table = aggregate_distribution(&parsed.records, dimension);
    match format {
        StatsFormat::Markdown => write_stdout(emit_distribution_markdown(&table).as_bytes())?,
        StatsFormat::Json => {
            let mut s = serde_json::to_string_pretty(&table)?;
            s.push('\n');
            write_stdout(s.as_bytes())?;
        }
    }
    Ok(0)
}

fn build_detectors(args: &DetectorArgs) -> Result<Detectors> {
    let lexicon = match &args.lexicon {
        Some(p) => load_lexicon(p).with_context(|| format!("cannot load lexicon {}", p.display()))?,
        None => SynonymLexicon::bundled(),
    };
    let seeds = match &args.seeds {
        Some(p) => SeedConfig::load_overrides(p).with_context(|| format!("cannot load seeds {}", p.display()))?,
        None => SeedConfig::default(),
    };
    Ok(Detectors::new(&seeds, &lexicon))
}

fn scan(package: &Path, store_page: Option<&Path>, args: &DetectorArgs) -> Result<u8> {
    let detectors = build_detectors(args)?;
    let teacher_approved = match store_page {
        Some(p) => detect_teacher_approved(
            &std::fs::read_to_string(p).with_context(|| format!("cannot read store page {}", p.display()))?,
        ),
        None => false,
    };
    let app_id = package
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let outcome = scan_path(&app_id, package, StoreFlags { teacher_approved }, &detectors)
        .with_context(|| format!("cannot decode {}", package.display()))?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    let mut s = serde_json::to_string_pretty(&outcome.profile)?;
    s.push('\n');
    write_stdout(s.as_bytes())?;
    Ok(0)
}

fn run_audit(args: &AuditArgs) -> Result<u8> {
    let parsed = load_catalog_with_warnings(&args.catalog)
        .with_context(|| format!("cannot load catalog {}", args.catalog.display()))?;
    let annotations = match &args.annotations {
        Some(p) => load_annotations(p).with_context(|| format!("cannot load annotations {}", p.display()))?,
        None => AnnotationMap::new(),
    };
    let rules = load_rules(args.rules.as_deref()).context("cannot load rules")?;
    let detectors = build_detectors(&args.detectors)?;

    let inputs = AuditInputs {
        catalog: &parsed.records,
        catalog_warnings: &parsed.warnings,
        annotations: &annotations,
        rules: &rules,
        detectors: &detectors,
    };
    let mut config = AuditConfig::new(&args.apk_dir);
    config.workers = usize::from(args.workers);
    config.verbose = args.verbose;
    config.package_id_fallback = !args.no_package_id_fallback;
    let report = audit(&inputs, &config)?;
    for w in &report.warnings {
        log::info!("{w}");
    }

    let bytes = match args.format {
        Format::Json => emit_json(&report),
        Format::Csv => emit_csv(&report)?,
        Format::Markdown => emit_markdown(&report).into_bytes(),
    };
    match &args.out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))?,
        None => write_stdout(&bytes)?,
    }
    Ok(if report.has_indications() { EXIT_INDICATIONS } else { 0 })
}

fn rules_list(path: Option<&Path>) -> Result<u8> {
    let rules = load_rules(path).context("cannot load rules")?;
    let mut out = String::new();
    for rule in &rules.rules {
        out.push_str(&format!("{} [{}] {}\n", rule.rule_id, rule.severity, rule.title));
        for source in &rule.legal_source {
            out.push_str(&format!("    {}: {}\n", source.authority, source.citation));
        }
    }
    out.push_str(&format!("{} rules\n", rules.len()));
    write_stdout(out.as_bytes())?;
    Ok(0)
}
