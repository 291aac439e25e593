use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{normalize, Phrase};

const BUNDLED: &str = include_str!("../../data/lexicon.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Token -> synonym phrases. A token is never stored as its own synonym.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    pub entries: BTreeMap<String, BTreeSet<Phrase>>,
}

impl SynonymLexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> SynonymLexicon {
        parse_lexicon(BUNDLED).expect("bundled lexicon parses")
    }

    pub fn synonyms(&self, token: &str) -> impl Iterator<Item = &Phrase> {
        self.entries.get(token).into_iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<SynonymLexicon, LexiconError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_lexicon(&text)
}

/// Parses `seed|syn1,syn2,...` lines; `#` starts a comment line.
pub fn parse_lexicon(text: &str) -> Result<SynonymLexicon, LexiconError> {
    let mut lexicon = SynonymLexicon::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (seed, synonyms) = line.split_once('|').ok_or_else(|| LexiconError::Parse {
            line: i + 1,
            message: "expected `seed|synonym,...`".into(),
        })?;
        let seed_tokens = normalize(seed).tokens;
        let [seed] = seed_tokens.as_slice() else {
            return Err(LexiconError::Parse {
                line: i + 1,
                message: format!("seed `{}` must be a single token", seed.trim()),
            });
        };
        let set = lexicon.entries.entry(seed.clone()).or_default();
        for syn in synonyms.split(',') {
            let phrase = Phrase::parse(syn);
            if phrase.is_empty() || phrase.tokens() == std::slice::from_ref(seed) {
                continue;
            }
            set.insert(phrase);
        }
    }
    lexicon.entries.retain(|_, v| !v.is_empty());
    Ok(lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrases(list: &[&str]) -> BTreeSet<Phrase> {
        list.iter().map(|s| Phrase::parse(s)).collect()
    }

    #[test]
    fn single_line() {
        let lex = parse_lexicon("verification|check,authentication").unwrap();
        assert_eq!(lex.entries["verification"], phrases(&["check", "authentication"]));
    }

    #[test]
    fn empty_file() {
        assert!(parse_lexicon("").unwrap().is_empty());
        assert!(parse_lexicon("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_seeds_union() {
        let lex = parse_lexicon("a|b\na|c\n").unwrap();
        assert_eq!(lex.entries["a"], phrases(&["b", "c"]));
    }

    #[test]
    fn normalized_on_load_and_self_dropped() {
        let lex = parse_lexicon("Consent|PERMISSION, consent ,Go_Ahead").unwrap();
        assert_eq!(lex.entries["consent"], phrases(&["permission", "go ahead"]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_lexicon("a|b\n\nno separator here\n") {
            Err(LexiconError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_lexicon("two words|x"),
            Err(LexiconError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn bundled_parses() {
        let lex = SynonymLexicon::bundled();
        assert!(lex.entries.contains_key("verification"));
        assert!(lex.entries.contains_key("consent"));
        assert!(lex.entries.contains_key("location"));
    }
}
