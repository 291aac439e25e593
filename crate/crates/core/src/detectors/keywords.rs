use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{NormalizedText, Phrase, SynonymLexicon};

/// Cap on the variants produced from one seed phrase.
pub const MAX_VARIANTS_PER_SEED: usize = 64;

#[derive(Debug, Clone)]
pub struct KeywordSet {
    pub seed_phrases: Vec<Phrase>,
    pub expanded_phrases: Vec<Phrase>,
    by_first_token: HashMap<String, Vec<usize>>,
}

impl PartialEq for KeywordSet {
    fn eq(&self, other: &Self) -> bool {
        self.seed_phrases == other.seed_phrases && self.expanded_phrases == other.expanded_phrases
    }
}

impl KeywordSet {
    fn new(seed_phrases: Vec<Phrase>, expanded_phrases: Vec<Phrase>) -> KeywordSet {
        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, p) in expanded_phrases.iter().enumerate() {
            by_first_token.entry(p.0[0].clone()).or_default().push(i);
        }
        KeywordSet {
            seed_phrases,
            expanded_phrases,
            by_first_token,
        }
    }

    /// A keyword set with no expansion.
    pub fn literal(seeds: &[Phrase]) -> KeywordSet {
        expand_keywords(seeds, &SynonymLexicon::default())
    }

    pub fn contains(&self, phrase: &Phrase) -> bool {
        self.expanded_phrases.contains(phrase)
    }

    pub fn len(&self) -> usize {
        self.expanded_phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded_phrases.is_empty()
    }
}

/// Expands each seed into the product of its per-token alternatives.
///
/// Alternatives for a token are the token itself plus its lexicon synonyms,
/// sorted. Variants are enumerated in odometer order over those sorted lists
/// and cut at [`MAX_VARIANTS_PER_SEED`]; the seed itself is always kept.
pub fn expand_keywords(seeds: &[Phrase], lexicon: &SynonymLexicon) -> KeywordSet {
    let seeds: Vec<Phrase> = seeds.iter().filter(|s| !s.is_empty()).cloned().collect();
    let mut seen = HashSet::new();
    let mut expanded = Vec::new();
    for seed in &seeds {
        for variant in expand_one(seed, lexicon) {
            if seen.insert(variant.clone()) {
                expanded.push(variant);
            }
        }
    }
    KeywordSet::new(seeds, expanded)
}

fn expand_one(seed: &Phrase, lexicon: &SynonymLexicon) -> BTreeSet<Phrase> {
    let alternatives: Vec<Vec<Phrase>> = seed
        .tokens()
        .iter()
        .map(|token| {
            let mut alts: BTreeSet<Phrase> = lexicon.synonyms(token).cloned().collect();
            alts.insert(Phrase(vec![token.clone()]));
            alts.into_iter().collect()
        })
        .collect();

    let mut variants = BTreeSet::new();
    let mut odometer = vec![0usize; alternatives.len()];
    'outer: loop {
        let mut tokens = Vec::new();
        for (alts, &i) in alternatives.iter().zip(&odometer) {
            tokens.extend(alts[i].0.iter().cloned());
        }
        variants.insert(Phrase(tokens));
        if variants.len() >= MAX_VARIANTS_PER_SEED {
            break;
        }
        for pos in (0..odometer.len()).rev() {
            odometer[pos] += 1;
            if odometer[pos] < alternatives[pos].len() {
                continue 'outer;
            }
            odometer[pos] = 0;
        }
        break;
    }
    if !variants.contains(seed) {
        if variants.len() >= MAX_VARIANTS_PER_SEED {
            let last = variants.iter().next_back().cloned();
            if let Some(last) = last {
                variants.remove(&last);
            }
        }
        variants.insert(seed.clone());
    }
    variants
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseMatch {
    pub offset: usize,
    pub phrase: Phrase,
}

/// Every contiguous occurrence of every phrase, sorted by (offset, phrase).
pub fn match_phrases(text: &NormalizedText, keywords: &KeywordSet) -> Vec<PhraseMatch> {
    let tokens = &text.tokens;
    let mut out = Vec::new();
    for (offset, token) in tokens.iter().enumerate() {
        let Some(candidates) = keywords.by_first_token.get(token) else {
            continue;
        };
        for &i in candidates {
            let phrase = &keywords.expanded_phrases[i];
            if tokens[offset..].starts_with(&phrase.0) {
                out.push(PhraseMatch {
                    offset,
                    phrase: phrase.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::super::{normalize, parse_lexicon};
    use super::*;

    fn p(s: &str) -> Phrase {
        Phrase::parse(s)
    }

    #[test]
    fn one_by_two_product() {
        let lex = parse_lexicon("verification|check").unwrap();
        let set = expand_keywords(&[p("age verification")], &lex);
        assert_eq!(set.expanded_phrases, [p("age check"), p("age verification")]);
        assert_eq!(set.seed_phrases, [p("age verification")]);
    }

    #[test]
    fn empty_lexicon_is_identity() {
        let seeds = [p("report abuse"), p("block or report")];
        let set = expand_keywords(&seeds, &SynonymLexicon::default());
        let mut expected = seeds.to_vec();
        expected.sort();
        let mut got = set.expanded_phrases.clone();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn cap_applies_and_keeps_seed() {
        let syn = |prefix: &str| {
            (1..=9)
                .map(|i| format!("{prefix}{i}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        // Seed tokens sort after all synonyms so the seed is not among the
        // first 64 odometer variants.
        let lex = parse_lexicon(&format!("zz|{}\nzy|{}", syn("a"), syn("b"))).unwrap();
        let seed = p("zz zy");
        let set = expand_keywords(std::slice::from_ref(&seed), &lex);
        // 10 x 10 = 100 raw variants
        assert_eq!(set.len(), MAX_VARIANTS_PER_SEED);
        assert!(set.contains(&seed));
        let again = expand_keywords(std::slice::from_ref(&seed), &lex);
        assert_eq!(set, again);
    }

    #[test]
    fn multi_token_synonyms() {
        let lex = parse_lexicon("consent|go-ahead").unwrap();
        let set = expand_keywords(&[p("parental consent")], &lex);
        assert!(set.contains(&p("parental go ahead")));
    }

    #[test]
    fn single_match() {
        let set = KeywordSet::literal(&[p("report abuse")]);
        let m = match_phrases(&normalize("please report abuse here"), &set);
        assert_eq!(
            m,
            [PhraseMatch {
                offset: 1,
                phrase: p("report abuse")
            }]
        );
    }

    #[test]
    fn overlapping_phrases() {
        let set = KeywordSet::literal(&[p("this user"), p("report this")]);
        let m = match_phrases(&normalize("report this user"), &set);
        assert_eq!(
            m,
            [
                PhraseMatch {
                    offset: 0,
                    phrase: p("report this")
                },
                PhraseMatch {
                    offset: 1,
                    phrase: p("this user")
                },
            ]
        );
    }

    #[test]
    fn no_match() {
        let set = KeywordSet::literal(&[p("report abuse")]);
        assert!(match_phrases(&normalize("annual report 2023"), &set).is_empty());
    }
}
