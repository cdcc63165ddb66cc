//! Privacy-indication phrase detection.
//!
//! Each utterance is compared against every phrasebook entry with a binary
//! cosine over token sets. An utterance counts as a privacy indication when
//! its best score reaches the phrasebook threshold.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{read_file, Error, Result};
use crate::text::tokenize;
use crate::types::ConversationRecord;

pub const DEFAULT_THRESHOLD: f64 = 0.7;

const BUILTIN_PHRASES: &str = include_str!("../data/phrasebook.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Phrasebook {
    phrases: Vec<String>,
    token_sets: Vec<BTreeSet<String>>,
    threshold: f64,
}

impl Phrasebook {
    pub fn new<I, S>(phrases: I, threshold: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let phrases: Vec<String> = phrases.into_iter().map(Into::into).collect();
        if phrases.is_empty() {
            return Err(Error::resource("phrasebook", "no phrases"));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::resource(
                "phrasebook",
                format!("threshold {threshold} outside (0, 1]"),
            ));
        }
        let token_sets: Vec<BTreeSet<String>> =
            phrases.iter().map(|p| tokenize(p).into_iter().collect()).collect();
        if let Some(i) = token_sets.iter().position(BTreeSet::is_empty) {
            return Err(Error::resource(
                "phrasebook",
                format!("phrase `{}` has no words", phrases[i]),
            ));
        }
        Ok(Phrasebook {
            phrases,
            token_sets,
            threshold,
        })
    }

    /// One phrase per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, threshold: f64) -> Result<Self> {
        let phrases = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Phrasebook::new(phrases, threshold)
    }

    pub fn load(path: &Path, threshold: f64) -> Result<Self> {
        Phrasebook::parse(&read_file(path)?, threshold)
    }

    pub fn builtin() -> Self {
        Phrasebook::parse(BUILTIN_PHRASES, DEFAULT_THRESHOLD).expect("builtin phrasebook is valid")
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhraseMatch {
    pub utterance_index: usize,
    pub phrase: String,
    pub similarity: f64,
}

fn set_cosine(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count();
    shared as f64 / ((a.len() * b.len()) as f64).sqrt()
}

/// Binary cosine between the token sets of two texts. Empty inputs score 0.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: BTreeSet<String> = tokenize(a).into_iter().collect();
    let b: BTreeSet<String> = tokenize(b).into_iter().collect();
    set_cosine(&a, &b)
}

/// Best (utterance, phrase) pair at or above the threshold. Ties go to the
/// earliest utterance, then to phrasebook order.
pub fn detect_privacy_indication(
    record: &ConversationRecord,
    book: &Phrasebook,
) -> Option<PhraseMatch> {
    let mut best: Option<PhraseMatch> = None;
    for (ui, utterance) in record.utterances().iter().enumerate() {
        let tokens: BTreeSet<String> = tokenize(&utterance.text).into_iter().collect();
        for (pi, phrase_tokens) in book.token_sets.iter().enumerate() {
            let s = set_cosine(&tokens, phrase_tokens);
            if s < book.threshold {
                continue;
            }
            // strict > keeps the first pair seen among equals
            if best.as_ref().is_none_or(|b| s > b.similarity) {
                best = Some(PhraseMatch {
                    utterance_index: ui,
                    phrase: book.phrases[pi].clone(),
                    similarity: s,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ContextInfo, LocationClass, Utterance};
    use proptest::prelude::*;

    fn record(lines: &[&str]) -> ConversationRecord {
        let utterances = lines.iter().map(|l| Utterance::new("a", *l)).collect();
        ConversationRecord::new(
            "r",
            utterances,
            ContextInfo::new(["a"], LocationClass::Domestic),
            None,
        )
        .unwrap()
    }

    #[test]
    fn similarity_spot_values() {
        assert_eq!(similarity("don't tell anyone", "Don't tell anyone!"), 1.0);
        assert_eq!(similarity("red car", "blue boat"), 0.0);
        assert_eq!(similarity("", ""), 0.0);
        let s = similarity("don't tell anyone this", "please don't tell anyone");
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn exact_phrase_matches_with_full_similarity() {
        let book = Phrasebook::new(["Don't tell anyone this"], 0.7).unwrap();
        let m = detect_privacy_indication(&record(&["hey", "Don't tell anyone this"]), &book).unwrap();
        assert_eq!(m.utterance_index, 1);
        assert_eq!(m.similarity, 1.0);
    }

    #[test]
    fn paraphrase_matches_at_three_quarters() {
        let book = Phrasebook::new(["don't tell anyone this"], 0.7).unwrap();
        let m = detect_privacy_indication(&record(&["please don't tell anyone"]), &book).unwrap();
        assert!((m.similarity - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unrelated_transcript_has_no_match() {
        let m = detect_privacy_indication(&record(&["the weather is nice"]), &Phrasebook::builtin());
        assert_eq!(m, None);
    }

    #[test]
    fn ties_prefer_earliest_utterance_then_phrase_order() {
        let book = Phrasebook::new(["keep it quiet", "keep it secret"], 0.5).unwrap();
        let m = detect_privacy_indication(&record(&["so", "keep it", "it, keep"]), &book).unwrap();
        // utterances 1 and 2 both score 2/sqrt(6) against both phrases
        assert_eq!(m.utterance_index, 1);
        assert_eq!(m.phrase, "keep it quiet");
    }

    #[test]
    fn phrasebook_validation() {
        assert!(Phrasebook::new(Vec::<String>::new(), 0.7).is_err());
        assert!(Phrasebook::new(["x"], 0.0).is_err());
        assert!(Phrasebook::new(["x"], 1.5).is_err());
        assert!(Phrasebook::new(["..."], 0.7).is_err());
        let book = Phrasebook::parse("# comment\n\n  keep this secret \n", 0.7).unwrap();
        assert_eq!(book.phrases(), ["keep this secret"]);
    }

    fn words() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]), 0..6)
            .prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn similarity_symmetric_and_bounded(a in words(), b in words()) {
            let s = similarity(&a, &b);
            prop_assert_eq!(s, similarity(&b, &a));
            prop_assert!((0.0..=1.0).contains(&s));
            let sa: BTreeSet<_> = tokenize(&a).into_iter().collect();
            let sb: BTreeSet<_> = tokenize(&b).into_iter().collect();
            prop_assert_eq!(s == 1.0, !sa.is_empty() && sa == sb);
        }

        #[test]
        fn detection_agrees_with_exhaustive_scan(
            lines in prop::collection::vec(words(), 1..5),
            phrases in prop::collection::vec(words().prop_filter("non-empty", |p| !p.is_empty()), 1..4),
            threshold in 0.05f64..=1.0,
        ) {
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let rec = record(&refs);
            let book = Phrasebook::new(phrases.clone(), threshold).unwrap();
            let any = lines.iter().any(|l| phrases.iter().any(|p| similarity(l, p) >= threshold));
            let found = detect_privacy_indication(&rec, &book);
            prop_assert_eq!(found.is_some(), any);
            if let Some(m) = found {
                let best = lines.iter().flat_map(|l| phrases.iter().map(move |p| similarity(l, p)))
                    .fold(0.0f64, f64::max);
                prop_assert_eq!(m.similarity, best);
            }
        }
    }
}
