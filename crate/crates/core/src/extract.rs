//! Metadata extraction: turns a speaker-tagged transcript into a
//! [`MetadataTuple`].
//!
//! The extractors are deliberately small: a valence lexicon for sentiment,
//! keyword counting for topic, whitespace word count for detail and distinct
//! speaker tags for the listener count. Location and relationships come from
//! the record's configured context.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{read_file, Error, Result};
use crate::phrase::{detect_privacy_indication, Phrasebook};
use crate::text::{tokenize, word_count};
use crate::types::{
    ConversationRecord, DetailBucket, MetadataTuple, PeopleBucket, RelationshipClass,
    SentimentClass, NO_TOPIC,
};

const BUILTIN_LEXICON: &str = include_str!("../data/lexicon.tsv");
const BUILTIN_TAXONOMY: &str = include_str!("../data/taxonomy.json");

/// Word-count cut points for [`DetailBucket`]: below `SHORT_BELOW` is short,
/// above `LONG_ABOVE` is long.
pub const SHORT_BELOW: usize = 40;
pub const LONG_ABOVE: usize = 120;

/// Magnitude under which a transcript is neutral regardless of score.
pub const MAGNITUDE_GATE: f64 = 0.05;
pub const SLIGHT_CUT: f64 = 0.05;
pub const STRONG_CUT: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, f64>,
}

impl SentimentLexicon {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (token, valence) in entries {
            let token = token.into();
            let canonical = tokenize(&token);
            if canonical.len() != 1 || canonical[0] != token {
                return Err(Error::resource(
                    "lexicon",
                    format!("token `{token}` must be a single lowercase word without edge punctuation"),
                ));
            }
            if !(-1.0..=1.0).contains(&valence) {
                return Err(Error::resource(
                    "lexicon",
                    format!("valence {valence} for `{token}` outside [-1, 1]"),
                ));
            }
            map.insert(token, valence);
        }
        Ok(SentimentLexicon { entries: map })
    }

    /// `token<TAB>valence` per line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| Error::Parse { line: i + 1, reason };
            let (token, valence) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected token<TAB>valence".into()))?;
            let valence: f64 = valence
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad valence `{valence}`: {e}")))?;
            entries.push((token.to_string(), valence));
        }
        SentimentLexicon::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        SentimentLexicon::parse(&read_file(path)?)
    }

    pub fn builtin() -> Self {
        SentimentLexicon::parse(BUILTIN_LEXICON).expect("builtin lexicon is valid")
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicTaxonomy {
    labels: BTreeMap<String, BTreeSet<String>>,
    min_hits: usize,
}

impl TopicTaxonomy {
    pub fn new<L, K, S>(labels: L, min_hits: usize) -> Result<Self>
    where
        L: IntoIterator<Item = (S, K)>,
        K: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if min_hits == 0 {
            return Err(Error::resource("taxonomy", "min_hits must be positive"));
        }
        let mut map = BTreeMap::new();
        for (label, keywords) in labels {
            let label: String = label.into();
            if label.trim().is_empty() || label.eq_ignore_ascii_case(NO_TOPIC) {
                return Err(Error::resource("taxonomy", format!("reserved or empty label `{label}`")));
            }
            let keywords: BTreeSet<String> = keywords
                .into_iter()
                .flat_map(|k| tokenize(&k.into()))
                .collect();
            if keywords.is_empty() {
                return Err(Error::resource("taxonomy", format!("label `{label}` has no keywords")));
            }
            map.insert(label, keywords);
        }
        Ok(TopicTaxonomy { labels: map, min_hits })
    }

    /// JSON object mapping label to keyword array, plus an integer `min_hits`.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)?;
        let mut min_hits = None;
        let mut labels = Vec::new();
        for (key, value) in doc {
            if key == "min_hits" {
                let n = value
                    .as_u64()
                    .ok_or_else(|| Error::resource("taxonomy", "min_hits must be a positive integer"))?;
                min_hits = Some(n as usize);
                continue;
            }
            let words = value
                .as_array()
                .ok_or_else(|| Error::resource("taxonomy", format!("`{key}` must map to an array")))?
                .iter()
                .map(|w| {
                    w.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::resource("taxonomy", format!("non-string keyword under `{key}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            labels.push((key, words));
        }
        let min_hits = min_hits.ok_or_else(|| Error::resource("taxonomy", "missing min_hits"))?;
        TopicTaxonomy::new(labels, min_hits)
    }

    pub fn load(path: &Path) -> Result<Self> {
        TopicTaxonomy::parse(&read_file(path)?)
    }

    pub fn builtin() -> Self {
        TopicTaxonomy::parse(BUILTIN_TAXONOMY).expect("builtin taxonomy is valid")
    }

    pub fn min_hits(&self) -> usize {
        self.min_hits
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }
}

/// Lexicon, taxonomy and phrasebook bundled for extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Resources {
    pub lexicon: SentimentLexicon,
    pub taxonomy: TopicTaxonomy,
    pub phrasebook: Phrasebook,
}

impl Resources {
    pub fn builtin() -> Self {
        Resources {
            lexicon: SentimentLexicon::builtin(),
            taxonomy: TopicTaxonomy::builtin(),
            phrasebook: Phrasebook::builtin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentimentScore {
    pub score: f64,
    pub magnitude: f64,
}

/// Mean valence over lexicon hits, and mean absolute valence over all tokens.
pub fn analyze_sentiment(text: &str, lexicon: &SentimentLexicon) -> SentimentScore {
    let tokens = tokenize(text);
    let hits: Vec<f64> = tokens.iter().filter_map(|t| lexicon.valence(t)).collect();
    let sum: f64 = hits.iter().sum();
    let abs_sum: f64 = hits.iter().map(|v| v.abs()).sum();
    SentimentScore {
        score: sum / hits.len().max(1) as f64,
        magnitude: abs_sum / tokens.len().max(1) as f64,
    }
}

pub fn quantize_sentiment(s: SentimentScore) -> SentimentClass {
    if s.magnitude < MAGNITUDE_GATE {
        return SentimentClass::Neutral;
    }
    match s.score {
        x if x >= STRONG_CUT => SentimentClass::Positive,
        x if x >= SLIGHT_CUT => SentimentClass::SlightlyPositive,
        x if x > -SLIGHT_CUT => SentimentClass::Neutral,
        x if x > -STRONG_CUT => SentimentClass::SlightlyNegative,
        _ => SentimentClass::Negative,
    }
}

/// Label with the most keyword hits, if it reaches `min_hits`. Repeated
/// tokens count each time. Ties go to the lexicographically first label.
pub fn classify_topic(text: &str, taxonomy: &TopicTaxonomy) -> Option<String> {
    let tokens = tokenize(text);
    let mut best: Option<(&str, usize)> = None;
    for (label, keywords) in &taxonomy.labels {
        let hits = tokens.iter().filter(|t| keywords.contains(*t)).count();
        // labels iterate in sorted order, so strict > keeps the first of equals
        if best.is_none_or(|(_, h)| hits > h) {
            best = Some((label, hits));
        }
    }
    best.filter(|(_, hits)| *hits >= taxonomy.min_hits)
        .map(|(label, _)| label.to_string())
}

pub fn detail_bucket(words: usize) -> DetailBucket {
    if words < SHORT_BELOW {
        DetailBucket::Short
    } else if words <= LONG_ABOVE {
        DetailBucket::Medium
    } else {
        DetailBucket::Long
    }
}

pub fn measure_detail(record: &ConversationRecord) -> Result<DetailBucket> {
    let words: usize = record.utterances().iter().map(|u| word_count(&u.text)).sum();
    if words == 0 {
        return Err(Error::EmptyTranscript);
    }
    Ok(detail_bucket(words))
}

pub fn people_bucket(speakers: usize) -> PeopleBucket {
    match speakers {
        0..=2 => PeopleBucket::Few,
        3..=4 => PeopleBucket::Some,
        _ => PeopleBucket::Many,
    }
}

pub fn count_listeners(record: &ConversationRecord) -> PeopleBucket {
    people_bucket(record.speakers().len())
}

/// Most intimate class over all participant pairs. A record with a single
/// participant has no pairs and uses `fallback`.
pub fn conversation_relationship(
    record: &ConversationRecord,
    fallback: RelationshipClass,
) -> RelationshipClass {
    let participants: Vec<&String> = record.context().participants().iter().collect();
    let mut best: Option<RelationshipClass> = None;
    for (i, a) in participants.iter().enumerate() {
        for b in &participants[i + 1..] {
            let class = record.context().relationship(a, b);
            if best.is_none_or(|c| class.intimacy() > c.intimacy()) {
                best = Some(class);
            }
        }
    }
    best.unwrap_or(fallback)
}

pub fn extract_metadata(
    record: &ConversationRecord,
    resources: &Resources,
    querier_relationship: RelationshipClass,
) -> Result<MetadataTuple> {
    let detail = measure_detail(record)?;
    let text = record.full_text();
    Ok(MetadataTuple {
        sentiment: quantize_sentiment(analyze_sentiment(&text, &resources.lexicon)),
        topic: classify_topic(&text, &resources.taxonomy),
        location: record.context().location,
        relationship: conversation_relationship(record, querier_relationship),
        detail,
        people: count_listeners(record),
        privacy_phrase: detect_privacy_indication(record, &resources.phrasebook).is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ContextInfo, LocationClass, Utterance};
    use proptest::prelude::*;

    fn lex(entries: &[(&str, f64)]) -> SentimentLexicon {
        SentimentLexicon::new(entries.iter().map(|(t, v)| (t.to_string(), *v))).unwrap()
    }

    fn score(score: f64, magnitude: f64) -> SentimentScore {
        SentimentScore { score, magnitude }
    }

    fn words(n: usize) -> String {
        vec!["word"; n].join(" ")
    }

    fn record_with(speakers: &[&str], text_per_speaker: &str) -> ConversationRecord {
        let utterances = speakers.iter().map(|s| Utterance::new(*s, text_per_speaker)).collect();
        ConversationRecord::new(
            "r",
            utterances,
            ContextInfo::new(speakers.iter().copied(), LocationClass::Domestic),
            None,
        )
        .unwrap()
    }

    #[test]
    fn sentiment_no_hits_is_zero() {
        let s = analyze_sentiment("nothing to see here", &lex(&[("good", 0.5)]));
        assert_eq!(s, score(0.0, 0.0));
        assert_eq!(analyze_sentiment("", &lex(&[("good", 0.5)])), score(0.0, 0.0));
    }

    #[test]
    fn sentiment_hand_values() {
        let s = analyze_sentiment("good good bad", &lex(&[("good", 0.5), ("bad", -0.5)]));
        assert!((s.score - 0.5 / 3.0).abs() < 1e-12);
        assert!((s.magnitude - 0.5).abs() < 1e-12);
        let s = analyze_sentiment("bad", &lex(&[("bad", -0.5)]));
        assert_eq!(s, score(-0.5, 0.5));
    }

    #[test]
    fn quantize_table() {
        assert_eq!(quantize_sentiment(score(0.0, 0.0)), SentimentClass::Neutral);
        assert_eq!(quantize_sentiment(score(0.1667, 0.5)), SentimentClass::SlightlyPositive);
        assert_eq!(quantize_sentiment(score(-0.6, 0.9)), SentimentClass::Negative);
        assert_eq!(quantize_sentiment(score(0.9, 0.04)), SentimentClass::Neutral);
        assert_eq!(quantize_sentiment(score(0.25, 0.05)), SentimentClass::Positive);
        assert_eq!(quantize_sentiment(score(0.05, 0.05)), SentimentClass::SlightlyPositive);
        assert_eq!(quantize_sentiment(score(-0.05, 0.05)), SentimentClass::SlightlyNegative);
        assert_eq!(quantize_sentiment(score(-0.25, 0.05)), SentimentClass::Negative);
        assert_eq!(quantize_sentiment(score(0.049, 0.5)), SentimentClass::Neutral);
    }

    #[test]
    fn topic_by_keyword_count() {
        let tax = TopicTaxonomy::new([("Autos & Vehicles", vec!["car", "engine", "tires", "oil"])], 2).unwrap();
        assert_eq!(
            classify_topic("the car engine needs oil and new tires", &tax).as_deref(),
            Some("Autos & Vehicles")
        );
        assert_eq!(classify_topic("we talked about lunch", &tax), None);
        assert_eq!(classify_topic("just the car", &tax), None);
    }

    #[test]
    fn topic_ties_go_to_first_label() {
        let tax = TopicTaxonomy::new([("Zoo", vec!["lion"]), ("Art", vec!["paint"])], 1).unwrap();
        assert_eq!(classify_topic("lion paint", &tax).as_deref(), Some("Art"));
    }

    #[test]
    fn builtin_taxonomy_finds_movie_talk() {
        let t = classify_topic(
            "Did you see that movie last night? The actor was great but the film dragged in the final scene.",
            &TopicTaxonomy::builtin(),
        );
        assert_eq!(t.as_deref(), Some("Arts & Entertainment"));
    }

    #[test]
    fn taxonomy_parsing() {
        let tax = TopicTaxonomy::parse(r#"{"min_hits": 1, "Pets": ["Dog", "cat"]}"#).unwrap();
        assert_eq!(tax.min_hits(), 1);
        assert_eq!(classify_topic("my dog", &tax).as_deref(), Some("Pets"));
        assert!(TopicTaxonomy::parse(r#"{"Pets": ["dog"]}"#).is_err());
        assert!(TopicTaxonomy::parse(r#"{"min_hits": 0, "Pets": ["dog"]}"#).is_err());
        assert!(TopicTaxonomy::parse(r#"{"min_hits": 1, "Pets": []}"#).is_err());
        assert!(TopicTaxonomy::parse(r#"{"min_hits": 1, "None": ["x"]}"#).is_err());
    }

    #[test]
    fn lexicon_parsing_and_validation() {
        let l = SentimentLexicon::parse("# c\ngood\t0.5\n\nbad\t-0.5\n").unwrap();
        assert_eq!(l.valence("bad"), Some(-0.5));
        assert!(matches!(SentimentLexicon::parse("good 0.5"), Err(Error::Parse { line: 1, .. })));
        assert!(SentimentLexicon::parse("good\t1.5").is_err());
        assert!(SentimentLexicon::parse("Good\t0.5").is_err());
        assert!(SentimentLexicon::parse("good!\t0.5").is_err());
        assert!(!SentimentLexicon::builtin().is_empty());
    }

    #[test]
    fn detail_buckets_at_boundaries() {
        assert_eq!(measure_detail(&record_with(&["a"], "hello")).unwrap(), DetailBucket::Short);
        assert_eq!(measure_detail(&record_with(&["a"], &words(39))).unwrap(), DetailBucket::Short);
        assert_eq!(measure_detail(&record_with(&["a"], &words(40))).unwrap(), DetailBucket::Medium);
        assert_eq!(measure_detail(&record_with(&["a"], &words(120))).unwrap(), DetailBucket::Medium);
        assert_eq!(measure_detail(&record_with(&["a"], &words(121))).unwrap(), DetailBucket::Long);
    }

    #[test]
    fn blank_transcript_is_an_error() {
        let r = record_with(&["a", "b"], "   ");
        assert!(matches!(measure_detail(&r), Err(Error::EmptyTranscript)));
        assert!(matches!(
            extract_metadata(&r, &Resources::builtin(), RelationshipClass::Stranger),
            Err(Error::EmptyTranscript)
        ));
    }

    #[test]
    fn listener_buckets() {
        assert_eq!(count_listeners(&record_with(&["a", "b"], "x")), PeopleBucket::Few);
        assert_eq!(count_listeners(&record_with(&["a", "b", "c", "d"], "x")), PeopleBucket::Some);
        assert_eq!(
            count_listeners(&record_with(&["a", "b", "c", "d", "e", "f"], "x")),
            PeopleBucket::Many
        );
    }

    #[test]
    fn relationship_is_most_intimate_pair() {
        let ctx = ContextInfo::new(["a", "b", "c"], LocationClass::Domestic)
            .with_relationship("a", "b", RelationshipClass::Professional)
            .with_relationship("b", "c", RelationshipClass::Close);
        let r = ConversationRecord::new("r", vec![Utterance::new("a", "hi")], ctx, None).unwrap();
        assert_eq!(conversation_relationship(&r, RelationshipClass::Family), RelationshipClass::Close);

        let ctx = ContextInfo::new(["a", "b"], LocationClass::Domestic);
        let r = ConversationRecord::new("r", vec![Utterance::new("a", "hi")], ctx, None).unwrap();
        assert_eq!(conversation_relationship(&r, RelationshipClass::Family), RelationshipClass::Stranger);

        let solo = record_with(&["a"], "hi");
        assert_eq!(conversation_relationship(&solo, RelationshipClass::Close), RelationshipClass::Close);
    }

    #[test]
    fn synthetic_positive_dyad() {
        // 30 words, 2 speakers; hits: happy 0.7, wonderful 0.8, love 0.8
        // score = 2.3/3 = 0.767, magnitude = 2.3/30 = 0.077 -> Positive
        let ctx = ContextInfo::new(["ann", "bea"], LocationClass::Domestic).with_relationship(
            "ann",
            "bea",
            RelationshipClass::Close,
        );
        let r = ConversationRecord::new(
            "syn",
            vec![
                Utterance::new("ann", "I am happy you came over today, it was a wonderful afternoon with the crew here."),
                Utterance::new("bea", "I love that we finally did this, let us do it again next month."),
            ],
            ctx,
            None,
        )
        .unwrap();
        assert_eq!(word_count(&r.full_text()), 30);
        let t = extract_metadata(&r, &Resources::builtin(), RelationshipClass::Stranger).unwrap();
        assert_eq!(
            t,
            MetadataTuple {
                sentiment: SentimentClass::Positive,
                topic: None,
                location: LocationClass::Domestic,
                relationship: RelationshipClass::Close,
                detail: DetailBucket::Short,
                people: PeopleBucket::Few,
                privacy_phrase: false,
            }
        );
    }

    #[test]
    fn extraction_is_deterministic() {
        let r = record_with(&["a", "b", "c"], "my car broke and the engine is a terrible mess");
        let res = Resources::builtin();
        let a = extract_metadata(&r, &res, RelationshipClass::Stranger).unwrap();
        let b = extract_metadata(&r, &res, RelationshipClass::Stranger).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn score_is_bounded(toks in prop::collection::vec(prop::sample::select(vec!["good", "bad", "meh", "great", "awful"]), 0..30)) {
            let l = lex(&[("good", 0.5), ("bad", -0.5), ("great", 1.0), ("awful", -1.0)]);
            let s = analyze_sentiment(&toks.join(" "), &l);
            prop_assert!((-1.0..=1.0).contains(&s.score));
            prop_assert!((0.0..=1.0).contains(&s.magnitude));
        }

        #[test]
        fn quantize_monotone_in_score(a in -1.0f64..=1.0, b in -1.0f64..=1.0, m in 0.05f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize_sentiment(score(lo, m)) <= quantize_sentiment(score(hi, m)));
        }

        #[test]
        fn buckets_monotone(a in 0usize..300, b in 0usize..300) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(detail_bucket(lo) <= detail_bucket(hi));
            prop_assert!(people_bucket(lo) <= people_bucket(hi));
        }
    }
}
