//! Scenario corpora: JSON Lines I/O, privacy-score labelling, seeded
//! train/test split, evaluation and feedback ingestion.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, write_file, Error, Result};
use crate::extract::{extract_metadata, Resources};
use crate::inference::{predict, MatchMode};
use crate::miner::Transaction;
use crate::phrase::PhraseMatch;
use crate::types::{ConversationRecord, ControlLevel, MetadataTuple, RecordDoc, RelationshipClass, RuleSet};

/// Upper end of the rating scale. Ratings run from 0 to this value.
pub const RATING_MAX: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub record: ConversationRecord,
    pub metadata: Option<MetadataTuple>,
    pub responses: Option<Vec<f64>>,
    pub label: Option<ControlLevel>,
    pub realism: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    #[serde(flatten)]
    record: RecordDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<MetadataTuple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    responses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<ControlLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    realism: Option<f64>,
}

impl Scenario {
    pub fn new(record: ConversationRecord) -> Self {
        Scenario {
            record,
            metadata: None,
            responses: None,
            label: None,
            realism: None,
        }
    }

    pub fn with_label(mut self, label: ControlLevel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_responses(mut self, responses: Vec<f64>) -> Self {
        self.responses = Some(responses);
        self
    }

    pub fn with_metadata(mut self, metadata: MetadataTuple) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn id(&self) -> &str {
        self.record.id()
    }

    fn validate(&self) -> Result<()> {
        if let Some(responses) = &self.responses {
            if let Some(r) = responses.iter().find(|r| !(0.0..=RATING_MAX).contains(*r)) {
                return Err(Error::invariant(
                    self.id(),
                    "responses",
                    format!("rating {r} outside 0-{RATING_MAX}"),
                ));
            }
        }
        Ok(())
    }

    /// Explicit label if present, otherwise the label of the mean response.
    pub fn resolved_label(&self, thresholds: &LabelThresholds) -> Result<Option<ControlLevel>> {
        if let Some(label) = self.label {
            return Ok(Some(label));
        }
        match &self.responses {
            Some(r) => label_control(compute_privacy_score(r)?, thresholds).map(Some),
            None => Ok(None),
        }
    }

    /// Precomputed metadata, or freshly extracted.
    pub fn resolve_metadata(&self, resources: &Resources) -> Result<MetadataTuple> {
        match &self.metadata {
            Some(m) => Ok(m.clone()),
            None => extract_metadata(&self.record, resources, RelationshipClass::Stranger),
        }
    }

    fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            record: RecordDoc::from(&self.record),
            metadata: self.metadata.clone(),
            responses: self.responses.clone(),
            label: self.label,
            realism: self.realism,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("scenario serializes")
    }
}

/// Which way the privacy score points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ScoreOrientation {
    /// A higher score means a more sensitive conversation.
    #[default]
    HigherIsStricter,
    HigherIsLooser,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelThresholds {
    low_upper: f64,
    moderate_upper: f64,
    pub orientation: ScoreOrientation,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        LabelThresholds {
            low_upper: 2.3,
            moderate_upper: 3.1,
            orientation: ScoreOrientation::HigherIsStricter,
        }
    }
}

impl LabelThresholds {
    pub fn new(low_upper: f64, moderate_upper: f64) -> Result<Self> {
        if !(0.0 <= low_upper && low_upper < moderate_upper && moderate_upper <= RATING_MAX) {
            return Err(Error::resource(
                "thresholds",
                format!("need 0 <= low < moderate <= {RATING_MAX}, got {low_upper},{moderate_upper}"),
            ));
        }
        Ok(LabelThresholds {
            low_upper,
            moderate_upper,
            orientation: ScoreOrientation::HigherIsStricter,
        })
    }

    pub fn with_orientation(mut self, orientation: ScoreOrientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn low_upper(&self) -> f64 {
        self.low_upper
    }

    pub fn moderate_upper(&self) -> f64 {
        self.moderate_upper
    }
}

pub fn compute_privacy_score(responses: &[f64]) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::EmptyResponses);
    }
    Ok(responses.iter().sum::<f64>() / responses.len() as f64)
}

/// Both thresholds belong to the moderate band, which is a closed interval.
pub fn label_control(score: f64, t: &LabelThresholds) -> Result<ControlLevel> {
    if !(0.0..=RATING_MAX).contains(&score) {
        return Err(Error::OutOfRange(score));
    }
    let band = if score < t.low_upper {
        0
    } else if score <= t.moderate_upper {
        1
    } else {
        2
    };
    let ordered = match t.orientation {
        ScoreOrientation::HigherIsStricter => band,
        ScoreOrientation::HigherIsLooser => 2 - band,
    };
    Ok(ControlLevel::ALL[ordered])
}

pub fn parse_corpus(text: &str) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: ScenarioDoc = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let scenario = Scenario {
            record: doc.record.into_record()?,
            metadata: doc.metadata,
            responses: doc.responses,
            label: doc.label,
            realism: doc.realism,
        };
        scenario.validate()?;
        if !ids.insert(scenario.id().to_string()) {
            return Err(Error::DuplicateScenarioId(scenario.id().to_string()));
        }
        out.push(scenario);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Scenario>> {
    parse_corpus(&read_file(path)?)
}

pub fn corpus_to_jsonl(corpus: &[Scenario]) -> String {
    corpus
        .iter()
        .map(|s| s.to_json_line() + "\n")
        .collect()
}

pub fn save_corpus(path: &Path, corpus: &[Scenario]) -> Result<()> {
    write_file(path, &corpus_to_jsonl(corpus))
}

/// Seeded shuffle; the first `train_count` items train, the rest test.
pub fn split<T: Clone>(corpus: &[T], seed: u64, train_count: usize) -> Result<(Vec<T>, Vec<T>)> {
    if train_count > corpus.len() {
        return Err(Error::BadCount {
            requested: train_count,
            available: corpus.len(),
        });
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus[i].clone()).collect();
    Ok((pick(&order[..train_count]), pick(&order[train_count..])))
}

/// Labelled transactions for mining. Scenarios without a resolvable label
/// produce `MissingLabels`.
pub fn to_transactions(
    corpus: &[Scenario],
    resources: &Resources,
    thresholds: &LabelThresholds,
) -> Result<Vec<Transaction>> {
    corpus
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let label = s
                .resolved_label(thresholds)?
                .ok_or(Error::MissingLabels { index })?;
            Ok(Transaction::from_tuple(&s.resolve_metadata(resources)?, Some(label)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub level: ControlLevel,
    pub support: u64,
    /// `None` when the level was never predicted.
    pub precision: Option<f64>,
    /// `None` when the level never occurs.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub total: u64,
    pub accuracy: f64,
    /// Rows are true levels, columns predicted levels, both low..high.
    pub confusion: [[u64; 3]; 3],
    pub per_class: Vec<ClassStats>,
}

impl EvalReport {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (ControlLevel, ControlLevel)>) -> Self {
        let mut confusion = [[0u64; 3]; 3];
        for (truth, predicted) in pairs {
            confusion[truth.index()][predicted.index()] += 1;
        }
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..3).map(|i| confusion[i][i]).sum();
        let per_class = ControlLevel::ALL
            .iter()
            .map(|&level| {
                let i = level.index();
                let support: u64 = confusion[i].iter().sum();
                let predicted: u64 = (0..3).map(|r| confusion[r][i]).sum();
                let hit = confusion[i][i] as f64;
                ClassStats {
                    level,
                    support,
                    precision: (predicted > 0).then(|| hit / predicted as f64),
                    recall: (support > 0).then(|| hit / support as f64),
                }
            })
            .collect();
        EvalReport {
            total,
            accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
            confusion,
            per_class,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "accuracy {:.4} ({} scenarios)", self.accuracy, self.total);
        let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", "true\\pred", "low", "moderate", "high");
        for level in ControlLevel::ALL {
            let row = &self.confusion[level.index()];
            let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", level.as_str(), row[0], row[1], row[2]);
        }
        let _ = writeln!(out, "{:<10} {:>8} {:>9} {:>8}", "class", "support", "precision", "recall");
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>9} {:>8}",
                c.level.as_str(),
                c.support,
                fmt_opt(c.precision),
                fmt_opt(c.recall)
            );
        }
        out
    }
}

pub fn evaluate(
    ruleset: &RuleSet,
    scenarios: &[Scenario],
    resources: &Resources,
    thresholds: &LabelThresholds,
    mode: MatchMode,
) -> Result<EvalReport> {
    let pairs = scenarios
        .iter()
        .map(|s| {
            let truth = s
                .resolved_label(thresholds)?
                .ok_or_else(|| Error::UnlabeledScenario(s.id().to_string()))?;
            let predicted = predict(&s.resolve_metadata(resources)?, ruleset, mode);
            Ok((truth, predicted))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_pairs(pairs))
}

/// Adds a conversation containing an explicit privacy request as a new
/// high-control scenario. The input corpus is left untouched.
pub fn ingest_feedback(
    corpus: &[Scenario],
    record: &ConversationRecord,
    found: &PhraseMatch,
    resources: &Resources,
) -> Result<Vec<Scenario>> {
    if found.utterance_index >= record.utterances().len() {
        return Err(Error::invariant(
            record.id(),
            "feedback",
            format!("match refers to utterance {} of {}", found.utterance_index, record.utterances().len()),
        ));
    }
    if corpus.iter().any(|s| s.id() == record.id()) {
        return Err(Error::DuplicateScenarioId(record.id().to_string()));
    }
    let mut metadata = extract_metadata(record, resources, RelationshipClass::Stranger)?;
    metadata.privacy_phrase = true;
    let mut next = corpus.to_vec();
    next.push(
        Scenario::new(record.clone())
            .with_metadata(metadata)
            .with_label(ControlLevel::High),
    );
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::detect_privacy_indication;
    use crate::types::{ContextInfo, LocationClass, Utterance};
    use proptest::prelude::*;
    use ControlLevel::*;

    fn line(id: &str, extra: &str) -> String {
        format!(
            r#"{{"id":"{id}","transcript":[{{"speaker":"a","text":"we went to the movie and it was great fun"}}],"context":{{"participants":["a","b"],"relationships":[{{"a":"a","b":"b","class":"close"}}],"location":"domestic"}}{extra}}}"#
        )
    }

    fn record(id: &str, text: &str) -> ConversationRecord {
        ConversationRecord::new(
            id,
            vec![Utterance::new("a", text)],
            ContextInfo::new(["a", "b"], LocationClass::Domestic),
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_corpus("\n\n").unwrap().is_empty());
    }

    #[test]
    fn parses_fields() {
        let text = format!(
            "{}\n{}\n",
            line("s1", r#","responses":[2,3,4,3],"realism":4.5,"context_note":1"#),
            line("s2", r#","label":"high""#)
        );
        let c = parse_corpus(&text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].responses.as_deref(), Some(&[2.0, 3.0, 4.0, 3.0][..]));
        assert_eq!(c[0].realism, Some(4.5));
        assert_eq!(c[0].resolved_label(&LabelThresholds::default()).unwrap(), Some(Moderate));
        assert_eq!(c[1].label, Some(High));
    }

    #[test]
    fn rating_out_of_scale_rejected() {
        let err = parse_corpus(&line("s1", r#","responses":[7.2]"#)).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { ref id, ref field, .. } if id == "s1" && field == "responses"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\n\nnot json\n", line("s1", ""));
        assert!(matches!(parse_corpus(&text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{}\n{}\n", line("s1", ""), line("s1", ""));
        assert!(matches!(parse_corpus(&text), Err(Error::DuplicateScenarioId(_))));
    }

    #[test]
    fn unknown_speaker_is_invariant_violation() {
        let bad = r#"{"id":"x","transcript":[{"speaker":"zed","text":"hi"}],"context":{"participants":["a"],"location":"domestic"}}"#;
        assert!(matches!(parse_corpus(bad), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn corpus_round_trip() {
        let text = format!(
            "{}\n{}\n",
            line("s1", r#","responses":[1,2],"realism":5.27"#),
            line("s2", r#","label":"low""#)
        );
        let c = parse_corpus(&text).unwrap();
        let again = parse_corpus(&corpus_to_jsonl(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn privacy_score_mean() {
        assert_eq!(compute_privacy_score(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(compute_privacy_score(&[2.0, 3.0, 4.0, 3.0]).unwrap(), 3.0);
        assert!(matches!(compute_privacy_score(&[]), Err(Error::EmptyResponses)));
    }

    #[test]
    fn label_boundaries() {
        let t = LabelThresholds::default();
        assert_eq!(label_control(2.0, &t).unwrap(), Low);
        assert_eq!(label_control(2.29, &t).unwrap(), Low);
        assert_eq!(label_control(2.3, &t).unwrap(), Moderate);
        assert_eq!(label_control(3.1, &t).unwrap(), Moderate);
        assert_eq!(label_control(3.11, &t).unwrap(), High);
        assert_eq!(label_control(3.5, &t).unwrap(), High);
        assert!(matches!(label_control(6.5, &t), Err(Error::OutOfRange(_))));
        assert!(matches!(label_control(-0.1, &t), Err(Error::OutOfRange(_))));
        assert!(label_control(f64::NAN, &t).is_err());
    }

    #[test]
    fn inverted_orientation() {
        let t = LabelThresholds::default().with_orientation(ScoreOrientation::HigherIsLooser);
        assert_eq!(label_control(1.0, &t).unwrap(), High);
        assert_eq!(label_control(2.5, &t).unwrap(), Moderate);
        assert_eq!(label_control(5.0, &t).unwrap(), Low);
    }

    #[test]
    fn thresholds_validation() {
        assert!(LabelThresholds::new(3.1, 2.3).is_err());
        assert!(LabelThresholds::new(-1.0, 2.3).is_err());
        assert!(LabelThresholds::new(2.0, 6.5).is_err());
        assert!(LabelThresholds::new(2.0, 4.0).is_ok());
    }

    #[test]
    fn split_sizes_and_errors() {
        let items: Vec<u32> = (0..58).collect();
        let (train, test) = split(&items, 7, 46).unwrap();
        assert_eq!((train.len(), test.len()), (46, 12));
        assert_eq!(split(&items, 7, 46).unwrap(), (train, test));
        assert!(matches!(split(&items, 7, 59), Err(Error::BadCount { requested: 59, available: 58 })));
    }

    #[test]
    fn eval_single_mislabel() {
        let mut pairs = vec![(High, High); 9];
        pairs.push((Low, High));
        let r = EvalReport::from_pairs(pairs);
        assert_eq!(r.accuracy, 0.9);
        assert_eq!(r.confusion[Low.index()][High.index()], 1);
        assert_eq!(r.per_class[Low.index()].recall, Some(0.0));
        assert_eq!(r.per_class[Low.index()].precision, None);
        assert_eq!(r.per_class[High.index()].precision, Some(0.9));
        assert!(r.to_table().contains("accuracy 0.9000"));
    }

    #[test]
    fn eval_all_high_with_empty_ruleset() {
        let corpus: Vec<Scenario> = (0..5)
            .map(|i| Scenario::new(record(&format!("s{i}"), "some words here")).with_label(High))
            .collect();
        let r = evaluate(
            &RuleSet::empty(),
            &corpus,
            &Resources::builtin(),
            &LabelThresholds::default(),
            MatchMode::Full,
        )
        .unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn eval_requires_labels() {
        let corpus = vec![Scenario::new(record("u", "hello there"))];
        let r = evaluate(
            &RuleSet::empty(),
            &corpus,
            &Resources::builtin(),
            &LabelThresholds::default(),
            MatchMode::Full,
        );
        assert!(matches!(r, Err(Error::UnlabeledScenario(id)) if id == "u"));
    }

    #[test]
    fn unlabeled_training_data_is_missing_labels() {
        let corpus = vec![Scenario::new(record("u", "hello there"))];
        let r = to_transactions(&corpus, &Resources::builtin(), &LabelThresholds::default());
        assert!(matches!(r, Err(Error::MissingLabels { index: 0 })));
    }

    #[test]
    fn feedback_appends_high_scenario() {
        let res = Resources::builtin();
        let rec = record("fb1", "Don't tell anyone this");
        let found = detect_privacy_indication(&rec, &res.phrasebook).unwrap();
        let corpus = vec![Scenario::new(record("s1", "hello")).with_label(Low)];
        let next = ingest_feedback(&corpus, &rec, &found, &res).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(next.len(), 2);
        let added = next.last().unwrap();
        assert_eq!(added.label, Some(High));
        assert!(added.metadata.as_ref().unwrap().privacy_phrase);
        assert!(matches!(
            ingest_feedback(&next, &rec, &found, &res),
            Err(Error::DuplicateScenarioId(_))
        ));
    }

    proptest! {
        #[test]
        fn label_control_monotone(a in 0.0f64..=6.0, b in 0.0f64..=6.0) {
            let t = LabelThresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(label_control(lo, &t).unwrap() <= label_control(hi, &t).unwrap());
        }

        #[test]
        fn split_is_a_partition(n in 0usize..60, seed in any::<u64>(), frac in 0.0f64..=1.0) {
            let items: Vec<usize> = (0..n).collect();
            let k = (frac * n as f64) as usize;
            let (train, test) = split(&items, seed, k).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort();
            prop_assert_eq!(all, items.clone());
            prop_assert_eq!(train.len(), k);
            prop_assert_eq!(split(&items, seed, k).unwrap(), (train, test));
        }

        #[test]
        fn report_accuracy_is_trace_over_total(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..50)) {
            let r = EvalReport::from_pairs(pairs.iter().map(|(a, b)| (ControlLevel::ALL[*a], ControlLevel::ALL[*b])));
            let trace: u64 = (0..3).map(|i| r.confusion[i][i]).sum();
            prop_assert_eq!(r.accuracy, trace as f64 / r.total as f64);
            for c in &r.per_class {
                prop_assert_eq!(r.confusion[c.level.index()].iter().sum::<u64>(), c.support);
            }
        }
    }
}
