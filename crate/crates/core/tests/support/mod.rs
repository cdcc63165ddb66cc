#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use privacy_controller::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const TOPICS: [Option<&str>; 5] = [
    None,
    Some("Arts & Entertainment"),
    Some("Health"),
    Some("Sports"),
    Some("Autos & Vehicles"),
];

pub fn random_tuple(rng: &mut impl Rng) -> MetadataTuple {
    MetadataTuple {
        sentiment: *SentimentClass::ALL.choose(rng).unwrap(),
        topic: TOPICS.choose(rng).unwrap().map(str::to_string),
        location: *LocationClass::ALL.choose(rng).unwrap(),
        relationship: *RelationshipClass::ALL.choose(rng).unwrap(),
        detail: *DetailBucket::ALL.choose(rng).unwrap(),
        people: *PeopleBucket::ALL.choose(rng).unwrap(),
        privacy_phrase: false,
    }
}

/// A deterministic `antecedent -> level` mapping hidden in synthetic data.
pub struct PlantedRule {
    pub antecedent: Vec<(Attribute, &'static str)>,
    pub level: ControlLevel,
}

impl PlantedRule {
    pub fn matches(&self, t: &MetadataTuple) -> bool {
        self.antecedent.iter().all(|(a, v)| t.value_of(*a) == *v)
    }

    pub fn apply(&self, t: &mut MetadataTuple) {
        for (attr, value) in &self.antecedent {
            match attr {
                Attribute::Sentiment => t.sentiment = value.parse().unwrap(),
                Attribute::Topic => t.topic = Some(value.to_string()),
                Attribute::Location => t.location = value.parse().unwrap(),
                Attribute::Relationship => t.relationship = value.parse().unwrap(),
                Attribute::Detail => t.detail = value.parse().unwrap(),
                Attribute::People => t.people = value.parse().unwrap(),
                Attribute::PrivacyPhrase => t.privacy_phrase = value.parse().unwrap(),
            }
        }
    }
}

pub fn planted_rules() -> Vec<PlantedRule> {
    use Attribute::*;
    vec![
        PlantedRule {
            antecedent: vec![(Sentiment, "negative"), (Relationship, "professional")],
            level: ControlLevel::High,
        },
        PlantedRule {
            antecedent: vec![(Topic, "Health"), (Location, "non_domestic")],
            level: ControlLevel::High,
        },
        PlantedRule {
            antecedent: vec![(Relationship, "family"), (Location, "domestic")],
            level: ControlLevel::Moderate,
        },
        PlantedRule {
            antecedent: vec![(Detail, "long"), (People, "many")],
            level: ControlLevel::Moderate,
        },
        PlantedRule {
            antecedent: vec![(Sentiment, "positive"), (Topic, "Arts & Entertainment")],
            level: ControlLevel::Low,
        },
    ]
}

/// Samples a planted rule uniformly, forces its antecedent into an otherwise
/// random tuple that triggers no other planted rule, and flips the label to
/// a different level with probability `noise`.
pub fn planted_samples(
    rng: &mut impl Rng,
    rules: &[PlantedRule],
    n: usize,
    noise: f64,
) -> Vec<(MetadataTuple, ControlLevel)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let chosen = &rules[rng.gen_range(0..rules.len())];
        let mut t = random_tuple(rng);
        chosen.apply(&mut t);
        if rules.iter().filter(|r| r.matches(&t)).count() != 1 {
            continue;
        }
        let mut label = chosen.level;
        if rng.gen_bool(noise) {
            let others: Vec<ControlLevel> =
                ControlLevel::ALL.iter().copied().filter(|l| *l != label).collect();
            label = *others.choose(rng).unwrap();
        }
        out.push((t, label));
    }
    out
}

/// Corpus line carrying precomputed metadata and a placeholder transcript.
pub fn scenario_line(id: &str, tuple: &MetadataTuple, label: Option<ControlLevel>) -> String {
    let mut v = serde_json::json!({
        "id": id,
        "transcript": [{"speaker": "a", "text": "placeholder words"}, {"speaker": "b", "text": "more words"}],
        "context": {
            "participants": ["a", "b"],
            "relationships": [{"a": "a", "b": "b", "class": tuple.relationship}],
            "location": tuple.location,
        },
        "metadata": tuple,
    });
    if let Some(l) = label {
        v["label"] = serde_json::json!(l);
    }
    v.to_string()
}

pub fn write_planted_corpus(path: &Path, samples: &[(MetadataTuple, ControlLevel)]) {
    let text: String = samples
        .iter()
        .enumerate()
        .map(|(i, (t, l))| scenario_line(&format!("p{i:03}"), t, Some(*l)) + "\n")
        .collect();
    std::fs::write(path, text).unwrap();
}

pub fn accuracy(ruleset: &RuleSet, samples: &[(MetadataTuple, ControlLevel)], mode: MatchMode) -> f64 {
    let hits = samples
        .iter()
        .filter(|(t, l)| predict(t, ruleset, mode) == *l)
        .count();
    hits as f64 / samples.len() as f64
}

pub fn transactions_of(samples: &[(MetadataTuple, ControlLevel)]) -> Vec<Transaction> {
    samples
        .iter()
        .map(|(t, l)| Transaction::from_tuple(t, Some(*l)))
        .collect()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Random weights in [0, 3] with at least one positive entry.
pub fn random_weights(rng: &mut impl Rng) -> WeightVector {
    let map: BTreeMap<String, f64> = Attribute::ALL
        .iter()
        .map(|a| (a.as_str().to_string(), rng.gen_range(0.0..3.0)))
        .collect();
    WeightVector::from_map(map).unwrap()
}
