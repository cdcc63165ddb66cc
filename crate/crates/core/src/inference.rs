//! Weighted rule voting.
//!
//! Every rule whose antecedent matches the sample adds the mean weight of its
//! matched items to the tally of its consequent. The level with the largest
//! tally wins; ties and empty tallies go to the stricter level. A detected
//! privacy phrase forces `High` regardless of the vote.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ControlLevel, ControlTally, Item, MetadataTuple, Rule, RuleSet};

/// Relative slack under which two tallies count as tied. Keeps the winner
/// stable when all weights are rescaled by a common factor.
const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MatchMode {
    /// A rule votes only when its whole antecedent is present.
    #[default]
    Full,
    /// A rule votes as soon as one antecedent item is present.
    Partial,
}

impl FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(MatchMode::Full),
            "partial" => Ok(MatchMode::Partial),
            _ => Err(Error::resource("match mode", format!("`{s}` (expected full|partial)"))),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Full => "full",
            MatchMode::Partial => "partial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleContribution {
    pub rule: Rule,
    pub matched: Vec<Item>,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub predicted: ControlLevel,
    pub overridden: bool,
    pub tally: ControlTally,
    pub entries: Vec<RuleContribution>,
}

/// The vote of one rule, or `None` if it does not fire for this sample.
fn vote(rule: &Rule, sample: &[Item], ruleset: &RuleSet, mode: MatchMode) -> Option<RuleContribution> {
    let matched: Vec<Item> = rule
        .antecedent()
        .iter()
        .filter(|item| sample.contains(item))
        .cloned()
        .collect();
    let floor = match mode {
        MatchMode::Full => rule.antecedent().len(),
        MatchMode::Partial => 1,
    };
    if matched.len() < floor {
        return None;
    }
    let total: f64 = matched.iter().map(|i| ruleset.weights.get(&i.attribute)).sum();
    Some(RuleContribution {
        rule: rule.clone(),
        contribution: total / matched.len() as f64,
        matched,
    })
}

fn votes(sample: &MetadataTuple, ruleset: &RuleSet, mode: MatchMode) -> Vec<RuleContribution> {
    let items = sample.items();
    ruleset
        .rules()
        .iter()
        .filter_map(|r| vote(r, &items, ruleset, mode))
        .collect()
}

fn tally_of(entries: &[RuleContribution]) -> ControlTally {
    let mut tally = ControlTally::default();
    for e in entries {
        tally.add(e.rule.consequent, e.contribution);
    }
    tally
}

pub fn score_controls(sample: &MetadataTuple, ruleset: &RuleSet, mode: MatchMode) -> ControlTally {
    tally_of(&votes(sample, ruleset, mode))
}

/// Argmax over the tally, preferring the stricter level on ties. An all-zero
/// tally means no evidence and yields `High`.
pub fn decide(tally: &ControlTally) -> ControlLevel {
    let max = tally.iter().map(|(_, v)| v).fold(0.0, f64::max);
    if max <= 0.0 {
        return ControlLevel::High;
    }
    let cutoff = max * (1.0 - TIE_EPSILON);
    tally
        .iter()
        .filter(|(_, v)| *v >= cutoff)
        .map(|(level, _)| level)
        .max()
        .expect("max is attained")
}

pub fn predict(sample: &MetadataTuple, ruleset: &RuleSet, mode: MatchMode) -> ControlLevel {
    if sample.privacy_phrase {
        return ControlLevel::High;
    }
    decide(&score_controls(sample, ruleset, mode))
}

pub fn explain(sample: &MetadataTuple, ruleset: &RuleSet, mode: MatchMode) -> Explanation {
    let entries = votes(sample, ruleset, mode);
    let tally = tally_of(&entries);
    let overridden = sample.privacy_phrase;
    Explanation {
        predicted: if overridden { ControlLevel::High } else { decide(&tally) },
        overridden,
        tally,
        entries,
    }
}
