//! Association-rule mining from labelled metadata.
//!
//! Transactions are the attribute items of one metadata tuple plus a single
//! control-level label item. Frequent itemsets are found level-wise (apriori
//! candidate join + subset pruning) and only itemsets carrying exactly one
//! label item are turned into rules, so every consequent is a control level.
//! [`generate_rules`] repeats the mining over the support sweep `i / n` for
//! `i = 0..=N` and merges the results.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::types::{ControlLevel, Item, MetadataTuple, Provenance, Rule, RuleSet, WeightVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    items: Vec<Item>,
    label: Option<ControlLevel>,
}

impl Transaction {
    /// At most one item per attribute.
    pub fn new(items: impl IntoIterator<Item = Item>, label: Option<ControlLevel>) -> Result<Self> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort();
        items.dedup();
        for w in items.windows(2) {
            if w[0].attribute == w[1].attribute {
                return Err(Error::InvalidRule(format!(
                    "transaction has two values for `{}`",
                    w[0].attribute
                )));
            }
        }
        Ok(Transaction { items, label })
    }

    pub fn from_tuple(tuple: &MetadataTuple, label: Option<ControlLevel>) -> Self {
        Transaction::new(tuple.items(), label).expect("tuple items have distinct attributes")
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn label(&self) -> Option<ControlLevel> {
        self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerConfig {
    pub n_supports: u32,
    pub min_confidence: f64,
    pub max_antecedent_size: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            n_supports: 10,
            min_confidence: 0.5,
            max_antecedent_size: 7,
        }
    }
}

impl MinerConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::resource(
                "miner config",
                format!("min_confidence {} outside [0, 1]", self.min_confidence),
            ));
        }
        if self.max_antecedent_size == 0 {
            return Err(Error::resource("miner config", "max_antecedent_size must be positive"));
        }
        Ok(())
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            n_supports: self.n_supports,
            min_confidence: self.min_confidence,
        }
    }
}

/// An element of a mined itemset: either a metadata item or the label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MineItem {
    Attr(Item),
    Label(ControlLevel),
}

/// Sorted, duplicate-free.
pub type Itemset = Vec<MineItem>;

/// Minimum occurrence count for an itemset to be frequent at `support`.
/// Never below one. The small slack absorbs `i / n * n` rounding up.
pub fn min_count(support: f64, n: usize) -> usize {
    ((support * n as f64 - 1e-9).ceil().max(1.0)) as usize
}

/// Integer-coded view of a corpus. Item ids follow [`MineItem`] order, so a
/// sorted id vector decodes to a sorted itemset.
struct Encoded {
    universe: Vec<MineItem>,
    /// Items sharing a group can never co-occur in one transaction.
    group: Vec<u32>,
    rows: Vec<Vec<u32>>,
}

impl Encoded {
    fn new(transactions: &[Transaction]) -> Self {
        let mut universe: Vec<MineItem> = transactions
            .iter()
            .flat_map(|t| {
                t.items
                    .iter()
                    .cloned()
                    .map(MineItem::Attr)
                    .chain(t.label.map(MineItem::Label))
            })
            .collect();
        universe.sort();
        universe.dedup();
        let index: HashMap<&MineItem, u32> =
            universe.iter().enumerate().map(|(i, m)| (m, i as u32)).collect();

        let mut group_ids: HashMap<Option<&str>, u32> = HashMap::new();
        let group = universe
            .iter()
            .map(|m| {
                let key = match m {
                    MineItem::Attr(item) => Some(item.attribute.as_str()),
                    MineItem::Label(_) => None,
                };
                let next = group_ids.len() as u32;
                *group_ids.entry(key).or_insert(next)
            })
            .collect();

        let rows = transactions
            .iter()
            .map(|t| {
                let mut row: Vec<u32> = t
                    .items
                    .iter()
                    .map(|i| index[&MineItem::Attr(i.clone())])
                    .chain(t.label.map(|l| index[&MineItem::Label(l)]))
                    .collect();
                row.sort_unstable();
                row
            })
            .collect();

        Encoded { universe, group, rows }
    }

    fn decode(&self, ids: &[u32]) -> Itemset {
        ids.iter().map(|&i| self.universe[i as usize].clone()).collect()
    }

    /// Level-wise apriori. Returns every itemset of length `<= max_len`
    /// occurring in at least `min_count` rows, with its count.
    fn frequent(&self, min_count: usize, max_len: usize) -> HashMap<Vec<u32>, usize> {
        let mut all = HashMap::new();
        let mut singles: HashMap<Vec<u32>, usize> = HashMap::new();
        for row in &self.rows {
            for &id in row {
                *singles.entry(vec![id]).or_default() += 1;
            }
        }
        singles.retain(|_, c| *c >= min_count);
        let mut level: Vec<Vec<u32>> = singles.keys().cloned().collect();
        all.extend(singles);

        let mut k = 1;
        while !level.is_empty() && k < max_len {
            level.sort_unstable();
            let known: HashSet<&Vec<u32>> = level.iter().collect();
            let mut candidates: HashMap<Vec<u32>, usize> = HashMap::new();
            for (i, a) in level.iter().enumerate() {
                for b in &level[i + 1..] {
                    if a[..k - 1] != b[..k - 1] {
                        break;
                    }
                    let (x, y) = (a[k - 1], b[k - 1]);
                    if self.group[x as usize] == self.group[y as usize] {
                        continue;
                    }
                    let mut cand = a.clone();
                    cand.push(y);
                    let closed = (0..k - 1).all(|drop| {
                        let mut sub = cand.clone();
                        sub.remove(drop);
                        known.contains(&sub)
                    });
                    if closed {
                        candidates.insert(cand, 0);
                    }
                }
            }
            if candidates.is_empty() {
                break;
            }
            let size = k + 1;
            for row in &self.rows {
                for_each_combination(row, size, |combo| {
                    if let Some(c) = candidates.get_mut(combo) {
                        *c += 1;
                    }
                });
            }
            candidates.retain(|_, c| *c >= min_count);
            level = candidates.keys().cloned().collect();
            all.extend(candidates);
            k = size;
        }
        all
    }
}

fn for_each_combination(row: &[u32], size: usize, mut f: impl FnMut(&[u32])) {
    fn walk(row: &[u32], start: usize, size: usize, buf: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if buf.len() == size {
            f(buf);
            return;
        }
        let needed = size - buf.len();
        for i in start..row.len() {
            if row.len() - i < needed {
                break;
            }
            buf.push(row[i]);
            walk(row, i + 1, size, buf, f);
            buf.pop();
        }
    }
    if size > row.len() {
        return;
    }
    let mut buf = Vec::with_capacity(size);
    walk(row, 0, size, &mut buf, &mut f);
}

fn check_support(support: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&support) {
        return Err(Error::resource("support", format!("{support} outside [0, 1]")));
    }
    Ok(())
}

/// All itemsets (label items included) whose count reaches
/// `max(1, ceil(support * n))`, mapped to their support fraction.
pub fn mine_frequent_itemsets(
    transactions: &[Transaction],
    support: f64,
) -> Result<BTreeMap<Itemset, f64>> {
    if transactions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    check_support(support)?;
    let n = transactions.len();
    let enc = Encoded::new(transactions);
    let max_len = enc.rows.iter().map(Vec::len).max().unwrap_or(0);
    Ok(enc
        .frequent(min_count(support, n), max_len)
        .into_iter()
        .map(|(ids, c)| (enc.decode(&ids), c as f64 / n as f64))
        .collect())
}

fn canonical_order(a: &Rule, b: &Rule) -> std::cmp::Ordering {
    a.antecedent()
        .len()
        .cmp(&b.antecedent().len())
        .then_with(|| a.antecedent().cmp(b.antecedent()))
        .then_with(|| a.consequent.cmp(&b.consequent))
}

/// Rules `items => level` from frequent itemsets holding exactly one label.
/// Each antecedent keeps only its best consequent (highest confidence, then
/// highest level) if that clears `min_confidence`.
pub fn modified_apriori(
    transactions: &[Transaction],
    support: f64,
    config: &MinerConfig,
) -> Result<Vec<Rule>> {
    if transactions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(index) = transactions.iter().position(|t| t.label.is_none()) {
        return Err(Error::MissingLabels { index });
    }
    check_support(support)?;
    config.validate()?;

    let n = transactions.len();
    let enc = Encoded::new(transactions);
    let frequent = enc.frequent(min_count(support, n), config.max_antecedent_size + 1);

    let mut best: BTreeMap<Vec<Item>, (f64, ControlLevel, usize)> = BTreeMap::new();
    for (ids, &count) in &frequent {
        let label_pos: Vec<usize> = ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| matches!(enc.universe[id as usize], MineItem::Label(_)))
            .map(|(i, _)| i)
            .collect();
        if label_pos.len() != 1 || ids.len() < 2 {
            continue;
        }
        let MineItem::Label(level) = enc.universe[ids[label_pos[0]] as usize] else {
            unreachable!()
        };
        let mut antecedent_ids = ids.clone();
        antecedent_ids.remove(label_pos[0]);
        let antecedent_count = frequent[&antecedent_ids];
        let confidence = count as f64 / antecedent_count as f64;
        if confidence < config.min_confidence {
            continue;
        }
        let antecedent: Vec<Item> = enc
            .decode(&antecedent_ids)
            .into_iter()
            .map(|m| match m {
                MineItem::Attr(item) => item,
                MineItem::Label(_) => unreachable!(),
            })
            .collect();
        let slot = best.entry(antecedent).or_insert((confidence, level, count));
        if (confidence, level) > (slot.0, slot.1) {
            *slot = (confidence, level, count);
        }
    }

    let mut rules = best
        .into_iter()
        .map(|(antecedent, (confidence, level, count))| {
            Rule::new(antecedent, level, count as f64 / n as f64, confidence)
        })
        .collect::<Result<Vec<_>>>()?;
    rules.sort_by(canonical_order);
    Ok(rules)
}

/// Mines at supports `0, 1/n, ..., N/n` and merges, keeping one copy of each
/// (antecedent, consequent) pair with the largest support seen.
pub fn generate_rules(
    transactions: &[Transaction],
    config: &MinerConfig,
    weights: WeightVector,
) -> Result<RuleSet> {
    let rules = sweep(transactions, config)?;
    RuleSet::new(rules, weights, 1, config.provenance())
}

/// Re-mines after the corpus changed. Keeps the previous weights and bumps
/// the version.
pub fn regenerate_rules(
    previous: &RuleSet,
    transactions: &[Transaction],
    config: &MinerConfig,
) -> Result<RuleSet> {
    let rules = sweep(transactions, config)?;
    RuleSet::new(
        rules,
        previous.weights.clone(),
        previous.version + 1,
        config.provenance(),
    )
}

/// Support values visited by the sweep.
pub fn sweep_supports(n_supports: u32, n: usize) -> Vec<f64> {
    (0..=n_supports).map(|i| i as f64 / n as f64).collect()
}

fn sweep(transactions: &[Transaction], config: &MinerConfig) -> Result<Vec<Rule>> {
    if transactions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    config.validate()?;
    let mut merged: BTreeMap<(Vec<Item>, ControlLevel), Rule> = BTreeMap::new();
    for support in sweep_supports(config.n_supports, transactions.len()) {
        if support > 1.0 {
            break;
        }
        for rule in modified_apriori(transactions, support, config)? {
            let key = (rule.antecedent().to_vec(), rule.consequent);
            match merged.get_mut(&key) {
                Some(existing) if existing.support >= rule.support => {}
                Some(existing) => *existing = rule,
                None => {
                    merged.insert(key, rule);
                }
            }
        }
    }
    let mut rules: Vec<Rule> = merged.into_values().collect();
    rules.sort_by(canonical_order);
    Ok(rules)
}
