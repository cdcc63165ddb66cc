//! Domain values shared by every stage of the engine.
//!
//! Everything here is an immutable value. Construction goes through
//! validating constructors, and the JSON shapes used by the corpus and rule
//! files are produced by the `*Doc` mirror structs at the bottom.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Lowercase and drop everything that is not alphanumeric, so that
/// `Non-Domestic`, `non_domestic` and `NonDomestic` compare equal.
fn normalize_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! labelled_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $what:literal { $($variant:ident => $label:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let key = normalize_key(s);
                $(
                    if key == normalize_key($label) {
                        return Ok($name::$variant);
                    }
                )+
                Err(Error::resource($what, format!("unknown value `{s}`")))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

labelled_enum! {
    /// Boundary strictness for a conversation. Ordered by severity.
    ControlLevel, "control level" {
        Low => "low",
        Moderate => "moderate",
        High => "high",
    }
}

impl ControlLevel {
    pub fn index(self) -> usize {
        self as usize
    }
}

labelled_enum! {
    /// Relationship between two participants, from configuration.
    RelationshipClass, "relationship class" {
        Family => "family",
        Close => "close",
        Professional => "professional",
        Acquaintance => "acquaintance",
        Stranger => "stranger",
    }
}

impl RelationshipClass {
    /// Higher is more intimate. Family > Close > Professional > Acquaintance > Stranger.
    pub fn intimacy(self) -> u8 {
        match self {
            RelationshipClass::Family => 4,
            RelationshipClass::Close => 3,
            RelationshipClass::Professional => 2,
            RelationshipClass::Acquaintance => 1,
            RelationshipClass::Stranger => 0,
        }
    }
}

labelled_enum! {
    LocationClass, "location class" {
        Domestic => "domestic",
        NonDomestic => "non_domestic",
    }
}

labelled_enum! {
    SentimentClass, "sentiment class" {
        Negative => "negative",
        SlightlyNegative => "slightly_negative",
        Neutral => "neutral",
        SlightlyPositive => "slightly_positive",
        Positive => "positive",
    }
}

labelled_enum! {
    /// Word-count bucket used as a proxy for how much detail was shared.
    DetailBucket, "detail bucket" {
        Short => "short",
        Medium => "medium",
        Long => "long",
    }
}

labelled_enum! {
    PeopleBucket, "people bucket" {
        Few => "few",
        Some => "some",
        Many => "many",
    }
}

labelled_enum! {
    /// Privacy-violation category a scenario was written to illustrate.
    /// Annotation only; never used for inference.
    PvType, "privacy violation type" {
        Pv1 => "PV1",
        Pv2 => "PV2",
        Pv3 => "PV3",
        Pv4 => "PV4",
        Pv5 => "PV5",
        Pv6 => "PV6",
        Pv7 => "PV7",
    }
}

labelled_enum! {
    /// The seven attributes of a metadata tuple.
    Attribute, "attribute" {
        Sentiment => "sentiment",
        Topic => "topic",
        Location => "location",
        Relationship => "relationship",
        Detail => "detail",
        People => "people",
        PrivacyPhrase => "privacy_phrase",
    }
}

/// Item value used for a tuple without a topic.
pub const NO_TOPIC: &str = "None";

/// One `attribute=value` fact. Attributes are free-form strings so the miner
/// can run over arbitrary schemas, not only metadata tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub attribute: String,
    pub value: String,
}

impl Item {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

impl FromStr for Item {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('=') {
            Some((attr, value)) if !attr.is_empty() && !value.is_empty() => {
                Ok(Item::new(attr, value))
            }
            _ => Err(Error::InvalidRule(format!(
                "item `{s}` is not of the form attribute=value"
            ))),
        }
    }
}

impl Serialize for Item {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Item {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The seven-attribute context summary of one conversation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetadataTuple {
    pub sentiment: SentimentClass,
    pub topic: Option<String>,
    pub location: LocationClass,
    pub relationship: RelationshipClass,
    pub detail: DetailBucket,
    pub people: PeopleBucket,
    pub privacy_phrase: bool,
}

impl MetadataTuple {
    pub fn value_of(&self, attribute: Attribute) -> String {
        match attribute {
            Attribute::Sentiment => self.sentiment.to_string(),
            Attribute::Topic => self.topic.clone().unwrap_or_else(|| NO_TOPIC.to_string()),
            Attribute::Location => self.location.to_string(),
            Attribute::Relationship => self.relationship.to_string(),
            Attribute::Detail => self.detail.to_string(),
            Attribute::People => self.people.to_string(),
            Attribute::PrivacyPhrase => self.privacy_phrase.to_string(),
        }
    }

    /// One item per attribute, in attribute order.
    pub fn items(&self) -> Vec<Item> {
        Attribute::ALL
            .iter()
            .map(|&a| Item::new(a.as_str(), self.value_of(a)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub speaker: String,
    pub text: String,
}

impl Utterance {
    pub fn new(speaker: impl Into<String>, text: impl Into<String>) -> Self {
        Utterance {
            speaker: speaker.into(),
            text: text.into(),
        }
    }
}

/// Unordered participant pair, stored with the smaller id first.
pub type SpeakerPair = (String, String);

fn pair_key(a: &str, b: &str) -> SpeakerPair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextInfo {
    participants: BTreeSet<String>,
    relationships: BTreeMap<SpeakerPair, RelationshipClass>,
    pub location: LocationClass,
    pub pv_type: Option<PvType>,
}

impl ContextInfo {
    pub fn new<I, S>(participants: I, location: LocationClass) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ContextInfo {
            participants: participants.into_iter().map(Into::into).collect(),
            relationships: BTreeMap::new(),
            location,
            pv_type: None,
        }
    }

    pub fn with_relationship(mut self, a: &str, b: &str, class: RelationshipClass) -> Self {
        self.relationships.insert(pair_key(a, b), class);
        self
    }

    pub fn with_pv_type(mut self, pv: PvType) -> Self {
        self.pv_type = Some(pv);
        self
    }

    pub fn participants(&self) -> &BTreeSet<String> {
        &self.participants
    }

    pub fn relationships(&self) -> &BTreeMap<SpeakerPair, RelationshipClass> {
        &self.relationships
    }

    /// Configured class for a pair; unconfigured pairs are strangers.
    pub fn relationship(&self, a: &str, b: &str) -> RelationshipClass {
        self.relationships
            .get(&pair_key(a, b))
            .copied()
            .unwrap_or(RelationshipClass::Stranger)
    }

    fn validate(&self, id: &str) -> Result<()> {
        if let Some(p) = self.participants.iter().find(|p| p.trim().is_empty()) {
            return Err(Error::invariant(
                id,
                "context.participants",
                format!("blank participant id `{p}`"),
            ));
        }
        for (a, b) in self.relationships.keys() {
            for who in [a, b] {
                if !self.participants.contains(who) {
                    return Err(Error::invariant(
                        id,
                        "context.relationships",
                        format!("`{who}` is not a participant"),
                    ));
                }
            }
            if a == b {
                return Err(Error::invariant(
                    id,
                    "context.relationships",
                    format!("`{a}` paired with itself"),
                ));
            }
        }
        Ok(())
    }
}

/// A speaker-tagged transcript plus its context.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversationRecord {
    id: String,
    utterances: Vec<Utterance>,
    context: ContextInfo,
    timestamp: Option<i64>,
}

impl ConversationRecord {
    pub fn new(
        id: impl Into<String>,
        utterances: Vec<Utterance>,
        context: ContextInfo,
        timestamp: Option<i64>,
    ) -> Result<Self> {
        let record = ConversationRecord {
            id: id.into(),
            utterances,
            context,
            timestamp,
        };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        let id = self.id.as_str();
        if id.trim().is_empty() {
            return Err(Error::invariant(id, "id", "empty conversation id"));
        }
        if self.utterances.is_empty() {
            return Err(Error::invariant(id, "transcript", "no utterances"));
        }
        for (i, u) in self.utterances.iter().enumerate() {
            if u.speaker.trim().is_empty() {
                return Err(Error::invariant(
                    id,
                    "transcript",
                    format!("utterance {i} has an empty speaker"),
                ));
            }
            if !self.context.participants.contains(&u.speaker) {
                return Err(Error::invariant(
                    id,
                    "transcript",
                    format!("speaker `{}` is not a participant", u.speaker),
                ));
            }
        }
        self.context.validate(id)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn context(&self) -> &ContextInfo {
        &self.context
    }

    pub fn timestamp(&self) -> Option<i64> {
        self.timestamp
    }

    /// Whole transcript joined with spaces.
    pub fn full_text(&self) -> String {
        self.utterances
            .iter()
            .map(|u| u.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn speakers(&self) -> BTreeSet<&str> {
        self.utterances.iter().map(|u| u.speaker.as_str()).collect()
    }

    pub fn is_participant(&self, who: &str) -> bool {
        self.context.participants.contains(who)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RecordDoc::from(self)).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: RecordDoc = serde_json::from_str(s)?;
        doc.into_record()
    }
}

/// An association rule `antecedent => consequent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleDoc")]
pub struct Rule {
    antecedent: Vec<Item>,
    pub consequent: ControlLevel,
    pub support: f64,
    pub confidence: f64,
}

impl Rule {
    /// Antecedent items are sorted; attributes must be unique.
    pub fn new(
        antecedent: impl IntoIterator<Item = Item>,
        consequent: ControlLevel,
        support: f64,
        confidence: f64,
    ) -> Result<Self> {
        let mut antecedent: Vec<Item> = antecedent.into_iter().collect();
        antecedent.sort();
        if antecedent.is_empty() {
            return Err(Error::InvalidRule("empty antecedent".into()));
        }
        for pair in antecedent.windows(2) {
            if pair[0].attribute == pair[1].attribute {
                return Err(Error::InvalidRule(format!(
                    "attribute `{}` appears twice",
                    pair[0].attribute
                )));
            }
        }
        for (name, v) in [("support", support), ("confidence", confidence)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidRule(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(Rule {
            antecedent,
            consequent,
            support,
            confidence,
        })
    }

    pub fn antecedent(&self) -> &[Item] {
        &self.antecedent
    }

    pub fn key(&self) -> (&[Item], ControlLevel) {
        (&self.antecedent, self.consequent)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.antecedent.iter().map(Item::to_string).collect();
        write!(
            f,
            "{{{}}} => {} (support {:.4}, confidence {:.4})",
            items.join(", "),
            self.consequent,
            self.support,
            self.confidence
        )
    }
}

#[derive(Deserialize)]
struct RuleDoc {
    antecedent: Vec<Item>,
    consequent: ControlLevel,
    support: f64,
    confidence: f64,
}

impl TryFrom<RuleDoc> for Rule {
    type Error = Error;

    fn try_from(doc: RuleDoc) -> Result<Self> {
        Rule::new(doc.antecedent, doc.consequent, doc.support, doc.confidence)
    }
}

/// Per-attribute voting weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct WeightVector(BTreeMap<String, f64>);

impl Default for WeightVector {
    fn default() -> Self {
        WeightVector(
            Attribute::ALL
                .iter()
                .map(|a| (a.as_str().to_string(), 1.0))
                .collect(),
        )
    }
}

impl WeightVector {
    /// Starts from the defaults and overrides the given entries.
    pub fn from_map(overrides: BTreeMap<String, f64>) -> Result<Self> {
        let mut weights = WeightVector::default().0;
        weights.extend(overrides);
        let w = WeightVector(weights);
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if let Some((k, v)) = self.0.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::resource("weights", format!("weight for `{k}` is {v}")));
        }
        if !self.0.values().any(|v| *v > 0.0) {
            return Err(Error::resource("weights", "all weights are zero"));
        }
        Ok(())
    }

    /// Weight of an attribute; attributes without an entry weigh 1.0.
    pub fn get(&self, attribute: &str) -> f64 {
        self.0.get(attribute).copied().unwrap_or(1.0)
    }

    pub fn set(&mut self, attribute: &str, weight: f64) -> Result<()> {
        let old = self.0.insert(attribute.to_string(), weight);
        if let Err(e) = self.validate() {
            match old {
                Some(v) => self.0.insert(attribute.to_string(), v),
                None => self.0.remove(attribute),
            };
            return Err(e);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let w = WeightVector(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect());
        w.validate()?;
        Ok(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl TryFrom<BTreeMap<String, f64>> for WeightVector {
    type Error = Error;

    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        WeightVector::from_map(map)
    }
}

impl From<WeightVector> for BTreeMap<String, f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Miner settings recorded alongside a rule set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n_supports: u32,
    pub min_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleSetDoc")]
pub struct RuleSet {
    pub version: u64,
    pub weights: WeightVector,
    pub provenance: Provenance,
    rules: Vec<Rule>,
}

#[derive(Deserialize)]
struct RuleSetDoc {
    version: u64,
    weights: WeightVector,
    provenance: Provenance,
    rules: Vec<Rule>,
}

impl TryFrom<RuleSetDoc> for RuleSet {
    type Error = Error;

    fn try_from(doc: RuleSetDoc) -> Result<Self> {
        RuleSet::new(doc.rules, doc.weights, doc.version, doc.provenance)
    }
}

impl RuleSet {
    pub fn new(
        rules: Vec<Rule>,
        weights: WeightVector,
        version: u64,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &rules {
            if !seen.insert(r.key()) {
                return Err(Error::InvalidRule(format!("duplicate rule {r}")));
            }
        }
        Ok(RuleSet {
            version,
            weights,
            provenance,
            rules,
        })
    }

    pub fn empty() -> Self {
        RuleSet {
            version: 1,
            weights: WeightVector::default(),
            provenance: Provenance {
                n_supports: 0,
                min_confidence: 0.5,
            },
            rules: Vec::new(),
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn with_weights(mut self, weights: WeightVector) -> Self {
        self.weights = weights;
        self
    }

    pub fn count_by_level(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for r in &self.rules {
            counts[r.consequent.index()] += 1;
        }
        counts
    }

    /// Canonical pretty-printed JSON; byte-identical for identical rule sets.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rule set serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Accumulated vote per control level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlTally([f64; 3]);

impl ControlTally {
    pub fn get(&self, level: ControlLevel) -> f64 {
        self.0[level.index()]
    }

    pub fn add(&mut self, level: ControlLevel, amount: f64) {
        debug_assert!(amount >= 0.0);
        self.0[level.index()] += amount;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ControlLevel, f64)> + '_ {
        ControlLevel::ALL.iter().map(|&l| (l, self.get(l)))
    }
}

impl From<[f64; 3]> for ControlTally {
    fn from(values: [f64; 3]) -> Self {
        ControlTally(values)
    }
}

impl Serialize for ControlTally {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(3))?;
        for (level, v) in self.iter() {
            map.serialize_entry(level.as_str(), &v)?;
        }
        map.end()
    }
}

// ---- wire shapes -----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct UtteranceDoc {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct RelationshipDoc {
    pub a: String,
    pub b: String,
    pub class: RelationshipClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ContextDoc {
    pub participants: Vec<String>,
    #[serde(default)]
    pub relationships: Vec<RelationshipDoc>,
    pub location: LocationClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_type: Option<PvType>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct RecordDoc {
    pub id: String,
    pub transcript: Vec<UtteranceDoc>,
    pub context: ContextDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
}

impl ContextDoc {
    pub fn into_context(self) -> ContextInfo {
        let mut ctx = ContextInfo::new(self.participants, self.location);
        for r in self.relationships {
            ctx = ctx.with_relationship(&r.a, &r.b, r.class);
        }
        ctx.pv_type = self.pv_type;
        ctx
    }
}

impl From<&ContextInfo> for ContextDoc {
    fn from(ctx: &ContextInfo) -> Self {
        ContextDoc {
            participants: ctx.participants.iter().cloned().collect(),
            relationships: ctx
                .relationships
                .iter()
                .map(|((a, b), class)| RelationshipDoc {
                    a: a.clone(),
                    b: b.clone(),
                    class: *class,
                })
                .collect(),
            location: ctx.location,
            pv_type: ctx.pv_type,
        }
    }
}

impl RecordDoc {
    pub fn into_record(self) -> Result<ConversationRecord> {
        let utterances = self
            .transcript
            .into_iter()
            .map(|u| Utterance::new(u.speaker, u.text))
            .collect();
        ConversationRecord::new(self.id, utterances, self.context.into_context(), self.timestamp)
    }
}

impl From<&ConversationRecord> for RecordDoc {
    fn from(r: &ConversationRecord) -> Self {
        RecordDoc {
            id: r.id.clone(),
            transcript: r
                .utterances
                .iter()
                .map(|u| UtteranceDoc {
                    speaker: u.speaker.clone(),
                    text: u.text.clone(),
                })
                .collect(),
            context: ContextDoc::from(&r.context),
            timestamp: r.timestamp,
        }
    }
}
