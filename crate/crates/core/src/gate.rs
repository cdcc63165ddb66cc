//! Disclosure gate: who may hear about a conversation, and how much.
//!
//! | level    | participant | shares a trust group | outsider |
//! |----------|-------------|----------------------|----------|
//! | low      | full        | full                 | full     |
//! | moderate | full        | summary              | refuse   |
//! | high     | full        | refuse               | refuse   |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};
use crate::types::{ControlLevel, ConversationRecord};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, BTreeSet<String>>", into = "BTreeMap<String, BTreeSet<String>>")]
pub struct TrustGroupConfig {
    groups: BTreeMap<String, BTreeSet<String>>,
}

impl TrustGroupConfig {
    pub fn new(groups: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        for (name, members) in &groups {
            if members.iter().any(|m| m.trim().is_empty()) {
                return Err(Error::resource("groups", format!("group `{name}` has an empty member id")));
            }
        }
        Ok(TrustGroupConfig { groups })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        TrustGroupConfig::parse(&read_file(path)?)
    }

    pub fn with_group<I, S>(mut self, name: &str, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.groups
            .insert(name.to_string(), members.into_iter().map(Into::into).collect());
        TrustGroupConfig::new(self.groups)
    }

    /// First group (by name) containing both ids.
    pub fn shared_group(&self, a: &str, b: &str) -> Option<&str> {
        self.groups
            .iter()
            .find(|(_, m)| m.contains(a) && m.contains(b))
            .map(|(name, _)| name.as_str())
    }
}

impl TryFrom<BTreeMap<String, BTreeSet<String>>> for TrustGroupConfig {
    type Error = Error;

    fn try_from(groups: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        TrustGroupConfig::new(groups)
    }
}

impl From<TrustGroupConfig> for BTreeMap<String, BTreeSet<String>> {
    fn from(c: TrustGroupConfig) -> Self {
        c.groups
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DisclosureAction {
    Full,
    Summary,
    Refuse,
}

impl fmt::Display for DisclosureAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisclosureAction::Full => "full",
            DisclosureAction::Summary => "summary",
            DisclosureAction::Refuse => "refuse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisclosureDecision {
    pub action: DisclosureAction,
    pub reason: String,
}

pub fn decide_disclosure(
    record: &ConversationRecord,
    level: ControlLevel,
    querier: &str,
    groups: &TrustGroupConfig,
) -> DisclosureDecision {
    use DisclosureAction::*;
    let decision = |action, reason: String| DisclosureDecision { action, reason };

    if record.is_participant(querier) {
        return decision(
            Full,
            format!("`{querier}` took part in `{}` and co-owns it", record.id()),
        );
    }
    match level {
        ControlLevel::Low => decision(Full, "low control: open to others".into()),
        ControlLevel::Moderate => {
            let shared = record
                .context()
                .participants()
                .iter()
                .find_map(|p| groups.shared_group(querier, p).map(|g| (p, g)));
            match shared {
                Some((p, g)) => decision(
                    Summary,
                    format!("moderate control: `{querier}` shares group `{g}` with participant `{p}`"),
                ),
                None => decision(
                    Refuse,
                    format!("moderate control: `{querier}` shares no trust group with a participant"),
                ),
            }
        }
        ControlLevel::High => decision(
            Refuse,
            format!("high control: `{querier}` is outside the conversation boundary"),
        ),
    }
}
