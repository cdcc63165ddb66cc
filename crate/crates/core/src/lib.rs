//! Conversational privacy controller.
//!
//! Extracts a seven-attribute metadata tuple from a speaker-tagged
//! transcript, mines association rules from labelled conversations to
//! control levels, predicts a control level by weighted rule voting, and
//! decides how much of a conversation may be disclosed to a given person.
//!
//! ```
//! use privacy_controller::prelude::*;
//!
//! let ctx = ContextInfo::new(["ann", "bob"], LocationClass::Domestic)
//!     .with_relationship("ann", "bob", RelationshipClass::Family);
//! let record = ConversationRecord::new(
//!     "c1",
//!     vec![
//!         Utterance::new("ann", "I lost my job today."),
//!         Utterance::new("ann", "Don't tell anyone this."),
//!     ],
//!     ctx,
//!     None,
//! )
//! .unwrap();
//!
//! let tuple = extract_metadata(&record, &Resources::builtin(), RelationshipClass::Stranger).unwrap();
//! assert!(tuple.privacy_phrase);
//! let level = predict(&tuple, &RuleSet::empty(), MatchMode::Full);
//! assert_eq!(level, ControlLevel::High);
//!
//! let decision = decide_disclosure(&record, level, "eve", &TrustGroupConfig::default());
//! assert_eq!(decision.action, DisclosureAction::Refuse);
//! ```

pub mod cli;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod gate;
pub mod inference;
pub mod miner;
pub mod phrase;
pub mod text;
pub mod types;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::corpus::{
        compute_privacy_score, evaluate, ingest_feedback, label_control, load_corpus, save_corpus,
        split, to_transactions, EvalReport, LabelThresholds, Scenario, ScoreOrientation,
    };
    pub use crate::error::{Error, Result};
    pub use crate::extract::{
        analyze_sentiment, classify_topic, count_listeners, extract_metadata, measure_detail,
        quantize_sentiment, Resources, SentimentLexicon, SentimentScore, TopicTaxonomy,
    };
    pub use crate::gate::{decide_disclosure, DisclosureAction, DisclosureDecision, TrustGroupConfig};
    pub use crate::inference::{explain, predict, score_controls, Explanation, MatchMode};
    pub use crate::miner::{
        generate_rules, mine_frequent_itemsets, modified_apriori, regenerate_rules, MinerConfig,
        Transaction,
    };
    pub use crate::phrase::{detect_privacy_indication, similarity, PhraseMatch, Phrasebook};
    pub use crate::types::*;
}
