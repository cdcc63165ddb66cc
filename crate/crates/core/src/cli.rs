//! `privctl` command-line front end.
//!
//! Machine-readable output goes to stdout as JSON; human-oriented text and
//! diagnostics go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::corpus::{
    evaluate, ingest_feedback, load_corpus, save_corpus, split, to_transactions, LabelThresholds,
    Scenario, ScoreOrientation,
};
use crate::error::{read_file, write_file, Error, Result};
use crate::extract::{extract_metadata, Resources, SentimentLexicon, TopicTaxonomy};
use crate::gate::{decide_disclosure, TrustGroupConfig};
use crate::inference::{explain, predict, MatchMode};
use crate::miner::{generate_rules, regenerate_rules, MinerConfig};
use crate::phrase::{detect_privacy_indication, Phrasebook, DEFAULT_THRESHOLD};
use crate::types::{
    ContextDoc, ConversationRecord, RecordDoc, RelationshipClass, RuleSet, Utterance, WeightVector,
};

#[derive(Debug, Parser)]
#[command(name = "privctl", version, about = "Conversational privacy controller")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Scenario corpus (JSON Lines)
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,

    /// Rule set file (written by `train`, read by the other commands)
    #[arg(long, global = true)]
    pub ruleset: Option<PathBuf>,

    /// Sentiment lexicon, `token<TAB>valence` per line [default: built in]
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,

    /// Topic taxonomy JSON [default: built in]
    #[arg(long, global = true)]
    pub taxonomy: Option<PathBuf>,

    /// Privacy phrasebook, one phrase per line [default: built in]
    #[arg(long, global = true)]
    pub phrasebook: Option<PathBuf>,

    /// Similarity needed for a phrase match
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD)]
    pub phrase_threshold: f64,

    /// Trust groups JSON, group name -> member ids
    #[arg(long, global = true)]
    pub groups: Option<PathBuf>,

    /// Per-attribute voting weights JSON used by `train`
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,

    /// Privacy-score thresholds `low,moderate`
    #[arg(long, global = true, default_value = "2.3,3.1")]
    pub thresholds: String,

    /// Treat higher privacy scores as less sensitive
    #[arg(long, global = true)]
    pub inverted_scores: bool,

    /// Number of support steps swept during mining
    #[arg(long, global = true, default_value_t = 10)]
    pub n_supports: u32,

    #[arg(long, global = true, default_value_t = 0.5)]
    pub min_confidence: f64,

    #[arg(long, global = true, default_value_t = 7)]
    pub max_antecedent: usize,

    /// Seed for the train/test split
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Split the corpus: train on this many scenarios, hold out the rest
    #[arg(long, global = true)]
    pub train_count: Option<usize>,

    /// full | partial antecedent matching
    #[arg(long, global = true, default_value = "full")]
    pub match_mode: String,

    /// Include the rule-by-rule explanation in `predict` output
    #[arg(long, global = true)]
    pub explain: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine a rule set from the labelled corpus
    Train,
    /// Predict the control level of one conversation
    Predict(ConversationArgs),
    /// Score a rule set against labelled scenarios
    Evaluate,
    /// Predict and show which rules voted
    Explain(ConversationArgs),
    /// Decide whether a stored conversation may be disclosed to someone
    Gate {
        conversation_id: String,
        querier: String,
    },
    /// Add a conversation with an explicit privacy request to the corpus
    Feedback {
        #[command(flatten)]
        conversation: ConversationArgs,
        /// Where to write the grown corpus [default: overwrite --corpus]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ConversationArgs {
    /// Conversation JSON ({id, transcript, context}) or `speaker: text` lines
    pub transcript: PathBuf,

    /// Context JSON, required for `speaker: text` transcripts
    #[arg(long)]
    pub context: Option<PathBuf>,
}

/// Everything loaded and validated before a command runs.
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub ruleset: Option<PathBuf>,
    pub resources: Resources,
    pub groups: TrustGroupConfig,
    pub weights: WeightVector,
    pub thresholds: LabelThresholds,
    pub miner: MinerConfig,
    pub seed: u64,
    pub train_count: Option<usize>,
    pub mode: MatchMode,
    pub explain: bool,
}

fn parse_thresholds(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::resource("thresholds", format!("`{s}` (expected low,moderate)"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        })
    }
}

impl Config {
    pub fn load(opts: &GlobalOpts) -> Result<Self> {
        let lexicon = match &opts.lexicon {
            Some(p) => SentimentLexicon::load(p)?,
            None => SentimentLexicon::builtin(),
        };
        let taxonomy = match &opts.taxonomy {
            Some(p) => TopicTaxonomy::load(p)?,
            None => TopicTaxonomy::builtin(),
        };
        let phrasebook = match &opts.phrasebook {
            Some(p) => Phrasebook::load(p, opts.phrase_threshold)?,
            None => Phrasebook::parse(&Phrasebook::builtin().phrases().join("\n"), opts.phrase_threshold)?,
        };
        let groups = match &opts.groups {
            Some(p) => TrustGroupConfig::load(p)?,
            None => TrustGroupConfig::default(),
        };
        let weights = match &opts.weights {
            Some(p) => serde_json::from_str(&read_file(p)?)?,
            None => WeightVector::default(),
        };
        let (low, moderate) = parse_thresholds(&opts.thresholds)?;
        let orientation = if opts.inverted_scores {
            ScoreOrientation::HigherIsLooser
        } else {
            ScoreOrientation::HigherIsStricter
        };
        let miner = MinerConfig {
            n_supports: opts.n_supports,
            min_confidence: opts.min_confidence,
            max_antecedent_size: opts.max_antecedent,
        };
        if !(0.0..=1.0).contains(&miner.min_confidence) || miner.max_antecedent_size == 0 {
            return Err(Error::resource("miner config", "min-confidence must be in [0,1] and max-antecedent positive"));
        }
        if let Some(p) = &opts.corpus {
            require_file(p)?;
        }
        Ok(Config {
            corpus: opts.corpus.clone(),
            ruleset: opts.ruleset.clone(),
            resources: Resources {
                lexicon,
                taxonomy,
                phrasebook,
            },
            groups,
            weights,
            thresholds: LabelThresholds::new(low, moderate)?.with_orientation(orientation),
            miner,
            seed: opts.seed,
            train_count: opts.train_count,
            mode: opts.match_mode.parse()?,
            explain: opts.explain,
        })
    }

    fn corpus_path(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| Error::resource("arguments", "--corpus is required"))
    }

    fn ruleset_path(&self) -> Result<&Path> {
        self.ruleset
            .as_deref()
            .ok_or_else(|| Error::resource("arguments", "--ruleset is required"))
    }

    fn load_ruleset(&self) -> Result<RuleSet> {
        RuleSet::from_json(&read_file(self.ruleset_path()?)?)
    }

    /// Training and held-out parts, per `--train-count` and `--seed`.
    fn partition(&self, corpus: Vec<Scenario>) -> Result<(Vec<Scenario>, Vec<Scenario>)> {
        match self.train_count {
            Some(k) => split(&corpus, self.seed, k),
            None => Ok((corpus, Vec::new())),
        }
    }
}

/// Reads a conversation either as JSON or as `speaker: text` lines plus a
/// context file. Text transcripts take their id from the file stem.
pub fn read_conversation(args: &ConversationArgs) -> Result<ConversationRecord> {
    let text = read_file(&args.transcript)?;
    if text.trim_start().starts_with('{') {
        let doc: RecordDoc = serde_json::from_str(&text)?;
        return doc.into_record();
    }
    let context_path = args
        .context
        .as_deref()
        .ok_or_else(|| Error::resource("arguments", "--context is required for text transcripts"))?;
    let context: ContextDoc = serde_json::from_str(&read_file(context_path)?)?;
    let mut utterances = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (speaker, said) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: i + 1,
            reason: "expected `speaker: text`".into(),
        })?;
        utterances.push(Utterance::new(speaker.trim(), said.trim()));
    }
    let id = args
        .transcript
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "conversation".into());
    ConversationRecord::new(id, utterances, context.into_context(), None)
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    writeln!(out, "{s}").map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn level_counts(set: &RuleSet) -> serde_json::Value {
    let [low, moderate, high] = set.count_by_level();
    json!({"low": low, "moderate": moderate, "high": high})
}

pub fn cmd_train(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let path = cfg.ruleset_path()?;
    let corpus = load_corpus(cfg.corpus_path()?)?;
    let (train, held_out) = cfg.partition(corpus)?;
    let transactions = to_transactions(&train, &cfg.resources, &cfg.thresholds)?;
    let set = generate_rules(&transactions, &cfg.miner, cfg.weights.clone())?;
    write_file(path, &set.to_json())?;
    print_json(
        out,
        &json!({
            "ruleset": path.display().to_string(),
            "version": set.version,
            "rules": set.len(),
            "by_level": level_counts(&set),
            "train_size": train.len(),
            "held_out": held_out.len(),
        }),
    )
}

fn conversation_report(cfg: &Config, args: &ConversationArgs, with_explanation: bool) -> Result<serde_json::Value> {
    let ruleset = cfg.load_ruleset()?;
    let record = read_conversation(args)?;
    let tuple = extract_metadata(&record, &cfg.resources, RelationshipClass::Stranger)?;
    let phrase = detect_privacy_indication(&record, &cfg.resources.phrasebook);
    let mut report = json!({
        "id": record.id(),
        "level": predict(&tuple, &ruleset, cfg.mode),
        "overridden": tuple.privacy_phrase,
        "metadata": tuple,
        "privacy_phrase": phrase,
        "ruleset_version": ruleset.version,
    });
    if with_explanation {
        report["explanation"] = serde_json::to_value(explain(&tuple, &ruleset, cfg.mode))?;
    }
    Ok(report)
}

pub fn cmd_predict(cfg: &Config, args: &ConversationArgs, out: &mut dyn Write) -> Result<()> {
    let report = conversation_report(cfg, args, cfg.explain)?;
    print_json(out, &report)
}

pub fn cmd_explain(cfg: &Config, args: &ConversationArgs, out: &mut dyn Write) -> Result<()> {
    let report = conversation_report(cfg, args, true)?;
    print_json(out, &report)
}

/// Scores the held-out part when `--train-count` is given, else the whole corpus.
pub fn cmd_evaluate(cfg: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let ruleset = cfg.load_ruleset()?;
    let corpus = load_corpus(cfg.corpus_path()?)?;
    let (train, test) = cfg.partition(corpus)?;
    let scored = if cfg.train_count.is_some() { test } else { train };
    let report = evaluate(&ruleset, &scored, &cfg.resources, &cfg.thresholds, cfg.mode)?;
    let _ = write!(err, "{}", report.to_table());
    print_json(out, &serde_json::to_value(&report)?)
}

pub fn cmd_gate(cfg: &Config, conversation_id: &str, querier: &str, out: &mut dyn Write) -> Result<()> {
    if querier.trim().is_empty() {
        return Err(Error::resource("arguments", "querier id is empty"));
    }
    let ruleset = cfg.load_ruleset()?;
    let corpus = load_corpus(cfg.corpus_path()?)?;
    let scenario = corpus
        .iter()
        .find(|s| s.id() == conversation_id)
        .ok_or_else(|| Error::UnknownConversation(conversation_id.to_string()))?;
    let tuple = scenario.resolve_metadata(&cfg.resources)?;
    let level = predict(&tuple, &ruleset, cfg.mode);
    let decision = decide_disclosure(&scenario.record, level, querier, &cfg.groups);
    print_json(
        out,
        &json!({
            "conversation": conversation_id,
            "querier": querier,
            "level": level,
            "action": decision.action,
            "reason": decision.reason,
        }),
    )
}

/// Appends the conversation as a high-control scenario. When `--ruleset`
/// is given the rules are re-mined; an existing rule set keeps its weights
/// and gets the next version.
pub fn cmd_feedback(
    cfg: &Config,
    args: &ConversationArgs,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let corpus_path = cfg.corpus_path()?;
    let corpus = load_corpus(corpus_path)?;
    let record = read_conversation(args)?;
    let found = detect_privacy_indication(&record, &cfg.resources.phrasebook)
        .ok_or_else(|| Error::NoPrivacyIndication(record.id().to_string()))?;
    let grown = ingest_feedback(&corpus, &record, &found, &cfg.resources)?;
    save_corpus(out_path.unwrap_or(corpus_path), &grown)?;

    let mut report = json!({
        "added": record.id(),
        "phrase": found.phrase,
        "similarity": found.similarity,
        "corpus_size": grown.len(),
    });
    if let Some(path) = &cfg.ruleset {
        let (train, _) = cfg.partition(grown)?;
        let transactions = to_transactions(&train, &cfg.resources, &cfg.thresholds)?;
        let set = if path.is_file() {
            regenerate_rules(&cfg.load_ruleset()?, &transactions, &cfg.miner)?
        } else {
            generate_rules(&transactions, &cfg.miner, cfg.weights.clone())?
        };
        write_file(path, &set.to_json())?;
        report["ruleset_version"] = json!(set.version);
        report["rules"] = json!(set.len());
    }
    print_json(out, &report)
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = Config::load(&cli.opts)?;
    match &cli.command {
        Command::Train => cmd_train(&cfg, out),
        Command::Predict(args) => cmd_predict(&cfg, args, out),
        Command::Evaluate => cmd_evaluate(&cfg, out, err),
        Command::Explain(args) => cmd_explain(&cfg, args, out),
        Command::Gate {
            conversation_id,
            querier,
        } => cmd_gate(&cfg, conversation_id, querier, out),
        Command::Feedback { conversation, out: path } => {
            cmd_feedback(&cfg, conversation, path.as_deref(), out)
        }
    }
}
