//! End-to-end evaluation: translate, ground, execute, score.

mod metrics;
mod variance;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotate::QAExample;
use crate::engine::{execute, ExecOptions, DEFAULT_PROOF_CAP};
use crate::error::ErrorKind;
use crate::kb::{EntityId, FactBase};
use crate::translate::{exact_match, MatchMode, Outcome, Translator};

pub use metrics::{score_hit_at_1, score_sets, Hit1Mode, SetScores};
pub use variance::{
    predictions_file_name, variance_run, CellStatus, PredictionSource, VarianceCell, VarianceSummary,
    VarianceTable,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no examples to evaluate")]
    NoExamples,
    #[error("example has an empty gold answer set")]
    EmptyGold,
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl EvalError {
    pub fn kind(&self) -> ErrorKind {
        ErrorKind::Config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub exclude_seed: bool,
    pub rng_seed: u64,
    pub hit1_mode: Hit1Mode,
    /// Number of sampling repeats for variance runs.
    pub repeats: usize,
    pub proof_cap: usize,
    #[serde(skip)]
    pub match_mode: MatchMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            exclude_seed: true,
            rng_seed: 0,
            hit1_mode: Hit1Mode::Expected,
            repeats: 5,
            proof_cap: DEFAULT_PROOF_CAP,
            match_mode: MatchMode::Canonical,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.repeats == 0 {
            return Err(EvalError::Config("repeats must be at least 1".into()));
        }
        if self.proof_cap == 0 {
            return Err(EvalError::Config("proof_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the translator fared on one example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Executed,
    ParseFailure,
    AbsentPrediction,
    /// Parsed, but the query has no ENT placeholder to ground.
    GroundFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleRecord {
    pub id: String,
    pub hop: u8,
    pub entity: EntityId,
    pub predicted_query: String,
    pub gold_query: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub answers: Vec<EntityId>,
    pub gold_answers: Vec<EntityId>,
    pub excluded_seed: Option<EntityId>,
    pub hit_at_1: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact_set: bool,
    pub translator_exact_match: bool,
}

/// Mean metrics over a group of examples.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricSummary {
    pub examples: usize,
    pub hit_at_1: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact_set_accuracy: f64,
    pub translator_exact_match: f64,
    pub parse_failures: usize,
    pub absent_predictions: usize,
    pub ground_failures: usize,
}

impl MetricSummary {
    fn from_records<'a>(records: impl IntoIterator<Item = &'a ExampleRecord>) -> Self {
        let mut s = MetricSummary::default();
        let mut exact = 0usize;
        let mut matched = 0usize;
        for r in records {
            s.examples += 1;
            s.hit_at_1 += r.hit_at_1;
            s.precision += r.precision;
            s.recall += r.recall;
            s.f1 += r.f1;
            exact += usize::from(r.exact_set);
            matched += usize::from(r.translator_exact_match);
            match r.verdict {
                Verdict::ParseFailure => s.parse_failures += 1,
                Verdict::AbsentPrediction => s.absent_predictions += 1,
                Verdict::GroundFailure => s.ground_failures += 1,
                Verdict::Executed => {}
            }
        }
        if s.examples > 0 {
            let n = s.examples as f64;
            s.hit_at_1 /= n;
            s.precision /= n;
            s.recall /= n;
            s.f1 /= n;
            s.exact_set_accuracy = exact as f64 / n;
            s.translator_exact_match = matched as f64 / n;
        }
        s
    }

    fn metric_rows(&self) -> [(&'static str, String); 10] {
        [
            ("examples", self.examples.to_string()),
            ("hit_at_1", self.hit_at_1.to_string()),
            ("precision", self.precision.to_string()),
            ("recall", self.recall.to_string()),
            ("f1", self.f1.to_string()),
            ("exact_set_accuracy", self.exact_set_accuracy.to_string()),
            ("translator_exact_match", self.translator_exact_match.to_string()),
            ("parse_failures", self.parse_failures.to_string()),
            ("absent_predictions", self.absent_predictions.to_string()),
            ("ground_failures", self.ground_failures.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub translator: String,
    pub config: EvalConfig,
    pub overall: MetricSummary,
    pub per_hop: BTreeMap<u8, MetricSummary>,
    /// Ids of examples whose answer set differs from gold.
    pub failures: Vec<String>,
    pub records: Vec<ExampleRecord>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `scope<TAB>metric<TAB>value`, one row per hop and metric, then
    /// the overall rows.
    pub fn summary_tsv(&self) -> String {
        let mut out = String::from("scope\tmetric\tvalue\n");
        let scopes = self
            .per_hop
            .iter()
            .map(|(hop, s)| (format!("{hop}hop"), s))
            .chain(std::iter::once(("overall".to_owned(), &self.overall)));
        for (scope, summary) in scopes {
            for (metric, value) in summary.metric_rows() {
                writeln!(out, "{scope}\t{metric}\t{value}").expect("write to string");
            }
        }
        out
    }

    /// Percent hit@1 for hops 1–3 as a results-table row:
    /// `label & 100.0 & 99.33 & 100.0`.
    pub fn table_row(&self, label: &str) -> String {
        let cells: Vec<String> = (1..=3u8)
            .map(|hop| match self.per_hop.get(&hop) {
                Some(s) => format_percent(s.hit_at_1),
                None => "-".to_owned(),
            })
            .collect();
        format!("{label} & {}", cells.join(" & "))
    }
}

/// Percentage with at most two decimals and at least one: 100.0, 98.67.
pub fn format_percent(fraction: f64) -> String {
    let text = format!("{:.2}", fraction * 100.0);
    match text.strip_suffix('0') {
        Some(short) if !short.ends_with('.') => short.to_owned(),
        _ => text,
    }
}

/// Per-example generator derived from `(seed, example id)`, so results do
/// not depend on evaluation order or thread count.
pub fn example_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let digest = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(id.as_bytes())
        .finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

fn evaluate_one(
    example: &QAExample,
    translator: &dyn Translator,
    fb: &FactBase,
    cfg: &EvalConfig,
) -> Result<ExampleRecord, EvalError> {
    if example.gold_answers.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let translation = translator.translate(example);
    let gold_query = example.path.to_query().map(|q| q.to_string()).unwrap_or_default();
    let translator_exact_match =
        translation.parse_ok() && exact_match(&translation.raw_text, &gold_query, cfg.match_mode);

    let (verdict, error, answers, excluded_seed) = match &translation.outcome {
        Outcome::Parsed(query) => match query.ground(&example.entity) {
            Ok(grounded) => {
                let result = execute(
                    &grounded,
                    fb,
                    ExecOptions {
                        exclude_seed: cfg.exclude_seed,
                        proof_cap: cfg.proof_cap,
                    },
                );
                let answers: BTreeSet<EntityId> = result.answers().cloned().collect();
                (Verdict::Executed, None, answers, result.excluded_seed().cloned())
            }
            Err(e) => (Verdict::GroundFailure, Some(e.to_string()), BTreeSet::new(), None),
        },
        Outcome::ParseFailure(e) => (Verdict::ParseFailure, Some(e.to_string()), BTreeSet::new(), None),
        Outcome::Absent => (Verdict::AbsentPrediction, None, BTreeSet::new(), None),
    };

    let mut rng = example_rng(cfg.rng_seed, &example.id);
    let hit_at_1 = score_hit_at_1(&answers, &example.gold_answers, cfg.hit1_mode, &mut rng)?;
    let sets = score_sets(&answers, &example.gold_answers);
    Ok(ExampleRecord {
        id: example.id.clone(),
        hop: example.hop(),
        entity: example.entity.clone(),
        predicted_query: translation.raw_text,
        gold_query,
        verdict,
        error,
        answers: answers.into_iter().collect(),
        gold_answers: example.gold_answers.iter().cloned().collect(),
        excluded_seed,
        hit_at_1,
        precision: sets.precision,
        recall: sets.recall,
        f1: sets.f1,
        exact_set: sets.exact,
        translator_exact_match,
    })
}

/// Evaluates `translator` on `examples` against `fb`.
///
/// Per-example failures (unparseable or missing predictions) are recorded
/// and scored 0; only an empty example list, an example without gold
/// answers, or a bad configuration is an error.
pub fn evaluate(
    examples: &[QAExample],
    translator: &dyn Translator,
    fb: &FactBase,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(EvalError::NoExamples);
    }
    let records = examples
        .par_iter()
        .map(|ex| evaluate_one(ex, translator, fb, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut by_hop: BTreeMap<u8, Vec<&ExampleRecord>> = BTreeMap::new();
    for r in &records {
        by_hop.entry(r.hop).or_default().push(r);
    }
    let per_hop = by_hop
        .into_iter()
        .map(|(hop, rs)| (hop, MetricSummary::from_records(rs)))
        .collect();
    let failures = records
        .iter()
        .filter(|r| !r.exact_set)
        .map(|r| r.id.clone())
        .collect();
    Ok(EvalReport {
        translator: translator.name().to_owned(),
        config: *cfg,
        overall: MetricSummary::from_records(&records),
        per_hop,
        failures,
        records,
    })
}
