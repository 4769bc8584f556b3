//! Repeated-sampling runs: one evaluation per (sample size, repeat), then
//! min / max / mean hit@1 per size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::Serialize;

use super::{evaluate, EvalConfig, EvalError};
use crate::annotate::QAExample;
use crate::kb::FactBase;
use crate::translate::{FileTranslator, GoldTranslator, PredictionsFile, Translator};

/// Where each cell's translations come from.
#[derive(Debug, Clone)]
pub enum PredictionSource {
    /// Gold translator in every cell (pipeline smoke run / upper bound).
    Gold,
    /// `dir/s{n}_seed{seed}_predictions.tsv` per cell.
    Directory(PathBuf),
}

/// File name of the predictions for a model trained on sample `s{n}_seed{seed}`.
pub fn predictions_file_name(size: usize, seed: u64) -> String {
    format!("s{size}_seed{seed}_predictions.tsv")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum CellStatus {
    Evaluated,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCell {
    pub size: usize,
    pub repeat: usize,
    pub seed: u64,
    pub status: CellStatus,
    /// hit@1 keyed by `1hop`, `2hop`, `3hop`, `overall`.
    pub hit_at_1: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceSummary {
    pub size: usize,
    pub scope: String,
    pub runs: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTable {
    pub cells: Vec<VarianceCell>,
    pub summaries: Vec<VarianceSummary>,
}

impl VarianceTable {
    /// `size<TAB>repeat<TAB>seed<TAB>scope<TAB>hit_at_1`; skipped cells
    /// have scope `-` and value `skipped`.
    pub fn cells_tsv(&self) -> String {
        let mut out = String::from("size\trepeat\tseed\tscope\thit_at_1\n");
        for cell in &self.cells {
            match &cell.status {
                CellStatus::Evaluated => {
                    for (scope, value) in &cell.hit_at_1 {
                        writeln!(
                            out,
                            "{}\t{}\t{}\t{scope}\t{value}",
                            cell.size, cell.repeat, cell.seed
                        )
                        .unwrap();
                    }
                }
                CellStatus::Skipped(_) => {
                    writeln!(out, "{}\t{}\t{}\t-\tskipped", cell.size, cell.repeat, cell.seed).unwrap();
                }
            }
        }
        out
    }

    pub fn summary_tsv(&self) -> String {
        let mut out = String::from("size\tscope\truns\tmin\tmax\tmean\n");
        for s in &self.summaries {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                s.size, s.scope, s.runs, s.min, s.max, s.mean
            )
            .unwrap();
        }
        out
    }

    pub fn summary(&self, size: usize, scope: &str) -> Option<&VarianceSummary> {
        self.summaries.iter().find(|s| s.size == size && s.scope == scope)
    }
}

/// Evaluates every `(size, repeat)` cell. Repeat `r` uses sampling seed
/// `base_seed + r`. A missing or unreadable predictions file skips the
/// cell instead of failing the run.
pub fn variance_run(
    examples: &[QAExample],
    fb: &FactBase,
    cfg: &EvalConfig,
    sizes: &[usize],
    base_seed: u64,
    source: &PredictionSource,
) -> Result<VarianceTable, EvalError> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &size in sizes {
        for repeat in 0..cfg.repeats {
            let seed = base_seed + repeat as u64;
            let translator: Box<dyn Translator> = match source {
                PredictionSource::Gold => Box::new(GoldTranslator),
                PredictionSource::Directory(dir) => {
                    let path = dir.join(predictions_file_name(size, seed));
                    let loaded = File::open(&path)
                        .map_err(|e| e.to_string())
                        .and_then(|f| PredictionsFile::read(BufReader::new(f)).map_err(|e| e.to_string()));
                    match loaded {
                        Ok(preds) => Box::new(FileTranslator::new(path.display().to_string(), preds)),
                        Err(reason) => {
                            tracing::warn!(path = %path.display(), %reason, "skipping variance cell");
                            cells.push(VarianceCell {
                                size,
                                repeat,
                                seed,
                                status: CellStatus::Skipped(format!("{}: {reason}", path.display())),
                                hit_at_1: BTreeMap::new(),
                            });
                            continue;
                        }
                    }
                }
            };
            let report = evaluate(examples, translator.as_ref(), fb, cfg)?;
            let mut hit_at_1: BTreeMap<String, f64> = report
                .per_hop
                .iter()
                .map(|(hop, s)| (format!("{hop}hop"), s.hit_at_1))
                .collect();
            hit_at_1.insert("overall".into(), report.overall.hit_at_1);
            cells.push(VarianceCell {
                size,
                repeat,
                seed,
                status: CellStatus::Evaluated,
                hit_at_1,
            });
        }
    }
    let summaries = summarize(sizes, &cells);
    Ok(VarianceTable { cells, summaries })
}

fn summarize(sizes: &[usize], cells: &[VarianceCell]) -> Vec<VarianceSummary> {
    let mut summaries = Vec::new();
    for &size in sizes {
        let mut by_scope: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for cell in cells.iter().filter(|c| c.size == size) {
            for (scope, &v) in &cell.hit_at_1 {
                by_scope.entry(scope).or_default().push(v);
            }
        }
        for (scope, values) in by_scope {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            summaries.push(VarianceSummary {
                size,
                scope: scope.to_owned(),
                runs: values.len(),
                min,
                max,
                mean,
            });
        }
    }
    summaries
}
