use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::kb::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hit1Mode {
    /// `|predicted ∩ gold| / |predicted|`, the expectation of `Sampled`.
    #[default]
    Expected,
    /// Draw one predicted answer uniformly at random; 1 if it is gold.
    Sampled,
}

/// hit@1 for a model that returns an unranked answer set.
///
/// An empty prediction scores 0. `gold` must be non-empty.
pub fn score_hit_at_1<R: Rng + ?Sized>(
    predicted: &BTreeSet<EntityId>,
    gold: &BTreeSet<EntityId>,
    mode: Hit1Mode,
    rng: &mut R,
) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if predicted.is_empty() {
        return Ok(0.0);
    }
    Ok(match mode {
        Hit1Mode::Expected => predicted.intersection(gold).count() as f64 / predicted.len() as f64,
        Hit1Mode::Sampled => {
            let pick = rng.random_range(0..predicted.len());
            let chosen = predicted.iter().nth(pick).expect("index in range");
            if gold.contains(chosen) {
                1.0
            } else {
                0.0
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact: bool,
}

/// Precision, recall, F1 and exact equality of an answer set.
///
/// Empty sets score 0 on the ratio they appear in the denominator of.
pub fn score_sets(predicted: &BTreeSet<EntityId>, gold: &BTreeSet<EntityId>) -> SetScores {
    let hits = predicted.intersection(gold).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { hits / den as f64 };
    let precision = ratio(predicted.len());
    let recall = ratio(gold.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    SetScores {
        precision,
        recall,
        f1,
        exact: !gold.is_empty() && predicted == gold,
    }
}
