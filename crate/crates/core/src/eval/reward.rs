//! Time-sensitive reward: positive for matching a gold answer, negative for
//! matching an answer that is valid for the same subject at another time.

use serde::{Deserialize, Serialize};

use super::metrics::{normalized_key, score_em, score_f1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scorer {
    #[default]
    Em,
    F1,
}

impl Scorer {
    pub fn score<S: AsRef<str>>(self, pred: &str, golds: &[S]) -> f64 {
        match self {
            Scorer::Em => score_em(pred, golds),
            Scorer::F1 => score_f1(pred, golds),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub id: String,
    pub p: f64,
    pub n: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("gold answer '{gold}' also appears among the negatives as '{negative}'")]
pub struct OverlapError {
    pub gold: String,
    pub negative: String,
}

/// Checks that no negative normalizes to the same string as a gold.
pub fn check_disjoint<S: AsRef<str>, T: AsRef<str>>(
    golds: &[S],
    negatives: &[T],
) -> Result<(), OverlapError> {
    for g in golds {
        let gk = normalized_key(g.as_ref());
        if let Some(n) = negatives.iter().find(|n| normalized_key(n.as_ref()) == gk) {
            return Err(OverlapError {
                gold: g.as_ref().to_string(),
                negative: n.as_ref().to_string(),
            });
        }
    }
    Ok(())
}

/// `p` is the best score against the golds, `n` the best score against the
/// negatives (zero when there are none). The reward is `p` when `p >= n` and
/// `-n` otherwise.
pub fn reward<S: AsRef<str>, T: AsRef<str>>(
    id: &str,
    pred: &str,
    golds: &[S],
    negatives: &[T],
    scorer: Scorer,
) -> Result<RewardRecord, OverlapError> {
    check_disjoint(golds, negatives)?;
    let p = scorer.score(pred, golds);
    let n = if negatives.is_empty() {
        0.0
    } else {
        scorer.score(pred, negatives)
    };
    let reward = if p >= n { p } else { -n };
    Ok(RewardRecord {
        id: id.to_string(),
        p,
        n,
        reward,
    })
}
