//! Answer normalization and per-item scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercases, strips punctuation, drops English articles, and splits on
/// whitespace.
pub fn normalize(answer: &str) -> Vec<String> {
    let cleaned: String = answer
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    cleaned
        .split_whitespace()
        .filter(|tok| !ARTICLES.contains(tok))
        .map(str::to_string)
        .collect()
}

/// Normalized tokens joined by single spaces; the comparison key for EM.
pub fn normalized_key(answer: &str) -> String {
    normalize(answer).join(" ")
}

pub fn exact_match(pred: &str, gold: &str) -> bool {
    normalize(pred) == normalize(gold)
}

/// 1.0 if the prediction matches any gold after normalization.
pub fn score_em<S: AsRef<str>>(pred: &str, golds: &[S]) -> f64 {
    let p = normalize(pred);
    if golds.iter().any(|g| normalize(g.as_ref()) == p) {
        1.0
    } else {
        0.0
    }
}

pub fn token_f1(pred: &str, gold: &str) -> f64 {
    let p = normalize(pred);
    let g = normalize(gold);
    if p.is_empty() || g.is_empty() {
        return if p == g { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in &g {
        *counts.entry(tok).or_default() += 1;
    }
    let mut common = 0usize;
    for tok in &p {
        if let Some(c) = counts.get_mut(tok.as_str()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Max token F1 over the gold answers.
pub fn score_f1<S: AsRef<str>>(pred: &str, golds: &[S]) -> f64 {
    golds
        .iter()
        .map(|g| token_f1(pred, g.as_ref()))
        .fold(0.0, f64::max)
}

/// How to treat predictions that are not a parseable year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum UnparseablePolicy {
    /// Leave out of the MAE average; still counted as trend-incorrect.
    #[default]
    Exclude,
    /// Count with a fixed absolute error.
    Penalty(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericScore {
    /// `None` when the prediction was unparseable and excluded.
    pub abs_err: Option<u32>,
    pub trend_correct: bool,
    pub parsed: bool,
}

/// Extracts a year from a prediction such as `1906`, `1906.` or `in 1906`.
pub fn parse_year(pred: &str) -> Option<i64> {
    let numeric: Vec<i64> = normalize(pred)
        .iter()
        .filter(|t| t.chars().all(|c| c.is_ascii_digit()) && t.len() <= 6)
        .filter_map(|t| t.parse().ok())
        .collect();
    match numeric.as_slice() {
        [y] => Some(*y),
        _ => None,
    }
}

/// Absolute year error and before/after agreement relative to `ref_year`.
pub fn score_numeric(
    pred: &str,
    gold_year: i64,
    ref_year: i64,
    policy: UnparseablePolicy,
) -> NumericScore {
    match parse_year(pred) {
        Some(year) => NumericScore {
            abs_err: Some(year.abs_diff(gold_year).min(u32::MAX as u64) as u32),
            trend_correct: (year - ref_year).signum() == (gold_year - ref_year).signum(),
            parsed: true,
        },
        None => NumericScore {
            abs_err: match policy {
                UnparseablePolicy::Exclude => None,
                UnparseablePolicy::Penalty(p) => Some(p),
            },
            trend_correct: false,
            parsed: false,
        },
    }
}
