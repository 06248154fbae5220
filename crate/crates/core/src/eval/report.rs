use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{parse_year, score_em, score_f1, score_numeric, UnparseablePolicy};
use crate::questions::{Level, Question};
use crate::templates::L1Form;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub prediction: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Breakdown {
    Period,
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// A question without a prediction counts as wrong.
    #[default]
    ScoreZero,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub breakdowns: Vec<Breakdown>,
    /// Sorted year boundaries; bucket `i` covers `[edges[i], edges[i+1])`.
    pub period_edges: Vec<i32>,
    pub missing: MissingPolicy,
    pub unparseable: UnparseablePolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            breakdowns: vec![Breakdown::Period, Breakdown::Relation],
            period_edges: default_period_edges(),
            missing: MissingPolicy::default(),
            unparseable: UnparseablePolicy::default(),
        }
    }
}

pub fn default_period_edges() -> Vec<i32> {
    (1900..=2040).step_by(20).collect()
}

pub const NO_TIME: &str = "no time";
pub const NO_RELATION: &str = "none";

/// Label of the period bucket holding `year`.
pub fn period_label(year: i32, edges: &[i32]) -> String {
    match edges.iter().rposition(|&e| e <= year) {
        None => format!("before {}", edges.first().copied().unwrap_or(year + 1)),
        Some(i) if i + 1 == edges.len() => format!("{}+", edges[i]),
        Some(i) => format!("{}-{}", edges[i], edges[i + 1]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub count: usize,
    pub em: f64,
    pub f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trend_acc: Option<f64>,
    pub numeric_count: usize,
    pub unparseable: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub label: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Metrics,
    pub per_period: Vec<Bucket>,
    pub per_relation: Vec<Bucket>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate prediction id '{0}'")]
    DuplicatePrediction(String),
    #[error("duplicate question id '{0}'")]
    DuplicateQuestion(String),
    #[error("prediction id '{0}' does not match any question")]
    UnknownPrediction(String),
    #[error("period edges must be strictly increasing and non-empty")]
    BadEdges,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    count: usize,
    em: f64,
    f1: f64,
    numeric: usize,
    abs_sum: f64,
    abs_n: usize,
    trend: usize,
    unparseable: usize,
    missing: usize,
}

impl Acc {
    fn add(&mut self, s: &ItemScore) {
        self.count += 1;
        self.em += s.em;
        self.f1 += s.f1;
        self.missing += s.missing as usize;
        if let Some(n) = s.numeric {
            self.numeric += 1;
            if let Some(e) = n.abs_err {
                self.abs_sum += e as f64;
                self.abs_n += 1;
            }
            self.trend += n.trend_correct as usize;
            self.unparseable += !n.parsed as usize;
        }
    }

    fn finish(&self) -> Metrics {
        let pct = |x: f64, n: usize| if n == 0 { 0.0 } else { 100.0 * x / n as f64 };
        Metrics {
            count: self.count,
            em: pct(self.em, self.count),
            f1: pct(self.f1, self.count),
            mae: (self.abs_n > 0).then(|| self.abs_sum / self.abs_n as f64),
            trend_acc: (self.numeric > 0).then(|| pct(self.trend as f64, self.numeric)),
            numeric_count: self.numeric,
            unparseable: self.unparseable,
            missing: self.missing,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ItemScore {
    em: f64,
    f1: f64,
    numeric: Option<super::metrics::NumericScore>,
    missing: bool,
}

/// Year-valued questions get MAE and trend accuracy on top of EM and F1.
fn numeric_target(q: &Question) -> Option<(i64, i64)> {
    if q.level != Level::L1 {
        return None;
    }
    let form = L1Form::from_id(q.template_id)?;
    if !matches!(form, L1Form::YearShift | L1Form::NextYear) {
        return None;
    }
    let gold = parse_year(q.primary_answer())?;
    Some((gold, q.t_ref?.year() as i64))
}

fn score_item(q: &Question, pred: Option<&str>, cfg: &EvalConfig) -> ItemScore {
    let text = pred.unwrap_or("");
    let (em, f1) = match pred {
        Some(p) => (score_em(p, &q.answers), score_f1(p, &q.answers)),
        None => (0.0, 0.0),
    };
    ItemScore {
        em,
        f1,
        numeric: numeric_target(q).map(|(gold, r)| score_numeric(text, gold, r, cfg.unparseable)),
        missing: pred.is_none(),
    }
}

pub fn evaluate(
    questions: &[Question],
    predictions: &[Prediction],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if cfg.period_edges.is_empty() || cfg.period_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadEdges);
    }
    let mut by_id: HashMap<&str, &Question> = HashMap::with_capacity(questions.len());
    for q in questions {
        if by_id.insert(q.id.as_str(), q).is_some() {
            return Err(EvalError::DuplicateQuestion(q.id.clone()));
        }
    }
    let mut preds: HashMap<&str, &str> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if !by_id.contains_key(p.id.as_str()) {
            return Err(EvalError::UnknownPrediction(p.id.clone()));
        }
        if preds.insert(p.id.as_str(), p.prediction.as_str()).is_some() {
            return Err(EvalError::DuplicatePrediction(p.id.clone()));
        }
    }

    let mut ordered: Vec<&Question> = questions.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    if cfg.missing == MissingPolicy::Skip {
        ordered.retain(|q| preds.contains_key(q.id.as_str()));
    }
    let scores: Vec<ItemScore> = ordered
        .par_iter()
        .map(|q| score_item(q, preds.get(q.id.as_str()).copied(), cfg))
        .collect();

    let mut overall = Acc::default();
    let mut periods: BTreeMap<(i32, String), Acc> = BTreeMap::new();
    let mut relations: BTreeMap<String, Acc> = BTreeMap::new();
    let want_period = cfg.breakdowns.contains(&Breakdown::Period);
    let want_relation = cfg.breakdowns.contains(&Breakdown::Relation);
    for (q, s) in ordered.iter().zip(&scores) {
        overall.add(s);
        if want_period {
            // sort key keeps buckets chronological, undated last
            let key = match q.t_ref {
                Some(t) => {
                    let pos = cfg.period_edges.iter().rposition(|&e| e <= t.year());
                    (pos.map_or(-1, |p| p as i32), period_label(t.year(), &cfg.period_edges))
                }
                None => (i32::MAX, NO_TIME.to_string()),
            };
            periods.entry(key).or_default().add(s);
        }
        if want_relation {
            let label = q.relation.map_or(NO_RELATION.to_string(), |r| r.code().to_string());
            relations.entry(label).or_default().add(s);
        }
    }

    Ok(EvalReport {
        count: overall.count,
        overall: overall.finish(),
        per_period: periods
            .into_iter()
            .map(|((_, label), a)| Bucket {
                label,
                metrics: a.finish(),
            })
            .collect(),
        per_relation: relations
            .into_iter()
            .map(|(label, a)| Bucket {
                label,
                metrics: a.finish(),
            })
            .collect(),
    })
}

fn row(out: &mut String, label: &str, m: &Metrics) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
    let _ = writeln!(
        out,
        "{:<14} {:>8} {:>7.2} {:>7.2} {:>8} {:>9}",
        label,
        m.count,
        m.em,
        m.f1,
        opt(m.mae),
        opt(m.trend_acc)
    );
}

/// Plain-text table of the report, one row per bucket.
pub fn format_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let header = format!(
        "{:<14} {:>8} {:>7} {:>7} {:>8} {:>9}\n",
        "bucket", "count", "EM", "F1", "MAE", "Trend"
    );
    out.push_str(&header);
    row(&mut out, "overall", &report.overall);
    for (title, buckets) in [("period", &report.per_period), ("relation", &report.per_relation)] {
        if buckets.is_empty() {
            continue;
        }
        let _ = writeln!(out, "-- by {title}");
        for b in buckets {
            row(&mut out, &b.label, &b.metrics);
        }
    }
    let o = &report.overall;
    if o.missing > 0 || o.unparseable > 0 {
        let _ = writeln!(out, "missing: {}  unparseable: {}", o.missing, o.unparseable);
    }
    out
}
