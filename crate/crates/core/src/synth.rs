//! Seeded synthetic inputs: fact slices shaped like career histories and
//! annotated documents for masking. Used by tests and demos when no real
//! knowledge-base extract is at hand.

use rand::Rng as _;

use crate::corpus::{AnnotatedDocument, Span, SpanKind};
use crate::facts::{FactRow, Relation};
use crate::rng;
use crate::time::{default_snapshot, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Subjects per relation.
    pub subjects_per_relation: usize,
    /// Inclusive range of facts per subject, before any filtering.
    pub facts: (usize, usize),
    /// Chance that consecutive facts overlap by a few months.
    pub overlap: f64,
    /// Chance that the last fact has no end.
    pub open_end: f64,
    /// Chance that a start or end is written as a bare year.
    pub year_only: f64,
    /// Size of each relation's object vocabulary; small pools give repeats.
    pub objects_per_relation: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects_per_relation: 100,
            facts: (2, 8),
            overlap: 0.15,
            open_end: 0.3,
            year_only: 0.1,
            objects_per_relation: 60,
        }
    }
}

fn object_name(rel: Relation, k: usize) -> String {
    let kind = match rel {
        Relation::P54 => "Athletic Club",
        Relation::P39 => "Minister of Office",
        Relation::P108 => "Research Institute",
        Relation::P102 => "Party",
        Relation::P286 => "Coach",
        Relation::P69 => "University",
        Relation::P488 => "Chairperson",
        Relation::P6 => "Premier",
        Relation::P35 => "President",
        Relation::P127 => "Holding Group",
    };
    format!("{kind} {}", k + 1)
}

fn fmt_time(t: TimePoint, year_only: bool) -> String {
    if year_only {
        t.year().to_string()
    } else {
        t.to_string()
    }
}

/// Career-like fact rows for every relation. Output order is deterministic
/// for a seed.
pub fn synthetic_facts(config: &SynthConfig, seed: u64) -> Vec<FactRow> {
    let snapshot = default_snapshot();
    let mut rows = Vec::new();
    for rel in Relation::ALL {
        for s in 0..config.subjects_per_relation {
            let subject_id = format!("Q{}{:06}", rel.index() + 1, s);
            let mut rng = rng::rng_for(seed, &format!("synth/{subject_id}"));
            let n = rng.random_range(config.facts.0..=config.facts.1);
            let mut start = TimePoint::new(rng.random_range(1850..=2010), rng.random_range(1..=12)).unwrap();
            for i in 0..n {
                if start > snapshot {
                    break;
                }
                let len = rng.random_range(3..=96);
                let mut end = start.add_months(len).unwrap();
                if end > snapshot {
                    end = snapshot;
                }
                let open = i + 1 == n && rng.random_bool(config.open_end);
                let start_year_only = rng.random_bool(config.year_only) && start.month() == 1;
                let end_year_only = rng.random_bool(config.year_only) && end.month() == 12;
                rows.push(FactRow {
                    subject: format!("Person {} {}", rel.code(), s),
                    subject_id: subject_id.clone(),
                    relation: rel.code().to_string(),
                    object: object_name(rel, rng.random_range(0..config.objects_per_relation)),
                    object_id: String::new(),
                    start: fmt_time(start, start_year_only),
                    end: (!open).then(|| fmt_time(end, end_year_only)),
                });
                let gap = if rng.random_bool(config.overlap) {
                    -rng.random_range(1..=len.min(6))
                } else {
                    rng.random_range(1..=24)
                };
                start = end.add_months(gap).unwrap();
            }
        }
    }
    rows
}

const FILLER: [&str; 8] = ["joined", "left", "and", "moved to", "was appointed by", "in", "after", "until"];

/// Documents made of entity and date spans separated by filler words, with
/// the spans annotated at their character offsets.
pub fn synthetic_documents(count: usize, seed: u64) -> Vec<AnnotatedDocument> {
    (0..count)
        .map(|d| {
            let mut rng = rng::rng_for(seed, &format!("synth-doc/{d}"));
            let mut text = String::new();
            let mut spans = Vec::new();
            let pieces = rng.random_range(1..=20);
            for p in 0..pieces {
                if p > 0 {
                    text.push(' ');
                    text.push_str(FILLER[rng.random_range(0..FILLER.len())]);
                    text.push(' ');
                }
                let (piece, kind) = if rng.random_bool(0.5) {
                    let names = ["Zürich", "Osaka", "São Paulo", "FC Barcelona", "Budgen", "Ōita"];
                    (names[rng.random_range(0..names.len())].to_string(), SpanKind::Entity)
                } else {
                    let t = TimePoint::new(rng.random_range(1000..=2040), rng.random_range(1..=12)).unwrap();
                    (t.to_string(), SpanKind::Temporal)
                };
                let start = text.chars().count();
                text.push_str(&piece);
                spans.push(Span {
                    start,
                    end: text.chars().count(),
                    kind,
                });
            }
            text.push('.');
            AnnotatedDocument {
                doc_id: format!("doc-{d}"),
                text,
                spans,
            }
        })
        .collect()
}
