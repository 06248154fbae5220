//! Ingestion, grouping, and subject-level splitting of time-scoped facts.
//!
//! Input rows are `(subject, relation, object, start, end)` records. Facts are
//! grouped by `(subject_id, relation)`; groups with fewer than three facts are
//! dropped and each relation keeps at most a fixed number of subjects.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::time::{parse_time, Granularity, TimeError, TimeInterval, TimePoint};

/// The ten time-sensitive Wikidata relations supported by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    P54,
    P39,
    P108,
    P102,
    P286,
    P69,
    P488,
    P6,
    P35,
    P127,
}

impl Relation {
    pub const ALL: [Relation; 10] = [
        Relation::P54,
        Relation::P39,
        Relation::P108,
        Relation::P102,
        Relation::P286,
        Relation::P69,
        Relation::P488,
        Relation::P6,
        Relation::P35,
        Relation::P127,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Relation::P54 => "P54",
            Relation::P39 => "P39",
            Relation::P108 => "P108",
            Relation::P102 => "P102",
            Relation::P286 => "P286",
            Relation::P69 => "P69",
            Relation::P488 => "P488",
            Relation::P6 => "P6",
            Relation::P35 => "P35",
            Relation::P127 => "P127",
        }
    }

    /// Position in [`Relation::ALL`]; doubles as the template id.
    pub fn index(self) -> usize {
        Relation::ALL.iter().position(|r| *r == self).unwrap()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .iter()
            .copied()
            .find(|r| r.code() == s)
            .ok_or_else(|| format!("unsupported relation '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub subject: String,
    pub subject_id: String,
    pub relation: Relation,
    pub object: String,
    pub object_id: String,
    pub interval: TimeInterval,
}

impl Fact {
    fn order_key(&self) -> impl Ord + '_ {
        (
            self.interval.order_key(),
            self.object.as_str(),
            self.object_id.as_str(),
        )
    }
}

/// One input line as it appears on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactRow {
    pub subject: String,
    pub subject_id: String,
    pub relation: String,
    pub object: String,
    pub object_id: String,
    pub start: String,
    #[serde(default)]
    pub end: Option<String>,
}

impl From<&Fact> for FactRow {
    fn from(f: &Fact) -> Self {
        FactRow {
            subject: f.subject.clone(),
            subject_id: f.subject_id.clone(),
            relation: f.relation.code().to_string(),
            object: f.object.clone(),
            object_id: f.object_id.clone(),
            start: f.interval.start().to_string(),
            end: f.interval.end().map(|e| e.to_string()),
        }
    }
}

impl FactRow {
    /// Validates the row. Year-only times default to January for starts and
    /// December for ends.
    pub fn validate(&self) -> Result<Fact, String> {
        let relation: Relation = self.relation.parse()?;
        if self.subject_id.trim().is_empty() {
            return Err("empty subject_id".into());
        }
        if self.object.trim().is_empty() {
            return Err("empty object".into());
        }
        let time_err = |field: &str, e: TimeError| format!("field '{field}': {e}");
        let start = parse_time(&self.start)
            .map_err(|e| time_err("start", e))?
            .point;
        let end = match self.end.as_deref() {
            None => None,
            Some(s) => {
                let e = parse_time(s).map_err(|e| time_err("end", e))?;
                Some(match e.granularity {
                    Granularity::Month => e.point,
                    Granularity::Year => TimePoint::new(e.point.year(), 12).unwrap(),
                })
            }
        };
        let interval = TimeInterval::new(start, end).map_err(|e| e.to_string())?;
        Ok(Fact {
            subject: self.subject.trim().to_string(),
            subject_id: self.subject_id.trim().to_string(),
            relation,
            object: self.object.trim().to_string(),
            object_id: self.object_id.trim().to_string(),
            interval,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{0}")]
    Row(Diagnostic),
    #[error("read failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Stop at the first malformed row.
    FailFast,
    /// Skip malformed rows and report them.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct FactStore {
    facts: Vec<Fact>,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub store: FactStore,
    pub diagnostics: Vec<Diagnostic>,
}

/// Reads fact rows from JSON lines. Blank lines and `_meta` header lines
/// are ignored.
pub fn ingest<R: BufRead>(reader: R, strictness: Strictness) -> Result<Ingested, IngestError> {
    let mut facts = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || crate::jsonl::is_header_line(trimmed) {
            continue;
        }
        let parsed = serde_json::from_str::<FactRow>(trimmed)
            .map_err(|e| format!("schema violation: {e}"))
            .and_then(|row| row.validate());
        match parsed {
            Ok(fact) => facts.push(fact),
            Err(message) => {
                let diag = Diagnostic {
                    line: i + 1,
                    message,
                };
                if strictness == Strictness::FailFast {
                    return Err(IngestError::Row(diag));
                }
                diagnostics.push(diag);
            }
        }
    }
    Ok(Ingested {
        store: FactStore { facts },
        diagnostics,
    })
}

impl FactStore {
    pub fn from_facts(facts: Vec<Fact>) -> Self {
        Self { facts }
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// All groups without size filtering or subject caps, keyed for lookup.
    pub fn index(&self) -> GroupIndex {
        GroupIndex {
            groups: collect_groups(&self.facts)
                .into_iter()
                .map(|g| (g.key(), g))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub subject_id: String,
    pub relation: Relation,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.relation, self.subject_id)
    }
}

/// Facts sharing a subject and relation, sorted chronologically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactGroup {
    subject_id: String,
    relation: Relation,
    facts: Vec<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("group has no facts")]
    Empty,
    #[error("fact for {subject_id}/{relation} does not belong to the group")]
    Mixed {
        subject_id: String,
        relation: Relation,
    },
}

impl FactGroup {
    /// Builds a group, sorting and deduplicating its facts.
    pub fn new(mut facts: Vec<Fact>) -> Result<Self, GroupError> {
        let first = facts.first().ok_or(GroupError::Empty)?;
        let (subject_id, relation) = (first.subject_id.clone(), first.relation);
        if let Some(f) = facts
            .iter()
            .find(|f| f.subject_id != subject_id || f.relation != relation)
        {
            return Err(GroupError::Mixed {
                subject_id: f.subject_id.clone(),
                relation: f.relation,
            });
        }
        facts.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        facts.dedup_by(|a, b| {
            a.object == b.object && a.object_id == b.object_id && a.interval == b.interval
        });
        Ok(Self {
            subject_id,
            relation,
            facts,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn subject(&self) -> &str {
        &self.facts[0].subject
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn key(&self) -> GroupKey {
        GroupKey {
            subject_id: self.subject_id.clone(),
            relation: self.relation,
        }
    }
}

fn collect_groups(facts: &[Fact]) -> Vec<FactGroup> {
    let mut by_key: BTreeMap<(&str, Relation), Vec<Fact>> = BTreeMap::new();
    for f in facts {
        by_key
            .entry((f.subject_id.as_str(), f.relation))
            .or_default()
            .push(f.clone());
    }
    by_key
        .into_values()
        .map(|fs| FactGroup::new(fs).expect("non-empty homogeneous group"))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct GroupIndex {
    groups: HashMap<GroupKey, FactGroup>,
}

impl GroupIndex {
    pub fn get(&self, subject_id: &str, relation: Relation) -> Option<&FactGroup> {
        self.groups.get(&GroupKey {
            subject_id: subject_id.to_string(),
            relation,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub min_facts: usize,
    pub max_subjects_per_relation: Option<usize>,
    pub seed: u64,
}

impl Default for GroupConfig {
    fn default() -> Self {
        Self {
            min_facts: 3,
            max_subjects_per_relation: Some(2000),
            seed: 0,
        }
    }
}

/// Groups facts by `(subject_id, relation)`, drops small groups, and caps the
/// number of subjects per relation with a seeded shuffle. The result is sorted
/// by relation then subject id and does not depend on input row order.
pub fn build_groups(store: &FactStore, config: &GroupConfig) -> Vec<FactGroup> {
    let kept: Vec<FactGroup> = collect_groups(&store.facts)
        .into_iter()
        .filter(|g| g.len() >= config.min_facts)
        .collect();

    let Some(cap) = config.max_subjects_per_relation else {
        return sorted_by_relation(kept);
    };
    let mut by_relation: BTreeMap<Relation, Vec<FactGroup>> = BTreeMap::new();
    for g in kept {
        by_relation.entry(g.relation).or_default().push(g);
    }
    let mut out = Vec::new();
    for (relation, mut groups) in by_relation {
        if groups.len() > cap {
            // collect_groups already sorted these by subject id
            let mut rng = rng::rng_for(config.seed, &format!("subject-cap/{relation}"));
            groups.shuffle(&mut rng);
            groups.truncate(cap);
        }
        out.extend(groups);
    }
    sorted_by_relation(out)
}

fn sorted_by_relation(mut groups: Vec<FactGroup>) -> Vec<FactGroup> {
    groups.sort_by(|a, b| {
        (a.relation, a.subject_id.as_str()).cmp(&(b.relation, b.subject_id.as_str()))
    });
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSpec {
    /// Exact number of subjects per split: train, dev, test.
    Counts([usize; 3]),
    /// Fractions of the available subjects. When they sum to one the
    /// rounding remainder goes to train.
    Ratios([f64; 3]),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Ratios([0.6, 0.2, 0.2])
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("requested {requested} subjects but only {available} are available")]
    NotEnoughSubjects { requested: usize, available: usize },
    #[error("invalid split ratios {0:?}")]
    BadRatios([f64; 3]),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub train: Vec<FactGroup>,
    pub dev: Vec<FactGroup>,
    pub test: Vec<FactGroup>,
}

impl Splits {
    pub fn parts(&self) -> [(crate::questions::Split, &[FactGroup]); 3] {
        use crate::questions::Split;
        [
            (Split::Train, &self.train),
            (Split::Dev, &self.dev),
            (Split::Test, &self.test),
        ]
    }
}

/// Partitions groups by subject so every subject lands in exactly one split.
pub fn split_subjects(
    groups: &[FactGroup],
    spec: SplitSpec,
    seed: u64,
) -> Result<Splits, SplitError> {
    let subjects: BTreeSet<&str> = groups.iter().map(|g| g.subject_id.as_str()).collect();
    let available = subjects.len();
    let [n_train, n_dev, n_test] = match spec {
        SplitSpec::Counts(c) => c,
        SplitSpec::Ratios(r) => {
            let sum: f64 = r.iter().sum();
            if r.iter().any(|x| !x.is_finite() || *x < 0.0) || sum > 1.0 + 1e-9 {
                return Err(SplitError::BadRatios(r));
            }
            let dev = (r[1] * available as f64).floor() as usize;
            let test = (r[2] * available as f64).floor() as usize;
            let train = if (sum - 1.0).abs() < 1e-9 {
                available - dev - test
            } else {
                (r[0] * available as f64).floor() as usize
            };
            [train, dev, test]
        }
    };
    let requested = n_train + n_dev + n_test;
    if requested > available {
        return Err(SplitError::NotEnoughSubjects {
            requested,
            available,
        });
    }

    let mut order: Vec<&str> = subjects.into_iter().collect();
    order.shuffle(&mut rng::rng_for(seed, "subject-split"));
    let mut assignment: HashMap<&str, usize> = HashMap::new();
    for (i, s) in order.iter().enumerate() {
        let slot = if i < n_train {
            0
        } else if i < n_train + n_dev {
            1
        } else if i < requested {
            2
        } else {
            continue;
        };
        assignment.insert(s, slot);
    }

    let mut splits = Splits::default();
    for g in groups {
        match assignment.get(g.subject_id.as_str()) {
            Some(0) => splits.train.push(g.clone()),
            Some(1) => splits.dev.push(g.clone()),
            Some(2) => splits.test.push(g.clone()),
            _ => {}
        }
    }
    Ok(splits)
}

/// Table-style corpus counts over a set of groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactStats {
    pub subjects: usize,
    pub groups: usize,
    pub facts: usize,
    pub facts_per_subject: f64,
    pub earliest_year: Option<i32>,
    pub latest_year: Option<i32>,
}

impl FactStats {
    pub fn of(groups: &[FactGroup], snapshot: TimePoint) -> Self {
        let subjects: BTreeSet<&str> = groups.iter().map(|g| g.subject_id.as_str()).collect();
        let facts: usize = groups.iter().map(FactGroup::len).sum();
        let all = groups.iter().flat_map(|g| g.facts.iter());
        let earliest_year = all.clone().map(|f| f.interval.start().year()).min();
        let latest_year = all.map(|f| f.interval.end_at(snapshot).year()).max();
        Self {
            subjects: subjects.len(),
            groups: groups.len(),
            facts,
            facts_per_subject: if subjects.is_empty() {
                0.0
            } else {
                facts as f64 / subjects.len() as f64
            },
            earliest_year,
            latest_year,
        }
    }
}
