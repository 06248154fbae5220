//! Time-time (L1), time-event (L2), and event-event (L3) question generation.

use std::collections::HashSet;
use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::metrics::normalized_key;
use crate::facts::{FactGroup, Relation};
use crate::rng;
use crate::templates::{L1Form, TemplateTable};
use crate::time::{Direction, Offset, TimeError, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
    L3,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::L1 => "l1",
            Level::L2 => "l2",
            Level::L3 => "l3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    Future,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Future => "future",
        })
    }
}

/// `{level}_{split}.jsonl`
pub fn file_name(level: Level, split: Split) -> String {
    format!("{level}_{split}.jsonl")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub level: Level,
    pub relation: Option<Relation>,
    pub subject: Option<String>,
    pub subject_id: Option<String>,
    pub template_id: usize,
    pub question: String,
    /// Gold answers; the first is the primary gold.
    pub answers: Vec<String>,
    /// Answers that are valid for the subject at other times.
    pub negatives: Vec<String>,
    pub t_ref: Option<TimePoint>,
    pub offset: Option<Offset>,
    pub direction: Option<Direction>,
    pub neighbor_object: Option<String>,
    pub split: Split,
}

impl Question {
    pub fn primary_answer(&self) -> &str {
        &self.answers[0]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("requested {requested} questions but only {available} distinct ones exist")]
    Capacity { requested: u64, available: u64 },
    #[error("invalid time range: {0}")]
    Range(String),
    #[error("split counts sum to {sum} but {generated} questions were generated")]
    SplitMismatch { sum: usize, generated: usize },
}

impl From<TimeError> for GenError {
    fn from(e: TimeError) -> Self {
        GenError::Range(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Config {
    pub start: TimePoint,
    pub end: TimePoint,
    pub forms: Vec<L1Form>,
}

impl L1Config {
    pub fn new(start: TimePoint, end: TimePoint) -> Self {
        Self {
            start,
            end,
            forms: L1Form::MONTH_LEVEL.to_vec(),
        }
    }

    /// Reference times available for `form`: months for month-level forms,
    /// January of each year for year-level forms.
    fn times(&self, form: L1Form) -> Vec<TimePoint> {
        match form.granularity() {
            crate::time::Granularity::Month => (0..self.start.months_through(self.end))
                .map(|k| self.start.add_months(k).unwrap())
                .collect(),
            crate::time::Granularity::Year => (self.start.year()..=self.end.year())
                .map(|y| TimePoint::new(y, 1).unwrap())
                .collect(),
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.end < self.start {
            return Err(GenError::Range(format!(
                "end {} precedes start {}",
                self.end, self.start
            )));
        }
        if self.forms.is_empty() {
            return Err(GenError::Range("no question forms selected".into()));
        }
        for form in &self.forms {
            let reach = form
                .offsets()
                .iter()
                .map(|o| o.total_months())
                .max()
                .unwrap_or(0);
            let times = self.times(*form);
            let (first, last) = (times[0], *times.last().unwrap());
            first.add_months(-reach)?;
            last.add_months(reach)?;
        }
        Ok(())
    }

    /// Number of distinct `(form, time, offset)` combinations.
    pub fn capacity(&self) -> u64 {
        self.forms
            .iter()
            .map(|f| self.times(*f).len() as u64 * f.offsets().len() as u64)
            .sum()
    }
}

/// Inclusive range of the out-of-domain time-time test set.
pub fn future_range() -> (TimePoint, TimePoint) {
    (
        TimePoint::new(2022, 1).unwrap(),
        TimePoint::new(2040, 12).unwrap(),
    )
}

fn l1_question(
    form: L1Form,
    t: TimePoint,
    offset: Offset,
    split: Split,
    templates: &TemplateTable,
) -> Result<Question, GenError> {
    let answer = form.format_time(t.shift(offset)?);
    let dir = match offset.direction() {
        Direction::Before => 'b',
        Direction::After => 'a',
    };
    Ok(Question {
        id: format!(
            "L1-{}-{:04}{:02}-{}-{}y{}m",
            form.id(),
            t.year(),
            t.month(),
            dir,
            offset.years(),
            offset.months()
        ),
        level: Level::L1,
        relation: None,
        subject: None,
        subject_id: None,
        template_id: form.id(),
        question: templates.render_l1(form, t, offset),
        answers: vec![answer],
        negatives: Vec::new(),
        t_ref: Some(t),
        offset: Some(offset),
        direction: Some(offset.direction()),
        neighbor_object: None,
        split,
    })
}

/// Samples `count` distinct time-time questions uniformly from the
/// combination space of `config`.
pub fn gen_l1(
    config: &L1Config,
    count: usize,
    seed: u64,
    split: Split,
    templates: &TemplateTable,
) -> Result<Vec<Question>, GenError> {
    config.validate()?;
    let available = config.capacity();
    if count as u64 > available {
        return Err(GenError::Capacity {
            requested: count as u64,
            available,
        });
    }
    let tables: Vec<(L1Form, Vec<TimePoint>, Vec<Offset>)> = config
        .forms
        .iter()
        .map(|f| (*f, config.times(*f), f.offsets()))
        .collect();

    let mut rng = rng::rng_for(seed, "l1");
    let picks = rand::seq::index::sample(&mut rng, available as usize, count);
    picks
        .into_iter()
        .map(|mut idx| {
            for (form, times, offsets) in &tables {
                let size = times.len() * offsets.len();
                if idx < size {
                    let (ti, oi) = (idx / offsets.len(), idx % offsets.len());
                    return l1_question(*form, times[ti], offsets[oi], split, templates);
                }
                idx -= size;
            }
            unreachable!("index below capacity")
        })
        .collect()
}

/// Generates one pool of unique questions and labels it train/dev/test in
/// sampling order, so questions never repeat across splits.
pub fn gen_l1_splits(
    config: &L1Config,
    counts: [usize; 3],
    seed: u64,
    templates: &TemplateTable,
) -> Result<[Vec<Question>; 3], GenError> {
    let total: usize = counts.iter().sum();
    let mut pool = gen_l1(config, total, seed, Split::Train, templates)?;
    let test = pool.split_off(counts[0] + counts[1]);
    let dev = pool.split_off(counts[0]);
    let relabel = |qs: Vec<Question>, split: Split| -> Vec<Question> {
        qs.into_iter().map(|q| Question { split, ..q }).collect()
    };
    Ok([pool, relabel(dev, Split::Dev), relabel(test, Split::Test)])
}

pub fn gen_l1_future(
    count: usize,
    seed: u64,
    forms: &[L1Form],
    templates: &TemplateTable,
) -> Result<Vec<Question>, GenError> {
    let (start, end) = future_range();
    let config = L1Config {
        start,
        end,
        forms: forms.to_vec(),
    };
    gen_l1(&config, count, seed, Split::Future, templates)
}

/// Shared inputs for fact-based generation.
#[derive(Debug, Clone, Copy)]
pub struct GenContext<'a> {
    pub templates: &'a TemplateTable,
    pub snapshot: TimePoint,
    pub split: Split,
}

/// Distinct objects by normalized form, first occurrence kept.
fn push_distinct(out: &mut Vec<String>, seen: &mut HashSet<String>, object: &str) {
    if seen.insert(normalized_key(object)) {
        out.push(object.to_string());
    }
}

/// One question per fact, asked at a month sampled uniformly inside the
/// fact's validity interval.
pub fn gen_l2(group: &FactGroup, seed: u64, ctx: GenContext<'_>) -> Vec<Question> {
    let mut rng = rng::rng_for(seed, &format!("l2/{}", group.key()));
    (0..group.len())
        .map(|i| {
            let fact = &group.facts()[i];
            let start = fact.interval.start();
            let span = start.months_through(fact.interval.end_at(ctx.snapshot));
            let t_ref = start.add_months(rng.random_range(0..span)).unwrap();
            l2_question(group, i, t_ref, ctx)
        })
        .collect()
}

/// The time-event question about fact `index` of `group` asked at `t_ref`.
/// The fact's object is the primary gold; every other object valid at
/// `t_ref` is an extra gold and the remaining objects are negatives.
pub fn l2_question(group: &FactGroup, index: usize, t_ref: TimePoint, ctx: GenContext<'_>) -> Question {
    let facts = group.facts();
    let mut seen = HashSet::new();
    let mut answers = Vec::new();
    push_distinct(&mut answers, &mut seen, &facts[index].object);
    let valid = |f: &&crate::facts::Fact| f.interval.close_at(ctx.snapshot).contains(t_ref);
    for other in facts.iter().filter(valid) {
        push_distinct(&mut answers, &mut seen, &other.object);
    }
    let mut negatives = Vec::new();
    for other in facts.iter().filter(|f| !valid(f)) {
        push_distinct(&mut negatives, &mut seen, &other.object);
    }

    Question {
        id: format!("L2-{}-{}-{}", group.relation(), group.subject_id(), index),
        level: Level::L2,
        relation: Some(group.relation()),
        subject: Some(group.subject().to_string()),
        subject_id: Some(group.subject_id().to_string()),
        template_id: group.relation().index(),
        question: ctx.templates.render_l2(group.relation(), group.subject(), t_ref),
        answers,
        negatives,
        t_ref: Some(t_ref),
        offset: None,
        direction: None,
        neighbor_object: None,
        split: ctx.split,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L3Mode {
    /// An "after" and a "before" question for every adjacent pair.
    #[default]
    BothDirections,
    /// One question per adjacent pair in a seeded random direction.
    OnePerPair,
}

/// Before/after questions over chronologically adjacent facts.
///
/// A pair is skipped when both objects normalize to the same string, when
/// either fact shares its start month with a neighbour (the order is then
/// ambiguous), or when
/// the pivot is a repeat of an object that already occurred earlier in the
/// group (the pivot then resolves to the earlier occurrence).
pub fn gen_l3(group: &FactGroup, seed: u64, ctx: GenContext<'_>, mode: L3Mode) -> Vec<Question> {
    let mut rng = rng::rng_for(seed, &format!("l3/{}", group.key()));
    let facts = group.facts();
    let keys: Vec<String> = facts.iter().map(|f| normalized_key(&f.object)).collect();
    let first_occurrence = |i: usize| keys[..i].iter().all(|k| *k != keys[i]);
    let start = |i: usize| facts[i].interval.start();
    let tied = |i: usize| {
        (i > 0 && start(i - 1) == start(i)) || (i + 1 < facts.len() && start(i + 1) == start(i))
    };

    let mut out = Vec::new();
    for i in 0..facts.len().saturating_sub(1) {
        if keys[i] == keys[i + 1] || tied(i) || tied(i + 1) {
            continue;
        }
        // (pivot index, gold index, direction of gold relative to pivot)
        let mut candidates: Vec<(usize, usize, Direction)> = Vec::with_capacity(2);
        if first_occurrence(i) {
            candidates.push((i, i + 1, Direction::After));
        }
        if first_occurrence(i + 1) {
            candidates.push((i + 1, i, Direction::Before));
        }
        if mode == L3Mode::OnePerPair && candidates.len() == 2 {
            let keep = rng.random_range(0..2);
            candidates = vec![candidates[keep]];
        }
        for (pivot, gold, dir) in candidates {
            let mut seen = HashSet::new();
            let mut answers = Vec::new();
            push_distinct(&mut answers, &mut seen, &facts[gold].object);
            let mut negatives = Vec::new();
            for f in facts {
                push_distinct(&mut negatives, &mut seen, &f.object);
            }
            out.push(Question {
                id: format!(
                    "L3-{}-{}-{}-{}",
                    group.relation(),
                    group.subject_id(),
                    i,
                    dir
                ),
                level: Level::L3,
                relation: Some(group.relation()),
                subject: Some(group.subject().to_string()),
                subject_id: Some(group.subject_id().to_string()),
                template_id: group.relation().index(),
                question: ctx.templates.render_l3(
                    group.relation(),
                    group.subject(),
                    dir,
                    &facts[pivot].object,
                ),
                answers,
                negatives,
                t_ref: None,
                offset: None,
                direction: Some(dir),
                neighbor_object: Some(facts[pivot].object.clone()),
                split: ctx.split,
            });
        }
    }
    out
}

/// L2 questions for many groups, in group order. Each group draws from its
/// own derived stream so the result is independent of thread scheduling.
pub fn gen_l2_all(groups: &[FactGroup], seed: u64, ctx: GenContext<'_>) -> Vec<Question> {
    groups
        .par_iter()
        .flat_map_iter(|g| gen_l2(g, seed, ctx))
        .collect()
}

pub fn gen_l3_all(
    groups: &[FactGroup],
    seed: u64,
    ctx: GenContext<'_>,
    mode: L3Mode,
) -> Vec<Question> {
    groups
        .par_iter()
        .flat_map_iter(|g| gen_l3(g, seed, ctx, mode))
        .collect()
}
