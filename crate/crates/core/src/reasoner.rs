//! Symbolic oracle that answers generated questions from structured facts.
//!
//! Every answer carries a [`Rationale`]: the list of comparisons performed.
//! [`Rationale::replay`] re-executes those comparisons against the facts and
//! rebuilds the answer, so a trace can be audited independently.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::eval::metrics::normalized_key;
use crate::facts::{FactGroup, GroupIndex};
use crate::questions::{Level, Question};
use crate::templates::L1Form;
use crate::time::{Direction, Granularity, Offset, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("question {id}: expected level {expected:?}, found {found:?}")]
    WrongLevel {
        id: String,
        expected: Level,
        found: Level,
    },
    #[error("question {id}: {message}")]
    Malformed { id: String, message: String },
    #[error("object '{0}' does not occur in the group")]
    NeighborNotFound(String),
    #[error("no facts for subject {subject_id} under {relation}")]
    GroupNotFound { subject_id: String, relation: String },
    #[error("rationale does not replay: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Shift {
        from: TimePoint,
        months: i64,
        to: TimePoint,
        granularity: Granularity,
    },
    Contains {
        fact: usize,
        start: TimePoint,
        end: TimePoint,
        query: TimePoint,
        holds: bool,
    },
    Pivot {
        fact: usize,
        object: String,
    },
    Adjacent {
        from: usize,
        to: usize,
        direction: Direction,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    /// Indices into the group's facts that produced answers.
    pub matched: Vec<usize>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleAnswer {
    pub answers: Vec<String>,
    pub rationale: Rationale,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Solution {
    Answered(OracleAnswer),
    /// The query falls outside every fact, or the pivot has no neighbour.
    NoValidAnswer(Rationale),
}

impl Solution {
    pub fn answers(&self) -> &[String] {
        match self {
            Solution::Answered(a) => &a.answers,
            Solution::NoValidAnswer(_) => &[],
        }
    }

    pub fn best(&self) -> Option<&str> {
        self.answers().first().map(String::as_str)
    }

    pub fn rationale(&self) -> &Rationale {
        match self {
            Solution::Answered(a) => &a.rationale,
            Solution::NoValidAnswer(r) => r,
        }
    }
}

fn distinct_objects(group: &FactGroup, indices: &[usize]) -> Vec<String> {
    let mut seen = HashSet::new();
    indices
        .iter()
        .map(|&i| &group.facts()[i].object)
        .filter(|o| seen.insert(normalized_key(o)))
        .cloned()
        .collect()
}

fn l1_parts(q: &Question) -> Result<(L1Form, TimePoint, Offset), SolveError> {
    let malformed = |message: &str| SolveError::Malformed {
        id: q.id.clone(),
        message: message.to_string(),
    };
    let form = L1Form::from_id(q.template_id).ok_or_else(|| malformed("unknown template id"))?;
    let t = q.t_ref.ok_or_else(|| malformed("missing reference time"))?;
    let offset = q.offset.ok_or_else(|| malformed("missing offset"))?;
    if !form.accepts(offset) {
        return Err(malformed("offset not expressible by the question's template"));
    }
    Ok((form, t, offset))
}

pub fn solve_l1(q: &Question) -> Result<Solution, SolveError> {
    if q.level != Level::L1 {
        return Err(SolveError::WrongLevel {
            id: q.id.clone(),
            expected: Level::L1,
            found: q.level,
        });
    }
    let (form, t, offset) = l1_parts(q)?;
    let to = t.shift(offset).map_err(|e| SolveError::Malformed {
        id: q.id.clone(),
        message: e.to_string(),
    })?;
    Ok(Solution::Answered(OracleAnswer {
        answers: vec![form.format_time(to)],
        rationale: Rationale {
            matched: Vec::new(),
            steps: vec![Step::Shift {
                from: t,
                months: offset.signed_months(),
                to,
                granularity: form.granularity(),
            }],
        },
    }))
}

/// Every object whose interval (ongoing facts closed at `snapshot`) contains
/// `t_ref`, ordered by interval start.
pub fn solve_l2(group: &FactGroup, t_ref: TimePoint, snapshot: TimePoint) -> Solution {
    let mut steps = Vec::with_capacity(group.len());
    let mut matched = Vec::new();
    for (i, f) in group.facts().iter().enumerate() {
        let iv = f.interval.close_at(snapshot);
        let holds = iv.contains(t_ref);
        steps.push(Step::Contains {
            fact: i,
            start: iv.start(),
            end: iv.end_at(snapshot),
            query: t_ref,
            holds,
        });
        if holds {
            matched.push(i);
        }
    }
    let facts = group.facts();
    matched.sort_by(|&a, &b| {
        (facts[a].interval.order_key(), &facts[a].object)
            .cmp(&(facts[b].interval.order_key(), &facts[b].object))
    });
    let rationale = Rationale {
        matched: matched.clone(),
        steps,
    };
    if matched.is_empty() {
        return Solution::NoValidAnswer(rationale);
    }
    Solution::Answered(OracleAnswer {
        answers: distinct_objects(group, &matched),
        rationale,
    })
}

/// The object chronologically adjacent to `neighbor` in `direction`. When
/// the neighbour occurs more than once its earliest occurrence is the pivot.
pub fn solve_l3(
    group: &FactGroup,
    neighbor: &str,
    direction: Direction,
) -> Result<Solution, SolveError> {
    let key = normalized_key(neighbor);
    let pivot = group
        .facts()
        .iter()
        .position(|f| normalized_key(&f.object) == key)
        .ok_or_else(|| SolveError::NeighborNotFound(neighbor.to_string()))?;
    let mut rationale = Rationale {
        matched: Vec::new(),
        steps: vec![Step::Pivot {
            fact: pivot,
            object: group.facts()[pivot].object.clone(),
        }],
    };
    let target = match direction {
        Direction::Before => pivot.checked_sub(1),
        Direction::After => Some(pivot + 1).filter(|&i| i < group.len()),
    };
    let Some(to) = target else {
        return Ok(Solution::NoValidAnswer(rationale));
    };
    rationale.steps.push(Step::Adjacent {
        from: pivot,
        to,
        direction,
    });
    rationale.matched.push(to);
    Ok(Solution::Answered(OracleAnswer {
        answers: vec![group.facts()[to].object.clone()],
        rationale,
    }))
}

/// Dispatches on the question's level, looking up its facts in `index`.
pub fn solve(q: &Question, index: &GroupIndex, snapshot: TimePoint) -> Result<Solution, SolveError> {
    if q.level == Level::L1 {
        return solve_l1(q);
    }
    let malformed = |message: &str| SolveError::Malformed {
        id: q.id.clone(),
        message: message.to_string(),
    };
    let relation = q.relation.ok_or_else(|| malformed("missing relation"))?;
    let subject_id = q
        .subject_id
        .as_deref()
        .ok_or_else(|| malformed("missing subject_id"))?;
    let group = index
        .get(subject_id, relation)
        .ok_or_else(|| SolveError::GroupNotFound {
            subject_id: subject_id.to_string(),
            relation: relation.to_string(),
        })?;
    match q.level {
        Level::L2 => {
            let t = q.t_ref.ok_or_else(|| malformed("missing t_ref"))?;
            Ok(solve_l2(group, t, snapshot))
        }
        Level::L3 => {
            let neighbor = q
                .neighbor_object
                .as_deref()
                .ok_or_else(|| malformed("missing neighbor_object"))?;
            let dir = q.direction.ok_or_else(|| malformed("missing direction"))?;
            solve_l3(group, neighbor, dir)
        }
        Level::L1 => unreachable!(),
    }
}

impl Rationale {
    /// Re-runs every recorded step against `group` (absent for time-time
    /// questions) and returns the answers the steps imply.
    pub fn replay(
        &self,
        group: Option<&FactGroup>,
        snapshot: TimePoint,
    ) -> Result<Vec<String>, SolveError> {
        let fail = |m: String| Err(SolveError::Replay(m));
        let fact = |i: usize| {
            group
                .and_then(|g| g.facts().get(i))
                .ok_or_else(|| SolveError::Replay(format!("fact {i} not in group")))
        };
        let mut answers = Vec::new();
        let mut holding = Vec::new();
        for step in &self.steps {
            match step {
                Step::Shift {
                    from,
                    months,
                    to,
                    granularity,
                } => {
                    let got = from
                        .add_months(*months)
                        .map_err(|e| SolveError::Replay(e.to_string()))?;
                    if got != *to {
                        return fail(format!("shift of {from} by {months} gives {got}, not {to}"));
                    }
                    answers.push(match granularity {
                        Granularity::Month => to.to_string(),
                        Granularity::Year => to.format_year(),
                    });
                }
                Step::Contains {
                    fact: i,
                    query,
                    holds,
                    ..
                } => {
                    let f = fact(*i)?;
                    if f.interval.close_at(snapshot).contains(*query) != *holds {
                        return fail(format!("containment of {query} in fact {i} differs"));
                    }
                    if *holds {
                        holding.push(*i);
                    }
                }
                Step::Pivot { fact: i, object } => {
                    let f = fact(*i)?;
                    let g = group.unwrap();
                    let earliest = g
                        .facts()
                        .iter()
                        .position(|x| normalized_key(&x.object) == normalized_key(object));
                    if f.object != *object || earliest != Some(*i) {
                        return fail(format!("fact {i} is not the earliest '{object}'"));
                    }
                }
                Step::Adjacent {
                    from,
                    to,
                    direction,
                } => {
                    let (a, b) = (fact(*from)?, fact(*to)?);
                    let expected = match direction {
                        Direction::Before => from.checked_sub(1),
                        Direction::After => Some(from + 1),
                    };
                    if expected != Some(*to) {
                        return fail(format!("facts {from} and {to} are not adjacent"));
                    }
                    if b.interval.start().compare(a.interval.start()) == direction.ordering().reverse() {
                        return fail(format!("fact {to} is not {direction} fact {from}"));
                    }
                    answers.push(b.object.clone());
                }
            }
        }
        if let Some(g) = group.filter(|_| !holding.is_empty()) {
            let facts = g.facts();
            holding.sort_by(|&a, &b| {
                (facts[a].interval.order_key(), &facts[a].object)
                    .cmp(&(facts[b].interval.order_key(), &facts[b].object))
            });
            answers.extend(distinct_objects(g, &holding));
        }
        Ok(answers)
    }
}
