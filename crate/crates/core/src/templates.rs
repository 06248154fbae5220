//! Cloze question templates keyed by level and relation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::facts::Relation;
use crate::time::{Direction, Granularity, Offset, TimePoint};

const DEFAULT_TEMPLATES: &str = include_str!("../templates/default.toml");

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("cannot read template file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid template file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("no templates for relation {0}")]
    MissingRelation(Relation),
    #[error("template '{template}' lacks placeholder {placeholder}")]
    MissingPlaceholder {
        template: String,
        placeholder: &'static str,
    },
    #[error("unknown relation code '{0}' in template file")]
    UnknownRelation(String),
}

/// Time-time question shapes. The discriminant is the `template_id` stored
/// on generated questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Form {
    /// x years and y months, month-level times.
    YearMonth = 0,
    /// x years, month-level times.
    Years = 1,
    /// y months, month-level times.
    Months = 2,
    /// x (2..=10) years, year-level times.
    YearShift = 3,
    /// The adjacent year, year-level times.
    NextYear = 4,
}

impl L1Form {
    pub const ALL: [L1Form; 5] = [
        L1Form::YearMonth,
        L1Form::Years,
        L1Form::Months,
        L1Form::YearShift,
        L1Form::NextYear,
    ];

    /// The month-level forms used for the main time-time dataset.
    pub const MONTH_LEVEL: [L1Form; 3] = [L1Form::YearMonth, L1Form::Years, L1Form::Months];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn granularity(self) -> Granularity {
        match self {
            L1Form::YearShift | L1Form::NextYear => Granularity::Year,
            _ => Granularity::Month,
        }
    }

    /// Every offset this form can express, in a fixed order.
    pub fn offsets(self) -> Vec<Offset> {
        let mut pairs = Vec::new();
        match self {
            L1Form::YearMonth => {
                for x in 1..=10 {
                    for y in 1..=11 {
                        pairs.push((x, y));
                    }
                }
            }
            L1Form::Years => pairs.extend((1..=10).map(|x| (x, 0))),
            L1Form::Months => pairs.extend((1..=11).map(|y| (0, y))),
            L1Form::YearShift => pairs.extend((2..=10).map(|x| (x, 0))),
            L1Form::NextYear => pairs.push((1, 0)),
        }
        pairs
            .into_iter()
            .flat_map(|(x, y)| {
                [Direction::Before, Direction::After]
                    .map(|d| Offset::new(x, y, d).expect("non-zero by construction"))
            })
            .collect()
    }

    /// Whether `offset` is one this form can express.
    pub fn accepts(self, offset: Offset) -> bool {
        let (x, y) = (offset.years(), offset.months());
        match self {
            L1Form::YearMonth => (1..=10).contains(&x) && (1..=11).contains(&y),
            L1Form::Years => (1..=10).contains(&x) && y == 0,
            L1Form::Months => x == 0 && (1..=11).contains(&y),
            L1Form::YearShift => (2..=10).contains(&x) && y == 0,
            L1Form::NextYear => x == 1 && y == 0,
        }
    }

    pub fn format_time(self, t: TimePoint) -> String {
        match self.granularity() {
            Granularity::Month => t.to_string(),
            Granularity::Year => t.format_year(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Templates {
    pub year_month: String,
    pub years: String,
    pub months: String,
    pub year_shift: String,
    pub next_year: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTemplates {
    pub label: String,
    pub phrase: String,
    pub l2: String,
    pub l3: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TemplateFile {
    l1: L1Templates,
    relations: BTreeMap<String, RelationTemplates>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTable {
    l1: L1Templates,
    relations: BTreeMap<Relation, RelationTemplates>,
}

impl Default for TemplateTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

impl TemplateTable {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let file: TemplateFile = toml::from_str(text)?;
        let mut relations = BTreeMap::new();
        for (code, t) in file.relations {
            let rel: Relation = code
                .parse()
                .map_err(|_| TemplateError::UnknownRelation(code.clone()))?;
            require(&t.l2, &["<subject>", "<t>"])?;
            require(&t.l3, &["<subject>", "<dir>", "<o_j>"])?;
            relations.insert(rel, t);
        }
        if let Some(missing) = Relation::ALL.iter().find(|r| !relations.contains_key(r)) {
            return Err(TemplateError::MissingRelation(*missing));
        }
        let l1 = file.l1;
        require(&l1.year_month, &["<x>", "<y>", "<dir>", "<t>"])?;
        require(&l1.years, &["<x>", "<dir>", "<t>"])?;
        require(&l1.months, &["<y>", "<dir>", "<t>"])?;
        require(&l1.year_shift, &["<x>", "<dir>", "<t>"])?;
        require(&l1.next_year, &["<dir>", "<t>"])?;
        Ok(Self { l1, relations })
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn bundled_text() -> &'static str {
        DEFAULT_TEMPLATES
    }

    pub fn relation(&self, rel: Relation) -> &RelationTemplates {
        &self.relations[&rel]
    }

    pub fn render_l1(&self, form: L1Form, t: TimePoint, offset: Offset) -> String {
        let pattern = match form {
            L1Form::YearMonth => &self.l1.year_month,
            L1Form::Years => &self.l1.years,
            L1Form::Months => &self.l1.months,
            L1Form::YearShift => &self.l1.year_shift,
            L1Form::NextYear => &self.l1.next_year,
        };
        let (x, y) = (offset.years(), offset.months());
        fill(
            pattern,
            &[
                ("<x> year(s)", &format!("{x} {}", plural(x, "year"))),
                ("<y> month(s)", &format!("{y} {}", plural(y, "month"))),
                ("<x>", &x.to_string()),
                ("<y>", &y.to_string()),
                ("<dir>", offset.direction().as_str()),
                ("<t>", &form.format_time(t)),
            ],
        )
    }

    pub fn render_l2(&self, rel: Relation, subject: &str, t: TimePoint) -> String {
        fill(
            &self.relation(rel).l2,
            &[("<subject>", subject), ("<t>", &t.to_string())],
        )
    }

    pub fn render_l3(&self, rel: Relation, subject: &str, dir: Direction, pivot: &str) -> String {
        fill(
            &self.relation(rel).l3,
            &[("<subject>", subject), ("<dir>", dir.as_str()), ("<o_j>", pivot)],
        )
    }

    /// Context header line, e.g. `Hirofumi Yoshimura holds the position of:`.
    pub fn context_header(&self, rel: Relation, subject: &str) -> String {
        format!("{subject} {}:", self.relation(rel).phrase)
    }
}

fn plural(n: u32, unit: &str) -> String {
    if n == 1 {
        unit.to_string()
    } else {
        format!("{unit}s")
    }
}

fn require(template: &str, placeholders: &[&'static str]) -> Result<(), TemplateError> {
    for p in placeholders {
        if !template.contains(p) {
            return Err(TemplateError::MissingPlaceholder {
                template: template.to_string(),
                placeholder: p,
            });
        }
    }
    Ok(())
}

/// Single-pass substitution so that values containing placeholder-like text
/// (an object named `<t>`, say) are never re-expanded.
fn fill(pattern: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(pattern.len() + 32);
    let mut rest = pattern;
    'outer: while !rest.is_empty() {
        for (key, value) in pairs {
            if let Some(tail) = rest.strip_prefix(key) {
                out.push_str(value);
                rest = tail;
                continue 'outer;
            }
        }
        let ch = rest.chars().next().unwrap();
        out.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    out
}
