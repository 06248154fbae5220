use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::facts::FactGroup;
use crate::questions::Question;
use crate::rng;
use crate::templates::TemplateTable;
use crate::time::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// Question only.
    #[serde(rename = "CBQA")]
    Cbqa,
    /// Question plus a supplied article.
    #[serde(rename = "OBQA")]
    Obqa,
    /// Question plus every fact of the subject's group, shuffled.
    #[serde(rename = "ReasonQA")]
    ReasonQa,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Cbqa => "CBQA",
            Setting::Obqa => "OBQA",
            Setting::ReasonQa => "ReasonQA",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedExample {
    pub id: String,
    pub setting: Setting,
    pub prompt: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("question {id}: {setting} needs {what}")]
    MissingContext {
        id: String,
        setting: Setting,
        what: &'static str,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions<'a> {
    pub templates: &'a TemplateTable,
    pub snapshot: TimePoint,
}

/// `<object> from <start> to <end>.` with ongoing facts ending at the snapshot.
pub fn fact_lines(group: &FactGroup, snapshot: TimePoint) -> Vec<String> {
    group
        .facts()
        .iter()
        .map(|f| {
            format!(
                "{} from {} to {}.",
                f.object,
                f.interval.start(),
                f.interval.end_at(snapshot)
            )
        })
        .collect()
}

pub fn render(
    q: &Question,
    group: Option<&FactGroup>,
    article: Option<&str>,
    setting: Setting,
    seed: u64,
    opts: RenderOptions<'_>,
) -> Result<RenderedExample, RenderError> {
    let missing = |what| RenderError::MissingContext {
        id: q.id.clone(),
        setting,
        what,
    };
    let prompt = match setting {
        Setting::Cbqa => q.question.clone(),
        Setting::Obqa => {
            let article = article.ok_or_else(|| missing("an article"))?;
            format!("{}\n{}", q.question, article)
        }
        Setting::ReasonQa => {
            let group = group.ok_or_else(|| missing("the subject's facts"))?;
            let mut lines = fact_lines(group, opts.snapshot);
            lines.shuffle(&mut rng::rng_for(seed, &format!("render/{}", q.id)));
            let mut prompt = q.question.clone();
            prompt.push('\n');
            prompt.push_str(&opts.templates.context_header(group.relation(), group.subject()));
            for line in lines {
                prompt.push('\n');
                prompt.push_str(&line);
            }
            prompt
        }
    };
    Ok(RenderedExample {
        id: q.id.clone(),
        setting,
        prompt,
        target: q.primary_answer().to_string(),
    })
}
