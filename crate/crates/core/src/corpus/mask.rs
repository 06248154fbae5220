//! Entity and temporal span masking for span-extraction pre-training.
//!
//! A fraction of the annotated spans is replaced by numbered sentinels. The
//! target lists each sentinel followed by the text it hides:
//!
//! ```text
//! text:   Messi joined Barcelona in 2004.
//! masked: <mask_0> joined Barcelona in <mask_1>.
//! target: <mask_0> Messi <mask_1> 2004
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Entity,
    Temporal,
}

/// Character (not byte) offsets, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub text: String,
    pub spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedDocument {
    pub doc_id: String,
    pub masked: String,
    pub target: String,
    pub masked_spans: usize,
    pub total_spans: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaskError {
    #[error("document {0} has no spans")]
    NoSpans(String),
    #[error("document {doc_id}: span {index} {message}")]
    BadSpan {
        doc_id: String,
        index: usize,
        message: String,
    },
    #[error("mask ratio {0} is outside (0, 1]")]
    BadRatio(f64),
    #[error("sentinel pattern '{0}' must contain {{k}}")]
    BadPattern(String),
    #[error("document {0}: text collides with the sentinel pattern")]
    SentinelCollision(String),
    #[error("malformed target: {0}")]
    MalformedTarget(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentinelPattern(String);

impl Default for SentinelPattern {
    fn default() -> Self {
        Self("<mask_{k}>".to_string())
    }
}

impl SentinelPattern {
    pub fn new(pattern: &str) -> Result<Self, MaskError> {
        if !pattern.contains("{k}") || pattern.trim().is_empty() {
            return Err(MaskError::BadPattern(pattern.to_string()));
        }
        Ok(Self(pattern.to_string()))
    }

    pub fn sentinel(&self, k: usize) -> String {
        self.0.replace("{k}", &k.to_string())
    }
}

/// `ceil(ratio * spans)`, ignoring float noise just above an integer.
pub fn masked_count(spans: usize, ratio: f64) -> usize {
    let exact = ratio * spans as f64;
    let nearest = exact.round();
    let k = if (exact - nearest).abs() < 1e-9 {
        nearest
    } else {
        exact.ceil()
    };
    (k as usize).min(spans)
}

impl AnnotatedDocument {
    pub fn validate(&self) -> Result<(), MaskError> {
        let len = self.text.chars().count();
        let mut prev_end = 0;
        for (index, s) in self.spans.iter().enumerate() {
            let bad = |message: &str| MaskError::BadSpan {
                doc_id: self.doc_id.clone(),
                index,
                message: message.to_string(),
            };
            if s.start >= s.end {
                return Err(bad("is empty or inverted"));
            }
            if s.end > len {
                return Err(bad("extends past the end of the text"));
            }
            if s.start < prev_end {
                return Err(bad("overlaps or precedes the previous span"));
            }
            prev_end = s.end;
        }
        Ok(())
    }
}

pub fn mask_spans(
    doc: &AnnotatedDocument,
    ratio: f64,
    seed: u64,
    pattern: &SentinelPattern,
) -> Result<MaskedDocument, MaskError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(MaskError::BadRatio(ratio));
    }
    if doc.spans.is_empty() {
        return Err(MaskError::NoSpans(doc.doc_id.clone()));
    }
    doc.validate()?;

    let n = doc.spans.len();
    let k = masked_count(n, ratio);
    let mut rng = rng::rng_for(seed, &format!("mask/{}", doc.doc_id));
    let mut chosen = rand::seq::index::sample(&mut rng, n, k).into_vec();
    chosen.sort_unstable();

    let byte_at: Vec<usize> = doc
        .text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(doc.text.len()))
        .collect();

    let mut masked = String::with_capacity(doc.text.len());
    let mut target = String::new();
    let mut cursor = 0;
    for (j, &i) in chosen.iter().enumerate() {
        let span = doc.spans[i];
        let (a, b) = (byte_at[span.start], byte_at[span.end]);
        let sentinel = pattern.sentinel(j);
        masked.push_str(&doc.text[cursor..a]);
        masked.push_str(&sentinel);
        if j > 0 {
            target.push(' ');
        }
        target.push_str(&sentinel);
        target.push(' ');
        target.push_str(&doc.text[a..b]);
        cursor = b;
    }
    masked.push_str(&doc.text[cursor..]);

    let clash = (0..k).any(|j| doc.text.contains(&pattern.sentinel(j)));
    if clash || unmask(&masked, &target, pattern).as_deref() != Ok(doc.text.as_str()) {
        return Err(MaskError::SentinelCollision(doc.doc_id.clone()));
    }
    Ok(MaskedDocument {
        doc_id: doc.doc_id.clone(),
        masked,
        target,
        masked_spans: k,
        total_spans: n,
    })
}

/// Restores the original text from a masked text and its target.
pub fn unmask(masked: &str, target: &str, pattern: &SentinelPattern) -> Result<String, MaskError> {
    let mut fills: Vec<&str> = Vec::new();
    let mut rest = target;
    while !rest.is_empty() {
        let head = format!("{} ", pattern.sentinel(fills.len()));
        let body = rest
            .strip_prefix(&head)
            .ok_or_else(|| MaskError::MalformedTarget(format!("expected '{head}'")))?;
        let next = format!(" {}", pattern.sentinel(fills.len() + 1));
        match body.find(&next) {
            Some(pos) => {
                fills.push(&body[..pos]);
                rest = &body[pos + 1..];
            }
            None => {
                fills.push(body);
                rest = "";
            }
        }
    }

    let mut out = String::with_capacity(masked.len() + target.len());
    let mut cursor = 0;
    for (j, fill) in fills.iter().enumerate() {
        let sentinel = pattern.sentinel(j);
        let pos = masked[cursor..]
            .find(&sentinel)
            .ok_or_else(|| MaskError::MalformedTarget(format!("'{sentinel}' not in masked text")))?;
        out.push_str(&masked[cursor..cursor + pos]);
        out.push_str(fill);
        cursor += pos + sentinel.len();
    }
    out.push_str(&masked[cursor..]);
    Ok(out)
}

/// Masks every document in parallel; documents that cannot be masked are
/// returned as diagnostics instead.
pub fn mask_corpus(
    docs: &[AnnotatedDocument],
    ratio: f64,
    seed: u64,
    pattern: &SentinelPattern,
) -> (Vec<MaskedDocument>, Vec<MaskError>) {
    let results: Vec<Result<MaskedDocument, MaskError>> = docs
        .par_iter()
        .map(|d| mask_spans(d, ratio, seed, pattern))
        .collect();
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(m) => ok.push(m),
            Err(e) => skipped.push(e),
        }
    }
    (ok, skipped)
}
