//! Context rendering for the three QA settings and span masking.

pub mod mask;
pub mod render;

pub use mask::{
    mask_corpus, mask_spans, masked_count, unmask, AnnotatedDocument, MaskError, MaskedDocument,
    SentinelPattern, Span, SpanKind,
};
pub use render::{fact_lines, render, RenderError, RenderOptions, RenderedExample, Setting};
