use std::fmt;

use tempqa_core::corpus::{MaskError, RenderError};
use tempqa_core::eval::{EvalError, OverlapError};
use tempqa_core::facts::{IngestError, SplitError};
use tempqa_core::jsonl::JsonlError;
use tempqa_core::questions::GenError;
use tempqa_core::reasoner::SolveError;
use tempqa_core::templates::TemplateError;

/// Failure of a subcommand. `code` is a stable machine-readable tag printed
/// alongside the message.
#[derive(Debug)]
pub enum CliError {
    Usage { code: &'static str, message: String },
    Data { code: &'static str, message: String },
    Internal(String),
}

impl CliError {
    pub fn usage(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Usage {
            code,
            message: message.into(),
        }
    }

    pub fn data(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Data {
            code,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 1,
            CliError::Data { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage { code, .. } | CliError::Data { code, .. } => code,
            CliError::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage { message, .. } | CliError::Data { message, .. } => f.write_str(message),
            CliError::Internal(message) => f.write_str(message),
        }
    }
}

impl From<JsonlError> for CliError {
    fn from(e: JsonlError) -> Self {
        match e {
            JsonlError::Io { .. } => CliError::data("io", e.to_string()),
            JsonlError::Record { .. } => CliError::data("schema", e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::data("facts", e.to_string())
    }
}

impl From<TemplateError> for CliError {
    fn from(e: TemplateError) -> Self {
        CliError::data("templates", e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Capacity { .. } => CliError::usage("capacity", e.to_string()),
            _ => CliError::usage("range", e.to_string()),
        }
    }
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        CliError::usage("split", e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::data("solve", e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadEdges => CliError::usage("period-edges", e.to_string()),
            _ => CliError::data("predictions", e.to_string()),
        }
    }
}

impl From<OverlapError> for CliError {
    fn from(e: OverlapError) -> Self {
        CliError::data("overlap", e.to_string())
    }
}

impl From<MaskError> for CliError {
    fn from(e: MaskError) -> Self {
        match e {
            MaskError::BadRatio(_) | MaskError::BadPattern(_) => CliError::usage("mask", e.to_string()),
            _ => CliError::data("mask", e.to_string()),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::data("render", e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data("io", e.to_string())
    }
}
