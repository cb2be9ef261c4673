use std::fmt;

use thiserror::Error;

/// A located problem found while validating a problem-spec document.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostic {
    /// 1-based line in the source document, when known.
    pub line: Option<usize>,
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {}: {}: {}", line, self.field, self.rule),
            None => write!(f, "{}: {}", self.field, self.rule),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid polyhedron: {0}")]
    InvalidPolyhedron(String),

    #[error("unsupported block structure: {0}")]
    UnsupportedStructure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid under-resolved: {0}")]
    Resolution(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("{} validation error(s):\n{}", .0.len(), join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
