//! Text formats: the server-system language (`.sps`), specifications
//! (`.mfstl`) and combined files (`.spsml`) holding a system followed by a
//! single `MFSTLSPEC` section.

mod lexer;
mod mfstl;
mod sps;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::logic::MfstlFormula;
use crate::model::{ServiceAlphabet, Sps};

pub use lexer::{lex, TokKind, Token};
pub use mfstl::{parse_mfstl, parse_mfstl_file, parse_mfstl_syntax};
pub use sps::{parse_sps, render_sps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    pub fn new(start_line: usize, start_col: usize, end_line: usize, end_col: usize) -> Self {
        Span {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start_line, self.start_col, other.end_line, other.end_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
        }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            span,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}: {}",
            self.span.start_line, self.span.start_col, self.message
        )
    }
}

/// Successful parse with any warnings produced on the way.
pub type Parsed<T> = Result<(T, Vec<Diagnostic>), Vec<Diagnostic>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Model,
    Spec,
    Combined,
}

impl SourceKind {
    /// By extension: `.sps`, `.mfstl`, `.spsml`.
    pub fn from_path(path: &Path) -> Option<SourceKind> {
        match path.extension()?.to_str()? {
            "sps" => Some(SourceKind::Model),
            "mfstl" => Some(SourceKind::Spec),
            "spsml" => Some(SourceKind::Combined),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub kind: SourceKind,
}

impl SourceFile {
    pub fn read(path: &Path) -> Result<SourceFile, String> {
        let kind = SourceKind::from_path(path).ok_or_else(|| {
            format!(
                "{}: unknown file kind (expected .sps, .mfstl or .spsml)",
                path.display()
            )
        })?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(SourceFile {
            path: path.to_path_buf(),
            text,
            kind,
        })
    }
}

/// What a source file provides once parsed.
#[derive(Debug, Clone)]
pub struct Document {
    pub alphabet: ServiceAlphabet,
    pub sps: Option<Sps>,
    pub spec: Option<MfstlFormula>,
    pub warnings: Vec<Diagnostic>,
}

/// Parses a source according to its kind. Specifications without a `types`
/// header take their client types from `model` when given, and otherwise
/// from the sorts they mention.
pub fn parse_source(src: &SourceFile, model: Option<&Sps>) -> Result<Document, Vec<Diagnostic>> {
    match src.kind {
        SourceKind::Model => {
            let (sps, warnings) = parse_sps(&src.text)?;
            Ok(Document {
                alphabet: sps.alphabet().clone(),
                sps: Some(sps),
                spec: None,
                warnings,
            })
        }
        SourceKind::Spec => {
            let ((alphabet, spec), warnings) =
                parse_mfstl_file(&src.text, model.map(|m| m.alphabet()))?;
            Ok(Document {
                alphabet,
                sps: model.cloned(),
                spec: Some(spec),
                warnings,
            })
        }
        SourceKind::Combined => {
            let ((sps, spec), warnings) = sps::parse_combined(&src.text)?;
            Ok(Document {
                alphabet: sps.alphabet().clone(),
                sps: Some(sps),
                spec: Some(spec),
                warnings,
            })
        }
    }
}
