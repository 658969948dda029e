use thiserror::Error;

use crate::checker::CheckError;
use crate::expand::ExpandError;
use crate::frontend::Diagnostic;
use crate::ground::GroundError;
use crate::model::ModelError;
use crate::smv::EmitError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", render_diagnostics(.0))]
    Parse(Vec<Diagnostic>),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    let lines: Vec<String> = diags.iter().map(Diagnostic::to_string).collect();
    lines.join("\n")
}

impl Error {
    /// True for state-space or search limits, as opposed to bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::Expand(ExpandError::Capacity(_))
                | Error::Check(CheckError::Capacity(_) | CheckError::PathBudget(_))
        )
    }

    /// Process exit code: 3 for capacity errors, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_capacity() {
            3
        } else {
            2
        }
    }
}

impl From<Vec<Diagnostic>> for Error {
    fn from(d: Vec<Diagnostic>) -> Self {
        Error::Parse(d)
    }
}
