use thiserror::Error;

use crate::instance::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("objective matrix has no negative eigenvalue; the problem is a convex QCQP")]
    AlreadyConvex,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("no strictly feasible point: best max-residual {max_residual:e}")]
    SlaterViolated { max_residual: f64 },

    #[error("feasible set is unbounded: {0}")]
    UnboundedFeasibleSet(String),

    #[error("outcome box has zero width in every direction")]
    DegenerateCover,

    #[error("barycentric weights must be nonnegative and sum to one")]
    WeightsInvalid,

    #[error("simplex is degenerate")]
    Degenerate,

    #[error("oracle precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("no grid point is feasible at resolution {resolution}")]
    NoFeasibleGridPoint { resolution: f64 },

    #[error("unknown oracle method `{0}`")]
    UnknownMethod(String),

    #[error("parse error at byte {offset}: {path}: {message}")]
    Parse {
        offset: usize,
        path: String,
        message: String,
    },

    #[error("invalid instance: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("{}: {}", x.code.as_str(), x.message))
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
