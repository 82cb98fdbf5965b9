//! Global minimization of `x'Qx + q'x` over a bounded convex set cut out by
//! linear and convex quadratic inequalities, when `Q` has a few negative
//! eigenvalues.
//!
//! Splitting `Q = Q+ - C'C` maps the problem to the outcome space of
//! `(x'Q+x + q'x, Cx)`, whose dimension is one more than the number of
//! negative eigenvalues. A simplicial branch-and-bound runs there: each
//! simplex is bounded by an LP built from supporting hyperplanes of the
//! outcome set and the convex envelope of `-|y|^2`.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use outcome_bnb::{solve, QcqpInstance, SolveStatus, SolverParams};
//!
//! // min x1^2 - x2^2 over the unit box
//! let inst = QcqpInstance::new(
//!     DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
//!     DVector::zeros(2),
//!     DMatrix::identity(2, 2),
//!     DVector::from_element(2, 1.0),
//!     vec![],
//! );
//! let rep = solve(&inst, SolverParams::with_epsilon(1e-6)).unwrap();
//! assert_eq!(rep.status, SolveStatus::EpsOptimal);
//! assert!((rep.ub + 1.0).abs() < 1e-9);
//! ```

pub mod bnb;
pub mod cli;
pub mod convex;
pub mod dc;
pub mod error;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod relaxation;
pub mod simplex;

pub use bnb::{solve, SolveReport, SolveStatus, SolverParams};
pub use dc::{decompose, DcDecomposition};
pub use error::{Error, Result};
pub use instance::{validate_instance, QcqpInstance, QuadConstraint};
