//! Potentials and their period data: exact polynomial potentials, symbolic
//! Hessians, the multivalued period matrix with explicit branch bookkeeping,
//! and positivity certification over the working polydisk.

mod period;
mod poly;
mod spec;

use thiserror::Error;

use crate::arith::{ArithError, Rational};

pub use period::{
    certify_domain, cholesky_pivots, evaluate_period, evaluate_period_exact, riemann_check,
    DomainReport, PeriodMatrix, RiemannCheck, RiemannWitness, DEFAULT_PIVOT_TOL,
};
pub use poly::{closedness_check, closedness_check_matrix, hessian, EmbeddedPoly, Polynomial};
pub use spec::PotentialSpec;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("expected {expected} variables, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("expected a point with {expected} coordinates, got {got}")]
    WrongPointArity { expected: usize, got: usize },
    #[error("shear multiplicity must be at least 1, got {0}")]
    BadEll(i64),
    #[error("polydisk radius must be positive, got {0}")]
    BadEpsilon(Rational),
    #[error("coefficient lives in the d={coeff_d} field but the instance declares d={spec_d}")]
    ForeignCoefficient { coeff_d: u64, spec_d: u64 },
    #[error("grid needs at least 2 points per axis")]
    GridTooCoarse,
    #[error("spec decode failed: {0}")]
    Decode(String),
}
