//! Exact scalar arithmetic: rationals, the quartic field Q(sqrt(d), i), and
//! controlled embeddings into f64 complex numbers.

mod field;
mod parse;
mod rational;

pub use field::{is_square_free, quad_sign, FieldContext, FieldElement};
pub use parse::parse_in_context;
pub use rational::{ulp, Rational};

pub type ComplexF = num_complex::Complex64;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field context mismatch: sqrt({left}) vs sqrt({right})")]
    ContextMismatch { left: u64, right: u64 },
    #[error("magnitude exceeds f64 range")]
    Overflow,
    #[error("{0} is not a square-free positive integer")]
    NotSquareFree(u64),
    #[error("sqrt({0}) does not lie in the field context")]
    UnsupportedRadicand(u64),
    #[error("parse error at byte {at}: {msg}")]
    Parse { msg: String, at: usize },
}
