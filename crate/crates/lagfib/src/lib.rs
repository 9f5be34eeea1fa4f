//! Exact models of principally polarized stable Lagrangian torus fibrations
//! built from polynomial potentials, together with the verification toolkit:
//! symplectic lattice algebra, period matrices, the toroidal chart atlas with
//! its group action, and the cycle-type classifier for singular fibers.

pub mod arith;
pub mod cycle;
pub mod potential;
pub mod presets;
pub mod symplectic;
pub mod toroidal;

pub use arith::{ArithError, ComplexF, FieldContext, FieldElement, Rational};
