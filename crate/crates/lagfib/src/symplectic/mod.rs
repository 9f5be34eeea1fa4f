//! Integral symplectic linear algebra.
//!
//! The objects here are antisymmetric unimodular forms on Z^2n, bases that
//! put such a form into the standard block shape, lattice automorphisms, and
//! saturated sublattices. Everything is exact; a result is either a certified
//! witness (a basis, a Bezout combination, a kernel) or a typed refusal.

pub mod hnf;
pub mod mat;
mod random;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

pub use hnf::{ext_gcd_vec, hnf_col, is_saturated_basis, kernel, rank, snf_diagonal, solve_in_lattice, ColumnHermite};
pub use mat::{normalize_sign, vec_add, vec_is_zero, vec_scale, vec_sub, IntMat, IntVec};
pub use random::{random_symplectic, random_unimodular_with_inverse, symplectic_inverse};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("matrix is not unimodular")]
    NotUnimodular,
    #[error("generators are linearly dependent")]
    DependentGenerators,
    #[error("sublattice is not saturated")]
    NotSaturated,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fixed sublattice has corank {got}, need {expected}")]
    WrongCorank { expected: usize, got: usize },
    #[error("operator does not preserve the form")]
    DoesNotPreserveForm,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("column {column} of the displacement lies outside the radical")]
    NotInRadical { column: usize },
}

/// Antisymmetric unimodular bilinear form on Z^2n, stored as its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntisymForm {
    mat: IntMat,
}

impl AntisymForm {
    pub fn new(mat: IntMat) -> Result<Self, LatticeError> {
        if !mat.is_square() {
            return Err(LatticeError::DimensionMismatch { expected: mat.rows(), got: mat.cols() });
        }
        if !mat.is_antisymmetric() {
            return Err(LatticeError::NotAntisymmetric);
        }
        if !mat.is_unimodular() {
            return Err(LatticeError::NotUnimodular);
        }
        Ok(AntisymForm { mat })
    }

    /// Block form [[0, I], [-I, 0]] on Z^2n.
    pub fn standard(n: usize) -> Self {
        AntisymForm { mat: std_j(n) }
    }

    pub fn matrix(&self) -> &IntMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Half the dimension. Antisymmetric unimodular forms only exist in even
    /// dimension, so this is exact.
    pub fn n(&self) -> usize {
        self.mat.rows() / 2
    }

    pub fn apply(&self, u: &[BigInt], v: &[BigInt]) -> BigInt {
        let qv = self.mat.mul_vec(v);
        u.iter().zip(&qv).map(|(a, b)| a * b).sum()
    }
}

/// Basis p_1..p_n, q_1..q_n with Q(p_i, p_j) = Q(q_i, q_j) = 0 and
/// Q(p_i, q_j) = delta_ij.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticBasis {
    pub p: Vec<IntVec>,
    pub q: Vec<IntVec>,
}

impl SymplecticBasis {
    pub fn new(form: &AntisymForm, p: Vec<IntVec>, q: Vec<IntVec>) -> Result<Self, LatticeError> {
        let n = form.n();
        if p.len() != n || q.len() != n {
            return Err(LatticeError::DimensionMismatch { expected: n, got: p.len().min(q.len()) });
        }
        let basis = SymplecticBasis { p, q };
        let gram = {
            let b = basis.matrix();
            b.transpose().mul(form.matrix()).mul(&b)
        };
        if gram != std_j(n) {
            return Err(LatticeError::HypothesesNotMet("basis is not symplectic for the form".into()));
        }
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// Columns p_1..p_n, q_1..q_n.
    pub fn matrix(&self) -> IntMat {
        IntMat::from_cols(self.p.iter().chain(self.q.iter()).cloned().collect())
    }
}

/// Lattice automorphism, |det| = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyOp {
    mat: IntMat,
}

impl MonodromyOp {
    pub fn new(mat: IntMat) -> Result<Self, LatticeError> {
        if !mat.is_square() {
            return Err(LatticeError::DimensionMismatch { expected: mat.rows(), got: mat.cols() });
        }
        if !mat.is_unimodular() {
            return Err(LatticeError::NotUnimodular);
        }
        Ok(MonodromyOp { mat })
    }

    pub fn matrix(&self) -> &IntMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn preserves(&self, form: &AntisymForm) -> bool {
        self.mat.transpose().mul(form.matrix()).mul(&self.mat) == *form.matrix()
    }

    /// tau - id as a matrix.
    pub fn displacement(&self) -> IntMat {
        self.mat.sub(&IntMat::identity(self.dim()))
    }
}

/// Saturated sublattice of Z^dim, stored by a basis in the columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sublattice {
    gens: IntMat,
}

impl Sublattice {
    /// Columns must be independent and span a saturated sublattice
    /// (quotient torsion-free), so membership tests are honest.
    pub fn from_cols(gens: IntMat) -> Result<Self, LatticeError> {
        if hnf::rank(&gens) != gens.cols() {
            return Err(LatticeError::DependentGenerators);
        }
        if !is_saturated_basis(&gens) {
            return Err(LatticeError::NotSaturated);
        }
        Ok(Sublattice { gens })
    }

    pub fn gens(&self) -> &IntMat {
        &self.gens
    }

    pub fn rank(&self) -> usize {
        self.gens.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        solve_in_lattice(&self.gens, v).is_some()
    }
}

/// Certificate that q was built as an integer combination hitting pairing 1:
/// sum(coefficients[i] * pairings[i]) = 1 with pairings[i] = Q(p, basis_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BezoutCertificate {
    pub pairings: IntVec,
    pub coefficients: IntVec,
}

impl BezoutCertificate {
    pub fn verify(&self) -> bool {
        let total: BigInt = self.pairings.iter().zip(&self.coefficients).map(|(t, c)| t * c).sum();
        total.is_one()
    }
}

/// Gram matrix of the standard symplectic form in the p_1..p_n, q_1..q_n order.
pub fn std_j(n: usize) -> IntMat {
    let mut j = IntMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = BigInt::one();
        j[(n + i, i)] = BigInt::from(-1);
    }
    j
}

/// Shear fixing everything except q_n, which picks up ell * p_n. This is the
/// local model of a fibration monodromy around the discriminant.
pub fn monodromy_matrix(n: usize, ell: i64) -> MonodromyOp {
    assert!(n >= 1, "need at least one hyperbolic pair");
    let mut m = IntMat::identity(2 * n);
    m[(n - 1, 2 * n - 1)] = BigInt::from(ell);
    MonodromyOp { mat: m }
}

/// q with Q(p, q) = 1, expressed over the given basis columns, together with
/// the pairings and Bezout coefficients used. Fails if the pairings have a
/// common divisor, which for a unimodular form means p was not primitive.
fn bezout_partner(
    form: &AntisymForm,
    p: &[BigInt],
    basis: &IntMat,
) -> Result<(IntVec, BezoutCertificate), LatticeError> {
    let pairings: IntVec = (0..basis.cols()).map(|j| form.apply(p, &basis.col(j))).collect();
    let (g, coefficients) = ext_gcd_vec(&pairings);
    if !g.is_one() {
        return Err(LatticeError::NotUnimodular);
    }
    let q = basis.mul_vec(&coefficients);
    Ok((q, BezoutCertificate { pairings, coefficients }))
}

/// v - Q(p,v) q + Q(q,v) p for every column v; the result pairs to zero with
/// both p and q.
fn project_off_pair(form: &AntisymForm, p: &[BigInt], q: &[BigInt], basis: &IntMat) -> IntMat {
    let cols = (0..basis.cols())
        .map(|j| {
            let v = basis.col(j);
            let a = form.apply(p, &v);
            let b = form.apply(q, &v);
            let mut out = vec_sub(&v, &vec_scale(q, &a));
            out = vec_add(&out, &vec_scale(p, &b));
            out
        })
        .collect();
    IntMat::from_cols(cols)
}

/// Symplectic basis for a unimodular antisymmetric form, by hyperbolic-pair
/// splitting: peel off (p, q) with Q(p, q) = 1, restrict to their orthogonal
/// complement, repeat.
pub fn symplectic_basis(form: &AntisymForm) -> Result<SymplecticBasis, LatticeError> {
    let dim = form.dim();
    let mut basis = IntMat::identity(dim);
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    while basis.cols() > 0 {
        let p = basis.col(0);
        let (q, _) = bezout_partner(form, &p, &basis)?;
        let projected = project_off_pair(form, &p, &q, &basis);
        let hermite = hnf_col(&projected);
        // the complement of a hyperbolic pair drops the rank by exactly two
        assert_eq!(hermite.rank() + 2, basis.cols(), "projection rank drop");
        basis = hermite.h.take_cols(0..hermite.rank());
        ps.push(p);
        qs.push(q);
    }
    SymplecticBasis::new(form, ps, qs)
}

/// Fixed sublattice ker(tau - id); always saturated.
pub fn fixed_sublattice(op: &MonodromyOp) -> Sublattice {
    let k = kernel(&op.displacement());
    Sublattice::from_cols(k).expect("kernel columns form a saturated basis")
}

/// Radical of the form restricted to a sublattice: vectors pairing to zero
/// with the whole sublattice. Saturated inside the ambient lattice because
/// the input is.
pub fn radical(form: &AntisymForm, sub: &Sublattice) -> Result<Sublattice, LatticeError> {
    if sub.ambient_dim() != form.dim() {
        return Err(LatticeError::DimensionMismatch { expected: form.dim(), got: sub.ambient_dim() });
    }
    let g = sub.gens();
    let restricted = g.transpose().mul(form.matrix()).mul(g);
    let k = kernel(&restricted);
    Sublattice::from_cols(g.mul(&k))
}

/// Basis adapted to a corank-one fixed sublattice: p_n generates the radical
/// of the restricted form, q_n is its Bezout partner outside the sublattice,
/// and the remaining n-1 pairs live inside the sublattice.
pub fn adapted_basis(
    form: &AntisymForm,
    fixed: &Sublattice,
) -> Result<(SymplecticBasis, BezoutCertificate), LatticeError> {
    let dim = form.dim();
    if fixed.ambient_dim() != dim {
        return Err(LatticeError::DimensionMismatch { expected: dim, got: fixed.ambient_dim() });
    }
    if fixed.rank() + 1 != dim {
        return Err(LatticeError::WrongCorank { expected: 1, got: dim - fixed.rank() });
    }
    let rad = radical(form, fixed)?;
    if rad.rank() != 1 {
        return Err(LatticeError::HypothesesNotMet(format!(
            "restricted form has radical of rank {}, need 1",
            rad.rank()
        )));
    }
    let pn = rad.gens().col(0);
    let ambient = IntMat::identity(dim);
    let (qn, certificate) = bezout_partner(form, &pn, &ambient)?;
    let projected = project_off_pair(form, &pn, &qn, &ambient);
    let hermite = hnf_col(&projected);
    assert_eq!(hermite.rank() + 2, dim, "projection rank drop");
    let complement = hermite.h.take_cols(0..hermite.rank());
    // the complement carries a unimodular restriction; split it recursively
    let inner_form = AntisymForm::new(complement.transpose().mul(form.matrix()).mul(&complement))?;
    let inner = symplectic_basis(&inner_form)?;
    let mut ps: Vec<IntVec> = inner.p.iter().map(|v| complement.mul_vec(v)).collect();
    let mut qs: Vec<IntVec> = inner.q.iter().map(|v| complement.mul_vec(v)).collect();
    ps.push(pn);
    qs.push(qn);
    let basis = SymplecticBasis::new(form, ps, qs)?;
    Ok((basis, certificate))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnipotentCheck {
    Unipotent,
    /// (tau - id)^2 sent this vector somewhere nonzero.
    DisplacementSquareNonzero { witness: IntVec },
}

/// For a form-preserving operator whose fixed sublattice has corank one and
/// which is not an involution, decide whether (tau - id)^2 = 0. Under those
/// hypotheses a violation is impossible, so the nonzero-square variant only
/// ever reports a bug in the caller's inputs.
pub fn check_unipotent(form: &AntisymForm, op: &MonodromyOp) -> Result<UnipotentCheck, LatticeError> {
    if op.dim() != form.dim() {
        return Err(LatticeError::DimensionMismatch { expected: form.dim(), got: op.dim() });
    }
    if !op.preserves(form) {
        return Err(LatticeError::DoesNotPreserveForm);
    }
    let fixed = fixed_sublattice(op);
    let corank = op.dim() - fixed.rank();
    if corank != 1 {
        return Err(LatticeError::WrongCorank { expected: 1, got: corank });
    }
    if op.matrix().mul(op.matrix()).is_identity() {
        return Err(LatticeError::HypothesesNotMet("operator is an involution".into()));
    }
    let eta = op.displacement();
    let eta2 = eta.mul(&eta);
    if eta2.is_zero() {
        return Ok(UnipotentCheck::Unipotent);
    }
    let j = (0..eta2.cols()).find(|&j| !vec_is_zero(&eta2.col(j))).expect("nonzero column exists");
    Ok(UnipotentCheck::DisplacementSquareNonzero { witness: eta2.col(j) })
}

/// Confirms that every column of tau - id lies in the radical of the form
/// restricted to the fixed sublattice, which is what makes a corank-one
/// monodromy act by a shear in adapted coordinates.
pub fn verify_im_eta_in_radical(form: &AntisymForm, op: &MonodromyOp) -> Result<(), LatticeError> {
    if op.dim() != form.dim() {
        return Err(LatticeError::DimensionMismatch { expected: form.dim(), got: op.dim() });
    }
    if !op.preserves(form) {
        return Err(LatticeError::DoesNotPreserveForm);
    }
    let fixed = fixed_sublattice(op);
    let rad = radical(form, &fixed)?;
    let eta = op.displacement();
    for j in 0..eta.cols() {
        if !rad.contains(&eta.col(j)) {
            return Err(LatticeError::NotInRadical { column: j });
        }
    }
    Ok(())
}
