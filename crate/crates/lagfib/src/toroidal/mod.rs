//! Chart atlas of the degenerating fiber geometry and the lattice action
//! on it.
//!
//! The building block is an infinite chain of coordinate charts C^2 indexed
//! by an integer, glued off the axes by x' = x^2 y, y' = 1/x. The product
//! z_n = x y survives the gluing everywhere and w_n = x^(1-k) y^(-k)
//! survives off the axes, so the chain fibers over the z_n-line with
//! cylinder fibers away from z_n = 0 and a chain of lines over it.
//!
//! A rank-n integer lattice acts on the product of this chain with an
//! (n-1)-torus, rotating each torus coordinate by exponentials of Hessian
//! entries of the potential and shifting the chart index. The action
//! preserves the symplectic form exactly because mixed third partials of
//! the potential agree; `verify_symplectic_action` checks that identity on
//! the nose in polynomial arithmetic and then once more numerically by
//! pulling the form back through analytic Jacobians. Quotienting a fiber
//! over z_n = 0 by the action produces the singular-fiber model that
//! `singular_fiber` reports: a cycle of components whose twist data feeds
//! the characteristic-cycle classifier.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{ArithError, ComplexF, FieldElement};
use crate::cycle::{order_exact, tor_element_at, CycleError, CycleType};
use crate::potential::{hessian, EmbeddedPoly, Polynomial, PotentialError, PotentialSpec};
use crate::symplectic::{monodromy_matrix, AntisymForm, IntMat, LatticeError, MonodromyOp};

/// Relative tolerance for the numeric pullback of the symplectic form.
pub const DEFAULT_PULLBACK_TOL: f64 = 1e-9;
/// Residual bound for the glued two-form determinant identity.
pub const DEFAULT_GLUE_TOL: f64 = 1e-10;
/// Relative drift allowed for glued invariants over short chart paths.
pub const DEFAULT_DRIFT_TOL: f64 = 1e-11;
/// Step used by the finite-difference side of the glue check.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ToroidalError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("chart coordinate on an axis; the point lives only in its own chart")]
    OnAxis,
    #[error("torus coordinate {index} is zero")]
    ZeroTorusCoordinate { index: usize },
    #[error("expected {expected} entries, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("point is not on the discriminant (last coordinate must be exactly zero)")]
    NotOnDiscriminant,
    #[error("point lies outside the open polydisk")]
    OutsidePolydisk,
}

/// Point of one chart of the infinite chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub k: i64,
    pub x: ComplexF,
    pub y: ComplexF,
}

/// Same data with exact coordinates, for drift-free gluing checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactChartPoint {
    pub k: i64,
    pub x: FieldElement,
    pub y: FieldElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

fn on_axis(p: &ChartPoint) -> bool {
    p.x == ComplexF::new(0.0, 0.0) || p.y == ComplexF::new(0.0, 0.0)
}

/// Rewrites a point in the next chart up or down the chain. Up and down are
/// exact inverses of one another.
pub fn transition(p: &ChartPoint, dir: Direction) -> Result<ChartPoint, ToroidalError> {
    if on_axis(p) {
        return Err(ToroidalError::OnAxis);
    }
    Ok(match dir {
        Direction::Up => ChartPoint { k: p.k + 1, x: p.x * p.x * p.y, y: 1.0 / p.x },
        Direction::Down => ChartPoint { k: p.k - 1, x: 1.0 / p.y, y: p.x * p.y * p.y },
    })
}

pub fn transition_exact(p: &ExactChartPoint, dir: Direction) -> Result<ExactChartPoint, ToroidalError> {
    if p.x.is_zero() || p.y.is_zero() {
        return Err(ToroidalError::OnAxis);
    }
    Ok(match dir {
        Direction::Up => ExactChartPoint {
            k: p.k + 1,
            x: p.x.checked_mul(&p.x)?.checked_mul(&p.y)?,
            y: p.x.inverse()?,
        },
        Direction::Down => ExactChartPoint {
            k: p.k - 1,
            x: p.y.inverse()?,
            y: p.x.checked_mul(&p.y)?.checked_mul(&p.y)?,
        },
    })
}

/// Integer power by repeated squaring; more accurate than going through
/// polar form for the small exponents chart indices produce.
fn cpowi(z: ComplexF, e: i64) -> ComplexF {
    if e == 0 {
        return ComplexF::new(1.0, 0.0);
    }
    let mut base = if e < 0 { 1.0 / z } else { z };
    let mut exp = e.unsigned_abs();
    let mut acc = ComplexF::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// The two chart-independent functions (z_n, w_n) = (x y, x^(1-k) y^(-k)).
pub fn glued_invariants(p: &ChartPoint) -> Result<(ComplexF, ComplexF), ToroidalError> {
    if on_axis(p) {
        return Err(ToroidalError::OnAxis);
    }
    Ok((p.x * p.y, cpowi(p.x, 1 - p.k) * cpowi(p.y, -p.k)))
}

pub fn glued_invariants_exact(
    p: &ExactChartPoint,
) -> Result<(FieldElement, FieldElement), ToroidalError> {
    if p.x.is_zero() || p.y.is_zero() {
        return Err(ToroidalError::OnAxis);
    }
    let z = p.x.checked_mul(&p.y)?;
    let w = p.x.powi(1 - p.k)?.checked_mul(&p.y.powi(-p.k)?)?;
    Ok((z, w))
}

/// Finite-difference check of the glued two-form identity
/// dz_n ^ dw_n / w_n = dy ^ dx: the Jacobian determinant of (z_n, log w_n)
/// with respect to (x, y) must be exactly -1. Differencing is done in
/// log x and log y so the truncation error stays relative however small
/// the coordinates get; the chain-rule factor x y is divided back out.
/// Returns the relative residual after one Richardson step.
pub fn omega_glue_residual(p: &ChartPoint, h: f64) -> Result<f64, ToroidalError> {
    if on_axis(p) {
        return Err(ToroidalError::OnAxis);
    }
    let (z_center, w_center) = glued_invariants(p)?;
    let det_at = |h: f64| -> Result<ComplexF, ToroidalError> {
        let shift = |du: f64, dv: f64| {
            glued_invariants(&ChartPoint { k: p.k, x: p.x * du.exp(), y: p.y * dv.exp() })
        };
        let (z_up, w_up) = shift(h, 0.0)?;
        let (z_um, w_um) = shift(-h, 0.0)?;
        let (z_vp, w_vp) = shift(0.0, h)?;
        let (z_vm, w_vm) = shift(0.0, -h)?;
        let two_h = ComplexF::new(2.0 * h, 0.0);
        let dz_du = (z_up - z_um) / two_h;
        let dz_dv = (z_vp - z_vm) / two_h;
        // d(log w) via dw / w at the center point dodges branch jumps
        let dlw_du = (w_up - w_um) / two_h / w_center;
        let dlw_dv = (w_vp - w_vm) / two_h / w_center;
        // equals x y times the determinant in the raw coordinates
        Ok(dz_du * dlw_dv - dz_dv * dlw_du)
    };
    let coarse = det_at(h)?;
    let fine = det_at(h / 2.0)?;
    let extrapolated = (fine * 4.0 - coarse) / 3.0;
    Ok((extrapolated / z_center + 1.0).norm())
}

/// Lattice element (j, m): j twists the torus coordinates, m walks the
/// chart chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub j: Vec<i64>,
    pub m: i64,
}

impl GroupElement {
    pub fn new(j: Vec<i64>, m: i64) -> Self {
        GroupElement { j, m }
    }

    pub fn identity(dim: usize) -> Self {
        GroupElement { j: vec![0; dim], m: 0 }
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement, ToroidalError> {
        if self.j.len() != other.j.len() {
            return Err(ToroidalError::WrongArity { expected: self.j.len(), got: other.j.len() });
        }
        Ok(GroupElement {
            j: self.j.iter().zip(&other.j).map(|(a, b)| a + b).collect(),
            m: self.m + other.m,
        })
    }
}

/// Point of the glued total space: base coordinates z, torus coordinates w
/// (all nonzero), and a chart point of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalPoint {
    pub z: Vec<ComplexF>,
    pub w: Vec<ComplexF>,
    pub chart: ChartPoint,
}

impl TotalPoint {
    pub fn new(z: Vec<ComplexF>, w: Vec<ComplexF>, chart: ChartPoint) -> Result<Self, ToroidalError> {
        if w.len() != z.len() {
            return Err(ToroidalError::WrongArity { expected: z.len(), got: w.len() });
        }
        if let Some(index) = w.iter().position(|v| *v == ComplexF::new(0.0, 0.0)) {
            return Err(ToroidalError::ZeroTorusCoordinate { index });
        }
        Ok(TotalPoint { z, w, chart })
    }

    /// Base coordinates extended by the glued z_n = x y.
    pub fn z_full(&self) -> Vec<ComplexF> {
        let mut out = self.z.clone();
        out.push(self.chart.x * self.chart.y);
        out
    }
}

/// The lattice action on the total space. Holds the exact Hessian of the
/// potential together with embedded copies of its entries and their first
/// partials, so phases and Jacobians are analytic.
pub struct GluedAction {
    n: usize,
    ell: i64,
    theta: Vec<Vec<Polynomial>>,
    theta_num: Vec<Vec<EmbeddedPoly>>,
    dtheta_num: Vec<Vec<Vec<EmbeddedPoly>>>,
}

impl GluedAction {
    pub fn new(spec: &PotentialSpec) -> Result<Self, ToroidalError> {
        Self::from_matrix(hessian(&spec.psi), spec.ell)
    }

    /// Same machinery over an arbitrary matrix of entry polynomials. Only
    /// Hessians yield a symplectic action; this entry point exists so the
    /// verifier can be shown catching anything else.
    pub fn from_matrix(theta: Vec<Vec<Polynomial>>, ell: i64) -> Result<Self, ToroidalError> {
        let n = theta.len();
        if n == 0 {
            return Err(ToroidalError::WrongArity { expected: 1, got: 0 });
        }
        for row in &theta {
            if row.len() != n {
                return Err(ToroidalError::WrongArity { expected: n, got: row.len() });
            }
            for entry in row {
                if entry.n_vars() != n {
                    return Err(ToroidalError::WrongArity { expected: n, got: entry.n_vars() });
                }
            }
        }
        let theta_num = theta
            .iter()
            .map(|row| row.iter().map(|p| p.embed()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let dtheta_num = theta
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| (0..n).map(|k| p.partial(k).embed()).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GluedAction { n, ell, theta, theta_num, dtheta_num })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_arity(&self, gamma: &GroupElement, p: &TotalPoint) -> Result<(), ToroidalError> {
        if gamma.j.len() != self.n - 1 {
            return Err(ToroidalError::WrongArity { expected: self.n - 1, got: gamma.j.len() });
        }
        if p.z.len() != self.n - 1 {
            return Err(ToroidalError::WrongArity { expected: self.n - 1, got: p.z.len() });
        }
        Ok(())
    }

    /// Phase functions f_i = sum_a j_a theta[a][i] + m theta[n-1][i]
    /// evaluated at the extended base point.
    fn phases(&self, gamma: &GroupElement, z_full: &[ComplexF]) -> Vec<ComplexF> {
        (0..self.n)
            .map(|i| {
                let mut f = ComplexF::new(0.0, 0.0);
                for (a, &ja) in gamma.j.iter().enumerate() {
                    if ja != 0 {
                        f += self.theta_num[a][i].eval(z_full) * ja as f64;
                    }
                }
                if gamma.m != 0 {
                    f += self.theta_num[self.n - 1][i].eval(z_full) * gamma.m as f64;
                }
                f
            })
            .collect()
    }

    fn dphases(&self, gamma: &GroupElement, z_full: &[ComplexF]) -> Vec<Vec<ComplexF>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|k| {
                        let mut df = ComplexF::new(0.0, 0.0);
                        for (a, &ja) in gamma.j.iter().enumerate() {
                            if ja != 0 {
                                df += self.dtheta_num[a][i][k].eval(z_full) * ja as f64;
                            }
                        }
                        if gamma.m != 0 {
                            df += self.dtheta_num[self.n - 1][i][k].eval(z_full) * gamma.m as f64;
                        }
                        df
                    })
                    .collect()
            })
            .collect()
    }

    /// Applies the action: w_i picks up the phase exp(2 pi i f_i), the
    /// chart index moves by m * ell, and the chart coordinates absorb the
    /// opposite phases exp(-/+ 2 pi i f_n) so that z_n = x y is untouched.
    pub fn apply(&self, gamma: &GroupElement, p: &TotalPoint) -> Result<TotalPoint, ToroidalError> {
        self.check_arity(gamma, p)?;
        let zf = p.z_full();
        let f = self.phases(gamma, &zf);
        let rot = ComplexF::new(0.0, TAU);
        let w = p
            .w
            .iter()
            .enumerate()
            .map(|(i, wi)| wi * (rot * f[i]).exp())
            .collect::<Vec<_>>();
        let phase_n = f[self.n - 1];
        let chart = ChartPoint {
            k: p.chart.k + gamma.m * self.ell,
            x: p.chart.x * (-rot * phase_n).exp(),
            y: p.chart.y * (rot * phase_n).exp(),
        };
        TotalPoint::new(p.z.clone(), w, chart)
    }

    /// Holomorphic Jacobian of the action in the coordinates
    /// (z_1..z_{n-1}, w_1..w_{n-1}, x, y), with z_n = x y chained through.
    pub fn jacobian(&self, gamma: &GroupElement, p: &TotalPoint) -> Result<Vec<Vec<ComplexF>>, ToroidalError> {
        self.check_arity(gamma, p)?;
        let n = self.n;
        let dim = 2 * n;
        let zf = p.z_full();
        let f = self.phases(gamma, &zf);
        let df = self.dphases(gamma, &zf);
        let rot = ComplexF::new(0.0, TAU);
        let x = p.chart.x;
        let y = p.chart.y;
        let zero = ComplexF::new(0.0, 0.0);
        let mut jac = vec![vec![zero; dim]; dim];
        for i in 0..n - 1 {
            jac[i][i] = ComplexF::new(1.0, 0.0);
        }
        let xi = 2 * (n - 1);
        let yi = xi + 1;
        for i in 0..n - 1 {
            let row = n - 1 + i;
            let e = (rot * f[i]).exp();
            for k in 0..n - 1 {
                jac[row][k] = p.w[i] * e * rot * df[i][k];
            }
            jac[row][row] = e;
            jac[row][xi] = p.w[i] * e * rot * df[i][n - 1] * y;
            jac[row][yi] = p.w[i] * e * rot * df[i][n - 1] * x;
        }
        let g = f[n - 1];
        let dg = &df[n - 1];
        let e_minus = (-rot * g).exp();
        let e_plus = (rot * g).exp();
        for k in 0..n - 1 {
            jac[xi][k] = -x * e_minus * rot * dg[k];
            jac[yi][k] = y * e_plus * rot * dg[k];
        }
        jac[xi][xi] = e_minus * (ComplexF::new(1.0, 0.0) - rot * dg[n - 1] * x * y);
        jac[xi][yi] = -e_minus * rot * dg[n - 1] * x * x;
        jac[yi][xi] = e_plus * rot * dg[n - 1] * y * y;
        jac[yi][yi] = e_plus * (ComplexF::new(1.0, 0.0) + rot * dg[n - 1] * x * y);
        Ok(jac)
    }

    /// Exact half of the invariance check plus the numeric pullback at
    /// seeded random points. The exact half compares mixed partials of the
    /// phase polynomials; for a Hessian matrix they agree identically.
    pub fn verify(
        &self,
        gamma: &GroupElement,
        samples: usize,
        seed: u64,
        radius: f64,
    ) -> Result<SymplecticCheck, ToroidalError> {
        if gamma.j.len() != self.n - 1 {
            return Err(ToroidalError::WrongArity { expected: self.n - 1, got: gamma.j.len() });
        }
        let f = phase_polynomials(&self.theta, gamma)?;
        for i in 0..self.n {
            for k in i + 1..self.n {
                if f[i].partial(k) != f[k].partial(i) {
                    return Ok(SymplecticCheck::Fail(SymplecticWitness::MixedPartials { i, k }));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for sample in 0..samples {
            let p = sample_total_point(&mut rng, self.n, radius);
            let residual = self.pullback_residual(gamma, &p)?;
            if !(residual <= DEFAULT_PULLBACK_TOL) {
                return Ok(SymplecticCheck::Fail(SymplecticWitness::PullbackResidual {
                    sample,
                    residual,
                }));
            }
        }
        Ok(SymplecticCheck::ExactPass)
    }

    /// Max-entry relative deviation between the pulled-back symplectic form
    /// and the form itself at one point.
    pub fn pullback_residual(&self, gamma: &GroupElement, p: &TotalPoint) -> Result<f64, ToroidalError> {
        let image = self.apply(gamma, p)?;
        let jac = self.jacobian(gamma, p)?;
        let om_here = omega_matrix(p);
        let om_there = omega_matrix(&image);
        let pulled = mat_mul(&mat_transpose(&jac), &mat_mul(&om_there, &jac));
        let scale = om_here
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        let worst = om_here
            .iter()
            .zip(&pulled)
            .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| (a - b).norm()))
            .fold(0.0f64, f64::max);
        Ok(worst / scale)
    }
}

/// Exact phase polynomials of one lattice element over an entry matrix.
fn phase_polynomials(
    theta: &[Vec<Polynomial>],
    gamma: &GroupElement,
) -> Result<Vec<Polynomial>, PotentialError> {
    let n = theta.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut f = Polynomial::zero(n);
        for (a, &ja) in gamma.j.iter().enumerate() {
            accumulate(&mut f, &theta[a][i], ja)?;
        }
        accumulate(&mut f, &theta[n - 1][i], gamma.m)?;
        out.push(f);
    }
    Ok(out)
}

fn accumulate(acc: &mut Polynomial, p: &Polynomial, c: i64) -> Result<(), PotentialError> {
    if c == 0 {
        return Ok(());
    }
    let big = BigInt::from(c);
    for (exps, coeff) in p.terms() {
        acc.add_term(exps.clone(), coeff.mul_int(&big))?;
    }
    Ok(())
}

/// Matrix of the symplectic form sum dz_i ^ dw_i / w_i + dx ^ dy in the
/// coordinates (z, w, x, y). The chart part carries dx ^ dy: that is the
/// orientation under which the lattice action is a symplectomorphism.
fn omega_matrix(p: &TotalPoint) -> Vec<Vec<ComplexF>> {
    let n1 = p.z.len();
    let dim = 2 * (n1 + 1);
    let zero = ComplexF::new(0.0, 0.0);
    let mut om = vec![vec![zero; dim]; dim];
    for i in 0..n1 {
        let coeff = 1.0 / p.w[i];
        om[i][n1 + i] = coeff;
        om[n1 + i][i] = -coeff;
    }
    om[2 * n1][2 * n1 + 1] = ComplexF::new(1.0, 0.0);
    om[2 * n1 + 1][2 * n1] = ComplexF::new(-1.0, 0.0);
    om
}

fn mat_transpose(m: &[Vec<ComplexF>]) -> Vec<Vec<ComplexF>> {
    let rows = m.len();
    let cols = m[0].len();
    (0..cols).map(|j| (0..rows).map(|i| m[i][j]).collect()).collect()
}

fn mat_mul(a: &[Vec<ComplexF>], b: &[Vec<ComplexF>]) -> Vec<Vec<ComplexF>> {
    let rows = a.len();
    let inner = b.len();
    let cols = b[0].len();
    let zero = ComplexF::new(0.0, 0.0);
    let mut out = vec![vec![zero; cols]; rows];
    for i in 0..rows {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == zero {
                continue;
            }
            for j in 0..cols {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymplecticCheck {
    ExactPass,
    Fail(SymplecticWitness),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymplecticWitness {
    /// The phase polynomials have asymmetric mixed partials at (i, k).
    MixedPartials { i: usize, k: usize },
    /// The numeric pullback deviated beyond tolerance at a sample point.
    PullbackResidual { sample: usize, residual: f64 },
}

/// Checks that the lattice action built from the potential preserves the
/// symplectic form: exact polynomial identity first, then a seeded numeric
/// pullback at `samples` random points inside the polydisk.
pub fn verify_symplectic_action(
    spec: &PotentialSpec,
    gamma: &GroupElement,
    samples: usize,
    seed: u64,
) -> Result<SymplecticCheck, ToroidalError> {
    let action = GluedAction::new(spec)?;
    let radius = spec.epsilon.to_f64_nearest()? * 0.95;
    action.verify(gamma, samples, seed, radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationCheck {
    ExactPass,
    Fail,
}

/// The monodromy operator of an n-fiber family with shear ell must preserve
/// the standard antisymmetric form; checked as an exact matrix identity.
pub fn verify_polarization(n: usize, ell: i64) -> Result<PolarizationCheck, LatticeError> {
    polarization_check_matrix(monodromy_matrix(n, ell).matrix())
}

/// Raw-matrix variant so deliberately wrong operators can be fed through
/// the same check.
pub fn polarization_check_matrix(m: &IntMat) -> Result<PolarizationCheck, LatticeError> {
    let op = MonodromyOp::new(m.clone())?;
    if m.rows() % 2 != 0 {
        return Err(LatticeError::DimensionMismatch { expected: m.rows() + 1, got: m.rows() });
    }
    let form = AntisymForm::standard(m.rows() / 2);
    Ok(if op.preserves(&form) { PolarizationCheck::ExactPass } else { PolarizationCheck::Fail })
}

/// Model of the fiber over a discriminant point: a cycle of `components`
/// chart components, each a line bundle over the torus cut out by the
/// generator rows, twisted against each other by the last Hessian row.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularFiberDescription {
    pub components: u64,
    pub base_torus_gens: Vec<Vec<FieldElement>>,
    pub twist: Vec<FieldElement>,
    pub cycle_type: CycleType,
    /// Edges of the dual graph: node i meets node (i + 1) mod components.
    pub dual_graph: Vec<(usize, usize)>,
    /// The two double-curve sections of each component never coincide.
    pub sections_distinct: bool,
    /// Multi-component fibers reuse the single-component order rule; their
    /// reports carry this flag because that rule is an extrapolation there.
    pub extrapolated: bool,
}

impl Serialize for SingularFiberDescription {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SingularFiberDescription", 8)?;
        st.serialize_field("components", &self.components)?;
        let gens: Vec<Vec<String>> = self
            .base_torus_gens
            .iter()
            .map(|row| row.iter().map(|v| v.to_string()).collect())
            .collect();
        st.serialize_field("base_torus_gens", &gens)?;
        let twist: Vec<String> = self.twist.iter().map(|v| v.to_string()).collect();
        st.serialize_field("twist", &twist)?;
        let embedded: Vec<[f64; 2]> = self
            .twist
            .iter()
            .map(|v| v.embed().map(|c| [c.re, c.im]))
            .collect::<Result<_, _>>()
            .map_err(serde::ser::Error::custom)?;
        st.serialize_field("twist_embedded", &embedded)?;
        st.serialize_field("cycle_type", &self.cycle_type)?;
        let edges: Vec<[usize; 2]> = self.dual_graph.iter().map(|&(a, b)| [a, b]).collect();
        st.serialize_field("dual_graph", &edges)?;
        st.serialize_field("sections_distinct", &self.sections_distinct)?;
        st.serialize_field("extrapolated", &self.extrapolated)?;
        st.end()
    }
}

/// Builds the singular-fiber model over b. The point must have last
/// coordinate exactly zero and lie inside the polydisk.
pub fn singular_fiber(
    spec: &PotentialSpec,
    b: &[FieldElement],
) -> Result<SingularFiberDescription, ToroidalError> {
    if b.len() != spec.n {
        return Err(ToroidalError::WrongArity { expected: spec.n, got: b.len() });
    }
    if !b[spec.n - 1].is_zero() {
        return Err(ToroidalError::NotOnDiscriminant);
    }
    if !spec.contains_point(b) {
        return Err(ToroidalError::OutsidePolydisk);
    }
    let el = tor_element_at(spec, b)?;
    let order = order_exact(&el);
    let components = spec.ell as u64;
    let count = components as usize;
    let dual_graph = (0..count).map(|i| (i, (i + 1) % count)).collect();
    Ok(SingularFiberDescription {
        components,
        base_torus_gens: el.gens().to_vec(),
        twist: el.twist().to_vec(),
        cycle_type: order.cycle_type,
        dual_graph,
        sections_distinct: true,
        extrapolated: spec.ell > 1,
    })
}

/// Random point of the total space: base coordinates in the open disk of
/// the given radius, torus and chart coordinates in safe annuli with the
/// chart product kept inside the disk as well.
pub fn sample_total_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> TotalPoint {
    let disk = |rng: &mut R| {
        let r = radius * rng.gen::<f64>().sqrt();
        let phi = TAU * rng.gen::<f64>();
        ComplexF::new(r * phi.cos(), r * phi.sin())
    };
    let annulus = |rng: &mut R, lo: f64, hi: f64| {
        let r = lo + (hi - lo) * rng.gen::<f64>();
        let phi = TAU * rng.gen::<f64>();
        ComplexF::new(r * phi.cos(), r * phi.sin())
    };
    let z = (0..n - 1).map(|_| disk(rng)).collect();
    let w = (0..n - 1).map(|_| annulus(rng, 0.4, 1.6)).collect();
    let chart_bound = (radius * 0.99).sqrt();
    let chart = ChartPoint {
        k: rng.gen_range(-2..=2),
        x: annulus(rng, 0.2 * chart_bound, chart_bound),
        y: annulus(rng, 0.2 * chart_bound, chart_bound),
    };
    TotalPoint { z, w, chart }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldContext, Rational};
    use crate::cycle::CycleType;
    use crate::presets;
    use num_bigint::BigUint;

    fn c(re: f64, im: f64) -> ComplexF {
        ComplexF::new(re, im)
    }

    #[test]
    fn transition_fixed_point_and_example() {
        let p = ChartPoint { k: 0, x: c(1.0, 0.0), y: c(1.0, 0.0) };
        let up = transition(&p, Direction::Up).unwrap();
        assert_eq!(up, ChartPoint { k: 1, x: c(1.0, 0.0), y: c(1.0, 0.0) });

        let p = ChartPoint { k: 0, x: c(2.0, 0.0), y: c(3.0, 0.0) };
        let up = transition(&p, Direction::Up).unwrap();
        assert_eq!(up, ChartPoint { k: 1, x: c(12.0, 0.0), y: c(0.5, 0.0) });
        // the example values are dyadic, so the round trip is bit-exact
        let back = transition(&up, Direction::Down).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn axis_points_stay_in_their_chart() {
        let p = ChartPoint { k: 3, x: c(0.0, 0.0), y: c(1.0, 0.0) };
        assert!(matches!(transition(&p, Direction::Up), Err(ToroidalError::OnAxis)));
        assert!(matches!(transition(&p, Direction::Down), Err(ToroidalError::OnAxis)));
        assert!(matches!(glued_invariants(&p), Err(ToroidalError::OnAxis)));
    }

    #[test]
    fn glued_invariants_match_chart_zero_form() {
        let p = ChartPoint { k: 0, x: c(2.0, 0.0), y: c(3.0, 0.0) };
        let (z, w) = glued_invariants(&p).unwrap();
        assert_eq!(z, c(6.0, 0.0));
        assert_eq!(w, c(2.0, 0.0));

        // same point seen from chart 1: w_n = y^{-1} there
        let up = transition(&p, Direction::Up).unwrap();
        let (z1, w1) = glued_invariants(&up).unwrap();
        assert_eq!(z1, c(6.0, 0.0));
        assert_eq!(w1, c(2.0, 0.0));
    }

    #[test]
    fn invariants_survive_random_chart_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let start = sample_total_point(&mut rng, 2, 0.9).chart;
            let (z0, w0) = glued_invariants(&start).unwrap();
            let mut p = start;
            for hop in 0i64..10 {
                let dir = if (hop + p.k).rem_euclid(3) == 0 { Direction::Down } else { Direction::Up };
                p = transition(&p, dir).unwrap();
                let (z, w) = glued_invariants(&p).unwrap();
                assert!((z - z0).norm() <= DEFAULT_DRIFT_TOL * z0.norm());
                assert!((w - w0).norm() <= DEFAULT_DRIFT_TOL * w0.norm());
            }
        }
    }

    #[test]
    fn exact_walks_have_no_drift_at_all() {
        let ctx = FieldContext::new(2).unwrap();
        let p = ExactChartPoint {
            k: 0,
            x: ctx.parse("1/3 + 1/5*sqrt(2)*i").unwrap(),
            y: ctx.parse("2 - 1/7*i").unwrap(),
        };
        let (z0, w0) = glued_invariants_exact(&p).unwrap();
        let mut q = p.clone();
        for _ in 0..4 {
            q = transition_exact(&q, Direction::Up).unwrap();
        }
        for _ in 0..6 {
            q = transition_exact(&q, Direction::Down).unwrap();
        }
        for _ in 0..2 {
            q = transition_exact(&q, Direction::Up).unwrap();
        }
        assert_eq!(q, p);
        let (z, w) = glued_invariants_exact(&q).unwrap();
        assert_eq!(z, z0);
        assert_eq!(w, w0);
    }

    #[test]
    fn glue_determinant_is_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let chart = sample_total_point(&mut rng, 2, 0.9).chart;
            let res = omega_glue_residual(&chart, DEFAULT_FD_STEP).unwrap();
            assert!(res <= DEFAULT_GLUE_TOL, "residual {res} at {chart:?}");
        }
    }

    #[test]
    fn identity_element_acts_trivially() {
        let spec = presets::cubic();
        let action = GluedAction::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sample_total_point(&mut rng, 2, 0.85);
        let q = action.apply(&GroupElement::identity(1), &p).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn quadratic_coupling_phases_are_the_hessian_entries() {
        // constant Hessian [[i, 1/4], [1/4, i]]: the torus generator twists
        // w_1 by exp(2 pi i * i) = e^{-2 pi} and y by exp(2 pi i / 4) = i
        let spec = presets::rational_coupling(4);
        let action = GluedAction::new(&spec).unwrap();
        let p = TotalPoint::new(
            vec![c(0.125, 0.0)],
            vec![c(1.0, 0.0)],
            ChartPoint { k: 0, x: c(0.3, 0.0), y: c(0.25, 0.0) },
        )
        .unwrap();
        let q = action.apply(&GroupElement::new(vec![1], 0), &p).unwrap();
        let expected_w = (-TAU).exp();
        assert!((q.w[0] - c(expected_w, 0.0)).norm() < 1e-15);
        assert!((q.chart.y - c(0.25, 0.0) * c(0.0, 1.0)).norm() < 1e-15);
        assert!((q.chart.x - c(0.3, 0.0) * c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(q.chart.k, 0);

        // the chain walker shifts the chart index by ell
        let q = action.apply(&GroupElement::new(vec![0], 2), &p).unwrap();
        assert_eq!(q.chart.k, 2 * spec.ell);
        assert_eq!(q.z, p.z);
    }

    #[test]
    fn action_is_a_group_homomorphism() {
        let spec = presets::cubic();
        let action = GluedAction::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let p = sample_total_point(&mut rng, 2, 0.85);
            let g1 = GroupElement::new(vec![rng.gen_range(-2..=2)], rng.gen_range(-2..=2));
            let g2 = GroupElement::new(vec![rng.gen_range(-2..=2)], rng.gen_range(-2..=2));
            let both = g1.compose(&g2).unwrap();
            let via_composite = action.apply(&both, &p).unwrap();
            let via_steps = action.apply(&g2, &action.apply(&g1, &p).unwrap()).unwrap();
            assert_eq!(via_composite.chart.k, via_steps.chart.k);
            let pairs = via_composite
                .w
                .iter()
                .zip(&via_steps.w)
                .chain([(&via_composite.chart.x, &via_steps.chart.x)])
                .chain([(&via_composite.chart.y, &via_steps.chart.y)]);
            for (a, b) in pairs {
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn hessian_actions_pass_both_invariance_checks() {
        for spec in [presets::cubic(), presets::rational_coupling(3), presets::irrational_coupling()] {
            let gamma = GroupElement::new(vec![1], 1);
            let check = verify_symplectic_action(&spec, &gamma, 25, 5).unwrap();
            assert_eq!(check, SymplecticCheck::ExactPass);
        }
    }

    #[test]
    fn non_hessian_matrix_is_caught_exactly() {
        // entries [[0, 0], [z_2, 0]]: the phase of the first coordinate
        // depends on z_2 but nothing balances it in the second slot
        let ctx = FieldContext::new(1).unwrap();
        let mut bad = Polynomial::zero(2);
        bad.add_term(vec![0, 1], ctx.parse("1").unwrap()).unwrap();
        let theta = vec![
            vec![Polynomial::zero(2), Polynomial::zero(2)],
            vec![bad, Polynomial::zero(2)],
        ];
        let action = GluedAction::from_matrix(theta, 1).unwrap();
        let check = action.verify(&GroupElement::new(vec![0], 1), 5, 1, 0.9).unwrap();
        assert_eq!(
            check,
            SymplecticCheck::Fail(SymplecticWitness::MixedPartials { i: 0, k: 1 })
        );
    }

    #[test]
    fn polarization_passes_for_shears_and_identity() {
        assert_eq!(verify_polarization(2, 1).unwrap(), PolarizationCheck::ExactPass);
        assert_eq!(verify_polarization(1, 0).unwrap(), PolarizationCheck::ExactPass);
        for n in 1..=6 {
            for ell in 0..=10 {
                assert_eq!(verify_polarization(n, ell).unwrap(), PolarizationCheck::ExactPass);
            }
        }
    }

    #[test]
    fn misdirected_shear_fails_polarization() {
        // send the last q-vector to itself plus ell times the first q-vector
        let n = 3;
        let ell = 2i64;
        let mut m = IntMat::identity(2 * n);
        m[(n, 2 * n - 1)] = BigInt::from(ell);
        assert_eq!(polarization_check_matrix(&m).unwrap(), PolarizationCheck::Fail);
    }

    #[test]
    fn fiber_model_of_the_constant_coupling() {
        let spec = presets::rational_coupling(4);
        let ctx = spec.context();
        let b = vec![ctx.parse("1/3").unwrap(), ctx.parse("0").unwrap()];
        let fiber = singular_fiber(&spec, &b).unwrap();
        assert_eq!(fiber.components, 1);
        assert_eq!(fiber.cycle_type, CycleType::Finite(BigUint::from(4u32)));
        assert_eq!(fiber.twist, vec![ctx.parse("1/4").unwrap()]);
        assert_eq!(fiber.base_torus_gens, vec![vec![ctx.parse("i").unwrap()]]);
        assert_eq!(fiber.dual_graph, vec![(0, 0)]);
        assert!(fiber.sections_distinct);
        assert!(!fiber.extrapolated);

        let json: serde_json::Value = serde_json::from_str(&serde_json::to_string(&fiber).unwrap()).unwrap();
        assert_eq!(json["components"], 1);
        assert_eq!(json["twist"][0], "1/4");
        assert_eq!(json["cycle_type"]["order"], "4");
    }

    #[test]
    fn fiber_with_irrational_twist_is_an_unbounded_chain() {
        let spec = presets::irrational_coupling();
        let ctx = spec.context();
        let b = vec![ctx.parse("0").unwrap(), ctx.parse("0").unwrap()];
        let fiber = singular_fiber(&spec, &b).unwrap();
        assert_eq!(fiber.cycle_type, CycleType::Infinite);
    }

    #[test]
    fn multi_component_fibers_cycle_and_carry_the_flag() {
        let ctx = FieldContext::new(1).unwrap();
        let mut psi = Polynomial::zero(2);
        psi.add_term(vec![2, 0], ctx.parse("i/2").unwrap()).unwrap();
        psi.add_term(vec![1, 1], ctx.parse("1/5").unwrap()).unwrap();
        let spec = PotentialSpec::new(2, 3, 1, Rational::new(1.into(), 2.into()).unwrap(), psi).unwrap();
        let b = vec![ctx.parse("1/4").unwrap(), ctx.parse("0").unwrap()];
        let fiber = singular_fiber(&spec, &b).unwrap();
        assert_eq!(fiber.components, 3);
        assert_eq!(fiber.dual_graph, vec![(0, 1), (1, 2), (2, 0)]);
        assert!(fiber.extrapolated);
        assert_eq!(fiber.cycle_type, CycleType::Finite(BigUint::from(5u32)));
    }

    #[test]
    fn fiber_rejects_off_discriminant_and_outside_points() {
        let spec = presets::rational_coupling(2);
        let ctx = spec.context();
        let off = vec![ctx.parse("1/3").unwrap(), ctx.parse("1/8").unwrap()];
        assert!(matches!(singular_fiber(&spec, &off), Err(ToroidalError::NotOnDiscriminant)));
        let outside = vec![ctx.parse("2").unwrap(), ctx.parse("0").unwrap()];
        assert!(matches!(singular_fiber(&spec, &outside), Err(ToroidalError::OutsidePolydisk)));
    }

    #[test]
    fn analytic_jacobian_agrees_with_finite_differences() {
        let spec = presets::cubic();
        let action = GluedAction::new(&spec).unwrap();
        let gamma = GroupElement::new(vec![2], -1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = sample_total_point(&mut rng, 2, 0.8);
        let jac = action.jacobian(&gamma, &p).unwrap();
        let h = 1e-5;
        let dim = 4;
        let perturb = |idx: usize, delta: f64| {
            let mut q = p.clone();
            match idx {
                0 => q.z[0] += delta,
                1 => q.w[0] += delta,
                2 => q.chart.x += delta,
                _ => q.chart.y += delta,
            }
            action.apply(&gamma, &q).unwrap()
        };
        let coords = |t: &TotalPoint| [t.z[0], t.w[0], t.chart.x, t.chart.y];
        for col in 0..dim {
            let plus = coords(&perturb(col, h));
            let minus = coords(&perturb(col, -h));
            for row in 0..dim {
                let fd = (plus[row] - minus[row]) / c(2.0 * h, 0.0);
                // entries reach 1e12 when the phases have negative
                // imaginary part, so compare relative to the entry
                assert!(
                    (fd - jac[row][col]).norm() <= 1e-6 * (1.0 + jac[row][col].norm()),
                    "row {row} col {col}: fd {fd} vs {}",
                    jac[row][col]
                );
            }
        }
    }
}
