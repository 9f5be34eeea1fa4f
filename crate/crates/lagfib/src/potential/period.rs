//! Period matrices: the exact Hessian part, the logarithmic part with an
//! explicit winding integer, and the positivity checks that make the pair a
//! genuine polarization.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::arith::{ComplexF, FieldElement};

use super::poly::{hessian, EmbeddedPoly};
use super::spec::PotentialSpec;
use super::PotentialError;

pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;

/// Period data at one base point.
///
/// The multivalued entry is kept in three pieces: the univalent Hessian part,
/// the principal-branch logarithm, and an integer winding count. Only the
/// first two live in floating point; shifting the branch changes theta_nn by
/// exactly ell per step, as an integer.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    pub point: Vec<ComplexF>,
    pub branch: i64,
    pub ell: i64,
    /// Hessian of the potential at the point.
    pub theta_tilde: Vec<Vec<ComplexF>>,
    /// Exact Hessian when the point was exact.
    pub theta_tilde_exact: Option<Vec<Vec<FieldElement>>>,
    /// Log z_n / 2 pi i on the principal branch; None on the discriminant.
    log_term: Option<ComplexF>,
}

impl PeriodMatrix {
    pub fn n(&self) -> usize {
        self.theta_tilde.len()
    }

    /// Exact integer added to theta_nn by the chosen branch.
    pub fn winding(&self) -> i64 {
        self.ell * self.branch
    }

    pub fn on_discriminant(&self) -> bool {
        self.log_term.is_none()
    }

    /// Full multivalued matrix on the stored branch; None on the discriminant.
    pub fn theta(&self) -> Option<Vec<Vec<ComplexF>>> {
        let log_term = self.log_term?;
        let mut m = self.theta_tilde.clone();
        let n = self.n();
        m[n - 1][n - 1] += (self.ell as f64) * log_term + ComplexF::new(self.winding() as f64, 0.0);
        Some(m)
    }

    /// The matrix the Riemann conditions apply to: theta when defined,
    /// otherwise its univalent part.
    pub fn theta_or_tilde(&self) -> Vec<Vec<ComplexF>> {
        self.theta().unwrap_or_else(|| self.theta_tilde.clone())
    }
}

fn log_term_of(zn: ComplexF) -> Option<ComplexF> {
    if zn == ComplexF::new(0.0, 0.0) {
        return None;
    }
    // Log z / 2 pi i, principal branch
    Some(zn.ln() / ComplexF::new(0.0, TAU))
}

pub fn evaluate_period(
    spec: &PotentialSpec,
    point: &[ComplexF],
    branch: i64,
) -> Result<PeriodMatrix, PotentialError> {
    if point.len() != spec.n {
        return Err(PotentialError::WrongPointArity { expected: spec.n, got: point.len() });
    }
    let h = hessian(&spec.psi);
    let mut theta_tilde = vec![vec![ComplexF::new(0.0, 0.0); spec.n]; spec.n];
    for (i, row) in h.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            theta_tilde[i][j] = entry.embed()?.eval(point);
        }
    }
    Ok(PeriodMatrix {
        point: point.to_vec(),
        branch,
        ell: spec.ell,
        theta_tilde,
        theta_tilde_exact: None,
        log_term: log_term_of(point[spec.n - 1]),
    })
}

/// Exact-point variant: the Hessian is evaluated in the field, so symmetry
/// and the branch-shift identity hold exactly, then embedded for the
/// floating-point fields.
pub fn evaluate_period_exact(
    spec: &PotentialSpec,
    point: &[FieldElement],
    branch: i64,
) -> Result<PeriodMatrix, PotentialError> {
    if point.len() != spec.n {
        return Err(PotentialError::WrongPointArity { expected: spec.n, got: point.len() });
    }
    let h = hessian(&spec.psi);
    let mut exact = vec![vec![FieldElement::zero(); spec.n]; spec.n];
    for (i, row) in h.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            exact[i][j] = entry.eval_exact(point)?;
        }
    }
    let theta_tilde = exact
        .iter()
        .map(|row| row.iter().map(|v| v.embed()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let numeric_point = point.iter().map(|z| z.embed()).collect::<Result<Vec<_>, _>>()?;
    // exact zero test decides the discriminant, not the embedding
    let log_term = if point[spec.n - 1].is_zero() { None } else { log_term_of(numeric_point[spec.n - 1]) };
    Ok(PeriodMatrix {
        point: numeric_point,
        branch,
        ell: spec.ell,
        theta_tilde,
        theta_tilde_exact: Some(exact),
        log_term,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RiemannCheck {
    Pass,
    Fail(RiemannWitness),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RiemannWitness {
    /// |theta_ij - theta_ji| exceeded the relative tolerance.
    Asymmetry { i: usize, j: usize, magnitude: f64 },
    /// Cholesky pivot of the imaginary part at or below tolerance.
    BadPivot { index: usize, pivot: f64 },
}

/// Pivots of the (unscaled) Cholesky factorization of a symmetric matrix,
/// stopping after the first nonpositive one since the factorization cannot
/// continue past it.
pub fn cholesky_pivots(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut l = vec![vec![0.0f64; n]; n];
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let mut pivot = a[k][k];
        for t in 0..k {
            pivot -= l[k][t] * l[k][t];
        }
        pivots.push(pivot);
        if pivot <= 0.0 {
            return pivots;
        }
        let root = pivot.sqrt();
        l[k][k] = root;
        for i in k + 1..n {
            let mut v = a[i][k];
            for t in 0..k {
                v -= l[i][t] * l[k][t];
            }
            l[i][k] = v / root;
        }
    }
    pivots
}

/// Symmetry within tol (relative to the largest entry) and positive-definite
/// imaginary part with every pivot above tol.
pub fn riemann_check(pm: &PeriodMatrix, tol: f64) -> RiemannCheck {
    let m = pm.theta_or_tilde();
    let n = m.len();
    let scale = m
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            let gap = (m[i][j] - m[j][i]).norm();
            if gap > tol * scale {
                return RiemannCheck::Fail(RiemannWitness::Asymmetry { i, j, magnitude: gap });
            }
        }
    }
    let im: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|z| z.im).collect()).collect();
    let pivots = cholesky_pivots(&im);
    for (index, &pivot) in pivots.iter().enumerate() {
        if pivot <= tol {
            return RiemannCheck::Fail(RiemannWitness::BadPivot { index, pivot });
        }
    }
    RiemannCheck::Pass
}

/// Positivity evidence over the closed polydisk.
#[derive(Debug, Clone)]
pub struct DomainReport {
    /// Smallest Cholesky pivot of Im Hess seen over the grid.
    pub min_pivot: f64,
    /// Sample attaining it.
    pub worst_point: Vec<ComplexF>,
    /// Number of grid points inspected.
    pub samples: usize,
}

/// Samples Im Hess Psi over a polar grid on the closed polydisk
/// |z_i| <= epsilon and reports the worst Cholesky pivot. A positive minimum
/// is sampled evidence for the standing positivity hypothesis, not a proof.
pub fn certify_domain(spec: &PotentialSpec, grid_per_axis: usize) -> Result<DomainReport, PotentialError> {
    if grid_per_axis < 2 {
        return Err(PotentialError::GridTooCoarse);
    }
    let n = spec.n;
    let eps = spec.epsilon.to_f64_nearest()?;
    let h = hessian(&spec.psi);
    let embedded: Vec<Vec<EmbeddedPoly>> = h
        .iter()
        .map(|row| row.iter().map(|p| p.embed()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let per_axis = grid_per_axis * grid_per_axis; // radius x angle
    let total = per_axis.checked_pow(n as u32).expect("grid size fits usize");
    let point_at = |mut idx: usize| -> Vec<ComplexF> {
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let axis = idx % per_axis;
            idx /= per_axis;
            let r = eps * (axis / grid_per_axis) as f64 / (grid_per_axis - 1) as f64;
            let phi = TAU * (axis % grid_per_axis) as f64 / grid_per_axis as f64;
            z.push(ComplexF::from_polar(r, phi));
        }
        z
    };
    let worst = (0..total)
        .into_par_iter()
        .map(|idx| {
            let z = point_at(idx);
            let im: Vec<Vec<f64>> = embedded
                .iter()
                .map(|row| row.iter().map(|p| p.eval(&z).im).collect())
                .collect();
            let pivot = cholesky_pivots(&im).into_iter().fold(f64::INFINITY, f64::min);
            (pivot, idx)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            // lexicographic min is order-insensitive, so the report is
            // deterministic under any rayon split
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    Ok(DomainReport { min_pivot: worst.0, worst_point: point_at(worst.1), samples: total })
}
