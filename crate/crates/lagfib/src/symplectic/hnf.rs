//! Hermite and Smith normal forms over the integers, plus the lattice
//! queries built on them: kernels, membership, saturation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::mat::{IntMat, IntVec};

/// Quotient rounded to nearest (ties toward +infinity); keeps HNF pivots small.
fn div_rounded(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    // floor remainder has the sign of b
    let two_r = &r * 2;
    let bump = if b.is_positive() { two_r > *b } else { two_r < *b };
    if bump {
        q + 1
    } else {
        q
    }
}

pub struct ColumnHermite {
    /// Column echelon form: h = a * u.
    pub h: IntMat,
    /// Unimodular column transform.
    pub u: IntMat,
    /// (row, col) of each pivot, rows strictly increasing, cols 0..rank.
    pub pivots: Vec<(usize, usize)>,
}

impl ColumnHermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Column-style Hermite form: pivot columns first, kernel columns (all zero)
/// last. Pivot entries positive, entries to their left reduced into [0, pivot).
pub fn hnf_col(a: &IntMat) -> ColumnHermite {
    let m = a.rows();
    let n = a.cols();
    let mut h = a.clone();
    let mut u = IntMat::identity(n);
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for row in 0..m {
        if next == n {
            break;
        }
        if (next..n).all(|j| h[(row, j)].is_zero()) {
            continue;
        }
        loop {
            let jmin = (next..n)
                .filter(|&j| !h[(row, j)].is_zero())
                .min_by_key(|&j| h[(row, j)].abs())
                .expect("nonzero entry exists");
            h.swap_cols(next, jmin);
            u.swap_cols(next, jmin);
            let mut clean = true;
            let pivot = h[(row, next)].clone();
            for j in next + 1..n {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = -div_rounded(&h[(row, j)], &pivot);
                h.add_col_multiple(j, next, &q);
                u.add_col_multiple(j, next, &q);
                if !h[(row, j)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h[(row, next)].is_negative() {
            h.negate_col(next);
            u.negate_col(next);
        }
        let pivot = h[(row, next)].clone();
        for j in 0..next {
            let q = -h[(row, j)].div_floor(&pivot);
            h.add_col_multiple(j, next, &q);
            u.add_col_multiple(j, next, &q);
        }
        pivots.push((row, next));
        next += 1;
    }
    ColumnHermite { h, u, pivots }
}

pub fn rank(a: &IntMat) -> usize {
    hnf_col(a).rank()
}

/// Basis of {x : a x = 0} as matrix columns. Always a saturated sublattice of
/// Z^cols since the columns extend to a basis of the ambient lattice.
pub fn kernel(a: &IntMat) -> IntMat {
    let hermite = hnf_col(a);
    let r = hermite.rank();
    hermite.u.take_cols(r..a.cols())
}

/// Some integer x with w x = v, if one exists.
pub fn solve_in_lattice(w: &IntMat, v: &[BigInt]) -> Option<IntVec> {
    assert_eq!(w.rows(), v.len(), "dimension mismatch");
    let hermite = hnf_col(w);
    let n = w.cols();
    let mut y = vec![BigInt::zero(); n];
    let mut pivot_iter = hermite.pivots.iter().peekable();
    for row in 0..w.rows() {
        let acc: BigInt = (0..n).map(|j| &hermite.h[(row, j)] * &y[j]).sum();
        let need = &v[row] - acc;
        match pivot_iter.peek() {
            Some(&&(prow, pcol)) if prow == row => {
                pivot_iter.next();
                let p = &hermite.h[(row, pcol)];
                let (q, r) = need.div_rem(p);
                if !r.is_zero() {
                    return None;
                }
                y[pcol] = q;
            }
            _ => {
                if !need.is_zero() {
                    return None;
                }
            }
        }
    }
    Some(hermite.u.mul_vec(&y))
}

/// Diagonal of the Smith normal form, nonnegative, each dividing the next.
pub fn snf_diagonal(a: &IntMat) -> Vec<BigInt> {
    let mut m = a.clone();
    let rows = m.rows();
    let cols = m.cols();
    let mut diag = Vec::new();
    let mut t = 0usize;
    while t < rows.min(cols) {
        // find the submatrix entry of least magnitude to use as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[(i, j)].is_zero()
                    && best.map_or(true, |(bi, bj)| m[(i, j)].abs() < m[(bi, bj)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap_rows(t, bi);
        m.swap_cols(t, bj);
        // clear row and column t; restart if a reduction leaves a remainder
        let mut dirty = false;
        for i in t + 1..rows {
            if !m[(i, t)].is_zero() {
                let q = -div_rounded(&m[(i, t)], &m[(t, t)].clone());
                m.add_row_multiple(i, t, &q);
                if !m[(i, t)].is_zero() {
                    dirty = true;
                }
            }
        }
        for j in t + 1..cols {
            if !m[(t, j)].is_zero() {
                let q = -div_rounded(&m[(t, j)], &m[(t, t)].clone());
                m.add_col_multiple(j, t, &q);
                if !m[(t, j)].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // pivot must divide every remaining entry; if not, fold the offending
        // row in and redo this round
        let pivot = m[(t, t)].clone();
        let mut fixed = true;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&m[(i, j)] % &pivot).is_zero() {
                    m.add_row_multiple(t, i, &BigInt::one());
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        diag.push(pivot.abs());
        t += 1;
    }
    diag
}

/// Every elementary divisor is 1, i.e. the columns extend to a basis of Z^rows.
pub fn is_saturated_basis(gens: &IntMat) -> bool {
    if gens.cols() == 0 {
        return true;
    }
    let diag = snf_diagonal(gens);
    diag.len() == gens.cols() && diag.iter().all(|d| d.is_one())
}

/// gcd and Bezout coefficients: sum(coeffs[i] * vals[i]) = gcd >= 0.
pub fn ext_gcd_vec(vals: &[BigInt]) -> (BigInt, IntVec) {
    let mut g = BigInt::zero();
    let mut coeffs = vec![BigInt::zero(); vals.len()];
    for (i, v) in vals.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        if g.is_zero() {
            g = v.abs();
            coeffs[i] = if v.is_negative() { BigInt::from(-1) } else { BigInt::one() };
            continue;
        }
        let eg = g.extended_gcd(v);
        for c in coeffs.iter_mut() {
            *c *= &eg.x;
        }
        coeffs[i] = eg.y;
        g = eg.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -std::mem::take(c);
        }
    }
    (g, coeffs)
}
