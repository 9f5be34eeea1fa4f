//! Numeric order search by lattice reduction.
//!
//! Membership of k*v in the generated subgroup is decided approximately:
//! generators are embedded into a higher-dimensional lattice whose extra
//! coordinates record the integer coefficients used, so a nearest-plane
//! round gives both a candidate combination and its true residual. The
//! search never certifies infinitude; running out of k is reported as such.

use num_bigint::BigUint;

use crate::arith::ComplexF;

use super::CycleType;

const LLL_DELTA: f64 = 0.99;

/// Column weight on the geometric block: exact relations must dominate the
/// coefficient-recording block.
fn weight(tol: f64) -> f64 {
    (1.0 / tol).max(1e6)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place LLL reduction, textbook Gram-Schmidt variant.
fn lll_reduce(basis: &mut Vec<Vec<f64>>, delta: f64) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let mut ortho: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut norms = vec![0.0f64; n];
    let gso = |basis: &Vec<Vec<f64>>,
               ortho: &mut Vec<Vec<f64>>,
               mu: &mut Vec<Vec<f64>>,
               norms: &mut Vec<f64>| {
        for i in 0..basis.len() {
            let mut b = basis[i].clone();
            for j in 0..i {
                mu[i][j] = if norms[j] > 0.0 { dot(&basis[i], &ortho[j]) / norms[j] } else { 0.0 };
                for (x, y) in b.iter_mut().zip(&ortho[j]) {
                    *x -= mu[i][j] * y;
                }
            }
            norms[i] = dot(&b, &b);
            ortho[i] = b;
        }
    };
    gso(basis, &mut ortho, &mut mu, &mut norms);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let r = mu[k][j].round();
            if r != 0.0 {
                let from = basis[j].clone();
                for (x, y) in basis[k].iter_mut().zip(&from) {
                    *x -= r * y;
                }
                gso(basis, &mut ortho, &mut mu, &mut norms);
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            gso(basis, &mut ortho, &mut mu, &mut norms);
            k = k.max(2) - 1;
        }
    }
}

/// Nearest-plane: lattice vector close to the target, expressed in the
/// ambient coordinates.
fn babai(basis: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let n = basis.len();
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut b = basis[i].clone();
        for prev in ortho.iter().take(i) {
            let denom = dot(prev, prev);
            if denom > 0.0 {
                let m = dot(&basis[i], prev) / denom;
                for (x, y) in b.iter_mut().zip(prev) {
                    *x -= m * y;
                }
            }
        }
        ortho.push(b);
    }
    let mut residue = target.to_vec();
    let mut lattice_vec = vec![0.0f64; target.len()];
    for i in (0..n).rev() {
        let denom = dot(&ortho[i], &ortho[i]);
        if denom <= 0.0 {
            continue;
        }
        let c = (dot(&residue, &ortho[i]) / denom).round();
        if c != 0.0 {
            for ((r, l), b) in residue.iter_mut().zip(lattice_vec.iter_mut()).zip(&basis[i]) {
                *r -= c * b;
                *l += c * b;
            }
        }
    }
    lattice_vec
}

fn as_reals(v: &[ComplexF]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Searches k = 1..k_max for k*v inside Z^dim + span_Z(w_list) up to the
/// given absolute residual. First hit wins; exhaustion yields UnknownUpTo,
/// never Infinite.
pub fn order_numeric(v: &[ComplexF], w_list: &[Vec<ComplexF>], k_max: u64, tol: f64) -> CycleType {
    assert!(k_max >= 1, "search bound must be positive");
    let dim = v.len();
    if dim == 0 {
        return CycleType::Finite(BigUint::from(1u32));
    }
    let space = 2 * dim;
    // geometric generators: the w_i plus the unit shifts of Z^dim
    let mut gens: Vec<Vec<f64>> = w_list.iter().map(|w| as_reals(w)).collect();
    for j in 0..dim {
        let mut unit = vec![0.0; space];
        unit[2 * j] = 1.0;
        gens.push(unit);
    }
    let c = weight(tol);
    // embedded columns (C * g_i ; e_i): independent even when the g_i are
    // degenerate, and the tail records the combination used
    let total = gens.len();
    let mut basis: Vec<Vec<f64>> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut col = vec![0.0; space + total];
            for (slot, x) in col.iter_mut().zip(g) {
                *slot = c * x;
            }
            col[space + i] = 1.0;
            col
        })
        .collect();
    lll_reduce(&mut basis, LLL_DELTA);
    let v_real = as_reals(v);
    for k in 1..=k_max {
        let mut target = vec![0.0; space + total];
        for (slot, x) in target.iter_mut().zip(&v_real) {
            *slot = c * (k as f64) * x;
        }
        let near = babai(&basis, &target);
        // read the integer combination out of the tail, then measure the
        // true residual in the original space
        let coeffs: Vec<f64> = near[space..].iter().map(|x| x.round()).collect();
        let mut residual = 0.0f64;
        for s in 0..space {
            let mut approx = 0.0;
            for (coef, g) in coeffs.iter().zip(&gens) {
                approx += coef * g[s];
            }
            let diff = (k as f64) * v_real[s] - approx;
            residual += diff * diff;
        }
        if residual.sqrt() < tol {
            return CycleType::Finite(BigUint::from(k));
        }
    }
    CycleType::UnknownUpTo(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexF {
        ComplexF::new(re, im)
    }

    #[test]
    fn reciprocal_coupling_orders() {
        for k0 in [1u64, 2, 4, 37, 100] {
            let v = vec![c(1.0 / k0 as f64, 0.0)];
            let w = vec![vec![c(0.0, 1.0)]];
            assert_eq!(order_numeric(&v, &w, 100, 1e-9), CycleType::Finite(BigUint::from(k0)));
        }
    }

    #[test]
    fn generator_itself_has_order_one() {
        let w = vec![c(0.37, 1.21), c(-2.0, 0.5)];
        assert_eq!(
            order_numeric(&w, &[w.clone()], 50, 1e-9),
            CycleType::Finite(BigUint::from(1u32))
        );
    }

    #[test]
    fn irrational_twist_exhausts_search() {
        let v = vec![c(std::f64::consts::SQRT_2, 0.0)];
        let w = vec![vec![c(0.0, 1.0)]];
        assert_eq!(order_numeric(&v, &w, 10_000, 1e-9), CycleType::UnknownUpTo(10_000));
    }

    #[test]
    fn combined_relation_found() {
        // v = (3 w1 + 2 w2 + (1,0)) / 6
        let w1 = vec![c(0.25, 0.75), c(0.5, -0.125)];
        let w2 = vec![c(-0.5, 0.3), c(0.7, 0.2)];
        let v: Vec<ComplexF> = (0..2)
            .map(|j| (3.0 * w1[j] + 2.0 * w2[j] + if j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }) / 6.0)
            .collect();
        assert_eq!(
            order_numeric(&v, &[w1, w2], 50, 1e-9),
            CycleType::Finite(BigUint::from(6u32))
        );
    }
}
