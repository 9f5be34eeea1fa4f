//! Random unimodular and symplectic matrices for stress tests.

use num_bigint::BigInt;
use rand::Rng;

use super::mat::IntMat;
use super::std_j;

/// Random product of elementary column operations, returned with its inverse
/// (maintained by mirrored row operations, so no solving is needed).
pub fn random_unimodular_with_inverse<R: Rng>(n: usize, steps: usize, rng: &mut R) -> (IntMat, IntMat) {
    let mut u = IntMat::identity(n);
    let mut v = IntMat::identity(n);
    if n < 2 {
        return (u, v);
    }
    for _ in 0..steps {
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                u.swap_cols(i, j);
                v.swap_rows(i, j);
            }
            1 => {
                let to = rng.gen_range(0..n);
                let mut from = rng.gen_range(0..n);
                if from == to {
                    from = (from + 1) % n;
                }
                const STEPS: [i64; 6] = [-3, -2, -1, 1, 2, 3];
                let k = BigInt::from(STEPS[rng.gen_range(0..STEPS.len())]);
                u.add_col_multiple(to, from, &k);
                v.add_row_multiple(from, to, &(-k));
            }
            _ => {
                let i = rng.gen_range(0..n);
                u.negate_col(i);
                for j in 0..n {
                    let val = -v[(i, j)].clone();
                    v[(i, j)] = val;
                }
            }
        }
    }
    (u, v)
}

/// Random element of the integral symplectic group for the standard form:
/// a word in block-diagonal GL(n) embeddings, symmetric shears, and the
/// form matrix itself.
pub fn random_symplectic<R: Rng>(n: usize, steps: usize, rng: &mut R) -> IntMat {
    let mut m = IntMat::identity(2 * n);
    for _ in 0..steps {
        let factor = match rng.gen_range(0..4) {
            0 => {
                let (u, uinv) = random_unimodular_with_inverse(n, 4, rng);
                let mut g = IntMat::zeros(2 * n, 2 * n);
                let uinv_t = uinv.transpose();
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] = u[(i, j)].clone();
                        g[(n + i, n + j)] = uinv_t[(i, j)].clone();
                    }
                }
                g
            }
            1 | 2 => {
                // symmetric S makes both [[I,S],[0,I]] and [[I,0],[S,I]] symplectic
                let mut s = IntMat::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let val = BigInt::from(rng.gen_range(-2i64..=2));
                        s[(i, j)] = val.clone();
                        s[(j, i)] = val;
                    }
                }
                let mut g = IntMat::identity(2 * n);
                if rng.gen_bool(0.5) {
                    for i in 0..n {
                        for j in 0..n {
                            g[(i, n + j)] = s[(i, j)].clone();
                        }
                    }
                } else {
                    for i in 0..n {
                        for j in 0..n {
                            g[(n + i, j)] = s[(i, j)].clone();
                        }
                    }
                }
                g
            }
            _ => std_j(n),
        };
        m = m.mul(&factor);
    }
    m
}

/// Inverse of a symplectic matrix via the form: M^{-1} = -J M^T J.
pub fn symplectic_inverse(m: &IntMat) -> IntMat {
    let n = m.rows() / 2;
    let j = std_j(n);
    j.mul(&m.transpose()).mul(&j).neg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn unimodular_pairs_multiply_to_identity() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let (u, v) = random_unimodular_with_inverse(4, 15, &mut rng);
            assert!(u.mul(&v).is_identity());
            assert!(u.is_unimodular());
        }
    }

    #[test]
    fn symplectic_samples_preserve_form() {
        let mut rng = StdRng::seed_from_u64(6);
        for n in 1..=3usize {
            let j = std_j(n);
            for _ in 0..10 {
                let m = random_symplectic(n, 8, &mut rng);
                assert_eq!(m.transpose().mul(&j).mul(&m), j);
                assert!(m.mul(&symplectic_inverse(&m)).is_identity());
            }
        }
    }
}
