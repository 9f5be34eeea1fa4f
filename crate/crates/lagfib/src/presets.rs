//! Bundled example instances, matching the fixture files shipped with the
//! CLI. All three are two-dimensional with a single shear (ell = 1); they
//! differ in the coupling term, which drives the classifier to finite,
//! constant-finite, and infinite twist orders respectively.

use crate::arith::{FieldContext, Rational};
use crate::potential::{Polynomial, PotentialSpec};

fn build(n: usize, d: u64, epsilon: Rational, terms: &[(&[u32], &str)]) -> PotentialSpec {
    let ctx = FieldContext::new(d).expect("preset field context");
    let psi = Polynomial::from_terms(
        n,
        terms.iter().map(|(exps, coeff)| (exps.to_vec(), ctx.parse(coeff).expect("preset coefficient"))),
    )
    .expect("preset polynomial");
    PotentialSpec::new(n, 1, d, epsilon, psi).expect("preset spec")
}

/// Shifted cubic psi = ((z1+5i)^3 + (z2+5i)^3 + 3 z1^2 z2 + 3 z1 z2^2) / 6,
/// stored expanded. Its Hessian is [[z1+z2+5i, z1+z2], [z1+z2, z1+z2+5i]],
/// and the twist order at (z1, 0) is finite exactly when z1 is a Gaussian
/// rational.
pub fn cubic() -> PotentialSpec {
    build(
        2,
        1,
        Rational::ratio(9, 10),
        &[
            (&[3, 0], "1/6"),
            (&[0, 3], "1/6"),
            (&[2, 1], "1/2"),
            (&[1, 2], "1/2"),
            (&[2, 0], "5/2*i"),
            (&[0, 2], "5/2*i"),
            (&[1, 0], "-25/2"),
            (&[0, 1], "-25/2"),
            (&[0, 0], "-125/3*i"),
        ],
    )
}

/// Quadratic coupling psi = i(z1^2 + z2^2)/2 + z1 z2 / k. The Hessian is
/// constant, so every discriminant point has the same twist order k.
pub fn rational_coupling(k: i64) -> PotentialSpec {
    assert!(k >= 1, "coupling denominator must be positive");
    build(
        2,
        1,
        Rational::ratio(1, 2),
        &[(&[2, 0], "i/2"), (&[0, 2], "i/2"), (&[1, 1], &format!("1/{k}"))],
    )
}

/// Quadratic coupling psi = i(z1^2 + z2^2)/2 + sqrt(2) z1 z2. The twist
/// sqrt(2) admits no integer relation with i, so the order is infinite
/// everywhere on the discriminant.
pub fn irrational_coupling() -> PotentialSpec {
    build(
        2,
        2,
        Rational::ratio(1, 2),
        &[(&[2, 0], "i/2"), (&[0, 2], "i/2"), (&[1, 1], "sqrt(2)")],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::hessian;

    #[test]
    fn cubic_matches_shifted_form() {
        // expand ((z1+5i)^3 + (z2+5i)^3)/6 + (z1^2 z2 + z1 z2^2)/2 by hand
        // and compare term by term through the Hessian
        let spec = cubic();
        let ctx = spec.context();
        let h = hessian(&spec.psi);
        let probe = [ctx.parse("1/3").unwrap(), ctx.parse("-2/7 + i").unwrap()];
        let sum = probe[0].checked_add(&probe[1]).unwrap();
        let diag = sum.checked_add(&ctx.parse("5*i").unwrap()).unwrap();
        assert_eq!(h[0][0].eval_exact(&probe).unwrap(), diag);
        assert_eq!(h[0][1].eval_exact(&probe).unwrap(), sum);
        assert_eq!(spec.epsilon, Rational::ratio(9, 10));
    }

    #[test]
    fn coupling_hessians_are_constant() {
        for k in [1, 4, 10] {
            let spec = rational_coupling(k);
            let h = hessian(&spec.psi);
            assert_eq!(h[0][1], h[1][0]);
            assert_eq!(h[0][1].eval_exact(&[spec.context().parse("3").unwrap(), spec.context().parse("9").unwrap()]).unwrap(),
                spec.context().parse(&format!("1/{k}")).unwrap());
        }
        let irr = irrational_coupling();
        assert_eq!(irr.d, 2);
        let h = hessian(&irr.psi);
        let ctx = irr.context();
        assert_eq!(h[0][1].eval_exact(&[ctx.parse("0").unwrap(), ctx.parse("0").unwrap()]).unwrap(), ctx.sqrt_d());
    }
}
