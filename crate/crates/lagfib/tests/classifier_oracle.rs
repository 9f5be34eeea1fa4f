//! Three-way agreement test for the torsion-order classifier. The exact
//! path (relation kernel plus gcd) is checked against a deliberately dumb
//! oracle that clears denominators and asks the lattice solver whether
//! k * v lands in the generator span for k = 1, 2, 3, ..., and against the
//! floating-point LLL search. The three share no code beyond the solver
//! primitive the oracle calls directly.

use lagfib::cycle::{order_exact, order_numeric, CycleType, TorGroupElement};
use lagfib::symplectic::{solve_in_lattice, IntMat, IntVec};
use lagfib::{FieldContext, FieldElement, Rational};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every coordinate splits into four rational slots over the basis
/// 1, sqrt(d), i, i*sqrt(d).
fn flatten(v: &[FieldElement]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(4 * v.len());
    for el in v {
        let (a, b, c, e) = el.decompose();
        out.extend([a.clone(), b.clone(), c.clone(), e.clone()]);
    }
    out
}

fn common_denominator(vecs: &[Vec<Rational>]) -> BigInt {
    let mut d = BigInt::one();
    for vec in vecs {
        for r in vec {
            d = d.lcm(r.denom());
        }
    }
    d
}

fn scale_to_int(v: &[Rational], d: &BigInt) -> IntVec {
    v.iter().map(|r| r.numer() * (d / r.denom())).collect()
}

/// Linear scan for the smallest k with k * v inside the span of the
/// generators and the integer shifts.
fn brute_force_order(el: &TorGroupElement, k_max: u64) -> Option<u64> {
    let dim = el.dim();
    let v_flat = flatten(el.twist());
    let gen_flat: Vec<Vec<Rational>> = el.gens().iter().map(|g| flatten(g)).collect();
    let mut all = gen_flat.clone();
    all.push(v_flat.clone());
    let denom = common_denominator(&all);

    let mut cols: Vec<IntVec> = gen_flat.iter().map(|g| scale_to_int(g, &denom)).collect();
    for j in 0..dim {
        let mut shift = vec![BigInt::zero(); 4 * dim];
        shift[4 * j] = denom.clone();
        cols.push(shift);
    }
    let basis = IntMat::from_cols(cols);
    let v_int = scale_to_int(&v_flat, &denom);

    (1..=k_max).find(|&k| {
        let target: IntVec = v_int.iter().map(|x| x * BigInt::from(k)).collect();
        solve_in_lattice(&basis, &target).is_some()
    })
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    let numer = rng.gen_range(-4i64..=4);
    let denom = rng.gen_range(1i64..=4);
    Rational::new(numer.into(), denom.into()).unwrap()
}

fn small_element<R: Rng>(rng: &mut R, ctx: &FieldContext) -> FieldElement {
    ctx.element(
        small_rational(rng),
        small_rational(rng),
        small_rational(rng),
        small_rational(rng),
    )
}

/// Instance with order dividing k: v = (integer combination of the
/// generators plus an integer shift) / k.
fn random_instance<R: Rng>(rng: &mut R) -> TorGroupElement {
    let dim = rng.gen_range(1usize..=2);
    let d = if rng.gen_bool(0.5) { 1 } else { 2 };
    let ctx = FieldContext::new(d).unwrap();
    let gens: Vec<Vec<FieldElement>> = (0..dim)
        .map(|_| (0..dim).map(|_| small_element(rng, &ctx)).collect())
        .collect();
    let k = rng.gen_range(1i64..=30);
    let coeffs: Vec<i64> = (0..dim).map(|_| rng.gen_range(-3i64..=3)).collect();
    let inv_k = ctx.from_rational(Rational::new(1.into(), k.into()).unwrap());
    let v: Vec<FieldElement> = (0..dim)
        .map(|j| {
            let mut acc = ctx.from_rational(Rational::from_int(rng.gen_range(-2i64..=2)));
            for (i, c) in coeffs.iter().enumerate() {
                acc = acc
                    .checked_add(&gens[i][j].mul_int(&BigInt::from(*c)))
                    .unwrap();
            }
            acc.checked_mul(&inv_k).unwrap()
        })
        .collect();
    TorGroupElement::new(v, gens).unwrap()
}

#[test]
fn exact_brute_force_and_numeric_orders_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..40 {
        let el = random_instance(&mut rng);
        let exact = order_exact(&el);
        assert!(exact.certificate_holds(), "trial {trial}: certificate failed");
        let k = match &exact.cycle_type {
            CycleType::Finite(k) => u64::try_from(k.clone()).unwrap(),
            other => panic!("trial {trial}: constructed instance came out {other:?}"),
        };
        assert!(k <= 30, "trial {trial}: order {k} exceeds the construction bound");

        let brute = brute_force_order(&el, 64);
        assert_eq!(brute, Some(k), "trial {trial}: brute force disagrees");

        let (v_c, gens_c) = el.embed().unwrap();
        let numeric = order_numeric(&v_c, &gens_c, 100, 1e-9);
        assert_eq!(
            numeric,
            CycleType::Finite(BigUint::from(k)),
            "trial {trial}: numeric search disagrees"
        );
    }
}
