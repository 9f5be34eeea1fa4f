//! Twist-order classification of singular fibers.
//!
//! The twist of a degenerate fiber is a point of a torus quotient; its order
//! decides the characteristic cycle: a finite order k gives a closed cycle
//! of k curves, infinite order an unbounded chain. Orders are computed
//! additively on logarithms: k * v must land in the integer span of the
//! lattice generators plus Z^(n-1), which is pure integer linear algebra
//! over the Q-basis {1, sqrt(d), i, i*sqrt(d)} of the coefficient field.

mod lll;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{ArithError, ComplexF, FieldElement, Rational};
use crate::potential::{hessian, PotentialSpec};
use crate::symplectic::{ext_gcd_vec, kernel, IntMat, IntVec};

pub use lll::order_numeric;

pub const DEFAULT_K_MAX: u64 = 10_000;
pub const DEFAULT_NUMERIC_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CycleError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("point is not on the discriminant (last coordinate must be exactly zero)")]
    NotOnDiscriminant,
    #[error("point lies outside the open polydisk")]
    OutsidePolydisk,
    #[error("expected {expected} coordinates, got {got}")]
    WrongArity { expected: usize, got: usize },
}

/// Element of the fiber torus quotient, stored additively: the twist vector
/// v and the generators w_i of the subgroup it is reduced by. The ambient
/// Z^(n-1) periodicity is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct TorGroupElement {
    v: Vec<FieldElement>,
    lattice_gens: Vec<Vec<FieldElement>>,
}

impl TorGroupElement {
    pub fn new(v: Vec<FieldElement>, lattice_gens: Vec<Vec<FieldElement>>) -> Result<Self, CycleError> {
        let dim = v.len();
        if lattice_gens.len() != dim {
            return Err(CycleError::WrongArity { expected: dim, got: lattice_gens.len() });
        }
        for w in &lattice_gens {
            if w.len() != dim {
                return Err(CycleError::WrongArity { expected: dim, got: w.len() });
            }
        }
        // all entries must live in one quadratic field (d = 1 coerces freely)
        let mut d = 1u64;
        for entry in v.iter().chain(lattice_gens.iter().flatten()) {
            if entry.d() != 1 {
                if d != 1 && d != entry.d() {
                    return Err(CycleError::Arith(ArithError::ContextMismatch { left: d, right: entry.d() }));
                }
                d = entry.d();
            }
        }
        Ok(TorGroupElement { v, lattice_gens })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn twist(&self) -> &[FieldElement] {
        &self.v
    }

    pub fn gens(&self) -> &[Vec<FieldElement>] {
        &self.lattice_gens
    }

    /// Same element with the twist multiplied by an integer.
    pub fn scaled(&self, j: i64) -> TorGroupElement {
        TorGroupElement {
            v: self.v.iter().map(|x| x.mul_int(&BigInt::from(j))).collect(),
            lattice_gens: self.lattice_gens.clone(),
        }
    }

    pub fn embed(&self) -> Result<(Vec<ComplexF>, Vec<Vec<ComplexF>>), ArithError> {
        let v = self.v.iter().map(|x| x.embed()).collect::<Result<Vec<_>, _>>()?;
        let gens = self
            .lattice_gens
            .iter()
            .map(|w| w.iter().map(|x| x.embed()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok((v, gens))
    }
}

/// Characteristic-cycle type of a singular fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleType {
    /// Closed cycle of k rational curves.
    Finite(BigUint),
    /// Unbounded chain; only the exact path may assert this.
    Infinite,
    /// Numeric search exhausted without a hit; not a claim of infinitude.
    UnknownUpTo(u64),
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleType::Finite(k) => write!(f, "I_{k}"),
            CycleType::Infinite => write!(f, "A_inf"),
            CycleType::UnknownUpTo(k) => write!(f, "unknown(k<={k})"),
        }
    }
}

impl Serialize for CycleType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        match self {
            CycleType::Finite(k) => {
                map.serialize_entry("kind", "finite")?;
                map.serialize_entry("order", &k.to_string())?;
            }
            CycleType::Infinite => {
                map.serialize_entry("kind", "infinite")?;
            }
            CycleType::UnknownUpTo(k) => {
                map.serialize_entry("kind", "unknown")?;
                map.serialize_entry("searched_up_to", k)?;
            }
        }
        map.end()
    }
}

/// Proof object accompanying an exact verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderCertificate {
    /// u = (k, m_1..m_dim, r_1..r_dim) with system * u = 0 and u[0] = k,
    /// i.e. k*v = sum(m_i w_i) + r.
    Relation { relation: IntVec },
    /// Basis of the full solution lattice; its k-row is identically zero,
    /// so no positive k admits a relation.
    Kernel { kernel: IntMat },
}

impl Serialize for OrderCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1))?;
        match self {
            OrderCertificate::Relation { relation } => {
                let decimal: Vec<String> = relation.iter().map(|x| x.to_string()).collect();
                map.serialize_entry("relation", &decimal)?;
            }
            OrderCertificate::Kernel { kernel } => {
                map.serialize_entry("kernel", kernel)?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactOrder {
    pub cycle_type: CycleType,
    /// Integer relation system A with A * (k, m, r) = 0 encoding
    /// k*v - sum(m_i w_i) - r = 0 over the field's Q-basis.
    pub system: IntMat,
    pub certificate: OrderCertificate,
}

impl ExactOrder {
    /// Re-checks the certificate against the stored system.
    pub fn certificate_holds(&self) -> bool {
        match &self.certificate {
            OrderCertificate::Relation { relation } => {
                relation.first().map_or(false, |k| k.is_positive())
                    && self.system.mul_vec(relation).iter().all(|x| x.is_zero())
            }
            OrderCertificate::Kernel { kernel } => {
                self.system.mul(kernel).is_zero()
                    && (0..kernel.cols()).all(|j| kernel[(0, j)].is_zero())
            }
        }
    }
}

fn component(x: &FieldElement, beta: usize) -> Rational {
    let (a, b, c, e) = x.decompose();
    match beta {
        0 => a.clone(),
        1 => b.clone(),
        2 => c.clone(),
        _ => e.clone(),
    }
}

/// Integer matrix A over unknowns (k, m_1..m_dim, r_1..r_dim): one row per
/// coordinate and per Q-basis component, denominators cleared row by row.
pub fn relation_system(el: &TorGroupElement) -> IntMat {
    let dim = el.dim();
    let unknowns = 1 + 2 * dim;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(4 * dim);
    for j in 0..dim {
        for beta in 0..4 {
            let mut rational_row = vec![Rational::zero(); unknowns];
            rational_row[0] = component(&el.v[j], beta);
            for (i, w) in el.lattice_gens.iter().enumerate() {
                rational_row[1 + i] = -component(&w[j], beta);
            }
            if beta == 0 {
                rational_row[1 + dim + j] = -Rational::one();
            }
            let lcm = rational_row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            rows.push(
                rational_row
                    .iter()
                    .map(|x| x.numer() * (&lcm / x.denom()))
                    .collect(),
            );
        }
    }
    IntMat::from_rows(rows)
}

/// Minimal k > 0 with k*v in Z^dim + span_Z(w_i), or proof that none exists.
/// The achievable k form a subgroup c*Z of Z (the projection of the solution
/// lattice), so the verdict is the gcd of the kernel's k-row.
pub fn order_exact(el: &TorGroupElement) -> ExactOrder {
    let system = relation_system(el);
    let sol = kernel(&system);
    let k_row: IntVec = (0..sol.cols()).map(|j| sol[(0, j)].clone()).collect();
    let (g, coeffs) = ext_gcd_vec(&k_row);
    if g.is_zero() {
        ExactOrder {
            cycle_type: CycleType::Infinite,
            system,
            certificate: OrderCertificate::Kernel { kernel: sol },
        }
    } else {
        let relation = sol.mul_vec(&coeffs);
        ExactOrder {
            cycle_type: CycleType::Finite(g.to_biguint().expect("gcd is positive")),
            system,
            certificate: OrderCertificate::Relation { relation },
        }
    }
}

/// Twist data of the fiber over b: v is the last Hessian row (off-corner
/// entries), the lattice generators are the other rows, all exact.
pub fn tor_element_at(spec: &PotentialSpec, b: &[FieldElement]) -> Result<TorGroupElement, CycleError> {
    if b.len() != spec.n {
        return Err(CycleError::WrongArity { expected: spec.n, got: b.len() });
    }
    if !b[spec.n - 1].is_zero() {
        return Err(CycleError::NotOnDiscriminant);
    }
    let h = hessian(&spec.psi);
    let dim = spec.n - 1;
    let v = (0..dim)
        .map(|j| h[dim][j].eval_exact(b))
        .collect::<Result<Vec<_>, _>>()?;
    let gens = (0..dim)
        .map(|i| (0..dim).map(|j| h[i][j].eval_exact(b)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    TorGroupElement::new(v, gens)
}

/// Finite order at a discriminant point of the shifted-cubic family is
/// equivalent to the first coordinate being a Gaussian rational; this is the
/// closed-form shortcut the exact classifier is cross-checked against.
pub fn rationality_criterion(z1: &FieldElement) -> bool {
    z1.is_gaussian()
}

#[derive(Debug)]
pub struct ScanRow {
    pub point: Vec<FieldElement>,
    pub outcome: Result<ExactOrder, CycleError>,
}

/// Classifies each sample; samples must sit on the discriminant inside the
/// polydisk. Per-point failures are recorded, not fatal.
pub fn scan_discriminant(spec: &PotentialSpec, samples: &[Vec<FieldElement>]) -> Vec<ScanRow> {
    samples
        .par_iter()
        .map(|point| {
            let outcome = if !spec.contains_point(point) {
                Err(CycleError::OutsidePolydisk)
            } else {
                tor_element_at(spec, point).map(|el| order_exact(&el))
            };
            ScanRow { point: point.clone(), outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FieldContext;
    use crate::presets;

    fn element(v: &[&str], gens: &[&[&str]], d: u64) -> TorGroupElement {
        let ctx = FieldContext::new(d).unwrap();
        TorGroupElement::new(
            v.iter().map(|s| ctx.parse(s).unwrap()).collect(),
            gens.iter()
                .map(|w| w.iter().map(|s| ctx.parse(s).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn reciprocal_twist_has_denominator_order() {
        for k in [1u64, 2, 7, 50] {
            let el = element(&[&format!("1/{k}")], &[&[&format!("1/{k} + 5*i")]], 1);
            let out = order_exact(&el);
            assert_eq!(out.cycle_type, CycleType::Finite(BigUint::from(k)));
            assert!(out.certificate_holds());
        }
    }

    #[test]
    fn sqrt_two_twist_is_infinite() {
        // against w = i the solution lattice is trivial: every unknown is
        // pinned to zero, the strongest possible refusal
        let el = element(&["sqrt(2)"], &[&["i"]], 2);
        let out = order_exact(&el);
        assert_eq!(out.cycle_type, CycleType::Infinite);
        assert!(out.certificate_holds());
        assert!(matches!(&out.certificate, OrderCertificate::Kernel { kernel } if kernel.cols() == 0));

        // against w = 1/3 relations among (m, r) survive, but none touch k
        let dense = element(&["sqrt(2)"], &[&["1/3"]], 2);
        let out = order_exact(&dense);
        assert_eq!(out.cycle_type, CycleType::Infinite);
        assert!(out.certificate_holds());
        match &out.certificate {
            OrderCertificate::Kernel { kernel } => {
                assert!(kernel.cols() > 0);
                assert!((0..kernel.cols()).all(|j| kernel[(0, j)].is_zero()));
            }
            other => panic!("expected kernel certificate, got {other:?}"),
        }
    }

    #[test]
    fn identity_twist_is_trivial() {
        let el = element(&["0"], &[&["1/3 + 5*i"]], 1);
        assert_eq!(order_exact(&el).cycle_type, CycleType::Finite(BigUint::one()));
    }

    #[test]
    fn order_divides_under_twist_scaling() {
        let el = element(&["1/12"], &[&["1/12 + 5*i"]], 1);
        assert_eq!(order_exact(&el).cycle_type, CycleType::Finite(BigUint::from(12u32)));
        for j in 1i64..=12 {
            let expected = 12 / 12u64.gcd(&(j as u64));
            assert_eq!(
                order_exact(&el.scaled(j)).cycle_type,
                CycleType::Finite(BigUint::from(expected)),
                "scaling by {j}"
            );
        }
    }

    #[test]
    fn order_survives_unimodular_generator_change() {
        let el = element(
            &["1/5", "3/7"],
            &[&["1/5 + 5*i", "0"], &["1/3", "2 + i/2"]],
            1,
        );
        let before = order_exact(&el).cycle_type;
        // replace (w1, w2) by (w1 + 3 w2, w2), then swap
        let w1 = el.gens()[0].clone();
        let w2 = el.gens()[1].clone();
        let mixed: Vec<FieldElement> = w1
            .iter()
            .zip(&w2)
            .map(|(a, b)| a.checked_add(&b.mul_int(&BigInt::from(3))).unwrap())
            .collect();
        let transformed = TorGroupElement::new(el.twist().to_vec(), vec![w2, mixed]).unwrap();
        assert_eq!(order_exact(&transformed).cycle_type, before);
    }

    #[test]
    fn hessian_rows_feed_the_classifier() {
        let spec = presets::cubic();
        let ctx = spec.context();
        let b = [ctx.parse("1/7").unwrap(), ctx.parse("0").unwrap()];
        let el = tor_element_at(&spec, &b).unwrap();
        assert_eq!(el.twist()[0], ctx.parse("1/7").unwrap());
        assert_eq!(el.gens()[0][0], ctx.parse("1/7 + 5*i").unwrap());
        assert_eq!(order_exact(&el).cycle_type, CycleType::Finite(BigUint::from(7u32)));
        let off = [ctx.parse("1/7").unwrap(), ctx.parse("1/9").unwrap()];
        assert_eq!(tor_element_at(&spec, &off).unwrap_err(), CycleError::NotOnDiscriminant);
    }

    #[test]
    fn gaussian_criterion_matches_exact_verdict() {
        let ctx2 = FieldContext::new(2).unwrap();
        let finite = ctx2.parse("1/2 + i/3").unwrap();
        let infinite = ctx2.parse("1/2*sqrt(2)").unwrap();
        assert!(rationality_criterion(&finite));
        assert!(!rationality_criterion(&infinite));
        assert!(rationality_criterion(&FieldElement::zero()));
    }

    #[test]
    fn scan_reports_domain_violations_per_point() {
        let spec = presets::cubic();
        let ctx = spec.context();
        let zero = ctx.parse("0").unwrap();
        let samples = vec![
            vec![ctx.parse("1/3").unwrap(), zero.clone()],
            vec![ctx.parse("7/2").unwrap(), zero.clone()], // outside polydisk
            vec![ctx.parse("1/3").unwrap(), ctx.parse("1/3").unwrap()], // off discriminant
        ];
        let rows = scan_discriminant(&spec, &samples);
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows[0].outcome.as_ref().unwrap().cycle_type,
            CycleType::Finite(BigUint::from(3u32))
        );
        assert_eq!(*rows[1].outcome.as_ref().unwrap_err(), CycleError::OutsidePolydisk);
        assert_eq!(*rows[2].outcome.as_ref().unwrap_err(), CycleError::NotOnDiscriminant);
    }

    #[test]
    fn mixed_field_tags_rejected() {
        let ctx2 = FieldContext::new(2).unwrap();
        let ctx3 = FieldContext::new(3).unwrap();
        let err = TorGroupElement::new(
            vec![ctx2.parse("sqrt(2)").unwrap()],
            vec![vec![ctx3.parse("sqrt(3)").unwrap()]],
        )
        .unwrap_err();
        assert!(matches!(err, CycleError::Arith(ArithError::ContextMismatch { .. })));
    }
}
