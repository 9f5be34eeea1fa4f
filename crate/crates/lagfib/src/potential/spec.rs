//! Problem instances: a potential polynomial plus the data that turns it
//! into a fibration (shear multiplicity, coefficient field, polydisk radius).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::arith::{quad_sign, FieldContext, FieldElement, Rational};

use super::poly::Polynomial;
use super::PotentialError;

/// Everything needed to build and verify one fibration instance.
///
/// `epsilon` is the closed polydisk multiradius; positive definiteness of the
/// imaginary Hessian over that polydisk is a standing hypothesis checked by
/// `certify_domain`, not by the constructor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDoc", into = "SpecDoc")]
pub struct PotentialSpec {
    pub n: usize,
    pub ell: i64,
    pub d: u64,
    pub epsilon: Rational,
    pub psi: Polynomial,
}

impl PotentialSpec {
    pub fn new(n: usize, ell: i64, d: u64, epsilon: Rational, psi: Polynomial) -> Result<Self, PotentialError> {
        if n == 0 {
            return Err(PotentialError::WrongArity { expected: 1, got: 0 });
        }
        if ell < 1 {
            return Err(PotentialError::BadEll(ell));
        }
        if epsilon.is_zero() || epsilon.is_negative() {
            return Err(PotentialError::BadEpsilon(epsilon));
        }
        FieldContext::new(d)?;
        if psi.n_vars() != n {
            return Err(PotentialError::WrongArity { expected: n, got: psi.n_vars() });
        }
        for (_, coeff) in psi.terms() {
            if coeff.d() != 1 && coeff.d() != d {
                return Err(PotentialError::ForeignCoefficient { coeff_d: coeff.d(), spec_d: d });
            }
        }
        Ok(PotentialSpec { n, ell, d, epsilon, psi })
    }

    pub fn context(&self) -> FieldContext {
        FieldContext::new(self.d).expect("validated at construction")
    }

    /// Exact strict membership in the open polydisk |z_i| < epsilon.
    pub fn contains_point(&self, point: &[FieldElement]) -> bool {
        if point.len() != self.n {
            return false;
        }
        let eps_sq = &self.epsilon * &self.epsilon;
        point.iter().all(|z| {
            // |z|^2 = p + q sqrt(d); compare against eps^2 by exact sign
            let (p, q) = z.abs_sq_parts();
            quad_sign(&(p - eps_sq.clone()), &q, z.d()) == Ordering::Less
        })
    }

    pub fn from_json(text: &str) -> Result<Self, PotentialError> {
        serde_json::from_str(text).map_err(|e| PotentialError::Decode(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    n: usize,
    ell: i64,
    d: u64,
    epsilon: String,
    psi: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    exps: Vec<u32>,
    coeff: String,
}

impl TryFrom<SpecDoc> for PotentialSpec {
    type Error = PotentialError;

    fn try_from(doc: SpecDoc) -> Result<Self, PotentialError> {
        let epsilon: Rational = doc.epsilon.parse()?;
        let ctx = FieldContext::new(doc.d)?;
        let mut psi = Polynomial::zero(doc.n);
        for term in doc.psi {
            psi.add_term(term.exps, ctx.parse(&term.coeff)?)?;
        }
        PotentialSpec::new(doc.n, doc.ell, doc.d, epsilon, psi)
    }
}

impl From<PotentialSpec> for SpecDoc {
    fn from(spec: PotentialSpec) -> SpecDoc {
        SpecDoc {
            n: spec.n,
            ell: spec.ell,
            d: spec.d,
            epsilon: spec.epsilon.to_string(),
            psi: spec
                .psi
                .terms()
                .map(|(exps, coeff)| TermDoc { exps: exps.clone(), coeff: coeff.to_string() })
                .collect(),
        }
    }
}
