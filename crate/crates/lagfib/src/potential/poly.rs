//! Multivariate polynomials with coefficients in Q(sqrt(d), i), plus the
//! numeric shadow used for grid evaluation.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::arith::{ArithError, ComplexF, FieldElement};

use super::PotentialError;

/// Sparse polynomial; zero coefficients are never stored, so structural
/// equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial { n_vars, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(n_vars: usize, terms: I) -> Result<Self, PotentialError>
    where
        I: IntoIterator<Item = (Vec<u32>, FieldElement)>,
    {
        let mut p = Polynomial::zero(n_vars);
        for (exps, coeff) in terms {
            p.add_term(exps, coeff)?;
        }
        Ok(p)
    }

    /// Adds coeff * z^exps, merging with an existing term if present.
    pub fn add_term(&mut self, exps: Vec<u32>, coeff: FieldElement) -> Result<(), PotentialError> {
        if exps.len() != self.n_vars {
            return Err(PotentialError::WrongArity { expected: self.n_vars, got: exps.len() });
        }
        let merged = match self.terms.get(&exps) {
            Some(old) => old.checked_add(&coeff)?,
            None => coeff,
        };
        if merged.is_zero() {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, merged);
        }
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElement)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// d/dz_i, exact.
    pub fn partial(&self, i: usize) -> Polynomial {
        assert!(i < self.n_vars, "variable index out of range");
        let mut out = Polynomial::zero(self.n_vars);
        for (exps, coeff) in &self.terms {
            let e = exps[i];
            if e == 0 {
                continue;
            }
            let mut lowered = exps.clone();
            lowered[i] = e - 1;
            let scaled = coeff.mul_int(&BigInt::from(e));
            // distinct source exponents stay distinct after lowering one slot
            out.terms.insert(lowered, scaled);
        }
        out
    }

    pub fn eval_exact(&self, point: &[FieldElement]) -> Result<FieldElement, ArithError> {
        assert_eq!(point.len(), self.n_vars, "point arity");
        let mut acc = FieldElement::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (z, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = term.checked_mul(&z.powi(e as i64)?)?;
                }
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }

    /// Numeric copy with coefficients embedded once; use this when a
    /// polynomial is evaluated at many floating points.
    pub fn embed(&self) -> Result<EmbeddedPoly, ArithError> {
        let terms = self
            .terms
            .iter()
            .map(|(exps, coeff)| Ok((exps.clone(), coeff.embed()?)))
            .collect::<Result<Vec<_>, ArithError>>()?;
        Ok(EmbeddedPoly { n_vars: self.n_vars, terms })
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddedPoly {
    n_vars: usize,
    terms: Vec<(Vec<u32>, ComplexF)>,
}

impl EmbeddedPoly {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn eval(&self, point: &[ComplexF]) -> ComplexF {
        assert_eq!(point.len(), self.n_vars, "point arity");
        let mut acc = ComplexF::new(0.0, 0.0);
        for (exps, coeff) in &self.terms {
            let mut term = *coeff;
            for (z, &e) in point.iter().zip(exps) {
                for _ in 0..e {
                    term *= z;
                }
            }
            acc += term;
        }
        acc
    }
}

/// Matrix of second partials, computed in both orders and checked equal
/// before returning; symmetry is a property of the engine, not an assumption.
pub fn hessian(psi: &Polynomial) -> Vec<Vec<Polynomial>> {
    let n = psi.n_vars();
    let firsts: Vec<Polynomial> = (0..n).map(|i| psi.partial(i)).collect();
    let mut out = vec![vec![Polynomial::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let ij = firsts[i].partial(j);
            let ji = firsts[j].partial(i);
            assert_eq!(ij, ji, "mixed partials disagree");
            out[i][j] = ij;
        }
    }
    out
}

/// Third-partial symmetry d(m[i][j])/dz_k = d(m[i][k])/dz_j for all i, j, k.
/// True for every Hessian; the raw matrix entry point exists so corrupted
/// inputs can be shown to fail.
pub fn closedness_check_matrix(m: &[Vec<Polynomial>]) -> bool {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return false;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if m[i][j].partial(k) != m[i][k].partial(j) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn closedness_check(psi: &Polynomial) -> bool {
    closedness_check_matrix(&hessian(psi))
}
