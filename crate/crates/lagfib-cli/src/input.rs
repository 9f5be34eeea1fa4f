//! Input handling: spec documents, exact point syntax, and scan grids.
//!
//! A spec document is the instance JSON, optionally extended with a
//! "theta_override" matrix of polynomial entries. The override replaces the
//! Hessian in the symplectic and closedness checks, which is the supported
//! way to feed the verifier a matrix that is not a Hessian and watch it
//! refuse. The instance parser rejects unknown fields, so the override is
//! stripped here before the rest of the document reaches it.

use std::fmt;
use std::fs;
use std::path::Path;

use lagfib::potential::{Polynomial, PotentialSpec};
use lagfib::{ComplexF, FieldElement, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Anything that prevents a command from running at all; exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("spec error: {0}")]
    Spec(String),
    #[error("{0}")]
    Usage(String),
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

pub struct SpecDocument {
    pub spec: PotentialSpec,
    pub theta_override: Option<Vec<Vec<Polynomial>>>,
    /// Content hash of the file bytes, stable across runs.
    pub digest: String,
}

#[derive(Deserialize)]
struct TermDoc {
    exps: Vec<u32>,
    coeff: String,
}

pub fn load_spec(path: &Path) -> Result<SpecDocument, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let digest = format!("sha256:{:x}", Sha256::digest(&bytes));
    let mut doc: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Spec(e.to_string()))?;
    let override_doc = doc.as_object_mut().and_then(|m| m.remove("theta_override"));
    let spec = PotentialSpec::from_json(&doc.to_string()).map_err(|e| CliError::Spec(e.to_string()))?;
    let theta_override = override_doc.map(|v| parse_theta(v, &spec)).transpose()?;
    Ok(SpecDocument { spec, theta_override, digest })
}

fn parse_theta(doc: serde_json::Value, spec: &PotentialSpec) -> Result<Vec<Vec<Polynomial>>, CliError> {
    let rows: Vec<Vec<Vec<TermDoc>>> =
        serde_json::from_value(doc).map_err(|e| CliError::Spec(format!("theta_override: {e}")))?;
    if rows.len() != spec.n || rows.iter().any(|r| r.len() != spec.n) {
        return Err(CliError::Spec(format!("theta_override must be {0} x {0}", spec.n)));
    }
    let ctx = spec.context();
    rows.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|terms| {
                    let mut p = Polynomial::zero(spec.n);
                    for term in terms {
                        let coeff = ctx
                            .parse(&term.coeff)
                            .map_err(|e| CliError::Spec(format!("theta_override: {e}")))?;
                        p.add_term(term.exps, coeff)
                            .map_err(|e| CliError::Spec(format!("theta_override: {e}")))?;
                    }
                    Ok(p)
                })
                .collect()
        })
        .collect()
}

fn coord_index(name: &str, n: usize) -> Result<usize, CliError> {
    let k: usize = name
        .strip_prefix('z')
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("expected a coordinate like z1, got {name:?}")))?;
    if k == 0 || k > n {
        return Err(CliError::Usage(format!("no coordinate {name} in a {n}-variable instance")));
    }
    Ok(k - 1)
}

fn assignments(text: &str) -> impl Iterator<Item = Result<(&str, &str), CliError>> {
    text.split(',').filter(|part| !part.trim().is_empty()).map(|part| {
        part.split_once('=')
            .map(|(name, expr)| (name.trim(), expr.trim()))
            .ok_or_else(|| CliError::Usage(format!("expected zK=<value>, got {part:?}")))
    })
}

/// Comma-separated exact assignments like "z1=1/7, z2=i/2"; coordinates not
/// mentioned default to zero.
pub fn parse_exact_point(text: &str, spec: &PotentialSpec) -> Result<Vec<FieldElement>, CliError> {
    let ctx = spec.context();
    let mut point = vec![FieldElement::zero(); spec.n];
    let mut seen = vec![false; spec.n];
    for assignment in assignments(text) {
        let (name, expr) = assignment?;
        let idx = coord_index(name, spec.n)?;
        if seen[idx] {
            return Err(CliError::Usage(format!("coordinate {name} assigned twice")));
        }
        seen[idx] = true;
        point[idx] = ctx
            .parse(expr)
            .map_err(|e| CliError::Usage(format!("value for {name}: {e}")))?;
    }
    Ok(point)
}

/// Same syntax with floating-point values; exact text is accepted as a
/// fallback and embedded.
pub fn parse_numeric_point(text: &str, spec: &PotentialSpec) -> Result<Vec<ComplexF>, CliError> {
    let ctx = spec.context();
    let mut point = vec![ComplexF::new(0.0, 0.0); spec.n];
    let mut seen = vec![false; spec.n];
    for assignment in assignments(text) {
        let (name, expr) = assignment?;
        let idx = coord_index(name, spec.n)?;
        if seen[idx] {
            return Err(CliError::Usage(format!("coordinate {name} assigned twice")));
        }
        seen[idx] = true;
        point[idx] = if let Ok(v) = expr.parse::<f64>() {
            ComplexF::new(v, 0.0)
        } else {
            ctx.parse(expr)
                .and_then(|v| v.embed())
                .map_err(|e| CliError::Usage(format!("value for {name}: {e}")))?
        };
    }
    Ok(point)
}

/// Scan grids on the z1-axis of the discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSpec {
    /// All reduced rationals p/q with q <= q_max inside the polydisk,
    /// including 0.
    RationalDenom { q_max: u64 },
    /// The same grid scaled by sqrt(2), excluding 0.
    Sqrt2Denom { q_max: u64 },
    /// Explicit values, parsed in the instance's field.
    List(Vec<String>),
}

impl std::str::FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("list:") {
            let values = rest
                .split(';')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(str::to_string)
                .collect();
            return Ok(GridSpec::List(values));
        }
        let (scaled, body) = match s.strip_prefix("sqrt2:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let q_max = body
            .strip_prefix("q<=")
            .and_then(|v| v.trim().parse::<u64>().ok())
            .filter(|&q| q >= 1)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "grid spec {s:?} not understood; use \"q<=N\", \"sqrt2:q<=N\" or \"list:v1;v2\""
                ))
            })?;
        Ok(if scaled { GridSpec::Sqrt2Denom { q_max } } else { GridSpec::RationalDenom { q_max } })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::RationalDenom { q_max } => write!(f, "q<={q_max}"),
            GridSpec::Sqrt2Denom { q_max } => write!(f, "sqrt2:q<={q_max}"),
            GridSpec::List(values) => write!(f, "list:{}", values.join(";")),
        }
    }
}

/// Reduced fractions p/q, q <= q_max, that satisfy the strict bound
/// |p/q| * scale < epsilon, where scale^2 = scale_sq. Ordered by (q, |p|),
/// negative before positive.
fn denominator_sweep(q_max: u64, epsilon: &Rational, scale_sq: u64, include_zero: bool) -> Vec<Rational> {
    let a = epsilon.numer();
    let b = epsilon.denom();
    let mut out = Vec::new();
    if include_zero {
        out.push(Rational::from_int(0));
    }
    for q in 1..=q_max {
        let rhs = (a * a) * (BigInt::from(q) * BigInt::from(q));
        for p in 1..=u64::MAX {
            // p^2 * scale_sq * b^2 < a^2 * q^2, exactly
            let lhs = BigInt::from(p) * BigInt::from(p) * BigInt::from(scale_sq) * (b * b);
            if lhs >= rhs {
                break;
            }
            if p.gcd(&q) != 1 {
                continue;
            }
            let value = Rational::new(p.into(), q.into()).expect("q positive");
            out.push(-&value);
            out.push(value);
        }
    }
    out
}

/// Discriminant sample points (z1, 0, ..., 0) for a grid spec.
pub fn grid_points(grid: &GridSpec, spec: &PotentialSpec) -> Result<Vec<Vec<FieldElement>>, CliError> {
    let axis_values: Vec<FieldElement> = match grid {
        GridSpec::RationalDenom { q_max } => denominator_sweep(*q_max, &spec.epsilon, 1, true)
            .into_iter()
            .map(FieldElement::from_rational)
            .collect(),
        GridSpec::Sqrt2Denom { q_max } => {
            let ctx = lagfib::FieldContext::new(2).expect("2 is square-free");
            denominator_sweep(*q_max, &spec.epsilon, 2, false)
                .into_iter()
                .map(|r| {
                    ctx.from_rational(r)
                        .checked_mul(&ctx.sqrt_d())
                        .expect("scaling by sqrt(2) stays in the field")
                })
                .collect()
        }
        GridSpec::List(values) => {
            let ctx = spec.context();
            values
                .iter()
                .map(|v| ctx.parse(v).map_err(|e| CliError::Usage(format!("grid value {v:?}: {e}"))))
                .collect::<Result<_, _>>()?
        }
    };
    Ok(axis_values
        .into_iter()
        .map(|v| {
            let mut point = vec![FieldElement::zero(); spec.n];
            point[0] = v;
            point
        })
        .collect())
}
