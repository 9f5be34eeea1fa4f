//! The five commands. Each returns a finished RunReport; main prints it to
//! stdout and turns its status into the exit code. Human-oriented summary
//! lines go to stderr so stdout stays machine-parseable.

use std::path::Path;

use lagfib::cycle::{order_exact, order_numeric, scan_discriminant, tor_element_at, CycleType};
use lagfib::potential::{
    certify_domain, closedness_check, closedness_check_matrix, evaluate_period,
    evaluate_period_exact, riemann_check, PotentialSpec, RiemannCheck, DEFAULT_PIVOT_TOL,
};
use lagfib::toroidal::{
    glued_invariants, omega_glue_residual, sample_total_point, singular_fiber, transition,
    verify_polarization, Direction, GluedAction, GroupElement, PolarizationCheck, SymplecticCheck,
    SymplecticWitness, DEFAULT_DRIFT_TOL, DEFAULT_FD_STEP, DEFAULT_GLUE_TOL,
};
use lagfib::{ComplexF, FieldElement, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::input::{
    grid_points, io_err, load_spec, parse_exact_point, parse_numeric_point, CliError, GridSpec,
    SpecDocument,
};
use crate::report::{RunReport, StageClock, Status};

fn complex_pair(z: &ComplexF) -> Value {
    json!([z.re, z.im])
}

fn complex_vec(zs: &[ComplexF]) -> Value {
    Value::Array(zs.iter().map(complex_pair).collect())
}

fn exact_vec(zs: &[FieldElement]) -> Value {
    Value::Array(zs.iter().map(|z| Value::String(z.to_string())).collect())
}

fn spec_err(e: impl std::fmt::Display) -> CliError {
    CliError::Spec(e.to_string())
}

pub fn cmd_check_domain(spec_path: &Path, grid: usize, tol: f64) -> Result<RunReport, CliError> {
    let doc = load_spec(spec_path)?;
    let mut clock = StageClock::start();
    let domain = certify_domain(&doc.spec, grid).map_err(|e| CliError::Usage(e.to_string()))?;
    clock.lap("certify");
    let pm = evaluate_period(&doc.spec, &domain.worst_point, 0).map_err(spec_err)?;
    let riemann = riemann_check(&pm, DEFAULT_PIVOT_TOL);
    clock.lap("riemann");

    let pivot_ok = domain.min_pivot > tol;
    let riemann_ok = riemann == RiemannCheck::Pass;
    let mut results = json!({
        "grid_per_axis": grid,
        "samples": domain.samples,
        "min_pivot": domain.min_pivot,
        "worst_point": complex_vec(&domain.worst_point),
        "pivot_threshold": tol,
        "riemann": if riemann_ok { "pass" } else { "fail" },
    });
    if let RiemannCheck::Fail(witness) = &riemann {
        results["riemann_witness"] = Value::String(format!("{witness:?}"));
    }
    let status = if pivot_ok && riemann_ok { Status::Ok } else { Status::Fail };
    if status == Status::Ok {
        eprintln!("domain: min pivot {} over {} samples", domain.min_pivot, domain.samples);
    } else {
        eprintln!(
            "domain violation: min pivot {} (threshold {tol}) at {:?}",
            domain.min_pivot, domain.worst_point
        );
    }
    Ok(RunReport::new("check-domain", doc.digest, status, results, clock.finish()))
}

pub fn cmd_classify(
    spec_path: &Path,
    point_text: &str,
    numeric: bool,
    k_max: u64,
    tol: f64,
) -> Result<RunReport, CliError> {
    let doc = load_spec(spec_path)?;
    let mut clock = StageClock::start();
    let (status, results) = if numeric {
        classify_numeric(&doc.spec, point_text, k_max, tol)?
    } else {
        classify_exact(&doc.spec, point_text)?
    };
    clock.lap("classify");
    Ok(RunReport::new("classify", doc.digest, status, results, clock.finish()))
}

fn classify_exact(spec: &PotentialSpec, point_text: &str) -> Result<(Status, Value), CliError> {
    let point = parse_exact_point(point_text, spec)?;
    match tor_element_at(spec, &point) {
        Ok(el) => {
            let order = order_exact(&el);
            eprintln!("cycle type {}", order.cycle_type);
            let verified = order.certificate_holds();
            let mut results = serde_json::to_value(&order).map_err(spec_err)?;
            results["mode"] = json!("exact");
            results["point"] = exact_vec(&point);
            results["certificate_verified"] = json!(verified);
            Ok((Status::Ok, results))
        }
        Err(e) => {
            eprintln!("classify failed: {e}");
            Ok((Status::Fail, json!({ "mode": "exact", "point": exact_vec(&point), "error": e.to_string() })))
        }
    }
}

fn classify_numeric(
    spec: &PotentialSpec,
    point_text: &str,
    k_max: u64,
    tol: f64,
) -> Result<(Status, Value), CliError> {
    let point = parse_numeric_point(point_text, spec)?;
    if point[spec.n - 1] != ComplexF::new(0.0, 0.0) {
        eprintln!("classify failed: point is not on the discriminant");
        return Ok((
            Status::Fail,
            json!({ "mode": "numeric", "point": complex_vec(&point), "error": "point is not on the discriminant" }),
        ));
    }
    let pm = evaluate_period(spec, &point, 0).map_err(spec_err)?;
    let dim = spec.n - 1;
    let v: Vec<ComplexF> = (0..dim).map(|j| pm.theta_tilde[dim][j]).collect();
    let gens: Vec<Vec<ComplexF>> =
        (0..dim).map(|i| (0..dim).map(|j| pm.theta_tilde[i][j]).collect()).collect();
    let verdict = order_numeric(&v, &gens, k_max, tol);
    eprintln!("cycle type {verdict} (numeric search)");
    Ok((
        Status::Ok,
        json!({
            "mode": "numeric",
            "point": complex_vec(&point),
            "k_max": k_max,
            "tol": tol,
            "cycle_type": serde_json::to_value(&verdict).map_err(spec_err)?,
        }),
    ))
}

pub fn cmd_scan(spec_path: &Path, grid_text: &str, out: &Path) -> Result<RunReport, CliError> {
    let doc = load_spec(spec_path)?;
    let grid: GridSpec = grid_text.parse()?;
    let points = grid_points(&grid, &doc.spec)?;
    let mut clock = StageClock::start();
    let rows = scan_discriminant(&doc.spec, &points);
    clock.lap("classify");

    let mut finite = 0usize;
    let mut infinite = 0usize;
    let mut errors = 0usize;
    for row in &rows {
        match &row.outcome {
            Ok(order) => match order.cycle_type {
                CycleType::Finite(_) => finite += 1,
                _ => infinite += 1,
            },
            Err(_) => errors += 1,
        }
    }

    let is_json = out.extension().is_some_and(|ext| ext == "json");
    if is_json {
        let payload: Vec<Value> = rows
            .iter()
            .map(|row| {
                let outcome = match &row.outcome {
                    Ok(order) => serde_json::to_value(order).map_err(spec_err)?,
                    Err(e) => json!({ "error": e.to_string() }),
                };
                Ok(json!({ "point": exact_vec(&row.point), "outcome": outcome }))
            })
            .collect::<Result<_, CliError>>()?;
        let text = serde_json::to_string_pretty(&payload).map_err(spec_err)?;
        std::fs::write(out, text).map_err(|e| io_err(out, e))?;
    } else {
        let mut writer = csv::Writer::from_path(out).map_err(|e| CliError::Spec(e.to_string()))?;
        writer
            .write_record(["z1", "re", "im", "status", "order"])
            .map_err(|e| CliError::Spec(e.to_string()))?;
        for row in &rows {
            let (re, im) = match row.point[0].embed() {
                Ok(z) => (z.re.to_string(), z.im.to_string()),
                Err(_) => (String::new(), String::new()),
            };
            let (status, order) = match &row.outcome {
                Ok(order) => match &order.cycle_type {
                    CycleType::Finite(k) => ("finite".to_string(), k.to_string()),
                    _ => ("infinite".to_string(), String::new()),
                },
                Err(e) => (format!("error: {e}"), String::new()),
            };
            writer
                .write_record([row.point[0].to_string(), re, im, status, order])
                .map_err(|e| CliError::Spec(e.to_string()))?;
        }
        writer.flush().map_err(|e| io_err(out, e))?;
    }
    clock.lap("write");

    eprintln!(
        "scan: {} points, {finite} finite, {infinite} infinite, {errors} errors -> {}",
        rows.len(),
        out.display()
    );
    let status = if errors == 0 { Status::Ok } else { Status::Fail };
    let results = json!({
        "grid": grid.to_string(),
        "rows": rows.len(),
        "finite": finite,
        "infinite": infinite,
        "errors": errors,
        "out": out.display().to_string(),
    });
    Ok(RunReport::new("scan", doc.digest, status, results, clock.finish()))
}

pub const ALL_CHECKS: [&str; 6] =
    ["charts", "omega-glue", "action-group-law", "symplectic", "polarization", "closedness"];

pub fn cmd_verify(
    spec_path: &Path,
    checks_arg: Option<&str>,
    seed: u64,
    samples: usize,
    gamma_bound: i64,
) -> Result<RunReport, CliError> {
    let doc = load_spec(spec_path)?;
    let selected: Vec<&str> = match checks_arg {
        None => ALL_CHECKS.to_vec(),
        Some(list) => {
            let picked: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if picked.is_empty() {
                return Err(CliError::Usage("no checks selected".into()));
            }
            for name in &picked {
                if !ALL_CHECKS.contains(name) {
                    return Err(CliError::Usage(format!(
                        "unknown check {name:?}; available: {}",
                        ALL_CHECKS.join(", ")
                    )));
                }
            }
            picked
        }
    };
    let radius = doc.spec.epsilon.to_f64_nearest().map_err(spec_err)? * 0.95;
    let mut clock = StageClock::start();
    let mut results = serde_json::Map::new();
    let mut all_pass = true;
    for name in &selected {
        let outcome = match *name {
            "charts" => check_charts(&doc.spec, seed, samples, radius),
            "omega-glue" => check_glue(&doc.spec, seed, samples, radius)?,
            "action-group-law" => check_group_law(&doc, seed, samples, radius)?,
            "symplectic" => check_symplectic(&doc, seed, samples, gamma_bound, radius)?,
            "polarization" => check_polarization(&doc.spec)?,
            "closedness" => {
                let ok = match &doc.theta_override {
                    Some(matrix) => closedness_check_matrix(matrix),
                    None => closedness_check(&doc.spec.psi),
                };
                json!({ "status": if ok { "pass" } else { "fail" } })
            }
            _ => unreachable!("validated above"),
        };
        let pass = outcome["status"] == "pass";
        all_pass &= pass;
        eprintln!("check {name}: {}", if pass { "pass" } else { "FAIL" });
        results.insert(name.to_string(), outcome);
        clock.lap(name);
    }
    let status = if all_pass { Status::Ok } else { Status::Fail };
    Ok(RunReport::new("verify", doc.digest, status, Value::Object(results), clock.finish()))
}

fn check_charts(spec: &PotentialSpec, seed: u64, samples: usize, radius: f64) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hops = 10;
    let mut max_drift = 0.0f64;
    for _ in 0..samples {
        let start = sample_total_point(&mut rng, spec.n, radius).chart;
        let (z0, w0) = glued_invariants(&start).expect("sampled off the axes");
        let mut p = start;
        for hop in 0i64..hops {
            let dir = if (hop + p.k).rem_euclid(3) == 0 { Direction::Down } else { Direction::Up };
            p = transition(&p, dir).expect("walk stays off the axes");
            let (z, w) = glued_invariants(&p).expect("walk stays off the axes");
            max_drift = max_drift
                .max((z - z0).norm() / z0.norm())
                .max((w - w0).norm() / w0.norm());
        }
    }
    let pass = max_drift <= DEFAULT_DRIFT_TOL;
    json!({
        "status": if pass { "pass" } else { "fail" },
        "samples": samples,
        "hops": hops,
        "max_drift": max_drift,
        "tolerance": DEFAULT_DRIFT_TOL,
    })
}

fn check_glue(spec: &PotentialSpec, seed: u64, samples: usize, radius: f64) -> Result<Value, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let chart = sample_total_point(&mut rng, spec.n, radius).chart;
        let residual = omega_glue_residual(&chart, DEFAULT_FD_STEP).map_err(spec_err)?;
        max_residual = max_residual.max(residual);
    }
    let pass = max_residual <= DEFAULT_GLUE_TOL;
    Ok(json!({
        "status": if pass { "pass" } else { "fail" },
        "samples": samples,
        "max_residual": max_residual,
        "tolerance": DEFAULT_GLUE_TOL,
    }))
}

fn action_for(doc: &SpecDocument) -> Result<GluedAction, CliError> {
    match &doc.theta_override {
        Some(matrix) => GluedAction::from_matrix(matrix.clone(), doc.spec.ell).map_err(spec_err),
        None => GluedAction::new(&doc.spec).map_err(spec_err),
    }
}

fn check_group_law(doc: &SpecDocument, seed: u64, samples: usize, radius: f64) -> Result<Value, CliError> {
    let action = action_for(doc)?;
    let dim = doc.spec.n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_gap = 0.0f64;
    for _ in 0..samples {
        let p = sample_total_point(&mut rng, doc.spec.n, radius);
        let draw = |rng: &mut ChaCha8Rng| {
            GroupElement::new((0..dim).map(|_| rng.gen_range(-2..=2)).collect(), rng.gen_range(-2..=2))
        };
        let g1 = draw(&mut rng);
        let g2 = draw(&mut rng);
        let composite = action
            .apply(&g1.compose(&g2).map_err(spec_err)?, &p)
            .map_err(spec_err)?;
        let stepped = action
            .apply(&g2, &action.apply(&g1, &p).map_err(spec_err)?)
            .map_err(spec_err)?;
        if composite.chart.k != stepped.chart.k {
            return Ok(json!({ "status": "fail", "witness": "chart index mismatch" }));
        }
        let pairs = composite
            .w
            .iter()
            .zip(&stepped.w)
            .chain([(&composite.chart.x, &stepped.chart.x), (&composite.chart.y, &stepped.chart.y)]);
        for (a, b) in pairs {
            max_gap = max_gap.max((a - b).norm() / b.norm().max(1.0));
        }
    }
    let tolerance = 1e-10;
    let pass = max_gap <= tolerance;
    Ok(json!({
        "status": if pass { "pass" } else { "fail" },
        "samples": samples,
        "max_gap": max_gap,
        "tolerance": tolerance,
    }))
}

/// Lattice elements with every entry in [-bound, bound].
fn gamma_box(dim: usize, bound: i64) -> Result<Vec<GroupElement>, CliError> {
    let side = 2 * bound as u128 + 1;
    let total = side.checked_pow(dim as u32 + 1).filter(|&t| t <= 100_000).ok_or_else(|| {
        CliError::Usage(format!("gamma sweep of bound {bound} in dimension {dim} is too large"))
    })?;
    let mut out = Vec::with_capacity(total as usize);
    let mut odometer = vec![-bound; dim + 1];
    loop {
        out.push(GroupElement::new(odometer[..dim].to_vec(), odometer[dim]));
        let mut i = 0;
        loop {
            if i > dim {
                return Ok(out);
            }
            odometer[i] += 1;
            if odometer[i] <= bound {
                break;
            }
            odometer[i] = -bound;
            i += 1;
        }
    }
}

fn witness_value(witness: &SymplecticWitness, gamma: &GroupElement) -> Value {
    match witness {
        SymplecticWitness::MixedPartials { i, k } => json!({
            "kind": "mixed-partials", "i": i, "k": k,
            "gamma": { "j": gamma.j, "m": gamma.m },
        }),
        SymplecticWitness::PullbackResidual { sample, residual } => json!({
            "kind": "pullback-residual", "sample": sample, "residual": residual,
            "gamma": { "j": gamma.j, "m": gamma.m },
        }),
    }
}

fn check_symplectic(
    doc: &SpecDocument,
    seed: u64,
    samples: usize,
    gamma_bound: i64,
    radius: f64,
) -> Result<Value, CliError> {
    let action = action_for(doc)?;
    let dim = doc.spec.n - 1;
    let sweep = gamma_box(dim, gamma_bound)?;
    // exact identity for the whole box, then the numeric pullback for one
    // representative; the exact half is what distinguishes a Hessian
    for gamma in &sweep {
        if let SymplecticCheck::Fail(witness) = action.verify(gamma, 0, seed, radius).map_err(spec_err)? {
            return Ok(json!({ "status": "fail", "witness": witness_value(&witness, gamma) }));
        }
    }
    let probe = GroupElement::new(vec![1; dim], 1);
    if let SymplecticCheck::Fail(witness) =
        action.verify(&probe, samples, seed, radius).map_err(spec_err)?
    {
        return Ok(json!({ "status": "fail", "witness": witness_value(&witness, &probe) }));
    }
    Ok(json!({
        "status": "pass",
        "gamma_bound": gamma_bound,
        "gamma_count": sweep.len(),
        "samples": samples,
    }))
}

fn check_polarization(spec: &PotentialSpec) -> Result<Value, CliError> {
    let own = verify_polarization(spec.n, spec.ell).map_err(spec_err)?;
    let mut sweep_ok = true;
    for n in 1..=6 {
        for ell in 1..=10 {
            sweep_ok &= verify_polarization(n, ell).map_err(spec_err)? == PolarizationCheck::ExactPass;
        }
    }
    // winding bookkeeping: one extra turn around the discriminant adds
    // exactly ell to the corner entry
    let ctx = spec.context();
    let half = ctx.from_rational(spec.epsilon.clone() * Rational::ratio(1, 2));
    let point = vec![half; spec.n];
    let base = evaluate_period_exact(spec, &point, 0).map_err(spec_err)?;
    let next = evaluate_period_exact(spec, &point, 1).map_err(spec_err)?;
    let shift_ok = next.winding() - base.winding() == spec.ell;
    let pass = own == PolarizationCheck::ExactPass && sweep_ok && shift_ok;
    Ok(json!({
        "status": if pass { "pass" } else { "fail" },
        "instance": if own == PolarizationCheck::ExactPass { "pass" } else { "fail" },
        "sweep": if sweep_ok { "pass" } else { "fail" },
        "branch_shift": if shift_ok { "pass" } else { "fail" },
    }))
}

pub fn cmd_fiber(
    spec_path: &Path,
    point_text: &str,
    out: Option<&Path>,
) -> Result<RunReport, CliError> {
    let doc = load_spec(spec_path)?;
    let point = parse_exact_point(point_text, &doc.spec)?;
    let mut clock = StageClock::start();
    let (status, results) = match singular_fiber(&doc.spec, &point) {
        Ok(desc) => {
            let fiber = serde_json::to_value(&desc).map_err(spec_err)?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&fiber).map_err(spec_err)?;
                std::fs::write(path, text).map_err(|e| io_err(path, e))?;
            }
            eprintln!(
                "fiber: {} component(s), cycle type {}, extrapolated={}",
                desc.components, desc.cycle_type, desc.extrapolated
            );
            let mut results = json!({ "point": exact_vec(&point), "fiber": fiber });
            if let Some(path) = out {
                results["out"] = Value::String(path.display().to_string());
            }
            (Status::Ok, results)
        }
        Err(e) => {
            eprintln!("fiber failed: {e}");
            (Status::Fail, json!({ "point": exact_vec(&point), "error": e.to_string() }))
        }
    };
    clock.lap("fiber");
    Ok(RunReport::new("fiber", doc.digest, status, results, clock.finish()))
}
