//! Rates the analytic Jacobian of the lattice action against central
//! differences at two step sizes. Central differences are second order, so
//! halving the step must cut the disagreement by about four unless both
//! readings already sit on the roundoff floor.

use lagfib::presets;
use lagfib::toroidal::{sample_total_point, GluedAction, GroupElement, TotalPoint};
use lagfib::ComplexF;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flatten(t: &TotalPoint) -> Vec<ComplexF> {
    let mut v = t.z.clone();
    v.extend_from_slice(&t.w);
    v.push(t.chart.x);
    v.push(t.chart.y);
    v
}

fn worst_relative_error(action: &GluedAction, gamma: &GroupElement, p: &TotalPoint, h: f64) -> f64 {
    let jac = action.jacobian(gamma, p).unwrap();
    let dim = jac.len();
    let n1 = p.z.len();
    let mut worst = 0.0f64;
    for col in 0..dim {
        let image_at = |delta: f64| {
            let mut q = p.clone();
            if col < n1 {
                q.z[col] += delta;
            } else if col < 2 * n1 {
                q.w[col - n1] += delta;
            } else if col == 2 * n1 {
                q.chart.x += delta;
            } else {
                q.chart.y += delta;
            }
            flatten(&action.apply(gamma, &q).unwrap())
        };
        let plus = image_at(h);
        let minus = image_at(-h);
        for row in 0..dim {
            let fd = (plus[row] - minus[row]) / ComplexF::new(2.0 * h, 0.0);
            let err = (fd - jac[row][col]).norm() / (1.0 + jac[row][col].norm());
            worst = worst.max(err);
        }
    }
    worst
}

#[test]
fn central_differences_converge_at_second_order() {
    let spec = presets::cubic();
    let action = GluedAction::new(&spec).unwrap();
    let gamma = GroupElement::new(vec![1], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut rated = 0;
    for _ in 0..8 {
        let p = sample_total_point(&mut rng, 2, 0.8);
        let coarse = worst_relative_error(&action, &gamma, &p, 1e-3);
        let fine = worst_relative_error(&action, &gamma, &p, 5e-4);
        if coarse < 1e-12 && fine < 1e-12 {
            continue;
        }
        let order = (coarse / fine).log2();
        assert!(order >= 1.9, "observed order {order} (errors {coarse} vs {fine})");
        rated += 1;
    }
    assert!(rated >= 4, "too few points left the roundoff floor to rate");
}
