//! End-to-end acceptance battery: one line per criterion, then a single
//! assertion that all of them passed.

use std::io::Write;
use std::time::{Duration, Instant};

use backscatter::analysis::*;
use backscatter::born::*;
use backscatter::grid::Grid2D;
use backscatter::q3quad::*;
use backscatter::resolvent::{ForwardSolver, SolverOptions};
use backscatter::{FourierEvaluator, PotentialSpec, SpectrumField};

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn disk(eps: f64) -> PotentialSpec {
    PotentialSpec::disk(0.8, eps).unwrap()
}

fn unit(a: f64) -> [f64; 2] {
    [a.cos(), a.sin()]
}

fn neg(v: [f64; 2]) -> [f64; 2] {
    [-v[0], -v[1]]
}

fn forward_fidelity() -> Outcome {
    let opts = SolverOptions { tol: 1e-12, ..Default::default() };
    let s4 = ForwardSolver::new(&disk(0.1), Grid2D::new(256, 4.0).unwrap(), opts).unwrap();
    let s6 = ForwardSolver::new(&disk(0.1), Grid2D::new(384, 6.0).unwrap(), opts).unwrap();
    let (mut resid, mut recip, mut boxed) = (0.0f64, 0.0f64, 0.0f64);
    let theta = unit(0.3);
    let theta_out = unit(1.7);
    for k in [4.0, 8.0, 16.0] {
        let op = s4.operator(k).unwrap();
        let a = s4.solve(&op, theta).unwrap();
        let b = s4.solve(&op, neg(theta_out)).unwrap();
        resid = resid.max(a.residual).max(b.residual);
        let forward = s4.far_field(&a, theta_out);
        let reverse = s4.far_field(&b, neg(theta));
        recip = recip.max((forward - reverse).norm() / forward.norm());
        let back4 = s4.far_field(&a, neg(theta));
        let op6 = s6.operator(k).unwrap();
        let c = s6.solve(&op6, theta).unwrap();
        resid = resid.max(c.residual);
        let back6 = s6.far_field(&c, neg(theta));
        boxed = boxed.max((back4 - back6).norm() / back4.norm());
    }
    Outcome {
        pass: resid <= 1e-10 && recip <= 1e-6 && boxed <= 1e-5,
        detail: format!("residual {resid:.2e} (≤1e-10), reciprocity {recip:.2e} (≤1e-6), box L 4→6 {boxed:.2e} (≤1e-5)"),
    }
}

fn born_series_structure() -> Outcome {
    let config = BornTermConfig::new(3, 10.0, vec![0.02, 0.04, 0.08, 0.16]).unwrap();
    let sc = series_scaling(
        &disk(1.0),
        Grid2D::new(128, 4.0).unwrap(),
        SolverOptions { tol: 1e-13, ..Default::default() },
        &Grid2D::new(32, 4.0).unwrap(),
        &config,
        [10.0, 4.0],
    )
    .unwrap();
    let [p2, p3, p4] = sc.slopes;
    Outcome {
        pass: (p2 - 2.0).abs() <= 0.05 && (p3 - 3.0).abs() <= 0.05 && (p4 - 4.0).abs() <= 0.1,
        detail: format!("slopes ‖Q̃₂‖ {p2:.4}, ‖Q̃₃‖ {p3:.4}, series defect {p4:.4}"),
    }
}

fn cubic_term_cross_validation() -> Outcome {
    let spec = disk(1.0);
    let solver = ForwardSolver::new(&spec, Grid2D::new(1024, 4.0).unwrap(), SolverOptions::default()).unwrap();
    let mut pass = true;
    let mut parts = vec![];
    for eta in [[12.0, 0.0], [9.0, 9.0], [-6.0, 14.0]] {
        let q = q3_total(&spec, eta, &Q3Params::default()).unwrap();
        let b = born_term(&solver, 3, eta).unwrap();
        let err = (q.total - b).norm() / b.norm();
        let budget = 1e-3f64.max(q.error_estimate() / b.norm());
        pass &= err <= budget;
        parts.push(format!("|η|={:.1}: {err:.2e}", eta[0].hypot(eta[1])));
    }
    Outcome { pass, detail: format!("relative error vs resolvent route {}", parts.join(", ")) }
}

fn theorem2_surrogate() -> Outcome {
    let spec = disk(0.05);
    let grid = Grid2D::new(256, 4.0).unwrap();
    let solver = ForwardSolver::new(&spec, grid, SolverOptions::default()).unwrap();
    let ks = k_ladder_for_grid(&grid, 16.0);
    let data = backscatter_dataset(&solver, &ks, 64).unwrap();
    let qb = assemble_qb(&data, &grid).unwrap();
    let (report, _) = theorem2_report(&spec, &qb, 10.0, None).unwrap();
    let ev = FourierEvaluator::new(&spec, 200.0).unwrap();
    let s_q = critical_exponent(&SpectrumField::from_fn(grid, |xi| ev.eval(xi)), &ExponentOptions::default()).unwrap().s_star;
    Outcome {
        pass: (s_q - 0.5).abs() <= 0.1 && report.gain >= 0.3,
        detail: format!("s*(q̂) {s_q:.3} (0.5±0.1); on the covered band s*(q̂) {:.3}, s*(q̂−q̂_B) {:.3}, gain {:.3} (≥0.3)",
            report.reference.s_star,
            report.target.s_star,
            report.gain),
    }
}

fn theorem1_surrogate() -> Outcome {
    let report = theorem1_report(&disk(1.0), &Theorem1Options::default()).unwrap();
    Outcome {
        pass: report.gain >= 0.6,
        detail: format!(
            "s*(q̂) {:.3}, s*(Q̂₃) {:.3}, gain {:.3} (≥0.6), angular spread {:.1e}",
            report.reference.s_star,
            report.target.s_star,
            report.gain,
            report.angular_spread.unwrap_or(0.0)
        ),
    }
}

fn battery_outcome(checks: Vec<LemmaCheck>) -> Outcome {
    Outcome {
        pass: checks.iter().all(|c| c.pass),
        detail: checks.iter().map(|c| format!("{} {:.1e}", c.name, c.worst)).collect::<Vec<_>>().join(", "),
    }
}

fn geometry_battery() -> Outcome {
    battery_outcome(lemma_battery(2024, BatterySize::default()).unwrap())
}

fn analysis_calibration() -> Outcome {
    battery_outcome(calibration_battery(99, 100).unwrap())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("forward-solver fidelity", Duration::from_secs(120), forward_fidelity),
        ("Born-series structure", Duration::from_secs(600), born_series_structure),
        ("cubic term cross-validation", Duration::from_secs(900), cubic_term_cross_validation),
        ("gain of q − q_B over q", Duration::from_secs(1200), theorem2_surrogate),
        ("gain of Q₃ over q", Duration::from_secs(1800), theorem1_surrogate),
        ("geometry/lemma battery", Duration::from_secs(60), geometry_battery),
        ("analysis calibration", Duration::from_secs(60), analysis_calibration),
    ];
    let mut failed = vec![];
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let elapsed = t0.elapsed();
        let pass = out.pass && elapsed <= *limit;
        // straight to the handle so the lines survive libtest's output capture
        let _ = writeln!(
            std::io::stderr().lock(),
            "criterion {}: {} — {name}: {}; {:.1} s (limit {} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
