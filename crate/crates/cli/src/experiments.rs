//! One function per subcommand. Each writes its artifacts through
//! `Outputs` and reports whether a verdict failed.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use backscatter::analysis::{calibration_battery, theorem1_report, theorem2_report, GainReport, Theorem1Options, Verdict};
use backscatter::born::{
    assemble_qb, backscatter_dataset_cached, born_term, k_ladder_for_grid, series_scaling, BackscatterData, BornApproximation,
    BornTermConfig,
};
use backscatter::grid::Grid2D;
use backscatter::q3quad::{lemma_battery, q3_total, BatterySize, LemmaCheck, Q3Result};
use backscatter::resolvent::{ForwardSolver, ScatteringSolution, SolverOptions};
use backscatter::{ComplexField, Error, Result};
use serde_json::json;

use crate::cache::{AmplitudeCache, Cache, CacheKey};
use crate::config::{Experiment, ExperimentConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerdictFail,
}

/// Output directory stamped with the config hash and code version.
pub struct Outputs {
    pub dir: PathBuf,
    pub hash: String,
}

impl Outputs {
    pub fn new(dir: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let out = Outputs { dir: dir.to_path_buf(), hash: cfg.hash() };
        out.text("config.resolved", &format!("# backscatter {VERSION} config {}\n{}", out.hash, cfg.resolved()))?;
        Ok(out)
    }

    pub fn stamp(&self) -> String {
        format!("# backscatter {VERSION} config {}", self.hash)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        Ok(())
    }

    /// CSV with a leading stamp line.
    pub fn csv<F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>>(&self, name: &str, body: F) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        writeln!(w, "{}", self.stamp())?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn binary<F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>>(&self, name: &str, body: F) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// JSON object with the stamp fields merged in.
    pub fn json(&self, name: &str, mut value: serde_json::Value) -> Result<()> {
        if let Some(obj) = value.as_object_mut() {
            obj.insert("config_hash".into(), json!(self.hash));
            obj.insert("version".into(), json!(VERSION));
        }
        self.text(name, &(serde_json::to_string_pretty(&value).expect("json serializes") + "\n"))
    }
}

pub fn run(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    match cfg.experiment {
        Experiment::Forward => forward(cfg, out),
        Experiment::Born => born(cfg, out),
        Experiment::Q3Verify => q3_verify(cfg, out),
        Experiment::Theorem1 => theorem1(cfg, out),
        Experiment::Theorem2 => theorem2(cfg, out),
        Experiment::Scaling => scaling(cfg, out),
        Experiment::Lemmas => lemmas(cfg, out),
    }
}

fn solver(cfg: &ExperimentConfig, grid: Grid2D) -> Result<ForwardSolver> {
    ForwardSolver::new(&cfg.potential, grid, SolverOptions { tol: cfg.tol, ..Default::default() })
}

fn verdict_status(pass: bool) -> Status {
    if pass {
        Status::Success
    } else {
        Status::VerdictFail
    }
}

fn field_payload(sol: &ScatteringSolution) -> Result<Vec<u8>> {
    let mut b = Vec::new();
    b.extend_from_slice(&sol.residual.to_le_bytes());
    b.extend_from_slice(&(sol.iterations as u64).to_le_bytes());
    sol.u_s.write_binary(&mut b)?;
    Ok(b)
}

fn field_from_payload(b: &[u8], k: f64, theta: [f64; 2]) -> Result<ScatteringSolution> {
    if b.len() < 16 {
        return Err(Error::Format("short field entry".into()));
    }
    let residual = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
    let iterations = u64::from_le_bytes(b[8..16].try_into().expect("8 bytes")) as usize;
    let u_s = ComplexField::read_binary(&mut &b[16..])?;
    Ok(ScatteringSolution { k, theta, u_s, iterations, residual, history: vec![] })
}

fn forward(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let grid = cfg.grid()?;
    let s = solver(cfg, grid)?;
    let cache = Cache::open(&cfg.cache_dir)?;
    let ks = if cfg.ks.is_empty() { vec![cfg.k_max] } else { cfg.ks.clone() };
    let theta = [cfg.theta.cos(), cfg.theta.sin()];
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let key = CacheKey {
            kind: "field",
            potential_hash: cfg.potential.hash(),
            k,
            theta: cfg.theta,
            n: cfg.n,
            half_width: cfg.half_width,
            tol: cfg.tol,
        };
        let cached = cache.get(&key).and_then(|b| match field_from_payload(&b, k, theta) {
            Ok(sol) => Some(sol),
            Err(e) => {
                log::warn!("unreadable cached field ({e}); recomputing");
                None
            }
        });
        let sol = match cached {
            Some(sol) => sol,
            None => {
                let sol = s.solve(&s.operator(k)?, theta)?;
                cache.put(&key, &field_payload(&sol)?)?;
                sol
            }
        };
        for a in 0..cfg.angles {
            let t = 2.0 * PI * a as f64 / cfg.angles as f64;
            rows.push((k, t, s.far_field(&sol, [t.cos(), t.sin()])));
        }
        out.binary(&format!("u_s_{i}.bin"), |w| sol.u_s.write_binary(w))?;
        runs.push(json!({"k": k, "residual": sol.residual, "iterations": sol.iterations, "field": format!("u_s_{i}.bin")}));
    }
    out.csv("far_field.csv", |w| {
        writeln!(w, "k,theta_out,re,im")?;
        for (k, t, v) in &rows {
            writeln!(w, "{k:?},{t:?},{:?},{:?}", v.re, v.im)?;
        }
        Ok(())
    })?;
    out.json(
        "summary.json",
        json!({"experiment": "forward", "incidence_angle": cfg.theta, "runs": runs,
               "cache_hits": cache.hits(), "cache_misses": cache.misses()}),
    )?;
    Ok(Status::Success)
}

fn dataset(cfg: &ExperimentConfig, grid: Grid2D) -> Result<(BackscatterData, usize, usize)> {
    let s = solver(cfg, grid)?;
    let ks = if cfg.ks.is_empty() { k_ladder_for_grid(&grid, cfg.k_max) } else { cfg.ks.clone() };
    let cache = Cache::open(&cfg.cache_dir)?;
    let amplitudes = AmplitudeCache {
        cache: &cache,
        potential_hash: cfg.potential.hash(),
        n: cfg.n,
        half_width: cfg.half_width,
        tol: cfg.tol,
    };
    let data = backscatter_dataset_cached(&s, &ks, cfg.angles, &amplitudes)?;
    Ok((data, cache.hits(), cache.misses()))
}

fn write_born(out: &Outputs, data: &BackscatterData, qb: &BornApproximation) -> Result<()> {
    out.csv("data.csv", |w| data.write_csv(w))?;
    out.text("data_meta.json", &(data.metadata_json() + "\n"))?;
    out.binary("q_b.bin", |w| qb.field.write_binary(w))?;
    out.binary("q_b_spectrum.bin", |w| qb.spectrum.write_binary(w))?;
    if qb.field.grid().n() <= 512 {
        out.csv("q_b.csv", |w| qb.field.write_csv(w))?;
    }
    let grid = *qb.spectrum.grid();
    out.csv("coverage.csv", |w| {
        writeln!(w, "xi_x,xi_y,covered")?;
        for (i, c) in qb.covered.iter().enumerate() {
            let [x, y] = grid.frequency(i);
            writeln!(w, "{x:?},{y:?},{}", u8::from(*c))?;
        }
        Ok(())
    })
}

fn born(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let grid = cfg.grid()?;
    let (data, hits, misses) = dataset(cfg, grid)?;
    let qb = assemble_qb(&data, &grid)?;
    write_born(out, &data, &qb)?;
    out.json(
        "summary.json",
        json!({"experiment": "born", "band_max": qb.band_max, "imaginary_fraction": qb.imaginary_fraction,
               "max_residual": data.max_residual, "k_count": data.ks.len(), "angles": data.angle_count,
               "covered_points": qb.covered.iter().filter(|c| **c).count(),
               "cache_hits": hits, "cache_misses": misses}),
    )?;
    Ok(Status::Success)
}

fn q3_verify(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let s = solver(cfg, Grid2D::new(cfg.verify_n, cfg.half_width)?)?;
    let mut rows: Vec<(Q3Result, num_complex::Complex64, f64, f64)> = Vec::new();
    for &eta in &cfg.etas {
        let q = q3_total(&cfg.potential, eta, &cfg.q3_params())?;
        let b = born_term(&s, 3, eta)?;
        let err = (q.total - b).norm() / b.norm();
        let budget = 1e-3f64.max(q.error_estimate() / b.norm());
        log::info!("η = {eta:?}: relative difference {err:.3e} (budget {budget:.3e})");
        rows.push((q, b, err, budget));
    }
    let pass = rows.iter().all(|r| r.2 <= r.3);
    out.csv("q3_verify.csv", |w| {
        writeln!(w, "{},resolvent_re,resolvent_im,relative_error,budget,pass", Q3Result::csv_header())?;
        for (q, b, err, budget) in &rows {
            writeln!(w, "{},{:?},{:?},{err:e},{budget:e},{}", q.csv_row(), b.re, b.im, err <= budget)?;
        }
        Ok(())
    })?;
    out.json(
        "summary.json",
        json!({"experiment": "q3-verify", "points": rows.len(), "verdict": if pass { "PASS" } else { "FAIL" },
               "worst_relative_error": rows.iter().map(|r| r.2).fold(0.0, f64::max)}),
    )?;
    Ok(verdict_status(pass))
}

fn plot_stub(out: &Outputs) -> Result<()> {
    out.text(
        "plot_shells.py",
        &format!(
            r##"{}
# Shell energies (log2 E vs log2 radius) with fitted lines, from shells.csv.
import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(l for l in open("shells.csv") if not l.startswith("#"))]
for series in ("reference", "target"):
    pts = [r for r in rows if r["series"] == series]
    x = [float(r["log2_radius"]) for r in pts]
    plt.plot(x, [float(r["log2_energy"]) for r in pts], "o", label=series)
    plt.plot(x, [float(r["fitted"]) for r in pts], "-")
plt.xlabel("log2 |xi|")
plt.ylabel("log2 shell energy")
plt.legend()
plt.savefig("shells.png", dpi=150)
"##,
            out.stamp()
        ),
    )
}

fn write_gain(out: &Outputs, report: &GainReport) -> Result<Status> {
    out.json("gain_report.json", json!({"report": report}))?;
    out.csv("shells.csv", |w| report.write_shell_csv(w))?;
    plot_stub(out)?;
    println!(
        "{}: s*(reference) = {:.4}, s*(target) = {:.4}, gain = {:.4}, threshold {:.2}: {}",
        match report.mode {
            backscatter::analysis::GainMode::Theorem1 => "theorem1",
            backscatter::analysis::GainMode::Theorem2 => "theorem2",
        },
        report.reference.s_star,
        report.target.s_star,
        report.gain,
        report.threshold,
        report.verdict
    );
    Ok(verdict_status(report.verdict == Verdict::Pass))
}

fn theorem1(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let opts = Theorem1Options { band: cfg.band, q3: cfg.q3_params(), threshold: cfg.threshold, ..Default::default() };
    let report = theorem1_report(&cfg.potential, &opts)?;
    write_gain(out, &report)
}

fn theorem2(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let grid = cfg.grid()?;
    let (data, hits, misses) = dataset(cfg, grid)?;
    let qb = assemble_qb(&data, &grid)?;
    write_born(out, &data, &qb)?;
    let (report, diff) = theorem2_report(&cfg.potential, &qb, cfg.cutoff, cfg.threshold)?;
    out.binary("difference_spectrum.bin", |w| diff.write_binary(w))?;
    out.json(
        "summary.json",
        json!({"experiment": "theorem2", "band_max": qb.band_max, "max_residual": data.max_residual,
               "cache_hits": hits, "cache_misses": misses, "verdict": report.verdict}),
    )?;
    write_gain(out, &report)
}

fn scaling(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let config = BornTermConfig::new(3, cfg.c0, cfg.eps_ladder.clone())?;
    let sc = series_scaling(
        &cfg.potential,
        cfg.grid()?,
        SolverOptions { tol: cfg.tol, ..Default::default() },
        &Grid2D::new(cfg.spectral_n, cfg.half_width)?,
        &config,
        cfg.probe_xi,
    )?;
    let pass = (sc.slopes[0] - 2.0).abs() <= 0.05 && (sc.slopes[1] - 3.0).abs() <= 0.05 && (sc.slopes[2] - 4.0).abs() <= 0.1;
    out.csv("scaling.csv", |w| {
        writeln!(w, "eps,norm_q2,norm_q3,cubic_defect")?;
        for i in 0..sc.eps.len() {
            writeln!(w, "{:?},{:e},{:e},{:e}", sc.eps[i], sc.term_norms[0][i], sc.term_norms[1][i], sc.defect[i])?;
        }
        Ok(())
    })?;
    out.json(
        "summary.json",
        json!({"experiment": "scaling", "slopes": {"q2": sc.slopes[0], "q3": sc.slopes[1], "defect": sc.slopes[2]},
               "verdict": if pass { "PASS" } else { "FAIL" }}),
    )?;
    println!("slopes: Q2 {:.4}, Q3 {:.4}, defect {:.4}: {}", sc.slopes[0], sc.slopes[1], sc.slopes[2], if pass { "PASS" } else { "FAIL" });
    Ok(verdict_status(pass))
}

fn lemmas(cfg: &ExperimentConfig, out: &Outputs) -> Result<Status> {
    let mut checks = lemma_battery(cfg.seed, BatterySize::default())?;
    checks.extend(calibration_battery(cfg.seed, 100)?);
    out.csv("lemmas.csv", |w| {
        writeln!(w, "{}", LemmaCheck::csv_header())?;
        for c in &checks {
            writeln!(w, "{}", c.csv_row())?;
        }
        Ok(())
    })?;
    for c in &checks {
        println!("{:<34} {:>9.2e} (tolerance {:.0e}) {}", c.name, c.worst, c.tolerance, if c.pass { "PASS" } else { "FAIL" });
    }
    let pass = checks.iter().all(|c| c.pass);
    out.json("summary.json", json!({"experiment": "lemmas", "checks": checks, "verdict": if pass { "PASS" } else { "FAIL" }}))?;
    Ok(verdict_status(pass))
}
