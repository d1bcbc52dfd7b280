//! Sobolev norms, critical exponents from Fourier shell decay, the discrete
//! maximal function and regularity-gain reports.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::born::BornApproximation;
use crate::error::{Error, Result};
use crate::grid::{shell_energies_with, ShellTable, SpectrumField as GenericSpectrum};
use crate::potentials::{FourierEvaluator, PotentialSpec};
use crate::q3quad::{LemmaCheck, Q3Engine, Q3Params};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use crate::quadrature::composite;
use crate::scalar::Scalar;
use crate::{RealField, SpectrumField};

/// ‖F‖ in W^{s,2} (or Ẇ^{s,2}) normalized so s = 0 gives the physical L²
/// norm: (2π)⁻¹ (Σ w(ξ)|F(ξ)|² Δξ²)^{1/2} over lattice points |ξ| > cutoff,
/// with w = (1+|ξ|²)^s or |ξ|^{2s}.
pub fn sobolev_norm<T: Scalar>(spectrum: &GenericSpectrum<T>, s: f64, homogeneous: bool, cutoff: f64) -> Result<f64> {
    if !(s.abs() < 2.0) {
        return Err(Error::Config(format!("Sobolev index {s} outside the resolved range |s| < 2")));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::Config(format!("cutoff {cutoff} must be non-negative")));
    }
    let grid = spectrum.grid();
    let d2 = grid.dual_spacing().powi(2);
    let mut acc = 0.0;
    for (i, v) in spectrum.values().iter().enumerate() {
        let xi = grid.frequency(i);
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        if r2.sqrt() <= cutoff && !(cutoff == 0.0 && r2 == 0.0) {
            continue;
        }
        let w = if homogeneous {
            if r2 == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    continue;
                }
            } else {
                r2.powf(s)
            }
        } else {
            (1.0 + r2).powf(s)
        };
        acc += w * v.norm_sqr().as_f64();
    }
    Ok((acc * d2).sqrt() / (2.0 * PI))
}

/// Settings for the shell-decay estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentOptions {
    /// Shells must lie strictly above this frequency.
    pub cutoff: f64,
    /// Upper end of the usable band (covered data); None: the lattice.
    pub band_max: Option<f64>,
    pub shells_per_octave: u32,
    pub min_shells: usize,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        ExponentOptions { cutoff: 10.0, band_max: None, shells_per_octave: 4, min_shells: 4 }
    }
}

/// Fitted s* beyond this is reported as super-algebraic decay.
pub const SUPER_ALGEBRAIC: f64 = 6.0;
/// Decay that keeps steepening across the band is also super-algebraic:
/// the upper-half fit exceeds `CURVED_UPPER` and beats the lower half by
/// more than `CURVED_GAP`.
pub const CURVED_UPPER: f64 = 3.0;
pub const CURVED_GAP: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub lower: f64,
    pub upper: f64,
    pub energy: f64,
    pub weight: f64,
    pub log2_radius: f64,
    pub log2_energy: f64,
    pub fitted: f64,
}

/// Least-squares fit of log₂E against log₂(shell radius).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// −slope/2, or +∞ for super-algebraic decay.
    pub s_star: f64,
    pub super_algebraic: bool,
    pub slope: f64,
    pub intercept: f64,
    /// Separate fits over the lower and upper halves of the shells.
    pub half_fits: Option<[f64; 2]>,
    /// Weighted RMS residual in log₂E.
    pub residual: f64,
    /// Frequency band actually used.
    pub band: [f64; 2],
    pub rows: Vec<FitRow>,
}

impl fmt::Display for ExponentFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.super_algebraic {
            write!(f, "s* ≥ {SUPER_ALGEBRAIC} (super-algebraic decay)")
        } else {
            write!(f, "s* = {:.4} (residual {:.3e}, {} shells)", self.s_star, self.residual, self.rows.len())
        }
    }
}

/// Fit shell energies given as (lower, upper, energy, weight).
pub fn fit_shells(shells: &[(f64, f64, f64, f64)], min_shells: usize) -> Result<ExponentFit> {
    let mut fit = fit_line(shells, min_shells)?;
    if fit.super_algebraic || shells.len() < 4 {
        return Ok(fit);
    }
    let h = shells.len() / 2;
    let lo = fit_line(&shells[..h], 2)?.slope * -0.5;
    let hi = fit_line(&shells[h..], 2)?.slope * -0.5;
    fit.half_fits = Some([lo, hi]);
    if hi > CURVED_UPPER && hi - lo > CURVED_GAP {
        fit.super_algebraic = true;
        fit.s_star = f64::INFINITY;
    }
    Ok(fit)
}

fn fit_line(shells: &[(f64, f64, f64, f64)], min_shells: usize) -> Result<ExponentFit> {
    if shells.len() < min_shells.max(2) {
        return Err(Error::Estimator(format!("{} usable shells, at least {} required", shells.len(), min_shells.max(2))));
    }
    let band = [shells.iter().map(|s| s.0).fold(f64::INFINITY, f64::min), shells.iter().map(|s| s.1).fold(0.0, f64::max)];
    if shells.iter().any(|s| !(s.2 > 0.0)) {
        let rows = shells
            .iter()
            .map(|&(lower, upper, energy, weight)| FitRow {
                lower,
                upper,
                energy,
                weight,
                log2_radius: (lower * upper).sqrt().log2(),
                log2_energy: energy.log2(),
                fitted: f64::NAN,
            })
            .collect();
        return Ok(ExponentFit {
            s_star: f64::INFINITY,
            super_algebraic: true,
            slope: f64::NEG_INFINITY,
            intercept: f64::NAN,
            half_fits: None,
            residual: f64::NAN,
            band,
            rows,
        });
    }
    let xs: Vec<f64> = shells.iter().map(|s| (s.0 * s.1).sqrt().log2()).collect();
    let ys: Vec<f64> = shells.iter().map(|s| s.2.log2()).collect();
    let ws: Vec<f64> = shells.iter().map(|s| s.3).collect();
    let wsum: f64 = ws.iter().sum();
    let xm = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ym = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).zip(&ws).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rows: Vec<FitRow> = shells
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(&(lower, upper, energy, weight), (&x, &y))| FitRow {
            lower,
            upper,
            energy,
            weight,
            log2_radius: x,
            log2_energy: y,
            fitted: intercept + slope * x,
        })
        .collect();
    let residual = (rows.iter().map(|r| r.weight * (r.log2_energy - r.fitted).powi(2)).sum::<f64>() / wsum).sqrt();
    let s_star = -0.5 * slope;
    let super_algebraic = s_star > SUPER_ALGEBRAIC;
    Ok(ExponentFit {
        s_star: if super_algebraic { f64::INFINITY } else { s_star },
        super_algebraic,
        slope,
        intercept,
        half_fits: None,
        residual,
        band,
        rows,
    })
}

fn usable_shells(table: &ShellTable, band_max: f64) -> Vec<(f64, f64, f64, f64)> {
    table
        .shells
        .iter()
        .filter(|s| s.reliable && s.complete && s.lower > table.cutoff && s.upper <= band_max)
        .map(|s| (s.lower, s.upper, s.energy, s.count as f64))
        .collect()
}

/// Critical Sobolev exponent from the decay of shell energies of F.
pub fn critical_exponent<T: Scalar>(spectrum: &GenericSpectrum<T>, opts: &ExponentOptions) -> Result<ExponentFit> {
    Ok(sobolev_report("field", spectrum, opts)?.fit)
}

/// Shell table and fit for one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    pub field: String,
    pub cutoff: f64,
    pub table: ShellTable,
    pub fit: ExponentFit,
}

pub fn sobolev_report<T: Scalar>(id: &str, spectrum: &GenericSpectrum<T>, opts: &ExponentOptions) -> Result<SobolevReport> {
    let table = shell_energies_with(spectrum, opts.cutoff, opts.shells_per_octave)?;
    let band_max = opts.band_max.unwrap_or(f64::INFINITY).min(spectrum.grid().inscribed_radius());
    let fit = fit_shells(&usable_shells(&table, band_max), opts.min_shells)?;
    Ok(SobolevReport { field: id.into(), cutoff: opts.cutoff, table, fit })
}

/// Shell energy estimated from samples on rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledShell {
    pub lower: f64,
    pub upper: f64,
    /// ∫_{shell} |F|² dξ by Gauss in radius × uniform angles.
    pub energy: f64,
    /// Relative spread of the per-angle energies.
    pub angular_spread: f64,
}

/// Ray sampling of a shell: composite Gauss in radius, uniform angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellSampling {
    pub panel_width: f64,
    pub order: usize,
    pub angles: usize,
}

impl Default for ShellSampling {
    /// Resolves the oscillation of |q̂|² for supports of radius ≤ 1.
    fn default() -> Self {
        ShellSampling { panel_width: 4.0, order: 4, angles: 8 }
    }
}

impl ShellSampling {
    fn radial(&self, lower: f64, upper: f64) -> Vec<(f64, f64)> {
        composite(lower, upper, self.panel_width, self.order)
    }

    /// Points at which `shell` expects values, radius-major.
    pub fn points(&self, lower: f64, upper: f64) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for (r, _) in self.radial(lower, upper) {
            for a in 0..self.angles {
                let t = 2.0 * PI * (a as f64 + 0.5) / self.angles as f64;
                pts.push([r * t.cos(), r * t.sin()]);
            }
        }
        pts
    }

    /// Shell energy from values at `points`.
    pub fn shell(&self, lower: f64, upper: f64, values: &[Complex64]) -> Result<SampledShell> {
        let radial = self.radial(lower, upper);
        if values.len() != radial.len() * self.angles {
            return Err(Error::Config(format!("{} values for {} sample points", values.len(), radial.len() * self.angles)));
        }
        let mut per_angle = vec![0.0; self.angles];
        for (i, (r, w)) in radial.into_iter().enumerate() {
            for (a, acc) in per_angle.iter_mut().enumerate() {
                *acc += w * r * values[i * self.angles + a].norm_sqr() * 2.0 * PI;
            }
        }
        let mean = per_angle.iter().sum::<f64>() / self.angles as f64;
        let var = per_angle.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / self.angles as f64;
        Ok(SampledShell { lower, upper, energy: mean, angular_spread: if mean > 0.0 { var.sqrt() / mean } else { 0.0 } })
    }
}

/// Sub-dyadic shell edges 2^{j/b} covering (lo, hi].
pub fn shell_edges(lo: f64, hi: f64, per_octave: u32) -> Vec<(f64, f64)> {
    let b = per_octave as f64;
    let j0 = (lo.log2() * b).ceil() as i32;
    let j1 = (hi.log2() * b + 1e-9).floor() as i32;
    (j0..j1).map(|j| (2f64.powf(j as f64 / b), 2f64.powf((j + 1) as f64 / b))).collect()
}

/// Fit of sampled shells, weighted by shell area.
pub fn critical_exponent_sampled(shells: &[SampledShell], min_shells: usize) -> Result<ExponentFit> {
    let rows: Vec<_> = shells.iter().map(|s| (s.lower, s.upper, s.energy, PI * (s.upper.powi(2) - s.lower.powi(2)))).collect();
    fit_shells(&rows, min_shells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GainMode {
    /// q − q_B against q; default threshold 0.3.
    Theorem2,
    /// Q₃(q) against q; default threshold 0.6.
    Theorem1,
}

impl GainMode {
    pub fn default_threshold(self) -> f64 {
        match self {
            GainMode::Theorem2 => 0.3,
            GainMode::Theorem1 => 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub mode: GainMode,
    pub potential: String,
    pub known_index: f64,
    pub reference: ExponentFit,
    pub target: ExponentFit,
    pub gain: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Largest per-shell angular spread (sampled mode only).
    pub angular_spread: Option<f64>,
}

impl GainReport {
    fn new(mode: GainMode, spec: &PotentialSpec, reference: ExponentFit, target: ExponentFit, threshold: f64) -> Self {
        let gain = target.s_star - reference.s_star;
        GainReport {
            mode,
            potential: spec.to_string(),
            known_index: spec.known_sobolev_index(),
            reference,
            target,
            gain,
            threshold,
            verdict: if gain >= threshold { Verdict::Pass } else { Verdict::Fail },
            angular_spread: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per fitted shell of either spectrum.
    pub fn write_shell_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "series,lower,upper,energy,weight,log2_radius,log2_energy,fitted")?;
        for (name, fit) in [("reference", &self.reference), ("target", &self.target)] {
            for r in &fit.rows {
                writeln!(
                    w,
                    "{name},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    r.lower, r.upper, r.energy, r.weight, r.log2_radius, r.log2_energy, r.fitted
                )?;
            }
        }
        Ok(())
    }
}

/// Compare the decay of F_target with that of F_q on the same lattice.
pub fn regularity_gain(
    spec: &PotentialSpec,
    f_q: &SpectrumField,
    f_target: &SpectrumField,
    mode: GainMode,
    threshold: Option<f64>,
    opts: &ExponentOptions,
) -> Result<GainReport> {
    if f_q.grid() != f_target.grid() {
        return Err(Error::Config("reference and target spectra live on different grids".into()));
    }
    let reference = critical_exponent(f_q, opts)?;
    let target = critical_exponent(f_target, opts)?;
    if reference.band != target.band {
        return Err(Error::Config(format!("fitted bands differ: {:?} vs {:?}", reference.band, target.band)));
    }
    Ok(GainReport::new(mode, spec, reference, target, threshold.unwrap_or(mode.default_threshold())))
}

/// Same comparison from ray-sampled shells (both on identical shells).
pub fn regularity_gain_sampled(
    spec: &PotentialSpec,
    reference: &[SampledShell],
    target: &[SampledShell],
    mode: GainMode,
    threshold: Option<f64>,
    min_shells: usize,
) -> Result<GainReport> {
    if reference.len() != target.len() || reference.iter().zip(target).any(|(a, b)| a.lower != b.lower || a.upper != b.upper) {
        return Err(Error::Config("reference and target shells differ".into()));
    }
    let mut report = GainReport::new(
        mode,
        spec,
        critical_exponent_sampled(reference, min_shells)?,
        critical_exponent_sampled(target, min_shells)?,
        threshold.unwrap_or(mode.default_threshold()),
    );
    report.angular_spread = Some(target.iter().map(|s| s.angular_spread).fold(0.0, f64::max));
    Ok(report)
}

/// Ray-sampled comparison of Q̂₃ with q̂ on sub-dyadic shells.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Options {
    pub band: [f64; 2],
    pub shells_per_octave: u32,
    pub sampling: ShellSampling,
    pub q3: Q3Params,
    pub threshold: Option<f64>,
}

impl Default for Theorem1Options {
    fn default() -> Self {
        Theorem1Options {
            band: [11.0, 64.0],
            shells_per_octave: 2,
            sampling: ShellSampling::default(),
            q3: Q3Params::default(),
            threshold: None,
        }
    }
}

pub fn theorem1_report(spec: &PotentialSpec, opts: &Theorem1Options) -> Result<GainReport> {
    if !(opts.band[0] > 4.0 && opts.band[1] > opts.band[0]) {
        return Err(Error::Config(format!("band {:?} must satisfy 4 < lower < upper", opts.band)));
    }
    let edges = shell_edges(opts.band[0], opts.band[1], opts.shells_per_octave);
    let ev = FourierEvaluator::new(spec, opts.band[1])?;
    let mut reference = Vec::with_capacity(edges.len());
    let mut target = Vec::with_capacity(edges.len());
    for (lo, hi) in edges {
        let pts = opts.sampling.points(lo, hi);
        let q3 = pts
            .iter()
            .map(|&x| Ok(Q3Engine::new(spec, x, &opts.q3)?.terms().total()))
            .collect::<Result<Vec<_>>>()?;
        let q: Vec<Complex64> = pts.iter().map(|&x| ev.eval(x)).collect();
        log::info!("shell [{lo:.2}, {hi:.2}): {} q3 samples", pts.len());
        reference.push(opts.sampling.shell(lo, hi, &q)?);
        target.push(opts.sampling.shell(lo, hi, &q3)?);
    }
    regularity_gain_sampled(spec, &reference, &target, GainMode::Theorem1, opts.threshold, 4)
}

/// q̂ − q̂_B on the covered lattice points (q̂ elsewhere) and the gain of
/// its decay over q̂ inside the covered band.
pub fn theorem2_report(
    spec: &PotentialSpec,
    qb: &BornApproximation,
    cutoff: f64,
    threshold: Option<f64>,
) -> Result<(GainReport, SpectrumField)> {
    let grid = *qb.spectrum.grid();
    let ev = FourierEvaluator::new(spec, grid.nyquist() * 1.5)?;
    let fq = SpectrumField::from_fn(grid, |xi| ev.eval(xi));
    let mut diff = fq.clone();
    for ((d, b), &c) in diff.values_mut().iter_mut().zip(qb.spectrum.values()).zip(&qb.covered) {
        if c {
            *d -= b;
        }
    }
    let opts = ExponentOptions { cutoff, band_max: Some(qb.band_max), ..Default::default() };
    let report = regularity_gain(spec, &fq, &diff, GainMode::Theorem2, threshold, &opts)?;
    Ok((report, diff))
}

/// Ball radii (in lattice units) of the discrete maximal function.
pub fn maximal_radii(n: usize) -> Vec<usize> {
    let mut r = vec![0];
    let mut k = 1;
    while k <= n / 2 {
        r.push(k);
        k *= 2;
    }
    r
}

const FIXED_SHIFT: i32 = 64;

/// Centered discrete maximal function of |f| on an n×n lattice (row-major,
/// index = iy·n + ix): the largest average of |f| over lattice balls
/// {|y − x| ≤ r} ∩ box for r in `maximal_radii`. Sums are formed exactly in
/// fixed point, so M is monotone and M f ≥ |f| hold without rounding
/// exceptions.
pub fn maximal_function_values(n: usize, magnitudes: &[f64]) -> Result<Vec<f64>> {
    if magnitudes.len() != n * n {
        return Err(Error::Config(format!("{} values for a {n}×{n} lattice", magnitudes.len())));
    }
    let max = magnitudes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max < 2f64.powi(40)) {
        return Err(Error::Config("maximal function needs finite values below 2^40".into()));
    }
    let scale = 2f64.powi(FIXED_SHIFT);
    let fixed: Vec<i128> = magnitudes.iter().map(|v| (v.abs() * scale).round() as i128).collect();
    // row prefix sums
    let mut prefix = vec![0i128; n * (n + 1)];
    for y in 0..n {
        for x in 0..n {
            prefix[y * (n + 1) + x + 1] = prefix[y * (n + 1) + x] + fixed[y * n + x];
        }
    }
    let mut out: Vec<f64> = magnitudes.iter().map(|v| v.abs()).collect();
    for &r in maximal_radii(n).iter().skip(1) {
        let ri = r as i64;
        let half: Vec<i64> = (0..=ri).map(|dy| (((r * r) as i64 - dy * dy) as f64).sqrt().floor() as i64).collect();
        for y in 0..n as i64 {
            for x in 0..n as i64 {
                let mut sum = 0i128;
                let mut count = 0i64;
                for dy in -ri..=ri {
                    let yy = y + dy;
                    if yy < 0 || yy >= n as i64 {
                        continue;
                    }
                    let w = half[dy.unsigned_abs() as usize];
                    let lo = (x - w).max(0);
                    let hi = (x + w).min(n as i64 - 1);
                    let row = yy as usize * (n + 1);
                    sum += prefix[row + hi as usize + 1] - prefix[row + lo as usize];
                    count += hi - lo + 1;
                }
                let avg = sum as f64 / scale / count as f64;
                let o = &mut out[y as usize * n + x as usize];
                if avg > *o {
                    *o = avg;
                }
            }
        }
    }
    Ok(out)
}

/// M|f| for a physical field.
pub fn maximal_function(field: &RealField) -> Result<RealField> {
    let n = field.grid().n();
    RealField::new(*field.grid(), maximal_function_values(n, field.values())?)
}

/// M|F| for a spectrum, with balls in frequency (centered lattice) order.
pub fn maximal_function_spectrum(spectrum: &SpectrumField) -> Result<RealField> {
    let grid = *spectrum.grid();
    let n = grid.n();
    let shift = |i: usize| -> usize {
        let (iy, ix) = (i / n, i % n);
        ((iy + n / 2) % n) * n + (ix + n / 2) % n
    };
    let mut centered = vec![0.0; n * n];
    for (i, v) in spectrum.values().iter().enumerate() {
        centered[shift(i)] = v.norm();
    }
    let m = maximal_function_values(n, &centered)?;
    let mut out = vec![0.0; n * n];
    for i in 0..n * n {
        out[i] = m[shift(i)];
    }
    // values indexed like the spectrum; stored in a real field on the same grid
    RealField::new(grid, out)
}

/// Power-law recovery and the exact maximal-function invariants on
/// `fields` random 32×32 lattices.
pub fn calibration_battery(seed: u64, fields: usize) -> Result<Vec<LemmaCheck>> {
    let grid = crate::grid::Grid2D::new(256, 4.0)?;
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 2.5, 3.0] {
        let f = SpectrumField::from_fn(grid, |xi| {
            let r = xi[0].hypot(xi[1]);
            Complex64::new(if r > 0.0 { r.powf(-p) } else { 0.0 }, 0.0)
        });
        worst = worst.max((critical_exponent(&f, &ExponentOptions::default())?.s_star - (p - 1.0)).abs());
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let n = 32;
    let (mut dominance, mut monotone) = (0usize, 0usize);
    for _ in 0..fields {
        let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = f.iter().map(|v| v.abs() + rng.gen_range(0.0..0.01)).collect();
        let mf = maximal_function_values(n, &f)?;
        let mg = maximal_function_values(n, &g)?;
        dominance += (0..n * n).filter(|&i| mf[i] < f[i].abs()).count();
        monotone += (0..n * n).filter(|&i| mf[i] > mg[i]).count();
    }
    Ok(vec![
        LemmaCheck::new("power-law exponent", 4, worst, 0.05),
        LemmaCheck::new("maximal dominance violations", fields, dominance as f64, 0.0),
        LemmaCheck::new("maximal monotonicity violations", fields, monotone as f64, 0.0),
    ])
}
