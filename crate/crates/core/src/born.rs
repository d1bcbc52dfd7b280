//! Backscattering data, the Born approximation q_B and the j-adic Born
//! terms Q̂ⱼ evaluated through the grid resolvent.
//!
//! Backscattering at (k, θ) fills Fourier space at ξ = −2kθ, so
//! q̂_B(ξ) = A(k, θ, −θ) with k = |ξ|/2, θ = −ξ/|ξ|.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FourierTransformer, Grid2D};
use crate::parallel::par_map;
use crate::potentials::PotentialSpec;
use crate::resolvent::{ForwardSolver, ResolventOperator};
use crate::{RealField, SpectrumField};

/// One backscattering measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackscatterSample {
    pub k: f64,
    pub theta: [f64; 2],
    pub xi: [f64; 2],
    pub amplitude: Complex64,
}

impl BackscatterSample {
    pub fn new(k: f64, theta_angle: f64, amplitude: Complex64) -> Self {
        let theta = [theta_angle.cos(), theta_angle.sin()];
        BackscatterSample { k, theta, xi: [-2.0 * k * theta[0], -2.0 * k * theta[1]], amplitude }
    }
}

/// A(k, θ, −θ) on a polar grid: wavenumbers `ks` (radii |ξ| = 2k) times
/// uniform incidence angles α_a = 2πa/N.
#[derive(Debug, Clone, PartialEq)]
pub struct BackscatterData {
    pub ks: Vec<f64>,
    pub angle_count: usize,
    /// values[m][a] = A(k_m, θ_a, −θ_a)
    pub values: Vec<Vec<Complex64>>,
    pub potential_hash: String,
    pub tol: f64,
    /// Largest Lippmann–Schwinger residual among the solves.
    pub max_residual: f64,
}

impl BackscatterData {
    pub fn theta_angle(&self, a: usize) -> f64 {
        2.0 * PI * a as f64 / self.angle_count as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        self.ks.iter().map(|k| 2.0 * k).collect()
    }

    pub fn k_max(&self) -> f64 {
        self.ks.last().copied().unwrap_or(0.0)
    }

    pub fn samples(&self) -> impl Iterator<Item = BackscatterSample> + '_ {
        self.ks.iter().enumerate().flat_map(move |(m, &k)| {
            (0..self.angle_count).map(move |a| BackscatterSample::new(k, self.theta_angle(a), self.values[m][a]))
        })
    }

    /// Data manufactured from a closed-form spectrum F at ξ = −2kθ.
    pub fn manufactured<F: Fn([f64; 2]) -> Complex64>(ks: &[f64], angle_count: usize, f: F) -> Result<Self> {
        validate_ladder(ks, angle_count)?;
        let values = ks
            .iter()
            .map(|&k| {
                (0..angle_count)
                    .map(|a| {
                        let s = BackscatterSample::new(k, 2.0 * PI * a as f64 / angle_count as f64, Complex64::new(0.0, 0.0));
                        f(s.xi)
                    })
                    .collect()
            })
            .collect();
        Ok(BackscatterData {
            ks: ks.to_vec(),
            angle_count,
            values,
            potential_hash: "manufactured".into(),
            tol: 0.0,
            max_residual: 0.0,
        })
    }

    /// CSV rows `k,theta_angle,re,im` in deterministic order.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,theta_angle,re,im")?;
        for s in self.samples() {
            writeln!(w, "{:?},{:?},{:?},{:?}", s.k, s.theta[1].atan2(s.theta[0]).rem_euclid(2.0 * PI), s.amplitude.re, s.amplitude.im)?;
        }
        Ok(())
    }

    /// JSON metadata sidecar.
    pub fn metadata_json(&self) -> String {
        serde_json::json!({
            "potential_hash": self.potential_hash,
            "k_count": self.ks.len(),
            "k_min": self.ks.first(),
            "k_max": self.ks.last(),
            "angle_count": self.angle_count,
            "tol": self.tol,
            "max_residual": self.max_residual,
        })
        .to_string()
    }
}

fn validate_ladder(ks: &[f64], angle_count: usize) -> Result<()> {
    if ks.is_empty() || ks[0] <= 0.0 || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("k list must be positive and strictly increasing".into()));
    }
    if angle_count < 16 || !angle_count.is_power_of_two() {
        return Err(Error::Config(format!("angle count {angle_count} must be a power of two ≥ 16")));
    }
    Ok(())
}

/// Wavenumbers whose radii 2k step by Δξ/2 of `grid` up to 2k_max.
pub fn k_ladder_for_grid(grid: &Grid2D, k_max: f64) -> Vec<f64> {
    let dr = 0.5 * grid.dual_spacing();
    let count = (2.0 * k_max / dr).floor() as usize;
    let mut ks: Vec<f64> = (1..=count).map(|m| 0.5 * m as f64 * dr).collect();
    if ks.last().is_none_or(|&k| k < k_max - 1e-12) {
        ks.push(k_max);
    }
    ks
}

/// Store for individual backscattering solves, keyed by (k, incidence
/// angle) for a fixed solver.
pub trait SampleCache: Sync {
    /// Cached (A(k, θ, −θ), residual).
    fn get(&self, k: f64, angle: f64) -> Option<(Complex64, f64)>;
    fn put(&self, k: f64, angle: f64, amplitude: Complex64, residual: f64);
}

struct NoCache;

impl SampleCache for NoCache {
    fn get(&self, _: f64, _: f64) -> Option<(Complex64, f64)> {
        None
    }
    fn put(&self, _: f64, _: f64, _: Complex64, _: f64) {}
}

/// Solve the forward problem for every (k, θ) and record A(k, θ, −θ).
pub fn backscatter_dataset(solver: &ForwardSolver, ks: &[f64], angle_count: usize) -> Result<BackscatterData> {
    backscatter_dataset_cached(solver, ks, angle_count, &NoCache)
}

/// As `backscatter_dataset`, consulting `cache` before each solve.
pub fn backscatter_dataset_cached(
    solver: &ForwardSolver,
    ks: &[f64],
    angle_count: usize,
    cache: &dyn SampleCache,
) -> Result<BackscatterData> {
    validate_ladder(ks, angle_count)?;
    let mut values = Vec::with_capacity(ks.len());
    let mut failed = Vec::new();
    let mut max_residual: f64 = 0.0;
    for &k in ks {
        let angles: Vec<usize> = (0..angle_count).collect();
        let cached: Vec<Option<(Complex64, f64)>> =
            angles.iter().map(|&a| cache.get(k, 2.0 * PI * a as f64 / angle_count as f64)).collect();
        let op = if cached.iter().all(Option::is_some) { None } else { Some(solver.operator(k)?) };
        let row = par_map(&angles, |&a| {
            let alpha = 2.0 * PI * a as f64 / angle_count as f64;
            if let Some(hit) = cached[a] {
                return Ok(hit);
            }
            let theta = [alpha.cos(), alpha.sin()];
            let op = op.as_ref().expect("operator built for misses");
            let out = solver
                .solve(op, theta)
                .map(|sol| (solver.far_field(&sol, [-theta[0], -theta[1]]), sol.residual));
            if let Ok((v, res)) = out {
                cache.put(k, alpha, v, res);
            }
            out
        });
        let mut out = Vec::with_capacity(angle_count);
        for (a, r) in row.into_iter().enumerate() {
            match r {
                Ok((v, res)) => {
                    max_residual = max_residual.max(res);
                    out.push(v);
                }
                Err(e) => {
                    log::warn!("solve failed at k = {k}, angle index {a}: {e}");
                    failed.push((k, 2.0 * PI * a as f64 / angle_count as f64));
                    out.push(Complex64::new(f64::NAN, f64::NAN));
                }
            }
        }
        values.push(out);
    }
    if !failed.is_empty() {
        return Err(Error::PartialData {
            failed: failed.len(),
            total: ks.len() * angle_count,
            examples: failed.into_iter().take(8).collect(),
        });
    }
    Ok(BackscatterData {
        ks: ks.to_vec(),
        angle_count,
        values,
        potential_hash: solver.spec().hash(),
        tol: solver.options().tol,
        max_residual,
    })
}

/// q̂_B on a Cartesian lattice with its coverage mask, and q_B itself.
#[derive(Debug, Clone)]
pub struct BornApproximation {
    pub spectrum: SpectrumField,
    pub field: RealField,
    /// Lattice points with |ξ| ≤ 2k_max.
    pub covered: Vec<bool>,
    /// Radius of the covered band.
    pub band_max: f64,
    /// Largest |Im q_B| relative to ‖q_B‖ before discarding it.
    pub imaginary_fraction: f64,
}

fn lagrange_weights(nodes: &[f64; 4], x: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    w
}

/// Bicubic (r, angle) interpolation of the polar data at ξ.
fn interpolate(data: &BackscatterData, radii: &[f64], xi: [f64; 2]) -> Complex64 {
    let n = data.angle_count;
    let half = n / 2;
    let r = xi[0].hypot(xi[1]);
    // polar angle of ξ; sample a sits at ξ-angle α_a + π
    let psi = xi[1].atan2(xi[0]) - PI;
    let u = (psi / (2.0 * PI) * n as f64).rem_euclid(n as f64);
    let a0 = u.floor() as isize;
    let ta = u - a0 as f64;
    let wa = lagrange_weights(&[-1.0, 0.0, 1.0, 2.0], ta);
    // radial stencil over extended indices (negative = mirrored through 0)
    let m = radii.len() as isize;
    let mut i0 = match radii.iter().position(|&x| x > r) {
        Some(p) => p as isize - 2,
        None => m - 3,
    };
    i0 = i0.min(m - 4);
    let ext = |i: isize| -> (f64, usize, usize) {
        if i >= 0 {
            (radii[i as usize], i as usize, 0)
        } else {
            (-radii[(-i - 1) as usize], (-i - 1) as usize, half)
        }
    };
    let mut rn = [0.0; 4];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut rows = [Complex64::new(0.0, 0.0); 4];
    for s in 0..4 {
        let (rr, row, shift) = ext(i0 + s as isize);
        rn[s] = rr;
        let mut v = Complex64::new(0.0, 0.0);
        for (t, w) in wa.iter().enumerate() {
            let a = (a0 + t as isize - 1 + shift as isize).rem_euclid(n as isize) as usize;
            v += data.values[row][a] * *w;
        }
        rows[s] = v;
    }
    let wr = lagrange_weights(&rn, r);
    for s in 0..4 {
        acc += rows[s] * wr[s];
    }
    acc
}

/// Resample polar backscattering data onto `grid`'s lattice, zero the
/// uncovered band |ξ| > 2k_max, enforce Hermitian symmetry and invert.
pub fn assemble_qb(data: &BackscatterData, grid: &Grid2D) -> Result<BornApproximation> {
    if data.ks.len() < 4 {
        return Err(Error::Config("at least four wavenumbers are needed for cubic resampling".into()));
    }
    let radii = data.radii();
    let band_max = *radii.last().expect("nonempty");
    if band_max > grid.nyquist() {
        return Err(Error::Config(format!(
            "data band 2k_max = {band_max} exceeds the grid Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    if band_max < grid.inscribed_radius() {
        log::warn!("data cover |ξ| ≤ {band_max:.3} only; lattice extends to {:.3}", grid.inscribed_radius());
    }
    let mut covered = vec![false; grid.len()];
    let mut spectrum = SpectrumField::zeros(*grid);
    for (i, v) in spectrum.values_mut().iter_mut().enumerate() {
        let xi = grid.frequency(i);
        if xi[0].hypot(xi[1]) <= band_max {
            covered[i] = true;
            *v = interpolate(data, &radii, xi);
        }
    }
    // Hermitian symmetrization needs a symmetric coverage mask
    for i in 0..grid.len() {
        let j = grid.negated_index(i);
        if covered[i] != covered[j] {
            covered[i] = false;
            spectrum.values_mut()[i] = Complex64::new(0.0, 0.0);
        }
    }
    spectrum.symmetrize_hermitian();
    let tf = FourierTransformer::new(*grid);
    let (field, imaginary_fraction) = tf.inverse(&spectrum)?.real_part();
    Ok(BornApproximation { spectrum, field, covered, band_max, imaginary_fraction })
}

/// Validated parameters of the j-adic term experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct BornTermConfig {
    pub j: usize,
    pub c0: f64,
    pub eps_ladder: Vec<f64>,
}

impl BornTermConfig {
    pub fn new(j: usize, c0: f64, eps_ladder: Vec<f64>) -> Result<Self> {
        if j < 2 {
            return Err(Error::Config(format!("Born term order j = {j} must be at least 2")));
        }
        if !(c0 > 1.0) {
            return Err(Error::Config(format!("cutoff C0 = {c0} must exceed 1")));
        }
        if eps_ladder.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("ε ladder entries must be positive".into()));
        }
        Ok(BornTermConfig { j, c0, eps_ladder })
    }
}

/// Q̂₁(ξ), …, Q̂_J(ξ) for backscattering at ξ: Q̂₁ = q̂(ξ) (analytic) and
/// Q̂ⱼ = ∫ e^{ikθ·y} (qR_k)^{j−1}(q e^{ikθ·})(y) dy on the solver grid.
pub fn born_terms_with(solver: &ForwardSolver, op: &ResolventOperator, xi: [f64; 2], jmax: usize) -> Result<Vec<Complex64>> {
    let r = xi[0].hypot(xi[1]);
    if r == 0.0 {
        return Err(Error::Domain("Born terms need ξ ≠ 0".into()));
    }
    if ((op.k() - 0.5 * r) / op.k()).abs() > 1e-14 {
        return Err(Error::Config("resolvent wavenumber must equal |ξ|/2".into()));
    }
    let theta = [-xi[0] / r, -xi[1] / r];
    let e = solver.plane_wave(op.k(), theta);
    let h2 = solver.grid().spacing().powi(2);
    let mut g: Vec<Complex64> = e.iter().zip(solver.q_on_support()).map(|(e, q)| e * q).collect();
    let mut out = vec![solver.q_hat(xi)];
    let mut buf = Vec::new();
    for _ in 2..=jmax {
        g = solver.born_step(op, &g, &mut buf);
        out.push(g.iter().zip(&e).map(|(g, e)| g * e).sum::<Complex64>() * h2);
    }
    Ok(out)
}

/// Q̂ⱼ(ξ), j ≥ 2, by j − 1 resolvent applications (no linear solve).
pub fn born_term(solver: &ForwardSolver, j: usize, xi: [f64; 2]) -> Result<Complex64> {
    if j < 2 {
        return Err(Error::Config(format!("Born term order j = {j} must be at least 2")));
    }
    let r = xi[0].hypot(xi[1]);
    if r == 0.0 {
        return Err(Error::Domain("Born terms need ξ ≠ 0".into()));
    }
    let op = solver.operator(0.5 * r)?;
    Ok(born_terms_with(solver, &op, xi, j)?[j - 1])
}

/// χ*·Q̂ⱼ on `grid`'s lattice: born_term at lattice points with |ξ| > C₀,
/// exactly zero elsewhere. Points are grouped by |ξ| so each resolvent
/// is built once.
pub fn filtered_term_spectrum(solver: &ForwardSolver, j: usize, grid: &Grid2D, c0: f64) -> Result<SpectrumField> {
    BornTermConfig::new(j, c0, vec![])?;
    let mut groups: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let r = xi[0].hypot(xi[1]);
        if r > c0 {
            groups.entry(r.to_bits()).or_default().push(i);
        }
    }
    let groups: Vec<(f64, Vec<usize>)> = groups.into_iter().map(|(b, v)| (f64::from_bits(b), v)).collect();
    let results = par_map(&groups, |(r, idx)| -> Result<Vec<(usize, Complex64)>> {
        let op = solver.operator(0.5 * r)?;
        idx.iter()
            .map(|&i| Ok((i, born_terms_with(solver, &op, grid.frequency(i), j)?[j - 1])))
            .collect()
    });
    let mut out = SpectrumField::zeros(*grid);
    for group in results {
        for (i, v) in group? {
            out.values_mut()[i] = v;
        }
    }
    Ok(out)
}

/// Scaling of the Born series along q = ε·q₀.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SeriesScaling {
    pub eps: Vec<f64>,
    /// ‖Q̃ⱼ‖_{L²} per ε for j = 2, 3.
    pub term_norms: [Vec<f64>; 2],
    /// |A − q̂ − Q̂₂ − Q̂₃| at the probe frequency, per ε.
    pub defect: Vec<f64>,
    /// Least-squares log-log slopes: Q̃₂, Q̃₃, defect.
    pub slopes: [f64; 3],
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// For each ε: the filtered terms Q̃₂, Q̃₃ on `spectral`'s lattice above C₀
/// and the defect of the cubic truncation at backscattering frequency `xi`.
pub fn series_scaling(
    base: &PotentialSpec,
    grid: Grid2D,
    options: crate::resolvent::SolverOptions,
    spectral: &Grid2D,
    config: &BornTermConfig,
    xi: [f64; 2],
) -> Result<SeriesScaling> {
    if config.eps_ladder.len() < 2 {
        return Err(Error::Config("ε ladder needs at least two entries".into()));
    }
    let r = xi[0].hypot(xi[1]);
    if r == 0.0 {
        return Err(Error::Domain("probe frequency must be nonzero".into()));
    }
    let theta = [-xi[0] / r, -xi[1] / r];
    let mut term_norms = [Vec::new(), Vec::new()];
    let mut defect = Vec::new();
    for &eps in &config.eps_ladder {
        let s = ForwardSolver::new(&base.scaled(eps), grid, options)?;
        for (slot, j) in term_norms.iter_mut().zip([2, 3]) {
            let f = filtered_term_spectrum(&s, j, spectral, config.c0)?;
            let d2 = spectral.dual_spacing().powi(2);
            slot.push((f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * d2).sqrt() / (2.0 * PI));
        }
        let op = s.operator(0.5 * r)?;
        let sol = s.solve(&op, theta)?;
        let a = s.far_field(&sol, [-theta[0], -theta[1]]);
        let t = born_terms_with(&s, &op, xi, 3)?;
        defect.push((a - t[0] - t[1] - t[2]).norm());
    }
    let e = &config.eps_ladder;
    let slopes = [loglog_slope(e, &term_norms[0]), loglog_slope(e, &term_norms[1]), loglog_slope(e, &defect)];
    Ok(SeriesScaling { eps: e.clone(), term_norms, defect, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::potential_fourier;
    use crate::resolvent::SolverOptions;

    fn solver(eps: f64, n: usize) -> ForwardSolver {
        let spec = PotentialSpec::disk(0.8, eps).unwrap();
        ForwardSolver::new(&spec, Grid2D::new(n, 4.0).unwrap(), SolverOptions { tol: 1e-12, ..Default::default() }).unwrap()
    }

    #[test]
    fn samples_sit_at_minus_two_k_theta() {
        let s = BackscatterSample::new(3.0, 0.3, Complex64::new(0.0, 0.0));
        assert!((s.xi[0].hypot(s.xi[1]) - 6.0).abs() < 1e-15);
        assert!((s.xi[0] + 6.0 * 0.3f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn zero_potential_gives_zero_data_and_zero_qb() {
        let grid = Grid2D::new(64, 4.0).unwrap();
        let s = ForwardSolver::new(&PotentialSpec::zero(), grid, SolverOptions::default()).unwrap();
        let ks = [1.0, 2.0, 3.0, 4.0];
        let data = backscatter_dataset(&s, &ks, 16).unwrap();
        assert!(data.values.iter().flatten().all(|v| v.norm() == 0.0));
        let qb = assemble_qb(&data, &Grid2D::new(32, 4.0).unwrap()).unwrap();
        assert!(qb.field.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_data_reproduce_the_transform() {
        let spec = PotentialSpec::disk(1.0, 1.0).unwrap();
        let grid = Grid2D::new(128, 4.0).unwrap();
        let ks = k_ladder_for_grid(&grid, 16.0);
        let data = BackscatterData::manufactured(&ks, 64, |xi| potential_fourier(&spec, xi).unwrap()).unwrap();
        let qb = assemble_qb(&data, &grid).unwrap();
        let peak = PI;
        for (i, v) in qb.spectrum.values().iter().enumerate() {
            if qb.covered[i] {
                let exact = potential_fourier(&spec, grid.frequency(i)).unwrap();
                assert!((v - exact).norm() <= 1e-3 * peak, "ξ={:?}", grid.frequency(i));
            } else {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn angular_interpolation_handles_off_center_potentials() {
        let spec: PotentialSpec = "disk(radius=0.3, amplitude=1, cx=0.4, cy=-0.2)".parse().unwrap();
        let grid = Grid2D::new(64, 4.0).unwrap();
        let ks = k_ladder_for_grid(&grid, 6.0);
        let data = BackscatterData::manufactured(&ks, 256, |xi| potential_fourier(&spec, xi).unwrap()).unwrap();
        let radii = data.radii();
        let peak = spec.l1_norm();
        for &xi in &[[1.3, -2.2], [0.1, 0.05], [-7.0, 8.5], [11.9, 0.0]] {
            let got = interpolate(&data, &radii, xi);
            let exact = potential_fourier(&spec, xi).unwrap();
            assert!((got - exact).norm() <= 2e-3 * peak, "{xi:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn centered_disk_backscatter_is_point_symmetric() {
        // A(k,θ,−θ) = A(k,−θ,θ) for a potential invariant under x ↦ −x
        let s = solver(0.1, 128);
        let data = backscatter_dataset(&s, &[3.0, 5.0], 16).unwrap();
        let scale = data.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for row in &data.values {
            for a in 0..8 {
                assert!((row[a] - row[a + 8]).norm() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn born_term_is_multilinear() {
        let xi = [7.0, -3.0];
        for j in 2..=3 {
            let a = born_term(&solver(0.1, 128), j, xi).unwrap();
            let b = born_term(&solver(0.2, 128), j, xi).unwrap();
            assert!((b - a * 2f64.powi(j as i32)).norm() <= 1e-12 * b.norm());
        }
        let z = ForwardSolver::new(&PotentialSpec::zero(), Grid2D::new(64, 4.0).unwrap(), SolverOptions::default()).unwrap();
        assert_eq!(born_term(&z, 3, xi).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn series_consistency_is_fourth_order() {
        let xi: [f64; 2] = [10.0, 4.0];
        let r = xi[0].hypot(xi[1]);
        let defect = |eps: f64| {
            let s = solver(eps, 128);
            let op = s.operator(0.5 * r).unwrap();
            let theta = [-xi[0] / r, -xi[1] / r];
            let sol = s.solve(&op, theta).unwrap();
            let a = s.far_field(&sol, [-theta[0], -theta[1]]);
            let t = born_terms_with(&s, &op, xi, 3).unwrap();
            (a - t[0] - t[1] - t[2]).norm()
        };
        let slope = (defect(0.2) / defect(0.1)).log2();
        assert!((slope - 4.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn filtered_spectrum_vanishes_below_cutoff() {
        let s = solver(0.1, 64);
        let grid = Grid2D::new(16, 2.0).unwrap();
        let f = filtered_term_spectrum(&s, 2, &grid, 5.0).unwrap();
        let mut nonzero = 0;
        for (i, v) in f.values().iter().enumerate() {
            let xi = grid.frequency(i);
            if xi[0].hypot(xi[1]) <= 5.0 {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            } else if v.norm() > 0.0 {
                nonzero += 1;
            }
        }
        assert!(nonzero > 0);
        let above = filtered_term_spectrum(&s, 2, &grid, 2.0 * grid.nyquist()).unwrap();
        assert!(above.values().iter().all(|v| v.norm() == 0.0));
        assert!(BornTermConfig::new(2, 1.0, vec![]).is_err());
    }

    #[test]
    fn even_potential_terms_are_point_symmetric() {
        // For q(−x) = q(x): Q̂ⱼ(−ξ) = Q̂ⱼ(ξ); Hermitian symmetry does not hold
        // because the outgoing resolvent is not conjugation invariant.
        let s = solver(0.1, 128);
        let xi = [9.0, 5.0];
        for j in 2..=3 {
            let a = born_term(&s, j, xi).unwrap();
            let b = born_term(&s, j, [-xi[0], -xi[1]]).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm(), "j={j}: {a} vs {b}");
            assert!(a.im.abs() > 1e-3 * a.norm());
        }
    }
}
