//! Outgoing Helmholtz resolvent R_k with symbol 1/(k² − |ξ|² + i0), the
//! Lippmann–Schwinger forward solver and far-field evaluation.
//!
//! R_k is convolution with G(x) = −(i/4) H₀⁽¹⁾(k|x|), truncated at radius
//! L_t = L (the box half-width). The truncated kernel has the smooth
//! spectrum
//!
//!   Ĝ_t(s) = [1 + (iπ/2) L_t (s J₁(sL_t) H₀(kL_t) − k J₀(sL_t) H₁(kL_t))] / (k² − s²),
//!
//! so sampling it on the dual lattice and multiplying FFTs reproduces the
//! free-space convolution exactly for sources and targets inside |x| < L/2.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FourierTransformer, Grid2D};
use crate::ComplexField;
use crate::krylov::{gmres, GmresOptions};
use crate::potentials::{FourierEvaluator, PotentialSpec};
use crate::special::{bessel_j0, bessel_j1, hankel0, hankel1};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Spectrum of the outgoing kernel truncated at radius `lt`, at |ξ| = s.
pub fn truncated_kernel_spectrum(k: f64, lt: f64, s: f64) -> Complex64 {
    let h0 = hankel0(k * lt);
    let h1 = hankel1(k * lt);
    let d = s - k;
    if d.abs() > 1e-6 / lt {
        let (j0, j1) = (bessel_j0(s * lt), bessel_j1(s * lt));
        let num = 1.0 + I * (0.5 * PI * lt) * (s * j1 * h0 - k * j0 * h1);
        return num / ((k - s) * (k + s));
    }
    // N(s) vanishes at s = k; use its Taylor expansion there.
    let x = k * lt;
    let (j0, j1) = (bessel_j0(x), bessel_j1(x));
    let n1 = I * (0.5 * PI * lt) * (x * (j0 * h0 + j1 * h1));
    let dj1 = j0 - j1 / x;
    let n2 = I * (0.5 * PI * lt) * (lt * j0 * h0 - k * lt * lt * j1 * h0 + k * lt * lt * dj1 * h1);
    -(n1 + 0.5 * n2 * d) / (k + s)
}

/// Outgoing resolvent on one grid at one wavenumber. Immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct ResolventOperator {
    grid: Grid2D,
    k: f64,
    /// Ĝ_t on the lattice (FFT order), pre-divided by n².
    kernel: Vec<Complex64>,
    transformer: FourierTransformer<f64>,
}

impl ResolventOperator {
    pub fn new(grid: Grid2D, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("wavenumber k = {k} must be positive")));
        }
        if k > 0.5 * grid.nyquist() {
            return Err(Error::Resolution(format!(
                "k = {k} exceeds half the grid Nyquist frequency {:.3}; refine the grid",
                grid.nyquist()
            )));
        }
        let lt = grid.half_width();
        let scale = 1.0 / grid.len() as f64;
        let kernel = (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i);
                truncated_kernel_spectrum(k, lt, xi[0].hypot(xi[1])) * scale
            })
            .collect();
        Ok(ResolventOperator { grid, k, kernel, transformer: FourierTransformer::new(grid) })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Radius of the disk on which sources and results are exact.
    pub fn valid_radius(&self) -> f64 {
        0.5 * self.grid.half_width()
    }

    /// Kernel spectrum Ĝ_t at lattice index `idx`.
    pub fn symbol(&self, idx: usize) -> Complex64 {
        self.kernel[idx] * self.grid.len() as f64
    }

    /// R_k applied to full-grid samples, in place (no masking).
    pub fn apply_in_place(&self, data: &mut [Complex64]) {
        self.transformer.raw_forward(data);
        for (d, g) in data.iter_mut().zip(&self.kernel) {
            *d *= g;
        }
        self.transformer.raw_inverse(data);
    }
}

/// g = R_k f. Samples of f outside the valid disk |x| < L/2 are dropped
/// (with a warning); the result is zeroed there as well.
pub fn apply_resolvent(op: &ResolventOperator, f: &ComplexField) -> Result<ComplexField> {
    if f.grid() != op.grid() {
        return Err(Error::Config("field grid does not match resolvent grid".into()));
    }
    let grid = *op.grid();
    let rv = op.valid_radius();
    let mut data = f.values().to_vec();
    let mut dropped = false;
    for (i, v) in data.iter_mut().enumerate() {
        let p = grid.point(i);
        if p[0].hypot(p[1]) >= rv && *v != Complex64::new(0.0, 0.0) {
            dropped = true;
            *v = Complex64::new(0.0, 0.0);
        }
    }
    if dropped {
        log::warn!("source extends beyond |x| < {rv}; masked");
    }
    op.apply_in_place(&mut data);
    for (i, v) in data.iter_mut().enumerate() {
        let p = grid.point(i);
        if p[0].hypot(p[1]) >= rv {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ComplexField::new(grid, data)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative residual target, in (1e-14, 1e-2).
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, restart: 60, max_iterations: 600 }
    }
}

/// Scattered field for one incident direction.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub k: f64,
    pub theta: [f64; 2],
    /// u_s on the grid, valid on |x| < L/2 and zero outside.
    pub u_s: ComplexField,
    pub iterations: usize,
    /// ‖u_s − R(q e) − R(q u_s)‖ / ‖R(q e)‖ on the support of q.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Lippmann–Schwinger solver for one potential on one grid.
#[derive(Debug, Clone)]
pub struct ForwardSolver {
    grid: Grid2D,
    spec: PotentialSpec,
    evaluator: FourierEvaluator,
    support: Vec<usize>,
    q_support: Vec<f64>,
    options: SolverOptions,
}

fn unit(theta: [f64; 2]) -> Result<[f64; 2]> {
    let n = theta[0].hypot(theta[1]);
    if !((n - 1.0).abs() < 1e-12) {
        return Err(Error::Config(format!("direction {theta:?} is not a unit vector")));
    }
    Ok(theta)
}

impl ForwardSolver {
    pub fn new(spec: &PotentialSpec, grid: Grid2D, options: SolverOptions) -> Result<Self> {
        if !(options.tol > 1e-14 && options.tol < 1e-2) {
            return Err(Error::Config(format!("solver tolerance {} outside (1e-14, 1e-2)", options.tol)));
        }
        let rs = spec.support_radius();
        if grid.half_width() < 2.0 * rs + 1.0 - 1e-12 {
            return Err(Error::Config(format!(
                "box half-width {} must be at least 2·support + 1 = {}",
                grid.half_width(),
                2.0 * rs + 1.0
            )));
        }
        let q = spec.sample_on_grid(&grid);
        let (support, q_support): (Vec<usize>, Vec<f64>) =
            q.values().iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).unzip();
        Ok(ForwardSolver {
            grid,
            spec: spec.clone(),
            evaluator: FourierEvaluator::new(spec, 8.0 * grid.nyquist())?,
            support,
            q_support,
            options,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn evaluator(&self) -> &FourierEvaluator {
        &self.evaluator
    }

    /// Flat grid indices where the sampled q is nonzero.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn q_on_support(&self) -> &[f64] {
        &self.q_support
    }

    pub fn operator(&self, k: f64) -> Result<ResolventOperator> {
        ResolventOperator::new(self.grid, k)
    }

    /// e^{ikθ·x} on the support.
    pub fn plane_wave(&self, k: f64, theta: [f64; 2]) -> Vec<Complex64> {
        self.support
            .iter()
            .map(|&i| {
                let p = self.grid.point(i);
                Complex64::from_polar(1.0, k * (theta[0] * p[0] + theta[1] * p[1]))
            })
            .collect()
    }

    /// (R(q g))|_supp for g given on the support.
    pub fn resolve_on_support(&self, op: &ResolventOperator, g: &[Complex64], buf: &mut Vec<Complex64>) -> Vec<Complex64> {
        buf.clear();
        buf.resize(self.grid.len(), Complex64::new(0.0, 0.0));
        for ((&i, &q), v) in self.support.iter().zip(&self.q_support).zip(g) {
            buf[i] = q * v;
        }
        op.apply_in_place(buf);
        self.support.iter().map(|&i| buf[i]).collect()
    }

    /// q · R(g) on the support: one step of the Born recursion.
    pub fn born_step(&self, op: &ResolventOperator, g: &[Complex64], buf: &mut Vec<Complex64>) -> Vec<Complex64> {
        // g here is already multiplied by q; R acts on it directly
        buf.clear();
        buf.resize(self.grid.len(), Complex64::new(0.0, 0.0));
        for (&i, v) in self.support.iter().zip(g) {
            buf[i] = *v;
        }
        op.apply_in_place(buf);
        self.support.iter().zip(&self.q_support).map(|(&i, q)| buf[i] * q).collect()
    }

    fn check_operator(&self, op: &ResolventOperator) -> Result<()> {
        if *op.grid() != self.grid {
            return Err(Error::Config("resolvent grid does not match solver grid".into()));
        }
        Ok(())
    }

    fn finish(&self, op: &ResolventOperator, theta: [f64; 2], v: &[Complex64], iterations: usize, history: Vec<f64>) -> ScatteringSolution {
        let e = self.plane_wave(op.k(), theta);
        let mut buf = Vec::new();
        let b = self.resolve_on_support(op, &e, &mut buf);
        let rv = self.resolve_on_support(op, v, &mut buf);
        let num: f64 = v.iter().zip(&b).zip(&rv).map(|((v, b), r)| (v - b - r).norm_sqr()).sum();
        let den: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        let residual = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        // full field u_s = R(q (e + v))
        let total: Vec<Complex64> = e.iter().zip(v).map(|(a, b)| a + b).collect();
        buf.clear();
        buf.resize(self.grid.len(), Complex64::new(0.0, 0.0));
        for ((&i, &q), t) in self.support.iter().zip(&self.q_support).zip(&total) {
            buf[i] = q * t;
        }
        op.apply_in_place(&mut buf);
        let rmax = op.valid_radius();
        for (i, z) in buf.iter_mut().enumerate() {
            let p = self.grid.point(i);
            if p[0].hypot(p[1]) >= rmax {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        ScatteringSolution {
            k: op.k(),
            theta,
            u_s: ComplexField::new(self.grid, buf).expect("grid-sized buffer"),
            iterations,
            residual,
            history,
        }
    }

    /// Solve (I − T_k) u_s = R_k(q e^{ikθ·}), T_k f = R_k(q f), by GMRES on
    /// the support of q.
    pub fn solve(&self, op: &ResolventOperator, theta: [f64; 2]) -> Result<ScatteringSolution> {
        self.check_operator(op)?;
        let theta = unit(theta)?;
        if self.support.is_empty() {
            return Ok(self.finish(op, theta, &[], 0, vec![0.0]));
        }
        let e = self.plane_wave(op.k(), theta);
        let mut buf = Vec::new();
        let b = self.resolve_on_support(op, &e, &mut buf);
        let opts = GmresOptions {
            tol: self.options.tol * 0.5,
            restart: self.options.restart,
            max_iterations: self.options.max_iterations,
        };
        let out = gmres(
            |v, o| {
                let r = self.resolve_on_support(op, v, &mut buf);
                for ((oi, vi), ri) in o.iter_mut().zip(v).zip(&r) {
                    *oi = vi - ri;
                }
            },
            &b,
            opts,
        )?;
        let sol = self.finish(op, theta, &out.x, out.iterations, out.history);
        if sol.residual > self.options.tol {
            return Err(Error::NoConvergence {
                iterations: sol.iterations,
                residual: sol.residual,
                history: sol.history,
            });
        }
        Ok(sol)
    }

    /// Neumann series u_s = Σ_j T_k^j R_k(q e): the cross-check oracle for
    /// weak potentials. Fails if the terms stop shrinking.
    pub fn solve_neumann(&self, op: &ResolventOperator, theta: [f64; 2], max_terms: usize) -> Result<ScatteringSolution> {
        self.check_operator(op)?;
        let theta = unit(theta)?;
        let e = self.plane_wave(op.k(), theta);
        let mut buf = Vec::new();
        let mut term = self.resolve_on_support(op, &e, &mut buf);
        let b_norm = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut sum = term.clone();
        let mut history = Vec::new();
        if b_norm == 0.0 {
            return Ok(self.finish(op, theta, &sum, 0, vec![0.0]));
        }
        for j in 1..=max_terms {
            term = self.resolve_on_support(op, &term, &mut buf);
            let t = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / b_norm;
            history.push(t);
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            if t < 0.1 * self.options.tol {
                return Ok(self.finish(op, theta, &sum, j, history));
            }
            if j > 3 && t > history[j - 2] {
                break;
            }
        }
        let residual = *history.last().unwrap_or(&f64::INFINITY);
        Err(Error::NoConvergence { iterations: history.len(), residual, history })
    }

    /// A(k, θ, θ') = ∫ e^{−ikθ'·y} q(y) u(k, θ, y) dy. The incident part
    /// is the analytic q̂(k(θ' − θ)); the scattered part is the grid
    /// trapezoid sum.
    pub fn far_field(&self, sol: &ScatteringSolution, theta_out: [f64; 2]) -> Complex64 {
        let k = sol.k;
        let xi = [k * (theta_out[0] - sol.theta[0]), k * (theta_out[1] - sol.theta[1])];
        let h2 = self.grid.spacing().powi(2);
        let scattered: Complex64 = self
            .support
            .iter()
            .zip(&self.q_support)
            .map(|(&i, &q)| {
                let p = self.grid.point(i);
                Complex64::from_polar(q * h2, -k * (theta_out[0] * p[0] + theta_out[1] * p[1])) * sol.u_s.values()[i]
            })
            .sum();
        self.evaluator.eval(xi) + scattered
    }

    /// q̂(ξ) through the solver's prepared evaluator.
    pub fn q_hat(&self, xi: [f64; 2]) -> Complex64 {
        self.evaluator.eval(xi)
    }
}

/// One-shot solve of the scattering problem for (k, θ).
pub fn solve_scattering(
    spec: &PotentialSpec,
    grid: Grid2D,
    k: f64,
    theta: [f64; 2],
    tol: f64,
) -> Result<ScatteringSolution> {
    let solver = ForwardSolver::new(spec, grid, SolverOptions { tol, ..Default::default() })?;
    let op = solver.operator(k)?;
    solver.solve(&op, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{composite, gauss_legendre};
    use approx::assert_relative_eq;

    #[test]
    fn kernel_spectrum_matches_direct_hankel_quadrature() {
        // Oracle: Ĝ_t(s) = 2π ∫₀^L −(i/4) H₀(kr) J₀(sr) r dr, graded toward r = 0.
        let (k, lt) = (8.0, 4.0);
        let mut nodes: Vec<(f64, f64)> = Vec::new();
        let rule = gauss_legendre(20);
        let mut hi = 0.05;
        for _ in 0..30 {
            nodes.extend(rule.mapped(hi * 0.5, hi));
            hi *= 0.5;
        }
        nodes.extend(composite(0.05, lt, 0.05, 20));
        for &s in &[0.0, 2.4, 7.9, 8.0, 8.0 + 1e-9, 16.0, 40.0] {
            let direct: Complex64 = nodes
                .iter()
                .map(|&(r, w)| -I * 0.25 * hankel0(k * r) * (bessel_j0(s * r) * r * w * 2.0 * PI))
                .sum();
            let got = truncated_kernel_spectrum(k, lt, s);
            assert!((got - direct).norm() <= 1e-9 * direct.norm().max(1e-3), "s={s}: {got} vs {direct}");
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let grid = Grid2D::new(64, 4.0).unwrap();
        let op = ResolventOperator::new(grid, 3.0).unwrap();
        let g = apply_resolvent(&op, &ComplexField::zeros(grid)).unwrap();
        assert!(g.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_unresolved_wavenumber() {
        let grid = Grid2D::new(64, 4.0).unwrap();
        assert!(matches!(ResolventOperator::new(grid, 30.0), Err(Error::Resolution(_))));
        assert!(matches!(ResolventOperator::new(grid, -1.0), Err(Error::Config(_))));
    }

    /// g(r) = (2π)⁻¹ [p.v.∫₀^∞ f̂(s) J₀(sr) s/(k² − s²) ds − (iπ/2) f̂(k) J₀(kr)]
    /// for radial f, with the p.v. split symmetrically about s = k.
    fn radial_oracle(fhat: impl Fn(f64) -> f64, k: f64, r: f64) -> Complex64 {
        let big = |s: f64| fhat(s) * bessel_j0(s * r) * s / (k + s);
        let fk = big(k);
        let near: f64 = composite(0.0, 2.0 * k, 0.25, 30)
            .into_iter()
            .map(|(s, w)| w * (big(s) - fk) / (k - s))
            .sum();
        let far: f64 = composite(2.0 * k, 200.0, 0.25, 30)
            .into_iter()
            .map(|(s, w)| w * big(s) / (k - s))
            .sum();
        Complex64::new(near + far, -0.5 * PI * fhat(k) * bessel_j0(k * r)) / (2.0 * PI)
    }

    #[test]
    fn resolvent_matches_radial_principal_value_oracle() {
        let sigma: f64 = 0.15;
        let k = 8.0;
        let grid = Grid2D::new(256, 4.0).unwrap();
        let op = ResolventOperator::new(grid, k).unwrap();
        let f = ComplexField::from_fn(grid, |[x, y]| {
            Complex64::new((-(x * x + y * y) / (2.0 * sigma * sigma)).exp(), 0.0)
        });
        let g = apply_resolvent(&op, &f).unwrap();
        let fhat = |s: f64| 2.0 * PI * sigma * sigma * (-(sigma * s).powi(2) / 2.0).exp();
        let n = grid.n();
        let scale = radial_oracle(fhat, k, 0.0).norm();
        for j in [0usize, 3, 10, 17, 32, 48] {
            let idx = (n / 2) * n + n / 2 + j;
            let r = grid.point(idx)[0];
            let oracle = radial_oracle(fhat, k, r);
            let got = g.values()[idx];
            assert!((got - oracle).norm() <= 1e-6 * scale, "r={r}: {got} vs {oracle}");
        }
    }

    #[test]
    fn helmholtz_residual_is_second_order() {
        // (Δ_h + k²) R f − f on the interior, f a smooth compact bump
        let k = 5.0;
        let residual = |n: usize| {
            let grid = Grid2D::new(n, 4.0).unwrap();
            let op = ResolventOperator::new(grid, k).unwrap();
            let bumpf = |x: f64, y: f64| {
                let t = (x * x + y * y) / 0.64;
                if t < 1.0 { (1.0 - 1.0 / (1.0 - t)).exp() } else { 0.0 }
            };
            let f = ComplexField::from_fn(grid, |[x, y]| Complex64::new(bumpf(x, y), 0.0));
            let g = apply_resolvent(&op, &f).unwrap();
            let h = grid.spacing();
            let (mut num, mut den) = (0.0, 0.0);
            for iy in 1..n - 1 {
                for ix in 1..n - 1 {
                    let (x, y) = (grid.coord(ix), grid.coord(iy));
                    if x.hypot(y) > 1.5 {
                        continue;
                    }
                    let v = |a: usize, b: usize| g.values()[b * n + a];
                    let lap = (v(ix + 1, iy) + v(ix - 1, iy) + v(ix, iy + 1) + v(ix, iy - 1) - 4.0 * v(ix, iy)) / (h * h);
                    let r = lap + k * k * v(ix, iy) - bumpf(x, y);
                    num += r.norm_sqr();
                    den += bumpf(x, y).powi(2);
                }
            }
            (num / den).sqrt()
        };
        let (r1, r2) = (residual(128), residual(256));
        let order = (r1 / r2).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order} ({r1}, {r2})");
    }

    #[test]
    fn gmres_agrees_with_neumann_oracle() {
        let spec = PotentialSpec::disk(0.8, 0.1).unwrap();
        let grid = Grid2D::new(128, 4.0).unwrap();
        let tol = 1e-10;
        let solver = ForwardSolver::new(&spec, grid, SolverOptions { tol, ..Default::default() }).unwrap();
        let op = solver.operator(8.0).unwrap();
        let a = solver.solve(&op, [1.0, 0.0]).unwrap();
        let b = solver.solve_neumann(&op, [1.0, 0.0], 200).unwrap();
        assert!(a.residual <= tol && a.iterations <= 60);
        let diff: f64 = a.u_s.values().iter().zip(b.u_s.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
        let norm: f64 = a.u_s.values().iter().map(|x| x.norm_sqr()).sum();
        assert!((diff / norm).sqrt() <= 10.0 * tol);
    }

    #[test]
    fn zero_potential_scatters_nothing() {
        let grid = Grid2D::new(64, 4.0).unwrap();
        let solver = ForwardSolver::new(&PotentialSpec::zero(), grid, SolverOptions::default()).unwrap();
        let op = solver.operator(4.0).unwrap();
        let sol = solver.solve(&op, [0.0, 1.0]).unwrap();
        assert!(sol.u_s.values().iter().all(|z| z.norm() == 0.0));
        assert_eq!(solver.far_field(&sol, [1.0, 0.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn born_dominance_scales_linearly() {
        let grid = Grid2D::new(128, 4.0).unwrap();
        let ratio = |eps: f64| {
            let spec = PotentialSpec::disk(0.8, eps).unwrap();
            let solver = ForwardSolver::new(&spec, grid, SolverOptions { tol: 1e-12, ..Default::default() }).unwrap();
            let op = solver.operator(6.0).unwrap();
            let sol = solver.solve(&op, [1.0, 0.0]).unwrap();
            let e = solver.plane_wave(6.0, [1.0, 0.0]);
            let mut buf = Vec::new();
            let first = solver.resolve_on_support(&op, &e, &mut buf);
            let us: Vec<Complex64> = solver.support().iter().map(|&i| sol.u_s.values()[i]).collect();
            let num: f64 = us.iter().zip(&first).map(|(a, b)| (a - b).norm_sqr()).sum();
            let den: f64 = us.iter().map(|a| a.norm_sqr()).sum();
            (num / den).sqrt()
        };
        let (r1, r2) = (ratio(0.1), ratio(0.05));
        assert_relative_eq!(r1 / r2, 2.0, max_relative = 0.2);
    }

    #[test]
    fn weak_far_field_approaches_fourier_transform() {
        let grid = Grid2D::new(128, 4.0).unwrap();
        let err = |eps: f64| {
            let spec = PotentialSpec::disk(0.8, eps).unwrap();
            let solver = ForwardSolver::new(&spec, grid, SolverOptions { tol: 1e-12, ..Default::default() }).unwrap();
            let op = solver.operator(5.0).unwrap();
            let sol = solver.solve(&op, [1.0, 0.0]).unwrap();
            let out = [0.6, 0.8];
            let a = solver.far_field(&sol, out);
            (a - solver.q_hat([5.0 * (out[0] - 1.0), 5.0 * out[1]])).norm() / (eps * eps)
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!((e1 / e2 - 1.0).abs() < 0.1, "{e1} {e2}");
    }
}
