//! The cubic Born term Q̂₃(η) from its three-term characterization:
//!
//! Q̂₃(η) = (2π)⁻⁴ [ −P − 2iπ Q″ − π² Q′ ]
//!
//! with P = p.v.∬ q̂(ξ)q̂(η−τ)q̂(τ−ξ) / (D₁(ξ)D₂(τ)) dξ dτ,
//! Q″ = |η|⁻¹ p.v.∫_{ℝ²}∫_Γ q̂(ξ)q̂(η−τ)q̂(τ−ξ) / D₂(τ) dσ(ξ) dτ and
//! Q′ = |η|⁻² ∫_Γ∫_Γ q̂(ξ)q̂(η−τ)q̂(τ−ξ) dσ dσ, where Γ = Γ(η).
//!
//! Both plane variables use the same polar rule about η/2 (collar pairs,
//! dyadic coronas, outer region). Since q̂(τ−ξ) = ∫ q(y)e^{−i(τ−ξ)·y} dy
//! each double sum factors into ∫ q(y) S_τ(y) S_ξ(y) dy, with the ring
//! sums S evaluated by `transform`.

pub mod battery;
pub mod geometry;
pub mod swap;
pub mod transform;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use geometry::{
    circle_quadrature, corona_denominator_bound, reflection_identities, reflection_map, AnnulusPartition, Band, BoundCheck,
    CircleFrame, DenominatorPair, RadialNode, Region,
};
pub use battery::{lemma_battery, BatterySize, LemmaCheck};
pub use swap::{measure_swap_check, SwapBounds};

use crate::error::{Error, Result};
use crate::parallel::par_map;
use crate::potentials::{FourierEvaluator, PolarPatch, PotentialSpec};
use crate::quadrature::composite;
use transform::{patch_bilinear, physical_angles, ring_sum_on_patch, Ring};

/// Coefficient of P in Q̂₃ (before the (2π)⁻⁴ normalization).
pub const FULL_PV_COEFF: Complex64 = Complex64::new(-1.0, 0.0);
/// Coefficient of Q″.
pub const MIXED_PV_COEFF: Complex64 = Complex64::new(0.0, -2.0 * PI);
/// Coefficient of Q′.
pub const CIRCLE_COEFF: Complex64 = Complex64::new(-PI * PI, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Q3Params {
    /// Nodes on Γ(η) and the minimum per ring (power of two ≥ 32).
    pub m: usize,
    /// Outer truncation radius, measured from η/2. None: |η|/2 + 128.
    pub t_max: Option<f64>,
    pub radial_order: usize,
    pub panel_width: f64,
    pub collar_width: f64,
    pub j0: usize,
    /// Emit each collar pair outside-in instead of inside-out.
    pub reverse_collar: bool,
    /// Coarse-vs-fine disagreement beyond this (relative) is an error.
    pub max_relative_error: f64,
}

impl Default for Q3Params {
    fn default() -> Self {
        Q3Params {
            m: 64,
            t_max: None,
            radial_order: 12,
            panel_width: 2.0,
            collar_width: 2.0,
            j0: 1,
            reverse_collar: false,
            max_relative_error: 1e-2,
        }
    }
}

impl Q3Params {
    pub fn truncation(&self, eta_norm: f64) -> f64 {
        self.t_max.unwrap_or(0.5 * eta_norm + 128.0)
    }

    /// Same rule with fewer radial and angular nodes.
    pub fn coarsened(&self) -> Self {
        Q3Params { m: (self.m / 2).max(32), radial_order: (self.radial_order * 2 / 3).max(6), ..self.clone() }
    }
}

/// The three terms at one η (unnormalized), with Q̂₃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Q3Terms {
    pub full_pv: Complex64,
    pub mixed_pv: Complex64,
    pub circle_circle: Complex64,
}

impl Q3Terms {
    pub fn total(&self) -> Complex64 {
        (FULL_PV_COEFF * self.full_pv + MIXED_PV_COEFF * self.mixed_pv + CIRCLE_COEFF * self.circle_circle) / (2.0 * PI).powi(4)
    }
}

/// Prepared quadrature for one (q, η).
pub struct Q3Engine {
    eta: [f64; 2],
    params: Q3Params,
    frame: CircleFrame,
    partition: AnnulusPartition,
    evaluator: FourierEvaluator,
    radial: Vec<RadialNode>,
    ring_m: Vec<usize>,
    patches: Vec<PolarPatch>,
    m_psi: usize,
    l1: f64,
}

impl Q3Engine {
    pub fn new(spec: &PotentialSpec, eta: [f64; 2], params: &Q3Params) -> Result<Self> {
        let r = eta[0].hypot(eta[1]);
        if !(r > 4.0) {
            return Err(Error::Domain(format!("|η| = {r} must exceed 4 for the corona partition")));
        }
        if params.m < 32 || !params.m.is_power_of_two() {
            return Err(Error::Config(format!("m = {} must be a power of two ≥ 32", params.m)));
        }
        if params.radial_order < 2 || !(params.panel_width > 0.0) {
            return Err(Error::Config("radial order ≥ 2 and a positive panel width are required".into()));
        }
        let r0 = 0.5 * r;
        let t = params.truncation(r);
        if !(t > r0 + params.collar_width + 1.0) {
            return Err(Error::Config(format!(
                "truncation T = {t} must exceed |η|/2 + collar + 1 = {}",
                r0 + params.collar_width + 1.0
            )));
        }
        let partition = AnnulusPartition::new(eta, params.collar_width, params.j0)?;
        let frame = CircleFrame::new(eta, params.m)?;
        let evaluator = FourierEvaluator::new(spec, 2.0 * t + r + 8.0)?;
        let radial = partition.radial_nodes(t, params.panel_width, params.radial_order, params.reverse_collar);
        let rs = spec.support_radius();
        let ring_m = radial
            .iter()
            .map(|n| params.m.max(((4.0 * n.rho * rs + 48.0).ceil() as usize).next_power_of_two()))
            .collect();
        let patches = spec.physical_patches(2.0 * t + 4.0);
        let r_max = patches.iter().map(|p| p.radius).fold(0.0, f64::max);
        Ok(Q3Engine {
            eta,
            params: params.clone(),
            frame,
            partition,
            evaluator,
            radial,
            ring_m,
            patches,
            m_psi: physical_angles(t.max(r0), r_max),
            l1: spec.l1_norm(),
        })
    }

    pub fn eta(&self) -> [f64; 2] {
        self.eta
    }

    pub fn partition(&self) -> &AnnulusPartition {
        &self.partition
    }

    pub fn frame(&self) -> &CircleFrame {
        &self.frame
    }

    pub fn node_count(&self) -> usize {
        self.ring_m.iter().sum()
    }

    fn eta_norm(&self) -> f64 {
        2.0 * self.frame.radius
    }

    fn node(&self, rho: f64, m: usize, j: usize) -> [f64; 2] {
        let phi = 2.0 * PI * j as f64 / m as f64;
        [self.frame.center[0] + rho * phi.cos(), self.frame.center[1] + rho * phi.sin()]
    }

    /// D₂ at distance d = ρ − |η|/2 from Γ, in factored form.
    fn d2(&self, d: f64) -> f64 {
        -d * (self.eta_norm() + d)
    }

    /// Plane rings with coefficients w q̂(f(ν)) / D(ν).
    fn plane_rings<F: Fn([f64; 2], f64) -> Complex64 + Sync>(&self, f: F) -> Vec<Ring> {
        let idx: Vec<usize> = (0..self.radial.len()).collect();
        par_map(&idx, |&i| {
            let n = self.radial[i];
            let m = self.ring_m[i];
            let w = n.weight * n.rho * 2.0 * PI / m as f64;
            Ring { rho: n.rho, coeffs: (0..m).map(|j| f(self.node(n.rho, m, j), n.d) * w).collect() }
        })
    }

    fn circle_ring<F: Fn([f64; 2]) -> Complex64>(&self, f: F) -> Ring {
        Ring {
            rho: self.frame.radius,
            coeffs: self.frame.nodes.iter().zip(&self.frame.weights).map(|(x, w)| f(*x) * *w).collect(),
        }
    }

    fn tau_rings(&self) -> Vec<Ring> {
        let eta = self.eta;
        self.plane_rings(|nu, d| self.evaluator.eval([eta[0] - nu[0], eta[1] - nu[1]]) / self.d2(d))
    }

    fn xi_rings(&self) -> Vec<Ring> {
        self.plane_rings(|nu, d| self.evaluator.eval(nu) / self.d2(d))
    }

    fn bilinear(&self, a: &[Ring], b: &[Ring]) -> Complex64 {
        self.patches
            .iter()
            .map(|p| {
                let sa = ring_sum_on_patch(a, -1.0, p, self.m_psi);
                let sb = ring_sum_on_patch(b, 1.0, p, self.m_psi);
                patch_bilinear(p, &sa, &sb)
            })
            .sum()
    }

    /// Q′ by the tensor-product circle rule.
    pub fn circle_circle(&self) -> Complex64 {
        let eta = self.eta;
        let ev = &self.evaluator;
        let f = &self.frame;
        let rows: Vec<usize> = (0..f.m).collect();
        let parts = par_map(&rows, |&s| {
            let xi = f.nodes[s];
            let a = ev.eval(xi) * f.weights[s];
            f.nodes
                .iter()
                .zip(&f.weights)
                .map(|(tau, w)| ev.eval([eta[0] - tau[0], eta[1] - tau[1]]) * ev.eval([tau[0] - xi[0], tau[1] - xi[1]]) * *w)
                .sum::<Complex64>()
                * a
        });
        parts.into_iter().sum::<Complex64>() / (self.eta_norm() * self.eta_norm())
    }

    /// Q″ through the ring transforms.
    pub fn mixed_pv(&self) -> Complex64 {
        let circle = [self.circle_ring(|x| self.evaluator.eval(x))];
        self.bilinear(&self.tau_rings(), &circle) / self.eta_norm()
    }

    /// P through the ring transforms.
    pub fn full_pv(&self) -> Complex64 {
        // D₁(ξ) = −D₂(ξ)
        -self.bilinear(&self.tau_rings(), &self.xi_rings())
    }

    /// All three terms, sharing the τ rings.
    pub fn terms(&self) -> Q3Terms {
        let tau = self.tau_rings();
        let xi = self.xi_rings();
        let circle = [self.circle_ring(|x| self.evaluator.eval(x))];
        let mut full = Complex64::new(0.0, 0.0);
        let mut mixed = Complex64::new(0.0, 0.0);
        for p in &self.patches {
            let st = ring_sum_on_patch(&tau, -1.0, p, self.m_psi);
            let sx = ring_sum_on_patch(&xi, 1.0, p, self.m_psi);
            let sc = ring_sum_on_patch(&circle, 1.0, p, self.m_psi);
            full -= patch_bilinear(p, &st, &sx);
            mixed += patch_bilinear(p, &st, &sc);
        }
        Q3Terms { full_pv: full, mixed_pv: mixed / self.eta_norm(), circle_circle: self.circle_circle() }
    }

    /// P with the relabeled integrand ξ′ = η − τ, τ′ = η − ξ and
    /// denominators evaluated from their dot-product forms.
    pub fn full_pv_relabeled(&self) -> Complex64 {
        let eta = self.eta;
        let pair = DenominatorPair { eta };
        let ev = &self.evaluator;
        // roles: τ′ carries q̂(η−τ′)/D₁(η−τ′), ξ′ carries q̂(ξ′)/D₂(η−ξ′)
        let a = self.plane_rings(|nu, _| ev.eval([eta[0] - nu[0], eta[1] - nu[1]]) / pair.d1([eta[0] - nu[0], eta[1] - nu[1]]));
        let b = self.plane_rings(|nu, _| ev.eval(nu) / pair.d2([eta[0] - nu[0], eta[1] - nu[1]]));
        self.bilinear(&a, &b)
    }

    /// P by the O(N²) double sum with q̂(τ−ξ) evaluated pointwise.
    pub fn full_pv_direct(&self) -> Complex64 {
        let (nodes, tau_c, xi_c) = self.flat_nodes();
        let ev = &self.evaluator;
        let idx: Vec<usize> = (0..nodes.len()).collect();
        let parts = par_map(&idx, |&b| {
            let tb = nodes[b];
            nodes
                .iter()
                .zip(&xi_c)
                .map(|(xa, ca)| ev.eval([tb[0] - xa[0], tb[1] - xa[1]]) * ca)
                .sum::<Complex64>()
                * tau_c[b]
        });
        -parts.into_iter().sum::<Complex64>()
    }

    /// Q″ by the O(N·m) double sum.
    pub fn mixed_pv_direct(&self) -> Complex64 {
        let (nodes, tau_c, _) = self.flat_nodes();
        let ev = &self.evaluator;
        let f = &self.frame;
        let circle: Vec<Complex64> = f.nodes.iter().zip(&f.weights).map(|(x, w)| ev.eval(*x) * *w).collect();
        let idx: Vec<usize> = (0..nodes.len()).collect();
        let parts = par_map(&idx, |&b| {
            let tb = nodes[b];
            f.nodes.iter().zip(&circle).map(|(x, c)| ev.eval([tb[0] - x[0], tb[1] - x[1]]) * c).sum::<Complex64>() * tau_c[b]
        });
        parts.into_iter().sum::<Complex64>() / self.eta_norm()
    }

    fn flat_nodes(&self) -> (Vec<[f64; 2]>, Vec<Complex64>, Vec<Complex64>) {
        let tau = self.tau_rings();
        let xi = self.xi_rings();
        let mut nodes = Vec::with_capacity(self.node_count());
        for (n, &m) in self.radial.iter().zip(&self.ring_m) {
            nodes.extend((0..m).map(|j| self.node(n.rho, m, j)));
        }
        let flat = |r: Vec<Ring>| r.into_iter().flat_map(|r| r.coeffs).collect::<Vec<_>>();
        (nodes, flat(tau), flat(xi))
    }

    /// Bound on the neglected |τ − η/2| > T part of the τ integrals:
    /// 2‖q‖₁ Σ|c_ξ| ∫_T^∞ env(ρ − |η|/2) 2πρ / (ρ² − |η|²/4) dρ.
    pub fn tail_bound(&self) -> f64 {
        let r0 = self.frame.radius;
        let t = self.params.truncation(self.eta_norm());
        let integrand = |rho: f64| self.evaluator.decay_envelope(rho - r0) * 2.0 * PI * rho / (rho * rho - r0 * r0);
        let mut tail = 0.0;
        let mut lo = t;
        for _ in 0..12 {
            let hi = 2.0 * lo;
            tail += composite(lo, hi, lo, 8).into_iter().map(|(x, w)| w * integrand(x)).sum::<f64>();
            lo = hi;
        }
        let xi_mass: f64 = self.xi_rings().iter().flat_map(|r| r.coeffs.iter()).map(|c| c.norm()).sum::<f64>()
            + self.frame.weights.iter().sum::<f64>() * self.l1 / self.eta_norm();
        2.0 * self.l1 * xi_mass * tail
    }

    /// ∫_collar g(ρ) ρ/D₂ dρ split into the contributions of the even and
    /// odd parts (in d = ρ − |η|/2) of the kernel ρ/D₂; for g even about Γ
    /// the symmetric pairs make the odd contribution vanish.
    pub fn collar_split<G: Fn(f64) -> Complex64>(&self, g: G) -> CollarSplit {
        let r0 = self.frame.radius;
        let kernel = |d: f64| (r0 + d) / self.d2(d);
        let mut even = Complex64::new(0.0, 0.0);
        let mut odd = Complex64::new(0.0, 0.0);
        for n in self.radial.iter().filter(|n| n.region == Region::Collar) {
            let k = kernel(n.d);
            let km = kernel(-n.d);
            let ke = 0.5 * (k + km);
            let ko = 0.5 * (k - km);
            let v = g(n.rho) * n.weight;
            even += v * ke;
            odd += v * ko;
        }
        CollarSplit { even, odd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarSplit {
    pub even: Complex64,
    pub odd: Complex64,
}

/// Q′(η) with m nodes per circle.
pub fn q3_circle_circle(spec: &PotentialSpec, eta: [f64; 2], m: usize) -> Result<Complex64> {
    let r = eta[0].hypot(eta[1]);
    if !(r > 0.0) {
        return Err(Error::Domain("η must be nonzero".into()));
    }
    if m < 32 || !m.is_power_of_two() {
        return Err(Error::Config(format!("m = {m} must be a power of two ≥ 32")));
    }
    let frame = CircleFrame::new(eta, m)?;
    let ev = FourierEvaluator::new(spec, 2.0 * r + 8.0)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, ws) in frame.nodes.iter().zip(&frame.weights) {
        let a = ev.eval(*xi) * *ws;
        for (tau, wt) in frame.nodes.iter().zip(&frame.weights) {
            acc += a * ev.eval([eta[0] - tau[0], eta[1] - tau[1]]) * ev.eval([tau[0] - xi[0], tau[1] - xi[1]]) * *wt;
        }
    }
    Ok(acc / (r * r))
}

/// Q″(η) with m circle nodes and truncation T.
pub fn q3_mixed_pv(spec: &PotentialSpec, eta: [f64; 2], m: usize, t: f64) -> Result<Complex64> {
    let params = Q3Params { m, t_max: Some(t), ..Default::default() };
    Ok(Q3Engine::new(spec, eta, &params)?.mixed_pv())
}

/// P(η) with m circle nodes and truncation T.
pub fn q3_full_pv(spec: &PotentialSpec, eta: [f64; 2], m: usize, t: f64) -> Result<Complex64> {
    let params = Q3Params { m, t_max: Some(t), ..Default::default() };
    Ok(Q3Engine::new(spec, eta, &params)?.full_pv())
}

/// Q̂₃(η) with its terms and error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Q3Result {
    pub eta: [f64; 2],
    pub terms: Q3Terms,
    pub total: Complex64,
    /// |fine − coarse| for the total.
    pub quadrature_estimate: f64,
    /// |Q̂₃(T) − Q̂₃(T′)| with T′ = |η|/2 + ¾(T − |η|/2).
    pub truncation_estimate: f64,
    /// Envelope bound on the neglected tail, in units of Q̂₃.
    pub tail_bound: f64,
}

impl Q3Result {
    pub fn error_estimate(&self) -> f64 {
        self.quadrature_estimate + self.truncation_estimate
    }

    pub fn csv_header() -> &'static str {
        "eta_x,eta_y,full_re,full_im,mixed_re,mixed_im,circle_re,circle_im,total_re,total_im,quadrature_estimate,truncation_estimate,tail_bound"
    }

    pub fn csv_row(&self) -> String {
        let t = &self.terms;
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.eta[0],
            self.eta[1],
            t.full_pv.re,
            t.full_pv.im,
            t.mixed_pv.re,
            t.mixed_pv.im,
            t.circle_circle.re,
            t.circle_circle.im,
            self.total.re,
            self.total.im,
            self.quadrature_estimate,
            self.truncation_estimate,
            self.tail_bound
        )
    }
}

/// Q̂₃(η) for |η| > 10, with coarse-rule and truncation comparisons.
pub fn q3_total(spec: &PotentialSpec, eta: [f64; 2], params: &Q3Params) -> Result<Q3Result> {
    let r = eta[0].hypot(eta[1]);
    if !(r > 10.0) {
        return Err(Error::Domain(format!("Q̂₃ quadrature is set up for |η| > 10, got {r}")));
    }
    let engine = Q3Engine::new(spec, eta, params)?;
    let terms = engine.terms();
    let total = terms.total();
    let coarse = Q3Engine::new(spec, eta, &params.coarsened())?.terms().total();
    let t = params.truncation(r);
    let short = Q3Params { t_max: Some(0.5 * r + 0.75 * (t - 0.5 * r)), ..params.clone() };
    let truncated = Q3Engine::new(spec, eta, &short)?.terms().total();
    let quadrature_estimate = (total - coarse).norm();
    if quadrature_estimate > params.max_relative_error * total.norm() && total.norm() > 0.0 {
        return Err(Error::Numerical {
            message: format!("radial refinement of Q̂₃ at η = {eta:?} not converged: coarse {coarse}, fine {total}"),
            achieved: quadrature_estimate / total.norm(),
        });
    }
    let scale = (1.0 + 2.0 * PI) / (2.0 * PI).powi(4);
    Ok(Q3Result {
        eta,
        terms,
        total,
        quadrature_estimate,
        truncation_estimate: (total - truncated).norm(),
        tail_bound: engine.tail_bound() * scale,
    })
}
