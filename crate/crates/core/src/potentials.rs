//! Compactly supported test potentials with analytic or semi-analytic
//! Fourier transforms.
//!
//! Every component is radial about its own center:
//! - `disk`: λ·1{|x−c| < R}, q̂(ξ) = λ 2πR J₁(R|ξ|)/|ξ| e^{−iξ·c}
//! - `bump`: λ·exp(1 − 1/(1 − (r/R)²)) for r < R
//! - `cone`: λ·r^a·exp(1 − 1/(1 − (r/R)²)), a point singularity of index a + 1
//!
//! Bump and cone transforms are radial Hankel integrals evaluated by
//! panel Gauss quadrature and tabulated as piecewise Chebyshev series.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, RealField};
use crate::quadrature::gauss_legendre;
use crate::special::{bessel_j0, jinc};

/// One radial building block of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Disk { radius: f64 },
    Bump { radius: f64 },
    Cone { exponent: f64, radius: f64 },
}

impl Profile {
    pub fn radius(&self) -> f64 {
        match *self {
            Profile::Disk { radius } | Profile::Bump { radius } | Profile::Cone { radius, .. } => radius,
        }
    }

    /// Radial profile value at distance r from the center.
    pub fn value(&self, r: f64) -> f64 {
        let radius = self.radius();
        if r >= radius {
            return 0.0;
        }
        match *self {
            Profile::Disk { .. } => 1.0,
            Profile::Bump { .. } => bump(r / radius),
            Profile::Cone { exponent, .. } => {
                if r == 0.0 {
                    if exponent > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    r.powf(exponent) * bump(r / radius)
                }
            }
        }
    }

    fn critical_index(&self) -> f64 {
        match *self {
            Profile::Disk { .. } => 0.5,
            Profile::Bump { .. } => f64::INFINITY,
            Profile::Cone { exponent, .. } => exponent + 1.0,
        }
    }

    /// Breakpoints of [0, R] that isolate the profile's non-smooth behavior.
    fn breakpoints(&self) -> Vec<f64> {
        let radius = self.radius();
        let mut b = vec![0.0];
        if let Profile::Cone { .. } = self {
            for k in (1..=40).rev() {
                b.push(radius * 0.5f64.powi(k + 1));
            }
        }
        match self {
            Profile::Disk { .. } => {}
            _ => {
                b.push(radius * 0.5);
                for k in 2..=11 {
                    b.push(radius * (1.0 - 0.5f64.powi(k)));
                }
            }
        }
        b.push(radius);
        b
    }

    /// Radial Gauss nodes (r, w) on [0, R] resolving e^{iωr} oscillation.
    pub fn radial_nodes(&self, omega: f64, order: usize) -> Vec<(f64, f64)> {
        let rule = gauss_legendre(order);
        let max_width = 2.0 * PI / omega.max(1.0);
        let b = self.breakpoints();
        let mut out = Vec::new();
        for w in b.windows(2) {
            let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let lo = w[0] + p as f64 * h;
                out.extend(rule.mapped(lo, lo + h));
            }
        }
        out
    }

    /// 2π ∫₀^R f(r) J₀(ρr) r dr by panel Gauss quadrature.
    pub fn hankel_quadrature(&self, rho: f64, order: usize) -> f64 {
        if let Profile::Disk { radius } = *self {
            return 2.0 * PI * radius * radius * jinc(radius * rho);
        }
        let s: f64 = self
            .radial_nodes(rho, order)
            .into_iter()
            .map(|(r, w)| w * self.value(r) * bessel_j0(rho * r) * r)
            .sum();
        2.0 * PI * s
    }

    fn l1(&self) -> f64 {
        match *self {
            Profile::Disk { radius } => PI * radius * radius,
            _ => 2.0 * PI * self.radial_nodes(1.0, 20).into_iter().map(|(r, w)| w * self.value(r).abs() * r).sum::<f64>(),
        }
    }

    fn key(&self) -> (u8, u64, u64) {
        match *self {
            Profile::Disk { radius } => (0, radius.to_bits(), 0),
            Profile::Bump { radius } => (1, radius.to_bits(), 0),
            Profile::Cone { exponent, radius } => (2, radius.to_bits(), exponent.to_bits()),
        }
    }
}

fn bump(t: f64) -> f64 {
    let d = 1.0 - t * t;
    if d <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / d).exp()
    }
}

/// A profile placed at `center` with real amplitude λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub profile: Profile,
    pub amplitude: f64,
    pub center: [f64; 2],
}

/// A compactly supported real potential: a finite sum of components
/// (the empty sum is q ≡ 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    components: Vec<Component>,
}

impl PotentialSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        for c in &components {
            validate(c)?;
        }
        let spec = PotentialSpec { components };
        if spec.support_radius() > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "potential support radius {} exceeds the unit ball",
                spec.support_radius()
            )));
        }
        Ok(spec)
    }

    pub fn zero() -> Self {
        PotentialSpec { components: Vec::new() }
    }

    pub fn disk(radius: f64, amplitude: f64) -> Result<Self> {
        Self::new(vec![Component { profile: Profile::Disk { radius }, amplitude, center: [0.0, 0.0] }])
    }

    pub fn bump(radius: f64, amplitude: f64) -> Result<Self> {
        Self::new(vec![Component { profile: Profile::Bump { radius }, amplitude, center: [0.0, 0.0] }])
    }

    pub fn cone(exponent: f64, radius: f64, amplitude: f64) -> Result<Self> {
        Self::new(vec![Component {
            profile: Profile::Cone { exponent, radius },
            amplitude,
            center: [0.0, 0.0],
        }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.amplitude == 0.0)
    }

    /// Sum of two potentials.
    pub fn plus(&self, other: &PotentialSpec) -> Result<Self> {
        let mut c = self.components.clone();
        c.extend_from_slice(&other.components);
        Self::new(c)
    }

    /// The potential εq.
    pub fn scaled(&self, eps: f64) -> Self {
        PotentialSpec {
            components: self
                .components
                .iter()
                .map(|c| Component { amplitude: c.amplitude * eps, ..*c })
                .collect(),
        }
    }

    /// Radius of the smallest origin-centered disk containing the support.
    pub fn support_radius(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.profile.radius() + (c.center[0].hypot(c.center[1])))
            .fold(0.0, f64::max)
    }

    /// Pointwise value; 0 outside the support.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * c.profile.value((x[0] - c.center[0]).hypot(x[1] - c.center[1])))
            .sum()
    }

    /// Critical Sobolev exponent s*: q ∈ W^{s,2} exactly for s < s*.
    /// Smooth potentials report `f64::INFINITY`.
    pub fn known_sobolev_index(&self) -> f64 {
        self.components
            .iter()
            .filter(|c| c.amplitude != 0.0)
            .map(|c| c.profile.critical_index())
            .fold(f64::INFINITY, f64::min)
    }

    /// ‖q‖_{L¹}; exact for one component, the triangle-inequality bound for sums.
    pub fn l1_norm(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude.abs() * c.profile.l1()).sum()
    }

    /// Short content hash of the canonical text form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Samples on the grid as cell averages over [x−h/2, x+h/2]²; cells cut
    /// by a discontinuity or containing a singular point are sub-sampled.
    pub fn sample_on_grid(&self, grid: &Grid2D) -> RealField<f64> {
        let h = grid.spacing();
        RealField::from_fn(*grid, |x| {
            let mut v = 0.0;
            for c in &self.components {
                let r = (x[0] - c.center[0]).hypot(x[1] - c.center[1]);
                let reach = h * std::f64::consts::SQRT_2 / 2.0;
                let rough = match c.profile {
                    Profile::Disk { radius } => (r - radius).abs() <= reach,
                    Profile::Cone { .. } => r <= 2.0 * h,
                    Profile::Bump { .. } => false,
                };
                if r - reach >= c.profile.radius() {
                    continue;
                }
                let value = if rough {
                    let s = 16;
                    let mut acc = 0.0;
                    for a in 0..s {
                        for b in 0..s {
                            let px = x[0] - h / 2.0 + (a as f64 + 0.5) * h / s as f64;
                            let py = x[1] - h / 2.0 + (b as f64 + 0.5) * h / s as f64;
                            acc += c.profile.value((px - c.center[0]).hypot(py - c.center[1]));
                        }
                    }
                    acc / (s * s) as f64
                } else {
                    c.profile.value(r)
                };
                v += c.amplitude * value;
            }
            v
        })
    }

    /// Physical-space quadrature of q: polar patches about each component
    /// center whose radial nodes resolve e^{iωr}.
    pub fn physical_patches(&self, omega: f64) -> Vec<PolarPatch> {
        self.components
            .iter()
            .filter(|c| c.amplitude != 0.0)
            .map(|c| PolarPatch {
                center: c.center,
                radius: c.profile.radius(),
                nodes: c
                    .profile
                    .radial_nodes(omega, 16)
                    .into_iter()
                    .map(|(r, w)| (r, w * r * c.amplitude * c.profile.value(r)))
                    .collect(),
            })
            .collect()
    }
}

/// Radial nodes (r, weight) about `center`; the weight already contains
/// q(r)·r, so ∫ q g ≈ Σ_r weight · (2π/M) Σ_ψ g(center + r e(ψ)).
#[derive(Debug, Clone)]
pub struct PolarPatch {
    pub center: [f64; 2],
    pub radius: f64,
    pub nodes: Vec<(f64, f64)>,
}

fn validate(c: &Component) -> Result<()> {
    let r = c.profile.radius();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Config(format!("potential radius {r} must be positive")));
    }
    if !c.amplitude.is_finite() || !c.center.iter().all(|v| v.is_finite()) {
        return Err(Error::Config("potential amplitude and center must be finite".into()));
    }
    if let Profile::Cone { exponent, .. } = c.profile {
        let even_integer = exponent >= 0.0 && exponent.fract() == 0.0 && (exponent as i64) % 2 == 0;
        if !(exponent > -1.0) || even_integer || !exponent.is_finite() {
            return Err(Error::Config(format!(
                "cone exponent {exponent} must exceed -1 and not be an even integer"
            )));
        }
    }
    Ok(())
}

impl fmt::Display for PotentialSpec {
    /// Canonical text form, e.g. `disk(radius=0.8, amplitude=0.1, cx=0, cy=0)`;
    /// sums are joined by ` + `, the zero potential is `zero`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "zero");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match c.profile {
                Profile::Disk { radius } => write!(f, "disk(radius={radius:?}")?,
                Profile::Bump { radius } => write!(f, "bump(radius={radius:?}")?,
                Profile::Cone { exponent, radius } => {
                    write!(f, "cone(exponent={exponent:?}, radius={radius:?}")?
                }
            }
            write!(f, ", amplitude={:?}, cx={:?}, cy={:?})", c.amplitude, c.center[0], c.center[1])?;
        }
        Ok(())
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(PotentialSpec::zero());
        }
        let mut components = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            let open = term
                .find('(')
                .ok_or_else(|| Error::Config(format!("potential term `{term}` lacks `(`")))?;
            if !term.ends_with(')') {
                return Err(Error::Config(format!("potential term `{term}` lacks `)`")));
            }
            let name = term[..open].trim();
            let mut args: HashMap<&str, f64> = HashMap::new();
            for kv in term[open + 1..term.len() - 1].split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected key=value, found `{kv}`")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{}` is not a number", v.trim())))?;
                if args.insert(k.trim(), v).is_some() {
                    return Err(Error::Config(format!("duplicate key `{}`", k.trim())));
                }
            }
            let mut take = |key: &str, default: Option<f64>| -> Result<f64> {
                args.remove(key)
                    .or(default)
                    .ok_or_else(|| Error::Config(format!("`{name}` requires `{key}`")))
            };
            let profile = match name {
                "disk" => Profile::Disk { radius: take("radius", None)? },
                "bump" => Profile::Bump { radius: take("radius", None)? },
                "cone" => Profile::Cone { exponent: take("exponent", None)?, radius: take("radius", None)? },
                other => return Err(Error::Config(format!("unknown potential kind `{other}`"))),
            };
            let amplitude = take("amplitude", None)?;
            let center = [take("cx", Some(0.0))?, take("cy", Some(0.0))?];
            if let Some(k) = args.keys().next() {
                return Err(Error::Config(format!("unknown potential key `{k}` for `{name}`")));
            }
            components.push(Component { profile, amplitude, center });
        }
        PotentialSpec::new(components)
    }
}

const SEGMENT: f64 = 1.0;
const CHEB_NODES: usize = 14;

/// Piecewise Chebyshev table of a radial Hankel transform on [0, ρ_max].
#[derive(Debug)]
struct RadialTable {
    rho_max: f64,
    coeffs: Vec<[f64; CHEB_NODES]>,
    /// Suffix maxima of |ĝ| per segment (a monotone decay envelope).
    envelope: Vec<f64>,
    tail_power: f64,
}

impl RadialTable {
    fn build(profile: &Profile, rho_max: f64) -> Result<Self> {
        // Convergence check: two quadrature orders must agree.
        let scale = profile.l1();
        for &rho in &[0.0, 0.5 * rho_max, rho_max] {
            let a = profile.hankel_quadrature(rho, 20);
            let b = profile.hankel_quadrature(rho, 28);
            if (a - b).abs() > 1e-10 * scale {
                return Err(Error::Numerical {
                    message: format!("Hankel quadrature did not converge at ρ = {rho}"),
                    achieved: (a - b).abs() / scale,
                });
            }
        }
        let segments = (rho_max / SEGMENT).ceil() as usize;
        let mut coeffs = Vec::with_capacity(segments);
        let mut seg_max = Vec::with_capacity(segments);
        let nodes: Vec<f64> = (0..CHEB_NODES)
            .map(|j| (PI * (j as f64 + 0.5) / CHEB_NODES as f64).cos())
            .collect();
        for s in 0..segments {
            let lo = s as f64 * SEGMENT;
            let values: Vec<f64> = nodes
                .iter()
                .map(|t| profile.hankel_quadrature(lo + 0.5 * SEGMENT * (t + 1.0), 20))
                .collect();
            let mut c = [0.0; CHEB_NODES];
            for (k, ck) in c.iter_mut().enumerate() {
                let sum: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / CHEB_NODES as f64).cos())
                    .sum();
                *ck = 2.0 * sum / CHEB_NODES as f64;
            }
            c[0] *= 0.5;
            let m = (0..=16)
                .map(|i| clenshaw(&c, -1.0 + i as f64 / 8.0).abs())
                .fold(0.0, f64::max);
            seg_max.push(m);
            coeffs.push(c);
        }
        let mut envelope = seg_max.clone();
        for i in (0..envelope.len().saturating_sub(1)).rev() {
            envelope[i] = envelope[i].max(envelope[i + 1]);
        }
        let tail_power = match *profile {
            Profile::Disk { .. } => 1.5,
            Profile::Cone { exponent, .. } => exponent + 2.0,
            Profile::Bump { .. } => 4.0,
        };
        Ok(RadialTable { rho_max: segments as f64 * SEGMENT, coeffs, envelope, tail_power })
    }

    #[inline]
    fn eval(&self, rho: f64) -> Option<f64> {
        if rho >= self.rho_max {
            return None;
        }
        let s = (rho / SEGMENT) as usize;
        let t = 2.0 * (rho - s as f64 * SEGMENT) / SEGMENT - 1.0;
        Some(clenshaw(&self.coeffs[s], t))
    }

    fn envelope(&self, rho: f64) -> f64 {
        let s = (rho.max(0.0) / SEGMENT) as usize;
        if s < self.envelope.len() {
            2.0 * self.envelope[s]
        } else {
            let last = *self.envelope.last().unwrap_or(&0.0);
            2.0 * last * (self.rho_max / rho).powf(self.tail_power)
        }
    }
}

#[inline]
fn clenshaw(c: &[f64; CHEB_NODES], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

type TableKey = (u8, u64, u64);

fn table_cache() -> &'static RwLock<HashMap<TableKey, Arc<RadialTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<TableKey, Arc<RadialTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared table covering at least [0, rho_max]. Readers never block each
/// other; a writer only replaces an entry with a strictly larger table.
fn radial_table(profile: &Profile, rho_max: f64) -> Result<Arc<RadialTable>> {
    let key = profile.key();
    if let Some(t) = table_cache().read().expect("table cache poisoned").get(&key) {
        if t.rho_max >= rho_max {
            return Ok(t.clone());
        }
    }
    let target = 64.0 * (rho_max / 64.0).log2().ceil().exp2().max(1.0);
    let table = Arc::new(RadialTable::build(profile, target)?);
    let mut guard = table_cache().write().expect("table cache poisoned");
    let entry = guard.entry(key).or_insert_with(|| table.clone());
    if entry.rho_max < table.rho_max {
        *entry = table.clone();
    }
    Ok(entry.clone())
}

#[derive(Debug, Clone)]
enum Radial {
    Disk(f64),
    Table(Profile, Arc<RadialTable>),
}

/// Prepared Fourier evaluator: fallible setup, infallible evaluation.
/// Beyond the tabulated range it falls back to direct quadrature.
#[derive(Debug, Clone)]
pub struct FourierEvaluator {
    parts: Vec<(Radial, f64, [f64; 2])>,
}

impl FourierEvaluator {
    pub fn new(spec: &PotentialSpec, rho_max: f64) -> Result<Self> {
        let parts = spec
            .components
            .iter()
            .filter(|c| c.amplitude != 0.0)
            .map(|c| {
                let radial = match c.profile {
                    Profile::Disk { radius } => Radial::Disk(radius),
                    p => Radial::Table(p, radial_table(&p, rho_max)?),
                };
                Ok((radial, c.amplitude, c.center))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FourierEvaluator { parts })
    }

    /// q̂(ξ).
    #[inline]
    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let rho = xi[0].hypot(xi[1]);
        let mut acc = Complex64::new(0.0, 0.0);
        for (radial, amp, c) in &self.parts {
            let g = match radial {
                Radial::Disk(r) => 2.0 * PI * r * r * jinc(r * rho),
                Radial::Table(p, t) => t.eval(rho).unwrap_or_else(|| p.hankel_quadrature(rho, 20)),
            };
            let phase = xi[0] * c[0] + xi[1] * c[1];
            if phase == 0.0 {
                acc.re += amp * g;
            } else {
                acc += Complex64::from_polar(amp * g, -phase);
            }
        }
        acc
    }

    /// A bound (heuristic for tabulated profiles) on sup_{|ξ| ≥ ρ} |q̂(ξ)|.
    pub fn decay_envelope(&self, rho: f64) -> f64 {
        self.parts
            .iter()
            .map(|(radial, amp, _)| {
                amp.abs()
                    * match radial {
                        Radial::Disk(r) => {
                            let x = r * rho;
                            2.0 * PI * r * r * if x <= 0.0 { 0.5 } else { 0.5f64.min(0.8 * x.powf(-1.5)) }
                        }
                        Radial::Table(_, t) => t.envelope(rho),
                    }
            })
            .sum()
    }
}

fn evaluator_cache() -> &'static RwLock<HashMap<String, FourierEvaluator>> {
    static CACHE: OnceLock<RwLock<HashMap<String, FourierEvaluator>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// q̂(ξ) = ∫ e^{−ix·ξ} q(x) dx, closed form for disks, tabulated Hankel
/// quadrature otherwise (cached per spec).
pub fn potential_fourier(spec: &PotentialSpec, xi: [f64; 2]) -> Result<Complex64> {
    let key = spec.to_string();
    if let Some(ev) = evaluator_cache().read().expect("evaluator cache poisoned").get(&key) {
        return Ok(ev.eval(xi));
    }
    let ev = FourierEvaluator::new(spec, 256.0)?;
    let value = ev.eval(xi);
    evaluator_cache().write().expect("evaluator cache poisoned").insert(key, ev);
    Ok(value)
}

/// Pointwise value of q.
pub fn eval_potential(spec: &PotentialSpec, x: [f64; 2]) -> f64 {
    spec.eval(x)
}

/// Critical Sobolev exponent of the spec (`f64::INFINITY` for smooth q).
pub fn known_sobolev_index(spec: &PotentialSpec) -> f64 {
    spec.known_sobolev_index()
}
