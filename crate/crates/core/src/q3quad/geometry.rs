//! Circle geometry around Γ(η) = {τ : |τ − η/2| = |η|/2}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::composite;

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn check_eta(eta: [f64; 2]) -> Result<f64> {
    let r = norm(eta);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("η = {eta:?} must be finite and nonzero")));
    }
    Ok(r)
}

/// Trapezoid nodes on Γ(η).
#[derive(Debug, Clone)]
pub struct CircleFrame {
    pub eta: [f64; 2],
    pub center: [f64; 2],
    pub radius: f64,
    pub m: usize,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl CircleFrame {
    pub fn new(eta: [f64; 2], m: usize) -> Result<Self> {
        let r = check_eta(eta)?;
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::Config(format!("circle node count {m} must be a power of two ≥ 8")));
        }
        let center = [0.5 * eta[0], 0.5 * eta[1]];
        let radius = 0.5 * r;
        let nodes = (0..m)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / m as f64;
                [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()]
            })
            .collect();
        Ok(CircleFrame { eta, center, radius, m, nodes, weights: vec![PI * r / m as f64; m] })
    }

    /// Total weight, π|η|.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// ∫_{Γ(η)} g dσ by the trapezoid rule.
pub fn circle_quadrature<G: Fn([f64; 2]) -> Complex64>(frame: &CircleFrame, g: G) -> Result<Complex64> {
    if frame.m < 32 {
        return Err(Error::Config(format!("circle quadrature needs m ≥ 32, got {}", frame.m)));
    }
    Ok(frame.nodes.iter().zip(&frame.weights).map(|(x, w)| g(*x) * *w).sum())
}

/// D₁(ξ,η) = ξ·(ξ−η) and D₂(τ,η) = τ·(η−τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenominatorPair {
    pub eta: [f64; 2],
}

impl DenominatorPair {
    pub fn d1(&self, xi: [f64; 2]) -> f64 {
        dot(xi, sub(xi, self.eta))
    }

    pub fn d2(&self, tau: [f64; 2]) -> f64 {
        dot(tau, sub(self.eta, tau))
    }

    /// (|η|/2)² − |τ − η/2|², the factored form of D₂.
    pub fn d2_factored(&self, tau: [f64; 2]) -> f64 {
        let r0 = 0.5 * norm(self.eta);
        let d = norm(sub(tau, [0.5 * self.eta[0], 0.5 * self.eta[1]]));
        (r0 + d) * (r0 - d)
    }
}

/// Which piece of the plane a point belongs to, by its signed radial
/// distance d = |τ − η/2| − |η|/2 to Γ(η).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// |d| ≤ collar width.
    Collar,
    /// 2^{−j−2}|η| < |d| ≤ 2^{−j−1}|η| (and beyond the collar).
    Corona(usize),
    /// |d| beyond the first corona.
    Outer,
}

/// Collar, dyadic coronas j₀ ≤ j ≤ N and outer region around Γ(η).
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusPartition {
    pub eta: [f64; 2],
    pub collar_width: f64,
    pub j0: usize,
    /// N = max(⌊log₂|η|⌋ − 2, 1).
    pub n: usize,
}

/// A radial band [lo, hi] of distances |d| on one side of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub region: Region,
    pub lo: f64,
    pub hi: f64,
}

impl AnnulusPartition {
    pub fn new(eta: [f64; 2], collar_width: f64, j0: usize) -> Result<Self> {
        let r = check_eta(eta)?;
        if !(collar_width > 0.0) || collar_width >= 0.5 * r {
            return Err(Error::Domain(format!(
                "collar width {collar_width} must be positive and below |η|/2 = {}",
                0.5 * r
            )));
        }
        let n = ((r.log2().floor() as i64) - 2).max(1) as usize;
        if j0 == 0 || j0 > n {
            return Err(Error::Config(format!("corona start j0 = {j0} must lie in 1..={n}")));
        }
        Ok(AnnulusPartition { eta, collar_width, j0, n })
    }

    pub fn eta_norm(&self) -> f64 {
        norm(self.eta)
    }

    /// Radial bounds (lo, hi] of corona j, clipped to the collar.
    pub fn corona_bounds(&self, j: usize) -> Result<(f64, f64)> {
        if j < self.j0 || j > self.n {
            return Err(Error::Domain(format!("corona index {j} outside {}..={}", self.j0, self.n)));
        }
        let r = self.eta_norm();
        let lo = (r * 0.5f64.powi(j as i32 + 2)).max(self.collar_width);
        let hi = (r * 0.5f64.powi(j as i32 + 1)).max(self.collar_width);
        Ok((lo, hi))
    }

    /// Where the outer region begins in |d|.
    pub fn outer_start(&self) -> f64 {
        (self.eta_norm() * 0.5f64.powi(self.j0 as i32 + 1)).max(self.collar_width)
    }

    pub fn signed_distance(&self, tau: [f64; 2]) -> f64 {
        norm(sub(tau, [0.5 * self.eta[0], 0.5 * self.eta[1]])) - 0.5 * self.eta_norm()
    }

    pub fn classify(&self, tau: [f64; 2]) -> Region {
        let d = self.signed_distance(tau).abs();
        if d <= self.collar_width {
            return Region::Collar;
        }
        for j in self.j0..=self.n {
            let (lo, hi) = self.corona_bounds(j).expect("in range");
            if d > lo && d <= hi {
                return Region::Corona(j);
            }
        }
        Region::Outer
    }

    /// Whether τ lies in the δ-annulus ||τ − η/2| − |η|/2| ≤ δ|η|.
    pub fn in_delta_annulus(&self, tau: [f64; 2], delta: f64) -> bool {
        self.signed_distance(tau).abs() <= delta * self.eta_norm()
    }

    /// Bands in |d| (collar, coronas, outer up to `d_max`), nonempty only.
    pub fn bands(&self, d_max: f64) -> Vec<Band> {
        let mut out = vec![Band { region: Region::Collar, lo: 0.0, hi: self.collar_width }];
        for j in (self.j0..=self.n).rev() {
            let (lo, hi) = self.corona_bounds(j).expect("in range");
            if hi > lo {
                out.push(Band { region: Region::Corona(j), lo, hi: hi.min(d_max.max(lo)) });
            }
        }
        let start = self.outer_start();
        if d_max > start {
            out.push(Band { region: Region::Outer, lo: start, hi: d_max });
        }
        out.retain(|b| b.hi > b.lo);
        out
    }

    /// Radial quadrature ρ = |τ − η/2| ∈ [0, t_max] in polar coordinates about
    /// η/2: composite Gauss in each band, the collar by symmetric pairs
    /// ρ₀ ± t so that the odd part of 1/D₂ cancels node by node.
    pub fn radial_nodes(&self, t_max: f64, panel_width: f64, order: usize, reverse_collar: bool) -> Vec<RadialNode> {
        let r0 = 0.5 * self.eta_norm();
        let mut out = Vec::new();
        for band in self.bands(f64::INFINITY) {
            if band.region == Region::Collar {
                for (t, w) in composite(0.0, band.hi, panel_width, order) {
                    let pair = [(r0 + t, t), (r0 - t, -t)];
                    let pair = if reverse_collar { [pair[1], pair[0]] } else { pair };
                    for (rho, d) in pair {
                        out.push(RadialNode { rho, weight: w, region: Region::Collar, d });
                    }
                }
                continue;
            }
            // inner side: ρ = ρ₀ − d with d ≤ ρ₀
            let inner_hi = band.hi.min(r0);
            if band.region == Region::Outer {
                for (d, w) in composite(band.lo, r0, panel_width, order) {
                    out.push(RadialNode { rho: r0 - d, weight: w, region: band.region, d: -d });
                }
            } else if inner_hi > band.lo {
                for (d, w) in composite(band.lo, inner_hi, panel_width, order) {
                    out.push(RadialNode { rho: r0 - d, weight: w, region: band.region, d: -d });
                }
            }
            // outer side: ρ = ρ₀ + d up to t_max
            let hi = if band.region == Region::Outer { t_max - r0 } else { band.hi.min(t_max - r0) };
            for (d, w) in composite(band.lo, hi, panel_width, order) {
                out.push(RadialNode { rho: r0 + d, weight: w, region: band.region, d });
            }
        }
        out
    }
}

/// A radius ρ about η/2 with its Gauss weight (without the polar Jacobian)
/// and signed distance d = ρ − |η|/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub rho: f64,
    pub weight: f64,
    pub region: Region,
    pub d: f64,
}

/// φ(τ) = η − τ + |η|(τ − η/2)/|τ − η/2|: reflection through Γ(η) along
/// the ray from η/2.
pub fn reflection_map(eta: [f64; 2], tau: [f64; 2]) -> Result<[f64; 2]> {
    let r = check_eta(eta)?;
    let v = sub(tau, [0.5 * eta[0], 0.5 * eta[1]]);
    let d = norm(v);
    if d == 0.0 {
        return Err(Error::Domain("reflection map is singular at η/2".into()));
    }
    Ok([eta[0] - tau[0] + r * v[0] / d, eta[1] - tau[1] + r * v[1] / d])
}

/// Residuals of the four reflection identities at (η, τ), each relative to
/// the natural scale |η|² or |η|:
/// radial antisymmetry, Jacobian, displacement, D₂ at φ(τ).
pub fn reflection_identities(eta: [f64; 2], tau: [f64; 2]) -> Result<[f64; 4]> {
    let p = reflection_map(eta, tau)?;
    let r = norm(eta);
    let r0 = 0.5 * r;
    let c = [0.5 * eta[0], 0.5 * eta[1]];
    let v = sub(tau, c);
    let d = norm(v);
    let dp = norm(sub(p, c));
    let antisym = ((dp - r0) + (d - r0)).abs() / r;
    // Dφ = −I + |η|(I − uuᵀ)/d, u = v/d
    let u = [v[0] / d, v[1] / d];
    let s = r / d;
    let m = [[-1.0 + s * (1.0 - u[0] * u[0]), -s * u[0] * u[1]], [-s * u[1] * u[0], -1.0 + s * (1.0 - u[1] * u[1])]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let jac = (det.abs() - (1.0 + 2.0 * (r0 - d) / d).abs()).abs() / (1.0 + s);
    let disp = (norm(sub(p, tau)) - 2.0 * (r0 - d).abs()).abs() / r;
    let pair = DenominatorPair { eta };
    let d2 = (pair.d2(p) - (r0 + dp) * (d - r0)).abs() / (r * r);
    Ok([antisym, jac, disp, d2])
}

/// Outcome of a randomized lemma check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub pass: bool,
    pub samples: usize,
    /// Smallest |D₂| − 2^{−j−3}|η|² seen (relative to |η|²).
    pub worst_margin: f64,
}

/// Check |τ·(η−τ)| ≥ 2^{−j−3}|η|² on random nodes of corona j.
pub fn corona_denominator_bound<R: Rng>(partition: &AnnulusPartition, j: usize, samples: usize, rng: &mut R) -> Result<BoundCheck> {
    let (lo, hi) = partition.corona_bounds(j)?;
    let r = partition.eta_norm();
    let r0 = 0.5 * r;
    let bound = r * r * 0.5f64.powi(j as i32 + 3);
    let pair = DenominatorPair { eta: partition.eta };
    let c = [0.5 * partition.eta[0], 0.5 * partition.eta[1]];
    let mut worst = f64::INFINITY;
    let mut count = 0;
    if hi > lo {
        for _ in 0..samples {
            let d = hi - rng.gen::<f64>() * (hi - lo);
            let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let rho = r0 + side * d;
            if rho <= 0.0 {
                continue;
            }
            let a = rng.gen::<f64>() * 2.0 * PI;
            let tau = [c[0] + rho * a.cos(), c[1] + rho * a.sin()];
            debug_assert_eq!(partition.classify(tau), Region::Corona(j));
            worst = worst.min((pair.d2(tau).abs() - bound) / (r * r));
            count += 1;
        }
    }
    Ok(BoundCheck { pass: worst >= -1e-12, samples: count, worst_margin: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_measure_and_harmonics() {
        for &r in &[1.0, 7.0, 123.4, 1000.0] {
            let f = CircleFrame::new([r * 0.6, -r * 0.8], 64).unwrap();
            let one = circle_quadrature(&f, |_| Complex64::new(1.0, 0.0)).unwrap();
            assert!((one.re - PI * r).abs() <= 1e-12 * PI * r);
            for x in &f.nodes {
                assert!((norm(sub(*x, f.center)) - f.radius).abs() <= 1e-14 * r.max(1.0));
            }
            let c = f.center;
            let h = circle_quadrature(&f, |x| Complex64::new((x[0] - c[0]) / f.radius, 0.0)).unwrap();
            assert!(h.norm() <= 1e-12 * r);
        }
        assert!(circle_quadrature(&CircleFrame::new([7.0, 0.0], 16).unwrap(), |_| Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn reflection_worked_example() {
        let eta = [10.0, 0.0];
        let p = reflection_map(eta, [5.0, 4.0]).unwrap();
        assert!((p[0] - 5.0).abs() < 1e-14 && (p[1] - 6.0).abs() < 1e-14);
        let on = [5.0 + 5.0 * 0.3f64.cos(), 5.0 * 0.3f64.sin()];
        let q = reflection_map(eta, on).unwrap();
        assert!(norm(sub(q, on)) < 1e-14);
        assert!(matches!(reflection_map(eta, [5.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn reflection_identities_hold_on_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            let r = rng.gen_range(1.0..500.0);
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let eta = [r * a.cos(), r * a.sin()];
            let rho = rng.gen_range(1e-3..0.999) * r;
            let b: f64 = rng.gen_range(0.0..2.0 * PI);
            let tau = [0.5 * eta[0] + rho * b.cos(), 0.5 * eta[1] + rho * b.sin()];
            let res = reflection_identities(eta, tau).unwrap();
            assert!(res.iter().all(|v| *v <= 1e-12), "{res:?}");
        }
    }

    #[test]
    fn corona_bounds_and_faces() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = rng.gen_range(16.0..200.0);
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let eta = [r * a.cos(), r * a.sin()];
            let p = AnnulusPartition::new(eta, 2.0, 1).unwrap();
            for j in 1..=p.n {
                let check = corona_denominator_bound(&p, j, 500, &mut rng).unwrap();
                assert!(check.pass, "j={j} {check:?}");
            }
            assert!(matches!(corona_denominator_bound(&p, p.n + 1, 1, &mut rng), Err(Error::Domain(_))));
            // outer face of corona 1
            let (_, hi) = p.corona_bounds(1).unwrap();
            let tau = [0.5 * eta[0] + (0.5 * r + hi) * a.cos(), 0.5 * eta[1] + (0.5 * r + hi) * a.sin()];
            let pair = DenominatorPair { eta };
            assert!((pair.d2(tau) - pair.d2_factored(tau)).abs() <= 1e-12 * r * r);
        }
    }

    #[test]
    fn radial_nodes_respect_partition() {
        let eta = [37.0, 11.0];
        let p = AnnulusPartition::new(eta, 2.0, 1).unwrap();
        let r0 = 0.5 * p.eta_norm();
        let nodes = p.radial_nodes(r0 + 40.0, 2.0, 10, false);
        // ∫₀^T ρ dρ reproduced
        let t = r0 + 40.0;
        let total: f64 = nodes.iter().map(|n| n.weight * n.rho).sum();
        assert!((total - 0.5 * t * t).abs() < 1e-9 * t * t);
        for n in &nodes {
            let tau = [0.5 * eta[0] + n.rho, 0.5 * eta[1]];
            assert_eq!(p.classify(tau), n.region, "{n:?}");
            assert!(n.rho >= 0.0 && n.rho <= t);
        }
        let collar: Vec<_> = nodes.iter().filter(|n| n.region == Region::Collar).collect();
        assert_eq!(collar.len() % 2, 0);
        for pair in collar.chunks(2) {
            assert!((pair[0].d + pair[1].d).abs() < 1e-14 && pair[0].weight == pair[1].weight);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn partition_tiles_plane(r in 4.5f64..300.0, a in 0.0f64..6.3, rho in 0.0f64..3.0, b in 0.0f64..6.3) {
            let eta = [r * a.cos(), r * a.sin()];
            let p = AnnulusPartition::new(eta, 2.0, 1).unwrap();
            let tau = [0.5 * eta[0] + rho * r * b.cos(), 0.5 * eta[1] + rho * r * b.sin()];
            let d = p.signed_distance(tau).abs();
            let hits = (p.j0..=p.n).filter(|&j| {
                let (lo, hi) = p.corona_bounds(j).unwrap();
                d > lo && d <= hi
            }).count() + usize::from(d <= 2.0) + usize::from(d > p.outer_start());
            prop_assert_eq!(hits, 1);
            let pair = DenominatorPair { eta };
            prop_assert!((pair.d2(tau) - pair.d2_factored(tau)).abs() <= 1e-12 * (r * r).max(pair.d2(tau).abs()));
            prop_assert!((pair.d1(tau) + pair.d2(tau)).abs() <= 1e-12 * r * r * (1.0 + rho * rho));
        }
    }
}
