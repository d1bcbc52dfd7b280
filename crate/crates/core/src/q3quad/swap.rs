//! Change of integration order on V = {(η, ξ) : ξ·(ξ − η) = 0}:
//! dσ_η(ξ) dη = (|η|/|ξ|) dσ_ξ(η) dξ, where ξ runs over Γ(η) on the left
//! and η over the line Λ(ξ) through ξ orthogonal to ξ on the right.

use std::f64::consts::PI;

use crate::parallel::par_map;
use crate::quadrature::composite;

/// Both integrals run over |η| ≤ `eta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapBounds {
    pub eta_max: f64,
    /// Gauss panels per unit length.
    pub panels_per_unit: f64,
    pub order: usize,
    /// Uniform angles for the outer variable and nodes on each Γ(η).
    pub angles: usize,
}

impl Default for SwapBounds {
    fn default() -> Self {
        SwapBounds { eta_max: 4.0, panels_per_unit: 4.0, order: 12, angles: 128 }
    }
}

/// (∫dη ∫_{Γ(η)} F dσ_η(ξ), ∫dξ ∫_{Λ(ξ)} F |η|/|ξ| dσ_ξ(η)) for F(η, ξ).
pub fn measure_swap_check<F>(f: F, bounds: SwapBounds) -> (f64, f64)
where
    F: Fn([f64; 2], [f64; 2]) -> f64 + Sync,
{
    let b = bounds.eta_max;
    let width = 1.0 / bounds.panels_per_unit;
    let radial = composite(0.0, b, width, bounds.order);
    let na = bounds.angles;
    let da = 2.0 * PI / na as f64;

    // Γ(η) passes through ξ = 0, where functions of arg ξ jump; Gauss
    // panels starting there keep the inner rule spectrally accurate
    let around = composite(0.0, 2.0 * PI, 2.0 * PI * bounds.order as f64 / na as f64, bounds.order);
    let spherical: f64 = par_map(&radial, |&(r, w)| {
        let mut acc = 0.0;
        for a in 0..na {
            let t = a as f64 * da;
            let eta = [r * t.cos(), r * t.sin()];
            // ξ = η/2 + (r/2) e(t + π + s): s = 0 is the origin
            for &(s, ws) in &around {
                let p = t + PI + s;
                let xi = [0.5 * eta[0] + 0.5 * r * p.cos(), 0.5 * eta[1] + 0.5 * r * p.sin()];
                acc += f(eta, xi) * 0.5 * r * ws;
            }
        }
        acc * w * r * da
    })
    .into_iter()
    .sum();

    let planar: f64 = par_map(&radial, |&(rho, w)| {
        let half = (b * b - rho * rho).max(0.0).sqrt();
        let line = composite(-half, half, width, bounds.order);
        let mut acc = 0.0;
        for a in 0..na {
            let t = a as f64 * da;
            let u = [t.cos(), t.sin()];
            let xi = [rho * u[0], rho * u[1]];
            for &(s, ws) in &line {
                let eta = [xi[0] - s * u[1], xi[1] + s * u[0]];
                let en = eta[0].hypot(eta[1]);
                acc += f(eta, xi) * en / rho * ws;
            }
        }
        acc * w * rho * da
    })
    .into_iter()
    .sum();

    (spherical, planar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64, a: f64, b: f64) -> f64 {
        if r <= a || r >= b {
            0.0
        } else {
            (-1.0 / ((r - a) * (b - r))).exp()
        }
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(measure_swap_check(|_, _| 0.0, SwapBounds::default()), (0.0, 0.0));
    }

    #[test]
    fn smooth_battery_agrees() {
        let cases: [&(dyn Fn([f64; 2], [f64; 2]) -> f64 + Sync); 3] = [
            &|eta, xi| bump(eta[0].hypot(eta[1]), 1.0, 3.0) * (1.0 + 0.3 * xi[1].atan2(xi[0]).cos()),
            &|eta, xi| bump(eta[0].hypot(eta[1]), 0.5, 3.5) * (-(xi[0] - 0.5).powi(2) - xi[1].powi(2)).exp(),
            &|eta, xi| bump(eta[0].hypot(eta[1]), 1.5, 3.0) * (1.0 + xi[0] * eta[1]).powi(2),
        ];
        for f in cases {
            let (a, b) = measure_swap_check(f, SwapBounds::default());
            assert!(a.abs() > 1e-3);
            assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn region_excluded_by_v_gives_zero() {
        // on V, |ξ| ≤ |η|
        let f = |eta: [f64; 2], xi: [f64; 2]| {
            if eta[0].hypot(eta[1]) < 0.5 * xi[0].hypot(xi[1]) {
                1.0
            } else {
                0.0
            }
        };
        assert_eq!(measure_swap_check(f, SwapBounds::default()), (0.0, 0.0));
    }
}
