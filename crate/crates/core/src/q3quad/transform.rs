//! Nonuniform exponential sums S(y) = Σ_ν c_ν e^{isν·y} for ν on rings
//! about a common center, evaluated on the polar quadrature nodes of the
//! potential's components by the Jacobi–Anger expansion
//! e^{isz cos α} = Σₙ (is)ⁿ Jₙ(z) e^{inα}.
//!
//! The center's phase e^{isc·y} is dropped: every product we form pairs an
//! s = −1 sum with an s = +1 sum about the same center, so it cancels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::parallel::par_map;
use crate::potentials::PolarPatch;
use crate::special::bessel_jn_array;

/// Uniform ring ν_j = c + ρ e(2πj/m) with one coefficient per node.
#[derive(Debug, Clone)]
pub struct Ring {
    pub rho: f64,
    pub coeffs: Vec<Complex64>,
}

/// Highest Bessel order kept for argument z (tail below 1e-16).
pub fn bessel_cutoff(z: f64) -> usize {
    (z + 12.0 * z.cbrt() + 10.0).ceil() as usize
}

/// Angular node count on the physical rings for ring radii up to `rho_max`
/// and patch radius `r_max`: exact for products of two such sums.
pub fn physical_angles(rho_max: f64, r_max: f64) -> usize {
    (2 * bessel_cutoff(rho_max * r_max) + 2).next_power_of_two()
}

/// Values of S on each radial node of `patch` at M uniform angles
/// ψ_l = 2πl/M about the patch center.
pub fn ring_sum_on_patch(rings: &[Ring], sign: f64, patch: &PolarPatch, m_psi: usize) -> Vec<Vec<Complex64>> {
    let mut planner = FftPlanner::new();
    let y0 = patch.center;
    // G_n = Σ_j c_j e^{isρe(φ_j)·y₀} e^{inφ_j}
    let spectra: Vec<Vec<Complex64>> = rings
        .iter()
        .map(|ring| {
            let m = ring.coeffs.len();
            let mut g: Vec<Complex64> = ring
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    let ph = sign * ring.rho * (phi.cos() * y0[0] + phi.sin() * y0[1]);
                    if ph == 0.0 {
                        *c
                    } else {
                        c * Complex64::from_polar(1.0, ph)
                    }
                })
                .collect();
            planner.plan_fft_inverse(m).process(&mut g);
            g
        })
        .collect();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(m_psi);
    let is_pow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, sign),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -sign),
    ];
    let half = (m_psi - 1) / 2;
    par_map(&patch.nodes, |&(r, _)| {
        let mut a = vec![Complex64::new(0.0, 0.0); m_psi];
        for (ring, g) in rings.iter().zip(&spectra) {
            let m = g.len();
            let z = ring.rho * r;
            let ncut = bessel_cutoff(z).min(half);
            let jn = bessel_jn_array(z, ncut);
            a[0] += g[0] * jn[0];
            for n in 1..=ncut {
                // the ±n coefficients are both (is)ⁿ Jₙ
                let f = is_pow[n % 4] * jn[n];
                a[n] += f * g[n % m];
                a[m_psi - n] += f * g[(m - n % m) % m];
            }
        }
        forward.process(&mut a);
        a
    })
}

/// ∫ q(y) A(y) B(y) dy with A, B sampled by `ring_sum_on_patch`.
pub fn patch_bilinear(patch: &PolarPatch, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&(_, w), ra), rb) in patch.nodes.iter().zip(a).zip(b) {
        let m = ra.len() as f64;
        let s: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
        acc += s * (w * 2.0 * PI / m);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{potential_fourier, PotentialSpec};

    #[test]
    fn transform_matches_direct_sums() {
        let c = [3.0, -1.0];
        let rings = vec![
            Ring { rho: 2.5, coeffs: (0..16).map(|j| Complex64::new((j as f64).sin(), 0.3 * j as f64)).collect() },
            Ring { rho: 9.0, coeffs: (0..64).map(|j| Complex64::new(1.0 / (1.0 + j as f64), (j as f64).cos())).collect() },
        ];
        let patch = PolarPatch { center: [0.2, -0.1], radius: 0.5, nodes: vec![(0.1, 1.0), (0.45, 1.0)] };
        for sign in [-1.0, 1.0] {
            let m_psi = physical_angles(9.0, 0.5);
            let got = ring_sum_on_patch(&rings, sign, &patch, m_psi);
            for (i, &(r, _)) in patch.nodes.iter().enumerate() {
                for l in [0, 3, m_psi / 2 + 1] {
                    let psi = 2.0 * PI * l as f64 / m_psi as f64;
                    let y = [patch.center[0] + r * psi.cos(), patch.center[1] + r * psi.sin()];
                    let mut direct = Complex64::new(0.0, 0.0);
                    for ring in &rings {
                        let m = ring.coeffs.len();
                        for (j, cj) in ring.coeffs.iter().enumerate() {
                            let phi = 2.0 * PI * j as f64 / m as f64;
                            let nu = [c[0] + ring.rho * phi.cos(), c[1] + ring.rho * phi.sin()];
                            direct += cj * Complex64::from_polar(1.0, sign * (nu[0] * y[0] + nu[1] * y[1]));
                        }
                    }
                    // restore the dropped center phase
                    let ours = got[i][l] * Complex64::from_polar(1.0, sign * (c[0] * y[0] + c[1] * y[1]));
                    assert!((ours - direct).norm() < 1e-12 * (1.0 + direct.norm()), "{ours} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn bilinear_reproduces_fourier_transform() {
        // ∫ q e^{−iν·y} e^{iμ·y} = q̂(ν − μ) for single-node rings
        let spec: PotentialSpec = "disk(radius=0.6, amplitude=1.3, cx=0.1, cy=0.05)".parse().unwrap();
        let mut nu = vec![Complex64::new(0.0, 0.0); 8];
        nu[1] = Complex64::new(1.0, 0.0);
        let mut mu = vec![Complex64::new(0.0, 0.0); 8];
        mu[6] = Complex64::new(1.0, 0.0);
        let a = vec![Ring { rho: 20.0, coeffs: nu }];
        let b = vec![Ring { rho: 20.0, coeffs: mu }];
        let patch = &spec.physical_patches(40.0)[0];
        let m_psi = physical_angles(20.0, 0.6);
        let sa = ring_sum_on_patch(&a, -1.0, patch, m_psi);
        let sb = ring_sum_on_patch(&b, 1.0, patch, m_psi);
        let got = patch_bilinear(patch, &sa, &sb);
        let p1 = 2.0 * PI / 8.0;
        let p6 = 6.0 * p1;
        let d = [20.0 * (p1.cos() - p6.cos()), 20.0 * (p1.sin() - p6.sin())];
        let exact = potential_fourier(&spec, d).unwrap();
        assert!((got - exact).norm() < 1e-9, "{got} vs {exact}");
    }
}
