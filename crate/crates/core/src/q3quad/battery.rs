//! Randomized battery over the geometric identities the quadrature rests on.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use serde::Serialize;

use super::geometry::*;
use super::swap::{measure_swap_check, SwapBounds};
use crate::error::Result;

/// Worst observed deviation of one identity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl LemmaCheck {
    pub fn new(name: &str, samples: usize, worst: f64, tolerance: f64) -> Self {
        LemmaCheck { name: name.into(), samples, worst, tolerance, pass: worst <= tolerance }
    }

    pub fn csv_header() -> &'static str {
        "name,samples,worst,tolerance,pass"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{:e},{:e},{}", self.name, self.samples, self.worst, self.tolerance, self.pass)
    }
}

/// Sample counts of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatterySize {
    pub reflections: usize,
    pub circles: usize,
    pub corona_nodes: usize,
}

impl Default for BatterySize {
    fn default() -> Self {
        BatterySize { reflections: 100_000, circles: 1000, corona_nodes: 10_000 }
    }
}

fn unit(a: f64) -> [f64; 2] {
    [a.cos(), a.sin()]
}

fn bump(r: f64, a: f64, b: f64) -> f64 {
    if r <= a || r >= b {
        0.0
    } else {
        (-1.0 / ((r - a) * (b - r))).exp()
    }
}

/// Reflection identities, circle measure, D₂ factorization, the measure
/// swap on a smooth battery and the corona denominator bound.
pub fn lemma_battery(seed: u64, size: BatterySize) -> Result<Vec<LemmaCheck>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut refl = [0.0f64; 4];
    for _ in 0..size.reflections {
        let r = rng.gen_range(1.0..500.0);
        let eta = unit(rng.gen_range(0.0..2.0 * PI)).map(|c| c * r);
        let rho = rng.gen_range(1e-3..0.999) * r;
        let b = unit(rng.gen_range(0.0..2.0 * PI));
        let tau = [0.5 * eta[0] + rho * b[0], 0.5 * eta[1] + rho * b[1]];
        for (w, v) in refl.iter_mut().zip(reflection_identities(eta, tau)?) {
            *w = w.max(v);
        }
    }
    let mut out: Vec<LemmaCheck> = ["reflection antisymmetry", "reflection jacobian", "reflection displacement", "reflected D2"]
        .iter()
        .zip(refl)
        .map(|(name, w)| LemmaCheck::new(name, size.reflections, w, 1e-12))
        .collect();

    let (mut measure, mut factor) = (0.0f64, 0.0f64);
    for _ in 0..size.circles {
        let r = rng.gen_range(1.0..1000.0);
        let eta = unit(rng.gen_range(0.0..2.0 * PI)).map(|c| c * r);
        let frame = CircleFrame::new(eta, 64)?;
        let one = circle_quadrature(&frame, |_| Complex64::new(1.0, 0.0))?;
        measure = measure.max((one.re - PI * r).abs() / (PI * r)).max((frame.measure() - PI * r).abs() / (PI * r));
        let pair = DenominatorPair { eta };
        let tau = [rng.gen_range(-2.0..2.0) * r, rng.gen_range(-2.0..2.0) * r];
        factor = factor.max((pair.d2(tau) - pair.d2_factored(tau)).abs() / (r * r));
    }
    out.push(LemmaCheck::new("circle measure", size.circles, measure, 1e-12));
    out.push(LemmaCheck::new("D2 factorization", size.circles, factor, 1e-12));

    let cases: [&(dyn Fn([f64; 2], [f64; 2]) -> f64 + Sync); 3] = [
        &|eta, xi| bump(eta[0].hypot(eta[1]), 1.0, 3.0) * (1.0 + 0.3 * xi[1].atan2(xi[0]).cos()),
        &|eta, xi| bump(eta[0].hypot(eta[1]), 0.5, 3.5) * (-(xi[0] - 0.5).powi(2) - xi[1].powi(2)).exp(),
        &|eta, xi| bump(eta[0].hypot(eta[1]), 1.5, 3.0) * (1.0 + xi[0] * eta[1]).powi(2),
    ];
    let swap = cases
        .iter()
        .map(|f| {
            let (a, b) = measure_swap_check(f, SwapBounds::default());
            (a - b).abs() / a.abs()
        })
        .fold(0.0, f64::max);
    out.push(LemmaCheck::new("measure swap", cases.len(), swap, 1e-6));

    // margin below the bound, so a violation is positive
    let (mut worst, mut nodes) = (f64::NEG_INFINITY, 0);
    while nodes < size.corona_nodes {
        let r = rng.gen_range(16.0..400.0);
        let eta = unit(rng.gen_range(0.0..2.0 * PI)).map(|c| c * r);
        let p = AnnulusPartition::new(eta, 2.0, 1)?;
        for j in 1..=p.n {
            let check = corona_denominator_bound(&p, j, 100, &mut rng)?;
            if check.samples > 0 {
                worst = worst.max(-check.worst_margin);
            }
            nodes += check.samples;
        }
    }
    out.push(LemmaCheck::new("corona denominator bound", nodes, worst, 1e-12));
    Ok(out)
}
