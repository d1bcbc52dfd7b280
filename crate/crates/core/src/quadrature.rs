//! Gauss–Legendre rules and composite panel quadrature on intervals.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, lazily computed Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = rules.lock().expect("quadrature rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussRule::compute(n)))
        .clone()
}

/// Composite Gauss–Legendre nodes on [a, b] using panels no wider than `max_width`.
pub fn composite(a: f64, b: f64, max_width: f64, order: usize) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        out.extend(rule.mapped(lo, lo + h));
    }
    out
}

/// Composite rule on [0, b] with geometric grading towards 0, suited to
/// integrable endpoint singularities of power type.
pub fn graded_from_zero(b: f64, levels: usize, ratio: f64, order: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let mut out = Vec::new();
    let mut hi = b;
    for _ in 0..levels {
        let lo = hi * ratio;
        out.extend(rule.mapped(lo, hi));
        hi = lo;
    }
    out.extend(rule.mapped(0.0, hi));
    out
}

/// Adaptive Gauss–Legendre integration with panel bisection; returns
/// (value, error estimate).
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: usize) -> (f64, f64) {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        lo: &GaussRule,
        hi: &GaussRule,
    ) -> (f64, f64) {
        let coarse = lo.integrate(a, b, f);
        let fine = hi.integrate(a, b, f);
        let err = (fine - coarse).abs();
        if err <= tol || depth == 0 {
            return (fine, err);
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, mid, 0.5 * tol, depth - 1, lo, hi);
        let (v2, e2) = rec(f, mid, b, 0.5 * tol, depth - 1, lo, hi);
        (v1 + v2, e1 + e2)
    }
    rec(f, a, b, tol, max_depth, &lo, &hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33, 128, 512] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let r = gauss_legendre(6);
        // degree 11 is integrated exactly
        let v = r.integrate(0.0, 2.0, |x| x.powi(11) - 3.0 * x.powi(4));
        let exact = 2f64.powi(12) / 12.0 - 3.0 * 2f64.powi(5) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
    }

    #[test]
    fn graded_rule_handles_power_singularity() {
        let pts = graded_from_zero(1.0, 60, 0.3, 16);
        let v: f64 = pts.iter().map(|&(x, w)| w * x.powf(-0.6)).sum();
        assert_relative_eq!(v, 1.0 / 0.4, max_relative = 1e-10);
    }

    #[test]
    fn adaptive_oscillatory() {
        let (v, _) = adaptive(&|x: f64| (30.0 * x).cos(), 0.0, 1.0, 1e-13, 30);
        assert_relative_eq!(v, (30.0f64).sin() / 30.0, max_relative = 1e-11);
    }
}
