//! Restarted GMRES for complex linear systems given only as an operator.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Target relative residual ‖b − Ax‖/‖b‖.
    pub tol: f64,
    /// Krylov dimension between restarts.
    pub restart: usize,
    /// Total operator applications allowed.
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 1e-10, restart: 60, max_iterations: 600 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual after each iteration (Arnoldi estimate).
    pub history: Vec<f64>,
    /// True relative residual recomputed at exit.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve A x = b starting from x = 0. `apply(v, out)` writes A v into `out`.
pub fn gmres<F>(mut apply: F, b: &[Complex64], opts: GmresOptions) -> Result<GmresOutcome>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x, iterations: 0, history: vec![0.0], residual: 0.0 });
    }
    let m = opts.restart.max(1);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    loop {
        // r = b − A x
        if iterations > 0 {
            apply(&x, &mut w);
            for i in 0..n {
                r[i] = b[i] - w[i];
            }
        }
        let beta = norm(&r);
        if beta / bnorm <= opts.tol {
            history.push(beta / bnorm);
            return Ok(GmresOutcome { x, iterations, history, residual: beta / bnorm });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: beta / bnorm, history });
        }

        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;

        for j in 0..m {
            apply(&basis[j], &mut w);
            iterations += 1;
            // modified Gram–Schmidt
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = Complex64::new(hn, 0.0);
            // previous rotations
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            // new rotation annihilating h[j+1][j]
            let a = h[j][j];
            let bb = h[j + 1][j];
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                cs[j] = Complex64::new(1.0, 0.0);
                sn[j] = Complex64::new(0.0, 0.0);
            } else {
                cs[j] = a / den;
                sn[j] = bb / den;
            }
            h[j][j] = cs[j].conj() * a + sn[j].conj() * bb;
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            used = j + 1;
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= opts.tol || hn == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }

        // back substitution
        let mut y = vec![Complex64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }
    }
}
