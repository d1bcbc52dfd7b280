//! Bessel and Hankel functions of orders 0 and 1 for real arguments.
//!
//! Real-order-0/1 Bessel functions come from `libm` (musl ports of the
//! fdlibm rational approximations, accurate to a few ulp).

use num_complex::Complex64;

#[inline]
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

#[inline]
pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

#[inline]
pub fn bessel_y0(x: f64) -> f64 {
    libm::y0(x)
}

#[inline]
pub fn bessel_y1(x: f64) -> f64 {
    libm::y1(x)
}

/// Outgoing Hankel function H₀⁽¹⁾(x) = J₀(x) + i Y₀(x), x > 0.
#[inline]
pub fn hankel0(x: f64) -> Complex64 {
    Complex64::new(bessel_j0(x), bessel_y0(x))
}

/// Outgoing Hankel function H₁⁽¹⁾(x) = J₁(x) + i Y₁(x), x > 0.
#[inline]
pub fn hankel1(x: f64) -> Complex64 {
    Complex64::new(bessel_j1(x), bessel_y1(x))
}

/// J₁(x)/x with its limit 1/2 at the origin.
#[inline]
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        0.5 - x2 / 16.0 + x2 * x2 / 384.0
    } else {
        bessel_j1(x) / x
    }
}

/// J_0(x), …, J_{nmax}(x) for x ≥ 0 by Miller's backward recurrence,
/// normalized with J₀ + 2ΣJ₂ₖ = 1.
pub fn bessel_jn_array(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let big = (nmax as f64).max(x);
    let start = (big + 20.0 + (40.0 * big).sqrt()) as usize | 1;
    let start = start + 1;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (0..start).rev() {
        // j holds J_{k+1}; compute J_k
        let jk = 2.0 * (k + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jk;
        if k <= nmax {
            out[k] = jk;
        }
        if k % 2 == 0 {
            norm += if k == 0 { jk } else { 2.0 * jk };
        }
        if jk.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    out
}
