//! Square Cartesian grids, the continuous-scaling Fourier transform on
//! them, and dyadic shell statistics of spectra.
//!
//! Convention: `f̂(ξ) = ∫ e^{-i x·ξ} f(x) dx`, approximated by the Riemann
//! sum over grid points `x_j = -L + j h` (h = 2L/n). The dual lattice is
//! `ξ_m = m π/L`, `m ∈ [-n/2, n/2)`, stored in FFT index order.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square grid on `[-L, L)²` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
}

impl Grid2D {
    /// `n` must be at least 16 and of the form 2^a or 3·2^a.
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::Config(format!("grid size n = {n} must be at least 16")));
        }
        let odd = n >> n.trailing_zeros();
        if odd != 1 && odd != 3 {
            return Err(Error::Config(format!(
                "grid size n = {n} must be a power of two or three times a power of two"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("half width L = {half_width} must be positive")));
        }
        Ok(Grid2D { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn dual_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest |ξ| fully represented along both axes.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / (2.0 * self.half_width)
    }

    /// Radius of the largest centered disk contained in the dual lattice box.
    pub fn inscribed_radius(&self) -> f64 {
        (self.n as f64 / 2.0 - 1.0) * self.dual_spacing()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Physical point of flat index `iy * n + ix`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx % self.n), self.coord(idx / self.n)]
    }

    /// Signed frequency index of FFT position `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Dual lattice point at flat FFT-ordered index.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let d = self.dual_spacing();
        [
            self.signed_index(idx % self.n) as f64 * d,
            self.signed_index(idx / self.n) as f64 * d,
        ]
    }

    /// Flat index of the lattice point `-ξ` (the point `-n/2` maps to itself).
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (ix, iy) = (idx % n, idx / n);
        ((n - iy) % n) * n + (n - ix) % n
    }

    /// Flat index of the lattice point with signed indices (mx, my), if on the lattice.
    pub fn index_of_signed(&self, mx: i64, my: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if mx < -h || mx >= h || my < -h || my >= h {
            return None;
        }
        let n = self.n as i64;
        Some((((my + n) % n) * n + (mx + n) % n) as usize)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Config(format!(
                "field has {len} samples but grid expects {}",
                self.len()
            )));
        }
        Ok(())
    }
}

macro_rules! field_type {
    ($(#[$m:meta])* $name:ident, $elem:ty) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T: Scalar> {
            grid: Grid2D,
            values: Vec<$elem>,
        }

        impl<T: Scalar> $name<T> {
            pub fn new(grid: Grid2D, values: Vec<$elem>) -> Result<Self> {
                grid.check_len(values.len())?;
                Ok(Self { grid, values })
            }

            pub fn zeros(grid: Grid2D) -> Self {
                Self { grid, values: vec![<$elem>::default(); grid.len()] }
            }

            pub fn grid(&self) -> &Grid2D {
                &self.grid
            }

            pub fn values(&self) -> &[$elem] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [$elem] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<$elem> {
                self.values
            }
        }
    };
}

field_type!(
    /// Real samples in physical space.
    RealField, T
);
field_type!(
    /// Complex samples in physical space.
    ComplexField, Complex<T>
);
field_type!(
    /// Complex samples on the dual lattice, FFT index order.
    SpectrumField, Complex<T>
);

impl<T: Scalar> RealField<T> {
    pub fn from_fn<F: FnMut([f64; 2]) -> f64>(grid: Grid2D, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| T::of(f(grid.point(i)))).collect();
        RealField { grid, values }
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }
}

impl<T: Scalar> ComplexField<T> {
    pub fn from_fn<F: FnMut([f64; 2]) -> Complex<f64>>(grid: Grid2D, mut f: F) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let z = f(grid.point(i));
                Complex::new(T::of(z.re), T::of(z.im))
            })
            .collect();
        ComplexField { grid, values }
    }

    /// Real part, together with the largest |Im| relative to the field norm.
    pub fn real_part(&self) -> (RealField<T>, f64) {
        let norm = self
            .values
            .iter()
            .map(|z| z.norm_sqr().as_f64())
            .sum::<f64>()
            .sqrt();
        let max_im = self.values.iter().map(|z| z.im.abs().as_f64()).fold(0.0, f64::max);
        let field = RealField { grid: self.grid, values: self.values.iter().map(|z| z.re).collect() };
        (field, if norm > 0.0 { max_im / norm } else { 0.0 })
    }
}

impl<T: Scalar> SpectrumField<T> {
    pub fn from_fn<F: FnMut([f64; 2]) -> Complex<f64>>(grid: Grid2D, mut f: F) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let z = f(grid.frequency(i));
                Complex::new(T::of(z.re), T::of(z.im))
            })
            .collect();
        SpectrumField { grid, values }
    }

    /// Largest |v(-ξ) - conj v(ξ)| relative to max |v|.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.values.iter().map(|z| z.norm().as_f64()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.grid.len())
            .map(|i| {
                let j = self.grid.negated_index(i);
                (self.values[j] - self.values[i].conj()).norm().as_f64()
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Replace v(ξ) by (v(ξ) + conj v(-ξ))/2.
    pub fn symmetrize_hermitian(&mut self) {
        let half = T::of(0.5);
        let old = self.values.clone();
        for (i, v) in self.values.iter_mut().enumerate() {
            let j = self.grid.negated_index(i);
            *v = (old[i] + old[j].conj()) * half;
        }
    }

    /// Σ |F|² (Δξ)², optionally restricted to |ξ| > cutoff.
    pub fn energy_above(&self, cutoff: f64) -> f64 {
        let d2 = self.grid.dual_spacing().powi(2);
        (0..self.grid.len())
            .filter(|&i| norm2(self.grid.frequency(i)) > cutoff)
            .map(|i| self.values[i].norm_sqr().as_f64() * d2)
            .sum()
    }
}

#[inline]
pub(crate) fn norm2(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// A physical-space field that can be transformed.
pub trait PhysicalField<T: Scalar> {
    fn grid(&self) -> &Grid2D;
    fn complex_samples(&self) -> Vec<Complex<T>>;
}

impl<T: Scalar> PhysicalField<T> for RealField<T> {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }
    fn complex_samples(&self) -> Vec<Complex<T>> {
        self.values.iter().map(|&v| Complex::new(v, T::zero())).collect()
    }
}

impl<T: Scalar> PhysicalField<T> for ComplexField<T> {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }
    fn complex_samples(&self) -> Vec<Complex<T>> {
        self.values.clone()
    }
}

/// Pre-planned 2D transforms for one grid; reusable across calls and threads.
#[derive(Clone)]
pub struct FourierTransformer<T: Scalar> {
    grid: Grid2D,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for FourierTransformer<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierTransformer").field("grid", &self.grid).finish()
    }
}

impl<T: Scalar> FourierTransformer<T> {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        FourierTransformer {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Unscaled 2D DFT (e^{-2πi jm/n}) in place.
    pub(crate) fn raw_forward(&self, data: &mut [Complex<T>]) {
        self.fft2(data, &self.forward);
    }

    /// Unscaled 2D inverse DFT in place.
    pub(crate) fn raw_inverse(&self, data: &mut [Complex<T>]) {
        self.fft2(data, &self.inverse);
    }

    fn fft2(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }

    /// Physical samples → continuous-scaling spectrum, in place.
    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        let n = self.grid.n();
        self.fft2(data, &self.forward);
        let h = T::of(self.grid.spacing());
        let scale = h * h;
        for (idx, v) in data.iter_mut().enumerate() {
            let sign = if (idx % n + idx / n).is_multiple_of(2) { scale } else { -scale };
            *v = *v * sign;
        }
    }

    /// Continuous-scaling spectrum → physical samples, in place.
    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        let n = self.grid.n();
        let scale = T::of(1.0 / (4.0 * self.grid.half_width() * self.grid.half_width()));
        for (idx, v) in data.iter_mut().enumerate() {
            let sign = if (idx % n + idx / n).is_multiple_of(2) { scale } else { -scale };
            *v = *v * sign;
        }
        self.fft2(data, &self.inverse);
    }

    pub fn forward<F: PhysicalField<T>>(&self, f: &F) -> Result<SpectrumField<T>> {
        if *f.grid() != self.grid {
            return Err(Error::Config("field grid does not match transformer grid".into()));
        }
        let mut data = f.complex_samples();
        self.grid.check_len(data.len())?;
        self.forward_in_place(&mut data);
        Ok(SpectrumField { grid: self.grid, values: data })
    }

    pub fn inverse(&self, spectrum: &SpectrumField<T>) -> Result<ComplexField<T>> {
        if spectrum.grid != self.grid {
            return Err(Error::Config("spectrum grid does not match transformer grid".into()));
        }
        let mut data = spectrum.values.clone();
        self.inverse_in_place(&mut data);
        Ok(ComplexField { grid: self.grid, values: data })
    }
}

fn transpose_square<C: Copy>(data: &mut [C], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Riemann-sum approximation of the continuous Fourier transform.
pub fn fourier_forward<T: Scalar, F: PhysicalField<T>>(f: &F) -> Result<SpectrumField<T>> {
    FourierTransformer::new(*f.grid()).forward(f)
}

/// Exact inverse of [`fourier_forward`] on the lattice.
pub fn fourier_inverse<T: Scalar>(spectrum: &SpectrumField<T>) -> Result<ComplexField<T>> {
    FourierTransformer::new(*spectrum.grid()).inverse(spectrum)
}

/// One radial shell `[lower, upper)` of a spectrum.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Shell {
    /// Shell index: bounds are 2^(j/b) and 2^((j+1)/b) for b shells per octave.
    pub index: i32,
    pub lower: f64,
    pub upper: f64,
    pub energy: f64,
    pub count: usize,
    /// At least [`MIN_SHELL_POINTS`] lattice points.
    pub reliable: bool,
    /// Not clipped by the cutoff or by the lattice box.
    pub complete: bool,
}

pub const MIN_SHELL_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShellTable {
    pub cutoff: f64,
    pub shells_per_octave: u32,
    pub shells: Vec<Shell>,
}

impl ShellTable {
    pub fn total_energy(&self) -> f64 {
        self.shells.iter().map(|s| s.energy).sum()
    }

    pub fn reliable_count(&self) -> usize {
        self.shells.iter().filter(|s| s.reliable).count()
    }

    pub fn shell(&self, index: i32) -> Option<&Shell> {
        self.shells.iter().find(|s| s.index == index)
    }
}

fn shell_index(r: f64, per_octave: u32) -> i32 {
    let b = per_octave as f64;
    let mut j = (b * r.log2()).floor() as i32;
    while 2f64.powf(j as f64 / b) > r {
        j -= 1;
    }
    while 2f64.powf((j + 1) as f64 / b) <= r {
        j += 1;
    }
    j
}

/// Dyadic shell energies `E_j = Σ_{2^j ≤ |ξ| < 2^{j+1}, |ξ| > cutoff} |F|² (Δξ)²`.
pub fn shell_energies<T: Scalar>(spectrum: &SpectrumField<T>, cutoff: f64) -> Result<ShellTable> {
    shell_energies_with(spectrum, cutoff, 1)
}

/// Shell energies with `per_octave` shells per factor of two in |ξ|.
pub fn shell_energies_with<T: Scalar>(
    spectrum: &SpectrumField<T>,
    cutoff: f64,
    per_octave: u32,
) -> Result<ShellTable> {
    if !(cutoff >= 0.0) {
        return Err(Error::Config(format!("cutoff {cutoff} must be non-negative")));
    }
    if per_octave == 0 {
        return Err(Error::Config("shells per octave must be positive".into()));
    }
    let grid = *spectrum.grid();
    let d2 = grid.dual_spacing().powi(2);
    let mut acc: std::collections::BTreeMap<i32, (f64, usize)> = Default::default();
    for (i, v) in spectrum.values().iter().enumerate() {
        let r = norm2(grid.frequency(i));
        if r <= cutoff || r == 0.0 {
            continue;
        }
        let e = acc.entry(shell_index(r, per_octave)).or_insert((0.0, 0));
        e.0 += v.norm_sqr().as_f64() * d2;
        e.1 += 1;
    }
    let (Some(&first), Some(&last)) = (acc.keys().next(), acc.keys().next_back()) else {
        return Err(Error::Diagnostic("no lattice points above the cutoff".into()));
    };
    let b = per_octave as f64;
    let inscribed = grid.inscribed_radius();
    let shells: Vec<Shell> = (first..=last)
        .map(|j| {
            let (energy, count) = acc.get(&j).copied().unwrap_or((0.0, 0));
            let lower = 2f64.powf(j as f64 / b);
            let upper = 2f64.powf((j + 1) as f64 / b);
            Shell {
                index: j,
                lower,
                upper,
                energy,
                count,
                reliable: count >= MIN_SHELL_POINTS,
                complete: lower > cutoff && upper <= inscribed,
            }
        })
        .collect();
    let table = ShellTable { cutoff, shells_per_octave: per_octave, shells };
    if table.reliable_count() < 3 {
        return Err(Error::Diagnostic(format!(
            "grid too coarse: only {} reliable shells above cutoff {cutoff}",
            table.reliable_count()
        )));
    }
    Ok(table)
}

const MAGIC: &[u8; 8] = b"BSFIELD\0";
const FORMAT_VERSION: u32 = 1;

/// Sample kind tag of the binary field format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Real = 0,
    Complex = 1,
    Spectrum = 2,
}

/// Header of the little-endian binary field format:
/// magic `BSFIELD\0`, u32 version, u8 kind, 3 zero bytes, u64 n, f64 L,
/// followed by n² row-major samples (f64, or re/im f64 pairs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub kind: FieldKind,
    pub grid: Grid2D,
}

fn write_header<W: Write>(w: &mut W, kind: FieldKind, grid: &Grid2D) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[kind as u8, 0, 0, 0])?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.half_width().to_le_bytes())?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<FieldHeader> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad field magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != FORMAT_VERSION {
        return Err(Error::Format("unsupported field format version".into()));
    }
    r.read_exact(&mut b4)?;
    let kind = match b4[0] {
        0 => FieldKind::Real,
        1 => FieldKind::Complex,
        2 => FieldKind::Spectrum,
        k => return Err(Error::Format(format!("unknown field kind {k}"))),
    };
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let grid = Grid2D::new(n, l).map_err(|e| Error::Format(e.to_string()))?;
    Ok(FieldHeader { kind, grid })
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn write_complex<W: Write, T: Scalar>(w: &mut W, values: &[Complex<T>]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for z in values {
        buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
        buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn expect_kind(h: &FieldHeader, kind: FieldKind) -> Result<()> {
    if h.kind != kind {
        return Err(Error::Format(format!("expected {kind:?} field, found {:?}", h.kind)));
    }
    Ok(())
}

impl<T: Scalar> RealField<T> {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, FieldKind::Real, &self.grid)?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let h = read_header(r)?;
        expect_kind(&h, FieldKind::Real)?;
        let values = read_f64s(r, h.grid.len())?.into_iter().map(T::of).collect();
        Ok(RealField { grid: h.grid, values })
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        check_csv_size(&self.grid)?;
        writeln!(w, "x,y,value")?;
        for (i, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.point(i);
            writeln!(w, "{x},{y},{}", v.as_f64())?;
        }
        Ok(())
    }
}

fn complex_from_pairs<T: Scalar>(raw: Vec<f64>) -> Vec<Complex<T>> {
    raw.chunks_exact(2).map(|c| Complex::new(T::of(c[0]), T::of(c[1]))).collect()
}

fn check_csv_size(grid: &Grid2D) -> Result<()> {
    if grid.n() > 512 {
        return Err(Error::Format(format!("CSV export limited to n ≤ 512 (n = {})", grid.n())));
    }
    Ok(())
}

impl<T: Scalar> ComplexField<T> {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, FieldKind::Complex, &self.grid)?;
        write_complex(w, &self.values)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let h = read_header(r)?;
        expect_kind(&h, FieldKind::Complex)?;
        let values = complex_from_pairs(read_f64s(r, 2 * h.grid.len())?);
        Ok(ComplexField { grid: h.grid, values })
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        check_csv_size(&self.grid)?;
        writeln!(w, "x,y,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.point(i);
            writeln!(w, "{x},{y},{},{}", v.re.as_f64(), v.im.as_f64())?;
        }
        Ok(())
    }
}

impl<T: Scalar> SpectrumField<T> {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, FieldKind::Spectrum, &self.grid)?;
        write_complex(w, &self.values)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let h = read_header(r)?;
        expect_kind(&h, FieldKind::Spectrum)?;
        let values = complex_from_pairs(read_f64s(r, 2 * h.grid.len())?);
        Ok(SpectrumField { grid: h.grid, values })
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        check_csv_size(&self.grid)?;
        writeln!(w, "xi_x,xi_y,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.frequency(i);
            writeln!(w, "{x},{y},{},{}", v.re.as_f64(), v.im.as_f64())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid2D, seed: u64) -> ComplexField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexField::from_fn(grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(8, 1.0).is_err());
        assert!(Grid2D::new(100, 1.0).is_err());
        assert!(Grid2D::new(64, 0.0).is_err());
        assert!(Grid2D::new(384, 6.0).is_ok());
        let g = Grid2D::new(16, 1.0).unwrap();
        assert!(RealField::<f64>::new(g, vec![0.0; 10]).is_err());
    }

    #[test]
    fn gaussian_transform_matches_direct_quadrature() {
        // Oracle: direct separable quadrature of e^{-|x|²/2} e^{-i x·ξ} over [-12, 12]².
        let grid = Grid2D::new(256, 12.0).unwrap();
        let f = RealField::<f64>::from_fn(grid, |[x, y]| (-(x * x + y * y) / 2.0).exp());
        let spec = fourier_forward(&f).unwrap();
        let rule = crate::quadrature::composite(-12.0, 12.0, 0.5, 16);
        let one_d = |w: f64| -> Complex64 {
            rule.iter()
                .map(|&(x, wt)| Complex64::from_polar(wt * (-x * x / 2.0).exp(), -x * w))
                .sum()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let mx = rng.gen_range(-12i64..=12);
            let my = rng.gen_range(-12i64..=12);
            let idx = grid.index_of_signed(mx, my).unwrap();
            let xi = grid.frequency(idx);
            if norm2(xi) > 10.0 {
                continue;
            }
            let oracle = one_d(xi[0]) * one_d(xi[1]);
            let closed = 2.0 * std::f64::consts::PI * (-(xi[0] * xi[0] + xi[1] * xi[1]) / 2.0).exp();
            let got = spec.values()[idx];
            let tol = 1e-8 * oracle.norm().max(closed) + 1e-14;
            assert!((got - oracle).norm() <= tol, "ξ={xi:?} got {got} oracle {oracle}");
            checked += 1;
        }
    }

    #[test]
    fn disk_indicator_zero_frequency_is_area() {
        let grid = Grid2D::new(512, 2.0).unwrap();
        let h = grid.spacing();
        // cell-averaged indicator (exact area per cell to high accuracy via subsampling)
        let f = RealField::<f64>::from_fn(grid, |[x, y]| {
            let s = 16;
            let mut c = 0;
            for a in 0..s {
                for b in 0..s {
                    let px = x - h / 2.0 + (a as f64 + 0.5) * h / s as f64;
                    let py = y - h / 2.0 + (b as f64 + 0.5) * h / s as f64;
                    if px * px + py * py < 1.0 {
                        c += 1;
                    }
                }
            }
            c as f64 / (s * s) as f64
        });
        let spec = fourier_forward(&f).unwrap();
        assert_relative_eq!(spec.values()[0].re, std::f64::consts::PI, max_relative = 1e-4);
    }

    #[test]
    fn parseval_and_round_trip() {
        let grid = Grid2D::new(64, 3.0).unwrap();
        let f = random_field(grid, 11);
        let spec = fourier_forward(&f).unwrap();
        let h2 = grid.spacing().powi(2);
        let d2 = grid.dual_spacing().powi(2);
        let lhs: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * h2;
        let rhs: f64 = spec.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * d2
            / (4.0 * std::f64::consts::PI.powi(2));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        let back = fourier_inverse(&spec).unwrap();
        assert!(rel_diff(back.values(), f.values()) < 1e-12);
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let grid = Grid2D::new(32, 1.0).unwrap();
        let z = fourier_inverse(&SpectrumField::<f64>::zeros(grid)).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn hermitian_noise_inverts_to_real() {
        let grid = Grid2D::new(64, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut spec = SpectrumField::<f64>::from_fn(grid, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        spec.symmetrize_hermitian();
        assert!(spec.hermitian_defect() < 1e-15);
        let (_, im) = fourier_inverse(&spec).unwrap().real_part();
        assert!(im <= 1e-10, "imaginary fraction {im}");
    }

    #[test]
    fn real_field_has_hermitian_spectrum() {
        let grid = Grid2D::new(64, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = RealField::<f64>::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
        assert!(fourier_forward(&f).unwrap().hermitian_defect() < 1e-12);
    }

    #[test]
    fn shift_theorem() {
        let grid = Grid2D::new(128, 8.0).unwrap();
        let a = [0.5, -0.75]; // a multiple of the spacing h = 0.125
        let g = |x: f64, y: f64| (-(x * x + 2.0 * y * y)).exp() * (1.0 + x);
        let f = RealField::<f64>::from_fn(grid, |[x, y]| g(x, y));
        let fs = RealField::<f64>::from_fn(grid, |[x, y]| g(x - a[0], y - a[1]));
        let s = fourier_forward(&f).unwrap();
        let ss = fourier_forward(&fs).unwrap();
        let expect: Vec<Complex64> = s
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let xi = grid.frequency(i);
                v * Complex64::from_polar(1.0, -(xi[0] * a[0] + xi[1] * a[1]))
            })
            .collect();
        assert!(rel_diff(ss.values(), &expect) < 1e-10);
    }

    #[test]
    fn annulus_indicator_fills_one_shell() {
        let grid = Grid2D::new(256, 4.0).unwrap();
        let spec = SpectrumField::<f64>::from_fn(grid, |xi| {
            let r = norm2(xi);
            Complex64::new(if (16.0..32.0).contains(&r) { 1.0 } else { 0.0 }, 0.0)
        });
        let table = shell_energies(&spec, 10.0).unwrap();
        for s in &table.shells {
            if s.index == 4 {
                assert!(s.energy > 0.0);
            } else {
                assert_eq!(s.energy, 0.0, "shell {}", s.index);
            }
        }
    }

    #[test]
    fn power_law_shell_ratio() {
        // Oracle: ∫_{2^j}^{2^{j+1}} r^{-4} 2πr dr halves twice per shell.
        let grid = Grid2D::new(256, 4.0).unwrap();
        let spec = SpectrumField::<f64>::from_fn(grid, |xi| {
            let r = norm2(xi);
            Complex64::new(if r > 0.0 { r.powi(-2) } else { 0.0 }, 0.0)
        });
        let table = shell_energies(&spec, 10.0).unwrap();
        let interior: Vec<&Shell> = table.shells.iter().filter(|s| s.complete).collect();
        assert!(interior.len() >= 2);
        for w in interior.windows(2) {
            let ratio = w[1].energy / w[0].energy;
            assert!((ratio / 0.25 - 1.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn zero_spectrum_has_zero_shells() {
        let grid = Grid2D::new(128, 4.0).unwrap();
        let table = shell_energies(&SpectrumField::<f64>::zeros(grid), 10.0).unwrap();
        assert!(table.shells.iter().all(|s| s.energy == 0.0));
    }

    #[test]
    fn coarse_grid_is_diagnosed() {
        let grid = Grid2D::new(16, 4.0).unwrap();
        assert!(matches!(
            shell_energies(&SpectrumField::<f64>::zeros(grid), 10.0),
            Err(Error::Diagnostic(_))
        ));
    }

    #[test]
    fn binary_format_layout() {
        let grid = Grid2D::new(16, 1.5).unwrap();
        let f = RealField::<f64>::from_fn(grid, |[x, y]| x - 2.0 * y);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"BSFIELD\0");
        assert_eq!(buf.len(), 32 + 8 * 256);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 1.5);
        let back = RealField::<f64>::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(ComplexField::<f64>::read_binary(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn single_precision_round_trip() {
        let grid = Grid2D::new(32, 1.0).unwrap();
        let f = RealField::<f32>::from_fn(grid, |[x, y]| (x * 3.0).sin() * y);
        let back = fourier_inverse(&fourier_forward(&f).unwrap()).unwrap();
        let err = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a.re - b).abs())
            .fold(0.0f32, f32::max);
        assert!(err < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn shells_partition_high_frequency_energy(seed in any::<u64>(), cutoff in 0.0f64..20.0) {
            let grid = Grid2D::new(64, 1.0).unwrap();
            let f = random_field(grid, seed);
            let spec = fourier_forward(&f).unwrap();
            let table = shell_energies(&spec, cutoff).unwrap();
            let total = spec.energy_above(cutoff);
            prop_assert!((table.total_energy() - total).abs() <= 1e-12 * total);
        }

        #[test]
        fn round_trip_identity(seed in any::<u64>()) {
            let grid = Grid2D::new(32, 2.5).unwrap();
            let f = random_field(grid, seed);
            let back = fourier_inverse(&fourier_forward(&f).unwrap()).unwrap();
            prop_assert!(rel_diff(back.values(), f.values()) < 1e-12);
        }
    }
}
