//! Grid-sampled functions, the continuous-convention Fourier transform and
//! (weighted, quasi-) norms.
//!
//! The transform convention is `f^(xi) = int f(x) exp(-2 pi i <x, xi>) dx`,
//! discretized as a Riemann sum on the periodic box `[-L, L)^n`.

mod fft;
pub mod io;
mod scale;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

pub use fft::PreparedSpectrum;
pub(crate) use fft::transform as dft;
pub use scale::{scale_integral, ScaleGrid};

/// Uniform periodic grid on `[-half_extent, half_extent)^dimension`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dimension: usize,
    points_per_axis: usize,
    half_extent: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    dimension: usize,
    points_per_axis: usize,
    half_extent: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = LabError;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.dimension, spec.points_per_axis, spec.half_extent)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            dimension: g.dimension,
            points_per_axis: g.points_per_axis,
            half_extent: g.half_extent,
        }
    }
}

impl Grid {
    pub fn new(dimension: usize, points_per_axis: usize, half_extent: f64) -> Result<Self> {
        if !(dimension == 1 || dimension == 2) {
            return Err(LabError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if points_per_axis < 4 || !points_per_axis.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {points_per_axis}"
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        Ok(Grid {
            dimension,
            points_per_axis,
            half_extent,
        })
    }

    pub fn line(points_per_axis: usize, half_extent: f64) -> Result<Self> {
        Grid::new(1, points_per_axis, half_extent)
    }

    pub fn plane(points_per_axis: usize, half_extent: f64) -> Result<Self> {
        Grid::new(2, points_per_axis, half_extent)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Spatial period `2 L`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_extent
    }

    /// `2 L / n`; exact because `n` is a power of two.
    pub fn spacing(&self) -> f64 {
        self.period() / self.points_per_axis as f64
    }

    pub fn cell_count(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Reciprocal of the spatial period.
    pub fn frequency_spacing(&self) -> f64 {
        1.0 / self.period()
    }

    /// Largest resolved frequency, `1 / (2 h)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing()
    }

    /// Lebesgue measure of the box.
    pub fn measure(&self) -> f64 {
        self.period().powi(self.dimension as i32)
    }

    /// Same number of points on a box scaled by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Grid::new(self.dimension, self.points_per_axis, self.half_extent * factor)
    }

    pub fn axis_coordinate(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing()
    }

    /// Per-axis indices of a flat index (axis 0 is the slow axis).
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        if self.dimension == 1 {
            [idx, 0]
        } else {
            [idx / n, idx % n]
        }
    }

    pub fn flat_index(&self, axes: [usize; 2]) -> usize {
        if self.dimension == 1 {
            axes[0]
        } else {
            axes[0] * self.points_per_axis + axes[1]
        }
    }

    /// Spatial point of a flat index; unused trailing coordinates are zero.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let a = self.axis_indices(idx);
        if self.dimension == 1 {
            [self.axis_coordinate(a[0]), 0.0]
        } else {
            [self.axis_coordinate(a[0]), self.axis_coordinate(a[1])]
        }
    }

    /// Frequency of a flat index in centered order (`xi = (m - n/2) / (2L)`).
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let a = self.axis_indices(idx);
        let half = (self.points_per_axis / 2) as f64;
        let d = self.frequency_spacing();
        let f = |m: usize| (m as f64 - half) * d;
        if self.dimension == 1 {
            [f(a[0]), 0.0]
        } else {
            [f(a[0]), f(a[1])]
        }
    }

    /// Frequency of a flat index in FFT order.
    pub fn fft_frequency(&self, idx: usize) -> [f64; 2] {
        let a = self.axis_indices(idx);
        let n = self.points_per_axis;
        let d = self.frequency_spacing();
        let f = |k: usize| {
            if k < n / 2 {
                k as f64 * d
            } else {
                (k as f64 - n as f64) * d
            }
        };
        if self.dimension == 1 {
            [f(a[0]), 0.0]
        } else {
            [f(a[0]), f(a[1])]
        }
    }

    /// Signed minimal-image offset of an axis index difference, in cells.
    pub fn periodic_offset(&self, di: isize) -> isize {
        let n = self.points_per_axis as isize;
        let mut d = di.rem_euclid(n);
        if d > n / 2 {
            d -= n;
        }
        d
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(LabError::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.cell_count()],
        }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        SampledField {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    /// Samples `f` at every grid point; `f` receives a slice of length `dimension`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dimension();
        let values = (0..grid.cell_count())
            .map(|i| f(&grid.point(i)[..d]))
            .collect();
        SampledField { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise modulus as a real field.
    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Riemann sum of the samples.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Circular shift by whole cells: `g(x) = f(x - shift * h)`.
    pub fn shifted(&self, shift: [isize; 2]) -> Self {
        let n = self.grid.points_per_axis() as isize;
        let values = (0..self.len())
            .map(|idx| {
                let a = self.grid.axis_indices(idx);
                let src0 = (a[0] as isize - shift[0]).rem_euclid(n) as usize;
                let src1 = if self.grid.dimension() == 2 {
                    (a[1] as isize - shift[1]).rem_euclid(n) as usize
                } else {
                    0
                };
                self.values[self.grid.flat_index([src0, src1])]
            })
            .collect();
        SampledField {
            grid: self.grid,
            values,
        }
    }

    /// Applies the Fourier multiplier `symbol` (a convolution with the kernel it describes).
    pub fn filtered(&self, symbol: impl Fn(&[f64]) -> Complex64) -> Self {
        PreparedSpectrum::new(self).apply(symbol)
    }
}

/// Samples of a continuous-convention transform on the dual grid, centered at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SpectralField {
    /// `grid` is the spatial grid; frequencies are `(m - n/2) / (2 L)` per axis.
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(LabError::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(SpectralField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dimension();
        let values = (0..grid.cell_count())
            .map(|i| f(&grid.frequency(i)[..d]))
            .collect();
        SpectralField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn frequency_spacing(&self) -> f64 {
        self.grid.frequency_spacing()
    }

    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        self.grid.frequency(idx)
    }

    /// `(sum |F|^2 dxi^n)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let dv = self.frequency_spacing().powi(self.grid.dimension() as i32);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv).sqrt()
    }
}

/// Riemann-sum approximation of the continuous transform, centered frequencies.
pub fn to_spectrum(f: &SampledField) -> SpectralField {
    let grid = f.grid;
    let mut data = f.values.clone();
    fft::transform(&grid, &mut data, false);
    let scale = grid.cell_volume();
    let n = grid.points_per_axis();
    let values = (0..grid.cell_count())
        .map(|idx| {
            let a = grid.axis_indices(idx);
            // x_0 = -L contributes the phase (-1)^(m - n/2) = (-1)^m per axis
            let mut sign_exp = a[0];
            let mut src = [(a[0] + n / 2) % n, 0];
            if grid.dimension() == 2 {
                sign_exp += a[1];
                src[1] = (a[1] + n / 2) % n;
            }
            let sign = if sign_exp % 2 == 0 { 1.0 } else { -1.0 };
            data[grid.flat_index(src)] * (scale * sign)
        })
        .collect();
    SpectralField { grid, values }
}

/// Exact inverse of [`to_spectrum`].
pub fn from_spectrum(spec: &SpectralField) -> SampledField {
    let grid = spec.grid;
    let n = grid.points_per_axis();
    let mut data = vec![Complex64::new(0.0, 0.0); grid.cell_count()];
    for (idx, &v) in spec.values.iter().enumerate() {
        let a = grid.axis_indices(idx);
        let mut sign_exp = a[0];
        let mut dst = [(a[0] + n / 2) % n, 0];
        if grid.dimension() == 2 {
            sign_exp += a[1];
            dst[1] = (a[1] + n / 2) % n;
        }
        let sign = if sign_exp % 2 == 0 { 1.0 } else { -1.0 };
        data[grid.flat_index(dst)] = v * sign;
    }
    fft::transform(&grid, &mut data, true);
    let scale = grid.frequency_spacing().powi(grid.dimension() as i32);
    for v in &mut data {
        *v *= scale;
    }
    SampledField { grid, values: data }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "exponent must be positive and finite, got {p}"
        )));
    }
    Ok(())
}

/// `(sum |f|^p h^n)^(1/p)`; a quasi-norm for `p < 1`.
pub fn lp_norm(f: &SampledField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let sum: f64 = f.values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((sum * f.grid.cell_volume()).powf(1.0 / p))
}

/// `(sum |f|^p w h^n)^(1/p)`; the weight is read from the real parts of `w`.
pub fn weighted_lp_norm(f: &SampledField, w: &SampledField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    f.grid.check_same(&w.grid)?;
    let mut sum = 0.0;
    for (i, (v, wv)) in f.values.iter().zip(&w.values).enumerate() {
        if wv.re < 0.0 {
            return Err(LabError::NegativeWeight {
                index: i,
                value: wv.re,
            });
        }
        sum += v.norm().powf(p) * wv.re;
    }
    Ok((sum * f.grid.cell_volume()).powf(1.0 / p))
}
