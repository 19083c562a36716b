//! Scale fields `E(psi, f)(x, t) = f * psi_t(x)`, the continuous and discrete
//! square functions, the synthesis operator `F^eps_psi` and `(p, inf)` atoms.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::io::{expect_magic, read_f64, read_grid_header, read_u32, read_values, write_grid_header, write_values};
use crate::field::{dft, from_spectrum, Grid, PreparedSpectrum, SampledField, ScaleGrid, SpectralField};
use crate::kernel::{norm, KernelSpec};
use crate::numeric::{ordered_sum, solve_augmented};
use crate::smooth::transition;
use crate::{LabError, Result};

const SCALE_MAGIC: &[u8; 4] = b"LPS1";

/// Complex samples indexed by (scale, space), scale-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleField {
    grid: Grid,
    scales: ScaleGrid,
    values: Vec<Complex64>,
}

impl ScaleField {
    pub fn new(grid: Grid, scales: ScaleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cell_count() * scales.len() {
            return Err(LabError::GridMismatch(format!(
                "{} values for {} scales x {} cells",
                values.len(),
                scales.len(),
                grid.cell_count()
            )));
        }
        Ok(ScaleField { grid, scales, values })
    }

    pub fn zeros(grid: Grid, scales: ScaleGrid) -> Self {
        let len = grid.cell_count() * scales.len();
        ScaleField {
            grid,
            scales,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_slices(scales: ScaleGrid, slices: Vec<SampledField>) -> Result<Self> {
        let first = slices.first().ok_or(LabError::EmptyScaleGrid)?;
        let grid = *first.grid();
        if slices.len() != scales.len() {
            return Err(LabError::GridMismatch(format!(
                "{} slices for {} scales",
                slices.len(),
                scales.len()
            )));
        }
        let mut values = Vec::with_capacity(grid.cell_count() * scales.len());
        for s in slices {
            grid.check_same(s.grid())?;
            values.extend(s.into_values());
        }
        Ok(ScaleField { grid, scales, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn slice_values(&self, k: usize) -> &[Complex64] {
        let c = self.grid.cell_count();
        &self.values[k * c..(k + 1) * c]
    }

    pub fn slice(&self, k: usize) -> SampledField {
        SampledField::new(self.grid, self.slice_values(k).to_vec()).expect("slice length")
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScaleField {
            grid: self.grid,
            scales: self.scales.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Every slice shifted by whole cells, as [`SampledField::shifted`].
    pub fn shifted(&self, shift: [isize; 2]) -> Self {
        let slices = (0..self.scales.len()).map(|k| self.slice(k).shifted(shift)).collect();
        Self::from_slices(self.scales.clone(), slices).expect("same layout")
    }

    /// `(int |h(x, t)|^q dt/t)^(1/q)` pointwise.
    pub fn scale_norm(&self, q: f64) -> Result<SampledField> {
        check_q(q)?;
        let w = self.scales.log_weights();
        let c = self.grid.cell_count();
        let mut acc = vec![0.0; c];
        for (k, wk) in w.iter().enumerate() {
            for (a, v) in acc.iter_mut().zip(&self.values[k * c..(k + 1) * c]) {
                *a += wk * v.norm().powf(q);
            }
        }
        Ok(real_field(self.grid, acc.into_iter().map(|v| v.powf(1.0 / q)).collect()))
    }
}

fn real_field(g: Grid, values: Vec<f64>) -> SampledField {
    SampledField::new(g, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).expect("grid sized")
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(LabError::InvalidParameter(format!("q must be positive, got {q}")));
    }
    Ok(())
}

/// Binary container: magic `LPS1`, grid header, `u32` scale count, `u8`
/// geometric flag with `f64` ratio, the scales, then the scale-major payload.
pub fn write_scale_field(w: &mut impl Write, h: &ScaleField) -> Result<()> {
    w.write_all(SCALE_MAGIC)?;
    write_grid_header(w, &h.grid)?;
    w.write_all(&(h.scales.len() as u32).to_le_bytes())?;
    match h.scales.ratio() {
        Some(r) => {
            w.write_all(&[1])?;
            w.write_all(&r.to_le_bytes())?;
        }
        None => {
            w.write_all(&[0])?;
            w.write_all(&0f64.to_le_bytes())?;
        }
    }
    for t in h.scales.scales() {
        w.write_all(&t.to_le_bytes())?;
    }
    write_values(w, &h.values)
}

pub fn read_scale_field(r: &mut impl Read) -> Result<ScaleField> {
    expect_magic(r, SCALE_MAGIC)?;
    let grid = read_grid_header(r)?;
    let count = read_u32(r)? as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let ratio = read_f64(r)?;
    let scales = (0..count).map(|_| read_f64(r)).collect::<Result<Vec<f64>>>()?;
    let scales = ScaleGrid::from_raw(scales, (flag[0] == 1).then_some(ratio))
        .map_err(|e| LabError::Format(e.to_string()))?;
    let values = read_values(r, count * grid.cell_count())?;
    ScaleField::new(grid, scales, values)
}

/// `E(psi, f)(x, t_k)`, the inverse transform of `f^(xi) psi^(t_k xi)`.
pub fn scale_transform(f: &SampledField, psi: &KernelSpec, scales: &ScaleGrid) -> ScaleField {
    let prepared = PreparedSpectrum::new(f);
    let slices: Vec<SampledField> = scales
        .scales()
        .par_iter()
        .map(|&t| prepared.apply(|xi| psi.symbol_at_scale(xi, t)))
        .collect();
    ScaleField::from_slices(scales.clone(), slices).expect("one slice per scale")
}

/// `g_psi(f)(x) = (int |f * psi_t(x)|^q dt/t)^(1/q)` on the scale grid.
pub fn g_function(f: &SampledField, psi: &KernelSpec, scales: &ScaleGrid, q: f64) -> Result<SampledField> {
    check_q(q)?;
    let prepared = PreparedSpectrum::new(f);
    let g = *f.grid();
    let weights = scales.log_weights();
    let ts = scales.scales();
    let acc = ordered_sum(ts.len(), g.cell_count(), |k| {
        prepared
            .apply(|xi| psi.symbol_at_scale(xi, ts[k]))
            .values()
            .iter()
            .map(|v| weights[k] * v.norm().powf(q))
            .collect::<Vec<f64>>()
    });
    Ok(real_field(g, acc.into_iter().map(|v| v.powf(1.0 / q)).collect()))
}

/// `(sum_{j in j_range} |f * psi_{b^j}(x)|^q)^(1/q)`.
pub fn g_discrete(f: &SampledField, psi: &KernelSpec, b: f64, j_range: (i64, i64), q: f64) -> Result<SampledField> {
    check_q(q)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(LabError::InvalidParameter(format!("b must lie in (0, 1), got {b}")));
    }
    if j_range.1 < j_range.0 {
        return Err(LabError::InvalidParameter(format!("empty j range {j_range:?}")));
    }
    let prepared = PreparedSpectrum::new(f);
    let g = *f.grid();
    let count = (j_range.1 - j_range.0 + 1) as usize;
    let acc = ordered_sum(count, g.cell_count(), |k| {
        let t = b.powi((j_range.0 + k as i64) as i32);
        prepared
            .apply(|xi| psi.symbol_at_scale(xi, t))
            .values()
            .iter()
            .map(|v| v.norm().powf(q))
            .collect::<Vec<f64>>()
    });
    Ok(real_field(g, acc.into_iter().map(|v| v.powf(1.0 / q)).collect()))
}

/// `F^eps_psi(h)`: `sum_{t_k in (eps, 1/eps)} psi^(t_k xi) h^(xi, t_k) dln t`, assembled spectrally.
pub fn synthesize(h: &ScaleField, psi: &KernelSpec, epsilon: f64) -> Result<SampledField> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabError::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let scales = h.scales();
    if scales.t_min() > epsilon || scales.t_max() < 1.0 / epsilon {
        return Err(LabError::ScaleCoverage(format!(
            "scales [{}, {}] do not cover ({epsilon}, {})",
            scales.t_min(),
            scales.t_max(),
            1.0 / epsilon
        )));
    }
    let g = *h.grid();
    let d = g.dimension();
    let freqs: Vec<[f64; 2]> = (0..g.cell_count()).map(|i| g.fft_frequency(i)).collect();
    let weights = scales.log_weights();
    let selected: Vec<usize> = (0..scales.len())
        .filter(|&k| {
            let t = scales.scales()[k];
            t > epsilon && t < 1.0 / epsilon
        })
        .collect();
    let mut acc = ordered_sum(selected.len(), g.cell_count(), |i| {
        let k = selected[i];
        let t = scales.scales()[k];
        let mut data = h.slice_values(k).to_vec();
        dft(&g, &mut data, false);
        for (v, xi) in data.iter_mut().zip(&freqs) {
            *v *= psi.symbol_at_scale(&xi[..d], t) * weights[k];
        }
        data
    });
    dft(&g, &mut acc, true);
    let norm = 1.0 / g.cell_count() as f64;
    SampledField::new(g, acc.into_iter().map(|v| v * norm).collect())
}

/// `int_0^inf |psi^(s e_1)|^2 ds/s` by the trapezoid rule in `log s` over `[1e-12, 1e12]`.
pub fn radial_energy(psi: &KernelSpec, dimension: usize) -> f64 {
    directional_energy(psi, &[1.0, 0.0][..dimension])
}

/// `int_0^inf |psi^(s u)|^2 ds/s` along the unit vector `u`, same quadrature as [`radial_energy`].
pub fn directional_energy(psi: &KernelSpec, u: &[f64]) -> f64 {
    let steps = 200_000;
    let (lo, hi) = (1e-12f64.ln(), 1e12f64.ln());
    let h = (hi - lo) / steps as f64;
    let mut xi = [0.0; 2];
    let mut f = |v: f64| {
        let s = v.exp();
        for (x, c) in xi.iter_mut().zip(u) {
            *x = s * c;
        }
        psi.symbol(&xi[..u.len()]).norm_sqr()
    };
    let mut sum = 0.5 * (f(lo) + f(hi));
    for k in 1..steps {
        sum += f(lo + h * k as f64);
    }
    sum * h
}

/// Radial `psi` rescaled so that `int_0^inf |psi^(t xi)|^2 dt/t = 1` for every `xi != 0`.
pub fn calderon_normalized(psi: &KernelSpec, dimension: usize) -> Result<KernelSpec> {
    let e = radial_energy(psi, dimension);
    if !(e > 0.0 && e.is_finite()) {
        return Err(LabError::Degenerate(format!(
            "cannot normalize {}: radial energy {e}",
            psi.name()
        )));
    }
    let s = psi.symbol_arc();
    let c = e.sqrt().recip();
    Ok(KernelSpec::new(format!("{}_normalized", psi.name()), move |xi: &[f64]| s(xi) * c))
}

/// Real band-limited noise: random Fourier coefficients on `lo <= |xi| <= hi`, scaled to max 1.
pub fn band_limited_noise(g: &Grid, band: [f64; 2], seed: u64) -> Result<SampledField> {
    if !(band[0] >= 0.0 && band[1] > band[0]) {
        return Err(LabError::InvalidParameter(format!("invalid band {band:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Complex64> = (0..g.cell_count())
        .map(|i| {
            let r = norm(&g.frequency(i)[..g.dimension()]);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if r >= band[0] && r <= band[1] {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let f = from_spectrum(&SpectralField::new(*g, values)?);
    let re: Vec<f64> = f.real_parts();
    let top = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Err(LabError::Degenerate("band contains no grid frequency".into()));
    }
    Ok(real_field(*g, re.into_iter().map(|v| v / top).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: [f64; 2],
    pub side: f64,
}

impl Cube {
    pub fn measure(&self, dimension: usize) -> f64 {
        self.side.powi(dimension as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.center).all(|(v, c)| (v - c).abs() <= 0.5 * self.side)
    }
}

/// An `H^p`-valued `(p, inf)` atom sampled on a grid and scale grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub cube: Cube,
    pub p: f64,
    pub seed: u64,
    pub values: ScaleField,
}

pub fn moment_order(dimension: usize, p: f64) -> usize {
    (dimension as f64 * (1.0 / p - 1.0) + 1e-12).floor().max(0.0) as usize
}

fn multi_indices_upto(dimension: usize, order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=order {
        if dimension == 1 {
            out.push([total, 0]);
        } else {
            for a in 0..=total {
                out.push([a, total - a]);
            }
        }
    }
    out
}

fn monomial(x: [f64; 2], c: [f64; 2], gamma: [usize; 2]) -> f64 {
    (x[0] - c[0]).powi(gamma[0] as i32) * (x[1] - c[1]).powi(gamma[1] as i32)
}

/// Smooth window equal to 1 on the middle half of the cube, vanishing on and outside its boundary.
fn cube_window(cube: &Cube, x: [f64; 2], dimension: usize) -> f64 {
    (0..dimension)
        .map(|k| {
            let u = 2.0 * (x[k] - cube.center[k]).abs() / cube.side;
            transition((1.0 - u) / 0.5)
        })
        .product()
}

/// Draws a seeded atom: band-limited noise per scale times a smooth cube window
/// and the scale envelope `1 / (1 + ln^2 t)`, moments up to
/// `floor(n (1/p - 1))` projected out, rescaled to `0.9 |Q|^(-1/p)`.
pub fn make_atom(g: &Grid, scales: &ScaleGrid, cube: Cube, p: f64, seed: u64) -> Result<Atom> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(LabError::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
    }
    let d = g.dimension();
    if cube.side < 8.0 * g.spacing() {
        return Err(LabError::CubeTooSmall(format!(
            "side {} is below 8 cells of {}",
            cube.side,
            g.spacing()
        )));
    }
    for k in 0..d {
        if cube.center[k] - 0.5 * cube.side < -g.half_extent() || cube.center[k] + 0.5 * cube.side >= g.half_extent() {
            return Err(LabError::InvalidParameter("cube leaves the grid box".into()));
        }
    }
    let window: Vec<f64> = (0..g.cell_count()).map(|i| cube_window(&cube, g.point(i), d)).collect();
    let gammas = multi_indices_upto(d, moment_order(d, p));
    let basis: Vec<Vec<f64>> = gammas
        .iter()
        .map(|&gm| (0..g.cell_count()).map(|i| window[i] * monomial(g.point(i), cube.center, gm)).collect())
        .collect();
    let monos: Vec<Vec<f64>> = gammas
        .iter()
        .map(|&gm| (0..g.cell_count()).map(|i| monomial(g.point(i), cube.center, gm)).collect())
        .collect();
    let gram: Vec<Vec<f64>> = monos
        .iter()
        .map(|m| basis.iter().map(|b| m.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let band = [0.5 / cube.side, 4.0 / cube.side];
    let slices = scales
        .scales()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let noise = band_limited_noise(g, band, seed.wrapping_mul(1_000_003).wrapping_add(k as u64))?;
            let envelope = 1.0 / (1.0 + t.ln().powi(2));
            let mut v: Vec<f64> = noise.real_parts().iter().zip(&window).map(|(a, w)| a * w * envelope).collect();
            let mut aug: Vec<Vec<f64>> = gram.clone();
            for (row, m) in aug.iter_mut().zip(&monos) {
                row.push(m.iter().zip(&v).map(|(x, y)| x * y).sum());
            }
            let coef = solve_augmented(aug)
                .ok_or_else(|| LabError::CubeTooSmall("singular moment system".into()))?;
            for (c, b) in coef.iter().zip(&basis) {
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            Ok(real_field(*g, v))
        })
        .collect::<Result<Vec<SampledField>>>()?;
    let raw = ScaleField::from_slices(scales.clone(), slices)?;
    let size = raw.scale_norm(2.0)?.max_abs();
    if size == 0.0 {
        return Err(LabError::Degenerate("atom vanished after moment projection".into()));
    }
    let target = 0.9 * cube.measure(d).powf(-1.0 / p);
    Ok(Atom {
        cube,
        p,
        seed,
        values: raw.scaled(target / size),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomVerdict {
    pub pass: bool,
    /// Largest modulus outside the cube.
    pub support_residual: f64,
    /// `sup_x (int |a|^2 dt/t)^(1/2) / |Q|^(-1/p)`.
    pub size_ratio: f64,
    /// Largest `|int a x^gamma| / int |a| |x^gamma|` over scales and `|gamma| <= order`.
    pub moment_residual: f64,
}

pub fn validate_atom(a: &Atom) -> Result<AtomVerdict> {
    let g = *a.values.grid();
    let d = g.dimension();
    let mut support_residual: f64 = 0.0;
    for k in 0..a.values.scales().len() {
        for (i, v) in a.values.slice_values(k).iter().enumerate() {
            if !a.cube.contains(&g.point(i)[..d]) {
                support_residual = support_residual.max(v.norm());
            }
        }
    }
    let size = a.values.scale_norm(2.0)?.max_abs();
    let size_ratio = size / a.cube.measure(d).powf(-1.0 / a.p);
    let mut moment_residual: f64 = 0.0;
    for gm in multi_indices_upto(d, moment_order(d, a.p)) {
        for k in 0..a.values.scales().len() {
            let (mut s, mut abs) = (Complex64::new(0.0, 0.0), 0.0);
            for (i, v) in a.values.slice_values(k).iter().enumerate() {
                let m = monomial(g.point(i), a.cube.center, gm);
                s += v * m;
                abs += v.norm() * m.abs();
            }
            if abs > 0.0 {
                moment_residual = moment_residual.max(s.norm() / abs);
            }
        }
    }
    Ok(AtomVerdict {
        pass: support_residual <= 1e-14 && size_ratio <= 1.0 + 1e-12 && moment_residual <= 1e-10,
        support_residual,
        size_ratio,
        moment_residual,
    })
}

impl Atom {
    pub fn scaled(&self, c: f64) -> Atom {
        Atom {
            values: self.values.scaled(c),
            ..self.clone()
        }
    }

    /// Atom moved by whole cells, cube included.
    pub fn translated(&self, shift: [isize; 2]) -> Atom {
        let h = self.values.grid().spacing();
        let mut cube = self.cube;
        for k in 0..self.values.grid().dimension() {
            cube.center[k] += shift[k] as f64 * h;
        }
        Atom {
            cube,
            values: self.values.shifted(shift),
            ..self.clone()
        }
    }
}
