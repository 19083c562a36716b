//! Peetre, Hardy–Littlewood and grand maximal operators on sampled fields.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{dft, Grid, PreparedSpectrum, SampledField, ScaleGrid};
use crate::kernel::KernelSpec;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeetreParams {
    pub n: f64,
    pub r: f64,
}

impl PeetreParams {
    pub fn new(n: f64, r: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(LabError::InvalidParameter(format!("Peetre needs N, R > 0, got N = {n}, R = {r}")));
        }
        Ok(PeetreParams { n, r })
    }
}

/// Minimal-image offsets of every cell from the origin, with their lengths.
fn periodic_offsets(g: &Grid) -> Vec<([isize; 2], f64)> {
    let n = g.points_per_axis() as isize;
    let h = g.spacing();
    let dims = g.dimension();
    let mut out = Vec::with_capacity(g.cell_count());
    for i in 0..n {
        let di = g.periodic_offset(i);
        if dims == 1 {
            out.push(([di, 0], di.unsigned_abs() as f64 * h));
        } else {
            for j in 0..n {
                let dj = g.periodic_offset(j);
                out.push(([di, dj], ((di * di + dj * dj) as f64).sqrt() * h));
            }
        }
    }
    out
}

fn wrap(g: &Grid, idx: usize, off: [isize; 2]) -> usize {
    let n = g.points_per_axis() as isize;
    let a = g.axis_indices(idx);
    let i = (a[0] as isize - off[0]).rem_euclid(n) as usize;
    let j = if g.dimension() == 2 {
        (a[1] as isize - off[1]).rem_euclid(n) as usize
    } else {
        0
    };
    g.flat_index([i, j])
}

fn real_field(g: Grid, values: Vec<f64>) -> SampledField {
    SampledField::new(g, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).expect("grid sized")
}

/// `F**_{N,R}(x) = sup_y |F(x - y)| / (1 + R |y|)^N` over all periodic grid offsets.
///
/// Offsets are visited by decreasing damping factor, and the scan stops once
/// `factor * max|F|` cannot beat the running maximum, so the result is exact.
pub fn peetre_max(f: &SampledField, p: PeetreParams) -> SampledField {
    let g = *f.grid();
    let mut offsets: Vec<([isize; 2], f64)> = periodic_offsets(&g)
        .into_iter()
        .map(|(o, d)| (o, (1.0 + p.r * d).powf(-p.n)))
        .collect();
    offsets.sort_by(|a, b| b.1.total_cmp(&a.1));
    let moduli = f.moduli();
    let top = moduli.iter().copied().fold(0.0, f64::max);
    let values: Vec<f64> = (0..g.cell_count())
        .into_par_iter()
        .map(|idx| {
            let mut best: f64 = 0.0;
            for &(off, factor) in &offsets {
                if factor * top <= best {
                    break;
                }
                best = best.max(moduli[wrap(&g, idx, off)] * factor);
            }
            best
        })
        .collect();
    real_field(g, values)
}

/// Uncentered Hardy–Littlewood maximal function of `|f|`.
///
/// In 1-D the sup runs over every periodic run of whole cells containing `x`.
/// In 2-D it runs over discrete discs (radius 0, then `h * sqrt(2)^k` up to
/// the half extent) whose centre lies within one radius of `x`.
pub fn hl_max(f: &SampledField) -> SampledField {
    let g = *f.grid();
    let moduli = f.moduli();
    let values = if g.dimension() == 1 {
        hl_line(&moduli)
    } else {
        hl_plane(&g, &moduli)
    };
    real_field(g, values)
}

fn hl_line(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut prefix = vec![0.0; 2 * n + 1];
    for k in 0..2 * n {
        prefix[k + 1] = prefix[k] + v[k % n];
    }
    (0..n)
        .into_par_iter()
        .fold(
            || vec![0.0f64; n],
            |mut acc, s| {
                // suffix[d] = best average over runs from s of length > d
                let mut suffix = vec![0.0f64; n + 1];
                for len in (1..=n).rev() {
                    let avg = (prefix[s + len] - prefix[s]) / len as f64;
                    suffix[len - 1] = suffix[len].max(avg);
                }
                for (d, &best) in suffix.iter().take(n).enumerate() {
                    let x = (s + d) % n;
                    acc[x] = acc[x].max(best);
                }
                acc
            },
        )
        .reduce(|| vec![0.0f64; n], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
}

/// Row-wise periodic sliding maximum with half-width `w`.
fn row_max(v: &[f64], n: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    if 2 * w + 1 >= n {
        for r in 0..n {
            let m = v[r * n..(r + 1) * n].iter().copied().fold(0.0, f64::max);
            out[r * n..(r + 1) * n].iter_mut().for_each(|o| *o = m);
        }
        return out;
    }
    let win = 2 * w + 1;
    for r in 0..n {
        let row = &v[r * n..(r + 1) * n];
        let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
        // positions k in [c - w, c + w] visited as k = c - w + i over an extended range
        for e in 0..n + win - 1 {
            let val = row[(e + n - w) % n];
            while dq.back().is_some_and(|&b| row[(b + n - w) % n] <= val) {
                dq.pop_back();
            }
            dq.push_back(e);
            if dq[0] + win <= e {
                dq.pop_front();
            }
            if e + 1 >= win {
                let c = e + 1 - win;
                out[r * n + c] = row[(dq[0] + n - w) % n];
            }
        }
    }
    out
}

fn hl_plane(g: &Grid, v: &[f64]) -> Vec<f64> {
    let n = g.points_per_axis();
    let mut radii = vec![0.0f64];
    let mut r = 1.0f64;
    while r <= (n / 2) as f64 + 1e-9 {
        radii.push(r);
        r *= std::f64::consts::SQRT_2;
    }
    let mut spectrum: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft(g, &mut spectrum, false);
    radii
        .par_iter()
        .map(|&rad| {
            let reach = rad.floor() as isize;
            let half_width = |dy: isize| ((rad * rad - (dy * dy) as f64).max(0.0)).sqrt().floor() as usize;
            // disc averages by circular convolution with the disc indicator
            let mut disc = vec![Complex64::new(0.0, 0.0); n * n];
            let mut count = 0usize;
            for dy in -reach..=reach {
                let w = half_width(dy) as isize;
                for dx in -w..=w {
                    let i = dy.rem_euclid(n as isize) as usize;
                    let j = dx.rem_euclid(n as isize) as usize;
                    disc[i * n + j] = Complex64::new(1.0, 0.0);
                    count += 1;
                }
            }
            dft(g, &mut disc, false);
            let mut conv: Vec<Complex64> = spectrum.iter().zip(&disc).map(|(a, b)| a * b).collect();
            dft(g, &mut conv, true);
            let scale = 1.0 / (count as f64 * (n * n) as f64);
            let avg: Vec<f64> = conv.iter().map(|c| (c.re * scale).max(0.0)).collect();
            // max of the averages over centres within the disc around x
            let mut out = vec![0.0f64; n * n];
            let mut rows: std::collections::HashMap<usize, Vec<f64>> = std::collections::HashMap::new();
            for dy in -reach..=reach {
                let w = half_width(dy);
                let shifted = rows.entry(w).or_insert_with(|| row_max(&avg, n, w));
                for i in 0..n {
                    let src = (i as isize + dy).rem_euclid(n as isize) as usize;
                    for j in 0..n {
                        out[i * n + j] = out[i * n + j].max(shifted[src * n + j]);
                    }
                }
            }
            out
        })
        .reduce(|| vec![0.0f64; n * n], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
}

/// Mollifier and scales for the grand maximal function.
#[derive(Debug, Clone)]
pub struct GrandMaxConfig {
    mollifier: KernelSpec,
    scales: ScaleGrid,
}

impl GrandMaxConfig {
    pub fn new(mollifier: KernelSpec, scales: ScaleGrid) -> Result<Self> {
        let mass = mollifier.symbol(&[0.0, 0.0]);
        if (mass - 1.0).norm() > 1e-12 {
            return Err(LabError::InvalidParameter(format!(
                "mollifier must have unit mass, symbol(0) = {mass}"
            )));
        }
        Ok(GrandMaxConfig { mollifier, scales })
    }

    /// Gaussian mollifier, 64 log-spaced scales over `[h/2, L]`.
    pub fn default_for(g: &Grid) -> Self {
        let scales = ScaleGrid::log_range(0.5 * g.spacing(), g.half_extent(), 64).expect("valid default range");
        GrandMaxConfig {
            mollifier: KernelSpec::gaussian(),
            scales,
        }
    }

    pub fn mollifier(&self) -> &KernelSpec {
        &self.mollifier
    }

    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }

    pub fn dilated(&self, factor: f64) -> Self {
        GrandMaxConfig {
            mollifier: self.mollifier.clone(),
            scales: self.scales.dilated(factor),
        }
    }
}

/// `f*(x) = max_t |Phi_t * f(x)|` over the configured scales.
pub fn grand_max(f: &SampledField, cfg: &GrandMaxConfig) -> SampledField {
    let prepared = PreparedSpectrum::new(f);
    let g = *f.grid();
    let values = cfg
        .scales
        .scales()
        .par_iter()
        .map(|&t| prepared.apply(|xi| cfg.mollifier.symbol_at_scale(xi, t)).moduli())
        .reduce(
            || vec![0.0; g.cell_count()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        );
    real_field(g, values)
}

/// `max_x |Phi_{t_min} * f - f|`, the gap between the finest mollification and `f`.
pub fn grand_max_discretization(f: &SampledField, cfg: &GrandMaxConfig) -> f64 {
    let t = cfg.scales.t_min();
    let smooth = f.filtered(|xi| cfg.mollifier.symbol_at_scale(xi, t));
    smooth
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// `|grad F|` computed spectrally.
pub fn gradient_modulus(f: &SampledField) -> SampledField {
    let g = *f.grid();
    let prepared = PreparedSpectrum::new(f);
    let mut sq = vec![0.0; g.cell_count()];
    for k in 0..g.dimension() {
        let d = prepared.apply(|xi| KernelSpec::xi_multiplier(k).symbol(xi));
        for (s, v) in sq.iter_mut().zip(d.values()) {
            *s += v.norm_sqr();
        }
    }
    real_field(g, sq.into_iter().map(f64::sqrt).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeetreBoundReport {
    pub delta: f64,
    /// Smallest `C` with `LHS <= C (first + second)` at every grid point.
    pub c_min: f64,
    pub lhs_max: f64,
    pub first_max: f64,
    pub second_max: f64,
}

/// Measures the constant in
/// `F**_{N,R} <= C delta^-N M(|F|^r)^(1/r) + C delta R^-1 |grad F|**_{N,R}` with `N = n / r`.
pub fn peetre_bound_check(f: &SampledField, p: PeetreParams, delta: f64, r: f64) -> Result<PeetreBoundReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let n = f.grid().dimension() as f64;
    if !(r > 0.0) || (p.n - n / r).abs() > 1e-12 * p.n {
        return Err(LabError::InvalidParameter(format!(
            "need N = n / r, got N = {}, n / r = {}",
            p.n,
            n / r
        )));
    }
    let lhs = peetre_max(f, p);
    let powered = f.map(|v| Complex64::new(v.norm().powf(r), 0.0));
    let m = hl_max(&powered);
    let grad = peetre_max(&gradient_modulus(f), p);
    let mut c_min: f64 = 0.0;
    let (mut lhs_max, mut first_max, mut second_max) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..lhs.len() {
        let l = lhs.values()[i].re;
        let first = delta.powf(-p.n) * m.values()[i].re.powf(1.0 / r);
        let second = delta / p.r * grad.values()[i].re;
        lhs_max = lhs_max.max(l);
        first_max = first_max.max(first);
        second_max = second_max.max(second);
        if l > 0.0 {
            c_min = c_min.max(l / (first + second));
        }
    }
    Ok(PeetreBoundReport {
        delta,
        c_min,
        lhs_max,
        first_max,
        second_max,
    })
}
