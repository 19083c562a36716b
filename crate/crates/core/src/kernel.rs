//! Closed-form kernel library and the Fourier-side checks run on it.
//!
//! Every kernel is described by its Fourier symbol; spatial samples are only
//! ever produced by inverse transform ([`sample_kernel`]).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{from_spectrum, Grid, SampledField, ScaleGrid, SpectralField};
use crate::numeric::{fit_line, golden_max, least_squares};
use crate::smooth::plateau;
use crate::{LabError, Result};

pub type SymbolFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Membership claim `psi in B^l_tau`: symbol derivatives up to order `l`
/// decay like `|xi|^(-tau-|gamma|)` outside the ball of `neighborhood_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub l: usize,
    pub tau: f64,
    pub neighborhood_radius: f64,
}

impl DecaySpec {
    pub fn new(l: usize, tau: f64) -> Result<Self> {
        Self::with_radius(l, tau, 1.0)
    }

    pub fn with_radius(l: usize, tau: f64, neighborhood_radius: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(LabError::InvalidParameter(format!("tau must be >= 0, got {tau}")));
        }
        if !(neighborhood_radius > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "neighborhood radius must be positive, got {neighborhood_radius}"
            )));
        }
        Ok(DecaySpec {
            l,
            tau,
            neighborhood_radius,
        })
    }
}

/// A convolution kernel (or Fourier multiplier) given by its symbol.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    symbol: Arc<SymbolFn>,
    claimed_decay: Option<DecaySpec>,
    multiplier: bool,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("claimed_decay", &self.claimed_decay)
            .field("multiplier", &self.multiplier)
            .finish()
    }
}

pub(crate) fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl KernelSpec {
    pub fn new(name: impl Into<String>, symbol: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        KernelSpec {
            name: name.into(),
            symbol: Arc::new(symbol),
            claimed_decay: None,
            multiplier: false,
        }
    }

    /// Radial symbol `xi -> profile(|xi|)`.
    pub fn radial(name: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |xi| real(profile(norm(xi))))
    }

    pub fn with_decay(mut self, decay: DecaySpec) -> Self {
        self.claimed_decay = Some(decay);
        self
    }

    /// Marks the spec as a multiplier (`Theta`, `Xi_k`) rather than an L1 kernel.
    pub fn as_multiplier(mut self) -> Self {
        self.multiplier = true;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claimed_decay(&self) -> Option<DecaySpec> {
        self.claimed_decay
    }

    pub fn is_multiplier(&self) -> bool {
        self.multiplier
    }

    #[inline]
    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        (self.symbol)(xi)
    }

    /// Symbol at `t * xi` (the dilate `psi_t`).
    #[inline]
    pub fn symbol_at_scale(&self, xi: &[f64], t: f64) -> Complex64 {
        let mut buf = [0.0; 2];
        for (b, v) in buf.iter_mut().zip(xi) {
            *b = v * t;
        }
        (self.symbol)(&buf[..xi.len()])
    }

    pub fn symbol_arc(&self) -> Arc<SymbolFn> {
        Arc::clone(&self.symbol)
    }

    /// Kernel with symbol `xi -> symbol(lambda xi)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        let s = self.symbol_arc();
        let mut k = KernelSpec::new(format!("{}@{lambda}", self.name), move |xi: &[f64]| {
            let mut buf = [0.0; 2];
            for (b, v) in buf.iter_mut().zip(xi) {
                *b = v * lambda;
            }
            s(&buf[..xi.len()])
        });
        k.multiplier = self.multiplier;
        k
    }

    /// `conj(psi(-x))`, whose symbol is `conj(psi^(xi))`.
    pub fn conjugate_reflection(&self) -> Self {
        let s = self.symbol_arc();
        let mut k = KernelSpec::new(format!("conj({})", self.name), move |xi: &[f64]| s(xi).conj());
        k.multiplier = self.multiplier;
        k
    }

    /// `partial_k psi`, symbol `2 pi i xi_k psi^(xi)`.
    pub fn derivative(&self, axis: usize) -> Self {
        let s = self.symbol_arc();
        KernelSpec::new(format!("d{}({})", axis + 1, self.name), move |xi: &[f64]| {
            let x = xi.get(axis).copied().unwrap_or(0.0);
            Complex64::new(0.0, 2.0 * PI * x) * s(xi)
        })
    }

    /// Pointwise product of symbols.
    pub fn product(&self, other: &KernelSpec) -> Self {
        let a = self.symbol_arc();
        let b = other.symbol_arc();
        KernelSpec::new(format!("{}*{}", self.name, other.name), move |xi: &[f64]| a(xi) * b(xi))
    }

    /// `Xi_k(xi) = 2 pi i xi_k`.
    pub fn xi_multiplier(axis: usize) -> Self {
        KernelSpec::new(format!("Xi{}", axis + 1), move |xi: &[f64]| {
            Complex64::new(0.0, 2.0 * PI * xi.get(axis).copied().unwrap_or(0.0))
        })
        .as_multiplier()
    }

    pub fn constant_multiplier(c: f64) -> Self {
        KernelSpec::new(format!("const({c})"), move |_: &[f64]| real(c)).as_multiplier()
    }

    /// `Q^(xi) = -2 pi |xi| exp(-2 pi |xi|)`, the t-derivative of the Poisson kernel at t = 1.
    pub fn poisson_q() -> Self {
        KernelSpec::radial("poissonQ", |r| -2.0 * PI * r * (-2.0 * PI * r).exp())
    }

    /// `exp(-pi |xi|^2)`, self-dual unit-mass Gaussian.
    pub fn gaussian() -> Self {
        KernelSpec::radial("gaussian", |r| (-PI * r * r).exp())
    }

    /// Negative Laplacian of the Gaussian: `4 pi^2 |xi|^2 exp(-pi |xi|^2)`.
    pub fn mexican_hat() -> Self {
        KernelSpec::radial("mexican_hat", |r| 4.0 * PI * PI * r * r * (-PI * r * r).exp())
    }

    /// Smooth radial bump equal to 1 on `inner <= |xi| <= outer`, supported in
    /// `inner/2 <= |xi| <= 2 outer`.
    pub fn annulus_bump_with(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(LabError::InvalidParameter(format!(
                "annulus needs 0 < inner < outer, got {inner}, {outer}"
            )));
        }
        Ok(KernelSpec::radial("annulus_bump", move |r| {
            plateau(r, inner / 2.0, inner, outer, 2.0 * outer)
        })
        .with_decay(DecaySpec {
            l: usize::MAX,
            tau: f64::INFINITY,
            neighborhood_radius: 1.0,
        }))
    }

    pub fn annulus_bump() -> Self {
        Self::annulus_bump_with(1.0, 2.0).expect("valid default annulus")
    }

    /// Smooth radial bump supported in `lo <= |xi| <= hi`, peaking at 1 mid-band.
    pub fn band_bump(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(LabError::InvalidParameter(format!(
                "band needs 0 < lo < hi, got {lo}, {hi}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        Ok(KernelSpec::radial("band_bump", move |r| plateau(r, lo, mid, mid, hi)))
    }

    /// `exp(-pi |xi|^2) - exp(-4 pi |xi|^2)`.
    pub fn gaussian_difference() -> Self {
        KernelSpec::radial("gaussian_difference", |r| (-PI * r * r).exp() - (-4.0 * PI * r * r).exp())
    }

    /// Poisson-like profile with power decay: `-2 pi |xi| (1 + 2 pi |xi|)^-(s+1)`,
    /// which behaves like `Q^` at the origin and like `|xi|^-s` at infinity.
    pub fn poisson_power(s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(LabError::InvalidParameter(format!("decay order must be >= 0, got {s}")));
        }
        Ok(KernelSpec::radial("poisson_power", move |r| {
            let u = 2.0 * PI * r;
            -u * (1.0 + u).powf(-(s + 1.0))
        })
        .with_decay(DecaySpec {
            l: 8,
            tau: s,
            neighborhood_radius: 1.0,
        }))
    }

    /// `partial_1` of [`KernelSpec::poisson_power`] with order `tau + 1`; decays like `|xi|^-tau`.
    pub fn poisson_power_derivative(tau: f64) -> Result<Self> {
        Ok(Self::poisson_power(tau + 1.0)?
            .derivative(0)
            .renamed("poisson_power_derivative")
            .with_decay(DecaySpec {
                l: 8,
                tau,
                neighborhood_radius: 1.0,
            }))
    }

    /// `|xi|^-a` for `|xi| >= 1`, 1 inside the unit ball.
    pub fn power_tail(a: f64) -> Self {
        KernelSpec::radial("power_tail", move |r| if r >= 1.0 { r.powf(-a) } else { 1.0 })
    }

    pub fn zero() -> Self {
        KernelSpec::new("zero", |_: &[f64]| real(0.0))
    }
}

/// Names accepted by [`make_builtin`], with their parameter lists.
pub const BUILTIN_CATALOG: &[(&str, &str)] = &[
    ("poissonQ", "-2 pi |xi| e^(-2 pi |xi|); no parameters"),
    ("mexican_hat", "4 pi^2 |xi|^2 e^(-pi |xi|^2); no parameters"),
    ("annulus_bump", "1 on [inner, outer], support [inner/2, 2 outer]; params [inner=1, outer=2]"),
    ("gaussian", "e^(-pi |xi|^2); no parameters"),
    ("gaussian_difference", "e^(-pi |xi|^2) - e^(-4 pi |xi|^2); no parameters"),
    ("band_bump", "smooth bump supported in [lo, hi]; params [lo=1, hi=2]"),
    ("poisson_power", "-2 pi |xi| (1 + 2 pi |xi|)^-(s+1); params [s=1]"),
    ("poisson_power_derivative", "d/dx1 of poisson_power(tau+1); params [tau=1]"),
    ("power_tail", "|xi|^-a outside the unit ball; params [a=1]"),
    ("zero", "identically 0; no parameters"),
];

fn param(params: &[f64], i: usize, default: f64) -> f64 {
    params.get(i).copied().unwrap_or(default)
}

/// Builds a named kernel; `params` override the defaults listed in [`BUILTIN_CATALOG`].
pub fn make_builtin(name: &str, params: &[f64]) -> Result<KernelSpec> {
    let max_params = match name {
        "poissonQ" | "mexican_hat" | "gaussian" | "gaussian_difference" | "zero" => 0,
        "annulus_bump" | "band_bump" => 2,
        "poisson_power" | "poisson_power_derivative" | "power_tail" => 1,
        other => return Err(LabError::UnknownKernel(other.to_string())),
    };
    if params.len() > max_params {
        return Err(LabError::InvalidParameter(format!(
            "{name} takes at most {max_params} parameters, got {}",
            params.len()
        )));
    }
    match name {
        "poissonQ" => Ok(KernelSpec::poisson_q()),
        "mexican_hat" => Ok(KernelSpec::mexican_hat()),
        "gaussian" => Ok(KernelSpec::gaussian()),
        "gaussian_difference" => Ok(KernelSpec::gaussian_difference()),
        "zero" => Ok(KernelSpec::zero()),
        "annulus_bump" => KernelSpec::annulus_bump_with(param(params, 0, 1.0), param(params, 1, 2.0)),
        "band_bump" => KernelSpec::band_bump(param(params, 0, 1.0), param(params, 1, 2.0)),
        "poisson_power" => KernelSpec::poisson_power(param(params, 0, 1.0)),
        "poisson_power_derivative" => KernelSpec::poisson_power_derivative(param(params, 0, 1.0)),
        "power_tail" => Ok(KernelSpec::power_tail(param(params, 0, 1.0))),
        _ => unreachable!(),
    }
}

/// The vector `(phi^(1), ..., phi^(M))` of a non-degeneracy condition.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    members: Vec<KernelSpec>,
    dimension: usize,
}

impl KernelFamily {
    pub fn new(members: Vec<KernelSpec>, dimension: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(LabError::EmptyFamily);
        }
        if !(dimension == 1 || dimension == 2) {
            return Err(LabError::InvalidParameter(format!("dimension must be 1 or 2, got {dimension}")));
        }
        Ok(KernelFamily { members, dimension })
    }

    pub fn single(k: KernelSpec, dimension: usize) -> Result<Self> {
        Self::new(vec![k], dimension)
    }

    pub fn members(&self) -> &[KernelSpec] {
        &self.members
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `sum_i |phi^(i)^(xi)|`.
    pub fn abs_sum(&self, xi: &[f64]) -> f64 {
        self.members.iter().map(|k| k.symbol(xi).norm()).sum()
    }

    /// `sum_i |phi^(i)^(xi)|^2`.
    pub fn square_sum(&self, xi: &[f64]) -> f64 {
        self.members.iter().map(|k| k.symbol(xi).norm_sqr()).sum()
    }

    /// Sampled unit directions: `+-e_1` in 1-D, `count` equally spaced angles in 2-D.
    pub fn directions(&self, count: usize) -> Vec<[f64; 2]> {
        unit_directions(self.dimension, count)
    }
}

pub(crate) fn unit_directions(dimension: usize, count: usize) -> Vec<[f64; 2]> {
    if dimension == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..count.max(1))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count.max(1) as f64;
                [a.cos(), a.sin()]
            })
            .collect()
    }
}

/// Spatial samples of `psi_t(x) = t^-n psi(x / t)`, via the inverse transform of `psi^(t xi)`.
pub fn sample_kernel(k: &KernelSpec, grid: &Grid, t: f64) -> Result<SampledField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::InvalidParameter(format!("scale must be positive, got {t}")));
    }
    let spec = SpectralField::from_fn(*grid, |xi| k.symbol_at_scale(xi, t));
    Ok(from_spectrum(&spec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationCheck {
    pub pass: bool,
    pub residual: f64,
}

/// `int psi = psi^(0)`; passes iff `|psi^(0)| <= 1e-12`.
pub fn check_cancellation(k: &KernelSpec) -> CancellationCheck {
    let residual = k.symbol(&[0.0, 0.0]).norm();
    CancellationCheck {
        pass: residual <= 1e-12,
        residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSup {
    pub direction: [f64; 2],
    pub sup: f64,
    pub argmax_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    /// `min` over directions of `max_t sum_i |phi^(i)^(t xi)|`.
    pub infimum: f64,
    pub per_direction: Vec<DirectionSup>,
}

impl NondegeneracyReport {
    pub fn worst(&self) -> &DirectionSup {
        self.per_direction
            .iter()
            .min_by(|a, b| a.sup.total_cmp(&b.sup))
            .expect("at least one direction")
    }
}

/// Estimates `inf_{xi != 0} sup_t sum_i |phi^(i)^(t xi)|`. Homogeneity of the
/// dilation reduces the infimum to unit directions; the sup over the sampled
/// scales is refined by golden-section search in `log t`.
pub fn check_nondegeneracy(fam: &KernelFamily, t_range: &ScaleGrid, directions: usize) -> Result<NondegeneracyReport> {
    if directions == 0 {
        return Err(LabError::InvalidParameter("need at least one direction".into()));
    }
    if t_range.t_max() / t_range.t_min() < 1e4 * (1.0 - 1e-12) {
        return Err(LabError::InvalidParameter(format!(
            "scale range must span at least 4 decades, got [{}, {}]",
            t_range.t_min(),
            t_range.t_max()
        )));
    }
    let n = fam.dimension();
    let ts = t_range.scales();
    let per_direction: Vec<DirectionSup> = fam
        .directions(directions)
        .into_iter()
        .map(|dir| {
            let eval = |t: f64| fam.abs_sum(&[dir[0] * t, dir[1] * t][..n]);
            let vals: Vec<f64> = ts.iter().map(|&t| eval(t)).collect();
            let (k, &best) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty scale grid");
            // scales decrease with k, so the bracket is [t_{k+1}, t_{k-1}]
            let lo = ts.get(k + 1).copied().unwrap_or(ts[k]).ln();
            let hi = if k > 0 { ts[k - 1] } else { ts[k] }.ln();
            let (arg, refined) = if hi > lo {
                golden_max(|s| eval(s.exp()), lo, hi, 100)
            } else {
                (lo, best)
            };
            let (sup, argmax_t) = if refined >= best { (refined, arg.exp()) } else { (best, ts[k]) };
            DirectionSup {
                direction: dir,
                sup,
                argmax_t,
            }
        })
        .collect();
    let infimum = per_direction.iter().map(|d| d.sup).fold(f64::INFINITY, f64::min);
    Ok(NondegeneracyReport {
        infimum,
        per_direction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: Vec<usize>,
    /// Fitted `d log|d^gamma psi^| / d log|xi|`; `-inf` when the symbol vanishes at the outer probes.
    pub slope: f64,
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub pass: bool,
    pub fits: Vec<DecayFit>,
}

/// Pass margin on fitted slopes.
pub const DECAY_SLOPE_MARGIN: f64 = 0.1;

fn multi_indices(dimension: usize, order: usize) -> Vec<Vec<usize>> {
    if dimension == 1 {
        vec![vec![order]]
    } else {
        (0..=order).map(|a| vec![a, order - a]).collect()
    }
}

/// Fourth-order central difference `d^gamma f` at `xi` with step `h` per axis.
fn partial(k: &KernelSpec, xi: [f64; 2], gamma: &[usize], h: f64, n: usize) -> Complex64 {
    const OFFSETS: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    if let Some(axis) = gamma.iter().position(|&g| g > 0) {
        let mut rest = gamma.to_vec();
        rest[axis] -= 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for (off, w) in OFFSETS {
            let mut p = xi;
            p[axis] += off * h;
            acc += partial(k, p, &rest, h, n) * w;
        }
        acc / (12.0 * h)
    } else {
        k.symbol(&xi[..n])
    }
}

/// Tests the `B^l_tau` bound by finite differences on probe spheres and
/// log-log slope fits, one per multi-index `|gamma| <= l`.
pub fn check_decay_class(k: &KernelSpec, d: &DecaySpec, probe_radii: &[f64], dimension: usize) -> Result<DecayReport> {
    if probe_radii.len() < 2 {
        return Err(LabError::InvalidParameter("need at least two probe radii".into()));
    }
    if let Some(r) = probe_radii.iter().find(|&&r| !(r > d.neighborhood_radius)) {
        return Err(LabError::InvalidParameter(format!(
            "probe radius {r} inside the excluded neighborhood {}",
            d.neighborhood_radius
        )));
    }
    let dirs = unit_directions(dimension, 8);
    let mut fits = Vec::new();
    for order in 0..=d.l {
        for gamma in multi_indices(dimension, order) {
            let mut maxima = Vec::with_capacity(probe_radii.len());
            for &r in probe_radii {
                let h = 1e-3 * r;
                if !(h >= f64::MIN_POSITIVE) || r + h == r {
                    return Err(LabError::StepUnderflow(r));
                }
                let m = dirs
                    .iter()
                    .map(|u| partial(k, [u[0] * r, u[1] * r], &gamma, h, dimension).norm())
                    .fold(0.0, f64::max);
                maxima.push(m);
            }
            let tiny = 1e-300;
            let slope = if *maxima.last().expect("nonempty") <= tiny {
                f64::NEG_INFINITY
            } else {
                let (xs, ys): (Vec<f64>, Vec<f64>) = probe_radii
                    .iter()
                    .zip(&maxima)
                    .filter(|(_, &m)| m > tiny)
                    .map(|(&r, &m)| (r.ln(), m.ln()))
                    .unzip();
                if xs.len() < 2 {
                    f64::NEG_INFINITY
                } else {
                    fit_line(&xs, &ys).0
                }
            };
            let required = -d.tau - order as f64 + DECAY_SLOPE_MARGIN;
            fits.push(DecayFit {
                gamma,
                slope,
                required,
                pass: slope <= required,
            });
        }
    }
    Ok(DecayReport {
        pass: fits.iter().all(|f| f.pass),
        fits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowFrequencyReport {
    pub epsilon: f64,
    pub pass: bool,
}

/// Estimates the exponent `eps` in `|psi^(xi)| ~ C |xi|^eps` near the origin.
///
/// Along the `e_1` ray on `|xi| in [1e-4, 1e-1]` the model
/// `log|psi^| = eps log s + c s + a` is fitted; the linear term absorbs the
/// first-order analytic correction (for instance the `exp(-2 pi s)` factor of
/// `Q^`). Passes iff `eps >= 0.1`.
pub fn check_low_frequency_growth(k: &KernelSpec, dimension: usize) -> Result<LowFrequencyReport> {
    let count = 31;
    let (lo, hi) = (1e-4f64.ln(), 1e-1f64.ln());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..count {
        let s = (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp();
        let v = k.symbol(&[s, 0.0][..dimension]).norm();
        if v > 0.0 {
            rows.push(vec![s.ln(), s, 1.0]);
            rhs.push(v.ln());
        }
    }
    if rows.len() < 3 {
        return Err(LabError::Degenerate(format!(
            "symbol of {} vanishes on the low-frequency probe ray",
            k.name()
        )));
    }
    let coef = least_squares(&rows, &rhs)
        .ok_or_else(|| LabError::Degenerate("singular low-frequency fit".into()))?;
    let epsilon = coef[0];
    Ok(LowFrequencyReport {
        epsilon,
        pass: epsilon >= 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decades() -> ScaleGrid {
        ScaleGrid::log_range(1e-4, 1e4, 400).unwrap()
    }

    #[test]
    fn poisson_q_values() {
        let q = make_builtin("poissonQ", &[]).unwrap();
        assert_eq!(q.symbol(&[0.0]).norm(), 0.0);
        let v = q.symbol(&[1.0 / (2.0 * PI)]).re;
        assert!((v + (-1f64).exp()).abs() < 1e-15);
        assert!((v + 0.367879).abs() < 1e-6);
    }

    #[test]
    fn annulus_bump_values() {
        let a = make_builtin("annulus_bump", &[]).unwrap();
        assert_eq!(a.symbol(&[1.5]).re, 1.0);
        assert_eq!(a.symbol(&[0.4]).re, 0.0);
        assert_eq!(a.symbol(&[0.0, -1.5]).re, 1.0);
        assert_eq!(a.symbol(&[4.5]).re, 0.0);
    }

    #[test]
    fn unknown_builtin_and_extra_params() {
        assert!(matches!(make_builtin("sinc", &[]), Err(LabError::UnknownKernel(_))));
        assert!(make_builtin("gaussian", &[1.0]).is_err());
        for (name, _) in BUILTIN_CATALOG {
            assert!(make_builtin(name, &[]).is_ok(), "{name}");
        }
    }

    #[test]
    fn sampled_gaussian() {
        let g = Grid::line(512, 8.0).unwrap();
        let f = sample_kernel(&KernelSpec::gaussian(), &g, 1.0).unwrap();
        for i in 0..g.cell_count() {
            let x = g.point(i)[0];
            assert!((f.values()[i].re - (-PI * x * x).exp()).abs() < 1e-10);
        }
        assert!(sample_kernel(&KernelSpec::gaussian(), &g, 0.0).is_err());
        assert!(sample_kernel(&KernelSpec::gaussian(), &g, -1.0).is_err());
    }

    #[test]
    fn dilation_relates_spectra() {
        let g = Grid::line(256, 8.0).unwrap();
        let k = KernelSpec::mexican_hat();
        let s2 = crate::field::to_spectrum(&sample_kernel(&k, &g, 2.0).unwrap());
        for i in 0..g.cell_count() {
            let xi = g.frequency(i)[0];
            assert!((s2.values()[i] - k.symbol(&[2.0 * xi])).norm() < 1e-12);
        }
    }

    #[test]
    fn sampled_q_has_zero_mean() {
        let g = Grid::line(4096, 64.0).unwrap();
        let q = sample_kernel(&KernelSpec::poisson_q(), &g, 1.0).unwrap();
        assert!(q.integral().norm() <= 1e-8);
    }

    #[test]
    fn radial_symbols_give_radial_kernels() {
        let g = Grid::plane(64, 8.0).unwrap();
        let n = g.points_per_axis();
        for k in [KernelSpec::gaussian(), KernelSpec::mexican_hat(), KernelSpec::annulus_bump()] {
            let f = sample_kernel(&k, &g, 1.0).unwrap();
            let v = |i: usize, j: usize| f.values()[g.flat_index([i % n, j % n])];
            let c = n / 2; // grid point at the origin
            for i in 0..n {
                for j in 0..n {
                    let a = v(i, j);
                    // swap, and reflections through the origin along each axis
                    let b = v(j, i);
                    let r0 = v(2 * c + n - i, j);
                    let r1 = v(i, 2 * c + n - j);
                    for other in [b, r0, r1] {
                        assert!((a - other).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn cancellation() {
        let q = check_cancellation(&KernelSpec::poisson_q());
        assert!(q.pass && q.residual == 0.0);
        let g = check_cancellation(&KernelSpec::gaussian());
        assert!(!g.pass && (g.residual - 1.0).abs() < 1e-15);
        assert!(check_cancellation(&KernelSpec::mexican_hat()).pass);
    }

    #[test]
    fn nondegeneracy_of_q_is_inverse_e() {
        for n in [1, 2] {
            let fam = KernelFamily::single(KernelSpec::poisson_q(), n).unwrap();
            let r = check_nondegeneracy(&fam, &decades(), 64).unwrap();
            assert!((r.infimum - (-1f64).exp()).abs() < 1e-6, "{}", r.infimum);
            for d in &r.per_direction {
                assert!((d.sup - (-1f64).exp()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn nondegeneracy_of_gaussian_difference_matches_scan() {
        let fam = KernelFamily::single(KernelSpec::gaussian_difference(), 1).unwrap();
        let r = check_nondegeneracy(&fam, &decades(), 2).unwrap();
        // independent oracle: dense 1-D scan of s -> e^(-pi s^2) - e^(-4 pi s^2)
        let scan = (1..2_000_000)
            .map(|i| {
                let s = i as f64 * 1e-6;
                (-PI * s * s).exp() - (-4.0 * PI * s * s).exp()
            })
            .fold(0.0, f64::max);
        assert!(r.infimum > 0.0);
        assert!((r.infimum - scan).abs() < 1e-6, "{} vs {scan}", r.infimum);
    }

    #[test]
    fn degenerate_and_invalid_families() {
        let fam = KernelFamily::single(KernelSpec::zero(), 1).unwrap();
        assert_eq!(check_nondegeneracy(&fam, &decades(), 2).unwrap().infimum, 0.0);
        assert!(matches!(KernelFamily::new(vec![], 1), Err(LabError::EmptyFamily)));
        let short = ScaleGrid::log_range(1.0, 10.0, 20).unwrap();
        let fam = KernelFamily::single(KernelSpec::poisson_q(), 1).unwrap();
        assert!(check_nondegeneracy(&fam, &short, 2).is_err());
    }

    #[test]
    fn nondegeneracy_is_dilation_invariant() {
        let base = check_nondegeneracy(
            &KernelFamily::single(KernelSpec::gaussian_difference(), 2).unwrap(),
            &decades(),
            16,
        )
        .unwrap()
        .infimum;
        for lambda in [0.3, 2.0, 17.0] {
            let fam = KernelFamily::single(KernelSpec::gaussian_difference().dilated(lambda), 2).unwrap();
            let v = check_nondegeneracy(&fam, &decades(), 16).unwrap().infimum;
            assert!((v - base).abs() <= 1e-6);
        }
    }

    fn radii() -> Vec<f64> {
        (1..=6).map(|k| 2f64.powi(k)).collect()
    }

    #[test]
    fn decay_class_of_q() {
        let d = DecaySpec::new(2, 3.0).unwrap();
        let r = check_decay_class(&KernelSpec::poisson_q(), &d, &radii(), 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.fits.len(), 3);
        let r2 = check_decay_class(&KernelSpec::poisson_q(), &d, &radii(), 2).unwrap();
        assert!(r2.pass);
        assert_eq!(r2.fits.len(), 1 + 2 + 3);
    }

    #[test]
    fn decay_class_of_annulus_bump() {
        for (l, tau) in [(0, 0.0), (3, 10.0), (5, 100.0)] {
            let d = DecaySpec::new(l, tau).unwrap();
            assert!(check_decay_class(&KernelSpec::annulus_bump(), &d, &radii(), 1).unwrap().pass);
        }
    }

    #[test]
    fn decay_class_rejects_slow_tail() {
        let d = DecaySpec::new(0, 2.0).unwrap();
        let r = check_decay_class(&KernelSpec::power_tail(1.0), &d, &radii(), 1).unwrap();
        assert!(!r.pass);
        assert!((r.fits[0].slope + 1.0).abs() < 1e-9);
        let ok = DecaySpec::new(1, 1.0).unwrap();
        assert!(check_decay_class(&KernelSpec::power_tail(1.0), &ok, &radii(), 1).unwrap().pass);
    }

    #[test]
    fn decay_class_errors() {
        let d = DecaySpec::new(0, 1.0).unwrap();
        assert!(check_decay_class(&KernelSpec::poisson_q(), &d, &[0.5, 2.0], 1).is_err());
        let tiny = DecaySpec::with_radius(1, 0.0, 1e-320).unwrap();
        assert!(matches!(
            check_decay_class(&KernelSpec::gaussian(), &tiny, &[1e-318, 1e-316], 1),
            Err(LabError::StepUnderflow(_))
        ));
    }

    #[test]
    fn low_frequency_exponents() {
        let q = check_low_frequency_growth(&KernelSpec::poisson_q(), 1).unwrap();
        assert!((q.epsilon - 1.0).abs() < 0.05 && q.pass, "{q:?}");
        let m = check_low_frequency_growth(&KernelSpec::mexican_hat(), 2).unwrap();
        assert!((m.epsilon - 2.0).abs() < 0.05 && m.pass, "{m:?}");
        let g = check_low_frequency_growth(&KernelSpec::gaussian(), 1).unwrap();
        assert!(g.epsilon.abs() < 0.05 && !g.pass, "{g:?}");
        assert!(check_low_frequency_growth(&KernelSpec::zero(), 1).is_err());
    }

    #[test]
    fn power_family_claims() {
        let k = make_builtin("poisson_power_derivative", &[2.0]).unwrap();
        assert_eq!(k.claimed_decay().unwrap().tau, 2.0);
        let d = DecaySpec::new(2, 2.0).unwrap();
        let radii: Vec<f64> = (4..=10).map(|k| 2f64.powi(k)).collect();
        let r = check_decay_class(&k, &d, &radii, 1).unwrap();
        assert!(r.pass, "{r:?}");
        let strict = DecaySpec::new(0, 2.5).unwrap();
        assert!(!check_decay_class(&k, &strict, &radii, 1).unwrap().pass);
    }
}
