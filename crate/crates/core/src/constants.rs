//! The quantitative constants `C_0(psi,t,L,x)`, `C(psi,j,L)`, `D(Theta,J,L)`
//! and the verdicts on the conditions built from them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calderon::{build_zeta, PartitionSystem};
use crate::field::{from_spectrum, Grid, SampledField, SpectralField};
use crate::kernel::{check_low_frequency_growth, unit_directions, KernelSpec};
use crate::numeric::fit_line;
use crate::{LabError, Result};

/// Allowed ratio of the boundary tail estimate to the integral.
pub const TAIL_FRACTION: f64 = 0.05;

/// A quadrature of a nonnegative profile with its boundary tail error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub tail: f64,
}

fn weighted_modulus(raw: &SampledField, l: f64) -> SampledField {
    let g = *raw.grid();
    let values = raw
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = g.point(i);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            Complex64::new(v.norm() * (1.0 + r).powf(l), 0.0)
        })
        .collect();
    SampledField::new(g, values).expect("same grid")
}

fn check_resolution(g: &Grid, support_radius: f64) -> Result<()> {
    if g.spacing() > 1.0 / (4.0 * support_radius) {
        return Err(LabError::GridTooCoarse(format!(
            "spacing {} exceeds 1/(4 r) = {} for spectral support radius {support_radius}",
            g.spacing(),
            1.0 / (4.0 * support_radius)
        )));
    }
    Ok(())
}

fn check_weight_exponent(l: f64) -> Result<()> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(LabError::InvalidParameter(format!("L must be >= 0, got {l}")));
    }
    Ok(())
}

/// `(1 + |x|)^L |inverse transform of xi -> psi^(xi / t) eta^(xi)|` on the grid.
pub fn c0_profile(p: &PartitionSystem, psi: &KernelSpec, t: f64, l: f64, g: &Grid) -> Result<SampledField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    check_weight_exponent(l)?;
    check_resolution(g, p.r2())?;
    if g.dimension() != p.dimension() {
        return Err(LabError::GridMismatch("grid and partition dimensions differ".into()));
    }
    let spec = SpectralField::from_fn(*g, |xi| {
        let e = p.eta(xi);
        if e.norm() == 0.0 {
            e
        } else {
            psi.symbol_at_scale(xi, 1.0 / t) * e
        }
    });
    Ok(weighted_modulus(&from_spectrum(&spec), l))
}

/// Integral of a nonnegative profile with tail = (max on the box edge) x (box measure).
pub fn integrate_profile(f: &SampledField) -> Result<ConstantEstimate> {
    let g = f.grid();
    let n = g.points_per_axis();
    let mut edge: f64 = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let a = g.axis_indices(i);
        let on_edge = a[..g.dimension()].iter().any(|&k| k == 0 || k == n - 1);
        if on_edge {
            edge = edge.max(v.norm());
        }
    }
    let value = f.integral().re;
    let tail = edge * g.measure();
    if tail > TAIL_FRACTION * value {
        return Err(LabError::BoundaryTail { tail, integral: value });
    }
    Ok(ConstantEstimate { value, tail })
}

/// `C(psi, j, L) = int C_0(psi, b^j, L, x) dx`.
pub fn c_const(p: &PartitionSystem, psi: &KernelSpec, j: i64, l: f64, g: &Grid) -> Result<ConstantEstimate> {
    integrate_profile(&c0_profile(p, psi, p.b().powi(j as i32), l, g)?)
}

/// `D(Theta, J, L) = int (1 + |x|)^L |inverse transform of zeta^_J Theta| dx`.
pub fn d_const(p: &PartitionSystem, theta_mult: &KernelSpec, big_j: f64, l: f64, g: &Grid) -> Result<ConstantEstimate> {
    check_weight_exponent(l)?;
    let z = build_zeta(p, big_j)?;
    let support = p.r2() * p.b().powi(-(z.j_min() as i32));
    check_resolution(g, support)?;
    if g.dimension() != p.dimension() {
        return Err(LabError::GridMismatch("grid and partition dimensions differ".into()));
    }
    let spec = SpectralField::from_fn(*g, |xi| {
        let v = z.symbol(xi);
        if v.norm() == 0.0 {
            v
        } else {
            v * theta_mult.symbol(xi)
        }
    });
    integrate_profile(&weighted_modulus(&from_spectrum(&spec), l))
}

/// Fitted exponent `tau` in `value_j ~ b^(j tau)` over the nonzero entries;
/// `None` when the sequence vanishes identically past its first entry.
pub fn fit_scale_exponent(b: f64, js: &[i64], values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = js
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&j, &v)| (j as f64 * b.ln(), v.ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    Some(fit_line(&xs, &ys).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// The measured quantity the verdict rests on (a sup, an exponent, or a constant).
    pub measured: f64,
    /// Decay exponent fitted over the probed range; `None` when the sequence vanishes identically.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub t: f64,
    pub sup: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub l: f64,
    pub profile_c0: Vec<ProfileSummary>,
    /// `(j, C(psi, j, L))` over the probed range `b^j <= A`.
    pub c_values: Vec<(i64, f64)>,
    /// `(j, sum_k C(d_k phi, j, L))` for `j >= 0`.
    pub grad_values: Vec<(i64, f64)>,
    pub d_value: f64,
    pub tau_fit: Option<f64>,
    /// First `j` from which `psi^(b^-j xi) eta^(xi)` vanishes identically, when it does.
    #[serde(default)]
    pub c_vanishes_from: Option<i64>,
    pub condition_verdicts: BTreeMap<String, Verdict>,
}

impl ConstantsReport {
    pub fn all_pass(&self) -> bool {
        self.condition_verdicts.values().all(|v| v.pass)
    }
}

/// Decay exponent over the second half of a sequence and the verdict
/// `sup_j value_j b^(-(shift + eps/2) j) < inf` for the fitted excess `eps`.
fn sequence_verdict(b: f64, seq: &[(i64, f64)], shift: f64) -> Verdict {
    let tail = &seq[seq.len() / 2..];
    let (js, vals): (Vec<i64>, Vec<f64>) = tail.iter().copied().unzip();
    let fitted = fit_scale_exponent(b, &js, &vals);
    let all_finite = seq.iter().all(|(_, v)| v.is_finite());
    let epsilon = fitted.map(|tau| tau - shift);
    let used = match epsilon {
        Some(e) => shift + 0.5 * e.min(1.0),
        None => shift + 0.5,
    };
    let measured = seq
        .iter()
        .map(|&(j, v)| v * b.powf(-used * j as f64))
        .fold(0.0, f64::max);
    Verdict {
        pass: all_finite && epsilon.map_or(true, |e| e > 0.0) && measured.is_finite(),
        measured,
        epsilon,
    }
}

/// True when `psi^` is exactly zero on `|xi| >= radius`, probed along sampled
/// directions on a log grid up to `1e8 radius`.
fn vanishes_beyond(psi: &KernelSpec, radius: f64, dimension: usize) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    unit_directions(dimension, 64).iter().all(|d| {
        (0..=4000).all(|k| {
            let r = radius * 1e8f64.powf(k as f64 / 4000.0);
            psi.symbol(&[d[0] * r, d[1] * r][..dimension]) == zero
        })
    })
}

/// Evaluates the five conditions for `phi` (the partition's kernel), `psi`, `Theta`
/// with weight exponent `L = N` over `j` up to `j_max`.
///
/// A sequence stops early at the first scale whose profile is no longer
/// contained in the grid box; the reported sequences show the probed range.
#[allow(clippy::too_many_arguments)]
pub fn check_conditions(
    p: &PartitionSystem,
    phi: &KernelSpec,
    psi: &KernelSpec,
    theta_mult: &KernelSpec,
    big_a: f64,
    big_n: f64,
    g: &Grid,
    j_max: i64,
) -> Result<ConstantsReport> {
    if !(big_n > 0.0) {
        return Err(LabError::InvalidParameter(format!("N must be positive, got {big_n}")));
    }
    let l = big_n;
    let b = p.b();
    let n = p.dimension();
    let mut verdicts = BTreeMap::new();

    let low = check_low_frequency_growth(phi, n)?;
    verdicts.insert(
        "(2.10)".to_string(),
        Verdict {
            pass: low.pass,
            measured: low.epsilon,
            epsilon: Some(low.epsilon),
        },
    );

    let mut grad_values = Vec::new();
    'grad: for j in 0..=j_max {
        let mut s = 0.0;
        for k in 0..n {
            match c_const(p, &phi.derivative(k), j, l, g) {
                Ok(est) => s += est.value,
                Err(LabError::BoundaryTail { .. }) if j > 0 => break 'grad,
                Err(e) => return Err(e),
            }
        }
        grad_values.push((j, s));
    }
    verdicts.insert("(2.11)".to_string(), sequence_verdict(b, &grad_values, l));

    let d1 = d_const(p, &KernelSpec::constant_multiplier(1.0), 1.0, l, g)?;
    verdicts.insert(
        "(2.12)".to_string(),
        Verdict {
            pass: d1.value.is_finite(),
            measured: d1.value,
            epsilon: None,
        },
    );

    let j_lo = crate::calderon::first_index(b, big_a);
    let mut c_values = Vec::new();
    let mut profile_c0 = Vec::new();
    let mut vanishes_from = None;
    for j in j_lo..=j_lo.max(0) + j_max {
        if vanishes_beyond(psi, p.r1() * b.powi(-(j as i32)), n) {
            vanishes_from = Some(j);
            break;
        }
        let prof = c0_profile(p, psi, b.powi(j as i32), l, g)?;
        let est = match integrate_profile(&prof) {
            Ok(est) => est,
            Err(LabError::BoundaryTail { .. }) if !c_values.is_empty() => {
                if vanishes_beyond(psi, p.r1() * b.powi(-(j as i32 + 1)), n) {
                    vanishes_from = Some(j + 1);
                }
                break;
            }
            Err(e) => return Err(e),
        };
        profile_c0.push(ProfileSummary {
            t: b.powi(j as i32),
            sup: prof.max_abs(),
            integral: est.value,
        });
        c_values.push((j, est.value));
    }
    let psi_verdict = match vanishes_from {
        // finitely many nonzero terms: the sup is a maximum
        Some(_) => Verdict {
            pass: c_values.iter().all(|(_, v)| v.is_finite()),
            measured: c_values.iter().map(|c| c.1).fold(0.0, f64::max),
            epsilon: None,
        },
        None => sequence_verdict(b, &c_values, 0.0),
    };
    let tau_fit = psi_verdict.epsilon;
    verdicts.insert("(2.15)".to_string(), psi_verdict);

    let d = d_const(p, theta_mult, big_a, l, g)?;
    verdicts.insert(
        "(2.16)".to_string(),
        Verdict {
            pass: d.value.is_finite(),
            measured: d.value,
            epsilon: None,
        },
    );

    Ok(ConstantsReport {
        l,
        profile_c0,
        c_values,
        grad_values,
        d_value: d.value,
        tau_fit,
        c_vanishes_from: vanishes_from,
        condition_verdicts: verdicts,
    })
}
