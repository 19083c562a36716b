//! Muckenhoupt weights: power and constant weights, `A_p` characteristic and
//! `A_1` constant estimates on grids.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{dft, Grid, SampledField};
use crate::maximal::hl_max;
use crate::{LabError, Result};

/// Serializable weight declaration, e.g. `{"kind": "power", "a": -0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Power { a: f64 },
    Constant { c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `|x|^a`; the cell at the origin holds the cell average of `|x|^a`.
    Power(f64),
    Constant(f64),
    Custom(SampledField),
}

impl From<WeightSpec> for Weight {
    fn from(s: WeightSpec) -> Self {
        match s {
            WeightSpec::Power { a } => Weight::Power(a),
            WeightSpec::Constant { c } => Weight::Constant(c),
        }
    }
}

/// Average of `|x|^a` over the cell `[-h/2, h/2]^n`.
fn origin_cell_average(a: f64, h: f64, dimension: usize) -> f64 {
    if dimension == 1 {
        return (0.5 * h).powf(a) / (a + 1.0);
    }
    // midpoint rule on a fine sub-grid; the singularity is integrable for a > -2
    let m = 400;
    let s = h / m as f64;
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let x = -0.5 * h + (i as f64 + 0.5) * s;
            let y = -0.5 * h + (j as f64 + 0.5) * s;
            sum += (x * x + y * y).sqrt().powf(a);
        }
    }
    sum / (m * m) as f64
}

impl Weight {
    pub fn samples(&self, g: &Grid) -> Result<SampledField> {
        let d = g.dimension();
        let f = match self {
            Weight::Power(a) => {
                if !(*a > -(d as f64)) {
                    return Err(LabError::InvalidParameter(format!(
                        "power weight |x|^{a} is not locally integrable in dimension {d}"
                    )));
                }
                let avg = origin_cell_average(*a, g.spacing(), d);
                SampledField::from_real_fn(*g, |x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if r == 0.0 {
                        avg
                    } else {
                        r.powf(*a)
                    }
                })
            }
            Weight::Constant(c) => SampledField::constant(*g, Complex64::new(*c, 0.0)),
            Weight::Custom(f) => {
                g.check_same(f.grid())?;
                f.clone()
            }
        };
        Ok(f)
    }

    pub fn scaled(&self, lambda: f64) -> Result<Weight> {
        match self {
            Weight::Constant(c) => Ok(Weight::Constant(c * lambda)),
            Weight::Custom(f) => Ok(Weight::Custom(f.scaled(Complex64::new(lambda, 0.0)))),
            Weight::Power(_) => Err(LabError::InvalidParameter(
                "scale a power weight through a custom sample field".into(),
            )),
        }
    }
}

fn positive_samples(w: &Weight, g: &Grid) -> Result<Vec<f64>> {
    let s = w.samples(g)?;
    let v = s.real_parts();
    for (i, &x) in v.iter().enumerate() {
        if x < 0.0 {
            return Err(LabError::NegativeWeight { index: i, value: x });
        }
        if x == 0.0 {
            return Err(LabError::VanishingWeight(i));
        }
    }
    Ok(v)
}

/// Averages of `v` over the discrete balls of radius `r` centred at every grid point.
fn ball_averages(g: &Grid, v: &[f64], r: f64) -> Vec<f64> {
    let n = g.points_per_axis();
    let reach = (r / g.spacing() + 1e-9).floor() as isize;
    if g.dimension() == 1 {
        let w = reach.min((n as isize - 1) / 2);
        let count = (2 * w + 1) as f64;
        let mut prefix = vec![0.0; 3 * n + 1];
        for k in 0..3 * n {
            prefix[k + 1] = prefix[k] + v[k % n];
        }
        return (0..n)
            .map(|c| {
                let lo = (c + n) as isize - w;
                let hi = (c + n) as isize + w;
                (prefix[hi as usize + 1] - prefix[lo as usize]) / count
            })
            .collect();
    }
    let rc = r / g.spacing();
    let mut disc = vec![Complex64::new(0.0, 0.0); n * n];
    let mut count = 0usize;
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if ((dx * dx + dy * dy) as f64) <= rc * rc + 1e-9 {
                let i = dy.rem_euclid(n as isize) as usize;
                let j = dx.rem_euclid(n as isize) as usize;
                if disc[i * n + j].re == 0.0 {
                    count += 1;
                }
                disc[i * n + j] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft(g, &mut data, false);
    dft(g, &mut disc, false);
    let mut conv: Vec<Complex64> = data.iter().zip(&disc).map(|(a, b)| a * b).collect();
    dft(g, &mut conv, true);
    let scale = 1.0 / (count as f64 * (n * n) as f64);
    conv.iter().map(|c| c.re * scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApEstimate {
    pub value: f64,
    pub center: [f64; 2],
    pub radius: f64,
}

/// `sup_B (avg_B w) (avg_B w^(-1/(p-1)))^(p-1)` over balls at every grid centre and each radius.
pub fn ap_characteristic(w: &Weight, g: &Grid, p: f64, ball_radii: &[f64]) -> Result<ApEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::InvalidParameter(format!("A_p needs p > 1, got {p}")));
    }
    if ball_radii.is_empty() || ball_radii.iter().any(|&r| !(r >= 0.0)) {
        return Err(LabError::InvalidParameter("need nonnegative ball radii".into()));
    }
    let v = positive_samples(w, g)?;
    let dual: Vec<f64> = v.iter().map(|x| x.powf(-1.0 / (p - 1.0))).collect();
    let best = ball_radii
        .par_iter()
        .map(|&r| {
            let a = ball_averages(g, &v, r);
            let b = ball_averages(g, &dual, r);
            let (k, val) = a
                .iter()
                .zip(&b)
                .map(|(x, y)| x * y.powf(p - 1.0))
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("nonempty grid");
            ApEstimate {
                value: val,
                center: g.point(k),
                radius: r,
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|x, y| if y.value > x.value { y } else { x })
        .expect("nonempty radii");
    Ok(best)
}

/// `sup_x M(w)(x) / w(x)`, the measured `A_1` constant.
pub fn a1_check(w: &Weight, g: &Grid) -> Result<f64> {
    let v = positive_samples(w, g)?;
    let m = hl_max(&w.samples(g)?);
    Ok(m.values().iter().zip(&v).map(|(a, b)| a.re / b).fold(0.0, f64::max))
}
