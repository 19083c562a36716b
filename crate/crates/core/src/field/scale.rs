use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Strictly decreasing positive scales `t_0 > t_1 > ...` used to discretize
/// `dt/t` integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    /// Constant `t_{k+1} / t_k` when the grid is geometric.
    ratio: Option<f64>,
}

impl ScaleGrid {
    /// `t_k = t_max * ratio^k`, `k = 0..count`.
    pub fn geometric(t_max: f64, ratio: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(LabError::EmptyScaleGrid);
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(LabError::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(LabError::InvalidParameter(format!("ratio must lie in (0,1), got {ratio}")));
        }
        let scales = (0..count).map(|k| t_max * ratio.powi(k as i32)).collect();
        Ok(ScaleGrid {
            scales,
            ratio: Some(ratio),
        })
    }

    /// `count` log-uniform scales from `t_max` down to `t_min` inclusive.
    pub fn log_range(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(LabError::InvalidParameter("log_range needs at least 2 scales".into()));
        }
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(LabError::InvalidParameter(format!(
                "need 0 < t_min < t_max, got {t_min}, {t_max}"
            )));
        }
        let ratio = (t_min / t_max).powf(1.0 / (count - 1) as f64);
        let log_max = t_max.ln();
        let step = (t_min.ln() - log_max) / (count - 1) as f64;
        let scales = (0..count).map(|k| (log_max + step * k as f64).exp()).collect();
        Ok(ScaleGrid {
            scales,
            ratio: Some(ratio),
        })
    }

    /// Arbitrary strictly decreasing positive scales (at least two).
    pub fn explicit(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(LabError::EmptyScaleGrid);
        }
        if scales.len() < 2 {
            return Err(LabError::InvalidParameter(
                "an explicit scale list needs at least 2 scales".into(),
            ));
        }
        if scales.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(LabError::InvalidParameter("scales must be positive".into()));
        }
        if scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::InvalidParameter("scales must be strictly decreasing".into()));
        }
        Ok(ScaleGrid {
            scales,
            ratio: None,
        })
    }

    pub(crate) fn from_raw(scales: Vec<f64>, ratio: Option<f64>) -> Result<Self> {
        let checked = Self::explicit(scales)?;
        Ok(ScaleGrid {
            scales: checked.scales,
            ratio,
        })
    }

    /// Default sweep for a grid: 64 log-spaced scales over `[2^-10 L, 2 L]`.
    pub fn default_for(half_extent: f64) -> Self {
        ScaleGrid::log_range(half_extent / 1024.0, 2.0 * half_extent, 64)
            .expect("valid default range")
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.scales[0]
    }

    pub fn t_min(&self) -> f64 {
        *self.scales.last().expect("nonempty")
    }

    pub fn ratio(&self) -> Option<f64> {
        self.ratio
    }

    /// Log-cell width owned by each sample: `ln(1/ratio)` for geometric grids,
    /// half the neighbouring log-gaps (full gap at the ends) otherwise.
    pub fn log_weights(&self) -> Vec<f64> {
        if let Some(r) = self.ratio {
            return vec![-r.ln(); self.scales.len()];
        }
        let logs: Vec<f64> = self.scales.iter().map(|t| t.ln()).collect();
        let k = logs.len();
        (0..k)
            .map(|i| {
                if i == 0 {
                    logs[0] - logs[1]
                } else if i == k - 1 {
                    logs[k - 2] - logs[k - 1]
                } else {
                    0.5 * (logs[i - 1] - logs[i + 1])
                }
            })
            .collect()
    }

    /// Scales multiplied by `factor` (same ratio).
    pub fn dilated(&self, factor: f64) -> Self {
        ScaleGrid {
            scales: self.scales.iter().map(|t| t * factor).collect(),
            ratio: self.ratio,
        }
    }
}

/// `(sum_k u_k^q w_k)^(1/q)` with the log-cell weights of `scales`: the
/// quadrature of `(int u(t)^q dt/t)^(1/q)`.
pub fn scale_integral(u: &[f64], scales: &ScaleGrid, q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(LabError::InvalidParameter(format!("q must be positive, got {q}")));
    }
    if scales.is_empty() || u.is_empty() {
        return Err(LabError::EmptyScaleGrid);
    }
    if u.len() != scales.len() {
        return Err(LabError::InvalidParameter(format!(
            "{} values for {} scales",
            u.len(),
            scales.len()
        )));
    }
    let sum: f64 = u
        .iter()
        .zip(scales.log_weights())
        .map(|(&v, w)| v.abs().powf(q) * w)
        .sum();
    Ok(sum.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_is_log_spaced() {
        let s = ScaleGrid::geometric(8.0, 0.5, 5).unwrap();
        assert_eq!(s.scales(), &[8.0, 4.0, 2.0, 1.0, 0.5]);
        for w in s.scales().windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-15);
        }
        assert!(ScaleGrid::geometric(1.0, 1.0, 3).is_err());
        assert!(ScaleGrid::geometric(1.0, 0.5, 0).is_err());
        assert!(ScaleGrid::explicit(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_integrand() {
        let s = ScaleGrid::log_range(1e-3, 1e2, 50).unwrap();
        assert_eq!(scale_integral(&vec![0.0; 50], &s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn t_exp_minus_t() {
        // int_0^inf (t e^-t)^2 dt/t = 1/4
        let s = ScaleGrid::log_range(1e-3, 1e2, 2000).unwrap();
        let u: Vec<f64> = s.scales().iter().map(|t| t * (-t).exp()).collect();
        let v = scale_integral(&u, &s, 2.0).unwrap();
        assert!((v - 0.5).abs() < 1e-3, "{v}");
    }

    #[test]
    fn constant_integrand() {
        let rho: f64 = 0.8;
        let s = ScaleGrid::geometric(3.0, rho, 17).unwrap();
        let v = scale_integral(&vec![1.0; 17], &s, 1.0).unwrap();
        assert!((v - 17.0 * (1.0 / rho).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let s = ScaleGrid::geometric(1.0, 0.5, 3).unwrap();
        assert!(scale_integral(&[1.0; 3], &s, 0.0).is_err());
        assert!(scale_integral(&[1.0; 3], &s, -2.0).is_err());
        assert!(scale_integral(&[], &s, 2.0).is_err());
    }
}
