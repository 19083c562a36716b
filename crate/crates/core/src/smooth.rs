//! The `exp(-1/s)` smooth step and the plateau bumps built from it.

fn flat_exp(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// C-infinity step: 0 for `s <= 0`, 1 for `s >= 1`.
pub(crate) fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = flat_exp(s);
    let b = flat_exp(1.0 - s);
    a / (a + b)
}

/// Equal to 1 on `[inner_lo, inner_hi]`, vanishing outside `(outer_lo, outer_hi)`.
pub(crate) fn plateau(r: f64, outer_lo: f64, inner_lo: f64, inner_hi: f64, outer_hi: f64) -> f64 {
    if r <= outer_lo || r >= outer_hi {
        return 0.0;
    }
    let rise = if r >= inner_lo {
        1.0
    } else {
        transition((r - outer_lo) / (inner_lo - outer_lo))
    };
    let fall = if r <= inner_hi {
        1.0
    } else {
        transition((outer_hi - r) / (outer_hi - inner_hi))
    };
    rise * fall
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_limits_and_symmetry() {
        assert_eq!(transition(-1.0), 0.0);
        assert_eq!(transition(0.0), 0.0);
        assert_eq!(transition(1.0), 1.0);
        assert!((transition(0.5) - 0.5).abs() < 1e-15);
        for k in 1..100 {
            let s = k as f64 / 100.0;
            assert!((transition(s) + transition(1.0 - s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn plateau_support() {
        assert_eq!(plateau(1.5, 0.5, 1.0, 2.0, 4.0), 1.0);
        assert_eq!(plateau(0.4, 0.5, 1.0, 2.0, 4.0), 0.0);
        assert_eq!(plateau(4.0, 0.5, 1.0, 2.0, 4.0), 0.0);
        assert!(plateau(3.0, 0.5, 1.0, 2.0, 4.0) > 0.0);
    }
}
