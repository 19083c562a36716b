//! Small dense least-squares helpers used by the slope fits.

/// Least-squares line `y = slope * x + intercept`.
pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least squares for `rows * coef = rhs` through the normal equations.
pub(crate) fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rows.first()?.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * b;
        }
    }
    solve_augmented(a)
}

/// Gaussian elimination with partial pivoting on an `m x (m+1)` system.
pub(crate) fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=m {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

/// Golden-section maximisation of `f` on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `sum_k term(k)` of equal-length vectors, evaluated in parallel chunks but
/// accumulated in index order so the result does not depend on scheduling.
pub(crate) fn ordered_sum<T, F>(count: usize, len: usize, term: F) -> Vec<T>
where
    T: Copy + Default + Send + std::ops::AddAssign,
    F: Fn(usize) -> Vec<T> + Sync,
{
    use rayon::prelude::*;
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut acc = vec![T::default(); len];
    let mut start = 0;
    while start < count {
        let end = (start + chunk).min(count);
        let parts: Vec<Vec<T>> = (start..end).into_par_iter().map(&term).collect();
        for part in parts {
            for (a, v) in acc.iter_mut().zip(part) {
                *a += v;
            }
        }
        start = end;
    }
    acc
}
