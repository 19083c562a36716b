//! Calderón partition systems: the interval cover of a non-degenerate family,
//! the dual symbols `eta^`, the low-pass `zeta^_J` and the `alpha`/`beta`
//! splitting of a second kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::ScaleGrid;
use crate::kernel::{norm, KernelFamily, KernelSpec};
use crate::numeric::golden_max;
use crate::smooth::plateau;
use crate::{LabError, Result};

/// Compact scale windows on which the squared symbol sum stays above threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCover {
    pub intervals: Vec<[f64; 2]>,
    pub b0: f64,
    /// Measured `inf_dir sup_t sum_i |phi^(i)^(t xi)|^2`.
    pub infimum: f64,
    pub threshold: f64,
}

fn square_sum_on_ray(fam: &KernelFamily, dir: [f64; 2], t: f64) -> f64 {
    let n = fam.dimension();
    fam.square_sum(&[dir[0] * t, dir[1] * t][..n])
}

/// Largest `t` in `[inside, outside]` (or smallest, by orientation) still above `threshold`.
fn refine_edge(f: impl Fn(f64) -> f64, mut inside: f64, mut outside: f64, threshold: f64) -> f64 {
    for _ in 0..80 {
        let mid = (inside * outside).sqrt();
        if f(mid) >= threshold {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Greedy cover: for each sampled direction the widest (in `log t`) window on
/// which the squared sum is at least half the measured infimum; overlapping
/// windows are replaced by their intersection, which stays valid for both.
pub fn find_intervals(fam: &KernelFamily, direction_count: usize, t_grid: &ScaleGrid) -> Result<IntervalCover> {
    let mut ts: Vec<f64> = t_grid.scales().to_vec();
    ts.reverse();
    let dirs = fam.directions(direction_count);
    let samples: Vec<Vec<f64>> = dirs
        .iter()
        .map(|&d| ts.iter().map(|&t| square_sum_on_ray(fam, d, t)).collect())
        .collect();
    let infimum = dirs
        .iter()
        .zip(&samples)
        .map(|(&d, v)| {
            let (k, &best) = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty scale grid");
            let lo = ts[k.saturating_sub(1)].ln();
            let hi = ts[(k + 1).min(ts.len() - 1)].ln();
            let (_, refined) = golden_max(|s| square_sum_on_ray(fam, d, s.exp()), lo, hi, 100);
            best.max(refined)
        })
        .fold(f64::INFINITY, f64::min);
    if !(infimum > 0.0) {
        return Err(LabError::Degenerate(format!(
            "no scale window found: squared symbol sum vanishes along some direction ({infimum})"
        )));
    }
    let threshold = 0.5 * infimum;
    let mut windows: Vec<[f64; 2]> = Vec::new();
    for (d, vals) in dirs.iter().zip(&samples) {
        let mut best: Option<(usize, usize)> = None;
        let mut start = None;
        for k in 0..=vals.len() {
            let above = k < vals.len() && vals[k] >= threshold;
            match (above, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    let e = k - 1;
                    if best.map_or(true, |(bs, be)| ts[e] / ts[s] > ts[be] / ts[bs]) {
                        best = Some((s, e));
                    }
                    start = None;
                }
                _ => {}
            }
        }
        let (s, e) = best.ok_or_else(|| LabError::Degenerate("no scale window found at threshold".into()))?;
        let f = |t: f64| square_sum_on_ray(fam, *d, t);
        let lo = if s > 0 { refine_edge(f, ts[s], ts[s - 1], threshold) } else { ts[s] };
        let hi = if e + 1 < ts.len() { refine_edge(f, ts[e], ts[e + 1], threshold) } else { ts[e] };
        if !(hi > lo) {
            return Err(LabError::Degenerate("scale window collapsed to a point".into()));
        }
        let w = [lo, hi];
        match windows.iter_mut().find(|v| v[0] <= w[1] && w[0] <= v[1]) {
            Some(v) => *v = [v[0].max(w[0]), v[1].min(w[1])],
            None => windows.push(w),
        }
    }
    windows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let b0 = windows.iter().map(|w| w[0] / w[1]).fold(0.0, f64::max);
    Ok(IntervalCover {
        intervals: windows,
        b0,
        infimum,
        threshold,
    })
}

/// The system of dual symbols `eta^(i) = theta(|xi|) conj(phi^(i)) / Psi`.
#[derive(Debug, Clone)]
pub struct PartitionSystem {
    family: KernelFamily,
    b: f64,
    b0: f64,
    m: f64,
    big_h: f64,
    intervals: Vec<[f64; 2]>,
    threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub b: f64,
    pub b0: f64,
    pub r1: f64,
    pub r2: f64,
    pub plateau: [f64; 2],
    pub intervals: Vec<[f64; 2]>,
    pub threshold: f64,
}

/// Builds the partition system at base `b` from an interval cover of `fam`.
pub fn build_partition(fam: &KernelFamily, b: f64, cover: &IntervalCover) -> Result<PartitionSystem> {
    if !(b >= cover.b0 && b < 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "base b = {b} outside [b0, 1) = [{}, 1)",
            cover.b0
        )));
    }
    if cover.intervals.is_empty() {
        return Err(LabError::InvalidParameter("empty interval cover".into()));
    }
    let m = cover.intervals.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
    let big_h = cover.intervals.iter().map(|w| w[1]).fold(0.0, f64::max);
    let p = PartitionSystem {
        family: fam.clone(),
        b,
        b0: cover.b0,
        m,
        big_h,
        intervals: cover.intervals.clone(),
        threshold: cover.threshold,
    };
    let dirs = fam.directions(64);
    let steps = 256;
    let mut worst = f64::INFINITY;
    for d in &dirs {
        for k in 0..steps {
            let r = b.powf(-(k as f64) / steps as f64);
            worst = worst.min(p.psi_big(&[d[0] * r, d[1] * r][..fam.dimension()]));
        }
    }
    if !(worst >= 1e-10) {
        return Err(LabError::SingularNormalizer(worst));
    }
    Ok(p)
}

/// Integers `j` with `b^j r` in `[lo, hi]`, padded by one on each side.
fn scale_indices(b: f64, r: f64, lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    let lb = b.ln();
    let first = ((hi / r).ln() / lb).ceil() as i64 - 1;
    let last = ((lo / r).ln() / lb).floor() as i64 + 1;
    first..=last
}

fn scaled(xi: &[f64], s: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (o, v) in out.iter_mut().zip(xi) {
        *o = v * s;
    }
    out
}

impl PartitionSystem {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn r1(&self) -> f64 {
        0.5 * self.m
    }

    pub fn r2(&self) -> f64 {
        2.0 * self.big_h
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.family.dimension()
    }

    /// The first family member, the analysing kernel `phi` when `M = 1`.
    pub fn phi(&self) -> &KernelSpec {
        &self.family.members()[0]
    }

    pub fn summary(&self) -> PartitionSummary {
        PartitionSummary {
            b: self.b,
            b0: self.b0,
            r1: self.r1(),
            r2: self.r2(),
            plateau: [self.m, self.big_h],
            intervals: self.intervals.clone(),
            threshold: self.threshold,
        }
    }

    /// The bump `theta`: 1 on `[m, H]`, supported in `[m/2, 2H]`.
    pub fn theta(&self, r: f64) -> f64 {
        plateau(r, self.r1(), self.m, self.big_h, self.r2())
    }

    /// `Psi(xi) = sum_j theta(b^j |xi|) sum_i |phi^(i)^(b^j xi)|^2`.
    pub fn psi_big(&self, xi: &[f64]) -> f64 {
        let r = norm(xi);
        if r == 0.0 {
            return 0.0;
        }
        scale_indices(self.b, r, self.r1(), self.r2())
            .map(|j| {
                let s = self.b.powi(j as i32);
                let th = self.theta(s * r);
                if th == 0.0 {
                    0.0
                } else {
                    th * self.family.square_sum(&scaled(xi, s)[..xi.len()])
                }
            })
            .sum()
    }

    /// `eta^(i)(xi)`.
    pub fn eta_member(&self, i: usize, xi: &[f64]) -> Complex64 {
        let th = self.theta(norm(xi));
        if th == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.family.members()[i].symbol(xi).conj() * (th / self.psi_big(xi))
    }

    /// `eta^` of the first member.
    pub fn eta(&self, xi: &[f64]) -> Complex64 {
        self.eta_member(0, xi)
    }

    /// `sum_i phi^(i)^(xi) eta^(i)(xi)`.
    pub fn pairing(&self, xi: &[f64]) -> Complex64 {
        let th = self.theta(norm(xi));
        if th == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let psi = self.psi_big(xi);
        self.family
            .members()
            .iter()
            .map(|k| {
                let v = k.symbol(xi);
                v * v.conj() * (th / psi)
            })
            .sum()
    }

    /// `sum_{j in [j_lo, j_hi]} <phi^(b^j xi), eta^(b^j xi)>`, over the scales where it can be nonzero.
    fn partial_sum(&self, xi: &[f64], j_lo: i64, j_hi: i64) -> Complex64 {
        let r = norm(xi);
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let range = scale_indices(self.b, r, self.r1(), self.r2());
        let lo = (*range.start()).max(j_lo);
        let hi = (*range.end()).min(j_hi);
        (lo..=hi)
            .map(|j| self.pairing(&scaled(xi, self.b.powi(j as i32))[..xi.len()]))
            .sum()
    }

    /// `sum_j <phi^(b^j xi), eta^(b^j xi)>` over all `j`.
    pub fn reproducing_sum(&self, xi: &[f64]) -> Complex64 {
        self.partial_sum(xi, i64::MIN, i64::MAX)
    }

    /// `sup |reproducing_sum - 1|` over the annulus `b r1 <= |xi| <= r2 / b`.
    pub fn annulus_residual(&self, radial: usize, directions: usize) -> f64 {
        let (lo, hi) = (self.b * self.r1(), self.r2() / self.b);
        let n = self.dimension();
        let mut worst: f64 = 0.0;
        for d in self.family.directions(directions) {
            for k in 0..radial {
                let r = lo * (hi / lo).powf(k as f64 / (radial - 1).max(1) as f64);
                let v = self.reproducing_sum(&[d[0] * r, d[1] * r][..n]);
                worst = worst.max((v - 1.0).norm());
            }
        }
        worst
    }

    /// `eta^` as a kernel spec, for filtering.
    pub fn eta_kernel(&self) -> KernelSpec {
        let p = self.clone();
        KernelSpec::new("eta", move |xi: &[f64]| p.eta(xi))
    }
}

/// Smallest `j` with `b^j <= J`.
pub(crate) fn first_index(b: f64, big_j: f64) -> i64 {
    (big_j.ln() / b.ln() - 1e-12).ceil() as i64
}

/// `zeta^_J = 1 - sum_{j : b^j <= J} <phi^(b^j xi), eta^(b^j xi)>`.
#[derive(Debug, Clone)]
pub struct ZetaSymbol {
    big_j: f64,
    j_min: i64,
    parent: PartitionSystem,
}

pub fn build_zeta(p: &PartitionSystem, big_j: f64) -> Result<ZetaSymbol> {
    if !(big_j > 0.0 && big_j.is_finite()) {
        return Err(LabError::InvalidParameter(format!("J must be positive, got {big_j}")));
    }
    Ok(ZetaSymbol {
        big_j,
        j_min: first_index(p.b, big_j),
        parent: p.clone(),
    })
}

impl ZetaSymbol {
    pub fn big_j(&self) -> f64 {
        self.big_j
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn parent(&self) -> &PartitionSystem {
        &self.parent
    }

    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        let r = norm(xi);
        if r < self.parent.r1() / self.big_j {
            return Complex64::new(1.0, 0.0);
        }
        if r > self.parent.r2() * self.parent.b.powi(-(self.j_min as i32)) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(1.0, 0.0) - self.parent.partial_sum(xi, self.j_min, i64::MAX)
    }

    pub fn kernel(&self) -> KernelSpec {
        let z = self.clone();
        KernelSpec::new(format!("zeta_{}", self.big_j), move |xi: &[f64]| z.symbol(xi))
    }
}

/// Splitting `psi^ = sum_j phi^(b^j xi) alpha^_j(b^j xi) + phi^ beta^`.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    partition: PartitionSystem,
    psi: KernelSpec,
    theta_mult: KernelSpec,
    zeta: ZetaSymbol,
    j_range: (i64, i64),
    residual: f64,
}

/// Tolerance for the near-origin relation and the identity residual.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

fn sample_points(dimension: usize, r_lo: f64, r_hi: f64, radial: usize, directions: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for d in crate::kernel::unit_directions(dimension, directions) {
        for k in 0..radial {
            let r = r_lo * (r_hi / r_lo).powf(k as f64 / (radial - 1).max(1) as f64);
            out.push([d[0] * r, d[1] * r]);
        }
    }
    out
}

pub fn decompose_psi(
    p: &PartitionSystem,
    psi: &KernelSpec,
    theta_mult: &KernelSpec,
    big_a: f64,
    truncation: usize,
) -> Result<DecompositionResult> {
    if p.family.members().len() != 1 {
        return Err(LabError::InvalidParameter("decomposition needs a single analysing kernel".into()));
    }
    if !(big_a >= 1.0 && big_a.is_finite()) {
        return Err(LabError::InvalidParameter(format!("A must be >= 1, got {big_a}")));
    }
    let n = p.dimension();
    let phi = p.phi();
    let near = p.r2() / big_a;
    let mut origin_residual: f64 = 0.0;
    let mut at = 0.0;
    let mut probes = sample_points(n, near * 1e-6, near * (1.0 - 1e-9), 200, 16);
    probes.push([0.0, 0.0]);
    for xi in &probes {
        let x = &xi[..n];
        let d = (psi.symbol(x) - phi.symbol(x) * theta_mult.symbol(x)).norm();
        if d > origin_residual {
            origin_residual = d;
            at = norm(x);
        }
    }
    if origin_residual > DECOMPOSITION_TOL {
        return Err(LabError::NearOriginViolated {
            residual: origin_residual,
            radius: at,
        });
    }
    let zeta = build_zeta(p, big_a)?;
    let j_lo = zeta.j_min;
    let j_hi = j_lo + truncation as i64;
    let mut out = DecompositionResult {
        partition: p.clone(),
        psi: psi.clone(),
        theta_mult: theta_mult.clone(),
        zeta,
        j_range: (j_lo, j_hi),
        residual: 0.0,
    };
    let admissible = out.admissible_radius();
    if admissible < near {
        return Err(LabError::TruncationTooShort(admissible));
    }
    let pts = sample_points(n, near * 1e-3, admissible, 400, 16);
    out.residual = out.identity_residual(pts.iter().map(|v| &v[..n]));
    if out.residual > DECOMPOSITION_TOL {
        return Err(LabError::TruncationTooShort(out.residual));
    }
    Ok(out)
}

impl DecompositionResult {
    pub fn j_range(&self) -> (i64, i64) {
        self.j_range
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn partition(&self) -> &PartitionSystem {
        &self.partition
    }

    pub fn zeta(&self) -> &ZetaSymbol {
        &self.zeta
    }

    /// Frequencies `|xi| <= r1 b^-j_max` are unaffected by truncating the alpha tail.
    pub fn admissible_radius(&self) -> f64 {
        self.partition.r1() * self.partition.b.powi(-(self.j_range.1 as i32))
    }

    /// `alpha^_j(xi) = psi^(b^-j xi) eta^(xi)`.
    pub fn alpha(&self, j: i64, xi: &[f64]) -> Complex64 {
        let e = self.partition.eta(xi);
        if e == Complex64::new(0.0, 0.0) {
            return e;
        }
        let s = self.partition.b.powi(-(j as i32));
        self.psi.symbol(&scaled(xi, s)[..xi.len()]) * e
    }

    /// `beta^ = zeta^_A Theta`.
    pub fn beta(&self, xi: &[f64]) -> Complex64 {
        let z = self.zeta.symbol(xi);
        if z == Complex64::new(0.0, 0.0) {
            return z;
        }
        z * self.theta_mult.symbol(xi)
    }

    /// Right-hand side of the splitting over the truncated `j` range.
    pub fn reconstruct(&self, xi: &[f64]) -> Complex64 {
        let phi = self.partition.phi();
        let b = self.partition.b;
        let r = norm(xi);
        let mut acc = phi.symbol(xi) * self.beta(xi);
        if r == 0.0 {
            return acc;
        }
        let range = scale_indices(b, r, self.partition.r1(), self.partition.r2());
        let lo = (*range.start()).max(self.j_range.0);
        let hi = (*range.end()).min(self.j_range.1);
        for j in lo..=hi {
            let y = scaled(xi, b.powi(j as i32));
            let y = &y[..xi.len()];
            acc += phi.symbol(y) * self.alpha(j, y);
        }
        acc
    }

    pub fn identity_residual<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
        points
            .into_iter()
            .map(|xi| (self.psi.symbol(xi) - self.reconstruct(xi)).norm())
            .fold(0.0, f64::max)
    }

    pub fn beta_kernel(&self) -> KernelSpec {
        let d = self.clone();
        KernelSpec::new("beta", move |xi: &[f64]| d.beta(xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn t_grid() -> ScaleGrid {
        ScaleGrid::log_range(1e-4, 1e4, 801).unwrap()
    }

    fn cover(k: KernelSpec, n: usize) -> (KernelFamily, IntervalCover) {
        let fam = KernelFamily::single(k, n).unwrap();
        let c = find_intervals(&fam, 64, &t_grid()).unwrap();
        (fam, c)
    }

    #[test]
    fn q_cover_is_a_single_valid_window() {
        let (_, c) = cover(KernelSpec::poisson_q(), 1);
        assert_eq!(c.intervals.len(), 1);
        let [a, b] = c.intervals[0];
        // oracle: u e^{-u} with u = 2 pi t has maximum e^{-1} at u = 1
        assert!((c.infimum - (-2f64).exp()).abs() < 1e-6);
        // the example window [1/(4 pi), 1/pi] lies inside the greedy one
        assert!(a <= 1.0 / (4.0 * PI) && b >= 1.0 / PI);
        assert!(c.b0 <= 0.25);
        for k in 0..=100 {
            let t = a * (b / a).powf(k as f64 / 100.0);
            assert!(KernelSpec::poisson_q().symbol(&[t]).norm_sqr() >= c.threshold * (1.0 - 1e-12));
        }
        let on_example = (0..=1000)
            .map(|k| {
                let t = (1.0 / (4.0 * PI)) * 4f64.powf(k as f64 / 1000.0);
                KernelSpec::poisson_q().symbol(&[t]).norm()
            })
            .fold(f64::INFINITY, f64::min);
        let oracle = (0.5 * (-0.5f64).exp()).min(2.0 * (-2f64).exp());
        assert!((on_example - oracle).abs() < 1e-12);
        assert!((oracle - 0.2707).abs() < 1e-4);
    }

    #[test]
    fn annulus_cover_contains_plateau() {
        let (_, c) = cover(KernelSpec::annulus_bump(), 2);
        assert_eq!(c.intervals.len(), 1);
        let [a, b] = c.intervals[0];
        assert!(a <= 1.0 && b >= 2.0);
        assert!(c.b0 <= 0.5);
        assert!((c.infimum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_family_has_no_cover() {
        let fam = KernelFamily::single(KernelSpec::zero(), 1).unwrap();
        assert!(matches!(find_intervals(&fam, 2, &t_grid()), Err(LabError::Degenerate(_))));
    }

    #[test]
    fn base_below_b0_rejected() {
        let (fam, c) = cover(KernelSpec::poisson_q(), 1);
        assert!(build_partition(&fam, c.b0 * 0.5, &c).is_err());
        assert!(build_partition(&fam, 1.0, &c).is_err());
    }

    fn partitions() -> Vec<PartitionSystem> {
        let mut out = Vec::new();
        for (k, n) in [
            (KernelSpec::poisson_q(), 1),
            (KernelSpec::poisson_q(), 2),
            (KernelSpec::annulus_bump(), 1),
            (KernelSpec::mexican_hat(), 2),
            (KernelSpec::gaussian_difference(), 1),
        ] {
            let (fam, c) = cover(k, n);
            for b in [c.b0, 0.5 * (c.b0 + 1.0), 0.9] {
                out.push(build_partition(&fam, b, &c).unwrap());
            }
        }
        out
    }

    #[test]
    fn reproducing_identity_on_annulus() {
        for p in partitions() {
            let r = p.annulus_residual(400, 16);
            assert!(r <= 1e-10, "b = {}: {r}", p.b());
        }
    }

    #[test]
    fn reproducing_identity_far_from_annulus() {
        let p = &partitions()[1];
        for r in [1e-6, 1e-3, 7.0, 1e5] {
            assert!((p.reproducing_sum(&[r * 0.6, r * 0.8]) - 1.0).norm() <= 1e-10);
        }
        assert_eq!(p.reproducing_sum(&[0.0, 0.0]).norm(), 0.0);
    }

    #[test]
    fn eta_support_and_psi_periodicity() {
        for p in partitions() {
            let n = p.dimension();
            for k in 0..2000 {
                let r = 1e-3 * 1e6f64.powf(k as f64 / 1999.0);
                let xi = [r * 0.8, r * 0.6];
                let xi = if n == 1 { &xi[..1] } else { &xi[..] };
                let xi = if n == 1 { vec![r] } else { xi.to_vec() };
                if r <= p.r1() || r >= p.r2() {
                    assert!(p.eta(&xi).norm() <= 1e-14);
                }
                let base = p.psi_big(&xi);
                for kk in -3..=3 {
                    let s = p.b().powi(kk);
                    let y: Vec<f64> = xi.iter().map(|v| v * s).collect();
                    assert!((p.psi_big(&y) - base).abs() <= 1e-10 * base.max(1.0));
                }
            }
        }
    }

    #[test]
    fn annulus_eta_is_real_nonnegative() {
        let (fam, c) = cover(KernelSpec::annulus_bump(), 1);
        let p = build_partition(&fam, 0.5, &c).unwrap();
        for k in 0..1000 {
            let r = 0.1 + 10.0 * k as f64 / 1000.0;
            for x in [r, -r] {
                let e = p.eta(&[x]);
                assert_eq!(e.im, 0.0);
                assert!(e.re >= 0.0);
            }
        }
    }

    #[test]
    fn eta_gradient_is_bounded() {
        let p = &partitions()[0];
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for k in 0..4000 {
            let r = p.r1() + (p.r2() - p.r1()) * k as f64 / 4000.0;
            let g = (p.eta(&[r + h]) - p.eta(&[r - h])).norm() / (2.0 * h);
            worst = worst.max(g);
        }
        assert!(worst.is_finite() && worst < 1e3);
    }

    #[test]
    fn zeta_plateau_and_support() {
        for p in partitions().iter().step_by(2) {
            let n = p.dimension();
            for big_j in [0.3, 1.0, 4.0] {
                let z = build_zeta(p, big_j).unwrap();
                for k in 0..500 {
                    let r = 1e-3 * 1e5f64.powf(k as f64 / 499.0);
                    let xi = if n == 1 { vec![r] } else { vec![0.0, r] };
                    let v = z.symbol(&xi);
                    if r < p.r1() / big_j {
                        assert!((v - 1.0).norm() <= 1e-12);
                    }
                    if r > p.r2() / big_j {
                        assert!(v.norm() <= 1e-12, "J={big_j} r={r} {v}");
                    }
                }
            }
            let z = build_zeta(p, 1.0).unwrap();
            let at = |r: f64| if n == 1 { z.symbol(&[r]) } else { z.symbol(&[r, 0.0]) };
            assert!(at(p.r2()).norm() <= 1e-12);
            assert!((at(0.5 * p.r1()) - 1.0).norm() <= 1e-12);
        }
        assert!(build_zeta(&partitions()[0], 0.0).is_err());
    }

    #[test]
    fn reproducing_sum_is_dilation_consistent() {
        let p = &partitions()[4];
        for k in 0..300 {
            let r = 0.01 * 1e3f64.powf(k as f64 / 299.0);
            let a = p.reproducing_sum(&[r]);
            let b = p.reproducing_sum(&[r * p.b()]);
            assert!((a - b).norm() <= 1e-12);
        }
    }

    fn q_partition(n: usize) -> PartitionSystem {
        let (fam, c) = cover(KernelSpec::poisson_q(), n);
        build_partition(&fam, 0.5, &c).unwrap()
    }

    #[test]
    fn decomposition_of_phi_itself() {
        let p = q_partition(1);
        let one = KernelSpec::constant_multiplier(1.0);
        let d = decompose_psi(&p, &KernelSpec::poisson_q(), &one, 1.0, 30).unwrap();
        assert!(d.residual() <= 1e-8);
        assert_eq!(d.j_range(), (0, 30));
    }

    #[test]
    fn decomposition_with_vanishing_theta() {
        let p = q_partition(1);
        let psi = KernelSpec::annulus_bump();
        let zero = KernelSpec::constant_multiplier(0.0);
        let big_a = 2.0 * p.r2();
        let d = decompose_psi(&p, &psi, &zero, big_a, 30).unwrap();
        for k in 0..1000 {
            let r = 1e-4 * 1e6f64.powf(k as f64 / 999.0);
            assert_eq!(d.beta(&[r]), Complex64::new(0.0, 0.0));
        }
        assert!(d.residual() <= 1e-8);
    }

    #[test]
    fn decomposition_of_derivative() {
        let p = q_partition(2);
        let psi = KernelSpec::poisson_q().derivative(0);
        let xi1 = KernelSpec::xi_multiplier(0);
        let d = decompose_psi(&p, &psi, &xi1, 1.0, 30).unwrap();
        assert!(d.residual() <= 1e-8);
        let z = build_zeta(&p, 1.0).unwrap();
        for k in 0..200 {
            let r = 1e-3 * 1e4f64.powf(k as f64 / 199.0);
            let xi = [r * 0.6, r * 0.8];
            let v = d.beta(&xi);
            let expect = z.symbol(&xi) * Complex64::new(0.0, 2.0 * PI * xi[0]);
            assert!((v - expect).norm() <= 1e-15);
            assert!(v.re.abs() <= 1e-15);
            assert!((d.beta(&[-xi[0], -xi[1]]) + v).norm() <= 1e-14);
        }
    }

    #[test]
    fn decomposition_errors() {
        let p = q_partition(1);
        let zero = KernelSpec::constant_multiplier(0.0);
        assert!(matches!(
            decompose_psi(&p, &KernelSpec::poisson_q(), &zero, 1.0, 30),
            Err(LabError::NearOriginViolated { .. })
        ));
        let one = KernelSpec::constant_multiplier(1.0);
        assert!(matches!(
            decompose_psi(&p, &KernelSpec::poisson_q(), &one, 1.0, 0),
            Err(LabError::TruncationTooShort(_))
        ));
        assert!(decompose_psi(&p, &KernelSpec::poisson_q(), &one, 0.5, 30).is_err());
    }
}
