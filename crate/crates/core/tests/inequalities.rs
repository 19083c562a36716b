use lplab_core::calderon::{build_partition, decompose_psi, find_intervals, PartitionSystem};
use lplab_core::constants::{c_const, d_const};
use lplab_core::field::{lp_norm, Grid, PreparedSpectrum, SampledField, ScaleGrid};
use lplab_core::kernel::{KernelFamily, KernelSpec};
use lplab_core::maximal::{grand_max, hl_max, peetre_max, GrandMaxConfig, PeetreParams};
use lplab_core::transforms::{band_limited_noise, g_function, scale_transform};

fn partition(phi: &KernelSpec, b: f64) -> PartitionSystem {
    let fam = KernelFamily::single(phi.clone(), 1).unwrap();
    let cover = find_intervals(&fam, 64, &ScaleGrid::log_range(1e-4, 1e4, 801).unwrap()).unwrap();
    build_partition(&fam, b, &cover).unwrap()
}

fn family(g: &Grid, count: u64) -> Vec<SampledField> {
    (0..count).map(|s| band_limited_noise(g, [0.5, 4.0], 11 + s).unwrap()).collect()
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}

// |f * psi_t| against sum_j C(psi, j, N) E(phi, f)(., b^j t)** + D E(phi, f)(., t)**
fn pointwise_ratio(psi: &KernelSpec, theta: &KernelSpec, big_a: f64) -> Vec<f64> {
    let phi = KernelSpec::poisson_q();
    let p = partition(&phi, 0.5);
    let n = 2.0;
    let dec = decompose_psi(&p, psi, theta, big_a, 64).unwrap();
    let cg = Grid::line(1 << 14, 1024.0).unwrap();
    let (j_lo, _) = dec.j_range();
    let mut weights = Vec::new();
    for j in j_lo..j_lo + 24 {
        match c_const(&p, psi, j, n, &cg) {
            Ok(c) if c.value.is_finite() => weights.push((j, c.value)),
            _ => break,
        }
    }
    assert!(weights.len() >= 4);
    let d = d_const(&p, theta, big_a, n, &cg).unwrap().value;

    let g = Grid::line(1024, 32.0).unwrap();
    let ts = [0.25, 0.5, 1.0, 2.0];
    family(&g, 4)
        .iter()
        .map(|f| {
            let spec = PreparedSpectrum::new(f);
            let mut worst: f64 = 0.0;
            for &t in &ts {
                let lhs = spec.apply(|xi| psi.symbol_at_scale(xi, t)).moduli();
                let mut rhs = vec![0.0; g.cell_count()];
                let mut add = |s: f64, weight: f64| {
                    if weight == 0.0 {
                        return;
                    }
                    let e = spec.apply(|xi| phi.symbol_at_scale(xi, s));
                    let pm = peetre_max(&e, PeetreParams::new(n, 1.0 / s).unwrap());
                    for (r, v) in rhs.iter_mut().zip(pm.moduli()) {
                        *r += weight * v;
                    }
                };
                for &(j, c) in &weights {
                    add(0.5f64.powi(j as i32) * t, c);
                }
                add(t, d);
                for (l, r) in lhs.iter().zip(&rhs) {
                    if *l > 1e-12 {
                        worst = worst.max(l / r);
                    }
                }
            }
            worst
        })
        .collect()
}

#[test]
fn pointwise_bound_for_compact_band_kernel() {
    let ratios = pointwise_ratio(&KernelSpec::annulus_bump(), &KernelSpec::constant_multiplier(0.0), 2.0);
    for r in &ratios {
        assert!(r.is_finite() && *r > 0.0 && *r <= 1.05, "{ratios:?}");
    }
}

#[test]
fn pointwise_bound_for_derivative_kernel() {
    let psi = KernelSpec::poisson_q().derivative(0);
    let ratios = pointwise_ratio(&psi, &KernelSpec::xi_multiplier(0), 1.0);
    for r in &ratios {
        assert!(r.is_finite() && *r > 0.0 && *r <= 1.05, "{ratios:?}");
    }
}

#[test]
fn peetre_integral_controlled_by_maximal_integral() {
    // q = 2, N = 2, n = 1, r = n / N
    let phi = KernelSpec::poisson_q();
    let g = Grid::line(512, 32.0).unwrap();
    let scales = ScaleGrid::log_range(1e-2, 1e2, 65).unwrap();
    let w = scales.log_weights();
    let (n, r, q) = (2.0, 0.5, 2.0);
    let constants: Vec<f64> = family(&g, 6)
        .iter()
        .map(|f| {
            let e = scale_transform(f, &phi, &scales);
            let mut lhs = vec![0.0; g.cell_count()];
            let mut rhs = vec![0.0; g.cell_count()];
            for (k, &t) in scales.scales().iter().enumerate() {
                let slice = e.slice(k);
                let pm = peetre_max(&slice, PeetreParams::new(n, 1.0 / t).unwrap());
                let powered = SampledField::from_real(g, &slice.moduli().iter().map(|v| v.powf(r)).collect::<Vec<_>>()).unwrap();
                let m = hl_max(&powered);
                for i in 0..g.cell_count() {
                    lhs[i] += w[k] * pm.values()[i].norm().powf(q);
                    rhs[i] += w[k] * m.values()[i].norm().powf(q / r);
                }
            }
            lhs.iter().zip(&rhs).map(|(a, b)| a / b).fold(0.0, f64::max)
        })
        .collect();
    assert!(constants.iter().all(|c| c.is_finite() && *c > 0.0), "{constants:?}");
    assert!(spread(&constants) <= 3.0, "{constants:?}");
}

#[test]
fn band_limited_sup_controlled_by_annulus_square_function() {
    let g = Grid::line(1024, 32.0).unwrap();
    let psi = KernelSpec::band_bump(1.0, 2.0).unwrap();
    let eta = KernelSpec::annulus_bump();
    let scales = ScaleGrid::log_range(1.0 / 32.0, 32.0, 41).unwrap();
    let gm = GrandMaxConfig::new(KernelSpec::gaussian(), ScaleGrid::log_range(1.0 / 64.0, 64.0, 49).unwrap()).unwrap();
    let w = scales.log_weights();
    for p in [1.0, 2.0] {
        let constants: Vec<f64> = family(&g, 6)
            .iter()
            .map(|f| {
                let e = scale_transform(f, &psi, &scales);
                let mut acc = vec![0.0; g.cell_count()];
                for k in 0..scales.len() {
                    let sup = grand_max(&e.slice(k), &gm);
                    for (a, v) in acc.iter_mut().zip(sup.moduli()) {
                        *a += w[k] * v * v;
                    }
                }
                let lhs = SampledField::from_real(g, &acc.iter().map(|v| v.sqrt()).collect::<Vec<_>>()).unwrap();
                let rhs = g_function(f, &eta, &scales, 2.0).unwrap();
                lp_norm(&lhs, p).unwrap() / lp_norm(&rhs, p).unwrap()
            })
            .collect();
        assert!(constants.iter().all(|c| c.is_finite() && *c > 0.0), "{constants:?}");
        assert!(spread(&constants) <= 3.0, "p = {p}: {constants:?}");
    }
}

fn simpson_log(m: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / steps as f64;
    let mut s = m(a.exp()) + m(b.exp());
    for k in 1..steps {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * m((a + h * k as f64).exp());
    }
    s * h / 3.0
}

#[test]
fn square_function_plancherel() {
    let g = Grid::line(4096, 64.0).unwrap();
    let scales = ScaleGrid::log_range(1e-4, 1e3, 449).unwrap();
    for psi in [KernelSpec::poisson_q(), KernelSpec::annulus_bump()] {
        for seed in [3, 4] {
            let f = band_limited_noise(&g, [0.5, 8.0], seed).unwrap();
            let lhs = lp_norm(&g_function(&f, &psi, &scales, 2.0).unwrap(), 2.0).unwrap().powi(2);
            let spec = PreparedSpectrum::new(&f);
            let rhs = spec.weighted_energy(|xi| {
                let r = xi[0].abs();
                if r == 0.0 {
                    return 0.0;
                }
                simpson_log(|t| psi.symbol(&[t * r]).norm_sqr(), 1e-6 / r, 1e6 / r, 4000)
            });
            assert!((lhs / rhs - 1.0).abs() < 5e-3, "{}: {lhs} vs {rhs}", psi.name());
        }
    }
}
