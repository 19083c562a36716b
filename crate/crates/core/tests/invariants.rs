use lplab_core::field::{lp_norm, to_spectrum, Grid, SampledField, ScaleGrid};
use lplab_core::kernel::KernelSpec;
use lplab_core::maximal::{hl_max, peetre_max, PeetreParams};
use lplab_core::transforms::g_function;
use num_complex::Complex64;
use proptest::prelude::*;

fn line() -> Grid {
    Grid::line(64, 4.0).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, 64)
}

fn field(v: &[f64]) -> SampledField {
    SampledField::from_real(line(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn peetre_dominates_and_decreases(v in samples(), n in 0.5f64..4.0, r in 0.1f64..4.0) {
        let f = field(&v);
        let base = peetre_max(&f, PeetreParams::new(n, r).unwrap()).moduli();
        let more_n = peetre_max(&f, PeetreParams::new(n + 1.0, r).unwrap()).moduli();
        let more_r = peetre_max(&f, PeetreParams::new(n, 2.0 * r).unwrap()).moduli();
        for i in 0..v.len() {
            prop_assert!(base[i] >= v[i].abs());
            prop_assert!(more_n[i] <= base[i]);
            prop_assert!(more_r[i] <= base[i]);
        }
    }

    #[test]
    fn hl_max_is_monotone(v in samples(), bump in prop::collection::vec(0.0f64..2.0, 64)) {
        let small = hl_max(&field(&v)).moduli();
        let larger: Vec<f64> = v.iter().zip(&bump).map(|(a, b)| a.abs() + b).collect();
        let big = hl_max(&field(&larger)).moduli();
        for i in 0..v.len() {
            prop_assert!(small[i] >= v[i].abs() - 1e-12);
            prop_assert!(big[i] >= small[i] - 1e-12);
        }
    }

    #[test]
    fn parseval(v in samples(), w in samples()) {
        let f = SampledField::new(
            line(),
            v.iter().zip(&w).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        ).unwrap();
        let lhs = lp_norm(&f, 2.0).unwrap();
        let rhs = to_spectrum(&f).l2_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1.0));
    }

    #[test]
    fn lp_norm_homogeneous_and_translation_invariant(v in samples(), c in -5.0f64..5.0, s in -63isize..63, p in 0.5f64..4.0) {
        let f = field(&v);
        let base = lp_norm(&f, p).unwrap();
        let scaled = lp_norm(&f.scaled(Complex64::new(c, 0.0)), p).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-10 * base.max(1.0));
        let moved = lp_norm(&f.shifted([s, 0]), p).unwrap();
        prop_assert!((moved - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn g_function_commutes_with_translation(v in samples(), s in -63isize..63) {
        let f = field(&v);
        let scales = ScaleGrid::log_range(0.05, 4.0, 12).unwrap();
        let psi = KernelSpec::poisson_q();
        let a = g_function(&f.shifted([s, 0]), &psi, &scales, 2.0).unwrap().moduli();
        let b = g_function(&f, &psi, &scales, 2.0).unwrap().shifted([s, 0]).moduli();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * y.max(1.0));
        }
    }
}
