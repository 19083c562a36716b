use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Grid, SampledField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalised in-place DFT along every axis of `grid`.
pub(crate) fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_axis();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    // rows (the fast axis) are contiguous chunks of length n
    fft.process(data);
    if grid.dimension() == 2 {
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut scratch, n);
        fft.process(&mut scratch);
        transpose(&scratch, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// A field's DFT kept in FFT order so that many Fourier multipliers can be
/// applied without re-transforming the input.
#[derive(Debug, Clone)]
pub struct PreparedSpectrum {
    grid: Grid,
    data: Vec<Complex64>,
    frequencies: Vec<[f64; 2]>,
}

impl PreparedSpectrum {
    pub fn new(f: &SampledField) -> Self {
        let grid = *f.grid();
        let mut data = f.values().to_vec();
        transform(&grid, &mut data, false);
        let frequencies = (0..grid.cell_count()).map(|i| grid.fft_frequency(i)).collect();
        PreparedSpectrum {
            grid,
            data,
            frequencies,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Returns the field whose transform is `symbol(xi) * f^(xi)`.
    pub fn apply(&self, symbol: impl Fn(&[f64]) -> Complex64) -> SampledField {
        let d = self.grid.dimension();
        let mut out: Vec<Complex64> = self
            .data
            .iter()
            .zip(&self.frequencies)
            .map(|(&v, xi)| v * symbol(&xi[..d]))
            .collect();
        transform(&self.grid, &mut out, true);
        let norm = 1.0 / self.grid.cell_count() as f64;
        for v in &mut out {
            *v *= norm;
        }
        SampledField::new(self.grid, out).expect("length preserved")
    }

    /// `sum |f^(xi)|^2 m(xi) dxi^n` in continuous-transform units.
    pub fn weighted_energy(&self, multiplier: impl Fn(&[f64]) -> f64) -> f64 {
        let d = self.grid.dimension();
        let h = self.grid.cell_volume();
        let dxi = self.grid.frequency_spacing().powi(d as i32);
        self.data
            .iter()
            .zip(&self.frequencies)
            .map(|(v, xi)| (v * h).norm_sqr() * multiplier(&xi[..d]))
            .sum::<f64>()
            * dxi
    }
}
