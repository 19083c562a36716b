//! Structured test families: shapes at several dilations and translates.

use std::f64::consts::PI;

use lplab_core::field::{Grid, SampledField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{FamilySpec, Shape};

const NOISE_WAVES: usize = 12;
const NOISE_WINDOW: f64 = 3.0;
const MODULATION: f64 = 2.0;

/// One plane wave `a cos(2 pi xi.x + phase)` of the noise shape.
#[derive(Debug, Clone, Copy)]
struct Wave {
    amplitude: f64,
    xi: [f64; 2],
    phase: f64,
}

/// A base profile `f_0`; members are `f_0(lambda x)` shifted by whole cells.
#[derive(Debug, Clone)]
pub struct Profile {
    shape: Shape,
    dimension: usize,
    waves: Vec<Wave>,
    /// Constant removed under the noise window so the profile has mean zero.
    offset: f64,
}

impl Profile {
    pub fn new(shape: Shape, dimension: usize, seed: u64) -> Self {
        let mut waves = Vec::new();
        let mut offset = 0.0;
        if shape == Shape::BandNoise {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..NOISE_WAVES {
                let r = rng.gen_range(0.5..2.0);
                let angle = if dimension == 1 {
                    if rng.gen_bool(0.5) { 0.0 } else { PI }
                } else {
                    rng.gen_range(0.0..2.0 * PI)
                };
                waves.push(Wave {
                    amplitude: rng.gen_range(0.5..1.0),
                    xi: [r * angle.cos(), r * angle.sin()],
                    phase: rng.gen_range(0.0..2.0 * PI),
                });
            }
            // int cos(2 pi xi.x + c) exp(-pi |x|^2 / s^2) dx = s^n exp(-pi s^2 |xi|^2) cos c
            let s2 = NOISE_WINDOW * NOISE_WINDOW;
            offset = waves
                .iter()
                .map(|w| w.amplitude * (-PI * s2 * (w.xi[0].powi(2) + w.xi[1].powi(2))).exp() * w.phase.cos())
                .sum();
        }
        Profile {
            shape,
            dimension,
            waves,
            offset,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.shape {
            Shape::GaussianDerivative => -2.0 * PI * x[0] * (-PI * r2).exp(),
            Shape::ModulatedGaussian => (-PI * r2).exp() * (2.0 * PI * MODULATION * x[0]).sin(),
            Shape::BandNoise => {
                let n: f64 = self
                    .waves
                    .iter()
                    .map(|w| {
                        let dot: f64 = (0..self.dimension).map(|k| w.xi[k] * x[k]).sum();
                        w.amplitude * (2.0 * PI * dot + w.phase).cos()
                    })
                    .sum();
                (n - self.offset) * (-PI * r2 / (NOISE_WINDOW * NOISE_WINDOW)).exp()
            }
        }
    }

    /// Samples of `f_0(lambda x)` moved by `translate` cells along every axis.
    pub fn sample(&self, g: &Grid, lambda: f64, translate: isize) -> SampledField {
        let d = g.dimension();
        let f = SampledField::from_real_fn(*g, |x| {
            let mut y = [0.0; 2];
            for k in 0..d {
                y[k] = lambda * x[k];
            }
            self.eval(&y[..d])
        });
        if translate == 0 {
            f
        } else {
            let shift = if d == 1 { [translate, 0] } else { [translate, translate] };
            f.shifted(shift)
        }
    }
}

/// One family member before translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub shape: Shape,
    pub lambda: f64,
}

/// Shape-major list of members with the profile each one uses.
pub fn members(spec: &FamilySpec, dimension: usize) -> Vec<(Member, Profile)> {
    let mut out = Vec::new();
    for (i, &shape) in spec.shapes.iter().enumerate() {
        let profile = Profile::new(shape, dimension, spec.seed.wrapping_add(i as u64));
        for &lambda in &spec.dilations {
            out.push((Member { shape, lambda }, profile.clone()));
        }
    }
    out
}

/// Translates evaluated per member; the first one is the reported member.
pub fn translates(spec: &FamilySpec) -> Vec<isize> {
    if spec.translates.is_empty() {
        vec![0]
    } else {
        spec.translates.clone()
    }
}
