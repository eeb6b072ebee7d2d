//! Seeded uniform sampling inside a chart's box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{APoint, Chart, JetPoint, PhasePoint, VStarPoint};

/// Deterministic sampler; the same seed gives the same points on every
/// platform.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    pub fn in_box(&mut self, bounds: &[(f64, f64)]) -> Vec<f64> {
        bounds.iter().map(|&(lo, hi)| self.uniform(lo, hi)).collect()
    }

    pub fn base_point(&mut self, chart: &Chart) -> Vec<f64> {
        self.in_box(chart.base_box())
    }

    pub fn base_points(&mut self, chart: &Chart, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.base_point(chart)).collect()
    }

    pub fn a_point(&mut self, chart: &Chart) -> APoint {
        APoint { x: self.in_box(chart.base_box()), y: self.in_box(chart.fibre_box()) }
    }

    pub fn vstar_point(&mut self, chart: &Chart) -> VStarPoint {
        VStarPoint { x: self.in_box(chart.base_box()), p: self.in_box(chart.momentum_box()) }
    }

    pub fn jet_point(&mut self, chart: &Chart) -> JetPoint {
        JetPoint {
            x: self.in_box(chart.base_box()),
            y: self.in_box(chart.fibre_box()),
            z: self.in_box(chart.fibre_box()),
            v: self.in_box(chart.fibre_box()),
        }
    }

    pub fn phase_point(&mut self, chart: &Chart) -> PhasePoint {
        PhasePoint {
            x: self.in_box(chart.base_box()),
            p: self.in_box(chart.momentum_box()),
            z: self.in_box(chart.fibre_box()),
            w: self.in_box(chart.momentum_box()),
        }
    }
}
