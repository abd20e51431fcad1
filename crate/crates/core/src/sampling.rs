//! Seeded sampling of points in a metric's domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jets::FiberPoint;
use crate::metrics::Domain;

/// Half-width of the sampling box, as a fraction of the domain radius.
pub const BOX_FRACTION: f64 = 0.6;
/// Box samples farther than this fraction of the radius from the centre are
/// rejected for ball domains (the box corners poke out of the ball for n ≥ 3).
pub const BALL_FRACTION: f64 = 0.75;
/// Fiber components are drawn from `[-Y_BOX, Y_BOX]`.
pub const Y_BOX: f64 = 2.0;
pub const MIN_Y_NORM: f64 = 0.1;

/// Deterministic sampler; the same seed always yields the same points.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn base_point(&mut self, domain: &Domain, n: usize) -> Vec<f64> {
        let radius = domain.radius().unwrap_or(1.0);
        let half = BOX_FRACTION * radius;
        loop {
            let x: Vec<f64> = (0..n).map(|_| self.uniform(-half, half)).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if domain.radius().is_none() || norm <= BALL_FRACTION * radius {
                return x;
            }
        }
    }

    pub fn fiber_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let y: Vec<f64> = (0..n).map(|_| self.uniform(-Y_BOX, Y_BOX)).collect();
            if y.iter().map(|v| v * v).sum::<f64>().sqrt() >= MIN_Y_NORM {
                return y;
            }
        }
    }

    pub fn fiber_point(&mut self, domain: &Domain, n: usize) -> FiberPoint {
        let x = self.base_point(domain, n);
        let y = self.fiber_vector(n);
        FiberPoint { x, y }
    }

    /// `count` points, drawn in sequence.
    pub fn fiber_points(&mut self, domain: &Domain, n: usize, count: usize) -> Vec<FiberPoint> {
        (0..count).map(|_| self.fiber_point(domain, n)).collect()
    }
}
