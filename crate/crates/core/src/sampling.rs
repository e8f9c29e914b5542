//! Deterministic sampling plans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, PointSet, Scalar};
use crate::error::{KernelError, Result};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // π (3 - √5)

/// Vogel spiral: `n` low-discrepancy points in `|z| <= radius`, the outermost
/// near the rim. `rotation` turns the whole pattern.
pub fn disk_spiral(n: usize, radius: f64, rotation: f64, domain: Domain) -> Result<PointSet> {
    if n == 0 {
        return Err(KernelError::EmptyPointSet);
    }
    PointSet::from_values(
        (0..n).map(|k| {
            let r = radius * ((k as f64 + 0.5) / n as f64).sqrt();
            Scalar::from_polar(r, k as f64 * GOLDEN_ANGLE + rotation)
        }),
        domain,
    )
}

/// Uniform random points in `|z| < radius`.
pub fn disk_random(n: usize, radius: f64, seed: u64, domain: Domain) -> Result<PointSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let r = radius * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let z = Scalar::from_polar(r, theta);
        if !values.contains(&z) {
            values.push(z);
        }
    }
    PointSet::from_values(values, domain)
}

/// Cell midpoints of `n` equal subintervals of `[a, b]`.
pub fn interval_midpoints(n: usize, a: f64, b: f64, domain: Domain) -> Result<PointSet> {
    if n == 0 {
        return Err(KernelError::EmptyPointSet);
    }
    PointSet::from_reals(
        (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64),
        domain,
    )
}

/// Uniform random reals in `(a, b)`.
pub fn interval_random(n: usize, a: f64, b: f64, seed: u64, domain: Domain) -> Result<PointSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    while values.len() < n {
        let x = a + (b - a) * rng.random::<f64>();
        if x > a && !values.contains(&x) {
            values.push(x);
        }
    }
    PointSet::from_reals(values, domain)
}

/// `k / 3^level` for `k = 0..=3^level` on the closed unit interval.
pub fn triadic(level: u32) -> Result<PointSet> {
    let den = 3f64.powi(level as i32);
    PointSet::from_reals(
        (0..=3u64.pow(level)).map(|k| k as f64 / den),
        Domain::UnitInterval,
    )
}
