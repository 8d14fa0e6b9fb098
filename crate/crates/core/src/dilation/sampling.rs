//! Deterministic low-discrepancy sampling of map domains.
//!
//! Halton sequences with a seed-derived Cranley-Patterson rotation per
//! dimension: reproducible, nestable (a longer run extends a shorter one
//! sample for sample), and uniform on spheres through the inverse-normal
//! transform.

use crate::space::{Point, Space};

const PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seeded Halton sampler over a [`Space`].
#[derive(Debug, Clone)]
pub struct DomainSampler {
    space: Space,
    rotations: Vec<f64>,
}

impl DomainSampler {
    pub fn new(space: Space, seed: u64) -> DomainSampler {
        let dims = space.uniforms_needed();
        assert!(dims <= PRIMES.len(), "domain dimension too large to sample");
        let rotations = (0..dims)
            .map(|j| {
                let bits = splitmix64(seed ^ splitmix64(j as u64 + 1));
                bits as f64 / u64::MAX as f64
            })
            .collect();
        DomainSampler { space, rotations }
    }

    /// The `index`-th sample (deterministic; independent of all others).
    pub fn sample(&self, index: u64) -> Option<Point> {
        let u: Vec<f64> = self
            .rotations
            .iter()
            .enumerate()
            .map(|(j, rot)| {
                let v = radical_inverse(index + 1, PRIMES[j]) + rot;
                v - v.floor()
            })
            .collect();
        self.space.point_from_uniforms(&u)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }
}
