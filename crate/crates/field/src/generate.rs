//! Synthetic snapshot sequences: particles scattered uniformly in a
//! cylinder, rotating rigidly about its axis.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::snapshot::{Particle, ParticleSnapshot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderSpec {
    /// m.
    pub radius: f64,
    /// m.
    pub height: f64,
    /// Rotation rate, revolutions per minute.
    pub rpm: f64,
}

impl CylinderSpec {
    /// rad/s.
    pub fn angular_velocity(&self) -> f64 {
        self.rpm * 2.0 * std::f64::consts::PI / 60.0
    }
}

/// Particle layout at t = 0 in polar form, plus a fixed row order.
#[derive(Debug, Clone)]
pub struct RotatingCloud {
    spec: CylinderSpec,
    ids: Vec<u64>,
    radius: Vec<f64>,
    angle: Vec<f64>,
    z: Vec<f64>,
    density: Vec<f64>,
}

impl RotatingCloud {
    /// `n` particles with ids `0..n` written in a seed-dependent shuffled
    /// row order.
    pub fn new(n: usize, spec: CylinderSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<u64> = (0..n as u64).collect();
        ids.shuffle(&mut rng);
        let mut c = Self {
            spec,
            ids,
            radius: Vec::with_capacity(n),
            angle: Vec::with_capacity(n),
            z: Vec::with_capacity(n),
            density: Vec::with_capacity(n),
        };
        for _ in 0..n {
            c.radius.push(spec.radius * rng.gen::<f64>().sqrt());
            c.angle.push(rng.gen::<f64>() * std::f64::consts::TAU);
            c.z.push(rng.gen::<f64>() * spec.height);
            c.density.push(1000.0 + (rng.gen::<f64>() - 0.5));
        }
        c
    }

    pub fn snapshot_at(&self, time: f64) -> ParticleSnapshot {
        let w = self.spec.angular_velocity();
        let particles = (0..self.ids.len())
            .map(|k| {
                let (s, c) = (self.angle[k] + w * time).sin_cos();
                let (x, y) = (self.radius[k] * c, self.radius[k] * s);
                Particle {
                    id: self.ids[k],
                    position: [x, y, self.z[k]],
                    velocity: [-w * y, w * x, 0.0],
                    density: self.density[k],
                }
            })
            .collect();
        ParticleSnapshot { time, particles }
    }
}

/// Times `0, dt, 2 dt, ..., duration`, each computed as `k * dt`.
pub fn snapshot_times(duration: f64, dt: f64) -> Vec<f64> {
    let n = (duration / dt).round() as u64;
    (0..=n).map(|k| k as f64 * dt).collect()
}
