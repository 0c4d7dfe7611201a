//! Atom positions inside the blockade volume.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{norm, sub, Vec3};
use crate::error::{Error, Result};
use crate::pulse::seeded_rng;
use crate::scalar::Real;

/// Blockade diameter: no two atoms further apart than this (μm).
pub const DEFAULT_DIAMETER_BOUND_UM: f64 = 10.0;

/// `K ≥ 1` atom positions in μm with bounded pairwise separation.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomCloud<T: Real> {
    positions: Vec<Vec3<T>>,
}

impl<T: Real> AtomCloud<T> {
    /// Rejects empty clouds and clouds whose diameter exceeds `diameter_bound`.
    pub fn new(positions: Vec<Vec3<T>>, diameter_bound: T) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("atom cloud needs at least one atom".into()));
        }
        let cloud = Self { positions };
        let d = cloud.max_pairwise_distance();
        if d > diameter_bound {
            return Err(Error::InvalidArgument(format!(
                "cloud diameter {d} μm exceeds bound {diameter_bound} μm"
            )));
        }
        Ok(cloud)
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn max_pairwise_distance(&self) -> T {
        let mut best = T::zero();
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.max(norm(&sub(a, b)));
            }
        }
        best
    }

    /// `x,y,z` CSV in μm.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for p in &self.positions {
            out.push_str(&format!("{},{},{}\n", p[0].as_f64(), p[1].as_f64(), p[2].as_f64()));
        }
        out
    }
}

/// Spatial distribution of sampled clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Uniform density inside a ball of the given diameter.
    UniformBall,
    /// Isotropic Gaussian with σ = diameter/4, truncated to the ball by rejection.
    Gaussian,
}

/// Seeded cloud with the default 10 μm diameter cap.
pub fn sample_cloud<T: Real>(atoms: usize, geometry: Geometry, diameter_um: f64, seed: u64) -> Result<AtomCloud<T>> {
    sample_cloud_capped(atoms, geometry, diameter_um, DEFAULT_DIAMETER_BOUND_UM, seed)
}

pub fn sample_cloud_capped<T: Real>(
    atoms: usize,
    geometry: Geometry,
    diameter_um: f64,
    cap_um: f64,
    seed: u64,
) -> Result<AtomCloud<T>> {
    if atoms == 0 {
        return Err(Error::InvalidArgument("atom count must be positive".into()));
    }
    if !(diameter_um.is_finite() && diameter_um > 0.0) {
        return Err(Error::InvalidArgument(format!("diameter must be positive, got {diameter_um}")));
    }
    if diameter_um > cap_um {
        return Err(Error::InvalidArgument(format!(
            "diameter {diameter_um} μm exceeds the {cap_um} μm blockade cap"
        )));
    }
    let radius = diameter_um / 2.0;
    let sigma = diameter_um / 4.0;
    let mut rng = seeded_rng(seed);
    let mut positions = Vec::with_capacity(atoms);
    while positions.len() < atoms {
        let p: [f64; 3] = match geometry {
            Geometry::UniformBall => [
                rng.random_range(-radius..=radius),
                rng.random_range(-radius..=radius),
                rng.random_range(-radius..=radius),
            ],
            Geometry::Gaussian => [
                sigma * rng.sample::<f64, _>(StandardNormal),
                sigma * rng.sample::<f64, _>(StandardNormal),
                sigma * rng.sample::<f64, _>(StandardNormal),
            ],
        };
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            positions.push([T::lit(p[0]), T::lit(p[1]), T::lit(p[2])]);
        }
    }
    // rounding to T can push a pair a hair past the diameter
    let slack = T::lit(diameter_um) * (T::one() + T::epsilon() * T::lit(16.0));
    AtomCloud::new(positions, slack)
}
