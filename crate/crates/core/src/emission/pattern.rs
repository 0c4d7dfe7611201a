//! Angular scans of the emission probability on the shell `|k| = const`.

use rand::Rng;
use serde::Serialize;

use super::{dot, emission_probability, norm, scale, AtomCloud, Vec3};
use crate::error::{Error, Result};
use crate::pulse::seeded_rng;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSample<T: Real> {
    /// Polar angle from +z (rad).
    pub theta: T,
    /// Azimuth from +x (rad).
    pub phi: T,
    pub direction: Vec3<T>,
    /// Relative to a single atom (peak value K).
    pub probability: T,
}

/// Emission probability sampled on a (θ, φ) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionPattern<T: Real> {
    pub samples: Vec<PatternSample<T>>,
}

impl<T: Real> EmissionPattern<T> {
    /// First sample with the largest probability.
    pub fn peak(&self) -> &PatternSample<T> {
        let mut best = &self.samples[0];
        for s in &self.samples[1..] {
            if s.probability > best.probability {
                best = s;
            }
        }
        best
    }

    /// `theta,phi,probability` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,phi,probability\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.theta.as_f64(), s.phi.as_f64(), s.probability.as_f64()));
        }
        out
    }
}

fn direction<T: Real>(theta: T, phi: T) -> Vec3<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Scans `points_per_circle` azimuths and `points_per_circle/2 + 1` polar
/// angles (both poles included) at fixed `|k| = k_magnitude`.
pub fn pattern_scan<T: Real>(
    cloud: &AtomCloud<T>,
    k_match: &Vec3<T>,
    k_magnitude: T,
    points_per_circle: usize,
) -> Result<EmissionPattern<T>> {
    if points_per_circle < 8 || !points_per_circle.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "grid needs an even number >= 8 of points per great circle, got {points_per_circle}"
        )));
    }
    let step = T::TAU() / T::lit(points_per_circle as f64);
    let mut samples = Vec::with_capacity((points_per_circle / 2 + 1) * points_per_circle);
    for i in 0..=points_per_circle / 2 {
        let theta = step * T::lit(i as f64);
        for j in 0..points_per_circle {
            let phi = step * T::lit(j as f64);
            let dir = direction(theta, phi);
            let probability = emission_probability(cloud, k_match, &scale(&dir, k_magnitude));
            samples.push(PatternSample {
                theta,
                phi,
                direction: dir,
                probability,
            });
        }
    }
    Ok(EmissionPattern { samples })
}

/// Mean probability over `directions` uniformly random directions further than
/// `exclusion_rad` from `k_match`.
pub fn background_mean<T: Real>(
    cloud: &AtomCloud<T>,
    k_match: &Vec3<T>,
    k_magnitude: T,
    directions: usize,
    exclusion_rad: T,
    seed: u64,
) -> Result<T> {
    if directions == 0 {
        return Err(Error::InvalidArgument("background needs at least one direction".into()));
    }
    let axis = unit(k_match)?;
    let cos_cut = exclusion_rad.cos();
    let mut rng = seeded_rng(seed);
    let mut total = T::zero();
    let mut taken = 0usize;
    while taken < directions {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let dir = [T::lit(rho * phi.cos()), T::lit(rho * phi.sin()), T::lit(z)];
        if dot(&dir, &axis) >= cos_cut {
            continue;
        }
        total = total + emission_probability(cloud, k_match, &scale(&dir, k_magnitude));
        taken += 1;
    }
    Ok(total / T::lit(directions as f64))
}

fn unit<T: Real>(v: &Vec3<T>) -> Result<Vec3<T>> {
    let n = norm(v);
    if n <= T::zero() {
        return Err(Error::InvalidArgument("phase-matched wave vector is zero".into()));
    }
    Ok(scale(v, T::one() / n))
}

/// Two unit vectors completing `axis` to an orthonormal frame.
fn perpendicular_frame<T: Real>(axis: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let helper = if axis[0].abs() < T::lit(0.9) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let proj = dot(&helper, axis);
    let u = [helper[0] - proj * axis[0], helper[1] - proj * axis[1], helper[2] - proj * axis[2]];
    let u = scale(&u, T::one() / norm(&u));
    let v = [
        axis[1] * u[2] - axis[2] * u[1],
        axis[2] * u[0] - axis[0] * u[2],
        axis[0] * u[1] - axis[1] * u[0],
    ];
    (u, v)
}

/// Angular half width at half maximum of the phase-matched lobe (rad),
/// averaged over four azimuths, stepping outward by `step_rad` and
/// interpolating linearly at the crossing. The shell radius is `|k_match|`.
pub fn peak_half_width<T: Real>(cloud: &AtomCloud<T>, k_match: &Vec3<T>, step_rad: T) -> Result<T> {
    let axis = unit(k_match)?;
    let kmag = norm(k_match);
    let (u, v) = perpendicular_frame(&axis);
    let peak = emission_probability(cloud, k_match, k_match);
    let half = peak / T::lit(2.0);
    let azimuths = [(u, T::one()), (u, -T::one()), (v, T::one()), (v, -T::one())];
    let mut sum = T::zero();
    for (perp, sign) in azimuths {
        let at = |alpha: T| {
            let (s, c) = alpha.sin_cos();
            let dir = [
                c * axis[0] + sign * s * perp[0],
                c * axis[1] + sign * s * perp[1],
                c * axis[2] + sign * s * perp[2],
            ];
            emission_probability(cloud, k_match, &scale(&dir, kmag))
        };
        let mut prev_alpha = T::zero();
        let mut prev = peak;
        let mut alpha = step_rad;
        let width = loop {
            if alpha > T::PI() {
                break T::PI();
            }
            let p = at(alpha);
            if p < half {
                break prev_alpha + (alpha - prev_alpha) * (prev - half) / (prev - p);
            }
            prev_alpha = alpha;
            prev = p;
            alpha = alpha + step_rad;
        };
        sum = sum + width;
    }
    Ok(sum / T::lit(4.0))
}

/// Headline numbers of one emission scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionSummary {
    pub atoms: usize,
    pub peak_direction: [f64; 3],
    pub peak_theta: f64,
    pub peak_phi: f64,
    pub peak_value: f64,
    pub background_mean: f64,
    pub peak_to_background: f64,
}

/// Summarizes a scan together with a Monte Carlo background estimate.
pub fn summarize<T: Real>(cloud: &AtomCloud<T>, pattern: &EmissionPattern<T>, background: T) -> EmissionSummary {
    let peak = pattern.peak();
    EmissionSummary {
        atoms: cloud.len(),
        peak_direction: [peak.direction[0].as_f64(), peak.direction[1].as_f64(), peak.direction[2].as_f64()],
        peak_theta: peak.theta.as_f64(),
        peak_phi: peak.phi.as_f64(),
        peak_value: peak.probability.as_f64(),
        background_mean: background.as_f64(),
        peak_to_background: (peak.probability / background).as_f64(),
    }
}
