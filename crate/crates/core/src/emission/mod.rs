//! Cooperative emission from a collectively excited ensemble.
//!
//! A single excitation shared by `K` atoms with the phase imprint of the
//! preparation pulses radiates with relative probability
//! `P(k) = |Σⱼ exp(i(k'₀ - k)·rⱼ)|² / K`, normalized so that a lone atom
//! gives 1. At the phase-matched direction `k = k'₀` every term is 1 and
//! `P = K`; elsewhere the random phases average to O(1).

pub mod cloud;
pub mod pattern;
pub mod timing;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use cloud::{sample_cloud, sample_cloud_capped, AtomCloud, Geometry, DEFAULT_DIAMETER_BOUND_UM};
pub use pattern::{background_mean, pattern_scan, peak_half_width, summarize, EmissionPattern, EmissionSummary};

/// Cartesian three-vector (positions in μm, wave vectors in rad/μm).
pub type Vec3<T> = [T; 3];

/// Transition wavelength assumed when none is given (μm).
pub const DEFAULT_WAVELENGTH_UM: f64 = 0.78;

pub fn wavenumber<T: Real>(wavelength_um: T) -> T {
    T::TAU() / wavelength_um
}

pub(crate) fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale<T: Real>(a: &Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn norm<T: Real>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

/// Photon absorbed (+1) or emitted (-1) during a preparation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonExchange {
    Absorbed,
    Emitted,
}

impl PhotonExchange {
    fn sign<T: Real>(self) -> T {
        match self {
            PhotonExchange::Absorbed => T::one(),
            PhotonExchange::Emitted => -T::one(),
        }
    }
}

/// Running record of the wave vectors imprinted on the collective excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVectorLedger<T: Real> {
    entries: Vec<(Vec3<T>, PhotonExchange)>,
    excitation: Vec3<T>,
}

impl<T: Real> Default for WaveVectorLedger<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> WaveVectorLedger<T> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            excitation: [T::zero(); 3],
        }
    }

    pub fn push(&mut self, k: Vec3<T>, exchange: PhotonExchange) -> &mut Self {
        self.entries.push((k, exchange));
        self
    }

    /// Wave vector of the π pulse that lifts the stored atom to the emitting level.
    pub fn set_excitation(&mut self, k_e: Vec3<T>) -> &mut Self {
        self.excitation = k_e;
        self
    }

    pub fn entries(&self) -> &[(Vec3<T>, PhotonExchange)] {
        &self.entries
    }

    /// `k'₀ = Σ δnᵢ kᵢ + k_e`.
    pub fn resultant(&self) -> Result<Vec3<T>> {
        if self.entries.is_empty() {
            return Err(Error::InvalidArgument("wave-vector ledger is empty".into()));
        }
        let mut k = self.excitation;
        for (ki, ex) in &self.entries {
            let s = ex.sign::<T>();
            for (acc, x) in k.iter_mut().zip(ki) {
                *acc = *acc + s * *x;
            }
        }
        Ok(k)
    }
}

/// `|Σⱼ exp(i(k_match - k)·rⱼ)|² / K` with unit dipole matrix element.
pub fn emission_probability<T: Real>(cloud: &AtomCloud<T>, k_match: &Vec3<T>, k: &Vec3<T>) -> T {
    let dk = sub(k_match, k);
    let (mut re, mut im) = (T::zero(), T::zero());
    for r in cloud.positions() {
        let (s, c) = dot(&dk, r).sin_cos();
        re = re + c;
        im = im + s;
    }
    (re * re + im * im) / T::lit(cloud.len() as f64)
}

/// Per-atom value for decay into a distinguishable final level: no collective
/// sum survives, so relative to the phase-matched peak it carries an extra 1/K.
pub fn incoherent_emission<T: Real>(_cloud: &AtomCloud<T>, _k: &Vec3<T>) -> T {
    T::one()
}

/// Blockaded ensemble Rabi frequency `√K Ω`.
pub fn collective_rabi<T: Real>(single_atom_rabi: T, atoms: usize) -> Result<T> {
    if atoms == 0 {
        return Err(Error::InvalidArgument("collective Rabi frequency needs K >= 1".into()));
    }
    Ok(T::lit(atoms as f64).sqrt() * single_atom_rabi)
}
