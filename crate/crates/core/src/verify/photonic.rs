//! Photonic-only views of a joint state and pure photonic targets.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{EnsembleState, Letter};

type Row<T> = BTreeMap<Vec<Letter>, Complex<T>>;

/// Weighted pure branches; a pure state is `[(1, &state)]`.
pub type Branches<'a, T> = [(T, &'a EnsembleState<T>)];

/// Amplitudes over a subset of modes, one unnormalized vector per
/// environment (atomic occupations plus the letters of the other modes).
/// `Σ_env |v_env⟩⟨v_env|` is the reduced density matrix of the pure state.
pub(crate) type Components<T> = Vec<BTreeMap<Vec<Letter>, Complex<T>>>;

pub(crate) fn components<T: Real>(state: &EnsembleState<T>, modes: &[usize]) -> Result<Components<T>> {
    for &m in modes {
        if m >= state.mode_count() {
            return Err(Error::InvalidArgument(format!(
                "mode {} does not exist ({} modes)",
                m + 1,
                state.mode_count()
            )));
        }
    }
    let mut grouped: BTreeMap<(u64, Vec<Letter>), Row<T>> = BTreeMap::new();
    for (c, a) in state.iter() {
        let kept: Vec<Letter> = modes.iter().map(|&m| c.letter(m)).collect();
        let env: Vec<Letter> = (0..state.mode_count())
            .filter(|m| !modes.contains(m))
            .map(|m| c.letter(m))
            .collect();
        let slot = grouped
            .entry((c.occupation_bits(), env))
            .or_default()
            .entry(kept)
            .or_insert_with(Complex::zero);
        *slot = *slot + *a;
    }
    Ok(grouped.into_values().collect())
}

/// Pure state of the photonic modes alone.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState<T: Real> {
    mode_count: usize,
    amplitudes: BTreeMap<Vec<Letter>, Complex<T>>,
}

impl<T: Real> PhotonicState<T> {
    /// Requires unit norm (within the precision's default tolerance).
    pub fn new(mode_count: usize, amplitudes: BTreeMap<Vec<Letter>, Complex<T>>) -> Result<Self> {
        if amplitudes.keys().any(|k| k.len() != mode_count) {
            return Err(Error::ShapeMismatch(format!("letter patterns must have {mode_count} modes")));
        }
        let norm: T = amplitudes.values().map(|a| a.norm_sqr()).sum();
        if (norm - T::one()).abs() > T::lit(1e3) * T::default_tolerance() {
            return Err(Error::InvalidArgument(format!("target state has norm {norm}")));
        }
        Ok(Self { mode_count, amplitudes })
    }

    /// `(|R…R⟩ + |V…V⟩)/√2`, photon = `R` in number encoding.
    pub fn ghz(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("GHZ target needs at least one mode".into()));
        }
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new(
            modes,
            BTreeMap::from([(vec![Letter::R; modes], h), (vec![Letter::Vac; modes], h)]),
        )
    }

    /// `(|RL⟩ - |LR⟩)/√2`.
    pub fn bell_psi_minus() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::new(
            2,
            BTreeMap::from([
                (vec![Letter::R, Letter::L], Complex::new(h, T::zero())),
                (vec![Letter::L, Letter::R], Complex::new(-h, T::zero())),
            ]),
        )
        .expect("normalized")
    }

    /// Pure product state of one letter per mode.
    pub fn product(letters: Vec<Letter>) -> Self {
        let n = letters.len();
        Self::new(n, BTreeMap::from([(letters, Complex::new(T::one(), T::zero()))])).expect("normalized")
    }

    /// Dense qubit vector (mode 0 is the most significant bit) with logical 0 ↦ `zero`, 1 ↦ `one`.
    pub fn from_qubits(amplitudes: &[Complex<T>], zero: Letter, one: Letter) -> Result<Self> {
        let n = amplitudes.len().trailing_zeros() as usize;
        if amplitudes.len() != 1 << n {
            return Err(Error::InvalidArgument("dense vector length must be a power of two".into()));
        }
        let mut map = BTreeMap::new();
        for (idx, a) in amplitudes.iter().enumerate() {
            if a.norm() == T::zero() {
                continue;
            }
            let letters = (0..n)
                .map(|m| if idx >> (n - 1 - m) & 1 == 0 { zero } else { one })
                .collect();
            map.insert(letters, *a);
        }
        Self::new(n, map)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<Letter>, Complex<T>> {
        &self.amplitudes
    }

    /// ⟨self|v⟩ for a component vector over the same modes.
    pub(crate) fn overlap(&self, v: &BTreeMap<Vec<Letter>, Complex<T>>) -> Complex<T> {
        let mut acc = Complex::zero();
        for (k, t) in &self.amplitudes {
            if let Some(a) = v.get(k) {
                acc = acc + t.conj() * a;
            }
        }
        acc
    }
}

/// `Σ_b w_b ⟨target|ρ_b|target⟩` over the photonic modes, tracing out the
/// atomic register. For one pure branch with the register in a definite
/// configuration this is `|⟨target|ψ⟩|²`.
pub fn fidelity<T: Real>(branches: &Branches<'_, T>, target: &PhotonicState<T>) -> Result<T> {
    let mut total = T::zero();
    for (w, state) in branches {
        if state.mode_count() != target.mode_count() {
            return Err(Error::InvalidArgument(format!(
                "state has {} modes, target has {}",
                state.mode_count(),
                target.mode_count()
            )));
        }
        let all: Vec<usize> = (0..state.mode_count()).collect();
        let norm = state.norm();
        for v in components(state, &all)? {
            total = total + *w * target.overlap(&v).norm_sqr() / norm;
        }
    }
    Ok(total)
}

/// Letter-pattern statistics of a number-encoded GHZ candidate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GhzCorrelations {
    pub all_photon: f64,
    pub all_vacuum: f64,
    pub mixed: f64,
}

/// Weight on all-photon, all-vacuum and every other letter pattern.
pub fn ghz_correlation_check<T: Real>(branches: &Branches<'_, T>, modes: usize) -> Result<GhzCorrelations> {
    let (mut photon, mut vac, mut other) = (T::zero(), T::zero(), T::zero());
    for (w, state) in branches {
        if state.mode_count() != modes {
            return Err(Error::InvalidArgument(format!(
                "state has {} modes, expected {modes}",
                state.mode_count()
            )));
        }
        let norm = state.norm();
        for (c, a) in state.iter() {
            let p = *w * a.norm_sqr() / norm;
            let letters = c.letters();
            if letters.iter().all(|l| *l == Letter::R) {
                photon = photon + p;
            } else if letters.iter().all(|l| *l == Letter::Vac) {
                vac = vac + p;
            } else {
                other = other + p;
            }
        }
    }
    Ok(GhzCorrelations {
        all_photon: photon.as_f64(),
        all_vacuum: vac.as_f64(),
        mixed: other.as_f64(),
    })
}
