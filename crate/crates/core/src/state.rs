//! Sparse joint wavefunction of the atomic register and the emitted photonic modes.
//!
//! A basis label ([`Configuration`]) is the occupation bitstring of the encoded
//! atomic levels `1..=N` (each level holds zero or one atom, the rest of the
//! ensemble sits in the reservoir) together with one [`Letter`] per emitted
//! mode. Number-encoded modes use `Vac`/`R` (`R` meaning "one photon"),
//! polarization-encoded modes use `R`/`L`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest register supported by the bitmask encoding.
pub const MAX_LEVELS: usize = 64;

/// Content of one emitted photonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Vac,
    R,
    L,
}

impl Letter {
    pub const ALL: [Letter; 3] = [Letter::Vac, Letter::R, Letter::L];

    pub fn symbol(self) -> char {
        match self {
            Letter::Vac => 'V',
            Letter::R => 'R',
            Letter::L => 'L',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'V' => Some(Letter::Vac),
            'R' => Some(Letter::R),
            'L' => Some(Letter::L),
            _ => None,
        }
    }

    pub fn is_photon(self) -> bool {
        self != Letter::Vac
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Basis label: atomic occupations plus emitted mode letters.
///
/// Textual form is `"1010|RL"`: level 1 first, then `|`, then modes in emission order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    levels: u8,
    occupations: u64,
    letters: Vec<Letter>,
}

impl Configuration {
    /// All levels empty, no modes.
    pub fn vacuum(levels: usize) -> Result<Self> {
        check_level_count(levels)?;
        Ok(Self {
            levels: levels as u8,
            occupations: 0,
            letters: Vec::new(),
        })
    }

    /// Builds a configuration from an explicit occupation list (`occupations[0]` is level 1).
    pub fn new(occupations: &[bool], letters: Vec<Letter>) -> Result<Self> {
        check_level_count(occupations.len())?;
        let bits = occupations
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &o)| if o { acc | (1 << i) } else { acc });
        Ok(Self {
            levels: occupations.len() as u8,
            occupations: bits,
            letters,
        })
    }

    pub fn level_count(&self) -> usize {
        self.levels as usize
    }

    pub fn mode_count(&self) -> usize {
        self.letters.len()
    }

    /// Occupation of a 1-based level.
    pub fn occupied(&self, level: u8) -> bool {
        debug_assert!(level >= 1 && level <= self.levels);
        self.occupations & (1 << (level - 1)) != 0
    }

    pub(crate) fn set(&mut self, level: u8, value: bool) {
        let bit = 1u64 << (level - 1);
        if value {
            self.occupations |= bit;
        } else {
            self.occupations &= !bit;
        }
    }

    pub(crate) fn with(&self, level: u8, value: bool) -> Self {
        let mut c = self.clone();
        c.set(level, value);
        c
    }

    pub(crate) fn push_letter(&mut self, letter: Letter) {
        self.letters.push(letter);
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn letter(&self, mode: usize) -> Letter {
        self.letters[mode]
    }

    /// Number of non-vacuum letters.
    pub fn photon_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_photon()).count()
    }

    pub fn atomic_vacuum(&self) -> bool {
        self.occupations == 0
    }

    /// Occupation bitmask, bit `j-1` for level `j`.
    pub fn occupation_bits(&self) -> u64 {
        self.occupations
    }
}

fn check_level_count(levels: usize) -> Result<()> {
    if levels == 0 || levels > MAX_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "level count must be in 1..={MAX_LEVELS}, got {levels}"
        )));
    }
    Ok(())
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for level in 1..=self.levels {
            write!(f, "{}", if self.occupied(level) { '1' } else { '0' })?;
        }
        f.write_str("|")?;
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed configuration label {s:?}"));
        let (occ, modes) = s.split_once('|').ok_or_else(bad)?;
        let occupations = occ
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        let letters = modes
            .chars()
            .map(|c| Letter::from_symbol(c).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(&occupations, letters)
    }
}

/// Sparse amplitude map over configurations sharing one level and mode count.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState<T: Real> {
    levels: usize,
    modes: usize,
    prune: T,
    amplitudes: BTreeMap<Configuration, Complex<T>>,
}

impl<T: Real> EnsembleState<T> {
    /// Every atom in the reservoir, no modes emitted.
    pub fn new(level_count: usize) -> Result<Self> {
        let vacuum = Configuration::vacuum(level_count)?;
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vacuum, Complex::new(T::one(), T::zero()));
        Ok(Self {
            levels: level_count,
            modes: 0,
            prune: T::default_prune(),
            amplitudes,
        })
    }

    /// Builds a state from explicit amplitudes. Entries for the same
    /// configuration are summed; the result is not renormalized.
    pub fn from_amplitudes<I>(level_count: usize, mode_count: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Configuration, Complex<T>)>,
    {
        check_level_count(level_count)?;
        let mut out = Self {
            levels: level_count,
            modes: mode_count,
            prune: T::default_prune(),
            amplitudes: BTreeMap::new(),
        };
        for (c, a) in entries {
            if c.level_count() != level_count || c.mode_count() != mode_count {
                return Err(Error::ShapeMismatch(format!(
                    "configuration {c} does not have {level_count} levels and {mode_count} modes"
                )));
            }
            out.accumulate(c, a);
        }
        out.prune_small();
        Ok(out)
    }

    /// Replaces the prune threshold (applied from the next operation on).
    pub fn with_prune_threshold(mut self, threshold: T) -> Self {
        self.prune = threshold;
        self.prune_small();
        self
    }

    pub fn prune_threshold(&self) -> T {
        self.prune
    }

    pub fn level_count(&self) -> usize {
        self.levels
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, config: &Configuration) -> Complex<T> {
        self.amplitudes.get(config).copied().unwrap_or_else(Complex::zero)
    }

    /// Support in canonical (sorted) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Complex<T>)> {
        self.amplitudes.iter()
    }

    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        self.amplitudes.keys()
    }

    /// Σ|a|².
    pub fn norm(&self) -> T {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ over the configuration basis.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.check_shape(other)?;
        let mut acc = Complex::zero();
        for (c, a) in &self.amplitudes {
            if let Some(b) = other.amplitudes.get(c) {
                acc = acc + a.conj() * b;
            }
        }
        Ok(acc)
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if self.levels != other.levels || self.modes != other.modes {
            return Err(Error::ShapeMismatch(format!(
                "({} levels, {} modes) vs ({} levels, {} modes)",
                self.levels, self.modes, other.levels, other.modes
            )));
        }
        Ok(())
    }

    /// Multiplies every amplitude by `factor` (no renormalization).
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        self.map_amplitudes(|_, a| a * factor)
    }

    /// Rescales to unit norm. A zero state is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n <= T::zero() {
            return self.clone();
        }
        let s = Complex::new(T::one() / n.sqrt(), T::zero());
        self.scaled(s)
    }

    /// Keeps the support entries accepted by `keep`.
    pub(crate) fn filtered(&self, mut keep: impl FnMut(&Configuration) -> bool) -> Self {
        let mut out = self.empty_like(self.modes);
        for (c, a) in &self.amplitudes {
            if keep(c) {
                out.amplitudes.insert(c.clone(), *a);
            }
        }
        out
    }

    pub(crate) fn map_amplitudes(&self, mut f: impl FnMut(&Configuration, Complex<T>) -> Complex<T>) -> Self {
        let mut out = self.empty_like(self.modes);
        for (c, a) in &self.amplitudes {
            out.accumulate(c.clone(), f(c, *a));
        }
        out.prune_small();
        out
    }

    /// Empty map with this state's shape and prune threshold.
    pub(crate) fn empty_like(&self, modes: usize) -> Self {
        Self {
            levels: self.levels,
            modes,
            prune: self.prune,
            amplitudes: BTreeMap::new(),
        }
    }

    pub(crate) fn accumulate(&mut self, config: Configuration, amp: Complex<T>) {
        let slot = self.amplitudes.entry(config).or_insert_with(Complex::zero);
        *slot = *slot + amp;
    }

    pub(crate) fn prune_small(&mut self) {
        let p = self.prune;
        self.amplitudes.retain(|_, a| a.norm() >= p);
    }

    /// Appends one mode carrying `letter` to every configuration.
    pub(crate) fn tensor_letter(&self, letter: Letter) -> Self {
        let mut out = self.empty_like(self.modes + 1);
        for (c, a) in &self.amplitudes {
            let mut c = c.clone();
            c.push_letter(letter);
            out.amplitudes.insert(c, *a);
        }
        out
    }

    pub(crate) fn contains(&self, config: &Configuration) -> bool {
        self.amplitudes.contains_key(config)
    }

    pub(crate) fn insert_raw(&mut self, config: Configuration, amp: Complex<T>) {
        self.amplitudes.insert(config, amp);
    }

    /// Serializable dump (`"1010|RL": [re, im]`).
    pub fn dump(&self) -> StateDump {
        StateDump {
            levels: self.levels,
            modes: self.modes,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(c, a)| (c.to_string(), [a.re.as_f64(), a.im.as_f64()]))
                .collect(),
        }
    }
}

/// JSON shape of a state dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDump {
    pub levels: usize,
    pub modes: usize,
    pub amplitudes: BTreeMap<String, [f64; 2]>,
}

/// Classical mixture of pure branches, used when randomness is tracked exhaustively.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble<T: Real> {
    branches: Vec<(T, EnsembleState<T>)>,
}

impl<T: Real> StateEnsemble<T> {
    pub fn pure(state: EnsembleState<T>) -> Self {
        Self {
            branches: vec![(T::one(), state)],
        }
    }

    /// Weights must be positive and sum to one.
    pub fn new(branches: Vec<(T, EnsembleState<T>)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one branch".into()));
        }
        if branches.iter().any(|(w, _)| *w <= T::zero()) {
            return Err(Error::InvalidArgument("branch weights must be positive".into()));
        }
        let total: T = branches.iter().map(|(w, _)| *w).sum();
        if (total - T::one()).abs() > T::default_tolerance() {
            return Err(Error::InvalidArgument(format!("branch weights sum to {total}, not 1")));
        }
        let first = &branches[0].1;
        for (_, s) in &branches[1..] {
            first.check_shape(s)?;
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(T, EnsembleState<T>)] {
        &self.branches
    }

    pub fn into_branches(self) -> Vec<(T, EnsembleState<T>)> {
        self.branches
    }

    pub fn mode_count(&self) -> usize {
        self.branches[0].1.mode_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn new_state_is_vacuum() {
        for n in [1, 4, 8] {
            let s = EnsembleState::<f64>::new(n).unwrap();
            assert_eq!(s.len(), 1);
            let label = format!("{}|", "0".repeat(n));
            assert_eq!(s.amplitude(&cfg(&label)), c(1.0));
            assert_eq!(s.mode_count(), 0);
        }
    }

    #[test]
    fn zero_levels_rejected() {
        assert!(matches!(EnsembleState::<f64>::new(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn norm_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(EnsembleState::<f64>::new(4).unwrap().norm(), 1.0);
        let s = EnsembleState::from_amplitudes(2, 0, [(cfg("10|"), c(h)), (cfg("01|"), c(-h))]).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.scaled(c(2.0)).norm(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_products() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = EnsembleState::from_amplitudes(4, 0, [(cfg("0000|"), c(1.0))]).unwrap();
        let b = EnsembleState::from_amplitudes(4, 0, [(cfg("1000|"), c(1.0))]).unwrap();
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0));
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0));
        let plus = EnsembleState::from_amplitudes(4, 0, [(cfg("0000|"), c(h)), (cfg("1000|"), c(h))]).unwrap();
        let minus = EnsembleState::from_amplitudes(4, 0, [(cfg("0000|"), c(h)), (cfg("1000|"), c(-h))]).unwrap();
        assert_abs_diff_eq!(plus.inner_product(&minus).unwrap().norm(), 0.0, epsilon = 1e-15);
        let other = EnsembleState::<f64>::new(3).unwrap();
        assert!(matches!(a.inner_product(&other), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn label_roundtrip_and_duplicates_merge() {
        let c1 = cfg("1010|RLV");
        assert_eq!(c1.to_string(), "1010|RLV");
        assert!(c1.occupied(1) && !c1.occupied(2) && c1.occupied(3));
        let s = EnsembleState::from_amplitudes(4, 3, [(c1.clone(), c(0.5)), (c1.clone(), c(0.5))]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&c1), c(1.0));
        assert!("10x|".parse::<Configuration>().is_err());
        assert!("10".parse::<Configuration>().is_err());
    }

    #[test]
    fn pruning_drops_tiny_amplitudes() {
        let s = EnsembleState::from_amplitudes(1, 0, [(cfg("0|"), c(1.0)), (cfg("1|"), c(1e-16))]).unwrap();
        assert_eq!(s.len(), 1);
        let s = s.with_prune_threshold(0.0);
        assert_eq!(s.prune_threshold(), 0.0);
    }

    #[test]
    fn ensemble_weights_validated() {
        let s = EnsembleState::<f64>::new(1).unwrap();
        assert!(StateEnsemble::new(vec![(0.5, s.clone()), (0.5, s.clone())]).is_ok());
        assert!(StateEnsemble::new(vec![(0.7, s.clone()), (0.5, s.clone())]).is_err());
        assert!(StateEnsemble::new(vec![(1.0, s.clone()), (0.0, s)]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = EnsembleState::<f32>::new(3).unwrap();
        assert_eq!(s.norm(), 1.0f32);
        assert_eq!(s.prune_threshold(), f32::default_prune());
    }
}
