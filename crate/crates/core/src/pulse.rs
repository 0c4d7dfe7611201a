//! Pulse primitives acting on [`EnsembleState`].
//!
//! Every primitive is an exact linear map on the sparse amplitude map, except
//! [`measure`] (projective, renormalizing) and the classical coin of
//! [`random_emit`]. All functions take the state by reference and return a new
//! value.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{EnsembleState, Letter, StateEnsemble};

/// Seeded generator used for every stochastic step (coin flips, measurement sampling).
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1-based index of an encoded atomic level (level 0 is the reservoir and is never addressed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub fn new(index: u8) -> Result<Self> {
        if index == 0 || index as usize > crate::state::MAX_LEVELS {
            return Err(Error::InvalidArgument(format!("level index {index} out of range")));
        }
        Ok(Self(index))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for literal levels in protocol code and tests. Panics on 0.
pub fn lv(index: u8) -> Level {
    Level::new(index).expect("valid level literal")
}

/// Level → polarization letter for one emission step. Keys are distinct, letters are R or L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmissionMap(Vec<(Level, Letter)>);

impl EmissionMap {
    pub fn new(entries: Vec<(Level, Letter)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("emission map is empty".into()));
        }
        for (i, (level, letter)) in entries.iter().enumerate() {
            if *letter == Letter::Vac {
                return Err(Error::InvalidArgument(format!("level {level} mapped to vacuum")));
            }
            if entries[..i].iter().any(|(l, _)| l == level) {
                return Err(Error::InvalidArgument(format!("level {level} mapped twice")));
            }
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[(Level, Letter)] {
        &self.0
    }
}

/// Which emitted mode a measurement addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeRef {
    /// Most recently emitted mode at execution time.
    Last,
    /// 1-based emission index.
    Index(usize),
}

impl ModeRef {
    /// 0-based mode index in a state with `mode_count` modes.
    pub fn resolve(self, mode_count: usize) -> Result<usize> {
        match self {
            ModeRef::Last if mode_count > 0 => Ok(mode_count - 1),
            ModeRef::Index(i) if i >= 1 && i <= mode_count => Ok(i - 1),
            _ => Err(Error::InvalidArgument(format!(
                "measurement of {self:?} but only {mode_count} modes emitted"
            ))),
        }
    }
}

/// One schedule step. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Load { level: Level },
    SuperpositionLoad { level: Level, theta: f64, phi: f64 },
    Raman { first: Level, second: Level, theta: f64, phi: f64 },
    Feed { target: Level, control: Level },
    Toggle { level: Level },
    CPhase { first: Level, second: Level },
    Emit { map: EmissionMap },
    RandomEmit,
    /// Projective measurement in the {R, L} letter basis.
    Measure { mode: ModeRef },
}

/// Coarse classification used for duration estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstructionClass {
    Gate,
    Emission,
    Measurement,
}

impl Instruction {
    pub fn class(&self) -> InstructionClass {
        match self {
            Instruction::Emit { .. } | Instruction::RandomEmit => InstructionClass::Emission,
            Instruction::Measure { .. } => InstructionClass::Measurement,
            _ => InstructionClass::Gate,
        }
    }

    pub fn levels(&self) -> Vec<Level> {
        match self {
            Instruction::Load { level } | Instruction::Toggle { level } => vec![*level],
            Instruction::SuperpositionLoad { level, .. } => vec![*level],
            Instruction::Raman { first, second, .. } | Instruction::CPhase { first, second } => {
                vec![*first, *second]
            }
            Instruction::Feed { target, control } => vec![*target, *control],
            Instruction::Emit { map } => map.entries().iter().map(|(l, _)| *l).collect(),
            Instruction::RandomEmit | Instruction::Measure { .. } => Vec::new(),
        }
    }

    /// Checks operand sanity independent of any state: finite angles and
    /// distinct levels for two-level pulses.
    pub fn check_operands(&self) -> Result<()> {
        match self {
            Instruction::SuperpositionLoad { theta, phi, .. } => check_angles(*theta, *phi),
            Instruction::Raman {
                first,
                second,
                theta,
                phi,
            } => {
                check_distinct(*first, *second)?;
                check_angles(*theta, *phi)
            }
            Instruction::CPhase { first, second } => check_distinct(*first, *second),
            Instruction::Feed { target, control } => check_distinct(*target, *control),
            _ => Ok(()),
        }
    }

    /// Applies a deterministic (non-random, non-measurement) instruction.
    /// `RandomEmit` and `Measure` return `InvalidArgument`; use [`random_emit`] and [`measure`].
    pub fn apply<T: Real>(&self, state: &EnsembleState<T>) -> Result<EnsembleState<T>> {
        match self {
            Instruction::Load { level } => load(state, *level),
            Instruction::SuperpositionLoad { level, theta, phi } => {
                superposition_load(state, *level, T::lit(*theta), T::lit(*phi))
            }
            Instruction::Raman { first, second, theta, phi } => {
                raman(state, *first, *second, T::lit(*theta), T::lit(*phi))
            }
            Instruction::Feed { target, control } => feed(state, *target, *control),
            Instruction::Toggle { level } => toggle(state, *level),
            Instruction::CPhase { first, second } => cphase(state, *first, *second),
            Instruction::Emit { map } => emit(state, map),
            Instruction::RandomEmit | Instruction::Measure { .. } => Err(Error::InvalidArgument(
                "stochastic instruction needs an explicit execution mode".into(),
            )),
        }
    }
}

fn check_level<T: Real>(state: &EnsembleState<T>, level: Level) -> Result<()> {
    if level.get() as usize > state.level_count() {
        return Err(Error::InvalidArgument(format!(
            "level {level} outside register of {} levels",
            state.level_count()
        )));
    }
    Ok(())
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite angle (theta={theta}, phi={phi})")));
    }
    Ok(())
}

fn check_distinct(a: Level, b: Level) -> Result<()> {
    if a == b {
        return Err(Error::InvalidArgument(format!("level {a} used twice in a two-level pulse")));
    }
    Ok(())
}

fn require_empty<T: Real>(state: &EnsembleState<T>, level: Level) -> Result<()> {
    check_level(state, level)?;
    match state.configurations().find(|c| c.occupied(level.get())) {
        Some(c) => Err(Error::BlockadeViolation {
            level: level.get(),
            configuration: c.to_string(),
        }),
        None => Ok(()),
    }
}

/// Unconditional single-atom transfer reservoir → `level` through the blockaded Rydberg state.
pub fn load<T: Real>(state: &EnsembleState<T>, level: Level) -> Result<EnsembleState<T>> {
    require_empty(state, level)?;
    let mut out = state.empty_like(state.mode_count());
    for (c, a) in state.iter() {
        out.insert_raw(c.with(level.get(), true), *a);
    }
    Ok(out)
}

/// Partial transfer: `c ↦ cos(θ/2)·c + e^{iφ} sin(θ/2)·c[level:=1]`.
pub fn superposition_load<T: Real>(
    state: &EnsembleState<T>,
    level: Level,
    theta: T,
    phi: T,
) -> Result<EnsembleState<T>> {
    require_empty(state, level)?;
    let half = theta / T::lit(2.0);
    let stay = Complex::new(half.cos(), T::zero());
    let moved = Complex::from_polar(half.sin(), phi);
    let mut out = state.empty_like(state.mode_count());
    for (c, a) in state.iter() {
        out.accumulate(c.clone(), *a * stay);
        out.accumulate(c.with(level.get(), true), *a * moved);
    }
    out.prune_small();
    Ok(out)
}

/// Raman rotation between two encoded levels holding at most one atom between them.
///
/// On the ordered pair (`first` occupied, `second` occupied) the map is
/// `[[-cos(θ/2), e^{-iφ} sin(θ/2)], [e^{iφ} sin(θ/2), cos(θ/2)]]`; at θ = π/2,
/// φ = 0 this sends `first ↦ (second - first)/√2` and `second ↦ (first + second)/√2`.
/// Configurations with both levels empty are untouched.
pub fn raman<T: Real>(
    state: &EnsembleState<T>,
    first: Level,
    second: Level,
    theta: T,
    phi: T,
) -> Result<EnsembleState<T>> {
    check_level(state, first)?;
    check_level(state, second)?;
    check_distinct(first, second)?;
    let (f, s) = (first.get(), second.get());
    if let Some(c) = state.configurations().find(|c| c.occupied(f) && c.occupied(s)) {
        return Err(Error::UnsupportedConfiguration {
            first: f,
            second: s,
            configuration: c.to_string(),
        });
    }
    let half = theta / T::lit(2.0);
    let (sin, cos) = half.sin_cos();
    let keep_first = Complex::new(-cos, T::zero());
    let first_to_second = Complex::from_polar(sin, phi);
    let second_to_first = Complex::from_polar(sin, -phi);
    let keep_second = Complex::new(cos, T::zero());

    let mut out = state.empty_like(state.mode_count());
    for (c, a) in state.iter() {
        match (c.occupied(f), c.occupied(s)) {
            (true, false) => {
                out.accumulate(c.clone(), *a * keep_first);
                out.accumulate(c.with(f, false).with(s, true), *a * first_to_second);
            }
            (false, true) => {
                out.accumulate(c.with(s, false).with(f, true), *a * second_to_first);
                out.accumulate(c.clone(), *a * keep_second);
            }
            _ => out.accumulate(c.clone(), *a),
        }
    }
    out.prune_small();
    Ok(out)
}

/// Blockade-conditional feed: load `target` only where `control` is empty. No phase on either branch.
pub fn feed<T: Real>(state: &EnsembleState<T>, target: Level, control: Level) -> Result<EnsembleState<T>> {
    check_level(state, control)?;
    check_distinct(target, control)?;
    require_empty(state, target)?;
    let mut out = state.empty_like(state.mode_count());
    for (c, a) in state.iter() {
        let next = if c.occupied(control.get()) {
            c.clone()
        } else {
            c.with(target.get(), true)
        };
        out.insert_raw(next, *a);
    }
    Ok(out)
}

/// Coherent occupation flip of `level` (the three-π-pulse chain), phase free.
pub fn toggle<T: Real>(state: &EnsembleState<T>, level: Level) -> Result<EnsembleState<T>> {
    check_level(state, level)?;
    let j = level.get();
    let mut out = state.empty_like(state.mode_count());
    for (c, a) in state.iter() {
        out.insert_raw(c.with(j, !c.occupied(j)), *a);
    }
    Ok(out)
}

/// Sign flip on every configuration where either level is occupied.
pub fn cphase<T: Real>(state: &EnsembleState<T>, first: Level, second: Level) -> Result<EnsembleState<T>> {
    check_level(state, first)?;
    check_level(state, second)?;
    check_distinct(first, second)?;
    let (f, s) = (first.get(), second.get());
    Ok(state.map_amplitudes(|c, a| if c.occupied(f) || c.occupied(s) { -a } else { a }))
}

/// Releases the mapped levels into one new mode.
///
/// Fails when two mapped levels are occupied in one configuration, or when
/// two support configurations would become identical (levels sharing a
/// letter with otherwise equal occupations).
pub fn emit<T: Real>(state: &EnsembleState<T>, map: &EmissionMap) -> Result<EnsembleState<T>> {
    for (level, _) in map.entries() {
        check_level(state, *level)?;
    }
    let mut out = state.empty_like(state.mode_count() + 1);
    for (c, a) in state.iter() {
        let mut hit: Option<(Level, Letter)> = None;
        for &(level, letter) in map.entries() {
            if c.occupied(level.get()) {
                if let Some((prev, _)) = hit {
                    return Err(Error::AmbiguousEmission {
                        first: prev.get(),
                        second: level.get(),
                        configuration: c.to_string(),
                    });
                }
                hit = Some((level, letter));
            }
        }
        let mut next = c.clone();
        match hit {
            Some((level, letter)) => {
                next.set(level.get(), false);
                next.push_letter(letter);
            }
            None => next.push_letter(Letter::Vac),
        }
        if out.contains(&next) {
            return Err(Error::IndistinguishableEmission {
                configuration: next.to_string(),
            });
        }
        out.insert_raw(next, *a);
    }
    Ok(out)
}

/// How the classical coin of [`random_emit`] is handled.
pub enum CoinMode<'a> {
    /// Flip a seeded coin and follow one trajectory.
    Trajectory(&'a mut SimRng),
    /// Keep both outcomes as weighted branches.
    Branch,
}

/// Randomly polarized photon, independent of the register.
pub fn random_emit<T: Real>(state: &EnsembleState<T>, coin: CoinMode<'_>) -> StateEnsemble<T> {
    match coin {
        CoinMode::Trajectory(rng) => StateEnsemble::pure(random_emit_trajectory(state, rng)),
        CoinMode::Branch => random_emit_branches(state),
    }
}

pub fn random_emit_trajectory<T: Real>(state: &EnsembleState<T>, rng: &mut SimRng) -> EnsembleState<T> {
    let letter = if rng.random_bool(0.5) { Letter::R } else { Letter::L };
    state.tensor_letter(letter)
}

pub fn random_emit_branches<T: Real>(state: &EnsembleState<T>) -> StateEnsemble<T> {
    let half = T::lit(0.5);
    StateEnsemble::new(vec![
        (half, state.tensor_letter(Letter::R)),
        (half, state.tensor_letter(Letter::L)),
    ])
    .expect("two half-weight branches")
}

/// How the outcome of [`measure`] is chosen.
pub enum OutcomeChoice<'a> {
    Sample(&'a mut SimRng),
    Postselect(Letter),
}

/// Result of a projective letter measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement<T: Real> {
    /// 0-based mode index.
    pub mode: usize,
    pub outcome: Letter,
    pub probability: T,
    pub state: EnsembleState<T>,
}

/// Outcome probabilities of a letter measurement on `mode` (0-based), in `Letter::ALL` order.
pub fn letter_probabilities<T: Real>(state: &EnsembleState<T>, mode: usize) -> Result<[T; 3]> {
    if mode >= state.mode_count() {
        return Err(Error::InvalidArgument(format!(
            "mode {} does not exist ({} modes)",
            mode + 1,
            state.mode_count()
        )));
    }
    let mut probs = [T::zero(); 3];
    for (c, a) in state.iter() {
        let slot = Letter::ALL.iter().position(|l| *l == c.letter(mode)).unwrap();
        probs[slot] = probs[slot] + a.norm_sqr();
    }
    let total: T = probs.iter().copied().sum();
    if total > T::zero() {
        for p in &mut probs {
            *p = *p / total;
        }
    }
    Ok(probs)
}

/// Projective measurement of one mode in the {R, L} basis (vacuum shows up as its own outcome).
pub fn measure<T: Real>(state: &EnsembleState<T>, mode: usize, choice: OutcomeChoice<'_>) -> Result<Measurement<T>> {
    let probs = letter_probabilities(state, mode)?;
    let outcome = match choice {
        OutcomeChoice::Postselect(letter) => {
            let p = probs[Letter::ALL.iter().position(|l| *l == letter).unwrap()];
            if p < T::lit(1e-12) {
                return Err(Error::ImpossiblePostselection {
                    mode: mode + 1,
                    outcome: letter.symbol(),
                    probability: p.as_f64(),
                });
            }
            letter
        }
        OutcomeChoice::Sample(rng) => {
            let u = T::lit(rng.random::<f64>());
            let mut acc = T::zero();
            let mut pick = None;
            for (letter, p) in Letter::ALL.iter().zip(probs) {
                if p <= T::zero() {
                    continue;
                }
                acc = acc + p;
                pick = Some(*letter);
                if u < acc {
                    break;
                }
            }
            pick.ok_or_else(|| Error::InvalidArgument("measurement on an empty state".into()))?
        }
    };
    let probability = probs[Letter::ALL.iter().position(|l| *l == outcome).unwrap()];
    let state = state.filtered(|c| c.letter(mode) == outcome).normalized();
    Ok(Measurement {
        mode,
        outcome,
        probability,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Configuration;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn st(levels: usize, modes: usize, entries: &[(&str, f64)]) -> EnsembleState<f64> {
        EnsembleState::from_amplitudes(
            levels,
            modes,
            entries.iter().map(|(s, a)| (s.parse::<Configuration>().unwrap(), Complex::new(*a, 0.0))),
        )
        .unwrap()
    }

    fn assert_state_eq(a: &EnsembleState<f64>, b: &EnsembleState<f64>) {
        assert_eq!(a.mode_count(), b.mode_count());
        let keys: std::collections::BTreeSet<_> = a.configurations().chain(b.configurations()).cloned().collect();
        for k in keys {
            let d = a.amplitude(&k) - b.amplitude(&k);
            assert!(d.norm() < 1e-14, "mismatch at {k}: {} vs {}", a.amplitude(&k), b.amplitude(&k));
        }
    }

    fn emap(entries: &[(u8, Letter)]) -> EmissionMap {
        EmissionMap::new(entries.iter().map(|(l, x)| (lv(*l), *x)).collect()).unwrap()
    }

    const H: f64 = FRAC_1_SQRT_2;

    #[test]
    fn load_examples() {
        let vac = EnsembleState::<f64>::new(4).unwrap();
        assert_state_eq(&load(&vac, lv(3)).unwrap(), &st(4, 0, &[("0010|", 1.0)]));
        assert_state_eq(&load(&vac, lv(2)).unwrap(), &st(4, 0, &[("0100|", 1.0)]));
        let sup = st(4, 0, &[("1000|", H), ("0001|", H)]);
        assert_state_eq(&load(&sup, lv(2)).unwrap(), &st(4, 0, &[("1100|", H), ("0101|", H)]));
    }

    #[test]
    fn load_into_occupied_level_is_blockade_violation() {
        let s = st(4, 0, &[("0010|", 1.0)]);
        assert!(matches!(load(&s, lv(3)), Err(Error::BlockadeViolation { level: 3, .. })));
        assert!(matches!(load(&s, lv(5)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn superposition_load_examples() {
        let vac = EnsembleState::<f64>::new(2).unwrap();
        let out = superposition_load(&vac, lv(2), FRAC_PI_2, 0.0).unwrap();
        assert_state_eq(&out, &st(2, 0, &[("00|", H), ("01|", H)]));
        assert_state_eq(&superposition_load(&vac, lv(2), 0.0, 0.0).unwrap(), &vac);
        let full = superposition_load(&vac, lv(2), PI, 0.0).unwrap();
        assert_state_eq(&full, &load(&vac, lv(2)).unwrap());
        let s = st(2, 0, &[("01|", 1.0)]);
        assert!(matches!(
            superposition_load(&s, lv(2), FRAC_PI_2, 0.0),
            Err(Error::BlockadeViolation { .. })
        ));
    }

    #[test]
    fn raman_examples() {
        let out = raman(&st(4, 0, &[("0100|", 1.0)]), lv(2), lv(3), FRAC_PI_2, 0.0).unwrap();
        assert_state_eq(&out, &st(4, 0, &[("0010|", H), ("0100|", -H)]));

        // Second column: the unique real unit vector orthogonal to (-1, 1)/√2 with
        // positive overlap on the source configuration is (1, 1)/√2.
        let first_col = [-H, H];
        let second_col = [H, H];
        assert_abs_diff_eq!(first_col[0] * second_col[0] + first_col[1] * second_col[1], 0.0);
        let out = raman(&st(4, 0, &[("0010|", 1.0)]), lv(2), lv(3), FRAC_PI_2, 0.0).unwrap();
        assert_state_eq(&out, &st(4, 0, &[("0100|", second_col[0]), ("0010|", second_col[1])]));

        for theta in [0.0, 0.3, FRAC_PI_2, 2.0] {
            let s = st(4, 0, &[("0001|", 1.0)]);
            assert_state_eq(&raman(&s, lv(2), lv(3), theta, 0.7).unwrap(), &s);
        }
    }

    #[test]
    fn raman_rejects_doubly_occupied_pair() {
        let s = st(4, 0, &[("0110|", 1.0)]);
        assert!(matches!(
            raman(&s, lv(2), lv(3), FRAC_PI_2, 0.0),
            Err(Error::UnsupportedConfiguration { first: 2, second: 3, .. })
        ));
    }

    #[test]
    fn feed_examples() {
        assert_state_eq(&feed(&st(4, 0, &[("0100|", 1.0)]), lv(1), lv(3)).unwrap(), &st(4, 0, &[("1100|", 1.0)]));
        assert_state_eq(&feed(&st(4, 0, &[("0010|", 1.0)]), lv(4), lv(3)).unwrap(), &st(4, 0, &[("0010|", 1.0)]));
        let s = st(4, 0, &[("0010|", H), ("0100|", -H)]);
        let out = feed(&feed(&s, lv(4), lv(3)).unwrap(), lv(1), lv(2)).unwrap();
        assert_state_eq(&out, &st(4, 0, &[("1010|", H), ("0101|", -H)]));
        assert!(matches!(
            feed(&st(4, 0, &[("1000|", 1.0)]), lv(1), lv(3)),
            Err(Error::BlockadeViolation { level: 1, .. })
        ));
    }

    #[test]
    fn toggle_flips_and_is_involution() {
        assert_state_eq(&toggle(&st(2, 0, &[("01|", 1.0)]), lv(2)).unwrap(), &st(2, 0, &[("00|", 1.0)]));
        assert_state_eq(&toggle(&st(2, 0, &[("00|", 1.0)]), lv(2)).unwrap(), &st(2, 0, &[("01|", 1.0)]));
        let s = st(2, 0, &[("00|", 0.6), ("11|", -0.8)]);
        assert_state_eq(&toggle(&toggle(&s, lv(1)).unwrap(), lv(1)).unwrap(), &s);
    }

    #[test]
    fn cphase_sign_rule() {
        let both_empty = st(8, 0, &[("10000000|", 1.0)]);
        assert_state_eq(&cphase(&both_empty, lv(3), lv(7)).unwrap(), &both_empty);
        let three = st(8, 0, &[("00100000|", 1.0)]);
        assert_state_eq(&cphase(&three, lv(3), lv(7)).unwrap(), &st(8, 0, &[("00100000|", -1.0)]));
        let mix = st(8, 0, &[("00100000|", 0.6), ("00000010|", 0.0), ("00000000|", 0.8)]);
        assert_state_eq(&cphase(&cphase(&mix, lv(3), lv(7)).unwrap(), lv(3), lv(7)).unwrap(), &mix);
    }

    #[test]
    fn emit_bell_pair() {
        let atoms = st(4, 0, &[("1010|", H), ("0101|", -H)]);
        let one = emit(&atoms, &emap(&[(2, Letter::L), (3, Letter::R)])).unwrap();
        assert_state_eq(&one, &st(4, 1, &[("1000|R", H), ("0001|L", -H)]));
        let two = emit(&one, &emap(&[(1, Letter::L), (4, Letter::R)])).unwrap();
        assert_state_eq(&two, &st(4, 2, &[("0000|RL", H), ("0000|LR", -H)]));
        let vac = emit(&EnsembleState::<f64>::new(4).unwrap(), &emap(&[(1, Letter::R)])).unwrap();
        assert_state_eq(&vac, &st(4, 1, &[("0000|V", 1.0)]));
    }

    #[test]
    fn emit_rejects_two_occupied_mapped_levels() {
        let s = st(4, 0, &[("1100|", 1.0)]);
        assert!(matches!(
            emit(&s, &emap(&[(1, Letter::L), (2, Letter::R)])),
            Err(Error::AmbiguousEmission { .. })
        ));
    }

    #[test]
    fn emit_rejects_merging_configurations() {
        let s = st(2, 0, &[("10|", H), ("01|", H)]);
        assert!(matches!(
            emit(&s, &emap(&[(1, Letter::R), (2, Letter::R)])),
            Err(Error::IndistinguishableEmission { .. })
        ));
        // same map is fine when only one of the levels is ever populated
        let t = st(2, 0, &[("10|", H), ("00|", H)]);
        assert_state_eq(
            &emit(&t, &emap(&[(1, Letter::R), (2, Letter::R)])).unwrap(),
            &st(2, 1, &[("00|R", H), ("00|V", H)]),
        );
    }

    #[test]
    fn emission_map_validation() {
        assert!(EmissionMap::new(vec![]).is_err());
        assert!(EmissionMap::new(vec![(lv(1), Letter::R), (lv(1), Letter::L)]).is_err());
        assert!(EmissionMap::new(vec![(lv(1), Letter::Vac)]).is_err());
    }

    #[test]
    fn random_emit_modes() {
        let psi = st(2, 0, &[("01|", 1.0)]);
        let ens = random_emit_branches(&psi);
        assert_eq!(ens.branches().len(), 2);
        assert_eq!(ens.branches()[0].0, 0.5);
        assert_state_eq(&ens.branches()[0].1, &st(2, 1, &[("01|R", 1.0)]));
        assert_state_eq(&ens.branches()[1].1, &st(2, 1, &[("01|L", 1.0)]));

        let a = random_emit_trajectory(&psi, &mut seeded_rng(11));
        let b = random_emit_trajectory(&psi, &mut seeded_rng(11));
        assert_eq!(a, b);

        let mut rng = seeded_rng(2024);
        let trials = 10_000;
        let r = (0..trials)
            .filter(|_| random_emit_trajectory(&psi, &mut rng).configurations().next().unwrap().letter(0) == Letter::R)
            .count();
        let frac = r as f64 / trials as f64;
        // 4σ of a fair binomial at n = 10⁴ is 0.02.
        assert!((frac - 0.5).abs() <= 0.02, "R fraction {frac}");
    }

    #[test]
    fn measure_product_and_idempotence() {
        let s = st(2, 2, &[("00|RR", 1.0)]);
        let m = measure(&s, 1, OutcomeChoice::Sample(&mut seeded_rng(1))).unwrap();
        assert_eq!(m.outcome, Letter::R);
        assert_abs_diff_eq!(m.probability, 1.0);
        assert_state_eq(&m.state, &s);

        let bell = st(2, 2, &[("00|RL", H), ("00|LR", -H)]);
        let first = measure(&bell, 0, OutcomeChoice::Sample(&mut seeded_rng(5))).unwrap();
        assert_abs_diff_eq!(first.probability, 0.5, epsilon = 1e-15);
        let again = measure(&first.state, 0, OutcomeChoice::Sample(&mut seeded_rng(99))).unwrap();
        assert_eq!(again.outcome, first.outcome);
        assert_abs_diff_eq!(again.probability, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn impossible_postselection() {
        let s = st(2, 1, &[("00|R", 1.0)]);
        assert!(matches!(
            measure(&s, 0, OutcomeChoice::Postselect(Letter::L)),
            Err(Error::ImpossiblePostselection { .. })
        ));
        assert!(measure(&s, 3, OutcomeChoice::Postselect(Letter::R)).is_err());
    }

    #[test]
    fn vacuum_mode_measures_vacuum() {
        let s = st(1, 1, &[("0|V", 1.0)]);
        let m = measure(&s, 0, OutcomeChoice::Sample(&mut seeded_rng(3))).unwrap();
        assert_eq!(m.outcome, Letter::Vac);
    }

    #[test]
    fn stochastic_instructions_need_mode() {
        let s = EnsembleState::<f64>::new(1).unwrap();
        assert!(Instruction::RandomEmit.apply(&s).is_err());
        assert!(Instruction::Measure { mode: ModeRef::Last }.apply(&s).is_err());
    }

    #[test]
    fn mode_ref_resolution() {
        assert_eq!(ModeRef::Last.resolve(3).unwrap(), 2);
        assert_eq!(ModeRef::Index(1).resolve(3).unwrap(), 0);
        assert!(ModeRef::Index(4).resolve(3).is_err());
        assert!(ModeRef::Last.resolve(0).is_err());
    }
}
