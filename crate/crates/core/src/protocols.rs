//! Schedules for the named photonic-state protocols and the sequential executor.

use std::f64::consts::FRAC_PI_2;

use crate::emission::timing::{estimate_duration, DurationModel};
use crate::error::{Error, Result};
use crate::pulse::{self, lv, CoinMode, EmissionMap, Instruction, ModeRef, OutcomeChoice, SimRng};
use crate::scalar::Real;
use crate::state::{EnsembleState, Letter, MAX_LEVELS};

/// Ordered pulse program over a register of `level_count` encoded levels.
///
/// Equality compares the register size and the instruction list only; the
/// name is descriptive metadata.
#[derive(Debug, Clone)]
pub struct Schedule {
    level_count: usize,
    instructions: Vec<Instruction>,
    name: Option<String>,
}

impl PartialEq for Schedule {
    fn eq(&self, other: &Self) -> bool {
        self.level_count == other.level_count && self.instructions == other.instructions
    }
}

impl Schedule {
    /// Validates level references and measurement targets.
    pub fn new(level_count: usize, instructions: Vec<Instruction>) -> Result<Self> {
        if level_count == 0 || level_count > MAX_LEVELS {
            return Err(Error::InvalidArgument(format!(
                "level count must be in 1..={MAX_LEVELS}, got {level_count}"
            )));
        }
        let mut emitted = 0usize;
        for (index, ins) in instructions.iter().enumerate() {
            let wrap = |e: Error| Error::Schedule {
                index,
                source: Box::new(e),
            };
            for level in ins.levels() {
                if level.get() as usize > level_count {
                    return Err(wrap(Error::InvalidArgument(format!(
                        "level {level} outside register of {level_count} levels"
                    ))));
                }
            }
            ins.check_operands().map_err(wrap)?;
            match ins {
                Instruction::Emit { .. } | Instruction::RandomEmit => emitted += 1,
                Instruction::Measure { mode } => {
                    mode.resolve(emitted).map_err(wrap)?;
                }
                _ => {}
            }
        }
        Ok(Self {
            level_count,
            instructions,
            name: None,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn level_count(&self) -> usize {
        self.level_count
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Number of EMIT and RANDOM_EMIT instructions.
    pub fn expected_modes(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Emit { .. } | Instruction::RandomEmit))
            .count()
    }

    pub fn measurement_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Measure { .. }))
            .count()
    }
}

fn emit_map(entries: &[(u8, Letter)]) -> Instruction {
    Instruction::Emit {
        map: EmissionMap::new(entries.iter().map(|(l, x)| (lv(*l), *x)).collect()).expect("static emission map"),
    }
}

fn feed(target: u8, control: u8) -> Instruction {
    Instruction::Feed {
        target: lv(target),
        control: lv(control),
    }
}

fn raman_half(first: u8, second: u8) -> Instruction {
    Instruction::Raman {
        first: lv(first),
        second: lv(second),
        theta: FRAC_PI_2,
        phi: 0.0,
    }
}

/// M-mode number-encoded GHZ state. Emission level `1`, control level `2`.
pub fn ghz_schedule(modes: usize) -> Result<Schedule> {
    if modes < 2 {
        return Err(Error::InvalidArgument(format!("GHZ needs at least 2 modes, got {modes}")));
    }
    const EMITTER: u8 = 1;
    const CONTROL: u8 = 2;
    let mut ins = vec![Instruction::SuperpositionLoad {
        level: lv(CONTROL),
        theta: FRAC_PI_2,
        phi: 0.0,
    }];
    for _ in 0..modes - 1 {
        ins.push(feed(EMITTER, CONTROL));
        ins.push(emit_map(&[(EMITTER, Letter::R)]));
    }
    ins.push(Instruction::Toggle { level: lv(CONTROL) });
    ins.push(emit_map(&[(CONTROL, Letter::R)]));
    Ok(Schedule::new(2, ins)?.named(format!("ghz-{modes}")))
}

/// Atomic preparation of `(|1010⟩ - |0101⟩)/√2`.
fn bell_preparation() -> Vec<Instruction> {
    vec![
        Instruction::Load { level: lv(2) },
        raman_half(2, 3),
        feed(4, 3),
        feed(1, 2),
    ]
}

fn bell_emissions() -> [Instruction; 2] {
    [
        emit_map(&[(2, Letter::L), (3, Letter::R)]),
        emit_map(&[(1, Letter::L), (4, Letter::R)]),
    ]
}

/// Polarization Bell pair `(|RL⟩ - |LR⟩)/√2` over four levels.
pub fn bell_schedule() -> Schedule {
    let mut ins = bell_preparation();
    ins.extend(bell_emissions());
    Schedule::new(4, ins).expect("static schedule").named("bell")
}

/// Double-trine signal ρ_slot: a randomly polarized photon in `slot` (1..=3)
/// and the Bell pair in the other two slots.
pub fn trine_schedule(slot: usize) -> Result<Schedule> {
    if !(1..=3).contains(&slot) {
        return Err(Error::InvalidArgument(format!("trine slot must be 1, 2 or 3, got {slot}")));
    }
    let mut ins = bell_preparation();
    let [first, second] = bell_emissions();
    let mut emissions = vec![first, second];
    emissions.insert(slot - 1, Instruction::RandomEmit);
    ins.extend(emissions);
    Ok(Schedule::new(4, ins)?.named(format!("trine-{slot}")))
}

/// One iteration of the linear-cluster chain on levels (a, b) with emitters (la, lb).
fn chain_iteration(a: u8, b: u8, la: u8, lb: u8) -> [Instruction; 3] {
    // a empty (atom in b) feeds la; b empty (atom in a) feeds lb
    [raman_half(a, b), feed(la, b), feed(lb, a)]
}

/// Linear cluster of `photons` emissions; the last photon is measured to decouple the atom.
pub fn cluster1d_schedule(photons: usize) -> Result<Schedule> {
    if photons < 2 {
        return Err(Error::InvalidArgument(format!("1D cluster needs at least 2 photons, got {photons}")));
    }
    let mut ins = vec![Instruction::Load { level: lv(3) }];
    for _ in 0..photons {
        ins.extend(chain_iteration(2, 3, 1, 4));
        ins.push(emit_map(&[(1, Letter::L), (4, Letter::R)]));
    }
    ins.push(Instruction::Measure { mode: ModeRef::Last });
    Ok(Schedule::new(4, ins)?.named(format!("cluster1d-{photons}")))
}

/// Two interleaved chains joined by a conditional phase every iteration (ladder graph).
pub fn cluster2d_schedule(columns: usize) -> Result<Schedule> {
    if columns < 2 {
        return Err(Error::InvalidArgument(format!("2D cluster needs at least 2 columns, got {columns}")));
    }
    let mut ins = vec![Instruction::Load { level: lv(3) }, Instruction::Load { level: lv(7) }];
    for _ in 0..columns {
        ins.push(raman_half(2, 3));
        ins.push(raman_half(6, 7));
        ins.push(Instruction::CPhase {
            first: lv(3),
            second: lv(7),
        });
        ins.push(feed(1, 3));
        ins.push(feed(4, 2));
        ins.push(feed(5, 7));
        ins.push(feed(8, 6));
        ins.push(emit_map(&[(1, Letter::L), (4, Letter::R)]));
        ins.push(emit_map(&[(5, Letter::L), (8, Letter::R)]));
    }
    ins.push(Instruction::Measure {
        mode: ModeRef::Index(2 * columns - 1),
    });
    ins.push(Instruction::Measure {
        mode: ModeRef::Index(2 * columns),
    });
    Ok(Schedule::new(8, ins)?.named(format!("cluster2d-{columns}")))
}

/// Builtin protocols with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Bell,
    Ghz { modes: usize },
    Trine { slot: usize },
    Cluster1d { photons: usize },
    Cluster2d { columns: usize },
}

impl Protocol {
    pub fn schedule(&self) -> Result<Schedule> {
        match *self {
            Protocol::Bell => Ok(bell_schedule()),
            Protocol::Ghz { modes } => ghz_schedule(modes),
            Protocol::Trine { slot } => trine_schedule(slot),
            Protocol::Cluster1d { photons } => cluster1d_schedule(photons),
            Protocol::Cluster2d { columns } => cluster2d_schedule(columns),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Bell => "bell",
            Protocol::Ghz { .. } => "ghz",
            Protocol::Trine { .. } => "trine",
            Protocol::Cluster1d { .. } => "cluster1d",
            Protocol::Cluster2d { .. } => "cluster2d",
        }
    }
}

/// Handling of classical randomness during execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Follow one seeded trajectory.
    Trajectory { seed: u64 },
    /// Track every coin and measurement outcome as a weighted branch.
    Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T: Real> {
    /// 1-based mode index.
    pub mode: usize,
    pub outcome: Letter,
    pub probability: T,
}

/// One pure branch of a run, with the measurement outcomes that led to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T: Real> {
    pub weight: T,
    pub state: EnsembleState<T>,
    pub records: Vec<MeasurementRecord<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T: Real> {
    /// A single weight-1 branch in trajectory mode.
    pub branches: Vec<Branch<T>>,
    pub duration_s: f64,
}

impl<T: Real> SimResult<T> {
    /// The state of a single-branch result.
    pub fn pure_state(&self) -> Option<&EnsembleState<T>> {
        match self.branches.as_slice() {
            [b] => Some(&b.state),
            _ => None,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.branches[0].state.mode_count()
    }
}

/// Executes a schedule from the all-reservoir state.
pub fn run_schedule<T: Real>(schedule: &Schedule, mode: RunMode) -> Result<SimResult<T>> {
    run_schedule_observed(schedule, mode, |_, _| {})
}

/// Like [`run_schedule`], calling `observer(index, branches)` after each instruction.
pub fn run_schedule_observed<T: Real>(
    schedule: &Schedule,
    mode: RunMode,
    mut observer: impl FnMut(usize, &[Branch<T>]),
) -> Result<SimResult<T>> {
    let mut rng: Option<SimRng> = match mode {
        RunMode::Trajectory { seed } => Some(pulse::seeded_rng(seed)),
        RunMode::Branch => None,
    };
    let mut branches = vec![Branch {
        weight: T::one(),
        state: EnsembleState::new(schedule.level_count())?,
        records: Vec::new(),
    }];
    for (index, ins) in schedule.instructions().iter().enumerate() {
        let wrap = |e: Error| Error::Schedule {
            index,
            source: Box::new(e),
        };
        let mut next = Vec::with_capacity(branches.len());
        for b in branches {
            match ins {
                Instruction::RandomEmit => match rng.as_mut() {
                    Some(rng) => {
                        let state = pulse::random_emit_trajectory(&b.state, rng);
                        next.push(Branch { state, ..b });
                    }
                    None => {
                        for (w, state) in pulse::random_emit(&b.state, CoinMode::Branch).into_branches() {
                            next.push(Branch {
                                weight: b.weight * w,
                                state,
                                records: b.records.clone(),
                            });
                        }
                    }
                },
                Instruction::Measure { mode } => {
                    let target = mode.resolve(b.state.mode_count()).map_err(wrap)?;
                    match rng.as_mut() {
                        Some(rng) => {
                            let m = pulse::measure(&b.state, target, OutcomeChoice::Sample(rng)).map_err(wrap)?;
                            let mut records = b.records;
                            records.push(MeasurementRecord {
                                mode: target + 1,
                                outcome: m.outcome,
                                probability: m.probability,
                            });
                            next.push(Branch {
                                weight: b.weight,
                                state: m.state,
                                records,
                            });
                        }
                        None => {
                            let probs = pulse::letter_probabilities(&b.state, target).map_err(wrap)?;
                            for (letter, p) in Letter::ALL.iter().zip(probs) {
                                if p <= T::zero() {
                                    continue;
                                }
                                let m = pulse::measure(&b.state, target, OutcomeChoice::Postselect(*letter))
                                    .map_err(wrap)?;
                                let mut records = b.records.clone();
                                records.push(MeasurementRecord {
                                    mode: target + 1,
                                    outcome: m.outcome,
                                    probability: m.probability,
                                });
                                next.push(Branch {
                                    weight: b.weight * p,
                                    state: m.state,
                                    records,
                                });
                            }
                        }
                    }
                }
                _ => {
                    let state = ins.apply(&b.state).map_err(wrap)?;
                    next.push(Branch { state, ..b });
                }
            }
        }
        branches = next;
        observer(index, &branches);
    }
    Ok(SimResult {
        branches,
        duration_s: estimate_duration(schedule, &DurationModel::default()),
    })
}
