//! Random generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rydberg_source::pulse::{EmissionMap, Instruction, ModeRef};
use rydberg_source::state::EnsembleState;
use rydberg_source::{Configuration, Letter, Level, Schedule};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn level(r: &mut ChaCha8Rng, levels: usize) -> Level {
    Level::new(r.random_range(1..=levels) as u8).unwrap()
}

fn two_levels(r: &mut ChaCha8Rng, levels: usize) -> (Level, Level) {
    let a = level(r, levels);
    loop {
        let b = level(r, levels);
        if b != a {
            return (a, b);
        }
    }
}

fn letter(r: &mut ChaCha8Rng) -> Letter {
    if r.random_bool(0.5) {
        Letter::R
    } else {
        Letter::L
    }
}

/// Pi fraction or an arbitrary decimal.
pub fn angle(r: &mut ChaCha8Rng) -> f64 {
    match r.random_range(0..4) {
        0 => 0.0,
        1 => {
            let p = r.random_range(1..=7) as f64;
            let q = r.random_range(1..=8) as f64;
            let s = if r.random_bool(0.3) { -1.0 } else { 1.0 };
            s * (p * PI / q)
        }
        _ => r.random_range(-10.0..10.0),
    }
}

/// Normalized state with random support on `levels` levels and `modes` modes.
pub fn random_state(r: &mut ChaCha8Rng, levels: usize, modes: usize, support: usize) -> EnsembleState<f64> {
    let mut entries = Vec::new();
    for _ in 0..support {
        let occ: Vec<bool> = (0..levels).map(|_| r.random_bool(0.4)).collect();
        let letters: Vec<Letter> = (0..modes).map(|_| Letter::ALL[r.random_range(0..3)]).collect();
        let amp = Complex::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        entries.push((Configuration::new(&occ, letters).unwrap(), amp));
    }
    EnsembleState::from_amplitudes(levels, modes, entries).unwrap().normalized()
}

/// A random non-measurement instruction over `levels` levels.
pub fn random_gate(r: &mut ChaCha8Rng, levels: usize) -> Instruction {
    match r.random_range(0..8) {
        0 => Instruction::Load { level: level(r, levels) },
        1 => Instruction::SuperpositionLoad {
            level: level(r, levels),
            theta: angle(r),
            phi: angle(r),
        },
        2 => {
            let (first, second) = two_levels(r, levels);
            Instruction::Raman {
                first,
                second,
                theta: angle(r),
                phi: angle(r),
            }
        }
        3 => {
            let (target, control) = two_levels(r, levels);
            Instruction::Feed { target, control }
        }
        4 => Instruction::Toggle { level: level(r, levels) },
        5 => {
            let (first, second) = two_levels(r, levels);
            Instruction::CPhase { first, second }
        }
        _ => {
            let n = r.random_range(1..=levels.min(3));
            let mut entries: Vec<(Level, Letter)> = Vec::new();
            while entries.len() < n {
                let l = level(r, levels);
                if !entries.iter().any(|(e, _)| *e == l) {
                    entries.push((l, letter(r)));
                }
            }
            Instruction::Emit {
                map: EmissionMap::new(entries).unwrap(),
            }
        }
    }
}

/// Random schedule accepted by [`Schedule::new`].
pub fn random_schedule(r: &mut ChaCha8Rng) -> Schedule {
    let levels = r.random_range(1..=10);
    let len = r.random_range(0..=20);
    let mut instructions = Vec::with_capacity(len);
    let mut emitted = 0usize;
    while instructions.len() < len {
        let ins = match r.random_range(0..10) {
            0 => Instruction::RandomEmit,
            1 if emitted > 0 => Instruction::Measure {
                mode: if r.random_bool(0.5) {
                    ModeRef::Last
                } else {
                    ModeRef::Index(r.random_range(1..=emitted))
                },
            },
            1 => continue,
            _ => {
                if levels < 2 {
                    Instruction::Load { level: level(r, levels) }
                } else {
                    random_gate(r, levels)
                }
            }
        };
        if matches!(ins, Instruction::Emit { .. } | Instruction::RandomEmit) {
            emitted += 1;
        }
        instructions.push(ins);
    }
    Schedule::new(levels, instructions).unwrap()
}

/// Lines that each produce exactly one diagnostic under any header with
/// at most 10 levels.
pub const BAD_LINES: &[&str] = &[
    "frobnicate 1",
    "load 99",
    "emit 1:R 1:L",
    "raman 1 2 theta=pix",
    "feed target=1",
    "supload 1 theta=",
    "cphase 1",
    "measure 0 basis=RL",
    "load 1 extra",
    "emit 1:Q",
    "toggle",
    "raman 1 2 phi=pi",
    "measure last basis=XY",
    "levels 3",
    "feed target=2 control=2",
];
