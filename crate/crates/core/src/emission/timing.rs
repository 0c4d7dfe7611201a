//! Wall-clock estimate of a schedule from per-instruction costs.

use crate::protocols::Schedule;
use crate::pulse::{Instruction, InstructionClass};

/// Per-instruction durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationModel {
    /// Rydberg-mediated gates: load, superposition load, feed, toggle, conditional phase.
    pub gate_s: f64,
    pub raman_s: f64,
    /// Emit and random emit.
    pub emission_s: f64,
    pub measurement_s: f64,
}

impl Default for DurationModel {
    fn default() -> Self {
        Self {
            gate_s: 1e-6,
            raman_s: 1e-6,
            emission_s: 1e-7,
            measurement_s: 0.0,
        }
    }
}

impl DurationModel {
    pub fn cost(&self, instruction: &Instruction) -> f64 {
        match (instruction, instruction.class()) {
            (Instruction::Raman { .. }, _) => self.raman_s,
            (_, InstructionClass::Gate) => self.gate_s,
            (_, InstructionClass::Emission) => self.emission_s,
            (_, InstructionClass::Measurement) => self.measurement_s,
        }
    }
}

/// Sum of per-instruction costs.
pub fn estimate_duration(schedule: &Schedule, model: &DurationModel) -> f64 {
    schedule.instructions().iter().map(|i| model.cost(i)).sum()
}
