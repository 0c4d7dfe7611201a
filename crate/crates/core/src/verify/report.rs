//! End-to-end verification of a protocol run and its JSON report.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::correction::{branch_stabilizers, ClusterFamily, FrozenCorrection};
use super::density::{reduced_density, DensityMatrix};
use super::graph::{graph_fidelity, graph_state, GraphSpec};
use super::photonic::{fidelity, ghz_correlation_check, GhzCorrelations, PhotonicState};
use crate::error::{Error, Result};
use crate::protocols::{run_schedule, Protocol, RunMode, SimResult};
use crate::state::Letter;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed `1 - F` for pure targets.
    pub fidelity: f64,
    /// Allowed `1 - ⟨S_a⟩` for graph stabilizers.
    pub stabilizer: f64,
    /// Allowed trace distance to mixed targets.
    pub trace_distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fidelity: 1e-12,
            stabilizer: 1e-10,
            trace_distance: 1e-12,
        }
    }
}

/// Reference states checked by [`verify_protocol`].
#[derive(Debug, Clone, PartialEq)]
pub enum TargetState {
    Ghz(usize),
    BellPsiMinus,
    Graph(GraphSpec),
    Explicit(PhotonicState<f64>),
}

impl TargetState {
    pub fn to_photonic(&self) -> Result<PhotonicState<f64>> {
        match self {
            TargetState::Ghz(m) => PhotonicState::ghz(*m),
            TargetState::BellPsiMinus => Ok(PhotonicState::bell_psi_minus()),
            TargetState::Graph(g) => Ok(graph_state(g)),
            TargetState::Explicit(p) => Ok(p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub protocol: String,
    pub target: String,
    pub branches: usize,
    pub fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghz_correlations: Option<GhzCorrelations>,
    /// Branch-weighted stabilizer expectations, one per retained photon.
    pub stabilizers: Vec<f64>,
    /// Frozen Clifford per retained photon (cluster protocols only).
    pub corrections: Vec<String>,
    /// 1-based photons that received a measurement byproduct `Z`, per branch.
    pub byproducts: Vec<Vec<usize>>,
    pub pass: bool,
    pub tolerances: Tolerances,
}

fn branch_refs(result: &SimResult<f64>) -> Vec<(f64, &crate::state::EnsembleState<f64>)> {
    result.branches.iter().map(|b| (b.weight, &b.state)).collect()
}

/// `⟨ψ|ρ|ψ⟩`, zero outside the matrix basis.
fn expectation(rho: &DensityMatrix<f64>, psi: &PhotonicState<f64>) -> f64 {
    let mut acc = Complex::<f64>::zero();
    for (r, a) in psi.amplitudes() {
        for (c, b) in psi.amplitudes() {
            acc += a.conj() * rho.element(r, c) * b;
        }
    }
    acc.re
}

fn insert_letter(letters: &[Letter], slot: usize, l: Letter) -> Vec<Letter> {
    let mut out = letters.to_vec();
    out.insert(slot, l);
    out
}

/// `I/2` on photon `slot` (0-based) and `|Ψ−⟩` on the other two, as pure members.
pub fn trine_members(slot: usize) -> Result<[PhotonicState<f64>; 2]> {
    if slot > 2 {
        return Err(Error::InvalidArgument(format!("trine slot {} outside 1..=3", slot + 1)));
    }
    let bell = PhotonicState::<f64>::bell_psi_minus();
    let member = |l: Letter| -> Result<PhotonicState<f64>> {
        PhotonicState::new(
            3,
            bell.amplitudes()
                .iter()
                .map(|(k, a)| (insert_letter(k, slot, l), *a))
                .collect::<BTreeMap<_, _>>(),
        )
    };
    Ok([member(Letter::R)?, member(Letter::L)?])
}

/// Runs `protocol` in `mode` and checks it against its reference state.
pub fn verify_protocol(protocol: &Protocol, mode: RunMode, tol: &Tolerances) -> Result<VerificationReport> {
    let schedule = protocol.schedule()?;
    let result = run_schedule::<f64>(&schedule, mode)?;
    verify_result(protocol, &result, tol)
}

/// Checks an existing run of `protocol`.
pub fn verify_result(protocol: &Protocol, result: &SimResult<f64>, tol: &Tolerances) -> Result<VerificationReport> {
    let branches = branch_refs(result);
    let mut report = VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        protocol: protocol.name().to_string(),
        target: String::new(),
        branches: branches.len(),
        fidelity: 0.0,
        trace_distance: None,
        ghz_correlations: None,
        stabilizers: Vec::new(),
        corrections: Vec::new(),
        byproducts: Vec::new(),
        pass: false,
        tolerances: *tol,
    };
    let modes = result.mode_count();
    match *protocol {
        Protocol::Bell | Protocol::Ghz { .. } => {
            let (target, name) = match *protocol {
                Protocol::Bell => (TargetState::BellPsiMinus, "bell_psi_minus".to_string()),
                _ => (TargetState::Ghz(modes), format!("ghz({modes})")),
            };
            let psi = target.to_photonic()?;
            report.target = name;
            report.fidelity = fidelity(&branches, &psi)?;
            let all: Vec<usize> = (0..modes).collect();
            let rho = reduced_density(&branches, &all)?;
            let sigma = DensityMatrix::from_pure_mixture(rho.bases().to_vec(), &[(1.0, &psi)])?;
            report.trace_distance = Some(rho.trace_distance(&sigma)?);
            if matches!(protocol, Protocol::Ghz { .. }) {
                report.ghz_correlations = Some(ghz_correlation_check(&branches, modes)?);
            }
            report.pass = report.fidelity >= 1.0 - tol.fidelity;
        }
        Protocol::Trine { slot } => {
            let slot = slot - 1;
            report.target = format!("trine({})", slot + 1);
            let pair: Vec<usize> = (0..3).filter(|&m| m != slot).collect();
            let rho_pair = reduced_density(&branches, &pair)?;
            report.fidelity = expectation(&rho_pair, &PhotonicState::bell_psi_minus());
            let all = [0, 1, 2];
            let rho = reduced_density(&branches, &all)?;
            let [r, l] = trine_members(slot)?;
            let sigma = DensityMatrix::from_pure_mixture(rho.bases().to_vec(), &[(0.5, &r), (0.5, &l)])?;
            let d = rho.trace_distance(&sigma)?;
            report.trace_distance = Some(d);
            report.pass = report.fidelity >= 1.0 - tol.fidelity
                && (branches.len() == 1 || d < tol.trace_distance);
        }
        Protocol::Cluster1d { .. } | Protocol::Cluster2d { .. } => {
            let family = ClusterFamily::of(protocol).expect("cluster protocol");
            let frozen = FrozenCorrection::derive(family, tol.stabilizer)?;
            let retained = family.retained(modes);
            let graph = family.full_graph(modes).induced(&retained);
            report.target = match family {
                ClusterFamily::Linear => format!("path({})", retained.len()),
                ClusterFamily::Ladder => format!("ladder(2x{})", retained.len() / 2),
            };
            report.corrections = frozen.names(retained.len());
            let mut stab = vec![0.0; retained.len()];
            let mut worst = f64::INFINITY;
            for b in &result.branches {
                let e = branch_stabilizers(&frozen, b)?;
                worst = e.iter().copied().fold(worst, f64::min);
                for (acc, x) in stab.iter_mut().zip(&e) {
                    *acc += b.weight * x;
                }
                let corr = frozen.matrices(modes, &b.records);
                report.fidelity += b.weight * graph_fidelity(&b.state, &retained, &graph, &corr)?;
                report.byproducts.push(
                    super::correction::byproducts(family, modes, &b.records)
                        .into_iter()
                        .map(|m| m + 1)
                        .collect(),
                );
            }
            report.stabilizers = stab;
            report.pass = worst >= 1.0 - tol.stabilizer;
        }
    }
    Ok(report)
}
