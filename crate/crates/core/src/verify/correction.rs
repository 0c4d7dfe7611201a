//! Local Clifford frames relating raw cluster output to canonical graph states.

use num_complex::Complex;

use super::clifford::{clifford_group, mat_mul, pauli_z, Clifford, Mat2};
use super::graph::{apply_single, qubit_components, stabilizer_value, GraphSpec};
use crate::error::{Error, Result};
use crate::protocols::{run_schedule, Branch, MeasurementRecord, Protocol, RunMode};
use crate::scalar::Real;
use crate::state::{EnsembleState, Letter};

/// Searches per-mode Cliffords `C_i` such that every stabilizer of `graph`
/// has expectation `≥ 1 - tol` on `Π C_i |ψ⟩` restricted to `modes`.
///
/// Depth-first over modes in order, candidates in group order; a stabilizer
/// is checked as soon as its closed neighbourhood is fully assigned. The
/// first hit is the lexicographically smallest admissible index vector.
/// Meant for at most five modes.
pub fn find_local_correction<T: Real>(
    state: &EnsembleState<T>,
    modes: &[usize],
    graph: &GraphSpec,
    tol: T,
) -> Result<Vec<usize>> {
    let n = graph.vertex_count();
    if modes.len() != n {
        return Err(Error::ShapeMismatch(format!("{} modes for a {n}-vertex graph", modes.len())));
    }
    let group = clifford_group::<T>();
    let norm = state.norm();
    let neighbours: Vec<Vec<usize>> = (0..n).map(|a| graph.neighbors(a)).collect();
    let ready: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&a| neighbours[a].iter().copied().chain([a]).max() == Some(i))
                .collect()
        })
        .collect();

    let base = qubit_components(state, modes, graph.basis)?;
    let mut chosen = Vec::with_capacity(n);
    if search(&base, 0, n, &group, &neighbours, &ready, norm, tol, &mut chosen) {
        Ok(chosen)
    } else {
        Err(Error::NoCorrection)
    }
}

#[allow(clippy::too_many_arguments)]
fn search<T: Real>(
    comps: &[Vec<Complex<T>>],
    depth: usize,
    n: usize,
    group: &[Clifford<T>],
    neighbours: &[Vec<usize>],
    ready: &[Vec<usize>],
    norm: T,
    tol: T,
    chosen: &mut Vec<usize>,
) -> bool {
    if depth == n {
        return true;
    }
    for (idx, c) in group.iter().enumerate() {
        let rotated: Vec<Vec<Complex<T>>> = comps
            .iter()
            .map(|v| {
                let mut v = v.clone();
                apply_single(&mut v, n, depth, &c.matrix);
                v
            })
            .collect();
        let ok = ready[depth].iter().all(|&a| {
            let e = rotated.iter().map(|v| stabilizer_value(v, n, a, &neighbours[a])).sum::<T>() / norm;
            e >= T::one() - tol
        });
        if !ok {
            continue;
        }
        chosen.push(idx);
        if search(&rotated, depth + 1, n, group, neighbours, ready, norm, tol, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Cluster family whose correction can be frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterFamily {
    Linear,
    Ladder,
}

impl ClusterFamily {
    /// Photon chains emitted per iteration.
    pub fn chains(self) -> usize {
        match self {
            ClusterFamily::Linear => 1,
            ClusterFamily::Ladder => 2,
        }
    }

    pub fn smallest(self) -> Protocol {
        match self {
            ClusterFamily::Linear => Protocol::Cluster1d { photons: 3 },
            ClusterFamily::Ladder => Protocol::Cluster2d { columns: 2 },
        }
    }

    pub fn of(protocol: &Protocol) -> Option<Self> {
        match protocol {
            Protocol::Cluster1d { .. } => Some(ClusterFamily::Linear),
            Protocol::Cluster2d { .. } => Some(ClusterFamily::Ladder),
            _ => None,
        }
    }

    /// Graph over every emitted photon of a run with `modes` photons.
    pub fn full_graph(self, modes: usize) -> GraphSpec {
        match self {
            ClusterFamily::Linear => GraphSpec::path(modes),
            ClusterFamily::Ladder => GraphSpec::ladder(modes / 2),
        }
    }

    /// 0-based modes kept after the decoupling measurements.
    pub fn retained(self, modes: usize) -> Vec<usize> {
        (0..modes - self.chains()).collect()
    }
}

/// Per-chain Clifford found once on the smallest instance and reused at every size.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenCorrection {
    pub family: ClusterFamily,
    /// Clifford group indices, one per chain; retained mode `i` uses `per_chain[i % chains]`.
    pub per_chain: Vec<usize>,
}

impl FrozenCorrection {
    /// Runs the smallest instance in branch mode, keeps the branch whose
    /// decoupling measurements all gave `R`, and searches a correction on it.
    /// The result must repeat with the chain period.
    pub fn derive(family: ClusterFamily, tol: f64) -> Result<Self> {
        let schedule = family.smallest().schedule()?;
        let result = run_schedule::<f64>(&schedule, RunMode::Branch)?;
        let branch = result
            .branches
            .iter()
            .find(|b| b.records.iter().all(|r| r.outcome == Letter::R))
            .ok_or(Error::NoCorrection)?;
        let modes = branch.state.mode_count();
        let retained = family.retained(modes);
        let graph = family.full_graph(modes).induced(&retained);
        let found = find_local_correction(&branch.state, &retained, &graph, tol)?;
        let chains = family.chains();
        let per_chain = found[..chains].to_vec();
        if found.iter().enumerate().any(|(i, c)| *c != per_chain[i % chains]) {
            return Err(Error::NoCorrection);
        }
        Ok(Self { family, per_chain })
    }

    pub fn names(&self, retained: usize) -> Vec<String> {
        let group = clifford_group::<f64>();
        (0..retained)
            .map(|i| group[self.per_chain[i % self.per_chain.len()]].name.clone())
            .collect()
    }

    /// Matrices for one branch: the frozen Clifford followed by the
    /// measurement byproduct `Z` where the record requires one.
    pub fn matrices<T: Real>(&self, modes: usize, records: &[MeasurementRecord<T>]) -> Vec<Mat2<T>> {
        let group = clifford_group::<T>();
        let flips = byproducts(self.family, modes, records);
        (0..modes - self.family.chains())
            .map(|i| {
                let c = group[self.per_chain[i % self.per_chain.len()]].matrix;
                if flips.contains(&i) {
                    mat_mul(&pauli_z(), &c)
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Retained modes (0-based) that need a `Z`: every graph neighbour of a
/// measured photon whose outcome was `L`.
pub fn byproducts<T: Real>(family: ClusterFamily, modes: usize, records: &[MeasurementRecord<T>]) -> Vec<usize> {
    let full = family.full_graph(modes);
    let retained = family.retained(modes);
    let mut parity = vec![false; modes];
    for r in records.iter().filter(|r| r.outcome == Letter::L) {
        for b in full.neighbors(r.mode - 1) {
            parity[b] ^= true;
        }
    }
    retained.into_iter().filter(|&i| parity[i]).collect()
}

/// Stabilizer expectations of one branch on its retained photons.
pub fn branch_stabilizers<T: Real>(
    frozen: &FrozenCorrection,
    branch: &Branch<T>,
) -> Result<Vec<T>> {
    let modes = branch.state.mode_count();
    let retained = frozen.family.retained(modes);
    let graph = frozen.family.full_graph(modes).induced(&retained);
    let corr = frozen.matrices(modes, &branch.records);
    super::graph::stabilizer_expectations(&branch.state, &retained, &graph, &corr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Configuration;
    use crate::verify::clifford::hadamard;
    use crate::verify::graph::{graph_state_vector, stabilizer_expectations};
    use approx::assert_abs_diff_eq;

    fn dense_to_state(v: &[Complex<f64>]) -> EnsembleState<f64> {
        let n = v.len().trailing_zeros() as usize;
        EnsembleState::from_amplitudes(
            1,
            n,
            v.iter().enumerate().map(|(idx, a)| {
                let letters = (0..n)
                    .map(|m| if idx >> (n - 1 - m) & 1 == 0 { Letter::R } else { Letter::L })
                    .collect();
                (Configuration::new(&[false], letters).unwrap(), *a)
            }),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_found_for_graph_states() {
        let g = GraphSpec::path(4);
        let s = dense_to_state(&graph_state_vector(&g));
        assert_eq!(find_local_correction(&s, &[0, 1, 2, 3], &g, 1e-10).unwrap(), vec![0; 4]);
    }

    #[test]
    fn hadamard_rotated_state_is_undone() {
        let g = GraphSpec::path(3);
        let mut v = graph_state_vector::<f64>(&g);
        for q in 0..3 {
            apply_single(&mut v, 3, q, &hadamard());
        }
        let s = dense_to_state(&v);
        let found = find_local_correction(&s, &[0, 1, 2], &g, 1e-10).unwrap();
        let group = clifford_group::<f64>();
        let mats: Vec<_> = found.iter().map(|&i| group[i].matrix).collect();
        for e in stabilizer_expectations(&s, &[0, 1, 2], &g, &mats).unwrap() {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-10);
        }
        // the identity frame does not work here
        assert_ne!(found, vec![0; 3]);
        // Hadamard on every mode is admissible
        let hs = vec![hadamard(); 3];
        for e in stabilizer_expectations(&s, &[0, 1, 2], &g, &hs).unwrap() {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn product_state_has_no_correction() {
        let g = GraphSpec::path(3);
        let mut v = vec![Complex::new(0.0, 0.0); 8];
        v[0] = Complex::new(1.0, 0.0);
        let s = dense_to_state(&v);
        assert!(matches!(find_local_correction(&s, &[0, 1, 2], &g, 1e-10), Err(Error::NoCorrection)));
    }

    #[test]
    fn frozen_corrections_are_periodic() {
        let lin = FrozenCorrection::derive(ClusterFamily::Linear, 1e-10).unwrap();
        assert_eq!(lin.per_chain.len(), 1);
        let lad = FrozenCorrection::derive(ClusterFamily::Ladder, 1e-10).unwrap();
        assert_eq!(lad.per_chain.len(), 2);
        assert_eq!(lin.names(3).len(), 3);
    }

    #[test]
    fn byproduct_rule() {
        let rec = |mode, outcome| MeasurementRecord {
            mode,
            outcome,
            probability: 0.5,
        };
        assert!(byproducts(ClusterFamily::Linear, 4, &[rec(4, Letter::R)]).is_empty());
        assert_eq!(byproducts(ClusterFamily::Linear, 4, &[rec(4, Letter::L)]), vec![2]);
        // ladder with 3 columns: modes 5, 6 measured; neighbours 3 (A2) and 4 (B2) retained
        assert_eq!(
            byproducts(ClusterFamily::Ladder, 6, &[rec(5, Letter::L), rec(6, Letter::R)]),
            vec![2]
        );
        assert_eq!(
            byproducts(ClusterFamily::Ladder, 6, &[rec(5, Letter::L), rec(6, Letter::L)]),
            vec![2, 3]
        );
    }
}
