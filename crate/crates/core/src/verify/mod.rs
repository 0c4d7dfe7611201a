//! Fidelities, reduced density matrices and graph-state stabilizers.
//!
//! Photonic letters are read as qubits through a global [`BasisMap`]
//! (`R → 0`, `L → 1` unless flipped). Cluster outputs are compared with
//! canonical graph states after a per-photon Clifford frame that is searched
//! once on the smallest instance ([`FrozenCorrection`]) and then reused.

pub mod clifford;
pub mod correction;
pub mod density;
pub mod graph;
pub mod photonic;
pub mod report;

pub use clifford::{clifford_group, Clifford, Mat2};
pub use correction::{byproducts, find_local_correction, ClusterFamily, FrozenCorrection};
pub use density::{infer_basis, reduced_density, DensityMatrix};
pub use graph::{graph_fidelity, graph_state, graph_state_vector, stabilizer_expectations, BasisMap, GraphSpec};
pub use photonic::{fidelity, ghz_correlation_check, Branches, GhzCorrelations, PhotonicState};
pub use report::{trine_members, verify_protocol, verify_result, TargetState, Tolerances, VerificationReport};
