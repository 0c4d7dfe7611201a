//! Graph states: the dense |+⟩/CZ oracle and stabilizer expectations.

use num_complex::Complex;
use num_traits::Zero;

use super::clifford::Mat2;
use super::photonic::{components, PhotonicState};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{EnsembleState, Letter};

/// Letter ↦ logical qubit value. The default maps `R → 0`, `L → 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisMap {
    #[default]
    RZero,
    LZero,
}

impl BasisMap {
    pub fn zero(self) -> Letter {
        match self {
            BasisMap::RZero => Letter::R,
            BasisMap::LZero => Letter::L,
        }
    }

    pub fn one(self) -> Letter {
        match self {
            BasisMap::RZero => Letter::L,
            BasisMap::LZero => Letter::R,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            BasisMap::RZero => BasisMap::LZero,
            BasisMap::LZero => BasisMap::RZero,
        }
    }

    fn bit(self, letter: Letter) -> Option<usize> {
        if letter == self.zero() {
            Some(0)
        } else if letter == self.one() {
            Some(1)
        } else {
            None
        }
    }
}

/// Simple undirected graph; vertex `i` is the `i`-th mode it is applied to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    pub basis: BasisMap,
}

impl GraphSpec {
    /// Rejects self-loops, out-of-range endpoints and repeated edges.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {a}")));
            }
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) outside {vertices} vertices")));
            }
            let e = (a.min(b), a.max(b));
            if norm.contains(&e) {
                return Err(Error::InvalidArgument(format!("repeated edge {e:?}")));
            }
            norm.push(e);
        }
        Ok(Self {
            vertices,
            edges: norm,
            basis: BasisMap::default(),
        })
    }

    pub fn with_basis(mut self, basis: BasisMap) -> Self {
        self.basis = basis;
        self
    }

    /// Path 0 - 1 - … - (n-1).
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect()).expect("path graph")
    }

    /// 2 × `columns` ladder with interleaved vertex order `A1, B1, A2, B2, …`:
    /// rungs join `A_c`–`B_c`, rails join consecutive columns of each chain.
    pub fn ladder(columns: usize) -> Self {
        let mut edges = Vec::new();
        for c in 0..columns {
            edges.push((2 * c, 2 * c + 1));
            if c + 1 < columns {
                edges.push((2 * c, 2 * c + 2));
                edges.push((2 * c + 1, 2 * c + 3));
            }
        }
        Self::new(2 * columns, edges).expect("ladder graph")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Subgraph on `kept` (in the given order), relabelled `0..kept.len()`.
    pub fn induced(&self, kept: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                let ia = kept.iter().position(|&k| k == a)?;
                let ib = kept.iter().position(|&k| k == b)?;
                Some((ia, ib))
            })
            .collect();
        Self::new(kept.len(), edges).expect("induced subgraph").with_basis(self.basis)
    }
}

/// Dense graph state: start from |+⟩^⊗n, then a controlled-Z on every edge.
/// Vertex 0 is the most significant bit.
pub fn graph_state_vector<T: Real>(graph: &GraphSpec) -> Vec<Complex<T>> {
    let n = graph.vertex_count();
    let amp = T::one() / T::lit((1u64 << n) as f64).sqrt();
    let mut v = vec![Complex::new(amp, T::zero()); 1 << n];
    for &(a, b) in graph.edges() {
        let (ba, bb) = (1 << (n - 1 - a), 1 << (n - 1 - b));
        for (idx, x) in v.iter_mut().enumerate() {
            if idx & ba != 0 && idx & bb != 0 {
                *x = -*x;
            }
        }
    }
    v
}

/// The graph state as a photonic target under the graph's basis map.
pub fn graph_state<T: Real>(graph: &GraphSpec) -> PhotonicState<T> {
    PhotonicState::from_qubits(&graph_state_vector(graph), graph.basis.zero(), graph.basis.one())
        .expect("normalized graph state")
}

/// Dense per-environment vectors of `modes`, in the graph's qubit basis.
pub(crate) fn qubit_components<T: Real>(
    state: &EnsembleState<T>,
    modes: &[usize],
    basis: BasisMap,
) -> Result<Vec<Vec<Complex<T>>>> {
    let n = modes.len();
    let comps = components(state, modes)?;
    let mut out = Vec::with_capacity(comps.len());
    for comp in comps {
        let mut v = vec![Complex::zero(); 1 << n];
        for (letters, a) in comp {
            let mut idx = 0;
            for (slot, l) in letters.iter().enumerate() {
                let bit = basis.bit(*l).ok_or(Error::NotPolarizationEncoded { mode: modes[slot] + 1 })?;
                idx = (idx << 1) | bit;
            }
            v[idx] = a;
        }
        out.push(v);
    }
    Ok(out)
}

/// Applies a single-qubit unitary to qubit `q` (0 = most significant) of `n`.
pub(crate) fn apply_single<T: Real>(v: &mut [Complex<T>], n: usize, q: usize, u: &Mat2<T>) {
    let bit = 1 << (n - 1 - q);
    for idx in 0..v.len() {
        if idx & bit == 0 {
            let (a, b) = (v[idx], v[idx | bit]);
            v[idx] = u[0][0] * a + u[0][1] * b;
            v[idx | bit] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// `⟨v| X_a Π_{b∈N(a)} Z_b |v⟩` (unnormalized).
pub(crate) fn stabilizer_value<T: Real>(v: &[Complex<T>], n: usize, a: usize, neighbors: &[usize]) -> T {
    let flip = 1 << (n - 1 - a);
    let mask: usize = neighbors.iter().map(|b| 1 << (n - 1 - b)).sum();
    let mut acc = T::zero();
    for (x, amp) in v.iter().enumerate() {
        let sign = if (x & mask).count_ones().is_multiple_of(2) { T::one() } else { -T::one() };
        acc = acc + sign * (amp.conj() * v[x ^ flip]).re;
    }
    acc
}

/// Expectation of every generator `X_a Π_{b∈N(a)} Z_b` on `modes` (0-based,
/// vertex `i` ↔ `modes[i]`) after applying `correction[i]` to mode `modes[i]`.
/// Other modes and the atomic register are traced out.
pub fn stabilizer_expectations<T: Real>(
    state: &EnsembleState<T>,
    modes: &[usize],
    graph: &GraphSpec,
    correction: &[Mat2<T>],
) -> Result<Vec<T>> {
    let n = graph.vertex_count();
    if modes.len() != n || correction.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "graph has {n} vertices, got {} modes and {} corrections",
            modes.len(),
            correction.len()
        )));
    }
    let norm = state.norm();
    let mut comps = qubit_components(state, modes, graph.basis)?;
    for v in &mut comps {
        for (q, u) in correction.iter().enumerate() {
            apply_single(v, n, q, u);
        }
    }
    Ok((0..n)
        .map(|a| {
            let nbrs = graph.neighbors(a);
            comps.iter().map(|v| stabilizer_value(v, n, a, &nbrs)).sum::<T>() / norm
        })
        .collect())
}

/// Fidelity of the corrected modes with the graph state, tracing out everything else.
pub fn graph_fidelity<T: Real>(
    state: &EnsembleState<T>,
    modes: &[usize],
    graph: &GraphSpec,
    correction: &[Mat2<T>],
) -> Result<T> {
    let n = graph.vertex_count();
    let target = graph_state_vector::<T>(graph);
    let norm = state.norm();
    let mut total = T::zero();
    for mut v in qubit_components(state, modes, graph.basis)? {
        for (q, u) in correction.iter().enumerate() {
            apply_single(&mut v, n, q, u);
        }
        let ov = target
            .iter()
            .zip(&v)
            .fold(Complex::zero(), |acc: Complex<T>, (t, x)| acc + t.conj() * x);
        total = total + ov.norm_sqr();
    }
    Ok(total / norm)
}
