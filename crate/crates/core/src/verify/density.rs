//! Reduced density matrices over subsets of photonic modes.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use super::photonic::{components, Branches, PhotonicState};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::Letter;

/// Letters spanned by one mode's local basis.
///
/// Modes that never carry vacuum use `[R, L]`, modes that never carry `L`
/// use `[Vac, R]`, anything else gets all three letters.
pub fn infer_basis<'a>(letters: impl IntoIterator<Item = &'a Letter>) -> Vec<Letter> {
    let (mut vac, mut l) = (false, false);
    for x in letters {
        vac |= *x == Letter::Vac;
        l |= *x == Letter::L;
    }
    match (vac, l) {
        (false, _) => vec![Letter::R, Letter::L],
        (true, false) => vec![Letter::Vac, Letter::R],
        (true, true) => Letter::ALL.to_vec(),
    }
}

/// Density matrix over the tensor product of per-mode letter bases (first mode most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    modes: Vec<usize>,
    bases: Vec<Vec<Letter>>,
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    fn zeros(modes: Vec<usize>, bases: Vec<Vec<Letter>>) -> Self {
        let dim = bases.iter().map(|b| b.len()).product();
        Self {
            modes,
            bases,
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    fn index(&self, letters: &[Letter]) -> Option<usize> {
        let mut idx = 0;
        for (l, basis) in letters.iter().zip(&self.bases) {
            idx = idx * basis.len() + basis.iter().position(|b| b == l)?;
        }
        Some(idx)
    }

    /// Adds `w |v⟩⟨v|` for a vector given as a letter-pattern map.
    fn add_outer<'a>(&mut self, w: T, v: impl IntoIterator<Item = (&'a Vec<Letter>, &'a Complex<T>)>) -> Result<()> {
        let entries: Vec<(usize, Complex<T>)> = v
            .into_iter()
            .map(|(k, a)| {
                self.index(k)
                    .map(|i| (i, *a))
                    .ok_or_else(|| Error::ShapeMismatch(format!("letters {k:?} outside the density-matrix basis")))
            })
            .collect::<Result<_>>()?;
        let wc = Complex::new(w, T::zero());
        for &(i, a) in &entries {
            for &(j, b) in &entries {
                let slot = &mut self.data[i * self.dim + j];
                *slot = *slot + wc * a * b.conj();
            }
        }
        Ok(())
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|` for pure photonic states on the given bases.
    pub fn from_pure_mixture(bases: Vec<Vec<Letter>>, mixture: &[(T, &PhotonicState<T>)]) -> Result<Self> {
        let modes = (0..bases.len()).collect();
        let mut rho = Self::zeros(modes, bases);
        for (w, psi) in mixture {
            if psi.mode_count() != rho.bases.len() {
                return Err(Error::ShapeMismatch("mixture member has the wrong mode count".into()));
            }
            rho.add_outer(*w, psi.amplitudes())?;
        }
        Ok(rho)
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn bases(&self) -> &[Vec<Letter>] {
        &self.bases
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Element `⟨row|ρ|col⟩` addressed by letter patterns.
    pub fn element(&self, row: &[Letter], col: &[Letter]) -> Complex<T> {
        match (self.index(row), self.index(col)) {
            (Some(i), Some(j)) => self.data[i * self.dim + j],
            _ => Complex::zero(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self.data[i * self.dim + i])
    }

    /// Largest `|ρᵢⱼ - conj(ρⱼᵢ)|`.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            let z = self.entry(i, j);
            Complex::new(z.re.as_f64(), z.im.as_f64())
        })
    }

    /// Eigenvalues of the Hermitian part, ascending (computed in f64).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let herm = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Checks Hermiticity and unit trace at `tol`, and eigenvalues ≥ -`psd_tol`.
    pub fn is_physical(&self, tol: f64, psd_tol: f64) -> bool {
        let tr = self.trace();
        self.hermiticity_error().as_f64() <= tol
            && (tr.re.as_f64() - 1.0).abs() <= tol
            && tr.im.as_f64().abs() <= tol
            && self.eigenvalues().first().is_none_or(|&e| e >= -psd_tol)
    }

    /// `½ Σ |λ(ρ - σ)|`; both matrices must share mode bases.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.bases != other.bases {
            return Err(Error::ShapeMismatch(format!(
                "bases differ: {:?} vs {:?}",
                self.bases, other.bases
            )));
        }
        let diff = self.to_nalgebra() - other.to_nalgebra();
        let herm = (&diff + diff.adjoint()) * Complex::new(0.5, 0.0);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }
}

/// Partial trace onto `modes` (0-based, in the given order) over the atomic
/// register, the remaining modes and the branch mixture.
pub fn reduced_density<T: Real>(branches: &Branches<'_, T>, modes: &[usize]) -> Result<DensityMatrix<T>> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("mode subset is empty".into()));
    }
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::InvalidArgument(format!("mode {} listed twice", m + 1)));
        }
    }
    let mut per_branch = Vec::with_capacity(branches.len());
    for (w, state) in branches {
        per_branch.push((*w, state.norm(), components(state, modes)?));
    }
    let bases = (0..modes.len())
        .map(|slot| {
            infer_basis(
                per_branch
                    .iter()
                    .flat_map(|(_, _, comps)| comps.iter().flat_map(|v| v.keys().map(move |k| &k[slot]))),
            )
        })
        .collect();
    let mut rho = DensityMatrix::zeros(modes.to_vec(), bases);
    for (w, norm, comps) in &per_branch {
        for v in comps {
            rho.add_outer(*w / *norm, v)?;
        }
    }
    Ok(rho)
}
