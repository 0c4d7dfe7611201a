//! The 24 single-qubit Clifford operations modulo global phase.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// 2×2 complex matrix, row major.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

pub fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[Complex::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn identity<T: Real>() -> Mat2<T> {
    [[Complex::one(), Complex::zero()], [Complex::zero(), Complex::one()]]
}

pub fn hadamard<T: Real>() -> Mat2<T> {
    let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    [[h, h], [h, -h]]
}

pub fn phase_s<T: Real>() -> Mat2<T> {
    [[Complex::one(), Complex::zero()], [Complex::zero(), Complex::i()]]
}

pub fn pauli_z<T: Real>() -> Mat2<T> {
    [[Complex::one(), Complex::zero()], [Complex::zero(), -Complex::one()]]
}

/// Equality up to a global phase.
fn same_up_to_phase(a: &Mat2<f64>, b: &Mat2<f64>) -> bool {
    let flat_a = [a[0][0], a[0][1], a[1][0], a[1][1]];
    let flat_b = [b[0][0], b[0][1], b[1][0], b[1][1]];
    let pivot = flat_a.iter().position(|z| z.norm() > 1e-9).expect("nonzero matrix");
    if flat_b[pivot].norm() < 1e-9 {
        return false;
    }
    let phase = flat_b[pivot] / flat_a[pivot];
    flat_a.iter().zip(flat_b).all(|(x, y)| (x * phase - y).norm() < 1e-9)
}

/// One element of the single-qubit Clifford group.
#[derive(Debug, Clone, PartialEq)]
pub struct Clifford<T: Real> {
    /// Word in `H` and `S`, applied right to left (`"HS"` = H·S); `"I"` for the identity.
    pub name: String,
    pub matrix: Mat2<T>,
}

/// Enumerates the group breadth first from the identity with generators
/// (H, S). The order is fixed, identity first, so index order is a stable
/// tie-break for searches.
pub fn clifford_group<T: Real>() -> Vec<Clifford<T>> {
    let gens: [(&str, Mat2<f64>); 2] = [("H", hadamard()), ("S", phase_s())];
    let mut found: Vec<(String, Mat2<f64>)> = vec![(String::new(), identity())];
    let mut frontier = 0;
    while frontier < found.len() {
        let (word, m) = found[frontier].clone();
        for (g, gm) in &gens {
            let next = mat_mul(gm, &m);
            if !found.iter().any(|(_, f)| same_up_to_phase(f, &next)) {
                found.push((format!("{g}{word}"), next));
            }
        }
        frontier += 1;
    }
    debug_assert_eq!(found.len(), 24);
    found
        .into_iter()
        .map(|(word, m)| Clifford {
            name: if word.is_empty() { "I".to_string() } else { word },
            matrix: m.map(|row| row.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))),
        })
        .collect()
}
