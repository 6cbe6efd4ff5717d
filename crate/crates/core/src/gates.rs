//! Dense matrices for the gates and Kraus operators used by the circuit models.
//!
//! Multi-site matrices use the convention that the first (leftmost) site is
//! the most significant bit of the row/column index.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::Pauli;

pub type CMatrix = DMatrix<Complex64>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn as_faer(m: &CMatrix) -> faer::MatRef<'_, Complex64> {
    faer::MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// `a · b` through faer's packed kernels.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    let (r, c) = out.shape();
    faer::linalg::matmul::matmul(
        faer::MatMut::from_column_major_slice_mut(out.as_mut_slice(), r, c),
        faer::Accum::Replace,
        as_faer(a),
        as_faer(b),
        ONE,
        faer::Par::Seq,
    );
    out
}

/// Thin QR `m = Q R`.
pub fn thin_qr(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = as_faer(m).qr();
    (from_faer(qr.compute_thin_Q().as_ref()), from_faer(qr.thin_R()))
}

/// Thin SVD `m = U diag(s) V†`, singular values in descending order.
pub fn thin_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = as_faer(m).thin_svd().expect("SVD did not converge");
    let s = (0..m.nrows().min(m.ncols())).map(|i| svd.S()[i].re).collect();
    let v = svd.V();
    (from_faer(svd.U()), s, CMatrix::from_fn(v.ncols(), v.nrows(), |r, c| v[(c, r)].conj()))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    as_faer(m).singular_values().expect("SVD did not converge")
}

pub fn single(p: Pauli) -> CMatrix {
    let m = p.matrix();
    CMatrix::from_fn(2, 2, |r, c| m[r][c])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tensor product of the letters, first letter most significant.
pub fn pauli_word(letters: &[Pauli]) -> CMatrix {
    letters
        .iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, &p| kron(&acc, &single(p)))
}

pub fn hadamard() -> CMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

pub fn phase_s() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::i()])
}

/// CNOT with the first site as control.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// CNOT with the second site as control.
pub fn cnot_reversed() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 3)] = ONE;
    m[(2, 2)] = ONE;
    m[(3, 1)] = ONE;
    m
}

pub fn cz() -> CMatrix {
    let mut m = identity(4);
    m[(3, 3)] = -ONE;
    m
}

/// `exp(sign · iπ/4 · P) = (I + sign · iP)/√2` for a Pauli word `P`.
pub fn quarter_rotation(letters: &[Pauli], dagger: bool) -> CMatrix {
    let p = pauli_word(letters);
    let s = if dagger { -1.0 } else { 1.0 };
    (identity(p.nrows()) + p * Complex64::new(0.0, s)) * Complex64::new(FRAC_1_SQRT_2, 0.0)
}

/// Weak-measurement operator `exp(±βP) = cosh β · I ± sinh β · P` (unnormalized).
pub fn weak_kraus(letters: &[Pauli], beta: f64, plus: bool) -> CMatrix {
    let p = pauli_word(letters);
    let s = if plus { 1.0 } else { -1.0 };
    identity(p.nrows()) * Complex64::new(beta.cosh(), 0.0) + p * Complex64::new(s * beta.sinh(), 0.0)
}

/// Projector `(I ± P)/2`.
pub fn projector(letters: &[Pauli], plus: bool) -> CMatrix {
    let p = pauli_word(letters);
    let s = if plus { 0.5 } else { -0.5 };
    identity(p.nrows()) * Complex64::new(0.5, 0.0) + p * Complex64::new(s, 0.0)
}

/// The axes `P` of the self-dual gate ensemble `exp(±iπ/4 P)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RotationAxis {
    /// `Z_i`
    Z,
    /// `X_i X_{i+1}`
    XX,
    /// `Z_i Z_{i+1}`
    ZZ,
    /// `X_i X_{i+2}`
    XIX,
}

impl RotationAxis {
    pub const ALL: [RotationAxis; 4] =
        [RotationAxis::Z, RotationAxis::XX, RotationAxis::ZZ, RotationAxis::XIX];

    /// Letters on the minimal contiguous support starting at the left site.
    pub fn letters(self) -> &'static [Pauli] {
        use Pauli::*;
        match self {
            RotationAxis::Z => &[Z],
            RotationAxis::XX => &[X, X],
            RotationAxis::ZZ => &[Z, Z],
            RotationAxis::XIX => &[X, I, X],
        }
    }

    pub fn span(self) -> usize {
        self.letters().len()
    }
}

/// One element of `G = S ∪ S†`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SelfDualGate {
    pub axis: RotationAxis,
    pub dagger: bool,
}

impl SelfDualGate {
    /// All eight gates in a fixed order.
    pub fn ensemble() -> [SelfDualGate; 8] {
        let mut out = [SelfDualGate { axis: RotationAxis::Z, dagger: false }; 8];
        for (k, axis) in RotationAxis::ALL.into_iter().enumerate() {
            out[2 * k] = SelfDualGate { axis, dagger: false };
            out[2 * k + 1] = SelfDualGate { axis, dagger: true };
        }
        out
    }

    pub fn matrix(self) -> CMatrix {
        quarter_rotation(self.axis.letters(), self.dagger)
    }

    pub fn inverse(self) -> SelfDualGate {
        SelfDualGate { axis: self.axis, dagger: !self.dagger }
    }
}

/// Measured operators of the circuit models.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasuredPauli {
    /// `Z_i ⊗ I_{i+1}`: a two-site box whose right site is idle.
    ZI,
    /// `X_i X_{i+1}`
    XX,
    /// Single-site `Z_i`.
    Z,
}

impl MeasuredPauli {
    pub fn letters(self) -> &'static [Pauli] {
        use Pauli::*;
        match self {
            MeasuredPauli::ZI => &[Z, I],
            MeasuredPauli::XX => &[X, X],
            MeasuredPauli::Z => &[Z],
        }
    }

    pub fn span(self) -> usize {
        self.letters().len()
    }
}

/// Single-qubit product-state factors.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalState {
    Zero,
    One,
    Plus,
    Minus,
    /// `(|0⟩ + e^{iπ/4}|1⟩)/√2`
    T,
}

impl LocalState {
    pub fn amplitudes(self) -> [Complex64; 2] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            LocalState::Zero => [ONE, ZERO],
            LocalState::One => [ZERO, ONE],
            LocalState::Plus => [h, h],
            LocalState::Minus => [h, -h],
            LocalState::T => [h, Complex64::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_unitary(m: &CMatrix) -> bool {
        (m.adjoint() * m - identity(m.nrows())).norm() < 1e-12
    }

    #[test]
    fn factorizations_reconstruct_rank_deficient_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (rows, cols, rank) in [(8, 4, 2), (4, 8, 2), (8, 4, 4), (16, 16, 3), (2, 32, 1)] {
            let mut rand_mat = |r, c| CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let m = rand_mat(rows, rank) * rand_mat(rank, cols);
            let (u, s, vt) = thin_svd(&m);
            let mut us = u.clone();
            for (k, x) in s.iter().enumerate() {
                us.column_mut(k).scale_mut(*x);
            }
            assert!((us * &vt - &m).norm() < 1e-12 * m.norm());
            assert!((u.adjoint() * &u - identity(s.len())).norm() < 1e-12);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(s.iter().filter(|&&x| x > 1e-10).count(), rank);
            let sv = singular_values(&m);
            assert!(sv.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-12));
            let (q, r) = thin_qr(&m);
            assert!((matmul(&q, &r) - &m).norm() < 1e-12 * m.norm());
            assert!((matmul(&q.adjoint(), &q) - identity(q.ncols())).norm() < 1e-12);
            assert!((0..r.nrows()).all(|i| (0..i.min(r.ncols())).all(|j| r[(i, j)] == ZERO)));
        }
    }

    #[test]
    fn ensemble_is_unitary_and_closed_under_inverse() {
        for g in SelfDualGate::ensemble() {
            assert!(is_unitary(&g.matrix()));
            let prod = g.matrix() * g.inverse().matrix();
            assert!((prod - identity(1 << g.axis.span())).norm() < 1e-12);
        }
    }

    #[test]
    fn kraus_completeness() {
        for letters in [MeasuredPauli::ZI.letters(), MeasuredPauli::XX.letters()] {
            let beta: f64 = 0.8;
            let norm = 2.0 * (2.0 * beta).cosh();
            let kp = weak_kraus(letters, beta, true);
            let km = weak_kraus(letters, beta, false);
            let sum = (kp.adjoint() * &kp + km.adjoint() * &km) / Complex64::new(norm, 0.0);
            assert!((sum - identity(4)).norm() < 1e-12);
            let pp = projector(letters, true);
            assert!((&pp * &pp - &pp).norm() < 1e-12);
        }
        for g in [hadamard(), phase_s(), cnot(), cnot_reversed(), cz()] {
            assert!(is_unitary(&g));
        }
    }
}
