//! Dense state-vector reference simulator.
//!
//! Exponential in the qubit count and only meant as ground truth for the MPS
//! and tableau backends: Pauli spectra are limited to [`MAX_PAULI_QUBITS`]
//! qubits, everything else to [`MAX_QUBITS`].
//!
//! Basis index convention: site 0 is the most significant bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{renyi_entropy, EntropyError, EntropyValue, ProbDist, RenyiOrder};
use crate::gates::{self, CMatrix, LocalState};
use crate::pauli::{Pauli, PauliString};

pub const MAX_QUBITS: usize = 12;
pub const MAX_PAULI_QUBITS: usize = 8;
/// Schmidt coefficients below this are treated as numerical noise.
pub const SCHMIDT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{num_qubits} qubits exceeds the oracle capacity of {max}")]
    Capacity { num_qubits: usize, max: usize },
    #[error("operator is not unitary (deviation {0:e}) and renormalization was not requested")]
    NotUnitary(f64),
    #[error("invalid site list {sites:?} for {num_qubits} qubits")]
    Sites { sites: Vec<usize>, num_qubits: usize },
    #[error("operator of dimension {got} does not act on {sites} sites")]
    Dimension { got: usize, sites: usize },
    #[error("state has norm² {0:e}")]
    Norm(f64),
    #[error("cut {cut} out of range for {num_qubits} qubits")]
    Cut { cut: usize, num_qubits: usize },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Computational (`Z`) or Hadamard-rotated (`X`) product basis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

/// Entropies of one state at one cut and order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactEntropies {
    pub ee: EntropyValue,
    /// `None` above [`MAX_PAULI_QUBITS`].
    pub sre: Option<EntropyValue>,
    pub pe_z: EntropyValue,
    pub pe_x: EntropyValue,
}

fn check_capacity(n: usize, max: usize) -> Result<(), OracleError> {
    if n > max {
        Err(OracleError::Capacity { num_qubits: n, max })
    } else {
        Ok(())
    }
}

impl DenseState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, OracleError> {
        let num_qubits = amplitudes.len().trailing_zeros() as usize;
        if amplitudes.len() != 1 << num_qubits || num_qubits == 0 {
            return Err(OracleError::Dimension { got: amplitudes.len(), sites: num_qubits });
        }
        check_capacity(num_qubits, MAX_QUBITS)?;
        let state = Self { amplitudes, num_qubits };
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(OracleError::Norm(n2));
        }
        Ok(state)
    }

    pub fn product(num_qubits: usize, local: LocalState) -> Result<Self, OracleError> {
        Self::product_of(&vec![local; num_qubits])
    }

    pub fn product_of(locals: &[LocalState]) -> Result<Self, OracleError> {
        let n = locals.len();
        check_capacity(n, MAX_QUBITS)?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for l in locals {
            let a = l.amplitudes();
            amplitudes = amplitudes.iter().flat_map(|&c| [c * a[0], c * a[1]]).collect();
        }
        Ok(Self { amplitudes, num_qubits: n })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn bit(&self, site: usize) -> usize {
        self.num_qubits - 1 - site
    }

    /// Embed `op` on `sites` (first listed site = most significant).
    ///
    /// Returns the squared norm after applying `op` and before any
    /// renormalization, i.e. the Born weight for a Kraus operator.
    pub fn apply(&mut self, op: &CMatrix, sites: &[usize], renormalize: bool) -> Result<f64, OracleError> {
        let k = sites.len();
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if k == 0 || sorted.len() != k || sorted.iter().any(|&s| s >= self.num_qubits) {
            return Err(OracleError::Sites { sites: sites.to_vec(), num_qubits: self.num_qubits });
        }
        if op.nrows() != 1 << k || op.ncols() != 1 << k {
            return Err(OracleError::Dimension { got: op.nrows(), sites: k });
        }
        if !renormalize {
            let dev = (op.adjoint() * op - gates::identity(1 << k)).norm();
            if dev > 1e-10 {
                return Err(OracleError::NotUnitary(dev));
            }
        }
        let masks: Vec<usize> = sites.iter().map(|&s| 1 << self.bit(s)).collect();
        let all: usize = masks.iter().sum();
        let mut local = vec![Complex64::default(); 1 << k];
        for base in 0..self.amplitudes.len() {
            if base & all != 0 {
                continue;
            }
            let index = |j: usize| -> usize {
                let mut idx = base;
                for (q, m) in masks.iter().enumerate() {
                    if j >> (k - 1 - q) & 1 == 1 {
                        idx |= m;
                    }
                }
                idx
            };
            for (j, slot) in local.iter_mut().enumerate() {
                *slot = self.amplitudes[index(j)];
            }
            for r in 0..1 << k {
                let mut acc = Complex64::default();
                for (c, v) in local.iter().enumerate() {
                    acc += op[(r, c)] * v;
                }
                self.amplitudes[index(r)] = acc;
            }
        }
        let n2 = self.norm_sqr();
        if renormalize {
            if !(n2 > 0.0) {
                return Err(OracleError::Norm(n2));
            }
            let s = 1.0 / n2.sqrt();
            self.amplitudes.iter_mut().for_each(|a| *a *= s);
        }
        Ok(n2)
    }

    /// `σ|ψ⟩` for a full-length word (phase included).
    pub fn apply_pauli(&self, pauli: &PauliString) -> Vec<Complex64> {
        assert_eq!(pauli.len(), self.num_qubits);
        let (mut xmask, mut zmask, mut ycount) = (0usize, 0usize, 0u32);
        for (site, &p) in pauli.letters().iter().enumerate() {
            let (x, z) = p.bits();
            let b = 1 << self.bit(site);
            if x {
                xmask |= b;
            }
            if z {
                zmask |= b;
            }
            if x && z {
                ycount += 1;
            }
        }
        // Y = i X Z, so σ = i^{#Y + phase} X^x Z^z
        let global = Complex64::i().powu(ycount + pauli.phase() as u32);
        let mut out = vec![Complex64::default(); self.amplitudes.len()];
        for (b, &a) in self.amplitudes.iter().enumerate() {
            let sign = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ xmask] = global * a * sign;
        }
        out
    }

    pub fn expectation(&self, pauli: &PauliString) -> f64 {
        let v = self.apply_pauli(pauli);
        self.amplitudes.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    pub fn hadamard_all(&self) -> DenseState {
        let mut s = self.clone();
        let h = gates::hadamard();
        for q in 0..self.num_qubits {
            s.apply(&h, &[q], false).expect("valid site");
        }
        s
    }

    /// `⟨ψ|σ|ψ⟩` for all `4^L` words, indexed base 4 with site 0 most
    /// significant and letters ordered `I, X, Y, Z`.
    pub fn pauli_expectations(&self) -> Result<Vec<f64>, OracleError> {
        check_capacity(self.num_qubits, MAX_PAULI_QUBITS)?;
        let n = self.num_qubits;
        Ok((0..1usize << (2 * n))
            .map(|code| self.expectation(&word_from_code(code, n)))
            .collect())
    }

    /// `Π(σ) = |Tr ρσ|² / 2^L` over all words.
    pub fn pauli_spectrum(&self) -> Result<ProbDist, OracleError> {
        let scale = 0.5f64.powi(self.num_qubits as i32);
        let w = self.pauli_expectations()?.into_iter().map(|t| t * t * scale).collect();
        Ok(ProbDist::new(w)?)
    }

    /// Squared Schmidt coefficients across the bond after site `cut − 1`.
    pub fn schmidt_spectrum(&self, cut: usize) -> Result<Vec<f64>, OracleError> {
        if cut == 0 || cut >= self.num_qubits {
            return Err(OracleError::Cut { cut, num_qubits: self.num_qubits });
        }
        let rows = 1 << cut;
        let cols = 1 << (self.num_qubits - cut);
        let m = DMatrix::from_fn(rows, cols, |r, c| self.amplitudes[r * cols + c]);
        let sv = crate::gates::singular_values(&m);
        Ok(sv.iter().filter(|&&s| s > SCHMIDT_FLOOR).map(|s| s * s).collect())
    }

    pub fn entanglement_entropy(&self, cut: usize, order: RenyiOrder) -> Result<EntropyValue, OracleError> {
        let dist = ProbDist::from_unnormalized(self.schmidt_spectrum(cut)?)?;
        Ok(renyi_entropy(&dist, order))
    }

    /// Outcome distribution of a full product-basis measurement.
    pub fn basis_distribution(&self, basis: Basis) -> Result<ProbDist, OracleError> {
        let amps = match basis {
            Basis::Z => self.amplitudes.clone(),
            Basis::X => self.hadamard_all().amplitudes,
        };
        Ok(ProbDist::new(amps.iter().map(|a| a.norm_sqr()).collect())?)
    }

    pub fn participation_entropy(&self, basis: Basis, order: RenyiOrder) -> Result<EntropyValue, OracleError> {
        Ok(renyi_entropy(&self.basis_distribution(basis)?, order))
    }

    /// `−L log 2 + S_n(Π)`.
    pub fn sre(&self, order: RenyiOrder) -> Result<EntropyValue, OracleError> {
        let s = renyi_entropy(&self.pauli_spectrum()?, order).nats();
        let v = s - self.num_qubits as f64 * std::f64::consts::LN_2;
        Ok(EntropyValue::from_nats(if v.abs() < 1e-13 { 0.0 } else { v }))
    }

    pub fn exact_entropies(&self, cut: usize, order: RenyiOrder) -> Result<ExactEntropies, OracleError> {
        let sre = if self.num_qubits <= MAX_PAULI_QUBITS { Some(self.sre(order)?) } else { None };
        Ok(ExactEntropies {
            ee: self.entanglement_entropy(cut, order)?,
            sre,
            pe_z: self.participation_entropy(Basis::Z, order)?,
            pe_x: self.participation_entropy(Basis::X, order)?,
        })
    }

    /// Marginal distribution of the first `cut` bits and of the rest.
    fn z_marginals(&self, cut: usize) -> (Vec<f64>, Vec<f64>) {
        let cols = 1 << (self.num_qubits - cut);
        let mut pa = vec![0.0; 1 << cut];
        let mut pb = vec![0.0; cols];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            pa[idx / cols] += p;
            pb[idx % cols] += p;
        }
        (pa, pb)
    }

    /// Shannon participation mutual information between the first `cut`
    /// sites and the rest, in the `Z` basis.
    pub fn bpmi(&self, cut: usize) -> Result<EntropyValue, OracleError> {
        if cut == 0 || cut >= self.num_qubits {
            return Err(OracleError::Cut { cut, num_qubits: self.num_qubits });
        }
        let (pa, pb) = self.z_marginals(cut);
        let shannon = |w: Vec<f64>| -> Result<f64, OracleError> {
            Ok(renyi_entropy(&ProbDist::new(w)?, RenyiOrder::SHANNON).nats())
        };
        let full = self.participation_entropy(Basis::Z, RenyiOrder::SHANNON)?.nats();
        Ok(EntropyValue::from_nats(shannon(pa)? + shannon(pb)? - full))
    }

    /// Exact bipartite stabilizer mutual information
    /// `M₂(ρ_AB) − M̃₂(ρ_A) − M̃₂(ρ_B)` with `M̃₂(ρ) = −log(Σ t⁴ / Σ t²)`
    /// over the reduced Pauli expectations `t`.
    pub fn bsmi(&self, cut: usize) -> Result<EntropyValue, OracleError> {
        let parts = self.bsmi_terms(cut)?;
        Ok(EntropyValue::from_nats(parts.full_sum_value()))
    }

    /// The reweighted estimator's target: the sums over `Π`'s support only.
    ///
    /// Differs from [`Self::bsmi`] exactly when some `σ` has `Tr(ρσ) = 0`
    /// while both of its restrictions have nonzero reduced expectations.
    pub fn bsmi_on_support(&self, cut: usize) -> Result<EntropyValue, OracleError> {
        let parts = self.bsmi_terms(cut)?;
        Ok(EntropyValue::from_nats(parts.support_value()))
    }

    fn bsmi_terms(&self, cut: usize) -> Result<BsmiTerms, OracleError> {
        let n = self.num_qubits;
        if cut == 0 || cut >= n {
            return Err(OracleError::Cut { cut, num_qubits: n });
        }
        let t = self.pauli_expectations()?;
        let nb = n - cut;
        // reduced expectations: t_A(σ_A) = t(σ_A ⊗ I), t_B(σ_B) = t(I ⊗ σ_B)
        let t_a: Vec<f64> = (0..1usize << (2 * cut)).map(|ca| t[ca << (2 * nb)]).collect();
        let t_b: Vec<f64> = (0..1usize << (2 * nb)).map(|cb| t[cb]).collect();
        let s2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let s4 = |v: &[f64]| v.iter().map(|x| x.powi(4)).sum::<f64>();
        let scale = 0.5f64.powi(n as i32);
        let (mut e_i, mut e_w, mut e_2) = (0.0, 0.0, 0.0);
        for (code, &tv) in t.iter().enumerate() {
            let pi = tv * tv * scale;
            if pi <= 1e-300 {
                continue;
            }
            let ta = t_a[code >> (2 * nb)];
            let tb = t_b[code & ((1 << (2 * nb)) - 1)];
            e_i += pi * (ta * ta * tb * tb) / (tv * tv);
            e_w += pi * (ta.powi(4) * tb.powi(4)) / (tv * tv);
            e_2 += pi * pi;
        }
        Ok(BsmiTerms {
            n,
            sum2_a: s2(&t_a),
            sum4_a: s4(&t_a),
            sum2_b: s2(&t_b),
            sum4_b: s4(&t_b),
            sum4: s4(&t),
            e_i,
            e_w,
            e_2,
        })
    }
}

struct BsmiTerms {
    n: usize,
    sum2_a: f64,
    sum4_a: f64,
    sum2_b: f64,
    sum4_b: f64,
    sum4: f64,
    e_i: f64,
    e_w: f64,
    e_2: f64,
}

impl BsmiTerms {
    fn full_sum_value(&self) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let m2_ab = self.n as f64 * ln2 - self.sum4.ln();
        let mt_a = -(self.sum4_a / self.sum2_a).ln();
        let mt_b = -(self.sum4_b / self.sum2_b).ln();
        m2_ab - mt_a - mt_b
    }

    fn support_value(&self) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let i = -self.e_i.ln();
        let w = -self.e_w.ln();
        // S₂^SRE = −L log 2 − log Σ Π², and Σ Π² = E_Π[Π]
        let s2 = -(self.n as f64) * ln2 - self.e_2.ln();
        i - w + s2
    }
}

/// Base-4 code → word, site 0 in the most significant digit.
pub fn word_from_code(code: usize, num_qubits: usize) -> PauliString {
    let letters = (0..num_qubits)
        .map(|site| Pauli::ALL[(code >> (2 * (num_qubits - 1 - site))) & 3])
        .collect();
    PauliString::new(letters)
}

pub fn code_from_word(word: &PauliString) -> usize {
    word.letters().iter().fold(0, |acc, p| {
        acc * 4
            + match p {
                Pauli::I => 0,
                Pauli::X => 1,
                Pauli::Y => 2,
                Pauli::Z => 3,
            }
    })
}
