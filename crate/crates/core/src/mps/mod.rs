//! Matrix-product-state backend with open boundaries.
//!
//! The state is kept in mixed-canonical form around an orthogonality center:
//! tensors left of the center are left-normalized, tensors right of it are
//! right-normalized, and the center carries the norm. Gates and Kraus
//! operators on `k ≤ 3` contiguous sites are applied by contracting the sites
//! into one block, acting on the physical legs and splitting the block back
//! with SVDs from the right, truncating every bond to `chi_max`.

pub mod sampling;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{renyi_entropy, EntropyError, EntropyValue, ProbDist, RenyiOrder};
use crate::gates::{self, CMatrix, LocalState, MeasuredPauli};
use crate::oracle::{DenseState, OracleError};
use crate::pauli::{Pauli, PauliString};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Born weights below this are treated as exactly zero.
const ZERO_PROBABILITY: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("an MPS needs at least two sites, got {0}")]
    TooFewSites(usize),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("operator on {span} sites starting at {left} does not fit {num_sites} sites (supported spans 1..=3)")]
    Sites { left: usize, span: usize, num_sites: usize },
    #[error("cut {cut} outside 1..{num_sites}")]
    Cut { cut: usize, num_sites: usize },
    #[error("measurement strength must be non-negative, got {0}")]
    NegativeBeta(f64),
    #[error("selected measurement branch has probability {0:e}")]
    ZeroProbability(f64),
    #[error("state must be right-normalized (orthogonality center at site 0, found {0})")]
    NotRightNormalized(usize),
    #[error("Pauli word has length {got}, state has {expected} sites")]
    WordLength { got: usize, expected: usize },
    #[error("conditional probabilities at site {site} sum to {sum}")]
    Inconsistent { site: usize, sum: f64 },
    #[error("bond dimension cap must be at least 1")]
    ZeroChi,
    #[error("estimator needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("no sampled estimator for Rényi order {0}")]
    UnsupportedOrder(f64),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Bond-dimension cap and optional singular-value cutoff.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub chi_max: usize,
    /// Drop singular values below `cutoff · s_max`. Values below the
    /// numerical rank threshold are always dropped.
    pub cutoff: Option<f64>,
}

impl TruncationConfig {
    pub fn new(chi_max: usize) -> Self {
        Self { chi_max, cutoff: None }
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self::new(128)
    }
}

/// One site: `A^0` and `A^1`, each `left × right`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    mats: [CMatrix; 2],
}

impl SiteTensor {
    fn product(local: [Complex64; 2]) -> Self {
        Self {
            mats: [
                CMatrix::from_element(1, 1, local[0]),
                CMatrix::from_element(1, 1, local[1]),
            ],
        }
    }

    pub fn left_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn right_dim(&self) -> usize {
        self.mats[0].ncols()
    }

    pub fn matrix(&self, s: usize) -> &CMatrix {
        &self.mats[s]
    }

    /// `[A^0; A^1]`, shape `2·left × right`.
    fn left_grouped(&self) -> CMatrix {
        let (l, r) = (self.left_dim(), self.right_dim());
        let mut m = CMatrix::zeros(2 * l, r);
        m.view_mut((0, 0), (l, r)).copy_from(&self.mats[0]);
        m.view_mut((l, 0), (l, r)).copy_from(&self.mats[1]);
        m
    }

    /// `[A^0 | A^1]`, shape `left × 2·right`.
    fn right_grouped(&self) -> CMatrix {
        let (l, r) = (self.left_dim(), self.right_dim());
        let mut m = CMatrix::zeros(l, 2 * r);
        m.view_mut((0, 0), (l, r)).copy_from(&self.mats[0]);
        m.view_mut((0, r), (l, r)).copy_from(&self.mats[1]);
        m
    }

    fn from_left_grouped(m: &CMatrix) -> Self {
        let l = m.nrows() / 2;
        let r = m.ncols();
        Self { mats: [m.view((0, 0), (l, r)).into_owned(), m.view((l, 0), (l, r)).into_owned()] }
    }

    fn from_right_grouped(m: &CMatrix) -> Self {
        let l = m.nrows();
        let r = m.ncols() / 2;
        Self { mats: [m.view((0, 0), (l, r)).into_owned(), m.view((0, r), (l, r)).into_owned()] }
    }

    fn frobenius_sqr(&self) -> f64 {
        self.mats.iter().map(|m| m.norm_squared()).sum()
    }

    fn scale(&mut self, f: f64) {
        let f = Complex64::new(f, 0.0);
        self.mats.iter_mut().for_each(|m| *m *= f);
    }
}

/// One weak measurement: `Z_i ⊗ I` or `X_i X_{i+1}` with strength β.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakMeasurementSpec {
    pub pauli_op: MeasuredPauli,
    pub beta: f64,
    pub left_site: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    /// `true` for the `+` branch.
    pub plus: bool,
    /// Born probability of the realized branch.
    pub prob: f64,
}

impl MeasurementOutcome {
    pub fn sign(&self) -> i8 {
        if self.plus {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug)]
pub struct MpsState {
    tensors: Vec<SiteTensor>,
    config: TruncationConfig,
    center: usize,
    truncation_log: Vec<f64>,
}

/// Contracted block of `k` contiguous sites: `2^k` matrices `left × right`,
/// physical multi-index with the leftmost site most significant.
struct Block {
    mats: Vec<CMatrix>,
}

impl Block {
    fn norm_sqr(&self) -> f64 {
        self.mats.iter().map(|m| m.norm_squared()).sum()
    }

    fn apply(&self, op: &CMatrix) -> Block {
        let (l, r) = (self.mats[0].nrows(), self.mats[0].ncols());
        let dim = self.mats.len();
        let mats = (0..dim)
            .map(|row| {
                let mut acc = CMatrix::zeros(l, r);
                for (col, m) in self.mats.iter().enumerate() {
                    let c = op[(row, col)];
                    if c != C0 {
                        acc += m * c;
                    }
                }
                acc
            })
            .collect();
        Block { mats }
    }

    /// `⟨block|op|block⟩`
    fn expectation(&self, op: &CMatrix) -> Complex64 {
        let applied = self.apply(op);
        self.mats
            .iter()
            .zip(&applied.mats)
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>())
            .sum()
    }
}

impl MpsState {
    /// Product state with bond dimension one; right-normalized.
    pub fn new_product_state(num_sites: usize, local: LocalState, config: TruncationConfig) -> Result<Self, MpsError> {
        Self::product_of(&vec![local; num_sites], config)
    }

    pub fn product_of(locals: &[LocalState], config: TruncationConfig) -> Result<Self, MpsError> {
        if locals.len() < 2 {
            return Err(MpsError::TooFewSites(locals.len()));
        }
        if config.chi_max == 0 {
            return Err(MpsError::ZeroChi);
        }
        Ok(Self {
            tensors: locals.iter().map(|l| SiteTensor::product(l.amplitudes())).collect(),
            config,
            center: 0,
            truncation_log: Vec::new(),
        })
    }

    /// Decompose a dense state by successive SVDs (subject to truncation).
    pub fn from_dense(state: &DenseState, config: TruncationConfig) -> Result<Self, MpsError> {
        let n = state.num_qubits();
        if n < 2 {
            return Err(MpsError::TooFewSites(n));
        }
        let mut mps = Self::new_product_state(n, LocalState::Zero, config)?;
        // rest: left-bond × remaining physical index (site k most significant)
        let mut rest = CMatrix::from_row_slice(1, 1 << n, state.amplitudes());
        for site in 0..n - 1 {
            let bond = rest.nrows();
            let tail = rest.ncols() / 2;
            // rows (s, left), cols tail
            let mut m = CMatrix::zeros(2 * bond, tail);
            for a in 0..bond {
                for s in 0..2 {
                    for c in 0..tail {
                        m[(s * bond + a, c)] = rest[(a, s * tail + c)];
                    }
                }
            }
            let (u, s, vt, discarded) = truncated_svd(&m, &config);
            mps.truncation_log.push(discarded);
            let keep = s.len();
            mps.tensors[site] = SiteTensor::from_left_grouped(&u);
            let mut next = vt;
            for (k, sv) in s.iter().enumerate() {
                next.row_mut(k).scale_mut(*sv);
            }
            rest = next;
            debug_assert_eq!(rest.nrows(), keep);
        }
        let last = rest; // bond × 2
        let bond = last.nrows();
        mps.tensors[n - 1] = SiteTensor {
            mats: [last.view((0, 0), (bond, 1)).into_owned(), last.view((0, 1), (bond, 1)).into_owned()],
        };
        mps.center = n - 1;
        mps.normalize_center();
        mps.move_center(0);
        Ok(mps)
    }

    pub fn num_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn config(&self) -> TruncationConfig {
        self.config
    }

    pub fn set_config(&mut self, config: TruncationConfig) {
        self.config = config;
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    /// Current orthogonality center; `0` means right-normalized.
    pub fn orthocenter(&self) -> usize {
        self.center
    }

    pub fn is_right_normalized(&self) -> bool {
        self.center == 0
    }

    /// Discarded weight of every truncating split, in application order.
    pub fn truncation_log(&self) -> &[f64] {
        &self.truncation_log
    }

    pub fn total_discarded(&self) -> f64 {
        self.truncation_log.iter().sum()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.num_sites() - 1].iter().map(|t| t.right_dim()).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn norm(&self) -> f64 {
        self.tensors[self.center].frobenius_sqr().sqrt()
    }

    fn normalize_center(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.tensors[self.center].scale(1.0 / n);
        }
    }

    /// Largest deviation of `Σ_s A^s A^s† ` from the identity over sites right
    /// of the center.
    pub fn right_normalization_error(&self) -> f64 {
        self.tensors[self.center + 1..]
            .iter()
            .map(|t| {
                let g = &t.mats[0] * t.mats[0].adjoint() + &t.mats[1] * t.mats[1].adjoint();
                (g - gates::identity(t.left_dim())).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Sweep the orthogonality center to `site` with QR steps.
    pub fn move_center(&mut self, site: usize) {
        assert!(site < self.num_sites());
        while self.center < site {
            let c = self.center;
            let (q, r) = gates::thin_qr(&self.tensors[c].left_grouped());
            self.tensors[c] = SiteTensor::from_left_grouped(&q);
            let next = &mut self.tensors[c + 1];
            next.mats = [gates::matmul(&r, &next.mats[0]), gates::matmul(&r, &next.mats[1])];
            self.center += 1;
        }
        while self.center > site {
            let c = self.center;
            let (q, r) = gates::thin_qr(&self.tensors[c].right_grouped().adjoint());
            self.tensors[c] = SiteTensor::from_right_grouped(&q.adjoint());
            let rd = r.adjoint();
            let prev = &mut self.tensors[c - 1];
            prev.mats = [gates::matmul(&prev.mats[0], &rd), gates::matmul(&prev.mats[1], &rd)];
            self.center -= 1;
        }
    }

    /// Put the state in right-normalized form (center at site 0).
    pub fn right_normalize(&mut self) {
        self.move_center(0);
    }

    fn check_span(&self, left: usize, span: usize) -> Result<(), MpsError> {
        if !(1..=3).contains(&span) || left + span > self.num_sites() {
            return Err(MpsError::Sites { left, span, num_sites: self.num_sites() });
        }
        Ok(())
    }

    fn block(&mut self, left: usize, span: usize) -> Block {
        self.move_center(left);
        let mut mats = vec![self.tensors[left].mats[0].clone(), self.tensors[left].mats[1].clone()];
        for site in left + 1..left + span {
            let t = &self.tensors[site];
            mats = mats.iter().flat_map(|m| [gates::matmul(m, &t.mats[0]), gates::matmul(m, &t.mats[1])]).collect();
        }
        Block { mats }
    }

    /// Split a block back into sites `left..left+span`, truncating each bond.
    /// Leaves the center at `left`, normalized.
    fn write_block(&mut self, mut block: Block, left: usize, span: usize) {
        let mut discarded_total = 0.0;
        for site in (left + 1..left + span).rev() {
            let half = block.mats.len() / 2;
            let (l, r) = (block.mats[0].nrows(), block.mats[0].ncols());
            // rows (p_rest, l), cols (s, r)
            let mut m = CMatrix::zeros(half * l, 2 * r);
            for p in 0..half {
                for s in 0..2 {
                    m.view_mut((p * l, s * r), (l, r)).copy_from(&block.mats[2 * p + s]);
                }
            }
            let (u, sv, vt, discarded) = truncated_svd(&m, &self.config);
            discarded_total += discarded;
            self.tensors[site] = SiteTensor::from_right_grouped(&vt);
            let keep = sv.len();
            let mut us = u;
            for (k, s) in sv.iter().enumerate() {
                us.column_mut(k).scale_mut(*s);
            }
            block.mats = (0..half).map(|p| us.view((p * l, 0), (l, keep)).into_owned()).collect();
        }
        self.tensors[left].mats = [block.mats[0].clone(), block.mats[1].clone()];
        self.center = left;
        self.normalize_center();
        if span > 1 {
            self.truncation_log.push(discarded_total);
        }
    }

    /// Apply an arbitrary operator on `span` contiguous sites, renormalize,
    /// and return the squared norm it produced (the Born weight for a Kraus
    /// operator on a normalized state).
    pub fn apply_operator(&mut self, op: &CMatrix, left: usize) -> Result<f64, MpsError> {
        let span = op.nrows().trailing_zeros() as usize;
        if op.nrows() != 1 << span || op.ncols() != op.nrows() {
            return Err(MpsError::Sites { left, span: 0, num_sites: self.num_sites() });
        }
        self.check_span(left, span)?;
        let block = self.block(left, span).apply(op);
        let weight = block.norm_sqr();
        if !(weight > 0.0) {
            return Err(MpsError::ZeroProbability(weight));
        }
        self.write_block(block, left, span);
        Ok(weight)
    }

    /// Apply a unitary on `k ∈ {1, 2, 3}` contiguous sites starting at `left`.
    pub fn apply_unitary(&mut self, gate: &CMatrix, left: usize) -> Result<(), MpsError> {
        let dev = (gate.adjoint() * gate - gates::identity(gate.nrows())).norm();
        if dev > 1e-10 {
            return Err(MpsError::NotUnitary(dev));
        }
        self.apply_operator(gate, left).map(|_| ())
    }

    /// `⟨ψ|P|ψ⟩` for a local word on `left..left+letters.len()`.
    pub fn local_expectation(&mut self, letters: &[Pauli], left: usize) -> Result<f64, MpsError> {
        self.check_span(left, letters.len())?;
        let block = self.block(left, letters.len());
        Ok(block.expectation(&gates::pauli_word(letters)).re / block.norm_sqr())
    }

    /// Weak measurement with a Born-rule outcome drawn from `rng`.
    pub fn weak_measure<R: Rng + ?Sized>(
        &mut self,
        spec: &WeakMeasurementSpec,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, MpsError> {
        let q_plus = self.weak_probability(spec)?;
        let plus = rng.random::<f64>() < q_plus;
        self.weak_measure_with_outcome(spec, plus)
    }

    /// `q_+ = ½[1 + tanh(2β)⟨P⟩]`
    pub fn weak_probability(&mut self, spec: &WeakMeasurementSpec) -> Result<f64, MpsError> {
        if !(spec.beta >= 0.0) {
            return Err(MpsError::NegativeBeta(spec.beta));
        }
        let ev = self.local_expectation(spec.pauli_op.letters(), spec.left_site)?;
        Ok(0.5 * (1.0 + (2.0 * spec.beta).tanh() * ev))
    }

    /// Apply the Kraus operator of a prescribed outcome; returns its Born probability.
    pub fn weak_measure_with_outcome(
        &mut self,
        spec: &WeakMeasurementSpec,
        plus: bool,
    ) -> Result<MeasurementOutcome, MpsError> {
        let q_plus = self.weak_probability(spec)?;
        let prob = if plus { q_plus } else { 1.0 - q_plus };
        if prob < ZERO_PROBABILITY {
            return Err(MpsError::ZeroProbability(prob));
        }
        let kraus = gates::weak_kraus(spec.pauli_op.letters(), spec.beta, plus);
        self.apply_operator(&kraus, spec.left_site)?;
        Ok(MeasurementOutcome { plus, prob })
    }

    /// Projective measurement of a local word; projects with `(I ± P)/2`.
    pub fn projective_measure<R: Rng + ?Sized>(
        &mut self,
        letters: &[Pauli],
        left: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, MpsError> {
        let ev = self.local_expectation(letters, left)?;
        let mut p_plus = 0.5 * (1.0 + ev);
        if p_plus < ZERO_PROBABILITY {
            p_plus = 0.0;
        } else if p_plus > 1.0 - ZERO_PROBABILITY {
            p_plus = 1.0;
        }
        let plus = rng.random::<f64>() < p_plus;
        self.project(letters, left, plus)
    }

    /// Project onto a prescribed eigenspace; returns its Born probability.
    pub fn project(&mut self, letters: &[Pauli], left: usize, plus: bool) -> Result<MeasurementOutcome, MpsError> {
        let proj = gates::projector(letters, plus);
        let prob = self.apply_operator_checked(&proj, left)?;
        Ok(MeasurementOutcome { plus, prob })
    }

    fn apply_operator_checked(&mut self, op: &CMatrix, left: usize) -> Result<f64, MpsError> {
        self.check_span(left, op.nrows().trailing_zeros() as usize)?;
        let span = op.nrows().trailing_zeros() as usize;
        let block = self.block(left, span).apply(op);
        let weight = block.norm_sqr();
        if weight < ZERO_PROBABILITY {
            return Err(MpsError::ZeroProbability(weight));
        }
        self.write_block(block, left, span);
        Ok(weight)
    }

    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        op: MeasuredPauli,
        left: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, MpsError> {
        self.projective_measure(op.letters(), left, rng)
    }

    /// Squared Schmidt coefficients across the bond between sites `cut − 1`
    /// and `cut` (the subsystem is the leftmost `cut` sites).
    pub fn schmidt_spectrum(&mut self, cut: usize) -> Result<Vec<f64>, MpsError> {
        if cut == 0 || cut >= self.num_sites() {
            return Err(MpsError::Cut { cut, num_sites: self.num_sites() });
        }
        self.move_center(cut - 1);
        let sv = gates::singular_values(&self.tensors[cut - 1].left_grouped());
        let mut w: Vec<f64> = sv.iter().filter(|&&s| s > 1e-12).map(|s| s * s).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        Ok(w)
    }

    pub fn entanglement_entropy(&mut self, cut: usize, order: RenyiOrder) -> Result<EntropyValue, MpsError> {
        let dist = ProbDist::from_unnormalized(self.schmidt_spectrum(cut)?)?;
        Ok(renyi_entropy(&dist, order))
    }

    /// `⟨ψ|σ|ψ⟩ / ⟨ψ|ψ⟩` for a full-length word, by transfer-matrix contraction.
    pub fn pauli_expectation(&self, pauli: &PauliString) -> Result<f64, MpsError> {
        if pauli.len() != self.num_sites() {
            return Err(MpsError::WordLength { got: pauli.len(), expected: self.num_sites() });
        }
        let mut env = CMatrix::from_element(1, 1, C1);
        let mut norm = CMatrix::from_element(1, 1, C1);
        for (t, &p) in self.tensors.iter().zip(pauli.letters()) {
            env = transfer(&env, t, p);
            norm = transfer(&norm, t, Pauli::I);
        }
        let phase = Complex64::i().powu(pauli.phase() as u32);
        Ok((env[(0, 0)] * phase).re / norm[(0, 0)].re)
    }

    /// Contract into a dense vector (small systems only).
    pub fn to_dense(&self) -> Result<DenseState, MpsError> {
        let n = self.num_sites();
        if n > crate::oracle::MAX_QUBITS {
            return Err(OracleError::Capacity { num_qubits: n, max: crate::oracle::MAX_QUBITS }.into());
        }
        let mut rows: Vec<CMatrix> = vec![CMatrix::from_element(1, 1, C1)];
        for t in &self.tensors {
            rows = rows.iter().flat_map(|v| [v * &t.mats[0], v * &t.mats[1]]).collect();
        }
        let amps: Vec<Complex64> = rows.iter().map(|m| m[(0, 0)]).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok(DenseState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())?)
    }
}

/// `E ← Σ_{s',s} σ_{s's} A^{s'†} E A^s` with `E` indexed `[bra, ket]`.
pub(crate) fn transfer(env: &CMatrix, t: &SiteTensor, p: Pauli) -> CMatrix {
    let m = p.matrix();
    let mut out = CMatrix::zeros(t.right_dim(), t.right_dim());
    for s in 0..2 {
        let ket = env * &t.mats[s];
        for sp in 0..2 {
            let c = m[sp][s];
            if c != C0 {
                out += t.mats[sp].adjoint() * &ket * c;
            }
        }
    }
    out
}

/// SVD keeping at most `chi_max` values above the numerical rank threshold
/// (and the optional relative cutoff). Returns `(U, s, V†, discarded weight)`
/// with the discarded weight relative to the total `Σ s²`.
fn truncated_svd(m: &CMatrix, config: &TruncationConfig) -> (CMatrix, Vec<f64>, CMatrix, f64) {
    let (rows, cols) = m.shape();
    let (u, s, vt) = gates::thin_svd(m);
    let smax = s[0];
    let total: f64 = s.iter().map(|x| x * x).sum();
    let rank_tol = smax * rows.max(cols) as f64 * f64::EPSILON;
    let rel = config.cutoff.map(|c| c * smax).unwrap_or(0.0);
    let floor = rank_tol.max(rel);
    let keep = s.iter().take(config.chi_max).take_while(|&&x| x > floor).count().max(1);
    let kept_weight: f64 = s[..keep].iter().map(|x| x * x).sum();
    let discarded = if total > 0.0 { ((total - kept_weight) / total).max(0.0) } else { 0.0 };
    let u_k = u.columns(0, keep).into_owned();
    let vt_k = vt.rows(0, keep).into_owned();
    (u_k, s[..keep].to_vec(), vt_k, discarded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{RotationAxis, SelfDualGate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn cfg(chi: usize) -> TruncationConfig {
        TruncationConfig::new(chi)
    }

    fn bell() -> MpsState {
        let mut s = MpsState::new_product_state(2, LocalState::Zero, cfg(8)).unwrap();
        s.apply_unitary(&gates::hadamard(), 0).unwrap();
        s.apply_unitary(&gates::cnot(), 0).unwrap();
        s
    }

    fn random_circuit(n: usize, depth: usize, seed: u64, chi: usize) -> (MpsState, DenseState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mps = MpsState::new_product_state(n, LocalState::Zero, cfg(chi)).unwrap();
        let mut dense = DenseState::product(n, LocalState::Zero).unwrap();
        for _ in 0..depth {
            for q in 0..n {
                // generic single-qubit rotation
                let (a, b) = (rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0);
                let rx = gates::identity(2) * Complex64::new(a.cos(), 0.0)
                    + gates::single(Pauli::X) * Complex64::new(0.0, a.sin());
                let rz = gates::identity(2) * Complex64::new(b.cos(), 0.0)
                    + gates::single(Pauli::Z) * Complex64::new(0.0, b.sin());
                let u = rz * rx;
                mps.apply_unitary(&u, q).unwrap();
                dense.apply(&u, &[q], false).unwrap();
            }
            let left = rng.random_range(0..n - 1);
            mps.apply_unitary(&gates::cnot(), left).unwrap();
            dense.apply(&gates::cnot(), &[left, left + 1], false).unwrap();
        }
        (mps, dense)
    }

    #[test]
    fn product_states() {
        let s = MpsState::new_product_state(4, LocalState::Zero, cfg(4)).unwrap();
        let d = s.to_dense().unwrap();
        assert!((d.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let p = MpsState::new_product_state(4, LocalState::Plus, cfg(4)).unwrap();
        for a in p.to_dense().unwrap().amplitudes() {
            assert!((a.re - 0.25).abs() < 1e-15);
        }
        assert!(matches!(
            MpsState::new_product_state(1, LocalState::Zero, cfg(4)),
            Err(MpsError::TooFewSites(1))
        ));
    }

    #[test]
    fn diagonal_gate_on_eigenstate_is_a_phase() {
        let mut s = MpsState::new_product_state(3, LocalState::Zero, cfg(4)).unwrap();
        let before = s.to_dense().unwrap();
        s.apply_unitary(&SelfDualGate { axis: RotationAxis::Z, dagger: false }.matrix(), 1).unwrap();
        assert!((s.to_dense().unwrap().fidelity(&before) - 1.0).abs() < 1e-14);
        assert_eq!(s.entanglement_entropy(1, RenyiOrder::SHANNON).unwrap().nats(), 0.0);
    }

    #[test]
    fn xx_rotation_entangles_two_qubits() {
        let mut s = MpsState::new_product_state(2, LocalState::Zero, cfg(4)).unwrap();
        s.apply_unitary(&SelfDualGate { axis: RotationAxis::XX, dagger: false }.matrix(), 0).unwrap();
        let d = s.to_dense().unwrap();
        let mut expect = DenseState::product(2, LocalState::Zero).unwrap();
        expect.apply(&gates::quarter_rotation(&[Pauli::X, Pauli::X], false), &[0, 1], false).unwrap();
        assert!((d.fidelity(&expect) - 1.0).abs() < 1e-12);
        let a = d.amplitudes();
        assert!((a[0].norm() - 0.5f64.sqrt()).abs() < 1e-12 && (a[3] - a[0] * Complex64::i()).norm() < 1e-12);
        assert!((s.entanglement_entropy(1, RenyiOrder::SHANNON).unwrap().nats() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn gate_then_inverse_is_identity() {
        let (mut mps, _) = random_circuit(5, 4, 3, 32);
        let before = mps.to_dense().unwrap();
        for g in SelfDualGate::ensemble() {
            mps.apply_unitary(&g.matrix(), 1).unwrap();
            mps.apply_unitary(&g.inverse().matrix(), 1).unwrap();
        }
        assert!((mps.to_dense().unwrap().fidelity(&before) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_unitary_and_bad_sites() {
        let mut s = MpsState::new_product_state(3, LocalState::Zero, cfg(4)).unwrap();
        assert!(matches!(
            s.apply_unitary(&gates::projector(&[Pauli::Z], true), 0),
            Err(MpsError::NotUnitary(_))
        ));
        assert!(s.apply_unitary(&gates::cnot(), 2).is_err());
        assert!(s.entanglement_entropy(3, RenyiOrder::SHANNON).is_err());
        assert!(s.entanglement_entropy(0, RenyiOrder::SHANNON).is_err());
    }

    #[test]
    fn weak_measurement_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // ⟨Z⟩ = 0 on |+⟩
        let mut s = MpsState::new_product_state(3, LocalState::Plus, cfg(4)).unwrap();
        let spec = WeakMeasurementSpec { pauli_op: MeasuredPauli::ZI, beta: 0.7, left_site: 0 };
        assert!((s.weak_probability(&spec).unwrap() - 0.5).abs() < 1e-14);
        // β = 0 is the identity
        let before = s.to_dense().unwrap();
        let zero = WeakMeasurementSpec { beta: 0.0, ..spec };
        let out = s.weak_measure(&zero, &mut rng).unwrap();
        assert!((out.prob - 0.5).abs() < 1e-14);
        assert!((s.to_dense().unwrap().fidelity(&before) - 1.0).abs() < 1e-14);
        // +1 eigenstate, strong measurement
        let mut z = MpsState::new_product_state(3, LocalState::Zero, cfg(4)).unwrap();
        let strong = WeakMeasurementSpec { beta: 20.0, ..spec };
        let q = z.weak_probability(&strong).unwrap();
        assert!(q > 1.0 - 1e-12);
        let out = z.weak_measure(&strong, &mut rng).unwrap();
        assert!(out.plus);
        assert!((z.local_expectation(&[Pauli::Z], 0).unwrap() - 1.0).abs() < 1e-12);
        let neg = WeakMeasurementSpec { beta: -0.1, ..spec };
        assert!(matches!(z.weak_measure(&neg, &mut rng), Err(MpsError::NegativeBeta(_))));
    }

    #[test]
    fn weak_measurement_matches_dense_kraus() {
        let (mut mps, mut dense) = random_circuit(4, 3, 11, 16);
        let spec = WeakMeasurementSpec { pauli_op: MeasuredPauli::XX, beta: 0.8, left_site: 1 };
        let q = mps.weak_probability(&spec).unwrap();
        let ev = dense.expectation(&PauliString::sparse(4, &[(1, Pauli::X), (2, Pauli::X)]));
        assert!((q - 0.5 * (1.0 + (1.6f64).tanh() * ev)).abs() < 1e-12);
        let out = mps.weak_measure_with_outcome(&spec, false).unwrap();
        let w = dense.apply(&gates::weak_kraus(MeasuredPauli::XX.letters(), 0.8, false), &[1, 2], true).unwrap();
        // Born weight of K_- with the 1/(2 cosh 2β) normalization
        assert!((out.prob - w / (2.0 * (1.6f64).cosh())).abs() < 1e-12);
        assert!((mps.to_dense().unwrap().fidelity(&dense) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projective_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut z = MpsState::new_product_state(2, LocalState::Zero, cfg(4)).unwrap();
        let out = z.measure_pauli(MeasuredPauli::Z, 0, &mut rng).unwrap();
        assert!(out.plus && (out.prob - 1.0).abs() < 1e-12);
        let mut counts = [0usize; 2];
        for _ in 0..400 {
            let mut p = MpsState::new_product_state(2, LocalState::Plus, cfg(4)).unwrap();
            let out = p.measure_pauli(MeasuredPauli::Z, 1, &mut rng).unwrap();
            counts[out.plus as usize] += 1;
            let ez = p.local_expectation(&[Pauli::Z], 1).unwrap();
            assert!((ez - if out.plus { 1.0 } else { -1.0 }).abs() < 1e-12);
        }
        assert!(counts[0] > 150 && counts[1] > 150);
        let mut b = bell();
        let out = b.measure_pauli(MeasuredPauli::XX, 0, &mut rng).unwrap();
        assert!(out.plus && (out.prob - 1.0).abs() < 1e-12);
        assert!(matches!(b.project(&[Pauli::X, Pauli::X], 0, false), Err(MpsError::ZeroProbability(_))));
    }

    #[test]
    fn pauli_expectations() {
        let z = MpsState::new_product_state(3, LocalState::Zero, cfg(4)).unwrap();
        assert!((z.pauli_expectation(&"ZII".parse().unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!(z.pauli_expectation(&"XII".parse().unwrap()).unwrap().abs() < 1e-15);
        assert!((bell().pauli_expectation(&"XX".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((bell().pauli_expectation(&"YY".parse().unwrap()).unwrap() + 1.0).abs() < 1e-12);
        let (mps, dense) = random_circuit(5, 5, 9, 32);
        for code in [0usize, 7, 99, 513, 1000] {
            let w = crate::oracle::word_from_code(code, 5);
            assert!((mps.pauli_expectation(&w).unwrap() - dense.expectation(&w)).abs() < 1e-12);
        }
    }

    #[test]
    fn entanglement_matches_oracle_and_canonical_forms_hold() {
        let (mut mps, dense) = random_circuit(6, 8, 21, 64);
        for cut in 1..6 {
            for n in [RenyiOrder::SHANNON, RenyiOrder::TWO] {
                let a = mps.entanglement_entropy(cut, n).unwrap().nats();
                let b = dense.entanglement_entropy(cut, n).unwrap().nats();
                assert!((a - b).abs() < 1e-6, "cut {cut}: {a} vs {b}");
            }
        }
        mps.right_normalize();
        assert!(mps.right_normalization_error() < 1e-8);
        assert!((mps.norm() - 1.0).abs() < 1e-8);
        assert!((mps.to_dense().unwrap().fidelity(&dense) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn from_dense_roundtrip() {
        let (_, dense) = random_circuit(6, 6, 33, 64);
        let mps = MpsState::from_dense(&dense, cfg(64)).unwrap();
        assert!(mps.is_right_normalized());
        assert!(mps.right_normalization_error() < 1e-10);
        assert!((mps.to_dense().unwrap().fidelity(&dense) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bond_cap_and_truncation_monotonicity() {
        let mut totals = Vec::new();
        for chi in [1, 2, 4, 8, 32] {
            let (mps, _) = random_circuit(8, 10, 4, chi);
            assert!(mps.max_bond() <= chi);
            totals.push(mps.total_discarded());
        }
        for w in totals.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{totals:?}");
        }
        assert!(totals[4] < 1e-20);
    }
}
