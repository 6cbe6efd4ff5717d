//! Perfect sampling from a right-normalized MPS.
//!
//! Pauli strings are drawn from `Π(σ) = ⟨ψ|σ|ψ⟩² / 2^L` and bitstrings from
//! `|⟨z|ψ⟩|²`, one site at a time from the left. Every estimator is built on
//! log-weights so that tiny probabilities at large `L` never underflow.
//!
//! Samples are drawn in fixed-size blocks, each with its own ChaCha stream
//! derived from a single seed taken from the caller's RNG, so the result does
//! not depend on how many worker threads run the blocks.

use std::f64::consts::LN_2;
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use faer::Scale;

use super::{MpsError, MpsState, SiteTensor};
use crate::entropy::RenyiOrder;
use crate::gates::CMatrix;
use crate::oracle::Basis;
use crate::pauli::{Pauli, PauliString};

pub const MIN_SAMPLES: usize = 100;
const BLOCK: usize = 64;
/// Allowed drift of the conditional distribution from unit sum.
const CONDITIONAL_TOLERANCE: f64 = 1e-6;
/// Fraction of rejected samples above which the result carries a warning.
const REJECT_WARNING: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SampledPauli {
    pub string: PauliString,
    /// `Π(σ)`
    pub weight_prob: f64,
    pub log_prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledBitstring {
    pub bits: Vec<bool>,
    pub prob: f64,
    pub log_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub rejected: usize,
    pub warning: Option<String>,
}

fn require_ready(state: &MpsState, n: usize) -> Result<(), MpsError> {
    if !state.is_right_normalized() {
        return Err(MpsError::NotRightNormalized(state.orthocenter()));
    }
    if n < MIN_SAMPLES {
        return Err(MpsError::TooFewSamples { got: n, min: MIN_SAMPLES });
    }
    Ok(())
}

type FMat = faer::Mat<Complex64>;

/// A site tensor as faer matrices, with adjoints.
struct Site {
    a: [FMat; 2],
    ad: [FMat; 2],
}

fn to_faer(m: &CMatrix) -> FMat {
    FMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

fn sites(tensors: &[SiteTensor]) -> Vec<Site> {
    tensors
        .iter()
        .map(|t| {
            let a = [to_faer(t.matrix(0)), to_faer(t.matrix(1))];
            let ad = [a[0].adjoint().to_owned(), a[1].adjoint().to_owned()];
            Site { a, ad }
        })
        .collect()
}

fn unit() -> FMat {
    FMat::from_fn(1, 1, |_, _| Complex64::new(1.0, 0.0))
}

fn scaled(m: &FMat, f: f64) -> FMat {
    m * Scale(Complex64::new(f, 0.0))
}

/// `E ← Σ_{s',s} σ_{s's} A^{s'†} E A^s` with `E` indexed `[bra, ket]`.
fn transfer(env: &FMat, t: &Site, p: Pauli) -> FMat {
    let m = p.matrix();
    let dim = t.a[0].ncols();
    let mut out = FMat::zeros(dim, dim);
    for s in 0..2 {
        let ket = env * &t.a[s];
        for sp in 0..2 {
            let c = m[sp][s];
            if c != Complex64::new(0.0, 0.0) {
                out += &t.ad[sp] * &ket * Scale(c);
            }
        }
    }
    out
}

/// Identity-transfer environments `F_k` for `k = 0..=L`.
fn identity_envs(sites: &[Site]) -> Vec<FMat> {
    let mut envs = vec![unit()];
    for t in sites {
        let next = transfer(envs.last().unwrap(), t, Pauli::I);
        envs.push(next);
    }
    envs
}

/// One Pauli draw; `cut_traces[k]` receives `ln t_A²` at `cuts[k]`.
fn draw_pauli<R: Rng + ?Sized>(
    sites: &[Site],
    rng: &mut R,
    cuts: &[usize],
    cut_traces: &mut [f64],
) -> Result<(Vec<Pauli>, f64), MpsError> {
    let mut env = unit();
    let mut log_pi = 0.0;
    let mut letters = Vec::with_capacity(sites.len());
    let i = Complex64::i();
    for (site, t) in sites.iter().enumerate() {
        if let Some(k) = cuts.iter().position(|&c| c == site) {
            let tr: Complex64 = (0..env.nrows()).map(|d| env[(d, d)]).sum();
            cut_traces[k] = 2.0 * tr.norm().ln() + site as f64 * LN_2 + log_pi;
        }
        let ket = [&env * &t.a[0], &env * &t.a[1]];
        let (m00, m01) = (&t.ad[0] * &ket[0], &t.ad[0] * &ket[1]);
        let (m10, m11) = (&t.ad[1] * &ket[0], &t.ad[1] * &ket[1]);
        let cands = [&m00 + &m11, &m01 + &m10, (&m10 - &m01) * Scale(i), &m00 - &m11];
        let probs: Vec<f64> = cands.iter().map(|e| 0.5 * e.squared_norm_l2()).collect();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > CONDITIONAL_TOLERANCE {
            return Err(MpsError::Inconsistent { site, sum });
        }
        let u = rng.random::<f64>() * sum;
        let mut acc = 0.0;
        let mut pick = 3;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > 0.0 {
                pick = k;
                break;
            }
        }
        while probs[pick] <= 0.0 {
            pick -= 1;
        }
        letters.push(Pauli::ALL[pick]);
        log_pi += (probs[pick] / sum).ln();
        env = scaled(&cands[pick], 1.0 / (2.0 * probs[pick]).sqrt());
    }
    Ok((letters, log_pi))
}

/// `ln Tr(ρ_B σ_B)²` with `B = cut..L`, starting from the identity env at `cut`.
fn log_suffix_trace_sqr(sites: &[Site], start: &FMat, letters: &[Pauli], cut: usize) -> f64 {
    let mut env = start.clone();
    let mut log_scale = 0.0;
    for (t, &p) in sites[cut..].iter().zip(&letters[cut..]) {
        env = transfer(&env, t, p);
        let n = env.norm_l2();
        if n == 0.0 {
            return f64::NEG_INFINITY;
        }
        env = scaled(&env, 1.0 / n);
        log_scale += n.ln();
    }
    2.0 * (env[(0, 0)].norm().ln() + log_scale)
}

/// Draw one Pauli string from `Π(σ)`.
pub fn sample_pauli_string<R: Rng + ?Sized>(state: &MpsState, rng: &mut R) -> Result<SampledPauli, MpsError> {
    if !state.is_right_normalized() {
        return Err(MpsError::NotRightNormalized(state.orthocenter()));
    }
    let (letters, log_prob) = draw_pauli(&sites(state.tensors()), rng, &[], &mut [])?;
    Ok(SampledPauli { string: PauliString::new(letters), weight_prob: log_prob.exp(), log_prob })
}

/// `Tr(ρ_A σ_A)` for the letters of `pauli` inside `range`, identity elsewhere.
pub fn restricted_pauli_trace(state: &MpsState, pauli: &PauliString, range: Range<usize>) -> Result<f64, MpsError> {
    if pauli.len() != state.num_sites() {
        return Err(MpsError::WordLength { got: pauli.len(), expected: state.num_sites() });
    }
    let letters = pauli
        .letters()
        .iter()
        .enumerate()
        .map(|(k, &p)| if range.contains(&k) { p } else { Pauli::I })
        .collect();
    state.pauli_expectation(&PauliString::new(letters))
}

fn derive_seed<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random::<u64>()
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(block as u64);
    r
}

/// Log-weights of a batch of Pauli samples, reusable for several estimators.
#[derive(Clone, Debug)]
pub struct PauliBatch {
    num_sites: usize,
    cuts: Vec<usize>,
    log_pi: Vec<f64>,
    /// Per cut: `(ln t_A², ln t_B²)` per sample.
    partial: Vec<Vec<(f64, f64)>>,
}

impl PauliBatch {
    /// Draw `n` samples and record the reduced traces at each of `cuts`.
    pub fn draw<R: Rng + ?Sized>(state: &MpsState, n: usize, cuts: &[usize], rng: &mut R) -> Result<Self, MpsError> {
        require_ready(state, n)?;
        let num_sites = state.num_sites();
        for &c in cuts {
            if c == 0 || c >= num_sites {
                return Err(MpsError::Cut { cut: c, num_sites });
            }
        }
        let sites = sites(state.tensors());
        let envs = if cuts.is_empty() { Vec::new() } else { identity_envs(&sites) };
        let seed = derive_seed(rng);
        let blocks: Vec<_> = (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut r = block_rng(seed, b);
                let size = BLOCK.min(n - b * BLOCK);
                let mut out = Vec::with_capacity(size);
                for _ in 0..size {
                    let mut ta = vec![0.0; cuts.len()];
                    let (letters, log_pi) = draw_pauli(&sites, &mut r, cuts, &mut ta)?;
                    let pairs: Vec<(f64, f64)> = cuts
                        .iter()
                        .zip(&ta)
                        .map(|(&c, &a)| (a, log_suffix_trace_sqr(&sites, &envs[c], &letters, c)))
                        .collect();
                    out.push((log_pi, pairs));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, MpsError>>()?;
        let mut log_pi = Vec::with_capacity(n);
        let mut partial = vec![Vec::with_capacity(n); cuts.len()];
        for (lp, pairs) in blocks.into_iter().flatten() {
            log_pi.push(lp);
            for (k, p) in pairs.into_iter().enumerate() {
                partial[k].push(p);
            }
        }
        Ok(Self { num_sites, cuts: cuts.to_vec(), log_pi, partial })
    }

    pub fn len(&self) -> usize {
        self.log_pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_pi.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_pi
    }

    /// Stabilizer Rényi entropy `M_n` for `n ∈ {1, 2}`.
    pub fn sre(&self, order: RenyiOrder) -> Result<EstimatorResult, MpsError> {
        let offset = -(self.num_sites as f64) * LN_2;
        let (xs, rejected) = finite(self.log_pi.iter().copied());
        if order.is_shannon() {
            let (m, se) = mean_stderr(&xs);
            Ok(result(offset - m, se, self.len(), rejected))
        } else if order.value() == 2.0 {
            let (v, se) = jackknife(&[&xs], |lm| offset - lm[0]);
            Ok(result(v, se, self.len(), rejected))
        } else {
            Err(MpsError::UnsupportedOrder(order.value()))
        }
    }

    /// Bipartite stabilizer mutual information at `cut`.
    pub fn bsmi(&self, cut: usize) -> Result<EstimatorResult, MpsError> {
        let k = self
            .cuts
            .iter()
            .position(|&c| c == cut)
            .ok_or(MpsError::Cut { cut, num_sites: self.num_sites })?;
        let l_ln2 = self.num_sites as f64 * LN_2;
        let mut a = Vec::with_capacity(self.len());
        let mut b = Vec::with_capacity(self.len());
        let mut c = Vec::with_capacity(self.len());
        let mut rejected = 0;
        for (&lp, &(ta, tb)) in self.log_pi.iter().zip(&self.partial[k]) {
            let t2 = l_ln2 + lp;
            let (x, y) = (ta + tb - t2, 2.0 * (ta + tb) - t2);
            if lp.is_finite() && !x.is_nan() && !y.is_nan() {
                a.push(x);
                b.push(y);
                c.push(lp);
            } else {
                rejected += 1;
            }
        }
        let (v, se) = jackknife(&[&a, &b, &c], |lm| -lm[0] + lm[1] - l_ln2 - lm[2]);
        Ok(result(v, se, self.len(), rejected))
    }
}

/// One bitstring draw; `prefix[k]` receives `ln p(z_A)` at `cuts[k]`.
/// Right normalization makes the conditional weights `‖v A^s‖²`.
fn draw_bits<R: Rng + ?Sized>(
    sites: &[Site],
    rng: &mut R,
    cuts: &[usize],
    prefix: &mut [f64],
) -> Result<(Vec<bool>, f64), MpsError> {
    let mut v = unit();
    let mut log_p = 0.0;
    let mut bits = Vec::with_capacity(sites.len());
    for (site, t) in sites.iter().enumerate() {
        if let Some(k) = cuts.iter().position(|&c| c == site) {
            prefix[k] = log_p;
        }
        let cand = [&v * &t.a[0], &v * &t.a[1]];
        let probs = [cand[0].squared_norm_l2(), cand[1].squared_norm_l2()];
        let sum = probs[0] + probs[1];
        if (sum - 1.0).abs() > CONDITIONAL_TOLERANCE {
            return Err(MpsError::Inconsistent { site, sum });
        }
        let one = rng.random::<f64>() * sum >= probs[0] && probs[1] > 0.0 || probs[0] <= 0.0;
        let s = one as usize;
        bits.push(one);
        log_p += (probs[s] / sum).ln();
        v = scaled(&cand[s], 1.0 / probs[s].sqrt());
    }
    Ok((bits, log_p))
}

/// `ln p(z_B)` for `B = cut..L` as `r† F r` with `r` the right product of
/// the suffix tensors and `F` the identity env at `cut`.
fn log_suffix_prob(sites: &[Site], env: &FMat, bits: &[bool], cut: usize) -> f64 {
    let mut r = unit();
    let mut log_scale = 0.0;
    for (t, &b) in sites[cut..].iter().zip(&bits[cut..]).rev() {
        r = &t.a[b as usize] * &r;
        let n = r.norm_l2();
        if n == 0.0 {
            return f64::NEG_INFINITY;
        }
        r = scaled(&r, 1.0 / n);
        log_scale += 2.0 * n.ln();
    }
    let p = (r.adjoint() * env * &r)[(0, 0)].re;
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    p.ln() + log_scale
}

/// Site tensors expressed in the measurement basis.
fn basis_tensors(state: &MpsState, basis: Basis) -> Vec<SiteTensor> {
    match basis {
        Basis::Z => state.tensors().to_vec(),
        Basis::X => state
            .tensors()
            .iter()
            .map(|t| {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                SiteTensor { mats: [(t.matrix(0) + t.matrix(1)) * h, (t.matrix(0) - t.matrix(1)) * h] }
            })
            .collect(),
    }
}

/// Draw one bitstring from `|⟨z|ψ⟩|²` in the computational basis.
pub fn sample_bitstring<R: Rng + ?Sized>(state: &MpsState, rng: &mut R) -> Result<SampledBitstring, MpsError> {
    if !state.is_right_normalized() {
        return Err(MpsError::NotRightNormalized(state.orthocenter()));
    }
    let (bits, log_prob) = draw_bits(&sites(state.tensors()), rng, &[], &mut [])?;
    Ok(SampledBitstring { bits, prob: log_prob.exp(), log_prob })
}

#[derive(Clone, Debug)]
pub struct BitstringBatch {
    num_sites: usize,
    cuts: Vec<usize>,
    log_p: Vec<f64>,
    /// Per cut: `(ln p(z_A), ln p(z_B))` per sample.
    partial: Vec<Vec<(f64, f64)>>,
}

impl BitstringBatch {
    pub fn draw<R: Rng + ?Sized>(
        state: &MpsState,
        n: usize,
        cuts: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<Self, MpsError> {
        require_ready(state, n)?;
        let num_sites = state.num_sites();
        for &c in cuts {
            if c == 0 || c >= num_sites {
                return Err(MpsError::Cut { cut: c, num_sites });
            }
        }
        let sites = sites(&basis_tensors(state, basis));
        let envs = if cuts.is_empty() { Vec::new() } else { identity_envs(&sites) };
        let seed = derive_seed(rng);
        let blocks: Vec<_> = (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut r = block_rng(seed, b);
                let size = BLOCK.min(n - b * BLOCK);
                let mut out = Vec::with_capacity(size);
                for _ in 0..size {
                    let mut pa = vec![0.0; cuts.len()];
                    let (bits, log_p) = draw_bits(&sites, &mut r, cuts, &mut pa)?;
                    let pairs: Vec<(f64, f64)> = cuts
                        .iter()
                        .zip(&pa)
                        .map(|(&c, &a)| (a, log_suffix_prob(&sites, &envs[c], &bits, c)))
                        .collect();
                    out.push((log_p, pairs));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, MpsError>>()?;
        let mut log_p = Vec::with_capacity(n);
        let mut partial = vec![Vec::with_capacity(n); cuts.len()];
        for (lp, pairs) in blocks.into_iter().flatten() {
            log_p.push(lp);
            for (k, p) in pairs.into_iter().enumerate() {
                partial[k].push(p);
            }
        }
        Ok(Self { num_sites, cuts: cuts.to_vec(), log_p, partial })
    }

    pub fn len(&self) -> usize {
        self.log_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_p.is_empty()
    }

    /// Shannon participation entropy `⟨−ln p(z)⟩`.
    pub fn pe(&self) -> EstimatorResult {
        let (xs, rejected) = finite(self.log_p.iter().map(|lp| -lp));
        let (m, se) = mean_stderr(&xs);
        result(m, se, self.len(), rejected)
    }

    /// `⟨ln p(z) − ln p(z_A) − ln p(z_B)⟩` at `cut`.
    pub fn bpmi(&self, cut: usize) -> Result<EstimatorResult, MpsError> {
        let k = self
            .cuts
            .iter()
            .position(|&c| c == cut)
            .ok_or(MpsError::Cut { cut, num_sites: self.num_sites })?;
        let (xs, rejected) =
            finite(self.log_p.iter().zip(&self.partial[k]).map(|(lp, (pa, pb))| lp - pa - pb));
        let (m, se) = mean_stderr(&xs);
        Ok(result(m, se, self.len(), rejected))
    }
}

pub fn estimate_sre<R: Rng + ?Sized>(
    state: &MpsState,
    order: RenyiOrder,
    n: usize,
    rng: &mut R,
) -> Result<EstimatorResult, MpsError> {
    if !(order.is_shannon() || order.value() == 2.0) {
        return Err(MpsError::UnsupportedOrder(order.value()));
    }
    PauliBatch::draw(state, n, &[], rng)?.sre(order)
}

pub fn estimate_bsmi<R: Rng + ?Sized>(
    state: &MpsState,
    cut: usize,
    n: usize,
    rng: &mut R,
) -> Result<EstimatorResult, MpsError> {
    PauliBatch::draw(state, n, &[cut], rng)?.bsmi(cut)
}

pub fn estimate_pe<R: Rng + ?Sized>(state: &MpsState, n: usize, rng: &mut R) -> Result<EstimatorResult, MpsError> {
    Ok(BitstringBatch::draw(state, n, &[], Basis::Z, rng)?.pe())
}

pub fn estimate_bpmi<R: Rng + ?Sized>(
    state: &MpsState,
    cut: usize,
    n: usize,
    rng: &mut R,
) -> Result<EstimatorResult, MpsError> {
    BitstringBatch::draw(state, n, &[cut], Basis::Z, rng)?.bpmi(cut)
}

fn finite(values: impl Iterator<Item = f64>) -> (Vec<f64>, usize) {
    let mut rejected = 0;
    let xs = values
        .filter(|v| {
            let ok = v.is_finite();
            rejected += !ok as usize;
            ok
        })
        .collect();
    (xs, rejected)
}

fn result(value: f64, stderr: f64, n_samples: usize, rejected: usize) -> EstimatorResult {
    let mut warning = None;
    if rejected as f64 > REJECT_WARNING * n_samples as f64 {
        warning = Some(format!("{rejected} of {n_samples} samples rejected"));
    } else if !value.is_finite() || !stderr.is_finite() {
        warning = Some("estimate is not finite".to_string());
    }
    EstimatorResult { value, stderr, n_samples, rejected, warning }
}

pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `ln mean(exp(v))` over the full sample and with each sample left out.
fn log_mean_exp_loo(v: &[f64]) -> (f64, Vec<f64>) {
    let n = v.len();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return (m, vec![m; n]);
    }
    let w: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    // prefix/suffix sums avoid cancellation when one sample dominates
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + w[k];
    }
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + w[k];
    }
    let full = (prefix[n] / n as f64).ln() + m;
    let loo = (0..n)
        .map(|j| ((prefix[j] + suffix[j + 1]) / (n - 1) as f64).ln() + m)
        .collect();
    (full, loo)
}

/// Jackknife of a function of several log-mean-exps over aligned samples.
fn jackknife(streams: &[&[f64]], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let n = streams[0].len();
    if n < 2 {
        return (f64::NAN, f64::NAN);
    }
    let parts: Vec<(f64, Vec<f64>)> = streams.iter().map(|s| log_mean_exp_loo(s)).collect();
    let full: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let value = f(&full);
    let loo: Vec<f64> = (0..n)
        .map(|j| f(&parts.iter().map(|p| p.1[j]).collect::<Vec<_>>()))
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (value, ((n - 1) as f64 / n as f64 * var).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{self, LocalState};
    use crate::mps::TruncationConfig;
    use crate::oracle::{code_from_word, DenseState};
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_dense(n: usize, seed: u64) -> DenseState {
        let mut r = rng(seed);
        let amps = (0..1 << n)
            .map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
            .collect::<Vec<_>>();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        DenseState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn jackknife_matches_plain_mean_for_linear_statistic() {
        // exp of a log-mean-exp is linear, so the jackknife error of exp(lme)
        // equals the standard error of the mean
        let xs: Vec<f64> = (0..50).map(|k| ((k * 37 % 11) as f64 + 1.0).ln()).collect();
        let lin: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let (v, se) = jackknife(&[&xs], |lm| lm[0].exp());
        let (m, se_lin) = mean_stderr(&lin);
        assert!((v - m).abs() < 1e-12);
        assert!((se - se_lin).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_gauge_and_small_batches() {
        let mut s = MpsState::new_product_state(3, LocalState::Zero, TruncationConfig::new(4)).unwrap();
        s.apply_unitary(&gates::cnot(), 1).unwrap();
        s.move_center(2);
        assert!(matches!(sample_pauli_string(&s, &mut rng(0)), Err(MpsError::NotRightNormalized(2))));
        s.right_normalize();
        assert!(matches!(
            estimate_pe(&s, 10, &mut rng(0)),
            Err(MpsError::TooFewSamples { .. })
        ));
        assert!(matches!(
            estimate_sre(&s, RenyiOrder::new(3.0).unwrap(), 200, &mut rng(0)),
            Err(MpsError::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn pauli_frequencies_match_exact_spectrum() {
        let dense = random_dense(3, 2);
        let mps = MpsState::from_dense(&dense, TruncationConfig::new(8)).unwrap();
        let exact = dense.pauli_spectrum().unwrap();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        let mut r = rng(3);
        let n = 20_000;
        for _ in 0..n {
            let s = sample_pauli_string(&mps, &mut r).unwrap();
            let code = code_from_word(&s.string);
            assert!((s.weight_prob - exact.weights()[code]).abs() < 1e-10);
            *counts.entry(code).or_default() += 1;
        }
        for (code, &w) in exact.weights().iter().enumerate() {
            let f = *counts.get(&code).unwrap_or(&0) as f64 / n as f64;
            let sd = (w * (1.0 - w) / n as f64).sqrt();
            assert!((f - w).abs() < 5.0 * sd + 1e-4, "code {code}: {f} vs {w}");
        }
    }

    #[test]
    fn bitstring_probabilities_are_exact() {
        let dense = random_dense(4, 8);
        let mps = MpsState::from_dense(&dense, TruncationConfig::new(8)).unwrap();
        let mut r = rng(1);
        for _ in 0..50 {
            let s = sample_bitstring(&mps, &mut r).unwrap();
            let idx = s.bits.iter().fold(0, |acc, &b| acc * 2 + b as usize);
            assert!((s.prob - dense.amplitudes()[idx].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_traces_match_dense_expectations() {
        let dense = random_dense(4, 5);
        let mps = MpsState::from_dense(&dense, TruncationConfig::new(8)).unwrap();
        let w: PauliString = "XYZX".parse().unwrap();
        let t = restricted_pauli_trace(&mps, &w, 0..2).unwrap();
        assert!((t - dense.expectation(&"XYII".parse().unwrap())).abs() < 1e-12);
    }

    #[test]
    fn sre_is_zero_on_stabilizer_and_additive_on_t_states() {
        let cfg = TruncationConfig::new(4);
        let mut s = MpsState::new_product_state(6, LocalState::Plus, cfg).unwrap();
        s.apply_unitary(&gates::cz(), 2).unwrap();
        s.right_normalize();
        for order in [RenyiOrder::SHANNON, RenyiOrder::TWO] {
            let e = estimate_sre(&s, order, 500, &mut rng(4)).unwrap();
            assert!(e.value.abs() < 1e-10, "{e:?}");
        }
        let t = MpsState::new_product_state(6, LocalState::T, cfg).unwrap();
        let e = estimate_sre(&t, RenyiOrder::TWO, 2000, &mut rng(5)).unwrap();
        let exact = 6.0 * (4.0f64 / 3.0).ln();
        assert!((e.value - exact).abs() < 4.0 * e.stderr + 1e-9, "{e:?} vs {exact}");
    }

    #[test]
    fn estimators_agree_with_oracle_on_random_states() {
        let dense = random_dense(5, 17);
        let mps = MpsState::from_dense(&dense, TruncationConfig::new(16)).unwrap();
        let n = 20_000;
        let pb = PauliBatch::draw(&mps, n, &[2], &mut rng(6)).unwrap();
        for order in [RenyiOrder::SHANNON, RenyiOrder::TWO] {
            let e = pb.sre(order).unwrap();
            let exact = dense.sre(order).unwrap().nats();
            assert!((e.value - exact).abs() < 5.0 * e.stderr, "M{}: {e:?} vs {exact}", order.value());
        }
        let e = pb.bsmi(2).unwrap();
        let exact = dense.bsmi_on_support(2).unwrap().nats();
        assert!((e.value - exact).abs() < 5.0 * e.stderr + 1e-3, "bsmi {e:?} vs {exact}");

        let bb = BitstringBatch::draw(&mps, n, &[2], Basis::Z, &mut rng(7)).unwrap();
        let pe = bb.pe();
        let exact = dense.participation_entropy(Basis::Z, RenyiOrder::SHANNON).unwrap().nats();
        assert!((pe.value - exact).abs() < 5.0 * pe.stderr);
        let mi = bb.bpmi(2).unwrap();
        let exact = dense.bpmi(2).unwrap().nats();
        assert!((mi.value - exact).abs() < 5.0 * mi.stderr);
        let bx = BitstringBatch::draw(&mps, n, &[], Basis::X, &mut rng(8)).unwrap();
        let exact = dense.participation_entropy(Basis::X, RenyiOrder::SHANNON).unwrap().nats();
        assert!((bx.pe().value - exact).abs() < 5.0 * bx.pe().stderr);
    }

    #[test]
    fn batches_are_reproducible() {
        let dense = random_dense(4, 1);
        let mps = MpsState::from_dense(&dense, TruncationConfig::new(8)).unwrap();
        let a = PauliBatch::draw(&mps, 300, &[1], &mut rng(9)).unwrap();
        let b = PauliBatch::draw(&mps, 300, &[1], &mut rng(9)).unwrap();
        assert_eq!(a.log_probs(), b.log_probs());
    }
}
