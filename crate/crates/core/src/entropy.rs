//! Probability distributions and Rényi entropies.
//!
//! Every entropy in this crate is measured in nats. Values reported in bits
//! elsewhere are converted with [`EntropyValue::from_bits`].

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deviation from unit sum accepted without touching the weights.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Deviation from unit sum that is silently renormalized away.
pub const RENORM_LIMIT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("weights sum to {sum}, which is not within {RENORM_LIMIT} of 1")]
    Normalization { sum: f64 },
    #[error("weight {index} is {value}; weights must be finite and non-negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("Rényi order must be finite and non-negative, got {0}")]
    InvalidOrder(f64),
    #[error("distribution is empty")]
    Empty,
}

/// A normalized distribution over `label_space()` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Validate and wrap `weights`.
    ///
    /// Sums within [`RENORM_LIMIT`] of one are rescaled to unit sum; larger
    /// deviations are rejected.
    pub fn new(mut weights: Vec<f64>) -> Result<Self, EntropyError> {
        if weights.is_empty() {
            return Err(EntropyError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(EntropyError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        let dev = (sum - 1.0).abs();
        if dev > RENORM_LIMIT {
            return Err(EntropyError::Normalization { sum });
        }
        if dev > NORM_TOLERANCE {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Ok(Self { weights })
    }

    /// Normalize arbitrary non-negative weights (e.g. squared amplitudes).
    pub fn from_unnormalized(mut weights: Vec<f64>) -> Result<Self, EntropyError> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(EntropyError::Normalization { sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(weights)
    }

    pub fn uniform(m: usize) -> Result<Self, EntropyError> {
        if m == 0 {
            return Err(EntropyError::Empty);
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label_space(&self) -> usize {
        self.weights.len()
    }

    /// Number of outcomes with strictly positive weight.
    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }
}

/// Rényi index `n ≥ 0`; `n = 1` is the Shannon limit.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub const SHANNON: RenyiOrder = RenyiOrder(1.0);
    pub const TWO: RenyiOrder = RenyiOrder(2.0);

    pub fn new(n: f64) -> Result<Self, EntropyError> {
        if n.is_finite() && n >= 0.0 {
            Ok(Self(n))
        } else {
            Err(EntropyError::InvalidOrder(n))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_shannon(self) -> bool {
        self.0 == 1.0
    }
}

/// An entropy in nats.
///
/// Sampled estimates and mutual informations built from them may be negative,
/// so the type itself does not enforce a sign.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue(0.0);

    pub fn from_nats(value: f64) -> Self {
        Self(value)
    }

    pub fn from_bits(bits: f64) -> Self {
        Self(bits * LN_2)
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / LN_2
    }

    pub fn base_note(self) -> &'static str {
        "nats"
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nats", self.0)
    }
}

/// `S_n(q)`; zero-weight outcomes contribute nothing for every order.
pub fn renyi_entropy(dist: &ProbDist, order: RenyiOrder) -> EntropyValue {
    let n = order.value();
    let support = dist.weights.iter().copied().filter(|&q| q > 0.0);
    let s = if order.is_shannon() {
        -support.map(|q| q * q.ln()).sum::<f64>()
    } else if n == 0.0 {
        (dist.support_size() as f64).ln()
    } else {
        support.map(|q| q.powf(n)).sum::<f64>().ln() / (1.0 - n)
    };
    // -0.0 and tiny negative rounding on point masses
    EntropyValue(if s < 0.0 && s > -1e-14 { 0.0 } else { s })
}

/// `S_A + S_B − S_AB`, unclamped.
pub fn mutual_information(
    s_a: EntropyValue,
    s_b: EntropyValue,
    s_ab: EntropyValue,
) -> EntropyValue {
    EntropyValue(s_a.0 + s_b.0 - s_ab.0)
}
