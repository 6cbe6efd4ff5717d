//! The four circuit ensembles as backend-agnostic layer generators, and the
//! Kramers-Wannier duality `Z_i ↔ X_i X_{i+1}`.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{MeasuredPauli, RotationAxis, SelfDualGate};
use crate::pauli::{Pauli, PauliString};
use crate::stabilizer::{ControlSide, TwoQubitClifford};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{model} needs L divisible by {divisor}, got {l}")]
    SystemSize { model: Model, l: usize, divisor: usize },
    #[error("parameter {name} = {value} out of range")]
    Range { name: &'static str, value: f64 },
    #[error("parameter {0} is required for this model")]
    Missing(&'static str),
    #[error("parameter {0} does not apply to this model")]
    Extraneous(&'static str),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    SelfDualHybrid,
    CliffordDual,
    RandomClifford,
    QuantumAutomaton,
}

impl Model {
    pub fn uses_tableau(self) -> bool {
        !matches!(self, Model::SelfDualHybrid)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Model::SelfDualHybrid => "selfdual",
            Model::CliffordDual => "clifford-dual",
            Model::RandomClifford => "random-clifford",
            Model::QuantumAutomaton => "qa",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Model> {
        [Model::SelfDualHybrid, Model::CliffordDual, Model::RandomClifford, Model::QuantumAutomaton]
            .into_iter()
            .find(|m| m.short_name() == s)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub model: Model,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    pub seed: u64,
}

impl CircuitSpec {
    pub fn self_dual(l: usize, p: f64, beta: f64, seed: u64) -> Self {
        Self { model: Model::SelfDualHybrid, l, p, beta: Some(beta), gamma: None, boundary: Boundary::Open, seed }
    }

    pub fn clifford_dual(l: usize, p: f64, gamma: f64, seed: u64) -> Self {
        Self { model: Model::CliffordDual, l, p, beta: None, gamma: Some(gamma), boundary: Boundary::Open, seed }
    }

    pub fn random_clifford(l: usize, p: f64, seed: u64) -> Self {
        Self { model: Model::RandomClifford, l, p, beta: None, gamma: None, boundary: Boundary::Open, seed }
    }

    pub fn automaton(l: usize, p: f64, seed: u64) -> Self {
        Self { model: Model::QuantumAutomaton, l, p, beta: None, gamma: None, boundary: Boundary::Open, seed }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        // the Clifford variant also runs at powers of two, with ⌊L/3⌋ unitaries
        let divisor = match self.model {
            Model::SelfDualHybrid => 6,
            Model::CliffordDual | Model::RandomClifford | Model::QuantumAutomaton => 2,
        };
        if self.l < 4 || self.l % divisor != 0 {
            return Err(ConfigError::SystemSize { model: self.model, l: self.l, divisor });
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ConfigError::Range { name: "p", value: self.p });
        }
        match (self.model, self.beta) {
            (Model::SelfDualHybrid, None) => return Err(ConfigError::Missing("beta")),
            (Model::SelfDualHybrid, Some(b)) if !(b >= 0.0 && b.is_finite()) => {
                return Err(ConfigError::Range { name: "beta", value: b })
            }
            (Model::SelfDualHybrid, _) | (_, None) => {}
            (_, Some(_)) => return Err(ConfigError::Extraneous("beta")),
        }
        match (self.model, self.gamma) {
            (Model::CliffordDual, None) => return Err(ConfigError::Missing("gamma")),
            (Model::CliffordDual, Some(g)) if !(0.0..=1.0).contains(&g) => {
                return Err(ConfigError::Range { name: "gamma", value: g })
            }
            (Model::CliffordDual, _) | (_, None) => {}
            (_, Some(_)) => return Err(ConfigError::Extraneous("gamma")),
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Independent uniform draws; boxes may overlap within a round.
    #[default]
    WithReplacement,
    /// Distinct left sites within a round.
    WithoutReplacement,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutomatonOrder {
    #[default]
    CxThenCz,
    CzThenCx,
}

/// Choices left open by the model definitions.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub automaton_order: AutomatonOrder,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Instruction {
    SelfDual { gate: SelfDualGate, left: usize },
    Weak { pauli: MeasuredPauli, left: usize, beta: f64 },
    Projective { pauli: MeasuredPauli, left: usize },
    Clifford2 { gate: TwoQubitClifford, left: usize },
    Cx { control: usize, target: usize },
    Cz { left: usize },
    H(usize),
}

impl Instruction {
    pub fn is_measurement(&self) -> bool {
        matches!(self, Instruction::Weak { .. } | Instruction::Projective { .. })
    }

    /// Smallest and largest site touched.
    pub fn span(&self) -> (usize, usize) {
        match *self {
            Instruction::SelfDual { gate, left } => (left, left + gate.axis.span() - 1),
            Instruction::Weak { pauli, left, .. } | Instruction::Projective { pauli, left } => {
                (left, left + pauli.span() - 1)
            }
            Instruction::Clifford2 { left, .. } | Instruction::Cz { left } => (left, left + 1),
            Instruction::Cx { control, target } => (control.min(target), control.max(target)),
            Instruction::H(q) => (q, q),
        }
    }
}

/// Instructions in execution order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayerPlan {
    pub instructions: Vec<Instruction>,
}

impl LayerPlan {
    /// An equivalent ordering for a backend whose cost grows with the distance
    /// between consecutive instructions. Instructions with overlapping spans
    /// keep their relative order; among the ready ones the closest to the
    /// current position (starting at `start`) goes next.
    pub fn sweep_order(&self, start: usize) -> Vec<Instruction> {
        let ins = &self.instructions;
        let n = ins.len();
        let overlaps = |a: &Instruction, b: &Instruction| {
            let (a, b) = (a.span(), b.span());
            a.0 <= b.1 && b.0 <= a.1
        };
        let mut blockers: Vec<usize> =
            (0..n).map(|j| (0..j).filter(|&i| overlaps(&ins[i], &ins[j])).count()).collect();
        let mut done = vec![false; n];
        let mut out = Vec::with_capacity(n);
        let mut pos = start;
        for _ in 0..n {
            let next = (0..n)
                .filter(|&j| !done[j] && blockers[j] == 0)
                .min_by_key(|&j| (ins[j].span().0.abs_diff(pos), j))
                .expect("overlap order is acyclic");
            done[next] = true;
            for j in next + 1..n {
                if overlaps(&ins[next], &ins[j]) {
                    blockers[j] -= 1;
                }
            }
            pos = ins[next].span().0;
            out.push(ins[next]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn unitaries(&self) -> impl Iterator<Item = &Instruction> {
        self.instructions.iter().filter(|i| !i.is_measurement())
    }

    pub fn measurements(&self) -> impl Iterator<Item = &Instruction> {
        self.instructions.iter().filter(|i| i.is_measurement())
    }
}

fn positions<R: Rng + ?Sized>(rng: &mut R, count: usize, choices: usize, placement: Placement) -> Vec<usize> {
    match placement {
        Placement::WithReplacement => (0..count).map(|_| rng.random_range(0..choices)).collect(),
        Placement::WithoutReplacement => index::sample(rng, choices, count).into_vec(),
    }
}

/// `L/3` gates from `S ∪ S†`, each inside a three-site box at left site `0..=L−3`.
fn self_dual_unitary_round<R: Rng + ?Sized>(l: usize, placement: Placement, rng: &mut R, out: &mut Vec<Instruction>) {
    let ensemble = SelfDualGate::ensemble();
    let lefts = positions(rng, l / 3, l - 2, placement);
    for left in lefts {
        let gate = ensemble[rng.random_range(0..ensemble.len())];
        out.push(Instruction::SelfDual { gate, left });
    }
}

fn measured_pauli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> MeasuredPauli {
    if rng.random::<f64>() < p {
        MeasuredPauli::ZI
    } else {
        MeasuredPauli::XX
    }
}

pub fn self_dual_hybrid_layer<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    options: &ModelOptions,
    rng: &mut R,
) -> Result<LayerPlan, ConfigError> {
    if spec.model != Model::SelfDualHybrid {
        return Err(ConfigError::Extraneous("model"));
    }
    spec.validate()?;
    let beta = spec.beta.expect("validated");
    let mut out = Vec::with_capacity(spec.l / 3 + spec.l / 2);
    self_dual_unitary_round(spec.l, options.placement, rng, &mut out);
    for left in positions(rng, spec.l / 2, spec.l - 1, options.placement) {
        out.push(Instruction::Weak { pauli: measured_pauli(spec.p, rng), left, beta });
    }
    Ok(LayerPlan { instructions: out })
}

pub fn clifford_dual_layer<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    options: &ModelOptions,
    rng: &mut R,
) -> Result<LayerPlan, ConfigError> {
    if spec.model != Model::CliffordDual {
        return Err(ConfigError::Extraneous("model"));
    }
    spec.validate()?;
    let gamma = spec.gamma.expect("validated");
    let mut out = Vec::new();
    self_dual_unitary_round(spec.l, options.placement, rng, &mut out);
    let pairs = (spec.l as f64 * gamma / 2.0).floor() as usize;
    for left in positions(rng, pairs, spec.l - 1, Placement::WithoutReplacement) {
        out.push(Instruction::Projective { pauli: measured_pauli(spec.p, rng), left });
    }
    Ok(LayerPlan { instructions: out })
}

/// Left sites of the brick layer `t`: even layers start at 0, odd at 1.
pub fn brick_lefts(l: usize, t: usize) -> impl Iterator<Item = usize> {
    (t % 2..l.saturating_sub(1)).step_by(2)
}

pub fn random_clifford_layer<R: Rng + ?Sized>(spec: &CircuitSpec, t: usize, rng: &mut R) -> Result<LayerPlan, ConfigError> {
    if spec.model != Model::RandomClifford {
        return Err(ConfigError::Extraneous("model"));
    }
    spec.validate()?;
    let mut out: Vec<Instruction> = brick_lefts(spec.l, t)
        .map(|left| Instruction::Clifford2 { gate: TwoQubitClifford::random(rng), left })
        .collect();
    for q in 0..spec.l {
        if rng.random::<f64>() < spec.p {
            out.push(Instruction::Projective { pauli: MeasuredPauli::Z, left: q });
        }
    }
    Ok(LayerPlan { instructions: out })
}

pub fn qa_layer<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    options: &ModelOptions,
    t: usize,
    rng: &mut R,
) -> Result<LayerPlan, ConfigError> {
    if spec.model != Model::QuantumAutomaton {
        return Err(ConfigError::Extraneous("model"));
    }
    spec.validate()?;
    let mut out = Vec::new();
    for left in brick_lefts(spec.l, t) {
        let side = if rng.random::<bool>() { ControlSide::Left } else { ControlSide::Right };
        let cx = match side {
            ControlSide::Left => Instruction::Cx { control: left, target: left + 1 },
            ControlSide::Right => Instruction::Cx { control: left + 1, target: left },
        };
        match options.automaton_order {
            AutomatonOrder::CxThenCz => out.extend([cx, Instruction::Cz { left }]),
            AutomatonOrder::CzThenCx => out.extend([Instruction::Cz { left }, cx]),
        }
    }
    if t % 2 == 1 {
        for q in 0..spec.l {
            if rng.random::<f64>() < spec.p {
                out.push(Instruction::Projective { pauli: MeasuredPauli::Z, left: q });
                out.push(Instruction::H(q));
            }
        }
    }
    Ok(LayerPlan { instructions: out })
}

/// One clock step of any model.
pub fn layer<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    options: &ModelOptions,
    t: usize,
    rng: &mut R,
) -> Result<LayerPlan, ConfigError> {
    match spec.model {
        Model::SelfDualHybrid => self_dual_hybrid_layer(spec, options, rng),
        Model::CliffordDual => clifford_dual_layer(spec, options, rng),
        Model::RandomClifford => random_clifford_layer(spec, t, rng),
        Model::QuantumAutomaton => qa_layer(spec, options, t, rng),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("word has odd X-parity and is not generated by Z_i and X_i X_(i+1)")]
    Domain,
    #[error("image of Z at the last site leaves the chain")]
    Range,
}

/// Image under `Z_i → X_i X_{i+1}`, `X_i X_{i+1} → Z_{i+1}`, extended
/// multiplicatively.
pub fn duality_map(pauli: &PauliString) -> Result<PauliString, DualityError> {
    let n = pauli.len();
    let bits: Vec<(bool, bool)> = pauli.letters().iter().map(|p| p.bits()).collect();
    if bits.iter().filter(|b| b.0).count() % 2 == 1 {
        return Err(DualityError::Domain);
    }
    if n > 0 && bits[n - 1].1 {
        return Err(DualityError::Range);
    }
    let mut x2 = vec![false; n];
    let mut z2 = vec![false; n];
    let mut parity = false;
    for i in 0..n {
        // X-string as a product of X_i X_{i+1}: factor i present iff prefix parity is odd
        parity ^= bits[i].0;
        if parity && i + 1 < n {
            z2[i + 1] = true;
        }
        if bits[i].1 {
            x2[i] ^= true;
            x2[i + 1] ^= true;
        }
    }
    let overlap = |x: &[bool], z: &[bool]| x.iter().zip(z).filter(|(a, b)| **a && **b).count();
    let m1 = bits.iter().filter(|b| b.0 && b.1).count();
    let m2 = overlap(&x2, &z2);
    let phase = (pauli.phase() as usize + m1 + m2) % 4;
    let letters = x2.iter().zip(&z2).map(|(&x, &z)| Pauli::from_bits(x, z)).collect();
    Ok(PauliString::with_phase(letters, phase as u8))
}

/// Shape of a local word: letters from the first to the last non-identity site.
fn shape(word: &PauliString) -> Option<(Vec<Pauli>, usize)> {
    let support = word.support();
    let (&a, &b) = (support.first()?, support.last()?);
    Some((word.letters()[a..=b].to_vec(), a))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    pub passed: bool,
    pub lines: Vec<String>,
}

impl fmt::Display for DualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        write!(f, "{}", if self.passed { "self-dual" } else { "not self-dual" })
    }
}

/// Whether `S ∪ S†` maps onto itself as a multiset of gate types.
pub fn duality_check_gates() -> DualityReport {
    let l = 8;
    let site = 2;
    let mut before: BTreeMap<(RotationAxis, bool), usize> = BTreeMap::new();
    let mut after: BTreeMap<(RotationAxis, bool), usize> = BTreeMap::new();
    let mut lines = Vec::new();
    for gate in SelfDualGate::ensemble() {
        *before.entry((gate.axis, gate.dagger)).or_default() += 1;
        let word = PauliString::sparse(
            l,
            &gate.axis.letters().iter().enumerate().map(|(k, &p)| (site + k, p)).collect::<Vec<_>>(),
        );
        let image = duality_map(&word).expect("interior generator");
        let (letters, _) = shape(&image).expect("non-identity image");
        let axis = RotationAxis::ALL.into_iter().find(|a| a.letters() == letters.as_slice());
        // exp(iπ/4 · (−P)) = exp(−iπ/4 · P)
        let dagger = gate.dagger ^ (image.phase() == 2);
        lines.push(format!("{:?}{} -> {}", gate.axis, if gate.dagger { "†" } else { "" }, image));
        match axis {
            Some(a) if image.phase() % 2 == 0 => *after.entry((a, dagger)).or_default() += 1,
            _ => return DualityReport { passed: false, lines },
        }
    }
    DualityReport { passed: before == after, lines }
}

/// Whether the measurement ensemble `{Z_i ⊗ I : p, X_i X_{i+1} : 1 − p}`
/// maps onto itself.
pub fn duality_check_measurements(p: f64) -> DualityReport {
    let l = 8;
    let site = 2;
    let mut after: BTreeMap<String, f64> = BTreeMap::new();
    let before: BTreeMap<String, f64> = [("Z".to_string(), p), ("XX".to_string(), 1.0 - p)].into();
    let mut lines = Vec::new();
    for (op, w) in [(MeasuredPauli::ZI, p), (MeasuredPauli::XX, 1.0 - p)] {
        let word = PauliString::sparse(
            l,
            &op.letters().iter().enumerate().map(|(k, &q)| (site + k, q)).collect::<Vec<_>>(),
        );
        let image = duality_map(&word).expect("interior generator");
        let key: String = shape(&image).expect("non-identity").0.iter().map(|p| p.to_char()).collect();
        lines.push(format!("{word} (weight {w}) -> {image}"));
        *after.entry(key).or_default() += w;
    }
    DualityReport { passed: before == after, lines }
}
