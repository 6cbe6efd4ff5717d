//! Stabilizer tableau backend for Clifford circuits.
//!
//! Tableau with destabilizers: rows `0..n` are destabilizers, rows `n..2n`
//! stabilizers, and row `2n` is scratch space for deterministic
//! measurements. Each row stores packed `x` and `z` bits plus a sign bit.

pub mod clifford;
pub mod gf2;

use std::f64::consts::LN_2;
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::entropy::EntropyValue;
use crate::oracle::{Basis, DenseState, OracleError, MAX_QUBITS};
use crate::pauli::{Pauli, PauliString};
pub use clifford::{CliffordGate, ControlSide, TwoQubitClifford};
pub use gf2::{gf2_rank, BitMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizerError {
    #[error("a tableau needs at least one qubit")]
    Empty,
    #[error("sites {sites:?} out of range or repeated for {num_qubits} qubits")]
    Sites { sites: Vec<usize>, num_qubits: usize },
    #[error("region {start}..{end} invalid for {num_qubits} qubits")]
    Region { start: usize, end: usize, num_qubits: usize },
    #[error("outcome is deterministic and equals {0:+}")]
    ForcedOutcome(i8),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StabilizerOutcome {
    pub plus: bool,
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// Local Pauli as `(site, x, z)` triples.
type Local = Vec<(usize, bool, bool)>;

fn local(letters: &[Pauli], left: usize) -> Local {
    letters
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != Pauli::I)
        .map(|(k, p)| {
            let (x, z) = p.bits();
            (left + k, x, z)
        })
        .collect()
}

impl Tableau {
    /// `|0⟩^n` (basis `Z`) or `|+⟩^n` (basis `X`).
    pub fn new(n: usize, basis: Basis) -> Result<Self, StabilizerError> {
        if n == 0 {
            return Err(StabilizerError::Empty);
        }
        let words = n.div_ceil(64);
        let rows = 2 * n + 1;
        let mut t = Self { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for i in 0..n {
            t.set_x(i, i, true);
            t.set_z(n + i, i, true);
        }
        if basis == Basis::X {
            for q in 0..n {
                t.h(q);
            }
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn xbit(&self, row: usize, q: usize) -> bool {
        (self.x[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    fn zbit(&self, row: usize, q: usize) -> bool {
        (self.z[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let w = &mut self.x[row * self.words + q / 64];
        let b = 1u64 << (q % 64);
        if v { *w |= b } else { *w &= !b }
    }

    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let w = &mut self.z[row * self.words + q / 64];
        let b = 1u64 << (q % 64);
        if v { *w |= b } else { *w &= !b }
    }

    fn check_sites(&self, sites: &[usize]) -> Result<(), StabilizerError> {
        let distinct = sites.iter().enumerate().all(|(k, s)| !sites[..k].contains(s));
        if !distinct || sites.iter().any(|&s| s >= self.n) {
            return Err(StabilizerError::Sites { sites: sites.to_vec(), num_qubits: self.n });
        }
        Ok(())
    }

    pub fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (x, z) = (self.xbit(row, q), self.zbit(row, q));
            self.r[row] ^= x & z;
            self.set_x(row, q, z);
            self.set_z(row, q, x);
        }
    }

    pub fn s(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (x, z) = (self.xbit(row, q), self.zbit(row, q));
            self.r[row] ^= x & z;
            self.set_z(row, q, z ^ x);
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.xbit(row, c), self.zbit(row, c), self.xbit(row, t), self.zbit(row, t));
            self.r[row] ^= xc & zt & !(xt ^ zc);
            self.set_x(row, t, xt ^ xc);
            self.set_z(row, c, zc ^ zt);
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    fn pauli_flip(&mut self, q: usize, flip_if_x: bool, flip_if_z: bool) {
        for row in 0..2 * self.n {
            let (x, z) = (self.xbit(row, q), self.zbit(row, q));
            self.r[row] ^= (flip_if_x & x) ^ (flip_if_z & z);
        }
    }

    /// Conjugate by `exp(±iπ/4 P)`: every row `R` anticommuting with `P`
    /// becomes `±i·P·R`.
    fn rotate(&mut self, p: &Local, dagger: bool) {
        for row in 0..2 * self.n {
            if !self.anticommutes(row, p) {
                continue;
            }
            let e = p.iter().map(|&(q, px, pz)| g(px, pz, self.xbit(row, q), self.zbit(row, q))).sum::<i32>();
            let total = (if dagger { 3 } else { 1 }) + e + 2 * self.r[row] as i32;
            debug_assert_eq!(total.rem_euclid(2), 0);
            self.r[row] = total.rem_euclid(4) == 2;
            for &(q, px, pz) in p {
                let (x, z) = (self.xbit(row, q), self.zbit(row, q));
                self.set_x(row, q, x ^ px);
                self.set_z(row, q, z ^ pz);
            }
        }
    }

    fn apply_two_qubit(&mut self, c: &TwoQubitClifford, a: usize, b: usize) {
        for row in 0..2 * self.n {
            let code = self.xbit(row, a) as u8
                | (self.zbit(row, a) as u8) << 1
                | (self.xbit(row, b) as u8) << 2
                | (self.zbit(row, b) as u8) << 3;
            let (img, neg) = c.image(code);
            self.r[row] ^= neg;
            self.set_x(row, a, img & 1 != 0);
            self.set_z(row, a, img & 2 != 0);
            self.set_x(row, b, img & 4 != 0);
            self.set_z(row, b, img & 8 != 0);
        }
    }

    pub fn apply(&mut self, gate: &CliffordGate) -> Result<(), StabilizerError> {
        self.check_sites(&gate.sites())?;
        match *gate {
            CliffordGate::H(q) => self.h(q),
            CliffordGate::S(q) => self.s(q),
            CliffordGate::Sdg(q) => {
                // S† = S·Z
                self.s(q);
                self.pauli_flip(q, true, false);
            }
            CliffordGate::X(q) => self.pauli_flip(q, false, true),
            CliffordGate::Y(q) => self.pauli_flip(q, true, true),
            CliffordGate::Z(q) => self.pauli_flip(q, true, false),
            CliffordGate::Cx { control, target } => self.cx(control, target),
            CliffordGate::Cz(a, b) => self.cz(a, b),
            CliffordGate::Rotation { gate, left } => self.rotate(&local(gate.axis.letters(), left), gate.dagger),
            CliffordGate::TwoQubit { ref gate, a, b } => self.apply_two_qubit(gate, a, b),
        }
        Ok(())
    }

    fn anticommutes(&self, row: usize, p: &Local) -> bool {
        p.iter().fold(false, |acc, &(q, px, pz)| acc ^ (px & self.zbit(row, q)) ^ (pz & self.xbit(row, q)))
    }

    /// `row_h ← row_i · row_h`
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut e: i32 = 0;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let (y1, xo, zo) = (x1 & z1, x1 & !z1, z1 & !x1);
            let plus = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            e += plus.count_ones() as i32 - minus.count_ones() as i32;
            self.x[h * w + k] = x1 ^ x2;
            self.z[h * w + k] = z1 ^ z2;
        }
        let total = 2 * self.r[h] as i32 + 2 * self.r[i] as i32 + e;
        debug_assert_eq!(total.rem_euclid(2), 0);
        self.r[h] = total.rem_euclid(4) == 2;
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].fill(0);
        self.z[row * w..(row + 1) * w].fill(0);
        self.r[row] = false;
    }

    fn set_row(&mut self, row: usize, p: &Local, negative: bool) {
        self.clear_row(row);
        for &(q, x, z) in p {
            self.set_x(row, q, x);
            self.set_z(row, q, z);
        }
        self.r[row] = negative;
    }

    fn copy_row(&mut self, to: usize, from: usize) {
        let w = self.words;
        self.x.copy_within(from * w..(from + 1) * w, to * w);
        self.z.copy_within(from * w..(from + 1) * w, to * w);
        self.r[to] = self.r[from];
    }

    /// Eigenvalue of a deterministic local Pauli, or `None` if random.
    fn deterministic_value(&mut self, p: &Local) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|row| self.anticommutes(row, p)) {
            return None;
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.anticommutes(i, p) {
                self.rowsum(scratch, i + n);
            }
        }
        Some(!self.r[scratch])
    }

    /// `±1` if the word (with its phase) has a definite value, else `0`.
    pub fn expectation(&self, pauli: &PauliString) -> i8 {
        assert_eq!(pauli.len(), self.n);
        let sign = match pauli.sign() {
            Some(s) => s as i8,
            None => return 0,
        };
        let mut t = self.clone();
        match t.deterministic_value(&local(pauli.letters(), 0)) {
            Some(plus) => sign * if plus { 1 } else { -1 },
            None => 0,
        }
    }

    fn measure_local(&mut self, p: &Local, forced: Option<bool>, draw: impl FnOnce() -> bool) -> Result<StabilizerOutcome, StabilizerError> {
        let n = self.n;
        if let Some(pivot) = (n..2 * n).find(|&row| self.anticommutes(row, p)) {
            for row in 0..2 * n {
                if row != pivot && row != pivot - n && self.anticommutes(row, p) {
                    self.rowsum(row, pivot);
                }
            }
            self.copy_row(pivot - n, pivot);
            let plus = forced.unwrap_or_else(draw);
            self.set_row(pivot, p, !plus);
            Ok(StabilizerOutcome { plus, deterministic: false })
        } else {
            let plus = self.deterministic_value(p).expect("commutes with every stabilizer");
            match forced {
                Some(f) if f != plus => Err(StabilizerError::ForcedOutcome(if plus { 1 } else { -1 })),
                _ => Ok(StabilizerOutcome { plus, deterministic: true }),
            }
        }
    }

    /// Projective measurement of the local word `letters` starting at `left`.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        letters: &[Pauli],
        left: usize,
        rng: &mut R,
    ) -> Result<StabilizerOutcome, StabilizerError> {
        self.check_sites(&(left..left + letters.len()).collect::<Vec<_>>())?;
        self.measure_local(&local(letters, left), None, || rng.random::<bool>())
    }

    /// Measurement with a prescribed outcome; fails if the outcome is
    /// deterministic and different.
    pub fn measure_with_outcome(&mut self, letters: &[Pauli], left: usize, plus: bool) -> Result<StabilizerOutcome, StabilizerError> {
        self.check_sites(&(left..left + letters.len()).collect::<Vec<_>>())?;
        self.measure_local(&local(letters, left), Some(plus), || plus)
    }

    /// Stabilizer generators with their signs.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|row| self.row_word(row)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|row| self.row_word(row)).collect()
    }

    fn row_word(&self, row: usize) -> PauliString {
        let letters = (0..self.n).map(|q| Pauli::from_bits(self.xbit(row, q), self.zbit(row, q))).collect();
        PauliString::with_phase(letters, if self.r[row] { 2 } else { 0 })
    }

    /// `T_X` (basis Z) or `T_Z` (basis X) of the stabilizer rows.
    pub fn block(&self, basis: Basis) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for q in 0..self.n {
                let bit = match basis {
                    Basis::Z => self.xbit(self.n + i, q),
                    Basis::X => self.zbit(self.n + i, q),
                };
                m.set(i, q, bit);
            }
        }
        m
    }

    /// Stabilizer rows restricted to the chosen `x` and `z` columns.
    fn restricted(&self, x_cols: &[usize], z_cols: &[usize]) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n, x_cols.len() + z_cols.len());
        for i in 0..self.n {
            let row = self.n + i;
            for (c, &q) in x_cols.iter().enumerate() {
                m.set(i, c, self.xbit(row, q));
            }
            for (c, &q) in z_cols.iter().enumerate() {
                m.set(i, x_cols.len() + c, self.zbit(row, q));
            }
        }
        m
    }

    fn check_region(&self, region: &Range<usize>) -> Result<(), StabilizerError> {
        if region.start >= region.end || region.end > self.n {
            return Err(StabilizerError::Region { start: region.start, end: region.end, num_qubits: self.n });
        }
        Ok(())
    }

    /// Participation entropy of the full state, equal for every Rényi order.
    pub fn participation_entropy(&self, basis: Basis) -> EntropyValue {
        EntropyValue::from_nats(self.block(basis).rank() as f64 * LN_2)
    }

    /// Participation entropy of the marginal on `region`.
    ///
    /// The Z-type elements of the stabilizer group supported on the region
    /// are the kernel of `[T_X | T_Z restricted to the complement]`.
    pub fn subsystem_participation_entropy(&self, region: Range<usize>, basis: Basis) -> Result<EntropyValue, StabilizerError> {
        self.check_region(&region)?;
        let all: Vec<usize> = (0..self.n).collect();
        let outside: Vec<usize> = all.iter().copied().filter(|q| !region.contains(q)).collect();
        let m = match basis {
            Basis::Z => self.restricted(&all, &outside),
            Basis::X => self.restricted(&outside, &all),
        };
        let k = self.n - m.rank();
        Ok(EntropyValue::from_nats((region.len() - k) as f64 * LN_2))
    }

    pub fn entanglement_entropy(&self, region: Range<usize>) -> Result<EntropyValue, StabilizerError> {
        self.check_region(&region)?;
        let cols: Vec<usize> = region.clone().collect();
        let rank = self.restricted(&cols, &cols).rank();
        Ok(EntropyValue::from_nats((rank - region.len()) as f64 * LN_2))
    }

    /// Participation mutual information between `0..cut` and `cut..n`.
    pub fn bpmi(&self, cut: usize, basis: Basis) -> Result<EntropyValue, StabilizerError> {
        if cut == 0 || cut >= self.n {
            return Err(StabilizerError::Region { start: cut, end: cut, num_qubits: self.n });
        }
        let a = self.subsystem_participation_entropy(0..cut, basis)?;
        let b = self.subsystem_participation_entropy(cut..self.n, basis)?;
        Ok(EntropyValue::from_nats(a.nats() + b.nats() - self.participation_entropy(basis).nats()))
    }

    /// Whether the stabilizer rows commute pairwise and are independent.
    pub fn is_valid(&self) -> bool {
        let stabs = self.stabilizers();
        let commuting = stabs.iter().enumerate().all(|(i, a)| stabs[..i].iter().all(|b| a.commutes_with(b)));
        let all: Vec<usize> = (0..self.n).collect();
        commuting && self.restricted(&all, &all).rank() == self.n
    }

    /// Whether both tableaux stabilize the same state (same group, same signs).
    pub fn same_state(&self, other: &Tableau) -> bool {
        self.n == other.n && other.stabilizers().iter().all(|s| self.expectation(s) == 1)
    }

    /// Dense state vector obtained by projecting a fixed generic vector onto
    /// the stabilized subspace.
    pub fn to_dense(&self) -> Result<DenseState, StabilizerError> {
        if self.n > MAX_QUBITS {
            return Err(OracleError::Capacity { num_qubits: self.n, max: MAX_QUBITS }.into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let amps: Vec<Complex64> = (0..1usize << self.n)
            .map(|_| Complex64::new(rng.random::<f64>() + 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut psi = DenseState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())?;
        for g in self.stabilizers() {
            let gp = psi.apply_pauli(&g);
            let half: Vec<Complex64> = psi.amplitudes().iter().zip(&gp).map(|(a, b)| (a + b) * 0.5).collect();
            let norm = half.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            psi = DenseState::from_amplitudes(half.into_iter().map(|a| a / norm).collect())?;
        }
        Ok(psi)
    }
}

/// Power of `i` in the product of single-qubit Paulis `(x1,z1)·(x2,z2)`.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::RenyiOrder;
    use crate::gates::{RotationAxis, SelfDualGate};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn ghz(n: usize) -> Tableau {
        let mut t = Tableau::new(n, Basis::Z).unwrap();
        t.h(0);
        for q in 0..n - 1 {
            t.cx(q, q + 1);
        }
        t
    }

    fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> CliffordGate {
        let q = rng.random_range(0..n);
        let mut other = rng.random_range(0..n - 1);
        if other >= q {
            other += 1;
        }
        match rng.random_range(0..7) {
            0 => CliffordGate::H(q),
            1 => CliffordGate::S(q),
            2 => CliffordGate::Sdg(q),
            3 => CliffordGate::Cx { control: q, target: other },
            4 => CliffordGate::Cz(q, other),
            5 => CliffordGate::Y(q),
            _ => {
                let gate = SelfDualGate::ensemble()[rng.random_range(0..8)];
                let left = rng.random_range(0..=n - gate.axis.span());
                CliffordGate::Rotation { gate, left }
            }
        }
    }

    #[test]
    fn initial_tableaux() {
        let z = Tableau::new(4, Basis::Z).unwrap();
        assert_eq!(z.block(Basis::Z), BitMatrix::zeros(4, 4));
        assert_eq!(z.block(Basis::X), BitMatrix::identity(4));
        let x = Tableau::new(4, Basis::X).unwrap();
        assert_eq!(x.block(Basis::Z), BitMatrix::identity(4));
        assert!(x.stabilizers().iter().all(|s| s.phase() == 0));
        assert!(Tableau::new(0, Basis::Z).is_err());
    }

    #[test]
    fn basic_gate_actions() {
        let mut t = Tableau::new(2, Basis::Z).unwrap();
        t.h(0);
        assert_eq!(t.stabilizers()[0], ps("XI"));
        let mut c = Tableau::new(2, Basis::Z).unwrap();
        c.cx(0, 1);
        assert_eq!(c.expectation(&ps("ZI")), 1);
        let mut b = Tableau::new(2, Basis::Z).unwrap();
        b.apply(&CliffordGate::X(1)).unwrap();
        assert_eq!(b.expectation(&ps("IZ")), -1);
        assert!(b.apply(&CliffordGate::Cx { control: 1, target: 1 }).is_err());
        assert!(b.apply(&CliffordGate::H(2)).is_err());
    }

    #[test]
    fn gates_agree_with_dense_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 5;
            let mut t = Tableau::new(n, Basis::Z).unwrap();
            let mut d = DenseState::product(n, crate::gates::LocalState::Zero).unwrap();
            for _ in 0..30 {
                let g = random_gate(&mut rng, n);
                t.apply(&g).unwrap();
                d.apply(&g.matrix().unwrap(), &g.sites(), false).unwrap();
            }
            for s in t.stabilizers() {
                assert!((d.expectation(&s) - 1.0).abs() < 1e-10, "{s}");
            }
            assert!((t.to_dense().unwrap().fidelity(&d) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_restores_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut t = Tableau::new(6, Basis::X).unwrap();
        for _ in 0..20 {
            let g = random_gate(&mut rng, 6);
            t.apply(&g).unwrap();
        }
        let start = t.clone();
        let gates: Vec<CliffordGate> = (0..40)
            .map(|k| {
                if k % 2 == 0 {
                    CliffordGate::TwoQubit { gate: TwoQubitClifford::random(&mut rng), a: k % 6, b: (k + 3) % 6 }
                } else {
                    random_gate(&mut rng, 6)
                }
            })
            .collect();
        for g in &gates {
            t.apply(g).unwrap();
            assert!(t.is_valid());
        }
        for g in gates.iter().rev() {
            t.apply(&g.inverse()).unwrap();
        }
        assert!(t.same_state(&start) && start.same_state(&t));
    }

    #[test]
    fn rotation_matches_conjugation_rule() {
        let mut t = Tableau::new(2, Basis::Z).unwrap();
        let g = CliffordGate::Rotation { gate: SelfDualGate { axis: RotationAxis::XX, dagger: false }, left: 0 };
        t.apply(&g).unwrap();
        let mut d = DenseState::product(2, crate::gates::LocalState::Zero).unwrap();
        d.apply(&g.matrix().unwrap(), &[0, 1], false).unwrap();
        for s in t.stabilizers() {
            assert!((d.expectation(&s) - 1.0).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut z = Tableau::new(3, Basis::Z).unwrap();
        let out = z.measure(&[Pauli::Z], 1, &mut rng).unwrap();
        assert!(out.plus && out.deterministic);
        let mut seen = [false; 2];
        for _ in 0..32 {
            let mut p = Tableau::new(3, Basis::X).unwrap();
            let out = p.measure(&[Pauli::Z], 0, &mut rng).unwrap();
            assert!(!out.deterministic);
            seen[out.plus as usize] = true;
            assert_eq!(p.expectation(&ps("ZII")), if out.plus { 1 } else { -1 });
            assert!(p.is_valid());
        }
        assert_eq!(seen, [true, true]);
        let mut bell = ghz(2);
        let out = bell.measure(&[Pauli::X, Pauli::X], 0, &mut rng).unwrap();
        assert!(out.plus && out.deterministic);
        assert!(matches!(
            bell.measure_with_outcome(&[Pauli::Z, Pauli::Z], 0, false),
            Err(StabilizerError::ForcedOutcome(1))
        ));
        let out = bell.measure_with_outcome(&[Pauli::Z, Pauli::I], 0, false).unwrap();
        assert!(!out.plus && bell.expectation(&ps("IZ")) == -1);
    }

    #[test]
    fn entropy_examples() {
        let z = Tableau::new(6, Basis::Z).unwrap();
        assert_eq!(z.participation_entropy(Basis::Z).nats(), 0.0);
        assert_eq!(z.subsystem_participation_entropy(0..6, Basis::Z).unwrap().nats(), 0.0);
        assert_eq!(z.entanglement_entropy(0..3).unwrap().nats(), 0.0);
        let x = Tableau::new(6, Basis::X).unwrap();
        assert!((x.participation_entropy(Basis::Z).nats() - 6.0 * LN_2).abs() < 1e-12);
        assert!((x.subsystem_participation_entropy(1..4, Basis::Z).unwrap().nats() - 3.0 * LN_2).abs() < 1e-12);
        assert_eq!(x.bpmi(3, Basis::Z).unwrap().nats(), 0.0);
        let g = ghz(6);
        assert!((g.participation_entropy(Basis::Z).nats() - LN_2).abs() < 1e-12);
        assert!((g.subsystem_participation_entropy(0..3, Basis::Z).unwrap().nats() - LN_2).abs() < 1e-12);
        assert!((g.bpmi(3, Basis::Z).unwrap().nats() - LN_2).abs() < 1e-12);
        assert!((ghz(2).entanglement_entropy(1..2).unwrap().nats() - LN_2).abs() < 1e-12);
        assert!(g.subsystem_participation_entropy(3..3, Basis::Z).is_err());
    }

    #[test]
    fn entropies_match_oracle_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let n = rng.random_range(2..=7);
            let mut t = Tableau::new(n, Basis::Z).unwrap();
            for _ in 0..3 * n {
                let a = rng.random_range(0..n);
                let b = (a + 1 + rng.random_range(0..n - 1)) % n;
                t.apply(&CliffordGate::TwoQubit { gate: TwoQubitClifford::random(&mut rng), a, b }).unwrap();
            }
            let d = t.to_dense().unwrap();
            let ones = RenyiOrder::SHANNON;
            for basis in [Basis::Z, Basis::X] {
                let exact = d.participation_entropy(basis, ones).unwrap().nats();
                assert!((t.participation_entropy(basis).nats() - exact).abs() < 1e-9);
            }
            for cut in 1..n {
                let exact = d.entanglement_entropy(cut, ones).unwrap().nats();
                assert!((t.entanglement_entropy(0..cut).unwrap().nats() - exact).abs() < 1e-9);
                let exact = d.bpmi(cut).unwrap().nats();
                assert!((t.bpmi(cut, Basis::Z).unwrap().nats() - exact).abs() < 1e-9);
            }
        }
    }
}
