//! Clifford gates acting on tableaux, including uniformly random two-qubit
//! Cliffords.
//!
//! Two-qubit Paulis are encoded in four bits: `x_a | z_a << 1 | x_b << 2 | z_b << 3`,
//! with `(x, z) = (1, 1)` meaning the Hermitian `Y`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gates::{self, CMatrix, SelfDualGate};
use crate::pauli::{Pauli, PauliString};

/// A signed two-qubit Pauli: `(code, negative)`.
pub type SignedCode = (u8, bool);

fn code_word(code: u8) -> PauliString {
    PauliString::new(vec![
        Pauli::from_bits(code & 1 != 0, code & 2 != 0),
        Pauli::from_bits(code & 4 != 0, code & 8 != 0),
    ])
}

fn word_code(w: &PauliString) -> u8 {
    let (xa, za) = w.letters()[0].bits();
    let (xb, zb) = w.letters()[1].bits();
    xa as u8 | (za as u8) << 1 | (xb as u8) << 2 | (zb as u8) << 3
}

/// Symplectic product of two codes: `true` when they anticommute.
pub fn anticommute(a: u8, b: u8) -> bool {
    let sx = |c: u8| (c & 1, (c >> 1) & 1, (c >> 2) & 1, (c >> 3) & 1);
    let (xa1, za1, xb1, zb1) = sx(a);
    let (xa2, za2, xb2, zb2) = sx(b);
    ((xa1 & za2) ^ (za1 & xa2) ^ (xb1 & zb2) ^ (zb1 & xb2)) == 1
}

/// A two-qubit Clifford given by the images of `X_a, Z_a, X_b, Z_b`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoQubitClifford {
    images: [SignedCode; 4],
    table: [SignedCode; 16],
}

impl TwoQubitClifford {
    /// Returns `None` unless the images satisfy the canonical commutation relations.
    pub fn from_images(images: [SignedCode; 4]) -> Option<Self> {
        let c = images.map(|i| i.0);
        if c.iter().any(|&x| x == 0 || x > 15) {
            return None;
        }
        let pairs_ok = anticommute(c[0], c[1])
            && anticommute(c[2], c[3])
            && !anticommute(c[0], c[2])
            && !anticommute(c[0], c[3])
            && !anticommute(c[1], c[2])
            && !anticommute(c[1], c[3]);
        if !pairs_ok {
            return None;
        }
        let signed: Vec<PauliString> = images
            .iter()
            .map(|&(code, neg)| PauliString::with_phase(code_word(code).letters().to_vec(), if neg { 2 } else { 0 }))
            .collect();
        let mut table = [(0u8, false); 16];
        for (code, slot) in table.iter_mut().enumerate() {
            let bit = |k: usize| (code >> k) & 1 == 1;
            // Y = i·X·Z on each site
            let phase = (bit(0) && bit(1)) as u8 + (bit(2) && bit(3)) as u8;
            let mut acc = PauliString::with_phase(vec![Pauli::I; 2], phase);
            for (k, img) in signed.iter().enumerate() {
                if bit(k) {
                    acc = acc.mul(img);
                }
            }
            let neg = match acc.phase() {
                0 => false,
                2 => true,
                _ => unreachable!("Clifford image of a Hermitian Pauli is Hermitian"),
            };
            *slot = (word_code(&acc), neg);
        }
        Some(Self { images, table })
    }

    pub fn identity() -> Self {
        Self::from_images([(1, false), (2, false), (4, false), (8, false)]).unwrap()
    }

    pub fn images(&self) -> [SignedCode; 4] {
        self.images
    }

    /// Image of the Pauli with the given code.
    pub fn image(&self, code: u8) -> SignedCode {
        self.table[code as usize]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [(0u8, false); 16];
        for (code, &(img, neg)) in self.table.iter().enumerate() {
            inv[img as usize] = (code as u8, neg);
        }
        Self::from_images([inv[1], inv[2], inv[4], inv[8]]).unwrap()
    }

    /// Uniform draw from the 11 520 two-qubit Cliffords modulo global phase.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let xa = rng.random_range(1..16u8);
        let za_choices: Vec<u8> = (1..16).filter(|&c| anticommute(xa, c)).collect();
        let za = za_choices[rng.random_range(0..za_choices.len())];
        let span = [0, xa, za, xa ^ za];
        let xb_choices: Vec<u8> = (1..16)
            .filter(|&c| !anticommute(xa, c) && !anticommute(za, c) && !span.contains(&c))
            .collect();
        let xb = xb_choices[rng.random_range(0..xb_choices.len())];
        let zb_choices: Vec<u8> = (1..16)
            .filter(|&c| !anticommute(xa, c) && !anticommute(za, c) && anticommute(xb, c))
            .collect();
        let zb = zb_choices[rng.random_range(0..zb_choices.len())];
        let images = [xa, za, xb, zb].map(|c| (c, rng.random::<bool>()));
        Self::from_images(images).expect("valid symplectic images")
    }

    /// Every two-qubit Clifford modulo global phase.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(11_520);
        for xa in 1..16u8 {
            for za in (1..16).filter(|&c| anticommute(xa, c)) {
                for xb in 1..16u8 {
                    for zb in 1..16u8 {
                        for signs in 0..16u8 {
                            let s = |k: u8| (signs >> k) & 1 == 1;
                            if let Some(c) = Self::from_images([(xa, s(0)), (za, s(1)), (xb, s(2)), (zb, s(3))]) {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx { control: usize, target: usize },
    Cz(usize, usize),
    /// `exp(±iπ/4 P)` from the self-dual ensemble, supported from `left`.
    Rotation { gate: SelfDualGate, left: usize },
    TwoQubit { gate: TwoQubitClifford, a: usize, b: usize },
}

impl CliffordGate {
    pub fn sites(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => vec![q],
            CliffordGate::Cx { control, target } => vec![control, target],
            CliffordGate::Cz(a, b) => vec![a, b],
            CliffordGate::Rotation { gate, left } => (left..left + gate.axis.span()).collect(),
            CliffordGate::TwoQubit { a, b, .. } => vec![a, b],
        }
    }

    pub fn inverse(&self) -> CliffordGate {
        match *self {
            CliffordGate::S(q) => CliffordGate::Sdg(q),
            CliffordGate::Sdg(q) => CliffordGate::S(q),
            CliffordGate::Rotation { gate, left } => CliffordGate::Rotation { gate: gate.inverse(), left },
            CliffordGate::TwoQubit { gate, a, b } => CliffordGate::TwoQubit { gate: gate.inverse(), a, b },
            g => g,
        }
    }

    /// Dense matrix on `sites()` (first site most significant), where one is
    /// available without solving for the unitary.
    pub fn matrix(&self) -> Option<CMatrix> {
        Some(match *self {
            CliffordGate::H(_) => gates::hadamard(),
            CliffordGate::S(_) => gates::phase_s(),
            CliffordGate::Sdg(_) => gates::phase_s().adjoint(),
            CliffordGate::X(_) => gates::single(Pauli::X),
            CliffordGate::Y(_) => gates::single(Pauli::Y),
            CliffordGate::Z(_) => gates::single(Pauli::Z),
            CliffordGate::Cx { .. } => gates::cnot(),
            CliffordGate::Cz(..) => gates::cz(),
            CliffordGate::Rotation { gate, .. } => gate.matrix(),
            CliffordGate::TwoQubit { .. } => return None,
        })
    }
}

/// Orientation of a CX inside an automaton gate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlSide {
    Left,
    Right,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn group_has_11520_elements() {
        let all = TwoQubitClifford::all();
        assert_eq!(all.len(), 11_520);
        let distinct: HashSet<_> = all.iter().map(|c| c.table).collect();
        assert_eq!(distinct.len(), 11_520);
    }

    #[test]
    fn tables_preserve_commutation_and_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let c = TwoQubitClifford::random(&mut rng);
            assert_eq!(c.image(0), (0, false));
            for a in 0..16u8 {
                for b in 0..16u8 {
                    assert_eq!(anticommute(a, b), anticommute(c.image(a).0, c.image(b).0));
                }
            }
            let inv = c.inverse();
            for a in 0..16u8 {
                let (img, s1) = c.image(a);
                let (back, s2) = inv.image(img);
                assert_eq!((back, s1 ^ s2), (a, false));
            }
        }
        assert!(TwoQubitClifford::from_images([(1, false), (1, false), (4, false), (8, false)]).is_none());
    }

    #[test]
    fn same_seed_same_gate() {
        let a = TwoQubitClifford::random(&mut ChaCha8Rng::seed_from_u64(42));
        let b = TwoQubitClifford::random(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    /// χ² statistic against a uniform distribution over `cells` outcomes.
    fn chi2(counts: &HashMap<(u8, u8), usize>, cells: usize, n: usize) -> f64 {
        let e = n as f64 / cells as f64;
        let seen: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        seen + (cells - counts.len()) as f64 * e
    }

    #[test]
    fn random_images_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 300_000;
        let mut signed_x = HashMap::new();
        let mut pair = HashMap::new();
        for _ in 0..n {
            let c = TwoQubitClifford::random(&mut rng);
            let [xa, za, ..] = c.images();
            *signed_x.entry((xa.0, xa.1 as u8)).or_insert(0) += 1;
            *pair.entry((xa.0, za.0)).or_insert(0) += 1;
        }
        assert_eq!(signed_x.len(), 30);
        assert_eq!(pair.len(), 120);
        // upper 0.1% quantiles of χ² with 29 and 119 degrees of freedom
        assert!(chi2(&signed_x, 30, n) < 58.3);
        assert!(chi2(&pair, 120, n) < 172.5);
    }
}
