//! Pauli letters and words.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Symplectic bits `(x, z)`, with `Y ↔ (1, 1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Row-major 2×2 matrix in the computational basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Exponent `k` in `self · other = i^k · (self ⊙ other)` for single-qubit
    /// Hermitian Paulis.
    pub fn product_phase(self, other: Pauli) -> u8 {
        use Pauli::*;
        match (self, other) {
            (X, Y) | (Y, Z) | (Z, X) => 1,
            (Y, X) | (Z, Y) | (X, Z) => 3,
            _ => 0,
        }
    }

    pub fn compose(self, other: Pauli) -> Pauli {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        Pauli::from_bits(x1 ^ x2, z1 ^ z2)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliParseError {
    #[error("invalid Pauli letter {0:?}")]
    Letter(char),
}

/// A word `i^phase · σ_1 ⊗ ⋯ ⊗ σ_L` over Hermitian letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, phase: 0 }
    }

    pub fn with_phase(letters: Vec<Pauli>, phase: u8) -> Self {
        Self { letters, phase: phase % 4 }
    }

    pub fn identity(len: usize) -> Self {
        Self::new(vec![Pauli::I; len])
    }

    /// Identity everywhere except `ops` placed at the given sites.
    pub fn sparse(len: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; len];
        for &(site, p) in ops {
            letters[site] = p;
        }
        Self::new(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Power of `i` multiplying the word.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// `±1` when the phase is real, `None` otherwise.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Operator product `self · other`, phases included.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len(), "Pauli words of different length");
        let mut phase = self.phase as u32 + other.phase as u32;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                phase += a.product_phase(b) as u32;
                a.compose(b)
            })
            .collect();
        PauliString::with_phase(letters, (phase % 4) as u8)
    }

    /// Restriction to `range`, dropping the phase.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> PauliString {
        PauliString::new(self.letters[range].to_vec())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliParseError;

    /// Parses words like `XIZY`, optionally prefixed by `+`, `-`, `+i`, `-i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' | '_' | '.' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(PauliParseError::Letter(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString::with_phase(letters, phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products_match_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (ma, mb) = (a.matrix(), b.matrix());
                let c = a.compose(b).matrix();
                let ph = Complex64::i().powu(a.product_phase(b) as u32);
                for r in 0..2 {
                    for col in 0..2 {
                        let prod = ma[r][0] * mb[0][col] + ma[r][1] * mb[1][col];
                        assert!((prod - ph * c[r][col]).norm() < 1e-15, "{a:?}{b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn word_algebra() {
        assert_eq!(ps("XX").mul(&ps("ZZ")), ps("-YY"));
        assert_eq!(ps("XI").mul(&ps("ZI")), ps("-iYI"));
        assert!(ps("XX").commutes_with(&ps("ZZ")));
        assert!(!ps("XI").commutes_with(&ps("ZZ")));
        assert_eq!(ps("-iXYZ").to_string(), "-iXYZ");
        assert_eq!(ps("IXIZ").support(), vec![1, 3]);
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
