//! Dense bit matrices over GF(2), rows packed into `u64` words.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from rows of `0`/`1` characters, e.g. `["110", "011"]`.
    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged bit matrix");
            for (j, c) in r.chars().enumerate() {
                m.set(i, j, c == '1');
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        let bit = 1u64 << (c % 64);
        if v {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_rows(&mut self, target: usize, source: usize) {
        let w = self.words;
        let (t, s) = (target * w, source * w);
        for k in 0..w {
            self.data[t + k] ^= self.data[s + k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.words {
                self.data.swap(a * self.words + k, b * self.words + k);
            }
        }
    }

    /// Rank over GF(2); `self` is left untouched.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce()
    }

    /// In-place Gaussian elimination; returns the rank.
    fn row_reduce(&mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (word, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| self.data[r * self.words + word] & bit != 0) else {
                continue;
            };
            self.swap_rows(rank, pivot);
            for r in 0..self.rows {
                if r != rank && self.data[r * self.words + word] & bit != 0 {
                    self.xor_rows(r, rank);
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

pub fn gf2_rank(m: &BitMatrix) -> usize {
    m.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_ranks() {
        assert_eq!(gf2_rank(&BitMatrix::identity(70)), 70);
        assert_eq!(gf2_rank(&BitMatrix::zeros(5, 9)), 0);
        assert_eq!(gf2_rank(&BitMatrix::from_strs(&["110", "011", "101"])), 2);
        let m = BitMatrix::from_strs(&["110", "011", "101"]);
        let _ = m.rank();
        assert_eq!(m, BitMatrix::from_strs(&["110", "011", "101"]));
    }

    /// Rank by brute force: size of the row span is 2^rank.
    fn span_rank(rows: &[u16]) -> usize {
        let mut span = std::collections::HashSet::from([0u16]);
        for &r in rows {
            let extra: Vec<u16> = span.iter().map(|s| s ^ r).collect();
            span.extend(extra);
        }
        span.len().trailing_zeros() as usize
    }

    proptest! {
        #[test]
        fn rank_matches_span_size(rows in prop::collection::vec(0u16..(1 << 10), 1..12)) {
            let mut m = BitMatrix::zeros(rows.len(), 10);
            for (i, r) in rows.iter().enumerate() {
                for c in 0..10 {
                    m.set(i, c, (r >> c) & 1 == 1);
                }
            }
            prop_assert_eq!(m.rank(), span_rank(&rows));
        }
    }
}
