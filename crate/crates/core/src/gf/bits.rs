//! GF(2) matrices packed 64 entries per word.

use super::FpMatrix;

/// Row-major bit matrix; each row occupies `words` consecutive `u64`s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    /// Packs an `FpMatrix` whose modulus is 2.
    pub fn from_fp(m: &FpMatrix) -> Self {
        debug_assert_eq!(m.modulus().get(), 2);
        let mut b = BitMatrix::zeros(m.rows(), m.cols());
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v & 1 == 1 {
                    b.set(r, c, true);
                }
            }
        }
        b
    }

    /// Wraps pre-packed rows. Bits beyond `cols` in the last word must be zero.
    pub fn from_words(rows: usize, cols: usize, data: Vec<u64>) -> Self {
        let words = words_for(cols);
        assert_eq!(data.len(), rows * words, "packed data has the wrong length");
        BitMatrix { rows, cols, words, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        let mask = 1u64 << (c % 64);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn rank(&self) -> usize {
        let mut data = self.data.clone();
        rank_packed(&mut data, self.rows, self.cols)
    }
}

/// Rank of `rows` packed GF(2) vectors of length `cols`, destroying the input.
///
/// Pivots are chosen column by column, taking the first remaining row with
/// the bit set.
pub fn rank_packed(data: &mut [u64], rows: usize, cols: usize) -> usize {
    let words = words_for(cols);
    debug_assert_eq!(data.len(), rows * words);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (wi, mask) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..rows).find(|&r| data[r * words + wi] & mask != 0) else {
            continue;
        };
        if p != rank {
            for w in 0..words {
                data.swap(rank * words + w, p * words + w);
            }
        }
        let (head, tail) = data.split_at_mut((rank + 1) * words);
        let pivot = &head[rank * words..];
        for row in tail.chunks_exact_mut(words) {
            if row[wi] & mask != 0 {
                // words before wi are already zero in every row below the pivot
                for w in wi..words {
                    row[w] ^= pivot[w];
                }
            }
        }
        rank += 1;
    }
    rank
}
