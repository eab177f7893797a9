//! Exact linear algebra over the prime field Z_q.
//!
//! Every entanglement entropy in this crate reduces to a rank over Z_q, so
//! this module is the kernel under the whole simulator. The q = 2 case is
//! routed through a word-packed elimination in [`bits`].

pub mod bits;

use crate::error::{Error, Result};

pub use bits::BitMatrix;

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A validated prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus(u32);

impl Modulus {
    pub fn new(q: u32) -> Result<Self> {
        if is_prime(q as u64) {
            Ok(Modulus(q))
        } else {
            Err(Error::NotPrime(q as u64))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u32 {
        (a % self.0 as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 + b as u64)
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 + self.0 as u64 - b as u64)
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    /// Multiplicative inverse; fails for `a ≡ 0`.
    pub fn inv(self, a: u32) -> Result<u32> {
        mod_inverse(a, self)
    }
}

/// Returns `b` with `a·b ≡ 1 (mod q)` via the extended Euclidean algorithm.
pub fn mod_inverse(a: u32, q: Modulus) -> Result<u32> {
    let m = q.get() as i64;
    let a0 = (a as i64).rem_euclid(m);
    if a0 == 0 {
        return Err(Error::NoInverse(a as u64, q.get()));
    }
    let (mut r0, mut r1) = (m, a0);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    // r0 is gcd(a, q) = 1 for prime q and a ≠ 0
    Ok(t0.rem_euclid(m) as u32)
}

/// Dense row-major matrix over Z_q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    q: Modulus,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, q: Modulus) -> Self {
        FpMatrix { rows, cols, q, data: vec![0; rows * cols] }
    }

    /// Builds a matrix from row-major entries, rejecting anything outside `[0, q)`.
    pub fn from_vec(rows: usize, cols: usize, q: Modulus, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|&v| v >= q.get()) {
            return Err(Error::EntryOutOfRange {
                row: i / cols.max(1),
                col: i % cols.max(1),
                value: data[i],
                q: q.get(),
            });
        }
        Ok(FpMatrix { rows, cols, q, data })
    }

    pub fn from_rows(q: Modulus, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, q, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    /// Sets an entry, reducing it mod q.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.q.get();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = FpMatrix::zeros(self.cols, self.rows, self.q);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            data.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        FpMatrix { rows: rows.len(), cols: cols.len(), q: self.q, data }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn scale_row(&mut self, r: usize, s: u32) {
        let q = self.q;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = q.mul(*v, s);
        }
    }

    /// `row[dst] += s · row[src]`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, s: u32) {
        let q = self.q;
        for c in 0..self.cols {
            let v = q.mul(self.data[src * self.cols + c], s);
            let d = &mut self.data[dst * self.cols + c];
            *d = q.add(*d, v);
        }
    }

    /// Rank over Z_q. The q = 2 case goes through the bit-packed path.
    pub fn rank(&self) -> usize {
        if self.q.get() == 2 {
            BitMatrix::from_fp(self).rank()
        } else {
            self.rank_generic()
        }
    }

    /// Reduces in place to reduced row-echelon form and returns the pivot
    /// columns, one per nonzero row. Zero rows end up at the bottom.
    pub fn rref(&mut self) -> Vec<usize> {
        let q = self.q;
        let mut pivots = Vec::new();
        for c in 0..self.cols {
            let rank = pivots.len();
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            self.swap_rows(rank, p);
            let inv = q.inv(self.get(rank, c)).expect("pivot is nonzero");
            self.scale_row(rank, inv);
            for r in 0..self.rows {
                let v = self.get(r, c);
                if r != rank && v != 0 {
                    self.add_row_multiple(r, rank, q.neg(v));
                }
            }
            pivots.push(c);
        }
        pivots
    }

    /// Rank by Gaussian elimination on flat element rows, for any prime q.
    pub fn rank_generic(&self) -> usize {
        let mut m = self.clone();
        let q = m.q;
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(rank, p);
            let inv = q.inv(m.get(rank, c)).expect("pivot is nonzero");
            m.scale_row(rank, inv);
            for r in rank + 1..m.rows {
                let v = m.get(r, c);
                if v != 0 {
                    m.add_row_multiple(r, rank, q.neg(v));
                }
            }
            rank += 1;
        }
        rank
    }
}
