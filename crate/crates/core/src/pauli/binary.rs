//! q = 2 tableau stored column-major: for each site, one packed bit column of
//! X exponents and one of Z exponents, indexed by stabilizer row.

use super::{MeasurementOp, PauliString, SymplecticGate};
use crate::gf::bits::{rank_packed, words_for};
use crate::gf::Modulus;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

#[inline]
fn bit(col: &[u64], r: usize) -> bool {
    (col[r / 64] >> (r % 64)) & 1 == 1
}

#[inline]
fn put(col: &mut [u64], r: usize, v: bool) {
    let m = 1u64 << (r % 64);
    if v {
        col[r / 64] |= m;
    } else {
        col[r / 64] &= !m;
    }
}

fn first_set(mask: &[u64]) -> Option<usize> {
    mask.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| 64 * i + w.trailing_zeros() as usize)
}

impl BinaryTableau {
    /// `|+⟩^⊗n`: row r is `X_r`.
    pub fn new_plus(n: usize) -> Self {
        let words = words_for(n);
        let mut t = BinaryTableau { n, words, x: vec![0; n * words], z: vec![0; n * words] };
        for s in 0..n {
            put(t.xcol_mut(s), s, true);
        }
        t
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    #[inline]
    fn xcol(&self, s: usize) -> &[u64] {
        &self.x[s * self.words..(s + 1) * self.words]
    }

    #[inline]
    fn zcol(&self, s: usize) -> &[u64] {
        &self.z[s * self.words..(s + 1) * self.words]
    }

    #[inline]
    fn xcol_mut(&mut self, s: usize) -> &mut [u64] {
        &mut self.x[s * self.words..(s + 1) * self.words]
    }

    #[inline]
    fn zcol_mut(&mut self, s: usize) -> &mut [u64] {
        &mut self.z[s * self.words..(s + 1) * self.words]
    }

    pub fn row(&self, r: usize) -> PauliString {
        let q = Modulus::new(2).unwrap();
        let x = (0..self.n).map(|s| bit(self.xcol(s), r) as u32).collect();
        let z = (0..self.n).map(|s| bit(self.zcol(s), r) as u32).collect();
        PauliString::new(q, x, z).unwrap()
    }

    pub fn set_row(&mut self, r: usize, p: &PauliString) {
        for s in 0..self.n {
            let (a, b) = (p.x_exps()[s] & 1 == 1, p.z_exps()[s] & 1 == 1);
            put(self.xcol_mut(s), r, a);
            put(self.zcol_mut(s), r, b);
        }
    }

    /// Exponents of row r at site s.
    #[inline]
    pub fn entry(&self, r: usize, s: usize) -> (u32, u32) {
        (bit(self.xcol(s), r) as u32, bit(self.zcol(s), r) as u32)
    }

    pub fn apply_cp(&mut self, i: usize, j: usize, w: u32) {
        if w & 1 == 0 {
            return;
        }
        let wd = self.words;
        for k in 0..wd {
            let (xi, xj) = (self.x[i * wd + k], self.x[j * wd + k]);
            self.z[j * wd + k] ^= xi;
            self.z[i * wd + k] ^= xj;
        }
    }

    pub fn apply_symplectic(&mut self, g: &SymplecticGate) {
        let (i, j) = g.sites();
        let m = g.matrix();
        let wd = self.words;
        for k in 0..wd {
            let old = [self.x[i * wd + k], self.z[i * wd + k], self.x[j * wd + k], self.z[j * wd + k]];
            let mut new = [0u64; 4];
            for (r, out) in new.iter_mut().enumerate() {
                for (c, &o) in old.iter().enumerate() {
                    if m[r][c] & 1 == 1 {
                        *out ^= o;
                    }
                }
            }
            self.x[i * wd + k] = new[0];
            self.z[i * wd + k] = new[1];
            self.x[j * wd + k] = new[2];
            self.z[j * wd + k] = new[3];
        }
    }

    /// Rows whose commutation phase with `X^a Z^b` at `site` is nonzero.
    fn anticommuting(&self, m: &MeasurementOp) -> Vec<u64> {
        let (a, b) = (m.a & 1 == 1, m.b & 1 == 1);
        let (xc, zc) = (self.xcol(m.site), self.zcol(m.site));
        (0..self.words)
            .map(|k| (if b { xc[k] } else { 0 }) ^ (if a { zc[k] } else { 0 }))
            .collect()
    }

    /// Adds row `src` into every row selected by `mask` (which must exclude `src`).
    fn add_row_to_mask(&mut self, src: usize, mask: &[u64]) {
        let wd = self.words;
        let (w, m) = (src / 64, 1u64 << (src % 64));
        for col in self.x.chunks_exact_mut(wd).chain(self.z.chunks_exact_mut(wd)) {
            if col[w] & m != 0 {
                for (c, &mk) in col.iter_mut().zip(mask) {
                    *c ^= mk;
                }
            }
        }
    }

    /// Overwrites row r with a single-site string.
    fn set_row_single(&mut self, r: usize, site: usize, a: u32, b: u32) {
        let wd = self.words;
        let (w, m) = (r / 64, !(1u64 << (r % 64)));
        for col in self.x.chunks_exact_mut(wd).chain(self.z.chunks_exact_mut(wd)) {
            col[w] &= m;
        }
        put(self.xcol_mut(site), r, a & 1 == 1);
        put(self.zcol_mut(site), r, b & 1 == 1);
    }

    /// Returns whether the outcome was random (some row anticommuted).
    pub fn measure(&mut self, m: &MeasurementOp) -> bool {
        let mut mask = self.anticommuting(m);
        let Some(k) = first_set(&mask) else {
            return false;
        };
        put(&mut mask, k, false);
        self.add_row_to_mask(k, &mask);
        self.set_row_single(k, m.site, m.a, m.b);
        true
    }

    /// Measures `m` and then clears every other row's support at the site, so
    /// the site ends up in a product state. Returns the row that now holds `O`.
    pub fn measure_isolate(&mut self, m: &MeasurementOp) -> usize {
        self.measure(m);
        let s = m.site;
        let mut mask: Vec<u64> = (0..self.words).map(|k| self.xcol(s)[k] | self.zcol(s)[k]).collect();
        let p = first_set(&mask).expect("a stabilizer state has support on every site");
        put(&mut mask, p, false);
        self.add_row_to_mask(p, &mask);
        // the commutant of O at one site is spanned by O, so row p is O times
        // a product of the other rows and can be replaced by O
        self.set_row_single(p, s, m.a, m.b);
        p
    }

    /// Measures `m`, decouples the site and re-prepares it in `|+⟩`.
    pub fn recycle_site(&mut self, m: &MeasurementOp) {
        let p = self.measure_isolate(m);
        self.set_row_single(p, m.site, 1, 0);
    }

    pub fn entropy_region(&self, region: &[usize]) -> usize {
        if region.is_empty() {
            return 0;
        }
        let wd = self.words;
        let mut data = Vec::with_capacity(2 * region.len() * wd);
        for &s in region {
            data.extend_from_slice(self.xcol(s));
            data.extend_from_slice(self.zcol(s));
        }
        rank_packed(&mut data, 2 * region.len(), self.n) - region.len()
    }
}
