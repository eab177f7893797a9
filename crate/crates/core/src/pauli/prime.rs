//! Odd-prime tableau stored column-major with one `u32` per entry.

use super::{MeasurementOp, PauliString, SymplecticGate};
use crate::gf::{FpMatrix, Modulus};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTableau {
    n: usize,
    q: Modulus,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl PrimeTableau {
    pub fn new_plus(n: usize, q: Modulus) -> Self {
        let mut t = PrimeTableau { n, q, x: vec![0; n * n], z: vec![0; n * n] };
        for s in 0..n {
            t.x[s * n + s] = 1;
        }
        t
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    #[inline]
    pub fn entry(&self, r: usize, s: usize) -> (u32, u32) {
        (self.x[s * self.n + r], self.z[s * self.n + r])
    }

    pub fn row(&self, r: usize) -> PauliString {
        let x = (0..self.n).map(|s| self.x[s * self.n + r]).collect();
        let z = (0..self.n).map(|s| self.z[s * self.n + r]).collect();
        PauliString::new(self.q, x, z).unwrap()
    }

    pub fn set_row(&mut self, r: usize, p: &PauliString) {
        for s in 0..self.n {
            self.x[s * self.n + r] = p.x_exps()[s];
            self.z[s * self.n + r] = p.z_exps()[s];
        }
    }

    pub fn apply_cp(&mut self, i: usize, j: usize, w: u32) {
        let (n, q) = (self.n, self.q);
        let w = w % q.get();
        if w == 0 {
            return;
        }
        for r in 0..n {
            let (xi, xj) = (self.x[i * n + r], self.x[j * n + r]);
            self.z[j * n + r] = q.add(self.z[j * n + r], q.mul(w, xi));
            self.z[i * n + r] = q.add(self.z[i * n + r], q.mul(w, xj));
        }
    }

    pub fn apply_symplectic(&mut self, g: &SymplecticGate) {
        let (i, j) = g.sites();
        let n = self.n;
        for r in 0..n {
            let v = [self.x[i * n + r], self.z[i * n + r], self.x[j * n + r], self.z[j * n + r]];
            let v = g.act(v);
            self.x[i * n + r] = v[0];
            self.z[i * n + r] = v[1];
            self.x[j * n + r] = v[2];
            self.z[j * n + r] = v[3];
        }
    }

    /// `row[i] += c_i · row[src]` for every `(i, c_i)` in `targets`.
    fn add_row_multiples(&mut self, src: usize, targets: &[(usize, u32)]) {
        if targets.is_empty() {
            return;
        }
        let (n, q) = (self.n, self.q);
        for col in self.x.chunks_exact_mut(n).chain(self.z.chunks_exact_mut(n)) {
            let v = col[src];
            if v != 0 {
                for &(i, c) in targets {
                    col[i] = q.add(col[i], q.mul(c, v));
                }
            }
        }
    }

    fn set_row_single(&mut self, r: usize, site: usize, a: u32, b: u32) {
        let n = self.n;
        for col in self.x.chunks_exact_mut(n).chain(self.z.chunks_exact_mut(n)) {
            col[r] = 0;
        }
        self.x[site * n + r] = a;
        self.z[site * n + r] = b;
    }

    pub fn measure(&mut self, m: &MeasurementOp) -> bool {
        let (n, q, s) = (self.n, self.q, m.site);
        let alpha = |t: &Self, r: usize| {
            q.sub(q.mul(t.z[s * n + r], m.a), q.mul(t.x[s * n + r], m.b))
        };
        let Some(k) = (0..n).find(|&r| alpha(self, r) != 0) else {
            return false;
        };
        let inv = q.inv(alpha(self, k)).expect("pivot phase is nonzero");
        let targets: Vec<(usize, u32)> = (k + 1..n)
            .filter_map(|r| {
                let a = alpha(self, r);
                (a != 0).then(|| (r, q.neg(q.mul(a, inv))))
            })
            .collect();
        self.add_row_multiples(k, &targets);
        self.set_row_single(k, s, m.a, m.b);
        true
    }

    pub fn measure_isolate(&mut self, m: &MeasurementOp) -> usize {
        self.measure(m);
        let (n, q, s) = (self.n, self.q, m.site);
        // every row now commutes with O, so its block at s is c·(a, b)
        let coef = |t: &Self, r: usize| {
            let (x, z) = (t.x[s * n + r], t.z[s * n + r]);
            if m.a != 0 {
                q.mul(x, q.inv(m.a).unwrap())
            } else {
                q.mul(z, q.inv(m.b).unwrap())
            }
        };
        let p = (0..n).find(|&r| coef(self, r) != 0).expect("support on every site");
        let inv = q.inv(coef(self, p)).unwrap();
        let targets: Vec<(usize, u32)> = (p + 1..n)
            .filter_map(|r| {
                let c = coef(self, r);
                (c != 0).then(|| (r, q.neg(q.mul(c, inv))))
            })
            .collect();
        self.add_row_multiples(p, &targets);
        self.set_row_single(p, s, m.a, m.b);
        p
    }

    pub fn recycle_site(&mut self, m: &MeasurementOp) {
        let p = self.measure_isolate(m);
        self.set_row_single(p, m.site, 1, 0);
    }

    pub fn entropy_region(&self, region: &[usize]) -> usize {
        if region.is_empty() {
            return 0;
        }
        let n = self.n;
        let mut data = Vec::with_capacity(2 * region.len() * n);
        for &s in region {
            data.extend_from_slice(&self.x[s * n..(s + 1) * n]);
            data.extend_from_slice(&self.z[s * n..(s + 1) * n]);
        }
        let m = FpMatrix::from_vec(2 * region.len(), n, self.q, data).expect("entries reduced");
        m.rank_generic() - region.len()
    }
}
