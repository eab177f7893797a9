use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Modulus;

/// Phase-free two-qudit Clifford: a 4×4 matrix acting on `(a_i, b_i, a_j, b_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticGate {
    sites: (usize, usize),
    matrix: [[u32; 4]; 4],
    q: Modulus,
}

/// The form `Ω = J ⊕ J` with `J = [[0, -1], [1, 0]]`, so that `vᵀΩw` is the
/// commutation phase of the two-site strings `v` and `w`.
fn omega(q: Modulus) -> [[u32; 4]; 4] {
    let m = q.neg(1);
    [[0, m, 0, 0], [1, 0, 0, 0], [0, 0, 0, m], [0, 0, 1, 0]]
}

fn matmul(a: &[[u32; 4]; 4], b: &[[u32; 4]; 4], q: Modulus) -> [[u32; 4]; 4] {
    let mut c = [[0u32; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut s = 0u64;
            for k in 0..4 {
                s += a[i][k] as u64 * b[k][j] as u64;
            }
            *v = q.reduce(s);
        }
    }
    c
}

fn transpose(a: &[[u32; 4]; 4]) -> [[u32; 4]; 4] {
    let mut t = [[0u32; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub(crate) fn is_symplectic(m: &[[u32; 4]; 4], q: Modulus) -> bool {
    let w = omega(q);
    matmul(&matmul(&transpose(m), &w, q), m, q) == w
}

impl SymplecticGate {
    pub fn new(i: usize, j: usize, matrix: [[u32; 4]; 4], q: Modulus) -> Result<Self> {
        if i == j {
            return Err(Error::SameSite(i));
        }
        let mut m = matrix;
        for v in m.iter_mut().flatten() {
            *v %= q.get();
        }
        if !is_symplectic(&m, q) {
            return Err(Error::NotSymplectic(q.get()));
        }
        Ok(SymplecticGate { sites: (i, j), matrix: m, q })
    }

    pub fn identity(i: usize, j: usize, q: Modulus) -> Result<Self> {
        let mut m = [[0u32; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = 1;
        }
        Self::new(i, j, m, q)
    }

    /// The conjugation action of `CP_{ij}^w`.
    pub fn cp(i: usize, j: usize, w: u32, q: Modulus) -> Result<Self> {
        let w = w % q.get();
        Self::new(i, j, [[1, 0, 0, 0], [0, 1, w, 0], [0, 0, 1, 0], [w, 0, 0, 1]], q)
    }

    pub fn sites(&self) -> (usize, usize) {
        self.sites
    }

    pub fn matrix(&self) -> &[[u32; 4]; 4] {
        &self.matrix
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    /// Same matrix on a different site pair.
    pub fn on_sites(&self, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::SameSite(i));
        }
        Ok(SymplecticGate { sites: (i, j), ..self.clone() })
    }

    /// `v ↦ M v` on one exponent block.
    #[inline]
    pub fn act(&self, v: [u32; 4]) -> [u32; 4] {
        let mut out = [0u32; 4];
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0u64;
            for c in 0..4 {
                s += self.matrix[r][c] as u64 * v[c] as u64;
            }
            *o = self.q.reduce(s);
        }
        out
    }
}

/// Binary 4×4 matrices packed as 16 bits, row r in bits 4r..4r+4.
fn pack(m: &[[u32; 4]; 4]) -> u16 {
    let mut bits = 0u16;
    for r in 0..4 {
        for c in 0..4 {
            if m[r][c] & 1 == 1 {
                bits |= 1 << (4 * r + c);
            }
        }
    }
    bits
}

fn unpack(bits: u16) -> [[u32; 4]; 4] {
    let mut m = [[0u32; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = ((bits >> (4 * r + c)) & 1) as u32;
        }
    }
    m
}

/// All of Sp(4, 2), enumerated once by closing {H₁, H₂, S₁, S₂, CZ} under products.
pub fn sp4_2_elements() -> &'static [[[u32; 4]; 4]] {
    static ELEMENTS: OnceLock<Vec<[[u32; 4]; 4]>> = OnceLock::new();
    ELEMENTS.get_or_init(|| {
        let q = Modulus::new(2).unwrap();
        let generators: Vec<[[u32; 4]; 4]> = vec![
            [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            [[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]],
            [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [1, 0, 0, 1]],
        ];
        let id = unpack(0b1000_0100_0010_0001);
        let mut seen = HashSet::from([pack(&id)]);
        let mut out = vec![id];
        let mut queue = VecDeque::from([id]);
        while let Some(m) = queue.pop_front() {
            for g in &generators {
                let p = matmul(g, &m, q);
                if seen.insert(pack(&p)) {
                    out.push(p);
                    queue.push_back(p);
                }
            }
        }
        out.sort_by_key(pack);
        out
    })
}

/// A uniformly random element of Sp(4, 2) on sites `(i, j)`.
pub fn sample_two_qubit_clifford<R: Rng + ?Sized>(
    rng: &mut R,
    i: usize,
    j: usize,
) -> Result<SymplecticGate> {
    let all = sp4_2_elements();
    let m = all[rng.random_range(0..all.len())];
    SymplecticGate::new(i, j, m, Modulus::new(2).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// Brute force over all 2^16 binary matrices.
    #[test]
    fn closure_is_all_of_sp4_2() {
        let q = Modulus::new(2).unwrap();
        let brute: Vec<u16> = (0..=u16::MAX).filter(|&b| is_symplectic(&unpack(b), q)).collect();
        assert_eq!(brute.len(), 720);
        let mut closed: Vec<u16> = sp4_2_elements().iter().map(pack).collect();
        closed.sort_unstable();
        assert_eq!(closed, brute);
    }

    #[test]
    fn rejects_bad_gates() {
        let q = Modulus::new(3).unwrap();
        assert!(matches!(SymplecticGate::cp(1, 1, 1, q), Err(Error::SameSite(1))));
        let m = [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 2]];
        assert!(matches!(SymplecticGate::new(0, 1, m, q), Err(Error::NotSymplectic(3))));
        for w in 0..3 {
            assert!(SymplecticGate::cp(0, 1, w, q).is_ok());
        }
    }

    #[test]
    fn sampling_is_uniform() {
        let all = sp4_2_elements();
        let index: std::collections::HashMap<u16, usize> =
            all.iter().enumerate().map(|(k, m)| (pack(m), k)).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let draws = 720_000usize;
        let mut counts = vec![0usize; all.len()];
        for _ in 0..draws {
            let g = sample_two_qubit_clifford(&mut rng, 0, 1).unwrap();
            assert!(is_symplectic(g.matrix(), g.modulus()));
            counts[index[&pack(g.matrix())]] += 1;
        }
        let mean = draws as f64 / 720.0;
        let sigma = (mean * (1.0 - 1.0 / 720.0)).sqrt();
        for c in &counts {
            assert!((*c as f64 - mean).abs() < 5.0 * sigma, "count {c} vs {mean}");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
        // 719 degrees of freedom: mean 719, sd ≈ 37.9
        assert!(chi2 < 719.0 + 5.0 * 37.9, "chi2 = {chi2}");
    }
}
