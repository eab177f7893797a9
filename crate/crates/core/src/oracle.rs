//! Dense state-vector reference for differential tests at small sizes.
//!
//! Amplitude index is `Σ_i d_i q^i`, so site 0 is the least significant digit.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Modulus;
use crate::pauli::SymplecticGate;

type C64 = Complex<f64>;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 1 << 20;

fn omega_pow(q: u32, k: u64) -> C64 {
    let theta = 2.0 * PI * (k % q as u64) as f64 / q as f64;
    C64::new(theta.cos(), theta.sin())
}

/// `X|j⟩ = |j+1⟩`.
fn shift(q: usize) -> DMatrix<C64> {
    DMatrix::from_fn(q, q, |r, c| if r == (c + 1) % q { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `Z|j⟩ = ω^j |j⟩`.
fn clock(q: usize) -> DMatrix<C64> {
    DMatrix::from_fn(q, q, |r, c| if r == c { omega_pow(q as u32, r as u64) } else { C64::new(0.0, 0.0) })
}

fn mat_pow(m: &DMatrix<C64>, k: u32) -> DMatrix<C64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// `X^a Z^b` on one qudit.
fn weyl(q: u32, a: u32, b: u32) -> DMatrix<C64> {
    let qs = q as usize;
    mat_pow(&shift(qs), a) * mat_pow(&clock(qs), b)
}

/// `X^a Z^b` rescaled by a phase so that its q-th power is the identity.
fn weyl_unipotent(q: u32, a: u32, b: u32) -> DMatrix<C64> {
    let w = weyl(q, a, b);
    if q == 2 {
        if a * b % 2 == 1 {
            w * C64::new(0.0, 1.0)
        } else {
            w
        }
    } else {
        let m = Modulus::new(q).unwrap();
        let half = m.inv(2).unwrap();
        w * omega_pow(q, m.neg(m.mul(m.mul(a, b), half)) as u64)
    }
}

/// A pure state on `n` qudits of prime dimension `q`.
#[derive(Clone, Debug)]
pub struct DenseState {
    q: Modulus,
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    /// `|+⟩^⊗n`.
    pub fn plus(n: usize, q: Modulus) -> Result<Self> {
        let dim = (q.get() as usize)
            .checked_pow(n as u32)
            .filter(|&d| d <= MAX_DIM)
            .ok_or_else(|| Error::Unsupported(format!("{n} qudits of dimension {} is too large", q.get())))?;
        let a = 1.0 / (dim as f64).sqrt();
        Ok(DenseState { q, n, amps: vec![C64::new(a, 0.0); dim] })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn digit(&self, index: usize, site: usize) -> usize {
        let q = self.q.get() as usize;
        index / q.pow(site as u32) % q
    }

    /// Multiplies each amplitude by `ω^{w μ_i ν_j}`.
    pub fn apply_cp(&mut self, i: usize, j: usize, w: u32) -> Result<()> {
        if i == j {
            return Err(Error::SameSite(i));
        }
        let q = self.q.get();
        for idx in 0..self.amps.len() {
            let (mu, nu) = (self.digit(idx, i) as u64, self.digit(idx, j) as u64);
            let k = w as u64 * mu % q as u64 * nu;
            if k % q as u64 != 0 {
                self.amps[idx] *= omega_pow(q, k);
            }
        }
        Ok(())
    }

    /// Applies a q×q matrix on one site.
    pub fn apply_one_site(&mut self, u: &DMatrix<C64>, site: usize) {
        let q = self.q.get() as usize;
        let stride = q.pow(site as u32);
        let mut buf = vec![C64::new(0.0, 0.0); q];
        for base in 0..self.amps.len() {
            if base / stride % q != 0 {
                continue;
            }
            for (d, b) in buf.iter_mut().enumerate() {
                *b = self.amps[base + d * stride];
            }
            for r in 0..q {
                self.amps[base + r * stride] = (0..q).map(|c| u[(r, c)] * buf[c]).sum();
            }
        }
    }

    /// Applies a q²×q² matrix on sites `(i, j)`, with site `i` the low digit.
    pub fn apply_two_site(&mut self, u: &DMatrix<C64>, i: usize, j: usize) {
        let q = self.q.get() as usize;
        let (si, sj) = (q.pow(i as u32), q.pow(j as u32));
        let mut buf = vec![C64::new(0.0, 0.0); q * q];
        for base in 0..self.amps.len() {
            if base / si % q != 0 || base / sj % q != 0 {
                continue;
            }
            for dj in 0..q {
                for di in 0..q {
                    buf[di + q * dj] = self.amps[base + di * si + dj * sj];
                }
            }
            for dj in 0..q {
                for di in 0..q {
                    let r = di + q * dj;
                    self.amps[base + di * si + dj * sj] = (0..q * q).map(|c| u[(r, c)] * buf[c]).sum();
                }
            }
        }
    }

    /// Applies some unitary whose conjugation action on Paulis is `g` (up to phases).
    pub fn apply_symplectic(&mut self, g: &SymplecticGate) -> Result<()> {
        let lift = clifford_lift(g.modulus())?;
        let (i, j) = g.sites();
        for &k in &lift.word(g.matrix())? {
            self.apply_two_site(&lift.generators[k], i, j);
        }
        Ok(())
    }

    /// Projective measurement of `X^a Z^b` at `site`; returns the sampled outcome label.
    pub fn measure<R: Rng + ?Sized>(&mut self, site: usize, a: u32, b: u32, rng: &mut R) -> Result<u32> {
        let q = self.q.get();
        let projectors = projectors(q, a % q, b % q)?;
        let branches: Vec<DenseState> = projectors
            .iter()
            .map(|p| {
                let mut s = self.clone();
                s.apply_one_site(p, site);
                s
            })
            .collect();
        let probs: Vec<f64> = branches.iter().map(|s| s.norm().powi(2)).collect();
        let total: f64 = probs.iter().sum();
        debug_assert!((total - 1.0).abs() < 1e-10);
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = (0..q as usize).rev().find(|&l| probs[l] > 1e-12).unwrap_or(0);
        for (l, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && *p > 1e-12 {
                pick = l;
                break;
            }
        }
        let mut s = branches.into_iter().nth(pick).unwrap();
        let norm = s.norm();
        for a in &mut s.amps {
            *a /= norm;
        }
        *self = s;
        Ok(pick as u32)
    }

    /// Born probabilities of each outcome label for measuring `X^a Z^b` at `site`.
    pub fn outcome_probabilities(&self, site: usize, a: u32, b: u32) -> Result<Vec<f64>> {
        let q = self.q.get();
        Ok(projectors(q, a % q, b % q)?
            .iter()
            .map(|p| {
                let mut s = self.clone();
                s.apply_one_site(p, site);
                s.norm().powi(2)
            })
            .collect())
    }

    /// Von Neumann entropy of the reduced state on `region`, in dits.
    pub fn entropy(&self, region: &[usize]) -> f64 {
        let q = self.q.get() as usize;
        let rest: Vec<usize> = (0..self.n).filter(|s| !region.contains(s)).collect();
        if region.is_empty() || rest.is_empty() {
            return 0.0;
        }
        let (da, db) = (q.pow(region.len() as u32), q.pow(rest.len() as u32));
        let mut m = DMatrix::from_element(da, db, C64::new(0.0, 0.0));
        for (idx, amp) in self.amps.iter().enumerate() {
            let (mut r, mut c) = (0usize, 0usize);
            for (k, &s) in region.iter().enumerate() {
                r += self.digit(idx, s) * q.pow(k as u32);
            }
            for (k, &s) in rest.iter().enumerate() {
                c += self.digit(idx, s) * q.pow(k as u32);
            }
            m[(r, c)] = *amp;
        }
        let sv = m.singular_values();
        -sv.iter()
            .map(|s| s * s)
            .filter(|&p| p > 1e-14)
            .map(|p| p * p.ln())
            .sum::<f64>()
            / (q as f64).ln()
    }
}

/// `P^λ = (1/q) Σ_m ω^{-λm} W^m` for the phase-fixed Weyl operator `W`.
fn projectors(q: u32, a: u32, b: u32) -> Result<Vec<DMatrix<C64>>> {
    if a == 0 && b == 0 {
        return Err(Error::Config("measured operator must not be the identity".into()));
    }
    let w = weyl_unipotent(q, a, b);
    let powers: Vec<DMatrix<C64>> = (0..q).map(|m| mat_pow(&w, m)).collect();
    Ok((0..q)
        .map(|l| {
            let mut p = DMatrix::from_element(q as usize, q as usize, C64::new(0.0, 0.0));
            for (m, wm) in powers.iter().enumerate() {
                p += wm * omega_pow(q, (q - l) as u64 * m as u64);
            }
            p / C64::new(q as f64, 0.0)
        })
        .collect())
}

/// Words in a fixed two-qudit Clifford generating set for every symplectic matrix.
struct CliffordLift {
    generators: Vec<DMatrix<C64>>,
    /// Every element of Sp(4, q), sorted.
    elements: Vec<[[u32; 4]; 4]>,
    /// matrix → (parent matrix, generator index); the identity maps to `None`.
    parents: HashMap<[[u32; 4]; 4], Option<([[u32; 4]; 4], usize)>>,
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn matmul4(a: &[[u32; 4]; 4], b: &[[u32; 4]; 4], q: Modulus) -> [[u32; 4]; 4] {
    let mut c = [[0u32; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = q.reduce((0..4).map(|k| a[i][k] as u64 * b[k][j] as u64).sum());
        }
    }
    c
}

/// Reads off the symplectic matrix of a two-qudit unitary by conjugating each
/// of `X_i, Z_i, X_j, Z_j` and matching the result against all Paulis.
fn symplectic_of(u: &DMatrix<C64>, q: Modulus) -> Result<[[u32; 4]; 4]> {
    let qq = q.get();
    let pauli = |v: [u32; 4]| kron(&weyl(qq, v[2], v[3]), &weyl(qq, v[0], v[1]));
    let dim = (qq * qq) as f64;
    let mut s = [[0u32; 4]; 4];
    for c in 0..4 {
        let mut e = [0u32; 4];
        e[c] = 1;
        let conj = u * pauli(e) * u.adjoint();
        let mut found = None;
        'search: for a1 in 0..qq {
            for b1 in 0..qq {
                for a2 in 0..qq {
                    for b2 in 0..qq {
                        let v = [a1, b1, a2, b2];
                        let overlap = (pauli(v).adjoint() * &conj).trace().norm() / dim;
                        if (overlap - 1.0).abs() < 1e-9 {
                            found = Some(v);
                            break 'search;
                        }
                    }
                }
            }
        }
        let v = found.ok_or_else(|| Error::Unsupported("generator is not Clifford".into()))?;
        for r in 0..4 {
            s[r][c] = v[r];
        }
    }
    Ok(s)
}

impl CliffordLift {
    fn new(q: Modulus) -> Result<Self> {
        let qq = q.get();
        let qs = qq as usize;
        let id = DMatrix::<C64>::identity(qs, qs);
        let norm = C64::new(1.0 / (qs as f64).sqrt(), 0.0);
        let dft = DMatrix::from_fn(qs, qs, |r, c| omega_pow(qq, (r * c) as u64) * norm);
        let phase = DMatrix::from_fn(qs, qs, |r, c| {
            if r != c {
                C64::new(0.0, 0.0)
            } else if qq == 2 {
                if r == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) }
            } else {
                omega_pow(qq, (r * r.saturating_sub(1) / 2) as u64)
            }
        });
        let cp = DMatrix::from_fn(qs * qs, qs * qs, |r, c| {
            if r == c {
                omega_pow(qq, ((r % qs) * (r / qs)) as u64)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let generators = vec![kron(&id, &dft), kron(&dft, &id), kron(&id, &phase), kron(&phase, &id), cp];
        let actions: Vec<[[u32; 4]; 4]> =
            generators.iter().map(|g| symplectic_of(g, q)).collect::<Result<_>>()?;
        let mut ident = [[0u32; 4]; 4];
        for (k, row) in ident.iter_mut().enumerate() {
            row[k] = 1;
        }
        let mut parents = HashMap::from([(ident, None)]);
        let mut queue = VecDeque::from([ident]);
        while let Some(m) = queue.pop_front() {
            for (k, s) in actions.iter().enumerate() {
                let next = matmul4(s, &m, q);
                if let std::collections::hash_map::Entry::Vacant(e) = parents.entry(next) {
                    e.insert(Some((m, k)));
                    queue.push_back(next);
                }
            }
        }
        let mut elements: Vec<[[u32; 4]; 4]> = parents.keys().copied().collect();
        elements.sort_unstable();
        Ok(CliffordLift { generators, elements, parents })
    }

    /// Generator indices in application order.
    fn word(&self, target: &[[u32; 4]; 4]) -> Result<Vec<usize>> {
        let mut word = Vec::new();
        let mut cur = *target;
        loop {
            match self.parents.get(&cur) {
                None => return Err(Error::NotSymplectic(0)),
                Some(None) => break,
                Some(Some((parent, k))) => {
                    word.push(*k);
                    cur = *parent;
                }
            }
        }
        word.reverse();
        Ok(word)
    }
}

fn clifford_lift(q: Modulus) -> Result<Arc<CliffordLift>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CliffordLift>>>> = OnceLock::new();
    if q.get() > 3 {
        return Err(Error::Unsupported(format!("dense Clifford lift for q = {}", q.get())));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(l) = cache.lock().unwrap().get(&q.get()) {
        return Ok(l.clone());
    }
    let lift = Arc::new(CliffordLift::new(q)?);
    cache.lock().unwrap().insert(q.get(), lift.clone());
    Ok(lift)
}

/// A uniformly random element of Sp(4, q) on sites `(i, j)`, for `q ≤ 3`.
pub fn random_symplectic<R: Rng + ?Sized>(q: Modulus, i: usize, j: usize, rng: &mut R) -> Result<SymplecticGate> {
    let lift = clifford_lift(q)?;
    let m = lift.elements[rng.random_range(0..lift.elements.len())];
    SymplecticGate::new(i, j, m, q)
}

/// Outcome of comparing the stabilizer engine with the dense reference.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub operations: usize,
    pub regions_compared: usize,
    /// `(region, tableau entropy, dense entropy)` for every disagreement.
    pub mismatches: Vec<(Vec<usize>, usize, f64)>,
}

/// Runs one random sequence of `n_ops` CP gates, two-site Cliffords and
/// single-site measurements on `n` qudits through both the tableau and the
/// dense state (two-site Cliffords only for `q ≤ 3`, where the dense lift is
/// tabulated), comparing entropies halfway and at the end. All `2^n` regions
/// are compared when `n ≤ 6`, otherwise 64 random ones.
pub fn differential_check<R: Rng + ?Sized>(q: Modulus, n: usize, n_ops: usize, rng: &mut R) -> Result<CheckReport> {
    use crate::pauli::{MeasurementOp, StabilizerTableau};
    if n < 2 {
        return Err(Error::Config("need at least two sites".into()));
    }
    let qq = q.get();
    let mut tab = StabilizerTableau::new_plus(n, q);
    let mut psi = DenseState::plus(n, q)?;
    let mut report = CheckReport::default();
    let compare = |tab: &StabilizerTableau, psi: &DenseState, rng: &mut R, report: &mut CheckReport| -> Result<()> {
        tab.validate()?;
        let regions: Vec<Vec<usize>> = if n <= 6 {
            (0u32..1 << n).map(|m| (0..n).filter(|s| m >> s & 1 == 1).collect()).collect()
        } else {
            (0..64)
                .map(|_| (0..n).filter(|_| rng.random_bool(0.5)).collect())
                .collect()
        };
        for region in regions {
            let s_tab = tab.entropy_region(&region);
            let s_dense = psi.entropy(&region);
            report.regions_compared += 1;
            if (s_tab as f64 - s_dense).abs() > 1e-8 {
                report.mismatches.push((region, s_tab, s_dense));
            }
        }
        Ok(())
    };
    for k in 0..n_ops {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let kinds = if qq <= 3 { 3 } else { 2 };
        match rng.random_range(0..kinds) {
            0 => {
                let w = rng.random_range(0..qq);
                tab.apply_cp(i, j, w)?;
                psi.apply_cp(i, j, w)?;
            }
            2 => {
                let g = random_symplectic(q, i, j, rng)?;
                tab.apply_symplectic(&g)?;
                psi.apply_symplectic(&g)?;
            }
            _ => {
                let (a, b) = loop {
                    let (a, b) = (rng.random_range(0..qq), rng.random_range(0..qq));
                    if a != 0 || b != 0 {
                        break (a, b);
                    }
                };
                tab.measure_site(&MeasurementOp::new(i, a, b, q)?)?;
                psi.measure(i, a, b, rng)?;
            }
        }
        report.operations += 1;
        if k + 1 == n_ops / 2 {
            compare(&tab, &psi, rng, &mut report)?;
        }
    }
    compare(&tab, &psi, rng, &mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn md(q: u32) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn cz_flips_sign_of_11() {
        let mut s = DenseState::plus(2, md(2)).unwrap();
        s.apply_cp(0, 1, 1).unwrap();
        let a = s.amplitudes();
        assert_abs_diff_eq!(a[3].re, -0.5, epsilon = 1e-12);
        for k in 0..3 {
            assert_abs_diff_eq!(a[k].re, 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        let mut t = DenseState::plus(2, md(2)).unwrap();
        t.apply_cp(0, 1, 0).unwrap();
        assert!(t.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-12));
    }

    #[test]
    fn entropy_basics() {
        let s = DenseState::plus(3, md(3)).unwrap();
        assert_abs_diff_eq!(s.entropy(&[0]), 0.0, epsilon = 1e-10);
        let mut s = DenseState::plus(2, md(2)).unwrap();
        s.apply_cp(0, 1, 1).unwrap();
        assert_abs_diff_eq!(s.entropy(&[0]), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn weyl_operators_have_order_q() {
        for q in [2u32, 3, 5] {
            for a in 0..q {
                for b in 0..q {
                    let w = weyl_unipotent(q, a, b);
                    let id = DMatrix::<C64>::identity(q as usize, q as usize);
                    assert!((mat_pow(&w, q) - id).norm() < 1e-9, "q={q} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn measurement_probabilities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for q in [2u32, 3, 5] {
            let s = DenseState::plus(2, md(q)).unwrap();
            let px = s.outcome_probabilities(0, 1, 0).unwrap();
            assert_abs_diff_eq!(px.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert_eq!(px.iter().filter(|&&p| p > 1e-9).count(), 1);
            let pz = s.outcome_probabilities(1, 0, 1).unwrap();
            for p in &pz {
                assert_abs_diff_eq!(*p, 1.0 / q as f64, epsilon = 1e-10);
            }
            let before = s.clone();
            let mut after = s.clone();
            after.measure(0, 1, 0, &mut rng).unwrap();
            let overlap: C64 = before.amps.iter().zip(&after.amps).map(|(a, b)| a.conj() * b).sum();
            assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn small_differential_runs_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for (q, n) in [(2u32, 4usize), (3, 3), (5, 2)] {
            let r = differential_check(md(q), n, 12, &mut rng).unwrap();
            assert!(r.mismatches.is_empty(), "{:?}", r.mismatches);
            assert_eq!(r.regions_compared, 2 << n);
        }
    }

    #[test]
    fn lift_covers_symplectic_groups() {
        assert_eq!(clifford_lift(md(2)).unwrap().parents.len(), 720);
        assert_eq!(clifford_lift(md(3)).unwrap().parents.len(), 51840);
    }
}
