//! Qudit Pauli strings, stabilizer tableaux and their Clifford/measurement updates.
//!
//! Global phases are never stored: every observable computed here is a rank,
//! and ranks only see the exponent vectors.

mod binary;
mod gate;
mod prime;
mod tableau;

pub use binary::BinaryTableau;
pub use gate::{sample_two_qubit_clifford, sp4_2_elements, SymplecticGate};
pub use prime::PrimeTableau;
pub use tableau::StabilizerTableau;

use crate::error::{Error, Result};
use crate::gf::Modulus;

/// Exponent vectors of `∏ X_i^{a_i} Z_i^{b_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    q: Modulus,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl PauliString {
    pub fn new(q: Modulus, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} sites, z has {}",
                x.len(),
                z.len()
            )));
        }
        for (col, &v) in x.iter().chain(&z).enumerate() {
            if v >= q.get() {
                return Err(Error::EntryOutOfRange { row: 0, col, value: v, q: q.get() });
            }
        }
        Ok(PauliString { q, x, z })
    }

    pub fn identity(n: usize, q: Modulus) -> Self {
        PauliString { q, x: vec![0; n], z: vec![0; n] }
    }

    /// `X^a Z^b` on one site, identity elsewhere.
    pub fn single(n: usize, q: Modulus, site: usize, a: u32, b: u32) -> Self {
        let mut p = Self::identity(n, q);
        p.x[site] = a % q.get();
        p.z[site] = b % q.get();
        p
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    pub fn x_exps(&self) -> &[u32] {
        &self.x
    }

    pub fn z_exps(&self) -> &[u32] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }

    /// Exponent-wise `self · other^k`, phases dropped.
    pub fn mul_pow(&self, other: &PauliString, k: u32) -> PauliString {
        let q = self.q;
        let comb = |a: &[u32], b: &[u32]| -> Vec<u32> {
            a.iter().zip(b).map(|(&u, &v)| q.add(u, q.mul(v, k))).collect()
        };
        PauliString { q, x: comb(&self.x, &other.x), z: comb(&self.z, &other.z) }
    }
}

/// Returns `α` with `P1 P2 = ω^α P2 P1`.
pub fn commutation_phase(p1: &PauliString, p2: &PauliString) -> Result<u32> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch(format!(
            "strings on {} and {} sites",
            p1.len(),
            p2.len()
        )));
    }
    if p1.q != p2.q {
        return Err(Error::DimensionMismatch(format!(
            "moduli {} and {}",
            p1.q.get(),
            p2.q.get()
        )));
    }
    let q = p1.q;
    let mut acc = 0u32;
    for i in 0..p1.len() {
        acc = q.add(acc, q.mul(p1.z[i], p2.x[i]));
        acc = q.sub(acc, q.mul(p1.x[i], p2.z[i]));
    }
    Ok(acc)
}

/// A projective measurement of `X^a Z^b` on one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementOp {
    pub site: usize,
    pub a: u32,
    pub b: u32,
}

impl MeasurementOp {
    pub fn new(site: usize, a: u32, b: u32, q: Modulus) -> Result<Self> {
        let (a, b) = (a % q.get(), b % q.get());
        if a == 0 && b == 0 {
            return Err(Error::Config("measured operator must not be the identity".into()));
        }
        Ok(MeasurementOp { site, a, b })
    }

    pub fn x(site: usize) -> Self {
        MeasurementOp { site, a: 1, b: 0 }
    }

    pub fn z(site: usize) -> Self {
        MeasurementOp { site, a: 0, b: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(q: u32) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn commutation_examples() {
        for q in [2u32, 3, 5, 997] {
            let x0 = PauliString::single(3, md(q), 0, 1, 0);
            let z0 = PauliString::single(3, md(q), 0, 0, 1);
            assert_eq!(commutation_phase(&x0, &z0).unwrap(), (q - 1) % q);
            assert_eq!(commutation_phase(&z0, &x0).unwrap(), 1 % q);
            let p = PauliString::new(md(q), vec![1, 0, 2 % q], vec![0, 1, 1]).unwrap();
            assert_eq!(commutation_phase(&p, &p).unwrap(), 0);
        }
    }

    #[test]
    fn commutation_is_antisymmetric_and_bilinear() {
        let q = md(7);
        let p1 = PauliString::new(q, vec![1, 3, 0, 6], vec![2, 0, 5, 1]).unwrap();
        let p2 = PauliString::new(q, vec![4, 1, 1, 0], vec![0, 6, 2, 3]).unwrap();
        let p3 = PauliString::new(q, vec![0, 2, 3, 1], vec![1, 1, 0, 4]).unwrap();
        let a12 = commutation_phase(&p1, &p2).unwrap();
        assert_eq!(q.add(a12, commutation_phase(&p2, &p1).unwrap()), 0);
        let lhs = commutation_phase(&p1.mul_pow(&p3, 3), &p2).unwrap();
        let rhs = q.add(a12, q.mul(3, commutation_phase(&p3, &p2).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn validation() {
        assert!(PauliString::new(md(3), vec![0, 1], vec![0]).is_err());
        assert!(PauliString::new(md(3), vec![3], vec![0]).is_err());
        let a = PauliString::identity(2, md(3));
        let b = PauliString::identity(3, md(3));
        assert!(commutation_phase(&a, &b).is_err());
        let c = PauliString::identity(2, md(5));
        assert!(commutation_phase(&a, &c).is_err());
        assert!(MeasurementOp::new(0, 0, 3, md(3)).is_err());
        assert!(MeasurementOp::new(0, 1, 3, md(3)).is_ok());
    }
}
