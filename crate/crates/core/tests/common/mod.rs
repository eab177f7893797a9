#![allow(dead_code)]

use mipt_core::gf::Modulus;
use mipt_core::oracle::random_symplectic;
use mipt_core::pauli::{sample_two_qubit_clifford, MeasurementOp, StabilizerTableau, SymplecticGate};
use rand::Rng;

pub fn md(q: u32) -> Modulus {
    Modulus::new(q).unwrap()
}

/// One random CP gate, two-site Clifford or single-site measurement.
pub fn random_op<R: Rng>(q: Modulus, n: usize, rng: &mut R) -> Op {
    let qq = q.get();
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    match rng.random_range(0..3) {
        0 => Op::Cp(i, j, rng.random_range(0..qq)),
        1 => {
            let g = if qq == 2 {
                sample_two_qubit_clifford(rng, i, j).unwrap()
            } else if qq == 3 {
                random_symplectic(q, i, j, rng).unwrap()
            } else {
                SymplecticGate::cp(i, j, rng.random_range(0..qq), q).unwrap()
            };
            Op::Gate(g)
        }
        _ => loop {
            let (a, b) = (rng.random_range(0..qq), rng.random_range(0..qq));
            if a != 0 || b != 0 {
                break Op::Measure(MeasurementOp::new(i, a, b, q).unwrap());
            }
        },
    }
}

#[derive(Clone, Debug)]
pub enum Op {
    Cp(usize, usize, u32),
    Gate(SymplecticGate),
    Measure(MeasurementOp),
}

pub fn apply(t: &mut StabilizerTableau, op: &Op) {
    match op {
        Op::Cp(i, j, w) => t.apply_cp(*i, *j, *w).unwrap(),
        Op::Gate(g) => t.apply_symplectic(g).unwrap(),
        Op::Measure(m) => {
            t.measure_site(m).unwrap();
        }
    }
}

/// A random stabilizer state reached from `|+⟩^⊗n` by `ops` random operations.
pub fn random_tableau<R: Rng>(q: Modulus, n: usize, ops: usize, rng: &mut R) -> StabilizerTableau {
    let mut t = StabilizerTableau::new_plus(n, q);
    for _ in 0..ops {
        let op = random_op(q, n, rng);
        apply(&mut t, &op);
    }
    t
}

pub fn all_regions(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|m| (0..n).filter(|s| m >> s & 1 == 1).collect()).collect()
}

pub fn complement(region: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|s| !region.contains(s)).collect()
}
