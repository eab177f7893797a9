//! Rectangular lattice geometry and the circuits built on it.
//!
//! Site `(x, y)` has index `y * l_x + x`. Row `y = 0` is the top boundary.
//! The lattice is open in y; x is periodic or open.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Modulus;
use crate::graph::WeightedGraph;
use crate::pauli::{sample_two_qubit_clifford, StabilizerTableau};
use crate::rng::{Tag, TrajectoryRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryX {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    l_x: usize,
    l_y: usize,
    bc_x: BoundaryX,
}

/// A nearest-neighbour bond; `a` is the lower-indexed end except for the
/// periodic wrap bond, where `a = (l_x − 1, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

impl LatticeSpec {
    pub fn new(l_x: usize, l_y: usize, bc_x: BoundaryX) -> Result<Self> {
        if l_x < 4 || l_x % 2 != 0 {
            return Err(Error::Config(format!("l_x must be even and at least 4, got {l_x}")));
        }
        if l_y < 2 {
            return Err(Error::Config(format!("l_y must be at least 2, got {l_y}")));
        }
        Ok(LatticeSpec { l_x, l_y, bc_x })
    }

    pub fn periodic(l_x: usize, l_y: usize) -> Result<Self> {
        Self::new(l_x, l_y, BoundaryX::Periodic)
    }

    pub fn l_x(&self) -> usize {
        self.l_x
    }

    pub fn l_y(&self) -> usize {
        self.l_y
    }

    pub fn bc_x(&self) -> BoundaryX {
        self.bc_x
    }

    pub fn n_sites(&self) -> usize {
        self.l_x * self.l_y
    }

    /// Same geometry with a different height.
    pub fn with_l_y(&self, l_y: usize) -> Result<Self> {
        Self::new(self.l_x, l_y, self.bc_x)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.l_x + x
    }

    /// Horizontal bonds of row `y` whose left end has the given x parity.
    pub fn horizontal_bonds(&self, y: usize, parity: usize) -> Vec<Bond> {
        (parity..self.l_x)
            .step_by(2)
            .filter(|&x| x + 1 < self.l_x || self.bc_x == BoundaryX::Periodic)
            .map(|x| Bond { a: (x, y), b: ((x + 1) % self.l_x, y) })
            .collect()
    }

    /// Vertical bonds between rows `y` and `y + 1`.
    pub fn vertical_bonds(&self, y: usize) -> Vec<Bond> {
        (0..self.l_x).map(|x| Bond { a: (x, y), b: (x, y + 1) }).collect()
    }

    /// All nearest-neighbour bonds: vertical ones, then horizontal ones, row by row.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for y in 0..self.l_y - 1 {
            out.extend(self.vertical_bonds(y));
        }
        for y in 0..self.l_y {
            out.extend(self.horizontal_bonds(y, 0));
            out.extend(self.horizontal_bonds(y, 1));
        }
        out
    }

    /// Bonds of one layer (1..=4) of a Clifford time step: vertical bonds from
    /// even rows, vertical from odd rows, horizontal from even x, horizontal from odd x.
    pub fn clifford_layer_bonds(&self, layer: usize) -> Result<Vec<Bond>> {
        match layer {
            1 | 2 => Ok((layer - 1..self.l_y - 1).step_by(2).flat_map(|y| self.vertical_bonds(y)).collect()),
            3 | 4 => Ok((0..self.l_y).flat_map(|y| self.horizontal_bonds(y, layer - 3)).collect()),
            _ => Err(Error::Config(format!("layer must be 1..=4, got {layer}"))),
        }
    }
}

/// Edge weight for a graph-state bond: 1 for qubits, uniform in `[1, q−1]` otherwise.
pub fn bond_weight(rng: &TrajectoryRng, spec: &LatticeSpec, q: Modulus, bond: &Bond) -> u32 {
    if q.get() == 2 {
        return 1;
    }
    let vertical = (bond.a.1 != bond.b.1) as u64;
    let key = 2 * spec.index(bond.a.0, bond.a.1) as u64 + vertical;
    rng.stream(Tag::EdgeWeight, key, 0).random_range(1..q.get())
}

/// CZ/CP layer on every lattice bond of `|+⟩^⊗N`.
pub fn build_graph_state(spec: &LatticeSpec, q: Modulus, rng: &TrajectoryRng) -> WeightedGraph {
    let mut g = WeightedGraph::empty(spec.n_sites(), q);
    for bond in spec.bonds() {
        let w = bond_weight(rng, spec, q, &bond);
        g.set_weight(spec.index(bond.a.0, bond.a.1), spec.index(bond.b.0, bond.b.1), w)
            .expect("lattice bonds join distinct sites");
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliffordCircuitSpec {
    t: usize,
    p_gate: f64,
}

impl CliffordCircuitSpec {
    pub fn new(t: usize, p_gate: f64) -> Result<Self> {
        if t < 1 {
            return Err(Error::Config("t must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p_gate) {
            return Err(Error::Config(format!("p_gate must lie in [0, 1], got {p_gate}")));
        }
        Ok(CliffordCircuitSpec { t, p_gate })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p_gate(&self) -> f64 {
        self.p_gate
    }
}

/// The gate on `bond` in `layer` (1..=4) of time step `step`, if present.
/// Depends only on the trajectory key and the gate's position.
pub fn clifford_gate_matrix(
    rng: &TrajectoryRng,
    spec: &LatticeSpec,
    cspec: &CliffordCircuitSpec,
    step: usize,
    layer: usize,
    bond: &Bond,
) -> Option<[[u32; 4]; 4]> {
    let slot = (4 * step + layer - 1) as u64;
    let mut r = rng.stream(Tag::Gate, spec.index(bond.a.0, bond.a.1) as u64, slot);
    if r.random::<f64>() >= cspec.p_gate {
        return None;
    }
    Some(*sample_two_qubit_clifford(&mut r, 0, 1).expect("q = 2 sampler").matrix())
}

/// Applies `t` diluted four-layer steps of random two-qubit Cliffords to a full-lattice tableau.
pub fn apply_shallow_clifford(
    tab: &mut StabilizerTableau,
    spec: &LatticeSpec,
    cspec: &CliffordCircuitSpec,
    rng: &TrajectoryRng,
) -> Result<()> {
    if tab.modulus().get() != 2 {
        return Err(Error::Unsupported("random Clifford circuits are qubit-only".into()));
    }
    if tab.n_sites() != spec.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "tableau has {} sites, lattice has {}",
            tab.n_sites(),
            spec.n_sites()
        )));
    }
    let q = tab.modulus();
    for step in 0..cspec.t {
        for layer in 1..=4 {
            for bond in spec.clifford_layer_bonds(layer)? {
                if let Some(m) = clifford_gate_matrix(rng, spec, cspec, step, layer, &bond) {
                    let g = crate::pauli::SymplecticGate::new(
                        spec.index(bond.a.0, bond.a.1),
                        spec.index(bond.b.0, bond.b.1),
                        m,
                        q,
                    )?;
                    tab.apply_symplectic(&g)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn md(q: u32) -> Modulus {
        Modulus::new(q).unwrap()
    }

    /// Edge set by brute force over site pairs at unit distance.
    fn brute_edges(spec: &LatticeSpec) -> HashSet<(usize, usize)> {
        let mut out = HashSet::new();
        for y1 in 0..spec.l_y() {
            for x1 in 0..spec.l_x() {
                for y2 in 0..spec.l_y() {
                    for x2 in 0..spec.l_x() {
                        let dy = y1.abs_diff(y2);
                        let mut dx = x1.abs_diff(x2);
                        if spec.bc_x() == BoundaryX::Periodic {
                            dx = dx.min(spec.l_x() - dx);
                        }
                        let (i, j) = (spec.index(x1, y1), spec.index(x2, y2));
                        if dx + dy == 1 && i < j {
                            out.insert((i, j));
                        }
                    }
                }
            }
        }
        out
    }

    fn as_pairs(spec: &LatticeSpec, bonds: &[Bond]) -> Vec<(usize, usize)> {
        bonds
            .iter()
            .map(|b| {
                let (i, j) = (spec.index(b.a.0, b.a.1), spec.index(b.b.0, b.b.1));
                (i.min(j), i.max(j))
            })
            .collect()
    }

    #[test]
    fn geometry_validation() {
        assert!(LatticeSpec::periodic(3, 4).is_err());
        assert!(LatticeSpec::periodic(6, 4).is_ok());
        assert!(LatticeSpec::periodic(4, 1).is_err());
        assert!(CliffordCircuitSpec::new(0, 0.5).is_err());
        assert!(CliffordCircuitSpec::new(1, 1.5).is_err());
        let s = LatticeSpec::periodic(4, 4).unwrap();
        assert!(s.clifford_layer_bonds(0).is_err());
        assert!(s.clifford_layer_bonds(5).is_err());
    }

    #[test]
    fn graph_state_edges() {
        let s = LatticeSpec::periodic(4, 2).unwrap();
        let g = build_graph_state(&s, md(2), &TrajectoryRng::new(1, 0));
        assert_eq!(g.edges().len(), 12);
        assert!(g.edges().iter().all(|e| e.2 == 1));
        let s = LatticeSpec::new(6, 5, BoundaryX::Open).unwrap();
        let g = build_graph_state(&s, md(7), &TrajectoryRng::new(1, 0));
        let got: HashSet<_> = g.edges().iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(got, brute_edges(&s));
        assert!(g.edges().iter().all(|e| (1..7).contains(&e.2)));
        assert!(WeightedGraph::from_adjacency(g.adjacency().clone()).is_ok());
    }

    #[test]
    fn layers_partition_the_edges() {
        for (lx, ly, bc) in [(4, 4, BoundaryX::Periodic), (6, 5, BoundaryX::Open), (8, 3, BoundaryX::Periodic)] {
            let s = LatticeSpec::new(lx, ly, bc).unwrap();
            let mut union = Vec::new();
            for layer in 1..=4 {
                let pairs = as_pairs(&s, &s.clifford_layer_bonds(layer).unwrap());
                let mut seen = HashSet::new();
                for (i, j) in &pairs {
                    assert!(seen.insert(*i) && seen.insert(*j), "layer {layer} reuses a site");
                }
                union.extend(pairs);
            }
            let set: HashSet<_> = union.iter().copied().collect();
            assert_eq!(set.len(), union.len(), "an edge appears in two layers");
            assert_eq!(set, brute_edges(&s));
        }
        let s = LatticeSpec::periodic(4, 4).unwrap();
        assert_eq!(s.clifford_layer_bonds(3).unwrap().len(), 8);
    }

    #[test]
    fn shallow_circuit_basics() {
        let s = LatticeSpec::periodic(4, 3).unwrap();
        let rng = TrajectoryRng::new(5, 2);
        let mut t = StabilizerTableau::new_plus(s.n_sites(), md(2));
        apply_shallow_clifford(&mut t, &s, &CliffordCircuitSpec::new(2, 0.0).unwrap(), &rng).unwrap();
        assert_eq!(t, StabilizerTableau::new_plus(s.n_sites(), md(2)));
        let c = CliffordCircuitSpec::new(2, 0.7).unwrap();
        let mut a = t.clone();
        let mut b = t.clone();
        apply_shallow_clifford(&mut a, &s, &c, &rng).unwrap();
        apply_shallow_clifford(&mut b, &s, &c, &rng).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let mut t3 = StabilizerTableau::new_plus(s.n_sites(), md(3));
        assert!(apply_shallow_clifford(&mut t3, &s, &c, &rng).is_err());
    }
}
