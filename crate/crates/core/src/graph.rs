//! Weighted qudit graph states: generators `X_n ∏_m Z_m^{w_mn}`.

use crate::error::{Error, Result};
use crate::gf::{FpMatrix, Modulus};
use crate::pauli::StabilizerTableau;

/// Symmetric adjacency matrix over Z_q with zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    adj: FpMatrix,
}

impl WeightedGraph {
    pub fn empty(n: usize, q: Modulus) -> Self {
        WeightedGraph { adj: FpMatrix::zeros(n, n, q) }
    }

    pub fn from_edges(n: usize, q: Modulus, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut g = Self::empty(n, q);
        for &(i, j, w) in edges {
            g.set_weight(i, j, w)?;
        }
        Ok(g)
    }

    /// Validates symmetry and the zero diagonal.
    pub fn from_adjacency(adj: FpMatrix) -> Result<Self> {
        let n = adj.rows();
        if adj.cols() != n {
            return Err(Error::DimensionMismatch(format!("{}x{} adjacency", n, adj.cols())));
        }
        for i in 0..n {
            if adj.get(i, i) != 0 {
                return Err(Error::Config(format!("self-loop at vertex {i}")));
            }
            for j in 0..i {
                if adj.get(i, j) != adj.get(j, i) {
                    return Err(Error::Config(format!("asymmetric weight between {i} and {j}")));
                }
            }
        }
        Ok(WeightedGraph { adj })
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.rows()
    }

    pub fn modulus(&self) -> Modulus {
        self.adj.modulus()
    }

    pub fn adjacency(&self) -> &FpMatrix {
        &self.adj
    }

    pub fn weight(&self, i: usize, j: usize) -> u32 {
        self.adj.get(i, j)
    }

    /// Sets `w_ij = w_ji = w mod q`; zero removes the edge.
    pub fn set_weight(&mut self, i: usize, j: usize, w: u32) -> Result<()> {
        let n = self.n_vertices();
        for v in [i, j] {
            if v >= n {
                return Err(Error::SiteOutOfRange { site: v, n });
            }
        }
        if i == j {
            return Err(Error::SameSite(i));
        }
        self.adj.set(i, j, w);
        self.adj.set(j, i, w);
        Ok(())
    }

    /// Edges `(i, j, w)` with `i < j` and `w ≠ 0`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let n = self.n_vertices();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.adj.get(i, j);
                if w != 0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// `rank_q` of the adjacency block between `region` and its complement.
    pub fn entropy(&self, region: &[usize]) -> usize {
        let inside: Vec<bool> = (0..self.n_vertices()).map(|v| region.contains(&v)).collect();
        let rest: Vec<usize> = (0..self.n_vertices()).filter(|&v| !inside[v]).collect();
        if region.is_empty() || rest.is_empty() {
            return 0;
        }
        self.adj.select(region, &rest).rank()
    }

    /// A Z measurement on `v` cuts every edge at `v`.
    pub fn z_measure(&mut self, v: usize) -> Result<()> {
        let n = self.n_vertices();
        if v >= n {
            return Err(Error::SiteOutOfRange { site: v, n });
        }
        for u in 0..n {
            self.adj.set(u, v, 0);
            self.adj.set(v, u, 0);
        }
        Ok(())
    }

    /// Tableau with `T_X = 1` and `T_Z` the adjacency matrix.
    pub fn to_tableau(&self) -> StabilizerTableau {
        let mut t = StabilizerTableau::new_plus(self.n_vertices(), self.modulus());
        for (i, j, w) in self.edges() {
            t.apply_cp(i, j, w).expect("edge endpoints are distinct and in range");
        }
        t
    }
}

pub fn graph_entropy(g: &WeightedGraph, region: &[usize]) -> usize {
    g.entropy(region)
}

pub fn z_measure_graph(g: &WeightedGraph, v: usize) -> Result<WeightedGraph> {
    let mut out = g.clone();
    out.z_measure(v)?;
    Ok(out)
}

pub fn to_tableau(g: &WeightedGraph) -> StabilizerTableau {
    g.to_tableau()
}
