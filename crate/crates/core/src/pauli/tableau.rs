use super::{commutation_phase, BinaryTableau, MeasurementOp, PauliString, PrimeTableau, SymplecticGate};
use crate::error::{Error, Result};
use crate::gf::{FpMatrix, Modulus};

/// A phase-free stabilizer tableau over Z_q: N generators on N sites.
///
/// q = 2 uses the bit-packed backend, other primes the element backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StabilizerTableau {
    Binary(BinaryTableau),
    Prime(PrimeTableau),
}

macro_rules! dispatch {
    ($self:expr, $t:ident => $body:expr) => {
        match $self {
            StabilizerTableau::Binary($t) => $body,
            StabilizerTableau::Prime($t) => $body,
        }
    };
}

impl StabilizerTableau {
    /// `|+⟩^⊗n`, the all-X stabilizer state.
    pub fn new_plus(n: usize, q: Modulus) -> Self {
        if q.get() == 2 {
            StabilizerTableau::Binary(BinaryTableau::new_plus(n))
        } else {
            StabilizerTableau::Prime(PrimeTableau::new_plus(n, q))
        }
    }

    /// Same as [`new_plus`](Self::new_plus) but always on the element backend.
    pub fn new_plus_generic(n: usize, q: Modulus) -> Self {
        StabilizerTableau::Prime(PrimeTableau::new_plus(n, q))
    }

    /// Builds a tableau from generators, checking they commute and are independent.
    pub fn from_rows(q: Modulus, rows: &[PauliString]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().position(|p| p.len() != n || p.modulus() != q) {
            return Err(Error::InvalidTableau(format!("row {r} does not fit {n} sites mod {}", q.get())));
        }
        for i in 0..n {
            for j in i + 1..n {
                if commutation_phase(&rows[i], &rows[j])? != 0 {
                    return Err(Error::InvalidTableau(format!("rows {i} and {j} do not commute")));
                }
            }
        }
        let mut t = Self::new_plus(n, q);
        for (r, p) in rows.iter().enumerate() {
            t.set_row_unchecked(r, p);
        }
        if t.to_matrix().rank() != n {
            return Err(Error::InvalidTableau("rows are not independent".into()));
        }
        Ok(t)
    }

    pub fn n_sites(&self) -> usize {
        dispatch!(self, t => t.n_sites())
    }

    pub fn modulus(&self) -> Modulus {
        match self {
            StabilizerTableau::Binary(_) => Modulus::new(2).unwrap(),
            StabilizerTableau::Prime(t) => t.modulus(),
        }
    }

    pub fn row(&self, r: usize) -> PauliString {
        dispatch!(self, t => t.row(r))
    }

    pub fn rows(&self) -> Vec<PauliString> {
        (0..self.n_sites()).map(|r| self.row(r)).collect()
    }

    /// Exponents `(a, b)` of row `r` at site `s`.
    pub fn entry(&self, r: usize, s: usize) -> (u32, u32) {
        dispatch!(self, t => t.entry(r, s))
    }

    fn set_row_unchecked(&mut self, r: usize, p: &PauliString) {
        dispatch!(self, t => t.set_row(r, p))
    }

    /// The N×2N matrix `[T_X | T_Z]`.
    pub fn to_matrix(&self) -> FpMatrix {
        let n = self.n_sites();
        let mut m = FpMatrix::zeros(n, 2 * n, self.modulus());
        for r in 0..n {
            for s in 0..n {
                let (a, b) = self.entry(r, s);
                m.set(r, s, a);
                m.set(r, n + s, b);
            }
        }
        m
    }

    fn check_site(&self, s: usize) -> Result<()> {
        let n = self.n_sites();
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        Ok(())
    }

    /// Conjugation by `CP_{ij}^w`: `z_j += w·x_i`, `z_i += w·x_j`.
    pub fn apply_cp(&mut self, i: usize, j: usize, w: u32) -> Result<()> {
        if i == j {
            return Err(Error::SameSite(i));
        }
        self.check_site(i)?;
        self.check_site(j)?;
        dispatch!(self, t => t.apply_cp(i, j, w));
        Ok(())
    }

    pub fn apply_symplectic(&mut self, g: &SymplecticGate) -> Result<()> {
        if g.modulus() != self.modulus() {
            return Err(Error::DimensionMismatch(format!(
                "gate mod {} on tableau mod {}",
                g.modulus().get(),
                self.modulus().get()
            )));
        }
        let (i, j) = g.sites();
        self.check_site(i)?;
        self.check_site(j)?;
        dispatch!(self, t => t.apply_symplectic(g));
        Ok(())
    }

    fn check_measurement(&self, m: &MeasurementOp) -> Result<()> {
        self.check_site(m.site)?;
        let q = self.modulus().get();
        if m.a >= q || m.b >= q || (m.a == 0 && m.b == 0) {
            return Err(Error::Config(format!("bad measured operator X^{} Z^{} mod {q}", m.a, m.b)));
        }
        Ok(())
    }

    /// Projective measurement of `X^a Z^b` at one site. Returns `true` when the
    /// outcome was random (some generator failed to commute with it).
    pub fn measure_site(&mut self, m: &MeasurementOp) -> Result<bool> {
        self.check_measurement(m)?;
        Ok(dispatch!(self, t => t.measure(m)))
    }

    /// Measures and then removes the site's support from all other generators,
    /// leaving it in a product state. Returns the row holding the single-site
    /// stabilizer.
    pub fn measure_isolate(&mut self, m: &MeasurementOp) -> Result<usize> {
        self.check_measurement(m)?;
        Ok(dispatch!(self, t => t.measure_isolate(m)))
    }

    /// Measures, decouples, and re-prepares the site in `|+⟩` so it can be reused.
    pub fn recycle_site(&mut self, m: &MeasurementOp) -> Result<()> {
        self.check_measurement(m)?;
        dispatch!(self, t => t.recycle_site(m));
        Ok(())
    }

    /// Entanglement entropy in dits: `rank_q(T_A) − |A|`.
    pub fn entropy_region(&self, region: &[usize]) -> usize {
        dispatch!(self, t => t.entropy_region(region))
    }

    /// Checks that the rows pairwise commute and have full rank.
    pub fn validate(&self) -> Result<()> {
        let rows = self.rows();
        let n = rows.len();
        for i in 0..n {
            for j in i + 1..n {
                if commutation_phase(&rows[i], &rows[j])? != 0 {
                    return Err(Error::InvalidTableau(format!("rows {i} and {j} do not commute")));
                }
            }
        }
        if self.to_matrix().rank() != n {
            return Err(Error::InvalidTableau("rows are not independent".into()));
        }
        Ok(())
    }

    /// Canonical basis of the subgroup of stabilizers supported inside `region`,
    /// as a reduced row-echelon matrix over the region's `(x, z)` columns.
    /// Two states have the same reduced state on `region` exactly when these agree.
    pub fn subgroup_on(&self, region: &[usize]) -> FpMatrix {
        let n = self.n_sites();
        let inside: Vec<bool> = (0..n).map(|s| region.contains(&s)).collect();
        let outside: Vec<usize> = (0..n).filter(|&s| !inside[s]).collect();
        let mut order: Vec<usize> = outside.iter().flat_map(|&s| [s, n + s]).collect();
        let k_out = order.len();
        order.extend(region.iter().flat_map(|&s| [s, n + s]));
        let rows: Vec<usize> = (0..n).collect();
        let mut m = self.to_matrix().select(&rows, &order);
        let pivots = m.rref();
        let keep: Vec<usize> = pivots
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= k_out)
            .map(|(r, _)| r)
            .collect();
        let cols: Vec<usize> = (k_out..order.len()).collect();
        m.select(&keep, &cols)
    }

    /// Whether two tableaux generate the same stabilizer group.
    pub fn same_group(&self, other: &StabilizerTableau) -> bool {
        if self.n_sites() != other.n_sites() || self.modulus() != other.modulus() {
            return false;
        }
        let mut a = self.to_matrix();
        let mut b = other.to_matrix();
        a.rref();
        b.rref();
        a == b
    }
}
