//! Row-by-row simulation of a measured 2D lattice.
//!
//! The lattice is grown downward from the top boundary one row at a time.
//! Each row lives in a block of `l_x` tableau slots; once every gate touching
//! a bulk row has been applied, the row is measured, its slots are decoupled
//! and re-prepared in `|+⟩`, and the block is reused for a later row. At most
//! `window` rows (top boundary included) are ever held, so a tableau of
//! `window · l_x` sites simulates an arbitrarily tall lattice.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Modulus;
use crate::lattice::{bond_weight, clifford_gate_matrix, apply_shallow_clifford, build_graph_state, Bond, CliffordCircuitSpec, LatticeSpec};
use crate::pauli::{MeasurementOp, StabilizerTableau, SymplecticGate};
use crate::rng::{Tag, TrajectoryRng};

/// Which circuit prepares the 2D state and how its bulk is measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    /// One CZ/CP layer on every bond; each bulk site measured in X with
    /// probability `p_x`, otherwise in Z.
    Graph { p_x: f64 },
    /// Diluted four-layer random Clifford circuit; bulk measured in Z.
    Clifford(CliffordCircuitSpec),
}

impl Model {
    pub fn graph(p_x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_x) {
            return Err(Error::Config(format!("p_x must lie in [0, 1], got {p_x}")));
        }
        Ok(Model::Graph { p_x })
    }

    /// The tuning parameter: `p_x` or `p_gate`.
    pub fn param(&self) -> f64 {
        match self {
            Model::Graph { p_x } => *p_x,
            Model::Clifford(c) => c.p_gate(),
        }
    }

    /// Fewest rows (top boundary included) the streaming driver can work with.
    ///
    /// A graph row needs its lower neighbour bonded before it is measured. A
    /// Clifford row depends on rows up to `2t` below it.
    pub fn min_window(&self) -> usize {
        match self {
            Model::Graph { .. } => 3,
            Model::Clifford(c) => 2 * c.t() + 2,
        }
    }
}

/// Which rows stay unmeasured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edges {
    /// Only the top row (strip geometry).
    Top,
    /// Top and bottom rows (two-edge purification geometry).
    TopAndBottom,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub lattice: LatticeSpec,
    pub q: Modulus,
    pub model: Model,
    pub edges: Edges,
    pub window: usize,
}

impl SimConfig {
    /// Validates the combination; the window defaults to the smallest legal one
    /// when `window` is `None`.
    pub fn new(lattice: LatticeSpec, q: Modulus, model: Model, edges: Edges, window: Option<usize>) -> Result<Self> {
        let window = window.unwrap_or(match model {
            // the schedule with one row of lookahead beyond the minimum
            Model::Graph { .. } => 4,
            Model::Clifford(_) => model.min_window(),
        });
        if window < model.min_window() {
            return Err(Error::Config(format!(
                "window of {window} rows is below the light cone ({} rows)",
                model.min_window()
            )));
        }
        if matches!(model, Model::Clifford(_)) && q.get() != 2 {
            return Err(Error::Unsupported("random Clifford circuits are qubit-only".into()));
        }
        if edges == Edges::TopAndBottom && lattice.l_y() < 3 {
            return Err(Error::Config("two-edge geometry needs l_y ≥ 3".into()));
        }
        Ok(SimConfig { lattice, q, model, edges, window })
    }

    fn is_bulk(&self, y: usize, l_y: usize) -> bool {
        y >= 1 && !(self.edges == Edges::TopAndBottom && y + 1 == l_y)
    }
}

/// Measurement basis of bulk site `(x, y)`.
pub fn bulk_measurement(cfg: &SimConfig, rng: &TrajectoryRng, x: usize, y: usize, slot: usize) -> MeasurementOp {
    match cfg.model {
        Model::Graph { p_x } => {
            let u: f64 = rng.stream(Tag::Basis, cfg.lattice.index(x, y) as u64, 0).random();
            if u < p_x {
                MeasurementOp::x(slot)
            } else {
                MeasurementOp::z(slot)
            }
        }
        Model::Clifford(_) => MeasurementOp::z(slot),
    }
}

/// One trajectory of the windowed simulation.
#[derive(Clone, Debug)]
pub struct Engine {
    cfg: SimConfig,
    rng: TrajectoryRng,
    tab: StabilizerTableau,
    l_y: usize,
    block_of: Vec<Option<usize>>,
    free: Vec<usize>,
    progress: Vec<usize>,
    measured: Vec<bool>,
    next_row: usize,
}

impl Engine {
    pub fn new(cfg: &SimConfig, rng: TrajectoryRng) -> Self {
        let l_y = cfg.lattice.l_y();
        let blocks = cfg.window.min(l_y);
        let l_x = cfg.lattice.l_x();
        Engine {
            tab: StabilizerTableau::new_plus(blocks * l_x, cfg.q),
            cfg: cfg.clone(),
            rng,
            l_y,
            block_of: vec![None; l_y],
            free: (0..blocks).rev().collect(),
            progress: vec![0; l_y],
            measured: vec![false; l_y],
            next_row: 0,
        }
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tab
    }

    /// Tableau slots of lattice row `y`, which must be held.
    pub fn row_slots(&self, y: usize) -> Vec<usize> {
        let l_x = self.cfg.lattice.l_x();
        let b = self.block_of[y].expect("row is held");
        (b * l_x..(b + 1) * l_x).collect()
    }

    pub fn rows_added(&self) -> usize {
        self.next_row
    }

    #[inline]
    fn slot(&self, x: usize, y: usize) -> usize {
        self.block_of[y].expect("row is held") * self.cfg.lattice.l_x() + x
    }

    fn apply_gate(&mut self, step: usize, layer: usize, bond: &Bond, cspec: &CliffordCircuitSpec) {
        if let Some(m) = clifford_gate_matrix(&self.rng, &self.cfg.lattice, cspec, step, layer, bond) {
            let g = SymplecticGate::new(self.slot(bond.a.0, bond.a.1), self.slot(bond.b.0, bond.b.1), m, self.cfg.q)
                .expect("sampled gates are symplectic");
            self.tab.apply_symplectic(&g).expect("slots are in range");
        }
    }

    fn add_row(&mut self) -> Result<()> {
        let y = self.next_row;
        let Some(b) = self.free.pop() else {
            return Err(Error::Config(format!(
                "window of {} rows is too small to reach row {y}",
                self.cfg.window
            )));
        };
        self.block_of[y] = Some(b);
        self.next_row += 1;
        if let Model::Graph { .. } = self.cfg.model {
            let lat = self.cfg.lattice;
            let mut bonds = lat.horizontal_bonds(y, 0);
            bonds.extend(lat.horizontal_bonds(y, 1));
            if y > 0 {
                bonds.extend(lat.vertical_bonds(y - 1));
            }
            for bond in bonds {
                let w = bond_weight(&self.rng, &lat, self.cfg.q, &bond);
                let (i, j) = (self.slot(bond.a.0, bond.a.1), self.slot(bond.b.0, bond.b.1));
                self.tab.apply_cp(i, j, w).expect("distinct slots");
            }
        }
        Ok(())
    }

    /// Advances row `y` by one Clifford layer if its dependencies allow.
    fn try_advance(&mut self, y: usize, cspec: &CliffordCircuitSpec) -> bool {
        let sigma = self.progress[y];
        if sigma == 4 * cspec.t() {
            return false;
        }
        let (step, layer) = (sigma / 4, sigma % 4 + 1);
        let lat = self.cfg.lattice;
        if layer >= 3 {
            for bond in lat.horizontal_bonds(y, layer - 3) {
                self.apply_gate(step, layer, &bond, cspec);
            }
            self.progress[y] += 1;
            return true;
        }
        // layer 1 pairs even rows with the row below, layer 2 odd rows
        let below = y % 2 == layer - 1;
        let partner = if below { Some(y + 1).filter(|&p| p < self.l_y) } else { y.checked_sub(1) };
        let Some(p) = partner else {
            self.progress[y] += 1;
            return true;
        };
        if p >= self.next_row || self.progress[p] != sigma {
            return false;
        }
        debug_assert!(!self.measured[p]);
        for bond in lat.vertical_bonds(y.min(p)) {
            self.apply_gate(step, layer, &bond, cspec);
        }
        self.progress[y] += 1;
        self.progress[p] += 1;
        true
    }

    fn drain(&mut self, cspec: &CliffordCircuitSpec) {
        loop {
            let mut moved = false;
            for y in 0..self.next_row {
                if !self.measured[y] {
                    while self.try_advance(y, cspec) {
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }

    fn ready(&self, y: usize) -> bool {
        if self.measured[y] || !self.cfg.is_bulk(y, self.l_y) {
            return false;
        }
        match self.cfg.model {
            Model::Graph { .. } => {
                let need = (y + self.cfg.window - 2).min(self.l_y - 1);
                self.next_row > need
            }
            Model::Clifford(c) => self.progress[y] == 4 * c.t(),
        }
    }

    fn measure_row(&mut self, y: usize) {
        for x in 0..self.cfg.lattice.l_x() {
            let m = bulk_measurement(&self.cfg, &self.rng, x, y, self.slot(x, y));
            self.tab.recycle_site(&m).expect("slot in range");
        }
        self.measured[y] = true;
        let b = self.block_of[y].take().expect("row is held");
        // keep the free list sorted so reuse order is deterministic
        let pos = self.free.partition_point(|&f| f > b);
        self.free.insert(pos, b);
    }

    fn measure_ready(&mut self) {
        if let Model::Clifford(c) = self.cfg.model {
            self.drain(&c);
        }
        for y in 0..self.next_row {
            if self.ready(y) {
                self.measure_row(y);
            }
        }
    }

    /// Grows the lattice until rows `0..stop` have been added, measuring as it goes.
    pub fn run_until(&mut self, stop: usize) -> Result<()> {
        let stop = stop.min(self.l_y);
        loop {
            self.measure_ready();
            if self.next_row >= stop {
                return Ok(());
            }
            self.add_row()?;
        }
    }

    /// Completes the lattice and measures every bulk row.
    pub fn finish(&mut self) -> Result<()> {
        self.run_until(self.l_y)?;
        self.measure_ready();
        if let Some(y) = (0..self.l_y).find(|&y| self.cfg.is_bulk(y, self.l_y) && !self.measured[y]) {
            return Err(Error::Config(format!("row {y} could not be completed")));
        }
        Ok(())
    }

    /// A finished copy of this trajectory with the lattice cut at height `l_y`.
    /// Rows `0..l_y` must not have been grown past.
    pub fn truncated(&self, l_y: usize) -> Result<Engine> {
        if l_y > self.l_y || self.next_row > l_y {
            return Err(Error::Config(format!("cannot cut at l_y = {l_y}")));
        }
        let mut e = self.clone();
        e.cfg.lattice = self.cfg.lattice.with_l_y(l_y)?;
        e.l_y = l_y;
        e.block_of.truncate(l_y);
        e.progress.truncate(l_y);
        e.measured.truncate(l_y);
        e.finish()?;
        Ok(e)
    }

    /// Slots of the top boundary row.
    pub fn top_slots(&self) -> Vec<usize> {
        self.row_slots(0)
    }

    /// Slots of the bottom row (two-edge geometry, after finishing).
    pub fn bottom_slots(&self) -> Vec<usize> {
        self.row_slots(self.l_y - 1)
    }
}

/// Reference simulation without a window: builds the whole lattice, then
/// measures the bulk bottom row first. Returns the tableau (site `(x, y)` at
/// index `y·l_x + x`).
pub fn full_lattice(cfg: &SimConfig, rng: &TrajectoryRng) -> Result<StabilizerTableau> {
    let lat = cfg.lattice;
    let mut tab = match cfg.model {
        Model::Graph { .. } => build_graph_state(&lat, cfg.q, rng).to_tableau(),
        Model::Clifford(c) => {
            let mut t = StabilizerTableau::new_plus(lat.n_sites(), cfg.q);
            apply_shallow_clifford(&mut t, &lat, &c, rng)?;
            t
        }
    };
    for y in (0..lat.l_y()).rev() {
        if cfg.is_bulk(y, lat.l_y()) {
            for x in 0..lat.l_x() {
                let m = bulk_measurement(cfg, rng, x, y, lat.index(x, y));
                tab.measure_site(&m)?;
            }
        }
    }
    Ok(tab)
}
