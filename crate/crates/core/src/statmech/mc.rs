use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::{curve_crossing, FitResult, ModelId, Region, RunRecord};
use crate::rng::{Tag, TrajectoryRng};

/// Periodic `l × l` Ising model with one coupling per nearest-neighbour bond;
/// the Boltzmann weight is `exp(Σ K_ij s_i s_j)`.
#[derive(Clone, Debug)]
pub struct IsingLattice {
    l: usize,
    spins: Vec<i8>,
    // right and down neighbour of each site, and their couplings
    nbr: Vec<[u32; 4]>,
    k: Vec<[f64; 4]>,
    k_right: Vec<f64>,
    k_down: Vec<f64>,
}

impl IsingLattice {
    /// `k_right[i]` couples site `i = y·l + x` to `(x+1, y)`, `k_down[i]` to `(x, y+1)`.
    pub fn new(l: usize, k_right: Vec<f64>, k_down: Vec<f64>) -> Result<Self> {
        let n = l * l;
        if l < 2 || k_right.len() != n || k_down.len() != n {
            return Err(Error::DimensionMismatch(format!("need l ≥ 2 and {n} couplings per direction")));
        }
        if let Some(k) = k_right.iter().chain(&k_down).find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::Config(format!("couplings must be finite and non-negative, got {k}")));
        }
        let mut nbr = vec![[0u32; 4]; n];
        let mut k = vec![[0.0; 4]; n];
        for i in 0..n {
            let (x, y) = (i % l, i / l);
            let right = y * l + (x + 1) % l;
            let left = y * l + (x + l - 1) % l;
            let down = ((y + 1) % l) * l + x;
            let up = ((y + l - 1) % l) * l + x;
            nbr[i] = [right as u32, down as u32, left as u32, up as u32];
            k[i] = [k_right[i], k_down[i], k_right[left], k_down[up]];
        }
        Ok(IsingLattice { l, spins: vec![1; n], nbr, k, k_right, k_down })
    }

    pub fn uniform(l: usize, k: f64) -> Result<Self> {
        Self::new(l, vec![k; l * l], vec![k; l * l])
    }

    /// Each bond independently `k` with probability `p`, else 0.
    pub fn diluted<R: Rng + ?Sized>(l: usize, k: f64, p: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("bond probability must lie in [0, 1], got {p}")));
        }
        let n = l * l;
        let mut bond = || if rng.random::<f64>() < p { k } else { 0.0 };
        let right: Vec<f64> = (0..n).map(|_| bond()).collect();
        let down: Vec<f64> = (0..n).map(|_| bond()).collect();
        Self::new(l, right, down)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_sites(&self) -> usize {
        self.l * self.l
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn set_spins(&mut self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.n_sites() || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("spins must be ±1, one per site".into()));
        }
        self.spins.copy_from_slice(spins);
        Ok(())
    }

    pub fn randomize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for s in &mut self.spins {
            *s = if rng.random::<bool>() { 1 } else { -1 };
        }
    }

    /// `Σ K_ij s_i s_j`, the log Boltzmann weight.
    pub fn log_weight(&self) -> f64 {
        (0..self.n_sites())
            .map(|i| {
                let s = self.spins[i] as f64;
                let [r, d, ..] = self.nbr[i];
                s * (self.k_right[i] * self.spins[r as usize] as f64 + self.k_down[i] * self.spins[d as usize] as f64)
            })
            .sum()
    }

    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|&s| s as i64).sum::<i64>() as f64 / self.n_sites() as f64
    }

    /// One sequential single-spin-flip Metropolis sweep.
    pub fn metropolis_sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.n_sites() {
            let h: f64 = (0..4).map(|d| self.k[i][d] * self.spins[self.nbr[i][d] as usize] as f64).sum();
            let delta = 2.0 * self.spins[i] as f64 * h;
            if delta <= 0.0 || rng.random::<f64>() < (-delta).exp() {
                self.spins[i] = -self.spins[i];
            }
        }
    }

    /// One Swendsen–Wang update. Returns the sizes of the clusters it built.
    pub fn swendsen_wang_sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<usize> {
        let n = self.n_sites();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut a: u32) -> u32 {
            while parent[a as usize] != a {
                parent[a as usize] = parent[parent[a as usize] as usize];
                a = parent[a as usize];
            }
            a
        }
        for i in 0..n {
            for d in 0..2 {
                let k = self.k[i][d];
                let j = self.nbr[i][d];
                if k > 0.0 && self.spins[i] == self.spins[j as usize] && rng.random::<f64>() < -(-2.0 * k).exp_m1() {
                    let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j));
                    if a != b {
                        parent[a as usize] = b;
                    }
                }
            }
        }
        let mut size = vec![0usize; n];
        let mut flip = vec![0i8; n];
        for i in 0..n {
            let r = find(&mut parent, i as u32) as usize;
            if size[r] == 0 {
                flip[r] = if rng.random::<bool>() { -1 } else { 1 };
            }
            size[r] += 1;
            self.spins[i] *= flip[r];
        }
        size.into_iter().filter(|&c| c > 0).collect()
    }
}

/// Exact Boltzmann distribution over all `2^N` configurations; bit `i` of the
/// index is set when spin `i` is −1.
pub fn exact_distribution(lat: &IsingLattice) -> Result<Vec<f64>> {
    let n = lat.n_sites();
    if n > 20 {
        return Err(Error::Unsupported(format!("{n} spins is too many to enumerate")));
    }
    let mut l = lat.clone();
    let logs: Vec<f64> = (0..1usize << n)
        .map(|c| {
            let s: Vec<i8> = (0..n).map(|i| if c >> i & 1 == 1 { -1 } else { 1 }).collect();
            l.set_spins(&s).expect("valid spins");
            l.log_weight()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|v| (v - top).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / z).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Update {
    Metropolis,
    SwendsenWang,
}

/// Random-bond Ising run: `realizations` disorder samples, each a chain of
/// `burn_in + sweeps` updates.
#[derive(Clone, Debug, PartialEq)]
pub struct RbimConfig {
    pub l: usize,
    pub k: f64,
    pub p_bond: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub realizations: u64,
    pub update: Update,
}

impl RbimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l < 8 {
            return Err(Error::Config(format!("lattice size must be at least 8, got {}", self.l)));
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::Config(format!("coupling must be finite and non-negative, got {}", self.k)));
        }
        if !(0.0..=1.0).contains(&self.p_bond) {
            return Err(Error::Config(format!("bond probability must lie in [0, 1], got {}", self.p_bond)));
        }
        if self.sweeps == 0 || self.realizations == 0 {
            return Err(Error::Config("need at least one sweep and one realization".into()));
        }
        Ok(())
    }
}

/// Thermal averages of `|m|`, `m²` and `m⁴`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub abs_m: f64,
    pub m2: f64,
    pub m4: f64,
}

impl Moments {
    pub fn binder(&self) -> f64 {
        1.0 - self.m4 / (3.0 * self.m2 * self.m2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RbimResult {
    pub config: RbimConfig,
    pub per_realization: Vec<Moments>,
    /// Disorder average of the thermal moments.
    pub mean: Moments,
    /// Binder cumulant of the disorder-averaged moments.
    pub binder: f64,
}

impl RbimResult {
    /// Per-realization moments as records (`param` is the bond probability).
    pub fn records(&self, q: u32, seed: u64) -> Vec<RunRecord> {
        let c = &self.config;
        self.per_realization
            .iter()
            .enumerate()
            .flat_map(|(r, m)| {
                [("abs_m", m.abs_m), ("m2", m.m2), ("m4", m.m4)].map(|(name, value)| RunRecord {
                    model: ModelId::Rbim,
                    q,
                    lx: c.l,
                    ly: c.l,
                    param: c.p_bond,
                    region: Region::Named(name.into()),
                    sample: r as u64,
                    seed,
                    value,
                })
            })
            .collect()
    }
}

/// Disorder realization `r` draws its bonds and its chain from streams keyed
/// only by `(seed, r, l)`, so runs at different `k` or `p_bond` share disorder
/// uniforms and thermal noise.
pub fn run_rbim_mc(cfg: &RbimConfig, seed: u64) -> Result<RbimResult> {
    cfg.validate()?;
    let per_realization: Vec<Moments> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let rng = TrajectoryRng::new(seed, r);
            let mut lat = IsingLattice::diluted(cfg.l, cfg.k, cfg.p_bond, &mut rng.stream(Tag::Disorder, cfg.l as u64, 0))?;
            let mut chain = rng.stream(Tag::Chain, cfg.l as u64, 0);
            lat.randomize(&mut chain);
            Ok(sample_chain(&mut lat, cfg, &mut chain))
        })
        .collect::<Result<_>>()?;
    let n = per_realization.len() as f64;
    let mean = Moments {
        abs_m: per_realization.iter().map(|m| m.abs_m).sum::<f64>() / n,
        m2: per_realization.iter().map(|m| m.m2).sum::<f64>() / n,
        m4: per_realization.iter().map(|m| m.m4).sum::<f64>() / n,
    };
    Ok(RbimResult { config: cfg.clone(), per_realization, mean, binder: mean.binder() })
}

fn sample_chain<R: Rng + ?Sized>(lat: &mut IsingLattice, cfg: &RbimConfig, rng: &mut R) -> Moments {
    let n = lat.n_sites() as f64;
    let mut acc = Moments::default();
    for sweep in 0..cfg.burn_in + cfg.sweeps {
        let (m2, m4) = match cfg.update {
            Update::Metropolis => {
                lat.metropolis_sweep(rng);
                let m = lat.magnetization();
                (m * m, m.powi(4))
            }
            Update::SwendsenWang => {
                // cluster estimators: clusters flip independently
                let sizes = lat.swendsen_wang_sweep(rng);
                let s2: f64 = sizes.iter().map(|&c| (c as f64).powi(2)).sum();
                let s4: f64 = sizes.iter().map(|&c| (c as f64).powi(4)).sum();
                (s2 / (n * n), (3.0 * s2 * s2 - 2.0 * s4) / n.powi(4))
            }
        };
        if sweep >= cfg.burn_in {
            acc.abs_m += lat.magnetization().abs();
            acc.m2 += m2;
            acc.m4 += m4;
        }
    }
    let s = cfg.sweeps as f64;
    Moments { abs_m: acc.abs_m / s, m2: acc.m2 / s, m4: acc.m4 / s }
}

/// Crossing of Binder curves `(l, parameter, U₄)` between consecutive sizes.
pub fn rbim_binder_crossing(points: &[(usize, f64, f64)]) -> Result<FitResult> {
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for &(l, x, u) in points {
        curves.entry(l).or_default().push((x, u));
    }
    curve_crossing(&curves)
}
