//! Measurement protocols on the top boundary and the fits applied to them.

mod engine;
mod fit;

pub use engine::{bulk_measurement, full_lattice, Edges, Engine, Model, SimConfig};
pub use fit::{collapse_residual, curve_crossing, estimate_pc, eta_collapse_spread, fit_alpha, fit_delta, fit_lambda, linear_fit, FitKind, FitResult, LambdaAxis, LinearFit};

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Tag, TrajectoryRng};

/// What a record's value was measured on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Sites `start, start+1, …, start+len−1` (mod `l_x`) of the top row.
    Interval { start: usize, len: usize },
    /// `A = [x1, x2)`, `B = [x3, x4)` on the top row, `x1 < x2 < x3 < x4`.
    Pair([usize; 4]),
    /// The whole top row.
    Top,
    /// A named scalar, e.g. a Monte Carlo moment.
    Named(String),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval { start, len } => write!(f, "interval:{start}:{len}"),
            Region::Pair([a, b, c, d]) => write!(f, "pair:{a}:{b}:{c}:{d}"),
            Region::Top => write!(f, "top"),
            Region::Named(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = |p: &[&str]| -> Result<Vec<usize>> {
            p.iter()
                .map(|v| v.parse().map_err(|_| Error::Config(format!("bad region `{s}`"))))
                .collect()
        };
        match parts[0] {
            "interval" if parts.len() == 3 => {
                let v = nums(&parts[1..])?;
                Ok(Region::Interval { start: v[0], len: v[1] })
            }
            "pair" if parts.len() == 5 => {
                let v = nums(&parts[1..])?;
                Ok(Region::Pair([v[0], v[1], v[2], v[3]]))
            }
            "top" => Ok(Region::Top),
            _ if !s.is_empty() && !s.contains(',') => Ok(Region::Named(s.to_string())),
            _ => Err(Error::Config(format!("bad region `{s}`"))),
        }
    }
}

impl Region {
    /// Top-row sites covered by an interval.
    pub fn interval_sites(start: usize, len: usize, l_x: usize) -> Vec<usize> {
        (0..len).map(|k| (start + k) % l_x).collect()
    }
}

/// Which simulation produced a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelId {
    Graph,
    Clifford,
    Rbim,
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelId::Graph => "graph",
            ModelId::Clifford => "clifford",
            ModelId::Rbim => "rbim",
        })
    }
}

/// One sampled observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: ModelId,
    pub q: u32,
    pub lx: usize,
    pub ly: usize,
    pub param: f64,
    pub region: Region,
    pub sample: u64,
    pub seed: u64,
    pub value: f64,
}

impl RunRecord {
    fn sim(cfg: &SimConfig, ly: usize, region: Region, sample: u64, seed: u64, value: f64) -> Self {
        RunRecord {
            model: match cfg.model {
                Model::Graph { .. } => ModelId::Graph,
                Model::Clifford(_) => ModelId::Clifford,
            },
            q: cfg.q.get(),
            lx: cfg.lattice.l_x(),
            ly,
            param: cfg.model.param(),
            region,
            sample,
            seed,
            value,
        }
    }
}

/// Runs `samples` trajectories in parallel and concatenates their records in
/// trajectory order.
fn per_trajectory<F>(samples: u64, f: F) -> Result<Vec<RunRecord>>
where
    F: Fn(u64) -> Result<Vec<RunRecord>> + Sync + Send,
{
    let chunks: Vec<Vec<RunRecord>> = (0..samples).into_par_iter().map(f).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Steady-state entropy of each interval in `regions` on the top boundary.
pub fn run_strip_entropy(cfg: &SimConfig, regions: &[(usize, usize)], samples: u64, seed: u64) -> Result<Vec<RunRecord>> {
    if cfg.edges != Edges::Top {
        return Err(Error::Config("strip entropy needs the top-edge geometry".into()));
    }
    let l_x = cfg.lattice.l_x();
    if let Some(r) = regions.iter().find(|r| r.0 >= l_x || r.1 > l_x) {
        return Err(Error::Config(format!("interval {r:?} does not fit l_x = {l_x}")));
    }
    per_trajectory(samples, |s| {
        let mut e = Engine::new(cfg, TrajectoryRng::new(seed, s));
        e.finish()?;
        let top = e.top_slots();
        Ok(regions
            .iter()
            .map(|&(start, len)| {
                let sites: Vec<usize> = Region::interval_sites(start, len, l_x).iter().map(|&x| top[x]).collect();
                let v = e.tableau().entropy_region(&sites) as f64;
                RunRecord::sim(cfg, cfg.lattice.l_y(), Region::Interval { start, len }, s, seed, v)
            })
            .collect())
    })
}

/// Entropy of one interval after each height in `ly_values`, from a single
/// growing lattice per trajectory.
pub fn run_strip_profile(
    cfg: &SimConfig,
    region: (usize, usize),
    ly_values: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    if cfg.edges != Edges::Top {
        return Err(Error::Config("strip profile needs the top-edge geometry".into()));
    }
    check_heights(cfg, ly_values, 2)?;
    let l_x = cfg.lattice.l_x();
    per_trajectory(samples, |s| {
        snapshots(cfg, seed, s, ly_values, |e, ly| {
            let top = e.top_slots();
            let sites: Vec<usize> = Region::interval_sites(region.0, region.1, l_x).iter().map(|&x| top[x]).collect();
            let v = e.tableau().entropy_region(&sites) as f64;
            RunRecord::sim(cfg, ly, Region::Interval { start: region.0, len: region.1 }, s, seed, v)
        })
    })
}

fn check_heights(cfg: &SimConfig, ly_values: &[usize], min: usize) -> Result<()> {
    if ly_values.is_empty() {
        return Err(Error::Config("no heights requested".into()));
    }
    if let Some(&l) = ly_values.iter().find(|&&l| l < min || l > cfg.lattice.l_y()) {
        return Err(Error::Config(format!(
            "height {l} outside [{min}, {}]",
            cfg.lattice.l_y()
        )));
    }
    Ok(())
}

fn snapshots<F>(cfg: &SimConfig, seed: u64, s: u64, ly_values: &[usize], mut f: F) -> Result<Vec<RunRecord>>
where
    F: FnMut(&Engine, usize) -> RunRecord,
{
    let mut heights = ly_values.to_vec();
    heights.sort_unstable();
    heights.dedup();
    let mut e = Engine::new(cfg, TrajectoryRng::new(seed, s));
    let mut out = Vec::with_capacity(heights.len());
    for ly in heights {
        e.run_until(ly)?;
        let cut = e.truncated(ly)?;
        out.push(f(&cut, ly));
    }
    Ok(out)
}

/// Mutual information of `pairs` random interval pairs per trajectory.
pub fn run_mutual_info(cfg: &SimConfig, samples: u64, pairs: usize, seed: u64) -> Result<Vec<RunRecord>> {
    if cfg.edges != Edges::Top {
        return Err(Error::Config("mutual information needs the top-edge geometry".into()));
    }
    let l_x = cfg.lattice.l_x();
    per_trajectory(samples, |s| {
        let rng = TrajectoryRng::new(seed, s);
        let mut e = Engine::new(cfg, rng);
        e.finish()?;
        let top = e.top_slots();
        let ent = |xs: &[usize]| e.tableau().entropy_region(&xs.iter().map(|&x| top[x]).collect::<Vec<_>>()) as i64;
        Ok((0..pairs)
            .map(|k| {
                let mut r = rng.stream(Tag::Interval, k as u64, 0);
                let mut x: Vec<usize> = sample(&mut r, l_x, 4).into_vec();
                x.sort_unstable();
                let a: Vec<usize> = (x[0]..x[1]).collect();
                let b: Vec<usize> = (x[2]..x[3]).collect();
                let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
                let i_ab = ent(&a) + ent(&b) - ent(&ab);
                RunRecord::sim(cfg, cfg.lattice.l_y(), Region::Pair([x[0], x[1], x[2], x[3]]), s, seed, i_ab as f64)
            })
            .collect())
    })
}

/// Entropy between the top and bottom rows for each height in `ly_values`.
pub fn run_two_edge_purification(cfg: &SimConfig, ly_values: &[usize], samples: u64, seed: u64) -> Result<Vec<RunRecord>> {
    if cfg.edges != Edges::TopAndBottom {
        return Err(Error::Config("purification needs the two-edge geometry".into()));
    }
    check_heights(cfg, ly_values, 3)?;
    per_trajectory(samples, |s| {
        snapshots(cfg, seed, s, ly_values, |e, ly| {
            let v = e.tableau().entropy_region(&e.top_slots()) as f64;
            RunRecord::sim(cfg, ly, Region::Top, s, seed, v)
        })
    })
}

/// Chord length `(L/π) sin(π d/L)` on a ring of `l` sites.
pub fn chord(d: f64, l: f64) -> f64 {
    l / std::f64::consts::PI * (std::f64::consts::PI * d / l).sin()
}

/// Cross ratio `η = x12 x34 / (x13 x24)` of four sorted ring positions.
pub fn cross_ratio(x1: usize, x2: usize, x3: usize, x4: usize, l_x: usize) -> Result<f64> {
    if !(x1 < x2 && x2 < x3 && x3 < x4 && x4 < l_x) {
        return Err(Error::Config(format!("positions {x1} {x2} {x3} {x4} must be sorted, distinct and below {l_x}")));
    }
    let l = l_x as f64;
    let c = |a: usize, b: usize| chord(a.abs_diff(b) as f64, l);
    Ok(c(x1, x2) * c(x3, x4) / (c(x1, x3) * c(x2, x4)))
}
