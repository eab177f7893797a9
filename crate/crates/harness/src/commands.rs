//! One function per subcommand. Every setting is parsed and every simulation
//! config validated before anything runs, so configuration errors surface
//! before any output exists.

use std::collections::BTreeMap;

use mipt_core::experiments::{
    chord, collapse_residual, cross_ratio, estimate_pc, eta_collapse_spread, fit_alpha, fit_delta, fit_lambda,
    linear_fit, run_mutual_info, run_strip_entropy, run_two_edge_purification, Edges, FitResult, LambdaAxis, Model,
    Region, RunRecord, SimConfig,
};
use mipt_core::gf::Modulus;
use mipt_core::lattice::{BoundaryX, CliffordCircuitSpec, LatticeSpec};
use mipt_core::oracle::differential_check;
use mipt_core::rng::{Tag, TrajectoryRng};
use mipt_core::statmech::{effective_couplings, rbim_binder_crossing, run_rbim_mc, Couplings, RbimConfig, Update};
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, Settings};
use crate::output::NamedFit;
use crate::plot::{Plot, Series};

#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<RunRecord>,
    pub fits: Vec<NamedFit>,
    pub errors: Vec<String>,
    pub diagnostics: BTreeMap<String, Value>,
    pub plot: Plot,
}

impl Outcome {
    fn fit(&mut self, name: impl Into<String>, r: mipt_core::Result<FitResult>) {
        let name = name.into();
        match r {
            Ok(fit) => self.fits.push(NamedFit { name, fit }),
            Err(e) => self.errors.push(format!("{name}: {e}")),
        }
    }
}

type Res<T> = Result<T, ConfigError>;

pub fn execute(s: &Settings) -> Res<Outcome> {
    match s.command {
        Command::GraphScan | Command::GraphCritical | Command::CliffordScan => strip_scan(s),
        Command::MutualInfo => mutual_info(s),
        Command::Purify | Command::CliffordPurify => purify(s),
        Command::Couplings => couplings(s),
        Command::RbimMc => rbim(s),
        Command::Verify => verify(s),
    }
}

fn boundary(s: &Settings) -> Res<BoundaryX> {
    Ok(match s.choice("bc", &["periodic", "open"])? {
        "periodic" => BoundaryX::Periodic,
        _ => BoundaryX::Open,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// The model family of a command together with its scanned parameter values.
struct Family {
    q: Modulus,
    t: Option<usize>,
    params: Vec<f64>,
}

impl Family {
    fn from(s: &Settings) -> Res<Family> {
        if s.get("t").is_some() {
            Ok(Family { q: Modulus::new(2)?, t: Some(s.parse("t")?), params: s.f64_list("p")? })
        } else {
            Ok(Family { q: Modulus::new(s.parse("q")?)?, t: None, params: s.f64_list("px")? })
        }
    }

    fn model(&self, p: f64) -> Res<Model> {
        Ok(match self.t {
            Some(t) => Model::Clifford(CliffordCircuitSpec::new(t, p)?),
            None => Model::graph(p)?,
        })
    }

    fn label(&self) -> &'static str {
        if self.t.is_some() {
            "p"
        } else {
            "p_x"
        }
    }
}

fn sim(lx: usize, ly: usize, bc: BoundaryX, fam: &Family, p: f64, edges: Edges, window: Option<usize>) -> Res<SimConfig> {
    Ok(SimConfig::new(LatticeSpec::new(lx, ly, bc)?, fam.q, fam.model(p)?, edges, window)?)
}

/// `(start, len)` intervals: `starts` evenly spaced copies of each length. With
/// open boundaries the copies stay inside the row.
fn intervals(lx: usize, bc: BoundaryX, lens: &[usize], starts: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &len in lens {
        for k in 0..starts {
            let start = match bc {
                BoundaryX::Periodic => k * lx / starts,
                BoundaryX::Open if starts > 1 => k * (lx - len) / (starts - 1),
                BoundaryX::Open => (lx - len) / 2,
            };
            out.push((start, len));
        }
    }
    out
}

fn strip_scan(s: &Settings) -> Res<Outcome> {
    let fam = Family::from(s)?;
    let sizes = s.usize_list("lx")?;
    let ly: Option<usize> = s.parse_opt("ly")?;
    let bc = boundary(s)?;
    let window: Option<usize> = s.parse_opt("window")?;
    let samples: u64 = s.parse("samples")?;
    let seed: u64 = s.parse("seed")?;
    let starts: usize = s.parse("starts")?;
    let all = s.command == Command::GraphCritical || s.choice("intervals", &["ratio", "all"])? == "all";
    let ratio: f64 = if all { 0.0 } else { s.parse("ratio")? };
    if samples == 0 || starts == 0 {
        return Err(ConfigError("samples and starts must be positive".into()));
    }
    if !all && !(ratio > 0.0 && ratio < 1.0) {
        return Err(ConfigError(format!("ratio must lie in (0, 1), got {ratio}")));
    }

    let mut jobs = Vec::new();
    for &lx in &sizes {
        let lens: Vec<usize> = if all { (1..lx).collect() } else { vec![((ratio * lx as f64).round() as usize).clamp(1, lx - 1)] };
        for &p in &fam.params {
            let cfg = sim(lx, ly.unwrap_or(lx), bc, &fam, p, Edges::Top, window)?;
            jobs.push((cfg, intervals(lx, bc, &lens, starts)));
        }
    }
    let mut out = Outcome::default();
    for (cfg, regions) in &jobs {
        out.records.extend(run_strip_entropy(cfg, regions, samples, seed)?);
    }

    let mut groups: BTreeMap<(usize, u64, usize), Vec<f64>> = BTreeMap::new();
    for r in &out.records {
        if let Region::Interval { len, .. } = r.region {
            groups.entry((r.lx, r.param.to_bits(), len)).or_default().push(r.value);
        }
    }
    let means: Vec<Value> = groups
        .iter()
        .map(|(&(lx, p, len), v)| json!({"lx": lx, "param": f64::from_bits(p), "len": len, "mean": mean(v)}))
        .collect();
    out.diagnostics.insert("means".into(), Value::Array(means));

    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    if all {
        for &p in &fam.params {
            let recs: Vec<RunRecord> = out.records.iter().filter(|r| r.param == p).cloned().collect();
            out.fit(format!("alpha@{}={p}", fam.label()), fit_alpha(&recs));
        }
        for (&(lx, p, len), v) in &groups {
            let name = format!("L_x={lx}, {}={}", fam.label(), f64::from_bits(p));
            series.entry(name).or_default().push((chord(len as f64, lx as f64), mean(v)));
        }
        out.plot = Plot { x_label: "chord length".into(), y_label: "mean S_A".into(), log_x: true, ..Plot::default() };
    } else {
        if sizes.len() >= 2 && fam.params.len() >= 2 {
            out.fit("p_c", estimate_pc(&out.records));
        } else {
            out.diagnostics.insert("note".into(), json!("p_c is estimated only with two sizes and two parameter values"));
        }
        for (&(lx, p, _), v) in &groups {
            series.entry(format!("L_x={lx}")).or_default().push((f64::from_bits(p), mean(v) / (lx as f64).ln()));
        }
        out.plot = Plot { x_label: fam.label().into(), y_label: "mean S_A / ln L_x".into(), ..Plot::default() };
    }
    out.plot.title = s.command.name().into();
    out.plot.series = series.into_iter().map(|(name, points)| Series { name, points }).collect();
    Ok(out)
}

fn mutual_info(s: &Settings) -> Res<Outcome> {
    let fam = Family::from(s)?;
    let [p] = fam.params[..] else {
        return Err(ConfigError("mutual-info takes a single px".into()));
    };
    let lx: usize = s.parse("lx")?;
    let ly: usize = s.parse_opt("ly")?.unwrap_or(lx);
    let window: Option<usize> = s.parse_opt("window")?;
    let samples: u64 = s.parse("samples")?;
    let pairs: usize = s.parse("pairs")?;
    let seed: u64 = s.parse("seed")?;
    let min_count: usize = s.parse("min-count")?;
    if lx < 4 {
        return Err(ConfigError("mutual information needs lx ≥ 4".into()));
    }
    let cfg = sim(lx, ly, BoundaryX::Periodic, &fam, p, Edges::Top, window)?;

    let mut out = Outcome { records: run_mutual_info(&cfg, samples, pairs, seed)?, ..Outcome::default() };
    out.fit("delta", fit_delta(&out.records, min_count));
    match eta_collapse_spread(&out.records, min_count) {
        Ok(v) => {
            out.diagnostics.insert("eta_collapse_spread".into(), json!(v));
        }
        Err(e) => out.errors.push(format!("eta_collapse_spread: {e}")),
    }
    let mut bins: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &out.records {
        if let Region::Pair([a, b, c, d]) = r.region {
            let eta = cross_ratio(a, b, c, d, lx)?;
            let e = bins.entry((8.0 * eta.log10()).floor() as i64).or_default();
            e.0.push(eta);
            e.1.push(r.value);
        }
    }
    let binned: Vec<(f64, f64, usize)> = bins.values().map(|(e, v)| (mean(e), mean(v), v.len())).collect();
    out.diagnostics.insert(
        "bins".into(),
        binned.iter().map(|&(e, i, n)| json!({"eta": e, "mean_i": i, "count": n})).collect(),
    );
    out.plot = Plot {
        title: "mutual-info".into(),
        x_label: "eta".into(),
        y_label: "mean I_AB".into(),
        log_x: true,
        log_y: true,
        series: vec![Series { name: format!("L_x={lx}"), points: binned.iter().map(|b| (b.0, b.1)).collect() }],
    };
    Ok(out)
}

fn purify(s: &Settings) -> Res<Outcome> {
    let fam = Family::from(s)?;
    let [p] = fam.params[..] else {
        return Err(ConfigError(format!("{} takes a single parameter value", s.command.name())));
    };
    let clifford = s.command == Command::CliffordPurify;
    let sizes = s.usize_list("lx")?;
    let bc = boundary(s)?;
    let window: Option<usize> = s.parse_opt("window")?;
    let samples: u64 = s.parse("samples")?;
    let seed: u64 = s.parse("seed")?;
    let drop_first: usize = s.parse("drop-first")?;
    let min_x: f64 = s.parse("min-x")?;
    let min_nonzero: usize = s.parse("min-nonzero")?;
    let axis = if clifford { LambdaAxis::PiTau } else { LambdaAxis::Ly };

    let mut jobs = Vec::new();
    for &lx in &sizes {
        let mut heights = if s.get("heights").is_some() {
            s.usize_list("heights")?
        } else {
            s.f64_list("tau")?.iter().map(|t| (t * lx as f64).round() as usize).collect()
        };
        heights.sort_unstable();
        heights.dedup();
        if heights[0] < 3 {
            return Err(ConfigError(format!("heights must be at least 3, got {} at lx = {lx}", heights[0])));
        }
        let cfg = sim(lx, *heights.last().unwrap(), bc, &fam, p, Edges::TopAndBottom, window)?;
        jobs.push((lx, cfg, heights));
    }
    let mut out = Outcome::default();
    let mut lambdas = Vec::new();
    let mut series = Vec::new();
    for (lx, cfg, heights) in &jobs {
        let recs = run_two_edge_purification(cfg, heights, samples, seed)?;
        let fit = fit_lambda(&recs, axis, drop_first, min_x, min_nonzero);
        if let Ok(f) = &fit {
            lambdas.push((*lx, f.value));
        }
        out.fit(format!("lambda@lx={lx}"), fit);
        let mut points = Vec::new();
        for &ly in heights {
            let v: Vec<f64> = recs.iter().filter(|r| r.ly == ly).map(|r| r.value).collect();
            let x = if clifford { ly as f64 / *lx as f64 } else { ly as f64 };
            let y = if clifford { mean(&v) } else { mean(&v) / *lx as f64 };
            points.push((x, y));
        }
        series.push(Series { name: format!("L_x={lx}"), points });
        out.records.extend(recs);
    }
    let means: Vec<Value> = series
        .iter()
        .zip(&jobs)
        .flat_map(|(se, (lx, _, hs))| hs.iter().zip(&se.points).map(move |(ly, pt)| json!({"lx": lx, "ly": ly, "y": pt.1})))
        .collect();
    out.diagnostics.insert("means".into(), Value::Array(means));
    if lambdas.len() >= 2 {
        let monotone = lambdas.windows(2).all(|w| w[1].1 < w[0].1);
        let xs: Vec<f64> = lambdas.iter().map(|&(lx, _)| 1.0 / lx as f64).collect();
        let ys: Vec<f64> = lambdas.iter().map(|l| l.1).collect();
        let mut d = json!({"decreasing_in_lx": monotone});
        if let Ok(f) = linear_fit(&xs, &ys) {
            d["slope"] = json!(f.slope);
            d["intercept"] = json!(f.intercept);
            d["r2"] = json!(f.r2);
        }
        out.diagnostics.insert("lambda_vs_inverse_lx".into(), d);
    }
    if clifford && sizes.len() >= 2 {
        match collapse_residual(&out.records) {
            Ok(v) => {
                out.diagnostics.insert("collapse_residual".into(), json!(v));
            }
            Err(e) => out.errors.push(format!("collapse_residual: {e}")),
        }
    }
    out.plot = Plot {
        title: s.command.name().into(),
        x_label: if clifford { "L_y / L_x" } else { "L_y" }.into(),
        y_label: if clifford { "mean S_top" } else { "mean S_top / L_x" }.into(),
        log_y: true,
        series,
        ..Plot::default()
    };
    Ok(out)
}

fn couplings(s: &Settings) -> Res<Outcome> {
    let qs = s.usize_list("q")?;
    let mut rows = Vec::new();
    for &q in &qs {
        let qf = q as f64;
        rows.push((q, Couplings::new(qf)?, effective_couplings(qf)?));
    }
    let mut out = Outcome::default();
    let mut diag = Vec::new();
    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for (q, c, e) in &rows {
        let named = [
            ("j_vert", c.j_vert),
            ("j_horiz", c.j_horiz),
            ("j12", c.j12),
            ("j13", c.j13),
            ("j1234", c.j1234),
            ("residual", e.residual),
        ];
        for (name, value) in named {
            out.records.push(RunRecord {
                model: mipt_core::experiments::ModelId::Rbim,
                q: *q as u32,
                lx: 0,
                ly: 0,
                param: *q as f64,
                region: Region::Named(name.into()),
                sample: 0,
                seed: 0,
                value,
            });
            if name != "residual" {
                series.entry(name).or_default().push((*q as f64, value));
            }
        }
        let nonpositive: Vec<String> = e.nonpositive.iter().map(|o| format!("{o:?}")).collect();
        diag.push(json!({
            "q": q, "j_vert": c.j_vert, "j_horiz": c.j_horiz, "j12": c.j12, "j13": c.j13, "j1234": c.j1234,
            "log_norm": e.log_norm, "residual": e.residual, "nonpositive_orbits": nonpositive,
        }));
    }
    out.diagnostics.insert("couplings".into(), Value::Array(diag));
    out.plot = Plot {
        title: "couplings".into(),
        x_label: "q".into(),
        y_label: "coupling".into(),
        log_x: true,
        series: series.into_iter().map(|(n, points)| Series { name: n.into(), points }).collect(),
        ..Plot::default()
    };
    Ok(out)
}

fn rbim(s: &Settings) -> Res<Outcome> {
    let sizes = s.usize_list("l")?;
    let coupling_q: Option<u32> = s.parse_opt("coupling-q")?;
    let ks = match (s.get("k"), coupling_q) {
        (Some(_), None) => s.f64_list("k")?,
        (None, Some(q)) => vec![2.0 * mipt_core::statmech::coupling_jvert(q as f64)?],
        _ => return Err(ConfigError("give exactly one of `k` and `coupling-q`".into())),
    };
    let pbonds = s.f64_list("pbond")?;
    if ks.len() > 1 && pbonds.len() > 1 {
        return Err(ConfigError("scan either `k` or `pbond`, not both".into()));
    }
    let update = match s.choice("update", &["metropolis", "sw"])? {
        "metropolis" => Update::Metropolis,
        _ => Update::SwendsenWang,
    };
    let (sweeps, burn_in, realizations): (usize, usize, u64) =
        (s.parse("sweeps")?, s.parse("burn-in")?, s.parse("realizations")?);
    let seed: u64 = s.parse("seed")?;
    let scan_k = ks.len() > 1;

    let mut jobs = Vec::new();
    for &l in &sizes {
        for &k in &ks {
            for &p_bond in &pbonds {
                let cfg = RbimConfig { l, k, p_bond, sweeps, burn_in, realizations, update };
                cfg.validate()?;
                jobs.push(cfg);
            }
        }
    }
    let mut out = Outcome::default();
    let mut points = Vec::new();
    let mut diag = Vec::new();
    for cfg in &jobs {
        let res = run_rbim_mc(cfg, seed)?;
        let x = if scan_k { cfg.k } else { cfg.p_bond };
        out.records.extend(res.records(coupling_q.unwrap_or(0), seed).into_iter().map(|r| RunRecord { param: x, ..r }));
        points.push((cfg.l, x, res.binder));
        diag.push(json!({
            "l": cfg.l, "k": cfg.k, "p_bond": cfg.p_bond,
            "abs_m": res.mean.abs_m, "m2": res.mean.m2, "m4": res.mean.m4, "binder": res.binder,
        }));
    }
    out.diagnostics.insert("points".into(), Value::Array(diag));
    if sizes.len() >= 2 && ks.len().max(pbonds.len()) >= 2 {
        out.fit(if scan_k { "k_c" } else { "p_c" }, rbim_binder_crossing(&points));
    }
    let mut series: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for &(l, x, u) in &points {
        series.entry(l).or_default().push((x, u));
    }
    out.plot = Plot {
        title: "rbim-mc".into(),
        x_label: if scan_k { "K" } else { "p_bond" }.into(),
        y_label: "Binder U4".into(),
        series: series.into_iter().map(|(l, points)| Series { name: format!("L={l}"), points }).collect(),
        ..Plot::default()
    };
    Ok(out)
}

fn verify(s: &Settings) -> Res<Outcome> {
    let q = Modulus::new(s.parse("q")?)?;
    let n: usize = s.parse("lx")?;
    let ops: usize = s.parse("ops")?;
    let cases: u64 = s.parse("cases")?;
    let seed: u64 = s.parse("seed")?;
    if n < 2 || (q.get() as f64).powi(n as i32) > (1u64 << 20) as f64 {
        return Err(ConfigError(format!("verify needs 2 ≤ lx and q^lx ≤ 2^20, got q = {}, lx = {n}", q.get())));
    }
    let mut out = Outcome::default();
    let mut compared = 0;
    for c in 0..cases {
        let mut rng = TrajectoryRng::new(seed, c).stream(Tag::Gate, 0, 0);
        let report = differential_check(q, n, ops, &mut rng)?;
        compared += report.regions_compared;
        for (region, tab, dense) in &report.mismatches {
            out.errors.push(format!("case {c}: region {region:?} tableau {tab} dense {dense}"));
        }
        out.records.push(RunRecord {
            model: mipt_core::experiments::ModelId::Graph,
            q: q.get(),
            lx: n,
            ly: 0,
            param: ops as f64,
            region: Region::Named("mismatches".into()),
            sample: c,
            seed,
            value: report.mismatches.len() as f64,
        });
    }
    out.diagnostics.insert("regions_compared".into(), json!(compared));
    out.plot = Plot {
        title: "verify".into(),
        x_label: "case".into(),
        y_label: "mismatches".into(),
        series: vec![Series {
            name: format!("q={}, n={n}", q.get()),
            points: out.records.iter().map(|r| (r.sample as f64, r.value)).collect(),
        }],
        ..Plot::default()
    };
    Ok(out)
}
