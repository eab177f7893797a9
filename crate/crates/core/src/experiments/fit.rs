//! Exponent and critical-point estimators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{chord, cross_ratio, Region, RunRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Alpha,
    Delta,
    Lambda,
    Pc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    pub value: f64,
    pub stderr: f64,
    /// Human-readable description of the data the fit used.
    pub window: String,
}

/// Ordinary least squares `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::Fit(format!("need at least two points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, slope_stderr, r2 })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `α` from `S_A = 2α ln[(L_x/π) sin(π L_A/L_x)]`, using interval records with
/// `L_A/L_x ∈ [1/8, 1/2]`. Intervals of equal `(L_x, L_A)` are averaged first.
pub fn fit_alpha(records: &[RunRecord]) -> Result<FitResult> {
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Region::Interval { len, .. } = r.region {
            let ratio = len as f64 / r.lx as f64;
            if (0.125..=0.5).contains(&ratio) {
                groups.entry((r.lx, len)).or_default().push(r.value);
            }
        }
    }
    let xs: Vec<f64> = groups.keys().map(|&(lx, len)| chord(len as f64, lx as f64).ln()).collect();
    let ys: Vec<f64> = groups.values().map(|v| mean(v)).collect();
    let mut distinct = xs.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 3 {
        return Err(Error::Fit(format!("alpha fit needs 3 distinct abscissae, got {}", distinct.len())));
    }
    let f = linear_fit(&xs, &ys)?;
    let mut sizes: Vec<usize> = groups.keys().map(|k| k.0).collect();
    sizes.dedup();
    Ok(FitResult {
        kind: FitKind::Alpha,
        value: f.slope / 2.0,
        stderr: f.slope_stderr / 2.0,
        window: format!("L_A/L_x in [1/8, 1/2], {} (L_x, L_A) groups, L_x in {sizes:?}", groups.len()),
    })
}

/// Geometric bins per decade of `η`.
pub const DELTA_BINS_PER_DECADE: f64 = 8.0;

/// `Δ` from `I_AB ∼ η^Δ`: slope of `ln mean I` against `ln η` over the
/// populated bins of the smallest populated decade. A bin is populated when it
/// holds at least `min_count` records and a positive mean.
pub fn fit_delta(records: &[RunRecord], min_count: usize) -> Result<FitResult> {
    let mut bins: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        if let Region::Pair([a, b, c, d]) = r.region {
            let eta = cross_ratio(a, b, c, d, r.lx)?;
            let k = (DELTA_BINS_PER_DECADE * eta.log10()).floor() as i64;
            let e = bins.entry(k).or_default();
            e.0.push(eta.ln());
            e.1.push(r.value);
        }
    }
    let populated: Vec<(i64, f64, f64)> = bins
        .iter()
        .filter(|(_, (_, v))| v.len() >= min_count.max(1) && mean(v) > 0.0)
        .map(|(&k, (le, v))| (k, mean(le), mean(v).ln()))
        .collect();
    let Some(&(k0, _, _)) = populated.first() else {
        return Err(Error::Fit("no populated eta bin".into()));
    };
    let window: Vec<&(i64, f64, f64)> =
        populated.iter().filter(|(k, _, _)| *k < k0 + DELTA_BINS_PER_DECADE as i64).collect();
    if window.len() < 3 {
        return Err(Error::Fit(format!("only {} populated bins in the smallest decade", window.len())));
    }
    let xs: Vec<f64> = window.iter().map(|w| w.1).collect();
    let ys: Vec<f64> = window.iter().map(|w| w.2).collect();
    let f = linear_fit(&xs, &ys)?;
    let lo = 10f64.powf(k0 as f64 / DELTA_BINS_PER_DECADE);
    Ok(FitResult {
        kind: FitKind::Delta,
        value: f.slope,
        stderr: f.slope_stderr,
        window: format!("eta in [{lo:.3e}, {:.3e}), {} bins", lo * 10.0, window.len()),
    })
}

/// Largest relative spread, over `η` bins, of mean `I_AB` across interval-size
/// classes: records in a bin are grouped by `⌊log₂ min(|A|, |B|)⌋`, groups with
/// fewer than `min_count` records are dropped, and the bin's spread is
/// `(max − min)/mean` of the group means. Zero when `I_AB` depends on `η` alone.
pub fn eta_collapse_spread(records: &[RunRecord], min_count: usize) -> Result<f64> {
    let mut bins: BTreeMap<i64, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in records {
        if let Region::Pair([a, b, c, d]) = r.region {
            let eta = cross_ratio(a, b, c, d, r.lx)?;
            let k = (DELTA_BINS_PER_DECADE * eta.log10()).floor() as i64;
            let class = (b - a).min(d - c).max(1).ilog2();
            bins.entry(k).or_default().entry(class).or_default().push(r.value);
        }
    }
    let mut worst: Option<f64> = None;
    for groups in bins.values() {
        let means: Vec<f64> = groups.values().filter(|v| v.len() >= min_count.max(1)).map(|v| mean(v)).collect();
        let m = mean(&means);
        if means.len() < 2 || m <= 0.0 {
            continue;
        }
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        worst = Some(worst.unwrap_or(0.0).max((hi - lo) / m));
    }
    worst.ok_or_else(|| Error::Fit("no eta bin holds two populated size classes".into()))
}

/// Abscissa for the purification decay fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaAxis {
    /// `L_y`, as in `S_top/L_x ∝ exp(−λ L_y)`.
    Ly,
    /// `π L_y/L_x`, as in `S_top ∝ exp(−λ π τ)`.
    PiTau,
}

/// Decay rate from two-edge records: minus the slope of `ln(mean S_top / L_x)`.
///
/// The `drop_first` smallest heights are discarded as transient, along with
/// heights whose abscissa is below `min_x` and heights where fewer than
/// `min_nonzero` samples are nonzero.
pub fn fit_lambda(
    records: &[RunRecord],
    axis: LambdaAxis,
    drop_first: usize,
    min_x: f64,
    min_nonzero: usize,
) -> Result<FitResult> {
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.region == Region::Top) {
        groups.entry((r.lx, r.ly)).or_default().push(r.value);
    }
    let mut heights: Vec<usize> = groups.keys().map(|k| k.1).collect();
    heights.sort_unstable();
    heights.dedup();
    let cut = heights.get(drop_first).copied().unwrap_or(usize::MAX);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&(lx, ly), v) in &groups {
        let x = match axis {
            LambdaAxis::Ly => ly as f64,
            LambdaAxis::PiTau => std::f64::consts::PI * ly as f64 / lx as f64,
        };
        let nonzero = v.iter().filter(|&&s| s > 0.0).count();
        if ly < cut || x < min_x || nonzero < min_nonzero.max(1) {
            continue;
        }
        xs.push(x);
        ys.push((mean(v) / lx as f64).ln());
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!("lambda fit needs 3 heights with S_top > 0, got {}", xs.len())));
    }
    let f = linear_fit(&xs, &ys)?;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        kind: FitKind::Lambda,
        value: -f.slope,
        stderr: f.slope_stderr,
        window: format!("{axis:?} in [{lo:.4}, {hi:.4}], {} points, R2 = {:.4}", xs.len(), f.r2),
    })
}

/// Spread of two-edge curves `mean S_top(L_y/L_x)` across sizes, relative to
/// their range: the RMS over shared `τ` of `max_L S − min_L S`, divided by
/// `max − min` of all those means. Zero for a perfect collapse.
pub fn collapse_residual(records: &[RunRecord]) -> Result<f64> {
    let mut groups: BTreeMap<(u64, usize), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.region == Region::Top) {
        let tau = r.ly as f64 / r.lx as f64;
        groups.entry((tau.to_bits(), r.lx)).or_default().push(r.value);
    }
    let sizes: std::collections::BTreeSet<usize> = groups.keys().map(|k| k.1).collect();
    if sizes.len() < 2 {
        return Err(Error::Fit(format!("collapse needs two sizes, got {}", sizes.len())));
    }
    let mut by_tau: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (&(tau, _), v) in &groups {
        by_tau.entry(tau).or_default().push(mean(v));
    }
    let shared: Vec<&Vec<f64>> = by_tau.values().filter(|m| m.len() == sizes.len()).collect();
    if shared.len() < 2 {
        return Err(Error::Fit("collapse needs two shared values of L_y/L_x".into()));
    }
    let spread = |m: &Vec<f64>| {
        let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - m.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let rms = (shared.iter().map(|m| spread(m).powi(2)).sum::<f64>() / shared.len() as f64).sqrt();
    let all: Vec<f64> = shared.iter().flat_map(|m| m.iter().copied()).collect();
    let range = spread(&all);
    if range == 0.0 {
        return Err(Error::Fit("curves are flat".into()));
    }
    Ok(rms / range)
}

/// Critical parameter from the crossing of `mean S_A / ln L_x` curves of
/// consecutive sizes.
///
/// For each size pair the difference `d(p) = f_{L2}(p) − f_{L1}(p)` is formed on
/// the shared parameter grid; it is negative in the area-law phase and positive
/// in the volume-law phase. With one sign change the crossing is its linear
/// interpolation; with several, the root of a straight-line fit to `d` over the
/// span of sign changes. The estimate averages over size pairs; its error is
/// the spread of the pair crossings, or half the local grid step when only one
/// pair exists.
pub fn estimate_pc(records: &[RunRecord]) -> Result<FitResult> {
    let mut by_size: BTreeMap<usize, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in records {
        if matches!(r.region, Region::Interval { .. }) {
            by_size.entry(r.lx).or_default().entry(r.param.to_bits()).or_default().push(r.value);
        }
    }
    let curves: BTreeMap<usize, Vec<(f64, f64)>> = by_size
        .iter()
        .map(|(&lx, pts)| (lx, pts.iter().map(|(&p, v)| (f64::from_bits(p), mean(v) / (lx as f64).ln())).collect()))
        .collect();
    curve_crossing(&curves)
}

/// Crossing point of curves `size → [(param, value)]` for consecutive sizes,
/// with the rules of [`estimate_pc`].
pub fn curve_crossing(curves: &BTreeMap<usize, Vec<(f64, f64)>>) -> Result<FitResult> {
    let sizes: Vec<usize> = curves.keys().copied().collect();
    if sizes.len() < 2 {
        return Err(Error::Fit(format!("need at least two sizes, got {}", sizes.len())));
    }
    let curve = |l: usize| -> BTreeMap<u64, f64> { curves[&l].iter().map(|&(p, v)| (p.to_bits(), v)).collect() };
    let mut crossings = Vec::new();
    let mut step = f64::NAN;
    for w in sizes.windows(2) {
        let (c1, c2) = (curve(w[0]), curve(w[1]));
        let mut pts: Vec<(f64, f64)> =
            c1.iter().filter_map(|(p, f1)| c2.get(p).map(|f2| (f64::from_bits(*p), f2 - f1))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let changes: Vec<usize> = (1..pts.len()).filter(|&i| (pts[i - 1].1 < 0.0) != (pts[i].1 < 0.0)).collect();
        let pc = match changes.as_slice() {
            [] => continue,
            [i] => {
                let ((p0, d0), (p1, d1)) = (pts[i - 1], pts[*i]);
                step = p1 - p0;
                p0 - d0 * (p1 - p0) / (d1 - d0)
            }
            many => {
                let (lo, hi) = (many[0] - 1, many[many.len() - 1]);
                let xs: Vec<f64> = pts[lo..=hi].iter().map(|p| p.0).collect();
                let ys: Vec<f64> = pts[lo..=hi].iter().map(|p| p.1).collect();
                let f = linear_fit(&xs, &ys)?;
                step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
                -f.intercept / f.slope
            }
        };
        crossings.push(pc);
    }
    if crossings.is_empty() {
        return Err(Error::Fit("no crossing in the parameter grid".into()));
    }
    let n = crossings.len() as f64;
    let m = mean(&crossings);
    let stderr = if crossings.len() > 1 {
        (crossings.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        step.abs() / 2.0
    };
    Ok(FitResult {
        kind: FitKind::Pc,
        value: m,
        stderr,
        window: format!(
            "sizes {:?}, pair crossings [{}]",
            sizes,
            crossings.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", ")
        ),
    })
}
