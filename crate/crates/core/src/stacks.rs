//! Level sets of the maximal multiplicity profile across directions: the product
//! inequality `|F_{4KM}| <= C K |F_K| |F_M|`, the exceptional set `E`, the L² bound
//! on `E`, the decay of `|proj(G_{lN})|` in `l`, and the measure of bad directions.
//!
//! `F_J = {f*_N > J}` (strict) and `A*_K = {f*_N >= K}` (weak).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{SimilaritySystem, DEFAULT_ENUMERATION_CAP};
use crate::report::{fmt_f64, Report};
use crate::shadow::{maximal_profile_with_cap, multiplicity_with_cap, shadow_length, StepFunction};
use crate::spectral::{phi, range_product, Direction, ProductSpec};

/// `count` equally spaced angles `iπ/count` in `[0, π)`.
pub fn theta_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| PI * i as f64 / count as f64).collect()
}

/// `∫f - |{f >= 1}| - (K-1)|{f >= K}|`, summed cell by cell from nonnegative terms.
pub fn mass_level_slack(f: &StepFunction, k: u32) -> f64 {
    f.cells()
        .map(|(lo, hi, v)| {
            let lower = (v >= 1) as u32 + if v >= k { k.saturating_sub(1) } else { 0 };
            (v - lower.min(v)) as f64 * (hi - lo)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductRow {
    pub theta: f64,
    pub k: u32,
    pub m: u32,
    pub f_k: f64,
    pub f_m: f64,
    pub f_4km: f64,
    /// `|F_{4KM}| / (K |F_K| |F_M|)`; 0 when the numerator vanishes.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductCheckReport {
    pub system: String,
    pub depth: usize,
    pub rows: Vec<ProductRow>,
    pub worst_ratio: f64,
    /// Smallest mass/level slack over all profiles and all `K` used.
    pub min_mass_level_slack: f64,
}

pub fn product_inequality_report(
    system: &SimilaritySystem,
    depth: usize,
    thetas: &[f64],
    pairs: &[(u32, u32)],
) -> Result<ProductCheckReport> {
    if pairs.iter().any(|&(k, m)| k == 0 || m == 0) {
        return Err(Error::InvalidInput("K and M must be positive".into()));
    }
    let per_theta: Vec<(Vec<ProductRow>, f64)> = thetas
        .par_iter()
        .map(|&theta| {
            let profile = maximal_profile_with_cap(system, depth, theta, DEFAULT_ENUMERATION_CAP)?;
            let mut slack = f64::INFINITY;
            let rows = pairs
                .iter()
                .map(|&(k, m)| {
                    let f_k = profile.strict_level_measure(k);
                    let f_m = profile.strict_level_measure(m);
                    let f_4km = profile.strict_level_measure(4 * k * m);
                    slack = slack.min(mass_level_slack(&profile, k)).min(mass_level_slack(&profile, m));
                    let ratio = if f_4km == 0.0 { 0.0 } else { f_4km / (k as f64 * f_k * f_m) };
                    ProductRow { theta, k, m, f_k, f_m, f_4km, ratio }
                })
                .collect();
            Ok((rows, slack))
        })
        .collect::<Result<_>>()?;
    let min_mass_level_slack = per_theta.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let rows: Vec<ProductRow> = per_theta.into_iter().flat_map(|p| p.0).collect();
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ProductCheckReport { system: system.label().to_string(), depth, rows, worst_ratio, min_mass_level_slack })
}

impl Report for ProductCheckReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("theta,K,M,F_K,F_M,F_4KM,ratio\n");
        for r in &self.rows {
            out += &format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(r.theta),
                r.k,
                r.m,
                fmt_f64(r.f_k),
                fmt_f64(r.f_m),
                fmt_f64(r.f_4km),
                fmt_f64(r.ratio)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EScanConfig {
    pub depth: usize,
    pub k: u32,
    pub thetas: Vec<f64>,
    /// `θ ∈ E` iff `|A*_K| <= K^{-exponent}`.
    pub exponent: f64,
}

impl EScanConfig {
    pub fn new(depth: usize, k: u32, thetas: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("K must be at least 1".into()));
        }
        if thetas.is_empty() {
            return Err(Error::InvalidInput("empty theta grid".into()));
        }
        Ok(EScanConfig { depth, k, thetas, exponent: 3.0 })
    }

    pub fn threshold(&self) -> f64 {
        (self.k as f64).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EScanRow {
    pub theta: f64,
    pub level_measure: f64,
    pub in_e: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EScanReport {
    pub depth: usize,
    pub k: u32,
    pub threshold: f64,
    pub rows: Vec<EScanRow>,
    pub fraction: f64,
    /// `fraction · π`.
    pub measure_estimate: f64,
}

pub fn e_scan(cfg: &EScanConfig, system: &SimilaritySystem) -> Result<EScanReport> {
    let threshold = cfg.threshold();
    let rows: Vec<EScanRow> = cfg
        .thetas
        .par_iter()
        .map(|&theta| {
            let profile = maximal_profile_with_cap(system, cfg.depth, theta, DEFAULT_ENUMERATION_CAP)?;
            let level_measure = profile.level_measure(cfg.k);
            Ok(EScanRow { theta, level_measure, in_e: level_measure <= threshold })
        })
        .collect::<Result<_>>()?;
    let fraction = rows.iter().filter(|r| r.in_e).count() as f64 / rows.len() as f64;
    Ok(EScanReport { depth: cfg.depth, k: cfg.k, threshold, rows, fraction, measure_estimate: fraction * PI })
}

impl Report for EScanReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("theta,level_measure,in_e\n");
        for r in &self.rows {
            out += &format!("{},{},{}\n", fmt_f64(r.theta), fmt_f64(r.level_measure), r.in_e);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Report {
    pub depth: usize,
    pub k: u32,
    pub sampled: usize,
    /// `max_θ max_{n <= N} ||f_{n,θ}||² / K` over sampled `θ ∈ E`; 0 when vacuous.
    pub c: f64,
    pub vacuous: bool,
}

pub fn l2_bound_report(system: &SimilaritySystem, cfg: &EScanConfig) -> Result<L2Report> {
    let scan = e_scan(cfg, system)?;
    let members: Vec<f64> = scan.rows.iter().filter(|r| r.in_e).map(|r| r.theta).collect();
    let per_theta: Vec<f64> = members
        .par_iter()
        .map(|&theta| {
            (0..=cfg.depth)
                .map(|n| Ok(multiplicity_with_cap(system, n, theta, DEFAULT_ENUMERATION_CAP)?.l2_norm_sq()))
                .try_fold(0.0, |m: f64, v: Result<f64>| v.map(|v| m.max(v)))
        })
        .collect::<Result<_>>()?;
    let c = per_theta.iter().fold(0.0, |m: f64, v| m.max(*v)) / cfg.k as f64;
    Ok(L2Report { depth: cfg.depth, k: cfg.k, sampled: members.len(), c, vacuous: members.is_empty() })
}

impl Report for L2Report {
    fn to_csv(&self) -> String {
        format!("depth,K,sampled,c,vacuous\n{},{},{},{},{}\n", self.depth, self.k, self.sampled, fmt_f64(self.c), self.vacuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub theta: f64,
    pub n: usize,
    /// `(l, |proj G_{lN}|)` for `l = 1..=l_max`.
    pub measures: Vec<(usize, f64)>,
    /// Fit `measure(l) ≈ a + d ρ^l`.
    pub a: f64,
    pub d: f64,
    pub rho: f64,
    /// Root-mean-square relative residual of the fit.
    pub residual: f64,
}

pub fn bootstrap_report(system: &SimilaritySystem, theta: f64, n: usize, l_max: usize) -> Result<BootstrapReport> {
    if n == 0 || l_max == 0 {
        return Err(Error::InvalidInput("N and l_max must be positive".into()));
    }
    system.checked_piece_count(n * l_max, DEFAULT_ENUMERATION_CAP)?;
    let measures: Vec<(usize, f64)> =
        (1..=l_max).map(|l| Ok((l, shadow_length(system, l * n, theta, DEFAULT_ENUMERATION_CAP)?))).collect::<Result<_>>()?;
    let (a, d, rho, residual) = fit_geometric(&measures);
    Ok(BootstrapReport { theta, n, measures, a, d, rho, residual })
}

/// Least squares for `a + d ρ^l`: linear in `(a, d)` for fixed `ρ`, with `ρ` by grid and golden search.
fn fit_geometric(points: &[(usize, f64)]) -> (f64, f64, f64, f64) {
    let solve = |rho: f64| {
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(l, y) in points {
            let x = rho.powi(l as i32);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let det = n * sxx - sx * sx;
        let (a, d) = if det.abs() < 1e-300 { (sy / n, 0.0) } else { ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det) };
        let sse: f64 = points
            .iter()
            .map(|&(l, y)| {
                let r = (a + d * rho.powi(l as i32) - y) / y.abs().max(1e-300);
                r * r
            })
            .sum();
        (a, d, sse)
    };
    let mut best = (0.5, f64::INFINITY);
    for i in 1..1000 {
        let rho = i as f64 / 1000.0;
        let sse = solve(rho).2;
        if sse < best.1 {
            best = (rho, sse);
        }
    }
    let (mut lo, mut hi) = ((best.0 - 1e-3).max(1e-6), (best.0 + 1e-3).min(1.0 - 1e-9));
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if solve(m1).2 < solve(m2).2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let rho = 0.5 * (lo + hi);
    let (a, d, sse) = solve(rho);
    (a, d, rho, (sse / points.len() as f64).sqrt())
}

impl Report for BootstrapReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("l,measure\n");
        for (l, m) in &self.measures {
            out += &format!("{l},{}\n", fmt_f64(*m));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadDirectionReport {
    pub spec: ProductSpec,
    pub tau: f64,
    /// `e^{-τℓ}`.
    pub threshold: f64,
    pub thetas: usize,
    pub x_grid: usize,
    pub bad: Vec<f64>,
    /// `(bad fraction) · π`.
    pub measure: f64,
}

/// Largest allowed ratio of the per-cell oscillation bound to the threshold.
const CELL_OSCILLATION: f64 = 0.1;

/// Grid angles with some grid `x ∈ [base^{n-m}, base^n]` where `|P♭(x)| > e^{-τℓ}`.
pub fn bad_direction_scan(
    system: &SimilaritySystem,
    spec: ProductSpec,
    tau: f64,
    thetas: &[f64],
    x_grid: usize,
) -> Result<BadDirectionReport> {
    let spec = ProductSpec::new(spec.n, spec.m, spec.ell)?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("tau {tau} must be nonnegative")));
    }
    let threshold = (-tau * spec.ell as f64).exp();
    let (a, b) = spec.interval(system.ratio());
    let (lo, hi) = spec.p_flat_range();
    let h = (b - a) / (x_grid.max(2) - 1) as f64;
    let ratio = system.ratio();
    let phis: Vec<_> = thetas.iter().map(|&t| phi(system, Direction::Theta(t))).collect::<Result<_>>()?;
    // |d/dx P♭| <= Σ_k ratio^k |φ'|, and |φ'| <= max |frequency|
    let slope = phis.iter().map(|p| p.max_abs_frequency()).fold(0.0, f64::max) * (lo..=hi).map(|k| ratio.powi(k as i32)).sum::<f64>();
    if h * slope > CELL_OSCILLATION * threshold {
        return Err(Error::InvalidInput(format!(
            "x grid too coarse: oscillation per cell up to {:.3e}, need below {:.3e}",
            h * slope,
            CELL_OSCILLATION * threshold
        )));
    }
    let flags: Vec<bool> =
        phis.par_iter().map(|p| (0..x_grid.max(2)).any(|i| range_product(p, ratio, lo, hi, a + i as f64 * h).norm() > threshold)).collect();
    let bad: Vec<f64> = thetas.iter().zip(&flags).filter(|(_, &f)| f).map(|(&t, _)| t).collect();
    let measure = PI * bad.len() as f64 / thetas.len().max(1) as f64;
    Ok(BadDirectionReport { spec, tau, threshold, thetas: thetas.len(), x_grid, bad, measure })
}

impl Report for BadDirectionReport {
    fn to_csv(&self) -> String {
        format!(
            "n,m,ell,tau,threshold,thetas,bad,measure\n{},{},{},{},{},{},{},{}\n",
            self.spec.n,
            self.spec.m,
            self.spec.ell,
            fmt_f64(self.tau),
            fmt_f64(self.threshold),
            self.thetas,
            self.bad.len(),
            fmt_f64(self.measure)
        )
    }
}
