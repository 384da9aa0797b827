//! Favard length of `G_n`: deterministic quadrature over directions, a Buffon
//! needle simulation, and decay-model fits for series in `n`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{SimilaritySystem, DEFAULT_ENUMERATION_CAP};
use crate::report::{fmt_f64, Report};
use crate::rng;
use crate::shadow::shadow_length;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Number of directions in the coarsest grid.
    pub grid_size: usize,
    /// Maximum number of grid doublings.
    pub refinement_limit: usize,
    pub target_rel_error: f64,
    pub enumeration_cap: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { grid_size: 64, refinement_limit: 6, target_rel_error: 1e-4, enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 8 {
            return Err(Error::InvalidInput(format!("grid_size {} < 8", self.grid_size)));
        }
        if self.refinement_limit < 2 {
            return Err(Error::InvalidInput("refinement_limit must be at least 2".into()));
        }
        if !(self.target_rel_error > 0.0) {
            return Err(Error::InvalidInput(format!("target_rel_error {} must be positive", self.target_rel_error)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FavardResult {
    pub system: String,
    pub n: usize,
    pub value: f64,
    pub error_estimate: f64,
    /// Number of directions in the finest grid used.
    pub grid: usize,
    pub converged: bool,
}

impl FavardResult {
    /// Turns a non-converged result into `NoConvergence`.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { value: self.value, error_estimate: self.error_estimate })
        }
    }
}

impl Report for FavardResult {
    fn to_csv(&self) -> String {
        format!(
            "{CSV_HEADER}\n{},{},quadrature,{},{},{},\n",
            self.system,
            self.n,
            fmt_f64(self.value),
            fmt_f64(self.error_estimate),
            self.grid
        )
    }
}

pub const CSV_HEADER: &str = "system,n,method,value,error,trials/grid,seed";

/// `(1/π) ∫_0^π |proj_θ(G_n)| dθ`.
///
/// The integrand is π-periodic, so the trapezoid rule on `[0, π)` is the plain
/// mean of samples. The grid is doubled (reusing old samples) and each level is
/// Richardson-extrapolated against the previous one; the loop stops when two
/// successive extrapolations agree to `target_rel_error`.
pub fn favard_length(system: &SimilaritySystem, n: usize, cfg: &QuadratureConfig) -> Result<FavardResult> {
    cfg.validate()?;
    system.checked_piece_count(n, cfg.enumeration_cap)?;
    let integrand = |theta: f64| shadow_length(system, n, theta, cfg.enumeration_cap);

    let mut grid = cfg.grid_size;
    let mut sum = sample_sum(&integrand, grid, 0, 1)?;
    let mut trapezoid = sum / grid as f64;
    let mut previous_extrapolated: Option<f64> = None;
    let mut value = trapezoid;
    let mut error_estimate = f64::INFINITY;
    let mut converged = false;
    for _ in 0..cfg.refinement_limit {
        // new nodes are the odd multiples of π / (2 grid)
        sum += sample_sum(&integrand, 2 * grid, 1, 2)?;
        grid *= 2;
        let refined = sum / grid as f64;
        let extrapolated = refined + (refined - trapezoid) / 3.0;
        trapezoid = refined;
        value = extrapolated;
        if let Some(prev) = previous_extrapolated {
            error_estimate = (extrapolated - prev).abs();
            if error_estimate <= cfg.target_rel_error * extrapolated.abs() {
                converged = true;
                break;
            }
        }
        previous_extrapolated = Some(extrapolated);
    }
    Ok(FavardResult { system: system.label().to_string(), n, value, error_estimate, grid, converged })
}

/// Sum of the integrand at `θ_i = i π / grid` for `i = start, start + step, ...`,
/// accumulated in index order.
fn sample_sum(f: &(impl Fn(f64) -> Result<f64> + Sync), grid: usize, start: usize, step: usize) -> Result<f64> {
    let samples: Vec<f64> =
        (start..grid).step_by(step).collect::<Vec<_>>().into_par_iter().map(|i| f(i as f64 * PI / grid as f64)).collect::<Result<_>>()?;
    Ok(samples.iter().sum())
}

/// Whether the line `{z : Re(z e^{-iθ}) = x}` meets `G_n`.
///
/// Depth-first over words, pruning subtrees whose shadow misses `x`. Projected
/// centers are accumulated with the same arithmetic as
/// [`SimilaritySystem::projected_centers`], so the leaf test agrees with the
/// multiplicity function.
pub fn needle_hits(system: &SimilaritySystem, n: usize, theta: f64, x: f64) -> bool {
    if x.abs() > 1.0 {
        return false;
    }
    let gens = system.projected_generators(theta);
    let shape = system.shape();
    let half_widths: Vec<f64> = (0..=n).map(|k| shape.shadow_half_width(system.piece_size(k), theta)).collect();
    let mut scales = Vec::with_capacity(n);
    let mut s = 1.0;
    for _ in 0..n {
        scales.push(s);
        s *= system.ratio();
    }
    hits_below(&gens, &scales, &half_widths, 0.0, 0, n, x)
}

fn hits_below(gens: &[f64], scales: &[f64], half_widths: &[f64], p: f64, depth: usize, n: usize, x: f64) -> bool {
    if depth == n {
        return (x - p).abs() <= half_widths[n];
    }
    // descendants stay inside this node's shadow; the slack only guards rounding
    if (x - p).abs() > half_widths[depth] + 1e-9 {
        return false;
    }
    gens.iter().any(|&g| hits_below(gens, scales, half_widths, p + scales[depth] * g, depth + 1, n, x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuffonEstimate {
    pub system: String,
    pub n: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Report for BuffonEstimate {
    fn to_csv(&self) -> String {
        format!(
            "{CSV_HEADER}\n{},{},buffon,{},{},{},{}\n",
            self.system,
            self.n,
            fmt_f64(self.estimate),
            fmt_f64(self.stderr),
            self.trials,
            self.seed
        )
    }
}

/// Trials per random stream.
pub const BUFFON_BATCH: u64 = 1 << 16;

/// Monte Carlo estimate of the Favard length: `θ ~ U[0, π)`, `x ~ U[-1, 1)`,
/// estimate `2 · hits / trials`.
pub fn buffon_estimate(system: &SimilaritySystem, n: usize, trials: u64, seed: u64) -> Result<BuffonEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let batches = trials.div_ceil(BUFFON_BATCH);
    let counts: Vec<u64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = BUFFON_BATCH.min(trials - b * BUFFON_BATCH);
            let mut rng = rng::stream(seed, b);
            (0..len)
                .filter(|_| {
                    let theta = PI * rng.random::<f64>();
                    let x = 2.0 * rng.random::<f64>() - 1.0;
                    needle_hits(system, n, theta, x)
                })
                .count() as u64
        })
        .collect();
    let hits: u64 = counts.iter().sum();
    let p = hits as f64 / trials as f64;
    Ok(BuffonEstimate {
        system: system.label().to_string(),
        n,
        estimate: 2.0 * p,
        stderr: 2.0 * (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// `F = C n^{-p}`; params `(C, p)`.
    Power,
    /// `F = C e^{-c sqrt(log n)}`; params `(C, c)`.
    Sqrtlog,
    /// `F >= c log n / n`; params `(mean of F n / log n, min of F n / log n)`.
    Loglower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub params: (f64, f64),
    /// Root-mean-square residual in the transformed coordinates; for
    /// `Loglower`, the relative spread of the ratio.
    pub residual: f64,
}

pub fn fit_decay(series: &[(usize, f64)], model: DecayModel) -> Result<DecayFit> {
    if series.len() < 3 {
        return Err(Error::DegenerateSeries(format!("{} points, need at least 3", series.len())));
    }
    if let Some(&(n, f)) = series.iter().find(|&&(_, f)| !(f > 0.0 && f.is_finite())) {
        return Err(Error::DegenerateSeries(format!("value {f} at n = {n} is not positive")));
    }
    if series.iter().all(|&(_, f)| f == series[0].1) {
        return Err(Error::DegenerateSeries("constant values".into()));
    }
    let min_n = if model == DecayModel::Power { 1 } else { 2 };
    if let Some(&(n, _)) = series.iter().find(|&&(n, _)| n < min_n) {
        return Err(Error::DegenerateSeries(format!("n = {n} below {min_n} for this model")));
    }
    match model {
        DecayModel::Power | DecayModel::Sqrtlog => {
            let points: Vec<(f64, f64)> = series
                .iter()
                .map(|&(n, f)| {
                    let ln = (n as f64).ln();
                    let x = if model == DecayModel::Power { ln } else { ln.sqrt() };
                    (x, f.ln())
                })
                .collect();
            let (intercept, slope, residual) = linear_fit(&points)?;
            Ok(DecayFit { model, params: (intercept.exp(), -slope), residual })
        }
        DecayModel::Loglower => {
            let ratios: Vec<f64> = series.iter().map(|&(n, f)| f * n as f64 / (n as f64).ln()).collect();
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
            Ok(DecayFit { model, params: (mean, min), residual: var.sqrt() / mean })
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, rms residual)`.
fn linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateSeries("all abscissae coincide".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    Ok((a, b, (rss / k).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::preset;
    use crate::shadow::multiplicity;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn identity_case() {
        let g = preset("gasket").unwrap();
        let r = favard_length(&g, 0, &QuadratureConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.converged);
        let b = buffon_estimate(&g, 0, 1000, 3).unwrap();
        assert_eq!(b.estimate, 2.0);
        assert_eq!(b.stderr, 0.0);
    }

    #[test]
    fn gasket_level_one_against_dense_grid() {
        let g = preset("gasket").unwrap();
        let cfg = QuadratureConfig { target_rel_error: 1e-5, refinement_limit: 10, ..Default::default() };
        let r = favard_length(&g, 1, &cfg).unwrap();
        let m = 100_000;
        let oracle: f64 = (0..m).map(|i| shadow_length(&g, 1, (i as f64 + 0.5) * PI / m as f64, 1 << 20).unwrap()).sum::<f64>() / m as f64;
        assert!(r.converged);
        assert!((r.value - oracle).abs() <= cfg.target_rel_error * oracle + 1e-6, "{} vs {oracle}", r.value);
    }

    #[test]
    fn config_validation() {
        let g = preset("gasket").unwrap();
        let bad = QuadratureConfig { grid_size: 4, ..Default::default() };
        assert!(matches!(favard_length(&g, 1, &bad), Err(Error::InvalidInput(_))));
        let capped = QuadratureConfig { enumeration_cap: 10, ..Default::default() };
        assert!(matches!(favard_length(&g, 3, &capped), Err(Error::EnumerationCapExceeded { .. })));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = preset("gasket").unwrap();
        let cfg = QuadratureConfig { grid_size: 8, refinement_limit: 2, target_rel_error: 1e-15, ..Default::default() };
        let r = favard_length(&g, 3, &cfg).unwrap();
        assert!(!r.converged);
        assert!(matches!(r.require_converged(), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn needle_examples() {
        let g = preset("gasket").unwrap();
        assert!(needle_hits(&g, 1, 0.0, 0.0));
        assert!(!needle_hits(&g, 1, 0.0, 0.9));
        assert!(!needle_hits(&g, 0, 0.0, 1.0001));
        assert!(needle_hits(&g, 0, 0.0, 1.0));
    }

    #[test]
    fn buffon_is_deterministic() {
        let g = preset("gasket").unwrap();
        let a = buffon_estimate(&g, 3, 200_000, 11).unwrap();
        let b = buffon_estimate(&g, 3, 200_000, 11).unwrap();
        assert_eq!(a, b);
        let c = buffon_estimate(&g, 3, 200_000, 12).unwrap();
        assert_ne!(a.estimate, c.estimate);
        assert!(buffon_estimate(&g, 3, 0, 1).is_err());
    }

    #[test]
    fn power_and_sqrtlog_recover_exact_models() {
        let power: Vec<(usize, f64)> = (1..=8).map(|n| (n, 5.0 * (n as f64).powf(-0.25))).collect();
        let fit = fit_decay(&power, DecayModel::Power).unwrap();
        assert!((fit.params.0 - 5.0).abs() < 1e-6 && (fit.params.1 - 0.25).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
        let sl: Vec<(usize, f64)> = (2..=9).map(|n| (n, 3.0 * (-0.7 * (n as f64).ln().sqrt()).exp())).collect();
        let fit = fit_decay(&sl, DecayModel::Sqrtlog).unwrap();
        assert!((fit.params.0 - 3.0).abs() < 1e-6 && (fit.params.1 - 0.7).abs() < 1e-6);
        let ll: Vec<(usize, f64)> = (2..=6).map(|n| (n, 0.3 * (n as f64).ln() / n as f64)).collect();
        let fit = fit_decay(&ll, DecayModel::Loglower).unwrap();
        assert!((fit.params.0 - 0.3).abs() < 1e-12 && (fit.params.1 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn degenerate_series_rejected() {
        let short = [(1, 1.0), (2, 0.5)];
        assert!(matches!(fit_decay(&short, DecayModel::Power), Err(Error::DegenerateSeries(_))));
        let flat = [(1, 1.0), (2, 1.0), (3, 1.0)];
        assert!(matches!(fit_decay(&flat, DecayModel::Power), Err(Error::DegenerateSeries(_))));
        let neg = [(1, 1.0), (2, -0.5), (3, 0.2)];
        assert!(matches!(fit_decay(&neg, DecayModel::Power), Err(Error::DegenerateSeries(_))));
        let low_n = [(1, 1.0), (2, 0.5), (3, 0.2)];
        assert!(matches!(fit_decay(&low_n, DecayModel::Sqrtlog), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn corner4_quarter_turn_symmetry() {
        let c = preset("corner4").unwrap();
        for n in 1..=4 {
            let m = 512;
            let full: f64 = (0..m).map(|i| shadow_length(&c, n, i as f64 * PI / m as f64, 1 << 20).unwrap()).sum::<f64>() / m as f64;
            let half: f64 = (0..m / 2).map(|i| shadow_length(&c, n, i as f64 * PI / m as f64, 1 << 20).unwrap()).sum::<f64>() / m as f64;
            assert!((2.0 * half - full).abs() < 1e-12);
            for i in 0..16 {
                let t = i as f64 * 0.09;
                let a = shadow_length(&c, n, t, 1 << 20).unwrap();
                let b = shadow_length(&c, n, t + PI / 2.0, 1 << 20).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { rng_seed: proptest::test_runner::RngSeed::Fixed(7), ..ProptestConfig::with_cases(24) })]

        #[test]
        fn needle_agrees_with_support(which in 0usize..3, n in 0usize..5, seed in 0u64..1000) {
            let system = vec![preset("gasket").unwrap(), preset("corner4").unwrap(), preset("random-4-8").unwrap()]
                .swap_remove(which);
            let mut rng = rng::stream(seed, 0);
            for _ in 0..400 {
                let theta = PI * rng.random::<f64>();
                let x = 2.0 * rng.random::<f64>() - 1.0;
                let f = multiplicity(&system, n, theta).unwrap();
                prop_assert_eq!(needle_hits(&system, n, theta, x), f.support().contains(x));
            }
        }
    }
}
