//! Randomized and grid verification suites, one [`VerificationReport`] each.
//!
//! Trial `i` draws from [`rng::stream`]`(seed, i)`; trials run in parallel and are
//! reduced in index order, so reports do not depend on the thread count.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blaschke::{blaschke_check, small_value_cover_check};
use super::cetsq::cetsq_ratio;
use super::doubling::doubling_ratio;
use super::turan::{turan_ratio, TuranTrial};
use crate::error::{Error, Result};
use crate::ifs::preset;
use crate::report::VerificationReport;
use crate::rng;
use crate::shadow::{Interval, IntervalUnion};
use crate::spectral::identities::{dist_bound_fit, key_obs_check, key_obs_gap, sine_identity_check, DistForm};
use crate::spectral::ExpPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Blaschke,
    Cover,
    Turan,
    Doubling,
    Cetsq,
    Keyobs,
    Sine,
    Dist,
}

impl Suite {
    pub const ALL: [Suite; 8] =
        [Suite::Blaschke, Suite::Cover, Suite::Turan, Suite::Doubling, Suite::Cetsq, Suite::Keyobs, Suite::Sine, Suite::Dist];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Blaschke => "blaschke",
            Suite::Cover => "cover",
            Suite::Turan => "turan",
            Suite::Doubling => "doubling",
            Suite::Cetsq => "cetsq",
            Suite::Keyobs => "keyobs",
            Suite::Sine => "sine",
            Suite::Dist => "dist",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

/// Largest measured Turán constant accepted.
pub const TURAN_LIMIT: f64 = 20.0;
/// Largest square-function ratio accepted.
pub const CETSQ_LIMIT: f64 = 25.0;
pub const COVER_DELTAS: [f64; 3] = [0.01, 0.1, 0.3];
/// Random exponential sums: up to this many terms, frequencies in `[-FREQ, FREQ]`.
pub const MAX_TERMS: usize = 6;
pub const FREQ: f64 = 8.0;
const KEYOBS_GRID: usize = 1000;
const SINE_GRID: usize = 1_000_000;
const CIRCLE_SAMPLES: usize = 1024;
const COVER_GRID: usize = 101;

/// `g / g(0)` for a random `g(z) = Σ c_j e^{iλ_j z}`, redrawn until `|g(0)| >= 1e-3`.
pub fn random_normalized_sum(r: &mut ChaCha8Rng) -> (ExpPoly, Complex64) {
    loop {
        let terms = r.random_range(1..=MAX_TERMS);
        let freqs = (0..terms).map(|_| r.random_range(-FREQ..=FREQ)).collect();
        let coeffs = (0..terms).map(|_| Complex64::from_polar(1.0, r.random_range(0.0..TAU))).collect();
        let p = ExpPoly::new(freqs, coeffs, 1.0).expect("unimodular by construction");
        let g0 = p.eval(0.0);
        if g0.norm() >= 1e-3 {
            return (p, g0);
        }
    }
}

fn unit(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, r.random_range(0.0..TAU))
}

fn per_trial<T: Send>(trials: usize, seed: u64, f: impl Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(|i| f(i, &mut rng::stream(seed, i as u64))).collect()
}

fn report(suite: Suite, trials: usize, worst_case: f64, pass: bool) -> VerificationReport {
    VerificationReport { suite: suite.name().to_string(), trials, worst_case, pass }
}

/// Runs one suite. Grid suites (`keyobs`, `sine`, `dist`) ignore `trials` and `seed`
/// and report the number of grid points instead.
///
/// `worst_case` per suite: blaschke `max(M - log₂C)`; cover largest distance excess
/// over `ε`; turan largest measured `A`; doubling largest ratio; cetsq largest ratio;
/// keyobs smallest gap at `a = 1/18`; sine largest deviation; dist fitted `b`.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<VerificationReport> {
    match suite {
        Suite::Blaschke => {
            let out = per_trial(trials, seed, |_, r| {
                let (p, g0) = random_normalized_sum(r);
                blaschke_check(&|z| p.eval_complex(z) / g0, CIRCLE_SAMPLES)
            })?;
            let worst = out.iter().map(|b| b.zeros as f64 - b.log2_sup).fold(f64::NEG_INFINITY, f64::max);
            Ok(report(suite, trials, worst, out.iter().all(|b| b.pass)))
        }
        Suite::Cover => {
            let out = per_trial(trials, seed, |i, r| {
                let (p, g0) = random_normalized_sum(r);
                small_value_cover_check(&|z| p.eval_complex(z) / g0, COVER_DELTAS[i % 3], COVER_GRID)
            })?;
            let worst = out.iter().map(|c| c.worst_excess).fold(-1.0, f64::max);
            Ok(report(suite, trials, worst, out.iter().all(|c| c.pass)))
        }
        Suite::Turan => {
            let out = per_trial(trials, seed, |_, r| Ok(turan_ratio(&random_turan_trial(r)?).measured_a))?;
            let worst = out.iter().copied().fold(0.0, f64::max);
            Ok(report(suite, trials, worst, worst <= TURAN_LIMIT))
        }
        Suite::Doubling => {
            let g = preset("gasket")?;
            let top = g.base().powi(5);
            let out = per_trial(trials, seed, |_, r| {
                let t = r.random_range(0.0..=1.0);
                let x = r.random_range(1.0..=top);
                doubling_ratio(&g, t, x, r.random_range(0..=5))
            })?;
            let worst = out.iter().copied().fold(1.0, f64::max);
            Ok(report(suite, trials, worst, out.iter().all(|v| v.is_finite() && *v >= 1.0)))
        }
        Suite::Cetsq => {
            let one = [Complex64::new(1.0, 0.0)];
            let single = cetsq_ratio(&[0.0], &one, 1.0)?.ratio;
            let copies = cetsq_ratio(&[1.5; 7], &[one[0]; 7], 1.0)?.ratio;
            let degenerate_ok = (single - 0.5).abs() <= 1e-6 && (copies - 0.5).abs() <= 1e-6;
            let out = per_trial(trials, seed, |_, r| {
                let (freqs, coeffs, delta) = random_cluster_set(r);
                cetsq_ratio(&freqs, &coeffs, delta)
            })?;
            let worst = out.iter().map(|m| m.ratio).fold(0.5, f64::max);
            let counts_ok = out.iter().all(|m| m.count_ratio <= CETSQ_LIMIT);
            Ok(report(suite, trials, worst, degenerate_ok && counts_ok && worst <= CETSQ_LIMIT))
        }
        Suite::Keyobs => {
            let a = 1.0 / 18.0;
            let min = key_obs_check(a, KEYOBS_GRID)?;
            let equality = key_obs_gap(a, 0.0, PI).abs() <= 1e-12;
            Ok(report(suite, KEYOBS_GRID * KEYOBS_GRID, min.value, equality && min.value >= -1e-12))
        }
        Suite::Sine => {
            let dev = sine_identity_check(SINE_GRID);
            Ok(report(suite, SINE_GRID, dev, dev < 1e-10))
        }
        Suite::Dist => {
            let g = preset("gasket")?;
            let coarse = dist_bound_fit(&g, 200, DistForm::Quadratic)?;
            let fine = dist_bound_fit(&g, 400, DistForm::Quadratic)?;
            let stable = (coarse.b - fine.b).abs() <= 0.05 * fine.b;
            Ok(report(suite, 400 * 400, fine.b, fine.b > 0.0 && stable))
        }
    }
}

/// `L <= 6` terms with `Re λ ∈ [-1, 1]`, `Im λ ∈ [-20, 20]`; `|I| ∈ [1/2, 4]`;
/// `E` a union of one to four subintervals, each at least `|I|/10` long.
pub fn random_turan_trial(r: &mut ChaCha8Rng) -> Result<TuranTrial> {
    let terms = r.random_range(1..=MAX_TERMS);
    let exponents = (0..terms).map(|_| Complex64::new(r.random_range(-1.0..=1.0), r.random_range(-20.0..=20.0))).collect();
    let coefficients = (0..terms).map(|_| unit(r)).collect();
    let len = r.random_range(0.5..=4.0);
    let pieces = r.random_range(1..=4);
    let parts = (0..pieces)
        .map(|_| {
            let w = len * r.random_range(0.1..=0.25);
            let lo = r.random_range(0.0..=len - w);
            Interval::new(lo, lo + w)
        })
        .collect();
    TuranTrial::new(exponents, coefficients, Interval::new(0.0, len), IntervalUnion::from_intervals(parts))
}

/// Up to 100 frequencies in one to five clusters of random spread, and `δ ∈ {1/4, 1, 4}`.
pub fn random_cluster_set(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Complex64>, f64) {
    let k = r.random_range(1..=100);
    let clusters: Vec<(f64, f64)> = (0..r.random_range(1..=5)).map(|_| (r.random_range(0.0..=50.0), r.random_range(0.0..=3.0))).collect();
    let delta = [0.25, 1.0, 4.0][r.random_range(0..3)];
    let freqs = (0..k)
        .map(|_| {
            let (c, w) = clusters[r.random_range(0..clusters.len())];
            delta * (c + r.random_range(-1.0..=1.0) * w)
        })
        .collect();
    let coeffs = (0..k).map(|_| unit(r)).collect();
    (freqs, coeffs, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn randomized_suites_are_deterministic() {
        for s in [Suite::Blaschke, Suite::Turan, Suite::Cetsq, Suite::Doubling] {
            let a = run_suite(s, 12, 7).unwrap();
            assert_eq!(a, run_suite(s, 12, 7).unwrap());
        }
    }

    #[test]
    fn small_blaschke_run_passes() {
        let r = run_suite(Suite::Blaschke, 40, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.worst_case <= 0.0);
    }

    #[test]
    fn normalized_sums_start_at_one() {
        let mut r = rng::stream(3, 0);
        for _ in 0..50 {
            let (p, g0) = random_normalized_sum(&mut r);
            assert!((p.eval(0.0) / g0 - 1.0).norm() < 1e-12);
        }
    }
}
