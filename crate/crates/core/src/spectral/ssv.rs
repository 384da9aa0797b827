//! Sets of small values of the low-frequency block `P2` on `I = [base^{n-m}, base^n]`.
//!
//! Two descriptions are produced:
//!
//! * [`ssv_scan`]: uniform grid, sub-threshold samples clustered into intervals
//!   padded by one grid step.
//! * [`certified_cover`]: intervals around the complex zeros of `P2`, derived from
//!   the Blaschke/Harnack argument on unit discs along `I`.
//!
//! In the variable `y = ratio^{n-m} x ∈ [1, base^m]`, `P2(x) = Π_{j=0..m} φ(ratio^j y)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{phi, range_product, Direction, ExpPoly, ProductSpec};
use crate::error::{Error, Result};
use crate::ifs::SimilaritySystem;
use crate::lemmas::zeros::{count_zeros, disc_count};
use crate::shadow::{Interval, IntervalUnion};

/// Relative slack in the sample-versus-threshold comparison.
pub const THRESHOLD_SLACK: f64 = 1e-12;
pub const MIN_GRID: usize = 1000;
const SCAN_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SsvCover {
    pub range: (f64, f64),
    pub threshold: f64,
    pub grid_size: usize,
    pub intervals: IntervalUnion,
    pub component_count: usize,
    pub samples_below: usize,
}

pub fn ssv_scan(system: &SimilaritySystem, dir: Direction, spec: ProductSpec, threshold: f64, grid_size: usize) -> Result<SsvCover> {
    ProductSpec::new(spec.n, spec.m, spec.ell)?;
    ssv_scan_with(&phi(system, dir)?, system.ratio(), spec, threshold, grid_size)
}

/// Grid positions `x_i` and whether `|P2(x_i)|` is at or below the threshold.
pub fn scan_grid(phi: &ExpPoly, ratio: f64, spec: ProductSpec, threshold: f64, grid_size: usize) -> (Vec<f64>, Vec<bool>) {
    let (a, b) = spec.interval(ratio);
    let h = (b - a) / (grid_size - 1) as f64;
    let (lo, hi) = spec.p2_range();
    let cut = threshold * (1.0 + THRESHOLD_SLACK);
    let xs: Vec<f64> = (0..grid_size).map(|i| if i + 1 == grid_size { b } else { a + i as f64 * h }).collect();
    let flags: Vec<bool> = xs
        .par_chunks(SCAN_CHUNK)
        .flat_map_iter(|chunk| chunk.iter().map(|&x| range_product(phi, ratio, lo, hi, x).norm() <= cut).collect::<Vec<_>>())
        .collect();
    (xs, flags)
}

pub fn ssv_scan_with(phi: &ExpPoly, ratio: f64, spec: ProductSpec, threshold: f64, grid_size: usize) -> Result<SsvCover> {
    if grid_size < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid_size {grid_size} below {MIN_GRID}")));
    }
    let (a, b) = spec.interval(ratio);
    let h = (b - a) / (grid_size - 1) as f64;
    let (xs, flags) = scan_grid(phi, ratio, spec, threshold, grid_size);
    let mut runs = Vec::new();
    let mut i = 0;
    while i < grid_size {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid_size && flags[i + 1] {
            i += 1;
        }
        runs.push(Interval::new((xs[start] - h).max(a), (xs[i] + h).min(b)));
        i += 1;
    }
    let intervals = IntervalUnion::from_intervals(runs);
    Ok(SsvCover {
        range: (a, b),
        threshold,
        grid_size,
        component_count: intervals.len(),
        samples_below: flags.iter().filter(|&&f| f).count(),
        intervals,
    })
}

/// Union of intervals around the zeros of `P2` that provably contains every
/// `x ∈ I` with `|P2(x)| < threshold`, up to the sampled supremum bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedCover {
    #[serde(skip)]
    pub intervals: IntervalUnion,
    /// Zeros of `P2` (in the `x` variable) found in the discs used.
    pub zeros: Vec<(f64, f64)>,
    pub windows: usize,
    /// Windows covered whole because `|P2|` was too small to normalize there.
    pub fallback_windows: usize,
    pub max_zeros_per_disc: usize,
}

/// Window length in the `y` variable; each window lies inside the quarter disc of its center.
const WINDOW: f64 = 0.25;
const WINDOW_SAMPLES: usize = 16;
const CIRCLE_SAMPLES: usize = 256;

pub fn certified_cover(phi: &ExpPoly, ratio: f64, spec: ProductSpec, threshold: f64) -> Result<CertifiedCover> {
    let scale = ratio.powi((spec.n - spec.m) as i32);
    let factors: Vec<ExpPoly> = (0..=spec.m).map(|j| phi.dilated(ratio.powi(j as i32))).collect();
    let q = |z: Complex64| factors.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * p.eval_complex(z));
    let q_real = |y: f64| factors.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * p.eval(y));
    // bound on |Q'| in the strip |Im z| <= 1
    let bounds: Vec<f64> = factors.iter().map(|p| p.strip_bound(1.0)).collect();
    let deriv_bound: f64 = factors
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let dj = p.normalization().abs() * p.frequencies().iter().map(|f| f.abs() * f.abs().exp()).sum::<f64>();
            dj * bounds.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, b)| b).product::<f64>()
        })
        .sum();
    let circle_gap = 2.0 * std::f64::consts::PI / CIRCLE_SAMPLES as f64;

    let y_end = spec.interval(ratio).1 * scale;
    let windows = ((y_end - 1.0) / WINDOW).ceil() as usize;
    let delta = threshold * (1.0 + THRESHOLD_SLACK);

    let per_window: Vec<Result<WindowCover>> = (0..windows)
        .into_par_iter()
        .map(|w| {
            let w0 = 1.0 + w as f64 * WINDOW;
            let w1 = (w0 + WINDOW).min(y_end);
            let (y0, q0) = (0..=WINDOW_SAMPLES)
                .map(|i| {
                    let y = w0 + (w1 - w0) * i as f64 / WINDOW_SAMPLES as f64;
                    (y, q_real(y).norm())
                })
                .fold((w0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            cover_window(&q, y0, q0, (w0, w1), delta, deriv_bound * circle_gap / 2.0)
        })
        .collect();

    let mut intervals = Vec::new();
    let mut zeros: Vec<Complex64> = Vec::new();
    let mut fallback_windows = 0;
    let mut max_zeros_per_disc = 0;
    for wc in per_window {
        let wc = wc?;
        fallback_windows += wc.fallback as usize;
        max_zeros_per_disc = max_zeros_per_disc.max(wc.zeros.len());
        intervals.extend(wc.intervals.into_iter().map(|(lo, hi)| Interval::new(lo / scale, hi / scale)));
        for z in wc.zeros {
            if !zeros.iter().any(|o| (o - z).norm() < 1e-7) {
                zeros.push(z);
            }
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(CertifiedCover {
        intervals: IntervalUnion::from_intervals(intervals),
        zeros: zeros.iter().map(|z| (z.re / scale, z.im / scale)).collect(),
        windows,
        fallback_windows,
        max_zeros_per_disc,
    })
}

struct WindowCover {
    intervals: Vec<(f64, f64)>,
    zeros: Vec<Complex64>,
    fallback: bool,
}

/// Small values of `q` on the window `[w0, w1] ⊂ [y0 - 1/4, y0 + 1/4]`.
///
/// With `φ(z) = q(y0 + z) / q(y0)`, `C >= sup_{|z|=1} |φ|`, zeros `μ_k` in the disc
/// of radius `r` and `g = φ / B` (`B` the unit-disc Blaschke product), Harnack on
/// the radius-`r` disc gives `|g| >= G = C (|g(0)| / C)^{(r+1/4)/(r-1/4)}` on the
/// quarter disc, and `|B(z)| >= (ε / (1 + r/4))^M` away from the `ε`-balls, so
/// `ε = (1 + r/4) (δ' / G)^{1/M}` with `δ' = δ / |q(y0)|`.
fn cover_window(
    q: &(impl Fn(Complex64) -> Complex64 + Sync),
    y0: f64,
    q0: f64,
    (w0, w1): (f64, f64),
    delta: f64,
    sampling_slack: f64,
) -> Result<WindowCover> {
    let whole = || WindowCover { intervals: vec![(w0, w1)], zeros: Vec::new(), fallback: true };
    if q0 <= 3.0 * delta {
        return Ok(whole());
    }
    let center = Complex64::new(y0, 0.0);
    let sup_circle = (0..CIRCLE_SAMPLES)
        .map(|i| q(center + Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / CIRCLE_SAMPLES as f64)).norm())
        .fold(0.0, f64::max);
    let c = ((sup_circle + sampling_slack) / q0).max(1.0);
    let (r, count, _) = disc_count(q, center, 0.5)?;
    let delta_n = delta / q0;
    let harnack = (r + 0.25) / (r - 0.25);
    if count == 0 {
        let g_low = c * (1.0 / c).powf(harnack);
        return Ok(if delta_n < g_low { WindowCover { intervals: Vec::new(), zeros: Vec::new(), fallback: false } } else { whole() });
    }
    let cert = count_zeros(q, center, r)?;
    let mu: Vec<Complex64> = cert.zeros.iter().map(|z| z - center).collect();
    if mu.len() != count {
        return Ok(whole());
    }
    let g0 = 1.0 / mu.iter().map(|m| m.norm()).product::<f64>();
    let g_low = c * (g0 / c).min(1.0).powf(harnack);
    let eps = (1.0 + r / 4.0) * (delta_n / g_low).powf(1.0 / count as f64);
    let intervals = cert
        .zeros
        .iter()
        .filter(|z| z.im.abs() < eps)
        .filter_map(|z| {
            let half = (eps * eps - z.im * z.im).sqrt();
            let (lo, hi) = ((z.re - half).max(w0), (z.re + half).min(w1));
            (lo <= hi).then_some((lo, hi))
        })
        .collect();
    Ok(WindowCover { intervals, zeros: cert.zeros, fallback: false })
}

/// Sub-threshold grid samples that fall outside `certified`.
pub fn uncovered_samples(xs: &[f64], flags: &[bool], certified: &IntervalUnion) -> Vec<f64> {
    xs.iter().zip(flags).filter(|(x, &f)| f && !certified.contains(**x)).map(|(x, _)| *x).collect()
}
