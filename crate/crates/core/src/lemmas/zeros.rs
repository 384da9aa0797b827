//! Zero counting by the argument principle and localization by quadrisection.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const ZERO_TOLERANCE: f64 = 1e-9;
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;
pub const MAX_JITTER_ATTEMPTS: usize = 8;

/// Boxes smaller than this holding one zero are finished by Newton's method.
const NEWTON_SWITCH: f64 = 1e-3;
/// Boxes smaller than this whose splits all touch a zero are treated as one cluster.
const CLUSTER_SWITCH: f64 = 1e-2;
const INITIAL_SEGMENTS: usize = 64;
/// A contour segment is accepted once its image moves less than this fraction
/// of the distance to the origin.
const SEGMENT_RELATIVE_STEP: f64 = 0.3;
const MAX_BISECTIONS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCertificate {
    /// Number of zeros (with multiplicity) inside the contour.
    pub count: usize,
    /// Localized zeros, repeated by multiplicity.
    pub zeros: Vec<Complex64>,
    /// Largest `|f|` seen on the contour.
    pub sup_bound: f64,
    /// `|f|` at the center of the region.
    pub base_value: f64,
    /// Radius of the disc actually used (after jitter); half the larger side for boxes.
    pub radius: f64,
}

#[derive(Debug)]
struct ThroughZero;

/// Total change of `arg f` along `path(s)`, `s ∈ [0, 1]`, divided by 2π, and the
/// largest modulus seen.
fn winding<F, P>(f: &F, path: &P) -> std::result::Result<(f64, f64), ThroughZero>
where
    F: Fn(Complex64) -> Complex64,
    P: Fn(f64) -> Complex64,
{
    let mut total = 0.0;
    let mut sup: f64 = 0.0;
    let start = f(path(0.0));
    if start.norm() < BOUNDARY_TOLERANCE {
        return Err(ThroughZero);
    }
    let mut prev = start;
    sup = sup.max(start.norm());
    for i in 0..INITIAL_SEGMENTS {
        let s0 = i as f64 / INITIAL_SEGMENTS as f64;
        let s1 = (i + 1) as f64 / INITIAL_SEGMENTS as f64;
        let w1 = if i + 1 == INITIAL_SEGMENTS { start } else { f(path(s1)) };
        total += segment_arg(f, path, s0, s1, prev, w1, 0, &mut sup)?;
        prev = w1;
    }
    Ok((total / (2.0 * PI), sup))
}

#[allow(clippy::too_many_arguments)]
fn segment_arg<F, P>(
    f: &F,
    path: &P,
    s0: f64,
    s1: f64,
    w0: Complex64,
    w1: Complex64,
    depth: u32,
    sup: &mut f64,
) -> std::result::Result<f64, ThroughZero>
where
    F: Fn(Complex64) -> Complex64,
    P: Fn(f64) -> Complex64,
{
    let m1 = w1.norm();
    if m1 < BOUNDARY_TOLERANCE {
        return Err(ThroughZero);
    }
    *sup = sup.max(m1);
    if (w1 - w0).norm() <= SEGMENT_RELATIVE_STEP * w0.norm().min(m1) {
        return Ok((w1 / w0).arg());
    }
    if depth >= MAX_BISECTIONS {
        return Err(ThroughZero);
    }
    let sm = 0.5 * (s0 + s1);
    let wm = f(path(sm));
    if wm.norm() < BOUNDARY_TOLERANCE {
        return Err(ThroughZero);
    }
    Ok(segment_arg(f, path, s0, sm, w0, wm, depth + 1, sup)? + segment_arg(f, path, sm, s1, wm, w1, depth + 1, sup)?)
}

fn rounded_count(w: f64) -> std::result::Result<usize, ThroughZero> {
    let r = w.round();
    if (w - r).abs() > 0.05 || r < 0.0 {
        return Err(ThroughZero);
    }
    Ok(r as usize)
}

fn circle_path(center: Complex64, radius: f64) -> impl Fn(f64) -> Complex64 {
    move |s| center + Complex64::from_polar(radius, 2.0 * PI * s)
}

/// Counter-clockwise boundary of the box `[lo.re, hi.re] × [lo.im, hi.im]`.
fn box_path(lo: Complex64, hi: Complex64) -> impl Fn(f64) -> Complex64 {
    let (w, h) = (hi.re - lo.re, hi.im - lo.im);
    let per = 2.0 * (w + h);
    move |s| {
        let d = (s * per) % per;
        if d < w {
            Complex64::new(lo.re + d, lo.im)
        } else if d < w + h {
            Complex64::new(hi.re, lo.im + (d - w))
        } else if d < 2.0 * w + h {
            Complex64::new(hi.re - (d - w - h), hi.im)
        } else {
            Complex64::new(lo.re, hi.im - (d - 2.0 * w - h))
        }
    }
}

fn box_count<F: Fn(Complex64) -> Complex64>(f: &F, lo: Complex64, hi: Complex64) -> std::result::Result<(usize, f64), ThroughZero> {
    let (w, sup) = winding(f, &box_path(lo, hi))?;
    Ok((rounded_count(w)?, sup))
}

/// Relative radius offsets tried when the contour meets a zero.
fn jitter(attempt: usize) -> f64 {
    let k = attempt.div_ceil(2) as f64;
    let sign = if attempt % 2 == 1 { 1.0 } else { -1.0 };
    sign * k * 1e-3
}

/// Counts and localizes the zeros of `f` in the open disc `|z - center| < radius`.
///
/// When the circle passes within `BOUNDARY_TOLERANCE` of a zero the radius is
/// perturbed by a few thousandths; the certificate then refers to the perturbed
/// disc, and every listed zero lies inside it.
pub fn count_zeros<F: Fn(Complex64) -> Complex64>(f: &F, center: Complex64, radius: f64) -> Result<ZeroCertificate> {
    let (r, count, sup) = disc_count(f, center, radius)?;
    let base_value = f(center).norm();
    let zeros = if count == 0 {
        Vec::new()
    } else {
        let lo = center - Complex64::new(r, r);
        let hi = center + Complex64::new(r, r);
        let mut found = localize_in_box(f, lo, hi)?;
        found.retain(|z| (z - center).norm() < r);
        found
    };
    Ok(ZeroCertificate { count, zeros, sup_bound: sup, base_value, radius: r })
}

/// Like [`count_zeros`] but only counts; returns the radius actually used.
pub fn disc_count<F: Fn(Complex64) -> Complex64>(f: &F, center: Complex64, radius: f64) -> Result<(f64, usize, f64)> {
    for attempt in 0..MAX_JITTER_ATTEMPTS {
        let r = radius * (1.0 + jitter(attempt));
        if let Ok((w, sup)) = winding(f, &circle_path(center, r)) {
            if let Ok(count) = rounded_count(w) {
                return Ok((r, count, sup));
            }
        }
    }
    Err(Error::ContourThroughZero { attempts: MAX_JITTER_ATTEMPTS })
}

/// Counts and localizes the zeros of `f` in the box `[lo, hi]` (corners).
pub fn count_zeros_in_box<F: Fn(Complex64) -> Complex64>(f: &F, lo: Complex64, hi: Complex64) -> Result<ZeroCertificate> {
    let mut last = None;
    for attempt in 0..MAX_JITTER_ATTEMPTS {
        let pad = Complex64::new(1.0, 1.0) * jitter(attempt) * (hi - lo).norm() * 0.5;
        let (l, h) = (lo - pad, hi + pad);
        if let Ok((count, sup)) = box_count(f, l, h) {
            last = Some((l, h, count, sup));
            break;
        }
    }
    let (l, h, count, sup) = last.ok_or(Error::ContourThroughZero { attempts: MAX_JITTER_ATTEMPTS })?;
    let zeros = if count == 0 { Vec::new() } else { localize_in_box(f, l, h)? };
    let radius = 0.5 * (h.re - l.re).max(h.im - l.im);
    Ok(ZeroCertificate { count, zeros, sup_bound: sup, base_value: f(0.5 * (l + h)).norm(), radius })
}

/// All zeros inside the box, by quadrisection with a Newton finish.
pub fn localize_in_box<F: Fn(Complex64) -> Complex64>(f: &F, lo: Complex64, hi: Complex64) -> Result<Vec<Complex64>> {
    let (count, _) = box_count(f, lo, hi).map_err(|_| Error::ContourThroughZero { attempts: 1 })?;
    let mut zeros = Vec::with_capacity(count);
    quadrisect(f, lo, hi, count, &mut zeros)?;
    Ok(zeros)
}

fn quadrisect<F: Fn(Complex64) -> Complex64>(f: &F, lo: Complex64, hi: Complex64, count: usize, out: &mut Vec<Complex64>) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im);
    let mid = 0.5 * (lo + hi);
    if half < ZERO_TOLERANCE {
        out.extend(std::iter::repeat_n(mid, count));
        return Ok(());
    }
    if count == 1 && half < NEWTON_SWITCH {
        if let Some(z) = newton(f, mid, lo, hi) {
            out.push(z);
            return Ok(());
        }
    }
    for attempt in 0..MAX_JITTER_ATTEMPTS {
        // split slightly off-center so that repeated splits do not line up with zeros
        let frac = 0.5 + 0.0137 * (attempt as f64 + 1.0) * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        let sx = lo.re + frac * (hi.re - lo.re);
        let sy = lo.im + frac * (hi.im - lo.im);
        let children = [
            (lo, Complex64::new(sx, sy)),
            (Complex64::new(sx, lo.im), Complex64::new(hi.re, sy)),
            (Complex64::new(lo.re, sy), Complex64::new(sx, hi.im)),
            (Complex64::new(sx, sy), hi),
        ];
        let counts: std::result::Result<Vec<usize>, ThroughZero> = children.iter().map(|&(l, h)| box_count(f, l, h).map(|c| c.0)).collect();
        match counts {
            Ok(c) if c.iter().sum::<usize>() == count => {
                for (&(l, h), &k) in children.iter().zip(&c) {
                    quadrisect(f, l, h, k, out)?;
                }
                return Ok(());
            }
            _ => continue,
        }
    }
    // a multiple zero or tight cluster: every split line passes too close to it
    if half < CLUSTER_SWITCH {
        if let Some(z) = cluster_minimum(f, lo, hi) {
            out.extend(std::iter::repeat_n(z, count));
            return Ok(());
        }
    }
    Err(Error::ContourThroughZero { attempts: MAX_JITTER_ATTEMPTS })
}

/// Minimum of `|f|` in the box by repeated zooming on a 9×9 grid.
fn cluster_minimum<F: Fn(Complex64) -> Complex64>(f: &F, lo: Complex64, hi: Complex64) -> Option<Complex64> {
    let mut center = 0.5 * (lo + hi);
    let mut half = 0.5 * (hi - lo);
    let mut best = center;
    while half.re.max(half.im) > ZERO_TOLERANCE * 1e-3 {
        let mut best_value = f64::INFINITY;
        for i in 0..9 {
            for j in 0..9 {
                let z = center + Complex64::new(half.re * (i as f64 / 4.0 - 1.0), half.im * (j as f64 / 4.0 - 1.0));
                let v = f(z).norm();
                if v < best_value {
                    best_value = v;
                    best = z;
                }
            }
        }
        center = best;
        half *= 0.25;
    }
    (f(best).norm() < RESIDUAL_TOLERANCE).then_some(best)
}

fn newton<F: Fn(Complex64) -> Complex64>(f: &F, start: Complex64, lo: Complex64, hi: Complex64) -> Option<Complex64> {
    let mut z = start;
    let scale = (hi - lo).norm();
    let h = 1e-7 * scale.max(1e-6);
    for _ in 0..60 {
        let fz = f(z);
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = fz / d;
        z -= step;
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            break;
        }
    }
    let slack = 1e-3 * scale;
    let inside = z.re >= lo.re - slack && z.re <= hi.re + slack && z.im >= lo.im - slack && z.im <= hi.im + slack;
    (inside && f(z).norm() < RESIDUAL_TOLERANCE).then_some(z)
}
