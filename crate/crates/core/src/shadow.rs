//! Shadows of level-n pieces on a line and the multiplicity step function.

use std::fmt::Write as _;

use crate::error::Result;
use crate::ifs::{Piece, Shape, SimilaritySystem, DEFAULT_ENUMERATION_CAP};

/// Events closer than this to the first event of a cluster are treated as one.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Interval { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted, pairwise-disjoint intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    /// Sorts and merges; intervals whose gap is at most `MERGE_TOLERANCE` are joined.
    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi + MERGE_TOLERANCE => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        IntervalUnion { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// True when every interval of `self` lies inside one interval of `other` (up to `slack`).
    pub fn is_covered_by(&self, other: &IntervalUnion, slack: f64) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.hi + slack < iv.hi);
            other.intervals.get(idx).is_some_and(|o| o.lo - slack <= iv.lo && iv.hi <= o.hi + slack)
        })
    }
}

/// Shadow of a piece on the line of angle `theta`.
pub fn project_piece(piece: &Piece, theta: f64, shape: Shape) -> Interval {
    let (s, c) = theta.sin_cos();
    let mid = piece.center.re * c + piece.center.im * s;
    let w = shape.shadow_half_width(piece.size, theta);
    Interval::new(mid - w, mid + w)
}

/// Integer-valued piecewise-constant function with finitely many cells.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i + 1])`; the function is 0
/// outside `[breakpoints[0], breakpoints[last]]`. Canonical form: adjacent values
/// differ and the first and last values are nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<u32>,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn indicator(iv: Interval) -> Self {
        if iv.length() <= 0.0 {
            return StepFunction::zero();
        }
        StepFunction { breakpoints: vec![iv.lo, iv.hi], values: vec![1] }
    }

    /// Builds a function from raw cells, canonicalizing. `values.len()` must be
    /// `breakpoints.len() - 1` (or both empty).
    pub fn from_cells(breakpoints: Vec<f64>, values: Vec<u32>) -> Self {
        assert!((breakpoints.is_empty() && values.is_empty()) || values.len() + 1 == breakpoints.len(), "cell count mismatch");
        StepFunction { breakpoints, values }.canonical()
    }

    /// Sum of indicator functions of arbitrary intervals.
    pub fn from_intervals(intervals: &[Interval]) -> Self {
        let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * intervals.len());
        for iv in intervals.iter().filter(|iv| iv.length() > 0.0) {
            events.push((iv.lo, 1));
            events.push((iv.hi, -1));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::from_sorted_events(events.into_iter())
    }

    /// Sum of indicators of `[c - w, c + w]` for sorted centers `c`. Both endpoint
    /// sequences are sorted, so the sweep is a merge.
    pub fn from_sorted_centers(centers: &[f64], half_width: f64) -> Self {
        if centers.is_empty() || half_width <= 0.0 {
            return StepFunction::zero();
        }
        let n = centers.len();
        let (mut i, mut j) = (0, 0);
        let events = std::iter::from_fn(move || {
            if j >= n {
                return None;
            }
            if i < n && centers[i] - half_width <= centers[j] + half_width {
                i += 1;
                Some((centers[i - 1] - half_width, 1))
            } else {
                j += 1;
                Some((centers[j - 1] + half_width, -1))
            }
        });
        Self::from_sorted_events(events)
    }

    fn from_sorted_events(events: impl Iterator<Item = (f64, i64)>) -> Self {
        let mut breakpoints = Vec::new();
        let mut values: Vec<u32> = Vec::new();
        let mut level: i64 = 0;
        let mut cluster: Option<(f64, i64)> = None;
        let mut flush = |x: f64, delta: i64, level: &mut i64| {
            if delta == 0 {
                return;
            }
            *level += delta;
            debug_assert!(*level >= 0);
            breakpoints.push(x);
            values.push(*level as u32);
        };
        for (x, delta) in events {
            match cluster {
                Some((start, ref mut acc)) if x - start <= MERGE_TOLERANCE => *acc += delta,
                Some((start, acc)) => {
                    flush(start, acc, &mut level);
                    cluster = Some((x, delta));
                }
                None => cluster = Some((x, delta)),
            }
        }
        if let Some((start, acc)) = cluster {
            flush(start, acc, &mut level);
        }
        // the last pushed value is the level after the final event, which is 0
        values.pop();
        StepFunction { breakpoints, values }.canonical()
    }

    /// Merges equal neighbours, drops empty cells and trims zero cells at both ends.
    pub fn canonical(self) -> Self {
        let StepFunction { breakpoints, values } = self;
        let mut runs: Vec<(f64, f64, u32)> = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            let (lo, hi) = (breakpoints[i], breakpoints[i + 1]);
            if hi <= lo {
                continue;
            }
            match runs.last_mut() {
                Some(last) if last.2 == v => last.1 = hi,
                _ => runs.push((lo, hi, v)),
            }
        }
        let first = runs.iter().position(|r| r.2 != 0);
        let last = runs.iter().rposition(|r| r.2 != 0);
        let (Some(first), Some(last)) = (first, last) else {
            return StepFunction::zero();
        };
        let runs = &runs[first..=last];
        let mut bp: Vec<f64> = runs.iter().map(|r| r.0).collect();
        bp.push(runs[runs.len() - 1].1);
        StepFunction { breakpoints: bp, values: runs.iter().map(|r| r.2).collect() }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, u32)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn value_at(&self, x: f64) -> u32 {
        if self.values.is_empty() || x < self.breakpoints[0] || x >= *self.breakpoints.last().expect("nonempty") {
            return 0;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= x) - 1;
        self.values[idx]
    }

    pub fn max_value(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(lo, hi, v)| v as f64 * (hi - lo)).sum()
    }

    pub fn support_measure(&self) -> f64 {
        self.level_measure(1)
    }

    /// Measure of `{x : f(x) >= k}`.
    pub fn level_measure(&self, k: u32) -> f64 {
        self.cells().filter(|&(_, _, v)| v >= k).map(|(lo, hi, _)| hi - lo).sum()
    }

    /// Measure of `{x : f(x) > k}`.
    pub fn strict_level_measure(&self, k: u32) -> f64 {
        self.cells().filter(|&(_, _, v)| v > k).map(|(lo, hi, _)| hi - lo).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.cells().map(|(lo, hi, v)| (v as f64) * (v as f64) * (hi - lo)).sum()
    }

    /// `{x : f(x) >= k}` as intervals.
    pub fn level_set(&self, k: u32) -> IntervalUnion {
        IntervalUnion::from_intervals(self.cells().filter(|&(_, _, v)| v >= k.max(1)).map(|(lo, hi, _)| Interval::new(lo, hi)).collect())
    }

    pub fn support(&self) -> IntervalUnion {
        self.level_set(1)
    }

    /// Pointwise maximum.
    pub fn max_with(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, u32::max)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a + b)
    }

    fn combine(&self, other: &StepFunction, op: impl Fn(u32, u32) -> u32) -> StepFunction {
        let mut points: Vec<f64> = Vec::with_capacity(self.breakpoints.len() + other.breakpoints.len());
        let (a, b) = (&self.breakpoints, &other.breakpoints);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let x = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1]
            };
            match points.last() {
                Some(&last) if x - last <= MERGE_TOLERANCE => {}
                _ => points.push(x),
            }
        }
        if points.len() < 2 {
            return StepFunction::zero();
        }
        let values = points
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                op(self.value_at(mid), other.value_at(mid))
            })
            .collect();
        StepFunction::from_cells(points, values)
    }

    /// CSV with a comment header line and one row per cell.
    pub fn to_csv(&self, label: &str, n: usize, theta: f64) -> String {
        let mut out = format!("# label={label},n={n},theta={}\ncell_lo,cell_hi,value\n", crate::report::fmt_f64(theta));
        for (lo, hi, v) in self.cells() {
            let _ = writeln!(out, "{},{},{v}", crate::report::fmt_f64(lo), crate::report::fmt_f64(hi));
        }
        out
    }
}

/// Union length of `[c - w, c + w]` over sorted centers.
pub fn union_length_sorted(sorted_centers: &[f64], half_width: f64) -> f64 {
    if sorted_centers.is_empty() {
        return 0.0;
    }
    let width = 2.0 * half_width;
    width + sorted_centers.windows(2).map(|p| (p[1] - p[0]).min(width)).sum::<f64>()
}

/// Sorted projections of the depth-`n` centers and the shadow half-width.
pub fn sorted_shadow_centers(system: &SimilaritySystem, n: usize, theta: f64, cap: u64) -> Result<(Vec<f64>, f64)> {
    let mut proj = system.projected_centers(n, theta, cap)?;
    proj.sort_unstable_by(f64::total_cmp);
    Ok((proj, system.shape().shadow_half_width(system.piece_size(n), theta)))
}

/// `|proj_θ(G_n)|`.
pub fn shadow_length(system: &SimilaritySystem, n: usize, theta: f64, cap: u64) -> Result<f64> {
    let (centers, w) = sorted_shadow_centers(system, n, theta, cap)?;
    Ok(union_length_sorted(&centers, w))
}

/// The multiplicity function `f_{n,θ}` of the depth-`n` pieces.
pub fn multiplicity(system: &SimilaritySystem, n: usize, theta: f64) -> Result<StepFunction> {
    multiplicity_with_cap(system, n, theta, DEFAULT_ENUMERATION_CAP)
}

pub fn multiplicity_with_cap(system: &SimilaritySystem, n: usize, theta: f64, cap: u64) -> Result<StepFunction> {
    let (centers, w) = sorted_shadow_centers(system, n, theta, cap)?;
    Ok(StepFunction::from_sorted_centers(&centers, w))
}

/// Pointwise supremum of `f_{n,θ}` over `0 <= n <= depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalProfile(pub StepFunction);

impl std::ops::Deref for MaximalProfile {
    type Target = StepFunction;
    fn deref(&self) -> &StepFunction {
        &self.0
    }
}

pub fn maximal_profile(system: &SimilaritySystem, depth: usize, theta: f64) -> Result<MaximalProfile> {
    maximal_profile_with_cap(system, depth, theta, DEFAULT_ENUMERATION_CAP)
}

pub fn maximal_profile_with_cap(system: &SimilaritySystem, depth: usize, theta: f64, cap: u64) -> Result<MaximalProfile> {
    system.checked_piece_count(depth, cap)?;
    let mut profile = multiplicity_with_cap(system, 0, theta, cap)?;
    for n in 1..=depth {
        profile = profile.max_with(&multiplicity_with_cap(system, n, theta, cap)?);
    }
    Ok(MaximalProfile(profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::preset;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const S3: f64 = 1.732_050_807_568_877_2;

    /// Fine-grid oracle: integrates a function of the covering count on a midpoint grid.
    fn grid_oracle(intervals: &[(f64, f64)], g: impl Fn(u32) -> f64) -> f64 {
        let steps = 2_000_000;
        let h = 2.0 / steps as f64;
        (0..steps)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let count = intervals.iter().filter(|(lo, hi)| *lo <= x && x < *hi).count() as u32;
                g(count) * h
            })
            .sum()
    }

    #[test]
    fn project_piece_examples() {
        let root = Piece { center: Complex64::new(0.0, 0.0), size: 1.0, depth: 0 };
        for theta in [0.0, 0.4, 2.0] {
            assert_eq!(project_piece(&root, theta, Shape::Disc), Interval::new(-1.0, 1.0));
        }
        let square = Piece { center: Complex64::new(0.0, 0.0), size: 0.5, depth: 0 };
        let len = project_piece(&square, 0.5f64.atan(), Shape::Square).length();
        assert!((len - 3.0 / 5f64.sqrt()).abs() < 1e-15);
        let g = preset("gasket").unwrap();
        let top = g.piece(&g.word(vec![1]).unwrap());
        let iv = project_piece(&top, 0.0, Shape::Disc);
        assert!((iv.lo + 1.0 / 3.0).abs() < 1e-16 && (iv.hi - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn root_profile() {
        let f = multiplicity(&preset("gasket").unwrap(), 0, 0.3).unwrap();
        assert_eq!(f.breakpoints(), &[-1.0, 1.0]);
        assert_eq!(f.values(), &[1]);
        assert_eq!(f.support_measure(), 2.0);
        assert_eq!(f.mass(), 2.0);
        assert_eq!(f.l2_norm_sq(), 2.0);
    }

    #[test]
    fn gasket_level_one_against_grid_oracle() {
        let f = multiplicity(&preset("gasket").unwrap(), 1, 0.0).unwrap();
        let h = S3 / 6.0;
        let ivs = [(-1.0 / 3.0, 1.0 / 3.0), (h - 1.0 / 3.0, h + 1.0 / 3.0), (-h - 1.0 / 3.0, -h + 1.0 / 3.0)];
        let support = grid_oracle(&ivs, |c| (c > 0) as u32 as f64);
        let l2 = grid_oracle(&ivs, |c| (c * c) as f64);
        assert!((f.support_measure() - support).abs() < 1e-5);
        assert!((f.l2_norm_sq() - l2).abs() < 1e-5);
        assert!((f.support_measure() - (2.0 / 3.0 + S3 / 3.0)).abs() < 1e-12);
        assert!((f.level_measure(3) - (2.0 / 3.0 - S3 / 3.0)).abs() < 1e-12);
        assert!((f.mass() - 2.0).abs() < 1e-12);
        assert!((f.l2_norm_sq() - 3.690598923241497).abs() < 1e-9);
    }

    #[test]
    fn gasket_stacking_at_pi_over_six() {
        let g = preset("gasket").unwrap();
        let f = multiplicity(&g, 1, PI / 6.0).unwrap();
        // two centers project to 1/6 and stack; the third shadow [-2/3, 0] overlaps them on [-1/6, 0]
        assert_eq!(f.values(), &[1, 3, 2]);
        let expected = [-2.0 / 3.0, -1.0 / 6.0, 0.0, 0.5];
        for (a, b) in f.breakpoints().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        // oracle: direct enumeration of the nine depth-2 shadows
        let ivs: Vec<Interval> = g.enumerate_pieces(2).unwrap().map(|p| project_piece(&p, PI / 6.0, Shape::Disc)).collect();
        let direct = StepFunction::from_intervals(&ivs);
        let star = maximal_profile(&g, 2, PI / 6.0).unwrap();
        assert_eq!(direct.max_value(), 6);
        assert_eq!(star.max_value(), 6);
        let swept = multiplicity(&g, 2, PI / 6.0).unwrap();
        assert_eq!(swept.values(), direct.values());
        for (a, b) in swept.breakpoints().iter().zip(direct.breakpoints()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn corner4_tiles_at_arctan_half() {
        let c = preset("corner4").unwrap();
        let theta = 0.5f64.atan();
        for n in 0..=6 {
            let f = multiplicity(&c, n, theta).unwrap();
            assert!((f.support_measure() - 3.0 / 5f64.sqrt()).abs() < 1e-8, "n = {n}");
            assert!(f.level_measure(2) <= 1e-8, "n = {n}");
        }
    }

    #[test]
    fn maximal_profile_dominates() {
        let g = preset("gasket").unwrap();
        let theta = 0.9;
        let star = maximal_profile(&g, 4, theta).unwrap();
        assert_eq!(maximal_profile(&g, 0, theta).unwrap().0, multiplicity(&g, 0, theta).unwrap());
        for n in 0..=4 {
            let f = multiplicity(&g, n, theta).unwrap();
            for &x in f.breakpoints() {
                for probe in [x - 1e-10, x + 1e-10] {
                    assert!(star.value_at(probe) >= f.value_at(probe));
                }
            }
        }
    }

    #[test]
    fn canonical_form() {
        let f = StepFunction::from_cells(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![0, 2, 2, 0, 1]);
        assert_eq!(f.breakpoints(), &[1.0, 3.0, 4.0, 5.0]);
        assert_eq!(f.values(), &[2, 0, 1]);
        assert_eq!(f.clone().canonical(), f);
        assert!(StepFunction::from_cells(vec![0.0, 1.0], vec![0]).is_zero());
    }

    #[test]
    fn touching_intervals_merge() {
        let f = StepFunction::from_intervals(&[Interval::new(0.0, 1.0), Interval::new(1.0 + 1e-14, 2.0)]);
        assert_eq!(f.values(), &[1]);
        assert_eq!(f.support().len(), 1);
    }

    #[test]
    fn interval_union_queries() {
        let u = IntervalUnion::from_intervals(vec![Interval::new(3.0, 4.0), Interval::new(0.0, 1.0), Interval::new(0.5, 2.0)]);
        assert_eq!(u.len(), 2);
        assert!((u.measure() - 3.0).abs() < 1e-15);
        assert!(u.contains(1.5) && !u.contains(2.5) && u.contains(3.0));
        let small = IntervalUnion::from_intervals(vec![Interval::new(0.2, 0.3), Interval::new(3.5, 4.0)]);
        assert!(small.is_covered_by(&u, 0.0));
        assert!(!u.is_covered_by(&small, 0.0));
    }

    #[test]
    fn csv_has_header() {
        let f = multiplicity(&preset("gasket").unwrap(), 1, 0.0).unwrap();
        let csv = f.to_csv("gasket", 1, 0.0);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# label=gasket,n=1,theta="));
        assert_eq!(lines.next().unwrap(), "cell_lo,cell_hi,value");
        assert_eq!(lines.count(), f.values().len());
    }

    fn systems() -> Vec<SimilaritySystem> {
        vec![preset("gasket").unwrap(), preset("corner4").unwrap(), preset("random-5-21").unwrap()]
    }

    proptest! {
        #![proptest_config(ProptestConfig { rng_seed: proptest::test_runner::RngSeed::Fixed(7), ..ProptestConfig::with_cases(64) })]

        #[test]
        fn profile_identities(which in 0usize..3, n in 0usize..5, theta in 0.0..PI) {
            let system = systems().swap_remove(which);
            let f = multiplicity(&system, n, theta).unwrap();
            let count = system.len().pow(n as u32) as f64;
            let piece_len = 2.0 * system.shape().shadow_half_width(system.piece_size(n), theta);
            prop_assert!((f.mass() - count * piece_len).abs() <= 1e-9 * f.mass());
            for k in 1..=f.max_value() + 1 {
                prop_assert!(f.mass() + 1e-12 >= f.support_measure() + (k as f64 - 1.0) * f.level_measure(k));
            }
            prop_assert!(f.support_measure() + 1e-9 >= f.mass().powi(2) / f.l2_norm_sq());
            prop_assert_eq!(f.clone().canonical(), f.clone());
            let (centers, w) = sorted_shadow_centers(&system, n, theta, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert!((union_length_sorted(&centers, w) - f.support_measure()).abs() < 1e-9);
        }

        #[test]
        fn sweep_matches_generic_events(which in 0usize..3, n in 0usize..4, theta in 0.0..PI) {
            let system = systems().swap_remove(which);
            let fast = multiplicity(&system, n, theta).unwrap();
            let ivs: Vec<Interval> = system
                .enumerate_pieces(n)
                .unwrap()
                .map(|p| project_piece(&p, theta, system.shape()))
                .collect();
            let slow = StepFunction::from_intervals(&ivs);
            prop_assert_eq!(fast.values(), slow.values());
            for (a, b) in fast.breakpoints().iter().zip(slow.breakpoints()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn support_is_lipschitz_in_direction(which in 0usize..3, n in 0usize..4, theta in 0.0..3.0f64) {
            let system = systems().swap_remove(which);
            let step = PI / 512.0;
            let a = shadow_length(&system, n, theta, DEFAULT_ENUMERATION_CAP).unwrap();
            let b = shadow_length(&system, n, theta + step, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert!((a - b).abs() <= 2.0 * system.len().pow(n as u32) as f64 * step);
        }
    }
}
