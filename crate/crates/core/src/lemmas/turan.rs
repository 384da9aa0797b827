//! Measured constant in the Turán-type bound
//! `sup_I |f| <= e^{max|Re λ| |I|} (A |I| / |E|)^L sup_E |f|` for `f(x) = Σ c_l e^{λ_l x}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::shadow::{Interval, IntervalUnion};

/// Grid density for the sup computations, per unit length.
pub const SAMPLES_PER_UNIT: f64 = 1000.0;
const GOLDEN_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct TuranTrial {
    pub exponents: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    pub interval: Interval,
    pub subset: IntervalUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuranMeasurement {
    pub sup_interval: f64,
    pub sup_subset: f64,
    pub growth: f64,
    pub measured_a: f64,
}

impl TuranTrial {
    pub fn new(exponents: Vec<Complex64>, coefficients: Vec<Complex64>, interval: Interval, subset: IntervalUnion) -> Result<Self> {
        if exponents.is_empty() || exponents.len() != coefficients.len() {
            return Err(Error::InvalidInput("need matching, nonempty exponents and coefficients".into()));
        }
        if !(subset.measure() > 0.0) {
            return Err(Error::InvalidInput("subset has zero measure".into()));
        }
        let inside = subset.intervals().iter().all(|iv| iv.lo >= interval.lo && iv.hi <= interval.hi);
        if !inside {
            return Err(Error::InvalidInput("subset is not contained in the interval".into()));
        }
        Ok(TuranTrial { exponents, coefficients, interval, subset })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.exponents.iter().zip(&self.coefficients).map(|(&l, &c)| c * (l * x).exp()).sum()
    }
}

/// Sup of `g` on `[lo, hi]`: grid, then golden-section search around the best sample.
pub fn refined_sup(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, per_unit: f64) -> f64 {
    let n = (((hi - lo) * per_unit).ceil() as usize).max(2);
    let h = (hi - lo) / n as f64;
    let (mut best_x, mut best) = (lo, g(lo));
    for i in 1..=n {
        let x = if i == n { hi } else { lo + i as f64 * h };
        let v = g(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (mut a, mut b) = ((best_x - h).max(lo), (best_x + h).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..GOLDEN_STEPS {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d);
        }
    }
    best.max(gc).max(gd)
}

/// Smallest `A` for which the inequality holds on this trial.
pub fn turan_ratio(trial: &TuranTrial) -> TuranMeasurement {
    let g = |x: f64| trial.eval(x).norm();
    let sup_interval = refined_sup(&g, trial.interval.lo, trial.interval.hi, SAMPLES_PER_UNIT);
    let sup_subset = trial.subset.intervals().iter().map(|iv| refined_sup(&g, iv.lo, iv.hi, SAMPLES_PER_UNIT)).fold(0.0, f64::max);
    let len = trial.interval.length();
    let growth = (trial.exponents.iter().map(|l| l.re.abs()).fold(0.0, f64::max) * len).exp();
    let terms = trial.exponents.len() as f64;
    let measured_a = trial.subset.measure() / len * (sup_interval / (growth * sup_subset)).powf(1.0 / terms);
    TuranMeasurement { sup_interval, sup_subset, growth, measured_a }
}
