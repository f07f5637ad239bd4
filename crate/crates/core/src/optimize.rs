//! Coarse grid scan followed by golden-section refinement.
//!
//! Unimodality is not assumed: the grid picks the bracket, and the refined
//! value is only accepted when it beats the best grid point.

use serde::Serialize;

use crate::error::{domain, Result};

/// A bounded search interval `(lo, hi]`. The lower end is excluded so that
/// `lo = 0` can describe "all positive amplitudes up to `hi`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(domain(format!("interval ({lo}, {hi}] must be bounded")));
        }
        if lo < 0.0 {
            return Err(domain(format!("interval ({lo}, {hi}] must lie in the positive reals")));
        }
        if hi <= lo {
            return Err(domain(format!("interval ({lo}, {hi}] is empty or inverted")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }

    /// `n` points `lo + (hi - lo) i / n` for `i = 1..=n`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// best coarse-grid point, before refinement
    pub grid_x: f64,
    pub grid_value: f64,
}

pub const MIN_GRID_POINTS: usize = 16;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub fn maximize<F>(f: F, range: Interval, grid_points: usize, xtol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    if grid_points < MIN_GRID_POINTS {
        return Err(domain(format!(
            "need at least {MIN_GRID_POINTS} grid points, got {grid_points}"
        )));
    }
    if xtol.is_nan() || xtol <= 0.0 {
        return Err(domain("bracket tolerance must be positive"));
    }
    let grid = range.grid(grid_points);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut k = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[k] {
            k = i;
        }
    }
    let (grid_x, grid_value) = (grid[k], values[k]);

    let mut a = if k == 0 { range.lo } else { grid[k - 1] };
    let mut b = if k + 1 == grid.len() { range.hi } else { grid[k + 1] };
    let mut best = (grid_x, grid_value);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(Maximum { x: best.0, value: best.1, grid_x, grid_value })
}
