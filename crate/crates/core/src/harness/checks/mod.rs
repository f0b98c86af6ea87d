//! Check bodies. Each returns the largest residual it saw together with the
//! inputs at which it occurred.

pub mod eigen;
pub mod grid;
pub mod qcore;
pub mod spectral;
pub mod transform;

use std::f64::consts::PI;

use rand::Rng as _;

use super::{Outcome, Rng};
use crate::grid::{Branch, Grid, GridFunction};
use crate::{c64, Result, C64};

/// Running maximum of a residual. A NaN residual is sticky.
pub(crate) struct Worst {
    residual: f64,
    inputs: String,
    seen: bool,
}

impl Worst {
    pub fn new() -> Worst {
        Worst { residual: 0.0, inputs: String::new(), seen: false }
    }

    pub fn see(&mut self, r: f64, inputs: impl FnOnce() -> String) {
        if self.residual.is_nan() {
            return;
        }
        if r.is_nan() || r > self.residual || !self.seen {
            self.residual = r;
            self.inputs = inputs();
            self.seen = true;
        }
    }

    pub fn done(self) -> Result<Outcome> {
        Ok(Outcome::Measured { residual: self.residual, inputs: self.inputs })
    }
}

pub(crate) fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// A point `e^{iψ}` with `ψ` uniform in `[0.02, π - 0.02]`.
pub(crate) fn circle_point(rng: &mut Rng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.02..PI - 0.02))
}

/// `q^u e^{iφ}` with `u` uniform in `[-r, r]`.
pub(crate) fn annulus_point(rng: &mut Rng, q: f64, r: f64) -> C64 {
    C64::from_polar(q.powf(rng.gen_range(-r..r)), rng.gen_range(0.0..2.0 * PI))
}

pub(crate) fn normal(rng: &mut Rng) -> C64 {
    c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A random function with `1..=max` nonzero values at indices in `[lo, hi]`.
pub(crate) fn random_finite(rng: &mut Rng, grid: Grid, lo: i64, hi: i64, max: usize) -> GridFunction {
    let mut f = GridFunction::zeros(grid);
    let n = rng.gen_range(1..=max);
    for _ in 0..n {
        let br = if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
        let k = rng.gen_range(lo..=hi);
        f.set(br, k, normal(rng));
    }
    f
}

pub(crate) fn describe(f: &GridFunction) -> String {
    let parts: Vec<String> = f.support().into_iter().map(|(br, k)| format!("{}{}:{}", br.symbol(), k, f.get(br, k))).collect();
    format!("{{{}}}", parts.join(", "))
}
