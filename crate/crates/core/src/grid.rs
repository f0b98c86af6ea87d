//! Parameters, the lattice window and the operator `L`.
//!
//! A point of `R_q` is addressed by its branch and an integer `k`, standing
//! for `x = z_± q^k`. Functions are stored on a finite window
//! `k_min ≤ k ≤ k_max` of both branches and are taken to vanish outside.

use crate::qcore::{is_unit, on_lattice, qpoch_inf_prod, qpoch_n_prod};
use crate::{c64, Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn other(self) -> Branch {
        match self {
            Branch::Minus => Branch::Plus,
            Branch::Plus => Branch::Minus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Minus => '-',
            Branch::Plus => '+',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Branch> {
        match c {
            "-" | "minus" => Some(Branch::Minus),
            "+" | "plus" => Some(Branch::Plus),
            _ => None,
        }
    }
}

/// Parameters `(q, z₋, z₊, a, b, c, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub q: f64,
    pub z_minus: f64,
    pub z_plus: f64,
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

const PAIR_TOL: f64 = 1e-13;

impl Params {
    /// Builds and validates a parameter set.
    pub fn new(q: f64, z_minus: f64, z_plus: f64, a: C64, b: C64, c: C64, d: C64) -> Result<Params> {
        let p = Params { q, z_minus, z_plus, a, b, c, d };
        p.validate()?;
        Ok(p)
    }

    /// Checks membership of the admissible parameter domain.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ParameterDomain(m));
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad(format!("q = {} not in (0,1)", self.q));
        }
        if !(self.z_minus < 0.0 && self.z_plus > 0.0) {
            return bad("need z₋ < 0 < z₊".into());
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !v.is_finite() || v.norm() == 0.0 {
                return bad(format!("{name} must be finite and nonzero"));
            }
            for z in [self.z_minus, self.z_plus] {
                if on_lattice(v * z, self.q) {
                    return bad(format!("{name} lies on z^-1 q^Z for z = {z}"));
                }
            }
        }
        if (self.a - self.b).norm() <= PAIR_TOL * self.a.norm() {
            return bad("a = b".into());
        }
        if !self.pair_ok(self.a, self.b) {
            return bad("(a, b) is neither a conjugate pair nor an admissible real pair".into());
        }
        if !self.pair_ok(self.c, self.d) {
            return bad("(c, d) is neither a conjugate pair nor an admissible real pair".into());
        }
        Ok(())
    }

    fn pair_ok(&self, alpha: C64, beta: C64) -> bool {
        if (alpha - beta.conj()).norm() <= PAIR_TOL * alpha.norm() && alpha.im.abs() > PAIR_TOL * alpha.norm() {
            return true;
        }
        if alpha.im.abs() > PAIR_TOL * alpha.norm() || beta.im.abs() > PAIR_TOL * beta.norm() {
            return false;
        }
        let (ia, ib) = (1.0 / alpha.re, 1.0 / beta.re);
        let q = self.q;
        // z₊q^{k0} < 1/β < 1/α < z₊q^{k0-1}
        if ia > 0.0 && ib > 0.0 && ib < ia {
            let k0 = ((ia / self.z_plus).ln() / q.ln()).floor() as i32 + 1;
            let lo = self.z_plus * q.powi(k0);
            let hi = self.z_plus * q.powi(k0 - 1);
            return lo < ib && ia < hi;
        }
        // z₋q^{k0-1} < 1/α < 1/β < z₋q^{k0}
        if ia < 0.0 && ib < 0.0 && ia < ib {
            let k0 = ((ia / self.z_minus).ln() / q.ln()).floor() as i32 + 1;
            let lo = self.z_minus * q.powi(k0 - 1);
            let hi = self.z_minus * q.powi(k0);
            return lo < ia && ib < hi;
        }
        false
    }

    /// Whether the parameters avoid the degenerate configurations excluded
    /// from the generic set.
    pub fn is_generic(&self) -> bool {
        self.genericity_defect().is_none()
    }

    pub fn require_generic(&self) -> Result<()> {
        match self.genericity_defect() {
            None => Ok(()),
            Some(m) => Err(Error::NonGenericParameters(m)),
        }
    }

    fn genericity_defect(&self) -> Option<String> {
        let (a, b, c, d, q) = (self.a, self.b, self.c, self.d, self.q);
        if (c - d).norm() <= PAIR_TOL * c.norm() {
            return Some("c = d".into());
        }
        for (name, r) in [("c/a", c / a), ("c/b", c / b), ("d/a", d / a), ("d/b", d / b), ("cd/ab", c * d / (a * b))] {
            if on_lattice(r, q) {
                return Some(format!("{name} lies on q^Z"));
            }
        }
        None
    }

    /// `s = sqrt(cdq/(ab))`, principal branch.
    pub fn s(&self) -> C64 {
        (self.c * self.d * self.q / (self.a * self.b)).sqrt()
    }

    /// The same parameters with `a` and `b` exchanged.
    pub fn dagger(&self) -> Params {
        Params { a: self.b, b: self.a, ..*self }
    }

    /// Whether `a = conj(b)`.
    pub fn conjugate_pair(&self) -> bool {
        (self.a - self.b.conj()).norm() <= PAIR_TOL * self.a.norm() && self.a.im.abs() > PAIR_TOL * self.a.norm()
    }

    pub fn z(&self, br: Branch) -> f64 {
        match br {
            Branch::Minus => self.z_minus,
            Branch::Plus => self.z_plus,
        }
    }

    /// The lattice point `z q^k`.
    pub fn point(&self, br: Branch, k: i64) -> f64 {
        self.z(br) * self.q.powi(k as i32)
    }

    /// `μ = γ + 1/γ`.
    pub fn mu(gamma: C64) -> C64 {
        gamma + 1.0 / gamma
    }

    /// Named reference sets: `ps1` (`a = conj b`, `c = conj d`), `ps2`
    /// (real, with a point `as/(dq)` in the discrete spectrum), `ps3`
    /// (real, `s > 1`) and `ps4` (real, `q/s > 1`). All use `q = 1/2`,
    /// `z₋ = -1`, `z₊ = 1`.
    pub fn preset(name: &str) -> Option<Params> {
        let r = |x: f64| c64(x, 0.0);
        let (a, b, c, d) = match name {
            "ps1" => (c64(0.8, 0.4), c64(0.8, -0.4), c64(0.7, 0.2), c64(0.7, -0.2)),
            "ps2" => (r(1.3), r(1.8), r(1.25), r(1.9)),
            "ps3" => (r(2.2), r(2.6), r(4.5), r(6.5)),
            "ps4" => (r(4.5), r(6.5), r(1.25), r(1.8)),
            _ => return None,
        };
        Params::new(0.5, -1.0, 1.0, a, b, c, d).ok()
    }

    pub const PRESETS: [&'static str; 4] = ["ps1", "ps2", "ps3", "ps4"];
}

/// Window `k_min ≤ k ≤ k_max` on both branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub k_min: i64,
    pub k_max: i64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { k_min: -40, k_max: 60 }
    }
}

impl Grid {
    pub fn new(k_min: i64, k_max: i64) -> Result<Grid> {
        if k_min + 2 > k_max {
            return Err(Error::DomainError(format!("window [{k_min}, {k_max}] too small")));
        }
        Ok(Grid { k_min, k_max })
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.k_max < self.k_min
    }

    pub fn contains(&self, k: i64) -> bool {
        k >= self.k_min && k <= self.k_max
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }

    /// All points, minus branch first.
    pub fn points(&self) -> Vec<(Branch, i64)> {
        Branch::BOTH.iter().flat_map(|&br| self.ks().map(move |k| (br, k))).collect()
    }

    pub fn union(&self, other: &Grid) -> Grid {
        Grid { k_min: self.k_min.min(other.k_min), k_max: self.k_max.max(other.k_max) }
    }
}

/// A function on the window of both branches.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub minus: Vec<C64>,
    pub plus: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> GridFunction {
        let n = grid.len();
        GridFunction { grid, minus: vec![C64::new(0.0, 0.0); n], plus: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(Branch, i64) -> C64) -> GridFunction {
        let mut g = GridFunction::zeros(grid);
        for (br, k) in grid.points() {
            g.set(br, k, f(br, k));
        }
        g
    }

    /// `δ_{x,y}` for the lattice point `y`.
    pub fn delta(grid: Grid, br: Branch, k: i64) -> GridFunction {
        let mut g = GridFunction::zeros(grid);
        g.set(br, k, C64::new(1.0, 0.0));
        g
    }

    pub fn branch(&self, br: Branch) -> &[C64] {
        match br {
            Branch::Minus => &self.minus,
            Branch::Plus => &self.plus,
        }
    }

    pub fn branch_mut(&mut self, br: Branch) -> &mut Vec<C64> {
        match br {
            Branch::Minus => &mut self.minus,
            Branch::Plus => &mut self.plus,
        }
    }

    /// Value at `z q^k`; zero outside the window.
    pub fn get(&self, br: Branch, k: i64) -> C64 {
        if self.grid.contains(k) {
            self.branch(br)[(k - self.grid.k_min) as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, br: Branch, k: i64, v: C64) {
        let i = (k - self.grid.k_min) as usize;
        self.branch_mut(br)[i] = v;
    }

    /// Restriction or zero extension to another window.
    pub fn regrid(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |br, k| self.get(br, k))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            minus: self.minus.iter().map(|&v| f(v)).collect(),
            plus: self.plus.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> GridFunction {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: C64) -> GridFunction {
        self.map(|v| v * s)
    }

    /// `self + s·other` on the union window.
    pub fn axpy(&self, s: C64, other: &GridFunction) -> GridFunction {
        let grid = self.grid.union(&other.grid);
        GridFunction::from_fn(grid, |br, k| self.get(br, k) + s * other.get(br, k))
    }

    pub fn sup_norm(&self) -> f64 {
        self.minus.iter().chain(self.plus.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Points carrying a nonzero value.
    pub fn support(&self) -> Vec<(Branch, i64)> {
        self.grid.points().into_iter().filter(|&(br, k)| self.get(br, k) != C64::new(0.0, 0.0)).collect()
    }

    /// Smallest window containing the support, if any.
    pub fn support_window(&self) -> Option<Grid> {
        let s = self.support();
        let lo = s.iter().map(|p| p.1).min()?;
        let hi = s.iter().map(|p| p.1).max()?;
        Some(Grid { k_min: lo, k_max: hi })
    }
}

// ---------------------------------------------------------------------------
// Operator and weights
// ---------------------------------------------------------------------------

/// Coefficients `(A(x), B(x), C(x))` of
/// `(Lf)(x) = A(x) f(x/q) + B(x) f(qx) + C(x) f(x)`.
pub fn coefficients(p: &Params, x: f64) -> (C64, C64, C64) {
    let s = p.s();
    let one = C64::new(1.0, 0.0);
    let q = p.q;
    let a_ = (one - q / (p.a * x)) * (one - q / (p.b * x)) / s;
    let b_ = (one - 1.0 / (p.c * x)) * (one - 1.0 / (p.d * x)) * s;
    let c_ = s + one / s - a_ - b_;
    (a_, b_, c_)
}

/// `L` applied to `f`, with `f` taken as zero outside its window. The result
/// lives on the same window.
///
/// The form `A(f(x/q) - f(x)) + B(f(qx) - f(x)) + (s + 1/s) f(x)` is used so
/// that the large coefficients near the origin act on differences.
pub fn apply_l(p: &Params, f: &GridFunction) -> GridFunction {
    let s = p.s();
    let sigma = s + 1.0 / s;
    GridFunction::from_fn(f.grid, |br, k| {
        let (a_, b_, _) = coefficients(p, p.point(br, k));
        let fk = f.get(br, k);
        a_ * (f.get(br, k - 1) - fk) + b_ * (f.get(br, k + 1) - fk) + sigma * fk
    })
}

/// Residual `(L - μ) f` at one point, together with the magnitude of the
/// individual terms. The ratio of the two is a relative backward error.
pub fn eigen_residual_at(p: &Params, f: &GridFunction, mu: C64, br: Branch, k: i64) -> (f64, f64) {
    let s = p.s();
    let sigma = s + 1.0 / s;
    let (a_, b_, c_) = coefficients(p, p.point(br, k));
    let (fm, f0, fp) = (f.get(br, k - 1), f.get(br, k), f.get(br, k + 1));
    let r = a_ * (fm - f0) + b_ * (fp - f0) + (sigma - mu) * f0;
    let scale = (a_ * fm).norm() + (b_ * fp).norm() + (c_ * f0).norm() + (mu * f0).norm();
    (r.norm(), scale)
}

/// `w(x) = (ax, bx; q)_∞ / (cx, dx; q)_∞` at `x = z q^k`.
///
/// For `k < 0` the equivalent finite-product form
/// `(ab/cd)^m (q/az, q/bz; q)_m (az, bz; q)_∞ / ((q/cz, q/dz; q)_m (cz, dz; q)_∞)`,
/// `m = -k`, avoids overflow.
pub fn weight_w(p: &Params, br: Branch, k: i64) -> Result<C64> {
    let q = p.q;
    if k >= 0 {
        let x = p.point(br, k);
        let num = qpoch_inf_prod(&[p.a * x, p.b * x], q)?;
        let den = qpoch_inf_prod(&[p.c * x, p.d * x], q)?;
        return Ok(num / den);
    }
    let m = -k;
    let z = p.z(br);
    let one = c64(q, 0.0);
    let fin = qpoch_n_prod(&[one / (p.a * z), one / (p.b * z)], q, m)? / qpoch_n_prod(&[one / (p.c * z), one / (p.d * z)], q, m)?;
    let inf = qpoch_inf_prod(&[p.a * z, p.b * z], q)? / qpoch_inf_prod(&[p.c * z, p.d * z], q)?;
    Ok((p.a * p.b / (p.c * p.d)).powi(m as i32) * fin * inf)
}

/// `u(x) = (1-q)² B(x) x² w(x) = (1-q)² sqrt(q/abcd) (ax, bx; q)_∞ / (cqx, dqx; q)_∞`.
pub fn weight_u(p: &Params, br: Branch, k: i64) -> Result<C64> {
    let x = p.point(br, k);
    let (_, b_, _) = coefficients(p, x);
    Ok((1.0 - p.q).powi(2) * b_ * x * x * weight_w(p, br, k)?)
}

/// Jackson measure `(1-q)|x|` of the point `z q^k`.
pub fn jackson_mass(p: &Params, br: Branch, k: i64) -> f64 {
    (1.0 - p.q) * p.point(br, k).abs()
}

/// `K_z = z(1-q) θ(az, bz)/θ(cz, dz)`.
pub fn k_z(p: &Params, z: f64) -> Result<C64> {
    use crate::qcore::theta_prod;
    let q = p.q;
    Ok(z * (1.0 - q) * theta_prod(&[p.a * z, p.b * z], q)? / theta_prod(&[p.c * z, p.d * z], q)?)
}

/// Relative tail size above which a Jackson sum is reported as not converged.
pub const JACKSON_TAIL_TOL: f64 = 1e-9;

/// `∫_{R_q} f(x) d_q x = (1-q)[Σ_k f(z₊q^k) z₊q^k - Σ_k f(z₋q^k) z₋q^k]` over the window.
///
/// Fails with [`Error::TailNotConverged`] when the terms at the window edges
/// are not negligible.
pub fn jackson_integral(p: &Params, f: &GridFunction) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut edge = 0.0f64;
    for (br, k) in f.grid.points() {
        let t = f.get(br, k) * jackson_mass(p, br, k);
        sum += t;
        abs += t.norm();
        if k == f.grid.k_min || k == f.grid.k_max {
            edge = edge.max(t.norm());
        }
    }
    if edge > JACKSON_TAIL_TOL * abs.max(f64::MIN_POSITIVE) {
        return Err(Error::TailNotConverged(format!("edge term {edge:.3e} against total {abs:.3e}")));
    }
    Ok(sum)
}

/// `⟨f, g⟩ = ∫_{R_q} f(x) conj(g(x)) w(x) d_q x`.
pub fn inner(p: &Params, f: &GridFunction, g: &GridFunction) -> Result<C64> {
    let grid = f.grid.union(&g.grid);
    let mut h = GridFunction::zeros(grid);
    for (br, k) in grid.points() {
        let (fv, gv) = (f.get(br, k), g.get(br, k));
        if fv != C64::new(0.0, 0.0) && gv != C64::new(0.0, 0.0) {
            h.set(br, k, fv * gv.conj() * weight_w(p, br, k)?);
        }
    }
    jackson_integral(p, &h)
}

/// Truncated inner product
/// `∫_{z₋q^k}^{z₋q^{l+1}} + ∫_{z₊q^{m+1}}^{z₊q^n} f conj(g) w d_q x`,
/// i.e. the minus branch over indices `k..=l` and the plus branch over `n..=m`.
pub fn inner_truncated(p: &Params, f: &GridFunction, g: &GridFunction, k: i64, l: i64, m: i64, n: i64) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for (br, lo, hi) in [(Branch::Minus, k, l), (Branch::Plus, n, m)] {
        for j in lo..=hi {
            sum += f.get(br, j) * g.get(br, j).conj() * weight_w(p, br, j)? * jackson_mass(p, br, j);
        }
    }
    Ok(sum)
}

/// Casorati determinant `D(f,g)(x) = (f(x)g(qx) - f(qx)g(x)) u(x) / ((1-q)x)` at `x = z q^k`.
pub fn casorati(p: &Params, f: &GridFunction, g: &GridFunction, br: Branch, k: i64) -> Result<C64> {
    let x = p.point(br, k);
    let wr = f.get(br, k) * g.get(br, k + 1) - f.get(br, k + 1) * g.get(br, k);
    Ok(wr * weight_u(p, br, k)? / ((1.0 - p.q) * x))
}

/// Condition number of the difference inside [`casorati`]: the ratio of the
/// size of the two products to the size of their difference.
pub fn casorati_condition(f: &GridFunction, g: &GridFunction, br: Branch, k: i64) -> f64 {
    let t1 = f.get(br, k) * g.get(br, k + 1);
    let t2 = f.get(br, k + 1) * g.get(br, k);
    (t1.norm() + t2.norm()) / (t1 - t2).norm()
}

/// `D_q f(x) = (f(x) - f(qx)) / ((1-q) x)` at `x = z q^k`.
pub fn q_derivative(p: &Params, f: &GridFunction, br: Branch, k: i64) -> C64 {
    let x = p.point(br, k);
    (f.get(br, k) - f.get(br, k + 1)) / ((1.0 - p.q) * x)
}

/// One-sided limits at the origin.
#[derive(Clone, Copy, Debug)]
pub struct OriginLimits {
    pub value_minus: C64,
    pub value_plus: C64,
    pub deriv_minus: C64,
    pub deriv_plus: C64,
}

/// Number of lattice points used by [`origin_limits`].
pub const ORIGIN_POINTS: usize = 6;

/// Extrapolates `f(0±)` and `D_q f(0±)` from `ORIGIN_POINTS` consecutive
/// lattice points with `|x|` just below `x_ref`.
///
/// Both `f` and `D_q f` are power series in `x`, so polynomial extrapolation
/// in `x` to `x = 0` applies.
pub fn origin_limits(p: &Params, f: &GridFunction, x_ref: f64) -> Result<OriginLimits> {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (i, br) in Branch::BOTH.iter().enumerate() {
        let z = p.z(*br).abs();
        let k0 = ((x_ref / z).ln() / p.q.ln()).ceil() as i64;
        if !f.grid.contains(k0) || !f.grid.contains(k0 + ORIGIN_POINTS as i64) {
            return Err(Error::DomainError(format!("window does not reach |x| = {x_ref:e}")));
        }
        let xs: Vec<f64> = (0..ORIGIN_POINTS).map(|j| p.point(*br, k0 + j as i64)).collect();
        let vals: Vec<C64> = (0..ORIGIN_POINTS).map(|j| f.get(*br, k0 + j as i64)).collect();
        let ders: Vec<C64> = (0..ORIGIN_POINTS).map(|j| q_derivative(p, f, *br, k0 + j as i64)).collect();
        out[i] = neville_at_zero(&xs, &vals);
        out[2 + i] = neville_at_zero(&xs, &ders);
    }
    Ok(OriginLimits { value_minus: out[0], value_plus: out[1], deriv_minus: out[2], deriv_plus: out[3] })
}

/// Value at 0 of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[C64]) -> C64 {
    let mut t: Vec<C64> = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            t[i] = (t[i + 1] * xs[i] - t[i] * xs[i + m]) / (xs[i] - xs[i + m]);
        }
    }
    t[0]
}

/// Whether `1 - y` vanishes; re-exported for modules that test lattice zeros.
pub fn unit(y: C64) -> bool {
    is_unit(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn ps1() -> Params {
        Params::new(0.5, -1.0, 1.0, c64(0.8, 0.4), c64(0.8, -0.4), c64(0.7, 0.2), c64(0.7, -0.2)).unwrap()
    }

    pub fn ps2() -> Params {
        Params::new(0.5, -1.0, 1.0, c64(1.3, 0.0), c64(1.8, 0.0), c64(1.25, 0.0), c64(1.9, 0.0)).unwrap()
    }

    #[test]
    fn reference_sets_are_admissible_and_generic() {
        for p in [ps1(), ps2()] {
            assert!(p.is_generic());
            assert!(p.s().im.abs() < 1e-15 && p.s().re > 0.0);
        }
    }

    #[test]
    fn rejects_lattice_parameter() {
        let r = Params::new(0.5, -1.0, 1.0, c64(2.0, 0.0), c64(3.0, 0.0), c64(0.7, 0.2), c64(0.7, -0.2));
        assert!(matches!(r, Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn rejects_split_real_pair() {
        // 1/a and 1/b in different q-intervals
        let r = Params::new(0.5, -1.0, 1.0, c64(1.3, 0.0), c64(2.5, 0.0), c64(0.7, 0.2), c64(0.7, -0.2));
        assert!(matches!(r, Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn negative_real_pair_on_minus_side() {
        let p = Params::new(0.5, -1.0, 1.0, c64(-1.3, 0.0), c64(-1.8, 0.0), c64(0.7, 0.2), c64(0.7, -0.2));
        assert!(p.is_ok());
    }

    #[test]
    fn non_generic_detected() {
        let p = Params::new(0.5, -1.0, 1.0, c64(0.8, 0.4), c64(0.8, -0.4), c64(0.4, 0.2), c64(0.4, -0.2)).unwrap();
        assert!(matches!(p.require_generic(), Err(Error::NonGenericParameters(_))));
    }

    #[test]
    fn weight_forms_agree_on_the_unit_point() {
        // k = 0 through the direct product and through the k < 0 formula shifted by one.
        for p in [ps1(), ps2()] {
            for br in Branch::BOTH {
                let x = p.point(br, -1);
                let direct = qpoch_inf_prod(&[p.a * x, p.b * x], p.q).unwrap() / qpoch_inf_prod(&[p.c * x, p.d * x], p.q).unwrap();
                let w = weight_w(&p, br, -1).unwrap();
                assert!((w - direct).norm() < 1e-13 * direct.norm());
            }
        }
    }

    #[test]
    fn u_closed_form() {
        for p in [ps1(), ps2()] {
            for br in Branch::BOTH {
                for k in [-3i64, 0, 4] {
                    let x = p.point(br, k);
                    let q = p.q;
                    let closed = (1.0 - q).powi(2) * p.s() / (p.c * p.d) * qpoch_inf_prod(&[p.a * x, p.b * x], q).unwrap()
                        / qpoch_inf_prod(&[p.c * q * x, p.d * q * x], q).unwrap();
                    let u = weight_u(&p, br, k).unwrap();
                    assert!((u - closed).norm() < 1e-12 * closed.norm(), "{u} {closed}");
                }
            }
        }
    }

    #[test]
    fn operator_coefficients_are_real() {
        for p in [ps1(), ps2()] {
            for br in Branch::BOTH {
                for k in -5..10 {
                    let (a_, b_, c_) = coefficients(&p, p.point(br, k));
                    assert!(a_.im.abs() < 1e-12 * a_.norm() && b_.im.abs() < 1e-12 * b_.norm());
                    assert!(c_.im.abs() < 1e-10 * (1.0 + c_.norm()));
                    assert!(b_.re > 0.0);
                }
            }
        }
    }

    #[test]
    fn jackson_integral_of_finite_support() {
        let p = ps1();
        let g = Grid::new(-5, 5).unwrap();
        let f = GridFunction::delta(g, Branch::Minus, 2);
        let v = jackson_integral(&p, &f).unwrap();
        assert!((v.re - 0.5 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn jackson_integral_reports_tail() {
        let p = ps1();
        let g = Grid::new(-5, 5).unwrap();
        let f = GridFunction::from_fn(g, |_, _| C64::new(1.0, 0.0));
        assert!(matches!(jackson_integral(&p, &f), Err(Error::TailNotConverged(_))));
    }

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<C64> = xs.iter().map(|&x| c64(2.0 - x + 3.0 * x * x * x, x)).collect();
        assert!((neville_at_zero(&xs, &ys) - c64(2.0, 0.0)).norm() < 1e-13);
    }
}
