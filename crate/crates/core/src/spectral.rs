//! Spectral data of `L`: the discrete spectrum `Γ`, the weights `N(γ)` and
//! factors `b(γ)`, the densities `v₁`, `v₂`, `u₁`, `u₂` of the continuous
//! spectrum, the Green kernel and a truncated-matrix spectrum.

use crate::eigen::{big_phi_grid, big_phi_native, c_fn, d_fn, v_fn};
use crate::grid::{coefficients, jackson_integral, jackson_mass, k_z, weight_w, Branch, Grid, GridFunction, Params};
use crate::qcore::extended::{self as ext, Cdd, Scalar};
use crate::qcore::{psi22, qpoch_inf_prod, qpoch_n_prod, theta_prod};
use crate::{c64, Error, Result, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn one() -> C64 {
    c64(1.0, 0.0)
}

fn real(x: f64) -> C64 {
    c64(x, 0.0)
}

/// Imaginary parts below this (relative) count as real.
const REAL_TOL: f64 = 1e-12;

fn as_real(x: C64) -> Option<f64> {
    (x.im.abs() <= REAL_TOL * x.norm().max(1.0)).then_some(x.re)
}

// ---------------------------------------------------------------------------
// Discrete spectrum
// ---------------------------------------------------------------------------

/// The four families making up `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `γ = z₋z₊ q^k sqrt(abcd/q)`, `k ∈ ℤ`.
    Inf,
    /// `γ = 1/(s q^k)`, `k ≥ 0`.
    FinS,
    /// `γ = s q^{-1-k}`, `k ≥ 0`.
    FinQOverS,
    /// `γ = as/(dq) q^{-k}`; at most one point.
    FinDqOverAs,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Inf => "inf",
            Family::FinS => "fin_s",
            Family::FinQOverS => "fin_q_over_s",
            Family::FinDqOverAs => "fin_dq_over_as",
        }
    }

    pub fn from_label(s: &str) -> Option<Family> {
        [Family::Inf, Family::FinS, Family::FinQOverS, Family::FinDqOverAs].into_iter().find(|f| f.label() == s)
    }
}

/// A point of the discrete spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub family: Family,
    pub k: i64,
}

impl GammaPoint {
    pub fn value(&self) -> C64 {
        real(self.gamma)
    }

    /// The eigenvalue `μ(γ)`.
    pub fn mu(&self) -> f64 {
        self.gamma + 1.0 / self.gamma
    }
}

/// `sqrt(abcd/q)` on the branch `abs/q`, which is the one the family index
/// of `Γ^inf` refers to.
fn inf_base(p: &Params) -> C64 {
    p.a * p.b * p.s() / p.q
}

/// `γ = z₋z₊ q^k sqrt(abcd/q)`.
pub fn inf_gamma(p: &Params, k: i64) -> C64 {
    inf_base(p) * (p.z_minus * p.z_plus * p.q.powi(k as i32))
}

/// Points of the three finite families.
fn finite_points(p: &Params) -> Vec<GammaPoint> {
    let q = p.q;
    let s = p.s();
    let mut out = Vec::new();
    let fams = [
        (Family::FinS, s, true),
        (Family::FinQOverS, q / s, true),
        (Family::FinDqOverAs, p.d * q / (p.a * s), p.a.im == 0.0 && p.b.im == 0.0),
    ];
    for (fam, alpha, allowed) in fams {
        if !allowed {
            continue;
        }
        let Some(alpha) = as_real(alpha) else { continue };
        let mut k = 0;
        while alpha * q.powi(k) > 1.0 + 1e-14 {
            out.push(GammaPoint { gamma: 1.0 / (alpha * q.powi(k)), family: fam, k: k as i64 });
            k += 1;
        }
    }
    out
}

/// First index `k` with `|γ_k| < 1` in `Γ^inf`, if that family is real.
fn inf_start(p: &Params) -> Option<(f64, i64)> {
    let base = as_real(inf_base(p) * (p.z_minus * p.z_plus))?;
    if base >= 0.0 {
        return None;
    }
    // |base| q^k < 1  ⇔  k > ln|base| / ln(1/q)
    let mut k = (base.abs().ln() / -p.q.ln()).floor() as i64;
    while base.abs() * p.q.powi(k as i32) >= 1.0 {
        k += 1;
    }
    while base.abs() * p.q.powi((k - 1) as i32) < 1.0 {
        k -= 1;
    }
    Some((base, k))
}

fn sort_points(v: &mut [GammaPoint]) {
    v.sort_by(|x, y| y.gamma.abs().total_cmp(&x.gamma.abs()).then(x.gamma.total_cmp(&y.gamma)));
}

fn check_distinct(v: &[GammaPoint]) -> Result<()> {
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if (v[i].gamma - v[j].gamma).abs() <= 1e-10 * v[i].gamma.abs() {
                return Err(Error::NonGenericParameters(format!(
                    "poles {} ({}) and {} ({}) nearly coincide",
                    v[i].gamma,
                    v[i].family.label(),
                    v[j].gamma,
                    v[j].family.label()
                )));
            }
        }
    }
    Ok(())
}

/// Largest number of `Γ^inf` points ever produced.
const INF_CAP: i64 = 400;

/// All points of `Γ` whose weight is at least `min_weight`, in order of
/// decreasing `|γ|`. Points of the finite families are always included.
pub fn enumerate_gamma(p: &Params, min_weight: f64) -> Result<Vec<GammaPoint>> {
    p.require_generic()?;
    let mut out = finite_points(p);
    if let Some((base, k0)) = inf_start(p) {
        let mut prev = f64::INFINITY;
        for k in k0..k0 + INF_CAP {
            let g = GammaPoint { gamma: base * p.q.powi(k as i32), family: Family::Inf, k };
            let n = n_weight(p, &g)?;
            if n < min_weight && n < prev {
                break;
            }
            prev = n;
            if n >= min_weight {
                out.push(g);
            }
        }
    }
    sort_points(&mut out);
    check_distinct(&out)?;
    Ok(out)
}

/// All points of `Γ` with `|γ| ≥ floor`.
pub fn enumerate_gamma_floor(p: &Params, floor: f64) -> Result<Vec<GammaPoint>> {
    p.require_generic()?;
    let mut out: Vec<GammaPoint> = finite_points(p).into_iter().filter(|g| g.gamma.abs() >= floor).collect();
    if let Some((base, k0)) = inf_start(p) {
        let mut k = k0;
        while k < k0 + INF_CAP && (base * p.q.powi(k as i32)).abs() >= floor {
            out.push(GammaPoint { gamma: base * p.q.powi(k as i32), family: Family::Inf, k });
            k += 1;
        }
    }
    sort_points(&mut out);
    check_distinct(&out)?;
    Ok(out)
}

/// `Φ⁺_γ` at a point of `Γ`, built from the native solutions on each branch:
/// `Φ⁺_γ` on the plus branch and `b(γ) Φ⁻_γ` on the minus branch. Both are
/// recessive toward the origin, so no recurrence runs in an unstable
/// direction.
pub fn bound_state_grid(p: &Params, grid: Grid, g: &GammaPoint) -> Result<GridFunction> {
    let gamma = g.value();
    let b = b_factor(p, g)?;
    let mut f = GridFunction::zeros(grid);
    *f.branch_mut(Branch::Plus) = big_phi_native(p, grid, gamma, Branch::Plus)?;
    *f.branch_mut(Branch::Minus) = big_phi_native(p, grid, gamma, Branch::Minus)?.into_iter().map(|v| v * b).collect();
    if f.plus.iter().chain(&f.minus).any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("Φ⁺ at γ = {} on [{}, {}]", g.gamma, grid.k_min, grid.k_max)));
    }
    Ok(f)
}

/// Largest value of `N(γ) |Φ⁺_γ(x)|² w(x) (1-q)|x|` over the window, i.e.
/// the largest share of a unit point mass carried by the normalised
/// eigenfunction at `γ`.
pub fn window_mass(p: &Params, grid: Grid, g: &GammaPoint, f: &GridFunction) -> Result<f64> {
    let n = n_weight(p, g)?;
    let mut m = 0.0f64;
    for (br, k) in grid.points() {
        m = m.max(n * f.get(br, k).norm_sqr() * weight_w(p, br, k)?.re * jackson_mass(p, br, k));
    }
    Ok(m)
}

/// Points of `Γ` whose normalised eigenfunction carries a share of at least
/// `tol` of some point mass in the window, with their eigenfunctions.
/// Finite families are always included. Deep points of `Γ^inf` live close
/// to the origin, so the count grows with `k_max`.
pub fn gamma_for_window(p: &Params, grid: Grid, tol: f64) -> Result<Vec<(GammaPoint, GridFunction)>> {
    p.require_generic()?;
    let mut out = Vec::new();
    for g in finite_points(p) {
        let f = bound_state_grid(p, grid, &g)?;
        out.push((g, f));
    }
    if let Some((base, k0)) = inf_start(p) {
        let mut below = 0;
        let mut seen_mass = false;
        for k in k0..k0 + INF_CAP {
            let g = GammaPoint { gamma: base * p.q.powi(k as i32), family: Family::Inf, k };
            if n_weight(p, &g)? == 0.0 {
                return Err(Error::Overflow(format!("N underflows at Γ^inf index {k}; shrink k_max")));
            }
            let f = bound_state_grid(p, grid, &g)?;
            let m = window_mass(p, grid, &g, &f)?;
            if m >= tol {
                out.push((g, f));
                seen_mass = true;
                below = 0;
            } else if seen_mass {
                below += 1;
                if below == 3 {
                    break;
                }
            }
        }
    }
    out.sort_by(|x, y| y.0.gamma.abs().total_cmp(&x.0.gamma.abs()).then(x.0.gamma.total_cmp(&y.0.gamma)));
    let pts: Vec<GammaPoint> = out.iter().map(|x| x.0).collect();
    check_distinct(&pts)?;
    Ok(out)
}

/// Zeros of `v` inside the unit disc with `|γ| ≥ floor`, read off from the
/// factor structure. They include `Γ` and the complex zeros that cancel in
/// the Green kernel.
pub fn v_zeros(p: &Params, floor: f64) -> Vec<C64> {
    let q = p.q;
    let s = p.s();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let mut out = Vec::new();
    // (αγ; q)_∞ vanishes at γ = 1/(α q^j), j ≥ 0.
    for alpha in [c * q / (a * s), d * q / (a * s), c * q / (b * s), d * q / (b * s), s, q / s] {
        for j in 0..200 {
            let z = one() / (alpha * q.powi(j));
            if z.norm() >= 1.0 {
                break;
            }
            if z.norm() >= floor {
                out.push(z);
            }
        }
    }
    // θ(abs z₋z₊/(qγ)) vanishes at γ = abs z₋z₊ q^{j-1}.
    let base = a * b * s * (p.z_minus * p.z_plus) / q;
    for j in -200..200 {
        let z = base * q.powi(j);
        if z.norm() < 1.0 && z.norm() >= floor {
            out.push(z);
        }
    }
    out
}

/// `b(γ)` with `Φ⁺_γ = b(γ) Φ⁻_γ` for `γ ∈ Γ`.
pub fn b_factor(p: &Params, g: &GammaPoint) -> Result<C64> {
    let q = p.q;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (zm, zp) = (p.z_minus, p.z_plus);
    let k = g.k as i32;
    Ok(match g.family {
        Family::Inf => real((zp / zm).powi(k + 1)) * theta_prod(&[c * zm, d * zm], q)? / theta_prod(&[c * zp, d * zp], q)?,
        Family::FinS => real((zm / zp).powi(k)),
        Family::FinQOverS => {
            real((zm / zp).powi(k)) * theta_prod(&[a * zp, b * zp, c * zm, d * zm], q)? / theta_prod(&[a * zm, b * zm, c * zp, d * zp], q)?
        }
        Family::FinDqOverAs => theta_prod(&[b * zp, c * zm], q)? / theta_prod(&[b * zm, c * zp], q)?,
    })
}

/// `N(γ)` in closed form.
pub fn n_weight_complex(p: &Params, g: &GammaPoint) -> Result<C64> {
    let q = p.q;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (zm, zp) = (p.z_minus, p.z_plus);
    let zz = zm * zp;
    let k = g.k;
    let kk = k as f64;
    let base = real(zp * (1.0 - q));
    Ok(match g.family {
        Family::FinDqOverAs => {
            theta_prod(&[b * zm, c * zp, c * zp, d * zm, d * zp], q)? * qpoch_inf_prod(&[a * c / (b * d * q)], q)?
                / (base
                    * theta_prod(&[b * zp, b * d * zz, real(zm / zp)], q)?
                    * qpoch_inf_prod(&[real(q), a / b, a / d, c / b, c / d], q)?)
        }
        Family::FinS => {
            let head = theta_prod(&[c * zm, c * zp, d * zm, d * zp], q)? * qpoch_inf_prod(&[a * b / (c * d * q)], q)?
                / (base * theta_prod(&[real(zm / zp), c * d * zz], q)? * qpoch_inf_prod(&[real(q), a / c, a / d, b / c, b / d], q)?);
            let r = c * d / (a * b);
            let tail = qpoch_n_prod(&[r * q * q, r * q], q, 2 * k)?
                / qpoch_n_prod(&[real(q), c * q / a, c * q / b, d * q / a, d * q / b, r * q], q, k)?
                * (-a * b * zp * zp / q).powi(k as i32)
                * q.powf(1.5 * kk * (kk - 1.0));
            head * tail
        }
        Family::FinQOverS => {
            let head = theta_prod(&[a * zm, b * zm, c * zp, c * zp, d * zp, d * zp], q)? * qpoch_inf_prod(&[c * d / (a * b * q)], q)?
                / (base
                    * theta_prod(&[a * zp, b * zp, real(zm / zp), a * b * zz], q)?
                    * qpoch_inf_prod(&[real(q), c / a, c / b, d / a, d / b], q)?);
            let r = a * b / (c * d);
            let tail = qpoch_n_prod(&[r * q * q, r * q], q, 2 * k)?
                / qpoch_n_prod(&[real(q), a * q / c, a * q / d, b * q / c, b * q / d, r * q], q, k)?
                * (-c * d * zp * zp / (q * q)).powi(k as i32)
                * q.powf(-0.5 * kk * (kk - 1.0));
            head * tail
        }
        Family::Inf => {
            let big = a * b * c * d * zz * zz;
            let pairs = [a * b * zz, a * c * zz, a * d * zz, b * c * zz, b * d * zz, c * d * zz];
            let head = theta_prod(&[c * zp, d * zp], q)?.powi(2) * qpoch_inf_prod(&[big / q, big], q)?
                / (base * theta_prod(&[real(zm / zp)], q)? * qpoch_inf_prod(&[real(q), real(q)], q)? * qpoch_inf_prod(&pairs, q)?);
            let tail = qpoch_n_prod(&pairs, q, k)? / qpoch_n_prod(&[big / q, big], q, 2 * k)?
                * (zm / zp).powi((k + 1) as i32)
                * (-1.0f64).powi(k as i32 + 1)
                * q.powf(0.5 * kk * (kk + 1.0));
            head * tail
        }
    })
}

/// `N(γ)` as a positive real number.
pub fn n_weight(p: &Params, g: &GammaPoint) -> Result<f64> {
    let n = n_weight_complex(p, g)?;
    if !(n.re > 0.0) || n.im.abs() > 1e-8 * n.norm() {
        return Err(Error::NonConvergent(format!("weight at γ = {} is not positive: {n}", g.gamma)));
    }
    Ok(n.re)
}

/// Contour radius, relative to `|γ|`, of [`n_weight_residue`].
pub const RESIDUE_RADIUS: f64 = 1e-4;
/// Trapezoid nodes of [`n_weight_residue`].
pub const RESIDUE_NODES: usize = 64;

/// `b(γ)^{-1} Res_{λ=γ} (1/λ - λ)/(λ v(λ))` by the trapezoid rule on a
/// small circle.
pub fn n_weight_residue(p: &Params, g: &GammaPoint) -> Result<C64> {
    let gamma = g.value();
    let r = RESIDUE_RADIUS * g.gamma.abs();
    let mut sum = c64(0.0, 0.0);
    for j in 0..RESIDUE_NODES {
        let t = 2.0 * PI * (j as f64 + 0.5) / RESIDUE_NODES as f64;
        let h = C64::from_polar(r, t);
        let l = gamma + h;
        sum += (one() / l - l) / (l * v_fn(p, l)?) * h;
    }
    Ok(sum / RESIDUE_NODES as f64 / b_factor(p, g)?)
}

// ---------------------------------------------------------------------------
// Continuous spectrum densities
// ---------------------------------------------------------------------------

/// Parameters lifted to the scalar type `T`.
struct Lifted<T> {
    q: f64,
    a: T,
    b: T,
    c: T,
    d: T,
    s: T,
    zm: T,
    zp: T,
}

impl<T: Scalar> Lifted<T> {
    fn new(p: &Params) -> Self {
        let (a, b, c, d) = (T::from_c64(p.a), T::from_c64(p.b), T::from_c64(p.c), T::from_c64(p.d));
        let s = (c * d * T::from_f64(p.q) / (a * b)).sqrt();
        Lifted { q: p.q, a, b, c, d, s, zm: T::from_f64(p.z_minus), zp: T::from_f64(p.z_plus) }
    }

    fn one(&self) -> T {
        T::from_f64(1.0)
    }

    fn qp(&self, xs: &[T]) -> T {
        ext::qpoch_inf_prod(xs, self.q)
    }

    fn th(&self, xs: &[T]) -> T {
        ext::theta_prod(xs, self.q)
    }

    /// `(x γ, x/γ; q)_∞`.
    fn pm(&self, x: T, g: T) -> T {
        self.qp(&[x * g, x / g])
    }

    /// `θ(x γ, x/γ)`.
    fn theta_pm(&self, x: T, g: T) -> T {
        self.th(&[x * g, x / g])
    }

    fn v1(&self, g: T) -> T {
        let (q, s) = (T::from_f64(self.q), self.s);
        let (a, b, c, d, zm, zp) = (self.a, self.b, self.c, self.d, self.zm, self.zp);
        let zz = zm * zp;
        let lead = self.qp(&[c * q / a, d * q / a]).powi(2) * self.th(&[b * zp, b * zm])
            / (T::from_f64(1.0 - self.q) * zz * zz * a * b * self.th(&[zm / zp, zp / zm, a / b, b / a]));
        let gg = self.pm(self.one(), g * g)
            / (self.pm(s, g) * self.pm(c * q / (a * s), g) * self.pm(d * q / (a * s), g) * self.theta_pm(s, g) * self.theta_pm(a * b * s * zz, g));
        let bracket = self.th(&[a * zp, c * zp, d * zp, b * zm]) * self.theta_pm(a * s * zm, g) * zm
            - self.th(&[a * zm, c * zm, d * zm, b * zp]) * self.theta_pm(a * s * zp, g) * zp;
        lead * gg * bracket
    }

    fn v2(&self, g: T) -> T {
        let (q, s) = (T::from_f64(self.q), self.s);
        let (a, b, c, d, zm, zp) = (self.a, self.b, self.c, self.d, self.zm, self.zp);
        let zz = zm * zp;
        let lead = self.qp(&[c * q / a, d * q / a, c * q / b, d * q / b]) * self.th(&[a * zp, a * zm, b * zp, b * zm, c * d * zz])
            / (a * b * zm * zm * zp * T::from_f64(1.0 - self.q) * self.th(&[zp / zm, a / b, b / a]));
        let gg = self.pm(self.one(), g * g) / (self.pm(s, g) * self.theta_pm(s, g) * self.theta_pm(a * b * s * zz, g));
        lead * gg
    }

    /// `c_z(γ)`.
    fn c(&self, z: f64, g: T) -> T {
        let (q, s) = (T::from_f64(self.q), self.s);
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let z = T::from_f64(z);
        self.qp(&[s / g, c * q / (a * s * g), d * q / (a * s * g)]) * self.th(&[b * s * z * g])
            / (self.qp(&[c * q / a, d * q / a, self.one() / (g * g)]) * self.th(&[b * z]))
    }

    fn u1(&self, g: T) -> T {
        let (q, s) = (T::from_f64(self.q), self.s);
        let (a, b, c, d, zm, zp) = (self.a, self.b, self.c, self.d, self.zm, self.zp);
        let num = self.pm(s, g) * self.pm(c * q / (a * s), g) * self.pm(d * q / (a * s), g) * T::from_f64(1.0 - self.q);
        let den = self.qp(&[c * q / a, c * q / a, d * q / a, d * q / a])
            * self.pm(self.one(), g * g)
            * self.th(&[b * zp, b * zm, c * zp, c * zm, d * zp, d * zm]);
        let bracket = self.th(&[a * zp, b * zm, c * zm, d * zm]) * self.theta_pm(b * s * zp, g) * zp
            - self.th(&[a * zm, b * zp, c * zp, d * zp]) * self.theta_pm(b * s * zm, g) * zm;
        num / den * bracket
    }

    fn u2(&self, g: T) -> T {
        let (q, s) = (T::from_f64(self.q), self.s);
        let (a, b, c, d, zm, zp) = (self.a, self.b, self.c, self.d, self.zm, self.zp);
        let num = self.pm(s, g)
            * self.pm(c * q / (a * s), g)
            * self.pm(c * q / (b * s), g)
            * self.pm(d * q / (a * s), g)
            * self.pm(d * q / (b * s), g)
            * self.th(&[zm / zp, c * d * zm * zp])
            * zp
            * T::from_f64(1.0 - self.q);
        let den = self.qp(&[c * q / a, c * q / b, d * q / a, d * q / b])
            * self.pm(self.one(), g * g)
            * self.th(&[c * zm, c * zp, d * zp, d * zm]);
        num / den
    }
}

fn finite(x: C64, what: &str, gamma: C64) -> Result<C64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::DomainError(format!("{what} is singular at γ = {gamma}")))
    }
}

fn at_endpoint(gamma: C64) -> bool {
    (gamma * gamma - one()).norm() < 1e-14
}

/// `v₁(γ)` in closed form; zero at `γ = ±1`.
pub fn v1(p: &Params, gamma: C64) -> Result<C64> {
    if at_endpoint(gamma) {
        return Ok(c64(0.0, 0.0));
    }
    finite(Lifted::<C64>::new(p).v1(gamma), "v₁", gamma)
}

/// `v₁†(γ)`, i.e. `v₁` with `a` and `b` exchanged.
pub fn v1_dagger(p: &Params, gamma: C64) -> Result<C64> {
    v1(&p.dagger(), gamma)
}

/// `v₂(γ)` in closed form; zero at `γ = ±1`.
pub fn v2(p: &Params, gamma: C64) -> Result<C64> {
    if at_endpoint(gamma) {
        return Ok(c64(0.0, 0.0));
    }
    finite(Lifted::<C64>::new(p).v2(gamma), "v₂", gamma)
}

/// `(v₁, v₂, v₂', v₁†)` from the coefficients of
/// `Φ⁻_{1/γ}(x)Φ⁺_{1/γ}(y)/v(1/γ) - Φ⁻_γ(x)Φ⁺_γ(y)/v(γ)` in the basis
/// `φ_γ, φ†_γ`, scaled by `1/γ - γ`. `v₂'` is the coefficient of
/// `φ†(x)φ(y)`, equal to `v₂` by symmetry of the kernel.
///
/// With `v = D(Φ⁺, Φ⁻)` the kernel difference equals
/// `(1/γ - γ)^{-1} [v₁ φφ + v₂(φφ† + φ†φ) + v₁† φ†φ†]`.
pub fn v_from_connection(p: &Params, gamma: C64) -> Result<[C64; 4]> {
    let pd = p.dagger();
    let (zm, zp) = (p.z_minus, p.z_plus);
    let part = |g: C64| -> Result<[C64; 4]> {
        let v = v_fn(p, g)?;
        let (dm, dmd) = (d_fn(p, zm, g)?, d_fn(&pd, zm, g)?);
        let (dp, dpd) = (d_fn(p, zp, g)?, d_fn(&pd, zp, g)?);
        Ok([dm * dp / v, dm * dpd / v, dmd * dp / v, dmd * dpd / v])
    };
    let inv = part(one() / gamma)?;
    let dir = part(gamma)?;
    let f = one() / gamma - gamma;
    Ok([0, 1, 2, 3].map(|i| (inv[i] - dir[i]) * f))
}

/// `u₁(γ) = K_{z₊} c_{z₊}(γ) c_{z₊}(1/γ) - K_{z₋} c_{z₋}(γ) c_{z₋}(1/γ)`.
pub fn u1(p: &Params, gamma: C64) -> Result<C64> {
    let mut out = c64(0.0, 0.0);
    for (z, sign) in [(p.z_plus, 1.0), (p.z_minus, -1.0)] {
        out += k_z(p, z)? * c_fn(p, z, gamma)? * c_fn(p, z, one() / gamma)? * sign;
    }
    Ok(out)
}

/// `u₂(γ) = K_{z₊} c_{z₊}(γ) c†_{z₊}(1/γ) - K_{z₋} c_{z₋}(γ) c†_{z₋}(1/γ)`.
pub fn u2(p: &Params, gamma: C64) -> Result<C64> {
    let pd = p.dagger();
    let mut out = c64(0.0, 0.0);
    for (z, sign) in [(p.z_plus, 1.0), (p.z_minus, -1.0)] {
        out += k_z(p, z)? * c_fn(p, z, gamma)? * c_fn(&pd, z, one() / gamma)? * sign;
    }
    Ok(out)
}

/// `u₁†(γ)`.
pub fn u1_dagger(p: &Params, gamma: C64) -> Result<C64> {
    u1(&p.dagger(), gamma)
}

/// Reduced θ-form of `u₁`.
pub fn u1_closed(p: &Params, gamma: C64) -> Result<C64> {
    finite(Lifted::<C64>::new(p).u1(gamma), "u₁", gamma)
}

/// Reduced θ-form of `u₂`.
pub fn u2_closed(p: &Params, gamma: C64) -> Result<C64> {
    finite(Lifted::<C64>::new(p).u2(gamma), "u₂", gamma)
}

/// `max |u(γ) v(γ) - I|` with both factors and the product formed in
/// double-double arithmetic from the closed forms. `v` is close to singular
/// as `γ → -1`, so the binary64 product loses digits there.
pub fn uv_identity_residual(p: &Params, gamma: C64) -> Result<f64> {
    let lp = Lifted::<Cdd>::new(p);
    let ld = Lifted::<Cdd>::new(&p.dagger());
    let g = Cdd::from_c64(gamma);
    let (v1, v1d, v2) = (lp.v1(g), ld.v1(g), lp.v2(g));
    let (u1, u1d, u2) = (lp.u1(g), ld.u1(g), lp.u2(g));
    let u = [[u2, u1], [u1d, u2]];
    let v = [[v2, v1d], [v1, v2]];
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let e = u[i][0] * v[0][j] + u[i][1] * v[1][j] - Cdd::from_f64(if i == j { 1.0 } else { 0.0 });
            let r = e.to_c64().norm();
            if !r.is_finite() {
                return Err(Error::DomainError(format!("u·v is singular at γ = {gamma}")));
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// The circle density in the asymptotic bases.
///
/// On the branch `β` write `Ψ(x, γ) = C_β (Φ^β_γ(x), Φ^β_{1/γ}(x))` with
/// `C_β = [[c_β(γ), c_β(1/γ)], [c†_β(γ), c†_β(1/γ)]]`, and `C = [C₋ | C₊]`.
/// Near `γ = -1` the Hermitian density `H` is close to singular and
/// `Ψ^* H Ψ` loses up to 13 digits in binary64 for points far out on one
/// branch. `HC` and `C^* H C` formed in double-double arithmetic avoid this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticDensity {
    pub c: [[C64; 4]; 2],
    pub hc: [[C64; 4]; 2],
    pub w: [[C64; 4]; 4],
}

pub fn asymptotic_density(p: &Params, gamma: C64) -> Result<AsymptoticDensity> {
    let lp = Lifted::<Cdd>::new(p);
    let ld = Lifted::<Cdd>::new(&p.dagger());
    let g = Cdd::from_c64(gamma);
    let gi = Cdd::from_f64(1.0) / g;
    let (v1, v1d, v2) = (lp.v1(g), ld.v1(g), lp.v2(g));
    let mut h = [[v2, v1d], [v1, v2]];
    if !p.conjugate_pair() {
        h.swap(0, 1);
    }
    let zero = Cdd::default();
    let mut c = [[zero; 4]; 2];
    for (i, z) in [p.z_minus, p.z_plus].into_iter().enumerate() {
        c[0][2 * i] = lp.c(z, g);
        c[0][2 * i + 1] = lp.c(z, gi);
        c[1][2 * i] = ld.c(z, g);
        c[1][2 * i + 1] = ld.c(z, gi);
    }
    let hc: [[Cdd; 4]; 2] = std::array::from_fn(|r| std::array::from_fn(|j| h[r][0] * c[0][j] + h[r][1] * c[1][j]));
    let w: [[Cdd; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| c[0][i].conj() * hc[0][j] + c[1][i].conj() * hc[1][j]));
    let out = AsymptoticDensity {
        c: c.map(|r| r.map(|z| z.to_c64())),
        hc: hc.map(|r| r.map(|z| z.to_c64())),
        w: w.map(|r| r.map(|z| z.to_c64())),
    };
    let finite = out.c.iter().chain(&out.hc).chain(&out.w).flatten().all(|z| z.is_finite());
    if !finite {
        return Err(Error::DomainError(format!("asymptotic density is singular at γ = {gamma}")));
    }
    Ok(out)
}

/// A complex 2×2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    pub entries: [[C64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn new(e00: C64, e01: C64, e10: C64, e11: C64) -> Self {
        DensityMatrix2 { entries: [[e00, e01], [e10, e11]] }
    }

    pub fn mul(&self, o: &DensityMatrix2) -> DensityMatrix2 {
        let (x, y) = (&self.entries, &o.entries);
        let mut e = [[c64(0.0, 0.0); 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        DensityMatrix2 { entries: e }
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let e = &self.entries;
        [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
    }

    /// Rows exchanged.
    pub fn swap_rows(&self) -> DensityMatrix2 {
        let e = &self.entries;
        DensityMatrix2 { entries: [e[1], e[0]] }
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let e = &self.entries;
        (e[0][1] - e[1][0].conj()).norm().max(e[0][0].im.abs()).max(e[1][1].im.abs())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let e = &self.entries;
        let (p, r) = (e[0][0].re, e[1][1].re);
        let off = (e[0][1] + e[1][0].conj()) * 0.5;
        let mid = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + off.norm_sqr()).sqrt();
        [mid - rad, mid + rad]
    }

    pub fn max_abs_diff(&self, o: &DensityMatrix2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.entries[i][j] - o.entries[i][j]).norm());
            }
        }
        m
    }

    pub fn identity() -> DensityMatrix2 {
        DensityMatrix2::new(one(), c64(0.0, 0.0), c64(0.0, 0.0), one())
    }
}

/// `v(γ) = [[v₂, v₁†], [v₁, v₂]]`.
pub fn matrix_v(p: &Params, gamma: C64) -> Result<DensityMatrix2> {
    let b = v2(p, gamma)?;
    Ok(DensityMatrix2::new(b, v1_dagger(p, gamma)?, v1(p, gamma)?, b))
}

/// `u(γ) = [[u₂, u₁], [u₁†, u₂]]`.
pub fn matrix_u(p: &Params, gamma: C64) -> Result<DensityMatrix2> {
    let b = u2(p, gamma)?;
    Ok(DensityMatrix2::new(b, u1(p, gamma)?, u1_dagger(p, gamma)?, b))
}

/// The Hermitian matrix `H` with `g₂(γ)^T v(γ) g₁(γ) = g₂(γ)^* H g₁(γ)`: `v`
/// itself when `a = conj b`, `v` with rows exchanged otherwise.
pub fn hermitian_density(p: &Params, gamma: C64) -> Result<DensityMatrix2> {
    let v = matrix_v(p, gamma)?;
    Ok(if p.conjugate_pair() { v } else { v.swap_rows() })
}

// ---------------------------------------------------------------------------
// Green kernel
// ---------------------------------------------------------------------------

/// The root of `γ + 1/γ = λ` inside the unit disc.
pub fn gamma_of_lambda(lambda: C64) -> Result<C64> {
    let r = (lambda * lambda - 4.0).sqrt();
    let g1 = (lambda - r) * 0.5;
    let g2 = (lambda + r) * 0.5;
    let g = if g1.norm() <= g2.norm() { g1 } else { g2 };
    if g.norm() > 1.0 - 1e-13 {
        return Err(Error::SpectralValueOnCut(format!("λ = {lambda}")));
    }
    Ok(g)
}

/// Distance below which [`GreenKernel::new`] refuses `λ` near `μ(𝒱)`.
pub const V_ZERO_GUARD: f64 = 1e-6;

/// `K_λ(x, y)` on a window.
#[derive(Clone, Debug)]
pub struct GreenKernel {
    pub lambda: C64,
    pub gamma: C64,
    pub v: C64,
    pub minus: GridFunction,
    pub plus: GridFunction,
}

fn order_key(p: &Params, br: Branch, k: i64) -> f64 {
    p.point(br, k)
}

impl GreenKernel {
    pub fn new(p: &Params, grid: Grid, lambda: C64) -> Result<GreenKernel> {
        let gamma = gamma_of_lambda(lambda)?;
        for z in v_zeros(p, 1e-8) {
            if (lambda - Params::mu(z)).norm() < V_ZERO_GUARD * lambda.norm().max(1.0) {
                return Err(Error::GammaNotRegular(format!("λ = {lambda} is within {V_ZERO_GUARD:e} of μ({z})")));
            }
        }
        Ok(GreenKernel {
            lambda,
            gamma,
            v: v_fn(p, gamma)?,
            minus: big_phi_grid(p, grid, gamma, Branch::Minus)?,
            plus: big_phi_grid(p, grid, gamma, Branch::Plus)?,
        })
    }

    /// `K_λ(x, y)` with `x = z_{bx} q^{kx}`, `y = z_{by} q^{ky}`.
    pub fn at(&self, p: &Params, bx: Branch, kx: i64, by: Branch, ky: i64) -> C64 {
        let (lo, hi) = if order_key(p, bx, kx) <= order_key(p, by, ky) { ((bx, kx), (by, ky)) } else { ((by, ky), (bx, kx)) };
        self.minus.get(lo.0, lo.1) * self.plus.get(hi.0, hi.1) / self.v
    }

    /// `(R_λ f)(y) = ∫ f(x) K_λ(x, y) w(x) d_q x` on the kernel's window.
    pub fn apply(&self, p: &Params, f: &GridFunction) -> Result<GridFunction> {
        let mut src = Vec::new();
        for (br, k) in f.support() {
            src.push((br, k, f.get(br, k) * weight_w(p, br, k)? * jackson_mass(p, br, k)));
        }
        Ok(GridFunction::from_fn(self.minus.grid, |by, ky| src.iter().map(|&(bx, kx, m)| m * self.at(p, bx, kx, by, ky)).sum()))
    }

    /// `⟨R_λ f, g⟩` for finitely supported `f`, `g`.
    pub fn matrix_element(&self, p: &Params, f: &GridFunction, g: &GridFunction) -> Result<C64> {
        let mut out = c64(0.0, 0.0);
        for (bx, kx) in f.support() {
            let fx = f.get(bx, kx) * weight_w(p, bx, kx)? * jackson_mass(p, bx, kx);
            for (by, ky) in g.support() {
                let gy = g.get(by, ky).conj() * weight_w(p, by, ky)? * jackson_mass(p, by, ky);
                out += fx * gy * self.at(p, bx, kx, by, ky);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

/// A window on which the square-summable eigenfunctions of every point of `Γ`
/// with `|γ| ≥ floor` have tails below `tol` (relative, in `L²`).
///
/// `|Φ⁺_γ|² w |x|` decays like `γ^{2m}` at `x = z q^{-m}`; near the origin the
/// integrand decays like `|x|`.
pub fn suggested_window(p: &Params, floor: f64, tol: f64) -> Result<Grid> {
    let pts = enumerate_gamma_floor(p, floor)?;
    let g = pts.iter().map(|g| g.gamma.abs()).fold(0.0f64, f64::max);
    let outer = if g > 0.0 { (tol.ln() / (2.0 * g.ln())).ceil() as i64 } else { 0 };
    let inner = (tol.ln() / p.q.ln()).ceil() as i64;
    Grid::new(-(outer.max(40) + 4), inner.max(40))
}

// ---------------------------------------------------------------------------
// Truncated matrix spectrum
// ---------------------------------------------------------------------------

/// Symmetric tridiagonal model of `L` on a window.
///
/// The nodes are ordered `z₋q^{k_min}, …, z₋q^{k_max}, z₊q^{k_max}, …,
/// z₊q^{k_min}`. The symmetrisation uses the measure `m(x) = (1-q)|x|w(x)`,
/// for which the edge `x ~ qx` carries the conductance `B(x)m(x) = A(qx)m(qx)`.
/// The two innermost nodes are joined across the origin by the conductance
/// `u(0)/|z₊q^{k_max} - z₋q^{k_max}|`, `u(0) = (1-q)² s/(cd)`. Outside the
/// window the function is set to zero.
///
/// When every coefficient is nonnegative, `σ - T = BᵀB` with `B` lower
/// bidiagonal (one row per edge, including the two edges to the zero outside
/// the window), and the eigenvalues are computed as `σ - s²` from the
/// singular values `s` of `B`. Bisection on the zero-diagonal Golub-Kahan
/// matrix gives these to high relative accuracy, so the large negative
/// eigenvalues coming from nodes near the origin do not swamp the others.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    sigma: f64,
    /// Off-diagonal of the Golub-Kahan matrix of `B`, if it exists.
    gk: Option<Vec<f64>>,
}

impl TruncatedOperator {
    pub fn new(p: &Params, grid: Grid) -> Result<TruncatedOperator> {
        let s = p.s();
        let sigma = (s + one() / s).re;
        let ks: Vec<i64> = grid.ks().collect();
        let n = ks.len();
        let mut diag = Vec::with_capacity(2 * n);
        let mut off = Vec::with_capacity(2 * n);
        let mut mass = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for (bi, br) in Branch::BOTH.into_iter().enumerate() {
            for &k in &ks {
                let m = (weight_w(p, br, k)? * jackson_mass(p, br, k)).re;
                if !(m > 0.0) || !m.is_finite() {
                    return Err(Error::Overflow(format!("measure at z{}q^{k} is {m} (not representable)", br.symbol())));
                }
                mass[bi].push(m);
            }
        }
        let kmax = grid.k_max;
        let x_in = p.point(Branch::Plus, kmax) - p.point(Branch::Minus, kmax);
        let u0 = ((1.0 - p.q).powi(2) * s / (p.c * p.d)).re;
        let bridge = u0 / x_in.abs();
        let bridge_off = bridge / (mass[0][n - 1] * mass[1][n - 1]).sqrt();
        // Per node: (outer coefficient A, inner coefficient B or the bridge).
        let sides = |bi: usize, br: Branch| -> Vec<(f64, f64)> {
            ks.iter()
                .enumerate()
                .map(|(i, &k)| {
                    let (a_, b_, _) = coefficients(p, p.point(br, k));
                    (a_.re, if i + 1 == n { bridge / mass[bi][i] } else { b_.re })
                })
                .collect()
        };
        let branch_part = |bi: usize, br: Branch| -> (Vec<f64>, Vec<f64>) {
            let mut d = Vec::with_capacity(n);
            let mut o = Vec::with_capacity(n);
            for (i, &(a_, inner)) in sides(bi, br).iter().enumerate() {
                d.push(sigma - a_ - inner);
                if i + 1 < n {
                    let (a1, _, _) = coefficients(p, p.point(br, ks[i + 1]));
                    o.push((a1.re * inner).sqrt());
                }
            }
            (d, o)
        };
        let (dm, om) = branch_part(0, Branch::Minus);
        let (dp, op) = branch_part(1, Branch::Plus);
        diag.extend(dm);
        off.extend(om);
        off.push(bridge_off);
        diag.extend(dp.into_iter().rev());
        off.extend(op.into_iter().rev());
        // Along the node order the left neighbour of a minus node is outer,
        // of a plus node inner.
        let mut lr: Vec<(f64, f64)> = sides(0, Branch::Minus);
        lr.extend(sides(1, Branch::Plus).into_iter().rev().map(|(a_, inner)| (inner, a_)));
        let gk = lr.iter().all(|&(l, r)| l >= 0.0 && r >= 0.0).then(|| lr.iter().flat_map(|&(l, r)| [l.sqrt(), r.sqrt()]).collect());
        Ok(TruncatedOperator { diag, off, sigma, gk })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / d };
            if d == 0.0 {
                d = -f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `i`-th eigenvalue (ascending) by bisection.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        match &self.gk {
            Some(gk) => self.sigma - singular_value(gk, i).powi(2),
            None => self.eigenvalue_sturm(i),
        }
    }

    fn eigenvalue_sturm(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| self.eigenvalue(i)).collect()
    }
}

/// Number of eigenvalues above `t > 0` of the symmetric tridiagonal matrix
/// with zero diagonal and off-diagonal `gk`.
fn count_above_gk(gk: &[f64], t: f64) -> usize {
    let mut below = 0;
    let mut d = -t;
    if d < 0.0 {
        below += 1;
    }
    for &g in gk {
        d = -t - g * g / d;
        if d == 0.0 {
            d = -f64::MIN_POSITIVE.sqrt() * t;
        }
        if d < 0.0 {
            below += 1;
        }
    }
    gk.len() + 1 - below
}

/// The `i`-th largest singular value of the bidiagonal whose Golub-Kahan
/// off-diagonal is `gk`.
fn singular_value(gk: &[f64], i: usize) -> f64 {
    let mut hi = 2.0 * gk.iter().fold(0.0f64, |m, &g| m.max(g));
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        if count_above_gk(gk, mid) > i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Summation formula
// ---------------------------------------------------------------------------

/// `(1-q)^{-1} ∫_{R_q} w(x) d_q x` as a Jackson sum over `grid`.
pub fn total_mass(p: &Params, grid: Grid) -> Result<C64> {
    let mut w = GridFunction::zeros(grid);
    for (br, k) in grid.points() {
        w.set(br, k, weight_w(p, br, k)?);
    }
    Ok(jackson_integral(p, &w)? / (1.0 - p.q))
}

/// `Σ_± ±z_± (az_±, bz_±)_∞/(cz_±, dz_±)_∞ ₂ψ₂(cz_±, dz_±; az_±, bz_±; q, q)`.
pub fn total_mass_psi(p: &Params) -> Result<C64> {
    let q = p.q;
    let mut out = c64(0.0, 0.0);
    for (z, sign) in [(p.z_plus, 1.0), (p.z_minus, -1.0)] {
        let (a, b, c, d) = (p.a * z, p.b * z, p.c * z, p.d * z);
        let pre = qpoch_inf_prod(&[a, b], q)? / qpoch_inf_prod(&[c, d], q)?;
        out += pre * psi22([c, d], [a, b], q, real(q))? * (sign * z);
    }
    Ok(out)
}

/// `z₊ (q, a/c, a/d, b/c, b/d)_∞ θ(z₋/z₊, cd z₋z₊) / ((ab/(cdq))_∞ θ(cz₋, dz₋, cz₊, dz₊))`.
pub fn total_mass_closed(p: &Params) -> Result<C64> {
    let q = p.q;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (zm, zp) = (p.z_minus, p.z_plus);
    Ok(qpoch_inf_prod(&[real(q), a / c, a / d, b / c, b / d], q)? * theta_prod(&[real(zm / zp), c * d * zm * zp], q)? * zp
        / (qpoch_inf_prod(&[a * b / (c * d * q)], q)? * theta_prod(&[c * zm, d * zm, c * zp, d * zp], q)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(n: &str) -> Params {
        Params::preset(n).unwrap()
    }

    #[test]
    fn families_of_reference_sets() {
        let fam = |n: &str| {
            let mut v: Vec<(Family, i64)> = enumerate_gamma(&preset(n), 1e-14).unwrap().iter().map(|g| (g.family, g.k)).collect();
            v.sort();
            v
        };
        let f1 = fam("ps1");
        assert!(f1.iter().all(|(f, _)| *f == Family::Inf));
        let f2 = fam("ps2");
        assert!(f2.contains(&(Family::FinDqOverAs, 0)));
        assert!(!f2.iter().any(|(f, _)| *f == Family::FinS));
        assert!(fam("ps3").contains(&(Family::FinS, 0)));
        let f4 = fam("ps4");
        assert!(f4.contains(&(Family::FinQOverS, 0)) && f4.contains(&(Family::FinQOverS, 1)));
    }

    #[test]
    fn inf_family_matches_brute_force_scan() {
        for n in Params::PRESETS {
            let p = preset(n);
            let pts = enumerate_gamma_floor(&p, 1e-9).unwrap();
            let mut count = 0;
            for k in -50..=50 {
                let g = inf_gamma(&p, k);
                if g.re < 0.0 && g.norm() < 1.0 && g.norm() >= 1e-9 {
                    count += 1;
                }
            }
            assert_eq!(pts.iter().filter(|g| g.family == Family::Inf).count(), count, "{n}");
        }
    }

    #[test]
    fn weights_match_contour_residue() {
        for n in Params::PRESETS {
            let p = preset(n);
            for g in enumerate_gamma(&p, 1e-14).unwrap() {
                let closed = n_weight_complex(&p, &g).unwrap();
                let res = n_weight_residue(&p, &g).unwrap();
                let rel = (closed - res).norm() / res.norm();
                assert!(rel < 1e-6, "{n} {:?} k={} closed={closed} residue={res}", g.family, g.k);
            }
        }
    }

    #[test]
    fn v_densities_match_connection_route() {
        for n in ["ps1", "ps2"] {
            let p = preset(n);
            for t in [0.3, 1.1, 2.0, 2.9] {
                let g = C64::from_polar(1.0, t);
                let [w1, w2, w2b, w1d] = v_from_connection(&p, g).unwrap();
                let (c1, c2, c1d) = (v1(&p, g).unwrap(), v2(&p, g).unwrap(), v1_dagger(&p, g).unwrap());
                let sc = c1.norm() + c2.norm() + c1d.norm();
                assert!((w1 - c1).norm() < 1e-9 * sc, "{n} v1 {w1} {c1}");
                assert!((w2 - c2).norm() < 1e-9 * sc, "{n} v2 {w2} {c2}");
                assert!((w2b - c2).norm() < 1e-9 * sc, "{n} v2' {w2b} {c2}");
                assert!((w1d - c1d).norm() < 1e-9 * sc, "{n} v1† {w1d} {c1d}");
            }
        }
    }

    #[test]
    fn u_closed_forms_and_inverse() {
        for n in ["ps1", "ps2"] {
            let p = preset(n);
            for t in [0.2, 0.9, 1.7, 2.6] {
                let g = C64::from_polar(1.0, t);
                let (a, b) = (u1(&p, g).unwrap(), u1_closed(&p, g).unwrap());
                assert!((a - b).norm() < 1e-10 * a.norm(), "{n} u1 {a} {b}");
                let (a, b) = (u2(&p, g).unwrap(), u2_closed(&p, g).unwrap());
                assert!((a - b).norm() < 1e-10 * a.norm(), "{n} u2 {a} {b}");
                assert!(a.im.abs() < 1e-10 * a.norm());
                if t < 1.0 {
                    let prod = matrix_u(&p, g).unwrap().mul(&matrix_v(&p, g).unwrap());
                    assert!(prod.max_abs_diff(&DensityMatrix2::identity()) < 1e-8, "{n} {:?}", prod);
                }
            }
            for t in [0.05, 1.3, 2.6, 3.0, 3.1] {
                let r = uv_identity_residual(&p, C64::from_polar(1.0, t)).unwrap();
                assert!(r < 1e-10, "{n} t={t} residual {r}");
            }
        }
    }

    #[test]
    fn density_is_positive_definite() {
        for n in ["ps1", "ps2"] {
            let p = preset(n);
            for j in 1..20 {
                let g = C64::from_polar(1.0, PI * j as f64 / 20.0);
                let h = hermitian_density(&p, g).unwrap();
                let scale = h.entries[0][0].norm() + h.entries[0][1].norm();
                assert!(h.hermitian_defect() < 1e-10 * scale, "{n} {:?}", h);
                assert!(h.hermitian_eigenvalues()[0] > 0.0, "{n} {:?}", h);
            }
        }
    }

    #[test]
    fn endpoints_vanish() {
        let p = preset("ps1");
        assert_eq!(v1(&p, one()).unwrap(), c64(0.0, 0.0));
        assert_eq!(v2(&p, -one()).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn gamma_lambda_root() {
        for l in [c64(0.3, 0.1), c64(-5.0, 0.0), c64(1.9, -1e-3), c64(3.0, 2.0)] {
            let g = gamma_of_lambda(l).unwrap();
            assert!(g.norm() < 1.0);
            assert!((Params::mu(g) - l).norm() < 1e-13 * l.norm().max(1.0));
        }
        assert!(matches!(gamma_of_lambda(c64(1.0, 0.0)), Err(Error::SpectralValueOnCut(_))));
    }

    #[test]
    fn resolvent_inverts_l_minus_lambda() {
        let p = preset("ps1");
        let grid = Grid::new(-40, 40).unwrap();
        let lambda = c64(0.7, 0.4);
        let gk = GreenKernel::new(&p, grid, lambda).unwrap();
        for (br, k) in [(Branch::Plus, 0), (Branch::Minus, 3), (Branch::Plus, -5)] {
            let f = GridFunction::delta(grid, br, k);
            let r = gk.apply(&p, &f).unwrap();
            let lr = crate::grid::apply_l(&p, &r);
            for (by, ky) in [(br, k), (br, k + 1), (br.other(), 2), (br, k - 3)] {
                let got = lr.get(by, ky) - lambda * r.get(by, ky);
                let want = f.get(by, ky);
                assert!((got - want).norm() < 1e-9, "{by:?}{ky}: {got} vs {want}");
            }
            assert!((gk.at(&p, br, k, Branch::Minus, 1) - gk.at(&p, Branch::Minus, 1, br, k)).norm() == 0.0);
        }
    }

    #[test]
    fn summation_formula_three_ways() {
        let p = preset("ps3");
        let lhs = total_mass(&p, Grid::new(-120, 80).unwrap()).unwrap();
        let psi = total_mass_psi(&p).unwrap();
        let closed = total_mass_closed(&p).unwrap();
        assert!((lhs - closed).norm() < 1e-10 * closed.norm(), "{lhs} {closed}");
        assert!((psi - closed).norm() < 1e-10 * closed.norm(), "{psi} {closed}");
    }

    #[test]
    fn truncated_spectrum_sturm_count_is_consistent() {
        let p = preset("ps1");
        let op = TruncatedOperator::new(&p, Grid::new(-30, 20).unwrap()).unwrap();
        let ev = op.eigenvalues();
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(op.count_below(ev[10] + 1e-9 * ev[10].abs().max(1.0)), 11);
    }
}
