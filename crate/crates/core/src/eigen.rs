//! Eigenfunctions of `L` for the eigenvalue `μ = γ + 1/γ`.
//!
//! - `φ_γ` is the solution analytic at the origin, given near `0` by a
//!   `₃φ₂` in `bx`; `φ†_γ` is the same function with `a` and `b` exchanged.
//! - `Φ^±_γ` is the solution on the branch `z_±` behaving like `(sγ)^k` at
//!   `x = z_± q^{-k}`, `k → ∞`, given there by a `₃φ₂` in `q/(bx)`. It is
//!   extended to the other branch through the origin.
//!
//! On a window, `φ` is summed where its series converges quickly and
//! continued outward with the three-term recurrence. `Φ^±` is summed on its
//! own branch far from the origin and continued inward. The crossing to the
//! opposite branch uses the expansion `Φ^± = d φ + d† φ†` near the origin and
//! the asymptotic basis `Φ^∓_γ, Φ^∓_{1/γ}` further out.

use crate::grid::{coefficients, k_z, Branch, Grid, GridFunction, Params};
use crate::qcore::{phi_rs, phi_rs_cond, qpoch_inf_prod, theta_prod};
use crate::{c64, Error, Result, C64};

fn one() -> C64 {
    c64(1.0, 0.0)
}

/// Ratio bound used to decide where a series is summed directly.
fn series_ratio(p: &Params) -> f64 {
    p.q.sqrt()
}

/// `φ_γ(x) = ₃φ₂(q/(ax), sγ, s/γ; cq/a, dq/a; q, bx)`, `|bx| < 1`.
pub fn phi_series(p: &Params, gamma: C64, x: f64) -> Result<C64> {
    if x == 0.0 {
        return phi_origin(p, gamma);
    }
    let s = p.s();
    let q = p.q;
    phi_rs(&[q / (p.a * x), s * gamma, s / gamma], &[p.c * q / p.a, p.d * q / p.a], q, p.b * x)
}

/// `φ_γ(0) = ₂φ₂(sγ, s/γ; cq/a, dq/a; q, bq/a)`.
pub fn phi_origin(p: &Params, gamma: C64) -> Result<C64> {
    let s = p.s();
    let q = p.q;
    phi_rs(&[s * gamma, s / gamma], &[p.c * q / p.a, p.d * q / p.a], q, p.b * q / p.a)
}

/// Factor relating `D_q φ_γ` to `φ_γ` with shifted parameters:
/// `b(1-sγ)(1-s/γ) / ((1-q)(1-cq/a)(1-dq/a))`.
fn dq_prefactor(p: &Params, gamma: C64) -> C64 {
    let s = p.s();
    let q = p.q;
    p.b * (one() - s * gamma) * (one() - s / gamma) / ((1.0 - q) * (one() - p.c * q / p.a) * (one() - p.d * q / p.a))
}

/// Parameters `(aq^{-1/2}, bq^{-1/2}, cq^{1/2}, dq^{1/2})`; `s` becomes `sq`.
fn shifted(p: &Params) -> Params {
    let h = p.q.sqrt();
    Params { a: p.a / h, b: p.b / h, c: p.c * h, d: p.d * h, ..*p }
}

/// `D_q φ_γ(x)`, evaluated through the shifted-parameter series.
pub fn phi_dq_series(p: &Params, gamma: C64, x: f64) -> Result<C64> {
    Ok(dq_prefactor(p, gamma) * phi_series(&shifted(p), gamma, x * p.q.sqrt())?)
}

/// `D_q φ_γ(0)`.
pub fn phi_dq_origin(p: &Params, gamma: C64) -> Result<C64> {
    Ok(dq_prefactor(p, gamma) * phi_origin(&shifted(p), gamma)?)
}

/// `Φ_γ` at `x = z q^k`, `m = -k`, through the `b`-form
/// `(sγ)^m (q/(bx), q²γ/(asx); q)_∞ / (q/(cx), q/(dx); q)_∞
///  · ₃φ₂(qγ/s, cqγ/(sa), dqγ/(sa); q²γ/(asx), qγ²; q, q/(bx))`.
///
/// Calling it with `p.dagger()` gives the equivalent `a`-form.
pub fn big_phi_series(p: &Params, gamma: C64, br: Branch, k: i64) -> Result<C64> {
    big_phi_series_cond(p, gamma, br, k).map(|(v, _)| v)
}

/// [`big_phi_series`] with the cancellation ratio of the series.
fn big_phi_series_cond(p: &Params, gamma: C64, br: Branch, k: i64) -> Result<(C64, f64)> {
    let q = p.q;
    let s = p.s();
    let x = p.point(br, k);
    let lead = (s * gamma).powi(-k as i32);
    if lead == c64(0.0, 0.0) {
        return Ok((lead, 1.0));
    }
    let t = q * q * gamma / (p.a * s * x);
    let pref = qpoch_inf_prod(&[c64(q, 0.0) / (p.b * x), t], q)? / qpoch_inf_prod(&[c64(q, 0.0) / (p.c * x), c64(q, 0.0) / (p.d * x)], q)?;
    let (ser, cond) = phi_rs_cond(
        &[q * gamma / s, p.c * q * gamma / (s * p.a), p.d * q * gamma / (s * p.a)],
        &[t, q * gamma * gamma],
        q,
        c64(q, 0.0) / (p.b * x),
    )?;
    Ok((lead * pref * ser, cond))
}

/// `Φ_γ` at `z q^k` using whichever of the two equivalent series converges
/// faster.
pub fn big_phi_point(p: &Params, gamma: C64, br: Branch, k: i64) -> Result<C64> {
    big_phi_point_cond(p, gamma, br, k).map(|(v, _)| v)
}

fn big_phi_point_cond(p: &Params, gamma: C64, br: Branch, k: i64) -> Result<(C64, f64)> {
    if p.a.norm() > p.b.norm() {
        big_phi_series_cond(&p.dagger(), gamma, br, k)
    } else {
        big_phi_series_cond(p, gamma, br, k)
    }
}

/// Largest cancellation ratio of a `Φ` series accepted in an expansion
/// during outward continuation; beyond it the recurrence is used.
const EXPANSION_SERIES_COND: f64 = 1e3;

/// `coef · Φ^{br}_γ(z q^k)`, or `None` if the series is too cancelling.
fn expansion_term(p: &Params, coef: C64, gamma: C64, br: Branch, k: i64) -> Result<Option<C64>> {
    if coef == c64(0.0, 0.0) {
        return Ok(Some(coef));
    }
    let (v, cond) = big_phi_point_cond(p, gamma, br, k)?;
    Ok((cond <= EXPANSION_SERIES_COND).then(|| coef * v))
}

// ---------------------------------------------------------------------------
// Connection coefficients
// ---------------------------------------------------------------------------

/// `c_z(γ) = (s/γ, cq/(asγ), dq/(asγ); q)_∞ θ(bszγ) / ((cq/a, dq/a, 1/γ²; q)_∞ θ(bz))`,
/// so that `φ_γ = c_z(γ) Φ_γ + c_z(1/γ) Φ_{1/γ}` on the branch of `z`.
pub fn c_fn(p: &Params, z: f64, gamma: C64) -> Result<C64> {
    let q = p.q;
    let s = p.s();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let num = qpoch_inf_prod(&[s / gamma, c * q / (a * s * gamma), d * q / (a * s * gamma)], q)? * theta_prod(&[b * s * z * gamma], q)?;
    let den = qpoch_inf_prod(&[c * q / a, d * q / a, one() / (gamma * gamma)], q)? * theta_prod(&[b * z], q)?;
    Ok(num / den)
}

/// `d_z(γ)` of `Φ^±_γ = d_{z±}(γ) φ_γ + d†_{z±}(γ) φ†_γ`:
/// `(cq/a, dq/a; q)_∞ θ(bz) / θ(a/b, cz, dz) · (cqγ/(sb), dqγ/(sb); q)_∞ θ(asz/(qγ)) / (qγ², s/γ; q)_∞`.
pub fn d_fn(p: &Params, z: f64, gamma: C64) -> Result<C64> {
    Ok(d_hat(p, z, gamma)? / qpoch_inf_prod(&[p.s() / gamma], p.q)?)
}

/// `(s/γ; q)_∞ d_z(γ)`, regular on `γ ∈ s q^ℕ`.
pub fn d_hat(p: &Params, z: f64, gamma: C64) -> Result<C64> {
    let q = p.q;
    let s = p.s();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let left = qpoch_inf_prod(&[c * q / a, d * q / a], q)? * theta_prod(&[b * z], q)? / theta_prod(&[a / b, c * z, d * z], q)?;
    let right = qpoch_inf_prod(&[c * q * gamma / (s * b), d * q * gamma / (s * b)], q)? * theta_prod(&[a * s * z / (q * gamma)], q)?
        / qpoch_inf_prod(&[q * gamma * gamma], q)?;
    Ok(left * right)
}

/// `v(γ) = D(Φ⁺_γ, Φ⁻_γ)` in closed form.
pub fn v_fn(p: &Params, gamma: C64) -> Result<C64> {
    let q = p.q;
    let s = p.s();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (zm, zp) = (p.z_minus, p.z_plus);
    let lead = -zp * (1.0 - q) * theta_prod(&[c64(zm / zp, 0.0)], q)? / theta_prod(&[c * zm, d * zm, c * zp, d * zp], q)?;
    let g = gamma;
    let num = qpoch_inf_prod(&[c * q * g / (a * s), d * q * g / (a * s), c * q * g / (b * s), d * q * g / (b * s), s * g, q * g / s], q)?
        * theta_prod(&[a * b * s * zm * zp / (q * g)], q)?;
    let den = g * qpoch_inf_prod(&[q * g * g], q)?.powi(2);
    Ok(lead * num / den)
}

/// `D(φ_γ, φ†_γ) = (1-q)q/(as) (sγ, s/γ; q)_∞ θ(a/b) / (cq/a, cq/b, dq/a, dq/b; q)_∞`.
pub fn casorati_phi(p: &Params, gamma: C64) -> Result<C64> {
    let q = p.q;
    let s = p.s();
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    Ok((1.0 - q) * q / (a * s) * qpoch_inf_prod(&[s * gamma, s / gamma], q)? * theta_prod(&[a / b], q)?
        / qpoch_inf_prod(&[c * q / a, c * q / b, d * q / a, d * q / b], q)?)
}

/// `D(Φ^±_γ, Φ^±_{1/γ}) = (γ - 1/γ) K_{z±}`.
pub fn casorati_big_phi(p: &Params, gamma: C64, br: Branch) -> Result<C64> {
    Ok((gamma - one() / gamma) * k_z(p, p.z(br))?)
}

/// Coefficients `(α, β)` with `Φ^{br}_γ = α Φ^{br'}_γ + β Φ^{br'}_{1/γ}` on the
/// opposite branch `br'`.
///
/// `β` is taken from `v(γ)` so that it vanishes exactly where `v` does.
pub fn crossing_coefficients(p: &Params, gamma: C64, br: Branch) -> Result<(C64, C64)> {
    let z = p.z(br);
    let zo = p.z(br.other());
    let pd = p.dagger();
    let alpha = d_fn(p, z, gamma)? * c_fn(p, zo, gamma)? + d_fn(&pd, z, gamma)? * c_fn(&pd, zo, gamma)?;
    let v = v_fn(p, gamma)?;
    let beta = if v == c64(0.0, 0.0) {
        v
    } else {
        let kz = k_z(p, zo)?;
        match br {
            Branch::Plus => v / ((one() / gamma - gamma) * kz),
            Branch::Minus => v / ((gamma - one() / gamma) * kz),
        }
    };
    Ok((alpha, beta))
}

/// Index `k` of the first point `z q^k` with `|z q^k| ≤ r`.
fn first_index_below(z: f64, r: f64, q: f64) -> i64 {
    ((r / z.abs()).ln() / q.ln()).ceil() as i64
}

/// Index `k` of the last point `z q^k` with `|z q^k| ≥ r`.
fn last_index_above(z: f64, r: f64, q: f64) -> i64 {
    ((r / z.abs()).ln() / q.ln()).floor() as i64
}

/// Radius separating the origin region (series of `φ`, `φ†`) from the outer
/// region (series of `Φ`).
pub fn crossover_radius(p: &Params) -> f64 {
    series_ratio(p) / p.a.norm().max(p.b.norm())
}

// ---------------------------------------------------------------------------
// Grid construction
// ---------------------------------------------------------------------------

/// Inward recurrence `f(qx) = f(x) + ((μ - s - 1/s) f(x) + A(x)(f(x) - f(x/q))) / B(x)`.
fn recur_inward(p: &Params, br: Branch, mu: C64, vals: &mut [C64], lo: i64, from: i64, hi: i64) {
    let s = p.s();
    let sigma = s + one() / s;
    let mut k = from;
    while k < hi {
        let i = (k - lo) as usize;
        let (a_, b_, _) = coefficients(p, p.point(br, k));
        let fk = vals[i];
        vals[i + 1] = fk + ((mu - sigma) * fk + a_ * (fk - vals[i - 1])) / b_;
        k += 1;
    }
}

/// `φ_γ` on one branch by series and outward recurrence only.
fn phi_branch_recurrence(p: &Params, grid: Grid, gamma: C64, br: Branch) -> Result<Vec<C64>> {
    let z = p.z(br);
    let ks = first_index_below(z, series_ratio(p) / p.b.norm(), p.q);
    let lo = grid.k_min;
    let hi = grid.k_max.max(ks + 1);
    let mut vals = vec![c64(0.0, 0.0); (hi - lo + 1) as usize];
    for k in ks.max(lo)..=hi {
        vals[(k - lo) as usize] = phi_series(p, gamma, p.point(br, k))?;
    }
    if ks > lo {
        continue_outward(p, br, Params::mu(gamma), &mut vals, lo, ks, |_| Ok(None))?;
    }
    vals.truncate(grid.len());
    Ok(vals)
}

/// `φ_γ` on a window by series near the origin and outward recurrence, with
/// no monitoring.
pub fn phi_grid_recurrence(p: &Params, grid: Grid, gamma: C64) -> Result<GridFunction> {
    let mut f = GridFunction::zeros(grid);
    for br in Branch::BOTH {
        *f.branch_mut(br) = phi_branch_recurrence(p, grid, gamma, br)?;
    }
    Ok(f)
}

/// `c_z(γ) Φ_γ + c_z(1/γ) Φ_{1/γ}` at `z q^k`, skipping a vanishing term.
pub fn phi_c_expansion(p: &Params, gamma: C64, br: Branch, k: i64) -> Result<C64> {
    let z = p.z(br);
    let c1 = c_fn(p, z, gamma)?;
    let c2 = c_fn(p, z, one() / gamma)?;
    let mut v = c64(0.0, 0.0);
    if c1 != v {
        v += c1 * big_phi_point(p, gamma, br, k)?;
    }
    if c2 != c64(0.0, 0.0) {
        v += c2 * big_phi_point(p, one() / gamma, br, k)?;
    }
    Ok(v)
}

/// An expansion term pair is used in place of the recurrence when the
/// cancellation between its two terms is at most this factor.
pub const EXPANSION_KAPPA: f64 = 8.0;

/// One outward step of the three-term recurrence at index `k`, from the
/// values at `k + 1` and `k + 2`.
fn outward_step(p: &Params, br: Branch, mu: C64, f1: C64, f2: C64, k: i64) -> C64 {
    let s = p.s();
    let sigma = s + one() / s;
    let (a_, b_, _) = coefficients(p, p.point(br, k + 1));
    f1 + ((mu - sigma) * f1 - b_ * (f2 - f1)) / a_
}

/// Continues `vals` outward from index `from` (values at `from` and
/// `from + 1` given) down to `lo`. At each point the two-term expansion
/// returned by `expansion` is used if its cancellation factor is at most
/// [`EXPANSION_KAPPA`], and the recurrence otherwise.
fn continue_outward(
    p: &Params,
    br: Branch,
    mu: C64,
    vals: &mut [C64],
    lo: i64,
    from: i64,
    mut expansion: impl FnMut(i64) -> Result<Option<(C64, C64)>>,
) -> Result<()> {
    let mut k = from - 1;
    while k >= lo {
        let i = (k - lo) as usize;
        let r = outward_step(p, br, mu, vals[i + 1], vals[i + 2], k);
        vals[i] = match expansion(k)? {
            Some((t1, t2)) if t1.norm() + t2.norm() <= EXPANSION_KAPPA * (t1 + t2).norm() => t1 + t2,
            _ => r,
        };
        k -= 1;
    }
    Ok(())
}

/// Below this ratio of the dominant to the recessive part of `φ_γ` at the
/// start of the outward sweep, the recurrence is supplemented by the
/// expansion.
const RECESSIVE_RATIO: f64 = 1e-3;

/// Whether `φ_γ` is close to the solution recessive at infinity on some
/// branch, judged by the two terms of its expansion at the first outward
/// point.
fn nearly_recessive(p: &Params, gamma: C64) -> bool {
    let g = if gamma.norm() > 1.0 { one() / gamma } else { gamma };
    for br in Branch::BOTH {
        let z = p.z(br);
        let k = first_index_below(z, series_ratio(p) / p.b.norm(), p.q) - 1;
        let terms = c_fn(p, z, g).and_then(|c1| {
            let c2 = c_fn(p, z, one() / g)?;
            if c2 == c64(0.0, 0.0) {
                return Ok((one(), c64(0.0, 0.0)));
            }
            Ok((c1 * big_phi_point(p, g, br, k)?, c2 * big_phi_point(p, one() / g, br, k)?))
        });
        if let Ok((t1, t2)) = terms {
            if t1.is_finite() && t2.is_finite() && t2.norm() < RECESSIVE_RATIO * t1.norm() {
                return true;
            }
        }
    }
    false
}

/// `φ_γ` on a window.
///
/// Outward from the series region the dominant solution at infinity grows
/// at least as fast as `φ_γ`, so the recurrence is used as is, unless `φ_γ`
/// is nearly the recessive solution. In that case the recurrence is replaced
/// by the expansion `c_z(γ) Φ_γ + c_z(1/γ) Φ_{1/γ}` wherever that expansion is
/// well conditioned.
pub fn phi_grid(p: &Params, grid: Grid, gamma: C64) -> Result<GridFunction> {
    if (gamma.norm() - 1.0).abs() < 1e-12 || !nearly_recessive(p, gamma) {
        return phi_grid_recurrence(p, grid, gamma);
    }
    let mut f = GridFunction::zeros(grid);
    let mu = Params::mu(gamma);
    for br in Branch::BOTH {
        let z = p.z(br);
        let ks = first_index_below(z, series_ratio(p) / p.b.norm(), p.q);
        let lo = grid.k_min;
        let hi = grid.k_max.max(ks + 1);
        let mut vals = vec![c64(0.0, 0.0); (hi - lo + 1) as usize];
        for k in ks.max(lo)..=hi {
            vals[(k - lo) as usize] = phi_series(p, gamma, p.point(br, k))?;
        }
        if ks > lo {
            let outer_hi = last_index_above(z, crossover_radius(p), p.q);
            let c1 = c_fn(p, z, gamma)?;
            let c2 = c_fn(p, z, one() / gamma)?;
            continue_outward(p, br, mu, &mut vals, lo, ks, |k| {
                if k > outer_hi {
                    return Ok(None);
                }
                let t1 = expansion_term(p, c1, gamma, br, k)?;
                let t2 = expansion_term(p, c2, one() / gamma, br, k)?;
                Ok(t1.zip(t2))
            })?;
        }
        vals.truncate(grid.len());
        *f.branch_mut(br) = vals;
    }
    Ok(f)
}

/// `φ†_γ` on a window.
pub fn phi_dagger_grid(p: &Params, grid: Grid, gamma: C64) -> Result<GridFunction> {
    phi_grid(&p.dagger(), grid, gamma)
}

/// Points of the pole set `s q^ℕ` of `d_z` closer than this (relatively) are
/// handled by symmetric averaging.
const SPOL_GUARD: f64 = 1e-7;
const SPOL_STEP: f64 = 1e-5;

fn near_pole_set(p: &Params, gamma: C64) -> bool {
    let s = p.s();
    let mut t = s;
    for _ in 0..200 {
        if (gamma - t).norm() < SPOL_GUARD * gamma.norm() {
            return true;
        }
        if t.norm() < gamma.norm() * 1e-3 {
            break;
        }
        t *= p.q;
    }
    false
}

/// `Φ^{br}_γ` on the opposite branch: `d φ + d† φ†` near the origin, then
/// outward continuation mixing the recurrence with the expansion in
/// `Φ^{br'}_γ`, `Φ^{br'}_{1/γ}`.
fn big_phi_opposite(p: &Params, grid: Grid, gamma: C64, br: Branch) -> Result<Vec<C64>> {
    if near_pole_set(p, gamma) {
        let up = big_phi_opposite(p, grid, gamma * (1.0 + SPOL_STEP), br)?;
        let dn = big_phi_opposite(p, grid, gamma * (1.0 - SPOL_STEP), br)?;
        return Ok(up.iter().zip(dn.iter()).map(|(u, d)| (u + d) * 0.5).collect());
    }
    let bo = br.other();
    let zo = p.z(bo);
    let pd = p.dagger();
    let kd = first_index_below(zo, crossover_radius(p), p.q);
    let d1 = d_fn(p, p.z(br), gamma)?;
    let d2 = d_fn(&pd, p.z(br), gamma)?;
    let lo = grid.k_min;
    let hi = grid.k_max.max(kd + 1);
    let mut vals = vec![c64(0.0, 0.0); (hi - lo + 1) as usize];
    for k in kd.max(lo)..=hi {
        let x = p.point(bo, k);
        vals[(k - lo) as usize] = d1 * phi_series(p, gamma, x)? + d2 * phi_series(&pd, gamma, x)?;
    }
    if kd > lo {
        let (alpha, beta) = crossing_coefficients(p, gamma, br)?;
        continue_outward(p, bo, Params::mu(gamma), &mut vals, lo, kd, |k| {
            let t1 = expansion_term(p, alpha, gamma, bo, k)?;
            let t2 = expansion_term(p, beta, one() / gamma, bo, k)?;
            Ok(t1.zip(t2))
        })?;
    }
    vals.truncate(grid.len());
    Ok(vals)
}

/// `Φ^{br}_γ` on its own branch by series far out and inward recurrence.
pub fn big_phi_native(p: &Params, grid: Grid, gamma: C64, br: Branch) -> Result<Vec<C64>> {
    let z = p.z(br);
    let kp = last_index_above(z, crossover_radius(p), p.q);
    let lo = grid.k_min.min(kp - 1);
    let hi = grid.k_max;
    let mut vals = vec![c64(0.0, 0.0); (hi - lo + 1).max(0) as usize];
    for k in lo..=kp.min(hi) {
        vals[(k - lo) as usize] = big_phi_point(p, gamma, br, k)?;
    }
    if kp < hi {
        recur_inward(p, br, Params::mu(gamma), &mut vals, lo, kp, hi);
    }
    let off = (grid.k_min - lo) as usize;
    Ok(vals[off..off + grid.len()].to_vec())
}

/// `Φ^{br}_γ` on a window of both branches.
pub fn big_phi_grid(p: &Params, grid: Grid, gamma: C64, br: Branch) -> Result<GridFunction> {
    let q2 = gamma * gamma * p.q;
    if crate::qcore::on_lattice(one() / q2, p.q) && (one() / q2).norm() >= 1.0 - 1e-12 {
        return Err(Error::GammaNotRegular(format!("γ = {gamma}")));
    }
    let mut f = GridFunction::zeros(grid);
    *f.branch_mut(br) = big_phi_native(p, grid, gamma, br)?;
    *f.branch_mut(br.other()) = big_phi_opposite(p, grid, gamma, br)?;
    Ok(f)
}

/// `Φ^{br}_γ` on its own branch through the series only; the window must lie
/// in the series region.
pub fn big_phi_grid_series(p: &Params, grid: Grid, gamma: C64, br: Branch) -> Result<Vec<C64>> {
    grid.ks().map(|k| big_phi_point(p, gamma, br, k)).collect()
}

/// The four eigenfunctions at one spectral point.
#[derive(Clone, Debug)]
pub struct EigenSet {
    pub gamma: C64,
    pub phi: GridFunction,
    pub phi_dagger: GridFunction,
    pub big_plus: GridFunction,
    pub big_minus: GridFunction,
}

impl EigenSet {
    pub fn build(p: &Params, grid: Grid, gamma: C64) -> Result<EigenSet> {
        Ok(EigenSet {
            gamma,
            phi: phi_grid(p, grid, gamma)?,
            phi_dagger: phi_dagger_grid(p, grid, gamma)?,
            big_plus: big_phi_grid(p, grid, gamma, Branch::Plus)?,
            big_minus: big_phi_grid(p, grid, gamma, Branch::Minus)?,
        })
    }
}

/// Maximum relative backward error of `(L - μ) f = 0` over the interior of
/// the window.
pub fn eigen_residual(p: &Params, f: &GridFunction, gamma: C64) -> f64 {
    let mu = Params::mu(gamma);
    let mut worst = 0.0f64;
    for br in Branch::BOTH {
        for k in f.grid.k_min + 1..f.grid.k_max {
            let (r, scale) = crate::grid::eigen_residual_at(p, f, mu, br, k);
            if scale > 0.0 {
                worst = worst.max(r / scale);
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Polynomial points
// ---------------------------------------------------------------------------

/// `(cq/b, dq/b; q)_k / (cq/a, dq/a; q)_k (b/a)^k`, the ratio `φ/φ†` at
/// `γ = s q^k` and `γ = s^{-1} q^{-k}`.
pub fn polynomial_ratio(p: &Params, k: u32) -> Result<C64> {
    use crate::qcore::qpoch_n_prod;
    let q = p.q;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let n = k as i64;
    Ok(qpoch_n_prod(&[c * q / b, d * q / b], q, n)? / qpoch_n_prod(&[c * q / a, d * q / a], q, n)? * (b / a).powi(k as i32))
}

/// `φ†_{sq^k}(x) = q^{-k(k+1)/2} (-a/c)^k (cq/a; q)_k / (dq/b; q)_k P_k(cx; c/b, d/a, c/a; q)`.
pub fn phi_dagger_polynomial(p: &Params, k: u32, x: f64) -> Result<C64> {
    use crate::qcore::{big_q_jacobi, qpoch_n};
    let q = p.q;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let n = k as i64;
    let pref = q.powf(-((n * (n + 1)) as f64) / 2.0) * (-a / c).powi(k as i32) * qpoch_n(c * q / a, q, n)? / qpoch_n(d * q / b, q, n)?;
    Ok(pref * big_q_jacobi(k, c * x, c / b, d / a, c / a, q)?)
}

/// `q^{k(k-1)/2} (-1/(a z))^k (cq/b, dq/b; q)_k / (s²; q)_k`, the ratio
/// `Φ^±/φ†` at `γ = s^{-1} q^{-k}`.
pub fn big_phi_polynomial_ratio(p: &Params, k: u32, br: Branch) -> Result<C64> {
    use crate::qcore::qpoch_n_prod;
    let q = p.q;
    let n = k as i64;
    let z = p.z(br);
    let s = p.s();
    Ok(q.powf(((n * (n - 1)) as f64) / 2.0) * (-one() / (p.a * z)).powi(k as i32) * qpoch_n_prod(&[p.c * q / p.b, p.d * q / p.b], q, n)?
        / qpoch_n_prod(&[s * s], q, n)?)
}
