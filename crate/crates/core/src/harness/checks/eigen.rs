use rand::Rng as _;

use super::{circle_point, rel, Worst};
use crate::eigen::{
    big_phi_grid, big_phi_polynomial_ratio, casorati_big_phi, casorati_phi, eigen_residual, phi_c_expansion, phi_dagger_grid,
    phi_dagger_polynomial, phi_grid, phi_grid_recurrence, polynomial_ratio, v_fn, EigenSet,
};
use crate::grid::{casorati, casorati_condition, origin_limits, Branch, Grid, GridFunction};
use crate::harness::{Context, Outcome, Rng};
use crate::spectral::{bound_state_grid, enumerate_gamma, v_zeros};
use crate::{c64, Params, Result, C64};

/// Weight threshold for the `Γ` points used by the eigen checks.
const GAMMA_MIN_WEIGHT: f64 = 1e-14;
/// Casorati values are only read where the difference inside loses fewer
/// than three digits.
const CASORATI_CONDITION: f64 = 1e3;

fn one() -> C64 {
    c64(1.0, 0.0)
}

pub fn eigen_residual_check(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = ctx.window;
    let mut w = Worst::new();
    for _ in 0..30 {
        let g = circle_point(rng);
        let e = EigenSet::build(p, grid, g)?;
        for (name, f) in [("φ", &e.phi), ("φ†", &e.phi_dagger), ("Φ⁺", &e.big_plus), ("Φ⁻", &e.big_minus)] {
            w.see(eigen_residual(p, f, g), || format!("{name} γ={g}"));
        }
    }
    for g in enumerate_gamma(p, GAMMA_MIN_WEIGHT)? {
        let f = bound_state_grid(p, grid, &g)?;
        w.see(eigen_residual(p, &f, g.value()), || format!("Φ⁺ at Γ point {} ({:?}, k={})", g.gamma, g.family, g.k));
    }
    w.done()
}

/// Relative mismatch of the one-sided limits of `f` and `D_q f` at the origin.
fn matching_defect(p: &Params, f: &GridFunction) -> Result<f64> {
    let o = origin_limits(p, f, 1e-3)?;
    let dv = (o.value_minus - o.value_plus).norm() / o.value_minus.norm().max(o.value_plus.norm());
    let dd = (o.deriv_minus - o.deriv_plus).norm() / o.deriv_minus.norm().max(o.deriv_plus.norm()).max(o.value_plus.norm());
    Ok(dv.max(dd))
}

pub fn boundary_matching(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = ctx.window;
    let mut w = Worst::new();
    for _ in 0..10 {
        let g = circle_point(rng);
        w.see(matching_defect(p, &phi_grid(p, grid, g)?)?, || format!("φ γ={g}"));
        w.see(matching_defect(p, &phi_dagger_grid(p, grid, g)?)?, || format!("φ† γ={g}"));
    }
    for g in enumerate_gamma(p, GAMMA_MIN_WEIGHT)? {
        let f = bound_state_grid(p, grid, &g)?;
        w.see(matching_defect(p, &f)?, || format!("Φ⁺ at Γ point {} ({:?}, k={})", g.gamma, g.family, g.k));
    }
    w.done()
}

pub fn phi_polynomial(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-10, 20)?;
    let mut w = Worst::new();
    for k in 0..3u32 {
        let g = p.s() * p.q.powi(k as i32);
        let phi = phi_grid(p, grid, g)?;
        let phd = phi_dagger_grid(p, grid, g)?;
        let ratio = polynomial_ratio(p, k)?;
        for br in Branch::BOTH {
            for j in -8..8 {
                let x = p.point(br, j);
                w.see(rel(phi.get(br, j), ratio * phd.get(br, j)), || format!("φ = C_k φ†, k={k} x={x}"));
                w.see(rel(phd.get(br, j), phi_dagger_polynomial(p, k, x)?), || format!("φ† = P_k, k={k} x={x}"));
            }
        }
    }
    w.done()
}

pub fn big_phi_polynomial(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-10, 20)?;
    let ks: Vec<u32> = (0..3u32).filter(|&k| (one() / (p.s() * p.q.powi(k as i32))).norm() < 1.0).collect();
    if ks.is_empty() {
        return Ok(Outcome::Skipped(format!("1/(s q^k) lies outside the unit disc for k = 0, 1, 2 (s = {})", p.s())));
    }
    let mut w = Worst::new();
    for k in ks {
        let g = one() / (p.s() * p.q.powi(k as i32));
        let phd = phi_dagger_grid(p, grid, g)?;
        for br in Branch::BOTH {
            let f = big_phi_grid(p, grid, g, br)?;
            let ratio = big_phi_polynomial_ratio(p, k, br)?;
            for j in -8..8 {
                w.see(rel(f.get(br, j), ratio * phd.get(br, j)), || format!("k={k} x={}", p.point(br, j)));
            }
        }
    }
    w.done()
}

/// Largest relative deviation of `D(f, g)` from `reference` over the
/// well-conditioned points of the window.
fn casorati_deviation(p: &Params, f: &GridFunction, g: &GridFunction, reference: Option<C64>) -> Result<(f64, String)> {
    let mut vals = Vec::new();
    let mut best = (f64::INFINITY, c64(0.0, 0.0));
    for br in Branch::BOTH {
        for k in f.grid.k_min..f.grid.k_max {
            let cond = casorati_condition(f, g, br, k);
            if cond < CASORATI_CONDITION {
                let d = casorati(p, f, g, br, k)?;
                if cond < best.0 {
                    best = (cond, d);
                }
                vals.push((br, k, d));
            }
        }
    }
    let r = reference.unwrap_or(best.1);
    let mut worst = (0.0, String::from("no well-conditioned point"));
    if vals.is_empty() {
        worst.0 = f64::INFINITY;
    }
    for (br, k, d) in vals {
        let e = rel(d, r);
        if e >= worst.0 {
            worst = (e, format!("x={}{k} D={d} reference={r}", br.symbol()));
        }
    }
    Ok(worst)
}

pub fn casorati_constancy(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-20, 30)?;
    let mut w = Worst::new();
    for _ in 0..10 {
        let g = circle_point(rng);
        let e = EigenSet::build(p, grid, g)?;
        let pairs: [(&str, GridFunction, GridFunction); 4] = [
            ("φ,φ†", e.phi.clone(), e.phi_dagger.clone()),
            ("Φ⁺,Φ⁻", e.big_plus.clone(), e.big_minus.clone()),
            ("Φ⁺_γ,Φ⁺_1/γ", e.big_plus.clone(), big_phi_grid(p, grid, one() / g, Branch::Plus)?),
            ("φ,Φ⁻", e.phi.clone(), e.big_minus.clone()),
        ];
        for (name, f, h) in &pairs {
            let (r, at) = casorati_deviation(p, f, h, None)?;
            w.see(r, || format!("{name} γ={g} {at}"));
        }
    }
    w.done()
}

pub fn casorati_closed_forms(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-20, 30)?;
    let mut w = Worst::new();
    for _ in 0..50 {
        let g = circle_point(rng);
        let (r, at) = casorati_deviation(p, &phi_grid(p, grid, g)?, &phi_dagger_grid(p, grid, g)?, Some(casorati_phi(p, g)?))?;
        w.see(r, || format!("D(φ,φ†) γ={g} {at}"));
        for br in Branch::BOTH {
            let f = big_phi_grid(p, grid, g, br)?;
            let h = big_phi_grid(p, grid, one() / g, br)?;
            let (r, at) = casorati_deviation(p, &f, &h, Some(casorati_big_phi(p, g, br)?))?;
            w.see(r, || format!("D(Φ_γ,Φ_1/γ) on {} γ={g} {at}", br.symbol()));
        }
    }
    w.done()
}

pub fn v_closed_form(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-20, 30)?;
    let zeros = v_zeros(p, 1e-3);
    let mut gammas: Vec<C64> = (0..50).map(|_| circle_point(rng)).collect();
    while gammas.len() < 70 {
        let t: f64 = rng.gen_range(0.15..0.95) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if zeros.iter().all(|z| (z - t).norm() > 1e-2) {
            gammas.push(c64(t, 0.0));
        }
    }
    let mut w = Worst::new();
    for g in gammas {
        let fp = big_phi_grid(p, grid, g, Branch::Plus)?;
        let fm = big_phi_grid(p, grid, g, Branch::Minus)?;
        let (r, at) = casorati_deviation(p, &fp, &fm, Some(v_fn(p, g)?))?;
        w.see(r, || format!("γ={g} {at}"));
    }
    w.done()
}

pub fn c_expansion(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-30, 20)?;
    let mut w = Worst::new();
    for _ in 0..20 {
        let g = circle_point(rng);
        let phi = phi_grid_recurrence(p, grid, g)?;
        for br in Branch::BOTH {
            for k in -30..-1 {
                let e = phi_c_expansion(p, g, br, k)?;
                w.see(rel(phi.get(br, k), e), || format!("γ={g} x={}{k}", br.symbol()));
            }
        }
    }
    w.done()
}
