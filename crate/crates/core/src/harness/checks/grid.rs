use rand::Rng as _;

use super::{describe, normal, random_finite, rel, Worst};
use crate::grid::{apply_l, casorati, inner_truncated, jackson_mass, k_z, weight_w, Branch, Grid, GridFunction};
use crate::harness::{Context, Outcome, Rng};
use crate::{Result, C64};

pub fn lagrange_identity(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-20, 20)?;
    let mut w = Worst::new();
    for _ in 0..20 {
        let f = GridFunction::from_fn(grid, |_, _| normal(rng));
        let g = GridFunction::from_fn(grid, |_, _| normal(rng));
        let (lf, lg) = (apply_l(p, &f), apply_l(p, &g));
        let gc = g.conj();
        let (k, l) = (rng.gen_range(-19..0), rng.gen_range(0..19));
        let (n, m) = (rng.gen_range(-19..0), rng.gen_range(0..19));
        let lhs = inner_truncated(p, &lf, &g, k, l, m, n)? - inner_truncated(p, &f, &lg, k, l, m, n)?;
        let rhs = casorati(p, &f, &gc, Branch::Minus, l)? - casorati(p, &f, &gc, Branch::Minus, k - 1)? + casorati(p, &f, &gc, Branch::Plus, n - 1)?
            - casorati(p, &f, &gc, Branch::Plus, m)?;
        let mut scale = 0.0;
        for (br, lo, hi) in [(Branch::Minus, k, l), (Branch::Plus, n, m)] {
            for j in lo..=hi {
                let m = weight_w(p, br, j)?.norm() * jackson_mass(p, br, j);
                scale += m * ((lf.get(br, j) * g.get(br, j)).norm() + (f.get(br, j) * lg.get(br, j)).norm());
            }
        }
        w.see((lhs - rhs).norm() / scale, || format!("k={k} l={l} m={m} n={n} lhs={lhs} rhs={rhs}"));
    }
    w.done()
}

pub fn casorati_decay(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let grid = Grid::new(-30, 30)?;
    let mut w = Worst::new();
    for _ in 0..20 {
        let f = random_finite(rng, grid, -10, 10, 8);
        let g = random_finite(rng, grid, -10, 10, 8);
        let gc = g.conj();
        let mut inside = 0.0f64;
        let mut outside = 0.0f64;
        for br in Branch::BOTH {
            for k in grid.k_min..grid.k_max {
                let d = casorati(p, &f, &gc, br, k)?.norm();
                if (-11..=10).contains(&k) {
                    inside = inside.max(d);
                } else {
                    outside = outside.max(d);
                }
            }
        }
        w.see(outside / inside.max(f64::MIN_POSITIVE), || format!("f={} g={}", describe(&f), describe(&g)));
    }
    w.done()
}

pub fn weight_positive(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let mut w = Worst::new();
    for (br, k) in ctx.window.points() {
        let v = weight_w(p, br, k)?;
        let r = if v.re > 0.0 && v.is_finite() { v.im.abs() / v.norm() } else { f64::INFINITY };
        w.see(r, || format!("x={}{} w={v}", br.symbol(), k));
    }
    w.done()
}

pub fn kz_two_ways(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let k = 25i64;
    let term = |br: Branch, k: i64| -> Result<C64> { Ok((p.s() * p.s()).powi(k as i32) * (1.0 - p.q) * p.point(br, -k) * weight_w(p, br, -k)?) };
    let mut w = Worst::new();
    for br in Branch::BOTH {
        // The sequence approaches its limit like q^k; one Richardson step
        // removes that term.
        let lim = (term(br, k)? - p.q * term(br, k - 1)?) / (1.0 - p.q);
        let closed = k_z(p, p.z(br))?;
        w.see(rel(lim, closed), || format!("z={} k={k} limit={lim} closed={closed}", p.z(br)));
    }
    w.done()
}
