use rand::Rng as _;

use super::{describe, random_finite, Worst};
use crate::grid::{apply_l, Branch, GridFunction};
use crate::harness::{Context, Outcome, Rng};
use crate::transform::{SpectralFunction, Transform};
use crate::{c64, Result, C64};

fn one() -> C64 {
    c64(1.0, 0.0)
}

fn window_inner(t: &Transform, f: &GridFunction, g: &GridFunction) -> C64 {
    t.grid.points().into_iter().map(|(br, k)| f.get(br, k) * g.get(br, k).conj() * t.measure(br, k)).sum()
}

fn window_norm(t: &Transform, f: &GridFunction) -> f64 {
    window_inner(t, f, f).re.sqrt()
}

pub fn plancherel(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let t = ctx.transform()?;
    let (lo, hi) = (t.grid.k_min, t.grid.k_max);
    let mut w = Worst::new();
    for _ in 0..100 {
        let f = random_finite(rng, t.grid, lo, hi, 6);
        let g = random_finite(rng, t.grid, lo, hi, 6);
        let lhs = t.inner_h(&t.forward(&f)?, &t.forward(&g)?)?;
        let rhs = window_inner(t, &f, &g);
        w.see((lhs - rhs).norm() / (window_norm(t, &f) * window_norm(t, &g)), || format!("f={} g={} ⟨Ff,Fg⟩={lhs} ⟨f,g⟩={rhs}", describe(&f), describe(&g)));
    }
    w.done()
}

pub fn roundtrip(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let t = ctx.transform()?;
    let mut w = Worst::new();
    for _ in 0..20 {
        let br = if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
        let k = rng.gen_range(t.grid.k_min..=t.grid.k_max);
        let f = GridFunction::delta(t.grid, br, k);
        let back = t.inverse(&t.forward(&f)?)?;
        let my = t.measure(br, k);
        for (bx, kx) in t.grid.points() {
            let e = (back.get(bx, kx) - f.get(bx, kx)).norm() * (t.measure(bx, kx) / my).sqrt();
            w.see(e, || format!("δ at {}{k}, error at {}{kx}", br.symbol(), bx.symbol()));
        }
    }
    w.done()
}

pub fn diagonalization(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let t = ctx.transform()?;
    let mut w = Worst::new();
    for _ in 0..10 {
        let f = random_finite(rng, t.grid, t.grid.k_min + 1, t.grid.k_max - 1, 6);
        let g = t.forward(&f)?;
        let lf = t.forward(&apply_l(p, &f))?;
        let mf = t.multiply_mu(&g);
        let d = lf.axpy(-one(), &mf).sup_norms();
        let s = mf.sup_norms();
        w.see(d.0.max(d.1) / s.0.max(s.1), || format!("f={} circle {:e} points {:e}", describe(&f), d.0, d.1));
    }
    w.done()
}

fn test_pair(t: &Transform) -> (SpectralFunction, [SpectralFunction; 2]) {
    let z = c64(0.0, 0.0);
    let base = t.c0_function(&[one(), c64(0.5, 0.0)], &[c64(0.2, 0.0), c64(0.0, 0.3)], 7);
    let a1 = t.c0_function(&[z, z, one()], &[], 7);
    let a2 = t.c0_function(&[], &[z, one()], 7);
    (base, [a1, a2])
}

pub fn fg1g2(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let t = ctx.transform()?;
    let (base, aux) = test_pair(t);
    let (g, f) = t.vanishing_at_origin(&base, [&aux[0], &aux[1]], |h| t.circle_transform(h))?;
    let lhs = SpectralFunction::new(t.forward_j(&f)?.circle, vec![c64(0.0, 0.0); t.gammas.len()]);
    let ug = t.apply_u(&g)?;
    let mut w = Worst::new();
    w.see(t.norm_h(&lhs.axpy(-one(), &ug))? / t.norm_h(&ug)?, || format!("window [{}, {}]", t.grid.k_min, t.grid.k_max));
    w.done()
}

pub fn right_inverse(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let t = ctx.transform()?;
    let (base, aux) = test_pair(t);
    let (g, f) = t.vanishing_at_origin(&base, [&aux[0], &aux[1]], |h| t.inverse(h))?;
    let back = t.forward(&f)?.plain();
    let mut w = Worst::new();
    w.see(t.norm_h(&back.axpy(-one(), &g))? / t.norm_h(&g)?, || format!("window [{}, {}]", t.grid.k_min, t.grid.k_max));
    w.done()
}

const J_POINTS: [(Branch, i64); 6] = [(Branch::Plus, 3), (Branch::Minus, 3), (Branch::Plus, 12), (Branch::Minus, 9), (Branch::Minus, -2), (Branch::Plus, 6)];

pub fn j_theta(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let t = ctx.transform()?;
    let pts: Vec<(Branch, i64)> = J_POINTS.iter().copied().filter(|&(_, k)| t.grid.contains(k)).collect();
    let deltas: Vec<GridFunction> = pts.iter().map(|&(b, k)| GridFunction::delta(t.grid, b, k)).collect();
    let mask = t.j_resolved(&deltas.iter().collect::<Vec<_>>());
    let unresolved: Vec<bool> = mask.iter().map(|m| !m).collect();
    let mut w = Worst::new();
    for g in &t.gammas {
        if !t.gammas.iter().zip(&mask).any(|(h, &m)| m && h.family == g.family) {
            w.see(f64::INFINITY, || format!("no resolved point in family {}", g.family.label()));
        }
    }
    let fw: Vec<SpectralFunction> = deltas.iter().map(|f| t.forward(f)).collect::<Result<_>>()?;
    let js: Vec<_> = deltas.iter().map(|f| t.forward_j(f)).collect::<Result<_>>()?;
    for (i1, &(b1, k1)) in pts.iter().enumerate() {
        let th = t.theta_map(&js[i1])?;
        let scale = t.measure(b1, k1);
        for (j, (a, b)) in th.points.iter().zip(&fw[i1].points).enumerate() {
            if mask[j] {
                let err = (a - b).norm() * (t.weights[j] / scale).sqrt();
                w.see(err, || format!("Θ∘J vs F at δ{}{k1}, Γ point {} ({})", b1.symbol(), t.gammas[j].gamma, t.gammas[j].family.label()));
            }
        }
        for (i2, &(b2, k2)) in pts.iter().enumerate() {
            let m = t.inner_m_masked(&js[i1], &js[i2], &mask)? + t.inner_h_points(&fw[i1], &fw[i2], &unresolved)?;
            let want = if i1 == i2 { scale } else { 0.0 };
            let s = (scale * t.measure(b2, k2)).sqrt();
            w.see((m - want).norm() / s, || format!("⟨Jδ{}{k1}, Jδ{}{k2}⟩_M = {m}", b1.symbol(), b2.symbol()));
        }
    }
    w.done()
}
