use std::f64::consts::PI;

use super::{circle_point, rel, Worst};
use crate::eigen::{big_phi_grid, phi_dagger_grid, phi_grid, v_fn};
use crate::grid::{inner_truncated, jackson_mass, weight_w, Branch, Grid, GridFunction};
use crate::harness::{Context, Outcome, Rng};
use crate::spectral::{
    bound_state_grid, enumerate_gamma, enumerate_gamma_floor, hermitian_density, n_weight, n_weight_complex, n_weight_residue,
    suggested_window, total_mass, total_mass_closed, uv_identity_residual, v1, v1_dagger, v2, GammaPoint, GreenKernel, TruncatedOperator,
};
use crate::{c64, Params, Result, C64};

/// Weight threshold for the `Γ` points used by the orthogonality checks.
const GAMMA_MIN_WEIGHT: f64 = 1e-14;
/// Relative tail allowed when choosing windows for sums over `R_q`.
const WINDOW_TAIL: f64 = 1e-16;

fn one() -> C64 {
    c64(1.0, 0.0)
}

/// `Γ` points with weight at least [`GAMMA_MIN_WEIGHT`] and a window on which
/// their eigenfunctions are resolved.
fn gamma_and_window(ctx: &Context) -> Result<(Vec<GammaPoint>, Grid)> {
    let p = &ctx.params;
    let pts = enumerate_gamma(p, GAMMA_MIN_WEIGHT)?;
    let floor = pts.iter().map(|g| g.gamma.abs()).fold(1.0f64, f64::min);
    let grid = suggested_window(p, floor, WINDOW_TAIL)?.union(&ctx.window);
    Ok((pts, grid))
}

fn full_inner(p: &Params, f: &GridFunction, g: &GridFunction) -> Result<C64> {
    let w = f.grid;
    inner_truncated(p, f, g, w.k_min, w.k_max, w.k_max, w.k_min)
}

fn describe_gamma(g: &GammaPoint) -> String {
    format!("γ={} ({}, k={})", g.gamma, g.family.label(), g.k)
}

pub fn orth_varphi_big_phi(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let (pts, grid) = gamma_and_window(ctx)?;
    let states: Vec<(GammaPoint, GridFunction)> = pts.iter().map(|g| Ok((*g, bound_state_grid(p, grid, g)?))).collect::<Result<_>>()?;
    let mut w = Worst::new();
    for _ in 0..10 {
        let g = circle_point(rng);
        for (name, f) in [("φ", phi_grid(p, grid, g)?), ("φ†", phi_dagger_grid(p, grid, g)?)] {
            let nf = full_inner(p, &f, &f)?.re.sqrt();
            for (gp, h) in &states {
                let nh = full_inner(p, h, h)?.re.sqrt();
                let r = full_inner(p, &f, h)?.norm() / (nf * nh);
                w.see(r, || format!("⟨{name}_γ, Φ⁺⟩ γ={g} Γ point {} window [{}, {}]", describe_gamma(gp), grid.k_min, grid.k_max));
            }
        }
    }
    w.done()
}

pub fn orth_relations(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let (pts, grid) = gamma_and_window(ctx)?;
    let states: Vec<(f64, GridFunction)> = pts.iter().map(|g| Ok((n_weight(p, g)?, bound_state_grid(p, grid, g)?))).collect::<Result<_>>()?;
    let mut w = Worst::new();
    for (i, (ni, fi)) in states.iter().enumerate() {
        for (j, (nj, fj)) in states.iter().enumerate() {
            let want = if i == j { one() } else { c64(0.0, 0.0) };
            let got = full_inner(p, fi, fj)? * (ni * nj).sqrt();
            w.see((got - want).norm(), || format!("{} vs {}: {got}", describe_gamma(&pts[i]), describe_gamma(&pts[j])));
        }
    }
    w.done()
}

/// A point of `Γ` counts as resolved by a window when `|μ|` times the mass of
/// its normalised eigenfunction outside the window is below this.
const RESOLVED: f64 = 1e-6;

struct TruncatedSpectrum {
    eigenvalues: Vec<f64>,
    all: Vec<GammaPoint>,
    resolved: Vec<GammaPoint>,
    /// Smallest `|μ|` of a point of `Γ` the window does not resolve.
    cut: f64,
    grid: Grid,
}

/// Eigenvalues of the truncated operator on a window wide enough for the
/// points of `Γ` near `±1`, and the points of `Γ` it resolves.
fn truncated_spectrum(ctx: &Context) -> Result<TruncatedSpectrum> {
    let p = &ctx.params;
    let grid = suggested_window(p, 1e-8, WINDOW_TAIL)?.union(&ctx.window);
    let eigenvalues = TruncatedOperator::new(p, grid)?.eigenvalues();
    // Points deeper than the window cannot be resolved; enumerate a little past it.
    let floor = p.q.powi((grid.k_max + 4) as i32);
    let mut resolved = Vec::new();
    let mut cut = f64::INFINITY;
    let all = enumerate_gamma_floor(p, floor)?;
    for &g in &all {
        // Points whose eigenfunction or weight is not representable on the
        // window count as unresolved.
        let leak = bound_state_grid(p, grid, &g)
            .and_then(|f| Ok((1.0 - n_weight(p, &g)? * full_inner(p, &f, &f)?.re).abs()))
            .unwrap_or(f64::INFINITY);
        if g.mu().abs() * leak <= RESOLVED {
            resolved.push(g);
        } else {
            cut = cut.min(g.mu().abs());
        }
    }
    Ok(TruncatedSpectrum { eigenvalues, all, resolved, cut, grid })
}

pub fn spectrum_dense(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let t = truncated_spectrum(ctx)?;
    let mut w = Worst::new();
    let mut beyond = 0;
    for &e in &t.eigenvalues {
        if e.abs() >= t.cut {
            beyond += 1;
            continue;
        }
        let d_cont = if e.abs() <= 2.0 { 0.0 } else { e.abs() - 2.0 };
        let d_pts = t.all.iter().map(|g| (g.mu() - e).abs()).fold(f64::INFINITY, f64::min);
        w.see(d_cont.min(d_pts), || {
            format!("eigenvalue {e} on [{}, {}]; {beyond} eigenvalues beyond |λ| = {:e} not compared", t.grid.k_min, t.grid.k_max, t.cut)
        });
    }
    w.done()
}

pub fn spectrum_discrete(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let t = truncated_spectrum(ctx)?;
    if t.resolved.is_empty() {
        return Ok(Outcome::Skipped("no point of Γ is resolved by the window".into()));
    }
    let mut w = Worst::new();
    for g in &t.resolved {
        let d = t.eigenvalues.iter().map(|e| (g.mu() - e).abs()).fold(f64::INFINITY, f64::min);
        w.see(d, || format!("μ = {} at {} on [{}, {}]", g.mu(), describe_gamma(g), t.grid.k_min, t.grid.k_max));
    }
    w.done()
}

/// Largest spectrum-free interval of `[-LAMBDA_MAX, LAMBDA_MAX]` outside `[-2, 2]`.
const LAMBDA_MAX: f64 = 50.0;
const CONTOUR_NODES: usize = 128;

pub fn no_mass_off_spectrum(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let mut marks: Vec<f64> = vec![-LAMBDA_MAX, -2.0, 2.0, LAMBDA_MAX];
    for g in enumerate_gamma_floor(p, 1.0 / LAMBDA_MAX)? {
        if g.mu().abs() < LAMBDA_MAX {
            marks.push(g.mu());
        }
    }
    marks.sort_by(f64::total_cmp);
    let (lo, hi) = marks
        .windows(2)
        .filter(|w| !(w[0] >= -2.0 && w[1] <= 2.0))
        .map(|w| (w[0], w[1]))
        .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .expect("at least one gap");
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let radius = 0.75 * half;
    let grid = Grid::new(-10, 10)?;
    let pts = [(Branch::Plus, 0i64), (Branch::Minus, 1), (Branch::Plus, 3), (Branch::Minus, -2)];
    let unit = |br: Branch, k: i64| -> Result<GridFunction> {
        let m = (weight_w(p, br, k)?.re * jackson_mass(p, br, k)).sqrt();
        let mut f = GridFunction::zeros(grid);
        f.set(br, k, c64(1.0 / m, 0.0));
        Ok(f)
    };
    let fs: Vec<GridFunction> = pts.iter().map(|&(b, k)| unit(b, k)).collect::<Result<_>>()?;
    let mut sums = vec![c64(0.0, 0.0); fs.len() * fs.len()];
    for j in 0..CONTOUR_NODES {
        let e = C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_NODES as f64);
        let lambda = centre + radius * e;
        let gk = GreenKernel::new(p, grid, lambda)?;
        for (a, f) in fs.iter().enumerate() {
            for (b, g) in fs.iter().enumerate() {
                sums[a * fs.len() + b] += gk.matrix_element(p, f, g)? * radius * e / CONTOUR_NODES as f64;
            }
        }
    }
    let mut w = Worst::new();
    for (i, s) in sums.iter().enumerate() {
        let (a, b) = (pts[i / fs.len()], pts[i % fs.len()]);
        w.see(s.norm(), || {
            format!("interval ({:.6}, {:.6}) f=δ{}{} g=δ{}{} value={s}", centre - 0.5 * half, centre + 0.5 * half, a.0.symbol(), a.1, b.0.symbol(), b.1)
        });
    }
    w.done()
}

pub fn green_decomposition(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    use rand::Rng as _;
    let p = &ctx.params;
    let grid = Grid::new(-10, 12)?;
    let mut w = Worst::new();
    for _ in 0..20 {
        let g = circle_point(rng);
        let gi = one() / g;
        let pick = |rng: &mut Rng| (if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus }, rng.gen_range(-8..=8i64));
        let (x, y) = (pick(rng), pick(rng));
        let (mg, pg) = (big_phi_grid(p, grid, g, Branch::Minus)?, big_phi_grid(p, grid, g, Branch::Plus)?);
        let (mi, pi) = (big_phi_grid(p, grid, gi, Branch::Minus)?, big_phi_grid(p, grid, gi, Branch::Plus)?);
        let t1 = mi.get(x.0, x.1) * pi.get(y.0, y.1) / v_fn(p, gi)?;
        let t2 = mg.get(x.0, x.1) * pg.get(y.0, y.1) / v_fn(p, g)?;
        let phi = phi_grid(p, grid, g)?;
        let phd = phi_dagger_grid(p, grid, g)?;
        let (fx, fy, hx, hy) = (phi.get(x.0, x.1), phi.get(y.0, y.1), phd.get(x.0, x.1), phd.get(y.0, y.1));
        let terms = [v1(p, g)? * fx * fy, v2(p, g)? * fx * hy, v2(p, g)? * hx * fy, v1_dagger(p, g)? * hx * hy];
        let pre = one() / (gi - g);
        let rhs: C64 = terms.iter().sum::<C64>() * pre;
        let scale = t1.norm() + t2.norm() + terms.iter().map(|t| t.norm()).sum::<f64>() * pre.norm();
        w.see(((t1 - t2) - rhs).norm() / scale, || format!("γ={g} x={}{} y={}{}", x.0.symbol(), x.1, y.0.symbol(), y.1));
    }
    w.done()
}

pub fn uv_identity(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let mut w = Worst::new();
    for _ in 0..50 {
        let g = circle_point(rng);
        w.see(uv_identity_residual(&ctx.params, g)?, || format!("γ={g}"));
    }
    w.done()
}

pub fn density_positive(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let mut w = Worst::new();
    for _ in 0..50 {
        let g = circle_point(rng);
        let h = hermitian_density(&ctx.params, g)?;
        let scale = h.entries.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max);
        let ev = h.hermitian_eigenvalues();
        let r = if ev[0] > 0.0 { h.hermitian_defect() / scale } else { f64::INFINITY };
        w.see(r, || format!("γ={g} eigenvalues {ev:?}"));
    }
    w.done()
}

pub fn weights_residue(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let mut w = Worst::new();
    for g in enumerate_gamma(p, GAMMA_MIN_WEIGHT)? {
        let closed = n_weight_complex(p, &g)?;
        let res = n_weight_residue(p, &g)?;
        w.see(rel(closed, res), || format!("{} closed={closed} residue={res}", describe_gamma(&g)));
    }
    w.done()
}

pub fn summation_formula(ctx: &Context, _rng: &mut Rng) -> Result<Outcome> {
    let p = &ctx.params;
    let s = p.s().norm();
    if s <= 1.0 {
        return Ok(Outcome::Skipped(format!("needs sqrt(ab/(cdq)) < 1, have {}", 1.0 / s)));
    }
    let outer = (WINDOW_TAIL.ln() / (-2.0 * s.ln())).ceil() as i64 + 8;
    let inner = (WINDOW_TAIL.ln() / p.q.ln()).ceil() as i64 + 8;
    let grid = Grid::new(-outer, inner)?.union(&ctx.window);
    let lhs = total_mass(p, grid)?;
    let closed = total_mass_closed(p)?;
    let mut w = Worst::new();
    w.see(rel(lhs, closed), || format!("window [{}, {}] sum={lhs} closed={closed}", grid.k_min, grid.k_max));
    w.done()
}
