use rand::Rng as _;

use super::{annulus_point, rel, Worst};
use crate::harness::{Context, Outcome, Rng};
use crate::qcore::{phi_rs_with, qpoch_inf_with, qpoch_n, theta, theta_prod};
use crate::{c64, Result, C64};

pub fn theta_product(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let q = ctx.params.q;
    let mut w = Worst::new();
    for _ in 0..200 {
        let [x, v, y, u] = [0; 4].map(|_| annulus_point(rng, q, 3.0));
        let t1 = theta_prod(&[x * v, x / v, y * u, y / u], q)?;
        let t2 = theta_prod(&[x * u, x / u, y * v, y / v], q)?;
        let t3 = y / v * theta_prod(&[x * y, x / y, v * u, v / u], q)?;
        let scale = t1.norm().max(t2.norm()).max(t3.norm());
        w.see((t1 - t2 - t3).norm() / scale, || format!("x={x} v={v} y={y} w={u}"));
    }
    w.done()
}

pub fn qpoch_shift(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let q = ctx.params.q;
    let prec = &ctx.precision;
    let mut w = Worst::new();
    for _ in 0..20 {
        let x = annulus_point(rng, q, 3.0);
        let full = qpoch_inf_with(x, q, prec)?;
        for n in -10..=10i64 {
            let lhs = qpoch_n(x, q, n)? * qpoch_inf_with(x * q.powi(n as i32), q, prec)?;
            w.see(rel(lhs, full), || format!("x={x} n={n}"));
        }
    }
    w.done()
}

pub fn theta_reflection_shift(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let q = ctx.params.q;
    let mut w = Worst::new();
    for _ in 0..20 {
        let x = annulus_point(rng, q, 3.0);
        let t = theta(x, q)?;
        w.see(rel(theta(c64(q, 0.0) / x, q)?, t), || format!("reflection x={x}"));
        for k in -8..=8i32 {
            let kf = k as f64;
            let rhs = (-x).powi(-k) * q.powf(-kf * (kf - 1.0) / 2.0) * t;
            w.see(rel(theta(x * q.powi(k), q)?, rhs), || format!("shift x={x} k={k}"));
        }
    }
    w.done()
}

/// `(a; q)_j` by direct multiplication.
fn poch(a: C64, q: f64, j: usize) -> C64 {
    (0..j).map(|i| c64(1.0, 0.0) - a * q.powi(i as i32)).product()
}

pub fn terminating_series(ctx: &Context, rng: &mut Rng) -> Result<Outcome> {
    let q = ctx.params.q;
    let mut w = Worst::new();
    for _ in 0..20 {
        let n = rng.gen_range(0..=8usize);
        let head = c64(q.powi(-(n as i32)), 0.0);
        let (a1, a2) = (annulus_point(rng, q, 2.0), annulus_point(rng, q, 2.0));
        let (b1, b2) = (annulus_point(rng, q, 2.0), annulus_point(rng, q, 2.0));
        let z = annulus_point(rng, q, 1.0);
        let got = phi_rs_with(&[head, a1, a2], &[b1, b2], q, z, &ctx.precision)?;
        let mut sum = c64(0.0, 0.0);
        let mut mag = 0.0;
        for j in 0..=n {
            let t = poch(head, q, j) * poch(a1, q, j) * poch(a2, q, j) / (poch(b1, q, j) * poch(b2, q, j) * poch(c64(q, 0.0), q, j)) * z.powi(j as i32);
            sum += t;
            mag += t.norm();
        }
        w.see((got - sum).norm() / mag, || format!("n={n} a=({a1}, {a2}) b=({b1}, {b2}) z={z}"));
    }
    w.done()
}
