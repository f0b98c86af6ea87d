//! q-Pochhammer symbols, the modified theta function `θ(x) = (x, q/x; q)_∞`
//! and the basic hypergeometric series `ᵣφₛ` and `₂ψ₂`.
//!
//! All routines take a real base `0 < q < 1` and complex arguments. A factor
//! `1 - x q^k` that vanishes up to rounding is treated as an exact zero, so
//! products evaluated on lattice points return `0` rather than a tiny
//! residue.

use crate::{Error, Result, C64};
use num_complex::ComplexFloat;
use serde::{Deserialize, Serialize};

pub mod extended;

/// Relative size below which the tail of an infinite product or series is
/// dropped.
pub const TAIL_EPSILON: f64 = 1e-17;
/// Hard cap on the number of factors or terms.
pub const MAX_TERMS: usize = 20_000;
/// Tolerance of the lattice-zero test `|1 - y| < ZERO_TOL (1 + |y|)`.
pub const ZERO_TOL: f64 = 1e-12;

/// Truncation policy of infinite products and series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Precision {
    /// Relative tail bound.
    pub tail_epsilon: f64,
    /// Cap on the number of factors or terms.
    pub max_terms: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { tail_epsilon: TAIL_EPSILON, max_terms: MAX_TERMS }
    }
}

impl Precision {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_epsilon > 0.0 && self.tail_epsilon < 1e-6) {
            return Err(Error::Config(format!("tail_epsilon = {} outside (0, 1e-6)", self.tail_epsilon)));
        }
        if self.max_terms < 64 {
            return Err(Error::Config(format!("max_terms = {} below 64", self.max_terms)));
        }
        Ok(())
    }
}

/// Whether `1 - y` vanishes up to rounding.
#[inline]
pub fn is_unit(y: C64) -> bool {
    (C64::new(1.0, 0.0) - y).norm() < ZERO_TOL * (1.0 + y.norm())
}

/// Whether `x` lies on `q^ℤ` up to rounding.
pub fn on_lattice(x: C64, q: f64) -> bool {
    if x.norm() == 0.0 || !x.is_finite() {
        return false;
    }
    let n = (x.norm().ln() / q.ln()).round();
    is_unit(x * q.powf(-n))
}

fn check_base(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("base q = {q} outside (0, 1)")))
    }
}

fn finite(v: C64, what: &str) -> Result<C64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(what.to_string()))
    }
}

/// `(x; q)_∞ = ∏_{k≥0} (1 - x q^k)`.
pub fn qpoch_inf(x: C64, q: f64) -> Result<C64> {
    qpoch_inf_with(x, q, &Precision::default())
}

/// [`qpoch_inf`] under an explicit truncation policy.
pub fn qpoch_inf_with(x: C64, q: f64, prec: &Precision) -> Result<C64> {
    check_base(q)?;
    if !x.is_finite() {
        return Err(Error::DomainError("non-finite argument".into()));
    }
    let mut prod = C64::new(1.0, 0.0);
    let mut y = x;
    for _ in 0..prec.max_terms {
        if y.norm() / (1.0 - q) < prec.tail_epsilon {
            return finite(prod, "(x;q)_inf");
        }
        if is_unit(y) {
            return Ok(C64::new(0.0, 0.0));
        }
        prod *= C64::new(1.0, 0.0) - y;
        y *= q;
    }
    Err(Error::NonConvergent(format!("(x;q)_inf at x = {x}")))
}

/// `(x; q)_n` for any integer `n`, with `(x;q)_{-m} = 1/∏_{j=1}^{m}(1 - x q^{-j})`.
pub fn qpoch_n(x: C64, q: f64, n: i64) -> Result<C64> {
    check_base(q)?;
    let one = C64::new(1.0, 0.0);
    if n >= 0 {
        let mut prod = one;
        let mut y = x;
        for _ in 0..n {
            if is_unit(y) {
                return Ok(C64::new(0.0, 0.0));
            }
            prod *= one - y;
            y *= q;
        }
        finite(prod, "(x;q)_n")
    } else {
        let mut prod = one;
        let mut y = x / q;
        for _ in 0..(-n) {
            if is_unit(y) {
                return Err(Error::PoleAtNegativeIndex);
            }
            prod *= one - y;
            y /= q;
        }
        finite(one / prod, "(x;q)_n")
    }
}

/// `(x_1, …, x_m; q)_∞`.
pub fn qpoch_inf_prod(xs: &[C64], q: f64) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for &x in xs {
        prod *= qpoch_inf(x, q)?;
    }
    finite(prod, "(x_1,...;q)_inf")
}

/// `(x_1, …, x_m; q)_n`.
pub fn qpoch_n_prod(xs: &[C64], q: f64, n: i64) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for &x in xs {
        prod *= qpoch_n(x, q, n)?;
    }
    finite(prod, "(x_1,...;q)_n")
}

/// `θ(x; q) = (x, q/x; q)_∞`.
///
/// The argument is first moved into the annulus `q < |y| ≤ 1` with the
/// quasi-periodicity `θ(q^k y) = (-y)^{-k} q^{-k(k-1)/2} θ(y)`.
pub fn theta(x: C64, q: f64) -> Result<C64> {
    check_base(q)?;
    if x.norm() == 0.0 || !x.is_finite() {
        return Err(Error::DomainError(format!("theta at x = {x}")));
    }
    let lq = q.ln();
    let n = (x.norm().ln() / -lq).ceil() as i64;
    let y = x * q.powi(n as i32);
    let core = qpoch_inf(y, q)? * qpoch_inf(C64::new(q, 0.0) / y, q)?;
    if core.norm() == 0.0 {
        return Ok(core);
    }
    let pref = if n.abs() <= 60 {
        (-y).powi(n as i32) * q.powf(-((n * (n + 1)) as f64) / 2.0)
    } else {
        let ln = (-y).ln() * n as f64 - lq * ((n * (n + 1)) as f64 / 2.0);
        ln.exp()
    };
    finite(pref * core, "theta")
}

/// `θ(x_1, …, x_m; q) = ∏ θ(x_i; q)`.
pub fn theta_prod(xs: &[C64], q: f64) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for &x in xs {
        prod *= theta(x, q)?;
    }
    finite(prod, "theta product")
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

/// Tracks partial sums and decides when the remaining tail is negligible.
struct Accumulator {
    sum: C64,
    max_abs: f64,
    quiet: u32,
    eps: f64,
}

impl Accumulator {
    fn new(first: C64, eps: f64) -> Self {
        Accumulator { sum: first, max_abs: first.norm(), quiet: 0, eps }
    }

    /// Adds `term`; `rho` bounds the ratio of the following terms. Returns
    /// true once the tail estimate has been small twice in a row.
    fn finish(&self) -> Result<(C64, f64)> {
        let v = finite(self.sum, "phi_rs")?;
        Ok((v, if v.norm() > 0.0 { self.max_abs / v.norm() } else { f64::INFINITY }))
    }

    fn push(&mut self, term: C64, rho: f64) -> bool {
        self.sum += term;
        let t = term.norm();
        self.max_abs = self.max_abs.max(t);
        let small = if t == 0.0 {
            true
        } else if rho < 1.0 {
            t * rho / (1.0 - rho) <= self.eps * self.sum.norm().max(self.max_abs)
        } else {
            false
        };
        self.quiet = if small { self.quiet + 1 } else { 0 };
        self.quiet >= 2
    }
}

/// `ᵣφₛ(a_1..a_r; b_1..b_s; q, z)
///   = Σ_k (a;q)_k / (q, b;q)_k ((-1)^k q^{k(k-1)/2})^{1+s-r} z^k`.
///
/// A numerator parameter on `q^{-ℕ}` terminates the series. A denominator
/// parameter on `q^{-ℕ}` reached before termination is a pole.
pub fn phi_rs(upper: &[C64], lower: &[C64], q: f64, z: C64) -> Result<C64> {
    phi_rs_with(upper, lower, q, z, &Precision::default())
}

/// [`phi_rs`] under an explicit truncation policy.
pub fn phi_rs_with(upper: &[C64], lower: &[C64], q: f64, z: C64, prec: &Precision) -> Result<C64> {
    phi_rs_cond_with(upper, lower, q, z, prec).map(|(v, _)| v)
}

/// [`phi_rs`] together with the ratio of the largest term to the sum, which
/// bounds the loss of relative accuracy to cancellation.
pub fn phi_rs_cond(upper: &[C64], lower: &[C64], q: f64, z: C64) -> Result<(C64, f64)> {
    phi_rs_cond_with(upper, lower, q, z, &Precision::default())
}

fn phi_rs_cond_with(upper: &[C64], lower: &[C64], q: f64, z: C64, prec: &Precision) -> Result<(C64, f64)> {
    check_base(q)?;
    let r = upper.len() as i64;
    let s = lower.len() as i64;
    let e = 1 + s - r;
    let terminates = upper.iter().any(|&a| on_lattice(a, q) && (a.norm().ln() / q.ln()).round() <= 0.0);
    if e == 0 && z.norm() >= 1.0 && !terminates {
        return Err(Error::DomainError(format!("|z| = {} >= 1 for r = s+1", z.norm())));
    }
    if e < 0 && !terminates {
        return Err(Error::DomainError("r > s+1 without termination".into()));
    }
    let one = C64::new(1.0, 0.0);
    let mut term = one;
    let mut acc = Accumulator::new(term, prec.tail_epsilon);
    let mut qk = 1.0;
    for k in 0..prec.max_terms {
        let mut num = z;
        for &a in upper {
            let y = a * qk;
            if is_unit(y) {
                return acc.finish();
            }
            num *= one - y;
        }
        let mut den = C64::new(1.0 - q * qk, 0.0);
        for &b in lower {
            let y = b * qk;
            if is_unit(y) {
                return Err(Error::TermPole(k + 1));
            }
            den *= one - y;
        }
        if e != 0 {
            num *= C64::new(-qk, 0.0).powi(e as i32);
        }
        term = term * num / den;
        let ratio = (num / den).norm();
        let rho = if e == 0 { ratio.max(z.norm()) } else { ratio };
        if acc.push(term, rho) {
            return acc.finish();
        }
        qk *= q;
    }
    Err(Error::NonConvergent(format!("{r}phi{s} at z = {z}")))
}

/// Bilateral series `₂ψ₂(a_1, a_2; b_1, b_2; q, z) = Σ_{n∈ℤ} (a_1,a_2;q)_n/(b_1,b_2;q)_n z^n`,
/// convergent for `|b_1 b_2 / (a_1 a_2 z)| < 1 < 1/|z|`.
pub fn psi22(a: [C64; 2], b: [C64; 2], q: f64, z: C64) -> Result<C64> {
    psi22_with(a, b, q, z, &Precision::default())
}

/// [`psi22`] under an explicit truncation policy.
pub fn psi22_with(a: [C64; 2], b: [C64; 2], q: f64, z: C64, prec: &Precision) -> Result<C64> {
    check_base(q)?;
    let back = (b[0] * b[1] / (a[0] * a[1] * z)).norm();
    if z.norm() >= 1.0 || back >= 1.0 {
        return Err(Error::DomainError(format!("2psi2 outside its annulus (|z| = {}, |b1b2/(a1a2z)| = {back})", z.norm())));
    }
    let one = C64::new(1.0, 0.0);
    // n >= 0
    let mut term = one;
    let mut pos = Accumulator::new(term, prec.tail_epsilon);
    let mut qk = 1.0;
    let mut done = false;
    for _ in 0..prec.max_terms {
        let num = (one - a[0] * qk) * (one - a[1] * qk) * z;
        let den = (one - b[0] * qk) * (one - b[1] * qk);
        if is_unit(b[0] * qk) || is_unit(b[1] * qk) {
            return Err(Error::TermPole(0));
        }
        term = term * num / den;
        let rho = (num / den).norm().max(z.norm());
        if pos.push(term, rho) {
            done = true;
            break;
        }
        qk *= q;
    }
    if !done {
        return Err(Error::NonConvergent("2psi2, positive side".into()));
    }
    // n < 0: t_{n-1} = t_n (1 - b_1 q^{n-1})(1 - b_2 q^{n-1}) / ((1 - a_1 q^{n-1})(1 - a_2 q^{n-1}) z)
    let mut term = one;
    let mut neg = Accumulator::new(C64::new(0.0, 0.0), prec.tail_epsilon);
    let mut qk = 1.0 / q;
    for _ in 0..prec.max_terms {
        if is_unit(a[0] * qk) || is_unit(a[1] * qk) {
            return Err(Error::PoleAtNegativeIndex);
        }
        let num = (one - b[0] * qk) * (one - b[1] * qk);
        let den = (one - a[0] * qk) * (one - a[1] * qk) * z;
        term = term * num / den;
        let rho = (num / den).norm().max(back);
        if neg.push(term, rho) {
            return finite(pos.sum + neg.sum, "2psi2");
        }
        qk /= q;
    }
    Err(Error::NonConvergent("2psi2, negative side".into()))
}

/// Big q-Jacobi polynomial `P_k(x; α, β, δ; q) = ₃φ₂(q^{-k}, αβq^{k+1}, x; αq, δq; q, q)`.
pub fn big_q_jacobi(k: u32, x: C64, alpha: C64, beta: C64, delta: C64, q: f64) -> Result<C64> {
    let qk = q.powi(-(k as i32));
    let one = C64::new(1.0, 0.0);
    // Sum the terminating series term by term; q^{-k} need not be flagged as a lattice point.
    let upper = [C64::new(qk, 0.0), alpha * beta * q.powi(k as i32 + 1), x];
    let lower = [alpha * q, delta * q];
    let mut term = one;
    let mut sum = one;
    let mut qn = 1.0;
    for n in 0..k as usize {
        let mut num = C64::new(q, 0.0);
        for &a in &upper {
            num *= one - a * qn;
        }
        let mut den = C64::new(1.0 - q * qn, 0.0);
        for &b in &lower {
            if is_unit(b * qn) {
                return Err(Error::TermPole(n + 1));
            }
            den *= one - b * qn;
        }
        term = term * num / den;
        sum += term;
        qn *= q;
    }
    finite(sum, "big q-Jacobi")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;


    /// Product of `factors` terms in double-double arithmetic.
    fn oracle_qpoch(x: C64, q: f64, factors: usize) -> C64 {
        use super::extended::{Cdd, Scalar};
        let one = Cdd::from_f64(1.0);
        let qd = Cdd::from_f64(q);
        let mut prod = one;
        let mut y = Cdd::from_c64(x);
        for _ in 0..factors {
            prod = prod * (one - y);
            y = y * qd;
        }
        prod.to_c64()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn qpoch_inf_matches_extended_product() {
        for &(x, q) in &[(c64(0.3, 0.2), 0.5), (c64(-1.7, 0.4), 0.3), (c64(2.5, -1.0), 0.7), (c64(0.9, 0.0), 0.9)] {
            let v = qpoch_inf(x, q).unwrap();
            let o = oracle_qpoch(x, q, 800);
            assert!(close(v, o, 1e-13), "{x} {q}: {v} vs {o}");
        }
    }

    #[test]
    fn qpoch_inf_lattice_zero_is_exact() {
        let v = qpoch_inf(c64(4.0, 0.0), 0.5).unwrap();
        assert_eq!(v, c64(0.0, 0.0));
        let v = qpoch_inf(c64(1.0 / 0.3 / 0.3, 0.0), 0.3).unwrap();
        assert_eq!(v, c64(0.0, 0.0));
    }

    #[test]
    fn qpoch_n_negative_index() {
        let q = 0.4;
        let x = c64(0.7, -0.2);
        for n in -5..=5i64 {
            let direct = qpoch_inf(x, q).unwrap() / qpoch_inf(x * q.powi(n as i32), q).unwrap();
            assert!(close(qpoch_n(x, q, n).unwrap(), direct, 1e-13), "n = {n}");
        }
        assert_eq!(qpoch_n(c64(0.25, 0.0), 0.5, -3), Err(Error::PoleAtNegativeIndex));
    }

    #[test]
    fn theta_reflection_and_shift() {
        let q = 0.5;
        for &x in &[c64(0.3, 0.4), c64(7.0, -2.0), c64(-0.01, 0.002), c64(130.0, 55.0)] {
            let t = theta(x, q).unwrap();
            assert!(close(theta(q / x, q).unwrap(), t, 1e-12));
            assert!(close(-x * theta(q * x, q).unwrap(), t, 1e-12));
            assert!(close(-x * theta(1.0 / x, q).unwrap(), t, 1e-12));
        }
    }

    #[test]
    fn theta_direct_product_agrees_after_reduction() {
        let q = 0.6;
        for &x in &[c64(3.0, 1.0), c64(0.02, -0.05), c64(-40.0, 9.0)] {
            let direct = qpoch_inf(x, q).unwrap() * qpoch_inf(q / x, q).unwrap();
            assert!(close(theta(x, q).unwrap(), direct, 1e-12));
        }
    }

    #[test]
    fn theta_zero_on_lattice() {
        assert_eq!(theta(c64(8.0, 0.0), 0.5).unwrap(), c64(0.0, 0.0));
        assert_eq!(theta(c64(0.125, 0.0), 0.5).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn q_binomial_theorem() {
        // 1φ0(a;;q,z) = (az;q)_∞/(z;q)_∞
        let q = 0.45;
        let a = c64(0.6, 0.3);
        let z = c64(0.2, -0.5);
        let lhs = phi_rs(&[a], &[], q, z).unwrap();
        let rhs = qpoch_inf(a * z, q).unwrap() / qpoch_inf(z, q).unwrap();
        assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn q_gauss_sum() {
        // 2φ1(a,b;c;q,c/(ab)) = (c/a, c/b;q)_∞/(c, c/(ab);q)_∞
        let q = 0.5;
        let (a, b, cc) = (c64(0.8, 0.1), c64(-0.7, 0.3), c64(0.1, 0.05));
        let z = cc / (a * b);
        assert!(z.norm() < 1.0);
        let lhs = phi_rs(&[a, b], &[cc], q, z).unwrap();
        let rhs = qpoch_inf_prod(&[cc / a, cc / b], q).unwrap() / qpoch_inf_prod(&[cc, z], q).unwrap();
        assert!(close(lhs, rhs, 1e-12), "{lhs} {rhs}");
    }

    #[test]
    fn q_chu_vandermonde_terminating() {
        // 2φ1(q^{-n}, b; c; q, q) = (c/b;q)_n / (c;q)_n b^n
        let q = 0.6;
        let (b, cc) = (c64(0.7, 0.2), c64(0.3, -0.4));
        for n in 0..6 {
            let lhs = phi_rs(&[c64(q.powi(-n), 0.0), b], &[cc], q, c64(q, 0.0)).unwrap();
            let rhs = qpoch_n(cc / b, q, n as i64).unwrap() / qpoch_n(cc, q, n as i64).unwrap() * b.powi(n);
            assert!(close(lhs, rhs, 1e-11), "n = {n}");
        }
    }

    #[test]
    fn ramanujan_1psi1() {
        // 1ψ1 obtained from 2ψ2 with a_2 = b_2 = 0 is not allowed here; use
        // 2ψ2(a, e; b, e; q, z) = 1ψ1(a; b; q, z) = (q, b/a, az, q/(az); q)_∞ / (b, q/a, z, b/(az); q)_∞.
        let q = 0.5;
        let (a, b, z, e) = (c64(1.3, 0.2), c64(0.4, -0.1), c64(0.6, 0.1), c64(2.7, 0.9));
        let lhs = psi22([a, e], [b, e], q, z).unwrap();
        let rhs = qpoch_inf_prod(&[c64(q, 0.0), b / a, a * z, q / (a * z)], q).unwrap()
            / qpoch_inf_prod(&[b, q / a, z, b / (a * z)], q).unwrap();
        assert!(close(lhs, rhs, 1e-12), "{lhs} {rhs}");
    }

    #[test]
    fn phi_rs_rejects_divergent_argument() {
        assert!(matches!(phi_rs(&[c64(0.1, 0.0), c64(0.2, 0.0)], &[c64(0.3, 0.0)], 0.5, c64(1.5, 0.0)), Err(Error::DomainError(_))));
    }

    #[test]
    fn phi_rs_pole() {
        let r = phi_rs(&[c64(0.1, 0.0)], &[c64(4.0, 0.0)], 0.5, c64(0.5, 0.0));
        assert!(matches!(r, Err(Error::TermPole(_))));
    }

    #[test]
    fn big_q_jacobi_low_degree() {
        let q = 0.5;
        let (al, be, de) = (c64(0.3, 0.0), c64(0.7, 0.0), c64(0.4, 0.0));
        let x = c64(0.9, 0.0);
        assert!(close(big_q_jacobi(0, x, al, be, de, q).unwrap(), c64(1.0, 0.0), 1e-15));
        let p1 = big_q_jacobi(1, x, al, be, de, q).unwrap();
        let one = c64(1.0, 0.0);
        let expect = one + (one - 1.0 / q) * (one - al * be * q * q) * (one - x) * q / ((1.0 - q) * (one - al * q) * (one - de * q));
        assert!(close(p1, expect, 1e-14));
    }
}
