//! The transform pair `F`, `G` between `L²(R_q, w)` and `H = H_c ⊕ H_p`, and
//! the equivalent transform `J` with its map `Θ`.
//!
//! Circle data is stored on the upper half circle `γ = e^{iψ}`, `0 < ψ < π`;
//! the circle part of every inner product is `(1/2π) ∫₀^π … dψ`.

use crate::eigen::{big_phi_native, c_fn, d_fn, phi_dagger_grid, phi_grid};
use crate::grid::{jackson_mass, weight_w, Branch, Grid, GridFunction, Params};
use crate::spectral::{asymptotic_density, gamma_for_window, hermitian_density, matrix_u, AsymptoticDensity, n_weight, DensityMatrix2, Family, GammaPoint};
use crate::{c64, Error, Result, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn zero() -> C64 {
    c64(0.0, 0.0)
}

/// Composite Gauss–Legendre rule on `(0, π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = t;
                p0 = 1.0;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

impl CircleQuadrature {
    /// `count` nodes in `panels` equal panels; `count` must be a multiple of
    /// `panels`.
    pub fn new(count: usize, panels: usize) -> Result<CircleQuadrature> {
        if panels == 0 || count == 0 || !count.is_multiple_of(panels) {
            return Err(Error::Config(format!("{count} nodes cannot be split into {panels} panels")));
        }
        let m = count / panels;
        let (x, w) = gauss_legendre(m);
        let h = PI / panels as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for j in 0..panels {
            let mid = (j as f64 + 0.5) * h;
            for i in 0..m {
                nodes.push(mid + 0.5 * h * x[i]);
                weights.push(0.5 * h * w[i]);
            }
        }
        Ok(CircleQuadrature { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn gamma(&self, i: usize) -> C64 {
        C64::from_polar(1.0, self.nodes[i])
    }

    /// `∫₀^π h(ψ) dψ`.
    pub fn integrate(&self, h: impl Fn(f64) -> C64) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| h(t) * w).sum()
    }
}

impl Default for CircleQuadrature {
    fn default() -> Self {
        CircleQuadrature::new(400, 8).expect("default rule")
    }
}

/// Width of [`Lifted`] coordinates.
pub const LIFT: usize = 6;

/// Circle coordinates split by representation: per node, a pair in the
/// `Ψ` frame followed by the coefficients of
/// `(Φ⁻_γ, Φ⁻_{1/γ}, Φ⁺_γ, Φ⁺_{1/γ})`.
pub type Lifted = Vec<[C64; LIFT]>;

fn scale_lifted(l: &Option<Lifted>, s: impl Fn(usize) -> C64) -> Option<Lifted> {
    l.as_ref().map(|l| l.iter().enumerate().map(|(i, v)| v.map(|z| z * s(i))).collect())
}

fn axpy_lifted(a: &Option<Lifted>, s: C64, b: &Option<Lifted>) -> Option<Lifted> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| std::array::from_fn(|j| x[j] + s * y[j])).collect()),
        _ => None,
    }
}

/// An element of `H`: a pair per circle node and a scalar per `Γ` point.
///
/// Functions produced by [`Transform::forward`] also carry [`Lifted`]
/// coordinates of their circle part, which inner products and `G` use when
/// present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    pub circle: Vec<[C64; 2]>,
    pub points: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifted: Option<Lifted>,
}

impl SpectralFunction {
    pub fn new(circle: Vec<[C64; 2]>, points: Vec<C64>) -> Self {
        SpectralFunction { circle, points, lifted: None }
    }

    pub fn zeros(nodes: usize, points: usize) -> Self {
        SpectralFunction::new(vec![[zero(); 2]; nodes], vec![zero(); points])
    }

    pub fn scale(&self, s: C64) -> Self {
        SpectralFunction {
            circle: self.circle.iter().map(|v| [v[0] * s, v[1] * s]).collect(),
            points: self.points.iter().map(|v| v * s).collect(),
            lifted: scale_lifted(&self.lifted, |_| s),
        }
    }

    pub fn axpy(&self, s: C64, o: &SpectralFunction) -> Self {
        SpectralFunction {
            circle: self.circle.iter().zip(&o.circle).map(|(a, b)| [a[0] + s * b[0], a[1] + s * b[1]]).collect(),
            points: self.points.iter().zip(&o.points).map(|(a, b)| a + s * b).collect(),
            lifted: axpy_lifted(&self.lifted, s, &o.lifted),
        }
    }

    /// Drops the asymptotic coordinates.
    pub fn plain(&self) -> Self {
        SpectralFunction::new(self.circle.clone(), self.points.clone())
    }

    /// Largest entry modulus, circle and points separately.
    pub fn sup_norms(&self) -> (f64, f64) {
        let c = self.circle.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max);
        let p = self.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (c, p)
    }
}

/// An element of `M`: pairs on the circle and on `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MFunction {
    pub circle: Vec<[C64; 2]>,
    pub points: Vec<[C64; 2]>,
    pub lifted: Option<Lifted>,
}

/// `y^T`: componentwise conjugate when `a = conj b`, conjugate and swapped
/// otherwise.
pub fn transpose_conj(v: [C64; 2], p: &Params) -> [C64; 2] {
    if p.conjugate_pair() {
        [v[0].conj(), v[1].conj()]
    } else {
        [v[1].conj(), v[0].conj()]
    }
}

/// `y^T A x`.
fn bilinear_t(p: &Params, y: [C64; 2], a: &DensityMatrix2, x: [C64; 2]) -> C64 {
    let yt = transpose_conj(y, p);
    let ax = a.apply(x);
    yt[0] * ax[0] + yt[1] * ax[1]
}

/// `v_p(γ) = [[v₃, v₄], [v₁, v₂]]` on `Γ`.
///
/// On `Γ^fin_s ∪ Γ^fin_{dq/as}` only one of `v₁`, `v₂` is nonzero and
/// `v₃ = v₄ = 0`.
pub fn matrix_vp(p: &Params, g: &GammaPoint) -> Result<DensityMatrix2> {
    let gamma = g.value();
    let n = c64(n_weight(p, g)?, 0.0);
    let zp = p.z_plus;
    match g.family {
        Family::Inf | Family::FinQOverS => {
            let d = d_fn(p, zp, gamma)?;
            let dd = d_fn(&p.dagger(), zp, gamma)?;
            let (v1, v2, v1d) = (d * d * n, d * dd * n, dd * dd * n);
            Ok(DensityMatrix2::new(v2, v1d, v1, v2))
        }
        Family::FinS | Family::FinDqOverAs => {
            let c = c_fn(p, zp, gamma)?;
            if p.conjugate_pair() {
                let cd = c_fn(&p.dagger(), zp, gamma)?;
                Ok(DensityMatrix2::new(zero(), zero(), zero(), n / (c * cd)))
            } else {
                Ok(DensityMatrix2::new(zero(), zero(), n / (c * c), zero()))
            }
        }
    }
}

/// Row vector of `Θ` at a `Γ` point.
pub fn theta_row(p: &Params, g: &GammaPoint) -> Result<[C64; 2]> {
    let gamma = g.value();
    let zp = p.z_plus;
    match g.family {
        Family::Inf | Family::FinQOverS => Ok([d_fn(p, zp, gamma)?, d_fn(&p.dagger(), zp, gamma)?]),
        Family::FinS | Family::FinDqOverAs => Ok([c64(1.0, 0.0) / c_fn(p, zp, gamma)?, zero()]),
    }
}

/// `[[H, HC], [C^* H, C^* H C]]`.
fn block_density(h: &DensityMatrix2, a: &AsymptoticDensity) -> [[C64; LIFT]; LIFT] {
    let mut m = [[zero(); LIFT]; LIFT];
    for r in 0..2 {
        for t in 0..2 {
            m[r][t] = h.entries[r][t];
        }
        for t in 0..4 {
            m[r][2 + t] = a.hc[r][t];
            m[2 + t][r] = a.hc[r][t].conj();
        }
    }
    for r in 0..4 {
        for t in 0..4 {
            m[2 + r][2 + t] = a.w[r][t];
        }
    }
    m
}

struct CircleNode {
    kernel: [GridFunction; 2],
    density: DensityMatrix2,
    basis: [GridFunction; 2],
    asymptotic: AsymptoticDensity,
}

impl CircleNode {
    fn new(p: &Params, grid: Grid, g: C64) -> Result<CircleNode> {
        let gi = c64(1.0, 0.0) / g;
        let mut basis = [GridFunction::zeros(grid), GridFunction::zeros(grid)];
        for br in [Branch::Minus, Branch::Plus] {
            for (e, gv) in basis.iter_mut().zip([g, gi]) {
                *e.branch_mut(br) = big_phi_native(p, grid, gv, br)?;
            }
        }
        Ok(CircleNode {
            kernel: [phi_grid(p, grid, g)?, phi_dagger_grid(p, grid, g)?],
            density: hermitian_density(p, g)?,
            basis,
            asymptotic: asymptotic_density(p, g)?,
        })
    }
}

/// Largest `Θ` cancellation factor, in units of the normalised eigenfunction,
/// for which `J` data at a `Γ` point is used.
pub const J_RESOLUTION: f64 = 1e4;

/// Discretisation choices of a [`Transform`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformOptions {
    pub nodes: usize,
    pub panels: usize,
    /// `Γ^inf` points whose normalised eigenfunction carries less than this
    /// share of every point mass in the window are dropped.
    pub point_tol: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { nodes: 400, panels: 8, point_tol: 1e-16 }
    }
}

/// Kernel tables of `F`, `G` and `J` on a window.
#[derive(Clone, Debug)]
pub struct Transform {
    pub params: Params,
    pub grid: Grid,
    pub quad: CircleQuadrature,
    pub gammas: Vec<GammaPoint>,
    /// `N(γ)` per `Γ` point.
    pub weights: Vec<f64>,
    /// Hermitian density per circle node.
    pub density: Vec<DensityMatrix2>,
    /// `(φ_γ, φ†_γ)` per circle node.
    pub circle_kernel: Vec<[GridFunction; 2]>,
    /// `Φ⁺_γ` per `Γ` point.
    pub point_kernel: Vec<GridFunction>,
    /// `(Φ^β_γ, Φ^β_{1/γ})` per circle node, `β` the branch of the point.
    pub circle_basis: Vec<[GridFunction; 2]>,
    /// The density in [`Lifted`] coordinates per circle node.
    pub lifted_density: Vec<[[C64; LIFT]; LIFT]>,
    /// Per branch (minus first) and window index, whether `Ψ(x, ·)` is
    /// carried in the asymptotic bases. Near `γ = -1` the density is close to
    /// singular and `Ψ^* H Ψ` cancels badly for points far out on a branch;
    /// near the origin the asymptotic expansion cancels instead.
    pub far: [Vec<bool>; 2],
    /// `(φ_γ, φ†_γ)` per `Γ` point, for `J`.
    pub point_pair: Vec<[GridFunction; 2]>,
    /// `Θ` row per `Γ` point.
    theta_rows: Vec<[C64; 2]>,
    /// `w(x)(1-q)|x|` on the window.
    measure: GridFunction,
}

impl Transform {
    pub fn new(p: &Params, grid: Grid, opts: TransformOptions) -> Result<Transform> {
        let quad = CircleQuadrature::new(opts.nodes, opts.panels)?;
        let points = gamma_for_window(p, grid, opts.point_tol)?;
        Transform::build(p, grid, quad, points)
    }

    fn build(p: &Params, grid: Grid, quad: CircleQuadrature, points: Vec<(GammaPoint, GridFunction)>) -> Result<Transform> {
        let circle: Vec<Result<CircleNode>> = (0..quad.len()).into_par_iter().map(|i| CircleNode::new(p, grid, quad.gamma(i))).collect();
        let n = quad.len();
        let (mut circle_kernel, mut density, mut circle_basis, mut lifted_density) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for r in circle {
            let c = r?;
            lifted_density.push(block_density(&c.density, &c.asymptotic));
            circle_kernel.push(c.kernel);
            density.push(c.density);
            circle_basis.push(c.basis);
        }
        let far = [Branch::Minus, Branch::Plus].map(|br| {
            grid.ks()
                .map(|k| {
                    let (mut direct, mut asym) = (0.0, 0.0);
                    for i in 0..n {
                        let psi = [circle_kernel[i][0].get(br, k), circle_kernel[i][1].get(br, k)];
                        let e = [circle_basis[i][0].get(br, k), circle_basis[i][1].get(br, k)];
                        let o = if br == Branch::Minus { 2 } else { 4 };
                        let m = &lifted_density[i];
                        for r in 0..2 {
                            for t in 0..2 {
                                direct += quad.weights[i] * (psi[r] * m[r][t] * psi[t]).norm();
                                asym += quad.weights[i] * (e[r] * m[o + r][o + t] * e[t]).norm();
                            }
                        }
                    }
                    asym < direct
                })
                .collect()
        });
        let extra: Vec<Result<([GridFunction; 2], f64)>> = points
            .par_iter()
            .map(|(g, _)| {
                let gv = g.value();
                Ok(([phi_grid(p, grid, gv)?, phi_dagger_grid(p, grid, gv)?], n_weight(p, g)?))
            })
            .collect();
        let mut point_pair = Vec::with_capacity(points.len());
        let mut weights = Vec::with_capacity(points.len());
        for r in extra {
            let (pair, n) = r?;
            point_pair.push(pair);
            weights.push(n);
        }
        let (gammas, point_kernel): (Vec<GammaPoint>, Vec<GridFunction>) = points.into_iter().unzip();
        let mut measure = GridFunction::zeros(grid);
        for (br, k) in grid.points() {
            measure.set(br, k, weight_w(p, br, k)? * jackson_mass(p, br, k));
        }
        let theta_rows = gammas.iter().map(|g| theta_row(p, g)).collect::<Result<Vec<_>>>()?;
        Ok(Transform {
            params: *p,
            grid,
            quad,
            gammas,
            weights,
            density,
            circle_kernel,
            circle_basis,
            lifted_density,
            far,
            point_kernel,
            point_pair,
            theta_rows,
            measure,
        })
    }

    /// Whether `Ψ(x, ·)` is carried in the asymptotic bases.
    pub fn is_far(&self, br: Branch, k: i64) -> bool {
        let b = if br == Branch::Minus { 0 } else { 1 };
        self.far[b][(k - self.grid.k_min) as usize]
    }

    /// [`Lifted`] coordinates of `Ψ(x, γ_i)`.
    fn basis_at(&self, i: usize, br: Branch, k: i64) -> [C64; LIFT] {
        let mut out = [zero(); LIFT];
        if self.is_far(br, k) {
            let o = if br == Branch::Minus { 2 } else { 4 };
            out[o] = self.circle_basis[i][0].get(br, k);
            out[o + 1] = self.circle_basis[i][1].get(br, k);
        } else {
            out[0] = self.circle_kernel[i][0].get(br, k);
            out[1] = self.circle_kernel[i][1].get(br, k);
        }
        out
    }

    fn lift_sum(&self, terms: &[(Branch, i64, C64)]) -> Lifted {
        (0..self.quad.len())
            .map(|i| {
                let mut acc = [zero(); LIFT];
                for &(br, k, t) in terms {
                    let e = self.basis_at(i, br, k);
                    for j in 0..LIFT {
                        acc[j] += t * e[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// `g₂^* H g₁` at node `i`, using [`Lifted`] coordinates where available.
    fn circle_form(&self, i: usize, g1: ([C64; 2], Option<&[C64; LIFT]>), g2: ([C64; 2], Option<&[C64; LIFT]>)) -> C64 {
        let m = &self.lifted_density[i];
        match (g1.1, g2.1) {
            (Some(a1), Some(a2)) => (0..LIFT).map(|r| a2[r].conj() * (0..LIFT).map(|t| m[r][t] * a1[t]).sum::<C64>()).sum(),
            (Some(a1), None) => (0..2).map(|r| g2.0[r].conj() * (0..LIFT).map(|t| m[r][t] * a1[t]).sum::<C64>()).sum(),
            (None, Some(a2)) => (0..LIFT).map(|r| a2[r].conj() * (0..2).map(|t| m[r][t] * g1.0[t]).sum::<C64>()).sum(),
            (None, None) => {
                let hg = self.density[i].apply(g1.0);
                g2.0[0].conj() * hg[0] + g2.0[1].conj() * hg[1]
            }
        }
    }

    fn check_support(&self, f: &GridFunction) -> Result<Vec<(Branch, i64, C64)>> {
        let mut out = Vec::new();
        for (br, k) in f.support() {
            if !self.grid.contains(k) {
                return Err(Error::GridMismatch);
            }
            out.push((br, k, f.get(br, k) * self.measure.get(br, k)));
        }
        Ok(out)
    }

    /// `(Ff)(γ) = ∫ f(x) Ψ(x, γ) w(x) d_q x` for finitely supported `f`.
    pub fn forward(&self, f: &GridFunction) -> Result<SpectralFunction> {
        let terms = self.check_support(f)?;
        let sum = |h: &GridFunction| terms.iter().map(|&(br, k, t)| t * h.get(br, k)).sum::<C64>();
        Ok(SpectralFunction {
            circle: self.circle_kernel.iter().map(|[a, b]| [sum(a), sum(b)]).collect(),
            points: self.point_kernel.iter().map(&sum).collect(),
            lifted: Some(self.lift_sum(&terms)),
        })
    }

    /// `(Jf)(γ) = ∫ f(x) (φ_γ(x), φ†_γ(x)) w(x) d_q x`.
    pub fn forward_j(&self, f: &GridFunction) -> Result<MFunction> {
        let terms = self.check_support(f)?;
        let sum = |h: &GridFunction| terms.iter().map(|&(br, k, t)| t * h.get(br, k)).sum::<C64>();
        Ok(MFunction {
            circle: self.circle_kernel.iter().map(|[a, b]| [sum(a), sum(b)]).collect(),
            points: self.point_pair.iter().map(|[a, b]| [sum(a), sum(b)]).collect(),
            lifted: Some(self.lift_sum(&terms)),
        })
    }

    fn circle_part(&self, g1: (&[[C64; 2]], &Option<Lifted>), g2: (&[[C64; 2]], &Option<Lifted>)) -> C64 {
        let mut acc = zero();
        for i in 0..self.quad.len() {
            let a1 = g1.1.as_ref().map(|l| &l[i]);
            let a2 = g2.1.as_ref().map(|l| &l[i]);
            acc += self.circle_form(i, (g1.0[i], a1), (g2.0[i], a2)) * self.quad.weights[i];
        }
        acc / (2.0 * PI)
    }

    fn check_lifted(&self, l: &Option<Lifted>) -> Result<()> {
        match l {
            Some(l) if l.len() != self.quad.len() => Err(Error::QuadratureNotConverged(format!(
                "asymptotic data has {} nodes, the transform uses {}",
                l.len(),
                self.quad.len()
            ))),
            _ => Ok(()),
        }
    }

    fn check_shape(&self, circle: usize, points: usize) -> Result<()> {
        if circle != self.quad.len() || points != self.gammas.len() {
            return Err(Error::QuadratureNotConverged(format!(
                "spectral data has {circle} nodes and {points} points, the transform uses {} and {}",
                self.quad.len(),
                self.gammas.len()
            )));
        }
        Ok(())
    }

    /// `⟨g₁, g₂⟩_H`.
    pub fn inner_h(&self, g1: &SpectralFunction, g2: &SpectralFunction) -> Result<C64> {
        for g in [g1, g2] {
            self.check_shape(g.circle.len(), g.points.len())?;
            self.check_lifted(&g.lifted)?;
        }
        let disc: C64 = g1.points.iter().zip(&g2.points).zip(&self.weights).map(|((a, b), n)| a * b.conj() * n).sum();
        Ok(self.circle_part((&g1.circle, &g1.lifted), (&g2.circle, &g2.lifted)) + disc)
    }

    /// `⟨g₁, g₂⟩_M`.
    pub fn inner_m(&self, g1: &MFunction, g2: &MFunction) -> Result<C64> {
        for g in [g1, g2] {
            self.check_shape(g.circle.len(), g.points.len())?;
            self.check_lifted(&g.lifted)?;
        }
        let mut disc = zero();
        for (j, g) in self.gammas.iter().enumerate() {
            disc += bilinear_t(&self.params, g2.points[j], &matrix_vp(&self.params, g)?, g1.points[j]);
        }
        Ok(self.circle_part((&g1.circle, &g1.lifted), (&g2.circle, &g2.lifted)) + disc)
    }

    /// `Θ` cancellation factor of the `J` kernel at `Γ` point `j` and `x`, in
    /// units of the normalised eigenfunction. Away from the origin `φ_γ` and
    /// `φ†_γ` at deep points are dominated by a growing solution that the `Θ`
    /// row cancels; `J` data carries an absolute error of about `2^-52` times
    /// this factor.
    pub fn j_condition(&self, j: usize, br: Branch, k: i64) -> f64 {
        let r = self.theta_rows[j];
        let [a, b] = &self.point_pair[j];
        let t = (r[0] * a.get(br, k)).norm() + (r[1] * b.get(br, k)).norm();
        let c = t * (self.weights[j] * self.measure(br, k)).sqrt();
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    }

    /// Per `Γ` point, whether [`Transform::j_condition`] stays below
    /// [`J_RESOLUTION`] on the supports of `fs`.
    pub fn j_resolved(&self, fs: &[&GridFunction]) -> Vec<bool> {
        let support: Vec<(Branch, i64)> = fs.iter().flat_map(|f| f.support()).collect();
        (0..self.gammas.len()).map(|j| support.iter().all(|&(br, k)| self.j_condition(j, br, k) < J_RESOLUTION)).collect()
    }

    /// Circle part of `⟨g₁, g₂⟩_M` plus the `Γ` terms where `mask` holds.
    pub fn inner_m_masked(&self, g1: &MFunction, g2: &MFunction, mask: &[bool]) -> Result<C64> {
        for g in [g1, g2] {
            self.check_shape(g.circle.len(), g.points.len())?;
            self.check_lifted(&g.lifted)?;
        }
        let mut disc = zero();
        for (j, g) in self.gammas.iter().enumerate() {
            if mask[j] {
                disc += bilinear_t(&self.params, g2.points[j], &matrix_vp(&self.params, g)?, g1.points[j]);
            }
        }
        Ok(self.circle_part((&g1.circle, &g1.lifted), (&g2.circle, &g2.lifted)) + disc)
    }

    /// `Σ N(γ) g₁(γ) conj(g₂(γ))` over the `Γ` points where `mask` holds.
    pub fn inner_h_points(&self, g1: &SpectralFunction, g2: &SpectralFunction, mask: &[bool]) -> Result<C64> {
        self.check_shape(g1.circle.len(), g1.points.len())?;
        self.check_shape(g2.circle.len(), g2.points.len())?;
        Ok((0..self.gammas.len()).filter(|&j| mask[j]).map(|j| g1.points[j] * g2.points[j].conj() * self.weights[j]).sum())
    }

    /// `(Gg)(x) = ⟨g, Ψ(x, ·)⟩_H` on the window.
    pub fn inverse(&self, g: &SpectralFunction) -> Result<GridFunction> {
        self.check_shape(g.circle.len(), g.points.len())?;
        self.check_lifted(&g.lifted)?;
        let out = GridFunction::from_fn(self.grid, |br, k| {
            let mut c = zero();
            for i in 0..self.quad.len() {
                let e = self.basis_at(i, br, k);
                let psi = [self.circle_kernel[i][0].get(br, k), self.circle_kernel[i][1].get(br, k)];
                let a = g.lifted.as_ref().map(|l| &l[i]);
                c += self.circle_form(i, (g.circle[i], a), (psi, Some(&e))) * self.quad.weights[i];
            }
            let mut d = zero();
            for (j, big) in self.point_kernel.iter().enumerate() {
                d += g.points[j] * big.get(br, k).conj() * self.weights[j];
            }
            c / (2.0 * PI) + d
        });
        Ok(out)
    }

    /// `Θ: M → H`.
    pub fn theta_map(&self, g: &MFunction) -> Result<SpectralFunction> {
        let mut points = Vec::with_capacity(self.gammas.len());
        for (j, gp) in self.gammas.iter().enumerate() {
            let r = theta_row(&self.params, gp)?;
            points.push(r[0] * g.points[j][0] + r[1] * g.points[j][1]);
        }
        Ok(SpectralFunction { circle: g.circle.clone(), points, lifted: g.lifted.clone() })
    }

    /// `I = G ∘ Θ`.
    pub fn inverse_j(&self, g: &MFunction) -> Result<GridFunction> {
        self.inverse(&self.theta_map(g)?)
    }

    /// `μ(γ) g(γ)`.
    pub fn multiply_mu(&self, g: &SpectralFunction) -> SpectralFunction {
        SpectralFunction {
            circle: g.circle.iter().enumerate().map(|(i, v)| {
                let mu = 2.0 * self.quad.nodes[i].cos();
                [v[0] * mu, v[1] * mu]
            }).collect(),
            points: g.points.iter().zip(&self.gammas).map(|(v, gp)| v * gp.mu()).collect(),
            lifted: scale_lifted(&g.lifted, |i| c64(2.0 * self.quad.nodes[i].cos(), 0.0)),
        }
    }

    /// `Ψ(x, ·)` as an element of `H`.
    pub fn kernel_at(&self, br: Branch, k: i64) -> SpectralFunction {
        SpectralFunction {
            circle: self.circle_kernel.iter().map(|[a, b]| [a.get(br, k), b.get(br, k)]).collect(),
            points: self.point_kernel.iter().map(|h| h.get(br, k)).collect(),
            lifted: Some((0..self.quad.len()).map(|i| self.basis_at(i, br, k)).collect()),
        }
    }

    /// Samples a circle function `ψ ↦ g(e^{iψ})` on the nodes, zero on `Γ`.
    pub fn sample_circle(&self, g: impl Fn(f64) -> [C64; 2]) -> SpectralFunction {
        SpectralFunction::new(self.quad.nodes.iter().map(|&t| g(t)).collect(), vec![zero(); self.gammas.len()])
    }

    /// `g(e^{iψ}) = sin^order(ψ) (P₁(cos ψ), P₂(cos ψ))`, zero on `Γ`;
    /// polynomial coefficients in ascending order.
    pub fn c0_function(&self, p1: &[C64], p2: &[C64], order: i32) -> SpectralFunction {
        let horner = |c: &[C64], x: f64| c.iter().rev().fold(zero(), |acc, &a| acc * x + a);
        self.sample_circle(|t| {
            let w = t.sin().powi(order);
            [horner(p1, t.cos()) * w, horner(p2, t.cos()) * w]
        })
    }

    /// `x ↦ (1/2π) ∫₀^π Ψ(x, γ)^T g(γ) dψ`, the circle integral without the
    /// density.
    pub fn circle_transform(&self, g: &SpectralFunction) -> Result<GridFunction> {
        self.check_shape(g.circle.len(), g.points.len())?;
        Ok(GridFunction::from_fn(self.grid, |br, k| {
            let mut c = zero();
            for (i, [a, b]) in self.circle_kernel.iter().enumerate() {
                let y = transpose_conj([a.get(br, k), b.get(br, k)], &self.params);
                c += (y[0] * g.circle[i][0] + y[1] * g.circle[i][1]) * self.quad.weights[i];
            }
            c / (2.0 * PI)
        }))
    }

    /// `u(γ) g(γ)` on the circle nodes; `Γ` values are dropped.
    pub fn apply_u(&self, g: &SpectralFunction) -> Result<SpectralFunction> {
        self.check_shape(g.circle.len(), g.points.len())?;
        let mut circle = Vec::with_capacity(g.circle.len());
        for (i, v) in g.circle.iter().enumerate() {
            circle.push(matrix_u(&self.params, self.quad.gamma(i))?.apply(*v));
        }
        Ok(SpectralFunction::new(circle, vec![zero(); self.gammas.len()]))
    }

    /// Combines `base - α g₁ - β g₂` so that `op` of the result vanishes at
    /// the innermost window point of both branches. Functions whose image
    /// tends to zero at the origin have negligible mass beyond a window of
    /// moderate depth, so window truncation does not mask the comparison.
    pub fn vanishing_at_origin(
        &self,
        base: &SpectralFunction,
        aux: [&SpectralFunction; 2],
        op: impl Fn(&SpectralFunction) -> Result<GridFunction>,
    ) -> Result<(SpectralFunction, GridFunction)> {
        let f0 = op(base)?;
        let (f1, f2) = (op(aux[0])?, op(aux[1])?);
        let k = self.grid.k_max;
        let at = |f: &GridFunction| (f.get(Branch::Plus, k), f.get(Branch::Minus, k));
        let ((a0, b0), (a1, b1), (a2, b2)) = (at(&f0), at(&f1), at(&f2));
        let det = a1 * b2 - a2 * b1;
        if det.norm() == 0.0 {
            return Err(Error::DomainError("auxiliary functions do not control the origin values".into()));
        }
        let al = (a0 * b2 - a2 * b0) / det;
        let be = (a1 * b0 - a0 * b1) / det;
        let g = base.axpy(-al, aux[0]).axpy(-be, aux[1]);
        let f = f0.axpy(-al, &f1).axpy(-be, &f2);
        Ok((g, f))
    }

    /// `‖g‖_H`.
    pub fn norm_h(&self, g: &SpectralFunction) -> Result<f64> {
        Ok(self.inner_h(g, g)?.re.max(0.0).sqrt())
    }

    /// `w(x)(1-q)|x|` at a window point.
    pub fn measure(&self, br: Branch, k: i64) -> f64 {
        self.measure.get(br, k).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::apply_l;
    use crate::spectral::bound_state_grid;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
        let q = CircleQuadrature::default();
        assert_eq!(q.len(), 400);
        assert!((q.weights.iter().sum::<f64>() - PI).abs() < 1e-12);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        let sin2 = q.integrate(|t| c64(t.sin().powi(2), 0.0));
        assert!((sin2.re - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn transpose_conj_cases() {
        let p1 = Params::preset("ps1").unwrap();
        let p2 = Params::preset("ps2").unwrap();
        let v = [c64(1.0, 2.0), c64(3.0, -1.0)];
        assert_eq!(transpose_conj(v, &p1), [c64(1.0, -2.0), c64(3.0, 1.0)]);
        assert_eq!(transpose_conj([c64(1.0, 0.0), zero()], &p2), [zero(), c64(1.0, 0.0)]);
    }

    fn small(p: &Params) -> Transform {
        Transform::new(p, Grid::new(-12, 12).unwrap(), TransformOptions::default()).unwrap()
    }

    #[test]
    fn plancherel_on_deltas() {
        for n in ["ps1", "ps2", "ps3"] {
            let p = Params::preset(n).unwrap();
            let t = small(&p);
            for (b1, k1, b2, k2) in [(Branch::Plus, 0, Branch::Plus, 0), (Branch::Minus, 2, Branch::Minus, 2), (Branch::Plus, 1, Branch::Minus, 1), (Branch::Plus, -3, Branch::Plus, -3), (Branch::Minus, 5, Branch::Plus, 4), (Branch::Plus, -12, Branch::Plus, -12), (Branch::Plus, -11, Branch::Minus, -12), (Branch::Plus, 12, Branch::Plus, 12)] {
                let f1 = GridFunction::delta(t.grid, b1, k1);
                let f2 = GridFunction::delta(t.grid, b2, k2);
                let lhs = t.inner_h(&t.forward(&f1).unwrap(), &t.forward(&f2).unwrap()).unwrap();
                let rhs = if (b1, k1) == (b2, k2) { c64(t.measure(b1, k1), 0.0) } else { zero() };
                let scale = (t.measure(b1, k1) * t.measure(b2, k2)).sqrt();
                assert!((lhs - rhs).norm() < 1e-9 * scale, "{n} {b1:?}{k1} {b2:?}{k2}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn roundtrip_and_diagonalization() {
        let p = Params::preset("ps1").unwrap();
        let t = small(&p);
        let mut f = GridFunction::zeros(t.grid);
        f.set(Branch::Plus, 1, c64(0.3, -0.2));
        f.set(Branch::Minus, 0, c64(-1.1, 0.4));
        f.set(Branch::Plus, 3, c64(0.7, 0.0));
        let g = t.forward(&f).unwrap();
        let back = t.inverse(&g).unwrap();
        let err = back.axpy(c64(-1.0, 0.0), &f).sup_norm();
        assert!(err < 1e-6 * f.sup_norm(), "round trip {err}");
        let lf = t.forward(&apply_l(&p, &f)).unwrap();
        let mf = t.multiply_mu(&g);
        let d = lf.axpy(c64(-1.0, 0.0), &mf).sup_norms();
        let s = mf.sup_norms();
        assert!(d.0 < 1e-7 * s.0.max(s.1) && d.1 < 1e-7 * s.0.max(s.1), "{d:?} {s:?}");
    }

    fn one() -> C64 {
        c64(1.0, 0.0)
    }

    fn test_pair(t: &Transform) -> (SpectralFunction, [SpectralFunction; 2]) {
        let base = t.c0_function(&[one(), c64(0.5, 0.0)], &[c64(0.2, 0.0), c64(0.0, 0.3)], 7);
        let a1 = t.c0_function(&[zero(), zero(), one()], &[], 7);
        let a2 = t.c0_function(&[], &[zero(), one()], 7);
        (base, [a1, a2])
    }

    #[test]
    fn right_inverse_on_circle_part() {
        for n in ["ps1", "ps3"] {
            let p = Params::preset(n).unwrap();
            let t = Transform::new(&p, Grid::new(-40, 12).unwrap(), TransformOptions::default()).unwrap();
            let (base, aux) = test_pair(&t);
            let (g, f) = t.vanishing_at_origin(&base, [&aux[0], &aux[1]], |h| t.inverse(h)).unwrap();
            let back = t.forward(&f).unwrap().plain();
            let err = t.norm_h(&back.axpy(-one(), &g)).unwrap() / t.norm_h(&g).unwrap();
            assert!(err < 1e-4, "{n}: {err}");
        }
    }

    #[test]
    fn circle_transform_gives_u() {
        let p = Params::preset("ps2").unwrap();
        let t = Transform::new(&p, Grid::new(-40, 12).unwrap(), TransformOptions::default()).unwrap();
        let (base, aux) = test_pair(&t);
        let (g, f) = t.vanishing_at_origin(&base, [&aux[0], &aux[1]], |h| t.circle_transform(h)).unwrap();
        let lhs = SpectralFunction::new(t.forward_j(&f).unwrap().circle, vec![zero(); t.gammas.len()]);
        let ug = t.apply_u(&g).unwrap();
        let err = t.norm_h(&lhs.axpy(-one(), &ug)).unwrap() / t.norm_h(&ug).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    /// `‖f‖²` on the window.
    fn window_norm2(t: &Transform, f: &GridFunction) -> f64 {
        t.grid.points().into_iter().map(|(br, k)| f.get(br, k).norm_sqr() * t.measure(br, k)).sum()
    }

    // `G g` and `Φ⁺` are not finitely supported. With `1_W` the window
    // indicator, `‖F(1_W h) - F h‖_H = ‖h - 1_W h‖`, which is known from
    // `‖h‖` and the window sum.

    #[test]
    fn right_inverse_on_point_part() {
        let p = Params::preset("ps3").unwrap();
        let t = Transform::new(&p, Grid::new(-60, 12).unwrap(), TransformOptions::default()).unwrap();
        let mut g = SpectralFunction::zeros(t.quad.len(), t.gammas.len());
        g.points[0] = c64(0.7, -0.1);
        g.points[1] = c64(-0.3, 0.0);
        g.points[2] = c64(0.0, 1.2);
        let f = t.inverse(&g).unwrap();
        let back = t.forward(&f).unwrap();
        let d = t.norm_h(&back.plain().axpy(-one(), &g)).unwrap();
        let ng = t.norm_h(&g).unwrap();
        let tail = (ng * ng - window_norm2(&t, &f)).max(0.0).sqrt();
        assert!((d - tail).abs() < 1e-6 * ng, "{d} {tail}");
        assert!(tail < 0.01 * ng);
    }

    #[test]
    fn forward_of_bound_state_is_a_point_mass() {
        let p = Params::preset("ps3").unwrap();
        let t = Transform::new(&p, Grid::new(-60, 12).unwrap(), TransformOptions::default()).unwrap();
        for j in [0, 1, 3] {
            let f = bound_state_grid(&p, t.grid, &t.gammas[j]).unwrap();
            let n = t.weights[j];
            let mut want = SpectralFunction::zeros(t.quad.len(), t.gammas.len());
            want.points[j] = c64(1.0 / n, 0.0);
            let d = t.norm_h(&t.forward(&f).unwrap().axpy(-one(), &want)).unwrap();
            let tail = (1.0 / n - window_norm2(&t, &f)).max(0.0).sqrt();
            assert!((d - tail).abs() * n.sqrt() < 1e-6, "{j}: {d} {tail}");
        }
    }

    #[test]
    fn j_transform_and_theta() {
        for n in ["ps1", "ps2", "ps3"] {
            let p = Params::preset(n).unwrap();
            let t = small(&p);
            let pts = [(Branch::Plus, 3), (Branch::Minus, 3), (Branch::Plus, 12), (Branch::Minus, 9), (Branch::Minus, -2), (Branch::Plus, 6)];
            let deltas: Vec<GridFunction> = pts.iter().map(|&(b, k)| GridFunction::delta(t.grid, b, k)).collect();
            let mask = t.j_resolved(&deltas.iter().collect::<Vec<_>>());
            let unresolved: Vec<bool> = mask.iter().map(|m| !m).collect();
            // every family present has a resolved point
            for g in &t.gammas {
                assert!(t.gammas.iter().zip(&mask).any(|(h, &m)| m && h.family == g.family), "{n}: {:?} {mask:?}", g.family);
            }
            for (i1, f1) in deltas.iter().enumerate() {
                let (b1, k1) = pts[i1];
                let j1 = t.forward_j(f1).unwrap();
                let th = t.theta_map(&j1).unwrap();
                let fw = t.forward(f1).unwrap();
                let scale = t.measure(b1, k1);
                for (j, (a, b)) in th.points.iter().zip(&fw.points).enumerate() {
                    if mask[j] {
                        let err = (a - b).norm() * (t.weights[j] / scale).sqrt();
                        assert!(err < 1e-9, "{n} Θ at {j}: {a} {b}");
                    }
                }
                for (i2, f2) in deltas.iter().enumerate() {
                    let (b2, k2) = pts[i2];
                    let j2 = t.forward_j(f2).unwrap();
                    let m = t.inner_m_masked(&j1, &j2, &mask).unwrap() + t.inner_h_points(&fw, &t.forward(f2).unwrap(), &unresolved).unwrap();
                    let want = if i1 == i2 { scale } else { 0.0 };
                    let s = (scale * t.measure(b2, k2)).sqrt();
                    assert!((m - want).norm() < 1e-9 * s, "{n} M {b1:?}{k1} {b2:?}{k2}: {m}");
                }
            }
        }
    }
}
