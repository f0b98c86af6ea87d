//! The list of checks and the invariants they cover.

use super::checks::{eigen, grid, qcore, spectral, transform};
use super::{Context, Outcome, Rng};
use crate::Result;

/// A registered check.
pub struct CheckSpec {
    pub suite: &'static str,
    pub id: &'static str,
    /// Short description of the identity being tested.
    pub anchor: &'static str,
    pub tolerance: f64,
    /// Labels from [`INVARIANTS`] this check establishes.
    pub covers: &'static [&'static str],
    pub run: fn(&Context, &mut Rng) -> Result<Outcome>,
}

/// Every module invariant that the registry must cover.
pub const INVARIANTS: &[&str] = &[
    "qcore.theta_product",
    "qcore.qpoch_shift",
    "qcore.theta_reflection_shift",
    "qcore.terminating_series",
    "grid.lagrange_identity",
    "grid.casorati_decay",
    "grid.weight_positive",
    "grid.kz_two_ways",
    "eigen.residual",
    "eigen.boundary_matching",
    "eigen.phi_polynomial",
    "eigen.big_phi_polynomial",
    "eigen.casorati_constancy",
    "eigen.v_closed_form",
    "spectral.orth_varphi_big_phi",
    "spectral.orth_relations",
    "spectral.spectrum_structure",
    "spectral.no_mass_off_spectrum",
    "transform.plancherel",
    "transform.roundtrip",
    "transform.diagonalization",
    "transform.fg1g2",
    "transform.j_theta_coverage",
];

macro_rules! check {
    ($suite:literal, $id:literal, $anchor:literal, $tol:expr, [$($c:literal),*], $f:path) => {
        CheckSpec { suite: $suite, id: $id, anchor: $anchor, tolerance: $tol, covers: &[$($c),*], run: $f }
    };
}

pub static REGISTRY: &[CheckSpec] = &[
    check!("theta", "theta.product_identity", "three-term theta product identity", 1e-10, ["qcore.theta_product"], qcore::theta_product),
    check!("theta", "theta.qpoch_shift", "(x;q)_n (xq^n;q)_inf = (x;q)_inf", 1e-12, ["qcore.qpoch_shift"], qcore::qpoch_shift),
    check!("theta", "theta.reflection_shift", "theta(q/x) = theta(x) and quasi-periodicity", 1e-10, ["qcore.theta_reflection_shift"], qcore::theta_reflection_shift),
    check!("theta", "theta.terminating_series", "terminating 3phi2 against its finite sum", 1e-12, ["qcore.terminating_series"], qcore::terminating_series),
    check!("grid", "grid.lagrange_identity", "truncated Green identity with Casorati boundary terms", 1e-10, ["grid.lagrange_identity"], grid::lagrange_identity),
    check!("grid", "grid.casorati_decay", "Casorati determinant vanishes off the support", 1e-10, ["grid.casorati_decay"], grid::casorati_decay),
    check!("grid", "grid.weight_positive", "w > 0 on the window", 1e-12, ["grid.weight_positive"], grid::weight_positive),
    check!("grid", "grid.kz_two_ways", "K_z closed form against the large-x limit of w", 1e-8, ["grid.kz_two_ways"], grid::kz_two_ways),
    check!("eigen", "eigen.residual", "(L - mu) f = 0 for the constructed eigenfunctions", 1e-9, ["eigen.residual"], eigen::eigen_residual_check),
    check!("eigen", "eigen.boundary_matching", "values and q-derivatives match across the origin", 1e-8, ["eigen.boundary_matching"], eigen::boundary_matching),
    check!("eigen", "eigen.c_expansion", "phi = c(g) Phi_g + c(1/g) Phi_1/g", 1e-9, [], eigen::c_expansion),
    check!("eigen", "eigen.casorati_constancy", "Casorati determinant of two eigenfunctions is constant", 1e-9, ["eigen.casorati_constancy"], eigen::casorati_constancy),
    check!("eigen", "eigen.casorati_closed_forms", "D(Phi_g, Phi_1/g) and D(phi, phi dagger) closed forms", 1e-8, [], eigen::casorati_closed_forms),
    check!("eigen", "eigen.v_closed_form", "D(Phi+, Phi-) = v(g)", 1e-8, ["eigen.v_closed_form"], eigen::v_closed_form),
    check!("polynomial", "polynomial.phi", "phi = C_k phi dagger = big q-Jacobi polynomial at g = s q^k", 1e-9, ["eigen.phi_polynomial"], eigen::phi_polynomial),
    check!("polynomial", "polynomial.big_phi", "Phi at g = 1/(s q^k) is a multiple of phi dagger", 1e-9, ["eigen.big_phi_polynomial"], eigen::big_phi_polynomial),
    check!("spectral", "spectral.green_decomposition", "jump of the Green kernel across the circle", 1e-8, [], spectral::green_decomposition),
    check!("spectral", "spectral.uv_identity", "u(g) v(g) = I", 1e-8, [], spectral::uv_identity),
    check!("spectral", "spectral.density_positive", "circle density is Hermitian positive definite", 1e-10, [], spectral::density_positive),
    check!("spectral", "spectral.weights_residue", "N(g) closed form against the Green-kernel residue", 1e-6, [], spectral::weights_residue),
    check!("spectral", "spectral.summation_formula", "integral of w against its closed form", 1e-8, [], spectral::summation_formula),
    check!("spectral", "spectral.no_mass_off_spectrum", "resolvent has no mass off the spectrum", 1e-8, ["spectral.no_mass_off_spectrum"], spectral::no_mass_off_spectrum),
    check!("orthogonality", "orthogonality.varphi_big_phi", "<phi_g, Phi+_g'> = 0 for g on the circle, g' in Gamma", 1e-6, ["spectral.orth_varphi_big_phi"], spectral::orth_varphi_big_phi),
    check!("orthogonality", "orthogonality.discrete", "<Phi+_g, Phi+_g'> sqrt(N N') = delta", 1e-6, ["spectral.orth_relations"], spectral::orth_relations),
    check!("spectrum", "spectrum.dense", "truncated eigenvalues lie near [-2,2] and mu(Gamma)", 5e-3, ["spectral.spectrum_structure"], spectral::spectrum_dense),
    check!("spectrum", "spectrum.discrete", "mu(Gamma) appears in the truncated spectrum", 1e-4, ["spectral.spectrum_structure"], spectral::spectrum_discrete),
    check!("plancherel", "plancherel.isometry", "<Ff, Fg>_H = <f, g>", 1e-6, ["transform.plancherel"], transform::plancherel),
    check!("plancherel", "plancherel.roundtrip", "G F = id on point masses", 1e-6, ["transform.roundtrip"], transform::roundtrip),
    check!("transform", "transform.diagonalization", "F(Lf) = mu Ff", 1e-7, ["transform.diagonalization"], transform::diagonalization),
    check!("transform", "transform.fg1g2", "J-circle part of the circle transform equals u g", 1e-4, ["transform.fg1g2"], transform::fg1g2),
    check!("transform", "transform.right_inverse", "F G = id on smooth circle data", 1e-4, [], transform::right_inverse),
    check!("transform", "transform.j_theta", "Theta J = F and J is isometric into M", 1e-9, ["transform.j_theta_coverage"], transform::j_theta),
];
