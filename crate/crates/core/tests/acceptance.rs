//! Acceptance criteria, one line of output per criterion.
//!
//! Each criterion names the registry checks it consists of, the parameter
//! sets they run on, the tolerance each check must be registered with, and a
//! wall-clock budget. A criterion passes when every listed check runs (none
//! may be skipped), meets its tolerance, and the whole criterion finishes
//! within the budget. Runs as a plain binary so the lines are always shown.

use std::time::Instant;

use qjacobi::harness::{run_check, ParamSpec, RunConfig, REGISTRY};

struct Criterion {
    number: u32,
    title: &'static str,
    budget_s: f64,
    /// `(preset, suite.check, tolerance)`.
    checks: &'static [(&'static str, &'static str, f64)],
}

const CRITERIA: &[Criterion] = &[
    Criterion { number: 1, title: "theta product identity", budget_s: 1.0, checks: &[("ps1", "theta.product_identity", 1e-10)] },
    Criterion {
        number: 2,
        title: "eigen-equation residuals",
        budget_s: 10.0,
        checks: &[("ps1", "eigen.residual", 1e-9), ("ps2", "eigen.residual", 1e-9)],
    },
    Criterion { number: 3, title: "c-function expansion", budget_s: 10.0, checks: &[("ps1", "eigen.c_expansion", 1e-9)] },
    Criterion {
        number: 4,
        title: "Casorati closed forms",
        budget_s: 10.0,
        checks: &[("ps1", "eigen.casorati_closed_forms", 1e-8), ("ps1", "eigen.v_closed_form", 1e-8)],
    },
    Criterion { number: 5, title: "Green-kernel decomposition", budget_s: 5.0, checks: &[("ps1", "spectral.green_decomposition", 1e-8)] },
    Criterion { number: 6, title: "u v = I", budget_s: 5.0, checks: &[("ps1", "spectral.uv_identity", 1e-8)] },
    Criterion {
        number: 7,
        title: "discrete orthogonality",
        budget_s: 30.0,
        checks: &[("ps1", "orthogonality.discrete", 1e-6), ("ps2", "orthogonality.discrete", 1e-6)],
    },
    Criterion { number: 8, title: "summation formula", budget_s: 2.0, checks: &[("ps3", "spectral.summation_formula", 1e-8)] },
    Criterion {
        number: 9,
        title: "Plancherel and inversion",
        budget_s: 60.0,
        checks: &[
            ("ps1", "plancherel.isometry", 1e-6),
            ("ps1", "plancherel.roundtrip", 1e-6),
            ("ps2", "plancherel.isometry", 1e-6),
            ("ps2", "plancherel.roundtrip", 1e-6),
        ],
    },
    Criterion { number: 10, title: "diagonalization", budget_s: 30.0, checks: &[("ps1", "transform.diagonalization", 1e-7)] },
    Criterion {
        number: 11,
        title: "truncated-matrix spectrum",
        budget_s: 30.0,
        checks: &[("ps1", "spectrum.dense", 5e-3), ("ps1", "spectrum.discrete", 1e-4)],
    },
    Criterion {
        number: 12,
        title: "polynomial limits",
        budget_s: 5.0,
        checks: &[("ps1", "polynomial.phi", 1e-9), ("ps3", "polynomial.phi", 1e-9), ("ps3", "polynomial.big_phi", 1e-9)],
    },
];

const SEED: u64 = 0;

/// Runs one criterion; returns whether it passed and the text of its line.
fn evaluate(c: &Criterion) -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for &(preset, full_id, tol) in c.checks {
        let Some(spec) = REGISTRY.iter().find(|s| s.id == full_id) else {
            ok = false;
            parts.push(format!("{preset}/{full_id}: not registered"));
            continue;
        };
        if spec.tolerance != tol {
            ok = false;
            parts.push(format!("{preset}/{full_id}: registered tolerance {:e} differs from {tol:e}", spec.tolerance));
            continue;
        }
        let ctx = match RunConfig::new(ParamSpec::Preset(preset.into()), &[]).context() {
            Ok(ctx) => ctx,
            Err(e) => {
                ok = false;
                parts.push(format!("{preset}/{full_id}: {e}"));
                continue;
            }
        };
        match run_check(spec, &ctx, SEED, false) {
            Ok(r) => {
                ok &= r.passed;
                let res = r.residual.map_or_else(|| r.error.clone().unwrap_or_else(|| "no residual".into()), |x| format!("{x:.2e}"));
                parts.push(format!("{preset}/{full_id} {res} (tol {tol:.0e})"));
            }
            Err(s) => {
                ok = false;
                parts.push(format!("{preset}/{full_id} skipped: {}", s.reason));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let in_time = secs <= c.budget_s;
    ok &= in_time;
    let status = if ok { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {:>2} {status} {:<28} {:.2} s of {} s{}: {}",
        c.number,
        c.title,
        secs,
        c.budget_s,
        if in_time { "" } else { " (over budget)" },
        parts.join("; ")
    );
    (ok, line)
}

fn main() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let (ok, line) = evaluate(c);
        println!("{line}");
        if !ok {
            failed.push(c.number);
        }
    }
    if failed.is_empty() {
        println!("all {} acceptance criteria passed", CRITERIA.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
