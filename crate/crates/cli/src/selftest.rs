//! Built-in invariant suite: random resolvent identities plus a few
//! physical null checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resolvent_kit::analysis::{density_of_states, DosMethod, EnergyGrid};
use resolvent_kit::basis::{BasisSpec, SystemSpec};
use resolvent_kit::matrix::sym_eig;
use resolvent_kit::potential::{parse_potential, PotentialExpr};
use resolvent_kit::resolvent::{
    eigvec_prod_from_eigs, green_cofactor, green_spectral, inverse_oracle, ResolventInput,
};
use resolvent_kit::scattering::ScatteringSolver;
use resolvent_kit::SymMatrix;
use serde_json::json;

use crate::commands::Report;

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let v: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| v[i.min(j) * n + i.max(j)]).expect("square")
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }
    })
    .expect("square")
}

fn formula_equivalence(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst = 0.0_f64;
    for t in 0..trials {
        let n = 2 + t % 7;
        let h = random_sym(rng, n);
        let o = random_spd(rng, n);
        let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(0.05..1.0));
        let Ok(input) = ResolventInput::new(h, Some(o), z) else {
            return fail("formula equivalence", "random overlap not positive definite");
        };
        let Ok(inv) = inverse_oracle(&input) else {
            return fail("formula equivalence", "direct inverse failed");
        };
        for i in 0..n {
            for j in 0..n {
                let g = inv[(i, j)];
                let scale = g.norm().max(f64::MIN_POSITIVE);
                for v in [green_spectral(&input, i, j), green_cofactor(&input, i, j)] {
                    match v {
                        Ok(x) => worst = worst.max((x - g).norm() / scale),
                        Err(e) => return fail("formula equivalence", &e.to_string()),
                    }
                }
            }
        }
    }
    Check {
        name: "formula equivalence",
        ok: worst <= 1e-9,
        detail: format!("max relative deviation {worst:.2e}"),
    }
}

fn eigenvector_identity(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst = 0.0_f64;
    for _ in 0..trials.min(10) {
        let h = random_sym(rng, 6);
        let Ok(pair) = sym_eig(&h) else {
            return fail("eigenvector identity", "eigensolver failed");
        };
        let v = pair.eigenvectors();
        for n in 0..6 {
            for m in n..6 {
                for k in 0..6 {
                    match eigvec_prod_from_eigs(&h, n, m, k) {
                        Ok(x) => worst = worst.max((x - v[(n, k)] * v[(m, k)]).abs()),
                        Err(e) => return fail("eigenvector identity", &e.to_string()),
                    }
                }
            }
        }
    }
    Check {
        name: "eigenvector identity",
        ok: worst <= 1e-10,
        detail: format!("max absolute deviation {worst:.2e}"),
    }
}

fn free_particle() -> Check {
    let run = || -> resolvent_kit::Result<f64> {
        let spec = SystemSpec::new(BasisSpec::laguerre(1.0, 0, 40)?, 0.0, PotentialExpr::zero())?;
        let solver = ScatteringSolver::new(&spec)?;
        let mut worst = 0.0_f64;
        for i in 0..50 {
            let e = 0.2 + 5.8 * i as f64 / 49.0;
            if solver.pole_distance(e) < 1e-9 {
                continue;
            }
            worst = worst.max(solver.s_matrix(e)?.one_minus_s);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check {
            name: "free particle",
            ok: w <= 1e-6,
            detail: format!("max |1-S| {w:.2e}"),
        },
        Err(e) => fail("free particle", &e.to_string()),
    }
}

fn unitarity() -> Check {
    let run = || -> resolvent_kit::Result<f64> {
        let v = parse_potential("7.5*r^2*exp(-r)")?;
        let spec = SystemSpec::new(BasisSpec::laguerre(1.0, 0, 30)?, 1.0, v)?;
        let solver = ScatteringSolver::new(&spec)?;
        let mut worst = 0.0_f64;
        for i in 0..60 {
            let e = 0.3 + 0.1 * i as f64;
            if solver.pole_distance(e) < 1e-6 {
                continue;
            }
            worst = worst.max((solver.s_matrix(e)?.s.norm() - 1.0).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check {
            name: "unitarity",
            ok: w <= 1e-7,
            detail: format!("max ||S|-1| {w:.2e}"),
        },
        Err(e) => fail("unitarity", &e.to_string()),
    }
}

fn dos_weight() -> Check {
    let run = || -> resolvent_kit::Result<(f64, f64)> {
        let v = parse_potential("7.5*r^2*exp(-r)")?;
        let spec = SystemSpec::new(BasisSpec::oscillator(1.0, 0, 30)?, 0.0, v)?;
        let grid = EnergyGrid::linear(0.1, 8.0, 100)?;
        let d = density_of_states(&spec, &grid, DosMethod::smoothing())?;
        let min = d.table.records().iter().fold(f64::INFINITY, |m, r| m.min(r.rho));
        Ok((d.total_weight, min))
    };
    match run() {
        Ok((w, min)) => Check {
            name: "density of states",
            ok: (w - 1.0).abs() <= 1e-10 && min >= -1e-12,
            detail: format!("total weight {w:.15}, min rho {min:.2e}"),
        },
        Err(e) => fail("density of states", &e.to_string()),
    }
}

fn potential_round_trip() -> Check {
    let texts = ["7.5*r^2*exp(-r)", "5*exp(-(r-3.5)^2/4) - 8*exp(-r^2/5)", "-r^-2^3", "1e-3/(1+r)"];
    for t in texts {
        let Ok(a) = parse_potential(t) else {
            return fail("potential round trip", &format!("`{t}` does not parse"));
        };
        match parse_potential(&a.to_string()) {
            Ok(b) if a == b => {}
            _ => return fail("potential round trip", &format!("`{t}` does not round-trip")),
        }
    }
    Check {
        name: "potential round trip",
        ok: true,
        detail: format!("{} expressions", texts.len()),
    }
}

fn fail(name: &'static str, detail: &str) -> Check {
    Check {
        name,
        ok: false,
        detail: detail.to_string(),
    }
}

pub fn run(seed: u64, trials: usize) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        formula_equivalence(&mut rng, trials),
        eigenvector_identity(&mut rng, trials),
        free_particle(),
        unitarity(),
        dos_weight(),
        potential_round_trip(),
    ];
    let passed = checks.iter().all(|c| c.ok);
    let summary = checks
        .iter()
        .map(|c| format!("{}: {} ({})", c.name, if c.ok { "ok" } else { "FAILED" }, c.detail))
        .collect();
    let results = json!({
        "passed": passed,
        "checks": checks
            .iter()
            .map(|c| json!({ "name": c.name, "ok": c.ok, "detail": c.detail }))
            .collect::<Vec<_>>(),
    });
    Report {
        csv: None,
        plot_columns: Vec::new(),
        results,
        diagnostics: json!({ "seed": seed, "trials": trials }),
        summary,
        passed,
    }
}
