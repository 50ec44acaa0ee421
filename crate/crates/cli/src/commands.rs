use std::fmt;

use num_complex::Complex64;
use resolvent_kit::analysis::{
    bound_states, density_of_states, find_resonances, green_scan, pole_guided_grid,
    scan_with_solver, DosMethod, EnergyGrid, Peak, RefineOptions, ResonanceCriterion,
    ResonanceOptions, SMatrixRecord, ScanTable,
};
use resolvent_kit::basis::{system_matrices, BasisSpec, SystemSpec};
use resolvent_kit::potential::parse_potential;
use resolvent_kit::resolvent::{green_cofactor, EigenProductForm, ResolventInput, SpectralResolvent};
use resolvent_kit::scattering::ScatteringSolver;
use resolvent_kit::Error;
use serde_json::{json, Value};

use crate::config::{CommandKind, DosKind, Formula, RunConfig};
use crate::output::CsvTable;
use crate::selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or input; exit code 1.
    Config,
    /// The computation failed; exit code 2.
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub kind: ErrorKind,
    /// Module and operation that failed, e.g. `analysis::scan_smatrix`.
    pub context: &'static str,
    pub message: String,
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 1,
            ErrorKind::Numerical => 2,
        }
    }

    fn lib(context: &'static str) -> impl Fn(Error) -> RunError {
        move |e| {
            let kind = match e {
                Error::InvalidArgument(_)
                | Error::InvalidPotential(_)
                | Error::Unsupported(_)
                | Error::IndexOutOfRange { .. } => ErrorKind::Config,
                _ => ErrorKind::Numerical,
            };
            RunError {
                kind,
                context,
                message: e.to_string(),
            }
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

impl std::error::Error for RunError {}

/// Everything a run produces, before anything is written.
#[derive(Debug, Clone)]
pub struct Report {
    pub csv: Option<CsvTable>,
    /// Columns (1-based) a gnuplot script should draw.
    pub plot_columns: Vec<usize>,
    pub results: Value,
    pub diagnostics: Value,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    /// False when a selftest check failed.
    pub passed: bool,
}

pub fn system_from(cfg: &RunConfig) -> Result<SystemSpec, RunError> {
    let basis = BasisSpec::new(cfg.family, cfg.lambda, cfg.ell, cfg.size)
        .map_err(RunError::lib("basis::BasisSpec"))?;
    let potential = parse_potential(&cfg.potential).map_err(|e| RunError {
        kind: ErrorKind::Config,
        context: "cli::parse_potential",
        message: e.to_string(),
    })?;
    SystemSpec::new(basis, cfg.charge, potential).map_err(RunError::lib("basis::SystemSpec"))
}

fn grid_from(cfg: &RunConfig) -> Result<EnergyGrid, RunError> {
    EnergyGrid::linear(cfg.e_min, cfg.e_max, cfg.steps).map_err(RunError::lib("analysis::EnergyGrid"))
}

/// Run one configured command.
pub fn execute(cfg: &RunConfig) -> Result<Report, RunError> {
    match cfg.command {
        CommandKind::Smatrix => smatrix(cfg, false),
        CommandKind::Resonances => smatrix(cfg, true),
        CommandKind::BoundStates => bound(cfg),
        CommandKind::Dos => dos(cfg),
        CommandKind::Resolvent => resolvent(cfg),
        CommandKind::Selftest => Ok(selftest::run(cfg.seed, cfg.trials)),
    }
}

/// Largest `||S| - 1|` over rows at least ten local grid steps away from
/// every pole of `G`, with the number of such rows.
pub fn unitarity_deviation(table: &ScanTable<SMatrixRecord>) -> (f64, usize) {
    let grid = table.grid();
    let mut worst = 0.0_f64;
    let mut used = 0;
    for (i, r) in table.records().iter().enumerate() {
        if r.at_pole || r.pole_distance < 10.0 * grid.local_step(i) {
            continue;
        }
        worst = worst.max((r.s.norm() - 1.0).abs());
        used += 1;
    }
    (worst, used)
}

fn peak_json(p: &Peak) -> Value {
    json!({
        "energy": p.energy,
        "height": p.height,
        "width_estimate": p.width_estimate,
        "prominence": p.prominence,
    })
}

fn smatrix(cfg: &RunConfig, resonances: bool) -> Result<Report, RunError> {
    let system = system_from(cfg)?;
    let solver = ScatteringSolver::new(&system).map_err(RunError::lib("scattering::ScatteringSolver"))?;
    let base = grid_from(cfg)?;
    let grid = if cfg.refine {
        pole_guided_grid(&solver, &base, RefineOptions::default())
            .map_err(RunError::lib("analysis::pole_guided_grid"))?
    } else {
        base.clone()
    };
    let table = scan_with_solver(&solver, &grid, Some(system.clone()))
        .map_err(RunError::lib("analysis::scan_smatrix"))?;

    let mut csv = CsvTable::new(&[
        "E (a.u.)",
        "Re S",
        "Im S",
        "|1-S|",
        "delta (rad)",
        "pole distance (a.u.)",
        "at pole",
    ]);
    for (e, r) in table.iter() {
        csv.push(vec![
            e,
            r.s.re,
            r.s.im,
            r.one_minus_s,
            r.phase_shift,
            r.pole_distance,
            if r.at_pole { 1.0 } else { 0.0 },
        ]);
    }
    let flagged = table.records().iter().filter(|r| r.at_pole).count();
    let (unitarity, unitarity_points) = unitarity_deviation(&table);
    let secondary = find_resonances(&table, ResonanceOptions::new(ResonanceCriterion::OneMinusS));
    let mut diagnostics = json!({
        "base_points": base.len(),
        "grid_points": grid.len(),
        "flagged_points": flagged,
        "max_unitarity_deviation": unitarity,
        "unitarity_points": unitarity_points,
        "quadrature_residual": solver.matrices().quadrature_residual,
        "one_minus_s_peaks": secondary.peaks.iter().map(peak_json).collect::<Vec<_>>(),
    });
    let mut summary = vec![format!(
        "{} energies ({} flagged at poles), max ||S|-1| = {:.3e}",
        grid.len(),
        flagged,
        unitarity
    )];

    let results = if resonances {
        let mut opts = ResonanceOptions::new(cfg.criterion);
        if let Some(p) = cfg.prominence {
            opts.min_prominence = p;
        }
        let report = find_resonances(&table, opts);
        for p in &report.peaks {
            summary.push(format!(
                "resonance at E = {:.6} (width ~ {:.3e}, prominence {:.3e})",
                p.energy, p.width_estimate, p.prominence
            ));
        }
        diagnostics["min_prominence"] = json!(opts.min_prominence);
        json!({
            "criterion": report.criterion.to_string(),
            "resonances": report.peaks.iter().map(peak_json).collect::<Vec<_>>(),
        })
    } else {
        let (e_max, v_max) = table
            .iter()
            .filter(|(_, r)| r.one_minus_s.is_finite())
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (e, r)| {
                if r.one_minus_s > acc.1 {
                    (e, r.one_minus_s)
                } else {
                    acc
                }
            });
        json!({
            "max_one_minus_s": v_max,
            "energy_of_max_one_minus_s": e_max,
        })
    };
    Ok(Report {
        csv: Some(csv),
        plot_columns: vec![2, 3, 4],
        results,
        diagnostics,
        summary,
        passed: true,
    })
}

fn bound(cfg: &RunConfig) -> Result<Report, RunError> {
    let system = system_from(cfg)?;
    let states = bound_states(&system).map_err(RunError::lib("analysis::bound_states"))?;
    let grid = grid_from(cfg)?;
    let table = green_scan(&system, &grid).map_err(RunError::lib("analysis::green_scan"))?;
    let mut csv = CsvTable::new(&["E (a.u.)", "G[N-1,N-1] (1/a.u.)", "|G[N-1,N-1]| (1/a.u.)", "at pole"]);
    for (e, r) in table.iter() {
        csv.push(vec![e, r.green, r.abs_green, if r.at_pole { 1.0 } else { 0.0 }]);
    }
    let summary = states
        .iter()
        .map(|e| format!("bound state at E = {e:.10}"))
        .collect::<Vec<_>>();
    Ok(Report {
        csv: Some(csv),
        plot_columns: vec![3],
        results: json!({ "bound_states": states }),
        diagnostics: json!({
            "grid_points": grid.len(),
            "flagged_points": table.records().iter().filter(|r| r.at_pole).count(),
        }),
        summary,
        passed: true,
    })
}

fn dos(cfg: &RunConfig) -> Result<Report, RunError> {
    let system = system_from(cfg)?;
    let grid = grid_from(cfg)?;
    let method = match cfg.dos_method {
        DosKind::Smoothing => DosMethod::Smoothing { width: cfg.width },
        DosKind::Continuation => DosMethod::Continuation {
            contour: cfg.contour,
            order: cfg.fit_order,
            max_residual: cfg.max_fit_residual,
        },
    };
    let result = density_of_states(&system, &grid, method)
        .map_err(RunError::lib("analysis::density_of_states"))?;
    let mut csv = CsvTable::new(&["E (a.u.)", "rho (1/a.u.)", "width (a.u.)"]);
    for (e, r) in result.table.iter() {
        csv.push(vec![e, r.rho, r.width]);
    }
    let (e_peak, rho_peak) = result
        .table
        .iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (e, r)| {
            if r.rho > acc.1 {
                (e, r.rho)
            } else {
                acc
            }
        });
    let min_rho = result
        .table
        .records()
        .iter()
        .fold(f64::INFINITY, |m, r| m.min(r.rho));
    let summary = vec![
        format!("total weight {:.15}", result.total_weight),
        format!("largest density {rho_peak:.6e} at E = {e_peak:.6}"),
    ];
    Ok(Report {
        csv: Some(csv),
        plot_columns: vec![2],
        results: json!({
            "total_weight": result.total_weight,
            "peak_energy": e_peak,
            "peak_density": rho_peak,
            "min_density": min_rho,
        }),
        diagnostics: json!({
            "grid_points": grid.len(),
            "poles": result.poles.len(),
            "fit_residual": result.fit_residual(),
        }),
        summary,
        passed: true,
    })
}

fn resolvent(cfg: &RunConfig) -> Result<Report, RunError> {
    let system = system_from(cfg)?;
    let mats = system_matrices(&system).map_err(RunError::lib("basis::system_matrices"))?;
    let h = mats.hamiltonian();
    let omega = mats.omega.clone();
    let grid = grid_from(cfg)?;
    let (n, m) = (cfg.row, cfg.col);
    let spectral = SpectralResolvent::new(&h, Some(&omega)).map_err(RunError::lib("resolvent::green_spectral"))?;
    let product = match cfg.formula {
        Formula::EigenProduct => Some(
            EigenProductForm::general(&h, &omega, n, m)
                .map_err(RunError::lib("resolvent::green_eigprod_general"))?,
        ),
        _ => None,
    };
    let input = ResolventInput::new(h.clone(), Some(omega.clone()), Complex64::new(0.0, 0.0))
        .map_err(RunError::lib("resolvent::ResolventInput"))?;
    let mut csv = CsvTable::new(&["E (a.u.)", "Re G (1/a.u.)", "Im G (1/a.u.)", "at pole"]);
    let mut flagged = 0;
    for &e in grid.energies() {
        let z = Complex64::new(e, cfg.eta);
        let value = match cfg.formula {
            Formula::Spectral => spectral.element(n, m, z),
            Formula::Cofactor => {
                // the cofactor route has no pole test of its own
                spectral.element(n, m, z).and_then(|_| green_cofactor(&input.at(z), n, m))
            }
            Formula::EigenProduct => product.as_ref().expect("built above").eval(z),
        };
        match value {
            Ok(g) => csv.push(vec![e, g.re, g.im, 0.0]),
            Err(Error::AtSpectrum { .. }) => {
                flagged += 1;
                csv.push(vec![e, f64::NAN, f64::NAN, 1.0]);
            }
            Err(other) => return Err(RunError::lib("resolvent::element")(other)),
        }
    }
    let poles = spectral.pair().eigenvalues().to_vec();
    Ok(Report {
        csv: Some(csv),
        plot_columns: vec![2, 3],
        results: json!({ "poles": poles }),
        diagnostics: json!({
            "grid_points": grid.len(),
            "flagged_points": flagged,
        }),
        summary: vec![format!("G[{n},{m}] on {} energies, {} poles", grid.len(), poles.len())],
        passed: true,
    })
}
