use nalgebra::DMatrix;
use num_complex::Complex64;
use resolvent_kit::analysis::*;
use resolvent_kit::basis::{system_matrices, BasisSpec, SystemSpec};
use resolvent_kit::potential::parse_potential;

fn barrier_system(size: usize) -> SystemSpec {
    SystemSpec::new(
        BasisSpec::laguerre(1.0, 0, size).unwrap(),
        0.0,
        parse_potential("7.5*r^2*exp(-r)").unwrap(),
    )
    .unwrap()
}

fn well_system(lambda: f64, size: usize) -> SystemSpec {
    SystemSpec::new(
        BasisSpec::laguerre(lambda, 0, size).unwrap(),
        0.0,
        parse_potential("5*exp(-(r-3.5)^2/4) - 8*exp(-r^2/5)").unwrap(),
    )
    .unwrap()
}

#[test]
fn scans_do_not_depend_on_thread_count() {
    let system = barrier_system(40);
    let grid = EnergyGrid::linear(0.5, 6.0, 200).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| scan_smatrix(&system, &grid).unwrap())
    };
    let a = run(1);
    let b = run(4);
    for (x, y) in a.records().iter().zip(b.records()) {
        assert_eq!(x.s.re.to_bits(), y.s.re.to_bits());
        assert_eq!(x.s.im.to_bits(), y.s.im.to_bits());
    }
}

#[test]
fn resonance_position_is_stable_under_grid_refinement() {
    let system = barrier_system(60);
    let peak = |points: usize| {
        let table = scan_smatrix(&system, &EnergyGrid::linear(3.0, 4.0, points).unwrap()).unwrap();
        let report = find_resonances(&table, ResonanceOptions::default());
        report.nearest(3.43).unwrap().energy
    };
    let coarse = peak(101);
    let fine = peak(1001);
    assert!((coarse - fine).abs() < 2e-3, "{coarse} vs {fine}");
    assert!((fine - 3.426).abs() < 5e-3);
}

#[test]
fn refined_grid_contains_base_grid() {
    let system = well_system(20.0, 100);
    let solver = resolvent_kit::scattering::ScatteringSolver::new(&system).unwrap();
    let base = EnergyGrid::linear(1.0, 6.0, 201).unwrap();
    let refined = pole_guided_grid(&solver, &base, RefineOptions::default()).unwrap();
    assert!(refined.len() > base.len());
    for e in base.energies() {
        assert!(refined.energies().binary_search_by(|x| x.total_cmp(e)).is_ok());
    }
    // the narrow resonance near 2.2524 gets its own window
    let near = refined.energies().iter().filter(|e| (**e - 2.2524).abs() < 1e-3).count();
    assert!(near > 50, "{near}");
}

/// Generalized eigenvalues via Cholesky: `L^-1 H L^-T` is symmetric.
fn cholesky_eigenvalues(h: &DMatrix<f64>, omega: &DMatrix<f64>) -> Vec<f64> {
    let l = omega.clone().cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let a = &li * h * li.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let mut e: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn bound_states_are_the_negative_eigenvalues() {
    let system = well_system(10.0, 15);
    let mats = system_matrices(&system).unwrap();
    let oracle: Vec<f64> = cholesky_eigenvalues(mats.hamiltonian().as_matrix(), mats.omega.as_matrix())
        .into_iter()
        .filter(|e| *e < 0.0)
        .collect();
    let found = bound_states(&system).unwrap();
    assert_eq!(found.len(), oracle.len());
    for (a, b) in found.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(found.len(), 2);
    assert!((found[0] + 4.5712).abs() < 5e-3 && (found[1] + 0.8843).abs() < 5e-3);
}

#[test]
fn green_function_diverges_at_bound_states() {
    let system = well_system(10.0, 5);
    let states = bound_states(&system).unwrap();
    let offsets: Vec<f64> = states.iter().flat_map(|s| [s - 1e-8, s + 1e-8]).collect();
    let grid = EnergyGrid::linear(-6.0, -0.05, 2000).unwrap().merged(&offsets);
    let table = green_scan(&system, &grid).unwrap();
    let mut sorted: Vec<f64> = table.records().iter().map(|r| r.abs_green).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    for s in &states {
        let near = table
            .iter()
            .filter(|(e, _)| (e - s).abs() < 2e-8)
            .fold(0.0_f64, |m, (_, r)| m.max(r.abs_green));
        assert!(near > 1e3 * median, "{s}: {near} vs {median}");
    }
}

fn oscillator_barrier() -> SystemSpec {
    SystemSpec::new(
        BasisSpec::oscillator(1.0, 0, 60).unwrap(),
        0.0,
        parse_potential("7.5*r^2*exp(-r)").unwrap(),
    )
    .unwrap()
}

#[test]
fn smoothed_density_is_positive_with_unit_weight() {
    let grid = EnergyGrid::linear(0.1, 8.0, 400).unwrap();
    let dos = density_of_states(&oscillator_barrier(), &grid, DosMethod::smoothing()).unwrap();
    assert!((dos.total_weight - 1.0).abs() < 1e-10);
    assert!(dos.table.records().iter().all(|r| r.rho >= -1e-12));
    let rho: Vec<f64> = dos.table.records().iter().map(|r| r.rho).collect();
    let peak = find_peaks(grid.energies(), &rho, 0.0)
        .into_iter()
        .max_by(|a, b| a.height.total_cmp(&b.height))
        .unwrap();
    assert!((peak.energy - 3.426).abs() < 0.3, "{}", peak.energy);
}

#[test]
fn continuation_reproduces_green_function_on_contour() {
    let system = oscillator_barrier();
    let grid = EnergyGrid::linear(0.1, 8.0, 400).unwrap();
    let dos = density_of_states(&system, &grid, DosMethod::continuation()).unwrap();
    let fit = dos.fit.as_ref().unwrap();
    assert!(fit.residual() < 1e-2);
    for &e in &[1.0, 3.4, 6.0] {
        let z = Complex64::new(e, 0.5);
        let g: Complex64 = dos
            .poles
            .iter()
            .zip(&dos.weights)
            .map(|(&p, &w)| w / (Complex64::new(p, 0.0) - z))
            .sum();
        assert!((fit.eval(z) - g).norm() < 2e-2 * g.norm());
    }
    let rho: Vec<f64> = dos.table.records().iter().map(|r| r.rho).collect();
    let (i, _) = rho.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!((grid.energies()[i] - 3.426).abs() < 0.3);
}

#[test]
fn density_of_states_needs_orthonormal_basis() {
    let grid = EnergyGrid::linear(0.1, 8.0, 50).unwrap();
    assert!(density_of_states(&barrier_system(10), &grid, DosMethod::smoothing()).is_err());
    let short = EnergyGrid::linear(0.1, 8.0, 10).unwrap();
    assert!(density_of_states(&oscillator_barrier(), &short, DosMethod::continuation()).is_err());
}
