mod common;

use num_complex::Complex64;
use resolvent_kit::basis::{laguerre_j, laguerre_matrices, BasisSpec, SystemSpec};
use resolvent_kit::potential::{parse_potential, PotentialExpr};
use resolvent_kit::scattering::*;

/// Ratio `c_1 / c_0` of the solution that decays for `E + i eta`, by
/// backward recursion from deep in the tail.
fn ratio_from_tail(e: f64, lambda: f64, ell: u32, z: f64, eta: f64) -> Complex64 {
    let ec = Complex64::new(e, eta);
    let j = |n: usize, m: usize| -> Complex64 {
        // J is linear in E
        let a = laguerre_j(lambda, ell, z, n, m, 0.0);
        let b = laguerre_j(lambda, ell, z, n, m, 1.0) - a;
        a + b * ec
    };
    let depth = (60.0 / eta) as usize + 1000;
    let mut r = Complex64::new(0.0, 0.0);
    for n in (1..=depth).rev() {
        r = -j(n, n - 1) / (j(n, n) + j(n, n + 1) * r);
    }
    r
}

/// Richardson extrapolation of the tail ratio to `eta -> 0+`.
fn outgoing_ratio(e: f64, lambda: f64, ell: u32, z: f64) -> Complex64 {
    let r1 = ratio_from_tail(e, lambda, ell, z, 2e-3);
    let r2 = ratio_from_tail(e, lambda, ell, z, 1e-3);
    r2 * 2.0 - r1
}

#[test]
fn seeds_match_outgoing_solution_of_the_recursion() {
    for (e, lambda, ell, z) in [(0.5, 1.0, 0, 0.0), (0.5, 1.0, 1, 0.0), (0.7, 1.0, 0, 1.0), (0.7, 1.0, 1, -1.0), (2.0, 1.0, 2, 1.0), (1.3, 2.0, 0, -1.0)] {
        let kin = KinematicParams::new(e, lambda, z).unwrap();
        let (t0, r1) = seed_coefficients(&kin, ell).unwrap();
        let r = outgoing_ratio(e, lambda, ell, z);
        assert!((r1 - r).norm() < 1e-5 * r.norm(), "R1 {r1} vs {r} at {e} {ell} {z}");
        // T_0 = c_0^- / c_0^+ follows from the n = 0 row of the recursion
        let j00 = laguerre_j(lambda, ell, z, 0, 0, e);
        let j01 = laguerre_j(lambda, ell, z, 0, 1, e);
        let t_expect = (j00 + j01 * r) / (j00 + j01 * r.conj());
        assert!((t0 - t_expect).norm() < 1e-5, "T0 {t0} vs {t_expect}");
        assert!((t0.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn recursion_continues_the_outgoing_solution() {
    let (e, lambda, ell, z) = (0.9, 1.0, 1, 1.0);
    let spec = SystemSpec::new(BasisSpec::laguerre(lambda, ell, 10).unwrap(), z, PotentialExpr::zero()).unwrap();
    let mats = laguerre_matrices(&spec).unwrap();
    let kin = KinematicParams::new(e, lambda, z).unwrap();
    let cs = cs_recursion(&mats, &kin, 8).unwrap();
    // the tail ratio at level n is computed by the same backward sweep
    // stopped at n instead of 1
    let ec = Complex64::new(e, 1e-3);
    let j = |n: usize, m: usize| -> Complex64 {
        let a = laguerre_j(lambda, ell, z, n, m, 0.0);
        a + (laguerre_j(lambda, ell, z, n, m, 1.0) - a) * ec
    };
    let mut r = Complex64::new(0.0, 0.0);
    let mut at5 = r;
    for n in (1..=61000).rev() {
        r = -j(n, n - 1) / (j(n, n) + j(n, n + 1) * r);
        if n == 5 {
            at5 = r;
        }
    }
    assert!((cs.r_plus(5) - at5).norm() < 1e-3 * at5.norm());
    for n in 1..=8 {
        assert!((cs.r_minus(n) - cs.r_plus(n).conj()).norm() < 1e-15);
        assert!((cs.t(n).norm() - 1.0).abs() < 1e-12);
    }
}

/// `S = e^(2 i delta)` from outward Numerov integration of the radial
/// equation, matched to Riccati-Bessel functions where `V` has died out.
fn numerov_s(v: &PotentialExpr, ell: u32, e: f64) -> Complex64 {
    let l = ell as f64;
    let k = (2.0 * e).sqrt();
    let h: f64 = 1e-3;
    let r_match = 40.0;
    let steps = (r_match / h) as usize;
    let q = |r: f64| 2.0 * (e - v.eval(r)) - l * (l + 1.0) / (r * r);
    let mut u_prev = 0.0;
    let mut u = h.powf(l + 1.0);
    let mut r = h;
    for _ in 1..steps {
        let rn = r + h;
        let f_prev = 1.0 + h * h * q(r - h) / 12.0;
        let f = 1.0 - 5.0 * h * h * q(r) / 12.0;
        let f_next = 1.0 + h * h * q(rn) / 12.0;
        let u_next = (2.0 * f * u - if r - h > 0.0 { f_prev * u_prev } else { 0.0 }) / f_next;
        u_prev = u;
        u = u_next;
        r = rn;
    }
    let (r1, r2) = (r - h, r);
    let jhat = |x: f64| match ell {
        0 => x.sin(),
        1 => x.sin() / x - x.cos(),
        _ => unreachable!(),
    };
    let nhat = |x: f64| match ell {
        0 => -x.cos(),
        1 => -x.cos() / x - x.sin(),
        _ => unreachable!(),
    };
    let ratio = u_prev / u;
    let tan = (jhat(k * r1) - ratio * jhat(k * r2)) / (nhat(k * r1) - ratio * nhat(k * r2));
    let delta = tan.atan();
    Complex64::from_polar(1.0, 2.0 * delta)
}

#[test]
fn s_matrix_agrees_with_direct_integration() {
    let v = parse_potential("-2*exp(-r) + r*exp(-r^2)").unwrap();
    for ell in [0, 1] {
        let spec = SystemSpec::new(BasisSpec::laguerre(1.0, ell, 100).unwrap(), 0.0, v.clone()).unwrap();
        let solver = ScatteringSolver::new(&spec).unwrap();
        for e in [0.3, 1.0, 2.5] {
            let s = solver.s_matrix(e).unwrap().s;
            let oracle = numerov_s(&v, ell, e);
            // finite-basis truncation error, not monotone in N
            assert!((s - oracle).norm() < 5e-3, "l = {ell}, E = {e}: {s} vs {oracle}");
        }
    }
}

#[test]
fn free_particle_has_unit_s_matrix() {
    for (ell, z) in [(0, 0.0), (2, 0.0)] {
        let spec = SystemSpec::new(BasisSpec::laguerre(1.0, ell, 30).unwrap(), z, PotentialExpr::zero()).unwrap();
        let solver = ScatteringSolver::new(&spec).unwrap();
        for i in 0..20 {
            let e = 0.2 + 0.3 * i as f64;
            if solver.pole_distance(e) < 1e-6 {
                continue;
            }
            assert!(solver.s_matrix(e).unwrap().one_minus_s < 1e-9);
        }
    }
}

#[test]
fn unitarity_away_from_poles() {
    let v = parse_potential("7.5*r^2*exp(-r)").unwrap();
    for z in [0.0, 1.0, -1.0] {
        let spec = SystemSpec::new(BasisSpec::laguerre(1.0, 0, 60).unwrap(), z, v.clone()).unwrap();
        let solver = ScatteringSolver::new(&spec).unwrap();
        for i in 0..300 {
            let e = 0.5 + 7.5 * i as f64 / 299.0;
            if solver.pole_distance(e) < 1e-6 {
                continue;
            }
            let s = solver.s_matrix(e).unwrap().s;
            assert!((s.norm() - 1.0).abs() < 1e-9, "Z = {z}, E = {e}: |S| = {}", s.norm());
        }
    }
}

#[test]
fn phase_shift_is_insensitive_to_basis_scale() {
    let v = parse_potential("7.5*r^2*exp(-r)").unwrap();
    let phases: Vec<f64> = [0.8, 1.0, 1.2]
        .iter()
        .map(|&lambda| {
            let spec = SystemSpec::new(BasisSpec::laguerre(lambda, 0, 100).unwrap(), 0.0, v.clone()).unwrap();
            s_matrix(&spec, 2.0).unwrap().phase_shift
        })
        .collect();
    for p in &phases[1..] {
        assert!((p - phases[0]).abs() < 0.01, "{phases:?}");
    }
}

#[test]
fn oscillator_basis_is_refused() {
    let spec = SystemSpec::new(BasisSpec::oscillator(1.0, 0, 10).unwrap(), 0.0, PotentialExpr::zero()).unwrap();
    assert!(ScatteringSolver::new(&spec).is_err());
    let kin = KinematicParams::new(1.0, 1.0, 0.0).unwrap();
    assert!(seed_coefficients(&kin, 0).is_ok());
    assert!(KinematicParams::new(-1.0, 1.0, 0.0).is_err());
}
