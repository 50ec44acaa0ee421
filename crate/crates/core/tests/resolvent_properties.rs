mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use resolvent_kit::matrix::{det, gen_sym_eig, gen_sym_eigenvalues, principal_minor, sym_eig, sym_eigenvalues};
use resolvent_kit::resolvent::*;
use resolvent_kit::{Error, GeneralMatrix, SymMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn all_forms_agree_with_direct_inverse() {
    let mut rng = rng(21);
    for trial in 0..30 {
        let n = 2 + trial % 6;
        let h = random_sym(&mut rng, n);
        let omega = random_tridiagonal_spd(&mut rng, n);
        let z = random_z(&mut rng);
        let input = ResolventInput::new(h.clone(), Some(omega.clone()), z).unwrap();
        let inv = inverse_oracle(&input).unwrap();
        for i in 0..n {
            for j in 0..n {
                let g = inv[(i, j)];
                assert!(rel_close(green_spectral(&input, i, j).unwrap(), g, 1e-9));
                assert!(rel_close(green_cofactor(&input, i, j).unwrap(), g, 1e-9));
                assert!(rel_close(green_eigprod_general(&input, i, j).unwrap(), g, 1e-8));
            }
        }
        let plain = ResolventInput::orthonormal(h.clone(), z);
        let inv = inverse_oracle(&plain).unwrap();
        for i in 0..n {
            assert!(rel_close(green_diag_orthonormal(&h, z, i).unwrap(), inv[(i, i)], 1e-9));
            for j in 0..n {
                let pf = green_partial_fractions(&h, i, j).unwrap();
                assert!(rel_close(pf.eval(z).unwrap(), inv[(i, j)], 1e-8));
            }
        }
    }
}

#[test]
fn resolvent_times_pencil_is_identity() {
    let mut rng = rng(22);
    let h = random_sym(&mut rng, 6);
    let omega = random_spd(&mut rng, 6);
    let z = c(0.3, 0.7);
    let g = SpectralResolvent::new(&h, Some(&omega)).unwrap().matrix(z).unwrap();
    let pencil = h.as_matrix().map(|v| c(v, 0.0)) - omega.as_matrix().map(|v| c(v, 0.0)) * z;
    let residual = (&pencil * &g - DMatrix::<Complex64>::identity(6, 6)).norm();
    assert!(residual < 1e-11, "{residual}");
}

#[test]
fn spectral_sum_reproduces_oracle_from_hand_written_sum() {
    // sum_j gamma[n,j] gamma[m,j] / (sigma_j (eps_j - z)) assembled here
    // from the raw eigenpairs
    let mut rng = rng(23);
    let h = random_sym(&mut rng, 5);
    let omega = random_spd(&mut rng, 5);
    let pair = gen_sym_eig(&h, &omega).unwrap();
    let z = c(-0.4, 0.2);
    let v = pair.eigenvectors();
    let input = ResolventInput::new(h, Some(omega), z).unwrap();
    let inv = inverse_oracle(&input).unwrap();
    for n in 0..5 {
        for m in 0..5 {
            let sum: Complex64 = (0..5)
                .map(|j| v[(n, j)] * v[(m, j)] / (pair.sigma()[j] * (c(pair.eigenvalues()[j], 0.0) - z)))
                .sum();
            assert!(rel_close(sum, inv[(n, m)], 1e-10));
        }
    }
}

#[test]
fn partial_fraction_coefficients_are_eigenvector_products() {
    let mut rng = rng(24);
    for _ in 0..10 {
        let h = random_sym(&mut rng, 6);
        let pair = sym_eig(&h).unwrap();
        let v = pair.eigenvectors();
        for n in 0..6 {
            for m in 0..6 {
                let pf = green_partial_fractions(&h, n, m).unwrap();
                let delta = if n == m { 1.0 } else { 0.0 };
                assert!((pf.coeff_sum() - delta).abs() < 1e-9);
                for k in 0..6 {
                    assert!((pf.coeffs[k] - v[(n, k)] * v[(m, k)]).abs() < 1e-9);
                    assert!((eigvec_prod_from_eigs(&h, n, m, k).unwrap() - v[(n, k)] * v[(m, k)]).abs() < 1e-9);
                }
                if n == m {
                    assert!(pf.coeffs.iter().all(|&a| a >= -1e-12));
                }
            }
        }
    }
}

#[test]
fn eigenvector_components_from_eigenvalues() {
    let mut rng = rng(25);
    for _ in 0..10 {
        let h = random_sym(&mut rng, 7);
        let pair = sym_eig(&h).unwrap();
        for n in 0..7 {
            for k in 0..7 {
                let direct = pair.eigenvectors()[(n, k)].powi(2);
                let from = eigvec_sq_from_eigs(&h, n, k).unwrap();
                assert!((from - direct).abs() < 1e-9, "{from} {direct}");
                assert!((0.0..=1.0).contains(&from));
            }
        }
    }
}

/// Diagonal identity written with overlap eigenvalues `tau`:
/// `gamma[n,k]^2 = (prod tau^(n,n) / prod tau) prod_i (eps_i^(n,n) - eps_k) / prod_{j!=k} (eps_j - eps_k)`.
#[test]
fn generalized_identity_with_overlap_eigenvalues() {
    let mut rng = rng(26);
    for _ in 0..10 {
        let h = random_sym(&mut rng, 5);
        let omega = random_spd(&mut rng, 5);
        let pair = gen_sym_eig(&h, &omega).unwrap();
        let eps = pair.eigenvalues();
        let tau: f64 = sym_eigenvalues(&omega).unwrap().iter().product();
        for n in 0..5 {
            let h_n = principal_minor(&h, n).unwrap();
            let o_n = principal_minor(&omega, n).unwrap();
            let tau_n: f64 = sym_eigenvalues(&o_n).unwrap().iter().product();
            let eps_n = gen_sym_eigenvalues(&h_n, &o_n).unwrap();
            for k in 0..5 {
                let num: f64 = eps_n.iter().map(|e| e - eps[k]).product();
                let den: f64 = (0..5).filter(|&j| j != k).map(|j| eps[j] - eps[k]).product();
                let gamma_sq = tau_n / tau * num / den;
                let direct = pair.eigenvectors()[(n, k)].powi(2) / pair.sigma()[k];
                assert!((gamma_sq - direct).abs() < 1e-8 * (1.0 + direct.abs()));
                let lib = eigvec_from_eigs_general(&h, &omega, n, n, k).unwrap();
                assert!((lib - direct).abs() < 1e-8 * (1.0 + direct.abs()));
            }
        }
    }
}

#[test]
fn eigenvalue_product_form_matches_determinant_ratio() {
    let mut rng = rng(27);
    let h = random_sym(&mut rng, 4);
    let omega = random_tridiagonal_spd(&mut rng, 4);
    let z = c(0.1, 0.3);
    for (n, m) in [(0, 0), (1, 2), (3, 0)] {
        // (-1)^(n+m) det(C^(n,m)) / det(C) with real and imaginary parts
        // of the minor determinant assembled from the cofactor oracle
        let cm = h.as_matrix().map(|v| c(v, 0.0)) - omega.as_matrix().map(|v| c(v, 0.0)) * z;
        let full = cm.clone().determinant();
        let minor = cm.remove_row(n).remove_column(m).determinant();
        let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
        let expect = minor * sign / full;
        let form = EigenProductForm::general(&h, &omega, n, m).unwrap();
        assert!(rel_close(form.eval(z).unwrap(), expect, 1e-9));
        let o = GeneralMatrix::from(omega.clone());
        let pref = sign * det(&resolvent_kit::matrix::delete_row_col(&o, n, m).unwrap()).unwrap()
            / det(&o).unwrap();
        assert!((form.prefactor() - pref).abs() < 1e-12 * pref.abs().max(1.0));
    }
}

#[test]
fn spec_examples() {
    let h = SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
    let input = ResolventInput::orthonormal(h.clone(), c(0.0, 0.0));
    let g = green_spectral(&input, 0, 0).unwrap();
    assert!((g - c(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(green_spectral(&input, 0, 1).unwrap(), c(0.0, 0.0));
    let at = input.at(c(1.0, 0.0));
    assert!(matches!(green_spectral(&at, 0, 0), Err(Error::AtSpectrum { .. })));
    let h = SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let g = green_diag_orthonormal(&h, c(0.0, 1.0), 0).unwrap();
    assert!((g - c(0.0, 0.5)).norm() < 1e-14);
    let pf = green_partial_fractions(&h, 0, 1).unwrap();
    assert!((pf.coeffs[0] + 0.5).abs() < 1e-14 && (pf.coeffs[1] - 0.5).abs() < 1e-14);
}

#[test]
fn degenerate_and_singular_cases_are_reported() {
    let h = SymMatrix::from_diagonal(&[1.0, 1.0, 2.0]).unwrap();
    assert!(matches!(green_partial_fractions(&h, 0, 0), Err(Error::DegenerateSpectrum { .. })));
    let omega = SymMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]).unwrap();
    let h = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
    let input = ResolventInput::new(h, Some(omega), c(0.5, 0.5)).unwrap();
    assert!(matches!(green_eigprod_general(&input, 0, 2), Err(Error::SingularOverlapMinor { .. })));
    let g = green_cofactor(&input, 0, 2).unwrap();
    assert!(g.norm() < 1e-14);
    let bad = SymMatrix::from_diagonal(&[1.0, -1.0, 1.0]).unwrap();
    assert!(matches!(
        ResolventInput::new(SymMatrix::identity(3).unwrap(), Some(bad), c(0.0, 1.0)),
        Err(Error::NotPositiveDefinite)
    ));
}

#[test]
fn poles_sit_at_generalized_eigenvalues() {
    let mut rng = rng(28);
    let h = random_sym(&mut rng, 5);
    let omega = random_spd(&mut rng, 5);
    let res = SpectralResolvent::new(&h, Some(&omega)).unwrap();
    let form = EigenProductForm::general(&h, &omega, 2, 2).unwrap();
    for (k, &e) in res.pair().eigenvalues().iter().enumerate() {
        let d = 1e-7;
        let g = res.element(2, 2, c(e + d, 0.0)).unwrap();
        // G ~ r_k / (eps_k - z) near the pole
        let r = form.residue(k).unwrap();
        assert!((g.re * -d - r).abs() < 1e-5 * (1.0 + r.abs()));
    }
}

fn system_strategy() -> impl Strategy<Value = (SymMatrix, SymMatrix, Complex64)> {
    (2usize..7, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = rng(seed);
        (random_sym(&mut r, n), random_spd(&mut r, n), random_z(&mut r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_in_indices((h, o, z) in system_strategy()) {
        let input = ResolventInput::new(h, Some(o), z).unwrap();
        for i in 0..input.dim() {
            for j in 0..i {
                let a = green_spectral(&input, i, j).unwrap();
                let b = green_spectral(&input, j, i).unwrap();
                prop_assert!(rel_close(a, b, 1e-12));
            }
        }
    }

    #[test]
    fn diagonal_is_herglotz((h, o, z) in system_strategy()) {
        let input = ResolventInput::new(h, Some(o), z).unwrap();
        // G = (H - z Omega)^-1: Im G[n,n] has the sign of Im z
        for i in 0..input.dim() {
            let g = green_spectral(&input, i, i).unwrap();
            prop_assert!(g.im * z.im > 0.0);
        }
    }

    #[test]
    fn conjugate_reflection((h, o, z) in system_strategy()) {
        let input = ResolventInput::new(h, Some(o), z).unwrap();
        let a = green_spectral(&input, 0, input.dim() - 1).unwrap();
        let b = green_spectral(&input.at(z.conj()), 0, input.dim() - 1).unwrap();
        prop_assert!(rel_close(a.conj(), b, 1e-12));
    }

    #[test]
    fn completeness((h, o, _z) in system_strategy()) {
        // sum_j Gamma Gamma^T / sigma = Omega^-1
        let pair = gen_sym_eig(&h, &o).unwrap();
        let v = pair.eigenvectors();
        let n = h.dim();
        let mut sum = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let col = v.column(j);
            sum += col * col.transpose() / pair.sigma()[j];
        }
        let check = o.as_matrix() * sum - DMatrix::<f64>::identity(n, n);
        prop_assert!(check.norm() < 1e-9);
    }

    #[test]
    fn cofactor_and_spectral_agree((h, o, z) in system_strategy()) {
        let input = ResolventInput::new(h, Some(o), z).unwrap();
        let n = input.dim();
        for (i, j) in [(0, 0), (0, n - 1), (n - 1, n - 1)] {
            let a = green_spectral(&input, i, j).unwrap();
            let b = green_cofactor(&input, i, j).unwrap();
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-6));
        }
    }
}
