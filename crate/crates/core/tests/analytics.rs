use nhtop::analytics::*;
use nhtop::dynamics::{coherence_trace, linear_time_grid};
use nhtop::netmodel::*;
use nhtop::spectral::{decompose, overlap_weights};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn nearest(values: &[C64], z: C64) -> f64 {
    values.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn impurity_reference_point() {
    let p = impurity_prediction(1.0f64, 0.5, 4.0).unwrap();
    assert!((p.lambda_plus.re + 0.1076252).abs() < 1e-7);
    assert!((p.tau - 9.2915).abs() < 5e-5);
    assert!((p.lambda_minus.re - 0.7743).abs() < 5e-5);
    assert!(p.validity_plus && !p.validity_minus);
    // the localized root has ζ = 1/y
    let r = impurity_quasimomentum_roots(1.0f64, 0.5, 4.0, 60).unwrap();
    assert!((p.zeta - r[0].localization_length()).abs() < 1e-10);
    let sd = decompose(&build_impurity_model(400, 1.0f64, 0.5, 4.0).unwrap()).unwrap();
    assert!(nearest(&sd.eigenvalues, p.lambda_plus) < 1e-6);
}

#[test]
fn impurity_limits() {
    let p = impurity_prediction(1.0f64, 1.0, 4.0).unwrap();
    assert!((p.tau - 2.0).abs() < 1e-14);
    let p = impurity_prediction(1.0f64, 0.0, 4.0).unwrap();
    assert!(p.tau.is_infinite());
    assert_eq!(p.lambda_plus, C64::new(0.0, 0.0));
    // past √(J²+Γ²/16) the root turns imaginary and λ± acquire frequencies
    let p = impurity_prediction(1.0f64, 2.0, 4.0).unwrap();
    assert!(p.lambda_plus.im.abs() > 0.0);
    assert!(p.tau > 0.0);
    assert!(impurity_prediction(1.0f64, 0.5, 0.0).is_err());
    assert!(impurity_prediction(0.0f64, 0.5, 1.0).is_err());
}

#[test]
fn impurity_envelope_at_kappa_equal_j() {
    let h = build_impurity_model(6, 1.0f64, 1.0, 4.0).unwrap();
    let tr = coherence_trace(&h, &linear_time_grid(6.0, 120).unwrap()).unwrap();
    let rate = nhtop::dynamics::fit_decay_rate(&tr, 0.0, 6.0).unwrap();
    assert!((rate * 2.0 - 1.0).abs() < 0.05);
}

#[test]
fn roots_match_dense_spectrum() {
    for n in [4usize, 20, 41] {
        let sd = decompose(&build_impurity_model(n, 1.0f64, 0.5, 4.0).unwrap()).unwrap();
        let loc = impurity_quasimomentum_roots(1.0, 0.5, 4.0, n).unwrap();
        assert_eq!(loc.len(), 1);
        let r = loc[0];
        assert!(r.residual < 1e-12);
        assert!(r.k.re > 0.0 && r.k.re < std::f64::consts::PI && r.k.im > 0.0);
        assert!(nearest(&sd.eigenvalues, r.lambda) < 10.0 * (-(n as f64) * r.k.im).exp());
        let bulk = impurity_bulk_roots(1.0, 0.5, 4.0, n).unwrap();
        assert_eq!(bulk.len() + 1, n);
        for b in &bulk {
            assert!(b.residual < 1e-12);
            assert!(nearest(&sd.eigenvalues, b.lambda) < 1e-10);
        }
    }
}

#[test]
fn decoupled_chain_roots_are_real() {
    let n = 9;
    let bulk = impurity_bulk_roots(1.0f64, 0.0, 4.0, n).unwrap();
    assert_eq!(bulk.len(), n - 1);
    for (m, r) in bulk.iter().enumerate() {
        let want = std::f64::consts::PI * (m + 1) as f64 / n as f64;
        assert!((r.k - want).norm() < 1e-12);
    }
}

#[test]
fn seed_branch_consistency() {
    for (kappa, gamma) in [(0.5, 4.0), (0.3, 1.0), (0.9, 8.0), (1.2, 3.0)] {
        let a: f64 = gamma / 2.0;
        for z in impurity_seed_z(a, kappa * kappa) {
            let k = C64::new(0.0, -1.0) * z.ln();
            assert_eq!(z.norm() < 1.0, k.im > 0.0);
        }
    }
    assert!(impurity_quasimomentum_roots(1.0f64, 0.5, 4.0, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn impurity_oracle_agreement(kappa in 0.1..0.9f64, gamma in 1.0..8.0f64, n in 20usize..40) {
        let p = impurity_prediction(1.0, kappa, gamma).unwrap();
        prop_assume!(p.validity_plus);
        // only a localized solution is an eigenvalue at finite N
        let s = (C64::new(16.0 * (1.0 - kappa * kappa) + gamma * gamma, 0.0)).sqrt();
        let z = 4.0 / (s + gamma).norm();
        prop_assume!(z < 1.0);
        let sd = decompose(&build_impurity_model(n, 1.0, kappa, gamma).unwrap()).unwrap();
        let tol = f64::max(1e-8, 10.0 * (-(n as f64) / p.zeta).exp());
        prop_assert!(nearest(&sd.eigenvalues, p.lambda_plus) < tol);
    }

    #[test]
    fn dark_vector_in_kernel(m in 1usize..15, j1 in 0.1..1.0f64, ratio in 1.05..4.0f64) {
        let n = 2 * m + 1;
        let j2 = j1 * ratio;
        let st = ssh_odd_dark_state(n, j1, j2).unwrap();
        let h = build_ssh_model(n, j1, j2, 0.5).unwrap();
        let v = ndarray::Array1::from(st.vector.clone());
        let r = h.matrix().dot(&v);
        let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(rn / vn < 1e-13);
        prop_assert!((vn - 1.0).abs() < 1e-12);
        let x = j1 / j2;
        prop_assert!((st.a2 * x - (1.0 - x * x) / (1.0 - x.powi(n as i32 + 1))).abs() < 1e-14);
        let plateau = ssh_odd_asymptotic_coherence(n, j1, j2).unwrap();
        prop_assert!((st.qubit_weight() - plateau).abs() < 1e-14);
    }
}

#[test]
fn ssh_odd_values() {
    let st = ssh_odd_dark_state(3, 1.0f64, 1.8).unwrap();
    assert!((st.qubit_weight() - 0.7641).abs() < 1e-4);
    assert!(!st.mirrored);
    assert!((ssh_odd_asymptotic_coherence(3, 1.0f64, 1.8).unwrap() - 0.7641).abs() < 1e-4);
    assert!((ssh_odd_asymptotic_coherence(5, 1.0f64, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let z: f64 = 0.5;
    let want = z.powi(6) * (1.0 - z * z) / (1.0 - z.powi(8));
    let got = ssh_odd_asymptotic_coherence(7, 1.0f64, 0.5).unwrap();
    assert!((got - want).abs() < 1e-15);
    assert!((got - 0.0117647).abs() < 1e-7);
    let mirror = ssh_odd_dark_state(7, 1.0f64, 0.5).unwrap();
    assert!(mirror.mirrored);
    assert!((mirror.qubit_weight() - got).abs() < 1e-15);
    let flat = ssh_odd_dark_state(5, 1.0f64, 1.0).unwrap();
    assert!((flat.a2 - 1.0 / 3.0).abs() < 1e-15);
    assert!(ssh_odd_dark_state(4, 1.0f64, 1.8).is_err());
    assert!(ssh_odd_asymptotic_coherence(1, 1.0f64, 1.8).is_err());
}

#[test]
fn ssh_even_table_theory() {
    let want = [
        (6, 10.9813, 0.6638),
        (8, 35.5794, 0.6915),
        (10, 115.2774, 0.6941),
        (20, 4.1159e4, 0.6914),
    ];
    for (n, tau, ov) in want {
        let e = ssh_even_prediction(n, 1.0f64, 1.8, 0.5).unwrap().edge.unwrap();
        assert!((e.tau_coh / tau - 1.0).abs() < 1e-3, "N={n}");
        assert!((e.overlap_expanded - ov).abs() < 1e-3, "N={n}");
        assert!(e.y > 0.0 && e.y_residual < 1e-12);
        assert!(e.overlap > 0.0);
    }
}

#[test]
fn ssh_even_y_first_order() {
    let d: f64 = 1.8;
    let e = ssh_even_prediction(8, 1.0, d, 0.5).unwrap().edge.unwrap();
    let first = d + d.powi(-8) * (1.0 / d - d);
    assert!((first - 1.78871).abs() < 1e-5);
    assert!((e.y.exp() - first).abs() < 1e-3);
    for n in [10usize, 20, 40, 80] {
        let e = ssh_even_prediction(n, 1.0, d, 0.5).unwrap().edge.unwrap();
        assert!((e.y.exp() - d).abs() < 2.0 * d.powi(-(n as i32) + 1));
    }
}

#[test]
fn ssh_even_exact_y_matches_dense() {
    for n in [6usize, 8, 10, 20] {
        let e = ssh_even_prediction(n, 1.0f64, 1.8, 0.5).unwrap().edge.unwrap();
        let sd = decompose(&build_ssh_model(n, 1.0, 1.8, 0.5).unwrap()).unwrap();
        assert!(nearest(&sd.eigenvalues, e.lambda_plus) < 1e-10);
        assert!(nearest(&sd.eigenvalues, e.lambda_minus) < 1e-10);
    }
}

#[test]
fn ssh_even_threshold() {
    let p = ssh_even_prediction(8, 1.0f64, 1.2, 0.5).unwrap();
    assert!(!p.threshold_ok && p.edge.is_none());
    assert!(ssh_even_prediction(7, 1.0f64, 1.8, 0.5).is_err());
    assert!(ssh_even_solve_y(8, 1.0f64, 1.2).is_err());
}

#[test]
fn dark_sector_plateau() {
    let sd = decompose(&build_ssh_model(5, 1.0f64, 1.8, 0.5).unwrap()).unwrap();
    let plateau = ssh_odd_asymptotic_coherence(5, 1.0, 1.8).unwrap();
    for t in [0.0, 3.0, 1e3] {
        assert!((dark_sector_prediction(&sd, 1e-10, t).unwrap() - plateau).abs() < 1e-12);
    }
    let trivial = decompose(&build_ssh_model(6, 1.0f64, 0.5, 0.5).unwrap()).unwrap();
    assert_eq!(dark_sector_prediction(&trivial, 1e-6, 1.0).unwrap(), 0.0);
    assert!(dark_sector_prediction(&sd, 1e-10, -1.0).is_err());
}

#[test]
fn dark_sector_at_zero_is_weight_sum() {
    let p = ThreeSiteParams {
        j1: 1.0,
        j2: 0.3,
        j3: 2.0,
        j: 0.7,
        eps1: 0.0,
        eps2: 0.0,
        gamma: 0.5,
    };
    let sd = decompose(&build_three_site_model(8, p).unwrap()).unwrap();
    let w = overlap_weights(&sd, 0).unwrap();
    let s: C64 = dark_indices(&sd, 1e-10).iter().map(|&j| w[j]).sum();
    assert!((dark_sector_prediction(&sd, 1e-10, 0.0).unwrap() - s.norm()).abs() < 1e-14);
    assert!(s.norm() <= 1.0);
    let r = rabi_prediction(&sd, 1e-10).unwrap();
    assert!(r.c_max >= r.c_min && r.period > 0.0);
}

#[test]
fn table1_rows() {
    let rows = table1(1.0f64, 1.8, 0.5, &TABLE1_SIZES).unwrap();
    let exact = [6.9367, 31.8117, 111.1859, 4.1153e4];
    let ov = [0.5355, 0.6715, 0.6888, 0.6914];
    for (i, r) in rows.iter().enumerate() {
        assert!((r.tau_exact / exact[i] - 1.0).abs() < 1e-3);
        assert!((r.overlap_exact - ov[i]).abs() < 1e-3);
    }
    assert!(table1(1.0f64, 1.8, 0.5, &[7]).is_err());
    let below = table1(1.0f64, 1.2, 0.5, &[8]).unwrap();
    assert!(below[0].tau_theory.is_nan());
}
