//! The covariance-matrix simulator checked against explicit Fock-space
//! states and Kraus-branch ensembles.

use nalgebra::DMatrix;
use qsense::fock::FockState;
use qsense::gaussian::{
    photon_statistics_gaussian, su11_pipeline, two_mode_squeezer_transform, vacuum_state, Su11Config,
};
use qsense::scenarios::su11_fock_statistics;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn squeezed_vacuum_moments_agree() {
    for &(r, phi) in &[(0.3, 0.0), (0.4, 0.0), (0.4, 0.7), (0.5, -2.1)] {
        let fock = FockState::vacuum(2, 40).unwrap().apply_two_mode_squeezer(r, phi).unwrap();
        let (fm, fcov) = fock.quadrature_moments();
        let gauss = vacuum_state(2)
            .unwrap()
            .apply_symplectic(&two_mode_squeezer_transform(r, phi).unwrap())
            .unwrap();
        assert!(fm.abs().max() < 1e-12);
        assert!(max_diff(&fcov, gauss.covariance()) < 1e-8, "r={r} phi={phi}");

        let (gm, gv) = photon_statistics_gaussian(&gauss);
        let (m, v) = fock.number_statistics();
        assert!(rel(gm, m) < 1e-8 && rel(gv, v) < 1e-8, "r={r}: ({gm}, {gv}) vs ({m}, {v})");
        let sh2 = f64::sinh(r).powi(2);
        assert!((gauss.mode_mean(0) - sh2).abs() < 1e-10);
    }
}

#[test]
fn lossy_squeezed_vacuum_covariance_agrees() {
    for &(gamma, mode, phi) in &[(0.3, 0, 0.0), (0.3, 1, 0.7), (0.8, 0, 1.9)] {
        let r = 0.4;
        let ensemble = FockState::vacuum(2, 30)
            .unwrap()
            .apply_two_mode_squeezer(r, phi)
            .unwrap()
            .apply_loss(gamma, mode)
            .unwrap();
        let (_, fcov) = ensemble.quadrature_moments();
        let gauss = vacuum_state(2)
            .unwrap()
            .apply_symplectic(&two_mode_squeezer_transform(r, phi).unwrap())
            .unwrap()
            .apply_loss_gaussian(gamma, mode)
            .unwrap();
        assert!(max_diff(&fcov, gauss.covariance()) < 1e-8, "gamma={gamma} mode={mode}");
        let (gm, gv) = photon_statistics_gaussian(&gauss);
        let (m, v) = ensemble.number_statistics();
        assert!(rel(gm, m) < 1e-8 && rel(gv, v) < 1e-8);
    }
}

#[test]
fn coherent_state_statistics_agree() {
    let alpha = num_complex::Complex64::new(1.2, -0.5);
    let fock = FockState::coherent(alpha, 0).unwrap();
    let (fm, fcov) = fock.quadrature_moments();
    let gauss = qsense::GaussianState::new(fm.clone(), fcov.clone()).unwrap();
    let (gm, gv) = photon_statistics_gaussian(&gauss);
    let (m, v) = fock.number_statistics();
    assert!(rel(gm, m) < 1e-10 && rel(gv, v) < 1e-10);
    assert!(rel(gm, alpha.norm_sqr()) < 1e-10);
}

#[test]
fn full_pipeline_agrees_across_absorption() {
    for &r in &[0.2, 0.4, 0.5] {
        for &gamma in &[0.0, 0.05, 0.3, 0.7, 1.0] {
            for mode in [0, 1] {
                let config = Su11Config {
                    lossy_mode: mode,
                    ..Su11Config::new(f64::sinh(r).powi(2), gamma)
                };
                let gauss = su11_pipeline(&config).unwrap();
                let (m, v) = su11_fock_statistics(r, gamma, 40, mode).unwrap_or_else(|e| panic!("r={r} gamma={gamma}: {e:?}"));
                if gamma == 0.0 {
                    assert!(m < 1e-10 && gauss.mean < 1e-12);
                    continue;
                }
                assert!(rel(gauss.mean, m) < 1e-8, "r={r} gamma={gamma}: {} vs {m}", gauss.mean);
                assert!(rel(gauss.sd * gauss.sd, v) < 1e-8, "r={r} gamma={gamma}");
            }
        }
    }
}
