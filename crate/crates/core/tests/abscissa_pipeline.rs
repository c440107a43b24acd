//! End-to-end checks through the public API: manifest on disk, abscissa,
//! envelope and oracle.

use decaycert::envelope::{classify, envelope};
use decaycert::generate::{random_system, underdamped_system};
use decaycert::io::{load_system, write_system};
use decaycert::oracle::verify_certificate;
use decaycert::spectral_shift::{compute_gamma, DEFAULT_TOL_BISECT};
use decaycert::{certificate_at, CondMode, Error, SecondOrderSystem, SymMatrix};
use proptest::prelude::*;

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn manifest_to_verified_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let sys = random_system(4, 31);
    let manifest = write_system(&sys, dir.path(), "sys").unwrap();
    let loaded = load_system(&manifest).unwrap();
    assert_eq!(loaded.k(), sys.k());

    let g = compute_gamma(&loaded, DEFAULT_TOL_BISECT).unwrap();
    let t = grid(40.0 / g.gamma.abs(), 150);
    for mode in [CondMode::Exact, CondMode::Lemma] {
        let cert = certificate_at(&loaded, g.gamma / 3.0, mode).unwrap();
        assert!(verify_certificate(&loaded, &cert, &t).unwrap().passed());
    }
}

#[test]
fn inline_manifest_with_comments() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("osc.manifest");
    std::fs::write(
        &path,
        "# unit oscillator\ndim = 1\nM = [[1]]\nC = [[1]]\nK = [[1]]\n",
    )
    .unwrap();
    let g = compute_gamma(&load_system(&path).unwrap(), DEFAULT_TOL_BISECT).unwrap();
    assert!((g.gamma + 0.5).abs() <= 1e-15);
}

#[test]
fn lemma_certificates_are_weaker_but_valid() {
    let sys = underdamped_system(3, 4);
    let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
    let mu = g.gamma / 2.0;
    let exact = certificate_at(&sys, mu, CondMode::Exact).unwrap();
    let lemma = certificate_at(&sys, mu, CondMode::Lemma).unwrap();
    assert!(lemma.c_beta >= exact.c_beta);
    let t = grid(30.0 / g.gamma.abs(), 100);
    assert!(verify_certificate(&sys, &lemma, &t).unwrap().passed());
}

#[test]
fn shifts_below_the_abscissa_are_refused() {
    let sys = SecondOrderSystem::oscillator(1.0, 3.0).unwrap();
    let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
    assert!(matches!(
        certificate_at(&sys, g.gamma - 0.01, CondMode::Exact),
        Err(Error::PencilNotPd { .. })
    ));
    let i = SymMatrix::identity(1);
    let light = SecondOrderSystem::new(i.clone(), &i * 0.5, i).unwrap();
    assert!(matches!(
        certificate_at(&light, -0.3, CondMode::Exact),
        Err(Error::DampingIndefinite { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn abscissa_ordering(dim in 1usize..6, seed in 0u64..10_000) {
        let sys = random_system(dim, seed);
        let r = classify(&sys).unwrap();
        prop_assert!(r.gamma0 <= r.gamma + 1e-12);
        prop_assert!(r.gamma < 0.0);
        // γ bounds the decay rate, so the spectrum lies to its left
        prop_assert!(r.spectral_abscissa <= r.gamma + 1e-8);
    }

    #[test]
    fn envelope_dominates_the_norm(dim in 1usize..5, seed in 0u64..10_000) {
        let sys = random_system(dim, seed);
        let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
        let t = grid(20.0 / g.gamma.abs(), 60);
        let curve = envelope(&sys, 6, &t, true).unwrap();
        for (b, n) in curve.bound.iter().zip(curve.oracle_norm.unwrap()) {
            prop_assert!(*b >= n - 1e-9);
        }
        prop_assert!(curve.bound.windows(2).all(|w| w[1] <= w[0]));
    }
}
