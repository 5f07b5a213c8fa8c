//! Phasor algebra checked against the sampled time-domain path.

use std::f64::consts::TAU;

use beamdist_core::nonlinearity::expansion_spectrum;
use beamdist_core::*;
use proptest::prelude::*;

fn grid() -> FrequencyGrid {
    FrequencyGrid::new(TAU, 40).unwrap()
}

fn two_tone(g: &FrequencyGrid, k1: i64, k2: i64, phi1: f64, phi2: f64) -> LineSpectrum {
    tone(g, 1.0, k1, phi1)
        .unwrap()
        .add(&tone(g, 1.0, k2, phi2).unwrap())
        .unwrap()
}

fn round_trip(s: &LineSpectrum) -> LineSpectrum {
    let spp = 2 * s.grid().max_index() as usize + 7;
    estimate_lines(&sample_waveform(s, 2, spp).unwrap(), s.grid()).unwrap()
}

fn assert_lines_close(actual: &LineSpectrum, expected: &LineSpectrum, rel: f64) {
    assert_eq!(
        actual.positive_lines().map(|(k, _)| k).collect::<Vec<_>>(),
        expected.positive_lines().map(|(k, _)| k).collect::<Vec<_>>(),
        "line sets differ"
    );
    for (k, c) in expected.positive_lines() {
        let err = (actual.coefficient(k) - c).norm();
        assert!(
            err <= rel * c.norm(),
            "line {k}: error {err:e} vs magnitude {:e}",
            c.norm()
        );
    }
}

/// Time-domain product evaluated sample by sample, then analysed.
fn sampled_polynomial(x: &LineSpectrum, f: &PolynomialNonlinearity) -> LineSpectrum {
    let spp = 2 * x.grid().max_index() as usize + 3;
    let mut w = sample_waveform(x, 1, spp).unwrap();
    for v in &mut w.samples {
        *v = f.eval(*v);
    }
    estimate_lines(&w, x.grid()).unwrap()
}

#[test]
fn third_order_two_tone_through_sampling() {
    let g = grid();
    let y = apply_polynomial(
        &two_tone(&g, 9, 11, 0.0, 0.0),
        &PolynomialNonlinearity::third_order(0.1).unwrap(),
    )
    .unwrap();
    let back = round_trip(&y);
    for (k, amp) in [
        (9, 1.225),
        (11, 1.225),
        (13, 0.075),
        (7, 0.075),
        (31, 0.075),
        (29, 0.075),
        (27, 0.025),
        (33, 0.025),
    ] {
        assert!((back.amplitude(k) - amp).abs() <= 1e-9 * amp, "line {k}");
    }
    assert_eq!(back.len(), 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn three_routes_agree(alpha in -1.0f64..1.0, phi1 in -3.2f64..3.2, phi2 in -3.2f64..3.2) {
        prop_assume!(alpha.abs() > 1e-6);
        let g = grid();
        let x = two_tone(&g, 9, 11, phi1, phi2);
        let f = PolynomialNonlinearity::third_order(alpha).unwrap();
        let exact = apply_polynomial(&x, &f).unwrap();
        let closed = expansion_spectrum(&g, &two_tone_third_order_terms(9, 11, phi1, phi2, alpha).unwrap()).unwrap();
        assert_lines_close(&closed, &exact, 1e-9);
        assert_lines_close(&sampled_polynomial(&x, &f), &exact, 1e-9);
    }

    #[test]
    fn round_trip_recovers_spectrum(
        lines in proptest::collection::btree_map(1i64..=40, (0.01f64..2.0, -3.2f64..3.2), 1..8),
        dc in -1.0f64..1.0,
    ) {
        let g = grid();
        let mut s = LineSpectrum::from_coefficients(g, [(0, Complex64::new(dc, 0.0))]).unwrap();
        for (&k, &(a, p)) in &lines {
            s = s.add(&tone(&g, a, k, p).unwrap()).unwrap();
        }
        assert_lines_close(&round_trip(&s), &s, 1e-9);
    }

    #[test]
    fn parseval_against_samples(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..=5), phi in -3.0f64..3.0) {
        prop_assume!(coeffs.iter().any(|a| a.abs() > 1e-3));
        let g = grid();
        let f = PolynomialNonlinearity::new(coeffs).unwrap();
        let x = two_tone(&g, 3, 5, phi, 0.4);
        let y = apply_polynomial(&x, &f).unwrap();
        let w = sample_waveform(&y, 1, 2 * 40 + 5).unwrap();
        let ms = w.mean_square();
        prop_assert!((y.total_power() - ms).abs() <= 1e-9 * ms.max(1e-300));
    }

    #[test]
    fn even_polynomials_avoid_odd_lines(a2 in -1.0f64..1.0, a4 in -1.0f64..1.0, phi in -3.0f64..3.0) {
        prop_assume!(a2.abs() > 1e-3);
        let g = grid();
        let x = tone(&g, 1.0, 5, phi).unwrap();
        let y = apply_polynomial(&x, &PolynomialNonlinearity::new(vec![0.0, a2, 0.0, a4]).unwrap()).unwrap();
        prop_assert!(y.positive_lines().all(|(k, _)| k % 2 == 0));
    }

    #[test]
    fn add_commutes_and_associates(
        a in (1i64..=40, 0.0f64..2.0, -3.0f64..3.0),
        b in (1i64..=40, 0.0f64..2.0, -3.0f64..3.0),
        c in (1i64..=40, 0.0f64..2.0, -3.0f64..3.0),
    ) {
        let g = grid();
        let [sa, sb, sc] = [a, b, c].map(|(k, amp, p)| tone(&g, amp, k, p).unwrap());
        assert_lines_close(&sa.add(&sb).unwrap(), &sb.add(&sa).unwrap(), 1e-14);
        let left = sa.add(&sb).unwrap().add(&sc).unwrap();
        let right = sa.add(&sb.add(&sc).unwrap()).unwrap();
        for (k, _) in left.signed_lines() {
            prop_assert!((left.coefficient(k) - right.coefficient(k)).norm() <= 1e-14);
        }
    }

    #[test]
    fn every_result_is_conjugate_symmetric(alpha in -1.0f64..1.0, phi1 in -3.0f64..3.0, phi2 in -3.0f64..3.0) {
        let g = grid();
        let f = PolynomialNonlinearity::new(vec![1.0, 0.3 * alpha, alpha]).unwrap();
        let y = apply_polynomial(&two_tone(&g, 4, 7, phi1, phi2), &f).unwrap();
        for (k, c) in y.signed_lines() {
            prop_assert_eq!(y.coefficient(-k), c.conj());
        }
        prop_assert_eq!(y.coefficient(0).im, 0.0);
    }
}
