use num_rational::BigRational;
use num_traits::Zero;
use substrat_core::banded::BandedMatrix;
use substrat_core::scalar::ratio;
use substrat_core::{
    classify_recurrence, pf_eigen, verify_eigen, Alphabet, Fixture, LeftNormalization,
    LetterInterval, PfOptions, PositivityClass, RecurrenceClass, RecurrenceOptions, Regime,
    SpectralError,
};

fn matrix(fx: Fixture) -> BandedMatrix {
    BandedMatrix::from_substitution(&fx.substitution())
}

#[test]
fn perron_values_match_the_examples() {
    for (fx, lambda) in [
        (Fixture::ForwardBack, 3.0),
        (Fixture::ForwardBackSquared, 9.0),
        (Fixture::RandomWalk, 2.0),
        (Fixture::DrunkenMan, 4.0),
    ] {
        let d = pf_eigen(&matrix(fx), &PfOptions::default()).unwrap();
        assert!((d.lambda() - lambda).abs() < 1e-6, "{fx:?}: {}", d.lambda());
        assert!(d.monotone, "{fx:?}: {:?}", d.history);
        assert!(d.eigen.all_positive());
        assert!(d.residual_left < 1e-6 && d.residual_right < 1e-6, "{fx:?}");
    }
}

#[test]
fn regimes() {
    let regime = |fx| pf_eigen(&matrix(fx), &PfOptions::default()).unwrap().regime;
    assert_eq!(regime(Fixture::ForwardBack), Regime::Stable);
    assert_eq!(regime(Fixture::ForwardBackSquared), Regime::Stable);
    assert_eq!(regime(Fixture::RandomWalk), Regime::Extrapolated);
    assert_eq!(regime(Fixture::DrunkenMan), Regime::Extrapolated);
}

#[test]
fn forward_back_left_vector_halves() {
    let d = pf_eigen(&matrix(Fixture::ForwardBack), &PfOptions::default()).unwrap();
    assert_eq!(d.normalization, LeftNormalization::SumOne);
    let l = &d.eigen.left;
    assert!((l[&0] - 0.25).abs() < 1e-6);
    assert!((l[&-1] / l[&0] - 1.0).abs() < 1e-6);
    for n in 0..20 {
        assert!((l[&(n + 1)] / l[&n] - 0.5).abs() < 1e-6, "n={n}");
        assert!((l[&(-n - 2)] / l[&(-n - 1)] - 0.5).abs() < 1e-6, "n={n}");
    }
    for r in d.eigen.right.values() {
        assert!((r - 1.0).abs() < 1e-6);
    }
}

#[test]
fn squared_left_vector_thirds_and_quarters() {
    let d = pf_eigen(&matrix(Fixture::ForwardBackSquared), &PfOptions::default()).unwrap();
    let l = &d.eigen.left;
    // Unnormalized: ℓ₀ = ℓ₋₂ = 1/3, ℓ₂ = ℓ₋₄ = 1/4, then quarter powers.
    let scale = (1.0 / 3.0) / l[&0];
    assert!((l[&-2] * scale - 1.0 / 3.0).abs() < 1e-6);
    assert!((l[&2] * scale - 0.25).abs() < 1e-6);
    assert!((l[&-4] * scale - 0.25).abs() < 1e-6);
    for k in 1..10 {
        assert!((l[&(2 * k + 2)] / l[&(2 * k)] - 0.25).abs() < 1e-6);
        assert!((l[&(-2 * k - 4)] / l[&(-2 * k - 2)] - 0.25).abs() < 1e-6);
    }
    assert!((l.values().sum::<f64>() - 1.0).abs() < 1e-6);
}

#[test]
fn null_recurrent_examples_have_constant_vectors() {
    for fx in [Fixture::RandomWalk, Fixture::DrunkenMan] {
        let d = pf_eigen(&matrix(fx), &PfOptions::default()).unwrap();
        assert_eq!(d.normalization, LeftNormalization::MaxOne);
        for (a, l) in &d.eigen.left {
            assert!((l - 1.0).abs() < 1e-6, "{fx:?} ℓ_{a} = {l}");
            assert!((d.eigen.right[a] - 1.0).abs() < 1e-6);
            // The definitions are symmetric under negation.
            assert!((l - d.eigen.left[&-a]).abs() < 1e-6);
        }
    }
}

#[test]
fn closed_forms_are_exact_eigenvectors() {
    for fx in Fixture::ALL {
        let window = LetterInterval::symmetric(30);
        let e = fx.eigenpair::<BigRational>(window);
        let f = matrix(fx);
        let res = verify_eigen(&f, &e, window).unwrap();
        assert!(res.left.is_zero() && res.right.is_zero(), "{fx:?}: {res:?}");
        assert!(res.left_checked > 20 && res.right_checked > 20);
        // Rescaling ℓ leaves the residual at exactly zero.
        let scaled = e.scale_left(&ratio(7, 1));
        assert!(verify_eigen(&f, &scaled, window).unwrap().left.is_zero());
    }
}

#[test]
fn residuals_detect_a_wrong_vector() {
    let window = LetterInterval::symmetric(10);
    let mut e = Fixture::ForwardBack.eigenpair::<BigRational>(window);
    e.left.insert(0, ratio(2, 1));
    let f = matrix(Fixture::ForwardBack);
    let res = verify_eigen(&f, &e, window).unwrap();
    assert!(!res.left.is_zero());
    let scaled = verify_eigen(&f, &e.scale_left(&ratio(7, 1)), window).unwrap();
    assert_eq!(scaled.left, res.left * ratio(7, 1));
}

#[test]
fn recurrence_classes() {
    let cases = [
        (Fixture::ForwardBack, 1, PositivityClass::PositiveEvidence),
        (
            Fixture::ForwardBackSquared,
            1,
            PositivityClass::PositiveEvidence,
        ),
        (Fixture::RandomWalk, 2, PositivityClass::NullEvidence),
        (Fixture::DrunkenMan, 1, PositivityClass::NullEvidence),
    ];
    for (fx, period, positivity) in cases {
        let f = matrix(fx);
        let d = pf_eigen(&f, &PfOptions::default()).unwrap();
        let v = classify_recurrence(
            &f,
            &d,
            &RecurrenceOptions::default(),
            LetterInterval::symmetric(100),
        )
        .unwrap();
        assert!(v.irreducible_on_window);
        assert_eq!(v.period, period, "{fx:?}");
        assert_eq!(
            v.class,
            RecurrenceClass::RecurrentEvidence,
            "{fx:?} slope {}",
            v.slope
        );
        assert_eq!(v.positive_vs_null, positivity, "{fx:?}");
        assert_eq!(v.partial_sums.len(), 40);
        // Returns only happen at multiples of the period.
        for (n, w) in v.partial_sums.windows(2).enumerate() {
            if (n + 2) as u64 % period != 0 {
                assert_eq!(w[0], w[1], "{fx:?} n={}", n + 2);
            }
        }
        // First-return mass never exceeds 1.
        assert!(*v.taboo_sums.last().unwrap() <= 1.0 + 1e-9);
    }
}

#[test]
fn classification_needs_room_for_the_paths() {
    let f = matrix(Fixture::DrunkenMan);
    let d = pf_eigen(&f, &PfOptions::default()).unwrap();
    let err = classify_recurrence(
        &f,
        &d,
        &RecurrenceOptions::default(),
        LetterInterval::symmetric(40),
    )
    .unwrap_err();
    assert!(matches!(err, SpectralError::WindowTooNarrowForDepth { .. }));
}

#[test]
fn reducible_and_malformed_inputs() {
    let diagonal = BandedMatrix::new(Alphabet::integers(), 1, |a| {
        [(a, 2u64)].into_iter().collect()
    });
    assert_eq!(
        pf_eigen(&diagonal, &PfOptions::default()).unwrap_err(),
        SpectralError::NotIrreducibleOnWindow { k: 16 }
    );
    let opts = PfOptions {
        schedule: vec![32, 16],
        ..PfOptions::default()
    };
    assert_eq!(
        pf_eigen(&matrix(Fixture::RandomWalk), &opts).unwrap_err(),
        SpectralError::BadSchedule
    );
}

#[test]
fn constant_row_sums_give_the_row_sum() {
    // Any banded matrix with row sums 5: λ = 5, r constant.
    let f = BandedMatrix::new(Alphabet::integers(), 2, |a| {
        [(a - 2, 1u64), (a - 1, 1), (a, 1), (a + 1, 1), (a + 2, 1)]
            .into_iter()
            .collect()
    });
    let d = pf_eigen(&f, &PfOptions::default()).unwrap();
    assert!((d.lambda() - 5.0).abs() < 1e-6, "{}", d.lambda());
    for r in d.eigen.right.values() {
        assert!((r - 1.0).abs() < 1e-6);
    }
}
