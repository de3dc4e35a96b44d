mod common;

use substrat_core::{generate_language, Fixture, LetterInterval, SubstError};

#[test]
fn language_matches_brute_force_factors() {
    // Oracle: factors of long iterates seeded well outside the window. Long
    // jumps such as (8, −8) in the squared fixture only appear four levels
    // below a (0, 0) pair, so the depth is chosen per fixture (and the
    // result is unchanged one level deeper).
    for fx in Fixture::ALL {
        let s = fx.substitution();
        let t = s.size();
        let window = LetterInterval::symmetric(4 * t);
        let lang = generate_language(&s, 4, window).unwrap();
        let k = if s.max_len() > 4 { 5 } else { 8 };
        let brute = common::brute_factors(&s, 4, window, k, 12 * t);
        let ours: std::collections::BTreeSet<_> =
            lang.iter().filter(|w| !w.is_empty()).cloned().collect();
        assert_eq!(ours, brute, "{fx:?}");
    }
}

#[test]
fn language_is_factor_closed_and_contains_letters() {
    for fx in Fixture::ALL {
        let s = fx.substitution();
        let window = LetterInterval::symmetric(10);
        let lang = generate_language(&s, 5, window).unwrap();
        assert!(lang.contains(&[]));
        for a in s.alphabet().letters_in(window) {
            assert!(lang.contains(&[a]), "{fx:?} {a}");
        }
        for w in lang.iter() {
            for i in 0..w.len() {
                for j in i..=w.len() {
                    assert!(lang.contains(&w[i..j]));
                }
            }
        }
    }
}

#[test]
fn random_walk_pairs() {
    // Inside an image the step is +2; the junction of σⁿ(a)σⁿ(b) reads
    // (a + n, b − n), so with (a, b) = (c − 1, c + 1) every even step ≤ 2
    // occurs, and no odd one.
    let s = Fixture::RandomWalk.substitution();
    let lang = generate_language(&s, 2, LetterInterval::symmetric(6)).unwrap();
    for w in lang.of_len(2) {
        assert!((w[1] - w[0]) % 2 == 0 && w[1] - w[0] <= 2, "{w:?}");
    }
    assert!(lang.contains(&[0, 0]));
    assert!(lang.contains(&[6, -6]));
    assert!(!lang.contains(&[0, 1]));
    assert!(!lang.contains(&[0, 4]));
}

#[test]
fn max_len_zero_gives_only_the_empty_word() {
    let s = Fixture::DrunkenMan.substitution();
    let lang = generate_language(&s, 0, LetterInterval::symmetric(6)).unwrap();
    assert_eq!(lang.len(), 1);
}

#[test]
fn empty_window_is_harmless() {
    let s = Fixture::ForwardBack.substitution();
    let lang = generate_language(&s, 3, LetterInterval::empty());
    assert!(
        matches!(lang, Ok(ref l) if l.len() == 1)
            || matches!(lang, Err(SubstError::NonStabilizing { .. }))
    );
}
