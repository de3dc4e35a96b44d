#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use substrat_core::{
    Decomposer, Fixture, Letter, LetterInterval, Substitution, WindowedSequence, Word,
};

/// Cut lengths established independently: by hand for the random walk and
/// the drunken man, and by the brute-force parse oracle for the rest.
pub fn n_sigma(fx: Fixture) -> usize {
    match fx {
        Fixture::RandomWalk => 2,
        Fixture::DrunkenMan | Fixture::ForwardBack => 3,
        Fixture::ForwardBackSquared => 8,
    }
}

/// A window of a long σ-iterate around a uniformly chosen interior coordinate.
pub fn sample_point(sigma: &Substitution, rng: &mut ChaCha8Rng, radius: usize) -> WindowedSequence {
    let al = sigma.alphabet();
    let a = al.letter(rng.gen_range(-3..=3));
    let mut k = 1;
    while sigma.iterate(a, k).unwrap().len() < 8 * radius {
        k += 1;
    }
    let x = sigma.iterate(a, k).unwrap();
    let c = rng.gen_range(2 * radius..x.len() - 2 * radius);
    let letters = x[c - radius..c + radius].to_vec();
    assert!(LetterInterval::symmetric(SAMPLE_REACH * sigma.size()).contains_word(&letters));
    WindowedSequence::new(letters, radius)
}

/// Letters of sampled points stay within this many multiples of t.
pub const SAMPLE_REACH: i64 = 36;

/// A decomposer covering every sampled point (and its desubstitutions).
pub fn decomposer<'s>(sigma: &'s Substitution, n_sigma: usize) -> Decomposer<'s> {
    let window = LetterInterval::symmetric((SAMPLE_REACH + 4) * sigma.size());
    Decomposer::new(sigma, window, n_sigma + 2 * sigma.max_len()).unwrap()
}

/// Every factor of length ≤ `max_len` of σᵏ(a), for seeds around the window,
/// kept when all letters lie in `window`.
pub fn brute_factors(
    sigma: &Substitution,
    max_len: usize,
    window: LetterInterval,
    k: usize,
    seed_margin: i64,
) -> std::collections::BTreeSet<Word> {
    let mut out = std::collections::BTreeSet::new();
    for a in sigma.alphabet().letters_in(window.widen(seed_margin)) {
        let x = sigma.iterate(a, k).unwrap();
        for len in 1..=max_len {
            for f in x.windows(len) {
                if f.iter().all(|b| window.contains(*b)) {
                    out.insert(f.to_vec());
                }
            }
        }
    }
    out
}

pub fn letters(sigma: &Substitution, lo: Letter, hi: Letter) -> Vec<Letter> {
    sigma
        .alphabet()
        .letters_in(LetterInterval::new(lo, hi))
        .collect()
}
