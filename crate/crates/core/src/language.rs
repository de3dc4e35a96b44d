//! The factor language ℒ_σ restricted to a letter window.
//!
//! Words of length ≤ L are factors either of σʲ(a) with 2ʲ < L or of σᵏ(u)
//! for a two-letter word u ∈ ℒ₂ and the smallest k with 2ᵏ ≥ L: once every
//! σᵏ-block is at least L long, a factor of length L meets at most two blocks.
//! ℒ₂ itself is the closure of the two-letter factors of images under σ. All
//! of this is computed on the window widened by a margin; the margin is doubled
//! until the restriction to the window stops changing.

use std::collections::BTreeSet;

use crate::alphabet::{Letter, LetterInterval, Word};
use crate::error::SubstError;
use crate::subst::Substitution;

/// How many times the margin may be doubled before giving up.
pub const MAX_DOUBLINGS: usize = 6;

/// Factor-closed set of language words with letters in `window` and length
/// at most `max_len` (the empty word included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    window: LetterInterval,
    max_len: usize,
    margin: i64,
    words: BTreeSet<Word>,
}

impl Language {
    pub fn window(&self) -> LetterInterval {
        self.window
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Margin at which the restricted language was found to be stable.
    pub fn margin(&self) -> i64 {
        self.margin
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    /// Words of exactly length `n`, in lexicographic order.
    pub fn of_len(&self, n: usize) -> impl Iterator<Item = &Word> {
        self.words.iter().filter(move |w| w.len() == n)
    }

    pub fn into_set(self) -> BTreeSet<Word> {
        self.words
    }
}

/// Smallest k with 2ᵏ ≥ n (and 0 for n ≤ 1).
pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Least k ≥ 1 with `min_lenᵏ ≥ max_len − 1`: then every block of σᵏ has at
/// least `max_len − 1` letters, so a factor of length `max_len` of any σⁿ(a),
/// n ≥ k, meets at most two consecutive σᵏ-blocks.
fn pair_depth(min_len: usize, max_len: usize) -> usize {
    let mut k = 1;
    let mut block = min_len.max(2);
    while block + 1 < max_len {
        block = block.saturating_mul(min_len.max(2));
        k += 1;
    }
    k
}

/// All language words of length ≤ `max_len` over the letters of `window`.
pub fn generate_language(
    sigma: &Substitution,
    max_len: usize,
    window: LetterInterval,
) -> Result<Language, SubstError> {
    let t = sigma.size().max(sigma.alphabet().stride);
    let k = pair_depth(sigma.min_len(), max_len) as i64;
    let mut margin = t * (k + 2);
    let mut previous = restricted_language(sigma, max_len, window, margin)?;
    for _ in 0..MAX_DOUBLINGS {
        let next = restricted_language(sigma, max_len, window, 2 * margin)?;
        if next == previous {
            return Ok(Language {
                window,
                max_len,
                margin,
                words: next,
            });
        }
        previous = next;
        margin *= 2;
    }
    Err(SubstError::NonStabilizing { window, margin })
}

/// ℒ₂ computed inside `outer`: two-letter factors of images, closed under σ.
fn two_letter_closure(sigma: &Substitution, outer: LetterInterval) -> BTreeSet<(Letter, Letter)> {
    let al = sigma.alphabet();
    let mut pairs = BTreeSet::new();
    let mut todo = Vec::new();
    let add = |img: &[Letter],
               pairs: &mut BTreeSet<(Letter, Letter)>,
               todo: &mut Vec<(Letter, Letter)>| {
        for p in img.windows(2) {
            if outer.contains(p[0]) && outer.contains(p[1]) && pairs.insert((p[0], p[1])) {
                todo.push((p[0], p[1]));
            }
        }
    };
    for a in al.letters_in(outer) {
        add(&sigma.image(a).to_vec(), &mut pairs, &mut todo);
    }
    while let Some((b, c)) = todo.pop() {
        let img = sigma.apply(&[b, c]);
        add(&img, &mut pairs, &mut todo);
    }
    pairs
}

fn restricted_language(
    sigma: &Substitution,
    max_len: usize,
    window: LetterInterval,
    margin: i64,
) -> Result<BTreeSet<Word>, SubstError> {
    let mut words: BTreeSet<Word> = BTreeSet::new();
    words.insert(Vec::new());
    if max_len == 0 || window.is_empty() {
        return Ok(words);
    }
    let al = sigma.alphabet();
    let t = sigma.size();
    let k = pair_depth(sigma.min_len(), max_len);
    let outer = window.widen(margin);

    // Iterates of single letters up to depth k (covers σⁿ(a) with n ≤ k).
    for j in 0..=k {
        for a in al.letters_in(window.widen(j as i64 * t)) {
            let img = sigma.iterate(a, j)?;
            collect_factors(&img, max_len, window, &mut words);
        }
    }
    // σᵏ of every two-letter word that can reach the window.
    let reach = window.widen(k as i64 * t);
    for (b, c) in two_letter_closure(sigma, outer) {
        if !reach.contains(b) && !reach.contains(c) {
            continue;
        }
        let img = sigma.iterate_word(&[b, c], k)?;
        collect_factors(&img, max_len, window, &mut words);
    }
    Ok(words)
}

fn collect_factors(s: &[Letter], max_len: usize, window: LetterInterval, out: &mut BTreeSet<Word>) {
    for i in 0..s.len() {
        for len in 1..=max_len.min(s.len() - i) {
            if !window.contains(s[i + len - 1]) {
                break;
            }
            let f = &s[i..i + len];
            if !out.contains(f) {
                out.insert(f.to_vec());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            (0..=9).map(ceil_log2).collect::<Vec<_>>(),
            vec![0, 0, 1, 2, 2, 3, 3, 3, 3, 4]
        );
    }

    #[test]
    fn pair_depths() {
        assert_eq!(pair_depth(2, 2), 1);
        assert_eq!(pair_depth(2, 3), 1);
        assert_eq!(pair_depth(2, 4), 2);
        assert_eq!(pair_depth(2, 5), 2);
        assert_eq!(pair_depth(2, 6), 3);
        assert_eq!(pair_depth(9, 10), 1);
        assert_eq!(pair_depth(3, 11), 3);
    }

    #[test]
    fn max_len_zero_is_empty_word_only() {
        let s = Fixture::RandomWalk.substitution();
        let l = generate_language(&s, 0, LetterInterval::symmetric(3)).unwrap();
        assert_eq!(
            l.iter().cloned().collect::<Vec<_>>(),
            vec![Vec::<Letter>::new()]
        );
    }

    #[test]
    fn factor_closed() {
        let s = Fixture::ForwardBack.substitution();
        let l = generate_language(&s, 5, LetterInterval::symmetric(6)).unwrap();
        for w in l.iter() {
            for i in 0..w.len() {
                for j in i..=w.len() {
                    assert!(l.contains(&w[i..j]), "{w:?} factor {:?}", &w[i..j]);
                }
            }
        }
    }
}
