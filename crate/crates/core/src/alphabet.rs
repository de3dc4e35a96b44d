//! Letters, words, letter intervals and windowed views of bi-infinite points.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A letter is its integer value; the alphabet constraint lives in [`Alphabet`].
pub type Letter = i64;

/// A finite word.
pub type Word = Vec<Letter>;

/// The alphabet sℤ + r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub stride: i64,
    pub residue: i64,
}

impl Alphabet {
    /// Builds sℤ + r with the residue normalized into `[0, s)`.
    ///
    /// # Panics
    /// Panics if `stride < 1`; validation rejects such definitions earlier.
    pub fn new(stride: i64, residue: i64) -> Self {
        assert!(stride >= 1, "alphabet stride must be positive");
        Alphabet {
            stride,
            residue: residue.rem_euclid(stride),
        }
    }

    pub fn integers() -> Self {
        Alphabet::new(1, 0)
    }

    pub fn contains(&self, a: Letter) -> bool {
        (a - self.residue).rem_euclid(self.stride) == 0
    }

    /// Consecutive index of a letter: `(a − r)/s`.
    pub fn index(&self, a: Letter) -> i64 {
        (a - self.residue).div_euclid(self.stride)
    }

    pub fn letter(&self, index: i64) -> Letter {
        index * self.stride + self.residue
    }

    /// Smallest alphabet letter `≥ x`.
    pub fn ceil(&self, x: i64) -> Letter {
        let i = (x - self.residue).div_euclid(self.stride);
        let a = self.letter(i);
        if a < x {
            a + self.stride
        } else {
            a
        }
    }

    /// Largest alphabet letter `≤ x`.
    pub fn floor(&self, x: i64) -> Letter {
        self.letter((x - self.residue).div_euclid(self.stride))
    }

    /// Alphabet letters inside an interval, in increasing order.
    pub fn letters_in(&self, iv: LetterInterval) -> impl Iterator<Item = Letter> {
        let stride = self.stride;
        let (start, end) = if iv.is_empty() {
            (1, 0)
        } else {
            (self.ceil(iv.lo), self.floor(iv.hi))
        };
        (0..)
            .map(move |k| start + k * stride)
            .take_while(move |&a| a <= end)
    }

    pub fn count_in(&self, iv: LetterInterval) -> usize {
        if iv.is_empty() {
            return 0;
        }
        let (s, e) = (self.ceil(iv.lo), self.floor(iv.hi));
        if s > e {
            0
        } else {
            ((e - s) / self.stride + 1) as usize
        }
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::integers()
    }
}

/// A closed interval `[lo, hi]` of integers; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LetterInterval {
    pub lo: i64,
    pub hi: i64,
}

impl LetterInterval {
    pub fn new(lo: i64, hi: i64) -> Self {
        LetterInterval { lo, hi }
    }

    /// `[−k, k]`.
    pub fn symmetric(k: i64) -> Self {
        LetterInterval { lo: -k, hi: k }
    }

    pub fn empty() -> Self {
        LetterInterval { lo: 1, hi: 0 }
    }

    /// Smallest interval containing every letter of `w` (empty for the empty word).
    pub fn hull(w: &[Letter]) -> Self {
        match (w.iter().min(), w.iter().max()) {
            (Some(&lo), Some(&hi)) => LetterInterval { lo, hi },
            _ => LetterInterval::empty(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, a: Letter) -> bool {
        self.lo <= a && a <= self.hi
    }

    pub fn contains_interval(&self, other: &LetterInterval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn contains_word(&self, w: &[Letter]) -> bool {
        w.iter().all(|&a| self.contains(a))
    }

    pub fn widen(&self, margin: i64) -> Self {
        if self.is_empty() {
            *self
        } else {
            LetterInterval {
                lo: self.lo - margin,
                hi: self.hi + margin,
            }
        }
    }

    /// Number of integers covered.
    pub fn width(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.hi - self.lo + 1
        }
    }
}

impl fmt::Display for LetterInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// A finite factor of a bi-infinite point together with the position of
/// coordinate 0 inside it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowedSequence {
    pub letters: Word,
    pub anchor: usize,
}

impl WindowedSequence {
    /// # Panics
    /// Panics if the anchor does not index into `letters`.
    pub fn new(letters: Word, anchor: usize) -> Self {
        assert!(anchor < letters.len(), "anchor outside the window");
        WindowedSequence { letters, anchor }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Coordinate `i` of the point, if the window covers it.
    pub fn at(&self, i: i64) -> Option<Letter> {
        let p = self.anchor as i64 + i;
        if p < 0 {
            None
        } else {
            self.letters.get(p as usize).copied()
        }
    }

    /// Letters at coordinates `[from, from + len)`, if covered.
    pub fn slice(&self, from: i64, len: usize) -> Option<&[Letter]> {
        let p = self.anchor as i64 + from;
        if p < 0 || p as usize + len > self.letters.len() {
            None
        } else {
            Some(&self.letters[p as usize..p as usize + len])
        }
    }

    /// The window of `Tᵏx` (coordinates move left by `k`); `None` if the new
    /// anchor falls outside the stored letters.
    pub fn shifted(&self, k: i64) -> Option<WindowedSequence> {
        let p = self.anchor as i64 + k;
        if p < 0 || p as usize >= self.letters.len() {
            None
        } else {
            Some(WindowedSequence {
                letters: self.letters.clone(),
                anchor: p as usize,
            })
        }
    }

    /// Letters to the left / right of the anchor.
    pub fn radius(&self) -> (usize, usize) {
        (self.anchor, self.letters.len() - 1 - self.anchor)
    }
}

/// Formats a word as `(a,b,c)`.
pub fn fmt_word(w: &[Letter]) -> String {
    let parts: Vec<String> = w.iter().map(|a| a.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_two_letters() {
        let al = Alphabet::new(2, 0);
        let v: Vec<_> = al.letters_in(LetterInterval::new(-5, 4)).collect();
        assert_eq!(v, vec![-4, -2, 0, 2, 4]);
        assert_eq!(al.count_in(LetterInterval::new(-5, 4)), 5);
        assert_eq!(al.index(-4), -2);
        assert!(!al.contains(3));
    }

    #[test]
    fn residue_is_normalized() {
        let al = Alphabet::new(3, -1);
        assert_eq!(al.residue, 2);
        assert!(al.contains(-1) && al.contains(2) && !al.contains(0));
        assert_eq!(al.ceil(0), 2);
        assert_eq!(al.floor(0), -1);
    }

    #[test]
    fn windowed_access() {
        let x = WindowedSequence::new(vec![5, 6, 7, 8], 1);
        assert_eq!(x.at(-1), Some(5));
        assert_eq!(x.at(2), Some(8));
        assert_eq!(x.at(3), None);
        assert_eq!(x.shifted(1).unwrap().at(0), Some(7));
        assert!(x.shifted(-2).is_none());
        assert_eq!(x.slice(0, 2), Some(&[6, 7][..]));
    }
}
