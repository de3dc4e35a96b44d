//! Unique σ-decompositions and the cut length N_σ.
//!
//! A *parse* of a word w is a preimage word u = u₁⋯u_m together with an offset
//! o < |σ(u₁)| such that w = σ(u)[o .. o+|w|] and the last block is needed.
//! Only parses whose preimage u lies in the language are admitted — a parse
//! through a preimage that never occurs is not a decomposition of anything in
//! X_σ. A parse determines a [`Structure`]: the block boundaries inside w and
//! the letters of the blocks fully contained in w. A word is uniquely
//! decomposable when all its parses share one structure and that structure has
//! at least one boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use serde::Serialize;

use crate::alphabet::{Letter, LetterInterval, WindowedSequence, Word};
use crate::error::DecomposeError;
use crate::language::{ceil_log2, generate_language, Language};
use crate::subst::Substitution;

/// The block structure of one or more parses of a word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Structure {
    /// The word sits strictly inside a single image σ(a): no boundary at all.
    Interior { witnesses: BTreeSet<Letter> },
    /// `w = head · σ(core₁)⋯σ(core_k) · tail`.
    Cut {
        head_len: usize,
        core: Vec<Letter>,
        tail_len: usize,
        head_witnesses: BTreeSet<Letter>,
        tail_witnesses: BTreeSet<Letter>,
    },
}

/// The unique σ-decomposition `head · σ(a₂)⋯σ(a_{s−1}) · tail` of a word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub head: Word,
    pub core: Vec<Letter>,
    pub tail: Word,
    /// Letters b with `head` a proper suffix of σ(b) (empty iff head is empty).
    pub head_witnesses: BTreeSet<Letter>,
    /// Letters b with `tail` a proper prefix of σ(b) (empty iff tail is empty).
    pub tail_witnesses: BTreeSet<Letter>,
}

impl Decomposition {
    fn from_structure(w: &[Letter], s: &Structure) -> Option<Self> {
        match s {
            Structure::Interior { .. } => None,
            Structure::Cut {
                head_len,
                core,
                tail_len,
                head_witnesses,
                tail_witnesses,
            } => Some(Decomposition {
                head: w[..*head_len].to_vec(),
                core: core.clone(),
                tail: w[w.len() - tail_len..].to_vec(),
                head_witnesses: head_witnesses.clone(),
                tail_witnesses: tail_witnesses.clone(),
            }),
        }
    }

    /// Start positions (inside the word) of the core blocks.
    pub fn core_starts(&self, sigma: &Substitution) -> Vec<usize> {
        let mut p = self.head.len();
        self.core
            .iter()
            .map(|&a| {
                let s = p;
                p += sigma.image_len(a);
                s
            })
            .collect()
    }
}

/// Longest preimage a parse of a word of length `len` can have.
pub(crate) fn preimage_bound(len: usize, min_len: usize) -> usize {
    if len <= 1 {
        1
    } else {
        2 + (len - 2).div_ceil(min_len)
    }
}

/// Enumerates parses of words over a fixed letter window, admitting only
/// preimages from the language.
#[derive(Debug)]
pub struct Decomposer<'s> {
    sigma: &'s Substitution,
    window: LetterInterval,
    max_word_len: usize,
    preimages: Language,
    cache: Mutex<HashMap<Word, Vec<Structure>>>,
}

impl<'s> Decomposer<'s> {
    /// Prepares to decompose words of length ≤ `max_word_len` whose letters lie
    /// in `window`; builds the preimage language on the window widened by t.
    pub fn new(
        sigma: &'s Substitution,
        window: LetterInterval,
        max_word_len: usize,
    ) -> Result<Self, DecomposeError> {
        let m = preimage_bound(max_word_len, sigma.min_len());
        let preimages = generate_language(sigma, m, window.widen(sigma.size()))?;
        Ok(Decomposer {
            sigma,
            window,
            max_word_len,
            preimages,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn sigma(&self) -> &'s Substitution {
        self.sigma
    }

    pub fn window(&self) -> LetterInterval {
        self.window
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    /// The preimage language used to filter parses.
    pub fn preimages(&self) -> &Language {
        &self.preimages
    }

    /// All distinct structures of `w`, in a deterministic order.
    pub fn structures(&self, w: &[Letter]) -> Result<Vec<Structure>, DecomposeError> {
        if w.len() > self.max_word_len {
            return Err(DecomposeError::WordTooLong {
                len: w.len(),
                max: self.max_word_len,
            });
        }
        if let Some(&letter) = w.iter().find(|&&a| !self.window.contains(a)) {
            return Err(DecomposeError::LetterOutsideWindow {
                letter,
                window: self.window,
            });
        }
        if let Some(s) = self.cache.lock().expect("cache poisoned").get(w) {
            return Ok(s.clone());
        }
        let s = self.enumerate(w);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(w.to_vec(), s.clone());
        Ok(s)
    }

    /// The unique decomposition of `w`, or why there is none.
    pub fn decompose(&self, w: &[Letter]) -> Result<Decomposition, DecomposeError> {
        let structures = self.structures(w)?;
        match structures.as_slice() {
            [] => Err(DecomposeError::NoDecomposition { word: w.to_vec() }),
            [s @ Structure::Cut { .. }] => {
                Ok(Decomposition::from_structure(w, s).expect("cut structure"))
            }
            _ => Err(DecomposeError::AmbiguousDecomposition {
                word: w.to_vec(),
                structures,
            }),
        }
    }

    pub fn is_uniquely_decomposable(&self, w: &[Letter]) -> Result<bool, DecomposeError> {
        let s = self.structures(w)?;
        Ok(matches!(s.as_slice(), [Structure::Cut { .. }]))
    }

    fn candidates(&self, near: Letter) -> impl Iterator<Item = Letter> {
        let t = self.sigma.size();
        self.sigma
            .alphabet()
            .letters_in(LetterInterval::new(near - t, near + t))
    }

    fn enumerate(&self, w: &[Letter]) -> Vec<Structure> {
        let mut groups: BTreeMap<(usize, Option<Vec<Letter>>), Structure> = BTreeMap::new();
        if w.is_empty() {
            return Vec::new();
        }
        let mut stack: Word = Vec::new();
        for a in self.candidates(w[0]) {
            let img = self.sigma.image(a);
            for o in 0..img.len() {
                if !img.matches_from(o, w) {
                    continue;
                }
                stack.push(a);
                let end = img.len() - o;
                if end >= w.len() {
                    self.record(w, o, &stack, &mut groups);
                } else {
                    self.extend(w, o, end, &mut stack, &mut groups);
                }
                stack.pop();
            }
        }
        groups.into_values().collect()
    }

    fn extend(
        &self,
        w: &[Letter],
        offset: usize,
        pos: usize,
        stack: &mut Word,
        groups: &mut BTreeMap<(usize, Option<Vec<Letter>>), Structure>,
    ) {
        for c in self.candidates(w[pos]) {
            let img = self.sigma.image(c);
            if !img.matches_from(0, &w[pos..]) {
                continue;
            }
            stack.push(c);
            if self.preimages.contains(stack) {
                let end = pos + img.len();
                if end >= w.len() {
                    self.record(w, offset, stack, groups);
                } else {
                    self.extend(w, offset, end, stack, groups);
                }
            }
            stack.pop();
        }
    }

    fn record(
        &self,
        w: &[Letter],
        offset: usize,
        u: &[Letter],
        groups: &mut BTreeMap<(usize, Option<Vec<Letter>>), Structure>,
    ) {
        let len = w.len() as i64;
        let mut start = -(offset as i64);
        let mut head_len = 0usize;
        let mut core = Vec::new();
        let mut head_w = None;
        let mut tail_w = None;
        for (i, &a) in u.iter().enumerate() {
            let end = start + self.sigma.image_len(a) as i64;
            if start < 0 && end > len {
                let entry =
                    groups
                        .entry((usize::MAX, None))
                        .or_insert_with(|| Structure::Interior {
                            witnesses: BTreeSet::new(),
                        });
                if let Structure::Interior { witnesses } = entry {
                    witnesses.insert(a);
                }
                return;
            }
            if start < 0 {
                head_len = end as usize;
                head_w = Some(a);
            } else if end <= len {
                core.push(a);
            } else {
                tail_w = Some(a);
            }
            debug_assert!(i + 1 == u.len() || end < len);
            start = end;
        }
        let core_len: usize = core.iter().map(|&a| self.sigma.image_len(a)).sum();
        let tail_len = w.len() - head_len - core_len;
        let entry = groups
            .entry((head_len, Some(core.clone())))
            .or_insert_with(|| Structure::Cut {
                head_len,
                core,
                tail_len,
                head_witnesses: BTreeSet::new(),
                tail_witnesses: BTreeSet::new(),
            });
        if let Structure::Cut {
            head_witnesses,
            tail_witnesses,
            ..
        } = entry
        {
            head_witnesses.extend(head_w);
            tail_witnesses.extend(tail_w);
        }
    }

    /// Desubstitutes a window: returns the preimage window y and the offset k
    /// of coordinate 0 inside σ(y₀), so that x = Tᵏσ(y) on the overlap.
    ///
    /// The window is cut into overlapping chunks of length N_σ + 2C; each chunk
    /// decomposes uniquely, its core blocks are exact blocks of x, and the
    /// chunk step guarantees the cores overlap.
    pub fn recognize(
        &self,
        x: &WindowedSequence,
        n_sigma: usize,
    ) -> Result<(WindowedSequence, usize), DecomposeError> {
        let c = self.sigma.max_len();
        let chunk = n_sigma.max(2) + 2 * c;
        if x.len() < chunk {
            return Err(DecomposeError::InsufficientWindow {
                len: x.len(),
                required: chunk,
            });
        }
        let step = n_sigma.max(1);
        let mut starts: Vec<usize> = (0..=x.len() - chunk).step_by(step).collect();
        if *starts.last().expect("at least one chunk") != x.len() - chunk {
            starts.push(x.len() - chunk);
        }
        let mut blocks: BTreeMap<usize, Letter> = BTreeMap::new();
        for s in starts {
            let piece = &x.letters[s..s + chunk];
            let d = self.decompose(piece)?;
            for (p, a) in d.core_starts(self.sigma).into_iter().zip(d.core.iter()) {
                if let Some(prev) = blocks.insert(s + p, *a) {
                    if prev != *a {
                        return Err(DecomposeError::AmbiguousDecomposition {
                            word: x.letters.clone(),
                            structures: Vec::new(),
                        });
                    }
                }
            }
        }
        // Blocks must tile a contiguous stretch.
        let mut letters = Vec::with_capacity(blocks.len());
        let mut anchor = None;
        let mut k = 0;
        let mut expected: Option<usize> = None;
        for (&p, &a) in &blocks {
            if let Some(e) = expected {
                if e != p {
                    return Err(DecomposeError::AmbiguousDecomposition {
                        word: x.letters.clone(),
                        structures: Vec::new(),
                    });
                }
            }
            let len = self.sigma.image_len(a);
            if p <= x.anchor && x.anchor < p + len {
                anchor = Some(letters.len());
                k = x.anchor - p;
            }
            letters.push(a);
            expected = Some(p + len);
        }
        match anchor {
            Some(i) => Ok((WindowedSequence::new(letters, i), k)),
            None => Err(DecomposeError::InsufficientWindow {
                len: x.len(),
                required: chunk,
            }),
        }
    }
}

/// Outcome of the window check of left-determinedness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConfirmedOnWindow,
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeftDeterminedReport {
    pub verdict: Verdict,
    /// Smallest L such that every tested word of length in `[L, max_len]`
    /// decomposes uniquely; absent when refuted.
    pub n_sigma: Option<usize>,
    /// A word of length `max_len` without a unique decomposition, with all of
    /// its structures.
    pub counterexample: Option<(Word, Vec<Structure>)>,
    pub window: LetterInterval,
    pub max_len_checked: usize,
    /// Lengths (≥ 2) at which some window word fails to decompose uniquely.
    pub bad_lengths: Vec<usize>,
    pub words_checked: usize,
}

/// Exhaustively checks unique decomposability of every language word over the
/// window with length in `[2, max_len]`.
pub fn find_n_sigma(
    sigma: &Substitution,
    window: LetterInterval,
    max_len: usize,
) -> Result<LeftDeterminedReport, DecomposeError> {
    let required = 2 * sigma.size() * ceil_log2(max_len) as i64;
    let width = window.width() - 1;
    if window.is_empty() || width < required {
        return Err(DecomposeError::WindowTooNarrow {
            window,
            width,
            required,
        });
    }
    let language = generate_language(sigma, max_len, window)?;
    let dec = Decomposer::new(sigma, window, max_len)?;
    let mut bad_lengths = Vec::new();
    let mut counterexample = None;
    let mut words_checked = 0;
    for len in 2..=max_len {
        let mut bad = false;
        for w in language.of_len(len) {
            words_checked += 1;
            let s = dec.structures(w)?;
            if !matches!(s.as_slice(), [Structure::Cut { .. }]) {
                if !bad && len == max_len {
                    counterexample = Some((w.clone(), s));
                }
                bad = true;
                if len < max_len {
                    break;
                }
            }
        }
        if bad {
            bad_lengths.push(len);
        }
    }
    let refuted = bad_lengths.last() == Some(&max_len);
    Ok(LeftDeterminedReport {
        verdict: if refuted {
            Verdict::Refuted
        } else {
            Verdict::ConfirmedOnWindow
        },
        n_sigma: if refuted {
            None
        } else {
            Some(bad_lengths.last().map_or(2, |b| b + 1))
        },
        counterexample,
        window,
        max_len_checked: max_len,
        bad_lengths,
        words_checked,
    })
}

/// The unique σ-decomposition of a single word (builds a decomposer sized for it).
pub fn sigma_decompose(
    sigma: &Substitution,
    w: &[Letter],
    n_sigma: usize,
) -> Result<Decomposition, DecomposeError> {
    if w.len() < n_sigma {
        return Err(DecomposeError::WordTooShort {
            len: w.len(),
            n_sigma,
        });
    }
    let dec = Decomposer::new(sigma, LetterInterval::hull(w), w.len())?;
    dec.decompose(w)
}

/// Desubstitutes a window once (builds a decomposer sized for it).
pub fn recognize(
    sigma: &Substitution,
    x: &WindowedSequence,
    n_sigma: usize,
) -> Result<(WindowedSequence, usize), DecomposeError> {
    let chunk = n_sigma.max(2) + 2 * sigma.max_len();
    let dec = Decomposer::new(sigma, LetterInterval::hull(&x.letters), chunk)?;
    dec.recognize(x, n_sigma)
}

/// Smallest k with 2^{k−1} ≥ N_σ; σᵏ is then injective on letters.
pub fn power_injectivity_bound(n_sigma: usize) -> u32 {
    1 + ceil_log2(n_sigma.max(1))
}

/// N_σ·C^{n−1}, a valid cut length for σⁿ.
pub fn power_n_sigma_bound(n_sigma: usize, c: usize, n: u32) -> Result<usize, DecomposeError> {
    if n == 0 {
        return Ok(n_sigma);
    }
    c.checked_pow(n - 1)
        .and_then(|p| p.checked_mul(n_sigma))
        .ok_or(DecomposeError::Overflow)
}
