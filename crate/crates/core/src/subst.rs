//! Region-rule substitutions on sℤ + r.
//!
//! A substitution is described by finitely many rules — an offset template on
//! a region (everything, a half-line, or a finite set) so that the image of `n`
//! is `n + template` — plus absolute exceptions that override the rules. This
//! covers every bounded-size substitution that is eventually
//! translation-equivariant, which is the practical case for banded matrices.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use crate::alphabet::{Alphabet, Letter, LetterInterval, Word};
use crate::definition::{AlphabetDef, ExceptionDef, RegionDef, RuleDef, SubstitutionDef};
use crate::error::SubstError;

/// Where a rule applies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    All,
    /// Letters `≤ b`.
    Le(i64),
    /// Letters `≥ b`.
    Ge(i64),
    Set(BTreeSet<Letter>),
}

impl Region {
    pub fn contains(&self, a: Letter) -> bool {
        match self {
            Region::All => true,
            Region::Le(b) => a <= *b,
            Region::Ge(b) => a >= *b,
            Region::Set(s) => s.contains(&a),
        }
    }

    /// Interval bounds `(lo, hi)` for non-set regions; `None` means unbounded.
    fn bounds(&self) -> Option<(Option<i64>, Option<i64>)> {
        match self {
            Region::All => Some((None, None)),
            Region::Le(b) => Some((None, Some(*b))),
            Region::Ge(b) => Some((Some(*b), None)),
            Region::Set(_) => None,
        }
    }

    fn to_def(&self) -> RegionDef {
        match self {
            Region::All => RegionDef::All,
            Region::Le(b) => RegionDef::Le { bound: *b },
            Region::Ge(b) => RegionDef::Ge { bound: *b },
            Region::Set(s) => RegionDef::Set {
                letters: s.iter().copied().collect(),
            },
        }
    }
}

/// `n ↦ (n + template[0], …, n + template[h−1])` for `n` in the region.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegionRule {
    pub region: Region,
    pub template: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Largest accepted size t; wider bands are rejected as `SizeUnbounded`.
    pub max_size: i64,
    /// Length cap for [`Substitution::iterate`].
    pub length_cap: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            max_size: 1 << 16,
            length_cap: 10_000_000,
        }
    }
}

/// The image of a letter, borrowed from the description.
#[derive(Clone, Copy, Debug)]
pub enum Image<'a> {
    Exception(&'a [Letter]),
    Shifted { base: Letter, template: &'a [i64] },
}

impl<'a> Image<'a> {
    pub fn len(&self) -> usize {
        match self {
            Image::Exception(w) => w.len(),
            Image::Shifted { template, .. } => template.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Letter {
        match self {
            Image::Exception(w) => w[i],
            Image::Shifted { base, template } => base + template[i],
        }
    }

    pub fn first(&self) -> Letter {
        self.get(0)
    }

    pub fn last(&self) -> Letter {
        self.get(self.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = Letter> + 'a {
        let me = *self;
        (0..me.len()).map(move |i| me.get(i))
    }

    pub fn to_vec(&self) -> Word {
        self.iter().collect()
    }

    /// Whether the image agrees with `w` on their common prefix, reading the
    /// image from position `from`.
    pub fn matches_from(&self, from: usize, w: &[Letter]) -> bool {
        let n = (self.len() - from).min(w.len());
        (0..n).all(|i| self.get(from + i) == w[i])
    }
}

/// A validated substitution of bounded size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    name: String,
    alphabet: Alphabet,
    rules: Vec<RegionRule>,
    exceptions: BTreeMap<Letter, Word>,
    size: i64,
    max_len: usize,
    min_len: usize,
    length_cap: usize,
}

impl Substitution {
    /// Validates a parsed definition with default options.
    pub fn validate(def: &SubstitutionDef) -> Result<Self, SubstError> {
        Self::validate_with(def, &ValidateOptions::default())
    }

    pub fn from_toml(text: &str) -> Result<Self, SubstError> {
        Self::validate(&SubstitutionDef::from_toml(text)?)
    }

    /// Checks every standing assumption: alphabet membership, images of length
    /// at least 2, exact coverage by one rule or exception, the size cap and
    /// injectivity on letters.
    pub fn validate_with(
        def: &SubstitutionDef,
        opts: &ValidateOptions,
    ) -> Result<Self, SubstError> {
        if def.alphabet.stride < 1 {
            return Err(SubstError::InvalidStride(def.alphabet.stride));
        }
        let alphabet = Alphabet::new(def.alphabet.stride, def.alphabet.residue);
        let off = |letter: Letter| SubstError::OffAlphabet {
            letter,
            stride: alphabet.stride,
            residue: alphabet.residue,
        };

        let mut exceptions = BTreeMap::new();
        for e in &def.exceptions {
            if !alphabet.contains(e.letter) {
                return Err(off(e.letter));
            }
            if e.image.len() < 2 {
                return Err(SubstError::ImageTooShort {
                    letter: e.letter,
                    len: e.image.len(),
                });
            }
            if let Some(&b) = e.image.iter().find(|&&b| !alphabet.contains(b)) {
                return Err(off(b));
            }
            if exceptions.insert(e.letter, e.image.clone()).is_some() {
                return Err(SubstError::OverlappingRegions {
                    letter: e.letter,
                    first: usize::MAX,
                    second: usize::MAX,
                });
            }
        }

        let mut rules = Vec::with_capacity(def.rules.len());
        for r in &def.rules {
            let region = match &r.region {
                RegionDef::All => Region::All,
                RegionDef::Le { bound } => Region::Le(*bound),
                RegionDef::Ge { bound } => Region::Ge(*bound),
                RegionDef::Set { letters } => {
                    if let Some(&b) = letters.iter().find(|&&b| !alphabet.contains(b)) {
                        return Err(off(b));
                    }
                    Region::Set(letters.iter().copied().collect())
                }
            };
            let rule = RegionRule {
                region,
                template: r.template.clone(),
            };
            if rule.template.len() < 2 {
                return Err(SubstError::ImageTooShort {
                    letter: representative(&rule.region, &alphabet),
                    len: rule.template.len(),
                });
            }
            if let Some(&o) = rule.template.iter().find(|&&o| o % alphabet.stride != 0) {
                return Err(off(representative(&rule.region, &alphabet) + o));
            }
            rules.push(rule);
        }

        let mut sigma = Substitution {
            name: def.name.clone(),
            alphabet,
            rules,
            exceptions,
            size: 0,
            max_len: 0,
            min_len: usize::MAX,
            length_cap: opts.length_cap,
        };
        sigma.check_coverage()?;
        sigma.derive_constants();
        if sigma.size > opts.max_size {
            return Err(SubstError::SizeUnbounded {
                size: sigma.size,
                cap: opts.max_size,
            });
        }
        sigma.check_injective()?;
        Ok(sigma)
    }

    /// Coverage is piecewise constant between breakpoints (bounds, set letters,
    /// exception letters), so checking letters next to every breakpoint plus one
    /// letter beyond each end decides it for all of ℤ.
    fn check_coverage(&self) -> Result<(), SubstError> {
        let s = self.alphabet.stride;
        let mut marks: BTreeSet<i64> = self.exceptions.keys().copied().collect();
        for r in &self.rules {
            match &r.region {
                Region::All => {}
                Region::Le(b) | Region::Ge(b) => {
                    marks.insert(*b);
                }
                Region::Set(set) => marks.extend(set.iter().copied()),
            }
        }
        let lo = marks.first().copied().unwrap_or(0) - 3 * s;
        let hi = marks.last().copied().unwrap_or(0) + 3 * s;
        let mut probes: BTreeSet<Letter> = BTreeSet::new();
        probes.insert(self.alphabet.floor(lo));
        probes.insert(self.alphabet.ceil(hi));
        for &m in &marks {
            probes.extend(
                self.alphabet
                    .letters_in(LetterInterval::new(m - 2 * s, m + 2 * s)),
            );
        }
        for a in probes {
            if self.exceptions.contains_key(&a) {
                continue;
            }
            let covering: Vec<usize> = (0..self.rules.len())
                .filter(|&i| self.rules[i].region.contains(a))
                .collect();
            match covering.as_slice() {
                [] => return Err(SubstError::UncoveredLetter { letter: a }),
                [_] => {}
                [first, second, ..] => {
                    return Err(SubstError::OverlappingRegions {
                        letter: a,
                        first: *first,
                        second: *second,
                    })
                }
            }
        }
        Ok(())
    }

    fn rule_is_effective(&self, r: &RegionRule) -> bool {
        match &r.region {
            Region::Set(set) => set.iter().any(|a| !self.exceptions.contains_key(a)),
            _ => true,
        }
    }

    fn derive_constants(&mut self) {
        let mut size = 0i64;
        let mut max_len = 0usize;
        let mut min_len = usize::MAX;
        for r in self.rules.iter().filter(|r| self.rule_is_effective(r)) {
            size = size.max(r.template.iter().map(|o| o.abs()).max().unwrap_or(0));
            max_len = max_len.max(r.template.len());
            min_len = min_len.min(r.template.len());
        }
        for (a, img) in &self.exceptions {
            size = size.max(img.iter().map(|b| (b - a).abs()).max().unwrap_or(0));
            max_len = max_len.max(img.len());
            min_len = min_len.min(img.len());
        }
        self.size = size;
        self.max_len = max_len;
        self.min_len = min_len;
    }

    /// Decides injectivity on all of sℤ + r exactly.
    ///
    /// Two rule letters `n ≠ m` collide iff the templates have equal length and
    /// differ by a constant `c = m − n`, and some `n` of the first region has
    /// `n + c` in the second; regions are intervals or finite sets, so this is a
    /// finite search. Exceptions are compared against every rule and each other.
    fn check_injective(&self) -> Result<(), SubstError> {
        let rules: Vec<&RegionRule> = self
            .rules
            .iter()
            .filter(|r| self.rule_is_effective(r))
            .collect();
        for (i, ri) in rules.iter().enumerate() {
            for rj in rules.iter().skip(i + 1) {
                if ri.template.len() != rj.template.len() {
                    continue;
                }
                // n + T_i = m + T_j  ⇔  m = n + (T_i − T_j), constant over positions.
                let c = ri.template[0] - rj.template[0];
                if ri
                    .template
                    .iter()
                    .zip(&rj.template)
                    .any(|(a, b)| a - b != c)
                {
                    continue;
                }
                if let Some(n) = self.region_collision(&ri.region, &rj.region, c) {
                    return Err(SubstError::InjectivityViolation { a: n, b: n + c });
                }
            }
        }
        let exc: Vec<(&Letter, &Word)> = self.exceptions.iter().collect();
        for (k, (a, img)) in exc.iter().enumerate() {
            for (b, other) in exc.iter().skip(k + 1) {
                if img == other {
                    return Err(SubstError::InjectivityViolation { a: **a, b: **b });
                }
            }
            for r in &rules {
                if r.template.len() != img.len() {
                    continue;
                }
                let n = img[0] - r.template[0];
                if r.region.contains(n)
                    && !self.exceptions.contains_key(&n)
                    && r.template.iter().zip(img.iter()).all(|(o, b)| n + o == *b)
                {
                    return Err(SubstError::InjectivityViolation { a: **a, b: n });
                }
            }
        }
        Ok(())
    }

    /// Some `n` with `n ∈ r1`, `n + c ∈ r2`, neither an exception.
    fn region_collision(&self, r1: &Region, r2: &Region, c: i64) -> Option<Letter> {
        let ok = |n: Letter| {
            self.alphabet.contains(n)
                && r1.contains(n)
                && r2.contains(n + c)
                && !self.exceptions.contains_key(&n)
                && !self.exceptions.contains_key(&(n + c))
        };
        if let Region::Set(set) = r1 {
            return set.iter().copied().find(|&n| ok(n));
        }
        if let Region::Set(set) = r2 {
            return set.iter().map(|m| m - c).find(|&n| ok(n));
        }
        let (lo1, hi1) = r1.bounds().expect("interval region");
        let (lo2, hi2) = r2.bounds().expect("interval region");
        let lo = max_opt(lo1, lo2.map(|b| b - c));
        let hi = min_opt(hi1, hi2.map(|b| b - c));
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return None;
            }
        }
        // Exceptions remove finitely many letters: scanning that many + 2 letters
        // from a finite end (or from 0) finds a collision whenever one exists.
        let budget = 2 * self.exceptions.len() as i64 + 2;
        let s = self.alphabet.stride;
        let candidates: Vec<Letter> = match (lo, hi) {
            (Some(l), _) => (0..budget).map(|k| self.alphabet.ceil(l) + k * s).collect(),
            (None, Some(h)) => (0..budget)
                .map(|k| self.alphabet.floor(h) - k * s)
                .collect(),
            (None, None) => (0..budget).map(|k| self.alphabet.ceil(0) + k * s).collect(),
        };
        candidates
            .into_iter()
            .filter(|&n| hi.map_or(true, |h| n <= h) && lo.map_or(true, |l| n >= l))
            .find(|&n| ok(n))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// The size t: the largest `|b − a|` over letters `b` of `σ(a)`.
    pub fn size(&self) -> i64 {
        self.size
    }

    /// The maximal image length C.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn constant_length(&self) -> Option<usize> {
        (self.min_len == self.max_len).then_some(self.max_len)
    }

    pub fn rules(&self) -> &[RegionRule] {
        &self.rules
    }

    pub fn exceptions(&self) -> &BTreeMap<Letter, Word> {
        &self.exceptions
    }

    pub fn length_cap(&self) -> usize {
        self.length_cap
    }

    pub fn with_length_cap(mut self, cap: usize) -> Self {
        self.length_cap = cap;
        self
    }

    /// `σ(a)`.
    ///
    /// # Panics
    /// Panics if `a` is not an alphabet letter.
    pub fn image(&self, a: Letter) -> Image<'_> {
        assert!(
            self.alphabet.contains(a),
            "letter {a} is not in the alphabet"
        );
        if let Some(w) = self.exceptions.get(&a) {
            return Image::Exception(w);
        }
        let rule = self
            .rules
            .iter()
            .find(|r| r.region.contains(a))
            .expect("validated substitutions cover every letter");
        Image::Shifted {
            base: a,
            template: &rule.template,
        }
    }

    pub fn image_len(&self, a: Letter) -> usize {
        self.image(a).len()
    }

    /// `σ(w)`, by concatenation.
    pub fn apply(&self, w: &[Letter]) -> Word {
        let mut out = Vec::with_capacity(w.len() * self.max_len);
        self.apply_into(w, &mut out);
        out
    }

    pub fn apply_into(&self, w: &[Letter], out: &mut Word) {
        for &a in w {
            out.extend(self.image(a).iter());
        }
    }

    /// `|σ(w)|` without building it.
    pub fn applied_len(&self, w: &[Letter]) -> u128 {
        w.iter().map(|&a| self.image_len(a) as u128).sum()
    }

    /// `σⁿ(a)`, refusing to build words longer than the length cap.
    pub fn iterate(&self, a: Letter, n: usize) -> Result<Word, SubstError> {
        self.iterate_word(&[a], n)
    }

    pub fn iterate_word(&self, w: &[Letter], n: usize) -> Result<Word, SubstError> {
        let mut cur: Word = w.to_vec();
        for _ in 0..n {
            let len = self.applied_len(&cur);
            if len > self.length_cap as u128 {
                return Err(SubstError::LengthCapExceeded {
                    len,
                    cap: self.length_cap,
                });
            }
            cur = self.apply(&cur);
        }
        Ok(cur)
    }

    /// Row `a` of the substitution matrix: `b ↦ #occurrences of b in σ(a)`.
    pub fn abelianize_row(&self, a: Letter) -> BTreeMap<Letter, u64> {
        let mut row = BTreeMap::new();
        for b in self.image(a).iter() {
            *row.entry(b).or_insert(0) += 1;
        }
        row
    }

    /// The definition this substitution was validated from (normalized).
    pub fn to_def(&self) -> SubstitutionDef {
        SubstitutionDef {
            name: self.name.clone(),
            alphabet: AlphabetDef {
                stride: self.alphabet.stride,
                residue: self.alphabet.residue,
            },
            rules: self
                .rules
                .iter()
                .map(|r| RuleDef {
                    region: r.region.to_def(),
                    template: r.template.clone(),
                })
                .collect(),
            exceptions: self
                .exceptions
                .iter()
                .map(|(a, w)| ExceptionDef {
                    letter: *a,
                    image: w.clone(),
                })
                .collect(),
        }
    }

    /// Images of all letters in a window, for display and round-trip checks.
    pub fn images_on(&self, window: LetterInterval) -> BTreeMap<Letter, Word> {
        self.alphabet
            .letters_in(window)
            .map(|a| (a, self.image(a).to_vec()))
            .collect()
    }

    /// Image as an owned or borrowed slice (allocates for rule letters).
    pub fn image_cow(&self, a: Letter) -> Cow<'_, [Letter]> {
        match self.image(a) {
            Image::Exception(w) => Cow::Borrowed(w),
            img => Cow::Owned(img.to_vec()),
        }
    }
}

fn representative(region: &Region, alphabet: &Alphabet) -> Letter {
    match region {
        Region::All => alphabet.ceil(0),
        Region::Le(b) => alphabet.floor(*b),
        Region::Ge(b) => alphabet.ceil(*b),
        Region::Set(s) => s.first().copied().unwrap_or(0),
    }
}

fn max_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn def(
        stride: i64,
        rules: Vec<(RegionDef, Vec<i64>)>,
        exc: Vec<(Letter, Word)>,
    ) -> SubstitutionDef {
        SubstitutionDef {
            name: "t".into(),
            alphabet: AlphabetDef { stride, residue: 0 },
            rules: rules
                .into_iter()
                .map(|(region, template)| RuleDef { region, template })
                .collect(),
            exceptions: exc
                .into_iter()
                .map(|(letter, image)| ExceptionDef { letter, image })
                .collect(),
        }
    }

    #[test]
    fn uncovered_gap_is_found() {
        let d = def(
            1,
            vec![
                (RegionDef::Le { bound: -2 }, vec![0, 1]),
                (RegionDef::Ge { bound: 1 }, vec![-1, 0]),
            ],
            vec![(0, vec![0, 1])],
        );
        assert_eq!(
            Substitution::validate(&d),
            Err(SubstError::UncoveredLetter { letter: -1 })
        );
    }

    #[test]
    fn overlapping_half_lines() {
        let d = def(
            1,
            vec![
                (RegionDef::Le { bound: -2 }, vec![0, 1]),
                (RegionDef::Le { bound: 0 }, vec![0, 1]),
                (RegionDef::Ge { bound: 1 }, vec![0, 1]),
            ],
            vec![],
        );
        assert!(matches!(
            Substitution::validate(&d),
            Err(SubstError::OverlappingRegions { .. })
        ));
    }

    #[test]
    fn exceptions_override_rules_without_overlap() {
        let d = def(
            1,
            vec![(RegionDef::All, vec![-1, 1])],
            vec![(0, vec![-1, 0, 1])],
        );
        let s = Substitution::validate(&d).unwrap();
        assert_eq!(s.image(0).to_vec(), vec![-1, 0, 1]);
        assert_eq!(s.image(5).to_vec(), vec![4, 6]);
        assert_eq!((s.min_len(), s.max_len(), s.size()), (2, 3, 1));
    }

    #[test]
    fn injectivity_across_regions() {
        // n ≤ 0 ↦ (n, n+1) and n ≥ 1 ↦ (n−1, n): letter 1 collides with letter 0.
        let d = def(
            1,
            vec![
                (RegionDef::Le { bound: 0 }, vec![0, 1]),
                (RegionDef::Ge { bound: 1 }, vec![-1, 0]),
            ],
            vec![],
        );
        assert_eq!(
            Substitution::validate(&d),
            Err(SubstError::InjectivityViolation { a: 0, b: 1 })
        );
        // A constant template difference of 2 still collides (−1 and 1).
        let d = def(
            1,
            vec![
                (RegionDef::Le { bound: 0 }, vec![0, 1]),
                (RegionDef::Ge { bound: 1 }, vec![-2, -1]),
            ],
            vec![],
        );
        assert!(matches!(
            Substitution::validate(&d),
            Err(SubstError::InjectivityViolation { .. })
        ));
        let d = def(
            1,
            vec![
                (RegionDef::Le { bound: 0 }, vec![0, 1]),
                (RegionDef::Ge { bound: 1 }, vec![0, 2]),
            ],
            vec![],
        );
        assert!(Substitution::validate(&d).is_ok());
    }

    #[test]
    fn exception_colliding_with_rule() {
        let d = def(
            1,
            vec![(RegionDef::All, vec![-1, 1])],
            vec![(0, vec![4, 6])],
        );
        assert_eq!(
            Substitution::validate(&d),
            Err(SubstError::InjectivityViolation { a: 0, b: 5 })
        );
    }

    #[test]
    fn template_off_the_lattice() {
        let d = def(2, vec![(RegionDef::All, vec![-1, 1])], vec![]);
        assert!(matches!(
            Substitution::validate(&d),
            Err(SubstError::OffAlphabet { .. })
        ));
    }

    #[test]
    fn size_cap() {
        let d = def(1, vec![(RegionDef::All, vec![-9, 9])], vec![]);
        let opts = ValidateOptions {
            max_size: 4,
            ..ValidateOptions::default()
        };
        assert_eq!(
            Substitution::validate_with(&d, &opts),
            Err(SubstError::SizeUnbounded { size: 9, cap: 4 })
        );
    }

    #[test]
    fn length_cap_is_enforced() {
        let d = def(1, vec![(RegionDef::All, vec![-1, 1])], vec![]);
        let s = Substitution::validate(&d).unwrap().with_length_cap(100);
        assert_eq!(s.iterate(0, 6).unwrap().len(), 64);
        assert!(matches!(
            s.iterate(0, 7),
            Err(SubstError::LengthCapExceeded { len: 128, cap: 100 })
        ));
    }
}
