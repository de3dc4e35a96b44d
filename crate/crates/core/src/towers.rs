//! Kakutani–Rokhlin towers and the nested complete sections A_n and B_n.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::alphabet::{Alphabet, Letter, LetterInterval, WindowedSequence, Word};
use crate::decompose::Decomposer;
use crate::diagram::{build_diagram, heights, path_index, PathPrefix};
use crate::error::{DecomposeError, TowerError};
use crate::language::generate_language;
use crate::subst::Substitution;

/// Where a point sits in a tower partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TowerAddress {
    /// `x ∈ Tᵏ[σⁿ(base)]` with `k < height = |σⁿ(base)|`.
    A {
        base: Letter,
        level: usize,
        floor: u64,
        height: u64,
    },
    /// `x ∈ Tᵏ[σ(base)]` for a word of 𝒫_n, `k < height = Σ|σ(baseᵢ)|`.
    B { base: Word, floor: u64, height: u64 },
}

impl TowerAddress {
    pub fn floor(&self) -> u64 {
        match self {
            TowerAddress::A { floor, .. } | TowerAddress::B { floor, .. } => *floor,
        }
    }

    pub fn height(&self) -> u64 {
        match self {
            TowerAddress::A { height, .. } | TowerAddress::B { height, .. } => *height,
        }
    }
}

/// A complete section: `A_n = ⊔_a [σⁿ(a)]` or `B_n = ⊔_{p ∈ 𝒫_n} [σ(p)]`.
#[derive(Clone, Debug, PartialEq)]
pub enum SectionSpec {
    A { level: usize },
    B { pn: Pn },
}

/// Desubstitutes `n` times, recording the offset at each level; the offsets
/// are exactly the edge positions of the path prefix of x.
pub fn locate_path(
    dec: &Decomposer<'_>,
    x: &WindowedSequence,
    n: usize,
    n_sigma: usize,
) -> Result<PathPrefix, TowerError> {
    let mut cur = x.clone();
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let (y, k) = dec.recognize(&cur, n_sigma)?;
        positions.push(k);
        cur = y;
    }
    Ok(PathPrefix::new(cur.letters[cur.anchor], positions))
}

/// The unique `(a, k)` with `x ∈ Tᵏ[σⁿ(a)]`.
pub fn locate_in_tower(
    dec: &Decomposer<'_>,
    x: &WindowedSequence,
    n: usize,
    n_sigma: usize,
) -> Result<TowerAddress, TowerError> {
    let sigma = dec.sigma();
    let p = locate_path(dec, x, n, n_sigma)?;
    let d = build_diagram(sigma);
    let h = heights(sigma, n, LetterInterval::new(p.top, p.top))?;
    let idx = path_index(&d, &p, &h)?;
    Ok(TowerAddress::A {
        base: p.top,
        level: n,
        floor: idx[n].0,
        height: h.get(n, p.top)?,
    })
}

/// Position of a letter in the spiral enumeration 0, −1, 1, −2, 2, … of the
/// alphabet indices.
pub fn spiral_rank(alphabet: &Alphabet, a: Letter) -> u64 {
    let i = alphabet.index(a);
    if i >= 0 {
        2 * i as u64
    } else {
        (-2 * i - 1) as u64
    }
}

fn spiral_key(alphabet: &Alphabet, w: &[Letter]) -> Vec<u64> {
    w.iter().map(|&a| spiral_rank(alphabet, a)).collect()
}

/// One tower `{Tᵏ[σ(w)]}` of the 𝒫_n family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PnTower {
    pub word: Word,
    pub height: u64,
    /// Its covering relations may involve letters outside the window.
    pub boundary: bool,
}

/// Result of the greedy removal pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pn {
    pub n: usize,
    pub window: LetterInterval,
    /// Kept towers in the spiral-lexicographic order.
    pub kept: Vec<PnTower>,
    /// Removed base words, in removal order.
    pub removed: Vec<Word>,
}

impl Pn {
    pub fn contains(&self, w: &[Letter]) -> bool {
        self.kept.iter().any(|t| t.word == w)
    }

    pub fn kept_words(&self) -> BTreeSet<Word> {
        self.kept.iter().map(|t| t.word.clone()).collect()
    }

    /// Tower table rows `(mode, base, height, boundary)`.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["mode", "base", "height", "boundary"])
            .expect("writing to memory");
        for t in &self.kept {
            let base: Vec<String> = t.word.iter().map(|a| a.to_string()).collect();
            wtr.write_record([
                "B".to_string(),
                base.join(" "),
                t.height.to_string(),
                t.boundary.to_string(),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(wtr.into_inner().expect("flushing memory writer"))
            .expect("csv output is utf-8")
    }
}

/// The greedy construction of 𝒫_n on a window.
///
/// Towers with bases [σ(w)], w ∈ ℒ_n, are arranged in lexicographic order
/// (letters ordered by the spiral enumeration). A point is described by the
/// word c ∈ ℒ_{2n−1} of blocks around it, its own block being the middle one;
/// it lies in the n towers c[i..i+n]. Walking through the kept towers in
/// order, for every point on an upper level of the current tower (its block is
/// not the first of the base word) the smallest later tower still present that
/// also contains the point is removed.
pub fn build_pn(sigma: &Substitution, n: usize, window: LetterInterval) -> Result<Pn, TowerError> {
    if n == 0 {
        return Err(TowerError::ZeroLevel);
    }
    let al = sigma.alphabet();
    let t = sigma.size();
    let towers_lang = generate_language(sigma, 2 * n - 1, window)?;
    let mut towers: Vec<Word> = towers_lang.of_len(n).cloned().collect();
    towers.sort_by_key(|w| spiral_key(&al, w));
    let rank: BTreeMap<&Word, usize> = towers.iter().enumerate().map(|(i, w)| (w, i)).collect();

    // Upper-level incidences: tower → list of (context, position i of the tower in it).
    let mut upper: BTreeMap<usize, Vec<(&Word, usize)>> = BTreeMap::new();
    let contexts: Vec<&Word> = towers_lang.of_len(2 * n - 1).collect();
    for c in &contexts {
        for i in 0..n.saturating_sub(1) {
            if let Some(&r) = rank.get(&c[i..i + n].to_vec()) {
                upper.entry(r).or_default().push((c, i));
            }
        }
    }

    let mut removed: HashSet<usize> = HashSet::new();
    let mut removal_order = Vec::new();
    for r in 0..towers.len() {
        if removed.contains(&r) {
            continue;
        }
        for (c, i) in upper.get(&r).map(Vec::as_slice).unwrap_or(&[]) {
            let victim = (0..n)
                .filter(|&j| j != *i)
                .filter_map(|j| rank.get(&c[j..j + n].to_vec()).copied())
                .filter(|&q| q > r && !removed.contains(&q))
                .min();
            if let Some(q) = victim {
                removed.insert(q);
                removal_order.push(towers[q].clone());
            }
        }
    }

    let reach = (n as i64 - 1) * t;
    let kept: Vec<PnTower> = towers
        .iter()
        .enumerate()
        .filter(|(r, _)| !removed.contains(r))
        .map(|(_, w)| {
            let hull = LetterInterval::hull(w).widen(reach);
            PnTower {
                word: w.clone(),
                height: sigma.applied_len(w) as u64,
                boundary: !window.contains_interval(&hull),
            }
        })
        .collect();
    if n > 1 && kept.iter().all(|t| t.boundary) {
        return Err(TowerError::WindowTooNarrow { window, n });
    }
    Ok(Pn {
        n,
        window,
        kept,
        removed: removal_order,
    })
}

/// All kept towers of 𝒫_n containing x, as addresses (exactly one when the
/// family is a partition near x).
pub fn locate_in_pn(
    dec: &Decomposer<'_>,
    x: &WindowedSequence,
    pn: &Pn,
    n_sigma: usize,
) -> Result<Vec<TowerAddress>, TowerError> {
    let sigma = dec.sigma();
    let (y, k) = dec.recognize(x, n_sigma)?;
    let mut out = Vec::new();
    for i in 0..pn.n {
        let Some(start) = y.anchor.checked_sub(i) else {
            return Err(insufficient(x));
        };
        let Some(word) = y.letters.get(start..start + pn.n) else {
            return Err(insufficient(x));
        };
        if pn.contains(word) {
            let below: u64 = word[..i].iter().map(|&a| sigma.image_len(a) as u64).sum();
            out.push(TowerAddress::B {
                base: word.to_vec(),
                floor: below + k as u64,
                height: sigma.applied_len(word) as u64,
            });
        }
    }
    Ok(out)
}

/// `(before, after)`: how many towers of the full candidate family, and how
/// many kept towers of 𝒫_n, contain x. For an exact partition `after == 1`;
/// the candidate family covers every point `n` times.
pub fn coverage(
    dec: &Decomposer<'_>,
    x: &WindowedSequence,
    pn: &Pn,
    n_sigma: usize,
) -> Result<(usize, usize), TowerError> {
    let (y, _) = dec.recognize(x, n_sigma)?;
    let removed: HashSet<&Word> = pn.removed.iter().collect();
    let (mut before, mut after) = (0, 0);
    for i in 0..pn.n {
        let word = y
            .anchor
            .checked_sub(i)
            .and_then(|start| y.letters.get(start..start + pn.n))
            .ok_or_else(|| insufficient(x))?;
        if pn.contains(word) {
            before += 1;
            after += 1;
        } else if removed.contains(&word.to_vec()) {
            before += 1;
        }
    }
    Ok((before, after))
}

fn insufficient(x: &WindowedSequence) -> TowerError {
    TowerError::Decompose(DecomposeError::InsufficientWindow {
        len: x.len(),
        required: x.len() + 1,
    })
}

/// Whether x lies in the base of the section.
pub fn section_membership(
    dec: &Decomposer<'_>,
    x: &WindowedSequence,
    spec: &SectionSpec,
    n_sigma: usize,
) -> Result<bool, TowerError> {
    match spec {
        SectionSpec::A { level } => Ok(locate_path(dec, x, *level, n_sigma)?.is_minimal()),
        SectionSpec::B { pn } => {
            let (y, k) = dec.recognize(x, n_sigma)?;
            if k != 0 {
                return Ok(false);
            }
            let word = y
                .letters
                .get(y.anchor..y.anchor + pn.n)
                .ok_or_else(|| insufficient(x))?;
            Ok(pn.contains(word))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_order() {
        let al = Alphabet::integers();
        let mut v = vec![2, -1, 0, 1, -2];
        v.sort_by_key(|&a| spiral_rank(&al, a));
        assert_eq!(v, vec![0, -1, 1, -2, 2]);
        let al2 = Alphabet::new(2, 0);
        assert_eq!(spiral_rank(&al2, -2), 1);
        assert_eq!(spiral_rank(&al2, 2), 2);
    }
}
