//! Invariant measures from Perron–Frobenius data.
//!
//! The tail-invariant measure on paths gives the cylinder of a path ending
//! at vertex `v` on level `n` the mass `ℓ_v / λⁿ`. The shift-invariant
//! measure of a word cylinder `[w]` is evaluated by counting: each floor of
//! the tower over `σⁿ(a)` reads one letter, so full occurrences of `w` in
//! `σⁿ(a)` weighted by `ℓ_a / λⁿ` approximate `ν([w])` from below, missing
//! only occurrences that straddle two level-`n` blocks.
//!
//! Everything is generic over [`Scalar`]: closed-form rational data gives
//! exact identities, window-computed data gives floating estimates.

use std::collections::HashMap;

use serde::Serialize;

use crate::alphabet::{Letter, LetterInterval, WindowedSequence, Word};
use crate::banded::BandedMatrix;
use crate::error::MeasureError;
use crate::language::ceil_log2;
use crate::scalar::{Eigenpair, Scalar};
use crate::spectral::{series_verdict, SeriesVerdict};
use crate::subst::Substitution;

/// Finiteness verdict for `Σ_v ℓ_v`.
pub type MassVerdict = SeriesVerdict;

/// `ℓ_v / λⁿ`: the mass of every path cylinder that ends at `v` on level `n`,
/// whatever its initial vertex.
pub fn cylinder_measure_path<T: Scalar>(
    e: &Eigenpair<T>,
    v: Letter,
    n: u32,
) -> Result<T, MeasureError> {
    let l = e.left.get(&v).ok_or(MeasureError::BoundaryVertex { v })?;
    Ok(l.clone() / e.lambda.powi(n as usize))
}

/// `Σ_u f_uv ℓ_u / λⁿ⁺¹ − ℓ_v / λⁿ`, the Kolmogorov consistency defect
/// between the level-`n` cylinder at `v` and its one-level refinements.
pub fn consistency_check<T: Scalar>(
    f: &BandedMatrix,
    e: &Eigenpair<T>,
    v: Letter,
    n: u32,
) -> Result<T, MeasureError> {
    let col = f
        .column(v)
        .map_err(|_| MeasureError::BoundaryVertex { v })?;
    let mut sum = T::zero();
    for (u, m) in &col {
        let l = e
            .left
            .get(u)
            .ok_or(MeasureError::BoundaryVertex { v: *u })?;
        sum = sum + l.clone() * T::from_u64(*m);
    }
    Ok(sum / e.lambda.powi(n as usize + 1) - cylinder_measure_path(e, v, n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalMass {
    pub verdict: MassVerdict,
    /// `(K, Σ_{|v| ≤ K} ℓ_v)` for each requested K within the stored letters.
    pub partial_sums: Vec<(i64, f64)>,
}

/// Partial sums of ℓ over growing windows plus a tail verdict.
pub fn total_mass<T: Scalar>(e: &Eigenpair<T>, schedule: &[i64]) -> TotalMass {
    let left: std::collections::BTreeMap<Letter, f64> =
        e.left.iter().map(|(a, v)| (*a, v.as_f64())).collect();
    let partial_sums = schedule
        .iter()
        .map(|&k| (k, left.range(-k..=k).map(|(_, v)| v).sum()))
        .collect();
    TotalMass {
        verdict: series_verdict(&left, 0.05),
        partial_sums,
    }
}

/// Occurrence data of a fixed word inside one block `σⁿ(a)`.
#[derive(Clone, Debug)]
struct Block {
    count: u128,
    len: u128,
    /// First `min(len, |w| − 1)` letters.
    prefix: Word,
    /// Last `min(len, |w| − 1)` letters.
    suffix: Word,
}

/// Counts occurrences of `w` in `σⁿ(a)` without expanding the block: counts
/// of children add up, plus occurrences crossing each junction, which only
/// need `|w| − 1` letters on either side.
pub struct OccurrenceCounter<'s> {
    sigma: &'s Substitution,
    w: Word,
    memo: HashMap<(usize, Letter), Block>,
}

impl<'s> OccurrenceCounter<'s> {
    pub fn new(sigma: &'s Substitution, w: &[Letter]) -> Self {
        OccurrenceCounter {
            sigma,
            w: w.to_vec(),
            memo: HashMap::new(),
        }
    }

    /// Number of occurrences of `w` in `σⁿ(a)`.
    pub fn count(&mut self, n: usize, a: Letter) -> Result<u128, MeasureError> {
        Ok(self.block(n, a)?.count)
    }

    fn crossings(&self, left: &[Letter], right: &[Letter]) -> u128 {
        let k = self.w.len();
        let joined: Word = left.iter().chain(right).copied().collect();
        (0..left.len())
            .filter(|&s| s + k > left.len() && s + k <= joined.len())
            .filter(|&s| joined[s..s + k] == self.w[..])
            .count() as u128
    }

    fn block(&mut self, n: usize, a: Letter) -> Result<Block, MeasureError> {
        if let Some(b) = self.memo.get(&(n, a)) {
            return Ok(b.clone());
        }
        let keep = self.w.len().saturating_sub(1);
        let block = if n == 0 {
            let one = vec![a];
            Block {
                count: u128::from(self.w == one),
                len: 1,
                prefix: one[..keep.min(1)].to_vec(),
                suffix: one[..keep.min(1)].to_vec(),
            }
        } else {
            let mut acc: Option<Block> = None;
            for b in self.sigma.image(a).iter() {
                let child = self.block(n - 1, b)?;
                acc = Some(match acc {
                    None => child,
                    Some(x) => {
                        let cross = self.crossings(&x.suffix, &child.prefix);
                        let count = x
                            .count
                            .checked_add(child.count)
                            .and_then(|c| c.checked_add(cross))
                            .ok_or(MeasureError::Overflow)?;
                        let len = x.len.checked_add(child.len).ok_or(MeasureError::Overflow)?;
                        let mut prefix = x.prefix.clone();
                        if prefix.len() < keep {
                            prefix.extend(child.prefix.iter().take(keep - prefix.len()));
                        }
                        let suffix = if child.suffix.len() >= keep {
                            child.suffix.clone()
                        } else {
                            let tail: Word =
                                x.suffix.iter().chain(&child.suffix).copied().collect();
                            tail[tail.len().saturating_sub(keep)..].to_vec()
                        };
                        Block {
                            count,
                            len,
                            prefix,
                            suffix,
                        }
                    }
                });
            }
            acc.expect("images are non-empty")
        };
        self.memo.insert((n, a), block.clone());
        Ok(block)
    }
}

/// Letters `a` whose blocks `σⁿ(a)` can contain `w`.
fn relevant_letters(sigma: &Substitution, w: &[Letter], n: usize) -> LetterInterval {
    LetterInterval::hull(w).widen(n as i64 * sigma.size())
}

/// `ν_n([w]) = Σ_a occ(w, σⁿ(a)) ℓ_a / λⁿ`.
pub fn shift_measure_at_depth<T: Scalar>(
    sigma: &Substitution,
    e: &Eigenpair<T>,
    w: &[Letter],
    n: usize,
) -> Result<T, MeasureError> {
    let mut counter = OccurrenceCounter::new(sigma, w);
    depth_estimate(&mut counter, sigma, e, w, n)
}

fn depth_estimate<T: Scalar>(
    counter: &mut OccurrenceCounter<'_>,
    sigma: &Substitution,
    e: &Eigenpair<T>,
    w: &[Letter],
    n: usize,
) -> Result<T, MeasureError> {
    let need = relevant_letters(sigma, w, n);
    let mut sum = T::zero();
    for a in sigma.alphabet().letters_in(need) {
        let l = e
            .left
            .get(&a)
            .ok_or(MeasureError::WindowTooNarrowForDepth {
                window: stored_window(e),
                depth: n,
            })?;
        let c = counter.count(n, a)?;
        if c > 0 {
            sum = sum + l.clone() * T::from_u128(c);
        }
    }
    Ok(sum / e.lambda.powi(n))
}

fn stored_window<T>(e: &Eigenpair<T>) -> LetterInterval {
    match (e.left.keys().next(), e.left.keys().next_back()) {
        (Some(&lo), Some(&hi)) => LetterInterval::new(lo, hi),
        _ => LetterInterval::empty(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftMeasureEstimate<T> {
    pub word: Word,
    /// `(n, ν_n([w]))` for every evaluated depth.
    pub estimates: Vec<(usize, T)>,
    pub value: T,
    /// `|ν_n − ν_{n−1}|` at the accepted depth.
    pub achieved_tol: f64,
    /// `(|w| − 1) Σ_a ℓ_a / λⁿ` over the contributing letters: a bound on
    /// the mass of occurrences straddling two blocks at the accepted depth.
    pub boundary_bound: f64,
    pub depth: usize,
    /// Only set for the empty word, whose cylinder is the whole space.
    pub total_mass: Option<MassVerdict>,
}

/// Iterates `ν_n([w])` in `n` until the straddling-mass bound drops below
/// `tol`, or the estimate is positive and two consecutive steps change it by
/// less than `tol`; reaching `n_max` first is an error.
pub fn cylinder_measure_shift<T: Scalar>(
    sigma: &Substitution,
    e: &Eigenpair<T>,
    w: &[Letter],
    n_max: usize,
    window: LetterInterval,
    tol: f64,
) -> Result<ShiftMeasureEstimate<T>, MeasureError> {
    if w.is_empty() {
        let mass = total_mass(e, &[]);
        return Ok(ShiftMeasureEstimate {
            word: Vec::new(),
            estimates: Vec::new(),
            value: e.left_sum(),
            achieved_tol: 0.0,
            boundary_bound: 0.0,
            depth: 0,
            total_mass: Some(mass.verdict),
        });
    }
    if !window.contains_interval(&relevant_letters(sigma, w, n_max)) {
        return Err(MeasureError::WindowTooNarrowForDepth {
            window,
            depth: n_max,
        });
    }
    // Before σⁿ(a) can be as long as w the estimate is trivially zero.
    let n_min = (ceil_log2(w.len()) as usize).max(1);
    let mut counter = OccurrenceCounter::new(sigma, w);
    let mut estimates: Vec<(usize, T)> = Vec::new();
    let mut last_change = f64::INFINITY;
    let mut prev_change = f64::INFINITY;
    for n in 0..=n_max {
        let v = depth_estimate(&mut counter, sigma, e, w, n)?;
        if let Some((_, prev)) = estimates.last() {
            prev_change = last_change;
            last_change = (v.as_f64() - prev.as_f64()).abs();
        }
        estimates.push((n, v.clone()));
        if n < n_min {
            continue;
        }
        let ell: f64 = sigma
            .alphabet()
            .letters_in(relevant_letters(sigma, w, n))
            .filter_map(|a| e.left.get(&a).map(|x| x.as_f64()))
            .sum();
        let boundary_bound = (w.len() - 1) as f64 * ell / e.lambda.as_f64().powi(n as i32);
        // ν_n increases with n by the mass of occurrences straddling σⁿ-block
        // boundaries, so a single zero step proves nothing (the estimate is 0
        // until some block is long enough to contain w). Accept either the
        // rigorous boundary bound or two consecutive small steps from a
        // positive value.
        let settled = v.as_f64() > 0.0 && last_change < tol && prev_change < tol;
        if boundary_bound < tol || settled {
            return Ok(ShiftMeasureEstimate {
                word: w.to_vec(),
                estimates,
                value: v,
                achieved_tol: last_change,
                boundary_bound,
                depth: n,
                total_mass: None,
            });
        }
    }
    Err(MeasureError::NoConvergence {
        depth: n_max,
        last_change,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftInvarianceReport {
    pub word: Word,
    pub depth: usize,
    /// `ν([w])`.
    pub measure: f64,
    /// `Σ_b ν([bw])`.
    pub preimage_sum: f64,
    pub residual: f64,
    /// `residual / ν([w])` (infinite when ν([w]) = 0 but the sum is not).
    pub relative: f64,
    /// Letters b with `ν([bw]) > 0`.
    pub prefixes: Vec<Letter>,
}

/// Compares `ν([w])` with `Σ_b ν([bw])` at a fixed depth; the difference is
/// the mass of occurrences of `w` at the very start of a level-`depth` block.
pub fn shift_invariance_check<T: Scalar>(
    sigma: &Substitution,
    e: &Eigenpair<T>,
    w: &[Letter],
    depth: usize,
) -> Result<ShiftInvarianceReport, MeasureError> {
    let Some(&w0) = w.first() else {
        return Err(MeasureError::EmptyWord);
    };
    let lhs = shift_measure_at_depth(sigma, e, w, depth)?;
    let reach = 2 * depth as i64 * sigma.size();
    let mut rhs = T::zero();
    let mut prefixes = Vec::new();
    for b in sigma
        .alphabet()
        .letters_in(LetterInterval::new(w0 - reach, w0 + reach))
    {
        let bw: Word = std::iter::once(b).chain(w.iter().copied()).collect();
        let v = shift_measure_at_depth(sigma, e, &bw, depth)?;
        if v > T::zero() {
            prefixes.push(b);
            rhs = rhs + v;
        }
    }
    let (m, s) = (lhs.as_f64(), rhs.as_f64());
    let residual = (m - s).abs();
    Ok(ShiftInvarianceReport {
        word: w.to_vec(),
        depth,
        measure: m,
        preimage_sum: s,
        residual,
        relative: if m > 0.0 {
            residual / m
        } else if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        },
        prefixes,
    })
}

/// `σᵏ(a)` for the least k making it long enough to host `orbit_len` shifts
/// of a word of length `word_len`, anchored at its first letter.
pub fn birkhoff_seed(
    sigma: &Substitution,
    a: Letter,
    orbit_len: usize,
    word_len: usize,
) -> Result<WindowedSequence, MeasureError> {
    let need = orbit_len + word_len.saturating_sub(1);
    let mut k = 0;
    while iterated_len(sigma, a, k)? < need as u128 {
        k += 1;
    }
    Ok(WindowedSequence::new(sigma.iterate(a, k)?, 0))
}

fn iterated_len(sigma: &Substitution, a: Letter, k: usize) -> Result<u128, MeasureError> {
    // Lengths only: a single-letter occurrence counter that never matches.
    let mut counter = OccurrenceCounter::new(sigma, &[]);
    Ok(counter.block(k, a)?.len)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffReport {
    pub word: Word,
    pub orbit_len: usize,
    pub occurrences: u64,
    pub frequency: f64,
    /// Probability-normalized `ν([w])`.
    pub predicted: f64,
    pub relative_error: f64,
}

/// Frequency of `w` along the first `orbit_len` shifts of `seed`, against the
/// probability-normalized cylinder measure. No verdict is taken here.
pub fn birkhoff_check(
    sigma: &Substitution,
    e: &Eigenpair<f64>,
    w: &[Letter],
    orbit_len: usize,
    seed: &WindowedSequence,
) -> Result<BirkhoffReport, MeasureError> {
    let span = orbit_len + w.len().saturating_sub(1);
    if w.is_empty() || orbit_len == 0 || seed.len() < span {
        return Err(MeasureError::SeedTooShort {
            seed: seed.len(),
            orbit: orbit_len,
            word: w.len(),
        });
    }
    let mass = match total_mass(e, &[]).verdict {
        SeriesVerdict::Finite { value, .. } => value,
        _ => return Err(MeasureError::InfiniteMass),
    };
    let window = relevant_letters(sigma, w, 40);
    let nu = cylinder_measure_shift(sigma, e, w, 40, window, 1e-12)?.value / mass;
    let letters = &seed.letters;
    let occurrences = (0..orbit_len)
        .filter(|&i| letters[i..i + w.len()] == *w)
        .count() as u64;
    let frequency = occurrences as f64 / orbit_len as f64;
    Ok(BirkhoffReport {
        word: w.to_vec(),
        orbit_len,
        occurrences,
        frequency,
        predicted: nu,
        relative_error: (frequency - nu).abs() / nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    #[test]
    fn counter_matches_expansion() {
        for fx in Fixture::ALL {
            let s = fx.substitution();
            for w in [
                vec![0],
                vec![0, 1],
                vec![-1, 0, 1],
                vec![0, 2],
                vec![2, 0, -2],
            ] {
                let mut c = OccurrenceCounter::new(&s, &w);
                for n in 0..5 {
                    for a in -4..=4 {
                        if !s.alphabet().contains(a) {
                            continue;
                        }
                        let x = s.iterate(a, n).unwrap();
                        let brute = x.windows(w.len()).filter(|v| *v == &w[..]).count() as u128;
                        assert_eq!(c.count(n, a).unwrap(), brute, "{fx:?} {w:?} n={n} a={a}");
                    }
                }
            }
        }
    }
}
