//! Perron–Frobenius data of banded infinite matrices by window truncation.
//!
//! On every window `[−K, K]` of the schedule the truncated matrix is solved
//! for its Perron root and positive left/right vectors with Noda's iteration
//! (inverse iteration shifted by the Collatz–Wielandt upper bound, which
//! converges quadratically and does not care about periodicity). The roots
//! λ_K increase with K. Two regimes are then recognised:
//!
//! * **stable** — the last two windows agree to `tol`: the truncation error
//!   decays geometrically (positive recurrent matrices), and the largest
//!   window is reported directly;
//! * **extrapolated** — the truncation error is algebraic in 1/K (typical of
//!   null recurrence, where it behaves like K⁻²). λ_K and the normalized
//!   eigenvector entries are extrapolated to K = ∞ with Neville's scheme in
//!   u = 1/K; the value is accepted when the extrapolant from the whole
//!   schedule agrees with the one dropping the smallest window.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::alphabet::{Letter, LetterInterval};
use crate::banded::{BandedMatrix, WindowMatrix};
use crate::error::SpectralError;
use crate::scalar::{Eigenpair, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PfOptions {
    /// Strictly increasing half-widths K of the windows `[−K, K]`.
    pub schedule: Vec<i64>,
    /// Acceptance tolerance for λ.
    pub tol: f64,
    /// Relative tolerance for eigenvector entries to count as window-stable.
    pub vector_tol: f64,
    /// Letters within `interior_depth · t` of a window edge are never reported.
    pub interior_depth: i64,
    /// Iteration cap of the inner eigensolver.
    pub max_inner: usize,
}

impl Default for PfOptions {
    fn default() -> Self {
        PfOptions {
            schedule: (1..=8).map(|i| 16 * i).collect(),
            tol: 1e-8,
            vector_tol: 1e-6,
            interior_depth: 2,
            max_inner: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Stable,
    Extrapolated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftNormalization {
    /// Σℓ = 1 including the extrapolated geometric tails.
    SumOne,
    /// Largest interior entry equal to 1.
    MaxOne,
}

/// Verdict on a series of positive terms indexed by letters.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    /// Both tails are geometric with ratio below `1 − δ`; value includes them.
    Finite {
        value: f64,
        tol: f64,
    },
    /// Some tail does not decay (ratio ≥ `1 − δ`).
    DivergentEvidence {
        partial: f64,
    },
    Inconclusive {
        partial: f64,
    },
}

impl SeriesVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, SeriesVerdict::Finite { .. })
    }
}

/// Perron–Frobenius data on a window interior.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub eigen: Eigenpair<f64>,
    pub normalization: LeftNormalization,
    /// `max_b |(ℓF)_b − λℓ_b|` over interior letters with interior band.
    pub residual_left: f64,
    /// `max_a |(Fr)_a − λr_a|` likewise.
    pub residual_right: f64,
    /// The letters reported in `eigen`.
    pub interior: LetterInterval,
    /// λ_K for every window of the schedule.
    pub history: Vec<(i64, f64)>,
    pub regime: Regime,
    /// Estimated error of λ (last-window difference or extrapolant spread).
    pub lambda_error: f64,
    pub monotone: bool,
    pub tol: f64,
    pub vector_tol: f64,
}

impl SpectralData {
    pub fn lambda(&self) -> f64 {
        self.eigen.lambda
    }
}

/// Perron root and positive vector of `A` (right vector; pass `Aᵀ` for left).
fn noda(a: &WindowMatrix, max_iter: usize) -> Result<(f64, Vec<f64>), SpectralError> {
    let n = a.n();
    let mut x = vec![1.0; n];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let y = a.mul_vec(&x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        estimate = 0.5 * (lo + hi);
        // Written to also reject NaN.
        if hi.is_nan() || hi <= 0.0 {
            return Err(SpectralError::Degenerate);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let Some(z) = a.solve_shifted(hi, &x) else {
            break;
        };
        let zmax = z.iter().cloned().fold(0.0, f64::max);
        if zmax.is_nan() || zmax <= 0.0 || z.iter().any(|&v| v.is_nan() || v <= 0.0) {
            break;
        }
        x = z.iter().map(|v| v / zmax).collect();
    }
    Ok((estimate, x))
}

/// Neville's scheme: value at u = 0 of the interpolant through `(u_i, y_i)`.
pub fn extrapolate_to_zero(u: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = u.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (u[i] * p[i + 1] - u[i + m] * p[i]) / (u[i] - u[i + m]);
        }
    }
    p[0]
}

struct WindowSolve {
    k: i64,
    lambda: f64,
    left: BTreeMap<Letter, f64>,
    right: BTreeMap<Letter, f64>,
}

fn normalized_at(v: &[f64], letters: &[Letter], reference: Letter) -> BTreeMap<Letter, f64> {
    let i = letters
        .binary_search(&reference)
        .expect("reference letter inside every window");
    letters
        .iter()
        .zip(v)
        .map(|(&a, &x)| (a, x / v[i]))
        .collect()
}

/// Contiguous letters around `reference` satisfying `ok`.
fn contiguous_run(
    letters: impl Iterator<Item = Letter>,
    reference: Letter,
    ok: impl Fn(Letter) -> bool,
) -> Vec<Letter> {
    let all: Vec<Letter> = letters.collect();
    let Ok(c) = all.binary_search(&reference) else {
        return Vec::new();
    };
    if !ok(reference) {
        return Vec::new();
    }
    let mut lo = c;
    while lo > 0 && ok(all[lo - 1]) {
        lo -= 1;
    }
    let mut hi = c;
    while hi + 1 < all.len() && ok(all[hi + 1]) {
        hi += 1;
    }
    all[lo..=hi].to_vec()
}

/// Window-truncated Perron–Frobenius computation with acceptance as described
/// in the module documentation.
pub fn pf_eigen(f: &BandedMatrix, opts: &PfOptions) -> Result<SpectralData, SpectralError> {
    let sched = &opts.schedule;
    if sched.is_empty() || sched.windows(2).any(|w| w[0] >= w[1]) || sched[0] <= 0 {
        return Err(SpectralError::BadSchedule);
    }
    let al = f.alphabet();
    let reference = al.letter(0);
    let t = f.bandwidth().max(al.stride);

    let mut solves = Vec::with_capacity(sched.len());
    for &k in sched {
        let a = f.materialize(LetterInterval::symmetric(k))?;
        if !a.is_irreducible() {
            return Err(SpectralError::NotIrreducibleOnWindow { k });
        }
        let (lambda, r) = noda(&a, opts.max_inner)?;
        let (_, l) = noda(&a.transpose(), opts.max_inner)?;
        solves.push(WindowSolve {
            k,
            lambda,
            left: normalized_at(&l, a.letters(), reference),
            right: normalized_at(&r, a.letters(), reference),
        });
    }
    let history: Vec<(i64, f64)> = solves.iter().map(|s| (s.k, s.lambda)).collect();
    let monotone = history.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-13));

    let last = solves.last().expect("non-empty schedule");
    let stable =
        solves.len() >= 2 && (last.lambda - solves[solves.len() - 2].lambda).abs() < opts.tol;

    let (lambda, lambda_error, regime, left, right) = if stable || solves.len() == 1 {
        let prev = &solves[solves.len().saturating_sub(2)];
        let bound = prev.k - t * opts.interior_depth;
        let agree = |a: Letter| {
            let close = |m1: &BTreeMap<Letter, f64>, m2: &BTreeMap<Letter, f64>| {
                let (x, y) = (m1[&a], m2[&a]);
                (x - y).abs() <= opts.vector_tol * x.abs()
            };
            close(&last.left, &prev.left) && close(&last.right, &prev.right)
        };
        let run = contiguous_run(
            al.letters_in(LetterInterval::symmetric(bound)),
            reference,
            agree,
        );
        let pick = |m: &BTreeMap<Letter, f64>| run.iter().map(|a| (*a, m[a])).collect();
        (
            last.lambda,
            (last.lambda - prev.lambda).abs(),
            Regime::Stable,
            pick(&last.left),
            pick(&last.right),
        )
    } else {
        if solves.len() < 3 {
            return Err(SpectralError::NoConvergence { history });
        }
        let u: Vec<f64> = solves.iter().map(|s| 1.0 / s.k as f64).collect();
        let extrap = |vals: &[f64]| {
            (
                extrapolate_to_zero(&u, vals),
                extrapolate_to_zero(&u[1..], &vals[1..]),
            )
        };
        let lambdas: Vec<f64> = solves.iter().map(|s| s.lambda).collect();
        let (lam_full, lam_sub) = extrap(&lambdas);
        if (lam_full - lam_sub).abs() >= opts.tol
            || lam_full.is_nan()
            || lam_full < last.lambda * (1.0 - 1e-12)
        {
            return Err(SpectralError::NoConvergence { history });
        }
        let bound = sched[0] - t * opts.interior_depth;
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        let mut good = BTreeMap::new();
        for a in al.letters_in(LetterInterval::symmetric(bound)) {
            let lv: Vec<f64> = solves.iter().map(|s| s.left[&a]).collect();
            let rv: Vec<f64> = solves.iter().map(|s| s.right[&a]).collect();
            let (lf, ls) = extrap(&lv);
            let (rf, rs) = extrap(&rv);
            let ok = lf > 0.0
                && rf > 0.0
                && (lf - ls).abs() <= opts.vector_tol * lf
                && (rf - rs).abs() <= opts.vector_tol * rf;
            left.insert(a, lf);
            right.insert(a, rf);
            good.insert(a, ok);
        }
        let run = contiguous_run(
            al.letters_in(LetterInterval::symmetric(bound)),
            reference,
            |a| good[&a],
        );
        let pick = |m: &BTreeMap<Letter, f64>| run.iter().map(|a| (*a, m[a])).collect();
        (
            lam_full,
            (lam_full - lam_sub).abs(),
            Regime::Extrapolated,
            pick(&left),
            pick(&right),
        )
    };

    let left: BTreeMap<Letter, f64> = left;
    let right: BTreeMap<Letter, f64> = right;
    if left.is_empty() || right.is_empty() {
        return Err(SpectralError::NoConvergence { history });
    }
    let interior = LetterInterval::new(
        *left.keys().next().expect("non-empty"),
        *left.keys().next_back().expect("non-empty"),
    );

    let (left, normalization) = match series_verdict(&left, 0.05) {
        SeriesVerdict::Finite { value, .. } => (
            left.iter().map(|(a, v)| (*a, v / value)).collect(),
            LeftNormalization::SumOne,
        ),
        _ => {
            let max = left.values().cloned().fold(0.0, f64::max);
            (
                left.iter().map(|(a, v)| (*a, v / max)).collect(),
                LeftNormalization::MaxOne,
            )
        }
    };
    let eigen = Eigenpair {
        lambda,
        left,
        right,
    };
    let res = verify_eigen(f, &eigen, interior)?;
    Ok(SpectralData {
        eigen,
        normalization,
        residual_left: res.left,
        residual_right: res.right,
        interior,
        history,
        regime,
        lambda_error,
        monotone,
        tol: opts.tol,
        vector_tol: opts.vector_tol,
    })
}

/// Geometric ratio of one tail, if the last `probe` ratios are regular.
fn tail_ratio<'a>(values: impl Iterator<Item = &'a f64>, probe: usize) -> Option<f64> {
    let v: Vec<f64> = values.take(probe + 1).cloned().collect();
    if v.len() < probe + 1 {
        return None;
    }
    // `v` runs from the edge inward; ratio = outer / inner.
    let ratios: Vec<f64> = v.windows(2).map(|w| w[0] / w[1]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    (spread <= 1e-3 * mean.max(1e-300)).then_some(mean)
}

/// Decides summability of positive terms from their two tails.
pub fn series_verdict(values: &BTreeMap<Letter, f64>, delta: f64) -> SeriesVerdict {
    const PROBE: usize = 4;
    let partial: f64 = values.values().sum();
    let right = tail_ratio(values.values().rev(), PROBE);
    let left = tail_ratio(values.values(), PROBE);
    let (Some(first), Some(last)) = (values.values().next(), values.values().next_back()) else {
        return SeriesVerdict::Inconclusive { partial };
    };
    match (left, right) {
        (Some(l), Some(r)) if l < 1.0 - delta && r < 1.0 - delta => {
            let tails = first * l / (1.0 - l) + last * r / (1.0 - r);
            SeriesVerdict::Finite {
                value: partial + tails,
                tol: tails * 1e-3 + partial * 1e-12,
            }
        }
        (l, r) if l.is_some_and(|x| x >= 1.0 - delta) || r.is_some_and(|x| x >= 1.0 - delta) => {
            SeriesVerdict::DivergentEvidence { partial }
        }
        _ => SeriesVerdict::Inconclusive { partial },
    }
}

/// Residuals of the eigen-equations on the letters of `window` whose band
/// neighbourhood is available.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    /// `max_b |(ℓF)_b − λℓ_b|`.
    pub left: T,
    /// `max_a |(Fr)_a − λr_a|`.
    pub right: T,
    pub left_checked: usize,
    pub right_checked: usize,
}

/// Checks `ℓF = λℓ` and `Fr = λr` letter by letter; every equation is a finite
/// sum thanks to the band, so in rational mode the check is exact.
pub fn verify_eigen<T: Scalar>(
    f: &BandedMatrix,
    e: &Eigenpair<T>,
    window: LetterInterval,
) -> Result<ResidualReport<T>, SpectralError> {
    let mut left = T::zero();
    let mut right = T::zero();
    let (mut lc, mut rc) = (0, 0);
    for b in f.alphabet().letters_in(window) {
        if let Some(lb) = e.left.get(&b) {
            let col = f.column(b)?;
            if col.keys().all(|a| e.left.contains_key(a)) {
                let s = col.iter().fold(T::zero(), |s, (a, m)| {
                    s + e.left[a].clone() * T::from_u64(*m)
                });
                let r = (s - e.lambda.clone() * lb.clone()).abs();
                if r > left {
                    left = r;
                }
                lc += 1;
            }
        }
        if let Some(rb) = e.right.get(&b) {
            let row = f.row(b)?;
            if row.keys().all(|a| e.right.contains_key(a)) {
                let s = row.iter().fold(T::zero(), |s, (a, m)| {
                    s + e.right[a].clone() * T::from_u64(*m)
                });
                let r = (s - e.lambda.clone() * rb.clone()).abs();
                if r > right {
                    right = r;
                }
                rc += 1;
            }
        }
    }
    Ok(ResidualReport {
        left,
        right,
        left_checked: lc,
        right_checked: rc,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceOptions {
    pub n_max: usize,
    pub reference: Letter,
    /// Number of trailing (period-aggregated) terms in the slope fit.
    pub slope_window: usize,
    /// Partial sums above this count as divergence.
    pub cap: f64,
    /// Slopes above this are recurrent evidence.
    pub recurrent_slope: f64,
    /// Slopes below this are transient evidence.
    pub transient_slope: f64,
    /// Tail ratios ≥ 1 − δ count as non-decaying.
    pub tail_delta: f64,
}

impl Default for RecurrenceOptions {
    fn default() -> Self {
        RecurrenceOptions {
            n_max: 40,
            reference: 0,
            slope_window: 20,
            cap: 1e6,
            recurrent_slope: -0.9,
            transient_slope: -1.25,
            tail_delta: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceClass {
    RecurrentEvidence,
    TransientEvidence,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityClass {
    PositiveEvidence,
    NullEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceVerdict {
    pub irreducible_on_window: bool,
    pub period: u64,
    pub class: RecurrenceClass,
    pub positive_vs_null: PositivityClass,
    /// `s_N = Σ_{n≤N} f⁽ⁿ⁾_{ii} λ⁻ⁿ` for N = 1..n_max.
    pub partial_sums: Vec<f64>,
    /// `Σ_{n≤N} t_{ii}(n) λ⁻ⁿ` with first-return (taboo) counts; tends to 1
    /// exactly for recurrent matrices.
    pub taboo_sums: Vec<f64>,
    /// Log-log slope of the period-aggregated terms over the fit window.
    pub slope: f64,
    pub reference: Letter,
    pub window: LetterInterval,
    /// Verdict on `Σ ℓ_a r_a`.
    pub lr_series: SeriesVerdict,
}

/// Numerical evidence for (R-)recurrence and for positive vs null recurrence.
pub fn classify_recurrence(
    f: &BandedMatrix,
    s: &SpectralData,
    opts: &RecurrenceOptions,
    window: LetterInterval,
) -> Result<RecurrenceVerdict, SpectralError> {
    let t = f.bandwidth();
    let need = LetterInterval::new(opts.reference, opts.reference).widen(opts.n_max as i64 * t);
    if !window.contains_interval(&need) {
        return Err(SpectralError::WindowTooNarrowForDepth {
            window,
            depth: opts.n_max,
        });
    }
    let a = f.materialize(window)?;
    let irreducible = a.is_irreducible();
    let r = a
        .index_of(opts.reference)
        .ok_or(SpectralError::WindowTooNarrowForDepth {
            window,
            depth: opts.n_max,
        })?;
    let period = a.period(r).unwrap_or(1);
    let lambda = s.lambda();

    let mut v = vec![0.0; a.n()];
    v[r] = 1.0;
    let mut w = v.clone();
    let mut terms = Vec::with_capacity(opts.n_max);
    let mut partial_sums = Vec::with_capacity(opts.n_max);
    let mut taboo_sums = Vec::with_capacity(opts.n_max);
    let (mut sum, mut taboo) = (0.0, 0.0);
    for _ in 0..opts.n_max {
        v = a.vec_mul(&v).iter().map(|x| x / lambda).collect();
        w = a.vec_mul(&w).iter().map(|x| x / lambda).collect();
        terms.push(v[r]);
        sum += v[r];
        taboo += w[r];
        w[r] = 0.0;
        partial_sums.push(sum);
        taboo_sums.push(taboo);
    }

    // Aggregate over full periods so the fit sees a monotone-ish sequence.
    let p = period as usize;
    let blocks: Vec<f64> = terms
        .chunks(p)
        .filter(|c| c.len() == p)
        .map(|c| c.iter().sum())
        .collect();
    let start = blocks.len().saturating_sub(opts.slope_window);
    let pts: Vec<(f64, f64)> = blocks
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, g)| **g > 0.0)
        .map(|(m, g)| (((m + 1) as f64).ln(), g.ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let class = if sum > opts.cap || slope > opts.recurrent_slope {
        RecurrenceClass::RecurrentEvidence
    } else if slope < opts.transient_slope {
        RecurrenceClass::TransientEvidence
    } else {
        RecurrenceClass::Inconclusive
    };

    let products: BTreeMap<Letter, f64> = s
        .eigen
        .left
        .iter()
        .filter_map(|(a, l)| s.eigen.right.get(a).map(|r| (*a, l * r)))
        .collect();
    let lr_series = series_verdict(&products, opts.tail_delta);
    let positive_vs_null = match (&class, &lr_series) {
        (RecurrenceClass::TransientEvidence, _) => PositivityClass::Inconclusive,
        (_, SeriesVerdict::Finite { .. }) => PositivityClass::PositiveEvidence,
        (_, SeriesVerdict::DivergentEvidence { .. }) => PositivityClass::NullEvidence,
        _ => PositivityClass::Inconclusive,
    };
    Ok(RecurrenceVerdict {
        irreducible_on_window: irreducible,
        period,
        class,
        positive_vs_null,
        partial_sums,
        taboo_sums,
        slope,
        reference: opts.reference,
        window,
        lr_series,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
