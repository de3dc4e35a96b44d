//! Banded nonnegative integer matrices indexed by an infinite alphabet, and
//! their finite window truncations.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::alphabet::{Alphabet, Letter, LetterInterval};
use crate::error::SpectralError;
use crate::subst::Substitution;

/// Sparse row or column: index letter ↦ nonzero count.
pub type SparseRow = BTreeMap<Letter, u64>;

type RowFn = dyn Fn(Letter) -> SparseRow + Send + Sync;

/// An infinite matrix given by its bandwidth and a row generator.
#[derive(Clone)]
pub struct BandedMatrix {
    alphabet: Alphabet,
    bandwidth: i64,
    rows: Arc<RowFn>,
}

impl fmt::Debug for BandedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandedMatrix")
            .field("alphabet", &self.alphabet)
            .field("bandwidth", &self.bandwidth)
            .finish_non_exhaustive()
    }
}

impl BandedMatrix {
    pub fn new<F>(alphabet: Alphabet, bandwidth: i64, rows: F) -> Self
    where
        F: Fn(Letter) -> SparseRow + Send + Sync + 'static,
    {
        BandedMatrix {
            alphabet,
            bandwidth,
            rows: Arc::new(rows),
        }
    }

    /// The substitution matrix `m_{ab} = #b in σ(a)`.
    pub fn from_substitution(sigma: &Substitution) -> Self {
        let s = sigma.clone();
        BandedMatrix::new(sigma.alphabet(), sigma.size(), move |a| s.abelianize_row(a))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn bandwidth(&self) -> i64 {
        self.bandwidth
    }

    /// Row a, checked against the band.
    pub fn row(&self, a: Letter) -> Result<SparseRow, SpectralError> {
        let row = (self.rows)(a);
        if let Some((&b, _)) = row
            .iter()
            .find(|(&b, &v)| v > 0 && (b - a).abs() > self.bandwidth)
        {
            return Err(SpectralError::BandViolation {
                row: a,
                col: b,
                bandwidth: self.bandwidth,
            });
        }
        Ok(row.into_iter().filter(|&(_, v)| v > 0).collect())
    }

    pub fn entry(&self, a: Letter, b: Letter) -> u64 {
        (self.rows)(a).get(&b).copied().unwrap_or(0)
    }

    /// Column b: `a ↦ f_{ab}`, a finite sum thanks to the band.
    pub fn column(&self, b: Letter) -> Result<SparseRow, SpectralError> {
        let mut col = SparseRow::new();
        let t = self.bandwidth;
        for a in self.alphabet.letters_in(LetterInterval::new(b - t, b + t)) {
            if let Some(&v) = self.row(a)?.get(&b) {
                col.insert(a, v);
            }
        }
        Ok(col)
    }

    /// The principal submatrix on the alphabet letters of `window` (entries
    /// leaving the window are dropped — a Dirichlet truncation).
    pub fn materialize(&self, window: LetterInterval) -> Result<WindowMatrix, SpectralError> {
        let letters: Vec<Letter> = self.alphabet.letters_in(window).collect();
        let bw = (self.bandwidth / self.alphabet.stride) as usize;
        let width = 2 * bw + 1;
        let n = letters.len();
        let mut data = vec![0.0; n * width];
        for (i, &a) in letters.iter().enumerate() {
            for (b, v) in self.row(a)? {
                if !window.contains(b) {
                    continue;
                }
                let j = (self.alphabet.index(b) - self.alphabet.index(letters[0])) as usize;
                data[i * width + (j + bw - i)] = v as f64;
            }
        }
        Ok(WindowMatrix { letters, bw, data })
    }
}

/// A finite band matrix stored row by row with offsets `−bw..=bw`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowMatrix {
    letters: Vec<Letter>,
    bw: usize,
    data: Vec<f64>,
}

impl WindowMatrix {
    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn width(&self) -> usize {
        2 * self.bw + 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + self.bw {
            0.0
        } else {
            self.data[i * self.width() + (j + self.bw - i)]
        }
    }

    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.bw)..(i + self.bw + 1).min(self.n())
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.cols(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `xᵀ A`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        self.transpose().mul_vec(x)
    }

    pub fn transpose(&self) -> WindowMatrix {
        let mut t = WindowMatrix {
            letters: self.letters.clone(),
            bw: self.bw,
            data: vec![0.0; self.data.len()],
        };
        let w = self.width();
        for i in 0..self.n() {
            for j in self.cols(i) {
                t.data[j * w + (i + self.bw - j)] = self.get(i, j);
            }
        }
        t
    }

    /// Solves `(μI − A) z = rhs` by band LU without pivoting, which is stable
    /// for the nonsingular M-matrices arising when μ exceeds the spectral
    /// radius. Returns `None` if a pivot is not positive.
    pub fn solve_shifted(&self, mu: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.n();
        let bw = self.bw;
        let w = self.width();
        let mut m: Vec<f64> = self.data.iter().map(|v| -v).collect();
        for i in 0..n {
            m[i * w + bw] += mu;
        }
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for k in 0..n {
            let pivot = m[at(k, k)];
            if pivot.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return None;
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let factor = m[at(i, k)] / pivot;
                if factor == 0.0 {
                    continue;
                }
                m[at(i, k)] = factor;
                for j in k + 1..=last {
                    m[at(i, j)] -= factor * m[at(k, j)];
                }
            }
        }
        let mut z = rhs.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(bw)..i {
                z[i] -= m[at(i, k)] * z[k];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..=(i + bw).min(n - 1) {
                z[i] -= m[at(i, j)] * z[j];
            }
            z[i] /= m[at(i, i)];
        }
        z.iter().all(|v| v.is_finite()).then_some(z)
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.cols(i).filter(move |&j| self.get(i, j) > 0.0)
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<Option<u64>> {
        let tr;
        let g = if forward {
            self
        } else {
            tr = self.transpose();
            &tr
        };
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[start] = Some(0);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have a distance");
            for v in g.successors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Strong connectivity of the truncated graph.
    pub fn is_irreducible(&self) -> bool {
        if self.n() == 0 {
            return false;
        }
        self.reach(0, true).iter().all(Option::is_some)
            && self.reach(0, false).iter().all(Option::is_some)
    }

    /// gcd of the cycle lengths through the graph, via BFS levels from
    /// `reference`: the gcd of `d(u) + 1 − d(v)` over all edges `u → v`.
    pub fn period(&self, reference: usize) -> Option<u64> {
        let dist = self.reach(reference, true);
        let mut g = 0u64;
        for u in 0..self.n() {
            let Some(du) = dist[u] else { continue };
            for v in self.successors(u) {
                let dv = dist[v].expect("successor of a reached node is reached");
                g = g.gcd(&(du as i64 + 1 - dv as i64).unsigned_abs());
            }
        }
        (g > 0).then_some(g)
    }

    pub fn index_of(&self, a: Letter) -> Option<usize> {
        self.letters.binary_search(&a).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    #[test]
    fn materialize_drops_outside_entries() {
        let f = BandedMatrix::from_substitution(&Fixture::RandomWalk.substitution());
        let m = f.materialize(LetterInterval::symmetric(2)).unwrap();
        assert_eq!(m.n(), 5);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0) + m.get(1, 2), 2.0);
        assert_eq!(m.mul_vec(&[1.0; 5]), vec![1.0, 2.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn shifted_solve_matches_product() {
        let f = BandedMatrix::from_substitution(&Fixture::ForwardBack.substitution());
        let m = f.materialize(LetterInterval::symmetric(6)).unwrap();
        let rhs: Vec<f64> = (0..m.n()).map(|i| 1.0 + i as f64).collect();
        let mu = 10.0;
        let z = m.solve_shifted(mu, &rhs).unwrap();
        let az = m.mul_vec(&z);
        for i in 0..m.n() {
            assert!((mu * z[i] - az[i] - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn periods() {
        let rw = BandedMatrix::from_substitution(&Fixture::RandomWalk.substitution())
            .materialize(LetterInterval::symmetric(8))
            .unwrap();
        assert!(rw.is_irreducible());
        assert_eq!(rw.period(8), Some(2));
        let dm = BandedMatrix::from_substitution(&Fixture::DrunkenMan.substitution())
            .materialize(LetterInterval::symmetric(8))
            .unwrap();
        assert_eq!(dm.period(4), Some(1));
    }

    #[test]
    fn band_violation_detected() {
        let f = BandedMatrix::new(Alphabet::integers(), 1, |a| SparseRow::from([(a + 3, 1)]));
        assert!(matches!(f.row(0), Err(SpectralError::BandViolation { .. })));
    }

    #[test]
    fn columns() {
        let f = BandedMatrix::from_substitution(&Fixture::ForwardBack.substitution());
        // 0 occurs in σ(−1), σ(0) and twice in σ(1).
        assert_eq!(
            f.column(0).unwrap(),
            SparseRow::from([(-1, 1), (0, 1), (1, 2)])
        );
    }
}
