//! The stationary generalized Bratteli diagram of a substitution.
//!
//! Every level is a copy of the alphabet. The ordered edges arriving at vertex
//! a spell σ(a): edge number q comes from the vertex σ(a)[q] one level below.
//! A finite path from level 0 to vertex a_N at level N is stored top-down as
//! the top vertex plus the position j_n of the edge taken at each level, so
//! that a_{n−1} = σ(a_n)[j_n]. Positions are 0-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::alphabet::{Letter, LetterInterval, Word};
use crate::banded::SparseRow;
use crate::error::DiagramError;
use crate::subst::{Image, Substitution};

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDiagram {
    sigma: Substitution,
}

pub fn build_diagram(sigma: &Substitution) -> StationaryDiagram {
    StationaryDiagram {
        sigma: sigma.clone(),
    }
}

impl StationaryDiagram {
    pub fn substitution(&self) -> &Substitution {
        &self.sigma
    }

    /// Ordered sources of the edges into `a`.
    pub fn sources(&self, a: Letter) -> Image<'_> {
        self.sigma.image(a)
    }

    pub fn in_degree(&self, a: Letter) -> usize {
        self.sigma.image_len(a)
    }

    /// `b ↦ f_{ab}`, the number of edges from b into a.
    pub fn incidence_row(&self, a: Letter) -> SparseRow {
        let mut row = SparseRow::new();
        for b in self.sources(a).iter() {
            *row.entry(b).or_insert(0) += 1;
        }
        row
    }

    pub fn bandwidth(&self) -> i64 {
        self.sigma.size()
    }

    /// Reads the substitution back off the ordered edges.
    pub fn read_substitution(&self, window: LetterInterval) -> BTreeMap<Letter, Word> {
        self.sigma
            .alphabet()
            .letters_in(window)
            .map(|a| (a, self.sources(a).to_vec()))
            .collect()
    }
}

/// `h(n, a) = |σⁿ(a)|` on a window, computed by the level recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightTable {
    n_max: usize,
    window: LetterInterval,
    table: BTreeMap<(usize, Letter), u64>,
}

impl HeightTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn window(&self) -> LetterInterval {
        self.window
    }

    pub fn get(&self, n: usize, a: Letter) -> Result<u64, DiagramError> {
        self.table
            .get(&(n, a))
            .copied()
            .ok_or(DiagramError::MissingHeight {
                level: n,
                letter: a,
            })
    }
}

/// Heights for levels `0..=n_max` on `window`; lower levels are computed on
/// the window widened by t per remaining level so the recursion is exact.
pub fn heights(
    sigma: &Substitution,
    n_max: usize,
    window: LetterInterval,
) -> Result<HeightTable, DiagramError> {
    let al = sigma.alphabet();
    let t = sigma.size();
    let mut table = BTreeMap::new();
    for a in al.letters_in(window.widen(n_max as i64 * t)) {
        table.insert((0, a), 1u64);
    }
    for n in 1..=n_max {
        for a in al.letters_in(window.widen((n_max - n) as i64 * t)) {
            let mut h = 0u64;
            for b in sigma.image(a).iter() {
                let hb = table[&(n - 1, b)];
                h = h.checked_add(hb).ok_or(DiagramError::Overflow)?;
            }
            table.insert((n, a), h);
        }
    }
    Ok(HeightTable {
        n_max,
        window,
        table,
    })
}

/// The first N edges of a path, read downward from the top vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathPrefix {
    pub top: Letter,
    /// `positions[n − 1] = j_n`.
    pub positions: Vec<usize>,
}

impl PathPrefix {
    pub fn new(top: Letter, positions: Vec<usize>) -> Self {
        PathPrefix { top, positions }
    }

    pub fn depth(&self) -> usize {
        self.positions.len()
    }

    /// `j_n` for `1 ≤ n ≤ N`.
    pub fn j(&self, n: usize) -> usize {
        self.positions[n - 1]
    }

    /// Vertices `a_0, …, a_N` (index = level), checking the source chain.
    pub fn vertices(&self, d: &StationaryDiagram) -> Result<Vec<Letter>, DiagramError> {
        let n = self.depth();
        let mut v = vec![0; n + 1];
        v[n] = self.top;
        for level in (1..=n).rev() {
            let img = d.sources(v[level]);
            let j = self.j(level);
            if j >= img.len() {
                return Err(DiagramError::InconsistentPrefix {
                    level,
                    vertex: v[level],
                    position: j,
                    len: img.len(),
                });
            }
            v[level - 1] = img.get(j);
        }
        Ok(v)
    }

    pub fn is_minimal(&self) -> bool {
        self.positions.iter().all(|&j| j == 0)
    }

    pub fn is_maximal(&self, d: &StationaryDiagram) -> Result<bool, DiagramError> {
        let v = self.vertices(d)?;
        Ok((1..=self.depth()).all(|n| self.j(n) + 1 == d.in_degree(v[n])))
    }
}

/// `(i_n, v_n)` for `n = 0..=N`: the rank of the path among all paths from
/// level 0 into `v_n`, with `i_n = Σ_{q<j_n} h(n−1, σ(a_n)[q]) + i_{n−1}`.
pub fn path_index(
    d: &StationaryDiagram,
    p: &PathPrefix,
    h: &HeightTable,
) -> Result<Vec<(u64, Letter)>, DiagramError> {
    let v = p.vertices(d)?;
    let mut out = Vec::with_capacity(p.depth() + 1);
    out.push((0u64, v[0]));
    let mut i = 0u64;
    for (n, &vn) in v.iter().enumerate().skip(1) {
        let img = d.sources(vn);
        let mut below = 0u64;
        for q in 0..p.j(n) {
            below = below
                .checked_add(h.get(n - 1, img.get(q))?)
                .ok_or(DiagramError::Overflow)?;
        }
        i = i.checked_add(below).ok_or(DiagramError::Overflow)?;
        out.push((i, vn));
    }
    Ok(out)
}

/// Result of the Vershik successor on a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successor {
    Next(PathPrefix),
    /// Every edge of the prefix is maximal; the successor is decided by levels
    /// above the prefix (or by the max→min extension on the maximal paths).
    MaxPrefix,
}

/// Increment the lowest non-maximal edge and reset everything below it to the
/// minimal path.
pub fn vershik_successor(d: &StationaryDiagram, p: &PathPrefix) -> Result<Successor, DiagramError> {
    let v = p.vertices(d)?;
    for m in 1..=p.depth() {
        if p.j(m) + 1 < d.in_degree(v[m]) {
            let mut positions = p.positions.clone();
            positions[m - 1] += 1;
            for j in positions.iter_mut().take(m - 1) {
                *j = 0;
            }
            return Ok(Successor::Next(PathPrefix::new(p.top, positions)));
        }
    }
    Ok(Successor::MaxPrefix)
}

/// All prefixes of depth `n` into vertex `a`, in increasing rank.
pub fn enumerate_prefixes(d: &StationaryDiagram, a: Letter, n: usize) -> Vec<PathPrefix> {
    fn rec(
        d: &StationaryDiagram,
        a: Letter,
        level: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if level == 0 {
            out.push(acc.clone());
            return;
        }
        let img = d.sources(a);
        for j in 0..img.len() {
            acc[level - 1] = j;
            rec(d, img.get(j), level - 1, acc, out);
        }
    }
    let mut out = Vec::new();
    rec(d, a, n, &mut vec![0; n], &mut out);
    out.into_iter().map(|pos| PathPrefix::new(a, pos)).collect()
}

/// The prefix into `(a, n)` with rank `i` (inverse of [`path_index`]).
pub fn prefix_from_index(
    d: &StationaryDiagram,
    h: &HeightTable,
    a: Letter,
    n: usize,
    mut i: u64,
) -> Result<PathPrefix, DiagramError> {
    let mut positions = vec![0; n];
    let mut v = a;
    for level in (1..=n).rev() {
        let img = d.sources(v);
        let mut chosen = None;
        for q in 0..img.len() {
            let hb = h.get(level - 1, img.get(q))?;
            if i < hb {
                chosen = Some(q);
                break;
            }
            i -= hb;
        }
        let q = chosen.ok_or(DiagramError::InconsistentPrefix {
            level,
            vertex: v,
            position: img.len(),
            len: img.len(),
        })?;
        positions[level - 1] = q;
        v = img.get(q);
    }
    Ok(PathPrefix::new(a, positions))
}

/// Composed incidence rows `F^{n_{k+1} − n_k}` between consecutive telescoping
/// levels, for the letters of `window`.
pub fn telescope(
    d: &StationaryDiagram,
    levels: &[usize],
    window: LetterInterval,
) -> Result<Vec<BTreeMap<Letter, SparseRow>>, DiagramError> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DiagramError::BadLevels);
    }
    let al = d.substitution().alphabet();
    let mut out = Vec::new();
    for pair in levels.windows(2) {
        let m = pair[1] - pair[0];
        let mut rows = BTreeMap::new();
        for a in al.letters_in(window) {
            rows.insert(a, power_row(d, a, m)?);
        }
        out.push(rows);
    }
    Ok(out)
}

/// Row a of Fᵐ.
pub fn power_row(d: &StationaryDiagram, a: Letter, m: usize) -> Result<SparseRow, DiagramError> {
    let mut row = SparseRow::new();
    row.insert(a, 1u64);
    for _ in 0..m {
        let mut next = SparseRow::new();
        for (&b, &c) in &row {
            for (e, f) in d.incidence_row(b) {
                let add = c.checked_mul(f).ok_or(DiagramError::Overflow)?;
                let slot = next.entry(e).or_insert(0u64);
                *slot = slot.checked_add(add).ok_or(DiagramError::Overflow)?;
            }
        }
        row = next;
    }
    Ok(row)
}

fn node_id(level: usize, a: Letter) -> String {
    format!("\"{level}:{a}\"")
}

/// Graphviz rendering of levels `0..levels` over the window. Edges are labelled
/// with their 0-based order; sources outside the window are drawn as small
/// boundary points so that every in-edge of a window vertex appears.
pub fn export_dot(d: &StationaryDiagram, levels: usize, window: LetterInterval) -> String {
    let al = d.substitution().alphabet();
    let letters: Vec<Letter> = al.letters_in(window).collect();
    let mut s = String::new();
    s.push_str("digraph bratteli {\n");
    if letters.is_empty() || levels == 0 {
        s.push_str("}\n");
        return s;
    }
    s.push_str("  rankdir=TB;\n  node [shape=circle];\n");
    let mut stubs: BTreeMap<(usize, Letter), ()> = BTreeMap::new();
    for level in 0..levels {
        let _ = writeln!(s, "  subgraph level_{level} {{\n    rank=same;");
        for &a in &letters {
            let _ = writeln!(s, "    {} [label=\"{a}\"];", node_id(level, a));
        }
        s.push_str("  }\n");
    }
    for level in 1..levels {
        for &a in &letters {
            for (q, b) in d.sources(a).iter().enumerate() {
                if !window.contains(b) {
                    stubs.insert((level - 1, b), ());
                }
                let _ = writeln!(
                    s,
                    "  {} -> {} [label=\"{q}\"];",
                    node_id(level - 1, b),
                    node_id(level, a)
                );
            }
        }
    }
    for (level, b) in stubs.keys() {
        let _ = writeln!(
            s,
            "  {} [shape=point, xlabel=\"{b}\"];",
            node_id(*level, *b)
        );
    }
    s.push_str("}\n");
    s
}

/// CSV rows `(depth, top, j_sequence, i_sequence)`; sequences are listed from
/// level 1 upward and separated by `;`.
pub fn path_table_csv(
    d: &StationaryDiagram,
    h: &HeightTable,
    prefixes: &[PathPrefix],
) -> Result<String, DiagramError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["depth", "top", "j_sequence", "i_sequence"])
        .expect("writing to memory");
    for p in prefixes {
        let idx = path_index(d, p, h)?;
        let js: Vec<String> = p.positions.iter().map(|j| j.to_string()).collect();
        let is: Vec<String> = idx.iter().skip(1).map(|(i, _)| i.to_string()).collect();
        wtr.write_record([
            p.depth().to_string(),
            p.top.to_string(),
            js.join(";"),
            is.join(";"),
        ])
        .expect("writing to memory");
    }
    let bytes = wtr.into_inner().expect("flushing memory writer");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    #[test]
    fn random_walk_rank_example() {
        let d = build_diagram(&Fixture::RandomWalk.substitution());
        let h = heights(d.substitution(), 2, LetterInterval::symmetric(2)).unwrap();
        let p = PathPrefix::new(0, vec![1, 0]);
        let idx = path_index(&d, &p, &h).unwrap();
        assert_eq!(idx[1].0, 1);
        assert_eq!(idx[2], (1, 0));
        let all = enumerate_prefixes(&d, 0, 2);
        assert_eq!(all.len(), 4);
        assert_eq!(all[1], p);
    }

    #[test]
    fn successor_of_minimal() {
        let d = build_diagram(&Fixture::DrunkenMan.substitution());
        let p = PathPrefix::new(0, vec![0, 0, 0]);
        match vershik_successor(&d, &p).unwrap() {
            Successor::Next(q) => assert_eq!(q.positions, vec![1, 0, 0]),
            Successor::MaxPrefix => panic!("minimal prefix has a successor"),
        }
        let top = PathPrefix::new(0, vec![3, 3, 3]);
        assert_eq!(vershik_successor(&d, &top).unwrap(), Successor::MaxPrefix);
    }

    #[test]
    fn inconsistent_prefix_rejected() {
        let d = build_diagram(&Fixture::RandomWalk.substitution());
        assert!(matches!(
            PathPrefix::new(0, vec![2]).vertices(&d),
            Err(DiagramError::InconsistentPrefix { .. })
        ));
    }

    #[test]
    fn empty_window_dot() {
        let d = build_diagram(&Fixture::RandomWalk.substitution());
        assert_eq!(
            export_dot(&d, 2, LetterInterval::empty()),
            "digraph bratteli {\n}\n"
        );
    }
}
