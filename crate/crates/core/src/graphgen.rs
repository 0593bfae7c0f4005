//! Random `d`-regular bipartite multigraphs built from `d` independent uniform
//! perfect matchings, their text format, and short-cycle counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// `d` perfect matchings between two `n`-vertex sides. Matching `k` sends
/// left vertex `u` to right vertex `matchings[k][u]`. Parallel edges are kept
/// and each one is a distinct edge instance `(k, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    n: usize,
    d: usize,
    matchings: Vec<Vec<u32>>,
    // left_adj[u*d + k] = partner of u in matching k; right_adj likewise.
    left_adj: Vec<u32>,
    right_adj: Vec<u32>,
}

impl BipartiteMultigraph {
    pub fn from_matchings(n: usize, matchings: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if n > u32::MAX as usize {
            return Err(invalid("n does not fit in u32"));
        }
        let d = matchings.len();
        if d == 0 {
            return Err(invalid("need at least one matching"));
        }
        let mut left_adj = vec![0u32; n * d];
        let mut right_adj = vec![0u32; n * d];
        for (k, m) in matchings.iter().enumerate() {
            if m.len() != n {
                return Err(invalid(format!("matching {k} has {} entries, expected {n}", m.len())));
            }
            let mut seen = vec![false; n];
            for (u, &v) in m.iter().enumerate() {
                let v = v as usize;
                if v >= n || seen[v] {
                    return Err(invalid(format!("matching {k} is not a permutation of 0..{n}")));
                }
                seen[v] = true;
                left_adj[u * d + k] = v as u32;
                right_adj[v * d + k] = u as u32;
            }
        }
        Ok(Self { n, d, matchings, left_adj, right_adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matchings(&self) -> &[Vec<u32>] {
        &self.matchings
    }

    /// Right partners of left vertex `u`, indexed by matching.
    pub fn left_neighbors(&self, u: usize) -> &[u32] {
        &self.left_adj[u * self.d..(u + 1) * self.d]
    }

    /// Left partners of right vertex `v`, indexed by matching.
    pub fn right_neighbors(&self, v: usize) -> &[u32] {
        &self.right_adj[v * self.d..(v + 1) * self.d]
    }

    /// The same graph with the two sides exchanged.
    pub fn swap_sides(&self) -> Self {
        let inverse = (0..self.d).map(|k| (0..self.n).map(|v| self.right_adj[v * self.d + k]).collect()).collect();
        Self::from_matchings(self.n, inverse).expect("inverse of a permutation is a permutation")
    }

    /// Text form: `n d` on the first line, then one permutation per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.d);
        for m in &self.matchings {
            let mut first = true;
            for v in m {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        if nums.len() != 2 {
            return Err(parse_err(hline, "header must be `n d`".into()));
        }
        let n: usize = nums[0].parse().map_err(|e| parse_err(hline, format!("n: {e}")))?;
        let d: usize = nums[1].parse().map_err(|e| parse_err(hline, format!("d: {e}")))?;
        let mut matchings = Vec::with_capacity(d);
        for (i, line) in lines {
            let perm = line
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|e| parse_err(i, format!("{t}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            matchings.push(perm);
        }
        if matchings.len() != d {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {d} matchings, found {}", matchings.len()),
            });
        }
        Self::from_matchings(n, matchings)
    }
}

/// Sample from RG(n, d): `d` independent uniform permutations, reproducible
/// from `seed`. Equivalent to `sample_graph_indexed(n, d, seed, 0)`.
pub fn sample_graph(n: usize, d: usize, seed: u64) -> Result<BipartiteMultigraph> {
    sample_graph_indexed(n, d, seed, 0)
}

/// The `index`-th graph of the stream keyed by `seed`.
pub fn sample_graph_indexed(n: usize, d: usize, seed: u64, index: u64) -> Result<BipartiteMultigraph> {
    if n == 0 || d == 0 {
        return Err(invalid("sample_graph needs n >= 1 and d >= 1"));
    }
    let mut rng = stream_rng(seed, index);
    let matchings = (0..d)
        .map(|_| {
            let mut p: Vec<u32> = (0..n as u32).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    BipartiteMultigraph::from_matchings(n, matchings)
}

pub const MAX_CYCLE_LENGTH: usize = 12;

/// Number of cycles `X_i` of each even length `i ≤ i_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCensus {
    pub counts: BTreeMap<usize, u64>,
}

impl CycleCensus {
    pub fn get(&self, length: usize) -> u64 {
        self.counts.get(&length).copied().unwrap_or(0)
    }
}

/// Count simple cycles of every even length up to `i_max`.
///
/// A cycle is a set of `i` distinct edge instances through `i` distinct
/// vertices; two parallel edges form a 2-cycle. Each cycle is found as a
/// closed non-backtracking walk rooted at its smallest left vertex, once per
/// orientation.
pub fn count_cycles(g: &BipartiteMultigraph, i_max: usize) -> Result<CycleCensus> {
    if i_max < 2 || i_max % 2 != 0 {
        return Err(invalid(format!("i_max must be even and >= 2, got {i_max}")));
    }
    if i_max > MAX_CYCLE_LENGTH {
        return Err(Error::SizeCap { what: "i_max", actual: i_max, cap: MAX_CYCLE_LENGTH });
    }
    let mut closed = vec![0u64; i_max + 1];
    let mut on_left = vec![false; g.n];
    let mut on_right = vec![false; g.n];
    for root in 0..g.n {
        on_left[root] = true;
        walk_from_left(g, root, root, usize::MAX, 0, i_max, &mut on_left, &mut on_right, &mut closed);
        on_left[root] = false;
    }
    let counts = (2..=i_max).step_by(2).map(|i| (i, closed[i] / 2)).collect();
    Ok(CycleCensus { counts })
}

#[allow(clippy::too_many_arguments)]
fn walk_from_left(
    g: &BipartiteMultigraph,
    root: usize,
    u: usize,
    arrived_by: usize,
    len: usize,
    i_max: usize,
    on_left: &mut [bool],
    on_right: &mut [bool],
    closed: &mut [u64],
) {
    // At a left vertex the next edge goes right; `len + 1 < i_max` leaves
    // room for the edge that closes the cycle.
    if len + 2 > i_max {
        return;
    }
    for (k, &v) in g.left_neighbors(u).iter().enumerate() {
        if k == arrived_by {
            continue;
        }
        let v = v as usize;
        if on_right[v] {
            continue;
        }
        on_right[v] = true;
        for (k2, &w) in g.right_neighbors(v).iter().enumerate() {
            if k2 == k {
                continue;
            }
            let w = w as usize;
            if w == root {
                closed[len + 2] += 1;
            } else if w > root && !on_left[w] {
                on_left[w] = true;
                walk_from_left(g, root, w, k2, len + 2, i_max, on_left, on_right, closed);
                on_left[w] = false;
            }
        }
        on_right[v] = false;
    }
}
