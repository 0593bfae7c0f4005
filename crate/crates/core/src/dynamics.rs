//! Glauber and block dynamics for the hard-core model, magnetization traces
//! and barrier-crossing times.
//!
//! Vertices are numbered `0..n` on the left and `n..2n` on the right.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graphgen::BipartiteMultigraph;
use crate::numeric::median;
use crate::rng::stream_rng;

pub const MAX_BLOCK: usize = 20;

/// An independent set with per-vertex counts of occupied neighbours
/// (parallel edges counted with multiplicity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    pub occ1: Vec<bool>,
    pub occ2: Vec<bool>,
    pub blocked1: Vec<u32>,
    pub blocked2: Vec<u32>,
    pub size1: usize,
    pub size2: usize,
}

impl ChainState {
    pub fn empty(n: usize) -> Self {
        Self {
            occ1: vec![false; n],
            occ2: vec![false; n],
            blocked1: vec![0; n],
            blocked2: vec![0; n],
            size1: 0,
            size2: 0,
        }
    }

    /// Builds the state from occupation vectors, rejecting non-independent sets.
    pub fn from_sets(g: &BipartiteMultigraph, occ1: &[bool], occ2: &[bool]) -> Result<Self> {
        let n = g.n();
        if occ1.len() != n || occ2.len() != n {
            return Err(invalid("occupation vectors must have length n"));
        }
        let mut s = Self::empty(n);
        for u in (0..n).filter(|&u| occ1[u]) {
            s.set(g, u, true);
        }
        for v in (0..n).filter(|&v| occ2[v]) {
            if s.blocked2[v] > 0 {
                return Err(invalid(format!("right vertex {v} has an occupied neighbour")));
            }
            s.set(g, n + v, true);
        }
        Ok(s)
    }

    /// Every left vertex occupied; `V₁` has no internal edges so this is the
    /// greedy maximal occupation of `V₁`.
    pub fn fill_left(g: &BipartiteMultigraph) -> Self {
        let n = g.n();
        Self::from_sets(g, &vec![true; n], &vec![false; n]).expect("one side is always independent")
    }

    pub fn fill_right(g: &BipartiteMultigraph) -> Self {
        let n = g.n();
        Self::from_sets(g, &vec![false; n], &vec![true; n]).expect("one side is always independent")
    }

    pub fn n(&self) -> usize {
        self.occ1.len()
    }

    /// `|I ∩ V₁| − |I ∩ V₂|`.
    pub fn magnetization(&self) -> i64 {
        self.size1 as i64 - self.size2 as i64
    }

    pub fn occupancy(&self) -> usize {
        self.size1 + self.size2
    }

    pub fn is_occupied(&self, w: usize) -> bool {
        let n = self.n();
        if w < n {
            self.occ1[w]
        } else {
            self.occ2[w - n]
        }
    }

    /// Number of occupied neighbours of vertex `w`.
    pub fn blocked(&self, w: usize) -> u32 {
        let n = self.n();
        if w < n {
            self.blocked1[w]
        } else {
            self.blocked2[w - n]
        }
    }

    /// Change the occupation of `w`, updating neighbour counts. Does not check
    /// independence.
    fn set(&mut self, g: &BipartiteMultigraph, w: usize, on: bool) {
        let n = self.n();
        if self.is_occupied(w) == on {
            return;
        }
        let (nbrs, counts) = if w < n {
            (g.left_neighbors(w), &mut self.blocked2)
        } else {
            (g.right_neighbors(w - n), &mut self.blocked1)
        };
        for &x in nbrs {
            if on {
                counts[x as usize] += 1;
            } else {
                counts[x as usize] -= 1;
            }
        }
        if w < n {
            self.occ1[w] = on;
            if on {
                self.size1 += 1;
            } else {
                self.size1 -= 1;
            }
        } else {
            self.occ2[w - n] = on;
            if on {
                self.size2 += 1;
            } else {
                self.size2 -= 1;
            }
        }
    }

    /// Full recount: independence plus consistency of every cached count.
    pub fn is_consistent(&self, g: &BipartiteMultigraph) -> bool {
        let n = self.n();
        let mut b1 = vec![0u32; n];
        let mut b2 = vec![0u32; n];
        for u in 0..n {
            for &v in g.left_neighbors(u) {
                let v = v as usize;
                if self.occ1[u] && self.occ2[v] {
                    return false;
                }
                if self.occ1[u] {
                    b2[v] += 1;
                }
                if self.occ2[v] {
                    b1[u] += 1;
                }
            }
        }
        b1 == self.blocked1
            && b2 == self.blocked2
            && self.size1 == self.occ1.iter().filter(|&&x| x).count()
            && self.size2 == self.occ2.iter().filter(|&&x| x).count()
    }
}

/// Heat-bath update at a uniformly random vertex: occupied with probability
/// `λ/(1+λ)` if no neighbour is occupied, unoccupied otherwise.
pub fn glauber_step<R: Rng + ?Sized>(s: &mut ChainState, g: &BipartiteMultigraph, lambda: f64, rng: &mut R) {
    let w = rng.gen_range(0..2 * s.n());
    let on = s.blocked(w) == 0 && rng.gen::<f64>() < lambda / (1.0 + lambda);
    s.set(g, w, on);
}

/// Resample the vertices in `block` from the hard-core law conditioned on
/// everything outside it, by enumerating the admissible configurations.
pub fn block_step<R: Rng + ?Sized>(
    s: &mut ChainState,
    g: &BipartiteMultigraph,
    lambda: f64,
    block: &[usize],
    rng: &mut R,
) -> Result<()> {
    let n = s.n();
    let k = block.len();
    if k > MAX_BLOCK {
        return Err(Error::SizeCap { what: "block size", actual: k, cap: MAX_BLOCK });
    }
    let mut seen = vec![false; 2 * n];
    for &w in block {
        if w >= 2 * n || seen[w] {
            return Err(invalid(format!("block vertices must be distinct and below 2n, got {w}")));
        }
        seen[w] = true;
    }
    for &w in block {
        s.set(g, w, false);
    }
    // After clearing, a positive count means an occupied neighbour outside.
    let frozen: u32 = block.iter().enumerate().filter(|&(_, &w)| s.blocked(w) > 0).fold(0, |m, (i, _)| m | 1 << i);
    let pos: Vec<Option<usize>> = {
        let mut p = vec![None; 2 * n];
        for (i, &w) in block.iter().enumerate() {
            p[w] = Some(i);
        }
        p
    };
    let conflict: Vec<u32> = block
        .iter()
        .map(|&w| {
            let nbrs: Box<dyn Iterator<Item = usize>> = if w < n {
                Box::new(g.left_neighbors(w).iter().map(move |&v| n + v as usize))
            } else {
                Box::new(g.right_neighbors(w - n).iter().map(|&u| u as usize))
            };
            nbrs.filter_map(|x| pos[x]).fold(0u32, |m, j| m | 1 << j)
        })
        .collect();
    let mut configs = Vec::new();
    let mut weights = Vec::new();
    for mask in 0u32..1 << k {
        if mask & frozen != 0 {
            continue;
        }
        if (0..k).any(|i| mask >> i & 1 == 1 && mask & conflict[i] != 0) {
            continue;
        }
        configs.push(mask);
        weights.push(lambda.powi(mask.count_ones() as i32));
    }
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    let mut chosen = *configs.last().expect("the empty configuration is always admissible");
    for (c, w) in configs.iter().zip(&weights) {
        if r < *w {
            chosen = *c;
            break;
        }
        r -= w;
    }
    for (i, &w) in block.iter().enumerate() {
        if chosen >> i & 1 == 1 {
            s.set(g, w, true);
        }
    }
    Ok(())
}

/// A uniformly random set of `size` distinct vertices out of `2n`.
pub fn random_block<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Vec<usize> {
    sample(rng, 2 * n, size.min(2 * n)).into_vec()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Empty,
    FillLeft,
    FillRight,
    Given(ChainState),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub steps: Vec<u64>,
    pub magnetization: Vec<i64>,
    pub occupancy: Vec<usize>,
}

impl Trace {
    fn record(&mut self, step: u64, s: &ChainState) {
        self.steps.push(step);
        self.magnetization.push(s.magnetization());
        self.occupancy.push(s.occupancy());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,m,occupancy\n");
        for i in 0..self.steps.len() {
            out.push_str(&format!("{},{},{}\n", self.steps[i], self.magnetization[i], self.occupancy[i]));
        }
        out
    }
}

/// Run Glauber dynamics for `steps` steps from `init`, recording the state at
/// step 0 and every `sample_every` steps after it.
pub fn run_chain(
    g: &BipartiteMultigraph,
    lambda: f64,
    steps: u64,
    init: Init,
    sample_every: u64,
    seed: u64,
) -> Result<Trace> {
    if sample_every == 0 {
        return Err(invalid("sample_every must be positive"));
    }
    let mut s = match init {
        Init::Empty => ChainState::empty(g.n()),
        Init::FillLeft => ChainState::fill_left(g),
        Init::FillRight => ChainState::fill_right(g),
        Init::Given(s) => {
            if !s.is_consistent(g) {
                return Err(invalid("initial state is not a consistent independent set of g"));
            }
            s
        }
    };
    let mut rng = stream_rng(seed, 0);
    let mut trace = Trace::default();
    trace.record(0, &s);
    for t in 1..=steps {
        glauber_step(&mut s, g, lambda, &mut rng);
        if t % sample_every == 0 {
            trace.record(t, &s);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingSummary {
    pub max_steps: u64,
    /// Per run, the first step with `m ≤ 0`, or `None` if censored.
    pub times: Vec<Option<u64>>,
    /// Median with censored runs counted at `max_steps`.
    pub median: f64,
    pub censored: usize,
    pub censor_fraction: f64,
}

/// Steps until the magnetization first reaches `≤ 0` from the all-left
/// start, for `n_runs` independent chains. Run `r` uses stream `r` of `seed`.
pub fn crossing_time(
    g: &BipartiteMultigraph,
    lambda: f64,
    max_steps: u64,
    n_runs: usize,
    seed: u64,
) -> Result<CrossingSummary> {
    if n_runs == 0 {
        return Err(invalid("n_runs must be positive"));
    }
    let times: Vec<Option<u64>> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let mut s = ChainState::fill_left(g);
            (1..=max_steps).find(|_| {
                glauber_step(&mut s, g, lambda, &mut rng);
                s.magnetization() <= 0
            })
        })
        .collect();
    let censored = times.iter().filter(|t| t.is_none()).count();
    let values: Vec<f64> = times.iter().map(|t| t.unwrap_or(max_steps) as f64).collect();
    Ok(CrossingSummary {
        max_steps,
        median: median(&values),
        censored,
        censor_fraction: censored as f64 / n_runs as f64,
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::sample_graph;

    #[test]
    fn steps_preserve_consistency() {
        let g = sample_graph(10, 3, 1).unwrap();
        let mut rng = stream_rng(3, 0);
        let mut s = ChainState::empty(10);
        for i in 0..5000 {
            glauber_step(&mut s, &g, 2.0, &mut rng);
            if i % 7 == 0 {
                let b = random_block(10, 5, &mut rng);
                block_step(&mut s, &g, 2.0, &b, &mut rng).unwrap();
            }
            assert!(s.is_consistent(&g));
        }
    }

    #[test]
    fn blocked_vertex_stays_empty() {
        let g = BipartiteMultigraph::from_matchings(1, vec![vec![0]; 3]).unwrap();
        let mut s = ChainState::fill_left(&g);
        let mut rng = stream_rng(0, 0);
        for _ in 0..200 {
            glauber_step(&mut s, &g, 1e6, &mut rng);
            assert!(!(s.occ1[0] && s.occ2[0]));
        }
        let mut s = ChainState::fill_left(&g);
        assert!(block_step(&mut s, &g, 1.0, &[1], &mut rng).is_ok());
        assert!(!s.occ2[0]);
    }

    #[test]
    fn trace_shapes() {
        let g = sample_graph(8, 3, 2).unwrap();
        let t = run_chain(&g, 1.0, 0, Init::FillLeft, 5, 9).unwrap();
        assert_eq!(t.steps, vec![0]);
        assert_eq!(t.magnetization, vec![8]);
        let t = run_chain(&g, 1.0, 100, Init::Empty, 10, 9).unwrap();
        assert_eq!(t.steps.len(), 11);
        assert!(t.magnetization.iter().all(|m| m.abs() <= 8));
        assert_eq!(t, run_chain(&g, 1.0, 100, Init::Empty, 10, 9).unwrap());
        assert!(ChainState::from_sets(&g, &[true; 8], &[true; 8]).is_err());
    }

    #[test]
    fn crossing_edge_cases() {
        let g = sample_graph(30, 3, 5).unwrap();
        let c = crossing_time(&g, 0.01, 0, 4, 1).unwrap();
        assert_eq!(c.censored, 4);
        let fast = crossing_time(&g, 0.01, 1_000_000, 20, 1).unwrap();
        assert_eq!(fast.censored, 0);
        assert!(fast.median < 50.0 * 30.0 * 30f64.ln());
    }

    #[test]
    fn oversized_block_rejected() {
        let g = sample_graph(12, 3, 0).unwrap();
        let mut s = ChainState::empty(12);
        let b: Vec<usize> = (0..21).collect();
        assert!(block_step(&mut s, &g, 1.0, &b, &mut stream_rng(0, 0)).is_err());
    }
}
