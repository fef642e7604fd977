//! Synchronous K_r-bootstrap percolation.
//!
//! In round `t` every non-edge `uv` whose common neighbourhood in the round
//! `t-1` graph contains a clique on `r-2` vertices is added, all at once.
//! [`close`] runs the process to its fixed point and records when each edge
//! appeared. Only the non-edges that could have changed status are re-tested
//! after the first round; [`close_naive`] rescans everything and exists as a
//! reference for that shortcut.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::graph::{
    bit_set, bit_test, canonical, has_clique, has_clique_u64, iter_bits, Edge, Graph,
};

/// The clique size `r` of the K_r process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcessParams {
    r: usize,
}

impl ProcessParams {
    pub fn new(r: usize) -> Result<Self, ParamError> {
        if r < 3 {
            return Err(ParamError::CliqueSize { r, min: 3 });
        }
        Ok(ProcessParams { r })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Size of the clique an edge needs in its common neighbourhood.
    pub fn witness_size(&self) -> usize {
        self.r - 2
    }
}

/// Full history of one run of the process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfectionTrace {
    pub n: usize,
    pub r: usize,
    pub initial: Graph,
    /// Activation time of every edge of the closure; 0 for initial edges.
    pub times: BTreeMap<Edge, u32>,
    pub tau: u32,
    pub closure: Graph,
}

impl InfectionTrace {
    pub fn percolates(&self) -> bool {
        self.closure.is_complete()
    }

    pub fn time_of(&self, u: usize, v: usize) -> Option<u32> {
        self.times.get(&canonical(u, v)).copied()
    }

    /// Infection events `(t, u, v)` with `t >= 1`, sorted by `(t, u, v)`.
    pub fn events(&self) -> Vec<(u32, usize, usize)> {
        let mut ev: Vec<_> = self
            .times
            .iter()
            .filter(|(_, &t)| t > 0)
            .map(|(&(u, v), &t)| (t, u, v))
            .collect();
        ev.sort_unstable();
        ev
    }

    /// Edges added in round `t`, in lexicographic order.
    pub fn added_at(&self, t: u32) -> Vec<Edge> {
        self.times
            .iter()
            .filter(|(_, &s)| s == t)
            .map(|(&e, _)| e)
            .collect()
    }

    /// The graph `G_t`.
    pub fn graph_at(&self, t: u32) -> Graph {
        let edges: Vec<Edge> = self
            .times
            .iter()
            .filter(|(_, &s)| s <= t)
            .map(|(&e, _)| e)
            .collect();
        Graph::new(self.n, &edges).expect("trace edges are in range")
    }

    pub fn to_doc(&self) -> TraceDoc {
        TraceDoc {
            n: self.n,
            r: self.r,
            initial: self.initial.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            events: self
                .events()
                .into_iter()
                .map(|(t, u, v)| TraceEvent { u, v, t })
                .collect(),
            tau: self.tau,
            percolates: self.percolates(),
        }
    }
}

/// JSON form of an [`InfectionTrace`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub n: usize,
    pub r: usize,
    pub initial: Vec<[usize; 2]>,
    pub events: Vec<TraceEvent>,
    pub tau: u32,
    pub percolates: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub u: usize,
    pub v: usize,
    pub t: u32,
}

fn completable_in(rows: &[u64], words: usize, k: usize, u: usize, v: usize, buf: &mut [u64]) -> bool {
    let (ru, rv) = (&rows[u * words..(u + 1) * words], &rows[v * words..(v + 1) * words]);
    for i in 0..words {
        buf[i] = ru[i] & rv[i];
    }
    has_clique(rows, words, buf, k)
}

/// Non-edges that round 1 would add, in lexicographic order.
pub fn completable_edges(g: &Graph, params: ProcessParams) -> Vec<Edge> {
    let (n, words) = (g.n(), g.words());
    let rows = g.rows();
    let k = params.witness_size();
    let mut buf = vec![0u64; words];
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) && completable_in(rows, words, k, u, v, &mut buf) {
                out.push((u, v));
            }
        }
    }
    out
}

/// One synchronous round.
pub fn step(g: &Graph, params: ProcessParams) -> Graph {
    g.with_edges(&completable_edges(g, params))
        .expect("completable edges are in range")
}

fn initial_times(g: &Graph) -> BTreeMap<Edge, u32> {
    g.edges().into_iter().map(|e| (e, 0)).collect()
}

/// Runs the process to its fixed point, re-testing only non-edges whose
/// status can have changed since the previous round.
pub fn close(g: &Graph, params: ProcessParams) -> InfectionTrace {
    let (n, words) = (g.n(), g.words());
    let k = params.witness_size();
    let mut rows = g.rows().to_vec();
    let mut times = initial_times(g);
    let mut buf = vec![0u64; words];

    // candidate pairs (u, v) with u < v, stored in row u
    let mut cand = vec![0u64; n * words];
    for u in 0..n {
        for v in u + 1..n {
            if !bit_test(&rows[u * words..], v) {
                bit_set(&mut cand[u * words..(u + 1) * words], v);
            }
        }
    }

    let mut tau = 0u32;
    loop {
        let mut added = Vec::new();
        for u in 0..n {
            let row = &cand[u * words..(u + 1) * words];
            for v in iter_bits(row) {
                if !bit_test(&rows[u * words..(u + 1) * words], v)
                    && completable_in(&rows, words, k, u, v, &mut buf)
                {
                    added.push((u, v));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        tau += 1;
        for &(u, v) in &added {
            bit_set(&mut rows[u * words..(u + 1) * words], v);
            bit_set(&mut rows[v * words..(v + 1) * words], u);
            times.insert((u, v), tau);
        }

        cand.iter_mut().for_each(|w| *w = 0);
        let mark = |cand: &mut [u64], a: usize, b: usize| {
            let (a, b) = canonical(a, b);
            bit_set(&mut cand[a * words..(a + 1) * words], b);
        };
        for &(x, y) in &added {
            // non-edges at x or y: their common neighbourhoods gained a member
            for z in [x, y] {
                for w in 0..n {
                    if w != z && !bit_test(&rows[z * words..(z + 1) * words], w) {
                        mark(&mut cand, z, w);
                    }
                }
            }
            // non-edges inside N(x) ∩ N(y): their common neighbourhood gained the edge xy
            for i in 0..words {
                buf[i] = rows[x * words + i] & rows[y * words + i];
            }
            let common: Vec<usize> = iter_bits(&buf).collect();
            for (i, &a) in common.iter().enumerate() {
                for &b in &common[i + 1..] {
                    if !bit_test(&rows[a * words..(a + 1) * words], b) {
                        mark(&mut cand, a, b);
                    }
                }
            }
        }
    }

    InfectionTrace {
        n,
        r: params.r(),
        initial: g.clone(),
        times,
        tau,
        closure: Graph::from_rows(n, words, rows),
    }
}

/// Reference implementation: every round rescans all non-edges.
pub fn close_naive(g: &Graph, params: ProcessParams) -> InfectionTrace {
    let mut times = initial_times(g);
    let mut current = g.clone();
    let mut tau = 0u32;
    loop {
        let added = completable_edges(&current, params);
        if added.is_empty() {
            break;
        }
        tau += 1;
        for &e in &added {
            times.insert(e, tau);
        }
        current = current.with_edges(&added).expect("in range");
    }
    InfectionTrace {
        n: g.n(),
        r: params.r(),
        initial: g.clone(),
        times,
        tau,
        closure: current,
    }
}

pub fn saturation_time(g: &Graph, params: ProcessParams) -> u32 {
    close(g, params).tau
}

pub fn percolates(g: &Graph, params: ProcessParams) -> bool {
    close(g, params).percolates()
}

/// Allocation-free closure for graphs on at most 64 vertices.
///
/// `rows[v]` is the neighbourhood mask of `v`; the slice is overwritten with
/// the closure. Returns the saturation time.
pub fn saturate_small(rows: &mut [u64], r: usize) -> u32 {
    let n = rows.len();
    debug_assert!(n <= 64 && r >= 3);
    let k = r - 2;
    let mut tau = 0;
    let mut added: [(u8, u8); 64 * 63 / 2] = [(0, 0); 64 * 63 / 2];
    loop {
        let mut count = 0;
        for u in 0..n {
            let above = if u + 1 >= 64 { 0 } else { !0u64 << (u + 1) };
            let full = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
            let mut non = !rows[u] & above & full;
            while non != 0 {
                let v = non.trailing_zeros() as usize;
                non &= non - 1;
                if has_clique_u64(rows, rows[u] & rows[v], k) {
                    added[count] = (u as u8, v as u8);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return tau;
        }
        tau += 1;
        for &(u, v) in &added[..count] {
            rows[u as usize] |= 1u64 << v;
            rows[v as usize] |= 1u64 << u;
        }
    }
}

/// `true` iff the rows describe a complete graph.
pub fn rows_complete(rows: &[u64]) -> bool {
    let n = rows.len();
    let full = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
    rows.iter().enumerate().all(|(v, &row)| row | (1u64 << v) == full)
}

/// Single-word adjacency rows of a graph with at most 64 vertices.
pub fn small_rows(g: &Graph) -> Vec<u64> {
    assert!(g.n() <= 64, "small rows need n <= 64");
    (0..g.n()).map(|v| g.row(v)[0]).collect()
}
