//! Labeled simple graphs stored as per-vertex bit rows.
//!
//! A [`Graph`] is an immutable value. Every row is `words` machine words wide,
//! so a common neighbourhood is a single row intersection and the clique tests
//! of the percolation engine run on plain `u64` masks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Unordered vertex pair in canonical orientation (`0 <= u < v`).
pub type Edge = (usize, usize);

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
pub(crate) fn canonical(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

// ---------------------------------------------------------------------------
// bit-row helpers shared by the engine and the clique routines

#[inline]
pub(crate) fn bit_test(row: &[u64], v: usize) -> bool {
    row[v >> 6] >> (v & 63) & 1 == 1
}

#[inline]
pub(crate) fn bit_set(row: &mut [u64], v: usize) {
    row[v >> 6] |= 1u64 << (v & 63);
}

#[inline]
pub(crate) fn bit_clear(row: &mut [u64], v: usize) {
    row[v >> 6] &= !(1u64 << (v & 63));
}

#[inline]
pub(crate) fn popcount(row: &[u64]) -> usize {
    row.iter().map(|w| w.count_ones() as usize).sum()
}

pub(crate) fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(wi, &w)| {
        let mut word = w;
        std::iter::from_fn(move || {
            if word == 0 {
                None
            } else {
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

/// True iff the vertices marked in `cand` contain a clique on `k` vertices.
///
/// `rows` is a flat adjacency matrix with `words` words per row.
pub(crate) fn has_clique(rows: &[u64], words: usize, cand: &[u64], k: usize) -> bool {
    match k {
        0 => true,
        1 => cand.iter().any(|&w| w != 0),
        _ => {
            if popcount(cand) < k {
                return false;
            }
            let mut next = vec![0u64; words];
            for v in iter_bits(cand) {
                let row = &rows[v * words..(v + 1) * words];
                // only later vertices, so each clique is visited once
                let mut any = false;
                for w in 0..words {
                    let mut mask = cand[w] & row[w];
                    if w == v >> 6 {
                        let shift = (v & 63) + 1;
                        mask &= if shift == 64 { 0 } else { !0u64 << shift };
                    } else if w < v >> 6 {
                        mask = 0;
                    }
                    next[w] = mask;
                    any |= mask != 0;
                }
                if any && has_clique(rows, words, &next, k - 1) {
                    return true;
                }
            }
            false
        }
    }
}

/// Single-word variant of [`has_clique`] for graphs with at most 64 vertices.
#[inline]
pub(crate) fn has_clique_u64(rows: &[u64], cand: u64, k: usize) -> bool {
    match k {
        0 => true,
        1 => cand != 0,
        2 => {
            let mut c = cand;
            while c != 0 {
                let v = c.trailing_zeros() as usize;
                if rows[v] & cand != 0 {
                    return true;
                }
                c &= c - 1;
            }
            false
        }
        _ => {
            if (cand.count_ones() as usize) < k {
                return false;
            }
            let mut c = cand;
            while c != 0 {
                let v = c.trailing_zeros() as usize;
                c &= c - 1;
                let next = rows[v] & c;
                if has_clique_u64(rows, next, k - 1) {
                    return true;
                }
            }
            false
        }
    }
}

// ---------------------------------------------------------------------------

/// A subset of `[0, n)` stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n,
            bits: vec![0; words_for(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            bit_set(&mut s.bits, v);
        }
        s
    }

    /// Panics if a member is outside `[0, n)`.
    pub fn of<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Self {
        let mut s = Self::empty(n);
        for v in members {
            assert!(v < n, "vertex {v} outside [0, {n})");
            bit_set(&mut s.bits, v);
        }
        s
    }

    pub(crate) fn from_bits(n: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), words_for(n));
        VertexSet { n, bits }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub(crate) fn bits(&self) -> &[u64] {
        &self.bits
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && bit_test(&self.bits, v)
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.n);
        bit_set(&mut self.bits, v);
    }

    pub fn remove(&mut self, v: usize) {
        if v < self.n {
            bit_clear(&mut self.bits, v);
        }
    }

    pub fn len(&self) -> usize {
        popcount(&self.bits)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.bits)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        VertexSet { n: self.n, bits }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        VertexSet { n: self.n, bits }
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the sorted member lists.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

// ---------------------------------------------------------------------------

/// Labeled simple graph on the vertex set `[0, n)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    m: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge_unchecked(u, v);
            }
        }
        g
    }

    /// Builds a graph from an edge list, collapsing duplicates and
    /// orienting every pair as `(min, max)`.
    pub fn new(n: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::Loop { v });
            }
            g.add_edge_unchecked(u, v);
        }
        Ok(g)
    }

    pub(crate) fn from_rows(n: usize, words: usize, rows: Vec<u64>) -> Self {
        debug_assert_eq!(rows.len(), n * words);
        let m = popcount(&rows) / 2;
        Graph { n, words, rows, m }
    }

    pub(crate) fn add_edge_unchecked(&mut self, u: usize, v: usize) {
        let w = self.words;
        if !bit_test(&self.rows[u * w..(u + 1) * w], v) {
            bit_set(&mut self.rows[u * w..(u + 1) * w], v);
            bit_set(&mut self.rows[v * w..(v + 1) * w], u);
            self.m += 1;
        }
    }

    /// Returns a copy with the extra edges added.
    pub fn with_edges(&self, extra: &[Edge]) -> Result<Self, GraphError> {
        let mut g = self.clone();
        for &(u, v) in extra {
            if u >= self.n || v >= self.n {
                return Err(GraphError::EndpointOutOfRange { u, v, n: self.n });
            }
            if u == v {
                return Err(GraphError::Loop { v });
            }
            g.add_edge_unchecked(u, v);
        }
        Ok(g)
    }

    /// Returns a copy with the listed edges removed (absent pairs are ignored).
    pub fn without_edges(&self, gone: &[Edge]) -> Self {
        let mut g = self.clone();
        let w = g.words;
        for &(u, v) in gone {
            if u < g.n && v < g.n && u != v && g.has_edge(u, v) {
                bit_clear(&mut g.rows[u * w..(u + 1) * w], v);
                bit_clear(&mut g.rows[v * w..(v + 1) * w], u);
                g.m -= 1;
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub(crate) fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub(crate) fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && bit_test(self.row(u), v)
    }

    pub fn degree(&self, v: usize) -> usize {
        popcount(self.row(v))
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        VertexSet::from_bits(self.n, self.row(v).to_vec())
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            out.extend(iter_bits(self.row(u)).filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.m == self.n * self.n.saturating_sub(1) / 2
    }

    /// True iff every edge of `self` is an edge of `other` (same `n`).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    pub fn complement(&self) -> Graph {
        let mut rows = vec![0u64; self.rows.len()];
        for u in 0..self.n {
            let r = &mut rows[u * self.words..(u + 1) * self.words];
            for v in 0..self.n {
                if v != u && !bit_test(self.row(u), v) {
                    bit_set(r, v);
                }
            }
        }
        Graph::from_rows(self.n, self.words, rows)
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> Result<VertexSet, GraphError> {
        if u >= self.n || v >= self.n {
            return Err(GraphError::EndpointOutOfRange { u, v, n: self.n });
        }
        if u == v {
            return Err(GraphError::Loop { v });
        }
        let bits = self.row(u).iter().zip(self.row(v)).map(|(a, b)| a & b).collect();
        Ok(VertexSet::from_bits(self.n, bits))
    }

    /// True iff the subgraph induced on `candidates` has a clique on `k` vertices.
    pub fn contains_clique(&self, candidates: &VertexSet, k: usize) -> bool {
        has_clique(&self.rows, self.words, candidates.bits(), k)
    }

    pub fn is_clique(&self, set: &VertexSet) -> bool {
        let members = set.to_vec();
        members
            .iter()
            .enumerate()
            .all(|(i, &u)| members[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Inclusion-maximal cliques, each listed once, sorted lexicographically.
    pub fn maximal_cliques(&self) -> Vec<VertexSet> {
        let mut out = Vec::new();
        self.maximal_cliques_bounded(usize::MAX, |c| out.push(c))
            .expect("unbounded enumeration cannot overflow");
        out.sort();
        out
    }

    /// Streams maximal cliques in enumeration order; stops with `Err(limit)`
    /// once more than `limit` cliques were produced.
    pub(crate) fn maximal_cliques_bounded<F: FnMut(VertexSet)>(
        &self,
        limit: usize,
        mut emit: F,
    ) -> Result<(), usize> {
        if self.n == 0 {
            return Ok(());
        }
        let mut count = 0usize;
        let p = VertexSet::full(self.n).bits;
        let x = vec![0u64; self.words];
        let r = vec![0u64; self.words];
        self.bron_kerbosch(r, p, x, &mut count, limit, &mut emit)
    }

    fn bron_kerbosch<F: FnMut(VertexSet)>(
        &self,
        r: Vec<u64>,
        mut p: Vec<u64>,
        mut x: Vec<u64>,
        count: &mut usize,
        limit: usize,
        emit: &mut F,
    ) -> Result<(), usize> {
        if p.iter().all(|&w| w == 0) {
            if x.iter().all(|&w| w == 0) {
                *count += 1;
                if *count > limit {
                    return Err(limit);
                }
                emit(VertexSet::from_bits(self.n, r));
            }
            return Ok(());
        }
        // pivot: vertex of P ∪ X with most neighbours in P
        let pivot = iter_bits(&p)
            .chain(iter_bits(&x))
            .max_by_key(|&u| {
                self.row(u)
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>()
            })
            .expect("P is non-empty");
        let branch: Vec<usize> = iter_bits(&p)
            .filter(|&v| !bit_test(self.row(pivot), v))
            .collect();
        for v in branch {
            let row = self.row(v);
            let np = p.iter().zip(row).map(|(a, b)| a & b).collect();
            let nx = x.iter().zip(row).map(|(a, b)| a & b).collect();
            let mut nr = r.clone();
            bit_set(&mut nr, v);
            self.bron_kerbosch(nr, np, nx, count, limit, emit)?;
            bit_clear(&mut p, v);
            bit_set(&mut x, v);
        }
        Ok(())
    }

    /// Breadth-first distances from `src`; `None` marks unreachable vertices.
    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut frontier = vec![src];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for u in frontier {
                for v in iter_bits(self.row(u)) {
                    if dist[v].is_none() {
                        dist[v] = Some(d);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// Largest shortest-path distance; `None` means infinite (disconnected).
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.distances_from(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.distances_from(0).iter().all(Option::is_some)
    }

    fn connected_without(&self, removed: &[u64]) -> bool {
        let w = self.words;
        let mut seen = removed.to_vec();
        let Some(start) = (0..self.n).find(|&v| !bit_test(removed, v)) else {
            return true;
        };
        bit_set(&mut seen, start);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for i in 0..w {
                let mut fresh = self.rows[u * w + i] & !seen[i];
                seen[i] |= fresh;
                while fresh != 0 {
                    stack.push(i * 64 + fresh.trailing_zeros() as usize);
                    fresh &= fresh - 1;
                }
            }
        }
        (0..self.n).all(|v| bit_test(&seen, v))
    }

    /// k-vertex-connectivity: more than `k` vertices and no separating set
    /// of fewer than `k` vertices. `K_n` is `(n-1)`-connected.
    pub fn is_k_connected(&self, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        if self.n <= k {
            return false;
        }
        // with n > k it suffices to try every separator of size exactly k-1
        let mut removed = vec![0u64; self.words];
        self.all_removals_connected(0, k - 1, &mut removed)
    }

    fn all_removals_connected(&self, from: usize, left: usize, removed: &mut Vec<u64>) -> bool {
        if left == 0 {
            return self.connected_without(removed);
        }
        for v in from..=self.n - left {
            bit_set(removed, v);
            let ok = self.all_removals_connected(v + 1, left - 1, removed);
            bit_clear(removed, v);
            if !ok {
                return false;
            }
        }
        true
    }

    /// Image of the graph under `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::NotAPermutation);
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(GraphError::NotAPermutation);
            }
            seen[p] = true;
        }
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.add_edge_unchecked(perm[u], perm[v]);
        }
        Ok(g)
    }

    /// Subgraph induced on `vertices`, relabelled `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (i, &a) in vertices.iter().enumerate() {
            for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.add_edge_unchecked(i, j);
                }
            }
        }
        g
    }

    /// Edge count of the subgraph induced on `set`.
    pub fn induced_edge_count(&self, set: &VertexSet) -> usize {
        set.iter()
            .map(|v| {
                self.row(v)
                    .iter()
                    .zip(set.bits())
                    .map(|(a, b)| (a & b).count_ones() as usize)
                    .sum::<usize>()
            })
            .sum::<usize>()
            / 2
    }

    /// Canonical edge-list text: header `n m`, then one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Parses the edge-list text format. Blank lines and `#` comments are
    /// skipped; the declared edge count must match the body.
    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header \"n m\"".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, body) in lines {
            let (u, v) = parse_pair(line, body)?;
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::Loop { v });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::EdgeCountMismatch {
                declared: m,
                found: edges.len(),
            });
        }
        Graph::new(n, &edges)
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace();
    let bad = |msg: &str| GraphError::Parse {
        line,
        msg: format!("{msg}: {text:?}"),
    };
    let a = it.next().ok_or_else(|| bad("expected two integers"))?;
    let b = it.next().ok_or_else(|| bad("expected two integers"))?;
    if it.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    let a = a.parse().map_err(|_| bad("not a non-negative integer"))?;
    let b = b.parse().map_err(|_| bad("not a non-negative integer"))?;
    Ok((a, b))
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

/// Plain serialisable view of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeListDoc {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for EdgeListDoc {
    fn from(g: &Graph) -> Self {
        EdgeListDoc {
            n: g.n(),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}
