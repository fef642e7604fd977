//! Extremal constructions: `K_r - e`, paths, the chain family `H_t`, the
//! layered family `L_h` and its reduced intersection graph.
//!
//! Builders return one canonical member together with a layout naming the
//! role of every vertex. Verifiers accept any graph/layout pair and report
//! each violated condition instead of failing.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::graph::{canonical, Edge, Graph};

fn binom2(x: usize) -> usize {
    x * x.saturating_sub(1) / 2
}

/// One failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: String,
    pub detail: String,
}

/// Outcome of a structural verification.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    fn push(&mut self, condition: impl Into<String>, detail: impl Into<String>) {
        self.violations.push(Violation {
            condition: condition.into(),
            detail: detail.into(),
        });
    }

    fn finish(mut self) -> Self {
        self.ok = self.violations.is_empty();
        self
    }

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// `K_r` minus the edge `(r-2, r-1)`.
pub fn build_kr_minus_e(r: usize) -> Result<Graph, ParamError> {
    if r < 3 {
        return Err(ParamError::CliqueSize { r, min: 3 });
    }
    let mut edges = Vec::new();
    for u in 0..r {
        for v in u + 1..r {
            if (u, v) != (r - 2, r - 1) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(r, &edges).expect("in range"))
}

/// Path `0 - 1 - ... - m` with `m` edges.
pub fn build_path(m: usize) -> Graph {
    let edges: Vec<Edge> = (0..m).map(|i| (i, i + 1)).collect();
    Graph::new(m + 1, &edges).expect("in range")
}

// ---------------------------------------------------------------------------
// H_t

/// Vertex roles of a member of `H_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtLayout {
    pub r: usize,
    pub t: usize,
    /// The `K_{r-1}` body.
    pub body: Vec<usize>,
    /// `v_1, ..., v_t`.
    pub chain: Vec<usize>,
    /// The body vertex playing `v_0`.
    pub v0: usize,
}

impl HtLayout {
    /// Vertices of `V_s` in layout order (body, then `v_1..v_s`).
    pub fn prefix(&self, s: usize) -> Vec<usize> {
        let mut v = self.body.clone();
        v.extend_from_slice(&self.chain[..s]);
        v
    }

    /// Role label per vertex: `body` or `chain:k`.
    pub fn roles(&self, n: usize) -> Vec<String> {
        let mut roles = vec![String::from("unused"); n];
        for &b in &self.body {
            roles[b] = "body".into();
        }
        for (k, &c) in self.chain.iter().enumerate() {
            roles[c] = format!("chain:{}", k + 1);
        }
        roles
    }
}

/// Body positions adjacent to `v_s` in the canonical realization.
///
/// `v_1` misses only the designated body vertex `r-2`; even `v_s` include it,
/// odd `v_s` (s >= 3) exclude it, which keeps condition (iv) satisfied.
pub(crate) fn chain_body_neighbors(r: usize, s: usize) -> Vec<usize> {
    if s == 1 {
        (0..r - 2).collect()
    } else if s % 2 == 0 {
        (0..r.saturating_sub(4)).chain([r - 2]).collect()
    } else {
        (1..r - 2).collect()
    }
}

/// Body vertex `u` whose edge to `v_s` appears exactly at time `s`.
pub(crate) fn late_partner(r: usize, s: usize) -> usize {
    if s % 2 == 1 {
        r - 2
    } else {
        r - 3
    }
}

/// Canonical member of `H_t`: body `0..r-1`, `v_s = r-2+s`, `v_0 = 0`.
pub fn build_ht(r: usize, t: usize) -> Result<(Graph, HtLayout), ParamError> {
    if r < 4 {
        return Err(ParamError::CliqueSize { r, min: 4 });
    }
    if t < 1 {
        return Err(ParamError::OutOfRange {
            name: "t",
            value: t,
            reason: "H_t needs t >= 1",
        });
    }
    let body: Vec<usize> = (0..r - 1).collect();
    let chain: Vec<usize> = (1..=t).map(|s| r - 2 + s).collect();
    let edges = ht_edges(r, &body, &chain);
    let g = Graph::new(r - 1 + t, &edges).expect("in range");
    Ok((
        g,
        HtLayout {
            r,
            t,
            body,
            chain,
            v0: 0,
        },
    ))
}

fn ht_edges(r: usize, body: &[usize], chain: &[usize]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for (i, &a) in body.iter().enumerate() {
        for &b in &body[i + 1..] {
            edges.push(canonical(a, b));
        }
    }
    for (k, &v) in chain.iter().enumerate() {
        let s = k + 1;
        if s >= 2 {
            edges.push(canonical(v, chain[k - 1]));
        }
        for b in chain_body_neighbors(r, s) {
            edges.push(canonical(v, body[b]));
        }
    }
    edges
}

/// Checks conditions (i)-(iv) of the recursive definition at every level,
/// plus the vertex and edge counts.
///
/// Condition (iv) is checked for `s >= 2`; at `s = 1` every neighbour of
/// `v_1` other than `v_0` is a body vertex and hence adjacent to `v_0`.
pub fn verify_ht(g: &Graph, layout: &HtLayout) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let r = layout.r;
    let t = layout.t;
    if r < 4 || layout.body.len() != r - 1 || layout.chain.len() != t {
        rep.push(
            "layout",
            format!(
                "expected body of {} and chain of {t}, got {} and {}",
                r.saturating_sub(1),
                layout.body.len(),
                layout.chain.len()
            ),
        );
        return rep.finish();
    }
    let all = layout.prefix(t);
    let mut seen = vec![false; g.n()];
    for &v in &all {
        if v >= g.n() || seen[v] {
            rep.push("layout", format!("vertex {v} repeated or out of range"));
            return rep.finish();
        }
        seen[v] = true;
    }
    if !layout.body.contains(&layout.v0) {
        rep.push("layout", format!("v0 = {} is not a body vertex", layout.v0));
        return rep.finish();
    }

    let expect_v = r - 1 + t;
    let expect_e = binom2(r - 1) + t * (r - 2);
    if g.n() != expect_v {
        rep.push("size", format!("v = {} but r-1+t = {expect_v}", g.n()));
    }
    if g.edge_count() != expect_e {
        rep.push(
            "size",
            format!("e = {} but C(r-1,2)+t(r-2) = {expect_e}", g.edge_count()),
        );
    }

    // (i): the body is H_0 = K_{r-1}; the recursion is then pinned down by
    // the per-level neighbourhoods below
    for (i, &a) in layout.body.iter().enumerate() {
        for &b in &layout.body[i + 1..] {
            if !g.has_edge(a, b) {
                rep.push("i", format!("body pair ({a}, {b}) is not an edge"));
            }
        }
    }

    let mut prev_nbrs: Vec<usize> = Vec::new();
    for s in 1..=t {
        let v = layout.chain[s - 1];
        let earlier = layout.prefix(s - 1);
        let nbrs: Vec<usize> = earlier.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        let prev = if s == 1 { layout.v0 } else { layout.chain[s - 2] };
        if !nbrs.contains(&prev) {
            rep.push("ii", format!("s = {s}: v_{} = {prev} is not adjacent to v_{s} = {v}", s - 1));
        }
        if nbrs.len() != r - 2 {
            rep.push(
                "iii",
                format!("s = {s}: v_{s} = {v} has {} neighbours in V_{} (want {})", nbrs.len(), s - 1, r - 2),
            );
        }
        if s >= 2 {
            let rest: Vec<usize> = nbrs.iter().copied().filter(|&w| w != prev).collect();
            if rest.iter().all(|w| prev_nbrs.contains(w)) {
                rep.push(
                    "iv",
                    format!("s = {s}: N(v_{s}) minus v_{} is contained in N(v_{})", s - 1, s - 1),
                );
            }
        }
        prev_nbrs = nbrs;
    }
    // no edges may leave the layout's vertex set
    for (a, b) in g.edges() {
        if !seen[a] || !seen[b] {
            rep.push("i", format!("edge ({a}, {b}) leaves V_t"));
        }
    }
    rep.finish()
}

// ---------------------------------------------------------------------------
// L_h

/// One source `S_{i,j}`: a copy of `H_i` with one body edge deleted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLayout {
    /// The `K_{r-1}` body (in `H_i` position order).
    pub body: Vec<usize>,
    /// `v_1, ..., v_i`; `v_k` for `k >= 2` lives in a source of layer `i-k+1`.
    pub chain: Vec<usize>,
    /// Deleted body edge; `None` for the seed source `S_{1,1}`.
    pub missing: Option<Edge>,
}

impl SourceLayout {
    pub fn vertices(&self) -> Vec<usize> {
        let mut v = self.body.clone();
        v.extend_from_slice(&self.chain);
        v
    }

    /// The source as an `H_i` layout on its own vertex list.
    pub fn ht_layout(&self, r: usize) -> HtLayout {
        HtLayout {
            r,
            t: self.chain.len(),
            body: self.body.clone(),
            chain: self.chain.clone(),
            v0: self.body[0],
        }
    }
}

/// One bridge: `K_r` minus two vertex-disjoint edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeLayout {
    pub vertices: Vec<usize>,
    /// First entry: pair shared with the source it leaves; second: pair
    /// shared with the next source (fresh vertices for the last bridge).
    pub missing: [Edge; 2],
}

/// Roles of all vertices of a member of `L_h`.
///
/// Layers and positions are 0-based here: `sources[i][j]` is `S_{i+1,j+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhLayout {
    pub r: usize,
    pub h: usize,
    pub sources: Vec<Vec<SourceLayout>>,
    pub bridges: Vec<Vec<BridgeLayout>>,
    /// `perms[i][l][j]`: position in layer `l <= i` of the source holding a
    /// vertex of source `(i, j)`; `perms[i][i]` is the identity.
    pub perms: Vec<Vec<Vec<usize>>>,
}

impl LhLayout {
    /// `(layer, position)` of the source a bridge hands over to.
    pub fn successor(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if j + 1 < self.h {
            Some((i, j + 1))
        } else if i + 1 < self.h {
            Some((i + 1, 0))
        } else {
            None
        }
    }

    /// `(layer, position)` of the bridge feeding source `(i, j)`.
    pub fn predecessor_bridge(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if j > 0 {
            Some((i, j - 1))
        } else if i > 0 {
            Some((i - 1, self.h - 1))
        } else {
            None
        }
    }

    pub fn vertex_count(&self) -> usize {
        let mut max = 0;
        for row in &self.sources {
            for s in row {
                max = max.max(s.vertices().into_iter().max().unwrap_or(0));
            }
        }
        for row in &self.bridges {
            for b in row {
                max = max.max(b.vertices.iter().copied().max().unwrap_or(0));
            }
        }
        max + 1
    }

    /// Role labels per vertex: `body`/`chain:k` within `source:(i,j)`,
    /// `bridge:(i,j)`; 1-based indices, several roles joined by `;`.
    pub fn roles(&self) -> Vec<String> {
        let mut roles: Vec<Vec<String>> = vec![Vec::new(); self.vertex_count()];
        for (i, row) in self.sources.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let tag = format!("source:({},{})", i + 1, j + 1);
                for &b in &s.body {
                    roles[b].push(format!("{tag}:body"));
                }
                for (k, &c) in s.chain.iter().enumerate() {
                    roles[c].push(format!("{tag}:chain:{}", k + 1));
                }
            }
        }
        for (i, row) in self.bridges.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                for &v in &b.vertices {
                    roles[v].push(format!("bridge:({},{})", i + 1, j + 1));
                }
            }
        }
        roles.into_iter().map(|r| r.join(";")).collect()
    }
}

pub(crate) fn is_prime(h: usize) -> bool {
    h >= 2 && (2..).take_while(|d| d * d <= h).all(|d| h % d != 0)
}

/// Default permutation family `π_i^l(j) = (j + (i - l)·i) mod h` with
/// 1-based layers `i, l` and 0-based positions `j`.
pub fn default_perms(h: usize) -> Vec<Vec<Vec<usize>>> {
    (0..h)
        .map(|a| {
            let i = a + 1;
            (0..=a)
                .map(|l| {
                    let shift = (a - l) * i;
                    (0..h).map(|j| (j + shift) % h).collect()
                })
                .collect()
        })
        .collect()
}

/// Canonical member of `L_h` for `r >= 5` and prime `h`.
///
/// Vertices are numbered layer by layer, sources before bridges. A source
/// of layer `i` owns its body and `v_1`; its `v_k` (k >= 2) is the first
/// unused vertex of the source `π_i^{i-k+1}(j)` in layer `i-k+1`, taking
/// vertices outside every bridge before bridge vertices. Each bridge joins
/// `{v_i, u}` of its source, where `v_i u` appears at the source's last
/// step, to the deleted body edge of the next source.
pub fn build_lh(r: usize, h: usize) -> Result<(Graph, LhLayout), ParamError> {
    if r < 5 {
        return Err(ParamError::CliqueSize { r, min: 5 });
    }
    if h < 2 {
        return Err(ParamError::OutOfRange {
            name: "h",
            value: h,
            reason: "L_h needs at least two layers",
        });
    }
    if !is_prime(h) {
        return Err(ParamError::NotPrime { h });
    }
    let perms = default_perms(h);

    // layer vertices: body + v_1 per source, then fresh bridge vertices
    let mut next = 0usize;
    let mut own: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h]; h];
    let mut fresh: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h]; h];
    for a in 0..h {
        for slot in own[a].iter_mut() {
            *slot = (next..next + r).collect();
            next += r;
        }
        for j in 0..h {
            let k = if (a, j) == (h - 1, h - 1) { r - 2 } else { r - 4 };
            fresh[a][j] = (next..next + k).collect();
            next += k;
        }
    }
    let n = next;

    // vertices of each source touched by its own bridges
    let bridge_touched = |a: usize, j: usize| -> Vec<usize> {
        let i = a + 1;
        let o = &own[a][j];
        let mut t = vec![o[late_partner(r, i)]];
        if i == 1 {
            t.push(o[r - 1]);
        }
        if (a, j) != (0, 0) {
            t.push(o[0]);
            t.push(o[1]);
        }
        t
    };

    let mut used: Vec<Vec<Vec<bool>>> = vec![vec![vec![false; r]; h]; h];
    let mut chains: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h]; h];
    for a in 0..h {
        for j in 0..h {
            let mut chain = vec![own[a][j][r - 1]];
            for k in 2..=a + 1 {
                let l = a + 1 - k;
                let host = perms[a][l][j];
                let touched = bridge_touched(l, host);
                let pick = (0..r)
                    .find(|&p| !used[l][host][p] && !touched.contains(&own[l][host][p]))
                    .or_else(|| (0..r).find(|&p| !used[l][host][p]))
                    .ok_or(ParamError::OutOfRange {
                        name: "h",
                        value: h,
                        reason: "too many lower sources for one upper source; need h - 1 <= r",
                    })?;
                used[l][host][pick] = true;
                chain.push(own[l][host][pick]);
            }
            chains[a][j] = chain;
        }
    }

    let mut sources = vec![Vec::with_capacity(h); h];
    for a in 0..h {
        for j in 0..h {
            let body = own[a][j][..r - 1].to_vec();
            let missing = if (a, j) == (0, 0) {
                None
            } else {
                Some(canonical(body[0], body[1]))
            };
            sources[a].push(SourceLayout {
                body,
                chain: chains[a][j].clone(),
                missing,
            });
        }
    }

    let mut bridges = vec![Vec::with_capacity(h); h];
    for a in 0..h {
        for j in 0..h {
            let s = &sources[a][j];
            let i = a + 1;
            let out_pair = canonical(s.chain[i - 1], s.body[late_partner(r, i)]);
            let f = &fresh[a][j];
            let (vertices, second) = match successor_of(h, a, j) {
                Some((na, nj)) => {
                    let nb = &sources[na][nj].body;
                    let mut v = vec![out_pair.0, out_pair.1, nb[0], nb[1]];
                    v.extend_from_slice(f);
                    (v, canonical(nb[0], nb[1]))
                }
                None => {
                    let mut v = vec![out_pair.0, out_pair.1];
                    v.extend_from_slice(f);
                    (v, canonical(f[0], f[1]))
                }
            };
            bridges[a].push(BridgeLayout {
                vertices,
                missing: [out_pair, second],
            });
        }
    }

    let mut edges: Vec<Edge> = Vec::new();
    for row in &sources {
        for s in row {
            for e in ht_edges(r, &s.body, &s.chain) {
                if Some(e) != s.missing {
                    edges.push(e);
                }
            }
        }
    }
    for row in &bridges {
        for b in row {
            for (x, &p) in b.vertices.iter().enumerate() {
                for &q in &b.vertices[x + 1..] {
                    let e = canonical(p, q);
                    if !b.missing.contains(&e) {
                        edges.push(e);
                    }
                }
            }
        }
    }
    let g = Graph::new(n, &edges).expect("in range");
    Ok((
        g,
        LhLayout {
            r,
            h,
            sources,
            bridges,
            perms,
        },
    ))
}

fn successor_of(h: usize, a: usize, j: usize) -> Option<(usize, usize)> {
    if j + 1 < h {
        Some((a, j + 1))
    } else if a + 1 < h {
        Some((a + 1, 0))
    } else {
        None
    }
}

/// Closed-form vertex count of `L_h`.
pub fn lh_vertex_formula(r: usize, h: usize) -> usize {
    2 * r * h * h - 4 * h * h + 2
}

/// Closed-form edge count `h²(r² - 3r/2 - 3) + h³(r/2 - 1)`, computed in
/// halves to stay in integers.
pub fn lh_edge_formula(r: usize, h: usize) -> usize {
    let twice = h * h * (2 * r * r - 3 * r - 6) + h * h * h * (r - 2);
    twice / 2
}

/// Closed-form saturation time `h²(h+3)/2`.
pub fn lh_tau_formula(h: usize) -> usize {
    h * h * (h + 3) / 2
}

fn check_perms(layout: &LhLayout, rep: &mut VerificationReport) {
    let h = layout.h;
    if layout.perms.len() != h {
        rep.push("perm", format!("expected {h} layers of permutations"));
        return;
    }
    for a in 0..h {
        if layout.perms[a].len() != a + 1 {
            rep.push("perm", format!("layer {} needs {} maps", a + 1, a + 1));
            return;
        }
        for (l, p) in layout.perms[a].iter().enumerate() {
            let mut seen = vec![false; h];
            let bijective = p.len() == h
                && p.iter().all(|&x| x < h && !std::mem::replace(&mut seen[x], true));
            if !bijective {
                rep.push("perm", format!("π_{}^{} is not a permutation of [h]", a + 1, l + 1));
            }
            if l == a && p.iter().enumerate().any(|(j, &x)| x != j) {
                rep.push("perm", format!("π_{}^{} is not the identity", a + 1, a + 1));
            }
        }
    }
    if !rep.violations.is_empty() {
        return;
    }
    // two sources may share a host source in at most one layer
    for a1 in 0..h {
        for a2 in 0..a1 {
            for j1 in 0..h {
                for j2 in 0..h {
                    let shared: Vec<usize> = (0..=a2)
                        .filter(|&l| layout.perms[a1][l][j1] == layout.perms[a2][l][j2])
                        .collect();
                    if shared.len() > 1 {
                        rep.push(
                            "perm_compat",
                            format!(
                                "sources ({},{}) and ({},{}) meet in layers {:?}",
                                a1 + 1,
                                j1 + 1,
                                a2 + 1,
                                j2 + 1,
                                shared.iter().map(|l| l + 1).collect::<Vec<_>>()
                            ),
                        );
                    }
                }
            }
        }
    }
}

/// Checks the intersection pattern, the shape of every source and bridge,
/// the placement of chain vertices and the permutation family.
pub fn verify_lh(g: &Graph, layout: &LhLayout) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let (r, h) = (layout.r, layout.h);
    if layout.sources.len() != h
        || layout.bridges.len() != h
        || layout.sources.iter().any(|row| row.len() != h)
        || layout.bridges.iter().any(|row| row.len() != h)
    {
        rep.push("layout", format!("expected {h} x {h} sources and bridges"));
        return rep.finish();
    }
    let out_of_range = layout
        .sources
        .iter()
        .flatten()
        .flat_map(|s| s.vertices())
        .chain(layout.bridges.iter().flatten().flat_map(|b| b.vertices.clone()))
        .any(|v| v >= g.n());
    if out_of_range {
        rep.push("layout", "vertex outside the graph");
        return rep.finish();
    }

    check_perms(layout, &mut rep);

    let src_sets: Vec<Vec<Vec<usize>>> = layout
        .sources
        .iter()
        .map(|row| row.iter().map(|s| s.vertices()).collect())
        .collect();
    let inter = |a: &[usize], b: &[usize]| -> Vec<usize> {
        a.iter().copied().filter(|x| b.contains(x)).collect()
    };

    // sources: shape and chain placement
    for a in 0..h {
        for j in 0..h {
            let s = &layout.sources[a][j];
            let i = a + 1;
            let tag = format!("source ({},{})", i, j + 1);
            if s.body.len() != r - 1 || s.chain.len() != i {
                rep.push("source_shape", format!("{tag}: body {} / chain {}", s.body.len(), s.chain.len()));
                continue;
            }
            match s.missing {
                None if (a, j) != (0, 0) => rep.push("source_shape", format!("{tag}: no deleted edge")),
                Some((x, y)) if !(s.body.contains(&x) && s.body.contains(&y)) => {
                    rep.push("source_shape", format!("{tag}: deleted edge ({x}, {y}) is not a body edge"))
                }
                Some((x, y)) if g.has_edge(x, y) => {
                    rep.push("source_shape", format!("{tag}: deleted edge ({x}, {y}) is present"))
                }
                _ => {}
            }
            let verts = s.vertices();
            let mut local = g.induced(&verts);
            if let Some((x, y)) = s.missing {
                let px = verts.iter().position(|&v| v == x);
                let py = verts.iter().position(|&v| v == y);
                if let (Some(px), Some(py)) = (px, py) {
                    local = local.with_edges(&[(px, py)]).expect("in range");
                }
            }
            let local_layout = HtLayout {
                r,
                t: i,
                body: (0..r - 1).collect(),
                chain: (r - 1..r - 1 + i).collect(),
                v0: 0,
            };
            let sub = verify_ht(&local, &local_layout);
            for v in sub.violations {
                rep.push("source_iso", format!("{tag}: ({}) {}", v.condition, v.detail));
            }
            for k in 2..=i {
                let l = a + 1 - k;
                let host = layout.perms[a][l][j];
                if !src_sets[l][host].contains(&s.chain[k - 1]) {
                    rep.push(
                        "chain_placement",
                        format!("{tag}: v_{k} is not in source ({}, {})", l + 1, host + 1),
                    );
                }
            }
        }
    }

    // bridges: K_r minus two disjoint edges
    for a in 0..h {
        for j in 0..h {
            let b = &layout.bridges[a][j];
            let tag = format!("bridge ({},{})", a + 1, j + 1);
            if b.vertices.len() != r {
                rep.push("bridge_iso", format!("{tag}: {} vertices", b.vertices.len()));
                continue;
            }
            let mut absent = Vec::new();
            for (x, &p) in b.vertices.iter().enumerate() {
                for &q in &b.vertices[x + 1..] {
                    if !g.has_edge(p, q) {
                        absent.push(canonical(p, q));
                    }
                }
            }
            let disjoint = absent.len() == 2 && {
                let (e, f) = (absent[0], absent[1]);
                e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1
            };
            if !disjoint {
                rep.push("bridge_iso", format!("{tag}: missing pairs {absent:?}, want two disjoint"));
            } else {
                let mut want = b.missing.to_vec();
                want.sort();
                if want != absent {
                    rep.push("bridge_iso", format!("{tag}: missing pairs {absent:?} differ from layout"));
                }
            }
        }
    }

    // intersection pattern
    for a in 0..h {
        for j in 0..h {
            let s = &src_sets[a][j];
            for k in 0..h {
                for l in 0..h {
                    let b = &layout.bridges[k][l].vertices;
                    let common = inter(s, b);
                    let neighbouring = (a, j) == (k, l) || layout.predecessor_bridge(a, j) == Some((k, l));
                    let tag = format!("source ({},{}) / bridge ({},{})", a + 1, j + 1, k + 1, l + 1);
                    if neighbouring {
                        if common.len() != 2 {
                            rep.push("intersection", format!("{tag}: {} shared vertices, want 2", common.len()));
                        } else if g.has_edge(common[0], common[1]) {
                            rep.push("stable_pair", format!("{tag}: shared pair is an edge"));
                        }
                    } else if common.len() > 1 || (a == k && !common.is_empty()) {
                        rep.push("intersection", format!("{tag}: {} shared vertices", common.len()));
                    }
                }
                for l in 0..h {
                    if (k, l) <= (a, j) {
                        continue;
                    }
                    let common = inter(s, &src_sets[k][l]);
                    if common.len() > 1 || (a == k && !common.is_empty()) {
                        rep.push(
                            "intersection",
                            format!("source ({},{}) / source ({},{}): {} shared vertices", a + 1, j + 1, k + 1, l + 1, common.len()),
                        );
                    }
                }
            }
        }
    }
    for a in 0..h {
        for j in 0..h {
            for k in 0..h {
                for l in 0..h {
                    if (k, l) <= (a, j) {
                        continue;
                    }
                    let common = inter(&layout.bridges[a][j].vertices, &layout.bridges[k][l].vertices);
                    if common.len() > 1 || (a == k && !common.is_empty()) {
                        rep.push(
                            "intersection",
                            format!("bridge ({},{}) / bridge ({},{}): {} shared vertices", a + 1, j + 1, k + 1, l + 1, common.len()),
                        );
                    }
                }
            }
        }
    }

    // every edge belongs to a source or a bridge
    let mut covered = Graph::empty(g.n());
    for set in src_sets.iter().flatten().chain(layout.bridges.iter().flatten().map(|b| &b.vertices)) {
        for (x, &p) in set.iter().enumerate() {
            for &q in &set[x + 1..] {
                if g.has_edge(p, q) {
                    covered.add_edge_unchecked(p, q);
                }
            }
        }
    }
    if covered.edge_count() != g.edge_count() {
        rep.push(
            "coverage",
            format!("{} edges lie in no source or bridge", g.edge_count() - covered.edge_count()),
        );
    }
    rep.finish()
}

/// Intersection graph of the sources: vertex `i·h + j` is `S_{i+1,j+1}`.
pub fn reduced_graph(layout: &LhLayout) -> Graph {
    let h = layout.h;
    let sets: Vec<Vec<usize>> = layout
        .sources
        .iter()
        .flatten()
        .map(|s| s.vertices())
        .collect();
    let mut edges = Vec::new();
    for x in 0..sets.len() {
        for y in x + 1..sets.len() {
            if sets[x].iter().any(|v| sets[y].contains(v)) {
                edges.push((x, y));
            }
        }
    }
    Graph::new(h * h, &edges).expect("in range")
}

/// True iff the graph contains a triangle.
pub fn has_triangle(g: &Graph) -> bool {
    g.edges().iter().any(|&(u, v)| {
        !g.common_neighbors(u, v).expect("edge endpoints are valid").is_empty()
    })
}

/// True iff the graph contains a 4-cycle (not necessarily induced).
pub fn has_four_cycle(g: &Graph) -> bool {
    let n = g.n();
    (0..n).any(|u| {
        (u + 1..n).any(|v| g.common_neighbors(u, v).expect("distinct vertices").len() >= 2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{close, ProcessParams};

    #[test]
    fn kr_minus_e_shapes() {
        let g = build_kr_minus_e(4).unwrap();
        assert_eq!((g.n(), g.edge_count()), (4, 5));
        let p3 = build_kr_minus_e(3).unwrap();
        assert_eq!(p3.edges(), vec![(0, 1), (0, 2)]);
        assert!(build_kr_minus_e(2).is_err());
        for r in 3..=6 {
            let t = close(&build_kr_minus_e(r).unwrap(), ProcessParams::new(r).unwrap());
            assert_eq!(t.tau, 1);
        }
    }

    #[test]
    fn path_times() {
        let p3 = ProcessParams::new(3).unwrap();
        let g = build_path(5);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(close(&g, p3).tau, 3);
        assert_eq!(close(&build_path(1), p3).tau, 0);
        let g4 = build_path(4);
        assert_eq!(g4.diameter(), Some(4));
        assert_eq!(close(&g4, p3).tau, 2);
    }

    #[test]
    fn ht_sizes() {
        let (g, _) = build_ht(4, 2).unwrap();
        assert_eq!((g.n(), g.edge_count()), (5, 7));
        let (g, _) = build_ht(5, 3).unwrap();
        assert_eq!((g.n(), g.edge_count()), (7, 15));
        let (g, _) = build_ht(4, 1).unwrap();
        assert_eq!(g, build_kr_minus_e(4).unwrap());
        assert!(build_ht(3, 2).is_err());
        assert!(build_ht(4, 0).is_err());
    }

    #[test]
    fn ht_verifies() {
        for r in 4..=6 {
            for t in 1..=8 {
                let (g, layout) = build_ht(r, t).unwrap();
                let rep = verify_ht(&g, &layout);
                assert!(rep.ok, "r={r} t={t}: {:?}", rep.violations);
            }
        }
    }

    #[test]
    fn ht_broken_chain_edge() {
        let (g, layout) = build_ht(5, 4).unwrap();
        let (a, b) = (layout.chain[2], layout.chain[3]);
        let broken = g.without_edges(&[(a, b)]);
        let rep = verify_ht(&broken, &layout);
        assert!(rep.has("ii") || rep.has("iii"));
        assert!(!rep.ok);
    }

    #[test]
    fn ht_condition_iv_violation() {
        // rewire v_t so its body neighbours sit inside N(v_{t-1})
        let (g, layout) = build_ht(5, 3).unwrap();
        let (vt, prev) = (layout.chain[2], layout.chain[1]);
        let own: Vec<usize> = layout.body.iter().copied().filter(|&b| g.has_edge(vt, b)).collect();
        let target: Vec<usize> = layout.body.iter().copied().filter(|&b| g.has_edge(prev, b)).collect();
        let mut h = g.without_edges(&own.iter().map(|&b| (vt, b)).collect::<Vec<_>>());
        let add: Vec<Edge> = target.iter().take(own.len()).map(|&b| (vt, b)).collect();
        h = h.with_edges(&add).unwrap();
        let rep = verify_ht(&h, &layout);
        assert!(rep.has("iv"), "{:?}", rep.violations);
        assert!(!rep.has("iii"));
    }

    #[test]
    fn perms_prime_compatible() {
        for h in [2, 3, 5, 7] {
            let layout = LhLayout {
                r: 5,
                h,
                sources: vec![],
                bridges: vec![],
                perms: default_perms(h),
            };
            let mut rep = VerificationReport::default();
            check_perms(&layout, &mut rep);
            assert!(rep.violations.is_empty(), "h={h}: {:?}", rep.violations);
        }
        let layout = LhLayout {
            r: 5,
            h: 6,
            sources: vec![],
            bridges: vec![],
            perms: default_perms(6),
        };
        let mut rep = VerificationReport::default();
        check_perms(&layout, &mut rep);
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn lh_rejects_bad_params() {
        assert!(matches!(build_lh(5, 4), Err(ParamError::NotPrime { h: 4 })));
        assert!(build_lh(4, 2).is_err());
        assert!(build_lh(5, 1).is_err());
    }

    #[test]
    fn lh_verifies() {
        for (r, h) in [(5, 2), (5, 3), (6, 2), (7, 2), (6, 3)] {
            let (g, layout) = build_lh(r, h).unwrap();
            let rep = verify_lh(&g, &layout);
            assert!(rep.ok, "r={r} h={h}: {:?}", rep.violations);
            assert_eq!(g.n(), lh_vertex_formula(r, h));
        }
    }

    #[test]
    fn lh_broken_layouts() {
        let (g, layout) = build_lh(5, 2).unwrap();
        // a second shared vertex between two sources
        let mut bad = layout.clone();
        let extra = bad.sources[0][0].body[3];
        bad.sources[1][1].chain[1] = extra;
        let shared = bad.sources[1][0].chain[1];
        bad.sources[1][1].body[2] = shared;
        assert!(verify_lh(&g, &bad).has("intersection"));

        // a bridge missing only one edge
        let (x, y) = layout.bridges[0][0].missing[1];
        let g2 = g.with_edges(&[(x, y)]).unwrap();
        assert!(verify_lh(&g2, &layout).has("bridge_iso"));
    }

    #[test]
    fn reduced_graph_counts() {
        // oracle: count pairwise source intersections directly
        for (r, h) in [(5, 2), (5, 3)] {
            let (_, layout) = build_lh(r, h).unwrap();
            let sets: Vec<Vec<usize>> = layout.sources.iter().flatten().map(|s| s.vertices()).collect();
            let mut count = 0;
            for x in 0..sets.len() {
                for y in x + 1..sets.len() {
                    if sets[x].iter().any(|v| sets[y].contains(v)) {
                        count += 1;
                    }
                }
            }
            let red = reduced_graph(&layout);
            assert_eq!(red.n(), h * h);
            assert_eq!(red.edge_count(), count);
            assert_eq!(count, h * h * (h - 1) / 2);
            assert!(!has_triangle(&red));
            assert!(!has_four_cycle(&red));
        }
    }

    #[test]
    fn forbidden_subgraph_checks() {
        let c4 = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert!(has_four_cycle(&c4) && !has_triangle(&c4));
        let c5 = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        assert!(!has_four_cycle(&c5) && !has_triangle(&c5));
        assert!(has_triangle(&Graph::complete(3)));
    }
}
