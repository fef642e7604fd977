//! Sources, expansions, mergers and merger trees of a run, and an audit of
//! the time and edge bounds that hold under various source conditions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{close, InfectionTrace, ProcessParams};
use crate::error::AnalysisError;
use crate::graph::{Graph, VertexSet};

/// Default cap on maximal meta-cliques per source computation.
pub const DEFAULT_META_BUDGET: usize = 1 << 16;

/// 0-sources: vertex unions of maximal families of maximal cliques that
/// pairwise share at least `r-2` vertices, keeping unions of size `>= r`.
///
/// Unions are deduplicated by vertex set and unions strictly contained in
/// another union are dropped. Sorted lexicographically.
pub fn find_zero_sources(g: &Graph, params: ProcessParams) -> Result<Vec<VertexSet>, AnalysisError> {
    find_zero_sources_with_budget(g, params, DEFAULT_META_BUDGET)
}

pub fn find_zero_sources_with_budget(
    g: &Graph,
    params: ProcessParams,
    budget: usize,
) -> Result<Vec<VertexSet>, AnalysisError> {
    let r = params.r();
    let cliques: Vec<VertexSet> = g
        .maximal_cliques()
        .into_iter()
        .filter(|c| c.len() >= r - 2)
        .collect();
    let mut meta_edges = Vec::new();
    for a in 0..cliques.len() {
        for b in a + 1..cliques.len() {
            if cliques[a].intersection_len(&cliques[b]) >= r - 2 {
                meta_edges.push((a, b));
            }
        }
    }
    let meta = Graph::new(cliques.len(), &meta_edges).expect("in range");
    let mut unions: BTreeSet<VertexSet> = BTreeSet::new();
    meta.maximal_cliques_bounded(budget, |family| {
        let mut u = VertexSet::empty(g.n());
        for c in family.iter() {
            u = u.union(&cliques[c]);
        }
        if u.len() >= r {
            unions.insert(u);
        }
    })
    .map_err(|limit| AnalysisError::MetaCliqueBudget { limit })?;
    let all: Vec<VertexSet> = unions.into_iter().collect();
    Ok(all
        .iter()
        .filter(|s| !all.iter().any(|o| o != *s && s.is_subset(o)))
        .cloned()
        .collect())
}

/// One source and the history of its expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceRecord {
    pub id: usize,
    pub birth_time: u32,
    /// Vertex set at birth.
    pub vertices: VertexSet,
    /// Edges induced on `vertices` at birth.
    pub edges_at_birth: usize,
    /// `expansion[k]` is the expansion at time `birth_time + k`, up to `tau`.
    #[serde(skip)]
    pub expansion: Vec<VertexSet>,
    pub active_steps: Vec<u32>,
    pub inactive_steps: Vec<u32>,
    /// Closed intervals of non-active steps that end at a merger.
    pub depleted_intervals: Vec<(u32, u32)>,
}

impl SourceRecord {
    pub fn expansion_at(&self, t: u32) -> Option<&VertexSet> {
        t.checked_sub(self.birth_time)
            .and_then(|k| self.expansion.get(k as usize))
    }

    pub fn final_expansion(&self) -> &VertexSet {
        self.expansion.last().expect("expansion starts at birth")
    }

    pub fn expansion_sizes(&self) -> Vec<usize> {
        self.expansion.iter().map(VertexSet::len).collect()
    }

    pub fn has_inactive_time(&self) -> bool {
        !self.inactive_steps.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergerEvent {
    pub time: u32,
    /// Smallest source id on each side.
    pub participants: (usize, usize),
    pub intersection_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergerTree {
    pub members: Vec<usize>,
    pub events: Vec<MergerEvent>,
    pub comprehensive: bool,
    pub protracted: bool,
}

impl MergerTree {
    pub fn merger_times(&self) -> Vec<u32> {
        self.events.iter().map(|e| e.time).collect()
    }
}

/// Full bookkeeping for one run.
#[derive(Clone, Debug, Serialize)]
pub struct SourceAnalysis {
    pub n: usize,
    pub r: usize,
    pub tau: u32,
    pub sources: Vec<SourceRecord>,
    pub mergers: Vec<MergerEvent>,
    pub trees: Vec<MergerTree>,
    /// Two 0-sources of the same round share a vertex.
    pub overlapping_sources: bool,
    /// Some merger joined three or more groups in one step.
    pub multi_party_merger: bool,
    #[serde(skip)]
    pub trace: InfectionTrace,
}

impl SourceAnalysis {
    pub fn no_inactive_time(&self) -> bool {
        self.sources.iter().all(|s| !s.has_inactive_time())
    }
}

struct Group {
    members: Vec<usize>,
    set: VertexSet,
}

/// Replays the closure of `g` and tracks every source.
pub fn track(g: &Graph, params: ProcessParams) -> Result<SourceAnalysis, AnalysisError> {
    let r = params.r();
    let trace = close(g, params);
    let tau = trace.tau;

    let mut sources: Vec<SourceRecord> = Vec::new();
    let mut merge_times: Vec<Vec<u32>> = Vec::new();
    let mut groups: Vec<Option<Group>> = Vec::new();
    let mut seen: BTreeSet<VertexSet> = BTreeSet::new();
    let mut mergers = Vec::new();
    let mut overlapping = false;
    let mut multi_party = false;
    let mut group_active_at_tau: Vec<bool> = Vec::new();

    let mut current = g.clone();
    for t in 0..=tau {
        if t > 0 {
            let prev = current.clone();
            let added = trace.added_at(t);
            current = current.with_edges(&added).expect("trace edges are in range");
            for (gid, slot) in groups.iter_mut().enumerate() {
                let Some(grp) = slot else { continue };
                let mut grown = grp.set.clone();
                let mut active = false;
                for &(u, v) in &added {
                    let cn = prev
                        .common_neighbors(u, v)
                        .expect("trace edges are valid")
                        .intersection(&grp.set);
                    if prev.contains_clique(&cn, r - 2) {
                        grown.insert(u);
                        grown.insert(v);
                        active = true;
                    }
                }
                grp.set = grown;
                if active {
                    for &m in &grp.members {
                        sources[m].active_steps.push(t);
                    }
                    if t == tau {
                        group_active_at_tau[gid] = true;
                    }
                }
            }
        }

        // sources born in this round
        let zs = find_zero_sources(&current, params)?;
        for (i, a) in zs.iter().enumerate() {
            if zs[i + 1..].iter().any(|b| a.intersection_len(b) > 0) {
                overlapping = true;
            }
        }
        for y in &zs {
            if seen.contains(y) {
                continue;
            }
            // a later candidate sharing r-2 vertices with a live expansion
            // merges into it at birth, so it joins that expansion instead of
            // becoming a source; overlapping 0-sources are all kept and merge
            // at time 0
            if t > 0 {
                let mut absorbed = false;
                for grp in groups.iter_mut().flatten() {
                    if y.intersection_len(&grp.set) >= r - 2 {
                        grp.set = grp.set.union(y);
                        absorbed = true;
                    }
                }
                if absorbed {
                    continue;
                }
            }
            let id = sources.len();
            sources.push(SourceRecord {
                id,
                birth_time: t,
                vertices: y.clone(),
                edges_at_birth: current.induced_edge_count(y),
                expansion: Vec::new(),
                active_steps: Vec::new(),
                inactive_steps: Vec::new(),
                depleted_intervals: Vec::new(),
            });
            merge_times.push(Vec::new());
            groups.push(Some(Group {
                members: vec![id],
                set: y.clone(),
            }));
            group_active_at_tau.push(false);
        }
        seen.extend(zs);

        // mergers; `origin` counts the groups that existed before this round
        let mut origin: Vec<usize> = groups.iter().map(|g| usize::from(g.is_some())).collect();
        loop {
            let live: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].is_some()).collect();
            let pair = live.iter().enumerate().find_map(|(k, &a)| {
                live[k + 1..].iter().find_map(|&b| {
                    let s = groups[a].as_ref().unwrap().set.intersection_len(&groups[b].as_ref().unwrap().set);
                    (s >= r - 2).then_some((a, b, s))
                })
            });
            let Some((a, b, size)) = pair else { break };
            let gb = groups[b].take().unwrap();
            let ga = groups[a].as_mut().unwrap();
            mergers.push(MergerEvent {
                time: t,
                participants: (ga.members[0], gb.members[0]),
                intersection_size: size,
            });
            for &m in ga.members.iter().chain(&gb.members) {
                merge_times[m].push(t);
            }
            ga.members.extend(gb.members);
            ga.members.sort_unstable();
            ga.set = ga.set.union(&gb.set);
            origin[a] += origin[b];
            if origin[a] > 2 {
                multi_party = true;
            }
            group_active_at_tau[a] |= group_active_at_tau[b];
        }

        for grp in groups.iter().flatten() {
            for &m in &grp.members {
                sources[m].expansion.push(grp.set.clone());
            }
        }
    }

    for (rec, merges) in sources.iter_mut().zip(&merge_times) {
        classify_steps(rec, merges);
    }

    let mut trees: Vec<MergerTree> = groups
        .iter()
        .enumerate()
        .filter_map(|(gid, slot)| slot.as_ref().map(|grp| (gid, grp)))
        .map(|(gid, grp)| {
            let mut events: Vec<MergerEvent> = mergers
                .iter()
                .filter(|e| grp.members.contains(&e.participants.0))
                .cloned()
                .collect();
            events.sort_by_key(|e| e.time);
            MergerTree {
                members: grp.members.clone(),
                events,
                comprehensive: tau >= 1 && group_active_at_tau[gid],
                protracted: false,
            }
        })
        .collect();
    trees.sort_by(|a, b| a.members.cmp(&b.members));
    mark_protracted(&mut trees);

    Ok(SourceAnalysis {
        n: g.n(),
        r,
        tau,
        sources,
        mergers,
        trees,
        overlapping_sources: overlapping,
        multi_party_merger: multi_party,
        trace,
    })
}

/// Splits the non-active steps of a record into inactive and depleted.
fn classify_steps(rec: &mut SourceRecord, merges: &[u32]) {
    let birth = rec.birth_time;
    rec.inactive_steps.extend(1..=birth);
    let mut left = birth;
    for &p in &rec.active_steps.clone() {
        if p > left + 1 {
            let (a, b) = (left + 1, p - 1);
            if merges.iter().any(|&m| a <= m && m <= b + 1) {
                rec.depleted_intervals.push((a, b));
            } else {
                rec.inactive_steps.extend(a..=b);
            }
        }
        left = p;
    }
}

/// A comprehensive tree is protracted when its merger times dominate those
/// of every other comprehensive tree of the same size.
fn mark_protracted(trees: &mut [MergerTree]) {
    let snapshot: Vec<(usize, Vec<u32>, bool)> = trees
        .iter()
        .map(|t| (t.members.len(), t.merger_times(), t.comprehensive))
        .collect();
    for (i, tree) in trees.iter_mut().enumerate() {
        if !tree.comprehensive {
            continue;
        }
        let (size, times, _) = &snapshot[i];
        tree.protracted = snapshot.iter().enumerate().all(|(j, (s, other, comp))| {
            j == i || !*comp || s != size || times.iter().zip(other).all(|(a, b)| a >= b)
        });
    }
}

// ---------------------------------------------------------------------------
// audit

/// One inequality evaluated on a run. `lhs` and `rhs` are absent when the
/// preconditions fail; the inequality is never evaluated in that case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    /// `<=` for time bounds, `>=` for edge bounds.
    pub relation: &'static str,
    pub applicable: bool,
    pub holds: Option<bool>,
    pub lhs: Option<i64>,
    pub rhs: Option<i64>,
}

impl BoundCheck {
    fn not_applicable(name: &'static str, relation: &'static str) -> Self {
        BoundCheck {
            name,
            relation,
            applicable: false,
            holds: None,
            lhs: None,
            rhs: None,
        }
    }

    fn upper(name: &'static str, lhs: i64, rhs: i64) -> Self {
        BoundCheck {
            name,
            relation: "<=",
            applicable: true,
            holds: Some(lhs <= rhs),
            lhs: Some(lhs),
            rhs: Some(rhs),
        }
    }

    fn lower(name: &'static str, lhs: i64, rhs: i64) -> Self {
        BoundCheck {
            name,
            relation: ">=",
            applicable: true,
            holds: Some(lhs >= rhs),
            lhs: Some(lhs),
            rhs: Some(rhs),
        }
    }
}

pub const BOUND_COMPLEMENT: &str = "time_vs_complement_edges";
pub const BOUND_ONE_SOURCE_TIME: &str = "one_source_time";
pub const BOUND_MULTI_SOURCE_TIME: &str = "multi_source_time";
pub const BOUND_MERGER_TREE_TIME: &str = "merger_tree_time";
pub const BOUND_ONE_SOURCE_EDGES: &str = "one_source_edges";
pub const BOUND_MULTI_SOURCE_EDGES: &str = "multi_source_edges";
pub const BOUND_MERGER_TREE_EDGES: &str = "merger_tree_edges";
pub const BOUND_K4_VERTICES: &str = "k4_time_vs_vertices";
pub const BOUND_K4_EDGES_PLUS6: &str = "k4_edges_2tau_plus_6";
pub const BOUND_K4_EDGES_PLUS3: &str = "k4_edges_2tau_plus_3";

#[derive(Clone, Debug, Serialize)]
pub struct TightBound {
    pub name: &'static str,
    pub value: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub r: usize,
    pub tau: u32,
    pub edges: usize,
    pub source_count: usize,
    pub no_inactive_time: bool,
    pub two_party_mergers: bool,
    /// Some 0-sources already share `r-2` vertices and merge at time 0. The
    /// multi-source bounds are stated without excluding this case but their
    /// growth argument needs a merger at `t >= 1`; they can fail here.
    pub time_zero_merger: bool,
    /// For single-source runs: the final expansion is a clique of the closure.
    pub final_expansion_is_clique: Option<bool>,
    pub bounds: Vec<BoundCheck>,
    /// Smallest right-hand side among applicable upper bounds on `tau`.
    pub tightest_time_bound: Option<TightBound>,
}

impl AuditReport {
    pub fn bound(&self, name: &str) -> &BoundCheck {
        self.bounds
            .iter()
            .find(|b| b.name == name)
            .expect("every bound is reported")
    }

    /// No applicable bound is violated.
    pub fn all_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds != Some(false))
    }
}

fn binom2(x: usize) -> i64 {
    (x * x.saturating_sub(1) / 2) as i64
}

pub fn audit_bounds(g: &Graph, params: ProcessParams) -> Result<AuditReport, AnalysisError> {
    let analysis = track(g, params)?;
    Ok(audit_analysis(g, &analysis))
}

/// Evaluates every bound on an existing analysis of `g`.
pub fn audit_analysis(g: &Graph, a: &SourceAnalysis) -> AuditReport {
    let r = a.r;
    let tau = a.tau as i64;
    let v = g.n() as i64;
    let e = g.edge_count() as i64;
    let k = a.sources.len();
    let no_inactive = a.no_inactive_time();
    let two_party = !a.multi_party_merger;
    let mut bounds = Vec::new();

    let complement = binom2(g.n()) - e;
    bounds.push(BoundCheck::upper(BOUND_COMPLEMENT, tau, complement));

    let single = k == 1 && r >= 4;
    let mut final_clique = None;
    if single {
        let s = &a.sources[0];
        bounds.push(BoundCheck::upper(
            BOUND_ONE_SOURCE_TIME,
            tau,
            v - s.vertices.len() as i64 + 1,
        ));
        final_clique = Some(a.trace.closure.is_clique(s.final_expansion()));
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_ONE_SOURCE_TIME, "<="));
    }

    let multi = k >= 2 && no_inactive;
    if multi {
        let smallest = a.sources.iter().map(|s| s.vertices.len()).min().unwrap() as i64;
        bounds.push(BoundCheck::upper(BOUND_MULTI_SOURCE_TIME, tau, v - smallest));
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_MULTI_SOURCE_TIME, "<="));
    }

    // largest comprehensive trees, optionally restricted to protracted ones
    let largest = |protracted_only: bool| -> Vec<&MergerTree> {
        let pool: Vec<&MergerTree> = a
            .trees
            .iter()
            .filter(|t| t.comprehensive && (!protracted_only || t.protracted))
            .collect();
        let max = pool.iter().map(|t| t.members.len()).max().unwrap_or(0);
        pool.into_iter().filter(|t| t.members.len() == max).collect()
    };
    let tree_vertices = |t: &MergerTree| -> i64 {
        t.members.iter().map(|&m| a.sources[m].vertices.len() as i64).sum()
    };
    let tree_edges = |t: &MergerTree| -> i64 {
        t.members.iter().map(|&m| a.sources[m].edges_at_birth as i64).sum()
    };

    let tree_cond = multi && two_party;
    let time_trees = largest(true);
    if tree_cond && !time_trees.is_empty() {
        // the bound must hold for every candidate tree; report the weakest
        let (holds, rhs) = time_trees.iter().fold((true, i64::MAX), |(ok, best), t| {
            let rhs = v - tree_vertices(t) + (t.members.len() as i64 - 1) * r as i64;
            (ok && tau <= rhs, best.min(rhs))
        });
        bounds.push(BoundCheck {
            holds: Some(holds),
            ..BoundCheck::upper(BOUND_MERGER_TREE_TIME, tau, rhs)
        });
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_MERGER_TREE_TIME, "<="));
    }

    let step = (tau - 1) * (r as i64 - 2);
    if single {
        bounds.push(BoundCheck::lower(
            BOUND_ONE_SOURCE_EDGES,
            e,
            a.sources[0].edges_at_birth as i64 + step,
        ));
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_ONE_SOURCE_EDGES, ">="));
    }

    if multi {
        let smallest = a.sources.iter().map(|s| s.edges_at_birth).min().unwrap() as i64;
        bounds.push(BoundCheck::lower(BOUND_MULTI_SOURCE_EDGES, e, step + smallest));
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_MULTI_SOURCE_EDGES, ">="));
    }

    let edge_trees = largest(false);
    if tree_cond && !edge_trees.is_empty() {
        let (holds, rhs) = edge_trees.iter().fold((true, i64::MIN), |(ok, best), t| {
            let rhs = step + tree_edges(t) - (t.members.len() as i64 - 1) * binom2(r - 1);
            (ok && e >= rhs, best.max(rhs))
        });
        bounds.push(BoundCheck {
            holds: Some(holds),
            ..BoundCheck::lower(BOUND_MERGER_TREE_EDGES, e, rhs)
        });
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_MERGER_TREE_EDGES, ">="));
    }

    if r == 4 && tau >= 1 {
        bounds.push(BoundCheck::upper(BOUND_K4_VERTICES, tau, v - 3));
        bounds.push(BoundCheck::lower(BOUND_K4_EDGES_PLUS6, e, 2 * tau + 6));
        bounds.push(BoundCheck::lower(BOUND_K4_EDGES_PLUS3, e, 2 * tau + 3));
    } else {
        bounds.push(BoundCheck::not_applicable(BOUND_K4_VERTICES, "<="));
        bounds.push(BoundCheck::not_applicable(BOUND_K4_EDGES_PLUS6, ">="));
        bounds.push(BoundCheck::not_applicable(BOUND_K4_EDGES_PLUS3, ">="));
    }

    let tightest_time_bound = bounds
        .iter()
        .filter(|b| b.applicable && b.relation == "<=")
        .min_by_key(|b| b.rhs)
        .map(|b| TightBound {
            name: b.name,
            value: b.rhs.unwrap(),
        });

    AuditReport {
        n: g.n(),
        r,
        tau: a.tau,
        edges: g.edge_count(),
        source_count: k,
        no_inactive_time: no_inactive,
        two_party_mergers: two_party,
        time_zero_merger: a.mergers.iter().any(|m| m.time == 0),
        final_expansion_is_clique: final_clique,
        bounds,
        tightest_time_bound,
    }
}

/// JSON view of one source record.
#[derive(Clone, Debug, Serialize)]
pub struct SourceDoc {
    pub id: usize,
    pub birth_time: u32,
    pub vertices: VertexSet,
    pub edges_at_birth: usize,
    pub expansion_sizes: Vec<usize>,
    pub final_expansion: VertexSet,
    pub active_steps: Vec<u32>,
    pub inactive_steps: Vec<u32>,
    pub depleted_intervals: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SourceReportDoc {
    pub n: usize,
    pub r: usize,
    pub tau: u32,
    pub overlapping_sources: bool,
    pub multi_party_merger: bool,
    pub sources: Vec<SourceDoc>,
    pub mergers: Vec<MergerEvent>,
    pub trees: Vec<MergerTree>,
}

impl SourceAnalysis {
    pub fn to_doc(&self) -> SourceReportDoc {
        SourceReportDoc {
            n: self.n,
            r: self.r,
            tau: self.tau,
            overlapping_sources: self.overlapping_sources,
            multi_party_merger: self.multi_party_merger,
            sources: self
                .sources
                .iter()
                .map(|s| SourceDoc {
                    id: s.id,
                    birth_time: s.birth_time,
                    vertices: s.vertices.clone(),
                    edges_at_birth: s.edges_at_birth,
                    expansion_sizes: s.expansion_sizes(),
                    final_expansion: s.final_expansion().clone(),
                    active_steps: s.active_steps.clone(),
                    inactive_steps: s.inactive_steps.clone(),
                    depleted_intervals: s.depleted_intervals.clone(),
                })
                .collect(),
            mergers: self.mergers.clone(),
            trees: self.trees.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_ht, build_lh};

    fn p(r: usize) -> ProcessParams {
        ProcessParams::new(r).unwrap()
    }

    /// Oracle: try every subfamily of maximal cliques directly.
    fn brute_sources(g: &Graph, r: usize) -> Vec<VertexSet> {
        let cliques = g.maximal_cliques();
        let m = cliques.len();
        assert!(m <= 16);
        let ok = |mask: u32| {
            let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            idx.iter().all(|&a| {
                idx.iter()
                    .all(|&b| a == b || cliques[a].intersection_len(&cliques[b]) >= r - 2)
            })
        };
        let union = |mask: u32| {
            let mut u = VertexSet::empty(g.n());
            for i in 0..m {
                if mask >> i & 1 == 1 {
                    u = u.union(&cliques[i]);
                }
            }
            u
        };
        let mut out: BTreeSet<VertexSet> = BTreeSet::new();
        for mask in 1u32..1 << m {
            if !ok(mask) {
                continue;
            }
            let maximal = (0..m).all(|i| mask >> i & 1 == 1 || !ok(mask | 1 << i));
            let u = union(mask);
            if maximal && u.len() >= r {
                out.insert(u);
            }
        }
        let all: Vec<VertexSet> = out.into_iter().collect();
        all.iter()
            .filter(|s| !all.iter().any(|o| o != *s && s.is_subset(o)))
            .cloned()
            .collect()
    }

    #[test]
    fn zero_sources_examples() {
        let (g, layout) = build_ht(4, 3).unwrap();
        let zs = find_zero_sources(&g, p(4)).unwrap();
        let mut want = layout.prefix(1);
        want.sort();
        assert_eq!(zs.len(), 1);
        assert_eq!(zs[0].to_vec(), want);

        let zs = find_zero_sources(&Graph::complete(6), p(4)).unwrap();
        assert_eq!(zs, vec![VertexSet::full(6)]);

        let mut edges = Vec::new();
        for (off, _) in [(0, ()), (4, ())] {
            for u in 0..4 {
                for v in u + 1..4 {
                    edges.push((off + u, off + v));
                }
            }
        }
        let two = Graph::new(8, &edges).unwrap();
        assert_eq!(find_zero_sources(&two, p(4)).unwrap().len(), 2);
        assert!(find_zero_sources(&Graph::empty(5), p(4)).unwrap().is_empty());
    }

    #[test]
    fn zero_sources_match_brute_force() {
        let n = 6;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        // a spread of masks over all 15 pair bits
        for mask in (0u32..1 << 15).step_by(97) {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let g = Graph::new(n, &edges).unwrap();
            for r in [4, 5] {
                assert_eq!(find_zero_sources(&g, p(r)).unwrap(), brute_sources(&g, r), "mask {mask} r {r}");
            }
        }
    }

    #[test]
    fn meta_budget_overflow() {
        assert!(matches!(
            find_zero_sources_with_budget(&Graph::complete(5), p(4), 0),
            Err(AnalysisError::MetaCliqueBudget { limit: 0 })
        ));
    }

    #[test]
    fn ht_single_source_active_throughout() {
        for t in 1..=6 {
            let (g, _) = build_ht(4, t).unwrap();
            let a = track(&g, p(4)).unwrap();
            assert_eq!(a.sources.len(), 1);
            assert!(a.mergers.is_empty());
            assert_eq!(a.sources[0].active_steps, (1..=t as u32).collect::<Vec<_>>());
            assert!(a.no_inactive_time());
            assert_eq!(a.trees.len(), 1);
            assert!(a.trees[0].comprehensive && a.trees[0].protracted);
        }
    }

    #[test]
    fn complete_graph_inert() {
        let a = track(&Graph::complete(5), p(4)).unwrap();
        assert_eq!(a.tau, 0);
        assert_eq!(a.sources.len(), 1);
        assert!(a.sources[0].active_steps.is_empty());
        assert!(!a.trees[0].comprehensive);
        let rep = audit_analysis(&Graph::complete(5), &a);
        assert_eq!(rep.bound(BOUND_ONE_SOURCE_TIME).holds, Some(true));
    }

    #[test]
    fn lh_sources_hand_over() {
        let (g, layout) = build_lh(5, 2).unwrap();
        let a = track(&g, p(5)).unwrap();
        assert_eq!(a.tau, 10);
        let zero: Vec<&SourceRecord> = a.sources.iter().filter(|s| s.birth_time == 0).collect();
        assert_eq!(zero.len(), 1);
        let mut seed = layout.sources[0][0].vertices();
        seed.sort();
        assert_eq!(zero[0].vertices.to_vec(), seed);
        assert!(a.sources.len() > 1);
        assert_eq!(a.trees.iter().filter(|t| t.comprehensive).count(), 1);
    }

    #[test]
    fn ht_audit_values() {
        for t in 1..=6usize {
            let (g, _) = build_ht(4, t).unwrap();
            let rep = audit_bounds(&g, p(4)).unwrap();
            let one = rep.bound(BOUND_ONE_SOURCE_TIME);
            // the source is body plus v_1, so v - v(S) + 1 = (3 + t) - 4 + 1
            assert_eq!((one.lhs, one.rhs), (Some(t as i64), Some(t as i64)));
            let edges = rep.bound(BOUND_ONE_SOURCE_EDGES);
            assert_eq!(edges.lhs, edges.rhs);
            assert_eq!(edges.lhs, Some(5 + 2 * (t as i64 - 1)));
            assert_eq!(rep.final_expansion_is_clique, Some(true));
            assert_eq!(rep.bound(BOUND_K4_EDGES_PLUS3).holds, Some(true));
            assert_eq!(rep.bound(BOUND_K4_EDGES_PLUS6).holds, Some(false));
            assert!(!rep.bound(BOUND_MULTI_SOURCE_TIME).applicable);
        }
    }

    #[test]
    fn depleted_gap_before_merger() {
        let mut rec = SourceRecord {
            id: 0,
            birth_time: 0,
            vertices: VertexSet::empty(4),
            edges_at_birth: 0,
            expansion: vec![],
            active_steps: vec![1, 4, 7],
            inactive_steps: vec![],
            depleted_intervals: vec![],
        };
        classify_steps(&mut rec, &[4]);
        assert_eq!(rec.depleted_intervals, vec![(2, 3)]);
        assert_eq!(rec.inactive_steps, vec![5, 6]);

        let mut late = SourceRecord {
            birth_time: 2,
            active_steps: vec![3],
            depleted_intervals: vec![],
            inactive_steps: vec![],
            ..rec
        };
        classify_steps(&mut late, &[]);
        assert_eq!(late.inactive_steps, vec![1, 2]);
    }

    #[test]
    fn overlapping_zero_sources_merge_at_time_zero() {
        let g = Graph::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)]).unwrap();
        let a = track(&g, p(4)).unwrap();
        assert_eq!(a.tau, 2);
        assert_eq!(a.sources.len(), 2);
        assert_eq!(a.mergers.len(), 1);
        assert_eq!(a.mergers[0].time, 0);
        assert_eq!(a.trees.len(), 1);
        let rep = audit_analysis(&g, &a);
        assert!(rep.time_zero_merger);
        // each source has 4 vertices, so v - v(S) = 1 < tau
        assert_eq!(rep.bound(BOUND_MULTI_SOURCE_TIME).holds, Some(false));
    }

    #[test]
    fn absorbed_candidate_keeps_its_infections() {
        // (0,2) at time 1 turns {0,2,4,5} into a source candidate touching the
        // expansion in {0,2}; its vertices must stay tracked so (0,4) at time 2
        // is attributed and no later source appears
        let g = Graph::new(
            10,
            &[(0, 3), (0, 5), (0, 6), (0, 7), (0, 8), (1, 4), (1, 7), (1, 8), (2, 4), (2, 5), (2, 6), (2, 8), (4, 5), (4, 7), (5, 9), (6, 8), (8, 9)],
        )
        .unwrap();
        let a = track(&g, p(4)).unwrap();
        assert_eq!(a.sources.len(), 1);
        assert!(a.no_inactive_time());
        assert_eq!(a.sources[0].active_steps, vec![1, 2, 3, 4]);
        assert!(a.sources[0].expansion_at(1).unwrap().contains(4));
    }
}
