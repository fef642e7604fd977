//! Acceptance run: one test per criterion, each printing a PASS/FAIL line.
//!
//! cargo test --release -p krbp-core --test acceptance -- --nocapture --test-threads 1

use krbp::engine::{close_naive, saturate_small};
use krbp::families::{
    build_ht, build_lh, has_four_cycle, has_triangle, lh_edge_formula, lh_tau_formula,
    lh_vertex_formula, reduced_graph,
};
use krbp::random::{empirical_probability, estimate_threshold, exact_percolation_probability};
use krbp::search::{self, graph_from_mask, SearchConfig};
use krbp::sources::{audit_analysis, track, BOUND_MULTI_SOURCE_TIME};
use krbp::{close, Graph, ProcessParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn params(r: usize) -> ProcessParams {
    ProcessParams::new(r).unwrap()
}

fn report(id: u32, ok: bool, detail: &str) {
    println!("criterion {id:>2} {}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn ceil_log2(d: usize) -> usize {
    if d <= 1 {
        0
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as usize
    }
}

fn binom2(x: usize) -> usize {
    x * x.saturating_sub(1) / 2
}

/// Bit rows of the graph on `n` vertices encoded by `mask` over lex pairs.
fn rows_of_mask(n: usize, mask: u64) -> Vec<u64> {
    let mut rows = vec![0u64; n];
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> k & 1 == 1 {
                rows[u] |= 1 << v;
                rows[v] |= 1 << u;
            }
            k += 1;
        }
    }
    rows
}

#[test]
fn criterion_01_triangle_process_maximum_time() {
    let cfg = SearchConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 3..=7 {
        let got = search::tau_max(n, 3, &cfg).unwrap().value.unwrap();
        let want = ceil_log2(n - 1);
        ok &= got == want;
        parts.push(format!("n={n}: {got} (want {want})"));
    }
    report(1, ok, &parts.join(", "));
    assert!(ok);
}

#[test]
fn criterion_02_k4_maximum_time() {
    let cfg = SearchConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 4..=7 {
        let got = search::tau_max(n, 4, &cfg).unwrap().value.unwrap();
        ok &= got == n - 3;
        parts.push(format!("n={n}: {got} (want {})", n - 3));
    }
    report(2, ok, &parts.join(", "));
    assert!(ok);
}

#[test]
fn criterion_03_chain_family() {
    let mut ok = true;
    let mut checked = 0;
    let mut timed_edges = 0;
    for r in 4..=6 {
        for t in 1..=8 {
            let (g, layout) = build_ht(r, t).unwrap();
            let trace = close(&g, params(r));
            let size_ok = g.n() == r - 1 + t && g.edge_count() == binom2(r - 1) + t * (r - 2);
            let tau_ok = trace.tau as usize == t;
            let mut late_ok = true;
            if t >= 2 {
                let vt = layout.chain[t - 1];
                for u in layout.prefix(t - 2) {
                    if !g.has_edge(u, vt) {
                        timed_edges += 1;
                        late_ok &= trace.time_of(u, vt) == Some(t as u32);
                    }
                }
            }
            if !(size_ok && tau_ok && late_ok) {
                println!("  r={r} t={t}: v={} e={} tau={} late_edges_ok={late_ok}", g.n(), g.edge_count(), trace.tau);
                ok = false;
            }
            checked += 1;
        }
    }
    report(
        3,
        ok,
        &format!("{checked} instances r in 4..=6, t in 1..=8; {timed_edges} absent edges to v_t all timed at t"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_layered_family() {
    let mut ok = true;
    for (r, h) in [(5, 2), (5, 3), (6, 2), (7, 2)] {
        let (g, _) = build_lh(r, h).unwrap();
        let tau = close(&g, params(r)).tau as usize;
        let (v, e) = (g.n(), g.edge_count());
        let (wv, we, wt) = (lh_vertex_formula(r, h), lh_edge_formula(r, h), lh_tau_formula(h));
        let inst = v == wv && e == we && tau == wt;
        ok &= inst;
        println!(
            "  (r,h)=({r},{h}): v {v}/{wv} {} e {e}/{we} {} tau {tau}/{wt} {}",
            mark(v == wv),
            mark(e == we),
            mark(tau == wt)
        );
    }
    report(4, ok, "v, e, tau against the closed forms for (5,2), (5,3), (6,2), (7,2)");
    assert!(ok, "edge counts exceed the closed form by one; see the lines above");
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

#[test]
fn criterion_05_weak_saturation_minimum() {
    let cfg = SearchConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, r) in [(4, 3), (5, 3), (6, 3), (4, 4), (5, 4), (6, 4), (5, 5), (6, 5)] {
        let got = search::min_percolating_edges(n, r, &cfg).unwrap().value.unwrap();
        let want = binom2(n) - binom2(n - r + 2);
        ok &= got == want;
        parts.push(format!("({n},{r}): {got}/{want}"));
    }
    report(5, ok, &parts.join(", "));
    assert!(ok);
}

#[test]
fn criterion_06_k4_time_bound_audit() {
    // global bound over every graph on n <= 7 vertices
    let mut bound_ok = true;
    let mut percolating_runs = 0u64;
    for n in 4..=7 {
        let bits = binom2(n);
        let (bad, active) = (0..1u64 << bits)
            .into_par_iter()
            .map(|mask| {
                let mut rows = rows_of_mask(n, mask);
                let tau = saturate_small(&mut rows, 4) as usize;
                (u64::from(tau >= 1 && tau > n - 3), u64::from(tau >= 1))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        bound_ok &= bad == 0;
        percolating_runs += active;
    }

    // multi-source bound on every n <= 6 instance meeting its preconditions
    let mut applicable = 0u64;
    let mut failures = 0u64;
    let mut failures_time_zero = 0u64;
    let mut example = None;
    for n in 4..=6 {
        for mask in 0..1u64 << binom2(n) {
            let g = graph_from_mask(n, mask);
            let a = track(&g, params(4)).unwrap();
            let rep = audit_analysis(&g, &a);
            let b = rep.bound(BOUND_MULTI_SOURCE_TIME);
            if b.applicable {
                applicable += 1;
                if b.holds == Some(false) {
                    failures += 1;
                    failures_time_zero += u64::from(rep.time_zero_merger);
                    example.get_or_insert_with(|| g.to_edge_list().replace('\n', " "));
                }
            }
        }
    }
    let multi_source_ok = failures == 0;
    println!("  tau_4 <= v - 3: {} over {percolating_runs} runs with tau >= 1, n <= 7", mark(bound_ok));
    println!(
        "  multi-source bound, n <= 6: {applicable} applicable, {failures} violated ({failures_time_zero} with 0-sources merging at time 0)"
    );
    if let Some(ex) = &example {
        println!("  first violation: {ex}");
    }

    // same scan at n = 7, split by whether 0-sources merge at time 0
    let (app7, fail7, clean_app7, clean_fail7) = (0..1u64 << binom2(7))
        .into_par_iter()
        .map(|mask| {
            let g = graph_from_mask(7, mask);
            let a = track(&g, params(4)).unwrap();
            let rep = audit_analysis(&g, &a);
            let b = rep.bound(BOUND_MULTI_SOURCE_TIME);
            let app = u64::from(b.applicable);
            let fail = u64::from(b.holds == Some(false));
            let clean = u64::from(!rep.time_zero_merger);
            (app, fail, app * clean, fail * clean)
        })
        .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    println!(
        "  multi-source bound, n = 7: {app7} applicable, {fail7} violated; without a time-0 merger {clean_app7} applicable, {clean_fail7} violated"
    );

    let ok = bound_ok && multi_source_ok;
    report(6, ok, "tau_4 <= v - 3 (n <= 7) and the multi-source bound (n <= 6)");
    assert!(ok);
}

#[test]
fn criterion_07_edge_minimum_per_time() {
    let res = search::min_edges_given_tau(7, 4, 3, &SearchConfig::default()).unwrap();
    let at = |t: u32| res.tau_table.iter().find(|row| row.tau == t).map(|row| row.min_edges);
    let fit = res.fit.expect("at least two times observed");
    let table: Vec<String> = res.tau_table.iter().map(|r| format!("{}:{}", r.tau, r.min_edges)).collect();
    let ok = at(1) == Some(5) && at(2) == Some(7) && res.value.is_some() && (fit.slope - 2.0).abs() < 1e-9;
    report(
        7,
        ok,
        &format!(
            "r=4, n<=7 table {}; t=3 -> {:?}; slope {} intercept {} (e(H_t) = 2t + 3)",
            table.join(" "),
            res.value,
            fit.slope,
            fit.intercept
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_engine_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut random_ok = 0;
    for i in 0..1000 {
        let n = rng.gen_range(2..=20);
        let density: f64 = rng.gen_range(0.1..0.9);
        let r = 4 + i % 2;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < density {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, &edges).unwrap();
        random_ok += usize::from(close(&g, params(r)) == close_naive(&g, params(r)));
    }
    let mut small = 0;
    let mut small_ok = 0;
    for n in 1..=5 {
        for mask in 0..1u64 << binom2(n) {
            let g = graph_from_mask(n, mask);
            for r in 3..=5 {
                small += 1;
                small_ok += usize::from(close(&g, params(r)) == close_naive(&g, params(r)));
            }
        }
    }
    let ok = random_ok == 1000 && small_ok == small;
    report(
        8,
        ok,
        &format!("{random_ok}/1000 random (n <= 20, r in 4..=5) and {small_ok}/{small} exhaustive (n <= 5, r in 3..=5) traces identical"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_triangle_process_characterization() {
    let mut total = 0u64;
    let mut bad_percolation = 0u64;
    let mut bad_time = 0u64;
    for n in 1..=7 {
        let (t, p, d) = (0..1u64 << binom2(n))
            .into_par_iter()
            .map(|mask| {
                let g = graph_from_mask(n, mask);
                let trace = close(&g, params(3));
                let p = u64::from(trace.percolates() != g.is_connected());
                let d = match g.diameter() {
                    Some(d) => u64::from(trace.tau as usize != ceil_log2(d)),
                    None => 0,
                };
                (1, p, d)
            })
            .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
        total += t;
        bad_percolation += p;
        bad_time += d;
    }
    let ok = bad_percolation == 0 && bad_time == 0;
    report(
        9,
        ok,
        &format!("{total} graphs n <= 7: {bad_percolation} percolation mismatches, {bad_time} time mismatches (equality form)"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_monte_carlo_soundness() {
    let (n, p, trials, seed) = (6, 0.5, 100_000, 20240601);
    let exact = exact_percolation_probability(n, params(4), p).unwrap();
    let est = estimate_threshold(n, params(4), trials, seed).unwrap();
    let emp = empirical_probability(&est.samples, p);
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    let within = (emp - exact).abs() <= 3.0 * se;

    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| {
            let e = estimate_threshold(9, params(4), 2000, seed).unwrap();
            (serde_json::to_string(&e.to_doc()).unwrap(), e.samples)
        })
    };
    let (one, eight) = (run(1), run(8));
    let identical = one == eight;
    let ok = within && identical;
    report(
        10,
        ok,
        &format!(
            "n=6 p=0.5: empirical {emp:.5} vs exact {exact:.5} ({:.2} SE); 1 vs 8 workers identical: {identical}",
            (emp - exact).abs() / se
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_11_reduced_graph() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, h) in [(5, 2), (5, 3), (6, 2), (7, 2), (5, 5), (6, 5), (7, 7)] {
        let (_, layout) = build_lh(r, h).unwrap();
        let red = reduced_graph(&layout);
        let want = h * h * (h - 1) / 2;
        let (tri, c4) = (has_triangle(&red), has_four_cycle(&red));
        let inst = !tri && !c4 && red.edge_count() == want;
        ok &= inst;
        parts.push(format!(
            "({r},{h}): {} edges/{want}, triangle {}, 4-cycle {}",
            red.edge_count(),
            if tri { "present" } else { "none" },
            if c4 { "present" } else { "none" }
        ));
    }
    report(11, ok, &parts.join(", "));
    assert!(ok);
}
