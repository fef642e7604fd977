use std::fmt::Write as _;
use std::fs;
use std::io::Read;

use serde::Serialize;

use krbp::engine::{close, ProcessParams};
use krbp::error::{AnalysisError, GraphError, ParamError, SearchError};
use krbp::families::{
    build_ht, build_kr_minus_e, build_lh, build_path, has_four_cycle, has_triangle, reduced_graph,
    verify_ht, verify_lh, HtLayout, LhLayout, VerificationReport,
};
use krbp::graph::{EdgeListDoc, Graph};
use krbp::random::{
    curve, curve_csv, empirical_probability, estimate_threshold, exact_percolation_probability,
    round_sig,
};
use krbp::search::{self, SearchConfig, SearchResult};
use krbp::sources::{audit_analysis, track};

use crate::output::{csv, json};
use crate::{
    Command, Format, GenCommand, GenOutput, GraphInput, OutputArgs, ProcessArgs, SearchArgs,
    SearchCommand, ThresholdArgs, VerifyCommand,
};

/// Failure with its exit code: 2 for bad input, 1 for refusals and failed
/// verifications. `output` is still printed to stdout when present.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub output: Option<String>,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
            output: None,
        }
    }

    fn refusal(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
            output: None,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::usage(format!("bad graph input: {e}"))
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::MetaCliqueBudget { .. } => CliError::refusal(e.to_string()),
            AnalysisError::Param(p) => p.into(),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::BudgetExceeded { .. } => {
                CliError::refusal(format!("{e}; pass --budget 8 to allow n = 8"))
            }
            SearchError::BadShard { .. } => CliError::usage(e.to_string()),
            SearchError::Param(p) => p.into(),
        }
    }
}

type Out = Result<String, CliError>;

pub fn run(cmd: Command) -> Out {
    match cmd {
        Command::Close(a) => cmd_close(a),
        Command::Tau(a) => cmd_tau(a),
        Command::Gen(g) => cmd_gen(g),
        Command::Verify(v) => cmd_verify(v),
        Command::Sources(a) => cmd_sources(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Search(s) => cmd_search(s),
        Command::Threshold(t) => cmd_threshold(t),
    }
}

fn unsupported(format: Format, what: &str) -> CliError {
    let name = match format {
        Format::Text => "text",
        Format::Json => "json",
        Format::Csv => "csv",
    };
    CliError::usage(format!("{what} output has no {name} form"))
}

fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::usage(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))
    }
}

pub fn parse_graph_input(input: &GraphInput) -> Result<Graph, CliError> {
    let text = match (&input.graph, &input.inline) {
        (Some(path), _) => read_source(path)?,
        (None, Some(inline)) => inline.replace(';', "\n"),
        (None, None) => return Err(CliError::usage("pass --graph or --inline")),
    };
    Ok(Graph::parse_edge_list(&text)?)
}

fn params(r: usize) -> Result<ProcessParams, CliError> {
    Ok(ProcessParams::new(r)?)
}

fn cmd_close(a: ProcessArgs) -> Out {
    let g = parse_graph_input(&a.input)?;
    let trace = close(&g, params(a.r)?);
    let doc = trace.to_doc();
    match a.out.format() {
        Format::Json => Ok(json(&doc)),
        Format::Csv => Ok(csv(
            &["t", "u", "v"],
            doc.events.iter().map(|e| vec![e.t.to_string(), e.u.to_string(), e.v.to_string()]),
        )),
        Format::Text => {
            let mut s = format!(
                "n {} r {} tau {} percolates {}\n",
                doc.n, doc.r, doc.tau, doc.percolates
            );
            for e in &doc.events {
                let _ = writeln!(s, "{} {} {}", e.t, e.u, e.v);
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct TauDoc {
    n: usize,
    r: usize,
    tau: u32,
    percolates: bool,
}

fn cmd_tau(a: ProcessArgs) -> Out {
    let g = parse_graph_input(&a.input)?;
    let trace = close(&g, params(a.r)?);
    let doc = TauDoc {
        n: g.n(),
        r: a.r,
        tau: trace.tau,
        percolates: trace.percolates(),
    };
    match a.out.format() {
        Format::Json => Ok(json(&doc)),
        Format::Text => Ok(format!("{}\n", doc.tau)),
        f => Err(unsupported(f, "tau")),
    }
}

#[derive(Serialize)]
struct GraphDoc<L: Serialize> {
    family: &'static str,
    n: usize,
    m: usize,
    edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<L>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roles: Option<Vec<String>>,
}

#[derive(Serialize, serde::Deserialize)]
struct LayoutFile<L> {
    family: String,
    layout: L,
    roles: Vec<String>,
}

#[derive(Serialize)]
struct ReducedDoc {
    r: usize,
    h: usize,
    n: usize,
    m: usize,
    edges: Vec<[usize; 2]>,
    triangle_free: bool,
    four_cycle_free: bool,
}

fn emit_generated<L: Serialize + Clone>(
    family: &'static str,
    g: &Graph,
    layout: Option<(L, Vec<String>)>,
    out: &GenOutput,
) -> Out {
    if let (Some(path), Some((l, roles))) = (&out.layout, &layout) {
        let file = LayoutFile {
            family: family.to_string(),
            layout: l.clone(),
            roles: roles.clone(),
        };
        fs::write(path, json(&file)).map_err(|e| CliError::usage(format!("cannot write {path}: {e}")))?;
    } else if out.layout.is_some() {
        return Err(CliError::usage(format!("{family} has no layout")));
    }
    match out.out.format() {
        Format::Text => Ok(g.to_edge_list()),
        Format::Json => {
            let (layout, roles) = match layout {
                Some((l, r)) => (Some(l), Some(r)),
                None => (None, None),
            };
            Ok(json(&GraphDoc {
                family,
                n: g.n(),
                m: g.edge_count(),
                edges: EdgeListDoc::from(g).edges,
                layout,
                roles,
            }))
        }
        f => Err(unsupported(f, "generated graph")),
    }
}

fn cmd_gen(cmd: GenCommand) -> Out {
    match cmd {
        GenCommand::Krminuse { r, out } => {
            let g = build_kr_minus_e(r)?;
            emit_generated::<()>("krminuse", &g, None, &out)
        }
        GenCommand::Path { m, out } => emit_generated::<()>("path", &build_path(m), None, &out),
        GenCommand::Ht { r, t, out } => {
            let (g, layout) = build_ht(r, t)?;
            let roles = layout.roles(g.n());
            emit_generated("ht", &g, Some((layout, roles)), &out)
        }
        GenCommand::Lh { r, h, reduced: true, out } => {
            let red = reduced_graph(&build_lh(r, h)?.1);
            match out.out.format() {
                Format::Text => Ok(red.to_edge_list()),
                Format::Json => Ok(json(&ReducedDoc {
                    r,
                    h,
                    n: red.n(),
                    m: red.edge_count(),
                    edges: EdgeListDoc::from(&red).edges,
                    triangle_free: !has_triangle(&red),
                    four_cycle_free: !has_four_cycle(&red),
                })),
                f => Err(unsupported(f, "reduced graph")),
            }
        }
        GenCommand::Lh { r, h, out, .. } => {
            let (g, layout) = build_lh(r, h)?;
            let roles = layout.roles();
            emit_generated("lh", &g, Some((layout, roles)), &out)
        }
    }
}

fn read_layout<L: serde::de::DeserializeOwned>(path: &str, family: &str) -> Result<L, CliError> {
    let text = read_source(path)?;
    let file: LayoutFile<L> = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad layout file {path}: {e}")))?;
    if file.family != family {
        return Err(CliError::usage(format!(
            "layout file {path} describes {}, not {family}",
            file.family
        )));
    }
    Ok(file.layout)
}

fn emit_verification(rep: &VerificationReport, out: &OutputArgs) -> Out {
    let body = match out.format() {
        Format::Json => json(rep),
        Format::Text => {
            let mut s = format!("ok {}\n", rep.ok);
            for v in &rep.violations {
                let _ = writeln!(s, "{}: {}", v.condition, v.detail);
            }
            s
        }
        f => return Err(unsupported(f, "verification")),
    };
    if rep.ok {
        Ok(body)
    } else {
        Err(CliError {
            code: 1,
            message: format!("{} violation(s)", rep.violations.len()),
            output: Some(body),
        })
    }
}

fn cmd_verify(cmd: VerifyCommand) -> Out {
    match cmd {
        VerifyCommand::Ht {
            r,
            t,
            layout,
            input,
            out,
        } => {
            let g = parse_graph_input(&input)?;
            let layout: HtLayout = match layout {
                Some(path) => read_layout(&path, "ht")?,
                None => build_ht(r, t)?.1,
            };
            if layout.r != r || layout.t != t {
                return Err(CliError::usage("layout parameters differ from --r/--t"));
            }
            emit_verification(&verify_ht(&g, &layout), &out)
        }
        VerifyCommand::Lh {
            r,
            h,
            layout,
            input,
            out,
        } => {
            let g = parse_graph_input(&input)?;
            let layout: LhLayout = match layout {
                Some(path) => read_layout(&path, "lh")?,
                None => build_lh(r, h)?.1,
            };
            if layout.r != r || layout.h != h {
                return Err(CliError::usage("layout parameters differ from --r/--h"));
            }
            emit_verification(&verify_lh(&g, &layout), &out)
        }
    }
}

fn cmd_sources(a: ProcessArgs) -> Out {
    let g = parse_graph_input(&a.input)?;
    let analysis = track(&g, params(a.r)?)?;
    let doc = analysis.to_doc();
    match a.out.format() {
        Format::Json => Ok(json(&doc)),
        Format::Text => {
            let mut s = format!("tau {} sources {} mergers {}\n", doc.tau, doc.sources.len(), doc.mergers.len());
            for src in &doc.sources {
                let _ = writeln!(
                    s,
                    "source {} birth {} vertices {:?} active {:?} inactive {:?} depleted {:?}",
                    src.id,
                    src.birth_time,
                    src.vertices.to_vec(),
                    src.active_steps,
                    src.inactive_steps,
                    src.depleted_intervals
                );
            }
            for m in &doc.mergers {
                let _ = writeln!(
                    s,
                    "merger t {} sources {} {} intersection {}",
                    m.time, m.participants.0, m.participants.1, m.intersection_size
                );
            }
            for t in &doc.trees {
                let _ = writeln!(
                    s,
                    "tree {:?} comprehensive {} protracted {}",
                    t.members, t.comprehensive, t.protracted
                );
            }
            Ok(s)
        }
        f => Err(unsupported(f, "sources")),
    }
}

fn cmd_audit(a: ProcessArgs) -> Out {
    let g = parse_graph_input(&a.input)?;
    let analysis = track(&g, params(a.r)?)?;
    let rep = audit_analysis(&g, &analysis);
    let show = |x: Option<i64>| x.map_or("-".to_string(), |v| v.to_string());
    match a.out.format() {
        Format::Json => Ok(json(&rep)),
        Format::Csv => Ok(csv(
            &["name", "relation", "applicable", "holds", "lhs", "rhs"],
            rep.bounds.iter().map(|b| {
                vec![
                    b.name.to_string(),
                    b.relation.to_string(),
                    b.applicable.to_string(),
                    b.holds.map_or(String::new(), |h| h.to_string()),
                    b.lhs.map_or(String::new(), |v| v.to_string()),
                    b.rhs.map_or(String::new(), |v| v.to_string()),
                ]
            }),
        )),
        Format::Text => {
            let mut s = format!(
                "n {} r {} tau {} edges {} sources {}\n",
                rep.n, rep.r, rep.tau, rep.edges, rep.source_count
            );
            if rep.time_zero_merger {
                s.push_str("note: 0-sources overlap and merge at time 0\n");
            }
            for b in &rep.bounds {
                let status = match b.holds {
                    Some(true) => "holds",
                    Some(false) => "VIOLATED",
                    None => "n/a",
                };
                let _ = writeln!(s, "{:<28} {} {} {} {}", b.name, show(b.lhs), b.relation, show(b.rhs), status);
            }
            Ok(s)
        }
    }
}

fn search_config(a: &SearchArgs) -> SearchConfig {
    SearchConfig {
        budget: a.budget,
        shards: a.shards,
        shard_index: a.shard_index,
        dedup: a.dedup,
        ..SearchConfig::default()
    }
}

fn emit_search(res: &SearchResult, a: &SearchArgs) -> Out {
    let out = &a.out;
    let mut doc = res.to_doc();
    if a.no_timing {
        doc.seconds = None;
    }
    match out.format() {
        Format::Json => Ok(json(&doc)),
        Format::Csv if !doc.tau_table.is_empty() => Ok(csv(
            &["tau", "min_edges"],
            doc.tau_table.iter().map(|r| vec![r.tau.to_string(), r.min_edges.to_string()]),
        )),
        Format::Text => {
            let value = doc.value.map_or("none".to_string(), |v| v.to_string());
            let mut s = format!("value {value}\nscanned {}\n", doc.scanned);
            for row in &doc.tau_table {
                let _ = writeln!(s, "tau {} min_edges {}", row.tau, row.min_edges);
            }
            if let Some(f) = doc.fit {
                let _ = writeln!(s, "fit slope {} intercept {}", round_sig(f.slope, 6), round_sig(f.intercept, 6));
            }
            for w in &doc.witnesses {
                s.push_str("witness\n");
                s.push_str(w);
            }
            Ok(s)
        }
        f => Err(unsupported(f, "search")),
    }
}

fn cmd_search(cmd: SearchCommand) -> Out {
    let res = match &cmd {
        SearchCommand::Taumax(a) => search::tau_max(a.n, a.r, &search_config(a))?,
        SearchCommand::Minsat(a) => search::min_percolating_edges(a.n, a.r, &search_config(a))?,
        SearchCommand::Minedges { t, args } => {
            search::min_edges_given_tau(args.n, args.r, *t, &search_config(args))?
        }
    };
    let args = match &cmd {
        SearchCommand::Taumax(a) | SearchCommand::Minsat(a) => a,
        SearchCommand::Minedges { args, .. } => args,
    };
    emit_search(&res, args)
}

#[derive(Serialize)]
struct ProbabilityDoc {
    p: f64,
    empirical: f64,
    std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
}

#[derive(Serialize)]
struct ThresholdOut {
    #[serde(flatten)]
    estimate: krbp::random::ThresholdDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    at: Option<ProbabilityDoc>,
}

fn cmd_threshold(a: ThresholdArgs) -> Out {
    let params = params(a.r)?;
    if let Some(p) = a.at {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::usage("--at must lie in [0, 1]"));
        }
    }
    let est = estimate_threshold(a.n, params, a.trials, a.seed)?;
    if let Some(points) = a.curve {
        return match a.out.format() {
            Format::Csv | Format::Text => Ok(curve_csv(&curve(&est.samples, points))),
            f => Err(unsupported(f, "curve")),
        };
    }
    let at = match a.at {
        Some(p) => {
            let q = empirical_probability(&est.samples, p);
            let exact = if a.exact {
                let x = exact_percolation_probability(a.n, params, p).map_err(|e| match e {
                    SearchError::BudgetExceeded { .. } => {
                        CliError::refusal("--exact sums over all labeled graphs and needs n <= 7")
                    }
                    e => e.into(),
                })?;
                Some(round_sig(x, 6))
            } else {
                None
            };
            Some(ProbabilityDoc {
                p,
                empirical: round_sig(q, 6),
                std_error: round_sig((q * (1.0 - q) / a.trials as f64).sqrt(), 6),
                exact,
            })
        }
        None => None,
    };
    let doc = ThresholdOut {
        estimate: est.to_doc(),
        at,
    };
    match a.out.format() {
        Format::Json => Ok(json(&doc)),
        Format::Csv => Ok(csv(
            &["q", "p"],
            doc.estimate.quantiles.iter().map(|[q, p]| vec![q.to_string(), p.to_string()]),
        )),
        Format::Text => {
            let e = &doc.estimate;
            let mut s = format!(
                "n {} r {} trials {} seed {}\np_hat {}\nlambda_scale {}\n",
                e.n, e.r, e.trials, e.seed, e.p_hat, e.lambda_scale
            );
            for [q, p] in &e.quantiles {
                let _ = writeln!(s, "q{q} {p}");
            }
            if let Some(at) = &doc.at {
                let _ = writeln!(s, "at p {} empirical {} std_error {}", at.p, at.empirical, at.std_error);
                if let Some(x) = at.exact {
                    let _ = writeln!(s, "exact {x}");
                }
            }
            Ok(s)
        }
    }
}
