//! Critical thresholds on `G(n, p)` via the monotone coupling: every edge
//! of `K_n` gets a uniform weight and `G(n, p)` keeps the edges of weight
//! at most `p`.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{close, rows_complete, saturate_small, ProcessParams};
use crate::error::{ParamError, SearchError};
use crate::graph::{Edge, Graph};
use crate::search::{percolating_by_edge_count, SearchConfig};

pub const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// `(C(r,2) - 2) / (r - 2)`.
pub fn lambda(r: usize) -> Result<Ratio<u64>, ParamError> {
    if r < 3 {
        return Err(ParamError::CliqueSize { r, min: 3 });
    }
    let r = r as u64;
    Ok(Ratio::new(r * (r - 1) / 2 - 2, r - 2))
}

/// Independent generator for trial `index`: the master seed keys ChaCha8
/// and the trial index selects its stream.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Edges of `K_n` sorted by weight, ties broken by lexicographic index.
fn weighted_order(n: usize, rng: &mut impl Rng) -> Vec<(f64, Edge)> {
    let mut edges: Vec<(f64, usize, Edge)> = Vec::with_capacity(n * (n - 1) / 2);
    let mut idx = 0;
    for u in 0..n {
        for v in u + 1..n {
            edges.push((rng.gen::<f64>(), idx, (u, v)));
            idx += 1;
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    edges.into_iter().map(|(w, _, e)| (w, e)).collect()
}

fn prefix_percolates(n: usize, order: &[(f64, Edge)], k: usize, params: ProcessParams) -> bool {
    if n <= 64 {
        let mut rows = vec![0u64; n];
        for &(_, (u, v)) in &order[..k] {
            rows[u] |= 1 << v;
            rows[v] |= 1 << u;
        }
        saturate_small(&mut rows, params.r());
        rows_complete(&rows)
    } else {
        let edges: Vec<Edge> = order[..k].iter().map(|&(_, e)| e).collect();
        close(&Graph::new(n, &edges).expect("in range"), params).percolates()
    }
}

/// Smallest `k` such that the `k` lightest edges percolate.
fn percolation_point(n: usize, order: &[(f64, Edge)], params: ProcessParams) -> usize {
    let (mut lo, mut hi) = (0, order.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if prefix_percolates(n, order, mid, params) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn sample_with(n: usize, params: ProcessParams, rng: &mut impl Rng) -> f64 {
    let order = weighted_order(n, rng);
    let k = percolation_point(n, &order, params);
    if k == 0 {
        0.0
    } else {
        order[k - 1].0
    }
}

/// Minimal `p` at which the coupled `G(n, p)` percolates, for one weight
/// draw (stream 0 of `seed`).
pub fn sample_threshold(n: usize, params: ProcessParams, seed: u64) -> Result<f64, ParamError> {
    check_n(n, params)?;
    Ok(sample_with(n, params, &mut trial_rng(seed, 0)))
}

fn check_n(n: usize, params: ProcessParams) -> Result<(), ParamError> {
    if n < params.r() {
        return Err(ParamError::OutOfRange {
            name: "n",
            value: n,
            reason: "thresholds need n >= r",
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    /// Empirical median of the per-trial thresholds.
    pub p_hat: f64,
    pub quantiles: Vec<(f64, f64)>,
    /// `p_hat · n^{1/λ(r)}`.
    pub lambda_scale: f64,
    /// Per-trial thresholds in trial order.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (the usual "type 7").
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Thresholds for trials `0..trials`; trial `i` uses stream `i` of `seed`.
pub fn sample_thresholds(n: usize, params: ProcessParams, trials: usize, seed: u64) -> Result<Vec<f64>, ParamError> {
    check_n(n, params)?;
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|i| sample_with(n, params, &mut trial_rng(seed, i)))
        .collect())
}

pub fn estimate_threshold(
    n: usize,
    params: ProcessParams,
    trials: usize,
    seed: u64,
) -> Result<ThresholdEstimate, ParamError> {
    if trials == 0 {
        return Err(ParamError::OutOfRange {
            name: "trials",
            value: 0,
            reason: "need at least one trial",
        });
    }
    let samples = sample_thresholds(n, params, trials, seed)?;
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles: Vec<(f64, f64)> = QUANTILE_LEVELS.iter().map(|&q| (q, quantile(&sorted, q))).collect();
    let p_hat = quantile(&sorted, 0.5);
    let lam = lambda(params.r())?;
    let exponent = *lam.denom() as f64 / *lam.numer() as f64;
    Ok(ThresholdEstimate {
        n,
        r: params.r(),
        trials,
        seed,
        p_hat,
        quantiles,
        lambda_scale: p_hat * (n as f64).powf(exponent),
        samples,
    })
}

/// Fraction of samples at or below `p`, i.e. the coupled estimate of
/// `P_p[G(n,p) percolates]`.
pub fn empirical_probability(samples: &[f64], p: f64) -> f64 {
    samples.iter().filter(|&&s| s <= p).count() as f64 / samples.len() as f64
}

/// `(p, empirical probability)` on an evenly spaced grid of `points` values
/// in `[0, 1]`.
pub fn curve(samples: &[f64], points: usize) -> Vec<(f64, f64)> {
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|i| {
            let p = i as f64 / steps as f64;
            (p, empirical_probability(samples, p))
        })
        .collect()
}

pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("p,probability\n");
    for (p, q) in points {
        out.push_str(&format!("{},{}\n", round_sig(*p, 6), round_sig(*q, 6)));
    }
    out
}

/// Exact `P_p[G(n,p) percolates]` by summing over all labeled graphs.
pub fn exact_percolation_probability(n: usize, params: ProcessParams, p: f64) -> Result<f64, SearchError> {
    let counts = percolating_by_edge_count(n, params.r(), &SearchConfig::default())?;
    let m = (counts.len() - 1) as i32;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(e, &c)| c as f64 * p.powi(e as i32) * (1.0 - p).powi(m - e as i32))
        .sum())
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// JSON view with every probability rounded to 6 significant digits.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdDoc {
    pub n: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub p_hat: f64,
    pub quantiles: Vec<[f64; 2]>,
    pub lambda_scale: f64,
}

impl ThresholdEstimate {
    pub fn to_doc(&self) -> ThresholdDoc {
        ThresholdDoc {
            n: self.n,
            r: self.r,
            trials: self.trials,
            seed: self.seed,
            p_hat: round_sig(self.p_hat, 6),
            quantiles: self
                .quantiles
                .iter()
                .map(|&(q, p)| [q, round_sig(p, 6)])
                .collect(),
            lambda_scale: round_sig(self.lambda_scale, 6),
        }
    }
}
