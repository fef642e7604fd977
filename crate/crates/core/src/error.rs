use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("loop at vertex {v}")]
    Loop { v: usize },
    #[error("relabelling map is not a permutation of the vertex set")]
    NotAPermutation,
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("clique size r = {r} is below the minimum {min}")]
    CliqueSize { r: usize, min: usize },
    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: usize,
        reason: &'static str,
    },
    #[error("layer count h = {h} is not prime; the default permutation scheme needs a prime h")]
    NotPrime { h: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("more than {limit} maximal meta-cliques while computing sources; raise the budget")]
    MetaCliqueBudget { limit: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(
        "exhaustive search over n = {n} needs 2^{bits} = {graphs} closures, above the budget n <= {budget}"
    )]
    BudgetExceeded {
        n: usize,
        budget: usize,
        bits: usize,
        graphs: u64,
    },
    #[error("shard index {index} is not below shard count {shards}")]
    BadShard { index: usize, shards: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
}
