use crate::tree::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no profile for leaf-only tree")]
    NoProfile,

    #[error("node {0} is not a leaf")]
    NotALeaf(NodeId),

    #[error("node {0} is not in the tree")]
    UnknownNode(NodeId),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    AboveCap { what: &'static str, n: usize, cap: usize },

    #[error("integral diverges: beta = {beta} is not below 2*alpha + 3/2 = {bound}")]
    Diverges { beta: f64, bound: f64 },

    #[error("p_limit has a pole at x = {0}")]
    Pole(f64),

    #[error("no sign change found for alpha = {alpha} in [{lo}, {hi}] (I(lo) = {f_lo}, I(hi) = {f_hi})")]
    NoBracket { alpha: f64, lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("degenerate window [{lo}, {hi}]: {reason}")]
    DegenerateWindow { lo: usize, hi: usize, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
