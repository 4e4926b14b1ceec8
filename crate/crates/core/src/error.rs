use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported limit {max}")]
    SizeLimit {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("{what} = {value} is outside the table range (max {max})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sphere of mass {lambda} in dimension {d} holds {count} lattice points, above the cap {cap}")]
    Capacity {
        d: usize,
        lambda: u64,
        count: String,
        cap: u64,
    },

    #[error("no lattice points with |x|^2 = {lambda} in dimension {d}")]
    EmptySphere { d: usize, lambda: u64 },

    #[error("{p}/{q} is not a reduced fraction with 1 <= p <= q")]
    NotReduced { p: u64, q: u64 },

    #[error("singular series diverges or converges too slowly in dimension {d} (need d >= 5)")]
    Divergent { d: usize },

    #[error("singular series truncation failed: {0}")]
    Truncation(String),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("empty sweep: {0}")]
    EmptySweep(String),

    #[error("calibration constants: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
