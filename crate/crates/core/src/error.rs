use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain count must be at least 1")]
    EmptyCirculant,

    #[error("circulant size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("coupling list is not symmetric under d -> n-d: entry {d} = {value} but entry {mirror} = {mirror_value}")]
    AsymmetricCoupling {
        d: usize,
        value: f64,
        mirror: usize,
        mirror_value: f64,
    },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("packet too close to the lattice edge: {0}")]
    PacketAtEdge(String),

    #[error("field shape does not match parameters: {0}")]
    ShapeMismatch(String),

    #[error("packet reached the open boundary at t = {time}: edge amplitude {edge:.3e} vs max {max:.3e}")]
    EdgeContact { time: f64, edge: f64, max: f64 },

    #[error("photon truncation too small: Poisson tail weight {tail:.3e} beyond l_max = {l_max}")]
    Truncation { l_max: usize, tail: f64 },

    #[error("continuum evaluation requires exact resonance (omega = omega0), got detuning {0}")]
    NotResonant(f64),

    #[error("quadrature inadequate: {0}")]
    Quadrature(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("time series: {0}")]
    Series(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures that indicate the numerical result itself is invalid, as
    /// opposed to a malformed request.
    pub fn is_numerical_validity(&self) -> bool {
        matches!(
            self,
            Error::EdgeContact { .. } | Error::Truncation { .. } | Error::Quadrature(_)
        )
    }
}
