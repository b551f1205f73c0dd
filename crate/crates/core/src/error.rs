use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interval length {len} is not an integer multiple of step {h}")]
    NonCommensurate { len: f64, h: f64 },
    #[error("step h = {0} must satisfy 0 < h < 1")]
    BadStep(f64),
    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("point {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("halo exhausted: operator needs {needed} layer(s), grid has {available}")]
    HaloExhausted { needed: usize, available: usize },
    #[error("sampled functions live on different grids")]
    GridMismatch,
    #[error("ladder needs at least {needed} rungs, got {got}")]
    InsufficientLadder { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown function name `{0}`")]
    UnknownName(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("variable v{index} exceeds declared order {order}")]
    OrderMismatch { index: usize, order: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("inadmissible variation: {0}")]
    InadmissibleVariation(String),
    #[error("Newton iteration did not converge after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("singular Jacobian at column {column}")]
    SingularJacobian { column: usize },
    #[error("no transversality root in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("terminal time is indeterminate: residual below tolerance on {flat} of {total} scan points")]
    IndeterminateT { flat: usize, total: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}
