use thiserror::Error;

/// Crate-wide error type. Numerical routines return `Err` instead of panicking
/// whenever bad input or a degenerate state is detectable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({coords:?}, t={time}) lies outside the chart or time domain of `{background}`")]
    OutOfChart {
        background: String,
        coords: Vec<f64>,
        time: f64,
    },

    #[error("metric degenerate at sample point: eigenvalue {eigen:.3e} below tolerance {tol:.3e}")]
    DegenerateMetric { eigen: f64, tol: f64 },

    #[error("background `{0}` carries no soliton potential")]
    NoPotential(String),

    #[error("conjugate-heat solution lost positivity: min u = {0:.3e}")]
    NonPositiveU(f64),

    #[error("unknown background `{0}`")]
    UnknownBackground(String),

    #[error("bad background parameters: {0}")]
    BadParams(String),

    #[error("bad immersion shape: {0}")]
    BadShape(String),

    #[error("node count {got} below the minimum {min}")]
    TooCoarse { got: usize, min: usize },

    #[error("degenerate tangent frame at node {node}: |T|^2 = {norm2:.3e}")]
    DegenerateTangent { node: usize, norm2: f64 },

    #[error("operation requires a closed immersion")]
    OpenImmersion,

    #[error("time step collapsed: dt = {0:.3e}")]
    CflViolation(f64),

    #[error("residual monitors need uniformly spaced states; got spacings {0:.6e} and {1:.6e}")]
    NonUniformDt(f64, f64),

    #[error("residual monitors need node correspondence; disable redistribution for this run")]
    RedistributionActive,

    #[error("monitor `{monitor}` does not apply to soliton class {class}")]
    WrongSolitonClass { monitor: String, class: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("weighted first variation requires a measure-preserving variation (h = trace(v)/2); max defect {0:.3e}")]
    NotMeasurePreserving(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
