use thiserror::Error;

/// Errors produced by grid construction, the numerical kernels and the
/// transformation pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate domain: x_min = {x_min} must be strictly below x_max = {x_max}")]
    DegenerateDomain { x_min: f64, x_max: f64 },

    #[error("grid needs at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("non-finite bound or value: {what}")]
    NonFinite { what: String },

    #[error("grids do not match ({context})")]
    GridMismatch { context: String },

    #[error("evaluation at the singular point x = {x} is undefined")]
    SingularPointEvaluation { x: f64 },

    #[error("node detected at x = {x}: transformation is singular")]
    NodeDetected { x: f64 },

    #[error("seed function is identically degenerate ({context})")]
    DegenerateSeed { context: String },

    #[error("initial value and slope cannot both vanish")]
    ZeroInitialConditions,

    #[error("companion solution pair is not unit-Wronskian (max deviation {deviation:.3e})")]
    WronskianNotUnit { deviation: f64 },

    #[error("endpoint integral diverges on the {side} side")]
    DivergentIntegral { side: &'static str },

    #[error("integrand blows up near x = {x} (local exponent {exponent:.2})")]
    IntegrandBlowUp { x: f64, exponent: f64 },

    #[error("energy bracket ({lo}, {hi}) contains no eigenvalue")]
    NoEigenvalueInBracket { lo: f64, hi: f64 },

    #[error("factorization energy coincides with the level E = {energy}")]
    EnergyAtSeed { energy: f64 },

    #[error("level E_n = {e_n} must lie above the factorization energy eps = {eps}")]
    LevelBelowSeed { e_n: f64, eps: f64 },

    #[error("seed energy eps = {eps} exceeds the ground state E0 = {e0}: no nodeless seed exists")]
    SeedAboveGroundState { eps: f64, e0: f64 },

    #[error("c2 = 0 reproduces the bare missing state; use it directly")]
    DegenerateCombination,

    #[error("f0 = {f0} lies in the forbidden window (requires f0 < {boundary})")]
    ForbiddenWindow { f0: f64, boundary: f64 },

    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("pole in denominator parameter b = {b}")]
    PoleInParameters { b: f64 },

    #[error("argument out of domain: {what}")]
    Domain { what: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
