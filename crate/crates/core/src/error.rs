use thiserror::Error;

/// Errors raised while parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function '{name}' at offset {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("no value bound for variable '{0}'")]
    MissingBinding(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("point {0:?} lies outside the metric domain")]
    OutsideDomain([f64; 4]),
    #[error("field {0} depends on v")]
    VDependence(String),
    #[error("spatial metric is not invertible at {0:?}")]
    GammaSingular([f64; 4]),
    #[error("spatial metric is not positive definite at {0:?}")]
    GammaNotPositive([f64; 4]),
    #[error("spatial metric is not the identity (deviation {0:e})")]
    GammaNotIdentity(f64),
    #[error("alpha not u-only (defect {defect:e} > tol {tol:e})")]
    AlphaNotUOnly { defect: f64, tol: f64 },
    #[error("corrected 1-form is not closed (defect {defect:e} > tol {tol:e})")]
    NotClosed { defect: f64, tol: f64 },
    #[error("pullback residual {residual:e} exceeds tol {tol:e}")]
    PullbackResidual { residual: f64, tol: f64 },
    #[error("metric is not Ricci-flat (max violation {max_violation:e})")]
    NotRicciFlat { max_violation: f64 },
    #[error("profile is not harmonic (max defect {defect:e})")]
    NotHarmonic { defect: f64 },
    #[error("IVT bracket not found for the radial integral")]
    BracketNotFound,
    #[error("rank-deficient sample set for quadratic fit")]
    RankDeficient,
    #[error("witness too weak: h_k(0) = {h0:e} <= 0")]
    WitnessTooWeak { h0: f64 },
    #[error("no superquadratic witness with norm > {min_norm} in the search region")]
    NoWitness { min_norm: f64 },
    #[error("k_max = {k_max} exhausted before h_k(0) > 0")]
    KMaxExhausted { k_max: u32 },
    #[error("timelikeness residual {residual:e} exceeds tol {tol:e}")]
    TimelikeResidual { residual: f64, tol: f64 },
    #[error("metric is not autonomous (max |d/du| = {0:e})")]
    NonAutonomous(f64),
    #[error("alpha must be constant here; got u-dependent value")]
    AlphaNotConstant,
    #[error("quadrature produced a non-finite value")]
    NonFiniteQuadrature,
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Expr(ExprError::Syntax { .. }) => "syntax",
            Error::Expr(ExprError::UnknownFunction { .. }) => "unknown_function",
            Error::Expr(ExprError::MissingBinding(_)) => "missing_binding",
            Error::Expr(ExprError::Domain(_)) => "domain",
            Error::OutsideDomain(_) => "outside_domain",
            Error::VDependence(_) => "v_dependence",
            Error::GammaSingular(_) => "gamma_singular",
            Error::GammaNotPositive(_) => "gamma_not_positive",
            Error::GammaNotIdentity(_) => "gamma_not_identity",
            Error::AlphaNotUOnly { .. } => "alpha_not_u_only",
            Error::NotClosed { .. } => "not_closed",
            Error::PullbackResidual { .. } => "pullback_residual",
            Error::NotRicciFlat { .. } => "not_ricci_flat",
            Error::NotHarmonic { .. } => "not_harmonic",
            Error::BracketNotFound => "bracket_not_found",
            Error::RankDeficient => "rank_deficient",
            Error::WitnessTooWeak { .. } => "witness_too_weak",
            Error::NoWitness { .. } => "no_witness",
            Error::KMaxExhausted { .. } => "kmax_exhausted",
            Error::TimelikeResidual { .. } => "timelike_residual",
            Error::NonAutonomous(_) => "non_autonomous",
            Error::AlphaNotConstant => "alpha_not_constant",
            Error::NonFiniteQuadrature => "non_finite_quadrature",
            Error::Invalid(_) => "invalid_input",
        }
    }

    /// Failures of the library's own consistency checks, as opposed to bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::TimelikeResidual { .. }
                | Error::PullbackResidual { .. }
                | Error::NonFiniteQuadrature
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
