use thiserror::Error;

/// Errors from the exact-arithmetic certificate ledger.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("suspension count p must be at least 1, got {0}")]
    ZeroSuspension(u32),
    #[error("base class requires m >= n >= 1, got m={m}, n={n}")]
    BadBaseDims { m: u32, n: u32 },
    #[error("target enumeration requires N >= 3, got {0}; dimension 2 targets are covered by the rank rule")]
    TargetBelowRange(u32),
    #[error("no encoded facts for pi_{m}(S^{n})")]
    NoEncodedFacts { m: u32, n: u32 },
    #[error("unknown certificate id `{0}`")]
    UnknownCertificate(String),
    #[error("cyclic premise graph at certificate `{0}`")]
    CyclicPremises(String),
    #[error("certificate `{id}` violates rule {rule}: {condition}")]
    RuleViolation {
        id: String,
        rule: String,
        condition: String,
    },
    #[error("fact table parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
}

/// Errors from constructing or evaluating map expressions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("domain/codomain mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },
    #[error("point not in domain: {0}")]
    OutOfDomain(String),
    #[error("non-finite value during evaluation of {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("rectangle chart capacity exceeded: {0}")]
    ChartCapacity(String),
    #[error("operation requires a sphere domain, got {0}")]
    NotSphere(String),
    #[error("expression deserialization failed: {0}")]
    Deserialize(String),
}

/// Errors from the dilation estimator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DilationError {
    #[error("point too close to a non-smooth locus (margin {margin:.3e}, need > {need:.3e})")]
    NonSmoothRegion { margin: f64, need: f64 },
    #[error("sample budget must be at least 1")]
    EmptyBudget,
    #[error("epsilon grid is empty or spans less than a factor of {need}")]
    BadEpsilonGrid { need: f64 },
    #[error("chart rejected epsilon={eps}: {reason}")]
    ChartRejected { eps: f64, reason: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Errors from fiber tracing and linking-number computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfError {
    #[error("value is not regular: {0}")]
    NotRegular(String),
    #[error("corrector diverged after {halvings} step halvings")]
    CorrectorDiverged { halvings: u32 },
    #[error("curve failed to close after {steps} steps")]
    NoClosure { steps: usize },
    #[error("linking sum {value:.4} deviates from an integer by more than {tol}; curves too coarse")]
    NonIntegerLinking { value: f64, tol: f64 },
    #[error("no projection pole clear of both curves")]
    NoPole,
    #[error("no admissible regular-value pair found in {attempts} attempts")]
    NoRegularValues { attempts: usize },
    #[error("map must go from S^3 to S^2, got {0}")]
    WrongSignature(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Dilation(#[from] DilationError),
}
