//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while parsing expression text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// The input did not match the grammar.
    #[error("syntax error at byte {offset}: found {found}, expected {}", expected.join(" | "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<String>,
    },
    /// A call to a function outside the supported set.
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    /// A derivative atom whose suffix does not decompose into declared variables.
    #[error("derivative suffix `{suffix}` of `{ident}` is not a sequence of declared variables")]
    BadDerivativeSuffix { ident: String, suffix: String },
}

/// Errors raised during numeric evaluation of an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value bound for symbol `{0}`")]
    MissingSymbol(String),
    #[error("no closed form bound for unknown function `{0}`")]
    MissingClosedForm(String),
    #[error("non-positive base {base} under fractional exponent")]
    NonPositiveBase { base: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive argument {0}")]
    LogNonPositive(f64),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

/// Crate-level error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// `D phi` is identically zero, so the pre-Schwarzian does not exist.
    #[error("degenerate producing function: D(phi) is identically zero")]
    DegenerateProducingFunction,
    /// Normal-form extraction was asked for an operator whose coefficients
    /// contain the unknown.
    #[error("operator coefficients contain the unknown `{0}`; normal form is only defined in the linear case")]
    NonlinearOperator(String),
    /// The self-consistent solver only recognizes `D phi = E * psi^m`.
    #[error("D(phi) = {0} does not match the pattern E * {1}^m with E free of {1}")]
    PatternNotRecognized(String, String),
    /// A null-function construction received the wrong number of coefficients.
    #[error("expected {expected} solution coefficients, got {got}")]
    CoefficientArityMismatch { expected: usize, got: usize },
    /// Rejection sampling failed to find enough guard-accepted points.
    #[error("sample domain exhausted: guard rejection exceeded the retry budget ({0} accepted)")]
    DomainExhausted(usize),
    /// A sample domain interval with `lo >= hi`, or a missing variable.
    #[error("invalid sample domain: {0}")]
    InvalidDomain(String),
    /// Order index above the configured swell cap.
    #[error("order index {n} exceeds the cap {cap}")]
    OrderCapExceeded { n: u32, cap: u32 },
}
