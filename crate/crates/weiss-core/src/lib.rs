//! Toolkit for generalized Weiss operators in several variables.
//!
//! Starting from a producing function `phi` and a first-order directional
//! operator `D = sum_i a_i(x) d/dx_i`, the crate builds the factorized
//! operator family
//!
//! ```text
//! L_{n+1} = (D - (n/2) V) (D - (n/2 - 1) V) ... (D + (n/2) V),
//! V = D^2 phi / D phi,
//! ```
//!
//! expands the induced partial differential equations, constructs their
//! closed-form null functions `(D phi)^{-n/2} sum_k c_k phi^k`, and checks
//! every claim numerically by guarded random sampling.
//!
//! Module map:
//! - [`expr`]: immutable expression trees, parsing, exact differentiation,
//!   substitution, simplification, and the probabilistic zero test.
//! - [`diffop`]: the directional operator, pre-Schwarzian, potential, and
//!   the factorized operator family with normal-form expansion.
//! - [`nullspace`]: null bases, general null functions, telescoping traces,
//!   and the self-consistent solver for unknown-dependent operators.
//! - [`verify`]: sampling, residual reports, finite-difference cross-checks,
//!   and the randomized operator/null-function test suite.

pub mod diffop;
pub mod error;
pub mod expr;
pub mod nullspace;
pub mod verify;

pub use error::Error;
pub use expr::{Assignment, Expr, ParseContext, SampleDomain};

/// Default knobs shared by the numeric checks.
pub mod defaults {
    /// Sample count for probabilistic zero tests.
    pub const SAMPLES: usize = 32;
    /// Scale-normalized residual tolerance.
    pub const TOL: f64 = 1e-8;
    /// Guard threshold: sampled points must keep guard expressions and
    /// fractional-power bases at least this far from zero.
    pub const EPS_GUARD: f64 = 1e-3;
    /// RNG seed used when the caller does not supply one.
    pub const SEED: u64 = 42;
    /// Central-difference step for derivative cross-checks.
    pub const FD_STEP: f64 = 1e-4;
    /// Cap on the order index `n` to bound expression swell.
    pub const ORDER_CAP: u32 = 16;
    /// Retry attempts per sample point before the domain counts as exhausted.
    pub const GUARD_RETRIES: usize = 100;
}
