//! Path-dependent SDE simulation driven by Wiener plus compensated Poisson
//! noise, together with Monte Carlo checks of the martingale inequalities
//! (Lenglart domination, stochastic Gronwall bounds) that control such
//! equations.
//!
//! The crate is organised around a handful of modules:
//!
//! - [`path`]: piecewise-constant càdlàg paths on `[-τ, T]`.
//! - [`noise`]: orthogonal martingale measures (Wiener components plus a
//!   compensated Poisson random measure) and stochastic integrals against them.
//! - [`solver`]: the inductive Euler scheme with frozen histories, the grid
//!   anchor map, the remainder process and coupled-resolution diagnostics.
//! - [`gronwall`]: explicit constants and bounds for the Lenglart and
//!   stochastic Gronwall inequalities, ensemble verifiers and the
//!   predictability counterexample.
//! - [`hypothesis`]: statistical falsification of the monotonicity, coercivity,
//!   continuity and boundedness conditions on a coefficient model.
//! - [`experiment`]: declarative TOML experiments and the runner behind the
//!   `sde` binary.
//!
//! Every Monte Carlo routine draws replication `i` from its own ChaCha stream
//! keyed by `(seed, i)`, so results do not depend on the number of worker
//! threads.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// checker entry points take the full experiment description positionally
#![allow(clippy::too_many_arguments)]

pub mod error;
pub mod experiment;
pub mod gronwall;
pub mod hypothesis;
pub mod models;
pub mod noise;
pub mod path;
pub mod rng;
pub mod solver;
pub mod stats;

pub use error::{Result, SdeError};
pub use path::CadlagPath;
