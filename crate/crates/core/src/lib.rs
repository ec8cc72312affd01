//! Exact and numerical kernels for algebraic statistics at desk scale.
//!
//! The crate is organised around five problem areas:
//!
//! * [`tensor`] — multi-way probability tables and their low-rank
//!   parametrisations,
//! * [`invariants`] — the degree-5 and degree-9 polynomial invariants of the
//!   4×4×4 rank-≤4 model, with randomised span-dimension checks over a prime
//!   field,
//! * [`mle`] — maximum-likelihood degrees of plane curves and determinantal
//!   models, closed-form estimators, multi-start critical-point solving and a
//!   latent-class EM loop,
//! * [`gauss`] — almost-principal minors, gaussoid axioms, representability
//!   search over the positive definite cone and the entropy map into the
//!   submodular cone,
//! * [`ci`] — conditional-independence signatures of discrete tables and
//!   rational-point search in strict CI models.
//!
//! Everything symbolic runs over exact rationals ([`Rat`]) or a prime field
//! ([`fp`]); floating point is confined to root finding, Newton iterations
//! and EM. All values are immutable after construction and safe to share
//! across threads.

pub mod ci;
pub mod error;
pub mod fp;
pub mod gauss;
pub mod invariants;
pub mod mat;
pub mod mle;
pub mod mpoly;
pub mod rat;
pub mod rng;
pub mod tensor;
pub mod upoly;

pub use error::Error;
pub use mat::Mat;
pub use mpoly::MPoly;
pub use rat::Rat;
pub use upoly::CPoly;

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
