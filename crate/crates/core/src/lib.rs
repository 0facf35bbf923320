//! Minimum Bayes risk of prior disclosure games.
//!
//! Under a strictly proper scoring rule the Bayes risk of reporting a
//! posterior is minimized by the agent's own prior, and the minimum equals the
//! conditional generalized entropy of the parameter given the data. This
//! crate evaluates that quantity exactly for finite games and the classic
//! conjugate families, estimates it by nested Monte Carlo, approximates it
//! through Fisher information, and maximizes it to find Bayesimax priors.
//!
//! ```
//! use bayesimax::conjugate::{nn_conditional_entropy, NormalNormalSpec};
//!
//! let spec = NormalNormalSpec::new(0.0, 1.0, 1.0, 1).unwrap();
//! let r = nn_conditional_entropy(&spec);
//! assert!((r - 0.5 * (std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod cli;
pub mod conjugate;
pub mod error;
pub mod game;
pub mod mcent;
pub mod optimizer;
pub mod rng;
pub mod scores;
pub mod specfun;

pub use error::{Error, Result};
pub use scores::{DiscreteDist, ScoreKind};
