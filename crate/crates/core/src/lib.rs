//! Solvers for finite games whose payoffs are random variables.
//!
//! Each payoff is a [`PayoffDistribution`]: a mixture of truncated Gaussian
//! bumps plus point masses. A risk-averse player ranks own actions by the
//! probability of receiving the largest payoff rather than by its mean. This
//! crate builds those probability tensors, finds pure and mixed equilibria of
//! them, solves the repeated-commitment variant through convolution, handles
//! the independent-randomness variant, and runs seeded Monte Carlo checks.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod commit;
pub mod dist;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod gamefile;
mod quad;
pub mod rae2;
pub mod simulate;
pub mod tensor;

pub use dist::{prob_max, prob_max_all, Atom, GaussComponent, GridDensity, PayoffDistribution};
pub use equilibrium::{Concept, EquilibriumResult, Kind};
pub use error::{Error, Result};
pub use game::{MixedProfile, PureProfile, Shape, StochasticGame, StrategySet};
pub use tensor::{build_tensor, PayoffTensor, ProbabilityTensor};
