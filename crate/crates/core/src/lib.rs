//! Dynamic model of a firm that invests in workplace purpose.
//!
//! Workers choose work effort and socialization each period. Socialization
//! combines with the firm's purpose flow to produce meaning, which persists
//! across periods and raises both utility and output. The firm picks the
//! purpose flow to maximise discounted retained output net of its cost.
//!
//! Modules follow the model's layers:
//!
//! - [`distribution`]: ability distributions, fractional moments, dominance.
//! - [`worker`]: within-period worker equilibrium and a best-response oracle.
//! - [`firm`]: law of motion, reduced payoff, Euler equation, steady state,
//!   transition path, stability.
//! - [`dp`]: grid dynamic-programming oracle for the firm problem.
//! - [`analytics`]: steady-state utility and profit, comparative statics,
//!   worker ownership.
//! - [`experiments`]: mean-preserving spread and first-order shift
//!   experiments on the ability distribution.

pub mod analytics;
pub mod distribution;
pub mod dp;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod firm;
pub mod optimize;
pub mod worker;

pub use distribution::{Dominance, Empirical, Lognormal, MomentBundle, TalentDistribution};
pub use error::{ModelError, Result};
pub use exec::Execution;
pub use firm::{FirmParams, SteadyState, Trajectory, TrajectoryPoint};
pub use worker::{PeriodState, WorkerParams};
