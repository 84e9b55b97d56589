//! Time integrators for semilinear evolution equations `u' = A u + B(t, u) u`.
//!
//! The crate provides nonlinear-Magnus operator splitting (Lie and Strang
//! compositions) and successive-approximation schemes (a standard Picard
//! iteration and two multiscale expansions), the Bernoulli and Fisher-KPP
//! test problems, error norms and convergence rates, and an experiment
//! harness that writes CSV tables and plot data.
//!
//! ```
//! use semisplit::integrators::{integrate_final, Scheme, SchemeConfig};
//! use semisplit::problems::Problem;
//!
//! let problem = Problem::bernoulli(-1.0, -1.0, 2).unwrap();
//! let cfg = SchemeConfig::new(Scheme::Strang);
//! let end = integrate_final(&problem, problem.initial_state(), 1.0, 0.01, &cfg).unwrap();
//! let exact = semisplit::problems::bernoulli_exact(1.0, -1.0, -1.0, 2).unwrap();
//! assert!((end.values()[0] - exact).abs() < 1e-4);
//! ```

pub mod error;
pub mod expaction;
pub mod harness;
pub mod integrators;
pub mod magnus;
pub mod metrics;
pub mod operators;
pub mod problems;

pub use error::{Error, Result};
pub use expaction::{exp_action, exp_dense, BackendKind, ExpBackend};
pub use integrators::{integrate, integrate_final, integrate_observed, Scheme, SchemeConfig, Trajectory};
pub use metrics::{convergence_rate, spatial_error, NormKind};
pub use operators::{FrozenOperator, Grid, LinearOperator, NonlinearFamily, StateVector};
pub use problems::Problem;
