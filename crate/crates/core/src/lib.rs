//! Byzantine-resilient distributed SGD.
//!
//! * [`stats`]: gradient vectors and coordinate-wise statistics.
//! * [`aggregators`]: Mean, Median, Trimmed mean, Krum, Multi-Krum and ParSGD.
//! * [`adversary`]: crash-stop, bit-flip and Gaussian workers.
//! * [`simnet`]: a deterministic parameter-server simulator with a
//!   partial-synchronous collection deadline.
//! * [`problems`]: quadratic, logistic-regression and small MLP objectives.
//! * [`oracles`]: executable checks of the resilience properties.

pub mod adversary;
pub mod aggregators;
pub mod error;
pub mod oracles;
pub mod problems;
pub mod rng;
pub mod simnet;
pub mod stats;

pub use adversary::{AttackKind, AttackSpec, BitflipScale, Delivery};
pub use aggregators::{compute_f, AggregationRule, OpCounter, SelectionMode};
pub use error::{Error, Result};
pub use problems::{DataGenerator, DatasetSpec, Problem, ProblemKind, Split};
pub use simnet::{DelayModel, Jitter, LearningRate, Synchrony, TrainingConfig, TrainingTrace, WorkerUpdate};
pub use stats::GradientVector;
