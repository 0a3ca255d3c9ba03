//! Hybrid genetic TSP solver.
//!
//! The solver combines an edge assembly crossover (EAX) genetic algorithm
//! with an LKH-style k-opt local search. The two components are coupled
//! through a single special individual in the population, and both draw
//! their candidate edges from a shared per-city candidate table whose
//! scores are seeded from 1-tree alpha-values and refined online by
//! Q-learning over k-opt episodes.

pub mod driver;
pub mod eax;
pub mod instance;
pub mod lk;
pub mod one_tree;
pub mod oracle;
pub mod qtable;
pub mod tour;

pub use driver::{rhga_run, MetricMode, RunResult, SolverConfig, Variant};
pub use instance::{Instance, Metric, ParseError};
pub use qtable::QTable;
pub use tour::Tour;
