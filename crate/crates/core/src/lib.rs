//! Least-solution search for lattice-linear predicates.
//!
//! A problem describes a predicate over integer or real vectors together
//! with, for every index that blocks feasibility, the value it must at least
//! reach. [`solve`] raises blocked components round by round from the zero
//! vector and returns the least feasible vector, or reports that none exists
//! below the problem's top.
//!
//! Instances provided: job scheduling and prefix sums ([`demo`]), stable
//! matching ([`stable_matching`]), shortest paths ([`shortest_path`]) and
//! market clearing prices ([`market`]). [`slice`] enumerates every solution
//! of an integral problem.

pub mod constraints;
pub mod demo;
pub mod engine;
pub mod error;
pub mod format;
pub mod market;
pub mod oracle;
pub mod shortest_path;
pub mod slice;
pub mod stable_matching;
pub mod value;

pub use constraints::{conjoin, Conjoined, Constraint, RejectedConstraint};
pub use engine::{
    check_least, solve, termination_bound, ExecutionMode, LatticeProblem, Outcome, SolveOptions,
    SolveResult, TraceRecord,
};
pub use error::{Error, Result};
pub use value::LatticeValue;
