//! Finite-difference Newton solver for the planar Dirichlet problem.
//!
//! The discrete problem lives on the active nodes of a [`DomainSpec`] grid:
//! interior nodes carry the operator evaluated with centered second-order
//! differences (the mixed derivative uses the four corner nodes), boundary
//! nodes carry identity rows pinning the data.
//!
//! [`DomainSpec`]: crate::geometry::DomainSpec

pub mod continuation;
pub mod euclidean;
pub mod field;
pub mod newton;
pub mod stencil;

pub use continuation::{
    continuation_solve, eps_descent, uniform_s_steps, ContinuationResult, ContinuationSchedule,
    StepRecord, Warning,
};
pub use euclidean::{euclidean_minimal_solve, EuclideanSolution, EuclideanSummary};
pub use field::ScalarField;
pub use newton::{newton_solve, newton_solve_with, residual_norm, SolveOutcome, SolverConfig};
pub use stencil::{
    assemble, assemble_with, Assembly, EuclideanMinimalOperator, HomotopyOperator, LocalOperator,
};
