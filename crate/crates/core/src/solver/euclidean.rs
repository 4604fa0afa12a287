//! Euclidean minimal graph with the given boundary values, used as the
//! extension `phi` of the boundary data in the barrier constructions.

use std::sync::Arc;

use serde::Serialize;

use super::field::ScalarField;
use super::newton::{newton_solve_with, SolverConfig};
use super::stencil::EuclideanMinimalOperator;
use crate::analytic::PhiBounds;
use crate::error::Result;
use crate::geometry::{BoundaryData, DomainSpec};

#[derive(Debug, Clone)]
pub struct EuclideanSolution {
    pub field: ScalarField,
    /// Discrete `max |Du|`.
    pub max_grad: f64,
    /// Discrete `max |D^2 u|` (Frobenius).
    pub max_hess: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EuclideanSummary {
    pub max_grad: f64,
    pub max_hess: f64,
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl EuclideanSolution {
    /// Bounds for the barrier constants. `max phi` is taken as `max_Gamma f`,
    /// which the maximum principle guarantees.
    pub fn phi_bounds(&self) -> PhiBounds {
        PhiBounds {
            max_phi: self.field.boundary().max(),
            max_grad: self.max_grad,
            max_hess: self.max_hess,
        }
    }

    pub fn summary(&self) -> EuclideanSummary {
        EuclideanSummary {
            max_grad: self.max_grad,
            max_hess: self.max_hess,
            min: self.field.min(),
            max: self.field.max(),
            iterations: self.iterations,
            residual_norm: self.residual_norm,
        }
    }
}

/// Newton solve of `(1 + u_t^2) u_xx - 2 u_x u_t u_xt + (1 + u_x^2) u_tt = 0`
/// from the linear blend of the boundary data.
pub fn euclidean_minimal_solve(
    domain: Arc<DomainSpec>,
    f: &BoundaryData,
    cfg: &SolverConfig,
) -> Result<EuclideanSolution> {
    let init = ScalarField::blend(domain, f.clone())?;
    let out = newton_solve_with(&init, &EuclideanMinimalOperator, cfg)?;
    Ok(EuclideanSolution {
        max_grad: out.field.max_gradient(),
        max_hess: out.field.max_hessian(),
        field: out.field,
        iterations: out.iterations,
        residual_norm: out.residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_data_is_reproduced() {
        let d = Arc::new(DomainSpec::rectangle(-1.0, 1.0, 0.0, 2.0, 12, 12).unwrap());
        let affine = |x: f64, t: f64| -0.4 * x + 1.5 * t - 0.2;
        let sol = euclidean_minimal_solve(d.clone(), &BoundaryData::from_fn(&d, affine), &SolverConfig::default())
            .unwrap();
        assert!(sol.field.max_error_against(affine) <= 1e-12);
        assert!((sol.max_grad - 0.4f64.hypot(1.5)).abs() < 1e-12);
        assert!(sol.max_hess < 1e-10);
    }

    #[test]
    fn saddle_obeys_maximum_principle() {
        let d = Arc::new(DomainSpec::rectangle(-1.0, 1.0, -1.0, 1.0, 24, 24).unwrap());
        let f = BoundaryData::from_fn(&d, |x, t| 0.2 * (x * x - t * t));
        let sol = euclidean_minimal_solve(d.clone(), &f, &SolverConfig::default()).unwrap();
        assert!(sol.field.min_interior() >= f.min() && sol.field.max_interior() <= f.max());
    }
}
