//! Damped Newton iteration with positivity-preserving step caps.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::stencil::{assemble_with, interior_residuals, Assembly, HomotopyOperator, LocalOperator};
use crate::error::{Error, Result};
use crate::geometry::NodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Max-norm residual threshold.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub min_step: f64,
    /// Lowest value an interior unknown may take along a step.
    pub positivity_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            min_step: 1e-12,
            positivity_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.newton_tol > 0.0
            && self.max_newton_iters > 0
            && self.armijo_c > 0.0
            && self.min_step > 0.0
            && self.positivity_floor > 0.0;
        if !positive || !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(Error::InvalidParams(format!("invalid solver config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub field: ScalarField,
    pub iterations: usize,
    /// Final max-norm residual.
    pub residual_norm: f64,
    /// Max-norm residual before each iteration and at the end.
    pub history: Vec<f64>,
}

static SEQUENTIAL_FACTORISATION: Once = Once::new();

/// Solves `J x = rhs` by sparse LU.
pub(crate) fn sparse_solve(a: &Assembly, rhs: &[f64]) -> Result<Vec<f64>> {
    // Sequential factorisation keeps results bitwise reproducible.
    SEQUENTIAL_FACTORISATION.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let lu = a
        .jacobian
        .sp_lu()
        .map_err(|e| Error::SingularJacobian(format!("{e:?}")))?;
    let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJacobian("non-finite Newton update".into()));
    }
    Ok(out)
}

fn half_sq_norm(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Newton's method for `F(u) = 0` with `F` given by `op` at the interior
/// nodes and the boundary values held fixed.
pub fn newton_solve_with<O: LocalOperator>(
    initial: &ScalarField,
    op: &O,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let domain = initial.domain();
    if op.needs_positive() {
        initial.boundary().ensure_positive(domain)?;
    }
    let interior = domain.interior_nodes();
    let mut field = initial.clone();
    let mut history = Vec::new();

    for iteration in 0..=cfg.max_newton_iters {
        let asm = assemble_with(&field, op)?;
        let norm = asm.max_residual();
        history.push(norm);
        if norm <= cfg.newton_tol {
            return Ok(SolveOutcome {
                field,
                iterations: iteration,
                residual_norm: norm,
                history,
            });
        }
        if iteration == cfg.max_newton_iters {
            return Err(Error::NewtonDiverged {
                iterations: iteration,
                residual: norm,
            });
        }

        let rhs: Vec<f64> = asm.residual.iter().map(|r| -r).collect();
        let delta = sparse_solve(&asm, &rhs)?;
        // Interior updates in the order of `interior`.
        let mut step = Vec::with_capacity(interior.len());
        for (row, &k) in asm.nodes.iter().enumerate() {
            if domain.kind(k) == NodeKind::Interior {
                step.push(delta[row]);
            }
        }

        let mut alpha: f64 = 1.0;
        if op.needs_positive() {
            for (&k, &dv) in interior.iter().zip(&step) {
                if dv < 0.0 {
                    alpha = alpha.min((field.value(k) - cfg.positivity_floor) / -dv);
                }
            }
        }
        let phi0 = half_sq_norm(&asm.residual);
        let base: Vec<f64> = interior.iter().map(|&k| field.value(k)).collect();
        loop {
            if !(alpha >= cfg.min_step) {
                return Err(Error::LineSearchStalled {
                    step: alpha.max(0.0),
                    residual: norm,
                });
            }
            let mut trial = field.clone();
            trial.set_interior(interior, base.iter().zip(&step).map(|(u, d)| u + alpha * d));
            match interior_residuals(&trial, op) {
                Ok(r) if half_sq_norm(&r) <= (1.0 - 2.0 * cfg.armijo_c * alpha) * phi0 => {
                    field = trial;
                    break;
                }
                Ok(_) | Err(Error::NonPositiveLength { .. }) => alpha *= cfg.armijo_shrink,
                Err(e) => return Err(e),
            }
        }
    }
    unreachable!("the loop returns at the iteration cap")
}

/// Newton solve of the homotopy problem at `(eps, s)`. The boundary data of
/// `initial` must already be `h(s, .)`.
pub fn newton_solve(
    initial: &ScalarField,
    eps: f64,
    s: f64,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    if !(eps >= 0.0) || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParams(format!("need eps >= 0 and s in [0, 1], got {eps}, {s}")));
    }
    newton_solve_with(initial, &HomotopyOperator { eps, s }, cfg)
}

/// Max-norm of the homotopy residual of a field.
pub fn residual_norm(field: &ScalarField, eps: f64, s: f64) -> Result<f64> {
    Ok(max_norm(&interior_residuals(field, &HomotopyOperator { eps, s })?))
}
