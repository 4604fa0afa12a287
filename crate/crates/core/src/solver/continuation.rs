//! The `s`-homotopy at fixed `eps`, followed by the descent `eps -> 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::newton::{newton_solve, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{check_existence_hypotheses, compute_quantities, BoundaryData, DomainSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    pub s_steps: Vec<f64>,
    pub eps_sequence: Vec<f64>,
}

/// `count` uniform values from `1/2` to `1`.
pub fn uniform_s_steps(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..count)
            .map(|k| 0.5 + 0.5 * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `2^{-k}` for `k = 0..=20` down to the target; a zero target appends a
/// final `eps = 0` step.
pub fn eps_descent(eps_target: f64) -> Vec<f64> {
    let mut seq: Vec<f64> = (0..=20)
        .map(|k| 0.5f64.powi(k))
        .take_while(|&e| e > eps_target)
        .collect();
    seq.push(eps_target);
    seq
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule {
            s_steps: uniform_s_steps(11),
            eps_sequence: eps_descent(0.0),
        }
    }
}

impl ContinuationSchedule {
    pub fn new(s_count: usize, eps_target: f64) -> Result<Self> {
        let schedule = ContinuationSchedule {
            s_steps: uniform_s_steps(s_count),
            eps_sequence: eps_descent(eps_target),
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("schedule: {m}")));
        if self.s_steps.is_empty() || self.eps_sequence.is_empty() {
            return bad("empty step list");
        }
        if self.s_steps.iter().any(|s| !(0.0..=1.0).contains(s))
            || self.s_steps.windows(2).any(|w| w[1] < w[0])
        {
            return bad("s must be nondecreasing in [0, 1]");
        }
        if *self.s_steps.last().unwrap() != 1.0 {
            return bad("s must end at 1");
        }
        if self.eps_sequence.iter().any(|e| !(0.0..=1.0).contains(e))
            || self.eps_sequence.windows(2).any(|w| w[1] >= w[0])
        {
            return bad("eps must decrease strictly within [0, 1]");
        }
        Ok(())
    }
}

/// One accepted solve along the path.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub s: f64,
    pub eps: f64,
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// `R(Omega, f) > min f (1 + sqrt(pi/2))`; the solve is attempted anyway.
    ExistenceHypothesis { radius: f64, limit: f64 },
    /// The direct `eps = 0` solve failed; the last positive `eps` is final.
    DegenerateLimit { eps: f64, reason: String },
    /// Newton iterations more than doubled between adjacent solves.
    IterationJump { step: usize, previous: usize, current: usize },
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub steps: Vec<StepRecord>,
    pub fields: Vec<ScalarField>,
    pub warnings: Vec<Warning>,
    /// Max-norm gaps between consecutive solutions of the `eps` descent, as
    /// `(eps_previous, eps_current, gap)`.
    pub eps_gaps: Vec<(f64, f64, f64)>,
}

impl ContinuationResult {
    pub fn final_field(&self) -> &ScalarField {
        self.fields.last().expect("a continuation has at least one step")
    }

    pub fn final_eps(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.eps)
    }

    /// Whether the gaps strictly decrease among steps with
    /// `0 < eps <= threshold`. The jump to `eps = 0` is excluded: the last gap
    /// collects the whole remaining `O(eps)` distance and is not smaller.
    pub fn gaps_decrease_below(&self, threshold: f64) -> bool {
        let gaps: Vec<f64> = self
            .eps_gaps
            .iter()
            .filter(|(prev, cur, _)| *prev <= threshold && *cur > 0.0)
            .map(|g| g.2)
            .collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs the homotopy in `s` at `eps_sequence[0]`, then descends in `eps` at
/// `s = 1`, warm-starting each solve from the previous one.
pub fn continuation_solve(
    domain: Arc<DomainSpec>,
    f: &BoundaryData,
    schedule: &ContinuationSchedule,
    cfg: &SolverConfig,
) -> Result<ContinuationResult> {
    schedule.validate()?;
    let q = compute_quantities(&domain, f)?;
    let hyp = check_existence_hypotheses(&q);
    let mut warnings = Vec::new();
    if !hyp.existence_ok {
        warnings.push(Warning::ExistenceHypothesis {
            radius: hyp.radius,
            limit: hyp.existence_limit,
        });
    }

    let eps0 = schedule.eps_sequence[0];
    let s0 = schedule.s_steps[0];
    let mut current = ScalarField::constant(domain.clone(), f.min(), f.homotopy(s0))?;
    let mut steps = Vec::new();
    let mut fields: Vec<ScalarField> = Vec::new();
    let mut eps_gaps = Vec::new();

    let mut record = |field: ScalarField,
                      s: f64,
                      eps: f64,
                      iterations: usize,
                      residual_norm: f64,
                      steps: &mut Vec<StepRecord>,
                      warnings: &mut Vec<Warning>| {
        if let Some(prev) = steps.iter().rev().find(|r: &&StepRecord| r.iterations > 0) {
            if iterations > 2 * prev.iterations {
                warnings.push(Warning::IterationJump {
                    step: steps.len(),
                    previous: prev.iterations,
                    current: iterations,
                });
            }
        }
        steps.push(StepRecord {
            s,
            eps,
            min: field.min_interior(),
            max: field.max_interior(),
            iterations,
            residual_norm,
        });
        fields.push(field);
    };

    for &s in &schedule.s_steps {
        let start = current.with_boundary(f.homotopy(s))?;
        let out = newton_solve(&start, eps0, s, cfg).map_err(|e| Error::Continuation {
            s,
            eps: eps0,
            source: Box::new(e),
        })?;
        current = out.field.clone();
        record(out.field, s, eps0, out.iterations, out.residual_norm, &mut steps, &mut warnings);
    }

    let start = current.with_boundary(f.clone())?;
    current = start;
    let mut prev_eps = eps0;
    for &eps in &schedule.eps_sequence[1..] {
        match newton_solve(&current, eps, 1.0, cfg) {
            Ok(out) => {
                eps_gaps.push((prev_eps, eps, out.field.max_abs_diff(&current)));
                current = out.field.clone();
                prev_eps = eps;
                record(out.field, 1.0, eps, out.iterations, out.residual_norm, &mut steps, &mut warnings);
            }
            Err(e) if eps == 0.0 => {
                warnings.push(Warning::DegenerateLimit {
                    eps: prev_eps,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => {
                return Err(Error::Continuation {
                    s: 1.0,
                    eps,
                    source: Box::new(e),
                })
            }
        }
    }

    Ok(ContinuationResult {
        steps,
        fields,
        warnings,
        eps_gaps,
    })
}
