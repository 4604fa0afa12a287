//! Checks of the a priori estimates against a field, with machine-readable
//! reports.
//!
//! Every check is a pure function of its inputs, so re-running it on the same
//! field reproduces the report exactly.

use serde::Serialize;

use crate::analytic::{
    build_barrier_params, global_gradient_bound, modulus_delta, BarrierParams, GlobalGradientBound,
    ModulusDelta,
};
use crate::error::{Error, Result};
use crate::geometry::{compute_quantities, GeometricQuantities};
use crate::operator::{planar_residual, Planar};
use crate::solver::{euclidean_minimal_solve, EuclideanSummary, ScalarField, SolverConfig};

/// Relative margin for strict inequalities.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Depths sampled along each boundary normal inside the collar.
const SUBGRID_DEPTHS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthBoundReport {
    pub min_f: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub pass: bool,
}

/// `min_Gamma f < g < R(Omega, f)` at every interior node, the lower bound with
/// margin `1e-12 * max(1, R)`.
pub fn check_length_bounds(field: &ScalarField, q: &GeometricQuantities) -> LengthBoundReport {
    let observed_min = field.min_interior();
    let observed_max = field.max_interior();
    let lower_ok = observed_min > q.min_f + STRICT_MARGIN * q.radius.max(1.0);
    let upper_ok = observed_max < q.radius;
    LengthBoundReport {
        min_f: q.min_f,
        radius: q.radius,
        observed_min,
        observed_max,
        lower_ok,
        upper_ok,
        pass: lower_ok && upper_ok,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Negative,
    Positive,
    Mixed,
    /// No sample nodes.
    None,
}

impl SignClass {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            SignClass::None
        } else if values.iter().all(|&v| v < 0.0) {
            SignClass::Negative
        } else if values.iter().all(|&v| v > 0.0) {
            SignClass::Positive
        } else {
            SignClass::Mixed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierCheck {
    pub name: String,
    pub region: String,
    pub sign_expected: SignClass,
    pub sign_observed: SignClass,
    /// Grid nodes in the collar; for the slope check, the `d` samples.
    pub nodes: usize,
    /// Points between grid nodes, sampled on normals through the boundary.
    pub subgrid_samples: usize,
    /// Value closest to violating the expected sign.
    pub worst: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryGradientReport {
    /// Candidate `psi'(0) (1 + max |Dphi|)` assembled from the barrier, not a
    /// closed-form constant.
    #[serde(rename = "C_predicted")]
    pub c_predicted: f64,
    pub c_label: &'static str,
    pub observed_max_boundary_grad: f64,
    pub pass: bool,
    pub params: BarrierParams,
    /// Collar width actually sampled, `min(delta1, inradius)`.
    pub collar_width: f64,
    /// The `r(Omega)` slot, `h(Gamma) / 2` for planar domains.
    pub r_omega: f64,
    pub warnings: Vec<String>,
}

/// `M_eps` with the coefficients frozen at the solution value `g`, applied to
/// `w`: `(g^2 + w_t^2 + eps) w_xx + (1 + w_x^2) w_tt - 2 w_x w_t w_xt + g (1 + w_x^2)`.
pub fn frozen_operator(g: f64, w: &Planar, eps: f64) -> f64 {
    planar_residual(&Planar { g, ..*w }, eps, 1.0)
}

/// Compares the discrete boundary gradient with the barrier candidate and
/// certifies the barrier signs: `Mbar(phi + v) < 0` and `Mbar(phi - v) > 0`
/// at interior nodes in the collar `0 < d < delta1` of every side, with
/// `v = psi(d)`.
pub fn check_boundary_gradient(
    field: &ScalarField,
    phi: &ScalarField,
    params: &BarrierParams,
    eps: f64,
) -> (BoundaryGradientReport, Vec<BarrierCheck>) {
    let domain = field.domain();
    let mut warnings = Vec::new();
    let inradius = domain.inradius();
    let mut collar = params.delta1;
    if collar > inradius {
        warnings.push(format!(
            "collar width delta1 = {collar:.6e} exceeds the inradius {inradius:.6e}; sampling up to the inradius"
        ));
        collar = inradius;
    }

    let psi = params.psi;
    let mut checks = Vec::new();
    checks.push({
        let samples: Vec<f64> = (0..=1000)
            .map(|k| psi.deriv(params.delta1 * k as f64 / 1000.0) - 1.0)
            .collect();
        let worst = samples.iter().copied().fold(f64::INFINITY, f64::min);
        BarrierCheck {
            name: "psi-slope".into(),
            region: "[0, delta1]".into(),
            sign_expected: SignClass::Positive,
            sign_observed: if worst >= 0.0 { SignClass::Positive } else { SignClass::Mixed },
            nodes: samples.len(),
            subgrid_samples: 0,
            worst,
            pass: worst >= -STRICT_MARGIN && params.condition_one() && params.condition_two(),
        }
    });

    let lines = domain.support_lines();
    let (hx, ht) = domain.spacing();
    let phi_nodal: Vec<Option<Planar>> = (0..domain.node_count())
        .map(|k| domain.is_active(k).then(|| phi.nodal_state(k)))
        .collect();
    let interpolate_phi = |x: f64, t: f64| -> Option<Planar> {
        let w = domain.cell_weights(x, t)?;
        let mut p = Planar { g: 0.0, gx: 0.0, gt: 0.0, gxx: 0.0, gtt: 0.0, gxt: 0.0 };
        for &(k, c) in &w {
            let q = phi_nodal[k]?;
            p.g += c * q.g;
            p.gx += c * q.gx;
            p.gt += c * q.gt;
            p.gxx += c * q.gxx;
            p.gtt += c * q.gtt;
            p.gxt += c * q.gxt;
        }
        Some(p)
    };

    let mut total_collar = 0;
    for line in &lines {
        let [nx, nt] = line.inward_normal;
        // (g, phi derivatives, d) at every sample of this collar.
        let mut samples: Vec<(f64, Planar, f64)> = Vec::new();
        for &k in domain.interior_nodes() {
            let (x, t) = domain.coords(k);
            let d = line.distance(x, t);
            if d > 0.0 && d < collar && psi.deriv(d) >= 1.0 {
                samples.push((field.value(k), phi.stencil_state(k), d));
            }
        }
        let node_samples = samples.len();
        for &k in domain.boundary_nodes() {
            let (x, t) = domain.coords(k);
            let off = line.distance(x, t);
            if off.abs() > hx.max(ht) {
                continue;
            }
            let (x0, t0) = (x - off * nx, t - off * nt);
            for j in 1..=SUBGRID_DEPTHS {
                let d = collar * j as f64 / (SUBGRID_DEPTHS + 1) as f64;
                let (qx, qt) = (x0 + d * nx, t0 + d * nt);
                if lines.iter().any(|l| l.distance(qx, qt) <= 0.0) || psi.deriv(d) < 1.0 {
                    continue;
                }
                if let (Some(g), Some(p)) = (field.interpolate(qx, qt), interpolate_phi(qx, qt)) {
                    samples.push((g, p, d));
                }
            }
        }

        let (mut upper, mut lower) = (Vec::new(), Vec::new());
        for (g, base, d) in &samples {
            let (p1, p2) = (psi.deriv(*d), psi.second(*d));
            for (sign, out) in [(1.0, &mut upper), (-1.0, &mut lower)] {
                let w = Planar {
                    g: base.g,
                    gx: base.gx + sign * p1 * nx,
                    gt: base.gt + sign * p1 * nt,
                    gxx: base.gxx + sign * p2 * nx * nx,
                    gtt: base.gtt + sign * p2 * nt * nt,
                    gxt: base.gxt + sign * p2 * nx * nt,
                };
                out.push(frozen_operator(*g, &w, eps));
            }
        }
        total_collar += upper.len();
        let region = format!("collar of {} (0 < d < {collar:.6e})", line.name);
        let worst_up = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst_lo = lower.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(BarrierCheck {
            name: format!("upper barrier {}", line.name),
            region: region.clone(),
            sign_expected: SignClass::Negative,
            sign_observed: SignClass::of(&upper),
            nodes: node_samples,
            subgrid_samples: samples.len() - node_samples,
            worst: if upper.is_empty() { 0.0 } else { worst_up },
            pass: upper.iter().all(|&v| v < 0.0),
        });
        checks.push(BarrierCheck {
            name: format!("lower barrier {}", line.name),
            region,
            sign_expected: SignClass::Positive,
            sign_observed: SignClass::of(&lower),
            nodes: node_samples,
            subgrid_samples: samples.len() - node_samples,
            worst: if lower.is_empty() { 0.0 } else { worst_lo },
            pass: lower.iter().all(|&v| v > 0.0),
        });
    }
    if total_collar == 0 {
        warnings.push("no sample point lies in the collar".into());
    }

    let observed = field.max_gradient_over(domain.boundary_nodes());
    let c = params.gradient_candidate();
    let (lo, hi) = domain.x_range();
    (
        BoundaryGradientReport {
            c_predicted: c,
            c_label: "assembled from the collar barrier",
            observed_max_boundary_grad: observed,
            pass: observed <= c,
            params: *params,
            collar_width: collar,
            r_omega: 0.5 * (hi - lo),
            warnings,
        },
        checks,
    )
}

/// Smallest distance between boundary nodes whose data differ by at least
/// `eps_target / 3`; closer boundary points oscillate by less. Infinite when
/// the data never vary that much.
pub fn sampled_delta0(field: &ScalarField, eps_target: f64) -> f64 {
    let d = field.domain();
    let pts: Vec<(f64, f64, f64)> = d
        .boundary_nodes()
        .iter()
        .map(|&k| {
            let (x, t) = d.coords(k);
            (x, t, field.value(k))
        })
        .collect();
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if (a.2 - b.2).abs() >= eps_target / 3.0 {
                best = best.min((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub eps_target: f64,
    pub delta: f64,
    pub ln_delta: f64,
    pub delta0: f64,
    pub pairs_checked: usize,
    pub violations: usize,
    pub details: ModulusDelta,
}

/// Pairs `(p, q)`, `p` a boundary node and `q` an interior node with
/// `|q - p| < delta`, that violate `|g(q) - g(p)| < eps_target`. Returns
/// `(pairs checked, violations)`.
pub fn count_modulus_violations(field: &ScalarField, eps_target: f64, delta: f64) -> (usize, usize) {
    let d = field.domain();
    let mut pairs = 0;
    let mut violations = 0;
    for &p in d.boundary_nodes() {
        let (px, pt) = d.coords(p);
        for &q in d.interior_nodes() {
            let (qx, qt) = d.coords(q);
            if (qx - px).hypot(qt - pt) < delta {
                pairs += 1;
                if (field.value(q) - field.value(p)).abs() >= eps_target {
                    violations += 1;
                }
            }
        }
    }
    (pairs, violations)
}

/// Modulus of continuity at the boundary: computes `delta` from the barrier
/// construction and counts violations.
pub fn check_modulus(
    field: &ScalarField,
    q: &GeometricQuantities,
    eps_target: f64,
    delta0: f64,
) -> Result<ModulusReport> {
    let details = modulus_delta(
        eps_target,
        delta0,
        q.radius,
        q.min_f,
        q.max_f,
        field.domain().diameter(),
    )?;
    let (pairs_checked, violations) = count_modulus_violations(field, eps_target, details.delta);
    Ok(ModulusReport {
        eps_target,
        delta: details.delta,
        ln_delta: details.ln_delta,
        delta0,
        pairs_checked,
        violations,
        details,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalGradientReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    #[serde(rename = "bound_C")]
    pub bound: Option<f64>,
    pub observed_max_grad: f64,
    pub hypothesis_ok: bool,
    /// `c1 <= min g`, `c2 >= max g` and `c3 >=` the boundary gradient.
    pub preconditions_ok: bool,
    pub pass: bool,
    pub skipped: Option<String>,
    pub details: Option<GlobalGradientBound>,
}

pub fn check_global_gradient(field: &ScalarField, c1: f64, c2: f64, c3: f64) -> GlobalGradientReport {
    let observed = field.max_gradient();
    let boundary_grad = field.max_gradient_over(field.domain().boundary_nodes());
    let preconditions_ok = c1 <= field.min() && c2 >= field.max() && c3 >= boundary_grad;
    match global_gradient_bound(c1, c2, c3) {
        Ok(b) => GlobalGradientReport {
            c1,
            c2,
            c3,
            bound: Some(b.bound),
            observed_max_grad: observed,
            hypothesis_ok: true,
            preconditions_ok,
            pass: observed <= b.bound,
            skipped: None,
            details: Some(b),
        },
        Err(e) => GlobalGradientReport {
            c1,
            c2,
            c3,
            bound: None,
            observed_max_grad: observed,
            hypothesis_ok: !matches!(e, Error::HypothesisViolated { .. }),
            preconditions_ok,
            pass: false,
            skipped: Some(e.to_string()),
            details: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub quantities: GeometricQuantities,
    pub length_bound: LengthBoundReport,
    pub boundary_gradient: BoundaryGradientReport,
    pub modulus: ModulusReport,
    pub global_gradient: GlobalGradientReport,
    pub barrier_checks: Vec<BarrierCheck>,
    pub extension: EuclideanSummary,
}

impl EstimateReport {
    /// Rows `(check, pass)` for display.
    pub fn summary_rows(&self) -> Vec<(String, bool)> {
        let mut rows = vec![
            ("length bound".to_string(), self.length_bound.pass),
            ("boundary gradient".to_string(), self.boundary_gradient.pass),
            ("modulus of continuity".to_string(), self.modulus.violations == 0),
            ("global gradient".to_string(), self.global_gradient.pass),
        ];
        rows.extend(self.barrier_checks.iter().map(|c| (c.name.clone(), c.pass)));
        rows
    }
}

/// Runs every check on `field`, a solution at parameter `eps`. The extension
/// `phi` is the discrete Euclidean minimal graph with the field's boundary
/// data; the global gradient check uses `c1 = min f`, `c2 = R(Omega, f)` and
/// `c3` the observed boundary gradient.
pub fn verify_field(
    field: &ScalarField,
    eps: f64,
    eps_target: f64,
    cfg: &SolverConfig,
) -> Result<EstimateReport> {
    let domain = field.domain_arc().clone();
    let q = compute_quantities(&domain, field.boundary())?;
    let ext = euclidean_minimal_solve(domain, field.boundary(), cfg)?;
    let params = build_barrier_params(&q, ext.phi_bounds())?;
    let (boundary_gradient, barrier_checks) = check_boundary_gradient(field, &ext.field, &params, eps);
    let delta0 = sampled_delta0(field, eps_target);
    let modulus = check_modulus(field, &q, eps_target, delta0)?;
    let c3 = boundary_gradient.observed_max_boundary_grad;
    let global_gradient = check_global_gradient(field, q.min_f, q.radius, c3);
    Ok(EstimateReport {
        quantities: q,
        length_bound: check_length_bounds(field, &q),
        boundary_gradient,
        modulus,
        global_gradient,
        barrier_checks,
        extension: ext.summary(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::OracleSurface;
    use crate::geometry::{BoundaryData, DomainSpec};
    use std::sync::Arc;

    fn unit_field(w: f64, n: usize, c: f64) -> ScalarField {
        let d = Arc::new(DomainSpec::rectangle(0.0, w, 0.0, 1.0, n, n).unwrap());
        let b = BoundaryData::constant(&d, c);
        ScalarField::constant(d, c, b).unwrap()
    }

    #[test]
    fn constant_field_fails_strict_lower_bound() {
        let f = unit_field(1.0, 8, 1.0);
        let q = compute_quantities(f.domain(), f.boundary()).unwrap();
        let r = check_length_bounds(&f, &q);
        assert!(!r.lower_ok && r.upper_ok && !r.pass);
    }

    #[test]
    fn geodesic_plane_passes_length_bounds() {
        let d = Arc::new(DomainSpec::rectangle(0.5, 1.5, 0.0, 1.0, 16, 16).unwrap());
        let f = ScalarField::sample_oracle(d, &OracleSurface::geodesic_plane(2.0, 1.0)).unwrap();
        let q = compute_quantities(f.domain(), f.boundary()).unwrap();
        assert!(check_length_bounds(&f, &q).pass);
    }

    #[test]
    fn constant_field_global_gradient() {
        let f = unit_field(1.0, 8, 1.0);
        let r = check_global_gradient(&f, 1.0, 1.2, 0.0);
        assert!(r.pass && r.observed_max_grad == 0.0 && r.preconditions_ok);
    }

    #[test]
    fn x_sinh_t_hypothesis_is_violated() {
        let d = Arc::new(DomainSpec::rectangle(1.0, 2.0, 1.0, 2.0, 8, 8).unwrap());
        let f = ScalarField::sample_oracle(d, &OracleSurface::XSinhT).unwrap();
        let r = check_global_gradient(&f, 1f64.sinh(), 2.0 * 2f64.sinh(), 10.0);
        assert!(!r.hypothesis_ok && !r.pass && r.bound.is_none() && r.skipped.is_some());
    }

    #[test]
    fn modulus_on_constant_and_perturbed_fields() {
        let mut f = unit_field(1.0, 32, 1.0);
        let q = compute_quantities(f.domain(), f.boundary()).unwrap();
        let eps = 3.0;
        let delta0 = sampled_delta0(&f, eps);
        assert_eq!(delta0, f64::INFINITY);
        let clean = check_modulus(&f, &q, eps, delta0).unwrap();
        assert_eq!(clean.violations, 0);
        assert!(clean.pairs_checked > 0, "delta {}", clean.delta);
        let k = f.domain().index(1, 16);
        f.set_interior(&[k], [1.0 + eps].into_iter());
        let bad = check_modulus(&f, &q, eps, delta0).unwrap();
        assert!(bad.violations >= 1);
    }

    #[test]
    fn constant_data_barrier_certificate() {
        let f = unit_field(1.0, 32, 1.0);
        let cfg = SolverConfig::default();
        let r = verify_field(&f, 0.0, 0.3, &cfg).unwrap();
        assert_eq!(r.boundary_gradient.observed_max_boundary_grad, 0.0);
        assert!(r.boundary_gradient.pass);
        assert!(r.barrier_checks.iter().all(|c| c.pass), "{:?}", r.barrier_checks);
        let again = verify_field(&f, 0.0, 0.3, &cfg).unwrap();
        assert_eq!(r, again);
    }
}
