use std::sync::Arc;

use crate::analytic::OracleSurface;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryData, DomainSpec, NodeKind};
use crate::operator::Planar;

const STENCIL_RING: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

/// Grid samples of `g` on a domain. Boundary nodes always carry the boundary
/// trace exactly; exterior nodes hold `NaN`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    domain: Arc<DomainSpec>,
    values: Vec<f64>,
    boundary: BoundaryData,
}

impl ScalarField {
    /// Takes interior values from `values` and overwrites boundary nodes with
    /// the trace.
    pub fn new(domain: Arc<DomainSpec>, mut values: Vec<f64>, boundary: BoundaryData) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::InvalidParams(format!(
                "field has {} values for {} nodes",
                values.len(),
                domain.node_count()
            )));
        }
        if boundary.values().len() != domain.boundary_nodes().len() {
            return Err(Error::InvalidParams("boundary data does not match the domain".into()));
        }
        for k in 0..values.len() {
            if domain.kind(k) == NodeKind::Exterior {
                values[k] = f64::NAN;
            }
        }
        for (&k, &v) in domain.boundary_nodes().iter().zip(boundary.values()) {
            values[k] = v;
        }
        Ok(ScalarField {
            domain,
            values,
            boundary,
        })
    }

    pub fn constant(domain: Arc<DomainSpec>, c: f64, boundary: BoundaryData) -> Result<Self> {
        let n = domain.node_count();
        Self::new(domain, vec![c; n], boundary)
    }

    /// Interior values from `f(x, t)`.
    pub fn from_fn(
        domain: Arc<DomainSpec>,
        boundary: BoundaryData,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = (0..domain.node_count())
            .map(|k| {
                let (x, t) = domain.coords(k);
                f(x, t)
            })
            .collect();
        Self::new(domain, values, boundary)
    }

    /// Exact samples of an oracle at every active node, with its own trace as
    /// boundary data.
    pub fn sample_oracle(domain: Arc<DomainSpec>, surface: &OracleSurface) -> Result<Self> {
        let boundary = BoundaryData::from_oracle(&domain, surface)?;
        let mut values = vec![f64::NAN; domain.node_count()];
        for k in 0..values.len() {
            if domain.is_active(k) {
                let (x, t) = domain.coords(k);
                values[k] = surface.value(&[x, t])?;
            }
        }
        Self::new(domain, values, boundary)
    }

    /// Average of row-wise and column-wise linear interpolation of the
    /// boundary values; exact for affine data.
    pub fn blend(domain: Arc<DomainSpec>, boundary: BoundaryData) -> Result<Self> {
        let mut values = vec![f64::NAN; domain.node_count()];
        for (&k, &v) in domain.boundary_nodes().iter().zip(boundary.values()) {
            values[k] = v;
        }
        let interp = |k: usize, di: i64, dj: i64| -> f64 {
            let walk = |sign: i64| {
                let mut steps = 0i64;
                let mut m = k;
                while domain.kind(m) == NodeKind::Interior {
                    steps += 1;
                    m = domain
                        .neighbor(k, sign * di * steps, sign * dj * steps)
                        .expect("interior nodes are enclosed by boundary nodes");
                }
                (steps as f64, values[m])
            };
            let (a, va) = walk(-1);
            let (b, vb) = walk(1);
            (b * va + a * vb) / (a + b)
        };
        let blended: Vec<(usize, f64)> = domain
            .interior_nodes()
            .iter()
            .map(|&k| (k, 0.5 * (interp(k, 1, 0) + interp(k, 0, 1))))
            .collect();
        for (k, v) in blended {
            values[k] = v;
        }
        Self::new(domain, values, boundary)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<DomainSpec> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Same interior values with new boundary data.
    pub fn with_boundary(&self, boundary: BoundaryData) -> Result<Self> {
        Self::new(self.domain.clone(), self.values.clone(), boundary)
    }

    /// Replaces interior values, keeping the boundary.
    pub(crate) fn set_interior(&mut self, interior: &[usize], values: impl Iterator<Item = f64>) {
        for (&k, v) in interior.iter().zip(values) {
            self.values[k] = v;
        }
    }

    fn fold_over(&self, nodes: &[usize], init: f64, f: fn(f64, f64) -> f64) -> f64 {
        nodes.iter().map(|&k| self.values[k]).fold(init, f)
    }

    pub fn min_interior(&self) -> f64 {
        self.fold_over(self.domain.interior_nodes(), f64::INFINITY, f64::min)
    }

    pub fn max_interior(&self) -> f64 {
        self.fold_over(self.domain.interior_nodes(), f64::NEG_INFINITY, f64::max)
    }

    /// Minimum over all active nodes.
    pub fn min(&self) -> f64 {
        self.min_interior().min(self.boundary.min())
    }

    pub fn max(&self) -> f64 {
        self.max_interior().max(self.boundary.max())
    }

    /// Max-norm difference over active nodes; both fields must share a grid.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.domain.is_active(k))
            .map(|k| (self.values[k] - other.values[k]).abs())
            .fold(0.0, f64::max)
    }

    /// Max-norm error against `f(x, t)` over interior nodes.
    pub fn max_error_against(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.domain
            .interior_nodes()
            .iter()
            .map(|&k| {
                let (x, t) = self.domain.coords(k);
                (self.values[k] - f(x, t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Centered second-order derivatives at an interior node.
    pub fn stencil_state(&self, k: usize) -> Planar {
        let d = &self.domain;
        let (hx, ht) = d.spacing();
        let u = |di: i64, dj: i64| self.values[d.neighbor(k, di, dj).expect("interior node")];
        let c = self.values[k];
        Planar {
            g: c,
            gx: (u(1, 0) - u(-1, 0)) / (2.0 * hx),
            gt: (u(0, 1) - u(0, -1)) / (2.0 * ht),
            gxx: (u(1, 0) - 2.0 * c + u(-1, 0)) / (hx * hx),
            gtt: (u(0, 1) - 2.0 * c + u(0, -1)) / (ht * ht),
            gxt: (u(1, 1) - u(-1, 1) - u(1, -1) + u(-1, -1)) / (4.0 * hx * ht),
        }
    }

    /// Derivatives at any active node: centered at interior nodes; at boundary
    /// nodes the one-sided gradient with the Hessian of an adjacent interior
    /// node (zero if there is none).
    pub fn nodal_state(&self, k: usize) -> Planar {
        let d = &self.domain;
        if d.kind(k) == NodeKind::Interior {
            return self.stencil_state(k);
        }
        let (gx, gt) = self.gradient(k);
        let hess = STENCIL_RING
            .iter()
            .filter_map(|&(di, dj)| d.neighbor(k, di, dj))
            .find(|&m| d.kind(m) == NodeKind::Interior)
            .map(|m| self.stencil_state(m));
        Planar {
            g: self.values[k],
            gx,
            gt,
            gxx: hess.map_or(0.0, |p| p.gxx),
            gtt: hess.map_or(0.0, |p| p.gtt),
            gxt: hess.map_or(0.0, |p| p.gxt),
        }
    }

    /// Bilinear interpolation of the values at `(x, t)`.
    pub fn interpolate(&self, x: f64, t: f64) -> Option<f64> {
        let w = self.domain.cell_weights(x, t)?;
        Some(w.iter().map(|&(k, c)| c * self.values[k]).sum())
    }

    /// One derivative along a grid axis: centered where both neighbours are
    /// active, otherwise one-sided of second order, falling back to first
    /// order next to a single active neighbour.
    fn axis_derivative(&self, k: usize, di: i64, dj: i64, h: f64) -> f64 {
        let d = &self.domain;
        let at = |s: i64| d.active_neighbor(k, s * di, s * dj).map(|m| self.values[m]);
        let u0 = self.values[k];
        match (at(-1), at(1)) {
            (Some(w), Some(e)) => (e - w) / (2.0 * h),
            (None, Some(e)) => match at(2) {
                Some(e2) => (-3.0 * u0 + 4.0 * e - e2) / (2.0 * h),
                None => (e - u0) / h,
            },
            (Some(w), None) => match at(-2) {
                Some(w2) => (3.0 * u0 - 4.0 * w + w2) / (2.0 * h),
                None => (u0 - w) / h,
            },
            (None, None) => 0.0,
        }
    }

    /// Discrete `(g_x, g_t)` at any active node.
    pub fn gradient(&self, k: usize) -> (f64, f64) {
        let (hx, ht) = self.domain.spacing();
        (self.axis_derivative(k, 1, 0, hx), self.axis_derivative(k, 0, 1, ht))
    }

    /// Maximum of `|Dg|` over the given nodes.
    pub fn max_gradient_over(&self, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .map(|&k| {
                let (gx, gt) = self.gradient(k);
                gx.hypot(gt)
            })
            .fold(0.0, f64::max)
    }

    /// Maximum of `|Dg|` over all active nodes.
    pub fn max_gradient(&self) -> f64 {
        self.max_gradient_over(self.domain.interior_nodes())
            .max(self.max_gradient_over(self.domain.boundary_nodes()))
    }

    /// Maximum Frobenius norm of the discrete Hessian over interior nodes.
    pub fn max_hessian(&self) -> f64 {
        self.domain
            .interior_nodes()
            .iter()
            .map(|&k| {
                let p = self.stencil_state(k);
                (p.gxx * p.gxx + p.gtt * p.gtt + 2.0 * p.gxt * p.gxt).sqrt()
            })
            .fold(0.0, f64::max)
    }
}
