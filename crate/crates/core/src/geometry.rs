//! Domains in the `(x, t)`-plane, boundary data, and the geometric quantities
//! (horizontal width, enclosing radius, barrier radius `R(Omega, f)`) that
//! parameterise every a priori estimate.
//!
//! Domains are rasterised on a uniform tensor grid covering their bounding
//! box. Node `(i, j)` sits at `(x_min + i hx, t_min + j ht)` and has flat index
//! `j * (nx + 1) + i`, so `x` varies fastest.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::OracleSurface;
use crate::error::{Error, Result};

/// `1 + sqrt(pi / 2)`, the factor appearing in the existence and global
/// gradient hypotheses.
pub fn hypothesis_factor() -> f64 {
    1.0 + (PI / 2.0).sqrt()
}

/// Geometric description of a bounded convex domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Rectangle {
        x_min: f64,
        x_max: f64,
        t_min: f64,
        t_max: f64,
    },
    /// Convex polygon, vertices listed counterclockwise as `[x, t]`.
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// A supporting line of the domain: `d(q) = inward_normal . (q - point)` is the
/// distance from `q` to the line, nonnegative on the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportLine {
    pub name: String,
    pub point: [f64; 2],
    pub inward_normal: [f64; 2],
}

impl SupportLine {
    pub fn distance(&self, x: f64, t: f64) -> f64 {
        self.inward_normal[0] * (x - self.point[0]) + self.inward_normal[1] * (t - self.point[1])
    }
}

const NO_SLOT: usize = usize::MAX;

/// A rasterised convex domain.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    shape: Shape,
    nx: usize,
    nt: usize,
    x_min: f64,
    x_max: f64,
    t_min: f64,
    t_max: f64,
    hx: f64,
    ht: f64,
    mask: Vec<NodeKind>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    boundary_slot: Vec<usize>,
}

impl DomainSpec {
    /// Rectangle `[x_min, x_max] x [t_min, t_max]` split into `nx x nt` cells.
    pub fn rectangle(
        x_min: f64,
        x_max: f64,
        t_min: f64,
        t_max: f64,
        nx: usize,
        nt: usize,
    ) -> Result<Self> {
        Self::new(
            Shape::Rectangle {
                x_min,
                x_max,
                t_min,
                t_max,
            },
            nx,
            nt,
        )
    }

    pub fn polygon(vertices: Vec<[f64; 2]>, nx: usize, nt: usize) -> Result<Self> {
        Self::new(Shape::Polygon { vertices }, nx, nt)
    }

    pub fn new(shape: Shape, nx: usize, nt: usize) -> Result<Self> {
        if nx == 0 || nt == 0 {
            return Err(Error::InvalidDomain(format!(
                "resolution must be positive, got ({nx}, {nt})"
            )));
        }
        let (x_min, x_max, t_min, t_max) = match &shape {
            Shape::Rectangle {
                x_min,
                x_max,
                t_min,
                t_max,
            } => (*x_min, *x_max, *t_min, *t_max),
            Shape::Polygon { vertices } => {
                check_convex_ccw(vertices)?;
                let xs = vertices.iter().map(|v| v[0]);
                let ts = vertices.iter().map(|v| v[1]);
                (
                    xs.clone().fold(f64::INFINITY, f64::min),
                    xs.fold(f64::NEG_INFINITY, f64::max),
                    ts.clone().fold(f64::INFINITY, f64::min),
                    ts.fold(f64::NEG_INFINITY, f64::max),
                )
            }
        };
        if ![x_min, x_max, t_min, t_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite extent".into()));
        }
        if !(x_max > x_min && t_max > t_min) {
            return Err(Error::EmptyDomain);
        }
        let hx = (x_max - x_min) / nx as f64;
        let ht = (t_max - t_min) / nt as f64;

        let mut dom = DomainSpec {
            shape,
            nx,
            nt,
            x_min,
            x_max,
            t_min,
            t_max,
            hx,
            ht,
            mask: Vec::new(),
            interior: Vec::new(),
            boundary: Vec::new(),
            boundary_slot: Vec::new(),
        };
        dom.rasterise();
        if dom.interior.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(dom)
    }

    fn rasterise(&mut self) {
        let count = self.node_count();
        let mut mask = vec![NodeKind::Exterior; count];
        match &self.shape {
            Shape::Rectangle { .. } => {
                for j in 0..=self.nt {
                    for i in 0..=self.nx {
                        let edge = i == 0 || j == 0 || i == self.nx || j == self.nt;
                        mask[self.index(i, j)] = if edge {
                            NodeKind::Boundary
                        } else {
                            NodeKind::Interior
                        };
                    }
                }
            }
            Shape::Polygon { vertices } => {
                let tol = 1e-12 * self.diameter();
                for j in 0..=self.nt {
                    for i in 0..=self.nx {
                        let (x, t) = self.coords_ij(i, j);
                        if min_edge_distance(vertices, x, t) > tol {
                            mask[self.index(i, j)] = NodeKind::Interior;
                        }
                    }
                }
                // Every node in the 3x3 neighbourhood of an interior node is
                // needed by the stencil; the non-interior ones carry data.
                for j in 0..=self.nt {
                    for i in 0..=self.nx {
                        if mask[self.index(i, j)] != NodeKind::Interior {
                            continue;
                        }
                        for dj in -1i64..=1 {
                            for di in -1i64..=1 {
                                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                                if ii < 0 || jj < 0 || ii > self.nx as i64 || jj > self.nt as i64 {
                                    continue;
                                }
                                let k = self.index(ii as usize, jj as usize);
                                if mask[k] == NodeKind::Exterior {
                                    mask[k] = NodeKind::Boundary;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut slot = vec![NO_SLOT; count];
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (k, kind) in mask.iter().enumerate() {
            match kind {
                NodeKind::Interior => interior.push(k),
                NodeKind::Boundary => {
                    slot[k] = boundary.len();
                    boundary.push(k);
                }
                NodeKind::Exterior => {}
            }
        }
        self.mask = mask;
        self.interior = interior;
        self.boundary = boundary;
        self.boundary_slot = slot;
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Number of cells `(nx, nt)`.
    pub fn resolution(&self) -> (usize, usize) {
        (self.nx, self.nt)
    }

    /// Grid spacings `(hx, ht)`.
    pub fn spacing(&self) -> (f64, f64) {
        (self.hx, self.ht)
    }

    /// `(x_min, x_max, t_min, t_max)` of the grid.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        (self.x_min, self.x_max, self.t_min, self.t_max)
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.nt + 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % (self.nx + 1), k / (self.nx + 1))
    }

    fn coords_ij(&self, i: usize, j: usize) -> (f64, f64) {
        let x = if i == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.hx
        };
        let t = if j == self.nt {
            self.t_max
        } else {
            self.t_min + j as f64 * self.ht
        };
        (x, t)
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        self.coords_ij(i, j)
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.mask[k]
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.mask[k] != NodeKind::Exterior
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Position of node `k` in [`Self::boundary_nodes`].
    pub fn boundary_slot(&self, k: usize) -> Option<usize> {
        match self.boundary_slot[k] {
            NO_SLOT => None,
            s => Some(s),
        }
    }

    /// Neighbour of `k` offset by `(di, dj)` if it lies on the grid.
    pub fn neighbor(&self, k: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.ij(k);
        let (ii, jj) = (i as i64 + di, j as i64 + dj);
        if ii < 0 || jj < 0 || ii > self.nx as i64 || jj > self.nt as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }

    /// Active neighbour of `k` offset by `(di, dj)`.
    pub fn active_neighbor(&self, k: usize, di: i64, dj: i64) -> Option<usize> {
        self.neighbor(k, di, dj).filter(|&m| self.is_active(m))
    }

    /// Corners of the grid cell containing `(x, t)` with their bilinear
    /// weights, if the point lies in the box and all four corners are active.
    pub fn cell_weights(&self, x: f64, t: f64) -> Option<[(usize, f64); 4]> {
        if !(self.x_min..=self.x_max).contains(&x) || !(self.t_min..=self.t_max).contains(&t) {
            return None;
        }
        let i = (((x - self.x_min) / self.hx).floor() as usize).min(self.nx - 1);
        let j = (((t - self.t_min) / self.ht).floor() as usize).min(self.nt - 1);
        let (x0, t0) = self.coords_ij(i, j);
        let (x1, t1) = self.coords_ij(i + 1, j + 1);
        let a = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let b = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let corners = [
            (self.index(i, j), (1.0 - a) * (1.0 - b)),
            (self.index(i + 1, j), a * (1.0 - b)),
            (self.index(i, j + 1), (1.0 - a) * b),
            (self.index(i + 1, j + 1), a * b),
        ];
        corners.iter().all(|&(k, _)| self.is_active(k)).then_some(corners)
    }

    /// `(min, max)` of the `x` coordinate over the boundary curve.
    pub fn x_range(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Rectangle { x_min, x_max, .. } => (*x_min, *x_max),
            Shape::Polygon { vertices } => {
                let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = vertices
                    .iter()
                    .map(|v| v[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Euclidean diameter of the domain.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Rectangle { .. } => (self.x_max - self.x_min).hypot(self.t_max - self.t_min),
            Shape::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
                    }
                }
                d
            }
        }
    }

    /// Inradius; exact for rectangles, sampled on the grid for polygons.
    pub fn inradius(&self) -> f64 {
        match &self.shape {
            Shape::Rectangle { .. } => 0.5 * (self.x_max - self.x_min).min(self.t_max - self.t_min),
            Shape::Polygon { vertices } => self
                .interior
                .iter()
                .map(|&k| {
                    let (x, t) = self.coords(k);
                    min_edge_distance(vertices, x, t)
                })
                .fold(0.0, f64::max),
        }
    }

    /// Supporting lines through each side of the domain.
    pub fn support_lines(&self) -> Vec<SupportLine> {
        match &self.shape {
            Shape::Rectangle {
                x_min,
                x_max,
                t_min,
                t_max,
            } => vec![
                SupportLine {
                    name: "x_min".into(),
                    point: [*x_min, *t_min],
                    inward_normal: [1.0, 0.0],
                },
                SupportLine {
                    name: "x_max".into(),
                    point: [*x_max, *t_min],
                    inward_normal: [-1.0, 0.0],
                },
                SupportLine {
                    name: "t_min".into(),
                    point: [*x_min, *t_min],
                    inward_normal: [0.0, 1.0],
                },
                SupportLine {
                    name: "t_max".into(),
                    point: [*x_min, *t_max],
                    inward_normal: [0.0, -1.0],
                },
            ],
            Shape::Polygon { vertices } => (0..vertices.len())
                .map(|k| {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % vertices.len()];
                    let (ex, et) = (b[0] - a[0], b[1] - a[1]);
                    let len = ex.hypot(et);
                    SupportLine {
                        name: format!("edge{k}"),
                        point: a,
                        inward_normal: [-et / len, ex / len],
                    }
                })
                .collect(),
        }
    }

    /// The same domain moved by `(dx, dt)`, at the same resolution.
    pub fn translated(&self, dx: f64, dt: f64) -> Result<Self> {
        let shape = match &self.shape {
            Shape::Rectangle {
                x_min,
                x_max,
                t_min,
                t_max,
            } => Shape::Rectangle {
                x_min: x_min + dx,
                x_max: x_max + dx,
                t_min: t_min + dt,
                t_max: t_max + dt,
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| [v[0] + dx, v[1] + dt]).collect(),
            },
        };
        Self::new(shape, self.nx, self.nt)
    }

    /// Image under `T_lambda = diag(lambda, 1)`, at the same resolution.
    pub fn scaled_x(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        let shape = match &self.shape {
            Shape::Rectangle {
                x_min,
                x_max,
                t_min,
                t_max,
            } => Shape::Rectangle {
                x_min: lambda * x_min,
                x_max: lambda * x_max,
                t_min: *t_min,
                t_max: *t_max,
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| [lambda * v[0], v[1]]).collect(),
            },
        };
        Self::new(shape, self.nx, self.nt)
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Smallest signed distance from `(x, t)` to the edge lines; positive inside.
fn min_edge_distance(vertices: &[[f64; 2]], x: f64, t: f64) -> f64 {
    let m = vertices.len();
    (0..m)
        .map(|k| {
            let a = vertices[k];
            let b = vertices[(k + 1) % m];
            let e = [b[0] - a[0], b[1] - a[1]];
            cross(e, [x - a[0], t - a[1]]) / e[0].hypot(e[1])
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_convex_ccw(vertices: &[[f64; 2]]) -> Result<()> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
    }
    if vertices.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDomain("non-finite vertex".into()));
    }
    let edges: Vec<[f64; 2]> = (0..m)
        .map(|k| {
            let a = vertices[k];
            let b = vertices[(k + 1) % m];
            [b[0] - a[0], b[1] - a[1]]
        })
        .collect();
    let scale = edges.iter().map(|e| e[0].hypot(e[1])).fold(0.0, f64::max);
    if edges.iter().any(|e| e[0].hypot(e[1]) <= 1e-14 * scale) {
        return Err(Error::InvalidDomain("repeated vertex".into()));
    }
    let tol = 1e-12 * scale * scale;
    let mut any_positive = false;
    let mut turning = 0.0;
    for k in 0..m {
        let (e0, e1) = (edges[k], edges[(k + 1) % m]);
        let c = cross(e0, e1);
        if c < -tol {
            return Err(Error::InvalidDomain(format!(
                "polygon is not convex and counterclockwise at vertex {}",
                (k + 1) % m
            )));
        }
        any_positive |= c > tol;
        turning += c.atan2(e0[0] * e1[0] + e0[1] * e1[1]);
    }
    if !any_positive {
        return Err(Error::InvalidDomain("polygon is degenerate".into()));
    }
    if (turning - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::InvalidDomain("polygon is not simple".into()));
    }
    Ok(())
}

/// Where a set of boundary values came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Constant { value: f64 },
    Oracle { surface: OracleSurface },
    Table,
}

/// Values on the boundary nodes of a domain, in the order of
/// [`DomainSpec::boundary_nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    values: Vec<f64>,
    provenance: Provenance,
}

impl BoundaryData {
    pub fn constant(domain: &DomainSpec, value: f64) -> Self {
        BoundaryData {
            values: vec![value; domain.boundary_nodes().len()],
            provenance: Provenance::Constant { value },
        }
    }

    /// Trace of an oracle surface, sampled exactly at the boundary nodes.
    pub fn from_oracle(domain: &DomainSpec, surface: &OracleSurface) -> Result<Self> {
        let values = domain
            .boundary_nodes()
            .iter()
            .map(|&k| {
                let (x, t) = domain.coords(k);
                surface.value(&[x, t])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryData {
            values,
            provenance: Provenance::Oracle {
                surface: surface.clone(),
            },
        })
    }

    pub fn from_fn(domain: &DomainSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = domain
            .boundary_nodes()
            .iter()
            .map(|&k| {
                let (x, t) = domain.coords(k);
                f(x, t)
            })
            .collect();
        BoundaryData {
            values,
            provenance: Provenance::Table,
        }
    }

    pub fn tabulated(domain: &DomainSpec, values: Vec<f64>) -> Result<Self> {
        let expected = domain.boundary_nodes().len();
        if values.len() != expected {
            return Err(Error::Parse(format!(
                "expected {expected} boundary values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite boundary value".into()));
        }
        Ok(BoundaryData {
            values,
            provenance: Provenance::Table,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn osc(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn ensure_positive(&self, domain: &DomainSpec) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(slot) => Err(Error::NonPositiveBoundaryData {
                node: domain.boundary_nodes()[slot],
                value: self.values[slot],
            }),
            None => Ok(()),
        }
    }

    /// `f + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let provenance = match self.provenance {
            Provenance::Constant { value } => Provenance::Constant { value: value + c },
            _ => Provenance::Table,
        };
        BoundaryData {
            values: self.values.iter().map(|v| v + c).collect(),
            provenance,
        }
    }

    /// Boundary data `h(s, .)` of the homotopy family: `2 s min f` for
    /// `s <= 1/2`, and `(2s - 1) f + 2 (1 - s) min f` for `s in [1/2, 1]`.
    pub fn homotopy(&self, s: f64) -> Self {
        let m = self.min();
        if s <= 0.5 {
            return BoundaryData {
                values: vec![2.0 * s * m; self.values.len()],
                provenance: Provenance::Constant { value: 2.0 * s * m },
            };
        }
        if s == 1.0 {
            return self.clone();
        }
        let values = self
            .values
            .iter()
            .map(|&f| (2.0 * s - 1.0) * f + 2.0 * (1.0 - s) * m)
            .collect();
        let provenance = match self.provenance {
            Provenance::Constant { value } => Provenance::Constant { value },
            _ => Provenance::Table,
        };
        BoundaryData { values, provenance }
    }
}

/// Width and radius quantities of a planar domain with boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricQuantities {
    /// Horizontal width `h(Gamma)`.
    pub h_gamma: f64,
    /// Midpoint of the `x`-range of the boundary.
    pub x0_gamma: f64,
    /// Enclosing radius slot; `h_gamma / 2` in the planar case.
    pub r_omega: f64,
    /// `R(Omega, f) = sqrt(max f^2 + (h / 2)^2)`.
    #[serde(rename = "R_omega_f")]
    pub radius: f64,
    pub osc_f: f64,
    pub min_f: f64,
    pub max_f: f64,
}

impl GeometricQuantities {
    pub fn from_parts(h_gamma: f64, x0_gamma: f64, min_f: f64, max_f: f64) -> Self {
        let r_omega = 0.5 * h_gamma;
        GeometricQuantities {
            h_gamma,
            x0_gamma,
            r_omega,
            radius: max_f.hypot(r_omega),
            osc_f: max_f - min_f,
            min_f,
            max_f,
        }
    }
}

pub fn compute_quantities(domain: &DomainSpec, f: &BoundaryData) -> Result<GeometricQuantities> {
    if domain.interior_nodes().is_empty() {
        return Err(Error::EmptyDomain);
    }
    f.ensure_positive(domain)?;
    let (lo, hi) = domain.x_range();
    Ok(GeometricQuantities::from_parts(
        hi - lo,
        0.5 * (hi + lo),
        f.min(),
        f.max(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    #[serde(rename = "R_omega_f")]
    pub radius: f64,
    /// `min f (1 + sqrt(pi/2))`.
    pub existence_limit: f64,
    /// `R(Omega, f) <= min f (1 + sqrt(pi/2))`.
    pub existence_ok: bool,
    /// Smallest admissible shift `c0 = osc f + h(Gamma) / 2`.
    pub shift_c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c2 < c1 + c1 sqrt(pi/2)` with `c1 = min f`, `c2 = R(Omega, f)`.
    pub gradient_ok: bool,
}

pub fn check_existence_hypotheses(q: &GeometricQuantities) -> HypothesisReport {
    let limit = q.min_f * hypothesis_factor();
    HypothesisReport {
        radius: q.radius,
        existence_limit: limit,
        existence_ok: q.radius <= limit,
        shift_c0: q.osc_f + 0.5 * q.h_gamma,
        c1: q.min_f,
        c2: q.radius,
        gradient_ok: q.radius < limit,
    }
}

/// Quantities for `n >= 3`, where the domain is only known through sample
/// points of its projection onto the ideal boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedQuantities {
    pub diameter: f64,
    pub r_omega: f64,
    #[serde(rename = "R_omega_f")]
    pub radius: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub osc_f: f64,
}

pub fn projected_quantities(points: &[Vec<f64>], f: &[f64]) -> Result<ProjectedQuantities> {
    if points.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if let Some(node) = f.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveBoundaryData { node, value: f[node] });
    }
    let r_omega = smallest_enclosing_radius(points)?;
    let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
    let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ProjectedQuantities {
        diameter: diameter(points),
        r_omega,
        radius: max_f.hypot(r_omega),
        min_f,
        max_f,
        osc_f: max_f - min_f,
    })
}

pub fn diameter(points: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            d = d.max(dist(p, q));
        }
    }
    d
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Radius of the smallest closed ball containing `points`, by brute force over
/// the circumballs of every subset of at most `d + 1` points (`d <= 3`).
pub fn smallest_enclosing_radius(points: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = points.first() else {
        return Err(Error::EmptyDomain);
    };
    let d = first.len();
    if d == 0 || d > 3 || points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParams(
            "points must share a dimension between 1 and 3".into(),
        ));
    }
    let scale = diameter(points);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    let mut subset = Vec::with_capacity(d + 1);
    for k in 2..=(d + 1).min(points.len()) {
        for_each_subset(points.len(), k, &mut subset, &mut |idx| {
            let Some((center, r)) = circumball(points, idx) else {
                return;
            };
            if r >= best {
                return;
            }
            let slack = r * (1.0 + 1e-12) + 1e-15 * scale;
            if points.iter().all(|p| dist(p, &center) <= slack) {
                best = r;
            }
        });
    }
    Ok(best)
}

fn for_each_subset(n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if buf.len() == k {
        f(buf);
        return;
    }
    let start = buf.last().map_or(0, |&l| l + 1);
    for i in start..n {
        if n - i < k - buf.len() {
            break;
        }
        buf.push(i);
        for_each_subset(n, k, buf, f);
        buf.pop();
    }
}

/// Center and radius of the smallest ball whose sphere passes through the
/// given points (the circumcenter within their affine hull).
fn circumball(points: &[Vec<f64>], idx: &[usize]) -> Option<(Vec<f64>, f64)> {
    let p0 = &points[idx[0]];
    let m = idx.len() - 1;
    let diffs: Vec<Vec<f64>> = idx[1..]
        .iter()
        .map(|&i| points[i].iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = DMatrix::from_fn(m, m, |r, c| dot(&diffs[r], &diffs[c]));
    let rhs = DVector::from_fn(m, |r, _| 0.5 * dot(&diffs[r], &diffs[r]));
    let scale = gram.diagonal().max();
    let lu = gram.lu();
    let det = lu.determinant();
    if !(det.abs() > 1e-12 * scale.powi(m as i32)) {
        return None;
    }
    let coef = lu.solve(&rhs)?;
    let mut center = p0.clone();
    for (c, d) in coef.iter().zip(&diffs) {
        for (x, dx) in center.iter_mut().zip(d) {
            *x += c * dx;
        }
    }
    let r = dist(&center, p0);
    Some((center, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rectangle_quantities_with_unit_data() {
        let dom = DomainSpec::rectangle(0.0, 2.0, 0.0, 1.0, 8, 4).unwrap();
        let f = BoundaryData::constant(&dom, 1.0);
        let q = compute_quantities(&dom, &f).unwrap();
        assert_eq!(q.h_gamma, 2.0);
        assert_relative_eq!(q.radius, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(q.r_omega, 1.0);
        assert_eq!(q.x0_gamma, 1.0);
    }

    #[test]
    fn degenerate_rectangle_is_empty() {
        assert_eq!(
            DomainSpec::rectangle(0.0, 0.0, 0.0, 1.0, 4, 4).unwrap_err(),
            Error::EmptyDomain
        );
        // A single cell across has no interior node.
        assert_eq!(
            DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0, 1, 4).unwrap_err(),
            Error::EmptyDomain
        );
    }

    #[test]
    fn geodesic_trace_quantities() {
        // f = sqrt(4 - (x - 1)^2) on [0.5, 1.5] x [0, 1]
        let dom = DomainSpec::rectangle(0.5, 1.5, 0.0, 1.0, 16, 16).unwrap();
        let f = BoundaryData::from_fn(&dom, |x, _| (4.0 - (x - 1.0) * (x - 1.0)).sqrt());
        let q = compute_quantities(&dom, &f).unwrap();
        assert_relative_eq!(q.min_f, 1.936_491_673_103_708_4, epsilon = 1e-14);
        assert_relative_eq!(q.max_f, 2.0, epsilon = 1e-15);
        assert_eq!(q.h_gamma, 1.0);
        assert_relative_eq!(q.radius, 2.061_552_812_808_830_3, epsilon = 1e-14);
    }

    #[test]
    fn non_positive_data_rejected() {
        let dom = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let f = BoundaryData::from_fn(&dom, |x, _| x);
        assert!(matches!(
            compute_quantities(&dom, &f),
            Err(Error::NonPositiveBoundaryData { value, .. }) if value == 0.0
        ));
    }

    #[test]
    fn hypothesis_reports() {
        let wide = |w: f64| {
            let dom = DomainSpec::rectangle(0.0, w, 0.0, 1.0, 4, 4).unwrap();
            let f = BoundaryData::constant(&dom, 1.0);
            check_existence_hypotheses(&compute_quantities(&dom, &f).unwrap())
        };
        let r2 = wide(2.0);
        assert!(r2.existence_ok && r2.gradient_ok);
        assert_relative_eq!(r2.existence_limit, 2.253_314_137_315_500_3, epsilon = 1e-14);
        let r10 = wide(10.0);
        assert!(!r10.existence_ok && !r10.gradient_ok);
        assert_relative_eq!(r10.radius, 26f64.sqrt(), epsilon = 1e-14);

        let q = GeometricQuantities::from_parts(2.0, 0.0, 1.0, 1.5);
        assert_eq!(check_existence_hypotheses(&q).shift_c0, 1.5);
    }

    #[test]
    fn rectangle_mask_and_slots() {
        let dom = DomainSpec::rectangle(0.0, 1.0, 0.0, 2.0, 4, 3).unwrap();
        assert_eq!(dom.node_count(), 20);
        assert_eq!(dom.interior_nodes().len(), 3 * 2);
        assert_eq!(dom.boundary_nodes().len(), 20 - 6);
        for (s, &k) in dom.boundary_nodes().iter().enumerate() {
            assert_eq!(dom.boundary_slot(k), Some(s));
        }
        assert_eq!(dom.coords(dom.index(4, 3)), (1.0, 2.0));
    }

    #[test]
    fn polygon_validation() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(DomainSpec::polygon(square.clone(), 8, 8).is_ok());
        let cw: Vec<_> = square.iter().rev().copied().collect();
        assert!(matches!(
            DomainSpec::polygon(cw, 8, 8),
            Err(Error::InvalidDomain(_))
        ));
        let dart = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]];
        assert!(DomainSpec::polygon(dart, 8, 8).is_err());
        let star = vec![
            [0.0, 1.0],
            [-0.588, -0.809],
            [0.951, 0.309],
            [-0.951, 0.309],
            [0.588, -0.809],
        ];
        assert!(DomainSpec::polygon(star, 8, 8).is_err());
    }

    #[test]
    fn polygon_boundary_surrounds_interior() {
        let tri = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]];
        let dom = DomainSpec::polygon(tri, 20, 15).unwrap();
        assert_eq!(dom.x_range(), (0.0, 2.0));
        for &k in dom.interior_nodes() {
            for dj in -1..=1 {
                for di in -1..=1 {
                    let m = dom.neighbor(k, di, dj).unwrap();
                    assert!(dom.is_active(m));
                }
            }
        }
        // every boundary node lies within one diagonal cell of an edge
        let (hx, ht) = dom.spacing();
        let Shape::Polygon { vertices } = dom.shape() else {
            unreachable!()
        };
        for &k in dom.boundary_nodes() {
            let (x, t) = dom.coords(k);
            assert!(min_edge_distance(vertices, x, t).abs() <= hx.hypot(ht) + 1e-12);
        }
        let f = BoundaryData::constant(&dom, 1.0);
        assert_eq!(compute_quantities(&dom, &f).unwrap().h_gamma, 2.0);
    }

    #[test]
    fn homotopy_data_endpoints() {
        let dom = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let f = BoundaryData::from_fn(&dom, |x, t| 1.0 + x + t);
        let m = f.min();
        assert!(f.homotopy(0.25).values().iter().all(|&v| v == 0.5 * m));
        assert!(f.homotopy(0.5).values().iter().all(|&v| v == m));
        assert_eq!(f.homotopy(1.0).values(), f.values());
        let mid = f.homotopy(0.75);
        for (h, v) in mid.values().iter().zip(f.values()) {
            assert_relative_eq!(*h, 0.5 * v + 0.5 * m, epsilon = 1e-15);
        }
    }

    #[test]
    fn enclosing_disk_known_cases() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.1]];
        assert_relative_eq!(smallest_enclosing_radius(&pts).unwrap(), 1.0, epsilon = 1e-12);
        let h = 3f64.sqrt() / 2.0;
        let equi = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        assert_relative_eq!(
            smallest_enclosing_radius(&equi).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-12
        );
        let seg = vec![vec![-1.0], vec![3.0], vec![0.5]];
        assert_relative_eq!(smallest_enclosing_radius(&seg).unwrap(), 2.0, epsilon = 1e-14);
        let cube: Vec<Vec<f64>> = (0..8)
            .map(|b| (0..3).map(|k| ((b >> k) & 1) as f64).collect())
            .collect();
        assert_relative_eq!(
            smallest_enclosing_radius(&cube).unwrap(),
            3f64.sqrt() / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn projected_quantities_radius() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]];
        let q = projected_quantities(&pts, &[1.0, 1.0, 2.0, 1.5]).unwrap();
        assert_relative_eq!(q.r_omega, 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(q.radius, (4.0f64 + 2.0).sqrt(), epsilon = 1e-12);
        assert!(q.diameter / 2.0 <= q.r_omega && q.r_omega < q.diameter);
    }
}
