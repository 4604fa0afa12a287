//! Residual and Jacobian assembly on the nine-point stencil.

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use super::field::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::NodeKind;
use crate::operator::{ell, planar_jacobian, planar_residual, planar_scale, Planar};

/// A planar second-order operator `F(u, Du, D^2 u)` with closed-form partials.
pub trait LocalOperator: Sync {
    fn residual(&self, p: &Planar) -> f64;
    /// Partials with respect to `[u, u_x, u_t, u_xx, u_tt, u_xt]`.
    fn jacobian(&self, p: &Planar) -> [f64; 6];
    /// Sum of magnitudes of the terms, for scaling tolerances.
    fn scale(&self, p: &Planar) -> f64;
    /// Whether the unknown must stay positive.
    fn needs_positive(&self) -> bool;
}

/// The homotopy operator at `(eps, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyOperator {
    pub eps: f64,
    pub s: f64,
}

impl LocalOperator for HomotopyOperator {
    fn residual(&self, p: &Planar) -> f64 {
        planar_residual(p, self.eps, ell(self.s))
    }

    fn jacobian(&self, p: &Planar) -> [f64; 6] {
        planar_jacobian(p, self.eps, ell(self.s))
    }

    fn scale(&self, p: &Planar) -> f64 {
        planar_scale(p, self.eps, ell(self.s))
    }

    fn needs_positive(&self) -> bool {
        true
    }
}

/// Euclidean minimal graphs in non-divergence form:
/// `(1 + u_t^2) u_xx - 2 u_x u_t u_xt + (1 + u_x^2) u_tt = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EuclideanMinimalOperator;

impl LocalOperator for EuclideanMinimalOperator {
    fn residual(&self, p: &Planar) -> f64 {
        (1.0 + p.gt * p.gt) * p.gxx - 2.0 * p.gx * p.gt * p.gxt + (1.0 + p.gx * p.gx) * p.gtt
    }

    fn jacobian(&self, p: &Planar) -> [f64; 6] {
        [
            0.0,
            2.0 * p.gx * p.gtt - 2.0 * p.gt * p.gxt,
            2.0 * p.gt * p.gxx - 2.0 * p.gx * p.gxt,
            1.0 + p.gt * p.gt,
            1.0 + p.gx * p.gx,
            -2.0 * p.gx * p.gt,
        ]
    }

    fn scale(&self, p: &Planar) -> f64 {
        ((1.0 + p.gt * p.gt) * p.gxx).abs()
            + (2.0 * p.gx * p.gt * p.gxt).abs()
            + ((1.0 + p.gx * p.gx) * p.gtt).abs()
    }

    fn needs_positive(&self) -> bool {
        false
    }
}

/// Offsets of the nine-point stencil, `(di, dj)`.
pub const STENCIL: [(i64, i64); 9] = [
    (0, 0),
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

/// Chain rule through the difference formulas: weight of each stencil node
/// in the linearised residual.
fn stencil_weights(j: &[f64; 6], hx: f64, ht: f64) -> [f64; 9] {
    let (ix2, it2) = (1.0 / (hx * hx), 1.0 / (ht * ht));
    let (ix, it) = (0.5 / hx, 0.5 / ht);
    let cross = j[5] * 0.25 / (hx * ht);
    [
        j[0] - 2.0 * j[3] * ix2 - 2.0 * j[4] * it2,
        j[1] * ix + j[3] * ix2,
        -j[1] * ix + j[3] * ix2,
        j[2] * it + j[4] * it2,
        -j[2] * it + j[4] * it2,
        cross,
        -cross,
        -cross,
        cross,
    ]
}

/// Residual vector and sparse Jacobian over the active nodes.
#[derive(Debug, Clone)]
pub struct Assembly {
    /// Grid node of each unknown.
    pub nodes: Vec<usize>,
    /// Residual per unknown; zero on boundary rows.
    pub residual: Vec<f64>,
    /// Term-magnitude scale per unknown.
    pub scale: Vec<f64>,
    pub jacobian: SparseColMat<usize, f64>,
}

impl Assembly {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Unknown numbering: active nodes in grid order.
pub(crate) fn active_numbering(field: &ScalarField) -> (Vec<usize>, Vec<usize>) {
    let d = field.domain();
    let mut index = vec![usize::MAX; d.node_count()];
    let mut nodes = Vec::new();
    for k in 0..d.node_count() {
        if d.is_active(k) {
            index[k] = nodes.len();
            nodes.push(k);
        }
    }
    (nodes, index)
}

fn check_positive(field: &ScalarField) -> Result<()> {
    for &k in field.domain().interior_nodes() {
        let g = field.value(k);
        if !(g > 0.0) {
            return Err(Error::NonPositiveLength { g });
        }
    }
    Ok(())
}

/// Residuals at interior nodes, in the order of `interior_nodes`.
pub fn interior_residuals<O: LocalOperator>(field: &ScalarField, op: &O) -> Result<Vec<f64>> {
    if op.needs_positive() {
        check_positive(field)?;
    }
    Ok(field
        .domain()
        .interior_nodes()
        .par_iter()
        .map(|&k| op.residual(&field.stencil_state(k)))
        .collect())
}

/// Builds the residual and Jacobian of the discrete problem.
pub fn assemble_with<O: LocalOperator>(field: &ScalarField, op: &O) -> Result<Assembly> {
    if op.needs_positive() {
        check_positive(field)?;
    }
    let d = field.domain();
    let (hx, ht) = d.spacing();
    let (nodes, index) = active_numbering(field);

    let rows: Vec<(f64, f64, [f64; 9])> = d
        .interior_nodes()
        .par_iter()
        .map(|&k| {
            let p = field.stencil_state(k);
            (op.residual(&p), op.scale(&p), stencil_weights(&op.jacobian(&p), hx, ht))
        })
        .collect();

    let mut residual = vec![0.0; nodes.len()];
    let mut scale = vec![0.0; nodes.len()];
    let mut triplets = Vec::with_capacity(9 * rows.len() + d.boundary_nodes().len());
    for (&k, (r, s, w)) in d.interior_nodes().iter().zip(&rows) {
        let row = index[k];
        residual[row] = *r;
        scale[row] = *s;
        for (&(di, dj), &wt) in STENCIL.iter().zip(w) {
            let m = d.neighbor(k, di, dj).expect("interior stencil stays on the grid");
            triplets.push(Triplet::new(row, index[m], wt));
        }
    }
    for &k in d.boundary_nodes() {
        let row = index[k];
        triplets.push(Triplet::new(row, row, 1.0));
    }
    debug_assert!(nodes.iter().all(|&k| d.kind(k) != NodeKind::Exterior));
    let jacobian = SparseColMat::try_new_from_triplets(nodes.len(), nodes.len(), &triplets)
        .map_err(|e| Error::SingularJacobian(format!("{e:?}")))?;
    Ok(Assembly {
        nodes,
        residual,
        scale,
        jacobian,
    })
}

/// Homotopy assembly at `(eps, s)`.
pub fn assemble(field: &ScalarField, eps: f64, s: f64) -> Result<Assembly> {
    assemble_with(field, &HomotopyOperator { eps, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::OracleSurface;
    use crate::geometry::{BoundaryData, DomainSpec};
    use std::sync::Arc;

    #[test]
    fn constant_field_in_trivial_branch() {
        let d = Arc::new(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0, 8, 8).unwrap());
        let f = ScalarField::constant(d.clone(), 0.8, BoundaryData::constant(&d, 0.8)).unwrap();
        for eps in [0.0, 0.5, 1.0] {
            let a = assemble(&f, eps, 0.25).unwrap();
            assert_eq!(a.max_residual(), 0.0);
        }
    }

    #[test]
    fn truncation_error_is_second_order() {
        let geo = OracleSurface::geodesic_plane(2.0, 1.0);
        let err = |n: usize| {
            let d = Arc::new(DomainSpec::rectangle(0.5, 1.5, 0.0, 1.0, n, n).unwrap());
            let f = ScalarField::sample_oracle(d, &geo).unwrap();
            assemble(&f, 0.0, 1.0).unwrap().max_residual()
        };
        let (e1, e2) = (err(16), err(32));
        let ratio = e1 / e2;
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn jacobian_matches_directional_difference() {
        let d = Arc::new(DomainSpec::rectangle(1.0, 2.0, 1.0, 2.0, 6, 5).unwrap());
        let f = ScalarField::sample_oracle(d.clone(), &OracleSurface::XSinhT).unwrap();
        let op = HomotopyOperator { eps: 0.3, s: 0.8 };
        let a = assemble_with(&f, &op).unwrap();
        let dir: Vec<f64> = a
            .nodes
            .iter()
            .map(|&k| if d.kind(k) == NodeKind::Interior { ((k * 7919) % 13) as f64 / 13.0 - 0.5 } else { 0.0 })
            .collect();
        let h = 1e-6;
        let shifted = |sign: f64| {
            let mut g = f.clone();
            g.set_interior(
                d.interior_nodes(),
                d.interior_nodes().iter().map(|&k| {
                    let row = a.nodes.iter().position(|&m| m == k).unwrap();
                    f.value(k) + sign * h * dir[row]
                }),
            );
            interior_residuals(&g, &op).unwrap()
        };
        let (plus, minus) = (shifted(1.0), shifted(-1.0));
        let dense = a.jacobian.to_dense();
        for (i, &k) in d.interior_nodes().iter().enumerate() {
            let row = a.nodes.iter().position(|&m| m == k).unwrap();
            let jv: f64 = (0..a.nodes.len()).map(|c| dense[(row, c)] * dir[c]).sum();
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            assert!((jv - fd).abs() <= 1e-6 * jv.abs().max(1.0), "{jv} vs {fd}");
        }
    }
}
