//! Pointwise kernels of the ε-horizontal minimal operator.
//!
//! A horizontal graph `y = g(x_1, .., x_{n-1}, t)` in `H^n x R` (upper
//! half-space model, `y > 0`) is minimal iff `M_0(g) = 0`, where
//!
//! ```text
//! M_eps(g) = sum_ij a_ij(g, Dg) g_ij + (n-1) g (1 + sum_k g_k^2) + (n-2) g_t^2 / g
//! ```
//!
//! with `a_kk = g^2 (1 + sum_{m != k} g_m^2) + g_t^2 + eps/(n-1)`,
//! `a_nn = 1 + sum_k g_k^2`, `a_kn = -g_k g_t` and `a_jk = -g^2 g_j g_k`.
//! Derivatives are ordered `(x_1, .., x_{n-1}, t)`; index `n-1` is `t`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pointwise data `(g, Dg, D^2 g, eps)` for the operator kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointState {
    pub g: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub eps: f64,
}

impl PointState {
    /// Builds a state for `n = grad.len() >= 2`.
    ///
    /// `eps` may exceed 1: rescaling a state by `lambda` maps `eps` to
    /// `eps lambda^2`, and the kernels are well defined for any `eps >= 0`.
    pub fn new(g: f64, grad: DVector<f64>, hess: DMatrix<f64>, eps: f64) -> Result<Self> {
        let n = grad.len();
        if n < 2 {
            return Err(Error::InvalidState(format!("dimension n = {n} < 2")));
        }
        if hess.nrows() != n || hess.ncols() != n {
            return Err(Error::InvalidState("hessian shape mismatch".into()));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidState(format!("eps = {eps} must be >= 0")));
        }
        if !g.is_finite() || grad.iter().chain(hess.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let scale = hess.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (hess[(i, j)] - hess[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidState("hessian not symmetric".into()));
                }
            }
        }
        Ok(PointState { g, grad, hess, eps })
    }

    /// The `n = 2` state with derivatives of `g(x, t)`.
    pub fn planar(g: f64, gx: f64, gt: f64, gxx: f64, gtt: f64, gxt: f64, eps: f64) -> Result<Self> {
        Self::new(
            g,
            DVector::from_vec(vec![gx, gt]),
            DMatrix::from_row_slice(2, 2, &[gxx, gxt, gxt, gtt]),
            eps,
        )
    }

    pub fn n(&self) -> usize {
        self.grad.len()
    }

    /// `g_t`.
    pub fn gt(&self) -> f64 {
        self.grad[self.n() - 1]
    }

    /// `sum_k g_{x_k}^2` over the horizontal directions.
    pub fn horizontal_grad_sq(&self) -> f64 {
        let n = self.n();
        self.grad.rows(0, n - 1).norm_squared()
    }

    /// Same state with a different `eps`.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.g, self.grad.clone(), self.hess.clone(), eps)
    }

    /// State of `g_lambda(x, t) = lambda g(x / lambda, t)` at the image point:
    /// `g -> lambda g`, `g_k` fixed, `g_t -> lambda g_t`, `g_kj -> g_kj / lambda`,
    /// `g_kt` fixed, `g_tt -> lambda g_tt`, `eps -> eps lambda^2`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        let n = self.n();
        let t = n - 1;
        let mut grad = self.grad.clone();
        grad[t] *= lambda;
        let mut hess = self.hess.clone();
        for i in 0..n {
            for j in 0..n {
                match (i == t, j == t) {
                    (true, true) => hess[(i, j)] *= lambda,
                    (false, false) => hess[(i, j)] /= lambda,
                    _ => {}
                }
            }
        }
        Self::new(lambda * self.g, grad, hess, self.eps * lambda * lambda)
    }

    fn positive_g(&self) -> Result<f64> {
        if self.g > 0.0 {
            Ok(self.g)
        } else {
            Err(Error::NonPositiveLength { g: self.g })
        }
    }

    fn planar_view(&self) -> Planar {
        Planar {
            g: self.g,
            gx: self.grad[0],
            gt: self.grad[1],
            gxx: self.hess[(0, 0)],
            gtt: self.hess[(1, 1)],
            gxt: self.hess[(0, 1)],
        }
    }
}

/// Homotopy weight of the zeroth-order block: 0 for `s <= 1/2`, `2s - 1` above.
pub fn ell(s: f64) -> f64 {
    if s <= 0.5 {
        0.0
    } else {
        2.0 * s - 1.0
    }
}

/// The six arguments of the `n = 2` operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Planar {
    pub g: f64,
    pub gx: f64,
    pub gt: f64,
    pub gxx: f64,
    pub gtt: f64,
    pub gxt: f64,
}

/// `g_xx (g^2 + g_t^2 + eps) + g_tt (1 + g_x^2) - 2 g_x g_t g_xt + l g (1 + g_x^2)`.
#[inline]
pub fn planar_residual(p: &Planar, eps: f64, l: f64) -> f64 {
    let gx2 = 1.0 + p.gx * p.gx;
    p.gxx * (p.g * p.g + p.gt * p.gt + eps) + p.gtt * gx2 - 2.0 * p.gx * p.gt * p.gxt
        + l * p.g * gx2
}

/// Partials of [`planar_residual`] with respect to
/// `[g, g_x, g_t, g_xx, g_tt, g_xt]`.
#[inline]
pub fn planar_jacobian(p: &Planar, eps: f64, l: f64) -> [f64; 6] {
    [
        2.0 * p.g * p.gxx + l * (1.0 + p.gx * p.gx),
        2.0 * p.gx * p.gtt - 2.0 * p.gt * p.gxt + 2.0 * l * p.g * p.gx,
        2.0 * p.gt * p.gxx - 2.0 * p.gx * p.gxt,
        p.g * p.g + p.gt * p.gt + eps,
        1.0 + p.gx * p.gx,
        -2.0 * p.gx * p.gt,
    ]
}

/// Sum of absolute values of the terms of the planar residual, used to scale
/// tolerances.
pub fn planar_scale(p: &Planar, eps: f64, l: f64) -> f64 {
    let gx2 = 1.0 + p.gx * p.gx;
    (p.gxx * (p.g * p.g + p.gt * p.gt + eps)).abs()
        + (p.gtt * gx2).abs()
        + (2.0 * p.gx * p.gt * p.gxt).abs()
        + (l * p.g * gx2).abs()
}

fn zeroth_order(p: &PointState) -> f64 {
    let n = p.n() as f64;
    let gt = p.gt();
    (n - 1.0) * p.g * (1.0 + p.horizontal_grad_sq()) + (n - 2.0) * gt * gt / p.g
}

fn coefficient_entries(p: &PointState, eps: f64) -> DMatrix<f64> {
    let n = p.n();
    let t = n - 1;
    let g2 = p.g * p.g;
    let gt = p.gt();
    let s = p.horizontal_grad_sq();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..t {
        let gk = p.grad[k];
        a[(k, k)] = g2 * (1.0 + s - gk * gk) + gt * gt + eps / (n - 1) as f64;
        a[(k, t)] = -gk * gt;
        a[(t, k)] = -gk * gt;
        for j in 0..k {
            let v = -g2 * p.grad[j] * gk;
            a[(j, k)] = v;
            a[(k, j)] = v;
        }
    }
    a[(t, t)] = 1.0 + s;
    a
}

fn general_residual(p: &PointState, l: f64) -> f64 {
    let a = coefficient_entries(p, p.eps);
    a.component_mul(&p.hess).sum() + l * zeroth_order(p)
}

/// `M_eps(g)`.
pub fn residual(p: &PointState) -> Result<f64> {
    homotopy_residual(p, 1.0)
}

/// The homotopy residual with the zeroth-order block weighted by `ell(s)`.
pub fn homotopy_residual(p: &PointState, s: f64) -> Result<f64> {
    p.positive_g()?;
    let l = ell(s);
    Ok(if p.n() == 2 {
        planar_residual(&p.planar_view(), p.eps, l)
    } else {
        general_residual(p, l)
    })
}

/// The general-`n` expression, kept separate so the planar fast path can be
/// checked against it.
pub fn residual_general(p: &PointState) -> Result<f64> {
    p.positive_g()?;
    Ok(general_residual(p, 1.0))
}

/// Sum of absolute values of the individual terms of `M_eps(g)`.
pub fn residual_scale(p: &PointState) -> Result<f64> {
    p.positive_g()?;
    let a = coefficient_entries(p, p.eps);
    Ok(a.component_mul(&p.hess).abs().sum() + zeroth_order(p).abs())
}

/// Coefficient matrix with its ellipticity bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub a: DMatrix<f64>,
    /// `min{1, g^2}`.
    pub lower_bound: f64,
    /// `2 + g^2 (n-1) + (max{1, g^2} (n-2) + 1) |Dg|^2`.
    pub upper_bound: f64,
}

pub fn coefficients(p: &PointState) -> Result<CoefficientMatrix> {
    let g = p.positive_g()?;
    let n = p.n() as f64;
    let g2 = g * g;
    let dg2 = p.grad.norm_squared();
    Ok(CoefficientMatrix {
        a: coefficient_entries(p, p.eps),
        lower_bound: g2.min(1.0),
        upper_bound: 2.0 + g2 * (n - 1.0) + (g2.max(1.0) * (n - 2.0) + 1.0) * dg2,
    })
}

/// `W = g^2 (1 + sum_k g_k^2) + g_t^2`.
pub fn w_factor(p: &PointState) -> f64 {
    let gt = p.gt();
    p.g * p.g * (1.0 + p.horizontal_grad_sq()) + gt * gt
}

/// Mean curvature `H = g^2 M_0(g) / (n W^{3/2})`. The `eps` field is ignored.
pub fn mean_curvature(p: &PointState) -> Result<f64> {
    let g = p.positive_g()?;
    let m = general_residual(&p.with_eps(0.0)?, 1.0);
    let w = w_factor(p);
    Ok(g * g * m / (p.n() as f64 * w.powf(1.5)))
}

/// First and second fundamental forms and the unit normal of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGeometry {
    pub first_form: DMatrix<f64>,
    /// From the closed form `g^{ij} = a_ij(eps = 0) g^2 / W`.
    pub first_form_inverse: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    /// Components `(x_1, .., x_{n-1}, y, t)`:
    /// `(-g^2 g_1, .., -g^2 g_{n-1}, g^2, -g_t) / sqrt(W)`.
    pub normal: DVector<f64>,
    pub w: f64,
}

impl SurfaceGeometry {
    /// Max-entry deviation of `first_form * first_form_inverse` from the identity.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.first_form.nrows();
        (&self.first_form * &self.first_form_inverse - DMatrix::identity(n, n)).amax()
    }

    /// Max-entry relative difference between the closed-form inverse and a
    /// numeric inversion of the first form.
    pub fn inverse_mismatch(&self) -> Option<f64> {
        let numeric = self.first_form.clone().try_inverse()?;
        let scale = numeric.amax().max(f64::MIN_POSITIVE);
        Some((&numeric - &self.first_form_inverse).amax() / scale)
    }

    /// Length of the normal in the product metric `(|dx|^2 + dy^2) / y^2 + dt^2`
    /// at height `y = g`. Equals 1.
    pub fn normal_metric_norm(&self, g: f64) -> f64 {
        let n = self.normal.len();
        let spatial = self.normal.rows(0, n - 1).norm_squared();
        (spatial / (g * g) + self.normal[n - 1] * self.normal[n - 1]).sqrt()
    }
}

pub fn surface_geometry(p: &PointState) -> Result<SurfaceGeometry> {
    let g = p.positive_g()?;
    let n = p.n();
    let t = n - 1;
    let g2 = g * g;
    let gt = p.gt();
    let w = w_factor(p);
    let sw = w.sqrt();

    let mut first = DMatrix::zeros(n, n);
    let mut second = DMatrix::zeros(n, n);
    for k in 0..t {
        let gk = p.grad[k];
        first[(k, k)] = (1.0 + gk * gk) / g2;
        second[(k, k)] = (1.0 / g + p.hess[(k, k)] + gk * gk / g) / sw;
        for j in 0..k {
            let gj = p.grad[j];
            first[(j, k)] = gj * gk / g2;
            first[(k, j)] = gj * gk / g2;
            let b = (p.hess[(j, k)] + gj * gk / g) / sw;
            second[(j, k)] = b;
            second[(k, j)] = b;
        }
        first[(k, t)] = gk * gt / g2;
        first[(t, k)] = gk * gt / g2;
        second[(k, t)] = p.hess[(k, t)] / sw;
        second[(t, k)] = p.hess[(k, t)] / sw;
    }
    first[(t, t)] = (g2 + gt * gt) / g2;
    second[(t, t)] = (p.hess[(t, t)] - gt * gt / g) / sw;

    let inverse = coefficient_entries(p, 0.0) * (g2 / w);

    let mut normal = DVector::zeros(n + 1);
    for k in 0..t {
        normal[k] = -p.grad[k] * g2 / sw;
    }
    normal[t] = g2 / sw;
    normal[n] = -gt / sw;

    Ok(SurfaceGeometry {
        first_form: first,
        first_form_inverse: inverse,
        second_form: second,
        normal,
        w,
    })
}

/// Partials of the planar homotopy residual, ordered as in [`planar_jacobian`].
pub fn residual_jacobian(p: &PointState, s: f64) -> Result<[f64; 6]> {
    p.positive_g()?;
    if p.n() != 2 {
        return Err(Error::InvalidState(
            "the residual jacobian is only available for n = 2".into(),
        ));
    }
    Ok(planar_jacobian(&p.planar_view(), p.eps, ell(s)))
}
