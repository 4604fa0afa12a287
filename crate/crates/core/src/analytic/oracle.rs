//! Exact solutions, sub- and supersolutions with closed-form derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{residual, residual_scale, PointState};

/// A named closed-form surface `y = g(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleSurface {
    /// `g = sqrt(R^2 - |x - a|^2)`, a totally geodesic vertical plane.
    GeodesicPlane { radius: f64, center: Vec<f64> },
    /// `g = c`.
    Horocylinder { c: f64 },
    /// `g = sum_k a_k x_k + b t + c`.
    EuclideanPlane { coeffs: Vec<f64>, b: f64, c: f64 },
    /// `g = x sinh t` (`n = 2`).
    XSinhT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    Value,
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Solution,
    Subsolution,
    Supersolution,
    Indefinite,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Solution => "solution",
            Classification::Subsolution => "subsolution",
            Classification::Supersolution => "supersolution",
            Classification::Indefinite => "indefinite",
        };
        f.write_str(s)
    }
}

impl OracleSurface {
    /// Geodesic plane in `H^2 x R` centred at `x0`.
    pub fn geodesic_plane(radius: f64, x0: f64) -> Self {
        OracleSurface::GeodesicPlane {
            radius,
            center: vec![x0],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleSurface::GeodesicPlane { .. } => "geodesic-plane",
            OracleSurface::Horocylinder { .. } => "horocylinder",
            OracleSurface::EuclideanPlane { .. } => "euclidean-plane",
            OracleSurface::XSinhT => "x-sinh-t",
        }
    }

    /// Dimension `n` fixed by the parameters, if any.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            OracleSurface::GeodesicPlane { center, .. } => Some(center.len() + 1),
            OracleSurface::EuclideanPlane { coeffs, .. } => Some(coeffs.len() + 1),
            OracleSurface::XSinhT => Some(2),
            OracleSurface::Horocylinder { .. } => None,
        }
    }

    fn check_params(&self) -> Result<()> {
        let ok = match self {
            OracleSurface::GeodesicPlane { radius, center } => {
                *radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())
            }
            OracleSurface::Horocylinder { c } => *c > 0.0 && c.is_finite(),
            OracleSurface::EuclideanPlane { coeffs, b, c } => {
                coeffs.iter().chain([b, c]).all(|v| v.is_finite())
            }
            OracleSurface::XSinhT => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("bad parameters for {}", self.name())))
        }
    }

    /// The value `g` at `point = (x_1, .., x_{n-1}, t)`.
    pub fn value(&self, point: &[f64]) -> Result<f64> {
        Ok(self.evaluate(point, DerivOrder::Value)?.g)
    }

    /// Exact derivatives up to `order` (higher ones are reported as zero), with
    /// `eps = 0`.
    pub fn evaluate(&self, point: &[f64], order: DerivOrder) -> Result<PointState> {
        self.check_params()?;
        let n = point.len();
        if n < 2 || self.dimension().is_some_and(|d| d != n) {
            return Err(Error::InvalidParams(format!(
                "{} cannot be evaluated at a point of dimension {n}",
                self.name()
            )));
        }
        let t = n - 1;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let g = match self {
            OracleSurface::GeodesicPlane { radius, center } => {
                let d: Vec<f64> = point[..t].iter().zip(center).map(|(x, a)| x - a).collect();
                let rho2: f64 = d.iter().map(|v| v * v).sum();
                let g2 = radius * radius - rho2;
                if !(g2 > 0.0) {
                    return Err(Error::OutsideValidity);
                }
                let g = g2.sqrt();
                for k in 0..t {
                    grad[k] = -d[k] / g;
                    for j in 0..t {
                        let delta = if j == k { 1.0 } else { 0.0 };
                        hess[(k, j)] = -delta / g - d[k] * d[j] / (g * g * g);
                    }
                }
                g
            }
            OracleSurface::Horocylinder { c } => *c,
            OracleSurface::EuclideanPlane { coeffs, b, c } => {
                let mut g = b * point[t] + c;
                for (k, a) in coeffs.iter().enumerate() {
                    g += a * point[k];
                    grad[k] = *a;
                }
                grad[t] = *b;
                g
            }
            OracleSurface::XSinhT => {
                let (x, tt) = (point[0], point[1]);
                let (sh, ch) = (tt.sinh(), tt.cosh());
                grad[0] = sh;
                grad[1] = x * ch;
                hess[(0, 1)] = ch;
                hess[(1, 0)] = ch;
                hess[(1, 1)] = x * sh;
                x * sh
            }
        };
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::OutsideValidity);
        }
        if order == DerivOrder::Value {
            grad.fill(0.0);
        }
        if order != DerivOrder::Second {
            hess.fill(0.0);
        }
        PointState::new(g, grad, hess, 0.0)
    }

    /// Classification declared by the closed form at parameter `eps`.
    pub fn declared(&self, eps: f64) -> Classification {
        match self {
            OracleSurface::GeodesicPlane { .. } if eps > 0.0 => Classification::Supersolution,
            OracleSurface::GeodesicPlane { .. } | OracleSurface::XSinhT => Classification::Solution,
            OracleSurface::Horocylinder { .. } | OracleSurface::EuclideanPlane { .. } => {
                Classification::Subsolution
            }
        }
    }

    /// Classifies from residual signs at the samples: solution if every
    /// `|M_eps| <= tol * scale`, otherwise sub- or supersolution if the sign is
    /// one-sided, otherwise indefinite.
    pub fn classify_numerically(
        &self,
        samples: &[Vec<f64>],
        eps: f64,
        tol: f64,
    ) -> Result<Classification> {
        let mut all_zero = true;
        let mut nonneg = true;
        let mut nonpos = true;
        for point in samples {
            let p = self.evaluate(point, DerivOrder::Second)?.with_eps(eps)?;
            let r = residual(&p)?;
            let bound = tol * residual_scale(&p)?.max(1.0);
            all_zero &= r.abs() <= bound;
            nonneg &= r >= -bound;
            nonpos &= r <= bound;
        }
        Ok(if all_zero {
            Classification::Solution
        } else if nonneg {
            Classification::Subsolution
        } else if nonpos {
            Classification::Supersolution
        } else {
            Classification::Indefinite
        })
    }

    /// The surface `lambda g(x / lambda, t)`, image under `T_lambda`. A solution
    /// at `eps` maps to a solution at `eps lambda^2`, see [`rescale_eps`].
    pub fn hyperbolic_rescale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        Ok(match self {
            OracleSurface::GeodesicPlane { radius, center } => OracleSurface::GeodesicPlane {
                radius: lambda * radius,
                center: center.iter().map(|a| lambda * a).collect(),
            },
            OracleSurface::Horocylinder { c } => OracleSurface::Horocylinder { c: lambda * c },
            OracleSurface::EuclideanPlane { coeffs, b, c } => OracleSurface::EuclideanPlane {
                coeffs: coeffs.clone(),
                b: lambda * b,
                c: lambda * c,
            },
            OracleSurface::XSinhT => OracleSurface::XSinhT,
        })
    }
}

/// The parameter paired with `eps` after rescaling by `lambda`.
pub fn rescale_eps(eps: f64, lambda: f64) -> f64 {
    eps * lambda * lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geodesic_plane_derivatives() {
        let p = OracleSurface::geodesic_plane(2.0, 0.0)
            .evaluate(&[1.0, 0.3], DerivOrder::Second)
            .unwrap();
        let r3 = 3f64.sqrt();
        assert_relative_eq!(p.g, r3, epsilon = 1e-15);
        assert_relative_eq!(p.grad[0], -1.0 / r3, epsilon = 1e-15);
        assert_relative_eq!(p.hess[(0, 0)], -4.0 / (3.0 * r3), epsilon = 1e-15);
        assert_eq!(p.grad[1], 0.0);
        assert_eq!(p.hess[(1, 1)], 0.0);
        assert_eq!(p.hess[(0, 1)], 0.0);
    }

    #[test]
    fn horocylinder_and_validity() {
        let p = OracleSurface::Horocylinder { c: 0.7 }
            .evaluate(&[3.0, -2.0], DerivOrder::Second)
            .unwrap();
        assert_eq!(p.g, 0.7);
        assert_eq!(p.grad.amax(), 0.0);
        assert_eq!(p.hess.amax(), 0.0);
        assert_eq!(
            OracleSurface::XSinhT.evaluate(&[2.0, 0.0], DerivOrder::Value),
            Err(Error::OutsideValidity)
        );
        assert_eq!(
            OracleSurface::geodesic_plane(1.0, 0.0).value(&[1.0, 0.0]),
            Err(Error::OutsideValidity)
        );
    }

    #[test]
    fn derivative_order_truncates() {
        let p = OracleSurface::XSinhT
            .evaluate(&[1.5, 0.5], DerivOrder::First)
            .unwrap();
        assert_eq!(p.grad[0], 0.5f64.sinh());
        assert_eq!(p.hess.amax(), 0.0);
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(
            OracleSurface::geodesic_plane(2.0, 0.0).hyperbolic_rescale(3.0).unwrap(),
            OracleSurface::geodesic_plane(6.0, 0.0)
        );
        assert_eq!(
            OracleSurface::Horocylinder { c: 0.5 }.hyperbolic_rescale(4.0).unwrap(),
            OracleSurface::Horocylinder { c: 2.0 }
        );
        assert_eq!(
            OracleSurface::XSinhT.hyperbolic_rescale(2.5).unwrap(),
            OracleSurface::XSinhT
        );
        // lambda g(x / lambda, t) agrees with the rescaled closed form
        let base = OracleSurface::EuclideanPlane {
            coeffs: vec![0.3],
            b: 0.2,
            c: 1.0,
        };
        let lam = 2.7;
        let scaled = base.hyperbolic_rescale(lam).unwrap();
        let (x, t) = (0.4, 0.9);
        assert_relative_eq!(
            scaled.value(&[x, t]).unwrap(),
            lam * base.value(&[x / lam, t]).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn classification_examples() {
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|k| {
                let s = k as f64 / 100.0;
                vec![-0.99 + 1.98 * s, 3.0 * s - 1.0]
            })
            .collect();
        let geo = OracleSurface::geodesic_plane(2.0, 0.0);
        assert_eq!(
            geo.classify_numerically(&pts, 0.0, 1e-10).unwrap(),
            Classification::Solution
        );
        assert_eq!(
            geo.classify_numerically(&pts, 0.1, 1e-10).unwrap(),
            Classification::Supersolution
        );
        let plane = OracleSurface::EuclideanPlane {
            coeffs: vec![0.3],
            b: 0.2,
            c: 1.0,
        };
        assert_eq!(
            plane.classify_numerically(&pts, 0.5, 1e-10).unwrap(),
            Classification::Subsolution
        );
        assert_eq!(plane.declared(0.5), Classification::Subsolution);
        assert_eq!(geo.declared(0.1), Classification::Supersolution);
    }

    #[test]
    fn serde_names() {
        let json = serde_json::to_string(&OracleSurface::XSinhT).unwrap();
        assert_eq!(json, r#"{"kind":"x-sinh-t"}"#);
        let geo: OracleSurface =
            serde_json::from_str(r#"{"kind":"geodesic-plane","radius":2.0,"center":[1.0]}"#)
                .unwrap();
        assert_eq!(geo, OracleSurface::geodesic_plane(2.0, 1.0));
    }
}
