//! Global gradient bound through the change of variables
//! `g = phi(u) = c1 + int_0^u e^{-gamma s^2} ds`.

use std::f64::consts::PI;

use libm::erf;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;

use crate::error::{Error, Result};
use crate::geometry::hypothesis_factor;

/// The profile `phi(u) = c1 + int_0^u e^{-gamma s^2} ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UPhi {
    pub c1: f64,
    pub gamma: f64,
}

impl UPhi {
    pub fn value(&self, u: f64) -> f64 {
        let sg = self.gamma.sqrt();
        self.c1 + PI.sqrt() / (2.0 * sg) * erf(sg * u)
    }

    pub fn d1(&self, u: f64) -> f64 {
        (-self.gamma * u * u).exp()
    }

    pub fn d2(&self, u: f64) -> f64 {
        -2.0 * self.gamma * u * self.d1(u)
    }

    pub fn d3(&self, u: f64) -> f64 {
        (-2.0 * self.gamma + 4.0 * self.gamma * self.gamma * u * u) * self.d1(u)
    }

    /// `(-phi''' phi' + phi''^2) / phi'^2`, identically `2 gamma`.
    pub fn curvature_ratio(&self, u: f64) -> f64 {
        let (p1, p2, p3) = (self.d1(u), self.d2(u), self.d3(u));
        (-p3 * p1 + p2 * p2) / (p1 * p1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalGradientBound {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Rescaling factor applied before the bound (1 when `c1 <= 1`).
    pub lambda: f64,
    pub gamma: f64,
    /// Exact root of `int_0^u e^{-gamma s^2} ds = c2 - c1` (rescaled data).
    pub c12_root: f64,
    /// `1.1 * c12_root`.
    pub c12: f64,
    #[serde(rename = "B")]
    pub b_const: f64,
    /// Interior-maximum candidate for `|Du|`.
    pub interior: f64,
    /// Boundary-maximum candidate for `|Du|`.
    pub boundary: f64,
    #[serde(rename = "bound_C")]
    pub bound: f64,
}

impl GlobalGradientBound {
    pub fn profile(&self) -> UPhi {
        UPhi {
            c1: self.lambda * self.c1,
            gamma: self.gamma,
        }
    }
}

/// `gamma = 1 / (2 m^2)` where `m` is the midpoint of the admissible interval
/// `(sqrt(2/pi) (c2 - c1), c1)` for `1 / sqrt(2 gamma)`.
pub fn choose_gamma(c1: f64, c2: f64) -> f64 {
    let m = 0.5 * ((2.0 / PI).sqrt() * (c2 - c1) + c1);
    1.0 / (2.0 * m * m)
}

/// Smallest `u` with `int_0^u e^{-gamma s^2} ds = c2 - c1`.
pub fn c12_root(c1: f64, c2: f64, gamma: f64) -> f64 {
    let sg = gamma.sqrt();
    erf_inv(2.0 * sg * (c2 - c1) / PI.sqrt()) / sg
}

/// Bound `C(c1, c2, c3)` for `max |Dg|` of a solution with
/// `c1 <= g <= c2` and boundary gradient at most `c3`.
///
/// For `c1 > 1` the data are first rescaled by `lambda = 0.99 / c1`, and the
/// bound for `(lambda c1, lambda c2, c3)` is divided by `lambda`.
pub fn global_gradient_bound(c1: f64, c2: f64, c3: f64) -> Result<GlobalGradientBound> {
    if !(c1 > 0.0 && c2 >= c1 && c3 >= 0.0) || !c2.is_finite() || !c3.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need 0 < c1 <= c2 and c3 >= 0, got c1 = {c1}, c2 = {c2}, c3 = {c3}"
        )));
    }
    let limit = c1 * hypothesis_factor();
    if c2 >= limit {
        return Err(Error::HypothesisViolated { c1, c2, limit });
    }
    let lambda = if c1 > 1.0 { 0.99 / c1 } else { 1.0 };
    let (a1, a2) = (lambda * c1, lambda * c2);

    let gamma = choose_gamma(a1, a2);
    let root = c12_root(a1, a2, gamma);
    let c12 = 1.1 * root;
    let e1 = gamma * c12 + gamma * c12 * c12;
    let b_const = 1.0
        + ((gamma + 2.0 * gamma * c12) * a2
            + (2.0 * gamma + 4.0 * gamma * c12) * (3.0 * a2 + a2 * a2 * a2))
            * (2.0 * e1).exp();
    let interior = (4.0 * b_const / (2.0 * gamma * a1.min(1.0).powi(2) - 1.0)).sqrt();
    let boundary = c3 * e1.exp();
    Ok(GlobalGradientBound {
        c1,
        c2,
        c3,
        lambda,
        gamma,
        c12_root: root,
        c12,
        b_const,
        interior: interior / lambda,
        boundary: boundary / lambda,
        bound: interior.max(boundary) / lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Bisection on the monotone primitive, independent of `erf_inv`.
    fn bisect_root(c1: f64, c2: f64, gamma: f64) -> f64 {
        let profile = UPhi { c1, gamma };
        let (mut lo, mut hi) = (0.0, 1.0);
        while profile.value(hi) < c2 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if profile.value(mid) < c2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reference_case() {
        let b = global_gradient_bound(1.0, 1.5, 0.0).unwrap();
        assert_relative_eq!(b.gamma, 1.021_951_777_682_434_3, epsilon = 1e-14);
        assert_relative_eq!(b.c12_root, 0.552_433_958_341_331_9, epsilon = 1e-12);
        assert_relative_eq!(b.c12_root, bisect_root(1.0, 1.5, b.gamma), epsilon = 1e-12);
        assert_relative_eq!(b.c12, 0.607_677_354_175_465_1, epsilon = 1e-12);
        assert_relative_eq!(b.b_const, 288.645_483_408_629_1, max_relative = 1e-12);
        assert_relative_eq!(b.interior, 33.256_932_611_673_78, max_relative = 1e-12);
        assert_eq!(b.lambda, 1.0);
        for c3 in [1.0, 2.0] {
            let b = global_gradient_bound(1.0, 1.5, c3).unwrap();
            assert_relative_eq!(b.bound, 33.256_932_611_673_78, max_relative = 1e-12);
            assert!(b.bound >= c3);
        }
    }

    #[test]
    fn hypothesis_violation() {
        assert!(matches!(
            global_gradient_bound(1.0, 2.3, 0.0),
            Err(Error::HypothesisViolated { .. })
        ));
        let (s1, s2) = (1f64.sinh(), 2.0 * 2f64.sinh());
        assert!(matches!(
            global_gradient_bound(s1, s2, 0.0),
            Err(Error::HypothesisViolated { limit, .. }) if (limit - 2.648_097_463_827_628_6).abs() < 1e-12
        ));
    }

    #[test]
    fn rescaled_path() {
        // c1 > 1 goes through lambda = 0.99 / c1 and maps back by 1 / lambda
        let (c1, c2, c3) = (1.2, 1.5, 0.5);
        let b = global_gradient_bound(c1, c2, c3).unwrap();
        let lam = 0.99 / c1;
        assert_relative_eq!(b.lambda, lam);
        let direct = global_gradient_bound(lam * c1, lam * c2, c3).unwrap();
        assert_relative_eq!(b.bound, direct.bound / lam, max_relative = 1e-14);
    }

    #[test]
    fn profile_identities() {
        let b = global_gradient_bound(1.0, 1.5, 0.0).unwrap();
        let p = b.profile();
        assert_relative_eq!(p.value(b.c12_root), 1.5, epsilon = 1e-12);
        for k in 0..=200 {
            let u = b.c12 * k as f64 / 200.0;
            assert!(p.d1(u) > (-b.gamma * b.c12 * b.c12).exp() - 1e-15 && p.d1(u) <= 1.0);
            assert!(-p.d2(u) >= 0.0 && -p.d2(u) <= 2.0 * b.gamma * b.c12);
            assert_relative_eq!(p.curvature_ratio(u), 2.0 * b.gamma, epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn monotone_in_c3(c1 in 0.1f64..3.0, frac in 0.0f64..0.99, c3a in 0.0f64..10.0, c3b in 0.0f64..10.0) {
            let c2 = c1 * (1.0 + frac * (hypothesis_factor() - 1.0));
            let (lo, hi) = if c3a <= c3b { (c3a, c3b) } else { (c3b, c3a) };
            let a = global_gradient_bound(c1, c2, lo).unwrap();
            let b = global_gradient_bound(c1, c2, hi).unwrap();
            prop_assert!(a.bound <= b.bound);
            prop_assert!(a.bound.is_finite() && a.interior > 0.0);
            let root = bisect_root(a.lambda * c1, a.lambda * c2, a.gamma);
            prop_assert!((a.c12_root - root).abs() <= 1e-9 * root.max(1.0));
        }
    }
}
