//! Collar barriers `psi(d)` for boundary gradient bounds and the logarithmic
//! barriers `phi^{+-}` for the modulus of continuity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometricQuantities;

/// `psi(d) = (1/b) ln(1 + (e^{K b} - 1) d / delta1)` with the equality choice
/// `delta1 = (1 - e^{-K b}) / b`, so that `psi(d) = (1/b) ln(1 + b e^{K b} d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi {
    /// Steepness `b_1`.
    pub b: f64,
    /// Height `K` reached at `d = delta1`.
    pub height: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Psi {
    pub fn new(b: f64, height: f64) -> Result<Self> {
        if !(b > 0.0 && height > 0.0) || !b.is_finite() || !height.is_finite() {
            return Err(Error::InvalidParams(format!(
                "barrier needs b > 0 and K > 0, got b = {b}, K = {height}"
            )));
        }
        Ok(Psi { b, height })
    }

    /// Collar width `delta1 = (1 - e^{-K b}) / b`.
    pub fn delta1(&self) -> f64 {
        -(-self.height * self.b).exp_m1() / self.b
    }

    pub fn value(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        softplus(self.b.ln() + self.height * self.b + d.ln()) / self.b
    }

    /// `psi'(d) = 1 / (e^{-K b} + b d)`.
    pub fn deriv(&self, d: f64) -> f64 {
        1.0 / ((-self.height * self.b).exp() + self.b * d)
    }

    /// `psi'' = -b psi'^2`.
    pub fn second(&self, d: f64) -> f64 {
        let p = self.deriv(d);
        -self.b * p * p
    }

    /// Smallest `d >= 0` with `psi(d) = y`.
    pub fn inverse(&self, y: f64) -> f64 {
        (self.b * y).exp_m1() * (-self.height * self.b).exp() / self.b
    }

    /// Natural log of [`Self::inverse`], finite where the inverse underflows.
    pub fn ln_inverse(&self, y: f64) -> f64 {
        (self.b * y).exp_m1().ln() - self.height * self.b - self.b.ln()
    }

    /// `(e^{K b} - 1) / delta1 >= b e^{K b}`, evaluated in a ratio form that
    /// stays finite: both sides divided by `e^{K b}`.
    pub fn slope_condition(&self) -> bool {
        let lhs = -(-self.height * self.b).exp_m1() / self.delta1();
        lhs >= self.b * (1.0 - 1e-12)
    }
}

/// Bounds on the Euclidean minimal extension `phi` of the boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiBounds {
    pub max_phi: f64,
    pub max_grad: f64,
    pub max_hess: f64,
}

/// Constants of the collar barrier `w = phi + psi(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub n: usize,
    /// Upper bound `R(Omega, f)` for `g`.
    pub radius: f64,
    /// `min_Gamma g`.
    pub min_g: f64,
    pub phi: PhiBounds,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha: f64,
    pub b1: f64,
    pub delta1: f64,
    pub psi: Psi,
}

impl BarrierParams {
    /// Builds the constants for a barrier reaching `height` at `d = delta1`:
    ///
    /// ```text
    /// alpha1 = (2 + R^2 (n-1) + 2 (max{1,R^2} (n-2) + 1)(|Dphi|^2 + 1)) / min{1, m^2}
    /// alpha2 = (3 + 2 |Dphi|^2) / min{1, m^2}
    /// alpha  = |D^2 phi| alpha1 + max{(n-1) R, (n-2)/m} alpha2
    /// ```
    ///
    /// with `m = min_Gamma g`, and `b1 = alpha`.
    pub fn with_height(
        n: usize,
        radius: f64,
        min_g: f64,
        phi: PhiBounds,
        height: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension n = {n} < 2")));
        }
        if !(radius > 0.0 && min_g > 0.0) {
            return Err(Error::InvalidParams(format!(
                "barrier needs R > 0 and min g > 0, got R = {radius}, min g = {min_g}"
            )));
        }
        if !(phi.max_grad >= 0.0 && phi.max_hess >= 0.0) || !phi.max_phi.is_finite() {
            return Err(Error::InvalidParams("invalid extension bounds".into()));
        }
        let nf = n as f64;
        let r2 = radius * radius;
        let lower = (min_g * min_g).min(1.0);
        let dphi2 = phi.max_grad * phi.max_grad;
        let alpha1 =
            (2.0 + r2 * (nf - 1.0) + 2.0 * (r2.max(1.0) * (nf - 2.0) + 1.0) * (dphi2 + 1.0)) / lower;
        let alpha2 = (3.0 + 2.0 * dphi2) / lower;
        let alpha =
            phi.max_hess * alpha1 + ((nf - 1.0) * radius).max((nf - 2.0) / min_g) * alpha2;
        let psi = Psi::new(alpha, height)?;
        Ok(BarrierParams {
            n,
            radius,
            min_g,
            phi,
            alpha1,
            alpha2,
            alpha,
            b1: alpha,
            delta1: psi.delta1(),
            psi,
        })
    }

    /// `b1 >= alpha`.
    pub fn condition_one(&self) -> bool {
        self.b1 >= self.alpha
    }

    pub fn condition_two(&self) -> bool {
        self.psi.slope_condition()
    }

    /// Assembled boundary gradient candidate `psi'(0) (1 + max |Dphi|)`.
    pub fn gradient_candidate(&self) -> f64 {
        self.psi.deriv(0.0) * (1.0 + self.phi.max_grad)
    }
}

/// Barrier constants for planar data, height `R(Omega, f) + max phi`.
pub fn build_barrier_params(q: &GeometricQuantities, phi: PhiBounds) -> Result<BarrierParams> {
    BarrierParams::with_height(2, q.radius, q.min_f, phi, q.radius + phi.max_phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `phi^{+-}(q) = f(p) +- eps/3 +- R ln(1 + |q - p|^2) / ln(1 + delta0^2)`.
///
/// `delta0 = inf` is allowed and drops the logarithmic term.
pub fn modulus_barrier(
    f_at_p: f64,
    eps_target: f64,
    delta0: f64,
    radius: f64,
    q_minus_p_sq: f64,
    sign: Sign,
) -> Result<f64> {
    if !(eps_target > 0.0 && delta0 > 0.0 && radius > 0.0 && q_minus_p_sq >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "modulus barrier needs eps, delta0, R > 0, got {eps_target}, {delta0}, {radius}"
        )));
    }
    let ratio = q_minus_p_sq.ln_1p() / (delta0 * delta0).ln_1p();
    Ok(f_at_p + sign.factor() * (eps_target / 3.0 + radius * ratio))
}

/// The radius `delta` of the modulus of continuity and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusDelta {
    /// May underflow to 0 for steep barriers; see `ln_delta`.
    pub delta: f64,
    pub ln_delta: f64,
    pub delta0: f64,
    /// Largest radius on which the logarithmic term stays below `eps/3`.
    pub delta_phi: f64,
    pub delta1_plus: f64,
    pub delta1_minus: f64,
    /// `(psi^+)^{-1}(eps/3)`.
    pub psi_plus_reach: f64,
    /// `(psi^-)^{-1}(eps/3)`.
    pub psi_minus_reach: f64,
    pub phi_bounds: PhiBounds,
}

/// Radius `delta` such that `|q - p| < delta`, `p` on the boundary, forces
/// `|g(q) - f(p)| < eps`. The barriers `phi^{+-}` are bounded on a domain of
/// diameter `diam`, and `psi^+` (height `R`) and `psi^-` (height
/// `R + max |phi^-|`) share the constants of [`BarrierParams`].
pub fn modulus_delta(
    eps_target: f64,
    delta0: f64,
    radius: f64,
    min_f: f64,
    max_f: f64,
    diam: f64,
) -> Result<ModulusDelta> {
    if !(eps_target > 0.0 && delta0 > 0.0 && radius > 0.0 && diam > 0.0 && min_f > 0.0) {
        return Err(Error::InvalidParams("modulus radius needs positive inputs".into()));
    }
    let log0 = (delta0 * delta0).ln_1p();
    // d/drho ln(1 + rho^2) = 2 rho / (1 + rho^2) <= 1, maximal at rho = 1
    let slope = if diam >= 1.0 { 1.0 } else { 2.0 * diam / (1.0 + diam * diam) };
    let phi_bounds = PhiBounds {
        max_phi: max_f + eps_target / 3.0 + radius * (diam * diam).ln_1p() / log0,
        max_grad: radius / log0 * slope,
        max_hess: 2.0 * std::f64::consts::SQRT_2 * radius / log0,
    };
    let delta_phi = (eps_target * log0 / (3.0 * radius)).exp_m1().sqrt();
    let plus = BarrierParams::with_height(2, radius, min_f, phi_bounds, radius)?;
    let lowest = min_f - eps_target / 3.0 - radius * (diam * diam).ln_1p() / log0;
    let max_abs_minus = (max_f - eps_target / 3.0).abs().max(lowest.abs());
    let minus = BarrierParams::with_height(2, radius, min_f, phi_bounds, radius + max_abs_minus)?;
    let psi_plus_reach = plus.psi.inverse(eps_target / 3.0);
    let psi_minus_reach = minus.psi.inverse(eps_target / 3.0);
    let delta = [
        delta0,
        delta_phi,
        plus.delta1,
        minus.delta1,
        psi_plus_reach,
        psi_minus_reach,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let ln_delta = [
        delta0.ln(),
        delta_phi.ln(),
        plus.delta1.ln(),
        minus.delta1.ln(),
        plus.psi.ln_inverse(eps_target / 3.0),
        minus.psi.ln_inverse(eps_target / 3.0),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(ModulusDelta {
        delta,
        ln_delta,
        delta0,
        delta_phi,
        delta1_plus: plus.delta1,
        delta1_minus: minus.delta1,
        psi_plus_reach,
        psi_minus_reach,
        phi_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn psi_endpoints() {
        let psi = Psi::new(3.0, 1.7).unwrap();
        assert_eq!(psi.value(0.0), 0.0);
        let d1 = psi.delta1();
        assert_relative_eq!(psi.value(d1), 1.7, epsilon = 1e-14);
        assert_relative_eq!(psi.deriv(d1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(psi.inverse(psi.value(0.3 * d1)), 0.3 * d1, epsilon = 1e-14);
        assert!(psi.slope_condition());
        assert_relative_eq!(psi.ln_inverse(0.2), psi.inverse(0.2).ln(), epsilon = 1e-13);
    }

    #[test]
    fn psi_with_unit_exponent() {
        // K b = 1: delta1 = (1 - 1/e) / b
        let b = 2.5;
        let psi = Psi::new(b, 1.0 / b).unwrap();
        assert_relative_eq!(psi.delta1(), (1.0 - (-1f64).exp()) / b, epsilon = 1e-15);
        for k in 0..=100 {
            assert!(psi.deriv(psi.delta1() * k as f64 / 100.0) >= 1.0 - 1e-15);
        }
        // against the defining expression
        let d = 0.37 * psi.delta1();
        let direct = (1.0 + (1f64.exp() - 1.0) / psi.delta1() * d).ln() / b;
        assert_relative_eq!(psi.value(d), direct, epsilon = 1e-14);
    }

    #[test]
    fn psi_survives_large_exponents() {
        let psi = Psi::new(400.0, 5.0).unwrap();
        let d1 = psi.delta1();
        assert_relative_eq!(psi.value(d1), 5.0, epsilon = 1e-12);
        assert!(psi.value(0.5 * d1).is_finite());
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(modulus_barrier(1.0, 0.3, 0.5, 2.0, 0.0, Sign::Plus).unwrap(), 1.1);
        assert_relative_eq!(
            modulus_barrier(1.0, 0.3, 0.5, 2.0, 0.25, Sign::Minus).unwrap(),
            1.0 - 0.1 - 2.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            modulus_barrier(1.0, 0.3, 0.5, 2.0, 0.04, Sign::Plus).unwrap(),
            1.451_528_985_913_237_3,
            epsilon = 1e-14
        );
        assert_eq!(
            modulus_barrier(1.0, 0.3, f64::INFINITY, 2.0, 0.04, Sign::Plus).unwrap(),
            1.0 + 0.1
        );
        assert!(modulus_barrier(1.0, 0.0, 0.5, 2.0, 0.0, Sign::Plus).is_err());
    }

    #[test]
    fn barrier_params_unit_data() {
        let q = GeometricQuantities::from_parts(1.0, 0.5, 1.0, 1.0);
        let phi = PhiBounds {
            max_phi: 1.0,
            max_grad: 0.0,
            max_hess: 0.0,
        };
        let bp = build_barrier_params(&q, phi).unwrap();
        assert_relative_eq!(bp.alpha2, 3.0);
        assert_relative_eq!(bp.alpha, q.radius * 3.0, epsilon = 1e-15);
        assert!(bp.condition_one() && bp.condition_two());
        assert_relative_eq!(bp.psi.value(bp.delta1), q.radius + 1.0, epsilon = 1e-13);
        assert!(build_barrier_params(&GeometricQuantities::from_parts(1.0, 0.0, 0.0, 1.0), phi).is_err());
    }

    #[test]
    fn modulus_delta_is_positive() {
        let m = modulus_delta(0.3, 0.5, 2.0, 1.0, 1.5, 1.4).unwrap();
        assert!(m.delta >= 0.0 && m.delta <= m.delta0);
        assert!(m.ln_delta.is_finite() && m.ln_delta < m.delta0.ln());
        assert_relative_eq!(m.delta, m.ln_delta.exp());
        let inf = modulus_delta(0.3, f64::INFINITY, 2.0, 1.0, 1.0, 1.4).unwrap();
        assert!(inf.ln_delta.is_finite());
        assert_eq!(inf.phi_bounds.max_grad, 0.0);
    }

    proptest! {
        #[test]
        fn psi_slope_at_least_one(
            radius in 0.1f64..10.0,
            min_g in 0.05f64..5.0,
            max_phi in 0.05f64..5.0,
            grad in 0.0f64..5.0,
            hess in 0.0f64..5.0,
            frac in 0.0f64..=1.0,
        ) {
            let phi = PhiBounds { max_phi, max_grad: grad, max_hess: hess };
            let bp = BarrierParams::with_height(2, radius, min_g, phi, radius + max_phi).unwrap();
            prop_assert!(bp.condition_one() && bp.condition_two());
            prop_assert!(bp.delta1 > 0.0);
            prop_assert!(bp.psi.deriv(frac * bp.delta1) >= 1.0 - 1e-12);
            prop_assert!(bp.psi.second(frac * bp.delta1) < 0.0);
        }
    }
}
