//! The two parameterisations `(γ, κ)` and `(q, θ)` of the Sobolev / LT
//! exponent pair, stored together and cross-checked on construction.

use serde::Serialize;

use crate::error::{domain, Result};

const RELATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSet {
    pub gamma: f64,
    pub kappa: f64,
    pub q: f64,
    pub theta: f64,
    pub gamma_tilde: Option<f64>,
    pub dim: Option<usize>,
    pub order: Option<f64>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATION_TOL * a.abs().max(b.abs()).max(1.0)
}

impl ExponentSet {
    /// `q = 2(γ+κ)/(γ+κ-1)`, `θ = κ/(γ+κ)`. Requires `γ+κ > 1`; `γ = 0`
    /// is the CLR case with `θ = 1`.
    pub fn from_gamma_kappa(gamma: f64, kappa: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(domain(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain(format!("kappa must be > 0, got {kappa}")));
        }
        let sum = gamma + kappa;
        if sum <= 1.0 {
            return Err(domain(format!("gamma + kappa must exceed 1, got {sum}")));
        }
        let set = Self {
            gamma,
            kappa,
            q: 2.0 * sum / (sum - 1.0),
            theta: kappa / sum,
            gamma_tilde: None,
            dim: None,
            order: None,
        };
        set.validate()?;
        Ok(set)
    }

    /// `γ = q(1-θ)/(q-2)`, `κ = qθ/(q-2)`.
    pub fn from_q_theta(q: f64, theta: f64) -> Result<Self> {
        if !(q > 2.0 && q.is_finite()) {
            return Err(domain(format!("q must exceed 2, got {q}")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(domain(format!("theta must lie in (0, 1], got {theta}")));
        }
        let set = Self {
            gamma: q * (1.0 - theta) / (q - 2.0),
            kappa: q * theta / (q - 2.0),
            q,
            theta,
            gamma_tilde: None,
            dim: None,
            order: None,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_gamma_tilde(mut self, gamma_tilde: f64) -> Result<Self> {
        if !(gamma_tilde > self.gamma) {
            return Err(domain(format!(
                "gamma_tilde must exceed gamma = {}, got {gamma_tilde}",
                self.gamma
            )));
        }
        self.gamma_tilde = Some(gamma_tilde);
        Ok(self)
    }

    pub fn with_dim(mut self, dim: usize, order: f64) -> Result<Self> {
        if dim == 0 || !(order > 0.0 && order <= 1.0) {
            return Err(domain(format!("need d >= 1 and s in (0, 1], got d={dim}, s={order}")));
        }
        self.dim = Some(dim);
        self.order = Some(order);
        Ok(self)
    }

    /// Checks both relation sets.
    pub fn validate(&self) -> Result<()> {
        let (g, k, q, t) = (self.gamma, self.kappa, self.q, self.theta);
        let ok = close(g, q * (1.0 - t) / (q - 2.0))
            && close(k, q * t / (q - 2.0))
            && close(q, 2.0 * (g + k) / (g + k - 1.0))
            && close(t, k / (g + k));
        if ok {
            Ok(())
        } else {
            Err(domain(format!("inconsistent exponent set {self:?}")))
        }
    }

    /// `θ = (d/s)·(1/2 − 1/q)`, the value carried by `(−Δ)^s`-type families
    /// when `κ = d/(2s)`.
    pub fn family_theta(&self, dim: usize, order: f64) -> f64 {
        dim as f64 / order * (0.5 - 1.0 / self.q)
    }

    /// Exponent set for the CLR problem at the same `κ`.
    pub fn clr(&self) -> Result<Self> {
        Self::from_gamma_kappa(0.0, self.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_one_kappa_three_halves() {
        let e = ExponentSet::from_gamma_kappa(1.0, 1.5).unwrap();
        assert!((e.q - 10.0 / 3.0).abs() < 1e-14);
        assert!((e.theta - 0.6).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair() {
        let e = ExponentSet::from_gamma_kappa(1.5, 1.5).unwrap();
        assert!((e.q - 3.0).abs() < 1e-14);
        assert!((e.theta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clr_case_has_unit_theta() {
        let e = ExponentSet::from_gamma_kappa(0.0, 1.5).unwrap();
        assert_eq!(e.theta, 1.0);
        assert!((e.q - 6.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_subcritical_sum() {
        assert!(ExponentSet::from_gamma_kappa(0.2, 0.8).is_err());
        assert!(ExponentSet::from_gamma_kappa(0.0, 1.0).is_err());
        assert!(ExponentSet::from_q_theta(2.0, 0.5).is_err());
        assert!(ExponentSet::from_q_theta(3.0, 0.0).is_err());
        let e = ExponentSet::from_gamma_kappa(1.0, 1.5).unwrap();
        assert!(e.with_gamma_tilde(1.0).is_err());
    }

    proptest! {
        #[test]
        fn q_theta_roundtrip(q in 2.01f64..40.0, theta in 0.01f64..0.99) {
            let a = ExponentSet::from_q_theta(q, theta).unwrap();
            let b = ExponentSet::from_gamma_kappa(a.gamma, a.kappa).unwrap();
            prop_assert!((b.q - q).abs() <= 1e-12 * q);
            prop_assert!((b.theta - theta).abs() <= 1e-12);
            prop_assert!(b.validate().is_ok());
        }

        #[test]
        fn laplacian_theta_matches(d in 1usize..7, gamma in 0.05f64..4.0) {
            let kappa = d as f64 / 2.0;
            prop_assume!(gamma + kappa > 1.0);
            let e = ExponentSet::from_gamma_kappa(gamma, kappa).unwrap();
            prop_assert!((e.family_theta(d, 1.0) - e.theta).abs() < 1e-12);
        }
    }
}
