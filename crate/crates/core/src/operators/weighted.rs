use super::KineticOperator;
use crate::error::{domain, LabError, Result};
use crate::lattice::{Potential, Weight};

/// Ground-state substitution `u = ωv`: the form `t_ω[v] = t[ωv]` realised
/// in `L²(X, μ)` with `dμ = ω^{2κ/(κ-1)} dx`.
#[derive(Debug, Clone)]
pub struct WeightedTransform {
    pub operator: KineticOperator,
    pub weight: Weight,
    pub kappa: f64,
    /// Shift added to `T` first when it was not positive definite.
    pub epsilon: f64,
}

impl WeightedTransform {
    pub fn measure(&self) -> &[f64] {
        self.operator.measure()
    }

    /// `Ṽ = ω^{-2/(κ-1)} V`.
    pub fn map_potential(&self, v: &Potential) -> Result<Potential> {
        if v.len() != self.weight.len() {
            return Err(LabError::Length { expected: self.weight.len(), got: v.len() });
        }
        let p = -2.0 / (self.kappa - 1.0);
        Potential::new(
            v.values().iter().zip(self.weight.values()).map(|(vx, w)| vx * w.powf(p)).collect(),
        )
    }
}

pub fn weighted_transform(t: &KineticOperator, omega: &Weight, kappa: f64) -> Result<WeightedTransform> {
    if !(kappa > 1.0) {
        return Err(domain(format!("weighted transform needs kappa > 1, got {kappa}")));
    }
    if omega.len() != t.len() {
        return Err(LabError::Length { expected: t.len(), got: omega.len() });
    }
    let (base, epsilon) = if t.has_trivial_kernel() {
        (t.clone(), 0.0)
    } else {
        let eps = 1e-8 * t.lambda_max().abs().max(f64::MIN_POSITIVE);
        (t.shifted(eps), eps)
    };
    let w = omega.values();
    let mut form = base.form().clone();
    for i in 0..t.len() {
        for j in 0..t.len() {
            form[(i, j)] *= w[i] * w[j];
        }
    }
    let exponent = 2.0 * kappa / (kappa - 1.0);
    let measure: Vec<f64> = base.measure().iter().zip(w).map(|(m, wx)| m * wx.powf(exponent)).collect();
    let operator = KineticOperator::from_form(
        t.space().clone(),
        form,
        measure,
        format!("{}-weighted", t.label()),
    )?;
    Ok(WeightedTransform { operator, weight: omega.clone(), kappa, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{power_integral, Boundary, LatticeSpace};
    use crate::operators::build_laplacian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn dirichlet(n: usize) -> KineticOperator {
        build_laplacian(&Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Dirichlet, &[]).unwrap()))
    }

    fn negative_count(values: &[f64]) -> usize {
        values.iter().filter(|&&l| l < 0.0).count()
    }

    #[test]
    fn unit_weight_is_identity() {
        let t = dirichlet(6);
        let w = weighted_transform(&t, &Weight::ones(6), 1.5).unwrap();
        assert_eq!(w.epsilon, 0.0);
        assert_eq!(w.operator.form(), t.form());
        assert_eq!(w.measure(), t.measure());
    }

    #[test]
    fn potential_integral_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = dirichlet(10);
        for kappa in [1.5, 2.0, 3.7] {
            let omega = Weight::new((0..10).map(|_| rng.random_range(0.2..3.0)).collect()).unwrap();
            let v = Potential::new((0..10).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap();
            let w = weighted_transform(&t, &omega, kappa).unwrap();
            let vt = w.map_potential(&v).unwrap();
            let lhs = power_integral(vt.values(), kappa, w.measure()).unwrap();
            let rhs = power_integral(v.values(), kappa, t.measure()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn eigenvalue_count_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = dirichlet(10);
        for _ in 0..50 {
            let omega = Weight::new((0..10).map(|_| rng.random_range(0.2..3.0)).collect()).unwrap();
            let v = Potential::new((0..10).map(|_| rng.random_range(0.0..3.0)).collect()).unwrap();
            let w = weighted_transform(&t, &omega, 1.5).unwrap();
            let before = negative_count(&t.schrodinger_spectrum(&v).unwrap());
            let after = negative_count(&w.operator.schrodinger_spectrum(&w.map_potential(&v).unwrap()).unwrap());
            assert_eq!(before, after);
        }
    }

    #[test]
    fn singular_operator_gets_shifted() {
        let t = build_laplacian(&Arc::new(LatticeSpace::new(&[4], 1.0, Boundary::Periodic, &[]).unwrap()));
        let w = weighted_transform(&t, &Weight::ones(4), 2.0).unwrap();
        assert!((w.epsilon - 4e-8).abs() < 1e-20);
        assert!(w.operator.lambda_min() > 0.0);
        assert!(weighted_transform(&t, &Weight::ones(4), 1.0).is_err());
    }
}
