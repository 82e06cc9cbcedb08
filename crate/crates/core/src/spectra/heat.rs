use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::operators::{KineticOperator, MagneticKineticOperator};

fn check_time(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("heat time must be positive, got {s}")));
    }
    Ok(())
}

/// `k(x, y, s)`, the density of `e^{−sT}` against the measure:
/// `(e^{−sT}u)(x) = Σ_y k(x, y, s) u_y m_y`.
pub fn heat_kernel(t: &KineticOperator, s: f64) -> Result<DMatrix<f64>> {
    check_time(s)?;
    let e = t.eigen();
    let sym = e.reconstruct(|l| (-s * l).exp());
    let r: Vec<f64> = t.measure().iter().map(|m| m.sqrt().recip()).collect();
    Ok(DMatrix::from_fn(t.len(), t.len(), |i, j| sym[(i, j)] * r[i] * r[j]))
}

/// Diagonal `k(x, x, s)`.
pub fn heat_kernel_diagonal(t: &KineticOperator, s: f64) -> Result<Vec<f64>> {
    check_time(s)?;
    let d = t.eigen().reconstruct_diagonal(|l| (-s * l).exp());
    Ok(d.iter().zip(t.measure()).map(|(k, m)| k / m).collect())
}

/// Matrix of `e^{−sT}` acting on site values, `k(x, y, s) m_y`.
pub fn semigroup_matrix(t: &KineticOperator, s: f64) -> DMatrix<f64> {
    let sym = t.eigen().reconstruct(|l| (-s * l).exp());
    let m = t.measure();
    DMatrix::from_fn(t.len(), t.len(), |i, j| sym[(i, j)] * (m[j] / m[i]).sqrt())
}

pub fn magnetic_heat_kernel(t: &MagneticKineticOperator, s: f64) -> Result<DMatrix<Complex64>> {
    check_time(s)?;
    let sym = t.eigen().reconstruct(|l| (-s * l).exp());
    let r: Vec<f64> = t.measure().iter().map(|m| m.sqrt().recip()).collect();
    Ok(DMatrix::from_fn(t.len(), t.len(), |i, j| sym[(i, j)] * (r[i] * r[j])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatNorms {
    pub one_to_inf: f64,
    pub one_to_two: f64,
}

/// `‖e^{−sT}‖_{1→∞} = max |k(x,y,s)|` and `‖e^{−sT}‖_{1→2}`, the largest
/// `L²` norm of `e^{−sT}(δ_y/m_y)`. The kernel is positive definite, so the
/// first is the largest diagonal entry and the second is the square root of
/// the largest diagonal entry at time `2s`.
pub fn heat_norms(t: &KineticOperator, s: f64) -> Result<HeatNorms> {
    let one = heat_kernel_diagonal(t, s)?;
    let two = heat_kernel_diagonal(t, 2.0 * s)?;
    Ok(HeatNorms {
        one_to_inf: one.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        one_to_two: two.iter().copied().fold(f64::NEG_INFINITY, f64::max).sqrt(),
    })
}
