use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{build_laplacian, KineticOperator};
use crate::error::{domain, LabError, Result};
use crate::lattice::{Boundary, LatticeSpace, Weight};

const MAX_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-12;

/// `-Δ + W` on a torus with its bottom energy `E` and positive ground state.
#[derive(Debug, Clone)]
pub struct PeriodicGroundState {
    pub potential: Vec<f64>,
    pub energy: f64,
    /// Normalised to `max ω = 1`.
    pub ground_state: Weight,
    pub laplacian: KineticOperator,
    pub hamiltonian: KineticOperator,
    /// `-Δ + W - E`, nonnegative with `ω` in its kernel.
    pub shifted: KineticOperator,
    pub iterations: usize,
    pub residual: f64,
}

/// Ground state by shifted inverse iteration from the all-ones vector. The
/// shift sits just below the dense-solver estimate of `E`.
pub fn build_periodic_schrodinger(space: &Arc<LatticeSpace>, w: &[f64]) -> Result<PeriodicGroundState> {
    if space.boundary() != Boundary::Periodic {
        return Err(domain("periodic Schrödinger operator needs a periodic lattice"));
    }
    if w.len() != space.len() {
        return Err(LabError::Length { expected: space.len(), got: w.len() });
    }
    if let Some(index) = w.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { index });
    }
    let laplacian = build_laplacian(space);
    let mut form = laplacian.form().clone();
    for (x, (wx, m)) in w.iter().zip(space.measure()).enumerate() {
        form[(x, x)] += wx * m;
    }
    let hamiltonian =
        KineticOperator::from_form(space.clone(), form, space.measure().to_vec(), "periodic")?;

    let n = space.len();
    let sym = hamiltonian.symmetric_matrix();
    let spectrum = hamiltonian.spectrum();
    let scale = hamiltonian.spectral_scale().max(1.0);
    let gap = if n > 1 { spectrum[1] - spectrum[0] } else { scale };
    let sigma = spectrum[0] - 1e-3 * gap.max(1e-8 * scale);
    let lu = (&sym - DMatrix::identity(n, n) * sigma).lu();

    let root: Vec<f64> = space.measure().iter().map(|m| m.sqrt()).collect();
    let mut x = DVector::from_iterator(n, root.iter().copied());
    x /= x.norm();
    let mut energy = x.dot(&(&sym * &x));
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let y = lu
            .solve(&x)
            .ok_or_else(|| LabError::Singular("inverse iteration shift hit the spectrum".into()))?;
        x = &y / y.norm();
        let bx = &sym * &x;
        energy = x.dot(&bx);
        residual = (&bx - &x * energy).norm();
        if residual <= RESIDUAL_TOL * scale {
            break;
        }
    }

    if x.sum() < 0.0 {
        x = -x;
    }
    let raw: Vec<f64> = x.iter().zip(&root).map(|(v, r)| v / r).collect();
    let top = raw.iter().copied().fold(f64::MIN, f64::max);
    let omega: Vec<f64> = raw.iter().map(|v| v / top).collect();
    if omega.iter().any(|&v| v <= 0.0) {
        return Err(domain("ground state is not strictly positive; is the lattice connected?"));
    }
    let shifted = hamiltonian.shifted(-energy).with_label("periodic-shifted");
    Ok(PeriodicGroundState {
        potential: w.to_vec(),
        energy,
        ground_state: Weight::new(omega)?,
        laplacian,
        hamiltonian,
        shifted,
        iterations,
        residual,
    })
}

impl PeriodicGroundState {
    /// `‖(T_W - E)ω‖_∞`.
    pub fn ground_residual(&self) -> f64 {
        self.shifted
            .apply(self.ground_state.values())
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    fn ring(n: usize) -> Arc<LatticeSpace> {
        Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Periodic, &[]).unwrap())
    }

    #[test]
    fn constant_potential() {
        let g = build_periodic_schrodinger(&ring(6), &[0.7; 6]).unwrap();
        assert!((g.energy - 0.7).abs() < 1e-12);
        assert!(g.ground_state.values().iter().all(|&w| (w - 1.0).abs() < 1e-10));
    }

    #[test]
    fn alternating_potential_matches_direct_solve() {
        let g = build_periodic_schrodinger(&ring(4), &[0.0, 1.0, 0.0, 1.0]).unwrap();
        let direct = sym_eigen(g.hamiltonian.form()).unwrap();
        assert!((g.energy - direct.values[0]).abs() < 1e-12);
        assert!(g.ground_state.values().iter().all(|&w| w > 0.0));
        assert!(g.ground_residual() < 1e-10);
        assert!(g.shifted.is_psd());
    }

    #[test]
    fn two_dimensional_torus() {
        let s = Arc::new(LatticeSpace::new(&[4, 4], 0.5, Boundary::Periodic, &[]).unwrap());
        let w: Vec<f64> = (0..16).map(|i| (i as f64 * 0.9).sin() + 1.0).collect();
        let g = build_periodic_schrodinger(&s, &w).unwrap();
        assert!(g.ground_residual() < 1e-10);
        assert!((g.energy - g.hamiltonian.lambda_min()).abs() < 1e-10);
    }

    #[test]
    fn rejects_dirichlet() {
        let s = Arc::new(LatticeSpace::new(&[4], 1.0, Boundary::Dirichlet, &[]).unwrap());
        assert!(build_periodic_schrodinger(&s, &[0.0; 4]).is_err());
    }
}
