//! Kinetic operators on a [`LatticeSpace`] and the builders for each family.
//!
//! An operator is stored through its form matrix `A`, so that
//! `t[u] = Σ_xy ū_x A_xy u_y`, together with the measure `m` of the Hilbert
//! space it lives in. The operator itself is `M⁻¹A` with `M = diag(m)`; it is
//! self-adjoint for `⟨u, v⟩ = Σ m_x ū_x v_x` exactly when `A` is symmetric.

mod beurling_deny;
mod builders;
mod periodic;
mod weighted;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, LabError, Result};
use crate::lattice::{LatticeSpace, Potential};
use crate::linalg::{self, HermEigen, SymEigen};

pub use beurling_deny::{beurling_deny_check, BeurlingDenyReport, ConditionResult, ContractionWeight};
pub use builders::{
    build_fractional_laplacian, build_function_of_operator, build_hardy_operator,
    build_laplacian, build_magnetic_laplacian, uniform_flux_phases, HardyOperator,
};
pub use periodic::{build_periodic_schrodinger, PeriodicGroundState};
pub use weighted::{weighted_transform, WeightedTransform};

/// Tolerance below which the bottom of the spectrum counts as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KineticOperator {
    space: Arc<LatticeSpace>,
    form: DMatrix<f64>,
    measure: Vec<f64>,
    label: String,
    shift: f64,
    eigen: OnceLock<Arc<SymEigen>>,
}

fn check_measure(measure: &[f64], n: usize) -> Result<()> {
    if measure.len() != n {
        return Err(LabError::Length { expected: n, got: measure.len() });
    }
    if measure.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(domain("measure must be strictly positive"));
    }
    Ok(())
}

impl KineticOperator {
    pub fn from_form(
        space: Arc<LatticeSpace>,
        form: DMatrix<f64>,
        measure: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = space.len();
        if form.nrows() != n || form.ncols() != n {
            return Err(LabError::Length { expected: n, got: form.nrows() });
        }
        check_measure(&measure, n)?;
        if let Some(i) = form.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite { index: i });
        }
        let defect = linalg::symmetry_defect(&form);
        if defect > linalg::SYMMETRY_TOL {
            return Err(LabError::NotSymmetric { kind: "symmetric", defect });
        }
        let form = (&form + form.transpose()) * 0.5;
        Ok(Self { space, form, measure, label: label.into(), shift: 0.0, eigen: OnceLock::new() })
    }

    pub fn space(&self) -> &Arc<LatticeSpace> {
        &self.space
    }
    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// Total multiple of the identity added by [`Self::shifted`].
    pub fn shift(&self) -> f64 {
        self.shift
    }
    pub fn len(&self) -> usize {
        self.form.nrows()
    }
    pub fn is_empty(&self) -> bool {
        self.form.nrows() == 0
    }

    /// `M^{-1/2} A M^{-1/2}`, unitarily equivalent to the operator.
    pub fn symmetric_matrix(&self) -> DMatrix<f64> {
        let r: Vec<f64> = self.measure.iter().map(|m| m.sqrt().recip()).collect();
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.form[(i, j)] * r[i] * r[j])
    }

    /// `M⁻¹A`.
    pub fn operator_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.form[(i, j)] / self.measure[i])
    }

    pub fn eigen(&self) -> &SymEigen {
        self.eigen.get_or_init(|| {
            Arc::new(linalg::sym_eigen(&self.symmetric_matrix()).expect("form validated symmetric"))
        })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.eigen().values
    }
    pub fn lambda_min(&self) -> f64 {
        self.spectrum()[0]
    }
    pub fn lambda_max(&self) -> f64 {
        *self.spectrum().last().unwrap()
    }
    /// Largest absolute eigenvalue, floored at the smallest positive float.
    pub fn spectral_scale(&self) -> f64 {
        self.lambda_min().abs().max(self.lambda_max().abs()).max(f64::MIN_POSITIVE)
    }

    pub fn is_psd(&self) -> bool {
        self.lambda_min() >= -PSD_TOL
    }

    /// Positive definite beyond the relative noise floor.
    pub fn has_trivial_kernel(&self) -> bool {
        self.lambda_min() > 1e-10 * self.spectral_scale().max(1.0)
    }

    /// Eigenfunction `j` in site values, normalised in `L²(m)`.
    pub fn eigenfunction(&self, j: usize) -> Vec<f64> {
        let col = self.eigen().vectors.column(j);
        col.iter().zip(&self.measure).map(|(v, m)| v / m.sqrt()).collect()
    }

    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        self.bilinear(u, u)
    }

    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let av = &self.form * v;
        u.iter().zip(av.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let au = &self.form * DVector::from_column_slice(u);
        au.iter().zip(&self.measure).map(|(a, m)| a / m).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.measure).map(|((a, b), m)| m * a * b).sum()
    }

    /// `T + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut form = self.form.clone();
        for (i, m) in self.measure.iter().enumerate() {
            form[(i, i)] += c * m;
        }
        Self {
            space: self.space.clone(),
            form,
            measure: self.measure.clone(),
            label: self.label.clone(),
            shift: self.shift + c,
            eigen: OnceLock::new(),
        }
    }

    /// `c·T`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            space: self.space.clone(),
            form: &self.form * c,
            measure: self.measure.clone(),
            label: self.label.clone(),
            shift: self.shift * c,
            eigen: OnceLock::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Form matrix of `T - V`.
    pub fn schrodinger_form(&self, v: &Potential) -> Result<DMatrix<f64>> {
        if v.len() != self.len() {
            return Err(LabError::Length { expected: self.len(), got: v.len() });
        }
        let mut form = self.form.clone();
        for (i, (vx, m)) in v.values().iter().zip(&self.measure).enumerate() {
            form[(i, i)] -= vx * m;
        }
        Ok(form)
    }

    /// Symmetric representative of `T - V`.
    pub fn schrodinger_symmetric(&self, v: &Potential) -> Result<DMatrix<f64>> {
        let form = self.schrodinger_form(v)?;
        let r: Vec<f64> = self.measure.iter().map(|m| m.sqrt().recip()).collect();
        Ok(DMatrix::from_fn(self.len(), self.len(), |i, j| form[(i, j)] * r[i] * r[j]))
    }

    /// Spectrum of `T - V`, ascending.
    pub fn schrodinger_spectrum(&self, v: &Potential) -> Result<Vec<f64>> {
        Ok(linalg::sym_eigen(&self.schrodinger_symmetric(v)?)?.values)
    }
}

/// Lattice operator with Peierls phases; Hermitian form matrix.
#[derive(Debug, Clone)]
pub struct MagneticKineticOperator {
    space: Arc<LatticeSpace>,
    form: DMatrix<Complex64>,
    measure: Vec<f64>,
    phases: Vec<f64>,
    shift: f64,
    eigen: OnceLock<Arc<HermEigen>>,
}

impl MagneticKineticOperator {
    pub(crate) fn new(
        space: Arc<LatticeSpace>,
        form: DMatrix<Complex64>,
        phases: Vec<f64>,
    ) -> Result<Self> {
        let defect = linalg::hermitian_defect(&form);
        if defect > linalg::SYMMETRY_TOL {
            return Err(LabError::NotSymmetric { kind: "Hermitian", defect });
        }
        let measure = space.measure().to_vec();
        Ok(Self { space, form, measure, phases, shift: 0.0, eigen: OnceLock::new() })
    }

    pub fn space(&self) -> &Arc<LatticeSpace> {
        &self.space
    }
    pub fn form(&self) -> &DMatrix<Complex64> {
        &self.form
    }
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }
    /// One phase per entry of [`LatticeSpace::edges`], in `[0, 2π)`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
    pub fn shift(&self) -> f64 {
        self.shift
    }
    pub fn len(&self) -> usize {
        self.form.nrows()
    }
    pub fn is_empty(&self) -> bool {
        self.form.nrows() == 0
    }

    pub fn symmetric_matrix(&self) -> DMatrix<Complex64> {
        let r: Vec<f64> = self.measure.iter().map(|m| m.sqrt().recip()).collect();
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.form[(i, j)] * (r[i] * r[j]))
    }

    pub fn eigen(&self) -> &HermEigen {
        self.eigen.get_or_init(|| {
            Arc::new(linalg::herm_eigen(&self.symmetric_matrix()).expect("form validated Hermitian"))
        })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.eigen().values
    }
    pub fn lambda_min(&self) -> f64 {
        self.spectrum()[0]
    }

    /// `t_A[a, b] = Σ ā_x A_xy b_y`, anti-linear in the first slot.
    pub fn sesquilinear(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let bv = DVector::from_column_slice(b);
        let ab = &self.form * bv;
        a.iter().zip(ab.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn quadratic_form(&self, u: &[Complex64]) -> f64 {
        self.sesquilinear(u, u).re
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut form = self.form.clone();
        for (i, m) in self.measure.iter().enumerate() {
            form[(i, i)] += Complex64::new(c * m, 0.0);
        }
        Self {
            space: self.space.clone(),
            form,
            measure: self.measure.clone(),
            phases: self.phases.clone(),
            shift: self.shift + c,
            eigen: OnceLock::new(),
        }
    }

    /// Spectrum of `T_A - V`.
    pub fn schrodinger_spectrum(&self, v: &Potential) -> Result<Vec<f64>> {
        if v.len() != self.len() {
            return Err(LabError::Length { expected: self.len(), got: v.len() });
        }
        let mut sym = self.symmetric_matrix();
        for (i, vx) in v.values().iter().enumerate() {
            sym[(i, i)] -= Complex64::new(*vx, 0.0);
        }
        Ok(linalg::herm_eigen(&sym)?.values)
    }
}
