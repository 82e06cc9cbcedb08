//! Dense eigen-decompositions with sorted, validated output.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Symmetry tolerance relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` belongs to `values[j]`.
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn symmetry_defect(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            d = d.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    d / max_abs(a).max(f64::MIN_POSITIVE)
}

pub fn hermitian_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let mut d: f64 = 0.0;
    for i in 0..n {
        d = d.max(a[(i, i)].im.abs());
        for j in (i + 1)..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d / scale.max(f64::MIN_POSITIVE)
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Full spectrum of a real symmetric matrix, ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> Result<SymEigen> {
    if a.nrows() != a.ncols() {
        return Err(LabError::Length { expected: a.nrows(), got: a.ncols() });
    }
    let defect = symmetry_defect(a);
    if defect > SYMMETRY_TOL {
        return Err(LabError::NotSymmetric { kind: "symmetric", defect });
    }
    // exact symmetrisation so the solver sees a symmetric input
    let sym = (a + a.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let order = sorted_order(e.eigenvalues.as_slice());
    let n = order.len();
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// Full spectrum of a complex Hermitian matrix, ascending.
pub fn herm_eigen(a: &DMatrix<Complex64>) -> Result<HermEigen> {
    if a.nrows() != a.ncols() {
        return Err(LabError::Length { expected: a.nrows(), got: a.ncols() });
    }
    let defect = hermitian_defect(a);
    if defect > SYMMETRY_TOL {
        return Err(LabError::NotSymmetric { kind: "Hermitian", defect });
    }
    let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let e = sym.symmetric_eigen();
    let order = sorted_order(e.eigenvalues.as_slice());
    let n = order.len();
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    Ok(HermEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(LabError::Length { expected: a.nrows(), got: a.ncols() });
    }
    let defect = symmetry_defect(a);
    if defect > SYMMETRY_TOL {
        return Err(LabError::NotSymmetric { kind: "symmetric", defect });
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Compressed sparse rows of a dense matrix, for repeated products.
#[derive(Debug, Clone)]
pub struct Csr {
    offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut offsets = vec![0];
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                if v != 0.0 {
                    columns.push(j);
                    values.push(v);
                }
            }
            offsets.push(columns.len());
        }
        Self { offsets, columns, values }
    }

    pub fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
            *o = self.columns[lo..hi].iter().zip(&self.values[lo..hi]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
                let row: f64 = self.columns[lo..hi].iter().zip(&self.values[lo..hi]).map(|(&j, v)| v * x[j]).sum();
                x[i] * row
            })
            .sum()
    }
}

impl SymEigen {
    /// `U g(Λ) Uᵀ`.
    pub fn reconstruct<F: Fn(f64) -> f64>(&self, g: F) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let gj = g(lam);
            scaled.column_mut(j).scale_mut(gj);
        }
        let mut out = DMatrix::zeros(n, n);
        out.gemm(1.0, &scaled, &self.vectors.transpose(), 0.0);
        out
    }

    /// Diagonal of `U g(Λ) Uᵀ` without forming the matrix.
    pub fn reconstruct_diagonal<F: Fn(f64) -> f64>(&self, g: F) -> Vec<f64> {
        let n = self.values.len();
        let gv: Vec<f64> = self.values.iter().map(|&l| g(l)).collect();
        (0..n)
            .map(|i| {
                let row = self.vectors.row(i);
                row.iter().zip(&gv).map(|(u, g)| u * u * g).sum()
            })
            .collect()
    }

    pub fn max_residual(&self, a: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(j);
            let r = a * v - v * lam;
            worst = worst.max(r.norm());
        }
        worst
    }
}

impl HermEigen {
    pub fn reconstruct<F: Fn(f64) -> f64>(&self, g: F) -> DMatrix<Complex64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(g(lam));
        }
        let mut out = DMatrix::zeros(n, n);
        out.gemm(Complex64::new(1.0, 0.0), &scaled, &self.vectors.adjoint(), Complex64::new(0.0, 0.0));
        out
    }

    pub fn max_residual(&self, a: &DMatrix<Complex64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(j);
            let r = a * v - v * Complex64::new(lam, 0.0);
            worst = worst.max(r.norm());
        }
        worst
    }
}

/// Max absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
