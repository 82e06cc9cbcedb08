use nalgebra::DMatrix;
use serde::Serialize;

use super::counting::{count_strictly_above, Count};
use crate::error::{domain, LabError, Result};
use crate::lattice::Potential;
use crate::linalg;
use crate::operators::KineticOperator;

/// `V^{1/2}(T+τ)^{−1}V^{1/2}`, stored through its symmetric representative
/// `(MV)^{1/2}(A+τM)^{−1}(MV)^{1/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct BirmanSchwingerOperator {
    pub tau: f64,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl BirmanSchwingerOperator {
    /// Eigenvalues strictly above one, with a tie warning at one.
    pub fn count_above_one(&self) -> Count {
        count_strictly_above(&self.eigenvalues, 1.0, 1.0)
    }
}

fn inverse_form(t: &KineticOperator, tau: f64) -> Result<DMatrix<f64>> {
    let mut a = t.form().clone();
    for (i, m) in t.measure().iter().enumerate() {
        a[(i, i)] += tau * m;
    }
    let floor = 1e-10 * t.spectral_scale().max(1.0);
    if t.lambda_min() + tau <= floor {
        return Err(LabError::Singular(format!(
            "T + τ has smallest eigenvalue {:.3e}",
            t.lambda_min() + tau
        )));
    }
    a.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| LabError::Singular("Cholesky factorisation of T + τ failed".into()))
}

pub fn birman_schwinger(t: &KineticOperator, v: &Potential, tau: f64) -> Result<BirmanSchwingerOperator> {
    if v.len() != t.len() {
        return Err(LabError::Length { expected: t.len(), got: v.len() });
    }
    if !(tau >= 0.0) {
        return Err(domain(format!("energy parameter must be nonnegative, got {tau}")));
    }
    let inv = inverse_form(t, tau)?;
    let r: Vec<f64> = v.values().iter().zip(t.measure()).map(|(v, m)| (v * m).sqrt()).collect();
    let matrix = DMatrix::from_fn(t.len(), t.len(), |i, j| r[i] * inv[(i, j)] * r[j]);
    let eigenvalues = linalg::sym_eigenvalues(&matrix)?;
    Ok(BirmanSchwingerOperator { tau, matrix, eigenvalues })
}

/// The operator of the form `t[v]` in `L²(X, V dx)`, through its symmetric
/// representative `(VM)^{−1/2} A (VM)^{−1/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct Upsilon {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

pub fn liyau_upsilon(t: &KineticOperator, v: &Potential) -> Result<Upsilon> {
    if v.len() != t.len() {
        return Err(LabError::Length { expected: t.len(), got: v.len() });
    }
    if let Some(i) = v.values().iter().position(|&x| x <= 0.0) {
        return Err(domain(format!(
            "the auxiliary operator needs V > 0 everywhere, V vanishes at site {i}; restrict the space first"
        )));
    }
    if !t.has_trivial_kernel() {
        return Err(LabError::Singular("T must be positive definite".into()));
    }
    let r: Vec<f64> = v.values().iter().zip(t.measure()).map(|(v, m)| (v * m).sqrt().recip()).collect();
    let matrix = DMatrix::from_fn(t.len(), t.len(), |i, j| r[i] * t.form()[(i, j)] * r[j]);
    let eigenvalues = linalg::sym_eigenvalues(&matrix)?;
    Ok(Upsilon { matrix, eigenvalues })
}

impl Upsilon {
    /// `Tr (2Υ)^{−1} e^{−2sΥ}`.
    pub fn trace_h1(&self, s: f64) -> f64 {
        self.eigenvalues.iter().map(|&u| (-2.0 * s * u).exp() / (2.0 * u)).sum()
    }

    /// `N(1, Υ^{−1})`: eigenvalues of `Υ` strictly below one.
    pub fn count_inverse_above_one(&self) -> Count {
        super::counting::count_strictly_below(&self.eigenvalues, 1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, LatticeSpace};
    use crate::spectra::count_below;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn op(form: DMatrix<f64>, measure: Vec<f64>) -> KineticOperator {
        let n = form.nrows();
        let s = Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Dirichlet, &[]).unwrap());
        KineticOperator::from_form(s, form, measure, "test").unwrap()
    }

    #[test]
    fn diagonal_case() {
        let t = op(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])), vec![1.0, 1.0]);
        let v = Potential::new(vec![1.5, 3.0]).unwrap();
        let bs = birman_schwinger(&t, &v, 0.0).unwrap();
        assert!((bs.eigenvalues[0] - 1.5).abs() < 1e-14 && (bs.eigenvalues[1] - 1.5).abs() < 1e-14);
        assert_eq!(bs.count_above_one().value, 2);
        let zero = birman_schwinger(&t, &Potential::zeros(2), 0.0).unwrap();
        assert!(zero.eigenvalues.iter().all(|&b| b.abs() < 1e-15));
        assert_eq!(zero.count_above_one().value, 0);
    }

    #[test]
    fn principle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 12;
            let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let form = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
            let measure: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let t = op(form, measure);
            let v = Potential::new((0..n).map(|_| rng.random_range(0.0..3.0)).collect()).unwrap();
            for tau in [0.0, 0.1, 1.0] {
                let bs = birman_schwinger(&t, &v, tau).unwrap();
                let c = bs.count_above_one();
                assert!(c.tie.is_none());
                assert_eq!(c.value, count_below(&t, &v, tau).unwrap().value);
            }
        }
    }

    #[test]
    fn upsilon_is_inverse_of_bs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10;
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let form = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
        let t = op(form, (0..n).map(|_| rng.random_range(0.5..2.0)).collect());
        let v = Potential::new((0..n).map(|_| rng.random_range(0.1..2.0)).collect()).unwrap();
        let ups = liyau_upsilon(&t, &v).unwrap();
        let bs = birman_schwinger(&t, &v, 0.0).unwrap();
        let mut inv: Vec<f64> = bs.eigenvalues.iter().map(|b| 1.0 / b).collect();
        inv.sort_by(f64::total_cmp);
        for (a, b) in ups.eigenvalues.iter().zip(&inv) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
        assert_eq!(ups.count_inverse_above_one().value, count_below(&t, &v, 0.0).unwrap().value);
    }

    #[test]
    fn upsilon_one_site_and_errors() {
        let t = op(DMatrix::from_element(1, 1, 3.0), vec![1.0]);
        let ups = liyau_upsilon(&t, &Potential::new(vec![2.0]).unwrap()).unwrap();
        assert!((ups.eigenvalues[0] - 1.5).abs() < 1e-15);
        assert!(liyau_upsilon(&t, &Potential::zeros(1)).is_err());
        let singular = op(DMatrix::zeros(1, 1), vec![1.0]);
        assert!(birman_schwinger(&singular, &Potential::zeros(1), 0.0).is_err());
    }
}
