use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::Potential;
use crate::linalg;
use crate::operators::{KineticOperator, MagneticKineticOperator};
use crate::quad::adaptive_simpson;

/// Relative distance below which an eigenvalue counts as tied with a threshold.
pub const TIE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieWarning {
    pub threshold: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Count {
    pub value: usize,
    pub tie: Option<TieWarning>,
}

/// Number of `values` strictly below `threshold`, flagging any value within
/// `TIE_GUARD·scale` of it.
pub fn count_strictly_below(values: &[f64], threshold: f64, scale: f64) -> Count {
    let value = values.iter().filter(|&&l| l < threshold).count();
    let distance = values.iter().map(|l| (l - threshold).abs()).fold(f64::INFINITY, f64::min);
    let tie = (distance <= TIE_GUARD * scale).then_some(TieWarning { threshold, distance });
    Count { value, tie }
}

/// Number of `values` strictly above `threshold`.
pub fn count_strictly_above(values: &[f64], threshold: f64, scale: f64) -> Count {
    let value = values.iter().filter(|&&l| l > threshold).count();
    let distance = values.iter().map(|l| (l - threshold).abs()).fold(f64::INFINITY, f64::min);
    let tie = (distance <= TIE_GUARD * scale).then_some(TieWarning { threshold, distance });
    Count { value, tie }
}

pub fn spectral_scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE)
}

/// `N(−τ)` from an ascending spectrum.
pub fn count_from_spectrum(values: &[f64], tau: f64) -> Count {
    count_strictly_below(values, -tau, spectral_scale(values).max(tau))
}

/// `Σ |λ|^γ` over negative eigenvalues; `γ = 0` gives the count.
pub fn riesz_from_spectrum(values: &[f64], gamma: f64) -> f64 {
    if gamma == 0.0 {
        return count_from_spectrum(values, 0.0).value as f64;
    }
    values.iter().filter(|&&l| l < 0.0).map(|l| (-l).powf(gamma)).sum()
}

/// `γ̃ ∫₀^∞ N(−τ) τ^{γ̃−1} dτ` by quadrature on the pieces where `N` is constant.
pub fn moment_representation(values: &[f64], gamma_tilde: f64) -> f64 {
    let mut cuts: Vec<f64> = values.iter().filter(|&&l| l < 0.0).map(|l| -l).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let scale = cuts.last().copied().unwrap_or(0.0);
    if scale == 0.0 {
        return 0.0;
    }
    // τ = σ^p keeps the integrand smooth at the origin when γ̃ < 1
    let p = if gamma_tilde < 1.0 { 2.0 / gamma_tilde } else { 1.0 };
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().copied());
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // N is constant on (lo, hi): count of eigenvalues below −hi plus those at −hi
        let mid = 0.5 * (lo + hi);
        let n = values.iter().filter(|&&l| l < -mid).count() as f64;
        if n == 0.0 {
            continue;
        }
        let f = |sigma: f64| gamma_tilde * p * sigma.powf(p * gamma_tilde - 1.0);
        let piece = adaptive_simpson(f, lo.powf(1.0 / p), hi.powf(1.0 / p), 1e-13 * scale.powf(gamma_tilde));
        total += n * piece;
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub counts: Vec<(f64, usize)>,
    pub riesz_means: Vec<(f64, f64)>,
    pub tie_warnings: Vec<TieWarning>,
    pub max_residual: f64,
}

impl SpectralReport {
    pub fn from_spectrum(values: Vec<f64>, taus: &[f64], gammas: &[f64], max_residual: f64) -> Self {
        let mut tie_warnings = Vec::new();
        let counts = taus
            .iter()
            .map(|&tau| {
                let c = count_from_spectrum(&values, tau);
                tie_warnings.extend(c.tie);
                (tau, c.value)
            })
            .collect();
        let riesz_means = gammas.iter().map(|&g| (g, riesz_from_spectrum(&values, g))).collect();
        Self { eigenvalues: values, counts, riesz_means, tie_warnings, max_residual }
    }
}

/// Full spectrum of a real operator with the residual `max ‖Tv − λv‖`.
pub fn eigen_sym(t: &KineticOperator) -> SpectralReport {
    let sym = t.symmetric_matrix();
    let e = t.eigen();
    SpectralReport::from_spectrum(e.values.clone(), &[], &[], e.max_residual(&sym))
}

pub fn eigen_herm(t: &MagneticKineticOperator) -> SpectralReport {
    let sym = t.symmetric_matrix();
    let e = t.eigen();
    SpectralReport::from_spectrum(e.values.clone(), &[], &[], e.max_residual(&sym))
}

/// Spectrum of `T − V`.
pub fn schrodinger_spectrum(t: &KineticOperator, v: &Potential) -> Result<Vec<f64>> {
    linalg::sym_eigenvalues(&t.schrodinger_symmetric(v)?)
}

/// `N(−τ, T−V)`, strict, with a tie warning near `−τ`.
pub fn count_below(t: &KineticOperator, v: &Potential, tau: f64) -> Result<Count> {
    if !(tau >= 0.0) {
        return Err(LabError::Domain(format!("energy threshold must be nonnegative, got {tau}")));
    }
    Ok(count_from_spectrum(&schrodinger_spectrum(t, v)?, tau))
}

pub fn riesz_mean(t: &KineticOperator, v: &Potential, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(LabError::Domain(format!("Riesz exponent must be nonnegative, got {gamma}")));
    }
    Ok(riesz_from_spectrum(&schrodinger_spectrum(t, v)?, gamma))
}
