//! Closed-form constants and brackets.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::exponents::ExponentSet;
use crate::quad::golden_section;
use crate::special::{gamma as gamma_fn, ln_gamma, scaled_e1};

/// Sharp constant of the fractional Hardy inequality,
/// `2^{2s} Γ((d+2s)/4)² / Γ((d−2s)/4)²`.
pub fn hardy_constant(s: f64, d: usize) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(domain(format!("Hardy order must lie in (0, 1], got {s}")));
    }
    let d = d as f64;
    if d <= 2.0 * s {
        return Err(domain(format!("Hardy constant needs d > 2s, got d = {d}, s = {s}")));
    }
    if s == 1.0 {
        // Γ(a+1)/Γ(a) = a
        return Ok((d - 2.0) * (d - 2.0) / 4.0);
    }
    let log = 2.0 * s * std::f64::consts::LN_2 + 2.0 * ln_gamma((d + 2.0 * s) / 4.0)
        - 2.0 * ln_gamma((d - 2.0 * s) / 4.0);
    let direct = 4f64.powf(s) * (gamma_fn((d + 2.0 * s) / 4.0) / gamma_fn((d - 2.0 * s) / 4.0)).powi(2);
    // the direct quotient is exact at small half-integers, the log form never overflows
    Ok(if direct.is_finite() && direct > 0.0 { direct } else { log.exp() })
}

/// `min_{τ>0} (α τ^{θ−1} + β τ^θ)` and its minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauMin {
    pub value: f64,
    pub argmin: f64,
}

pub fn tau_min_value(alpha: f64, beta: f64, theta: f64) -> Result<TauMin> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(domain(format!("tau_min needs α, β > 0, got ({alpha}, {beta})")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain(format!("tau_min needs θ in (0, 1), got {theta}")));
    }
    let value = theta.powf(-theta)
        * (1.0 - theta).powf(theta - 1.0)
        * alpha.powf(theta)
        * beta.powf(1.0 - theta);
    Ok(TauMin { value, argmin: alpha * (1.0 - theta) / (beta * theta) })
}

/// `θ^{−θ}(1−θ)^{θ−1}`, with the `θ = 1` limit equal to 1.
pub fn interpolation_factor(theta: f64) -> f64 {
    if theta >= 1.0 {
        return 1.0;
    }
    theta.powf(-theta) * (1.0 - theta).powf(theta - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
    pub fn contains(&self, x: f64, rel: f64) -> bool {
        x >= self.lower * (1.0 - rel) && x <= self.upper * (1.0 + rel)
    }
}

/// `S^{−κ} <= L <= e^{κ−1} S^{−κ}`.
pub fn clr_bounds_from_s(s: f64, kappa: f64) -> Result<Bracket> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("Sobolev constant must be positive, got {s}")));
    }
    if !(kappa >= 1.0) {
        return Err(domain(format!("CLR exponent must be at least 1, got {kappa}")));
    }
    let lower = s.powf(-kappa);
    Ok(Bracket { lower, upper: (kappa - 1.0).exp() * lower })
}

/// Weak Lieb–Thirring bracket with the effective constant
/// `θ^{−θ}(1−θ)^{θ−1} S`.
pub fn ltw_bounds_from_s(s: f64, gamma: f64, kappa: f64) -> Result<Bracket> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain(format!("interpolation constant must be positive, got {s}")));
    }
    let exps = ExponentSet::from_gamma_kappa(gamma, kappa)?;
    let p = gamma + kappa;
    let lower = (interpolation_factor(exps.theta) * s).powf(-p);
    Ok(Bracket { lower, upper: (p - 1.0).exp() * lower })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiebBound {
    pub value: f64,
    pub argmin: f64,
}

/// The `a`-dependent factor `a^{1−κ} e^a (1 − a e^a E₁(a))^{−1} / (κ(κ−1))`.
pub fn lieb_objective(a: f64, kappa: f64) -> f64 {
    let inner = 1.0 - a * scaled_e1(a);
    a.powf(1.0 - kappa) * a.exp() / (inner * kappa * (kappa - 1.0))
}

/// Semigroup-method CLR constant `K · inf_a lieb_objective(a, κ)`.
pub fn lieb_bound_from_k(k: f64, kappa: f64) -> Result<LiebBound> {
    if !(kappa > 1.0) {
        return Err(domain(format!("semigroup bound needs κ > 1, got {kappa}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(domain(format!("heat constant must be positive, got {k}")));
    }
    let f = |ln_a: f64| lieb_objective(ln_a.exp(), kappa).ln();
    // coarse scan in ln a, then golden section on the neighbouring cells
    let grid: Vec<f64> = (0..=240).map(|i| -12.0 + 0.1 * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..grid.len())
        .filter(|&i| vals[i].is_finite())
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .ok_or_else(|| domain("semigroup objective is not finite anywhere"))?;
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (ln_a, _) = golden_section(f, lo, hi, 1e-12);
    let a = ln_a.exp();
    Ok(LiebBound { value: k * lieb_objective(a, kappa), argmin: a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AizenmanLieb {
    pub factor: f64,
    pub argmin_s: f64,
}

/// `γ̃(1−s)^{−γ} s^{γ−γ̃} B(γ+κ+1, γ̃−γ)` before minimising over `s`.
pub fn aizenman_lieb_expression(gamma: f64, gamma_tilde: f64, kappa: f64, s: f64) -> f64 {
    gamma_tilde
        * (1.0 - s).powf(-gamma)
        * s.powf(gamma - gamma_tilde)
        * crate::special::beta(gamma + kappa + 1.0, gamma_tilde - gamma)
}

pub fn aizenman_lieb_factor(gamma: f64, gamma_tilde: f64, kappa: f64) -> Result<AizenmanLieb> {
    if !(gamma >= 0.0 && kappa > 0.0) {
        return Err(domain(format!("need γ >= 0 and κ > 0, got ({gamma}, {kappa})")));
    }
    if !(gamma_tilde > gamma) {
        return Err(domain(format!("need γ̃ > γ, got γ̃ = {gamma_tilde}, γ = {gamma}")));
    }
    let d = gamma_tilde - gamma;
    let ln_prefactor = (gamma_tilde + 1.0) * gamma_tilde.ln()
        - if gamma > 0.0 { gamma * gamma.ln() } else { 0.0 }
        - d * d.ln();
    let ln_gammas = ln_gamma(gamma + kappa + 1.0) + ln_gamma(d) - ln_gamma(gamma_tilde + kappa + 1.0);
    let direct = gamma_tilde.powf(gamma_tilde + 1.0)
        / (gamma.powf(gamma) * d.powf(d))
        * gamma_fn(gamma + kappa + 1.0)
        * gamma_fn(d)
        / gamma_fn(gamma_tilde + kappa + 1.0);
    let factor = if direct.is_finite() && direct > 0.0 { direct } else { (ln_prefactor + ln_gammas).exp() };
    Ok(AizenmanLieb { factor, argmin_s: d / gamma_tilde })
}
