//! Individual inequality checks. Each returns reports with an unset scenario
//! id and unchecked assumptions; [`super::run_scenario`] fills both in.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::report::{TheoremTag, VerificationReport};
use crate::error::{domain, LabError, Result};
use crate::exponents::ExponentSet;
use crate::functional::{
    aizenman_lieb_factor, clr_bounds_from_s, heat_bound_check, ltw_bounds_from_s, nash_check, MinimizationTrace,
};
use crate::lattice::{lp_norm, power_integral, Potential};
use crate::operators::{KineticOperator, MagneticKineticOperator, PeriodicGroundState};
use crate::quad::log_space;
use crate::spectra::{
    count_from_spectrum, heat_kernel, liyau_upsilon, magnetic_heat_kernel, moment_representation,
    riesz_from_spectrum, schrodinger_spectrum, Count, TieWarning,
};

/// Relative agreement required of the moment representation.
pub const MOMENT_TOL: f64 = 1e-6;
/// Relative residual allowed in the ground-state representation.
pub const GSR_TOL: f64 = 1e-10;
/// Slack on `(κ/S)^κ` for the measured semigroup constant.
pub const HEAT_TOL: f64 = 1e-8;
/// Relative slack on both ends of the CLR bracket.
pub const BRACKET_TOL: f64 = 1e-6;
/// Most negative heat-kernel entry tolerated, relative to the largest entry.
pub const KERNEL_FLOOR: f64 = 1e-12;

/// `T − V` together with its spectrum, computed once and shared by every
/// check on the pair.
#[derive(Debug, Clone)]
pub struct Instance<'a> {
    pub operator: &'a KineticOperator,
    pub potential: &'a Potential,
    pub spectrum: Vec<f64>,
}

impl<'a> Instance<'a> {
    pub fn new(operator: &'a KineticOperator, potential: &'a Potential) -> Result<Self> {
        let spectrum = schrodinger_spectrum(operator, potential)?;
        Ok(Self { operator, potential, spectrum })
    }

    /// `N(−τ, T − V)`.
    pub fn count(&self, tau: f64) -> Count {
        count_from_spectrum(&self.spectrum, tau)
    }

    /// `∫ V^p dx`.
    pub fn integral(&self, p: f64) -> Result<f64> {
        power_integral(self.potential.values(), p, self.operator.measure())
    }
}

fn ratio(count: usize, integral: f64) -> f64 {
    if integral > 0.0 {
        count as f64 / integral
    } else {
        0.0
    }
}

/// `N(0, T−V) <= e^{κ−1} S^{−κ} ∫V^κ`.
pub fn verify_clr(inst: &Instance<'_>, kappa: f64, s: f64) -> Result<VerificationReport> {
    clr_report(TheoremTag::Clr, "clr", inst.count(0.0), inst.integral(kappa)?, kappa, s)
}

fn clr_report(tag: TheoremTag, name: &str, n: Count, integral: f64, kappa: f64, s: f64) -> Result<VerificationReport> {
    if !(kappa > 1.0) {
        return Err(domain(format!("CLR exponent must exceed one, got {kappa}")));
    }
    let lhs = n.value as f64;
    let report = if s > 0.0 {
        VerificationReport::new(tag, name, lhs, clr_bounds_from_s(s, kappa)?.upper * integral)
    } else {
        VerificationReport::vacuous(tag, name, lhs)
    };
    Ok(report.with_ties(n.tie).observe("integral", integral).observe("ratio", ratio(n.value, integral)))
}

/// `V = α|u|^{q−2}` with `α = (1+ε) S ‖u‖_q^{2−q}` for the Sobolev minimiser
/// `u`, so that `t[u] − ∫V|u|² = −ε S‖u‖_q² < 0` and `N(0, T−V)/∫V^κ` sits
/// within a factor `(1+ε)^{−κ}` of `S^{−κ}`.
pub fn adversarial_potential(t: &KineticOperator, trace: &MinimizationTrace, q: f64, eps: f64) -> Result<Potential> {
    if !(trace.value > 0.0) {
        return Err(domain("adversarial potential needs a positive Sobolev constant"));
    }
    let u = &trace.minimizer;
    let norm = lp_norm(u, q, t.measure())?;
    let alpha = (1.0 + eps) * trace.value * norm.powf(2.0 - q);
    Potential::new(u.iter().map(|x| alpha * x.abs().powf(q - 2.0)).collect())
}

/// Both ends of `S^{−κ} <= sup_V N/∫V^κ <= e^{κ−1} S^{−κ}` for the largest
/// ratio found over a potential search.
pub fn clr_bracket(best_ratio: f64, kappa: f64, s: f64) -> Result<[VerificationReport; 2]> {
    if !(s > 0.0) {
        return Ok([
            VerificationReport::vacuous(TheoremTag::ClrBracket, "clr_bracket_lower", best_ratio),
            VerificationReport::vacuous(TheoremTag::ClrBracket, "clr_bracket_upper", best_ratio),
        ]);
    }
    let b = clr_bounds_from_s(s, kappa)?;
    Ok([
        VerificationReport::new(TheoremTag::ClrBracket, "clr_bracket_lower", b.lower * (1.0 - BRACKET_TOL), best_ratio),
        VerificationReport::new(TheoremTag::ClrBracket, "clr_bracket_upper", best_ratio, b.upper * (1.0 + BRACKET_TOL)),
    ])
}

/// `N(−τ, T−V) <= L τ^{−γ} ∫V^{γ+κ}` across `taus`, with `L` the upper end of
/// the weak bracket built from `S_interp`. Reports the τ of smallest
/// relative margin.
pub fn verify_weak_lt(inst: &Instance<'_>, e: &ExponentSet, taus: &[f64], s_interp: f64) -> Result<VerificationReport> {
    if taus.is_empty() {
        return Err(domain("weak LT check needs at least one τ"));
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(domain(format!("weak LT energies must be positive, got {t}")));
    }
    let integral = inst.integral(e.gamma + e.kappa)?;
    let mut ties: Vec<TieWarning> = Vec::new();
    if !(s_interp > 0.0) {
        let worst = taus.iter().map(|&t| inst.count(t).value).max().unwrap_or(0);
        return Ok(VerificationReport::vacuous(TheoremTag::WeakLt, "weak_lt", worst as f64)
            .observe("integral", integral));
    }
    let l = ltw_bounds_from_s(s_interp, e.gamma, e.kappa)?.upper;
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for &tau in taus {
        let n = inst.count(tau);
        ties.extend(n.tie);
        let lhs = n.value as f64;
        let rhs = l * tau.powf(-e.gamma) * integral;
        let rel = (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE);
        if worst.is_none_or(|w| rel < w.0) {
            worst = Some((rel, tau, lhs, rhs));
        }
    }
    let (_, tau, lhs, rhs) = worst.expect("nonempty grid");
    Ok(VerificationReport::new(TheoremTag::WeakLt, "weak_lt", lhs, rhs)
        .with_ties(ties)
        .observe("tau", tau)
        .observe("constant", l)
        .observe("integral", integral)
        .observe("points", taus.len() as f64))
}

/// `Tr(T−V)₋^{γ̃} <= factor(γ, γ̃, κ) L_weak ∫V^{γ̃+κ}`.
pub fn verify_lt_moments(inst: &Instance<'_>, e: &ExponentSet, l_weak: f64) -> Result<VerificationReport> {
    let gt = e.gamma_tilde.ok_or_else(|| domain("moment check needs γ̃"))?;
    let factor = aizenman_lieb_factor(e.gamma, gt, e.kappa)?.factor;
    let lhs = riesz_from_spectrum(&inst.spectrum, gt);
    let integral = inst.integral(gt + e.kappa)?;
    if !(l_weak > 0.0 && l_weak.is_finite()) {
        return Ok(VerificationReport::vacuous(TheoremTag::LtMoment, "lt_moment", lhs));
    }
    Ok(VerificationReport::new(TheoremTag::LtMoment, "lt_moment", lhs, factor * l_weak * integral)
        .observe("factor", factor)
        .observe("integral", integral))
}

/// Relative gap between `Σ|λ|^{γ̃}` and `γ̃∫N(−τ)τ^{γ̃−1}dτ`.
pub fn moment_identity(inst: &Instance<'_>, gamma_tilde: f64) -> Result<VerificationReport> {
    if !(gamma_tilde > 0.0) {
        return Err(domain(format!("moment exponent must be positive, got {gamma_tilde}")));
    }
    let direct = riesz_from_spectrum(&inst.spectrum, gamma_tilde);
    let integral = moment_representation(&inst.spectrum, gamma_tilde);
    let residual = if direct == 0.0 { integral.abs() } else { (direct - integral).abs() / direct };
    Ok(VerificationReport::new(TheoremTag::MomentIdentity, "moment_identity", residual, MOMENT_TOL)
        .observe("riesz", direct)
        .observe("representation", integral))
}

fn check_structure(t: &KineticOperator, ta: &MagneticKineticOperator) -> Result<()> {
    if t.len() != ta.len() {
        return Err(LabError::Length { expected: t.len(), got: ta.len() });
    }
    let a = t.form();
    let b = ta.form();
    let scale = crate::linalg::max_abs(a).max(f64::MIN_POSITIVE);
    for i in 0..t.len() {
        for j in 0..t.len() {
            let gap = if i == j { (b[(i, j)] - a[(i, j)]).norm() } else { b[(i, j)].norm() - a[(i, j)].abs() };
            if gap.abs() > 1e-12 * scale {
                return Err(domain(format!(
                    "magnetic form does not match the comparison form at ({i}, {j}): |{}| vs {}",
                    b[(i, j)],
                    a[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

/// `|e^{−tT_A}(x,y)| <= e^{−tT}(x,y)` over all entries and times, as the
/// largest excess relative to the largest entry of `e^{−tT}`.
pub fn verify_diamagnetic(t: &KineticOperator, ta: &MagneticKineticOperator, times: &[f64]) -> Result<VerificationReport> {
    check_structure(t, ta)?;
    if times.is_empty() {
        return Err(domain("diamagnetic check needs at least one time"));
    }
    let mut excess = f64::NEG_INFINITY;
    let mut at = times[0];
    for &time in times {
        let k = heat_kernel(t, time)?;
        let ka = magnetic_heat_kernel(ta, time)?;
        let top = k.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
        let e = ka.iter().zip(k.iter()).map(|(a, b)| (a.norm() - b) / top).fold(f64::NEG_INFINITY, f64::max);
        if e > excess {
            excess = e;
            at = time;
        }
    }
    Ok(VerificationReport::new(TheoremTag::Diamagnetic, "diamagnetic_kernel", excess, 0.0)
        .with_scale_floor(1.0)
        .observe("time", at)
        .observe("times", times.len() as f64))
}

/// `t[v, |u|] <= Re t_A[v sgn u, u]` on random complex `u` and `0 <= v <= |u|`,
/// as the largest excess relative to `max(|lhs|, |rhs|)`.
pub fn verify_diamagnetic_form(
    t: &KineticOperator,
    ta: &MagneticKineticOperator,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_structure(t, ta)?;
    let n = t.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples.max(1) {
        let u: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let abs: Vec<f64> = u.iter().map(|z| z.norm()).collect();
        let v: Vec<f64> = abs.iter().map(|a| a * rng.random::<f64>()).collect();
        let vs: Vec<Complex64> =
            u.iter().zip(&v).map(|(z, vx)| if z.norm() > 0.0 { z / z.norm() * *vx } else { Complex64::new(0.0, 0.0) }).collect();
        let lhs = t.bilinear(&v, &abs);
        let rhs = ta.sesquilinear(&vs, &u).re;
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs) / scale);
    }
    Ok(VerificationReport::new(TheoremTag::Diamagnetic, "diamagnetic_form", worst, 0.0)
        .with_scale_floor(1.0)
        .observe("samples", samples.max(1) as f64))
}

/// `N(0, T_A−V) <= e^{κ−1} S^{−κ} ∫V^κ` with `S` of the non-magnetic operator.
/// The non-magnetic count is recorded, not compared.
pub fn verify_magnetic_clr(
    ta: &MagneticKineticOperator,
    inst: &Instance<'_>,
    kappa: f64,
    s: f64,
) -> Result<VerificationReport> {
    let spectrum = ta.schrodinger_spectrum(inst.potential)?;
    let n = count_from_spectrum(&spectrum, 0.0);
    let report = clr_report(TheoremTag::MagneticClr, "magnetic_clr", n, inst.integral(kappa)?, kappa, s)?;
    Ok(report.observe("nonmagnetic_count", inst.count(0.0).value as f64))
}

/// Default trace times: log-spaced across the scales of the spectrum of `Υ`.
pub fn liyau_times(upsilon_min: f64, upsilon_max: f64, points: usize) -> Vec<f64> {
    log_space(1e-2 / upsilon_max, 1e2 / upsilon_min, points)
}

/// `Tr(2Υ)^{−1}e^{−2sΥ} <= (κ−1)^{κ−1}(2S)^{−κ} ∫V^κ s^{1−κ}` over `times`, then
/// the counting step `N(1, Υ^{−1}) <= 2e^{2t}Tr(2Υ)^{−1}e^{−2tΥ}` at
/// `t = (κ−1)/2`, which reproduces the upper CLR constant.
pub fn verify_liyau_trace(
    inst: &Instance<'_>,
    s: f64,
    kappa: f64,
    times: Option<&[f64]>,
) -> Result<[VerificationReport; 2]> {
    if !(kappa > 1.0) {
        return Err(domain(format!("trace bound needs κ > 1, got {kappa}")));
    }
    let integral = inst.integral(kappa)?;
    if inst.potential.values().iter().any(|&v| v <= 0.0) {
        let na = super::report::AssumptionStatus::failed("the auxiliary operator needs V > 0 at every site");
        return Ok([
            VerificationReport::vacuous(TheoremTag::LiyauTrace, "liyau_trace", 0.0).with_assumptions(na.clone()),
            VerificationReport::vacuous(TheoremTag::LiyauTrace, "liyau_counting", 0.0).with_assumptions(na),
        ]);
    }
    if !(s > 0.0) {
        return Ok([
            VerificationReport::vacuous(TheoremTag::LiyauTrace, "liyau_trace", 0.0),
            VerificationReport::vacuous(TheoremTag::LiyauTrace, "liyau_counting", 0.0),
        ]);
    }
    let ups = liyau_upsilon(inst.operator, inst.potential)?;
    let owned;
    let times = match times {
        Some(t) => t,
        None => {
            let lo = ups.eigenvalues[0];
            let hi = *ups.eigenvalues.last().expect("nonempty space");
            owned = liyau_times(lo, hi, 40);
            &owned
        }
    };
    let count = ups.count_inverse_above_one();
    let t_star = 0.5 * (kappa - 1.0);
    let counting_rhs = 2.0 * (2.0 * t_star).exp() * ups.trace_h1(t_star);
    let c = (kappa - 1.0).powf(kappa - 1.0) * (2.0 * s).powf(-kappa) * integral;
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
    for &time in times {
        let lhs = ups.trace_h1(time);
        let rhs = c * time.powf(1.0 - kappa);
        let rel = (rhs - lhs) / rhs;
        if rel < worst.0 {
            worst = (rel, time, lhs, rhs);
        }
    }
    let trace = VerificationReport::new(TheoremTag::LiyauTrace, "liyau_trace", worst.2, worst.3)
        .observe("time", worst.1)
        .observe("points", times.len() as f64);
    let chained = clr_bounds_from_s(s, kappa)?.upper * integral;
    let counting = VerificationReport::new(TheoremTag::LiyauTrace, "liyau_counting", count.value as f64, counting_rhs)
        .with_ties(count.tie)
        .observe("time", t_star)
        .observe("chained_bound", chained)
        .observe("clr_count", inst.count(0.0).value as f64);
    Ok([trace, counting])
}

/// `t[u] − E‖u‖² = Σ_bonds h^{d−2} ω_a ω_b |v_a − v_b|²` with `u = ωv`, on
/// random complex `u`. The left side uses the shifted periodic operator.
pub fn verify_gsr_identity(bundle: &PeriodicGroundState, samples: usize, seed: u64) -> Result<VerificationReport> {
    let op = &bundle.shifted;
    let w = bundle.ground_state.values();
    let edges = op.space().edges();
    let weighted = |re: &[f64], im: &[f64]| -> f64 {
        edges
            .iter()
            .filter(|e| e.a != e.b)
            .map(|e| {
                let (a, b) = (e.a, e.b);
                let dr = re[a] / w[a] - re[b] / w[b];
                let di = im[a] / w[a] - im[b] / w[b];
                e.weight * w[a] * w[b] * (dr * dr + di * di)
            })
            .sum()
    };
    let zero = vec![0.0; op.len()];
    let ground = op.quadratic_form(w) - weighted(w, &zero);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let re: Vec<f64> = (0..op.len()).map(|_| rng.sample(StandardNormal)).collect();
        let im: Vec<f64> = (0..op.len()).map(|_| rng.sample(StandardNormal)).collect();
        let lhs = op.quadratic_form(&re) + op.quadratic_form(&im);
        let rhs = weighted(&re, &im);
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    Ok(VerificationReport::new(TheoremTag::GsrIdentity, "gsr_identity", worst, GSR_TOL)
        .observe("ground_residual", ground.abs())
        .observe("energy", bundle.energy)
        .observe("samples", samples.max(1) as f64))
}

/// `sup_s s^κ‖e^{−sT}‖_{1→∞} <= (κ/S)^κ` and `‖e^{−sT}‖²_{1→2} <= (κ/2S)^κ s^{−κ}`.
pub fn verify_heat_bound(t: &KineticOperator, kappa: f64, s: f64, grid: Option<&[f64]>) -> Result<[VerificationReport; 2]> {
    if !(s > 0.0) {
        return Ok([
            VerificationReport::vacuous(TheoremTag::HeatBound, "heat_1_to_inf", 0.0),
            VerificationReport::vacuous(TheoremTag::HeatBound, "heat_1_to_2", 0.0),
        ]);
    }
    let h = heat_bound_check(t, kappa, s, grid)?;
    let [time, lhs, rhs] = h.one_to_two_worst;
    Ok([
        VerificationReport::new(TheoremTag::HeatBound, "heat_1_to_inf", h.k_measured, h.k_bound)
            .with_tolerance(HEAT_TOL)
            .observe("time", h.s_at_sup)
            .observe("points", h.grid_points as f64),
        VerificationReport::new(TheoremTag::HeatBound, "heat_1_to_2", lhs, rhs)
            .observe("time", time)
            .observe("points", h.grid_points as f64),
    ])
}

/// Nash inequality with the Sobolev constant, worst case over indicators and
/// random trial functions.
pub fn verify_nash(t: &KineticOperator, q: f64, s: f64, samples: usize, seed: u64) -> Result<VerificationReport> {
    if !(s > 0.0) {
        return Ok(VerificationReport::vacuous(TheoremTag::Nash, "nash", 0.0));
    }
    let r = nash_check(t, q, s, samples, seed)?;
    let [form_side, norm_side] = r.witness_sides;
    Ok(VerificationReport::new(TheoremTag::Nash, "nash", norm_side, form_side).observe("samples", r.samples as f64))
}

/// `e^{−tT}(x,y) >= −10^{−12}·max k` over all entries and times.
pub fn verify_kernel_positivity(t: &KineticOperator, times: &[f64]) -> Result<VerificationReport> {
    if times.is_empty() {
        return Err(domain("kernel positivity needs at least one time"));
    }
    let mut worst = f64::INFINITY;
    let mut lowest = f64::INFINITY;
    for &time in times {
        let k = heat_kernel(t, time)?;
        let top = k.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
        let low = k.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.min(low / top);
        lowest = lowest.min(low);
    }
    Ok(VerificationReport::new(TheoremTag::KernelPositivity, "kernel_positivity", -worst, KERNEL_FLOOR)
        .observe("min_entry", lowest)
        .observe("times", times.len() as f64))
}
