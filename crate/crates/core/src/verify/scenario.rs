use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::checks::{self, Instance};
use super::config::{CheckKind, ConfigFile, OperatorConfig, ScenarioConfig};
use super::report::{AssumptionStatus, VerificationReport};
use crate::error::{LabError, Result};
use crate::exponents::ExponentSet;
use crate::functional::{
    aizenman_lieb_factor, clr_bounds_from_s, ltw_bounds_from_s, sobolev_certificate, sobolev_constant,
    sobolev_interp_constant, ConstantsBundle, MinimizationTrace, Provenance, SobolevOptions,
};
use crate::lattice::{LatticeSpace, Potential, Weight};
use crate::operators::{
    beurling_deny_check, build_fractional_laplacian, build_hardy_operator, build_laplacian, build_magnetic_laplacian,
    build_periodic_schrodinger, uniform_flux_phases, weighted_transform, BeurlingDenyReport, ContractionWeight,
    KineticOperator, MagneticKineticOperator, PeriodicGroundState,
};
use crate::spectra::{eigen_sym, SpectralReport};

/// Random trial functions used to certify each minimised Sobolev constant.
pub const CERTIFICATE_SAMPLES: usize = 10_000;
/// Relative overshoot of the adversarial potential above the Sobolev threshold.
pub const ADVERSARIAL_EPS: f64 = 2e-7;
const FORM_SAMPLES: usize = 100;
const NASH_SAMPLES: usize = 2_000;

/// FNV-1a of `label`, mixed into `base`, so that every consumer of
/// randomness in a scenario gets its own reproducible stream.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ base.rotate_left(29)
}

/// The operators a scenario runs its checks on.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    /// Real kinetic operator after every shift.
    pub operator: KineticOperator,
    pub magnetic: Option<MagneticKineticOperator>,
    pub periodic: Option<PeriodicGroundState>,
    /// Candidate weight for the contraction condition besides `ω ≡ 1`.
    pub weight: Option<(String, Weight)>,
    /// Total constant added, including any positivity repair.
    pub shift: f64,
}

pub fn build_scenario(sc: &ScenarioConfig) -> Result<BuiltScenario> {
    let lat = &sc.lattice;
    let space = Arc::new(LatticeSpace::new(&lat.extents, lat.spacing, lat.boundary, &lat.exclusions)?);
    let lap = build_laplacian(&space);
    let shift = sc.shift;
    let ground_weight = |t: &KineticOperator| -> Option<(String, Weight)> {
        let psi: Vec<f64> = t.eigenfunction(0).iter().map(|v| v.abs()).collect();
        Weight::new(psi).ok().map(|w| ("ground".to_string(), w))
    };
    let built = match &sc.operator {
        OperatorConfig::Laplacian => {
            let operator = lap.shifted(shift);
            BuiltScenario { operator, magnetic: None, periodic: None, weight: None, shift }
        }
        OperatorConfig::Fractional { s } => {
            let operator = build_fractional_laplacian(&lap, *s)?.shifted(shift);
            BuiltScenario { operator, magnetic: None, periodic: None, weight: None, shift }
        }
        OperatorConfig::Magnetic { flux, phases, phase_seed } => {
            let phases = match (flux, phases, phase_seed) {
                (Some(f), _, _) => uniform_flux_phases(&space, *f)?,
                (_, Some(p), _) => p.clone(),
                (_, _, Some(ps)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(*ps, "phases"));
                    (0..space.edges().len()).map(|_| rng.random::<f64>() * TAU).collect()
                }
                _ => unreachable!("validated: one phase source"),
            };
            let magnetic = build_magnetic_laplacian(&space, &phases)?.shifted(shift);
            BuiltScenario { operator: lap.shifted(shift), magnetic: Some(magnetic), periodic: None, weight: None, shift }
        }
        OperatorConfig::Periodic { w } => {
            let bundle = build_periodic_schrodinger(&space, w)?;
            let operator = bundle.shifted.shifted(shift);
            let weight = Some(("ground".to_string(), bundle.ground_state.clone()));
            BuiltScenario { operator, magnetic: None, periodic: Some(bundle), weight, shift }
        }
        OperatorConfig::Hardy { s, coupling, origin } => {
            let h = build_hardy_operator(&lap, *s, origin.as_deref(), *coupling)?;
            let total = h.deficit + shift;
            let operator = h.operator.shifted(total);
            let weight = ground_weight(&operator);
            BuiltScenario { operator, magnetic: None, periodic: None, weight, shift: total }
        }
    };
    Ok(built)
}

/// Labelled potentials: seeded `|N(0, σλ_max)|` draws, ground-state profiles
/// and explicit lists, in that order.
pub fn scenario_potentials(sc: &ScenarioConfig, t: &KineticOperator, seed: u64) -> Result<Vec<(String, Potential)>> {
    let cfg = &sc.potentials;
    let scale = t.lambda_max().abs().max(f64::MIN_POSITIVE);
    let n = t.len();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "potentials"));
    for &sigma in &cfg.sigmas {
        let dist = Normal::new(0.0, sigma * scale).map_err(|e| LabError::Domain(e.to_string()))?;
        for k in 0..cfg.draws {
            let v: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng).abs()).collect();
            out.push((format!("sigma={sigma}#{k}"), Potential::new(v)?));
        }
    }
    if !cfg.ground_couplings.is_empty() {
        let psi = t.eigenfunction(0);
        let top = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &c in &cfg.ground_couplings {
            let v: Vec<f64> = psi.iter().map(|p| c * scale * (p / top).powi(2)).collect();
            out.push((format!("ground={c}"), Potential::new(v)?));
        }
    }
    for (k, v) in cfg.explicit.iter().enumerate() {
        out.push((format!("explicit#{k}"), Potential::new(v.clone())?));
    }
    Ok(out)
}

/// Everything a scenario produces.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub id: String,
    /// Configured operator family.
    pub family: String,
    /// Label of the real operator the checks ran on.
    pub operator: String,
    pub sites: usize,
    pub assumption_status: AssumptionStatus,
    pub constants: ConstantsBundle,
    pub spectrum: SpectralReport,
    pub reports: Vec<VerificationReport>,
}

struct Constants {
    clr: Option<MinimizationTrace>,
    interp: Option<f64>,
}

fn needs(sc: &ScenarioConfig, kinds: &[CheckKind]) -> bool {
    sc.checks.iter().any(|c| kinds.contains(c))
}

/// The scenario's own seed: the file-level seed mixed with its id and
/// optional potential seed.
pub fn scenario_seed(sc: &ScenarioConfig, file_seed: u64) -> u64 {
    derive_seed(file_seed ^ sc.potentials.seed.unwrap_or(0), &sc.id)
}

/// Runs every requested check of `sc` under the file-level `seed`.
pub fn run_scenario(sc: &ScenarioConfig, seed: u64) -> Result<ScenarioOutcome> {
    let at = format!("scenario `{}`", sc.id);
    sc.validate(&at)?;
    let seed = scenario_seed(sc, seed);
    let built = build_scenario(sc)?;
    let t = &built.operator;
    let (gamma, kappa) = sc.exponents.gamma_kappa(&at)?;
    let scale = t.spectral_scale();

    let weights: Vec<(&str, &Weight)> = built.weight.iter().map(|(n, w)| (n.as_str(), w)).collect();
    let bd: BeurlingDenyReport = beurling_deny_check(t, &weights, derive_seed(seed, "beurling-deny"));
    let base_status = AssumptionStatus {
        passed: bd.passed(),
        detail: bd.summary(),
        constant: Some(Provenance::Minimized),
        shift: built.shift,
    };
    let mut bundle = ConstantsBundle::default();
    let opts = SobolevOptions {
        restarts: sc.sobolev_restarts.unwrap_or(SobolevOptions::default().restarts),
        seed: derive_seed(seed, "sobolev"),
        ..SobolevOptions::default()
    };

    let clr_kinds =
        [CheckKind::Clr, CheckKind::ClrBracket, CheckKind::MagneticClr, CheckKind::Liyau, CheckKind::HeatChain];
    let mut consts = Constants { clr: None, interp: None };
    if kappa > 1.0 && needs(sc, &clr_kinds) {
        let q = 2.0 * kappa / (kappa - 1.0);
        let trace = sobolev_constant(t, q, &opts)?;
        bundle.push("S", trace.value, Provenance::Minimized, format!("q={q}, restarts={}", trace.restarts));
        if trace.value > 0.0 {
            let slack = sobolev_certificate(t, q, trace.value, CERTIFICATE_SAMPLES, derive_seed(seed, "certificate"));
            bundle.push("S_certificate_slack", slack, Provenance::Measured, "");
            bundle.push_bracket("L_clr", clr_bounds_from_s(trace.value, kappa)?, Provenance::ClosedForm);
        }
        consts.clr = Some(trace);
    }
    let e = ExponentSet::from_gamma_kappa(gamma, kappa).ok();
    let e = match (e, sc.exponents.gamma_tilde) {
        (Some(e), Some(gt)) if gt > gamma => Some(e.with_gamma_tilde(gt)?),
        (e, _) => e,
    };
    if needs(sc, &[CheckKind::WeakLt, CheckKind::LtMoments]) {
        let e = e.as_ref().expect("validated: gamma + kappa > 1");
        let interp = sobolev_interp_constant(t, e.q, e.theta, &opts)?;
        bundle.push("S_interp", interp.value, Provenance::Minimized, format!("q={}, theta={}", e.q, e.theta));
        bundle.push("S_interp_direct", interp.direct, Provenance::Minimized, "");
        bundle.push("S_interp_sweep", interp.sweep, Provenance::Minimized, format!("tau*={}", interp.best_tau));
        if interp.value > 0.0 {
            bundle.push_bracket("L_weak", ltw_bounds_from_s(interp.value, gamma, kappa)?, Provenance::ClosedForm);
        }
        if let Some(gt) = e.gamma_tilde {
            bundle.push("AL_factor", aizenman_lieb_factor(gamma, gt, kappa)?.factor, Provenance::ClosedForm, "");
        }
        consts.interp = Some(interp.value);
    }

    let potentials = scenario_potentials(sc, t, seed)?;
    let mut reports: Vec<VerificationReport> = Vec::new();
    let s_clr = consts.clr.as_ref().map_or(0.0, |c| c.value);
    let s_interp = consts.interp.unwrap_or(0.0);
    let l_weak = if s_interp > 0.0 { ltw_bounds_from_s(s_interp, gamma, kappa)?.upper } else { 0.0 };
    let taus = match &sc.tau_grid {
        Some(g) => g.resolve(scale),
        None => crate::quad::log_space(1e-3 * scale, 10.0 * scale, 20),
    };
    let times = sc.t_grid.as_ref().map_or_else(|| vec![0.1, 1.0, 10.0], |g| g.resolve(1.0 / scale));
    let s_grid = sc.s_grid.as_ref().map(|g| g.resolve(1.0 / scale));
    let push = |reports: &mut Vec<VerificationReport>, r: VerificationReport, instance: &str, status: &AssumptionStatus| {
        reports.push(r.with_scenario(&sc.id).with_instance(instance).with_assumptions(status.clone()));
    };
    let unchecked = AssumptionStatus::unchecked();

    let mut best_ratio: f64 = 0.0;
    for (label, v) in &potentials {
        let inst = Instance::new(t, v)?;
        for check in &sc.checks {
            match check {
                CheckKind::Clr => {
                    let r = checks::verify_clr(&inst, kappa, s_clr)?;
                    best_ratio = best_ratio.max(r.observations["ratio"]);
                    push(&mut reports, r, label, &base_status);
                }
                CheckKind::WeakLt => {
                    let e = e.as_ref().expect("validated");
                    push(&mut reports, checks::verify_weak_lt(&inst, e, &taus, s_interp)?, label, &base_status);
                }
                CheckKind::LtMoments => {
                    let e = e.as_ref().expect("validated");
                    push(&mut reports, checks::verify_lt_moments(&inst, e, l_weak)?, label, &base_status);
                }
                CheckKind::MomentIdentity => {
                    let gt = sc.exponents.gamma_tilde.expect("validated");
                    push(&mut reports, checks::moment_identity(&inst, gt)?, label, &unchecked);
                }
                CheckKind::MagneticClr => {
                    let ta = built.magnetic.as_ref().expect("validated: magnetic family");
                    push(&mut reports, checks::verify_magnetic_clr(ta, &inst, kappa, s_clr)?, label, &base_status);
                }
                CheckKind::Liyau => {
                    for r in checks::verify_liyau_trace(&inst, s_clr, kappa, s_grid.as_deref())? {
                        push(&mut reports, r, label, &base_status);
                    }
                }
                _ => {}
            }
        }
    }

    for check in &sc.checks {
        match check {
            CheckKind::ClrBracket => {
                let q = 2.0 * kappa / (kappa - 1.0);
                let mut best = best_ratio;
                if let Some(trace) = consts.clr.as_ref().filter(|c| c.value > 0.0) {
                    let v = checks::adversarial_potential(t, trace, q, ADVERSARIAL_EPS)?;
                    let inst = Instance::new(t, &v)?;
                    let r = checks::verify_clr(&inst, kappa, s_clr)?;
                    best = best.max(r.observations["ratio"]);
                    push(&mut reports, r, "adversarial", &base_status);
                }
                for r in checks::clr_bracket(best, kappa, s_clr)? {
                    push(&mut reports, r, "search", &base_status);
                }
            }
            CheckKind::Diamagnetic => {
                let ta = built.magnetic.as_ref().expect("validated: magnetic family");
                push(&mut reports, checks::verify_diamagnetic(t, ta, &times)?, "kernel", &unchecked);
                let form_seed = derive_seed(seed, "diamagnetic");
                push(&mut reports, checks::verify_diamagnetic_form(t, ta, FORM_SAMPLES, form_seed)?, "form", &unchecked);
            }
            CheckKind::GsrIdentity => {
                let pg = built.periodic.as_ref().expect("validated: periodic family");
                let r = checks::verify_gsr_identity(pg, FORM_SAMPLES, derive_seed(seed, "gsr"))?;
                push(&mut reports, r, "random", &unchecked);
            }
            CheckKind::HeatChain => heat_chain(&mut reports, &built, &bd, kappa, s_clr, &times, seed, &base_status, &mut bundle, &sc.id)?,
            _ => {}
        }
    }

    Ok(ScenarioOutcome {
        id: sc.id.clone(),
        family: sc.operator.name().to_string(),
        operator: t.label().to_string(),
        sites: t.len(),
        assumption_status: base_status,
        constants: bundle,
        spectrum: eigen_sym(t),
        reports,
    })
}

/// Heat bound and Nash inequality on the operator itself when `ω ≡ 1`
/// contracts, otherwise on its ground-state transform, which is Markovian
/// and has the same Sobolev constant. Kernel positivity is checked on the
/// operator itself.
#[allow(clippy::too_many_arguments)]
fn heat_chain(
    reports: &mut Vec<VerificationReport>,
    built: &BuiltScenario,
    bd: &BeurlingDenyReport,
    kappa: f64,
    s: f64,
    times: &[f64],
    seed: u64,
    status: &AssumptionStatus,
    bundle: &mut ConstantsBundle,
    id: &str,
) -> Result<()> {
    let t = &built.operator;
    let q = 2.0 * kappa / (kappa - 1.0);
    let transformed;
    let (chain_op, instance) = match bd.passing_weight() {
        Some(ContractionWeight::Supplied(_)) => {
            let (_, w) = built.weight.as_ref().expect("a supplied weight passed");
            transformed = weighted_transform(t, w, kappa)?.operator;
            (&transformed, "weighted")
        }
        _ => (t, "direct"),
    };
    let finish = |r: VerificationReport, instance: &str| {
        r.with_scenario(id).with_instance(instance).with_assumptions(status.clone())
    };
    let heat = checks::verify_heat_bound(chain_op, kappa, s, None)?;
    if s > 0.0 {
        bundle.push("K_measured", heat[0].lhs, Provenance::Measured, format!("on the {instance} operator"));
        bundle.push("K_sobolev", heat[0].rhs, Provenance::ClosedForm, "(kappa/S)^kappa");
        let k = heat[0].lhs.min(heat[0].rhs);
        if k > 0.0 {
            let l = crate::functional::lieb_bound_from_k(k, kappa)?;
            bundle.push("L_lieb", l.value, Provenance::Measured, "from the smaller K");
        }
    }
    for r in heat {
        reports.push(finish(r, instance));
    }
    let nash = checks::verify_nash(chain_op, q, s, NASH_SAMPLES, derive_seed(seed, "nash"))?;
    reports.push(finish(nash, instance));
    reports.push(finish(checks::verify_kernel_positivity(t, times)?, "direct"));
    Ok(())
}

/// Runs every scenario of a validated file, in file order.
pub fn run_config(cfg: &ConfigFile) -> Result<Vec<ScenarioOutcome>> {
    cfg.validate()?;
    cfg.scenarios.iter().map(|sc| run_scenario(sc, cfg.seed)).collect()
}
