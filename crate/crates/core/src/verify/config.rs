//! Versioned scenario configuration. Parsing is left to the caller; this
//! module owns the schema and its validation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exponents::ExponentSet;
use crate::lattice::Boundary;
use crate::quad::log_space;
use crate::spectra::ProfileFunction;

pub const SCHEMA_VERSION: u32 = 1;

fn config_err(field: impl Into<String>, message: impl Into<String>) -> LabError {
    LabError::Config { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub sweeps: Vec<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub lattice: LatticeConfig,
    pub operator: OperatorConfig,
    /// Constant added to the kinetic operator (and its magnetic partner).
    #[serde(default)]
    pub shift: f64,
    pub exponents: ExponentsConfig,
    #[serde(default)]
    pub potentials: PotentialConfig,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub tau_grid: Option<GridConfig>,
    #[serde(default)]
    pub s_grid: Option<GridConfig>,
    #[serde(default)]
    pub t_grid: Option<GridConfig>,
    #[serde(default)]
    pub sobolev_restarts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub extents: Vec<usize>,
    #[serde(default = "unit")]
    pub spacing: f64,
    pub boundary: Boundary,
    #[serde(default)]
    pub exclusions: Vec<Vec<i64>>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Laplacian,
    Fractional {
        s: f64,
    },
    /// Exactly one of the three phase sources.
    Magnetic {
        #[serde(default)]
        flux: Option<f64>,
        #[serde(default)]
        phases: Option<Vec<f64>>,
        #[serde(default)]
        phase_seed: Option<u64>,
    },
    Periodic {
        w: Vec<f64>,
    },
    Hardy {
        s: f64,
        #[serde(default)]
        coupling: Option<f64>,
        #[serde(default)]
        origin: Option<Vec<f64>>,
    },
}

impl OperatorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Laplacian => "laplacian",
            Self::Fractional { .. } => "fractional",
            Self::Magnetic { .. } => "magnetic",
            Self::Periodic { .. } => "periodic",
            Self::Hardy { .. } => "hardy",
        }
    }
}

/// Either `(kappa, gamma)` or `(q, theta)`, plus an optional `gamma_tilde`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub gamma_tilde: Option<f64>,
}

impl ExponentsConfig {
    /// `(γ, κ)`, resolved from whichever pair was given.
    pub fn gamma_kappa(&self, field: &str) -> Result<(f64, f64)> {
        match (self.kappa, self.gamma, self.q, self.theta) {
            (Some(k), g, None, None) => Ok((g.unwrap_or(0.0), k)),
            (None, None, Some(q), Some(theta)) => {
                let e = ExponentSet::from_q_theta(q, theta).map_err(|e| config_err(field, e.to_string()))?;
                Ok((e.gamma, e.kappa))
            }
            _ => Err(config_err(field, "give either kappa (with optional gamma) or both q and theta")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Standard deviations of `|N(0, σ·λ_max)|` draws, in units of the
    /// largest eigenvalue of the kinetic operator.
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub draws: usize,
    /// `V = c·λ_max·(ψ₀/max ψ₀)²` for the ground state `ψ₀`.
    #[serde(default)]
    pub ground_couplings: Vec<f64>,
    #[serde(default)]
    pub explicit: Vec<Vec<f64>>,
}

impl PotentialConfig {
    pub fn is_empty(&self) -> bool {
        (self.sigmas.is_empty() || self.draws == 0) && self.ground_couplings.is_empty() && self.explicit.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Clr,
    ClrBracket,
    WeakLt,
    LtMoments,
    MomentIdentity,
    Diamagnetic,
    MagneticClr,
    Liyau,
    GsrIdentity,
    HeatChain,
}

/// An explicit list, or `points` log-spaced values in `[lo, hi]`, scaled by
/// the operator's spectral scale (or its inverse, for times) when `relative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    List(Vec<f64>),
    Log {
        lo: f64,
        hi: f64,
        points: usize,
        #[serde(default)]
        relative: bool,
    },
}

impl GridConfig {
    fn validate(&self, field: &str) -> Result<()> {
        match self {
            Self::List(v) => {
                if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return Err(config_err(field, format!("grid values must be positive, got {x}")));
                }
                if v.is_empty() {
                    return Err(config_err(field, "grid is empty"));
                }
            }
            Self::Log { lo, hi, points, .. } => {
                if !(*lo > 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(config_err(field, format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
                }
                if *points == 0 {
                    return Err(config_err(field, "points must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Materialises the grid; `unit` multiplies a relative grid.
    pub fn resolve(&self, unit: f64) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Log { lo, hi, points, relative } => {
                let f = if *relative { unit } else { 1.0 };
                log_space(lo * f, hi * f, *points)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub id: String,
    pub axis: String,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Scenario supplying the operator, exponents and base potential.
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub trotter: Option<TrotterInstance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Coupling,
    Flux,
    Tau,
    TrotterN,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "coupling" => Some(Self::Coupling),
            "flux" => Some(Self::Flux),
            "tau" => Some(Self::Tau),
            "trotter_n" => Some(Self::TrotterN),
            _ => None,
        }
    }
}

/// Small explicit instance for the path-sum sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterInstance {
    pub form: Vec<Vec<f64>>,
    #[serde(default)]
    pub measure: Option<Vec<f64>>,
    pub potential: Vec<f64>,
    pub profile: ProfileFunction,
}

fn finite_positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl ConfigFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        let mut ids = BTreeSet::new();
        for (i, sc) in self.scenarios.iter().enumerate() {
            let at = format!("scenarios[{i}]");
            if sc.id.is_empty() {
                return Err(config_err(format!("{at}.id"), "scenario id must be nonempty"));
            }
            if !ids.insert(sc.id.as_str()) {
                return Err(config_err(format!("{at}.id"), format!("duplicate scenario id `{}`", sc.id)));
            }
            sc.validate(&at)?;
        }
        let mut sweep_ids = BTreeSet::new();
        for (i, sw) in self.sweeps.iter().enumerate() {
            let at = format!("sweeps[{i}]");
            if !sweep_ids.insert(sw.id.as_str()) {
                return Err(config_err(format!("{at}.id"), format!("duplicate sweep id `{}`", sw.id)));
            }
            self.validate_sweep(sw, &at)?;
        }
        Ok(())
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioConfig> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    fn validate_sweep(&self, sw: &SweepConfig, at: &str) -> Result<()> {
        let axis = SweepAxis::parse(&sw.axis).ok_or_else(|| {
            config_err(format!("{at}.axis"), format!("unknown axis `{}`; expected coupling, flux, tau or trotter_n", sw.axis))
        })?;
        if let Some(x) = sw.values.iter().find(|x| !x.is_finite()) {
            return Err(config_err(format!("{at}.values"), format!("non-finite value {x}")));
        }
        if axis == SweepAxis::TrotterN {
            let inst = sw.trotter.as_ref().ok_or_else(|| config_err(format!("{at}.trotter"), "trotter_n needs an instance"))?;
            if let Some(x) = sw.values.iter().find(|x| !(**x >= 1.0 && x.fract() == 0.0)) {
                return Err(config_err(format!("{at}.values"), format!("step counts must be positive integers, got {x}")));
            }
            let n = inst.potential.len();
            if n == 0 || inst.form.len() != n || inst.form.iter().any(|r| r.len() != n) {
                return Err(config_err(format!("{at}.trotter.form"), "form must be square and match the potential length"));
            }
            if inst.measure.as_ref().is_some_and(|m| m.len() != n) {
                return Err(config_err(format!("{at}.trotter.measure"), "measure length must match the potential"));
            }
            return inst.profile.validate().map_err(|e| config_err(format!("{at}.trotter.profile"), e.to_string()));
        }
        let id = sw.scenario.as_deref().ok_or_else(|| config_err(format!("{at}.scenario"), "this axis needs a scenario"))?;
        let sc = self
            .scenario(id)
            .ok_or_else(|| config_err(format!("{at}.scenario"), format!("no scenario with id `{id}`")))?;
        if sc.potentials.is_empty() {
            return Err(config_err(format!("{at}.scenario"), "the scenario defines no potential to sweep"));
        }
        let (gamma, kappa) = sc.exponents.gamma_kappa(&format!("{at}.scenario.exponents"))?;
        match axis {
            SweepAxis::Coupling if !(kappa > 1.0) => {
                Err(config_err(format!("{at}.scenario"), format!("coupling sweep compares with CLR, needs kappa > 1, got {kappa}")))
            }
            SweepAxis::Coupling => {
                if let Some(c) = sw.values.iter().find(|c| **c < 0.0) {
                    return Err(config_err(format!("{at}.values"), format!("couplings must be nonnegative, got {c}")));
                }
                Ok(())
            }
            SweepAxis::Flux => {
                if !(kappa > 1.0) {
                    return Err(config_err(format!("{at}.scenario"), format!("flux sweep needs kappa > 1, got {kappa}")));
                }
                if sc.lattice.extents.len() < 2 {
                    return Err(config_err(format!("{at}.scenario"), "flux sweep needs a lattice of dimension >= 2"));
                }
                Ok(())
            }
            SweepAxis::Tau => {
                if !(gamma + kappa > 1.0) {
                    return Err(config_err(format!("{at}.scenario"), "tau sweep needs gamma + kappa > 1"));
                }
                if let Some(t) = sw.values.iter().find(|t| !(**t > 0.0)) {
                    return Err(config_err(format!("{at}.values"), format!("energies must be positive, got {t}")));
                }
                Ok(())
            }
            SweepAxis::TrotterN => unreachable!(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self, at: &str) -> Result<()> {
        let lat = &self.lattice;
        if lat.extents.is_empty() || lat.extents.contains(&0) {
            return Err(config_err(format!("{at}.lattice.extents"), "extents must be a nonempty list of positive integers"));
        }
        if !finite_positive(lat.spacing) {
            return Err(config_err(format!("{at}.lattice.spacing"), format!("spacing must be positive, got {}", lat.spacing)));
        }
        if let Some(e) = lat.exclusions.iter().find(|e| e.len() != lat.extents.len()) {
            return Err(config_err(format!("{at}.lattice.exclusions"), format!("exclusion {e:?} has the wrong dimension")));
        }
        let sites: usize = lat.extents.iter().product::<usize>().saturating_sub(lat.exclusions.len());
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(config_err(format!("{at}.shift"), format!("shift must be nonnegative, got {}", self.shift)));
        }
        let op = format!("{at}.operator");
        match &self.operator {
            OperatorConfig::Laplacian => {}
            OperatorConfig::Fractional { s } => {
                if !(*s > 0.0 && *s <= 1.0) {
                    return Err(config_err(format!("{op}.s"), format!("order must lie in (0, 1], got {s}")));
                }
            }
            OperatorConfig::Magnetic { flux, phases, phase_seed } => {
                let given = flux.is_some() as u8 + phases.is_some() as u8 + phase_seed.is_some() as u8;
                if given != 1 {
                    return Err(config_err(op, "give exactly one of flux, phases, phase_seed"));
                }
                if flux.is_some() && lat.extents.len() < 2 {
                    return Err(config_err(format!("{op}.flux"), "plaquette flux needs dimension >= 2"));
                }
                if flux.is_some_and(|f| !f.is_finite()) {
                    return Err(config_err(format!("{op}.flux"), "flux must be finite"));
                }
            }
            OperatorConfig::Periodic { w } => {
                if lat.boundary != Boundary::Periodic {
                    return Err(config_err(format!("{at}.lattice.boundary"), "periodic family needs a periodic lattice"));
                }
                if w.len() != sites {
                    return Err(config_err(format!("{op}.w"), format!("expected {sites} values, got {}", w.len())));
                }
            }
            OperatorConfig::Hardy { s, coupling, origin } => {
                if !(*s > 0.0 && *s <= 1.0) {
                    return Err(config_err(format!("{op}.s"), format!("order must lie in (0, 1], got {s}")));
                }
                if !(lat.extents.len() as f64 > 2.0 * s) {
                    return Err(config_err(format!("{op}.s"), format!("need d > 2s, got d={}", lat.extents.len())));
                }
                if coupling.is_some_and(|c| !(c >= 0.0 && c.is_finite())) {
                    return Err(config_err(format!("{op}.coupling"), "coupling must be nonnegative"));
                }
                if origin.as_ref().is_some_and(|o| o.len() != lat.extents.len()) {
                    return Err(config_err(format!("{op}.origin"), "origin has the wrong dimension"));
                }
            }
        }

        let ex = format!("{at}.exponents");
        let (gamma, kappa) = self.exponents.gamma_kappa(&ex)?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(config_err(format!("{ex}.kappa"), format!("kappa must be positive, got {kappa}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(config_err(format!("{ex}.gamma"), format!("gamma must be nonnegative, got {gamma}")));
        }
        for check in &self.checks {
            let needs_clr = matches!(
                check,
                CheckKind::Clr | CheckKind::ClrBracket | CheckKind::MagneticClr | CheckKind::Liyau | CheckKind::HeatChain
            );
            if needs_clr && !(kappa > 1.0) {
                return Err(config_err(
                    format!("{ex}.kappa"),
                    format!("check `{}` needs kappa > 1, got {kappa}", check_name(*check)),
                ));
            }
            match check {
                CheckKind::WeakLt | CheckKind::LtMoments if !(gamma + kappa > 1.0) => {
                    return Err(config_err(ex, format!("check `{}` needs gamma + kappa > 1", check_name(*check))));
                }
                CheckKind::LtMoments | CheckKind::MomentIdentity => match self.exponents.gamma_tilde {
                    None => {
                        return Err(config_err(format!("{ex}.gamma_tilde"), format!("check `{}` needs gamma_tilde", check_name(*check))))
                    }
                    Some(gt) if !(gt > gamma) && *check == CheckKind::LtMoments => {
                        return Err(config_err(format!("{ex}.gamma_tilde"), format!("need gamma_tilde > gamma, got {gt} <= {gamma}")))
                    }
                    Some(gt) if !(gt > 0.0 && gt.is_finite()) => {
                        return Err(config_err(format!("{ex}.gamma_tilde"), format!("gamma_tilde must be positive, got {gt}")))
                    }
                    _ => {}
                },
                CheckKind::Diamagnetic | CheckKind::MagneticClr if !matches!(self.operator, OperatorConfig::Magnetic { .. }) => {
                    return Err(config_err(
                        format!("{at}.checks"),
                        format!("check `{}` needs the magnetic family", check_name(*check)),
                    ));
                }
                CheckKind::GsrIdentity if !matches!(self.operator, OperatorConfig::Periodic { .. }) => {
                    return Err(config_err(format!("{at}.checks"), "check `gsr_identity` needs the periodic family"));
                }
                _ => {}
            }
        }

        let pot = &self.potentials;
        if let Some(s) = pot.sigmas.iter().find(|s| !finite_positive(**s)) {
            return Err(config_err(format!("{at}.potentials.sigmas"), format!("sigma must be positive, got {s}")));
        }
        if let Some(c) = pot.ground_couplings.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
            return Err(config_err(format!("{at}.potentials.ground_couplings"), format!("coupling must be nonnegative, got {c}")));
        }
        for (j, v) in pot.explicit.iter().enumerate() {
            let f = format!("{at}.potentials.explicit[{j}]");
            if v.len() != sites {
                return Err(config_err(f, format!("expected {sites} values, got {}", v.len())));
            }
            if let Some(x) = v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                return Err(config_err(f, format!("potential values must be nonnegative, got {x}")));
            }
        }
        for (name, grid) in [("tau_grid", &self.tau_grid), ("s_grid", &self.s_grid), ("t_grid", &self.t_grid)] {
            if let Some(g) = grid {
                g.validate(&format!("{at}.{name}"))?;
            }
        }
        if self.sobolev_restarts == Some(0) {
            return Err(config_err(format!("{at}.sobolev_restarts"), "need at least one restart"));
        }
        Ok(())
    }
}

pub fn check_name(c: CheckKind) -> &'static str {
    match c {
        CheckKind::Clr => "clr",
        CheckKind::ClrBracket => "clr_bracket",
        CheckKind::WeakLt => "weak_lt",
        CheckKind::LtMoments => "lt_moments",
        CheckKind::MomentIdentity => "moment_identity",
        CheckKind::Diamagnetic => "diamagnetic",
        CheckKind::MagneticClr => "magnetic_clr",
        CheckKind::Liyau => "liyau",
        CheckKind::GsrIdentity => "gsr_identity",
        CheckKind::HeatChain => "heat_chain",
    }
}
