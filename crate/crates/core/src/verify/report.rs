use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::functional::Provenance;
use crate::spectra::TieWarning;

/// Relative tolerance below which a negative margin still counts as a pass.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TheoremTag {
    #[serde(rename = "CLR")]
    Clr,
    #[serde(rename = "clrBracket")]
    ClrBracket,
    #[serde(rename = "weakLT")]
    WeakLt,
    #[serde(rename = "LTmoment")]
    LtMoment,
    #[serde(rename = "momentIdentity")]
    MomentIdentity,
    #[serde(rename = "diamagnetic")]
    Diamagnetic,
    #[serde(rename = "magneticCLR")]
    MagneticClr,
    #[serde(rename = "liyauTrace")]
    LiyauTrace,
    #[serde(rename = "gsrIdentity")]
    GsrIdentity,
    #[serde(rename = "heatBound")]
    HeatBound,
    #[serde(rename = "nash")]
    Nash,
    #[serde(rename = "kernelPositivity")]
    KernelPositivity,
}

impl TheoremTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Clr => "CLR",
            Self::ClrBracket => "clrBracket",
            Self::WeakLt => "weakLT",
            Self::LtMoment => "LTmoment",
            Self::MomentIdentity => "momentIdentity",
            Self::Diamagnetic => "diamagnetic",
            Self::MagneticClr => "magneticCLR",
            Self::LiyauTrace => "liyauTrace",
            Self::GsrIdentity => "gsrIdentity",
            Self::HeatBound => "heatBound",
            Self::Nash => "nash",
            Self::KernelPositivity => "kernelPositivity",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// An assumption of the theorem is not met by the instance.
    NotApplicable,
    /// The right side is infinite because the constant vanishes.
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not_applicable",
            Self::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionStatus {
    pub passed: bool,
    /// One-line Beurling–Deny summary, or the reason the hypotheses fail.
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<Provenance>,
    /// Constant added to the operator before any check ran.
    pub shift: f64,
}

impl AssumptionStatus {
    pub fn unchecked() -> Self {
        Self { passed: true, detail: "not required".into(), constant: None, shift: 0.0 }
    }

    pub fn failed(detail: impl Into<String>) -> Self {
        Self { passed: false, detail: detail.into(), constant: None, shift: 0.0 }
    }

    pub fn label(&self) -> String {
        let head = if self.passed { "passed" } else { "failed" };
        match self.constant {
            Some(p) => format!("{head};S={}", provenance_str(p)),
            None => head.to_string(),
        }
    }
}

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::ClosedForm => "closed_form",
        Provenance::Minimized => "minimized",
        Provenance::Measured => "measured",
        Provenance::Configured => "configured",
    }
}

/// One inequality `lhs <= rhs` evaluated on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario_id: String,
    pub theorem_tag: TheoremTag,
    pub check: String,
    /// Which potential or sample family the check ran on.
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub pass: bool,
    pub assumption_status: AssumptionStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tie_warnings: Vec<TieWarning>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub observations: BTreeMap<String, f64>,
    #[serde(skip)]
    scale_floor: f64,
    #[serde(skip)]
    vacuous: bool,
}

impl VerificationReport {
    pub fn new(tag: TheoremTag, check: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let mut r = Self {
            scenario_id: String::new(),
            theorem_tag: tag,
            check: check.into(),
            instance: String::new(),
            lhs,
            rhs,
            margin: rhs - lhs,
            tolerance: MARGIN_TOL,
            verdict: Verdict::Pass,
            pass: true,
            assumption_status: AssumptionStatus::unchecked(),
            tie_warnings: Vec::new(),
            observations: BTreeMap::new(),
            scale_floor: 0.0,
            vacuous: false,
        };
        r.settle();
        r
    }

    /// A check whose constant vanishes; `lhs` is still recorded.
    pub fn vacuous(tag: TheoremTag, check: impl Into<String>, lhs: f64) -> Self {
        let mut r = Self::new(tag, check, lhs, 0.0);
        r.vacuous = true;
        r.margin = 0.0;
        r.settle();
        r
    }

    /// Margins for quantities normalised elsewhere are compared against
    /// `tolerance·max(|rhs|, floor)`.
    pub fn with_scale_floor(mut self, floor: f64) -> Self {
        self.scale_floor = floor;
        self.settle();
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.settle();
        self
    }

    pub fn with_scenario(mut self, id: &str) -> Self {
        self.scenario_id = id.to_string();
        self
    }

    pub fn with_instance(mut self, instance: &str) -> Self {
        self.instance = instance.to_string();
        self
    }

    /// Installs the instance's assumption status. A failure recorded by the
    /// check itself is kept.
    pub fn with_assumptions(mut self, status: AssumptionStatus) -> Self {
        if self.assumption_status.passed {
            self.assumption_status = status;
        } else {
            self.assumption_status.constant = status.constant;
            self.assumption_status.shift = status.shift;
        }
        self.settle();
        self
    }

    pub fn with_ties(mut self, ties: impl IntoIterator<Item = TieWarning>) -> Self {
        self.tie_warnings.extend(ties);
        self
    }

    pub fn observe(mut self, key: &str, value: f64) -> Self {
        self.observations.insert(key.to_string(), value);
        self
    }

    /// `rhs − lhs >= −tolerance·max(|rhs|, floor)`.
    pub fn margin_ok(&self) -> bool {
        self.margin >= -self.tolerance * self.rhs.abs().max(self.scale_floor)
    }

    fn settle(&mut self) {
        self.verdict = if !self.assumption_status.passed {
            Verdict::NotApplicable
        } else if self.vacuous {
            Verdict::Vacuous
        } else if self.margin_ok() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.pass = self.verdict == Verdict::Pass;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    pub vacuous: usize,
}

impl VerdictCounts {
    pub fn tally<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>) -> Self {
        let mut c = Self::default();
        for r in reports {
            c.total += 1;
            match r.verdict {
                Verdict::Pass => c.pass += 1,
                Verdict::Fail => c.fail += 1,
                Verdict::NotApplicable => c.not_applicable += 1,
                Verdict::Vacuous => c.vacuous += 1,
            }
        }
        c
    }
}
