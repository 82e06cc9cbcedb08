//! Sobolev, Nash and heat constants, and the closed-form constants and
//! brackets connecting them to eigenvalue bounds.

mod closed_form;
mod heat_chain;
mod sobolev;

use serde::Serialize;

pub use closed_form::{
    aizenman_lieb_expression, aizenman_lieb_factor, clr_bounds_from_s, hardy_constant, interpolation_factor,
    lieb_bound_from_k, lieb_objective, ltw_bounds_from_s, tau_min_value, AizenmanLieb, Bracket, LiebBound,
    TauMin,
};
pub use heat_chain::{heat_bound_check, heat_time_grid, nash_check, HeatBoundReport, NashReport};
pub use sobolev::{
    sobolev_certificate, sobolev_constant, sobolev_interp_constant, tau_scaled, InterpolationConstant,
    MinimizationTrace, SobolevOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Minimized,
    Measured,
    Configured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Named constants in insertion order. Bracket endpoints are stored as
/// `<name>_lower` and `<name>_upper`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstantsBundle {
    pub entries: Vec<ConstantEntry>,
}

impl ConstantsBundle {
    pub fn push(&mut self, name: &str, value: f64, provenance: Provenance, note: impl Into<String>) {
        self.entries.push(ConstantEntry { name: name.to_string(), value, provenance, note: note.into() });
    }

    pub fn push_bracket(&mut self, name: &str, b: Bracket, provenance: Provenance) {
        self.push(&format!("{name}_lower"), b.lower, provenance, "");
        self.push(&format!("{name}_upper"), b.upper, provenance, "");
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    /// Every entry positive and every bracket ordered.
    pub fn is_consistent(&self) -> bool {
        let positive = self.entries.iter().all(|e| e.value > 0.0 && e.value.is_finite());
        let ordered = self.entries.iter().filter_map(|e| e.name.strip_suffix("_lower")).all(|base| {
            match (self.get(&format!("{base}_lower")), self.get(&format!("{base}_upper"))) {
                (Some(lo), Some(hi)) => lo <= hi,
                _ => false,
            }
        });
        positive && ordered
    }
}
