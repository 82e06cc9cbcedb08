//! Assembles operators, spectra and constants into verdicts for every
//! inequality the lab knows about.

mod checks;
mod config;
mod report;
mod scenario;
mod sweep;

pub use checks::{
    adversarial_potential, clr_bracket, liyau_times, moment_identity, verify_clr, verify_diamagnetic,
    verify_diamagnetic_form, verify_gsr_identity, verify_heat_bound, verify_kernel_positivity, verify_liyau_trace,
    verify_lt_moments, verify_magnetic_clr, verify_nash, verify_weak_lt, Instance, BRACKET_TOL, GSR_TOL, HEAT_TOL,
    KERNEL_FLOOR, MOMENT_TOL,
};
pub use config::{
    check_name, CheckKind, ConfigFile, ExponentsConfig, GridConfig, LatticeConfig, OperatorConfig, PotentialConfig,
    ScenarioConfig, SweepAxis, SweepConfig, TrotterInstance, SCHEMA_VERSION,
};
pub use report::{AssumptionStatus, TheoremTag, Verdict, VerdictCounts, VerificationReport, MARGIN_TOL};
pub use scenario::{
    build_scenario, derive_seed, run_config, run_scenario, scenario_potentials, scenario_seed, BuiltScenario,
    ScenarioOutcome, ADVERSARIAL_EPS, CERTIFICATE_SAMPLES,
};
pub use sweep::{run_sweep, trotter_operator, SweepTable};
