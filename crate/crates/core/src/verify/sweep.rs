use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::checks::Instance;
use super::config::{ConfigFile, ScenarioConfig, SweepAxis, SweepConfig, TrotterInstance};
use super::scenario::{build_scenario, derive_seed, scenario_potentials, scenario_seed};
use crate::error::{LabError, Result};
use crate::exponents::ExponentSet;
use crate::functional::{clr_bounds_from_s, ltw_bounds_from_s, sobolev_constant, sobolev_interp_constant, SobolevOptions};
use crate::lattice::{Boundary, LatticeSpace, Potential};
use crate::operators::{build_laplacian, build_magnetic_laplacian, uniform_flux_phases, KineticOperator};
use crate::spectra::{count_from_spectrum, trotter_trace, TrotterOptions};

/// One sweep as a numeric table; the first column is the axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub id: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn run_sweep(cfg: &ConfigFile, sw: &SweepConfig) -> Result<SweepTable> {
    let axis = SweepAxis::parse(&sw.axis)
        .ok_or_else(|| LabError::Config { field: "axis".into(), message: format!("unknown axis `{}`", sw.axis) })?;
    let names: &[&str] = match axis {
        SweepAxis::Coupling => &["coupling", "count", "integral", "clr_bound", "margin"],
        SweepAxis::Flux => &["flux", "magnetic_count", "nonmagnetic_count", "integral", "clr_bound", "margin"],
        SweepAxis::Tau => &["tau", "count", "weak_bound", "margin"],
        SweepAxis::TrotterN => &["n", "estimate", "exact", "relative_error", "convexity_bound"],
    };
    let mut table = SweepTable { id: sw.id.clone(), header: header(names), rows: Vec::new() };
    if sw.values.is_empty() {
        return Ok(table);
    }
    table.rows = match axis {
        SweepAxis::TrotterN => trotter_rows(sw.trotter.as_ref().expect("validated"), &sw.values)?,
        _ => {
            let id = sw.scenario.as_deref().expect("validated");
            let sc = cfg.scenario(id).expect("validated");
            scenario_rows(sc, axis, &sw.values, scenario_seed(sc, cfg.seed))?
        }
    };
    Ok(table)
}

fn scenario_rows(sc: &ScenarioConfig, axis: SweepAxis, values: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    let built = build_scenario(sc)?;
    let t = &built.operator;
    let (gamma, kappa) = sc.exponents.gamma_kappa("exponents")?;
    let (_, v0) = scenario_potentials(sc, t, seed)?.into_iter().next().expect("validated: a potential");
    let opts = SobolevOptions { seed: derive_seed(seed, "sobolev"), ..SobolevOptions::default() };
    let mut rows = Vec::with_capacity(values.len());
    match axis {
        SweepAxis::Coupling => {
            let s = sobolev_constant(t, 2.0 * kappa / (kappa - 1.0), &opts)?.value;
            let constant = if s > 0.0 { clr_bounds_from_s(s, kappa)?.upper } else { f64::INFINITY };
            for &c in values {
                let v = v0.scaled(c)?;
                let inst = Instance::new(t, &v)?;
                let n = inst.count(0.0).value as f64;
                let integral = inst.integral(kappa)?;
                let bound = constant * integral;
                rows.push(vec![c, n, integral, bound, bound - n]);
            }
        }
        SweepAxis::Flux => {
            let lat = &sc.lattice;
            let space = Arc::new(LatticeSpace::new(&lat.extents, lat.spacing, lat.boundary, &lat.exclusions)?);
            let plain = build_laplacian(&space).shifted(sc.shift);
            let s = sobolev_constant(&plain, 2.0 * kappa / (kappa - 1.0), &opts)?.value;
            let constant = if s > 0.0 { clr_bounds_from_s(s, kappa)?.upper } else { f64::INFINITY };
            let inst = Instance::new(&plain, &v0)?;
            let plain_count = inst.count(0.0).value as f64;
            let integral = inst.integral(kappa)?;
            for &flux in values {
                let ta = build_magnetic_laplacian(&space, &uniform_flux_phases(&space, flux)?)?.shifted(sc.shift);
                let n = count_from_spectrum(&ta.schrodinger_spectrum(&v0)?, 0.0).value as f64;
                let bound = constant * integral;
                rows.push(vec![flux, n, plain_count, integral, bound, bound - n]);
            }
        }
        SweepAxis::Tau => {
            let e = ExponentSet::from_gamma_kappa(gamma, kappa)?;
            let s = sobolev_interp_constant(t, e.q, e.theta, &opts)?.value;
            let l = if s > 0.0 { ltw_bounds_from_s(s, gamma, kappa)?.upper } else { f64::INFINITY };
            let inst = Instance::new(t, &v0)?;
            let integral = inst.integral(gamma + kappa)?;
            for &tau in values {
                let n = inst.count(tau).value as f64;
                let bound = l * tau.powf(-gamma) * integral;
                rows.push(vec![tau, n, bound, bound - n]);
            }
        }
        SweepAxis::TrotterN => unreachable!(),
    }
    Ok(rows)
}

/// Builds the operator of an explicit Trotter instance on a one-dimensional
/// carrier space of matching size.
pub fn trotter_operator(inst: &TrotterInstance) -> Result<(KineticOperator, Potential)> {
    let n = inst.potential.len();
    let space = Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Dirichlet, &[])?);
    let form = DMatrix::from_fn(n, n, |i, j| inst.form[i][j]);
    let measure = inst.measure.clone().unwrap_or_else(|| vec![1.0; n]);
    let t = KineticOperator::from_form(space, form, measure, "trotter-instance")?;
    Ok((t, Potential::new(inst.potential.clone())?))
}

fn trotter_rows(inst: &TrotterInstance, values: &[f64]) -> Result<Vec<Vec<f64>>> {
    let (t, v) = trotter_operator(inst)?;
    let opts = TrotterOptions::default();
    values
        .iter()
        .map(|&n| {
            let e = trotter_trace(&t, &v, &inst.profile, n as usize, &opts)?;
            Ok(vec![n, e.estimate, e.exact, e.relative_error, e.convexity_bound.unwrap_or(f64::NAN)])
        })
        .collect()
}
