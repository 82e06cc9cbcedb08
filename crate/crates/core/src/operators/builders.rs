use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{KineticOperator, MagneticKineticOperator, PSD_TOL};
use crate::error::{domain, LabError, Result};
use crate::functional::hardy_constant;
use crate::lattice::LatticeSpace;

/// Nearest-neighbour Laplacian with `t[u] = Σ_bonds h^{d-2}|u_x - u_y|²`
/// plus one `h^{d-2}|u_x|²` per Dirichlet ghost slot.
pub fn build_laplacian(space: &Arc<LatticeSpace>) -> KineticOperator {
    let n = space.len();
    let mut form = DMatrix::zeros(n, n);
    for e in space.edges() {
        if e.a == e.b {
            continue;
        }
        form[(e.a, e.a)] += e.weight;
        form[(e.b, e.b)] += e.weight;
        form[(e.a, e.b)] -= e.weight;
        form[(e.b, e.a)] -= e.weight;
    }
    let ghost_weight = space.spacing().powi(space.dim() as i32 - 2);
    for (x, &g) in space.ghosts().iter().enumerate() {
        form[(x, x)] += g as f64 * ghost_weight;
    }
    KineticOperator::from_form(space.clone(), form, space.measure().to_vec(), "laplacian")
        .expect("laplacian form is symmetric")
}

/// `f(T)` through the full eigendecomposition. Eigenvalues within the PSD
/// tolerance below zero are clamped to zero before `f` is applied.
pub fn build_function_of_operator<F: Fn(f64) -> f64>(
    t: &KineticOperator,
    f: F,
    label: &str,
) -> Result<KineticOperator> {
    if !t.is_psd() {
        return Err(domain(format!(
            "function calculus needs a nonnegative operator, smallest eigenvalue {}",
            t.lambda_min()
        )));
    }
    let e = t.eigen();
    let f0 = f(0.0);
    if !(f0 >= 0.0 && f0.is_finite()) {
        return Err(domain(format!("f(0) = {f0} is not a nonnegative number")));
    }
    for &lam in &e.values {
        let y = f(lam.max(0.0));
        if !(y >= 0.0 && y.is_finite()) {
            return Err(domain(format!("f({lam}) = {y} is negative or not finite")));
        }
    }
    let sym = e.reconstruct(|lam| f(lam.max(0.0)));
    let root: Vec<f64> = t.measure().iter().map(|m| m.sqrt()).collect();
    let form = DMatrix::from_fn(t.len(), t.len(), |i, j| sym[(i, j)] * root[i] * root[j]);
    KineticOperator::from_form(t.space().clone(), form, t.measure().to_vec(), label)
}

/// `T^s` for `0 < s <= 1`.
pub fn build_fractional_laplacian(t: &KineticOperator, s: f64) -> Result<KineticOperator> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(domain(format!("fractional order must lie in (0, 1], got {s}")));
    }
    if s == 1.0 {
        return Ok(t.clone());
    }
    build_function_of_operator(t, |e| e.powf(s), &format!("fractional(s={s})"))
}

/// Peierls-substituted Laplacian, `t_A[u] = Σ_bonds h^{d-2}|u_a - e^{iθ}u_b|²`
/// with one phase per entry of [`LatticeSpace::edges`].
pub fn build_magnetic_laplacian(
    space: &Arc<LatticeSpace>,
    phases: &[f64],
) -> Result<MagneticKineticOperator> {
    if phases.len() != space.edges().len() {
        return Err(LabError::Length { expected: space.edges().len(), got: phases.len() });
    }
    if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
        return Err(LabError::NonFinite { index: i });
    }
    let phases: Vec<f64> = phases.iter().map(|p| p.rem_euclid(TAU)).collect();
    let n = space.len();
    let mut form = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (e, &theta) in space.edges().iter().zip(&phases) {
        let w = e.weight;
        if e.a == e.b {
            form[(e.a, e.a)] += Complex64::new(w * (2.0 - 2.0 * theta.cos()), 0.0);
            continue;
        }
        let hop = Complex64::from_polar(w, theta);
        form[(e.a, e.a)] += w;
        form[(e.b, e.b)] += w;
        form[(e.a, e.b)] -= hop;
        form[(e.b, e.a)] -= hop.conj();
    }
    let ghost_weight = space.spacing().powi(space.dim() as i32 - 2);
    for (x, &g) in space.ghosts().iter().enumerate() {
        form[(x, x)] += Complex64::new(g as f64 * ghost_weight, 0.0);
    }
    MagneticKineticOperator::new(space.clone(), form, phases)
}

/// Phases for a uniform flux per plaquette in the plane of axes 0 and 1:
/// Landau gauge `θ = flux·x₀` on axis-1 bonds, and a twist `-flux·L₀·x₁` on
/// the bonds crossing a periodic axis-0 seam. Every plaquette then carries
/// `flux`, except the seam corner on a doubly periodic torus, which carries
/// the remainder `flux(1 - L₀L₁)` modulo 2π (equal to `flux` when the total
/// flux is quantised). Bonds along any further axes get zero phase.
pub fn uniform_flux_phases(space: &LatticeSpace, flux: f64) -> Result<Vec<f64>> {
    if space.dim() < 2 {
        return Err(domain("uniform plaquette flux needs at least two dimensions"));
    }
    let l0 = space.extents()[0] as f64;
    Ok(space
        .edges()
        .iter()
        .map(|e| {
            let c = &space.sites()[e.a];
            let theta = match e.axis {
                1 => flux * c[0] as f64,
                0 if e.wraps => -flux * l0 * c[1] as f64,
                _ => 0.0,
            };
            theta.rem_euclid(TAU)
        })
        .collect())
}

/// Discrete Hardy-type operator `T^s - C |x|^{-2s}`, built as a surrogate:
/// positivity is measured, not assumed.
#[derive(Debug, Clone)]
pub struct HardyOperator {
    pub operator: KineticOperator,
    pub order: f64,
    pub coupling: f64,
    pub lambda_min: f64,
    pub psd: bool,
    /// `max(0, -λ_min)`; the shift needed before theorems can be applied.
    pub deficit: f64,
}

/// `origin` is in lattice coordinates and defaults to the grid centre; no
/// site may sit on it. `coupling` defaults to the sharp Hardy constant.
pub fn build_hardy_operator(
    laplacian: &KineticOperator,
    s: f64,
    origin: Option<&[f64]>,
    coupling: Option<f64>,
) -> Result<HardyOperator> {
    let space = laplacian.space().clone();
    let d = space.dim();
    if !(d as f64 > 2.0 * s) {
        return Err(domain(format!("Hardy operator needs d > 2s, got d={d}, s={s}")));
    }
    let coupling = match coupling {
        Some(c) => c,
        None => hardy_constant(s, d)?,
    };
    let centre: Vec<f64> = match origin {
        Some(o) if o.len() == d => o.to_vec(),
        Some(o) => return Err(LabError::Length { expected: d, got: o.len() }),
        None => space.extents().iter().map(|&e| (e as f64 - 1.0) / 2.0).collect(),
    };
    let base = build_fractional_laplacian(laplacian, s)?;
    let mut form = base.form().clone();
    for x in 0..space.len() {
        let r = space.distance_from(x, &centre);
        if r < 1e-12 {
            return Err(domain(format!("site {x} sits on the Hardy origin; exclude it")));
        }
        form[(x, x)] -= coupling * r.powf(-2.0 * s) * laplacian.measure()[x];
    }
    let operator = KineticOperator::from_form(
        space,
        form,
        laplacian.measure().to_vec(),
        format!("hardy(s={s})"),
    )?;
    let lambda_min = operator.lambda_min();
    Ok(HardyOperator {
        order: s,
        coupling,
        lambda_min,
        psd: lambda_min >= -PSD_TOL,
        deficit: (-lambda_min).max(0.0),
        operator,
    })
}
