//! The Sobolev ⇒ Nash ⇒ heat-kernel chain, checked numerically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::linalg::Csr;
use crate::operators::KineticOperator;
use crate::quad::{golden_section, log_space};
use crate::spectra::heat_kernel_diagonal;

#[derive(Debug, Clone, Serialize)]
pub struct NashReport {
    pub samples: usize,
    /// Smallest `(lhs − rhs)/rhs` seen.
    pub min_relative_slack: f64,
    /// Both sides at the witness, form side first.
    pub witness_sides: [f64; 2],
    #[serde(skip)]
    pub witness: Vec<f64>,
}

/// Samples `t[u]^{q/2(q−1)} ‖u‖₁^{(q−2)/(q−1)} >= S^{q/2(q−1)} ‖u‖₂²` on random
/// positive and signed `u`, plus every site indicator.
pub fn nash_check(t: &KineticOperator, q: f64, s: f64, samples: usize, seed: u64) -> Result<NashReport> {
    if !(q > 2.0) {
        return Err(domain(format!("Nash check needs q > 2, got {q}")));
    }
    let form = Csr::from_dense(t.form());
    let m = t.measure();
    let a = q / (2.0 * (q - 1.0));
    let b = (q - 2.0) / (q - 1.0);
    let sides = |u: &[f64]| {
        let l1: f64 = u.iter().zip(m).map(|(x, w)| w * x.abs()).sum();
        let l2: f64 = u.iter().zip(m).map(|(x, w)| w * x * x).sum();
        [form.quadratic(u).max(0.0).powf(a) * l1.powf(b), s.powf(a) * l2]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.len();
    let mut report = NashReport {
        samples: 0,
        min_relative_slack: f64::INFINITY,
        witness_sides: [0.0; 2],
        witness: Vec::new(),
    };
    let consider = |u: Vec<f64>, report: &mut NashReport| {
        let [lhs, rhs] = sides(&u);
        let sl = (lhs - rhs) / rhs;
        report.samples += 1;
        if sl < report.min_relative_slack {
            report.min_relative_slack = sl;
            report.witness_sides = [lhs, rhs];
            report.witness = u;
        }
    };
    for x in 0..n {
        let mut u = vec![0.0; n];
        u[x] = 1.0;
        consider(u, &mut report);
    }
    for k in 0..samples {
        let u: Vec<f64> = if k % 2 == 0 {
            (0..n).map(|_| rng.random::<f64>()).collect()
        } else {
            (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };
        consider(u, &mut report);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatBoundReport {
    pub kappa: f64,
    /// `sup_s s^κ ‖e^{−sT}‖_{1→∞}`.
    pub k_measured: f64,
    pub s_at_sup: f64,
    /// `(κ/S)^κ`.
    pub k_bound: f64,
    pub passed: bool,
    /// Smallest `(rhs − lhs)/rhs` of `‖e^{−sT}‖²_{1→2} <= (κ/2S)^κ s^{−κ}` on the grid.
    pub one_to_two_min_slack: f64,
    /// Time and both sides of the 1→2 bound where its slack is smallest.
    pub one_to_two_worst: [f64; 3],
    pub one_to_two_passed: bool,
    pub grid_points: usize,
}

/// Default time grid: log-spaced across the range where `s^κ‖e^{−sT}‖` can peak.
pub fn heat_time_grid(t: &KineticOperator, kappa: f64, points: usize) -> Vec<f64> {
    let scale = t.spectral_scale();
    let lmin = t.lambda_min().max(1e-12 * scale);
    log_space(1e-4 / scale, (kappa + 40.0) / lmin, points)
}

pub fn heat_bound_check(t: &KineticOperator, kappa: f64, s: f64, grid: Option<&[f64]>) -> Result<HeatBoundReport> {
    if !(s > 0.0) {
        return Err(domain("heat bound needs S > 0; the operator has a kernel"));
    }
    if !(kappa > 0.0) {
        return Err(domain(format!("heat exponent must be positive, got {kappa}")));
    }
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = heat_time_grid(t, kappa, 200);
            &owned
        }
    };
    let sup_norm = |time: f64| -> f64 {
        heat_kernel_diagonal(t, time).unwrap().into_iter().fold(f64::NEG_INFINITY, f64::max)
    };
    let k_bound = (kappa / s).powf(kappa);
    let c12 = (kappa / (2.0 * s)).powf(kappa);
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    let mut min12 = f64::INFINITY;
    let mut worst12 = [0.0; 3];
    for (i, &time) in grid.iter().enumerate() {
        let one = sup_norm(time);
        let weighted = time.powf(kappa) * one;
        if weighted > best.0 {
            best = (weighted, time, i);
        }
        let lhs = sup_norm(2.0 * time);
        let rhs = c12 * time.powf(-kappa);
        let slack = (rhs - lhs) / rhs;
        if slack < min12 {
            min12 = slack;
            worst12 = [time, lhs, rhs];
        }
    }
    let (mut k_measured, mut s_at_sup, i) = best;
    if grid.len() >= 3 {
        let lo = grid[i.saturating_sub(1)].ln();
        let hi = grid[(i + 1).min(grid.len() - 1)].ln();
        let (x, v) = golden_section(|x| -(x * kappa).exp() * sup_norm(x.exp()), lo, hi, 1e-10);
        if -v > k_measured {
            k_measured = -v;
            s_at_sup = x.exp();
        }
    }
    Ok(HeatBoundReport {
        kappa,
        k_measured,
        s_at_sup,
        k_bound,
        passed: k_measured <= k_bound * (1.0 + 1e-8),
        one_to_two_min_slack: min12,
        one_to_two_worst: worst12,
        one_to_two_passed: min12 >= -1e-9,
        grid_points: grid.len(),
    })
}
