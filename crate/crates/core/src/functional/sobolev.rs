//! Sobolev-type constants by minimising the scale-invariant quotient
//! `t[u]^θ ‖u‖₂^{2(1−θ)} / ‖u‖_q²` over grid functions.
//!
//! The logarithm of the quotient is minimised by Polak–Ribière conjugate
//! gradients with a derivative-based line search. Every quantity along a
//! search line is a low-degree polynomial in the step except the `L^q`
//! term, so each line search costs one sparse product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::functional::closed_form::interpolation_factor;
use crate::linalg::Csr;
use crate::operators::KineticOperator;
use crate::quad::{golden_section, log_space};

#[derive(Debug, Clone, Copy)]
pub struct SobolevOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iterations: 50_000, tolerance: 1e-10, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizationTrace {
    pub value: f64,
    #[serde(skip)]
    pub minimizer: Vec<f64>,
    pub restarts: usize,
    pub best_restart: usize,
    pub iterations: usize,
    /// `‖∇J(u)‖·‖u‖` at the reported minimiser, `J` the log-quotient.
    pub residual: f64,
}

struct Quotient<'a> {
    form: Csr,
    measure: &'a [f64],
    q: f64,
    theta: f64,
}

struct Line {
    ua: f64,
    da: f64,
    t: f64,
    um: f64,
    dm: f64,
    n2: f64,
}

impl<'a> Quotient<'a> {
    fn lq(&self, u: &[f64]) -> f64 {
        u.iter().zip(self.measure).map(|(x, m)| m * x.abs().powf(self.q)).sum()
    }

    fn n2(&self, u: &[f64]) -> f64 {
        u.iter().zip(self.measure).map(|(x, m)| m * x * x).sum()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let t = self.form.quadratic(u);
        let mut j = self.theta * t.ln() - 2.0 / self.q * self.lq(u).ln();
        if self.theta < 1.0 {
            j += (1.0 - self.theta) * self.n2(u).ln();
        }
        j
    }

    /// Log-quotient and its gradient; `au` receives `A u`.
    fn gradient(&self, u: &[f64], au: &mut [f64], g: &mut [f64]) -> f64 {
        self.form.mul_into(u, au);
        let t: f64 = u.iter().zip(au.iter()).map(|(a, b)| a * b).sum();
        let p = self.lq(u);
        let n2 = self.n2(u);
        for i in 0..u.len() {
            let m = self.measure[i];
            let x = u[i];
            g[i] = self.theta * 2.0 * au[i] / t - 2.0 * m * x.abs().powf(self.q - 2.0) * x / p;
            if self.theta < 1.0 {
                g[i] += (1.0 - self.theta) * 2.0 * m * x / n2;
            }
        }
        let mut j = self.theta * t.ln() - 2.0 / self.q * p.ln();
        if self.theta < 1.0 {
            j += (1.0 - self.theta) * n2.ln();
        }
        j
    }

    fn line(&self, u: &[f64], au: &[f64], d: &[f64], ad: &mut [f64]) -> Line {
        self.form.mul_into(d, ad);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mdot = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).zip(self.measure).map(|((x, y), m)| m * x * y).sum::<f64>()
        };
        Line {
            ua: dot(d, au),
            da: dot(d, ad),
            t: dot(u, au),
            um: mdot(u, d),
            dm: mdot(d, d),
            n2: mdot(u, u),
        }
    }

    /// `J(u + αd)` and its derivative in `α`.
    fn along(&self, l: &Line, u: &[f64], d: &[f64], alpha: f64) -> (f64, f64) {
        let t = l.t + 2.0 * alpha * l.ua + alpha * alpha * l.da;
        let dt = 2.0 * l.ua + 2.0 * alpha * l.da;
        let mut p = 0.0;
        let mut dp = 0.0;
        for i in 0..u.len() {
            let x = u[i] + alpha * d[i];
            let ax = x.abs();
            let r = ax.powf(self.q - 2.0);
            p += self.measure[i] * r * ax * ax;
            dp += self.measure[i] * self.q * r * x * d[i];
        }
        let mut j = self.theta * t.ln() - 2.0 / self.q * p.ln();
        let mut dj = self.theta * dt / t - 2.0 / self.q * dp / p;
        if self.theta < 1.0 {
            let n2 = l.n2 + 2.0 * alpha * l.um + alpha * alpha * l.dm;
            let dn2 = 2.0 * l.um + 2.0 * alpha * l.dm;
            j += (1.0 - self.theta) * n2.ln();
            dj += (1.0 - self.theta) * dn2 / n2;
        }
        (j, dj)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Run {
    value: f64,
    u: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn line_search(obj: &Quotient, l: &Line, u: &[f64], d: &[f64], j0: f64, slope0: f64, guess: f64) -> Option<(f64, f64)> {
    let mut lo = 0.0;
    let mut d_lo = slope0;
    let mut hi = guess;
    let (mut j_hi, mut d_hi) = obj.along(l, u, d, hi);
    let mut expansions = 0;
    while d_hi < 0.0 && j_hi.is_finite() && j_hi <= j0 && expansions < 60 {
        lo = hi;
        d_lo = d_hi;
        hi *= 2.0;
        let r = obj.along(l, u, d, hi);
        j_hi = r.0;
        d_hi = r.1;
        expansions += 1;
    }
    // shrink toward the stationary point of J along d
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..60 {
        let mid = if d_hi.is_finite() && d_hi > 0.0 && d_lo < 0.0 {
            let s = lo + (hi - lo) * (-d_lo) / (d_hi - d_lo);
            if s > lo + 0.05 * (hi - lo) && s < hi - 0.05 * (hi - lo) { s } else { 0.5 * (lo + hi) }
        } else {
            0.5 * (lo + hi)
        };
        let (jm, dm) = obj.along(l, u, d, mid);
        if jm.is_finite() && jm < best.0 {
            best = (jm, mid);
        }
        if jm.is_finite() && jm <= j0 + 1e-4 * mid * slope0 && dm.abs() <= 0.1 * slope0.abs() {
            return Some((mid, jm));
        }
        if !jm.is_finite() || jm > j0 || dm > 0.0 {
            hi = mid;
            d_hi = dm;
        } else {
            lo = mid;
            d_lo = dm;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    if best.0 < j0 {
        Some((best.1, best.0))
    } else {
        None
    }
}

fn minimise(obj: &Quotient, mut u: Vec<f64>, max_iter: usize, tol: f64) -> Run {
    let n = u.len();
    let mut au = vec![0.0; n];
    let mut ad = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut j = obj.gradient(&u, &mut au, &mut g);
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut g_old = g.clone();
    let mut step = 0.1 * norm(&u) / norm(&g).max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    let mut residual = norm(&g) * norm(&u);
    let mut stalls = 0;
    while iterations < max_iter && residual > tol {
        iterations += 1;
        let mut slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            d = g.iter().map(|x| -x).collect();
            slope = -g.iter().map(|x| x * x).sum::<f64>();
        }
        let l = obj.line(&u, &au, &d, &mut ad);
        match line_search(obj, &l, &u, &d, j, slope, step.max(f64::MIN_POSITIVE)) {
            Some((alpha, _)) => {
                for i in 0..n {
                    u[i] += alpha * d[i];
                }
                step = 2.0 * alpha;
                stalls = 0;
            }
            None => {
                stalls += 1;
                if stalls >= 2 {
                    break;
                }
                d = g.iter().map(|x| -x).collect();
                step = 0.1 * norm(&u) / norm(&g).max(f64::MIN_POSITIVE);
                continue;
            }
        }
        // J is scale invariant; keep ‖u‖ near one for the line search guess
        let un = norm(&u);
        if !(0.5..=2.0).contains(&un) {
            u.iter_mut().for_each(|x| *x /= un);
            step /= un;
        }
        g_old.copy_from_slice(&g);
        j = obj.gradient(&u, &mut au, &mut g);
        if !(0.5..=2.0).contains(&un) {
            // gradients at different scales are not comparable, restart
            d = g.iter().map(|x| -x).collect();
        } else {
            let num: f64 = g.iter().zip(&g_old).map(|(a, b)| a * (a - b)).sum();
            let den: f64 = g_old.iter().map(|x| x * x).sum();
            let beta = if iterations % n.max(50) == 0 { 0.0 } else { (num / den).max(0.0) };
            for i in 0..n {
                d[i] = -g[i] + beta * d[i];
            }
        }
        residual = norm(&g) * norm(&u);
    }
    let value = obj.value(&u);
    Run { value, u, iterations, residual }
}

fn starts(t: &KineticOperator, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = t.len();
    let mut out = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(r as u64));
        let u: Vec<f64> = match r {
            0 => t.eigenfunction(0).iter().map(|x| x.abs() + 1e-3).collect(),
            r if r % 4 == 1 => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).abs() + 0.1).collect(),
            r if r % 4 == 2 => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
            r if r % 4 == 3 => {
                let c = rng.random_range(0..n);
                let width = rng.random_range(0.5..4.0);
                (0..n)
                    .map(|i| {
                        let d2: f64 = t.space().sites()[i]
                            .iter()
                            .zip(&t.space().sites()[c])
                            .map(|(a, b)| ((a - b) as f64).powi(2))
                            .sum();
                        (-d2 / (width * width)).exp() + 1e-3 * rng.random::<f64>()
                    })
                    .collect()
            }
            _ => {
                let phase = t.eigenfunction(1.min(n - 1));
                let ground = t.eigenfunction(0);
                (0..n).map(|i| ground[i].abs() + rng.random_range(0.0..1.0) * phase[i]).collect()
            }
        };
        let s = norm(&u);
        out.push(u.into_iter().map(|x| x / s).collect());
    }
    out
}

fn run_restarts(obj: &Quotient, initial: Vec<Vec<f64>>, opts: &SobolevOptions) -> MinimizationTrace {
    let mut trace = MinimizationTrace {
        value: f64::INFINITY,
        minimizer: Vec::new(),
        restarts: initial.len(),
        best_restart: 0,
        iterations: 0,
        residual: f64::INFINITY,
    };
    for (r, u0) in initial.into_iter().enumerate() {
        let run = minimise(obj, u0, opts.max_iterations, opts.tolerance);
        trace.iterations += run.iterations;
        if run.value < trace.value {
            trace.value = run.value;
            trace.minimizer = run.u;
            trace.best_restart = r;
            trace.residual = run.residual;
        }
    }
    trace.value = trace.value.exp();
    trace
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(domain(format!("Sobolev exponent must exceed 2, got {q}")));
    }
    Ok(())
}

fn check_psd(t: &KineticOperator) -> Result<()> {
    if !t.is_psd() {
        return Err(domain(format!(
            "Sobolev quotient needs a nonnegative operator, smallest eigenvalue {}",
            t.lambda_min()
        )));
    }
    Ok(())
}

fn kernel_trace(t: &KineticOperator) -> MinimizationTrace {
    MinimizationTrace {
        value: 0.0,
        minimizer: t.eigenfunction(0),
        restarts: 0,
        best_restart: 0,
        iterations: 0,
        residual: 0.0,
    }
}

/// `S = inf t[u] / ‖u‖_q²`; zero when `T` has a kernel.
pub fn sobolev_constant(t: &KineticOperator, q: f64, opts: &SobolevOptions) -> Result<MinimizationTrace> {
    check_q(q)?;
    check_psd(t)?;
    if !t.has_trivial_kernel() {
        return Ok(kernel_trace(t));
    }
    let obj = Quotient { form: Csr::from_dense(t.form()), measure: t.measure(), q, theta: 1.0 };
    Ok(run_restarts(&obj, starts(t, opts.restarts, opts.seed), opts))
}

/// Smallest value of `(t[u]/‖u‖_q² − S)/S` over random trial functions.
pub fn sobolev_certificate(t: &KineticOperator, q: f64, s: f64, samples: usize, seed: u64) -> f64 {
    let form = Csr::from_dense(t.form());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.len();
    let mut worst = f64::INFINITY;
    for k in 0..samples {
        let u: Vec<f64> = if k % 2 == 0 {
            (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        } else {
            (0..n).map(|_| rng.random::<f64>()).collect()
        };
        let lq: f64 = u.iter().zip(t.measure()).map(|(x, m)| m * x.abs().powf(q)).sum();
        let quotient = form.quadratic(&u) / lq.powf(2.0 / q);
        worst = worst.min((quotient - s) / s.max(f64::MIN_POSITIVE));
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationConstant {
    /// Smaller of the two estimates below.
    pub value: f64,
    pub direct: f64,
    pub sweep: f64,
    pub best_tau: f64,
    pub trace: MinimizationTrace,
}

/// `T_τ = τ^{θ−1}(T + τ)`.
pub fn tau_scaled(t: &KineticOperator, tau: f64, theta: f64) -> KineticOperator {
    t.shifted(tau).scaled(tau.powf(theta - 1.0))
}

/// `S = inf t[u]^θ ‖u‖^{2(1−θ)} / ‖u‖_q²` by direct minimisation, cross-checked by
/// `θ^θ(1−θ)^{1−θ} inf_τ S_lin(T_τ)` over a log-spaced sweep refined by golden section.
pub fn sobolev_interp_constant(
    t: &KineticOperator,
    q: f64,
    theta: f64,
    opts: &SobolevOptions,
) -> Result<InterpolationConstant> {
    check_q(q)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(domain(format!("interpolation exponent must lie in (0, 1], got {theta}")));
    }
    check_psd(t)?;
    if theta == 1.0 {
        let trace = sobolev_constant(t, q, opts)?;
        return Ok(InterpolationConstant {
            value: trace.value,
            direct: trace.value,
            sweep: trace.value,
            best_tau: 0.0,
            trace,
        });
    }
    if !t.has_trivial_kernel() {
        let trace = kernel_trace(t);
        return Ok(InterpolationConstant { value: 0.0, direct: 0.0, sweep: 0.0, best_tau: 0.0, trace });
    }
    let obj = Quotient { form: Csr::from_dense(t.form()), measure: t.measure(), q, theta };
    let direct_opts = SobolevOptions { restarts: opts.restarts.clamp(1, 8), ..*opts };
    let direct = run_restarts(&obj, starts(t, direct_opts.restarts, opts.seed), &direct_opts);

    let scale = t.spectral_scale();
    let warm = direct.minimizer.clone();
    let lin = |tau: f64| -> f64 {
        let tt = tau_scaled(t, tau, theta);
        let o = Quotient { form: Csr::from_dense(tt.form()), measure: tt.measure(), q, theta: 1.0 };
        let one = SobolevOptions { restarts: 1, ..*opts };
        run_restarts(&o, vec![warm.clone()], &one).value
    };
    let taus = log_space(1e-4 * scale, 1e4 * scale, 33);
    let vals: Vec<f64> = taus.iter().map(|&tau| lin(tau)).collect();
    let best = (0..taus.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let lo = taus[best.saturating_sub(1)].ln();
    let hi = taus[(best + 1).min(taus.len() - 1)].ln();
    let (ln_tau, v) = golden_section(|x| lin(x.exp()), lo, hi, 1e-6);
    let (best_tau, inf) = if v < vals[best] { (ln_tau.exp(), v) } else { (taus[best], vals[best]) };
    let sweep = inf / interpolation_factor(theta);
    Ok(InterpolationConstant {
        value: direct.value.min(sweep),
        direct: direct.value,
        sweep,
        best_tau,
        trace: direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, LatticeSpace};
    use crate::operators::build_laplacian;
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn diag_op(d: &[f64]) -> KineticOperator {
        let s = Arc::new(LatticeSpace::new(&[d.len()], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let form = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d));
        KineticOperator::from_form(s, form, vec![1.0; d.len()], "diag").unwrap()
    }

    #[test]
    fn identity_gives_one() {
        let t = diag_op(&[1.0; 5]);
        for q in [3.0, 4.0, 6.0] {
            let r = sobolev_constant(&t, q, &SobolevOptions::default()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9, "q={q}: {}", r.value);
            let u = &r.minimizer;
            let big = u.iter().filter(|x| x.abs() > 1e-3 * norm(u)).count();
            assert_eq!(big, 1);
        }
    }

    #[test]
    fn homogeneity() {
        let s = Arc::new(LatticeSpace::new(&[10], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let t = build_laplacian(&s);
        let a = sobolev_constant(&t, 4.0, &SobolevOptions::default()).unwrap().value;
        let b = sobolev_constant(&t.scaled(3.0), 4.0, &SobolevOptions::default()).unwrap().value;
        assert!((b / a - 3.0).abs() < 1e-8);
    }

    #[test]
    fn two_site_scan() {
        let t = diag_op(&[1.0, 4.0]);
        let r = sobolev_constant(&t, 4.0, &SobolevOptions::default()).unwrap();
        let brute = (0..=200_000)
            .map(|i| {
                let a = i as f64 / 200_000.0 * std::f64::consts::PI;
                let (x, y) = (a.cos(), a.sin());
                (x * x + 4.0 * y * y) / (x.powi(4) + y.powi(4)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - brute).abs() < 1e-6, "{} vs {brute}", r.value);
    }

    #[test]
    fn kernel_means_zero() {
        let s = Arc::new(LatticeSpace::new(&[6], 1.0, Boundary::Periodic, &[]).unwrap());
        let r = sobolev_constant(&build_laplacian(&s), 4.0, &SobolevOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(sobolev_constant(&build_laplacian(&s), 2.0, &SobolevOptions::default()).is_err());
    }

    #[test]
    fn certificate_holds() {
        let s = Arc::new(LatticeSpace::new(&[5, 4], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let t = build_laplacian(&s);
        let r = sobolev_constant(&t, 4.0, &SobolevOptions::default()).unwrap();
        assert!(r.residual < 1e-8, "{}", r.residual);
        assert!(sobolev_certificate(&t, 4.0, r.value, 2000, 9) >= -1e-9);
    }

    #[test]
    fn interpolation_sweep_agrees_with_direct() {
        let s = Arc::new(LatticeSpace::new(&[16], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let t = build_laplacian(&s);
        let r = sobolev_interp_constant(&t, 4.0, 0.5, &SobolevOptions::default()).unwrap();
        assert!((r.direct - r.sweep).abs() < 1e-3 * r.direct, "{} vs {}", r.direct, r.sweep);
        let c = sobolev_interp_constant(&t.scaled(4.0), 4.0, 0.5, &SobolevOptions::default()).unwrap();
        assert!((c.value / r.value - 2.0).abs() < 1e-3);
    }

    #[test]
    fn interpolation_theta_limit() {
        let s = Arc::new(LatticeSpace::new(&[8], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let t = build_laplacian(&s);
        let lin = sobolev_constant(&t, 4.0, &SobolevOptions::default()).unwrap().value;
        let near = sobolev_interp_constant(&t, 4.0, 1.0 - 1e-6, &SobolevOptions::default()).unwrap();
        assert!((near.value - lin).abs() < 1e-3 * lin);
    }
}
