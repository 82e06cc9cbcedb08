//! Profile transforms and the finite-`n` Trotter approximation of
//! `Tr F(V^{1/2} T^{−1} V^{1/2})`.
//!
//! The `n`-fold sum over closed lattice paths only sees a path through its
//! weight and its visit counts, so it is accumulated by dynamic programming
//! over count vectors instead of enumerating the `N^n` paths.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::birman_schwinger::birman_schwinger;
use super::heat::semigroup_matrix;
use crate::error::{domain, LabError, Result};
use crate::lattice::Potential;
use crate::operators::KineticOperator;
use crate::quad::{adaptive_simpson, log_space, CompositeRule};
use crate::special::scaled_e1;

/// Largest number of count-vector states the path sum may allocate.
pub const MAX_STATES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileFunction {
    /// `f(μ) = (μ − a)₊`.
    Hinge { a: f64 },
    /// Piecewise linear through `(0, 0)` and the nodes, extended linearly
    /// past the last node and clipped at zero.
    Tabulated { mu: Vec<f64>, f: Vec<f64> },
}

impl ProfileFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Hinge { a } if *a > 0.0 && a.is_finite() => Ok(()),
            Self::Hinge { a } => Err(domain(format!("hinge threshold must be positive, got {a}"))),
            Self::Tabulated { mu, f } => {
                if mu.is_empty() || mu.len() != f.len() {
                    return Err(LabError::Length { expected: mu.len(), got: f.len() });
                }
                if mu[0] < 0.0 || mu.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(domain("tabulated abscissae must be nonnegative and increasing"));
                }
                if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(domain("tabulated profile must be finite and nonnegative"));
                }
                if mu[0] == 0.0 && f[0] != 0.0 {
                    return Err(domain("tabulated profile with f(0) != 0 has a divergent transform"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Hinge { a } => (x - a).max(0.0),
            Self::Tabulated { mu, f } => {
                let k = mu.partition_point(|&m| m <= x);
                let (x0, y0, x1, y1) = if k == 0 {
                    (0.0, 0.0, mu[0], f[0])
                } else if k < mu.len() {
                    (mu[k - 1], f[k - 1], mu[k], f[k])
                } else if mu.len() >= 2 {
                    let n = mu.len();
                    (mu[n - 2], f[n - 2], mu[n - 1], f[n - 1])
                } else {
                    (0.0, 0.0, mu[0], f[0])
                };
                if x1 == x0 {
                    return y1;
                }
                (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).max(0.0)
            }
        }
    }

    /// Abscissae where `f` may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Hinge { a } => vec![*a],
            Self::Tabulated { mu, .. } => mu.clone(),
        }
    }

    /// Largest `μ₀` with `f = 0` on `[0, μ₀]`.
    pub fn support_start(&self) -> f64 {
        match self {
            Self::Hinge { a } => *a,
            Self::Tabulated { mu, f } => {
                let k = f.iter().take_while(|&&v| v == 0.0).count();
                if k == 0 { 0.0 } else { mu[k - 1] }
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Self::Hinge { .. } => true,
            Self::Tabulated { mu, f } => {
                let mut xs = vec![0.0];
                let mut ys = vec![0.0];
                for (x, y) in mu.iter().zip(f) {
                    if *x > 0.0 {
                        xs.push(*x);
                        ys.push(*y);
                    }
                }
                let slopes: Vec<f64> = (1..xs.len()).map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])).collect();
                slopes.windows(2).all(|w| w[1] >= w[0] - 1e-15) && slopes.last().is_none_or(|&s| s >= 0.0)
            }
        }
    }

    /// `F(λ) = ∫₀^∞ f(μ) e^{−μ/λ} μ^{−1} dμ`.
    pub fn f_transform(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(domain(format!("F needs λ >= 0, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        match self {
            Self::Hinge { a } => {
                // λ e^{−x}(1 − x e^x E₁(x)) with x = a/λ
                let x = a / lambda;
                Ok(lambda * (-x).exp() * (1.0 - x * scaled_e1(x)))
            }
            Self::Tabulated { .. } => self.f_transform_quadrature(lambda),
        }
    }

    /// `F(λ)` by adaptive quadrature, split at the kinks of `f`.
    pub fn f_transform_quadrature(&self, lambda: f64) -> Result<f64> {
        self.validate()?;
        let g = |mu: f64| if mu == 0.0 { 0.0 } else { self.value(mu) * (-mu / lambda).exp() / mu };
        let mut edges = vec![0.0];
        edges.extend(self.kinks().into_iter().filter(|&k| k > 0.0));
        let last = *edges.last().unwrap();
        let tol = |lo: f64| (1e-13 * lambda * (-lo / lambda).exp()).max(1e-300);
        let mut total = 0.0;
        for w in edges.windows(2) {
            total += adaptive_simpson(g, w[0], w[1], tol(w[0]));
        }
        // tail on [last, last + 60λ] in geometric panels
        let mut lo = last;
        let mut width = lambda.min(last.max(lambda));
        while lo < last + 60.0 * lambda {
            let hi = (lo + width).min(last + 60.0 * lambda);
            total += adaptive_simpson(g, lo, hi, tol(lo));
            lo = hi;
            width *= 2.0;
        }
        Ok(total)
    }

    /// `∫₀^∞ f(μ) μ^{−κ−1} dμ`, finite for the hinge when `κ > 1`.
    pub fn moment(&self, kappa: f64) -> Result<f64> {
        if !(kappa > 1.0) {
            return Err(domain(format!("profile moment needs κ > 1, got {kappa}")));
        }
        match self {
            Self::Hinge { a } => Ok(a.powf(1.0 - kappa) / (kappa * (kappa - 1.0))),
            Self::Tabulated { .. } => Err(domain("moments are only available for the hinge profile")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrotterOptions {
    pub order: usize,
    pub log_points: usize,
}

impl Default for TrotterOptions {
    fn default() -> Self {
        Self { order: 6, log_points: 48 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrotterEstimate {
    pub n: usize,
    pub estimate: f64,
    pub exact: f64,
    pub relative_error: f64,
    /// `∫ ds/s Σ_x m_x k(x,x,s) f(sV_x)`, available for convex profiles.
    pub convexity_bound: Option<f64>,
}

struct CountLattice {
    /// `next[j][idx * sites + y]`: index in level `j+1` after visiting `y`.
    next: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    last: Vec<Vec<u32>>,
}

impl CountLattice {
    fn new(sites: usize, n: usize) -> Result<Self> {
        let mut levels: Vec<Vec<Vec<u32>>> = vec![vec![vec![0; sites]]];
        let mut next = Vec::with_capacity(n);
        let mut total = 1usize;
        for j in 0..n {
            let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
            let mut level = Vec::new();
            let mut table = Vec::with_capacity(levels[j].len() * sites);
            for c in &levels[j] {
                for y in 0..sites {
                    let mut d = c.clone();
                    d[y] += 1;
                    let id = *index.entry(d.clone()).or_insert_with(|| {
                        level.push(d);
                        level.len() - 1
                    });
                    table.push(id);
                }
            }
            total += level.len() * sites;
            if total > MAX_STATES {
                return Err(domain(format!("path sum with {sites} sites and n = {n} exceeds {MAX_STATES} states")));
            }
            next.push(table);
            levels.push(level);
        }
        let sizes = levels.iter().map(|l| l.len()).collect();
        let last = levels.pop().unwrap();
        Ok(Self { next, sizes, last })
    }
}

fn check_inputs(t: &KineticOperator, v: &Potential, f: &ProfileFunction) -> Result<()> {
    f.validate()?;
    if v.len() != t.len() {
        return Err(LabError::Length { expected: t.len(), got: v.len() });
    }
    if !t.has_trivial_kernel() {
        return Err(LabError::Singular("trace formula needs T positive definite".into()));
    }
    Ok(())
}

/// `Σ_j F(β_j)` over the Birman–Schwinger eigenvalues at `τ = 0`.
pub fn exact_trace(t: &KineticOperator, v: &Potential, f: &ProfileFunction) -> Result<f64> {
    check_inputs(t, v, f)?;
    let bs = birman_schwinger(t, v, 0.0)?;
    bs.eigenvalues.iter().map(|&b| f.f_transform(b.max(0.0))).sum()
}

fn s_range(t: &KineticOperator, v: &Potential, f: &ProfileFunction) -> (f64, f64) {
    let vmax = v.max();
    let lmin = t.lambda_min();
    let start = f.support_start();
    let hi = ((t.len() as f64 * vmax / lmin).max(1.0).ln() + 40.0) / lmin;
    let lo = if start > 0.0 { start / vmax } else { 1e-12 * hi };
    (lo, hi.max(2.0 * lo))
}

fn breakpoints(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>, log_points: usize) -> Vec<f64> {
    let mut pts = log_space(lo, hi, log_points.max(2));
    pts.extend(extra.into_iter().filter(|&s| s > lo && s < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs());
    pts
}

/// The `n`-step path sum of the trace formula, integrated over `s`.
pub fn trotter_trace(
    t: &KineticOperator,
    v: &Potential,
    f: &ProfileFunction,
    n: usize,
    opts: &TrotterOptions,
) -> Result<TrotterEstimate> {
    if n == 0 {
        return Err(domain("Trotter step count must be at least 1"));
    }
    check_inputs(t, v, f)?;
    let exact = exact_trace(t, v, f)?;
    let convexity_bound = if f.is_convex() { Some(convexity_bound(t, v, f, opts)?) } else { None };
    if v.max() == 0.0 {
        return Ok(TrotterEstimate { n, estimate: 0.0, exact, relative_error: 0.0, convexity_bound });
    }
    let sites = t.len();
    let lattice = CountLattice::new(sites, n)?;
    let vals = v.values();
    let sums: Vec<f64> = lattice
        .last
        .iter()
        .map(|c| c.iter().zip(vals).map(|(&k, v)| k as f64 * v).sum())
        .collect();
    let (lo, hi) = s_range(t, v, f);
    let kinks = sums
        .iter()
        .filter(|&&cv| cv > 0.0)
        .flat_map(|&cv| f.kinks().into_iter().map(move |k| k * n as f64 / cv));
    let pts = breakpoints(lo, hi, kinks, opts.log_points);
    let rule = CompositeRule::new(opts.order);

    let integrand = |s: f64| -> f64 {
        let p = semigroup_matrix(t, s / n as f64);
        let mut weights = vec![0.0; lattice.sizes[n]];
        for z in 0..sites {
            let mut cur = vec![0.0; sites];
            cur[z] = 1.0;
            for j in 0..n {
                let len = lattice.sizes[j];
                let mut nxt = vec![0.0; sites * lattice.sizes[j + 1]];
                let table = &lattice.next[j];
                for x in 0..sites {
                    for idx in 0..len {
                        let w = cur[x * len + idx];
                        if w == 0.0 {
                            continue;
                        }
                        for y in 0..sites {
                            let to = table[idx * sites + y];
                            nxt[y * lattice.sizes[j + 1] + to] += w * p[(y, x)];
                        }
                    }
                }
                cur = nxt;
            }
            let len = lattice.sizes[n];
            for (idx, w) in weights.iter_mut().enumerate() {
                *w += cur[z * len + idx];
            }
        }
        let scale = s / n as f64;
        weights.iter().zip(&sums).map(|(w, cv)| w * f.value(scale * cv)).sum::<f64>() / s
    };
    let estimate = rule.integrate(integrand, &pts);
    let relative_error = if exact != 0.0 { (estimate - exact).abs() / exact.abs() } else { estimate.abs() };
    Ok(TrotterEstimate { n, estimate, exact, relative_error, convexity_bound })
}

fn convexity_bound(t: &KineticOperator, v: &Potential, f: &ProfileFunction, opts: &TrotterOptions) -> Result<f64> {
    if v.max() == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = s_range(t, v, f);
    let kinks = v
        .values()
        .iter()
        .filter(|&&x| x > 0.0)
        .flat_map(|&x| f.kinks().into_iter().map(move |k| k / x));
    let pts = breakpoints(lo, hi, kinks, opts.log_points);
    let rule = CompositeRule::new(opts.order);
    Ok(rule.integrate(
        |s| {
            let p = t.eigen().reconstruct_diagonal(|l| (-s * l).exp());
            p.iter().zip(v.values()).map(|(k, vx)| k * f.value(s * vx)).sum::<f64>() / s
        },
        &pts,
    ))
}
