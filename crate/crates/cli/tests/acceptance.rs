//! End-to-end acceptance gate. Prints one line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ineqlab_core::exponents::ExponentSet;
use ineqlab_core::functional::{aizenman_lieb_factor, hardy_constant, lieb_bound_from_k, tau_min_value};
use ineqlab_core::lattice::{power_integral, Boundary, LatticeSpace, Potential};
use ineqlab_core::operators::{build_laplacian, build_periodic_schrodinger, weighted_transform};
use ineqlab_core::quad::adaptive_simpson;
use ineqlab_core::spectra::{
    birman_schwinger, count_below, heat_kernel, trotter_trace, TrotterOptions,
};
use ineqlab_core::verify::{
    build_scenario, moment_identity, trotter_operator, verify_gsr_identity, ConfigFile, Instance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s_sharp = 3.0 * (PI / 2.0).powf(4.0 / 3.0);
    // u = (1+r²)^{-1/2} under r = tan φ: |∇u|² r² dr -> sin⁴φ dφ, u⁶ r² dr -> sin²φ cos²φ dφ
    let grad = 4.0 * PI * adaptive_simpson(|p: f64| p.sin().powi(4), 0.0, PI / 2.0, 1e-14);
    let six = 4.0 * PI * adaptive_simpson(|p: f64| (p.sin() * p.cos()).powi(2), 0.0, PI / 2.0, 1e-14);
    let quotient = grad / six.powf(1.0 / 3.0);
    ensure(rel(quotient, s_sharp) <= 1e-6, || format!("Rayleigh quotient {quotient} vs S {s_sharp}"))?;
    let k = (4.0 * PI).powf(-1.5);
    let lieb = lieb_bound_from_k(k, 1.5).map_err(|e| e.to_string())?;
    let ratio = lieb.value / s_sharp.powf(-1.5);
    ensure((1.47..=1.51).contains(&ratio), || format!("ratio {ratio} outside [1.47, 1.51]"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("L = {:.6}, S^-3/2 = {:.6}, ratio = {ratio:.4}, quotient rel err {:.1e}", lieb.value, s_sharp.powf(-1.5), rel(quotient, s_sharp)))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for k in 0..100 {
        let periodic = k % 3 == 0;
        let extents: Vec<usize> = if k % 2 == 0 {
            vec![rng.random_range(2..=50)]
        } else {
            vec![rng.random_range(2..=7), rng.random_range(2..=7)]
        };
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Dirichlet };
        let space = Arc::new(LatticeSpace::new(&extents, 1.0, boundary, &[]).map_err(|e| e.to_string())?);
        let mut t = build_laplacian(&space);
        if periodic {
            t = t.shifted(0.05 + rng.random::<f64>());
        }
        let scale = 4.0 * rng.random::<f64>() + 0.1;
        let v = Potential::new((0..t.len()).map(|_| scale * rng.random::<f64>()).collect()).unwrap();
        for tau in [0.0, 0.1, 1.0] {
            let direct = count_below(&t, &v, tau).map_err(|e| e.to_string())?;
            let bs = birman_schwinger(&t, &v, tau).map_err(|e| e.to_string())?.count_above_one();
            ensure(direct.value == bs.value, || format!("instance {k}, tau {tau}: {} vs {}", direct.value, bs.value))?;
            ensure(direct.tie.is_none() && bs.tie.is_none(), || format!("instance {k}, tau {tau}: tie warning"))?;
            compared += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{compared} counts equal, no ties"))
}

struct SuiteRun {
    report: Vec<u8>,
    elapsed: Duration,
    status: i32,
}

fn run_suite(jobs: &str, out: &Path) -> Result<SuiteRun, String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_ineqlab"))
        .args(["verify", "--config"])
        .arg(configs().join("paper-suite.json"))
        .arg("--out")
        .arg(out)
        .args(["--jobs", jobs])
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let report = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
    Ok(SuiteRun { report, elapsed: start.elapsed(), status: status.code().unwrap_or(-1) })
}

fn reports(doc: &Value) -> impl Iterator<Item = &Value> {
    doc["scenarios"].as_array().unwrap().iter().flat_map(|s| s["reports"].as_array().unwrap())
}

const SOUNDNESS_CHECKS: [&str; 8] = [
    "clr",
    "weak_lt",
    "lt_moment",
    "diamagnetic_kernel",
    "diamagnetic_form",
    "magnetic_clr",
    "liyau_trace",
    "liyau_counting",
];

fn criterion_3(run: &SuiteRun, doc: &Value) -> Outcome {
    ensure(run.status == 0, || format!("exit code {}", run.status))?;
    within(run.elapsed, Duration::from_secs(300))?;
    let scenarios = doc["scenarios"].as_array().unwrap();
    ensure(scenarios.iter().all(|s| s["sites"].as_u64().unwrap() <= 1024), || "a scenario exceeds 1024 sites".into())?;
    let labels: Vec<String> =
        scenarios.iter().map(|s| format!("{} {}", s["family"].as_str().unwrap(), s["operator"].as_str().unwrap())).collect();
    for family in ["laplacian", "fractional(s=0.5)", "fractional(s=0.75)", "magnetic", "periodic"] {
        ensure(labels.iter().any(|l| l.contains(family)), || format!("suite has no {family} scenario"))?;
    }
    let mut checked = 0;
    let mut tags = std::collections::BTreeSet::new();
    for r in reports(doc) {
        let check = r["check"].as_str().unwrap();
        if !SOUNDNESS_CHECKS.contains(&check) || r["verdict"] == "not_applicable" || r["verdict"] == "vacuous" {
            continue;
        }
        let rhs = r["rhs"].as_f64().unwrap();
        let margin = r["margin"].as_f64().unwrap();
        let floor = if check.starts_with("diamagnetic") { 1.0 } else { 0.0 };
        let ok = r["verdict"] == "pass" && margin >= -1e-9 * rhs.abs().max(floor);
        ensure(ok, || format!("{} {} {}: margin {margin}", r["scenario_id"], check, r["instance"]))?;
        tags.insert(check.to_string());
        checked += 1;
    }
    ensure(tags.len() == SOUNDNESS_CHECKS.len(), || format!("only {tags:?} were exercised"))?;
    Ok(format!("{checked} applicable checks over {} scenarios pass in {:.1?}, exit 0", scenarios.len(), run.elapsed))
}

fn criterion_4() -> Outcome {
    let h = hardy_constant(1.0, 3).map_err(|e| e.to_string())?;
    ensure((h - 0.25).abs() <= 1e-12, || format!("C(1,3) = {h}"))?;
    for d in 3..=6usize {
        let c = hardy_constant(1.0, d).map_err(|e| e.to_string())?;
        let want = ((d - 2) * (d - 2)) as f64 / 4.0;
        ensure((c - want).abs() <= 1e-12 * want.max(1.0), || format!("C(1,{d}) = {c}, want {want}"))?;
    }
    let al = aizenman_lieb_factor(1.0, 2.0, 1.5).map_err(|e| e.to_string())?.factor;
    ensure((al - 16.0 / 7.0).abs() <= 1e-12, || format!("AL factor {al}"))?;
    let mut trips = 0;
    for gamma in [0.0, 0.25, 0.5, 1.0, 2.0, 3.5] {
        for kappa in [0.75, 1.0, 1.5, 2.0, 3.0, 5.0] {
            if gamma + kappa <= 1.0 {
                continue;
            }
            let e = ExponentSet::from_gamma_kappa(gamma, kappa).map_err(|e| e.to_string())?;
            let back = ExponentSet::from_q_theta(e.q, e.theta).map_err(|e| e.to_string())?;
            let ok = (back.gamma - gamma).abs() <= 1e-12 * gamma.max(1.0) && rel(back.kappa, kappa) <= 1e-12;
            ensure(ok, || format!("({gamma}, {kappa}) -> ({}, {})", back.gamma, back.kappa))?;
            trips += 1;
        }
    }
    Ok(format!("Hardy d=3..6 exact, AL factor = {al:.12}, {trips} exponent roundtrips"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut worst_moment: f64 = 0.0;
    for k in 0..50 {
        let n = 4 + k % 7;
        let space = Arc::new(LatticeSpace::new(&[n, 3], 1.0, Boundary::Dirichlet, &[]).unwrap());
        let t = build_laplacian(&space);
        let v = Potential::new((0..t.len()).map(|_| 6.0 * rng.random::<f64>()).collect()).unwrap();
        let inst = Instance::new(&t, &v).map_err(|e| e.to_string())?;
        let gt = 1.0 + 2.0 * rng.random::<f64>();
        worst_moment = worst_moment.max(moment_identity(&inst, gt).map_err(|e| e.to_string())?.lhs);
    }
    ensure(worst_moment <= 1e-6, || format!("moment identity rel error {worst_moment}"))?;

    let mut worst_gsr: f64 = 0.0;
    for k in 0..4u64 {
        let n = 8 + 4 * k as usize;
        let space = Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Periodic, &[]).unwrap());
        let w: Vec<f64> = (0..n).map(|_| 3.0 * rng.random::<f64>()).collect();
        let bundle = build_periodic_schrodinger(&space, &w).map_err(|e| e.to_string())?;
        let r = verify_gsr_identity(&bundle, 100, k).map_err(|e| e.to_string())?;
        worst_gsr = worst_gsr.max(r.lhs);
    }
    ensure(worst_gsr <= 1e-10, || format!("ground-state representation residual {worst_gsr}"))?;

    let kappa = 1.5;
    let mut worst_integral: f64 = 0.0;
    for k in 0..50 {
        let n = 6 + k % 6;
        let space = Arc::new(LatticeSpace::new(&[n], 1.0, Boundary::Periodic, &[]).unwrap());
        let w: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>()).collect();
        let bundle = build_periodic_schrodinger(&space, &w).map_err(|e| e.to_string())?;
        let wt = weighted_transform(&bundle.shifted, &bundle.ground_state, kappa).map_err(|e| e.to_string())?;
        let base = bundle.shifted.shifted(wt.epsilon);
        let v = Potential::new((0..n).map(|_| 3.0 * rng.random::<f64>()).collect()).unwrap();
        let vt = wt.map_potential(&v).map_err(|e| e.to_string())?;
        let a = count_below(&base, &v, 0.0).map_err(|e| e.to_string())?.value;
        let b = count_below(&wt.operator, &vt, 0.0).map_err(|e| e.to_string())?.value;
        ensure(a == b, || format!("weighted instance {k}: N = {a} vs {b}"))?;
        let i = power_integral(v.values(), kappa, base.measure()).unwrap();
        let it = power_integral(vt.values(), kappa, wt.measure()).unwrap();
        worst_integral = worst_integral.max(rel(it, i));
    }
    ensure(worst_integral <= 1e-12, || format!("weighted integral rel error {worst_integral}"))?;

    let mut worst_tau: f64 = 0.0;
    for _ in 0..100 {
        let alpha = 10f64.powf(-2.0 + 4.0 * rng.random::<f64>());
        let beta = 10f64.powf(-2.0 + 4.0 * rng.random::<f64>());
        let theta = 0.05 + 0.9 * rng.random::<f64>();
        let closed = tau_min_value(alpha, beta, theta).map_err(|e| e.to_string())?;
        let g = |tau: f64| alpha * tau.powf(theta - 1.0) + beta * tau.powf(theta);
        let (mut lo, mut hi) = (-12.0f64, 12.0f64);
        for _ in 0..4 {
            let pts = 401;
            let step = (hi - lo) / (pts - 1) as f64;
            let best = (0..pts).map(|i| lo + step * i as f64).min_by(|a, b| g(10f64.powf(*a)).total_cmp(&g(10f64.powf(*b)))).unwrap();
            lo = best - 2.0 * step;
            hi = best + 2.0 * step;
        }
        let grid = g(10f64.powf(0.5 * (lo + hi)));
        worst_tau = worst_tau.max(rel(grid, closed.value));
    }
    ensure(worst_tau <= 1e-6, || format!("tau_min grid mismatch {worst_tau}"))?;
    Ok(format!(
        "moment {worst_moment:.1e}, ground-state {worst_gsr:.1e}, weighted {worst_integral:.1e}, tau_min {worst_tau:.1e}"
    ))
}

fn criterion_6(doc: &Value) -> Outcome {
    let cfg: ConfigFile = serde_json::from_str(&std::fs::read_to_string(configs().join("paper-suite.json")).unwrap()).unwrap();
    let mut operators = 0;
    for s in doc["scenarios"].as_array().unwrap() {
        let id = s["id"].as_str().unwrap();
        let s_value = s["constants"]["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["name"] == "S")
            .and_then(|e| e["value"].as_f64())
            .unwrap_or(0.0);
        let mine: Vec<&Value> = s["reports"].as_array().unwrap().iter().collect();
        let find = |check: &str| mine.iter().find(|r| r["check"] == check).copied();
        if s_value > 0.0 {
            let heat = find("heat_1_to_inf").ok_or_else(|| format!("{id}: no heat bound"))?;
            let k = heat["lhs"].as_f64().unwrap();
            let bound = heat["rhs"].as_f64().unwrap();
            ensure(k <= bound * (1.0 + 1e-8), || format!("{id}: K = {k} > {bound}"))?;
            let grid = find("heat_1_to_2").ok_or_else(|| format!("{id}: no 1->2 bound"))?;
            ensure(grid["verdict"] == "pass", || format!("{id}: 1->2 bound fails on the grid"))?;
            operators += 1;
        }
        if s["assumption_status"]["passed"] == true {
            let sc = cfg.scenario(id).unwrap();
            let built = build_scenario(sc).map_err(|e| e.to_string())?;
            let t = &built.operator;
            let scale = t.spectral_scale();
            for time in [0.1, 1.0, 10.0] {
                let k = heat_kernel(t, time / scale).map_err(|e| e.to_string())?;
                let low = k.iter().copied().fold(f64::INFINITY, f64::min);
                ensure(low >= -1e-12, || format!("{id}: heat kernel entry {low} at t = {time}"))?;
            }
        }
    }
    ensure(operators > 0, || "no operator with S > 0".into())?;
    Ok(format!("{operators} operators satisfy the heat and 1->2 bounds, kernels nonnegative"))
}

fn criterion_7() -> Outcome {
    let cfg: ConfigFile = serde_json::from_str(&std::fs::read_to_string(configs().join("trotter-sweep.json")).unwrap()).unwrap();
    let instance = |id: &str| cfg.sweeps.iter().find(|s| s.id == id).and_then(|s| s.trotter.clone()).unwrap();
    let opts = TrotterOptions::default();
    let full = instance("trotter-3x3");
    let (t, v) = trotter_operator(&full).map_err(|e| e.to_string())?;
    ensure(t.form()[(0, 1)] != 0.0, || "instance is diagonal".into())?;
    let e32 = trotter_trace(&t, &v, &full.profile, 32, &opts).map_err(|e| e.to_string())?;
    ensure(e32.relative_error <= 5e-2, || format!("n = 32 relative error {}", e32.relative_error))?;
    let diag = instance("trotter-3x3-diagonal");
    let (td, vd) = trotter_operator(&diag).map_err(|e| e.to_string())?;
    let e1 = trotter_trace(&td, &vd, &diag.profile, 1, &opts).map_err(|e| e.to_string())?;
    ensure(e1.relative_error <= 1e-8, || format!("diagonal n = 1 relative error {}", e1.relative_error))?;
    Ok(format!("n = 32 rel err {:.2e}, diagonal n = 1 rel err {:.1e}", e32.relative_error, e1.relative_error))
}

fn criterion_8(first: &SuiteRun, dir: &Path) -> Outcome {
    let mut jobs_seen = vec!["4".to_string()];
    for jobs in ["1", "3"] {
        let run = run_suite(jobs, &dir.join(format!("jobs{jobs}")))?;
        ensure(run.report == first.report, || format!("report.json differs with --jobs {jobs}"))?;
        jobs_seen.push(jobs.into());
    }
    Ok(format!("report.json byte-identical for --jobs {}", jobs_seen.join(", ")))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    results.push((1, criterion_1()));
    results.push((2, criterion_2()));
    let suite = run_suite("4", &dir.path().join("jobs4"));
    let doc = suite.as_ref().ok().and_then(|r| serde_json::from_slice::<Value>(&r.report).ok());
    match (&suite, &doc) {
        (Ok(run), Some(doc)) => results.push((3, criterion_3(run, doc))),
        (Err(e), _) => results.push((3, Err(e.clone()))),
        (_, None) => results.push((3, Err("report.json is not valid JSON".into()))),
    }
    results.push((4, criterion_4()));
    results.push((5, criterion_5()));
    results.push((6, doc.as_ref().map_or_else(|| Err("no suite report".into()), criterion_6)));
    results.push((7, criterion_7()));
    results.push((8, suite.as_ref().map_err(|e| e.clone()).and_then(|run| criterion_8(run, dir.path()))));

    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL  {msg}");
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
