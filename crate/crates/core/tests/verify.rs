use std::f64::consts::PI;
use std::sync::Arc;

use ineqlab_core::functional::{sobolev_constant, tau_scaled, SobolevOptions};
use ineqlab_core::lattice::{power_integral, Boundary, LatticeSpace, Potential};
use ineqlab_core::operators::{
    build_laplacian, build_magnetic_laplacian, build_periodic_schrodinger, uniform_flux_phases, weighted_transform,
};
use ineqlab_core::spectra::count_below;
use ineqlab_core::verify::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(extents: &[usize], boundary: Boundary) -> Arc<LatticeSpace> {
    Arc::new(LatticeSpace::new(extents, 1.0, boundary, &[]).unwrap())
}

fn random_potential(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Potential {
    Potential::new((0..n).map(|_| scale * rng.random::<f64>()).collect()).unwrap()
}

fn quick_opts() -> SobolevOptions {
    SobolevOptions { restarts: 6, ..SobolevOptions::default() }
}

#[test]
fn zero_potential_has_no_bound_states() {
    let t = build_laplacian(&space(&[8, 8], Boundary::Dirichlet));
    let v = Potential::zeros(t.len());
    let inst = Instance::new(&t, &v).unwrap();
    let r = verify_clr(&inst, 1.5, 1.0).unwrap();
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.rhs, 0.0);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn zero_flux_reduces_to_the_plain_count() {
    let sp = space(&[5, 4], Boundary::Periodic);
    let t = build_laplacian(&sp).shifted(0.3);
    let ta = build_magnetic_laplacian(&sp, &vec![0.0; sp.edges().len()]).unwrap().shifted(0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let v = random_potential(&mut rng, t.len(), 4.0);
        let inst = Instance::new(&t, &v).unwrap();
        let plain = verify_clr(&inst, 1.5, 0.7).unwrap();
        let magnetic = verify_magnetic_clr(&ta, &inst, 1.5, 0.7).unwrap();
        assert_eq!(plain.lhs, magnetic.lhs);
        assert_eq!(magnetic.observations["nonmagnetic_count"], plain.lhs);
    }
}

#[test]
fn clr_holds_on_random_one_dimensional_draws() {
    let t = build_laplacian(&space(&[32], Boundary::Dirichlet));
    let kappa = 1.5;
    let q = 2.0 * kappa / (kappa - 1.0);
    let s = sobolev_constant(&t, q, &quick_opts()).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for k in 0..200 {
        let scale = 10f64.powf(-1.0 + 3.0 * k as f64 / 200.0);
        let v = random_potential(&mut rng, t.len(), scale);
        let r = verify_clr(&Instance::new(&t, &v).unwrap(), kappa, s).unwrap();
        assert!(r.pass, "draw {k}: {} > {}", r.lhs, r.rhs);
    }
}

#[test]
fn ground_state_substitution_preserves_count_and_integral() {
    let sp = space(&[10], Boundary::Periodic);
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let kappa = 1.5;
    for k in 0..50 {
        let w: Vec<f64> = (0..sp.len()).map(|_| 2.0 * rng.random::<f64>()).collect();
        let bundle = build_periodic_schrodinger(&sp, &w).unwrap();
        let wt = weighted_transform(&bundle.shifted, &bundle.ground_state, kappa).unwrap();
        let base = bundle.shifted.shifted(wt.epsilon);
        let v = random_potential(&mut rng, sp.len(), 3.0);
        let vt = wt.map_potential(&v).unwrap();
        let n = count_below(&base, &v, 0.0).unwrap().value;
        let nt = count_below(&wt.operator, &vt, 0.0).unwrap().value;
        assert_eq!(n, nt, "instance {k}");
        let i = power_integral(v.values(), kappa, base.measure()).unwrap();
        let it = power_integral(vt.values(), kappa, wt.measure()).unwrap();
        assert!((i - it).abs() <= 1e-12 * i.max(1.0), "instance {k}: {i} vs {it}");
    }
}

#[test]
fn tau_scaling_matches_shifted_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..20 {
        let n = 4 + k % 5;
        let t = build_laplacian(&space(&[n, 3], Boundary::Dirichlet));
        let theta = 0.2 + 0.6 * rng.random::<f64>();
        let tau = 10f64.powf(-2.0 + 3.0 * rng.random::<f64>());
        let v = random_potential(&mut rng, t.len(), 8.0);
        let direct = count_below(&t, &v, tau).unwrap().value;
        let scaled_v = v.scaled(tau.powf(theta - 1.0)).unwrap();
        let scaled = count_below(&tau_scaled(&t, tau, theta), &scaled_v, 0.0).unwrap().value;
        assert_eq!(direct, scaled, "scenario {k}");
    }
}

#[test]
fn coupling_scaling_is_monotone_and_homogeneous() {
    let t = build_laplacian(&space(&[6, 6], Boundary::Dirichlet));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v = random_potential(&mut rng, t.len(), 1.0);
    let kappa = 2.0;
    let base = power_integral(v.values(), kappa, t.measure()).unwrap();
    let mut last = 0;
    for c in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let vc = v.scaled(c).unwrap();
        let inst = Instance::new(&t, &vc).unwrap();
        let n = inst.count(0.0).value;
        assert!(n >= last);
        last = n;
        let scaled = inst.integral(kappa).unwrap();
        assert!((scaled - c.powf(kappa) * base).abs() <= 1e-12 * scaled);
    }
}

#[test]
fn single_site_trace_is_explicit() {
    let t = build_laplacian(&space(&[1], Boundary::Dirichlet));
    assert!((t.spectrum()[0] - 2.0).abs() < 1e-14);
    let v = Potential::new(vec![3.0]).unwrap();
    let inst = Instance::new(&t, &v).unwrap();
    let kappa = 1.5;
    let q = 2.0 * kappa / (kappa - 1.0);
    let s = sobolev_constant(&t, q, &quick_opts()).unwrap().value;
    assert!((s - 2.0).abs() < 1e-10);
    let ups = ineqlab_core::spectra::liyau_upsilon(&t, &v).unwrap();
    let upsilon: f64 = 2.0 / 3.0;
    for time in [0.1, 1.0, 4.0] {
        let expect = (-2.0 * time * upsilon).exp() / (2.0 * upsilon);
        assert!((ups.trace_h1(time) - expect).abs() < 1e-14);
    }
    let [trace, counting] = verify_liyau_trace(&inst, s, kappa, None).unwrap();
    assert!(trace.pass && counting.pass);
    assert_eq!(counting.observations["clr_count"], 1.0);
}

#[test]
fn diamagnetic_inequality_on_flux_and_random_phases() {
    let sp = space(&[4, 4], Boundary::Periodic);
    let t = build_laplacian(&sp);
    let times = [0.05, 0.5, 2.0, 10.0];
    let phases = uniform_flux_phases(&sp, PI / 2.0).unwrap();
    let ta = build_magnetic_laplacian(&sp, &phases).unwrap();
    assert!(verify_diamagnetic(&t, &ta, &times).unwrap().pass);
    assert!(verify_diamagnetic_form(&t, &ta, 200, 1).unwrap().pass);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases: Vec<f64> = (0..sp.edges().len()).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
        let ta = build_magnetic_laplacian(&sp, &phases).unwrap();
        let kernel = verify_diamagnetic(&t, &ta, &times).unwrap();
        assert!(kernel.pass, "seed {seed}: {}", kernel.lhs);
        assert!(verify_diamagnetic_form(&t, &ta, 100, seed).unwrap().pass, "seed {seed}");
    }
}

#[test]
fn free_ring_ground_state_is_constant() {
    let sp = space(&[9], Boundary::Periodic);
    let bundle = build_periodic_schrodinger(&sp, &[0.0; 9]).unwrap();
    assert!(bundle.energy.abs() < 1e-12);
    assert!(bundle.ground_state.values().iter().all(|w| (w - 1.0).abs() < 1e-10));
    assert!(bundle.shifted.quadratic_form(bundle.ground_state.values()).abs() < 1e-12);
    let r = verify_gsr_identity(&bundle, 50, 4).unwrap();
    assert!(r.pass);
    assert!(r.observations["ground_residual"] < 1e-12);
}

#[test]
fn zero_constant_makes_every_check_vacuous() {
    let t = build_laplacian(&space(&[6], Boundary::Periodic));
    let v = Potential::new(vec![1.0; 6]).unwrap();
    let inst = Instance::new(&t, &v).unwrap();
    assert_eq!(verify_clr(&inst, 1.5, 0.0).unwrap().verdict, Verdict::Vacuous);
    let [a, b] = verify_heat_bound(&t, 1.5, 0.0, None).unwrap();
    assert_eq!((a.verdict, b.verdict), (Verdict::Vacuous, Verdict::Vacuous));
}

const SMALL: &str = r#"{
  "schema": 1, "seed": 5,
  "scenarios": [{
    "id": "box", "lattice": {"extents": [6, 5], "boundary": "dirichlet"},
    "operator": {"family": "laplacian"},
    "exponents": {"kappa": 1.5, "gamma": 1.0, "gamma_tilde": 2.0},
    "potentials": {"sigmas": [0.5, 2.0], "draws": 2, "ground_couplings": [0.2]},
    "checks": ["clr", "clr_bracket", "weak_lt", "lt_moments", "moment_identity", "liyau", "heat_chain"],
    "sobolev_restarts": 4
  }]
}"#;

#[test]
fn scenarios_are_deterministic_and_pass() {
    let cfg: ConfigFile = serde_json::from_str(SMALL).unwrap();
    cfg.validate().unwrap();
    let a = run_config(&cfg).unwrap();
    let b = run_config(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let counts = VerdictCounts::tally(a.iter().flat_map(|o| &o.reports));
    assert!(counts.total > 20);
    assert_eq!(counts.pass, counts.total, "{counts:?}");

    let mut other = cfg.clone();
    other.seed = 6;
    let c = run_config(&other).unwrap();
    assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn seeds_depend_on_label_and_base() {
    assert_eq!(derive_seed(1, "x"), derive_seed(1, "x"));
    assert_ne!(derive_seed(1, "x"), derive_seed(1, "y"));
    assert_ne!(derive_seed(1, "x"), derive_seed(2, "x"));
}
