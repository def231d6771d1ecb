use super::*;
use crate::geometry::Window;
use crate::models::Model;

fn torus() -> Window<f64> {
    Window::unit(2, true)
}

fn spec(m: &Model<f64>) -> serde_json::Value {
    serde_json::to_value(m.to_spec().unwrap()).unwrap()
}

fn scenario(xi: &Model<f64>, h: &Model<f64>, task: &str, extra: serde_json::Value) -> Scenario {
    let mut v = serde_json::json!({
        "name": "test",
        "model_xi": spec(xi),
        "model_h": spec(h),
        "task": task,
        "mc": {"reps": 400, "seed": 3, "coupling_reps": 200},
    });
    for (k, x) in extra.as_object().unwrap() {
        v[k] = x.clone();
    }
    Scenario::from_json(&v.to_string()).unwrap()
}

#[test]
fn identical_models_have_small_lower_estimate() {
    let m = Model::strauss(torus(), 30.0, 0.5, 0.05).unwrap();
    let fam = StatFamily::for_models(&m, &m);
    let e = empirical_tv_lower(&m, &m, &fam, 1000, 5).unwrap();
    assert!(e.lower <= 3.0 * e.se, "{e:?}");
}

#[test]
fn poisson_count_laws() {
    let a = Model::poisson(torus(), 10.0).unwrap();
    let b = Model::poisson(torus(), 12.0).unwrap();
    let fam = StatFamily::new(1000, 1, vec![]).unwrap();
    let e = empirical_tv_lower(&a, &b, &fam, 10_000, 8).unwrap();
    // half the l1 distance between the Po(10) and Po(12) mass functions
    let tv = 0.23581033263881415;
    assert_eq!(e.statistic, "count");
    assert!((e.lower - tv).abs() <= 3.0 * e.se, "{e:?}");
    assert!((e.lower - tv).abs() < 0.03, "{e:?}");
}

#[test]
fn poisson_vs_hard_core_lower_below_bound() {
    let a = Model::poisson(torus(), 10.0).unwrap();
    let b = Model::strauss(torus(), 10.0, 0.0, 0.02).unwrap();
    let fam = StatFamily::for_models(&a, &b);
    let e = empirical_tv_lower(&a, &b, &fam, 4000, 2).unwrap();
    assert!(e.lower - 3.0 * e.se <= 0.1256637061435917, "{e:?}");
    assert!(fam.distances.contains(&0.02));
}

#[test]
fn family_registration_rejects_out_of_range_thresholds() {
    assert!(StatFamily::new(10, 2, vec![1.5]).is_err());
    assert!(StatFamily::new(10, 2, vec![0.0]).is_err());
    assert!(StatFamily::new(0, 2, vec![0.1]).is_err());
    let f = StatFamily::new(10, 2, vec![0.2, 0.1, 0.2]).unwrap();
    assert_eq!(f.distances, vec![0.1, 0.2]);
}

#[test]
fn gnz_poisson_intensity_identity() {
    let m = Model::poisson(torus(), 20.0).unwrap();
    let r = gnz_residual(&m, &GnzFunction::One, 4000, 1).unwrap();
    assert!(r.within_3se, "{r:?}");
    assert!((r.rhs - 20.0).abs() < 1e-9, "{r:?}");
    assert!((r.lhs - 20.0).abs() < 3.0 * (20.0f64 / 4000.0).sqrt() + 1e-9, "{r:?}");
}

#[test]
fn gnz_strauss() {
    let m = Model::strauss(torus(), 50.0, 0.5, 0.05).unwrap();
    for h in [GnzFunction::One, GnzFunction::EmptyBall { r: 0.05 }] {
        let r = gnz_residual(&m, &h, 3000, 4).unwrap();
        assert!(r.within_3se, "{r:?}");
    }
}

#[test]
fn gnz_rejects_values_outside_unit_interval() {
    let m = Model::poisson(torus(), 5.0).unwrap();
    let s = vec![PointConfig::from_points(2, &[[0.5, 0.5]]).unwrap()];
    let h = |_: &[f64], _: &PointConfig<f64>| 2.0;
    assert!(gnz_residual_from_samples(&m, &h, &s, 1, 4, 0).is_err());
}

#[test]
fn lattice_analogue_of_poisson_has_independent_cells() {
    // each of the 100 cells is occupied with probability a/(1+a), a = 50 * 0.01
    let m = Model::poisson(torus(), 50.0).unwrap();
    let p = build_grid_partition(m.window(), 10).unwrap();
    let s = sample_lattice_analogue(&m, &p, 10.0, 4000, 1.0, 6, 4000).unwrap();
    let counts: Vec<f64> = s.iter().map(|c| c.iter().sum::<u32>() as f64).collect();
    assert!(s.iter().all(|c| c.iter().all(|&n| n <= 1)));
    let e = MeanEstimate::from_samples(&counts);
    assert!((e.mean - 100.0 / 3.0).abs() < 4.0 * e.stderr, "{e:?}");
}

#[test]
fn identical_scenario_verifies() {
    let m = Model::strauss(torus(), 30.0, 0.5, 0.05).unwrap();
    let s = scenario(&m, &m, "verify", serde_json::json!({}));
    let (r, _) = verify_bounds_report(&s).unwrap();
    assert_eq!(r.theoretical.bound, 0.0);
    assert!(r.ordering_ok);
    assert!(r.empirical_lower <= 3.0 * r.empirical_se);
    assert_eq!(r.gnz_residuals.len(), 4);
    let c = r.coupling.unwrap();
    assert!(c.ok, "{c:?}");
}

#[test]
fn strauss_pair_ordering() {
    let h = Model::strauss(torus(), 50.0, 0.5, 0.1).unwrap();
    let xi = Model::strauss(torus(), 50.0, 0.4, 0.1).unwrap();
    let s = scenario(&xi, &h, "verify", serde_json::json!({"bound": {"theorem": "inhibitory_pip"}}));
    let (r, _) = verify_bounds_report(&s).unwrap();
    assert_eq!(r.theoretical.theorem_id, TheoremId::InhibitoryPip);
    assert!(r.ordering_ok, "{r:?}");
}

#[test]
fn area_sandwich_is_recorded() {
    let w = torus();
    let (beta0, gamma, big_r): (f64, f64, f64) = (2.0, 1e-3, 0.1);
    let beta = beta0 * (std::f64::consts::PI * 0.05f64.powi(2) * gamma.ln()).exp();
    let xi = Model::area_interaction(w.clone(), beta, gamma, big_r).unwrap();
    let h = Model::strauss(w, beta0, 0.0, big_r).unwrap();
    let s = scenario(&xi, &h, "verify", serde_json::json!({"mc": {"reps": 300, "coupling_reps": 0}}));
    let (r, _) = verify_bounds_report(&s).unwrap();
    assert_eq!(r.theoretical.theorem_id, TheoremId::AreaVsHardCore);
    let sw = r.sandwich.unwrap();
    assert!(sw.ordered && sw.lower > 0.0, "{sw:?}");
    assert!(r.ordering_ok);
    assert!(r.coupling.is_none());
}

#[test]
fn reports_are_deterministic() {
    let h = Model::strauss(torus(), 30.0, 0.5, 0.05).unwrap();
    let xi = Model::strauss(torus(), 30.0, 0.3, 0.05).unwrap();
    let s = scenario(&xi, &h, "verify", serde_json::json!({"mc": {"reps": 200, "coupling_reps": 50, "seed": 11}}));
    let a = run(&s, None).unwrap().report_json().unwrap();
    let b = run(&s, None).unwrap().report_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_keeps_minimum_and_rejects_foreign_parameters() {
    let m = Model::strauss(torus(), 50.0, 0.5, 0.1).unwrap();
    let s = scenario(
        &m,
        &m,
        "discretize",
        serde_json::json!({
            "bound": {"theorem": "discretization", "n_per_dim": 5},
            "sweep": {"n_per_dim": [5.0, 10.0]},
            "mc": {"reps": 100}
        }),
    );
    let out = run(&s, None).unwrap();
    let rows = out.sweep_rows();
    assert_eq!(rows.len(), 2);
    let Outcome::Discretize(r, _) = &out else { panic!() };
    assert_eq!(r.best.bound, rows[1].report.bound.min(rows[0].report.bound));
    assert_eq!(r.checks.len(), 2);
    assert!(r.checks.iter().all(|c| c.ok));

    let bad = scenario(&m, &m, "bound", serde_json::json!({"sweep": {"k": [1.0]}}));
    assert!(run_bound(&bad).is_err());
}

#[test]
fn scenario_validation() {
    let m = Model::poisson(torus(), 5.0).unwrap();
    let mut v = serde_json::json!({"model_xi": spec(&m), "model_h": spec(&m), "task": "bound", "mc": {"reps": 0}});
    assert!(Scenario::from_json(&v.to_string()).is_err());
    v["mc"] = serde_json::json!({"reps": 5, "typo": 1});
    assert!(Scenario::from_json(&v.to_string()).is_err());
    v["mc"] = serde_json::json!({"reps": 5});
    let s = Scenario::from_json(&v.to_string()).unwrap();
    assert_eq!(s.mc.burn_in, DEFAULT_BURN_IN);
    let (b, _) = run_bound(&s).unwrap();
    assert_eq!(b.bound, 0.0);
}
