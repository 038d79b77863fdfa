use multiclock::analysis::{
    check_constraints, compute_delta_w, delta_t_m, delta_w_numerical, system_contract_summary, AnalysisError, ParameterSet,
};
use multiclock::cli::{DELAYED_PARAMS, DELAYED_SCENARIO, NOMINAL_PARAMS, NOMINAL_SCENARIO};
use multiclock::controllers::FblGains;
use multiclock::executive::Scenario;
use multiclock::plant::PendulumParams;
use proptest::prelude::*;

/// Unit pendulum with U = 12, K = (4, 4) and a 2 ms tracking period.
fn fixture() -> ParameterSet {
    let plant = PendulumParams::default();
    let lip = plant.lipschitz_constants();
    let gains = FblGains { k: [4.0, 4.0] };
    let mut p = ParameterSet::from_toml(NOMINAL_PARAMS).unwrap();
    p.t_max_l = 0.002;
    p.U = plant.u_max;
    p.G = lip.g;
    p.L_f = lip.l_f;
    p.L_g = lip.l_g;
    p.A_cl_norm = gains.a_cl_norm();
    p
}

#[test]
fn delta_w_fixture() {
    let p = fixture();
    assert_eq!((p.L_f, p.L_g, p.G), (9.81, 0.0, 1.0));
    assert!((p.A_cl_norm - 5.701562118716424).abs() < 1e-12);
    assert!((compute_delta_w(&p) - 0.024759307398411957).abs() < 1e-12);
}

#[test]
fn delta_w_matches_numerical_gronwall_within_five_percent() {
    for p in [fixture(), ParameterSet::from_toml(NOMINAL_PARAMS).unwrap()] {
        let (closed, numeric) = (compute_delta_w(&p), delta_w_numerical(&p));
        assert!((closed - numeric).abs() <= 0.05 * numeric, "{closed} vs {numeric}");
    }
}

#[test]
fn delta_w_vanishes_and_grows_with_u() {
    let mut p = fixture();
    p.t_max_l = 1e-9;
    assert!(compute_delta_w(&p) < 1e-7);
    let p = fixture();
    let mut q = p;
    q.U *= 2.0;
    assert!((compute_delta_w(&q) - 2.0 * compute_delta_w(&p)).abs() < 1e-15);
    let (mut p, mut q) = (p, q);
    p.L_g = 0.5;
    q.L_g = 0.5;
    assert!(compute_delta_w(&q) > 2.0 * compute_delta_w(&p));
}

#[test]
fn shipped_parameter_sets() {
    let nominal = check_constraints(&ParameterSet::from_toml(NOMINAL_PARAMS).unwrap()).unwrap();
    for id in ["sensor_chain", "init_tracking", "inductive_tracking", "progress", "E_contains"] {
        assert!(nominal.get(id).unwrap().satisfied(), "{id}");
    }
    let delayed = check_constraints(&ParameterSet::from_toml(DELAYED_PARAMS).unwrap()).unwrap();
    assert!(!delayed.get("inductive_tracking").unwrap().satisfied());
    assert!(delayed.violated().contains(&"inductive_tracking".to_string()));
}

#[test]
fn shipped_derived_constants_match_the_scenarios() {
    for (scenario, params) in [(NOMINAL_SCENARIO, NOMINAL_PARAMS), (DELAYED_SCENARIO, DELAYED_PARAMS)] {
        let sc = Scenario::from_toml(scenario).unwrap();
        let p = ParameterSet::from_toml(params).unwrap();
        assert_eq!(sc.params, p);
        assert_eq!(p.with_derived(&sc.derived_constants().unwrap()), p);
        for (clock, t) in [(&sc.clock.m, [p.t_min_m, p.t_max_m, p.t_avg_m]), (&sc.clock.l, [p.t_min_l, p.t_max_l, p.t_avg_l])] {
            assert_eq!([clock.T_min, clock.T_max, clock.T_avg], t);
        }
    }
}

#[test]
fn summary_is_refused_for_infeasible_parameters() {
    let p = ParameterSet::from_toml(DELAYED_PARAMS).unwrap();
    match system_contract_summary(&p, [0.0, 0.0]) {
        Err(AnalysisError::InfeasibleParameters(ids)) => assert!(ids.contains(&"inductive_tracking".to_string())),
        other => panic!("{other:?}"),
    }
    assert!(matches!(ParameterSet::from_toml("T_min_m = 1.0"), Err(AnalysisError::MissingParameter(_))));
}

fn slacks(p: &ParameterSet) -> Vec<f64> {
    check_constraints(p).unwrap().constraints.iter().map(|c| c.slack()).collect()
}

proptest! {
    #[test]
    fn slacks_never_grow_with_freshness_or_speed(which in 0usize..4, bump in 0.0f64..0.01) {
        let p = ParameterSet::from_toml(NOMINAL_PARAMS).unwrap();
        let mut q = p;
        match which {
            0 => q.t_fresh_m += bump,
            1 => q.t_fresh_l += bump,
            2 => q.D_x += 100.0 * bump,
            _ => q.D_d += 100.0 * bump,
        }
        prop_assume!(delta_t_m(&q).is_ok());
        for (a, b) in slacks(&p).iter().zip(slacks(&q)) {
            prop_assert!(b <= a + 1e-12, "{a} -> {b}");
        }
    }

    #[test]
    fn tracking_gate_trades_eq3_eq4_against_eq5(bump in 0.0f64..0.05) {
        let p = ParameterSet::from_toml(NOMINAL_PARAMS).unwrap();
        let mut q = p;
        q.delta_dyn_FL += bump;
        let (a, b) = (check_constraints(&p).unwrap(), check_constraints(&q).unwrap());
        for id in ["init_tracking", "inductive_tracking"] {
            prop_assert!(b.get(id).unwrap().slack() >= a.get(id).unwrap().slack() - 1e-12);
        }
        prop_assert!(b.get("progress").unwrap().slack() <= a.get("progress").unwrap().slack() + 1e-12);
    }
}
