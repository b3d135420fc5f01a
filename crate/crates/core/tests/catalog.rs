use lgpac::constructions::{catalog, get, Oracle};
use lgpac::simulator::{simulate, Samples, SolverConfig, TimeGrid};

#[test]
fn closed_form_entries_match_their_formulas() {
    for c in catalog().into_iter().filter(|c| c.oracle == Oracle::ClosedForm) {
        let doc = &c.document;
        let bound = doc.bound().unwrap();
        let traces = simulate(&bound, &doc.time_grid(None, None).unwrap(), &SolverConfig::default()).unwrap();
        // the exponential generator reaches 3·2^10
        let tol = if c.name == "modulus_exp2" { 3072.0 * 1e-8 } else { 1e-6 };
        for (channel, err) in doc.expect_errors(&traces).unwrap() {
            assert!(err < tol, "{}: {channel} deviates by {err:e}", c.name);
        }
    }
}

#[test]
fn second_order_parts_start_at_one_over_e() {
    for (name, ch) in [("gamma1", "gamma1_d"), ("gamma2", "gamma2_d")] {
        let c = get(name).unwrap();
        let bound = c.document.bound().unwrap();
        let traces = simulate(&bound, &TimeGrid::at(&[1.0]).unwrap(), &SolverConfig::default()).unwrap();
        let Samples::Grid(v) = &traces.channel(ch).unwrap().samples else { panic!() };
        assert!(v[0].iter().all(|d| (d - (-1f64).exp()).abs() < 1e-15));
    }
}

#[test]
fn step4_matches_direct_evaluation() {
    let c = get("zeta_step4").unwrap();
    let bound = c.document.bound().unwrap();
    let traces = simulate(&bound, &TimeGrid::uniform(10.0, 201).unwrap(), &SolverConfig::default()).unwrap();
    let grid = traces.grid.clone().unwrap();
    let Samples::Grid(v) = &traces.channel("pw").unwrap().samples else { panic!() };
    for x in [2.0, 3.0] {
        let j = grid.points().iter().position(|p| *p == x).unwrap();
        for (i, t) in traces.times.iter().enumerate() {
            let exact = (1.0 + t * t).powf(-x / 2.0);
            assert!((v[i][j] - exact).abs() < 1e-8, "x={x} t={t}");
        }
    }
}

#[test]
fn zeta2_vanishes_at_time_zero() {
    let c = get("zeta_step6").unwrap();
    let bound = c.document.bound().unwrap();
    let traces = simulate(&bound, &TimeGrid::at(&[0.5]).unwrap(), &SolverConfig::default()).unwrap();
    let Samples::Grid(v) = &traces.channel("zeta2").unwrap().samples else { panic!() };
    assert!(v[0].iter().all(|z| *z == 0.0));
}
