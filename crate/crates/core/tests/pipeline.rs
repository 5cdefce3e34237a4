use groundstate::cc::{classify, synthetic, Family, Label, MeasureSequence, DEFAULT_RADII};
use groundstate::config::CcThresholds;
use groundstate::experiments::{ground_state, hyperbolic_positive_energy, zero_multiplier_identity};
use groundstate::fields::functionals;
use groundstate::solvers::{minimize_e, minimize_f, shoot};
use groundstate::*;

#[test]
fn report_json_round_trip_is_stable() {
    let cfg = SolverConfig::default().with_m(1000);
    let rep = minimize_f(&ModelSpace::euclidean(2).unwrap(), &ProblemParams::new(2, 3.0, 1.0, 1.0), &cfg).unwrap();
    let a = serde_json::to_string(&rep).unwrap();
    let again = minimize_f(&ModelSpace::euclidean(2).unwrap(), &ProblemParams::new(2, 3.0, 1.0, 1.0), &cfg).unwrap();
    assert_eq!(a, serde_json::to_string(&again).unwrap());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["converged"], true);
    assert_eq!(v["problem"], "f_lambda");
}

#[test]
fn energy_and_f_problems_share_the_ground_state() {
    // The energy minimizer at the mass of the K = 1 F_λ ground state solves
    // the same equation with multiplier λ.
    let cfg = SolverConfig::default().with_m(2000).with_r_max(30.0);
    let space = ModelSpace::euclidean(1).unwrap();
    let params = ProblemParams::new(1, 3.0, 1.0, 1.0);
    let g = ground_state(&space, &params, &cfg).unwrap();
    let mass = g.functionals.mass;
    let e = minimize_e(&space, &ProblemParams::new(1, 3.0, 1.0, mass), &cfg).unwrap();
    assert!(e.converged);
    assert!((e.multiplier - 1.0).abs() < 1e-3, "{}", e.multiplier);
    assert!(e.minimizer.rel_sup_diff(&g.u).unwrap() < 1e-3);
}

#[test]
fn shooting_matches_ground_state_in_two_dimensions() {
    let cfg = SolverConfig::default().with_m(4000);
    let space = ModelSpace::euclidean(2).unwrap();
    let params = ProblemParams::new(2, 3.0, 1.0, 1.0);
    let g = ground_state(&space, &params, &cfg).unwrap();
    let s = shoot(&space, &params, &cfg).unwrap();
    assert!(g.u.rel_sup_diff(&s).unwrap() < 1e-3);
    // Townes profile amplitude.
    assert!((s.values[0] - 2.206_2).abs() < 1e-3, "{}", s.values[0]);
}

#[test]
fn zero_multiplier_on_hyperbolic_space() {
    let cfg = SolverConfig::default();
    let space = ModelSpace::hyperbolic(3).unwrap();
    let params = ProblemParams::new(3, 2.0, 0.0, 1.0);
    let pe = hyperbolic_positive_energy(&space, &params, &cfg).unwrap();
    assert!(pe.positive && pe.identity_rel_err < 1e-6);
    let z = zero_multiplier_identity(&pe.ground_state.u, 2.0).unwrap();
    assert!(z.gradient_rel_err < 1e-4 && z.energy_rel_err < 1e-4 && z.positive);
    // The general identity at λ = 0 gives the same value.
    assert!((z.expected_energy - pe.identity_value).abs() < 1e-9 * z.expected_energy);
    let f = functionals(&pe.ground_state.u, &params);
    assert!((f.energy - pe.energy).abs() < 1e-12 * f.energy);
}

#[test]
fn euclidean_contrast_has_negative_energy() {
    let cfg = SolverConfig::default();
    let pe = hyperbolic_positive_energy(&ModelSpace::euclidean(2).unwrap(), &ProblemParams::new(2, 2.0, 1.0, 1.0), &cfg)
        .unwrap();
    assert!(pe.energy < 0.0);
    assert!(hyperbolic_positive_energy(&ModelSpace::hyperbolic(3).unwrap(), &ProblemParams::new(3, 2.0, 0.5, 1.0), &cfg)
        .is_err());
}

#[test]
fn classifier_reads_csv() {
    let seq = synthetic(Family::SeparatingPair, 10).unwrap();
    let mut csv = String::from("k,x,y,mass\n");
    for (k, c) in seq.entries.iter().enumerate() {
        for i in 0..c.len() {
            let p = c.point(i);
            csv.push_str(&format!("{k},{},{},{}\n", p[0], p[1], c.masses[i]));
        }
    }
    let read = MeasureSequence::from_csv(csv.as_bytes()).unwrap();
    let r = classify(&read, &DEFAULT_RADII, &CcThresholds::default()).unwrap();
    assert_eq!(r.label, Label::Splitting);
}
