use std::f64::consts::PI;

use imcf::flow::{evolve, FlowConfig};
use imcf::monitor::*;
use imcf::spacelike::*;
use imcf::{AnyState, GridChart, ScalarField, SpacelikeState};

fn hyperbolic() -> HomogeneousState {
    homogeneous_hyperbolic(2, 1.0, 4.0 * PI, -2).unwrap()
}

fn graph(nodes: usize) -> SpacelikeState {
    let grid = GridChart::torus(nodes).unwrap();
    from_graph(
        &grid,
        &ScalarField::new(grid.sample(|x, y| 0.2 * x.sin() * y.sin())),
    )
    .unwrap()
}

#[test]
fn functionals_on_trivial_states() {
    let flat = AnyState::Grid(SpacelikeState::flat(GridChart::torus(16).unwrap()));
    assert_eq!(monotone_functionals(&flat).unwrap(), (0.0, 0.0));
    assert_eq!(pinching_integral(&flat).unwrap(), 0.0);
    assert_eq!(gbc_approx_chain(&flat).unwrap(), (0.0, 0.0));
    assert_eq!(corollary_energy_gap(&flat, 0.0).unwrap(), 0.0);

    let hyp = AnyState::Homogeneous(hyperbolic());
    let (mh, _) = monotone_functionals(&hyp).unwrap();
    assert!((mh - 16.0 * PI).abs() < 1e-12);
    assert!(pinching_integral(&hyp).unwrap().abs() < 1e-15);
    let (gap, cs) = gbc_approx_chain(&hyp).unwrap();
    assert!(gap.abs() < 1e-12 && cs.abs() < 1e-12);
    assert!(corollary_energy_gap(&hyp, -2.0).unwrap().abs() < 1e-12);
}

#[test]
fn graph_torus_energy_gap_is_positive() {
    let s = AnyState::Grid(graph(64));
    let chi = s.euler_characteristic().unwrap();
    assert!(corollary_energy_gap(&s, chi).unwrap() > 0.0);
    let (gap, cs) = gbc_approx_chain(&s).unwrap();
    assert!(gap <= cs && gap > 0.0);
    assert!(pinching_integral(&s).unwrap() > 0.0);
}

#[test]
fn det_inequality_examples() {
    let d = pointwise_det_inequality(&[1.0, 1.0]).unwrap();
    assert_eq!((d.lhs, d.rhs, d.holds), (0.0, 0.0, true));
    let d = pointwise_det_inequality(&[1.0, 0.0]).unwrap();
    assert!((d.lhs - 0.25).abs() < 1e-15);
    assert!((d.rhs - 2f64.sqrt()).abs() < 1e-12);
    assert!(d.holds);
    assert!(pointwise_det_inequality(&[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn decay_bound_formula() {
    assert_eq!(decay_bound(0.0, 2.0), 2.0);
    assert!((decay_bound(1.0, 2.0) - 1.0 / 2.5).abs() < 1e-15);
    assert_eq!(decay_bound(3.0, 0.0), 0.0);
}

#[test]
fn hyperbolic_trajectory_saturates_and_is_obstructed() {
    let cfg = FlowConfig {
        t_end: 10.0,
        ..FlowConfig::default()
    };
    let traj = evolve(&hyperbolic(), &cfg, &mut |_| {}).unwrap();
    assert!(amax_bound_check(&traj.records).abs() < 1e-8);
    let growth = volume_growth_check(2, &traj.dense).unwrap();
    assert!(growth.rate_residual < 1e-8, "{growth:?}");
    assert!(growth.integrated_violation < 1e-8);
    let cert = minvol_certificate(2, &traj.records).unwrap();
    assert!(cert
        .iter()
        .all(|e| (e.rescaled_volume - 4.0 * PI).abs() < 1e-6));
    assert_eq!(classify_certificate(&cert), CertificateOutcome::Obstructed);
    assert!(evaluate_trajectory(&traj).unwrap().iter().all(|c| c.pass));
}

#[test]
fn flat_torus_certificate_is_zero() {
    let cfg = FlowConfig {
        t_end: 0.25,
        ..FlowConfig::default()
    };
    let traj = evolve(
        &SpacelikeState::flat(GridChart::torus(16).unwrap()),
        &cfg,
        &mut |_| {},
    )
    .unwrap();
    let cert = minvol_certificate(2, &traj.records).unwrap();
    assert!(cert.iter().all(|e| e.rescaled_volume == 0.0));
    assert_eq!(classify_certificate(&cert), CertificateOutcome::Collapse);
    assert_eq!(amax_bound_check(&traj.records), 0.0);
    let checks = evaluate_trajectory(&traj).unwrap();
    assert_eq!(checks.len(), CHECK_NAMES.len());
    assert!(checks.iter().all(|c| c.pass), "{checks:?}");
}

#[test]
fn records_round_trip_through_values() {
    let traj = evolve(
        &hyperbolic(),
        &FlowConfig {
            t_end: 1.0,
            ..FlowConfig::default()
        },
        &mut |_| {},
    )
    .unwrap();
    for r in &traj.records {
        assert_eq!(MonitorRecord::from_values(&r.values()).unwrap(), *r);
    }
    assert_eq!(
        CSV_COLUMNS.join(","),
        "t,dt,vol,MH,MA,pinch,amax2,bound24,gauss_res,codazzi_res,chi,gbc_gap,cs_bound,cert"
    );
}

#[test]
fn violations_are_detected() {
    let traj = evolve(
        &hyperbolic(),
        &FlowConfig {
            t_end: 1.0,
            ..FlowConfig::default()
        },
        &mut |_| {},
    )
    .unwrap();
    let meta = TrajectoryMeta::of(&traj);
    let mut records = traj.records.clone();
    records[2].mh *= 1.1;
    records[3].amax2 += 1e-3;
    let checks = evaluate_checks(&meta, &records, &traj.dense).unwrap();
    let failed = |name: &str| !checks.iter().find(|c| c.name == name).unwrap().pass;
    assert!(failed("monotone_MH"));
    assert!(failed("decay_bound"));
}
