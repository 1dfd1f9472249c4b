use std::f64::consts::PI;

use imcf::field::identity2;
use imcf::gbc::*;
use imcf::spacelike::*;
use imcf::{Error, GridChart, ScalarField, SpacelikeState};
use nalgebra::DMatrix;

fn graph_state(nodes: usize, amplitude: f64) -> SpacelikeState {
    let grid = GridChart::torus(nodes).unwrap();
    let u = ScalarField::new(grid.sample(|x, y| amplitude * x.sin() * y.sin()));
    from_graph(&grid, &u).unwrap()
}

#[test]
fn flat_state_scalars_vanish() {
    let s = SpacelikeState::flat(GridChart::torus(16).unwrap());
    let d = derived_scalars(&s).unwrap();
    for f in [&d.mean, &d.a2, &d.grad_a2, &d.traceless2] {
        assert_eq!(f.max_abs(), 0.0);
    }
    assert_eq!(gauss_residual(&s).unwrap().0, 0.0);
    assert_eq!(codazzi_residual(&s).unwrap(), 0.0);
    assert_eq!(sectional_bound(&s).unwrap().from_h, 0.0);
    assert_eq!(euler_characteristic(&s).unwrap(), 0.0);
}

#[test]
fn umbilic_frame_scalars() {
    // φ = ψ = 1 realized pointwise on a flat chart
    let grid = GridChart::torus(16).unwrap();
    let s = state_from_fn(grid, |_, _| identity2(), |_, _| identity2()).unwrap();
    let d = derived_scalars(&s).unwrap();
    for k in 0..grid.len() {
        assert!((d.mean.values[k] - 2.0).abs() < 1e-15);
        assert!((d.a2.values[k] - 2.0).abs() < 1e-15);
        assert_eq!(d.grad_a2.values[k], 0.0);
        assert!(d.traceless2.values[k].abs() < 1e-15);
    }
    // flat metric cannot carry h = g: the h-product term is the whole residual
    let (res, field) = gauss_residual(&s).unwrap();
    assert!((res - 1.0).abs() < 1e-15);
    assert!(field.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn traceless_identity_on_generic_state() {
    let grid = GridChart::torus(24).unwrap();
    let s = state_from_fn(
        grid,
        |x, y| {
            [
                [1.0 + 0.3 * x.sin(), 0.2 * (x - y).cos()],
                [0.2 * (x - y).cos(), 1.5 + 0.4 * y.cos()],
            ]
        },
        |x, y| [[x.cos(), 0.5 * y.sin()], [0.5 * y.sin(), (x + y).sin()]],
    )
    .unwrap();
    let d = derived_scalars(&s).unwrap();
    for k in 0..grid.len() {
        let expect = d.a2.values[k] - d.mean.values[k].powi(2) / 2.0;
        assert!((d.traceless2.values[k] - expect).abs() < 1e-12);
    }
}

#[test]
fn graph_residuals_converge_second_order() {
    let levels: Vec<(f64, f64)> = [32, 64, 128]
        .map(|n| {
            let s = graph_state(n, 0.2);
            (gauss_residual(&s).unwrap().0, codazzi_residual(&s).unwrap())
        })
        .to_vec();
    for w in levels.windows(2) {
        let rg = w[0].0 / w[1].0;
        let rc = w[0].1 / w[1].1;
        assert!((3.2..=4.8).contains(&rg), "gauss {levels:?}");
        assert!((3.2..=4.8).contains(&rc), "codazzi {levels:?}");
    }
}

#[test]
fn graph_torus_euler_characteristic_vanishes() {
    let chi = euler_characteristic(&graph_state(128, 0.2)).unwrap();
    assert!(chi.abs() < 1e-3, "{chi}");
    let flat = graph_state(32, 0.0);
    assert_eq!(flat.h.max_abs(), 0.0);
    assert_eq!(euler_characteristic(&flat).unwrap(), 0.0);
}

#[test]
fn steep_graph_is_rejected() {
    let grid = GridChart::torus(64).unwrap();
    let u = ScalarField::new(grid.sample(|x, _| 1.1 * x.sin()));
    assert!(matches!(
        from_graph(&grid, &u),
        Err(Error::NotSpacelike { .. })
    ));
}

#[test]
fn hessian_codazzi_is_small() {
    let grid = GridChart::torus(64).unwrap();
    let s = state_from_fn(
        grid,
        |_, _| identity2(),
        |x, y| {
            let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
            [
                [-0.1 * sx * sy, 0.1 * cx * cy],
                [0.1 * cx * cy, -0.1 * sx * sy],
            ]
        },
    )
    .unwrap();
    let dx = grid.spacing();
    assert!(codazzi_residual(&s).unwrap() < dx * dx);
}

#[test]
fn sectional_bound_cross_check() {
    let diffs: Vec<f64> = [32, 64, 128]
        .map(|n| {
            let b = sectional_bound(&graph_state(n, 0.2)).unwrap();
            (b.from_h - b.from_curvature).abs()
        })
        .to_vec();
    assert!(diffs[2] < 1e-3, "{diffs:?}");
    assert!(
        diffs[0] / diffs[1] > 3.0 && diffs[1] / diffs[2] > 3.0,
        "{diffs:?}"
    );
}

#[test]
fn homogeneous_examples() {
    let s = homogeneous_hyperbolic(2, 1.0, 4.0 * PI, -2).unwrap();
    assert_eq!(s.mean_curvature(), 2.0);
    assert_eq!(s.a2(), 2.0);
    assert_eq!(s.sup_sectional(), 1.0);
    assert!((s.euler_characteristic() + 2.0).abs() < 1e-12);

    let v4 = hyperbolic_base_volume(4, 2);
    let s4 = homogeneous_hyperbolic(4, 1.0, v4, 2).unwrap();
    assert_eq!(s4.mean_curvature(), 4.0);
    assert_eq!(s4.a2(), 4.0);
    // hyperbolic 4-manifolds: Vol = 4π²χ/3
    assert!((v4 - 8.0 * PI * PI / 3.0).abs() < 1e-12);

    assert!(matches!(
        homogeneous_hyperbolic(3, 1.0, 4.0 * PI, -2),
        Err(Error::OddDimension(3))
    ));
    assert!(matches!(
        homogeneous_hyperbolic(2, 1.0, 5.0, -2),
        Err(Error::InconsistentBase { .. })
    ));

    let flat = homogeneous_flat(2, 1.0, 4.0 * PI * PI).unwrap();
    assert_eq!(flat.euler_characteristic(), 0.0);
    assert_eq!(flat.sup_sectional(), 0.0);
}

#[test]
fn sphere_volumes() {
    assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-14);
    assert!((sphere_volume(2) - 12.566371).abs() < 1e-6);
    assert!((sphere_volume(4) - 26.318945).abs() < 1e-6);
    assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
}

#[test]
fn chern_density_examples() {
    let g = DMatrix::<f64>::identity(2, 2);
    let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
    let closed = chern_density_closed_form(&g, &h, 2).unwrap();
    let pf = chern_density_pfaffian(&g, &h, 2).unwrap();
    assert!((closed + 1.0 / PI).abs() < 1e-15);
    assert!((pf - closed).abs() < 1e-12);
    let id = chern_density_closed_form(&g, &g, 2).unwrap();
    assert!((id + 0.5 / PI).abs() < 1e-15);
    for n in [2, 4, 6] {
        let g = DMatrix::<f64>::identity(n, n);
        let z = DMatrix::<f64>::zeros(n, n);
        assert_eq!(chern_density_closed_form(&g, &z, n).unwrap(), 0.0);
        assert_eq!(chern_density_pfaffian(&g, &z, n).unwrap(), 0.0);
    }
    assert!(chern_density_closed_form(&g, &h, 3).is_err());
}

#[test]
fn homogeneous_euler_characteristic_closed_form() {
    // χ computed from the state equals the base value whenever φ = ψ²
    for phi in [0.5, 1.0, 3.0, 41.0] {
        let mut s = homogeneous_hyperbolic(2, 1.0, 4.0 * PI, -2).unwrap();
        s.phi = phi;
        s.psi = phi.sqrt();
        assert!((s.euler_characteristic() + 2.0).abs() < 1e-12);
    }
}
