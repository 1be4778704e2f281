use acmcf_core::geometry::{prepare_initial_data, volume_and_perimeter};
use acmcf_core::measures::interface_fields;
use acmcf_core::solver::{evolve, stable_dt};
use acmcf_core::verify::{
    brakke_residual, bv_residual, energy_dissipation_check, equipartition_ratio, l2_flow_check, profile_error,
    radius_from_volume,
};
use acmcf_core::{Boundary, Grid, Potential, Shape, ShapeSpec, TestFunction, TestKind};

fn planar() -> ShapeSpec {
    ShapeSpec::new(
        Shape::HalfSpace {
            point: [0.5, 0.0, 0.0],
            normal: [1.0, 0.0, 0.0],
        },
        1,
    )
}

#[test]
fn planar_profile_is_stationary() {
    let pot = Potential::standard();
    let g = Grid::cube(1, 512, 1.0, Boundary::Reflective).unwrap();
    let eps = 0.05;
    let dt = stable_dt(&pot, eps, g.spacing(), 1, 1.0).unwrap();
    assert_eq!(dt, 1.0 / (4.0 * 512.0 * 512.0));
    let f0 = prepare_initial_data(&planar(), eps, &g, &pot).unwrap();
    let t_end = 1e4 * dt;
    let traj = evolve(&f0, t_end, t_end / 20.0, 1.0, &pot).unwrap();
    let last = traj.snapshots.last().unwrap();
    assert!((last.time() - t_end).abs() < 1e-15);

    assert!(profile_error(last, &planar(), &pot) <= 1e-3);
    assert!(equipartition_ratio(last, &pot) <= 1e-2);

    let itf = interface_fields(last, &pot);
    assert!(itf.band_len() > 0);
    for i in itf.band_cells() {
        assert!(itf.velocity[i].abs() <= 1e-3, "V = {}", itf.velocity[i]);
        assert_eq!(itf.curvature[i], 0.0);
    }

    let energy = energy_dissipation_check(&traj, &pot).unwrap();
    // trapezoid dissipation over-integrates a decaying rate only slightly
    assert!(energy.sup_lhs <= energy.mu0 * (1.0 + 1e-6));
    assert!(energy.dissipation <= 1e-4 * energy.mu0);

    let c = 3.0;
    let plateau = TestFunction::new(TestKind::ConstantOnWindow { ramp: 0.05 }, 1, [0.5, 0.0, 0.0], 0.3, c);
    let brakke = brakke_residual(&traj, &pot, std::slice::from_ref(&plateau), 0.0, t_end).unwrap();
    assert!(brakke[0].lhs.abs() <= 1e-3 * c * energy.mu0);
    assert!(brakke[0].residual().abs() <= 1e-3 * c * energy.mu0);

    let bv = bv_residual(&traj, &pot, std::slice::from_ref(&plateau), 0.0, t_end).unwrap();
    assert_eq!(bv[0].lhs, 0.0);
    assert!(bv[0].rhs.abs() <= 1e-3);

    let l2 = l2_flow_check(&traj, &pot, &[plateau]).unwrap();
    assert!(l2.max_ratio <= 1e-3);
}

#[test]
fn shrinking_circle_follows_the_radius_law() {
    let pot = Potential::standard();
    let g = Grid::cube(2, 256, 1.0, Boundary::Periodic).unwrap();
    let s = ShapeSpec::new(
        Shape::Ball {
            center: [0.5, 0.5, 0.0],
            radius: 0.3,
        },
        2,
    );
    let f0 = prepare_initial_data(&s, 0.02, &g, &pot).unwrap();
    let traj = evolve(&f0, 0.01, 0.001, 1.0, &pot).unwrap();
    let volumes: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|f| volume_and_perimeter(f, &pot).volume)
        .collect();
    assert!(volumes.windows(2).all(|w| w[1] < w[0]));
    let r = radius_from_volume(traj.snapshots.last().unwrap());
    let exact = 0.07f64.sqrt();
    assert!((r / exact - 1.0).abs() <= 0.03, "r = {r}");
    for f in &traj.snapshots {
        assert!(f.values().iter().all(|v| v.abs() <= 1.0 + 1e-3));
    }
}

#[test]
fn refinement_moves_the_radius_less_than_the_coarse_error() {
    let pot = Potential::standard();
    let run = |n: usize, eps: f64| {
        let g = Grid::cube(2, n, 1.0, Boundary::Periodic).unwrap();
        let s = ShapeSpec::new(
            Shape::Ball {
                center: [0.5, 0.5, 0.0],
                radius: 0.3,
            },
            2,
        );
        let f0 = prepare_initial_data(&s, eps, &g, &pot).unwrap();
        let traj = evolve(&f0, 0.01, 0.01, 1.0, &pot).unwrap();
        radius_from_volume(traj.snapshots.last().unwrap())
    };
    let exact = 0.07f64.sqrt();
    let coarse = run(64, 0.04);
    let fine = run(128, 0.02);
    assert!((fine - coarse).abs() < (coarse - exact).abs(), "{fine} vs {coarse}");
}
