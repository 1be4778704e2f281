use acmcf_core::fields::ScalarField;
use acmcf_core::geometry::level_set_measure;
use acmcf_core::solver::{evolve_with, EvolveOptions};
use acmcf_core::{Boundary, Grid, PhaseField, Potential, ReportRow, Sided, VerificationReport};
use proptest::prelude::*;

fn smooth_field(n: usize, coeffs: &[(f64, f64, f64)]) -> ScalarField {
    let g = Grid::cube(2, n, 1.0, Boundary::Periodic).unwrap();
    ScalarField::from_fn(g, |p| {
        let mut s = 0.0;
        for (k, &(a, kx, ky)) in coeffs.iter().enumerate() {
            let phase = core::f64::consts::TAU * (kx.round() * p[0] + ky.round() * p[1]) + k as f64;
            s += a * phase.sin();
        }
        s.tanh()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_keeps_the_maximum_principle_and_dissipates(
        coeffs in prop::collection::vec((-2.0..2.0f64, 0.0..3.0f64, 0.0..3.0f64), 1..4),
        safety in 0.3..1.0f64,
    ) {
        let pot = Potential::standard();
        let f0 = PhaseField::new(smooth_field(32, &coeffs), 0.1, 0.0).unwrap();
        let traj = evolve_with(&f0, EvolveOptions {
            t_end: 0.004,
            snapshot_every: 0.001,
            safety,
            record_step_energy: true,
        }, &pot).unwrap();
        for f in &traj.snapshots {
            prop_assert!(f.values().iter().all(|v| v.abs() <= 1.0 + 1e-3));
        }
        let log = traj.step_energy.unwrap();
        let mu0 = log[0];
        for w in log.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * mu0.max(1e-300));
        }
    }

    #[test]
    fn level_set_measure_ignores_the_sign(
        coeffs in prop::collection::vec((-2.0..2.0f64, 0.0..3.0f64, 0.0..3.0f64), 1..4),
    ) {
        let f = smooth_field(24, &coeffs);
        let neg = f.map(|v| -v);
        let (a, b) = (level_set_measure(&f), level_set_measure(&neg));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn report_order_is_canonical(
        keys in prop::collection::vec((0usize..3, prop::option::of(0usize..4), 0usize..3, -1.0..1.0f64), 1..24),
        seed in any::<u64>(),
    ) {
        let scen = ["a", "b", "c"];
        let eps = [0.04, 0.02, 0.01, 0.005];
        let checks = ["x", "y", "z"];
        let rows: Vec<ReportRow> = keys
            .iter()
            .map(|&(s, e, c, v)| ReportRow::new(scen[s], e.map(|k| eps[k]), checks[c], v, 0.0, 0.5, Sided::TwoSided, 1.0))
            .collect();
        let mut shuffled = rows.clone();
        // deterministic permutation from the seed
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let mut a = VerificationReport::new();
        a.extend(rows);
        a.sort();
        let mut b = VerificationReport::new();
        b.extend(shuffled);
        b.sort();
        // equal keys may keep distinct values; compare the key columns
        let key = |r: &ReportRow| (r.scenario.clone(), r.eps.map(f64::to_bits), r.check.clone());
        let ka: Vec<_> = a.rows.iter().map(key).collect();
        let kb: Vec<_> = b.rows.iter().map(key).collect();
        prop_assert_eq!(ka, kb);
        for r in &a.rows {
            prop_assert_eq!(r.pass, r.value.abs() <= 0.5);
        }
    }

    #[test]
    fn profile_is_odd_and_monotone(r in -20.0..20.0f64, d in 1e-3..1.0f64) {
        let pot = Potential::standard();
        prop_assert!((pot.psi(r) + pot.psi(-r)).abs() <= 1e-15);
        prop_assert!(pot.psi(r + d) >= pot.psi(r));
        prop_assert!(pot.w(pot.psi(r)) >= 0.0);
    }
}
