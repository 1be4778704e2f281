use std::path::PathBuf;

use acmcf::ScenarioConfig;

fn load(name: &str) -> ScenarioConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    ScenarioConfig::load(&p).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn bundled_scenarios_validate() {
    for name in [
        "planar-profile-1d",
        "shrinking-circle-2d",
        "shrinking-sphere-3d-small",
        "truncated-sphere-analytic",
    ] {
        let cfg = load(name);
        assert_eq!(cfg.name, name);
    }
}

#[test]
fn circle_sweep_halves_eps_and_h_together() {
    let cfg = load("shrinking-circle-2d");
    let eps: Vec<f64> = cfg.levels.iter().map(|l| l.epsilon).collect();
    assert_eq!(eps, [0.04, 0.02, 0.01]);
    let ratios: Vec<f64> = cfg
        .levels
        .iter()
        .map(|l| l.epsilon * l.resolution as f64 / cfg.extent)
        .collect();
    assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12), "{ratios:?}");
}

#[test]
fn planar_profile_runs_ten_thousand_steps() {
    let cfg = load("planar-profile-1d");
    let l = &cfg.levels[0];
    let h = cfg.extent / l.resolution as f64;
    // stable step h²/(4n) in one dimension at unit safety
    let dt = h * h / 4.0;
    assert_eq!((cfg.t_end / dt).round(), 10_000.0);
}
