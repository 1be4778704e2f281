//! Acceptance suite over the bundled scenarios: one PASS/FAIL line per
//! criterion, non-zero exit if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use acmcf::report::Timings;
use acmcf::{RunOptions, Runner, ScenarioConfig};
use acmcf_core::{Potential, ReportRow, VerificationReport};

struct Evaluated {
    report: VerificationReport,
    timings: Timings,
    wall: f64,
}

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e:#}"))
}

fn evaluate(name: &str, threads: usize) -> Evaluated {
    let start = Instant::now();
    let opts = RunOptions {
        threads: Some(threads),
        out: Some(std::env::temp_dir().join("acmcf-acceptance").join(name)),
        dump_fields: false,
    };
    let runner = Runner::new(scenario(name), &opts).unwrap_or_else(|e| panic!("{name}: {e:#}"));
    let (report, timings) = runner.evaluate().unwrap_or_else(|e| panic!("{name}: {e:#}"));
    Evaluated {
        report,
        timings,
        wall: start.elapsed().as_secs_f64(),
    }
}

/// Rows whose check name starts with `prefix`, optionally at one ε.
fn rows<'a>(r: &'a VerificationReport, prefix: &str, eps: Option<f64>) -> Vec<&'a ReportRow> {
    r.rows
        .iter()
        .filter(|row| row.check.starts_with(prefix) && (eps.is_none() || row.eps == eps))
        .collect()
}

/// Every row passes and there is at least `min` of them.
fn all_pass(rows: &[&ReportRow], min: usize) -> bool {
    rows.len() >= min && rows.iter().all(|r| r.pass)
}

fn worst(rows: &[&ReportRow]) -> String {
    rows.iter()
        .map(|r| format!("{}={:.3e}", r.check, r.value))
        .collect::<Vec<_>>()
        .join(" ")
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn line(&mut self, label: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn main() -> ExitCode {
    // `cargo test -- <filter>` style arguments are accepted and ignored
    let mut suite = Suite { failed: 0 };

    let planar = evaluate("planar-profile-1d", 1);
    let truncated = evaluate("truncated-sphere-analytic", 1);
    let sphere = evaluate("shrinking-sphere-3d-small", 1);
    let circle = evaluate("shrinking-circle-2d", 1);
    let pde = [&planar, &sphere, &circle];

    let sigma = Potential::standard().sigma();
    let err = (sigma - 4.0 / 3.0).abs();
    let r = rows(&planar.report, "sigma", None);
    suite.line(
        "sigma quadrature",
        err <= 1e-12 && all_pass(&r, 1),
        format!("|sigma - 4/3| = {err:.3e}"),
    );

    let profile = rows(&planar.report, "profile_error", Some(0.05));
    let equi = rows(&planar.report, "equipartition", Some(0.05));
    let steps = planar.timings.runs.first().map_or(0, |r| r.steps);
    suite.line(
        "planar profile fidelity",
        all_pass(&profile, 1) && all_pass(&equi, 1) && steps == 10_000 && planar.wall < 10.0,
        format!(
            "{} {} steps={steps} runtime={:.2}s",
            worst(&profile),
            worst(&equi),
            planar.wall
        ),
    );

    let radius = rows(&circle.report, "radius_law", Some(0.02));
    let run = circle
        .timings
        .runs
        .iter()
        .find(|r| r.epsilon == 0.02 && r.resolution == 256);
    let secs = run.map_or(f64::INFINITY, |r| r.seconds);
    suite.line(
        "radius law",
        all_pass(&radius, 1) && secs < 300.0,
        format!("relative error {} runtime={secs:.1}s", worst(&radius)),
    );

    let energy: Vec<&ReportRow> = pde
        .iter()
        .flat_map(|e| rows(&e.report, "energy_dissipation", None))
        .collect();
    suite.line(
        "energy dissipation",
        all_pass(&energy, 5),
        format!(
            "{} rows, sup/mu0 max {:.6}",
            energy.len(),
            energy.iter().map(|r| r.value / r.target).fold(0.0, f64::max)
        ),
    );

    let decay = rows(&circle.report, "discrepancy_", None);
    suite.line("discrepancy decay", all_pass(&decay, 3), worst(&decay));

    let brakke = rows(&circle.report, "brakke_", Some(0.02));
    suite.line(
        "brakke inequality",
        all_pass(&brakke, 5) && brakke.len() == 5,
        worst(&brakke),
    );

    let mut bv = rows(&circle.report, "bv_plateau", Some(0.02));
    bv.extend(rows(&circle.report, "bv_convergence", None));
    suite.line("bv formula", all_pass(&bv, 3), worst(&bv));

    let jump: Vec<&ReportRow> = ["bv_jump_detect", "abscont_jump_detect"]
        .iter()
        .flat_map(|c| rows(&truncated.report, c, None))
        .collect();
    suite.line(
        "counterexample detection",
        all_pass(&jump, 2) && jump.iter().all(|r| r.must_detect),
        worst(&jump),
    );

    let identity: Vec<&ReportRow> = pde
        .iter()
        .flat_map(|e| rows(&e.report, "abscont_identity", None))
        .collect();
    suite.line(
        "space-time identity",
        all_pass(&identity, 5),
        format!(
            "max violation {:.3e}",
            identity.iter().map(|r| r.value).fold(0.0, f64::max)
        ),
    );

    let geo = rows(&truncated.report, "geometric_", None);
    suite.line("co-area and slicing identities", all_pass(&geo, 10), worst(&geo));

    let density = rows(&circle.report, "density_ratio", None);
    suite.line("density ratio", all_pass(&density, 3), worst(&density));

    let l2: Vec<&ReportRow> = pde.iter().flat_map(|e| rows(&e.report, "l2_", None)).collect();
    suite.line("l2 bound", all_pass(&l2, 10), format!("{} rows", l2.len()));

    let mfp = rows(&circle.report, "mfp_", None);
    suite.line("measure-function pairs", all_pass(&mfp, 2), worst(&mfp));

    let mut same = true;
    let mut detail = Vec::new();
    for (name, first) in [
        ("planar-profile-1d", &planar),
        ("truncated-sphere-analytic", &truncated),
        ("shrinking-sphere-3d-small", &sphere),
    ] {
        let csv = first.report.to_csv();
        let again = evaluate(name, 1).report.to_csv() == csv;
        let wide = evaluate(name, 8).report.to_csv() == csv;
        same &= again && wide;
        detail.push(format!("{name} rerun={again} threads8={wide}"));
    }
    let wide = evaluate("shrinking-circle-2d", 8).report.to_csv() == circle.report.to_csv();
    same &= wide;
    detail.push(format!("shrinking-circle-2d threads8={wide}"));
    suite.line("determinism", same, detail.join(", "));

    let every: Vec<&ReportRow> = pde
        .iter()
        .chain([&&truncated])
        .flat_map(|e| e.report.failures())
        .collect();
    println!("report rows failing across scenarios: {}", every.len());
    for r in &every {
        println!(
            "  {} eps={:?} {} value={} target={} tol={}",
            r.scenario, r.eps, r.check, r.value, r.target, r.tolerance
        );
    }

    if suite.failed == 0 {
        println!("acceptance: all 14 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 14 criteria fail", suite.failed);
        ExitCode::FAILURE
    }
}
