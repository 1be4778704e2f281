//! Scenario execution: evolution runs on a bounded worker pool, the check
//! registry, and the files each command writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use acmcf_core::fields::dump;
use acmcf_core::geometry::prepare_initial_data;
use acmcf_core::solver::{evolve_with, EvolveOptions};
use acmcf_core::verify::{
    analytic_block_offenders, analytic_bv_residual, brakke_residual, bv_residual, density_ratio_check,
    discrepancy_decay_check, energy_dissipation_check, equipartition_ratio, geometric_identity_checks, l2_flow_check,
    mesh_coarea_oracle, mfp_spacetime_check, profile_error, radius_from_volume, spacetime_abscont_report, BlockMasses,
    BvResidual, GeometricReport, Tolerances,
};
use acmcf_core::{Grid, PhaseTrajectory, Potential, ReferenceFlow, ReportRow, Sided, TestFunction, VerificationReport};
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use crate::config::{CheckConfig, CheckName, LevelConfig, ScenarioConfig, ScenarioKind};
use crate::report::{to_json, CheckTiming, RunTiming, Timings};

/// Command-line overrides of the scenario file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub dump_fields: bool,
}

/// One finished evolution.
pub struct Run {
    pub level: LevelConfig,
    pub traj: PhaseTrajectory,
    pub seconds: f64,
}

impl Run {
    pub fn steps(&self) -> usize {
        let t = self.traj.times();
        ((t[t.len() - 1] - t[0]) / self.traj.dt).round() as usize
    }

    fn timing(&self) -> RunTiming {
        RunTiming {
            epsilon: self.level.epsilon,
            resolution: self.level.resolution,
            steps: self.steps(),
            dt: self.traj.dt,
            seconds: self.seconds,
        }
    }
}

type RunKey = (u64, usize);

fn key(l: &LevelConfig) -> RunKey {
    (l.epsilon.to_bits(), l.resolution)
}

/// A scenario bound to its worker pool.
pub struct Runner {
    pub cfg: ScenarioConfig,
    pub threads: usize,
    pub out: PathBuf,
    pub dump_fields: bool,
    pool: rayon::ThreadPool,
    pot: Potential,
}

impl Runner {
    pub fn new(cfg: ScenarioConfig, opts: &RunOptions) -> Result<Self> {
        let threads = opts
            .threads
            .or(cfg.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if threads == 0 {
            return Err(anyhow!("--threads must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("cannot start the worker pool")?;
        let out = opts
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
        let dump_fields = opts.dump_fields || cfg.dump_fields;
        Ok(Self {
            cfg,
            threads,
            out,
            dump_fields,
            pool,
            pot: Potential::standard(),
        })
    }

    fn evolve(&self, level: &LevelConfig) -> Result<Run> {
        let c = &self.cfg;
        let start = Instant::now();
        let grid = Grid::cube(c.dimension, level.resolution, c.extent, c.boundary())?;
        let f0 = prepare_initial_data(&c.shape_spec()?, level.epsilon, &grid, &self.pot)
            .with_context(|| format!("initial data at eps = {}", level.epsilon))?;
        let traj = evolve_with(
            &f0,
            EvolveOptions {
                t_end: c.t_end,
                snapshot_every: c.snapshot_every,
                safety: c.safety,
                record_step_energy: false,
            },
            &self.pot,
        )
        .with_context(|| format!("evolution at eps = {}", level.epsilon))?;
        Ok(Run {
            level: level.clone(),
            traj,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Evolves `levels` on the pool; results come back in input order.
    pub fn run_levels(&self, levels: &[LevelConfig]) -> Result<Vec<Run>> {
        self.pool
            .install(|| levels.par_iter().map(|l| self.evolve(l)).collect::<Result<Vec<_>>>())
    }

    /// The sweep levels plus any dedicated check levels.
    fn required_levels(&self) -> Vec<LevelConfig> {
        let mut seen = std::collections::BTreeSet::new();
        self.cfg
            .levels
            .iter()
            .chain(self.cfg.checks.iter().filter_map(|c| c.level.as_ref()))
            .filter(|l| seen.insert(key(l)))
            .cloned()
            .collect()
    }

    fn level_dir(&self, l: &LevelConfig) -> PathBuf {
        self.out.join(format!("eps_{}_n{}", l.epsilon, l.resolution))
    }

    /// Energy log and, when enabled, one dump per snapshot.
    fn write_run(&self, run: &Run, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut written = Vec::new();
        let mut log = String::from("time,energy\n");
        for (f, e) in run.traj.snapshots.iter().zip(&run.traj.energy_log) {
            log.push_str(&format!("{},{}\n", f.time(), e));
        }
        let path = dir.join("energy.csv");
        write(&path, log.as_bytes())?;
        written.push(path);
        if self.dump_fields {
            for (k, f) in run.traj.snapshots.iter().enumerate() {
                let path = dir.join(format!("snapshot_{k:04}.acf1"));
                write(&path, &dump::encode(f.field(), f.eps(), f.time()))?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// The first level only.
    pub fn simulate(&self) -> Result<Vec<PathBuf>> {
        self.require_pde("simulate")?;
        let runs = self.run_levels(&self.cfg.levels[..1])?;
        self.write_run(&runs[0], &self.out)
    }

    /// One run per level, written by this thread after all finish.
    pub fn sweep(&self) -> Result<Vec<PathBuf>> {
        self.require_pde("sweep")?;
        let runs = self.run_levels(&self.cfg.levels)?;
        let mut written = Vec::new();
        for r in &runs {
            written.extend(self.write_run(r, &self.level_dir(&r.level))?);
        }
        Ok(written)
    }

    fn require_pde(&self, cmd: &str) -> Result<()> {
        if self.cfg.kind != ScenarioKind::Pde {
            return Err(anyhow!("`{cmd}` needs a PDE scenario; {} is analytic", self.cfg.name));
        }
        Ok(())
    }

    /// Runs every check and returns the sorted report with timings.
    pub fn evaluate(&self) -> Result<(VerificationReport, Timings)> {
        let start = Instant::now();
        let mut timings = Timings {
            scenario: self.cfg.name.clone(),
            threads: self.threads,
            ..Timings::default()
        };
        let runs = match self.cfg.kind {
            ScenarioKind::Pde => self.run_levels(&self.required_levels())?,
            ScenarioKind::Analytic => Vec::new(),
        };
        timings.runs = runs.iter().map(Run::timing).collect();
        let by_key: BTreeMap<RunKey, &Run> = runs.iter().map(|r| (key(&r.level), r)).collect();
        let mut report = VerificationReport::new();
        report.metadata = self.metadata(&runs);
        for c in &self.cfg.checks {
            let t0 = Instant::now();
            let rows = self.check(c, &by_key)?;
            report.extend(rows);
            timings.checks.push(CheckTiming {
                check: c.name.as_str().to_string(),
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
        report.sort();
        if self.dump_fields {
            for r in &runs {
                self.write_run(r, &self.level_dir(&r.level))?;
            }
        }
        timings.total_seconds = start.elapsed().as_secs_f64();
        Ok((report, timings))
    }

    /// `report.csv`, `report.json` and `timings.json` in the output directory.
    pub fn verify(&self) -> Result<VerificationReport> {
        let (report, timings) = self.evaluate()?;
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))?;
        write(&self.out.join("report.csv"), report.to_csv().as_bytes())?;
        write(&self.out.join("report.json"), to_json(&report).as_bytes())?;
        let t = serde_json::to_string_pretty(&timings)? + "\n";
        write(&self.out.join("timings.json"), t.as_bytes())?;
        Ok(report)
    }

    fn metadata(&self, runs: &[Run]) -> Vec<(String, String)> {
        let c = &self.cfg;
        let mut m = vec![
            ("scenario".to_string(), c.name.clone()),
            ("dimension".to_string(), c.dimension.to_string()),
            ("extent".to_string(), c.extent.to_string()),
            ("sigma".to_string(), self.pot.sigma().to_string()),
            ("t_end".to_string(), c.t_end.to_string()),
        ];
        for r in runs {
            let tag = format!("eps={},n={}", r.level.epsilon, r.level.resolution);
            m.push((format!("{tag}:scheme"), r.traj.scheme.name().to_string()));
            m.push((format!("{tag}:dt"), r.traj.dt.to_string()));
            m.push((format!("{tag}:steps"), r.steps().to_string()));
            m.push((format!("{tag}:mu0"), r.traj.energy_log[0].to_string()));
        }
        m
    }

    fn tests(&self, c: &CheckConfig) -> Result<Vec<(String, TestFunction)>> {
        let names: Vec<String> = match &c.tests {
            Some(n) => n.clone(),
            None => self.cfg.tests.iter().map(|t| t.name.clone()).collect(),
        };
        let fns = self.cfg.test_functions(Some(&names))?;
        if fns.is_empty() {
            return Err(anyhow!("check {} needs at least one test function", c.name.as_str()));
        }
        Ok(names.into_iter().zip(fns).collect())
    }

    fn window(&self, c: &CheckConfig) -> (f64, f64) {
        let [a, b] = c.window.unwrap_or([0.0, self.cfg.t_end]);
        (a, b)
    }

    /// Runs a per-level check: the dedicated level if given, else every sweep level.
    fn per_level<F>(&self, c: &CheckConfig, runs: &BTreeMap<RunKey, &Run>, f: F) -> Vec<ReportRow>
    where
        F: Fn(&Run) -> acmcf_core::Result<Vec<ReportRow>> + Sync,
    {
        let chosen: Vec<&Run> = match &c.level {
            Some(l) => vec![runs[&key(l)]],
            None => self.cfg.levels.iter().map(|l| runs[&key(l)]).collect(),
        };
        let rows: Vec<Vec<ReportRow>> = self.pool.install(|| {
            chosen
                .par_iter()
                .map(|r| {
                    f(r).unwrap_or_else(|e| {
                        eprintln!(
                            "{}: {} refused at eps = {}: {e}",
                            self.cfg.name,
                            c.name.as_str(),
                            r.level.epsilon
                        );
                        vec![ReportRow::refused(
                            &self.cfg.name,
                            Some(r.level.epsilon),
                            c.name.as_str(),
                        )]
                    })
                })
                .collect()
        });
        rows.into_iter().flatten().collect()
    }

    fn refused(&self, c: &CheckConfig, e: impl std::fmt::Display) -> Vec<ReportRow> {
        eprintln!("{}: {} refused: {e}", self.cfg.name, c.name.as_str());
        vec![ReportRow::refused(&self.cfg.name, None, c.name.as_str())]
    }

    /// Smooth sphere of the reference radius, centred in the box, in `dim` dimensions.
    fn smooth_flow(&self, c: &CheckConfig) -> Result<ReferenceFlow> {
        let dim = c.dimension.unwrap_or(self.cfg.dimension);
        let r0 = self
            .cfg
            .reference
            .as_ref()
            .ok_or_else(|| anyhow!("check {} needs a reference flow", c.name.as_str()))?
            .r0;
        let mut center = [0.0; 3];
        center[..dim].fill(0.5 * self.cfg.extent);
        Ok(ReferenceFlow::smooth(r0, dim, center)?)
    }

    fn check(&self, c: &CheckConfig, runs: &BTreeMap<RunKey, &Run>) -> Result<Vec<ReportRow>> {
        let name = self.cfg.name.as_str();
        let tol: Tolerances = self.cfg.tolerances();
        let pot = &self.pot;
        let at_time = |r: &Run| -> acmcf_core::Result<usize> {
            match c.at {
                Some(t) => r.traj.index_of(t),
                None => Ok(r.traj.snapshots.len() - 1),
            }
        };
        Ok(match c.name {
            CheckName::Sigma => vec![ReportRow::new(
                name,
                None,
                "sigma",
                pot.sigma(),
                4.0 / 3.0,
                c.tolerance.unwrap_or(1e-12),
                Sided::TwoSided,
                0.0,
            )],
            CheckName::Profile => {
                let shape = self.cfg.shape_spec()?;
                let limit = c.tolerance.unwrap_or(tol.profile);
                self.per_level(c, runs, |r| {
                    let k = at_time(r)?;
                    let f = &r.traj.snapshots[k];
                    let err = profile_error(f, &shape, pot);
                    Ok(vec![ReportRow::new(
                        name,
                        Some(r.level.epsilon),
                        "profile_error",
                        err,
                        0.0,
                        limit,
                        Sided::Upper,
                        f.time(),
                    )])
                })
            }
            CheckName::Equipartition => {
                let limit = c.tolerance.unwrap_or(tol.equipartition);
                self.per_level(c, runs, |r| {
                    let f = &r.traj.snapshots[at_time(r)?];
                    let ratio = equipartition_ratio(f, pot);
                    Ok(vec![ReportRow::new(
                        name,
                        Some(r.level.epsilon),
                        "equipartition",
                        ratio,
                        0.0,
                        limit,
                        Sided::Upper,
                        f.time(),
                    )])
                })
            }
            CheckName::RadiusLaw => {
                let flow = self.cfg.reference_flow()?;
                let limit = c.tolerance.unwrap_or(tol.radius_relative);
                self.per_level(c, runs, |r| {
                    let f = &r.traj.snapshots[at_time(r)?];
                    let exact = flow.radius(f.time());
                    let rel = (radius_from_volume(f) / exact - 1.0).abs();
                    Ok(vec![ReportRow::new(
                        name,
                        Some(r.level.epsilon),
                        "radius_law",
                        rel,
                        0.0,
                        limit,
                        Sided::Upper,
                        f.time(),
                    )])
                })
            }
            CheckName::EnergyDissipation => {
                let slack = c.tolerance.unwrap_or(tol.energy_slack);
                self.per_level(c, runs, |r| {
                    Ok(vec![energy_dissipation_check(&r.traj, pot)?.row(
                        name,
                        r.level.epsilon,
                        slack,
                    )])
                })
            }
            CheckName::DiscrepancyDecay => {
                let sweep: Vec<&PhaseTrajectory> = self.cfg.levels.iter().map(|l| &runs[&key(l)].traj).collect();
                match discrepancy_decay_check(&sweep, pot) {
                    Ok(rep) => rep.rows(name, c.tolerance.unwrap_or(tol.discrepancy_ratio)),
                    Err(e) => self.refused(c, e),
                }
            }
            CheckName::Brakke => {
                let tests = self.tests(c)?;
                let fns: Vec<TestFunction> = tests.iter().map(|t| t.1.clone()).collect();
                let (t1, t2) = self.window(c);
                let limit = c.tolerance.unwrap_or(tol.brakke);
                self.per_level(c, runs, |r| {
                    let res = brakke_residual(&r.traj, pot, &fns, t1, t2)?;
                    Ok(res
                        .iter()
                        .zip(&tests)
                        .map(|(b, (n, _))| b.row(name, r.level.epsilon, n, limit))
                        .collect())
                })
            }
            CheckName::Bv => {
                let tests = self.tests(c)?;
                let fns: Vec<TestFunction> = tests.iter().map(|t| t.1.clone()).collect();
                let (t1, t2) = self.window(c);
                let limit = c.tolerance.unwrap_or(tol.bv_relative);
                let mut rows = self.per_level(c, runs, |r| {
                    let res = bv_residual(&r.traj, pot, &fns, t1, t2)?;
                    Ok(res
                        .iter()
                        .zip(&tests)
                        .map(|(b, (n, _))| b.row(name, r.level.epsilon, n, limit))
                        .collect())
                });
                if c.level.is_none() && self.cfg.levels.len() > 1 {
                    for (n, _) in &tests {
                        let check = format!("bv_{n}");
                        let levels: Vec<(f64, f64)> = rows
                            .iter()
                            .filter(|r| r.check == check)
                            .map(|r| (r.eps.unwrap_or(f64::NAN), r.value))
                            .collect();
                        let conv = BvResidual::convergence_rows(name, n, &levels, t2 - t1);
                        rows.extend(conv);
                    }
                }
                rows
            }
            CheckName::L2Flow => {
                let tests = self.tests(c)?;
                let fns: Vec<TestFunction> = tests.into_iter().map(|t| t.1).collect();
                let slack = c.tolerance.unwrap_or(tol.l2_slack);
                self.per_level(c, runs, |r| {
                    Ok(l2_flow_check(&r.traj, pot, &fns)?.rows(name, r.level.epsilon, slack, tol.amplitude_invariance))
                })
            }
            CheckName::Abscont => {
                let limit = c.tolerance.unwrap_or(tol.identity);
                self.per_level(c, runs, |r| {
                    Ok(
                        spacetime_abscont_report(&r.traj, pot, tol.abscont_delta, tol.abscont_eta)?.rows(
                            name,
                            r.level.epsilon,
                            limit,
                        ),
                    )
                })
            }
            CheckName::DensityRatio => {
                let bound = c.tolerance.unwrap_or(tol.density_bound);
                self.per_level(c, runs, |r| {
                    let t_min = c.window.map_or(tol.density_t_min, |w| w[0]);
                    Ok(vec![density_ratio_check(&r.traj, pot, t_min, tol.density_r_max)?.row(
                        name,
                        r.level.epsilon,
                        bound,
                    )])
                })
            }
            CheckName::Mfp => {
                let flow = self.cfg.reference_flow()?;
                let tests = self.tests(c)?;
                let fns: Vec<TestFunction> = tests.into_iter().map(|t| t.1).collect();
                let (t1, t2) = self.window(c);
                let sweep: Vec<&PhaseTrajectory> = self.cfg.levels.iter().map(|l| &runs[&key(l)].traj).collect();
                match mfp_spacetime_check(&sweep, pot, &flow, &fns, t1, t2) {
                    Ok(rep) => rep.rows(name, c.tolerance.unwrap_or(tol.mfp_slack)),
                    Err(e) => self.refused(c, e),
                }
            }
            CheckName::BvJump => {
                let flow = self.cfg.reference_flow()?;
                let tests = self.tests(c)?;
                let (t1, t2) = self.window(c);
                let rel = c.tolerance.unwrap_or(tol.jump_relative);
                let mut rows = Vec::new();
                for (n, test) in &tests {
                    let jump = flow.jump_volume() * test.sup_norm();
                    match analytic_bv_residual(&flow, test, t1, t2) {
                        Ok(res) => {
                            let mut row = res.jump_row(name, jump, rel);
                            if tests.len() > 1 {
                                row.check = format!("bv_jump_detect_{n}");
                            }
                            rows.push(row);
                        }
                        Err(e) => rows.extend(self.refused(c, e)),
                    }
                    // the same test on the uncut flow leaves no residual
                    let smooth = ReferenceFlow::smooth(flow.r0, flow.dim, flow.center)?;
                    match analytic_bv_residual(&smooth, test, t1, t2) {
                        Ok(res) => rows.push(ReportRow::new(
                            name,
                            None,
                            &format!("bv_smooth_control_{n}"),
                            res.absolute(),
                            0.0,
                            rel * jump,
                            Sided::Upper,
                            t2 - t1,
                        )),
                        Err(e) => rows.extend(self.refused(c, e)),
                    }
                }
                rows
            }
            CheckName::AbscontJump => {
                let flow = self.cfg.reference_flow()?;
                let n = self
                    .cfg
                    .resolution
                    .ok_or_else(|| anyhow!("analytic scenario without resolution"))?;
                let grid = Grid::cube(self.cfg.dimension, n, self.cfg.extent, self.cfg.boundary())?;
                let times = self.sample_times(c);
                let span = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
                let mut rows = Vec::new();
                match analytic_block_offenders(&flow, &grid, &times, tol.abscont_delta, tol.abscont_eta) {
                    Ok((_, off)) => rows.push(BlockMasses::jump_row(name, off, span)),
                    Err(e) => rows.extend(self.refused(c, e)),
                }
                let smooth = ReferenceFlow::smooth(flow.r0, flow.dim, flow.center)?;
                match analytic_block_offenders(&smooth, &grid, &times, tol.abscont_delta, tol.abscont_eta) {
                    Ok((_, off)) => rows.push(ReportRow::new(
                        name,
                        None,
                        "abscont_smooth_control",
                        off as f64,
                        0.0,
                        0.0,
                        Sided::Upper,
                        span,
                    )),
                    Err(e) => rows.extend(self.refused(c, e)),
                }
                rows
            }
            CheckName::GeometricIdentities => {
                let flow = self.smooth_flow(c)?;
                let times = c.times.clone().unwrap_or_else(|| vec![0.0]);
                let limit = c.tolerance.unwrap_or(tol.geometric);
                match geometric_identity_checks(&flow, &times) {
                    Ok(rep) => rep
                        .rows(name, limit)
                        .into_iter()
                        .map(|mut r| {
                            r.check = format!("{}_{}d", r.check, flow.dim);
                            r
                        })
                        .collect(),
                    Err(e) => self.refused(c, e),
                }
            }
            CheckName::MeshOracle => {
                let flow = self.smooth_flow(c)?;
                let limit = c.tolerance.unwrap_or(tol.mesh_oracle);
                let times = c.times.clone().unwrap_or_else(|| vec![c.at.unwrap_or(0.0)]);
                let mut worst: f64 = 0.0;
                let mut failed = None;
                for t in &times {
                    match mesh_coarea_oracle(&flow, *t, MESH_SAMPLES) {
                        Ok(e) => worst = worst.max(e),
                        Err(e) => failed = Some(e),
                    }
                }
                match failed {
                    Some(e) => self.refused(c, e),
                    None => {
                        let mut r = GeometricReport::mesh_row(name, worst, limit);
                        r.check = format!("{}_{}d", r.check, flow.dim);
                        vec![r]
                    }
                }
            }
        })
    }

    /// `c.times`, else `[0, t_end]` at the snapshot cadence.
    fn sample_times(&self, c: &CheckConfig) -> Vec<f64> {
        if let Some(t) = &c.times {
            return t.clone();
        }
        let n = (self.cfg.t_end / self.cfg.snapshot_every).round().max(1.0) as usize;
        (0..=n).map(|k| self.cfg.t_end * k as f64 / n as f64).collect()
    }
}

/// Sample points of the mesh co-area oracle.
pub const MESH_SAMPLES: usize = 64;

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}
