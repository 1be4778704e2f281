use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::energy::dissipation_series;
use super::{cell_sum, check_support, trapezoid, view, window, ReportRow, Sided, View};
use crate::fields::TestFunction;
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseTrajectory;
use crate::{Error, Result};

/// Pairings of one test with one snapshot.
#[derive(Clone, Copy, Debug, Default)]
struct Pairing {
    /// `∫ φ dμ_t`.
    mass: f64,
    /// `∫_band (∇φ·ν V − φ V²) dμ_t + ∫ ∂_tφ dμ_t`.
    brakke: f64,
    /// `∫ ∂_tφ dμ_t + ∫_band ∇φ·ν V dμ_t`.
    l2: f64,
}

fn pair(v: &View, test: &TestFunction, t: f64) -> Pairing {
    let g = v.dens.normalized.grid();
    let dim = g.dim();
    let m = v.dens.normalized.values();
    // three sums in one pass would reorder the tree; keep them separate
    let mass = cell_sum(g, |i, p| m[i] * test.value(p, t));
    let brakke = cell_sum(g, |i, p| {
        let (val, grad, dt) = test.eval(p, t);
        let mut s = dt;
        if v.itf.band[i] {
            let n = v.itf.normal[i];
            let vel = v.itf.velocity[i];
            let gn: f64 = (0..dim).map(|a| grad[a] * n[a]).sum();
            s += gn * vel - val * vel * vel;
        }
        s * m[i]
    });
    let l2 = cell_sum(g, |i, p| {
        let (_, grad, dt) = test.eval(p, t);
        let mut s = dt;
        if v.itf.band[i] {
            let n = v.itf.normal[i];
            let gn: f64 = (0..dim).map(|a| grad[a] * n[a]).sum();
            s += gn * v.itf.velocity[i];
        }
        s * m[i]
    });
    Pairing { mass, brakke, l2 }
}

fn pairing_series<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    tests: &[TestFunction],
    k1: usize,
    k2: usize,
) -> Vec<Vec<Pairing>> {
    let mut series = vec![Vec::with_capacity(k2 - k1 + 1); tests.len()];
    for f in &traj.snapshots[k1..=k2] {
        let v = view(f, pot);
        for (s, test) in series.iter_mut().zip(tests) {
            s.push(pair(&v, test, f.time()));
        }
    }
    series
}

/// `μ_{t₂}(φ) − μ_{t₁}(φ)` against `∫∫ (∇φ − φh)·h + ∂_tφ dμ dt`, `h = Vν`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrakkeResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub mu0: f64,
    pub span: f64,
}

impl BrakkeResidual {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// One-sided: `LHS − RHS ≤ tol·μ₀`.
    pub fn row(&self, scenario: &str, eps: f64, name: &str, tol: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            Some(eps),
            &format!("brakke_{name}"),
            self.residual(),
            0.0,
            tol * self.mu0,
            Sided::Upper,
            self.span,
        )
    }
}

/// Brakke residuals of a test suite over the snapshot window `[t1, t2]`.
pub fn brakke_residual<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    tests: &[TestFunction],
    t1: f64,
    t2: f64,
) -> Result<Vec<BrakkeResidual>> {
    let (k1, k2) = window(traj, t1, t2)?;
    for t in tests {
        check_support(t, traj)?;
    }
    let times = &traj.times()[k1..=k2];
    let series = pairing_series(traj, pot, tests, k1, k2);
    Ok(series
        .iter()
        .map(|s| {
            let q: Vec<f64> = s.iter().map(|p| p.brakke).collect();
            BrakkeResidual {
                lhs: s[s.len() - 1].mass - s[0].mass,
                rhs: trapezoid(times, &q),
                mu0: traj.energy_log[0],
                span: t2 - t1,
            }
        })
        .collect())
}

/// Normalized pairings `R = |∫∫ ∂_tφ + ∇φ·νV dμ dt| / ‖φ‖_{C⁰}` and the cap
/// `2(μ₀ + (1/σ)∫∫ε(∂_tφ)²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct L2FlowReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub cap: f64,
    /// Largest relative change of `R` when every test is scaled by 10.
    pub amplitude_drift: f64,
    pub span: f64,
}

impl L2FlowReport {
    pub fn rows(&self, scenario: &str, eps: f64, slack: f64, invariance: f64) -> Vec<ReportRow> {
        vec![
            ReportRow::new(
                scenario,
                Some(eps),
                "l2_flow",
                self.max_ratio,
                self.cap,
                slack * self.cap,
                Sided::Upper,
                self.span,
            ),
            ReportRow::new(
                scenario,
                Some(eps),
                "l2_amplitude",
                self.amplitude_drift,
                0.0,
                invariance,
                Sided::Upper,
                self.span,
            ),
        ]
    }
}

pub fn l2_flow_check<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    tests: &[TestFunction],
) -> Result<L2FlowReport> {
    if tests.is_empty() {
        return Err(Error::Mismatch("empty test suite".into()));
    }
    let n = traj.snapshots.len();
    if n < 2 {
        return Err(Error::TooFewSnapshots { have: n, need: 2 });
    }
    for t in tests {
        check_support(t, traj)?;
        if t.sup_norm() == 0.0 {
            return Err(Error::Domain {
                what: "test amplitude",
                value: 0.0,
            });
        }
    }
    let times = traj.times();
    let mut suite: Vec<TestFunction> = tests.to_vec();
    suite.extend(tests.iter().map(|t| t.scaled(10.0)));
    let series = pairing_series(traj, pot, &suite, 0, n - 1);
    let ratio = |k: usize| {
        let l: Vec<f64> = series[k].iter().map(|p| p.l2).collect();
        libm::fabs(trapezoid(&times, &l)) / suite[k].sup_norm()
    };
    let ratios: Vec<f64> = (0..tests.len()).map(ratio).collect();
    let mut drift: f64 = 0.0;
    for (k, r) in ratios.iter().enumerate() {
        let scaled = ratio(k + tests.len());
        let scale = r.abs().max(f64::MIN_POSITIVE);
        drift = drift.max(libm::fabs(scaled - r) / scale);
    }
    let diss = trapezoid(&times, &dissipation_series(traj, pot));
    Ok(L2FlowReport {
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        ratios,
        cap: 2.0 * (traj.energy_log[0] + diss),
        amplitude_drift: drift,
        span: times[n - 1] - times[0],
    })
}
