use alloc::format;
use alloc::vec::Vec;

use super::{split_gauss_legendre, trapezoid, window, ReportRow, Sided};
use crate::fields::{pairwise_sum_by, TestFunction};
use crate::geometry::ReferenceFlow;
use crate::measures::{density_snapshot, interface_fields, DensitySnapshot};
use crate::potential::{DoubleWell, Potential};
use crate::solver::{PhaseField, PhaseTrajectory};
use crate::{Error, Result};

/// Moments along the sweep may differ by at most this factor.
pub const MOMENT_GROWTH: f64 = 4.0;
/// Levels a sweep needs.
pub const MIN_LEVELS: usize = 3;

/// Candidate limit of a measure-function sequence.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum MfpLimit {
    /// A discrete pair: measure density and a function per cell.
    Discrete(DensitySnapshot, Vec<f64>),
    /// `ℋ^{n−1}` on the sphere at `time` with `f = h·ν`.
    Sphere { flow: ReferenceFlow, time: f64 },
}

impl MfpLimit {
    fn moment(&self) -> Result<f64> {
        match self {
            MfpLimit::Discrete(s, f) => Ok(discrete_integral(s, |i, _| f[i] * f[i])),
            MfpLimit::Sphere { flow, time } => {
                let speed = flow.normal_speed(*time)?;
                Ok(flow.boundary_integral(*time, |_, _| speed * speed))
            }
        }
    }

    fn pairing(&self, test: &TestFunction) -> Result<f64> {
        match self {
            MfpLimit::Discrete(s, f) => Ok(discrete_integral(s, |i, p| f[i] * test.value(p, s.time))),
            MfpLimit::Sphere { flow, time } => {
                let speed = flow.normal_speed(*time)?;
                Ok(flow.boundary_integral(*time, |p, _| speed * test.value(p, *time)))
            }
        }
    }
}

fn discrete_integral(s: &DensitySnapshot, mut term: impl FnMut(usize, &crate::fields::Point) -> f64) -> f64 {
    let g = s.normalized.grid();
    let mu = s.normalized.values();
    pairwise_sum_by(g.len(), |i| {
        if mu[i] == 0.0 {
            0.0
        } else {
            mu[i] * term(i, &g.center(i))
        }
    }) * g.cell_volume()
}

/// `(μ_t^ε, V)` with `V` on the interface band and 0 elsewhere.
pub fn velocity_pair<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> (DensitySnapshot, Vec<f64>) {
    let itf = interface_fields(f, pot);
    let v = (0..itf.band.len())
        .map(|i| if itf.band[i] { itf.velocity[i] } else { 0.0 })
        .collect();
    (density_snapshot(f, pot), v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MfpReport {
    /// `∫|f|² dμ` of the limit.
    pub limit_moment: f64,
    /// `(ε, ∫|f_ε|² dμ_ε)` by decreasing ε.
    pub moments: Vec<(f64, f64)>,
    /// Per test, `(ε, |∫f_ε·test dμ_ε − ∫f·test dμ|)` by decreasing ε.
    pub gaps: Vec<Vec<(f64, f64)>>,
    pub span: f64,
}

impl MfpReport {
    /// Smallest moment over the sweep tail (all levels but the coarsest).
    pub fn tail_min(&self) -> f64 {
        self.moments[1..].iter().map(|m| m.1).fold(f64::INFINITY, f64::min)
    }

    /// Largest increase of a pairing gap between consecutive levels.
    pub fn gap_increase(&self, test: usize) -> f64 {
        self.gaps[test]
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn rows(&self, scenario: &str, slack: f64) -> Vec<ReportRow> {
        let tail = self.tail_min();
        let mut rows = alloc::vec![ReportRow::new(
            scenario,
            None,
            "mfp_lsc",
            self.limit_moment,
            tail,
            slack * tail,
            Sided::Upper,
            self.span,
        )];
        for k in 0..self.gaps.len() {
            rows.push(ReportRow::new(
                scenario,
                None,
                &format!("mfp_pairing_gap_{k}"),
                self.gap_increase(k),
                0.0,
                0.0,
                Sided::Upper,
                self.span,
            ));
        }
        rows
    }
}

/// One sweep level: `(ε, ∫|f_ε|², pairings per test, time span)`.
struct Level {
    eps: f64,
    moment: f64,
    pairings: Vec<f64>,
    span: (f64, f64),
}

fn assemble(mut levels: Vec<Level>, limit_moment: f64, limit_pairings: &[f64]) -> Result<MfpReport> {
    if levels.len() < MIN_LEVELS {
        return Err(Error::SweepTooShort {
            have: levels.len(),
            need: MIN_LEVELS,
        });
    }
    levels.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let moments: Vec<(f64, f64)> = levels.iter().map(|l| (l.eps, l.moment)).collect();
    if !moments.iter().all(|m| m.1.is_finite()) {
        return Err(Error::UnboundedMoments("non-finite second moment".into()));
    }
    let lo = moments.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let hi = moments.iter().map(|m| m.1).fold(0.0, f64::max);
    if hi > MOMENT_GROWTH * lo {
        return Err(Error::UnboundedMoments(format!(
            "second moments range over [{lo}, {hi}]"
        )));
    }
    let gaps = (0..limit_pairings.len())
        .map(|k| {
            levels
                .iter()
                .map(|l| (l.eps, libm::fabs(l.pairings[k] - limit_pairings[k])))
                .collect()
        })
        .collect();
    let t0 = levels.iter().map(|l| l.span.0).fold(f64::INFINITY, f64::min);
    let t1 = levels.iter().map(|l| l.span.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(MfpReport {
        limit_moment,
        moments,
        gaps,
        span: t1 - t0,
    })
}

/// Lower semicontinuity of `∫|f|² dμ` and decrease of the pairing gaps along
/// a sweep of measure-function pairs at one time.
pub fn mfp_lsc_check(
    levels: &[(DensitySnapshot, Vec<f64>)],
    limit: &MfpLimit,
    tests: &[TestFunction],
) -> Result<MfpReport> {
    if levels.len() < MIN_LEVELS {
        return Err(Error::SweepTooShort {
            have: levels.len(),
            need: MIN_LEVELS,
        });
    }
    for (s, f) in levels {
        if f.len() != s.normalized.grid().len() {
            return Err(Error::Mismatch("function and measure sizes differ".into()));
        }
    }
    let lv = levels
        .iter()
        .map(|(s, f)| Level {
            eps: s.eps,
            moment: discrete_integral(s, |i, _| f[i] * f[i]),
            pairings: tests
                .iter()
                .map(|test| discrete_integral(s, |i, x| f[i] * test.value(x, s.time)))
                .collect(),
            span: (s.time, s.time),
        })
        .collect();
    let limit_pairings = tests.iter().map(|t| limit.pairing(t)).collect::<Result<Vec<f64>>>()?;
    assemble(lv, limit.moment()?, &limit_pairings)
}

const TIME_NODES: usize = 32;

/// The space-time version: `μ = μ_t dt` on `[t1, t2]` with `f_ε = V` on the
/// band, against `ℋ^{n−1}⌊∂E_t dt` with `f = h·ν` of the reference flow.
/// Discrete time integrals use the trapezoid rule over snapshots, the limit
/// uses Gauss–Legendre panels split at the test windows' breakpoints.
pub fn mfp_spacetime_check<W: DoubleWell>(
    sweep: &[&PhaseTrajectory],
    pot: &Potential<W>,
    flow: &ReferenceFlow,
    tests: &[TestFunction],
    t1: f64,
    t2: f64,
) -> Result<MfpReport> {
    if t2 >= flow.vanishing_time() {
        return Err(Error::Extinct {
            time: t2,
            extinction: flow.vanishing_time(),
        });
    }
    let mut levels = Vec::with_capacity(sweep.len());
    for traj in sweep {
        let (k1, k2) = window(traj, t1, t2)?;
        let times = &traj.times()[k1..=k2];
        let mut moment = Vec::with_capacity(times.len());
        let mut pairs = alloc::vec![Vec::with_capacity(times.len()); tests.len()];
        for f in &traj.snapshots[k1..=k2] {
            let (s, v) = velocity_pair(f, pot);
            moment.push(discrete_integral(&s, |i, _| v[i] * v[i]));
            for (p, test) in pairs.iter_mut().zip(tests) {
                p.push(discrete_integral(&s, |i, x| v[i] * test.value(x, s.time)));
            }
        }
        levels.push(Level {
            eps: traj.eps(),
            moment: trapezoid(times, &moment),
            pairings: pairs.iter().map(|p| trapezoid(times, p)).collect(),
            span: (times[0], times[times.len() - 1]),
        });
    }
    let mut limit_moment = 0.0;
    let mut limit_pairings = alloc::vec![0.0; tests.len()];
    for (t, w) in split_gauss_legendre(t1, t2, TIME_NODES, &[], tests) {
        let slice = MfpLimit::Sphere { flow: *flow, time: t };
        limit_moment += w * slice.moment()?;
        for (lp, test) in limit_pairings.iter_mut().zip(tests) {
            *lp += w * slice.pairing(test)?;
        }
    }
    assemble(levels, limit_moment, &limit_pairings)
}
