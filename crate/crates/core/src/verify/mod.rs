//! Residuals and bounds comparing phase-field measures with the identities of
//! mean curvature flow, and the report rows that record them.
//!
//! Every check is a pure function of its inputs. Time integrals use the
//! trapezoid rule over snapshots; `∂_tφ` always comes from the PDE
//! right-hand side.

mod abscont;
mod brakke;
mod bv;
mod density;
mod energy;
mod geometric;
mod mfp;
mod report;
mod solution;

use alloc::vec::Vec;

pub use abscont::{
    analytic_block_offenders, spacetime_abscont_report, AbscontReport, BlockMasses, BLOCK_CELLS, BLOCK_INTERVALS,
};
pub use brakke::{brakke_residual, l2_flow_check, BrakkeResidual, L2FlowReport};
pub use bv::{analytic_bv_residual, bv_residual, BvResidual};
pub use density::{density_ratio_check, DensityRatioReport};
pub use energy::{discrepancy_decay_check, discrepancy_integral, energy_dissipation_check, DecayReport, EnergyReport};
pub use geometric::{geometric_identity_checks, mesh_coarea_oracle, GeometricReport};
pub use mfp::{mfp_lsc_check, mfp_spacetime_check, velocity_pair, MfpLimit, MfpReport};
pub use report::{ReportRow, Sided, VerificationReport, CSV_HEADER};
pub use solution::{equipartition_ratio, profile_error, radius_from_volume};

use crate::fields::{Point, TestFunction};
use crate::measures::{density_snapshot, interface_fields, DensitySnapshot, InterfaceFields};
use crate::potential::{DoubleWell, Potential};
use crate::solver::{PhaseField, PhaseTrajectory};
use crate::{Error, Result};

/// Default tolerances; every one is a configuration value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Energy inequality slack, relative to `μ₀`.
    pub energy_slack: f64,
    /// Brakke `LHS − RHS` bound, relative to `μ₀`.
    pub brakke: f64,
    /// BV relative residual bound.
    pub bv_relative: f64,
    /// Relative tolerance on the detected jump volume.
    pub jump_relative: f64,
    /// Slack on the L² cap.
    pub l2_slack: f64,
    /// Relative change of `R` under amplitude scaling.
    pub amplitude_invariance: f64,
    /// Bound on `D(ε_min)/D(ε_max)`.
    pub discrepancy_ratio: f64,
    /// Relative violation of the space-time gradient identity.
    pub identity: f64,
    /// Energy-mass threshold of the block proxy.
    pub abscont_delta: f64,
    /// Perimeter-mass threshold of the block proxy.
    pub abscont_eta: f64,
    /// Closed-form geometric identities.
    pub geometric: f64,
    /// Mesh-based co-area oracle.
    pub mesh_oracle: f64,
    /// Density ratio bound.
    pub density_bound: f64,
    /// Density ratios are sampled from this time on.
    pub density_t_min: f64,
    /// Largest sampled density radius.
    pub density_r_max: f64,
    /// Slack on the lower-semicontinuity inequality.
    pub mfp_slack: f64,
    /// Relative radius-law tolerance.
    pub radius_relative: f64,
    /// Sup-norm profile tolerance.
    pub profile: f64,
    /// `∫|ξ| / ∫e` bound for a relaxed planar profile.
    pub equipartition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy_slack: 1e-2,
            brakke: 0.05,
            bv_relative: 0.10,
            jump_relative: 0.01,
            l2_slack: 1e-2,
            amplitude_invariance: 1e-10,
            discrepancy_ratio: 0.67,
            identity: 1e-8,
            abscont_delta: 1e-4,
            abscont_eta: 1e-4,
            geometric: 1e-12,
            mesh_oracle: 1e-6,
            density_bound: 10.0,
            density_t_min: 0.002,
            density_r_max: 0.2,
            mfp_slack: 0.02,
            radius_relative: 0.03,
            profile: 1e-3,
            equipartition: 1e-2,
        }
    }
}

/// Snapshots needed per window: the cadence must be at most `(t2 − t1)/20`.
pub const MIN_WINDOW_INTERVALS: f64 = 20.0;

/// Per-snapshot quantities shared by the checks.
pub(crate) struct View {
    pub dens: DensitySnapshot,
    pub itf: InterfaceFields,
    /// `(1/σ)|∇w(φ)| = (1/σ)sqrt(2W(φ))|∇φ|`, central differences.
    pub mm: Vec<f64>,
}

pub(crate) fn view<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> View {
    let dens = density_snapshot(f, pot);
    let itf = interface_fields(f, pot);
    let v = f.values();
    let inv_sigma = 1.0 / pot.sigma();
    let mm = (0..v.len())
        .map(|i| pot.sqrt_2w(v[i]) * itf.grad_norm[i] * inv_sigma)
        .collect();
    View { dens, itf, mm }
}

/// Trapezoid rule on a (possibly nonuniform) time grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    let mut s = 0.0;
    for k in 1..times.len() {
        s += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    }
    s
}

/// Gauss–Legendre nodes and weights on `[t1, t2]`, `nodes` per panel, with
/// panels split at `cuts` (ignored outside the interval) and at the C¹
/// breakpoints of every test window.
pub(crate) fn split_gauss_legendre(
    t1: f64,
    t2: f64,
    nodes: usize,
    cuts: &[f64],
    tests: &[TestFunction],
) -> Vec<(f64, f64)> {
    let (x, w) = crate::geometry::gauss_legendre(nodes);
    let mut edges = alloc::vec![t1, t2];
    edges.extend_from_slice(cuts);
    for t in tests {
        if let Some(win) = t.window {
            edges.extend([win.start - win.ramp, win.start, win.end, win.end + win.ramp]);
        }
    }
    edges.retain(|c| *c >= t1 && *c <= t2);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut out = Vec::with_capacity(nodes * edges.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((a + half * (xi + 1.0), wi * half));
        }
    }
    out
}

/// Snapshot indices of `[t1, t2]` after the window preconditions.
pub(crate) fn window(traj: &PhaseTrajectory, t1: f64, t2: f64) -> Result<(usize, usize)> {
    if traj.snapshots.len() < 2 {
        return Err(Error::TooFewSnapshots {
            have: traj.snapshots.len(),
            need: 2,
        });
    }
    if !(t1 >= 0.0 && t2 > t1) {
        return Err(Error::Domain {
            what: "window must satisfy 0 <= t1 < t2",
            value: t2 - t1,
        });
    }
    let k1 = traj.index_of(t1)?;
    let k2 = traj.index_of(t2)?;
    let cadence = traj.cadence();
    let required = (t2 - t1) / MIN_WINDOW_INTERVALS;
    if cadence > required * (1.0 + 1e-9) {
        return Err(Error::CadenceTooCoarse { cadence, required });
    }
    Ok((k1, k2))
}

/// Refuses tests whose support leaves the box.
pub(crate) fn check_support(test: &TestFunction, traj: &PhaseTrajectory) -> Result<()> {
    if traj.grid().contains_ball(&test.center, test.support_radius()) {
        Ok(())
    } else {
        Err(Error::SupportOutsideDomain)
    }
}

/// `hⁿ Σ term(i, x_i)` over the cells of the grid.
pub(crate) fn cell_sum(grid: &crate::fields::Grid, mut term: impl FnMut(usize, &Point) -> f64) -> f64 {
    crate::fields::pairwise_sum_by(grid.len(), |i| term(i, &grid.center(i))) * grid.cell_volume()
}
