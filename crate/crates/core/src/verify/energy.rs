use alloc::vec::Vec;

use super::{trapezoid, ReportRow, Sided};
use crate::fields::pairwise_sum_by;
use crate::measures::density_snapshot;
use crate::potential::{DoubleWell, Potential};
use crate::solver::{rate, PhaseTrajectory};
use crate::{Error, Result};

/// `sup_t [μ_t(all) + (1/σ)∫₀ᵗ∫ ε(∂_tφ)²]` against `μ₀(all)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub mu0: f64,
    pub sup_lhs: f64,
    /// `(1/σ)∫₀ᵀ∫ ε(∂_tφ)²`.
    pub dissipation: f64,
    pub span: f64,
}

impl EnergyReport {
    pub fn row(&self, scenario: &str, eps: f64, slack: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            Some(eps),
            "energy_dissipation",
            self.sup_lhs,
            self.mu0,
            slack * self.mu0,
            Sided::Upper,
            self.span,
        )
    }
}

/// Normalized dissipation density integral `(1/σ)∫ ε(∂_tφ)²` per snapshot.
pub(crate) fn dissipation_series<W: DoubleWell>(traj: &PhaseTrajectory, pot: &Potential<W>) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|f| {
            let r = rate(f, pot);
            let v = r.values();
            let eps = f.eps();
            pairwise_sum_by(v.len(), |i| eps * v[i] * v[i]) * f.grid().cell_volume() / pot.sigma()
        })
        .collect()
}

pub fn energy_dissipation_check<W: DoubleWell>(traj: &PhaseTrajectory, pot: &Potential<W>) -> Result<EnergyReport> {
    let n = traj.snapshots.len();
    if n < 2 {
        return Err(Error::TooFewSnapshots { have: n, need: 2 });
    }
    let times = traj.times();
    let diss = dissipation_series(traj, pot);
    let mut cumulative = 0.0;
    let mut sup = traj.energy_log[0];
    for k in 1..n {
        cumulative += 0.5 * (times[k] - times[k - 1]) * (diss[k] + diss[k - 1]);
        sup = sup.max(traj.energy_log[k] + cumulative);
    }
    Ok(EnergyReport {
        mu0: traj.energy_log[0],
        sup_lhs: sup,
        dissipation: cumulative,
        span: times[n - 1] - times[0],
    })
}

/// `D(ε) = (1/σ)∫₀ᵀ∫|ξ|`.
pub fn discrepancy_integral<W: DoubleWell>(traj: &PhaseTrajectory, pot: &Potential<W>) -> f64 {
    let times = traj.times();
    let vals: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|f| density_snapshot(f, pot).discrepancy_abs_total() / pot.sigma())
        .collect();
    trapezoid(&times, &vals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// `(ε, D(ε))` by decreasing ε.
    pub levels: Vec<(f64, f64)>,
    /// `D(ε_min) / D(ε_max)`.
    pub ratio: f64,
    pub span: f64,
}

impl DecayReport {
    /// One strict-decrease row per consecutive pair (keyed by the finer ε)
    /// and one ratio row.
    pub fn rows(&self, scenario: &str, max_ratio: f64) -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = self
            .levels
            .windows(2)
            .map(|w| {
                ReportRow::new(
                    scenario,
                    Some(w[1].0),
                    "discrepancy_decay",
                    w[1].1,
                    w[0].1,
                    0.0,
                    Sided::UpperStrict,
                    self.span,
                )
            })
            .collect();
        rows.push(ReportRow::new(
            scenario,
            None,
            "discrepancy_ratio",
            self.ratio,
            max_ratio,
            0.0,
            Sided::Upper,
            self.span,
        ));
        rows
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Strict decrease of `D(ε)` along decreasing ε; needs three or more levels.
pub fn discrepancy_decay_check<W: DoubleWell>(sweep: &[&PhaseTrajectory], pot: &Potential<W>) -> Result<DecayReport> {
    let levels: Vec<(f64, f64)> = sweep.iter().map(|t| (t.eps(), discrepancy_integral(t, pot))).collect();
    let span = sweep
        .iter()
        .map(|t| {
            let ts = t.times();
            ts[ts.len() - 1] - ts[0]
        })
        .fold(0.0, f64::max);
    decay_from_levels(levels, span)
}

pub(crate) fn decay_from_levels(mut levels: Vec<(f64, f64)>, span: f64) -> Result<DecayReport> {
    levels.sort_by(|a, b| b.0.total_cmp(&a.0));
    levels.dedup_by(|a, b| a.0 == b.0);
    if levels.len() < 3 {
        return Err(Error::SweepTooShort {
            have: levels.len(),
            need: 3,
        });
    }
    let ratio = levels[levels.len() - 1].1 / levels[0].1;
    Ok(DecayReport { levels, ratio, span })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Boundary, Grid, ScalarField};
    use crate::solver::{evolve, PhaseField};

    #[test]
    fn wells_give_zero_on_both_sides() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 16, 1.0, Boundary::Periodic).unwrap();
        let f = PhaseField::new(ScalarField::constant(g, 1.0), 0.2, 0.0).unwrap();
        let traj = evolve(&f, 0.01, 0.005, 0.9, &pot).unwrap();
        let r = energy_dissipation_check(&traj, &pot).unwrap();
        assert_eq!((r.mu0, r.sup_lhs, r.dissipation), (0.0, 0.0, 0.0));
        assert!(r.row("s", 0.2, 1e-2).pass);
        let single = evolve(&f, 0.0, 0.005, 0.9, &pot).unwrap();
        assert!(energy_dissipation_check(&single, &pot).is_err());
    }

    #[test]
    fn decay_needs_a_sweep() {
        assert!(matches!(
            decay_from_levels(alloc::vec![(0.02, 1.0)], 1.0),
            Err(Error::SweepTooShort { have: 1, .. })
        ));
        let r = decay_from_levels(alloc::vec![(0.01, 0.5), (0.04, 1.0), (0.02, 0.7)], 1.0).unwrap();
        assert!(r.strictly_decreasing());
        assert_eq!(r.ratio, 0.5);
        let rows = r.rows("s", 0.67);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.pass));
        let bad = decay_from_levels(alloc::vec![(0.01, 0.8), (0.04, 1.0), (0.02, 0.7)], 1.0).unwrap();
        assert!(!bad.strictly_decreasing());
        assert!(bad.rows("s", 0.67).iter().any(|r| !r.pass));
    }
}
