use alloc::vec;
use alloc::vec::Vec;

use super::{view, ReportRow, Sided};
use crate::fields::Grid;
use crate::geometry::{sphere_nodes, ReferenceFlow};
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseTrajectory;
use crate::{Error, Result};

/// Cells per block edge.
pub const BLOCK_CELLS: usize = 8;
/// Snapshot intervals per block.
pub const BLOCK_INTERVALS: usize = 4;

/// Space-time block masses of the energy measure and of the space-time
/// perimeter surrogate.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMasses {
    pub energy: Vec<f64>,
    pub perimeter: Vec<f64>,
    pub spatial_blocks: usize,
}

impl BlockMasses {
    fn new(spatial_blocks: usize, time_blocks: usize) -> Self {
        Self {
            energy: vec![0.0; spatial_blocks * time_blocks],
            perimeter: vec![0.0; spatial_blocks * time_blocks],
            spatial_blocks,
        }
    }

    /// Blocks carrying more than `eta` of the perimeter mass but less than
    /// `delta` of the energy mass, both as fractions of the totals of their
    /// time block.
    pub fn offenders(&self, delta: f64, eta: f64) -> Result<usize> {
        if !(delta > 0.0 && eta > 0.0 && eta <= delta) {
            return Err(Error::Domain {
                what: "block thresholds need 0 < eta <= delta",
                value: eta / delta,
            });
        }
        let n = self.spatial_blocks;
        let mut count = 0;
        for (e, p) in self.energy.chunks(n).zip(self.perimeter.chunks(n)) {
            let tp = crate::fields::pairwise_sum(p);
            if tp <= 0.0 {
                continue;
            }
            let te = crate::fields::pairwise_sum(e);
            let te = if te > 0.0 { te } else { f64::INFINITY };
            count += e
                .iter()
                .zip(p)
                .filter(|(e, p)| **p / tp > eta && **e / te < delta)
                .count();
        }
        Ok(count)
    }
}

fn block_layout(grid: &Grid) -> ([usize; 3], usize) {
    let mut per = [1usize; 3];
    let mut total = 1;
    for a in 0..grid.dim() {
        per[a] = grid.resolution(a).div_ceil(BLOCK_CELLS);
        total *= per[a];
    }
    (per, total)
}

fn block_of_cell(grid: &Grid, per: &[usize; 3], i: usize) -> usize {
    let c = grid.coords(i);
    let mut b = 0;
    for a in 0..grid.dim() {
        b = b * per[a] + c[a] / BLOCK_CELLS;
    }
    b
}

fn block_of_point(grid: &Grid, per: &[usize; 3], p: &[f64; 3]) -> usize {
    let h = grid.spacing();
    let mut b = 0;
    for a in 0..grid.dim() {
        let n = grid.resolution(a);
        let c = libm::floor(p[a] / h).clamp(0.0, (n - 1) as f64) as usize;
        b = b * per[a] + c / BLOCK_CELLS;
    }
    b
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbscontReport {
    /// Largest relative violation of `|∇′w| = sqrt(1 + V²)|∇w|` on the band.
    pub identity_violation: f64,
    pub blocks: BlockMasses,
    pub offenders: usize,
    pub span: f64,
}

impl AbscontReport {
    pub fn rows(&self, scenario: &str, eps: f64, identity_tol: f64) -> Vec<ReportRow> {
        vec![
            ReportRow::new(
                scenario,
                Some(eps),
                "abscont_identity",
                self.identity_violation,
                0.0,
                identity_tol,
                Sided::Upper,
                self.span,
            ),
            ReportRow::new(
                scenario,
                Some(eps),
                "abscont_blocks",
                self.offenders as f64,
                0.0,
                0.0,
                Sided::Upper,
                self.span,
            ),
        ]
    }
}

/// Pointwise space-time gradient identity and the block proxy for
/// `|∇′χ_E| ≪ μ` on a trajectory.
pub fn spacetime_abscont_report<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    delta: f64,
    eta: f64,
) -> Result<AbscontReport> {
    let n = traj.snapshots.len();
    if n < 3 {
        return Err(Error::TooFewSnapshots { have: n, need: 3 });
    }
    let grid = traj.grid().clone();
    let (per, spatial) = block_layout(&grid);
    let intervals = n - 1;
    let time_blocks = intervals.div_ceil(BLOCK_INTERVALS);
    let mut masses = BlockMasses::new(spatial, time_blocks);
    let cell = grid.cell_volume();
    let inv_sigma = 1.0 / pot.sigma();
    let times = traj.times();
    let mut violation: f64 = 0.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for (k, f) in traj.snapshots.iter().enumerate() {
        let v = view(f, pot);
        let phi = f.values();
        let rate = v.itf.rate.values();
        let mut e_blocks = vec![0.0; spatial];
        let mut p_blocks = vec![0.0; spatial];
        for i in 0..grid.len() {
            let s = pot.sqrt_2w(phi[i]);
            let grad_w = s * v.itf.grad_norm[i];
            let dt_w = s * rate[i];
            let stacked = libm::sqrt(grad_w * grad_w + dt_w * dt_w);
            if v.itf.band[i] {
                let vel = v.itf.velocity[i];
                let lifted = libm::sqrt(1.0 + vel * vel) * grad_w;
                let rel = libm::fabs(stacked - lifted) / stacked.max(f64::MIN_POSITIVE);
                violation = violation.max(rel);
            }
            let b = block_of_cell(&grid, &per, i);
            e_blocks[b] += v.dens.normalized.values()[i] * cell;
            p_blocks[b] += stacked * inv_sigma * cell;
        }
        if let Some((pe, pp)) = prev.take() {
            let dt = times[k] - times[k - 1];
            let tb = (k - 1) / BLOCK_INTERVALS;
            for b in 0..spatial {
                masses.energy[tb * spatial + b] += 0.5 * dt * (pe[b] + e_blocks[b]);
                masses.perimeter[tb * spatial + b] += 0.5 * dt * (pp[b] + p_blocks[b]);
            }
        }
        prev = Some((e_blocks, p_blocks));
    }
    let offenders = masses.offenders(delta, eta)?;
    Ok(AbscontReport {
        identity_violation: violation,
        blocks: masses,
        offenders,
        span: times[n - 1] - times[0],
    })
}

/// Block proxy for an exact sphere flow sampled at `times`: the energy
/// measure is `ℋ^{n−1}` on `∂E_t`, the perimeter measure adds the lateral
/// factor `sqrt(1 + ṙ²)` and, for a truncated flow, the lid `E_{t_cut⁻}`
/// at the cut time.
pub fn analytic_block_offenders(
    flow: &ReferenceFlow,
    grid: &Grid,
    times: &[f64],
    delta: f64,
    eta: f64,
) -> Result<(BlockMasses, usize)> {
    if times.len() < 3 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TooFewSnapshots {
            have: times.len(),
            need: 3,
        });
    }
    if grid.dim() != flow.dim {
        return Err(Error::Mismatch("grid and flow dimensions differ".into()));
    }
    let (per, spatial) = block_layout(grid);
    let intervals = times.len() - 1;
    let mut masses = BlockMasses::new(spatial, intervals.div_ceil(BLOCK_INTERVALS));
    let slice = |t: f64| {
        let mut e = vec![0.0; spatial];
        let mut p = vec![0.0; spatial];
        if let Ok(speed) = flow.normal_speed(t) {
            let lift = libm::sqrt(1.0 + speed * speed);
            sphere_nodes(flow.dim, &flow.center, flow.radius(t), |pt, _, w| {
                let b = block_of_point(grid, &per, pt);
                e[b] += w;
                p[b] += w * lift;
            });
        }
        (e, p)
    };
    let mut prev = slice(times[0]);
    for k in 1..times.len() {
        let cur = slice(times[k]);
        let dt = times[k] - times[k - 1];
        let tb = (k - 1) / BLOCK_INTERVALS;
        for b in 0..spatial {
            masses.energy[tb * spatial + b] += 0.5 * dt * (prev.0[b] + cur.0[b]);
            masses.perimeter[tb * spatial + b] += 0.5 * dt * (prev.1[b] + cur.1[b]);
        }
        prev = cur;
    }
    if let crate::geometry::FlowKind::TruncatedSphere { t_cut } = flow.kind {
        if let Some(k) = (1..times.len()).find(|&k| times[k - 1] < t_cut && t_cut <= times[k]) {
            let tb = (k - 1) / BLOCK_INTERVALS;
            let just_before = t_cut * (1.0 - 1e-12);
            let cell = grid.cell_volume();
            for i in 0..grid.len() {
                if flow.contains(&grid.center(i), just_before) {
                    masses.perimeter[tb * spatial + block_of_cell(grid, &per, i)] += cell;
                }
            }
        }
    }
    let offenders = masses.offenders(delta, eta)?;
    Ok((masses, offenders))
}

impl BlockMasses {
    /// Must-detect row for the analytic counterexample.
    pub fn jump_row(scenario: &str, offenders: usize, span: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            None,
            "abscont_jump_detect",
            offenders as f64,
            1.0,
            0.0,
            Sided::Lower,
            span,
        )
        .detect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Boundary;

    fn analytic_grid() -> Grid {
        Grid::cube(2, 96, 3.0, Boundary::Periodic).unwrap()
    }

    fn times(end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| end * k as f64 / n as f64).collect()
    }

    #[test]
    fn truncated_sphere_has_offending_blocks() {
        let flow = ReferenceFlow::truncated(1.0, 2, [1.5, 1.5, 0.0], 0.25).unwrap();
        let (_, off) = analytic_block_offenders(&flow, &analytic_grid(), &times(0.3, 24), 1e-4, 1e-4).unwrap();
        assert!(off >= 1);
        assert!(BlockMasses::jump_row("t", off, 0.3).pass);
    }

    #[test]
    fn smooth_sphere_has_none() {
        let flow = ReferenceFlow::smooth(1.0, 2, [1.5, 1.5, 0.0]).unwrap();
        let (m, off) = analytic_block_offenders(&flow, &analytic_grid(), &times(0.3, 24), 1e-4, 1e-4).unwrap();
        assert_eq!(off, 0);
        let total: f64 = m.energy.iter().sum();
        // ∫₀^0.3 2π sqrt(1 - 2t) dt
        let exact = 2.0 * core::f64::consts::PI * (1.0 - 0.4f64.powf(1.5)) / 3.0;
        assert!((total / exact - 1.0).abs() < 1e-2);
    }

    #[test]
    fn thresholds_are_validated() {
        let m = BlockMasses::new(1, 1);
        assert!(m.offenders(1e-4, 1e-3).is_err());
        assert_eq!(m.offenders(1e-4, 1e-4).unwrap(), 0);
    }
}
