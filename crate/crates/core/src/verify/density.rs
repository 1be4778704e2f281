use alloc::vec::Vec;

use super::{ReportRow, Sided};
use crate::fields::{Grid, Point};
use crate::measures::{density_snapshot, DensitySnapshot};
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseTrajectory;
use crate::{Error, Result};

/// Interface-centred sample points per snapshot.
pub const DENSITY_CENTERS: usize = 8;
/// Radii per centre, geometrically spaced.
pub const DENSITY_RADII: usize = 8;
/// Smallest radius in cells.
pub const DENSITY_MIN_CELLS: f64 = 4.0;

/// Largest `μ_t(B_r(x))/r^{n−1}` over interface centres and radii.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRatioReport {
    pub max_ratio: f64,
    /// `(time, centre, radius)` of the largest ratio.
    pub worst: Option<(f64, Point, f64)>,
    pub samples: usize,
    /// Balls dropped because they leave the box.
    pub refused: usize,
    pub span: f64,
}

impl DensityRatioReport {
    pub fn row(&self, scenario: &str, eps: f64, bound: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            Some(eps),
            "density_ratio",
            self.max_ratio,
            bound,
            0.0,
            Sided::Upper,
            self.span,
        )
    }
}

/// Cells nearest the zero level set, evenly subsampled in index order.
fn interface_centers(snap_phi: &[f64], grid: &Grid) -> Vec<Point> {
    let mut near: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let v = snap_phi[i];
            (0..grid.dim()).any(|a| {
                let j = grid.neighbor(i, a, true);
                j != i && (v >= 0.0) != (snap_phi[j] >= 0.0)
            })
        })
        .collect();
    near.sort_unstable();
    if near.is_empty() {
        return Vec::new();
    }
    let take = DENSITY_CENTERS.min(near.len());
    (0..take).map(|k| grid.center(near[k * near.len() / take])).collect()
}

/// `μ_t(B_r(c))` summed over the index box around the ball only.
fn ball_mass(snap: &DensitySnapshot, c: &Point, r: f64) -> f64 {
    let g = snap.normalized.grid();
    let h = g.spacing();
    let vals = snap.normalized.values();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..g.dim() {
        let n = g.resolution(a);
        lo[a] = libm::floor((c[a] - r) / h).max(0.0) as usize;
        hi[a] = (libm::ceil((c[a] + r) / h).max(0.0) as usize).min(n - 1);
    }
    let r2 = r * r;
    let mut s = 0.0;
    let mut idx = lo;
    loop {
        let mut d2 = 0.0;
        for a in 0..g.dim() {
            let x = (idx[a] as f64 + 0.5) * h - c[a];
            d2 += x * x;
        }
        if d2 <= r2 {
            s += vals[g.index(idx)];
        }
        let mut a = g.dim();
        loop {
            if a == 0 {
                return s * g.cell_volume();
            }
            a -= 1;
            if idx[a] < hi[a] {
                idx[a] += 1;
                break;
            }
            idx[a] = lo[a];
        }
    }
}

/// Density ratios at snapshots with `t ≥ t_min`, radii from `4h` to `r_max`.
pub fn density_ratio_check<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    t_min: f64,
    r_max: f64,
) -> Result<DensityRatioReport> {
    let grid = traj.grid();
    let h = grid.spacing();
    let r_min = DENSITY_MIN_CELLS * h;
    if !(r_max > r_min) {
        return Err(Error::RadiusTooSmall {
            radius: r_max,
            min: r_min,
        });
    }
    let radii: Vec<f64> = (0..DENSITY_RADII)
        .map(|k| r_min * libm::pow(r_max / r_min, k as f64 / (DENSITY_RADII - 1) as f64))
        .collect();
    let power = grid.dim() as f64 - 1.0;
    let mut rep = DensityRatioReport {
        max_ratio: 0.0,
        worst: None,
        samples: 0,
        refused: 0,
        span: 0.0,
    };
    let mut first = None;
    for f in traj.snapshots.iter().filter(|f| f.time() >= t_min) {
        let snap = density_snapshot(f, pot);
        first.get_or_insert(f.time());
        rep.span = f.time() - first.unwrap_or(f.time());
        for c in interface_centers(f.values(), grid) {
            for &r in &radii {
                if !grid.contains_ball(&c, r) {
                    rep.refused += 1;
                    continue;
                }
                let ratio = ball_mass(&snap, &c, r) / libm::pow(r, power);
                rep.samples += 1;
                if !(ratio <= rep.max_ratio) {
                    rep.max_ratio = ratio;
                    rep.worst = Some((f.time(), c, r));
                }
            }
        }
    }
    if rep.samples == 0 {
        return Err(Error::TooFewSnapshots { have: 0, need: 1 });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Boundary;
    use crate::geometry::{prepare_initial_data, Shape, ShapeSpec};
    use crate::measures::density_ratio;
    use crate::solver::evolve;

    #[test]
    fn box_sum_matches_full_integral() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 128, 1.0, Boundary::Periodic).unwrap();
        let s = ShapeSpec::new(
            Shape::Ball {
                center: [0.5, 0.5, 0.0],
                radius: 0.3,
            },
            2,
        );
        let f = prepare_initial_data(&s, 0.02, &g, &pot).unwrap();
        let snap = density_snapshot(&f, &pot);
        let c = [0.8, 0.5, 0.0];
        for (r, full) in density_ratio(&snap, &c, &[0.05, 0.1, 0.19]) {
            let fast = ball_mass(&snap, &c, r) / r;
            assert!((fast - full.unwrap()).abs() < 1e-12 * fast.max(1.0));
        }
    }

    #[test]
    fn circle_ratios_are_bounded() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 64, 1.0, Boundary::Periodic).unwrap();
        let s = ShapeSpec::new(
            Shape::Ball {
                center: [0.5, 0.5, 0.0],
                radius: 0.3,
            },
            2,
        );
        let f = prepare_initial_data(&s, 0.04, &g, &pot).unwrap();
        let traj = evolve(&f, 0.004, 0.001, 1.0, &pot).unwrap();
        let rep = density_ratio_check(&traj, &pot, 0.002, 0.2).unwrap();
        assert!(rep.samples > 0);
        // a disc of radius r cut by a nearly flat interface has ratio ≈ 2
        assert!(rep.max_ratio < 3.0, "{rep:?}");
        assert!(rep.row("c", 0.04, 10.0).pass);
    }
}
