//! Energy, discrepancy and interface quantities of a phase field.

use alloc::vec;
use alloc::vec::Vec;

use crate::fields::{face_gradient_sq, integrate, pairwise_sum, spatial_gradient, Point, Region, ScalarField};
use crate::geometry::grad_norm;
use crate::potential::{DoubleWell, Potential};
use crate::solver::{rate, PhaseField};
use crate::{Error, Result};

/// Cells with `|φ| ≥ BAND_LEVEL` are outside the interface band.
pub const BAND_LEVEL: f64 = 0.95;
/// Gradient floor as a fraction of the peak profile slope `Ψ'(0)/ε`.
pub const GRADIENT_FLOOR: f64 = 0.1;

/// Normalized total energy `μ(all) = (1/σ)∫ ε|∇φ|²/2 + W(φ)/ε`.
pub fn total_energy<W: DoubleWell>(f: &ScalarField, eps: f64, pot: &Potential<W>) -> f64 {
    let g2 = face_gradient_sq(f);
    let v = f.values();
    let s = crate::fields::pairwise_sum_by(v.len(), |i| 0.5 * eps * g2[i] + pot.w(v[i]) / eps);
    s * f.grid().cell_volume() / pot.sigma()
}

/// Energy, normalized energy and discrepancy densities at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySnapshot {
    pub time: f64,
    pub eps: f64,
    pub sigma: f64,
    /// `e = ε|∇φ|²/2 + W(φ)/ε`.
    pub energy: ScalarField,
    /// `e/σ`, the density of `μ_t`.
    pub normalized: ScalarField,
    /// `ξ = ε|∇φ|²/2 − W(φ)/ε`.
    pub discrepancy: ScalarField,
}

impl DensitySnapshot {
    /// `μ_t(all)`.
    pub fn total(&self) -> f64 {
        pairwise_sum(self.normalized.values()) * self.normalized.grid().cell_volume()
    }

    pub fn energy_total(&self) -> f64 {
        pairwise_sum(self.energy.values()) * self.energy.grid().cell_volume()
    }

    /// `∫|ξ|`.
    pub fn discrepancy_abs_total(&self) -> f64 {
        let v = self.discrepancy.values();
        crate::fields::pairwise_sum_by(v.len(), |i| libm::fabs(v[i])) * self.discrepancy.grid().cell_volume()
    }

    /// `μ_t(B_r(center))`.
    pub fn ball_mass(&self, center: &Point, radius: f64) -> Result<f64> {
        integrate(
            &self.normalized,
            None,
            Region::Ball {
                center: *center,
                radius,
            },
        )
    }
}

/// Densities with the face-difference squared gradient, so that the total
/// energy is the Lyapunov functional of the explicit scheme.
pub fn density_snapshot<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> DensitySnapshot {
    let grid = f.grid().clone();
    let eps = f.eps();
    let sigma = pot.sigma();
    let g2 = face_gradient_sq(f.field());
    let v = f.values();
    let mut e = vec![0.0; v.len()];
    let mut m = vec![0.0; v.len()];
    let mut x = vec![0.0; v.len()];
    for i in 0..v.len() {
        let kin = 0.5 * eps * g2[i];
        let pot_term = pot.w(v[i]) / eps;
        e[i] = kin + pot_term;
        m[i] = e[i] / sigma;
        x[i] = kin - pot_term;
    }
    DensitySnapshot {
        time: f.time(),
        eps,
        sigma,
        energy: ScalarField::from_parts(grid.clone(), e),
        normalized: ScalarField::from_parts(grid.clone(), m),
        discrepancy: ScalarField::from_parts(grid, x),
    }
}

/// Interface normal, normal velocity and curvature on the band
/// `{|φ| < 0.95, |∇φ| > 0.1 Ψ'(0)/ε}`. Off the band all entries are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceFields {
    pub band: Vec<bool>,
    /// Outward unit normal `ν = −∇φ/|∇φ|` (out of `{φ ≥ 0}`).
    pub normal: Vec<Point>,
    /// `V = ∂_tφ/|∇φ|`.
    pub velocity: Vec<f64>,
    /// `κ = −div ν`.
    pub curvature: Vec<f64>,
    /// `∂_tφ = Δφ − W'(φ)/ε²` on every cell.
    pub rate: ScalarField,
    /// Central-difference `|∇φ|` on every cell.
    pub grad_norm: Vec<f64>,
    /// Central-difference gradient on every cell.
    pub gradient: Vec<ScalarField>,
    pub empty: bool,
}

impl InterfaceFields {
    pub fn band_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.band.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn band_len(&self) -> usize {
        self.band.iter().filter(|b| **b).count()
    }

    /// Band median of `V`; `None` for an empty band.
    pub fn median_velocity(&self) -> Option<f64> {
        median(self.band_cells().map(|i| self.velocity[i]).collect())
    }

    pub fn median_curvature(&self) -> Option<f64> {
        median(self.band_cells().map(|i| self.curvature[i]).collect())
    }
}

pub fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn interface_fields<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> InterfaceFields {
    let g = f.grid();
    let dim = g.dim();
    let h = g.spacing();
    let v = f.values();
    let gradient = spatial_gradient(f.field());
    let norms: Vec<f64> = (0..g.len()).map(|i| grad_norm(&gradient, i)).collect();
    let floor = GRADIENT_FLOOR * pot.sqrt_2w(0.0) / f.eps();
    let band: Vec<bool> = (0..g.len())
        .map(|i| libm::fabs(v[i]) < BAND_LEVEL && norms[i] > floor)
        .collect();
    let rate = rate(f, pot);

    // normal wherever the gradient is not degenerate
    let tiny = 1e-12 / f.eps();
    let unit: Vec<Option<Point>> = (0..g.len())
        .map(|i| {
            if norms[i] <= tiny {
                return None;
            }
            let mut n = [0.0; 3];
            for a in 0..dim {
                n[a] = -gradient[a].values()[i] / norms[i];
            }
            Some(n)
        })
        .collect();

    let mut normal = vec![[0.0; 3]; g.len()];
    let mut velocity = vec![0.0; g.len()];
    let mut curvature = vec![0.0; g.len()];
    for i in 0..g.len() {
        if !band[i] {
            continue;
        }
        let n = unit[i].expect("band cells have a nondegenerate gradient");
        normal[i] = n;
        velocity[i] = rate.values()[i] / norms[i];
        let mut div = 0.0;
        for a in 0..dim {
            let fwd = g.neighbor(i, a, true);
            let bwd = g.neighbor(i, a, false);
            div += match (unit[fwd], unit[bwd]) {
                (Some(p), Some(m)) if fwd != bwd && fwd != i && bwd != i => (p[a] - m[a]) / (2.0 * h),
                (Some(p), _) if fwd != i => (p[a] - n[a]) / h,
                (_, Some(m)) if bwd != i => (n[a] - m[a]) / h,
                _ => 0.0,
            };
        }
        curvature[i] = -div;
    }
    let empty = !band.iter().any(|b| *b);
    InterfaceFields {
        band,
        normal,
        velocity,
        curvature,
        rate,
        grad_norm: norms,
        gradient,
        empty,
    }
}

/// `μ_t(B_r(center)) / r^{n−1}` per radius. Radii below `2h` or balls
/// leaving the domain are refused individually.
pub fn density_ratio(snap: &DensitySnapshot, center: &Point, radii: &[f64]) -> Vec<(f64, Result<f64>)> {
    let g = snap.normalized.grid();
    let dim = g.dim();
    radii
        .iter()
        .map(|&r| {
            let res = if !g.contains_ball(center, r) {
                Err(Error::BallOutsideDomain { radius: r })
            } else {
                snap.ball_mass(center, r).map(|m| m / libm::pow(r, dim as f64 - 1.0))
            };
            (r, res)
        })
        .collect()
}

/// Fraction of a cell where `φ + ∇φ·(x − c) ≥ 0`, for slopes `widths[a] = |∂_aφ|h`.
///
/// This is the distribution function of a sum of centred uniforms evaluated at `φ`.
pub fn cell_fraction(phi: f64, widths: &[f64]) -> f64 {
    let wmax = widths.iter().fold(0.0f64, |m, w| m.max(libm::fabs(*w)));
    let mut w = [0.0; 3];
    let mut n = 0;
    for &x in widths {
        // slopes far below the largest one cannot change the fraction
        if libm::fabs(x) > 1e-6 * wmax {
            w[n] = libm::fabs(x);
            n += 1;
        }
    }
    let total: f64 = w[..n].iter().sum();
    if n == 0 || phi >= 0.5 * total {
        return if phi >= 0.0 { 1.0 } else { 0.0 };
    }
    if phi <= -0.5 * total {
        return 0.0;
    }
    let x = phi + 0.5 * total;
    let mut s = 0.0;
    for mask in 0u32..(1 << n) {
        let shift: f64 = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| w[k]).sum();
        let y = x - shift;
        if y > 0.0 {
            let term = libm::pow(y, n as f64);
            s += if mask.count_ones() % 2 == 0 { term } else { -term };
        }
    }
    let mut denom = 1.0;
    for k in 0..n {
        denom *= (k + 1) as f64 * w[k];
    }
    (s / denom).clamp(0.0, 1.0)
}

/// Per-cell volume fraction of `{φ ≥ 0}` from the linearized field.
pub fn phase_fractions(f: &PhaseField, itf: &InterfaceFields) -> Vec<f64> {
    let g = f.grid();
    let h = g.spacing();
    let v = f.values();
    (0..g.len())
        .map(|i| {
            let mut w = [0.0; 3];
            for a in 0..g.dim() {
                w[a] = itf.gradient[a].values()[i] * h;
            }
            cell_fraction(v[i], &w[..g.dim()])
        })
        .collect()
}
