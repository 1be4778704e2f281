use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{cell_sum, check_support, split_gauss_legendre, trapezoid, view, window, ReportRow, Sided};
use crate::fields::TestFunction;
use crate::geometry::{modica_mortola_perimeter, ReferenceFlow};
use crate::measures::phase_fractions;
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseTrajectory;
use crate::{Error, Result};

/// `∫_{E_t}φ |_{t₁}^{t₂}` against `∫∫_{E_t}∂_tφ + ∫∫ φ V d|∇χ_{E_t}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct BvResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// Floor of the normalization: one layer of cells along the interface.
    pub scale: f64,
    pub span: f64,
}

impl BvResidual {
    pub fn absolute(&self) -> f64 {
        libm::fabs(self.lhs - self.rhs)
    }

    /// `|LHS − RHS| / max(|LHS|, scale)`.
    pub fn relative(&self) -> f64 {
        self.absolute() / libm::fabs(self.lhs).max(self.scale).max(f64::MIN_POSITIVE)
    }

    pub fn row(&self, scenario: &str, eps: f64, name: &str, tol: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            Some(eps),
            &format!("bv_{name}"),
            self.relative(),
            0.0,
            tol,
            Sided::Upper,
            self.span,
        )
    }

    /// Must-detect row: the residual equals the volume removed by the jump.
    pub fn jump_row(&self, scenario: &str, jump: f64, rel_tol: f64) -> ReportRow {
        ReportRow::new(
            scenario,
            None,
            "bv_jump_detect",
            self.absolute(),
            jump,
            rel_tol * jump,
            Sided::TwoSided,
            self.span,
        )
        .detect()
    }

    /// Strict decrease of the relative residual along `(ε, residual)` pairs
    /// ordered by decreasing ε; rows keyed by the finer ε.
    pub fn convergence_rows(scenario: &str, name: &str, levels: &[(f64, f64)], span: f64) -> Vec<ReportRow> {
        let mut levels = levels.to_vec();
        levels.sort_by(|a, b| b.0.total_cmp(&a.0));
        levels
            .windows(2)
            .map(|w| {
                ReportRow::new(
                    scenario,
                    Some(w[1].0),
                    &format!("bv_convergence_{name}"),
                    w[1].1,
                    w[0].1,
                    0.0,
                    Sided::UpperStrict,
                    span,
                )
            })
            .collect()
    }
}

/// BV residuals of a test suite over the snapshot window `[t1, t2]`.
///
/// The boundary measure is the Modica–Mortola density `(1/σ)|∇w(φ)|` and
/// `h·ν` is realized by `V` on the interface band; off the band the product
/// `V|∇w(φ)|` is evaluated as `sqrt(2W(φ))∂_tφ`. Volumes of `{φ ≥ 0}` use
/// sub-cell fractions of the linearized field.
pub fn bv_residual<W: DoubleWell>(
    traj: &PhaseTrajectory,
    pot: &Potential<W>,
    tests: &[TestFunction],
    t1: f64,
    t2: f64,
) -> Result<Vec<BvResidual>> {
    let (k1, k2) = window(traj, t1, t2)?;
    for t in tests {
        check_support(t, traj)?;
    }
    let times = &traj.times()[k1..=k2];
    let inv_sigma = 1.0 / pot.sigma();
    let mut volume = vec![Vec::with_capacity(k2 - k1 + 1); tests.len()];
    let mut flux = vec![Vec::with_capacity(k2 - k1 + 1); tests.len()];
    for f in &traj.snapshots[k1..=k2] {
        let v = view(f, pot);
        let phi = f.values();
        let g = f.grid();
        let t = f.time();
        let rate = v.itf.rate.values();
        let frac = phase_fractions(f, &v.itf);
        for (k, test) in tests.iter().enumerate() {
            volume[k].push(cell_sum(g, |i, p| frac[i] * test.value(p, t)));
            flux[k].push(cell_sum(g, |i, p| {
                let mut s = 0.0;
                s += frac[i] * test.time_derivative(p, t);
                if v.itf.band[i] {
                    s += test.value(p, t) * v.itf.velocity[i] * v.mm[i];
                } else {
                    // V|∇φ| = ∂_tφ wherever ∇φ ≠ 0; the tails carry a fixed share of |∇w|
                    s += test.value(p, t) * pot.sqrt_2w(phi[i]) * rate[i] * inv_sigma;
                }
                s
            }));
        }
    }
    let first = &traj.snapshots[k1];
    let layer = first.grid().spacing() * modica_mortola_perimeter(first.field(), pot);
    Ok(tests
        .iter()
        .enumerate()
        .map(|(k, test)| BvResidual {
            lhs: volume[k][volume[k].len() - 1] - volume[k][0],
            rhs: trapezoid(times, &flux[k]),
            scale: layer * test.sup_norm(),
            span: t2 - t1,
        })
        .collect())
}

const TIME_NODES: usize = 32;

/// The BV residual of an exact sphere flow, with Gauss–Legendre quadrature in
/// time split at the vanishing time and at the test's window breakpoints.
pub fn analytic_bv_residual(flow: &ReferenceFlow, test: &TestFunction, t1: f64, t2: f64) -> Result<BvResidual> {
    if !(t1 >= 0.0 && t2 > t1) {
        return Err(Error::Domain {
            what: "window must satisfy 0 <= t1 < t2",
            value: t2 - t1,
        });
    }
    if test.dim != flow.dim {
        return Err(Error::Mismatch("test and flow dimensions differ".into()));
    }
    let volume = |t: f64| flow.interior_integral(t, |p| test.value(p, t));
    let lhs = volume(t2) - volume(t1);

    // panels split where the integrand loses smoothness
    let mut rhs = 0.0;
    for (t, w) in split_gauss_legendre(
        t1,
        t2,
        TIME_NODES,
        &[flow.vanishing_time()],
        core::slice::from_ref(test),
    ) {
        let bulk = flow.interior_integral(t, |p| test.time_derivative(p, t));
        let bdry = match flow.normal_speed(t) {
            Ok(speed) => flow.boundary_integral(t, |p, _| test.value(p, t) * speed),
            Err(_) => 0.0,
        };
        rhs += w * (bulk + bdry);
    }
    Ok(BvResidual {
        lhs,
        rhs,
        scale: 0.0,
        span: t2 - t1,
    })
}
