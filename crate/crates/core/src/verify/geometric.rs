use alloc::vec;
use alloc::vec::Vec;

use super::{ReportRow, Sided};
use crate::geometry::{sphere_nodes, ReferenceFlow};
use crate::{Error, Result};

/// Largest deviations of the closed-form space-time identities on the
/// boundary `{|x − c| = r(t)}` of an exact sphere flow.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricReport {
    /// Co-area factor `|∇^{∂E} t|` against `1/sqrt(1 + |h|²)`.
    pub coarea: f64,
    /// Slice normal `p(ν_E)/|p(ν_E)|` against `ν_{E_t}`.
    pub slicing: f64,
    /// Direct normal of `|x − c| − r(t)` against `(ν, −h·ν)/sqrt(1 + |h|²)`.
    pub normal: f64,
    /// `| |p(ν_E)|² + |q(ν_E)|² − 1 |`.
    pub unit: f64,
    pub samples: usize,
}

impl GeometricReport {
    pub fn max_error(&self) -> f64 {
        self.coarea.max(self.slicing).max(self.normal).max(self.unit)
    }

    pub fn rows(&self, scenario: &str, tol: f64) -> Vec<ReportRow> {
        [
            ("geometric_coarea", self.coarea),
            ("geometric_slicing", self.slicing),
            ("geometric_normal", self.normal),
            ("geometric_unit", self.unit),
        ]
        .iter()
        .map(|(name, v)| ReportRow::new(scenario, None, name, *v, 0.0, tol, Sided::Upper, 0.0))
        .collect()
    }
}

/// Space-time normal `(ν_x, ν_t)` of `E` at a boundary point.
fn spacetime_normal(spatial: &[f64; 3], dim: usize, speed: f64) -> [f64; 4] {
    let norm = libm::sqrt(1.0 + speed * speed);
    let mut out = [0.0; 4];
    for a in 0..dim {
        out[a] = spatial[a] / norm;
    }
    out[dim] = -speed / norm;
    out
}

pub fn geometric_identity_checks(flow: &ReferenceFlow, times: &[f64]) -> Result<GeometricReport> {
    let dim = flow.dim;
    let mut rep = GeometricReport {
        coarea: 0.0,
        slicing: 0.0,
        normal: 0.0,
        unit: 0.0,
        samples: 0,
    };
    for &t in times {
        let speed = flow.normal_speed(t)?;
        let r = flow.radius(t);
        // |h| with h = speed·ν
        let h_abs = libm::fabs(speed);
        let closed_factor = 1.0 / libm::sqrt(1.0 + h_abs * h_abs);
        sphere_nodes(dim, &flow.center, r, |p, nu, _| {
            // direct: normalized gradient of F(x, t) = |x − c| − r(t)
            let mut grad = [0.0; 4];
            let mut len2 = 0.0;
            let mut d = [0.0; 3];
            let mut dn = 0.0;
            for a in 0..dim {
                d[a] = p[a] - flow.center[a];
                dn += d[a] * d[a];
            }
            let dn = libm::sqrt(dn);
            for a in 0..dim {
                grad[a] = d[a] / dn;
                len2 += grad[a] * grad[a];
            }
            grad[dim] = -speed;
            len2 += speed * speed;
            let len = libm::sqrt(len2);
            for g in grad.iter_mut().take(dim + 1) {
                *g /= len;
            }
            let formula = spacetime_normal(nu, dim, speed);
            for a in 0..=dim {
                rep.normal = rep.normal.max(libm::fabs(grad[a] - formula[a]));
            }
            let q = formula[dim];
            let p2: f64 = (0..dim).map(|a| formula[a] * formula[a]).sum();
            rep.unit = rep.unit.max(libm::fabs(p2 + q * q - 1.0));
            let pn = libm::sqrt(p2);
            for a in 0..dim {
                rep.slicing = rep.slicing.max(libm::fabs(formula[a] / pn - d[a] / dn));
            }
            // tangential gradient of q(x, t) = t: e_t minus its normal part
            let tangential = libm::sqrt((1.0 - q * q).max(0.0));
            rep.coarea = rep.coarea.max(libm::fabs(tangential - closed_factor));
            rep.samples += 1;
        });
    }
    if rep.samples == 0 {
        return Err(Error::Mismatch("no sample times".into()));
    }
    Ok(rep)
}

/// Parametrization of the space-time sphere in `ℝ^{n+1}`: angles then time.
fn embed(flow: &ReferenceFlow, u: &[f64]) -> [f64; 4] {
    let dim = flow.dim;
    let t = u[dim - 1];
    let r = libm::sqrt(flow.r0 * flow.r0 - 2.0 * (dim as f64 - 1.0) * t);
    let c = flow.center;
    match dim {
        2 => [c[0] + r * libm::cos(u[0]), c[1] + r * libm::sin(u[0]), t, 0.0],
        _ => {
            let (th, ph) = (u[0], u[1]);
            [
                c[0] + r * libm::sin(th) * libm::cos(ph),
                c[1] + r * libm::sin(th) * libm::sin(ph),
                c[2] + r * libm::cos(th),
                t,
            ]
        }
    }
}

/// Solves the symmetric positive definite system `G x = b` (size ≤ 3).
fn solve(mut g: [[f64; 3]; 3], mut b: [f64; 3], n: usize) -> [f64; 3] {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| libm::fabs(g[i][col]).total_cmp(&libm::fabs(g[j][col])))
            .unwrap();
        g.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = g[row][col] / g[col][col];
            for k in col..n {
                g[row][k] -= f * g[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= g[row][k] * x[k];
        }
        x[row] = s / g[row][row];
    }
    x
}

/// Co-area factor from a mesh: at each sample the local simplex with
/// vertices `X(u ± δe_i)` spans the tangent space, and the gradient of the
/// linear interpolant of `t` is `e_t` projected onto that span. Returns the
/// largest deviation from `1/sqrt(1 + |h|²)`.
pub fn mesh_coarea_oracle(flow: &ReferenceFlow, t: f64, samples: usize) -> Result<f64> {
    let speed = flow.normal_speed(t)?;
    let dim = flow.dim;
    let closed = 1.0 / libm::sqrt(1.0 + speed * speed);
    let delta = 1e-4 * flow.radius(t).min(flow.vanishing_time() - t).clamp(1e-12, 1.0);
    let mut worst: f64 = 0.0;
    for s in 0..samples.max(1) {
        let frac = (s as f64 + 0.5) / samples.max(1) as f64;
        let u: Vec<f64> = match dim {
            2 => vec![core::f64::consts::TAU * frac, t],
            _ => vec![0.2 + (core::f64::consts::PI - 0.4) * frac, 2.399_963 * s as f64, t],
        };
        let params = u.len();
        let mut tangents = [[0.0; 4]; 3];
        for (i, tan) in tangents.iter_mut().enumerate().take(params) {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += delta;
            dn[i] -= delta;
            let (a, b) = (embed(flow, &up), embed(flow, &dn));
            for k in 0..=dim {
                tan[k] = a[k] - b[k];
            }
        }
        let mut gram = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for i in 0..params {
            for j in 0..params {
                gram[i][j] = (0..=dim).map(|k| tangents[i][k] * tangents[j][k]).sum();
            }
            rhs[i] = tangents[i][dim];
        }
        let coef = solve(gram, rhs, params);
        let mut proj = [0.0; 4];
        for i in 0..params {
            for k in 0..=dim {
                proj[k] += coef[i] * tangents[i][k];
            }
        }
        let norm = libm::sqrt(proj.iter().map(|x| x * x).sum());
        worst = worst.max(libm::fabs(norm - closed));
    }
    Ok(worst)
}

pub(crate) fn mesh_row(scenario: &str, err: f64, tol: f64) -> ReportRow {
    ReportRow::new(
        scenario,
        None,
        "geometric_mesh_oracle",
        err,
        0.0,
        tol,
        Sided::Upper,
        0.0,
    )
}

impl GeometricReport {
    pub fn mesh_row(scenario: &str, err: f64, tol: f64) -> ReportRow {
        mesh_row(scenario, err, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_at_time_zero() {
        let flow = ReferenceFlow::smooth(1.0, 2, [0.0; 3]).unwrap();
        let rep = geometric_identity_checks(&flow, &[0.0]).unwrap();
        assert!(rep.max_error() < 1e-12, "{rep:?}");
        // co-area factor 1/√2 at |h| = 1
        let n = spacetime_normal(&[1.0, 0.0, 0.0], 2, -1.0);
        assert!((libm::sqrt(1.0 - n[2] * n[2]) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identities_hold_in_three_dimensions() {
        let flow = ReferenceFlow::smooth(1.0, 3, [0.5, 0.5, 0.5]).unwrap();
        let rep = geometric_identity_checks(&flow, &[0.0, 0.1, 0.2]).unwrap();
        assert!(rep.max_error() < 1e-12, "{rep:?}");
        assert!(geometric_identity_checks(&flow, &[0.3]).is_err());
    }

    #[test]
    fn mesh_oracle_matches_closed_form() {
        let flow = ReferenceFlow::smooth(1.0, 3, [0.0; 3]).unwrap();
        let err = mesh_coarea_oracle(&flow, 0.1, 64).unwrap();
        assert!(err < 1e-6, "{err}");
        let flow = ReferenceFlow::smooth(1.0, 2, [0.0; 3]).unwrap();
        assert!(mesh_coarea_oracle(&flow, 0.2, 64).unwrap() < 1e-6);
    }
}
