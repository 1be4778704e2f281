//! Shapes, well-prepared initial data, exact reference flows and
//! volume/perimeter surrogates of the phase `{φ ≥ 0}`.

mod flow;
mod isoline;
mod shape;

use alloc::vec::Vec;

pub(crate) use flow::gauss_legendre;
pub use flow::{ball_integral, ball_volume, sphere_integral, sphere_nodes, FlowKind, ReferenceFlow};
pub use isoline::level_set_measure;
pub use shape::{smooth_clamp, Shape, ShapeSpec};

use crate::fields::{pairwise_sum_by, spatial_gradient, Boundary, Grid, Point, ScalarField};
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseField;
use crate::{Error, Result};

/// Truncation level of the signed distance, in units of ε.
pub const TRUNCATION_WIDTHS: f64 = 10.0;
/// Minimum clearance between the interface and a reflective face, in units of ε.
pub const BOUNDARY_WIDTHS: f64 = 10.0;
/// Composite children closer than this many ε to their own interfaces at the
/// same point are treated as touching.
pub const SEPARATION_WIDTHS: f64 = 3.0;

/// `φ₀ = Ψ(d̃/ε)` sampled at cell centres, `d̃` truncated at `10ε`.
pub fn prepare_initial_data<W: DoubleWell>(
    shape: &ShapeSpec,
    eps: f64,
    grid: &Grid,
    pot: &Potential<W>,
) -> Result<PhaseField> {
    let h = grid.spacing();
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: eps,
        });
    }
    if eps < 2.0 * h {
        return Err(Error::UnderResolved { eps, h, ratio: eps / h });
    }
    if shape.dim != grid.dim() {
        return Err(Error::Mismatch(alloc::format!(
            "shape of dimension {} on a grid of dimension {}",
            shape.dim,
            grid.dim()
        )));
    }
    check_separation(shape, eps, grid)?;
    check_boundary_clearance(shape, eps, grid)?;

    let spec = ShapeSpec {
        truncation: TRUNCATION_WIDTHS * eps,
        ..shape.clone()
    };
    let values = (0..grid.len())
        .map(|i| pot.psi(spec.distance(&grid.center(i)) / eps))
        .collect();
    PhaseField::new(ScalarField::new(grid.clone(), values)?, eps, 0.0)
}

fn check_separation(shape: &ShapeSpec, eps: f64, grid: &Grid) -> Result<()> {
    if shape.root.is_primitive() {
        return Ok(());
    }
    let tol = SEPARATION_WIDTHS * eps;
    for i in 0..grid.len() {
        let p = grid.center(i);
        let mut touching = false;
        shape.root.visit_composites(&p, shape.dim, &mut |a, b| {
            touching |= libm::fabs(a) < tol && libm::fabs(b) < tol;
        });
        if touching {
            return Err(Error::TouchingComponents {
                x: p[0],
                y: p[1],
                z: p[2],
            });
        }
    }
    Ok(())
}

/// The interface must keep `10ε` from reflective faces it is not orthogonal
/// to, and `10ε` from its own periodic image (`5ε` from a periodic face).
fn check_boundary_clearance(shape: &ShapeSpec, eps: f64, grid: &Grid) -> Result<()> {
    let h = grid.spacing();
    let dim = grid.dim();
    let slack = 1e-9 * grid.extent(0);
    let mut worst: Option<(f64, f64)> = None;
    for i in 0..grid.len() {
        let p = grid.center(i);
        let d = shape.raw_distance(&p);
        if libm::fabs(d) >= h {
            continue;
        }
        for a in 0..dim {
            let (required, orthogonal_ok) = match grid.boundary(a) {
                Boundary::Reflective => (BOUNDARY_WIDTHS * eps, true),
                Boundary::Periodic => (0.5 * BOUNDARY_WIDTHS * eps, false),
            };
            let s = p[a].min(grid.extent(a) - p[a]);
            // lower estimate of the face distance of the nearest interface point
            let reach = s + libm::fabs(d);
            if reach >= required - slack {
                continue;
            }
            if orthogonal_ok && normal_component(shape, &p, a, h) <= 1e-6 {
                continue;
            }
            if worst.is_none_or(|(dist, _)| reach < dist) {
                worst = Some((reach, required));
            }
        }
    }
    match worst {
        Some((distance, required)) => Err(Error::BoundaryProximity { distance, required }),
        None => Ok(()),
    }
}

fn normal_component(shape: &ShapeSpec, p: &Point, axis: usize, h: f64) -> f64 {
    let step = 0.25 * h;
    let mut fwd = *p;
    let mut bwd = *p;
    fwd[axis] += step;
    bwd[axis] -= step;
    libm::fabs(shape.raw_distance(&fwd) - shape.raw_distance(&bwd)) / (2.0 * step)
}

/// Indicator of the phase `{φ ≥ 0}`.
pub fn phase_indicator(f: &PhaseField) -> ScalarField {
    f.field().map(|v| if v >= 0.0 { 1.0 } else { 0.0 })
}

/// Phase volume and perimeter estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumePerimeter {
    pub volume: f64,
    /// `(1/σ)∫|∇w(φ)|` with central differences.
    pub perimeter: f64,
    /// Measure of the reconstructed zero level set.
    pub isoline_perimeter: f64,
}

pub fn volume_and_perimeter<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> VolumePerimeter {
    let grid = f.grid();
    let v = f.values();
    let count = v.iter().filter(|&&x| x >= 0.0).count();
    let volume = count as f64 * grid.cell_volume();
    VolumePerimeter {
        volume,
        perimeter: modica_mortola_perimeter(f.field(), pot),
        isoline_perimeter: level_set_measure(f.field()),
    }
}

/// `(1/σ)∫ sqrt(2W(φ))|∇φ|`, central-difference gradient.
pub fn modica_mortola_perimeter<W: DoubleWell>(f: &ScalarField, pot: &Potential<W>) -> f64 {
    let grad = spatial_gradient(f);
    let v = f.values();
    let s = pairwise_sum_by(v.len(), |i| pot.sqrt_2w(v[i]) * grad_norm(&grad, i));
    s * f.grid().cell_volume() / pot.sigma()
}

#[inline]
pub(crate) fn grad_norm(grad: &[ScalarField], i: usize) -> f64 {
    let mut s = 0.0;
    for c in grad {
        let g = c.values()[i];
        s += g * g;
    }
    libm::sqrt(s)
}

/// Radius of the ball with the given phase volume.
pub fn equivalent_radius(dim: usize, volume: f64) -> f64 {
    match dim {
        1 => 0.5 * volume,
        2 => libm::sqrt(volume / core::f64::consts::PI),
        _ => libm::cbrt(volume * 3.0 / (4.0 * core::f64::consts::PI)),
    }
}

/// Cells whose centres lie on the reference interface within half a cell.
pub fn interface_cells(flow: &ReferenceFlow, grid: &Grid, t: f64) -> Vec<usize> {
    let r = flow.radius(t);
    let h = grid.spacing();
    (0..grid.len())
        .filter(|&i| {
            let p = grid.center(i);
            let d2: f64 = (0..flow.dim)
                .map(|a| {
                    let d = p[a] - flow.center[a];
                    d * d
                })
                .sum();
            libm::fabs(libm::sqrt(d2) - r) <= 0.5 * h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn ball(r: f64) -> ShapeSpec {
        ShapeSpec::new(
            Shape::Ball {
                center: [0.5, 0.5, 0.0],
                radius: r,
            },
            2,
        )
    }

    #[test]
    fn well_prepared_ball() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 256, 1.0, Boundary::Periodic).unwrap();
        let f = prepare_initial_data(&ball(0.3), 0.02, &g, &pot).unwrap();
        let centre = g.index([128, 128, 0]);
        // nearest cell centre is 0.5·√2·h from the ball centre
        assert!(f.values()[centre] >= 1.0 - 1e-8);
        assert!(f.values().iter().all(|v| v.abs() < 1.0));
        let vp = volume_and_perimeter(&f, &pot);
        let h = g.spacing();
        assert!((vp.volume / (PI * 0.09) - 1.0).abs() < 3.0 * h / 0.3);
        for p in [vp.perimeter, vp.isoline_perimeter] {
            assert!((p / (2.0 * PI * 0.3) - 1.0).abs() < 0.05, "{p}");
        }
        assert!((vp.perimeter / vp.isoline_perimeter - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_distance_cells_are_zero() {
        let pot = Potential::standard();
        let g = Grid::cube(1, 64, 1.0, Boundary::Reflective).unwrap();
        // interface exactly on a cell centre
        let x0 = g.center(31)[0];
        let s = ShapeSpec::new(
            Shape::HalfSpace {
                point: [x0, 0.0, 0.0],
                normal: [1.0, 0.0, 0.0],
            },
            1,
        );
        let f = prepare_initial_data(&s, 0.04, &g, &pot).unwrap();
        assert_eq!(f.values()[31], 0.0);
    }

    #[test]
    fn refusals() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 64, 1.0, Boundary::Periodic).unwrap();
        match prepare_initial_data(&ball(0.3), 0.02, &g, &pot) {
            Err(Error::UnderResolved { ratio, .. }) => assert!((ratio - 1.28).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let g = Grid::cube(2, 128, 1.0, Boundary::Reflective).unwrap();
        assert!(matches!(
            prepare_initial_data(&ball(0.45), 0.02, &g, &pot),
            Err(Error::BoundaryProximity { .. })
        ));
        let touching = ShapeSpec::new(
            Shape::union(
                Shape::Ball {
                    center: [0.3, 0.5, 0.0],
                    radius: 0.15,
                },
                Shape::Ball {
                    center: [0.7, 0.5, 0.0],
                    radius: 0.15,
                },
            ),
            2,
        );
        let g = Grid::cube(2, 128, 1.0, Boundary::Periodic).unwrap();
        assert!(matches!(
            prepare_initial_data(&touching, 0.02, &g, &pot),
            Err(Error::TouchingComponents { .. })
        ));
    }

    #[test]
    fn planar_interface_orthogonal_to_reflective_faces() {
        let pot = Potential::standard();
        let g = Grid::cube(2, 128, 1.0, Boundary::Reflective).unwrap();
        let s = ShapeSpec::new(
            Shape::HalfSpace {
                point: [0.5, 0.0, 0.0],
                normal: [1.0, 0.0, 0.0],
            },
            2,
        );
        let f = prepare_initial_data(&s, 0.02, &g, &pot).unwrap();
        let vp = volume_and_perimeter(&f, &pot);
        assert!((vp.perimeter - 1.0).abs() < 0.02, "{}", vp.perimeter);
        assert!((vp.isoline_perimeter - 1.0).abs() < 0.02);
        assert!((vp.volume - 0.5).abs() < 1e-12);
    }

    #[test]
    fn indicator_extremes() {
        let g = Grid::cube(2, 16, 1.0, Boundary::Periodic).unwrap();
        for (c, want) in [(1.0, 1.0), (-1.0, 0.0)] {
            let f = PhaseField::new(ScalarField::constant(g.clone(), c), 0.2, 0.0).unwrap();
            assert!(phase_indicator(&f).values().iter().all(|&v| v == want));
            let vp = volume_and_perimeter(&f, &Potential::standard());
            if c < 0.0 {
                assert_eq!((vp.volume, vp.perimeter, vp.isoline_perimeter), (0.0, 0.0, 0.0));
            }
        }
    }
}
