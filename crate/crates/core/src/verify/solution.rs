use crate::geometry::{equivalent_radius, ShapeSpec};
use crate::measures::density_snapshot;
use crate::potential::{DoubleWell, Potential};
use crate::solver::PhaseField;

/// `∫|ξ^ε| / ∫e^ε`; 0 for a field without energy.
pub fn equipartition_ratio<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> f64 {
    let s = density_snapshot(f, pot);
    let e = s.energy_total();
    if e > 0.0 {
        s.discrepancy_abs_total() / e
    } else {
        0.0
    }
}

/// `sup_x |φ(x) − Ψ(d(x)/ε)|` against the untruncated signed distance.
pub fn profile_error<W: DoubleWell>(f: &PhaseField, shape: &ShapeSpec, pot: &Potential<W>) -> f64 {
    let g = f.grid();
    let eps = f.eps();
    f.values()
        .iter()
        .enumerate()
        .map(|(i, v)| libm::fabs(v - pot.psi(shape.raw_distance(&g.center(i)) / eps)))
        .fold(0.0, f64::max)
}

/// Radius of the ball with the phase volume of `{φ ≥ 0}`.
pub fn radius_from_volume(f: &PhaseField) -> f64 {
    let g = f.grid();
    let count = f.values().iter().filter(|&&v| v >= 0.0).count();
    equivalent_radius(g.dim(), count as f64 * g.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Boundary, Grid};
    use crate::geometry::{prepare_initial_data, Shape};

    #[test]
    fn prepared_profile_is_exact_and_balanced() {
        let pot = Potential::standard();
        let g = Grid::cube(1, 512, 1.0, Boundary::Reflective).unwrap();
        let s = ShapeSpec::new(
            Shape::HalfSpace {
                point: [0.5, 0.0, 0.0],
                normal: [1.0, 0.0, 0.0],
            },
            1,
        );
        let f = prepare_initial_data(&s, 0.05, &g, &pot).unwrap();
        assert!(profile_error(&f, &s, &pot) < 1e-8);
        assert!(equipartition_ratio(&f, &pot) < 1e-2);
        assert!((radius_from_volume(&f) - 0.25).abs() < 1e-12);
    }
}
