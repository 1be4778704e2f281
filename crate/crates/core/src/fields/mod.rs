//! Uniform-grid scalar fields and the finite-difference operators on them.
//!
//! All reductions go through [`pairwise_sum`], which fixes the summation
//! order, so integrals are bit-reproducible.

pub mod dump;
mod grid;
mod test_function;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use grid::{Boundary, Grid, Point, MAX_DIM, MIN_RESOLUTION};
pub use test_function::{TestFunction, TestKind, TimeWindow};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; for operator outputs built from finite data.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.center(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

pub fn pairwise_sum_by(len: usize, mut term: impl FnMut(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, term: &mut impl FnMut(usize) -> f64) -> f64 {
        if hi - lo <= 32 {
            let mut s = 0.0;
            for i in lo..hi {
                s += term(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, term) + go(mid, hi, term)
    }
    if len == 0 {
        return 0.0;
    }
    go(0, len, &mut term)
}

/// Visits the grid line by line along the last (contiguous) axis.
///
/// The callback receives the line's starting index and, for every other
/// axis, the starting indices of the backward and forward neighbour lines.
pub(crate) fn for_each_line(grid: &Grid, mut f: impl FnMut(usize, &[(usize, usize)])) {
    let dim = grid.dim();
    let last = dim - 1;
    let n_lines = grid.len() / grid.resolution(last);
    let mut neigh = [(0usize, 0usize); MAX_DIM];
    for line in 0..n_lines {
        let base = line * grid.resolution(last);
        for a in 0..last {
            neigh[a] = (grid.neighbor(base, a, false), grid.neighbor(base, a, true));
        }
        f(base, &neigh[..last]);
    }
}

/// Sum over axes of `f[i+e_a] + f[i-e_a] - 2 f[i]` for one line, into `out`.
#[inline]
pub(crate) fn second_difference_line(grid: &Grid, src: &[f64], base: usize, neigh: &[(usize, usize)], out: &mut [f64]) {
    let dim = grid.dim();
    let n = grid.resolution(dim - 1);
    let line = &src[base..base + n];
    let centre = -2.0 * dim as f64;
    for j in 0..n {
        out[j] = centre * line[j];
    }
    for &(lo, hi) in neigh {
        let a = &src[lo..lo + n];
        let b = &src[hi..hi + n];
        for j in 0..n {
            out[j] += a[j] + b[j];
        }
    }
    let jl = grid.step_coord(dim - 1, 0, false);
    let jr = grid.step_coord(dim - 1, n - 1, true);
    out[0] += line[jl] + line[1];
    out[n - 1] += line[n - 2] + line[jr];
    for j in 1..n - 1 {
        out[j] += line[j - 1] + line[j + 1];
    }
}

/// Second-order central differences, one component per axis.
pub fn spatial_gradient(f: &ScalarField) -> Vec<ScalarField> {
    let g = f.grid();
    let inv = 0.5 / g.spacing();
    (0..g.dim())
        .map(|a| {
            let v = f.values();
            let vals = (0..g.len())
                .map(|i| (v[g.neighbor(i, a, true)] - v[g.neighbor(i, a, false)]) * inv)
                .collect();
            ScalarField::from_parts(g.clone(), vals)
        })
        .collect()
}

/// One-sided forward differences `(f[i+e_a] - f[i]) / h`.
pub fn forward_gradient(f: &ScalarField) -> Vec<ScalarField> {
    let g = f.grid();
    let inv = 1.0 / g.spacing();
    (0..g.dim())
        .map(|a| {
            let v = f.values();
            let vals = (0..g.len()).map(|i| (v[g.neighbor(i, a, true)] - v[i]) * inv).collect();
            ScalarField::from_parts(g.clone(), vals)
        })
        .collect()
}

/// Backward-difference divergence, the adjoint partner of [`forward_gradient`].
///
/// Fluxes through reflective faces are zero.
pub fn backward_divergence(components: &[ScalarField]) -> Result<ScalarField> {
    let g = components
        .first()
        .ok_or_else(|| Error::Mismatch("empty vector field".into()))?
        .grid()
        .clone();
    if components.len() != g.dim() || components.iter().any(|c| c.grid() != &g) {
        return Err(Error::Mismatch("vector field components disagree with grid".into()));
    }
    let inv = 1.0 / g.spacing();
    let mut out = vec![0.0; g.len()];
    for (a, comp) in components.iter().enumerate() {
        let v = comp.values();
        for (i, o) in out.iter_mut().enumerate() {
            let c = g.coords(i)[a];
            let back = if c == 0 && g.boundary(a) == Boundary::Reflective {
                0.0
            } else {
                v[g.neighbor(i, a, false)]
            };
            let here = if c + 1 == g.resolution(a) && g.boundary(a) == Boundary::Reflective {
                0.0
            } else {
                v[i]
            };
            *o += (here - back) * inv;
        }
    }
    Ok(ScalarField::from_parts(g, out))
}

/// Standard `(2n+1)`-point Laplacian.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let mut out = vec![0.0; g.len()];
    laplacian_into(g, f.values(), &mut out);
    ScalarField::from_parts(g.clone(), out)
}

pub(crate) fn laplacian_into(grid: &Grid, src: &[f64], out: &mut [f64]) {
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let n = grid.resolution(grid.dim() - 1);
    for_each_line(grid, |base, neigh| {
        let dst = &mut out[base..base + n];
        second_difference_line(grid, src, base, neigh, dst);
        for v in dst.iter_mut() {
            *v *= inv_h2;
        }
    });
}

/// Squared gradient per cell from face differences: per axis the mean of the
/// squared forward and backward differences. Summed over the grid this equals
/// the sum of squared face differences, the Dirichlet energy whose gradient
/// flow is the five-point Laplacian.
pub fn face_gradient_sq(f: &ScalarField) -> Vec<f64> {
    let g = f.grid();
    let v = f.values();
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    (0..g.len())
        .map(|i| {
            let mut s = 0.0;
            for a in 0..g.dim() {
                let fwd = v[g.neighbor(i, a, true)] - v[i];
                let bwd = v[i] - v[g.neighbor(i, a, false)];
                s += 0.5 * (fwd * fwd + bwd * bwd);
            }
            s * inv_h2
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    All,
    Ball { center: Point, radius: f64 },
}

/// Midpoint-rule integral `hⁿ Σ f·weight` over the region.
///
/// `weight` is a test function evaluated at time `t`.
pub fn integrate(f: &ScalarField, weight: Option<(&TestFunction, f64)>, region: Region) -> Result<f64> {
    let g = f.grid();
    let v = f.values();
    let h = g.spacing();
    let inside: &dyn Fn(&Point) -> bool = match &region {
        Region::All => &|_| true,
        Region::Ball { center, radius } => {
            if *radius < 2.0 * h {
                return Err(Error::RadiusTooSmall {
                    radius: *radius,
                    min: 2.0 * h,
                });
            }
            let (c, r2) = (*center, radius * radius);
            let dim = g.dim();
            &move |p: &Point| {
                let d2: f64 = (0..dim).map(|a| (p[a] - c[a]) * (p[a] - c[a])).sum();
                d2 <= r2
            }
        }
    };
    let sum = match (weight, region) {
        (None, Region::All) => pairwise_sum(v),
        _ => pairwise_sum_by(v.len(), |i| {
            let p = g.center(i);
            if !inside(&p) {
                return 0.0;
            }
            match weight {
                None => v[i],
                Some((w, t)) => v[i] * w.value(&p, t),
            }
        }),
    };
    Ok(sum * g.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{PI, TAU};

    fn periodic(dim: usize, n: usize) -> Grid {
        Grid::cube(dim, n, 1.0, Boundary::Periodic).unwrap()
    }

    fn reflective(dim: usize, n: usize) -> Grid {
        Grid::cube(dim, n, 1.0, Boundary::Reflective).unwrap()
    }

    fn interior(g: &Grid, i: usize) -> bool {
        let c = g.coords(i);
        (0..g.dim()).all(|a| c[a] > 0 && c[a] + 1 < g.resolution(a))
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        for dim in 1..=3 {
            let f = ScalarField::constant(periodic(dim, 8), 3.25);
            for c in spatial_gradient(&f) {
                assert!(c.values().iter().all(|&v| v == 0.0));
            }
            assert!(laplacian(&f).values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn affine_gradient_exact_in_interior() {
        let g = reflective(2, 16);
        let f = ScalarField::from_fn(g.clone(), |p| 2.5 * p[0] - 0.75 * p[1] + 1.0).unwrap();
        let grad = spatial_gradient(&f);
        for i in (0..g.len()).filter(|&i| interior(&g, i)) {
            assert!((grad[0].values()[i] - 2.5).abs() < 1e-12);
            assert!((grad[1].values()[i] + 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_laplacian_exact_in_interior() {
        for dim in 1..=3 {
            let g = reflective(dim, 12);
            let f = ScalarField::from_fn(g.clone(), |p| p.iter().map(|x| x * x).sum()).unwrap();
            let lap = laplacian(&f);
            for i in (0..g.len()).filter(|&i| interior(&g, i)) {
                assert!((lap.values()[i] - 2.0 * dim as f64).abs() < 1e-9);
            }
        }
    }

    fn max_err(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
        a.iter().enumerate().map(|(i, v)| (v - b(i)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn sine_derivatives_converge_at_second_order() {
        let err = |n: usize| {
            let g = periodic(2, n);
            let f = ScalarField::from_fn(g.clone(), |p| (TAU * p[0]).sin()).unwrap();
            let grad = spatial_gradient(&f);
            let lap = laplacian(&f);
            let eg = max_err(grad[0].values(), |i| TAU * (TAU * g.center(i)[0]).cos());
            let el = max_err(lap.values(), |i| -TAU * TAU * (TAU * g.center(i)[0]).sin());
            (eg, el)
        };
        let (g1, l1) = err(32);
        let (g2, l2) = err(64);
        assert!((g1 / g2 - 4.0).abs() < 0.1, "gradient ratio {}", g1 / g2);
        assert!((l1 / l2 - 4.0).abs() < 0.1, "laplacian ratio {}", l1 / l2);
    }

    #[test]
    fn laplacian_is_divergence_of_forward_gradient() {
        for boundary in [Boundary::Periodic, Boundary::Reflective] {
            let g = Grid::cube(2, 16, 1.0, boundary).unwrap();
            let f = ScalarField::from_fn(g.clone(), |p| (3.0 * p[0]).sin() * (p[1] * 5.0).cos() + p[0] * p[1]).unwrap();
            let lap = laplacian(&f);
            let div = backward_divergence(&forward_gradient(&f)).unwrap();
            for (a, b) in lap.values().iter().zip(div.values()) {
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{boundary:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn face_gradient_total_matches_dirichlet_energy() {
        let g = periodic(2, 16);
        let f = ScalarField::from_fn(g.clone(), |p| (TAU * p[0]).sin() * p[1]).unwrap();
        let lap = laplacian(&f);
        let fg: f64 = face_gradient_sq(&f).iter().sum();
        // summation by parts: Σ|D⁺f|² = -Σ f Δf
        let by_parts: f64 = -f.values().iter().zip(lap.values()).map(|(a, b)| a * b).sum::<f64>();
        assert!((fg - by_parts).abs() < 1e-9 * fg);
    }

    #[test]
    fn integrals() {
        let g = periodic(2, 64);
        let one = ScalarField::constant(g.clone(), 1.0);
        assert!((integrate(&one, None, Region::All).unwrap() - 1.0).abs() < 1e-12);

        let g = periodic(2, 256);
        let one = ScalarField::constant(g.clone(), 1.0);
        let r = 0.3;
        let area = integrate(
            &one,
            None,
            Region::Ball {
                center: [0.5, 0.5, 0.0],
                radius: r,
            },
        )
        .unwrap();
        let rel = (area - PI * r * r).abs() / (PI * r * r);
        assert!(rel < 3.0 * g.spacing() / r, "rel {rel}");

        assert!(matches!(
            integrate(
                &one,
                None,
                Region::Ball {
                    center: [0.5, 0.5, 0.0],
                    radius: g.spacing()
                }
            ),
            Err(Error::RadiusTooSmall { .. })
        ));

        // unit-mass gaussian, sigma 0.05
        let s = 0.05;
        let gauss = ScalarField::from_fn(g, |p| {
            let r2 = (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2);
            (-r2 / (2.0 * s * s)).exp() / (TAU * s * s)
        })
        .unwrap();
        assert!((integrate(&gauss, None, Region::All).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weighted_integral_uses_test_function() {
        let g = periodic(2, 128);
        let one = ScalarField::constant(g, 1.0);
        let tf = TestFunction::new(TestKind::PolynomialBump, 2, [0.5, 0.5, 0.0], 0.25, 2.0);
        // ∫ (1-ρ²)² over the disc of radius R = πR²/3
        let want = 2.0 * PI * 0.25 * 0.25 / 3.0;
        let got = integrate(&one, Some((&tf, 0.0)), Region::All).unwrap();
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn periodic_laplacian_integrates_to_zero() {
        let g = periodic(3, 10);
        let mut seed = 12345u64;
        let f = ScalarField::from_fn(g, |_| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        })
        .unwrap();
        let total = integrate(&laplacian(&f), None, Region::All).unwrap();
        assert!(total.abs() < 1e-10);
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let v: Vec<f64> = (0..10_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum(&v);
        assert_eq!(a.to_bits(), b.to_bits());
        let naive: f64 = v.iter().sum();
        assert!((a - naive).abs() < 1e-12);
    }
}
