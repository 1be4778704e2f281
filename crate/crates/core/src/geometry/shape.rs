use alloc::boxed::Box;

use crate::fields::{Point, MAX_DIM};

/// Constructive shape tree. Signed distances are positive inside.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ball {
        center: Point,
        radius: f64,
    },
    /// Everything on the side of the plane through `point` opposite to the
    /// outward `normal`.
    HalfSpace {
        point: Point,
        normal: Point,
    },
    /// Axis-aligned box.
    Cuboid {
        min: Point,
        max: Point,
    },
    Union(Box<Shape>, Box<Shape>),
    Intersection(Box<Shape>, Box<Shape>),
    Complement(Box<Shape>),
}

impl Shape {
    pub fn union(a: Shape, b: Shape) -> Self {
        Shape::Union(Box::new(a), Box::new(b))
    }

    pub fn intersection(a: Shape, b: Shape) -> Self {
        Shape::Intersection(Box::new(a), Box::new(b))
    }

    pub fn complement(a: Shape) -> Self {
        Shape::Complement(Box::new(a))
    }

    /// Untruncated signed distance in the first `dim` coordinates.
    pub fn signed_distance(&self, p: &Point, dim: usize) -> f64 {
        match self {
            Shape::Ball { center, radius } => {
                let mut r2 = 0.0;
                for a in 0..dim {
                    let d = p[a] - center[a];
                    r2 += d * d;
                }
                radius - libm::sqrt(r2)
            }
            Shape::HalfSpace { point, normal } => {
                let mut nn = 0.0;
                let mut s = 0.0;
                for a in 0..dim {
                    nn += normal[a] * normal[a];
                    s += (point[a] - p[a]) * normal[a];
                }
                s / libm::sqrt(nn)
            }
            Shape::Cuboid { min, max } => {
                // exterior distance and (negative) interior depth of the box
                let mut outside = 0.0;
                let mut inside = f64::NEG_INFINITY;
                for a in 0..dim {
                    let c = 0.5 * (min[a] + max[a]);
                    let half = 0.5 * (max[a] - min[a]);
                    let q = libm::fabs(p[a] - c) - half;
                    if q > 0.0 {
                        outside += q * q;
                    }
                    inside = inside.max(q);
                }
                -(libm::sqrt(outside) + inside.min(0.0))
            }
            Shape::Union(a, b) => a.signed_distance(p, dim).max(b.signed_distance(p, dim)),
            Shape::Intersection(a, b) => a.signed_distance(p, dim).min(b.signed_distance(p, dim)),
            Shape::Complement(a) => -a.signed_distance(p, dim),
        }
    }

    /// Visits every binary composite node with its two child distances at `p`.
    pub(crate) fn visit_composites(&self, p: &Point, dim: usize, f: &mut impl FnMut(f64, f64)) {
        match self {
            Shape::Union(a, b) | Shape::Intersection(a, b) => {
                f(a.signed_distance(p, dim), b.signed_distance(p, dim));
                a.visit_composites(p, dim, f);
                b.visit_composites(p, dim, f);
            }
            Shape::Complement(a) => a.visit_composites(p, dim, f),
            _ => {}
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            Shape::Ball { .. } | Shape::HalfSpace { .. } | Shape::Cuboid { .. }
        )
    }
}

/// A shape plus the truncation level of its signed distance.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpec {
    pub root: Shape,
    pub dim: usize,
    /// Distances are smoothly clamped to `[-truncation, truncation]`.
    pub truncation: f64,
}

impl ShapeSpec {
    pub fn new(root: Shape, dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Self {
            root,
            dim,
            truncation: f64::INFINITY,
        }
    }

    pub fn with_truncation(mut self, level: f64) -> Self {
        self.truncation = level;
        self
    }

    pub fn raw_distance(&self, p: &Point) -> f64 {
        self.root.signed_distance(p, self.dim)
    }

    /// Truncated signed distance `d̃`.
    pub fn distance(&self, p: &Point) -> f64 {
        smooth_clamp(self.raw_distance(p), self.truncation)
    }
}

/// C¹ clamp to `[-level, level]`: the identity on `|d| ≤ 0.9 level`,
/// a quadratic blend on `0.9 level ≤ |d| ≤ 1.1 level`, constant beyond.
pub fn smooth_clamp(d: f64, level: f64) -> f64 {
    if !level.is_finite() {
        return d;
    }
    let w = 0.1 * level;
    let a = libm::fabs(d);
    let m = if a <= level - w {
        a
    } else if a >= level + w {
        level
    } else {
        let u = a - (level - w);
        a - u * u / (4.0 * w)
    };
    if d < 0.0 {
        -m
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitive_distances() {
        let ball = Shape::Ball {
            center: [0.5, 0.5, 0.0],
            radius: 0.3,
        };
        assert!((ball.signed_distance(&[0.5, 0.5, 0.0], 2) - 0.3).abs() < 1e-15);
        assert!(ball.signed_distance(&[0.8, 0.5, 0.0], 2).abs() < 1e-15);
        assert!((ball.signed_distance(&[1.0, 0.5, 0.0], 2) + 0.2).abs() < 1e-15);

        let hs = Shape::HalfSpace {
            point: [0.5, 0.0, 0.0],
            normal: [2.0, 0.0, 0.0],
        };
        assert!((hs.signed_distance(&[0.25, 0.9, 0.0], 2) - 0.25).abs() < 1e-15);
        assert!((hs.signed_distance(&[0.75, 0.1, 0.0], 2) + 0.25).abs() < 1e-15);

        let cube = Shape::Cuboid {
            min: [0.2, 0.2, 0.0],
            max: [0.6, 0.8, 0.0],
        };
        assert!((cube.signed_distance(&[0.4, 0.5, 0.0], 2) - 0.2).abs() < 1e-15);
        assert!(cube.signed_distance(&[0.6, 0.5, 0.0], 2).abs() < 1e-15);
        // exterior corner
        let d = cube.signed_distance(&[0.9, 1.2, 0.0], 2);
        assert!((d + (0.09f64 + 0.16).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clamp_bounds_and_identity() {
        let level = 0.2;
        for k in -100..=100 {
            let d = k as f64 * 0.005;
            let c = smooth_clamp(d, level);
            assert!(c.abs() <= level + 1e-15);
            if d.abs() <= 0.9 * level {
                assert_eq!(c, d);
            }
        }
        assert_eq!(smooth_clamp(0.0, level), 0.0);
        // C¹: slope tends to 1 and 0 at the blend edges
        let s = |d: f64| (smooth_clamp(d + 1e-7, level) - smooth_clamp(d - 1e-7, level)) / 2e-7;
        assert!((s(0.18) - 1.0).abs() < 1e-5);
        assert!(s(0.22).abs() < 1e-5);
    }

    fn lipschitz_ok(shape: &Shape, dim: usize, pts: &[(Point, Point)]) -> bool {
        pts.iter().all(|(p, q)| {
            let dist: f64 = (0..dim).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>().sqrt();
            (shape.signed_distance(p, dim) - shape.signed_distance(q, dim)).abs() <= dist * (1.0 + 1e-12) + 1e-15
        })
    }

    proptest! {
        #[test]
        fn primitives_are_one_lipschitz(
            cx in 0.0..1.0f64, cy in 0.0..1.0f64, r in 0.05..0.5f64,
            pts in prop::collection::vec(((0.0..1.0f64, 0.0..1.0f64), (0.0..1.0f64, 0.0..1.0f64)), 32)
        ) {
            let pts: alloc::vec::Vec<(Point, Point)> = pts
                .into_iter()
                .map(|((a, b), (c, d))| ([a, b, 0.0], [c, d, 0.0]))
                .collect();
            let shapes = [
                Shape::Ball { center: [cx, cy, 0.0], radius: r },
                Shape::HalfSpace { point: [cx, cy, 0.0], normal: [r, 1.0 - r, 0.0] },
                Shape::Cuboid { min: [cx - r, cy - r, 0.0], max: [cx + r, cy + 0.5 * r, 0.0] },
            ];
            for s in &shapes {
                prop_assert!(lipschitz_ok(s, 2, &pts));
            }
        }

        #[test]
        fn union_of_disjoint_balls_is_exact_distance(
            a in 0.05..0.15f64, b in 0.05..0.15f64, gap in 0.01..0.3f64,
            px in -0.5..1.5f64, py in -0.5..0.5f64
        ) {
            let c1 = [0.0, 0.0, 0.0];
            let c2 = [a + b + gap, 0.0, 0.0];
            let u = Shape::union(
                Shape::Ball { center: c1, radius: a },
                Shape::Ball { center: c2, radius: b },
            );
            let p = [px, py, 0.0];
            let d = u.signed_distance(&p, 2);
            // brute force: distance to the boundary of the union, sampled
            let n = 20_000;
            let mut best = f64::INFINITY;
            for (c, r) in [(c1, a), (c2, b)] {
                for k in 0..n {
                    let th = k as f64 * core::f64::consts::TAU / n as f64;
                    let q = [c[0] + r * th.cos(), c[1] + r * th.sin()];
                    best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
            }
            let inside = (px - c1[0]).hypot(py) < a || (px - c2[0]).hypot(py) < b;
            let exact = if inside { best } else { -best };
            prop_assert!((d - exact).abs() < 1e-4, "{} vs {}", d, exact);
            // never above the largest leaf value
            let leaves = (a - (px - c1[0]).hypot(py)).max(b - (px - c2[0]).hypot(py));
            prop_assert!(d <= leaves + 1e-15);
        }
    }
}
