use core::f64::consts::PI;

use crate::fields::{Grid, Point, ScalarField, MAX_DIM};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlowKind {
    /// Sphere shrinking by mean curvature until extinction.
    SmoothSphere,
    /// The smooth sphere, deleted at `t_cut`.
    TruncatedSphere { t_cut: f64 },
}

/// Exact mean-curvature flows of round spheres,
/// `radius(t)² = r₀² - 2(n-1)t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceFlow {
    pub kind: FlowKind,
    pub r0: f64,
    pub dim: usize,
    pub center: Point,
}

impl ReferenceFlow {
    pub fn smooth(r0: f64, dim: usize, center: Point) -> Result<Self> {
        Self::new(FlowKind::SmoothSphere, r0, dim, center)
    }

    pub fn truncated(r0: f64, dim: usize, center: Point, t_cut: f64) -> Result<Self> {
        Self::new(FlowKind::TruncatedSphere { t_cut }, r0, dim, center)
    }

    pub fn new(kind: FlowKind, r0: f64, dim: usize, center: Point) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Domain {
                what: "reference flows need dimension 2 or 3",
                value: dim as f64,
            });
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::Domain {
                what: "initial radius",
                value: r0,
            });
        }
        let flow = Self { kind, r0, dim, center };
        if let FlowKind::TruncatedSphere { t_cut } = kind {
            if !(t_cut > 0.0 && t_cut < flow.extinction_time()) {
                return Err(Error::Domain {
                    what: "cut time must precede smooth extinction",
                    value: t_cut,
                });
            }
        }
        Ok(flow)
    }

    /// Extinction time of the smooth sphere.
    pub fn extinction_time(&self) -> f64 {
        self.r0 * self.r0 / (2.0 * (self.dim as f64 - 1.0))
    }

    /// Time after which the set is empty.
    pub fn vanishing_time(&self) -> f64 {
        match self.kind {
            FlowKind::SmoothSphere => self.extinction_time(),
            FlowKind::TruncatedSphere { t_cut } => t_cut,
        }
    }

    /// Radius of `E_t`, 0 once the set is empty.
    pub fn radius(&self, t: f64) -> f64 {
        if t >= self.vanishing_time() {
            return 0.0;
        }
        let r2 = self.r0 * self.r0 - 2.0 * (self.dim as f64 - 1.0) * t;
        if r2 <= 0.0 {
            0.0
        } else {
            libm::sqrt(r2)
        }
    }

    /// Scalar mean curvature `h·ν = -(n-1)/r`, which is also `dr/dt`.
    pub fn normal_speed(&self, t: f64) -> Result<f64> {
        let r = self.radius(t);
        if r <= 0.0 {
            return Err(Error::Extinct {
                time: t,
                extinction: self.vanishing_time(),
            });
        }
        Ok(-(self.dim as f64 - 1.0) / r)
    }

    pub fn contains(&self, p: &Point, t: f64) -> bool {
        let r = self.radius(t);
        if r <= 0.0 {
            return false;
        }
        let d2: f64 = (0..self.dim)
            .map(|a| {
                let d = p[a] - self.center[a];
                d * d
            })
            .sum();
        d2 <= r * r
    }

    /// Cell-centre indicator of `E_t`.
    pub fn indicator(&self, grid: &Grid, t: f64) -> ScalarField {
        let vals = (0..grid.len())
            .map(|i| if self.contains(&grid.center(i), t) { 1.0 } else { 0.0 })
            .collect();
        ScalarField::from_parts(grid.clone(), vals)
    }

    /// `ℒⁿ(E_t)`.
    pub fn volume(&self, t: f64) -> f64 {
        ball_volume(self.dim, self.radius(t))
    }

    /// Volume removed at the cut time (0 for the smooth sphere).
    pub fn jump_volume(&self) -> f64 {
        match self.kind {
            FlowKind::SmoothSphere => 0.0,
            FlowKind::TruncatedSphere { t_cut } => {
                let r2 = self.r0 * self.r0 - 2.0 * (self.dim as f64 - 1.0) * t_cut;
                ball_volume(self.dim, libm::sqrt(r2))
            }
        }
    }

    /// `∫_{E_t} g dx`.
    pub fn interior_integral(&self, t: f64, g: impl FnMut(&Point) -> f64) -> f64 {
        let r = self.radius(t);
        if r <= 0.0 {
            return 0.0;
        }
        ball_integral(self.dim, &self.center, r, g)
    }

    /// `∫_{∂E_t} g dℋ^{n-1}`; `g` receives the point and the outward normal.
    pub fn boundary_integral(&self, t: f64, g: impl FnMut(&Point, &Point) -> f64) -> f64 {
        let r = self.radius(t);
        if r <= 0.0 {
            return 0.0;
        }
        sphere_integral(self.dim, &self.center, r, g)
    }
}

pub fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * r,
        2 => PI * r * r,
        _ => 4.0 / 3.0 * PI * r * r * r,
    }
}

const CIRCLE_NODES: usize = 1440;
const POLAR_NODES: usize = 96;
const AZIMUTH_NODES: usize = 192;

/// Quadrature of `g` over the sphere `∂B_r(c)` in dimension 2 or 3.
pub fn sphere_integral(dim: usize, c: &Point, r: f64, mut g: impl FnMut(&Point, &Point) -> f64) -> f64 {
    let mut s = 0.0;
    sphere_nodes(dim, c, r, |p, n, w| s += w * g(p, n));
    s
}

/// Visits the quadrature nodes of `∂B_r(c)` with point, outward normal and
/// weight; the weights sum to the sphere measure.
pub fn sphere_nodes(dim: usize, c: &Point, r: f64, mut visit: impl FnMut(&Point, &Point, f64)) {
    match dim {
        2 => {
            // trapezoid rule, spectrally accurate for periodic integrands
            let dth = core::f64::consts::TAU / CIRCLE_NODES as f64;
            for k in 0..CIRCLE_NODES {
                let th = (k as f64 + 0.5) * dth;
                let n = [libm::cos(th), libm::sin(th), 0.0];
                let p = [c[0] + r * n[0], c[1] + r * n[1], 0.0];
                visit(&p, &n, r * dth);
            }
        }
        3 => {
            let (nodes, weights) = gauss_legendre(POLAR_NODES);
            let dph = core::f64::consts::TAU / AZIMUTH_NODES as f64;
            for (z, w) in nodes.iter().zip(weights.iter()) {
                let rho = libm::sqrt(1.0 - z * z);
                for k in 0..AZIMUTH_NODES {
                    let ph = (k as f64 + 0.5) * dph;
                    let n = [rho * libm::cos(ph), rho * libm::sin(ph), *z];
                    let p = [c[0] + r * n[0], c[1] + r * n[1], c[2] + r * n[2]];
                    visit(&p, &n, w * dph * r * r);
                }
            }
        }
        _ => {
            for sign in [-1.0, 1.0] {
                visit(&[c[0] + sign * r, 0.0, 0.0], &[sign, 0.0, 0.0], 1.0);
            }
        }
    }
}

const RADIAL_NODES: usize = 48;

/// `∫_{B_r(c)} g dx` as radial Gauss–Legendre over sphere quadratures.
pub fn ball_integral(dim: usize, c: &Point, r: f64, mut g: impl FnMut(&Point) -> f64) -> f64 {
    let (x, w) = gauss_legendre(RADIAL_NODES);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let rho = 0.5 * r * (xi + 1.0);
        s += wi * sphere_integral(dim, c, rho, |p, _| g(p));
    }
    0.5 * r * s
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub(crate) fn gauss_legendre(n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if libm::fabs(dz) < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}
