use super::grid::{Point, MAX_DIM};

/// Spatial shape of a test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestKind {
    /// `exp(-4ρ²)(1 - ρ²)²` with `ρ = |x - c| / radius`.
    GaussianBump,
    /// `(1 - ρ²)²`.
    PolynomialBump,
    /// 1 on the ball of `radius`, C¹ smoothstep down to 0 over `ramp`.
    ConstantOnWindow { ramp: f64 },
}

/// Time factor: 1 on `[start, end]`, C¹ smoothstep ramps of width `ramp`
/// outside, 0 beyond them. A zero ramp gives a hard window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    pub ramp: f64,
}

impl TimeWindow {
    fn factor(&self, t: f64) -> (f64, f64) {
        if t >= self.start && t <= self.end {
            return (1.0, 0.0);
        }
        if self.ramp <= 0.0 {
            return (0.0, 0.0);
        }
        if t < self.start {
            let u = 1.0 - (self.start - t) / self.ramp;
            if u <= 0.0 {
                (0.0, 0.0)
            } else {
                (smoothstep(u), smoothstep_slope(u) / self.ramp)
            }
        } else {
            let u = 1.0 - (t - self.end) / self.ramp;
            if u <= 0.0 {
                (0.0, 0.0)
            } else {
                (smoothstep(u), -smoothstep_slope(u) / self.ramp)
            }
        }
    }
}

#[inline]
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

#[inline]
fn smoothstep_slope(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    6.0 * u * (1.0 - u)
}

/// Compactly supported, continuously differentiable space-time test function
/// with analytic value, spatial gradient and time derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub kind: TestKind,
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
    /// `None` means constant in time.
    pub window: Option<TimeWindow>,
    pub dim: usize,
}

const GAUSS_RATE: f64 = 4.0;

impl TestFunction {
    pub fn new(kind: TestKind, dim: usize, center: Point, radius: f64, amplitude: f64) -> Self {
        Self {
            kind,
            center,
            radius,
            amplitude,
            window: None,
            dim,
        }
    }

    pub fn with_window(mut self, window: TimeWindow) -> Self {
        self.window = Some(window);
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.amplitude *= factor;
        t
    }

    /// Radius of the closed ball outside which the function vanishes.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            TestKind::ConstantOnWindow { ramp } => self.radius + ramp,
            _ => self.radius,
        }
    }

    /// `‖φ‖_{C⁰}`: the spatial profiles and the time factor peak at 1.
    pub fn sup_norm(&self) -> f64 {
        libm::fabs(self.amplitude)
    }

    fn offset(&self, x: &Point) -> ([f64; MAX_DIM], f64) {
        let mut d = [0.0; MAX_DIM];
        let mut r2 = 0.0;
        for a in 0..self.dim {
            d[a] = x[a] - self.center[a];
            r2 += d[a] * d[a];
        }
        (d, r2)
    }

    /// Spatial profile and `dprofile/d(r²)` (or `/dr` divided by r for the plateau).
    fn spatial(&self, r2: f64) -> (f64, f64) {
        let big2 = self.radius * self.radius;
        match self.kind {
            TestKind::PolynomialBump => {
                let s = r2 / big2;
                if s >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - s;
                (q * q, -2.0 * q / big2)
            }
            TestKind::GaussianBump => {
                let s = r2 / big2;
                if s >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - s;
                let g = libm::exp(-GAUSS_RATE * s);
                let val = g * q * q;
                let ds = -g * q * (GAUSS_RATE * q + 2.0);
                (val, ds / big2)
            }
            TestKind::ConstantOnWindow { ramp } => {
                let r = libm::sqrt(r2);
                if r <= self.radius {
                    return (1.0, 0.0);
                }
                if ramp <= 0.0 || r >= self.radius + ramp {
                    return (0.0, 0.0);
                }
                let u = 1.0 - (r - self.radius) / ramp;
                // d/dr = smoothstep'(u) * (-1/ramp); d/d(r²) = d/dr / (2r)
                (smoothstep(u), -smoothstep_slope(u) / ramp / (2.0 * r))
            }
        }
    }

    fn time(&self, t: f64) -> (f64, f64) {
        match &self.window {
            None => (1.0, 0.0),
            Some(w) => w.factor(t),
        }
    }

    pub fn value(&self, x: &Point, t: f64) -> f64 {
        let (_, r2) = self.offset(x);
        let (s, _) = self.spatial(r2);
        if s == 0.0 {
            return 0.0;
        }
        self.amplitude * s * self.time(t).0
    }

    pub fn gradient(&self, x: &Point, t: f64) -> Point {
        let (d, r2) = self.offset(x);
        let (_, dr2) = self.spatial(r2);
        let mut g = [0.0; MAX_DIM];
        if dr2 == 0.0 {
            return g;
        }
        let scale = self.amplitude * self.time(t).0 * 2.0 * dr2;
        for a in 0..self.dim {
            g[a] = scale * d[a];
        }
        g
    }

    pub fn time_derivative(&self, x: &Point, t: f64) -> f64 {
        let (_, r2) = self.offset(x);
        let (s, _) = self.spatial(r2);
        if s == 0.0 {
            return 0.0;
        }
        self.amplitude * s * self.time(t).1
    }

    /// Value, gradient and time derivative in one evaluation.
    pub fn eval(&self, x: &Point, t: f64) -> (f64, Point, f64) {
        let (d, r2) = self.offset(x);
        let (s, dr2) = self.spatial(r2);
        let mut g = [0.0; MAX_DIM];
        if s == 0.0 && dr2 == 0.0 {
            return (0.0, g, 0.0);
        }
        let (tau, dtau) = self.time(t);
        let scale = self.amplitude * tau * 2.0 * dr2;
        for a in 0..self.dim {
            g[a] = scale * d[a];
        }
        (self.amplitude * s * tau, g, self.amplitude * s * dtau)
    }
}
