//! Double-well potential, optimal transition profile and surface energy.

use crate::{Error, Result};

/// A double-well potential with minima at -1 and +1.
///
/// Implementors supply `W`, `W'`, a bound on `|W''|` over `[-1, 1]` (used by
/// the explicit stability limit) and the heteroclinic profile solving
/// `Ψ' = sqrt(2 W(Ψ))`, `Ψ(0) = 0`.
pub trait DoubleWell {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
    /// Upper bound of `|W''|` on `[-1, 1]`.
    fn curvature_bound(&self) -> f64;
    fn profile(&self, r: f64) -> f64;

    fn sqrt_2w(&self, s: f64) -> f64 {
        libm::sqrt(2.0 * self.value(s))
    }
}

/// `W(s) = (1 - s²)² / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quartic;

impl DoubleWell for Quartic {
    #[inline]
    fn value(&self, s: f64) -> f64 {
        let a = 1.0 - s * s;
        0.5 * a * a
    }

    #[inline]
    fn derivative(&self, s: f64) -> f64 {
        -2.0 * s * (1.0 - s * s)
    }

    fn curvature_bound(&self) -> f64 {
        // W''(s) = 6s² - 2 ranges over [-2, 4] on [-1, 1].
        4.0
    }

    #[inline]
    fn profile(&self, r: f64) -> f64 {
        libm::tanh(r)
    }

    #[inline]
    fn sqrt_2w(&self, s: f64) -> f64 {
        libm::fabs(1.0 - s * s)
    }
}

pub const DEFAULT_PANELS: usize = 1024;

// 4-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// A double well together with its surface-energy constant
/// `σ = ∫_{-1}^{1} sqrt(2W)`, computed once by composite Gauss–Legendre
/// quadrature.
#[derive(Clone, Debug)]
pub struct Potential<W: DoubleWell = Quartic> {
    well: W,
    panels: usize,
    sigma: f64,
}

impl Potential<Quartic> {
    pub fn standard() -> Self {
        Self::new(Quartic, DEFAULT_PANELS).expect("default panel count is positive")
    }
}

impl Default for Potential<Quartic> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<W: DoubleWell> Potential<W> {
    pub fn new(well: W, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Domain {
                what: "quadrature panel count",
                value: 0.0,
            });
        }
        let mut pot = Self {
            well,
            panels,
            sigma: 0.0,
        };
        pot.sigma = pot.primitive_unchecked(1.0);
        Ok(pot)
    }

    pub fn well(&self) -> &W {
        &self.well
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Surface energy per unit interface area.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval_w(&self, s: f64) -> Result<f64> {
        finite("W", s)?;
        Ok(self.well.value(s))
    }

    pub fn eval_w_prime(&self, s: f64) -> Result<f64> {
        finite("W'", s)?;
        Ok(self.well.derivative(s))
    }

    pub fn profile_psi(&self, r: f64) -> Result<f64> {
        finite("profile", r)?;
        Ok(self.well.profile(r))
    }

    /// Returns `(σ, w(r))` with `w(r) = ∫_{-1}^{r} sqrt(2W)`.
    pub fn sigma_and_w(&self, r: f64) -> Result<(f64, f64)> {
        if !r.is_finite() || !(-1.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                what: "w(r) requires r in [-1, 1]",
                value: r,
            });
        }
        Ok((self.sigma, self.primitive_unchecked(r)))
    }

    #[inline]
    pub fn w(&self, s: f64) -> f64 {
        self.well.value(s)
    }

    #[inline]
    pub fn w_prime(&self, s: f64) -> f64 {
        self.well.derivative(s)
    }

    #[inline]
    pub fn sqrt_2w(&self, s: f64) -> f64 {
        self.well.sqrt_2w(s)
    }

    #[inline]
    pub fn psi(&self, r: f64) -> f64 {
        self.well.profile(r)
    }

    fn primitive_unchecked(&self, r: f64) -> f64 {
        let a = -1.0;
        if r <= a {
            return 0.0;
        }
        let width = (r - a) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let mid = a + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            let mut panel = 0.0;
            for (x, wgt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                panel += wgt * self.well.sqrt_2w(mid + half * x);
            }
            total += panel * half;
        }
        total
    }
}

fn finite(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value: v })
    }
}
