//! Explicit integration of `∂_tφ = Δφ − W'(φ)/ε²`.
//!
//! With `dt ≤ min(h²/(4n), ε²/(2 max|W''|))` forward Euler keeps values in
//! `[-1, 1]` and decreases the face-difference energy every step.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fields::{second_difference_line, Grid, ScalarField};
use crate::measures::total_energy;
use crate::potential::{DoubleWell, Potential};
use crate::{Error, Result};

/// Overshoot allowed beyond `[-1, 1]` for a valid phase field.
pub const OVERSHOOT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    ForwardEuler,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ForwardEuler => "forward-euler",
        }
    }
}

/// One time slice of the phase field.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    field: ScalarField,
    eps: f64,
    time: f64,
}

impl PhaseField {
    pub fn new(field: ScalarField, eps: f64, time: f64) -> Result<Self> {
        let h = field.grid().spacing();
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Domain {
                what: "epsilon",
                value: eps,
            });
        }
        if eps < 2.0 * h {
            return Err(Error::UnderResolved { eps, h, ratio: eps / h });
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::Domain {
                what: "time",
                value: time,
            });
        }
        if let Some(v) = field.values().iter().find(|v| v.abs() > 1.0 + OVERSHOOT) {
            return Err(Error::InvalidField(alloc::format!(
                "phase value {v} outside [-1-{OVERSHOOT}, 1+{OVERSHOOT}]"
            )));
        }
        Ok(Self { field, eps, time })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn into_field(self) -> ScalarField {
        self.field
    }
}

/// Largest forward-Euler step keeping the maximum principle and energy decay.
pub fn stable_dt<W: DoubleWell>(pot: &Potential<W>, eps: f64, h: f64, dim: usize, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Domain {
            what: "safety factor must lie in (0, 1]",
            value: safety,
        });
    }
    if !(h > 0.0 && eps.is_finite()) || eps < 2.0 * h {
        return Err(Error::UnderResolved { eps, h, ratio: eps / h });
    }
    let diffusion = h * h / (4.0 * dim as f64);
    let reaction = eps * eps / (2.0 * pot.well().curvature_bound());
    Ok(safety * diffusion.min(reaction))
}

/// Right-hand side `Δ_hφ − W'(φ)/ε²`.
pub fn rate<W: DoubleWell>(f: &PhaseField, pot: &Potential<W>) -> ScalarField {
    let g = f.grid();
    let n = g.resolution(g.dim() - 1);
    let src = f.values();
    let mut out = vec![0.0; g.len()];
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let inv_e2 = 1.0 / (f.eps * f.eps);
    crate::fields::for_each_line(g, |base, neigh| {
        let dst = &mut out[base..base + n];
        second_difference_line(g, src, base, neigh, dst);
        for (j, o) in dst.iter_mut().enumerate() {
            *o = *o * inv_h2 - pot.w_prime(src[base + j]) * inv_e2;
        }
    });
    ScalarField::from_parts(g.clone(), out)
}

#[allow(clippy::too_many_arguments)]
fn update_line<W: DoubleWell>(
    g: &Grid,
    src: &[f64],
    base: usize,
    neigh: &[(usize, usize)],
    dst: &mut [f64],
    dt: f64,
    eps: f64,
    pot: &Potential<W>,
) {
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let inv_e2 = 1.0 / (eps * eps);
    second_difference_line(g, src, base, neigh, dst);
    for (j, o) in dst.iter_mut().enumerate() {
        let v = src[base + j];
        *o = v + dt * (*o * inv_h2 - pot.w_prime(v) * inv_e2);
    }
}

fn advance<W: DoubleWell + Sync>(g: &Grid, src: &[f64], dst: &mut [f64], dt: f64, eps: f64, pot: &Potential<W>) {
    let n = g.resolution(g.dim() - 1);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let last = g.dim() - 1;
        dst.par_chunks_mut(n).enumerate().for_each(|(line, out)| {
            let base = line * n;
            let mut neigh = [(0usize, 0usize); crate::fields::MAX_DIM];
            for a in 0..last {
                neigh[a] = (g.neighbor(base, a, false), g.neighbor(base, a, true));
            }
            update_line(g, src, base, &neigh[..last], out, dt, eps, pot);
        });
    }
    #[cfg(not(feature = "parallel"))]
    crate::fields::for_each_line(g, |base, neigh| {
        update_line(g, src, base, neigh, &mut dst[base..base + n], dt, eps, pot);
    });
}

/// One forward-Euler step.
pub fn step<W: DoubleWell + Sync>(f: &PhaseField, dt: f64, pot: &Potential<W>) -> Result<PhaseField> {
    let g = f.grid();
    let limit = stable_dt(pot, f.eps, g.spacing(), g.dim(), 1.0)?;
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::UnstableStep { dt, limit });
    }
    let mut out = vec![0.0; g.len()];
    advance(g, f.values(), &mut out, dt, f.eps, pot);
    let time = f.time + dt;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { step: 1, time });
    }
    Ok(PhaseField {
        field: ScalarField::from_parts(g.clone(), out),
        eps: f.eps,
        time,
    })
}

/// Ordered snapshots of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrajectory {
    pub snapshots: Vec<PhaseField>,
    pub dt: f64,
    pub scheme: Scheme,
    /// Normalized total energy at each snapshot.
    pub energy_log: Vec<f64>,
    /// Normalized total energy after every step, when requested.
    pub step_energy: Option<Vec<f64>>,
    pub label: String,
}

impl PhaseTrajectory {
    pub fn eps(&self) -> f64 {
        self.snapshots[0].eps
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Snapshot spacing (0 for a single snapshot).
    pub fn cadence(&self) -> f64 {
        if self.snapshots.len() < 2 {
            0.0
        } else {
            self.snapshots[1].time - self.snapshots[0].time
        }
    }

    /// Index of the snapshot at `t` (within a quarter cadence).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 0.25 * self.cadence().max(self.dt);
        self.snapshots
            .iter()
            .position(|s| libm::fabs(s.time - t) <= tol)
            .ok_or(Error::NotSnapshotTime { time: t })
    }
}

/// Evolution settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub snapshot_every: f64,
    pub safety: f64,
    pub record_step_energy: bool,
}

/// Runs from `f0.time()` for `t_end`, storing snapshots on a uniform cadence.
///
/// The snapshot interval is `t_end / round(t_end / snapshot_every)` and the
/// step is the interval divided into the fewest stable sub-steps, so every
/// snapshot time is hit exactly in step counts.
pub fn evolve<W: DoubleWell + Sync>(
    f0: &PhaseField,
    t_end: f64,
    snapshot_every: f64,
    safety: f64,
    pot: &Potential<W>,
) -> Result<PhaseTrajectory> {
    evolve_with(
        f0,
        EvolveOptions {
            t_end,
            snapshot_every,
            safety,
            record_step_energy: false,
        },
        pot,
    )
}

pub fn evolve_with<W: DoubleWell + Sync>(
    f0: &PhaseField,
    opts: EvolveOptions,
    pot: &Potential<W>,
) -> Result<PhaseTrajectory> {
    let g = f0.grid().clone();
    let eps = f0.eps;
    let dt_max = stable_dt(pot, eps, g.spacing(), g.dim(), opts.safety)?;
    let e0 = total_energy(f0.field(), eps, pot);
    let mut traj = PhaseTrajectory {
        snapshots: vec![f0.clone()],
        dt: dt_max,
        scheme: Scheme::ForwardEuler,
        energy_log: vec![e0],
        step_energy: opts.record_step_energy.then(|| vec![e0]),
        label: String::new(),
    };
    if !(opts.t_end.is_finite() && opts.t_end >= 0.0) {
        return Err(Error::Domain {
            what: "end time",
            value: opts.t_end,
        });
    }
    if opts.t_end == 0.0 {
        return Ok(traj);
    }
    if !(opts.snapshot_every >= dt_max && opts.snapshot_every.is_finite()) {
        return Err(Error::Domain {
            what: "snapshot cadence must be at least one stable step",
            value: opts.snapshot_every,
        });
    }
    let n_snap = libm::round(opts.t_end / opts.snapshot_every).max(1.0) as usize;
    let interval = opts.t_end / n_snap as f64;
    let per = libm::ceil(interval / dt_max - 1e-9).max(1.0) as usize;
    let dt = interval / per as f64;
    traj.dt = dt;

    let t0 = f0.time;
    let mut cur = f0.values().to_vec();
    let mut next = vec![0.0; g.len()];
    let mut steps = 0usize;
    for _ in 0..n_snap {
        for _ in 0..per {
            advance(&g, &cur, &mut next, dt, eps, pot);
            core::mem::swap(&mut cur, &mut next);
            steps += 1;
            if let Some(log) = traj.step_energy.as_mut() {
                let field = ScalarField::from_parts(g.clone(), cur.clone());
                log.push(total_energy(&field, eps, pot));
            }
        }
        let time = t0 + steps as f64 * dt;
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: steps, time });
        }
        let snap = PhaseField {
            field: ScalarField::from_parts(g.clone(), cur.clone()),
            eps,
            time,
        };
        traj.energy_log.push(total_energy(snap.field(), eps, pot));
        traj.snapshots.push(snap);
    }
    Ok(traj)
}
