use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A point in the ambient space. Components beyond the grid dimension are 0.
pub type Point = [f64; MAX_DIM];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Mirror ghost cells (homogeneous Neumann for cell-centred data).
    Reflective,
}

/// Isotropic, cell-centred uniform grid on `[0, extent_0] × … × [0, extent_{n-1}]`.
///
/// Values are stored row-major: axis 0 is the slowest, the last axis is
/// contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    resolution: [usize; MAX_DIM],
    extent: [f64; MAX_DIM],
    boundary: [Boundary; MAX_DIM],
    strides: [usize; MAX_DIM],
    spacing: f64,
    len: usize,
}

pub const MIN_RESOLUTION: usize = 8;

impl Grid {
    pub fn new(resolution: &[usize], extent: &[f64], boundary: &[Boundary]) -> Result<Self> {
        let dim = resolution.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if extent.len() != dim || boundary.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} extents and boundaries, got {} and {}",
                extent.len(),
                boundary.len()
            )));
        }
        let mut res = [1; MAX_DIM];
        let mut ext = [0.0; MAX_DIM];
        let mut bnd = [Boundary::Periodic; MAX_DIM];
        for a in 0..dim {
            if resolution[a] < MIN_RESOLUTION {
                return Err(Error::InvalidGrid(format!(
                    "resolution {} on axis {a} is below {MIN_RESOLUTION}",
                    resolution[a]
                )));
            }
            if !(extent[a].is_finite() && extent[a] > 0.0) {
                return Err(Error::InvalidGrid(format!("extent {} on axis {a}", extent[a])));
            }
            res[a] = resolution[a];
            ext[a] = extent[a];
            bnd[a] = boundary[a];
        }
        let spacing = ext[0] / res[0] as f64;
        for a in 1..dim {
            let h = ext[a] / res[a] as f64;
            if (h - spacing).abs() > 1e-12 * spacing {
                return Err(Error::InvalidGrid(format!(
                    "anisotropic spacing: axis 0 has {spacing}, axis {a} has {h}"
                )));
            }
        }
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for a in (0..dim).rev() {
            strides[a] = s;
            s *= res[a];
        }
        Ok(Self {
            dim,
            resolution: res,
            extent: ext,
            boundary: bnd,
            strides,
            spacing,
            len: s,
        })
    }

    /// `n` cells of width `extent / n` along every one of `dim` axes.
    pub fn cube(dim: usize, n: usize, extent: f64, boundary: Boundary) -> Result<Self> {
        let res: Vec<usize> = (0..dim).map(|_| n).collect();
        let ext: Vec<f64> = (0..dim).map(|_| extent).collect();
        let bnd: Vec<Boundary> = (0..dim).map(|_| boundary).collect();
        Self::new(&res, &ext, &bnd)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing, self.dim as f64)
    }

    pub fn resolution(&self, axis: usize) -> usize {
        self.resolution[axis]
    }

    pub fn resolutions(&self) -> &[usize] {
        &self.resolution[..self.dim]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn extents(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn boundary(&self, axis: usize) -> Boundary {
        self.boundary[axis]
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundary[..self.dim]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index(&self, coords: [usize; MAX_DIM]) -> usize {
        (0..self.dim).map(|a| coords[a] * self.strides[a]).sum()
    }

    pub fn coords(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut c = [0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        c
    }

    pub fn center(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = (c[a] as f64 + 0.5) * self.spacing;
        }
        p
    }

    /// Neighbouring coordinate along `axis` honouring the boundary rule.
    #[inline]
    pub fn step_coord(&self, axis: usize, i: usize, forward: bool) -> usize {
        let n = self.resolution[axis];
        match (forward, self.boundary[axis]) {
            (true, _) if i + 1 < n => i + 1,
            (true, Boundary::Periodic) => 0,
            (true, Boundary::Reflective) => i,
            (false, _) if i > 0 => i - 1,
            (false, Boundary::Periodic) => n - 1,
            (false, Boundary::Reflective) => i,
        }
    }

    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let s = self.strides[axis];
        let i = (idx / s) % self.resolution[axis];
        let j = self.step_coord(axis, i, forward);
        idx + j * s - i * s
    }

    /// Whether the closed ball lies inside the box `[0, extent]^n`.
    pub fn contains_ball(&self, center: &Point, radius: f64) -> bool {
        (0..self.dim).all(|a| center[a] - radius >= 0.0 && center[a] + radius <= self.extent[a])
    }

    /// Distance from `p` to the nearest box face whose axis satisfies `pred`.
    pub fn face_distance(&self, p: &Point, mut pred: impl FnMut(usize) -> bool) -> f64 {
        let mut d = f64::INFINITY;
        for a in 0..self.dim {
            if pred(a) {
                d = d.min(p[a]).min(self.extent[a] - p[a]);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::cube(2, 4, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::cube(4, 16, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::new(&[16, 32], &[1.0, 1.0], &[Boundary::Periodic; 2]).is_err());
        assert!(Grid::new(&[16, 32], &[1.0, 2.0], &[Boundary::Periodic; 2]).is_ok());
        assert!(Grid::new(&[16], &[0.0], &[Boundary::Periodic]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(&[8, 10, 12], &[0.8, 1.0, 1.2], &[Boundary::Periodic; 3]).unwrap();
        assert_eq!(g.len(), 960);
        for idx in [0, 1, 13, 500, 959] {
            assert_eq!(g.index(g.coords(idx)), idx);
        }
        assert_eq!(g.stride(2), 1);
        assert_eq!(g.stride(0), 120);
    }

    #[test]
    fn neighbours_wrap_or_mirror() {
        let p = Grid::cube(1, 8, 1.0, Boundary::Periodic).unwrap();
        assert_eq!(p.neighbor(0, 0, false), 7);
        assert_eq!(p.neighbor(7, 0, true), 0);
        let r = Grid::cube(1, 8, 1.0, Boundary::Reflective).unwrap();
        assert_eq!(r.neighbor(0, 0, false), 0);
        assert_eq!(r.neighbor(7, 0, true), 7);
        assert_eq!(r.neighbor(3, 0, true), 4);
    }
}
