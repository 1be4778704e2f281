//! `ACF1` binary field dumps.
//!
//! Layout, all little-endian: magic `ACF1`, `u32` dimension, `u32` per-axis
//! resolution, `f64` per-axis extent, `f64` ε, `f64` time, then the values in
//! row-major order (last axis fastest). The boundary mode is not stored.

use alloc::format;
use alloc::vec::Vec;

use super::{Boundary, Grid, ScalarField, MAX_DIM};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ACF1";

/// Bytes of an encoded field.
pub fn encode(field: &ScalarField, eps: f64, time: f64) -> Vec<u8> {
    let g = field.grid();
    let dim = g.dim();
    let mut out = Vec::with_capacity(4 + 4 + dim * 12 + 16 + g.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for a in 0..dim {
        out.extend_from_slice(&(g.resolution(a) as u32).to_le_bytes());
    }
    for a in 0..dim {
        out.extend_from_slice(&g.extent(a).to_le_bytes());
    }
    out.extend_from_slice(&eps.to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// A decoded dump: the field on a grid with `boundary` on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub field: ScalarField,
    pub eps: f64,
    pub time: f64,
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.at + N;
        let chunk = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| Error::InvalidField(format!("dump truncated at byte {}", self.at)))?;
        self.at = end;
        let mut b = [0u8; N];
        b.copy_from_slice(chunk);
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn decode(bytes: &[u8], boundary: Boundary) -> Result<Dump> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::InvalidField("missing ACF1 magic".into()));
    }
    let dim = r.u32()? as usize;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidField(format!("dump dimension {dim}")));
    }
    let mut res = Vec::with_capacity(dim);
    for _ in 0..dim {
        res.push(r.u32()? as usize);
    }
    let mut ext = Vec::with_capacity(dim);
    for _ in 0..dim {
        ext.push(r.f64()?);
    }
    let eps = r.f64()?;
    let time = r.f64()?;
    let grid = Grid::new(&res, &ext, &alloc::vec![boundary; dim])?;
    let expected = grid.len() * 8;
    let body = &bytes[r.at..];
    if body.len() != expected {
        return Err(Error::InvalidField(format!(
            "dump holds {} value bytes, grid needs {expected}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| {
            let mut b = [0u8; 8];
            b.copy_from_slice(c);
            f64::from_le_bytes(b)
        })
        .collect();
    Ok(Dump {
        field: ScalarField::new(grid, values)?,
        eps,
        time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(&[8, 16], &[0.5, 1.0], &[Boundary::Periodic; 2]).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] - p[1]).unwrap();
        let b = encode(&f, 0.25, 1.5);
        assert_eq!(&b[..4], b"ACF1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 0.25);
        assert_eq!(b.len(), 48 + 128 * 8);
        // second value is the next cell along the last axis
        let second = f64::from_le_bytes(b[56..64].try_into().unwrap());
        assert_eq!(second, f.values()[1]);
        assert_eq!(f.grid().coords(1)[1], 1);
    }

    #[test]
    fn malformed_dumps_are_refused() {
        let g = Grid::cube(1, 8, 1.0, Boundary::Periodic).unwrap();
        let b = encode(&ScalarField::constant(g, 0.5), 0.1, 0.0);
        assert!(decode(&b[..b.len() - 1], Boundary::Periodic).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode(&bad, Boundary::Periodic).is_err());
        assert!(decode(&b[..10], Boundary::Periodic).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            dim in 1usize..=3,
            n in 8usize..12,
            bits in prop::collection::vec(any::<u64>(), 1728),
            eps in any::<f64>(),
            time in any::<f64>(),
        ) {
            let g = Grid::cube(dim, n, 1.0, Boundary::Reflective).unwrap();
            // arbitrary finite bit patterns: clearing the top exponent bit keeps sign and mantissa
            let values: Vec<f64> = bits[..g.len()]
                .iter()
                .map(|b| f64::from_bits(*b))
                .map(|v| if v.is_finite() { v } else { f64::from_bits(v.to_bits() & !(1 << 62)) })
                .collect();
            let f = ScalarField::new(g, values).unwrap();
            let d = decode(&encode(&f, eps, time), Boundary::Reflective).unwrap();
            prop_assert_eq!(d.eps.to_bits(), eps.to_bits());
            prop_assert_eq!(d.time.to_bits(), time.to_bits());
            prop_assert_eq!(d.field.grid(), f.grid());
            for (a, b) in d.field.values().iter().zip(f.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
