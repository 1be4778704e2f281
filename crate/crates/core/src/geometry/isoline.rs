//! Length/area of the zero level set of a cell-centred field.
//!
//! The level set is reconstructed on the dual grid whose vertices are cell
//! centres: zero crossings in 1-D, marching squares in 2-D and marching
//! tetrahedra (six per cube, sharing the main diagonal) in 3-D. Reflective
//! faces contribute through mirrored half-width dual cells.

use alloc::vec::Vec;

use crate::fields::{Boundary, ScalarField, MAX_DIM};

/// Dual interval along one axis: the two cell coordinates at its ends and
/// the fraction of it lying inside the domain.
#[derive(Clone, Copy)]
struct Span {
    lo: usize,
    hi: usize,
    weight: f64,
}

fn spans(n: usize, boundary: Boundary) -> Vec<Span> {
    match boundary {
        Boundary::Periodic => (0..n)
            .map(|j| Span {
                lo: j,
                hi: (j + 1) % n,
                weight: 1.0,
            })
            .collect(),
        Boundary::Reflective => {
            let mut v = Vec::with_capacity(n + 1);
            v.push(Span {
                lo: 0,
                hi: 0,
                weight: 0.5,
            });
            for j in 0..n - 1 {
                v.push(Span {
                    lo: j,
                    hi: j + 1,
                    weight: 1.0,
                });
            }
            v.push(Span {
                lo: n - 1,
                hi: n - 1,
                weight: 0.5,
            });
            v
        }
    }
}

/// `ℋ^{n-1}` of `{f = 0}`; "inside" means `f ≥ 0`.
pub fn level_set_measure(f: &ScalarField) -> f64 {
    let g = f.grid();
    let dim = g.dim();
    let h = g.spacing();
    let per_axis: Vec<Vec<Span>> = (0..dim).map(|a| spans(g.resolution(a), g.boundary(a))).collect();
    let v = f.values();
    let mut total = 0.0;
    match dim {
        1 => {
            for s in &per_axis[0] {
                let (a, b) = (v[s.lo], v[s.hi]);
                if (a >= 0.0) != (b >= 0.0) {
                    total += s.weight;
                }
            }
        }
        2 => {
            let mut parts = Vec::with_capacity(per_axis[1].len());
            for sx in &per_axis[0] {
                parts.clear();
                for sy in &per_axis[1] {
                    let at = |i: usize, j: usize| v[g.index([i, j, 0])];
                    let c = [at(sx.lo, sy.lo), at(sx.hi, sy.lo), at(sx.hi, sy.hi), at(sx.lo, sy.hi)];
                    parts.push(square_length(&c) * sx.weight * sy.weight);
                }
                total += crate::fields::pairwise_sum(&parts);
            }
            total *= h;
        }
        _ => {
            let mut parts = Vec::with_capacity(per_axis[2].len());
            for sx in &per_axis[0] {
                for sy in &per_axis[1] {
                    parts.clear();
                    for sz in &per_axis[2] {
                        let mut c = [0.0; 8];
                        for (k, ck) in c.iter_mut().enumerate() {
                            let i = if k & 1 == 0 { sx.lo } else { sx.hi };
                            let j = if k & 2 == 0 { sy.lo } else { sy.hi };
                            let l = if k & 4 == 0 { sz.lo } else { sz.hi };
                            *ck = v[g.index([i, j, l])];
                        }
                        parts.push(cube_area(&c) * sx.weight * sy.weight * sz.weight);
                    }
                    total += crate::fields::pairwise_sum(&parts);
                }
            }
            total *= h * h;
        }
    }
    total
}

#[inline]
fn crossing(a: f64, b: f64) -> f64 {
    a / (a - b)
}

/// Zero-isoline length inside the unit square with corner values
/// counter-clockwise from the origin.
fn square_length(c: &[f64; 4]) -> f64 {
    let inside = [c[0] >= 0.0, c[1] >= 0.0, c[2] >= 0.0, c[3] >= 0.0];
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    // edge k joins corner k and corner k+1
    let mut pts: [Option<[f64; 2]>; 4] = [None; 4];
    let mut count = 0;
    for k in 0..4 {
        let m = (k + 1) % 4;
        if inside[k] != inside[m] {
            let s = crossing(c[k], c[m]);
            let (p, q) = (corners[k], corners[m]);
            pts[k] = Some([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            count += 1;
        }
    }
    let seg = |a: [f64; 2], b: [f64; 2]| libm::hypot(a[0] - b[0], a[1] - b[1]);
    match count {
        2 => {
            let mut it = pts.iter().flatten();
            let a = *it.next().unwrap();
            let b = *it.next().unwrap();
            seg(a, b)
        }
        4 => {
            // saddle: cut off the corners whose sign differs from the centre
            let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]) >= 0.0;
            let mut len = 0.0;
            for k in 0..4 {
                if inside[k] != centre {
                    let before = pts[(k + 3) % 4].unwrap();
                    let after = pts[k].unwrap();
                    len += seg(before, after);
                }
            }
            len
        }
        _ => 0.0,
    }
}

// Six tetrahedra around the diagonal 0-7; vertex k of the unit cube sits at
// (k & 1, (k >> 1) & 1, (k >> 2) & 1).
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

fn vertex(k: usize) -> [f64; 3] {
    [(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64]
}

fn cube_area(c: &[f64; 8]) -> f64 {
    let mut area = 0.0;
    for tet in &TETS {
        area += tet_area(
            &[vertex(tet[0]), vertex(tet[1]), vertex(tet[2]), vertex(tet[3])],
            &[c[tet[0]], c[tet[1]], c[tet[2]], c[tet[3]]],
        );
    }
    area
}

fn edge_point(p: &[f64; 3], q: &[f64; 3], a: f64, b: f64) -> [f64; 3] {
    let s = crossing(a, b);
    [
        p[0] + s * (q[0] - p[0]),
        p[1] + s * (q[1] - p[1]),
        p[2] + s * (q[2] - p[2]),
    ]
}

fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
}

fn tet_area(p: &[[f64; 3]; 4], v: &[f64; 4]) -> f64 {
    let mut ins = [0usize; MAX_DIM + 1];
    let mut outs = [0usize; MAX_DIM + 1];
    let (mut ni, mut no) = (0, 0);
    for k in 0..4 {
        if v[k] >= 0.0 {
            ins[ni] = k;
            ni += 1;
        } else {
            outs[no] = k;
            no += 1;
        }
    }
    let e = |i: usize, j: usize| edge_point(&p[i], &p[j], v[i], v[j]);
    match (ni, no) {
        (1, 3) => {
            let a = ins[0];
            triangle_area(&e(a, outs[0]), &e(a, outs[1]), &e(a, outs[2]))
        }
        (3, 1) => {
            let a = outs[0];
            triangle_area(&e(a, ins[0]), &e(a, ins[1]), &e(a, ins[2]))
        }
        (2, 2) => {
            let (a, b, c, d) = (ins[0], ins[1], outs[0], outs[1]);
            // cyclic order around the quad: ac, ad, bd, bc
            let (q0, q1, q2, q3) = (e(a, c), e(a, d), e(b, d), e(b, c));
            triangle_area(&q0, &q1, &q2) + triangle_area(&q0, &q2, &q3)
        }
        _ => 0.0,
    }
}
