//! Cylinder decompositions and horizontal saddle connections.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::Result;
use crate::origami::Origami;
use crate::sl2z::{act, direction_matrix};

/// A horizontal segment between special vertices, oriented rightward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Segment {
    pub length: usize,
    pub from_vertex: usize,
    pub to_vertex: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cylinder {
    pub width: usize,
    pub height: usize,
    /// The h-cycles of the cylinder from bottom to top, each starting at a
    /// square whose bottom-left corner is special when there is one.
    pub rows: Vec<Vec<usize>>,
    pub bottom: Vec<Segment>,
    pub top: Vec<Segment>,
}

impl Cylinder {
    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CylinderDecomposition {
    pub direction: (i64, i64),
    /// One combinatorial unit along the direction has squared physical length
    /// `(p² + q²)·unit²`.
    #[serde(serialize_with = "crate::export::ser_rational64")]
    pub unit: Rational64,
    pub cylinders: Vec<Cylinder>,
}

impl CylinderDecomposition {
    pub fn physical_scale_sq(&self) -> Rational64 {
        let (p, q) = self.direction;
        Rational64::from_integer(p * p + q * q) * self.unit * self.unit
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.cylinders.iter().map(|c| c.width).collect();
        w.sort_unstable();
        w
    }

    pub fn width_height_multiset(&self) -> Vec<(usize, usize)> {
        let mut w: Vec<(usize, usize)> = self.cylinders.iter().map(|c| (c.width, c.height)).collect();
        w.sort_unstable();
        w
    }
}

fn rotate_to_special(row: &[usize], corner: impl Fn(usize) -> bool) -> Vec<usize> {
    let k = row.iter().position(|&s| corner(s)).unwrap_or(0);
    row[k..].iter().chain(&row[..k]).copied().collect()
}

/// Splits a cyclic sequence of corner vertices at special ones.
fn chain(corners: &[usize], special: &[bool]) -> Vec<Segment> {
    let marks: Vec<usize> = (0..corners.len()).filter(|&i| special[corners[i]]).collect();
    let n = corners.len();
    marks
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let next = marks[(j + 1) % marks.len()];
            let len = if next > i { next - i } else { next + n - i };
            Segment { length: len, from_vertex: corners[i], to_vertex: corners[next] }
        })
        .collect()
}

pub fn horizontal_cylinders(o: &Origami) -> Result<CylinderDecomposition> {
    o.require_connected()?;
    let n = o.n_squares();
    let (h, v) = (o.h(), o.v());
    let vof = o.vertex_of();
    let special = o.special_vertices();
    let rows = h.cycles();
    let mut row_of = vec![0; n];
    for (r, c) in rows.iter().enumerate() {
        for &s in c {
            row_of[s] = r;
        }
    }
    let bottom_special = |r: usize| rows[r].iter().any(|&s| special[vof[s]]);
    let starts: Vec<usize> = (0..rows.len()).filter(|&r| bottom_special(r)).collect();
    let mut cylinders = Vec::new();
    if starts.is_empty() {
        // no special vertex: one cylinder closing up on itself
        let mut stack = vec![rows[0].clone()];
        let mut r = row_of[v.apply(rows[0][0])];
        while r != 0 {
            let below = stack.last().unwrap();
            stack.push(below.iter().map(|&s| v.apply(s)).collect());
            r = row_of[v.apply(rows[r][0])];
        }
        cylinders.push(Cylinder {
            width: rows[0].len(),
            height: stack.len(),
            rows: stack,
            bottom: vec![],
            top: vec![],
        });
    }
    for &r0 in &starts {
        let first = rotate_to_special(&rows[r0], |s| special[vof[s]]);
        let mut stack = vec![first];
        loop {
            let up: Vec<usize> = stack.last().unwrap().iter().map(|&s| v.apply(s)).collect();
            if up.iter().any(|&s| special[vof[s]]) {
                break;
            }
            stack.push(up);
        }
        let bottom_corners: Vec<usize> = stack[0].iter().map(|&s| vof[s]).collect();
        let top_row = stack.last().unwrap();
        // the top row in h-order, read through its upper neighbors
        let top_corners: Vec<usize> = {
            let start = top_row.iter().position(|&s| special[vof[v.apply(s)]]).unwrap_or(0);
            let mut out = Vec::with_capacity(top_row.len());
            let mut s = top_row[start];
            for _ in 0..top_row.len() {
                out.push(vof[v.apply(s)]);
                s = h.apply(s);
            }
            out
        };
        cylinders.push(Cylinder {
            width: stack[0].len(),
            height: stack.len(),
            bottom: chain(&bottom_corners, &special),
            top: chain(&top_corners, &special),
            rows: stack,
        });
    }
    Ok(CylinderDecomposition { direction: (1, 0), unit: o.unit(), cylinders })
}

/// Cylinders in the primitive direction `(p, q)`, computed on the image of
/// `o` under a matrix taking `(p, q)` to `(1, 0)`.
pub fn direction_cylinders(o: &Origami, p: i64, q: i64) -> Result<CylinderDecomposition> {
    let m = direction_matrix(p, q)?;
    let mut dec = horizontal_cylinders(&act(o, &m)?)?;
    dec.direction = (p, q);
    Ok(dec)
}

/// Horizontal saddle connections (segments between consecutive special
/// vertices along the top boundaries of horizontal cylinders), oriented
/// rightward. Vertex ids refer to `o`.
pub fn horizontal_saddle_connections(o: &Origami) -> Result<Vec<Segment>> {
    let dec = horizontal_cylinders(o)?;
    Ok(dec.cylinders.into_iter().flat_map(|c| c.top).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_is_one_cylinder() {
        let d = horizontal_cylinders(&Origami::torus()).unwrap();
        assert_eq!(d.width_height_multiset(), vec![(1, 1)]);
        assert!(horizontal_saddle_connections(&Origami::torus()).unwrap().is_empty());
        for (p, q) in [(1, 1), (2, 1)] {
            let d = direction_cylinders(&Origami::torus(), p, q).unwrap();
            assert_eq!(d.widths(), vec![1]);
            assert_eq!(d.physical_scale_sq(), Rational64::from_integer(p * p + q * q));
        }
    }

    #[test]
    fn l_shape_cylinders_and_saddles() {
        // one row of width 3; the vertical direction has cylinders of widths 1 and 2
        let l = Origami::from_cycles(3, "(0,1,2)", "(1,2)").unwrap();
        let d = horizontal_cylinders(&l).unwrap();
        assert_eq!(d.width_height_multiset(), vec![(3, 1)]);
        let vert = direction_cylinders(&l, 0, 1).unwrap();
        assert_eq!(vert.width_height_multiset(), vec![(1, 1), (2, 1)]);
        let rotated = horizontal_cylinders(&crate::sl2z::act_s(&l)).unwrap();
        assert_eq!(vert.width_height_multiset(), rotated.width_height_multiset());
        // a single vertex: every corner on a boundary is the zero
        let sc = horizontal_saddle_connections(&l).unwrap();
        assert_eq!(sc.len(), 3);
        assert!(sc.iter().all(|s| s.length == 1 && s.from_vertex == 0 && s.to_vertex == 0));
    }

    #[test]
    fn one_marked_vertex() {
        let t = Origami::torus().with_marks(vec![(0, 0)]).unwrap();
        let sc = horizontal_saddle_connections(&t).unwrap();
        assert_eq!(sc, vec![Segment { length: 1, from_vertex: 0, to_vertex: 0 }]);
    }

    #[test]
    fn marked_torus_rows() {
        let n = 4;
        // mark on the bottom leaf: one cylinder; otherwise two
        let on = horizontal_cylinders(&Origami::marked_torus(n, 1, 0).unwrap()).unwrap();
        assert_eq!(on.cylinders.len(), 1);
        let off = horizontal_cylinders(&Origami::marked_torus(n, 1, 1).unwrap()).unwrap();
        assert_eq!(off.width_height_multiset(), vec![(4, 1), (4, 3)]);
        for c in &off.cylinders {
            assert_eq!(c.top.iter().map(|s| s.length).sum::<usize>(), c.width);
            assert_eq!(c.bottom.iter().map(|s| s.length).sum::<usize>(), c.width);
        }
    }
}
