//! The SL(2,Z) action on origamis, orbit enumeration, and the `-id` involution.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::origami::Origami;
use crate::perm::Perm;

pub const DEFAULT_ORBIT_CAP: usize = 10_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MatrixSL2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

/// A generator power: `T^k` (horizontal shear) or `S^k` (rotation by `kπ/2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Letter {
    T(i64),
    S(u8),
}

impl MatrixSL2Z {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return domain(format!("determinant of [[{a},{b}],[{c},{d}]] is not 1"));
        }
        Ok(MatrixSL2Z { a, b, c, d })
    }

    pub const IDENTITY: MatrixSL2Z = MatrixSL2Z { a: 1, b: 0, c: 0, d: 1 };
    pub const T: MatrixSL2Z = MatrixSL2Z { a: 1, b: 1, c: 0, d: 1 };
    pub const S: MatrixSL2Z = MatrixSL2Z { a: 0, b: -1, c: 1, d: 0 };

    pub fn t_pow(k: i64) -> Self {
        MatrixSL2Z { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn mul(&self, o: &MatrixSL2Z) -> MatrixSL2Z {
        MatrixSL2Z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> MatrixSL2Z {
        MatrixSL2Z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn apply(&self, x: i64, y: i64) -> (i64, i64) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    /// Word in `T` and `S` whose product (left to right) is this matrix.
    pub fn word(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        let mut r = *self;
        loop {
            if r.c == 0 {
                // r = ±T^k
                if r.a == 1 {
                    if r.b != 0 {
                        out.push(Letter::T(r.b));
                    }
                } else {
                    out.push(Letter::S(2));
                    if r.b != 0 {
                        out.push(Letter::T(-r.b));
                    }
                }
                return out;
            }
            let k = floor_div(r.a, r.c);
            if k != 0 {
                out.push(Letter::T(k));
            }
            out.push(Letter::S(1));
            // r = T^k S r'  with  r' = S^{-1} T^{-k} r
            let s_inv = MatrixSL2Z { a: 0, b: 1, c: -1, d: 0 };
            r = s_inv.mul(&MatrixSL2Z::t_pow(-k).mul(&r));
        }
    }

    pub fn from_word(word: &[Letter]) -> MatrixSL2Z {
        word.iter().fold(MatrixSL2Z::IDENTITY, |m, l| match *l {
            Letter::T(k) => m.mul(&MatrixSL2Z::t_pow(k)),
            Letter::S(k) => (0..k).fold(m, |m, _| m.mul(&MatrixSL2Z::S)),
        })
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

impl fmt::Debug for MatrixSL2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Extended Euclid: `(g, x, y)` with `x·p + y·q = g = gcd(p, q) >= 0`.
pub fn ext_gcd(p: i64, q: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (p, q);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let k = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - k * r1);
        (x0, x1) = (x1, x0 - k * x1);
        (y0, y1) = (y1, y0 - k * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// A matrix `m` with `m·(p, q)ᵀ = (1, 0)ᵀ`.
pub fn direction_matrix(p: i64, q: i64) -> Result<MatrixSL2Z> {
    let (g, x, y) = ext_gcd(p, q);
    if g != 1 {
        return domain(format!("direction ({p},{q}) is not primitive"));
    }
    MatrixSL2Z::new(x, y, -q, p)
}

fn act_letter(o: &Origami, l: Letter) -> Origami {
    let (h, v) = (o.h(), o.v());
    match l {
        Letter::T(k) => Origami::from_parts(h.clone(), v.compose(&h.pow(-k)), o.unit(), o.marks().to_vec()),
        Letter::S(k) => {
            let mut cur = o.clone();
            for _ in 0..k % 4 {
                let vi = cur.v().inverse();
                let marks = cur.marks().iter().map(|&(lab, s)| (lab, vi.apply(s))).collect();
                cur = Origami::from_parts(vi, cur.h().clone(), cur.unit(), marks);
            }
            cur
        }
    }
}

/// Image of `o` under `m`; the rightmost letter of the word acts first.
pub fn act(o: &Origami, m: &MatrixSL2Z) -> Result<Origami> {
    o.require_connected()?;
    Ok(m.word().iter().rev().fold(o.clone(), |cur, &l| act_letter(&cur, l)))
}

pub fn act_t(o: &Origami) -> Origami {
    act_letter(o, Letter::T(1))
}

pub fn act_s(o: &Origami) -> Origami {
    act_letter(o, Letter::S(1))
}

#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub base: Origami,
    /// Canonical forms; `elements[0]` is the base.
    pub elements: Vec<Origami>,
    /// `edges[i] = [index of T·e_i, index of S·e_i]`.
    pub edges: Vec<[usize; 2]>,
    pub stabilizer_index: usize,
    pub minus_id_in_stabilizer: bool,
    pub complete: bool,
}

/// Breadth-first orbit under `T` and `S`, deduplicated by canonical form.
/// Returns a resource error if the orbit exceeds `cap`.
pub fn orbit(o: &Origami, cap: usize) -> Result<OrbitRecord> {
    let rec = orbit_partial(o, cap)?;
    if !rec.complete {
        return Err(Error::Resource { what: "SL(2,Z) orbit".into(), cap });
    }
    Ok(rec)
}

/// Like [`orbit`] but returns the explored part with `complete = false` when
/// the cap is hit.
pub fn orbit_partial(o: &Origami, cap: usize) -> Result<OrbitRecord> {
    let base = o.canonical_form()?;
    let mut index: HashMap<Origami, usize> = HashMap::new();
    index.insert(base.clone(), 0);
    let mut elements = vec![base.clone()];
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut frontier = vec![0usize];
    let mut complete = true;
    while !frontier.is_empty() {
        let images: Vec<[Origami; 2]> = frontier
            .par_iter()
            .map(|&i| {
                let e = &elements[i];
                Ok([act_t(e).canonical_form()?, act_s(e).canonical_form()?])
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (&i, imgs) in frontier.iter().zip(images) {
            let mut row = [0usize; 2];
            for (slot, img) in imgs.into_iter().enumerate() {
                let id = match index.get(&img) {
                    Some(&id) => id,
                    None => {
                        if elements.len() >= cap {
                            complete = false;
                            usize::MAX
                        } else {
                            let id = elements.len();
                            index.insert(img.clone(), id);
                            elements.push(img);
                            next.push(id);
                            id
                        }
                    }
                };
                row[slot] = id;
            }
            if edges.len() <= i {
                edges.resize(i + 1, [usize::MAX; 2]);
            }
            edges[i] = row;
        }
        if !complete {
            break;
        }
        frontier = next;
    }
    edges.resize(elements.len(), [usize::MAX; 2]);
    let minus = act_letter(&base, Letter::S(2)).canonical_form()? == base;
    Ok(OrbitRecord { base, stabilizer_index: elements.len(), elements, edges, minus_id_in_stabilizer: minus, complete })
}

/// A translation-equivalence between `o` and its rotation by `π`, i.e. a
/// square bijection `φ` with `φ∘h = h⁻¹∘φ` and `φ∘v = v⁻¹∘φ`.
#[derive(Debug, Clone, Serialize)]
pub struct Involution {
    pub sigma: Perm,
    /// Squares whose center is fixed.
    pub fixed_centers: Vec<usize>,
    /// Squares whose right-edge midpoint is fixed.
    pub fixed_right_edges: Vec<usize>,
    /// Squares whose top-edge midpoint is fixed.
    pub fixed_top_edges: Vec<usize>,
    /// Fixed vertex ids.
    pub fixed_vertices: Vec<usize>,
}

impl Involution {
    pub fn fixed_point_count(&self) -> usize {
        self.fixed_centers.len() + self.fixed_right_edges.len() + self.fixed_top_edges.len() + self.fixed_vertices.len()
    }
}

/// Image square whose bottom-left corner is the image of the bottom-left
/// corner of `s` under the rotation by `π` given by `phi`.
fn rotated_corner(o: &Origami, phi: &Perm, s: usize) -> usize {
    o.v().apply(o.h().apply(phi.apply(s)))
}

/// Finds a `-id` involution respecting labeled marks, if any.
pub fn minus_id_involution(o: &Origami) -> Result<Option<Involution>> {
    o.require_connected()?;
    let n = o.n_squares();
    let (h, v) = (o.h(), o.v());
    let (hi, vi) = (h.inverse(), v.inverse());
    let vof = o.vertex_of();
    let marked: std::collections::HashSet<(u32, usize)> = o.marks().iter().map(|&(l, s)| (l, vof[s])).collect();
    'target: for t in 0..n {
        let mut phi = vec![usize::MAX; n];
        phi[0] = t;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            let y = phi[x];
            let pairs = [
                (h.apply(x), hi.apply(y)),
                (hi.apply(x), h.apply(y)),
                (v.apply(x), vi.apply(y)),
                (vi.apply(x), v.apply(y)),
            ];
            for (a, b) in pairs {
                if phi[a] == usize::MAX {
                    phi[a] = b;
                    stack.push(a);
                } else if phi[a] != b {
                    continue 'target;
                }
            }
        }
        let Ok(sigma) = Perm::new(phi) else { continue };
        let ok = o.marks().iter().all(|&(l, s)| marked.contains(&(l, vof[rotated_corner(o, &sigma, s)])));
        if !ok {
            continue;
        }
        let fixed_centers = (0..n).filter(|&s| sigma.apply(s) == s).collect();
        let fixed_right_edges = (0..n).filter(|&s| hi.apply(sigma.apply(s)) == s).collect();
        let fixed_top_edges = (0..n).filter(|&s| vi.apply(sigma.apply(s)) == s).collect();
        let fixed_vertices = o
            .vertices()
            .iter()
            .enumerate()
            .filter(|(id, c)| vof[rotated_corner(o, &sigma, c[0])] == *id)
            .map(|(id, _)| id)
            .collect();
        return Ok(Some(Involution { sigma, fixed_centers, fixed_right_edges, fixed_top_edges, fixed_vertices }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_reproduce_matrices() {
        for a in -7i64..=7 {
            for c in -7i64..=7 {
                let (g, x, y) = ext_gcd(a, c);
                if g != 1 {
                    continue;
                }
                // [[a, -y],[c, x]] has determinant a·x + c·y = 1
                let m = MatrixSL2Z::new(a, -y, c, x).unwrap();
                assert_eq!(MatrixSL2Z::from_word(&m.word()), m, "{m:?}");
            }
        }
        assert_eq!(MatrixSL2Z::new(-1, 0, 0, -1).unwrap().word(), vec![Letter::S(2)]);
    }

    #[test]
    fn direction_matrix_sends_vector_to_e1() {
        for (p, q) in [(1, 0), (0, 1), (2, 1), (-3, 5), (4, -7), (-1, -1)] {
            let m = direction_matrix(p, q).unwrap();
            assert_eq!(m.apply(p, q), (1, 0));
        }
        assert!(direction_matrix(2, 4).is_err());
        assert!(direction_matrix(0, 0).is_err());
    }

    #[test]
    fn s_has_order_four_and_st_order_six() {
        let o = Origami::from_cycles(4, "(0,1,2)", "(1,3)").unwrap();
        let c = o.canonical_form().unwrap();
        let mut x = o.clone();
        for _ in 0..4 {
            x = act_s(&x);
        }
        assert_eq!(x.canonical_form().unwrap(), c);
        let mut y = o.clone();
        for _ in 0..6 {
            y = act_s(&act_t(&y));
        }
        assert_eq!(y.canonical_form().unwrap(), c);
        let s2 = act(&o, &MatrixSL2Z::new(-1, 0, 0, -1).unwrap()).unwrap();
        assert_eq!(s2.h(), &o.h().inverse());
        assert_eq!(s2.v(), &o.v().inverse());
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(orbit(&Origami::torus(), 10).unwrap().stabilizer_index, 1);
        let two = Origami::from_cycles(2, "(0,1)", "").unwrap();
        assert_eq!(orbit(&two, 10).unwrap().stabilizer_index, 3);
        let m = Origami::marked_torus(3, 1, 0).unwrap();
        assert_eq!(orbit(&m, 100).unwrap().stabilizer_index, 8);
        assert!(matches!(orbit(&m, 3), Err(Error::Resource { .. })));
        let partial = orbit_partial(&m, 3).unwrap();
        assert!(!partial.complete && partial.elements.len() == 3);
    }

    #[test]
    fn involution_of_square_torus() {
        let inv = minus_id_involution(&Origami::torus()).unwrap().unwrap();
        assert_eq!(inv.fixed_point_count(), 4);
    }

    #[test]
    fn involution_on_marked_tori() {
        for n in 2..=5usize {
            for a in 0..n as i64 {
                for b in 0..n as i64 {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let m = Origami::marked_torus(n, a, b).unwrap();
                    let expect = (2 * a) % n as i64 == 0 && (2 * b) % n as i64 == 0;
                    assert_eq!(minus_id_involution(&m).unwrap().is_some(), expect, "n={n} ({a},{b})");
                }
            }
        }
    }
}
