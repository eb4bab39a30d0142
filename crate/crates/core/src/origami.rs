//! Square-tiled surfaces: validation, vertices and cone data, genus, the
//! absolute period lattice, canonical forms and automorphisms.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{domain, internal, Error, Result};
use crate::perm::{bfs_order, inverse_order, is_transitive, relabel, Perm};

/// A square-tiled translation surface.
///
/// Square `s` has right neighbor `h(s)` and top neighbor `v(s)`. A mark
/// `(label, s)` names the vertex at the bottom-left corner of `s`; marks are
/// stored with `s` replaced by the least square whose bottom-left corner is the
/// same vertex, sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Origami {
    h: Perm,
    v: Perm,
    unit: Rational64,
    marks: Vec<(u32, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub n_squares: usize,
    pub bijective: bool,
    pub connected: bool,
    /// Total area as `p/q`.
    pub area: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeVertex {
    pub vertex_id: usize,
    /// Total cone angle divided by 2π.
    pub angle_multiple: usize,
    pub zero_order: usize,
    pub mark_labels: Vec<u32>,
}

/// Vertices that are singular (`angle_multiple >= 2`) or marked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeData {
    pub vertices: Vec<ConeVertex>,
}

impl ConeData {
    pub fn zero_orders(&self) -> Vec<usize> {
        let mut z: Vec<usize> = self.vertices.iter().filter(|c| c.zero_order > 0).map(|c| c.zero_order).collect();
        z.sort_unstable();
        z
    }
}

/// A full-rank sublattice of `Z²` in Hermite normal form, basis `(a, 0)` and
/// `(b, c)` with `a, c > 0` and `0 <= b < a`, measured in units of `unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub unit: Rational64,
}

impl Lattice2 {
    pub fn from_generators(gens: &[(i64, i64)], unit: Rational64) -> Result<Self> {
        let mut rows: Vec<(i64, i64)> = gens.iter().copied().filter(|&g| g != (0, 0)).collect();
        // Euclid on the second coordinate
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].1 != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| rows[i].1.abs());
            let p = rows[nz[0]];
            for &i in &nz[1..] {
                let q = rows[i].1.div_euclid(p.1);
                rows[i].0 -= q * p.0;
                rows[i].1 -= q * p.1;
            }
            rows.retain(|&r| r != (0, 0));
        }
        let a = rows.iter().filter(|r| r.1 == 0).fold(0i64, |g, r| g.gcd(&r.0));
        let Some(&(mut bx, mut c)) = rows.iter().find(|r| r.1 != 0) else {
            return domain("period generators do not span a rank-2 lattice");
        };
        if a == 0 {
            return domain("period generators do not span a rank-2 lattice");
        }
        if c < 0 {
            bx = -bx;
            c = -c;
        }
        Ok(Lattice2 { a, b: bx.rem_euclid(a), c, unit })
    }

    /// Covolume in physical units.
    pub fn covolume(&self) -> Rational64 {
        Rational64::from_integer(self.a * self.c) * self.unit * self.unit
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        if y % self.c != 0 {
            return false;
        }
        (x - (y / self.c) * self.b) % self.a == 0
    }

    /// Whether this is `k·Z²` in physical units.
    pub fn is_scaled_standard(&self, k: Rational64) -> bool {
        let side = k / self.unit;
        side.is_integer() && self.b == 0 && self.a == *side.numer() && self.c == *side.numer()
    }

    /// Basis vectors scaled by the unit, as rationals.
    pub fn basis(&self) -> [(Rational64, Rational64); 2] {
        let r = |x: i64| Rational64::from_integer(x) * self.unit;
        [(r(self.a), r(0)), (r(self.b), r(self.c))]
    }
}

impl Origami {
    pub fn new(h: Perm, v: Perm, unit: Rational64, marks: Vec<(u32, usize)>) -> Result<Self> {
        if h.len() != v.len() {
            return domain(format!("h has {} squares but v has {}", h.len(), v.len()));
        }
        if h.is_empty() {
            return domain("an origami needs at least one square");
        }
        if unit <= Rational64::from_integer(0) {
            return domain(format!("unit length must be positive, got {unit}"));
        }
        let mut o = Origami { h, v, unit, marks: Vec::new() };
        o.set_marks(marks)?;
        Ok(o)
    }

    pub fn from_cycles(n: usize, h: &str, v: &str) -> Result<Self> {
        Origami::new(Perm::parse_cycles(n, h)?, Perm::parse_cycles(n, v)?, 1.into(), vec![])
    }

    /// The one-square torus.
    pub fn torus() -> Self {
        Origami::new(Perm::identity(1), Perm::identity(1), 1.into(), vec![]).unwrap()
    }

    /// The torus `R²/Z²` cut into `n×n` squares of side `1/n`, marked at the
    /// origin (label 0) and at `(a/n, b/n)` (label 1).
    pub fn marked_torus(n: usize, a: i64, b: i64) -> Result<Self> {
        if n == 0 {
            return domain("marked torus needs n >= 1");
        }
        let (h, v) = grid_perms(n);
        let ni = n as i64;
        let m = (b.rem_euclid(ni) as usize) * n + a.rem_euclid(ni) as usize;
        Origami::new(h, v, Rational64::new(1, ni), vec![(0, 0), (1, m)])
    }

    pub fn n_squares(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &Perm {
        &self.h
    }

    pub fn v(&self) -> &Perm {
        &self.v
    }

    pub fn unit(&self) -> Rational64 {
        self.unit
    }

    pub fn marks(&self) -> &[(u32, usize)] {
        &self.marks
    }

    pub fn area(&self) -> Rational64 {
        Rational64::from_integer(self.n_squares() as i64) * self.unit * self.unit
    }

    pub fn with_unit(&self, unit: Rational64) -> Result<Self> {
        Origami::new(self.h.clone(), self.v.clone(), unit, self.marks.clone())
    }

    pub fn with_marks(&self, marks: Vec<(u32, usize)>) -> Result<Self> {
        Origami::new(self.h.clone(), self.v.clone(), self.unit, marks)
    }

    /// Same surface and unit with new gluings; marks are given as squares of the
    /// new labeling.
    pub(crate) fn from_parts(h: Perm, v: Perm, unit: Rational64, marks: Vec<(u32, usize)>) -> Self {
        let mut o = Origami { h, v, unit, marks: Vec::new() };
        o.set_marks(marks).expect("marks in range");
        o
    }

    fn set_marks(&mut self, marks: Vec<(u32, usize)>) -> Result<()> {
        let n = self.n_squares();
        if let Some(&(_, s)) = marks.iter().find(|&&(_, s)| s >= n) {
            return domain(format!("mark square {s} out of range 0..{n}"));
        }
        let rep = self.vertex_representatives();
        let mut m: Vec<(u32, usize)> = marks.into_iter().map(|(l, s)| (l, rep[s])).collect();
        m.sort_unstable();
        m.dedup();
        self.marks = m;
        Ok(())
    }

    pub fn validate(&self) -> Validation {
        Validation {
            n_squares: self.n_squares(),
            bijective: true,
            connected: self.is_connected(),
            area: self.area().to_string(),
        }
    }

    pub fn is_connected(&self) -> bool {
        is_transitive(&[&self.h, &self.v])
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Rotation around the bottom-left corner: `h ∘ v ∘ h⁻¹ ∘ v⁻¹`. Its orbits
    /// are the vertices.
    pub fn corner_rotation(&self) -> Perm {
        self.h.compose(&self.v).compose(&self.h.inverse()).compose(&self.v.inverse())
    }

    /// Vertices as cycles of the corner rotation, ordered by least square.
    pub fn vertices(&self) -> Vec<Vec<usize>> {
        self.corner_rotation().cycles()
    }

    /// `vertex_of()[s]` is the id of the vertex at the bottom-left corner of `s`.
    pub fn vertex_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_squares()];
        for (id, c) in self.vertices().iter().enumerate() {
            for &s in c {
                out[s] = id;
            }
        }
        out
    }

    fn vertex_representatives(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_squares()];
        for c in self.vertices() {
            for &s in &c {
                out[s] = c[0];
            }
        }
        out
    }

    /// Marked vertex ids for the given label.
    pub fn marked_vertices(&self, label: u32) -> Vec<usize> {
        let vof = self.vertex_of();
        self.marks.iter().filter(|m| m.0 == label).map(|m| vof[m.1]).collect()
    }

    /// Per-vertex flag: singular or marked.
    pub fn special_vertices(&self) -> Vec<bool> {
        let verts = self.vertices();
        let vof = self.vertex_of();
        let mut sp: Vec<bool> = verts.iter().map(|c| c.len() > 1).collect();
        for &(_, s) in &self.marks {
            sp[vof[s]] = true;
        }
        sp
    }

    pub fn singularities(&self) -> Result<ConeData> {
        self.require_connected()?;
        let verts = self.vertices();
        let vof = self.vertex_of();
        let mut labels: Vec<Vec<u32>> = vec![Vec::new(); verts.len()];
        for &(l, s) in &self.marks {
            labels[vof[s]].push(l);
        }
        let vertices = verts
            .iter()
            .enumerate()
            .filter(|(id, c)| c.len() > 1 || !labels[*id].is_empty())
            .map(|(id, c)| ConeVertex {
                vertex_id: id,
                angle_multiple: c.len(),
                zero_order: c.len() - 1,
                mark_labels: labels[id].clone(),
            })
            .collect();
        Ok(ConeData { vertices })
    }

    /// `V - E + F` of the square complex.
    pub fn euler_char(&self) -> i64 {
        self.vertices().len() as i64 - self.n_squares() as i64
    }

    pub fn genus(&self) -> Result<usize> {
        let cone = self.singularities()?;
        let total: usize = cone.vertices.iter().map(|c| c.zero_order).sum();
        if !total.is_multiple_of(2) {
            return internal(format!("odd total zero order {total}"));
        }
        let g = 1 + total / 2;
        if 2 - 2 * g as i64 != self.euler_char() {
            return internal(format!(
                "Gauss-Bonnet genus {g} disagrees with Euler characteristic {}",
                self.euler_char()
            ));
        }
        Ok(g)
    }

    /// Positions of a spanning tree of the square graph rooted at square 0,
    /// together with the holonomies of the non-tree edges.
    #[allow(clippy::type_complexity)]
    pub(crate) fn developing_map(&self) -> (Vec<(i64, i64)>, Vec<(i64, i64)>) {
        let n = self.n_squares();
        let hi = self.h.inverse();
        let vi = self.v.inverse();
        let mut pos: Vec<Option<(i64, i64)>> = vec![None; n];
        pos[0] = Some((0, 0));
        let mut stack = vec![0];
        let mut gens = Vec::new();
        while let Some(x) = stack.pop() {
            let (px, py) = pos[x].unwrap();
            let steps = [(self.h.apply(x), 1, 0), (self.v.apply(x), 0, 1), (hi.apply(x), -1, 0), (vi.apply(x), 0, -1)];
            for (y, dx, dy) in steps {
                let q = (px + dx, py + dy);
                match pos[y] {
                    None => {
                        pos[y] = Some(q);
                        stack.push(y);
                    }
                    Some(p) => gens.push((q.0 - p.0, q.1 - p.1)),
                }
            }
        }
        (pos.into_iter().map(|p| p.unwrap_or((0, 0))).collect(), gens)
    }

    /// Lattice generated by holonomies of closed walks in the square graph.
    pub fn period_lattice(&self) -> Result<Lattice2> {
        self.require_connected()?;
        let (_, gens) = self.developing_map();
        Lattice2::from_generators(&gens, self.unit)
    }

    /// Lattice generated by the holonomies of closed loops and of paths between
    /// marked points (the relative period lattice).
    pub fn relative_period_lattice(&self) -> Result<Lattice2> {
        self.require_connected()?;
        let (pos, mut gens) = self.developing_map();
        if let Some(&(_, s0)) = self.marks.first() {
            for &(_, s) in &self.marks[1..] {
                gens.push((pos[s].0 - pos[s0].0, pos[s].1 - pos[s0].1));
            }
        }
        Lattice2::from_generators(&gens, self.unit)
    }

    /// BFS relabeling from `start`, and the resulting origami.
    fn relabeled_from(&self, start: usize, invs: &[Perm]) -> Option<Origami> {
        let order = bfs_order(&[&self.h, &self.v], invs, start)?;
        let label_of = inverse_order(&order);
        let h = relabel(&self.h, &order, &label_of);
        let v = relabel(&self.v, &order, &label_of);
        let marks = self.marks.iter().map(|&(l, s)| (l, label_of[s])).collect();
        Some(Origami::from_parts(h, v, self.unit, marks))
    }

    fn canonical_with_count(&self) -> Result<(Origami, usize)> {
        self.require_connected()?;
        let invs = [self.h.inverse(), self.v.inverse()];
        let mut best: Option<Origami> = None;
        let mut count = 0;
        for start in 0..self.n_squares() {
            let cand = self.relabeled_from(start, &invs).ok_or(Error::Disconnected)?;
            match &best {
                Some(b) if cand.key() > b.key() => {}
                Some(b) if cand.key() == b.key() => count += 1,
                _ => {
                    best = Some(cand);
                    count = 1;
                }
            }
        }
        Ok((best.expect("nonempty"), count))
    }

    fn key(&self) -> (&Perm, &Perm, &[(u32, usize)]) {
        (&self.h, &self.v, &self.marks)
    }

    /// Least BFS relabeling; equal for two origamis iff they are isomorphic
    /// by a translation respecting marks and labels (and have the same unit).
    pub fn canonical_form(&self) -> Result<Origami> {
        Ok(self.canonical_with_count()?.0)
    }

    /// Order of the group of translation automorphisms preserving labeled marks.
    pub fn automorphism_count(&self) -> Result<usize> {
        Ok(self.canonical_with_count()?.1)
    }

    /// A square bijection `φ` with `φ∘h = h'∘φ`, `φ∘v = v'∘φ` and matching
    /// labeled marks, where `(h', v')` are the gluings of `other`.
    pub fn isomorphism_to(&self, other: &Origami) -> Result<Option<Perm>> {
        self.require_connected()?;
        other.require_connected()?;
        if self.n_squares() != other.n_squares() || self.unit != other.unit {
            return Ok(None);
        }
        let oinv = [other.h.inverse(), other.v.inverse()];
        let oorder = bfs_order(&[&other.h, &other.v], &oinv, 0).ok_or(Error::Disconnected)?;
        let target = other.relabeled_from(0, &oinv).ok_or(Error::Disconnected)?;
        let invs = [self.h.inverse(), self.v.inverse()];
        for start in 0..self.n_squares() {
            let order = bfs_order(&[&self.h, &self.v], &invs, start).ok_or(Error::Disconnected)?;
            let cand = self.relabeled_from(start, &invs).ok_or(Error::Disconnected)?;
            if cand == target {
                let mut phi = vec![0; self.n_squares()];
                for (k, &s) in order.iter().enumerate() {
                    phi[s] = oorder[k];
                }
                return Ok(Some(Perm::from_vec_unchecked(phi)));
            }
        }
        Ok(None)
    }

    /// Text encoding: `n=.. unit=..`, `h=..`, `v=..` and, when marked,
    /// `marks=..` listing vertex ids grouped by label (labels compacted to
    /// `0, 1, ...` in increasing order).
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "n={} unit={}/{}\nh={}\nv={}\n",
            self.n_squares(),
            self.unit.numer(),
            self.unit.denom(),
            self.h,
            self.v
        );
        if !self.marks.is_empty() {
            let vof = self.vertex_of();
            let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
            for &(l, sq) in &self.marks {
                match groups.last_mut() {
                    Some((gl, ids)) if *gl == l => ids.push(vof[sq]),
                    _ => groups.push((l, vec![vof[sq]])),
                }
            }
            let body: Vec<String> =
                groups.iter().map(|(_, ids)| ids.iter().map(usize::to_string).collect::<Vec<_>>().join("+")).collect();
            s.push_str(&format!("marks={}\n", body.join(",")));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Origami> {
        let mut n = None;
        let mut unit = Rational64::from_integer(1);
        let (mut h, mut v, mut marks) = (None, None, None);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("h=") {
                h = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("v=") {
                v = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("marks=") {
                marks = Some(rest.to_string());
            } else {
                for tok in line.split_whitespace() {
                    if let Some(x) = tok.strip_prefix("n=") {
                        n = Some(x.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?);
                    } else if let Some(x) = tok.strip_prefix("unit=") {
                        unit = parse_rational64(x)?;
                    } else {
                        return Err(Error::Parse(format!("unexpected token {tok:?}")));
                    }
                }
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing n=".into()))?;
        let h = Perm::parse_cycles(n, h.as_deref().unwrap_or(""))?;
        let v = Perm::parse_cycles(n, v.as_deref().unwrap_or(""))?;
        let mut o = Origami::new(h, v, unit, vec![])?;
        if let Some(m) = marks {
            let verts = o.vertices();
            let mut list = Vec::new();
            for (label, group) in m.split(',').map(str::trim).filter(|g| !g.is_empty()).enumerate() {
                for id in group.split('+') {
                    let id: usize = id.trim().parse().map_err(|e| Error::Parse(format!("mark {id:?}: {e}")))?;
                    let Some(c) = verts.get(id) else {
                        return Err(Error::Parse(format!("vertex id {id} out of range")));
                    };
                    list.push((label as u32, c[0]));
                }
            }
            o = o.with_marks(list)?;
        }
        Ok(o)
    }
}

pub(crate) fn parse_rational64(s: &str) -> Result<Rational64> {
    let bad = |e: std::num::ParseIntError| Error::Parse(format!("rational {s:?}: {e}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().map_err(bad)?;
            if q == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational64::new(p.trim().parse().map_err(bad)?, q))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(bad)?)),
    }
}

/// Right and up neighbors on the `n×n` grid with square index `j·n + i`.
pub(crate) fn grid_perms(n: usize) -> (Perm, Perm) {
    let idx = |i: usize, j: usize| (j % n) * n + (i % n);
    let mut h = vec![0; n * n];
    let mut v = vec![0; n * n];
    for j in 0..n {
        for i in 0..n {
            h[idx(i, j)] = idx(i + 1, j);
            v[idx(i, j)] = idx(i, j + 1);
        }
    }
    (Perm::from_vec_unchecked(h), Perm::from_vec_unchecked(v))
}

impl fmt::Debug for Origami {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Origami(n={}, unit={}, h={}, v={}, marks={:?})",
            self.n_squares(),
            self.unit,
            self.h,
            self.v,
            self.marks
        )
    }
}

impl fmt::Display for Origami {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(n: usize, h: &str, v: &str) -> Origami {
        Origami::from_cycles(n, h, v).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(Origami::torus().validate().connected);
        assert!(o(2, "(0,1)", "").validate().connected);
        let split = o(2, "", "").validate();
        assert!(split.bijective && !split.connected);
        assert_eq!(split.area, "2");
        assert!(o(2, "", "").singularities().is_err());
    }

    #[test]
    fn cone_data_of_l_shape() {
        let l = o(3, "(0,1,2)", "(1,2)");
        let c = l.singularities().unwrap();
        assert_eq!(c.vertices.len(), 1);
        assert_eq!(c.vertices[0].angle_multiple, 3);
        assert_eq!(c.zero_orders(), vec![2]);
        assert_eq!(l.genus().unwrap(), 2);
        assert_eq!(Origami::torus().genus().unwrap(), 1);
        assert!(Origami::torus().singularities().unwrap().vertices.is_empty());
    }

    #[test]
    fn period_lattices() {
        let t = Origami::torus().period_lattice().unwrap();
        assert_eq!((t.a, t.b, t.c), (1, 0, 1));
        let two = o(2, "(0,1)", "").period_lattice().unwrap();
        assert_eq!((two.a, two.b, two.c), (2, 0, 1));
        assert!(two.contains(2, 5) && !two.contains(1, 0));
        let m = Origami::marked_torus(3, 1, 2).unwrap();
        assert!(m.period_lattice().unwrap().is_scaled_standard(1.into()));
        let rel = m.relative_period_lattice().unwrap();
        assert_eq!(rel.covolume(), Rational64::new(1, 3));
    }

    #[test]
    fn canonical_forms_and_automorphisms() {
        let t = Origami::torus();
        assert_eq!(t.canonical_form().unwrap(), t);
        let a = o(2, "(0,1)", "");
        let b = o(2, "(1,0)", "");
        assert_eq!(a.canonical_form().unwrap(), b.canonical_form().unwrap());
        let c = o(2, "", "(0,1)");
        assert_ne!(a.canonical_form().unwrap(), c.canonical_form().unwrap());
        assert_eq!(t.automorphism_count().unwrap(), 1);
        assert_eq!(o(2, "(0,1)", "(0,1)").automorphism_count().unwrap(), 2);
        assert_eq!(o(3, "(0,1,2)", "(1,2)").automorphism_count().unwrap(), 1);
    }

    #[test]
    fn marks_break_symmetry() {
        let m = Origami::marked_torus(2, 1, 0).unwrap();
        assert_eq!(m.automorphism_count().unwrap(), 1);
        let same_label = m.with_marks(vec![(0, 0), (0, 1)]).unwrap();
        assert_eq!(same_label.automorphism_count().unwrap(), 2);
    }

    #[test]
    fn text_round_trip() {
        let m = Origami::marked_torus(3, 1, 1).unwrap();
        let txt = m.to_text();
        let back = Origami::parse_text(&txt).unwrap();
        assert_eq!(back, m);
        let t = Origami::torus();
        assert_eq!(t.to_text(), "n=1 unit=1/1\nh=()\nv=()\n");
        assert_eq!(Origami::parse_text(&t.to_text()).unwrap(), t);
        assert!(Origami::parse_text("n=2\nh=(0,2)\nv=()").is_err());
    }
}
