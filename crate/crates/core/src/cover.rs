//! Torus covers branched over the origin and one rational point.
//!
//! A cover is encoded by the monodromy of the two torus loops (`h`, `v`) and
//! the clockwise monodromies `c0`, `c1` around the origin and the branch
//! point, related by `h∘v∘h⁻¹∘v⁻¹ = c0∘c1`. It is realized on an `n×n` grid
//! of squares per sheet: every grid edge carries a permutation of the sheets
//! (a cochain) which is the identity except on the fundamental-domain seams
//! and along a cut from the origin to the branch point.

use std::collections::HashSet;

use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{domain, internal, Result};
use crate::origami::Origami;
use crate::perm::{canonical_tuple, is_transitive, Perm};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverDatum {
    pub h: Perm,
    pub v: Perm,
    pub c0: Perm,
    pub c1: Perm,
    /// Branch point `(a/n, b/n)`.
    pub branch: (i64, i64),
    pub denom: i64,
}

/// Commutator `h∘v∘h⁻¹∘v⁻¹`.
pub fn commutator(h: &Perm, v: &Perm) -> Perm {
    h.compose(v).compose(&h.inverse()).compose(&v.inverse())
}

impl CoverDatum {
    /// Datum with `c0` solved from the relation.
    pub fn new(h: Perm, v: Perm, c1: Perm, branch: (i64, i64), denom: i64) -> Result<Self> {
        let c0 = commutator(&h, &v).compose(&c1.inverse());
        CoverDatum::with_c0(h, v, c0, c1, branch, denom)
    }

    pub fn with_c0(h: Perm, v: Perm, c0: Perm, c1: Perm, branch: (i64, i64), denom: i64) -> Result<Self> {
        let d = h.len();
        if [&v, &c0, &c1].iter().any(|p| p.len() != d) || d == 0 {
            return domain("monodromy permutations must act on the same nonempty set of sheets");
        }
        if denom < 1 {
            return domain(format!("branch denominator must be positive, got {denom}"));
        }
        let branch = (branch.0.rem_euclid(denom), branch.1.rem_euclid(denom));
        if branch == (0, 0) {
            return domain("branch point coincides with the origin");
        }
        if commutator(&h, &v) != c0.compose(&c1) {
            return domain("relation h v h^-1 v^-1 = c0 c1 fails");
        }
        if !is_transitive(&[&h, &v, &c0, &c1]) {
            return domain("monodromy group is not transitive (cover disconnected)");
        }
        Ok(CoverDatum { h, v, c0, c1, branch, denom })
    }

    pub fn degree(&self) -> usize {
        self.h.len()
    }

    /// Same monodromy placed at another branch point.
    pub fn at(&self, branch: (i64, i64), denom: i64) -> Result<Self> {
        CoverDatum::with_c0(self.h.clone(), self.v.clone(), self.c0.clone(), self.c1.clone(), branch, denom)
    }

    /// Class under simultaneous conjugation: canonical `(h, v, c1)`.
    pub fn class_key(&self) -> Vec<Perm> {
        canonical_tuple(&[&self.h, &self.v, &self.c1]).expect("transitive").0
    }

    pub fn centralizer_order(&self) -> usize {
        canonical_tuple(&[&self.h, &self.v, &self.c1]).expect("transitive").1
    }
}

/// Sheet permutations on the edges of the `n×n` grid.
///
/// `vert[x][y]` lives on the line `X = x` between heights `y` and `y+1` and is
/// applied when crossing it rightward; `hor[x][y]` lives on `Y = y` between
/// `x` and `x+1` and is applied when crossing it upward.
#[derive(Debug, Clone)]
pub(crate) struct Cochain {
    n: usize,
    d: usize,
    vert: Vec<Perm>,
    hor: Vec<Perm>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Edge {
    Vert(usize, usize),
    Hor(usize, usize),
}

/// The four edges at a grid vertex: above, below, left and right.
struct Star {
    va: Edge,
    vb: Edge,
    hl: Edge,
    hr: Edge,
}

impl Cochain {
    pub(crate) fn new(n: usize, h: &Perm, v: &Perm) -> Self {
        let d = h.len();
        let id = Perm::identity(d);
        let mut vert = vec![id.clone(); n * n];
        let mut hor = vec![id; n * n];
        vert[..n].fill(h.clone());
        for x in 0..n {
            hor[x * n] = v.clone();
        }
        Cochain { n, d, vert, hor }
    }

    fn get(&self, e: Edge) -> &Perm {
        match e {
            Edge::Vert(x, y) => &self.vert[x * self.n + y],
            Edge::Hor(x, y) => &self.hor[x * self.n + y],
        }
    }

    fn set(&mut self, e: Edge, g: Perm) {
        let n = self.n;
        match e {
            Edge::Vert(x, y) => self.vert[x * n + y] = g,
            Edge::Hor(x, y) => self.hor[x * n + y] = g,
        }
    }

    fn star(&self, x: i64, y: i64) -> Star {
        let n = self.n as i64;
        let m = |t: i64| t.rem_euclid(n) as usize;
        Star {
            va: Edge::Vert(m(x), m(y)),
            vb: Edge::Vert(m(x), m(y - 1)),
            hl: Edge::Hor(m(x - 1), m(y)),
            hr: Edge::Hor(m(x), m(y)),
        }
    }

    /// Counter-clockwise monodromy around a grid vertex.
    pub(crate) fn ccw(&self, x: i64, y: i64) -> Perm {
        let s = self.star(x, y);
        self.get(s.hr).compose(self.get(s.vb)).compose(&self.get(s.hl).inverse()).compose(&self.get(s.va).inverse())
    }

    /// Inserts a cut along `path` (grid vertices starting at the origin) so
    /// that the clockwise monodromy at its endpoint is `c1` and every interior
    /// vertex stays unbranched.
    pub(crate) fn cut(&mut self, c1: &Perm, path: &[(i64, i64)]) {
        for i in 0..path.len().saturating_sub(1) {
            let ((x0, y0), (x1, y1)) = (path[i], path[i + 1]);
            let s = self.star(x0, y0);
            let (out, dir) = match (x1 - x0, y1 - y0) {
                (1, 0) => (s.hr, 0),
                (-1, 0) => (s.hl, 1),
                (0, 1) => (s.va, 2),
                (0, -1) => (s.vb, 3),
                step => panic!("cut path takes a non-unit step {step:?}"),
            };
            let val = if i == 0 {
                let kappa = if dir == 0 || dir == 3 { c1.clone() } else { c1.inverse() };
                kappa.compose(self.get(out))
            } else {
                let (va, vb, hl, hr) = (self.get(s.va), self.get(s.vb), self.get(s.hl), self.get(s.hr));
                match dir {
                    0 => va.compose(hl).compose(&vb.inverse()),
                    3 => hr.inverse().compose(va).compose(hl),
                    1 => va.inverse().compose(hr).compose(vb),
                    _ => hr.compose(vb).compose(&hl.inverse()),
                }
            };
            self.set(out, val);
        }
    }

    /// Reads off `(h, v, c1)` relative to the branch point at grid vertex `(a, b)`.
    pub(crate) fn extract(&self, a: i64, b: i64) -> (Perm, Perm, Perm) {
        let n = self.n;
        let a = a.rem_euclid(n as i64) as usize;
        let b = b.rem_euclid(n as i64) as usize;
        let id = Perm::identity(self.d);
        let h = (0..n).fold(id.clone(), |acc, x| self.vert[x * n + n - 1].compose(&acc));
        let v = (0..n).fold(id.clone(), |acc, y| self.hor[(n - 1) * n + y].compose(&acc));
        let mut t = id;
        for x in (a + 1..n).rev() {
            t = self.vert[x * n + n - 1].inverse().compose(&t);
        }
        for y in (b + 1..n).rev() {
            t = self.hor[a * n + y].inverse().compose(&t);
        }
        let s = self.star(a as i64, b as i64);
        let cw = self
            .get(s.va)
            .compose(self.get(s.hl))
            .compose(&self.get(s.vb).inverse())
            .compose(&self.get(s.hr).inverse());
        let c1 = t.inverse().compose(&cw).compose(&t);
        (h, v, c1)
    }

    pub(crate) fn square(&self, sheet: usize, i: usize, j: usize) -> usize {
        let n = self.n;
        sheet * n * n + (j % n) * n + (i % n)
    }

    pub(crate) fn origami(&self) -> Origami {
        let n = self.n;
        let total = self.d * n * n;
        let mut h = vec![0; total];
        let mut v = vec![0; total];
        for k in 0..self.d {
            for j in 0..n {
                for i in 0..n {
                    let s = self.square(k, i, j);
                    h[s] = self.square(self.vert[((i + 1) % n) * n + j].apply(k), i + 1, j);
                    v[s] = self.square(self.hor[i * n + (j + 1) % n].apply(k), i, j + 1);
                }
            }
        }
        Origami::from_parts(
            Perm::from_vec_unchecked(h),
            Perm::from_vec_unchecked(v),
            Rational64::new(1, n as i64),
            vec![],
        )
    }
}

/// Right along the bottom edge, then up.
pub(crate) fn std_path(a: i64, b: i64) -> Vec<(i64, i64)> {
    let mut p = vec![(0, 0)];
    p.extend((1..=a).map(|x| (x, 0)));
    p.extend((1..=b).map(|y| (a, y)));
    p
}

/// Up along the left edge, then right.
pub(crate) fn alt_path(a: i64, b: i64) -> Vec<(i64, i64)> {
    let mut p = vec![(0, 0)];
    p.extend((1..=b).map(|y| (0, y)));
    p.extend((1..=a).map(|x| (x, b)));
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutPath {
    RightThenUp,
    UpThenRight,
}

pub(crate) fn cochain_for(datum: &CoverDatum, path: CutPath) -> Cochain {
    let n = datum.denom as usize;
    let (a, b) = datum.branch;
    let mut c = Cochain::new(n, &datum.h, &datum.v);
    let p = match path {
        CutPath::RightThenUp => std_path(a, b),
        CutPath::UpThenRight => alt_path(a, b),
    };
    c.cut(&datum.c1, &p);
    c
}

/// Realizes the cover as an origami with `d·n²` squares of side `1/n`.
///
/// The ramification vertices over the origin carry label 0 and those over the
/// branch point label 1; in degree 1 the single preimages are marked instead.
pub fn build(datum: &CoverDatum) -> Result<Origami> {
    build_along(datum, CutPath::RightThenUp)
}

pub fn build_along(datum: &CoverDatum, path: CutPath) -> Result<Origami> {
    let coch = cochain_for(datum, path);
    let bare = coch.origami();
    let verts = bare.vertex_of();
    let cycles = bare.vertices();
    let d = datum.degree();
    let mut marks = Vec::new();
    for (label, (x, y)) in [(0u32, (0, 0)), (1u32, datum.branch)] {
        let mut seen = HashSet::new();
        for k in 0..d {
            let s = coch.square(k, x as usize, y as usize);
            let vid = verts[s];
            if seen.insert(vid) && (d == 1 || cycles[vid].len() > 1) {
                marks.push((label, s));
            }
        }
    }
    let o = bare.with_marks(marks)?;
    check_ramification(&o, datum, &coch)?;
    Ok(o)
}

fn nontrivial_cycle_lengths(p: &Perm) -> Vec<usize> {
    p.cycle_type().into_iter().filter(|&l| l > 1).collect()
}

fn check_ramification(o: &Origami, datum: &CoverDatum, coch: &Cochain) -> Result<()> {
    if !o.is_connected() {
        return internal("built cover is disconnected");
    }
    let n = datum.denom;
    for y in 0..n {
        for x in 0..n {
            if (x, y) != (0, 0) && (x, y) != datum.branch && !coch.ccw(x, y).is_identity() {
                return internal(format!("cut leaves monodromy at grid vertex ({x},{y})"));
            }
        }
    }
    let mut expect: Vec<usize> = nontrivial_cycle_lengths(&datum.c0);
    expect.extend(nontrivial_cycle_lengths(&datum.c1));
    expect.sort_unstable();
    let mut got: Vec<usize> = o.vertices().iter().map(Vec::len).filter(|&k| k > 1).collect();
    got.sort_unstable();
    if got != expect {
        return internal(format!("cone angles {got:?} do not match branch cycles {expect:?}"));
    }
    Ok(())
}

/// Standard `d`-cycle `(0 1 … d−1)`.
pub fn standard_cycle(d: usize) -> Perm {
    Perm::from_cycles(d, &[(0..d).collect()]).expect("valid cycle")
}

/// Datum of `S_{a,v} = T²(a,1) #_I T²(d−a,1)`: tori of widths `a` and `d−a`
/// slit along the same segment and glued crosswise.
pub fn s_av_datum(a: usize, d: usize, branch: (i64, i64), denom: i64) -> Result<CoverDatum> {
    if a == 0 || a >= d {
        return domain(format!("need 0 < a < d, got a={a}, d={d}"));
    }
    let h = Perm::from_cycles(d, &[(0..a).collect(), (a..d).collect()])?;
    let c1 = Perm::from_cycles(d, &[vec![0, a]])?;
    CoverDatum::new(h, Perm::identity(d), c1, branch, denom)
}

/// Datum of the cyclic connected sum `#^d_I T²` of `d` copies along a slit.
pub fn cyclic_sum_datum(d: usize, branch: (i64, i64), denom: i64) -> Result<CoverDatum> {
    if d == 0 {
        return domain("need d >= 1");
    }
    CoverDatum::new(Perm::identity(d), Perm::identity(d), standard_cycle(d), branch, denom)
}

/// `S_{a,v}` (when `cyclic` is false) or `#^d_I T²` (when true), with the slit
/// ending at `(p/n, q/n)`.
pub fn connected_sum(a: usize, d: usize, branch: (i64, i64), denom: i64, cyclic: bool) -> Result<Origami> {
    let datum = if cyclic { cyclic_sum_datum(d, branch, denom)? } else { s_av_datum(a, d, branch, denom)? };
    build(&datum)
}

/// Monodromy of dragging the branch point one grid step in `(dx, dy)`,
/// returned relative to the new position.
pub(crate) fn grid_step(datum: &CoverDatum, dx: i64, dy: i64) -> Result<CoverDatum> {
    let (a, b) = datum.branch;
    let n = datum.denom as usize;
    let mut path = if dy != 0 { alt_path(a, b) } else { std_path(a, b) };
    path.push((a + dx, b + dy));
    let nn = n as i64;
    let wrapped: HashSet<(i64, i64)> = path.iter().map(|&(x, y)| (x.rem_euclid(nn), y.rem_euclid(nn))).collect();
    if wrapped.len() != path.len() {
        return domain(format!(
            "branch point cannot be pushed from ({a},{b}) in direction ({dx},{dy}) on a grid of size {n}"
        ));
    }
    let mut coch = Cochain::new(n, &datum.h, &datum.v);
    coch.cut(&datum.c1, &path);
    let (h, v, c1) = coch.extract(a + dx, b + dy);
    let out = CoverDatum::new(h, v, c1, (a + dx, b + dy), datum.denom);
    match out {
        Ok(o) => Ok(o),
        Err(e) => internal(format!("point push broke the cover: {e}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PushDirection {
    H,
    V,
}

/// Drags the branch point once around the horizontal (`H`) or vertical (`V`)
/// loop of the torus, `sign = -1` for the reverse loop.
pub fn pointpush(datum: &CoverDatum, dir: PushDirection, sign: i64) -> Result<CoverDatum> {
    let (dx, dy) = match dir {
        PushDirection::H => (sign, 0),
        PushDirection::V => (0, sign),
    };
    let mut cur = datum.clone();
    for _ in 0..datum.denom {
        cur = grid_step(&cur, dx, dy)?;
    }
    Ok(cur)
}

/// Least `P > 0` with `S_{a, t_h + P + i t_v} ≅ S_{a, t_h + i t_v}`.
pub fn loop_closure_period(a: usize, d: usize, t_v: Rational64) -> Result<usize> {
    if a == 0 || a >= d {
        return domain(format!("need 0 < a < d, got a={a}, d={d}"));
    }
    if a.gcd(&d) != 1 {
        return domain(format!("gcd(a, d) = {} is not 1", a.gcd(&d)));
    }
    if t_v <= 0.into() || t_v >= 1.into() {
        return domain(format!("t_v must lie in (0,1), got {t_v}"));
    }
    let n = *t_v.denom();
    let start = s_av_datum(a, d, (0, *t_v.numer()), n)?;
    let key = start.class_key();
    let mut cur = start;
    let bound = d * d * d + 1;
    for p in 1..=bound {
        cur = pointpush(&cur, PushDirection::H, 1)?;
        if cur.class_key() == key {
            return Ok(p);
        }
    }
    internal("point push did not return within the expected bound")
}

#[derive(Debug, Clone, Serialize)]
pub struct DsymClass {
    /// Slit holonomy in units of `1/n`, reduced modulo `d·n`.
    pub slit: (i64, i64),
    pub branch: (i64, i64),
    /// Exponents `(i, j)` with `h = c^i`, `v = c^j`.
    pub twist: (usize, usize),
    pub n_squares: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DsymReport {
    pub degree: usize,
    pub denominator: i64,
    /// Covers branched at `(a/n, b/n) ≠ 0`.
    pub branched_classes: usize,
    /// Unbranched cyclic covers given by nonzero lattice slits.
    pub lattice_classes: usize,
    pub expected_branched: usize,
    pub expected_lattice: usize,
    /// Number of pairwise non-isomorphic built surfaces among the branched ones.
    pub distinct_branched_surfaces: usize,
    pub classes: Vec<DsymClass>,
}

impl DsymReport {
    pub fn total_classes(&self) -> usize {
        self.branched_classes + self.lattice_classes
    }
}

/// `d`-symmetric covers with slit vectors in `(1/n)Z² / dZ²`, minus zero.
pub fn dsym_enumerate(d: usize, n: i64) -> Result<DsymReport> {
    if d == 0 || n < 1 {
        return domain("dsym_enumerate needs d, n >= 1");
    }
    let c = standard_cycle(d);
    let mut classes = Vec::new();
    let mut keys = HashSet::new();
    let mut forms = HashSet::new();
    let mut lattice_keys = HashSet::new();
    let (mut branched, mut lattice) = (0, 0);
    for i in 0..d {
        for j in 0..d {
            let (h, v) = (c.pow(i as i64), c.pow(j as i64));
            for a in 0..n {
                for b in 0..n {
                    let slit = (a + n * i as i64, b + n * j as i64);
                    if (a, b) == (0, 0) {
                        if (i, j) == (0, 0) {
                            continue;
                        }
                        let key = canonical_tuple(&[&h, &v, &c]).map(|t| t.0);
                        if lattice_keys.insert(key) {
                            lattice += 1;
                        }
                        classes.push(DsymClass { slit, branch: (0, 0), twist: (i, j), n_squares: d });
                        continue;
                    }
                    let datum = CoverDatum::new(h.clone(), v.clone(), c.clone(), (a, b), n)?;
                    if keys.insert((datum.class_key(), (a, b))) {
                        branched += 1;
                    }
                    let o = build(&datum)?;
                    forms.insert(o.canonical_form()?);
                    classes.push(DsymClass { slit, branch: (a, b), twist: (i, j), n_squares: o.n_squares() });
                }
            }
        }
    }
    let dn = d * n as usize;
    Ok(DsymReport {
        degree: d,
        denominator: n,
        branched_classes: branched,
        lattice_classes: lattice,
        expected_branched: dn * dn - d * d,
        expected_lattice: d * d - 1,
        distinct_branched_surfaces: forms.len(),
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: usize, s: &str) -> Perm {
        Perm::parse_cycles(d, s).unwrap()
    }

    #[test]
    fn degree_one_is_marked_torus() {
        for (n, a, b) in [(2, 1, 0), (3, 1, 2), (4, 0, 3)] {
            let datum = CoverDatum::new(p(1, ""), p(1, ""), p(1, ""), (a, b), n).unwrap();
            let o = build(&datum).unwrap();
            let m = Origami::marked_torus(n as usize, a, b).unwrap();
            assert_eq!(o.canonical_form().unwrap(), m.canonical_form().unwrap());
        }
    }

    #[test]
    fn double_slit_torus() {
        let datum = CoverDatum::new(p(2, ""), p(2, ""), p(2, "(0,1)"), (1, 1), 2).unwrap();
        assert_eq!(datum.c0, p(2, "(0,1)"));
        let o = build(&datum).unwrap();
        assert_eq!(o.genus().unwrap(), 2);
        assert_eq!(o.singularities().unwrap().zero_orders(), vec![1, 1]);
    }

    #[test]
    fn s_av_examples() {
        let o = connected_sum(1, 3, (1, 1), 2, false).unwrap();
        assert_eq!(o.singularities().unwrap().zero_orders(), vec![1, 1]);
        assert!(o.period_lattice().unwrap().is_scaled_standard(1.into()));
        let o = connected_sum(1, 2, (1, 1), 2, false).unwrap();
        assert_eq!(o.genus().unwrap(), 2);
        let o = connected_sum(1, 3, (0, 1), 2, false).unwrap();
        assert_eq!(o.singularities().unwrap().zero_orders(), vec![1, 1]);
        assert!(connected_sum(3, 3, (1, 1), 2, false).is_err());
    }

    #[test]
    fn cyclic_sum_has_two_symmetric_zeros() {
        let o = connected_sum(0, 3, (1, 1), 2, true).unwrap();
        assert_eq!(o.genus().unwrap(), 3);
        assert_eq!(o.singularities().unwrap().zero_orders(), vec![2, 2]);
        assert_eq!(o.automorphism_count().unwrap() % 3, 0);
    }

    #[test]
    fn relation_is_enforced() {
        let bad = CoverDatum::with_c0(p(2, ""), p(2, ""), p(2, ""), p(2, "(0,1)"), (1, 1), 2);
        assert!(bad.is_err());
        assert!(CoverDatum::new(p(2, ""), p(2, ""), p(2, "(0,1)"), (0, 0), 2).is_err());
        assert!(CoverDatum::new(p(2, ""), p(2, ""), p(2, ""), (1, 1), 2).is_err());
    }

    #[test]
    fn extraction_inverts_cut() {
        let datum = CoverDatum::new(p(4, "(0,1,2)"), p(4, "(1,3)"), p(4, "(2,3)"), (2, 1), 3).unwrap();
        for path in [CutPath::RightThenUp, CutPath::UpThenRight] {
            let coch = cochain_for(&datum, path);
            let (h, v, c1) = coch.extract(2, 1);
            assert_eq!((h, v, c1), (datum.h.clone(), datum.v.clone(), datum.c1.clone()));
        }
    }

    #[test]
    fn loop_periods() {
        assert_eq!(loop_closure_period(1, 3, Rational64::new(1, 2)).unwrap(), 6);
        assert_eq!(loop_closure_period(1, 2, Rational64::new(1, 2)).unwrap(), 2);
        assert_eq!(loop_closure_period(2, 3, Rational64::new(1, 2)).unwrap(), 6);
        assert!(loop_closure_period(2, 4, Rational64::new(1, 2)).is_err());
    }

    #[test]
    fn dsym_counts() {
        let r = dsym_enumerate(1, 2).unwrap();
        assert_eq!((r.branched_classes, r.lattice_classes), (3, 0));
        let r = dsym_enumerate(2, 1).unwrap();
        assert_eq!((r.branched_classes, r.lattice_classes), (0, 3));
        let r = dsym_enumerate(3, 1).unwrap();
        assert_eq!(r.total_classes(), 8);
        let r = dsym_enumerate(2, 2).unwrap();
        assert_eq!(r.branched_classes, r.expected_branched);
        assert_eq!(r.distinct_branched_surfaces, r.expected_branched);
    }
}
