//! The modular fiber `F_d(1,1)` as a square-tiled surface.
//!
//! Its squares are the classes of primitive degree-`d` torus covers with two
//! simple branch points, the moving one sitting at the center of the base
//! square. Right and top neighbors are given by pushing the moving branch
//! point once around the horizontal and vertical loops of the base torus.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{fiber_invariants, FiberInvariants};
use crate::cover::{build, grid_step, pointpush, s_av_datum, CoverDatum, PushDirection};
use crate::error::{domain, internal, Error, Result};
use crate::geometry::{horizontal_cylinders, horizontal_saddle_connections};
use crate::origami::Origami;
use crate::perm::{canonical_tuple, is_transitive, Perm};
use crate::sl2z::{act_s, act_t, minus_id_involution, orbit, Involution};

/// Reference branch point: the center of the base square on a 2×2 grid.
pub const REF_BRANCH: (i64, i64) = (1, 1);
pub const REF_DENOM: i64 = 2;
pub const MAX_DEGREE: usize = 8;

/// All permutations of `0..d` in lexicographic order.
pub fn all_perms(d: usize) -> Vec<Perm> {
    let mut cur: Vec<usize> = (0..d).collect();
    let mut out = vec![Perm::new(cur.clone()).unwrap()];
    while let Some(i) = (1..d).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..d).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Perm::new(cur.clone()).unwrap());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberClass {
    /// Canonical `(h, v, c1)`.
    pub key: [Perm; 3],
    pub centralizer: usize,
}

impl FiberClass {
    pub fn datum(&self) -> CoverDatum {
        let [h, v, c1] = self.key.clone();
        CoverDatum::new(h, v, c1, REF_BRANCH, REF_DENOM).expect("enumerated data are valid")
    }
}

#[derive(Debug, Clone)]
pub struct FiberEnumeration {
    pub degree: usize,
    /// Sorted by key.
    pub classes: Vec<FiberClass>,
    /// Number of primitive monodromy tuples.
    pub tuple_count: u64,
    /// Classes of connected covers whose period lattice is a proper sublattice.
    pub imprimitive_classes: usize,
    pub weighted_total: BigRational,
}

/// Whether the cover's absolute periods generate all of `Z²`.
pub fn is_primitive(datum: &CoverDatum) -> Result<bool> {
    Ok(build(datum)?.period_lattice()?.is_scaled_standard(1.into()))
}

/// Monodromy tuples `(h, v, c0, c1)` with `c0`, `c1` transpositions,
/// transitive and primitive, up to simultaneous conjugation, each class
/// weighted by the inverse order of its centralizer.
pub fn enumerate_fiber(d: usize) -> Result<FiberEnumeration> {
    if !(2..=MAX_DEGREE).contains(&d) {
        return domain(format!("fiber enumeration supports 2 <= d <= {MAX_DEGREE}, got {d}"));
    }
    let perms = all_perms(d);
    let transpositions: Vec<&Perm> = perms.iter().filter(|p| p.is_transposition()).collect();
    let found: Vec<BTreeMap<[Perm; 3], usize>> = perms
        .par_iter()
        .map(|h| {
            let mut local = BTreeMap::new();
            let hi = h.inverse();
            for v in &perms {
                let comm = h.compose(v).compose(&hi).compose(&v.inverse());
                let moved = comm.images().iter().enumerate().filter(|(i, &x)| *i != x).count();
                if moved > 4 {
                    continue;
                }
                for &c1 in &transpositions {
                    let c0 = comm.compose(c1);
                    if !c0.is_transposition() || !is_transitive(&[h, v, c1]) {
                        continue;
                    }
                    let (key, cent) = canonical_tuple(&[h, v, c1]).expect("transitive");
                    let key: [Perm; 3] = key.try_into().expect("three generators");
                    local.entry(key).or_insert(cent);
                }
            }
            local
        })
        .collect();
    let mut all: BTreeMap<[Perm; 3], usize> = BTreeMap::new();
    for m in found {
        all.extend(m);
    }
    let candidates: Vec<FiberClass> =
        all.into_iter().map(|(key, centralizer)| FiberClass { key, centralizer }).collect();
    let prim: Vec<bool> = candidates.par_iter().map(|c| is_primitive(&c.datum())).collect::<Result<_>>()?;
    let imprimitive_classes = prim.iter().filter(|&&p| !p).count();
    let classes: Vec<FiberClass> = candidates.into_iter().zip(prim).filter(|(_, p)| *p).map(|(c, _)| c).collect();
    let fact: u64 = (1..=d as u64).product();
    let tuple_count = classes.iter().map(|c| fact / c.centralizer as u64).sum();
    let weighted_total = classes.iter().fold(BigRational::from_integer(0.into()), |acc, c| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(c.centralizer))
    });
    Ok(FiberEnumeration { degree: d, classes, tuple_count, imprimitive_classes, weighted_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    /// Zero of order 2: the two branch points merge into a double zero.
    Cone,
    /// Regular vertex along which a saddle connection between the branch
    /// points shrinks to zero length.
    Degenerate,
    /// Regular vertex with no shrinking saddle connection.
    Coincident,
}

#[derive(Debug, Clone)]
pub struct FiberSurface {
    pub degree: usize,
    pub origami: Origami,
    pub enumeration: FiberEnumeration,
}

impl FiberSurface {
    pub fn class_of(&self, datum: &CoverDatum) -> Option<usize> {
        let key: [Perm; 3] = datum.class_key().try_into().ok()?;
        self.enumeration.classes.binary_search_by(|c| c.key.cmp(&key)).ok()
    }
}

fn class_index(index: &HashMap<[Perm; 3], usize>, datum: &CoverDatum) -> Result<usize> {
    let key: [Perm; 3] = datum.class_key().try_into().expect("three generators");
    index.get(&key).copied().ok_or_else(|| Error::Internal("point push left the set of primitive covers".into()))
}

/// Assembles the fiber origami; squares are indexed like the sorted classes.
pub fn build_fiber_origami(d: usize) -> Result<FiberSurface> {
    let enumeration = enumerate_fiber(d)?;
    let index: HashMap<[Perm; 3], usize> =
        enumeration.classes.iter().enumerate().map(|(i, c)| (c.key.clone(), i)).collect();
    let maps: Vec<(usize, usize)> = enumeration
        .classes
        .par_iter()
        .map(|c| {
            let datum = c.datum();
            let right = pointpush(&datum, PushDirection::H, 1)?;
            let up = pointpush(&datum, PushDirection::V, 1)?;
            for (dir, img) in [(PushDirection::H, &right), (PushDirection::V, &up)] {
                let back = pointpush(img, dir, -1)?;
                if back.class_key() != datum.class_key() {
                    return internal("point push is not inverted by the reverse push");
                }
            }
            Ok((class_index(&index, &right)?, class_index(&index, &up)?))
        })
        .collect::<Result<_>>()?;
    let h = Perm::new(maps.iter().map(|m| m.0).collect())?;
    let v = Perm::new(maps.iter().map(|m| m.1).collect())?;
    let origami = Origami::new(h, v, Rational64::from_integer(1), vec![])?;
    Ok(FiberSurface { degree: d, origami, enumeration })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialPoint {
    pub vertex_id: usize,
    pub angle_multiple: usize,
    pub zero_order: usize,
    pub kind: VertexKind,
    /// Saddle connections between the branch points that shrink to zero when
    /// the moving point approaches this vertex horizontally from the left.
    pub m_plus: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialPoints {
    pub points: Vec<SpecialPoint>,
    pub cone_count: usize,
    pub non_cone_count: usize,
    pub degenerate_count: usize,
    pub coincident_count: usize,
}

/// Number of horizontal length-one saddle connections running rightward from
/// the moving branch point to the fixed one, for the cover in `square` pushed
/// down onto the bottom edge of its cell.
fn shrinking_connections(f: &FiberSurface, square: usize) -> Result<usize> {
    let datum = f.enumeration.classes[square].datum();
    let on_edge = grid_step(&datum, 0, -1)?;
    let o = build(&on_edge)?;
    let z0 = o.marked_vertices(0);
    let z1 = o.marked_vertices(1);
    let sc = horizontal_saddle_connections(&o)?;
    Ok(sc.iter().filter(|s| s.length == 1 && z1.contains(&s.from_vertex) && z0.contains(&s.to_vertex)).count())
}

pub fn classify_special_points(f: &FiberSurface) -> Result<SpecialPoints> {
    let o = &f.origami;
    let hi = o.h().inverse();
    let m_by_square: Vec<usize> =
        (0..o.n_squares()).into_par_iter().map(|t| shrinking_connections(f, t)).collect::<Result<_>>()?;
    let mut points = Vec::new();
    for (id, cyc) in o.vertices().iter().enumerate() {
        // squares whose bottom-right corner is this vertex
        let ms: Vec<usize> = cyc.iter().map(|&s| m_by_square[hi.apply(s)]).collect();
        let k = cyc.len();
        let m_plus = ms[0];
        if k != 3 && ms.iter().any(|&m| m != m_plus) {
            return internal(format!("m+ differs around vertex {id}: {ms:?}"));
        }
        let kind = if k == 3 {
            VertexKind::Cone
        } else if m_plus > 0 {
            VertexKind::Degenerate
        } else {
            VertexKind::Coincident
        };
        points.push(SpecialPoint { vertex_id: id, angle_multiple: k, zero_order: k - 1, kind, m_plus });
    }
    let count = |kind| points.iter().filter(|p| p.kind == kind).count();
    let cone_count = count(VertexKind::Cone);
    let degenerate_count = count(VertexKind::Degenerate);
    let coincident_count = count(VertexKind::Coincident);
    if points.iter().any(|p| p.angle_multiple != 1 && p.angle_multiple != 3) {
        return internal("fiber vertex with cone angle other than 2π or 6π");
    }
    Ok(SpecialPoints {
        non_cone_count: degenerate_count + coincident_count,
        points,
        cone_count,
        degenerate_count,
        coincident_count,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientData {
    #[serde(skip)]
    pub involution: Involution,
    /// Fixed points of angle `π` in the quotient.
    pub n_minus1: usize,
    /// Fixed points of angle `3π` in the quotient.
    pub n_plus1: usize,
    pub euler_char: i64,
    pub euler_char_quotient: i64,
    pub spin: u8,
}

pub fn quotient_spin(f: &FiberSurface) -> Result<QuotientData> {
    let o = &f.origami;
    let Some(inv) = minus_id_involution(o)? else {
        return internal("the fiber has no involution with linear part -id");
    };
    let verts = o.vertices();
    let cone_fixed = inv.fixed_vertices.iter().filter(|&&v| verts[v].len() > 1).count();
    let total = inv.fixed_point_count();
    let chi = o.euler_char();
    if (chi + total as i64) % 2 != 0 {
        return internal("odd Euler characteristic for the quotient");
    }
    let chi_q = (chi + total as i64) / 2;
    let n_minus1 = total - cone_fixed;
    let n_plus1 = cone_fixed;
    if 2 * chi_q != n_minus1 as i64 - n_plus1 as i64 {
        return internal(format!("quotient identity fails: 2·{chi_q} != {n_minus1} - {n_plus1}"));
    }
    let spin = ((chi_q.abs() / 2) % 2) as u8;
    Ok(QuotientData { involution: inv, n_minus1, n_plus1, euler_char: chi, euler_char_quotient: chi_q, spin })
}

/// A fiber cylinder group: total fiber area and the horizontal widths (in
/// base units) shared by the covers parameterized by that area.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CylinderGroup {
    pub area: usize,
    pub widths: Vec<usize>,
}

/// Horizontal widths of the cover in `square`, in units of the base torus.
pub fn cover_widths(f: &FiberSurface, square: usize) -> Result<Vec<usize>> {
    let o = build(&f.enumeration.classes[square].datum())?;
    let dec = horizontal_cylinders(&o)?;
    let n = REF_DENOM as usize;
    if dec.cylinders.iter().any(|c| c.width % n != 0) {
        return internal("cover cylinder width is not a whole number of base units");
    }
    Ok(dec.widths().into_iter().map(|w| w / n).collect())
}

/// Groups the horizontal cylinders of the fiber by the widths of the covers
/// they parameterize (which are constant along each cylinder).
pub fn horizontal_groups(f: &FiberSurface) -> Result<Vec<CylinderGroup>> {
    let dec = horizontal_cylinders(&f.origami)?;
    let mut groups: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for c in &dec.cylinders {
        let squares: Vec<usize> = c.rows.iter().flatten().copied().collect();
        let w0 = cover_widths(f, squares[0])?;
        for &s in &squares[1..] {
            if cover_widths(f, s)? != w0 {
                return internal("cover widths vary along a fiber cylinder");
            }
        }
        *groups.entry(w0).or_default() += c.area();
    }
    let mut out: Vec<CylinderGroup> = groups.into_iter().map(|(widths, area)| CylinderGroup { area, widths }).collect();
    out.sort_by(|a, b| b.area.cmp(&a.area).then(a.widths.cmp(&b.widths)));
    Ok(out)
}

/// The horizontal fiber cylinder containing the cover `S_{a,(1/2,1/2)}`.
pub fn loop_cylinder(f: &FiberSurface, a: usize) -> Result<(usize, usize, Vec<usize>)> {
    let datum = s_av_datum(a, f.degree, REF_BRANCH, REF_DENOM)?;
    let sq = f.class_of(&datum).ok_or_else(|| Error::Internal("S_{a,v} is not a fiber square".into()))?;
    let dec = horizontal_cylinders(&f.origami)?;
    for c in dec.cylinders {
        if c.rows.iter().flatten().any(|&s| s == sq) {
            let squares = c.rows.iter().flatten().copied().collect();
            return Ok((c.width, c.height, squares));
        }
    }
    internal("square not covered by the horizontal decomposition")
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineChecks {
    /// The shear maps the loop cylinder onto itself.
    pub shear_stabilizes_loop_cylinder: bool,
    /// The rotation by `π/2` of the loop cylinder meets it in some square.
    pub rotation_overlaps_loop_cylinder: bool,
}

/// Checks on the affine images of the `S_{1,·}` loop cylinder.
pub fn affine_checks(f: &FiberSurface) -> Result<AffineChecks> {
    let (_, _, cyl) = loop_cylinder(f, 1)?;
    let o = &f.origami;
    let iso = |img: &Origami| -> Result<Perm> {
        img.isomorphism_to(o)?.ok_or_else(|| Error::Internal("fiber is not SL(2,Z)-invariant".into()))
    };
    let phi_t = iso(&act_t(o))?;
    let phi_s = iso(&act_s(o))?;
    let mut inside = vec![false; o.n_squares()];
    for &s in &cyl {
        inside[s] = true;
    }
    Ok(AffineChecks {
        shear_stabilizes_loop_cylinder: cyl.iter().all(|&s| inside[phi_t.apply(s)]),
        rotation_overlaps_loop_cylinder: cyl.iter().any(|&s| inside[phi_s.apply(s)]),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberVerification {
    pub degree: usize,
    pub invariants: FiberInvariants,
    pub checks: Vec<Check>,
}

impl FiberVerification {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the structural checks on the built fiber.
pub fn verify(d: usize) -> Result<FiberVerification> {
    let inv = fiber_invariants(d as u64)?;
    let f = build_fiber_origami(d)?;
    let o = &f.origami;
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| checks.push(Check { name: name.into(), passed, detail });
    let weighted = f.enumeration.weighted_total.clone();
    push(
        "squares",
        weighted == BigRational::from_integer(inv.square_count.into()),
        format!("weighted total {weighted}, expected {}", inv.square_count),
    );
    push("connect", o.is_connected(), format!("{} squares", o.n_squares()));
    let sp = classify_special_points(&f)?;
    push(
        "conecount",
        sp.cone_count as i64 == inv.cone_count,
        format!("{} cone points of angle 6π, expected {}", sp.cone_count, inv.cone_count),
    );
    push("genus", o.euler_char() == inv.euler_char, format!("χ = {}, expected {}", o.euler_char(), inv.euler_char));
    let q = quotient_spin(&f)?;
    push(
        "spin",
        q.euler_char_quotient == inv.euler_char_quotient && q.spin == inv.spin_parity,
        format!("χ/σ = {}, spin {}; n-1 = {}, n+1 = {}", q.euler_char_quotient, q.spin, q.n_minus1, q.n_plus1),
    );
    let orb = orbit(o, 1000)?;
    push("veech", orb.stabilizer_index == 1, format!("orbit size {}", orb.stabilizer_index));
    if d >= 3 {
        let per = o.period_lattice()?;
        push("periods", per.is_scaled_standard(2.into()), format!("{per:?}"));
        let (w, h, _) = loop_cylinder(&f, 1)?;
        let expect = d * (d - 1);
        push(
            "proposition-loop",
            w == expect && h == 1,
            format!("cylinder through S_1 has width {w} and height {h}, expected {expect} and 1"),
        );
    }
    Ok(FiberVerification { degree: d, invariants: inv, checks })
}
