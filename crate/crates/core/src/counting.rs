//! Counting cylinders and saddle connections by length, Siegel-Veech
//! estimates, and the exact evaluators of the Siegel-Veech formulas.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{format_rational, rational_to_f64};
use crate::error::{domain, Result};
use crate::geometry::{horizontal_cylinders, horizontal_saddle_connections};
use crate::origami::{Lattice2, Origami};
use crate::sl2z::{direction_matrix, orbit, Letter, OrbitRecord, DEFAULT_ORBIT_CAP};

/// `π/ζ(2) = 6/π`.
pub fn pi_over_zeta2() -> f64 {
    6.0 / std::f64::consts::PI
}

pub fn zeta2() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / 6.0
}

/// Integer data for comparing `len²·unit² <= T²` exactly: with
/// `unit = ua/ub` and `T = tn/td`, the test is `len²·ua²·td² <= tn²·ub²`.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lhs: u128,
    rhs: u128,
}

impl Scale {
    fn new(unit: Rational64, t: Rational64) -> Self {
        let (ua, ub) = (*unit.numer() as u128, *unit.denom() as u128);
        let (tn, td) = (*t.numer() as u128, *t.denom() as u128);
        Scale { lhs: ua * ua * td * td, rhs: tn * tn * ub * ub }
    }

    fn fits(&self, len2: u128) -> bool {
        len2 * self.lhs <= self.rhs
    }

    /// Largest `r` with `r² <= rhs/lhs`.
    fn radius(&self) -> i64 {
        let mut r = ((self.rhs as f64 / self.lhs as f64).sqrt()) as i64 + 2;
        while r > 0 && !self.fits((r * r) as u128) {
            r -= 1;
        }
        r
    }
}

fn check_t(t: Rational64) -> Result<()> {
    if t <= Rational64::from_integer(0) {
        return domain(format!("length bound must be positive, got {t}"));
    }
    Ok(())
}

/// Primitive directions `(p, q)` with `q > 0` or `q = 0, p > 0` such that
/// `step·(p, q)` fits under `scale`, grouped by `p` for parallel iteration.
fn half_plane_directions(scale: Scale, step: i64) -> impl ParallelIterator<Item = (i64, i64)> {
    let r = scale.radius() / step + 1;
    let s2 = (step * step) as u128;
    (-r..=r).into_par_iter().flat_map_iter(move |p| {
        (0..=r)
            .filter(move |&q| (q > 0 || p > 0) && scale.fits(s2 * (p * p + q * q) as u128) && p.gcd(&q) == 1)
            .map(move |q| (p, q))
    })
}

/// Least `k >= 1` with `k·(p, q)` in the lattice.
fn least_multiple_in(l: &Lattice2, p: i64, q: i64) -> i64 {
    let k0 = l.c / l.c.gcd(&q.abs());
    let x = k0 * p - (k0 * q / l.c) * l.b;
    let m = l.a / l.a.gcd(&x.abs());
    k0 * m
}

fn reduce_mod(l: &Lattice2, x: i64, y: i64) -> (i64, i64) {
    let j = y.div_euclid(l.c);
    let y0 = y - j * l.c;
    let x0 = (x - j * l.b).rem_euclid(l.a);
    (x0, y0)
}

/// Orbit of a surface with enough structure to find, for any primitive
/// direction `(p, q)`, the orbit element whose horizontal direction is
/// `(p, q)` on the original surface.
struct DirectionTable {
    /// `(cycle, position)` of each element in its `T`-cycle.
    t_pos: Vec<(usize, usize)>,
    t_cycles: Vec<Vec<usize>>,
    s_next: Vec<usize>,
}

impl DirectionTable {
    fn new(rec: &OrbitRecord) -> Self {
        let n = rec.elements.len();
        let mut t_pos = vec![(usize::MAX, 0); n];
        let mut t_cycles = Vec::new();
        for i in 0..n {
            if t_pos[i].0 != usize::MAX {
                continue;
            }
            let mut cyc = Vec::new();
            let mut j = i;
            while t_pos[j].0 == usize::MAX {
                t_pos[j] = (t_cycles.len(), cyc.len());
                cyc.push(j);
                j = rec.edges[j][0];
            }
            t_cycles.push(cyc);
        }
        DirectionTable { t_pos, t_cycles, s_next: rec.edges.iter().map(|e| e[1]).collect() }
    }

    fn apply(&self, i: usize, l: Letter) -> usize {
        match l {
            Letter::T(k) => {
                let (c, p) = self.t_pos[i];
                let cyc = &self.t_cycles[c];
                cyc[(p as i64 + k).rem_euclid(cyc.len() as i64) as usize]
            }
            Letter::S(k) => (0..k % 4).fold(i, |j, _| self.s_next[j]),
        }
    }

    /// Index of the image of the base under the matrix taking `(p, q)` to
    /// the horizontal.
    fn element_for(&self, p: i64, q: i64) -> Result<usize> {
        let m = direction_matrix(p, q)?;
        Ok(m.word().iter().rev().fold(0, |i, &l| self.apply(i, l)))
    }
}

fn orbit_table(o: &Origami) -> Result<(OrbitRecord, DirectionTable)> {
    let rec = orbit(o, DEFAULT_ORBIT_CAP)?;
    let table = DirectionTable::new(&rec);
    Ok((rec, table))
}

/// Squared holonomy lengths (in `unit²`) of all cylinders, one sign per
/// direction, with length at most `t`. Each entry stands for two cylinders.
fn cylinder_lengths(o: &Origami, t: Rational64) -> Result<Vec<u128>> {
    Ok(cylinder_breakdown_raw(o, t)?.into_iter().flat_map(|(_, l)| l).collect::<Vec<_>>()).map(|mut v| {
        v.par_sort_unstable();
        v
    })
}

/// A direction and the squared lengths of its cylinders.
type DirectionLengths = ((i64, i64), Vec<u128>);

fn cylinder_breakdown_raw(o: &Origami, t: Rational64) -> Result<Vec<DirectionLengths>> {
    check_t(t)?;
    o.require_connected()?;
    let per = o.period_lattice()?;
    let g = per.a.gcd(&per.b).gcd(&per.c);
    let scale = Scale::new(o.unit(), t);
    let (rec, table) = orbit_table(o)?;
    let widths: Vec<Vec<usize>> =
        rec.elements.iter().map(|e| Ok(horizontal_cylinders(e)?.widths())).collect::<Result<_>>()?;
    half_plane_directions(scale, g)
        .map(|(p, q)| -> Result<DirectionLengths> {
            let n2 = (p * p + q * q) as u128;
            let k = least_multiple_in(&per, p, q) as u128;
            if !scale.fits(k * k * n2) {
                return Ok(((p, q), vec![]));
            }
            let e = table.element_for(p, q)?;
            let lens = widths[e].iter().map(|&w| (w as u128).pow(2) * n2).filter(|&l| scale.fits(l)).collect();
            Ok(((p, q), lens))
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.is_empty()))
        .collect()
}

/// Number of cylinders (with multiplicity, both orientations) whose core
/// holonomy has length at most `t`.
pub fn count_cylinders(o: &Origami, t: Rational64) -> Result<u64> {
    Ok(2 * cylinder_lengths(o, t)?.len() as u64)
}

/// Per-direction cylinder counts up to `t`, for directions contributing at
/// least one cylinder (one sign per direction; the opposite sign contributes
/// the same amount).
pub fn cylinder_breakdown(o: &Origami, t: Rational64) -> Result<Vec<((i64, i64), usize)>> {
    let mut out: Vec<((i64, i64), usize)> =
        cylinder_breakdown_raw(o, t)?.into_iter().map(|(d, l)| (d, l.len())).collect();
    out.sort_unstable();
    Ok(out)
}

/// Squared lengths of saddle connections joining a vertex marked `labels.0`
/// and one marked `labels.1`, one orientation per segment.
fn saddle_lengths(o: &Origami, labels: (u32, u32), t: Rational64) -> Result<Vec<u128>> {
    check_t(t)?;
    o.require_connected()?;
    if labels.0 == labels.1 {
        return domain("saddle connection endpoints must be different mark classes");
    }
    let side = |l: u32| -> Vec<usize> { o.marks().iter().filter(|m| m.0 == l).map(|m| m.1).collect() };
    let (s0, s1) = (side(labels.0), side(labels.1));
    if s0.is_empty() || s1.is_empty() {
        return domain("both endpoint labels must be marked");
    }
    let (v0, v1) = (o.marked_vertices(labels.0), o.marked_vertices(labels.1));
    if v0.iter().any(|v| v1.contains(v)) {
        return domain("endpoint classes share a vertex");
    }
    let per = o.period_lattice()?;
    let (pos, _) = o.developing_map();
    let mut cosets: Vec<(i64, i64)> = Vec::new();
    for &a in &s0 {
        for &b in &s1 {
            let (dx, dy) = (pos[b].0 - pos[a].0, pos[b].1 - pos[a].1);
            cosets.push(reduce_mod(&per, dx, dy));
            cosets.push(reduce_mod(&per, -dx, -dy));
        }
    }
    cosets.sort_unstable();
    cosets.dedup();
    let index = per.a * per.c;
    let scale = Scale::new(o.unit(), t);
    let (rec, table) = orbit_table(o)?;
    let seg_lengths: Vec<Vec<usize>> = rec
        .elements
        .iter()
        .map(|e| -> Result<Vec<usize>> {
            let (w0, w1) = (e.marked_vertices(labels.0), e.marked_vertices(labels.1));
            Ok(horizontal_saddle_connections(e)?
                .into_iter()
                .filter(|s| {
                    (w0.contains(&s.from_vertex) && w1.contains(&s.to_vertex))
                        || (w1.contains(&s.from_vertex) && w0.contains(&s.to_vertex))
                })
                .map(|s| s.length)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut lens: Vec<u128> = half_plane_directions(scale, 1)
        .map(|(p, q)| -> Result<Vec<u128>> {
            let n2 = (p * p + q * q) as u128;
            let lmin = (1..=index).find(|&l| cosets.binary_search(&reduce_mod(&per, l * p, l * q)).is_ok());
            match lmin {
                Some(l) if scale.fits((l * l) as u128 * n2) => {}
                _ => return Ok(vec![]),
            }
            let e = table.element_for(p, q)?;
            Ok(seg_lengths[e].iter().map(|&l| (l as u128).pow(2) * n2).filter(|&l| scale.fits(l)).collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    lens.par_sort_unstable();
    Ok(lens)
}

/// Number of holonomy vectors of oriented saddle connections from either
/// endpoint class to the other, of length at most `t`.
pub fn count_saddle_connections(o: &Origami, labels: (u32, u32), t: Rational64) -> Result<u64> {
    Ok(2 * saddle_lengths(o, labels, t)?.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Cylinders,
    SaddleConnections,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    #[serde(serialize_with = "crate::export::ser_rational64")]
    pub t: Rational64,
    pub raw: u64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SvReport {
    pub surface: String,
    pub kind: CountKind,
    pub samples: Vec<Sample>,
    pub estimate: f64,
    pub spread: f64,
    pub formula_value: Option<String>,
    pub formula_f64: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Counts at each bound in `ts` (ascending), sharing one enumeration at the
/// largest bound. `normalize_area` multiplies by the surface area, giving the
/// constant of the area-one rescaling (lengths shrink by `√area`).
pub fn count_series(o: &Origami, kind: CountKind, ts: &[Rational64], normalize_area: bool) -> Result<Vec<Sample>> {
    let mut ts = ts.to_vec();
    ts.sort();
    let Some(&tmax) = ts.last() else {
        return domain("need at least one length bound");
    };
    let lens = match kind {
        CountKind::Cylinders => cylinder_lengths(o, tmax)?,
        CountKind::SaddleConnections => saddle_lengths(o, (0, 1), tmax)?,
    };
    let area = if normalize_area { rational64_f64(o.area()) } else { 1.0 };
    Ok(ts
        .into_iter()
        .map(|t| {
            let scale = Scale::new(o.unit(), t);
            let raw = 2 * lens.partition_point(|&l| scale.fits(l)) as u64;
            let tf = rational64_f64(t);
            Sample { t, raw, normalized: raw as f64 * area / (pi_over_zeta2() * tf * tf) }
        })
        .collect())
}

pub fn rational64_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(estimate, spread)`: the normalized value at the largest bound and the
/// spread of the three largest-bound values.
pub fn estimate_constant(samples: &[Sample]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return domain(format!("need at least 3 samples, got {}", samples.len()));
    }
    let mut s: Vec<&Sample> = samples.iter().collect();
    s.sort_by_key(|a| a.t);
    let top: Vec<f64> = s[s.len() - 3..].iter().map(|x| x.normalized).collect();
    let max = top.iter().cloned().fold(f64::MIN, f64::max);
    let min = top.iter().cloned().fold(f64::MAX, f64::min);
    Ok((top[2], max - min))
}

pub fn build_report(
    surface: &str,
    kind: CountKind,
    samples: Vec<Sample>,
    formula: Option<&BigRational>,
) -> Result<SvReport> {
    let (estimate, spread) = estimate_constant(&samples)?;
    let formula_f64 = formula.map(rational_to_f64);
    Ok(SvReport {
        surface: surface.to_string(),
        kind,
        samples,
        estimate,
        spread,
        formula_value: formula.map(format_rational),
        formula_f64,
        relative_error: formula_f64.map(|f| (estimate - f).abs() / f.abs()),
    })
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn inverse_square_sum(widths: &[u64]) -> Result<BigRational> {
    if widths.contains(&0) {
        return domain("widths must be positive");
    }
    Ok(widths
        .iter()
        .fold(BigRational::zero(), |acc, &w| acc + BigRational::new(1.into(), BigInt::from(w) * BigInt::from(w))))
}

/// `(1/area_F) Σ_i Σ_k area(C_i)/w_{i,k}²`.
pub fn sv_formula_generic(area_f: &BigRational, groups: &[(BigRational, Vec<u64>)]) -> Result<BigRational> {
    if groups.is_empty() {
        return domain("need at least one cylinder group");
    }
    if area_f <= &BigRational::zero() || groups.iter().any(|g| g.0 <= BigRational::zero()) {
        return domain("areas must be positive");
    }
    let mut sum = BigRational::zero();
    for (area, widths) in groups {
        sum += area * inverse_square_sum(widths)?;
    }
    Ok(sum / area_f)
}

/// `(1/|O|) [Σ_i count_i Σ_k 1/w_{i,k}² + Σ_j count_j Σ_k 1/w_{j,k}²]` over
/// interior and boundary orbit points.
pub fn sv_formula_finite(
    orbit_size: u64,
    interior: &[(u64, Vec<u64>)],
    boundary: &[(u64, Vec<u64>)],
) -> Result<BigRational> {
    let total: u64 = interior.iter().chain(boundary).map(|g| g.0).sum();
    if orbit_size == 0 || total != orbit_size {
        return domain(format!("counts sum to {total}, orbit size is {orbit_size}"));
    }
    let mut sum = BigRational::zero();
    for (count, widths) in interior.iter().chain(boundary) {
        sum += big(*count as i64) * inverse_square_sum(widths)?;
    }
    Ok(sum / big(orbit_size as i64))
}

/// `(2/|O|) Σ m⁺/(s⁺)²` over incidences of orbit points with saddle connections.
pub fn sv_formula_sc_finite(orbit_size: u64, incidences: &[(u64, BigRational)]) -> Result<BigRational> {
    if orbit_size == 0 {
        return domain("orbit size must be positive");
    }
    let mut sum = BigRational::zero();
    for (m, s) in incidences {
        if s <= &BigRational::zero() {
            return domain("saddle connection lengths must be positive");
        }
        sum += big(*m as i64) / (s * s);
    }
    Ok(sum * big(2) / big(orbit_size as i64))
}

/// A rational multiple of `ζ(2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaMultiple {
    pub coefficient: BigRational,
}

impl ZetaMultiple {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coefficient) * zeta2()
    }
}

/// `(2ζ(2)/area_F) Σ m⁺_i (o_i + 1)`.
pub fn sv_formula_sc_generic(area_f: &BigRational, points: &[(u64, u64)]) -> Result<ZetaMultiple> {
    if points.is_empty() {
        return domain("need at least one special point");
    }
    if area_f <= &BigRational::zero() {
        return domain("area must be positive");
    }
    let s: u64 = points.iter().map(|&(m, o)| m * (o + 1)).sum();
    Ok(ZetaMultiple { coefficient: big(2 * s as i64) / area_f })
}

/// Independent brute-force counts for the two-marked torus, with no
/// reference to origamis.
pub mod oracle {
    use super::*;

    /// Cylinders on `R²/Z²` marked at `0` and `(a/n, b/n)`: each primitive
    /// `(p, q)` of length at most `t` carries two cylinders, or one when the
    /// mark lies on the closed leaf through the origin (`pb ≡ qa mod n`).
    pub fn marked_torus_cylinders(n: i64, a: i64, b: i64, t: Rational64) -> u64 {
        let scale = Scale::new(1.into(), t);
        let r = scale.radius();
        let mut count = 0;
        for p in -r..=r {
            for q in -r..=r {
                if (p, q) == (0, 0) || p.gcd(&q) != 1 || !scale.fits((p * p + q * q) as u128) {
                    continue;
                }
                count += if (p * b - q * a).rem_euclid(n) == 0 { 1 } else { 2 };
            }
        }
        count
    }

    /// Oriented saddle connections between `0` and `m = (a/n, b/n)`: vectors
    /// `w ∈ m + Z²` of length at most `t` whose open segment `(0, w)` avoids
    /// `Z² ∪ (m + Z²)`, counted twice (once per orientation).
    pub fn marked_torus_saddles(n: i64, a: i64, b: i64, t: Rational64) -> u64 {
        let scale = Scale::new(Rational64::new(1, n), t);
        let r = scale.radius();
        let mut count = 0;
        for x in -r..=r {
            if (x - a).rem_euclid(n) != 0 {
                continue;
            }
            for y in -r..=r {
                if (y - b).rem_euclid(n) != 0 || !scale.fits((x * x + y * y) as u128) {
                    continue;
                }
                let g = x.abs().gcd(&y.abs());
                let blocked = (1..g).any(|k| {
                    let (px, py) = (k * x / g, k * y / g);
                    (px.rem_euclid(n) == 0 && py.rem_euclid(n) == 0)
                        || ((px - a).rem_euclid(n) == 0 && (py - b).rem_euclid(n) == 0)
                });
                if !blocked {
                    count += 1;
                }
            }
        }
        2 * count
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| rational_to_f64(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn torus_cylinder_counts() {
        let t = Origami::torus();
        assert_eq!(count_cylinders(&t, 1.into()).unwrap(), 4);
        assert_eq!(count_cylinders(&t, 2.into()).unwrap(), 8);
        assert!(count_cylinders(&t, 0.into()).is_err());
    }

    #[test]
    fn marked_torus_counts_small() {
        let m = Origami::marked_torus(2, 1, 0).unwrap();
        assert_eq!(count_cylinders(&m, 1.into()).unwrap(), 6);
        assert_eq!(count_saddle_connections(&m, (0, 1), Rational64::new(1, 2)).unwrap(), 4);
        assert_eq!(oracle::marked_torus_saddles(2, 1, 0, Rational64::new(1, 2)), 4);
        assert!(count_saddle_connections(&m, (0, 0), 1.into()).is_err());
    }

    #[test]
    fn estimator() {
        let s: Vec<Sample> = (1..=4).map(|k| Sample { t: k.into(), raw: 0, normalized: 1.5 }).collect();
        assert_eq!(estimate_constant(&s).unwrap(), (1.5, 0.0));
        assert!(estimate_constant(&s[..2]).is_err());
    }

    #[test]
    fn generic_formula_examples() {
        let one = r(1, 1);
        assert_eq!(sv_formula_generic(&one, &[(one.clone(), vec![1, 1])]).unwrap(), r(2, 1));
        assert_eq!(sv_formula_generic(&one, &[(one.clone(), vec![1])]).unwrap(), r(1, 1));
        let f3 = sv_formula_generic(&r(16, 1), &[(r(12, 1), vec![1, 2, 3]), (r(4, 1), vec![1, 1, 2])]);
        assert_eq!(f3.unwrap(), r(19, 12));
        assert!(sv_formula_generic(&one, &[]).is_err());
    }

    #[test]
    fn finite_formula_examples() {
        // marked torus of order n: φ(ψ-1) interior points, φ boundary points
        let n2 = sv_formula_finite(3, &[(2, vec![1, 1])], &[(1, vec![1])]).unwrap();
        assert_eq!(n2, r(5, 3));
        let n3 = sv_formula_finite(8, &[(6, vec![1, 1])], &[(2, vec![1])]).unwrap();
        assert_eq!(n3, r(7, 4));
        assert_eq!(sv_formula_finite(5, &[(5, vec![1, 1])], &[]).unwrap(), r(2, 1));
        assert!(sv_formula_finite(4, &[(1, vec![1])], &[]).is_err());
    }

    #[test]
    fn saddle_formula_examples() {
        assert_eq!(sv_formula_sc_finite(3, &[(1, r(1, 2))]).unwrap(), r(8, 3));
        assert_eq!(sv_formula_sc_finite(8, &[(1, r(1, 3)), (1, r(2, 3))]).unwrap(), r(45, 16));
        assert_eq!(sv_formula_sc_finite(1, &[(1, r(1, 1))]).unwrap(), r(2, 1));
        assert!(sv_formula_sc_finite(1, &[(1, r(0, 1))]).is_err());
        let g = sv_formula_sc_generic(&r(1, 1), &[(1, 0)]).unwrap();
        assert_eq!(g.coefficient, r(2, 1));
        assert_eq!(sv_formula_sc_generic(&r(2, 1), &[(1, 0)]).unwrap().coefficient, r(1, 1));
        assert_eq!(sv_formula_sc_generic(&r(1, 1), &[(1, 0), (1, 2)]).unwrap().coefficient, r(8, 1));
        assert!(sv_formula_sc_generic(&r(1, 1), &[]).is_err());
    }

    #[test]
    fn lattice_multiples() {
        let l = Lattice2 { a: 2, b: 1, c: 2, unit: 1.into() };
        for (p, q) in [(1, 0), (0, 1), (1, 1), (3, 2), (-1, 4)] {
            let k = least_multiple_in(&l, p, q);
            assert!(l.contains(k * p, k * q));
            assert!((1..k).all(|j| !l.contains(j * p, j * q)));
        }
    }
}
