//! Multiplicative number theory and the closed-form constants of the modular
//! fibers, in exact arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, internal, Result};

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn euler_phi(n: u64) -> Result<u64> {
    if n == 0 {
        return domain("euler_phi(0) is undefined");
    }
    Ok(factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

pub fn dedekind_psi(n: u64) -> Result<u64> {
    if n == 0 {
        return domain("dedekind_psi(0) is undefined");
    }
    Ok(factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1)))
}

pub fn moebius_mu(n: u64) -> Result<i8> {
    if n == 0 {
        return domain("moebius_mu(0) is undefined");
    }
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len().is_multiple_of(2) { 1 } else { -1 })
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn as_integer(r: &BigRational, what: &str, d: u64) -> Result<i64> {
    if !r.is_integer() {
        return internal(format!("{what} is not integral at d={d}: {r}"));
    }
    r.to_integer().to_i64().ok_or_else(|| crate::Error::Internal(format!("{what} overflows i64 at d={d}")))
}

/// Counts attached to the modular fiber of degree `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberInvariants {
    pub degree: u64,
    /// Zeros of the fiber differential (all of order 2).
    pub cone_count: i64,
    pub degenerate_count: i64,
    /// Unit squares tiling the fiber (weighted Hurwitz count).
    pub square_count: i64,
    /// Euler characteristic of the compactified fiber.
    pub euler_char: i64,
    /// Euler characteristic of the quotient by the `-id` involution.
    pub euler_char_quotient: i64,
    pub spin_parity: u8,
}

pub fn fiber_invariants(d: u64) -> Result<FiberInvariants> {
    if d < 2 {
        return domain(format!("fiber invariants need d >= 2, got {d}"));
    }
    let pp = rat((euler_phi(d)? * dedekind_psi(d)?) as i64, 1);
    let di = d as i64;
    let cone = rat(3 * (di - 2), 8) * &pp;
    let squares = rat((di - 1) * di, 3) * &pp;
    let chi = rat(-3 * (di - 2), 4) * &pp;
    let (degenerate, chi_q) =
        if d == 2 { (rat(4, 1), rat(2, 1)) } else { (rat(5 * di + 6, 24) * &pp, rat(-(di - 6), 12) * &pp) };
    let inv = FiberInvariants {
        degree: d,
        cone_count: as_integer(&cone, "cone count", d)?,
        degenerate_count: as_integer(&degenerate, "degenerate count", d)?,
        square_count: as_integer(&squares, "square count", d)?,
        euler_char: as_integer(&chi, "Euler characteristic", d)?,
        euler_char_quotient: as_integer(&chi_q, "quotient Euler characteristic", d)?,
        spin_parity: spin_parity_rule(d)?,
    };
    if inv.euler_char % 2 != 0 {
        return internal(format!("odd Euler characteristic at d={d}"));
    }
    Ok(inv)
}

/// Spin parity of the quotient quadratic differential by the three-branch rule
/// (small degrees, even degrees, odd degrees).
pub fn spin_parity_rule(d: u64) -> Result<u8> {
    if d < 2 {
        return domain(format!("spin parity needs d >= 2, got {d}"));
    }
    if d <= 5 {
        return Ok(1);
    }
    if d.is_multiple_of(2) {
        return Ok(0);
    }
    let pp = euler_phi(d)? * dedekind_psi(d)?;
    if pp % 24 != 0 {
        return internal(format!("phi*psi not divisible by 24 at d={d}"));
    }
    Ok(((pp / 24) % 2) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvKind {
    MarkedTorusCylinders,
    MarkedTorusSaddles,
    DSymmetricCylinders,
}

/// Closed-form Siegel-Veech constants as exact rationals.
///
/// * marked torus, torsion point of order `n`: cylinders `2 - 1/ψ(n)`,
///   saddle connections `(2n²/(φψ)) Σ_{(k,n)=1, 0<k<n} 1/k²`;
/// * `n`-symmetric covers with infinite orbit: `2 Σ_{e | n} φ(e)/e³`, the sum
///   running over all divisors.
pub fn sv_closed_form(kind: SvKind, n: u64) -> Result<BigRational> {
    if n == 0 {
        return domain("sv_closed_form needs n >= 1");
    }
    match kind {
        SvKind::MarkedTorusCylinders | SvKind::MarkedTorusSaddles if n == 1 => {
            domain("marked torus with n = 1 places both marks at the origin")
        }
        SvKind::MarkedTorusCylinders => Ok(rat(2, 1) - rat(1, dedekind_psi(n)? as i64)),
        SvKind::MarkedTorusSaddles => {
            let pp = (euler_phi(n)? * dedekind_psi(n)?) as i64;
            let ni = n as i64;
            let sum = (1..ni).filter(|k| k.gcd(&ni) == 1).fold(BigRational::zero(), |acc, k| acc + rat(1, k * k));
            Ok(rat(2 * ni * ni, pp) * sum)
        }
        SvKind::DSymmetricCylinders => {
            let mut sum = BigRational::zero();
            for e in divisors(n) {
                let e3 = BigInt::from(e).pow(3);
                sum += BigRational::new(BigInt::from(euler_phi(e)?), e3);
            }
            Ok(sum * rat(2, 1))
        }
    }
}

/// Right-hand side of the Möbius inversion of the symmetric-cover constant:
/// `(n³/2) Σ_{e|n} μ(n/e) c(e)`, which must equal `φ(n)`.
pub fn moebius_recovered_phi(n: u64) -> Result<BigRational> {
    let mut sum = BigRational::zero();
    for e in divisors(n) {
        let mu = moebius_mu(n / e)?;
        if mu != 0 {
            sum += sv_closed_form(SvKind::DSymmetricCylinders, e)? * rat(mu as i64, 1);
        }
    }
    Ok(sum * BigRational::new(BigInt::from(n).pow(3), BigInt::from(2)))
}

/// `n² ∏_{p|n} (1 - 1/p²)`.
pub fn phi_psi_product(n: u64) -> BigRational {
    let mut r = BigRational::from_integer(BigInt::from(n) * BigInt::from(n));
    for (p, _) in factorize(n) {
        let p2 = BigInt::from(p) * BigInt::from(p);
        r *= BigRational::one() - BigRational::new(BigInt::one(), p2);
    }
    r
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // fall back through a scaled quotient
        let scale = BigInt::from(10u64).pow(18);
        let q = (r.numer() * &scale) / r.denom();
        q.to_f64().unwrap_or(f64::NAN) / 1e18
    }
}

/// Renders an exact rational as `p/q` (or `p` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|e| crate::Error::Parse(format!("{t:?}: {e}")));
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse(q)?;
            if q.is_zero() {
                return Err(crate::Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse(p)?, q))
        }
        None => Ok(BigRational::from_integer(parse(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_phi(n: u64) -> u64 {
        (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn phi_examples_against_unit_count() {
        for (n, want) in [(1, 1), (6, 2), (12, 4)] {
            assert_eq!(euler_phi(n).unwrap(), want);
            assert_eq!(brute_phi(n), want);
        }
        for n in 1..200 {
            assert_eq!(euler_phi(n).unwrap(), brute_phi(n));
        }
    }

    #[test]
    fn psi_and_mu_examples() {
        assert_eq!(dedekind_psi(1).unwrap(), 1);
        assert_eq!(dedekind_psi(2).unwrap(), 3);
        assert_eq!(dedekind_psi(6).unwrap(), 12);
        assert_eq!(moebius_mu(1).unwrap(), 1);
        assert_eq!(moebius_mu(4).unwrap(), 0);
        assert_eq!(moebius_mu(6).unwrap(), 1);
        assert_eq!(moebius_mu(30).unwrap(), -1);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(euler_phi(0).is_err());
        assert!(dedekind_psi(0).is_err());
        assert!(moebius_mu(0).is_err());
        assert!(fiber_invariants(1).is_err());
        assert!(sv_closed_form(SvKind::MarkedTorusCylinders, 1).is_err());
        assert!(sv_closed_form(SvKind::MarkedTorusSaddles, 1).is_err());
    }

    #[test]
    fn fiber_invariants_small_degrees() {
        let f2 = fiber_invariants(2).unwrap();
        assert_eq!((f2.cone_count, f2.degenerate_count, f2.square_count, f2.euler_char), (0, 4, 2, 0));
        assert_eq!((f2.euler_char_quotient, f2.spin_parity), (2, 1));
        let f3 = fiber_invariants(3).unwrap();
        assert_eq!((f3.cone_count, f3.degenerate_count, f3.square_count, f3.euler_char), (3, 7, 16, -6));
        assert_eq!((f3.euler_char_quotient, f3.spin_parity), (2, 1));
        let f6 = fiber_invariants(6).unwrap();
        assert_eq!((f6.cone_count, f6.degenerate_count, f6.square_count, f6.euler_char), (36, 36, 240, -72));
        assert_eq!((f6.euler_char_quotient, f6.spin_parity), (0, 0));
    }

    #[test]
    fn closed_forms() {
        let r = |p, q| rat(p, q);
        assert_eq!(sv_closed_form(SvKind::MarkedTorusCylinders, 2).unwrap(), r(5, 3));
        assert_eq!(sv_closed_form(SvKind::MarkedTorusSaddles, 2).unwrap(), r(8, 3));
        assert_eq!(sv_closed_form(SvKind::MarkedTorusSaddles, 3).unwrap(), r(45, 16));
        assert_eq!(sv_closed_form(SvKind::DSymmetricCylinders, 1).unwrap(), r(2, 1));
        assert_eq!(sv_closed_form(SvKind::DSymmetricCylinders, 6).unwrap(), r(29, 12));
    }

    #[test]
    fn spin_rule_matches_quotient_characteristic() {
        for d in 3..300 {
            let f = fiber_invariants(d).unwrap();
            let from_chi = ((f.euler_char_quotient.abs() / 2) % 2) as u8;
            assert_eq!(f.spin_parity, from_chi, "d={d}");
            assert_eq!(f.euler_char_quotient % 2, 0, "d={d}");
        }
    }

    #[test]
    fn rational_text_round_trip() {
        let x = rat(-29, 12);
        assert_eq!(format_rational(&x), "-29/12");
        assert_eq!(parse_rational("-29/12").unwrap(), x);
        assert_eq!(parse_rational("4").unwrap(), rat(4, 1));
        assert!(parse_rational("1/0").is_err());
    }
}
