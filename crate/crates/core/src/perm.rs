//! Permutations of `{0..n-1}` and simultaneous relabeling of permutation tuples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation stored as its image vector: `p[i]` is the image of `i`.
///
/// Composition follows function notation: `a.compose(&b)` is `a ∘ b`, i.e.
/// `b` is applied first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::Domain(format!("not a permutation of 0..{n}: {images:?}")));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    pub(crate) fn from_vec_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Perm::new(images.clone()).is_ok());
        Perm(images)
    }

    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Builds a permutation of `0..n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut p: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x >= n {
                    return Err(Error::Domain(format!("cycle entry {x} out of range 0..{n}")));
                }
                if touched[x] {
                    return Err(Error::Domain(format!("cycles are not disjoint at {x}")));
                }
                touched[x] = true;
                p[x] = c[(i + 1) % c.len()];
            }
        }
        Ok(Perm(p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut r = vec![0; self.len()];
        for (i, &x) in self.0.iter().enumerate() {
            r[x] = i;
        }
        Perm(r)
    }

    pub fn pow(&self, k: i64) -> Perm {
        let mut out = vec![0; self.len()];
        for c in self.cycles() {
            let len = c.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (i, &x) in c.iter().enumerate() {
                out[x] = c[(i + shift) % c.len()];
            }
        }
        Perm(out)
    }

    /// `self ∘ other ∘ self⁻¹`.
    pub fn conjugate(&self, other: &Perm) -> Perm {
        self.compose(other).compose(&self.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Disjoint cycles including fixed points, each starting at its least element,
    /// ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let mut c = Vec::new();
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                c.push(j);
                j = self.0[j];
            }
            out.push(c);
        }
        out
    }

    /// Cycle lengths sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn is_transposition(&self) -> bool {
        let moved = self.0.iter().enumerate().filter(|(i, &x)| *i != x).count();
        moved == 2
    }

    /// Parses disjoint-cycle notation such as `(0,1,2)(3,4)`; `()` or the empty
    /// string is the identity.
    pub fn parse_cycles(n: usize, s: &str) -> Result<Perm> {
        let s = s.trim();
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let rest_trim = rest.trim_start();
            let Some(body) = rest_trim.strip_prefix('(') else {
                return Err(Error::Parse(format!("expected '(' in cycle string {s:?}")));
            };
            let Some(end) = body.find(')') else {
                return Err(Error::Parse(format!("unterminated cycle in {s:?}")));
            };
            let inner = body[..end].trim();
            if !inner.is_empty() {
                let c = inner
                    .split([',', ' '])
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                cycles.push(c);
            }
            rest = body[end + 1..].trim_start();
        }
        Perm::from_cycles(n, &cycles)
    }
}

impl fmt::Display for Perm {
    /// Disjoint-cycle notation omitting fixed points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(usize::to_string).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{self}")
    }
}

/// Orbit of `start` under the group generated by `gens`.
pub fn orbit_of(gens: &[&Perm], start: usize) -> Vec<usize> {
    let n = gens.first().map_or(0, |g| g.len());
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut out = vec![start];
    let invs: Vec<Perm> = gens.iter().map(|g| g.inverse()).collect();
    while let Some(x) = stack.pop() {
        for g in gens.iter().copied().chain(invs.iter()) {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                out.push(y);
                stack.push(y);
            }
        }
    }
    out
}

pub fn is_transitive(gens: &[&Perm]) -> bool {
    match gens.first() {
        None => true,
        Some(g) if g.is_empty() => true,
        Some(g) => orbit_of(gens, 0).len() == g.len(),
    }
}

/// Relabeling obtained by breadth-first search from `start`, visiting the images
/// under each generator and then its inverse, in generator order. Returns
/// `order` (new label -> old label), or `None` if the action is not transitive.
pub(crate) fn bfs_order(gens: &[&Perm], invs: &[Perm], start: usize) -> Option<Vec<usize>> {
    let n = gens[0].len();
    let mut label = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    label[start] = 0;
    order.push(start);
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        k += 1;
        for (g, gi) in gens.iter().zip(invs) {
            for y in [g.apply(x), gi.apply(x)] {
                if label[y] == usize::MAX {
                    label[y] = order.len();
                    order.push(y);
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Relabels `p` by `order` (new label -> old label).
pub(crate) fn relabel(p: &Perm, order: &[usize], label_of: &[usize]) -> Perm {
    Perm(order.iter().map(|&old| label_of[p.apply(old)]).collect())
}

pub(crate) fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut label_of = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        label_of[old] = new;
    }
    label_of
}

/// Canonical representative of a transitive permutation tuple under simultaneous
/// conjugation, together with the order of its centralizer.
///
/// The representative is the lexicographically least tuple among all BFS
/// relabelings; the centralizer order is the number of starting points that
/// reproduce it.
pub fn canonical_tuple(gens: &[&Perm]) -> Option<(Vec<Perm>, usize)> {
    let n = gens.first()?.len();
    let invs: Vec<Perm> = gens.iter().map(|g| g.inverse()).collect();
    let mut best: Option<Vec<Perm>> = None;
    let mut count = 0;
    for start in 0..n {
        let order = bfs_order(gens, &invs, start)?;
        let label_of = inverse_order(&order);
        let cand: Vec<Perm> = gens.iter().map(|g| relabel(g, &order, &label_of)).collect();
        match &best {
            Some(b) if cand > *b => {}
            Some(b) if cand == *b => count += 1,
            _ => {
                best = Some(cand);
                count = 1;
            }
        }
    }
    best.map(|b| (b, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_first() {
        let a = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let b = Perm::from_cycles(3, &[vec![1, 2]]).unwrap();
        // b first: 1 -> 2, then a fixes 2
        assert_eq!(a.compose(&b).apply(1), 2);
        assert_eq!(b.compose(&a).apply(1), 0);
    }

    #[test]
    fn cycle_string_round_trip() {
        let p = Perm::parse_cycles(6, "(0,3,5)(1,2)").unwrap();
        assert_eq!(p.to_string(), "(0,3,5)(1,2)");
        assert_eq!(Perm::parse_cycles(4, "()").unwrap(), Perm::identity(4));
        assert_eq!(Perm::parse_cycles(4, "").unwrap(), Perm::identity(4));
        assert!(Perm::parse_cycles(3, "(0,1)(1,2)").is_err());
        assert!(Perm::parse_cycles(3, "(0,7)").is_err());
    }

    #[test]
    fn canonical_tuple_detects_centralizer() {
        let c = Perm::from_cycles(3, &[vec![0, 1, 2]]).unwrap();
        let (_, cent) = canonical_tuple(&[&c]).unwrap();
        assert_eq!(cent, 3);
        let t = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let (_, cent) = canonical_tuple(&[&c, &t]).unwrap();
        assert_eq!(cent, 1);
    }

    #[test]
    fn conjugate_tuples_share_canonical_form() {
        let h = Perm::from_cycles(4, &[vec![0, 1, 2]]).unwrap();
        let v = Perm::from_cycles(4, &[vec![2, 3]]).unwrap();
        let g = Perm::from_cycles(4, &[vec![0, 3, 1]]).unwrap();
        let a = canonical_tuple(&[&h, &v]).unwrap();
        let b = canonical_tuple(&[&g.conjugate(&h), &g.conjugate(&v)]).unwrap();
        assert_eq!(a, b);
    }
}
