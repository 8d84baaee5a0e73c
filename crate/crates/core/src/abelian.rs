//! Finitely generated abelian groups given as direct sums of cyclic groups.
//!
//! Order 0 stands for `Z`; order `n >= 1` for `Z/n`. Coefficients of finite
//! summands are kept in `0..n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicSummand {
    pub order: u64,
}

impl CyclicSummand {
    pub fn free() -> Self {
        CyclicSummand { order: 0 }
    }

    pub fn torsion(order: u64) -> Self {
        CyclicSummand { order }
    }

    pub fn is_free(&self) -> bool {
        self.order == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// Canonical representative of `c` in this summand.
    pub fn reduce(&self, c: i64) -> i64 {
        if self.order == 0 {
            c
        } else {
            c.rem_euclid(self.order as i64)
        }
    }
}

impl fmt::Display for CyclicSummand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "Z")
        } else {
            write!(f, "Z/{}", self.order)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub summands: Vec<CyclicSummand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub coeffs: Vec<i64>,
}

impl GroupElement {
    pub fn new(coeffs: Vec<i64>) -> Self {
        GroupElement { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        GroupElement {
            coeffs: vec![0; len],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl AbelianGroup {
    pub fn new(summands: Vec<CyclicSummand>) -> Self {
        AbelianGroup { summands }
    }

    pub fn trivial() -> Self {
        AbelianGroup::default()
    }

    pub fn from_orders(orders: &[u64]) -> Self {
        AbelianGroup {
            summands: orders.iter().map(|&o| CyclicSummand { order: o }).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.summands.len()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.summands.iter().map(|s| s.order).collect()
    }

    /// Drops trivial summands.
    pub fn normalized(&self) -> AbelianGroup {
        AbelianGroup {
            summands: self
                .summands
                .iter()
                .copied()
                .filter(|s| !s.is_trivial())
                .collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.summands.iter().all(|s| s.is_trivial())
    }

    pub fn is_finite(&self) -> bool {
        self.summands.iter().all(|s| !s.is_free())
    }

    /// Number of elements, `None` when infinite.
    pub fn cardinality(&self) -> Option<u64> {
        let mut n: u64 = 1;
        for s in &self.summands {
            if s.is_free() {
                return None;
            }
            n = n.checked_mul(s.order)?;
        }
        Some(n)
    }

    /// Least common multiple of the finite orders (0 if some summand is free).
    pub fn exponent(&self) -> u64 {
        let mut e = 1u64;
        for s in &self.summands {
            if s.is_free() {
                return 0;
            }
            e = lcm(e, s.order);
        }
        e
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement::zero(self.rank())
    }

    pub fn check(&self, a: &GroupElement) -> Result<()> {
        if a.len() != self.rank() {
            return Err(Error::Structural(format!(
                "element of length {} in a group with {} summands",
                a.len(),
                self.rank()
            )));
        }
        Ok(())
    }

    pub fn reduce(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement {
            coeffs: self
                .summands
                .iter()
                .zip(&a.coeffs)
                .map(|(s, &c)| s.reduce(c))
                .collect(),
        })
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElement {
            coeffs: self
                .summands
                .iter()
                .zip(a.coeffs.iter().zip(&b.coeffs))
                .map(|(s, (&x, &y))| s.reduce(x + y))
                .collect(),
        })
    }

    pub fn scale(&self, k: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement {
            coeffs: self
                .summands
                .iter()
                .zip(&a.coeffs)
                .map(|(s, &x)| s.reduce(mul_mod(k, x, s.order)))
                .collect(),
        })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.scale(-1, a)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.add(a, &self.neg(b)?)
    }

    /// Order of an element, `None` for elements of infinite order.
    pub fn element_order(&self, a: &GroupElement) -> Option<u64> {
        let mut o = 1u64;
        for (s, &c) in self.summands.iter().zip(&a.coeffs) {
            if c == 0 {
                continue;
            }
            if s.is_free() {
                return None;
            }
            let c = c.rem_euclid(s.order as i64) as u64;
            if c != 0 {
                o = lcm(o, s.order / gcd(s.order, c));
            }
        }
        Some(o)
    }

    /// Every element of a finite group, in lexicographic coefficient order.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        if !self.is_finite() {
            return Err(Error::Unsupported(format!("{} is infinite", self)));
        }
        let mut out = vec![GroupElement::zero(self.rank())];
        for (i, s) in self.summands.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * s.order as usize);
            for e in &out {
                for c in 0..s.order as i64 {
                    let mut e2 = e.clone();
                    e2.coeffs[i] = c;
                    next.push(e2);
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// The multiplier projecting every finite summand onto its `p`-primary part.
    ///
    /// Returns `e` with `e = 1` modulo the `p`-part and `e = 0` modulo the
    /// prime-to-`p` part of the exponent.
    pub fn primary_idempotent(&self, p: u64) -> Result<i64> {
        let e = self.exponent();
        if e == 0 {
            return Err(Error::Unsupported(format!(
                "no primary projection on the infinite group {}",
                self
            )));
        }
        Ok(primary_idempotent(e, p))
    }

    /// Multiset of prime-power invariants and the free rank.
    pub fn invariants(&self) -> (usize, Vec<u64>) {
        let mut free = 0;
        let mut pp = Vec::new();
        for s in &self.summands {
            if s.is_free() {
                free += 1;
            } else {
                pp.extend(prime_power_factors(s.order));
            }
        }
        pp.sort_unstable();
        (free, pp)
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut summands = self.summands.clone();
        summands.extend(other.summands.iter().copied());
        AbelianGroup { summands }
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.normalized();
        if n.summands.is_empty() {
            return write!(f, "0");
        }
        for (i, s) in n.summands.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

impl FromStr for AbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "0" {
            return Ok(AbelianGroup::trivial());
        }
        let mut summands = Vec::new();
        let mut pos = 0;
        for part in s.split('+') {
            let p = part.trim();
            let at = pos + part.len() - part.trim_start().len();
            if p == "Z" {
                summands.push(CyclicSummand::free());
            } else if let Some(n) = p.strip_prefix("Z/") {
                match n.parse::<u64>() {
                    Ok(o) if o >= 1 => summands.push(CyclicSummand::torsion(o)),
                    _ => return parse_err(at, format!("bad cyclic order in '{}'", p)),
                }
            } else {
                return parse_err(at, format!("expected Z or Z/<n>, found '{}'", p));
            }
            pos += part.len() + 1;
        }
        Ok(AbelianGroup { summands })
    }
}

/// `min(r, s)`.
pub fn min_exp(r: u32, s: u32) -> u32 {
    r.min(s)
}

/// 1 for `r = 1`, 0 otherwise.
pub fn delta(r: u32) -> u32 {
    u32::from(r == 1)
}

/// True iff the groups have the same free rank and prime-power invariants.
pub fn iso_check(g: &AbelianGroup, h: &AbelianGroup) -> bool {
    g.invariants() == h.invariants()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

fn mul_mod(k: i64, x: i64, order: u64) -> i64 {
    if order == 0 {
        k * x
    } else {
        ((k as i128 * x as i128).rem_euclid(order as i128)) as i64
    }
}

pub fn pow(base: u64, e: u32) -> u64 {
    base.pow(e)
}

/// Prime-power decomposition of `n >= 1`; empty for `n = 1`.
pub fn prime_power_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut q = 1;
            while m.is_multiple_of(p) {
                m /= p;
                q *= p;
            }
            out.push(q);
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `p`-part of `n`.
pub fn p_part(n: u64, p: u64) -> u64 {
    let mut q = 1;
    let mut m = n;
    while m.is_multiple_of(p) && m > 0 {
        m /= p;
        q *= p;
    }
    q
}

/// CRT idempotent for the `p`-part of `Z/n`.
pub fn primary_idempotent(n: u64, p: u64) -> i64 {
    let a = p_part(n, p);
    let b = n / a;
    if a == 1 {
        return 0;
    }
    if b == 1 {
        return 1;
    }
    // e = 0 mod b, e = 1 mod a
    (0..a as i64)
        .map(|k| k * b as i64)
        .find(|e| e.rem_euclid(a as i64) == 1)
        .expect("coprime moduli")
}

/// Torsion group recorded by prime: `p -> [r_1, r_2, ...]` meaning `⊕ Z/p^{r_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TorsionDecomposition {
    pub primaries: BTreeMap<u64, Vec<u32>>,
}

impl TorsionDecomposition {
    pub fn new() -> Self {
        TorsionDecomposition::default()
    }

    pub fn push(&mut self, p: u64, r: u32) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::InvalidSplitting(format!("{} is not prime", p)));
        }
        if r == 0 {
            return Err(Error::InvalidSplitting(format!(
                "exponent of {} must be at least 1",
                p
            )));
        }
        let rs = self.primaries.entry(p).or_default();
        let at = rs.partition_point(|&x| x <= r);
        rs.insert(at, r);
        Ok(())
    }

    pub fn exponents(&self, p: u64) -> Vec<u32> {
        self.primaries.get(&p).cloned().unwrap_or_default()
    }

    /// Number of cyclic summands at `p`.
    pub fn count(&self, p: u64) -> usize {
        self.primaries.get(&p).map_or(0, |v| v.len())
    }

    /// Primes at least `min` with their exponents.
    pub fn parts_from(&self, min: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        for (&p, rs) in &self.primaries {
            if p >= min {
                for &r in rs {
                    out.push((p, r));
                }
            }
        }
        out
    }

    pub fn group(&self) -> AbelianGroup {
        AbelianGroup::from_orders(
            &self
                .parts_from(2)
                .into_iter()
                .map(|(p, r)| pow(p, r))
                .collect::<Vec<_>>(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.primaries.values().all(|v| v.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn add_examples() {
        let z4z2 = g("Z/4 + Z/2");
        let r = z4z2
            .add(&GroupElement::new(vec![3, 1]), &GroupElement::new(vec![2, 1]))
            .unwrap();
        assert_eq!(r.coeffs, vec![1, 0]);
        let z = g("Z");
        let r = z
            .add(&GroupElement::new(vec![5]), &GroupElement::new(vec![-5]))
            .unwrap();
        assert_eq!(r.coeffs, vec![0]);
        let z12 = g("Z/12");
        let r = z12
            .add(&GroupElement::new(vec![7]), &GroupElement::new(vec![7]))
            .unwrap();
        assert_eq!(r.coeffs, vec![2]);
    }

    #[test]
    fn add_length_mismatch() {
        let z4 = g("Z/4");
        assert!(matches!(
            z4.add(&GroupElement::new(vec![1, 1]), &GroupElement::new(vec![1])),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn min_exp_and_delta() {
        assert_eq!(min_exp(3, 2), 2);
        assert_eq!(min_exp(1, 1), 1);
        assert_eq!(delta(1), 1);
        assert_eq!(delta(4), 0);
    }

    #[test]
    fn iso_examples() {
        assert!(iso_check(&g("Z/2 + Z/4"), &g("Z/4 + Z/2")));
        assert!(!iso_check(&g("Z/4"), &g("Z/2 + Z/2")));
        assert!(iso_check(&g("Z + Z/1"), &g("Z")));
        assert!(iso_check(&g("Z/6"), &g("Z/2 + Z/3")));
    }

    #[test]
    fn notation_round_trip() {
        for s in ["Z", "Z/8", "Z/8 + Z/2", "Z + Z/12", "0"] {
            assert_eq!(g(s).to_string(), s);
        }
        assert!("Z/0".parse::<AbelianGroup>().is_err());
        assert!("Q".parse::<AbelianGroup>().is_err());
    }

    #[test]
    fn idempotents() {
        assert_eq!(primary_idempotent(24, 2), 9);
        assert_eq!(primary_idempotent(24, 3), 16);
        assert_eq!(primary_idempotent(12, 2), 9);
        assert_eq!(primary_idempotent(12, 3), 4);
        assert_eq!(primary_idempotent(8, 2), 1);
        assert_eq!(primary_idempotent(8, 3), 0);
    }

    #[test]
    fn element_orders() {
        let z24 = g("Z/24");
        assert_eq!(z24.element_order(&GroupElement::new(vec![12])), Some(2));
        assert_eq!(z24.element_order(&GroupElement::new(vec![16])), Some(3));
        assert_eq!(z24.element_order(&GroupElement::new(vec![4])), Some(6));
    }
}
