use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abelian::{is_prime, pow, AbelianGroup, CyclicSummand};
use crate::error::{parse_err, Error, Result};

/// Family of an elementary complex. Chang families are 2-primary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Sphere,
    Moore { p: u64, r: u32 },
    ChangEta,
    ChangR { r: u32 },
    ChangS { s: u32 },
    ChangRS { r: u32, s: u32 },
}

/// One indecomposable wedge summand. `bottom` is the dimension of the lowest
/// cell: `S^k` has bottom `k`, `P^k(p^r)` bottom `k-1`, Chang complexes of top
/// dimension `k` bottom `k-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Complex {
    pub kind: Kind,
    pub bottom: u32,
}

impl Complex {
    pub fn sphere(k: u32) -> Self {
        Complex { kind: Kind::Sphere, bottom: k }
    }

    /// `P^top(p^r)`.
    pub fn moore(top: u32, p: u64, r: u32) -> Self {
        Complex { kind: Kind::Moore { p, r }, bottom: top - 1 }
    }

    pub fn ceta(top: u32) -> Self {
        Complex { kind: Kind::ChangEta, bottom: top - 2 }
    }

    pub fn chang_r(top: u32, r: u32) -> Self {
        Complex { kind: Kind::ChangR { r }, bottom: top - 2 }
    }

    pub fn chang_s(top: u32, s: u32) -> Self {
        Complex { kind: Kind::ChangS { s }, bottom: top - 2 }
    }

    pub fn chang_rs(top: u32, r: u32, s: u32) -> Self {
        Complex { kind: Kind::ChangRS { r, s }, bottom: top - 2 }
    }

    pub fn top(&self) -> u32 {
        match self.kind {
            Kind::Sphere => self.bottom,
            Kind::Moore { .. } => self.bottom + 1,
            _ => self.bottom + 2,
        }
    }

    pub fn is_chang(&self) -> bool {
        matches!(
            self.kind,
            Kind::ChangEta | Kind::ChangR { .. } | Kind::ChangS { .. } | Kind::ChangRS { .. }
        )
    }

    /// Prime at which the complex has torsion homology, if any.
    pub fn prime(&self) -> Option<u64> {
        match self.kind {
            Kind::Sphere | Kind::ChangEta => None,
            Kind::Moore { p, .. } => Some(p),
            _ => Some(2),
        }
    }

    pub fn suspend(&self) -> Complex {
        Complex { kind: self.kind, bottom: self.bottom + 1 }
    }

    /// Reduced integral homology, nonzero degrees only.
    pub fn homology(&self) -> Vec<(u32, AbelianGroup)> {
        let n = self.bottom;
        let z = || AbelianGroup::new(vec![CyclicSummand::free()]);
        let tors = |p: u64, e: u32| AbelianGroup::new(vec![CyclicSummand::torsion(pow(p, e))]);
        match self.kind {
            Kind::Sphere => vec![(n, z())],
            Kind::Moore { p, r } => vec![(n, tors(p, r))],
            Kind::ChangEta => vec![(n, z()), (n + 2, z())],
            Kind::ChangR { r } => vec![(n, tors(2, r)), (n + 2, z())],
            Kind::ChangS { s } => vec![(n, z()), (n + 1, tors(2, s))],
            Kind::ChangRS { r, s } => vec![(n, tors(2, r)), (n + 1, tors(2, s))],
        }
    }

    /// Number of cells of dimension `k` (cellular chain rank).
    pub fn cells(&self) -> Vec<u32> {
        let n = self.bottom;
        match self.kind {
            Kind::Sphere => vec![n],
            Kind::Moore { .. } => vec![n, n + 1],
            Kind::ChangEta => vec![n, n + 2],
            Kind::ChangR { .. } | Kind::ChangS { .. } => vec![n, n + 1, n + 2],
            Kind::ChangRS { .. } => vec![n, n, n + 1, n + 2],
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Structural(m));
        match self.kind {
            Kind::Moore { p, r } => {
                if !is_prime(p) {
                    return bad(format!("{} is not prime", p));
                }
                if r == 0 {
                    return bad("Moore exponent must be at least 1".into());
                }
            }
            Kind::ChangR { r } if r == 0 => return bad("r must be at least 1".into()),
            Kind::ChangS { s } if s == 0 => return bad("s must be at least 1".into()),
            Kind::ChangRS { r, s } if r == 0 || s == 0 => {
                return bad("r and s must be at least 1".into())
            }
            _ => {}
        }
        if self.bottom < 2 {
            return bad(format!("{} is not simply connected", self));
        }
        Ok(())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.top();
        match self.kind {
            Kind::Sphere => write!(f, "S{}", k),
            Kind::Moore { p, r } => write!(f, "P{}({}^{})", k, p, r),
            Kind::ChangEta => write!(f, "Ceta{}", k),
            Kind::ChangR { r } => write!(f, "C{}[r={}]", k, r),
            Kind::ChangS { s } => write!(f, "C{}{{s={}}}", k, s),
            Kind::ChangRS { r, s } => write!(f, "C{}[r={}]{{s={}}}", k, r, s),
        }
    }
}

/// Small cursor over ASCII input that reports byte positions.
pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub pos: usize,
    pub base: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, base: usize) -> Self {
        Cursor { src, pos: 0, base }
    }

    pub fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    pub fn at(&self) -> usize {
        self.base + self.pos
    }

    pub fn eat(&mut self, lit: &str) -> bool {
        if self.src[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            parse_err(self.at(), format!("expected `{}`", lit))
        }
    }

    pub fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return parse_err(self.at(), "expected a number");
        }
        self.src[start..self.pos]
            .parse()
            .or_else(|_| parse_err(self.base + start, "number out of range"))
    }

    pub fn done(&self) -> bool {
        self.pos == self.src.len()
    }
}

pub(crate) fn parse_complex_at(src: &str, base: usize) -> Result<Complex> {
    let mut c = Cursor::new(src, base);
    let small = |c: &Cursor, v: u64| -> Result<u32> {
        u32::try_from(v).or_else(|_| parse_err(c.at(), "number out of range"))
    };
    let out = if c.eat("Ceta") {
        let k = c.number()?;
        let k = small(&c, k)?;
        if k < 2 {
            return parse_err(c.at(), "dimension too small");
        }
        Complex::ceta(k)
    } else if c.eat("C") {
        let k = c.number()?;
        let k = small(&c, k)?;
        if k < 2 {
            return parse_err(c.at(), "dimension too small");
        }
        let mut r = None;
        let mut s = None;
        if c.eat("[") {
            c.expect("r=")?;
            let v = c.number()?;
            r = Some(small(&c, v)?);
            c.expect("]")?;
        }
        if c.eat("{") {
            c.expect("s=")?;
            let v = c.number()?;
            s = Some(small(&c, v)?);
            c.expect("}")?;
        }
        match (r, s) {
            (Some(r), Some(s)) => Complex::chang_rs(k, r, s),
            (Some(r), None) => Complex::chang_r(k, r),
            (None, Some(s)) => Complex::chang_s(k, s),
            (None, None) => return parse_err(c.at(), "expected `[r=..]` or `{s=..}`"),
        }
    } else if c.eat("S") {
        let k = c.number()?;
        Complex::sphere(small(&c, k)?)
    } else if c.eat("P") {
        let k = c.number()?;
        let k = small(&c, k)?;
        if k < 1 {
            return parse_err(c.at(), "dimension too small");
        }
        c.expect("(")?;
        let p = c.number()?;
        c.expect("^")?;
        let r = c.number()?;
        let r = small(&c, r)?;
        c.expect(")")?;
        Complex::moore(k, p, r)
    } else {
        return parse_err(c.at(), "expected S, P, Ceta or C");
    };
    if !c.done() {
        return parse_err(c.at(), "trailing input after complex");
    }
    match out.validate() {
        Ok(()) => Ok(out),
        Err(Error::Structural(m)) => parse_err(base, m),
        Err(e) => Err(e),
    }
}

impl FromStr for Complex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_complex_at(s.trim(), 0)
    }
}
