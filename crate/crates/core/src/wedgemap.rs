//! Maps from a sphere into a wedge of elementary complexes, written as
//! coefficient vectors, and self-maps of wedges written as matrices of
//! morphism expressions.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abelian::{AbelianGroup, GroupElement};
use crate::catalog::{collect, compose_chain, parse_complex_at, pi, Complex, Gen, HomotopyTable, Kind, Morph};
use crate::error::{parse_err, Error, Result};

/// Ordered wedge `X_1 v ... v X_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WedgeSpace {
    pub summands: Vec<Complex>,
}

impl WedgeSpace {
    pub fn new(summands: Vec<Complex>) -> Result<Self> {
        if summands.is_empty() {
            return Err(Error::Structural("a wedge needs at least one summand".into()));
        }
        for c in &summands {
            if c.bottom < 2 {
                return Err(Error::Structural(format!("{} is not simply connected", c)));
            }
        }
        Ok(WedgeSpace { summands })
    }

    /// The one-point space, used only as the shell of a classification with
    /// no summands below the top cell.
    pub fn point() -> Self {
        WedgeSpace { summands: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Reduced homology, summed over summands, as `(degree, group)` pairs in
    /// increasing degree.
    pub fn homology(&self) -> Vec<(u32, AbelianGroup)> {
        let mut out: Vec<(u32, AbelianGroup)> = Vec::new();
        for c in &self.summands {
            for (d, g) in c.homology() {
                match out.iter_mut().find(|(e, _)| *e == d) {
                    Some((_, h)) => *h = h.direct_sum(&g),
                    None => out.push((d, g)),
                }
            }
        }
        out.sort_by_key(|(d, _)| *d);
        out
    }

    /// The wedge with the listed summands removed.
    pub fn without(&self, drop: &[usize]) -> WedgeSpace {
        WedgeSpace {
            summands: self
                .summands
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, c)| *c)
                .collect(),
        }
    }

    pub fn tables(&self, degree: u32) -> Result<Vec<HomotopyTable>> {
        self.summands.iter().map(|c| pi(c, degree)).collect()
    }
}

impl fmt::Display for WedgeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("*");
        }
        let parts: Vec<String> = self.summands.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" v "))
    }
}

impl FromStr for WedgeSpace {
    type Err = Error;

    /// `S6 v S7`, `[S6vS7]`, `P7(2^2)`.
    fn from_str(src: &str) -> Result<Self> {
        let (body, base) = strip_brackets(src)?;
        let mut summands = Vec::new();
        let mut start = 0;
        for (k, ch) in body.char_indices().chain(std::iter::once((body.len(), 'v'))) {
            if ch == 'v' {
                let piece = &body[start..k];
                let lead = piece.len() - piece.trim_start().len();
                let t = piece.trim();
                if t.is_empty() {
                    return parse_err(base + start, "empty wedge summand");
                }
                summands.push(parse_complex_at(t, base + start + lead)?);
                start = k + 1;
            }
        }
        WedgeSpace::new(summands)
    }
}

fn strip_brackets(src: &str) -> Result<(&str, usize)> {
    let lead = src.len() - src.trim_start().len();
    let t = src.trim();
    if let Some(inner) = t.strip_prefix('[') {
        match inner.strip_suffix(']') {
            Some(b) => Ok((b, lead + 1)),
            None => parse_err(lead + t.len(), "missing `]`"),
        }
    } else {
        Ok((t, lead))
    }
}

/// A map `S^degree -> wedge`, one element of `pi_degree(X_i)` per summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttachingVector {
    pub wedge: WedgeSpace,
    pub source_degree: u32,
    pub entries: Vec<GroupElement>,
}

/// `nu`-type aliases accepted in literals: `(host test, token, generator, multiple)`.
fn aliases(host: &Complex) -> Vec<(&'static str, Gen, i64)> {
    if host.bottom < 5 {
        return vec![];
    }
    match host.kind {
        Kind::Sphere => vec![("eta3", Gen::Nu, 12), ("alpha1", Gen::Nu, 16)],
        Kind::ChangEta => vec![("i_eta_alpha1", Gen::IEtaCNu, 4)],
        Kind::ChangS { .. } => vec![("ihat_alpha1", Gen::IHatNu, 4)],
        Kind::Moore { p: 2, .. } => vec![("i_eta3", Gen::INu, 4)],
        _ => vec![],
    }
}

/// Token normal form: a leading `i<digits>` becomes `i`, underscores vanish.
fn normalize_token(tok: &str) -> String {
    let mut t = tok.to_string();
    if let Some(rest) = tok.strip_prefix('i') {
        let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits > 0 {
            t = format!("i{}", &rest[digits..]);
        }
    }
    t.replace('_', "")
}

impl AttachingVector {
    pub fn new(wedge: WedgeSpace, source_degree: u32, entries: Vec<GroupElement>) -> Result<Self> {
        if entries.len() != wedge.len() {
            return Err(Error::Structural(format!(
                "{} entries for a wedge of {} summands",
                entries.len(),
                wedge.len()
            )));
        }
        let tables = wedge.tables(source_degree)?;
        let entries = tables
            .iter()
            .zip(&entries)
            .map(|(t, e)| t.group.reduce(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(AttachingVector { wedge, source_degree, entries })
    }

    pub fn zero(wedge: WedgeSpace, source_degree: u32) -> Result<Self> {
        let entries = wedge.tables(source_degree)?.iter().map(|t| t.group.zero()).collect();
        Ok(AttachingVector { wedge, source_degree, entries })
    }

    pub fn tables(&self) -> Result<Vec<HomotopyTable>> {
        self.wedge.tables(self.source_degree)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, other: &AttachingVector) -> Result<AttachingVector> {
        if self.wedge != other.wedge || self.source_degree != other.source_degree {
            return Err(Error::Structural("vectors live on different wedges".into()));
        }
        let tables = self.tables()?;
        let entries = tables
            .iter()
            .zip(self.entries.iter().zip(&other.entries))
            .map(|(t, (a, b))| t.group.add(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(AttachingVector { wedge: self.wedge.clone(), source_degree: self.source_degree, entries })
    }

    /// Set entry `i` to the named generator combination.
    pub fn with_entry(&self, i: usize, terms: &[(Gen, i64)]) -> Result<AttachingVector> {
        let t = pi(&self.wedge.summands[i], self.source_degree)?;
        let mut out = self.clone();
        out.entries[i] = collect(&t, terms)?;
        Ok(out)
    }

    /// Parse `[<terms>; <terms>; ...]` against `wedge` in `degree`.
    pub fn parse(wedge: &WedgeSpace, degree: u32, src: &str) -> Result<AttachingVector> {
        let (body, base) = strip_brackets(src)?;
        let tables = wedge.tables(degree)?;
        let mut pieces = Vec::new();
        let mut start = 0;
        for (k, ch) in body.char_indices().chain(std::iter::once((body.len(), ';'))) {
            if ch == ';' {
                pieces.push((start, &body[start..k]));
                start = k + 1;
            }
        }
        if pieces.len() != wedge.len() {
            return parse_err(base, format!("expected {} entries, found {}", wedge.len(), pieces.len()));
        }
        let mut entries = Vec::new();
        for (i, (off, piece)) in pieces.into_iter().enumerate() {
            let terms = parse_terms(&wedge.summands[i], &tables[i], piece, base + off)?;
            entries.push(collect(&tables[i], &terms)?);
        }
        AttachingVector::new(wedge.clone(), degree, entries)
    }

    /// Render one entry; `nu`-type multiples of 4 print in alias form.
    pub fn entry_string(&self, i: usize) -> Result<String> {
        let host = self.wedge.summands[i];
        let t = pi(&host, self.source_degree)?;
        Ok(render_entry(&host, &t, &self.entries[i]))
    }
}

fn parse_terms(host: &Complex, table: &HomotopyTable, piece: &str, base: usize) -> Result<Vec<(Gen, i64)>> {
    let mut out = Vec::new();
    let trimmed = piece.trim();
    if trimmed == "0" {
        return Ok(out);
    }
    if trimmed.is_empty() {
        return parse_err(base, "empty entry (write 0)");
    }
    let mut start = 0;
    let bytes = piece.as_bytes();
    let mut cuts = Vec::new();
    for (k, &b) in bytes.iter().enumerate() {
        // a `+` or a `-` that follows a complete term separates terms
        if b == b'+' {
            cuts.push((start, k));
            start = k + 1;
        }
    }
    cuts.push((start, piece.len()));
    for (a, b) in cuts {
        let raw = &piece[a..b];
        let lead = raw.len() - raw.trim_start().len();
        let term = raw.trim();
        let at = base + a + lead;
        if term.is_empty() {
            return parse_err(at, "empty term");
        }
        let (coeff, tok, tok_at) = match term.find('*') {
            Some(star) => {
                let c = term[..star].trim();
                let c: i64 = c.parse().or_else(|_| parse_err(at, format!("bad coefficient `{}`", c)))?;
                let rest = &term[star + 1..];
                let l2 = rest.len() - rest.trim_start().len();
                (c, rest.trim(), at + star + 1 + l2)
            }
            None => match term.strip_prefix('-') {
                Some(rest) => (-1, rest.trim(), at + 1),
                None => (1, term, at),
            },
        };
        let key = normalize_token(tok);
        if key == "0" {
            continue;
        }
        if let Some(g) = table.generators.iter().find(|g| normalize_token(&g.token()) == key) {
            out.push((*g, coeff));
            continue;
        }
        if let Some((_, g, m)) = aliases(host)
            .into_iter()
            .find(|(a, g, _)| normalize_token(a) == key && table.position(*g).is_some())
        {
            out.push((g, coeff * m));
            continue;
        }
        // `i eta2` on P(2^1) is twice the lift
        if key == "ieta2" && table.order_of(Gen::EtaTilde) == Some(4) {
            out.push((Gen::IEta2, coeff));
            continue;
        }
        return parse_err(tok_at, format!("`{}` is not a generator of pi_{}({})", tok, table.degree, host));
    }
    Ok(out)
}

fn render_entry(host: &Complex, table: &HomotopyTable, e: &GroupElement) -> String {
    let mut parts = Vec::new();
    for (k, (&c, g)) in e.coeffs.iter().zip(&table.generators).enumerate() {
        if c == 0 {
            continue;
        }
        let order = table.group.summands[k].order;
        if g.is_nu_type() && c % 4 == 0 && host.bottom >= 5 {
            match host.kind {
                Kind::Sphere => {
                    let e3 = (c % 8) / 4;
                    let a1 = c % 3;
                    if e3 != 0 {
                        parts.push(format!("{}*eta3", e3));
                    }
                    if a1 != 0 {
                        parts.push(format!("{}*alpha1", a1));
                    }
                    continue;
                }
                Kind::ChangEta => {
                    parts.push(format!("{}*i_eta_alpha1", c / 4));
                    continue;
                }
                Kind::ChangS { .. } => {
                    parts.push(format!("{}*ihat_alpha1", c / 4));
                    continue;
                }
                Kind::Moore { p: 2, .. } if order == 8 => {
                    parts.push(format!("{}*i_eta3", c / 4));
                    continue;
                }
                _ => {}
            }
        }
        parts.push(format!("{}*{}", c, g.token()));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for AttachingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for i in 0..self.wedge.len() {
            parts.push(self.entry_string(i).map_err(|_| fmt::Error)?);
        }
        write!(f, "[{}]", parts.join("; "))
    }
}

/// `coeff * (chain[last] o ... o chain[0])`; an empty chain is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MorphTerm {
    pub coeff: i64,
    pub chain: Vec<Morph>,
}

/// Formal integer combination of composable chains between two complexes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MorphExpr {
    pub terms: Vec<MorphTerm>,
}

impl MorphExpr {
    pub fn zero() -> Self {
        MorphExpr { terms: vec![] }
    }

    pub fn identity() -> Self {
        MorphExpr::scalar(1)
    }

    pub fn scalar(k: i64) -> Self {
        MorphExpr { terms: vec![MorphTerm { coeff: k, chain: vec![] }] }
    }

    pub fn chain(chain: Vec<Morph>) -> Self {
        MorphExpr { terms: vec![MorphTerm { coeff: 1, chain }] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0)
    }

    pub fn plus(&self, other: &MorphExpr) -> MorphExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MorphExpr { terms }
    }

    pub fn scaled(&self, k: i64) -> MorphExpr {
        MorphExpr { terms: self.terms.iter().map(|t| MorphTerm { coeff: t.coeff * k, chain: t.chain.clone() }).collect() }
    }

    /// `other o self`.
    pub fn then(&self, other: &MorphExpr) -> MorphExpr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut chain = a.chain.clone();
                chain.extend(b.chain.iter().copied());
                terms.push(MorphTerm { coeff: a.coeff * b.coeff, chain });
            }
        }
        MorphExpr { terms }
    }

    /// Apply to `x` in `pi_degree(source)`, landing in `pi_degree(target)`.
    pub fn apply(&self, source: &Complex, target: &Complex, x: &GroupElement, degree: u32) -> Result<GroupElement> {
        let tt = pi(target, degree)?;
        let mut acc = tt.group.zero();
        for t in &self.terms {
            if t.coeff == 0 {
                continue;
            }
            if let (Some(first), Some(last)) = (t.chain.first(), t.chain.last()) {
                if first.source()? != *source || last.target()? != *target {
                    return Err(Error::Structural(format!("chain does not run from {} to {}", source, target)));
                }
            } else if source != target {
                return Err(Error::Structural(format!("identity from {} to {}", source, target)));
            }
            let y = compose_chain(&t.chain, x, degree)?;
            acc = tt.group.add(&acc, &tt.group.scale(t.coeff, &y)?)?;
        }
        Ok(acc)
    }

    /// Induced multiplier on `H_d`.
    pub fn homology_multiplier(&self, d: u32) -> Result<i64> {
        let mut total = 0;
        for t in &self.terms {
            let mut m = t.coeff;
            for f in &t.chain {
                m *= f.homology_multiplier(d)?;
            }
            total += m;
        }
        Ok(total)
    }
}

impl fmt::Display for MorphExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let live: Vec<&MorphTerm> = self.terms.iter().filter(|t| t.coeff != 0).collect();
        if live.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = live
            .iter()
            .map(|t| {
                let body = if t.chain.is_empty() {
                    "1".to_string()
                } else {
                    t.chain.iter().rev().map(|m| m.to_string()).collect::<Vec<_>>().join(" o ")
                };
                if t.coeff == 1 {
                    body
                } else {
                    format!("{}*{}", t.coeff, body)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Self-map of a wedge; `entries[i][k]` maps summand `k` into summand `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceMatrix {
    pub wedge: WedgeSpace,
    pub entries: Vec<Vec<MorphExpr>>,
}

impl EquivalenceMatrix {
    pub fn identity(wedge: &WedgeSpace) -> Self {
        let n = wedge.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|k| if i == k { MorphExpr::identity() } else { MorphExpr::zero() }).collect())
            .collect();
        EquivalenceMatrix { wedge: wedge.clone(), entries }
    }

    /// Identity plus `f: X_from -> X_to` in position `(to, from)`.
    pub fn elementary(wedge: &WedgeSpace, to: usize, from: usize, f: MorphExpr) -> Self {
        let mut m = Self::identity(wedge);
        m.entries[to][from] = m.entries[to][from].plus(&f);
        m
    }

    /// Identity except for `unit` on the diagonal at `i`.
    pub fn diagonal(wedge: &WedgeSpace, i: usize, unit: MorphExpr) -> Self {
        let mut m = Self::identity(wedge);
        m.entries[i][i] = unit;
        m
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// `self o first`.
    pub fn after(&self, first: &EquivalenceMatrix) -> Result<EquivalenceMatrix> {
        if self.wedge != first.wedge {
            return Err(Error::Structural("matrices on different wedges".into()));
        }
        let n = self.size();
        let mut entries = vec![vec![MorphExpr::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                for j in 0..n {
                    if self.entries[i][j].is_zero() || first.entries[j][k].is_zero() {
                        continue;
                    }
                    *cell = cell.plus(&first.entries[j][k].then(&self.entries[i][j]));
                }
            }
        }
        Ok(EquivalenceMatrix { wedge: self.wedge.clone(), entries })
    }

    /// Inverse of an identity-plus-square-zero or diagonal-sign matrix.
    pub fn shipped_inverse(&self) -> Result<EquivalenceMatrix> {
        let n = self.size();
        let id = Self::identity(&self.wedge);
        // nilpotent part N = self - id
        let mut nil = self.clone();
        for i in 0..n {
            nil.entries[i][i] = nil.entries[i][i].plus(&MorphExpr::scalar(-1));
        }
        let sq = nil.after(&nil)?;
        let deg = self.wedge.summands.iter().map(|c| c.top() + 3).max().unwrap_or(0);
        let vanishes = |m: &EquivalenceMatrix| -> bool {
            (0..n).all(|i| (0..n).all(|k| m.entries[i][k].is_zero() || probe_zero(m, i, k, deg)))
        };
        if vanishes(&sq) {
            let mut inv = id.clone();
            for i in 0..n {
                for k in 0..n {
                    inv.entries[i][k] = inv.entries[i][k].plus(&nil.entries[i][k].scaled(-1));
                }
            }
            return Ok(inv);
        }
        // a diagonal of signs is its own inverse
        let signs = (0..n).all(|i| {
            (0..n).all(|k| {
                let e = &self.entries[i][k];
                if i != k {
                    e.is_zero()
                } else {
                    e.terms.len() == 1 && e.terms[0].chain.is_empty() && e.terms[0].coeff.abs() == 1
                }
            })
        });
        if signs {
            return Ok(self.clone());
        }
        Err(Error::Unsupported("no shipped inverse for this matrix".into()))
    }

    /// Whether the induced map on every reduced homology group is bijective.
    pub fn induces_homology_iso(&self) -> Result<bool> {
        let hom = self.wedge.homology();
        for (d, _) in &hom {
            let idx: Vec<(usize, u64)> = self
                .wedge
                .summands
                .iter()
                .enumerate()
                .filter_map(|(i, c)| {
                    c.homology().into_iter().find(|(e, _)| e == d).map(|(_, g)| (i, g.summands[0].order))
                })
                .collect();
            let mut a = vec![vec![0i64; idx.len()]; idx.len()];
            for (x, &(i, _)) in idx.iter().enumerate() {
                for (y, &(k, _)) in idx.iter().enumerate() {
                    a[x][y] = self.entries[i][k].homology_multiplier(*d)?;
                }
            }
            let free: Vec<usize> = (0..idx.len()).filter(|&x| idx[x].1 == 0).collect();
            let tors: Vec<usize> = (0..idx.len()).filter(|&x| idx[x].1 != 0).collect();
            let ff: Vec<Vec<i64>> = free.iter().map(|&x| free.iter().map(|&y| a[x][y]).collect()).collect();
            if det(&ff).abs() != 1 {
                return Ok(false);
            }
            let orders: Vec<u64> = tors.iter().map(|&x| idx[x].1).collect();
            let tt: Vec<Vec<i64>> = tors.iter().map(|&x| tors.iter().map(|&y| a[x][y]).collect()).collect();
            if !torsion_bijective(&orders, &tt)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Check a matrix entry acts as zero on every generator where it is known.
fn probe_zero(m: &EquivalenceMatrix, i: usize, k: usize, _deg: u32) -> bool {
    let src = m.wedge.summands[k];
    let tgt = m.wedge.summands[i];
    for degree in src.bottom..=src.bottom + 3 {
        let Ok(t) = pi(&src, degree) else { continue };
        if pi(&tgt, degree).is_err() {
            continue;
        }
        for (g, _) in t.generators.iter().enumerate() {
            let mut x = t.group.zero();
            x.coeffs[g] = 1;
            match m.entries[i][k].apply(&src, &tgt, &x, degree) {
                Ok(y) if y.is_zero() => {}
                Ok(_) => return false,
                Err(_) => {}
            }
        }
    }
    true
}

fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    // fraction-free elimination
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

fn torsion_bijective(orders: &[u64], a: &[Vec<i64>]) -> Result<bool> {
    // homomorphisms between coprime cyclic groups vanish, so check one prime at a time
    let mut primes: Vec<u64> = Vec::new();
    for &o in orders {
        let mut m = o;
        let mut p = 2;
        while m > 1 {
            if m % p == 0 {
                if !primes.contains(&p) {
                    primes.push(p);
                }
                m /= p;
            } else {
                p += 1;
            }
        }
    }
    for p in primes {
        let idx: Vec<usize> = (0..orders.len()).filter(|&x| orders[x].is_multiple_of(p)).collect();
        let ord: Vec<u64> = idx.iter().map(|&x| crate::abelian::p_part(orders[x], p)).collect();
        let size: u64 = ord.iter().product();
        if size > 4_000_000 {
            return Err(Error::Unsupported("homology torsion too large to certify".into()));
        }
        let mut seen = vec![false; size as usize];
        for code in 0..size {
            let mut x = Vec::with_capacity(idx.len());
            let mut c = code;
            for &o in &ord {
                x.push((c % o) as i64);
                c /= o;
            }
            let mut img = 0u64;
            let mut mul = 1u64;
            for (r, &row) in idx.iter().enumerate() {
                let o = ord[r] as i64;
                let mut s = 0i64;
                for (q, &col) in idx.iter().enumerate() {
                    s = (s + a[row][col].rem_euclid(o) * x[q]) % o;
                }
                img += s as u64 * mul;
                mul *= ord[r];
            }
            if seen[img as usize] {
                return Ok(false);
            }
            seen[img as usize] = true;
        }
    }
    Ok(true)
}

/// `m . v`, entry `i` being `sum_k m_ik(v_k)`.
pub fn act(m: &EquivalenceMatrix, v: &AttachingVector) -> Result<AttachingVector> {
    if m.wedge != v.wedge {
        return Err(Error::Structural("matrix and vector live on different wedges".into()));
    }
    let n = v.wedge.len();
    let tables = v.tables()?;
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = tables[i].group.zero();
        for k in 0..n {
            if m.entries[i][k].is_zero() || v.entries[k].is_zero() {
                continue;
            }
            let y = m.entries[i][k].apply(&v.wedge.summands[k], &v.wedge.summands[i], &v.entries[k], v.source_degree)?;
            acc = tables[i].group.add(&acc, &y)?;
        }
        entries.push(acc);
    }
    Ok(AttachingVector { wedge: v.wedge.clone(), source_degree: v.source_degree, entries })
}

/// Whether `w` is reachable from `v` under the moves (and their shipped
/// inverses). A move that hits an untabulated composite is skipped for that
/// state.
pub fn equivalent(v: &AttachingVector, w: &AttachingVector, moves: &[EquivalenceMatrix], budget: usize) -> Result<bool> {
    if v.wedge != w.wedge || v.source_degree != w.source_degree {
        return Err(Error::Structural("vectors live on different wedges".into()));
    }
    let mut all = moves.to_vec();
    for m in moves {
        if let Ok(inv) = m.shipped_inverse() {
            all.push(inv);
        }
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(v.entries.clone());
    queue.push_back(v.clone());
    while let Some(x) = queue.pop_front() {
        if x.entries == w.entries {
            return Ok(true);
        }
        for m in &all {
            let y = match act(m, &x) {
                Ok(y) => y,
                Err(Error::UnknownComposite { .. }) => continue,
                Err(e) => return Err(e),
            };
            if seen.insert(y.entries.clone()) {
                if seen.len() > budget {
                    return Err(Error::Indeterminate(format!("more than {} states", budget)));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(false)
}

/// The self-equivalence `1 + i eta q` of a 2-primary Moore space, or
/// `1 + icheck_top qbar qcheck_C` of `C[r]{s}`; `None` for other summands.
pub fn alpha_type(c: &Complex) -> Option<MorphExpr> {
    match c.kind {
        Kind::Moore { p: 2, .. } if c.bottom >= 3 => Some(MorphExpr::identity().plus(&MorphExpr::chain(vec![
            Morph::Pinch { source: *c },
            Morph::Eta { n: c.bottom },
            Morph::Incl { target: *c },
        ]))),
        Kind::ChangRS { r, .. } => {
            let cr = Complex { kind: Kind::ChangR { r }, bottom: c.bottom };
            Some(MorphExpr::identity().plus(&MorphExpr::chain(vec![
                Morph::QCheckC { source: *c },
                Morph::QBarTop { source: cr },
                Morph::ICheckTop { target: *c },
            ])))
        }
        _ => None,
    }
}

/// One admissible coefficient slot of a general attaching form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub summand: usize,
    /// coefficient name, e.g. `x_1`
    pub name: String,
    /// generator token (alias form for `nu`-type multiples)
    pub generator: String,
    /// coefficient domain `Z/order`
    pub order: u64,
    pub forced_zero: bool,
}

/// The wedge below the top cell together with the admissible coefficient
/// domains of its attaching map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachingTemplate {
    pub wedge: WedgeSpace,
    pub source_degree: u32,
    pub slots: Vec<Slot>,
}

impl AttachingTemplate {
    pub fn zero_vector(&self) -> Result<AttachingVector> {
        if self.wedge.is_empty() {
            return Ok(AttachingVector { wedge: self.wedge.clone(), source_degree: self.source_degree, entries: vec![] });
        }
        AttachingVector::zero(self.wedge.clone(), self.source_degree)
    }
}

/// The general attaching map of the top cell over the wedge carrying all
/// `nu`-type and torsion information: 3-primary Moore spaces, the free bottom
/// spheres, `Ceta7`, the free top spheres, then the 2-primary summands.
pub fn general_attaching_form(split: &crate::classify::SplittingData, l: u32) -> Result<AttachingTemplate> {
    split.check_ranges(l)?;
    let mut summands = Vec::new();
    let mut slots = Vec::new();
    let mut push = |c: Complex, entries: Vec<(String, &str, u64, bool)>, summands: &mut Vec<Complex>| {
        let i = summands.len();
        summands.push(c);
        for (name, generator, order, forced_zero) in entries {
            slots.push(Slot { summand: i, name, generator: generator.to_string(), order, forced_zero });
        }
    };
    for (j, &r) in split.r3.iter().enumerate() {
        push(Complex::moore(6, 3, r), vec![(format!("a'_{}", j + 1), "i_alpha1", 3, false)], &mut summands);
    }
    for j in 0..(l - split.k - split.t3()) {
        push(
            Complex::sphere(5),
            vec![(format!("c2_{}", j + 1), "eta3", 2, false), (format!("c3_{}", j + 1), "alpha1", 3, false)],
            &mut summands,
        );
    }
    for j in 0..split.k {
        push(Complex::ceta(7), vec![(format!("ceta_{}", j + 1), "i_eta_alpha1", 3, false)], &mut summands);
    }
    for j in 0..(l - split.k - split.t2()) {
        push(Complex::sphere(7), vec![(format!("dS_{}", j + 1), "eta", 2, false)], &mut summands);
    }
    for (j, &s) in split.s.iter().enumerate() {
        push(
            Complex::moore(7, 2, s),
            vec![
                (format!("x_{}", j + 1), "etatilde", if s == 1 { 4 } else { 2 }, false),
                (format!("y_{}", j + 1), "i_eta2", 2, s == 1),
            ],
            &mut summands,
        );
    }
    for (j, &r) in split.r.iter().enumerate() {
        push(
            Complex::moore(6, 2, r),
            vec![
                (format!("a_{}", j + 1), "etatilde_eta", 2, false),
                (format!("c_{}", j + 1), "i_eta3", 2, r < 3),
            ],
            &mut summands,
        );
    }
    for (j, &r) in split.rbar.iter().enumerate() {
        push(Complex::chang_r(7, r), vec![(format!("abar_{}", j + 1), "ibar_P_etatilde_eta", 2, false)], &mut summands);
    }
    for (j, &s) in split.shat.iter().enumerate() {
        push(
            Complex::chang_s(7, s),
            vec![
                (format!("chat_{}", j + 1), "ihat_alpha1", 3, false),
                (format!("yhat_{}", j + 1), "ihat_eta2", 2, false),
            ],
            &mut summands,
        );
    }
    for (j, (&r, &s)) in split.rcheck.iter().zip(&split.scheck).enumerate() {
        push(
            Complex::chang_rs(7, r, s),
            vec![
                (format!("acheck_{}", j + 1), "icheck_P_etatilde_eta", 2, false),
                (format!("ycheck_{}", j + 1), "icheck_eta2", 2, false),
            ],
            &mut summands,
        );
    }
    let wedge = if summands.is_empty() { WedgeSpace::point() } else { WedgeSpace::new(summands)? };
    Ok(AttachingTemplate { wedge, source_degree: 8, slots })
}
