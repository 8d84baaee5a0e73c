//! Brute-force orbits of attaching vectors under elementary self-equivalences
//! of a small wedge, used to check `reduce::canonicalize`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::GroupElement;
use crate::catalog::{compose, pi, Complex, Kind, Morph};
use crate::error::{Error, Result};
use crate::reduce::{canonicalize, is_admissible};
use crate::wedgemap::{act, alpha_type, AttachingVector, EquivalenceMatrix, MorphExpr, WedgeSpace};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Every vector on `w` in `degree`, each coefficient tuple once.
pub fn enumerate_vectors(w: &WedgeSpace, degree: u32) -> Result<Vec<AttachingVector>> {
    let tables = w.tables(degree)?;
    let mut per: Vec<Vec<GroupElement>> = Vec::new();
    for t in &tables {
        if !t.is_finite() {
            return Err(Error::Unsupported(format!("pi_{}({}) is infinite", degree, t.host)));
        }
        per.push(t.group.elements()?);
    }
    let mut out = vec![Vec::new()];
    for opts in &per {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for e in opts {
                let mut p: Vec<GroupElement> = prefix.clone();
                p.push(e.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(|entries| AttachingVector::new(w.clone(), degree, entries)).collect()
}

/// Complexes that chains of elementary maps may pass through in degree 8.
pub fn universe(bound: u32) -> Vec<Complex> {
    let mut u = vec![Complex::sphere(5), Complex::sphere(6), Complex::sphere(7), Complex::ceta(7)];
    for p in [2u64, 3] {
        for top in 6..=8 {
            for r in 1..=bound {
                u.push(Complex::moore(top, p, r));
            }
        }
    }
    for r in 1..=bound {
        u.push(Complex::chang_r(7, r));
        u.push(Complex::chang_s(7, r));
        for s in 1..=bound {
            u.push(Complex::chang_rs(7, r, s));
        }
    }
    u
}

/// All elementary maps between members of `universe`, excluding multiples of the identity.
pub fn elementary_maps(universe: &[Complex], bound: u32) -> Vec<Morph> {
    let mut cands = Vec::new();
    for n in 3..=8 {
        cands.push(Morph::Eta { n });
    }
    for &c in universe {
        cands.extend([
            Morph::Incl { target: c },
            Morph::Pinch { source: c },
            Morph::EtaTilde { target: c },
            Morph::EtaBar { source: c },
            Morph::ZetaBar { source: c },
            Morph::IEta { target: c },
            Morph::IBar { target: c },
            Morph::IBarP { target: c },
            Morph::IBarEta { target: c },
            Morph::QBarTop { source: c },
            Morph::IHatTop { target: c },
            Morph::IHatBottom { target: c },
            Morph::QHatEta { source: c },
            Morph::QHatP { source: c },
            Morph::MuS { source: c },
            Morph::ICheckTop { target: c },
            Morph::ICheckBottom { target: c },
            Morph::ICheckP { target: c },
            Morph::ICheckC { target: c },
            Morph::QCheckP { source: c },
            Morph::QCheckC { source: c },
        ]);
        for s in 1..=bound {
            cands.extend([
                Morph::Chi { source: c, s },
                Morph::QBarR { source: c, r2: s },
                Morph::XiBar { source: c, s },
                Morph::MuSS { source: c, s },
                Morph::Lambda { source: c, s },
                Morph::ThetaMap { source: c, s2: s },
            ]);
        }
    }
    cands
        .into_iter()
        .filter(|m| match m.ends() {
            Ok((a, b)) => a != b && universe.contains(&a) && universe.contains(&b),
            Err(_) => false,
        })
        .collect()
}

/// A chain from a fixed source together with its values on a finite domain;
/// `None` marks a composite the table does not determine.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub target: Complex,
    pub chain: Vec<Morph>,
    pub values: Vec<Option<GroupElement>>,
}

fn admissible_domain(c: &Complex, degree: u32) -> Result<Vec<GroupElement>> {
    let t = pi(c, degree)?;
    let w = WedgeSpace::new(vec![*c])?;
    let mut out = Vec::new();
    for e in t.group.elements()? {
        let v = AttachingVector::new(w.clone(), degree, vec![e.clone()])?;
        if is_admissible(&v) {
            out.push(e);
        }
    }
    Ok(out)
}

/// Breadth-first closure of chains starting at `source`, deduplicated by
/// (target, values on the admissible domain).
pub fn chain_closure(source: &Complex, degree: u32, maps: &[Morph], budget: usize) -> Result<Vec<ChainMap>> {
    let domain = admissible_domain(source, degree)?;
    let start = ChainMap { target: *source, chain: vec![], values: domain.iter().cloned().map(Some).collect() };
    let key = |c: &ChainMap| (c.target, c.values.clone());
    let mut seen = HashMap::new();
    seen.insert(key(&start), ());
    let mut out = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for m in maps.iter().filter(|m| m.source().ok() == Some(cur.target)) {
            let mut values = Vec::with_capacity(cur.values.len());
            for x in &cur.values {
                values.push(match x {
                    None => None,
                    Some(x) => match compose(m, x, degree) {
                        Ok(y) => Some(y),
                        Err(Error::UnknownComposite { .. }) => None,
                        Err(e) => return Err(e),
                    },
                });
            }
            if values.iter().all(|v| v.is_none()) {
                continue;
            }
            let mut chain = cur.chain.clone();
            chain.push(*m);
            let next = ChainMap { target: m.target()?, chain, values };
            if seen.insert(key(&next), ()).is_none() {
                if seen.len() > budget {
                    return Err(Error::Indeterminate("chain closure exceeded its budget".into()));
                }
                out.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

fn exponent_bound(w: &WedgeSpace) -> u32 {
    w.summands
        .iter()
        .map(|c| match c.kind {
            Kind::Moore { r, .. } | Kind::ChangR { r } => r,
            Kind::ChangS { s } => s,
            Kind::ChangRS { r, s } => r.max(s),
            _ => 1,
        })
        .max()
        .unwrap_or(1)
}

/// Diagonal units and elementary off-diagonal moves built from chain closures.
pub fn shipped_moves(w: &WedgeSpace, degree: u32) -> Result<Vec<EquivalenceMatrix>> {
    let bound = exponent_bound(w);
    let u = universe(bound);
    let maps = elementary_maps(&u, bound);
    let mut moves = Vec::new();
    for (i, c) in w.summands.iter().enumerate() {
        moves.push(EquivalenceMatrix::diagonal(w, i, MorphExpr::scalar(-1)));
        if let Some(a) = alpha_type(c) {
            moves.push(EquivalenceMatrix::diagonal(w, i, a));
        }
    }
    let mut closures: HashMap<Complex, Vec<ChainMap>> = HashMap::new();
    for c in &w.summands {
        if !closures.contains_key(c) {
            closures.insert(*c, chain_closure(c, degree, &maps, DEFAULT_STATE_BUDGET)?);
        }
    }
    for (j, cj) in w.summands.iter().enumerate() {
        for (i, ci) in w.summands.iter().enumerate() {
            if i != j && ci == cj {
                moves.push(EquivalenceMatrix::elementary(w, i, j, MorphExpr::identity()));
            }
            for f in closures[cj].iter().filter(|f| f.target == *ci) {
                let expr = MorphExpr::chain(f.chain.clone());
                let m = if i == j {
                    let d = EquivalenceMatrix::diagonal(w, i, MorphExpr::identity().plus(&expr));
                    if !d.induces_homology_iso()? {
                        continue;
                    }
                    d
                } else {
                    EquivalenceMatrix::elementary(w, i, j, expr)
                };
                moves.push(m);
            }
        }
    }
    Ok(moves)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub representative: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub vector: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub wedge: String,
    pub vector_count: usize,
    pub orbit_count: usize,
    pub orbits: Vec<Orbit>,
    pub mismatches: Vec<Mismatch>,
}

impl fmt::Display for OrbitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wedge: {}", self.wedge)?;
        writeln!(f, "vectors: {}", self.vector_count)?;
        writeln!(f, "orbits: {}", self.orbit_count)?;
        for o in &self.orbits {
            writeln!(f, "  {} ({}): {}", o.representative, o.members.len(), o.members.join(", "))?;
        }
        writeln!(f, "mismatches: {}", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(f, "  {}: {}", m.vector, m.reason)?;
        }
        write!(f, "note: orbits are generated by the shipped moves only; distinct orbits may still be equivalent")
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Partition of the admissible vectors of `w` into classes of the relation
/// generated by `moves`. Orbits are keyed and ordered by their first member
/// in enumeration order; representatives are the first member's text.
pub fn orbit_partition(w: &WedgeSpace, degree: u32, moves: &[EquivalenceMatrix], budget: usize) -> Result<(Vec<AttachingVector>, Vec<Vec<usize>>)> {
    let all: Vec<AttachingVector> = enumerate_vectors(w, degree)?.into_iter().filter(is_admissible).collect();
    if all.len() > budget {
        return Err(Error::Indeterminate(format!("{} vectors exceed the state budget {}", all.len(), budget)));
    }
    let index: HashMap<Vec<GroupElement>, usize> = all.iter().enumerate().map(|(k, v)| (v.entries.clone(), k)).collect();
    let mut uf = UnionFind((0..all.len()).collect());
    let mut applied = 0usize;
    for m in moves {
        if !m.induces_homology_iso()? {
            return Err(Error::Structural(format!("move on {} is not a homology isomorphism", w)));
        }
        for (k, v) in all.iter().enumerate() {
            let img = match act(m, v) {
                Ok(x) => x,
                Err(Error::UnknownComposite { .. }) => continue,
                Err(e) => return Err(e),
            };
            applied += 1;
            if applied > budget.saturating_mul(64) {
                return Err(Error::Indeterminate("move applications exceeded the budget".into()));
            }
            match index.get(&img.entries) {
                Some(&t) => uf.union(k, t),
                None => return Err(Error::Structural(format!("move left the admissible domain: {} -> {}", v, img))),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..all.len() {
        let r = uf.find(k);
        groups.entry(r).or_default().push(k);
    }
    Ok((all, groups.into_values().collect()))
}

/// Orbits under the shipped moves, compared against canonical forms.
pub fn cross_check(w: &WedgeSpace, degree: u32) -> Result<OrbitReport> {
    cross_check_with(w, degree, &shipped_moves(w, degree)?, DEFAULT_STATE_BUDGET)
}

pub fn cross_check_with(w: &WedgeSpace, degree: u32, moves: &[EquivalenceMatrix], budget: usize) -> Result<OrbitReport> {
    let (all, groups) = orbit_partition(w, degree, moves, budget)?;
    let canon: Vec<AttachingVector> = all.iter().map(|v| canonicalize(v, None).map(|r| r.vector)).collect::<Result<_>>()?;
    let mut mismatches = Vec::new();
    let mut orbits = Vec::new();
    let mut owner: HashMap<Vec<GroupElement>, usize> = HashMap::new();
    for (g, members) in groups.iter().enumerate() {
        let rep = &canon[members[0]];
        for &k in members {
            if canon[k] != *rep {
                mismatches.push(Mismatch {
                    vector: all[k].to_string(),
                    reason: format!("canonical form {} differs from the orbit's {}", canon[k], rep),
                });
            }
        }
        if !members.iter().any(|&k| all[k] == *rep) {
            mismatches.push(Mismatch { vector: rep.to_string(), reason: "canonical form lies outside its orbit".into() });
        }
        if let Some(&other) = owner.get(&rep.entries) {
            mismatches.push(Mismatch {
                vector: rep.to_string(),
                reason: format!("orbits {} and {} share this canonical form", other + 1, g + 1),
            });
        } else {
            owner.insert(rep.entries.clone(), g);
        }
        orbits.push(Orbit { representative: rep.to_string(), members: members.iter().map(|&k| all[k].to_string()).collect() });
    }
    Ok(OrbitReport {
        wedge: w.to_string(),
        vector_count: all.len(),
        orbit_count: groups.len(),
        orbits,
        mismatches,
    })
}

/// Wedges used for the orbit-level acceptance check.
pub fn acceptance_family() -> Vec<WedgeSpace> {
    [
        "S6 v S7",
        "P7(2^2)",
        "P7(2^1) v S7",
        "P6(2^2) v S7",
        "C7{s=1} v S5",
        "S5 v P6(3^1) v P6(3^2)",
        "P7(2^1) v S7 v S6",
        "P7(2^2) v P7(2^1) v S5",
        "Ceta7 v C7{s=2} v S5",
        "C7[r=1]{s=1} v P6(2^2) v S7",
        "C7[r=1] v P6(2^2) v S6",
        "C7{s=2} v C7{s=1} v P7(2^2)",
        "C7[r=2]{s=1} v C7[r=1]",
        "P6(3^1) v C7{s=1} v S6",
        "S5 v S5 v S7",
    ]
    .iter()
    .map(|s| s.parse().expect("family literal"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let w: WedgeSpace = "S6 v S7".parse().unwrap();
        assert_eq!(enumerate_vectors(&w, 8).unwrap().len(), 4);
        let w: WedgeSpace = "P7(2^1)".parse().unwrap();
        assert_eq!(enumerate_vectors(&w, 8).unwrap().len(), 4);
        let w: WedgeSpace = "P7(3^1)".parse().unwrap();
        assert_eq!(enumerate_vectors(&w, 8).unwrap().len(), 1);
        let w: WedgeSpace = "S8".parse().unwrap();
        assert!(enumerate_vectors(&w, 8).is_err());
    }

    #[test]
    fn two_spheres() {
        let w: WedgeSpace = "S6 v S7".parse().unwrap();
        let r = cross_check(&w, 8).unwrap();
        assert_eq!(r.orbit_count, 3);
        assert!(r.mismatches.is_empty(), "{}", r);
    }

    #[test]
    fn no_moves_gives_singletons() {
        let w: WedgeSpace = "P7(2^2)".parse().unwrap();
        let r = cross_check_with(&w, 8, &[], DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(r.orbit_count, r.vector_count);
        assert!(!r.mismatches.is_empty());
    }
}
