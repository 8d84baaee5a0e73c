//! Canonical forms of attaching vectors in degree `n+3` over wedges of
//! elementary complexes with bottom cells in dimensions `n..n+2`.
//!
//! A vector is split into its 2- and 3-primary parts, each summand contributes
//! at most one 2-primary atom (after the self-equivalences that clear a
//! secondary generator) and at most one 3-primary atom, and atoms are then
//! eliminated along the order relation generated by the rule pack.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::abelian::{primary_idempotent, GroupElement};
use crate::catalog::{collect, pi, Complex, Gen, Kind, Morph};
use crate::cohomops::OperationFlags;
use crate::error::{Error, Result};
use crate::wedgemap::{act, alpha_type, AttachingVector, EquivalenceMatrix, MorphExpr, WedgeSpace};

pub const DEFAULT_BUDGET: usize = 10_000;

/// A generator class that can survive reduction, on its host complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    /// `eta` on `S^{n+2}`
    Eta,
    /// `etatilde_s` on `P^{n+2}(2^s)`
    EtaTilde { s: u32 },
    /// `etatilde_r eta` on `P^{n+1}(2^r)`
    EtaTildeEta { r: u32 },
    /// `icheck_P etatilde eta` on `C^{n+2,s}_r`
    ICheckP { r: u32, s: u32 },
    /// `ibar_P etatilde eta` on `C^{n+2}_r`
    IBarP { r: u32 },
    /// `eta^2` on `S^{n+1}`
    Eta2,
    /// `i eta^2` on `P^{n+2}(2^s)`; twice the lift when `s = 1`
    IEta2 { s: u32 },
    /// `ihat eta^2` on `C^{n+2,s}`
    IHatEta2 { s: u32 },
    /// `icheck eta^2` on `C^{n+2,s}_r`
    ICheckEta2 { s: u32, r: u32 },
    /// `eta^3 = 12 nu` on `S^n`
    Eta3,
    /// `i eta^3 = 4 i nu` on `P^{n+1}(2^r)`, `r >= 3`
    IEta3 { r: u32 },
    /// `alpha_1 = 16 nu` on `S^n`
    Alpha1,
    /// `i_eta alpha_1` on `C_eta^{n+2}`
    IEtaAlpha1,
    /// `ihat alpha_1` on `C^{n+2,s}`
    IHatAlpha1 { s: u32 },
    /// `i alpha_1` on `P^{n+1}(3^r)`
    IAlpha1 { r: u32 },
}

impl Atom {
    pub fn prime(&self) -> u64 {
        match self {
            Atom::Alpha1 | Atom::IEtaAlpha1 | Atom::IHatAlpha1 { .. } | Atom::IAlpha1 { .. } => 3,
            _ => 2,
        }
    }

    /// Operation tier of a 2-primary atom: 1 for classes detected by `Sq^2`,
    /// 2 for those detected by the secondary operation, 3 for the tertiary one.
    pub fn tier(&self) -> Option<u8> {
        use Atom::*;
        match self {
            Eta | EtaTilde { .. } => Some(1),
            EtaTildeEta { .. } | ICheckP { .. } | IBarP { .. } | Eta2 | IEta2 { .. } | IHatEta2 { .. }
            | ICheckEta2 { .. } => Some(2),
            Eta3 | IEta3 { .. } => Some(3),
            _ => None,
        }
    }

    /// Sort key; smaller keys eliminate larger ones along the order relation.
    pub fn rank(&self) -> (u32, i64, u32, u32) {
        use Atom::*;
        match *self {
            EtaTilde { s } => (0, s as i64, 0, 0),
            Eta => (1, 0, 0, 0),
            EtaTildeEta { r } => (2, r as i64, 0, 0),
            ICheckP { r, s } => (2, r as i64, 1, s),
            IBarP { r } => (2, r as i64, 2, 0),
            Eta2 => (3, 0, 0, 0),
            IHatEta2 { s } => (4, -(s as i64), 0, 0),
            ICheckEta2 { s, r } => (4, -(s as i64), 1, r),
            IEta2 { s } => (4, -(s as i64), 2, 0),
            Eta3 => (5, 0, 0, 0),
            IEta3 { r } => (6, -(r as i64), 0, 0),
            Alpha1 | IEtaAlpha1 | IHatAlpha1 { .. } => (0, 0, 0, 0),
            IAlpha1 { r } => (1, -(r as i64), 0, 0),
        }
    }

    /// Host complex when the source sphere is `S^{n+3}`.
    pub fn host(&self, n: u32) -> Complex {
        use Atom::*;
        match *self {
            Eta => Complex::sphere(n + 2),
            EtaTilde { s } | IEta2 { s } => Complex::moore(n + 2, 2, s),
            EtaTildeEta { r } | IEta3 { r } => Complex::moore(n + 1, 2, r),
            ICheckP { r, s } | ICheckEta2 { s, r } => Complex::chang_rs(n + 2, r, s),
            IBarP { r } => Complex::chang_r(n + 2, r),
            Eta2 => Complex::sphere(n + 1),
            IHatEta2 { s } | IHatAlpha1 { s } => Complex::chang_s(n + 2, s),
            Eta3 | Alpha1 => Complex::sphere(n),
            IEtaAlpha1 => Complex::ceta(n + 2),
            IAlpha1 { r } => Complex::moore(n + 1, 3, r),
        }
    }

    /// Generator terms of the atom in its host table.
    pub fn terms(&self) -> Vec<(Gen, i64)> {
        use Atom::*;
        match *self {
            Eta => vec![(Gen::Eta, 1)],
            EtaTilde { .. } => vec![(Gen::EtaTilde, 1)],
            EtaTildeEta { .. } => vec![(Gen::EtaTildeEta, 1)],
            ICheckP { .. } => vec![(Gen::ICheckPEtaTildeEta, 1)],
            IBarP { .. } => vec![(Gen::IBarPEtaTildeEta, 1)],
            Eta2 => vec![(Gen::Eta2, 1)],
            IEta2 { .. } => vec![(Gen::IEta2, 1)],
            IHatEta2 { .. } => vec![(Gen::IHatEta2, 1)],
            ICheckEta2 { .. } => vec![(Gen::ICheckEta2, 1)],
            Eta3 => vec![(Gen::Nu, 12)],
            IEta3 { .. } => vec![(Gen::INu, 4)],
            Alpha1 => vec![(Gen::Nu, 16)],
            IEtaAlpha1 => vec![(Gen::IEtaCNu, 4)],
            IHatAlpha1 { .. } => vec![(Gen::IHatNu, 4)],
            IAlpha1 { .. } => vec![(Gen::IAlpha1, 1)],
        }
    }

    /// The atom as an element of `pi_{n+3}(host)`.
    pub fn element(&self, n: u32) -> Result<GroupElement> {
        let t = pi(&self.host(n), n + 3)?;
        collect(&t, &self.terms())
    }

    fn same_family(&self, other: &Atom) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Atom::*;
        match self {
            Eta => write!(f, "eta"),
            EtaTilde { s } => write!(f, "etatilde_{}", s),
            EtaTildeEta { r } => write!(f, "etatilde_{} eta", r),
            ICheckP { r, s } => write!(f, "icheck_P^{} etatilde eta [s={}]", r, s),
            IBarP { r } => write!(f, "ibar_P^{} etatilde eta", r),
            Eta2 => write!(f, "eta2"),
            IEta2 { s } => write!(f, "i^{} eta2", s),
            IHatEta2 { s } => write!(f, "ihat^{} eta2", s),
            ICheckEta2 { s, r } => write!(f, "icheck^{{{},{}}} eta2", s, r),
            Eta3 => write!(f, "eta3"),
            IEta3 { r } => write!(f, "i^{} eta3", r),
            Alpha1 => write!(f, "alpha1"),
            IEtaAlpha1 => write!(f, "i_eta alpha1"),
            IHatAlpha1 { s } => write!(f, "ihat^{} alpha1", s),
            IAlpha1 { r } => write!(f, "i^{} alpha1 [p=3]", r),
        }
    }
}

/// `alpha < beta`: some witness map carries the sum `alpha` to the sum `beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecRule {
    pub alpha: Vec<Atom>,
    pub beta: Vec<Atom>,
    pub witness: MorphExpr,
    pub tag: String,
}

/// A self-equivalence of one summand removing `eliminated` next to `kept`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusRule {
    pub host: Complex,
    pub eliminated: Atom,
    pub kept: Atom,
    pub equivalence: EquivalenceMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulePack {
    pub n: u32,
    pub bound: u32,
    pub prec: Vec<PrecRule>,
    pub plus: Vec<PlusRule>,
}

fn sum_host(atoms: &[Atom], n: u32) -> Result<Complex> {
    let h = atoms[0].host(n);
    if atoms.iter().any(|a| a.host(n) != h) {
        return Err(Error::Structural("atoms of one side must share a host".into()));
    }
    Ok(h)
}

fn sum_element(atoms: &[Atom], n: u32) -> Result<GroupElement> {
    let host = sum_host(atoms, n)?;
    let t = pi(&host, n + 3)?;
    let terms: Vec<(Gen, i64)> = atoms.iter().flat_map(|a| a.terms()).collect();
    collect(&t, &terms)
}

impl PrecRule {
    /// Whether the witness carries `alpha` to `beta` in the composition table.
    pub fn verify(&self, n: u32) -> Result<bool> {
        let src = sum_host(&self.alpha, n)?;
        let tgt = sum_host(&self.beta, n)?;
        let x = sum_element(&self.alpha, n)?;
        let y = self.witness.apply(&src, &tgt, &x, n + 3)?;
        Ok(y == sum_element(&self.beta, n)?)
    }
}

impl PlusRule {
    pub fn verify(&self, n: u32) -> Result<bool> {
        let wedge = self.equivalence.wedge.clone();
        let x = sum_element(&[self.kept, self.eliminated], n)?;
        let v = AttachingVector::new(wedge.clone(), n + 3, vec![x])?;
        let w = act(&self.equivalence, &v)?;
        Ok(w.entries[0] == self.kept.element(n)? && self.equivalence.induces_homology_iso()?)
    }
}

impl fmt::Display for PrecRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: &[Atom]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" + ");
        write!(f, "{}: {} < {} via {}", self.tag, side(&self.alpha), side(&self.beta), self.witness)
    }
}

fn chain(ms: Vec<Morph>) -> MorphExpr {
    MorphExpr::chain(ms)
}

/// Every rule instance with exponents `1..=bound`, for source sphere `S^{n+3}`.
pub fn rule_pack(n: u32, bound: u32) -> RulePack {
    use Atom::*;
    let mut prec = Vec::new();
    let mut add = |alpha: Vec<Atom>, beta: Vec<Atom>, witness: MorphExpr, tag: &str| {
        prec.push(PrecRule { alpha, beta, witness, tag: tag.to_string() })
    };
    let ps = |s: u32| Complex::moore(n + 2, 2, s);
    let pr = |r: u32| Complex::moore(n + 1, 2, r);
    let cbar = |r: u32| Complex::chang_r(n + 2, r);
    let chat = |s: u32| Complex::chang_s(n + 2, s);
    let ccheck = |r: u32, s: u32| Complex::chang_rs(n + 2, r, s);
    let range: Vec<u32> = (1..=bound).collect();

    // 2-primary chain
    for &s in &range {
        for &s2 in &range {
            if s < s2 {
                add(vec![EtaTilde { s }], vec![EtaTilde { s: s2 }], chain(vec![Morph::Chi { source: ps(s), s: s2 }]), "prec-chain");
            }
        }
        add(vec![EtaTilde { s }], vec![Eta], chain(vec![Morph::Pinch { source: ps(s) }]), "prec-chain");
    }
    for &r in &range {
        add(vec![Eta], vec![EtaTildeEta { r }], chain(vec![Morph::EtaTilde { target: pr(r) }]), "prec-chain");
        add(vec![EtaTildeEta { r }], vec![Eta2], chain(vec![Morph::Pinch { source: pr(r) }]), "prec-chain");
        add(vec![IBarP { r }], vec![Eta2], chain(vec![Morph::QBarTop { source: cbar(r) }]), "prec-chain");
        for &s in &range {
            add(vec![EtaTildeEta { r }], vec![ICheckP { r, s }], chain(vec![Morph::ICheckP { target: ccheck(r, s) }]), "prec-chain");
            add(vec![ICheckP { r, s }], vec![IBarP { r }], chain(vec![Morph::QCheckC { source: ccheck(r, s) }]), "prec-chain");
        }
        for &r2 in &range {
            if r < r2 {
                add(vec![IBarP { r }], vec![EtaTildeEta { r: r2 }], chain(vec![Morph::QBarR { source: cbar(r), r2 }]), "prec-chain");
                add(vec![EtaTildeEta { r }], vec![EtaTildeEta { r: r2 }], chain(vec![Morph::Chi { source: pr(r), s: r2 }]), "prec-chain");
            }
        }
    }
    add(vec![Eta], vec![Eta2], chain(vec![Morph::Eta { n: n + 1 }]), "prec-chain");
    add(vec![Eta2], vec![Eta3], chain(vec![Morph::Eta { n }]), "prec-chain");
    for &s in &range {
        add(vec![Eta2], vec![IEta2 { s }], chain(vec![Morph::Incl { target: ps(s) }]), "prec-chain");
        add(vec![Eta2], vec![IHatEta2 { s }], chain(vec![Morph::IHatTop { target: chat(s) }]), "prec-chain");
        add(vec![IHatEta2 { s }], vec![IEta2 { s }], chain(vec![Morph::QHatP { source: chat(s) }]), "prec-chain");
        add(vec![IEta2 { s }], vec![Eta3], chain(vec![Morph::EtaBar { source: ps(s) }]), "prec-chain");
        add(vec![IHatEta2 { s }], vec![Eta3], chain(vec![Morph::MuS { source: chat(s) }]), "prec-chain");
        for &r in &range {
            add(vec![Eta2], vec![ICheckEta2 { s, r }], chain(vec![Morph::ICheckTop { target: ccheck(r, s) }]), "prec-chain");
            add(vec![IHatEta2 { s }], vec![ICheckEta2 { s, r }], chain(vec![Morph::ICheckC { target: ccheck(r, s) }]), "prec-chain");
            add(vec![ICheckEta2 { s, r }], vec![IEta2 { s }], chain(vec![Morph::QCheckP { source: ccheck(r, s) }]), "prec-chain");
        }
        for &s2 in &range {
            if s < s2 {
                add(vec![IEta2 { s: s2 }], vec![IHatEta2 { s }], chain(vec![Morph::XiBar { source: ps(s2), s }]), "prec-chain");
                add(vec![IEta2 { s: s2 }], vec![IEta2 { s }], chain(vec![Morph::Chi { source: ps(s2), s }]), "index-orders");
                add(vec![IHatEta2 { s: s2 }], vec![IHatEta2 { s }], chain(vec![Morph::Lambda { source: chat(s2), s }]), "index-orders");
            }
        }
    }
    for &r in range.iter().filter(|&&r| r >= 3) {
        add(vec![Eta3], vec![IEta3 { r }], chain(vec![Morph::Incl { target: pr(r) }]), "prec-chain");
        for &r2 in range.iter().filter(|&&r2| r2 > r) {
            add(vec![IEta3 { r: r2 }], vec![IEta3 { r }], chain(vec![Morph::Chi { source: pr(r2), s: r }]), "index-orders");
        }
    }
    // index orders through the chain
    for &r in &range {
        for &r2 in range.iter().filter(|&&r2| r2 > r) {
            for &s in &range {
                for &s2 in &range {
                    add(
                        vec![ICheckP { r, s }],
                        vec![ICheckP { r: r2, s: s2 }],
                        chain(vec![
                            Morph::QCheckC { source: ccheck(r, s) },
                            Morph::QBarR { source: cbar(r), r2 },
                            Morph::ICheckP { target: ccheck(r2, s2) },
                        ]),
                        "index-orders",
                    );
                }
            }
        }
    }

    // 3-primary
    let s5 = Complex::sphere(n);
    let ceta = Complex::ceta(n + 2);
    let neg = |c: Complex| Morph::Mult { on: c, k: -1 };
    add(vec![Alpha1], vec![IEtaAlpha1], chain(vec![Morph::IEta { target: ceta }]), "3-primary");
    add(vec![IEtaAlpha1], vec![Alpha1], chain(vec![Morph::ZetaBar { source: ceta }, neg(s5)]), "3-primary");
    for &s in &range {
        add(vec![Alpha1], vec![IHatAlpha1 { s }], chain(vec![Morph::IHatBottom { target: chat(s) }]), "3-primary");
        add(
            vec![IHatAlpha1 { s }],
            vec![Alpha1],
            chain(vec![Morph::QHatEta { source: chat(s) }, Morph::ZetaBar { source: ceta }, neg(s5)]),
            "3-primary",
        );
    }
    for &r in &range {
        let p3 = Complex::moore(n + 1, 3, r);
        add(vec![Alpha1], vec![IAlpha1 { r }], chain(vec![Morph::Incl { target: p3 }]), "3-primary");
        for &r2 in range.iter().filter(|&&r2| r2 > r) {
            add(
                vec![IAlpha1 { r: r2 }],
                vec![IAlpha1 { r }],
                chain(vec![Morph::Chi { source: Complex::moore(n + 1, 3, r2), s: r }]),
                "3-primary",
            );
        }
    }

    // joint 2/3 relations
    add(vec![Alpha1, Eta3], vec![Alpha1], MorphExpr::scalar(-2), "joint-2-3");
    add(vec![Alpha1, Eta3], vec![Eta3], MorphExpr::scalar(3), "joint-2-3");
    for &s in &range {
        let both = vec![IHatAlpha1 { s }, IHatEta2 { s }];
        add(vec![Alpha1, Eta3], vec![IHatAlpha1 { s }], chain(vec![Morph::IHatBottom { target: chat(s) }]), "joint-2-3");
        add(
            both.clone(),
            vec![Alpha1],
            chain(vec![Morph::QHatEta { source: chat(s) }, Morph::ZetaBar { source: ceta }, neg(s5)]),
            "joint-2-3",
        );
        add(both.clone(), vec![Eta3], chain(vec![Morph::MuS { source: chat(s) }]), "joint-2-3");
        add(both.clone(), vec![IHatAlpha1 { s }], MorphExpr::scalar(-2), "joint-2-3");
        add(both.clone(), vec![IHatEta2 { s }], MorphExpr::scalar(3), "joint-2-3");
        for &s2 in range.iter().filter(|&&s2| s2 > s) {
            let both2 = vec![IHatAlpha1 { s: s2 }, IHatEta2 { s: s2 }];
            add(both2.clone(), vec![IHatAlpha1 { s }], chain(vec![Morph::MuSS { source: chat(s2), s }]), "joint-2-3");
            add(both2, vec![IHatEta2 { s }], chain(vec![Morph::Lambda { source: chat(s2), s }]), "joint-2-3");
            add(both.clone(), vec![IHatAlpha1 { s: s2 }], chain(vec![Morph::ThetaMap { source: chat(s), s2 }]), "joint-2-3");
        }
    }

    let mut plus = Vec::new();
    for &s in &range {
        if s >= 2 {
            let h = ps(s);
            let w = WedgeSpace::new(vec![h]).unwrap();
            plus.push(PlusRule {
                host: h,
                eliminated: IEta2 { s },
                kept: EtaTilde { s },
                equivalence: EquivalenceMatrix::diagonal(&w, 0, alpha_type(&h).unwrap()),
            });
        }
    }
    for &r in range.iter().filter(|&&r| r >= 3) {
        let h = pr(r);
        let w = WedgeSpace::new(vec![h]).unwrap();
        plus.push(PlusRule {
            host: h,
            eliminated: IEta3 { r },
            kept: EtaTildeEta { r },
            equivalence: EquivalenceMatrix::diagonal(&w, 0, alpha_type(&h).unwrap()),
        });
    }
    for &r in &range {
        for &s in &range {
            let h = ccheck(r, s);
            let w = WedgeSpace::new(vec![h]).unwrap();
            plus.push(PlusRule {
                host: h,
                eliminated: ICheckEta2 { s, r },
                kept: ICheckP { r, s },
                equivalence: EquivalenceMatrix::diagonal(&w, 0, alpha_type(&h).unwrap()),
            });
        }
    }
    RulePack { n, bound, prec, plus }
}

/// Reflexive-transitive closure of the single-atom rules.
pub struct Order {
    reach: HashMap<Atom, BTreeSet<Atom>>,
}

impl Order {
    pub fn from_pack(pack: &RulePack) -> Order {
        let mut edges: HashMap<Atom, BTreeSet<Atom>> = HashMap::new();
        for r in &pack.prec {
            if r.alpha.len() == 1 && r.beta.len() == 1 {
                edges.entry(r.alpha[0]).or_default().insert(r.beta[0]);
            }
        }
        let nodes: BTreeSet<Atom> = edges.iter().flat_map(|(a, bs)| std::iter::once(*a).chain(bs.iter().copied())).collect();
        let mut reach = HashMap::new();
        for &a in &nodes {
            let mut seen = BTreeSet::from([a]);
            let mut stack = vec![a];
            while let Some(x) = stack.pop() {
                for &y in edges.get(&x).into_iter().flatten() {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            reach.insert(a, seen);
        }
        Order { reach }
    }

    /// `a` can eliminate `b` (including `a == b` on another summand).
    pub fn dominates(&self, a: &Atom, b: &Atom) -> bool {
        a == b || self.reach.get(a).is_some_and(|s| s.contains(b))
    }
}

/// One applied rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub tag: String,
    pub detail: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.tag, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub vector: AttachingVector,
    pub trace: Vec<TraceStep>,
}

/// Project every coefficient onto its `p`-primary part.
pub fn localize(v: &AttachingVector, p: u64) -> Result<AttachingVector> {
    if p != 2 && p != 3 {
        return Err(Error::Unsupported(format!("localization at {} is not supported", p)));
    }
    let tables = v.tables()?;
    let mut entries = Vec::new();
    for (t, e) in tables.iter().zip(&v.entries) {
        let mut c = Vec::new();
        for (s, &x) in t.group.summands.iter().zip(&e.coeffs) {
            if s.is_free() {
                return Err(Error::Unsupported(format!("{} has a free summand in degree {}", t.host, t.degree)));
            }
            let k = primary_idempotent(s.order, p);
            c.push(s.reduce((k as i128 * x as i128 % s.order as i128) as i64));
        }
        entries.push(GroupElement::new(c));
    }
    Ok(AttachingVector { wedge: v.wedge.clone(), source_degree: v.source_degree, entries })
}

/// Sum of a 2-primary and a 3-primary vector on the same wedge.
pub fn merge_locals(v2: &AttachingVector, v3: &AttachingVector) -> Result<AttachingVector> {
    if v2.wedge != v3.wedge || v2.source_degree != v3.source_degree {
        return Err(Error::Structural("local vectors live on different wedges".into()));
    }
    if localize(v2, 2)? != *v2 {
        return Err(Error::Structural(format!("{} is not 2-primary", v2)));
    }
    if localize(v3, 3)? != *v3 {
        return Err(Error::Structural(format!("{} is not 3-primary", v3)));
    }
    v2.add(v3)
}

/// Atoms read off one summand entry.
#[derive(Debug, Clone, Default)]
struct SummandAtoms {
    two: Vec<Atom>,
    three: Option<(Atom, i64)>,
}

fn nu_admissible(c: i64) -> bool {
    c % 4 == 0
}

fn read_atoms(host: &Complex, n: u32, entry: &GroupElement) -> Result<SummandAtoms> {
    let t = pi(host, n + 3)?;
    let coeff = |g: Gen| t.position(g).map(|k| entry.coeffs[k]).unwrap_or(0);
    let mut out = SummandAtoms::default();
    if entry.is_zero() {
        return Ok(out);
    }
    let inadmissible = || Err(Error::Unsupported(format!("coefficient outside the admissible domain on {}", host)));
    let unsupported = || Err(Error::Unsupported(format!("{} is not a summand of a reducible wedge in degree {}", host, n + 3)));
    let rel = (n + 3).checked_sub(host.bottom).unwrap_or(99);
    match (host.kind, rel) {
        (Kind::Sphere, 1) => out.two.push(Atom::Eta),
        (Kind::Sphere, 2) => out.two.push(Atom::Eta2),
        (Kind::Sphere, 3) => {
            let c = coeff(Gen::Nu);
            if !nu_admissible(c) {
                return inadmissible();
            }
            if c % 8 == 4 {
                out.two.push(Atom::Eta3);
            }
            if c % 3 != 0 {
                out.three = Some((Atom::Alpha1, c % 3));
            }
        }
        (Kind::Moore { p: 2, r }, 2) => {
            let x = coeff(Gen::EtaTilde);
            if r == 1 {
                if x % 2 == 1 {
                    out.two.push(Atom::EtaTilde { s: 1 });
                } else if x == 2 {
                    out.two.push(Atom::IEta2 { s: 1 });
                }
            } else {
                if x == 1 {
                    out.two.push(Atom::EtaTilde { s: r });
                }
                if coeff(Gen::IEta2) == 1 {
                    out.two.push(Atom::IEta2 { s: r });
                }
            }
        }
        (Kind::Moore { p: 2, r }, 3) => {
            let c = coeff(Gen::INu);
            if !nu_admissible(c) {
                return inadmissible();
            }
            if coeff(Gen::EtaTildeEta) == 1 {
                out.two.push(Atom::EtaTildeEta { r });
            }
            if c != 0 {
                out.two.push(Atom::IEta3 { r });
            }
        }
        (Kind::Moore { p: 3, r }, 3) => out.three = Some((Atom::IAlpha1 { r }, coeff(Gen::IAlpha1))),
        (Kind::ChangEta, 3) => {
            let c = coeff(Gen::IEtaCNu);
            if !nu_admissible(c) {
                return inadmissible();
            }
            out.three = Some((Atom::IEtaAlpha1, c / 4));
        }
        (Kind::ChangR { r }, 3) => {
            if !nu_admissible(coeff(Gen::IBarNu)) {
                return inadmissible();
            }
            if coeff(Gen::IBarPEtaTildeEta) == 1 {
                out.two.push(Atom::IBarP { r });
            }
        }
        (Kind::ChangS { s }, 3) => {
            let c = coeff(Gen::IHatNu);
            if !nu_admissible(c) {
                return inadmissible();
            }
            if coeff(Gen::IHatEta2) == 1 {
                out.two.push(Atom::IHatEta2 { s });
            }
            if c != 0 {
                out.three = Some((Atom::IHatAlpha1 { s }, c / 4));
            }
        }
        (Kind::ChangRS { r, s }, 3) => {
            if !nu_admissible(coeff(Gen::ICheckNu)) {
                return inadmissible();
            }
            if coeff(Gen::ICheckPEtaTildeEta) == 1 {
                out.two.push(Atom::ICheckP { r, s });
            }
            if coeff(Gen::ICheckEta2) == 1 {
                out.two.push(Atom::ICheckEta2 { s, r });
            }
        }
        _ => return unsupported(),
    }
    Ok(out)
}

/// Whether `v` lies in the admissible domain that canonicalization accepts.
pub fn is_admissible(v: &AttachingVector) -> bool {
    if v.source_degree < 8 {
        return false;
    }
    let n = v.source_degree - 3;
    v.wedge.summands.iter().zip(&v.entries).all(|(h, e)| read_atoms(h, n, e).is_ok())
}

fn max_exponent(w: &WedgeSpace) -> u32 {
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
        .max(3)
}

struct Budget {
    left: usize,
}

impl Budget {
    fn spend(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::Indeterminate("rule budget exhausted".into()));
        }
        self.left -= 1;
        Ok(())
    }
}

/// Canonical representative of the orbit of `v` with the default budget.
/// Rule packs depend only on `(n, bound)`; building the order closure dominates small reductions.
fn cached_pack(n: u32, bound: u32) -> Arc<(RulePack, Order)> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<(RulePack, Order)>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry((n, bound))
        .or_insert_with(|| {
            let pack = rule_pack(n, bound);
            let order = Order::from_pack(&pack);
            Arc::new((pack, order))
        })
        .clone()
}

pub fn canonicalize(v: &AttachingVector, flags: Option<&OperationFlags>) -> Result<Reduction> {
    canonicalize_with_budget(v, flags, DEFAULT_BUDGET)
}

pub fn canonicalize_with_budget(v: &AttachingVector, flags: Option<&OperationFlags>, budget: usize) -> Result<Reduction> {
    if v.wedge.is_empty() {
        return Ok(Reduction { vector: v.clone(), trace: vec![] });
    }
    if v.source_degree < 8 {
        return Err(Error::Unsupported("canonical forms need source degree at least 8".into()));
    }
    let n = v.source_degree - 3;
    let cached = cached_pack(n, max_exponent(&v.wedge));
    let (pack, order) = (&cached.0, &cached.1);
    let mut budget = Budget { left: budget };
    let mut trace = Vec::new();
    let w = &v.wedge;

    let mut atoms: Vec<SummandAtoms> = Vec::new();
    for (h, e) in w.summands.iter().zip(&v.entries) {
        atoms.push(read_atoms(h, n, e)?);
    }

    // clear secondary generators inside one summand
    for (i, a) in atoms.iter_mut().enumerate() {
        if a.two.len() == 2 {
            budget.spend()?;
            let (kept, gone) = if a.two[0].rank() < a.two[1].rank() { (a.two[0], a.two[1]) } else { (a.two[1], a.two[0]) };
            let rule = pack.plus.iter().find(|p| p.kept == kept && p.eliminated == gone);
            let via = rule.map(|p| p.equivalence.entries[0][0].to_string()).unwrap_or_default();
            trace.push(TraceStep {
                tag: "reduce-plus".into(),
                detail: format!("{} on summand {} ({}) removes {} via {}", kept, i + 1, w.summands[i], gone, via),
            });
            a.two = vec![kept];
        }
    }

    // 2-primary elimination along the order
    let mut present: Vec<(usize, Atom)> = atoms.iter().enumerate().filter_map(|(i, a)| a.two.first().map(|x| (i, *x))).collect();
    let mut pivots: Vec<(usize, Atom)> = Vec::new();
    while !present.is_empty() {
        let pos = (0..present.len())
            .filter(|&x| {
                !present
                    .iter()
                    .any(|y| y.1 != present[x].1 && order.dominates(&y.1, &present[x].1) && !order.dominates(&present[x].1, &y.1))
            })
            .min_by_key(|&x| (present[x].1.rank(), present[x].0))
            .expect("a finite preorder has minimal elements");
        let (pi_, pa) = present.remove(pos);
        let mut rest = Vec::new();
        for (j, b) in present {
            if order.dominates(&pa, &b) {
                budget.spend()?;
                let tag = if pa.same_family(&b) { "index-orders" } else { "prec-chain" };
                trace.push(TraceStep {
                    tag: tag.into(),
                    detail: format!("{} on summand {} eliminates {} on summand {}", pa, pi_ + 1, b, j + 1),
                });
            } else {
                rest.push((j, b));
            }
        }
        present = rest;
        pivots.push((pi_, pa));
    }

    // identical summands are interchangeable; use the first free one
    let mut used: Vec<usize> = Vec::new();
    for p in pivots.iter_mut() {
        let j = (0..w.len()).find(|&j| w.summands[j] == w.summands[p.0] && !used.contains(&j)).unwrap_or(p.0);
        if j != p.0 {
            budget.spend()?;
            trace.push(TraceStep {
                tag: "index-orders".into(),
                detail: format!("{} moves from summand {} to the equal summand {}", p.1, p.0 + 1, j + 1),
            });
            p.0 = j;
        }
        used.push(j);
    }

    // 3-primary part
    let threes: Vec<(usize, Atom)> = atoms.iter().enumerate().filter_map(|(i, a)| a.three.map(|(x, c)| (i, x, c))).filter(|x| x.2 % 3 != 0).map(|(i, x, _)| (i, x)).collect();
    let mut three_pivot: Option<(usize, Atom)> = None;
    if !threes.is_empty() {
        let has_u = threes.iter().any(|(_, a)| !matches!(a, Atom::IAlpha1 { .. }));
        let target = if has_u {
            let two_at = |f: &dyn Fn(&Atom) -> bool| pivots.iter().find(|(_, a)| f(a)).map(|(i, _)| *i);
            let first = |f: &dyn Fn(&Complex) -> bool| w.summands.iter().position(f);
            let placed = two_at(&|a| *a == Atom::Eta3)
                .or_else(|| first(&|c| c.kind == Kind::Sphere && c.bottom == n))
                .or_else(|| first(&|c| c.kind == Kind::ChangEta))
                .or_else(|| two_at(&|a| matches!(a, Atom::IHatEta2 { .. })))
                .or_else(|| first(&|c| matches!(c.kind, Kind::ChangS { .. })))
                .expect("a U-type atom lives on a sphere or Chang summand");
            let atom = match w.summands[placed].kind {
                Kind::Sphere => Atom::Alpha1,
                Kind::ChangEta => Atom::IEtaAlpha1,
                Kind::ChangS { s } => Atom::IHatAlpha1 { s },
                _ => unreachable!(),
            };
            (placed, atom)
        } else {
            let (i, a) = *threes.iter().min_by_key(|(i, a)| (a.rank(), *i)).expect("nonempty");
            ((0..w.len()).find(|&j| w.summands[j] == w.summands[i]).unwrap_or(i), a)
        };
        for &(j, b) in &threes {
            if (j, b) == target {
                continue;
            }
            budget.spend()?;
            let joint = !atoms[j].two.is_empty() && pivots.iter().any(|(i, _)| *i == j);
            trace.push(TraceStep {
                tag: if joint { "joint-2-3".into() } else { "3-primary".into() },
                detail: format!("{} on summand {} is absorbed by {} on summand {}", b, j + 1, target.1, target.0 + 1),
            });
        }
        if !threes.contains(&target) {
            budget.spend()?;
            trace.push(TraceStep {
                tag: "3-primary".into(),
                detail: format!("the 3-primary class moves to {} on summand {}", target.1, target.0 + 1),
            });
        }
        three_pivot = Some(target);
    }

    // assemble
    let mut out = AttachingVector::zero(w.clone(), v.source_degree)?;
    for &(i, a) in &pivots {
        let mut terms = a.terms();
        if a == (Atom::IEta2 { s: 1 }) {
            terms = vec![(Gen::EtaTilde, 2)];
        }
        out = out.with_entry(i, &terms)?;
    }
    if let Some((i, a)) = three_pivot {
        let t = pi(&w.summands[i], v.source_degree)?;
        let add = collect(&t, &a.terms())?;
        out.entries[i] = t.group.add(&out.entries[i], &add)?;
        if a == Atom::Alpha1 && pivots.iter().any(|&(j, b)| j == i && b == Atom::Eta3) {
            trace.push(TraceStep { tag: "4nu".into(), detail: format!("eta3 + alpha1 = 4 nu on summand {}", i + 1) });
        }
        if matches!(a, Atom::IHatAlpha1 { .. }) && pivots.iter().any(|&(j, _)| j == i) {
            trace.push(TraceStep {
                tag: "joint-2-3".into(),
                detail: format!("ihat eta2 + ihat alpha1 share summand {}", i + 1),
            });
        }
    }

    if let Some(f) = flags {
        let got = crate::cohomops::flags_of_vector(&out)?;
        f.check_against(&got)?;
    }
    Ok(Reduction { vector: out, trace })
}

/// Verify every rule of the pack against the composition table.
pub fn verify_pack(pack: &RulePack) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for r in &pack.prec {
        match r.verify(pack.n) {
            Ok(true) => {}
            Ok(false) => bad.push(r.to_string()),
            Err(e) => bad.push(format!("{} ({})", r, e)),
        }
    }
    for p in &pack.plus {
        match p.verify(pack.n) {
            Ok(true) => {}
            Ok(false) => bad.push(format!("plus rule on {}", p.host)),
            Err(e) => bad.push(format!("plus rule on {} ({})", p.host, e)),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(w: &str, lit: &str) -> AttachingVector {
        let w: WedgeSpace = w.parse().unwrap();
        AttachingVector::parse(&w, 8, lit).unwrap()
    }

    #[test]
    fn pack_is_sound() {
        for bound in 1..=3 {
            let pack = rule_pack(5, bound);
            assert_eq!(verify_pack(&pack).unwrap(), Vec::<String>::new());
        }
    }

    #[test]
    fn plus_cleanup() {
        let r = canonicalize(&vec_of("P7(2^2)", "[1*i_eta2 + 1*etatilde]"), None).unwrap();
        assert_eq!(r.vector.to_string(), "[1*etatilde]");
        assert_eq!(r.trace.iter().map(|t| t.tag.as_str()).collect::<Vec<_>>(), vec!["reduce-plus"]);
    }

    #[test]
    fn lift_beats_eta() {
        let r = canonicalize(&vec_of("P7(2^1) v S7", "[1*etatilde; 1*eta]"), None).unwrap();
        assert_eq!(r.vector.to_string(), "[1*etatilde; 0]");
    }

    #[test]
    fn four_nu_stays() {
        let r = canonicalize(&vec_of("S5", "[1*eta3 + 1*alpha1]"), None).unwrap();
        assert_eq!(r.vector.to_string(), "[1*eta3 + 1*alpha1]");
        assert_eq!(r.trace.iter().map(|t| t.tag.as_str()).collect::<Vec<_>>(), vec!["4nu"]);
    }

    #[test]
    fn zero_is_fixed() {
        let r = canonicalize(&vec_of("S5 v S7", "[0; 0]"), None).unwrap();
        assert!(r.vector.is_zero());
        assert!(r.trace.is_empty());
    }

    #[test]
    fn localize_examples() {
        let v = vec_of("S5", "[4*nu]");
        assert_eq!(localize(&v, 3).unwrap().entries[0].coeffs, vec![16]);
        assert_eq!(localize(&v, 2).unwrap().entries[0].coeffs, vec![12]);
        let v = vec_of("Ceta7", "[12*i_eta_nu]");
        assert!(localize(&v, 2).unwrap().is_zero());
        assert!(localize(&v, 5).is_err());
    }

    #[test]
    fn merge_examples() {
        let a = vec_of("C7{s=1}", "[1*ihat_eta2]");
        let b = vec_of("C7{s=1}", "[1*ihat_alpha1]");
        assert_eq!(merge_locals(&a, &b).unwrap().to_string(), "[1*ihat_eta2 + 1*ihat_alpha1]");
        assert!(merge_locals(&b, &a).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let v = vec_of("P7(2^1) v S7", "[1*etatilde; 1*eta]");
        assert!(matches!(canonicalize_with_budget(&v, None, 0), Err(Error::Indeterminate(_))));
    }
}
