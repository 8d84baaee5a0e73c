//! Wedge shells and candidate decompositions of the triple suspension.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abelian::{iso_check, AbelianGroup, CyclicSummand, TorsionDecomposition};
use crate::catalog::{collect, pi, Complex};
use crate::cohomops::OperationFlags;
use crate::error::{Error, Result};
use crate::reduce::{canonicalize, localize, merge_locals, Atom};
use crate::wedgemap::{general_attaching_form, AttachingVector, WedgeSpace};

/// Splitting parameters. The `t_i` are the lengths of the exponent lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplittingData {
    pub k: u32,
    /// `s_j`, one per `P7(2^s_j)` (t0 entries)
    pub s: Vec<u32>,
    /// `r_j`, one per `P6(2^r_j)` (t1 entries)
    pub r: Vec<u32>,
    /// `rbar_j`, one per `C7[r=rbar_j]` (t2 entries)
    pub rbar: Vec<u32>,
    /// `shat_j`, one per `C7{s=shat_j}` (t3 entries)
    pub shat: Vec<u32>,
    /// `rcheck_j` and `scheck_j`, one pair per `C7[r]{s}` (t4 entries)
    pub rcheck: Vec<u32>,
    pub scheck: Vec<u32>,
    /// 3-primary exponents `r'_j` (m3 entries)
    pub r3: Vec<u32>,
}

impl SplittingData {
    pub fn t0(&self) -> u32 {
        self.s.len() as u32
    }
    pub fn t1(&self) -> u32 {
        self.r.len() as u32
    }
    pub fn t2(&self) -> u32 {
        self.rbar.len() as u32
    }
    pub fn t3(&self) -> u32 {
        self.shat.len() as u32
    }
    pub fn t4(&self) -> u32 {
        self.rcheck.len() as u32
    }

    /// `k + t2 <= l`, `k + t3 <= l`, positive exponents, paired check lists.
    pub fn check_ranges(&self, l: u32) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSplitting(m));
        if self.k + self.t2() > l {
            return bad(format!("k+t2 = {} exceeds l = {}", self.k + self.t2(), l));
        }
        if self.k + self.t3() > l {
            return bad(format!("k+t3 = {} exceeds l = {}", self.k + self.t3(), l));
        }
        if self.rcheck.len() != self.scheck.len() {
            return bad("rcheck and scheck must have t4 entries each".into());
        }
        let all = [&self.s, &self.r, &self.rbar, &self.shat, &self.rcheck, &self.scheck, &self.r3];
        if all.iter().any(|v| v.contains(&0)) {
            return bad("exponents must be at least 1".into());
        }
        Ok(())
    }
}

/// Which 2-primary class carries the top cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `etatilde` on `P7(2^s)`
    P7Lift,
    /// `eta` on `S7`
    S7Eta,
    /// `i eta2` on `P7(2^s)`
    P7IEta2,
    /// `etatilde eta` on `P6(2^r)`
    P6Lift,
    /// `ibar_P etatilde eta` on `C7[r]`
    CBar,
    /// `ihat eta2` on `C7{s}`
    CHat,
    /// `icheck_P etatilde eta` on `C7[r]{s}`
    CCheckP,
    /// `icheck eta2` on `C7[r]{s}`
    CCheckEta2,
    /// `eta3` on `S5`
    S5Eta3,
    /// `i eta3` on `P6(2^r)`, `r >= 3`
    P6IEta3,
}

const FAMILY_NAMES: [(Family, &str); 10] = [
    (Family::P7Lift, "p7_lift"),
    (Family::S7Eta, "s7_eta"),
    (Family::P7IEta2, "p7_ieta2"),
    (Family::P6Lift, "p6_lift"),
    (Family::CBar, "cbar"),
    (Family::CHat, "chat"),
    (Family::CCheckP, "ccheck_p"),
    (Family::CCheckEta2, "ccheck_eta2"),
    (Family::S5Eta3, "s5_eta3"),
    (Family::P6IEta3, "p6_ieta3"),
];

impl Family {
    pub fn tier(&self) -> u8 {
        match self {
            Family::P7Lift | Family::S7Eta => 1,
            Family::S5Eta3 | Family::P6IEta3 => 3,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        FAMILY_NAMES.iter().find(|(f, _)| f == self).map(|(_, n)| *n).expect("every family is named")
    }

    /// Families of one tier in the order the theorems list them.
    pub fn of_tier(tier: u8) -> Vec<Family> {
        use Family::*;
        match tier {
            1 => vec![P7Lift, S7Eta],
            2 => vec![P7IEta2, P6Lift, CBar, CHat, CCheckP, CCheckEta2],
            3 => vec![S5Eta3, P6IEta3],
            _ => vec![],
        }
    }

    /// Possible carriers `(complex, atom)` in index order `j = 1, 2, ...`;
    /// `None` marks an index whose complex cannot carry the class.
    fn members(&self, l: u32, split: &SplittingData) -> Vec<Option<(Complex, Atom)>> {
        use Family::*;
        match self {
            P7Lift => split.s.iter().map(|&s| Some((Complex::moore(7, 2, s), Atom::EtaTilde { s }))).collect(),
            P7IEta2 => split.s.iter().map(|&s| Some((Complex::moore(7, 2, s), Atom::IEta2 { s }))).collect(),
            S7Eta => (0..l - split.k - split.t2()).map(|_| Some((Complex::sphere(7), Atom::Eta))).collect(),
            S5Eta3 => (0..l - split.k - split.t3()).map(|_| Some((Complex::sphere(5), Atom::Eta3))).collect(),
            P6Lift => split.r.iter().map(|&r| Some((Complex::moore(6, 2, r), Atom::EtaTildeEta { r }))).collect(),
            P6IEta3 => split
                .r
                .iter()
                .map(|&r| if r >= 3 { Some((Complex::moore(6, 2, r), Atom::IEta3 { r })) } else { None })
                .collect(),
            CBar => split.rbar.iter().map(|&r| Some((Complex::chang_r(7, r), Atom::IBarP { r }))).collect(),
            CHat => split.shat.iter().map(|&s| Some((Complex::chang_s(7, s), Atom::IHatEta2 { s }))).collect(),
            CCheckP => split
                .rcheck
                .iter()
                .zip(&split.scheck)
                .map(|(&r, &s)| Some((Complex::chang_rs(7, r, s), Atom::ICheckP { r, s })))
                .collect(),
            CCheckEta2 => split
                .rcheck
                .iter()
                .zip(&split.scheck)
                .map(|(&r, &s)| Some((Complex::chang_rs(7, r, s), Atom::ICheckEta2 { s, r })))
                .collect(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FAMILY_NAMES
            .iter()
            .find(|(_, n)| *n == s.trim())
            .map(|(f, _)| *f)
            .ok_or_else(|| Error::InvalidSplitting(format!("unknown family `{}`", s.trim())))
    }
}

/// Optional case selectors. Indices are 1-based within the family's list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub family: Option<Family>,
    pub j0: Option<u32>,
    /// index into the 3-primary exponents `r'_j`
    pub j0_prime: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldInvariants {
    pub l: u32,
    pub d: u32,
    pub torsion: TorsionDecomposition,
    pub flags: OperationFlags,
    pub split: SplittingData,
    pub selection: Option<Selection>,
    pub smooth: bool,
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}

impl ManifoldInvariants {
    pub fn validate(&self) -> Result<()> {
        let sp = &self.split;
        sp.check_ranges(self.l)?;
        let t2 = self.torsion.exponents(2);
        let m2 = t2.len() as u32;
        if sp.t1() + sp.t2() + sp.t4() != m2 {
            return Err(Error::InvalidSplitting(format!("t1+t2+t4 != m2 ({} != {})", sp.t1() + sp.t2() + sp.t4(), m2)));
        }
        if sp.t0() + sp.t3() + sp.t4() != m2 {
            return Err(Error::InvalidSplitting(format!("t0+t3+t4 != m2 ({} != {})", sp.t0() + sp.t3() + sp.t4(), m2)));
        }
        let rs = sorted([sp.r.clone(), sp.rbar.clone(), sp.rcheck.clone()].concat());
        if rs != sorted(t2.clone()) {
            return Err(Error::InvalidSplitting("r, rbar, rcheck do not realize T2".into()));
        }
        let ss = sorted([sp.s.clone(), sp.shat.clone(), sp.scheck.clone()].concat());
        if ss != sorted(t2) {
            return Err(Error::InvalidSplitting("s, shat, scheck do not realize T2".into()));
        }
        if sorted(sp.r3.clone()) != sorted(self.torsion.exponents(3)) {
            return Err(Error::InvalidSplitting("r' does not realize T3".into()));
        }
        self.flags.validate()?;
        if let Some(sel) = &self.selection {
            if let Some(f) = sel.family {
                if self.flags.tier() != Some(f.tier()) {
                    return Err(Error::FlagMismatch(format!("family {} does not match flags {}", f, self.flags)));
                }
            }
            if sel.j0 == Some(0) || sel.j0_prime == Some(0) {
                return Err(Error::InvalidSplitting("selection indices are 1-based".into()));
            }
            if let Some(j) = sel.j0_prime {
                if j as usize > sp.r3.len() {
                    return Err(Error::InvalidSplitting(format!("j0' = {} exceeds m3 = {}", j, sp.r3.len())));
                }
            }
        }
        Ok(())
    }

    fn free_bottom(&self) -> u32 {
        self.l - self.split.k - self.split.t3()
    }

    fn free_top(&self) -> u32 {
        self.l - self.split.k - self.split.t2()
    }

    fn odd_parts(&self) -> Vec<(u64, u32)> {
        self.torsion.parts_from(3)
    }
}

fn wedge_of(v: Vec<Complex>) -> Result<WedgeSpace> {
    if v.is_empty() {
        Ok(WedgeSpace::point())
    } else {
        WedgeSpace::new(v)
    }
}

/// `dS6 v (l-k-t3)S5 v kCeta7 v (l-k-t2)S7 v P7(2^s_j) v P6(2^r_j) v C7[rbar_j] v C7{shat_j} v C7[rcheck_j]{scheck_j}`
pub fn build_v7(inv: &ManifoldInvariants) -> Result<WedgeSpace> {
    inv.validate()?;
    let sp = &inv.split;
    let mut v = Vec::new();
    v.extend((0..inv.d).map(|_| Complex::sphere(6)));
    v.extend((0..inv.free_bottom()).map(|_| Complex::sphere(5)));
    v.extend((0..sp.k).map(|_| Complex::ceta(7)));
    v.extend((0..inv.free_top()).map(|_| Complex::sphere(7)));
    v.extend(sp.s.iter().map(|&s| Complex::moore(7, 2, s)));
    v.extend(sp.r.iter().map(|&r| Complex::moore(6, 2, r)));
    v.extend(sp.rbar.iter().map(|&r| Complex::chang_r(7, r)));
    v.extend(sp.shat.iter().map(|&s| Complex::chang_s(7, s)));
    v.extend(sp.rcheck.iter().zip(&sp.scheck).map(|(&r, &s)| Complex::chang_rs(7, r, s)));
    wedge_of(v)
}

/// The 2-local shell with the odd Moore spaces `P6(T_odd) v P7(T_odd)` added.
pub fn build_w7(inv: &ManifoldInvariants) -> Result<WedgeSpace> {
    inv.validate()?;
    let sp = &inv.split;
    let odd = inv.odd_parts();
    let mut v = Vec::new();
    v.extend((0..inv.d).map(|_| Complex::sphere(6)));
    v.extend(sp.r.iter().map(|&r| Complex::moore(6, 2, r)));
    v.extend(odd.iter().map(|&(p, r)| Complex::moore(6, p, r)));
    v.extend(sp.s.iter().map(|&s| Complex::moore(7, 2, s)));
    v.extend(odd.iter().map(|&(p, r)| Complex::moore(7, p, r)));
    v.extend((0..inv.free_bottom()).map(|_| Complex::sphere(5)));
    v.extend((0..sp.k).map(|_| Complex::ceta(7)));
    v.extend((0..inv.free_top()).map(|_| Complex::sphere(7)));
    v.extend(sp.rbar.iter().map(|&r| Complex::chang_r(7, r)));
    v.extend(sp.shat.iter().map(|&s| Complex::chang_s(7, s)));
    v.extend(sp.rcheck.iter().zip(&sp.scheck).map(|(&r, &s)| Complex::chang_rs(7, r, s)));
    wedge_of(v)
}

/// `dS6 v P7(T3) v P6(T3) v lS5 v lS7`
pub fn build_u3(inv: &ManifoldInvariants) -> Result<WedgeSpace> {
    inv.validate()?;
    let t3 = inv.torsion.exponents(3);
    let mut v = Vec::new();
    v.extend((0..inv.d).map(|_| Complex::sphere(6)));
    v.extend(t3.iter().map(|&r| Complex::moore(7, 3, r)));
    v.extend(t3.iter().map(|&r| Complex::moore(6, 3, r)));
    v.extend((0..inv.l).map(|_| Complex::sphere(5)));
    v.extend((0..inv.l).map(|_| Complex::sphere(7)));
    wedge_of(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    Two,
    Three,
    Total,
}

/// `free_part v (cone wedge u vector e9)`, or `free_part v S9` without a cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WedgeDecomposition {
    pub locality: Locality,
    pub tag: String,
    pub text: String,
    pub shell: WedgeSpace,
    pub free_part: WedgeSpace,
    pub cone_part: Option<(WedgeSpace, AttachingVector)>,
    /// classes on each carrier, in carrier order
    pub carriers: Vec<(Complex, Vec<Atom>)>,
}

impl fmt::Display for WedgeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.text, self.tag)
    }
}

fn shell_name(loc: Locality) -> &'static str {
    match loc {
        Locality::Two => "V7",
        Locality::Total => "W7",
        Locality::Three => "U3",
    }
}

fn shell_of(inv: &ManifoldInvariants, loc: Locality) -> Result<WedgeSpace> {
    match loc {
        Locality::Two => build_v7(inv),
        Locality::Total => build_w7(inv),
        Locality::Three => build_u3(inv),
    }
}

/// Place the carriers into the shell and render the decomposition.
fn realize(inv: &ManifoldInvariants, loc: Locality, tag: &str, carriers: Vec<(Complex, Vec<Atom>)>) -> Result<WedgeDecomposition> {
    let shell = shell_of(inv, loc)?;
    let mut used = Vec::new();
    for (c, _) in &carriers {
        let i = (0..shell.len())
            .find(|&i| shell.summands[i] == *c && !used.contains(&i))
            .ok_or_else(|| Error::Structural(format!("{} is not a summand of {}", c, shell)))?;
        used.push(i);
    }
    let free_part = shell.without(&used);
    if carriers.is_empty() {
        let text = match loc {
            Locality::Three if shell.is_empty() => "S9".to_string(),
            Locality::Three => format!("{} v S9", shell),
            _ => format!("S9 v {}", shell_name(loc)),
        };
        return Ok(WedgeDecomposition { locality: loc, tag: tag.into(), text, shell, free_part, cone_part: None, carriers });
    }
    let cw = WedgeSpace::new(carriers.iter().map(|(c, _)| *c).collect())?;
    let mut entries = Vec::new();
    for (c, atoms) in &carriers {
        let t = pi(c, 8)?;
        let terms: Vec<_> = atoms.iter().flat_map(|a| a.terms()).collect();
        entries.push(collect(&t, &terms)?);
    }
    let vec = AttachingVector::new(cw.clone(), 8, entries)?;
    let cone = if carriers.len() == 1 && carriers[0].1 == [Atom::Eta] {
        "Ceta9".to_string()
    } else if carriers.len() == 1 {
        format!("({} u {} e9)", cw, vec)
    } else {
        format!("(({}) u {} e9)", cw, vec)
    };
    let text = match loc {
        Locality::Three if free_part.is_empty() => cone,
        Locality::Three => format!("{} v {}", free_part, cone),
        _ if carriers.len() == 1 => format!("({}/{}) v {}", shell_name(loc), cw, cone),
        _ => format!("({}/({})) v {}", shell_name(loc), cw, cone),
    };
    Ok(WedgeDecomposition { locality: loc, tag: tag.into(), text, shell, free_part, cone_part: Some((cw, vec)), carriers })
}

/// Candidate carriers of a family, after the selection; the default index is
/// the one canonical reduction keeps when every member carries the class.
fn family_carrier(inv: &ManifoldInvariants, f: Family) -> Result<Option<(Complex, Atom)>> {
    let members = f.members(inv.l, &inv.split);
    let pinned = inv.selection.as_ref().and_then(|s| s.j0);
    let pinned_family = inv.selection.as_ref().and_then(|s| s.family);
    if let (Some(j), Some(pf)) = (pinned, pinned_family) {
        if pf == f {
            return match members.get(j as usize - 1) {
                Some(Some(m)) => Ok(Some(*m)),
                Some(None) => Err(Error::InvalidSplitting(format!("index {} of {} cannot carry the class", j, f))),
                None => Err(Error::InvalidSplitting(format!("index {} exceeds the {} list", j, f))),
            };
        }
    }
    if let (Some(j), None) = (pinned, pinned_family) {
        if let Some(Some(m)) = members.get(j as usize - 1) {
            return Ok(Some(*m));
        }
    }
    Ok(members.into_iter().enumerate().filter_map(|(i, m)| m.map(|m| (i, m))).min_by_key(|(i, m)| (m.1.rank(), *i)).map(|(_, m)| m))
}

fn wanted(inv: &ManifoldInvariants, f: Family) -> bool {
    inv.selection.as_ref().and_then(|s| s.family).is_none_or(|g| g == f)
}

/// `(X, alpha_X)` for the 3-primary part of the total and 3-local theorems.
fn three_carrier(inv: &ManifoldInvariants, loc: Locality) -> Result<Option<(Complex, Atom)>> {
    let fl = &inv.flags;
    if !fl.p1_nontrivial {
        return Ok(None);
    }
    if fl.condition_star {
        let r3 = &inv.split.r3;
        if r3.is_empty() {
            return Err(Error::FlagMismatch("condition star needs 3-torsion".into()));
        }
        let j = match inv.selection.as_ref().and_then(|s| s.j0_prime) {
            Some(j) => j as usize - 1,
            None => (0..r3.len()).min_by_key(|&i| (std::cmp::Reverse(r3[i]), i)).expect("nonempty"),
        };
        let r = r3[j];
        return Ok(Some((Complex::moore(6, 3, r), Atom::IAlpha1 { r })));
    }
    if loc == Locality::Three {
        if inv.l == 0 {
            return Err(Error::FlagMismatch("a nontrivial P^1 without condition star needs l >= 1".into()));
        }
        return Ok(Some((Complex::sphere(5), Atom::Alpha1)));
    }
    if inv.free_bottom() > 0 {
        Ok(Some((Complex::sphere(5), Atom::Alpha1)))
    } else if inv.split.k > 0 {
        Ok(Some((Complex::ceta(7), Atom::IEtaAlpha1)))
    } else if let Some(&s) = inv.split.shat.first() {
        Ok(Some((Complex::chang_s(7, s), Atom::IHatAlpha1 { s })))
    } else {
        Err(Error::NoCarrier("l-k-t3 = 0, k = 0 and t3 = 0 leave no carrier for alpha1".into()))
    }
}

const ROMAN: [&str; 7] = ["i", "ii", "iii", "iv", "v", "vi", "vii"];

/// Cross-check one candidate against canonical reduction of the merged local data.
fn check_cone(inv: &ManifoldInvariants, dec: &WedgeDecomposition, flags: &OperationFlags) -> Result<()> {
    // 3-locally the chang complexes split, so the shell itself is the reduced form
    let w = match dec.locality {
        Locality::Three => dec.shell.clone(),
        _ => general_attaching_form(&inv.split, inv.l)?.wedge,
    };
    let mut v2 = AttachingVector::zero(w.clone(), 8)?;
    let mut v3 = v2.clone();
    let mut used = Vec::new();
    for (c, atoms) in &dec.carriers {
        let i = (0..w.len())
            .find(|&i| w.summands[i] == *c && !used.contains(&i))
            .ok_or_else(|| Error::Structural(format!("{} is not a summand of the attaching form", c)))?;
        used.push(i);
        for a in atoms {
            let target = if a.prime() == 2 { &mut v2 } else { &mut v3 };
            let t = pi(c, 8)?;
            let x = collect(&t, &a.terms())?;
            target.entries[i] = t.group.add(&target.entries[i], &x)?;
        }
    }
    let merged = merge_locals(&v2, &v3)?;
    if merged.wedge.is_empty() {
        return Ok(());
    }
    let canon = canonicalize(&merged, Some(flags))?.vector;
    if canon != merged {
        return Err(Error::Structural(format!("{} reduces to {}, not to the listed form", merged, canon)));
    }
    Ok(())
}

fn finish(inv: &ManifoldInvariants, out: Vec<WedgeDecomposition>, flags: &OperationFlags) -> Result<Vec<WedgeDecomposition>> {
    for d in &out {
        check_cone(inv, d, flags)?;
    }
    let smooth_drop = |t: &str| t == "Thm1.1/1c" || t == "Thm1.2/1b" || t.starts_with("Thm1.2/2b");
    Ok(out.into_iter().filter(|d| !(inv.smooth && smooth_drop(&d.tag))).collect())
}

fn no_candidates(inv: &ManifoldInvariants) -> Error {
    Error::FlagMismatch(format!("no summand can carry the class required by flags {}", inv.flags))
}

/// 2-primary carriers `(tag suffix, family, complex, atom)` for the flag tier.
fn two_primary_cases(inv: &ManifoldInvariants) -> Result<Vec<(Family, Complex, Atom)>> {
    let tier = match inv.flags.tier() {
        None => return Ok(vec![]),
        Some(t) => t,
    };
    let mut out = Vec::new();
    for f in Family::of_tier(tier) {
        if !wanted(inv, f) {
            continue;
        }
        if let Some((c, a)) = family_carrier(inv, f)? {
            out.push((f, c, a));
        }
    }
    if out.is_empty() {
        return Err(no_candidates(inv));
    }
    Ok(out)
}

pub fn classify_2local(inv: &ManifoldInvariants) -> Result<Vec<WedgeDecomposition>> {
    inv.validate()?;
    let flags = inv.flags.at_two();
    let tag = match flags.tier() {
        None => "Thm1.1/1a",
        Some(1) => "Thm1.1/2",
        Some(2) => "Thm1.1/1b",
        _ => "Thm1.1/1c",
    };
    let mut out = Vec::new();
    if flags.tier().is_none() {
        out.push(realize(inv, Locality::Two, tag, vec![])?);
    }
    for (_, c, a) in two_primary_cases(inv)? {
        out.push(realize(inv, Locality::Two, tag, vec![(c, vec![a])])?);
    }
    finish(inv, out, &flags)
}

pub fn classify_3local(inv: &ManifoldInvariants) -> Result<Vec<WedgeDecomposition>> {
    inv.validate()?;
    let flags = inv.flags.at_three();
    let out = match three_carrier(inv, Locality::Three)? {
        None => vec![realize(inv, Locality::Three, "3-local/1", vec![])?],
        Some((c, a)) => {
            let tag = if flags.condition_star { "3-local/3" } else { "3-local/2" };
            vec![realize(inv, Locality::Three, tag, vec![(c, vec![a])])?]
        }
    };
    finish(inv, out, &flags)
}

pub fn classify_total(inv: &ManifoldInvariants) -> Result<Vec<WedgeDecomposition>> {
    inv.validate()?;
    let flags = inv.flags;
    let x = three_carrier(inv, Locality::Total)?;
    let twos = two_primary_cases(inv)?;
    let mut out = Vec::new();
    let Some((xc, xa)) = x else {
        let tag = match flags.tier() {
            None => "Thm1.2/1a",
            Some(1) => "Thm1.2/1d",
            Some(2) => "Thm1.2/1b",
            _ => "Thm1.2/1c",
        };
        if twos.is_empty() {
            out.push(realize(inv, Locality::Total, tag, vec![])?);
        }
        for (_, c, a) in twos {
            out.push(realize(inv, Locality::Total, tag, vec![(c, vec![a])])?);
        }
        return finish(inv, out, &flags);
    };
    let x_is_chat = matches!(xa, Atom::IHatAlpha1 { .. });
    match flags.tier() {
        None => out.push(realize(inv, Locality::Total, "Thm1.2/2a", vec![(xc, vec![xa])])?),
        Some(2) => {
            for (f, c, a) in twos {
                let k = match f {
                    Family::P7IEta2 => 0,
                    Family::P6Lift => 1,
                    Family::CBar => 2,
                    Family::CHat if x_is_chat => 4,
                    Family::CHat => 3,
                    Family::CCheckP => 5,
                    _ => 6,
                };
                let tag = format!("Thm1.2/2b({})", ROMAN[k]);
                let carriers = if k == 4 { vec![(c, vec![a, Atom::IHatAlpha1 { s: chat_s(&c) }])] } else { vec![(c, vec![a]), (xc, vec![xa])] };
                out.push(realize(inv, Locality::Total, &tag, carriers)?);
            }
        }
        Some(3) => {
            for (f, c, a) in twos {
                match f {
                    Family::S5Eta3 if flags.condition_star => {
                        out.push(realize(inv, Locality::Total, "Thm1.2/2c(ii)", vec![(c, vec![a]), (xc, vec![xa])])?)
                    }
                    Family::S5Eta3 => out.push(realize(inv, Locality::Total, "Thm1.2/2c(i)", vec![(c, vec![a, Atom::Alpha1])])?),
                    _ => out.push(realize(inv, Locality::Total, "Thm1.2/2c(iii)", vec![(c, vec![a]), (xc, vec![xa])])?),
                }
            }
        }
        _ => {
            for (f, c, a) in twos {
                let tag = if f == Family::P7Lift { "Thm1.2/2d(i)" } else { "Thm1.2/2d(ii)" };
                out.push(realize(inv, Locality::Total, tag, vec![(c, vec![a]), (xc, vec![xa])])?);
            }
        }
    }
    finish(inv, out, &flags)
}

fn chat_s(c: &Complex) -> u32 {
    match c.kind {
        crate::catalog::Kind::ChangS { s } => s,
        _ => unreachable!("ihat classes live on C{{s}}"),
    }
}

/// The same case read after localizing at `p`.
pub fn localize_decomposition(dec: &WedgeDecomposition, inv: &ManifoldInvariants, p: u64) -> Result<WedgeDecomposition> {
    if dec.locality != Locality::Total {
        return Err(Error::Unsupported("only integral decompositions are localized".into()));
    }
    match p {
        2 => {
            let carriers: Vec<(Complex, Vec<Atom>)> = dec
                .carriers
                .iter()
                .map(|(c, a)| (*c, a.iter().copied().filter(|a| a.prime() == 2).collect::<Vec<_>>()))
                .filter(|(_, a)| !a.is_empty())
                .collect();
            let case = dec.tag.trim_start_matches("Thm1.2/");
            let tag = match &case[..2] {
                "1a" | "2a" => "Thm1.1/1a",
                "1b" | "2b" => "Thm1.1/1b",
                "1c" | "2c" => "Thm1.1/1c",
                _ => "Thm1.1/2",
            };
            realize(inv, Locality::Two, tag, carriers)
        }
        3 => {
            let three: Vec<Atom> = dec.carriers.iter().flat_map(|(_, a)| a.iter().copied()).filter(|a| a.prime() == 3).collect();
            match three.first() {
                None => realize(inv, Locality::Three, "3-local/1", vec![]),
                Some(Atom::IAlpha1 { r }) => {
                    realize(inv, Locality::Three, "3-local/3", vec![(Complex::moore(6, 3, *r), vec![Atom::IAlpha1 { r: *r }])])
                }
                Some(_) => realize(inv, Locality::Three, "3-local/2", vec![(Complex::sphere(5), vec![Atom::Alpha1])]),
            }
        }
        _ => Err(Error::Unsupported(format!("localization at {} is not supported", p))),
    }
}

/// `localize` applied to the cone vector of a decomposition.
pub fn local_cone(dec: &WedgeDecomposition, p: u64) -> Result<Option<AttachingVector>> {
    dec.cone_part.as_ref().map(|(_, v)| localize(v, p)).transpose()
}

fn p_local(g: &AbelianGroup, p: Option<u64>) -> AbelianGroup {
    match p {
        None => g.clone(),
        Some(p) => AbelianGroup::new(
            g.summands
                .iter()
                .filter(|s| s.is_free() || crate::abelian::p_part(s.order, p) == s.order)
                .copied()
                .collect(),
        ),
    }
}

/// Whether the decomposition has the homology of the triple suspension,
/// localized as the decomposition is.
pub fn homology_audit(dec: &WedgeDecomposition, inv: &ManifoldInvariants) -> bool {
    let p = match dec.locality {
        Locality::Two => Some(2),
        Locality::Three => Some(3),
        Locality::Total => None,
    };
    let z = |n: u32| AbelianGroup::new((0..n).map(|_| CyclicSummand::free()).collect());
    let t = inv.torsion.group();
    let expected = [(5, z(inv.l).direct_sum(&t)), (6, z(inv.d).direct_sum(&t)), (7, z(inv.l)), (9, z(1))];
    let mut actual = dec.free_part.homology();
    if let Some((w, _)) = &dec.cone_part {
        actual.extend(w.homology());
    }
    actual.push((9, z(1)));
    (1..=12).all(|deg| {
        let sum = |v: &[(u32, AbelianGroup)]| {
            v.iter().filter(|(d, _)| *d == deg).fold(AbelianGroup::trivial(), |acc, (_, g)| acc.direct_sum(g))
        };
        iso_check(&p_local(&sum(&actual), p), &p_local(&sum(&expected), p))
    })
}
