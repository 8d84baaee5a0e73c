//! Line-oriented manifold descriptors.
//!
//! ```text
//! # comment
//! l: 2
//! d: 1
//! torsion: 2^1x1, 3^1x1      # p^r x multiplicity, or `none`
//! k: 0
//! s: 1                       # P7(2^s) exponents
//! r: 1                       # P6(2^r) exponents
//! rbar:                      # C7[r] exponents
//! shat:                      # C7{s} exponents
//! rcheck:                    # C7[r]{s}, paired with scheck
//! scheck:
//! r3: 1                      # optional, defaults to the 3-torsion exponents
//! flags: p1 star             # any of sq2 theta triple p1 star smooth
//! family: p7_lift            # optional selection
//! j0: 1
//! j0_prime: 1
//! ```
//!
//! `t0`..`t4` may also be given; they must match the list lengths.
//! Unknown keys and repeated keys are errors.

use std::collections::BTreeMap;

use crate::abelian::{is_prime, TorsionDecomposition};
use crate::classify::{Family, ManifoldInvariants, Selection, SplittingData};
use crate::cohomops::OperationFlags;
use crate::error::{Error, Result};

const KEYS: [&str; 20] = [
    "l", "d", "torsion", "k", "s", "r", "rbar", "shat", "rcheck", "scheck", "r3", "flags", "family", "j0", "j0_prime", "t0",
    "t1", "t2", "t3", "t4",
];

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

fn number(pos: usize, key: &str, v: &str) -> Result<u32> {
    match v.trim().parse() {
        Ok(n) => Ok(n),
        Err(_) => perr(pos, format!("{}: expected a non-negative integer, found `{}`", key, v.trim())),
    }
}

fn list(pos: usize, key: &str, v: &str) -> Result<Vec<u32>> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(|t| number(pos, key, t)).collect()
}

fn torsion(pos: usize, v: &str) -> Result<TorsionDecomposition> {
    let mut t = TorsionDecomposition::new();
    if v.trim() == "none" {
        return Ok(t);
    }
    for item in v.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let bad = || perr(pos, format!("torsion: expected `p^r x mult`, found `{}`", item));
        let (pr, mult) = match item.split_once(['x', '×']) {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (item, "1"),
        };
        let Some((p, r)) = pr.split_once('^') else { return bad() };
        let (Ok(p), Ok(r), Ok(m)) = (p.trim().parse::<u64>(), r.trim().parse::<u32>(), mult.parse::<u32>()) else {
            return bad();
        };
        if !is_prime(p) || r == 0 {
            return perr(pos, format!("torsion: `{}` is not a prime power", pr));
        }
        for _ in 0..m {
            t.push(p, r)?;
        }
    }
    Ok(t)
}

pub fn parse_descriptor(src: &str) -> Result<ManifoldInvariants> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut offset = 0;
    for raw in src.split_inclusive('\n') {
        let line = raw.split('#').next().unwrap_or("");
        let start = offset;
        offset += raw.len();
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return perr(start, format!("expected `key: value`, found `{}`", line.trim()));
        };
        let key = key.trim();
        let pos = start + key.len() + 1;
        if !KEYS.contains(&key) {
            return perr(start, format!("unknown key `{}`", key));
        }
        if fields.insert(key, (pos, value)).is_some() {
            return perr(start, format!("repeated key `{}`", key));
        }
    }
    let get = |k: &str| fields.get(k).copied();
    let required = |k: &str| get(k).ok_or_else(|| Error::Parse { pos: src.len(), msg: format!("missing key `{}`", k) });
    let num_or = |k: &str, default: u32| get(k).map_or(Ok(default), |(p, v)| number(p, k, v));
    let list_of = |k: &str| get(k).map_or(Ok(vec![]), |(p, v)| list(p, k, v));

    let (lp, lv) = required("l")?;
    let l = number(lp, "l", lv)?;
    let (dp, dv) = required("d")?;
    let d = number(dp, "d", dv)?;
    let torsion = get("torsion").map_or(Ok(TorsionDecomposition::new()), |(p, v)| torsion(p, v))?;
    let mut split = SplittingData {
        k: num_or("k", 0)?,
        s: list_of("s")?,
        r: list_of("r")?,
        rbar: list_of("rbar")?,
        shat: list_of("shat")?,
        rcheck: list_of("rcheck")?,
        scheck: list_of("scheck")?,
        r3: list_of("r3")?,
    };
    if get("r3").is_none() {
        split.r3 = torsion.exponents(3);
    }
    let lens = [("t0", split.t0(), "s"), ("t1", split.t1(), "r"), ("t2", split.t2(), "rbar"), ("t3", split.t3(), "shat"), ("t4", split.t4(), "rcheck")];
    for (key, len, name) in lens {
        if let Some((p, v)) = get(key) {
            let t = number(p, key, v)?;
            if t != len {
                return Err(Error::InvalidSplitting(format!("{} = {} but {} lists {} exponents", key, t, name, len)));
            }
        }
    }

    let mut flags = OperationFlags::default();
    let mut smooth = false;
    if let Some((p, v)) = get("flags") {
        for f in v.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match f {
                "sq2" => flags.sq2_nontrivial = true,
                "theta" => flags.theta_nontrivial = true,
                "triple" => flags.triple_nontrivial = true,
                "p1" => flags.p1_nontrivial = true,
                "star" => flags.condition_star = true,
                "smooth" => smooth = true,
                "none" => {}
                _ => return perr(p, format!("flags: unknown flag `{}`", f)),
            }
        }
    }

    let family = get("family").map(|(_, v)| v.trim().parse::<Family>()).transpose()?;
    let j0 = get("j0").map(|(p, v)| number(p, "j0", v)).transpose()?;
    let j0_prime = get("j0_prime").map(|(p, v)| number(p, "j0_prime", v)).transpose()?;
    let selection = (family.is_some() || j0.is_some() || j0_prime.is_some()).then_some(Selection { family, j0, j0_prime });

    let inv = ManifoldInvariants { l, d, torsion, flags, split, selection, smooth };
    inv.validate()?;
    Ok(inv)
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text; `parse_descriptor` reads it back to the same value.
pub fn render_descriptor(inv: &ManifoldInvariants) -> String {
    let mut out = format!("l: {}\nd: {}\n", inv.l, inv.d);
    let mut parts = Vec::new();
    for p in [2, 3] {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for r in inv.torsion.exponents(p) {
            *counts.entry(r).or_default() += 1;
        }
        parts.extend(counts.iter().map(|(r, m)| format!("{}^{}x{}", p, r, m)));
    }
    for (p, r) in inv.torsion.parts_from(5) {
        parts.push(format!("{}^{}x1", p, r));
    }
    out += &format!("torsion: {}\n", if parts.is_empty() { "none".to_string() } else { parts.join(", ") });
    let sp = &inv.split;
    out += &format!("k: {}\n", sp.k);
    for (key, v) in [("s", &sp.s), ("r", &sp.r), ("rbar", &sp.rbar), ("shat", &sp.shat), ("rcheck", &sp.rcheck), ("scheck", &sp.scheck), ("r3", &sp.r3)] {
        out += &format!("{}: {}\n", key, join(v)).replace(": \n", ":\n");
    }
    let fl = &inv.flags;
    let names: Vec<&str> = [
        (fl.sq2_nontrivial, "sq2"),
        (fl.theta_nontrivial, "theta"),
        (fl.triple_nontrivial, "triple"),
        (fl.p1_nontrivial, "p1"),
        (fl.condition_star, "star"),
        (inv.smooth, "smooth"),
    ]
    .iter()
    .filter(|(on, _)| *on)
    .map(|(_, n)| *n)
    .collect();
    out += &format!("flags: {}\n", if names.is_empty() { "none".to_string() } else { names.join(" ") });
    if let Some(sel) = &inv.selection {
        if let Some(f) = sel.family {
            out += &format!("family: {}\n", f);
        }
        if let Some(j) = sel.j0 {
            out += &format!("j0: {}\n", j);
        }
        if let Some(j) = sel.j0_prime {
            out += &format!("j0_prime: {}\n", j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let src = "l: 2\nd: 1\ntorsion: 2^1x1, 3^1 # odd part\nk: 0\ns: 1\nr: 1\nflags: p1 star\n";
        let inv = parse_descriptor(src).unwrap();
        assert_eq!(inv.split.r3, vec![1]);
        assert!(inv.flags.condition_star);
        assert_eq!(parse_descriptor(&render_descriptor(&inv)).unwrap(), inv);
    }

    #[test]
    fn cites_constraint() {
        let err = parse_descriptor("l: 1\nd: 0\ntorsion: 2^1x2\ns: 1, 1\nr: 1\n").unwrap_err();
        assert_eq!(err, Error::InvalidSplitting("t1+t2+t4 != m2 (1 != 2)".into()));
    }

    #[test]
    fn malformed_torsion() {
        let err = parse_descriptor("l: 1\nd: 0\ntorsion: 4^1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{:?}", err);
        assert!(parse_descriptor("l: 1\nd: 0\ntorsion: 2^x\n").is_err());
        assert!(parse_descriptor("l: 1\nbogus: 3\n").is_err());
    }

    #[test]
    fn list_length_keys() {
        let err = parse_descriptor("l: 1\nd: 0\ntorsion: 2^1\ns: 1\nr: 1\nt0: 2\n").unwrap_err();
        assert!(matches!(err, Error::InvalidSplitting(_)));
    }
}
