use std::fmt;

use serde::{Deserialize, Serialize};

use super::complex::{Complex, Kind};
use crate::abelian::{min_exp, pow, AbelianGroup, CyclicSummand};
use crate::error::{Error, Result};

/// Named generator of a homotopy group of an elementary complex. The degree is
/// implicit: each tag lives in exactly one (host family, degree - bottom) slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    // spheres
    Id,
    Eta,
    Eta2,
    NuPrime,
    Nu4,
    SNuPrime,
    Nu,
    // Moore spaces
    I,
    IEta,
    IEta2,
    EtaTilde,
    INu4,
    EtaTildeEta,
    ISNuPrime,
    INu,
    IAlpha1,
    // Chang complexes with a free bottom cell and a free top cell
    IEtaC,
    IEtaCNu,
    IEtaCNu4,
    IEtaCSNuPrime,
    // torsion bottom cell
    IBar,
    IBarNu,
    IBarNu4,
    IBarSNuPrime,
    IBarPEtaTildeEta,
    // torsion middle cell
    IHat,
    IHatEta2,
    IHatNu,
    IHatNu4,
    IHatSNuPrime,
    // both
    ICheck,
    ICheckEta2,
    ICheckNu,
    ICheckNu4,
    ICheckSNuPrime,
    ICheckPEtaTildeEta,
}

impl Gen {
    /// Printed name; the vector-literal token replaces spaces with `_`.
    pub fn name(&self) -> &'static str {
        use Gen::*;
        match self {
            Id => "id",
            Eta => "eta",
            Eta2 => "eta2",
            NuPrime => "nuprime",
            Nu4 => "nu4",
            SNuPrime => "Snuprime",
            Nu => "nu",
            I => "i",
            IEta => "i eta",
            IEta2 => "i eta2",
            EtaTilde => "etatilde",
            INu4 => "i nu4",
            EtaTildeEta => "etatilde eta",
            ISNuPrime => "i Snuprime",
            INu => "i nu",
            IAlpha1 => "i alpha1",
            IEtaC => "i_eta",
            IEtaCNu => "i_eta nu",
            IEtaCNu4 => "i_eta nu4",
            IEtaCSNuPrime => "i_eta Snuprime",
            IBar => "ibar",
            IBarNu => "ibar nu",
            IBarNu4 => "ibar nu4",
            IBarSNuPrime => "ibar Snuprime",
            IBarPEtaTildeEta => "ibar_P etatilde eta",
            IHat => "ihat",
            IHatEta2 => "ihat eta2",
            IHatNu => "ihat nu",
            IHatNu4 => "ihat nu4",
            IHatSNuPrime => "ihat Snuprime",
            ICheck => "icheck",
            ICheckEta2 => "icheck eta2",
            ICheckNu => "icheck nu",
            ICheckNu4 => "icheck nu4",
            ICheckSNuPrime => "icheck Snuprime",
            ICheckPEtaTildeEta => "icheck_P etatilde eta",
        }
    }

    pub fn token(&self) -> String {
        self.name().replace(' ', "_")
    }

    /// Generators of `nu` type in the stable row. After the Adem-operation
    /// hypothesis only multiples of 4 of these occur in attaching maps.
    pub fn is_nu_type(&self) -> bool {
        matches!(self, Gen::Nu | Gen::INu | Gen::IEtaCNu | Gen::IBarNu | Gen::IHatNu | Gen::ICheckNu)
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `pi_degree(host)` as an ordered list of cyclic summands with generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopyTable {
    pub host: Complex,
    pub degree: u32,
    pub group: AbelianGroup,
    pub generators: Vec<Gen>,
}

impl HomotopyTable {
    fn build(host: Complex, degree: u32, rows: Vec<(u64, Gen)>) -> Self {
        let rows: Vec<_> = rows.into_iter().filter(|(o, _)| *o != 1).collect();
        HomotopyTable {
            host,
            degree,
            group: AbelianGroup::new(rows.iter().map(|(o, _)| CyclicSummand { order: *o }).collect()),
            generators: rows.into_iter().map(|(_, g)| g).collect(),
        }
    }

    pub fn position(&self, g: Gen) -> Option<usize> {
        self.generators.iter().position(|x| *x == g)
    }

    pub fn order_of(&self, g: Gen) -> Option<u64> {
        self.position(g).map(|i| self.group.summands[i].order)
    }

    pub fn is_finite(&self) -> bool {
        self.group.is_finite()
    }
}

impl fmt::Display for HomotopyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generators.is_empty() {
            return f.write_str("0");
        }
        for (k, (s, g)) in self.group.summands.iter().zip(&self.generators).enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} <{}>", s, g)?;
        }
        Ok(())
    }
}

fn unsupported<T>(host: &Complex, degree: u32) -> Result<T> {
    Err(Error::UnsupportedTable { host: host.to_string(), degree: degree as i32 })
}

/// The homotopy group table of `host` in `degree`.
pub fn pi(host: &Complex, degree: u32) -> Result<HomotopyTable> {
    use Gen::*;
    host.validate()?;
    let n = host.bottom;
    if degree < n {
        return Ok(HomotopyTable::build(*host, degree, vec![]));
    }
    if n < 3 {
        return unsupported(host, degree);
    }
    let d = degree - n;
    let rows: Vec<(u64, Gen)> = match host.kind {
        Kind::Sphere => match d {
            0 => vec![(0, Id)],
            1 => vec![(2, Eta)],
            2 => vec![(2, Eta2)],
            3 if n == 3 => vec![(12, NuPrime)],
            3 if n == 4 => vec![(0, Nu4), (12, SNuPrime)],
            3 => vec![(24, Nu)],
            _ => return unsupported(host, degree),
        },
        Kind::Moore { p, r } => match d {
            0 => vec![(pow(p, r), I)],
            1 if p == 2 => vec![(2, IEta)],
            1 => vec![],
            2 if p == 2 && r == 1 => vec![(4, EtaTilde)],
            2 if p == 2 => vec![(2, IEta2), (2, EtaTilde)],
            2 => vec![],
            3 if n == 4 => match p {
                2 => vec![
                    (pow(2, r + 1), INu4),
                    (2, EtaTildeEta),
                    (pow(2, min_exp(r - 1, 2)), ISNuPrime),
                ],
                3 => vec![(pow(3, r), INu4), (3, ISNuPrime)],
                _ => vec![(pow(p, r), INu4)],
            },
            3 if n >= 5 => match p {
                2 => vec![(pow(2, min_exp(r, 3)), INu), (2, EtaTildeEta)],
                3 => vec![(3, IAlpha1)],
                _ => vec![],
            },
            _ => return unsupported(host, degree),
        },
        Kind::ChangEta => match d {
            0 => vec![(0, IEtaC)],
            3 if n == 4 => vec![(0, IEtaCNu4), (6, IEtaCSNuPrime)],
            3 if n >= 5 => vec![(12, IEtaCNu)],
            _ => return unsupported(host, degree),
        },
        Kind::ChangR { r } => match d {
            0 => vec![(pow(2, r), IBar)],
            3 if n == 4 => vec![
                (pow(2, r + 1), IBarNu4),
                (if r == 1 { 1 } else { 2 }, IBarSNuPrime),
                (2, IBarPEtaTildeEta),
            ],
            3 if n >= 5 => vec![(pow(2, min_exp(r, 2)), IBarNu), (2, IBarPEtaTildeEta)],
            _ => return unsupported(host, degree),
        },
        Kind::ChangS { .. } => match d {
            0 => vec![(0, IHat)],
            3 if n == 4 => vec![(2, IHatEta2), (0, IHatNu4), (6, IHatSNuPrime)],
            3 if n >= 5 => vec![(2, IHatEta2), (12, IHatNu)],
            _ => return unsupported(host, degree),
        },
        Kind::ChangRS { r, .. } => match d {
            0 => vec![(pow(2, r), ICheck)],
            3 if n == 4 => vec![
                (2, ICheckEta2),
                (pow(2, r + 1), ICheckNu4),
                (if r == 1 { 1 } else { 2 }, ICheckSNuPrime),
                (2, ICheckPEtaTildeEta),
            ],
            3 if n >= 5 => vec![
                (2, ICheckEta2),
                (pow(2, min_exp(r, 2)), ICheckNu),
                (2, ICheckPEtaTildeEta),
            ],
            _ => return unsupported(host, degree),
        },
    };
    Ok(HomotopyTable::build(*host, degree, rows))
}

/// Whether `coeff` times the `nu4`-type generator of `pi_7(host)` (bottom 4)
/// is a suspension: it must vanish for `Ceta6`, `C6{s}` and odd Moore spaces
/// and be divisible by `2^r` for `P5(2^r)`, `C6[r]` and `C6[r]{s}`.
pub fn suspension_divisibility(host: &Complex, coeff: i64) -> Result<bool> {
    if host.bottom != 4 {
        return Err(Error::Unsupported(format!("{} does not have bottom cell in dimension 4", host)));
    }
    let table = pi(host, 7)?;
    let nu4 = [Gen::INu4, Gen::IEtaCNu4, Gen::IBarNu4, Gen::IHatNu4, Gen::ICheckNu4];
    let order = match nu4.iter().find_map(|g| table.order_of(*g)) {
        Some(o) => o,
        None => return Err(Error::Unsupported(format!("{} has no nu4-type generator", host))),
    };
    let c = CyclicSummand { order }.reduce(coeff);
    Ok(match host.kind {
        Kind::ChangEta | Kind::ChangS { .. } => c == 0,
        Kind::Moore { p, .. } if p != 2 => c == 0,
        Kind::Moore { r, .. } | Kind::ChangR { r } | Kind::ChangRS { r, .. } => {
            c % pow(2, r) as i64 == 0
        }
        Kind::Sphere => unreachable!("spheres have no nu4-type inclusion"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(lit: &str, deg: u32) -> String {
        pi(&lit.parse().unwrap(), deg).unwrap().to_string()
    }

    #[test]
    fn printed_rows() {
        assert_eq!(t("Ceta7", 8), "Z/12 <i_eta nu>");
        assert_eq!(t("P5(2^1)", 7), "Z/4 <i nu4> + Z/2 <etatilde eta>");
        assert_eq!(t("S6", 6), "Z <id>");
        assert_eq!(
            t("C7[r=1]{s=2}", 8),
            "Z/2 <icheck eta2> + Z/2 <icheck nu> + Z/2 <icheck_P etatilde eta>"
        );
        assert_eq!(t("P7(3^2)", 8), "0");
    }

    #[test]
    fn untabulated_is_an_error() {
        let c: Complex = "Ceta7".parse().unwrap();
        assert!(matches!(pi(&c, 6), Err(Error::UnsupportedTable { .. })));
        assert!(matches!(pi(&c, 9), Err(Error::UnsupportedTable { .. })));
    }

    #[test]
    fn divisibility_examples() {
        assert!(!suspension_divisibility(&"Ceta6".parse().unwrap(), 1).unwrap());
        assert!(suspension_divisibility(&"P5(2^2)".parse().unwrap(), 4).unwrap());
        assert!(!suspension_divisibility(&"P5(2^2)".parse().unwrap(), 2).unwrap());
        assert!(suspension_divisibility(&"C6[r=1]".parse().unwrap(), 2).unwrap());
        assert!(!suspension_divisibility(&"P5(3^1)".parse().unwrap(), 1).unwrap());
        assert!(suspension_divisibility(&"P5(3^1)".parse().unwrap(), 3).unwrap());
    }
}
