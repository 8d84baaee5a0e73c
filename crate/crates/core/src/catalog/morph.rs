use std::fmt;

use serde::{Deserialize, Serialize};

use super::complex::{Complex, Kind};
use super::tables::{pi, Gen, HomotopyTable};
use crate::abelian::{pow, GroupElement};
use crate::error::{Error, Result};

/// Morphism generators between elementary complexes. Each variant carries the
/// complex that determines its signature; `source()`/`target()` recover both
/// ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Morph {
    /// `k` times the identity.
    Mult { on: Complex, k: i64 },
    /// `eta: S^{n+1} -> S^n`, keyed by `n`.
    Eta { n: u32 },
    /// Bottom inclusion `i: S^n -> P^{n+1}(p^r)`.
    Incl { target: Complex },
    /// Pinch `q: P^{n+1}(p^r) -> S^{n+1}`.
    Pinch { source: Complex },
    /// Lift `etatilde_r: S^{n+2} -> P^{n+1}(2^r)` of `eta`.
    EtaTilde { target: Complex },
    /// Extension `etabar: P^{n+2}(2^s) -> S^n` of `eta`.
    EtaBar { source: Complex },
    /// `B(chi^r_s): P^{n+1}(p^r) -> P^{n+1}(p^s)`.
    Chi { source: Complex, s: u32 },
    /// `zetabar: C_eta^{n+2} -> S^n`.
    ZetaBar { source: Complex },
    /// `i^eta: S^n -> C_eta^{n+2}`.
    IEta { target: Complex },
    /// `ibar_n: S^n -> C_r^{n+2}`.
    IBar { target: Complex },
    /// `ibar_P: P^{n+1}(2^r) -> C_r^{n+2}`.
    IBarP { target: Complex },
    /// `ibar_eta: C_eta^{n+2} -> C_r^{n+2}`.
    IBarEta { target: Complex },
    /// `qbar_{n+1}: C_r^{n+2} -> S^{n+1}`.
    QBarTop { source: Complex },
    /// `qbar^r_{r'}: C_r^{n+2} -> P^{n+1}(2^{r'})` for `r < r'`.
    QBarR { source: Complex, r2: u32 },
    /// `ihat_{n+1}: S^{n+1} -> C^{n+2,s}`.
    IHatTop { target: Complex },
    /// `ihat_n: S^n -> C^{n+2,s}`.
    IHatBottom { target: Complex },
    /// `qhat_eta: C^{n+2,s} -> C_eta^{n+2}`.
    QHatEta { source: Complex },
    /// `qhat_P: C^{n+2,s} -> P^{n+2}(2^s)`.
    QHatP { source: Complex },
    /// `xibar^{s'}_s: P^{n+2}(2^{s'}) -> C^{n+2,s}` for `s < s'`.
    XiBar { source: Complex, s: u32 },
    /// `mu^s: C^{n+2,s} -> S^n` with `mu^s ihat_n = 0`, `mu^s ihat_{n+1} = eta`.
    MuS { source: Complex },
    /// `mu^{s'}_s: C^{n+2,s'} -> C^{n+2,s}` for `s < s'`, `-2` on both cells.
    MuSS { source: Complex, s: u32 },
    /// `lambda^{s'}_s: C^{n+2,s'} -> C^{n+2,s}` for `s < s'`.
    Lambda { source: Complex, s: u32 },
    /// `theta^s_{s'}: C^{n+2,s} -> C^{n+2,s'}` for `s < s'`.
    ThetaMap { source: Complex, s2: u32 },
    /// `icheck_{n+1}: S^{n+1} -> C_r^{n+2,s}`.
    ICheckTop { target: Complex },
    /// `icheck_n: S^n -> C_r^{n+2,s}`.
    ICheckBottom { target: Complex },
    /// `icheck_P: P^{n+1}(2^r) -> C_r^{n+2,s}`.
    ICheckP { target: Complex },
    /// `icheck_C: C^{n+2,s} -> C_r^{n+2,s}`.
    ICheckC { target: Complex },
    /// `qcheck_P: C_r^{n+2,s} -> P^{n+2}(2^s)`.
    QCheckP { source: Complex },
    /// `qcheck_C: C_r^{n+2,s} -> C_r^{n+2}`.
    QCheckC { source: Complex },
}

fn sig_err<T>(m: &Morph, why: &str) -> Result<T> {
    Err(Error::Structural(format!("{:?}: {}", m, why)))
}

impl Morph {
    /// Check the signature and return `(source, target)`.
    pub fn ends(&self) -> Result<(Complex, Complex)> {
        use Morph::*;
        let m = *self;
        let two = |c: &Complex| matches!(c.kind, Kind::Moore { p: 2, .. });
        let out = match m {
            Mult { on, .. } => (on, on),
            Eta { n } => (Complex::sphere(n + 1), Complex::sphere(n)),
            Incl { target } => match target.kind {
                Kind::Moore { .. } => (Complex::sphere(target.bottom), target),
                _ => return sig_err(&m, "target must be a Moore space"),
            },
            Pinch { source } => match source.kind {
                Kind::Moore { .. } => (source, Complex::sphere(source.bottom + 1)),
                _ => return sig_err(&m, "source must be a Moore space"),
            },
            EtaTilde { target } if two(&target) => (Complex::sphere(target.bottom + 2), target),
            EtaBar { source } if two(&source) && source.bottom >= 3 => {
                (source, Complex::sphere(source.bottom - 1))
            }
            Chi { source, s } => match source.kind {
                Kind::Moore { p, .. } if s >= 1 => {
                    (source, Complex { kind: Kind::Moore { p, r: s }, bottom: source.bottom })
                }
                _ => return sig_err(&m, "source must be a Moore space"),
            },
            ZetaBar { source } if source.kind == Kind::ChangEta => {
                (source, Complex::sphere(source.bottom))
            }
            IEta { target } if target.kind == Kind::ChangEta => {
                (Complex::sphere(target.bottom), target)
            }
            IBar { target } if matches!(target.kind, Kind::ChangR { .. }) => {
                (Complex::sphere(target.bottom), target)
            }
            IBarP { target } => match target.kind {
                Kind::ChangR { r } => (Complex { kind: Kind::Moore { p: 2, r }, bottom: target.bottom }, target),
                _ => return sig_err(&m, "target must be C[r]"),
            },
            IBarEta { target } if matches!(target.kind, Kind::ChangR { .. }) => {
                (Complex { kind: Kind::ChangEta, bottom: target.bottom }, target)
            }
            QBarTop { source } if matches!(source.kind, Kind::ChangR { .. }) => {
                (source, Complex::sphere(source.bottom + 1))
            }
            QBarR { source, r2 } => match source.kind {
                Kind::ChangR { r } if r < r2 => {
                    (source, Complex { kind: Kind::Moore { p: 2, r: r2 }, bottom: source.bottom })
                }
                _ => return sig_err(&m, "needs C[r] with r < r'"),
            },
            IHatTop { target } if matches!(target.kind, Kind::ChangS { .. }) => {
                (Complex::sphere(target.bottom + 1), target)
            }
            IHatBottom { target } if matches!(target.kind, Kind::ChangS { .. }) => {
                (Complex::sphere(target.bottom), target)
            }
            QHatEta { source } if matches!(source.kind, Kind::ChangS { .. }) => {
                (source, Complex { kind: Kind::ChangEta, bottom: source.bottom })
            }
            QHatP { source } => match source.kind {
                Kind::ChangS { s } => {
                    (source, Complex { kind: Kind::Moore { p: 2, r: s }, bottom: source.bottom + 1 })
                }
                _ => return sig_err(&m, "source must be C{s}"),
            },
            XiBar { source, s } => match source.kind {
                Kind::Moore { p: 2, r } if s < r && source.bottom >= 1 => {
                    (source, Complex { kind: Kind::ChangS { s }, bottom: source.bottom - 1 })
                }
                _ => return sig_err(&m, "needs P(2^s') with s < s'"),
            },
            MuS { source } if matches!(source.kind, Kind::ChangS { .. }) => {
                (source, Complex::sphere(source.bottom))
            }
            MuSS { source, s } | Lambda { source, s } => match source.kind {
                Kind::ChangS { s: s1 } if s < s1 && s >= 1 => {
                    (source, Complex { kind: Kind::ChangS { s }, bottom: source.bottom })
                }
                _ => return sig_err(&m, "needs C{s'} with s < s'"),
            },
            ThetaMap { source, s2 } => match source.kind {
                Kind::ChangS { s } if s < s2 => {
                    (source, Complex { kind: Kind::ChangS { s: s2 }, bottom: source.bottom })
                }
                _ => return sig_err(&m, "needs C{s} with s < s'"),
            },
            ICheckTop { target } if matches!(target.kind, Kind::ChangRS { .. }) => {
                (Complex::sphere(target.bottom + 1), target)
            }
            ICheckBottom { target } if matches!(target.kind, Kind::ChangRS { .. }) => {
                (Complex::sphere(target.bottom), target)
            }
            ICheckP { target } => match target.kind {
                Kind::ChangRS { r, .. } => {
                    (Complex { kind: Kind::Moore { p: 2, r }, bottom: target.bottom }, target)
                }
                _ => return sig_err(&m, "target must be C[r]{s}"),
            },
            ICheckC { target } => match target.kind {
                Kind::ChangRS { s, .. } => (Complex { kind: Kind::ChangS { s }, bottom: target.bottom }, target),
                _ => return sig_err(&m, "target must be C[r]{s}"),
            },
            QCheckP { source } => match source.kind {
                Kind::ChangRS { s, .. } => {
                    (source, Complex { kind: Kind::Moore { p: 2, r: s }, bottom: source.bottom + 1 })
                }
                _ => return sig_err(&m, "source must be C[r]{s}"),
            },
            QCheckC { source } => match source.kind {
                Kind::ChangRS { r, .. } => (source, Complex { kind: Kind::ChangR { r }, bottom: source.bottom }),
                _ => return sig_err(&m, "source must be C[r]{s}"),
            },
            _ => return sig_err(&m, "signature mismatch"),
        };
        out.0.validate()?;
        out.1.validate()?;
        Ok(out)
    }

    pub fn source(&self) -> Result<Complex> {
        Ok(self.ends()?.0)
    }

    pub fn target(&self) -> Result<Complex> {
        Ok(self.ends()?.1)
    }

    /// Image of one generator in `pi_degree(source)`, as terms in the target's
    /// generators. Pairs outside the shipped table raise `UnknownComposite`.
    pub fn image(&self, gen: Gen, degree: u32) -> Result<Vec<(Gen, i64)>> {
        use Gen::*;
        let tgt = self.target()?;
        let unknown = || -> Result<Vec<(Gen, i64)>> {
            Err(Error::UnknownComposite { morph: self.to_string(), gen: gen.name().to_string() })
        };
        let one = |g: Gen| Ok(vec![(g, 1)]);
        let times = |k: i64, g: Gen| Ok(vec![(g, k)]);
        let zero = || Ok(vec![]);
        // eta^3 in the bottom-`n` sphere
        let eta_cubed = |n: u32| -> Result<Vec<(Gen, i64)>> {
            match n {
                3 => Ok(vec![(NuPrime, 6)]),
                4 => Ok(vec![(SNuPrime, 6)]),
                _ => Ok(vec![(Nu, 12)]),
            }
        };
        match *self {
            Morph::Mult { on, k } => {
                if k == 1 || degree + 2 <= 2 * on.bottom {
                    times(k, gen)
                } else {
                    unknown()
                }
            }
            Morph::Eta { n } => match gen {
                Id => one(Eta),
                Eta => one(Eta2),
                Eta2 => eta_cubed(n),
                _ => unknown(),
            },
            Morph::Incl { target } => {
                let p = match target.kind {
                    Kind::Moore { p, .. } => p,
                    _ => unreachable!(),
                };
                match gen {
                    Id => one(I),
                    Eta | Eta2 if p != 2 => zero(),
                    Eta => one(IEta),
                    Eta2 => one(IEta2),
                    Nu if p == 2 => one(INu),
                    Nu if p == 3 => one(IAlpha1),
                    Nu => zero(),
                    Nu4 => one(INu4),
                    SNuPrime => one(ISNuPrime),
                    _ => unknown(),
                }
            }
            Morph::Pinch { .. } => match gen {
                I | IEta | IEta2 | INu | IAlpha1 | INu4 | ISNuPrime => zero(),
                EtaTilde => one(Eta),
                EtaTildeEta => one(Eta2),
                _ => unknown(),
            },
            Morph::EtaTilde { .. } => match gen {
                Id => one(EtaTilde),
                Eta => one(EtaTildeEta),
                _ => unknown(),
            },
            Morph::EtaBar { .. } => match gen {
                I => one(Eta),
                IEta => one(Eta2),
                IEta2 => eta_cubed(tgt.bottom),
                _ => unknown(),
            },
            Morph::Chi { source, s } => {
                let (p, r) = match source.kind {
                    Kind::Moore { p, r } => (p, r),
                    _ => unreachable!(),
                };
                // multiplier on the bottom cell
                let bottom = if r >= s { 1 } else { pow(p, s - r) as i64 };
                match gen {
                    I | IEta | IEta2 | INu | IAlpha1 | INu4 | ISNuPrime => times(bottom, gen),
                    EtaTilde | EtaTildeEta if s >= r => one(gen),
                    _ => unknown(),
                }
            }
            Morph::ZetaBar { .. } => match gen {
                IEtaC => times(2, Id),
                IEtaCNu => times(2, Nu),
                _ => unknown(),
            },
            Morph::IEta { .. } => match gen {
                Id => one(IEtaC),
                Nu => one(IEtaCNu),
                _ => unknown(),
            },
            Morph::IBar { .. } => match gen {
                Id => one(IBar),
                Nu => one(IBarNu),
                _ => unknown(),
            },
            Morph::IBarP { .. } => match gen {
                I => one(IBar),
                INu => one(IBarNu),
                EtaTildeEta => one(IBarPEtaTildeEta),
                _ => unknown(),
            },
            Morph::IBarEta { .. } => match gen {
                IEtaC => one(IBar),
                IEtaCNu => one(IBarNu),
                _ => unknown(),
            },
            Morph::QBarTop { .. } => match gen {
                IBar | IBarNu => zero(),
                IBarPEtaTildeEta => one(Eta2),
                _ => unknown(),
            },
            Morph::QBarR { source, r2 } => {
                let r = match source.kind {
                    Kind::ChangR { r } => r,
                    _ => unreachable!(),
                };
                let k = pow(2, r2 - r) as i64;
                match gen {
                    IBar => times(k, I),
                    IBarNu => times(k, INu),
                    IBarPEtaTildeEta => one(EtaTildeEta),
                    _ => unknown(),
                }
            }
            Morph::IHatTop { .. } => match gen {
                Eta2 => one(IHatEta2),
                _ => unknown(),
            },
            Morph::IHatBottom { .. } => match gen {
                Id => one(IHat),
                Nu => one(IHatNu),
                _ => unknown(),
            },
            Morph::QHatEta { .. } => match gen {
                IHat => one(IEtaC),
                IHatNu => one(IEtaCNu),
                IHatEta2 => zero(),
                _ => unknown(),
            },
            Morph::QHatP { .. } => match gen {
                IHat | IHatNu => zero(),
                IHatEta2 => one(IEta2),
                _ => unknown(),
            },
            Morph::XiBar { .. } => match gen {
                IEta2 => one(IHatEta2),
                _ => unknown(),
            },
            Morph::MuS { .. } => match gen {
                IHat | IHatNu => zero(),
                IHatEta2 => eta_cubed(tgt.bottom),
                _ => unknown(),
            },
            Morph::MuSS { .. } => match gen {
                IHat | IHatNu | IHatEta2 => times(-2, gen),
                _ => unknown(),
            },
            Morph::Lambda { .. } => match gen {
                IHat | IHatNu => zero(),
                IHatEta2 => one(IHatEta2),
                _ => unknown(),
            },
            Morph::ThetaMap { source, s2 } => {
                let s = match source.kind {
                    Kind::ChangS { s } => s,
                    _ => unreachable!(),
                };
                match gen {
                    IHat | IHatNu => one(gen),
                    IHatEta2 => times(pow(2, s2 - s) as i64, IHatEta2),
                    _ => unknown(),
                }
            }
            Morph::ICheckTop { .. } => match gen {
                Eta2 => one(ICheckEta2),
                _ => unknown(),
            },
            Morph::ICheckBottom { .. } => match gen {
                Id => one(ICheck),
                Nu => one(ICheckNu),
                _ => unknown(),
            },
            Morph::ICheckP { .. } => match gen {
                I => one(ICheck),
                INu => one(ICheckNu),
                EtaTildeEta => one(ICheckPEtaTildeEta),
                _ => unknown(),
            },
            Morph::ICheckC { .. } => match gen {
                IHat => one(ICheck),
                IHatNu => one(ICheckNu),
                IHatEta2 => one(ICheckEta2),
                _ => unknown(),
            },
            Morph::QCheckP { .. } => match gen {
                ICheck | ICheckNu | ICheckPEtaTildeEta => zero(),
                ICheckEta2 => one(IEta2),
                _ => unknown(),
            },
            Morph::QCheckC { .. } => match gen {
                ICheck => one(IBar),
                ICheckNu => one(IBarNu),
                ICheckPEtaTildeEta => one(IBarPEtaTildeEta),
                ICheckEta2 => zero(),
                _ => unknown(),
            },
        }
    }

    /// Induced map on reduced integral homology in degree `d`, as a multiplier
    /// between the standard cyclic generators (0 when either side vanishes).
    pub fn homology_multiplier(&self, d: u32) -> Result<i64> {
        use Morph::*;
        let (src, tgt) = self.ends()?;
        let has = |c: &Complex| c.homology().iter().any(|(e, _)| *e == d);
        if !has(&src) || !has(&tgt) {
            return Ok(0);
        }
        let n = src.bottom;
        Ok(match *self {
            Mult { k, .. } => k,
            Eta { .. } | Pinch { .. } | EtaTilde { .. } | EtaBar { .. } | QBarTop { .. } | MuS { .. } => 0,
            Chi { source, s } => match source.kind {
                Kind::Moore { p, r } if r < s => pow(p, s - r) as i64,
                _ => 1,
            },
            ZetaBar { .. } => {
                if d == n {
                    2
                } else {
                    0
                }
            }
            QBarR { source, r2 } => match source.kind {
                Kind::ChangR { r } => pow(2, r2 - r) as i64,
                _ => unreachable!(),
            },
            MuSS { .. } => -2,
            Lambda { .. } => {
                if d == n {
                    0
                } else {
                    1
                }
            }
            ThetaMap { source, s2 } => match source.kind {
                Kind::ChangS { s } if d == n + 1 => pow(2, s2 - s) as i64,
                _ => 1,
            },
            QCheckP { .. }
                if d == n => {
                    0
                }
            _ => 1,
        })
    }
}

impl fmt::Display for Morph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Morph::*;
        let par = |c: &Complex| match c.kind {
            Kind::Moore { r, .. } | Kind::ChangR { r } => r,
            Kind::ChangS { s } => s,
            Kind::ChangRS { r, .. } => r,
            _ => 0,
        };
        match self {
            Mult { on, k } => write!(f, "{}*1[{}]", k, on),
            Eta { n } => write!(f, "eta[S{}->S{}]", n + 1, n),
            Incl { target } => write!(f, "i[{}]", target),
            Pinch { source } => write!(f, "q[{}]", source),
            EtaTilde { target } => write!(f, "etatilde[{}]", target),
            EtaBar { source } => write!(f, "etabar[{}]", source),
            Chi { source, s } => write!(f, "B(chi^{}_{})[{}]", par(source), s, source),
            ZetaBar { source } => write!(f, "zetabar[{}]", source),
            IEta { target } => write!(f, "i_eta[{}]", target),
            IBar { target } => write!(f, "ibar[{}]", target),
            IBarP { target } => write!(f, "ibar_P[{}]", target),
            IBarEta { target } => write!(f, "ibar_eta[{}]", target),
            QBarTop { source } => write!(f, "qbar[{}]", source),
            QBarR { source, r2 } => write!(f, "qbar^{}_{}[{}]", par(source), r2, source),
            IHatTop { target } => write!(f, "ihat_top[{}]", target),
            IHatBottom { target } => write!(f, "ihat[{}]", target),
            QHatEta { source } => write!(f, "qhat_eta[{}]", source),
            QHatP { source } => write!(f, "qhat_P[{}]", source),
            XiBar { source, s } => write!(f, "xibar^{}_{}[{}]", par(source), s, source),
            MuS { source } => write!(f, "mu^{}[{}]", par(source), source),
            MuSS { source, s } => write!(f, "mu^{}_{}[{}]", par(source), s, source),
            Lambda { source, s } => write!(f, "lambda^{}_{}[{}]", par(source), s, source),
            ThetaMap { source, s2 } => write!(f, "theta^{}_{}[{}]", par(source), s2, source),
            ICheckTop { target } => write!(f, "icheck_top[{}]", target),
            ICheckBottom { target } => write!(f, "icheck[{}]", target),
            ICheckP { target } => write!(f, "icheck_P[{}]", target),
            ICheckC { target } => write!(f, "icheck_C[{}]", target),
            QCheckP { source } => write!(f, "qcheck_P[{}]", source),
            QCheckC { source } => write!(f, "qcheck_C[{}]", source),
        }
    }
}

fn sup_sub(text: &str, pos: usize) -> Result<(u32, u32)> {
    let bad = || Error::Parse { pos, msg: format!("expected `^a_b`, found `{}`", text) };
    let rest = text.strip_prefix('^').ok_or_else(bad)?;
    let (a, b) = rest.split_once('_').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

/// Reads the printed form back, e.g. `etatilde[P6(2^1)]`, `B(chi^1_2)[P6(2^1)]`, `eta[S6->S5]`.
impl std::str::FromStr for Morph {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        use Morph::*;
        let src = src.trim();
        let open = src.find('[').ok_or(Error::Parse { pos: src.len(), msg: "expected `[`".into() })?;
        if !src.ends_with(']') {
            return Err(Error::Parse { pos: src.len(), msg: "expected `]`".into() });
        }
        let (name, inner) = (&src[..open], &src[open + 1..src.len() - 1]);
        if name == "eta" {
            let (a, b) = inner.split_once("->").ok_or(Error::Parse { pos: open + 1, msg: "expected `Sn+1->Sn`".into() })?;
            let (a, b): (Complex, Complex) = (a.parse()?, b.parse()?);
            let m = Eta { n: b.bottom };
            if m.ends()? != (a, b) {
                return Err(Error::Parse { pos: open + 1, msg: format!("no eta from {} to {}", a, b) });
            }
            return Ok(m);
        }
        let c: Complex = inner.parse().map_err(|e| match e {
            Error::Parse { pos, msg } => Error::Parse { pos: pos + open + 1, msg },
            e => e,
        })?;
        let m = if let Some(k) = name.strip_suffix("*1") {
            Mult { on: c, k: k.parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad multiplier `{}`", k) })? }
        } else if let Some(rest) = name.strip_prefix("B(chi").and_then(|r| r.strip_suffix(')')) {
            Chi { source: c, s: sup_sub(rest, 5)?.1 }
        } else if let Some(rest) = name.strip_prefix("qbar^") {
            QBarR { source: c, r2: sup_sub(&format!("^{}", rest), 4)?.1 }
        } else if let Some(rest) = name.strip_prefix("xibar") {
            XiBar { source: c, s: sup_sub(rest, 5)?.1 }
        } else if let Some(rest) = name.strip_prefix("lambda") {
            Lambda { source: c, s: sup_sub(rest, 6)?.1 }
        } else if let Some(rest) = name.strip_prefix("theta") {
            ThetaMap { source: c, s2: sup_sub(rest, 5)?.1 }
        } else if let Some(rest) = name.strip_prefix("mu^") {
            match rest.split_once('_') {
                Some(_) => MuSS { source: c, s: sup_sub(&format!("^{}", rest), 2)?.1 },
                None => MuS { source: c },
            }
        } else {
            match name {
                "i" => Incl { target: c },
                "q" => Pinch { source: c },
                "etatilde" => EtaTilde { target: c },
                "etabar" => EtaBar { source: c },
                "zetabar" => ZetaBar { source: c },
                "i_eta" => IEta { target: c },
                "ibar" => IBar { target: c },
                "ibar_P" => IBarP { target: c },
                "ibar_eta" => IBarEta { target: c },
                "qbar" => QBarTop { source: c },
                "ihat_top" => IHatTop { target: c },
                "ihat" => IHatBottom { target: c },
                "qhat_eta" => QHatEta { source: c },
                "qhat_P" => QHatP { source: c },
                "icheck_top" => ICheckTop { target: c },
                "icheck" => ICheckBottom { target: c },
                "icheck_P" => ICheckP { target: c },
                "icheck_C" => ICheckC { target: c },
                "qcheck_P" => QCheckP { source: c },
                "qcheck_C" => QCheckC { source: c },
                _ => return Err(Error::Parse { pos: 0, msg: format!("unknown map `{}`", name) }),
            }
        };
        m.ends()?;
        Ok(m)
    }
}

/// Expand an element into generator terms, rewriting even multiples of
/// `etatilde_1` as multiples of `i eta2` so that maps known only on `i eta2`
/// still apply.
fn terms_of(table: &HomotopyTable, x: &GroupElement) -> Vec<(Gen, i64, bool)> {
    let mut out = Vec::new();
    for (k, (&c, g)) in x.coeffs.iter().zip(&table.generators).enumerate() {
        let c = table.group.summands[k].reduce(c);
        if c == 0 {
            continue;
        }
        let alias = *g == Gen::EtaTilde && table.order_of(Gen::EtaTilde) == Some(4) && c % 2 == 0;
        if alias {
            out.push((Gen::IEta2, c / 2, true));
        } else {
            out.push((*g, c, false));
        }
    }
    out
}

/// Collect generator terms into an element of `table`.
pub(crate) fn collect(table: &HomotopyTable, terms: &[(Gen, i64)]) -> Result<GroupElement> {
    let mut coeffs = vec![0i64; table.generators.len()];
    for &(g, c) in terms {
        if let Some(k) = table.position(g) {
            coeffs[k] += c;
            continue;
        }
        match g {
            // 2 etatilde_1 = i eta2
            Gen::IEta2 if table.order_of(Gen::EtaTilde) == Some(4) => {
                let k = table.position(Gen::EtaTilde).unwrap();
                coeffs[k] += 2 * c;
            }
            // trivial summands dropped from the printed row
            Gen::ISNuPrime | Gen::IBarSNuPrime | Gen::ICheckSNuPrime => {}
            _ => {
                return Err(Error::Structural(format!(
                    "{} is not a generator of pi_{}({})",
                    g, table.degree, table.host
                )))
            }
        }
    }
    table.group.reduce(&GroupElement::new(coeffs))
}

/// `f o x` for `x` in `pi_degree(source(f))`, expressed in `pi_degree(target(f))`.
pub fn compose(f: &Morph, x: &GroupElement, degree: u32) -> Result<GroupElement> {
    let (src, tgt) = f.ends()?;
    let st = pi(&src, degree)?;
    st.group.check(x)?;
    let tt = pi(&tgt, degree)?;
    let mut terms = Vec::new();
    for (g, c, alias) in terms_of(&st, x) {
        let img = match f.image(g, degree) {
            Ok(img) => img,
            Err(e @ Error::UnknownComposite { .. }) if alias => {
                // fall back to twice the image of etatilde_1
                match f.image(Gen::EtaTilde, degree) {
                    Ok(img) => img.into_iter().map(|(h, k)| (h, 2 * k)).collect(),
                    Err(_) => return Err(e),
                }
            }
            Err(e) => return Err(e),
        };
        for (h, k) in img {
            terms.push((h, k * c));
        }
    }
    collect(&tt, &terms)
}

/// Composite of a chain applied left to right (`chain[0]` first).
pub fn compose_chain(chain: &[Morph], x: &GroupElement, degree: u32) -> Result<GroupElement> {
    let mut cur = x.clone();
    for w in chain.windows(2) {
        if w[0].target()? != w[1].source()? {
            return Err(Error::Structural(format!("{} cannot be followed by {}", w[0], w[1])));
        }
    }
    for f in chain {
        cur = compose(f, &cur, degree)?;
    }
    Ok(cur)
}

/// One named generator as an element of its table.
pub fn gen_element(host: &Complex, degree: u32, g: Gen, coeff: i64) -> Result<GroupElement> {
    let t = pi(host, degree)?;
    collect(&t, &[(g, coeff)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Complex {
        s.parse().unwrap()
    }

    #[test]
    fn pinch_after_lift() {
        let p = c("P7(2^2)");
        let x = gen_element(&p, 8, Gen::EtaTilde, 1).unwrap();
        let y = compose(&Morph::Pinch { source: p }, &x, 8).unwrap();
        assert_eq!(y, gen_element(&c("S7"), 8, Gen::Eta, 1).unwrap());
    }

    #[test]
    fn twice_lift_is_i_eta2() {
        let p = c("P7(2^1)");
        let x = gen_element(&p, 8, Gen::EtaTilde, 1).unwrap();
        let y = compose(&Morph::Mult { on: p, k: 2 }, &x, 8).unwrap();
        let i = compose(&Morph::Incl { target: p }, &gen_element(&c("S6"), 8, Gen::Eta2, 1).unwrap(), 8).unwrap();
        assert_eq!(y, i);
    }

    #[test]
    fn unknown_pairs_are_reported() {
        let p = c("P7(2^2)");
        let x = gen_element(&p, 8, Gen::EtaTilde, 1).unwrap();
        let e = compose(&Morph::EtaBar { source: p }, &x, 8).unwrap_err();
        assert!(matches!(e, Error::UnknownComposite { .. }));
    }

    #[test]
    fn zetabar_on_alpha1() {
        let ce = c("Ceta7");
        // i_eta alpha1 = 4 i_eta nu
        let x = gen_element(&ce, 8, Gen::IEtaCNu, 4).unwrap();
        let y = compose(&Morph::ZetaBar { source: ce }, &x, 8).unwrap();
        // 2 alpha1 = 32 nu = 8 nu = -alpha1
        assert_eq!(y.coeffs, vec![8]);
    }

    #[test]
    fn bad_signature() {
        assert!(Morph::Incl { target: c("S5") }.ends().is_err());
        assert!(Morph::QBarR { source: c("C7[r=2]"), r2: 1 }.ends().is_err());
    }
}
