//! Cohomology operations on two-cell-over-a-wedge mapping cones, as lookup
//! tables keyed by the attaching pattern.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::GroupElement;
use crate::catalog::{pi, Complex, Gen, Kind};
use crate::error::{Error, Result};
use crate::wedgemap::AttachingVector;

/// Which operations act nontrivially on the manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperationFlags {
    pub sq2_nontrivial: bool,
    pub theta_nontrivial: bool,
    pub triple_nontrivial: bool,
    pub p1_nontrivial: bool,
    pub condition_star: bool,
    pub psi_trivial: bool,
}

impl Default for OperationFlags {
    fn default() -> Self {
        OperationFlags {
            sq2_nontrivial: false,
            theta_nontrivial: false,
            triple_nontrivial: false,
            p1_nontrivial: false,
            condition_star: false,
            psi_trivial: true,
        }
    }
}

impl OperationFlags {
    pub fn validate(&self) -> Result<()> {
        if !self.psi_trivial {
            return Err(Error::FlagMismatch("the Adem operation must act trivially".into()));
        }
        if self.condition_star && !self.p1_nontrivial {
            return Err(Error::FlagMismatch("condition star requires a nontrivial P^1".into()));
        }
        Ok(())
    }

    /// 1 when `Sq^2` is nontrivial, 2 when only the secondary operation is,
    /// 3 when only the tertiary one is.
    pub fn tier(&self) -> Option<u8> {
        if self.sq2_nontrivial {
            Some(1)
        } else if self.theta_nontrivial {
            Some(2)
        } else if self.triple_nontrivial {
            Some(3)
        } else {
            None
        }
    }

    /// 2-primary part only.
    pub fn at_two(&self) -> OperationFlags {
        OperationFlags { p1_nontrivial: false, condition_star: false, ..*self }
    }

    /// 3-primary part only.
    pub fn at_three(&self) -> OperationFlags {
        OperationFlags {
            sq2_nontrivial: false,
            theta_nontrivial: false,
            triple_nontrivial: false,
            ..*self
        }
    }

    /// Error unless `observed` agrees with `self` on the tier and the 3-primary flags.
    pub fn check_against(&self, observed: &OperationFlags) -> Result<()> {
        self.validate()?;
        if self.tier() != observed.tier()
            || self.p1_nontrivial != observed.p1_nontrivial
            || self.condition_star != observed.condition_star
            || !observed.psi_trivial
        {
            return Err(Error::FlagMismatch(format!("expected {}, the vector gives {}", self, observed)));
        }
        Ok(())
    }
}

impl fmt::Display for OperationFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut on = Vec::new();
        for (b, name) in [
            (self.sq2_nontrivial, "sq2"),
            (self.theta_nontrivial, "theta"),
            (self.triple_nontrivial, "triple"),
            (self.p1_nontrivial, "p1"),
            (self.condition_star, "star"),
        ] {
            if b {
                on.push(name);
            }
        }
        if !self.psi_trivial {
            on.push("psi");
        }
        if on.is_empty() {
            f.write_str("{}")
        } else {
            write!(f, "{{{}}}", on.join(", "))
        }
    }
}

/// One cell attached to a single elementary complex, in degree 8. `k`, `kp`
/// are mod 2 coefficients; `t` is the coefficient of the `nu`-type class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConePattern {
    /// `S^5` with `t nu`
    SphereNu { t: i64 },
    /// `S^6` with `k eta^2`
    SphereEta2 { k: u8 },
    /// `S^7` with `k eta`
    SphereEta { k: u8 },
    /// `P^7(2^s)` with `k i eta^2 + kp etatilde`
    MooreTop { s: u32, k: u8, kp: u8 },
    /// `P^6(2^r)` with `k etatilde eta + t i nu`
    MooreBottom { r: u32, k: u8, t: i64 },
    /// `P^6(3^r)` with `t i alpha_1`
    MooreOdd { r: u32, t: i64 },
    /// `C_eta^7` with `t i_eta nu`
    CEta { t: i64 },
    /// `C_r^7` with `k ibar_P etatilde eta + t ibar nu`
    CBar { r: u32, k: u8, t: i64 },
    /// `C^{7,s}` with `k ihat eta^2 + t ihat nu`
    CHat { s: u32, k: u8, t: i64 },
    /// `C_r^{7,s}` with `k icheck eta^2 + kp icheck_P etatilde eta + t icheck nu`
    CCheck { r: u32, s: u32, k: u8, kp: u8, t: i64 },
}

impl fmt::Display for ConePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConePattern::*;
        match self {
            SphereNu { t } => write!(f, "C[{} nu]", t),
            SphereEta2 { k } => write!(f, "A({})", k),
            SphereEta { k } => write!(f, "S7 u {} eta", k),
            MooreTop { s, k, kp } => write!(f, "A^{}({},{})", s, k, kp),
            MooreBottom { r, k, t } => write!(f, "A_{}({},{})", r, k, t),
            MooreOdd { r, t } => write!(f, "P6(3^{}) u {} i alpha1", r, t),
            CEta { t } => write!(f, "Ceta({})", t),
            CBar { r, k, t } => write!(f, "Cbar_{}({},{})", r, k, t),
            CHat { s, k, t } => write!(f, "Chat^{}({},{})", s, k, t),
            CCheck { r, s, k, kp, t } => write!(f, "Ccheck_{}^{}({},{},{})", r, s, k, kp, t),
        }
    }
}

fn unsupported<T>(op: &str, p: &ConePattern) -> Result<T> {
    Err(Error::Unsupported(format!("{} is not tabulated on {}", op, p)))
}

/// `Sq^2` from the top Moore cell to the new cell.
pub fn eval_sq2(p: &ConePattern) -> Result<bool> {
    match *p {
        ConePattern::MooreTop { kp, .. } => Ok(kp == 1),
        ConePattern::SphereEta { k } => Ok(k == 1),
        _ => unsupported("Sq^2", p),
    }
}

/// The secondary operation from degree 6 to degree 9.
pub fn eval_theta(p: &ConePattern) -> Result<bool> {
    use ConePattern::*;
    match *p {
        MooreTop { k, .. } | SphereEta2 { k } | MooreBottom { k, .. } | CBar { k, .. } | CHat { k, .. } => Ok(k == 1),
        CCheck { k, kp, .. } => Ok(k == 1 || kp == 1),
        _ => unsupported("Theta", p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PsiValue {
    Iso,
    Trivial,
    Undefined,
}

/// The Adem operation from degree 5 to degree 9.
pub fn eval_psi(p: &ConePattern) -> Result<PsiValue> {
    use ConePattern::*;
    let t = match *p {
        SphereNu { t } | MooreBottom { t, .. } | CEta { t } | CBar { t, .. } | CHat { t, .. } | CCheck { t, .. } => t,
        _ => return unsupported("Psi", p),
    };
    Ok(match t.rem_euclid(4) {
        2 => PsiValue::Iso,
        0 => PsiValue::Trivial,
        _ => PsiValue::Undefined,
    })
}

/// `P^1` from degree 5 to degree 9 with mod 3 coefficients.
pub fn eval_p1(p: &ConePattern) -> Result<bool> {
    use ConePattern::*;
    match *p {
        SphereNu { t } | CEta { t } | CHat { t, .. } => Ok(t.rem_euclid(3) != 0),
        MooreOdd { t, .. } => Ok(t.rem_euclid(3) != 0),
        _ => unsupported("P^1", p),
    }
}

/// The tertiary operation from degree 5 to degree 9: detects `eta^3` on the
/// bottom sphere and `i eta^3` on `P^6(2^r)`, `r >= 3`.
pub fn eval_triple(p: &ConePattern) -> Result<bool> {
    use ConePattern::*;
    match *p {
        SphereNu { t } => Ok(t.rem_euclid(8) == 4),
        MooreBottom { r, k, t } => Ok(k == 0 && r >= 3 && t.rem_euclid(8) == 4),
        _ => unsupported("the tertiary operation", p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operation {
    Sq2,
    Theta,
    Psi,
    P1,
}

fn eval_bool(op: Operation, p: &ConePattern) -> Result<bool> {
    match op {
        Operation::Sq2 => eval_sq2(p),
        Operation::Theta => eval_theta(p),
        Operation::P1 => eval_p1(p),
        Operation::Psi => match eval_psi(p)? {
            PsiValue::Iso => Ok(true),
            PsiValue::Trivial => Ok(false),
            PsiValue::Undefined => Err(Error::NotApplicable("Psi is not determined for odd t".into())),
        },
    }
}

fn host_key(p: &ConePattern) -> (u8, u32, u32) {
    use ConePattern::*;
    match *p {
        SphereNu { .. } => (0, 0, 0),
        SphereEta2 { .. } => (1, 0, 0),
        SphereEta { .. } => (2, 0, 0),
        MooreTop { s, .. } => (3, s, 0),
        MooreBottom { r, .. } => (4, r, 0),
        MooreOdd { r, .. } => (5, r, 0),
        CEta { .. } => (6, 0, 0),
        CBar { r, .. } => (7, r, 0),
        CHat { s, .. } => (8, s, 0),
        CCheck { r, s, .. } => (9, r, s),
    }
}

/// Value of `op` on the cone of `f + g` from its value on the cone of `f`,
/// given that `op` vanishes on the cone of `g` and both live on one host.
pub fn additivity_transfer(f: &ConePattern, g: &ConePattern, op: Operation) -> Result<bool> {
    if host_key(f) != host_key(g) {
        return Err(Error::NotApplicable(format!("{} and {} attach to different complexes", f, g)));
    }
    match eval_bool(op, g) {
        Ok(false) => {}
        Ok(true) => return Err(Error::NotApplicable(format!("{:?} is nontrivial on {}", op, g))),
        Err(Error::Unsupported(m)) => return Err(Error::NotApplicable(m)),
        Err(e) => return Err(e),
    }
    eval_bool(op, f)
}

/// Read the cone pattern of one summand entry of a degree 8 attaching vector.
pub fn pattern_of(host: &Complex, entry: &GroupElement) -> Result<ConePattern> {
    let t = pi(host, 8)?;
    let c = |g: Gen| t.position(g).map(|k| entry.coeffs[k]).unwrap_or(0);
    let bit = |g: Gen| (c(g).rem_euclid(2)) as u8;
    let top = host.top();
    Ok(match (host.kind, top) {
        (Kind::Sphere, 5) => ConePattern::SphereNu { t: c(Gen::Nu) },
        (Kind::Sphere, 6) => ConePattern::SphereEta2 { k: bit(Gen::Eta2) },
        (Kind::Sphere, 7) => ConePattern::SphereEta { k: bit(Gen::Eta) },
        (Kind::Moore { p: 2, r: s }, 7) => {
            if s == 1 {
                let x = c(Gen::EtaTilde);
                ConePattern::MooreTop { s, k: ((x / 2) % 2) as u8, kp: (x % 2) as u8 }
            } else {
                ConePattern::MooreTop { s, k: bit(Gen::IEta2), kp: bit(Gen::EtaTilde) }
            }
        }
        (Kind::Moore { p: 2, r }, 6) => ConePattern::MooreBottom { r, k: bit(Gen::EtaTildeEta), t: c(Gen::INu) },
        (Kind::Moore { p: 3, r }, 6) => ConePattern::MooreOdd { r, t: c(Gen::IAlpha1) },
        (Kind::ChangEta, 7) => ConePattern::CEta { t: c(Gen::IEtaCNu) },
        (Kind::ChangR { r }, 7) => ConePattern::CBar { r, k: bit(Gen::IBarPEtaTildeEta), t: c(Gen::IBarNu) },
        (Kind::ChangS { s }, 7) => ConePattern::CHat { s, k: bit(Gen::IHatEta2), t: c(Gen::IHatNu) },
        (Kind::ChangRS { r, s }, 7) => ConePattern::CCheck {
            r,
            s,
            k: bit(Gen::ICheckEta2),
            kp: bit(Gen::ICheckPEtaTildeEta),
            t: c(Gen::ICheckNu),
        },
        _ => return Err(Error::Unsupported(format!("no cone pattern for {} in degree 8", host))),
    })
}

/// Flags of the cone on a degree 8 attaching vector, read summand by summand.
pub fn flags_of_vector(v: &AttachingVector) -> Result<OperationFlags> {
    if v.source_degree != 8 {
        return Err(Error::Unsupported("operation tables are for source degree 8".into()));
    }
    let mut out = OperationFlags::default();
    for (h, e) in v.wedge.summands.iter().zip(&v.entries) {
        if e.is_zero() {
            continue;
        }
        let p = pattern_of(h, e)?;
        let get = |r: Result<bool>| match r {
            Ok(b) => Ok(b),
            Err(Error::Unsupported(_)) => Ok(false),
            Err(e) => Err(e),
        };
        out.sq2_nontrivial |= get(eval_sq2(&p))?;
        out.theta_nontrivial |= get(eval_theta(&p))?;
        out.triple_nontrivial |= get(eval_triple(&p))?;
        let p1 = get(eval_p1(&p))?;
        out.p1_nontrivial |= p1;
        out.condition_star |= p1 && matches!(p, ConePattern::MooreOdd { .. });
        if let Ok(v) = eval_psi(&p) {
            out.psi_trivial &= v == PsiValue::Trivial;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operation_tables() {
        assert!(eval_sq2(&ConePattern::MooreTop { s: 2, k: 0, kp: 1 }).unwrap());
        assert!(!eval_sq2(&ConePattern::MooreTop { s: 2, k: 1, kp: 0 }).unwrap());
        assert!(!eval_sq2(&ConePattern::MooreTop { s: 2, k: 0, kp: 0 }).unwrap());
        assert!(eval_sq2(&ConePattern::CEta { t: 0 }).is_err());
        assert!(eval_theta(&ConePattern::CHat { s: 1, k: 1, t: 0 }).unwrap());
        assert!(eval_theta(&ConePattern::CCheck { r: 1, s: 1, k: 0, kp: 1, t: 0 }).unwrap());
        assert!(!eval_theta(&ConePattern::MooreBottom { r: 2, k: 0, t: 0 }).unwrap());
        assert_eq!(eval_psi(&ConePattern::SphereNu { t: 2 }).unwrap(), PsiValue::Iso);
        assert_eq!(eval_psi(&ConePattern::CCheck { r: 2, s: 1, k: 1, kp: 0, t: 4 }).unwrap(), PsiValue::Trivial);
        assert_eq!(eval_psi(&ConePattern::CEta { t: 1 }).unwrap(), PsiValue::Undefined);
        assert!(eval_p1(&ConePattern::SphereNu { t: 16 }).unwrap());
        assert!(eval_p1(&ConePattern::MooreOdd { r: 2, t: 1 }).unwrap());
        assert!(!eval_p1(&ConePattern::SphereNu { t: 0 }).unwrap());
    }

    #[test]
    fn transfer() {
        let f = ConePattern::CHat { s: 1, k: 1, t: 0 };
        let g = ConePattern::CHat { s: 1, k: 0, t: 4 };
        assert!(additivity_transfer(&f, &g, Operation::Theta).unwrap());
        let zero = ConePattern::CHat { s: 1, k: 0, t: 0 };
        assert!(!additivity_transfer(&zero, &g, Operation::Theta).unwrap());
        assert!(matches!(additivity_transfer(&f, &f, Operation::Theta), Err(Error::NotApplicable(_))));
        assert!(matches!(
            additivity_transfer(&f, &ConePattern::SphereNu { t: 0 }, Operation::Theta),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn star_implies_p1() {
        let f = OperationFlags { condition_star: true, ..Default::default() };
        assert!(f.validate().is_err());
    }
}
