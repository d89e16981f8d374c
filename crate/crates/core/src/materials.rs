//! Drude–Lorentz response functions and atomic polarizabilities on the
//! imaginary frequency axis.
//!
//! Every quantity here is evaluated at ω = iu, where the permittivity,
//! permeability and ground-state polarizability are real, positive and
//! monotonically decreasing in u. Frequencies are in units of the reference
//! frequency, dipole moments squared in the matching reduced units
//! (ħ = c = ε₀ = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Drude–Lorentz oscillator, ωP²/(ωT² − ω² − iωγ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResonanceFields")]
pub struct Resonance {
    plasma: f64,
    transverse: f64,
    damping: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonanceFields {
    plasma: f64,
    transverse: f64,
    #[serde(default)]
    damping: f64,
}

impl TryFrom<ResonanceFields> for Resonance {
    type Error = Error;

    fn try_from(f: ResonanceFields) -> Result<Self> {
        Self::new(f.plasma, f.transverse, f.damping)
    }
}

impl Resonance {
    pub fn new(plasma: f64, transverse: f64, damping: f64) -> Result<Self> {
        if !(plasma.is_finite() && plasma >= 0.0) {
            return Err(Error::InvalidResonance(format!(
                "plasma frequency must be finite and >= 0, got {plasma}"
            )));
        }
        if !(transverse.is_finite() && transverse > 0.0) {
            return Err(Error::InvalidResonance(format!(
                "transverse frequency must be finite and > 0, got {transverse}"
            )));
        }
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(Error::InvalidResonance(format!(
                "damping must be finite and >= 0, got {damping}"
            )));
        }
        Ok(Self {
            plasma,
            transverse,
            damping,
        })
    }

    pub fn plasma(&self) -> f64 {
        self.plasma
    }

    pub fn transverse(&self) -> f64 {
        self.transverse
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Contribution χ(iu) = ωP²/(ωT² + u² + γu).
    #[inline]
    pub fn susceptibility(&self, u: f64) -> f64 {
        if self.plasma == 0.0 {
            return 0.0;
        }
        self.plasma * self.plasma
            / (self.transverse * self.transverse + u * u + self.damping * u)
    }

    /// Longitudinal frequency √(ωT² + ωP²).
    pub fn longitudinal(&self) -> f64 {
        self.transverse.hypot(self.plasma)
    }

    pub fn with_damping(&self, damping: f64) -> Result<Self> {
        Self::new(self.plasma, self.transverse, damping)
    }
}

/// Idealised mirrors with |r| = 1 for both polarisations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorKind {
    /// ε → ∞: r^s = −1, r^p = +1.
    Conducting,
    /// μ → ∞: r^s = +1, r^p = −1.
    Permeable,
}

impl MirrorKind {
    /// Reflection coefficients (r^s, r^p) of the mirror.
    pub fn reflection(self) -> (f64, f64) {
        match self {
            MirrorKind::Conducting => (-1.0, 1.0),
            MirrorKind::Permeable => (1.0, -1.0),
        }
    }

    pub fn dual(self) -> Self {
        match self {
            MirrorKind::Conducting => MirrorKind::Permeable,
            MirrorKind::Permeable => MirrorKind::Conducting,
        }
    }
}

/// Electric and magnetic resonance sets of a layer material, or a perfect
/// mirror.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "MaterialFields")]
pub struct MaterialModel {
    electric: Vec<Resonance>,
    magnetic: Vec<Resonance>,
    mirror: Option<MirrorKind>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct MaterialFields {
    electric: Vec<Resonance>,
    magnetic: Vec<Resonance>,
    mirror: Option<MirrorKind>,
}

impl TryFrom<MaterialFields> for MaterialModel {
    type Error = Error;

    fn try_from(f: MaterialFields) -> Result<Self> {
        match f.mirror {
            Some(_) if !(f.electric.is_empty() && f.magnetic.is_empty()) => Err(Error::InvalidMaterial(
                "a perfect mirror cannot also list resonances".into(),
            )),
            Some(kind) => Ok(Self::mirror(kind)),
            None => Ok(Self::new(f.electric, f.magnetic)),
        }
    }
}

/// ε(iu) and μ(iu) at one imaginary frequency.
///
/// The susceptibilities are kept separately because ε − 1 loses all
/// precision for weak media.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub eps: f64,
    pub mu: f64,
    pub chi_e: f64,
    pub chi_m: f64,
}

impl Response {
    pub const VACUUM: Response = Response {
        eps: 1.0,
        mu: 1.0,
        chi_e: 0.0,
        chi_m: 0.0,
    };

    pub fn from_susceptibilities(chi_e: f64, chi_m: f64) -> Self {
        Self {
            eps: 1.0 + chi_e,
            mu: 1.0 + chi_m,
            chi_e,
            chi_m,
        }
    }

    /// ε(iu)μ(iu).
    pub fn index_sq(&self) -> f64 {
        self.eps * self.mu
    }
}

impl MaterialModel {
    pub fn new(electric: Vec<Resonance>, magnetic: Vec<Resonance>) -> Self {
        Self {
            electric,
            magnetic,
            mirror: None,
        }
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn mirror(kind: MirrorKind) -> Self {
        Self {
            electric: Vec::new(),
            magnetic: Vec::new(),
            mirror: Some(kind),
        }
    }

    /// Single electric and single magnetic oscillator; a zero plasma
    /// frequency leaves that channel empty.
    pub fn drude_lorentz(electric: Resonance, magnetic: Resonance) -> Self {
        let keep = |r: Resonance| if r.plasma > 0.0 { vec![r] } else { vec![] };
        Self::new(keep(electric), keep(magnetic))
    }

    pub fn electric(&self) -> &[Resonance] {
        &self.electric
    }

    pub fn magnetic(&self) -> &[Resonance] {
        &self.magnetic
    }

    pub fn mirror_kind(&self) -> Option<MirrorKind> {
        self.mirror
    }

    pub fn is_mirror(&self) -> bool {
        self.mirror.is_some()
    }

    /// True when ε ≡ μ ≡ 1 at every frequency.
    pub fn is_vacuum(&self) -> bool {
        self.mirror.is_none()
            && self.electric.iter().all(|r| r.plasma == 0.0)
            && self.magnetic.iter().all(|r| r.plasma == 0.0)
    }

    pub fn has_electric_response(&self) -> bool {
        self.mirror == Some(MirrorKind::Conducting) || self.electric.iter().any(|r| r.plasma > 0.0)
    }

    pub fn has_magnetic_response(&self) -> bool {
        self.mirror == Some(MirrorKind::Permeable) || self.magnetic.iter().any(|r| r.plasma > 0.0)
    }

    /// ε(iu) and μ(iu). Mirrors report an infinite value in their channel.
    pub fn response_at(&self, u: f64) -> Response {
        match self.mirror {
            Some(MirrorKind::Conducting) => Response::from_susceptibilities(f64::INFINITY, 0.0),
            Some(MirrorKind::Permeable) => Response::from_susceptibilities(0.0, f64::INFINITY),
            None => Response::from_susceptibilities(
                self.electric.iter().map(|r| r.susceptibility(u)).sum(),
                self.magnetic.iter().map(|r| r.susceptibility(u)).sum(),
            ),
        }
    }

    pub fn static_summary(&self) -> StaticSummary {
        StaticSummary::from_response(self.response_at(0.0))
    }

    /// Electric and magnetic resonance lists exchanged (ε ↔ μ).
    pub fn dual(&self) -> Self {
        Self {
            electric: self.magnetic.clone(),
            magnetic: self.electric.clone(),
            mirror: self.mirror.map(MirrorKind::dual),
        }
    }

    /// Characteristic frequencies (transverse and longitudinal) of all
    /// resonances, used to place quadrature breakpoints.
    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        self.electric
            .iter()
            .chain(self.magnetic.iter())
            .filter(|r| r.plasma > 0.0)
            .flat_map(|r| [r.transverse, r.longitudinal()])
            .collect()
    }

    /// Lowest and highest transverse resonance frequency, ω_M^∓.
    pub fn resonance_range(&self) -> Option<(f64, f64)> {
        let mut it = self
            .electric
            .iter()
            .chain(self.magnetic.iter())
            .filter(|r| r.plasma > 0.0)
            .map(|r| r.transverse);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    /// Same model with every electric damping replaced.
    pub fn with_electric_damping(&self, damping: f64) -> Result<Self> {
        Ok(Self {
            electric: self
                .electric
                .iter()
                .map(|r| r.with_damping(damping))
                .collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    /// Same model with every magnetic damping replaced.
    pub fn with_magnetic_damping(&self, damping: f64) -> Result<Self> {
        Ok(Self {
            magnetic: self
                .magnetic
                .iter()
                .map(|r| r.with_damping(damping))
                .collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    /// Scales every plasma frequency by √factor, i.e. every susceptibility
    /// by `factor`.
    pub fn scale_susceptibility(&self, factor: f64) -> Result<Self> {
        let s = factor.sqrt();
        let scale = |rs: &[Resonance]| -> Result<Vec<Resonance>> {
            rs.iter()
                .map(|r| Resonance::new(r.plasma * s, r.transverse, r.damping))
                .collect()
        };
        Ok(Self {
            electric: scale(&self.electric)?,
            magnetic: scale(&self.magnetic)?,
            mirror: self.mirror,
        })
    }
}

/// Static (u = 0) material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticSummary {
    pub eps0: f64,
    pub mu0: f64,
    /// Static refractive index √(ε(0)μ(0)).
    pub n0: f64,
    /// Static impedance √(μ(0)/ε(0)).
    pub impedance: f64,
    pub chi_e0: f64,
    pub chi_m0: f64,
}

impl StaticSummary {
    pub fn from_static(eps0: f64, mu0: f64) -> Self {
        Self {
            eps0,
            mu0,
            n0: (eps0 * mu0).sqrt(),
            impedance: (mu0 / eps0).sqrt(),
            chi_e0: eps0 - 1.0,
            chi_m0: mu0 - 1.0,
        }
    }

    fn from_response(r: Response) -> Self {
        Self {
            chi_e0: r.chi_e,
            chi_m0: r.chi_m,
            ..Self::from_static(r.eps, r.mu)
        }
    }
}

/// A dipole transition |0⟩ → |k⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub frequency: f64,
    pub dipole_sq: f64,
}

/// Ground-state atom described by its dipole transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomFields")]
pub struct AtomModel {
    transitions: Vec<Transition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFields {
    transitions: Vec<Transition>,
}

impl TryFrom<AtomFields> for AtomModel {
    type Error = Error;

    fn try_from(f: AtomFields) -> Result<Self> {
        Self::new(f.transitions)
    }
}

impl AtomModel {
    pub fn new(transitions: Vec<Transition>) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::InvalidAtom("empty transition list".into()));
        }
        for t in &transitions {
            if !(t.frequency.is_finite() && t.frequency > 0.0) {
                return Err(Error::InvalidAtom(format!(
                    "transition frequency must be finite and > 0, got {}",
                    t.frequency
                )));
            }
            if !(t.dipole_sq.is_finite() && t.dipole_sq >= 0.0) {
                return Err(Error::InvalidAtom(format!(
                    "squared dipole moment must be finite and >= 0, got {}",
                    t.dipole_sq
                )));
            }
        }
        if transitions.iter().all(|t| t.dipole_sq == 0.0) {
            return Err(Error::InvalidAtom("all dipole moments vanish".into()));
        }
        Ok(Self { transitions })
    }

    pub fn two_level(frequency: f64, dipole_sq: f64) -> Result<Self> {
        Self::new(vec![Transition {
            frequency,
            dipole_sq,
        }])
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// α(iu) = (2/3) Σ ω_k |d_k|² / (ω_k² + u²).
    #[inline]
    pub fn polarizability(&self, u: f64) -> f64 {
        let u2 = u * u;
        2.0 / 3.0
            * self
                .transitions
                .iter()
                .map(|t| t.frequency * t.dipole_sq / (t.frequency * t.frequency + u2))
                .sum::<f64>()
    }

    pub fn static_polarizability(&self) -> f64 {
        self.polarizability(0.0)
    }

    /// ⟨0|d̂²|0⟩ = Σ |d_k|².
    pub fn dipole_sq_sum(&self) -> f64 {
        self.transitions.iter().map(|t| t.dipole_sq).sum()
    }

    /// Lowest transition frequency ω_A⁻.
    pub fn min_frequency(&self) -> f64 {
        self.transitions
            .iter()
            .map(|t| t.frequency)
            .fold(f64::INFINITY, f64::min)
    }

    /// Highest transition frequency ω_A⁺.
    pub fn max_frequency(&self) -> f64 {
        self.transitions
            .iter()
            .map(|t| t.frequency)
            .fold(0.0, f64::max)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.frequency).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weak_electric() -> Resonance {
        Resonance::new(0.75, 1.03, 0.001).unwrap()
    }

    #[test]
    fn vacuum_is_unity() {
        let r = MaterialModel::vacuum().response_at(3.7);
        assert_eq!(r, Response::VACUUM);
    }

    #[test]
    fn static_permittivity() {
        let m = MaterialModel::new(vec![weak_electric()], vec![]);
        let r = m.response_at(0.0);
        assert!((r.eps - 1.530_21).abs() < 1e-5, "{}", r.eps);
        assert_eq!(r.mu, 1.0);
    }

    #[test]
    fn static_permeability_of_five() {
        let m = MaterialModel::new(vec![], vec![Resonance::new(2.0, 1.0, 0.001).unwrap()]);
        assert_eq!(m.response_at(0.0).mu, 5.0);
    }

    #[test]
    fn two_level_polarizability() {
        let a = AtomModel::two_level(1.0, 1.0).unwrap();
        assert!((a.polarizability(0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.polarizability(1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(a.polarizability(1e9) < 1e-17);
    }

    #[test]
    fn empty_atom_rejected() {
        assert!(matches!(AtomModel::new(vec![]), Err(Error::InvalidAtom(_))));
    }

    #[test]
    fn bad_resonances_rejected() {
        assert!(Resonance::new(-1.0, 1.0, 0.0).is_err());
        assert!(Resonance::new(1.0, 0.0, 0.0).is_err());
        assert!(Resonance::new(1.0, 1.0, -0.1).is_err());
        assert!(Resonance::new(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn static_summaries() {
        let v = MaterialModel::vacuum().static_summary();
        assert_eq!(
            (v.eps0, v.mu0, v.n0, v.impedance, v.chi_e0, v.chi_m0),
            (1.0, 1.0, 1.0, 1.0, 0.0, 0.0)
        );

        let m = MaterialModel::new(
            vec![weak_electric()],
            vec![Resonance::new(2.0, 1.0, 0.001).unwrap()],
        );
        let s = m.static_summary();
        assert!((s.impedance - (5.0f64 / 1.530_21).sqrt()).abs() < 1e-5);
        assert!((s.impedance - 1.8077).abs() < 1e-4);

        // equal static response gives unit impedance
        let r = Resonance::new(1.3, 0.7, 0.0).unwrap();
        let sym = MaterialModel::new(vec![r], vec![r]).static_summary();
        assert!((sym.impedance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dual_swaps_channels() {
        let m = MaterialModel::new(vec![weak_electric()], vec![]);
        let d = m.dual();
        assert_eq!(d.response_at(0.4).mu, m.response_at(0.4).eps);
        assert_eq!(d.dual(), m);
        assert_eq!(
            MaterialModel::mirror(MirrorKind::Conducting).dual(),
            MaterialModel::mirror(MirrorKind::Permeable)
        );
    }

    #[test]
    fn lossless_limit_is_finite() {
        let m = MaterialModel::new(vec![Resonance::new(1.0, 1.0, 0.0).unwrap()], vec![]);
        for u in [0.0, 1e-9, 1.0, 1e6] {
            assert!(m.response_at(u).eps.is_finite());
        }
    }

    #[test]
    fn deserialization_validates() {
        let ok: MaterialModel =
            serde_json::from_str(r#"{"electric": [{"plasma": 0.75, "transverse": 1.03}]}"#).unwrap();
        assert!(ok.has_electric_response() && !ok.has_magnetic_response());
        for bad in [
            r#"{"electric": [{"plasma": -1, "transverse": 1}]}"#,
            r#"{"electric": [{"plasma": 1, "transverse": 1, "gamma": 0.1}]}"#,
            r#"{"mirror": "conducting", "magnetic": [{"plasma": 1, "transverse": 1}]}"#,
            r#"{"electrc": []}"#,
        ] {
            assert!(serde_json::from_str::<MaterialModel>(bad).is_err(), "{bad}");
        }
        assert!(serde_json::from_str::<AtomModel>(r#"{"transitions": []}"#).is_err());
        let atom = AtomModel::two_level(1.0, 1.0).unwrap();
        let back: AtomModel = serde_json::from_str(&serde_json::to_string(&atom).unwrap()).unwrap();
        assert_eq!(back, atom);
    }
}
