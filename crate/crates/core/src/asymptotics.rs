//! Asymptotic power-law coefficients, attraction/repulsion borders and
//! potential-wall estimates.
//!
//! Thick plate: U ≈ C4/z⁴ at long range, U ≈ −C3/z³ + C1/z at short range.
//! Thin plate of thickness d: U ≈ D5/z⁵ and U ≈ −D4/z⁴ + D2/z².

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{AtomModel, MaterialModel, MirrorKind, Response};
use crate::potential::PotentialResult;
use crate::quadrature::{self, HalfLine, IntegralResult, QuadratureSpec, Tolerance};
use crate::search;

/// How a coefficient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ExactIntegral,
    ClosedForm,
    WeakLimit,
    StrongLimit,
    MirrorLimit,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::ExactIntegral => "exact-integral",
            Regime::ClosedForm => "closed-form",
            Regime::WeakLimit => "weak-limit",
            Regime::StrongLimit => "strong-limit",
            Regime::MirrorLimit => "mirror-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub value: f64,
    pub error_estimate: f64,
    pub regime: Regime,
    pub converged: bool,
}

impl Coefficient {
    fn exact(value: f64, regime: Regime) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            regime,
            converged: true,
        }
    }

    fn from_integral(r: IntegralResult, factor: f64) -> Self {
        Self {
            value: r.value * factor,
            error_estimate: r.error_estimate * factor.abs(),
            regime: Regime::ExactIntegral,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThickCoeffs {
    pub c4: Coefficient,
    pub c3: Coefficient,
    pub c1: Coefficient,
}

/// Thin-plate coefficients; all are proportional to `thickness`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThinCoeffs {
    pub thickness: f64,
    pub d5: Coefficient,
    pub d4: Coefficient,
    pub d2: Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoeffs {
    pub thick: ThickCoeffs,
    pub thin: Option<ThinCoeffs>,
}

/// Computes the thick-plate coefficients and, when `thickness` is given and
/// the material is not a mirror, the thin-plate ones.
pub fn coefficients(
    atom: &AtomModel,
    material: &MaterialModel,
    thickness: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<AsymptoticCoeffs> {
    let thick = coeff_thick(atom, material, spec)?;
    let thin = match thickness {
        Some(d) if !material.is_mirror() => Some(coeff_thin(atom, material, d, spec)?),
        _ => None,
    };
    Ok(AsymptoticCoeffs { thick, thin })
}

/// Frequency axis of the one-dimensional u-integrals.
fn frequency_axis(atom: &AtomModel, material: &MaterialModel) -> HalfLine {
    let mut scale = atom.min_frequency();
    if let Some((lo, _)) = material.resonance_range() {
        scale = scale.min(lo);
    }
    HalfLine::new(0.0, scale)
        .with_breaks(atom.frequencies())
        .with_breaks(material.characteristic_frequencies())
}

fn integrate_u<F: FnMut(f64, Response) -> f64>(
    atom: &AtomModel,
    material: &MaterialModel,
    spec: &QuadratureSpec,
    mut f: F,
) -> IntegralResult {
    let axis = frequency_axis(atom, material);
    quadrature::integrate_half_line(
        |u| atom.polarizability(u) * f(u, material.response_at(u)),
        &axis,
        spec.outer(),
    )
}

/// (x − 1)/(x + 1) from the susceptibility x − 1.
#[inline]
fn ratio(chi: f64) -> f64 {
    chi / (2.0 + chi)
}

/// ∫₀¹ [(2 − t²) r_p(t) − t² r_s(t)] dt with the static reflection
/// coefficients r_p = (ε − w)/(ε + w), r_s = (μ − w)/(μ + w),
/// w = √((εμ − 1)t² + 1). This is the v-integral of the long-range
/// coefficient after the map v = 1/t; it equals 2 for a perfect conductor.
pub fn c4_bracket_integral(chi_e0: f64, chi_m0: f64) -> IntegralResult {
    let eps = 1.0 + chi_e0;
    let mu = 1.0 + chi_m0;
    let k = chi_e0 + chi_m0 + chi_e0 * chi_m0;
    let ne = chi_e0 * (2.0 + chi_e0);
    let nm = chi_m0 * (2.0 + chi_m0);
    quadrature::integrate_finite(
        |t| {
            let t2 = t * t;
            let w = (k * t2 + 1.0).sqrt();
            let rp = (ne - k * t2) / (eps + w).powi(2);
            let rs = (nm - k * t2) / (mu + w).powi(2);
            (2.0 - t2) * rp - t2 * rs
        },
        0.0,
        1.0,
        Tolerance::relative(1e-12),
    )
}

fn c4_prefactor(alpha0: f64) -> f64 {
    -3.0 * alpha0 / (64.0 * PI * PI)
}

/// C4 from static values only; it does not depend on absorption.
pub fn c4_static(alpha0: f64, eps0: f64, mu0: f64) -> Coefficient {
    Coefficient::from_integral(c4_bracket_integral(eps0 - 1.0, mu0 - 1.0), c4_prefactor(alpha0))
}

fn c4_from_response(alpha0: f64, r: Response) -> Coefficient {
    Coefficient::from_integral(c4_bracket_integral(r.chi_e, r.chi_m), c4_prefactor(alpha0))
}

/// Thick-plate coefficients C4, C3, C1.
pub fn coeff_thick(atom: &AtomModel, material: &MaterialModel, spec: &QuadratureSpec) -> Result<ThickCoeffs> {
    spec.validate()?;
    let alpha0 = atom.static_polarizability();
    let norm = 1.0 / (16.0 * PI * PI);
    if let Some(kind) = material.mirror_kind() {
        let sign = match kind {
            MirrorKind::Conducting => 1.0,
            MirrorKind::Permeable => -1.0,
        };
        let c4 = Coefficient::exact(2.0 * sign * c4_prefactor(alpha0), Regime::MirrorLimit);
        let c3 = match kind {
            MirrorKind::Conducting => {
                let r = integrate_u(atom, material, spec, |_, _| 1.0);
                Coefficient {
                    regime: Regime::MirrorLimit,
                    ..Coefficient::from_integral(r, norm)
                }
            }
            MirrorKind::Permeable => Coefficient::exact(0.0, Regime::MirrorLimit),
        };
        let c1 = Coefficient::exact(f64::INFINITY, Regime::MirrorLimit);
        return Ok(ThickCoeffs { c4, c3, c1 });
    }
    let c4 = c4_from_response(alpha0, material.response_at(0.0));
    let c3 = if material.has_electric_response() {
        Coefficient::from_integral(integrate_u(atom, material, spec, |_, r| ratio(r.chi_e)), norm)
    } else {
        Coefficient::exact(0.0, Regime::ExactIntegral)
    };
    let c1 = if material.is_vacuum() {
        Coefficient::exact(0.0, Regime::ExactIntegral)
    } else {
        let r = integrate_u(atom, material, spec, |u, r| {
            let cross = r.chi_e + r.chi_m + r.chi_e * r.chi_m;
            u * u * (ratio(r.chi_e) + ratio(r.chi_m) + 2.0 * r.eps * cross / (r.eps + 1.0).powi(2))
        });
        Coefficient::from_integral(r, norm)
    };
    Ok(ThickCoeffs { c4, c3, c1 })
}

/// C4 to first order in the static susceptibilities.
pub fn c4_weak(alpha0: f64, chi_e0: f64, chi_m0: f64) -> f64 {
    -alpha0 / (640.0 * PI * PI) * (23.0 * chi_e0 - 7.0 * chi_m0)
}

/// The bracket of the strong-response C4 as a function of the static
/// impedance Z; it equals the v-integral with r_p = (v − Z)/(v + Z),
/// r_s = (Zv − 1)/(Zv + 1). Tends to 2 for Z → 0 and to −2 for Z → ∞.
pub fn strong_bracket(z: f64) -> f64 {
    if z < 1e-2 {
        let l = z.ln();
        return 2.0 - 2.5 * z + 44.0 / 15.0 * z * z + z.powi(3) * (2.0 * l - 2.0 / 3.0)
            - 52.0 / 35.0 * z.powi(4)
            + 7.0 / 12.0 * z.powi(5);
    }
    if z > 1e2 {
        let w = 1.0 / z;
        let l = w.ln();
        return -2.0 + w * (-4.0 * l - 0.5) + 5.6 * w * w + w.powi(3) * (2.0 * l - 5.0 / 3.0)
            - 20.0 / 21.0 * w.powi(4)
            + 0.25 * w.powi(5);
    }
    let l = z.ln_1p();
    -2.0 / z.powi(3) * l + 2.0 / (z * z) + 4.0 / z * l - 1.0 / z - 4.0 / 3.0 - z + 2.0 * z * z
        - 2.0 * z.powi(3) * (1.0 / z).ln_1p()
}

/// C4 for ε(0), μ(0) ≫ 1.
pub fn c4_strong(alpha0: f64, eps0: f64, mu0: f64) -> f64 {
    c4_prefactor(alpha0) * strong_bracket((mu0 / eps0).sqrt())
}

/// Impedance at which the strong-response C4 changes sign.
pub fn strong_border_impedance() -> f64 {
    search::bisect(strong_bracket, 1.0, 5.0, 1e-14, 200).expect("bracket holds a sign change")
}

/// Thick-plate C4 in both analytic limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C4Limits {
    pub weak: f64,
    pub strong: f64,
}

pub fn coeff_thick_limits(eps0: f64, mu0: f64, alpha0: f64) -> C4Limits {
    C4Limits {
        weak: c4_weak(alpha0, eps0 - 1.0, mu0 - 1.0),
        strong: c4_strong(alpha0, eps0, mu0),
    }
}

/// (14ε² − 9)/ε − (6μ² − 1)/μ written in the susceptibilities.
fn d5_bracket(chi_e: f64, chi_m: f64) -> f64 {
    let eps = 1.0 + chi_e;
    let mu = 1.0 + chi_m;
    14.0 * chi_e - 6.0 * chi_m + 9.0 * chi_e / eps - chi_m / mu
}

/// D5 in closed form from the static values.
pub fn d5_static(alpha0: f64, eps0: f64, mu0: f64, d: f64) -> f64 {
    -alpha0 * d / (160.0 * PI * PI) * d5_bracket(eps0 - 1.0, mu0 - 1.0)
}

pub fn d5_weak(alpha0: f64, chi_e0: f64, chi_m0: f64, d: f64) -> f64 {
    -alpha0 * d / (160.0 * PI * PI) * (23.0 * chi_e0 - 7.0 * chi_m0)
}

pub fn d5_strong(alpha0: f64, eps0: f64, mu0: f64, d: f64) -> f64 {
    -alpha0 * d / (80.0 * PI * PI) * (7.0 * eps0 - 3.0 * mu0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct D5Limits {
    pub weak: f64,
    pub strong: f64,
}

pub fn coeff_thin_limits(eps0: f64, mu0: f64, alpha0: f64, d: f64) -> D5Limits {
    D5Limits {
        weak: d5_weak(alpha0, eps0 - 1.0, mu0 - 1.0, d),
        strong: d5_strong(alpha0, eps0, mu0, d),
    }
}

/// Thin-plate coefficients D5, D4, D2 for thickness `d`.
pub fn coeff_thin(atom: &AtomModel, material: &MaterialModel, d: f64, spec: &QuadratureSpec) -> Result<ThinCoeffs> {
    spec.validate()?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidGeometry(format!("plate thickness must be positive, got {d}")));
    }
    if material.is_mirror() {
        return Err(Error::InvalidMaterial(
            "thin-plate coefficients are undefined for a perfect mirror".into(),
        ));
    }
    let alpha0 = atom.static_polarizability();
    let r0 = material.response_at(0.0);
    let d5 = Coefficient::exact(
        -alpha0 * d / (160.0 * PI * PI) * d5_bracket(r0.chi_e, r0.chi_m),
        Regime::ClosedForm,
    );
    let norm = d / (64.0 * PI * PI);
    let d4 = if material.has_electric_response() {
        let r = integrate_u(atom, material, spec, |_, r| r.chi_e * (2.0 + r.chi_e) / r.eps);
        Coefficient::from_integral(r, 3.0 * norm)
    } else {
        Coefficient::exact(0.0, Regime::ExactIntegral)
    };
    let d2 = if material.is_vacuum() {
        Coefficient::exact(0.0, Regime::ExactIntegral)
    } else {
        let r = integrate_u(atom, material, spec, |u, r| {
            let cross = r.chi_e + r.chi_m + r.chi_e * r.chi_m;
            u * u
                * (r.chi_e * (2.0 + r.chi_e) / r.eps
                    + r.chi_m * (2.0 + r.chi_m) / r.mu
                    + 2.0 * cross / r.eps)
        });
        Coefficient::from_integral(r, norm)
    };
    Ok(ThinCoeffs {
        thickness: d,
        d5,
        d4,
        d2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateKind {
    Thick,
    Thin,
}

impl PlateKind {
    pub fn name(self) -> &'static str {
        match self {
            PlateKind::Thick => "thick",
            PlateKind::Thin => "thin",
        }
    }
}

/// One point of an attraction/repulsion border: the static permeability
/// at which the long-range coefficient vanishes, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BorderPoint {
    pub eps0: f64,
    pub mu0: Option<f64>,
}

/// Largest static permeability searched for a thick-plate root.
pub const BORDER_MU_LIMIT: f64 = 1e6;

/// μ(0) with C4(ε(0), μ(0)) = 0.
pub fn thick_border_point(eps0: f64) -> Result<BorderPoint> {
    check_eps0(eps0)?;
    let chi_e = eps0 - 1.0;
    let f = |chi_m: f64| c4_bracket_integral(chi_e, chi_m).value;
    if f(0.0) <= 0.0 {
        return Ok(BorderPoint {
            eps0,
            mu0: Some(1.0),
        });
    }
    let mut hi = 10.0 * eps0.max(10.0);
    while f(hi - 1.0) > 0.0 {
        if hi >= BORDER_MU_LIMIT {
            return Ok(BorderPoint { eps0, mu0: None });
        }
        hi = (hi * 10.0).min(BORDER_MU_LIMIT);
    }
    let chi_m = search::bisect(f, 0.0, hi - 1.0, 1e-13 * hi, 300)?;
    Ok(BorderPoint {
        eps0,
        mu0: Some(1.0 + chi_m),
    })
}

/// μ(0) with D5 = 0 (closed form).
pub fn thin_border_mu(eps0: f64) -> f64 {
    let e2 = eps0 * eps0;
    (14.0 * e2 - 9.0 + (196.0 * e2 * e2 - 228.0 * e2 + 81.0).sqrt()) / (12.0 * eps0)
}

fn check_eps0(eps0: f64) -> Result<()> {
    if eps0.is_finite() && eps0 >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidMaterial(format!("ε(0) must be ≥ 1, got {eps0}")))
    }
}

fn border_point(kind: PlateKind, eps0: f64) -> Result<BorderPoint> {
    match kind {
        PlateKind::Thick => thick_border_point(eps0),
        PlateKind::Thin => {
            check_eps0(eps0)?;
            Ok(BorderPoint {
                eps0,
                mu0: Some(thin_border_mu(eps0)),
            })
        }
    }
}

/// Border curve over a grid of ε(0) values; grid points are split across
/// the available cores, output keeps the grid order.
pub fn border_curve(kind: PlateKind, eps_grid: &[f64]) -> Result<Vec<BorderPoint>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = eps_grid.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = eps_grid
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&e| border_point(kind, e)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("border worker panicked"))
            .collect()
    })
}

/// Parameters of a two-level atom facing a single-resonance medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleResonance {
    pub atom_frequency: f64,
    pub dipole_sq: f64,
    pub plasma_e: f64,
    pub transverse_e: f64,
    pub plasma_m: f64,
    pub transverse_m: f64,
}

impl SingleResonance {
    /// Extracts the parameters when the atom has one transition and the
    /// medium exactly one electric and one magnetic resonance.
    pub fn from_models(atom: &AtomModel, material: &MaterialModel) -> Option<Self> {
        match (atom.transitions(), material.electric(), material.magnetic()) {
            ([t], [e], [m]) if !material.is_mirror() && e.plasma() > 0.0 && m.plasma() > 0.0 => Some(Self {
                atom_frequency: t.frequency,
                dipole_sq: t.dipole_sq,
                plasma_e: e.plasma(),
                transverse_e: e.transverse(),
                plasma_m: m.plasma(),
                transverse_m: m.transverse(),
            }),
            _ => None,
        }
    }

    fn omega_s(&self) -> f64 {
        (self.transverse_m.powi(2) + 0.5 * self.plasma_m.powi(2)).sqrt()
    }

    fn omega_l(&self) -> f64 {
        self.transverse_m.hypot(self.plasma_m)
    }

    /// C3 for weak, lossless electric response.
    pub fn c3(&self) -> f64 {
        let (w, te) = (self.atom_frequency, self.transverse_e);
        self.dipole_sq / (96.0 * PI) * (self.plasma_e / te).powi(2) * te / (w + te)
    }

    /// C1 keeping only the magnetic response, lossless.
    pub fn c1(&self) -> f64 {
        let (w, ws, tm) = (self.atom_frequency, self.omega_s(), self.transverse_m);
        self.dipole_sq * self.plasma_m.powi(2) / (96.0 * PI) * w * (2.0 * w + ws + tm) / ((w + ws) * (w + tm))
    }

    pub fn d4(&self, d: f64) -> f64 {
        3.0 * d * self.c3()
    }

    pub fn d2(&self, d: f64) -> f64 {
        let (w, wl, tm) = (self.atom_frequency, self.omega_l(), self.transverse_m);
        d * self.dipole_sq * self.plasma_m.powi(2) / (96.0 * PI) * w * (4.0 * w + 3.0 * wl + tm)
            / (2.0 * (w + wl) * (w + tm))
    }

    fn position_factor(&self) -> f64 {
        let (w, te, tm) = (self.atom_frequency, self.transverse_e, self.transverse_m);
        (self.plasma_e / te) / self.plasma_m * (te * (w + tm) / (w * (w + te))).sqrt()
    }

    /// Thick-plate wall position and height.
    pub fn thick_wall(&self) -> (f64, f64) {
        let (w, te, tm, ws) = (self.atom_frequency, self.transverse_e, self.transverse_m, self.omega_s());
        let z = self.position_factor() * (3.0 * (w + ws) / (2.0 * w + ws + tm)).sqrt();
        let shape = w * (2.0 * w + ws + tm) / (3.0 * (w + ws) * (w + tm));
        let u = self.dipole_sq * self.plasma_m.powi(3) / (48.0 * PI) * (te / self.plasma_e)
            * ((w + te) / te).sqrt()
            * shape.powf(1.5);
        (z, u)
    }

    /// Thin-plate wall position and height for thickness `d`.
    pub fn thin_wall(&self, d: f64) -> (f64, f64) {
        let (w, te, tm, wl) = (self.atom_frequency, self.transverse_e, self.transverse_m, self.omega_l());
        let z = self.position_factor() * (12.0 * (w + wl) / (4.0 * w + 3.0 * wl + tm)).sqrt();
        let shape = w * (4.0 * w + 3.0 * wl + tm) / (2.0 * (w + wl) * (w + tm));
        let u = d * self.dipole_sq * self.plasma_m.powi(4) / (1152.0 * PI) * (te / self.plasma_e).powi(2)
            * ((w + te) / te)
            * shape.powi(2);
        (z, u)
    }

    /// Upper scale that the thin-plate wall height stays far below when
    /// n(0)d ≪ z_max.
    pub fn thin_wall_height_bound(&self) -> f64 {
        let (w, te, tm, wl) = (self.atom_frequency, self.transverse_e, self.transverse_m, self.omega_l());
        let shape = w * (4.0 * w + 3.0 * wl + tm) / (3.0 * (w + wl) * (w + tm));
        3.0 * self.dipole_sq * self.plasma_m.powi(3) / (768.0 * PI) * (te / self.plasma_e)
            * ((w + te) / te).sqrt()
            * shape.powf(1.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallMethod {
    /// From the short-distance coefficients.
    Generic,
    /// Two-level atom, single lossless resonance.
    TwoLevelClosedForm,
    /// Located on the computed potential.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallEstimate {
    pub z_max: f64,
    pub u_max: f64,
    pub method: WallMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallReport {
    pub kind: PlateKind,
    pub generic: WallEstimate,
    pub closed_form: Option<WallEstimate>,
    /// z_max ω_M⁺ ≤ 0.1, i.e. the wall lies in the short-distance range
    /// where the estimate applies.
    pub short_distance_consistent: bool,
    pub warnings: Vec<String>,
}

/// Short-distance wall estimate; `thickness` is required for thin plates.
pub fn wall_estimate(
    kind: PlateKind,
    atom: &AtomModel,
    material: &MaterialModel,
    thickness: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<WallReport> {
    if material.is_mirror() {
        return Err(Error::NoWallScale("a perfect mirror has no wall".into()));
    }
    if !material.has_electric_response() {
        return Err(Error::NoWallScale(
            "no electric response: the potential is monotonically repulsive".into(),
        ));
    }
    if !material.has_magnetic_response() {
        return Err(Error::NoWallScale(
            "no magnetic response: the potential is attractive everywhere".into(),
        ));
    }
    let params = SingleResonance::from_models(atom, material);
    let mut warnings = Vec::new();
    let (generic, closed_form) = match kind {
        PlateKind::Thick => {
            let c = coeff_thick(atom, material, spec)?;
            let (c3, c1) = (c.c3.value, c.c1.value);
            let generic = WallEstimate {
                z_max: (3.0 * c3 / c1).sqrt(),
                u_max: 2.0 / 3.0 * (c1.powi(3) / (3.0 * c3)).sqrt(),
                method: WallMethod::Generic,
            };
            let closed = params.map(|p| {
                let (z_max, u_max) = p.thick_wall();
                WallEstimate {
                    z_max,
                    u_max,
                    method: WallMethod::TwoLevelClosedForm,
                }
            });
            (generic, closed)
        }
        PlateKind::Thin => {
            let d = thickness.ok_or_else(|| Error::InvalidGeometry("thin-plate wall needs a thickness".into()))?;
            let c = coeff_thin(atom, material, d, spec)?;
            let (d4, d2) = (c.d4.value, c.d2.value);
            let generic = WallEstimate {
                z_max: (2.0 * d4 / d2).sqrt(),
                u_max: d2 * d2 / (4.0 * d4),
                method: WallMethod::Generic,
            };
            let ratio = material.static_summary().n0 * d / generic.z_max;
            if ratio > crate::potential::THIN_PLATE_LIMIT {
                warnings.push(format!(
                    "plate not thin on the wall scale: n(0)d/z_max = {ratio:.3}"
                ));
            }
            let closed = params.map(|p| {
                let (z_max, u_max) = p.thin_wall(d);
                WallEstimate {
                    z_max,
                    u_max,
                    method: WallMethod::TwoLevelClosedForm,
                }
            });
            (generic, closed)
        }
    };
    let omega_max = material.resonance_range().map_or(0.0, |(_, hi)| hi);
    let short_distance_consistent = generic.z_max * omega_max <= 0.1;
    if !short_distance_consistent {
        warnings.push(format!(
            "wall at z = {:.3e} is outside the short-distance range (z ω_M⁺ = {:.3})",
            generic.z_max,
            generic.z_max * omega_max
        ));
    }
    Ok(WallReport {
        kind,
        generic,
        closed_form,
        short_distance_consistent,
        warnings,
    })
}

/// Log-spaced z-grid and refinement tolerance for [`wall_locate_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallScan {
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
    /// Relative tolerance on the wall position.
    pub rel_tol: f64,
}

impl Default for WallScan {
    fn default() -> Self {
        Self {
            z_min: 1e-3,
            z_max: 1e2,
            points: 80,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WallSearch {
    Wall {
        estimate: WallEstimate,
        error_estimate: f64,
        skipped: usize,
    },
    NoWall {
        reason: String,
        skipped: usize,
    },
}

impl WallSearch {
    pub fn estimate(&self) -> Option<WallEstimate> {
        match self {
            WallSearch::Wall { estimate, .. } => Some(*estimate),
            WallSearch::NoWall { .. } => None,
        }
    }
}

/// Global maximum of a computed potential: scan, then golden-section
/// refinement in ln z around the best scan point. A wall is reported only
/// if the maximum is interior and exceeds ten times its error estimate.
pub fn wall_locate_numeric<F>(mut potential: F, scan: &WallScan) -> Result<WallSearch>
where
    F: FnMut(f64) -> Result<PotentialResult>,
{
    if !(scan.z_min > 0.0 && scan.z_max > scan.z_min && scan.points >= 3) {
        return Err(Error::WallSearch(format!("invalid scan {scan:?}")));
    }
    let (ln_lo, ln_hi) = (scan.z_min.ln(), scan.z_max.ln());
    let step = (ln_hi - ln_lo) / (scan.points - 1) as f64;
    let mut samples: Vec<(f64, PotentialResult)> = Vec::with_capacity(scan.points);
    let mut skipped = 0;
    for i in 0..scan.points {
        let x = ln_lo + step * i as f64;
        match potential(x.exp()) {
            Ok(r) if r.converged && r.value.is_finite() => samples.push((x, r)),
            Ok(r) => {
                log::warn!("wall scan: skipping z = {:.4e} (not converged)", r.z);
                skipped += 1;
            }
            Err(e) => {
                log::warn!("wall scan: skipping z = {:.4e}: {e}", x.exp());
                skipped += 1;
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::WallSearch("every scan point failed".into()));
    }
    let best = samples
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if s.1.value > samples[b].1.value { i } else { b });
    let (x_best, r_best) = (&samples[best].0, &samples[best].1);
    if r_best.value <= 0.0 {
        return Ok(WallSearch::NoWall {
            reason: "potential is non-positive on the scan".into(),
            skipped,
        });
    }
    if r_best.value <= 10.0 * r_best.error_estimate.abs() {
        return Ok(WallSearch::NoWall {
            reason: "maximum not resolved above the quadrature error".into(),
            skipped,
        });
    }
    if best == 0 || best == samples.len() - 1 {
        return Ok(WallSearch::NoWall {
            reason: format!("maximum at the scan boundary z = {:.4e} (monotone potential)", x_best.exp()),
            skipped,
        });
    }
    let (a, b) = (samples[best - 1].0, samples[best + 1].0);
    let mut last_err = r_best.error_estimate;
    let (x, u) = search::golden_max(
        |x| match potential(x.exp()) {
            Ok(r) if r.value.is_finite() => {
                last_err = r.error_estimate;
                r.value
            }
            _ => f64::NEG_INFINITY,
        },
        a,
        b,
        scan.rel_tol,
        200,
    );
    let (x, u) = if u >= r_best.value { (x, u) } else { (*x_best, r_best.value) };
    Ok(WallSearch::Wall {
        estimate: WallEstimate {
            z_max: x.exp(),
            u_max: u,
            method: WallMethod::Numeric,
        },
        error_estimate: last_err,
        skipped,
    })
}
