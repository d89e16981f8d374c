//! Expansions of the single- and two-plate potentials in powers of the
//! susceptibilities χ_e = ε − 1 and χ_m = μ − 1, and the additivity
//! identities relating thick and thin plates.
//!
//! Every term has the form
//!
//! ΔU = P ∫du u² α(iu) ∫dq (q/b) bᵖ e^{−2b·dist} Σ_c χ_c(iu) B_c(u/b)
//!
//! where each channel bracket B_c is a polynomial in (u/b)².

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::materials::{AtomModel, MaterialModel};
use crate::potential::decay_integral;
use crate::quadrature::{self, HalfLine, IntegralResult, QuadratureSpec};
use crate::stack::{Layer, LayerStack};

/// Weights of (b/u)², 1, (u/b)², (u/b)⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket(pub [f64; 4]);

impl Bracket {
    pub const ZERO: Bracket = Bracket([0.0; 4]);

    /// u² times the bracket.
    #[inline]
    pub fn times_u2(&self, u2: f64, b2: f64) -> f64 {
        let [w0, w1, w2, w3] = self.0;
        let x = u2 / b2;
        w0 * b2 + u2 * (w1 + x * (w2 + x * w3))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }

    pub fn sub(&self, other: &Bracket) -> Bracket {
        let mut w = self.0;
        for (a, b) in w.iter_mut().zip(other.0) {
            *a -= b;
        }
        Bracket(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// χ_e
    E,
    /// χ_m
    M,
    /// χ_e²
    EE,
    /// χ_m²
    MM,
    /// χ_e χ_m
    EM,
}

impl Channel {
    pub fn order(self) -> u8 {
        match self {
            Channel::E | Channel::M => 1,
            _ => 2,
        }
    }

    fn weight(self, chi_e: f64, chi_m: f64) -> f64 {
        match self {
            Channel::E => chi_e,
            Channel::M => chi_m,
            Channel::EE => chi_e * chi_e,
            Channel::MM => chi_m * chi_m,
            Channel::EM => chi_e * chi_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionGeometry {
    Thick,
    Thin,
    TwoThinPlates,
}

impl ExpansionGeometry {
    /// Prefactor over the thickness power, and the extra power of b in the
    /// q-measure relative to q/b.
    fn layout(self) -> (f64, i32) {
        match self {
            ExpansionGeometry::Thick => (-1.0 / (8.0 * PI * PI), 0),
            ExpansionGeometry::Thin => (-1.0 / (4.0 * PI * PI), 1),
            ExpansionGeometry::TwoThinPlates => (-1.0 / (2.0 * PI * PI), 2),
        }
    }

    fn thickness_power(self) -> i32 {
        match self {
            ExpansionGeometry::Thick => 0,
            ExpansionGeometry::Thin => 1,
            ExpansionGeometry::TwoThinPlates => 2,
        }
    }
}

/// Channel brackets of the expansion of the given order.
pub fn brackets(order: u8, geometry: ExpansionGeometry) -> Result<Vec<(Channel, Bracket)>> {
    use Channel::*;
    use ExpansionGeometry::*;
    let list = match (order, geometry) {
        (1, Thick | Thin) => vec![
            (E, Bracket([1.0, -1.0, 0.5, 0.0])),
            (M, Bracket([0.0, -1.0, 0.5, 0.0])),
        ],
        (2, Thick) => vec![
            (EE, Bracket([-0.5, 0.25, 0.25, -0.25])),
            (MM, Bracket([0.0, 0.25, 0.25, -0.25])),
            (EM, Bracket([0.0, -0.5, 1.0, -0.5])),
        ],
        (2, Thin) => vec![
            (EE, Bracket([-0.5, 0.75, -0.25, 0.0])),
            (MM, Bracket([0.0, 0.25, -0.25, 0.0])),
            (EM, Bracket::ZERO),
        ],
        (2, TwoThinPlates) => vec![
            (EE, Bracket([0.0, -0.5, 0.5, -0.25])),
            (MM, Bracket([0.0, 0.0, 0.5, -0.25])),
            (EM, Bracket([0.0, -0.5, 1.0, -0.5])),
        ],
        _ => {
            return Err(Error::InvalidGeometry(format!(
                "no order-{order} expansion for {geometry:?}"
            )))
        }
    };
    Ok(list)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelTerm {
    pub channel: Channel,
    pub bracket: Bracket,
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub order: u8,
    pub geometry: ExpansionGeometry,
    pub z: f64,
    pub thickness: Option<f64>,
    pub separation: Option<f64>,
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub channels: Vec<ChannelTerm>,
}

impl ExpansionTerm {
    pub fn channel(&self, channel: Channel) -> Option<&ChannelTerm> {
        self.channels.iter().find(|c| c.channel == channel)
    }
}

fn check_inputs(material: &MaterialModel, z: f64, d: Option<f64>, s: Option<f64>) -> Result<()> {
    if material.is_mirror() {
        return Err(Error::InvalidMaterial(
            "susceptibility expansions are undefined for a perfect mirror".into(),
        ));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::InvalidPosition(format!("z must be positive, got {z}")));
    }
    if let Some(d) = d {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidGeometry(format!("thickness must be positive, got {d}")));
        }
    }
    if let Some(s) = s {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidGeometry(format!("separation must be non-negative, got {s}")));
        }
    }
    Ok(())
}

fn channel_integral(
    atom: &AtomModel,
    material: &MaterialModel,
    geometry: ExpansionGeometry,
    channel: Channel,
    bracket: Bracket,
    dist: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    if bracket.is_zero() || material.is_vacuum() {
        return IntegralResult::ZERO;
    }
    let (prefactor, power) = geometry.layout();
    let freqs = material.characteristic_frequencies();
    let (r, _) = decay_integral(atom, &freqs, dist, spec, |u| {
        let resp = material.response_at(u);
        let w = channel.weight(resp.chi_e, resp.chi_m);
        let u2 = u * u;
        move |b: f64, _q2: f64| w * b.powi(power) * bracket.times_u2(u2, b * b)
    });
    r.scaled(prefactor)
}

#[allow(clippy::too_many_arguments)]
fn expansion(
    order: u8,
    geometry: ExpansionGeometry,
    atom: &AtomModel,
    material: &MaterialModel,
    z: f64,
    d: Option<f64>,
    s: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<ExpansionTerm> {
    spec.validate()?;
    check_inputs(material, z, d, s)?;
    let thickness = match geometry {
        ExpansionGeometry::Thick => None,
        _ => Some(d.ok_or_else(|| Error::InvalidGeometry(format!("{geometry:?} expansion needs a thickness")))?),
    };
    let separation = match geometry {
        ExpansionGeometry::TwoThinPlates => {
            Some(s.ok_or_else(|| Error::InvalidGeometry("two-plate expansion needs a separation".into()))?)
        }
        _ => None,
    };
    let scale = thickness.unwrap_or(1.0).powi(geometry.thickness_power());
    let dist = z + separation.unwrap_or(0.0);
    let mut channels = Vec::new();
    let mut total = IntegralResult::ZERO;
    for (channel, bracket) in brackets(order, geometry)? {
        let r = channel_integral(atom, material, geometry, channel, bracket, dist, spec).scaled(scale);
        total = total.combine(r);
        channels.push(ChannelTerm {
            channel,
            bracket,
            value: r.value,
            error_estimate: r.error_estimate,
        });
    }
    if !total.converged {
        log::warn!("order-{order} {geometry:?} expansion at z = {z:.4e} did not converge");
    }
    Ok(ExpansionTerm {
        order,
        geometry,
        z,
        thickness,
        separation,
        value: total.value,
        error_estimate: total.error_estimate,
        converged: total.converged,
        channels,
    })
}

/// First-order term of a thick (`d = None`) or thin plate.
pub fn expansion_order1(
    geometry: ExpansionGeometry,
    atom: &AtomModel,
    material: &MaterialModel,
    z: f64,
    d: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<ExpansionTerm> {
    expansion(1, geometry, atom, material, z, d, None, spec)
}

/// Second-order term; the two-thin-plate form is the correlation
/// correction for plate separation `s`.
pub fn expansion_order2(
    geometry: ExpansionGeometry,
    atom: &AtomModel,
    material: &MaterialModel,
    z: f64,
    d: Option<f64>,
    s: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<ExpansionTerm> {
    expansion(2, geometry, atom, material, z, d, s, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(lhs: IntegralResult, rhs: IntegralResult, tolerance: f64) -> Self {
        let scale = lhs.value.abs().max(rhs.value.abs());
        let residual = if scale == 0.0 {
            0.0
        } else {
            (lhs.value - rhs.value).abs() / scale
        };
        Self {
            lhs: lhs.value,
            rhs: rhs.value,
            lhs_error: lhs.error_estimate,
            rhs_error: rhs.error_estimate,
            residual,
            tolerance,
            passed: residual <= tolerance && lhs.converged && rhs.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub z: f64,
    pub rel_tol: f64,
    pub first_order: IdentityCheck,
    pub second_order: IdentityCheck,
    /// Correlation part of the second-order right-hand side.
    pub correlation: f64,
}

pub const FIRST_ORDER_TOLERANCE: f64 = 0.01;
pub const SECOND_ORDER_TOLERANCE: f64 = 0.02;

fn term_result(t: &ExpansionTerm) -> IntegralResult {
    IntegralResult {
        value: t.value,
        error_estimate: t.error_estimate,
        evaluations: 0,
        converged: t.converged,
    }
}

/// ∫_{z}^∞ f(t) dt with f decaying like a power of t.
fn tail_integral<F: FnMut(f64) -> Result<IntegralResult>>(mut f: F, z: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let mut failure = None;
    let mut inner_ok = true;
    let mut inner_err = 0.0;
    let r = quadrature::integrate_half_line(
        |t| match f(t) {
            Ok(r) => {
                inner_ok &= r.converged;
                inner_err = f64::max(inner_err, r.error_estimate);
                r.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &HalfLine::new(z, z),
        spec.outer(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(IntegralResult {
        error_estimate: r.error_estimate + inner_err * z,
        converged: r.converged && inner_ok,
        ..r
    })
}

/// Checks that the thick-plate expansion is the z-integral of thin-plate
/// ones: to first order directly, to second order after adding the
/// correlation between every pair of thin slices.
///
/// The double slice integral ∫_{z_A}^∞ dz ∫_0^∞ ds f(z + s) is evaluated as
/// ∫_{z_A}^∞ (t − z_A) f(t) dt.
pub fn additivity_check(
    atom: &AtomModel,
    material: &MaterialModel,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<AdditivityReport> {
    use ExpansionGeometry::*;
    check_inputs(material, z, None, None)?;
    let thin = |order: u8, t: f64| expansion(order, Thin, atom, material, t, Some(1.0), None, spec).map(|e| term_result(&e));
    let pair = |t: f64| expansion(2, TwoThinPlates, atom, material, t, Some(1.0), Some(0.0), spec).map(|e| term_result(&e));

    let (lhs, rhs) = std::thread::scope(|scope| {
        let lhs = scope.spawn(|| -> Result<(IntegralResult, IntegralResult)> {
            let a = expansion_order1(Thick, atom, material, z, None, spec)?;
            let b = expansion_order2(Thick, atom, material, z, None, None, spec)?;
            Ok((term_result(&a), term_result(&b)))
        });
        let rhs = scope.spawn(|| -> Result<(IntegralResult, IntegralResult, IntegralResult)> {
            let first = tail_integral(|t| thin(1, t), z, spec)?;
            let second = tail_integral(|t| thin(2, t), z, spec)?;
            let corr = tail_integral(|t| pair(t).map(|r| r.scaled(t - z)), z, spec)?;
            Ok((first, second, corr))
        });
        (lhs.join().expect("lhs worker panicked"), rhs.join().expect("rhs worker panicked"))
    });
    let (lhs1, lhs2) = lhs?;
    let (rhs1, rhs2, corr) = rhs?;
    Ok(AdditivityReport {
        z,
        rel_tol: spec.rel_tol,
        first_order: IdentityCheck::new(lhs1, rhs1, FIRST_ORDER_TOLERANCE),
        second_order: IdentityCheck::new(lhs2, rhs2.combine(corr), SECOND_ORDER_TOLERANCE),
        correlation: corr.value,
    })
}

/// Left-side reflection coefficients (s, p) of two identical thin plates
/// of thickness d separated by a gap s, seen from the front plate, in the
/// expanded forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThinPairExpansion {
    /// Linear in the thicknesses; single-plate terms included.
    pub linear: (f64, f64),
    /// Two-plate correlation term, quadratic in χ.
    pub correlation: (f64, f64),
    /// The transmission bracket 1 − (X²b² + b_M²)d/(Xb) for (s, p).
    pub transmission_bracket: (f64, f64),
    /// e^{−2 b_M d}.
    pub phase_factor: f64,
}

/// Single thin-plate coefficient (X²b² − b_M²)d/(2Xb), with χ the
/// susceptibility of X and k = εμ − 1.
fn thin_single(chi: f64, k: f64, u2: f64, b: f64, d: f64) -> f64 {
    (chi * (2.0 + chi) * b * b - u2 * k) / (2.0 * (1.0 + chi) * b) * d
}

/// 1 − (X²b² + b_M²)d/(Xb).
fn transmission(chi: f64, k: f64, u2: f64, b: f64, d: f64) -> f64 {
    let x = 1.0 + chi;
    1.0 - ((x * x + 1.0) * b * b + u2 * k) / (x * b) * d
}

pub fn thin_pair_reflection_expansion(material: &MaterialModel, d: f64, s: f64, u: f64, q: f64) -> Result<ThinPairExpansion> {
    check_inputs(material, 1.0, Some(d), Some(s))?;
    if !(u > 0.0 && q >= 0.0 && u.is_finite() && q.is_finite()) {
        return Err(Error::InvalidGeometry(format!("need u > 0, q ≥ 0, got ({u}, {q})")));
    }
    let r = material.response_at(u);
    let (ce, cm) = (r.chi_e, r.chi_m);
    let k = ce + cm + ce * cm;
    let b = u.hypot(q);
    let u2 = u * u;
    let back = (-2.0 * b * s).exp();
    let single_s = thin_single(cm, k, u2, b, d);
    let single_p = thin_single(ce, k, u2, b, d);
    let bracket_s = transmission(cm, k, u2, b, d);
    let bracket_p = transmission(ce, k, u2, b, d);
    let x = u2 / (b * b);
    let common = b * b * d * d * back;
    let corr_s = common * (0.5 * x * x * ce * ce - (x - 0.5 * x * x) * cm * cm - (x - x * x) * ce * cm);
    let corr_p = common * (-(x - 0.5 * x * x) * ce * ce + 0.5 * x * x * cm * cm - (x - x * x) * ce * cm);
    Ok(ThinPairExpansion {
        linear: (single_s + single_s * back * bracket_s, single_p + single_p * back * bracket_p),
        correlation: (corr_s, corr_p),
        transmission_bracket: (bracket_s, bracket_p),
        phase_factor: (-2.0 * (q * q + u2 * r.eps * r.mu).sqrt() * d).exp(),
    })
}

/// Exact correlation part of the two-plate reflection: the full stack
/// coefficient minus the front plate alone and the back plate alone behind
/// a vacuum gap of s + d.
pub fn thin_pair_correlation_exact(material: &MaterialModel, d: f64, s: f64, u: f64, q: f64) -> Result<(f64, f64)> {
    let vac = MaterialModel::vacuum;
    let pair = LayerStack::new(
        vec![
            Layer::semi_infinite(vac()),
            Layer::finite(d, material.clone()),
            Layer::finite(s, vac()),
            Layer::finite(d, material.clone()),
            Layer::semi_infinite(vac()),
        ],
        4,
        1.0,
    )?;
    let single = LayerStack::plate(material.clone(), d, 1.0)?;
    let full = pair.reflection_coefficients(u, q)?;
    let one = single.reflection_coefficients(u, q)?;
    let delay = (-2.0 * u.hypot(q) * (s + d)).exp();
    Ok((
        full.r_s_minus - one.r_s_minus * (1.0 + delay),
        full.r_p_minus - one.r_p_minus * (1.0 + delay),
    ))
}
