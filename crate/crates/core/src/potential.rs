//! The van der Waals potential U(z) of a ground-state atom for the supported
//! geometries.
//!
//! Every wall contributes
//!
//! U = (1/8π²) ∫₀^∞ du α(iu) ∫ (q/b) dq e^{-2b z} [u² r_s/D_s − (2b² − u²) r_p/D_p],
//!
//! with b = √(u² + q²) in the vacuum layer holding the atom and z the
//! distance to that wall. Position-independent bulk terms are dropped.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{AtomModel, MaterialModel, MirrorKind, Response};
use crate::quadrature::{self, HalfLine, IntegralResult, QuadratureSpec, SubstitutionMode};
use crate::stack::{contrast, LayerStack, Pol, Side};

/// Above this value of n(0)d/z the linearized thin-plate result is flagged.
pub const THIN_PLATE_LIMIT: f64 = 0.1;

/// U(z) with its error estimate and the split into the two wall terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialResult {
    pub z: f64,
    pub value: f64,
    pub error_estimate: f64,
    /// Term of the wall on the left of the atom.
    pub left: f64,
    /// Term of the wall on the right of the atom.
    pub right: f64,
    /// Same geometry without multiple reflections between the walls
    /// (D ≡ 1), where that comparison is meaningful.
    pub reference: Option<f64>,
    pub converged: bool,
    pub evaluations: usize,
    /// Substitutions used for the left and right terms.
    pub modes: Vec<SubstitutionMode>,
    pub warnings: Vec<String>,
}

impl PotentialResult {
    fn from_terms(z: f64, left: Option<Term>, right: Option<Term>) -> Self {
        let mut total = IntegralResult::ZERO;
        let mut modes = Vec::new();
        for t in left.iter().chain(right.iter()) {
            total = total.combine(t.result);
            if let Some(m) = t.mode {
                modes.push(m);
            }
        }
        let mut out = Self {
            z,
            value: total.value,
            error_estimate: total.error_estimate,
            left: left.map_or(0.0, |t| t.result.value),
            right: right.map_or(0.0, |t| t.result.value),
            reference: None,
            converged: total.converged,
            evaluations: total.evaluations,
            modes,
            warnings: Vec::new(),
        };
        if !out.converged {
            out.warn(format!(
                "quadrature did not reach tolerance at z = {z} (estimate {:.3e})",
                out.error_estimate
            ));
        }
        out
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    fn zero(z: f64) -> Self {
        Self::from_terms(z, None, None)
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    result: IntegralResult,
    mode: Option<SubstitutionMode>,
}

fn check_distance(name: &str, z: f64) -> Result<()> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidPosition(format!("{name} must be positive, got {z}")))
    }
}

fn check_length(name: &str, d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("{name} must be positive, got {d}")))
    }
}

/// Outer (frequency) axis for a wall at distance `dist`: nodes are
/// concentrated below the retardation cutoff 1/(2 dist) and the lowest
/// atomic transition, with breakpoints at every characteristic frequency.
pub(crate) fn frequency_axis(atom: &AtomModel, material_freqs: &[f64], dist: f64) -> HalfLine {
    let cutoff = 0.5 / dist;
    let scale = atom.min_frequency().min(cutoff);
    HalfLine::new(0.0, scale)
        .with_breaks(atom.frequencies())
        .with_breaks(material_freqs.iter().copied())
        .with_breaks([cutoff])
}

/// ∫du α(iu) ∫(q/b)dq e^{−2b·dist} K(b, q²) with `kernel_at(u)` returning K,
/// in the substitution picked by `spec` for this distance.
pub(crate) fn decay_integral<M, K>(
    atom: &AtomModel,
    material_freqs: &[f64],
    dist: f64,
    spec: &QuadratureSpec,
    mut kernel_at: M,
) -> (IntegralResult, SubstitutionMode)
where
    M: FnMut(f64) -> K,
    K: Fn(f64, f64) -> f64,
{
    let mode = spec.resolve_mode(dist);
    let axis = frequency_axis(atom, material_freqs, dist);
    let result = quadrature::integrate_nested(mode, dist, &axis, spec, |u| {
        let alpha = atom.polarizability(u);
        let kernel = kernel_at(u);
        move |y: f64| {
            let (b, q2, measure) = match mode {
                SubstitutionMode::Direct => {
                    let b = u.hypot(y);
                    (b, y * y, y / b)
                }
                SubstitutionMode::Nonretarded => (y, (y - u) * (y + u), 1.0),
                SubstitutionMode::Retarded => (u * y, u * u * (y - 1.0) * (y + 1.0), u),
            };
            let decay = (-2.0 * b * dist).exp();
            if decay == 0.0 || measure == 0.0 || !measure.is_finite() {
                return 0.0;
            }
            alpha * measure * decay * kernel(b, q2)
        }
    });
    (result, mode)
}

/// One wall term. `kernel_at(u)` returns (b, q²) ↦ u² r_s/D_s − (2b² − u²) r_p/D_p.
fn wall_term<M, K>(
    atom: &AtomModel,
    material_freqs: &[f64],
    dist: f64,
    spec: &QuadratureSpec,
    kernel_at: M,
) -> Term
where
    M: FnMut(f64) -> K,
    K: Fn(f64, f64) -> f64,
{
    let (result, mode) = decay_integral(atom, material_freqs, dist, spec, kernel_at);
    Term {
        result: result.scaled(1.0 / (8.0 * PI * PI)),
        mode: Some(mode),
    }
}

#[inline]
fn combine_kernel(u: f64, b: f64, rs: f64, rp: f64) -> f64 {
    u * u * rs - (2.0 * b * b - u * u) * rp
}

/// b_M and the contrasts μ²b² − b_M², ε²b² − b_M² of a medium facing
/// vacuum.
#[inline]
fn medium_terms(u: f64, q2: f64, r: &Response) -> (f64, f64, f64) {
    let u2 = u * u;
    let bm = (q2 + u2 * r.index_sq()).sqrt();
    let ns = contrast(&Response::VACUUM, r, q2, u2, Pol::S);
    let np = contrast(&Response::VACUUM, r, q2, u2, Pol::P);
    (bm, ns, np)
}

/// Fresnel coefficients (r_s, r_p) of a half-space.
#[inline]
pub(crate) fn fresnel(u: f64, b: f64, q2: f64, r: &Response) -> (f64, f64) {
    let (bm, ns, np) = medium_terms(u, q2, r);
    let s = ns / (r.mu * b + bm).powi(2);
    let p = np / (r.eps * b + bm).powi(2);
    (s, p)
}

/// (r_s, r_p) of a free-standing plate of thickness `d`.
#[inline]
pub(crate) fn plate_reflection(u: f64, b: f64, q2: f64, r: &Response, d: f64) -> (f64, f64) {
    let (bm, ns, np) = medium_terms(u, q2, r);
    let t = (bm * d).tanh();
    let one = |x: f64, n: f64| {
        let xb = x * b;
        n * t / (2.0 * xb * bm + (xb * xb + bm * bm) * t)
    };
    (one(r.mu, ns), one(r.eps, np))
}

/// (r_s, r_p) of a plate to first order in its thickness `d`.
#[inline]
pub(crate) fn thin_plate_reflection(u: f64, b: f64, q2: f64, r: &Response, d: f64) -> (f64, f64) {
    let (_, ns, np) = medium_terms(u, q2, r);
    (d * ns / (2.0 * r.mu * b), d * np / (2.0 * r.eps * b))
}

fn mirror_sign(kind: MirrorKind) -> f64 {
    match kind {
        MirrorKind::Conducting => 1.0,
        MirrorKind::Permeable => -1.0,
    }
}

/// Atom at distance `z` from a perfect mirror:
/// U = ∓(1/16π²z³) ∫ du α(iu) e^{-2uz}(1 + 2uz + 2u²z²).
pub fn potential_mirror(
    atom: &AtomModel,
    z: f64,
    kind: MirrorKind,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    check_distance("z", z)?;
    spec.validate()?;
    let axis = frequency_axis(atom, &[], z);
    let integral = quadrature::integrate_half_line(
        |u| {
            let x = u * z;
            atom.polarizability(u) * (-2.0 * x).exp() * (1.0 + 2.0 * x + 2.0 * x * x)
        },
        &axis,
        spec.outer(),
    );
    let factor = -mirror_sign(kind) / (16.0 * PI * PI * z.powi(3));
    let term = Term {
        result: integral.scaled(factor),
        mode: None,
    };
    Ok(PotentialResult::from_terms(z, Some(term), None))
}

/// Atom at distance `z` in front of a semi-infinite magnetodielectric.
pub fn potential_halfspace(
    atom: &AtomModel,
    material: &MaterialModel,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    check_distance("z", z)?;
    spec.validate()?;
    if let Some(kind) = material.mirror_kind() {
        return potential_mirror(atom, z, kind, spec);
    }
    if material.is_vacuum() {
        return Ok(PotentialResult::zero(z));
    }
    let freqs = material.characteristic_frequencies();
    let term = wall_term(atom, &freqs, z, spec, |u| {
        let r = material.response_at(u);
        move |b, q2| {
            let (rs, rp) = fresnel(u, b, q2, &r);
            combine_kernel(u, b, rs, rp)
        }
    });
    Ok(PotentialResult::from_terms(z, Some(term), None))
}

/// Atom at distance `z` in front of a free-standing plate of thickness `d`.
pub fn potential_plate(
    atom: &AtomModel,
    material: &MaterialModel,
    d: f64,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    check_distance("z", z)?;
    check_length("plate thickness", d)?;
    spec.validate()?;
    if let Some(kind) = material.mirror_kind() {
        return potential_mirror(atom, z, kind, spec);
    }
    if material.is_vacuum() {
        return Ok(PotentialResult::zero(z));
    }
    let freqs = material.characteristic_frequencies();
    let term = wall_term(atom, &freqs, z, spec, |u| {
        let r = material.response_at(u);
        move |b, q2| {
            let (rs, rp) = plate_reflection(u, b, q2, &r, d);
            combine_kernel(u, b, rs, rp)
        }
    });
    Ok(PotentialResult::from_terms(z, Some(term), None))
}

/// Plate potential to first order in the thickness `d`; exactly linear in
/// `d`. A warning is attached when n(0)d/z exceeds [`THIN_PLATE_LIMIT`].
pub fn potential_thin_linearized(
    atom: &AtomModel,
    material: &MaterialModel,
    d: f64,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    check_distance("z", z)?;
    check_length("plate thickness", d)?;
    spec.validate()?;
    if material.is_mirror() {
        return Err(Error::InvalidMaterial(
            "a perfect mirror has no thin-plate expansion".into(),
        ));
    }
    if material.is_vacuum() {
        return Ok(PotentialResult::zero(z));
    }
    let freqs = material.characteristic_frequencies();
    // Integrate per unit thickness and scale afterwards, so the result is
    // linear in d to the last bit.
    let term = wall_term(atom, &freqs, z, spec, |u| {
        let r = material.response_at(u);
        move |b, q2| {
            let (rs, rp) = thin_plate_reflection(u, b, q2, &r, 1.0);
            combine_kernel(u, b, rs, rp)
        }
    });
    let term = Term {
        result: term.result.scaled(d),
        ..term
    };
    let mut out = PotentialResult::from_terms(z, Some(term), None);
    let ratio = material.static_summary().n0 * d / z;
    if ratio > THIN_PLATE_LIMIT {
        out.warn(format!(
            "thin-plate expansion used outside its range: n(0)d/z = {ratio:.3}"
        ));
    }
    Ok(out)
}

/// Atom at distance `z` from the left of two identical half-spaces whose
/// surfaces are `s` apart. `reference` holds the sum of the two
/// single-surface potentials.
pub fn potential_two_plates(
    atom: &AtomModel,
    material: &MaterialModel,
    s: f64,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    check_length("separation", s)?;
    check_distance("z", z)?;
    if z >= s {
        return Err(Error::InvalidPosition(format!(
            "z = {z} must lie between the plates (s = {s})"
        )));
    }
    spec.validate()?;
    if material.is_vacuum() {
        let mut out = PotentialResult::zero(z);
        out.reference = Some(0.0);
        return Ok(out);
    }
    let freqs = material.characteristic_frequencies();
    let mirror = material.mirror_kind();
    let wall = |dist: f64| {
        wall_term(atom, &freqs, dist, spec, |u| {
            let r = material.response_at(u);
            move |b, q2| {
                let (rs, rp) = match mirror {
                    Some(kind) => kind.reflection(),
                    None => fresnel(u, b, q2, &r),
                };
                let e = (-2.0 * b * s).exp();
                let ds = 1.0 - rs * rs * e;
                let dp = 1.0 - rp * rp * e;
                combine_kernel(u, b, rs / ds, rp / dp)
            }
        })
    };
    // Both terms go through the same code path, so U(z) and U(s − z) agree
    // exactly.
    let left = wall(z);
    let right = wall(s - z);
    let mut out = PotentialResult::from_terms(z, Some(left), Some(right));

    let single = |dist| potential_halfspace(atom, material, dist, spec);
    let (a, b) = (single(z)?, single(s - z)?);
    out.reference = Some(a.value + b.value);
    Ok(out)
}

/// General stack; the atom sits at `stack.atom_position()` in its layer.
pub fn potential_multilayer(
    atom: &AtomModel,
    stack: &LayerStack,
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    spec.validate()?;
    let freqs: Vec<f64> = stack
        .layers()
        .iter()
        .flat_map(|l| l.material.characteristic_frequencies())
        .collect();
    let all_vacuum = stack.layers().iter().all(|l| l.material.is_vacuum());
    let z = stack.atom_position();
    if all_vacuum {
        return Ok(PotentialResult::zero(z));
    }
    let term = |side: Side| {
        stack.wall_distance(side).map(|dist| {
            wall_term(atom, &freqs, dist, spec, |u| {
                let slice = stack.slice(u);
                move |b, q2| {
                    let r = slice.reflections(b, q2);
                    let (rs, rp) = r.side(side);
                    combine_kernel(u, b, rs / r.d_s, rp / r.d_p)
                }
            })
        })
    };
    Ok(PotentialResult::from_terms(z, term(Side::Left), term(Side::Right)))
}

/// The geometries supported by the sweep drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Mirror { mirror: MirrorKind },
    #[serde(alias = "halfspace")]
    HalfSpace { material: MaterialModel },
    Plate { material: MaterialModel, thickness: f64 },
    #[serde(alias = "thin-plate")]
    ThinPlate { material: MaterialModel, thickness: f64 },
    #[serde(alias = "two-plates")]
    TwoPlates { material: MaterialModel, separation: f64 },
    Multilayer { stack: LayerStack },
}

impl Geometry {
    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Mirror { .. } => "mirror",
            Geometry::HalfSpace { .. } => "halfspace",
            Geometry::Plate { .. } => "plate",
            Geometry::ThinPlate { .. } => "thin_plate",
            Geometry::TwoPlates { .. } => "two_plates",
            Geometry::Multilayer { .. } => "multilayer",
        }
    }

    /// U at atom position `z`. For a multilayer, `z` replaces the stack's
    /// own atom position.
    pub fn potential(&self, atom: &AtomModel, z: f64, spec: &QuadratureSpec) -> Result<PotentialResult> {
        match self {
            Geometry::Mirror { mirror } => potential_mirror(atom, z, *mirror, spec),
            Geometry::HalfSpace { material } => potential_halfspace(atom, material, z, spec),
            Geometry::Plate {
                material,
                thickness,
            } => potential_plate(atom, material, *thickness, z, spec),
            Geometry::ThinPlate {
                material,
                thickness,
            } => potential_thin_linearized(atom, material, *thickness, z, spec),
            Geometry::TwoPlates {
                material,
                separation,
            } => potential_two_plates(atom, material, *separation, z, spec),
            Geometry::Multilayer { stack } => {
                potential_multilayer(atom, &stack.with_atom_position(z)?, spec)
            }
        }
    }

    /// Equivalent explicit stack with the atom at `z`, where one exists.
    pub fn to_stack(&self, z: f64) -> Result<Option<LayerStack>> {
        Ok(match self {
            Geometry::Mirror { mirror } => {
                Some(LayerStack::half_space(MaterialModel::mirror(*mirror), z)?)
            }
            Geometry::HalfSpace { material } => Some(LayerStack::half_space(material.clone(), z)?),
            Geometry::Plate {
                material,
                thickness,
            } => Some(LayerStack::plate(material.clone(), *thickness, z)?),
            Geometry::ThinPlate { .. } => None,
            Geometry::TwoPlates {
                material,
                separation,
            } => Some(LayerStack::cavity(material.clone(), material.clone(), *separation, z)?),
            Geometry::Multilayer { stack } => Some(stack.with_atom_position(z)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Resonance;

    fn atom() -> AtomModel {
        AtomModel::two_level(1.0, 1.0).unwrap()
    }

    fn magnetodielectric(mu_plasma: f64) -> MaterialModel {
        MaterialModel::drude_lorentz(
            Resonance::new(0.75, 1.03, 0.001).unwrap(),
            Resonance::new(mu_plasma, 1.0, 0.001).unwrap(),
        )
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn mirror_limits() {
        let a = atom();
        let far = potential_mirror(&a, 50.0, MirrorKind::Conducting, &spec()).unwrap();
        let cp = -3.0 * a.static_polarizability() / (32.0 * PI * PI * 50f64.powi(4));
        assert!(rel(far.value, cp) < 0.02, "{} vs {cp}", far.value);
        let near = potential_mirror(&a, 1e-3, MirrorKind::Conducting, &spec()).unwrap();
        let lj = -1.0 / (48.0 * PI * 1e-9);
        assert!(rel(near.value, lj) < 0.02, "{} vs {lj}", near.value);
    }

    #[test]
    fn permeable_mirror_is_exact_negative() {
        for z in [1e-3, 0.1, 1.0, 30.0] {
            let c = potential_mirror(&atom(), z, MirrorKind::Conducting, &spec()).unwrap();
            let p = potential_mirror(&atom(), z, MirrorKind::Permeable, &spec()).unwrap();
            assert_eq!(c.value, -p.value);
        }
    }

    #[test]
    fn vacuum_gives_zero() {
        let v = MaterialModel::vacuum();
        let s = spec();
        assert_eq!(potential_halfspace(&atom(), &v, 1.0, &s).unwrap().value, 0.0);
        assert_eq!(potential_plate(&atom(), &v, 0.5, 1.0, &s).unwrap().value, 0.0);
        assert_eq!(potential_thin_linearized(&atom(), &v, 0.5, 1.0, &s).unwrap().value, 0.0);
        assert_eq!(potential_two_plates(&atom(), &v, 2.0, 1.0, &s).unwrap().value, 0.0);
        let st = LayerStack::plate(v, 1.0, 0.3).unwrap();
        assert_eq!(potential_multilayer(&atom(), &st, &s).unwrap().value, 0.0);
    }

    #[test]
    fn near_conductor_matches_mirror() {
        let m = MaterialModel::new(vec![Resonance::new(1e6, 1.0, 0.0).unwrap()], vec![]);
        let h = potential_halfspace(&atom(), &m, 50.0, &spec()).unwrap();
        let c = potential_mirror(&atom(), 50.0, MirrorKind::Conducting, &spec()).unwrap();
        assert!(rel(h.value, c.value) < 1e-3, "{} vs {}", h.value, c.value);
    }

    #[test]
    fn magnetic_half_space_repels() {
        let m = MaterialModel::new(vec![], vec![Resonance::new(2.0, 1.0, 0.001).unwrap()]);
        for z in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let u = potential_halfspace(&atom(), &m, z, &spec()).unwrap();
            assert!(u.value > 0.0 && u.converged, "{z}: {u:?}");
        }
    }

    #[test]
    fn wrappers_agree_with_multilayer() {
        let a = atom();
        let m = magnetodielectric(2.0);
        let s = spec();
        for z in [0.05, 2.0] {
            let h = potential_halfspace(&a, &m, z, &s).unwrap();
            let hm = potential_multilayer(&a, &LayerStack::half_space(m.clone(), z).unwrap(), &s).unwrap();
            assert!(rel(h.value, hm.value) < 1e-6, "{h:?} {hm:?}");

            let p = potential_plate(&a, &m, 0.3, z, &s).unwrap();
            let pm = potential_multilayer(&a, &LayerStack::plate(m.clone(), 0.3, z).unwrap(), &s).unwrap();
            assert!(rel(p.value, pm.value) < 1e-6, "{p:?} {pm:?}");
        }
        let t = potential_two_plates(&a, &m, 3.0, 1.0, &s).unwrap();
        let tm = potential_multilayer(&a, &LayerStack::cavity(m.clone(), m, 3.0, 1.0).unwrap(), &s).unwrap();
        assert!(rel(t.value, tm.value) < 1e-6, "{t:?} {tm:?}");
        assert!(rel(t.left, tm.left) < 1e-6);
        assert!(rel(t.right, tm.right) < 1e-6);
    }

    #[test]
    fn two_plate_symmetry() {
        let m = magnetodielectric(2.0);
        let a = potential_two_plates(&atom(), &m, 3.0, 0.7, &spec()).unwrap();
        let b = potential_two_plates(&atom(), &m, 3.0, 2.3, &spec()).unwrap();
        assert!(rel(a.value, b.value) < 1e-12);
        assert!(rel(a.left, b.right) < 1e-12);
    }

    #[test]
    fn thin_plate_is_linear() {
        let m = magnetodielectric(2.0);
        let one = potential_thin_linearized(&atom(), &m, 1e-3, 1.0, &spec()).unwrap();
        let two = potential_thin_linearized(&atom(), &m, 2e-3, 1.0, &spec()).unwrap();
        assert_eq!(2.0 * one.value, two.value);
        assert!(one.warnings.is_empty());
        let thick = potential_thin_linearized(&atom(), &m, 0.5, 1.0, &spec()).unwrap();
        assert_eq!(thick.warnings.len(), 1);
    }

    #[test]
    fn invalid_arguments() {
        let m = magnetodielectric(2.0);
        let s = spec();
        assert!(potential_halfspace(&atom(), &m, 0.0, &s).is_err());
        assert!(potential_plate(&atom(), &m, -1.0, 1.0, &s).is_err());
        assert!(potential_two_plates(&atom(), &m, 1.0, 1.0, &s).is_err());
        assert!(potential_mirror(&atom(), f64::NAN, MirrorKind::Conducting, &s).is_err());
    }

    #[test]
    fn geometry_dispatch() {
        let g = Geometry::Plate {
            material: magnetodielectric(2.0),
            thickness: 0.2,
        };
        let direct = potential_plate(&atom(), &magnetodielectric(2.0), 0.2, 0.4, &spec()).unwrap();
        assert_eq!(g.potential(&atom(), 0.4, &spec()).unwrap(), direct);
        let json = serde_json::to_string(&g).unwrap();
        let back: Geometry = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
