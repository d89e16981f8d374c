//! Adaptive Gauss–Kronrod quadrature on finite intervals and half-lines,
//! plus the nested (u, ·) integrals used by every potential.
//!
//! Half-lines [a, ∞) are mapped onto [0, 1) by x = a + s₀ t/(1 − t), so
//! that the node density follows the decay length s₀ of the integrand.
//! Panels are refined by bisection of the panel with the largest error
//! estimate (lowest index on ties), which makes every result reproducible
//! bit for bit.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inner-variable substitution for the (u, q) double integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutionMode {
    /// Inner variable q ∈ [0, ∞), measure (q/b) dq.
    Direct,
    /// Inner variable v = b/u ∈ [1, ∞), measure u dv.
    Retarded,
    /// Inner variable b ∈ [u, ∞), measure db.
    Nonretarded,
}

impl SubstitutionMode {
    pub const ALL: [SubstitutionMode; 3] = [
        SubstitutionMode::Direct,
        SubstitutionMode::Retarded,
        SubstitutionMode::Nonretarded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubstitutionMode::Direct => "direct",
            SubstitutionMode::Retarded => "retarded",
            SubstitutionMode::Nonretarded => "nonretarded",
        }
    }

    /// Lower limit and decay scale of the inner variable at outer point `u`
    /// for an integrand decaying like e^{-2bz}.
    fn inner_axis(self, u: f64, z: f64) -> (f64, f64) {
        let scale = 0.5 / z;
        match self {
            SubstitutionMode::Direct => (0.0, scale),
            SubstitutionMode::Nonretarded => (u, scale),
            SubstitutionMode::Retarded => {
                let s = if u > 0.0 { scale / u } else { f64::MAX };
                (1.0, s.clamp(1e-3, 1e12))
            }
        }
    }
}

impl std::fmt::Display for SubstitutionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SubstitutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SubstitutionMode::Direct),
            "retarded" => Ok(SubstitutionMode::Retarded),
            "nonretarded" => Ok(SubstitutionMode::Nonretarded),
            other => Err(Error::InvalidQuadrature(format!(
                "unknown substitution mode `{other}`"
            ))),
        }
    }
}

/// Tolerances and substitution policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Relative tolerance of one-dimensional and outer integrals.
    pub rel_tol: f64,
    /// Relative tolerance of inner integrals.
    pub inner_rel_tol: f64,
    /// Absolute error floor.
    pub abs_tol: f64,
    /// Maximum number of panels per adaptive integral.
    pub max_subdivisions: usize,
    /// `None` picks nonretarded below one reference length, retarded above.
    pub mode: Option<SubstitutionMode>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            inner_rel_tol: 1e-8,
            abs_tol: 0.0,
            max_subdivisions: 400,
            mode: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_mode(mut self, mode: SubstitutionMode) -> Self {
        self.mode = Some(mode);
        self
    }

    /// Sets the outer tolerance; the inner one is kept ten times tighter.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.inner_rel_tol = rel_tol * 0.1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) || !positive(self.inner_rel_tol) {
            return Err(Error::InvalidQuadrature(
                "relative tolerances must be finite and > 0".into(),
            ));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(Error::InvalidQuadrature(
                "absolute tolerance must be finite and >= 0".into(),
            ));
        }
        if self.max_subdivisions < 2 {
            return Err(Error::InvalidQuadrature(
                "max_subdivisions must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Substitution used for a wall term at distance `z` (reduced units).
    pub fn resolve_mode(&self, z: f64) -> SubstitutionMode {
        self.mode.unwrap_or(if z < 1.0 {
            SubstitutionMode::Nonretarded
        } else {
            SubstitutionMode::Retarded
        })
    }

    pub fn outer(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    pub fn inner(&self) -> Tolerance {
        Tolerance {
            rel: self.inner_rel_tol,
            abs: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Stopping rule of a single adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_subdivisions: 400,
        }
    }

    /// Error target for an integral of value `value` whose absolute
    /// integrand integrates to `l1`. The last term is the roundoff floor of
    /// the panel rule.
    fn target(&self, value: f64, l1: f64) -> f64 {
        self.abs
            .max(self.rel * value.abs())
            .max(100.0 * f64::EPSILON * l1)
    }
}

/// Value and bookkeeping of one (possibly nested) quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub const ZERO: IntegralResult = IntegralResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }

    /// Sum of two independent results; errors add.
    pub fn combine(self, other: IntegralResult) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// A half-line [lower, ∞) with its decay scale and optional interior
/// breakpoints where the integrand changes character.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    pub lower: f64,
    pub scale: f64,
    pub breaks: Vec<f64>,
}

impl HalfLine {
    pub fn new(lower: f64, scale: f64) -> Self {
        Self {
            lower,
            scale,
            breaks: Vec::new(),
        }
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(breaks);
        self
    }

    #[inline]
    fn to_x(&self, t: f64) -> (f64, f64) {
        let one_minus = 1.0 - t;
        let x = self.lower + self.scale * t / one_minus;
        let jac = self.scale / (one_minus * one_minus);
        (x, jac)
    }

    fn to_t(&self, x: f64) -> f64 {
        let dx = x - self.lower;
        dx / (dx + self.scale)
    }

    fn t_breaks(&self) -> Vec<f64> {
        let mut ts = vec![0.0];
        let mut inner: Vec<f64> = self
            .breaks
            .iter()
            .filter(|&&x| x.is_finite() && x > self.lower)
            .map(|&x| self.to_t(x))
            .filter(|&t| t > 1e-9 && t < 1.0 - 1e-9)
            .collect();
        inner.sort_by(|a, b| a.total_cmp(b));
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        ts.extend(inner);
        ts.push(1.0);
        ts
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    aux: f64,
    l1: f64,
}

/// QUADPACK-style error rescaling of the |Kronrod − Gauss| difference.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One Kronrod panel on [lo, hi]. `f` returns (value, aux); the aux
/// channel is integrated with the Kronrod weights only.
fn gk15<F: FnMut(f64) -> (f64, f64)>(f: &mut F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let (fc, ac) = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut aux = ac.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, a1) = f(center - dx);
        let (f2, a2) = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        aux += WGK[j] * (a1.abs() + a2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    Panel {
        lo,
        hi,
        value,
        error: err,
        aux: aux * h,
        l1: res_abs * h,
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    value: f64,
    error: f64,
    aux: f64,
    l1: f64,
    evaluations: usize,
    converged: bool,
}

fn adaptive<F: FnMut(f64) -> (f64, f64)>(mut f: F, breaks: &[f64], tol: Tolerance) -> Outcome {
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .map(|w| gk15(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let l1: f64 = panels.iter().map(|p| p.l1).sum();
        let aux: f64 = panels.iter().map(|p| p.aux).sum();
        let finished = |converged| Outcome {
            value,
            error,
            aux,
            l1,
            evaluations,
            converged,
        };
        if !value.is_finite() || !error.is_finite() {
            return finished(false);
        }
        if error <= tol.target(value, l1) {
            return finished(true);
        }
        if panels.len() >= tol.max_subdivisions {
            return finished(false);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels[worst];
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            return finished(false);
        }
        let left = gk15(&mut f, p.lo, mid);
        let right = gk15(&mut f, mid, p.hi);
        evaluations += 30;
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
}

fn mapped<F: FnMut(f64) -> (f64, f64)>(line: &HalfLine, mut f: F) -> impl FnMut(f64) -> (f64, f64) {
    let line = HalfLine::new(line.lower, line.scale);
    move |t| {
        let (x, jac) = line.to_x(t);
        if !x.is_finite() || !jac.is_finite() {
            return (0.0, 0.0);
        }
        let (v, a) = f(x);
        if v == 0.0 && a == 0.0 {
            return (0.0, 0.0);
        }
        (v * jac, a * jac)
    }
}

/// ∫_a^b f(x) dx.
pub fn integrate_finite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> IntegralResult {
    let out = adaptive(|x| (f(x), 0.0), &[a, b], tol);
    IntegralResult {
        value: out.value,
        error_estimate: out.error,
        evaluations: out.evaluations,
        converged: out.converged,
    }
}

/// ∫ over a half-line with explicit decay scale and breakpoints.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, line: &HalfLine, tol: Tolerance) -> IntegralResult {
    let out = adaptive(mapped(line, |x| (f(x), 0.0)), &line.t_breaks(), tol);
    IntegralResult {
        value: out.value,
        error_estimate: out.error,
        evaluations: out.evaluations,
        converged: out.converged,
    }
}

/// ∫_a^∞ f(x) dx with the decay scale taken as 1 (override through
/// [`integrate_half_line`]).
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(f: F, a: f64, spec: &QuadratureSpec) -> IntegralResult {
    integrate_half_line(f, &HalfLine::new(a, 1.0), spec.outer())
}

/// ∫₀^∞ du ∫ dy f(u, y), where the inner variable and its range are set by
/// `mode` (see [`SubstitutionMode`]) and the inner integrand is expected to
/// decay like e^{-2bz}.
///
/// `inner_at(u)` builds the inner integrand for one outer node, so that
/// anything depending on u alone is computed once per node. The returned
/// error is the outer estimate plus the outer integral of the inner
/// estimates.
pub fn integrate_nested<M, G>(
    mode: SubstitutionMode,
    z: f64,
    outer: &HalfLine,
    spec: &QuadratureSpec,
    mut inner_at: M,
) -> IntegralResult
where
    M: FnMut(f64) -> G,
    G: FnMut(f64) -> f64,
{
    let inner_tol = spec.inner();
    let inner_evals = Cell::new(0usize);
    let inner_ok = Cell::new(true);
    let outer_fn = |u: f64| {
        let (lower, scale) = mode.inner_axis(u, z);
        let line = HalfLine::new(lower, scale);
        let r = integrate_half_line(inner_at(u), &line, inner_tol);
        inner_evals.set(inner_evals.get() + r.evaluations);
        if !r.converged {
            inner_ok.set(false);
        }
        (r.value, r.error_estimate)
    };
    let out = adaptive(mapped(outer, outer_fn), &outer.t_breaks(), spec.outer());
    let error = out.error + out.aux;
    let converged = out.converged
        && inner_ok.get()
        && out.value.is_finite()
        && error <= spec.outer().target(out.value, 0.0).max(spec.abs_tol)
            + inner_tol.target(out.l1, 0.0)
            + 100.0 * f64::EPSILON * out.value.abs().max(out.aux);
    IntegralResult {
        value: out.value,
        error_estimate: error,
        evaluations: out.evaluations + inner_evals.get(),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gamma_identity() {
        let r = integrate_half_line(|b| (-2.0 * b).exp() * b * b, &HalfLine::new(0.0, 0.5), spec().outer());
        assert!(r.converged);
        assert!((r.value - 0.25).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn arctangent() {
        let r = integrate_semi_infinite(|u| 1.0 / (1.0 + u * u), 0.0, &spec());
        assert!(r.converged);
        assert!((r.value - FRAC_PI_2).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn perfect_mirror_v_integral() {
        // (2/v² − 1/v⁴)·1 + (1/v⁴)·1 over [1, ∞) equals 2
        let r = integrate_semi_infinite(
            |v| (2.0 / (v * v) - 1.0 / v.powi(4)) + 1.0 / v.powi(4),
            1.0,
            &spec(),
        );
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn finite_interval() {
        let r = integrate_finite(f64::sin, 0.0, PI, Tolerance::relative(1e-12));
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_integrand_converges() {
        let r = integrate_semi_infinite(|_| 0.0, 0.0, &spec());
        assert!(r.converged);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn divergent_integral_flagged() {
        let tol = Tolerance {
            rel: 1e-10,
            abs: 0.0,
            max_subdivisions: 50,
        };
        let r = integrate_half_line(|x| 1.0 / (1.0 + x), &HalfLine::new(0.0, 1.0), tol);
        assert!(!r.converged);
    }

    #[test]
    fn breakpoints_are_respected() {
        let line = HalfLine::new(0.0, 1.0).with_breaks([1.0, 1.0, -3.0, f64::NAN, 1000.0]);
        let ts = line.t_breaks();
        assert_eq!(ts.first(), Some(&0.0));
        assert_eq!(ts.last(), Some(&1.0));
        assert_eq!(ts.len(), 4);
    }

    #[test]
    fn nested_exponential_kernel() {
        // ∫∫ e^{-2bz} q/b dq du = 1/(4z²)
        for z in [0.1, 1.0, 7.0] {
            let expected = 0.25 / (z * z);
            for mode in SubstitutionMode::ALL {
                let outer = HalfLine::new(0.0, 0.5 / z);
                let r = integrate_nested(mode, z, &outer, &spec(), |u| {
                    move |y: f64| match mode {
                        SubstitutionMode::Direct => {
                            let b = u.hypot(y);
                            (-2.0 * b * z).exp() * y / b
                        }
                        SubstitutionMode::Nonretarded => (-2.0 * y * z).exp(),
                        SubstitutionMode::Retarded => u * (-2.0 * u * y * z).exp(),
                    }
                });
                assert!(r.converged, "{mode} {z} {r:?}");
                assert!(
                    ((r.value - expected) / expected).abs() < 1e-7,
                    "{mode} z={z}: {} vs {expected}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn nested_zero_integrand() {
        let r = integrate_nested(
            SubstitutionMode::Nonretarded,
            1.0,
            &HalfLine::new(0.0, 1.0),
            &spec(),
            |_| |_: f64| 0.0,
        );
        assert!(r.converged);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn mode_parsing() {
        for m in SubstitutionMode::ALL {
            assert_eq!(m.name().parse::<SubstitutionMode>().unwrap(), m);
        }
        assert!("sideways".parse::<SubstitutionMode>().is_err());
    }

    #[test]
    fn auto_mode_split() {
        let s = spec();
        assert_eq!(s.resolve_mode(0.5), SubstitutionMode::Nonretarded);
        assert_eq!(s.resolve_mode(2.0), SubstitutionMode::Retarded);
        assert_eq!(
            s.with_mode(SubstitutionMode::Direct).resolve_mode(0.5),
            SubstitutionMode::Direct
        );
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec();
        s.rel_tol = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.max_subdivisions = 1;
        assert!(s.validate().is_err());
        assert!(spec().validate().is_ok());
    }
}
