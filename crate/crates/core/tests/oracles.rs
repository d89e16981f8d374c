//! Values checked against independent computations: brute-force quadrature
//! on uniform grids and closed forms evaluated outside the library.

use std::f64::consts::PI;

use layervdw::asymptotics::{c4_static, coeff_thick, strong_bracket};
use layervdw::perturbation::{expansion_order1, ExpansionGeometry};
use layervdw::potential::{potential_halfspace, potential_mirror};
use layervdw::{AtomModel, MaterialModel, MirrorKind, QuadratureSpec, Resonance};

fn atom() -> AtomModel {
    AtomModel::two_level(1.0, 1.0).unwrap()
}

/// Composite trapezoid rule on [0, a] × [0, b] with n × n panels.
fn trapezoid_2d(f: impl Fn(f64, f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (hx, hy) = (a / n as f64, b / n as f64);
    let w = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let mut sum = 0.0;
    for i in 0..=n {
        let x = i as f64 * hx;
        let mut row = 0.0;
        for j in 0..=n {
            row += w(j) * f(x, j as f64 * hy);
        }
        sum += w(i) * row;
    }
    sum * hx * hy
}

#[test]
fn first_order_thick_term_matches_grid_oracle() {
    // χ_e = χ_m: both channels carry the same susceptibility
    let r = Resonance::new(0.3, 1.0, 0.05).unwrap();
    let m = MaterialModel::drude_lorentz(r, r);
    let z = 1.0;
    let a = atom();
    let term = expansion_order1(ExpansionGeometry::Thick, &a, &m, z, None, &QuadratureSpec::default()).unwrap();

    let oracle = trapezoid_2d(
        |u, q| {
            let b = u.hypot(q);
            if b == 0.0 {
                return 0.0;
            }
            let chi = r.susceptibility(u);
            let (u2, b2) = (u * u, b * b);
            // u² times the electric and magnetic brackets
            let e = b2 - u2 + 0.5 * u2 * u2 / b2;
            let m = -u2 + 0.5 * u2 * u2 / b2;
            a.polarizability(u) * q / b * (-2.0 * b * z).exp() * chi * (e + m)
        },
        20.0,
        20.0,
        2000,
    ) * (-1.0 / (8.0 * PI * PI));
    let rel = ((term.value - oracle) / oracle).abs();
    assert!(rel < 1e-4, "{} vs {oracle}: {rel:e}", term.value);
}

#[test]
fn mirror_potential_matches_one_dimensional_oracle() {
    // U = −(1/16π²z³) ∫ α(iu) e^{−2uz}(1 + 2uz + 2u²z²) du
    let a = atom();
    for z in [0.05, 0.5, 3.0] {
        let n = 400_000;
        let top = 40.0 / z;
        let h = top / n as f64;
        let f = |u: f64| {
            let x = u * z;
            a.polarizability(u) * (-2.0 * x).exp() * (1.0 + 2.0 * x + 2.0 * x * x)
        };
        let sum: f64 = (0..=n)
            .map(|i| if i == 0 || i == n { 0.5 } else { 1.0 } * f(i as f64 * h))
            .sum();
        let oracle = -sum * h / (16.0 * PI * PI * z.powi(3));
        let u = potential_mirror(&a, z, MirrorKind::Conducting, &QuadratureSpec::default()).unwrap();
        assert!(((u.value - oracle) / oracle).abs() < 1e-7, "z = {z}: {} vs {oracle}", u.value);
    }
}

#[test]
fn strong_bracket_frozen_values() {
    // quadrature of ∫₁^∞ [(2/v² − 1/v⁴)(v − Z)/(v + Z) − (Zv − 1)/((Zv + 1)v⁴)] dv
    assert!((strong_bracket(0.5) - 1.148_292_729_634).abs() < 1e-11);
    assert!((strong_bracket(5.0) + 0.628_983_107_947).abs() < 1e-11);
}

#[test]
fn conductor_lennard_jones_coefficient() {
    let c = coeff_thick(&atom(), &MaterialModel::mirror(MirrorKind::Conducting), &QuadratureSpec::default()).unwrap();
    assert!((c.c3.value * 48.0 * PI - 1.0).abs() < 1e-9);
    assert!((c.c4.value + 3.0 * atom().static_polarizability() / (32.0 * PI * PI)).abs() < 1e-15);
}

#[test]
fn static_c4_matches_long_range_potential() {
    let m = MaterialModel::drude_lorentz(
        Resonance::new(0.75, 1.03, 0.001).unwrap(),
        Resonance::new(2.0, 1.0, 0.001).unwrap(),
    );
    let s = m.static_summary();
    let c4 = c4_static(atom().static_polarizability(), s.eps0, s.mu0).value;
    assert!(c4 > 0.0);
    let z = 1e3;
    let u = potential_halfspace(&atom(), &m, z, &QuadratureSpec::default()).unwrap();
    assert!((u.value * z.powi(4) / c4 - 1.0).abs() < 1e-3);
}

#[test]
fn weak_c4_matches_frozen_linear_coefficients() {
    // −(α0/640π²)(23χe − 7χm) for χ → 0
    let chi = 1e-6;
    for (ce, cm) in [(chi, 0.0), (0.0, chi), (chi, 2.0 * chi)] {
        let exact = c4_static(1.0, 1.0 + ce, 1.0 + cm).value;
        let weak = -(23.0 * ce - 7.0 * cm) / (640.0 * PI * PI);
        assert!(((exact - weak) / weak).abs() < 1e-5, "({ce}, {cm}): {exact} vs {weak}");
    }
}
