//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use layervdw::asymptotics::{
    c4_static, coeff_thick, d5_static, strong_border_impedance, thick_border_point, thin_border_mu,
    wall_locate_numeric, SingleResonance, WallScan,
};
use layervdw::perturbation::additivity_check;
use layervdw::potential::{
    potential_halfspace, potential_mirror, potential_plate, potential_thin_linearized, potential_two_plates,
};
use layervdw::search::bisect;
use layervdw::{AtomModel, MaterialModel, MirrorKind, QuadratureSpec, Resonance, SubstitutionMode};

type Outcome = Result<String, String>;
type SlopeCase = (&'static str, f64, f64, Box<dyn Fn(f64) -> f64>);
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn atom() -> AtomModel {
    AtomModel::two_level(1.0, 1.0).unwrap()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn res(plasma: f64, transverse: f64, damping: f64) -> Resonance {
    Resonance::new(plasma, transverse, damping).unwrap()
}

/// Weak electric and strong magnetic response; `plasma_m` sets the magnetic strength.
fn magnetodielectric(plasma_m: f64) -> MaterialModel {
    MaterialModel::drude_lorentz(res(0.75, 1.03, 0.001), res(plasma_m, 1.0, 0.001))
}

fn dielectric() -> MaterialModel {
    MaterialModel::new(vec![res(0.75, 1.03, 0.001)], vec![])
}

fn magnetic() -> MaterialModel {
    MaterialModel::new(vec![], vec![res(2.0, 1.0, 0.001)])
}

fn weak_wall_material() -> MaterialModel {
    MaterialModel::drude_lorentz(res(0.01, 1.0, 0.0), res(1.0, 1.0, 0.0))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

const MIRROR_TOL: f64 = 0.02;

fn c01_retarded_mirror() -> Outcome {
    let z = 50.0;
    let u = potential_mirror(&atom(), z, MirrorKind::Conducting, &spec()).map_err(|e| e.to_string())?;
    let alpha0 = atom().static_polarizability();
    let expected = -3.0 * alpha0 / (32.0 * PI * PI * z.powi(4));
    let r = rel(u.value, expected);
    check(r < MIRROR_TOL, format!("U(50) = {:.6e}, Casimir-Polder {expected:.6e}, rel {r:.2e} (tol {MIRROR_TOL})", u.value))
}

fn c02_nonretarded_mirror() -> Outcome {
    let z = 1e-3;
    let u = potential_mirror(&atom(), z, MirrorKind::Conducting, &spec()).map_err(|e| e.to_string())?;
    let expected = -atom().dipole_sq_sum() / (48.0 * PI * z.powi(3));
    let r = rel(u.value, expected);
    check(r < MIRROR_TOL, format!("U(1e-3) = {:.6e}, Lennard-Jones {expected:.6e}, rel {r:.2e} (tol {MIRROR_TOL})", u.value))
}

fn c03_permeable_antisymmetry() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let z = 10f64.powf(-3.0 + 0.25 * i as f64);
        let c = potential_mirror(&atom(), z, MirrorKind::Conducting, &spec()).map_err(|e| e.to_string())?;
        let p = potential_mirror(&atom(), z, MirrorKind::Permeable, &spec()).map_err(|e| e.to_string())?;
        worst = worst.max(((c.value + p.value) / c.value).abs());
    }
    check(worst <= f64::EPSILON, format!("max |U_c + U_p|/|U_c| = {worst:.1e} over 21 points in [1e-3, 1e2]"))
}

fn c04_thick_strong_border() -> Outcome {
    let z = strong_border_impedance();
    let p = thick_border_point(100.0).map_err(|e| e.to_string())?;
    let ratio = p.mu0.ok_or("no border at ε(0) = 100")? / 100.0;
    check(
        (z - 2.26).abs() <= 0.01 && (ratio - 5.11).abs() <= 0.02,
        format!("Z = {z:.5} (2.26 ± 0.01), μ(0)/ε(0) at ε(0) = 100: {ratio:.4} (5.11 ± 0.02)"),
    )
}

fn c05_weak_border_slope() -> Outcome {
    let chi_e = 1e-4;
    let thick = thick_border_point(1.0 + chi_e).map_err(|e| e.to_string())?;
    let thick_ratio = (thick.mu0.ok_or("no thick border")? - 1.0) / chi_e;
    let thin_chi_m = bisect(|chi_m| d5_static(1.0, 1.0 + chi_e, 1.0 + chi_m, 1.0), 0.0, 1.0, 1e-18, 300)
        .map_err(|e| e.to_string())?;
    let thin_ratio = thin_chi_m / chi_e;
    let target = 23.0 / 7.0;
    let (a, b) = (rel(thick_ratio, target), rel(thin_ratio, target));
    check(
        a < 5e-3 && b < 5e-3,
        format!("χm/χe at border: thick {thick_ratio:.5} (rel {a:.1e}), thin {thin_ratio:.5} (rel {b:.1e}), 23/7 = {target:.5}, tol 5e-3"),
    )
}

fn c06_thin_strong_border() -> Outcome {
    let ratio = thin_border_mu(1e3) / 1e3;
    let r = rel(ratio, 7.0 / 3.0);
    check(r < 5e-3, format!("μ(0)/ε(0) at ε(0) = 1e3: {ratio:.5}, 7/3 rel {r:.1e} (tol 5e-3)"))
}

fn c07_asymptote_matching() -> Outcome {
    let mat = magnetodielectric(2.0);
    let coeffs = coeff_thick(&atom(), &mat, &spec()).map_err(|e| e.to_string())?;
    let u = potential_halfspace(&atom(), &mat, 100.0, &spec()).map_err(|e| e.to_string())?;
    let long = (u.value * 1e8 / coeffs.c4.value - 1.0).abs();
    let diel = dielectric();
    let c3 = coeff_thick(&atom(), &diel, &spec()).map_err(|e| e.to_string())?.c3.value;
    let u = potential_halfspace(&atom(), &diel, 1e-3, &spec()).map_err(|e| e.to_string())?;
    let short = (-u.value * 1e-9 / c3 - 1.0).abs();
    check(
        long < 0.05 && short < 0.05,
        format!("|U z⁴/C4 − 1| at z = 100: {long:.2e}; |−U z³/C3 − 1| at z = 1e-3: {short:.2e} (tol 0.05)"),
    )
}

fn log_slope(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..5)
        .map(|i| {
            let x = z * 2f64.powf(i as f64 / 4.0);
            (x.ln(), f(x).abs().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn c08_power_laws() -> Outcome {
    let thick = |m: MaterialModel| move |z: f64| potential_halfspace(&atom(), &m, z, &spec()).unwrap().value;
    let thin = |m: MaterialModel| move |z: f64| potential_thin_linearized(&atom(), &m, 1e-9, z, &spec()).unwrap().value;
    let cases: [SlopeCase; 8] = [
        ("thick long e", 1e3, -4.0, Box::new(thick(dielectric()))),
        ("thin long e", 1e3, -5.0, Box::new(thin(dielectric()))),
        ("thick short e", 1e-4, -3.0, Box::new(thick(dielectric()))),
        ("thick short m", 1e-4, -1.0, Box::new(thick(magnetic()))),
        ("thin short e", 1e-4, -4.0, Box::new(thin(dielectric()))),
        ("thin short m", 1e-4, -2.0, Box::new(thin(magnetic()))),
        ("thick long m", 1e3, -4.0, Box::new(thick(magnetic()))),
        ("thin long m", 1e3, -5.0, Box::new(thin(magnetic()))),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, z, expected, f) in cases.iter() {
        let slope = log_slope(f, *z);
        ok &= (slope - expected).abs() < 0.05;
        parts.push(format!("{name} {slope:.3} ({expected}, force {})", expected - 1.0));
    }
    check(ok, format!("|U| slopes: {} (tol 0.05)", parts.join("; ")))
}

fn c09_walls() -> Outcome {
    let mat = weak_wall_material();
    let p = SingleResonance::from_models(&atom(), &mat).ok_or("not a single-resonance model")?;
    let thick = wall_locate_numeric(|z| potential_halfspace(&atom(), &mat, z, &spec()), &WallScan::default())
        .map_err(|e| e.to_string())?
        .estimate()
        .ok_or("no thick wall found")?;
    let d = 1e-4;
    let thin = wall_locate_numeric(|z| potential_thin_linearized(&atom(), &mat, d, z, &spec()), &WallScan::default())
        .map_err(|e| e.to_string())?
        .estimate()
        .ok_or("no thin wall found")?;
    let (zt, _) = p.thick_wall();
    let (zd, _) = p.thin_wall(d);
    let bound = p.thin_wall_height_bound();
    let (a, b) = (rel(thick.z_max, zt), rel(thin.z_max, zd));
    let h = thin.u_max / bound;
    check(
        a < 0.15 && b < 0.15 && h <= 0.1,
        format!(
            "thick z_max {:.4e} vs {zt:.4e} (rel {a:.3}); thin z_max {:.4e} vs {zd:.4e} (rel {b:.3}); thin U_max/bound = {h:.2e} (≤ 0.1)",
            thick.z_max, thin.z_max
        ),
    )
}

fn c10_thickness_limits() -> Outcome {
    let mat = magnetodielectric(2.0);
    let z = 1.0;
    let half = potential_halfspace(&atom(), &mat, z, &spec()).map_err(|e| e.to_string())?;
    let thick = potential_plate(&atom(), &mat, 1e3 * z, z, &spec()).map_err(|e| e.to_string())?;
    let a = rel(thick.value, half.value);
    let n0 = mat.static_summary().n0;
    let d = 1e-3 * z / n0;
    let plate = potential_plate(&atom(), &mat, d, z, &spec()).map_err(|e| e.to_string())?;
    let lin = potential_thin_linearized(&atom(), &mat, d, z, &spec()).map_err(|e| e.to_string())?;
    let b = rel(plate.value, lin.value);
    check(
        a < 1e-3 && b < 5e-3,
        format!("d = 1e3 z: rel to half-space {a:.2e} (tol 1e-3); n(0)d = 1e-3 z: rel to linearized {b:.2e} (tol 5e-3)"),
    )
}

fn c11_additivity() -> Outcome {
    let chi: f64 = 1e-3;
    let mat = MaterialModel::drude_lorentz(res(chi.sqrt() * 1.2, 1.2, 0.01), res(chi.sqrt() * 0.8, 0.8, 0.01));
    let r = additivity_check(&atom(), &mat, 1.0, &spec()).map_err(|e| e.to_string())?;
    check(
        r.first_order.passed && r.second_order.passed,
        format!(
            "first order residual {:.2e} (tol {}), second order residual {:.2e} (tol {})",
            r.first_order.residual, r.first_order.tolerance, r.second_order.residual, r.second_order.tolerance
        ),
    )
}

fn c12_two_plates() -> Outcome {
    let s = 15.0;
    let mat = magnetodielectric(2.0);
    let mut sym: f64 = 0.0;
    for z in [0.5, 2.0, 5.0, 7.0] {
        let a = potential_two_plates(&atom(), &mat, s, z, &spec()).map_err(|e| e.to_string())?;
        let b = potential_two_plates(&atom(), &mat, s, s - z, &spec()).map_err(|e| e.to_string())?;
        sym = sym.max(rel(a.value, b.value));
    }
    let mut multi: f64 = 0.0;
    for m in [mat.clone(), MaterialModel::new(mat.electric().to_vec(), vec![]), MaterialModel::new(vec![], mat.magnetic().to_vec())] {
        for z in [0.5, 1.0, 3.0, 7.5] {
            let r = potential_two_plates(&atom(), &m, s, z, &spec()).map_err(|e| e.to_string())?;
            let sum = r.reference.ok_or("missing reference sum")?;
            multi = multi.max(rel(r.value, sum));
        }
    }
    let strong = MaterialModel::drude_lorentz(res(0.75e5, 1.03, 0.001), res(2e5, 1.0, 0.001));
    let mid = potential_two_plates(&atom(), &strong, 6.0, 3.0, &spec()).map_err(|e| e.to_string())?;
    let sum = mid.reference.ok_or("missing reference sum")?;
    let sym_tol = 10.0 * spec().rel_tol;
    check(
        sym < sym_tol && multi < 0.01 && mid.value < sum,
        format!(
            "symmetry {sym:.1e} (tol {sym_tol:.0e}); multiple reflections ≤ {multi:.2e} (tol 0.01); strong plates at midpoint: full {:.6e} < sum {sum:.6e}",
            mid.value
        ),
    )
}

fn c13_monotonicity() -> Outcome {
    let h = 1e-4;
    let mut failures = Vec::new();
    let mut count = 0;
    let mut expect = |name: &str, deriv: f64, sign: f64| {
        count += 1;
        let ok = if sign == 0.0 { deriv == 0.0 } else { deriv * sign > 0.0 };
        if !ok {
            failures.push(format!("{name}: {deriv:.3e}"));
        }
    };
    for (e, m) in [(1.5, 1.2), (4.0, 10.0), (50.0, 300.0)] {
        let c4 = |e: f64, m: f64| c4_static(1.0, e, m).value;
        expect("∂C4/∂ε", (c4(e + h, m) - c4(e - h, m)) / (2.0 * h), -1.0);
        expect("∂C4/∂μ", (c4(e, m + h) - c4(e, m - h)) / (2.0 * h), 1.0);
        let d5 = |e: f64, m: f64| d5_static(1.0, e, m, 1.0);
        expect("∂D5/∂ε", (d5(e + h, m) - d5(e - h, m)) / (2.0 * h), -1.0);
        expect("∂D5/∂μ", (d5(e, m + h) - d5(e, m - h)) / (2.0 * h), 1.0);
    }
    let dg = 1e-3;
    for (ge, gm) in [(0.001, 0.001), (0.05, 0.001), (0.2, 0.3)] {
        let mat = |ge: f64, gm: f64| MaterialModel::drude_lorentz(res(0.75, 1.03, ge), res(2.0, 1.0, gm));
        let u = 0.3;
        let eps = |g: f64| mat(g, gm).response_at(u).eps;
        let mu = |g: f64| mat(ge, g).response_at(u).mu;
        expect("∂ε(iu)/∂γe", (eps(ge + dg) - eps(ge - dg)) / (2.0 * dg), -1.0);
        expect("∂μ(iu)/∂γm", (mu(gm + dg) - mu(gm - dg)) / (2.0 * dg), -1.0);
        let tight = QuadratureSpec::default().with_rel_tol(1e-10);
        let coeffs = |ge: f64, gm: f64| coeff_thick(&atom(), &mat(ge, gm), &tight).unwrap();
        let (pe, me) = (coeffs(ge + dg, gm), coeffs(ge - dg, gm));
        let (pm, mm) = (coeffs(ge, gm + dg), coeffs(ge, gm - dg));
        expect("∂C3/∂γe", (pe.c3.value - me.c3.value) / (2.0 * dg), -1.0);
        expect("∂C3/∂γm", (pm.c3.value - mm.c3.value) / (2.0 * dg), 0.0);
        expect("∂C1/∂γe", (pe.c1.value - me.c1.value) / (2.0 * dg), -1.0);
        expect("∂C1/∂γm", (pm.c1.value - mm.c1.value) / (2.0 * dg), -1.0);
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{count} signed derivatives verified")
        } else {
            format!("violations: {}", failures.join(", "))
        },
    )
}

fn c14_mode_agreement() -> Outcome {
    let mat = magnetodielectric(2.0);
    let base = spec();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let z = 10f64.powf(-3.0 + 0.5 * i as f64);
        let values: Vec<f64> = SubstitutionMode::ALL
            .iter()
            .map(|&m| potential_halfspace(&atom(), &mat, z, &base.with_mode(m)).map(|r| r.value))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for v in &values[1..] {
            worst = worst.max(rel(*v, values[0]));
        }
    }
    let tol = 10.0 * base.rel_tol;
    check(worst < tol, format!("max relative spread across modes {worst:.2e} over 11 points in [1e-3, 1e2] (tol {tol:.0e})"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("retarded mirror limit", c01_retarded_mirror),
        ("nonretarded mirror limit", c02_nonretarded_mirror),
        ("permeable-mirror antisymmetry", c03_permeable_antisymmetry),
        ("thick strong-limit border", c04_thick_strong_border),
        ("weak-limit border slope", c05_weak_border_slope),
        ("thin strong-limit border", c06_thin_strong_border),
        ("asymptote matching", c07_asymptote_matching),
        ("power-law exponents", c08_power_laws),
        ("wall formulas", c09_walls),
        ("thickness limits", c10_thickness_limits),
        ("additivity", c11_additivity),
        ("two-plate checks", c12_two_plates),
        ("monotonicity suite", c13_monotonicity),
        ("quadrature self-consistency", c14_mode_agreement),
    ];
    let results: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria.iter().map(|(_, f)| scope.spawn(*f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("panicked".into())))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
