//! The subcommands. Each turns a validated config into a table and a count
//! of rows that failed numerically.

use layervdw::asymptotics::{self, PlateKind, WallMethod, WallSearch};
use layervdw::perturbation::{self, IdentityCheck};
use layervdw::{AtomModel, Coefficient, Error, Geometry, MaterialModel, QuadratureSpec};
use rayon::prelude::*;

use crate::config::{grid, BorderKind, ConfigError, RunConfig, Spacing};
use crate::output::{Cell, Table};

pub struct Report {
    pub table: Table,
    pub failures: usize,
}

/// Input problems reported by the core library count as config errors.
fn lift(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidResonance(_)
        | Error::InvalidAtom(_)
        | Error::InvalidMaterial(_)
        | Error::InvalidStack(_)
        | Error::InvalidPosition(_)
        | Error::InvalidGeometry(_) => ConfigError(e.to_string()).into(),
        other => other.into(),
    }
}

/// Leading `series` column, present only when the config lists a series.
fn columns<'a>(config: &RunConfig, rest: &[&'a str]) -> Vec<&'a str> {
    let mut cols = Vec::with_capacity(rest.len() + 1);
    if config.series.is_some() {
        cols.push("series");
    }
    cols.extend_from_slice(rest);
    cols
}

fn row(config: &RunConfig, label: &str, rest: Vec<Cell>) -> Vec<Cell> {
    let mut r = Vec::with_capacity(rest.len() + 1);
    if config.series.is_some() {
        r.push(label.into());
    }
    r.extend(rest);
    r
}

/// The single material of a planar geometry and its thickness, if any.
fn single_material(g: &Geometry) -> Result<(MaterialModel, Option<f64>), ConfigError> {
    match g {
        Geometry::Mirror { mirror } => Ok((MaterialModel::mirror(*mirror), None)),
        Geometry::HalfSpace { material } | Geometry::TwoPlates { material, .. } => Ok((material.clone(), None)),
        Geometry::Plate { material, thickness } | Geometry::ThinPlate { material, thickness } => {
            Ok((material.clone(), Some(*thickness)))
        }
        Geometry::Multilayer { .. } => Err(ConfigError(format!(
            "geometry \"{}\" has no single material for this command",
            g.name()
        ))),
    }
}

fn default_range(g: &Geometry) -> (f64, f64, Spacing) {
    match g {
        Geometry::TwoPlates { separation, .. } => (0.005 * separation, 0.995 * separation, Spacing::Linear),
        Geometry::Multilayer { stack } => match stack.layers()[stack.atom_layer()].thickness.value() {
            Some(w) => (0.005 * w, 0.995 * w, Spacing::Linear),
            None => (1e-3, 1e2, Spacing::Log),
        },
        _ => (1e-3, 1e2, Spacing::Log),
    }
}

pub fn scan(config: &RunConfig) -> anyhow::Result<Report> {
    let atom = config.atom()?;
    let geometries = config.geometries()?;
    let params = config.scan.clone().unwrap_or_default();
    let mut jobs = Vec::new();
    for (i, (_, g)) in geometries.iter().enumerate() {
        for z in grid(&params, default_range(g))? {
            jobs.push((i, z));
        }
    }
    let with_ref = geometries.iter().any(|(_, g)| matches!(g, Geometry::TwoPlates { .. }));
    let spec = &config.quadrature;
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, z)| geometries[i].1.potential(atom, z, spec))
        .collect();

    let mut cols = vec!["z_A", "U", "err", "U_left", "U_right"];
    if with_ref {
        cols.push("U_ref");
    }
    cols.push("status");
    let mut table = Table::new(&columns(config, &cols));
    let mut failures = 0;
    for (&(i, z), r) in jobs.iter().zip(results) {
        let label = &geometries[i].0;
        let mut cells: Vec<Cell> = match &r {
            Ok(p) => vec![p.value.into(), p.error_estimate.into(), p.left.into(), p.right.into()],
            Err(_) => vec![f64::NAN.into(); 4],
        };
        cells.insert(0, z.into());
        if with_ref {
            cells.push(r.as_ref().ok().and_then(|p| p.reference).into());
        }
        let status = match &r {
            Ok(p) if p.converged => "ok",
            Ok(p) => {
                log::warn!("{label}: z = {z:.6e} not converged (err {:.3e})", p.error_estimate);
                "unconverged"
            }
            Err(e) => {
                log::warn!("{label}: z = {z:.6e} failed: {e}");
                "failed"
            }
        };
        if status != "ok" {
            failures += 1;
        }
        cells.push(status.into());
        table.push(row(config, label, cells));
    }
    Ok(Report { table, failures })
}

pub fn coeffs(config: &RunConfig) -> anyhow::Result<Report> {
    let atom = config.atom()?;
    let geometries = config.geometries()?;
    let forced = config.coeffs.as_ref().and_then(|c| c.thickness);
    let spec = &config.quadrature;
    let inputs = geometries
        .iter()
        .map(|(label, g)| {
            let (m, d) = single_material(g)?;
            Ok((label.as_str(), m, forced.or(d)))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let results: Vec<_> = inputs
        .par_iter()
        .map(|(_, m, d)| asymptotics::coefficients(atom, m, *d, spec))
        .collect();

    let mut table = Table::new(&columns(config, &["name", "value", "error", "regime", "converged", "thickness"]));
    let mut failures = 0;
    for ((label, m, _), r) in inputs.iter().zip(results) {
        let c = r.map_err(lift)?;
        let mut rows: Vec<(&str, Coefficient, Option<f64>)> =
            vec![("C4", c.thick.c4, None), ("C3", c.thick.c3, None), ("C1", c.thick.c1, None)];
        let limits = static_limits(atom, m, c.thin.map(|t| t.thickness));
        rows.extend(limits.thick.iter().map(|&(n, v)| (n, v, None)));
        if let Some(t) = c.thin {
            let d = Some(t.thickness);
            rows.extend([("D5", t.d5, d), ("D4", t.d4, d), ("D2", t.d2, d)]);
            rows.extend(limits.thin.iter().map(|&(n, v)| (n, v, d)));
        }
        for (name, coeff, d) in rows {
            if !coeff.converged {
                log::warn!("{label}: {name} not converged");
                failures += 1;
            }
            table.push(row(
                config,
                label,
                vec![
                    name.into(),
                    coeff.value.into(),
                    coeff.error_estimate.into(),
                    coeff.regime.name().into(),
                    coeff.converged.into(),
                    d.into(),
                ],
            ));
        }
    }
    Ok(Report { table, failures })
}

#[derive(Default)]
struct StaticLimits {
    thick: Vec<(&'static str, Coefficient)>,
    thin: Vec<(&'static str, Coefficient)>,
}

/// Weak- and strong-medium values of the leading coefficients from the
/// static response, for comparison with the exact ones.
fn static_limits(atom: &AtomModel, m: &MaterialModel, d: Option<f64>) -> StaticLimits {
    if m.is_mirror() {
        return StaticLimits::default();
    }
    let s = m.static_summary();
    let a0 = atom.static_polarizability();
    let make = |value: f64, regime| Coefficient {
        value,
        error_estimate: 0.0,
        regime,
        converged: true,
    };
    let c4 = asymptotics::coeff_thick_limits(s.eps0, s.mu0, a0);
    let mut out = StaticLimits {
        thick: vec![
            ("C4_weak", make(c4.weak, layervdw::Regime::WeakLimit)),
            ("C4_strong", make(c4.strong, layervdw::Regime::StrongLimit)),
        ],
        thin: Vec::new(),
    };
    if let Some(d) = d {
        let d5 = asymptotics::coeff_thin_limits(s.eps0, s.mu0, a0, d);
        out.thin = vec![
            ("D5_weak", make(d5.weak, layervdw::Regime::WeakLimit)),
            ("D5_strong", make(d5.strong, layervdw::Regime::StrongLimit)),
        ];
    }
    out
}

pub fn border(config: &RunConfig) -> anyhow::Result<Report> {
    let params = config
        .border
        .as_ref()
        .ok_or_else(|| ConfigError("missing \"border\"".into()))?;
    let eps = grid(&params.eps0.as_scan(), (1.0, 1e2, Spacing::Log))?;
    if let Some(bad) = eps.iter().find(|&&e| e < 1.0) {
        return Err(ConfigError(format!("eps0 values must be >= 1, got {bad}")).into());
    }
    let kinds: &[PlateKind] = match params.kind {
        BorderKind::Thick => &[PlateKind::Thick],
        BorderKind::Thin => &[PlateKind::Thin],
        BorderKind::Both => &[PlateKind::Thick, PlateKind::Thin],
    };
    let jobs: Vec<(PlateKind, f64)> = kinds.iter().flat_map(|&k| eps.iter().map(move |&e| (k, e))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(kind, e)| match kind {
            PlateKind::Thick => asymptotics::thick_border_point(e).map(|p| p.mu0),
            PlateKind::Thin => Ok(Some(asymptotics::thin_border_mu(e))),
        })
        .collect();
    let mut table = Table::new(&["kind", "eps0", "mu0", "status"]);
    let mut failures = 0;
    for (&(kind, e), r) in jobs.iter().zip(results) {
        let (mu, status) = match r {
            Ok(Some(mu)) => (Some(mu), "ok"),
            // C4 stays positive up to the search limit: no repulsion.
            Ok(None) => (None, "no_root"),
            Err(err) => {
                log::warn!("{} border at eps0 = {e}: {err}", kind.name());
                failures += 1;
                (None, "failed")
            }
        };
        table.push(vec![kind.name().into(), e.into(), mu.into(), status.into()]);
    }
    Ok(Report { table, failures })
}

pub fn wall(config: &RunConfig) -> anyhow::Result<Report> {
    let atom = config.atom()?;
    let params = config.wall.as_ref().ok_or_else(|| ConfigError("missing \"wall\"".into()))?;
    let geometries = config.geometries()?;
    let scan = params.scan.unwrap_or_default().resolve();
    let spec = &config.quadrature;
    let mut inputs = Vec::new();
    for (label, g) in &geometries {
        let (m, d) = single_material(g)?;
        let d = params.thickness.or(d);
        if params.kind == PlateKind::Thin && d.is_none() {
            return Err(ConfigError(format!("{label}: a thin-plate wall needs \"thickness\"")).into());
        }
        inputs.push((label.as_str(), g, m, d));
    }

    let results: Vec<Vec<Vec<Cell>>> = inputs
        .par_iter()
        .map(|(_, g, m, d)| -> anyhow::Result<Vec<Vec<Cell>>> {
            let mut rows = analytic_wall(params.kind, atom, m, *d, spec)?;
            if params.numeric {
                let probe = match (params.kind, g) {
                    (PlateKind::Thick, Geometry::Mirror { .. }) => (*g).clone(),
                    (PlateKind::Thick, _) => Geometry::HalfSpace { material: m.clone() },
                    (PlateKind::Thin, _) => Geometry::ThinPlate {
                        material: m.clone(),
                        thickness: d.expect("checked above"),
                    },
                };
                rows.push(numeric_wall(&probe, atom, &scan, spec));
            }
            Ok(rows)
        })
        .collect::<anyhow::Result<_>>()?;

    let mut table = Table::new(&columns(
        config,
        &["kind", "method", "z_max", "U_max", "error", "short_distance_consistent", "status", "note"],
    ));
    let mut failures = 0;
    for ((label, ..), rows) in inputs.iter().zip(results) {
        for mut r in rows {
            if r[5] == Cell::Text("failed".into()) {
                failures += 1;
            }
            r.insert(0, params.kind.name().into());
            table.push(row(config, label, r));
        }
    }
    Ok(Report { table, failures })
}

fn method_name(m: WallMethod) -> &'static str {
    match m {
        WallMethod::Generic => "generic",
        WallMethod::TwoLevelClosedForm => "two-level-closed-form",
        WallMethod::Numeric => "numeric",
    }
}

/// Rows without the kind column: method, z_max, U_max, error,
/// short_distance_consistent, status, note.
fn analytic_wall(
    kind: PlateKind,
    atom: &AtomModel,
    m: &MaterialModel,
    d: Option<f64>,
    spec: &QuadratureSpec,
) -> anyhow::Result<Vec<Vec<Cell>>> {
    match asymptotics::wall_estimate(kind, atom, m, d, spec) {
        Ok(report) => {
            let note = report.warnings.join("; ");
            Ok(std::iter::once(report.generic)
                .chain(report.closed_form)
                .map(|w| {
                    vec![
                        method_name(w.method).into(),
                        w.z_max.into(),
                        w.u_max.into(),
                        Cell::Empty,
                        report.short_distance_consistent.into(),
                        "ok".into(),
                        note.clone().into(),
                    ]
                })
                .collect())
        }
        Err(Error::NoWallScale(reason)) => Ok(vec![no_wall_row("analytic", reason)]),
        Err(e) => Err(lift(e)),
    }
}

fn no_wall_row(method: &str, reason: String) -> Vec<Cell> {
    vec![
        method.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        "no_wall".into(),
        reason.into(),
    ]
}

fn numeric_wall(
    probe: &Geometry,
    atom: &AtomModel,
    scan: &asymptotics::WallScan,
    spec: &QuadratureSpec,
) -> Vec<Cell> {
    let skipped_note = |n: usize| if n == 0 { String::new() } else { format!("{n} scan points skipped") };
    match asymptotics::wall_locate_numeric(|z| probe.potential(atom, z, spec), scan) {
        Ok(WallSearch::Wall {
            estimate,
            error_estimate,
            skipped,
        }) => vec![
            "numeric".into(),
            estimate.z_max.into(),
            estimate.u_max.into(),
            error_estimate.into(),
            Cell::Empty,
            "ok".into(),
            skipped_note(skipped).into(),
        ],
        Ok(WallSearch::NoWall { reason, skipped }) => {
            let note = match skipped {
                0 => reason,
                n => format!("{reason}; {}", skipped_note(n)),
            };
            no_wall_row("numeric", note)
        }
        Err(e) => {
            log::warn!("numeric wall search failed: {e}");
            vec![
                "numeric".into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                "failed".into(),
                e.to_string().into(),
            ]
        }
    }
}

pub fn check(config: &RunConfig) -> anyhow::Result<Report> {
    let atom = config.atom()?;
    let geometries = config.geometries()?;
    let z = config.check.as_ref().map_or(1.0, |c| c.z);
    let spec = &config.quadrature;
    let materials = geometries
        .iter()
        .map(|(label, g)| single_material(g).map(|(m, _)| (label.as_str(), m)))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = materials
        .par_iter()
        .map(|(_, m)| perturbation::additivity_check(atom, m, z, spec))
        .collect();

    let mut table = Table::new(&columns(
        config,
        &["identity", "z_A", "lhs", "rhs", "lhs_error", "rhs_error", "residual", "tolerance", "correlation", "passed"],
    ));
    let mut failures = 0;
    for ((label, _), r) in materials.iter().zip(results) {
        let report = r.map_err(lift)?;
        let lines: [(&str, &IdentityCheck, Option<f64>); 2] = [
            ("first_order", &report.first_order, None),
            ("second_order", &report.second_order, Some(report.correlation)),
        ];
        for (name, c, corr) in lines {
            if !c.passed {
                log::warn!("{label}: {name} identity failed (residual {:.3e})", c.residual);
                failures += 1;
            }
            table.push(row(
                config,
                label,
                vec![
                    name.into(),
                    report.z.into(),
                    c.lhs.into(),
                    c.rhs.into(),
                    c.lhs_error.into(),
                    c.rhs_error.into(),
                    c.residual.into(),
                    c.tolerance.into(),
                    corr.into(),
                    c.passed.into(),
                ],
            ));
        }
    }
    Ok(Report { table, failures })
}
