//! The `classify`, `curvature`, `theorem` and `flow` subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::Value;
use tfv_core::catalog::{entry, entry_by_name, CatalogEntry, CatalogScalar, FieldId};
use tfv_core::classify::{classify_region, length_and_geodesic, RegionVerdict, Tolerances, Witness};
use tfv_core::field::ScalarField;
use tfv_core::sampling::{sample_points, SampleRegion};
use tfv_core::space::{ModelSpace, Pole, SpaceKind};
use tfv_core::tensor::{curvature_audit, Point};
use tfv_core::theorem::{
    antitorqued_obstruction_check, curvature_identity_check, gradient_flow_check, FlowTrace,
    ObstructionTolerances, SCOPE_NOTE,
};
use tfv_core::{Differentiation, GeomError};

use crate::config::RunConfig;
use crate::report::{flags_value, num, Check, Expect, Report};
use crate::{geom, CliError, Outcome};

/// Random planes per point in the space-form audit.
pub const PLANES_PER_POINT: usize = 3;
/// Default tolerance of `|K − c|`; flat spaces use [`FLAT_CURVATURE_TOL`].
pub const CURVATURE_TOL: f64 = 1e-7;
pub const FLAT_CURVATURE_TOL: f64 = 1e-9;
pub const CURVATURE_IDENTITY_TOL: f64 = 1e-7;
pub const FLOW_TOL: f64 = 1e-6;
/// Default zero tolerance of the classifier.
pub const ZERO_TOL: f64 = 1e-7;

pub const FLOW_NOTE: &str = "the flow relation is checked as f(phi_t(p)) = f(p) + t; \
     T is a vector field, so T(phi_t(p)) = f(p) + t is read with f in place of T";

/// Charts named by `name`; `sphere` means both graph charts.
pub fn charts_named(name: &str, n: usize) -> Result<Vec<ModelSpace>, CliError> {
    if name == "sphere" {
        return [Pole::North, Pole::South]
            .into_iter()
            .map(|p| ModelSpace::sphere_chart(n, p).map_err(geom))
            .collect();
    }
    Ok(vec![ModelSpace::by_name(name, n).map_err(geom)?])
}

fn classifier_tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances { residual: cfg.tol_or(crate::config::DEFAULT_TOL), zero: cfg.tol_or(ZERO_TOL) }
}

fn sample(chart: &ModelSpace, count: usize, seed: u64, region: &SampleRegion) -> Result<Vec<Point>, CliError> {
    sample_points(chart, count, seed, region).map_err(geom)
}

/// Largest `|f_fit − f| / |f|` against the entry's closed-form scalar.
pub fn f_agreement(e: &CatalogEntry, chart: &ModelSpace, verdict: &RegionVerdict) -> Option<f64> {
    let f = e.expected_f?;
    let mut worst = 0.0_f64;
    for pv in &verdict.points {
        let f0: f64 = f.value(chart, &pv.point.coords).ok()?;
        let err = (pv.decomposition.f - f0).abs();
        worst = worst.max(if f0 != 0.0 { err / f0.abs() } else { err });
    }
    Some(worst)
}

pub fn classify_check(e: &CatalogEntry, chart: &ModelSpace, verdict: &RegionVerdict) -> Check {
    let matches = verdict.flags == e.expected;
    let mut c = Check::with_outcome(
        format!("classify:{}:{}", e.id, chart),
        matches,
        verdict.max_residual,
        verdict.tolerances.residual,
    )
    .witnesses(&verdict.failures)
    .detail("verdict", verdict.flags.label())
    .detail("expected", e.expected.label())
    .detail("flags", flags_value(&verdict.flags))
    .detail("samples", verdict.samples)
    .detail("failures", verdict.failures.len())
    .detail("f_min", num(verdict.f_min))
    .detail("f_max", num(verdict.f_max))
    .detail("abs_f_min", num(verdict.abs_f_min))
    .detail("omega_norm_min", num(verdict.omega_norm_min))
    .detail("omega_norm_max", num(verdict.omega_norm_max))
    .detail("zero_tolerance", verdict.tolerances.zero)
    .detail("domain", e.domain_note);
    if let Some(err) = f_agreement(e, chart, verdict) {
        c = c.detail("f_formula_max_rel_error", num(err));
    }
    if !e.expected.torse_forming {
        c = c.negative_control();
    }
    c
}

pub fn length_check(
    e: &CatalogEntry,
    chart: &ModelSpace,
    points: &[Point],
    tol: f64,
    mode: Differentiation,
) -> Check {
    let id = format!("length:{}:{}", e.id, chart);
    let rep = match length_and_geodesic(chart, &e.field, points, tol, mode) {
        Ok(r) => r,
        Err(err) => return Check::errored(id, err.to_string()),
    };
    let spread = rep.length_max - rep.length_min;
    let check = if e.expected.anti_torqued {
        // anti-torqued fields are unit geodesic fields
        let dev = (rep.length_max - 1.0).abs().max((rep.length_min - 1.0).abs()).max(rep.max_geodesic_rel);
        Check::with_outcome(id, rep.unit && rep.geodesic, dev, tol).detail("claim", "unit geodesic")
    } else if e.expected.torqued && e.expected.proper {
        Check::with_outcome(id, !rep.length_constant, spread, tol).detail("claim", "never of constant length")
    } else {
        Check::with_outcome(id, true, spread, tol).expect(Expect::ReportOnly)
    };
    check
        .detail("length_constant", rep.length_constant)
        .detail("unit", rep.unit)
        .detail("geodesic", rep.geodesic)
        .detail("length_min", num(rep.length_min))
        .detail("length_max", num(rep.length_max))
        .detail("max_length_differential", num(rep.max_length_differential))
        .detail("max_geodesic_abs", num(rep.max_geodesic_abs))
        .detail("max_geodesic_rel", num(rep.max_geodesic_rel))
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let name = cfg.field.as_deref().ok_or_else(|| CliError::Config("classify needs --field".into()))?;
    let e = entry_by_name(name, cfg.n).map_err(geom)?;
    let mut charts = e.charts();
    if let Some(space) = &cfg.space {
        let wanted = charts_named(space, e.space.dim())?;
        charts.retain(|c| wanted.contains(c));
        if charts.is_empty() {
            return Err(CliError::Config(format!("field {} lives on {}, not {space}", e.id, e.space.name())));
        }
    }
    let tol = classifier_tolerances(cfg);
    let mut checks = Vec::new();
    for chart in &charts {
        let pts = sample(chart, cfg.samples, cfg.seed, &e.region)?;
        let verdict = classify_region(chart, &e.field, &pts, &tol, cfg.mode()).map_err(geom)?;
        checks.push(classify_check(&e, chart, &verdict));
        checks.push(length_check(&e, chart, &pts, tol.residual, cfg.mode()));
    }
    Ok(Outcome::report(Report::new("classify", cfg, checks, vec![])))
}

/// `max |K − c|` over random planes at sampled points, or the curvature range
/// when the space has no constant curvature.
pub fn curvature_check(chart: &ModelSpace, samples: usize, seed: u64, tol: Option<f64>) -> Check {
    let id = format!("curvature:{chart}");
    let pts = match sample_points(chart, samples, seed, &SampleRegion::default_for(chart)) {
        Ok(p) => p,
        Err(e) => return Check::errored(id, e.to_string()),
    };
    let audit = match curvature_audit(chart, &pts, PLANES_PER_POINT, seed) {
        Ok(a) => a,
        Err(e) => return Check::errored(id, e.to_string()),
    };
    let base = |c: Check| {
        c.detail("k_min", num(audit.k_min))
            .detail("k_max", num(audit.k_max))
            .detail("points", pts.len())
            .detail("planes_per_point", PLANES_PER_POINT)
    };
    match chart.curvature_constant() {
        Some(c) => {
            let default = if c == 0.0 { FLAT_CURVATURE_TOL } else { CURVATURE_TOL };
            let tol = tol.unwrap_or(default);
            let devs: Vec<f64> = audit
                .curvatures
                .iter()
                .map(|ks| ks.iter().fold(0.0_f64, |m, k| m.max((k - c).abs())))
                .collect();
            let max = devs.iter().copied().fold(0.0, f64::max);
            let witnesses: Vec<Witness> = pts
                .iter()
                .zip(&devs)
                .filter(|(_, d)| d.is_nan() || **d >= tol)
                .map(|(p, d)| Witness { coords: p.coords.clone(), reason: format!("|K - c| = {d:.3e}") })
                .collect();
            base(Check::below(id, max, tol).witnesses(&witnesses).detail("expected_curvature", c))
        }
        None => base(Check::with_outcome(id, true, audit.k_max - audit.k_min, tol.unwrap_or(CURVATURE_TOL)))
            .expect(Expect::ReportOnly),
    }
}

pub fn cmd_curvature(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let space = cfg.space.as_deref().ok_or_else(|| CliError::Config("curvature needs --space".into()))?;
    let checks = charts_named(space, cfg.n)?
        .iter()
        .map(|chart| curvature_check(chart, cfg.samples, cfg.seed, cfg.tol))
        .collect();
    Ok(Outcome::report(Report::new("curvature", cfg, checks, vec![])))
}

fn default_field(space: &ModelSpace) -> FieldId {
    match space.kind() {
        SpaceKind::Euclidean => FieldId::EuclidPosition,
        SpaceKind::UpperHalfSpace => FieldId::UhsEn,
        SpaceKind::Hyperboloid => FieldId::HypTorqued,
        SpaceKind::Sphere(_) => FieldId::SphereTorse,
        SpaceKind::TwistedProduct(_) => FieldId::TwistedTorqued,
    }
}

/// Curvature identity for `field` on `chart`, sampled from the field's
/// region.
pub fn curvature_identity(e: &CatalogEntry, chart: &ModelSpace, samples: usize, seed: u64, tol: f64) -> Check {
    let id = format!("curvature-identity:{}:{}", e.id, chart);
    let run = || -> Result<Check, GeomError> {
        let pts = sample_points(chart, samples, seed, &e.region)?;
        let r = curvature_identity_check(chart, &e.field, &pts, seed, tol)?;
        Ok(Check::from_obstruction(id.clone(), &r))
    };
    run().unwrap_or_else(|err| Check::errored(id.clone(), err.to_string()))
}

pub fn obstruction_checks(
    e: &CatalogEntry,
    torqued: bool,
    samples: usize,
    seed: u64,
    tol: &ObstructionTolerances,
    mode: Differentiation,
) -> Result<Vec<Check>, GeomError> {
    let pts = sample_points(&e.space, samples, seed, &e.region)?;
    let set = if torqued {
        tfv_core::theorem::torqued_obstruction_check(e, &pts, tol, mode)?
    } else {
        antitorqued_obstruction_check(e, &pts, tol, mode)?
    };
    Ok(set
        .reports()
        .iter()
        .map(|r| Check::from_obstruction(format!("{}:{}", r.check_id, e.id), r))
        .collect())
}

pub fn cmd_theorem(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let chosen = match &cfg.field {
        Some(name) => Some(entry_by_name(name, cfg.n).map_err(geom)?),
        None => None,
    };
    let charts = match (&cfg.space, &chosen) {
        (Some(space), Some(e)) => {
            let wanted = charts_named(space, e.space.dim())?;
            let charts: Vec<ModelSpace> = e.charts().into_iter().filter(|c| wanted.contains(c)).collect();
            if charts.is_empty() {
                return Err(CliError::Config(format!("field {} lives on {}, not {space}", e.id, e.space.name())));
            }
            charts
        }
        (Some(space), None) => charts_named(space, cfg.n)?,
        (None, Some(e)) => e.charts(),
        (None, None) => Vec::new(),
    };
    let e = match (&chosen, charts.first()) {
        (Some(e), _) => e.clone(),
        (None, Some(chart)) => entry(default_field(chart), cfg.n).map_err(geom)?,
        (None, None) => match cfg.check.as_deref() {
            Some("torqued-obstruction") => entry(FieldId::HypTorqued, cfg.n).map_err(geom)?,
            Some("anti-obstruction") => entry(FieldId::UhsEn, cfg.n).map_err(geom)?,
            _ => return Err(CliError::Config("theorem needs --space or --field".into())),
        },
    };
    let charts = if charts.is_empty() { e.charts() } else { charts };

    let selected: Vec<&str> = match cfg.check.as_deref() {
        Some(c @ ("curvature-identity" | "torqued-obstruction" | "anti-obstruction")) => vec![c],
        Some("all") | None => {
            let mut v = Vec::new();
            if charts[0].curvature_constant().is_some() {
                v.push("curvature-identity");
            }
            if e.expected.torqued {
                v.push("torqued-obstruction");
            }
            if e.expected.anti_torqued {
                v.push("anti-obstruction");
            }
            v
        }
        Some(other) => return Err(CliError::Config(format!("unknown check `{other}`"))),
    };
    if selected.is_empty() {
        return Err(CliError::Config(format!("no theorem check applies to {} on {}", e.id, charts[0])));
    }

    let mut checks = Vec::new();
    for check in selected {
        match check {
            "curvature-identity" => {
                if charts[0].curvature_constant().is_none() {
                    return Err(CliError::Config(format!(
                        "curvature identity needs a space form, {} has variable curvature",
                        charts[0]
                    )));
                }
                let tol = cfg.tol_or(CURVATURE_IDENTITY_TOL);
                for chart in &charts {
                    checks.push(curvature_identity(&e, chart, cfg.samples, cfg.seed, tol));
                }
            }
            "torqued-obstruction" | "anti-obstruction" => {
                let torqued = check == "torqued-obstruction";
                let tol = match cfg.tol {
                    Some(t) => ObstructionTolerances::uniform(t),
                    None if torqued => ObstructionTolerances::torqued(),
                    None => ObstructionTolerances::anti_torqued(),
                };
                checks.extend(obstruction_checks(&e, torqued, cfg.samples, cfg.seed, &tol, cfg.mode()).map_err(geom)?);
            }
            _ => unreachable!(),
        }
    }
    let notes = vec![SCOPE_NOTE.to_string()];
    Ok(Outcome::report(Report::new("theorem", cfg, checks, notes)))
}

fn default_scalar(space: &ModelSpace) -> CatalogScalar {
    match space.kind() {
        SpaceKind::Euclidean => CatalogScalar::Coordinate(0),
        SpaceKind::UpperHalfSpace => CatalogScalar::Coordinate(space.dim() - 1),
        SpaceKind::Hyperboloid => CatalogScalar::FTorqued,
        SpaceKind::Sphere(_) => CatalogScalar::FSphere,
        SpaceKind::TwistedProduct(_) => CatalogScalar::FTwisted,
    }
}

fn default_start(space: &ModelSpace) -> Vec<f64> {
    let n = space.dim();
    match space.kind() {
        SpaceKind::Hyperboloid => vec![1.0; n],
        SpaceKind::UpperHalfSpace => {
            let mut x = vec![0.0; n];
            x[n - 1] = 1.0;
            x
        }
        SpaceKind::Sphere(_) => {
            let mut x = vec![0.0; n];
            x[0] = 0.3;
            x
        }
        SpaceKind::Euclidean | SpaceKind::TwistedProduct(_) => vec![0.0; n],
    }
}

pub fn trace_csv(trace: &FlowTrace) -> String {
    let n = trace.start.dim();
    let mut out = String::from("t");
    for k in 1..=n {
        let _ = write!(out, ",x{k}");
    }
    out.push_str(",f\n");
    for ((t, p), f) in trace.times.iter().zip(&trace.points).zip(&trace.f_values) {
        let _ = write!(out, "{t}");
        for c in &p.coords {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{f}");
    }
    out
}

pub fn cmd_flow(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let space_name = cfg.space.as_deref().unwrap_or("hyperboloid");
    let chart = charts_named(space_name, cfg.n)?[0];
    let f = match cfg.field.as_deref() {
        Some(name) => CatalogScalar::by_name(name).map_err(geom)?,
        None => default_scalar(&chart),
    };
    let start = cfg.start.clone().unwrap_or_else(|| default_start(&chart));
    if start.len() != chart.dim() {
        return Err(CliError::Config(format!(
            "start point needs {} coordinates, got {}",
            chart.dim(),
            start.len()
        )));
    }
    let p0 = Point::new(start);
    chart.check(&p0.coords).map_err(|e| CliError::Config(e.to_string()))?;
    let trace = gradient_flow_check(&chart, &f, &p0, cfg.t_max, cfg.step, cfg.mode()).map_err(geom)?;
    let csv = trace_csv(&trace);
    let csv_path: Option<PathBuf> = cfg.csv.clone().or_else(|| cfg.out.as_ref().map(|p| p.with_extension("csv")));
    let mut check = Check::below(format!("flow-linearity:{chart}"), trace.linearity_error, cfg.tol_or(FLOW_TOL))
        .detail("truncated", trace.truncated)
        .detail("steps", trace.times.len() - 1)
        .detail("t_end", num(*trace.times.last().unwrap()))
        .detail("f_start", num(trace.f_values[0]))
        .detail("f_end", num(*trace.f_values.last().unwrap()))
        .detail("start", Value::from(trace.start.coords.clone()))
        .detail("end", Value::from(trace.points.last().unwrap().coords.clone()));
    let mut files = Vec::new();
    match csv_path {
        Some(path) => {
            check = check.detail("trace_csv_path", path.display().to_string());
            files.push((path, csv));
        }
        None => check = check.detail("trace_csv", csv),
    }
    let report = Report::new("flow", cfg, vec![check], vec![FLOW_NOTE.to_string()]);
    Ok(Outcome { report, files })
}
