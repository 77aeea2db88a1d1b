//! The regression suite: one group of checks per acceptance criterion.

use rayon::prelude::*;
use tfv_core::catalog::{entry, CatalogEntry, CatalogScalar, FieldId};
use tfv_core::classify::{anti_torqued_residual, classify_region, length_and_geodesic, RegionVerdict, Tolerances};
use tfv_core::dual::Scalar;
use tfv_core::field::VectorField;
use tfv_core::sampling::{sample_points, SampleRegion};
use tfv_core::tensor::{christoffel_at, covariant_derivative, metric_at, Point};
use tfv_core::theorem::{flow_convergence, gradient_flow_check, ObstructionTolerances, SCOPE_NOTE};
use tfv_core::{Differentiation, GeomError, ModelSpace, Result};

use crate::commands::{self, charts_named, FLOW_NOTE};
use crate::config::RunConfig;
use crate::report::{num, Check, Expect, Report};
use crate::{CliError, Outcome};

pub const SPACE_FORM_DIMS: [usize; 3] = [2, 3, 5];
pub const SPACE_FORM_POINTS: usize = 100;
pub const SPACE_FORM_TOL: f64 = 1e-7;

pub const EXAMPLE_POINTS: usize = 200;
pub const UHS_F_TOL: f64 = 1e-8;
pub const UHS_FRAME_TOL: f64 = 1e-9;
pub const TORQUED_F_TOL: f64 = 1e-7;
pub const TORQUED_ORTHOGONALITY_TOL: f64 = 1e-9;
pub const ANTI_F_TOL: f64 = 1e-7;
pub const ANTI_RECONSTRUCTION_TOL: f64 = 1e-8;

pub const LENGTH_SPREAD_MIN: f64 = 0.1;
pub const GEODESIC_TOL: f64 = 1e-9;
pub const UNIT_TOL: f64 = 1e-10;
pub const GENERATIVE_TOL: f64 = 1e-8;

pub const OBSTRUCTION_POINTS: usize = 100;
pub const IDENTITY_TOL: f64 = 1e-7;
pub const TORQUED_CLOSEDNESS_TOL: f64 = 1e-9;
pub const TORQUED_GRADIENT_TOL: f64 = 1e-6;
pub const ANTI_OBSTRUCTION_TOL: f64 = 1e-10;

pub const FLOW_T_MAX: f64 = 0.5;
pub const FLOW_STEP: f64 = 1e-3;
pub const FLOW_LINEARITY_TOL: f64 = 1e-6;
/// Step of the step-halving test; at `FLOW_STEP` the error is pure rounding.
pub const CONVERGENCE_STEP: f64 = 0.1;
pub const CONVERGENCE_RATIO: (f64, f64) = (8.0, 32.0);

pub const ORACLE_POINTS: usize = 100;
pub const ORACLE_TOL: f64 = 1e-6;
pub const ORACLE_SPACES: [&str; 8] =
    ["euclidean", "uhs", "hyperboloid", "sphere-north", "sphere-south", "twisted", "product", "twisted-q"];

pub const REJECTION_MIN: f64 = 0.1;

pub const TITLES: [&str; 10] = [
    "space-form audit",
    "upper half-space example",
    "torqued hyperboloid example",
    "anti-torqued hyperboloid example",
    "length propositions",
    "torqued local obstruction",
    "anti-torqued local obstruction",
    "flow mechanism",
    "oracle equivalence",
    "negative controls",
];

#[derive(Clone, Debug)]
pub struct Criterion {
    pub number: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.as_expected)
    }

    pub fn line(&self) -> String {
        let worst = self
            .checks
            .iter()
            .filter(|c| !c.as_expected)
            .map(|c| format!("{} (residual {:.3e}, tolerance {:.1e})", c.id, c.max_residual, c.tolerance))
            .collect::<Vec<_>>();
        if worst.is_empty() {
            format!("criterion {}: PASS {} ({} checks)", self.number, self.title, self.checks.len())
        } else {
            format!("criterion {}: FAIL {}: {}", self.number, self.title, worst.join("; "))
        }
    }
}

fn prefixed(k: usize, checks: Vec<Check>) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.id = format!("c{k}/{}", c.id);
            c
        })
        .collect()
}

/// Runs criterion `k` (1-based).
pub fn criterion(k: usize, cfg: &RunConfig) -> Criterion {
    let checks = match k {
        1 => space_forms(cfg),
        2 => uhs_example(cfg),
        3 => torqued_example(cfg),
        4 => anti_example(cfg),
        5 => length_props(cfg),
        6 => torqued_obstruction(cfg),
        7 => anti_obstruction(cfg),
        8 => flow(cfg),
        9 => oracle(cfg),
        10 => negative_controls(cfg),
        _ => panic!("no criterion {k}"),
    };
    Criterion { number: k, title: TITLES[k - 1], checks: prefixed(k, checks) }
}

pub fn run_all(cfg: &RunConfig) -> Vec<Criterion> {
    (1..=TITLES.len()).map(|k| criterion(k, cfg)).collect()
}

pub fn cmd_suite(cfg: &RunConfig) -> std::result::Result<Outcome, CliError> {
    let criteria = run_all(cfg);
    let mut notes: Vec<String> = criteria.iter().map(Criterion::line).collect();
    notes.push(SCOPE_NOTE.to_string());
    notes.push(FLOW_NOTE.to_string());
    let checks = criteria.into_iter().flat_map(|c| c.checks).collect();
    Ok(Outcome::report(Report::new("suite", cfg, checks, notes)))
}

/// Per-criterion lines recovered from a suite report.
pub fn summary_lines(report: &Report) -> Vec<String> {
    report.notes.iter().filter(|n| n.starts_with("criterion ")).cloned().collect()
}

fn guard(id: String, run: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    run().unwrap_or_else(|e| vec![Check::errored(id, e.to_string())])
}

fn region_verdict(e: &CatalogEntry, chart: &ModelSpace, count: usize, seed: u64, mode: Differentiation) -> Result<RegionVerdict> {
    let pts = sample_points(chart, count, seed, &e.region)?;
    classify_region(chart, &e.field, &pts, &Tolerances::default(), mode)
}

fn flags_check(e: &CatalogEntry, chart: &ModelSpace, v: &RegionVerdict) -> Check {
    Check::with_outcome(format!("flags:{}:{chart}", e.id), v.flags == e.expected, v.max_residual, v.tolerances.residual)
        .witnesses(&v.failures)
        .detail("verdict", v.flags.label())
        .detail("expected", e.expected.label())
}

fn max_f_deviation(v: &RegionVerdict, target: f64) -> f64 {
    v.points.iter().map(|p| (p.decomposition.f - target).abs()).fold(0.0, f64::max)
}

fn space_forms(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for n in SPACE_FORM_DIMS {
        for name in ["uhs", "hyperboloid", "sphere-north", "sphere-south", "euclidean"] {
            let chart = match ModelSpace::by_name(name, n) {
                Ok(c) => c,
                Err(e) => {
                    out.push(Check::errored(format!("curvature:{name}({n})"), e.to_string()));
                    continue;
                }
            };
            out.push(commands::curvature_check(
                &chart,
                SPACE_FORM_POINTS,
                cfg.seed,
                Some(cfg.tol_or(SPACE_FORM_TOL)),
            ));
        }
    }
    out
}

/// `e_j = x_n ∂_j` for `j < n`, `e_n = −x_n ∂_n`.
struct UhsFrame(usize);

impl VectorField for UhsFrame {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        space.check(x)?;
        let n = space.dim();
        let mut v = vec![S::zero(); n];
        v[self.0] = if self.0 == n - 1 { -x[n - 1] } else { x[n - 1] };
        Ok(v)
    }
}

/// `max_p max_j ‖∇_{e_j} e_n − e_j‖` together with `‖∇_{e_n} e_n‖`.
fn uhs_frame_residual(space: &ModelSpace, p: &Point) -> Result<f64> {
    let n = space.dim();
    let g = metric_at(space, p)?;
    let en = UhsFrame(n - 1);
    let mut worst = 0.0_f64;
    for j in 0..n {
        let ej = UhsFrame(j).components(space, &p.coords)?;
        let d = covariant_derivative(space, &ej, &en, p, Differentiation::Exact)?.components;
        let diff: Vec<f64> = if j == n - 1 { d } else { d.iter().zip(&ej).map(|(a, b)| a - b).collect() };
        worst = worst.max(g.norm(&diff));
    }
    Ok(worst)
}

fn uhs_example(cfg: &RunConfig) -> Vec<Check> {
    guard("uhs-example".into(), || {
        let e = entry(FieldId::UhsEn, 3)?;
        let pts = sample_points(&e.space, EXAMPLE_POINTS, cfg.seed, &e.region)?;
        let v = classify_region(&e.space, &e.field, &pts, &Tolerances::default(), Differentiation::Exact)?;
        let frame: Vec<f64> = pts.par_iter().map(|p| uhs_frame_residual(&e.space, p)).collect::<Result<_>>()?;
        let frame_max = frame.iter().copied().fold(0.0, f64::max);
        Ok(vec![
            flags_check(&e, &e.space, &v),
            Check::below("f-equals-one:uhs_en", max_f_deviation(&v, 1.0), cfg.tol_or(UHS_F_TOL)),
            Check::below("frame-derivatives:uhs(3)", frame_max, cfg.tol_or(UHS_FRAME_TOL)),
        ])
    })
}

fn torqued_example(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for n in [3, 4] {
        out.extend(guard(format!("torqued-example:n={n}"), || {
            let e = entry(FieldId::HypTorqued, n)?;
            let v = region_verdict(&e, &e.space, EXAMPLE_POINTS, cfg.seed, Differentiation::Exact)?;
            let f_err = commands::f_agreement(&e, &e.space, &v).unwrap_or(f64::INFINITY);
            let orth = v.points.iter().map(|p| p.diagnostics.orthogonality).fold(0.0, f64::max);
            let id = |what: &str| format!("{what}:hyp_torqued({n})");
            Ok(vec![
                flags_check(&e, &e.space, &v),
                Check::below(id("f-formula"), f_err, cfg.tol_or(TORQUED_F_TOL)),
                Check::below(id("omega-of-v"), orth, cfg.tol_or(TORQUED_ORTHOGONALITY_TOL)),
                Check::above(id("min-abs-f"), v.abs_f_min, 0.0),
                Check::above(id("min-omega-norm"), v.omega_norm_min, 0.0),
            ])
        }));
    }
    out
}

fn anti_example(cfg: &RunConfig) -> Vec<Check> {
    guard("anti-example".into(), || {
        let e = entry(FieldId::HypAntiTorqued, 3)?;
        let pts = sample_points(&e.space, EXAMPLE_POINTS, cfg.seed, &e.region)?;
        let v = classify_region(&e.space, &e.field, &pts, &Tolerances::default(), Differentiation::Exact)?;
        let rec: Vec<f64> = v
            .points
            .par_iter()
            .map(|p| anti_torqued_residual(&e.space, &e.field, &p.point, p.decomposition.f, Differentiation::Exact))
            .collect::<Result<_>>()?;
        Ok(vec![
            flags_check(&e, &e.space, &v),
            Check::below("f-equals-one:hyp_antitorqued", max_f_deviation(&v, 1.0), cfg.tol_or(ANTI_F_TOL)),
            Check::below(
                "reconstruction:hyp_antitorqued",
                rec.iter().copied().fold(0.0, f64::max),
                cfg.tol_or(ANTI_RECONSTRUCTION_TOL),
            ),
        ])
    })
}

fn length_props(cfg: &RunConfig) -> Vec<Check> {
    let mut out = guard("length:hyp_torqued".into(), || {
        let e = entry(FieldId::HypTorqued, 3)?;
        let pts = sample_points(&e.space, EXAMPLE_POINTS, cfg.seed, &e.region)?;
        let r = length_and_geodesic(&e.space, &e.field, &pts, 1e-8, Differentiation::Exact)?;
        Ok(vec![Check::above("length-spread:hyp_torqued", r.length_max - r.length_min, LENGTH_SPREAD_MIN)])
    });
    out.extend(guard("length:uhs_en".into(), || {
        let e = entry(FieldId::UhsEn, 3)?;
        let pts = sample_points(&e.space, EXAMPLE_POINTS, cfg.seed, &e.region)?;
        let r = length_and_geodesic(&e.space, &e.field, &pts, cfg.tol_or(UNIT_TOL), Differentiation::Exact)?;
        let unit_dev = (r.length_max - 1.0).abs().max((r.length_min - 1.0).abs());
        let v = classify_region(&e.space, &e.field, &pts, &Tolerances::default(), Differentiation::Exact)?;
        let generative: Vec<f64> = v
            .points
            .iter()
            .map(|p| {
                let g = metric_at(&e.space, &p.point)?;
                let nu = g.lower(&p.decomposition.field);
                let sum: Vec<f64> =
                    p.decomposition.omega.components.iter().zip(&nu).map(|(w, n)| w + p.decomposition.f * n).collect();
                g.conorm(&sum)
            })
            .collect::<Result<_>>()?;
        Ok(vec![
            Check::below("geodesic:uhs_en", r.max_geodesic_abs, cfg.tol_or(GEODESIC_TOL)),
            Check::below("unit:uhs_en", unit_dev, cfg.tol_or(UNIT_TOL)),
            Check::below(
                "generative-parallel:uhs_en",
                generative.iter().copied().fold(0.0, f64::max),
                cfg.tol_or(GENERATIVE_TOL),
            ),
        ])
    }));
    out
}

fn torqued_obstruction(cfg: &RunConfig) -> Vec<Check> {
    guard("torqued-obstruction".into(), || {
        let e = entry(FieldId::HypTorqued, 3)?;
        let mut out = vec![commands::curvature_identity(&e, &e.space, OBSTRUCTION_POINTS, cfg.seed, cfg.tol_or(IDENTITY_TOL))];
        let tol = match cfg.tol {
            Some(t) => ObstructionTolerances::uniform(t),
            None => ObstructionTolerances {
                agreement: ObstructionTolerances::torqued().agreement,
                gradient: TORQUED_GRADIENT_TOL,
                closedness: TORQUED_CLOSEDNESS_TOL,
            },
        };
        out.extend(commands::obstruction_checks(&e, true, OBSTRUCTION_POINTS, cfg.seed, &tol, Differentiation::Exact)?);
        Ok(out)
    })
}

fn anti_obstruction(cfg: &RunConfig) -> Vec<Check> {
    let tol = match cfg.tol {
        Some(t) => ObstructionTolerances::uniform(t),
        None => ObstructionTolerances {
            agreement: ObstructionTolerances::anti_torqued().agreement,
            gradient: ANTI_OBSTRUCTION_TOL,
            closedness: ANTI_OBSTRUCTION_TOL,
        },
    };
    let mut out = Vec::new();
    for id in [FieldId::UhsEn, FieldId::HypAntiTorqued] {
        out.extend(guard(format!("anti-obstruction:{id}"), || {
            let e = entry(id, 3)?;
            commands::obstruction_checks(&e, false, OBSTRUCTION_POINTS, cfg.seed, &tol, Differentiation::Exact)
        }));
    }
    out
}

fn flow(cfg: &RunConfig) -> Vec<Check> {
    guard("flow".into(), || {
        let space = ModelSpace::hyperboloid(3)?;
        let p0 = Point::new(vec![1.0; 3]);
        let f = CatalogScalar::FTorqued;
        let trace = gradient_flow_check(&space, &f, &p0, FLOW_T_MAX, FLOW_STEP, Differentiation::Exact)?;
        let conv = flow_convergence(&space, &f, &p0, FLOW_T_MAX, CONVERGENCE_STEP, Differentiation::Exact)?;
        let (lo, hi) = CONVERGENCE_RATIO;
        Ok(vec![
            Check::below("flow-linearity:hyperboloid(3)", trace.linearity_error, cfg.tol_or(FLOW_LINEARITY_TOL))
                .detail("truncated", trace.truncated)
                .detail("steps", trace.times.len() - 1),
            Check::with_outcome("step-halving-ratio", conv.ratio >= lo && conv.ratio <= hi, conv.ratio, hi)
                .detail("ratio_min", lo)
                .detail("ratio_max", hi)
                .detail("step", conv.step)
                .detail("coarse_error", num(conv.coarse_error))
                .detail("fine_error", num(conv.fine_error)),
        ])
    })
}

fn christoffel_gap(space: &ModelSpace, p: &Point) -> Result<f64> {
    let a = christoffel_at(space, p, Differentiation::Exact)?;
    let b = christoffel_at(space, p, Differentiation::central_fourth_order())?;
    let scale = a.symbols.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let diff = a.symbols.iter().zip(&b.symbols).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    // flat charts have identically zero symbols
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

fn oracle(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for name in ORACLE_SPACES {
        out.extend(guard(format!("christoffel-oracle:{name}"), || {
            let space = ModelSpace::by_name(name, 3)?;
            let pts = sample_points(&space, ORACLE_POINTS, cfg.seed, &SampleRegion::default_for(&space))?;
            let gaps: Vec<f64> = pts.par_iter().map(|p| christoffel_gap(&space, p)).collect::<Result<_>>()?;
            let max = gaps.iter().copied().fold(0.0, f64::max);
            Ok(vec![Check::below(format!("christoffel-oracle:{space}"), max, cfg.tol_or(ORACLE_TOL))])
        }));
    }
    for id in FieldId::ALL {
        out.extend(guard(format!("verdict-oracle:{id}"), || {
            let e = entry(id, 3)?;
            let mut checks = Vec::new();
            for chart in e.charts() {
                let a = region_verdict(&e, &chart, ORACLE_POINTS, cfg.seed, Differentiation::Exact)?;
                let b = region_verdict(&e, &chart, ORACLE_POINTS, cfg.seed, Differentiation::central_fourth_order())?;
                let mismatches = a.points.iter().zip(&b.points).filter(|(x, y)| x.flags != y.flags).count();
                let same = a.flags == b.flags && mismatches == 0;
                checks.push(
                    Check::with_outcome(format!("verdict-oracle:{id}:{chart}"), same, mismatches as f64, 1.0)
                        .detail("exact", a.flags.label())
                        .detail("central4", b.flags.label()),
                );
            }
            Ok(checks)
        }));
    }
    out
}

fn negative_controls(cfg: &RunConfig) -> Vec<Check> {
    let mut out = guard("rot2d".into(), || {
        let e = entry(FieldId::Rot2d, 2)?;
        let v = region_verdict(&e, &e.space, EXAMPLE_POINTS, cfg.seed, Differentiation::Exact)?;
        let min = v.points.iter().map(|p| p.decomposition.residual).fold(f64::INFINITY, f64::min);
        Ok(vec![
            flags_check(&e, &e.space, &v).negative_control(),
            Check::above("rot2d-rejected", min, REJECTION_MIN).negative_control(),
        ])
    });
    out.extend(guard("curvature-identity:euclidean".into(), || {
        let e = entry(FieldId::EuclidPosition, 3)?;
        let chart = charts_named("euclidean", 3).map_err(|e| GeomError::Config(e.to_string()))?[0];
        let c = commands::curvature_identity(&e, &chart, OBSTRUCTION_POINTS, cfg.seed, cfg.tol_or(IDENTITY_TOL));
        Ok(vec![c])
    }));
    debug_assert!(out.iter().all(|c| c.expectation != Expect::ReportOnly));
    out
}
