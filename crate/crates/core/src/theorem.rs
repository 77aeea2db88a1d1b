//! Local identities behind the non-existence of torqued and anti-torqued
//! fields on hyperbolic space, and the gradient flow that turns them into a
//! global argument.
//!
//! Sampling verifies the local obstructions only. Global non-existence is a
//! topological statement and stays out of numerical scope; see [`SCOPE_NOTE`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::CatalogEntry;
use crate::classify::{classify_region, decompose_at, Tolerances, Witness};
use crate::diff::Differentiation;
use crate::error::{GeomError, Result};
use crate::field::{MetricDual, OneFormField, ScalarField, VectorField};
use crate::space::ModelSpace;
use crate::tensor::{exterior_derivative_scaled, gradient, metric_at, riemann_tensor, Point};

pub const SCOPE_NOTE: &str =
    "local obstruction verified; global non-existence is a topological theorem, out of numerical scope";

/// Random `(X, Y)` pairs tried per point by [`curvature_identity_check`].
pub const PAIRS_PER_POINT: usize = 5;

/// Gradient norm below which the flow stops at a critical point.
pub const CRITICAL_GRADIENT: f64 = 1e-8;

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 5;

/// What a check is expected to show on its input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Pass,
    /// Negative control: the identity must fail here.
    Fail,
    /// Computed for information; no verdict.
    ReportOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    pub check_id: String,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `max_residual < tolerance`
    pub pass: bool,
    pub tolerance: f64,
    pub expectation: Expectation,
    pub witnesses: Vec<Witness>,
}

impl ObstructionReport {
    fn collect(
        check_id: &str,
        points: &[Point],
        results: Vec<Result<f64>>,
        tolerance: f64,
        expectation: Expectation,
    ) -> Self {
        let mut residuals = Vec::with_capacity(results.len());
        let mut witnesses = Vec::new();
        for (p, r) in points.iter().zip(results) {
            let (value, reason) = match r {
                Ok(v) if v.is_nan() => (f64::INFINITY, "residual is NaN".to_string()),
                Ok(v) => (v, format!("residual {v:.3e}")),
                Err(e) => (f64::INFINITY, e.to_string()),
            };
            if !(value < tolerance) && witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness { coords: p.coords.clone(), reason });
            }
            residuals.push(value);
        }
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        ObstructionReport {
            check_id: check_id.to_string(),
            residuals,
            max_residual,
            pass: max_residual < tolerance,
            tolerance,
            expectation,
            witnesses,
        }
    }

    /// Whether the outcome agrees with the expectation.
    pub fn as_expected(&self) -> bool {
        match self.expectation {
            Expectation::Pass => self.pass,
            Expectation::Fail => !self.pass,
            Expectation::ReportOnly => true,
        }
    }
}

fn require_points(points: &[Point]) -> Result<()> {
    if points.is_empty() {
        return Err(GeomError::Config("obstruction checks need at least one sample point".into()));
    }
    Ok(())
}

/// Residual of `R(X,Y)V = ⟨X,V⟩Y − ⟨Y,V⟩X` relative to `|X||Y||V|`, the
/// worst of [`PAIRS_PER_POINT`] random pairs per point.
///
/// The identity characterizes curvature `−1`. Other constant-curvature spaces
/// are accepted as negative controls; spaces without constant curvature are a
/// precondition error.
pub fn curvature_identity_check<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    points: &[Point],
    seed: u64,
    tolerance: f64,
) -> Result<ObstructionReport> {
    require_points(points)?;
    if space.curvature_constant().is_none() {
        return Err(GeomError::Precondition(format!(
            "curvature identity needs a space form, {space} has variable curvature"
        )));
    }
    let n = space.dim();
    let results: Vec<Result<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let r = riemann_tensor(space, p)?;
            let g = metric_at(space, p)?;
            let v = field.components(space, &p.coords)?;
            let vn = g.norm(&v);
            let mut worst = 0.0_f64;
            for _ in 0..PAIRS_PER_POINT {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let (xv, yv) = (g.inner(&x, &v), g.inner(&y, &v));
                let lhs = r.apply(&x, &y, &v);
                let diff: Vec<f64> = (0..n).map(|k| lhs[k] - (xv * y[k] - yv * x[k])).collect();
                let scale = g.norm(&x) * g.norm(&y) * vn;
                worst = worst.max(g.norm(&diff) / scale);
            }
            Ok(worst)
        })
        .collect();
    let expectation = if space.is_hyperbolic() { Expectation::Pass } else { Expectation::Fail };
    Ok(ObstructionReport::collect("curvature-identity", points, results, tolerance, expectation))
}

/// Tolerances of the obstruction checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstructionTolerances {
    /// Classifier output against the closed-form `f` and `ω`, relative.
    pub agreement: f64,
    /// Gradient identity, relative.
    pub gradient: f64,
    /// Closedness of the form, relative to its largest partial.
    pub closedness: f64,
}

impl ObstructionTolerances {
    pub fn torqued() -> Self {
        ObstructionTolerances { agreement: 1e-7, gradient: 1e-6, closedness: 1e-9 }
    }

    pub fn anti_torqued() -> Self {
        ObstructionTolerances { agreement: 1e-7, gradient: 1e-10, closedness: 1e-10 }
    }

    /// The same tolerance everywhere.
    pub fn uniform(tol: f64) -> Self {
        ObstructionTolerances { agreement: tol, gradient: tol, closedness: tol }
    }
}

/// Reports of one obstruction check: agreement of the classifier with the
/// closed forms, the gradient identity, and closedness of the form.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionSet {
    pub agreement: ObstructionReport,
    pub gradient: ObstructionReport,
    pub closedness: ObstructionReport,
}

impl ObstructionSet {
    pub fn reports(&self) -> [&ObstructionReport; 3] {
        [&self.agreement, &self.gradient, &self.closedness]
    }
}

/// `|f_fit − f| / |f|` and `‖ω_fit − ω‖ / ‖ω‖`, whichever is larger.
fn agreement_residuals<F: ScalarField, W: OneFormField>(
    entry: &CatalogEntry,
    f: &F,
    omega: &W,
    points: &[Point],
    mode: Differentiation,
) -> Vec<Result<f64>> {
    let space = &entry.space;
    points
        .par_iter()
        .map(|p| {
            let dec = decompose_at(space, &entry.field, p, mode)?;
            let g = metric_at(space, p)?;
            let f0: f64 = f.value(space, &p.coords)?;
            let w0 = omega.components(space, &p.coords)?;
            let dw: Vec<f64> = dec.omega.components.iter().zip(&w0).map(|(a, b)| a - b).collect();
            let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
            let f_err = rel((dec.f - f0).abs(), f0.abs());
            let w_err = rel(g.conorm(&dw)?, g.conorm(&w0)?);
            Ok(f_err.max(w_err))
        })
        .collect()
}

fn closedness_residuals<W: OneFormField>(
    space: &ModelSpace,
    form: &W,
    points: &[Point],
    mode: Differentiation,
) -> Vec<Result<f64>> {
    points
        .par_iter()
        .map(|p| {
            let (d, scale) = exterior_derivative_scaled(space, form, p, mode)?;
            let worst = d.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            Ok(if scale > 0.0 { worst / scale } else { worst })
        })
        .collect()
}

fn entry_precondition(entry: &CatalogEntry, points: &[Point], torqued: bool, mode: Differentiation) -> Result<()> {
    require_points(points)?;
    let name = if torqued { "torqued" } else { "anti-torqued" };
    let expected = if torqued { entry.expected.torqued } else { entry.expected.anti_torqued };
    if !expected || entry.expected_f.is_none() || entry.expected_omega.is_none() {
        return Err(GeomError::Precondition(format!("{} is not a {name} catalog entry", entry.id)));
    }
    let verdict = classify_region(&entry.space, &entry.field, points, &Tolerances::default(), mode)?;
    let flagged = if torqued { verdict.flags.torqued } else { verdict.flags.anti_torqued };
    if !flagged {
        let why = verdict.failures.first().map(|w| w.reason.clone()).unwrap_or_default();
        return Err(GeomError::Precondition(format!(
            "{} is not classified {name} on the sample ({why})",
            entry.id
        )));
    }
    Ok(())
}

/// `∇f = V + fW` with `W = ω♯`, and `dω = 0`, using the entry's closed-form
/// `f` and `ω` after confirming they match the classifier.
///
/// The identities are derived for curvature `−1` only; elsewhere the results
/// are [`Expectation::ReportOnly`].
pub fn torqued_obstruction_check(
    entry: &CatalogEntry,
    points: &[Point],
    tol: &ObstructionTolerances,
    mode: Differentiation,
) -> Result<ObstructionSet> {
    entry_precondition(entry, points, true, mode)?;
    let space = &entry.space;
    let (f, omega) = (entry.expected_f.unwrap(), entry.expected_omega.unwrap());
    let expectation = if space.is_hyperbolic() { Expectation::Pass } else { Expectation::ReportOnly };

    let gradient_res: Vec<Result<f64>> = points
        .par_iter()
        .map(|p| {
            let g = metric_at(space, p)?;
            let grad = gradient(space, &f, p, mode)?.components;
            let v = entry.field.components(space, &p.coords)?;
            let f0: f64 = f.value(space, &p.coords)?;
            let w = g.inverse()?.mul_vec(&omega.components(space, &p.coords)?);
            let diff: Vec<f64> = (0..space.dim()).map(|k| grad[k] - v[k] - f0 * w[k]).collect();
            let scale = g.norm(&grad) + g.norm(&v) + f0.abs() * g.norm(&w);
            Ok(g.norm(&diff) / scale)
        })
        .collect();

    Ok(ObstructionSet {
        agreement: ObstructionReport::collect(
            "torqued-agreement",
            points,
            agreement_residuals(entry, &f, &omega, points, mode),
            tol.agreement,
            Expectation::Pass,
        ),
        gradient: ObstructionReport::collect("torqued-gradient", points, gradient_res, tol.gradient, expectation),
        closedness: ObstructionReport::collect(
            "torqued-closedness",
            points,
            closedness_residuals(space, &omega, points, mode),
            tol.closedness,
            expectation,
        ),
    })
}

/// `∇f = (1 − f²)V` and `dν = 0` with `ν = V♭`.
pub fn antitorqued_obstruction_check(
    entry: &CatalogEntry,
    points: &[Point],
    tol: &ObstructionTolerances,
    mode: Differentiation,
) -> Result<ObstructionSet> {
    entry_precondition(entry, points, false, mode)?;
    let space = &entry.space;
    let (f, omega) = (entry.expected_f.unwrap(), entry.expected_omega.unwrap());
    let expectation = if space.is_hyperbolic() { Expectation::Pass } else { Expectation::ReportOnly };

    let gradient_res: Vec<Result<f64>> = points
        .par_iter()
        .map(|p| {
            let g = metric_at(space, p)?;
            let grad = gradient(space, &f, p, mode)?.components;
            let v = entry.field.components(space, &p.coords)?;
            let f0: f64 = f.value(space, &p.coords)?;
            let c = 1.0 - f0 * f0;
            let diff: Vec<f64> = (0..space.dim()).map(|k| grad[k] - c * v[k]).collect();
            let scale = g.norm(&grad) + (1.0 + f0 * f0) * g.norm(&v);
            Ok(g.norm(&diff) / scale)
        })
        .collect();

    Ok(ObstructionSet {
        agreement: ObstructionReport::collect(
            "anti-agreement",
            points,
            agreement_residuals(entry, &f, &omega, points, mode),
            tol.agreement,
            Expectation::Pass,
        ),
        gradient: ObstructionReport::collect("anti-gradient", points, gradient_res, tol.gradient, expectation),
        closedness: ObstructionReport::collect(
            "anti-closedness",
            points,
            closedness_residuals(space, &MetricDual(entry.field), points, mode),
            tol.closedness,
            expectation,
        ),
    })
}

/// Trajectory of `T = ∇f / ⟨∇f, ∇f⟩`, along which `f` grows at unit rate.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    pub start: Point,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub f_values: Vec<f64>,
    /// `max_t |f(φ_t(p0)) − f(p0) − t|`
    pub linearity_error: f64,
    /// The trajectory left the chart before `t_max`.
    pub truncated: bool,
}

fn flow_velocity<F: ScalarField>(space: &ModelSpace, f: &F, x: &[f64], mode: Differentiation) -> Result<Vec<f64>> {
    let p = Point::new(x.to_vec());
    let g = metric_at(space, &p)?;
    let grad = gradient(space, f, &p, mode)?.components;
    let sq = g.inner(&grad, &grad);
    if !(sq.sqrt() > CRITICAL_GRADIENT) {
        return Err(GeomError::CriticalPoint { coords: x.to_vec(), norm: sq.max(0.0).sqrt() });
    }
    Ok(grad.iter().map(|c| c / sq).collect())
}

/// Classical fourth-order Runge-Kutta integration of `dx/dt = T(x)` from
/// `p0` up to `t_max` with a fixed `step` (the last step is shortened to land
/// on `t_max`). Leaving the chart truncates the trace; a vanishing gradient is
/// an error.
pub fn gradient_flow_check<F: ScalarField>(
    space: &ModelSpace,
    f: &F,
    p0: &Point,
    t_max: f64,
    step: f64,
    mode: Differentiation,
) -> Result<FlowTrace> {
    if !(step > 0.0 && step.is_finite()) || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(GeomError::Config(format!("flow needs step > 0 and t_max > 0, got {step} and {t_max}")));
    }
    space.check(&p0.coords)?;
    let n = space.dim();
    let f0: f64 = f.value(space, &p0.coords)?;
    let mut trace = FlowTrace {
        start: p0.clone(),
        times: vec![0.0],
        points: vec![p0.clone()],
        f_values: vec![f0],
        linearity_error: 0.0,
        truncated: false,
    };
    let steps = (t_max / step).ceil() as usize;
    let mut x = p0.coords.clone();
    let mut t = 0.0;
    let leaves = |e: &GeomError| matches!(e, GeomError::OutsideChart { .. } | GeomError::OutsideDomain { .. });
    for i in 0..steps {
        let t_next = if i + 1 == steps { t_max } else { (i + 1) as f64 * step };
        let h = t_next - t;
        let advanced = (|| -> Result<Vec<f64>> {
            let shift = |k: &[f64], c: f64| -> Vec<f64> { (0..n).map(|j| x[j] + c * k[j]).collect() };
            let k1 = flow_velocity(space, f, &x, mode)?;
            let k2 = flow_velocity(space, f, &shift(&k1, h / 2.0), mode)?;
            let k3 = flow_velocity(space, f, &shift(&k2, h / 2.0), mode)?;
            let k4 = flow_velocity(space, f, &shift(&k3, h), mode)?;
            let next: Vec<f64> =
                (0..n).map(|j| x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
            space.check(&next)?;
            Ok(next)
        })();
        let next = match advanced {
            Ok(next) => next,
            Err(e) if leaves(&e) => {
                trace.truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let fv: f64 = match f.value(space, &next) {
            Ok(v) => v,
            Err(e) if leaves(&e) => {
                trace.truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        x = next;
        t = t_next;
        trace.linearity_error = trace.linearity_error.max((fv - f0 - t).abs());
        trace.times.push(t);
        trace.points.push(Point::new(x.clone()));
        trace.f_values.push(fv);
    }
    Ok(trace)
}

/// Linearity errors at `step` and `step / 2` and their ratio; close to 16
/// for a fourth-order scheme once rounding is negligible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub step: f64,
    pub coarse_error: f64,
    pub fine_error: f64,
    pub ratio: f64,
}

pub fn flow_convergence<F: ScalarField>(
    space: &ModelSpace,
    f: &F,
    p0: &Point,
    t_max: f64,
    step: f64,
    mode: Differentiation,
) -> Result<ConvergenceReport> {
    let coarse = gradient_flow_check(space, f, p0, t_max, step, mode)?;
    let fine = gradient_flow_check(space, f, p0, t_max, step / 2.0, mode)?;
    if coarse.truncated || fine.truncated {
        return Err(GeomError::Precondition("flow left the chart before t_max".into()));
    }
    Ok(ConvergenceReport {
        step,
        coarse_error: coarse.linearity_error,
        fine_error: fine.linearity_error,
        ratio: coarse.linearity_error / fine.linearity_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{entry, CatalogScalar, FieldId};
    use crate::field::Coordinate;
    use crate::sampling::sample_points;

    fn samples(e: &CatalogEntry, count: usize) -> Vec<Point> {
        sample_points(&e.space, count, 42, &e.region).unwrap()
    }

    #[test]
    fn curvature_identity_on_hyperboloid() {
        let e = entry(FieldId::HypTorqued, 3).unwrap();
        let r = curvature_identity_check(&e.space, &e.field, &samples(&e, 40), 1, 1e-7).unwrap();
        assert!(r.pass && r.as_expected(), "max {}", r.max_residual);
    }

    #[test]
    fn curvature_identity_fails_on_euclidean() {
        let e = entry(FieldId::EuclidPosition, 3).unwrap();
        let r = curvature_identity_check(&e.space, &e.field, &samples(&e, 20), 1, 1e-7).unwrap();
        assert!(!r.pass);
        assert_eq!(r.expectation, Expectation::Fail);
        assert!(r.as_expected());
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn curvature_identity_rejects_twisted() {
        let e = entry(FieldId::TwistedTorqued, 3).unwrap();
        let err = curvature_identity_check(&e.space, &e.field, &samples(&e, 3), 1, 1e-7);
        assert!(matches!(err, Err(GeomError::Precondition(_))));
    }

    #[test]
    fn torqued_obstruction_on_hyperboloid() {
        let e = entry(FieldId::HypTorqued, 3).unwrap();
        let set = torqued_obstruction_check(&e, &samples(&e, 40), &ObstructionTolerances::torqued(), Differentiation::Exact)
            .unwrap();
        for r in set.reports() {
            assert!(r.pass, "{} max {}", r.check_id, r.max_residual);
        }
    }

    #[test]
    fn torqued_obstruction_on_twisted_is_report_only() {
        let e = entry(FieldId::TwistedTorqued, 3).unwrap();
        let set = torqued_obstruction_check(&e, &samples(&e, 20), &ObstructionTolerances::torqued(), Differentiation::Exact)
            .unwrap();
        assert!(set.agreement.pass);
        assert_eq!(set.gradient.expectation, Expectation::ReportOnly);
        assert!(set.reports().iter().all(|r| r.as_expected()));
    }

    #[test]
    fn torqued_check_rejects_non_torqued_entry() {
        let e = entry(FieldId::UhsEn, 3).unwrap();
        let err = torqued_obstruction_check(&e, &samples(&e, 5), &ObstructionTolerances::torqued(), Differentiation::Exact);
        assert!(matches!(err, Err(GeomError::Precondition(_))));
    }

    #[test]
    fn anti_obstruction_for_both_entries() {
        for id in [FieldId::UhsEn, FieldId::HypAntiTorqued] {
            let e = entry(id, 3).unwrap();
            let set = antitorqued_obstruction_check(
                &e,
                &samples(&e, 40),
                &ObstructionTolerances::anti_torqued(),
                Differentiation::Exact,
            )
            .unwrap();
            for r in set.reports() {
                assert!(r.pass, "{id} {} max {}", r.check_id, r.max_residual);
            }
        }
    }

    #[test]
    fn straight_line_flow() {
        let e = ModelSpace::euclidean(3).unwrap();
        let tr = gradient_flow_check(&e, &Coordinate(0), &Point::new(vec![0.0; 3]), 2.0, 1e-3, Differentiation::Exact)
            .unwrap();
        assert!(!tr.truncated);
        assert!(tr.linearity_error < 1e-12);
        let last = tr.points.last().unwrap();
        assert!((last.coords[0] - 2.0).abs() < 1e-12 && last.coords[1] == 0.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn uhs_height_flow_matches_closed_form() {
        // ∇x_3 = x_3² ∂_3, so T = ∂_3 and x_3(t) = 1 + t
        let u = ModelSpace::uhs(3).unwrap();
        let tr = gradient_flow_check(&u, &Coordinate(2), &Point::new(vec![0.0, 0.0, 1.0]), 1.0, 1e-3, Differentiation::Exact)
            .unwrap();
        assert!(tr.linearity_error < 1e-8);
        for (t, p) in tr.times.iter().zip(&tr.points) {
            assert!((p.coords[2] - (1.0 + t)).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperboloid_flow_is_linear_in_f() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let tr = gradient_flow_check(&h, &CatalogScalar::FTorqued, &Point::new(vec![1.0; 3]), 0.5, 1e-3, Differentiation::Exact)
            .unwrap();
        assert!(!tr.truncated);
        assert!(tr.linearity_error < 1e-6, "{}", tr.linearity_error);
    }

    #[test]
    fn critical_point_is_an_error() {
        let e = ModelSpace::euclidean(2).unwrap();
        let err = gradient_flow_check(&e, &CatalogScalar::Constant(1.0), &Point::new(vec![0.0; 2]), 1.0, 0.1, Differentiation::Exact);
        assert!(matches!(err, Err(GeomError::CriticalPoint { .. })));
    }

    #[test]
    fn chart_exit_truncates() {
        // f = −x_2 on uhs(2) gives T = −∂_2, which reaches x_2 = 0 at t = 1
        let u = ModelSpace::uhs(2).unwrap();
        let f = CatalogScalar::Coordinate(1);
        struct Neg(CatalogScalar);
        impl ScalarField for Neg {
            fn value<S: crate::dual::Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
                Ok(-self.0.value(space, x)?)
            }
        }
        let tr = gradient_flow_check(&u, &Neg(f), &Point::new(vec![0.0, 1.0]), 5.0, 0.01, Differentiation::Exact).unwrap();
        assert!(tr.truncated);
        assert!(tr.points.iter().all(|p| u.contains(&p.coords)));
    }
}
