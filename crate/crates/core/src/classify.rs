//! Pointwise and region-wide classification into the torse-forming hierarchy.
//!
//! At a point `p` the equations `∇_{E_a} V = f E_a + ω(E_a) V` over a frame
//! `{E_a}` are `n²` linear equations in the `n + 1` unknowns `(f, ω(E_a))`.
//! They are solved in least squares by Householder QR after weighting each
//! block with the Cholesky factor of the metric, so residuals are measured in
//! the metric norm.
//!
//! Every threshold is applied to a dimensionless quantity. The reference
//! magnitude is the local gradient scale
//! `s = sqrt(Σ_a |∇_{E_a}V|² / Σ_a |E_a|²)`, which equals `|f|` for a
//! concircular field.

use rayon::prelude::*;

use crate::diff::Differentiation;
use crate::error::{GeomError, Result};
use crate::field::{Length, VectorField};
use crate::linalg::{cholesky, least_squares, min_singular_value_normalized, Mat};
use crate::space::ModelSpace;
use crate::tensor::{covariant_jet, differential, metric_at, MetricValue, OneForm, Point};

/// A field counts as vanishing when `|V| ≤ FIELD_ZERO · s`, i.e. when it is
/// negligible against its own local variation.
pub const FIELD_ZERO: f64 = 1e-10;

/// Smallest normalized singular value accepted for the design matrix.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative residual of the torse-forming system.
    pub residual: f64,
    /// Zero test for the normalized `f`, `ω`, `ω(V)` and `ω + fν`.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-8, zero: 1e-7 }
    }
}

/// Class flags of the torse-forming hierarchy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassFlags {
    pub torse_forming: bool,
    pub concircular: bool,
    pub recurrent: bool,
    pub torqued: bool,
    pub anti_torqued: bool,
    pub proper: bool,
    pub parallel: bool,
}

impl ClassFlags {
    pub const ALL_TRUE: ClassFlags = ClassFlags {
        torse_forming: true,
        concircular: true,
        recurrent: true,
        torqued: true,
        anti_torqued: true,
        proper: true,
        parallel: true,
    };

    pub fn and(self, o: ClassFlags) -> ClassFlags {
        ClassFlags {
            torse_forming: self.torse_forming && o.torse_forming,
            concircular: self.concircular && o.concircular,
            recurrent: self.recurrent && o.recurrent,
            torqued: self.torqued && o.torqued,
            anti_torqued: self.anti_torqued && o.anti_torqued,
            proper: self.proper && o.proper,
            parallel: self.parallel && o.parallel,
        }
    }

    /// Implications that must hold between flags.
    pub fn is_consistent(&self) -> bool {
        let implies = |a: bool, b: bool| !a || b;
        implies(self.anti_torqued, self.torse_forming)
            && implies(self.torqued, self.proper)
            && implies(self.proper, self.torse_forming)
            && implies(self.parallel, self.concircular && self.recurrent)
            && implies(self.concircular || self.recurrent, self.torse_forming)
    }

    /// Name of the most specific class.
    pub fn label(&self) -> &'static str {
        if !self.torse_forming {
            "not_torse_forming"
        } else if self.parallel {
            "parallel"
        } else if self.anti_torqued {
            "anti_torqued"
        } else if self.torqued {
            "torqued"
        } else if self.concircular {
            "concircular"
        } else if self.recurrent {
            "recurrent"
        } else if self.proper {
            "proper_torse_forming"
        } else {
            "torse_forming"
        }
    }

    pub fn named(&self) -> [(&'static str, bool); 7] {
        [
            ("torse_forming", self.torse_forming),
            ("concircular", self.concircular),
            ("recurrent", self.recurrent),
            ("torqued", self.torqued),
            ("anti_torqued", self.anti_torqued),
            ("proper", self.proper),
            ("parallel", self.parallel),
        ]
    }
}

/// Pointwise solution of the torse-forming system.
#[derive(Clone, Debug)]
pub struct TorseDecomposition {
    /// Conformal scalar.
    pub f: f64,
    /// Generating form in coordinate components.
    pub omega: OneForm,
    /// Relative least-squares residual, `rms_g(r) / s`.
    pub residual: f64,
    pub rank_ok: bool,
    /// Smallest singular value of the column-normalized design matrix.
    pub min_singular: f64,
    /// Local gradient scale `s`.
    pub scale: f64,
    /// `V(p)` in coordinate components.
    pub field: Vec<f64>,
    pub field_norm: f64,
}

/// Solve the torse-forming system in the coordinate frame.
pub fn decompose_at<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    p: &Point,
    mode: Differentiation,
) -> Result<TorseDecomposition> {
    let n = space.dim();
    let frame: Vec<Vec<f64>> =
        (0..n).map(|a| (0..n).map(|i| if i == a { 1.0 } else { 0.0 }).collect()).collect();
    decompose_in_frame(space, field, p, &frame, mode)
}

/// Solve the torse-forming system in an arbitrary frame `{E_a}` given by
/// coordinate components. `ω` is returned in coordinate components.
pub fn decompose_in_frame<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    p: &Point,
    frame: &[Vec<f64>],
    mode: Differentiation,
) -> Result<TorseDecomposition> {
    let n = space.dim();
    if frame.len() != n || frame.iter().any(|e| e.len() != n) {
        return Err(GeomError::DimensionMismatch { expected: n, got: frame.len() });
    }
    let g = metric_at(space, p)?;
    let cj = covariant_jet(space, field, p, mode)?;
    let v = cj.value;
    let v_norm = g.norm(&v);
    let lt = cholesky(&g.matrix)?.transpose();

    let along = |e: &[f64]| -> Vec<f64> {
        (0..n).map(|k| (0..n).map(|i| e[i] * cj.nabla[(i, k)]).sum()).collect()
    };
    let derivs: Vec<Vec<f64>> = frame.iter().map(|e| along(e)).collect();

    let frame_sq: f64 = frame.iter().map(|e| g.inner(e, e)).sum();
    let deriv_sq: f64 = derivs.iter().map(|d| g.inner(d, d)).sum();
    let scale = (deriv_sq / frame_sq).sqrt();
    if !(v_norm > FIELD_ZERO * scale) || v_norm == 0.0 {
        return Err(GeomError::DegenerateField { coords: p.coords.clone(), norm: v_norm });
    }

    let lv = lt.mul_vec(&v);
    let mut design = Mat::<f64>::zeros(n * n, n + 1);
    let mut rhs = vec![0.0; n * n];
    for (a, (e, d)) in frame.iter().zip(&derivs).enumerate() {
        let le = lt.mul_vec(e);
        let ld = lt.mul_vec(d);
        for k in 0..n {
            let row = a * n + k;
            design[(row, 0)] = le[k];
            design[(row, 1 + a)] = lv[k];
            rhs[row] = ld[k];
        }
    }
    let min_singular = min_singular_value_normalized(&design);
    let rank_ok = min_singular > RANK_TOL;
    let ls = least_squares(&design, &rhs)?;
    let f = ls.solution[0];
    let omega_frame = &ls.solution[1..];

    // ω(E_a) = Σ_i E_a^i ω_i
    let c = Mat::from_fn(n, n, |a, i| frame[a][i]);
    let omega = c.inverse()?.mul_vec(omega_frame);

    let rms = ls.residual / frame_sq.sqrt();
    let residual = if scale > 0.0 { rms / scale } else { rms };
    Ok(TorseDecomposition {
        f,
        omega: OneForm::new(p.clone(), omega),
        residual,
        rank_ok,
        min_singular,
        scale,
        field: v,
        field_norm: v_norm,
    })
}

/// Dimensionless quantities thresholded by [`classify_at`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `|f| / s`
    pub f_rel: f64,
    /// `‖ω‖ |V| / s`
    pub omega_rel: f64,
    /// `|ω(V)| / (‖ω‖ |V|)`
    pub orthogonality: f64,
    /// `‖ω + fν‖ / (‖ω‖ + |f| |V|)`, zero for anti-torqued fields.
    pub anti_alignment: f64,
    /// `‖ω + |V|⁻² f ν‖ / (‖ω‖ + |f| / |V|)`, zero when the generative is parallel to `V`.
    pub parallel_alignment: f64,
    /// Metric norm of `ω`.
    pub omega_norm: f64,
    /// `ω(V)` itself.
    pub omega_v: f64,
}

fn diagnostics(g: &MetricValue, dec: &TorseDecomposition) -> Result<Diagnostics> {
    let s = dec.scale;
    let vn = dec.field_norm;
    let w = &dec.omega.components;
    let wn = g.conorm(w)?;
    let nu = g.lower(&dec.field);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let anti: Vec<f64> = w.iter().zip(&nu).map(|(a, b)| a + dec.f * b).collect();
    let par: Vec<f64> = w.iter().zip(&nu).map(|(a, b)| a + dec.f * b / (vn * vn)).collect();
    let omega_v = dec.omega.apply(&dec.field);
    Ok(Diagnostics {
        f_rel: ratio(dec.f.abs(), s),
        omega_rel: ratio(wn * vn, s),
        orthogonality: ratio(omega_v.abs(), wn * vn),
        anti_alignment: ratio(g.conorm(&anti)?, wn + dec.f.abs() * vn),
        parallel_alignment: ratio(g.conorm(&par)?, wn + dec.f.abs() / vn),
        omega_norm: wn,
        omega_v,
    })
}

fn flags_from(d: &Diagnostics, residual: f64, tol: &Tolerances) -> ClassFlags {
    let torse = residual < tol.residual;
    let f_zero = d.f_rel < tol.zero;
    let w_zero = d.omega_rel < tol.zero;
    let concircular = torse && w_zero;
    let recurrent = torse && f_zero;
    let proper = torse && !f_zero && !w_zero;
    ClassFlags {
        torse_forming: torse,
        concircular,
        recurrent,
        parallel: concircular && recurrent,
        proper,
        torqued: proper && d.orthogonality < tol.zero,
        anti_torqued: torse && !f_zero && d.anti_alignment < tol.zero,
    }
}

#[derive(Clone, Debug)]
pub struct PointVerdict {
    pub point: Point,
    pub decomposition: TorseDecomposition,
    pub diagnostics: Diagnostics,
    pub flags: ClassFlags,
}

pub fn classify_at<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    p: &Point,
    tol: &Tolerances,
    mode: Differentiation,
) -> Result<PointVerdict> {
    let dec = decompose_at(space, field, p, mode)?;
    let g = metric_at(space, p)?;
    let diagnostics = diagnostics(&g, &dec)?;
    let flags = flags_from(&diagnostics, dec.residual, tol);
    Ok(PointVerdict { point: p.clone(), decomposition: dec, diagnostics, flags })
}

/// A sample point where a check failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub coords: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RegionVerdict {
    /// Conjunction of the per-point flags.
    pub flags: ClassFlags,
    pub tolerances: Tolerances,
    pub samples: usize,
    /// Points where the field is not torse-forming or could not be decomposed.
    pub failures: Vec<Witness>,
    pub max_residual: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub abs_f_min: f64,
    pub omega_norm_min: f64,
    pub omega_norm_max: f64,
    pub points: Vec<PointVerdict>,
}

/// Classify every sample point and aggregate in sample order.
pub fn classify_region<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    points: &[Point],
    tol: &Tolerances,
    mode: Differentiation,
) -> Result<RegionVerdict> {
    if points.is_empty() {
        return Err(GeomError::Config("classification needs at least one sample point".into()));
    }
    let results: Vec<Result<PointVerdict>> =
        points.par_iter().map(|p| classify_at(space, field, p, tol, mode)).collect();

    let mut flags = ClassFlags::ALL_TRUE;
    let mut failures = Vec::new();
    let mut verdicts = Vec::with_capacity(points.len());
    let (mut f_min, mut f_max, mut abs_f_min) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let (mut w_min, mut w_max, mut max_residual) = (f64::INFINITY, f64::NEG_INFINITY, 0.0_f64);
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(v) => {
                flags = flags.and(v.flags);
                let d = &v.decomposition;
                f_min = f_min.min(d.f);
                f_max = f_max.max(d.f);
                abs_f_min = abs_f_min.min(d.f.abs());
                w_min = w_min.min(v.diagnostics.omega_norm);
                w_max = w_max.max(v.diagnostics.omega_norm);
                max_residual = max_residual.max(d.residual);
                if !v.flags.torse_forming {
                    failures.push(Witness {
                        coords: p.coords.clone(),
                        reason: format!("residual {:.3e}", d.residual),
                    });
                }
                verdicts.push(v);
            }
            Err(e) => {
                flags = ClassFlags::default();
                max_residual = f64::INFINITY;
                failures.push(Witness { coords: p.coords.clone(), reason: e.to_string() });
            }
        }
    }
    Ok(RegionVerdict {
        flags,
        tolerances: *tol,
        samples: points.len(),
        failures,
        max_residual,
        f_min,
        f_max,
        abs_f_min,
        omega_norm_min: w_min,
        omega_norm_max: w_max,
        points: verdicts,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthReport {
    pub length_constant: bool,
    pub length_min: f64,
    pub length_max: f64,
    /// Largest `‖d|V|‖ / s` over the samples.
    pub max_length_differential: f64,
    pub geodesic: bool,
    /// Largest metric norm of `∇_V V`.
    pub max_geodesic_abs: f64,
    /// Largest `‖∇_V V‖ / (|V| s)`.
    pub max_geodesic_rel: f64,
    pub unit: bool,
}

/// Constant-length, unit and geodesic predicates over sample points.
pub fn length_and_geodesic<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    points: &[Point],
    tol: f64,
    mode: Differentiation,
) -> Result<LengthReport> {
    if points.is_empty() {
        return Err(GeomError::Config("length check needs at least one sample point".into()));
    }
    let per_point: Vec<Result<(f64, f64, f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let g = metric_at(space, p)?;
            let cj = covariant_jet(space, field, p, mode)?;
            let v = &cj.value;
            let len = g.norm(v);
            let n = space.dim();
            let frame_sq: f64 = (0..n).map(|i| g.matrix[(i, i)]).sum();
            let deriv_sq: f64 = (0..n)
                .map(|i| {
                    let row: Vec<f64> = (0..n).map(|k| cj.nabla[(i, k)]).collect();
                    g.inner(&row, &row)
                })
                .sum();
            let s = (deriv_sq / frame_sq).sqrt();
            let vv: Vec<f64> = (0..n).map(|k| (0..n).map(|i| v[i] * cj.nabla[(i, k)]).sum()).collect();
            let geo_abs = g.norm(&vv);
            let dlen = differential(space, &Length(field), p, mode)?;
            let dlen_norm = g.conorm(&dlen.components)?;
            let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
            Ok((len, rel(dlen_norm, s), geo_abs, rel(geo_abs, len * s)))
        })
        .collect();
    let mut rep = LengthReport {
        length_constant: false,
        length_min: f64::INFINITY,
        length_max: f64::NEG_INFINITY,
        max_length_differential: 0.0,
        geodesic: false,
        max_geodesic_abs: 0.0,
        max_geodesic_rel: 0.0,
        unit: false,
    };
    for r in per_point {
        let (len, dlen, geo_abs, geo_rel) = r?;
        rep.length_min = rep.length_min.min(len);
        rep.length_max = rep.length_max.max(len);
        rep.max_length_differential = rep.max_length_differential.max(dlen);
        rep.max_geodesic_abs = rep.max_geodesic_abs.max(geo_abs);
        rep.max_geodesic_rel = rep.max_geodesic_rel.max(geo_rel);
    }
    let spread = (rep.length_max - rep.length_min) / rep.length_max;
    rep.length_constant = spread < tol && rep.max_length_differential < tol;
    rep.geodesic = rep.max_geodesic_rel < tol;
    rep.unit = rep.length_constant && (rep.length_max - 1.0).abs() < tol && (rep.length_min - 1.0).abs() < tol;
    Ok(rep)
}

/// Residual of the anti-torqued form `∇_{∂_i} V = f(∂_i − ν(∂_i) V)`,
/// reconstructed independently of the `(f, ω)` least-squares fit and
/// normalized like [`TorseDecomposition::residual`].
pub fn anti_torqued_residual<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    p: &Point,
    f: f64,
    mode: Differentiation,
) -> Result<f64> {
    let n = space.dim();
    let g = metric_at(space, p)?;
    let cj = covariant_jet(space, field, p, mode)?;
    let v = &cj.value;
    let nu = g.lower(v);
    let (mut res_sq, mut frame_sq, mut deriv_sq) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let d: Vec<f64> = (0..n).map(|k| cj.nabla[(i, k)]).collect();
        let r: Vec<f64> = (0..n)
            .map(|k| {
                let e = if k == i { 1.0 } else { 0.0 };
                d[k] - f * (e - nu[i] * v[k])
            })
            .collect();
        res_sq += g.inner(&r, &r);
        frame_sq += g.matrix[(i, i)];
        deriv_sq += g.inner(&d, &d);
    }
    let s = (deriv_sq / frame_sq).sqrt();
    let rms = (res_sq / frame_sq).sqrt();
    Ok(if s > 0.0 { rms / s } else { rms })
}
