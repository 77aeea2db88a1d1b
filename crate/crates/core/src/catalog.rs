//! Closed-form vector fields, scalar fields and one-forms with their expected
//! classification.
//!
//! Ambient coordinates below are 0-based: `x[0]` is the graph height (the
//! time-like coordinate on the hyperboloid), and chart coordinate `k` is
//! ambient coordinate `k + 1`. In 1-based notation the hyperboloid torqued
//! example therefore reads `V = e^{x_1/x_{n+1}} (∂_2 + x_2 Φ)`.

use std::fmt;
use std::str::FromStr;

use crate::classify::ClassFlags;
use crate::dual::{seed, Scalar};
use crate::error::{GeomError, Result};
use crate::field::{OneFormField, ScalarField, VectorField};
use crate::sampling::{SampleRegion, EXCLUSION_MARGIN};
use crate::space::{ModelSpace, Pole, SpaceKind, Warp, TANGENCY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldId {
    UhsEn,
    HypTorqued,
    HypAntiTorqued,
    EuclidPosition,
    SphereTorse,
    TwistedTorqued,
    Rot2d,
}

impl FieldId {
    pub const ALL: [FieldId; 7] = [
        FieldId::UhsEn,
        FieldId::HypTorqued,
        FieldId::HypAntiTorqued,
        FieldId::EuclidPosition,
        FieldId::SphereTorse,
        FieldId::TwistedTorqued,
        FieldId::Rot2d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FieldId::UhsEn => "uhs_en",
            FieldId::HypTorqued => "hyp_torqued",
            FieldId::HypAntiTorqued => "hyp_antitorqued",
            FieldId::EuclidPosition => "euclid_position",
            FieldId::SphereTorse => "sphere_torse",
            FieldId::TwistedTorqued => "twisted_torqued",
            FieldId::Rot2d => "rot2d",
        }
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldId {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        FieldId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| GeomError::Config(format!("unknown catalog field `{s}`")))
    }
}

/// `μ(q) = 1 + sin(q_1)/4`, the fibre factor of the twisted-product field.
fn twisted_mu<S: Scalar>(x: &[S]) -> S {
    S::one() + x[1].sin().scale(0.25)
}

fn warp_of(space: &ModelSpace) -> Result<Warp> {
    match space.kind() {
        SpaceKind::TwistedProduct(w) => Ok(w),
        _ => Err(GeomError::Precondition(format!("{space} is not a twisted product"))),
    }
}

fn require(space: &ModelSpace, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(GeomError::Precondition(format!("{what} is not defined on {space}")))
    }
}

fn outside(id: FieldId, x: &[impl Scalar]) -> GeomError {
    GeomError::OutsideDomain { field: id.to_string(), coords: x.iter().map(Scalar::value).collect() }
}

/// Convert an ambient-defined field to chart components, asserting tangency.
fn ambient_field<S: Scalar>(space: &ModelSpace, x: &[S], ambient: &[S]) -> Result<Vec<S>> {
    let (c, residual) = space.ambient_to_chart(x, ambient)?;
    if residual > TANGENCY_TOL {
        return Err(GeomError::NotTangent { residual });
    }
    Ok(c)
}

/// A catalog vector field, evaluable on any model space it is defined on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatalogField(pub FieldId);

impl VectorField for CatalogField {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        let id = self.0;
        let n = space.dim();
        match id {
            FieldId::UhsEn => {
                require(space, space.kind() == SpaceKind::UpperHalfSpace, "uhs_en")?;
                space.check(x)?;
                let mut v = vec![S::zero(); n];
                v[n - 1] = -x[n - 1];
                Ok(v)
            }
            FieldId::EuclidPosition => {
                require(space, space.kind() == SpaceKind::Euclidean, "euclid_position")?;
                space.check(x)?;
                Ok(x.to_vec())
            }
            FieldId::Rot2d => {
                require(space, space.kind() == SpaceKind::Euclidean && n == 2, "rot2d")?;
                space.check(x)?;
                Ok(vec![-x[1], x[0]])
            }
            FieldId::HypTorqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "hyp_torqued")?;
                let phi = space.embed(x)?;
                if phi[1].value() == 0.0 || phi[n].value() == 0.0 {
                    return Err(outside(id, x));
                }
                // T = P0 + ⟨P0,Φ⟩Φ with P0 = ∂ along ambient axis 1; ⟨P0,Φ⟩ = x^1
                let weight = (phi[0] / phi[n]).exp();
                let amb: Vec<S> = phi
                    .iter()
                    .enumerate()
                    .map(|(a, &p)| {
                        let p0 = if a == 1 { S::one() } else { S::zero() };
                        weight * (p0 + phi[1] * p)
                    })
                    .collect();
                ambient_field(space, x, &amb)
            }
            FieldId::HypAntiTorqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "hyp_antitorqued")?;
                let phi = space.embed(x)?;
                if phi[n].value() == 0.0 {
                    return Err(outside(id, x));
                }
                let inv = phi[n].recip();
                let amb: Vec<S> = phi
                    .iter()
                    .enumerate()
                    .map(|(a, &p)| {
                        let p0 = if a == n { S::one() } else { S::zero() };
                        inv * (p0 + phi[n] * p)
                    })
                    .collect();
                ambient_field(space, x, &amb)
            }
            FieldId::SphereTorse => {
                require(space, matches!(space.kind(), SpaceKind::Sphere(_)), "sphere_torse")?;
                let phi = space.embed(x)?;
                let weight = (-phi[0]).exp();
                let amb: Vec<S> = phi
                    .iter()
                    .enumerate()
                    .map(|(a, &p)| {
                        let e1 = if a == 0 { S::one() } else { S::zero() };
                        weight * (e1 - phi[0] * p)
                    })
                    .collect();
                ambient_field(space, x, &amb)
            }
            FieldId::TwistedTorqued => {
                let warp = warp_of(space)?;
                space.check(x)?;
                let mut v = vec![S::zero(); n];
                v[0] = warp.eval(x) * twisted_mu(x);
                Ok(v)
            }
        }
    }
}

/// Catalog scalar fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogScalar {
    /// `g = x_1/x_{n+1}` on the hyperboloid.
    GTorqued,
    /// `f = x_2 e^{x_1/x_{n+1}}`, the conformal scalar of `hyp_torqued`.
    FTorqued,
    /// `f = −x_1 e^{−x_1}`, the conformal scalar of `sphere_torse`.
    FSphere,
    /// `f = μ ∂_s λ`, the conformal scalar of `twisted_torqued`.
    FTwisted,
    Constant(f64),
    /// Chart coordinate, 0-based.
    Coordinate(usize),
    /// Ambient coordinate restricted to an embedded space, 0-based.
    Ambient(usize),
}

impl CatalogScalar {
    /// Names: `g_torqued`, `f_torqued`, `f_sphere`, `f_twisted`, `one`,
    /// `x<k>` (1-based chart coordinate), `ambient<k>` (1-based ambient coordinate).
    pub fn by_name(name: &str) -> Result<Self> {
        let bad = || GeomError::Config(format!("unknown scalar field `{name}`"));
        let index = |rest: &str| -> Result<usize> {
            match rest.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(bad()),
            }
        };
        match name {
            "g_torqued" => Ok(CatalogScalar::GTorqued),
            "f_torqued" => Ok(CatalogScalar::FTorqued),
            "f_sphere" => Ok(CatalogScalar::FSphere),
            "f_twisted" => Ok(CatalogScalar::FTwisted),
            "one" => Ok(CatalogScalar::Constant(1.0)),
            _ => {
                if let Some(rest) = name.strip_prefix("ambient") {
                    Ok(CatalogScalar::Ambient(index(rest)?))
                } else if let Some(rest) = name.strip_prefix('x') {
                    Ok(CatalogScalar::Coordinate(index(rest)?))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl ScalarField for CatalogScalar {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        let n = space.dim();
        match *self {
            CatalogScalar::GTorqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "g_torqued")?;
                let phi = space.embed(x)?;
                Ok(phi[0] / phi[n])
            }
            CatalogScalar::FTorqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "f_torqued")?;
                let phi = space.embed(x)?;
                Ok(phi[1] * (phi[0] / phi[n]).exp())
            }
            CatalogScalar::FSphere => {
                let phi = space.embed(x)?;
                Ok(-(phi[0] * (-phi[0]).exp()))
            }
            CatalogScalar::FTwisted => {
                let warp = warp_of(space)?;
                space.check(x)?;
                let ds_lambda = warp.eval(&seed(x, 0)).eps;
                Ok(twisted_mu(x) * ds_lambda)
            }
            CatalogScalar::Constant(c) => {
                space.check(x)?;
                Ok(S::from_f64(c))
            }
            CatalogScalar::Coordinate(k) => {
                space.check(x)?;
                x.get(k).copied().ok_or(GeomError::DimensionMismatch { expected: k + 1, got: n })
            }
            CatalogScalar::Ambient(k) => {
                let phi = space.embed(x)?;
                phi.get(k).copied().ok_or(GeomError::DimensionMismatch { expected: k + 1, got: phi.len() })
            }
        }
    }
}

/// Generating forms `ω` of the catalog fields, written in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogForm {
    Zero,
    /// `(1/x_{n+1}) dx_1 − (x_1/x_{n+1}²) dx_{n+1}` pulled back to the hyperboloid.
    Torqued,
    /// `(1/x_n) dx_n` on the upper half-space, i.e. `−ν` for `e_n`.
    UhsEn,
    /// `−(1/x_{n+1}) dx_{n+1}` pulled back to the hyperboloid.
    HypAntiTorqued,
    /// `−dx_1` pulled back to the sphere.
    Sphere,
    /// `d_q log(λμ)` on the twisted product (no `ds` component).
    Twisted,
}

impl OneFormField for CatalogForm {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        let n = space.dim();
        // pull back an ambient covector a_A dx^A through the embedding
        let pull = |coeffs: &dyn Fn(&[S]) -> Vec<(usize, S)>| -> Result<Vec<S>> {
            let phi = space.embed(x)?;
            let j = space.embedding_jacobian(x)?;
            let terms = coeffs(&phi);
            Ok((0..n)
                .map(|k| {
                    let mut acc = S::zero();
                    for &(a, c) in &terms {
                        acc += c * j[(a, k)];
                    }
                    acc
                })
                .collect())
        };
        match self {
            CatalogForm::Zero => {
                space.check(x)?;
                Ok(vec![S::zero(); n])
            }
            CatalogForm::Torqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "torqued generating form")?;
                pull(&|phi| {
                    let inv = phi[n].recip();
                    vec![(0, inv), (n, -(phi[0] * inv * inv))]
                })
            }
            CatalogForm::HypAntiTorqued => {
                require(space, space.kind() == SpaceKind::Hyperboloid, "anti-torqued generating form")?;
                pull(&|phi| vec![(n, -phi[n].recip())])
            }
            CatalogForm::Sphere => {
                require(space, matches!(space.kind(), SpaceKind::Sphere(_)), "sphere generating form")?;
                pull(&|_| vec![(0, -S::one())])
            }
            CatalogForm::UhsEn => {
                require(space, space.kind() == SpaceKind::UpperHalfSpace, "uhs generating form")?;
                space.check(x)?;
                let mut w = vec![S::zero(); n];
                w[n - 1] = x[n - 1].recip();
                Ok(w)
            }
            CatalogForm::Twisted => {
                let warp = warp_of(space)?;
                space.check(x)?;
                let mut w = vec![S::zero(); n];
                for (a, slot) in w.iter_mut().enumerate().skip(1) {
                    let xs = seed(x, a);
                    *slot = (warp.eval(&xs) * twisted_mu(&xs)).ln().eps;
                }
                Ok(w)
            }
        }
    }
}

fn proper_torse() -> ClassFlags {
    ClassFlags { torse_forming: true, proper: true, ..Default::default() }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: FieldId,
    pub space: ModelSpace,
    pub field: CatalogField,
    pub expected: ClassFlags,
    pub expected_f: Option<CatalogScalar>,
    pub expected_omega: Option<CatalogForm>,
    pub region: SampleRegion,
    pub domain_note: &'static str,
}

impl CatalogEntry {
    /// Every chart the entry should be sampled on.
    pub fn charts(&self) -> Vec<ModelSpace> {
        match self.space.kind() {
            SpaceKind::Sphere(_) => [Pole::North, Pole::South]
                .into_iter()
                .map(|p| ModelSpace::sphere_chart(self.space.dim(), p).expect("dimension already validated"))
                .collect(),
            _ => vec![self.space],
        }
    }
}

/// Catalog entry `id` on the `n`-dimensional version of its space. `rot2d` is
/// only defined in dimension 2 and ignores `n`.
pub fn entry(id: FieldId, n: usize) -> Result<CatalogEntry> {
    let field = CatalogField(id);
    let e = match id {
        FieldId::UhsEn => {
            let space = ModelSpace::uhs(n)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags { anti_torqued: true, ..proper_torse() },
                expected_f: Some(CatalogScalar::Constant(1.0)),
                expected_omega: Some(CatalogForm::UhsEn),
                region: SampleRegion::default_for(&space),
                domain_note: "whole upper half-space x_n > 0",
            }
        }
        FieldId::HypTorqued => {
            let space = ModelSpace::hyperboloid(n)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags { torqued: true, ..proper_torse() },
                expected_f: Some(CatalogScalar::FTorqued),
                expected_omega: Some(CatalogForm::Torqued),
                region: SampleRegion::default_for(&space)
                    .exclude(0, EXCLUSION_MARGIN)
                    .exclude(n - 1, EXCLUSION_MARGIN),
                domain_note: "x_1 x_2 x_{n+1} != 0 and x_1 != x_{n+1} (|x_2|, |x_{n+1}| >= 0.05 when sampling)",
            }
        }
        FieldId::HypAntiTorqued => {
            let space = ModelSpace::hyperboloid(n)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags { anti_torqued: true, ..proper_torse() },
                expected_f: Some(CatalogScalar::Constant(1.0)),
                expected_omega: Some(CatalogForm::HypAntiTorqued),
                region: SampleRegion::default_for(&space).exclude(n - 1, EXCLUSION_MARGIN),
                domain_note: "x_{n+1} != 0 (|x_{n+1}| >= 0.05 when sampling)",
            }
        }
        FieldId::EuclidPosition => {
            let space = ModelSpace::euclidean(n)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags { torse_forming: true, concircular: true, ..Default::default() },
                expected_f: Some(CatalogScalar::Constant(1.0)),
                expected_omega: Some(CatalogForm::Zero),
                region: SampleRegion::default_for(&space).without_ball(0.1),
                domain_note: "R^n minus the origin (|x| >= 0.1 when sampling)",
            }
        }
        FieldId::SphereTorse => {
            let space = ModelSpace::sphere(n)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: proper_torse(),
                expected_f: Some(CatalogScalar::FSphere),
                expected_omega: Some(CatalogForm::Sphere),
                region: SampleRegion::default_for(&space),
                domain_note: "both graph charts, equator band |x_1| < 0.1 avoided",
            }
        }
        FieldId::TwistedTorqued => {
            let space = ModelSpace::twisted_product(n, Warp::Exponential)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags { torqued: true, ..proper_torse() },
                expected_f: Some(CatalogScalar::FTwisted),
                expected_omega: Some(CatalogForm::Twisted),
                region: SampleRegion::default_for(&space),
                domain_note: "lambda = e^s, mu = 1 + sin(q_1)/4, s and q in [-1, 1]",
            }
        }
        FieldId::Rot2d => {
            let space = ModelSpace::euclidean(2)?;
            CatalogEntry {
                id,
                space,
                field,
                expected: ClassFlags::default(),
                expected_f: None,
                expected_omega: None,
                region: SampleRegion::default_for(&space).without_ball(0.1),
                domain_note: "R^2 minus the origin (|x| >= 0.1 when sampling)",
            }
        }
    };
    Ok(e)
}

pub fn entry_by_name(name: &str, n: usize) -> Result<CatalogEntry> {
    entry(name.parse()?, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Differential;
    use crate::sampling::sample_points;
    use crate::diff::Differentiation;
    use crate::tensor::{covariant_jet, metric_at, Point};
    use approx::assert_relative_eq;

    #[test]
    fn scalar_values_at_reference_point() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let u = [1.0, 1.0, 1.0];
        let f: f64 = CatalogScalar::FTorqued.value(&h, &u).unwrap();
        assert_relative_eq!(f, 2.0_f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(f, 7.389_056_1, epsilon = 1e-7);
        let g: f64 = CatalogScalar::GTorqued.value(&h, &u).unwrap();
        assert_eq!(g, 2.0);
        let e = ModelSpace::uhs(3).unwrap();
        let x: f64 = CatalogScalar::by_name("x3").unwrap().value(&e, &[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(x, 2.0);
        assert!(CatalogScalar::by_name("x0").is_err());
        assert!(CatalogScalar::by_name("nosuch").is_err());
    }

    #[test]
    fn unknown_field_is_config_error() {
        assert!(matches!(entry_by_name("nosuch", 3), Err(GeomError::Config(_))));
        for id in FieldId::ALL {
            assert_eq!(id.as_str().parse::<FieldId>().unwrap(), id);
        }
    }

    #[test]
    fn fields_are_nowhere_zero_on_samples() {
        for id in FieldId::ALL {
            for n in [2, 3, 4] {
                let e = entry(id, n).unwrap();
                for chart in e.charts() {
                    for p in sample_points(&chart, 60, 3, &e.region).unwrap() {
                        let cj = covariant_jet(&chart, &e.field, &p, Differentiation::Exact).unwrap();
                        let g = metric_at(&chart, &p).unwrap();
                        let len = g.norm(&cj.value);
                        let frame: f64 = (0..chart.dim()).map(|i| g.matrix[(i, i)]).sum();
                        let grad: f64 = (0..chart.dim())
                            .map(|i| {
                                let row: Vec<f64> = (0..chart.dim()).map(|k| cj.nabla[(i, k)]).collect();
                                g.inner(&row, &row)
                            })
                            .sum();
                        let scale = (grad / frame).sqrt();
                        assert!(len > 0.0 && len > 1e-10 * scale, "{id} vanishes at {:?}", p.coords);
                    }
                }
            }
        }
    }

    #[test]
    fn hyperboloid_torqued_excluded_set_is_an_error() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let r: Result<Vec<f64>> = CatalogField(FieldId::HypTorqued).components(&h, &[0.5, 1.0, 0.0]);
        assert!(matches!(r, Err(GeomError::OutsideDomain { .. })));
    }

    #[test]
    fn hyperboloid_sheet_dominates_last_coordinate() {
        // x_1 > |x_{n+1}| on the upper sheet, so x_1 != x_{n+1} is automatic.
        let e = entry(FieldId::HypTorqued, 4).unwrap();
        for p in sample_points(&e.space, 200, 11, &e.region).unwrap() {
            let phi = e.space.embed(&p.coords).unwrap();
            assert!(phi[0] >= 1.0 && phi[0] > phi[4].abs());
            assert_relative_eq!(e.space.ambient_inner(&phi, &phi), -1.0, epsilon = 1e-12 * phi[0] * phi[0]);
        }
    }

    #[test]
    fn torqued_form_is_differential_of_g() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let p = Point::new(vec![0.7, -0.4, 1.3]);
        let w: Vec<f64> = CatalogForm::Torqued.components(&h, &p.coords).unwrap();
        let dg: Vec<f64> = Differential(CatalogScalar::GTorqued).components(&h, &p.coords).unwrap();
        for (a, b) in w.iter().zip(&dg) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn sphere_form_is_minus_differential_of_height() {
        let s = ModelSpace::sphere(3).unwrap();
        let x = [0.2, -0.3, 0.1];
        let w: Vec<f64> = CatalogForm::Sphere.components(&s, &x).unwrap();
        let dh: Vec<f64> = Differential(CatalogScalar::Ambient(0)).components(&s, &x).unwrap();
        for (a, b) in w.iter().zip(&dh) {
            assert_relative_eq!(*a, -b, epsilon = 1e-14);
        }
    }
}
