//! Model spaces: chart definitions, embeddings into flat ambient spaces, and
//! the submanifold machinery built on them.
//!
//! Embedded models use graph charts over the last `n` ambient coordinates, so
//! chart coordinate `k` is ambient coordinate `k + 1` and ambient coordinate
//! `0` is the graph height:
//!
//! * hyperboloid: `x_0 = sqrt(1 + |u|²)` in Minkowski space `−dx_0² + Σ dx_i²`;
//! * sphere: `x_0 = ±sqrt(1 − |u|²)` in Euclidean space.

use std::fmt;

use crate::diff::{jet_exact, VectorFunction};
use crate::dual::{seed_direction, to_f64, Scalar};
use crate::error::{GeomError, Result};
use crate::field::VectorField;
use crate::linalg::{dot, least_squares, Mat};
use crate::diff::Differentiation;
use crate::tensor::{covariant_derivative, Point, TangentVector};

/// Largest chart dimension accepted by the constructors.
pub const MAX_DIM: usize = 8;

/// Tangency residual above which a projected vector is rejected.
pub const PROJECTION_TOL: f64 = 1e-8;

/// Relative residual allowed when converting ambient-defined fields, which
/// are tangent by construction.
pub const TANGENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Euclidean,
    /// `(−, +, ..., +)`
    Minkowski,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
    North,
    South,
}

/// Twisting function `λ(s, q)` of a twisted product `I ×_λ R^{n−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Warp {
    /// `λ ≡ 1`, the plain product metric.
    Unit,
    /// `λ = e^s`
    Exponential,
    /// `λ = e^s (1 + q_1²/4)`, which genuinely depends on the fibre.
    Twisted,
}

impl Warp {
    /// `x = (s, q_1, ..., q_{n−1})`
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Warp::Unit => S::one(),
            Warp::Exponential => x[0].exp(),
            Warp::Twisted => x[0].exp() * (S::one() + (x[1] * x[1]).scale(0.25)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Euclidean,
    UpperHalfSpace,
    Sphere(Pole),
    Hyperboloid,
    TwistedProduct(Warp),
}

/// A chart-based Riemannian space of dimension `dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelSpace {
    kind: SpaceKind,
    dim: usize,
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.dim)
    }
}

impl ModelSpace {
    fn new(kind: SpaceKind, dim: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(GeomError::Config(format!(
                "dimension {dim} unsupported (expected 2..={MAX_DIM})"
            )));
        }
        Ok(ModelSpace { kind, dim })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Euclidean, n)
    }

    pub fn uhs(n: usize) -> Result<Self> {
        Self::new(SpaceKind::UpperHalfSpace, n)
    }

    /// Unit `n`-sphere in `R^{n+1}`, northern graph chart.
    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Sphere(Pole::North), n)
    }

    pub fn sphere_chart(n: usize, pole: Pole) -> Result<Self> {
        Self::new(SpaceKind::Sphere(pole), n)
    }

    /// Upper sheet of `⟨P,P⟩ = −1` in Minkowski `(n+1)`-space.
    pub fn hyperboloid(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Hyperboloid, n)
    }

    /// `ds² + λ(s,q)² Σ dq_i²` on `R × R^{n−1}`.
    pub fn twisted_product(n: usize, warp: Warp) -> Result<Self> {
        Self::new(SpaceKind::TwistedProduct(warp), n)
    }

    /// Look a space up by its public name.
    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        match name {
            "euclidean" => Self::euclidean(n),
            "uhs" => Self::uhs(n),
            "sphere" | "sphere-north" => Self::sphere(n),
            "sphere-south" => Self::sphere_chart(n, Pole::South),
            "hyperboloid" => Self::hyperboloid(n),
            "twisted" => Self::twisted_product(n, Warp::Exponential),
            "product" => Self::twisted_product(n, Warp::Unit),
            "twisted-q" => Self::twisted_product(n, Warp::Twisted),
            other => Err(GeomError::Config(format!("unknown space `{other}`"))),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::UpperHalfSpace => "uhs",
            SpaceKind::Sphere(Pole::North) => "sphere-north",
            SpaceKind::Sphere(Pole::South) => "sphere-south",
            SpaceKind::Hyperboloid => "hyperboloid",
            SpaceKind::TwistedProduct(Warp::Unit) => "product",
            SpaceKind::TwistedProduct(Warp::Exponential) => "twisted",
            SpaceKind::TwistedProduct(Warp::Twisted) => "twisted-q",
        }
    }

    /// Constant sectional curvature, when the space is a space form.
    pub fn curvature_constant(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Euclidean | SpaceKind::TwistedProduct(Warp::Unit) => Some(0.0),
            SpaceKind::Sphere(_) => Some(1.0),
            SpaceKind::UpperHalfSpace | SpaceKind::Hyperboloid => Some(-1.0),
            SpaceKind::TwistedProduct(_) => None,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self.kind, SpaceKind::UpperHalfSpace | SpaceKind::Hyperboloid)
    }

    /// Whether the metric is the pullback of a flat ambient metric.
    pub fn is_embedded(&self) -> bool {
        matches!(self.kind, SpaceKind::Sphere(_) | SpaceKind::Hyperboloid)
    }

    /// Ambient signature for spaces with an embedding (Euclidean space counts
    /// as trivially embedded in itself).
    pub fn signature(&self) -> Option<Signature> {
        match self.kind {
            SpaceKind::Euclidean | SpaceKind::Sphere(_) => Some(Signature::Euclidean),
            SpaceKind::Hyperboloid => Some(Signature::Minkowski),
            _ => None,
        }
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Euclidean => Some(self.dim),
            SpaceKind::Sphere(_) | SpaceKind::Hyperboloid => Some(self.dim + 1),
            _ => None,
        }
    }

    /// Chart validity predicate.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            SpaceKind::UpperHalfSpace => x[self.dim - 1] > 0.0,
            SpaceKind::Sphere(_) => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            _ => true,
        }
    }

    pub fn check<S: Scalar>(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let v = to_f64(x);
        if self.contains(&v) {
            Ok(())
        } else {
            Err(GeomError::OutsideChart { space: self.to_string(), coords: v })
        }
    }

    /// Metric components `g_ij(x)`.
    pub fn metric<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        self.check(x)?;
        let n = self.dim;
        match self.kind {
            SpaceKind::Euclidean => Ok(Mat::identity(n)),
            SpaceKind::UpperHalfSpace => {
                let c = x[n - 1].powi(-2);
                Ok(Mat::from_fn(n, n, |i, j| if i == j { c } else { S::zero() }))
            }
            SpaceKind::TwistedProduct(warp) => {
                let l = warp.eval(x);
                let l2 = l * l;
                Ok(Mat::from_fn(n, n, |i, j| match (i, j) {
                    (0, 0) => S::one(),
                    _ if i == j => l2,
                    _ => S::zero(),
                }))
            }
            SpaceKind::Sphere(_) | SpaceKind::Hyperboloid => self.pullback_generic(x),
        }
    }

    /// `J^T η J` from the embedding Jacobian.
    fn pullback_generic<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let j = self.embedding_jacobian(x)?;
        let sig = self.signature().expect("embedded space has a signature");
        let n = self.dim;
        Ok(Mat::from_fn(n, n, |a, b| {
            let col_a: Vec<S> = (0..j.rows).map(|r| j[(r, a)]).collect();
            let col_b: Vec<S> = (0..j.rows).map(|r| j[(r, b)]).collect();
            ambient_inner_with(sig, &col_a, &col_b)
        }))
    }

    /// Ambient image of a chart point.
    pub fn embed<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.check(x)?;
        let r2 = dot(x, x);
        let height = match self.kind {
            SpaceKind::Euclidean => return Ok(x.to_vec()),
            SpaceKind::Hyperboloid => (S::one() + r2).sqrt(),
            SpaceKind::Sphere(pole) => {
                let h = (S::one() - r2).sqrt();
                match pole {
                    Pole::North => h,
                    Pole::South => -h,
                }
            }
            _ => {
                return Err(GeomError::Precondition(format!("{self} has no ambient embedding")))
            }
        };
        let mut out = Vec::with_capacity(self.dim + 1);
        out.push(height);
        out.extend_from_slice(x);
        Ok(out)
    }

    /// `(n+1) × n` matrix `∂ embed^a / ∂x^k`.
    pub fn embedding_jacobian<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let jet = jet_exact(&Embedding(self), x)?;
        let m = jet.value.len();
        let j = Mat::from_fn(m, self.dim, |a, k| jet.partials[k][a]);
        Ok(j)
    }

    pub fn ambient_inner<S: Scalar>(&self, a: &[S], b: &[S]) -> S {
        ambient_inner_with(self.signature().unwrap_or(Signature::Euclidean), a, b)
    }

    /// Unit normal (the position vector) for the curved embedded models.
    pub fn normal<S: Scalar>(&self, x: &[S]) -> Result<Option<Vec<S>>> {
        match self.kind {
            SpaceKind::Sphere(_) | SpaceKind::Hyperboloid => Ok(Some(self.embed(x)?)),
            SpaceKind::Euclidean => Ok(None),
            _ => Err(GeomError::Precondition(format!("{self} has no ambient embedding"))),
        }
    }

    /// Chart components to ambient vector, `J c`.
    pub fn push_forward<S: Scalar>(&self, x: &[S], c: &[S]) -> Result<Vec<S>> {
        Ok(self.embedding_jacobian(x)?.mul_vec(c))
    }

    /// Chart components of a tangent ambient vector by solving `J c = a` in
    /// least squares. Returns the components and the relative residual
    /// `‖J c − a‖ / ‖a‖`.
    pub fn ambient_to_chart<S: Scalar>(&self, x: &[S], a: &[S]) -> Result<(Vec<S>, f64)> {
        let j = self.embedding_jacobian(x)?;
        let ls = least_squares(&j, a).map_err(|_| GeomError::ChartDegeneracy { coords: to_f64(x) })?;
        let scale = to_f64(a).iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = if scale > 0.0 { ls.residual / scale } else { ls.residual };
        Ok((ls.solution, rel))
    }
}

pub fn ambient_inner_with<S: Scalar>(sig: Signature, a: &[S], b: &[S]) -> S {
    let mut acc = dot(a, b);
    if sig == Signature::Minkowski {
        let t = a[0] * b[0];
        acc -= t + t;
    }
    acc
}

struct Embedding<'a>(&'a ModelSpace);

impl VectorFunction for Embedding<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.0.embed(x)
    }
}

/// A vector in the flat ambient space of an embedded model.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientVector {
    pub coords: Vec<f64>,
}

impl AmbientVector {
    pub fn new(coords: Vec<f64>) -> Self {
        AmbientVector { coords }
    }

    /// Ambient basis vector `∂_{k}` (0-based ambient index).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[k] = 1.0;
        AmbientVector { coords }
    }
}

/// Induced metric `J^T η J` of an embedded space.
pub fn pullback_metric(space: &ModelSpace, p: &Point) -> Result<Mat<f64>> {
    if space.signature().is_none() {
        return Err(GeomError::Precondition(format!("{space} is not embedded")));
    }
    let j = space.embedding_jacobian(&p.coords)?;
    let jt_j = j.transpose().matmul(&j);
    if crate::linalg::min_singular_value_normalized(&jt_j) < 1e-12 {
        return Err(GeomError::ChartDegeneracy { coords: p.coords.clone() });
    }
    match space.kind() {
        SpaceKind::Euclidean => Ok(Mat::identity(space.dim())),
        _ => space.pullback_generic(&p.coords),
    }
}

/// Tangential part of an ambient vector, as chart components.
///
/// Uses `A − ⟨A,Φ⟩Φ / ⟨Φ,Φ⟩`, which is `A + ⟨A,Φ⟩Φ` on the hyperboloid and
/// `A − ⟨A,Φ⟩Φ` on the sphere.
pub fn tangential_projection(
    space: &ModelSpace,
    a: &AmbientVector,
    p: &Point,
) -> Result<TangentVector> {
    let ambient_dim = space
        .ambient_dim()
        .ok_or_else(|| GeomError::Precondition(format!("{space} is not embedded")))?;
    if a.coords.len() != ambient_dim {
        return Err(GeomError::DimensionMismatch { expected: ambient_dim, got: a.coords.len() });
    }
    let tangential = match space.normal(&p.coords)? {
        Some(phi) => {
            let c = space.ambient_inner(&a.coords, &phi) / space.ambient_inner(&phi, &phi);
            a.coords.iter().zip(&phi).map(|(x, n)| x - c * n).collect::<Vec<_>>()
        }
        None => a.coords.clone(),
    };
    let (components, residual) = space.ambient_to_chart(&p.coords, &tangential)?;
    if residual > PROJECTION_TOL {
        return Err(GeomError::NotTangent { residual });
    }
    Ok(TangentVector::new(p.clone(), components))
}

struct PushedField<'a, Y> {
    space: &'a ModelSpace,
    field: &'a Y,
}

impl<Y: VectorField> VectorFunction for PushedField<'_, Y> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let c = self.field.components(self.space, x)?;
        self.space.push_forward(x, &c)
    }
}

/// Residual of the Gauss formula `∇⁰_X Y = ∇_X Y + h(X,Y)` with
/// `h(X,Y) = −⟨X,Y⟩Φ/⟨Φ,Φ⟩` at `p`, measured in the Euclidean norm of
/// ambient components.
pub fn gauss_consistency<X: VectorField, Y: VectorField>(
    space: &ModelSpace,
    x_field: &X,
    y_field: &Y,
    p: &Point,
) -> Result<f64> {
    if space.signature().is_none() {
        return Err(GeomError::Precondition(format!(
            "{space} is not embedded; Gauss formula needs an ambient space"
        )));
    }
    let x = x_field.components(space, &p.coords)?;
    let y = y_field.components(space, &p.coords)?;

    // flat ambient derivative of J·Y along X
    let dual_pt = seed_direction(&p.coords, &x);
    let pushed = PushedField { space, field: y_field }.eval(&dual_pt)?;
    let ambient_deriv: Vec<f64> = pushed.iter().map(|d| d.eps).collect();

    let cov = covariant_derivative(space, &x, y_field, p, Differentiation::Exact)?;
    let cov_ambient = space.push_forward(&p.coords, &cov.components)?;

    let second = match space.normal(&p.coords)? {
        Some(phi) => {
            let g = space.metric(&p.coords)?;
            let c = -g.bilinear(&x, &y) / space.ambient_inner(&phi, &phi);
            phi.iter().map(|v| c * v).collect()
        }
        None => vec![0.0; cov_ambient.len()],
    };
    Ok(ambient_deriv
        .iter()
        .zip(&cov_ambient)
        .zip(&second)
        .map(|((d, c), h)| (d - c - h).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CoordinateField;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    #[test]
    fn hyperboloid_embedding_lies_on_sheet() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let p = h.embed(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p, vec![2.0, 1.0, 1.0, 1.0]);
        assert_relative_eq!(h.ambient_inner(&p, &p), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn uhs_rejects_lower_half() {
        let u = ModelSpace::uhs(3).unwrap();
        assert!(!u.contains(&[0.0, 0.0, -1.0]));
        assert!(matches!(u.metric(&[0.0, 0.0, -1.0]), Err(GeomError::OutsideChart { .. })));
        assert!(matches!(u.metric(&[0.0, 1.0]), Err(GeomError::DimensionMismatch { .. })));
    }

    #[test]
    fn unsupported_dimension_is_config_error() {
        assert!(matches!(ModelSpace::uhs(1), Err(GeomError::Config(_))));
        assert!(matches!(ModelSpace::euclidean(9), Err(GeomError::Config(_))));
        assert!(matches!(ModelSpace::by_name("torus", 3), Err(GeomError::Config(_))));
    }

    #[test]
    fn product_metric_is_identity() {
        let t = ModelSpace::twisted_product(3, Warp::Unit).unwrap();
        let g = t.metric(&[0.3, -1.2, 2.0]).unwrap();
        assert_eq!(g, Mat::identity(3));
    }

    #[test]
    fn pullback_at_vertex_and_pole_is_identity() {
        let s = ModelSpace::sphere(2).unwrap();
        let g = pullback_metric(&s, &pt(&[0.0, 0.0])).unwrap();
        assert_eq!(g, Mat::identity(2));
        let h = ModelSpace::hyperboloid(3).unwrap();
        let g = pullback_metric(&h, &pt(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(g, Mat::identity(3));
    }

    #[test]
    fn hyperboloid_pullback_closed_form() {
        // g_ij = δ_ij − u_i u_j / (1 + |u|²): 3/4 on the diagonal, −1/4 off it
        let h = ModelSpace::hyperboloid(3).unwrap();
        let g = pullback_metric(&h, &pt(&[1.0, 1.0, 1.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.75 } else { -0.25 };
                assert_relative_eq!(g[(i, j)], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hyperboloid_pullback_matches_finite_difference_oracle() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let u = [0.4, -1.1, 2.3];
        let step = 1e-6;
        let mut jac = vec![vec![0.0; 3]; 4];
        for k in 0..3 {
            let mut up = u;
            let mut um = u;
            up[k] += step;
            um[k] -= step;
            let a = h.embed(&up).unwrap();
            let b = h.embed(&um).unwrap();
            for r in 0..4 {
                jac[r][k] = (a[r] - b[r]) / (2.0 * step);
            }
        }
        let g = pullback_metric(&h, &pt(&u)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let oracle = -jac[0][i] * jac[0][j] + (1..4).map(|r| jac[r][i] * jac[r][j]).sum::<f64>();
                assert_relative_eq!(g[(i, j)], oracle, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn projection_of_spacelike_basis_vector() {
        let h = ModelSpace::hyperboloid(3).unwrap();
        let p = pt(&[1.0, 1.0, 1.0]);
        let t = tangential_projection(&h, &AmbientVector::basis(4, 1), &p).unwrap();
        let amb = h.push_forward(&p.coords, &t.components).unwrap();
        let expected = [2.0, 2.0, 1.0, 1.0];
        for (a, e) in amb.iter().zip(expected) {
            assert_relative_eq!(*a, e, epsilon = 1e-13);
        }
        let phi = h.embed(&p.coords).unwrap();
        assert!(h.ambient_inner(&amb, &phi).abs() < 1e-13);
    }

    #[test]
    fn projection_of_normal_vanishes() {
        for space in [ModelSpace::hyperboloid(3).unwrap(), ModelSpace::sphere(2).unwrap()] {
            let p = if space.kind() == SpaceKind::Hyperboloid {
                pt(&[0.3, -0.7, 1.9])
            } else {
                pt(&[0.3, -0.5])
            };
            let phi = AmbientVector::new(space.embed(&p.coords).unwrap());
            let t = tangential_projection(&space, &phi, &p).unwrap();
            assert!(t.components.iter().all(|c| c.abs() < 1e-14), "{space}: {:?}", t.components);
        }
    }

    #[test]
    fn gauss_formula_on_euclidean_is_exact() {
        let e = ModelSpace::euclidean(3).unwrap();
        let r = gauss_consistency(&e, &CoordinateField(0), &CoordinateField(2), &pt(&[1.0, 2.0, 3.0]))
            .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn gauss_formula_needs_embedding() {
        let u = ModelSpace::uhs(3).unwrap();
        let r = gauss_consistency(&u, &CoordinateField(0), &CoordinateField(1), &pt(&[0.0, 0.0, 1.0]));
        assert!(matches!(r, Err(GeomError::Precondition(_))));
    }
}
