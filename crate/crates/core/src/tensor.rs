//! Chart-level tensor calculus: metric, Levi-Civita connection, curvature,
//! gradients, exterior derivatives and the musical isomorphisms.
//!
//! Christoffel symbols use `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`
//! with metric partials from [`Differentiation`]. The curvature convention is
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so that
//! `K(x,y) = ⟨R(x,y)y, x⟩ / (⟨x,x⟩⟨y,y⟩ − ⟨x,y⟩²)` is `+1` on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diff::{jet, jet_exact, Differentiation, Jet, VectorFunction};
use crate::dual::Scalar;
use crate::error::{GeomError, Result};
use crate::field::{FieldFn, FormFn, OneFormField, ScalarField, ScalarFn, VectorField};
use crate::linalg::{dot, Mat};
use crate::space::ModelSpace;

/// Relative Gram-determinant threshold below which a plane is degenerate.
pub const PLANE_DEGENERACY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Self {
        TangentVector { base, components }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub base: Point,
    pub components: Vec<f64>,
}

impl OneForm {
    pub fn new(base: Point, components: Vec<f64>) -> Self {
        OneForm { base, components }
    }

    /// Pairing with a tangent vector is the plain component dot product.
    pub fn apply(&self, v: &[f64]) -> f64 {
        dot(&self.components, v)
    }
}

/// Metric components `g_ij` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricValue {
    pub matrix: Mat<f64>,
}

impl MetricValue {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.bilinear(u, v)
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(v)
    }

    pub fn inverse(&self) -> Result<Mat<f64>> {
        self.matrix.inverse()
    }

    /// Metric norm of a covector, `sqrt(g^{ij} w_i w_j)`.
    pub fn conorm(&self, w: &[f64]) -> Result<f64> {
        Ok(self.inverse()?.bilinear(w, w).max(0.0).sqrt())
    }
}

/// `Γ^k_ij`, stored as `symbols[k·n² + i·n + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelValue {
    pub dim: usize,
    pub symbols: Vec<f64>,
}

impl ChristoffelValue {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.symbols[k * n * n + i * n + j]
    }
}

/// `R^l_kij` with `R(∂_i, ∂_j)∂_k = R^l_kij ∂_l`, stored as
/// `components[((l·n + k)·n + i)·n + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannValue {
    pub dim: usize,
    pub components: Vec<f64>,
}

impl RiemannValue {
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.components[((l * n + k) * n + i) * n + j]
    }

    /// `R(X,Y)Z`
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (l, o) in out.iter_mut().enumerate() {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        *o += self.get(l, k, i, j) * x[i] * y[j] * z[k];
                    }
                }
            }
        }
        out
    }
}

pub fn metric_at(space: &ModelSpace, p: &Point) -> Result<MetricValue> {
    Ok(MetricValue { matrix: space.metric(&p.coords)? })
}

struct MetricFn<'a>(&'a ModelSpace);

impl VectorFunction for MetricFn<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.0.metric(x)?.data)
    }
}

struct ChristoffelFn<'a>(&'a ModelSpace);

impl VectorFunction for ChristoffelFn<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        christoffel_generic(self.0, x)
    }
}

fn christoffel_from_metric_jet<S: Scalar>(n: usize, jet: &Jet<S>) -> Result<Vec<S>> {
    let g = Mat { rows: n, cols: n, data: jet.value.clone() };
    let ginv = g.inverse()?;
    let dg = |l: usize, i: usize, j: usize| jet.partials[l][i * n + j];
    let half = S::from_f64(0.5);
    let mut out = vec![S::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = S::zero();
                for l in 0..n {
                    acc += ginv[(k, l)] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                }
                let v = acc * half;
                out[k * n * n + i * n + j] = v;
                out[k * n * n + j * n + i] = v;
            }
        }
    }
    Ok(out)
}

/// Flattened Christoffel symbols at a possibly perturbed point.
pub fn christoffel_generic<S: Scalar>(space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
    let jet = jet_exact(&MetricFn(space), x)?;
    christoffel_from_metric_jet(space.dim(), &jet)
}

pub fn christoffel_at(
    space: &ModelSpace,
    p: &Point,
    mode: Differentiation,
) -> Result<ChristoffelValue> {
    let n = space.dim();
    space.check(&p.coords)?;
    let jet = jet(&MetricFn(space), &p.coords, mode)?;
    Ok(ChristoffelValue { dim: n, symbols: christoffel_from_metric_jet(n, &jet)? })
}

/// Value and full covariant derivative of a field at a point.
#[derive(Clone, Debug)]
pub struct CovariantJet {
    pub value: Vec<f64>,
    /// `nabla[(i, k)] = (∇_{∂_i} V)^k`
    pub nabla: Mat<f64>,
}

pub fn covariant_jet<V: VectorField>(
    space: &ModelSpace,
    field: &V,
    p: &Point,
    mode: Differentiation,
) -> Result<CovariantJet> {
    let n = space.dim();
    let gamma = christoffel_at(space, p, mode)?;
    let jet = jet(&FieldFn { space, field }, &p.coords, mode)?;
    let v = jet.value;
    let nabla = Mat::from_fn(n, n, |i, k| {
        jet.partials[i][k] + (0..n).map(|j| gamma.get(k, i, j) * v[j]).sum::<f64>()
    });
    Ok(CovariantJet { value: v, nabla })
}

/// `∇_X V` at `p` for a tangent vector `x` at `p`.
pub fn covariant_derivative<V: VectorField>(
    space: &ModelSpace,
    x: &[f64],
    field: &V,
    p: &Point,
    mode: Differentiation,
) -> Result<TangentVector> {
    let n = space.dim();
    if x.len() != n {
        return Err(GeomError::DimensionMismatch { expected: n, got: x.len() });
    }
    let cj = covariant_jet(space, field, p, mode)?;
    let comps = (0..n).map(|k| (0..n).map(|i| x[i] * cj.nabla[(i, k)]).sum()).collect();
    Ok(TangentVector::new(p.clone(), comps))
}

/// Full curvature tensor from Christoffel symbols and their exact partials.
pub fn riemann_tensor(space: &ModelSpace, p: &Point) -> Result<RiemannValue> {
    let n = space.dim();
    space.check(&p.coords)?;
    let jet = jet_exact(&ChristoffelFn(space), &p.coords)?;
    let gamma = |k: usize, i: usize, j: usize| jet.value[k * n * n + i * n + j];
    let dgamma = |m: usize, k: usize, i: usize, j: usize| jet.partials[m][k * n * n + i * n + j];
    let mut comps = vec![0.0; n * n * n * n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = dgamma(i, l, j, k) - dgamma(j, l, i, k);
                    for m in 0..n {
                        r += gamma(l, i, m) * gamma(m, j, k) - gamma(l, j, m) * gamma(m, i, k);
                    }
                    comps[((l * n + k) * n + i) * n + j] = r;
                }
            }
        }
    }
    Ok(RiemannValue { dim: n, components: comps })
}

/// `R(X,Y)Z` at `p`.
pub fn riemann(
    space: &ModelSpace,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    p: &Point,
) -> Result<TangentVector> {
    let r = riemann_tensor(space, p)?;
    Ok(TangentVector::new(p.clone(), r.apply(x, y, z)))
}

/// Sectional curvature of the plane spanned by `x` and `y` at `p`.
pub fn sectional_curvature(space: &ModelSpace, x: &[f64], y: &[f64], p: &Point) -> Result<f64> {
    let r = riemann_tensor(space, p)?;
    let g = metric_at(space, p)?;
    sectional_from(&r, &g, x, y)
}

/// Sectional curvature from precomputed tensors; lets callers reuse one
/// curvature evaluation for several planes at the same point.
pub fn sectional_from(r: &RiemannValue, g: &MetricValue, x: &[f64], y: &[f64]) -> Result<f64> {
    let xx = g.inner(x, x);
    let yy = g.inner(y, y);
    let xy = g.inner(x, y);
    let gram = xx * yy - xy * xy;
    if gram <= PLANE_DEGENERACY * xx * yy || gram <= 0.0 {
        return Err(GeomError::DegeneratePlane { gram });
    }
    let ryy = r.apply(x, y, y);
    Ok(g.inner(&ryy, x) / gram)
}

/// Sectional curvatures of `planes` random planes at each point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureAudit {
    /// `curvatures[i]` holds the values at `points[i]`.
    pub curvatures: Vec<Vec<f64>>,
    pub k_min: f64,
    pub k_max: f64,
}

/// Sectional curvature of random planes spanned by vectors uniform in
/// `[−1, 1]^n`; degenerate draws are redrawn. Each point draws from its own
/// stream of `seed`, so results do not depend on scheduling.
pub fn curvature_audit(space: &ModelSpace, points: &[Point], planes: usize, seed: u64) -> Result<CurvatureAudit> {
    let n = space.dim();
    let curvatures: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let r = riemann_tensor(space, p)?;
            let g = metric_at(space, p)?;
            let mut out = Vec::with_capacity(planes);
            while out.len() < planes {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                match sectional_from(&r, &g, &x, &y) {
                    Ok(k) => out.push(k),
                    Err(GeomError::DegeneratePlane { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let all = curvatures.iter().flatten();
    let k_min = all.clone().copied().fold(f64::INFINITY, f64::min);
    let k_max = all.copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureAudit { curvatures, k_min, k_max })
}

/// Metric gradient `g^{ij} ∂_j f ∂_i`.
pub fn gradient<F: ScalarField>(
    space: &ModelSpace,
    f: &F,
    p: &Point,
    mode: Differentiation,
) -> Result<TangentVector> {
    let df = differential(space, f, p, mode)?;
    let ginv = metric_at(space, p)?.inverse()?;
    Ok(TangentVector::new(p.clone(), ginv.mul_vec(&df.components)))
}

/// `df` at `p`.
pub fn differential<F: ScalarField>(
    space: &ModelSpace,
    f: &F,
    p: &Point,
    mode: Differentiation,
) -> Result<OneForm> {
    let jet = jet(&ScalarFn { space, field: f }, &p.coords, mode)?;
    Ok(OneForm::new(p.clone(), jet.partials.into_iter().map(|d| d[0]).collect()))
}

/// `dω(∂_i, ∂_j) = ∂_i ω_j − ∂_j ω_i`, together with the largest partial
/// `|∂_i ω_j|` as a magnitude reference.
pub fn exterior_derivative_scaled<W: OneFormField>(
    space: &ModelSpace,
    form: &W,
    p: &Point,
    mode: Differentiation,
) -> Result<(Mat<f64>, f64)> {
    let n = space.dim();
    let jet = jet(&FormFn { space, form }, &p.coords, mode)?;
    let d = Mat::from_fn(n, n, |i, j| jet.partials[i][j] - jet.partials[j][i]);
    let scale = jet.partials.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok((d, scale))
}

pub fn exterior_derivative<W: OneFormField>(
    space: &ModelSpace,
    form: &W,
    p: &Point,
    mode: Differentiation,
) -> Result<Mat<f64>> {
    Ok(exterior_derivative_scaled(space, form, p, mode)?.0)
}

pub fn flat(space: &ModelSpace, x: &TangentVector) -> Result<OneForm> {
    let g = metric_at(space, &x.base)?;
    Ok(OneForm::new(x.base.clone(), g.lower(&x.components)))
}

pub fn sharp(space: &ModelSpace, w: &OneForm) -> Result<TangentVector> {
    let ginv = metric_at(space, &w.base)?.inverse()?;
    Ok(TangentVector::new(w.base.clone(), ginv.mul_vec(&w.components)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Coordinate, Differential};
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    /// Central differences of the metric fed through the Levi-Civita formula.
    fn christoffel_oracle(space: &ModelSpace, x: &[f64], h: f64) -> Vec<f64> {
        let n = space.dim();
        let g = space.metric(x).unwrap();
        let ginv = g.inverse().unwrap();
        let mut dg = vec![Mat::<f64>::zeros(n, n); n];
        for (l, slot) in dg.iter_mut().enumerate() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[l] += h;
            xm[l] -= h;
            let gp = space.metric(&xp).unwrap();
            let gm = space.metric(&xm).unwrap();
            *slot = Mat::from_fn(n, n, |i, j| (gp[(i, j)] - gm[(i, j)]) / (2.0 * h));
        }
        let mut out = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[k * n * n + i * n + j] = 0.5
                        * (0..n)
                            .map(|l| ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                            .sum::<f64>();
                }
            }
        }
        out
    }

    #[test]
    fn uhs_metric_values() {
        let u = ModelSpace::uhs(3).unwrap();
        assert_eq!(metric_at(&u, &pt(&[0.0, 0.0, 1.0])).unwrap().matrix, Mat::identity(3));
        let g = metric_at(&u, &pt(&[1.0, 2.0, 2.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.matrix[(i, j)], if i == j { 0.25 } else { 0.0 });
            }
        }
        let e = ModelSpace::euclidean(3).unwrap();
        assert_eq!(metric_at(&e, &pt(&[5.0, -1.0, 2.0])).unwrap().matrix, Mat::identity(3));
    }

    #[test]
    fn christoffel_euclidean_vanishes() {
        let e = ModelSpace::euclidean(3).unwrap();
        let c = christoffel_at(&e, &pt(&[1.0, 2.0, 3.0]), Differentiation::Exact).unwrap();
        assert!(c.symbols.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn christoffel_uhs_matches_oracle_values() {
        let u = ModelSpace::uhs(3).unwrap();
        for x3 in [1.0, 2.0] {
            let x = [0.0, 0.0, x3];
            let oracle = christoffel_oracle(&u, &x, 1e-5);
            // frozen from the oracle: Γ³₁₁ = 1/x3, Γ¹₁₃ = −1/x3, Γ³₃₃ = −1/x3
            assert_relative_eq!(oracle[2 * 9], 1.0 / x3, epsilon = 1e-8);
            assert_relative_eq!(oracle[2], -1.0 / x3, epsilon = 1e-8);
            assert_relative_eq!(oracle[2 * 9 + 2 * 3 + 2], -1.0 / x3, epsilon = 1e-8);

            let c = christoffel_at(&u, &pt(&x), Differentiation::Exact).unwrap();
            let expected = |k: usize, i: usize, j: usize| -> f64 {
                match (k, i, j) {
                    (2, 0, 0) | (2, 1, 1) => 1.0 / x3,
                    (0, 0, 2) | (0, 2, 0) | (1, 1, 2) | (1, 2, 1) | (2, 2, 2) => -1.0 / x3,
                    _ => 0.0,
                }
            };
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_relative_eq!(c.get(k, i, j), expected(k, i, j), epsilon = 1e-14);
                        assert_relative_eq!(
                            c.get(k, i, j),
                            oracle[k * 9 + i * 3 + j],
                            epsilon = 1e-8
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn covariant_derivative_of_position_is_identity() {
        struct Position;
        impl VectorField for Position {
            fn components<S: Scalar>(&self, _: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
                Ok(x.to_vec())
            }
        }
        let e = ModelSpace::euclidean(3).unwrap();
        let v = covariant_derivative(&e, &[1.0, 0.0, 0.0], &Position, &pt(&[0.3, 2.0, -1.0]), Differentiation::Exact)
            .unwrap();
        assert_eq!(v.components, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn riemann_uhs_at_unit_height() {
        let u = ModelSpace::uhs(3).unwrap();
        let r = riemann(&u, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &pt(&[0.0, 0.0, 1.0]))
            .unwrap();
        assert_relative_eq!(r.components[0], -1.0, epsilon = 1e-13);
        assert!(r.components[1].abs() < 1e-13 && r.components[2].abs() < 1e-13);
    }

    #[test]
    fn riemann_flat_is_zero() {
        let e = ModelSpace::euclidean(3).unwrap();
        let r = riemann_tensor(&e, &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert!(r.components.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sectional_curvature_of_space_forms() {
        let u = ModelSpace::uhs(3).unwrap();
        let k = sectional_curvature(&u, &[1.0, 0.2, 0.0], &[0.1, -0.4, 2.0], &pt(&[0.5, -1.0, 0.7])).unwrap();
        assert_relative_eq!(k, -1.0, epsilon = 1e-12);
        let s = ModelSpace::sphere(3).unwrap();
        let k = sectional_curvature(&s, &[1.0, 0.0, 0.3], &[0.0, 1.0, -0.2], &pt(&[0.2, 0.1, -0.3])).unwrap();
        assert_relative_eq!(k, 1.0, epsilon = 1e-11);
        let h = ModelSpace::hyperboloid(3).unwrap();
        let k = sectional_curvature(&h, &[1.0, 0.0, 0.3], &[0.0, 1.0, -0.2], &pt(&[1.0, 1.0, 1.0])).unwrap();
        assert_relative_eq!(k, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn degenerate_plane_rejected() {
        let u = ModelSpace::uhs(3).unwrap();
        let err = sectional_curvature(&u, &[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &pt(&[0.0, 0.0, 1.0]));
        assert!(matches!(err, Err(GeomError::DegeneratePlane { .. })));
    }

    #[test]
    fn gradient_examples() {
        let e = ModelSpace::euclidean(3).unwrap();
        let g = gradient(&e, &Coordinate(0), &pt(&[1.0, 1.0, 1.0]), Differentiation::Exact).unwrap();
        assert_eq!(g.components, vec![1.0, 0.0, 0.0]);

        let u = ModelSpace::uhs(3).unwrap();
        let p = pt(&[0.0, 0.0, 2.0]);
        let g = gradient(&u, &Coordinate(2), &p, Differentiation::Exact).unwrap();
        assert_relative_eq!(g.components[2], 4.0, epsilon = 1e-14);
        let fd = gradient(&u, &Coordinate(2), &p, Differentiation::central()).unwrap();
        assert_relative_eq!(fd.components[2], 4.0, epsilon = 1e-8);
    }

    #[test]
    fn exterior_derivative_examples() {
        struct XdY;
        impl OneFormField for XdY {
            fn components<S: Scalar>(&self, _: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![S::zero(), x[0]])
            }
        }
        let e = ModelSpace::euclidean(2).unwrap();
        let d = exterior_derivative(&e, &XdY, &pt(&[0.4, -0.2]), Differentiation::Exact).unwrap();
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(1, 0)], -1.0);

        let u = ModelSpace::uhs(3).unwrap();
        let exact = Differential(Coordinate(2));
        let d = exterior_derivative(&u, &exact, &pt(&[0.1, 0.2, 0.3]), Differentiation::Exact).unwrap();
        assert!(d.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn musical_isomorphisms() {
        let u = ModelSpace::uhs(3).unwrap();
        let p = pt(&[0.0, 0.0, 2.0]);
        let f = flat(&u, &TangentVector::new(p.clone(), vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.components, vec![0.25, 0.0, 0.0]);
        let e = ModelSpace::euclidean(3).unwrap();
        let f = flat(&e, &TangentVector::new(p.clone(), vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.components, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn example_frame_derivatives_on_uhs() {
        // e_1 = x3 ∂_1, e_3 = −x3 ∂_3
        struct E1;
        impl VectorField for E1 {
            fn components<S: Scalar>(&self, _: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![x[2], S::zero(), S::zero()])
            }
        }
        struct E3;
        impl VectorField for E3 {
            fn components<S: Scalar>(&self, _: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
                Ok(vec![S::zero(), S::zero(), -x[2]])
            }
        }
        let u = ModelSpace::uhs(3).unwrap();
        let p = pt(&[0.0, 0.0, 1.0]);
        let d = covariant_derivative(&u, &[1.0, 0.0, 0.0], &E3, &p, Differentiation::Exact).unwrap();
        assert_eq!(d.components, vec![1.0, 0.0, 0.0]);
        let d = covariant_derivative(&u, &[0.0, 0.0, -1.0], &E3, &p, Differentiation::Exact).unwrap();
        assert!(d.components.iter().all(|c| c.abs() < 1e-15));
        // ∇_{e_1} e_1 = −e_3
        let d = covariant_derivative(&u, &[1.0, 0.0, 0.0], &E1, &p, Differentiation::Exact).unwrap();
        assert_eq!(d.components, vec![0.0, 0.0, 1.0]);
    }
}
