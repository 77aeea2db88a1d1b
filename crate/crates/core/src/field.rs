//! Differentiable fields over chart coordinates.
//!
//! Fields are evaluated on any [`Scalar`], so the same closed-form code yields
//! values, exact first derivatives (`Dual<f64>`) and exact second derivatives
//! (`Dual<Dual<f64>>`).

use crate::diff::{jet_exact, VectorFunction};
use crate::dual::Scalar;
use crate::error::{GeomError, Result};
use crate::space::ModelSpace;

pub trait VectorField: Sync {
    /// Coordinate-basis components at chart point `x`.
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>>;
}

pub trait ScalarField: Sync {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S>;
}

pub trait OneFormField: Sync {
    /// Coordinate-cobasis components at chart point `x`.
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>>;
}

impl<T: VectorField> VectorField for &T {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        (**self).components(space, x)
    }
}

impl<T: ScalarField> ScalarField for &T {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        (**self).value(space, x)
    }
}

impl<T: OneFormField> OneFormField for &T {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        (**self).components(space, x)
    }
}

/// Coordinate vector field `∂_k`.
#[derive(Clone, Copy, Debug)]
pub struct CoordinateField(pub usize);

impl VectorField for CoordinateField {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        space.check(x)?;
        let mut v = vec![S::zero(); space.dim()];
        v[self.0] = S::one();
        Ok(v)
    }
}

/// Field with the same chart components everywhere.
#[derive(Clone, Debug)]
pub struct ConstantField(pub Vec<f64>);

impl VectorField for ConstantField {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        space.check(x)?;
        if self.0.len() != space.dim() {
            return Err(GeomError::DimensionMismatch { expected: space.dim(), got: self.0.len() });
        }
        Ok(self.0.iter().map(|&c| S::from_f64(c)).collect())
    }
}

/// Chart coordinate function `x_k`.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

impl ScalarField for Coordinate {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        space.check(x)?;
        Ok(x[self.0])
    }
}

/// Restriction of the ambient coordinate `x^k` (0-based) to an embedded space.
#[derive(Clone, Copy, Debug)]
pub struct AmbientCoordinate(pub usize);

impl ScalarField for AmbientCoordinate {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        Ok(space.embed(x)?[self.0])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        space.check(x)?;
        Ok(S::from_f64(self.0))
    }
}

/// `df` for a scalar field `f`.
#[derive(Clone, Copy, Debug)]
pub struct Differential<F>(pub F);

impl<F: ScalarField> OneFormField for Differential<F> {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        let jet = jet_exact(&ScalarFn { space, field: &self.0 }, x)?;
        Ok(jet.partials.into_iter().map(|p| p[0]).collect())
    }
}

/// Metric dual `ν = ⟨V, ·⟩` of a vector field.
#[derive(Clone, Copy, Debug)]
pub struct MetricDual<V>(pub V);

impl<V: VectorField> OneFormField for MetricDual<V> {
    fn components<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<Vec<S>> {
        let v = self.0.components(space, x)?;
        Ok(space.metric(x)?.mul_vec(&v))
    }
}

/// Pointwise length `|V|` of a vector field.
#[derive(Clone, Copy, Debug)]
pub struct Length<V>(pub V);

impl<V: VectorField> ScalarField for Length<V> {
    fn value<S: Scalar>(&self, space: &ModelSpace, x: &[S]) -> Result<S> {
        let v = self.0.components(space, x)?;
        Ok(space.metric(x)?.bilinear(&v, &v).sqrt())
    }
}

pub(crate) struct FieldFn<'a, V: ?Sized> {
    pub space: &'a ModelSpace,
    pub field: &'a V,
}

impl<V: VectorField> VectorFunction for FieldFn<'_, V> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.field.components(self.space, x)
    }
}

pub(crate) struct ScalarFn<'a, F: ?Sized> {
    pub space: &'a ModelSpace,
    pub field: &'a F,
}

impl<F: ScalarField> VectorFunction for ScalarFn<'_, F> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![self.field.value(self.space, x)?])
    }
}

pub(crate) struct FormFn<'a, W: ?Sized> {
    pub space: &'a ModelSpace,
    pub form: &'a W,
}

impl<W: OneFormField> VectorFunction for FormFn<'_, W> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.form.components(self.space, x)
    }
}
