//! Partial derivatives of vector-valued evaluators, by exact forward mode or
//! by central differences.

use crate::dual::{seed, Dual, Scalar};
use crate::error::Result;

/// Step used by the central-difference backend unless configured otherwise.
pub const FD_STEP: f64 = 1e-5;

/// How first partial derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Differentiation {
    /// Forward mode through [`Dual`] numbers; exact up to rounding.
    #[default]
    Exact,
    /// Symmetric difference quotient with the given step.
    CentralDifference { step: f64 },
    /// Fourth-order central stencil `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`.
    CentralFourthOrder { step: f64 },
}

impl Differentiation {
    pub fn central() -> Self {
        Differentiation::CentralDifference { step: FD_STEP }
    }

    pub fn central_fourth_order() -> Self {
        Differentiation::CentralFourthOrder { step: FD_STEP }
    }
}

/// An evaluator `R^n -> R^m` that can run on any [`Scalar`].
pub trait VectorFunction {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;
}

/// Value and partials; `partials[k][j] = ∂_k out_j`.
#[derive(Clone, Debug)]
pub struct Jet<S> {
    pub value: Vec<S>,
    pub partials: Vec<Vec<S>>,
}

/// Exact partials by seeding one coordinate at a time.
pub fn jet_exact<S: Scalar, F: VectorFunction + ?Sized>(f: &F, x: &[S]) -> Result<Jet<S>> {
    let mut value = None;
    let mut partials = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let out: Vec<Dual<S>> = f.eval(&seed(x, k))?;
        if value.is_none() {
            value = Some(out.iter().map(|d| d.re).collect());
        }
        partials.push(out.iter().map(|d| d.eps).collect());
    }
    let value = match value {
        Some(v) => v,
        None => f.eval(x)?,
    };
    Ok(Jet { value, partials })
}

/// Central-difference partials at an `f64` point.
pub fn jet_central<F: VectorFunction + ?Sized>(f: &F, x: &[f64], step: f64) -> Result<Jet<f64>> {
    let value = f.eval(x)?;
    let mut partials = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + step;
        let plus = f.eval(&xp)?;
        xp[k] = x[k] - step;
        let minus = f.eval(&xp)?;
        xp[k] = x[k];
        partials.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * step)).collect());
    }
    Ok(Jet { value, partials })
}

/// Fourth-order central-difference partials at an `f64` point.
pub fn jet_central4<F: VectorFunction + ?Sized>(f: &F, x: &[f64], step: f64) -> Result<Jet<f64>> {
    let value = f.eval(x)?;
    let mut partials = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    let at = |xp: &mut Vec<f64>, k: usize, c: f64| -> Result<Vec<f64>> {
        xp[k] = x[k] + c * step;
        let out = f.eval(xp);
        xp[k] = x[k];
        out
    };
    for k in 0..x.len() {
        let (p2, p1) = (at(&mut xp, k, 2.0)?, at(&mut xp, k, 1.0)?);
        let (m1, m2) = (at(&mut xp, k, -1.0)?, at(&mut xp, k, -2.0)?);
        partials.push(
            (0..value.len())
                .map(|j| (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * step))
                .collect(),
        );
    }
    Ok(Jet { value, partials })
}

pub fn jet<F: VectorFunction + ?Sized>(f: &F, x: &[f64], mode: Differentiation) -> Result<Jet<f64>> {
    match mode {
        Differentiation::Exact => jet_exact(f, x),
        Differentiation::CentralDifference { step } => jet_central(f, x, step),
        Differentiation::CentralFourthOrder { step } => jet_central4(f, x, step),
    }
}
