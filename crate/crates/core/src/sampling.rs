//! Deterministic rejection sampling of chart points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::space::{ModelSpace, SpaceKind};
use crate::tensor::Point;

/// Margin kept around excluded coordinate hyperplanes.
pub const EXCLUSION_MARGIN: f64 = 0.05;

/// Band `|x_pole| < EQUATOR_BAND` avoided on sphere charts.
pub const EQUATOR_BAND: f64 = 0.1;

const MAX_ATTEMPTS_PER_POINT: usize = 10_000;

/// `|x_coord| ≥ margin`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exclusion {
    pub coord: usize,
    pub margin: f64,
}

/// Axis-aligned box in chart coordinates with optional exclusions.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub exclusions: Vec<Exclusion>,
    /// Reject points with chart radius `|x| > max_radius`.
    pub max_radius: Option<f64>,
    /// Reject points with chart radius `|x| < min_radius`.
    pub min_radius: Option<f64>,
}

impl SampleRegion {
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        SampleRegion {
            lower: vec![lo; n],
            upper: vec![hi; n],
            exclusions: Vec::new(),
            max_radius: None,
            min_radius: None,
        }
    }

    /// Default bounds for each model space.
    pub fn default_for(space: &ModelSpace) -> Self {
        let n = space.dim();
        match space.kind() {
            SpaceKind::UpperHalfSpace => {
                let mut r = Self::cube(n, -3.0, 3.0);
                r.lower[n - 1] = 0.1;
                r.upper[n - 1] = 10.0;
                r
            }
            SpaceKind::Sphere(_) => {
                let mut r = Self::cube(n, -1.0, 1.0);
                r.max_radius = Some((1.0 - EQUATOR_BAND * EQUATOR_BAND).sqrt());
                r
            }
            SpaceKind::TwistedProduct(_) => Self::cube(n, -1.0, 1.0),
            SpaceKind::Euclidean | SpaceKind::Hyperboloid => Self::cube(n, -3.0, 3.0),
        }
    }

    pub fn exclude(mut self, coord: usize, margin: f64) -> Self {
        self.exclusions.push(Exclusion { coord, margin });
        self
    }

    pub fn without_ball(mut self, radius: f64) -> Self {
        self.min_radius = Some(radius);
        self
    }

    pub fn accepts(&self, space: &ModelSpace, x: &[f64]) -> bool {
        if !space.contains(x) {
            return false;
        }
        let inside = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        if !inside {
            return false;
        }
        if self.exclusions.iter().any(|e| x[e.coord].abs() < e.margin) {
            return false;
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.max_radius.is_none_or(|m| r <= m) && self.min_radius.is_none_or(|m| r >= m)
    }

    fn validate(&self, space: &ModelSpace) -> Result<()> {
        let n = space.dim();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(GeomError::Config(format!("sample bounds must have {n} entries")));
        }
        if self.lower.iter().zip(&self.upper).any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(GeomError::Config("sample bounds are empty or not finite".into()));
        }
        if let Some(e) = self.exclusions.iter().find(|e| e.coord >= n) {
            return Err(GeomError::Config(format!("exclusion on coordinate {} of {n}", e.coord)));
        }
        Ok(())
    }
}

/// `count` points drawn uniformly from `region`, deterministic in `seed`.
pub fn sample_points(
    space: &ModelSpace,
    count: usize,
    seed: u64,
    region: &SampleRegion,
) -> Result<Vec<Point>> {
    region.validate(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.dim();
    let mut out = Vec::with_capacity(count);
    let mut x = vec![0.0; n];
    let mut budget = MAX_ATTEMPTS_PER_POINT.saturating_mul(count.max(1));
    while out.len() < count {
        if budget == 0 {
            return Err(GeomError::Config(format!(
                "sample region for {space} is empty or too thin to sample"
            )));
        }
        budget -= 1;
        for (k, xk) in x.iter_mut().enumerate() {
            let (lo, hi) = (region.lower[k], region.upper[k]);
            *xk = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
        }
        if region.accepts(space, &x) {
            out.push(Point::new(x.clone()));
        }
    }
    Ok(out)
}
