//! Euclidean base space ℝ^d.
//!
//! Points, straight-line geodesics, rays, and a small family of scalar fields
//! on ℝ^d whose negative gradient rays are known in closed form: Busemann
//! fields `x ↦ c − ⟨x, v⟩` and finite minima of them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Unit vectors within this distance of norm 1 are accepted exactly.
pub const UNIT_TOL: f64 = 1e-12;
/// Vectors within this distance of norm 1 are silently renormalized.
pub const UNIT_RENORM_TOL: f64 = 1e-9;

/// A point of ℝ^d with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BasePoint(Vec<f64>);

impl BasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("zero-dimensional point".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("coordinate {i} is not finite")));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance. Panics on dimension mismatch.
    pub fn dist(&self, other: &BasePoint) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &BasePoint) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `self + s·v`.
    pub fn offset(&self, v: &[f64], s: f64) -> BasePoint {
        debug_assert_eq!(self.dim(), v.len());
        BasePoint(self.0.iter().zip(v).map(|(a, b)| a + s * b).collect())
    }
}

impl fmt::Debug for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl TryFrom<Vec<f64>> for BasePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        BasePoint::new(v)
    }
}

impl From<BasePoint> for Vec<f64> {
    fn from(p: BasePoint) -> Self {
        p.0
    }
}

/// Euclidean norm of a coordinate slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Validates a direction: norms within [`UNIT_RENORM_TOL`] of 1 are
/// renormalized, anything further off is rejected.
pub fn unit_vector(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() || v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidPoint("direction must be finite and non-empty".into()));
    }
    let n = norm(&v);
    if (n - 1.0).abs() <= UNIT_TOL {
        Ok(v)
    } else if (n - 1.0).abs() <= UNIT_RENORM_TOL {
        Ok(v.into_iter().map(|c| c / n).collect())
    } else {
        Err(Error::Domain(format!("direction has norm {n}, expected 1")))
    }
}

/// Point at fraction `t` of the segment from `a` to `b`.
pub fn base_geodesic_eval(a: &BasePoint, b: &BasePoint, t: f64) -> Result<BasePoint> {
    check_dim(a.dim(), b.dim())?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("geodesic parameter {t}")));
    }
    // Anchored at the nearer endpoint so both endpoints are reproduced exactly.
    Ok(BasePoint(
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| if t <= 0.5 { x + t * (y - x) } else { y - (1.0 - t) * (y - x) })
            .collect(),
    ))
}

/// A constant-speed ray `t ↦ origin + t·speed·direction`, `t ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseRay {
    origin: BasePoint,
    direction: Vec<f64>,
    speed: f64,
}

impl BaseRay {
    pub fn new(origin: BasePoint, direction: Vec<f64>, speed: f64) -> Result<Self> {
        let direction = unit_vector(direction)?;
        check_dim(origin.dim(), direction.len())?;
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::Domain(format!("ray speed must be positive, got {speed}")));
        }
        Ok(Self { origin, direction, speed })
    }

    pub fn unit(origin: BasePoint, direction: Vec<f64>) -> Result<Self> {
        Self::new(origin, direction, 1.0)
    }

    pub fn origin(&self) -> &BasePoint {
        &self.origin
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn eval(&self, t: f64) -> Result<BasePoint> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("ray parameter must be >= 0, got {t}")));
        }
        Ok(self.origin.offset(&self.direction, t * self.speed))
    }
}

/// Evaluator of a user-supplied field.
pub type FieldFn = Arc<dyn Fn(&BasePoint) -> f64 + Send + Sync>;
/// Optional generator of unit-speed negative gradient rays for a custom field.
pub type RayFn = Arc<dyn Fn(&BasePoint) -> Result<BaseRay> + Send + Sync>;

/// Sign of a distance field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Real-valued 1-Lipschitz field on ℝ^d.
#[derive(Clone)]
pub enum BaseField {
    /// `x ↦ c − ⟨x, v⟩` with `‖v‖ = 1`.
    Busemann { direction: Vec<f64>, offset: f64 },
    /// Pointwise minimum of the members.
    MinOf(Vec<BaseField>),
    /// `x ↦ ±min_k ‖x − p_k‖`.
    DistanceTo { points: Vec<BasePoint>, sign: Sign },
    Custom {
        dim: usize,
        lipschitz: f64,
        eval: FieldFn,
        ray: Option<RayFn>,
    },
}

impl fmt::Debug for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseField::Busemann { direction, offset } => f
                .debug_struct("Busemann")
                .field("direction", direction)
                .field("offset", offset)
                .finish(),
            BaseField::MinOf(v) => f.debug_tuple("MinOf").field(v).finish(),
            BaseField::DistanceTo { points, sign } => f
                .debug_struct("DistanceTo")
                .field("points", points)
                .field("sign", sign)
                .finish(),
            BaseField::Custom { dim, lipschitz, ray, .. } => f
                .debug_struct("Custom")
                .field("dim", dim)
                .field("lipschitz", lipschitz)
                .field("has_ray", &ray.is_some())
                .finish(),
        }
    }
}

impl BaseField {
    pub fn busemann(direction: Vec<f64>, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::Domain("Busemann offset must be finite".into()));
        }
        Ok(BaseField::Busemann { direction: unit_vector(direction)?, offset })
    }

    pub fn distance_to(points: Vec<BasePoint>, sign: Sign) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCollection("distance point set"))?;
        for p in &points {
            check_dim(first.dim(), p.dim())?;
        }
        Ok(BaseField::DistanceTo { points, sign })
    }

    pub fn custom<F>(dim: usize, lipschitz: f64, eval: F) -> Self
    where
        F: Fn(&BasePoint) -> f64 + Send + Sync + 'static,
    {
        BaseField::Custom { dim, lipschitz, eval: Arc::new(eval), ray: None }
    }

    /// Attaches a negative gradient ray generator to a `Custom` field.
    pub fn with_ray<R>(self, ray: R) -> Self
    where
        R: Fn(&BasePoint) -> Result<BaseRay> + Send + Sync + 'static,
    {
        match self {
            BaseField::Custom { dim, lipschitz, eval, .. } => {
                BaseField::Custom { dim, lipschitz, eval, ray: Some(Arc::new(ray)) }
            }
            other => other,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseField::Busemann { direction, .. } => direction.len(),
            BaseField::MinOf(fields) => fields[0].dim(),
            BaseField::DistanceTo { points, .. } => points[0].dim(),
            BaseField::Custom { dim, .. } => *dim,
        }
    }

    /// Declared Lipschitz constant (1 for every built-in variant).
    pub fn lipschitz(&self) -> f64 {
        match self {
            BaseField::Custom { lipschitz, .. } => *lipschitz,
            BaseField::MinOf(fields) => fields.iter().map(|f| f.lipschitz()).fold(0.0, f64::max),
            _ => 1.0,
        }
    }

    pub fn eval(&self, x: &BasePoint) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &BasePoint) -> f64 {
        match self {
            BaseField::Busemann { direction, offset } => -x.dot(direction) + offset,
            BaseField::MinOf(fields) => fields
                .iter()
                .map(|f| f.eval_unchecked(x))
                .fold(f64::INFINITY, f64::min),
            BaseField::DistanceTo { points, sign } => {
                sign.factor() * points.iter().map(|p| x.dist(p)).fold(f64::INFINITY, f64::min)
            }
            BaseField::Custom { eval, .. } => eval(x),
        }
    }

    /// True when [`base_negative_gradient_ray`] can serve this field.
    pub fn has_analytic_ray(&self) -> bool {
        match self {
            BaseField::Busemann { .. } => true,
            BaseField::MinOf(fields) => fields.iter().all(|f| f.has_analytic_ray()),
            BaseField::DistanceTo { .. } => false,
            BaseField::Custom { ray, .. } => ray.is_some(),
        }
    }
}

/// Unit-speed negative gradient ray of `u` starting at `x`.
///
/// For a Busemann field the ray is `t ↦ x + t v`. For a minimum of fields the
/// ray of the member attaining the minimum at `x` is used, lowest index on
/// ties: if `u_i(x) = u(x)` then `u(γ(t)) ≤ u_i(γ(t)) = u(x) − t`, and the
/// 1-Lipschitz bound gives the reverse inequality.
pub fn base_negative_gradient_ray(u: &BaseField, x: &BasePoint) -> Result<BaseRay> {
    check_dim(u.dim(), x.dim())?;
    match u {
        BaseField::Busemann { direction, .. } => BaseRay::unit(x.clone(), direction.clone()),
        BaseField::MinOf(fields) => {
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for (i, f) in fields.iter().enumerate() {
                let v = f.eval_unchecked(x);
                if v < best_val {
                    best = i;
                    best_val = v;
                }
            }
            base_negative_gradient_ray(&fields[best], x)
        }
        BaseField::DistanceTo { .. } => Err(Error::UnsupportedField),
        BaseField::Custom { ray: Some(ray), .. } => ray(x),
        BaseField::Custom { ray: None, .. } => Err(Error::UnsupportedField),
    }
}

/// Pointwise minimum of a non-empty list of fields. A singleton is returned
/// unchanged.
pub fn min_combine(mut fields: Vec<BaseField>) -> Result<BaseField> {
    let first = fields.first().ok_or(Error::EmptyCollection("field list"))?;
    let dim = first.dim();
    for f in &fields {
        check_dim(dim, f.dim())?;
    }
    if fields.len() == 1 {
        return Ok(fields.pop().unwrap());
    }
    Ok(BaseField::MinOf(fields))
}

/// Serializable description of a [`BaseField`] (every variant except `Custom`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseFieldConfig {
    Busemann { direction: Vec<f64>, #[serde(default)] offset: f64 },
    Min { fields: Vec<BaseFieldConfig> },
    DistanceTo { points: Vec<BasePoint>, sign: Sign },
}

impl BaseFieldConfig {
    pub fn build(&self) -> Result<BaseField> {
        match self {
            BaseFieldConfig::Busemann { direction, offset } => {
                BaseField::busemann(direction.clone(), *offset)
            }
            BaseFieldConfig::Min { fields } => {
                min_combine(fields.iter().map(|f| f.build()).collect::<Result<_>>()?)
            }
            BaseFieldConfig::DistanceTo { points, sign } => {
                BaseField::distance_to(points.clone(), *sign)
            }
        }
    }
}
