//! Finitely supported probability measures on ℝ^d.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::base_space::BasePoint;
use crate::error::{check_dim, Error, Result};

/// Support points closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Weights below this are pruned.
pub const MIN_WEIGHT: f64 = 1e-15;
/// Total mass accepted (and renormalized) within this distance of 1.
pub const MASS_TOL: f64 = 1e-9;
/// Renormalization is skipped when the mass is already this close to 1, so
/// that validation is idempotent bit for bit.
const RENORM_SKIP: f64 = 1e-14;

/// `Σ λ_i δ_{x_i}` with distinct atoms and strictly positive weights.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    support: Vec<BasePoint>,
    weights: Vec<f64>,
}

/// Wire form: `{"dim": d, "support": [[...], ...], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMeasure {
    pub dim: usize,
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        for p in &raw.support {
            check_dim(raw.dim, p.len())?;
        }
        validate_measure(raw.support, raw.weights)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure {
            dim: m.dim(),
            support: m.support.into_iter().map(BasePoint::into_coords).collect(),
            weights: m.weights,
        }
    }
}

impl fmt::Debug for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Σ[")?;
        for (i, (x, w)) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}·δ{x:?}")?;
        }
        f.write_str("]")
    }
}

/// Builds a measure from raw support and weights.
///
/// Negative or non-finite weights are rejected, duplicate atoms (within
/// [`MERGE_TOL`]) are merged, weights below [`MIN_WEIGHT`] are pruned, and the
/// mass is renormalized if it is within [`MASS_TOL`] of 1.
pub fn validate_measure(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<DiscreteMeasure> {
    if support.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if support.len() != weights.len() {
        return Err(Error::Domain(format!(
            "{} support points but {} weights",
            support.len(),
            weights.len()
        )));
    }
    let points = support
        .into_iter()
        .map(BasePoint::new)
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::from_atoms(points, weights)
}

impl DiscreteMeasure {
    /// Same as [`validate_measure`] for already-built points.
    pub fn from_atoms(points: Vec<BasePoint>, weights: Vec<f64>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyMeasure)?;
        let dim = first.dim();
        if points.len() != weights.len() {
            return Err(Error::Domain("support and weights differ in length".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidWeight { index: i, value: w });
            }
        }
        for p in &points {
            check_dim(dim, p.dim())?;
        }
        let sum: f64 = weights.iter().sum();
        // Allow the rounding of the summation itself on top of the tolerance.
        if (sum - 1.0).abs() > MASS_TOL + weights.len() as f64 * f64::EPSILON {
            return Err(Error::NotNormalized { sum });
        }

        let mut support: Vec<BasePoint> = Vec::with_capacity(points.len());
        let mut merged: Vec<f64> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            match support.iter().position(|q| q.dist(&p) <= MERGE_TOL) {
                Some(k) => merged[k] += w,
                None => {
                    support.push(p);
                    merged.push(w);
                }
            }
        }

        loop {
            let before = support.len();
            let mut k = 0;
            while k < support.len() {
                if merged[k] < MIN_WEIGHT {
                    support.remove(k);
                    merged.remove(k);
                } else {
                    k += 1;
                }
            }
            if support.is_empty() {
                return Err(Error::EmptyMeasure);
            }
            let total: f64 = merged.iter().sum();
            if (total - 1.0).abs() > RENORM_SKIP {
                merged.iter_mut().for_each(|w| *w /= total);
            }
            if support.len() == before {
                break;
            }
        }
        Ok(Self { support, weights: merged })
    }

    pub fn dirac(x: BasePoint) -> Self {
        Self { support: vec![x], weights: vec![1.0] }
    }

    /// Uniform measure on the given points (merged if some coincide).
    pub fn uniform(points: Vec<BasePoint>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        Self::from_atoms(points, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[BasePoint] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&BasePoint, f64)> + '_ {
        self.support.iter().zip(self.weights.iter().copied())
    }

    /// Translate every atom by `v`.
    pub fn translate(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.dim(), v.len())?;
        push_forward(self, |x| x.offset(v, 1.0))
    }

    /// `∫ f dμ`.
    pub fn integrate<F: Fn(&BasePoint) -> f64>(&self, f: F) -> f64 {
        self.atoms().map(|(x, w)| w * f(x)).sum()
    }

    /// Bit pattern of the measure, used as a memoization key.
    pub fn fingerprint(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(self.len() * (self.dim() + 1));
        for (x, w) in self.atoms() {
            key.extend(x.coords().iter().map(|c| c.to_bits()));
            key.push(w.to_bits());
        }
        key
    }
}

/// `Σ_i λ_i ‖x_i − x0‖^p`.
pub fn p_moment(m: &DiscreteMeasure, p: f64, x0: &BasePoint) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("moment exponent must be >= 1, got {p}")));
    }
    check_dim(m.dim(), x0.dim())?;
    Ok(m.atoms().map(|(x, w)| w * x.dist(x0).powf(p)).sum())
}

/// Image measure `f_♯ m`; atoms mapped to the same point are merged.
pub fn push_forward<F>(m: &DiscreteMeasure, f: F) -> Result<DiscreteMeasure>
where
    F: Fn(&BasePoint) -> BasePoint,
{
    let mut points = Vec::with_capacity(m.len());
    for (i, x) in m.support().iter().enumerate() {
        let y = f(x);
        if y.coords().iter().any(|c| !c.is_finite()) {
            return Err(Error::MapRange(i));
        }
        points.push(y);
    }
    DiscreteMeasure::from_atoms(points, m.weights.clone())
}

/// Finite set generator `n ↦ H_n`.
pub type SetGenerator = Arc<dyn Fn(u64) -> Vec<DiscreteMeasure> + Send + Sync>;
/// Shift generator `n ↦ c_n`.
pub type ShiftGenerator = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Lazily generated sequence of finite measure sets `H_n` with shifts `c_n`,
/// defining `u(ω) = lim_n [W_p(ω, H_n) − c_n]`.
#[derive(Clone)]
pub struct MeasureSetSequence {
    generator: SetGenerator,
    shifts: ShiftGenerator,
}

impl fmt::Debug for MeasureSetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MeasureSetSequence")
    }
}

impl MeasureSetSequence {
    pub fn new<G, S>(generator: G, shifts: S) -> Self
    where
        G: Fn(u64) -> Vec<DiscreteMeasure> + Send + Sync + 'static,
        S: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self { generator: Arc::new(generator), shifts: Arc::new(shifts) }
    }

    /// `H_n`; an empty set is an error.
    pub fn set(&self, n: u64) -> Result<Vec<DiscreteMeasure>> {
        let h = (self.generator)(n);
        if h.is_empty() {
            return Err(Error::EmptyCollection("H_n"));
        }
        Ok(h)
    }

    pub fn shift(&self, n: u64) -> f64 {
        (self.shifts)(n)
    }
}
