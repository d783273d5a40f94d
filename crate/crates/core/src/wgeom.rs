//! Geometry of the Wasserstein space over ℝ^d.
//!
//! Displacement interpolation along an optimal coupling gives constant-speed
//! geodesics; rays are built atom by atom from base rays. Busemann functions
//! and distance-like limits are evaluated on a doubling schedule with
//! Richardson extrapolation in `1/t`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::base_space::{base_geodesic_eval, BasePoint, BaseRay};
use crate::error::{check_dim, Error, Result};
use crate::measure::{DiscreteMeasure, MeasureSetSequence};
use crate::transport::{wasserstein, wasserstein_exact};
use crate::verdict::Verdict;

/// Tolerance for the geodesic and ray checks.
pub const GEODESIC_TOL: f64 = 1e-8;

/// Constant-speed geodesic from `source` to `target`, parametrized by arc
/// length on `[0, L]`.
#[derive(Clone, Debug)]
pub struct WassersteinPath {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    p: f64,
    length: f64,
    /// `(x_i, y_j, π_ij)` for every coupled pair.
    pairs: Vec<(BasePoint, BasePoint, f64)>,
    /// `p = 1`: still a geodesic, but optimal couplings need not be unique.
    pub non_unique: bool,
    /// `L = 0`: the path is constant.
    pub degenerate: bool,
}

/// Displacement interpolation between `mu` and `nu` along an optimal coupling
/// from [`wasserstein_exact`].
pub fn displacement_path(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<WassersteinPath> {
    check_dim(mu.dim(), nu.dim())?;
    let res = wasserstein_exact(mu, nu, p)?;
    let pairs = res
        .plan
        .entries
        .iter()
        .map(|&(i, j, w)| (mu.support()[i].clone(), nu.support()[j].clone(), w))
        .collect();
    Ok(WassersteinPath {
        source: mu.clone(),
        target: nu.clone(),
        p,
        length: res.value,
        pairs,
        non_unique: p == 1.0,
        degenerate: res.value == 0.0,
    })
}

impl WassersteinPath {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    /// Measure at arc length `t ∈ [0, L]`.
    pub fn eval(&self, t: f64) -> Result<DiscreteMeasure> {
        let slack = 1e-12 * self.length.max(1.0);
        if !(t >= -slack && t <= self.length + slack) {
            return Err(Error::Domain(format!("path parameter {t} outside [0, {}]", self.length)));
        }
        if self.degenerate || t <= 0.0 {
            return Ok(self.source.clone());
        }
        if t >= self.length {
            return Ok(self.target.clone());
        }
        let s = t / self.length;
        let mut points = Vec::with_capacity(self.pairs.len());
        let mut weights = Vec::with_capacity(self.pairs.len());
        for (x, y, w) in &self.pairs {
            points.push(base_geodesic_eval(x, y, s)?);
            weights.push(*w);
        }
        DiscreteMeasure::from_atoms(points, weights)
    }
}

/// Ray `t ↦ Σ λ_i δ_{γ^i(t)}` built from unit-speed base rays, one per atom.
#[derive(Clone, Debug)]
pub struct WassersteinRay {
    base: DiscreteMeasure,
    rays: Vec<BaseRay>,
    p: f64,
}

impl WassersteinRay {
    /// Checks that each base ray starts at its atom with unit speed and that
    /// the result is distance-realizing on the probe times `{0, 1, 10}`.
    pub fn new(base: DiscreteMeasure, rays: Vec<BaseRay>, p: f64) -> Result<Self> {
        if rays.len() != base.len() {
            return Err(Error::Domain(format!(
                "{} base rays for {} atoms",
                rays.len(),
                base.len()
            )));
        }
        for (i, (ray, x)) in rays.iter().zip(base.support()).enumerate() {
            if ray.origin() != x || (ray.speed() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidRay {
                    index: i,
                    reason: "base ray must start at its atom with unit speed".into(),
                });
            }
        }
        let ray = Self { base, rays, p };
        for (s, t) in [(0.0, 1.0), (1.0, 10.0), (0.0, 10.0)] {
            let d = wasserstein(&ray.eval(s)?, &ray.eval(t)?, p)?;
            if (d - (t - s)).abs() > GEODESIC_TOL {
                return Err(Error::InvalidRay {
                    index: 0,
                    reason: format!("W_p(γ({s}), γ({t})) = {d}, expected {}", t - s),
                });
            }
        }
        Ok(ray)
    }

    /// `t ↦ δ_{x + t v}`.
    pub fn dirac(origin: BasePoint, direction: Vec<f64>, p: f64) -> Result<Self> {
        let ray = BaseRay::unit(origin.clone(), direction)?;
        Ok(Self { base: DiscreteMeasure::dirac(origin), rays: vec![ray], p })
    }

    pub fn base(&self) -> &DiscreteMeasure {
        &self.base
    }

    pub fn rays(&self) -> &[BaseRay] {
        &self.rays
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, t: f64) -> Result<DiscreteMeasure> {
        let points = self.rays.iter().map(|r| r.eval(t)).collect::<Result<Vec<_>>>()?;
        DiscreteMeasure::from_atoms(points, self.base.weights().to_vec())
    }

    /// Stable identity used for memoization.
    pub(crate) fn fingerprint(&self) -> Vec<u64> {
        let mut key = self.base.fingerprint();
        for r in &self.rays {
            key.extend(r.direction().iter().map(|c| c.to_bits()));
        }
        key.push(self.p.to_bits());
        key
    }
}

/// Richardson extrapolation for samples taken at `t, 2t, 4t, …` of a quantity
/// with an expansion `L + c₁/t + c₂/t² + …`. Two elimination levels are used.
///
/// The expansion only holds once `t` is large against the problem's own
/// scale, so samples before `start` are recorded but not extrapolated.
#[derive(Debug)]
struct Richardson {
    start: f64,
    levels: [Vec<f64>; 3],
    estimates: Vec<f64>,
    last_raw: f64,
}

impl Richardson {
    fn new(scale: f64) -> Self {
        Self {
            start: 4.0 * scale.max(1.0),
            levels: Default::default(),
            estimates: Vec::new(),
            last_raw: f64::NAN,
        }
    }

    fn push(&mut self, t: f64, g: f64) {
        self.last_raw = g;
        if t < self.start {
            return;
        }
        self.levels[0].push(g);
        let l0 = &self.levels[0];
        if l0.len() >= 2 {
            let v = 2.0 * l0[l0.len() - 1] - l0[l0.len() - 2];
            self.levels[1].push(v);
        }
        let l1 = &self.levels[1];
        if l1.len() >= 2 {
            let v = (4.0 * l1[l1.len() - 1] - l1[l1.len() - 2]) / 3.0;
            self.levels[2].push(v);
        }
        let est = self.levels.iter().rev().find_map(|l| l.last().copied()).unwrap();
        self.estimates.push(est);
    }

    fn estimate(&self) -> f64 {
        self.estimates.last().copied().unwrap_or(self.last_raw)
    }

    /// Change between the last two estimates; infinite until three samples
    /// have been extrapolated.
    fn tail_gap(&self) -> f64 {
        match self.estimates.as_slice() {
            [_, .., a, b] => (b - a).abs(),
            _ => f64::INFINITY,
        }
    }
}

/// Truncated evaluation of `b_γ(ω) = lim_t [W_p(ω, γ(t)) − t]`.
///
/// `converged` certifies only that the observed change of the extrapolated
/// value between the last two doublings is at most `tol`; the true tail is
/// not bounded.
#[derive(Clone, Debug, Serialize)]
pub struct BusemannEstimate {
    /// Extrapolated limit.
    pub value: f64,
    /// Raw `W_p(ω, γ(T)) − T` at the truncation time.
    pub last_sample: f64,
    pub truncation: f64,
    pub tail_gap: f64,
    pub converged: bool,
    /// `(t, W_p(ω, γ(t)) − t)`, non-increasing in `t`.
    pub samples: Vec<(f64, f64)>,
}

/// Default stopping tolerance for Busemann and dl_C limits.
pub const LIMIT_TOL: f64 = 1e-6;
/// Default truncation time.
pub const LIMIT_T_MAX: f64 = 1e6;

/// Evaluates `g(t) = W_p(ω, γ(t)) − t` at `t = 1, 2, 4, …` until the
/// extrapolated value moves by at most `tol` or `t` would exceed `t_max`.
pub fn busemann_estimate(
    ray: &WassersteinRay,
    omega: &DiscreteMeasure,
    tol: f64,
    t_max: f64,
) -> Result<BusemannEstimate> {
    if !(tol > 0.0) || !(t_max >= 1.0) {
        return Err(Error::Domain(format!("need tol > 0 and t_max >= 1 (tol={tol}, t_max={t_max})")));
    }
    check_dim(ray.base.dim(), omega.dim())?;
    let mut rich = Richardson::new(wasserstein(omega, ray.base(), ray.p)?);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut t = 1.0;
    let mut converged = false;
    while t <= t_max {
        let g = wasserstein(omega, &ray.eval(t)?, ray.p)? - t;
        if let Some(&(_, prev)) = samples.last() {
            // Triangle inequality: g(2t) ≤ g(t).
            if g > prev + 1e-9 + 1e-15 * t {
                return Err(Error::NumericalInconsistency(format!(
                    "Busemann samples increase at t={t}: {prev} -> {g}"
                )));
            }
        }
        samples.push((t, g));
        rich.push(t, g);
        if rich.tail_gap() <= tol {
            converged = true;
            break;
        }
        t *= 2.0;
    }
    let &(truncation, last_sample) = samples.last().expect("t_max >= 1 gives one sample");
    Ok(BusemannEstimate {
        value: rich.estimate(),
        last_sample,
        truncation,
        tail_gap: rich.tail_gap(),
        converged,
        samples,
    })
}

/// How a sphere candidate was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereStrategy {
    /// Rigid translation by `r·u`; exact distance `r`.
    Translation,
    /// A single atom displaced.
    AtomMove,
    /// Point at arc length `r` on the geodesic to a random measure.
    Geodesic,
    /// Supplied by a field's own analytic ray or geodesic.
    Analytic,
}

/// A measure near the sphere of radius `r` with its solver-certified distance.
#[derive(Clone, Debug, Serialize)]
pub struct SphereCandidate {
    pub measure: DiscreteMeasure,
    pub distance: f64,
    pub strategy: SphereStrategy,
}

/// Certified distances must fall in `[0.9 r, 1.1 r]`.
pub const SPHERE_BAND: (f64, f64) = (0.9, 1.1);

pub(crate) fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::base_space::norm(&v);
        if n > 1e-6 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn in_band(d: f64, r: f64) -> bool {
    d >= SPHERE_BAND.0 * r && d <= SPHERE_BAND.1 * r
}

/// Draws `budget` candidate measures around `omega` at distance about `r`,
/// cycling through translation, single-atom moves, and geodesics toward
/// random measures. Every returned candidate carries its exact distance.
pub fn sphere_sample<R: Rng + ?Sized>(
    omega: &DiscreteMeasure,
    r: f64,
    p: f64,
    budget: usize,
    rng: &mut R,
) -> Result<Vec<SphereCandidate>> {
    if !(r > 0.0) || budget == 0 {
        return Err(Error::Domain(format!("need r > 0 and budget >= 1 (r={r}, budget={budget})")));
    }
    let dim = omega.dim();
    let mut out = Vec::with_capacity(budget);
    for k in 0..budget {
        match k % 3 {
            0 => {
                let u = random_unit(dim, rng);
                let v: Vec<f64> = u.iter().map(|c| c * r).collect();
                let m = omega.translate(&v)?;
                let distance = wasserstein(omega, &m, p)?;
                out.push(SphereCandidate { measure: m, distance, strategy: SphereStrategy::Translation });
            }
            1 => {
                let i = rng.gen_range(0..omega.len());
                let u = random_unit(dim, rng);
                let mut scale = r / omega.weights()[i].powf(1.0 / p);
                for _ in 0..6 {
                    let mut points = omega.support().to_vec();
                    points[i] = points[i].offset(&u, scale);
                    let m = DiscreteMeasure::from_atoms(points, omega.weights().to_vec())?;
                    let distance = wasserstein(omega, &m, p)?;
                    if in_band(distance, r) {
                        out.push(SphereCandidate { measure: m, distance, strategy: SphereStrategy::AtomMove });
                        break;
                    }
                    if distance <= 0.0 {
                        break;
                    }
                    scale *= r / distance;
                }
            }
            _ => {
                let points = omega
                    .support()
                    .iter()
                    .map(|x| {
                        let u = random_unit(dim, rng);
                        x.offset(&u, 3.0 * r * rng.gen_range(0.5..1.5))
                    })
                    .collect::<Vec<_>>();
                let raw: Vec<f64> = (0..points.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let target = DiscreteMeasure::from_atoms(points, raw.iter().map(|w| w / total).collect())?;
                let path = displacement_path(omega, &target, p)?;
                if path.length() >= r {
                    let m = path.eval(r)?;
                    let distance = wasserstein(omega, &m, p)?;
                    if in_band(distance, r) {
                        out.push(SphereCandidate { measure: m, distance, strategy: SphereStrategy::Geodesic });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::SphereSamplingFailed { radius: r });
    }
    Ok(out)
}

/// Parameters of [`cs_diagnostic`].
#[derive(Clone, Debug, Serialize)]
pub struct CsParams {
    pub sigma: f64,
    /// First sequence index probed.
    pub start: usize,
    /// Number of indices probed (`N`).
    pub count: usize,
    pub eps: f64,
    /// Cluster size `K`: PASS needs a point with `K − 1` neighbours within `eps`.
    pub cluster: usize,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CsReport {
    pub verdict: Verdict,
    pub params: CsParams,
    /// Largest neighbour count within `eps`.
    pub max_neighbors: usize,
    pub min_offdiag: f64,
    pub matrix: Vec<Vec<f64>>,
    pub label: &'static str,
}

/// Points `μⁿ(σ)` where `μⁿ` is the displacement geodesic from `omega0` to
/// `seq(n)`, for `n = start .. start + count`.
pub fn sphere_points<F>(
    seq: F,
    omega0: &DiscreteMeasure,
    sigma: f64,
    start: usize,
    count: usize,
    p: f64,
) -> Result<Vec<DiscreteMeasure>>
where
    F: Fn(usize) -> Result<DiscreteMeasure>,
{
    (start..start + count)
        .map(|n| {
            let target = seq(n)?;
            let path = displacement_path(omega0, &target, p)?;
            if path.length() <= sigma {
                return Err(Error::SequenceTooClose { index: n, sigma });
            }
            path.eval(sigma)
        })
        .collect()
}

/// Symmetric matrix of pairwise `W_p`, upper triangle computed.
pub fn pairwise_distances(points: &[DiscreteMeasure], p: f64) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let mut mat = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = wasserstein(&points[i], &points[j], p)?;
            mat[i][j] = d;
            mat[j][i] = d;
        }
    }
    Ok(mat)
}

/// Heuristic check of the (CS) condition for an escaping sequence.
///
/// A cluster of `K` sphere points within `eps` of a common point stands in
/// for a convergent subsequence. This is a finite-sample proxy, not a proof
/// of relative compactness.
pub fn cs_diagnostic<F>(seq: F, omega0: &DiscreteMeasure, params: CsParams) -> Result<CsReport>
where
    F: Fn(usize) -> Result<DiscreteMeasure>,
{
    if !(params.sigma > 0.0) || params.cluster < 2 || params.count < params.cluster {
        return Err(Error::Domain("need sigma > 0 and N >= K >= 2".into()));
    }
    let points = sphere_points(seq, omega0, params.sigma, params.start, params.count, params.p)?;
    let matrix = pairwise_distances(&points, params.p)?;
    let n = points.len();
    let mut min_offdiag = f64::INFINITY;
    let mut max_neighbors = 0;
    for (i, row) in matrix.iter().enumerate() {
        let mut count = 0;
        for (j, &d) in row.iter().enumerate() {
            if i != j {
                min_offdiag = min_offdiag.min(d);
                if d <= params.eps {
                    count += 1;
                }
            }
        }
        max_neighbors = max_neighbors.max(count);
    }
    debug_assert!(n >= 2);
    let verdict = if max_neighbors + 1 >= params.cluster { Verdict::Pass } else { Verdict::Fail };
    Ok(CsReport {
        verdict,
        params,
        max_neighbors,
        min_offdiag,
        matrix,
        label: "heuristic diagnostic: finite cluster proxy for convergent subsequences",
    })
}

/// Truncated evaluation of `lim_n [W_p(ω, H_n) − c_n]`.
#[derive(Clone, Debug, Serialize)]
pub struct DlcEstimate {
    /// Extrapolated limit.
    pub value: f64,
    /// Raw `a_n` at the last probed index.
    pub last_sample: f64,
    pub converged: bool,
    pub tail_gap: f64,
    /// `(n, a_n)`.
    pub trace: Vec<(u64, f64)>,
}

/// `a_n = min_{h ∈ H_n} W_p(ω, h) − c_n` at `n = 1, 2, 4, … ≤ n_max`.
pub fn dlc_limit(
    seq: &MeasureSetSequence,
    omega: &DiscreteMeasure,
    p: f64,
    tol: f64,
    n_max: u64,
) -> Result<DlcEstimate> {
    if n_max < 2 || !(tol > 0.0) {
        return Err(Error::Domain(format!("need n_max >= 2 and tol > 0 (n_max={n_max})")));
    }
    let mut rich: Option<Richardson> = None;
    let mut trace = Vec::new();
    let mut n = 1u64;
    let mut converged = false;
    while n <= n_max {
        let set = seq.set(n)?;
        let mut best = f64::INFINITY;
        for h in &set {
            best = best.min(wasserstein(omega, h, p)?);
        }
        let a = best - seq.shift(n);
        trace.push((n, a));
        let rich = rich.get_or_insert_with(|| Richardson::new(best));
        rich.push(n as f64, a);
        if rich.tail_gap() <= tol {
            converged = true;
            break;
        }
        n *= 2;
    }
    let rich = rich.expect("n_max >= 2 gives at least one sample");
    Ok(DlcEstimate {
        value: rich.estimate(),
        last_sample: trace.last().unwrap().1,
        converged,
        tail_gap: rich.tail_gap(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::validate_measure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m1(pts: &[f64], w: &[f64]) -> DiscreteMeasure {
        validate_measure(pts.iter().map(|&x| vec![x]).collect(), w.to_vec()).unwrap()
    }

    fn pt(c: &[f64]) -> BasePoint {
        BasePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn dirac_path() {
        let path = displacement_path(&m1(&[0.0], &[1.0]), &m1(&[4.0], &[1.0]), 2.0).unwrap();
        assert_eq!(path.length(), 4.0);
        assert_eq!(path.eval(2.0).unwrap(), m1(&[2.0], &[1.0]));
        assert_eq!(path.eval(0.0).unwrap(), m1(&[0.0], &[1.0]));
        assert_eq!(path.eval(4.0).unwrap(), m1(&[4.0], &[1.0]));
        assert!(matches!(path.eval(4.5), Err(Error::Domain(_))));
        assert!(matches!(path.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn two_atom_midpoint() {
        let mu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let nu = m1(&[1.0, 3.0], &[0.5, 0.5]);
        let path = displacement_path(&mu, &nu, 2.0).unwrap();
        let mid = path.eval(path.length() / 2.0).unwrap();
        assert!(wasserstein(&mid, &m1(&[0.5, 2.5], &[0.5, 0.5]), 2.0).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_and_p1_flags() {
        let mu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let path = displacement_path(&mu, &mu, 2.0).unwrap();
        assert!(path.degenerate);
        assert_eq!(path.eval(0.0).unwrap(), mu);
        assert!(displacement_path(&mu, &m1(&[5.0], &[1.0]), 1.0).unwrap().non_unique);
    }

    #[test]
    fn ray_rejects_non_geodesic() {
        let base = m1(&[0.0, 1.0], &[0.5, 0.5]);
        let rays = vec![
            BaseRay::unit(pt(&[0.0]), vec![-1.0]).unwrap(),
            BaseRay::unit(pt(&[1.0]), vec![1.0]).unwrap(),
        ];
        // Atoms moving apart keep their monotone partners: span = t.
        assert!(WassersteinRay::new(base.clone(), rays, 2.0).is_ok());
        let rays = vec![
            BaseRay::unit(pt(&[0.0]), vec![1.0]).unwrap(),
            BaseRay::unit(pt(&[1.0]), vec![-1.0]).unwrap(),
        ];
        // Atoms crossing: the monotone coupling swaps partners, span < t.
        assert!(matches!(WassersteinRay::new(base, rays, 2.0), Err(Error::InvalidRay { .. })));
    }

    #[test]
    fn busemann_on_own_ray_is_zero() {
        let base = m1(&[0.0, 3.0], &[0.25, 0.75]);
        let rays = base
            .support()
            .iter()
            .map(|x| BaseRay::unit(x.clone(), vec![1.0]).unwrap())
            .collect();
        let ray = WassersteinRay::new(base.clone(), rays, 2.0).unwrap();
        let est = busemann_estimate(&ray, &base, 1e-6, 1e6).unwrap();
        assert!(est.converged);
        assert!(est.value.abs() <= 1e-12);
        assert!(est.samples.iter().all(|&(_, g)| g.abs() <= 1e-9));

        // ω = γ(s) gives b = −s.
        let on_ray = ray.eval(2.5).unwrap();
        let est = busemann_estimate(&ray, &on_ray, 1e-6, 1e6).unwrap();
        assert!((est.value + 2.5).abs() <= 1e-6);
    }

    #[test]
    fn busemann_dirac_ray_closed_form() {
        let v = vec![0.6, 0.8];
        let ray = WassersteinRay::dirac(BasePoint::origin(2), v.clone(), 2.0).unwrap();
        let omega =
            validate_measure(vec![vec![1.0, -2.0], vec![3.0, 0.5], vec![-1.0, 1.0]], vec![0.2, 0.5, 0.3])
                .unwrap();
        let closed = -omega.integrate(|x| x.dot(&v));
        let est = busemann_estimate(&ray, &omega, 1e-9, 1e4).unwrap();
        assert!((est.value - closed).abs() <= 1e-6, "{} vs {closed}", est.value);
        for w in est.samples.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9);
        }
    }

    #[test]
    fn busemann_argument_checks() {
        let ray = WassersteinRay::dirac(BasePoint::origin(1), vec![1.0], 2.0).unwrap();
        let w = m1(&[0.0], &[1.0]);
        assert!(busemann_estimate(&ray, &w, 0.0, 10.0).is_err());
        assert!(busemann_estimate(&ray, &w, 1e-6, 0.5).is_err());
    }

    #[test]
    fn sphere_translation_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let omega = DiscreteMeasure::dirac(BasePoint::origin(2));
        let c = sphere_sample(&omega, 1.0, 2.0, 1, &mut rng).unwrap();
        assert_eq!(c[0].strategy, SphereStrategy::Translation);
        assert!((c[0].distance - 1.0).abs() < 1e-12);
        let x = &c[0].measure.support()[0];
        assert!((crate::base_space::norm(x.coords()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_samples_are_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let omega = validate_measure(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, 0.5]], vec![0.2, 0.3, 0.5]).unwrap();
        let cands = sphere_sample(&omega, 0.5, 2.0, 30, &mut rng).unwrap();
        assert!(cands.len() >= 10);
        for c in &cands {
            assert!(in_band(c.distance, 0.5));
            let d = wasserstein(&omega, &c.measure, 2.0).unwrap();
            assert!((d - c.distance).abs() < 1e-12);
            if c.strategy == SphereStrategy::Translation {
                assert!((c.distance - 0.5).abs() < 1e-10);
            }
        }
        assert!(cands.iter().any(|c| c.strategy == SphereStrategy::AtomMove));
        assert!(cands.iter().any(|c| c.strategy == SphereStrategy::Geodesic));
    }

    #[test]
    fn single_atom_move_two_by_two() {
        // Brute force on the 2x2 instance: identity pairing costs ½·2² = 2.
        let omega = m1(&[0.0, 4.0], &[0.5, 0.5]);
        let moved = m1(&[0.0, 6.0], &[0.5, 0.5]);
        let b = crate::transport::brute_force_oracle(&omega, &moved, 2.0).unwrap();
        assert!((b.value - 2f64.sqrt()).abs() < 1e-12);
        assert!((wasserstein(&omega, &moved, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cs_on_ray_passes() {
        let ray = WassersteinRay::dirac(BasePoint::origin(2), vec![1.0, 0.0], 2.0).unwrap();
        let params = CsParams { sigma: 1.0, start: 2, count: 6, eps: 1e-9, cluster: 3, p: 2.0 };
        let report = cs_diagnostic(|n| ray.eval(n as f64), &ray.eval(0.0).unwrap(), params).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.min_offdiag <= 1e-12);
    }

    #[test]
    fn cs_rejects_close_elements() {
        let ray = WassersteinRay::dirac(BasePoint::origin(1), vec![1.0], 2.0).unwrap();
        let params = CsParams { sigma: 2.0, start: 1, count: 4, eps: 0.1, cluster: 2, p: 2.0 };
        let err = cs_diagnostic(|n| ray.eval(n as f64), &ray.eval(0.0).unwrap(), params).unwrap_err();
        assert!(matches!(err, Error::SequenceTooClose { index: 1, .. }));
    }

    #[test]
    fn dlc_constant_set() {
        let w = m1(&[0.0, 1.0], &[0.5, 0.5]);
        let w2 = w.clone();
        let seq = MeasureSetSequence::new(move |_| vec![w2.clone()], |_| 0.0);
        let est = dlc_limit(&seq, &w, 2.0, 1e-9, 64).unwrap();
        assert!(est.trace.iter().all(|&(_, a)| a.abs() < 1e-12));
        assert!(est.converged);
    }

    #[test]
    fn dlc_ex3_mixture_at_dirac_one() {
        // W₂(δ_1, ω_n)² = (1 − n⁻²)·1 + n⁻²(n² − 1)² = n² − 1.
        let seq = MeasureSetSequence::new(
            |n| {
                let n = n as f64;
                let w = 1.0 / (n * n);
                vec![m1(&[0.0, n * n], &[1.0 - w, w])]
            },
            |n| n as f64,
        );
        let omega = m1(&[1.0], &[1.0]);
        let est = dlc_limit(&seq, &omega, 2.0, 1e-8, 1 << 12).unwrap();
        for &(n, a) in &est.trace {
            let n = n as f64;
            assert!((a - ((n * n - 1.0).sqrt() - n)).abs() < 1e-10);
        }
        assert!(est.value.abs() < 1e-6);
    }

    #[test]
    fn dlc_rejects_empty_sets() {
        let seq = MeasureSetSequence::new(|_| vec![], |_| 0.0);
        let w = m1(&[0.0], &[1.0]);
        assert_eq!(dlc_limit(&seq, &w, 2.0, 1e-6, 4).unwrap_err(), Error::EmptyCollection("H_n"));
    }
}
