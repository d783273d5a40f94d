//! Fields on the space of discrete measures and tests of the eikonal
//! equation `|∂U| = 1` for them.
//!
//! Every infimum over a sphere or sublevel set is replaced by a witness search
//! over certified candidates: random sphere samples plus, when the field has
//! one, an analytic candidate (the lifted negative gradient ray, or the
//! geodesic toward a distance target). A negative outcome is reported as
//! `FAIL` only for fields where the analytic candidate is known to be optimal
//! or where no drop is possible at all; otherwise it is `INCONCLUSIVE`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::base_space::{base_negative_gradient_ray, BaseField, BaseFieldConfig};
use crate::error::{check_dim, Error, Result};
use crate::measure::{DiscreteMeasure, MeasureSetSequence};
use crate::transport::wasserstein;
use crate::verdict::Verdict;
use crate::wgeom::{
    busemann_estimate, displacement_path, dlc_limit, sphere_sample, SphereCandidate, SphereStrategy,
    WassersteinRay,
};

/// Pairs closer than this are skipped by slope and Lipschitz probes.
pub const MIN_PAIR_DIST: f64 = 1e-10;
/// Default calibration slack for sphere tests.
pub const SPHERE_EPS: f64 = 1e-3;
/// Default distance slack for analytic dl_G witnesses.
pub const DLG_EPS: f64 = 1e-6;

type Memo = Arc<Mutex<HashMap<Vec<u64>, f64>>>;

#[derive(Clone)]
pub enum FieldKind {
    /// `ω ↦ ∫ u dω`.
    Lifted(BaseField),
    /// `ω ↦ W_p(ω, target) − offset`.
    DistanceTo { target: DiscreteMeasure, offset: f64 },
    /// `ω ↦ b_γ(ω)`, memoized per `(γ, ω)`.
    Busemann { ray: WassersteinRay, tol: f64, t_max: f64, memo: Memo },
    /// `ω ↦ lim_n [W_p(ω, H_n) − c_n]`.
    DlcLimit { seq: MeasureSetSequence, tol: f64, n_max: u64 },
    InfOf(Vec<MeasureField>),
    Constant(f64),
}

/// A real function on discrete measures, 1-Lipschitz for `W_p`.
#[derive(Clone)]
pub struct MeasureField {
    kind: FieldKind,
    p: f64,
}

impl fmt::Debug for MeasureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FieldKind::Lifted(u) => write!(f, "Lifted({u:?}, p={})", self.p),
            FieldKind::DistanceTo { target, offset } => {
                write!(f, "DistanceTo({target:?}, offset={offset}, p={})", self.p)
            }
            FieldKind::Busemann { ray, .. } => write!(f, "Busemann(base={:?}, p={})", ray.base(), self.p),
            FieldKind::DlcLimit { n_max, .. } => write!(f, "DlcLimit(n_max={n_max}, p={})", self.p),
            FieldKind::InfOf(v) => f.debug_tuple("InfOf").field(v).finish(),
            FieldKind::Constant(c) => write!(f, "Constant({c})"),
        }
    }
}

/// `û(ω) = Σ λ_i u(x_i)`.
pub fn lift(u: BaseField, p: f64) -> MeasureField {
    MeasureField { kind: FieldKind::Lifted(u), p }
}

impl MeasureField {
    pub fn constant(c: f64, p: f64) -> Self {
        Self { kind: FieldKind::Constant(c), p }
    }

    pub fn distance_to(target: DiscreteMeasure, offset: f64, p: f64) -> Self {
        Self { kind: FieldKind::DistanceTo { target, offset }, p }
    }

    pub fn busemann(ray: WassersteinRay, tol: f64, t_max: f64) -> Self {
        let p = ray.p();
        Self {
            kind: FieldKind::Busemann { ray, tol, t_max, memo: Arc::new(Mutex::new(HashMap::new())) },
            p,
        }
    }

    pub fn dlc_limit(seq: MeasureSetSequence, p: f64, tol: f64, n_max: u64) -> Self {
        Self { kind: FieldKind::DlcLimit { seq, tol, n_max }, p }
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Whether a failed witness search is conclusive for this field: the
    /// analytic candidate of a lifted field calibrates exactly whenever a
    /// calibrated direction exists, and a constant never drops.
    pub fn has_complete_candidates(&self) -> bool {
        match &self.kind {
            FieldKind::Lifted(u) => u.has_analytic_ray(),
            FieldKind::Constant(_) => true,
            FieldKind::InfOf(v) => v.iter().all(|f| f.has_complete_candidates()),
            _ => false,
        }
    }
}

/// Evaluates `U(ω)`.
pub fn eval_field(field: &MeasureField, omega: &DiscreteMeasure) -> Result<f64> {
    match &field.kind {
        FieldKind::Lifted(u) => {
            check_dim(u.dim(), omega.dim())?;
            Ok(omega.integrate(|x| u.eval_unchecked(x)))
        }
        FieldKind::DistanceTo { target, offset } => Ok(wasserstein(omega, target, field.p)? - offset),
        FieldKind::Busemann { ray, tol, t_max, memo } => {
            let mut key = ray.fingerprint();
            key.extend(omega.fingerprint());
            if let Some(&v) = memo.lock().unwrap().get(&key) {
                return Ok(v);
            }
            let v = busemann_estimate(ray, omega, *tol, *t_max)?.value;
            memo.lock().unwrap().insert(key, v);
            Ok(v)
        }
        FieldKind::DlcLimit { seq, tol, n_max } => Ok(dlc_limit(seq, omega, field.p, *tol, *n_max)?.value),
        FieldKind::InfOf(fields) => {
            let mut best = f64::INFINITY;
            for f in fields {
                best = best.min(eval_field(f, omega)?);
            }
            Ok(best)
        }
        FieldKind::Constant(c) => Ok(*c),
    }
}

/// Pointwise infimum of fields sharing an exponent; a singleton is returned
/// unchanged.
pub fn inf_of_fields(mut fields: Vec<MeasureField>) -> Result<MeasureField> {
    let p = fields.first().ok_or(Error::EmptyCollection("field list"))?.p;
    if fields.iter().any(|f| f.p != p) {
        return Err(Error::Domain("fields in an infimum must share the exponent p".into()));
    }
    if fields.len() == 1 {
        return Ok(fields.pop().unwrap());
    }
    Ok(MeasureField { kind: FieldKind::InfOf(fields), p })
}

/// `max |U(a) − U(b)| / W_p(a, b)` over pairs at distance above
/// [`MIN_PAIR_DIST`].
pub fn lipschitz_probe(field: &MeasureField, pairs: &[(DiscreteMeasure, DiscreteMeasure)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyCollection("probe pairs"));
    }
    let mut best: Option<f64> = None;
    for (a, b) in pairs {
        let d = wasserstein(a, b, field.p)?;
        if d <= MIN_PAIR_DIST {
            continue;
        }
        let ratio = (eval_field(field, a)? - eval_field(field, b)?).abs() / d;
        best = Some(best.map_or(ratio, |r: f64| r.max(ratio)));
    }
    best.ok_or(Error::NoUsablePairs)
}

/// Unit-speed negative gradient ray of a lifted field from `omega`: every
/// atom follows its own base negative gradient ray.
pub fn lifted_ray(field: &MeasureField, omega: &DiscreteMeasure) -> Result<WassersteinRay> {
    let FieldKind::Lifted(u) = &field.kind else {
        return Err(Error::UnsupportedField);
    };
    check_dim(u.dim(), omega.dim())?;
    let rays = omega
        .support()
        .iter()
        .map(|x| base_negative_gradient_ray(u, x))
        .collect::<Result<Vec<_>>>()?;
    WassersteinRay::new(omega.clone(), rays, field.p)
}

/// Candidates at arc length `r` from `omega` along a known descent direction.
pub fn analytic_candidates(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    r: f64,
) -> Result<Vec<SphereCandidate>> {
    let mut out = Vec::new();
    match &field.kind {
        FieldKind::Lifted(u) if u.has_analytic_ray() => {
            let m = lifted_ray(field, omega)?.eval(r)?;
            let distance = wasserstein(omega, &m, field.p)?;
            out.push(SphereCandidate { measure: m, distance, strategy: SphereStrategy::Analytic });
        }
        FieldKind::DistanceTo { target, .. } => {
            let path = displacement_path(omega, target, field.p)?;
            if path.length() > r {
                let m = path.eval(r)?;
                let distance = wasserstein(omega, &m, field.p)?;
                out.push(SphereCandidate { measure: m, distance, strategy: SphereStrategy::Analytic });
            }
        }
        FieldKind::InfOf(fields) => {
            let values = fields.iter().map(|f| eval_field(f, omega)).collect::<Result<Vec<_>>>()?;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            for (f, v) in fields.iter().zip(values) {
                if v <= min + 1e-12 {
                    out.extend(analytic_candidates(f, omega, r)?);
                }
            }
        }
        _ => {}
    }
    Ok(out)
}

/// A replayable calibration witness.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub measure: DiscreteMeasure,
    /// Solver-certified `W_p(ω, measure)`.
    pub distance: f64,
    pub value_at_center: f64,
    pub value_at_witness: f64,
    pub strategy: SphereStrategy,
}

impl Witness {
    pub fn drop(&self) -> f64 {
        self.value_at_center - self.value_at_witness
    }

    /// `(U(ω) − U(x))⁺ / d`.
    pub fn ratio(&self) -> f64 {
        self.drop().max(0.0) / self.distance
    }

    /// `d − (U(ω) − U(x))`.
    pub fn gap(&self) -> f64 {
        self.distance - self.drop()
    }

    /// Recomputes the witness from scratch and returns the ratio.
    pub fn replay(&self, field: &MeasureField, omega: &DiscreteMeasure) -> Result<f64> {
        let d = wasserstein(omega, &self.measure, field.p)?;
        let drop = eval_field(field, omega)? - eval_field(field, &self.measure)?;
        Ok(drop.max(0.0) / d)
    }
}

fn to_witnesses(
    field: &MeasureField,
    center_value: f64,
    cands: Vec<SphereCandidate>,
) -> Result<Vec<Witness>> {
    cands
        .into_iter()
        .map(|c| {
            Ok(Witness {
                value_at_witness: eval_field(field, &c.measure)?,
                measure: c.measure,
                distance: c.distance,
                value_at_center: center_value,
                strategy: c.strategy,
            })
        })
        .collect()
}

/// Candidates around `omega` at radius `r`: analytic ones first, then
/// `budget` sphere samples. `None` when sampling failed and there is no
/// analytic candidate.
fn candidates_at(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    center_value: f64,
    r: f64,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<Witness>>> {
    let mut cands = analytic_candidates(field, omega, r)?;
    match sphere_sample(omega, r, field.p, budget, rng) {
        Ok(s) => cands.extend(s),
        Err(Error::SphereSamplingFailed { .. }) if !cands.is_empty() => {}
        Err(Error::SphereSamplingFailed { .. }) => return Ok(None),
        Err(e) => return Err(e),
    }
    to_witnesses(field, center_value, cands).map(Some)
}

/// Index of the best candidate by `score`, preferring lower indices within
/// `1e-12`.
fn best_by<T, F: Fn(&T) -> f64>(items: &[T], score: F) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, it) in items.iter().enumerate() {
        let s = score(it);
        if best.is_none_or(|(_, b)| s > b + 1e-12) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// A certified lower bound on a slope.
#[derive(Clone, Debug, Serialize)]
pub struct SlopeEstimate {
    pub value: f64,
    pub radii: Vec<f64>,
    /// Radii at which sampling produced no candidate.
    pub skipped_radii: Vec<f64>,
    pub witness: Option<Witness>,
}

/// Lower bound on `|∂U|(ω) = limsup (U(ω) − U(x))⁺ / W_p(ω, x)` from sphere
/// candidates on a decreasing radius schedule.
pub fn local_slope_estimate(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    radii: &[f64],
    budget: usize,
    seed: u64,
) -> Result<SlopeEstimate> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("radii must be positive and strictly decreasing".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = eval_field(field, omega)?;
    let mut all = Vec::new();
    let mut skipped = Vec::new();
    for &r in radii {
        match candidates_at(field, omega, center, r, budget, &mut rng)? {
            Some(w) => all.extend(w),
            None => skipped.push(r),
        }
    }
    let witness = best_by(&all, Witness::ratio).map(|i| all.swap_remove(i));
    Ok(SlopeEstimate {
        value: witness.as_ref().map_or(0.0, Witness::ratio),
        radii: radii.to_vec(),
        skipped_radii: skipped,
        witness,
    })
}

/// Lower bound on the global slope `sup_x (U(ω) − U(x))⁺ / W_p(ω, x)` over a
/// dictionary of measures.
pub fn global_slope_estimate(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    dictionary: &[DiscreteMeasure],
) -> Result<SlopeEstimate> {
    let center = eval_field(field, omega)?;
    let mut all = Vec::new();
    for m in dictionary {
        let d = wasserstein(omega, m, field.p)?;
        if d <= MIN_PAIR_DIST {
            continue;
        }
        all.push(Witness {
            value_at_witness: eval_field(field, m)?,
            measure: m.clone(),
            distance: d,
            value_at_center: center,
            strategy: SphereStrategy::Analytic,
        });
    }
    let i = best_by(&all, Witness::ratio).ok_or(Error::NoUsablePairs)?;
    let witness = all.swap_remove(i);
    Ok(SlopeEstimate { value: witness.ratio(), radii: Vec::new(), skipped_radii: Vec::new(), witness: Some(witness) })
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereTestOptions {
    pub radii: Vec<f64>,
    pub eps: f64,
    pub budget: usize,
    pub seed: u64,
}

impl Default for SphereTestOptions {
    fn default() -> Self {
        Self { radii: vec![1.0, 0.5, 0.1], eps: SPHERE_EPS, budget: 12, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusOutcome {
    pub radius: f64,
    pub verdict: Verdict,
    /// Smallest `d − (U(ω) − U(x))` over candidates.
    pub best_gap: f64,
    pub candidates: usize,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereTestReport {
    pub verdict: Verdict,
    pub radii: Vec<RadiusOutcome>,
    pub params: SphereTestOptions,
}

impl SphereTestReport {
    pub fn to_json(&self) -> Value {
        envelope("viscosity_sphere_test", self.verdict, &self.radii, &self.params)
    }
}

/// `{"op", "verdict", "witness", "params"}` record shared by every test.
pub fn envelope<W: Serialize, P: Serialize>(op: &str, verdict: Verdict, witness: &W, params: &P) -> Value {
    json!({
        "op": op,
        "verdict": verdict,
        "witness": serde_json::to_value(witness).unwrap_or(Value::Null),
        "params": serde_json::to_value(params).unwrap_or(Value::Null),
    })
}

/// Searches, at every radius `r`, for `x` near the sphere `∂B_r(ω)` with
/// `U(ω) − U(x) ≥ d(ω, x)(1 − eps)`. The reverse inequality holds for any
/// 1-Lipschitz field, so near-calibration is all that is searched.
pub fn viscosity_sphere_test(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    opts: &SphereTestOptions,
) -> Result<SphereTestReport> {
    if opts.radii.is_empty() || opts.radii.iter().any(|&r| !(r > 0.0)) || opts.budget == 0 {
        return Err(Error::Domain("radii and budget must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let center = eval_field(field, omega)?;
    let negative = if field.has_complete_candidates() { Verdict::Fail } else { Verdict::Inconclusive };
    let mut outcomes = Vec::with_capacity(opts.radii.len());
    for &r in &opts.radii {
        let Some(mut cands) = candidates_at(field, omega, center, r, opts.budget, &mut rng)? else {
            outcomes.push(RadiusOutcome {
                radius: r,
                verdict: Verdict::Inconclusive,
                best_gap: f64::INFINITY,
                candidates: 0,
                witness: None,
            });
            continue;
        };
        let n = cands.len();
        let i = best_by(&cands, |w| -w.gap()).expect("non-empty candidates");
        let best = cands.swap_remove(i);
        let verdict = if best.drop() >= best.distance * (1.0 - opts.eps) { Verdict::Pass } else { negative };
        outcomes.push(RadiusOutcome {
            radius: r,
            verdict,
            best_gap: best.gap(),
            candidates: n,
            witness: Some(best),
        });
    }
    Ok(SphereTestReport {
        verdict: Verdict::all(outcomes.iter().map(|o| o.verdict)),
        radii: outcomes,
        params: opts.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DlgOptions {
    pub eps: f64,
    pub budget: usize,
    pub seed: u64,
}

impl Default for DlgOptions {
    fn default() -> Self {
        Self { eps: DLG_EPS, budget: 12, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelOutcome {
    pub level: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DlgReport {
    pub verdict: Verdict,
    pub levels: Vec<LevelOutcome>,
    pub params: DlgOptions,
}

impl DlgReport {
    pub fn to_json(&self) -> Value {
        envelope("dlg_test", self.verdict, &self.levels, &self.params)
    }
}

/// Checks `U(ω) = c + W_p(ω, {U ≤ c})` at each level `c < U(ω)` by searching
/// for `ω'` with `U(ω') ≤ c + 1e-9` and `W_p(ω, ω') ≤ U(ω) − c + eps`.
/// The bound `U(ω) ≤ c + W_p(ω, {U ≤ c})` holds for any 1-Lipschitz field.
pub fn dlg_test(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    levels: &[f64],
    opts: &DlgOptions,
) -> Result<DlgReport> {
    let center = eval_field(field, omega)?;
    if let Some(&c) = levels.iter().find(|&&c| !(c < center)) {
        return Err(Error::Precondition(format!("level {c} is not below U(ω) = {center}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let negative = if field.has_complete_candidates() { Verdict::Fail } else { Verdict::Inconclusive };
    let mut outcomes = Vec::with_capacity(levels.len());
    for &c in levels {
        if let FieldKind::Constant(_) = field.kind {
            // Empty sublevel set: the distance is +∞.
            outcomes.push(LevelOutcome { level: c, verdict: Verdict::Fail, witness: None });
            continue;
        }
        let r = center - c;
        let cands = candidates_at(field, omega, center, r, opts.budget, &mut rng)?.unwrap_or_default();
        let found = cands
            .into_iter()
            .find(|w| w.value_at_witness <= c + 1e-9 && w.distance <= r + opts.eps);
        let verdict = if found.is_some() { Verdict::Pass } else { negative };
        outcomes.push(LevelOutcome { level: c, verdict, witness: found });
    }
    Ok(DlgReport {
        verdict: Verdict::all(outcomes.iter().map(|o| o.verdict)),
        levels: outcomes,
        params: opts.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentOptions {
    pub eps: f64,
    pub steps: usize,
    pub step_length: f64,
    pub budget: usize,
    pub seed: u64,
}

/// Polyline `v_0, v_1, …` with cumulative certified arc lengths `t_k`.
#[derive(Clone, Debug, Serialize)]
pub struct DescentPolyline {
    pub vertices: Vec<DiscreteMeasure>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub epsilon: f64,
    /// `U(v_k) − U(v_{k+1})` per step.
    pub drops: Vec<f64>,
}

impl DescentPolyline {
    /// `max_{i<j} [(t_j − t_i) − (U(v_i) − U(v_j))]`; at most `ε` by
    /// construction.
    pub fn max_slack(&self) -> f64 {
        let n = self.vertices.len();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let slack = (self.times[j] - self.times[i]) - (self.values[i] - self.values[j]);
                worst = worst.max(slack);
            }
        }
        worst
    }

    /// `min_k [W_p(v_0, v_k) − (t_k − ε)]`; non-negative when the polyline
    /// escapes at the calibrated rate.
    pub fn escape_margin(&self, p: f64) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for (v, t) in self.vertices.iter().zip(&self.times).skip(1) {
            worst = worst.min(wasserstein(&self.vertices[0], v, p)? - (t - self.epsilon));
        }
        Ok(worst)
    }
}

/// ε-negative-gradient polyline: step `k` (from 0) accepts a candidate with
/// `U(v_k) − U(v_{k+1}) ≥ d(v_k, v_{k+1}) − ε/2^{k+1}`, so the defects
/// telescope to less than `ε`.
pub fn greedy_descent(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    opts: &DescentOptions,
) -> Result<DescentPolyline> {
    if !(opts.eps > 0.0) || opts.steps == 0 || !(opts.step_length > 0.0) {
        return Err(Error::Domain("need eps > 0, steps >= 1, step length > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut line = DescentPolyline {
        vertices: vec![omega.clone()],
        times: vec![0.0],
        values: vec![eval_field(field, omega)?],
        epsilon: opts.eps,
        drops: Vec::new(),
    };
    for k in 0..opts.steps {
        let here = line.vertices.last().unwrap().clone();
        let value = *line.values.last().unwrap();
        let budget_k = opts.eps / 2f64.powi(k as i32 + 1);
        let mut cands = candidates_at(field, &here, value, opts.step_length, opts.budget, &mut rng)?
            .unwrap_or_default();
        let Some(i) = best_by(&cands, |w| -w.gap()) else {
            return Err(Error::DescentStalled { step: k + 1, best_gap: f64::INFINITY });
        };
        let best = cands.swap_remove(i);
        if best.gap() > budget_k {
            return Err(Error::DescentStalled { step: k + 1, best_gap: best.gap() });
        }
        line.drops.push(best.drop());
        line.times.push(line.times.last().unwrap() + best.distance);
        line.values.push(best.value_at_witness);
        line.vertices.push(best.measure);
    }
    Ok(line)
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentationOptions {
    pub tol: f64,
    pub t_max: f64,
}

impl Default for RepresentationOptions {
    fn default() -> Self {
        Self { tol: 1e-6, t_max: crate::wgeom::LIMIT_T_MAX }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RayRow {
    pub value_at_origin: f64,
    pub busemann: f64,
    /// `U(γ(0)) + b_γ(ω) − U(ω)`, non-negative up to `tol`.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentationReport {
    pub verdict: Verdict,
    pub value: f64,
    pub rows: Vec<RayRow>,
    /// `b_{γ_ω}(ω)` for the field's own ray from `ω`, when one exists.
    pub own_ray_busemann: Option<f64>,
    pub params: RepresentationOptions,
}

impl RepresentationReport {
    pub fn to_json(&self) -> Value {
        envelope("representation_check", self.verdict, &(&self.rows, self.own_ray_busemann), &self.params)
    }
}

/// Checks `U(ω) = inf_γ [U(γ(0)) + b_γ(ω)]` over negative gradient rays:
/// the inequality for every supplied ray, and equality on `ω`'s own ray.
pub fn representation_check(
    field: &MeasureField,
    omega: &DiscreteMeasure,
    rays: &[WassersteinRay],
    opts: &RepresentationOptions,
) -> Result<RepresentationReport> {
    for (i, ray) in rays.iter().enumerate() {
        let u0 = eval_field(field, &ray.eval(0.0)?)?;
        for t in [1.0, 10.0] {
            let drop = u0 - eval_field(field, &ray.eval(t)?)?;
            if (drop - t).abs() > opts.tol {
                return Err(Error::InvalidRay {
                    index: i,
                    reason: format!("U drops by {drop} over Δt = {t}"),
                });
            }
        }
    }
    let value = eval_field(field, omega)?;
    let mut rows = Vec::with_capacity(rays.len());
    for ray in rays {
        let value_at_origin = eval_field(field, &ray.eval(0.0)?)?;
        let b = busemann_estimate(ray, omega, opts.tol * 1e-2, opts.t_max)?.value;
        let margin = value_at_origin + b - value;
        rows.push(RayRow { value_at_origin, busemann: b, margin, holds: margin >= -opts.tol });
    }
    let own_ray_busemann = match lifted_ray(field, omega) {
        Ok(own) => Some(busemann_estimate(&own, omega, opts.tol * 1e-2, opts.t_max)?.value),
        Err(Error::UnsupportedField) => None,
        Err(e) => return Err(e),
    };
    let own_ok = own_ray_busemann.is_none_or(|b| b.abs() <= opts.tol);
    let verdict = if rows.iter().all(|r| r.holds) && own_ok { Verdict::Pass } else { Verdict::Fail };
    Ok(RepresentationReport { verdict, value, rows, own_ray_busemann, params: opts.clone() })
}

/// Serializable description of the fields buildable from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureFieldConfig {
    Lifted { base: BaseFieldConfig },
    Constant { value: f64 },
    DistanceTo { target: DiscreteMeasure, #[serde(default)] offset: f64 },
    InfOf { fields: Vec<MeasureFieldConfig> },
}

impl MeasureFieldConfig {
    pub fn build(&self, p: f64) -> Result<MeasureField> {
        match self {
            MeasureFieldConfig::Lifted { base } => Ok(lift(base.build()?, p)),
            MeasureFieldConfig::Constant { value } => Ok(MeasureField::constant(*value, p)),
            MeasureFieldConfig::DistanceTo { target, offset } => {
                Ok(MeasureField::distance_to(target.clone(), *offset, p))
            }
            MeasureFieldConfig::InfOf { fields } => {
                inf_of_fields(fields.iter().map(|f| f.build(p)).collect::<Result<_>>()?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_space::{min_combine, BasePoint};
    use crate::measure::validate_measure;

    fn m(pts: &[&[f64]], w: &[f64]) -> DiscreteMeasure {
        validate_measure(pts.iter().map(|x| x.to_vec()).collect(), w.to_vec()).unwrap()
    }

    fn dirac(x: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::dirac(BasePoint::new(x.to_vec()).unwrap())
    }

    fn busemann_2d() -> MeasureField {
        lift(BaseField::busemann(vec![1.0, 0.0], 0.0).unwrap(), 2.0)
    }

    fn min_field() -> MeasureField {
        lift(
            min_combine(vec![
                BaseField::busemann(vec![1.0, 0.0], 0.0).unwrap(),
                BaseField::busemann(vec![0.0, 1.0], 1.0).unwrap(),
                BaseField::busemann(vec![-0.6, -0.8], 2.0).unwrap(),
            ])
            .unwrap(),
            2.0,
        )
    }

    #[test]
    fn lift_examples() {
        let c = lift(BaseField::custom(2, 0.0, |_| 4.5), 2.0);
        assert_eq!(eval_field(&c, &m(&[&[1.0, 2.0], &[3.0, 3.0]], &[0.5, 0.5])).unwrap(), 4.5);
        let b = busemann_2d();
        assert_eq!(eval_field(&b, &dirac(&[3.0, 1.0])).unwrap(), -3.0);
        let w = m(&[&[2.0, 0.0], &[-4.0, 0.0]], &[0.5, 0.5]);
        assert_eq!(eval_field(&b, &w).unwrap(), 1.0);
    }

    #[test]
    fn eval_examples() {
        let d = MeasureField::distance_to(dirac(&[0.0]), 0.0, 2.0);
        assert_eq!(eval_field(&d, &dirac(&[3.0])).unwrap(), 3.0);
        let inf = inf_of_fields(vec![MeasureField::constant(5.0, 2.0), MeasureField::constant(2.0, 2.0)]).unwrap();
        assert_eq!(eval_field(&inf, &dirac(&[0.0])).unwrap(), 2.0);
        // u_10 at δ_1: √99 − 10.
        let n = 10.0_f64;
        let w = 1.0 / (n * n);
        let omega_n = m(&[&[0.0], &[n * n]], &[1.0 - w, w]);
        let u = MeasureField::distance_to(omega_n, n, 2.0);
        let v = eval_field(&u, &dirac(&[1.0])).unwrap();
        assert!((v - (99f64.sqrt() - 10.0)).abs() < 1e-12);
        assert!((v + 0.05013).abs() < 1e-5);
    }

    #[test]
    fn inf_of_edge_cases() {
        assert!(matches!(inf_of_fields(vec![]), Err(Error::EmptyCollection(_))));
        let one = inf_of_fields(vec![MeasureField::constant(1.0, 2.0)]).unwrap();
        assert!(matches!(one.kind(), FieldKind::Constant(_)));
        assert!(inf_of_fields(vec![MeasureField::constant(1.0, 2.0), MeasureField::constant(1.0, 1.0)]).is_err());
    }

    #[test]
    fn lipschitz_probes() {
        let pairs = vec![
            (dirac(&[0.0, 0.0]), dirac(&[1.0, 1.0])),
            (m(&[&[0.0, 0.0], &[2.0, 1.0]], &[0.3, 0.7]), dirac(&[-1.0, 0.5])),
        ];
        assert_eq!(lipschitz_probe(&MeasureField::constant(3.0, 2.0), &pairs).unwrap(), 0.0);
        assert!(lipschitz_probe(&min_field(), &pairs).unwrap() <= 1.0 + 1e-9);
        let d = MeasureField::distance_to(dirac(&[5.0, 5.0]), 0.0, 2.0);
        assert!(lipschitz_probe(&d, &pairs).unwrap() <= 1.0 + 1e-9);
        let same = vec![(dirac(&[0.0, 0.0]), dirac(&[0.0, 0.0]))];
        assert_eq!(lipschitz_probe(&d, &same).unwrap_err(), Error::NoUsablePairs);
    }

    #[test]
    fn lifted_ray_example() {
        let w = m(&[&[0.0, 0.0], &[5.0, 5.0]], &[0.5, 0.5]);
        let b = busemann_2d();
        let ray = lifted_ray(&b, &w).unwrap();
        assert_eq!(ray.eval(3.0).unwrap(), m(&[&[3.0, 0.0], &[8.0, 5.0]], &[0.5, 0.5]));
        let drop = eval_field(&b, &ray.eval(0.0).unwrap()).unwrap() - eval_field(&b, &ray.eval(7.0).unwrap()).unwrap();
        assert!((drop - 7.0).abs() < 1e-10);
        let span = wasserstein(&ray.eval(0.0).unwrap(), &ray.eval(7.0).unwrap(), 2.0).unwrap();
        assert!((span - 7.0).abs() < 1e-8);
        assert_eq!(lifted_ray(&MeasureField::constant(0.0, 2.0), &w).unwrap_err(), Error::UnsupportedField);
    }

    #[test]
    fn local_slopes() {
        let c = MeasureField::constant(0.0, 2.0);
        let s = local_slope_estimate(&c, &dirac(&[0.0]), &[1.0, 0.5, 0.25], 6, 1).unwrap();
        assert_eq!(s.value, 0.0);
        let b = lift(BaseField::busemann(vec![1.0], 0.0).unwrap(), 2.0);
        let s = local_slope_estimate(&b, &dirac(&[0.0]), &[1.0, 0.5, 0.25], 6, 1).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(local_slope_estimate(&b, &dirac(&[0.0]), &[0.5, 1.0], 6, 1).is_err());
    }

    #[test]
    fn global_slope_of_corrected_kink() {
        // u = 0 on x ≤ 0 and −x on x > 0; from δ_{−1} the ratios are y/(y+1).
        let u = lift(BaseField::custom(1, 1.0, |x| -x.coords()[0].max(0.0)), 2.0);
        let dict: Vec<_> = (1..=100).map(|y| dirac(&[y as f64])).collect();
        let s = global_slope_estimate(&u, &dirac(&[-1.0]), &dict).unwrap();
        assert!((s.value - 100.0 / 101.0).abs() < 1e-12);
        assert!(s.value >= 0.99);
        let c = MeasureField::constant(1.0, 2.0);
        assert_eq!(global_slope_estimate(&c, &dirac(&[-1.0]), &dict).unwrap().value, 0.0);
        assert_eq!(
            global_slope_estimate(&c, &dirac(&[-1.0]), &[dirac(&[-1.0])]).unwrap_err(),
            Error::NoUsablePairs
        );
    }

    #[test]
    fn sphere_test_verdicts() {
        let w = m(&[&[0.0, 0.0], &[1.0, -2.0], &[3.0, 1.0]], &[0.2, 0.5, 0.3]);
        let opts = SphereTestOptions::default();
        let rep = viscosity_sphere_test(&min_field(), &w, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        for o in &rep.radii {
            let wit = o.witness.as_ref().unwrap();
            assert!((wit.replay(&min_field(), &w).unwrap() - wit.ratio()).abs() < 1e-9);
        }

        let rep = viscosity_sphere_test(&MeasureField::constant(0.0, 2.0), &w, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        for o in &rep.radii {
            assert!(o.best_gap >= 0.9 * o.radius);
        }

        let d = MeasureField::distance_to(dirac(&[0.0]), 0.0, 2.0);
        let rep = viscosity_sphere_test(&d, &dirac(&[3.0]), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let v = rep.to_json();
        assert_eq!(v["op"], "viscosity_sphere_test");
        assert_eq!(v["verdict"], "PASS");
    }

    #[test]
    fn inf_with_dominating_constant_fails() {
        let f = inf_of_fields(vec![busemann_2d(), MeasureField::constant(-1e9, 2.0)]).unwrap();
        let rep = viscosity_sphere_test(&f, &dirac(&[0.0, 0.0]), &SphereTestOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn dlg_examples() {
        let b = busemann_2d();
        let w = m(&[&[0.0, 0.0], &[2.0, 1.0]], &[0.4, 0.6]);
        let u = eval_field(&b, &w).unwrap();
        let rep = dlg_test(&b, &w, &[u - 1.0, u - 10.0], &DlgOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);

        let c = MeasureField::constant(2.0, 2.0);
        let rep = dlg_test(&c, &w, &[1.0], &DlgOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);

        assert!(matches!(dlg_test(&b, &w, &[u], &DlgOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn descent_examples() {
        let opts = DescentOptions { eps: 1e-2, steps: 20, step_length: 1.0, budget: 3, seed: 5 };
        let w = m(&[&[0.0, 0.0], &[1.0, 3.0]], &[0.5, 0.5]);
        let line = greedy_descent(&busemann_2d(), &w, &opts).unwrap();
        let total = line.values[0] - line.values[20];
        assert!((total - 20.0).abs() < 1e-8);
        assert!(line.max_slack() <= 1e-2);
        assert!(line.escape_margin(2.0).unwrap() >= -1e-9);

        let err = greedy_descent(&MeasureField::constant(0.0, 2.0), &w, &opts).unwrap_err();
        assert!(matches!(err, Error::DescentStalled { step: 1, .. }));
    }

    #[test]
    fn descent_on_infimum() {
        let f = inf_of_fields(vec![
            busemann_2d(),
            lift(BaseField::busemann(vec![0.0, 1.0], 0.0).unwrap(), 2.0),
        ])
        .unwrap();
        let opts = DescentOptions { eps: 0.5, steps: 8, step_length: 1.0, budget: 3, seed: 9 };
        let line = greedy_descent(&f, &dirac(&[-3.0, 0.0]), &opts).unwrap();
        assert!(line.max_slack() <= 0.5);
    }

    #[test]
    fn representation_examples() {
        let b = busemann_2d();
        let w = m(&[&[0.0, 1.0], &[2.0, -1.0]], &[0.5, 0.5]);
        let starts = [dirac(&[5.0, 5.0]), m(&[&[-1.0, 0.0], &[0.0, 3.0]], &[0.3, 0.7])];
        let rays: Vec<_> = starts.iter().map(|s| lifted_ray(&b, s).unwrap()).collect();
        let rep = representation_check(&b, &w, &rays, &RepresentationOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.own_ray_busemann.unwrap().abs() <= 1e-6);

        let wrong = WassersteinRay::dirac(BasePoint::new(vec![0.0, 0.0]).unwrap(), vec![-1.0, 0.0], 2.0).unwrap();
        let err = representation_check(&b, &w, &[wrong], &RepresentationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidRay { index: 0, .. }));
    }

    #[test]
    fn busemann_field_memoizes() {
        let ray = WassersteinRay::dirac(BasePoint::new(vec![0.0, 0.0]).unwrap(), vec![1.0, 0.0], 2.0).unwrap();
        let f = MeasureField::busemann(ray, 1e-8, 1e6);
        let w = m(&[&[1.0, 1.0], &[-2.0, 0.0]], &[0.5, 0.5]);
        let a = eval_field(&f, &w).unwrap();
        assert!((a - 0.5).abs() < 1e-6);
        assert_eq!(eval_field(&f, &w).unwrap(), a);
        let FieldKind::Busemann { memo, .. } = f.kind() else { unreachable!() };
        assert_eq!(memo.lock().unwrap().len(), 1);
    }

    #[test]
    fn config_builds() {
        let json = r#"{"type":"inf_of","fields":[
            {"type":"lifted","base":{"type":"busemann","direction":[1.0]}},
            {"type":"constant","value":3.0}]}"#;
        let cfg: MeasureFieldConfig = serde_json::from_str(json).unwrap();
        let f = cfg.build(2.0).unwrap();
        assert_eq!(eval_field(&f, &dirac(&[-5.0])).unwrap(), 3.0);
        assert_eq!(eval_field(&f, &dirac(&[1.0])).unwrap(), -1.0);
    }
}
