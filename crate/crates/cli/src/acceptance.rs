//! Acceptance criteria. Each runs at its stated tolerance and returns an
//! [`Outcome`]; nothing here is tuned to make a criterion pass.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wlab_core::base_space::{norm, BaseField, BasePoint, BaseRay, Sign};
use wlab_core::measure::DiscreteMeasure;
use wlab_core::transport::{brute_force_oracle, wasserstein, wasserstein_1d_oracle, wasserstein_exact};
use wlab_core::viscosity::{
    eval_field, greedy_descent, lift, lifted_ray, lipschitz_probe, representation_check, viscosity_sphere_test,
    DescentOptions, RepresentationOptions, SphereTestOptions,
};
use wlab_core::wgeom::{busemann_estimate, displacement_path, WassersteinRay};
use wlab_core::{Error, Result, Verdict};

use crate::scenarios::{
    dirac, ex3_closed_form_at_one, ex3_field, ex3_mixture, ex5_cs, min_of_three_busemann, omega_n, random_measure,
};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    /// False only for criteria whose failure is established analytically.
    pub expected_pass: bool,
    /// Headline number: worst error, slack, or similar.
    pub metric: f64,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        let note = if self.expected_pass { "" } else { " [known failure]" };
        format!("{mark} {:>3}  {}{note}: {}", self.id, self.title, self.detail)
    }

    pub fn matches_expectation(&self) -> bool {
        self.passed == self.expected_pass
    }
}

fn outcome(
    id: &'static str,
    title: &'static str,
    body: impl FnOnce() -> Result<(bool, f64, String)>,
) -> Outcome {
    let (passed, metric, detail) = body().unwrap_or_else(|e| (false, f64::NAN, format!("error: {e}")));
    Outcome { id, title, passed, expected_pass: true, metric, detail }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_direction(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 {
            return v.iter().map(|c| c / n).collect();
        }
    }
}

const EXPONENTS: [f64; 3] = [1.0, 2.0, 3.0];

pub fn c1_quantile_agreement(seed: u64) -> Outcome {
    outcome("1", "1-D oracle agreement", || {
        let mut r = rng(seed, 1);
        let clock = Instant::now();
        let mut worst = 0.0f64;
        for k in 0..200 {
            let mu = random_measure(&mut r, 1, 20, 10.0);
            let nu = random_measure(&mut r, 1, 20, 10.0);
            let p = EXPONENTS[k % 3];
            let a = wasserstein_exact(&mu, &nu, p)?.value;
            let b = wasserstein_1d_oracle(&mu, &nu, p)?.value;
            worst = worst.max((a - b).abs());
        }
        let secs = clock.elapsed().as_secs_f64();
        Ok((worst <= 1e-9 && secs < 10.0, worst, format!("max |Δ| = {worst:.3e} over 200 pairs in {secs:.2} s")))
    })
}

pub fn c2_bruteforce_agreement(seed: u64) -> Outcome {
    outcome("2", "brute-force agreement", || {
        let mut r = rng(seed, 2);
        let clock = Instant::now();
        let mut worst = 0.0f64;
        for k in 0..100 {
            let dim = r.gen_range(1..=3);
            let p = EXPONENTS[k % 3];
            let (mu, nu) = if k % 2 == 0 {
                let n = r.gen_range(1..=6);
                let pts = |r: &mut ChaCha8Rng| {
                    (0..n).map(|_| BasePoint::new((0..dim).map(|_| r.gen_range(-5.0..5.0)).collect()).unwrap()).collect()
                };
                (DiscreteMeasure::uniform(pts(&mut r))?, DiscreteMeasure::uniform(pts(&mut r))?)
            } else {
                let n = r.gen_range(1..=8);
                let m = r.gen_range(1..=9 - n);
                (exact_size(&mut r, dim, n), exact_size(&mut r, dim, m))
            };
            let a = wasserstein_exact(&mu, &nu, p)?.value;
            let b = brute_force_oracle(&mu, &nu, p)?.value;
            worst = worst.max((a - b).abs());
        }
        let secs = clock.elapsed().as_secs_f64();
        Ok((worst <= 1e-9 && secs < 30.0, worst, format!("max |Δ| = {worst:.3e} over 100 instances in {secs:.2} s")))
    })
}

fn exact_size(r: &mut ChaCha8Rng, dim: usize, k: usize) -> DiscreteMeasure {
    let support: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| r.gen_range(-5.0..5.0)).collect()).collect();
    let raw: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    wlab_core::measure::validate_measure(support, raw.iter().map(|w| w / s).collect()).unwrap()
}

pub fn c3_ex5_distances(_seed: u64) -> Outcome {
    outcome("3", "escaping mixtures: W_p(ω_n, δ_0) = n", || {
        let origin = dirac(&[0.0]);
        let mut worst = 0.0f64;
        for p in [2.0, 3.0] {
            for n in 1..=50u64 {
                worst = worst.max((wasserstein(&omega_n(n, p)?, &origin, p)? - n as f64).abs());
            }
        }
        Ok((worst <= 1e-9, worst, format!("max |W_p − n| = {worst:.3e} for p ∈ {{2,3}}, n ≤ 50")))
    })
}

pub fn c4_ex5_non_compact(_seed: u64) -> Outcome {
    outcome("4", "escaping mixtures violate (CS)", || {
        let mut verdicts = Vec::new();
        let mut scaled = Vec::new();
        for sigma in [0.5, 1.0, 2.0] {
            let (rep, min) = ex5_cs(sigma, 2.0)?;
            verdicts.push(rep.verdict);
            scaled.push(min / sigma);
        }
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let ok = verdicts.iter().all(|&v| v == Verdict::Fail) && lo > 0.0 && hi - lo <= 1e-6;
        Ok((
            ok,
            hi - lo,
            format!("verdicts {verdicts:?}; min sphere distance / σ ∈ [{lo:.9}, {hi:.9}]"),
        ))
    })
}

pub fn c5a_ex3_closed_form(_seed: u64) -> Outcome {
    outcome("5a", "distance fields u_n at δ_1 match √(n²−1) − n", || {
        let at_one = dirac(&[1.0]);
        let mut worst = 0.0f64;
        for n in 1..=100u64 {
            worst = worst.max((eval_field(&ex3_field(n)?, &at_one)? - ex3_closed_form_at_one(n)).abs());
        }
        Ok((worst <= 1e-10, worst, format!("max error {worst:.3e} for n ≤ 100")))
    })
}

/// `|u_n(ω*)| ≤ C/n` on `n = 10..200` with `C = 10·|u_10(ω*)|`. Since
/// `u_n(ω*) = √(n² + ½) − n` and `n·u_n(ω*)` increases to `¼`, the envelope
/// is exceeded for every `n > 10`; this criterion is expected to fail.
pub fn c5b_ex3_envelope(_seed: u64) -> Outcome {
    let mut o = outcome("5b", "u_n(ω*) within C/n, C calibrated at n = 10", || {
        let mix = ex3_mixture();
        let c = 10.0 * eval_field(&ex3_field(10)?, &mix)?.abs();
        let mut violations = 0;
        let mut worst = 0.0f64;
        for n in 10..=200u64 {
            let excess = eval_field(&ex3_field(n)?, &mix)?.abs() - c / n as f64;
            if excess > 0.0 {
                violations += 1;
            }
            worst = worst.max(excess);
        }
        Ok((
            violations == 0,
            worst,
            format!("C = {c:.9}; {violations} of 191 n exceed C/n, worst excess {worst:.3e}"),
        ))
    });
    o.expected_pass = false;
    o
}

pub fn c6_ex3_limit_fails(seed: u64) -> Outcome {
    outcome("6", "constant limit field fails the sphere test", || {
        let opts = SphereTestOptions { radii: vec![1.0, 0.5, 0.1], seed, ..SphereTestOptions::default() };
        let rep = viscosity_sphere_test(&wlab_core::viscosity::MeasureField::constant(0.0, 2.0), &dirac(&[1.0]), &opts)?;
        let gaps_ok = rep.radii.iter().all(|o| o.verdict == Verdict::Fail && o.best_gap >= 0.9 * o.radius);
        let worst = rep.radii.iter().map(|o| o.best_gap / o.radius).fold(f64::INFINITY, f64::min);
        Ok((
            rep.verdict == Verdict::Fail && gaps_ok,
            worst,
            format!("verdict {}; min gap/r = {worst:.4}", rep.verdict),
        ))
    })
}

pub fn c7_lifting(seed: u64) -> Outcome {
    outcome("7", "lifted min-of-Busemann field is a strong solution", || {
        let mut r = rng(seed, 7);
        let field = lift(min_of_three_busemann(), 2.0);
        let measures: Vec<_> = (0..20).map(|_| random_measure(&mut r, 2, 8, 3.0)).collect();
        let pairs: Vec<_> =
            (0..200).map(|_| (random_measure(&mut r, 2, 8, 3.0), random_measure(&mut r, 2, 8, 3.0))).collect();
        let lip = lipschitz_probe(&field, &pairs)?;
        let (mut drop_err, mut span_err) = (0.0f64, 0.0f64);
        let mut sphere = Vec::new();
        for (i, m) in measures.iter().enumerate() {
            let ray = lifted_ray(&field, m)?;
            let start = ray.eval(0.0)?;
            let u0 = eval_field(&field, &start)?;
            for dt in [1.0, 5.0, 10.0] {
                let end = ray.eval(dt)?;
                drop_err = drop_err.max((u0 - eval_field(&field, &end)? - dt).abs());
                span_err = span_err.max((wasserstein(&start, &end, 2.0)? - dt).abs());
            }
            let opts = SphereTestOptions { eps: 1e-3, seed: seed.wrapping_add(i as u64), ..SphereTestOptions::default() };
            sphere.push(viscosity_sphere_test(&field, m, &opts)?.verdict);
        }
        let all = Verdict::all(sphere);
        let ok = lip <= 1.0 + 1e-9 && drop_err <= 1e-10 && span_err <= 1e-8 && all == Verdict::Pass;
        Ok((
            ok,
            drop_err.max(span_err),
            format!("Lipschitz {lip:.6}; drop err {drop_err:.2e}; span err {span_err:.2e}; sphere test {all}"),
        ))
    })
}

pub fn c8_geodesics(seed: u64) -> Outcome {
    outcome("8", "displacement interpolation is a geodesic", || {
        let mut r = rng(seed, 8);
        let mut worst = 0.0f64;
        for k in 0..50 {
            let dim = r.gen_range(1..=3);
            let p = EXPONENTS[k % 3];
            let mu = random_measure(&mut r, dim, 6, 5.0);
            let nu = random_measure(&mut r, dim, 6, 5.0);
            let path = displacement_path(&mu, &nu, p)?;
            let l = path.length();
            for _ in 0..20 {
                let (s, t) = (r.gen_range(0.0..=l), r.gen_range(0.0..=l));
                let d = wasserstein(&path.eval(s)?, &path.eval(t)?, p)?;
                worst = worst.max((d - (t - s).abs()).abs());
            }
        }
        Ok((worst <= 1e-8, worst, format!("max |W − |t−s|| = {worst:.3e} over 1000 samples")))
    })
}

pub fn c9_busemann_closed_form(seed: u64) -> Outcome {
    outcome("9", "Busemann function of a Dirac ray", || {
        let mut r = rng(seed, 9);
        let v = random_direction(&mut r, 2);
        let ray = WassersteinRay::dirac(BasePoint::origin(2), v.clone(), 2.0)?;
        let mut worst = 0.0f64;
        let mut monotone = true;
        for _ in 0..10 {
            let m = random_measure(&mut r, 2, 6, 3.0);
            let est = busemann_estimate(&ray, &m, 1e-9, 1e4)?;
            let closed = -m.integrate(|x| x.dot(&v));
            worst = worst.max((est.value - closed).abs());
            monotone &= est.samples.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        }
        Ok((worst <= 1e-6 && monotone, worst, format!("max error {worst:.3e}; trace non-increasing: {monotone}")))
    })
}

pub fn c10_representation(seed: u64) -> Outcome {
    outcome("10", "representation by negative gradient rays", || {
        let mut r = rng(seed, 10);
        let field = lift(BaseField::busemann(vec![0.8, 0.6], 0.5)?, 2.0);
        let rays: Vec<_> =
            (0..5).map(|_| lifted_ray(&field, &random_measure(&mut r, 2, 5, 3.0))).collect::<Result<_>>()?;
        let mut worst_margin = f64::INFINITY;
        let mut worst_own = 0.0f64;
        let mut all = Vec::new();
        for _ in 0..10 {
            let m = random_measure(&mut r, 2, 6, 3.0);
            let rep = representation_check(&field, &m, &rays, &RepresentationOptions::default())?;
            worst_margin = rep.rows.iter().map(|x| x.margin).fold(worst_margin, f64::min);
            worst_own = worst_own.max(rep.own_ray_busemann.map_or(f64::INFINITY, f64::abs));
            all.push(rep.verdict);
        }
        let all = Verdict::all(all);
        Ok((
            all == Verdict::Pass && worst_margin >= -1e-6 && worst_own <= 1e-6,
            worst_own,
            format!("min margin {worst_margin:.3e}; max |own-ray b| {worst_own:.3e}; verdict {all}"),
        ))
    })
}

pub fn c11_descent(seed: u64) -> Outcome {
    outcome("11", "ε-descent polyline", || {
        let mut r = rng(seed, 11);
        let field = lift(min_of_three_busemann(), 2.0);
        let m = random_measure(&mut r, 2, 6, 3.0);
        let opts = DescentOptions { eps: 1e-2, steps: 20, step_length: 1.0, budget: 6, seed };
        let line = greedy_descent(&field, &m, &opts)?;
        let slack = line.max_slack();
        let stall = greedy_descent(&wlab_core::viscosity::MeasureField::constant(0.0, 2.0), &m, &opts);
        let stalled_at_one = matches!(stall, Err(Error::DescentStalled { step: 1, .. }));
        Ok((
            slack <= opts.eps && stalled_at_one,
            slack,
            format!("observed slack {slack:.3e} (ε = 1e-2); constant field stalls at step 1: {stalled_at_one}"),
        ))
    })
}

pub fn c12_kantorovich_rubinstein(seed: u64) -> Outcome {
    outcome("12", "Kantorovich–Rubinstein bound", || {
        let mut r = rng(seed, 12);
        let mut worst = f64::NEG_INFINITY;
        for k in 0..200 {
            let dim = r.gen_range(1..=3);
            let mu = random_measure(&mut r, dim, 8, 4.0);
            let nu = random_measure(&mut r, dim, 8, 4.0);
            let dir = random_direction(&mut r, dim);
            let u = match k % 3 {
                0 => BaseField::busemann(dir, r.gen_range(-1.0..1.0))?,
                1 => {
                    let pts = (0..3)
                        .map(|_| BasePoint::new((0..dim).map(|_| r.gen_range(-4.0..4.0)).collect()))
                        .collect::<Result<Vec<_>>>()?;
                    let sign = if r.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
                    BaseField::distance_to(pts, sign)?
                }
                _ => {
                    let ray = BaseRay::unit(BasePoint::origin(dim), dir)?;
                    let o = ray.origin().clone();
                    BaseField::custom(dim, 1.0, move |x| x.dist(&o).sin())
                }
            };
            let gap = mu.integrate(|x| u.eval(x).unwrap()) - nu.integrate(|x| u.eval(x).unwrap())
                - wasserstein(&mu, &nu, 1.0)?;
            worst = worst.max(gap);
        }
        Ok((worst <= 1e-9, worst, format!("max (∫u dμ − ∫u dν − W_1) = {worst:.3e} over 200 pairs")))
    })
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    vec![
        c1_quantile_agreement(seed),
        c2_bruteforce_agreement(seed),
        c3_ex5_distances(seed),
        c4_ex5_non_compact(seed),
        c5a_ex3_closed_form(seed),
        c5b_ex3_envelope(seed),
        c6_ex3_limit_fails(seed),
        c7_lifting(seed),
        c8_geodesics(seed),
        c9_busemann_closed_form(seed),
        c10_representation(seed),
        c11_descent(seed),
        c12_kantorovich_rubinstein(seed),
    ]
}
