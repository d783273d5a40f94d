mod common;

use common::{dirac, direction, measure};
use proptest::prelude::*;
use wlab_core::base_space::{min_combine, BaseField, BasePoint};
use wlab_core::measure::{DiscreteMeasure, MeasureSetSequence};
use wlab_core::transport::wasserstein;
use wlab_core::viscosity::{
    eval_field, greedy_descent, inf_of_fields, lift, lifted_ray, lipschitz_probe, local_slope_estimate,
    viscosity_sphere_test, DescentOptions, MeasureField, SphereTestOptions,
};
use wlab_core::wgeom::WassersteinRay;
use wlab_core::Verdict;

fn busemann(v: Vec<f64>, c: f64) -> BaseField {
    BaseField::busemann(v, c).unwrap()
}

fn min_of_three() -> BaseField {
    min_combine(vec![
        busemann(vec![1.0, 0.0], 0.0),
        busemann(vec![0.0, 1.0], 1.0),
        busemann(vec![-0.6, -0.8], 2.0),
    ])
    .unwrap()
}

fn pairs(n: usize) -> impl Strategy<Value = Vec<(DiscreteMeasure, DiscreteMeasure)>> {
    prop::collection::vec((measure(2, 5, 4.0), measure(2, 5, 4.0)), n)
}

fn shipped_fields() -> Vec<(&'static str, MeasureField)> {
    let ray = WassersteinRay::dirac(BasePoint::origin(2), vec![0.6, 0.8], 2.0).unwrap();
    let seq = MeasureSetSequence::new(
        |n| vec![dirac(&[n as f64, 0.0]), dirac(&[0.0, n as f64])],
        |n| n as f64,
    );
    vec![
        ("lifted", lift(min_of_three(), 2.0)),
        ("distance_to", MeasureField::distance_to(dirac(&[1.0, -1.0]), 0.5, 2.0)),
        ("busemann", MeasureField::busemann(ray, 1e-10, 1e6)),
        ("dlc_limit", MeasureField::dlc_limit(seq, 2.0, 1e-10, 1 << 14)),
        (
            "inf_of",
            inf_of_fields(vec![lift(busemann(vec![1.0, 0.0], 0.0), 2.0), lift(busemann(vec![0.0, -1.0], 0.5), 2.0)])
                .unwrap(),
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn shipped_fields_are_one_lipschitz(ps in pairs(50)) {
        for (name, f) in shipped_fields() {
            let lip = lipschitz_probe(&f, &ps).unwrap();
            prop_assert!(lip <= 1.0 + 1e-9, "{}: {}", name, lip);
        }
        prop_assert_eq!(lipschitz_probe(&MeasureField::constant(2.0, 2.0), &ps).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lifted_rays_calibrate(omega in measure(2, 8, 4.0)) {
        let f = lift(min_of_three(), 2.0);
        let ray = lifted_ray(&f, &omega).unwrap();
        let ts = [0.0, 1.0, 5.0, 10.0];
        for (i, &s) in ts.iter().enumerate() {
            for &t in &ts[i + 1..] {
                let (a, b) = (ray.eval(s).unwrap(), ray.eval(t).unwrap());
                let drop = eval_field(&f, &a).unwrap() - eval_field(&f, &b).unwrap();
                prop_assert!((drop - (t - s)).abs() <= 1e-10);
                prop_assert!((wasserstein(&a, &b, 2.0).unwrap() - (t - s)).abs() <= 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sphere_witnesses_replay(omega in measure(2, 5, 4.0), seed in any::<u64>()) {
        let f = inf_of_fields(vec![lift(min_of_three(), 2.0), lift(busemann(vec![0.6, -0.8], -1.0), 2.0)]).unwrap();
        let rep = viscosity_sphere_test(&f, &omega, &SphereTestOptions { seed, ..SphereTestOptions::default() }).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass);
        for o in &rep.radii {
            let w = o.witness.as_ref().unwrap();
            prop_assert!((w.replay(&f, &omega).unwrap() - w.ratio()).abs() <= 1e-9);
        }
    }

    #[test]
    fn slope_dichotomy(omega in measure(2, 5, 4.0), seed in any::<u64>()) {
        let radii = [1.0, 0.5, 0.1];
        let f = lift(min_of_three(), 2.0);
        prop_assert!(local_slope_estimate(&f, &omega, &radii, 6, seed).unwrap().value >= 1.0 - 1e-3);
        let c = MeasureField::constant(0.0, 2.0);
        prop_assert_eq!(local_slope_estimate(&c, &omega, &radii, 6, seed).unwrap().value, 0.0);
    }

    #[test]
    fn descent_recovers_the_subray(omega in measure(3, 5, 4.0), v in direction(3), tau in 0.0f64..5.0) {
        let f = lift(busemann(v, 0.3), 2.0);
        let ray = lifted_ray(&f, &omega).unwrap();
        let start = ray.eval(tau).unwrap();
        let opts = DescentOptions { eps: 1e-6, steps: 5, step_length: 1.0, budget: 3, seed: 1 };
        let line = greedy_descent(&f, &start, &opts).unwrap();
        for t in [1usize, 2, 5] {
            let d = wasserstein(&line.vertices[t], &ray.eval(tau + t as f64).unwrap(), 2.0).unwrap();
            prop_assert!(d <= 1e-8, "t={} d={}", t, d);
        }
    }
}

#[test]
fn dlg_sublevels_give_the_dlc_limit() {
    let v = vec![0.6, 0.8];
    let f = lift(busemann(v.clone(), 0.0), 2.0);
    let seq = MeasureSetSequence::new(move |n| vec![dirac(&[0.6 * n as f64, 0.8 * n as f64])], |n| n as f64);
    let omegas = [
        dirac(&[1.0, 2.0]),
        wlab_core::measure::validate_measure(vec![vec![0.0, 0.0], vec![3.0, -1.0], vec![-2.0, 2.0]], vec![0.2, 0.3, 0.5])
            .unwrap(),
    ];
    for omega in &omegas {
        let u = eval_field(&f, omega).unwrap();
        let est = wlab_core::wgeom::dlc_limit(&seq, omega, 2.0, 1e-9, 1 << 10).unwrap();
        assert!((est.value - u).abs() <= 1e-6, "{} vs {u}", est.value);
    }
}
