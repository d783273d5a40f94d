mod common;

use common::{dirac, direction, measure};
use proptest::prelude::*;
use wlab_core::base_space::{BasePoint, BaseRay};
use wlab_core::measure::DiscreteMeasure;
use wlab_core::transport::wasserstein;
use wlab_core::wgeom::{busemann_estimate, cs_diagnostic, displacement_path, CsParams, WassersteinRay};
use wlab_core::Verdict;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn displacement_is_constant_speed(mu in measure(2, 6, 5.0), nu in measure(2, 6, 5.0), p in 1.0f64..3.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let path = displacement_path(&mu, &nu, p).unwrap();
        let l = path.length();
        prop_assert_eq!(path.eval(0.0).unwrap(), mu);
        prop_assert_eq!(path.eval(l).unwrap(), nu);
        let d = wasserstein(&path.eval(a * l).unwrap(), &path.eval(b * l).unwrap(), p).unwrap();
        prop_assert!((d - (a - b).abs() * l).abs() <= 1e-8);
    }

    #[test]
    fn busemann_matches_common_direction_expansion(base in measure(2, 4, 3.0), omega in measure(2, 5, 3.0), v in direction(2)) {
        let rays = base.support().iter().map(|x| BaseRay::unit(x.clone(), v.clone()).unwrap()).collect();
        let ray = WassersteinRay::new(base.clone(), rays, 2.0).unwrap();
        let est = busemann_estimate(&ray, &omega, 1e-9, 1e6).unwrap();
        let closed = -omega.integrate(|x| x.dot(&v)) + base.integrate(|a| a.dot(&v));
        prop_assert!((est.value - closed).abs() <= 1e-6, "{} vs {}", est.value, closed);
        prop_assert!(est.samples.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
    }
}

fn on_ray(n: usize) -> wlab_core::Result<DiscreteMeasure> {
    Ok(dirac(&[0.6 * n as f64, 0.8 * n as f64]))
}

#[test]
fn cs_verdict_is_choice_independent_on_a_ray() {
    let bases = [dirac(&[0.0, 0.0]), dirac(&[0.0, 1.0])];
    for base in &bases {
        for sigma in [0.5, 1.0, 2.0] {
            let params = CsParams { sigma, start: 20, count: 30, eps: 0.1, cluster: 5, p: 2.0 };
            assert_eq!(cs_diagnostic(on_ray, base, params).unwrap().verdict, Verdict::Pass);
        }
    }
}

#[test]
fn dirac_ray_is_unit_speed() {
    let ray = WassersteinRay::dirac(BasePoint::origin(2), vec![0.6, 0.8], 2.0).unwrap();
    for (s, t) in [(0.0, 3.0), (2.5, 100.0)] {
        let d = wasserstein(&ray.eval(s).unwrap(), &ray.eval(t).unwrap(), 2.0).unwrap();
        assert!((d - (t - s)).abs() <= 1e-10);
    }
}
