mod common;

use common::{measure, point};
use proptest::prelude::*;
use wlab_core::base_space::{norm, BaseField, BasePoint, Sign};
use wlab_core::transport::{brute_force_oracle, wasserstein, wasserstein_1d_oracle, wasserstein_exact};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms((mu, nu, rho) in (1usize..=3).prop_flat_map(|d| (measure(d, 12, 5.0), measure(d, 12, 5.0), measure(d, 12, 5.0)))) {
        for p in [1.0, 2.0, 3.0] {
            let (a, b) = (wasserstein(&mu, &nu, p).unwrap(), wasserstein(&nu, &mu, p).unwrap());
            prop_assert!((a - b).abs() <= 1e-9);
            let c = wasserstein(&mu, &rho, p).unwrap();
            let d = wasserstein(&nu, &rho, p).unwrap();
            prop_assert!(c <= a + d + 1e-9);
            prop_assert!(wasserstein(&mu, &mu, p).unwrap() <= 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn agrees_with_quantile_oracle(mu in measure(1, 15, 10.0), nu in measure(1, 15, 10.0), p in 1.0f64..4.0) {
        let a = wasserstein_exact(&mu, &nu, p).unwrap().value;
        let b = wasserstein_1d_oracle(&mu, &nu, p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn agrees_with_enumeration(mu in measure(2, 5, 5.0), nu in measure(2, 4, 5.0), p in 1.0f64..3.0) {
        let a = wasserstein_exact(&mu, &nu, p).unwrap().value;
        let b = brute_force_oracle(&mu, &nu, p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn plans_are_feasible(mu in measure(2, 10, 5.0), nu in measure(2, 10, 5.0)) {
        let r = wasserstein_exact(&mu, &nu, 2.0).unwrap();
        prop_assert!(r.plan.marginal_error(&mu, &nu) <= 1e-12);
        prop_assert!(r.plan.entries.len() < mu.len() + nu.len());
        prop_assert!((r.plan.cost(&mu, &nu, 2.0) - r.cost).abs() <= 1e-9 * r.cost.max(1.0));
    }

    #[test]
    fn translation_is_exact(mu in measure(3, 8, 5.0), v in point(3, 5.0), p in 1.0f64..4.0) {
        let d = wasserstein(&mu, &mu.translate(&v).unwrap(), p).unwrap();
        prop_assert!((d - norm(&v)).abs() <= 1e-10 * norm(&v).max(1.0));
    }

    #[test]
    fn monotone_in_p(mu in measure(2, 8, 5.0), nu in measure(2, 8, 5.0), q in 1.0f64..3.0, dp in 0.0f64..2.0) {
        let wq = wasserstein(&mu, &nu, q).unwrap();
        let wp = wasserstein(&mu, &nu, q + dp).unwrap();
        prop_assert!(wp >= wq - 1e-9);
    }

    #[test]
    fn kantorovich_rubinstein_bound(mu in measure(2, 8, 5.0), nu in measure(2, 8, 5.0), pts in prop::collection::vec(point(2, 5.0), 1..4), plus in any::<bool>()) {
        let pts = pts.into_iter().map(|x| BasePoint::new(x).unwrap()).collect();
        let u = BaseField::distance_to(pts, if plus { Sign::Plus } else { Sign::Minus }).unwrap();
        let gap = mu.integrate(|x| u.eval(x).unwrap()) - nu.integrate(|x| u.eval(x).unwrap());
        prop_assert!(gap <= wasserstein(&mu, &nu, 1.0).unwrap() + 1e-9);
    }
}
