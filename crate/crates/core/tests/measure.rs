mod common;

use common::{measure, point};
use proptest::prelude::*;
use wlab_core::base_space::BasePoint;
use wlab_core::measure::{p_moment, push_forward, validate_measure, DiscreteMeasure};

fn raw(m: &DiscreteMeasure) -> (Vec<Vec<f64>>, Vec<f64>) {
    (m.support().iter().map(|x| x.coords().to_vec()).collect(), m.weights().to_vec())
}

proptest! {
    #[test]
    fn validation_is_idempotent(m in measure(2, 10, 5.0)) {
        let (s, w) = raw(&m);
        let again = validate_measure(s, w).unwrap();
        prop_assert_eq!(&again, &m);
    }

    #[test]
    fn validation_with_duplicates_is_idempotent(x in point(2, 3.0), w in 0.1f64..0.9) {
        let once = validate_measure(vec![x.clone(), x.clone(), vec![9.0, 9.0]], vec![w / 2.0, w / 2.0, 1.0 - w]).unwrap();
        let (s, ws) = raw(&once);
        prop_assert_eq!(validate_measure(s, ws).unwrap(), once);
    }

    #[test]
    fn push_forward_preserves_mass(m in measure(2, 10, 5.0), a in -2.0f64..2.0) {
        let img = push_forward(&m, |x| {
            let c = x.coords();
            BasePoint::new(vec![(a * c[0]).round(), c[1].abs().sqrt()]).unwrap()
        }).unwrap();
        prop_assert!((img.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn moment_bounded_by_diameter(m in measure(2, 8, 5.0), x0 in point(2, 5.0), p in 1.0f64..4.0) {
        let x0 = BasePoint::new(x0).unwrap();
        let mut diam = 0.0f64;
        let pts: Vec<_> = m.support().iter().chain(std::iter::once(&x0)).collect();
        for a in &pts {
            for b in &pts {
                diam = diam.max(a.dist(b));
            }
        }
        let mom = p_moment(&m, p, &x0).unwrap();
        prop_assert!(mom <= diam.powf(p) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn moment_is_translation_covariant(m in measure(2, 8, 5.0), x0 in point(2, 5.0), v in point(2, 5.0), p in 1.0f64..4.0) {
        let x0 = BasePoint::new(x0).unwrap();
        let shifted = p_moment(&m.translate(&v).unwrap(), p, &x0.offset(&v, 1.0)).unwrap();
        let base = p_moment(&m, p, &x0).unwrap();
        prop_assert!((shifted - base).abs() <= 1e-10 * base.max(1.0));
    }
}
