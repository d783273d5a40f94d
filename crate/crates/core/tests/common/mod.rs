#![allow(dead_code)]

use proptest::prelude::*;
use wlab_core::base_space::BasePoint;
use wlab_core::measure::{validate_measure, DiscreteMeasure};

pub fn point(dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, dim)
}

pub fn measure(dim: usize, max_atoms: usize, scale: f64) -> impl Strategy<Value = DiscreteMeasure> {
    (1..=max_atoms)
        .prop_flat_map(move |k| (prop::collection::vec(point(dim, scale), k), prop::collection::vec(0.1f64..1.0, k)))
        .prop_map(|(support, raw)| {
            let s: f64 = raw.iter().sum();
            validate_measure(support, raw.iter().map(|w| w / s).collect()).unwrap()
        })
}

/// Direction with norm exactly representable as unit after normalization.
pub fn direction(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    point(dim, 1.0).prop_filter_map("non-degenerate direction", |v| {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        (n > 1e-2).then(|| v.iter().map(|c| c / n).collect())
    })
}

pub fn dirac(x: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::dirac(BasePoint::new(x.to_vec()).unwrap())
}
