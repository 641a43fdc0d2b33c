use std::sync::Arc;

use proptest::prelude::*;

use logconcave::bodies::{inclusion_factor, mean_width_functionals, DirectionSet, PBall, RadialBody};
use logconcave::covering::{functional_covering, CoverConfig};
use logconcave::isotropic::isotropize;
use logconcave::transforms::{legendre_1d_fast, legendre_dual, DualGridPair};
use logconcave::{ClosedFormKind, GridPotential, LogConcaveFunction};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadratic_legendre_matches_formula(c in 0.1f64..4.0, dim in 1usize..=3, y in prop::collection::vec(-3.0f64..3.0, 3)) {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::Quadratic, &[c], dim).unwrap();
        let l = legendre_dual(&f).unwrap();
        let y = &y[..dim];
        let expected = y.iter().map(|v| v * v).sum::<f64>() / (4.0 * c);
        prop_assert!((l.potential(y) - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn sampled_legendre_obeys_fenchel_young(s in 0.3f64..3.0) {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[s], 1).unwrap();
        let primal = f.sampling_grid(101).unwrap();
        let phi = f.sample_potential(&primal).unwrap();
        let dual = DualGridPair::for_potential(&phi, 101).unwrap().dual;
        let l = legendre_1d_fast(&phi, &dual).unwrap();
        for i in 0..primal.len() {
            let x = primal.node(i)[0];
            for j in 0..dual.len() {
                let y = dual.node(j)[0];
                let (a, b) = (phi.value(i), l.value(j));
                if a.is_finite() && b.is_finite() {
                    prop_assert!(a.get() + b.get() >= x * y - 1e-9);
                }
            }
        }
    }

    #[test]
    fn isotropic_gaussian_is_unique(sigma in 0.3f64..3.0, shift in prop::collection::vec(-2.0f64..2.0, 2), x in prop::collection::vec(-1.0f64..1.0, 2)) {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::Gaussian, &[sigma], 2).unwrap().shift(&shift).unwrap();
        let (g, _) = isotropize(&f).unwrap();
        let expected = (-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp();
        prop_assert!((g.value(&x) - expected).abs() <= 1e-6);
    }

    #[test]
    fn inclusion_factor_of_dilate(lambda in 0.2f64..5.0, p in prop::sample::select(vec![1.0, 2.0, 4.0, f64::INFINITY])) {
        let dirs = Arc::new(DirectionSet::default_for(2).unwrap());
        let k = RadialBody::sample(dirs.clone(), &PBall::new(2, p, 1.0)).unwrap();
        let factor = inclusion_factor(&k, &k.scaled(lambda)).unwrap();
        prop_assert!((factor - 1.0 / lambda).abs() <= 1e-9 / lambda);
    }

    #[test]
    fn grid_files_round_trip(c in 0.1f64..2.0) {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[c], 1).unwrap();
        let phi = f.sample_potential(&f.sampling_grid(33).unwrap()).unwrap();
        let back = GridPotential::from_file(&phi.to_file()).unwrap();
        prop_assert_eq!(back, phi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn covering_decreases_with_dilation(t in 1.0f64..4.0, dt in 0.1f64..3.0) {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 1).unwrap();
        let g = LogConcaveFunction::gaussian(1);
        let cfg = CoverConfig::default();
        let a = functional_covering(&f, &g.dilate(t).unwrap(), &cfg).unwrap();
        let b = functional_covering(&f, &g.dilate(t + dt).unwrap(), &cfg).unwrap();
        prop_assert!(b.primal_value <= a.primal_value + a.gap.abs() + b.gap.abs() + 1e-9);
    }

    #[test]
    fn mean_width_is_homogeneous(lambda in 0.5f64..3.0, seed in 0u64..1000) {
        let a = mean_width_functionals(&PBall::cube(3, 1.0), 2000, seed).unwrap();
        let b = mean_width_functionals(&PBall::cube(3, lambda), 2000, seed).unwrap();
        prop_assert!((b.m_star - lambda * a.m_star).abs() <= 1e-12 * b.m_star);
        prop_assert!((b.m - a.m / lambda).abs() <= 1e-12 * a.m);
    }
}
