use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rmtlab::diagnostics::{row_distances, singular_cdf_distance, smallest_sv_bounds_check, truncation_w2};
use rmtlab::laws::{nu_z_cubic_roots, nu_z_fixed_point};
use rmtlab::numerics::pairwise_sum;
use rmtlab::rng::{sample_iid_matrix, sample_poisson_weights};
use rmtlab::spectral::{bipartize, eigenvalues, hermitian_eigenvalues, singular_values};
use rmtlab::transforms::{
    log_potential_det, log_potential_empirical, log_potential_hermitized, quaternionic_transform, quaternionic_transform_direct, QPoint,
};
use rmtlab::{Complex64, ComplexMatrix, EntryLaw, Phase, Seed};

fn law_strategy() -> impl Strategy<Value = EntryLaw> {
    prop_oneof![
        Just(EntryLaw::ComplexGaussian),
        Just(EntryLaw::RealGaussian),
        Just(EntryLaw::SymmetricBernoulli),
        (0.5f64..1.9).prop_map(|a| EntryLaw::HeavyTailed { alpha: a, phase: Phase::UniformCircle }),
    ]
}

fn continuous_law() -> impl Strategy<Value = EntryLaw> {
    prop_oneof![
        Just(EntryLaw::ComplexGaussian),
        Just(EntryLaw::RealGaussian),
        (0.5f64..1.9).prop_map(|a| EntryLaw::HeavyTailed { alpha: a, phase: Phase::UniformCircle }),
    ]
}

fn gaussian(n: usize, seed: u64) -> ComplexMatrix {
    sample_iid_matrix(n, EntryLaw::ComplexGaussian, Seed::new(seed, 0)).unwrap()
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn add(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a.get(i, j) + b.get(i, j))
}

fn s1(a: &ComplexMatrix) -> f64 {
    singular_values(a).unwrap().largest()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, rng_seed: RngSeed::Fixed(2024), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn minors_are_stable(law in law_strategy(), n in 2usize..40, k in 1usize..40, seed in any::<u64>()) {
        let k = k.min(n);
        let big = sample_iid_matrix(n, law, Seed::new(seed, 3)).unwrap();
        let small = sample_iid_matrix(k, law, Seed::new(seed, 3)).unwrap();
        prop_assert_eq!(big.minor(k), small);
    }

    #[test]
    fn sampling_is_deterministic(law in law_strategy(), n in 1usize..30, seed in any::<u64>(), stream in any::<u64>()) {
        let s = Seed::new(seed, stream);
        prop_assert_eq!(sample_iid_matrix(n, law, s).unwrap(), sample_iid_matrix(n, law, s).unwrap());
    }

    #[test]
    fn weyl_products_and_reversed(law in continuous_law(), n in 2usize..40, seed in any::<u64>()) {
        let a = sample_iid_matrix(n, law, Seed::new(seed, 0)).unwrap();
        let mods = sorted_desc(&eigenvalues(&a).unwrap().moduli());
        let s = sorted_desc(singular_values(&a).unwrap().values());
        let (mut lp, mut sp) = (0.0, 0.0);
        for k in 0..n {
            lp += mods[k].ln();
            sp += s[k].ln();
            prop_assert!(lp <= sp + 1e-10 * (1.0 + sp.abs()), "k={} {} > {}", k, lp, sp);
        }
        prop_assert!((lp - sp).abs() <= 1e-9 * (1.0 + sp.abs()));
        let (mut lr, mut sr) = (0.0, 0.0);
        for k in (0..n).rev() {
            lr += mods[k].ln();
            sr += s[k].ln();
            prop_assert!(sr <= lr + 1e-10 * (1.0 + lr.abs()) + 1e-9);
        }
    }

    #[test]
    fn trace_norm_and_second_moment(law in law_strategy(), n in 1usize..40, seed in any::<u64>()) {
        let a = sample_iid_matrix(n, law, Seed::new(seed, 1)).unwrap();
        let s2: f64 = singular_values(&a).unwrap().values().iter().map(|s| s * s).sum();
        let l2: f64 = eigenvalues(&a).unwrap().values().iter().map(|l| l.norm_sqr()).sum();
        let f = a.frobenius_norm_sq();
        prop_assert!((s2 - f).abs() <= 1e-11 * f);
        prop_assert!(l2 <= s2 * (1.0 + 1e-10));
    }

    #[test]
    fn singular_perturbation_bounds(n in 1usize..30, sa in any::<u64>(), sb in any::<u64>(), eps in 1e-3f64..3.0) {
        let a = gaussian(n, sa);
        let b = add(&a, &gaussian(n, sb).scaled(eps));
        let diff = ComplexMatrix::from_fn(n, n, |i, j| a.get(i, j) - b.get(i, j));
        let x = sorted_desc(singular_values(&a).unwrap().values());
        let y = sorted_desc(singular_values(&b).unwrap().values());
        let gap = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= s1(&diff) * (1.0 + 1e-10) + 1e-12);
        let hw: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum();
        prop_assert!(hw <= diff.frobenius_norm_sq() * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn operator_norm_sub_multiplicative_and_additive(n in 1usize..25, sa in any::<u64>(), sb in any::<u64>()) {
        let a = gaussian(n, sa);
        let b = gaussian(n, sb);
        let prod = ComplexMatrix::from_faer(a.as_faer() * b.as_faer());
        prop_assert!(s1(&prod) <= s1(&a) * s1(&b) * (1.0 + 1e-12));
        prop_assert!(s1(&add(&a, &b)) <= (s1(&a) + s1(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn bipartization_linear_and_symmetric_spectrum(n in 1usize..20, sa in any::<u64>(), sb in any::<u64>()) {
        let a = gaussian(n, sa);
        let b = gaussian(n, sb);
        let (ha, hb, hab) = (bipartize(&a), bipartize(&b), bipartize(&add(&a, &b)));
        for i in 0..2 * n {
            for j in 0..2 * n {
                prop_assert_eq!(hab.get(i, j), ha.get(i, j) + hb.get(i, j));
            }
        }
        let mut ev = hermitian_eigenvalues(&ha).unwrap();
        ev.sort_by(f64::total_cmp);
        let s = sorted_desc(singular_values(&a).unwrap().values());
        for k in 0..n {
            prop_assert!((ev[2 * n - 1 - k] - s[k]).abs() < 1e-10 * (1.0 + s[0]));
            prop_assert!((ev[k] + s[k]).abs() < 1e-10 * (1.0 + s[0]));
        }
    }

    #[test]
    fn potential_three_ways(n in 2usize..100, seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let a = gaussian(n, seed).scaled(1.0 / (n as f64).sqrt());
        let z = Complex64::new(re, im);
        let eig = eigenvalues(&a).unwrap();
        let u1 = log_potential_empirical(eig.values(), z).unwrap();
        let u2 = log_potential_det(&a, z).unwrap();
        let u3 = log_potential_hermitized(&a, z).unwrap();
        prop_assert!((u1 - u2).abs() < 1e-8 && (u2 - u3).abs() < 1e-8, "{} {} {}", u1, u2, u3);
    }

    #[test]
    fn quaternionic_paths_agree(n in 1usize..40, seed in any::<u64>(), re in -1.5f64..1.5, im in -1.5f64..1.5, eta_re in -1.0f64..1.0, t in 0.05f64..2.0) {
        let a = gaussian(n, seed).scaled(1.0 / (n as f64).sqrt());
        let q = QPoint::new(Complex64::new(re, im), Complex64::new(eta_re, t)).unwrap();
        let g1 = quaternionic_transform(&a, &q).unwrap();
        let g2 = quaternionic_transform_direct(&a, &q).unwrap();
        prop_assert!(g1.sub(&g2).operator_norm() < 1e-10 * (1.0 + 1.0 / t));
        prop_assert!(g1.a.im > 0.0 && g1.d.im > 0.0);
    }

    #[test]
    fn row_distance_identity_and_sandwich(law in prop_oneof![Just(EntryLaw::ComplexGaussian), Just(EntryLaw::RealGaussian)], n in 2usize..60, seed in any::<u64>()) {
        let a = sample_iid_matrix(n, law, Seed::new(seed, 2)).unwrap();
        let d = row_distances(&a).unwrap();
        let s = singular_values(&a).unwrap();
        let lhs: f64 = s.values().iter().map(|x| x.powi(-2)).sum();
        let rhs: f64 = d.iter().map(|x| x.powi(-2)).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs, "{} vs {}", lhs, rhs);
        let w = smallest_sv_bounds_check(&a).unwrap();
        prop_assert!(w.lower <= w.s_min * (1.0 + 1e-10) && w.s_min <= w.upper * (1.0 + 1e-10));
    }

    #[test]
    fn truncation_respects_w2_bound(alpha in 0.8f64..1.9, n in 5usize..50, kappa in 0.5f64..20.0, seed in any::<u64>()) {
        let x = sample_iid_matrix(n, EntryLaw::HeavyTailed { alpha, phase: Phase::Rademacher }, Seed::new(seed, 0)).unwrap();
        let (w2, bound) = truncation_w2(&x, kappa).unwrap();
        prop_assert!(w2 <= bound * (1.0 + 1e-10) + 1e-13, "{} > {}", w2, bound);
    }

    #[test]
    fn rank_one_update_moves_cdf_by_at_most_one_over_n(n in 2usize..50, seed in any::<u64>(), size in 0.01f64..100.0) {
        let a = gaussian(n, seed);
        let u = EntryLaw::ComplexGaussian.sample(n, Seed::new(seed, 1)).unwrap();
        let v = EntryLaw::ComplexGaussian.sample(n, Seed::new(seed, 2)).unwrap();
        let b = ComplexMatrix::from_fn(n, n, |i, j| a.get(i, j) + size * u[i] * v[j].conj());
        prop_assert!(singular_cdf_distance(&a, &b).unwrap() <= 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn finite_variance_fixed_point_unique_upper_root(re in -2.0f64..2.0, im in -2.0f64..2.0, x in -3.0f64..3.0, eps in 1e-3f64..2.0) {
        let z = Complex64::new(re, im);
        let eta = Complex64::new(x, eps);
        let upper = nu_z_cubic_roots(z, eta).into_iter().filter(|r| r.im > 1e-12).count();
        prop_assert_eq!(upper, 1);
        let a = nu_z_fixed_point(z, eta).unwrap();
        let w = a + eta;
        prop_assert!(a.im > 0.0);
        prop_assert!((a - w / (z.norm_sqr() - w * w)).norm() < 1e-8 * (1.0 + a.norm()));
    }

    #[test]
    fn deterministic_marks_factor_out(alpha in 0.3f64..1.95, k in -4i32..4, seed in any::<u64>()) {
        let xi = sample_poisson_weights(alpha, 500, Seed::new(seed, 0)).unwrap();
        let y = 2f64.powi(k);
        let scaled: Vec<f64> = xi.iter().map(|v| y * v).collect();
        prop_assert_eq!(pairwise_sum(&scaled), y * pairwise_sum(&xi));
    }
}
