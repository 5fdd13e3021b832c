use chi0_emos::numerics::integrate;
use chi0_emos::scoring::{crps_distribution, crps_ensemble};
use chi0_emos::{Chi0, Csg0, Gev0, Predictive, Predictive64, Quadrature};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// E|X - y| - E|X - X'|/2 with its standard error, from paired draws.
fn mc_crps(draws_a: &[f64], draws_b: &[f64], y: f64) -> (f64, f64) {
    let n = draws_a.len() as f64;
    let terms: Vec<f64> = draws_a
        .iter()
        .zip(draws_b)
        .map(|(a, b)| 0.5 * ((a - y).abs() + (b - y).abs()) - 0.5 * (a - b).abs())
        .collect();
    let mean = terms.iter().sum::<f64>() / n;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn upper_tail_integral_matches_monte_carlo() {
    let d = Chi0::new(2.0, 1.0).unwrap();
    let spec = Quadrature::default();
    let tail = integrate(|x| (1.0 - d.cdf_unchecked(x)).powi(2), 0.0, f64::INFINITY, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = d.sample(&mut rng, 10_000_000);
    let b = d.sample(&mut rng, 10_000_000);
    let (mc, se) = mc_crps(&a, &b, 0.0);
    assert!((tail.value - mc).abs() < 1e-3 && (tail.value - mc).abs() < 3.0 * se, "{} vs {mc} ± {se}", tail.value);
    // at y = 0 the CRPS is exactly this tail integral
    assert!((crps_distribution(&d, 0.0, &spec).unwrap() - tail.value).abs() < 1e-8);
}

fn random_distribution(rng: &mut ChaCha8Rng) -> Predictive64 {
    match rng.random_range(0..3) {
        0 => Chi0::new(rng.random_range(0.2..20.0), rng.random_range(0.2..3.0)).unwrap().into(),
        1 => Csg0::new(rng.random_range(0.3..5.0), rng.random_range(0.3..4.0), rng.random_range(0.0..2.0))
            .unwrap()
            .into(),
        _ => Gev0::new(rng.random_range(-1.0..6.0), rng.random_range(0.3..3.0), rng.random_range(0.0..0.45))
            .unwrap()
            .into(),
    }
}

#[test]
fn crps_is_proper_on_random_pairs() {
    let spec = Quadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut wins = 0;
    for _ in 0..10 {
        let truth = random_distribution(&mut rng);
        let other = random_distribution(&mut rng);
        let ys = truth.sample(&mut rng, 10_000);
        let mut own = 0.0;
        let mut alt = 0.0;
        for &y in &ys {
            let s = crps_distribution(&truth, y, &spec).unwrap();
            assert!(s >= 0.0);
            own += s;
            alt += crps_distribution(&other, y, &spec).unwrap();
        }
        if own <= alt {
            wins += 1;
        }
    }
    assert!(wins >= 9, "true distribution scored best in only {wins}/10 pairs");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ensemble_crps_ignores_member_order(
        members in prop::collection::vec(0.0..40.0f64, 1..30),
        y in 0.0..40.0f64,
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = crps_ensemble(&members, y).unwrap();
        let b = crps_ensemble(&shuffled, y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        prop_assert!(a >= 0.0);
    }
}
