#![allow(dead_code)]

use purposedyn::{Empirical, FirmParams, Lognormal, TalentDistribution, WorkerParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_worker(rng: &mut impl Rng) -> WorkerParams {
    WorkerParams::new(
        rng.gen_range(0.02..0.98),
        rng.gen_range(0.02..1.5),
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.2..5.0),
    )
    .unwrap()
}

/// Empirical law with 1 to 6 atoms in [0.3, 3].
pub fn random_empirical(rng: &mut impl Rng) -> Empirical {
    let n = rng.gen_range(1..=6);
    let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
    Empirical::from_samples(&samples).unwrap()
}

/// Lognormal with one of the three standard powers, dispersion kept small
/// enough that every moment up to order 2 stays moderate.
pub fn random_lognormal(rng: &mut impl Rng) -> Lognormal {
    let power = [1.0 / 3.0, 1.0, 2.0][rng.gen_range(0..3)];
    let (mu_max, s2_max) = if power < 0.5 {
        (0.15, 0.08)
    } else {
        (0.5, 0.5)
    };
    Lognormal::with_power(
        rng.gen_range(-mu_max..mu_max),
        rng.gen_range(0.0..s2_max),
        power,
    )
    .unwrap()
}

pub fn random_distribution(rng: &mut impl Rng) -> TalentDistribution {
    if rng.gen_bool(0.5) {
        random_lognormal(rng).into()
    } else {
        random_empirical(rng).into()
    }
}

pub fn random_firm(rng: &mut impl Rng) -> FirmParams {
    let worker = random_worker(rng);
    let delta = rng.gen_range(0.05..0.95);
    let lambda = rng.gen_range(0.0..0.95);
    let c = rng.gen_range(0.2..5.0);
    FirmParams::new(worker, delta, lambda, c, random_distribution(rng)).unwrap()
}

pub fn firm_with(rng: &mut impl Rng, dist: TalentDistribution) -> FirmParams {
    let fp = random_firm(rng);
    fp.with_distribution(dist).unwrap()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
