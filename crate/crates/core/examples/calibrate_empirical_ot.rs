//! Calibration runs for the empirical-OT acceptance band.
//!
//! For each pair seed, draws a pair of 2-d Gaussian laws, samples two
//! independent clouds of 200 points and compares the exact empirical W2²
//! with the closed form. Prints per-seed relative errors and quantiles.

use gaussot::oracle::{empirical_w2_squared, SampleCloud};
use gaussot::random::{random_law, random_spd};
use gaussot::w2_squared;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 200;
const MEAN_SCALE: f64 = 2.0;

fn main() {
    let runs: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let common = std::env::args().any(|a| a == "--common");
    let mut errors = Vec::new();
    for seed in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_law(random_spd(2, &mut rng), MEAN_SCALE, &mut rng);
        let nu = random_law(random_spd(2, &mut rng), MEAN_SCALE, &mut rng);
        let exact = w2_squared(&mu, &nu).unwrap();
        let x = SampleCloud::from_points(&mu.sample(N, &mut ChaCha8Rng::seed_from_u64(1000 + seed))).unwrap();
        let y_seed = if common { 1000 + seed } else { 2000 + seed };
        let y = SampleCloud::from_points(&nu.sample(N, &mut ChaCha8Rng::seed_from_u64(y_seed))).unwrap();
        let emp = empirical_w2_squared(&x, &y).unwrap();
        let rel = (emp - exact) / exact;
        println!("seed {seed:3}  w2² {exact:9.4}  empirical {emp:9.4}  relative error {rel:+.4}");
        errors.push(rel.abs());
    }
    errors.sort_by(f64::total_cmp);
    let q = |p: f64| errors[((errors.len() - 1) as f64 * p).round() as usize];
    println!("|relative error| quantiles: 50% {:.4}  90% {:.4}  95% {:.4}  99% {:.4}  max {:.4}", q(0.5), q(0.9), q(0.95), q(0.99), q(1.0));
}
