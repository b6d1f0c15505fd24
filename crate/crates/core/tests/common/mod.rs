#![allow(dead_code)]

use irvis_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| rng.random::<f64>())
}

/// Seed that changes from run to run; printed so failures can be replayed.
pub fn fresh_seed(label: &str) -> u64 {
    let seed = std::env::var("IRVIS_TEST_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0)
        });
    eprintln!("{label}: seed {seed} (replay with IRVIS_TEST_SEED={seed})");
    seed
}
