//! Seeded synthetic infrared/visible scenes for tests, demos and the bench.
//!
//! The infrared plane holds warm Gaussian blobs on a gentle ramp; the
//! visible plane holds step-edged rectangles on a ramp in the other
//! direction, so the two modalities carry complementary structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Image;

pub fn synthetic_pair(width: usize, height: usize, seed: u64) -> (Image, Image) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wf, hf) = (width as f64, height as f64);

    let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(2..=4))
        .map(|_| {
            (
                rng.random_range(0.15..0.85) * hf,
                rng.random_range(0.15..0.85) * wf,
                rng.random_range(0.06..0.16) * wf.min(hf),
                rng.random_range(0.35..0.6),
            )
        })
        .collect();
    let ir_base = rng.random_range(0.1..0.25);
    let ir_slope = rng.random_range(0.05..0.2);
    let ir = Image::from_fn(width, height, |r, c| {
        let (y, x) = (r as f64, c as f64);
        let mut v = ir_base + ir_slope * x / wf;
        for &(cy, cx, s, amp) in &blobs {
            let d2 = (y - cy).powi(2) + (x - cx).powi(2);
            v += amp * (-d2 / (2.0 * s * s)).exp();
        }
        v.clamp(0.0, 1.0)
    });

    let rects: Vec<(usize, usize, usize, usize, f64)> = (0..rng.random_range(2..=4))
        .map(|_| {
            let r0 = rng.random_range(0..height * 3 / 4);
            let c0 = rng.random_range(0..width * 3 / 4);
            let rh = rng.random_range(height / 8..=height / 3).max(1);
            let cw = rng.random_range(width / 8..=width / 3).max(1);
            (r0, c0, rh, cw, rng.random_range(-0.3..0.35))
        })
        .collect();
    let vi_base = rng.random_range(0.3..0.45);
    let vi_slope = rng.random_range(0.1..0.3);
    let vi = Image::from_fn(width, height, |r, c| {
        let mut v = vi_base + vi_slope * r as f64 / hf;
        for &(r0, c0, rh, cw, delta) in &rects {
            if r >= r0 && r < r0 + rh && c >= c0 && c < c0 + cw {
                v += delta;
            }
        }
        v.clamp(0.0, 1.0)
    });
    (ir, vi)
}
