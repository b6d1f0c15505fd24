//! Complementary masking: a random square patch in which each pixel is
//! visible in exactly one modality.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FusionError, Result};
use crate::image::{Image, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPair {
    pub m_ir: Image,
    pub m_vi: Image,
    pub patch: Rect,
    pub seed: u64,
}

/// Patch side used when none is configured: half the shorter side.
pub fn default_patch_size(width: usize, height: usize) -> usize {
    (width.min(height) / 2).max(1)
}

/// Draws a patch corner uniformly, then switches on exactly `ceil(k^2 / 2)`
/// infrared cells inside it via a seeded shuffle. The visible mask is the
/// complement inside the patch; both masks are 1 elsewhere.
pub fn gen_mask_pair(width: usize, height: usize, k: usize, seed: u64) -> Result<MaskPair> {
    if width == 0 || height == 0 {
        return Err(FusionError::InvalidDimensions {
            width,
            height,
            len: 0,
        });
    }
    if k == 0 || k > width.min(height) {
        return Err(FusionError::param(
            "k",
            format!("patch size {k} must lie in 1..={}", width.min(height)),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = rng.random_range(0..=width - k);
    let y0 = rng.random_range(0..=height - k);
    let patch = Rect { x0, y0, size: k };

    let cells = k * k;
    let ones = cells.div_ceil(2);
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(&mut rng);
    let mut pattern = vec![0.0; cells];
    for &i in &order[..ones] {
        pattern[i] = 1.0;
    }

    let mut m_ir = Image::filled(width, height, 1.0);
    let mut m_vi = Image::filled(width, height, 1.0);
    for pr in 0..k {
        for pc in 0..k {
            let v = pattern[pr * k + pc];
            m_ir.set(y0 + pr, x0 + pc, v);
            m_vi.set(y0 + pr, x0 + pc, 1.0 - v);
        }
    }
    Ok(MaskPair {
        m_ir,
        m_vi,
        patch,
        seed,
    })
}

/// Elementwise products `(ir * m_ir, vi * m_vi)`.
pub fn apply_masks(ir: &Image, vi: &Image, masks: &MaskPair) -> Result<(Image, Image)> {
    ir.ensure_same_dims(vi)?;
    ir.ensure_same_dims(&masks.m_ir)?;
    Ok((
        ir.zip_map(&masks.m_ir, |a, m| a * m)?,
        vi.zip_map(&masks.m_vi, |a, m| a * m)?,
    ))
}
