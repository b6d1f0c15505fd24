//! BT.601 full-range YCbCr split and recomposition.

use crate::error::{FusionError, Result};
use crate::image::{ColorImage, Image};

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Chrominance planes centered on zero (neutral gray has `cb = cr = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Chroma {
    pub cb: Image,
    pub cr: Image,
}

impl Chroma {
    pub fn neutral(width: usize, height: usize) -> Self {
        Self {
            cb: Image::zeros(width, height),
            cr: Image::zeros(width, height),
        }
    }
}

pub fn to_luminance(img: &ColorImage) -> (Image, Chroma) {
    let (w, h) = img.dims();
    let n = w * h;
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        let lum = KR * r[i] + KG * g[i] + KB * b[i];
        y.push(lum);
        cb.push((b[i] - lum) / (2.0 * (1.0 - KB)));
        cr.push((r[i] - lum) / (2.0 * (1.0 - KR)));
    }
    let plane = |d| Image::new(w, h, d).expect("dims taken from a valid image");
    (
        plane(y),
        Chroma {
            cb: plane(cb),
            cr: plane(cr),
        },
    )
}

/// Inverse of [`to_luminance`], clamped to `[0, 1]`.
pub fn recompose(lum: &Image, chroma: &Chroma) -> Result<ColorImage> {
    lum.ensure_same_dims(&chroma.cb)?;
    lum.ensure_same_dims(&chroma.cr)?;
    let n = lum.len();
    let mut planes = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        let y = lum.data()[i];
        let r = y + 2.0 * (1.0 - KR) * chroma.cr.data()[i];
        let b = y + 2.0 * (1.0 - KB) * chroma.cb.data()[i];
        let g = (y - KR * r - KB * b) / KG;
        planes[0].push(r.clamp(0.0, 1.0));
        planes[1].push(g.clamp(0.0, 1.0));
        planes[2].push(b.clamp(0.0, 1.0));
    }
    ColorImage::new(lum.width(), lum.height(), planes).map_err(|_| {
        FusionError::mismatch(lum.dims(), chroma.cb.dims())
    })
}
