//! Sobel gradient field and its adjoint, 4-neighbor Laplacian, and global
//! histogram equalization. All stencils use replicate padding and are applied
//! as correlations, so `gx` is positive on a left-to-right increasing ramp.

use crate::image::Image;

/// Horizontal Sobel kernel, indexed `[dr + 1][dc + 1]`.
pub const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
/// Vertical Sobel kernel, the transpose of [`SOBEL_X`].
pub const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
pub const LAPLACIAN: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

/// Number of quantization levels used by histogram operations.
pub const LEVELS: usize = 256;

/// Horizontal and vertical derivative planes of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: Image,
    pub gy: Image,
}

impl GradientField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            gx: Image::zeros(width, height),
            gy: Image::zeros(width, height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.gx.dims()
    }

    /// Per-pixel Euclidean norm of the gradient vector.
    pub fn magnitude(&self) -> Image {
        self.gx
            .zip_map(&self.gy, f64::hypot)
            .expect("gradient planes share dimensions")
    }

    pub fn dot(&self, other: &GradientField) -> f64 {
        self.gx.dot(&other.gx) + self.gy.dot(&other.gy)
    }
}

#[cfg(test)]
fn correlate3(img: &Image, kernel: &[[f64; 3]; 3]) -> Image {
    let (w, h) = img.dims();
    let mut out = Image::zeros(w, h);
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (dr, row) in kernel.iter().enumerate() {
                for (dc, &k) in row.iter().enumerate() {
                    if k != 0.0 {
                        acc += k * img.get_clamped(r as isize + dr as isize - 1, c as isize + dc as isize - 1);
                    }
                }
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// Transpose of a 3x3 replicate-padded correlation: every output tap scatters back to the source
/// pixel it read, with clamped reads folding onto the border.
fn correlate3_adjoint(field: &Image, kernel: &[[f64; 3]; 3], out: &mut Image) {
    let (w, h) = field.dims();
    for r in 0..h {
        for c in 0..w {
            let u = field.get(r, c);
            if u == 0.0 {
                continue;
            }
            for (dr, row) in kernel.iter().enumerate() {
                let sr = (r as isize + dr as isize - 1).clamp(0, h as isize - 1) as usize;
                for (dc, &k) in row.iter().enumerate() {
                    if k != 0.0 {
                        let sc = (c as isize + dc as isize - 1).clamp(0, w as isize - 1) as usize;
                        let idx = sr * w + sc;
                        out.data_mut()[idx] += k * u;
                    }
                }
            }
        }
    }
}

pub fn sobel(img: &Image) -> GradientField {
    let (w, h) = img.dims();
    let mut gx = Image::zeros(w, h);
    let mut gy = Image::zeros(w, h);
    for r in 0..h {
        let (ri, rp, rn) = (r as isize, r as isize - 1, r as isize + 1);
        for c in 0..w {
            let (ci, cp, cn) = (c as isize, c as isize - 1, c as isize + 1);
            let at = |rr, cc| img.get_clamped(rr, cc);
            // Opposite sides are summed separately so that flat regions
            // cancel exactly.
            let right = at(rp, cn) + 2.0 * at(ri, cn) + at(rn, cn);
            let left = at(rp, cp) + 2.0 * at(ri, cp) + at(rn, cp);
            let below = at(rn, cp) + 2.0 * at(rn, ci) + at(rn, cn);
            let above = at(rp, cp) + 2.0 * at(rp, ci) + at(rp, cn);
            gx.set(r, c, right - left);
            gy.set(r, c, below - above);
        }
    }
    GradientField { gx, gy }
}

/// Adjoint of [`sobel`]: satisfies `<sobel(x), u> = <x, sobel_adjoint(u)>`.
pub fn sobel_adjoint(field: &GradientField) -> Image {
    let (w, h) = field.dims();
    let mut out = Image::zeros(w, h);
    correlate3_adjoint(&field.gx, &SOBEL_X, &mut out);
    correlate3_adjoint(&field.gy, &SOBEL_Y, &mut out);
    out
}

/// Signed 4-neighbor Laplacian.
pub fn laplacian(img: &Image) -> Image {
    let (w, h) = img.dims();
    Image::from_fn(w, h, |r, c| {
        let (r, c) = (r as isize, c as isize);
        let neighbors = img.get_clamped(r - 1, c)
            + img.get_clamped(r + 1, c)
            + img.get_clamped(r, c - 1)
            + img.get_clamped(r, c + 1);
        neighbors - 4.0 * img.get_clamped(r, c)
    })
}

/// Quantizes a normalized sample to a histogram level `round(v * 255)`.
#[inline]
pub fn level_of(v: f64) -> usize {
    (v * 255.0).round().clamp(0.0, 255.0) as usize
}

pub fn histogram(img: &Image) -> [usize; LEVELS] {
    let mut hist = [0usize; LEVELS];
    for &v in img.data() {
        hist[level_of(v)] += 1;
    }
    hist
}

/// Global histogram equalization onto `[0, 1]`.
///
/// Level `v` maps to `(C(v) - C_min) / (N - C_min)` where `C` is the
/// cumulative count and `C_min` the smallest nonzero cumulative count. A
/// single occupied level gives `0 / 0`, which is defined as `1.0`.
pub fn hist_equalize(img: &Image) -> Image {
    let hist = histogram(img);
    let n = img.len();
    let mut cdf = [0usize; LEVELS];
    let mut acc = 0;
    for (slot, &count) in cdf.iter_mut().zip(hist.iter()) {
        acc += count;
        *slot = acc;
    }
    let c_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(n);
    let denom = (n - c_min) as f64;
    let mut lut = [1.0f64; LEVELS];
    if denom > 0.0 {
        for (out, &c) in lut.iter_mut().zip(cdf.iter()) {
            *out = (c.saturating_sub(c_min)) as f64 / denom;
        }
    }
    img.map(|v| lut[level_of(v)])
}
