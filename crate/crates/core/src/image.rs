//! Single-channel and color planes in the normalized `[0, 1]` domain.

use crate::error::{FusionError, Result};

/// Row-major single-channel plane. Samples are nominally in `[0, 1]`, but
/// intermediate planes (edge maps, synthetic test fields) may leave that
/// range until they are passed through [`Image::clamp01`].
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(FusionError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds a plane by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// Sample with replicate (edge-clamp) extension outside the plane.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    pub fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(FusionError::mismatch(self.dims(), other.dims()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two equally sized planes.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.ensure_same_dims(other)?;
        Ok(Image {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn clamp01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn transpose(&self) -> Image {
        Image::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }

    pub fn flip_horizontal(&self) -> Image {
        Image::from_fn(self.width, self.height, |r, c| {
            self.get(r, self.width - 1 - c)
        })
    }

    pub fn flip_vertical(&self) -> Image {
        Image::from_fn(self.width, self.height, |r, c| {
            self.get(self.height - 1 - r, c)
        })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Image) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Three equally sized color planes (R, G, B) in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    planes: [Vec<f64>; 3],
}

impl ColorImage {
    pub fn new(width: usize, height: usize, planes: [Vec<f64>; 3]) -> Result<Self> {
        let n = width * height;
        if width == 0 || height == 0 {
            return Err(FusionError::InvalidDimensions {
                width,
                height,
                len: planes[0].len(),
            });
        }
        if let Some(bad) = planes.iter().find(|p| p.len() != n) {
            return Err(FusionError::InvalidDimensions {
                width,
                height,
                len: bad.len(),
            });
        }
        Ok(Self {
            width,
            height,
            planes,
        })
    }

    /// Replicates a gray plane into all three channels.
    pub fn from_gray(img: &Image) -> Self {
        let d = img.data().to_vec();
        Self {
            width: img.width(),
            height: img.height(),
            planes: [d.clone(), d.clone(), d],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Vec<f64>; 3] {
        &self.planes
    }

    /// True when all three channels carry identical samples.
    pub fn is_gray(&self) -> bool {
        self.planes[0] == self.planes[1] && self.planes[1] == self.planes[2]
    }

    /// The red channel as a plane; meaningful for gray images.
    pub fn first_plane(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.planes[0].clone(),
        }
    }

    pub fn clamp01(&self) -> ColorImage {
        let clamp = |p: &Vec<f64>| p.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>();
        ColorImage {
            width: self.width,
            height: self.height,
            planes: [
                clamp(&self.planes[0]),
                clamp(&self.planes[1]),
                clamp(&self.planes[2]),
            ],
        }
    }
}

/// Axis-aligned square patch: top-left corner and side length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
}

impl Rect {
    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        col >= self.x0 && col < self.x0 + self.size && row >= self.y0 && row < self.y0 + self.size
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 + self.size <= width && self.y0 + self.size <= height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dims() {
        assert!(Image::new(0, 3, vec![]).is_err());
        assert!(Image::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::new(2, 2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn clamp_examples() {
        let img = Image::new(3, 1, vec![1.3, -0.1, 0.42]).unwrap();
        assert_eq!(img.clamp01().data(), &[1.0, 0.0, 0.42]);
    }

    #[test]
    fn clamp_is_idempotent() {
        let img = Image::from_fn(7, 5, |r, c| (r as f64 - 2.0) * 0.37 + c as f64 * 0.11);
        let once = img.clamp01();
        assert_eq!(once.clamp01(), once);
    }

    #[test]
    fn replicate_sampling() {
        let img = Image::from_fn(3, 2, |r, c| (r * 3 + c) as f64);
        assert_eq!(img.get_clamped(-1, -1), 0.0);
        assert_eq!(img.get_clamped(5, 1), 4.0);
        assert_eq!(img.get_clamped(0, 9), 2.0);
    }

    #[test]
    fn rect_contains() {
        let r = Rect { x0: 1, y0: 2, size: 2 };
        assert!(r.contains(2, 1));
        assert!(r.contains(3, 2));
        assert!(!r.contains(4, 2));
        assert!(!r.contains(2, 0));
        assert!(r.fits(3, 4));
        assert!(!r.fits(2, 4));
    }
}
