//! Raster file I/O. PNG and binary PNM (P5/P6) at 8 bits per sample.
//!
//! Writes go through a temporary file in the destination directory and are
//! renamed into place, so a failed save never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{FusionError, Result};
use crate::image::{ColorImage, Image};

/// Either kind of plane accepted by [`save_image`].
#[derive(Debug, Clone, Copy)]
pub enum Raster<'a> {
    Gray(&'a Image),
    Color(&'a ColorImage),
}

impl<'a> From<&'a Image> for Raster<'a> {
    fn from(img: &'a Image) -> Self {
        Raster::Gray(img)
    }
}

impl<'a> From<&'a ColorImage> for Raster<'a> {
    fn from(img: &'a ColorImage) -> Self {
        Raster::Color(img)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Png,
    Pgm,
    Ppm,
}

fn kind_for(path: &Path) -> Result<FileKind> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("png") => Ok(FileKind::Png),
        Some("pgm") => Ok(FileKind::Pgm),
        Some("ppm") | Some("pnm") => Ok(FileKind::Ppm),
        _ => Err(FusionError::UnsupportedFormat(path.to_path_buf())),
    }
}

/// Maps a normalized sample to an 8-bit code: `round(v * 255)` clamped.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Loads a PNG or binary PNM file, scaling 8-bit codes into `[0, 1]`.
/// Gray files come back with three identical channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let read_err = |source| FusionError::Read {
        path: path.to_path_buf(),
        source,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| read_err(image::ImageError::IoError(e)))?
        .with_guessed_format()
        .map_err(|e| read_err(image::ImageError::IoError(e)))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        _ => return Err(FusionError::UnsupportedFormat(path.to_path_buf())),
    }
    let decoded = reader.decode().map_err(read_err)?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut planes = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for px in rgb.pixels() {
        for (plane, &code) in planes.iter_mut().zip(px.0.iter()) {
            plane.push(code as f64 / 255.0);
        }
    }
    ColorImage::new(w, h, planes)
}

/// Loads a file and returns its first channel, or the BT.601 luminance when
/// the file is color.
pub fn load_gray(path: impl AsRef<Path>) -> Result<Image> {
    let color = load_image(path)?;
    if color.is_gray() {
        Ok(color.first_plane())
    } else {
        Ok(crate::color::to_luminance(&color).0)
    }
}

/// Encodes to the format implied by the file extension and writes atomically.
pub fn save_image<'a>(img: impl Into<Raster<'a>>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raster = img.into();
    let kind = kind_for(path)?;
    let (w, h, bytes, color) = match raster {
        Raster::Gray(g) => {
            let codes: Vec<u8> = g.data().iter().map(|&v| quantize(v)).collect();
            if kind == FileKind::Ppm {
                let rgb = codes.iter().flat_map(|&c| [c, c, c]).collect();
                (g.width(), g.height(), rgb, true)
            } else {
                (g.width(), g.height(), codes, false)
            }
        }
        Raster::Color(c) => {
            if kind == FileKind::Pgm {
                return Err(FusionError::UnsupportedFormat(path.to_path_buf()));
            }
            let n = c.width() * c.height();
            let mut rgb = Vec::with_capacity(3 * n);
            for i in 0..n {
                for ch in 0..3 {
                    rgb.push(quantize(c.plane(ch)[i]));
                }
            }
            (c.width(), c.height(), rgb, true)
        }
    };
    let color_type = if color {
        ExtendedColorType::Rgb8
    } else {
        ExtendedColorType::L8
    };
    let mut encoded = Vec::new();
    let result = match kind {
        FileKind::Png => PngEncoder::new(&mut encoded).write_image(&bytes, w as u32, h as u32, color_type),
        FileKind::Pgm | FileKind::Ppm => {
            let subtype = if color {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            };
            PnmEncoder::new(&mut encoded)
                .with_subtype(subtype)
                .write_image(&bytes, w as u32, h as u32, color_type)
        }
    };
    result.map_err(|e| FusionError::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    write_atomic(path, &encoded)
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let write_err = |source| FusionError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(write_err)?;
    tmp.write_all(bytes).map_err(write_err)?;
    tmp.persist(path).map_err(|e| write_err(e.error))?;
    Ok(())
}
