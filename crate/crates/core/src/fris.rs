//! Reference image synthesis: Laplacian edge injection on the pixelwise
//! maximum, global histogram equalization, and an alpha blend of the two.

use crate::error::{FusionError, Result};
use crate::image::Image;
use crate::spatial::{hist_equalize, laplacian};

pub const DEFAULT_ALPHA: f64 = 0.75;

/// Sign applied to the Laplacian before it is added to the max image.
/// `Plus` adds the raw 4-neighbor response; `Minus` is classical sharpening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSign {
    #[default]
    Plus,
    Minus,
}

impl EdgeSign {
    pub fn factor(self) -> f64 {
        match self {
            EdgeSign::Plus => 1.0,
            EdgeSign::Minus => -1.0,
        }
    }

    pub fn from_factor(v: i32) -> Option<Self> {
        match v {
            1 => Some(EdgeSign::Plus),
            -1 => Some(EdgeSign::Minus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBundle {
    /// Signed edge plane, not clamped.
    pub i_edge: Image,
    pub i_max: Image,
    pub i_en: Image,
    pub i_eq: Image,
    pub i_ref: Image,
    pub alpha: f64,
}

pub fn max_image(ir: &Image, vi: &Image) -> Result<Image> {
    ir.zip_map(vi, f64::max)
}

pub fn synthesize_reference(ir: &Image, vi: &Image, alpha: f64) -> Result<ReferenceBundle> {
    synthesize_reference_with(ir, vi, alpha, EdgeSign::Plus)
}

pub fn synthesize_reference_with(
    ir: &Image,
    vi: &Image,
    alpha: f64,
    edge_sign: EdgeSign,
) -> Result<ReferenceBundle> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FusionError::param("alpha", format!("{alpha} is outside [0, 1]")));
    }
    let sum = ir.zip_map(vi, |a, b| a + b)?;
    let sign = edge_sign.factor();
    let i_edge = laplacian(&sum).map(|v| sign * v);
    let i_max = max_image(ir, vi)?;
    let i_en = i_edge.zip_map(&i_max, |e, m| e + m)?.clamp01();
    let i_eq = hist_equalize(&i_en);
    let i_ref = i_en.zip_map(&i_eq, |en, eq| alpha * en + (1.0 - alpha) * eq)?;
    Ok(ReferenceBundle {
        i_edge,
        i_max,
        i_en,
        i_eq,
        i_ref,
        alpha,
    })
}
