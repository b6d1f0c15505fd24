//! Angle-aware fusion loss.
//!
//! * intensity: mean absolute error against the synthesized reference;
//! * magnitude: RMS gap between the fused and reference gradient magnitudes;
//! * angle: one minus the mean per-pixel cosine between the fused and
//!   reference gradient vectors.
//!
//! The reference gradient picks, per pixel, whichever source has the larger
//! Sobel magnitude (visible on ties). Norms are divided by the pixel count so
//! that weights and step sizes do not depend on resolution.
//!
//! Both the reference bundle and the reference gradient depend only on the
//! sources, so [`AngularTargets`] computes them once and then evaluates the
//! loss and its exact gradient for any number of fused candidates.

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::fris::{synthesize_reference_with, EdgeSign, ReferenceBundle, DEFAULT_ALPHA};
use crate::image::Image;
use crate::spatial::{sobel, sobel_adjoint, GradientField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub eps: f64,
    #[serde(default)]
    pub edge_sign: EdgeSign,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda1: 5.0,
            lambda2: 1.0,
            alpha: DEFAULT_ALPHA,
            eps: 1e-8,
            edge_sign: EdgeSign::Plus,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(FusionError::param("lambda1", format!("{} must be >= 0", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(FusionError::param("lambda2", format!("{} must be >= 0", self.lambda2)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(FusionError::param("eps", format!("{} must be > 0", self.eps)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(FusionError::param("alpha", format!("{} is outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_int: f64,
    pub l_mag: f64,
    pub l_angle: f64,
    pub l_grad: f64,
    pub l_total: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        [self.l_int, self.l_mag, self.l_angle, self.l_grad, self.l_total]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// A breakdown together with the weights that produced it, as written to
/// JSON by the command-line tools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossRecord {
    #[serde(flatten)]
    pub loss: LossBreakdown,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl LossRecord {
    pub fn new(loss: LossBreakdown, w: &LossWeights) -> Self {
        Self {
            loss,
            lambda1: w.lambda1,
            lambda2: w.lambda2,
            alpha: w.alpha,
            eps: w.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Infrared,
    Visible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGradient {
    pub field: GradientField,
    pub mag: Image,
    pub winner: Vec<Source>,
}

pub fn reference_gradient(ir: &Image, vi: &Image) -> Result<ReferenceGradient> {
    ir.ensure_same_dims(vi)?;
    let g_ir = sobel(ir);
    let g_vi = sobel(vi);
    let m_ir = g_ir.magnitude();
    let m_vi = g_vi.magnitude();
    let (w, h) = ir.dims();
    let mut field = GradientField::zeros(w, h);
    let mut winner = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let (src, gx, gy) = if m_ir.data()[i] > m_vi.data()[i] {
            (Source::Infrared, g_ir.gx.data()[i], g_ir.gy.data()[i])
        } else {
            (Source::Visible, g_vi.gx.data()[i], g_vi.gy.data()[i])
        };
        field.gx.data_mut()[i] = gx;
        field.gy.data_mut()[i] = gy;
        winner.push(src);
    }
    let mag = field.magnitude();
    Ok(ReferenceGradient { field, mag, winner })
}

pub fn loss_int(fused: &Image, bundle: &ReferenceBundle) -> Result<f64> {
    fused.ensure_same_dims(&bundle.i_ref)?;
    Ok(mean_abs_diff(fused.data(), bundle.i_ref.data()))
}

pub fn loss_mag(fused: &Image, reference: &ReferenceGradient) -> Result<f64> {
    fused.ensure_same_dims(&reference.mag)?;
    let mag_f = sobel(fused).magnitude();
    Ok(rms_diff(mag_f.data(), reference.mag.data()))
}

pub fn loss_angle(fused: &Image, reference: &ReferenceGradient, eps: f64) -> Result<f64> {
    fused.ensure_same_dims(&reference.mag)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(FusionError::param("eps", format!("{eps} must be > 0")));
    }
    let g = sobel(fused);
    Ok(angle_terms(&g, reference, eps, false).0)
}

/// Returns `(l_mag, l_angle, l_grad)`.
pub fn loss_grad(
    fused: &Image,
    reference: &ReferenceGradient,
    w: &LossWeights,
) -> Result<(f64, f64, f64)> {
    let l_mag = loss_mag(fused, reference)?;
    let l_angle = loss_angle(fused, reference, w.eps)?;
    Ok((l_mag, l_angle, w.lambda1 * l_mag + w.lambda2 * l_angle))
}

pub fn loss_total(fused: &Image, ir: &Image, vi: &Image, w: &LossWeights) -> Result<LossBreakdown> {
    let targets = AngularTargets::new(ir, vi, *w)?;
    targets.loss(fused)
}

/// Exact gradient of [`loss_total`] with respect to every fused pixel.
pub fn loss_total_grad(fused: &Image, ir: &Image, vi: &Image, w: &LossWeights) -> Result<Image> {
    let targets = AngularTargets::new(ir, vi, *w)?;
    Ok(targets.loss_and_gradient(fused)?.1)
}

/// Source-dependent quantities of the angular loss, computed once.
#[derive(Debug, Clone)]
pub struct AngularTargets {
    pub bundle: ReferenceBundle,
    pub reference: ReferenceGradient,
    pub weights: LossWeights,
}

impl AngularTargets {
    pub fn new(ir: &Image, vi: &Image, weights: LossWeights) -> Result<Self> {
        weights.validate()?;
        let bundle = synthesize_reference_with(ir, vi, weights.alpha, weights.edge_sign)?;
        let reference = reference_gradient(ir, vi)?;
        Ok(Self {
            bundle,
            reference,
            weights,
        })
    }

    pub fn loss(&self, fused: &Image) -> Result<LossBreakdown> {
        fused.ensure_same_dims(&self.bundle.i_ref)?;
        let g = sobel(fused);
        Ok(self.breakdown(fused, &g))
    }

    pub fn loss_and_gradient(&self, fused: &Image) -> Result<(LossBreakdown, Image)> {
        fused.ensure_same_dims(&self.bundle.i_ref)?;
        let w = &self.weights;
        let n = fused.len() as f64;
        let g = sobel(fused);
        let breakdown = self.breakdown(fused, &g);

        // d l_int: sign(f - ref) / N, zero at exact ties.
        let mut grad = fused.zip_map(&self.bundle.i_ref, |f, r| sign0(f - r) / n)?;

        // Gradient of the weighted gradient terms with respect to the fused
        // Sobel field, then pulled back through the Sobel adjoint.
        let (wd, hd) = fused.dims();
        let mut upstream = GradientField::zeros(wd, hd);
        let rms = breakdown.l_mag;
        let eps = w.eps;
        let reference = &self.reference;
        for i in 0..fused.len() {
            let gx = g.gx.data()[i];
            let gy = g.gy.data()[i];
            let mf = gx.hypot(gy);
            let rx = reference.field.gx.data()[i];
            let ry = reference.field.gy.data()[i];
            let mr = reference.mag.data()[i];
            let mut ux = 0.0;
            let mut uy = 0.0;

            if w.lambda1 != 0.0 && rms > 0.0 && mf > 0.0 {
                let scale = w.lambda1 * (mf - mr) / (n * rms * mf);
                ux += scale * gx;
                uy += scale * gy;
            }

            if w.lambda2 != 0.0 && !(mr < eps && mf < eps) {
                let dot = rx * gx + ry * gy;
                let denom = mr * mf + eps;
                // d cs / d g = r / D - dot * mr * g / (mf * D^2)
                let (cx, cy) = if mf > 0.0 {
                    let k = dot * mr / (mf * denom * denom);
                    (rx / denom - k * gx, ry / denom - k * gy)
                } else {
                    (rx / denom, ry / denom)
                };
                ux -= w.lambda2 * cx / n;
                uy -= w.lambda2 * cy / n;
            }

            upstream.gx.data_mut()[i] = ux;
            upstream.gy.data_mut()[i] = uy;
        }
        let pulled = sobel_adjoint(&upstream);
        for (d, p) in grad.data_mut().iter_mut().zip(pulled.data()) {
            *d += p;
        }
        Ok((breakdown, grad))
    }

    fn breakdown(&self, fused: &Image, g: &GradientField) -> LossBreakdown {
        let w = &self.weights;
        let l_int = mean_abs_diff(fused.data(), self.bundle.i_ref.data());
        let (l_angle, l_mag) = angle_terms(g, &self.reference, w.eps, true);
        let l_grad = w.lambda1 * l_mag + w.lambda2 * l_angle;
        LossBreakdown {
            l_int,
            l_mag,
            l_angle,
            l_grad,
            l_total: l_int + l_grad,
        }
    }
}

/// One pass over the fused field: returns `(l_angle, l_mag)`; `l_mag` is
/// only accumulated when requested.
fn angle_terms(g: &GradientField, reference: &ReferenceGradient, eps: f64, with_mag: bool) -> (f64, f64) {
    let n = g.gx.len();
    let mut cs_sum = 0.0;
    let mut sq_sum = 0.0;
    for i in 0..n {
        let gx = g.gx.data()[i];
        let gy = g.gy.data()[i];
        let mf = gx.hypot(gy);
        let mr = reference.mag.data()[i];
        cs_sum += cosine(
            reference.field.gx.data()[i],
            reference.field.gy.data()[i],
            mr,
            gx,
            gy,
            mf,
            eps,
        );
        if with_mag {
            let d = mf - mr;
            sq_sum += d * d;
        }
    }
    let l_angle = (1.0 - cs_sum / n as f64).clamp(0.0, 2.0);
    (l_angle, (sq_sum / n as f64).sqrt())
}

/// Guarded cosine similarity; flat-on-flat pixels count as aligned.
#[inline]
pub(crate) fn cosine(rx: f64, ry: f64, mr: f64, fx: f64, fy: f64, mf: f64, eps: f64) -> f64 {
    if mr < eps && mf < eps {
        1.0
    } else {
        (rx * fx + ry * fy) / (mr * mf + eps)
    }
}

#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

pub(crate) fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}
