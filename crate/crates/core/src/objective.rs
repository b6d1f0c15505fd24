//! Fusion objectives behind a common trait, looked up by name.
//!
//! An [`Objective`] is a recipe; binding it to a source pair yields a
//! [`BoundObjective`] that caches every source-only quantity and evaluates
//! the loss and its gradient for candidate fused planes. The optimizer only
//! sees the bound form, so any registered objective can be minimized the
//! same way.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::fris::max_image;
use crate::image::Image;
use crate::loss::{mean_abs_diff, rms_diff, sign0, AngularTargets, LossBreakdown, LossWeights};
use crate::spatial::{sobel, sobel_adjoint, GradientField};

pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn bind(&self, ir: &Image, vi: &Image) -> Result<Box<dyn BoundObjective>>;
}

pub trait BoundObjective: Send + Sync {
    fn loss(&self, fused: &Image) -> Result<LossBreakdown>;

    fn loss_and_gradient(&self, fused: &Image) -> Result<(LossBreakdown, Image)>;
}

/// Name of the angle-aware objective in the built-in registry.
pub const ANGULAR: &str = "angular";

#[derive(Debug, Clone, Copy)]
pub struct AngularObjective {
    pub weights: LossWeights,
}

impl Objective for AngularObjective {
    fn name(&self) -> &str {
        ANGULAR
    }

    fn bind(&self, ir: &Image, vi: &Image) -> Result<Box<dyn BoundObjective>> {
        Ok(Box::new(AngularTargets::new(ir, vi, self.weights)?))
    }
}

impl BoundObjective for AngularTargets {
    fn loss(&self, fused: &Image) -> Result<LossBreakdown> {
        AngularTargets::loss(self, fused)
    }

    fn loss_and_gradient(&self, fused: &Image) -> Result<(LossBreakdown, Image)> {
        AngularTargets::loss_and_gradient(self, fused)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// `||f - (w1 ir + w2 vi)||`
    Linear,
    /// `||f - ir|| + xi ||grad f - grad vi||`
    ModalPrior,
    /// Both intensity and both gradient terms, each with its own beta.
    MultiModal,
    /// `|f - max(ir, vi)|` plus `| |grad f| - max(|grad ir|, |grad vi|) |`.
    MaxPreserve,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Linear,
        BaselineKind::ModalPrior,
        BaselineKind::MultiModal,
        BaselineKind::MaxPreserve,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Linear => "linear",
            BaselineKind::ModalPrior => "modal_prior",
            BaselineKind::MultiModal => "multi_modal",
            BaselineKind::MaxPreserve => "max_preserve",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| FusionError::UnknownObjective(s.to_string()))
    }
}

/// Per-kind coefficients of the baseline objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineWeights {
    pub w1: f64,
    pub w2: f64,
    pub xi: f64,
    pub beta: [f64; 4],
    /// Weight of the gradient term of the max-preserving objective.
    pub max_grad: f64,
}

impl Default for BaselineWeights {
    fn default() -> Self {
        Self {
            w1: 0.5,
            w2: 0.5,
            xi: 5.0,
            beta: [0.5, 0.5, 0.5, 0.5],
            max_grad: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineObjective {
    pub kind: BaselineKind,
    pub weights: BaselineWeights,
}

impl Objective for BaselineObjective {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn bind(&self, ir: &Image, vi: &Image) -> Result<Box<dyn BoundObjective>> {
        Ok(Box::new(BoundBaseline::new(self.kind, self.weights, ir, vi)?))
    }
}

/// Evaluates one of the baseline objectives and returns its total.
pub fn baseline_loss(
    kind: BaselineKind,
    fused: &Image,
    ir: &Image,
    vi: &Image,
    weights: &BaselineWeights,
) -> Result<f64> {
    Ok(BoundBaseline::new(kind, *weights, ir, vi)?.loss(fused)?.l_total)
}

/// Baseline terms as a breakdown: `l_int` holds the intensity part and
/// `l_mag`/`l_grad` the gradient part; `l_angle` is always zero.
pub fn baseline_breakdown(
    kind: BaselineKind,
    fused: &Image,
    ir: &Image,
    vi: &Image,
    weights: &BaselineWeights,
) -> Result<LossBreakdown> {
    BoundBaseline::new(kind, *weights, ir, vi)?.loss(fused)
}

struct BoundBaseline {
    kind: BaselineKind,
    weights: BaselineWeights,
    ir: Image,
    vi: Image,
    blend: Image,
    max: Image,
    g_ir: GradientField,
    g_vi: GradientField,
    max_mag: Image,
}

impl BoundBaseline {
    fn new(kind: BaselineKind, weights: BaselineWeights, ir: &Image, vi: &Image) -> Result<Self> {
        ir.ensure_same_dims(vi)?;
        let blend = ir.zip_map(vi, |a, b| weights.w1 * a + weights.w2 * b)?;
        let max = max_image(ir, vi)?;
        let g_ir = sobel(ir);
        let g_vi = sobel(vi);
        let max_mag = g_ir.magnitude().zip_map(&g_vi.magnitude(), f64::max)?;
        Ok(Self {
            kind,
            weights,
            ir: ir.clone(),
            vi: vi.clone(),
            blend,
            max,
            g_ir,
            g_vi,
            max_mag,
        })
    }

    /// Returns the intensity and gradient terms, and their gradients when
    /// `grad` is supplied (accumulated into it).
    fn eval(&self, fused: &Image, mut grad: Option<&mut Image>) -> Result<LossBreakdown> {
        fused.ensure_same_dims(&self.ir)?;
        let w = &self.weights;
        let needs_field = !matches!(self.kind, BaselineKind::Linear);
        let g_f = if needs_field { Some(sobel(fused)) } else { None };
        let (wd, hd) = fused.dims();
        let mut upstream = GradientField::zeros(wd, hd);

        let rms = |target: &Image, weight: f64, grad: &mut Option<&mut Image>| -> f64 {
            let v = rms_diff(fused.data(), target.data());
            if let Some(g) = grad.as_deref_mut() {
                if weight != 0.0 && v > 0.0 {
                    let k = weight / (fused.len() as f64 * v);
                    for ((d, f), t) in g.data_mut().iter_mut().zip(fused.data()).zip(target.data()) {
                        *d += k * (f - t);
                    }
                }
            }
            weight * v
        };

        let (l_int, l_gradient) = match self.kind {
            BaselineKind::Linear => (rms(&self.blend, 1.0, &mut grad), 0.0),
            BaselineKind::ModalPrior => {
                let i = rms(&self.ir, 1.0, &mut grad);
                let gf = g_f.as_ref().expect("field computed");
                let g = field_rms(gf, &self.g_vi, w.xi, grad.is_some().then_some(&mut upstream));
                (i, g)
            }
            BaselineKind::MultiModal => {
                let i = rms(&self.ir, w.beta[0], &mut grad) + rms(&self.vi, w.beta[1], &mut grad);
                let gf = g_f.as_ref().expect("field computed");
                let want = grad.is_some();
                let g = field_rms(gf, &self.g_ir, w.beta[2], want.then_some(&mut upstream))
                    + field_rms(gf, &self.g_vi, w.beta[3], want.then_some(&mut upstream));
                (i, g)
            }
            BaselineKind::MaxPreserve => {
                let i = mean_abs_diff(fused.data(), self.max.data());
                let n = fused.len() as f64;
                if let Some(g) = grad.as_deref_mut() {
                    for ((d, f), t) in g.data_mut().iter_mut().zip(fused.data()).zip(self.max.data()) {
                        *d += sign0(f - t) / n;
                    }
                }
                let gf = g_f.as_ref().expect("field computed");
                let g = magnitude_mae(gf, &self.max_mag, w.max_grad, grad.is_some().then_some(&mut upstream));
                (i, g)
            }
        };

        if let (Some(g), true) = (grad, needs_field) {
            let pulled = sobel_adjoint(&upstream);
            for (d, p) in g.data_mut().iter_mut().zip(pulled.data()) {
                *d += p;
            }
        }

        Ok(LossBreakdown {
            l_int,
            l_mag: l_gradient,
            l_angle: 0.0,
            l_grad: l_gradient,
            l_total: l_int + l_gradient,
        })
    }
}

impl BoundObjective for BoundBaseline {
    fn loss(&self, fused: &Image) -> Result<LossBreakdown> {
        self.eval(fused, None)
    }

    fn loss_and_gradient(&self, fused: &Image) -> Result<(LossBreakdown, Image)> {
        let mut grad = Image::zeros(fused.width(), fused.height());
        let loss = self.eval(fused, Some(&mut grad))?;
        Ok((loss, grad))
    }
}

/// `weight * sqrt(mean(|g_f - g_t|^2))` over gradient vectors.
fn field_rms(gf: &GradientField, gt: &GradientField, weight: f64, upstream: Option<&mut GradientField>) -> f64 {
    let n = gf.gx.len() as f64;
    let mut sq = 0.0;
    for i in 0..gf.gx.len() {
        let dx = gf.gx.data()[i] - gt.gx.data()[i];
        let dy = gf.gy.data()[i] - gt.gy.data()[i];
        sq += dx * dx + dy * dy;
    }
    let v = (sq / n).sqrt();
    if let Some(up) = upstream {
        if weight != 0.0 && v > 0.0 {
            let k = weight / (n * v);
            for i in 0..gf.gx.len() {
                up.gx.data_mut()[i] += k * (gf.gx.data()[i] - gt.gx.data()[i]);
                up.gy.data_mut()[i] += k * (gf.gy.data()[i] - gt.gy.data()[i]);
            }
        }
    }
    weight * v
}

/// `weight * mean(| |g_f| - target |)`.
fn magnitude_mae(gf: &GradientField, target: &Image, weight: f64, upstream: Option<&mut GradientField>) -> f64 {
    let n = gf.gx.len() as f64;
    let mag = gf.magnitude();
    let v = mean_abs_diff(mag.data(), target.data());
    if let Some(up) = upstream {
        if weight != 0.0 {
            for i in 0..gf.gx.len() {
                let m = mag.data()[i];
                if m > 0.0 {
                    let k = weight * sign0(m - target.data()[i]) / (n * m);
                    up.gx.data_mut()[i] += k * gf.gx.data()[i];
                    up.gy.data_mut()[i] += k * gf.gy.data()[i];
                }
            }
        }
    }
    weight * v
}

/// Named objectives, kept in registration order.
#[derive(Clone, Default)]
pub struct ObjectiveRegistry {
    entries: Vec<Arc<dyn Objective>>,
}

impl ObjectiveRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The angular objective followed by the four baselines.
    pub fn builtin(weights: LossWeights, baseline: BaselineWeights) -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(AngularObjective { weights }));
        for kind in BaselineKind::ALL {
            reg.register(Arc::new(BaselineObjective {
                kind,
                weights: baseline,
            }));
        }
        reg
    }

    /// Adds an objective, replacing any existing one with the same name.
    pub fn register(&mut self, objective: Arc<dyn Objective>) {
        match self.entries.iter().position(|o| o.name() == objective.name()) {
            Some(i) => self.entries[i] = objective,
            None => self.entries.push(objective),
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Objective>> {
        self.entries
            .iter()
            .find(|o| o.name() == name)
            .cloned()
            .ok_or_else(|| FusionError::UnknownObjective(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|o| o.name())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Objective>> {
        self.entries.iter()
    }
}

impl fmt::Debug for ObjectiveRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
