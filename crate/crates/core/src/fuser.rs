//! Direct minimization of a fusion objective over the fused pixel plane
//! with bias-corrected adaptive-moment gradient descent.

use serde::{Deserialize, Serialize};

use crate::commask::{apply_masks, MaskPair};
use crate::error::{FusionError, Result};
use crate::fris::{max_image, synthesize_reference_with};
use crate::image::Image;
use crate::loss::{LossBreakdown, LossWeights};
use crate::objective::{AngularObjective, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// The synthesized reference `alpha * i_en + (1 - alpha) * i_eq`.
    #[default]
    Reference,
    Max,
    Average,
}

impl std::str::FromStr for Init {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(Init::Reference),
            "max" => Ok(Init::Max),
            "average" => Ok(Init::Average),
            other => Err(FusionError::param("init", format!("unknown initialization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuserConfig {
    pub init: Init,
    pub step_size: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub betas: (f64, f64),
    pub weights: LossWeights,
    pub project_each_step: bool,
}

impl Default for FuserConfig {
    fn default() -> Self {
        Self {
            init: Init::Reference,
            step_size: 1e-2,
            max_iters: 300,
            rel_tol: 1e-5,
            betas: (0.9, 0.999),
            weights: LossWeights::default(),
            project_each_step: true,
        }
    }
}

impl FuserConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(FusionError::param("step_size", format!("{} must be > 0", self.step_size)));
        }
        if self.max_iters == 0 {
            return Err(FusionError::param("max_iters", "must be at least 1"));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(FusionError::param("rel_tol", format!("{} must be > 0", self.rel_tol)));
        }
        for (name, b) in [("beta1", self.betas.0), ("beta2", self.betas.1)] {
            if !(0.0..1.0).contains(&b) {
                return Err(FusionError::param(name, format!("{b} is outside [0, 1)")));
            }
        }
        self.weights.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tol,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseTrace {
    pub losses: Vec<LossBreakdown>,
    pub iterations_run: usize,
    pub terminated_by: Termination,
}

impl FuseTrace {
    pub fn initial(&self) -> &LossBreakdown {
        &self.losses[0]
    }

    pub fn last(&self) -> &LossBreakdown {
        self.losses.last().expect("trace holds at least one entry")
    }

    /// CSV with header `iteration,l_int,l_mag,l_angle,l_grad,l_total`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,l_int,l_mag,l_angle,l_grad,l_total\n");
        for (i, l) in self.losses.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                l.l_int,
                l.l_mag,
                l.l_angle,
                l.l_grad,
                l.l_total
            ));
        }
        out
    }
}

/// Starting plane for the optimizer.
pub fn initial_plane(ir: &Image, vi: &Image, cfg: &FuserConfig) -> Result<Image> {
    ir.ensure_same_dims(vi)?;
    match cfg.init {
        Init::Reference => Ok(synthesize_reference_with(ir, vi, cfg.weights.alpha, cfg.weights.edge_sign)?.i_ref),
        Init::Max => max_image(ir, vi),
        Init::Average => ir.zip_map(vi, |a, b| 0.5 * (a + b)),
    }
}

/// Fuses with the angle-aware objective built from `cfg.weights`.
pub fn fuse(ir: &Image, vi: &Image, cfg: &FuserConfig) -> Result<(Image, FuseTrace)> {
    fuse_with(&AngularObjective { weights: cfg.weights }, ir, vi, cfg)
}

/// Masks the pair with `masks`, then fuses the masked inputs.
pub fn fuse_masked(ir: &Image, vi: &Image, masks: &MaskPair, cfg: &FuserConfig) -> Result<(Image, FuseTrace)> {
    let (ir_m, vi_m) = apply_masks(ir, vi, masks)?;
    fuse(&ir_m, &vi_m, cfg)
}

/// Minimizes any objective. Each iteration evaluates the loss at the current
/// plane and records it; the run stops once the relative change of the
/// total loss drops below `rel_tol`, the gradient vanishes, or `max_iters`
/// evaluations have been made. The returned plane is the one whose loss was
/// recorded last, clamped to `[0, 1]`.
pub fn fuse_with(objective: &dyn Objective, ir: &Image, vi: &Image, cfg: &FuserConfig) -> Result<(Image, FuseTrace)> {
    cfg.validate()?;
    ir.ensure_same_dims(vi)?;
    let bound = objective.bind(ir, vi)?;
    let mut fused = initial_plane(ir, vi, cfg)?;
    if cfg.project_each_step {
        fused = fused.clamp01();
    }

    let n = fused.len();
    let (beta1, beta2) = cfg.betas;
    let adam_eps = 1e-8;
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut losses: Vec<LossBreakdown> = Vec::new();
    let mut terminated_by = Termination::MaxIters;

    for iter in 1..=cfg.max_iters {
        let (loss, grad) = bound.loss_and_gradient(&fused)?;
        if !loss.is_finite() || grad.data().iter().any(|g| !g.is_finite()) {
            return Err(FusionError::NonFiniteLoss { iteration: iter });
        }
        let converged = match losses.last() {
            Some(prev) => (loss.l_total - prev.l_total).abs() / prev.l_total.max(1e-12) < cfg.rel_tol,
            None => false,
        };
        losses.push(loss);
        if converged || grad.data().iter().all(|&g| g == 0.0) {
            terminated_by = Termination::Tol;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }

        let t = iter as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (i, px) in fused.data_mut().iter_mut().enumerate() {
            let g = grad.data()[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            *px -= cfg.step_size * m_hat / (v_hat.sqrt() + adam_eps);
            if cfg.project_each_step {
                *px = px.clamp(0.0, 1.0);
            }
        }
    }

    let iterations_run = losses.len();
    Ok((
        fused.clamp01(),
        FuseTrace {
            losses,
            iterations_run,
            terminated_by,
        },
    ))
}
