//! Loading registered pairs and running one fusion method on them.

use std::path::Path;

use irvis_core::color::{recompose, to_luminance, Chroma};
use irvis_core::commask::gen_mask_pair;
use irvis_core::fuser::{fuse_masked, fuse_with, FuseTrace};
use irvis_core::io::load_image;
use irvis_core::objective::Objective;
use irvis_core::{ColorImage, Image};

use crate::error::CliResult;

/// A pair on the luminance plane, keeping the visible chroma when the
/// visible file is color.
#[derive(Debug, Clone)]
pub struct Pair {
    pub ir: Image,
    pub vi: Image,
    pub chroma: Option<Chroma>,
}

fn luminance(img: &ColorImage) -> (Image, Option<Chroma>) {
    if img.is_gray() {
        (img.first_plane(), None)
    } else {
        let (y, c) = to_luminance(img);
        (y, Some(c))
    }
}

impl Pair {
    pub fn load(ir_path: &Path, vi_path: &Path) -> CliResult<Self> {
        let (ir, _) = luminance(&load_image(ir_path)?);
        let (vi, chroma) = luminance(&load_image(vi_path)?);
        ir.ensure_same_dims(&vi)?;
        Ok(Pair { ir, vi, chroma })
    }

    /// The fused plane as it should be written: recolored when the visible
    /// input carried chroma.
    pub fn output(&self, fused: &Image) -> CliResult<Output> {
        Ok(match &self.chroma {
            Some(c) => Output::Color(recompose(fused, c)?),
            None => Output::Gray(fused.clone()),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Output {
    Gray(Image),
    Color(ColorImage),
}

impl Output {
    pub fn save(&self, path: &Path) -> CliResult<()> {
        match self {
            Output::Gray(g) => irvis_core::io::save_image(g, path)?,
            Output::Color(c) => irvis_core::io::save_image(c, path)?,
        }
        Ok(())
    }
}

/// How a bench or fuse run produces its fused plane.
#[derive(Clone)]
pub enum Method {
    Objective(std::sync::Arc<dyn Objective>),
    /// The angular objective on a complementarily masked copy of the pair.
    Masked { k: Option<usize> },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Objective(o) => o.name().to_string(),
            Method::Masked { .. } => "angular_masked".to_string(),
        }
    }

    pub fn run(
        &self,
        pair: &Pair,
        cfg: &irvis_core::fuser::FuserConfig,
        seed: u64,
    ) -> CliResult<(Image, FuseTrace)> {
        Ok(match self {
            Method::Objective(o) => fuse_with(o.as_ref(), &pair.ir, &pair.vi, cfg)?,
            Method::Masked { k } => {
                let (w, h) = pair.ir.dims();
                let k = k.unwrap_or_else(|| irvis_core::commask::default_patch_size(w, h));
                let masks = gen_mask_pair(w, h, k, seed)?;
                fuse_masked(&pair.ir, &pair.vi, &masks, cfg)?
            }
        })
    }
}
