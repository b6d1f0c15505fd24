//! Single-pair commands: fuse, ref, mask and metrics.

use std::path::{Path, PathBuf};

use irvis_core::commask::{apply_masks, default_patch_size, gen_mask_pair};
use irvis_core::fris::synthesize_reference_with;
use irvis_core::io::{save_image, write_atomic};
use irvis_core::metrics::{metrics_all, MetricsReport};
use irvis_core::objective::ObjectiveRegistry;
use irvis_core::Image;
use log::info;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{Method, Pair};
use crate::table::MetricTable;

pub struct FuseArgs<'a> {
    pub ir: &'a Path,
    pub vi: &'a Path,
    pub out: &'a Path,
    pub objective: &'a str,
    pub trace: Option<&'a Path>,
    pub metrics: Option<&'a Path>,
}

pub fn registry(cfg: &RunConfig) -> ObjectiveRegistry {
    ObjectiveRegistry::builtin(cfg.fuser.weights, cfg.baseline)
}

pub fn fuse(args: FuseArgs<'_>, cfg: &RunConfig) -> CliResult<()> {
    let pair = Pair::load(args.ir, args.vi)?;
    let method = Method::Objective(registry(cfg).get(args.objective)?);
    let (fused, trace) = method.run(&pair, &cfg.fuser, cfg.seed)?;
    info!(
        "{} iterations, loss {:.6} -> {:.6}",
        trace.iterations_run,
        trace.initial().l_total,
        trace.last().l_total
    );
    pair.output(&fused)?.save(args.out)?;
    if let Some(path) = args.trace {
        write_atomic(path, trace.to_csv().as_bytes())?;
    }
    if let Some(path) = args.metrics {
        let report = metrics_all(&fused, &pair.ir, &pair.vi)?;
        append_metrics_row(path, &args.out.display().to_string(), &report)?;
    }
    Ok(())
}

/// Appends one row to a metrics CSV, writing the header for a new file.
/// The whole file is rewritten atomically.
pub fn append_metrics_row(path: &Path, label: &str, report: &MetricsReport) -> CliResult<()> {
    let mut text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(CliError::io(format!("cannot read {}: {e}", path.display()))),
    };
    let header = MetricsReport::csv_header();
    if text.is_empty() {
        text = format!("{header}\n");
    } else if text.lines().next() != Some(header.as_str()) {
        return Err(CliError::usage(format!("{} is not a metrics table", path.display())));
    }
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&report.csv_row(label));
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

/// Signed edge map stored as `(v + 1) / 2`, so 0.5 is a flat response.
fn encode_signed(img: &Image) -> Image {
    img.map(|v| ((v + 1.0) / 2.0).clamp(0.0, 1.0))
}

pub fn reference(ir: &Path, vi: &Path, out_dir: &Path, cfg: &RunConfig) -> CliResult<()> {
    let pair = Pair::load(ir, vi)?;
    let w = &cfg.fuser.weights;
    let bundle = synthesize_reference_with(&pair.ir, &pair.vi, w.alpha, w.edge_sign)?;
    create_dir(out_dir)?;
    save_image(&encode_signed(&bundle.i_edge), out_dir.join("edge.png"))?;
    save_image(&bundle.i_en, out_dir.join("en.png"))?;
    save_image(&bundle.i_eq, out_dir.join("eq.png"))?;
    save_image(&bundle.i_ref, out_dir.join("ref.png"))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct MaskSidecar {
    seed: u64,
    k: usize,
    width: usize,
    height: usize,
    patch: irvis_core::Rect,
}

pub fn mask(ir: &Path, vi: &Path, out_dir: &Path, cfg: &RunConfig) -> CliResult<()> {
    let pair = Pair::load(ir, vi)?;
    let (w, h) = pair.ir.dims();
    let k = cfg.k.unwrap_or_else(|| default_patch_size(w, h));
    let masks = gen_mask_pair(w, h, k, cfg.seed)?;
    let (ir_m, vi_m) = apply_masks(&pair.ir, &pair.vi, &masks)?;
    create_dir(out_dir)?;
    save_image(&masks.m_ir, out_dir.join("m_ir.pgm"))?;
    save_image(&masks.m_vi, out_dir.join("m_vi.pgm"))?;
    save_image(&ir_m, out_dir.join("ir_masked.png"))?;
    save_image(&vi_m, out_dir.join("vi_masked.png"))?;
    let sidecar = MaskSidecar {
        seed: cfg.seed,
        k,
        width: w,
        height: h,
        patch: masks.patch,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&out_dir.join("mask.json"), format!("{json}\n").as_bytes())?;
    Ok(())
}

pub fn metrics(fused: &Path, ir: &Path, vi: &Path, output: Option<&PathBuf>, cfg: &RunConfig) -> CliResult<String> {
    let pair = Pair::load(ir, vi)?;
    let f = Pair::load(fused, vi)?.ir;
    let report = metrics_all(&f, &pair.ir, &pair.vi)?;
    let mut table = MetricTable::default();
    table.push(fused.display().to_string(), report);
    let text = table.render(cfg.format, &[]);
    if let Some(path) = output {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}
