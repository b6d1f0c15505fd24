//! Directory benchmark: every matched pair through every requested method,
//! with per-pair metric tables and aggregate means.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use irvis_core::io::write_atomic;
use irvis_core::metrics::{metrics_all, MetricsReport};
use irvis_core::objective::{BaselineKind, ANGULAR};
use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::registry;
use crate::config::{RunConfig, TableFormat};
use crate::error::{CliError, CliResult};
use crate::pipeline::{Method, Output, Pair};
use crate::table::MetricTable;

pub struct BenchArgs<'a> {
    pub pairs_dir: &'a Path,
    pub out_dir: &'a Path,
    pub baselines: bool,
    pub masked: bool,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPaths {
    pub stem: String,
    pub ir: PathBuf,
    pub vi: PathBuf,
}

/// Per-pair seed: the master seed XOR the leading eight bytes of the
/// SHA-256 of the file stem.
pub fn pair_seed(seed: u64, stem: &str) -> u64 {
    let digest = Sha256::digest(stem.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    seed ^ u64::from_be_bytes(head)
}

fn files_by_stem(dir: &Path) -> CliResult<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(format!("cannot list {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for p in paths {
        let Some(stem) = p.file_stem().and_then(|s| s.to_str()) else {
            warn!("skipping non-UTF-8 file name {}", p.display());
            continue;
        };
        if out.contains_key(stem) {
            warn!("{}: duplicate stem `{stem}`, keeping the first file", dir.display());
            continue;
        }
        out.insert(stem.to_string(), p);
    }
    Ok(out)
}

/// Pairs files in `ir/` and `vi/` by identical stem, in sorted stem order.
pub fn discover_pairs(pairs_dir: &Path) -> CliResult<Vec<PairPaths>> {
    let ir = files_by_stem(&pairs_dir.join("ir"))?;
    let mut vi = files_by_stem(&pairs_dir.join("vi"))?;
    let mut pairs = Vec::new();
    for (stem, ir_path) in ir {
        match vi.remove(&stem) {
            Some(vi_path) => pairs.push(PairPaths {
                stem,
                ir: ir_path,
                vi: vi_path,
            }),
            None => warn!("no visible image for `{stem}`"),
        }
    }
    for stem in vi.keys() {
        warn!("no infrared image for `{stem}`");
    }
    Ok(pairs)
}

pub fn methods(cfg: &RunConfig, baselines: bool, masked: bool) -> CliResult<Vec<Method>> {
    let reg = registry(cfg);
    let mut out = vec![Method::Objective(reg.get(ANGULAR)?)];
    if baselines {
        for kind in BaselineKind::ALL {
            out.push(Method::Objective(reg.get(kind.as_str())?));
        }
    }
    if masked {
        out.push(Method::Masked { k: cfg.k });
    }
    Ok(out)
}

struct PairResult {
    outputs: Vec<(Output, irvis_core::fuser::FuseTrace, MetricsReport)>,
}

fn run_pair(p: &PairPaths, methods: &[Method], cfg: &RunConfig) -> CliResult<PairResult> {
    let pair = Pair::load(&p.ir, &p.vi)?;
    let seed = pair_seed(cfg.seed, &p.stem);
    let mut outputs = Vec::with_capacity(methods.len());
    for m in methods {
        let (fused, trace) = m.run(&pair, &cfg.fuser, seed)?;
        // Scored against the unmasked sources for every method.
        let report = metrics_all(&fused, &pair.ir, &pair.vi)?;
        outputs.push((pair.output(&fused)?, trace, report));
    }
    Ok(PairResult { outputs })
}

#[derive(Debug, Serialize)]
struct Skipped {
    stem: String,
    reason: String,
}

#[derive(Debug, Serialize)]
struct BenchReport<'a> {
    engine_version: &'a str,
    config: &'a RunConfig,
    methods: Vec<String>,
    pairs: Vec<String>,
    skipped: Vec<Skipped>,
    means: BTreeMap<String, MetricsReport>,
}

/// Runs the bench and returns the rendered summary table.
pub fn bench(args: BenchArgs<'_>, cfg: &RunConfig) -> CliResult<String> {
    let pairs = discover_pairs(args.pairs_dir)?;
    if pairs.is_empty() {
        return Err(CliError::usage(format!(
            "no matched pairs under {}",
            args.pairs_dir.display()
        )));
    }
    let methods = methods(cfg, args.baselines, args.masked)?;
    let names: Vec<String> = methods.iter().map(Method::name).collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    // Collecting from an indexed iterator keeps sorted stem order.
    let results: Vec<CliResult<PairResult>> =
        pool.install(|| pairs.par_iter().map(|p| run_pair(p, &methods, cfg)).collect());

    for name in &names {
        let dir = args.out_dir.join(name);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut tables: Vec<MetricTable> = vec![MetricTable::default(); methods.len()];
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    let mut first_err = None;
    for (p, result) in pairs.iter().zip(results) {
        let result = match result {
            Ok(r) => r,
            Err(e) => {
                warn!("skipping `{}`: {e}", p.stem);
                skipped.push(Skipped {
                    stem: p.stem.clone(),
                    reason: e.to_string(),
                });
                first_err.get_or_insert(e);
                continue;
            }
        };
        for (i, (output, trace, report)) in result.outputs.into_iter().enumerate() {
            let rel = format!("{}/{}.png", names[i], p.stem);
            output.save(&args.out_dir.join(&rel))?;
            if args.trace {
                let path = args.out_dir.join(format!("{}/{}.trace.csv", names[i], p.stem));
                write_atomic(&path, trace.to_csv().as_bytes())?;
            }
            tables[i].push(rel, report);
        }
        done.push(p.stem.clone());
    }
    if done.is_empty() {
        return Err(first_err.expect("every pair failed"));
    }

    let mut summary = MetricTable::default();
    let mut means = BTreeMap::new();
    for (name, table) in names.iter().zip(&mut tables) {
        let reports: Vec<MetricsReport> = table.rows.iter().map(|(_, r)| *r).collect();
        let mean = MetricsReport::mean(&reports).expect("at least one pair");
        table.push("mean", mean);
        summary.push(name.clone(), mean);
        means.insert(name.clone(), mean);
        write_atomic(&args.out_dir.join(format!("{name}.csv")), table.to_csv().as_bytes())?;
    }
    write_atomic(&args.out_dir.join("summary.csv"), summary.to_csv().as_bytes())?;

    let report = BenchReport {
        engine_version: irvis_core::VERSION,
        config: cfg,
        methods: names,
        pairs: done,
        skipped,
        means,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&args.out_dir.join("bench.json"), format!("{json}\n").as_bytes())?;

    let preamble = config_preamble(cfg);
    if cfg.format == TableFormat::Markdown {
        write_atomic(&args.out_dir.join("summary.md"), summary.to_markdown(&preamble).as_bytes())?;
    }
    Ok(summary.render(cfg.format, &preamble))
}

fn config_preamble(cfg: &RunConfig) -> Vec<String> {
    let json = serde_json::to_string(cfg).expect("config serializes");
    vec![format!("engine {} config {json}", irvis_core::VERSION)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_seed_is_stable_and_stem_dependent() {
        assert_eq!(pair_seed(0, "a"), pair_seed(0, "a"));
        assert_ne!(pair_seed(0, "a"), pair_seed(0, "b"));
        assert_eq!(pair_seed(5, "a") ^ pair_seed(0, "a"), 5);
    }

    #[test]
    fn pairs_match_by_stem_in_sorted_order() {
        let dir = tempfile::tempdir().unwrap();
        for sub in ["ir", "vi"] {
            std::fs::create_dir(dir.path().join(sub)).unwrap();
        }
        for name in ["ir/b.png", "ir/a.png", "ir/c.png", "vi/a.pgm", "vi/b.png", "vi/d.png"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        let pairs = discover_pairs(dir.path()).unwrap();
        let stems: Vec<&str> = pairs.iter().map(|p| p.stem.as_str()).collect();
        assert_eq!(stems, ["a", "b"]);
        assert!(pairs[0].vi.ends_with("a.pgm"));
    }
}
