#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irvis_core::io::save_image;
use irvis_core::synthetic::synthetic_pair;

pub fn irvis(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irvis"))
        .args(args.iter().map(|a| a.as_ref()))
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes a synthetic gray pair as `<dir>/ir.png` and `<dir>/vi.png`.
pub fn write_pair(dir: &Path, w: usize, h: usize, seed: u64) -> (PathBuf, PathBuf) {
    let (ir, vi) = synthetic_pair(w, h, seed);
    let (ip, vp) = (dir.join("ir.png"), dir.join("vi.png"));
    save_image(&ir, &ip).unwrap();
    save_image(&vi, &vp).unwrap();
    (ip, vp)
}

/// Lays out `<root>/ir/<stem>.png` and `<root>/vi/<stem>.png` for each stem.
pub fn write_pairs_dir(root: &Path, stems: &[&str], size: usize) {
    std::fs::create_dir_all(root.join("ir")).unwrap();
    std::fs::create_dir_all(root.join("vi")).unwrap();
    for (i, stem) in stems.iter().enumerate() {
        let (ir, vi) = synthetic_pair(size, size, 100 + i as u64);
        save_image(&ir, root.join("ir").join(format!("{stem}.png"))).unwrap();
        save_image(&vi, root.join("vi").join(format!("{stem}.png"))).unwrap();
    }
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}
