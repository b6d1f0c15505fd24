//! Fusion-quality metrics: entropy, standard deviation, spatial frequency,
//! average gradient, sum of correlations of differences, pixel-domain visual
//! information fidelity, gradient-based edge preservation (Qabf) and
//! structural similarity.
//!
//! Every metric works on the 8-bit scale (samples multiplied by 255) so the
//! reported values are comparable with the usual fusion benchmark tables.
//! Degenerate inputs (zero variance, no edges) resolve to documented
//! constants instead of NaN.

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::image::Image;
use crate::spatial::{histogram, sobel};

const SCALE: f64 = 255.0;

/// Column order of the CSV and table outputs.
pub const METRIC_NAMES: [&str; 8] = ["en", "sd", "sf", "ag", "scd", "vif", "qabf", "ssim"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub en: f64,
    pub sd: f64,
    pub sf: f64,
    pub ag: f64,
    pub scd: f64,
    pub vif: f64,
    pub qabf: f64,
    pub ssim: f64,
}

impl MetricsReport {
    pub fn values(&self) -> [f64; 8] {
        [self.en, self.sd, self.sf, self.ag, self.scd, self.vif, self.qabf, self.ssim]
    }

    pub fn from_values(v: [f64; 8]) -> Self {
        Self {
            en: v[0],
            sd: v[1],
            sf: v[2],
            ag: v[3],
            scd: v[4],
            vif: v[5],
            qabf: v[6],
            ssim: v[7],
        }
    }

    pub fn csv_header() -> String {
        format!("path,{}", METRIC_NAMES.join(","))
    }

    /// One CSV row; values use the shortest exact decimal form.
    pub fn csv_row(&self, path: &str) -> String {
        let mut row = path.to_string();
        for v in self.values() {
            row.push(',');
            row.push_str(&v.to_string());
        }
        row
    }

    /// Arithmetic mean of each field; `None` for an empty slice.
    pub fn mean(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let mut acc = [0.0; 8];
        for r in reports {
            for (a, v) in acc.iter_mut().zip(r.values()) {
                *a += v;
            }
        }
        Some(Self::from_values(acc.map(|a| a / reports.len() as f64)))
    }
}

/// Shannon entropy (bits) of the 256-level histogram.
pub fn metric_en(img: &Image) -> f64 {
    let n = img.len() as f64;
    histogram(img)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Population standard deviation on the 8-bit scale.
pub fn metric_sd(img: &Image) -> f64 {
    let n = img.len() as f64;
    let mean = img.data().iter().map(|v| v * SCALE).sum::<f64>() / n;
    let var = img
        .data()
        .iter()
        .map(|v| {
            let d = v * SCALE - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    var.sqrt()
}

/// Spatial frequency `sqrt(RF^2 + CF^2)` from first differences along rows
/// (RF) and columns (CF).
pub fn metric_sf(img: &Image) -> f64 {
    let (w, h) = img.dims();
    let mut rf = 0.0;
    let mut cf = 0.0;
    if w > 1 {
        let mut acc = 0.0;
        for r in 0..h {
            for c in 1..w {
                let d = (img.get(r, c) - img.get(r, c - 1)) * SCALE;
                acc += d * d;
            }
        }
        rf = acc / (h * (w - 1)) as f64;
    }
    if h > 1 {
        let mut acc = 0.0;
        for r in 1..h {
            for c in 0..w {
                let d = (img.get(r, c) - img.get(r - 1, c)) * SCALE;
                acc += d * d;
            }
        }
        cf = acc / ((h - 1) * w) as f64;
    }
    (rf + cf).sqrt()
}

/// Mean of `sqrt((dx^2 + dy^2) / 2)` over forward differences on the
/// `(H-1) x (W-1)` grid; zero for single-row or single-column images.
pub fn metric_ag(img: &Image) -> f64 {
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let x = img.get(r, c);
            let dx = (img.get(r, c + 1) - x) * SCALE;
            let dy = (img.get(r + 1, c) - x) * SCALE;
            acc += ((dx * dx + dy * dy) / 2.0).sqrt();
        }
    }
    acc / ((h - 1) * (w - 1)) as f64
}

/// Pearson correlation; 0 when either operand has zero variance.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// `corr(F - B, A) + corr(F - A, B)` with A = infrared, B = visible.
pub fn metric_scd(fused: &Image, ir: &Image, vi: &Image) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vi)?;
    let f_minus_vi: Vec<f64> = fused.data().iter().zip(vi.data()).map(|(f, v)| (f - v) * SCALE).collect();
    let f_minus_ir: Vec<f64> = fused.data().iter().zip(ir.data()).map(|(f, v)| (f - v) * SCALE).collect();
    let ir255: Vec<f64> = ir.data().iter().map(|v| v * SCALE).collect();
    let vi255: Vec<f64> = vi.data().iter().map(|v| v * SCALE).collect();
    Ok(correlation(&f_minus_vi, &ir255) + correlation(&f_minus_ir, &vi255))
}

// ---------------------------------------------------------------------------
// Windowed filtering shared by VIF and SSIM.

/// Normalized separable Gaussian taps.
fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size as f64 - 1.0) / 2.0;
    let mut taps: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - half;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Row-major plane without the `[0, 1]` semantics of [`Image`].
#[derive(Debug, Clone)]
struct Plane {
    w: usize,
    h: usize,
    d: Vec<f64>,
}

impl Plane {
    fn scaled(img: &Image) -> Self {
        Plane {
            w: img.width(),
            h: img.height(),
            d: img.data().iter().map(|v| v * SCALE).collect(),
        }
    }

    fn zip(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            d: self.d.iter().zip(&other.d).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Separable correlation keeping only fully covered positions.
    fn filter_valid(&self, taps: &[f64]) -> Plane {
        let k = taps.len();
        let ow = self.w + 1 - k;
        let oh = self.h + 1 - k;
        let mut tmp = vec![0.0; self.h * ow];
        for r in 0..self.h {
            let row = &self.d[r * self.w..(r + 1) * self.w];
            for c in 0..ow {
                tmp[r * ow + c] = taps.iter().zip(&row[c..c + k]).map(|(t, v)| t * v).sum();
            }
        }
        let mut out = vec![0.0; oh * ow];
        for r in 0..oh {
            for c in 0..ow {
                let mut acc = 0.0;
                for (i, t) in taps.iter().enumerate() {
                    acc += t * tmp[(r + i) * ow + c];
                }
                out[r * ow + c] = acc;
            }
        }
        Plane { w: ow, h: oh, d: out }
    }

    fn downsample2(&self) -> Plane {
        let ow = self.w.div_ceil(2);
        let oh = self.h.div_ceil(2);
        let mut d = Vec::with_capacity(ow * oh);
        for r in (0..self.h).step_by(2) {
            for c in (0..self.w).step_by(2) {
                d.push(self.d[r * self.w + c]);
            }
        }
        Plane { w: ow, h: oh, d }
    }
}

// ---------------------------------------------------------------------------
// VIF

const VIF_SCALES: usize = 4;
const VIF_NOISE_VAR: f64 = 2.0;
const VIF_VAR_FLOOR: f64 = 1e-10;

/// Window side at each VIF scale: 17, 9, 5, 3.
fn vif_window(scale: usize) -> usize {
    (1 << (VIF_SCALES - scale)) + 1
}

/// Smallest square side that survives all four VIF scales.
pub fn vif_min_size() -> usize {
    (1..)
        .find(|&n| vif_sizes_ok(n, n))
        .expect("some size satisfies the window chain")
}

fn vif_sizes_ok(mut w: usize, mut h: usize) -> bool {
    for scale in 0..VIF_SCALES {
        let k = vif_window(scale);
        if scale > 0 {
            if w < k || h < k {
                return false;
            }
            w = (w + 1 - k).div_ceil(2);
            h = (h + 1 - k).div_ceil(2);
        }
        if w < k || h < k {
            return false;
        }
    }
    true
}

/// Information terms `(num, den)` of pixel-domain VIF between a reference
/// and a distorted plane, summed over four scales.
fn vif_terms(reference: &Image, distorted: &Image) -> (f64, f64) {
    let mut rf = Plane::scaled(reference);
    let mut ds = Plane::scaled(distorted);
    let mut num = 0.0;
    let mut den = 0.0;
    for scale in 0..VIF_SCALES {
        let n = vif_window(scale);
        let taps = gaussian_taps(n, n as f64 / 5.0);
        if scale > 0 {
            rf = rf.filter_valid(&taps).downsample2();
            ds = ds.filter_valid(&taps).downsample2();
        }
        let mu1 = rf.filter_valid(&taps);
        let mu2 = ds.filter_valid(&taps);
        let e11 = rf.zip(&rf, |a, b| a * b).filter_valid(&taps);
        let e22 = ds.zip(&ds, |a, b| a * b).filter_valid(&taps);
        let e12 = rf.zip(&ds, |a, b| a * b).filter_valid(&taps);
        for i in 0..mu1.d.len() {
            let (m1, m2) = (mu1.d[i], mu2.d[i]);
            let mut s1 = (e11.d[i] - m1 * m1).max(0.0);
            let s2 = (e22.d[i] - m2 * m2).max(0.0);
            let s12 = e12.d[i] - m1 * m2;

            let mut g = s12 / (s1 + VIF_VAR_FLOOR);
            let mut sv = s2 - g * s12;
            if s1 < VIF_VAR_FLOOR {
                g = 0.0;
                sv = s2;
                s1 = 0.0;
            }
            if s2 < VIF_VAR_FLOOR {
                g = 0.0;
                sv = 0.0;
            }
            if g < 0.0 {
                sv = s2;
                g = 0.0;
            }
            if sv <= VIF_VAR_FLOOR {
                sv = VIF_VAR_FLOOR;
            }
            num += (1.0 + g * g * s1 / (sv + VIF_NOISE_VAR)).log10();
            den += (1.0 + s1 / VIF_NOISE_VAR).log10();
        }
    }
    (num, den)
}

fn vif_single(fused: &Image, source: &Image) -> f64 {
    let (num, den) = vif_terms(source, fused);
    if den > 0.0 {
        num / den
    } else if fused == source {
        // A flat source carries no information; a copy of it is still a
        // perfect reproduction.
        1.0
    } else {
        0.0
    }
}

/// Mean of the pixel-domain VIF of the fused image against each source.
pub fn metric_vif(fused: &Image, ir: &Image, vi: &Image) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vi)?;
    let (w, h) = fused.dims();
    if !vif_sizes_ok(w, h) {
        return Err(FusionError::TooSmall {
            width: w,
            height: h,
            min: vif_min_size(),
            what: "VIF",
        });
    }
    Ok(0.5 * (vif_single(fused, ir) + vif_single(fused, vi)))
}

// ---------------------------------------------------------------------------
// Qabf

pub const QABF_GAMMA_G: f64 = 0.9994;
pub const QABF_KAPPA_G: f64 = -15.0;
pub const QABF_SIGMA_G: f64 = 0.5;
pub const QABF_GAMMA_A: f64 = 0.9879;
pub const QABF_KAPPA_A: f64 = -22.0;
pub const QABF_SIGMA_A: f64 = 0.8;

/// Edge-preservation value `Q(G, A)` for relative strength `G` and
/// orientation agreement `A`.
pub fn qabf_preservation(strength: f64, orientation: f64) -> f64 {
    QABF_GAMMA_G / (1.0 + (QABF_KAPPA_G * (strength - QABF_SIGMA_G)).exp())
        * QABF_GAMMA_A
        / (1.0 + (QABF_KAPPA_A * (orientation - QABF_SIGMA_A)).exp())
}

/// The value reached when every edge is reproduced exactly.
pub fn qabf_ceiling() -> f64 {
    qabf_preservation(1.0, 1.0)
}

fn edge_strength_orientation(img: &Image) -> (Vec<f64>, Vec<f64>) {
    let g = sobel(&img.map(|v| v * SCALE));
    let mut strength = Vec::with_capacity(img.len());
    let mut orientation = Vec::with_capacity(img.len());
    for (&gx, &gy) in g.gx.data().iter().zip(g.gy.data()) {
        strength.push(gx.hypot(gy));
        orientation.push(if gx == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (gy / gx).atan()
        });
    }
    (strength, orientation)
}

/// Gradient-based fusion quality (Xydeas-Petrovic) with edge-strength
/// weights. Zero when no source has any edge.
pub fn metric_qabf(fused: &Image, ir: &Image, vi: &Image) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vi)?;
    let (g_f, a_f) = edge_strength_orientation(fused);
    let mut num = 0.0;
    let mut den = 0.0;
    for source in [ir, vi] {
        let (g_s, a_s) = edge_strength_orientation(source);
        for i in 0..fused.len() {
            let (gs, gf) = (g_s[i], g_f[i]);
            let rel = if gs == 0.0 || gf == 0.0 {
                0.0
            } else {
                gs.min(gf) / gs.max(gf)
            };
            let align = 1.0 - (a_s[i] - a_f[i]).abs() / std::f64::consts::FRAC_PI_2;
            num += qabf_preservation(rel, align) * gs;
            den += gs;
        }
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

// ---------------------------------------------------------------------------
// SSIM

pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = (0.01 * SCALE) * (0.01 * SCALE);
const SSIM_C2: f64 = (0.03 * SCALE) * (0.03 * SCALE);

/// Mean SSIM over all fully covered 11x11 Gaussian windows.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(FusionError::TooSmall {
            width: w,
            height: h,
            min: SSIM_WINDOW,
            what: "SSIM",
        });
    }
    let taps = gaussian_taps(SSIM_WINDOW, SSIM_SIGMA);
    let x = Plane::scaled(a);
    let y = Plane::scaled(b);
    let mu1 = x.filter_valid(&taps);
    let mu2 = y.filter_valid(&taps);
    let e11 = x.zip(&x, |p, q| p * q).filter_valid(&taps);
    let e22 = y.zip(&y, |p, q| p * q).filter_valid(&taps);
    let e12 = x.zip(&y, |p, q| p * q).filter_valid(&taps);
    let mut acc = 0.0;
    for i in 0..mu1.d.len() {
        let (m1, m2) = (mu1.d[i], mu2.d[i]);
        let s1 = e11.d[i] - m1 * m1;
        let s2 = e22.d[i] - m2 * m2;
        let s12 = e12.d[i] - m1 * m2;
        acc += ((2.0 * m1 * m2 + SSIM_C1) * (2.0 * s12 + SSIM_C2))
            / ((m1 * m1 + m2 * m2 + SSIM_C1) * (s1 + s2 + SSIM_C2));
    }
    Ok(acc / mu1.d.len() as f64)
}

/// Mean of SSIM(fused, ir) and SSIM(fused, vi).
pub fn metric_ssim(fused: &Image, ir: &Image, vi: &Image) -> Result<f64> {
    fused.ensure_same_dims(vi)?;
    Ok(0.5 * (ssim(fused, ir)? + ssim(fused, vi)?))
}

pub fn metrics_all(fused: &Image, ir: &Image, vi: &Image) -> Result<MetricsReport> {
    Ok(MetricsReport {
        en: metric_en(fused),
        sd: metric_sd(fused),
        sf: metric_sf(fused),
        ag: metric_ag(fused),
        scd: metric_scd(fused, ir, vi)?,
        vif: metric_vif(fused, ir, vi)?,
        qabf: metric_qabf(fused, ir, vi)?,
        ssim: metric_ssim(fused, ir, vi)?,
    })
}
