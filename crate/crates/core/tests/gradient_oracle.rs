//! Analytic loss gradients against central finite differences.

mod common;

use irvis_core::fuser::{initial_plane, FuserConfig, Init};
use irvis_core::loss::{loss_total, loss_total_grad, AngularTargets, LossWeights};
use irvis_core::spatial::sobel;
use irvis_core::Image;

const H: f64 = 1e-5;

/// Pixels whose finite difference straddles a kink: an L1 tie, or a
/// neighborhood where some fused gradient is close to zero length.
fn excluded(fused: &Image, targets: &AngularTargets) -> Vec<bool> {
    let (w, h) = fused.dims();
    let mag = sobel(fused).magnitude();
    let eps = targets.weights.eps;
    let mut out = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if (fused.data()[i] - targets.bundle.i_ref.data()[i]).abs() < 2.0 * H {
                out[i] = true;
                continue;
            }
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let rr = (r as isize + dr).clamp(0, h as isize - 1) as usize;
                    let cc = (c as isize + dc).clamp(0, w as isize - 1) as usize;
                    let q = rr * w + cc;
                    let mr = targets.reference.mag.data()[q];
                    if mag.data()[q] < 4.0 * H || (mr - eps).abs() < 4.0 * H {
                        out[i] = true;
                    }
                }
            }
        }
    }
    out
}

/// Returns `(checked, agreeing)` pixel counts.
fn compare(fused: &Image, ir: &Image, vi: &Image, w: &LossWeights) -> (usize, usize) {
    let targets = AngularTargets::new(ir, vi, *w).unwrap();
    let grad = loss_total_grad(fused, ir, vi, w).unwrap();
    let skip = excluded(fused, &targets);
    let (mut checked, mut ok) = (0, 0);
    for i in 0..fused.len() {
        if skip[i] {
            continue;
        }
        let mut plus = fused.clone();
        plus.data_mut()[i] += H;
        let mut minus = fused.clone();
        minus.data_mut()[i] -= H;
        let fd = (targets.loss(&plus).unwrap().l_total - targets.loss(&minus).unwrap().l_total) / (2.0 * H);
        let an = grad.data()[i];
        let scale = fd.abs().max(an.abs());
        let rel = if scale < 1e-12 { 0.0 } else { (fd - an).abs() / scale };
        checked += 1;
        if rel < 1e-4 {
            ok += 1;
        }
    }
    (checked, ok)
}

#[test]
fn total_gradient_matches_finite_differences() {
    let seed = common::fresh_seed("total_gradient_matches_finite_differences");
    let mut rng = common::rng(seed);
    let (mut checked, mut ok) = (0, 0);
    for _ in 0..20 {
        let ir = common::random_image(&mut rng, 8, 8);
        let vi = common::random_image(&mut rng, 8, 8);
        let fused = common::random_image(&mut rng, 8, 8);
        let (c, k) = compare(&fused, &ir, &vi, &LossWeights::default());
        checked += c;
        ok += k;
    }
    assert!(checked >= 1000, "too many exclusions: {checked}");
    assert!(ok as f64 >= 0.99 * checked as f64, "{ok}/{checked}");
}

#[test]
fn each_term_gradient_matches_finite_differences() {
    let mut rng = common::rng(7);
    let ir = common::random_image(&mut rng, 9, 7);
    let vi = common::random_image(&mut rng, 9, 7);
    let fused = common::random_image(&mut rng, 9, 7);
    for (l1, l2) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (5.0, 1.0)] {
        let w = LossWeights {
            lambda1: l1,
            lambda2: l2,
            ..Default::default()
        };
        let (checked, ok) = compare(&fused, &ir, &vi, &w);
        assert_eq!(ok, checked, "lambda = ({l1}, {l2})");
    }
}

#[test]
fn angle_loss_is_scale_invariant() {
    let mut rng = common::rng(11);
    let ir = common::random_image(&mut rng, 8, 8);
    let vi = common::random_image(&mut rng, 8, 8);
    let fused = common::random_image(&mut rng, 8, 8);
    let angle_only = LossWeights {
        lambda1: 0.0,
        lambda2: 1.0,
        ..Default::default()
    };
    let targets = AngularTargets::new(&ir, &vi, angle_only).unwrap();
    let (base, g1) = targets.loss_and_gradient(&fused).unwrap();
    let base_grad: Vec<f64> = {
        // Gradient of the angle term alone: drop the intensity part.
        let int_only = LossWeights {
            lambda1: 0.0,
            lambda2: 0.0,
            ..Default::default()
        };
        let g0 = loss_total_grad(&fused, &ir, &vi, &int_only).unwrap();
        g1.data().iter().zip(g0.data()).map(|(a, b)| a - b).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for c in [0.5, 2.0] {
        let scaled = fused.map(|v| c * v);
        let l = targets.loss(&scaled).unwrap();
        assert!((l.l_angle - base.l_angle).abs() < 1e-3, "c = {c}");

        let int_only = LossWeights {
            lambda1: 0.0,
            lambda2: 0.0,
            ..Default::default()
        };
        let ga = loss_total_grad(&scaled, &ir, &vi, &angle_only).unwrap();
        let gi = loss_total_grad(&scaled, &ir, &vi, &int_only).unwrap();
        let scaled_grad: Vec<f64> = ga.data().iter().zip(gi.data()).map(|(a, b)| a - b).collect();
        let ratio = norm(&scaled_grad) / norm(&base_grad);
        assert!((ratio - 1.0 / c).abs() < 1e-3 / c, "c = {c}: ratio {ratio}");
    }
}

#[test]
fn plain_gradient_step_predicts_first_order_decrease() {
    let (ir, vi) = irvis_core::synthetic::synthetic_pair(32, 32, 3);
    let cfg = FuserConfig {
        init: Init::Average,
        ..Default::default()
    };
    let w = LossWeights::default();
    let start = initial_plane(&ir, &vi, &cfg).unwrap();
    let g = loss_total_grad(&start, &ir, &vi, &w).unwrap();
    let s = 1e-4;
    let stepped = start.zip_map(&g, |x, d| x - s * d).unwrap();
    let before = loss_total(&start, &ir, &vi, &w).unwrap().l_total;
    let after = loss_total(&stepped, &ir, &vi, &w).unwrap().l_total;
    let predicted = -s * g.dot(&g);
    let actual = after - before;
    assert!(
        (actual - predicted).abs() <= 0.1 * predicted.abs(),
        "actual {actual} vs predicted {predicted}"
    );
}
