//! Slow nested-loop reference implementations.
//!
//! These recompute the window statistics directly from pixel loops, with no
//! shared code with the integral-image path. They exist as verification
//! oracles for the fast implementations and as the baseline for the speedup
//! check; nothing in here is meant for production use.

use crate::image::GrayImage;
use crate::scalar::Scalar;

const DIRS: [(i64, i64); 8] = [
    (1, 0),   // E
    (1, 1),   // SE
    (0, 1),   // S
    (-1, 1),  // SW
    (-1, 0),  // W
    (-1, -1), // NW
    (0, -1),  // N
    (1, -1),  // NE
];

/// Clamped mean of the n-edge patch whose grid position is (cx, cy),
/// computed by direct summation.
///
/// The patch spans `[c - (n-1)/2, c + n/2]` on each axis (integer division),
/// so odd patches are symmetric and even patches extend one pixel further
/// right/down.
pub fn patch_mean<T: Scalar>(img: &GrayImage<T>, cx: i64, cy: i64, n: u32) -> f64 {
    let lo = ((n - 1) / 2) as i64;
    let hi = (n / 2) as i64;
    let w = img.width() as i64;
    let h = img.height() as i64;
    let x0 = (cx - lo).clamp(0, w - 1);
    let x1 = (cx + hi).clamp(0, w - 1);
    let y0 = (cy - lo).clamp(0, h - 1);
    let y1 = (cy + hi).clamp(0, h - 1);
    let mut sum = 0.0;
    let mut count = 0u64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            sum += img.get(x as u32, y as u32).to_f64();
            count += 1;
        }
    }
    sum / count as f64
}

/// Signed mean differences and their mean magnitude for the block at
/// (cx, cy) with patch edge n.
pub fn block_stats<T: Scalar>(img: &GrayImage<T>, cx: i64, cy: i64, n: u32) -> ([f64; 8], f64) {
    let center = patch_mean(img, cx, cy, n);
    let mut d = [0.0f64; 8];
    let mut acc = 0.0;
    let step = n as i64;
    for (i, (dx, dy)) in DIRS.iter().enumerate() {
        d[i] = center - patch_mean(img, cx + step * dx, cy + step * dy, n);
        acc += d[i].abs();
    }
    (d, acc / 8.0)
}

fn second_largest_pair_product(d: &[f64; 8]) -> f64 {
    let mut prods = [d[0] * d[4], d[1] * d[5], d[2] * d[6], d[3] * d[7]];
    prods.sort_by(|a, b| b.partial_cmp(a).expect("finite products"));
    prods[1]
}

/// Single-scale prior response computed entirely by nested loops.
pub fn sse_single_scale<T: Scalar>(img: &GrayImage<T>, n: u32, epsilon: f64) -> Vec<f64> {
    let (w, h) = img.dims();
    let step = 3 * n as i64;
    let mut out = vec![0.0f64; (w as usize) * (h as usize)];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (d, v_center) = block_stats(img, x, y, n);
            let s = second_largest_pair_product(&d);
            let mut v_bg = 0.0;
            for (dx, dy) in DIRS {
                let (_, v) = block_stats(img, x + step * dx, y + step * dy, n);
                v_bg += v;
            }
            let wgt = v_center / v_bg.max(epsilon);
            out[(y as u32 * w + x as u32) as usize] = (s * wgt).max(0.0);
        }
    }
    out
}

/// Pointwise maximum of the single-scale responses.
pub fn sse_multi_scale<T: Scalar>(img: &GrayImage<T>, scales: &[u32], epsilon: f64) -> Vec<f64> {
    let mut best = vec![0.0f64; (img.width() as usize) * (img.height() as usize)];
    let mut first = true;
    for &n in scales {
        let map = sse_single_scale(img, n, epsilon);
        if first {
            best = map;
            first = false;
        } else {
            for (b, v) in best.iter_mut().zip(map) {
                *b = b.max(v);
            }
        }
    }
    best
}
