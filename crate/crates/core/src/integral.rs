//! Summed-area table backing every rectangular mean query in the prior
//! extractor.
//!
//! Rectangle queries are total: requested rectangles are clamped to the
//! image bounds and means divide by the clamped pixel count (always >= 1),
//! so no border padding is ever invented.

use crate::error::Result;
use crate::image::GrayImage;
use crate::scalar::Scalar;

/// Cumulative sums with a zero-padded first row and column:
/// `T(x, y) = sum of I(i, j) for i < x, j < y`.
///
/// Sums accumulate in f64 regardless of the source scalar; a 640x640 image
/// of 16-bit values already exceeds 32-bit float integer-exactness.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    width: u32,
    height: u32,
    sums: Vec<f64>,
}

/// Builds the table in a single pass over the image.
pub fn build_integral<T: Scalar>(img: &GrayImage<T>) -> Result<IntegralTable> {
    img.validate()?;
    let (w, h) = img.dims();
    let tw = (w + 1) as usize;
    let mut sums = vec![0.0f64; tw * (h + 1) as usize];
    for y in 0..h as usize {
        let row = &img.data()[y * w as usize..(y + 1) * w as usize];
        let mut run = 0.0f64;
        for (x, &v) in row.iter().enumerate() {
            run += v.to_f64();
            sums[(y + 1) * tw + x + 1] = sums[y * tw + x + 1] + run;
        }
    }
    Ok(IntegralTable { width: w, height: h, sums })
}

impl IntegralTable {
    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raw table entry `T(x, y)`; valid for `x <= width`, `y <= height`.
    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f64 {
        self.sums[(y * (self.width + 1) + x) as usize]
    }

    /// Sum over the inclusive pixel rectangle `[x0, x1] x [y0, y1]` clamped
    /// to the image. Returns the sum together with the clamped pixel count.
    #[inline]
    pub fn rect_sum_clamped(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> (f64, u64) {
        let xm = self.width as i64 - 1;
        let ym = self.height as i64 - 1;
        let x0 = x0.clamp(0, xm);
        let x1 = x1.clamp(0, xm);
        let y0 = y0.clamp(0, ym);
        let y1 = y1.clamp(0, ym);
        debug_assert!(x0 <= x1 && y0 <= y1, "empty rectangle after clamping");
        let tw = (self.width + 1) as usize;
        let (x0, y0, x1, y1) = (x0 as usize, y0 as usize, x1 as usize, y1 as usize);
        let sum = self.sums[(y1 + 1) * tw + x1 + 1] - self.sums[y0 * tw + x1 + 1]
            - self.sums[(y1 + 1) * tw + x0]
            + self.sums[y0 * tw + x0];
        let count = (x1 - x0 + 1) as u64 * (y1 - y0 + 1) as u64;
        (sum, count)
    }

    /// Mean over the clamped inclusive rectangle.
    #[inline]
    pub fn rect_mean(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> f64 {
        let (sum, count) = self.rect_sum_clamped(x0, y0, x1, y1);
        sum / count as f64
    }

    /// Mean over the square `[cx-half, cx+half] x [cy-half, cy+half]`,
    /// clamped to the image bounds.
    #[inline]
    pub fn box_mean(&self, cx: i64, cy: i64, half: u32) -> f64 {
        let h = half as i64;
        self.rect_mean(cx - h, cy - h, cx + h, cy + h)
    }
}
