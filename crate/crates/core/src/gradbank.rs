//! Fixed-weight directional gradient bank: eight compass difference maps,
//! weighted fusion, and linear/square encodings of the fused map.
//!
//! Fusion with neighbor weights `W_i` is algebraically one 3x3 (dilated)
//! kernel whose center weight is `-sum(W_i)`; the weights are configuration
//! here, not learned.

use crate::config::GradConfig;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Scalar;
use crate::sse::DIRS;

/// One output channel of the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradChannel {
    /// Weighted fusion of the eight difference maps.
    Fused,
    /// Linear encoding (identical values to the fused map).
    Linear,
    /// Square encoding (fused map squared pointwise).
    Square,
}

/// Ordered channel stack produced by [`gradient_features`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientFeatures<T: Scalar> {
    width: u32,
    height: u32,
    channels: Vec<(GradChannel, Vec<T>)>,
}

impl<T: Scalar> GradientFeatures<T> {
    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> &[(GradChannel, Vec<T>)] {
        &self.channels
    }

    pub fn channel(&self, kind: GradChannel) -> Option<&[T]> {
        self.channels
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, data)| data.as_slice())
    }
}

/// Eight difference maps `g_i(p) = I(p + dilation * dir_i) - I(p)`,
/// clockwise from east, with clamp-to-edge neighbor reads.
pub fn directional_diffs<T: Scalar>(img: &GrayImage<T>, dilation: u32) -> Result<[GrayImage<T>; 8]> {
    if dilation == 0 {
        return Err(Error::InvalidConfig("dilation must be >= 1".into()));
    }
    let (w, h) = img.dims();
    let step = dilation as i64;
    Ok(std::array::from_fn(|i| {
        let (dx, dy) = DIRS[i];
        GrayImage::from_fn(w, h, |x, y| {
            let neighbor = img.get_clamped(x as i64 + step * dx, y as i64 + step * dy);
            T::from_f64(neighbor.to_f64() - img.get(x, y).to_f64())
        })
    }))
}

/// Weighted sum of the eight difference maps.
pub fn fuse<T: Scalar>(maps: &[GrayImage<T>; 8], weights: &[f64; 8]) -> Result<GrayImage<T>> {
    let dims = maps[0].dims();
    if maps.iter().any(|m| m.dims() != dims) {
        return Err(Error::dims("directional maps", format!("{dims:?}"), "mixed".to_string()));
    }
    let (w, h) = dims;
    Ok(GrayImage::from_fn(w, h, |x, y| {
        let acc: f64 = maps
            .iter()
            .zip(weights)
            .map(|(m, &wt)| wt * m.get(x, y).to_f64())
            .sum();
        T::from_f64(acc)
    }))
}

/// Runs the full bank: difference maps, fusion, then the enabled encodings.
/// The channel order is fused, linear, square.
pub fn gradient_features<T: Scalar>(img: &GrayImage<T>, cfg: &GradConfig) -> Result<GradientFeatures<T>> {
    cfg.validate()?;
    let diffs = directional_diffs(img, cfg.dilation)?;
    let fused = fuse(&diffs, &cfg.weights)?;
    let (w, h) = img.dims();
    let mut channels = vec![(GradChannel::Fused, fused.data().to_vec())];
    if cfg.encodings.linear {
        channels.push((GradChannel::Linear, fused.data().to_vec()));
    }
    if cfg.encodings.square {
        let squared: Vec<T> = fused.data().iter().map(|&v| v * v).collect();
        channels.push((GradChannel::Square, squared));
    }
    Ok(GradientFeatures { width: w, height: h, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GradEncodings;

    // Independent route: one dilated 3x3 kernel with center -sum(W_i),
    // applied with clamp-to-edge reads.
    fn kernel_fused(img: &GrayImage<f64>, weights: &[f64; 8], dilation: u32) -> GrayImage<f64> {
        let center_w: f64 = -weights.iter().sum::<f64>();
        let step = dilation as i64;
        let offsets: [(i64, i64); 8] = [
            (1, 0),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let mut acc = center_w * img.get(x, y);
            for (i, (dx, dy)) in offsets.iter().enumerate() {
                acc += weights[i] * img.get_clamped(x as i64 + step * dx, y as i64 + step * dy);
            }
            acc
        })
    }

    fn rand_image(w: u32, h: u32, seed: u64) -> GrayImage<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0))
    }

    #[test]
    fn constant_image_all_maps_zero() {
        let img = GrayImage::filled(16, 16, 50.0f64);
        let maps = directional_diffs(&img, 1).unwrap();
        for m in &maps {
            assert!(m.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn horizontal_ramp_diffs() {
        let img = GrayImage::<f64>::from_fn(16, 16, |x, _| x as f64);
        let maps = directional_diffs(&img, 1).unwrap();
        // interior: east +1, west -1, north/south 0
        for y in 1..15u32 {
            for x in 1..15u32 {
                assert_eq!(maps[0].get(x, y), 1.0);
                assert_eq!(maps[4].get(x, y), -1.0);
                assert_eq!(maps[2].get(x, y), 0.0);
                assert_eq!(maps[6].get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn diffs_match_direct_indexing() {
        use rand::{Rng, SeedableRng};
        let img = rand_image(16, 16, 5);
        let maps = directional_diffs(&img, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let offsets = [
            (1i64, 0i64),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        for _ in 0..200 {
            let x = rng.gen_range(0..16u32);
            let y = rng.gen_range(0..16u32);
            let i = rng.gen_range(0..8usize);
            let (dx, dy) = offsets[i];
            let expected = img.get_clamped(x as i64 + 2 * dx, y as i64 + 2 * dy) - img.get(x, y);
            assert_eq!(maps[i].get(x, y), expected);
        }
    }

    #[test]
    fn fuse_basis_weight_selects_east() {
        let img = rand_image(12, 12, 9);
        let maps = directional_diffs(&img, 1).unwrap();
        let mut weights = [0.0; 8];
        weights[0] = 1.0;
        let fused = fuse(&maps, &weights).unwrap();
        assert_eq!(fused.data(), maps[0].data());
    }

    #[test]
    fn fuse_uniform_on_ramp_cancels_interior() {
        let img = GrayImage::<f64>::from_fn(16, 16, |x, _| x as f64);
        let maps = directional_diffs(&img, 1).unwrap();
        let fused = fuse(&maps, &[0.125; 8]).unwrap();
        for y in 1..15u32 {
            for x in 1..15u32 {
                assert!(fused.get(x, y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_equivalence() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for seed in 0..5u64 {
            let img = rand_image(20, 20, seed);
            let weights: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let maps = directional_diffs(&img, 1).unwrap();
            let fused = fuse(&maps, &weights).unwrap();
            let kernel = kernel_fused(&img, &weights, 1);
            for y in 1..19u32 {
                for x in 1..19u32 {
                    assert!((fused.get(x, y) - kernel.get(x, y)).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn linearity_in_the_image() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let cfg = GradConfig::default();
        let a_img = rand_image(16, 16, 100);
        let b_img = rand_image(16, 16, 101);
        for _ in 0..5 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let combo = GrayImage::from_fn(16, 16, |x, y| a * a_img.get(x, y) + b * b_img.get(x, y));
            let fa = gradient_features(&a_img, &cfg).unwrap();
            let fb = gradient_features(&b_img, &cfg).unwrap();
            let fc = gradient_features(&combo, &cfg).unwrap();
            let (la, lb, lc) = (
                fa.channel(GradChannel::Linear).unwrap(),
                fb.channel(GradChannel::Linear).unwrap(),
                fc.channel(GradChannel::Linear).unwrap(),
            );
            for i in 0..la.len() {
                let expect = a * la[i] + b * lb[i];
                assert!((lc[i] - expect).abs() <= 1e-6 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn brightness_shift_leaves_channels_unchanged() {
        let cfg = GradConfig::default();
        let img = rand_image(16, 16, 55);
        let shifted = img.map(|v| v + 40.0);
        let a = gradient_features(&img, &cfg).unwrap();
        let b = gradient_features(&shifted, &cfg).unwrap();
        for ((_, ca), (_, cb)) in a.channels().iter().zip(b.channels()) {
            for (x, y) in ca.iter().zip(cb) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn step_edge_linear_antisymmetric_square_symmetric() {
        // vertical 0|255 edge at x = 8, uniform weights, dilation 1:
        // G(x) = (3/8) * (I(x-1) + I(x+1) - 2 I(x)) on interior rows.
        let img = GrayImage::<f64>::from_fn(16, 16, |x, _| if x >= 8 { 255.0 } else { 0.0 });
        let cfg = GradConfig::default();
        let f = gradient_features(&img, &cfg).unwrap();
        let lin = f.channel(GradChannel::Linear).unwrap();
        let sq = f.channel(GradChannel::Square).unwrap();
        let at = |x: u32, y: u32| lin[(y * 16 + x) as usize];
        let expected = 3.0 / 8.0 * 255.0;
        for y in 1..15u32 {
            assert!((at(7, y) - expected).abs() < 1e-9);
            assert!((at(8, y) + expected).abs() < 1e-9);
            for x in [5u32, 6, 9, 10] {
                assert!(at(x, y).abs() < 1e-9);
            }
            let s7 = sq[(y * 16 + 7) as usize];
            let s8 = sq[(y * 16 + 8) as usize];
            assert!((s7 - s8).abs() < 1e-9);
        }
    }

    #[test]
    fn square_channel_is_linear_squared() {
        let cfg = GradConfig::default();
        let img = rand_image(16, 16, 61);
        let f = gradient_features(&img, &cfg).unwrap();
        let lin = f.channel(GradChannel::Linear).unwrap();
        let sq = f.channel(GradChannel::Square).unwrap();
        for (l, s) in lin.iter().zip(sq) {
            assert!((l * l - s).abs() <= 1e-9);
            assert!(*s >= 0.0);
        }
    }

    #[test]
    fn channel_stack_respects_encodings() {
        let img = rand_image(8, 8, 3);
        let both = gradient_features(&img, &GradConfig::default()).unwrap();
        assert_eq!(both.channels().len(), 3);
        let linear_only = GradConfig {
            encodings: GradEncodings { linear: true, square: false },
            ..Default::default()
        };
        let f = gradient_features(&img, &linear_only).unwrap();
        assert_eq!(f.channels().len(), 2);
        assert!(f.channel(GradChannel::Square).is_none());
    }
}
