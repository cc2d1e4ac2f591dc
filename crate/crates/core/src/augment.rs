//! Augmentation operators and the decaying-ratio schedule.
//!
//! Every randomized operation is a pure function of an explicit parameter
//! record; the `*_seeded` entry points derive those records from a seed, so
//! batches can fan out with per-sample derived seeds and stay independent
//! of worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bbox::{Annotation, BBox};
use crate::config::ScheduleConfig;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Scalar;

pub const TRANSLATE_RANGE: (f64, f64) = (-64.0, 64.0);
pub const ROTATE_RANGE: (f64, f64) = (-10.0, 10.0);
pub const SHEAR_RANGE: (f64, f64) = (-2.0, 2.0);
pub const SCALE_RANGE: (f64, f64) = (0.5, 1.5);

/// splitmix64 mix of a base seed and a stream index; used to derive
/// independent per-epoch and per-sample seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Augmented-image ratio at epoch `m`: `1 - beta * (m / M)^2`.
pub fn schedule_ratio(m: u32, cfg: &ScheduleConfig) -> Result<f64> {
    cfg.validate()?;
    if m > cfg.total_epochs {
        return Err(Error::EpochOutOfRange { epoch: m, max: cfg.total_epochs });
    }
    let frac = m as f64 / cfg.total_epochs as f64;
    Ok(1.0 - cfg.beta * frac * frac)
}

/// Per-sample augmentation assignment for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPlan {
    pub epoch: u32,
    pub ratio: f64,
    /// True where the sample is served augmented. Exactly
    /// `round(ratio * len)` entries are set.
    pub flags: Vec<bool>,
}

impl EpochPlan {
    pub fn augmented_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Chooses exactly `round(R * n)` samples by a seeded shuffle.
pub fn plan_epoch(m: u32, n_samples: usize, cfg: &ScheduleConfig, seed: u64) -> Result<EpochPlan> {
    if n_samples == 0 {
        return Err(Error::EmptySet("plan_epoch"));
    }
    let ratio = schedule_ratio(m, cfg)?;
    let count = (ratio * n_samples as f64).round() as usize;
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, m as u64));
    // Fisher-Yates
    for i in (1..n_samples).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut flags = vec![false; n_samples];
    for &idx in order.iter().take(count) {
        flags[idx] = true;
    }
    Ok(EpochPlan { epoch: m, ratio, flags })
}

/// Affine warp parameters; composition order is scale, rotate, shear,
/// translate, all about the image center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineParams {
    pub tx: f64,
    pub ty: f64,
    pub rot_deg: f64,
    pub shear_x_deg: f64,
    pub shear_y_deg: f64,
    pub scale: f64,
}

impl AffineParams {
    pub fn identity() -> Self {
        Self { tx: 0.0, ty: 0.0, rot_deg: 0.0, shear_x_deg: 0.0, shear_y_deg: 0.0, scale: 1.0 }
    }

    /// Draws each field uniformly from its declared range.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self {
            tx: rng.gen_range(TRANSLATE_RANGE.0..=TRANSLATE_RANGE.1),
            ty: rng.gen_range(TRANSLATE_RANGE.0..=TRANSLATE_RANGE.1),
            rot_deg: rng.gen_range(ROTATE_RANGE.0..=ROTATE_RANGE.1),
            shear_x_deg: rng.gen_range(SHEAR_RANGE.0..=SHEAR_RANGE.1),
            shear_y_deg: rng.gen_range(SHEAR_RANGE.0..=SHEAR_RANGE.1),
            scale: rng.gen_range(SCALE_RANGE.0..=SCALE_RANGE.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("tx", self.tx, TRANSLATE_RANGE),
            ("ty", self.ty, TRANSLATE_RANGE),
            ("rot", self.rot_deg, ROTATE_RANGE),
            ("shear_x", self.shear_x_deg, SHEAR_RANGE),
            ("shear_y", self.shear_y_deg, SHEAR_RANGE),
            ("scale", self.scale, SCALE_RANGE),
        ];
        for (name, value, (lo, hi)) in checks {
            if !(value >= lo && value <= hi) {
                return Err(Error::ParamOutOfRange { name, value, lo, hi });
            }
        }
        Ok(())
    }

    /// Linear part `shear * rotation * scale` as a row-major 2x2 matrix.
    fn linear(&self) -> [f64; 4] {
        let r = self.rot_deg.to_radians();
        let (sin, cos) = r.sin_cos();
        let kx = self.shear_x_deg.to_radians().tan();
        let ky = self.shear_y_deg.to_radians().tan();
        let s = self.scale;
        // shear [[1, kx], [ky, 1]] times rotation [[cos, -sin], [sin, cos]],
        // then uniform scale
        [
            s * (cos + kx * sin),
            s * (kx * cos - sin),
            s * (ky * cos + sin),
            s * (cos - ky * sin),
        ]
    }
}

fn invert_2x2(m: [f64; 4]) -> [f64; 4] {
    let det = m[0] * m[3] - m[1] * m[2];
    [m[3] / det, -m[1] / det, -m[2] / det, m[0] / det]
}

fn bilinear_sample<T: Scalar>(img: &GrayImage<T>, x: f64, y: f64) -> f64 {
    // zero fill outside: out-of-range taps contribute nothing
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let mut acc = 0.0;
    for (dy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0i64, 1.0 - fx), (1, fx)] {
            let w = wx * wy;
            if w == 0.0 {
                continue;
            }
            let px = x0 as i64 + dx;
            let py = y0 as i64 + dy;
            if px >= 0 && py >= 0 && px < img.width() as i64 && py < img.height() as i64 {
                acc += w * img.get(px as u32, py as u32).to_f64();
            }
        }
    }
    acc
}

fn transform_bbox(b: &BBox<f64>, m: [f64; 4], cx: f64, cy: f64, tx: f64, ty: f64) -> BBox<f64> {
    let corners = [
        (b.x, b.y),
        (b.x + b.w, b.y),
        (b.x, b.y + b.h),
        (b.x + b.w, b.y + b.h),
    ];
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (x, y) in corners {
        let (rx, ry) = (x - cx, y - cy);
        let nx = m[0] * rx + m[1] * ry + cx + tx;
        let ny = m[2] * rx + m[3] * ry + cy + ty;
        min_x = min_x.min(nx);
        min_y = min_y.min(ny);
        max_x = max_x.max(nx);
        max_y = max_y.max(ny);
    }
    BBox::new(min_x, min_y, max_x - min_x, max_y - min_y)
}

/// Warps the image and maps each box through the corner hull; boxes whose
/// clipped extent drops below one pixel are discarded.
pub fn apply_affine<T: Scalar>(
    img: &GrayImage<T>,
    anns: &[Annotation<T>],
    p: &AffineParams,
) -> Result<(GrayImage<T>, Vec<Annotation<T>>)> {
    p.validate()?;
    let (w, h) = img.dims();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let fwd = p.linear();
    let inv = invert_2x2(fwd);

    let out = GrayImage::from_fn(w, h, |x, y| {
        let rx = x as f64 - cx - p.tx;
        let ry = y as f64 - cy - p.ty;
        let sx = inv[0] * rx + inv[1] * ry + cx;
        let sy = inv[2] * rx + inv[3] * ry + cy;
        T::from_f64(bilinear_sample(img, sx, sy))
    });

    let mut out_anns = Vec::new();
    for ann in anns {
        let moved = transform_bbox(&ann.bbox.to_f64(), fwd, cx, cy, p.tx, p.ty);
        if let Some(clipped) = moved.clip(w, h) {
            if clipped.w >= 1.0 && clipped.h >= 1.0 {
                out_anns.push(Annotation {
                    image_id: ann.image_id.clone(),
                    bbox: BBox::new(
                        T::from_f64(clipped.x),
                        T::from_f64(clipped.y),
                        T::from_f64(clipped.w),
                        T::from_f64(clipped.h),
                    ),
                    category: ann.category.clone(),
                });
            }
        }
    }
    Ok((out, out_anns))
}

/// Mosaic layout: split point on the canvas plus one stretch factor per
/// input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosaicParams {
    /// Split column and row, in canvas pixels.
    pub center: (u32, u32),
    pub scales: [f64; 4],
}

impl MosaicParams {
    /// Center uniform over the middle half of each axis, stretches uniform
    /// in [0.5, 1.5].
    pub fn sample<R: Rng>(rng: &mut R, canvas: (u32, u32)) -> Self {
        let (w, h) = canvas;
        let cx = rng.gen_range(w / 4..=3 * w / 4).max(1).min(w - 1);
        let cy = rng.gen_range(h / 4..=3 * h / 4).max(1).min(h - 1);
        let scales = std::array::from_fn(|_| rng.gen_range(SCALE_RANGE.0..=SCALE_RANGE.1));
        Self { center: (cx, cy), scales }
    }

    pub fn validate(&self, canvas: (u32, u32)) -> Result<()> {
        let (w, h) = canvas;
        if self.center.0 == 0 || self.center.0 >= w || self.center.1 == 0 || self.center.1 >= h {
            return Err(Error::InvalidConfig(format!(
                "mosaic center {:?} not inside canvas {w}x{h}",
                self.center
            )));
        }
        for (i, s) in self.scales.iter().enumerate() {
            if !(*s >= SCALE_RANGE.0 && *s <= SCALE_RANGE.1) {
                return Err(Error::ParamOutOfRange {
                    name: match i {
                        0 => "scale[0]",
                        1 => "scale[1]",
                        2 => "scale[2]",
                        _ => "scale[3]",
                    },
                    value: *s,
                    lo: SCALE_RANGE.0,
                    hi: SCALE_RANGE.1,
                });
            }
        }
        Ok(())
    }
}

/// Composites four inputs into the quadrants of a canvas sized like the
/// first input. Each input is stretched by its factor and anchored so the
/// corner adjacent to the split point stays adjacent to it; annotations are
/// scaled, translated and clipped to their quadrant.
pub fn mosaic<T: Scalar>(
    inputs: &[(GrayImage<T>, Vec<Annotation<T>>); 4],
    params: &MosaicParams,
) -> Result<(GrayImage<T>, Vec<Annotation<T>>)> {
    let (w, h) = inputs[0].0.dims();
    params.validate((w, h))?;
    let (cx, cy) = (params.center.0 as i64, params.center.1 as i64);

    // quadrant rects [x0, x1) x [y0, y1) and their anchor corners
    let quads: [(i64, i64, i64, i64); 4] = [
        (0, 0, cx, cy),                         // top-left
        (cx, 0, w as i64, cy),                  // top-right
        (0, cy, cx, h as i64),                  // bottom-left
        (cx, cy, w as i64, h as i64),           // bottom-right
    ];

    let mut canvas = vec![T::zero(); (w as usize) * (h as usize)];
    let mut out_anns = Vec::new();

    for (q, (img, anns)) in quads.iter().zip(inputs.iter()) {
        let (qx0, qy0, qx1, qy1) = *q;
        let s = params.scales[{
            let idx = quads.iter().position(|qq| qq == q).unwrap();
            idx
        }];
        let sw = (img.width() as f64 * s).round().max(1.0) as i64;
        let sh = (img.height() as f64 * s).round().max(1.0) as i64;
        // anchor: the scaled image corner adjacent to the split point
        let ox = if qx0 == 0 { cx - sw } else { cx };
        let oy = if qy0 == 0 { cy - sh } else { cy };

        for y in qy0..qy1 {
            for x in qx0..qx1 {
                let lx = x - ox;
                let ly = y - oy;
                if lx < 0 || ly < 0 || lx >= sw || ly >= sh {
                    continue; // zero fill
                }
                let src_x = (lx as f64 + 0.5) / s - 0.5;
                let src_y = (ly as f64 + 0.5) / s - 0.5;
                canvas[(y as usize) * (w as usize) + x as usize] =
                    T::from_f64(bilinear_sample(img, src_x, src_y));
            }
        }

        for ann in anns {
            let b = ann.bbox.to_f64();
            let moved = BBox::new(
                b.x * s + ox as f64,
                b.y * s + oy as f64,
                b.w * s,
                b.h * s,
            );
            // clip to the quadrant
            let x0 = moved.x.max(qx0 as f64);
            let y0 = moved.y.max(qy0 as f64);
            let x1 = (moved.x + moved.w).min(qx1 as f64);
            let y1 = (moved.y + moved.h).min(qy1 as f64);
            if x1 - x0 >= 1.0 && y1 - y0 >= 1.0 {
                out_anns.push(Annotation {
                    image_id: ann.image_id.clone(),
                    bbox: BBox::new(
                        T::from_f64(x0),
                        T::from_f64(y0),
                        T::from_f64(x1 - x0),
                        T::from_f64(y1 - y0),
                    ),
                    category: ann.category.clone(),
                });
            }
        }
    }

    let composite = GrayImage::new(w, h, canvas)?;
    Ok((composite, out_anns))
}

/// Mosaic with parameters drawn from a seeded generator.
pub fn mosaic_seeded<T: Scalar>(
    inputs: &[(GrayImage<T>, Vec<Annotation<T>>); 4],
    seed: u64,
) -> Result<(GrayImage<T>, Vec<Annotation<T>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = MosaicParams::sample(&mut rng, inputs[0].0.dims());
    mosaic(inputs, &params)
}

/// Pixelwise blend `lambda * a + (1 - lambda) * b` with the annotation
/// union.
pub fn mixup<T: Scalar>(
    a: &GrayImage<T>,
    b: &GrayImage<T>,
    lambda: f64,
    anns_a: &[Annotation<T>],
    anns_b: &[Annotation<T>],
) -> Result<(GrayImage<T>, Vec<Annotation<T>>)> {
    if a.dims() != b.dims() {
        return Err(Error::dims(
            "mixup inputs",
            format!("{:?}", a.dims()),
            format!("{:?}", b.dims()),
        ));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParamOutOfRange { name: "lambda", value: lambda, lo: 0.0, hi: 1.0 });
    }
    let (w, h) = a.dims();
    let data: Vec<T> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| T::from_f64(lambda * x.to_f64() + (1.0 - lambda) * y.to_f64()))
        .collect();
    let mut anns = anns_a.to_vec();
    anns.extend_from_slice(anns_b);
    Ok((GrayImage::new(w, h, data)?, anns))
}
