//! Model-driven candidate detector: threshold the prior map, extract
//! connected components as scored boxes, then drop candidates whose
//! location contradicts the scene mask.

use crate::bbox::{BBox, Detection, DetectionSet};
use crate::config::SseConfig;
use crate::error::{Error, Result};
use crate::image::{GrayImage, SceneMask};
use crate::scalar::Scalar;
use crate::sse::{sse_multi_scale, PriorMap};

/// One bit per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMap {
    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// How the prior map is binarized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Set iff value > t.
    Fixed(f64),
    /// t is the p-th percentile (nearest-rank) of the strictly positive
    /// values; an all-zero map yields an empty binary map.
    Percentile(f64),
    /// Maximize between-class variance over a 256-bin histogram spanning
    /// [0, max].
    Otsu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub threshold: ThresholdMode,
    /// Components smaller than this many pixels are dropped.
    pub min_area: u32,
    pub connectivity: Connectivity,
    pub scene_filtering: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::Otsu,
            min_area: 2,
            connectivity: Connectivity::Eight,
            scene_filtering: true,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        match self.threshold {
            ThresholdMode::Fixed(t) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::InvalidConfig(format!("fixed threshold {t} must be >= 0")));
                }
            }
            ThresholdMode::Percentile(p) => {
                if !(p > 0.0 && p < 100.0) {
                    return Err(Error::InvalidConfig(format!("percentile {p} not in (0, 100)")));
                }
            }
            ThresholdMode::Otsu => {}
        }
        if self.min_area == 0 {
            return Err(Error::InvalidConfig("min_area must be >= 1".into()));
        }
        Ok(())
    }
}

/// Binarizes the prior map.
pub fn threshold_map<T: Scalar>(map: &PriorMap<T>, mode: ThresholdMode) -> BinaryMap {
    let t = match mode {
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::Percentile(p) => {
            let mut positives: Vec<f64> =
                map.values().iter().filter(|v| **v > T::zero()).map(|v| v.to_f64()).collect();
            if positives.is_empty() {
                f64::INFINITY
            } else {
                positives.sort_by(|a, b| a.partial_cmp(b).expect("finite prior values"));
                let rank = ((p / 100.0) * positives.len() as f64).ceil() as usize;
                positives[rank.clamp(1, positives.len()) - 1]
            }
        }
        ThresholdMode::Otsu => otsu_threshold(map),
    };
    BinaryMap {
        width: map.width(),
        height: map.height(),
        bits: map.values().iter().map(|v| v.to_f64() > t).collect(),
    }
}

/// Classic 256-bin Otsu over [0, max]. Returns the bin upper edge so that
/// `value > t` selects the high class; an all-zero map gets +inf.
fn otsu_threshold<T: Scalar>(map: &PriorMap<T>) -> f64 {
    let max = map.max_value().to_f64();
    if max <= 0.0 {
        return f64::INFINITY;
    }
    let mut hist = [0u64; 256];
    for v in map.values() {
        let bin = ((v.to_f64() / max) * 256.0).floor().min(255.0) as usize;
        hist[bin] += 1;
    }
    let total: u64 = hist.iter().sum();
    let total_mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum::<f64>()
        / total as f64;

    let mut best_k = 0usize;
    let mut best_var = -1.0f64;
    let mut w0 = 0.0f64;
    let mut sum0 = 0.0f64;
    for k in 0..255usize {
        w0 += hist[k] as f64 / total as f64;
        sum0 += k as f64 * hist[k] as f64 / total as f64;
        let w1 = 1.0 - w0;
        if w0 <= 0.0 || w1 <= 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (total_mean - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_k = k;
        }
    }
    // threshold sits at the upper edge of bin best_k
    (best_k + 1) as f64 / 256.0 * max
}

/// A maximal connected set of set bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Member pixels in row-major order.
    pub pixels: Vec<(u32, u32)>,
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Partitions set bits into maximal connected components, ordered by
/// (min y, min x) of each component.
pub fn connected_components(map: &BinaryMap, connectivity: Connectivity) -> Vec<Component> {
    let (w, h) = (map.width as i64, map.height as i64);
    let neighbors: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };
    let mut visited = vec![false; map.bits.len()];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..map.bits.len() {
        if !map.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(idx) = stack.pop() {
            let x = (idx as i64) % w;
            let y = (idx as i64) / w;
            pixels.push((x as u32, y as u32));
            for (dx, dy) in neighbors {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let nidx = (ny * w + nx) as usize;
                if map.bits[nidx] && !visited[nidx] {
                    visited[nidx] = true;
                    stack.push(nidx);
                }
            }
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let min_x = pixels.iter().map(|p| p.0).min().unwrap();
        let max_x = pixels.iter().map(|p| p.0).max().unwrap();
        let min_y = pixels.iter().map(|p| p.1).min().unwrap();
        let max_y = pixels.iter().map(|p| p.1).max().unwrap();
        comps.push(Component { pixels, min_x, min_y, max_x, max_y });
    }
    comps.sort_by_key(|c| (c.min_y, c.min_x));
    comps
}

/// Turns surviving components into scored detections: tight pixel hull as
/// the box, component maximum of the raw prior as the score.
pub fn components_to_detections<T: Scalar>(
    comps: &[Component],
    map: &PriorMap<T>,
    min_area: u32,
    image_id: &str,
) -> DetectionSet<T> {
    comps
        .iter()
        .filter(|c| c.area() >= min_area as usize)
        .map(|c| {
            let score = c
                .pixels
                .iter()
                .map(|&(x, y)| map.get(x, y))
                .fold(T::zero(), |a, b| a.max(b));
            Detection {
                image_id: image_id.to_string(),
                bbox: BBox::new(
                    T::from_f64(c.min_x as f64),
                    T::from_f64(c.min_y as f64),
                    T::from_f64((c.max_x - c.min_x + 1) as f64),
                    T::from_f64((c.max_y - c.min_y + 1) as f64),
                ),
                score,
            }
        })
        .collect()
}

/// Drops detections whose box center pixel carries a land or cloud label.
/// The center is rounded half-up to the pixel grid.
pub fn scene_filter<T: Scalar>(dets: &[Detection<T>], scene: &SceneMask) -> Result<DetectionSet<T>> {
    let mut kept = Vec::with_capacity(dets.len());
    for det in dets {
        let (cx, cy) = det.bbox.center();
        let px = (cx.to_f64() + 0.5).floor() as i64;
        let py = (cy.to_f64() + 0.5).floor() as i64;
        if px < 0 || py < 0 || px >= scene.width() as i64 || py >= scene.height() as i64 {
            return Err(Error::dims(
                "detection center vs scene mask",
                format!("{:?}", scene.dims()),
                format!("({px},{py})"),
            ));
        }
        if !scene.class_at(px as u32, py as u32).excludes_ships() {
            kept.push(det.clone());
        }
    }
    Ok(kept)
}

/// End-to-end candidate detection on one image.
pub fn detect_pipeline<T: Scalar>(
    img: &GrayImage<T>,
    sse_cfg: &SseConfig,
    det_cfg: &DetectConfig,
    scene: Option<&SceneMask>,
    image_id: &str,
) -> Result<DetectionSet<T>> {
    sse_cfg.validate()?;
    det_cfg.validate()?;
    if let Some(mask) = scene {
        if mask.dims() != img.dims() {
            return Err(Error::dims(
                "scene mask vs image",
                format!("{:?}", img.dims()),
                format!("{:?}", mask.dims()),
            ));
        }
    }
    let map = sse_multi_scale(img, &sse_cfg.scales, sse_cfg.epsilon)?;
    let binary = threshold_map(&map, det_cfg.threshold);
    let comps = connected_components(&binary, det_cfg.connectivity);
    let dets = components_to_detections(&comps, &map, det_cfg.min_area, image_id);
    match (det_cfg.scene_filtering, scene) {
        (true, Some(mask)) => scene_filter(&dets, mask),
        _ => Ok(dets),
    }
}
