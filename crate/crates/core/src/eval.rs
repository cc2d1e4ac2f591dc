//! Detection evaluation: IoU, greedy score-ordered matching, precision/
//! recall curves and COCO-style average precision.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bbox::{Annotation, BBox, Detection};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Intersection over union of two boxes, in [0, 1].
pub fn iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let zero = T::zero();
    let x0 = a.x.max(b.x);
    let y0 = a.y.max(b.y);
    let x1 = (a.x + a.w).min(b.x + b.w);
    let y1 = (a.y + a.h).min(b.y + b.h);
    let iw = (x1 - x0).max(zero);
    let ih = (y1 - y0).max(zero);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= zero {
        zero
    } else {
        inter / union
    }
}

/// One detection's matching outcome, in descending-score order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchEntry {
    /// Index into the original detection slice.
    pub det_index: usize,
    pub score: f64,
    pub is_tp: bool,
    /// Index of the matched ground truth, when a match was made.
    pub matched_gt: Option<usize>,
}

/// Outcome of greedy matching: entries ordered by descending score plus a
/// matched flag per ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub entries: Vec<MatchEntry>,
    pub gt_matched: Vec<bool>,
}

impl MatchResult {
    pub fn tp_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_tp).count()
    }
}

/// Greedy matching: detections in descending score (ties broken by index),
/// each taking the unmatched same-image ground truth with the highest IoU
/// at or above the threshold. IoU ties take the lowest ground-truth index.
pub fn match_detections<T: Scalar>(
    dets: &[Detection<T>],
    gts: &[Annotation<T>],
    iou_thresh: f64,
) -> MatchResult {
    let mut gts_by_image: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, gt) in gts.iter().enumerate() {
        gts_by_image.entry(gt.image_id.as_str()).or_default().push(i);
    }

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .expect("finite scores")
            .then(a.cmp(&b))
    });

    let mut gt_matched = vec![false; gts.len()];
    let mut entries = Vec::with_capacity(dets.len());
    for det_index in order {
        let det = &dets[det_index];
        let mut best: Option<(usize, f64)> = None;
        if let Some(candidates) = gts_by_image.get(det.image_id.as_str()) {
            for &gi in candidates {
                if gt_matched[gi] {
                    continue;
                }
                let overlap = iou(&det.bbox.to_f64(), &gts[gi].bbox.to_f64());
                if overlap < iou_thresh {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, best_iou)) => overlap > best_iou,
                };
                if better {
                    best = Some((gi, overlap));
                }
            }
        }
        let matched_gt = best.map(|(gi, _)| gi);
        if let Some(gi) = matched_gt {
            gt_matched[gi] = true;
        }
        entries.push(MatchEntry {
            det_index,
            score: det.score.to_f64(),
            is_tp: matched_gt.is_some(),
            matched_gt,
        });
    }
    MatchResult { entries, gt_matched }
}

/// Average precision, with a flag distinguishing a genuine zero from an
/// undefined metric (no ground truth to recall).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ap {
    pub value: f64,
    pub defined: bool,
}

/// A precision/recall point per retained detection prefix.
pub fn precision_recall_points(m: &MatchResult, n_gt: usize) -> Vec<[f64; 2]> {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut points = Vec::with_capacity(m.entries.len());
    for e in &m.entries {
        if e.is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        let recall = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
        let precision = tp as f64 / (tp + fp) as f64;
        points.push([recall, precision]);
    }
    points
}

/// 101-point interpolated average precision: the precision envelope
/// (max precision over recall >= r) sampled at r = 0.00, 0.01, ..., 1.00.
pub fn average_precision(m: &MatchResult, n_gt: usize) -> Ap {
    if n_gt == 0 {
        return Ap { value: 0.0, defined: false };
    }
    let points = precision_recall_points(m, n_gt);
    if points.is_empty() {
        return Ap { value: 0.0, defined: true };
    }
    // envelope: for each point, the max precision at this or any later recall
    let mut envelope = vec![0.0f64; points.len()];
    let mut best = 0.0;
    for (i, p) in points.iter().enumerate().rev() {
        best = best.max(p[1]);
        envelope[i] = best;
    }
    let mut total = 0.0;
    for level in 0..=100usize {
        let r = level as f64 / 100.0;
        // first point with recall >= r (recalls are non-decreasing)
        let idx = points.partition_point(|p| p[0] < r);
        if idx < points.len() {
            total += envelope[idx];
        }
    }
    Ap { value: total / 101.0, defined: true }
}

/// COCO size strata on ground-truth box area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeStratum {
    Small,
    Medium,
    Large,
}

impl SizeStratum {
    pub fn of(area: f64) -> Self {
        if area < 32.0 * 32.0 {
            SizeStratum::Small
        } else if area <= 96.0 * 96.0 {
            SizeStratum::Medium
        } else {
            SizeStratum::Large
        }
    }
}

/// Precision/recall polyline at one IoU threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub iou: f64,
    /// `[recall, precision]` pairs in descending-score order.
    pub points: Vec<[f64; 2]>,
}

/// The metric set: AP at IoU 0.5 and 0.75, the 0.50:0.95 average, and
/// size-stratified AP at IoU 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ap50: f64,
    pub ap75: f64,
    pub ap50_95: f64,
    pub ap_s: f64,
    pub ap_m: f64,
    pub ap_l: f64,
    /// Metric keys whose value is reported as 0 because no ground truth
    /// exists for them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
    pub pr_curves: Vec<PrCurve>,
}

/// The ten COCO IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn coco_iou_thresholds() -> Vec<f64> {
    (0..10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

/// Computes the full report. Size strata are evaluated against the ground
/// truths of that stratum only, with the detection set unfiltered, so
/// cross-stratum matches count as false positives for the stratum.
pub fn coco_metrics<T: Scalar>(
    dets: &[Detection<T>],
    gts: &[Annotation<T>],
    known_images: &HashSet<String>,
) -> Result<EvalReport> {
    for det in dets {
        if !known_images.contains(&det.image_id) {
            return Err(Error::UnknownImageId(det.image_id.clone()));
        }
    }
    for gt in gts {
        if !known_images.contains(&gt.image_id) {
            return Err(Error::UnknownImageId(gt.image_id.clone()));
        }
    }

    let mut undefined = Vec::new();
    let mut flag = |name: &str, ap: Ap| -> f64 {
        if !ap.defined {
            undefined.push(name.to_string());
        }
        ap.value
    };

    let mut pr_curves = Vec::new();
    let mut ap_sum = 0.0;
    let mut ap50 = Ap { value: 0.0, defined: false };
    let mut ap75 = Ap { value: 0.0, defined: false };
    let mut any_undefined_in_sweep = false;
    for t in coco_iou_thresholds() {
        let m = match_detections(dets, gts, t);
        let ap = average_precision(&m, gts.len());
        pr_curves.push(PrCurve { iou: t, points: precision_recall_points(&m, gts.len()) });
        ap_sum += ap.value;
        any_undefined_in_sweep |= !ap.defined;
        if (t - 0.5).abs() < 1e-12 {
            ap50 = ap;
        }
        if (t - 0.75).abs() < 1e-12 {
            ap75 = ap;
        }
    }

    let stratum_ap = |stratum: SizeStratum| -> Ap {
        let sub: Vec<Annotation<T>> = gts
            .iter()
            .filter(|g| SizeStratum::of(g.bbox.area().to_f64()) == stratum)
            .cloned()
            .collect();
        let m = match_detections(dets, &sub, 0.5);
        average_precision(&m, sub.len())
    };

    let ap50_v = flag("ap50", ap50);
    let ap75_v = flag("ap75", ap75);
    let ap50_95 = if any_undefined_in_sweep {
        undefined.push("ap50_95".to_string());
        0.0
    } else {
        ap_sum / 10.0
    };
    let ap_s = flag("ap_s", stratum_ap(SizeStratum::Small));
    let ap_m = flag("ap_m", stratum_ap(SizeStratum::Medium));
    let ap_l = flag("ap_l", stratum_ap(SizeStratum::Large));

    Ok(EvalReport {
        ap50: ap50_v,
        ap75: ap75_v,
        ap50_95,
        ap_s,
        ap_m,
        ap_l,
        undefined,
        pr_curves,
    })
}
