//! Positive/Negative/Unknown supervision masks from box annotations and
//! scene masks.
//!
//! Negative is the unified land-plus-cloud class; Positive is the union of
//! expanded, image-clipped annotation boxes and wins over Negative on
//! overlap (nearshore ships expand onto land); everything else is Unknown.

use crate::bbox::{Annotation, BBox};
use crate::error::{Error, Result};
use crate::image::{SceneMask, Trimap, TrimapLabel};
use crate::scalar::Scalar;

/// Scales a box about its own center by `k`.
pub fn expand_bbox<T: Scalar>(b: &BBox<T>, k: T) -> BBox<T> {
    let (cx, cy) = b.center();
    let two = T::from_f64(2.0);
    let w = k * b.w;
    let h = k * b.h;
    BBox::new(cx - w / two, cy - h / two, w, h)
}

/// Rasterizes the supervision trimap.
///
/// A pixel is Positive iff its center lies inside the half-open expanded,
/// clipped box `[x, x+w) x [y, y+h)` of any annotation.
pub fn build_trimap<T: Scalar>(
    anns: &[Annotation<T>],
    scene: &SceneMask,
    k: T,
    dims: (u32, u32),
) -> Result<Trimap> {
    let (width, height) = dims;
    if scene.dims() != dims {
        return Err(Error::dims(
            "scene mask vs trimap dims",
            format!("{dims:?}"),
            format!("{:?}", scene.dims()),
        ));
    }
    if !(k > T::zero()) {
        return Err(Error::ParamOutOfRange {
            name: "k",
            value: k.to_f64(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }

    let mut labels = vec![TrimapLabel::Unknown as u8; (width as usize) * (height as usize)];
    for (i, &scene_label) in scene.labels().iter().enumerate() {
        if scene_label == 1 || scene_label == 2 {
            labels[i] = TrimapLabel::Negative as u8;
        }
    }

    for ann in anns {
        let expanded = expand_bbox(&ann.bbox, k).to_f64();
        let Some(clipped) = expanded.clip(width, height) else {
            continue;
        };
        let x_start = clipped.x.ceil() as i64;
        let x_end = (clipped.x + clipped.w).ceil() as i64; // exclusive
        let y_start = clipped.y.ceil() as i64;
        let y_end = (clipped.y + clipped.h).ceil() as i64;
        for y in y_start..y_end {
            for x in x_start..x_end {
                if x >= 0 && y >= 0 && (x as u32) < width && (y as u32) < height {
                    labels[y as usize * width as usize + x as usize] = TrimapLabel::Positive as u8;
                }
            }
        }
    }

    Ok(Trimap::from_labels(width, height, labels))
}
