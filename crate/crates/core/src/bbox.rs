//! Axis-aligned boxes, ground-truth annotations and scored detections.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis-aligned box: top-left corner plus extent, in pixels.
///
/// Stored as floats; rasterization (see [`crate::trimap`]) includes a pixel
/// iff its center lies inside the half-open box `[x, x+w) x [y, y+h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T: Scalar> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Self {
        Self { x, y, w, h }
    }

    /// Area `w * h`.
    #[inline]
    pub fn area(&self) -> T {
        self.w * self.h
    }

    #[inline]
    pub fn center(&self) -> (T, T) {
        let two = T::from_f64(2.0);
        (self.x + self.w / two, self.y + self.h / two)
    }

    /// Intersects with `[0, width] x [0, height]`; returns `None` when the
    /// clipped box degenerates to zero extent.
    pub fn clip(&self, width: u32, height: u32) -> Option<Self> {
        let zero = T::zero();
        let x0 = self.x.max(zero);
        let y0 = self.y.max(zero);
        let x1 = (self.x + self.w).min(T::from_f64(width as f64));
        let y1 = (self.y + self.h).min(T::from_f64(height as f64));
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(Self::new(x0, y0, x1 - x0, y1 - y0))
    }

    pub fn to_f64(&self) -> BBox<f64> {
        BBox {
            x: self.x.to_f64(),
            y: self.y.to_f64(),
            w: self.w.to_f64(),
            h: self.h.to_f64(),
        }
    }
}

/// Area of a box; invariant under translation of the corner.
pub fn bbox_area<T: Scalar>(b: &BBox<T>) -> T {
    b.area()
}

/// Ground-truth record tying a box to an image and a category label.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation<T: Scalar> {
    pub image_id: String,
    pub bbox: BBox<T>,
    pub category: String,
}

/// Scored predicted box. Scores are raw prior-map responses internally;
/// normalization to [0, 1] happens only at serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T: Scalar> {
    pub image_id: String,
    pub bbox: BBox<T>,
    pub score: T,
}

pub type DetectionSet<T> = Vec<Detection<T>>;

/// Divides every score by the set maximum (floored at `epsilon` so an
/// all-zero set maps to itself). Order and ranking are preserved.
pub fn normalize_scores<T: Scalar>(dets: &[Detection<T>], epsilon: T) -> Result<DetectionSet<T>> {
    if dets.is_empty() {
        return Err(Error::EmptySet("normalize_scores"));
    }
    let max = dets
        .iter()
        .map(|d| d.score)
        .fold(T::zero(), |a, b| a.max(b))
        .max(epsilon);
    Ok(dets
        .iter()
        .map(|d| Detection {
            image_id: d.image_id.clone(),
            bbox: d.bbox,
            score: d.score / max,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(score: f64) -> Detection<f64> {
        Detection {
            image_id: "img".into(),
            bbox: BBox::new(0.0, 0.0, 1.0, 1.0),
            score,
        }
    }

    #[test]
    fn area_examples() {
        assert_eq!(bbox_area(&BBox::new(0.0, 0.0, 10.0, 10.0)), 100.0);
        assert_eq!(bbox_area(&BBox::new(5.0, 5.0, 1.0, 1.0)), 1.0);
        // small/medium stratum boundary
        assert_eq!(bbox_area(&BBox::new(0.0, 0.0, 32.0, 32.0)), 1024.0);
    }

    #[test]
    fn normalize_examples() {
        let out = normalize_scores(&[det(2.0), det(4.0)], 1e-6).unwrap();
        assert_eq!(out[0].score, 0.5);
        assert_eq!(out[1].score, 1.0);

        let out = normalize_scores(&[det(7.0)], 1e-6).unwrap();
        assert_eq!(out[0].score, 1.0);

        // degenerate all-zero set: epsilon floor keeps it at zero
        let out = normalize_scores(&[det(0.0), det(0.0)], 1e-6).unwrap();
        assert_eq!(out[0].score, 0.0);
        assert_eq!(out[1].score, 0.0);
    }

    #[test]
    fn normalize_rejects_empty() {
        assert!(matches!(
            normalize_scores::<f64>(&[], 1e-6),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = normalize_scores(&[det(3.0), det(9.0), det(6.0)], 1e-6).unwrap();
        let twice = normalize_scores(&once, 1e-6).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn clip_drops_degenerate() {
        let b = BBox::new(-10.0, -10.0, 5.0, 5.0);
        assert!(b.clip(64, 64).is_none());
        let c = BBox::new(-4.0, -8.0, 12.0, 24.0).clip(64, 64).unwrap();
        assert_eq!(c, BBox::new(0.0, 0.0, 8.0, 16.0));
    }
}
