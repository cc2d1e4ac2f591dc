//! JSON wire formats for annotations, detections and evaluation reports.
//!
//! Annotation files carry an image table plus box records; detection files
//! are a flat list. Boxes serialize as `[x, y, w, h]` (top-left corner and
//! extent, pixels). Integer fields round-trip bit-exactly; reals survive a
//! round trip within 1e-9.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bbox::{Annotation, BBox, Detection};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub file: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub bbox: [f64; 4],
    pub category: String,
}

/// The annotation file: `{"images": [...], "annotations": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AnnotationFile {
    pub images: Vec<ImageRecord>,
    pub annotations: Vec<AnnotationRecord>,
}

impl AnnotationFile {
    /// Ids of all declared images.
    pub fn image_ids(&self) -> HashSet<String> {
        self.images.iter().map(|r| r.id.clone()).collect()
    }

    pub fn record_for(&self, id: &str) -> Option<&ImageRecord> {
        self.images.iter().find(|r| r.id == id)
    }

    /// Converts to domain annotations, checking that every record points at
    /// a declared image.
    pub fn to_annotations<T: Scalar>(&self) -> Result<Vec<Annotation<T>>> {
        let ids = self.image_ids();
        self.annotations
            .iter()
            .map(|r| {
                if !ids.contains(&r.image_id) {
                    return Err(Error::UnknownImageId(r.image_id.clone()));
                }
                Ok(Annotation {
                    image_id: r.image_id.clone(),
                    bbox: BBox::new(
                        T::from_f64(r.bbox[0]),
                        T::from_f64(r.bbox[1]),
                        T::from_f64(r.bbox[2]),
                        T::from_f64(r.bbox[3]),
                    ),
                    category: r.category.clone(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub bbox: [f64; 4],
    pub score: f64,
}

/// The detection file: `{"detections": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DetectionFile {
    pub detections: Vec<DetectionRecord>,
}

impl DetectionFile {
    pub fn from_detections<T: Scalar>(dets: &[Detection<T>]) -> Self {
        Self {
            detections: dets
                .iter()
                .map(|d| DetectionRecord {
                    image_id: d.image_id.clone(),
                    bbox: {
                        let b = d.bbox.to_f64();
                        [b.x, b.y, b.w, b.h]
                    },
                    score: d.score.to_f64(),
                })
                .collect(),
        }
    }

    pub fn to_detections<T: Scalar>(&self) -> Vec<Detection<T>> {
        self.detections
            .iter()
            .map(|r| Detection {
                image_id: r.image_id.clone(),
                bbox: BBox::new(
                    T::from_f64(r.bbox[0]),
                    T::from_f64(r.bbox[1]),
                    T::from_f64(r.bbox[2]),
                    T::from_f64(r.bbox[3]),
                ),
                score: T::from_f64(r.score),
            })
            .collect()
    }
}
