//! Raster containers: grayscale intensity images and per-pixel label masks.
//!
//! Coordinate convention used across the crate: origin at the top-left
//! corner, x rightward, y downward, pixel centers at integer coordinates.
//! Buffers are row-major.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Single-channel intensity raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T: Scalar> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    /// Builds an image from a row-major buffer, checking both invariants
    /// (length = width x height, all values finite).
    pub fn new(width: u32, height: u32, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dims("image dimensions must be positive", "w,h > 0", format!("{width}x{height}")));
        }
        let img = Self { width, height, data };
        img.validate()?;
        Ok(img)
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; (width * height) as usize],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> T) -> Self {
        let mut data = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Re-checks the type invariants; `ok` iff they all hold.
    pub fn validate(&self) -> Result<()> {
        let expected = (self.width as usize) * (self.height as usize);
        if self.data.len() != expected {
            return Err(Error::dims("image buffer length", expected, self.data.len()));
        }
        if let Some(index) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> T {
        self.data[(y * self.width + x) as usize]
    }

    /// Reads the pixel nearest to (x, y), clamping out-of-bounds coordinates
    /// to the image border.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> T {
        let cx = x.clamp(0, self.width as i64 - 1) as u32;
        let cy = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(cx, cy)
    }

    /// Pointwise map into another scalar type.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GrayImage<U> {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Per-pixel scene class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum SceneClass {
    /// Open sea or anything else a ship may legitimately occupy.
    Sea = 0,
    Land = 1,
    Cloud = 2,
}

impl SceneClass {
    pub fn from_index(v: u8) -> Option<Self> {
        match v {
            0 => Some(SceneClass::Sea),
            1 => Some(SceneClass::Land),
            2 => Some(SceneClass::Cloud),
            _ => None,
        }
    }

    /// Land and cloud form the unified background class ships cannot occupy.
    #[inline]
    pub fn excludes_ships(self) -> bool {
        matches!(self, SceneClass::Land | SceneClass::Cloud)
    }
}

/// Per-pixel scene labels accompanying an image: 0 = sea/other, 1 = land,
/// 2 = cloud.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl SceneMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        let expected = (width as usize) * (height as usize);
        if labels.len() != expected {
            return Err(Error::dims("scene mask length", expected, labels.len()));
        }
        if let Some(index) = labels.iter().position(|&v| v > 2) {
            return Err(Error::InvalidConfig(format!(
                "scene label {} at index {index} not in {{0,1,2}}",
                labels[index]
            )));
        }
        Ok(Self { width, height, labels })
    }

    /// All-sea mask.
    pub fn all_sea(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            labels: vec![0; (width * height) as usize],
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn class_at(&self, x: u32, y: u32) -> SceneClass {
        SceneClass::from_index(self.labels[(y * self.width + x) as usize]).expect("validated label")
    }

    /// Marks the half-open rectangle [x0, x1) x [y0, y1) with `class`.
    pub fn paint_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32, class: SceneClass) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.labels[(y * self.width + x) as usize] = class as u8;
            }
        }
    }
}

/// Three-way supervision label. Serialized indices: 0 unknown, 1 positive,
/// 2 negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum TrimapLabel {
    /// Excluded from supervision.
    Unknown = 0,
    /// Inside an expanded target box.
    Positive = 1,
    /// Unified land/cloud background.
    Negative = 2,
}

impl TrimapLabel {
    pub fn from_index(v: u8) -> Option<Self> {
        match v {
            0 => Some(TrimapLabel::Unknown),
            1 => Some(TrimapLabel::Positive),
            2 => Some(TrimapLabel::Negative),
            _ => None,
        }
    }
}

/// Per-pixel positive/negative/unknown supervision mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trimap {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl Trimap {
    pub(crate) fn from_labels(width: u32, height: u32, labels: Vec<u8>) -> Self {
        debug_assert_eq!(labels.len(), (width as usize) * (height as usize));
        Self { width, height, labels }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Raw label indices, row-major.
    #[inline]
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn label_at(&self, x: u32, y: u32) -> TrimapLabel {
        TrimapLabel::from_index(self.labels[(y * self.width + x) as usize]).expect("constructed label")
    }

    pub fn count(&self, label: TrimapLabel) -> usize {
        self.labels.iter().filter(|&&v| v == label as u8).count()
    }
}
