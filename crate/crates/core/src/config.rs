//! Configuration records for the prior extractor, gradient bank and the
//! augmentation schedule.

use crate::error::{Error, Result};

/// Scene-prior extractor parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SseConfig {
    /// Patch edge lengths `n`, one per scale; window edge is `9n`.
    pub scales: Vec<u32>,
    /// Modulus for the low-bit output channel.
    pub alpha1: u32,
    /// Divisor for the high-bit output channel.
    pub alpha2: u32,
    /// Floor applied to the background-variation denominator.
    pub epsilon: f64,
    /// Quantization ceiling applied before the bit split.
    pub q_max: u32,
}

impl Default for SseConfig {
    fn default() -> Self {
        Self {
            scales: vec![1, 2, 3],
            alpha1: 256,
            alpha2: 256,
            epsilon: 1e-6,
            q_max: 65535,
        }
    }
}

impl SseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidConfig("scales must be non-empty".into()));
        }
        if !self.scales.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("scales must be strictly increasing".into()));
        }
        if self.scales[0] == 0 {
            return Err(Error::InvalidConfig("scales must be >= 1".into()));
        }
        if self.alpha1 < 2 || self.alpha2 < 2 {
            return Err(Error::InvalidConfig("alpha1 and alpha2 must be >= 2".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Which encodings of the fused gradient map to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradEncodings {
    pub linear: bool,
    pub square: bool,
}

impl Default for GradEncodings {
    fn default() -> Self {
        Self { linear: true, square: true }
    }
}

/// Fixed-weight gradient bank parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradConfig {
    /// One weight per compass direction, clockwise from east. The implied
    /// center weight is the negated sum.
    pub weights: [f64; 8],
    /// Neighbor offset in pixels.
    pub dilation: u32,
    pub encodings: GradEncodings,
}

impl Default for GradConfig {
    fn default() -> Self {
        Self {
            weights: [0.125; 8],
            dilation: 1,
            encodings: GradEncodings::default(),
        }
    }
}

impl GradConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteValue { index: i });
        }
        if self.dilation == 0 {
            return Err(Error::InvalidConfig("dilation must be >= 1".into()));
        }
        if !self.encodings.linear && !self.encodings.square {
            return Err(Error::InvalidConfig("at least one encoding must be enabled".into()));
        }
        Ok(())
    }
}

/// Augmentation-ratio schedule parameters: `R = 1 - beta * (m / M)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    /// Decay strength, strictly inside (0, 1).
    pub beta: f64,
    /// Total number of epochs M.
    pub total_epochs: u32,
}

impl ScheduleConfig {
    pub fn new(beta: f64, total_epochs: u32) -> Result<Self> {
        let cfg = Self { beta, total_epochs };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidConfig(format!("beta {} not in (0, 1)", self.beta)));
        }
        if self.total_epochs == 0 {
            return Err(Error::InvalidConfig("total_epochs must be >= 1".into()));
        }
        Ok(())
    }
}
