use num_traits::Float;

use crate::{Error, Result};

/// Smooth bijection from the real line onto the open tuning range
/// `(B_min, B_max)`: `x / sqrt(x^2 / B_-^2 + 1) + B_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashParams {
    /// Half-width `(B_max - B_min) / 2`.
    pub b_minus: f64,
    /// Midpoint `(B_max + B_min) / 2`.
    pub b_plus: f64,
}

impl SquashParams {
    pub fn from_range(b_min: f64, b_max: f64) -> Result<Self> {
        if !(b_max > b_min) {
            return Err(Error::InvalidParameter(alloc::format!(
                "empty susceptance range [{b_min}, {b_max}]"
            )));
        }
        Ok(Self {
            b_minus: 0.5 * (b_max - b_min),
            b_plus: 0.5 * (b_max + b_min),
        })
    }

    pub fn b_min(&self) -> f64 {
        self.b_plus - self.b_minus
    }

    pub fn b_max(&self) -> f64 {
        self.b_plus + self.b_minus
    }

    pub fn squash(&self, x: f64) -> f64 {
        let r = x / self.b_minus;
        // hypot keeps r^2 + 1 from overflowing for huge |x|.
        self.b_minus * (r / Float::hypot(r, 1.0)) + self.b_plus
    }

    /// `d squash / dx = (1 + x^2 / B_-^2)^(-3/2)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let h = Float::hypot(x / self.b_minus, 1.0);
        1.0 / (h * h * h)
    }

    /// Inverse of [`SquashParams::squash`] on the open interval.
    pub fn unsquash(&self, b: f64) -> Result<f64> {
        let u = (b - self.b_plus) / self.b_minus;
        if !(u.abs() < 1.0) {
            return Err(Error::OutOfRange {
                b_s: b,
                min_s: self.b_min(),
                max_s: self.b_max(),
            });
        }
        Ok(self.b_minus * u / Float::sqrt((1.0 - u) * (1.0 + u)))
    }
}
