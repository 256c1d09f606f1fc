use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[-R, R]` with `n` nodes, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub half_width: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        let g = Self { half_width, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Config(format!("grid half-width must be positive, got {}", self.half_width)));
        }
        if self.points < 256 || !self.points.is_power_of_two() {
            return Err(Error::Config(format!("grid size must be a power of two ≥ 256, got {}", self.points)));
        }
        if self.spacing() >= 1.0 {
            return Err(Error::Config(format!("grid spacing {} must be below 1", self.spacing())));
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Same interval, twice as many cells.
    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, points: self.points * 2 }
    }

    /// Continuous index `(x + R)/h`.
    #[inline]
    pub fn position(&self, x: f64) -> f64 {
        (x + self.half_width) / self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = Grid1D::new(12.0, 2048).unwrap();
        assert_eq!(g.x(0), -12.0);
        assert!((g.x(2047) - 12.0).abs() < 1e-12);
        assert!((g.position(g.x(1000)) - 1000.0).abs() < 1e-9);
        assert!(Grid1D::new(12.0, 1000).is_err());
        assert!(Grid1D::new(300.0, 256).is_err());
    }
}
