use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of a closed interval, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl ScanRange {
    pub fn new(min: f64, max: f64, samples: usize) -> Result<Self> {
        let range = Self { min, max, samples };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite())
            || self.min >= self.max
            || self.samples < 2
        {
            return Err(Error::EmptyScanRange(format!(
                "need finite min < max and at least 2 samples, got [{}, {}] with {}",
                self.min, self.max, self.samples
            )));
        }
        Ok(())
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.samples - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.point(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let r = ScanRange::new(-100.0, 100.0, 401).unwrap();
        let p = r.points();
        assert_eq!((p[0], p[200], p[400]), (-100.0, 0.0, 100.0));
        assert!(ScanRange::new(1.0, 1.0, 5).is_err());
        assert!(ScanRange::new(0.0, 1.0, 1).is_err());
        assert!(ScanRange::new(0.0, f64::NAN, 3).is_err());
    }
}
