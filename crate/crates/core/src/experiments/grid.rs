use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(Error::Config(format!("unknown grid scale '{other}'"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

/// One sweep axis. With `endpoint = false` the last point `max` is left out,
/// which is what a full `[0, 2 pi)` period wants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
    pub endpoint: bool,
}

impl Grid {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Grid { min, max, count, scale: Scale::Linear, endpoint: true }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Grid { min, max, count, scale: Scale::Log, endpoint: true }
    }

    pub fn single(x: f64) -> Self {
        Grid::linear(x, x, 1)
    }

    pub fn periodic(count: usize) -> Self {
        Grid { min: 0.0, max: std::f64::consts::TAU, count, scale: Scale::Linear, endpoint: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("grid must have at least one point".into()));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!("grid bounds must be finite, got [{}, {}]", self.min, self.max)));
        }
        if self.max < self.min {
            return Err(Error::Config(format!("grid max {} is below min {}", self.max, self.min)));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::Config(format!("log grid needs a positive minimum, got {}", self.min)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let steps = if self.endpoint { self.count - 1 } else { self.count } as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if self.endpoint && i == self.count - 1 {
                    return self.max;
                }
                let t = i as f64 / steps;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}
