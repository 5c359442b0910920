//! Time grid plus named expectation-value tracks.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One named real-valued track with optional per-point ensemble standard
/// errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Track {
    pub name: String,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

/// Time grid + named tracks. Every track has exactly one value per grid
/// point; the grid is strictly increasing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub tracks: Vec<Track>,
}

impl ObservableSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidState(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            tracks: Vec::new(),
        })
    }

    pub fn push_track(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        self.push_track_with_stderr(name, values, None)
    }

    pub fn push_track_with_stderr(
        &mut self,
        name: impl Into<String>,
        values: Vec<f64>,
        stderr: Option<Vec<f64>>,
    ) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "track has {} values for {} grid points",
                values.len(),
                self.times.len()
            )));
        }
        if let Some(se) = &stderr {
            if se.len() != self.times.len() {
                return Err(Error::DimensionMismatch(
                    "stderr length does not match grid".into(),
                ));
            }
        }
        self.tracks.push(Track {
            name: name.into(),
            values,
            stderr,
        });
        Ok(())
    }

    pub fn track(&self, name: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.name == name)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last grid point with t <= time.
    pub fn index_at(&self, time: f64) -> usize {
        match self
            .times
            .binary_search_by(|t| t.partial_cmp(&time).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }
}

/// Uniform grid from 0 to `horizon` with `n` intervals (n+1 points).
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| horizon * i as f64 / n as f64).collect()
}
