//! Exponential decay extraction by least squares on the log-track.

use super::series::ObservableSeries;
use crate::{Error, Result};

/// Result of fitting `amplitude * exp(-rate * t)` on a window.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialFit {
    pub rate: f64,
    pub amplitude: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub n_points: usize,
}

/// Least-squares fit of log(track) = log(amplitude) - rate * t over the
/// window [t_min, t_max]. Every sample inside the window must be strictly
/// positive.
pub fn fit_exponential(
    series: &ObservableSeries,
    track: &str,
    window: (f64, f64),
) -> Result<ExponentialFit> {
    let tr = series
        .track(track)
        .ok_or_else(|| Error::Fit(format!("no track named '{track}'")))?;
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &v) in series.times.iter().zip(&tr.values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::Fit(format!(
                "non-positive sample {v:.3e} at t = {t:.6e} inside the fit window"
            )));
        }
        ts.push(t);
        logs.push(v.ln());
    }
    let n = ts.len();
    if n < 3 {
        return Err(Error::Fit(format!(
            "only {n} samples in window [{}, {}]",
            window.0, window.1
        )));
    }
    let nf = n as f64;
    let mean_t = ts.iter().sum::<f64>() / nf;
    let mean_y = logs.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in ts.iter().zip(&logs) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let mut ss = 0.0;
    for (t, y) in ts.iter().zip(&logs) {
        let r = y - (intercept + slope * t);
        ss += r * r;
    }
    Ok(ExponentialFit {
        rate: -slope,
        amplitude: intercept.exp(),
        residual: (ss / nf).sqrt(),
        n_points: n,
    })
}
