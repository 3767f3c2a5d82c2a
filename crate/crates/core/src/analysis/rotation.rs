//! Rotation vector of a recorded trajectory.
//!
//! A least-squares slope of the cumulative angles gives a first estimate. The
//! residual about that line is then differenced and averaged with the smooth
//! weight `exp(−1/(s(1−s)))` on `s ∈ (0, 1)`; for quasi-periodic motion this
//! weighted Birkhoff mean converges far faster than the plain slope.

use super::{AnalysisError, FrequencyVector};
use crate::dynamics::Trajectory;

pub const MIN_ROTATION_POINTS: usize = 1000;

fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

fn ols_slope(t: &[f64], u: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let u_mean = u.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&ti, &ui) in t.iter().zip(u) {
        let dt = ti - t_mean;
        sxy += dt * (ui - u_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    (slope, u_mean - slope * t_mean)
}

pub fn extract_rotation_vector(traj: &Trajectory) -> Result<FrequencyVector, AnalysisError> {
    let n = traj.times.len();
    if n < MIN_ROTATION_POINTS {
        return Err(AnalysisError::TooShort {
            len: n,
            min: MIN_ROTATION_POINTS,
        });
    }
    let k = traj.unwrapped_angles[0].len();
    let weights: Vec<f64> = (0..n - 1).map(|j| bump((j as f64 + 0.5) / (n - 1) as f64)).collect();
    let wsum: f64 = weights.iter().sum();

    let t = &traj.times;
    let omega = (0..k)
        .map(|i| {
            let u: Vec<f64> = traj.unwrapped_angles.iter().map(|a| a[i]).collect();
            let (slope, intercept) = ols_slope(t, &u);
            let resid: Vec<f64> = t
                .iter()
                .zip(&u)
                .map(|(&ti, &ui)| ui - (intercept + slope * ti))
                .collect();
            let correction: f64 = resid
                .windows(2)
                .zip(t.windows(2))
                .zip(&weights)
                .map(|((r, tt), w)| w * (r[1] - r[0]) / (tt[1] - tt[0]))
                .sum::<f64>()
                / wsum;
            slope + correction
        })
        .collect();
    Ok(FrequencyVector::new(omega))
}
