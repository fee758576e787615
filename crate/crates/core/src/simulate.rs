//! Time integration, batch phase portraits and limit-cycle detection.
//!
//! Fixed-step RK4 is the canonical integrator; the adaptive embedded pair
//! is a convenience for stiff-ish exploratory runs and is never used by
//! the control transcription. Both enforce the positivity contract: a
//! component in `[-1e-9, 0)` is clamped to zero, anything lower aborts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{field_raw, Parameters, State};

/// Componentwise floor below which integration aborts.
pub const POSITIVITY_FLOOR: f64 = -1e-9;

/// Default fraction of a trajectory discarded before cycle detection.
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;

/// A time-indexed solution sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<State> {
        self.states.last().copied()
    }
}

/// Summary of a detected periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo {
    pub period: f64,
    /// Peak-to-trough excursion of x over the last detected cycles.
    pub amplitude_x: f64,
    pub amplitude_y: f64,
    pub mean_state: State,
}

/// Tunable thresholds for [`detect_limit_cycle_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOptions {
    /// Maximum relative spread among the last three inter-peak intervals.
    pub period_rel_tol: f64,
    /// Minimum peak-to-trough x excursion counted as a cycle.
    pub min_amplitude: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions { period_rel_tol: 0.02, min_amplitude: 1e-3 }
    }
}

fn check_start(s0: State) -> Result<()> {
    if !s0.is_finite() {
        return Err(CoreError::InvalidInput(format!("non-finite start state {s0}")));
    }
    if s0.x < 0.0 || s0.y < 0.0 {
        return Err(CoreError::InvalidInput(format!("negative start state {s0}")));
    }
    Ok(())
}

// Divergence and positivity checks applied after every accepted step.
fn admit(step: usize, t: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || !y.is_finite() {
        return Err(CoreError::Divergence { step, t, x, y });
    }
    if x < POSITIVITY_FLOOR || y < POSITIVITY_FLOOR {
        return Err(CoreError::PositivityViolation { step, t, x, y });
    }
    Ok((x.max(0.0), y.max(0.0)))
}

pub(crate) fn rk4_step(p: &Parameters, x: f64, y: f64, h: f64) -> (f64, f64) {
    let (k1x, k1y) = field_raw(p, x, y);
    let (k2x, k2y) = field_raw(p, x + 0.5 * h * k1x, y + 0.5 * h * k1y);
    let (k3x, k3y) = field_raw(p, x + 0.5 * h * k2x, y + 0.5 * h * k2y);
    let (k4x, k4y) = field_raw(p, x + h * k3x, y + h * k3y);
    (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )
}

/// Integrate with fixed-step RK4 from `t = 0` to `t_end`.
///
/// The final step is shortened so the trajectory lands exactly on `t_end`.
pub fn integrate(p: &Parameters, s0: State, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) || !t_end.is_finite() || !(dt > 0.0) || !dt.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "need t_end > 0 and dt > 0, got t_end = {t_end}, dt = {dt}"
        )));
    }
    check_start(s0)?;

    let n_full = (t_end / dt).floor() as usize;
    let mut times = Vec::with_capacity(n_full + 2);
    let mut states = Vec::with_capacity(n_full + 2);
    times.push(0.0);
    states.push(s0);

    let (mut x, mut y) = (s0.x, s0.y);
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_end {
        let h = dt.min(t_end - t);
        if h <= 0.0 {
            break;
        }
        let (nx, ny) = rk4_step(p, x, y, h);
        step += 1;
        t = if (t_end - t) <= dt { t_end } else { t + dt };
        let (cx, cy) = admit(step, t, nx, ny)?;
        x = cx;
        y = cy;
        times.push(t);
        states.push(State::new(x, y));
    }
    Ok(Trajectory { times, states })
}

// Fehlberg 4(5) embedded pair for one trial step; returns the 5th-order
// update and the componentwise error estimate against the 4th-order one.
fn rkf45_step(p: &Parameters, x: f64, y: f64, h: f64) -> (f64, f64, f64, f64) {
    let (k1x, k1y) = field_raw(p, x, y);
    let (k2x, k2y) = field_raw(p, x + h * 0.25 * k1x, y + h * 0.25 * k1y);
    let (k3x, k3y) = field_raw(
        p,
        x + h * (3.0 / 32.0 * k1x + 9.0 / 32.0 * k2x),
        y + h * (3.0 / 32.0 * k1y + 9.0 / 32.0 * k2y),
    );
    let (k4x, k4y) = field_raw(
        p,
        x + h * (1932.0 / 2197.0 * k1x - 7200.0 / 2197.0 * k2x + 7296.0 / 2197.0 * k3x),
        y + h * (1932.0 / 2197.0 * k1y - 7200.0 / 2197.0 * k2y + 7296.0 / 2197.0 * k3y),
    );
    let (k5x, k5y) = field_raw(
        p,
        x + h * (439.0 / 216.0 * k1x - 8.0 * k2x + 3680.0 / 513.0 * k3x - 845.0 / 4104.0 * k4x),
        y + h * (439.0 / 216.0 * k1y - 8.0 * k2y + 3680.0 / 513.0 * k3y - 845.0 / 4104.0 * k4y),
    );
    let (k6x, k6y) = field_raw(
        p,
        x + h
            * (-8.0 / 27.0 * k1x + 2.0 * k2x - 3544.0 / 2565.0 * k3x + 1859.0 / 4104.0 * k4x
                - 11.0 / 40.0 * k5x),
        y + h
            * (-8.0 / 27.0 * k1y + 2.0 * k2y - 3544.0 / 2565.0 * k3y + 1859.0 / 4104.0 * k4y
                - 11.0 / 40.0 * k5y),
    );
    let x4 = x
        + h * (25.0 / 216.0 * k1x + 1408.0 / 2565.0 * k3x + 2197.0 / 4104.0 * k4x
            - 0.2 * k5x);
    let y4 = y
        + h * (25.0 / 216.0 * k1y + 1408.0 / 2565.0 * k3y + 2197.0 / 4104.0 * k4y
            - 0.2 * k5y);
    let x5 = x
        + h * (16.0 / 135.0 * k1x + 6656.0 / 12825.0 * k3x + 28561.0 / 56430.0 * k4x
            - 9.0 / 50.0 * k5x
            + 2.0 / 55.0 * k6x);
    let y5 = y
        + h * (16.0 / 135.0 * k1y + 6656.0 / 12825.0 * k3y + 28561.0 / 56430.0 * k4y
            - 9.0 / 50.0 * k5y
            + 2.0 / 55.0 * k6y);
    (x5, y5, (x5 - x4).abs(), (y5 - y4).abs())
}

/// Integrate with the embedded 4(5) pair, halving the step on local-error
/// rejections and doubling it when the estimate is comfortably small.
pub fn integrate_adaptive(
    p: &Parameters,
    s0: State,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(CoreError::InvalidInput(format!("need t_end > 0, got {t_end}")));
    }
    if !(rel_tol > 0.0) || !rel_tol.is_finite() || !(abs_tol >= 0.0) || !abs_tol.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "need rel_tol > 0 and abs_tol >= 0, got rel_tol = {rel_tol}, abs_tol = {abs_tol}"
        )));
    }
    check_start(s0)?;

    let min_step = t_end * 1e-12;
    let mut h = t_end / 100.0;
    let mut times = vec![0.0];
    let mut states = vec![s0];
    let (mut x, mut y) = (s0.x, s0.y);
    let mut t = 0.0;
    let mut step = 0usize;
    let mut attempts = 0usize;
    while t < t_end {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(CoreError::NoConvergence {
                message: format!("adaptive integrator exceeded its attempt budget at t = {t}"),
                residual: t_end - t,
            });
        }
        let h_trial = h.min(t_end - t);
        let (nx, ny, ex, ey) = rkf45_step(p, x, y, h_trial);
        let tol_x = abs_tol + rel_tol * nx.abs();
        let tol_y = abs_tol + rel_tol * ny.abs();
        let ratio = (ex / tol_x).max(ey / tol_y);
        if !ratio.is_finite() || ratio > 1.0 {
            h = h_trial * 0.5;
            if h < min_step {
                return Err(CoreError::NoConvergence {
                    message: format!("adaptive step collapsed below {min_step:e} at t = {t}"),
                    residual: ratio,
                });
            }
            continue;
        }
        step += 1;
        t = if h_trial >= t_end - t { t_end } else { t + h_trial };
        let (cx, cy) = admit(step, t, nx, ny)?;
        x = cx;
        y = cy;
        times.push(t);
        states.push(State::new(x, y));
        if ratio < 1.0 / 32.0 {
            h = h_trial * 2.0;
        }
    }
    Ok(Trajectory { times, states })
}

// Vertex of the parabola through three samples; falls back to the middle
// abscissa when the points are collinear.
fn parabola_vertex(t0: f64, f0: f64, t1: f64, f1: f64, t2: f64, f2: f64) -> f64 {
    let d1 = t1 - t0;
    let d2 = t2 - t1;
    let u = f0 - f1;
    let v = f2 - f1;
    let a = (u * d2 + v * d1) / (d1 * d2 * (d1 + d2));
    if !a.is_finite() || a.abs() < 1e-300 {
        return t1;
    }
    let b = v / d2 - a * d2;
    t1 - b / (2.0 * a)
}

/// Look for a limit cycle in the tail of a trajectory using default
/// thresholds; see [`detect_limit_cycle_with`].
pub fn detect_limit_cycle(
    traj: &Trajectory,
    transient_fraction: f64,
) -> Result<Option<CycleInfo>> {
    detect_limit_cycle_with(traj, transient_fraction, &CycleOptions::default())
}

/// Look for a limit cycle by peak analysis of `x(t)`.
///
/// The leading `transient_fraction` of the time span is discarded; a cycle
/// is reported when the last three inter-peak intervals agree within
/// `period_rel_tol` and the peak-to-trough x excursion over those cycles
/// exceeds `min_amplitude`. Peak times are refined by local parabolic
/// interpolation before interval comparison.
pub fn detect_limit_cycle_with(
    traj: &Trajectory,
    transient_fraction: f64,
    options: &CycleOptions,
) -> Result<Option<CycleInfo>> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(CoreError::InvalidInput(format!(
            "transient_fraction must lie in [0, 1), got {transient_fraction}"
        )));
    }
    if traj.times.len() != traj.states.len() {
        return Err(CoreError::InvalidInput(
            "trajectory times and states have different lengths".into(),
        ));
    }
    let n = traj.len();
    if n < 2 {
        return Err(CoreError::InsufficientData(format!(
            "trajectory has {n} samples"
        )));
    }
    let cut = traj.times[0] + transient_fraction * (traj.times[n - 1] - traj.times[0]);
    let start = traj.times.partition_point(|&t| t < cut);
    if n - start < 10 {
        return Err(CoreError::InsufficientData(format!(
            "only {} samples remain after discarding the transient",
            n - start
        )));
    }

    let mut peak_times = Vec::new();
    let mut peak_indices = Vec::new();
    for i in start.max(1)..n - 1 {
        let a = traj.states[i - 1].x;
        let b = traj.states[i].x;
        let c = traj.states[i + 1].x;
        if a < b && b > c {
            peak_indices.push(i);
            peak_times.push(parabola_vertex(
                traj.times[i - 1],
                a,
                traj.times[i],
                b,
                traj.times[i + 1],
                c,
            ));
        }
    }
    // Three comparable intervals need four peaks.
    if peak_times.len() < 4 {
        return Ok(None);
    }
    let k = peak_times.len();
    let intervals: Vec<f64> = (k - 3..k - 1 + 1)
        .map(|j| peak_times[j] - peak_times[j - 1])
        .collect();
    let mean_interval = intervals.iter().sum::<f64>() / intervals.len() as f64;
    if mean_interval <= 0.0 {
        return Ok(None);
    }
    if intervals
        .iter()
        .any(|i| (i - mean_interval).abs() > options.period_rel_tol * mean_interval)
    {
        return Ok(None);
    }

    let window = peak_indices[k - 4]..=peak_indices[k - 1];
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut count = 0usize;
    for i in window {
        let s = traj.states[i];
        min_x = min_x.min(s.x);
        max_x = max_x.max(s.x);
        min_y = min_y.min(s.y);
        max_y = max_y.max(s.y);
        sum_x += s.x;
        sum_y += s.y;
        count += 1;
    }
    let amplitude_x = max_x - min_x;
    if amplitude_x <= options.min_amplitude {
        return Ok(None);
    }
    Ok(Some(CycleInfo {
        period: mean_interval,
        amplitude_x,
        amplitude_y: max_y - min_y,
        mean_state: State::new(sum_x / count as f64, sum_y / count as f64),
    }))
}

/// Run one fixed-step integration per start, in parallel; per-start errors
/// are reported in place without aborting the batch.
pub fn phase_portrait(
    p: &Parameters,
    initial_conditions: &[State],
    t_end: f64,
    dt: f64,
) -> Result<Vec<Result<Trajectory>>> {
    if initial_conditions.is_empty() {
        return Err(CoreError::InvalidInput(
            "phase portrait needs at least one initial condition".into(),
        ));
    }
    Ok(initial_conditions
        .par_iter()
        .map(|&s0| integrate(p, s0, t_end, dt))
        .collect())
}
