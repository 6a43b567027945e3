//! Time-course results shared by the stochastic and deterministic engines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Why a simulation stopped. All three are normal terminations, not errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached the configured end time.
    TEnd,
    /// All propensities dropped to zero; nothing can fire again.
    Exhausted,
    /// Hit the step cap.
    StepCap,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TEnd => "t_end",
            Termination::Exhausted => "exhausted",
            Termination::StepCap => "step_cap",
        }
    }
}

/// What to record along a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Record<F> {
    /// Every event (stochastic) or accepted step (deterministic).
    /// Unbounded memory on long runs; meant for tests and small models.
    All,
    /// Zero-order-hold samples on a fixed ascending grid starting at 0.
    OnGrid(Vec<F>),
}

impl<F: Scalar> Record<F> {
    /// `n` uniformly spaced points covering `[0, t_end]`.
    pub fn uniform_grid(t_end: F, n: usize) -> Self {
        Record::OnGrid(uniform_grid(t_end, n))
    }
}

pub fn uniform_grid<F: Scalar>(t_end: F, n: usize) -> Vec<F> {
    assert!(n >= 2, "a grid needs at least two points");
    let last = F::from_count(n as i64 - 1);
    (0..n)
        .map(|i| t_end * F::from_count(i as i64) / last)
        .collect()
}

/// One simulated time course. `S` is `i64` for molecule counts or the
/// scalar type for continuous concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F, S> {
    /// Ascending, starting at 0.
    pub times: Vec<F>,
    /// One state row per time point.
    pub states: Vec<Vec<S>>,
    pub terminated_by: Termination,
    /// Configured end of the simulated window (>= last recorded time).
    pub t_end: F,
}

impl<F: Scalar, S: Clone> Trajectory<F, S> {
    pub fn n_points(&self) -> usize {
        self.times.len()
    }

    pub fn final_state(&self) -> &[S] {
        self.states.last().expect("trajectory has at least one point")
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("grid point {point} lies outside the simulated window [0, {t_end}]")]
pub struct GridOutOfRange {
    pub point: f64,
    pub t_end: f64,
}

/// Zero-order-hold resampling: the value at a grid point `g` is the
/// recorded state at the last time `<= g`.
pub fn sample_on_grid<F: Scalar, S: Clone>(
    trajectory: &Trajectory<F, S>,
    grid: &[F],
) -> Result<Vec<Vec<S>>, GridOutOfRange> {
    let mut sampled = Vec::with_capacity(grid.len());
    for &g in grid {
        if g < F::zero() || g > trajectory.t_end {
            return Err(GridOutOfRange {
                point: g.to_f64().unwrap_or(f64::NAN),
                t_end: trajectory.t_end.to_f64().unwrap_or(f64::NAN),
            });
        }
        let idx = trajectory.times.partition_point(|&t| t <= g);
        // times[0] == 0 and g >= 0, so idx >= 1.
        sampled.push(trajectory.states[idx - 1].clone());
    }
    Ok(sampled)
}
