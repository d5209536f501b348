//! Time-sampled solutions with per-sample diagnostics.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::scalar::Real;

/// Diagnostics recorded at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    /// `‖u(t)‖_{α,2}`.
    pub mass: f64,
    pub sup_norm: f64,
    /// Running `(∫_0^t ‖u‖_{α,r}^q ds)^{1/q}` for the configured pair.
    pub lqlr_accum: f64,
    pub contraction_ratio: Option<f64>,
}

/// States `u(t_k, ·)` on a common grid, `t_0 = 0`, strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    times: Vec<T>,
    states: Vec<Field<T>>,
    diagnostics: Vec<StepDiagnostics>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(times: Vec<T>, states: Vec<Field<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::Usage(format!(
                "trajectory needs matching non-empty times and states ({} vs {})",
                times.len(),
                states.len()
            )));
        }
        if times[0] != T::zero() {
            return Err(Error::Usage("trajectory must start at t = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Usage("trajectory times must be strictly increasing".into()));
        }
        let grid = states[0].grid();
        for s in &states {
            if !s.grid().same_as(grid) || s.space() != Space::Physical {
                return Err(Error::Usage("trajectory states must share one grid and be physical".into()));
            }
        }
        Ok(Self {
            times,
            states,
            diagnostics: Vec::new(),
        })
    }

    /// Uniform samples `t_k = k·dt`, `k = 0..states.len()`.
    pub fn uniform(dt: T, states: Vec<Field<T>>) -> Result<Self> {
        let times = (0..states.len()).map(|k| T::from_count(k) * dt).collect();
        Self::new(times, states)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[Field<T>] {
        &self.states
    }

    pub fn into_states(self) -> Vec<Field<T>> {
        self.states
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.states[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Field<T> {
        self.states.last().expect("non-empty by construction")
    }

    pub fn end_time(&self) -> T {
        *self.times.last().expect("non-empty by construction")
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn set_diagnostics(&mut self, diagnostics: Vec<StepDiagnostics>) {
        self.diagnostics = diagnostics;
    }

    /// Common spacing if the times are uniform to a relative `1e-9`.
    pub fn uniform_step(&self) -> Option<T> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        let tol = T::lit(1e-9) * dt;
        let uniform = self
            .times
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - T::from_count(k) * dt).abs() <= tol * T::from_count(k.max(1)));
        uniform.then_some(dt)
    }
}
