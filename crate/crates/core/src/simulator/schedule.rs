use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Duty cycle: `delta1_steps` ON followed by `delta2_steps` OFF, repeating
/// from step 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnOffSchedule {
    pub delta1_steps: usize,
    pub delta2_steps: usize,
}

impl OnOffSchedule {
    pub fn new(delta1_steps: usize, delta2_steps: usize) -> Result<Self> {
        if delta1_steps == 0 {
            return Err(Error::invalid("delta1_steps", "must be at least 1"));
        }
        Ok(OnOffSchedule {
            delta1_steps,
            delta2_steps,
        })
    }

    pub fn always_on() -> Self {
        OnOffSchedule {
            delta1_steps: 1,
            delta2_steps: 0,
        }
    }

    pub fn period(&self) -> usize {
        self.delta1_steps + self.delta2_steps
    }

    /// The indicator `a(i)`.
    pub fn is_on(&self, step: usize) -> bool {
        step % self.period() < self.delta1_steps
    }

    pub fn delta1_time(&self, h: f64) -> f64 {
        self.delta1_steps as f64 * h
    }

    pub fn delta2_time(&self, h: f64) -> f64 {
        self.delta2_steps as f64 * h
    }

    /// Number of ON steps among `0..n_steps`.
    pub fn on_count(&self, n_steps: usize) -> usize {
        let full = n_steps / self.period();
        let rem = n_steps % self.period();
        full * self.delta1_steps + rem.min(self.delta1_steps)
    }

    /// Path length `p*delta1 + (p-1)*delta2` holding `p` ON windows and
    /// ending at the close of the last one.
    pub fn steps_for_windows(&self, p: usize) -> usize {
        if p == 0 {
            return 0;
        }
        p * self.delta1_steps + (p - 1) * self.delta2_steps
    }

    /// Largest `p` with `steps_for_windows(p) <= n_steps`.
    pub fn windows_within(&self, n_steps: usize) -> usize {
        (n_steps + self.delta2_steps) / self.period()
    }

    /// Number of complete ON windows among `0..n_steps`.
    pub fn complete_windows(&self, n_steps: usize) -> usize {
        if n_steps < self.delta1_steps {
            0
        } else {
            (n_steps - self.delta1_steps) / self.period() + 1
        }
    }

    /// 0-based index of the last step of ON window `k`.
    pub fn window_end(&self, k: usize) -> usize {
        (k + 1) * self.delta1_steps + k * self.delta2_steps - 1
    }
}
