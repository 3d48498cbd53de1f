use std::time::{Duration, Instant};

use super::ViolationError;

/// Throughput from frame completion times: `(count - 1) / (last - first)`.
pub fn fps_from_timestamps(completions: &[Duration]) -> Result<f64, ViolationError> {
    let (Some(first), Some(last)) = (completions.first(), completions.last()) else {
        return Err(ViolationError::UndefinedRate(0));
    };
    if completions.len() < 2 {
        return Err(ViolationError::UndefinedRate(completions.len()));
    }
    let elapsed = last.saturating_sub(*first).as_secs_f64();
    if elapsed <= 0.0 {
        return Err(ViolationError::UndefinedRate(completions.len()));
    }
    Ok((completions.len() - 1) as f64 / elapsed)
}

/// Records completion instants relative to its creation.
#[derive(Debug, Clone)]
pub struct FpsMeter {
    origin: Instant,
    completions: Vec<Duration>,
}

impl Default for FpsMeter {
    fn default() -> Self {
        Self::new()
    }
}

impl FpsMeter {
    pub fn new() -> Self {
        Self { origin: Instant::now(), completions: Vec::new() }
    }

    pub fn tick(&mut self) {
        self.completions.push(self.origin.elapsed());
    }

    pub fn count(&self) -> usize {
        self.completions.len()
    }

    pub fn completions(&self) -> &[Duration] {
        &self.completions
    }

    pub fn fps(&self) -> Result<f64, ViolationError> {
        fps_from_timestamps(&self.completions)
    }
}
