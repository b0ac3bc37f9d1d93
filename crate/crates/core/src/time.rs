//! Monotonic time source abstraction.
//!
//! The optimizer and the multi-cycle planner only need "seconds elapsed since
//! some epoch"; abstracting it keeps the core `no_std`-clean and lets tests
//! drive deadlines deterministically.

/// Monotonic clock in seconds from an arbitrary epoch.
pub trait Clock {
    fn now_s(&self) -> f64;
}

/// Wall clock backed by [`std::time::Instant`].
#[cfg(feature = "std")]
pub struct WallClock {
    epoch: std::time::Instant,
}

#[cfg(feature = "std")]
impl WallClock {
    pub fn new() -> Self {
        Self {
            epoch: std::time::Instant::now(),
        }
    }
}

#[cfg(feature = "std")]
impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn now_s(&self) -> f64 {
        self.epoch.elapsed().as_secs_f64()
    }
}

/// Manually advanced clock for tests.
pub struct ManualClock {
    now: core::cell::Cell<f64>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self {
            now: core::cell::Cell::new(0.0),
        }
    }

    pub fn advance(&self, dt: f64) {
        self.now.set(self.now.get() + dt);
    }
}

impl Default for ManualClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for ManualClock {
    fn now_s(&self) -> f64 {
        self.now.get()
    }
}
