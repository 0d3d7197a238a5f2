//! Monotonic nanosecond time source with a deterministic mock.
//!
//! Readings are nanoseconds since an arbitrary per-process epoch; only
//! differences between readings carry meaning. [`TimePoint::SENTINEL`] is
//! the largest representable reading and is never produced by either clock.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use thiserror::Error;

/// A clock reading in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimePoint(u64);

impl TimePoint {
    /// Written into a tic entry once it has been matched by a toc.
    pub const SENTINEL: TimePoint = TimePoint(u64::MAX);

    pub const fn from_nanos(nanos: u64) -> Self {
        TimePoint(nanos)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn is_sentinel(self) -> bool {
        self == Self::SENTINEL
    }

    /// Signed nanoseconds from `earlier` to `self`.
    ///
    /// Saturates at the `i64` bounds, so subtracting the sentinel from any
    /// real reading yields `i64::MIN`.
    pub fn signed_since(self, earlier: TimePoint) -> i64 {
        let diff = i128::from(self.0) - i128::from(earlier.0);
        diff.clamp(i128::from(i64::MIN), i128::from(i64::MAX)) as i64
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClockError {
    #[error("advancing mock clock from {now} by {delta}ns would reach the sentinel")]
    Overflow { now: u64, delta: u64 },
    #[error("mock clock cannot be set to the sentinel value")]
    SentinelValue,
}

fn process_epoch() -> Instant {
    static EPOCH: OnceLock<Instant> = OnceLock::new();
    *EPOCH.get_or_init(Instant::now)
}

/// Hand-driven clock for deterministic tests.
///
/// Cloning yields another handle to the same underlying time, so a test can
/// keep one handle and give the other to a [`Timer`](crate::Timer).
#[derive(Clone, Debug, Default)]
pub struct MockClock {
    now: Arc<AtomicU64>,
}

impl MockClock {
    pub fn new(start: u64) -> Result<Self, ClockError> {
        if start == u64::MAX {
            return Err(ClockError::SentinelValue);
        }
        Ok(MockClock {
            now: Arc::new(AtomicU64::new(start)),
        })
    }

    pub fn now(&self) -> TimePoint {
        TimePoint(self.now.load(Ordering::Acquire))
    }

    pub fn advance(&self, delta: u64) -> Result<(), ClockError> {
        let now = self.now.load(Ordering::Acquire);
        match now.checked_add(delta) {
            Some(next) if next < u64::MAX => {
                self.now.store(next, Ordering::Release);
                Ok(())
            }
            _ => Err(ClockError::Overflow { now, delta }),
        }
    }

    pub fn set(&self, nanos: u64) -> Result<(), ClockError> {
        if nanos == u64::MAX {
            return Err(ClockError::SentinelValue);
        }
        self.now.store(nanos, Ordering::Release);
        Ok(())
    }
}

/// Where a timer reads its time points from.
#[derive(Clone, Debug, Default)]
pub enum Clock {
    /// Monotonic system clock.
    #[default]
    Real,
    Mock(MockClock),
}

impl Clock {
    #[inline]
    pub fn now(&self) -> TimePoint {
        match self {
            Clock::Real => {
                let nanos = process_epoch().elapsed().as_nanos();
                // u64 nanoseconds cover ~584 years of process uptime.
                TimePoint(nanos.min(u128::from(u64::MAX - 1)) as u64)
            }
            Clock::Mock(mock) => mock.now(),
        }
    }

    pub fn is_mock(&self) -> bool {
        matches!(self, Clock::Mock(_))
    }
}

impl From<MockClock> for Clock {
    fn from(mock: MockClock) -> Self {
        Clock::Mock(mock)
    }
}
