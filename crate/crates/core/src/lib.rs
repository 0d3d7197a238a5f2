//! Tic/toc section timers.
//!
//! ```
//! use tictoc::{Timer, TimerConfig};
//!
//! let mut timer = Timer::new(TimerConfig::named("example").autoreturn(false));
//! {
//!     let _whole = timer.scoped("whole");
//!     for _ in 0..10 {
//!         timer.tic("step");
//!         std::hint::black_box((0..100).sum::<u64>());
//!         timer.toc("step");
//!     }
//! }
//! let report = timer.finalize();
//! assert_eq!(report.row("step").unwrap().count, 10);
//! assert_eq!(report.row("whole").unwrap().count, 1);
//! ```
//!
//! Timers may nest, overlap and run on several threads against one shared
//! [`Timer`]. Spans are folded into per-tag running statistics by
//! [`Timer::aggregate`], and [`Timer::finalize`] turns those into a
//! [`Report`] rounded to whole nanoseconds.

pub mod aggregation;
pub mod clock;
pub mod report;
pub mod timer;

pub use aggregation::{welford_update, DiagnosticsSet, StatEntry};
pub use clock::{Clock, ClockError, MockClock, TimePoint};
pub use report::{choose_unit, Format, Report, ReportError, ReportRow, Unit, Warning, WarningKind};
pub use timer::{
    ScopeGuard, SharedBuffer, Sink, SpanRecord, TicKey, Timer, TimerConfig, DEFAULT_SCOPE_TAG,
    DEFAULT_TAG,
};
