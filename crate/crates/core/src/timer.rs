//! The [`Timer`]: named tic/toc section timers that may nest, overlap and
//! run on many threads at once.
//!
//! Each open timer is keyed by its tag and the ordinal of the recording
//! thread, so threads never match each other's tics. A toc stores the
//! elapsed time as a [`SpanRecord`] and overwrites the tic entry with
//! [`TimePoint::SENTINEL`]. A second toc on the same key therefore yields
//! a negative span, which aggregation reports as a needless toc.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, PoisonError};
use std::thread::{self, ThreadId};

use crate::aggregation::{DiagnosticsSet, StatEntry};
use crate::clock::{Clock, TimePoint};
use crate::report::{Format, WarningKind};

/// Tag used by [`Timer::tic_default`] and [`Timer::toc_default`].
pub const DEFAULT_TAG: &str = "tictoc";
/// Tag used by [`Timer::scoped_default`].
pub const DEFAULT_SCOPE_TAG: &str = "scoped";
/// Default report name.
pub const DEFAULT_NAME: &str = "times";

/// Identifies one in-flight timer instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TicKey {
    pub tag: String,
    pub thread_ordinal: u32,
}

/// One completed measurement. The recording thread is not kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanRecord {
    pub tag: String,
    /// Negative when the toc closed an already-closed timer.
    pub duration_ns: i64,
}

/// In-memory text sink, shared between clones.
#[derive(Clone, Debug, Default)]
pub struct SharedBuffer(Arc<Mutex<String>>);

impl SharedBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contents(&self) -> String {
        self.0
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .clone()
    }

    fn push_str(&self, text: &str) {
        self.0
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .push_str(text);
    }
}

/// Output destination for reports and warnings.
#[derive(Clone, Debug, Default)]
pub enum Sink {
    #[default]
    Stdout,
    Stderr,
    /// Appended to; created if missing.
    File(PathBuf),
    Buffer(SharedBuffer),
}

impl Sink {
    pub fn write_str(&self, text: &str) -> io::Result<()> {
        match self {
            Sink::Stdout => io::stdout().lock().write_all(text.as_bytes()),
            Sink::Stderr => io::stderr().lock().write_all(text.as_bytes()),
            Sink::File(path) => OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?
                .write_all(text.as_bytes()),
            Sink::Buffer(buffer) => {
                buffer.push_str(text);
                Ok(())
            }
        }
    }
}

impl fmt::Display for Sink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sink::Stdout => f.write_str("stdout"),
            Sink::Stderr => f.write_str("stderr"),
            Sink::File(path) => write!(f, "{}", path.display()),
            Sink::Buffer(_) => f.write_str("buffer"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TimerConfig {
    /// Report title.
    pub name: String,
    /// Emit mismatch warnings on finalize.
    pub verbose: bool,
    /// Write the report to `sink` on the first finalize, or on drop.
    pub autoreturn: bool,
    pub sink: Sink,
    /// Format used for the automatic report.
    pub format: Format,
    pub warnings: Sink,
}

impl Default for TimerConfig {
    fn default() -> Self {
        TimerConfig {
            name: DEFAULT_NAME.to_owned(),
            verbose: true,
            autoreturn: true,
            sink: Sink::Stdout,
            format: Format::Table,
            warnings: Sink::Stderr,
        }
    }
}

impl TimerConfig {
    /// Default configuration with the given report name. An empty name
    /// falls back to the default.
    pub fn named(name: impl Into<String>) -> Self {
        let name = name.into();
        TimerConfig {
            name: if name.is_empty() {
                DEFAULT_NAME.to_owned()
            } else {
                name
            },
            ..Self::default()
        }
    }

    pub fn verbose(mut self, verbose: bool) -> Self {
        self.verbose = verbose;
        self
    }

    pub fn autoreturn(mut self, autoreturn: bool) -> Self {
        self.autoreturn = autoreturn;
        self
    }

    pub fn sink(mut self, sink: Sink) -> Self {
        self.sink = sink;
        self
    }

    pub fn format(mut self, format: Format) -> Self {
        self.format = format;
        self
    }

    pub fn warnings(mut self, sink: Sink) -> Self {
        self.warnings = sink;
        self
    }
}

/// State touched by tic/toc, guarded by one lock.
#[derive(Debug, Default)]
pub(crate) struct Recording {
    ordinals: HashMap<ThreadId, u32>,
    /// Open and closed tics, indexed by thread ordinal.
    pub(crate) tics: Vec<HashMap<String, TimePoint>>,
    pub(crate) spans: Vec<SpanRecord>,
    pub(crate) missing_tics: BTreeSet<String>,
}

impl Recording {
    fn ordinal(&mut self, thread: ThreadId) -> usize {
        let next = self.ordinals.len() as u32;
        let ordinal = *self.ordinals.entry(thread).or_insert(next);
        let ordinal = ordinal as usize;
        if self.tics.len() <= ordinal {
            self.tics.resize_with(ordinal + 1, HashMap::new);
        }
        ordinal
    }
}

/// Tracks what has already been written out, so each item is emitted once.
#[derive(Debug, Default)]
pub(crate) struct Emitted {
    pub(crate) report: bool,
    pub(crate) warnings: HashSet<(WarningKind, String)>,
}

/// Section timer shared by reference across threads.
///
/// `tic`, `toc` and `scoped` take `&self` and may run concurrently.
/// Aggregation, finalize and reset take `&mut self`, so the borrow checker
/// guarantees no recording is in flight while they run.
pub struct Timer {
    pub(crate) config: TimerConfig,
    pub(crate) clock: Clock,
    pub(crate) recording: Mutex<Recording>,
    pub(crate) stats: BTreeMap<String, StatEntry>,
    pub(crate) needless_tocs: BTreeSet<String>,
    pub(crate) emitted: Emitted,
}

impl Default for Timer {
    fn default() -> Self {
        Timer::new(TimerConfig::default())
    }
}

impl fmt::Debug for Timer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Timer")
            .field("config", &self.config)
            .field("clock", &self.clock)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

impl Timer {
    pub fn new(config: TimerConfig) -> Self {
        Timer::with_clock(config, Clock::Real)
    }

    pub fn with_clock(config: TimerConfig, clock: impl Into<Clock>) -> Self {
        Timer {
            config,
            clock: clock.into(),
            recording: Mutex::default(),
            stats: BTreeMap::new(),
            needless_tocs: BTreeSet::new(),
            emitted: Emitted::default(),
        }
    }

    pub fn config(&self) -> &TimerConfig {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut TimerConfig {
        &mut self.config
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, Recording> {
        self.recording
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
    }

    pub(crate) fn recording_mut(&mut self) -> &mut Recording {
        self.recording
            .get_mut()
            .unwrap_or_else(PoisonError::into_inner)
    }

    /// Starts (or restarts) the timer `tag` for the calling thread.
    pub fn tic(&self, tag: &str) {
        let mut rec = self.lock();
        let ordinal = rec.ordinal(thread::current().id());
        let tics = &mut rec.tics[ordinal];
        // Read the clock last so bookkeeping is not attributed to the span.
        let now = self.clock.now();
        match tics.get_mut(tag) {
            Some(start) => *start = now,
            None => {
                tics.insert(tag.to_owned(), now);
            }
        }
    }

    /// Stops the timer `tag` for the calling thread and records a span.
    ///
    /// A toc with no prior tic records nothing and is remembered as a
    /// missing tic.
    pub fn toc(&self, tag: &str) {
        let now = self.clock.now();
        let mut rec = self.lock();
        let ordinal = rec.ordinal(thread::current().id());
        match rec.tics[ordinal].get_mut(tag) {
            Some(start) => {
                let duration_ns = now.signed_since(*start);
                *start = TimePoint::SENTINEL;
                rec.spans.push(SpanRecord {
                    tag: tag.to_owned(),
                    duration_ns,
                });
            }
            None => {
                if !rec.missing_tics.contains(tag) {
                    rec.missing_tics.insert(tag.to_owned());
                }
            }
        }
    }

    pub fn tic_default(&self) {
        self.tic(DEFAULT_TAG);
    }

    pub fn toc_default(&self) {
        self.toc(DEFAULT_TAG);
    }

    /// Starts `tag` now and stops it when the returned guard is dropped,
    /// including during unwinding or an early `?` return.
    #[must_use = "the span ends as soon as the guard is dropped"]
    pub fn scoped(&self, tag: impl Into<String>) -> ScopeGuard<'_> {
        ScopeGuard::new(self, tag)
    }

    #[must_use = "the span ends as soon as the guard is dropped"]
    pub fn scoped_default(&self) -> ScopeGuard<'_> {
        self.scoped(DEFAULT_SCOPE_TAG)
    }

    /// Spans recorded since the last aggregation, in completion order.
    pub fn raw_spans(&self) -> Vec<SpanRecord> {
        self.lock().spans.clone()
    }

    /// Snapshot of the tic map.
    pub fn tics(&self) -> BTreeMap<TicKey, TimePoint> {
        let rec = self.lock();
        rec.tics
            .iter()
            .enumerate()
            .flat_map(|(ordinal, tics)| {
                tics.iter().map(move |(tag, start)| {
                    (
                        TicKey {
                            tag: tag.clone(),
                            thread_ordinal: ordinal as u32,
                        },
                        *start,
                    )
                })
            })
            .collect()
    }

    /// Aggregated statistics, without folding in pending spans.
    pub fn stats(&self) -> &BTreeMap<String, StatEntry> {
        &self.stats
    }

    pub fn diagnostics(&self) -> DiagnosticsSet {
        DiagnosticsSet {
            missing_tics: self.lock().missing_tics.clone(),
            needless_tocs: self.needless_tocs.clone(),
        }
    }

    /// Drops every tic, span, statistic and diagnostic. The configuration
    /// is kept.
    pub fn reset(&mut self) {
        *self.recording_mut() = Recording::default();
        self.stats.clear();
        self.needless_tocs.clear();
        self.emitted.warnings.clear();
    }
}

impl Drop for Timer {
    fn drop(&mut self) {
        if self.config.autoreturn && !self.emitted.report {
            self.finalize();
        } else if self.config.verbose {
            self.aggregate();
            self.emit_warnings();
        }
    }
}

/// Times the enclosing scope. Created by [`Timer::scoped`].
#[derive(Debug)]
pub struct ScopeGuard<'a> {
    timer: &'a Timer,
    tag: String,
}

impl<'a> ScopeGuard<'a> {
    pub fn new(timer: &'a Timer, tag: impl Into<String>) -> Self {
        let tag = tag.into();
        timer.tic(&tag);
        ScopeGuard { timer, tag }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

impl Drop for ScopeGuard<'_> {
    fn drop(&mut self) {
        self.timer.toc(&self.tag);
    }
}
