//! Folding raw spans into per-tag running statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clock::TimePoint;
use crate::timer::Timer;

/// Running statistics for one tag, all in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatEntry {
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub sst: f64,
    pub min: f64,
    pub max: f64,
    pub count: u64,
}

impl StatEntry {
    /// Starting state before the first observation.
    const INITIAL: StatEntry = StatEntry {
        mean: 0.0,
        sst: 0.0,
        min: f64::MAX,
        max: 0.0,
        count: 0,
    };

    /// Sample variance (Bessel-corrected); zero for a single observation.
    pub fn variance(&self) -> f64 {
        self.sst / (self.count.saturating_sub(1).max(1)) as f64
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Adds one non-negative duration to `entry` with Welford's update.
pub fn welford_update(entry: Option<StatEntry>, duration: f64) -> StatEntry {
    debug_assert!(duration >= 0.0, "negative durations are filtered upstream");
    let StatEntry {
        mut mean,
        mut sst,
        min,
        max,
        count,
    } = entry.unwrap_or(StatEntry::INITIAL);
    let count = count + 1;
    let delta = duration - mean;
    mean += delta / count as f64;
    sst += delta * (duration - mean);
    StatEntry {
        mean,
        sst,
        min: min.min(duration),
        max: max.max(duration),
        count,
    }
}

/// Tags involved in timer misuse. Each tag appears at most once per set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagnosticsSet {
    /// toc without a preceding tic on the same thread.
    pub missing_tics: BTreeSet<String>,
    /// toc on a timer that was already stopped.
    pub needless_tocs: BTreeSet<String>,
}

impl DiagnosticsSet {
    pub fn is_empty(&self) -> bool {
        self.missing_tics.is_empty() && self.needless_tocs.is_empty()
    }
}

impl Timer {
    /// Folds pending spans into the statistics and empties the span buffer.
    ///
    /// Negative spans are skipped and their tags recorded as needless tocs.
    /// With nothing pending this returns the same map as the previous call.
    pub fn aggregate(&mut self) -> &BTreeMap<String, StatEntry> {
        let spans = std::mem::take(&mut self.recording_mut().spans);
        for span in spans {
            if span.duration_ns < 0 {
                self.needless_tocs.insert(span.tag);
                continue;
            }
            let duration = span.duration_ns as f64;
            match self.stats.get_mut(&span.tag) {
                Some(entry) => *entry = welford_update(Some(*entry), duration),
                None => {
                    self.stats.insert(span.tag, welford_update(None, duration));
                }
            }
        }
        &self.stats
    }

    /// Tags with a tic (on any thread) that no toc has closed.
    pub fn unmatched_tics(&self) -> BTreeSet<String> {
        let rec = self.lock();
        rec.tics
            .iter()
            .flat_map(|tics| tics.iter())
            .filter(|(_, start)| **start != TimePoint::SENTINEL)
            .map(|(tag, _)| tag.clone())
            .collect()
    }
}
