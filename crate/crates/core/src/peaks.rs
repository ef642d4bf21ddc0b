//! Constrained peak detection on daily count series and segmentation of the
//! surviving peaks into news events.
//!
//! Candidate maxima follow the usual signal-processing convention: a sample is
//! a peak when it is strictly higher than the nearest *differing* sample on
//! both sides, a flat plateau reports its midpoint (rounded down), and the
//! first and last samples are never peaks. Candidates are then filtered by an
//! inclusive minimum height and thinned by a minimum distance, keeping higher
//! peaks first and, among equal heights, later ones.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::CountSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakParams {
    /// Inclusive: a peak needs `count >= min_height`.
    pub min_height: u32,
    /// Kept peaks are at least this many days apart.
    pub min_distance: u32,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            min_height: 2,
            min_distance: 7,
        }
    }
}

impl PeakParams {
    pub fn new(min_height: u32, min_distance: u32) -> Result<Self> {
        let p = PeakParams {
            min_height,
            min_distance,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_height < 1 {
            return Err(Error::InvalidParam("min_height must be >= 1".into()));
        }
        if self.min_distance < 1 {
            return Err(Error::InvalidParam("min_distance must be >= 1".into()));
        }
        Ok(())
    }
}

/// Indices of all local maxima, including plateau midpoints.
pub fn local_maxima(counts: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    if counts.len() < 3 {
        return out;
    }
    let last = counts.len() - 1;
    let mut i = 1;
    while i < last {
        if counts[i - 1] < counts[i] {
            let mut ahead = i + 1;
            while ahead < last && counts[ahead] == counts[i] {
                ahead += 1;
            }
            if counts[ahead] < counts[i] {
                out.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Apply the height threshold, then the distance rule, to sorted candidates.
pub fn enforce_constraints(candidates: &[usize], counts: &[u32], params: PeakParams) -> Vec<usize> {
    let mut by_priority: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| counts[i] >= params.min_height)
        .collect();
    by_priority.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(b.cmp(&a)));

    let distance = params.min_distance as usize;
    let mut kept: BTreeSet<usize> = BTreeSet::new();
    for idx in by_priority {
        let left_clear = kept
            .range(..=idx)
            .next_back()
            .is_none_or(|&k| idx - k >= distance);
        let right_clear = kept
            .range(idx..)
            .next()
            .is_none_or(|&k| k - idx >= distance);
        if left_clear && right_clear {
            kept.insert(idx);
        }
    }
    kept.into_iter().collect()
}

/// `local_maxima` followed by `enforce_constraints`.
pub fn find_peaks(counts: &[u32], params: PeakParams) -> Vec<usize> {
    enforce_constraints(&local_maxima(counts), counts, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayCount {
    pub date: NaiveDate,
    pub count: u32,
}

/// A contiguous run of active days around one peak.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsEvent {
    pub event_id: String,
    pub hazard: Hazard,
    pub peak_date: NaiveDate,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub days: Vec<DayCount>,
}

impl NewsEvent {
    pub fn id_for(hazard: Hazard, peak_date: NaiveDate) -> String {
        format!("{hazard}-{peak_date}")
    }

    pub fn peak_count(&self) -> u32 {
        self.days
            .iter()
            .find(|d| d.date == self.peak_date)
            .map_or(0, |d| d.count)
    }

    pub fn total_volume(&self) -> u64 {
        self.days.iter().map(|d| d.count as u64).sum()
    }

    pub fn duration_days(&self) -> i64 {
        (self.end_date - self.start_date).num_days() + 1
    }
}

/// Grow each peak over neighbouring days with a non-zero count. When several
/// peaks share one active run, the run is cut between consecutive peaks at the
/// lowest day strictly between them (earliest on ties), and that day goes to
/// the earlier event.
pub fn segment_events(series: &CountSeries, peaks: &[usize]) -> Vec<NewsEvent> {
    let counts = series.counts();
    let mut peaks: Vec<usize> = peaks
        .iter()
        .copied()
        .filter(|&p| p < counts.len() && counts[p] > 0)
        .collect();
    peaks.sort_unstable();
    peaks.dedup();

    let mut events = Vec::with_capacity(peaks.len());
    let mut i = 0;
    while i < peaks.len() {
        let first = peaks[i];
        let mut run_start = first;
        while run_start > 0 && counts[run_start - 1] > 0 {
            run_start -= 1;
        }
        let mut run_end = first;
        while run_end + 1 < counts.len() && counts[run_end + 1] > 0 {
            run_end += 1;
        }
        let mut j = i + 1;
        while j < peaks.len() && peaks[j] <= run_end {
            j += 1;
        }
        let group = &peaks[i..j];

        let mut seg_start = run_start;
        for (w, &peak) in group.iter().enumerate() {
            let seg_end = match group.get(w + 1) {
                Some(&next) => split_point(counts, peak, next),
                None => run_end,
            };
            events.push(make_event(series, peak, seg_start, seg_end));
            seg_start = seg_end + 1;
        }
        i = j;
    }
    events
}

fn split_point(counts: &[u32], left: usize, right: usize) -> usize {
    (left + 1..right)
        .min_by_key(|&k| (counts[k], k))
        .unwrap_or(left)
}

fn make_event(series: &CountSeries, peak: usize, start: usize, end: usize) -> NewsEvent {
    let peak_date = series.date_at(peak);
    NewsEvent {
        event_id: NewsEvent::id_for(series.hazard(), peak_date),
        hazard: series.hazard(),
        peak_date,
        start_date: series.date_at(start),
        end_date: series.date_at(end),
        days: (start..=end)
            .map(|k| DayCount {
                date: series.date_at(k),
                count: series.counts()[k],
            })
            .collect(),
    }
}

/// Peaks and the events segmented from them.
#[derive(Debug, Clone)]
pub struct Detection {
    pub peaks: Vec<usize>,
    pub events: Vec<NewsEvent>,
}

pub fn detect(series: &CountSeries, params: PeakParams) -> Detection {
    let peaks = find_peaks(series.counts(), params);
    let events = segment_events(series, &peaks);
    Detection { peaks, events }
}
