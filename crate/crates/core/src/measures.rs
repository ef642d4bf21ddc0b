//! Per-event attention measures and their box-plot summaries.

use std::collections::{BTreeMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::Document;
use crate::peaks::NewsEvent;

/// Measures of one news event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub hazard: Hazard,
    pub event_id: String,
    pub peak_date: NaiveDate,
    pub n_at_peak: u32,
    pub total_volume: u64,
    pub duration_days: i64,
    /// Days from the previous event's last day to this event's first day.
    pub days_since_last: Option<i64>,
    pub days_to_peak: i64,
    pub days_to_fade: i64,
    /// Distinct text keys among the event's documents.
    pub n_text_types: usize,
    pub n_outlets: usize,
    /// Distinct `text_type` labels among the event's documents.
    pub n_genres: usize,
    /// Days between this event's peak and the previous event's peak.
    pub days_since_last_peak: Option<i64>,
}

/// Column order of the measures CSV.
pub const CSV_HEADER: [&str; 13] = [
    "hazard",
    "event_id",
    "peak_date",
    "n_at_peak",
    "total_volume",
    "duration_days",
    "days_since_last",
    "days_to_peak",
    "days_to_fade",
    "n_text_types",
    "n_outlets",
    "n_genres",
    "days_since_last_peak",
];

/// Names of the per-event measures summarized as distributions.
pub const MEASURE_NAMES: [&str; 10] = [
    "n_at_peak",
    "total_volume",
    "duration_days",
    "days_since_last",
    "days_to_peak",
    "days_to_fade",
    "n_text_types",
    "n_outlets",
    "n_genres",
    "days_since_last_peak",
];

impl MeasureSet {
    /// Value of a named measure; `None` for an absent gap.
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "n_at_peak" => Some(self.n_at_peak as f64),
            "total_volume" => Some(self.total_volume as f64),
            "duration_days" => Some(self.duration_days as f64),
            "days_since_last" => self.days_since_last.map(|v| v as f64),
            "days_to_peak" => Some(self.days_to_peak as f64),
            "days_to_fade" => Some(self.days_to_fade as f64),
            "n_text_types" => Some(self.n_text_types as f64),
            "n_outlets" => Some(self.n_outlets as f64),
            "n_genres" => Some(self.n_genres as f64),
            "days_since_last_peak" => self.days_since_last_peak.map(|v| v as f64),
            _ => None,
        }
    }
}

/// Documents of one hazard grouped by publication day.
pub struct DayIndex<'a> {
    hazard: Hazard,
    by_date: BTreeMap<NaiveDate, Vec<&'a Document>>,
}

impl<'a> DayIndex<'a> {
    pub fn new(docs: &'a [Document], hazard: Hazard) -> Self {
        let mut by_date: BTreeMap<NaiveDate, Vec<&Document>> = BTreeMap::new();
        for d in docs.iter().filter(|d| d.hazard == hazard) {
            by_date.entry(d.date).or_default().push(d);
        }
        DayIndex { hazard, by_date }
    }

    pub fn on(&self, date: NaiveDate) -> &[&'a Document] {
        self.by_date.get(&date).map_or(&[], Vec::as_slice)
    }
}

/// Measures of a single event. Gap columns are left empty; see [`gaps`].
pub fn characterize(event: &NewsEvent, index: &DayIndex<'_>) -> Result<MeasureSet> {
    if event.hazard != index.hazard {
        return Err(Error::Inconsistency(format!(
            "event {} is {} but documents are {}",
            event.event_id, event.hazard, index.hazard
        )));
    }
    let mut outlets = HashSet::new();
    let mut keys = HashSet::new();
    let mut genres = HashSet::new();
    for day in &event.days {
        let docs = index.on(day.date);
        if docs.is_empty() || docs.len() != day.count as usize {
            return Err(Error::Inconsistency(format!(
                "event {} day {} has count {} but {} documents",
                event.event_id,
                day.date,
                day.count,
                docs.len()
            )));
        }
        for d in docs {
            outlets.insert(d.outlet.as_str());
            keys.insert(d.text_key.as_str());
            genres.insert(d.text_type.as_str());
        }
    }
    Ok(MeasureSet {
        hazard: event.hazard,
        event_id: event.event_id.clone(),
        peak_date: event.peak_date,
        n_at_peak: event.peak_count(),
        total_volume: event.total_volume(),
        duration_days: event.duration_days(),
        days_since_last: None,
        days_to_peak: (event.peak_date - event.start_date).num_days(),
        days_to_fade: (event.end_date - event.peak_date).num_days(),
        n_text_types: keys.len(),
        n_outlets: outlets.len(),
        n_genres: genres.len(),
        days_since_last_peak: None,
    })
}

/// Days from the end of the previous event to the start of each event. The
/// first event has no predecessor.
pub fn gaps(events: &[NewsEvent]) -> Result<Vec<Option<i64>>> {
    let mut out = Vec::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        if i == 0 {
            out.push(None);
            continue;
        }
        let prev = &events[i - 1];
        if prev.hazard != e.hazard {
            return Err(Error::InvalidParam(format!(
                "events {} and {} have different hazards",
                prev.event_id, e.event_id
            )));
        }
        if e.start_date <= prev.end_date {
            return Err(Error::InvalidParam(format!(
                "events {} and {} overlap or are out of order",
                prev.event_id, e.event_id
            )));
        }
        out.push(Some((e.start_date - prev.end_date).num_days()));
    }
    Ok(out)
}

/// Peak-to-peak distance to the previous event.
pub fn peak_gaps(events: &[NewsEvent]) -> Vec<Option<i64>> {
    let mut out = vec![None; events.len().min(1)];
    out.extend(
        events
            .windows(2)
            .map(|w| Some((w[1].peak_date - w[0].peak_date).num_days())),
    );
    out
}

/// Measures for every event of one hazard, with gap columns filled in.
pub fn characterize_all(events: &[NewsEvent], docs: &[Document], hazard: Hazard) -> Result<Vec<MeasureSet>> {
    let index = DayIndex::new(docs, hazard);
    let since_last = gaps(events)?;
    let since_peak = peak_gaps(events);
    events
        .iter()
        .zip(since_last.into_iter().zip(since_peak))
        .map(|(e, (gap, peak_gap))| {
            let mut m = characterize(e, &index)?;
            m.days_since_last = gap;
            m.days_since_last_peak = peak_gap;
            Ok(m)
        })
        .collect()
}

/// Five-number box-plot summary with Tukey fences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Quantile of sorted data by linear interpolation between order statistics,
/// `h = (n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cannot summarize an empty sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("sample contains a non-finite value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence);
    // whiskers never retract inside the box
    let whisker_low = inside().next().map_or(q1, |v| v.min(q1));
    let whisker_high = inside().next_back().map_or(q3, |v| v.max(q3));
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Ok(BoxStats {
        n: sorted.len(),
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Distribution of one hazard's measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardDistributions {
    pub n_events: usize,
    /// `None` when no event has a value for the measure.
    pub measures: BTreeMap<String, Option<BoxStats>>,
}

pub fn distributions(measures: &[MeasureSet]) -> HazardDistributions {
    let summaries = MEASURE_NAMES
        .iter()
        .map(|&name| {
            let values: Vec<f64> = measures.iter().filter_map(|m| m.value(name)).collect();
            (name.to_string(), summarize(&values).ok())
        })
        .collect();
    HazardDistributions {
        n_events: measures.len(),
        measures: summaries,
    }
}

fn opt_field(v: Option<i64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(measures: &[MeasureSet], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for m in measures {
        w.write_record([
            m.hazard.to_string(),
            m.event_id.clone(),
            m.peak_date.to_string(),
            m.n_at_peak.to_string(),
            m.total_volume.to_string(),
            m.duration_days.to_string(),
            opt_field(m.days_since_last),
            m.days_to_peak.to_string(),
            m.days_to_fade.to_string(),
            m.n_text_types.to_string(),
            m.n_outlets.to_string(),
            m.n_genres.to_string(),
            opt_field(m.days_since_last_peak),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct MeasureRow {
    hazard: Hazard,
    event_id: String,
    peak_date: NaiveDate,
    n_at_peak: u32,
    total_volume: u64,
    duration_days: i64,
    days_since_last: Option<i64>,
    days_to_peak: i64,
    days_to_fade: i64,
    n_text_types: usize,
    n_outlets: usize,
    n_genres: usize,
    days_since_last_peak: Option<i64>,
}

pub fn read_csv<R: std::io::Read>(reader: R, origin: &str) -> Result<Vec<MeasureSet>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<MeasureRow>()
        .enumerate()
        .map(|(i, row)| {
            let r = row.map_err(|e| Error::row(origin, i + 1, "record", e.to_string()))?;
            Ok(MeasureSet {
                hazard: r.hazard,
                event_id: r.event_id,
                peak_date: r.peak_date,
                n_at_peak: r.n_at_peak,
                total_volume: r.total_volume,
                duration_days: r.duration_days,
                days_since_last: r.days_since_last,
                days_to_peak: r.days_to_peak,
                days_to_fade: r.days_to_fade,
                n_text_types: r.n_text_types,
                n_outlets: r.n_outlets,
                n_genres: r.n_genres,
                days_since_last_peak: r.days_since_last_peak,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::text_digest;
    use crate::peaks::DayCount;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn event(days: &[(NaiveDate, u32)], peak: NaiveDate) -> NewsEvent {
        NewsEvent {
            event_id: NewsEvent::id_for(Hazard::Fire, peak),
            hazard: Hazard::Fire,
            peak_date: peak,
            start_date: days[0].0,
            end_date: days[days.len() - 1].0,
            days: days.iter().map(|&(date, count)| DayCount { date, count }).collect(),
        }
    }

    fn docs_for(days: &[(NaiveDate, u32)]) -> Vec<Document> {
        let mut docs = Vec::new();
        for &(date, count) in days {
            for k in 0..count {
                let text = format!("{date} {k}");
                docs.push(Document {
                    id: format!("{date}-{k}"),
                    date,
                    outlet: format!("outlet{k}"),
                    text_type: "Bericht".into(),
                    hazard: Hazard::Fire,
                    text_key: text_digest(&text),
                    text,
                });
            }
        }
        docs
    }

    #[test]
    fn three_day_event_measures() {
        let d = ymd(2021, 5, 1);
        let days = [(d, 1), (ymd(2021, 5, 2), 3), (ymd(2021, 5, 3), 1)];
        let e = event(&days, ymd(2021, 5, 2));
        let docs = docs_for(&days);
        let m = characterize(&e, &DayIndex::new(&docs, Hazard::Fire)).unwrap();
        assert_eq!(m.n_at_peak, 3);
        assert_eq!(m.total_volume, 5);
        assert_eq!(m.duration_days, 3);
        assert_eq!(m.days_to_peak, 1);
        assert_eq!(m.days_to_fade, 1);
        assert_eq!(m.n_outlets, 3);
        assert_eq!(m.n_text_types, 5);
    }

    #[test]
    fn single_day_event_measures() {
        let days = [(ymd(2021, 5, 1), 2)];
        let e = event(&days, days[0].0);
        let docs = docs_for(&days);
        let m = characterize(&e, &DayIndex::new(&docs, Hazard::Fire)).unwrap();
        assert_eq!((m.duration_days, m.days_to_peak, m.days_to_fade, m.total_volume), (1, 0, 0, 2));
    }

    #[test]
    fn shared_text_two_outlets() {
        let days = [(ymd(2021, 5, 1), 2)];
        let e = event(&days, days[0].0);
        let mut docs = docs_for(&days);
        docs[1].text_key = docs[0].text_key.clone();
        let m = characterize(&e, &DayIndex::new(&docs, Hazard::Fire)).unwrap();
        assert_eq!((m.n_text_types, m.n_outlets, m.total_volume), (1, 2, 2));
    }

    #[test]
    fn event_day_without_documents_is_inconsistent() {
        let days = [(ymd(2021, 5, 1), 2)];
        let e = event(&days, days[0].0);
        let err = characterize(&e, &DayIndex::new(&[], Hazard::Fire)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn gap_examples() {
        let a = event(&[(ymd(2021, 1, 9), 2), (ymd(2021, 1, 10), 1)], ymd(2021, 1, 9));
        let b = event(&[(ymd(2021, 1, 17), 2)], ymd(2021, 1, 17));
        let c = event(&[(ymd(2021, 1, 11), 2)], ymd(2021, 1, 11));
        assert_eq!(gaps(std::slice::from_ref(&a)).unwrap(), [None]);
        assert_eq!(gaps(&[a.clone(), b.clone()]).unwrap(), [None, Some(7)]);
        assert_eq!(gaps(&[a.clone(), c.clone()]).unwrap(), [None, Some(1)]);
        assert_eq!(peak_gaps(&[a.clone(), b.clone()]), [None, Some(8)]);
        assert!(peak_gaps(&[]).is_empty());
        assert!(gaps(&[b, a]).is_err());
    }

    #[test]
    fn overlapping_events_are_rejected() {
        let a = event(&[(ymd(2021, 1, 9), 2), (ymd(2021, 1, 10), 1)], ymd(2021, 1, 9));
        let b = event(&[(ymd(2021, 1, 10), 2)], ymd(2021, 1, 10));
        assert!(gaps(&[a, b]).is_err());
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[5.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (5.0, 5.0, 5.0));
        assert!(s.outliers.is_empty());

        let s = summarize(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        // q1 = 2, q3 = 4, upper fence = 7
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!(s.outliers, [100.0]);
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 4.0));

        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!((s.q1, s.q3), (1.75, 3.25));
    }

    #[test]
    fn whiskers_clip_to_box() {
        // q1 = 75 and the only lower point is an outlier
        let s = summarize(&[0.0, 100.0, 100.0, 100.0]).unwrap();
        assert_eq!(s.q1, 75.0);
        assert_eq!(s.outliers, [0.0]);
        assert_eq!(s.whisker_low, 75.0);
    }

    #[test]
    fn summarize_rejects_empty() {
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[f64::NAN]).is_err());
    }

    #[test]
    fn distributions_skip_missing_gaps() {
        let days = [(ymd(2021, 5, 1), 2)];
        let e = event(&days, days[0].0);
        let docs = docs_for(&days);
        let ms = characterize_all(&[e], &docs, Hazard::Fire).unwrap();
        let d = distributions(&ms);
        assert_eq!(d.n_events, 1);
        assert!(d.measures["days_since_last"].is_none());
        assert_eq!(d.measures["n_at_peak"].as_ref().unwrap().median, 2.0);
        assert_eq!(d.measures.len(), MEASURE_NAMES.len());
    }

    #[test]
    fn csv_round_trip() {
        let d0 = ymd(2021, 5, 1);
        let d1 = ymd(2021, 5, 20);
        let days = [(d0, 2), (d1, 3)];
        let events = [event(&days[..1], d0), event(&days[1..], d1)];
        let docs = docs_for(&days);
        let ms = characterize_all(&events, &docs, Hazard::Fire).unwrap();
        let mut buf = Vec::new();
        write_csv(&ms, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("hazard,event_id,peak_date,n_at_peak,total_volume,duration_days,days_since_last,days_to_peak,days_to_fade,n_text_types,n_outlets"));
        assert_eq!(read_csv(buf.as_slice(), "t").unwrap(), ms);
    }
}
