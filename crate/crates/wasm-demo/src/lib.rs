//! Browser bindings for attn-peaks.
//!
//! Every export takes plain numbers and strings and returns a JSON string, so
//! the page needs no bindings beyond `wasm-bindgen`. The `*_json` functions
//! hold the logic and are callable (and tested) natively.

use attn_peaks::align::{align_events, alignment_summary, DisasterRecord, Source};
use attn_peaks::ingest::{build_count_series, CountSeries};
use attn_peaks::measures::{characterize_all, distributions, summarize};
use attn_peaks::peaks::{detect, PeakParams};
use attn_peaks::synth::{self, SynthConfig};
use attn_peaks::Hazard;
use chrono::{Days, NaiveDate};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    attn_peaks::ingest::parse_date(s)
}

#[derive(Serialize)]
struct Synthetic {
    start: NaiveDate,
    counts: Vec<u32>,
    /// Registry onsets derived from the planted bursts.
    onsets: Vec<NaiveDate>,
}

/// A bursty daily count series from the synthetic corpus generator, plus a
/// matching set of registry onset dates.
pub fn synthetic_json(seed: u64, n_days: u32, n_docs: u32, n_bursts: u32) -> Result<String, String> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let end = start + Days::new(n_days.max(1) as u64 - 1);
    let cfg = SynthConfig {
        seed,
        start,
        end,
        n_docs: n_docs as usize,
        hazards: vec![Hazard::Landslide],
        bursts_per_hazard: n_bursts as usize,
        n_outlets: 20,
        n_templates: 30,
        ..SynthConfig::default()
    };
    let corpus = synth::corpus(&cfg).map_err(|e| e.to_string())?;
    let series = build_count_series(&corpus.docs, Hazard::Landslide, start, end).map_err(|e| e.to_string())?;
    let mut onsets: Vec<NaiveDate> = synth::registry(&corpus, Source::Emdat, seed ^ 0x5eed, 0.6, 6, 2, (start, end))
        .into_iter()
        .map(|r| r.onset_date)
        .collect();
    onsets.sort();
    serde_json::to_string(&Synthetic {
        start,
        counts: series.counts().to_vec(),
        onsets,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EventView {
    id: String,
    start: usize,
    peak: usize,
    end: usize,
    start_date: NaiveDate,
    peak_date: NaiveDate,
    end_date: NaiveDate,
    n_at_peak: u32,
    total_volume: u64,
    duration_days: i64,
    days_to_peak: i64,
    days_to_fade: i64,
    days_since_last: Option<i64>,
}

#[derive(Serialize)]
struct DetectView {
    peaks: Vec<usize>,
    events: Vec<EventView>,
    distributions: attn_peaks::measures::HazardDistributions,
}

fn series_from(counts: &[u32], start: &str) -> Result<CountSeries, String> {
    CountSeries::from_counts(Hazard::Landslide, parse_date(start)?, counts.to_vec()).map_err(|e| e.to_string())
}

/// Synthetic one-document-per-count corpus so the series can be
/// characterized without real articles.
fn stand_in_docs(series: &CountSeries) -> Vec<attn_peaks::ingest::Document> {
    let mut docs = Vec::new();
    for (i, &c) in series.counts().iter().enumerate() {
        for k in 0..c {
            docs.push(attn_peaks::ingest::Document {
                id: format!("{i}-{k}"),
                date: series.date_at(i),
                outlet: format!("outlet {}", k % 5),
                text_type: "Meldung".into(),
                hazard: series.hazard(),
                text: String::new(),
                text_key: format!("{}", k % 3),
            });
        }
    }
    docs
}

/// Peaks, events and event measures of a daily count series.
pub fn detect_json(counts: &[u32], start: &str, min_height: u32, min_distance: u32) -> Result<String, String> {
    let series = series_from(counts, start)?;
    let params = PeakParams::new(min_height, min_distance).map_err(|e| e.to_string())?;
    let detection = detect(&series, params);
    let docs = stand_in_docs(&series);
    let measures = characterize_all(&detection.events, &docs, series.hazard()).map_err(|e| e.to_string())?;
    let index = |d: NaiveDate| series.index_of(d).unwrap_or(0);
    let events = detection
        .events
        .iter()
        .zip(&measures)
        .map(|(e, m)| EventView {
            id: e.event_id.clone(),
            start: index(e.start_date),
            peak: index(e.peak_date),
            end: index(e.end_date),
            start_date: e.start_date,
            peak_date: e.peak_date,
            end_date: e.end_date,
            n_at_peak: m.n_at_peak,
            total_volume: m.total_volume,
            duration_days: m.duration_days,
            days_to_peak: m.days_to_peak,
            days_to_fade: m.days_to_fade,
            days_since_last: m.days_since_last,
        })
        .collect();
    serde_json::to_string(&DetectView {
        peaks: detection.peaks,
        events,
        distributions: distributions(&measures),
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PairView {
    event_id: String,
    record: usize,
    onset_date: NaiveDate,
    lag_days: i64,
}

#[derive(Serialize)]
struct AlignView {
    pairs: Vec<PairView>,
    unmatched_events: Vec<String>,
    unmatched_records: Vec<usize>,
    aligned_fraction: Option<f64>,
}

/// Align the events of a count series with registry onsets given as a
/// comma- or whitespace-separated list of dates.
pub fn align_json(
    counts: &[u32],
    start: &str,
    min_height: u32,
    min_distance: u32,
    onsets: &str,
    window_days: i32,
) -> Result<String, String> {
    let series = series_from(counts, start)?;
    let params = PeakParams::new(min_height, min_distance).map_err(|e| e.to_string())?;
    let events = detect(&series, params).events;
    let records = onsets
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            Ok(DisasterRecord {
                record_id: format!("{i:05}"),
                source: Source::Other,
                hazard: series.hazard(),
                onset_date: parse_date(s)?,
                location: String::new(),
                raw_type: String::new(),
                status: String::new(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let report = align_events(&events, &records, window_days as i64).map_err(|e| e.to_string())?;
    let summary = alignment_summary(&report, events.len());
    let record_index = |id: &str| id.parse::<usize>().unwrap_or(usize::MAX);
    serde_json::to_string(&AlignView {
        pairs: report
            .pairs
            .iter()
            .map(|p| PairView {
                event_id: p.event_id.clone(),
                record: record_index(&p.record_id),
                onset_date: p.onset_date,
                lag_days: p.lag_days,
            })
            .collect(),
        unmatched_events: report.unmatched_events,
        unmatched_records: report.unmatched_records.iter().map(|r| record_index(&r.record_id)).collect(),
        aligned_fraction: summary.aligned_fraction,
    })
    .map_err(|e| e.to_string())
}

/// Box-plot statistics of a list of numbers.
pub fn summarize_json(values: &[f64]) -> Result<String, String> {
    let stats = summarize(values).map_err(|e| e.to_string())?;
    serde_json::to_string(&stats).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn synthetic(seed: u32, n_days: u32, n_docs: u32, n_bursts: u32) -> Result<String, JsError> {
    synthetic_json(seed as u64, n_days, n_docs, n_bursts).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn detect_events(counts: &[u32], start: &str, min_height: u32, min_distance: u32) -> Result<String, JsError> {
    detect_json(counts, start, min_height, min_distance).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn align(
    counts: &[u32],
    start: &str,
    min_height: u32,
    min_distance: u32,
    onsets: &str,
    window_days: i32,
) -> Result<String, JsError> {
    align_json(counts, start, min_height, min_distance, onsets, window_days).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn box_stats(values: &[f64]) -> Result<String, JsError> {
    summarize_json(values).map_err(|e| JsError::new(&e))
}
