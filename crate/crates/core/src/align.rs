//! Disaster-registry loading and temporal alignment of news events with
//! registry entries.
//!
//! An event and a record align when they share a hazard and the record's onset
//! date lies on, or at most `window_days` before, the event's first day. One
//! event may align with several records and one record with several events.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::{canonicalize, parse_date};
use crate::peaks::NewsEvent;

const DEFAULT_REGISTRY_TYPES: &str = include_str!("../data/registry_types.toml");

pub const DEFAULT_WINDOW_DAYS: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "EMDAT")]
    Emdat,
    #[serde(rename = "S2ID")]
    S2id,
    #[serde(rename = "other")]
    Other,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Emdat => "EMDAT",
            Source::S2id => "S2ID",
            Source::Other => "other",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "emdat" => Ok(Source::Emdat),
            "s2id" => Ok(Source::S2id),
            "other" => Ok(Source::Other),
            _ => Err(Error::InvalidParam(format!(
                "unknown registry source {s:?} (expected EMDAT, S2ID or other)"
            ))),
        }
    }
}

/// Target of a raw registry type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TypeMapping {
    Hazard(Hazard),
    Ignore,
}

impl TryFrom<String> for TypeMapping {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("ignore") {
            Ok(TypeMapping::Ignore)
        } else {
            s.parse().map(TypeMapping::Hazard)
        }
    }
}

impl From<TypeMapping> for String {
    fn from(m: TypeMapping) -> String {
        match m {
            TypeMapping::Hazard(h) => h.to_string(),
            TypeMapping::Ignore => "ignore".to_string(),
        }
    }
}

/// Registry type map and per-source status accept lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryConfig {
    #[serde(default)]
    pub type_map: BTreeMap<String, TypeMapping>,
    #[serde(default)]
    pub status_accept: BTreeMap<Source, Vec<String>>,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_REGISTRY_TYPES).expect("bundled registry_types.toml is valid")
    }
}

impl RegistryConfig {
    pub fn empty() -> Self {
        RegistryConfig {
            type_map: BTreeMap::new(),
            status_accept: BTreeMap::new(),
        }
    }

    /// Overlay `other` on top of `self`: its type entries win and its accept
    /// lists replace ours source by source.
    pub fn merged(mut self, other: RegistryConfig) -> Self {
        let lookup: HashMap<String, String> = self
            .type_map
            .keys()
            .map(|k| (canonicalize(k), k.clone()))
            .collect();
        for (k, v) in other.type_map {
            if let Some(existing) = lookup.get(&canonicalize(&k)) {
                self.type_map.remove(existing);
            }
            self.type_map.insert(k, v);
        }
        self.status_accept.extend(other.status_accept);
        self
    }

    fn lookup(&self) -> HashMap<String, TypeMapping> {
        self.type_map
            .iter()
            .map(|(k, v)| (canonicalize(k.trim()), *v))
            .collect()
    }

    fn accepted_statuses(&self, source: Source) -> Option<HashSet<String>> {
        self.status_accept
            .get(&source)
            .map(|list| list.iter().map(|s| canonicalize(s.trim())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisasterRecord {
    pub record_id: String,
    pub source: Source,
    pub hazard: Hazard,
    pub onset_date: NaiveDate,
    pub location: String,
    pub raw_type: String,
    pub status: String,
}

/// Records kept from one registry file plus tallies of dropped rows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RegistryLoad {
    pub records: Vec<DisasterRecord>,
    /// Rows whose type maps to `ignore`.
    pub ignored: usize,
    /// Rows whose status is not in the source's accept list.
    pub rejected_status: usize,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    record_id: String,
    source: String,
    raw_type: String,
    onset_date: String,
    #[serde(default)]
    location: String,
    #[serde(default)]
    status: String,
}

pub fn load_registry(path: &Path, source: Source, config: &RegistryConfig) -> Result<RegistryLoad> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_registry(file, &path.display().to_string(), source, config)
}

/// Parse a registry CSV with header
/// `record_id,source,raw_type,onset_date,location,status`.
pub fn read_registry<R: Read>(
    reader: R,
    origin: &str,
    source: Source,
    config: &RegistryConfig,
) -> Result<RegistryLoad> {
    let types = config.lookup();
    let accept = config.accepted_statuses(source);
    let mut out = RegistryLoad::default();
    let mut ids = HashSet::new();
    let mut rdr = csv::Reader::from_reader(reader);
    for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
        let row_no = i + 1;
        let raw = row.map_err(|e| Error::row(origin, row_no, "record", e.to_string()))?;
        let row_source: Source = raw
            .source
            .parse()
            .map_err(|e: Error| Error::row(origin, row_no, "source", e.to_string()))?;
        if row_source != source {
            return Err(Error::row(
                origin,
                row_no,
                "source",
                format!("expected {source}, found {row_source}"),
            ));
        }
        let record_id = raw.record_id.trim().to_string();
        if record_id.is_empty() {
            return Err(Error::row(origin, row_no, "record_id", "empty record id"));
        }
        if !ids.insert(record_id.clone()) {
            return Err(Error::DuplicateId {
                origin: origin.to_string(),
                id: record_id,
                row: row_no,
            });
        }
        let onset_date =
            parse_date(&raw.onset_date).map_err(|m| Error::row(origin, row_no, "onset_date", m))?;
        let raw_type = raw.raw_type.trim().to_string();
        let mapping = types
            .get(&canonicalize(&raw_type))
            .copied()
            .ok_or_else(|| Error::UnmappedType {
                origin: origin.to_string(),
                label: raw_type.clone(),
                row: row_no,
            })?;
        let hazard = match mapping {
            TypeMapping::Ignore => {
                out.ignored += 1;
                continue;
            }
            TypeMapping::Hazard(h) => h,
        };
        let status = raw.status.trim().to_string();
        if let Some(accept) = &accept {
            if !accept.contains(&canonicalize(&status)) {
                out.rejected_status += 1;
                continue;
            }
        }
        out.records.push(DisasterRecord {
            record_id,
            source,
            hazard,
            onset_date,
            location: raw.location.trim().to_string(),
            raw_type,
            status,
        });
    }
    Ok(out)
}

pub const REGISTRY_CSV_HEADER: [&str; 7] = [
    "record_id",
    "source",
    "hazard",
    "raw_type",
    "onset_date",
    "location",
    "status",
];

/// Normalized dump of kept records, one row per record.
pub fn write_records_csv<W: std::io::Write>(records: &[DisasterRecord], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REGISTRY_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.record_id.as_str(),
            r.source.as_str(),
            r.hazard.as_str(),
            r.raw_type.as_str(),
            &r.onset_date.to_string(),
            r.location.as_str(),
            r.status.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R, origin: &str) -> Result<Vec<DisasterRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<DisasterRecord>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::row(origin, i + 1, "record", e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlignedPair {
    pub event_id: String,
    pub source: Source,
    pub record_id: String,
    pub hazard: Hazard,
    pub event_start: NaiveDate,
    pub onset_date: NaiveDate,
    /// `event_start - onset_date` in days.
    pub lag_days: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordRef {
    pub source: Source,
    pub record_id: String,
    pub hazard: Hazard,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub window_days: i64,
    /// Sorted by event id, then source, then record id.
    pub pairs: Vec<AlignedPair>,
    /// Events with at least one pair, per source and hazard.
    pub aligned_events: BTreeMap<Source, BTreeMap<Hazard, usize>>,
    pub unmatched_events: Vec<String>,
    pub unmatched_records: Vec<RecordRef>,
}

impl From<&DisasterRecord> for RecordRef {
    fn from(r: &DisasterRecord) -> Self {
        RecordRef {
            source: r.source,
            record_id: r.record_id.clone(),
            hazard: r.hazard,
        }
    }
}

impl AlignmentReport {
    /// Derive tallies and unmatched lists from a complete set of pairs over
    /// the given events and records.
    pub fn from_pairs(
        window_days: i64,
        mut pairs: Vec<AlignedPair>,
        event_ids: &[&str],
        records: &[RecordRef],
    ) -> Self {
        pairs.sort();
        let mut per_source: BTreeMap<Source, BTreeMap<Hazard, BTreeSet<&str>>> = BTreeMap::new();
        let mut matched_events: HashSet<&str> = HashSet::new();
        let mut matched_records: HashSet<(Source, &str)> = HashSet::new();
        for p in &pairs {
            per_source
                .entry(p.source)
                .or_default()
                .entry(p.hazard)
                .or_default()
                .insert(&p.event_id);
            matched_events.insert(&p.event_id);
            matched_records.insert((p.source, &p.record_id));
        }
        let aligned_events = per_source
            .into_iter()
            .map(|(s, hs)| (s, hs.into_iter().map(|(h, ids)| (h, ids.len())).collect()))
            .collect();
        let mut unmatched_events: Vec<String> = event_ids
            .iter()
            .filter(|id| !matched_events.contains(*id))
            .map(|id| id.to_string())
            .collect();
        unmatched_events.sort();
        let mut unmatched_records: Vec<RecordRef> = records
            .iter()
            .filter(|r| !matched_records.contains(&(r.source, r.record_id.as_str())))
            .cloned()
            .collect();
        unmatched_records.sort();
        AlignmentReport {
            window_days,
            pairs,
            aligned_events,
            unmatched_events,
            unmatched_records,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.unmatched_events.is_empty() && self.unmatched_records.is_empty()
    }

    /// Combine reports over disjoint events and records (e.g. one per hazard).
    pub fn merge(mut self, other: AlignmentReport) -> Result<Self> {
        if !self.is_empty() && !other.is_empty() && self.window_days != other.window_days {
            return Err(Error::InvalidParam(format!(
                "cannot merge alignments with windows {} and {}",
                self.window_days, other.window_days
            )));
        }
        if self.is_empty() {
            self.window_days = other.window_days;
        }
        self.pairs.extend(other.pairs);
        self.pairs.sort();
        for (source, by_hazard) in other.aligned_events {
            let mine = self.aligned_events.entry(source).or_default();
            for (h, n) in by_hazard {
                *mine.entry(h).or_default() += n;
            }
        }
        self.unmatched_events.extend(other.unmatched_events);
        self.unmatched_events.sort();
        self.unmatched_records.extend(other.unmatched_records);
        self.unmatched_records.sort();
        Ok(self)
    }
}

/// All (event, record) pairs with a shared hazard and
/// `0 <= event.start_date - record.onset_date <= window_days`.
pub fn align_events(
    events: &[NewsEvent],
    records: &[DisasterRecord],
    window_days: i64,
) -> Result<AlignmentReport> {
    if window_days < 0 {
        return Err(Error::InvalidParam(format!(
            "window_days must be >= 0, got {window_days}"
        )));
    }
    let mut sorted: Vec<&DisasterRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.hazard, r.onset_date));

    let mut pairs = Vec::new();
    for e in events {
        let earliest = e.start_date - chrono::Duration::days(window_days);
        let lo = sorted.partition_point(|r| (r.hazard, r.onset_date) < (e.hazard, earliest));
        for r in sorted[lo..]
            .iter()
            .take_while(|r| r.hazard == e.hazard && r.onset_date <= e.start_date)
        {
            pairs.push(AlignedPair {
                event_id: e.event_id.clone(),
                source: r.source,
                record_id: r.record_id.clone(),
                hazard: e.hazard,
                event_start: e.start_date,
                onset_date: r.onset_date,
                lag_days: (e.start_date - r.onset_date).num_days(),
            });
        }
    }
    let event_ids: Vec<&str> = events.iter().map(|e| e.event_id.as_str()).collect();
    let refs: Vec<RecordRef> = records.iter().map(RecordRef::from).collect();
    Ok(AlignmentReport::from_pairs(window_days, pairs, &event_ids, &refs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub window_days: i64,
    pub n_events: usize,
    pub n_pairs: usize,
    /// Events with at least one pair, per source and hazard.
    pub aligned_events: BTreeMap<Source, BTreeMap<Hazard, usize>>,
    /// Fraction of all events aligned to each source.
    pub aligned_fraction_by_source: BTreeMap<Source, Option<f64>>,
    /// Events aligned to at least one source.
    pub n_aligned_any: usize,
    pub aligned_fraction: Option<f64>,
    pub unmatched_records: BTreeMap<Source, BTreeMap<Hazard, usize>>,
}

pub fn alignment_summary(report: &AlignmentReport, n_events_total: usize) -> AlignmentSummary {
    let fraction = |n: usize| (n_events_total > 0).then(|| n as f64 / n_events_total as f64);
    let n_aligned_any = report
        .pairs
        .iter()
        .map(|p| p.event_id.as_str())
        .collect::<HashSet<_>>()
        .len();
    let aligned_fraction_by_source = report
        .aligned_events
        .iter()
        .map(|(s, hs)| (*s, fraction(hs.values().sum())))
        .collect();
    let mut unmatched_records: BTreeMap<Source, BTreeMap<Hazard, usize>> = BTreeMap::new();
    for r in &report.unmatched_records {
        *unmatched_records.entry(r.source).or_default().entry(r.hazard).or_default() += 1;
    }
    AlignmentSummary {
        window_days: report.window_days,
        n_events: n_events_total,
        n_pairs: report.pairs.len(),
        aligned_events: report.aligned_events.clone(),
        aligned_fraction_by_source,
        n_aligned_any,
        aligned_fraction: fraction(n_aligned_any),
        unmatched_records,
    }
}

pub const PAIRS_CSV_HEADER: [&str; 7] = [
    "event_id",
    "source",
    "record_id",
    "hazard",
    "event_start",
    "onset_date",
    "lag_days",
];

pub fn write_pairs_csv<W: std::io::Write>(pairs: &[AlignedPair], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PAIRS_CSV_HEADER)?;
    for p in pairs {
        w.write_record([
            p.event_id.as_str(),
            p.source.as_str(),
            p.record_id.as_str(),
            p.hazard.as_str(),
            &p.event_start.to_string(),
            &p.onset_date.to_string(),
            &p.lag_days.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs_csv<R: Read>(reader: R, origin: &str) -> Result<Vec<AlignedPair>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<AlignedPair>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::row(origin, i + 1, "record", e.to_string())))
        .collect()
}
