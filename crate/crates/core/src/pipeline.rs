//! End-to-end orchestration and output files.
//!
//! Every stage is recomputed from the configured inputs; stages only differ in
//! which files they write. Output layout, per selected hazard `<h>`:
//!
//! | file                     | stage   |
//! |--------------------------|---------|
//! | `<h>/counts.csv`         | ingest  |
//! | `<h>/stats.json`         | ingest+ |
//! | `<h>/series.csv`         | detect+ |
//! | `<h>/events.jsonl`       | detect+ |
//! | `<h>/measures.csv`       | measure+|
//! | `<h>/distributions.json` | measure+|
//! | `<h>/alignment.csv`      | align+  |
//! | `<h>/alignment.json`     | align+  |
//! | `registry.csv`           | align+  |
//! | `report.json`            | report, run |
//! | `manifest.json`          | run     |
//!
//! `report` is the exception: it reads the per-stage files already present in
//! the output directory and writes `report.json` from them alone.
//!
//! Data files carry no timestamps; the wall-clock time lives only in
//! `manifest.json`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{
    self, align_events, alignment_summary, AlignmentReport, AlignmentSummary, DisasterRecord,
    RecordRef, Source,
};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::{
    self, build_count_series, corpus_stats, filter_single_country, CorpusStats, CountSeries,
    DocFormat, DocumentSet, Gazetteer,
};
use crate::measures::{self, characterize_all, distributions, HazardDistributions, MeasureSet};
use crate::peaks::{detect, NewsEvent, PeakParams};

pub const TOOL_NAME: &str = "attn-peaks";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Detect,
    Measure,
    Align,
    Report,
    Run,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Detect => "detect",
            Stage::Measure => "measure",
            Stage::Align => "align",
            Stage::Report => "report",
            Stage::Run => "run",
        }
    }
}

/// Analysis parameters independent of where inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub start: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
    pub hazards: Vec<Hazard>,
    pub peaks: PeakParams,
    pub window_days: i64,
}

impl From<&PipelineConfig> for Settings {
    fn from(cfg: &PipelineConfig) -> Self {
        Settings {
            start: cfg.range.start,
            end: cfg.range.end,
            hazards: cfg.input.hazards.clone(),
            peaks: cfg.peaks,
            window_days: cfg.align.window_days,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HazardAnalysis {
    pub hazard: Hazard,
    pub series: CountSeries,
    pub stats: CorpusStats,
    pub events: Vec<NewsEvent>,
    pub measures: Vec<MeasureSet>,
    pub distributions: HazardDistributions,
    pub alignment: AlignmentReport,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub window_days: i64,
    pub hazards: Vec<HazardAnalysis>,
    /// Registry records of the selected hazards, sorted by source and id.
    pub records: Vec<DisasterRecord>,
}

/// Run every stage on already loaded, already filtered documents.
pub fn analyze(docs: &DocumentSet, records: &[DisasterRecord], settings: &Settings) -> Result<Analysis> {
    settings.peaks.validate()?;
    let mut hazards = Vec::with_capacity(settings.hazards.len());
    for &hazard in &settings.hazards {
        let series = build_count_series(docs, hazard, settings.start, settings.end)
            .map_err(|e| e.in_stage("ingest"))?;
        let stats = corpus_stats(docs, &series);
        let events = detect(&series, settings.peaks).events;
        let measures = characterize_all(&events, docs, hazard).map_err(|e| e.in_stage("measure"))?;
        let dists = distributions(&measures);
        let hazard_records: Vec<DisasterRecord> =
            records.iter().filter(|r| r.hazard == hazard).cloned().collect();
        let alignment = align_events(&events, &hazard_records, settings.window_days)
            .map_err(|e| e.in_stage("align"))?;
        hazards.push(HazardAnalysis {
            hazard,
            series,
            stats,
            events,
            measures,
            distributions: dists,
            alignment,
        });
    }
    let selected: HashSet<Hazard> = settings.hazards.iter().copied().collect();
    let mut records: Vec<DisasterRecord> = records
        .iter()
        .filter(|r| selected.contains(&r.hazard))
        .cloned()
        .collect();
    records.sort_by(|a, b| (a.source, &a.record_id).cmp(&(b.source, &b.record_id)));
    Ok(Analysis {
        window_days: settings.window_days,
        hazards,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryTally {
    pub source: Source,
    pub path: PathBuf,
    pub kept: usize,
    pub ignored: usize,
    pub rejected_status: usize,
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub documents: DocumentSet,
    pub n_loaded: usize,
    pub records: Vec<DisasterRecord>,
    pub registries: Vec<RegistryTally>,
    /// (role, path) of every input file read.
    pub files: Vec<(&'static str, PathBuf)>,
}

/// Load and filter documents, load the gazetteer and every registry.
pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    cfg.validate()?;
    let mut files = Vec::new();
    let doc_path = cfg.input.documents.clone().expect("validated");
    let format = cfg.document_format().unwrap_or(DocFormat::Csv);
    let docs = ingest::load_documents(&doc_path, format).map_err(|e| e.in_stage("ingest"))?;
    files.push(("documents", doc_path));
    let gazetteer = match &cfg.input.gazetteer {
        Some(p) => {
            files.push(("gazetteer", p.clone()));
            Gazetteer::load(p, &cfg.input.target)
        }
        None => Gazetteer::german_default(&cfg.input.target),
    }
    .map_err(|e| e.in_stage("ingest"))?;
    let n_loaded = docs.len();
    let documents = filter_single_country(docs, &gazetteer);

    let reg_cfg = cfg.registry_config();
    let mut records = Vec::new();
    let mut registries = Vec::new();
    for r in &cfg.align.registry {
        let load = align::load_registry(&r.path, r.source, &reg_cfg).map_err(|e| e.in_stage("align"))?;
        registries.push(RegistryTally {
            source: r.source,
            path: r.path.clone(),
            kept: load.records.len(),
            ignored: load.ignored,
            rejected_status: load.rejected_status,
        });
        records.extend(load.records);
        files.push(("registry", r.path.clone()));
    }
    Ok(Inputs {
        documents,
        n_loaded,
        records,
        registries,
        files,
    })
}

/// `date,count,is_event_day,is_peak` for every day of the series.
pub fn emit_timeseries<W: Write>(series: &CountSeries, events: &[NewsEvent], writer: W) -> Result<()> {
    let mut event_day = vec![false; series.len()];
    let mut peak = vec![false; series.len()];
    for e in events {
        for d in &e.days {
            if let Some(i) = series.index_of(d.date) {
                event_day[i] = true;
            }
        }
        if let Some(i) = series.index_of(e.peak_date) {
            peak[i] = true;
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let out = |e: csv::Error| Error::Write(format!("series: {e}"));
    w.write_record(["date", "count", "is_event_day", "is_peak"]).map_err(out)?;
    for (i, &c) in series.counts().iter().enumerate() {
        w.write_record([
            series.date_at(i).to_string(),
            c.to_string(),
            (event_day[i] as u8).to_string(),
            (peak[i] as u8).to_string(),
        ])
        .map_err(out)?;
    }
    w.flush().map_err(|e| Error::Write(format!("series: {e}")))?;
    Ok(())
}

fn counts_csv(series: &CountSeries) -> Vec<u8> {
    let mut buf = String::from("date,count\n");
    for (i, c) in series.counts().iter().enumerate() {
        buf.push_str(&format!("{},{}\n", series.date_at(i), c));
    }
    buf.into_bytes()
}

fn events_jsonl(events: &[NewsEvent]) -> Vec<u8> {
    let mut buf = Vec::new();
    for e in events {
        serde_json::to_writer(&mut buf, e).expect("events serialize");
        buf.push(b'\n');
    }
    buf
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = serde_json::to_vec_pretty(value).expect("report types serialize");
    buf.push(b'\n');
    buf
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReport {
    pub corpus: CorpusStats,
    pub n_events: usize,
    pub measures: HazardDistributions,
    pub alignment: AlignmentSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub hazards: BTreeMap<Hazard, HazardReport>,
    pub n_events: usize,
    pub alignment: AlignmentSummary,
}

fn assemble_report(parts: Vec<(CorpusStats, HazardDistributions, AlignmentReport)>) -> Result<Report> {
    let mut hazards = BTreeMap::new();
    let mut merged = AlignmentReport::default();
    let mut n_events = 0;
    for (corpus, dists, alignment) in parts {
        let n = dists.n_events;
        n_events += n;
        let summary = alignment_summary(&alignment, n);
        merged = merged.merge(alignment)?;
        hazards.insert(
            corpus.hazard,
            HazardReport {
                corpus,
                n_events: n,
                measures: dists,
                alignment: summary,
            },
        );
    }
    Ok(Report {
        hazards,
        n_events,
        alignment: alignment_summary(&merged, n_events),
    })
}

pub fn build_report(analysis: &Analysis) -> Result<Report> {
    assemble_report(
        analysis
            .hazards
            .iter()
            .map(|h| (h.stats.clone(), h.distributions.clone(), h.alignment.clone()))
            .collect(),
    )
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Rebuild the summary report from per-stage files in `dir` (written by
/// `run` or by `ingest`, `detect`, `measure` and `align`).
pub fn report_from_dir(dir: &Path, hazards: &[Hazard]) -> Result<Report> {
    let registry_path = dir.join("registry.csv");
    let records = align::read_records_csv(
        read_file(&registry_path)?.as_slice(),
        &registry_path.display().to_string(),
    )?;
    let mut parts = Vec::new();
    for &h in hazards {
        let hdir = dir.join(h.as_str());
        let stats: CorpusStats = serde_json::from_slice(&read_file(&hdir.join("stats.json"))?)
            .map_err(|e| Error::Config(format!("{}: {e}", hdir.join("stats.json").display())))?;
        let events_path = hdir.join("events.jsonl");
        let mut event_ids = Vec::new();
        for (i, line) in BufReader::new(read_file(&events_path)?.as_slice()).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&events_path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let e: NewsEvent = serde_json::from_str(&line).map_err(|err| {
                Error::row(&events_path.display().to_string(), i + 1, "event", err.to_string())
            })?;
            event_ids.push(e.event_id);
        }
        let measures_path = hdir.join("measures.csv");
        let ms = measures::read_csv(
            read_file(&measures_path)?.as_slice(),
            &measures_path.display().to_string(),
        )?;
        if ms.len() != event_ids.len() {
            return Err(Error::Inconsistency(format!(
                "{h}: {} events but {} measure rows",
                event_ids.len(),
                ms.len()
            )));
        }
        let summary_path = hdir.join("alignment.json");
        let stored: AlignmentSummary = serde_json::from_slice(&read_file(&summary_path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", summary_path.display())))?;
        let pairs_path = hdir.join("alignment.csv");
        let pairs = align::read_pairs_csv(
            read_file(&pairs_path)?.as_slice(),
            &pairs_path.display().to_string(),
        )?;
        let refs: Vec<RecordRef> = records
            .iter()
            .filter(|r| r.hazard == h)
            .map(RecordRef::from)
            .collect();
        let ids: Vec<&str> = event_ids.iter().map(String::as_str).collect();
        let alignment = AlignmentReport::from_pairs(stored.window_days, pairs, &ids, &refs);
        parts.push((stats, distributions(&ms), alignment));
    }
    assemble_report(parts)
}

/// Render the files of `stage` (which must not be `Report`) in memory, keyed by
/// path relative to the output directory.
pub fn render(analysis: &Analysis, stage: Stage) -> Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut files = BTreeMap::new();
    let at_least = |s: Stage| stage >= s && stage != Stage::Report;
    for h in &analysis.hazards {
        let dir = PathBuf::from(h.hazard.as_str());
        files.insert(dir.join("stats.json"), json(&h.stats));
        if stage == Stage::Ingest {
            files.insert(dir.join("counts.csv"), counts_csv(&h.series));
        }
        if at_least(Stage::Detect) {
            let mut buf = Vec::new();
            emit_timeseries(&h.series, &h.events, &mut buf)?;
            files.insert(dir.join("series.csv"), buf);
            files.insert(dir.join("events.jsonl"), events_jsonl(&h.events));
        }
        if at_least(Stage::Measure) {
            let mut buf = Vec::new();
            measures::write_csv(&h.measures, &mut buf)
                .map_err(|e| Error::Write(format!("measures: {e}")))?;
            files.insert(dir.join("measures.csv"), buf);
            files.insert(dir.join("distributions.json"), json(&h.distributions));
        }
        if at_least(Stage::Align) {
            let mut buf = Vec::new();
            align::write_pairs_csv(&h.alignment.pairs, &mut buf)
                .map_err(|e| Error::Write(format!("alignment: {e}")))?;
            files.insert(dir.join("alignment.csv"), buf);
            files.insert(
                dir.join("alignment.json"),
                json(&alignment_summary(&h.alignment, h.events.len())),
            );
        }
    }
    if at_least(Stage::Align) {
        let mut buf = Vec::new();
        align::write_records_csv(&analysis.records, &mut buf)
            .map_err(|e| Error::Write(format!("registry: {e}")))?;
        files.insert(PathBuf::from("registry.csv"), buf);
    }
    if stage == Stage::Run {
        files.insert(PathBuf::from("report.json"), json(&build_report(analysis)?));
    }
    Ok(files)
}

/// Write files into `out_dir` through a staging directory inside it; nothing
/// is moved into place unless every file was written.
pub fn commit(out_dir: &Path, files: &BTreeMap<PathBuf, Vec<u8>>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".attn-peaks-staging-")
        .tempdir_in(out_dir)
        .map_err(|e| Error::io(out_dir, e))?;
    for (rel, bytes) in files {
        let p = staging.path().join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    let mut written = Vec::with_capacity(files.len());
    for rel in files.keys() {
        let dest = out_dir.join(rel);
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::rename(staging.path().join(rel), &dest).map_err(|e| Error::io(&dest, e))?;
        written.push(dest);
    }
    Ok(written)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub stage: Stage,
    pub generated_at: String,
    pub config: PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub documents_loaded: usize,
    pub documents_kept: usize,
    pub registries: Vec<RegistryTally>,
    pub outputs: Vec<FileDigest>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub analysis: Option<Analysis>,
}

/// Run the pipeline up to `stage` and write that stage's files. `Report`
/// reads existing files instead of inputs.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<RunArtifacts> {
    let out_dir = cfg.output.dir.clone();
    if stage == Stage::Report {
        cfg.validate_params()?;
        let report = report_from_dir(&out_dir, &cfg.input.hazards).map_err(|e| e.in_stage("report"))?;
        let files = BTreeMap::from([(PathBuf::from("report.json"), json(&report))]);
        let written = commit(&out_dir, &files).map_err(|e| e.in_stage("output"))?;
        return Ok(RunArtifacts {
            out_dir,
            files: written,
            analysis: None,
        });
    }

    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let inputs = load_inputs(cfg)?;
    let analysis = analyze(&inputs.documents, &inputs.records, &Settings::from(cfg))?;
    let mut files = render(&analysis, stage)?;
    if stage == Stage::Run {
        let mut input_digests = Vec::new();
        for (role, path) in &inputs.files {
            input_digests.push(FileDigest {
                role: role.to_string(),
                path: path.clone(),
                sha256: sha256_hex(&read_file(path)?),
            });
        }
        let manifest = Manifest {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            stage,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: cfg.clone(),
            inputs: input_digests,
            documents_loaded: inputs.n_loaded,
            documents_kept: inputs.documents.len(),
            registries: inputs.registries.clone(),
            outputs: files
                .iter()
                .map(|(p, b)| FileDigest {
                    role: "output".into(),
                    path: p.clone(),
                    sha256: sha256_hex(b),
                })
                .collect(),
        };
        files.insert(PathBuf::from("manifest.json"), json(&manifest));
    }
    let written = commit(&out_dir, &files).map_err(|e| e.in_stage("output"))?;
    Ok(RunArtifacts {
        out_dir,
        files: written,
        analysis: Some(analysis),
    })
}

/// All stages plus report and manifest.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunArtifacts> {
    run_stage(cfg, Stage::Run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Document;
    use chrono::NaiveDate;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn settings() -> Settings {
        Settings {
            start: ymd(2020, 1, 1),
            end: ymd(2020, 1, 31),
            hazards: vec![Hazard::Landslide, Hazard::Fire],
            peaks: PeakParams::default(),
            window_days: 5,
        }
    }

    fn docs(days: &[(u32, u32)]) -> DocumentSet {
        let mut out = Vec::new();
        for &(day, n) in days {
            for k in 0..n {
                let text = format!("Erdrutsch in Brasilien {day} {k}");
                out.push(Document {
                    id: format!("{day}-{k}"),
                    date: ymd(2020, 1, day),
                    outlet: format!("o{k}"),
                    text_type: "Bericht".into(),
                    hazard: Hazard::Landslide,
                    text_key: ingest::text_digest(&text),
                    text,
                });
            }
        }
        DocumentSet::new(out).unwrap()
    }

    #[test]
    fn empty_corpus_yields_zero_events() {
        let a = analyze(&DocumentSet::default(), &[], &settings()).unwrap();
        assert!(a.hazards.iter().all(|h| h.events.is_empty()));
        let files = render(&a, Stage::Run).unwrap();
        let report: Report = serde_json::from_slice(&files[Path::new("report.json")]).unwrap();
        assert_eq!(report.n_events, 0);
        assert_eq!(report.alignment.aligned_fraction, None);
    }

    #[test]
    fn timeseries_flags_event_days() {
        let a = analyze(&docs(&[(10, 1), (11, 3), (12, 1)]), &[], &settings()).unwrap();
        let mut buf = Vec::new();
        emit_timeseries(&a.hazards[0].series, &a.hazards[0].events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 31);
        assert_eq!(rows.iter().filter(|r| r.ends_with(",1,0") || r.ends_with(",1,1")).count(), 3);
        assert_eq!(rows.iter().filter(|r| r.ends_with(",1")).count(), 1);
        assert!(rows.contains(&"2020-01-11,3,1,1"));
        let total: u32 = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse::<u32>().unwrap()).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn all_zero_series_has_no_flags() {
        let s = CountSeries::zeros(Hazard::Fire, ymd(2020, 1, 1), ymd(2020, 1, 10)).unwrap();
        let mut buf = Vec::new();
        emit_timeseries(&s, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().skip(1).all(|r| r.ends_with(",0,0,0")));
    }

    #[test]
    fn stages_write_nested_file_sets() {
        let a = analyze(&docs(&[(11, 3)]), &[], &settings()).unwrap();
        let names = |s| render(&a, s).unwrap().keys().map(|p| p.display().to_string()).collect::<Vec<_>>();
        assert_eq!(names(Stage::Ingest), ["fire/counts.csv", "fire/stats.json", "landslide/counts.csv", "landslide/stats.json"]);
        assert!(names(Stage::Detect).contains(&"landslide/events.jsonl".to_string()));
        assert!(!names(Stage::Detect).contains(&"landslide/measures.csv".to_string()));
        assert!(names(Stage::Align).contains(&"registry.csv".to_string()));
        assert!(names(Stage::Run).contains(&"report.json".to_string()));
    }

    #[test]
    fn commit_moves_files_into_place() {
        let dir = tempfile::tempdir().unwrap();
        let files = BTreeMap::from([
            (PathBuf::from("a/b.txt"), b"x".to_vec()),
            (PathBuf::from("c.txt"), b"y".to_vec()),
        ]);
        commit(dir.path(), &files).unwrap();
        assert_eq!(fs::read(dir.path().join("a/b.txt")).unwrap(), b"x");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".attn-peaks-staging"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
