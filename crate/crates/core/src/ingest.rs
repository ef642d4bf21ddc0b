//! Document loading, the single-country lexicon filter, daily count series and
//! corpus-level descriptive statistics.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::hazard::Hazard;

const DEFAULT_GAZETTEER_DE: &str = include_str!("../data/gazetteer_de.txt");

/// One news item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub outlet: String,
    pub text_type: String,
    pub hazard: Hazard,
    pub text: String,
    /// Identity of the text content. Syndicated copies of one article share a
    /// key even when published by different outlets.
    pub text_key: String,
}

/// A corpus of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentSet(Vec<Document>);

impl DocumentSet {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if doc.text_key.is_empty() {
                return Err(Error::row("documents", i + 1, "text_key", "empty text key"));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    origin: "documents".into(),
                    id: doc.id.clone(),
                    row: i + 1,
                });
            }
        }
        Ok(DocumentSet(docs))
    }

    pub fn into_inner(self) -> Vec<Document> {
        self.0
    }
}

impl Deref for DocumentSet {
    type Target = [Document];

    fn deref(&self) -> &[Document] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocFormat {
    Csv,
    Jsonl,
}

impl DocFormat {
    /// Guess the format from a file extension; anything that is not
    /// `.jsonl`/`.ndjson` is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => DocFormat::Jsonl,
            _ => DocFormat::Csv,
        }
    }
}

impl FromStr for DocFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DocFormat::Csv),
            "jsonl" | "ndjson" => Ok(DocFormat::Jsonl),
            other => Err(Error::InvalidParam(format!(
                "unknown document format {other:?} (expected csv or jsonl)"
            ))),
        }
    }
}

impl fmt::Display for DocFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocFormat::Csv => "csv",
            DocFormat::Jsonl => "jsonl",
        })
    }
}

#[derive(Debug, Deserialize)]
struct RawDocument {
    id: String,
    date: String,
    outlet: String,
    text_type: String,
    hazard: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    text_key: Option<String>,
}

pub fn load_documents(path: &Path, format: DocFormat) -> Result<DocumentSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_documents(file, format, &path.display().to_string())
}

/// Parse documents from any reader. `origin` names the source in errors.
pub fn read_documents<R: Read>(reader: R, format: DocFormat, origin: &str) -> Result<DocumentSet> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    let mut push = |raw: RawDocument, row: usize| -> Result<()> {
        let doc = validate_document(raw, origin, row)?;
        if !ids.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                origin: origin.to_string(),
                id: doc.id,
                row,
            });
        }
        docs.push(doc);
        Ok(())
    };

    match format {
        DocFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
            let headers = rdr
                .headers()
                .map_err(|e| Error::row(origin, 0, "header", e.to_string()))?
                .clone();
            for required in ["id", "date", "outlet", "text_type", "hazard", "text"] {
                if !headers.iter().any(|h| h == required) {
                    return Err(Error::row(
                        origin,
                        0,
                        "header",
                        format!("missing column {required:?}"),
                    ));
                }
            }
            for (i, result) in rdr.deserialize::<RawDocument>().enumerate() {
                let raw = result.map_err(|e| csv_row_error(origin, i + 1, &headers, e))?;
                push(raw, i + 1)?;
            }
        }
        DocFormat::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line = line.map_err(|e| Error::row(origin, i + 1, "line", e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let raw: RawDocument = serde_json::from_str(&line)
                    .map_err(|e| Error::row(origin, i + 1, "record", e.to_string()))?;
                push(raw, i + 1)?;
            }
        }
    }
    Ok(DocumentSet(docs))
}

fn csv_row_error(origin: &str, row: usize, headers: &csv::StringRecord, err: csv::Error) -> Error {
    let field = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err
            .field()
            .and_then(|f| headers.get(f as usize))
            .unwrap_or("record")
            .to_string(),
        _ => "record".to_string(),
    };
    Error::row(origin, row, field, err.to_string())
}

fn validate_document(raw: RawDocument, origin: &str, row: usize) -> Result<Document> {
    let id = raw.id.trim().to_string();
    if id.is_empty() {
        return Err(Error::row(origin, row, "id", "empty id"));
    }
    let date = parse_date(&raw.date).map_err(|m| Error::row(origin, row, "date", m))?;
    let hazard = raw
        .hazard
        .parse::<Hazard>()
        .map_err(|e| Error::row(origin, row, "hazard", e.to_string()))?;
    let text_key = match raw.text_key.as_deref().map(str::trim) {
        Some(key) if !key.is_empty() => key.to_string(),
        _ => text_digest(&raw.text),
    };
    Ok(Document {
        id,
        date,
        outlet: raw.outlet.trim().to_string(),
        text_type: raw.text_type.trim().to_string(),
        hazard,
        text: raw.text,
        text_key,
    })
}

/// Strict `YYYY-MM-DD` calendar date.
pub fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    let s = s.trim();
    let well_formed = s.len() == 10
        && s.bytes()
            .enumerate()
            .all(|(i, b)| if i == 4 || i == 7 { b == b'-' } else { b.is_ascii_digit() });
    if !well_formed {
        return Err(format!("{s:?} is not a YYYY-MM-DD date"));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("{s:?} is not a calendar day"))
}

/// Content digest used as the default text key: SHA-256 over the NFC-normalized
/// body with runs of whitespace collapsed, truncated to 128 bits.
pub fn text_digest(text: &str) -> String {
    let normalized: String = text.nfc().collect();
    let mut hasher = Sha256::new();
    for (i, word) in normalized.split_whitespace().enumerate() {
        if i > 0 {
            hasher.update(b" ");
        }
        hasher.update(word.as_bytes());
    }
    let digest = hasher.finalize();
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// Matching form of a name or text: NFC, lowercase, NFC again (lowercasing can
/// decompose a handful of code points).
pub fn canonicalize(s: &str) -> String {
    let lower: String = s.nfc().flat_map(char::to_lowercase).collect();
    lower.nfc().collect()
}

/// Letter runs of the canonical form. Every non-letter character delimits.
pub fn tokens(s: &str) -> Vec<String> {
    canonicalize(s)
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone)]
struct Entry {
    name: String,
    tokens: Vec<String>,
}

/// Country-name lexicon with one designated country of interest.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<Entry>,
    by_first_token: HashMap<String, Vec<usize>>,
    target: usize,
}

impl Gazetteer {
    pub fn new<I, S>(names: I, target: &str) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries: Vec<Entry> = Vec::new();
        let mut seen: HashMap<Vec<String>, String> = HashMap::new();
        for name in names {
            let name = name.as_ref().trim();
            if name.is_empty() {
                continue;
            }
            let toks = tokens(name);
            if toks.is_empty() {
                return Err(Error::Gazetteer(format!("entry {name:?} contains no letters")));
            }
            if let Some(prev) = seen.insert(toks.clone(), name.to_string()) {
                return Err(Error::Gazetteer(format!(
                    "entries {prev:?} and {name:?} are identical after canonicalization"
                )));
            }
            entries.push(Entry {
                name: name.to_string(),
                tokens: toks,
            });
        }
        if entries.is_empty() {
            return Err(Error::Gazetteer("no entries".into()));
        }
        let target_tokens = tokens(target);
        let target = entries
            .iter()
            .position(|e| e.tokens == target_tokens)
            .ok_or_else(|| Error::Gazetteer(format!("target {target:?} is not an entry")))?;
        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_first_token.entry(e.tokens[0].clone()).or_default().push(i);
        }
        Ok(Gazetteer {
            entries,
            by_first_token,
            target,
        })
    }

    /// One name per line; blank lines and lines starting with `#` are skipped.
    pub fn parse(source: &str, target: &str) -> Result<Self> {
        let names = source
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Gazetteer::new(names, target)
    }

    pub fn load(path: &Path, target: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Gazetteer::parse(&text, target)
    }

    /// The bundled list of German country exonyms.
    pub fn german_default(target: &str) -> Result<Self> {
        Gazetteer::parse(DEFAULT_GAZETTEER_DE, target)
    }

    pub fn default_source() -> &'static str {
        DEFAULT_GAZETTEER_DE
    }

    pub fn target(&self) -> &str {
        &self.entries[self.target].name
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn mention_indices(&self, text: &str) -> BTreeSet<usize> {
        let toks = tokens(text);
        let mut found = BTreeSet::new();
        for (pos, tok) in toks.iter().enumerate() {
            let Some(candidates) = self.by_first_token.get(tok) else {
                continue;
            };
            for &i in candidates {
                let want = &self.entries[i].tokens;
                if toks.len() - pos >= want.len() && toks[pos..pos + want.len()] == want[..] {
                    found.insert(i);
                }
            }
        }
        found
    }

    /// True when the only country mentioned in `text` is the target.
    pub fn is_single_target(&self, text: &str) -> bool {
        let found = self.mention_indices(text);
        found.len() == 1 && found.contains(&self.target)
    }
}

/// Every gazetteer entry occurring in `text` as a whole token sequence.
pub fn extract_country_mentions(text: &str, gazetteer: &Gazetteer) -> BTreeSet<String> {
    gazetteer
        .mention_indices(text)
        .into_iter()
        .map(|i| gazetteer.entries[i].name.clone())
        .collect()
}

/// Keep the documents whose country mentions are exactly `{target}`.
pub fn filter_single_country(docs: DocumentSet, gazetteer: &Gazetteer) -> DocumentSet {
    DocumentSet(
        docs.0
            .into_iter()
            .filter(|d| gazetteer.is_single_target(&d.text))
            .collect(),
    )
}

/// Daily article counts over an inclusive calendar range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    hazard: Hazard,
    start: NaiveDate,
    end: NaiveDate,
    counts: Vec<u32>,
}

/// Number of calendar days in `start..=end`.
pub fn day_span(start: NaiveDate, end: NaiveDate) -> Result<usize> {
    if start > end {
        return Err(Error::InvalidParam(format!("start {start} is after end {end}")));
    }
    Ok((end - start).num_days() as usize + 1)
}

impl CountSeries {
    pub fn zeros(hazard: Hazard, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        let len = day_span(start, end)?;
        Ok(CountSeries {
            hazard,
            start,
            end,
            counts: vec![0; len],
        })
    }

    /// Series from explicit counts starting at `start`.
    pub fn from_counts(hazard: Hazard, start: NaiveDate, counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("count series needs at least one day"));
        }
        let end = start + chrono::Days::new(counts.len() as u64 - 1);
        Ok(CountSeries {
            hazard,
            start,
            end,
            counts,
        })
    }

    pub fn hazard(&self) -> Hazard {
        self.hazard
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start + chrono::Days::new(index as u64)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        if date < self.start || date > self.end {
            None
        } else {
            Some((date - self.start).num_days() as usize)
        }
    }

    pub fn get(&self, date: NaiveDate) -> Option<u32> {
        self.index_of(date).map(|i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Count documents of `hazard` per calendar day. Every copy of a text counts
/// as its own observation.
pub fn build_count_series(
    docs: &[Document],
    hazard: Hazard,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<CountSeries> {
    let mut series = CountSeries::zeros(hazard, start, end)?;
    for doc in docs.iter().filter(|d| d.hazard == hazard) {
        let i = series.index_of(doc.date).ok_or_else(|| Error::OutOfRange {
            id: doc.id.clone(),
            date: doc.date,
            start,
            end,
        })?;
        series.counts[i] += 1;
    }
    Ok(series)
}

/// Descriptive statistics of one hazard's corpus and series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub hazard: Hazard,
    pub n_articles: usize,
    /// Distinct text keys.
    pub n_text_types: usize,
    /// Distinct `text_type` (genre) labels.
    pub n_genres: usize,
    pub daily_max: u32,
    pub n_active_days: usize,
    pub n_days: usize,
    /// Mean count over active days only; `None` without active days.
    pub active_mean: Option<f64>,
    /// Population standard deviation over active days only.
    pub active_std: Option<f64>,
    pub n_outlets: usize,
}

pub fn corpus_stats(docs: &[Document], series: &CountSeries) -> CorpusStats {
    let hazard = series.hazard();
    let mine = || docs.iter().filter(move |d| d.hazard == hazard);
    let active: Vec<f64> = series
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64)
        .collect();
    let (active_mean, active_std) = if active.is_empty() {
        (None, None)
    } else {
        let n = active.len() as f64;
        let mean = active.iter().sum::<f64>() / n;
        let var = active.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(var.sqrt()))
    };
    CorpusStats {
        hazard,
        n_articles: mine().count(),
        n_text_types: mine().map(|d| d.text_key.as_str()).collect::<HashSet<_>>().len(),
        n_genres: mine().map(|d| d.text_type.as_str()).collect::<HashSet<_>>().len(),
        daily_max: series.counts().iter().copied().max().unwrap_or(0),
        n_active_days: active.len(),
        n_days: series.len(),
        active_mean,
        active_std,
        n_outlets: mine().map(|d| d.outlet.as_str()).collect::<HashSet<_>>().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn doc(id: &str, date: NaiveDate, outlet: &str, text: &str) -> Document {
        Document {
            id: id.into(),
            date,
            outlet: outlet.into(),
            text_type: "Bericht".into(),
            hazard: Hazard::Landslide,
            text: text.into(),
            text_key: text_digest(text),
        }
    }

    fn gaz() -> Gazetteer {
        Gazetteer::new(["Brasilien", "Kolumbien", "Peru"], "Brasilien").unwrap()
    }

    const HEADER: &str = "id,date,outlet,text_type,hazard,text\n";

    #[test]
    fn header_only_file_is_empty() {
        let docs = read_documents(HEADER.as_bytes(), DocFormat::Csv, "t").unwrap();
        assert!(docs.is_empty());
    }

    #[test]
    fn three_row_fixture_parses_field_by_field() {
        let src = format!(
            "{HEADER}a,2020-01-05,Spiegel Online,Bericht,landslide,Erdrutsch in Brasilien\n\
             b,2000-02-29,Südkurier,Meldung,fire,\"Feuer, Brasilien\"\n\
             c,2024-12-31,taz,Bericht,Fire,\n"
        );
        let docs = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].id, "a");
        assert_eq!(docs[0].date, ymd(2020, 1, 5));
        assert_eq!(docs[0].outlet, "Spiegel Online");
        assert_eq!(docs[0].hazard, Hazard::Landslide);
        assert_eq!(docs[1].date, ymd(2000, 2, 29));
        assert_eq!(docs[1].outlet, "Südkurier");
        assert_eq!(docs[1].text_type, "Meldung");
        assert_eq!(docs[1].text, "Feuer, Brasilien");
        assert_eq!(docs[2].hazard, Hazard::Fire);
        assert_eq!(docs[2].text, "");
        assert_eq!(docs[2].text_key, text_digest(""));
    }

    #[test]
    fn explicit_text_key_overrides_digest() {
        let src = "id,date,outlet,text_type,hazard,text,text_key\n\
                   a,2020-01-05,X,Bericht,fire,foo,K1\n\
                   b,2020-01-05,X,Bericht,fire,foo,\n";
        let docs = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap();
        assert_eq!(docs[0].text_key, "K1");
        assert_eq!(docs[1].text_key, text_digest("foo"));
    }

    #[test]
    fn impossible_date_names_row() {
        let src = format!(
            "{HEADER}a,2024-02-28,X,Bericht,fire,x\nb,2024-02-30,X,Bericht,fire,x\n"
        );
        let err = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap_err();
        assert!(err.to_string().contains("invalid date at row 2"), "{err}");
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let src = format!("{HEADER}a,2024-02-28,X,B,fire,x\na,2024-02-29,X,B,fire,y\n");
        let err = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap_err();
        assert!(matches!(err, Error::DuplicateId { row: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_hazard_lists_label() {
        let src = format!("{HEADER}a,2024-02-28,X,B,flood,x\n");
        let err = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"flood\"") && msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn short_csv_row_is_reported() {
        let src = format!("{HEADER}a,2024-02-28,X\n");
        let err = read_documents(src.as_bytes(), DocFormat::Csv, "t").unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn jsonl_documents() {
        let src = r#"{"id":"a","date":"2021-03-01","outlet":"X","text_type":"B","hazard":"fire","text":"Brasilien"}

{"id":"b","date":"2021-03-02","outlet":"Y","text_type":"B","hazard":"landslide","text":"","text_key":"k"}
"#;
        let docs = read_documents(src.as_bytes(), DocFormat::Jsonl, "t").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].text_key, "k");
        let bad = r#"{"id":"a","date":"2021-13-01","outlet":"X","text_type":"B","hazard":"fire","text":""}"#;
        let err = read_documents(bad.as_bytes(), DocFormat::Jsonl, "t").unwrap_err();
        assert!(err.to_string().contains("invalid date at row 1"), "{err}");
    }

    #[test]
    fn digest_ignores_whitespace_layout() {
        assert_eq!(text_digest("a  b\nc"), text_digest(" a b c "));
        assert_ne!(text_digest("a b"), text_digest("ab"));
        // NFC: decomposed u + combining diaeresis equals precomposed ü
        assert_eq!(text_digest("Su\u{308}d"), text_digest("Süd"));
    }

    #[test]
    fn mentions_examples() {
        let g = gaz();
        assert!(extract_country_mentions("", &g).is_empty());
        assert_eq!(
            extract_country_mentions("Überschwemmungen in Brasilien", &g),
            BTreeSet::from(["Brasilien".to_string()])
        );
        assert_eq!(
            extract_country_mentions("von Brasilien bis Peru", &g),
            BTreeSet::from(["Brasilien".to_string(), "Peru".to_string()])
        );
    }

    #[test]
    fn mentions_are_case_insensitive_whole_tokens() {
        let g = gaz();
        assert_eq!(extract_country_mentions("BRASILIEN: Regen", &g).len(), 1);
        assert!(extract_country_mentions("brasilianische Behörden", &g).is_empty());
        assert!(extract_country_mentions("Brasiliens Süden", &g).is_empty());
        assert!(extract_country_mentions("Peruaner", &g).is_empty());
        assert_eq!(extract_country_mentions("(Brasilien)", &g).len(), 1);
        assert_eq!(extract_country_mentions("Nord-Brasilien", &g).len(), 1);
    }

    #[test]
    fn multi_word_entries_match_as_sequences() {
        let g = Gazetteer::new(["Brasilien", "Vereinigte Staaten", "Staaten"], "Brasilien").unwrap();
        let found = extract_country_mentions("Die Vereinigte  Staaten helfen", &g);
        assert!(found.contains("Vereinigte Staaten"));
        assert!(!extract_country_mentions("vereinigte Kräfte", &g).contains("Vereinigte Staaten"));
    }

    #[test]
    fn gazetteer_validation() {
        assert!(Gazetteer::new(["Brasilien", "BRASILIEN"], "Brasilien").is_err());
        assert!(Gazetteer::new(["Peru"], "Brasilien").is_err());
        assert!(Gazetteer::new(Vec::<String>::new(), "Brasilien").is_err());
        let g = Gazetteer::parse("# comment\nBrasilien\n\n  Peru  \n", "brasilien").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.target(), "Brasilien");
    }

    #[test]
    fn default_gazetteer_loads() {
        let g = Gazetteer::german_default("Brasilien").unwrap();
        assert!(g.len() > 180);
        assert!(g.is_single_target("Erdrutsch in Brasilien"));
        assert!(!g.is_single_target("Brände in Brasilien und Bolivien"));
    }

    #[test]
    fn filter_examples() {
        let g = gaz();
        let d = ymd(2020, 1, 1);
        let docs = DocumentSet::new(vec![
            doc("only", d, "A", "Regen in Brasilien"),
            doc("two", d, "A", "Brasilien und Peru"),
            doc("none", d, "A", "Regen in Europa"),
            doc("only2", d, "B", "brasilien"),
        ])
        .unwrap();
        let kept = filter_single_country(docs, &g);
        let ids: Vec<_> = kept.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["only", "only2"]);
    }

    #[test]
    fn series_counts_copies_separately() {
        let d = ymd(2020, 1, 2);
        let docs = vec![doc("a", d, "A", "same"), doc("b", d, "B", "same")];
        let s = build_count_series(&docs, Hazard::Landslide, ymd(2020, 1, 1), ymd(2020, 1, 3)).unwrap();
        assert_eq!(s.counts(), &[0, 2, 0]);
        assert_eq!(s.total(), 2);
    }

    #[test]
    fn empty_corpus_gives_zero_series() {
        let s = build_count_series(&[], Hazard::Fire, ymd(2000, 1, 1), ymd(2000, 12, 31)).unwrap();
        assert_eq!(s.len(), 366);
        assert!(s.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn quarter_century_has_9132_days() {
        let s = CountSeries::zeros(Hazard::Fire, ymd(2000, 1, 1), ymd(2024, 12, 31)).unwrap();
        assert_eq!(s.len(), 9132);
        assert_eq!(s.index_of(ymd(2000, 2, 29)), Some(59));
        assert_eq!(s.date_at(9131), ymd(2024, 12, 31));
    }

    #[test]
    fn out_of_range_document_names_id() {
        let docs = vec![doc("late", ymd(2025, 1, 1), "A", "x")];
        let err = build_count_series(&docs, Hazard::Landslide, ymd(2024, 1, 1), ymd(2024, 12, 31))
            .unwrap_err();
        assert!(err.to_string().contains("late"));
    }

    #[test]
    fn inverted_range_is_rejected() {
        assert!(CountSeries::zeros(Hazard::Fire, ymd(2024, 1, 2), ymd(2024, 1, 1)).is_err());
    }

    #[test]
    fn stats_over_active_days() {
        let s = CountSeries::from_counts(Hazard::Landslide, ymd(2020, 1, 1), vec![0, 2, 0, 4]).unwrap();
        let st = corpus_stats(&[], &s);
        assert_eq!(st.daily_max, 4);
        assert_eq!(st.n_active_days, 2);
        assert_eq!(st.active_mean, Some(3.0));
        assert_eq!(st.active_std, Some(1.0));

        let z = CountSeries::zeros(Hazard::Landslide, ymd(2020, 1, 1), ymd(2020, 1, 4)).unwrap();
        let st = corpus_stats(&[], &z);
        assert_eq!(st.n_active_days, 0);
        assert_eq!(st.active_mean, None);
        assert_eq!(st.active_std, None);
    }

    #[test]
    fn stats_count_distinct_keys_outlets_genres() {
        let d = ymd(2020, 1, 2);
        let mut docs = vec![
            doc("a", d, "A", "same"),
            doc("b", d, "B", "same"),
            doc("c", d, "B", "other"),
        ];
        docs[2].text_type = "Kommentar".into();
        let s = build_count_series(&docs, Hazard::Landslide, ymd(2020, 1, 1), ymd(2020, 1, 3)).unwrap();
        let st = corpus_stats(&docs, &s);
        assert_eq!(st.n_articles, 3);
        assert_eq!(st.n_text_types, 2);
        assert_eq!(st.n_genres, 2);
        assert_eq!(st.n_outlets, 2);
    }
}
