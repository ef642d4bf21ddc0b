//! Seeded synthetic corpora with planted attention bursts, plus matching
//! synthetic registry entries. Used for tests, benchmarks and the demo.

use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::align::{DisasterRecord, Source};
use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::{day_span, text_digest, Document};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub n_docs: usize,
    pub hazards: Vec<Hazard>,
    pub bursts_per_hazard: usize,
    /// Share of documents placed inside bursts; the rest is background.
    pub burst_share: f64,
    /// Share of documents that also name another country.
    pub foreign_share: f64,
    pub n_outlets: usize,
    pub n_templates: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            start: NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
            n_docs: 2_000,
            hazards: Hazard::ALL.to_vec(),
            bursts_per_hazard: 40,
            burst_share: 0.8,
            foreign_share: 0.1,
            n_outlets: 200,
            n_templates: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Burst {
    pub hazard: Hazard,
    pub center: NaiveDate,
    /// Relative size; documents are allotted to bursts by weight.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub docs: Vec<Document>,
    pub bursts: Vec<Burst>,
}

const LANDSLIDE_WORDS: [&str; 4] = ["Erdrutsch", "Hangrutsch", "Schlammlawine", "Dammbruch"];
const FIRE_WORDS: [&str; 4] = ["Waldbrand", "Großbrand", "Buschfeuer", "Brandkatastrophe"];
const PLACES: [&str; 6] = ["Rio de Janeiro", "São Paulo", "Minas Gerais", "Amazonas", "Pantanal", "Bahia"];
const NEIGHBOURS: [&str; 5] = ["Peru", "Bolivien", "Argentinien", "Kolumbien", "Paraguay"];
const GENRES: [&str; 4] = ["Bericht", "Meldung", "Kommentar", "Interview"];

fn headline(hazard: Hazard, template: usize) -> String {
    let word = match hazard {
        Hazard::Landslide => LANDSLIDE_WORDS[template % 4],
        Hazard::Fire => FIRE_WORDS[template % 4],
    };
    let place = PLACES[(template / 4) % PLACES.len()];
    format!("{word} in {place}, Brasilien: Meldung Nummer {template}")
}

pub fn corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    let n_days = day_span(cfg.start, cfg.end)?;
    if cfg.hazards.is_empty() || cfg.n_outlets == 0 || cfg.n_templates == 0 {
        return Err(Error::InvalidParam("synthetic corpus needs hazards, outlets and templates".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bursts = Vec::new();
    for &hazard in &cfg.hazards {
        for _ in 0..cfg.bursts_per_hazard {
            let offset = rng.gen_range(3..n_days.saturating_sub(3).max(4)).min(n_days - 1);
            // heavy-tailed sizes: a few bursts dominate
            let weight = 1.0 / rng.gen_range(0.02f64..1.0);
            bursts.push(Burst {
                hazard,
                center: cfg.start + Days::new(offset as u64),
                weight,
            });
        }
    }
    bursts.sort_by_key(|b| (b.hazard, b.center));
    let picker = if bursts.is_empty() {
        None
    } else {
        Some(WeightedIndex::new(bursts.iter().map(|b| b.weight)).expect("positive weights"))
    };

    let headlines: Vec<Vec<String>> = Hazard::ALL
        .iter()
        .map(|&h| (0..cfg.n_templates).map(|t| headline(h, t)).collect())
        .collect();
    let keys: Vec<Vec<String>> = headlines
        .iter()
        .map(|hs| hs.iter().map(|t| text_digest(t)).collect())
        .collect();

    let mut docs = Vec::with_capacity(cfg.n_docs);
    for k in 0..cfg.n_docs {
        let (hazard, offset) = match &picker {
            Some(p) if rng.gen_bool(cfg.burst_share) => {
                let b = &bursts[p.sample(&mut rng)];
                let center = (b.center - cfg.start).num_days();
                // mostly on the day, with a short tail after it
                let spread = [0i64, 0, 0, 0, 1, 1, 2, -1, 3][rng.gen_range(0..9)];
                let day = (center + spread).clamp(0, n_days as i64 - 1);
                (b.hazard, day as u64)
            }
            _ => (
                cfg.hazards[rng.gen_range(0..cfg.hazards.len())],
                rng.gen_range(0..n_days) as u64,
            ),
        };
        let h = hazard as usize;
        let template = rng.gen_range(0..cfg.n_templates);
        let (text, text_key) = if rng.gen_bool(cfg.foreign_share) {
            let text = format!(
                "{} Auch {} meldet Schäden.",
                headlines[h][template],
                NEIGHBOURS[rng.gen_range(0..NEIGHBOURS.len())]
            );
            let key = text_digest(&text);
            (text, key)
        } else {
            (headlines[h][template].clone(), keys[h][template].clone())
        };
        docs.push(Document {
            id: format!("d{k:08}"),
            date: cfg.start + Days::new(offset),
            outlet: format!("Outlet {:03}", rng.gen_range(0..cfg.n_outlets)),
            text_type: GENRES[rng.gen_range(0..GENRES.len())].to_string(),
            hazard,
            text,
            text_key,
        });
    }
    Ok(SynthCorpus { docs, bursts })
}

/// One registry entry per burst for the first `share` of bursts (by a seeded
/// draw), with onset 0..=`max_lag` days before the burst centre, plus
/// `n_noise` entries at random dates.
pub fn registry(
    corpus: &SynthCorpus,
    source: Source,
    seed: u64,
    share: f64,
    max_lag: i64,
    n_noise: usize,
    range: (NaiveDate, NaiveDate),
) -> Vec<DisasterRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let raw_type = |h: Hazard| match (source, h) {
        (Source::S2id, Hazard::Landslide) => "Deslizamentos",
        (Source::S2id, Hazard::Fire) => "Incêndio florestal",
        (_, Hazard::Landslide) => "Mass movement (wet)",
        (_, Hazard::Fire) => "Wildfire",
    };
    let push = |hazard: Hazard, onset: NaiveDate, out: &mut Vec<DisasterRecord>| {
        let n = out.len();
        out.push(DisasterRecord {
            record_id: format!("{source}-{n:05}"),
            source,
            hazard,
            onset_date: onset,
            location: PLACES[n % PLACES.len()].to_string(),
            raw_type: raw_type(hazard).to_string(),
            status: "recognised".to_string(),
        });
    };
    for b in &corpus.bursts {
        if rng.gen_bool(share) {
            let lag = rng.gen_range(0..=max_lag.max(0));
            push(b.hazard, b.center - chrono::Duration::days(lag), &mut out);
        }
    }
    let span = (range.1 - range.0).num_days().max(0) as u64;
    for _ in 0..n_noise {
        let h = Hazard::ALL[rng.gen_range(0..2)];
        push(h, range.0 + Days::new(rng.gen_range(0..=span)), &mut out);
    }
    out
}

/// Random sparse count series: each day is zero with probability
/// `1 - density`, otherwise uniform in `1..=max`.
pub fn random_counts<R: Rng>(rng: &mut R, len: usize, max: u32, density: f64) -> Vec<u32> {
    (0..len)
        .map(|_| {
            if max > 0 && rng.gen_bool(density.clamp(0.0, 1.0)) {
                rng.gen_range(1..=max)
            } else {
                0
            }
        })
        .collect()
}

#[derive(Serialize)]
struct DocRow<'a> {
    id: &'a str,
    date: String,
    outlet: &'a str,
    text_type: &'a str,
    hazard: &'a str,
    text: &'a str,
}

/// Documents in the loader's CSV layout (text key left to the loader).
pub fn write_documents_csv<W: Write>(docs: &[Document], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for d in docs {
        w.serialize(DocRow {
            id: &d.id,
            date: d.date.to_string(),
            outlet: &d.outlet,
            text_type: &d.text_type,
            hazard: d.hazard.as_str(),
            text: &d.text,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Records in the registry input layout.
pub fn write_registry_csv<W: Write>(records: &[DisasterRecord], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["record_id", "source", "raw_type", "onset_date", "location", "status"])?;
    for r in records {
        w.write_record([
            r.record_id.as_str(),
            r.source.as_str(),
            r.raw_type.as_str(),
            &r.onset_date.to_string(),
            r.location.as_str(),
            r.status.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
