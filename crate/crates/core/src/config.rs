//! Pipeline configuration file.
//!
//! ```toml
//! [input]
//! documents = "news.csv"          # required
//! format = "csv"                  # csv | jsonl, default from the extension
//! gazetteer = "countries.txt"     # default: bundled German list
//! target = "Brasilien"
//! hazards = ["landslide", "fire"]
//!
//! [range]
//! start = "2000-01-01"
//! end = "2024-12-31"
//!
//! [peaks]
//! min_height = 2
//! min_distance = 7
//!
//! [align]
//! window_days = 5
//!
//! [[align.registry]]
//! source = "EMDAT"
//! path = "emdat.csv"
//!
//! [align.type_map]                # overlays the bundled map
//! "Mass movement (wet)" = "landslide"
//!
//! [align.status_accept]
//! S2ID = ["recognised"]
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize};

use crate::align::{RegistryConfig, Source, TypeMapping, DEFAULT_WINDOW_DAYS};
use crate::error::{Error, Result};
use crate::hazard::Hazard;
use crate::ingest::{parse_date, DocFormat};
use crate::peaks::PeakParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub range: DateRange,
    #[serde(default)]
    pub peaks: PeakParams,
    #[serde(default)]
    pub align: AlignConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub documents: Option<PathBuf>,
    pub format: Option<DocFormat>,
    pub gazetteer: Option<PathBuf>,
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "default_hazards")]
    pub hazards: Vec<Hazard>,
}

fn default_target() -> String {
    "Brasilien".to_string()
}

fn default_hazards() -> Vec<Hazard> {
    Hazard::ALL.to_vec()
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            documents: None,
            format: None,
            gazetteer: None,
            target: default_target(),
            hazards: default_hazards(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    #[serde(deserialize_with = "de_date")]
    pub start: NaiveDate,
    #[serde(deserialize_with = "de_date")]
    pub end: NaiveDate,
}

impl Default for DateRange {
    fn default() -> Self {
        DateRange {
            start: NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
        }
    }
}

/// Dates may be written quoted or as bare TOML dates.
fn de_date<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<NaiveDate, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Toml(toml::value::Datetime),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Toml(dt) => dt.to_string(),
    };
    parse_date(&text).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistrySource {
    pub source: Source,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignConfig {
    #[serde(default = "default_window")]
    pub window_days: i64,
    #[serde(default)]
    pub registry: Vec<RegistrySource>,
    #[serde(default)]
    pub type_map: BTreeMap<String, TypeMapping>,
    #[serde(default)]
    pub status_accept: BTreeMap<Source, Vec<String>>,
}

fn default_window() -> i64 {
    DEFAULT_WINDOW_DAYS
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            window_days: DEFAULT_WINDOW_DAYS,
            registry: Vec::new(),
            type_map: BTreeMap::new(),
            status_accept: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("attn-peaks-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Parse TOML and resolve relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.input.documents.as_mut() {
            fix(p);
        }
        if let Some(p) = self.input.gazetteer.as_mut() {
            fix(p);
        }
        for r in &mut self.align.registry {
            fix(&mut r.path);
        }
        fix(&mut self.output.dir);
    }

    pub fn document_format(&self) -> Option<DocFormat> {
        self.input
            .format
            .or_else(|| self.input.documents.as_deref().map(DocFormat::from_path))
    }

    pub fn registry_config(&self) -> RegistryConfig {
        RegistryConfig::default().merged(RegistryConfig {
            type_map: self.align.type_map.clone(),
            status_accept: self.align.status_accept.clone(),
        })
    }

    /// Parameter checks that need no file system access.
    pub fn validate_params(&self) -> Result<()> {
        if self.range.start > self.range.end {
            return Err(Error::Config(format!(
                "range start {} is after end {}",
                self.range.start, self.range.end
            )));
        }
        self.peaks.validate()?;
        if self.align.window_days < 0 {
            return Err(Error::Config(format!(
                "window_days must be >= 0, got {}",
                self.align.window_days
            )));
        }
        if self.input.hazards.is_empty() {
            return Err(Error::Config("no hazards selected".into()));
        }
        let mut seen = HashSet::new();
        for h in &self.input.hazards {
            if !seen.insert(h) {
                return Err(Error::Config(format!("hazard {h} listed twice")));
            }
        }
        let mut sources = HashSet::new();
        for r in &self.align.registry {
            if !sources.insert(r.source) {
                return Err(Error::Config(format!(
                    "more than one registry file for source {}",
                    r.source
                )));
            }
        }
        Ok(())
    }

    /// Full validation including existence of every referenced input file.
    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        let docs = self
            .input
            .documents
            .as_ref()
            .ok_or_else(|| Error::Config("no documents file given (input.documents or --documents)".into()))?;
        let mut paths: Vec<(&str, &Path)> = vec![("documents", docs)];
        if let Some(g) = &self.input.gazetteer {
            paths.push(("gazetteer", g));
        }
        for r in &self.align.registry {
            paths.push(("registry", &r.path));
        }
        for (role, p) in paths {
            if !p.is_file() {
                return Err(Error::Config(format!("{role} file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_has_defaults() {
        let cfg = PipelineConfig::from_toml("", Path::new("/base")).unwrap();
        assert_eq!(cfg.range, DateRange::default());
        assert_eq!(cfg.peaks, PeakParams::default());
        assert_eq!(cfg.align.window_days, 5);
        assert_eq!(cfg.input.target, "Brasilien");
        assert_eq!(cfg.input.hazards, [Hazard::Landslide, Hazard::Fire]);
        assert_eq!(cfg.output.dir, Path::new("/base/attn-peaks-out"));
        assert!(cfg.validate_params().is_ok());
        // documents are the one required key
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn full_config_parses_and_resolves_paths() {
        let text = r#"
[input]
documents = "news.jsonl"
gazetteer = "/abs/countries.txt"
hazards = ["fire"]

[range]
start = 2020-01-01
end = "2020-12-31"

[peaks]
min_height = 3

[align]
window_days = 2

[[align.registry]]
source = "EMDAT"
path = "emdat.csv"

[align.type_map]
"Volcanic activity" = "ignore"

[align.status_accept]
S2ID = ["reconhecido"]
"#;
        let cfg = PipelineConfig::from_toml(text, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.input.documents.as_deref(), Some(Path::new("/cfg/news.jsonl")));
        assert_eq!(cfg.input.gazetteer.as_deref(), Some(Path::new("/abs/countries.txt")));
        assert_eq!(cfg.document_format(), Some(DocFormat::Jsonl));
        assert_eq!(cfg.range.start, NaiveDate::from_ymd_opt(2020, 1, 1).unwrap());
        assert_eq!(cfg.peaks, PeakParams { min_height: 3, min_distance: 7 });
        assert_eq!(cfg.align.registry[0].path, Path::new("/cfg/emdat.csv"));
        let reg = cfg.registry_config();
        assert_eq!(reg.type_map["Volcanic activity"], TypeMapping::Ignore);
        assert!(reg.type_map.contains_key("Wildfire"));
        assert_eq!(reg.status_accept[&Source::S2id], ["reconhecido"]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(PipelineConfig::from_toml("[peaks]\nmin_height = \"x\"", Path::new("")).is_err());
        assert!(PipelineConfig::from_toml("[bogus]\n", Path::new("")).is_err());
        assert!(PipelineConfig::from_toml("[range]\nstart = \"2020-02-30\"\nend = \"2020-03-01\"", Path::new("")).is_err());
        let cfg = PipelineConfig::from_toml("[range]\nstart = \"2021-01-01\"\nend = \"2020-01-01\"", Path::new("")).unwrap();
        assert!(cfg.validate_params().is_err());
        let cfg = PipelineConfig::from_toml("[align]\nwindow_days = -1", Path::new("")).unwrap();
        assert!(cfg.validate_params().is_err());
    }

    #[test]
    fn missing_registry_path_is_named() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("docs.csv"), "id,date,outlet,text_type,hazard,text\n").unwrap();
        let text = "[input]\ndocuments = \"docs.csv\"\n[[align.registry]]\nsource = \"S2ID\"\npath = \"nope.csv\"\n";
        let cfg = PipelineConfig::from_toml(text, dir.path()).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("nope.csv"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
