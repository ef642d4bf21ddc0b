use std::path::PathBuf;
use std::process::ExitCode;

use attn_peaks::align::Source;
use attn_peaks::config::{PipelineConfig, RegistrySource};
use attn_peaks::ingest::{parse_date, DocFormat};
use attn_peaks::pipeline::{run_stage, RunArtifacts, Stage};
use attn_peaks::{Error, Hazard};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

/// News-attention peak analysis: daily count series, news events, event
/// measures and disaster-registry alignment.
#[derive(Parser, Debug)]
#[command(name = "attn-peaks", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Filter documents and write daily counts and corpus statistics.
    Ingest,
    /// Also detect peaks and write the annotated series and events.
    Detect,
    /// Also compute per-event measures and their distributions.
    Measure,
    /// Also align events with the configured registries.
    Align,
    /// Rebuild report.json from the files already in the output directory.
    Report,
    /// Run every stage and write report.json and manifest.json.
    Run,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// First day of the series (YYYY-MM-DD).
    #[arg(long, global = true, value_parser = date_arg)]
    start: Option<NaiveDate>,

    /// Last day of the series (YYYY-MM-DD).
    #[arg(long, global = true, value_parser = date_arg)]
    end: Option<NaiveDate>,

    /// Hazards to analyze; repeat or comma-separate.
    #[arg(long, global = true, value_delimiter = ',', value_parser = hazard_arg)]
    hazard: Vec<Hazard>,

    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Document file format; guessed from the extension when omitted.
    #[arg(long, global = true, value_parser = format_arg)]
    format: Option<DocFormat>,

    /// Document file (CSV or JSON-lines).
    #[arg(long, global = true)]
    documents: Option<PathBuf>,

    /// Gazetteer file, one country name per line.
    #[arg(long, global = true)]
    gazetteer: Option<PathBuf>,

    /// Country of interest; must be a gazetteer entry.
    #[arg(long, global = true)]
    target: Option<String>,

    #[arg(long, global = true)]
    min_height: Option<u32>,

    #[arg(long, global = true)]
    min_distance: Option<u32>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    window_days: Option<i64>,

    /// Registry file as SOURCE=PATH (EMDAT, S2ID or other); repeatable.
    #[arg(long, global = true, value_parser = registry_arg)]
    registry: Vec<RegistrySource>,
}

fn date_arg(s: &str) -> Result<NaiveDate, String> {
    parse_date(s)
}

fn hazard_arg(s: &str) -> Result<Hazard, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn format_arg(s: &str) -> Result<DocFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn registry_arg(s: &str) -> Result<RegistrySource, String> {
    let (source, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected SOURCE=PATH, got {s:?}"))?;
    let source: Source = source.parse().map_err(|e: Error| e.to_string())?;
    Ok(RegistrySource {
        source,
        path: PathBuf::from(path),
    })
}

impl GlobalOpts {
    fn into_config(self) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.start {
            cfg.range.start = v;
        }
        if let Some(v) = self.end {
            cfg.range.end = v;
        }
        if !self.hazard.is_empty() {
            cfg.input.hazards = self.hazard;
        }
        if let Some(v) = self.out_dir {
            cfg.output.dir = v;
        }
        if let Some(v) = self.format {
            cfg.input.format = Some(v);
        }
        if let Some(v) = self.documents {
            cfg.input.documents = Some(v);
        }
        if let Some(v) = self.gazetteer {
            cfg.input.gazetteer = Some(v);
        }
        if let Some(v) = self.target {
            cfg.input.target = v;
        }
        if let Some(v) = self.min_height {
            cfg.peaks.min_height = v;
        }
        if let Some(v) = self.min_distance {
            cfg.peaks.min_distance = v;
        }
        if let Some(v) = self.window_days {
            cfg.align.window_days = v;
        }
        for r in self.registry {
            cfg.align.registry.retain(|existing| existing.source != r.source);
            cfg.align.registry.push(r);
        }
        cfg.validate_params()?;
        Ok(cfg)
    }
}

fn stage_of(cmd: Command) -> Stage {
    match cmd {
        Command::Ingest => Stage::Ingest,
        Command::Detect => Stage::Detect,
        Command::Measure => Stage::Measure,
        Command::Align => Stage::Align,
        Command::Report => Stage::Report,
        Command::Run => Stage::Run,
    }
}

fn print_summary(stage: Stage, artifacts: &RunArtifacts) {
    if let Some(a) = &artifacts.analysis {
        for h in &a.hazards {
            let mut line = format!(
                "{}: {} articles, {} active days",
                h.hazard, h.stats.n_articles, h.stats.n_active_days
            );
            if stage >= Stage::Detect {
                line.push_str(&format!(", {} events", h.events.len()));
            }
            if stage >= Stage::Align {
                line.push_str(&format!(
                    ", {} aligned",
                    h.events.len() - h.alignment.unmatched_events.len()
                ));
            }
            println!("{line}");
        }
    }
    println!(
        "{}: wrote {} files to {}",
        stage.as_str(),
        artifacts.files.len(),
        artifacts.out_dir.display()
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = stage_of(cli.command);
    let result = cli
        .global
        .into_config()
        .map_err(|e| e.in_stage("config"))
        .and_then(|cfg| run_stage(&cfg, stage));
    match result {
        Ok(artifacts) => {
            print_summary(stage, &artifacts);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
