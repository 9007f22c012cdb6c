use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{TimeZone, Utc};
use platekit_core::classifier::load_model;
use platekit_core::config::Config;
use platekit_core::pipeline::{read_plate, PipelineConfig};
use platekit_core::plate_type::PlateType;
use platekit_core::KnnModel;
use platekit_parking::{Gate, Journal, Recognizer, Tariff};

use super::{load_config, load_image, usage_error};

/// Recognizer backed by the full pipeline; the image arrives as a file path
/// because the simulated camera hands over captured frames on disk.
struct PipelineRecognizer {
    model: KnnModel,
    pipeline: PipelineConfig,
}

impl Recognizer for PipelineRecognizer {
    fn read_image(&mut self, path: &str) -> Option<(String, PlateType)> {
        let img = load_image(Path::new(path)).ok()?;
        let outcome = read_plate(&img, &self.model, &self.pipeline).ok()?;
        let best = outcome.readings.into_iter().next()?;
        Some((best.text, best.plate_type))
    }
}

fn build_gate(cfg: &Config, journal: &Path, model: KnnModel) -> Result<Gate<PipelineRecognizer>> {
    let recognizer = PipelineRecognizer {
        model,
        pipeline: cfg.pipeline.clone(),
    };
    let journal = Journal::open(journal).with_context(|| journal.display().to_string())?;
    // Logical epoch for scripted runs; live mode advances it by wall ticks.
    let base = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    Ok(Gate::new(
        recognizer,
        journal,
        Tariff::from_settings(&cfg.tariff),
        cfg.gate.clone(),
        base,
    ))
}

pub fn run(
    config: Option<&Path>,
    journal: &Path,
    model_path: &Path,
    listen: Option<&str>,
    pipe: bool,
) -> Result<u8> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let model = match load_model(model_path) {
        Ok(m) => m.with_normalize(cfg.normalize_features),
        Err(e) => return usage_error(format!("{}: {e}", model_path.display())),
    };
    if !pipe && listen.is_none() {
        return usage_error("serve needs either --pipe or --listen <addr>");
    }
    let mut gate = build_gate(&cfg, journal, model)?;

    if pipe {
        // Scenario mode: `<tick> <payload>` per stdin line, transcript lines
        // on stdout as they happen.
        let stdin = std::io::stdin();
        let mut stdout = std::io::stdout();
        for (i, line) in stdin.lock().lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((tick_text, payload)) = trimmed.split_once(' ') else {
                eprintln!("line {}: expected `<tick> <payload>`", i + 1);
                return Ok(1);
            };
            let Ok(tick) = tick_text.parse::<u64>() else {
                eprintln!("line {}: bad tick {tick_text:?}", i + 1);
                return Ok(1);
            };
            if tick < gate.tick() {
                eprintln!("line {}: tick {tick} goes backwards", i + 1);
                return Ok(1);
            }
            gate.advance_to(tick);
            for out in gate.handle_line(payload)? {
                writeln!(stdout, "{tick} {out}")?;
            }
            stdout.flush()?;
        }
        return Ok(0);
    }

    let addr = listen.expect("checked above");
    let listener = std::net::TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
    eprintln!("gate service listening on {addr}");
    let started = std::time::Instant::now();
    for stream in listener.incoming() {
        let stream = stream?;
        let mut writer = stream.try_clone()?;
        let reader = BufReader::new(stream);
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            gate.advance_to(started.elapsed().as_millis() as u64);
            for out in gate.handle_line(trimmed)? {
                writeln!(writer, "{out}")?;
            }
            writer.flush()?;
        }
    }
    Ok(0)
}
