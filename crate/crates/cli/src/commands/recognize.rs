use std::path::{Path, PathBuf};

use anyhow::Result;
use platekit_core::classifier::load_model;
use platekit_core::pipeline::read_plate;
use serde_json::json;

use super::{load_config, load_image, usage_error};

pub fn run(model_path: &Path, config: Option<&Path>, json: bool, images: &[PathBuf]) -> Result<u8> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let model = match load_model(model_path) {
        Ok(m) => m.with_normalize(cfg.normalize_features),
        Err(e) => return usage_error(format!("{}: {e}", model_path.display())),
    };

    let mut had_errors = false;
    let mut json_rows = Vec::new();
    for path in images {
        let img = match load_image(path) {
            Ok(img) => img,
            Err(e) => {
                had_errors = true;
                if json {
                    json_rows.push(json!({ "file": path, "error": format!("{e:#}") }));
                } else {
                    println!("ERR {e:#}");
                }
                continue;
            }
        };
        let outcome = read_plate(&img, &model, &cfg.pipeline)?;
        if json {
            let readings: Vec<_> = outcome
                .readings
                .iter()
                .map(|r| {
                    json!({
                        "text": r.text,
                        "type": r.plate_type.name(),
                        "elapsed_ms": r.elapsed_ms,
                        "score": r.score,
                        "box": { "x": r.bounds.x, "y": r.bounds.y, "w": r.bounds.w, "h": r.bounds.h },
                        "glyphs": r.per_glyph.iter().map(|(l, c)| json!({ "label": l, "confidence": c })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_rows.push(json!({ "file": path, "readings": readings }));
        } else if outcome.readings.is_empty() {
            println!("{} - - -", path.display());
        } else {
            for r in &outcome.readings {
                println!(
                    "{} {} {} {}",
                    path.display(),
                    r.text,
                    r.plate_type,
                    r.elapsed_ms.round() as u64
                );
            }
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&json_rows)?);
    }
    Ok(if had_errors { 1 } else { 0 })
}
