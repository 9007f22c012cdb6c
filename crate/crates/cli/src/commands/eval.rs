use std::path::Path;

use anyhow::{Context, Result};
use platekit_core::classifier::load_model;
use platekit_core::imaging::Rect;
use platekit_core::pipeline::batch_evaluate;
use platekit_core::plate_type::PlateType;
use platekit_core::synth::{PlateTruth, SyntheticScene};

use super::{load_config, load_image, usage_error};

/// Parse one `file|text|type|tilt|x,y,w,h` manifest line.
fn parse_manifest_line(line: &str) -> Option<(String, PlateTruth)> {
    let mut fields = line.split('|');
    let file = fields.next()?.to_string();
    let text = fields.next()?.to_string();
    let plate_type = PlateType::parse(fields.next()?)?;
    let tilt: f64 = fields.next()?.parse().ok()?;
    let mut nums = fields.next()?.split(',');
    let x: usize = nums.next()?.parse().ok()?;
    let y: usize = nums.next()?.parse().ok()?;
    let w: usize = nums.next()?.parse().ok()?;
    let h: usize = nums.next()?.parse().ok()?;
    if fields.next().is_some() || nums.next().is_some() {
        return None;
    }
    Some((
        file,
        PlateTruth {
            bounds: Rect::new(x, y, w, h),
            text,
            tilt,
            plate_type,
        },
    ))
}

pub fn run(scenes_dir: &Path, model_path: &Path, config: Option<&Path>, json: bool) -> Result<u8> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let model = match load_model(model_path) {
        Ok(m) => m.with_normalize(cfg.normalize_features),
        Err(e) => return usage_error(format!("{}: {e}", model_path.display())),
    };
    let manifest_path = scenes_dir.join("truth.manifest");
    let manifest = match std::fs::read_to_string(&manifest_path) {
        Ok(m) => m,
        Err(e) => return usage_error(format!("{}: {e}", manifest_path.display())),
    };

    // group truth lines per scene file, in manifest order
    let mut scenes: Vec<SyntheticScene> = Vec::new();
    let mut last_file = String::new();
    for (i, line) in manifest.lines().enumerate() {
        let (file, truth) = match parse_manifest_line(line) {
            Some(parsed) => parsed,
            None => return usage_error(format!("{}: bad line {}", manifest_path.display(), i + 1)),
        };
        if file != last_file {
            let image = load_image(&scenes_dir.join(&file))
                .with_context(|| format!("scene {}", file))?;
            scenes.push(SyntheticScene { image, truth: Vec::new() });
            last_file = file;
        }
        scenes.last_mut().expect("pushed above").truth.push(truth);
    }
    if scenes.is_empty() {
        return usage_error(format!("{}: empty manifest", manifest_path.display()));
    }

    let report = batch_evaluate(&scenes, &model, &cfg.pipeline)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render_table());
    }
    // latency is timing noise; keep it off the deterministic stdout
    eprintln!("median latency: {:.1} ms", report.median_latency_ms());
    Ok(0)
}
