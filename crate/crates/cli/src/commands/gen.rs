use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use platekit_core::imaging::bmp;
use platekit_core::plate_type::PlateType;
use platekit_core::segmentation::save_glyph_corpus;
use platekit_core::synth::{generate_glyph_corpus, generate_scene, SceneSpec};

use super::usage_error;

pub struct GenArgs {
    pub seed: u64,
    pub count: usize,
    pub out: PathBuf,
    pub plates: usize,
    pub tilt_max_deg: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub plate_type: String,
    pub speckle: usize,
    pub glyphs: Option<usize>,
}

pub fn run(args: GenArgs) -> Result<u8> {
    if let Some(per_class) = args.glyphs {
        if per_class == 0 {
            return usage_error("--glyphs needs at least one sample per class");
        }
        let corpus = generate_glyph_corpus(args.seed, per_class);
        save_glyph_corpus(&args.out, &corpus)?;
        println!("wrote {} glyphs to {}", corpus.len(), args.out.display());
        return Ok(0);
    }

    let plate_type = match args.plate_type.as_str() {
        "red" => Some(PlateType::Red),
        "yellow" => Some(PlateType::Yellow),
        "white" => Some(PlateType::White),
        "random" => None,
        other => return usage_error(format!("--plate-type {other:?} (want red|yellow|white|random)")),
    };
    if args.count == 0 {
        return usage_error("--count must be at least 1");
    }
    if !(args.scale_min > 0.0 && args.scale_max >= args.scale_min) {
        return usage_error("--scale-min/--scale-max must satisfy 0 < min <= max");
    }
    if !(0.0..=45.0).contains(&args.tilt_max_deg) {
        return usage_error("--tilt-max must be within 0..45 degrees");
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let tilt = args.tilt_max_deg.to_radians();
    let spec = SceneSpec {
        plates: args.plates,
        tilt_range: (-tilt, tilt),
        scale_range: (args.scale_min, args.scale_max),
        plate_type,
        speckle: args.speckle,
        ..SceneSpec::default()
    };

    let mut manifest = String::new();
    for i in 0..args.count {
        let scene = generate_scene(args.seed.wrapping_add(i as u64), &spec);
        let name = format!("scene_{i:04}.bmp");
        bmp::write(args.out.join(&name), &scene.image)?;
        for truth in &scene.truth {
            writeln!(
                manifest,
                "{name}|{}|{}|{:.6}|{},{},{},{}",
                truth.text,
                truth.plate_type,
                truth.tilt,
                truth.bounds.x,
                truth.bounds.y,
                truth.bounds.w,
                truth.bounds.h
            )?;
        }
    }
    std::fs::write(args.out.join("truth.manifest"), manifest)?;
    println!(
        "wrote {} scenes ({} plates each) to {}",
        args.count,
        args.plates,
        args.out.display()
    );
    Ok(0)
}
