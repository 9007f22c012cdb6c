use std::path::Path;

use anyhow::Result;
use platekit_core::classifier::{
    evaluate, save_model, split_train_test, ClassifierError, KnnModel, LabeledSample,
};
use platekit_core::features::chain_code_features;
use platekit_core::segmentation::{load_glyph_corpus, SegmentationError};

use super::{load_config, usage_error};

pub fn run(
    corpus: &Path,
    out: &Path,
    ratio: f64,
    seed: u64,
    k: Option<usize>,
    config: Option<&Path>,
    json: bool,
) -> Result<u8> {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    if !(ratio > 0.0 && ratio < 1.0) {
        return usage_error(format!("--ratio {ratio} must be strictly between 0 and 1"));
    }
    let k = k.unwrap_or(cfg.k);
    if k < 1 {
        return usage_error("--k must be at least 1");
    }

    let glyphs = match load_glyph_corpus(corpus) {
        Ok(g) if g.is_empty() => {
            return usage_error(format!("{}: corpus directory holds no .pbm glyphs", corpus.display()))
        }
        Ok(g) => g,
        Err(SegmentationError::Corpus { path, message }) => {
            return usage_error(format!("{}: {message}", path.display()))
        }
        Err(e) => return usage_error(format!("{}: {e}", corpus.display())),
    };

    let mut samples = Vec::with_capacity(glyphs.len());
    for (label, glyph) in &glyphs {
        if !cfg.alphabet.contains(label) {
            return usage_error(format!(
                "corpus label {label:?} is not in the configured alphabet; adjust [classifier] alphabet"
            ));
        }
        samples.push(LabeledSample::new(chain_code_features(glyph), label.clone()));
    }

    let (train, test) = match split_train_test(&samples, ratio, seed) {
        Ok(parts) => parts,
        Err(e @ (ClassifierError::InvalidRatio(_) | ClassifierError::StratifyError { .. })) => {
            return usage_error(e)
        }
        Err(e) => return Err(e.into()),
    };

    let model = KnnModel::new(train, cfg.alphabet.clone(), k)?.with_normalize(cfg.normalize_features);
    let report = evaluate(&model, &test)?;
    save_model(&model, out)?;

    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render_table());
        println!("model: {} samples, k={k} -> {}", model.samples().len(), out.display());
    }
    Ok(0)
}
