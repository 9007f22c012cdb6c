//! Character segmentation: from a deskewed plate crop to an ordered list of
//! normalized 30x15 glyphs.
//!
//! The plate is binarized, complemented so strokes are foreground, opened to
//! shed speckle, and component-labelled. Components that look like characters
//! are kept, ordered left to right, and each is cropped to its bounding box
//! and resampled to the 30x15 canvas.

use std::fs;
use std::path::{Path, PathBuf};

use crate::imaging::pnm;
use crate::imaging::{
    complement, grayscale, open, threshold_binarize, BinaryImage, ComponentLabeling, RasterImage,
    Rect,
};

/// Normalized glyph canvas: 15 columns by 30 rows.
pub const GLYPH_WIDTH: usize = 15;
pub const GLYPH_HEIGHT: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum SegmentationError {
    #[error("no character-sized regions found on the plate")]
    NoCharacters,
    #[error("glyph region has no foreground pixels")]
    EmptyGlyph,
    #[error("glyph corpus entry {path}: {message}")]
    Corpus { path: PathBuf, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Character-region filters. Fractions are relative to the plate crop.
#[derive(Debug, Clone)]
pub struct SegmentationConfig {
    /// Minimum component area as a fraction of plate area.
    pub min_char_area_frac: f64,
    /// Minimum component height as a fraction of plate height.
    pub min_char_height_frac: f64,
    /// Maximum component width as a fraction of plate width; rejects
    /// plate-wide blobs (frames, uniform crops) that are never characters.
    pub max_char_width_frac: f64,
    /// Keep at most this many regions (largest by area win).
    pub max_chars: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            min_char_area_frac: 0.01,
            min_char_height_frac: 0.40,
            max_char_width_frac: 0.35,
            max_chars: 8,
        }
    }
}

/// A character glyph on the normalized 30x15 canvas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterGlyph {
    bits: BinaryImage,
    /// Left-to-right position on the source plate.
    pub index: usize,
    /// Component bounding box in plate coordinates.
    pub source_box: Rect,
}

impl CharacterGlyph {
    /// Wrap a 15x30 canvas; it must contain at least one foreground pixel.
    pub fn new(bits: BinaryImage, index: usize, source_box: Rect) -> Result<Self, SegmentationError> {
        if bits.width() != GLYPH_WIDTH || bits.height() != GLYPH_HEIGHT {
            return Err(SegmentationError::Corpus {
                path: PathBuf::new(),
                message: format!(
                    "glyph canvas must be {GLYPH_WIDTH}x{GLYPH_HEIGHT}, got {}x{}",
                    bits.width(),
                    bits.height()
                ),
            });
        }
        if bits.count_foreground() == 0 {
            return Err(SegmentationError::EmptyGlyph);
        }
        Ok(CharacterGlyph { bits, index, source_box })
    }

    pub fn bits(&self) -> &BinaryImage {
        &self.bits
    }
}

/// Binarize a plate crop, flip it so strokes are foreground, then open.
///
/// Opening runs on the stroke-foreground image (the dual of closing the
/// bright side), which is what actually removes isolated dark speckle before
/// labeling.
pub fn prepare_plate(plate: &RasterImage) -> BinaryImage {
    let binary = threshold_binarize(&grayscale(plate));
    open(&complement(&binary))
}

/// Select character components and return their boxes ordered left to right.
pub fn pick_glyph_regions(
    labeling: &ComponentLabeling,
    cfg: &SegmentationConfig,
) -> Result<Vec<Rect>, SegmentationError> {
    let plate_area = (labeling.width * labeling.height) as f64;
    let min_area = cfg.min_char_area_frac * plate_area;
    let min_height = cfg.min_char_height_frac * labeling.height as f64;
    let max_width = cfg.max_char_width_frac * labeling.width as f64;

    let mut picked: Vec<(Rect, usize)> = labeling
        .boxes
        .iter()
        .zip(labeling.areas.iter())
        .filter(|(b, &a)| {
            a as f64 >= min_area && b.h as f64 >= min_height && (b.w as f64) <= max_width
        })
        .map(|(b, &a)| (*b, a))
        .collect();

    if picked.is_empty() {
        return Err(SegmentationError::NoCharacters);
    }
    if picked.len() > cfg.max_chars {
        picked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.x.cmp(&b.0.x)));
        picked.truncate(cfg.max_chars);
    }
    picked.sort_by(|a, b| a.0.x.cmp(&b.0.x).then(a.0.y.cmp(&b.0.y)));
    Ok(picked.into_iter().map(|(b, _)| b).collect())
}

/// Center-aligned nearest-neighbor index: source row/column for a
/// destination index.
#[inline]
fn resample_index(dst: usize, dst_len: usize, src_len: usize) -> usize {
    let src = ((dst as f64 + 0.5) * src_len as f64 / dst_len as f64).floor() as usize;
    src.min(src_len - 1)
}

fn resize_to_canvas(src: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(GLYPH_WIDTH, GLYPH_HEIGHT);
    for y in 0..GLYPH_HEIGHT {
        let sy = resample_index(y, GLYPH_HEIGHT, src.height());
        for x in 0..GLYPH_WIDTH {
            let sx = resample_index(x, GLYPH_WIDTH, src.width());
            out.set(x, y, src.get(sx, sy));
        }
    }
    out
}

/// Crop a component box, tighten it to the content, and resample to 30x15.
///
/// A second tighten-and-resample pass runs if downsampling dropped the
/// extreme rows or columns, so the output always touches all four canvas
/// edges. Integer upscales and identity copies are exact under the
/// center-aligned sampling and never trigger the second pass.
pub fn normalize_glyph(
    plate: &BinaryImage,
    source_box: Rect,
    index: usize,
) -> Result<CharacterGlyph, SegmentationError> {
    let crop = plate.crop(source_box);
    let tight = crate::features::bounding_box(&crop).map_err(|_| SegmentationError::EmptyGlyph)?;
    let mut canvas = resize_to_canvas(&crop.crop(tight));

    let frame = crate::features::bounding_box(&canvas).map_err(|_| SegmentationError::EmptyGlyph)?;
    if frame != Rect::new(0, 0, GLYPH_WIDTH, GLYPH_HEIGHT) {
        canvas = resize_to_canvas(&canvas.crop(frame));
    }
    CharacterGlyph::new(canvas, index, source_box)
}

/// Write glyphs as `<label>_<serial>.pbm` files (P4, 15x30), the layout the
/// training loader consumes. Serial numbers count per label.
pub fn save_glyph_corpus(
    dir: impl AsRef<Path>,
    items: &[(String, CharacterGlyph)],
) -> Result<(), SegmentationError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut serial_for: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for (label, glyph) in items {
        let serial = serial_for.entry(label.as_str()).or_insert(0);
        let path = dir.join(format!("{label}_{serial:04}.pbm"));
        pnm::write_p4(&path, glyph.bits()).map_err(|e| SegmentationError::Corpus {
            path: path.clone(),
            message: e.to_string(),
        })?;
        *serial += 1;
    }
    Ok(())
}

/// Load a glyph corpus directory; files sort by name so ordering is stable.
pub fn load_glyph_corpus(dir: impl AsRef<Path>) -> Result<Vec<(String, CharacterGlyph)>, SegmentationError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "pbm").unwrap_or(false))
        .collect();
    paths.sort();

    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| SegmentationError::Corpus {
                path: path.clone(),
                message: "non-utf8 file name".into(),
            })?;
        let label = match stem.rsplit_once('_') {
            Some((label, _serial)) if !label.is_empty() => label.to_string(),
            _ => {
                return Err(SegmentationError::Corpus {
                    path: path.clone(),
                    message: "file name must match <label>_<serial>.pbm".into(),
                })
            }
        };
        let bits = pnm::read_p4(&path).map_err(|e| SegmentationError::Corpus {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let glyph = CharacterGlyph::new(bits, out.len(), Rect::new(0, 0, GLYPH_WIDTH, GLYPH_HEIGHT))
            .map_err(|e| SegmentationError::Corpus {
                path: path.clone(),
                message: e.to_string(),
            })?;
        out.push((label, glyph));
    }
    Ok(out)
}
