//! Synthetic scene and glyph corpus generation.
//!
//! Real captures are not required anywhere in the test suites: this module
//! renders plates with a known blue strip, background color band, glyph
//! labels, tilt and scale, and reports the ground truth alongside the pixels.
//! Everything is deterministic for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::imaging::{hsv_to_rgb, open, rotate_binary, rotate_raster, BinaryImage, RasterImage, Rect};
use crate::plate_type::PlateType;
use crate::segmentation::{normalize_glyph, CharacterGlyph};

/// Built-in 30x15 stroke font; one PBM asset per class. Letters easily
/// confused with digits under outer-contour features (I with 1, O with 0)
/// are intentionally absent.
pub mod font {
    use std::sync::OnceLock;

    use crate::imaging::pnm;
    use crate::imaging::BinaryImage;

    macro_rules! font_assets {
        ($($label:literal),+ $(,)?) => {
            &[$(($label, include_bytes!(concat!("../assets/font/", $label, ".pbm")) as &[u8])),+]
        };
    }

    static FILES: &[(&str, &[u8])] = font_assets![
        "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "A", "B", "C", "D", "E", "F", "G",
        "H", "J", "K", "L", "M", "N", "P", "Q", "R", "S", "T", "U", "V", "W", "X", "Y", "Z",
    ];

    static GLYPHS: OnceLock<Vec<(&'static str, BinaryImage)>> = OnceLock::new();

    fn glyphs() -> &'static [(&'static str, BinaryImage)] {
        GLYPHS.get_or_init(|| {
            FILES
                .iter()
                .map(|(label, bytes)| {
                    let img = pnm::decode_p4(bytes).expect("embedded font asset is valid P4");
                    (*label, img)
                })
                .collect()
        })
    }

    /// Class labels in alphabet order.
    pub fn labels() -> Vec<String> {
        glyphs().iter().map(|(l, _)| l.to_string()).collect()
    }

    /// Master 30x15 bitmap for a label.
    pub fn master(label: &str) -> Option<&'static BinaryImage> {
        glyphs().iter().find(|(l, _)| *l == label).map(|(_, g)| g)
    }

    pub fn class_count() -> usize {
        glyphs().len()
    }
}

/// What to render into a scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub plates: usize,
    /// Tilt sampled uniformly from this range, radians.
    pub tilt_range: (f64, f64),
    /// Scale of the nominal plate (height 64 px) sampled from this range.
    pub scale_range: (f64, f64),
    /// Fixed plate type, or None to draw one per plate.
    pub plate_type: Option<PlateType>,
    /// Number of random speckle pixels splattered over the scene.
    pub speckle: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            width: 640,
            height: 480,
            plates: 1,
            tilt_range: (0.0, 0.0),
            scale_range: (1.0, 1.0),
            plate_type: None,
            speckle: 0,
        }
    }
}

/// Ground truth for one rendered plate.
#[derive(Debug, Clone, Serialize)]
pub struct PlateTruth {
    /// Scene-coordinate box of the rendered (possibly tilted) plate.
    pub bounds: Rect,
    pub text: String,
    pub tilt: f64,
    pub plate_type: PlateType,
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub image: RasterImage,
    pub truth: Vec<PlateTruth>,
}

/// Nominal plate height at scale 1.0.
pub const NOMINAL_PLATE_HEIGHT: f64 = 64.0;
/// Strip width fraction of plate height; keeps the strip ratio near 4.
const STRIP_FRACTION: f64 = 0.25;
/// Plate width in strip widths (strip itself plus 17 body widths).
const PLATE_WIDTH_IN_STRIPS: usize = 18;

fn strip_color() -> (u8, u8, u8) {
    hsv_to_rgb(0.62, 0.80, 0.80)
}

/// Background fill for a plate type, inside the matching vote band. The
/// "yellow" band overlaps the blue localization band, so yellow plates render
/// at the band's top edge (h = 0.72) where the strip mask does not fire.
fn plate_background(plate_type: PlateType) -> (u8, u8, u8) {
    match plate_type {
        PlateType::Red => hsv_to_rgb(0.86, 0.55, 0.78),
        PlateType::Yellow => hsv_to_rgb(0.72, 0.55, 0.78),
        PlateType::White => (236, 236, 236),
    }
}

fn ink_color() -> (u8, u8, u8) {
    (22, 22, 25)
}

/// Nearest-neighbor resample of a master glyph to an arbitrary size.
fn resize_binary(src: &BinaryImage, w: usize, h: usize) -> BinaryImage {
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        let sy = (((y as f64 + 0.5) * src.height() as f64 / h as f64) as usize).min(src.height() - 1);
        for x in 0..w {
            let sx = (((x as f64 + 0.5) * src.width() as f64 / w as f64) as usize).min(src.width() - 1);
            out.set(x, y, src.get(sx, sy));
        }
    }
    out
}

/// Render one upright plate: blue strip at the left, typed background, eight
/// glyphs. Returns the raster and the glyph labels.
fn render_plate(rng: &mut ChaCha8Rng, height: usize, plate_type: PlateType) -> (RasterImage, String) {
    let strip_w = ((height as f64 * STRIP_FRACTION).round() as usize).max(4);
    let width = strip_w * PLATE_WIDTH_IN_STRIPS;
    let mut plate = RasterImage::new(width, height);
    plate.fill(plate_background(plate_type));
    for y in 0..height {
        for x in 0..strip_w {
            plate.set(x, y, strip_color());
        }
    }

    let labels = font::labels();
    let glyph_h = ((height as f64) * 0.60).round() as usize;
    let glyph_w = (glyph_h as f64 / 2.0).round() as usize;
    let pad = (width / 40).max(2);
    let body_start = strip_w + pad;
    let avail = width - body_start - pad;
    let step = avail as f64 / 8.0;

    let mut text = String::new();
    for i in 0..8 {
        let label = &labels[rng.gen_range(0..labels.len())];
        text.push_str(label);
        let master = font::master(label).expect("label comes from the font");
        let glyph = resize_binary(master, glyph_w, glyph_h);
        let gx = body_start + (i as f64 * step + (step - glyph_w as f64) / 2.0).round() as usize;
        let gy = (height - glyph_h) / 2;
        for y in 0..glyph_h {
            for x in 0..glyph_w {
                if glyph.get(x, y) {
                    plate.set(gx + x, gy + y, ink_color());
                }
            }
        }
    }
    (plate, text)
}

fn background_color_at(rng: &mut ChaCha8Rng) -> (u8, u8, u8) {
    let base = 118i32;
    let n = rng.gen_range(-14..=14);
    let v = (base + n).clamp(0, 255) as u8;
    (v, v.saturating_sub(2), v.saturating_sub(5))
}

/// Deterministic scene: textured background, a little clutter, the requested
/// plates, optional speckle. Multiple plates are stacked into horizontal
/// bands so they never overlap.
pub fn generate_scene(seed: u64, spec: &SceneSpec) -> SyntheticScene {
    assert!(spec.plates >= 1, "a scene needs at least one plate band");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image = RasterImage::new(spec.width, spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            image.set(x, y, background_color_at(&mut rng));
        }
    }

    // Clutter rectangles in non-blue hues.
    for _ in 0..rng.gen_range(2..6) {
        let w = rng.gen_range(20..90.min(spec.width));
        let h = rng.gen_range(15..70.min(spec.height));
        let x0 = rng.gen_range(0..spec.width - w);
        let y0 = rng.gen_range(0..spec.height - h);
        let hue = rng.gen_range(0.02..0.40);
        let rgb = hsv_to_rgb(hue, rng.gen_range(0.2..0.7), rng.gen_range(0.2..0.8));
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                image.set(x, y, rgb);
            }
        }
    }

    let mut truth = Vec::with_capacity(spec.plates);
    let band_h = spec.height / spec.plates;
    for band in 0..spec.plates {
        let scale = rng.gen_range(spec.scale_range.0..=spec.scale_range.1);
        let tilt = rng.gen_range(spec.tilt_range.0..=spec.tilt_range.1);
        let plate_type = spec.plate_type.unwrap_or_else(|| {
            [PlateType::Red, PlateType::Yellow, PlateType::White][rng.gen_range(0..3)]
        });
        let height = (NOMINAL_PLATE_HEIGHT * scale).round() as usize;
        let (plate, text) = render_plate(&mut rng, height, plate_type);

        // Rotate the plate and a coverage mask through the same geometry.
        let rotated = rotate_raster(&plate, tilt);
        let mut cover = BinaryImage::new(plate.width(), plate.height());
        for y in 0..plate.height() {
            for x in 0..plate.width() {
                cover.set(x, y, true);
            }
        }
        let cover = rotate_binary(&cover, tilt);

        let (rw, rh) = (rotated.width(), rotated.height());
        assert!(
            rw + 16 <= spec.width && rh + 16 <= band_h,
            "plate ({rw}x{rh}) does not fit its band ({}x{band_h}); lower the scale or plate count",
            spec.width
        );
        let x0 = rng.gen_range(8..spec.width - rw - 8);
        let y0 = band * band_h + rng.gen_range(8..band_h - rh - 8);

        let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..rh {
            for x in 0..rw {
                if cover.get(x, y) {
                    image.set(x0 + x, y0 + y, rotated.get(x, y));
                    min_x = min_x.min(x0 + x);
                    min_y = min_y.min(y0 + y);
                    max_x = max_x.max(x0 + x);
                    max_y = max_y.max(y0 + y);
                }
            }
        }
        truth.push(PlateTruth {
            bounds: Rect::new(min_x, min_y, max_x - min_x + 1, max_y - min_y + 1),
            text,
            tilt,
            plate_type,
        });
    }

    for _ in 0..spec.speckle {
        let x = rng.gen_range(0..spec.width);
        let y = rng.gen_range(0..spec.height);
        let v: u8 = if rng.gen_bool(0.5) { rng.gen_range(0..40) } else { rng.gen_range(200..=255) };
        image.set(x, y, (v, v, v));
    }

    SyntheticScene { image, truth }
}

/// Jittered glyph samples for classifier training: random render size, a
/// tilt-and-deskew round trip (the same double nearest-neighbor resampling a
/// plate crop suffers, including a small deskew estimation error), the
/// pipeline's opening, then 30x15 normalization. `samples_per_class` glyphs
/// per font class.
pub fn generate_glyph_corpus(seed: u64, samples_per_class: usize) -> Vec<(String, CharacterGlyph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(font::class_count() * samples_per_class);
    for label in font::labels() {
        let master = font::master(&label).expect("font label");
        for _ in 0..samples_per_class {
            let h = rng.gen_range(34..=46usize);
            let w = ((h as f64) * rng.gen_range(0.44..=0.56)).round() as usize;
            let theta = rng.gen_range(-8.0f64..=8.0).to_radians();
            let estimate_error = rng.gen_range(-0.005f64..=0.005);
            let sized = resize_binary(master, w.max(6), h);
            let tilted = rotate_binary(&sized, theta);
            let deskewed = rotate_binary(&tilted, -theta + estimate_error);
            let cleaned = open(&deskewed);
            let usable = if cleaned.count_foreground() == 0 { deskewed } else { cleaned };
            let bbox = crate::features::bounding_box(&usable).expect("rendered glyph is non-empty");
            let glyph = normalize_glyph(&usable, bbox, 0).expect("rendered glyph normalizes");
            out.push((label.clone(), glyph));
        }
    }
    out
}

/// Noise-free master glyph as a normalized 30x15 canvas.
pub fn master_glyph(label: &str) -> Option<CharacterGlyph> {
    let master = font::master(label)?;
    let bbox = crate::features::bounding_box(master).ok()?;
    normalize_glyph(master, bbox, 0).ok()
}
