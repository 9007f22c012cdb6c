//! Plate background color typing by per-pixel HSV voting.
//!
//! Each pixel votes for at most one class, checked in the order red, yellow,
//! white; the class with the most votes wins, ties resolving in that same
//! order. The default bands are deliberately kept verbatim from the original
//! pixel-vote rule even though the hue ranges are anomalous under standard
//! HSV (the "yellow" band sits on blue hues); a `standard_hue` preset is
//! provided for real imagery.

use serde::Serialize;

use crate::imaging::{rgb_to_hsv, HsvPixel, RasterImage};

/// The three plate categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PlateType {
    Red,
    Yellow,
    White,
}

impl PlateType {
    pub fn name(&self) -> &'static str {
        match self {
            PlateType::Red => "Red",
            PlateType::Yellow => "Yellow",
            PlateType::White => "White",
        }
    }

    /// Vehicle category the background color encodes.
    pub fn category(&self) -> &'static str {
        match self {
            PlateType::Red => "government",
            PlateType::Yellow => "public",
            PlateType::White => "private",
        }
    }

    pub fn parse(s: &str) -> Option<PlateType> {
        match s {
            "Red" => Some(PlateType::Red),
            "Yellow" => Some(PlateType::Yellow),
            "White" => Some(PlateType::White),
            _ => None,
        }
    }
}

impl std::fmt::Display for PlateType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// HSV acceptance region for one class. Hue wraps: if `h_min > h_max` the
/// band covers `[h_min, 1) U [0, h_max]`.
#[derive(Debug, Clone, Copy)]
pub struct ColorBand {
    pub h_min: f64,
    pub h_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub v_min: f64,
}

impl ColorBand {
    pub fn contains(&self, p: HsvPixel) -> bool {
        let hue_ok = if self.h_min <= self.h_max {
            p.h >= self.h_min && p.h <= self.h_max
        } else {
            p.h >= self.h_min || p.h <= self.h_max
        };
        hue_ok && p.s >= self.s_min && p.s <= self.s_max && p.v >= self.v_min
    }
}

#[derive(Debug, Clone)]
pub struct PlateTypeConfig {
    pub red: ColorBand,
    pub yellow: ColorBand,
    pub white: ColorBand,
}

impl PlateTypeConfig {
    /// The original thresholds: red `S>=0.45, V>=0.5, 0.8<=H<=0.94`, yellow
    /// `S>=0.45, V>=0.5, 0.58<=H<=0.74`, white `S<=0.15, V>=0.8`.
    pub fn paper() -> Self {
        PlateTypeConfig {
            red: ColorBand { h_min: 0.80, h_max: 0.94, s_min: 0.45, s_max: 1.0, v_min: 0.5 },
            yellow: ColorBand { h_min: 0.58, h_max: 0.74, s_min: 0.45, s_max: 1.0, v_min: 0.5 },
            white: ColorBand { h_min: 0.0, h_max: 1.0, s_min: 0.0, s_max: 0.15, v_min: 0.8 },
        }
    }

    /// Bands anchored on conventional hues: red near the 0/1 wrap, yellow
    /// around 0.12-0.20.
    pub fn standard_hue() -> Self {
        PlateTypeConfig {
            red: ColorBand { h_min: 0.95, h_max: 0.05, s_min: 0.45, s_max: 1.0, v_min: 0.5 },
            yellow: ColorBand { h_min: 0.12, h_max: 0.20, s_min: 0.45, s_max: 1.0, v_min: 0.5 },
            white: ColorBand { h_min: 0.0, h_max: 1.0, s_min: 0.0, s_max: 0.15, v_min: 0.8 },
        }
    }
}

impl Default for PlateTypeConfig {
    fn default() -> Self {
        PlateTypeConfig::paper()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlateTypeError {
    #[error("no pixel matched any plate color band")]
    UnknownPlateType,
}

/// Vote counts; the four fields always sum to the voted pixel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlateTypeHistogram {
    pub red_votes: usize,
    pub yellow_votes: usize,
    pub white_votes: usize,
    pub unmatched: usize,
}

impl PlateTypeHistogram {
    pub fn total(&self) -> usize {
        self.red_votes + self.yellow_votes + self.white_votes + self.unmatched
    }
}

/// Vote every pixel into the configured bands and return the majority class.
pub fn classify_plate_type(
    plate: &RasterImage,
    cfg: &PlateTypeConfig,
) -> Result<(PlateType, PlateTypeHistogram), PlateTypeError> {
    let mut hist = PlateTypeHistogram {
        red_votes: 0,
        yellow_votes: 0,
        white_votes: 0,
        unmatched: 0,
    };
    for y in 0..plate.height() {
        for x in 0..plate.width() {
            let (r, g, b) = plate.get(x, y);
            let p = rgb_to_hsv(r, g, b);
            if cfg.red.contains(p) {
                hist.red_votes += 1;
            } else if cfg.yellow.contains(p) {
                hist.yellow_votes += 1;
            } else if cfg.white.contains(p) {
                hist.white_votes += 1;
            } else {
                hist.unmatched += 1;
            }
        }
    }
    if hist.red_votes == 0 && hist.yellow_votes == 0 && hist.white_votes == 0 {
        return Err(PlateTypeError::UnknownPlateType);
    }
    // max(Class), ties resolved red > yellow > white
    let kind = if hist.red_votes >= hist.yellow_votes && hist.red_votes >= hist.white_votes {
        PlateType::Red
    } else if hist.yellow_votes >= hist.white_votes {
        PlateType::Yellow
    } else {
        PlateType::White
    };
    Ok((kind, hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::hsv_to_rgb;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(rgb: (u8, u8, u8)) -> RasterImage {
        let mut img = RasterImage::new(20, 10);
        img.fill(rgb);
        img
    }

    #[test]
    fn red_band_uniform_image() {
        let img = uniform(hsv_to_rgb(0.85, 0.5, 0.6));
        let (kind, hist) = classify_plate_type(&img, &PlateTypeConfig::paper()).unwrap();
        assert_eq!(kind, PlateType::Red);
        assert_eq!(hist.red_votes, 200);
        assert_eq!(hist.total(), 200);
    }

    #[test]
    fn white_band_uniform_image() {
        let img = uniform(hsv_to_rgb(0.3, 0.1, 0.9));
        let (kind, hist) = classify_plate_type(&img, &PlateTypeConfig::paper()).unwrap();
        assert_eq!(kind, PlateType::White);
        assert_eq!(hist.white_votes, 200);
    }

    #[test]
    fn majority_wins_on_mixed_image() {
        // 60% yellow-band pixels, 40% white-band pixels
        let mut img = RasterImage::new(10, 10);
        let yellow = hsv_to_rgb(0.66, 0.6, 0.7);
        let white = hsv_to_rgb(0.0, 0.05, 0.9);
        for i in 0..100 {
            let rgb = if i < 60 { yellow } else { white };
            img.set(i % 10, i / 10, rgb);
        }
        let (kind, hist) = classify_plate_type(&img, &PlateTypeConfig::paper()).unwrap();
        assert_eq!(kind, PlateType::Yellow);
        assert_eq!(hist.yellow_votes, 60);
        assert_eq!(hist.white_votes, 40);
        assert_eq!(hist.unmatched, 0);
    }

    #[test]
    fn unmatched_image_is_unknown() {
        let img = uniform((0, 0, 0));
        assert_eq!(
            classify_plate_type(&img, &PlateTypeConfig::paper()),
            Err(PlateTypeError::UnknownPlateType)
        );
    }

    #[test]
    fn result_invariant_under_pixel_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut colors: Vec<(u8, u8, u8)> = Vec::new();
        for i in 0..100 {
            colors.push(match i % 4 {
                0 => hsv_to_rgb(0.85, 0.6, 0.7),
                1 => hsv_to_rgb(0.66, 0.6, 0.7),
                2 => hsv_to_rgb(0.0, 0.05, 0.95),
                _ => (30, 30, 30),
            });
        }
        let build = |cs: &[(u8, u8, u8)]| {
            let mut img = RasterImage::new(10, 10);
            for (i, &c) in cs.iter().enumerate() {
                img.set(i % 10, i / 10, c);
            }
            img
        };
        let base = classify_plate_type(&build(&colors), &PlateTypeConfig::paper()).unwrap();
        for _ in 0..10 {
            colors.shuffle(&mut rng);
            let got = classify_plate_type(&build(&colors), &PlateTypeConfig::paper()).unwrap();
            assert_eq!(got, base);
        }
    }

    #[test]
    fn widening_a_band_never_loses_votes() {
        let mut img = RasterImage::new(16, 16);
        for y in 0..16 {
            for x in 0..16 {
                img.set(x, y, hsv_to_rgb(x as f64 / 16.0, 0.6, 0.7));
            }
        }
        let mut narrow = PlateTypeConfig::paper();
        narrow.red = ColorBand { h_min: 0.82, h_max: 0.90, s_min: 0.45, s_max: 1.0, v_min: 0.5 };
        let (_, before) = classify_plate_type(&img, &narrow).unwrap();
        let mut wide = narrow.clone();
        wide.red = ColorBand { h_min: 0.78, h_max: 0.94, s_min: 0.45, s_max: 1.0, v_min: 0.5 };
        let (_, after) = classify_plate_type(&img, &wide).unwrap();
        assert!(after.red_votes >= before.red_votes);
    }

    #[test]
    fn wraparound_band_matches_both_sides() {
        let band = ColorBand { h_min: 0.95, h_max: 0.05, s_min: 0.0, s_max: 1.0, v_min: 0.0 };
        assert!(band.contains(HsvPixel { h: 0.99, s: 0.5, v: 0.5 }));
        assert!(band.contains(HsvPixel { h: 0.02, s: 0.5, v: 0.5 }));
        assert!(!band.contains(HsvPixel { h: 0.5, s: 0.5, v: 0.5 }));
    }

    #[test]
    fn tie_breaks_red_over_yellow_over_white() {
        let mut img = RasterImage::new(2, 1);
        img.set(0, 0, hsv_to_rgb(0.85, 0.6, 0.7)); // red band
        img.set(1, 0, hsv_to_rgb(0.66, 0.6, 0.7)); // yellow band
        let (kind, _) = classify_plate_type(&img, &PlateTypeConfig::paper()).unwrap();
        assert_eq!(kind, PlateType::Red);

        let mut img2 = RasterImage::new(2, 1);
        img2.set(0, 0, hsv_to_rgb(0.66, 0.6, 0.7)); // yellow band
        img2.set(1, 0, hsv_to_rgb(0.0, 0.05, 0.9)); // white band
        let (kind2, _) = classify_plate_type(&img2, &PlateTypeConfig::paper()).unwrap();
        assert_eq!(kind2, PlateType::Yellow);
    }
}
