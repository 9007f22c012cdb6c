//! Plate localization anchored on the blue registration strip.
//!
//! Every plate carries a tall, narrow blue strip at its left edge. The scene
//! is masked to the configured blue band, speckle is opened away, and each
//! surviving component is screened by geometry measured with rotation-
//! invariant second moments (a tilted strip keeps its height/width ratio).
//! The plate body is predicted to extend rightward from the strip; a
//! color-jump scan across the deskewed crop verifies that characters are
//! actually present.

use crate::imaging::{
    connected_components, grayscale, open, rgb_to_hsv, threshold_binarize, BinaryImage,
    RasterImage, Rect,
};

/// Blue-band thresholds and plate geometry factors; all overridable from the
/// pipeline config file.
#[derive(Debug, Clone)]
pub struct LocalizationConfig {
    pub blue_h_min: f64,
    pub blue_h_max: f64,
    pub blue_s_min: f64,
    pub blue_v_min: f64,
    /// Minimum strip component area in pixels.
    pub min_strip_area: usize,
    /// Strip height/width band; the strip is tall and narrow.
    pub strip_ratio_min: f64,
    pub strip_ratio_max: f64,
    /// Plate body width in strip widths, measured from the strip's right edge.
    pub plate_width_factor: f64,
    /// Accepted plate aspect (width/height) band.
    pub aspect_min: f64,
    pub aspect_max: f64,
    /// Minimum median color-jump count for a verified candidate.
    pub min_jumps: u32,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        LocalizationConfig {
            blue_h_min: 0.55,
            blue_h_max: 0.70,
            blue_s_min: 0.40,
            blue_v_min: 0.30,
            min_strip_area: 80,
            strip_ratio_min: 3.0,
            strip_ratio_max: 8.0,
            plate_width_factor: 17.0,
            aspect_min: 3.5,
            aspect_max: 6.0,
            min_jumps: 12,
        }
    }
}

/// A plate hypothesis anchored on one blue strip component.
#[derive(Debug, Clone)]
pub struct PlateCandidate {
    /// Scene-coordinate box containing the (possibly tilted) plate.
    pub bounds: Rect,
    /// Bounding box of the anchoring blue strip component.
    pub blue_box: Rect,
    /// Strip inclination versus vertical, radians in `[-pi/4, pi/4]`.
    pub tilt: f64,
    /// Color-jump verification score; filled by [`verify_candidate`].
    pub score: u32,
    /// Strip centroid, the fixed point of the deskew rotation.
    pub anchor: (f64, f64),
    /// Plate rectangle in the deskewed frame: left, top, width, height.
    pub deskewed_rect: [f64; 4],
    /// Strip width estimate in pixels.
    pub strip_width: f64,
}

/// Deskewed plate crop ready for segmentation.
#[derive(Debug, Clone)]
pub struct PlateRegion {
    pub pixels: RasterImage,
    /// Top-left of the candidate box in scene coordinates.
    pub origin: (usize, usize),
    pub tilt_applied: f64,
    /// Width of the blue strip at the crop's left edge; the character body
    /// and the plate-type vote run right of it.
    pub strip_width: usize,
    /// Set when the crop reached past the image border and was padded black.
    pub clipped: bool,
}

impl PlateRegion {
    /// The crop minus the blue strip.
    pub fn body_box(&self) -> Rect {
        let left = self.strip_width.min(self.pixels.width().saturating_sub(1));
        Rect::new(left, 0, self.pixels.width() - left, self.pixels.height())
    }
}

/// Pixels inside the configured blue band, opened once to drop speckle.
pub fn blue_mask(img: &RasterImage, cfg: &LocalizationConfig) -> BinaryImage {
    let mut mask = BinaryImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (r, g, b) = img.get(x, y);
            let p = rgb_to_hsv(r, g, b);
            let hit = p.h >= cfg.blue_h_min
                && p.h <= cfg.blue_h_max
                && p.s >= cfg.blue_s_min
                && p.v >= cfg.blue_v_min;
            mask.set(x, y, hit);
        }
    }
    open(&mask)
}

struct StripStats {
    centroid: (f64, f64),
    /// Major/minor extents from central second moments; tilt-invariant.
    height: f64,
    width: f64,
    tilt: f64,
    rows: usize,
}

/// Least-squares fit of per-row centroids plus moment-based extents for one
/// component, identified by its label within the bounding box.
fn strip_stats(labels: &crate::imaging::ComponentLabeling, label: u32, bbox: Rect) -> StripStats {
    let mut n = 0f64;
    let (mut sx, mut sy) = (0f64, 0f64);
    // per-row accumulation for the centroid line fit
    let mut row_sum: Vec<(f64, f64)> = Vec::with_capacity(bbox.h); // (count, sum_x) per row
    row_sum.resize(bbox.h, (0.0, 0.0));
    for y in bbox.y..bbox.bottom() {
        for x in bbox.x..bbox.right() {
            if labels.label_at(x, y) == label {
                n += 1.0;
                sx += x as f64;
                sy += y as f64;
                let r = &mut row_sum[y - bbox.y];
                r.0 += 1.0;
                r.1 += x as f64;
            }
        }
    }
    let cx = sx / n;
    let cy = sy / n;

    let (mut mxx, mut myy, mut mxy) = (0f64, 0f64, 0f64);
    for y in bbox.y..bbox.bottom() {
        for x in bbox.x..bbox.right() {
            if labels.label_at(x, y) == label {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                mxx += dx * dx;
                myy += dy * dy;
                mxy += dx * dy;
            }
        }
    }
    mxx /= n;
    myy /= n;
    mxy /= n;
    let mean = (mxx + myy) / 2.0;
    let spread = (((mxx - myy) / 2.0).powi(2) + mxy * mxy).sqrt();
    let l_major = mean + spread;
    let l_minor = (mean - spread).max(0.0);
    // A solid bar of extent w has variance (w^2 - 1) / 12.
    let height = (12.0 * l_major + 1.0).sqrt();
    let width = (12.0 * l_minor + 1.0).sqrt();

    // Tilt from the per-row centroid line x(y) = a + b*y. The strip runs
    // vertically, so the slope b is -tan(tilt). Partial rows at the rotated
    // ends have off-axis centroids and a long lever arm, so only rows near
    // full width enter the fit.
    let max_pop = row_sum.iter().map(|r| r.0).fold(0.0f64, f64::max);
    let rows: Vec<(f64, f64)> = row_sum
        .iter()
        .enumerate()
        .filter(|(_, r)| r.0 >= 0.6 * max_pop && r.0 > 0.0)
        .map(|(i, r)| ((bbox.y + i) as f64, r.1 / r.0))
        .collect();
    let tilt = fit_row_centroid_slope(&rows);

    StripStats {
        centroid: (cx, cy),
        height,
        width,
        tilt,
        rows: rows.len(),
    }
}

/// Tilt angle from `(y, mean x)` rows: the negated arctangent of the
/// least-squares slope, clamped to `[-pi/4, pi/4]`. Fewer than two rows is
/// degenerate and reads as zero.
fn fit_row_centroid_slope(rows: &[(f64, f64)]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let n = rows.len() as f64;
    let my: f64 = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mx: f64 = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sxy: f64 = rows.iter().map(|r| (r.0 - my) * (r.1 - mx)).sum();
    let syy: f64 = rows.iter().map(|r| (r.0 - my) * (r.0 - my)).sum();
    if syy == 0.0 {
        return 0.0;
    }
    (-(sxy / syy))
        .atan()
        .clamp(-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4)
}

#[inline]
fn rotate_about(p: (f64, f64), c: (f64, f64), theta: f64) -> (f64, f64) {
    let (s, co) = theta.sin_cos();
    let dx = p.0 - c.0;
    let dy = p.1 - c.1;
    (c.0 + co * dx - s * dy, c.1 + s * dx + co * dy)
}

/// One candidate per blue component passing the geometry screen. Multiple
/// plates yield multiple candidates; an empty list is a valid result.
pub fn extract_candidates(
    mask: &BinaryImage,
    img: &RasterImage,
    cfg: &LocalizationConfig,
) -> Vec<PlateCandidate> {
    assert_eq!(
        (mask.width(), mask.height()),
        (img.width(), img.height()),
        "mask and image dimensions must match"
    );
    let labeling = connected_components(mask);
    let mut out = Vec::new();
    for i in 0..labeling.count {
        if labeling.areas[i] < cfg.min_strip_area {
            continue;
        }
        let bbox = labeling.boxes[i];
        let stats = strip_stats(&labeling, (i + 1) as u32, bbox);
        let ratio = stats.height / stats.width;
        if !(cfg.strip_ratio_min..=cfg.strip_ratio_max).contains(&ratio) {
            continue;
        }
        let aspect = (1.0 + cfg.plate_width_factor) / ratio;
        if !(cfg.aspect_min..=cfg.aspect_max).contains(&aspect) {
            continue;
        }
        let tilt = if stats.rows < 2 { 0.0 } else { stats.tilt };
        let c = stats.centroid;
        let left = c.0 - stats.width / 2.0;
        let top = c.1 - stats.height / 2.0;
        let w = stats.width * (1.0 + cfg.plate_width_factor);
        let h = stats.height;

        // Scene AABB of the tilted plate rectangle.
        let corners = [
            rotate_about((left, top), c, tilt),
            rotate_about((left + w, top), c, tilt),
            rotate_about((left, top + h), c, tilt),
            rotate_about((left + w, top + h), c, tilt),
        ];
        let min_x = corners.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let max_x = corners.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = corners.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_y = corners.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let x0 = min_x.floor().max(0.0) as usize;
        let y0 = min_y.floor().max(0.0) as usize;
        let x1 = (max_x.ceil() as usize).min(img.width());
        let y1 = (max_y.ceil() as usize).min(img.height());
        if x1 <= x0 || y1 <= y0 {
            continue;
        }

        out.push(PlateCandidate {
            bounds: Rect::new(x0, y0, x1 - x0, y1 - y0),
            blue_box: bbox,
            tilt,
            score: 0,
            anchor: c,
            deskewed_rect: [left, top, w, h],
            strip_width: stats.width,
        });
    }
    out
}

/// Strip inclination versus vertical from a least-squares line through the
/// per-row centroids of the strip pixels inside `cand.blue_box`. A
/// single-row component is degenerate and reads as zero tilt.
pub fn estimate_tilt(cand: &PlateCandidate, mask: &BinaryImage) -> f64 {
    let bbox = cand.blue_box;
    let mut raw: Vec<(f64, f64, f64)> = Vec::with_capacity(bbox.h); // (y, count, sum x)
    for y in bbox.y..bbox.bottom().min(mask.height()) {
        let mut count = 0f64;
        let mut sum = 0f64;
        for x in bbox.x..bbox.right().min(mask.width()) {
            if mask.get(x, y) {
                count += 1.0;
                sum += x as f64;
            }
        }
        if count > 0.0 {
            raw.push((y as f64, count, sum));
        }
    }
    let max_pop = raw.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let rows: Vec<(f64, f64)> = raw
        .iter()
        .filter(|r| r.1 >= 0.6 * max_pop)
        .map(|r| (r.0, r.2 / r.1))
        .collect();
    fit_row_centroid_slope(&rows)
}

/// Sample the candidate's deskewed plate rectangle out of the scene.
fn sample_deskewed(img: &RasterImage, cand: &PlateCandidate) -> (RasterImage, bool) {
    let [left, top, w, h] = cand.deskewed_rect;
    let out_w = (w.round() as usize).max(1);
    let out_h = (h.round() as usize).max(1);
    let mut out = RasterImage::new(out_w, out_h);
    let mut clipped = false;
    for y in 0..out_h {
        for x in 0..out_w {
            let p = (left + x as f64, top + y as f64);
            let s = rotate_about(p, cand.anchor, cand.tilt);
            let sx = s.0.round();
            let sy = s.1.round();
            if sx >= 0.0 && sy >= 0.0 && (sx as usize) < img.width() && (sy as usize) < img.height() {
                out.set(x, y, img.get(sx as usize, sy as usize));
            } else {
                clipped = true;
            }
        }
    }
    (out, clipped)
}

/// Color-jump verification: binarize the candidate's deskewed crop and count
/// foreground/background transitions along scanlines at 40%, 50% and 60% of
/// its height. The score is the median of the three counts.
pub fn verify_candidate(cand: &PlateCandidate, img: &RasterImage, _cfg: &LocalizationConfig) -> u32 {
    let (crop, _) = sample_deskewed(img, cand);
    let binary = threshold_binarize(&grayscale(&crop));
    let h = binary.height();
    let mut counts: Vec<u32> = [0.4f64, 0.5, 0.6]
        .iter()
        .map(|f| {
            let y = ((h as f64 * f) as usize).min(h - 1);
            let mut jumps = 0u32;
            for x in 1..binary.width() {
                if binary.get(x, y) != binary.get(x - 1, y) {
                    jumps += 1;
                }
            }
            jumps
        })
        .collect();
    counts.sort_unstable();
    counts[1]
}

/// Rotate the candidate neighborhood by `-tilt` and crop the plate box. Crops
/// reaching past the image are padded black and flagged clipped.
pub fn deskew_and_crop(img: &RasterImage, cand: &PlateCandidate) -> PlateRegion {
    let (pixels, clipped) = sample_deskewed(img, cand);
    PlateRegion {
        pixels,
        origin: (cand.bounds.x, cand.bounds.y),
        tilt_applied: cand.tilt,
        strip_width: cand.strip_width.round() as usize,
        clipped,
    }
}
