//! Pixel-level primitives shared by every pipeline stage: color conversion,
//! global thresholding, 3x3 morphology, connected components and rotation.
//!
//! All operations are pure functions on immutable inputs; nothing in this
//! module holds shared mutable state, so concurrent use is safe.

pub mod bmp;
pub mod pnm;

use serde::Serialize;

/// Row-major 24-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    /// `width * height * 3` bytes, RGB order.
    pixels: Vec<u8>,
}

impl RasterImage {
    /// All-black image. Panics if either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        RasterImage {
            width,
            height,
            pixels: vec![0u8; width * height * 3],
        }
    }

    pub fn from_rgb_bytes(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(pixels.len(), width * height * 3, "pixel buffer size mismatch");
        RasterImage { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let i = (y * self.width + x) * 3;
        (self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        let i = (y * self.width + x) * 3;
        self.pixels[i] = rgb.0;
        self.pixels[i + 1] = rgb.1;
        self.pixels[i + 2] = rgb.2;
    }

    pub fn fill(&mut self, rgb: (u8, u8, u8)) {
        for i in 0..self.width * self.height {
            self.pixels[i * 3] = rgb.0;
            self.pixels[i * 3 + 1] = rgb.1;
            self.pixels[i * 3 + 2] = rgb.2;
        }
    }

    /// Copy of the sub-rectangle. The rectangle must lie within bounds.
    pub fn crop(&self, rect: Rect) -> RasterImage {
        assert!(rect.right() <= self.width && rect.bottom() <= self.height);
        let mut out = RasterImage::new(rect.w, rect.h);
        for y in 0..rect.h {
            for x in 0..rect.w {
                out.set(x, y, self.get(rect.x + x, rect.y + y));
            }
        }
        out
    }
}

/// HSV triple with hue normalized to `[0, 1)` (0 and 1 are the same angle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Row-major binary image; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    /// All-background image. Panics if either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        BinaryImage {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(bits.len(), width * height, "bit buffer size mismatch");
        BinaryImage { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn crop(&self, rect: Rect) -> BinaryImage {
        assert!(rect.right() <= self.width && rect.bottom() <= self.height);
        let mut out = BinaryImage::new(rect.w, rect.h);
        for y in 0..rect.h {
            for x in 0..rect.w {
                out.set(x, y, self.get(rect.x + x, rect.y + y));
            }
        }
        out
    }
}

/// 8-bit grayscale image, the input form for global thresholding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn from_bytes(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(data.len(), width * height, "gray buffer size mismatch");
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }
}

/// Axis-aligned rectangle in pixel coordinates, `(x, y)` top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    /// One past the rightmost column.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// One past the bottom row.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }

    /// Intersection over union; the detection-correctness criterion.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Per-pixel component labels plus per-label summary data.
///
/// Label 0 is background; foreground labels run `1..=count` and are assigned
/// in raster order of each component's first-encountered pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
    /// Minimal bounding rectangle of each label, indexed by `label - 1`.
    pub boxes: Vec<Rect>,
    /// Pixel count of each label, indexed by `label - 1`.
    pub areas: Vec<usize>,
}

impl ComponentLabeling {
    #[inline]
    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

/// Standard hexcone RGB -> HSV. Gray inputs give `s = 0` and `h = 0`.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let rf = r as f64 / 255.0;
    let gf = g as f64 / 255.0;
    let bf = b as f64 / 255.0;
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;

    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        let mut h = (gf - bf) / delta % 6.0;
        if h < 0.0 {
            h += 6.0;
        }
        h / 6.0
    } else if max == gf {
        ((bf - rf) / delta + 2.0) / 6.0
    } else {
        ((rf - gf) / delta + 4.0) / 6.0
    };
    // Wrap-around: h == 1.0 is the same angle as 0.
    let h = if h >= 1.0 { h - 1.0 } else { h };

    let s = if max == 0.0 { 0.0 } else { delta / max };
    HsvPixel { h, s, v: max }
}

/// Inverse of [`rgb_to_hsv`], used by the synthetic renderer to place pixels
/// inside configured color bands.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let h = h.rem_euclid(1.0) * 6.0;
    let sector = h.floor() as i32 % 6;
    let f = h - h.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    (
        (r * 255.0).round() as u8,
        (g * 255.0).round() as u8,
        (b * 255.0).round() as u8,
    )
}

/// Rec. 601 luma, the grayscale view used for binarization.
pub fn grayscale(img: &RasterImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width * img.height);
    for i in 0..img.width * img.height {
        let r = img.pixels[i * 3] as f64;
        let g = img.pixels[i * 3 + 1] as f64;
        let b = img.pixels[i * 3 + 2] as f64;
        data.push((0.299 * r + 0.587 * g + 0.114 * b).round() as u8);
    }
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Global threshold by inter-class variance maximization (Otsu).
///
/// Returns the smallest gray level maximizing the criterion; a uniform image
/// yields its single gray level, so thresholding it leaves all background.
pub fn otsu_threshold(gray: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &g in &gray.data {
        hist[g as usize] += 1;
    }
    let total = gray.data.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(g, &n)| g as f64 * n as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = -1.0f64;
    let mut w0 = 0.0f64;
    let mut sum0 = 0.0f64;
    for t in 0..256usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    if best_var < 0.0 {
        // Uniform image: every split left one class empty.
        return gray.data[0];
    }
    best_t
}

/// Binarize against the Otsu threshold; pixels strictly above it are foreground.
pub fn threshold_binarize(gray: &GrayImage) -> BinaryImage {
    let t = otsu_threshold(gray);
    let bits = gray.data.iter().map(|&g| g > t).collect();
    BinaryImage {
        width: gray.width,
        height: gray.height,
        bits,
    }
}

/// Flip every bit. An involution: `complement(complement(x)) == x`.
pub fn complement(img: &BinaryImage) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        bits: img.bits.iter().map(|&b| !b).collect(),
    }
}

/// 3x3 square erosion; pixels outside the image count as background.
pub fn erode(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let mut all = true;
            'n: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if !img.get_checked(x as i64 + dx, y as i64 + dy) {
                        all = false;
                        break 'n;
                    }
                }
            }
            out.set(x, y, all);
        }
    }
    out
}

/// 3x3 square dilation; pixels outside the image contribute nothing.
pub fn dilate(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let mut any = false;
            'n: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if img.get_checked(x as i64 + dx, y as i64 + dy) {
                        any = true;
                        break 'n;
                    }
                }
            }
            out.set(x, y, any);
        }
    }
    out
}

/// Opening (erosion then dilation); removes isolated single-pixel speckle.
pub fn open(img: &BinaryImage) -> BinaryImage {
    dilate(&erode(img))
}

/// 8-connected component labeling via two-pass union-find.
///
/// Labels are renumbered so that components are ordered by the raster
/// position of their first-encountered pixel, which makes outputs
/// deterministic and testable.
pub fn connected_components(img: &BinaryImage) -> ComponentLabeling {
    let w = img.width;
    let h = img.height;
    let mut labels = vec![0u32; w * h];
    // parent[i] for provisional labels, 1-based; parent[0] unused.
    let mut parent: Vec<u32> = vec![0];

    fn find(parent: &mut Vec<u32>, mut i: u32) -> u32 {
        while parent[i as usize] != i {
            let p = parent[i as usize];
            parent[i as usize] = parent[p as usize];
            i = parent[i as usize];
        }
        i
    }

    let mut next = 1u32;
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            // Previously-scanned neighbors under 8-connectivity.
            let mut neighbor_labels = [0u32; 4];
            let mut n = 0;
            let candidates: [(i64, i64); 4] = [
                (x as i64 - 1, y as i64),
                (x as i64 - 1, y as i64 - 1),
                (x as i64, y as i64 - 1),
                (x as i64 + 1, y as i64 - 1),
            ];
            for (nx, ny) in candidates {
                if nx >= 0 && ny >= 0 && (nx as usize) < w && img.get_checked(nx, ny) {
                    neighbor_labels[n] = labels[ny as usize * w + nx as usize];
                    n += 1;
                }
            }
            if n == 0 {
                parent.push(next);
                labels[y * w + x] = next;
                next += 1;
            } else {
                let mut min = u32::MAX;
                for &l in &neighbor_labels[..n] {
                    let root = find(&mut parent, l);
                    min = min.min(root);
                }
                labels[y * w + x] = min;
                for &l in &neighbor_labels[..n] {
                    let root = find(&mut parent, l);
                    parent[root as usize] = min;
                }
            }
        }
    }

    // Second pass: renumber roots in raster first-encounter order and
    // gather boxes/areas.
    let mut remap: Vec<u32> = vec![0; parent.len()];
    let mut count = 0u32;
    let mut boxes: Vec<Rect> = Vec::new();
    let mut areas: Vec<usize> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == 0 {
                continue;
            }
            let root = find(&mut parent, l);
            let mut final_label = remap[root as usize];
            if final_label == 0 {
                count += 1;
                final_label = count;
                remap[root as usize] = final_label;
                boxes.push(Rect::new(x, y, 1, 1));
                areas.push(0);
            }
            labels[y * w + x] = final_label;
            let idx = (final_label - 1) as usize;
            areas[idx] += 1;
            let b = &mut boxes[idx];
            let x1 = b.right().max(x + 1);
            let y1 = b.bottom().max(y + 1);
            b.x = b.x.min(x);
            b.y = b.y.min(y);
            b.w = x1 - b.x;
            b.h = y1 - b.y;
        }
    }

    ComponentLabeling {
        width: w,
        height: h,
        labels,
        count: count as usize,
        boxes,
        areas,
    }
}

fn rotated_canvas(w: usize, h: usize, theta: f64) -> (usize, usize) {
    let (s, c) = (theta.sin().abs(), theta.cos().abs());
    // The epsilon absorbs floating fuzz so exact right angles keep exact sizes.
    let w2 = (w as f64 * c + h as f64 * s - 1e-9).ceil().max(1.0) as usize;
    let h2 = (h as f64 * c + w as f64 * s - 1e-9).ceil().max(1.0) as usize;
    (w2, h2)
}

#[inline]
fn rotate_src(x: usize, y: usize, cx_out: f64, cy_out: f64, cx_in: f64, cy_in: f64, theta: f64) -> (f64, f64) {
    // Inverse mapping: output pixel -> source point, rotation about centers.
    let (s, c) = theta.sin_cos();
    let dx = x as f64 - cx_out;
    let dy = y as f64 - cy_out;
    (cx_in + c * dx + s * dy, cy_in - s * dx + c * dy)
}

/// Rotate about the image center with nearest-neighbor sampling.
///
/// The output canvas grows to contain the rotated content; uncovered pixels
/// are black. `rotate_raster(img, 0.0)` is a bit-exact copy.
pub fn rotate_raster(img: &RasterImage, theta: f64) -> RasterImage {
    assert!(theta.abs() <= std::f64::consts::FRAC_PI_2 + 1e-12, "|theta| must be <= pi/2");
    let (w2, h2) = rotated_canvas(img.width, img.height, theta);
    let mut out = RasterImage::new(w2, h2);
    let cx_in = (img.width as f64 - 1.0) / 2.0;
    let cy_in = (img.height as f64 - 1.0) / 2.0;
    let cx_out = (w2 as f64 - 1.0) / 2.0;
    let cy_out = (h2 as f64 - 1.0) / 2.0;
    for y in 0..h2 {
        for x in 0..w2 {
            let (sx, sy) = rotate_src(x, y, cx_out, cy_out, cx_in, cy_in, theta);
            let (sx, sy) = (sx.round(), sy.round());
            if sx >= 0.0 && sy >= 0.0 && (sx as usize) < img.width && (sy as usize) < img.height {
                out.set(x, y, img.get(sx as usize, sy as usize));
            }
        }
    }
    out
}

/// Binary counterpart of [`rotate_raster`]; uncovered pixels are background.
pub fn rotate_binary(img: &BinaryImage, theta: f64) -> BinaryImage {
    assert!(theta.abs() <= std::f64::consts::FRAC_PI_2 + 1e-12, "|theta| must be <= pi/2");
    let (w2, h2) = rotated_canvas(img.width, img.height, theta);
    let mut out = BinaryImage::new(w2, h2);
    let cx_in = (img.width as f64 - 1.0) / 2.0;
    let cy_in = (img.height as f64 - 1.0) / 2.0;
    let cx_out = (w2 as f64 - 1.0) / 2.0;
    let cy_out = (h2 as f64 - 1.0) / 2.0;
    for y in 0..h2 {
        for x in 0..w2 {
            let (sx, sy) = rotate_src(x, y, cx_out, cy_out, cx_in, cy_in, theta);
            let (sx, sy) = (sx.round(), sy.round());
            if sx >= 0.0 && sy >= 0.0 && (sx as usize) < img.width && (sy as usize) < img.height {
                out.set(x, y, img.get(sx as usize, sy as usize));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_binary(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BinaryImage {
        let bits = (0..w * h).map(|_| rng.gen_bool(p)).collect();
        BinaryImage::from_bits(w, h, bits)
    }

    #[test]
    fn hsv_pure_red() {
        let p = rgb_to_hsv(255, 0, 0);
        assert_eq!(p.h, 0.0);
        assert_eq!(p.s, 1.0);
        assert_eq!(p.v, 1.0);
    }

    #[test]
    fn hsv_gray_is_achromatic() {
        let p = rgb_to_hsv(128, 128, 128);
        assert_eq!(p.s, 0.0);
        assert_eq!(p.h, 0.0);
        assert!((p.v - 128.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn hsv_pure_blue_reference() {
        // Independent reference: pure blue sits at 240 degrees = 240/360.
        let p = rgb_to_hsv(0, 0, 255);
        assert!((p.h - 240.0 / 360.0).abs() < 1e-12);
        assert_eq!(p.s, 1.0);
        assert_eq!(p.v, 1.0);
    }

    #[test]
    fn hsv_outputs_in_declared_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5000 {
            let (r, g, b) = (rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>());
            let p = rgb_to_hsv(r, g, b);
            assert!((0.0..1.0).contains(&p.h), "h out of range for {r},{g},{b}");
            assert!((0.0..=1.0).contains(&p.s));
            assert!((0.0..=1.0).contains(&p.v));
            if r == g && g == b {
                assert_eq!(p.s, 0.0);
            }
        }
    }

    #[test]
    fn hsv_roundtrip_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let (r, g, b) = (rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>());
            let p = rgb_to_hsv(r, g, b);
            let (r2, g2, b2) = hsv_to_rgb(p.h, p.s, p.v);
            assert!((r as i32 - r2 as i32).abs() <= 1);
            assert!((g as i32 - g2 as i32).abs() <= 1);
            assert!((b as i32 - b2 as i32).abs() <= 1);
        }
    }

    #[test]
    fn otsu_all_zero_image_is_all_background() {
        let gray = GrayImage::from_bytes(4, 4, vec![0; 16]);
        let bin = threshold_binarize(&gray);
        assert_eq!(bin.count_foreground(), 0);
    }

    #[test]
    fn otsu_uniform_image_is_all_background() {
        let gray = GrayImage::from_bytes(5, 3, vec![173; 15]);
        assert_eq!(otsu_threshold(&gray), 173);
        assert_eq!(threshold_binarize(&gray).count_foreground(), 0);
    }

    #[test]
    fn otsu_two_level_split_matches_brute_force() {
        // Left half 50, right half 200.
        let mut data = vec![0u8; 16 * 8];
        for y in 0..8 {
            for x in 0..16 {
                data[y * 16 + x] = if x < 8 { 50 } else { 200 };
            }
        }
        let gray = GrayImage::from_bytes(16, 8, data);

        // Brute-force oracle over all 256 thresholds.
        let mut best = (0u8, -1.0f64);
        for t in 0..256usize {
            let (mut n0, mut s0, mut n1, mut s1) = (0f64, 0f64, 0f64, 0f64);
            for &g in gray.as_bytes() {
                if (g as usize) <= t {
                    n0 += 1.0;
                    s0 += g as f64;
                } else {
                    n1 += 1.0;
                    s1 += g as f64;
                }
            }
            if n0 == 0.0 || n1 == 0.0 {
                continue;
            }
            let var = n0 * n1 * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1);
            if var > best.1 {
                best = (t as u8, var);
            }
        }
        assert_eq!(otsu_threshold(&gray), best.0);

        let bin = threshold_binarize(&gray);
        for y in 0..8 {
            for x in 0..16 {
                assert_eq!(bin.get(x, y), x >= 8);
            }
        }
    }

    #[test]
    fn otsu_checkerboard_selects_bright_pixels() {
        let mut data = vec![0u8; 64];
        for y in 0..8 {
            for x in 0..8 {
                data[y * 8 + x] = if (x + y) % 2 == 0 { 0 } else { 255 };
            }
        }
        let gray = GrayImage::from_bytes(8, 8, data);
        let bin = threshold_binarize(&gray);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(bin.get(x, y), (x + y) % 2 == 1);
            }
        }
    }

    #[test]
    fn complement_flips_single_pixel() {
        let mut img = BinaryImage::new(8, 8);
        img.set(3, 4, true);
        let c = complement(&img);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(c.get(x, y), !(x == 3 && y == 4));
            }
        }
    }

    #[test]
    fn complement_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let img = random_binary(&mut rng, 13, 9, 0.4);
            assert_eq!(complement(&complement(&img)), img);
        }
    }

    #[test]
    fn erode_isolated_pixel_vanishes() {
        let mut img = BinaryImage::new(7, 7);
        img.set(3, 3, true);
        assert_eq!(erode(&img).count_foreground(), 0);
    }

    #[test]
    fn erode_3x3_block_leaves_center() {
        let mut img = BinaryImage::new(9, 9);
        for y in 2..5 {
            for x in 2..5 {
                img.set(x, y, true);
            }
        }
        let e = erode(&img);
        assert_eq!(e.count_foreground(), 1);
        assert!(e.get(3, 3));
    }

    #[test]
    fn dilate_matches_neighborhood_max_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let img = random_binary(&mut rng, 20, 20, 0.3);
            let d = dilate(&img);
            for y in 0..20i64 {
                for x in 0..20i64 {
                    // Oracle: per-pixel neighborhood scan.
                    let mut any = false;
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            any |= img.get_checked(x + dx, y + dy);
                        }
                    }
                    assert_eq!(d.get(x as usize, y as usize), any);
                }
            }
        }
    }

    #[test]
    fn opening_is_anti_extensive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let img = random_binary(&mut rng, 24, 16, 0.35);
            let opened = open(&img);
            for y in 0..16 {
                for x in 0..24 {
                    // opening never adds foreground outside the original
                    if opened.get(x, y) {
                        assert!(img.get(x, y), "opening added a pixel at {x},{y}");
                    }
                }
            }
        }
    }

    #[test]
    fn components_empty_image() {
        let img = BinaryImage::new(6, 6);
        let l = connected_components(&img);
        assert_eq!(l.count, 0);
        assert!(l.boxes.is_empty());
    }

    #[test]
    fn components_two_blocks() {
        let mut img = BinaryImage::new(10, 5);
        for (bx, by) in [(1usize, 1usize), (6, 2)] {
            for dy in 0..2 {
                for dx in 0..2 {
                    img.set(bx + dx, by + dy, true);
                }
            }
        }
        let l = connected_components(&img);
        assert_eq!(l.count, 2);
        assert_eq!(l.areas, vec![4, 4]);
        assert_eq!(l.boxes[0], Rect::new(1, 1, 2, 2));
        assert_eq!(l.boxes[1], Rect::new(6, 2, 2, 2));
    }

    /// Independent oracle: flood fill from every unvisited foreground pixel,
    /// visiting in raster order so labels match the contract directly.
    pub fn flood_fill_labeling(img: &BinaryImage) -> Vec<u32> {
        let (w, h) = (img.width(), img.height());
        let mut labels = vec![0u32; w * h];
        let mut next = 1u32;
        for y in 0..h {
            for x in 0..w {
                if !img.get(x, y) || labels[y * w + x] != 0 {
                    continue;
                }
                let mut stack = vec![(x, y)];
                labels[y * w + x] = next;
                while let Some((px, py)) = stack.pop() {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (px as i64 + dx, py as i64 + dy);
                            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                                continue;
                            }
                            let (nxu, nyu) = (nx as usize, ny as usize);
                            if img.get(nxu, nyu) && labels[nyu * w + nxu] == 0 {
                                labels[nyu * w + nxu] = next;
                                stack.push((nxu, nyu));
                            }
                        }
                    }
                }
                next += 1;
            }
        }
        labels
    }

    #[test]
    fn components_match_flood_fill_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let img = random_binary(&mut rng, 32, 32, 0.45);
            let l = connected_components(&img);
            assert_eq!(l.labels, flood_fill_labeling(&img));
            let total: usize = l.areas.iter().sum();
            assert_eq!(total, img.count_foreground());
        }
    }

    #[test]
    fn components_boxes_are_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..40 {
            let img = random_binary(&mut rng, 24, 24, 0.3);
            let l = connected_components(&img);
            for (i, b) in l.boxes.iter().enumerate() {
                let label = (i + 1) as u32;
                let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
                for y in 0..24 {
                    for x in 0..24 {
                        if l.label_at(x, y) == label {
                            x0 = x0.min(x);
                            y0 = y0.min(y);
                            x1 = x1.max(x + 1);
                            y1 = y1.max(y + 1);
                        }
                    }
                }
                assert_eq!(*b, Rect::new(x0, y0, x1 - x0, y1 - y0));
            }
        }
    }

    #[test]
    fn rotate_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut img = RasterImage::new(17, 11);
        for y in 0..11 {
            for x in 0..17 {
                img.set(x, y, (rng.gen(), rng.gen(), rng.gen()));
            }
        }
        assert_eq!(rotate_raster(&img, 0.0), img);

        let bin = random_binary(&mut rng, 17, 11, 0.5);
        assert_eq!(rotate_binary(&bin, 0.0), bin);
    }

    #[test]
    fn rotate_square_quarter_turn_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 12;
        let mut img = RasterImage::new(n, n);
        for y in 0..n {
            for x in 0..n {
                img.set(x, y, (rng.gen(), rng.gen(), rng.gen()));
            }
        }
        let r = rotate_raster(&img, std::f64::consts::FRAC_PI_2);
        assert_eq!(r.width(), n);
        assert_eq!(r.height(), n);
        for y in 0..n {
            for x in 0..n {
                // Inverse mapping sends (x, y) to (y, n-1-x).
                assert_eq!(r.get(x, y), img.get(y, n - 1 - x));
            }
        }
    }

    #[test]
    fn rotate_forward_back_mostly_agrees() {
        // Large-margin glyph: a 40x60 block centered in a 120x120 canvas.
        let mut img = BinaryImage::new(120, 120);
        for y in 30..90 {
            for x in 40..80 {
                img.set(x, y, true);
            }
        }
        let there = rotate_binary(&img, 0.1);
        let back = rotate_binary(&there, -0.1);
        // The double canvas expansion re-centers on half-pixel boundaries, so
        // score the best alignment within a one-pixel search window.
        let (bw, bh) = (back.width() as i64, back.height() as i64);
        let base_x = (bw - 120) / 2;
        let base_y = (bh - 120) / 2;
        let mut best = 0.0f64;
        for jitter_y in -1..=1i64 {
            for jitter_x in -1..=1i64 {
                let mut content = 0usize;
                let mut agree = 0usize;
                for y in 0..120i64 {
                    for x in 0..120i64 {
                        let orig = img.get(x as usize, y as usize);
                        let rb = back.get_checked(x + base_x + jitter_x, y + base_y + jitter_y);
                        if orig || rb {
                            content += 1;
                            if orig == rb {
                                agree += 1;
                            }
                        }
                    }
                }
                best = best.max(agree as f64 / content as f64);
            }
        }
        assert!(best >= 0.95, "round-trip agreement {best} below 0.95");
    }
}
