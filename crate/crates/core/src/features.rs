//! Directional chain-code features over glyph contours.
//!
//! A normalized glyph is traced with Moore-neighbor boundary following
//! (clockwise, Jacob's stopping criterion), producing one chain-coded outer
//! contour per 8-connected component. Moves are tallied into a 5x3 grid of
//! zones by their origin pixel, 8 directions per zone, yielding the
//! 120-dimensional feature vector the classifier consumes.
//!
//! Direction numbering: 0=E, 1=NE, 2=N, 3=NW, 4=W, 5=SW, 6=S, 7=SE
//! (y grows downward, so N is `(0, -1)`).

use crate::imaging::{connected_components, BinaryImage, Rect};
use crate::segmentation::{CharacterGlyph, GLYPH_HEIGHT, GLYPH_WIDTH};

/// Zones per glyph: 5 rows x 3 columns of 6x5-pixel cells.
pub const ZONE_ROWS: usize = 5;
pub const ZONE_COLS: usize = 3;
pub const ZONE_COUNT: usize = ZONE_ROWS * ZONE_COLS;
pub const DIRECTION_COUNT: usize = 8;
/// 15 zones x 8 directions.
pub const FEATURE_COUNT: usize = ZONE_COUNT * DIRECTION_COUNT;

/// Pixel offsets indexed by chain direction.
pub const DIRECTION_DELTAS: [(i64, i64); 8] = [
    (1, 0),   // 0: E
    (1, -1),  // 1: NE
    (0, -1),  // 2: N
    (-1, -1), // 3: NW
    (-1, 0),  // 4: W
    (-1, 1),  // 5: SW
    (0, 1),   // 6: S
    (1, 1),   // 7: SE
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FeaturesError {
    #[error("glyph has no foreground pixels")]
    EmptyGlyph,
    #[error("expected a {GLYPH_WIDTH}x{GLYPH_HEIGHT} glyph canvas, got {width}x{height}")]
    DimensionError { width: usize, height: usize },
}

/// Chain-coded outer boundary of one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    /// Directions walked between consecutive boundary pixels.
    pub moves: Vec<u8>,
    /// Topmost-then-leftmost pixel of the component, where tracing begins.
    pub start: (usize, usize),
    pub closed: bool,
}

/// 120 non-negative direction counts; the sum equals the total number of
/// chain moves over all contours of the glyph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    counts: [u32; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn from_counts(counts: [u32; FEATURE_COUNT]) -> Self {
        FeatureVector { counts }
    }

    pub fn counts(&self) -> &[u32; FEATURE_COUNT] {
        &self.counts
    }

    pub fn sum(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Debug dump form: 120 space-separated integers.
    pub fn to_dump_line(&self) -> String {
        let mut s = String::with_capacity(FEATURE_COUNT * 3);
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&c.to_string());
        }
        s
    }

    pub fn parse_dump_line(line: &str) -> Option<Self> {
        let mut counts = [0u32; FEATURE_COUNT];
        let mut n = 0;
        for tok in line.split_ascii_whitespace() {
            if n >= FEATURE_COUNT {
                return None;
            }
            counts[n] = tok.parse().ok()?;
            n += 1;
        }
        if n != FEATURE_COUNT {
            return None;
        }
        Some(FeatureVector { counts })
    }
}

/// Minimal axis-aligned rectangle containing all foreground pixels.
pub fn bounding_box(img: &BinaryImage) -> Result<Rect, FeaturesError> {
    let (mut x0, mut y0) = (usize::MAX, usize::MAX);
    let (mut x1, mut y1) = (0usize, 0usize);
    let mut any = false;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if !any {
        return Err(FeaturesError::EmptyGlyph);
    }
    Ok(Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Clockwise neighbor scan order decrements the direction index.
#[inline]
fn clockwise_next(dir: u8) -> u8 {
    (dir + 7) % 8
}

#[inline]
fn direction_between(from: (i64, i64), to: (i64, i64)) -> u8 {
    let d = (to.0 - from.0, to.1 - from.1);
    for (i, &delta) in DIRECTION_DELTAS.iter().enumerate() {
        if delta == d {
            return i as u8;
        }
    }
    unreachable!("pixels are not 8-adjacent");
}

/// Trace one component's outer boundary clockwise from its topmost-leftmost
/// pixel. `start` must be that pixel; pixels of other components are never
/// 8-adjacent to this one, so a plain foreground test suffices.
fn trace_one(img: &BinaryImage, start: (usize, usize)) -> Contour {
    let s = (start.0 as i64, start.1 as i64);

    // Scan for the first move. The pixel west of a topmost-leftmost pixel is
    // always background, so the walk "arrives" at the start heading east.
    let first = next_move(img, s, 4);
    let Some(first_dir) = first else {
        // Isolated pixel: zero moves.
        return Contour {
            moves: Vec::new(),
            start,
            closed: true,
        };
    };

    let mut moves = Vec::new();
    let mut cur = s;
    let mut back_dir = 4u8;
    // Jacob's criterion: stop when the walk is about to leave the start pixel
    // with the same move it originally left with.
    let cap = img.width() * img.height() * 8 + 8;
    loop {
        let dir = next_move(img, cur, back_dir).expect("non-isolated pixel lost its neighbors");
        if cur == s && dir == first_dir && !moves.is_empty() {
            break;
        }
        let delta = DIRECTION_DELTAS[dir as usize];
        let next = (cur.0 + delta.0, cur.1 + delta.1);
        // Last background examined before the hit; becomes the new backtrack.
        let prev_scan = DIRECTION_DELTAS[((dir + 1) % 8) as usize];
        let back_pixel = (cur.0 + prev_scan.0, cur.1 + prev_scan.1);
        moves.push(dir);
        back_dir = direction_between(next, back_pixel);
        cur = next;
        if moves.len() > cap {
            debug_assert!(false, "moore trace failed to close");
            break;
        }
    }

    Contour {
        moves,
        start,
        closed: true,
    }
}

/// First foreground neighbor scanning clockwise from just past `back_dir`.
#[inline]
fn next_move(img: &BinaryImage, cur: (i64, i64), back_dir: u8) -> Option<u8> {
    let mut dir = clockwise_next(back_dir);
    for _ in 0..8 {
        let delta = DIRECTION_DELTAS[dir as usize];
        if img.get_checked(cur.0 + delta.0, cur.1 + delta.1) {
            return Some(dir);
        }
        dir = clockwise_next(dir);
    }
    None
}

/// Moore-neighbor tracing: one clockwise outer contour per 8-connected
/// component, ordered by the raster position of each component's first pixel.
/// Inner (hole) boundaries are not traced.
pub fn trace_contours(img: &BinaryImage) -> Result<Vec<Contour>, FeaturesError> {
    let labeling = connected_components(img);
    if labeling.count == 0 {
        return Err(FeaturesError::EmptyGlyph);
    }
    // Raster-order first pixel per label.
    let mut starts: Vec<Option<(usize, usize)>> = vec![None; labeling.count];
    let mut found = 0;
    'scan: for y in 0..img.height() {
        for x in 0..img.width() {
            let l = labeling.label_at(x, y);
            if l != 0 && starts[(l - 1) as usize].is_none() {
                starts[(l - 1) as usize] = Some((x, y));
                found += 1;
                if found == labeling.count {
                    break 'scan;
                }
            }
        }
    }
    Ok(starts
        .into_iter()
        .map(|s| trace_one(img, s.expect("every label has a first pixel")))
        .collect())
}

#[inline]
fn zone_of(x: usize, y: usize) -> usize {
    let zone_h = GLYPH_HEIGHT / ZONE_ROWS; // 6
    let zone_w = GLYPH_WIDTH / ZONE_COLS; // 5
    (y / zone_h) * ZONE_COLS + x / zone_w
}

/// Chain-code direction frequencies per zone for a normalized glyph canvas.
///
/// Every move increments the bin `(zone of its origin pixel, direction)`;
/// the layout is zone-major. Counts are raw, not normalized, which keeps the
/// sum identity with [`trace_contours`] exact.
pub fn chain_code_features_of(bits: &BinaryImage) -> Result<FeatureVector, FeaturesError> {
    if bits.width() != GLYPH_WIDTH || bits.height() != GLYPH_HEIGHT {
        return Err(FeaturesError::DimensionError {
            width: bits.width(),
            height: bits.height(),
        });
    }
    let contours = trace_contours(bits)?;
    let mut counts = [0u32; FEATURE_COUNT];
    for contour in &contours {
        let mut pos = (contour.start.0 as i64, contour.start.1 as i64);
        for &dir in &contour.moves {
            let zone = zone_of(pos.0 as usize, pos.1 as usize);
            counts[zone * DIRECTION_COUNT + dir as usize] += 1;
            let delta = DIRECTION_DELTAS[dir as usize];
            pos = (pos.0 + delta.0, pos.1 + delta.1);
        }
    }
    Ok(FeatureVector { counts })
}

/// Feature vector of a segmented glyph; see [`chain_code_features_of`].
pub fn chain_code_features(glyph: &CharacterGlyph) -> FeatureVector {
    chain_code_features_of(glyph.bits()).expect("CharacterGlyph guarantees a non-empty 30x15 canvas")
}
