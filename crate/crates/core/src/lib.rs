//! License plate recognition toolkit.
//!
//! The pipeline reads a scene image, anchors plate candidates on the blue
//! registration strip, verifies them by color jumps, deskews and segments
//! each plate into normalized 30x15 glyphs, and recognizes the glyphs with a
//! k-nearest-neighbor classifier over directional chain-code features. A
//! plate-type stage votes the background color into the public / government /
//! private categories.
//!
//! Module map:
//! - [`imaging`]: pixel primitives (HSV, thresholding, morphology,
//!   components, rotation) plus BMP and PNM codecs.
//! - [`localization`]: blue-strip anchoring, geometry screening, tilt
//!   estimation, deskewed cropping.
//! - [`segmentation`]: character region picking and glyph normalization.
//! - [`features`]: Moore-neighbor contour tracing and zoned chain-code
//!   histograms (120 features).
//! - [`classifier`]: KNN model, train/test split, evaluation, model files.
//! - [`plate_type`]: background color voting.
//! - [`pipeline`]: end-to-end orchestration and batch scoring.
//! - [`synth`]: deterministic synthetic scenes and glyph corpora, the ground
//!   truth oracle for the test suites.
//! - [`config`]: INI-style configuration for every stage.

pub mod classifier;
pub mod config;
pub mod features;
pub mod imaging;
pub mod localization;
pub mod pipeline;
pub mod plate_type;
pub mod segmentation;
pub mod synth;

pub use classifier::{KnnModel, LabeledSample};
pub use imaging::{BinaryImage, RasterImage, Rect};
pub use localization::{PlateCandidate, PlateRegion};
pub use pipeline::{PlateReading, ReadOutcome};
pub use plate_type::PlateType;
pub use segmentation::CharacterGlyph;
