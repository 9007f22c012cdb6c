pub mod eval;
pub mod gen;
pub mod recognize;
pub mod report;
pub mod serve;
pub mod train;

use std::path::Path;

use anyhow::{bail, Context, Result};
use platekit_core::config::Config;
use platekit_core::imaging::{bmp, pnm, RasterImage};

/// Usage/config problem: print and exit 2.
pub fn usage_error(message: impl std::fmt::Display) -> Result<u8> {
    eprintln!("error: {message}");
    Ok(2)
}

pub fn load_config(path: Option<&Path>) -> Result<Config, String> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::load(p).map_err(|e| format!("{}: {e}", p.display())),
    }
}

/// Read a scene image, dispatching on the magic bytes (BM or P6).
pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"BM") {
        Ok(bmp::decode(&bytes).with_context(|| path.display().to_string())?)
    } else if bytes.starts_with(b"P6") {
        Ok(pnm::decode_p6(&bytes).with_context(|| path.display().to_string())?)
    } else {
        bail!("{}: unsupported image format (need 24-bit BMP or binary PPM)", path.display());
    }
}
