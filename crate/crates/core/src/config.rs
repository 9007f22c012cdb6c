//! Flat INI-style configuration shared by the CLI, the pipeline and the gate
//! service.
//!
//! Sections and keys are fixed; unknown ones are rejected so typos never
//! silently fall back to defaults. Costs are parsed into integer minor units
//! (two decimals), never floats.

use std::fs;
use std::path::Path;

use crate::localization::LocalizationConfig;
use crate::pipeline::PipelineConfig;
use crate::plate_type::PlateTypeConfig;
use crate::segmentation::SegmentationConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config: unknown section [{0}]")]
    UnknownSection(String),
    #[error("config: unknown key {key} in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("config: {key} = {value} out of range ({expected})")]
    OutOfRange {
        key: String,
        value: String,
        expected: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Default per-entry tariff in minor units: private 1.00, public 2.00,
/// government 0.00. Placeholders, expected to be overridden in deployment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TariffSettings {
    pub private_minor: u64,
    pub public_minor: u64,
    pub government_minor: u64,
}

impl Default for TariffSettings {
    fn default() -> Self {
        TariffSettings {
            private_minor: 100,
            public_minor: 200,
            government_minor: 0,
        }
    }
}

/// What the seven-segment display shows after a successful entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seg7Mode {
    Cost,
    DailyCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSettings {
    pub open_ms: u64,
    pub cooldown_ms: u64,
    pub seg7: Seg7Mode,
}

impl Default for GateSettings {
    fn default() -> Self {
        GateSettings {
            open_ms: 5000,
            cooldown_ms: 2000,
            seg7: Seg7Mode::Cost,
        }
    }
}

/// Full toolkit configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub pipeline: PipelineConfig,
    /// Per-glyph feature normalization at classification time.
    pub normalize_features: bool,
    pub k: usize,
    /// Label set for training; defaults to the built-in font classes.
    pub alphabet: Vec<String>,
    pub tariff: TariffSettings,
    pub gate: GateSettings,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            pipeline: PipelineConfig::default(),
            normalize_features: false,
            k: 1,
            alphabet: crate::synth::font::labels(),
            tariff: TariffSettings::default(),
            gate: GateSettings::default(),
        }
    }
}

/// Parse a cost like `2.00` into minor units.
pub fn parse_money_minor(s: &str) -> Option<u64> {
    let (whole, frac) = s.split_once('.')?;
    if frac.len() != 2 || whole.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: u64 = whole.parse().ok()?;
    let frac: u64 = frac.parse().ok()?;
    whole.checked_mul(100)?.checked_add(frac)
}

/// Render minor units as `x.yy`.
pub fn format_money_minor(minor: u64) -> String {
    format!("{}.{:02}", minor / 100, minor % 100)
}

struct KeyCtx<'a> {
    key: &'a str,
    value: &'a str,
}

impl<'a> KeyCtx<'a> {
    fn f64_in(&self, lo: f64, hi: f64) -> Result<f64, ConfigError> {
        let v: f64 = self.value.parse().map_err(|_| ConfigError::OutOfRange {
            key: self.key.into(),
            value: self.value.into(),
            expected: "a real number".into(),
        })?;
        if v < lo || v > hi || !v.is_finite() {
            return Err(ConfigError::OutOfRange {
                key: self.key.into(),
                value: self.value.into(),
                expected: format!("{lo}..{hi}"),
            });
        }
        Ok(v)
    }

    fn uint(&self, lo: u64, hi: u64) -> Result<u64, ConfigError> {
        let v: u64 = self.value.parse().map_err(|_| ConfigError::OutOfRange {
            key: self.key.into(),
            value: self.value.into(),
            expected: "an unsigned integer".into(),
        })?;
        if v < lo || v > hi {
            return Err(ConfigError::OutOfRange {
                key: self.key.into(),
                value: self.value.into(),
                expected: format!("{lo}..{hi}"),
            });
        }
        Ok(v)
    }

    fn money(&self) -> Result<u64, ConfigError> {
        parse_money_minor(self.value).ok_or_else(|| ConfigError::OutOfRange {
            key: self.key.into(),
            value: self.value.into(),
            expected: "a cost like 2.00".into(),
        })
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
        Config::from_ini(&fs::read_to_string(path)?)
    }

    /// Parse the INI text over the built-in defaults.
    pub fn from_ini(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find(['#', ';']) {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError::Parse {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                if !matches!(
                    section.as_str(),
                    "localization" | "segmentation" | "features" | "classifier" | "plate_type"
                        | "tariff" | "gate"
                ) {
                    return Err(ConfigError::UnknownSection(section));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if section.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: "key outside of any section".into(),
                });
            }
            cfg.apply(&section, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let ctx = KeyCtx { key, value };
        let loc: &mut LocalizationConfig = &mut self.pipeline.localization;
        let seg: &mut SegmentationConfig = &mut self.pipeline.segmentation;
        let pt: &mut PlateTypeConfig = &mut self.pipeline.plate_type;
        match (section, key) {
            ("localization", "blue_h_min") => loc.blue_h_min = ctx.f64_in(0.0, 1.0)?,
            ("localization", "blue_h_max") => loc.blue_h_max = ctx.f64_in(0.0, 1.0)?,
            ("localization", "blue_s_min") => loc.blue_s_min = ctx.f64_in(0.0, 1.0)?,
            ("localization", "blue_v_min") => loc.blue_v_min = ctx.f64_in(0.0, 1.0)?,
            ("localization", "min_strip_area") => loc.min_strip_area = ctx.uint(1, 1 << 24)? as usize,
            ("localization", "strip_ratio_min") => loc.strip_ratio_min = ctx.f64_in(0.1, 100.0)?,
            ("localization", "strip_ratio_max") => loc.strip_ratio_max = ctx.f64_in(0.1, 100.0)?,
            ("localization", "plate_width_factor") => loc.plate_width_factor = ctx.f64_in(1.0, 100.0)?,
            ("localization", "aspect_min") => loc.aspect_min = ctx.f64_in(0.1, 100.0)?,
            ("localization", "aspect_max") => loc.aspect_max = ctx.f64_in(0.1, 100.0)?,
            ("localization", "min_jumps") => loc.min_jumps = ctx.uint(0, 10_000)? as u32,
            ("segmentation", "min_char_area_frac") => seg.min_char_area_frac = ctx.f64_in(0.0, 1.0)?,
            ("segmentation", "min_char_height_frac") => seg.min_char_height_frac = ctx.f64_in(0.0, 1.0)?,
            ("segmentation", "max_char_width_frac") => seg.max_char_width_frac = ctx.f64_in(0.0, 1.0)?,
            ("segmentation", "max_chars") => seg.max_chars = ctx.uint(1, 64)? as usize,
            ("features", "normalize") => {
                self.normalize_features = match value {
                    "off" => false,
                    "per-glyph" => true,
                    _ => {
                        return Err(ConfigError::OutOfRange {
                            key: key.into(),
                            value: value.into(),
                            expected: "off|per-glyph".into(),
                        })
                    }
                }
            }
            ("classifier", "k") => self.k = ctx.uint(1, 1000)? as usize,
            ("classifier", "alphabet") => {
                self.alphabet = value.split_whitespace().map(str::to_string).collect();
                if self.alphabet.is_empty() {
                    return Err(ConfigError::OutOfRange {
                        key: key.into(),
                        value: value.into(),
                        expected: "at least one label".into(),
                    });
                }
            }
            ("plate_type", "preset") => {
                *pt = match value {
                    "paper" => PlateTypeConfig::paper(),
                    "standard-hue" => PlateTypeConfig::standard_hue(),
                    _ => {
                        return Err(ConfigError::OutOfRange {
                            key: key.into(),
                            value: value.into(),
                            expected: "paper|standard-hue".into(),
                        })
                    }
                }
            }
            ("plate_type", "red_h_min") => pt.red.h_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "red_h_max") => pt.red.h_max = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "red_s_min") => pt.red.s_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "red_v_min") => pt.red.v_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "yellow_h_min") => pt.yellow.h_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "yellow_h_max") => pt.yellow.h_max = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "yellow_s_min") => pt.yellow.s_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "yellow_v_min") => pt.yellow.v_min = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "white_s_max") => pt.white.s_max = ctx.f64_in(0.0, 1.0)?,
            ("plate_type", "white_v_min") => pt.white.v_min = ctx.f64_in(0.0, 1.0)?,
            ("tariff", "private") => self.tariff.private_minor = ctx.money()?,
            ("tariff", "public") => self.tariff.public_minor = ctx.money()?,
            ("tariff", "government") => self.tariff.government_minor = ctx.money()?,
            ("gate", "open_ms") => self.gate.open_ms = ctx.uint(1, 86_400_000)?,
            ("gate", "cooldown_ms") => self.gate.cooldown_ms = ctx.uint(0, 86_400_000)?,
            ("gate", "seg7") => {
                self.gate.seg7 = match value {
                    "cost" => Seg7Mode::Cost,
                    "count" => Seg7Mode::DailyCount,
                    _ => {
                        return Err(ConfigError::OutOfRange {
                            key: key.into(),
                            value: value.into(),
                            expected: "cost|count".into(),
                        })
                    }
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    section: section.into(),
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let loc = &self.pipeline.localization;
        let pairs = [
            ("blue_h_min/max", loc.blue_h_min, loc.blue_h_max),
            ("strip_ratio_min/max", loc.strip_ratio_min, loc.strip_ratio_max),
            ("aspect_min/max", loc.aspect_min, loc.aspect_max),
        ];
        for (name, lo, hi) in pairs {
            if lo > hi {
                return Err(ConfigError::OutOfRange {
                    key: name.into(),
                    value: format!("{lo} > {hi}"),
                    expected: "min <= max".into(),
                });
            }
        }
        Ok(())
    }
}
