// SPDX-License-Identifier: Apache-2.0

//! Pipeline configuration file.
//!
//! Lengths are in µm and converted to database units once the layout's
//! units are known. Relative paths are resolved against the directory that
//! holds the config file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use artistic_core::compose::{sort_stack, LayerStyle, Rgb, DEFAULT_PART_MAX_PX};
use artistic_core::meerkat::ArtRules;
use artistic_core::raster::DEFAULT_MAX_TILE_PX;
use artistic_core::{LayerKey, Rect};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("missing required field `{0}` for this command")]
    Missing(&'static str),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub gds_in: String,
    pub top_cell: String,
    pub top_metal: LayerKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logo: Option<LogoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<Vec<LayerStyle>>,
    #[serde(default = "default_background")]
    pub background: Rgb,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_background() -> Rgb {
    Rgb([0, 0, 0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogoConfig {
    pub path: String,
    #[serde(default = "default_threshold")]
    pub threshold: u8,
    /// `[x0, y0, x1, y1]` in µm.
    pub placement: [f64; 4],
    pub rules: RulesConfig,
}

fn default_threshold() -> u8 {
    128
}

/// [`ArtRules`] with lengths in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesConfig {
    pub cell_size: f64,
    pub gap: f64,
    #[serde(default = "one")]
    pub min_cells: u8,
    #[serde(default = "four")]
    pub max_cells: u8,
    #[serde(default)]
    pub keepout: f64,
    pub density_window: usize,
    pub max_density: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width: Option<f64>,
}

fn one() -> u8 {
    1
}

fn four() -> u8 {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoWindow {
    Auto,
}

/// Render window: `"auto"` (bounding box of the top cell) or `[x0, y0, x1, y1]` in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Auto(AutoWindow),
    Rect([f64; 4]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    #[serde(default = "auto_window")]
    pub window: WindowSpec,
    pub nm_per_px: f64,
    #[serde(default = "default_supersample")]
    pub supersample: u32,
    #[serde(default = "default_max_tile_px")]
    pub max_tile_px: u64,
    #[serde(default = "one_usize")]
    pub downscale: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dpi: Option<f64>,
    /// Largest single PNG; bigger images are split into parts.
    #[serde(default = "default_part_max_px")]
    pub part_max_px: u64,
}

fn auto_window() -> WindowSpec {
    WindowSpec::Auto(AutoWindow::Auto)
}

fn default_supersample() -> u32 {
    4
}

fn default_max_tile_px() -> u64 {
    DEFAULT_MAX_TILE_PX
}

fn default_part_max_px() -> u64 {
    DEFAULT_PART_MAX_PX
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Merged layout (chip plus art).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gds_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub png_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdf_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg_out: Option<String>,
    /// Coverage tiles written by `render` and read by `compose`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiles_dir: Option<String>,
    /// Art-only layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub art_gds_out: Option<String>,
    /// Top-metal layer extracted from the input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_metal_gds_out: Option<String>,
}

/// A validated config together with the directory its paths are relative to.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn resolve_opt(&self, p: &Option<String>) -> Option<PathBuf> {
        p.as_deref().map(|p| self.resolve(p))
    }

    /// Base name used for scratch files.
    pub fn stem(&self) -> String {
        self.path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("artistic")
            .to_owned()
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    let config = parse_config(&text).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse {
            path: path.to_owned(),
            message,
        },
        other => other,
    })?;
    let base_dir = path
        .parent()
        .map(|p| {
            if p.as_os_str().is_empty() {
                Path::new(".")
            } else {
                p
            }
        })
        .unwrap_or(Path::new("."))
        .to_owned();
    Ok(LoadedConfig {
        config,
        base_dir,
        path: path.to_owned(),
    })
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    let config: PipelineConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: PathBuf::new(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

fn rect_um(field: &'static str, r: [f64; 4]) -> Result<(), ConfigError> {
    if r.iter().all(|v| v.is_finite()) && r[2] > r[0] && r[3] > r[1] {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("{r:?} is not [x0, y0, x1, y1] with x1 > x0 and y1 > y0"),
        ))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.top_cell.is_empty() {
            return Err(invalid("top_cell", "must not be empty"));
        }
        if let Some(logo) = &self.logo {
            rect_um("logo.placement", logo.placement)?;
            let r = &logo.rules;
            positive("logo.rules.cell_size", r.cell_size)?;
            positive("logo.rules.gap", r.gap)?;
            if r.keepout.is_nan() || r.keepout < 0.0 {
                return Err(invalid("logo.rules.keepout", "must be non-negative"));
            }
        }
        if let Some(f) = &self.frame {
            positive("frame.nm_per_px", f.nm_per_px)?;
            if ![1, 2, 4, 8].contains(&f.supersample) {
                return Err(invalid(
                    "frame.supersample",
                    format!("{} is not 1, 2, 4 or 8", f.supersample),
                ));
            }
            if ![1, 2, 4, 8].contains(&f.downscale) {
                return Err(invalid(
                    "frame.downscale",
                    format!("{} is not 1, 2, 4 or 8", f.downscale),
                ));
            }
            if f.max_tile_px < 64 {
                return Err(invalid("frame.max_tile_px", "must be at least 64"));
            }
            if f.part_max_px == 0 {
                return Err(invalid("frame.part_max_px", "must be positive"));
            }
            if let Some(dpi) = f.dpi {
                positive("frame.dpi", dpi)?;
            }
            if let WindowSpec::Rect(r) = f.window {
                rect_um("frame.window", r)?;
            }
        }
        if let Some(stack) = &self.stack {
            if stack.is_empty() {
                return Err(invalid("stack", "must list at least one layer"));
            }
            for s in stack {
                if !(0.0..=1.0).contains(&s.opacity) {
                    return Err(invalid(
                        "stack.opacity",
                        format!("{} is outside 0..1", s.opacity),
                    ));
                }
            }
            sort_stack(stack).map_err(|e| invalid("stack.z_order", e.to_string()))?;
        }
        if self.outputs.pdf_out.is_some() && self.frame.as_ref().and_then(|f| f.dpi).is_none() {
            return Err(invalid("frame.dpi", "required when outputs.pdf_out is set"));
        }
        Ok(())
    }

    pub fn require_frame(&self) -> Result<&FrameConfig, ConfigError> {
        self.frame.as_ref().ok_or(ConfigError::Missing("frame"))
    }

    pub fn require_stack(&self) -> Result<Vec<LayerStyle>, ConfigError> {
        let stack = self.stack.as_ref().ok_or(ConfigError::Missing("stack"))?;
        sort_stack(stack).map_err(|e| invalid("stack.z_order", e.to_string()))
    }

    pub fn require_logo(&self) -> Result<&LogoConfig, ConfigError> {
        self.logo.as_ref().ok_or(ConfigError::Missing("logo"))
    }
}

/// µm to database units.
pub fn um_to_dbu(um: f64, nm_per_dbu: f64) -> i64 {
    (um * 1000.0 / nm_per_dbu).round() as i64
}

pub fn rect_to_dbu(r: [f64; 4], nm_per_dbu: f64) -> Rect {
    Rect::new(
        um_to_dbu(r[0], nm_per_dbu),
        um_to_dbu(r[1], nm_per_dbu),
        um_to_dbu(r[2], nm_per_dbu),
        um_to_dbu(r[3], nm_per_dbu),
    )
}

impl RulesConfig {
    pub fn to_rules(&self, nm_per_dbu: f64) -> ArtRules {
        let d = |v: f64| um_to_dbu(v, nm_per_dbu);
        ArtRules {
            cell_size: d(self.cell_size),
            gap: d(self.gap),
            min_cells: self.min_cells,
            max_cells: self.max_cells,
            keepout: d(self.keepout),
            density_window: self.density_window,
            max_density: self.max_density,
            seed: self.seed,
            min_spacing: self.min_spacing.map(d),
            min_width: self.min_width.map(d),
            max_width: self.max_width.map(d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"gds_in": "chip.gds", "top_cell": "TOP", "top_metal": {"layer": 4, "datatype": 0}}"#;

    fn with(extra: &str) -> String {
        format!("{}, {extra}}}", &MINIMAL[..MINIMAL.len() - 1])
    }

    #[test]
    fn defaults_applied() {
        let c = parse_config(&with(r#""frame": {"nm_per_px": 25}"#)).unwrap();
        let f = c.frame.unwrap();
        assert_eq!(f.nm_per_px, 25.0);
        assert_eq!(f.supersample, 4);
        assert_eq!(f.max_tile_px, 250_000_000);
        assert_eq!(f.downscale, 1);
        assert_eq!(f.window, WindowSpec::Auto(AutoWindow::Auto));
        assert_eq!(c.background, Rgb([0, 0, 0]));
    }

    #[test]
    fn missing_stack_is_named() {
        let c = parse_config(MINIMAL).unwrap();
        let err = c.require_stack().unwrap_err().to_string();
        assert!(err.contains("stack"), "{err}");
    }

    #[test]
    fn missing_required_field_is_named() {
        let err = parse_config(r#"{"gds_in": "a.gds", "top_metal": {"layer": 1, "datatype": 0}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("top_cell"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config(&with(r#""colour": "red""#)).is_err());
        assert!(parse_config(&with(r#""frame": {"nm_per_px": 25, "zoom": 2}"#)).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        assert!(parse_config(&with(r#""frame": {"nm_per_px": 0}"#)).is_err());
        assert!(parse_config(&with(r#""frame": {"nm_per_px": -3}"#)).is_err());
        assert!(parse_config(&with(r##""background": "#12345""##)).is_err());
        assert!(parse_config(&with(r#""frame": {"nm_per_px": 25, "supersample": 3}"#)).is_err());
        assert!(parse_config(&with(
            r#""frame": {"nm_per_px": 25}, "outputs": {"pdf_out": "a.pdf"}"#
        ))
        .is_err());
        let dup = r##""stack": [
            {"layer": 1, "datatype": 0, "color": "#ff0000", "opacity": 0.5, "z_order": 0},
            {"layer": 2, "datatype": 0, "color": "#00ff00", "opacity": 0.5, "z_order": 0}]"##;
        assert!(parse_config(&with(dup)).is_err());
    }

    #[test]
    fn explicit_window_and_roundtrip() {
        let text = with(
            r##""frame": {"window": [0, 0, 100, 50], "nm_per_px": 25, "dpi": 300},
                "stack": [{"layer": 1, "datatype": 0, "color": "#ff8000", "opacity": 0.5, "z_order": 1}],
                "background": "#101010",
                "logo": {"path": "l.png", "placement": [10, 10, 40, 40],
                         "rules": {"cell_size": 2, "gap": 0.5, "density_window": 10, "max_density": 0.6}},
                "outputs": {"png_out": "o.png", "pdf_out": "o.pdf"}"##,
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(
            c.frame.as_ref().unwrap().window,
            WindowSpec::Rect([0.0, 0.0, 100.0, 50.0])
        );
        let again = parse_config(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn micron_conversion() {
        assert_eq!(um_to_dbu(2.0, 1.0), 2000);
        assert_eq!(um_to_dbu(0.5, 0.5), 1000);
        let r = RulesConfig {
            cell_size: 2.0,
            gap: 0.5,
            min_cells: 1,
            max_cells: 4,
            keepout: 1.0,
            density_window: 10,
            max_density: 0.5,
            seed: 3,
            min_spacing: None,
            min_width: Some(1.0),
            max_width: None,
        }
        .to_rules(1.0);
        assert_eq!(
            (r.cell_size, r.gap, r.keepout, r.min_width),
            (2000, 500, 1000, Some(1000))
        );
    }
}
