// SPDX-License-Identifier: Apache-2.0

//! Stage orchestration for every subcommand.
//!
//! Each command loads what it needs, runs its stages in order and records a
//! lap per stage. Files are written under a `.partial` name and renamed when
//! complete, so a failed run never leaves a truncated artifact under its
//! final name.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use artistic_core::compose::{
    compose_frame, compose_tile, emit_pdf, read_png_rgba, ComposeError, LayerStyle, Manifest,
    PngColor, StitchTarget, Stitcher,
};
use artistic_core::gdsii::{
    extract_layer, merge_libraries, parse_library, write_library, GdsError, GdsLibrary,
};
use artistic_core::geom::{
    build_occupancy, flatten, flatten_each, FlatPolygon, FlattenError, TileIndex,
};
use artistic_core::meerkat::{
    check_drc, export_art_gds, export_svg, generate_art, image_to_bw, load_logo, map_logo_to_grid,
    ArtError,
};
use artistic_core::raster::{
    plan_tiles, rasterize_tile, tile_file_name, write_coverage_png, CoverageTile, RasterError,
    RenderFrame, TileGrid,
};
use artistic_core::{Exec, LayerKey, Rect};
use serde::{Deserialize, Serialize};

use crate::config::{load_config, rect_to_dbu, ConfigError, LoadedConfig, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Extract,
    Art,
    Merge,
    Render,
    Compose,
    Pipeline,
}

/// Failure class; decides the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Gds,
    Art,
    Render,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Gds => 3,
            ErrorClass::Art => 4,
            ErrorClass::Render => 5,
            ErrorClass::Io => 6,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub stage: &'static str,
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    fn new(stage: &'static str, class: ErrorClass, message: impl std::fmt::Display) -> Self {
        Self {
            stage,
            class,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

fn config_err(stage: &'static str) -> impl Fn(ConfigError) -> CliError {
    move |e| CliError::new(stage, ErrorClass::Config, e)
}

fn gds_err(stage: &'static str) -> impl Fn(GdsError) -> CliError {
    move |e| CliError::new(stage, ErrorClass::Gds, e)
}

fn flatten_err(stage: &'static str) -> impl Fn(FlattenError) -> CliError {
    move |e| CliError::new(stage, ErrorClass::Gds, e)
}

fn art_err(stage: &'static str) -> impl Fn(ArtError) -> CliError {
    move |e| match e {
        ArtError::Image(_) | ArtError::EmptyImage => CliError::new(stage, ErrorClass::Io, e),
        e => CliError::new(stage, ErrorClass::Art, e),
    }
}

fn raster_err(stage: &'static str) -> impl Fn(RasterError) -> CliError {
    move |e| match e {
        RasterError::Io { .. } | RasterError::Png { .. } => CliError::new(stage, ErrorClass::Io, e),
        e => CliError::new(stage, ErrorClass::Render, e),
    }
}

fn compose_err(stage: &'static str) -> impl Fn(ComposeError) -> CliError {
    move |e| match e {
        ComposeError::Io { .. } => CliError::new(stage, ErrorClass::Io, e),
        e => CliError::new(stage, ErrorClass::Render, e),
    }
}

fn io_err<'p>(stage: &'static str, path: &'p Path) -> impl Fn(std::io::Error) -> CliError + 'p {
    move |e| CliError::new(stage, ErrorClass::Io, format!("{}: {e}", path.display()))
}

/// Wall time per stage. Laps are taken back to back, so they sum exactly to
/// the total.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub stages: Vec<(String, Duration)>,
    pub total: Duration,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn stage_sum(&self) -> Duration {
        self.stages.iter().map(|(_, d)| *d).sum()
    }

    pub fn ran(&self, stage: &str) -> bool {
        self.stages.iter().any(|(s, _)| s == stage)
    }
}

struct Laps {
    start: Instant,
    last: Instant,
    stages: Vec<(String, Duration)>,
}

impl Laps {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let d = now - self.last;
        self.last = now;
        log::info!("stage={stage} seconds={:.3}", d.as_secs_f64());
        self.stages.push((stage.to_owned(), d));
    }

    fn finish(self, artifacts: Vec<PathBuf>) -> RunReport {
        let total = self.last - self.start;
        log::info!("total seconds={:.3}", total.as_secs_f64());
        RunReport {
            stages: self.stages,
            total,
            artifacts,
        }
    }
}

/// Scratch directory: `$ARTISTIC_TMPDIR`, else `<system temp>/artistic`.
pub fn scratch_dir() -> PathBuf {
    std::env::var_os("ARTISTIC_TMPDIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("artistic"))
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn ensure_parent(stage: &'static str, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(stage, dir))?;
    }
    Ok(())
}

fn write_atomic(stage: &'static str, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    ensure_parent(stage, path)?;
    let tmp = partial_path(path);
    let res = std::fs::write(&tmp, bytes).and_then(|_| std::fs::rename(&tmp, path));
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res.map_err(io_err(stage, path))
}

fn read_gds(stage: &'static str, path: &Path) -> Result<GdsLibrary, CliError> {
    let bytes = std::fs::read(path).map_err(io_err(stage, path))?;
    parse_library(&bytes)
        .map_err(|e| CliError::new(stage, ErrorClass::Gds, format!("{}: {e}", path.display())))
}

fn write_gds(stage: &'static str, path: &Path, lib: &GdsLibrary) -> Result<(), CliError> {
    let bytes = write_library(lib).map_err(gds_err(stage))?;
    write_atomic(stage, path, &bytes)
}

fn require_file(stage: &'static str, path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::new(
            stage,
            ErrorClass::Io,
            format!("{}: file not found", path.display()),
        ))
    }
}

struct Run<'a> {
    cfg: &'a LoadedConfig,
    exec: Exec,
    laps: Laps,
    artifacts: Vec<PathBuf>,
}

/// Loads the config and runs `command`, using the current rayon pool.
pub fn run_command(command: Command, config_path: &Path) -> Result<RunReport, CliError> {
    let laps = Laps::new();
    let cfg = load_config(config_path).map_err(config_err("config"))?;
    match command {
        Command::Render | Command::Compose => {
            cfg.config.require_frame().map_err(config_err("config"))?;
            cfg.config.require_stack().map_err(config_err("config"))?;
        }
        Command::Art => {
            cfg.config.require_logo().map_err(config_err("config"))?;
        }
        _ => {}
    }
    let mut run = Run {
        cfg: &cfg,
        exec: Exec::Parallel,
        laps,
        artifacts: Vec::new(),
    };
    run.laps.lap("config");
    match command {
        Command::Extract => run.extract_cmd()?,
        Command::Art => run.art_cmd()?,
        Command::Merge => run.merge_cmd()?,
        Command::Render => run.render_cmd()?,
        Command::Compose => run.compose_cmd()?,
        Command::Pipeline => run.pipeline_cmd()?,
    }
    validate_artifacts(&run.artifacts)?;
    run.laps.lap("validate");
    Ok(run.laps.finish(run.artifacts))
}

/// Art generation output.
pub struct ArtOutput {
    pub library: GdsLibrary,
    pub svg: String,
    pub shapes: usize,
}

/// Everything needed to render a frame.
pub struct Prepared {
    pub frame: RenderFrame,
    pub grid: TileGrid,
    pub index: TileIndex,
    pub stack: Vec<LayerStyle>,
    pub factor: usize,
}

/// Contents of `tiles.json` in the tile spill directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSpill {
    pub frame: RenderFrame,
    pub width: usize,
    pub height: usize,
    pub tile_w: usize,
    pub tile_h: usize,
    pub layers: Vec<LayerKey>,
}

const SPILL_INDEX: &str = "tiles.json";

impl<'a> Run<'a> {
    fn c(&self) -> &'a crate::config::PipelineConfig {
        &self.cfg.config
    }

    fn scratch_file(&self, suffix: &str) -> PathBuf {
        scratch_dir().join(format!("{}.{suffix}", self.cfg.stem()))
    }

    fn art_gds_path(&self) -> PathBuf {
        self.cfg
            .resolve_opt(&self.c().outputs.art_gds_out)
            .unwrap_or_else(|| self.scratch_file("art.gds"))
    }

    fn tiles_dir(&self) -> PathBuf {
        self.cfg
            .resolve_opt(&self.c().outputs.tiles_dir)
            .unwrap_or_else(|| scratch_dir().join(format!("{}-tiles", self.cfg.stem())))
    }

    fn load_input(&mut self) -> Result<GdsLibrary, CliError> {
        let path = self.cfg.resolve(&self.c().gds_in);
        require_file("read", &path)?;
        let lib = read_gds("read", &path)?;
        if lib.structure(&self.c().top_cell).is_none() {
            return Err(CliError::new(
                "read",
                ErrorClass::Gds,
                format!(
                    "top cell {:?} not found in {}",
                    self.c().top_cell,
                    path.display()
                ),
            ));
        }
        self.laps.lap("read");
        Ok(lib)
    }

    fn emit(&mut self, stage: &'static str, path: PathBuf, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(stage, &path, bytes)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn emit_gds(
        &mut self,
        stage: &'static str,
        path: PathBuf,
        lib: &GdsLibrary,
    ) -> Result<(), CliError> {
        write_gds(stage, &path, lib)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn extract(&mut self, chip: &GdsLibrary) -> Result<GdsLibrary, CliError> {
        let top_metal = extract_layer(chip, self.c().top_metal);
        if let Some(p) = self.cfg.resolve_opt(&self.c().outputs.top_metal_gds_out) {
            self.emit_gds("extract", p, &top_metal)?;
        }
        self.laps.lap("extract");
        Ok(top_metal)
    }

    fn art(&mut self, chip: &GdsLibrary, top_metal: &GdsLibrary) -> Result<ArtOutput, CliError> {
        const S: &str = "art";
        let c = self.c();
        let logo_cfg = c.require_logo().map_err(config_err(S))?;
        let nm_per_dbu = chip.units.nm_per_dbu();
        let rules = logo_cfg.rules.to_rules(nm_per_dbu);
        let placement = rect_to_dbu(logo_cfg.placement, nm_per_dbu);

        let chip_bbox = geometry_bbox(chip, &c.top_cell).map_err(flatten_err(S))?;
        match chip_bbox {
            Some(b) if b.contains_rect(&placement) => {}
            _ => {
                return Err(CliError::new(
                    S,
                    ErrorClass::Art,
                    format!(
                        "logo placement {placement:?} does not fit the chip extent {chip_bbox:?}"
                    ),
                ))
            }
        }
        let logo_path = self.cfg.resolve(&logo_cfg.path);
        require_file(S, &logo_path)?;
        let image = load_logo(&logo_path).map_err(art_err(S))?;
        let bw = image_to_bw(&image, logo_cfg.threshold);
        let grid = map_logo_to_grid(&bw, placement, &rules).map_err(art_err(S))?;
        let metal = flatten(top_metal, &c.top_cell, Some(c.top_metal)).map_err(flatten_err(S))?;
        let occ = build_occupancy(
            &metal,
            grid.origin(),
            grid.pitch,
            grid.cols(),
            grid.rows(),
            rules.keepout,
        );
        let shapes = generate_art(&grid, &occ, &rules).map_err(art_err(S))?;
        let report = check_drc(&shapes, &occ, &rules);
        if !report.is_clean() {
            return Err(CliError::new(
                S,
                ErrorClass::Art,
                format!(
                    "generated art fails DRC: {:?}",
                    &report.violations[..report.violations.len().min(5)]
                ),
            ));
        }
        log::info!(
            "art: {}x{} grid, {} occupied, {} shapes",
            grid.cols(),
            grid.rows(),
            occ.occupied.count_ones(),
            shapes.len()
        );
        let library = export_art_gds(&shapes, c.top_metal, chip.units);
        let svg = export_svg(&shapes, &chip.units, placement);
        let out = ArtOutput {
            library,
            svg,
            shapes: shapes.len(),
        };
        if let Some(p) = self.cfg.resolve_opt(&c.outputs.svg_out) {
            self.emit(S, p, out.svg.as_bytes())?;
        }
        if let Some(p) = self.cfg.resolve_opt(&c.outputs.art_gds_out) {
            self.emit_gds(S, p, &out.library)?;
        }
        self.laps.lap(S);
        Ok(out)
    }

    fn merge(&mut self, chip: &GdsLibrary, art: &GdsLibrary) -> Result<GdsLibrary, CliError> {
        let merged = merge_libraries(chip, art, &self.c().top_cell).map_err(gds_err("merge"))?;
        if let Some(p) = self.cfg.resolve_opt(&self.c().outputs.gds_out) {
            self.emit_gds("merge", p, &merged)?;
        }
        self.laps.lap("merge");
        Ok(merged)
    }

    fn prepare(&mut self, lib: &GdsLibrary) -> Result<Prepared, CliError> {
        const S: &str = "prepare";
        let c = self.c();
        let frame_cfg = c.require_frame().map_err(config_err(S))?;
        let stack = c.require_stack().map_err(config_err(S))?;
        let keys: BTreeSet<LayerKey> = stack.iter().map(|s| s.key()).collect();
        let nm_per_dbu = lib.units.nm_per_dbu();

        let mut bbox: Option<Rect> = None;
        let mut polys: Vec<FlatPolygon> = Vec::new();
        flatten_each(lib, &c.top_cell, None, |p| {
            bbox = Some(bbox.map_or(p.bbox, |b| b.union(&p.bbox)));
            if keys.contains(&p.layer) {
                polys.push(p);
            }
        })
        .map_err(flatten_err(S))?;
        let window = match frame_cfg.window {
            WindowSpec::Auto(_) => bbox.ok_or_else(|| {
                CliError::new(
                    S,
                    ErrorClass::Render,
                    "top cell has no geometry for an automatic window",
                )
            })?,
            WindowSpec::Rect(r) => rect_to_dbu(r, nm_per_dbu),
        };
        let factor = frame_cfg.downscale;
        let frame = RenderFrame::new(
            window,
            frame_cfg.nm_per_px,
            nm_per_dbu,
            frame_cfg.supersample,
            frame_cfg.max_tile_px,
        )
        .map_err(raster_err(S))?
        .pad_to_multiple(factor);
        let grid = plan_tiles(&frame).map_err(raster_err(S))?;
        let n = polys.len();
        let index = TileIndex::build(polys, frame.bin_spec(&grid));
        log::info!(
            "render: {}x{} px as {}x{} tiles of {}x{}, {} polygons on {} layers",
            frame.out_width_px,
            frame.out_height_px,
            grid.cols,
            grid.rows,
            grid.tile_w,
            grid.tile_h,
            n,
            stack.len()
        );
        self.laps.lap(S);
        Ok(Prepared {
            frame,
            grid,
            index,
            stack,
            factor,
        })
    }

    fn stitch_target(&self) -> Result<StitchTarget, CliError> {
        let c = self.c();
        let frame_cfg = c.require_frame().map_err(config_err("compose"))?;
        let png_path = match (&c.outputs.png_out, &c.outputs.pdf_out) {
            (Some(p), _) => self.cfg.resolve(p),
            (None, Some(_)) => self.scratch_file("png"),
            (None, None) => {
                return Err(CliError::new(
                    "compose",
                    ErrorClass::Config,
                    ConfigError::Missing("outputs.png_out"),
                ))
            }
        };
        ensure_parent("compose", &png_path)?;
        Ok(StitchTarget {
            png_path,
            color: PngColor::Rgb,
            part_max_px: frame_cfg.part_max_px,
            dpi: frame_cfg.dpi,
        })
    }

    /// Records the stitched images and writes the PDF if requested.
    fn finish_image(&mut self, target: &StitchTarget, manifest: &Manifest) -> Result<(), CliError> {
        const S: &str = "pdf";
        let dir = target
            .png_path
            .parent()
            .unwrap_or(Path::new("."))
            .to_owned();
        let requested_png = self.c().outputs.png_out.is_some();
        if requested_png {
            if manifest.parts.len() > 1 {
                self.artifacts.push(target.manifest_path());
            }
            self.artifacts
                .extend(manifest.parts.iter().map(|p| dir.join(&p.file)));
        }
        if let Some(pdf) = self.cfg.resolve_opt(&self.c().outputs.pdf_out) {
            let dpi = self
                .c()
                .frame
                .as_ref()
                .and_then(|f| f.dpi)
                .expect("validated with pdf_out");
            ensure_parent(S, &pdf)?;
            let page = emit_pdf(manifest, &dir, dpi, &pdf).map_err(compose_err(S))?;
            log::info!("pdf: {:.2} x {:.2} pt", page.width_pt, page.height_pt);
            self.artifacts.push(pdf);
            self.laps.lap(S);
        }
        Ok(())
    }

    fn render_compose(&mut self, prepared: &Prepared) -> Result<(), CliError> {
        let target = self.stitch_target()?;
        let mut stitcher =
            Stitcher::new(prepared.grid.scaled_down(prepared.factor), target.clone());
        compose_frame(
            &prepared.index,
            &prepared.frame,
            &prepared.grid,
            &prepared.stack,
            self.c().background,
            prepared.factor,
            self.exec,
            &mut stitcher,
        )
        .map_err(compose_err("render"))?;
        let manifest = stitcher.finish().map_err(compose_err("render"))?;
        self.laps.lap("render");
        self.finish_image(&target, &manifest)
    }

    fn extract_cmd(&mut self) -> Result<(), CliError> {
        let chip = self.load_input()?;
        let top_metal = self.extract(&chip)?;
        if self.c().outputs.top_metal_gds_out.is_none() {
            let p = self.scratch_file("top_metal.gds");
            self.emit_gds("extract", p, &top_metal)?;
        }
        Ok(())
    }

    fn art_cmd(&mut self) -> Result<(), CliError> {
        let chip = self.load_input()?;
        let top_metal = self.extract(&chip)?;
        let art = self.art(&chip, &top_metal)?;
        if self.c().outputs.art_gds_out.is_none() {
            let p = self.art_gds_path();
            self.emit_gds("art", p, &art.library)?;
        }
        Ok(())
    }

    fn merge_cmd(&mut self) -> Result<(), CliError> {
        let chip = self.load_input()?;
        let art_path = self.art_gds_path();
        require_file("merge", &art_path)?;
        let art = read_gds("merge", &art_path)?;
        if self.c().outputs.gds_out.is_none() {
            return Err(CliError::new(
                "merge",
                ErrorClass::Config,
                ConfigError::Missing("outputs.gds_out"),
            ));
        }
        self.merge(&chip, &art)?;
        Ok(())
    }

    /// Layout to render: the merged output when art is configured.
    fn render_source(&mut self) -> Result<GdsLibrary, CliError> {
        if self.c().logo.is_some() {
            let p = self
                .cfg
                .resolve_opt(&self.c().outputs.gds_out)
                .ok_or_else(|| {
                    CliError::new(
                        "read",
                        ErrorClass::Config,
                        ConfigError::Missing("outputs.gds_out"),
                    )
                })?;
            require_file("read", &p)?;
            let lib = read_gds("read", &p)?;
            self.laps.lap("read");
            Ok(lib)
        } else {
            self.load_input()
        }
    }

    fn render_cmd(&mut self) -> Result<(), CliError> {
        const S: &str = "render";
        let lib = self.render_source()?;
        let prepared = self.prepare(&lib)?;
        let dir = self.tiles_dir();
        std::fs::create_dir_all(&dir).map_err(io_err(S, &dir))?;
        let _ = std::fs::remove_file(dir.join(SPILL_INDEX));
        let (grid, frame) = (&prepared.grid, &prepared.frame);
        self.exec
            .try_for_each_range(grid.len(), |t| {
                let tile = grid.tile(t);
                for s in &prepared.stack {
                    let cov = rasterize_tile(&prepared.index.bucket(s.key(), t), frame, &tile);
                    let path = dir.join(tile_file_name(s.key(), tile.col, tile.row));
                    write_coverage_png(&cov, &path)?;
                }
                Ok(())
            })
            .map_err(raster_err(S))?;
        let spill = TileSpill {
            frame: *frame,
            width: grid.width,
            height: grid.height,
            tile_w: grid.tile_w,
            tile_h: grid.tile_h,
            layers: prepared.stack.iter().map(|s| s.key()).collect(),
        };
        let json = serde_json::to_vec_pretty(&spill).expect("spill index serializes");
        self.emit(S, dir.join(SPILL_INDEX), &json)?;
        self.laps.lap(S);
        Ok(())
    }

    fn compose_cmd(&mut self) -> Result<(), CliError> {
        const S: &str = "compose";
        let dir = self.tiles_dir();
        let index_path = dir.join(SPILL_INDEX);
        require_file(S, &index_path)?;
        let text = std::fs::read_to_string(&index_path).map_err(io_err(S, &index_path))?;
        let spill: TileSpill = serde_json::from_str(&text).map_err(|e| {
            CliError::new(
                S,
                ErrorClass::Render,
                format!("{}: {e}", index_path.display()),
            )
        })?;
        let stack = self.c().require_stack().map_err(config_err(S))?;
        if let Some(missing) = stack.iter().find(|s| !spill.layers.contains(&s.key())) {
            return Err(CliError::new(
                S,
                ErrorClass::Render,
                format!(
                    "layer {} was not rendered into {}",
                    missing.key(),
                    dir.display()
                ),
            ));
        }
        let factor = self.c().require_frame().map_err(config_err(S))?.downscale;
        let grid = TileGrid::new(spill.width, spill.height, spill.tile_w, spill.tile_h);
        let target = self.stitch_target()?;
        let mut stitcher = Stitcher::new(grid.scaled_down(factor), target.clone());
        let background = self.c().background;
        for row in 0..grid.rows {
            let tiles = self.exec.map_range(grid.cols, |col| {
                let tile = grid.tile(row * grid.cols + col);
                let covs = stack
                    .iter()
                    .map(|s| {
                        read_coverage(
                            &dir.join(tile_file_name(s.key(), col, row)),
                            tile.index,
                            tile.w,
                            tile.h,
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let layers: Vec<(&LayerStyle, &CoverageTile)> = stack.iter().zip(&covs).collect();
                compose_tile(tile.index, &layers, background, factor, tile.w, tile.h)
            });
            for t in tiles {
                stitcher
                    .push(t.map_err(compose_err(S))?)
                    .map_err(compose_err(S))?;
            }
        }
        let manifest = stitcher.finish().map_err(compose_err(S))?;
        self.laps.lap(S);
        self.finish_image(&target, &manifest)
    }

    fn pipeline_cmd(&mut self) -> Result<(), CliError> {
        let chip = self.load_input()?;
        let layout = if self.c().logo.is_some() {
            let top_metal = self.extract(&chip)?;
            let art = self.art(&chip, &top_metal)?;
            self.merge(&chip, &art.library)?
        } else {
            if let Some(p) = self.cfg.resolve_opt(&self.c().outputs.gds_out) {
                self.emit_gds("merge", p, &chip)?;
                self.laps.lap("merge");
            }
            chip
        };
        if self.c().stack.is_some() {
            let prepared = self.prepare(&layout)?;
            self.render_compose(&prepared)?;
        }
        Ok(())
    }
}

fn geometry_bbox(lib: &GdsLibrary, top: &str) -> Result<Option<Rect>, FlattenError> {
    let mut bbox: Option<Rect> = None;
    flatten_each(lib, top, None, |p| {
        bbox = Some(bbox.map_or(p.bbox, |b| b.union(&p.bbox)));
    })?;
    Ok(bbox)
}

fn read_coverage(
    path: &Path,
    index: usize,
    w: usize,
    h: usize,
) -> Result<CoverageTile, ComposeError> {
    let (pw, ph, rgba) = read_png_rgba(path)?;
    if (pw, ph) != (w, h) {
        return Err(ComposeError::DimensionMismatch {
            left: (w, h),
            right: (pw, ph),
        });
    }
    Ok(CoverageTile {
        index,
        width: w,
        height: h,
        coverage: rgba.chunks_exact(4).map(|p| p[0]).collect(),
    })
}

/// Checks each artifact by format: GDSII parses, PNG has a valid header,
/// PDF and SVG are complete documents, JSON parses.
pub fn validate_artifacts(paths: &[PathBuf]) -> Result<(), CliError> {
    const S: &str = "validate";
    for p in paths {
        let bad = |why: &str| CliError::new(S, ErrorClass::Io, format!("{}: {why}", p.display()));
        let ext = p
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        match ext.as_str() {
            "gds" | "gds2" | "gdsii" => {
                read_gds(S, p)?;
            }
            "png" => {
                let mut head = [0u8; 24];
                std::fs::File::open(p)
                    .and_then(|mut f| f.read_exact(&mut head))
                    .map_err(io_err(S, p))?;
                if head[..8] != [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A]
                    || &head[12..16] != b"IHDR"
                {
                    return Err(bad("not a PNG"));
                }
            }
            "pdf" => {
                let bytes = std::fs::read(p).map_err(io_err(S, p))?;
                if !bytes.starts_with(b"%PDF-") || !bytes.ends_with(b"%%EOF\n") {
                    return Err(bad("incomplete PDF"));
                }
            }
            "svg" => {
                let text = std::fs::read_to_string(p).map_err(io_err(S, p))?;
                if !text.trim_end().ends_with("</svg>") {
                    return Err(bad("incomplete SVG"));
                }
            }
            "json" => {
                let text = std::fs::read_to_string(p).map_err(io_err(S, p))?;
                serde_json::from_str::<serde_json::Value>(&text)
                    .map_err(|e| bad(&e.to_string()))?;
            }
            _ => {
                if !p.is_file() {
                    return Err(bad("missing"));
                }
            }
        }
    }
    Ok(())
}
