mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wave_elastix::fem::{dispersion_curves_with, uniform_gamma_grid, SolverKind};
use wave_elastix::field::DisplacementField;
use wave_elastix::inversion::*;
use wave_elastix::io::png::{write_heatmap, Heatmap};
use wave_elastix::motion::{phase_displacements_with_diagnostics, FilterParams};
use wave_elastix::objectives::{rasterize, RasterParams};
use wave_elastix::spectral::{observed_dispersion_with, DispersionImage, Normalization, Roi, SpectralOptions};
use wave_elastix::video::VideoClip;
use wave_elastix::{Error, LayerGeometry, Material, Result};

use manifest::RunManifest;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error (unknown flag, missing argument)
  3  invalid configuration or parameters
  4  file i/o failure or malformed container
  5  numerical failure (eigensolver, unstable time stepping)
  6  unusable input data (no texture, too few samples, degenerate image, shape mismatch)
  7  value outside its valid range or domain

On failure a single JSON line {\"error\":{\"kind\",\"code\",\"message\"}} is written to stderr.
Environment: WAVE_ELASTIX_THREADS caps the worker count (overridden by --threads).";

#[derive(Parser)]
#[command(name = "wave-elastix", version, about = "Layer thickness and stiffness from surface-wave video", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. --set sim.dt=0.0002.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Write a run manifest to this path.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a chirp-driven strip and write the sampled surface field (.dfz).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        out: PathBuf,
        /// Also render the clean field as PNG frames into this directory.
        #[arg(long)]
        video_dir: Option<PathBuf>,
    },
    /// Extract a displacement field (.dfz) from a PNG frame directory or video container.
    Extract {
        #[command(flatten)]
        common: Common,
        video: PathBuf,
        /// Frame rate; required for PNG directories.
        #[arg(long)]
        fps: Option<f64>,
        /// Pixels per metre; required for PNG directories.
        #[arg(long)]
        ppm: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Observed dispersion image (.dgz) of a displacement field.
    Dispersion {
        #[command(flatten)]
        common: Common,
        field: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// FEM dispersion curves of one layer (CSV).
    Curves {
        #[command(flatten)]
        common: Common,
        /// Layer thickness, m.
        #[arg(long)]
        thickness: Option<f64>,
        /// Young's modulus, Pa.
        #[arg(long)]
        stiffness: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Grid-search thickness and stiffness for a dispersion image.
    Invert {
        #[command(flatten)]
        common: Common,
        image: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Characteristic numbers of an observation setup.
    Charnums {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate, observe and invert in one run.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "pipeline-out")]
        out_dir: PathBuf,
    },
    /// Time dispersion datasets for several element sizes.
    Runtime {
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::InvalidGeometry(_)
        | Error::InvalidMaterial(_)
        | Error::ConstitutiveSingularity { .. }
        | Error::Contract(_) => 3,
        Error::Io { .. } | Error::Format { .. } | Error::Image(_) => 4,
        Error::Eigen { .. } | Error::Instability { .. } => 5,
        Error::InsufficientTexture(_)
        | Error::InsufficientSamples(_)
        | Error::Degenerate(_)
        | Error::Shape(_)
        | Error::Size(_)
        | Error::Resampling(_) => 6,
        Error::WavenumberOutOfRange { .. } | Error::Range(_) | Error::Domain(_) => 7,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                json!({"error": {"kind": e.kind(), "code": code, "message": e.to_string()}})
            );
            ExitCode::from(code)
        }
    }
}

fn setup_threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("WAVE_ELASTIX_THREADS").ok();
    let n = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(s)) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("WAVE_ELASTIX_THREADS must be a positive integer, got {s:?}")))?,
        ),
        (None, None) => None,
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn echo(config: &impl Serialize) -> Result<()> {
    eprintln!("effective config: {}", serde_json::to_string(config)?);
    Ok(())
}

fn finish(manifest: RunManifest, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => manifest.write(p),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    setup_threads(cli.threads)?;
    match cli.command {
        Command::Simulate { common, out, video_dir } => simulate(&common, &out, video_dir.as_deref()),
        Command::Extract {
            common,
            video,
            fps,
            ppm,
            out,
        } => extract(&common, &video, fps, ppm, &out),
        Command::Dispersion {
            common,
            field,
            out,
            png,
        } => dispersion(&common, &field, &out, png.as_deref()),
        Command::Curves {
            common,
            thickness,
            stiffness,
            out,
            png,
        } => curves(&common, thickness, stiffness, &out, png.as_deref()),
        Command::Invert { common, image, out_dir } => invert(&common, &image, &out_dir),
        Command::Charnums { common, out } => charnums(&common, out.as_deref()),
        Command::Pipeline { common, out_dir } => pipeline(&common, &out_dir),
        Command::Runtime { common } => runtime(&common),
    }
}

fn simulate(common: &Common, out: &Path, video_dir: Option<&Path>) -> Result<()> {
    let scenario: Scenario = config::load(common.config.as_deref(), &common.sets)?;
    echo(&scenario)?;
    let mut m = RunManifest::new("simulate", &scenario)?;
    let clean = m.time("simulate", || scenario.sampled_field())?;
    let mut field = clean.clone();
    add_noise(&mut field, scenario.noise, scenario.seed)?;
    field.write(out)?;
    m.output(out)?;
    if let Some(dir) = video_dir {
        let path = scenario.video.unwrap_or_default();
        let clip = m.time("render", || scenario.render(&clean, &path))?;
        clip.write_png_frames(dir)?;
        m.output(dir)?;
    }
    println!(
        "wrote {} ({}×{}×{})",
        out.display(),
        field.rows,
        field.cols,
        field.frames
    );
    finish(m, common.manifest.as_deref())
}

fn extract(common: &Common, video: &Path, fps: Option<f64>, ppm: Option<f64>, out: &Path) -> Result<()> {
    let params: FilterParams = config::load(common.config.as_deref(), &common.sets)?;
    echo(&params)?;
    let mut m = RunManifest::new("extract", &params)?;
    m.input(video)?;
    let clip = if video.is_dir() {
        let (Some(fps), Some(ppm)) = (fps, ppm) else {
            return Err(Error::Config(
                "--fps and --ppm are required for a PNG frame directory".into(),
            ));
        };
        VideoClip::read_png_frames(video, fps, ppm)?
    } else {
        let mut clip = VideoClip::read(video, 1.0, 1.0)?;
        clip.fps = fps.unwrap_or(clip.fps);
        clip.ppm = ppm.unwrap_or(clip.ppm);
        clip
    };
    let (field, diag) = m.time("extract", || phase_displacements_with_diagnostics(&clip, &params))?;
    for w in &diag.warnings {
        log::warn!("{w}");
    }
    field.write(out)?;
    m.output(out)?;
    println!(
        "wrote {} ({}×{}×{}), filled fraction u={:.3} v={:.3}",
        out.display(),
        field.rows,
        field.cols,
        field.frames,
        diag.filled_fraction.0,
        diag.filled_fraction.1
    );
    finish(m, common.manifest.as_deref())
}

fn image_png(img: &DispersionImage, path: &Path, marker: Option<(usize, usize)>) -> Result<()> {
    write_heatmap(
        path,
        &Heatmap {
            values: &img.values,
            x_axis: &img.gamma,
            y_axis: &img.omega,
            marker,
            log_scale: img.normalization == Normalization::Raw,
        },
    )
}

fn dispersion(common: &Common, field_path: &Path, out: &Path, png: Option<&Path>) -> Result<()> {
    let opts: SpectralOptions = config::load(common.config.as_deref(), &common.sets)?;
    echo(&opts)?;
    let mut m = RunManifest::new("dispersion", &opts)?;
    m.input(field_path)?;
    let field = DisplacementField::read(field_path)?;
    let img = m.time("dispersion", || observed_dispersion_with(&field, opts))?;
    img.write(out)?;
    m.output(out)?;
    if let Some(p) = png {
        image_png(&img, p, None)?;
        m.output(p)?;
    }
    let (ng, nw) = img.shape();
    println!("wrote {} ({ng} γ bins × {nw} ω bins)", out.display());
    finish(m, common.manifest.as_deref())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurvesConfig {
    /// m
    thickness: f64,
    /// Pa
    stiffness: f64,
    fem: FemConfig,
    /// Upper end of the uniform γ grid, rad/m (clipped to π/a).
    gamma_max: f64,
    /// Explicit γ grid, rad/m; replaces the uniform grid when set.
    gamma: Option<Vec<f64>>,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        CurvesConfig {
            thickness: 0.010,
            stiffness: 10e3,
            fem: FemConfig::default(),
            gamma_max: 900.0,
            gamma: None,
        }
    }
}

fn curves(
    common: &Common,
    thickness: Option<f64>,
    stiffness: Option<f64>,
    out: &Path,
    png: Option<&Path>,
) -> Result<()> {
    let mut cfg: CurvesConfig = config::load(common.config.as_deref(), &common.sets)?;
    cfg.thickness = thickness.unwrap_or(cfg.thickness);
    cfg.stiffness = stiffness.unwrap_or(cfg.stiffness);
    echo(&cfg)?;
    let mut m = RunManifest::new("curves", &cfg)?;
    let gamma = cfg.gamma.clone().unwrap_or_else(|| cfg.fem.gamma_grid(cfg.gamma_max));
    let curves = m.time("eigen", || cfg.fem.curves(cfg.thickness, cfg.stiffness, &gamma))?;
    curves.write_csv(out)?;
    m.output(out)?;
    if let Some(p) = png {
        if curves.gamma.len() < 2 {
            log::warn!("a single wavenumber has no curve to draw; skipping {}", p.display());
        } else {
            let top = curves.branches.iter().flatten().fold(0.0f64, |a, &b| a.max(b)) * 1.05;
            let omega: Vec<f64> = (1..=200).map(|i| top * i as f64 / 200.0).collect();
            let g = &curves.gamma;
            let gamma_axis: Vec<f64> = (0..200)
                .map(|i| g[0] + (g[g.len() - 1] - g[0]) * i as f64 / 199.0)
                .collect();
            let img = rasterize(&curves, &gamma_axis, &omega, RasterParams { sigma: 1.0 })?;
            image_png(&img, p, None)?;
            m.output(p)?;
        }
    }
    println!(
        "wrote {} ({} branches × {} wavenumbers)",
        out.display(),
        curves.branch_count(),
        curves.gamma.len()
    );
    finish(m, common.manifest.as_deref())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct AxisSpec {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    /// m
    thickness: AxisSpec,
    /// Pa
    stiffness: AxisSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            thickness: AxisSpec {
                min: 0.007,
                max: 0.013,
                count: 21,
            },
            stiffness: AxisSpec {
                min: 7e3,
                max: 13e3,
                count: 21,
            },
        }
    }
}

impl GridSpec {
    fn build(&self) -> Result<SearchGrid> {
        let (t, e) = (self.thickness, self.stiffness);
        SearchGrid::uniform((t.min, t.max, t.count), (e.min, e.max, e.count))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct InvertConfig {
    /// Crop and resampling applied to raw images before fitting.
    roi: Roi,
    grid: GridSpec,
    search: SearchOptions,
}

struct Inversion {
    observed: DispersionImage,
    result: EstimationResult,
}

fn run_inversion(cfg: &InvertConfig, image: &DispersionImage, m: &mut RunManifest) -> Result<Inversion> {
    let grid = cfg.grid.build()?;
    let observed = match image.normalization {
        Normalization::Raw => prepare(image, &cfg.roi)?,
        Normalization::Percentile => image.clone(),
    };
    let result = m.time("invert", || grid_search(&observed, &grid, &cfg.search))?;
    Ok(Inversion { observed, result })
}

fn write_inversion(inv: &Inversion, out_dir: &Path, m: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.into(),
        source: e,
    })?;
    let land = inv.result.landscape();
    let paths = [
        out_dir.join("result.json"),
        out_dir.join("landscape.csv"),
        out_dir.join("landscape.png"),
    ];
    wave_elastix::io::write_atomic(&paths[0], inv.result.to_json()?.as_bytes())?;
    land.write_csv(&paths[1])?;
    land.write_png(&paths[2])?;
    let fit_png = out_dir.join("observed_fit.png");
    image_png(&inv.observed, &fit_png, None)?;
    for p in paths.iter().chain([&fit_png]) {
        m.output(p)?;
    }
    for w in &inv.result.warnings {
        log::warn!("{w}");
    }
    println!(
        "T* = {:.6} m, E* = {:.1} Pa ({} = {:.6})",
        inv.result.t_star,
        inv.result.e_star,
        inv.result.objective.name(),
        land.max()
    );
    Ok(())
}

fn invert(common: &Common, image_path: &Path, out_dir: &Path) -> Result<()> {
    let cfg: InvertConfig = config::load(common.config.as_deref(), &common.sets)?;
    echo(&cfg)?;
    let mut m = RunManifest::new("invert", &cfg)?;
    m.input(image_path)?;
    let image = DispersionImage::read(image_path)?;
    let inv = run_inversion(&cfg, &image, &mut m)?;
    write_inversion(&inv, out_dir, &mut m)?;
    finish(m, common.manifest.as_deref())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct CharInputs {
    /// rad/m
    gamma: f64,
    /// rad/s
    omega: f64,
    /// Observation window length L, m.
    window_length: f64,
    /// m
    thickness: f64,
    /// FEM element size, m.
    element_size: f64,
    ppm: f64,
    fps: f64,
    /// Observation time τ, s.
    duration: f64,
}

impl Default for CharInputs {
    fn default() -> Self {
        CharInputs {
            gamma: 300.0,
            omega: 2.0 * std::f64::consts::PI * 100.0,
            window_length: 0.2,
            thickness: 0.010,
            element_size: 0.0005,
            ppm: 1000.0,
            fps: 600.0,
            duration: 1.0,
        }
    }
}

impl CharInputs {
    fn numbers(&self) -> Result<CharNumbers> {
        characteristic_numbers(
            self.gamma,
            self.omega,
            self.window_length,
            self.thickness,
            self.element_size,
            self.ppm,
            self.fps,
            self.duration,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CharnumsConfig {
    reference: CharInputs,
    /// Second setup to compare against the reference.
    compare: Option<CharInputs>,
    tolerance: f64,
}

impl Default for CharnumsConfig {
    fn default() -> Self {
        CharnumsConfig {
            reference: CharInputs::default(),
            compare: None,
            tolerance: SIMILITUDE_TOLERANCE,
        }
    }
}

fn charnums(common: &Common, out: Option<&Path>) -> Result<()> {
    let cfg: CharnumsConfig = config::load(common.config.as_deref(), &common.sets)?;
    echo(&cfg)?;
    let mut m = RunManifest::new("charnums", &cfg)?;
    let a = cfg.reference.numbers()?;
    let mut doc = json!({ "char_numbers": a });
    if let Some(other) = &cfg.compare {
        let b = other.numbers()?;
        doc["compare"] = json!(b);
        doc["similitude"] = json!(similitude_report(&a, &b, cfg.tolerance));
    }
    let text = serde_json::to_string_pretty(&doc)?;
    println!("{text}");
    if let Some(p) = out {
        wave_elastix::io::write_atomic(p, text.as_bytes())?;
        m.output(p)?;
    }
    finish(m, common.manifest.as_deref())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PipelineConfig {
    /// Synthetic experiment; `scenario.video` switches on the render and
    /// extract stages.
    scenario: Scenario,
    /// Keep the rendered PNG frames in the output directory.
    write_frames: bool,
    spectral: SpectralOptions,
    invert: InvertConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scenario: Scenario::default(),
            write_frames: false,
            spectral: SpectralOptions::default(),
            invert: InvertConfig::default(),
        }
    }
}

fn pipeline(common: &Common, out_dir: &Path) -> Result<()> {
    let cfg: PipelineConfig = config::load(common.config.as_deref(), &common.sets)?;
    echo(&cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.into(),
        source: e,
    })?;
    let mut m = RunManifest::new("pipeline", &cfg)?;
    let sc = &cfg.scenario;
    let mut field = m.time("simulate", || sc.sampled_field())?;
    if let Some(path) = &sc.video {
        let clip = m.time("render", || sc.render(&field, path))?;
        if cfg.write_frames {
            let dir = out_dir.join("frames");
            clip.write_png_frames(&dir)?;
            m.output(&dir)?;
        }
        let (extracted, diag) = m.time("extract", || phase_displacements_with_diagnostics(&clip, &path.filter))?;
        for w in &diag.warnings {
            log::warn!("{w}");
        }
        field = extracted;
    }
    add_noise(&mut field, sc.noise, sc.seed)?;
    let field_path = out_dir.join("field.dfz");
    field.write(&field_path)?;
    m.output(&field_path)?;
    let image = m.time("dispersion", || observed_dispersion_with(&field, cfg.spectral))?;
    let dgz = out_dir.join("dispersion.dgz");
    image.write(&dgz)?;
    image_png(&image, &out_dir.join("dispersion.png"), None)?;
    m.output(&dgz)?;
    m.output(&out_dir.join("dispersion.png"))?;
    let inv = run_inversion(&cfg.invert, &image, &mut m)?;
    write_inversion(&inv, out_dir, &mut m)?;
    let manifest_path = common.manifest.clone().unwrap_or_else(|| out_dir.join("manifest.json"));
    m.write(&manifest_path)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuntimeConfig {
    /// m
    element_sizes: Vec<f64>,
    /// Bloch cell length a, m.
    cell_length: f64,
    grid: GridSpec,
    branches: usize,
    gamma_count: usize,
    solver: SolverKind,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            element_sizes: vec![0.0005, 0.00025, 0.000125],
            cell_length: 0.006,
            grid: GridSpec {
                thickness: AxisSpec {
                    min: 0.005,
                    max: 0.015,
                    count: 41,
                },
                stiffness: AxisSpec {
                    min: 5e3,
                    max: 15e3,
                    count: 41,
                },
            },
            branches: 12,
            gamma_count: 60,
            solver: SolverKind::Lanczos,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct RuntimeRow {
    element_size: f64,
    /// Elements of the Bloch cell at the mid-grid thickness.
    elements: usize,
    cells: usize,
    seconds: f64,
}

fn runtime_table(cfg: &RuntimeConfig) -> Result<Vec<RuntimeRow>> {
    let (t, e) = (cfg.grid.thickness, cfg.grid.stiffness);
    if t.count == 0 || e.count == 0 {
        return Ok(Vec::new());
    }
    let grid = cfg.grid.build()?;
    let mut rows = Vec::new();
    for &size in &cfg.element_sizes {
        let mid = grid.thickness[grid.thickness.len() / 2];
        let elements = LayerGeometry::new(mid, cfg.cell_length, size)?.element_count();
        let gamma = uniform_gamma_grid(cfg.gamma_count, std::f64::consts::PI / cfg.cell_length, false);
        let e_ref = grid.reference_stiffness();
        let start = Instant::now();
        for &thickness in &grid.thickness {
            let geom = LayerGeometry::new(thickness, cfg.cell_length, size)?;
            let base = dispersion_curves_with(&geom, &Material::soft_tissue(e_ref)?, &gamma, cfg.branches, cfg.solver)?;
            for &stiffness in &grid.stiffness {
                base.scale_stiffness(stiffness)?;
            }
        }
        rows.push(RuntimeRow {
            element_size: size,
            elements,
            cells: grid.cell_count(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

fn runtime(common: &Common) -> Result<()> {
    let cfg: RuntimeConfig = config::load(common.config.as_deref(), &common.sets)?;
    echo(&cfg)?;
    let mut m = RunManifest::new("runtime", &cfg)?;
    let rows = runtime_table(&cfg)?;
    println!("element_size_m,elements,cells,seconds");
    for r in &rows {
        println!("{},{},{},{:.3}", r.element_size, r.elements, r.cells, r.seconds);
    }
    m.runtime = Some(serde_json::to_value(&rows)?);
    finish(m, common.manifest.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_runtime_grid_gives_empty_table() {
        let mut cfg = RuntimeConfig::default();
        cfg.grid.thickness.count = 0;
        assert!(runtime_table(&cfg).unwrap().is_empty());
    }

    #[test]
    fn default_runtime_grid_has_1681_cells() {
        assert_eq!(RuntimeConfig::default().grid.build().unwrap().cell_count(), 1681);
    }

    #[test]
    fn exit_codes_are_distinct_per_class() {
        let codes = [
            exit_code(&Error::Config(String::new())),
            exit_code(&Error::Format {
                path: "x".into(),
                reason: String::new(),
            }),
            exit_code(&Error::Instability { step: 1, time: 0.0 }),
            exit_code(&Error::InsufficientTexture(String::new())),
            exit_code(&Error::Range(String::new())),
        ];
        let mut sorted = codes.to_vec();
        sorted.dedup();
        assert_eq!(sorted, vec![3, 4, 5, 6, 7]);
    }
}
