//! Command-line front end for the roughmap pipeline:
//! synth -> rasterize -> roughness -> compare / sweep -> render.
//!
//! Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use roughmap::analysis::{pearson_grids, scale_sweep, CorrEntry, CorrelationReport};
use roughmap::ascii::{read_esri_ascii, write_esri_ascii, write_roughness_meta};
use roughmap::descriptors::{roughness_map, Descriptor, WindowSpec};
use roughmap::pointcloud::{detrend, fit_plane, load_xyz, write_xyz};
use roughmap::rasterize::{rasterize, InterpMethod};
use roughmap::synthterrain::{generate, Archetype, TerrainSpec};
use roughmap::{analysis, DemGrid, Result, RoughError};

#[derive(Parser)]
#[command(
    name = "roughmap",
    version,
    about = "Grid scattered elevation points and map local surface roughness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic terrain point cloud as XYZ text.
    Synth(SynthArgs),
    /// Interpolate an XYZ point cloud onto a DEM grid (Esri ASCII).
    Rasterize(RasterizeArgs),
    /// Compute a roughness descriptor map from a DEM.
    Roughness(RoughnessArgs),
    /// Correlate two or more maps pairwise (CSV output).
    Compare(CompareArgs),
    /// Correlate all descriptor pairs across window sizes (CSV output).
    Sweep(SweepArgs),
    /// Render a grid to a PNG heatmap.
    Render(RenderArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Terrain archetype: hilly-rough, flat-rough or flat-smooth.
    #[arg(long, value_parser = Archetype::from_str)]
    terrain: Archetype,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side length of the sampled square (m).
    #[arg(long, default_value_t = 350.0)]
    extent: f64,
    /// Mean point spacing (m).
    #[arg(long, default_value_t = 0.64)]
    spacing: f64,
    /// Output XYZ path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RasterizeArgs {
    /// Input XYZ path.
    #[arg(long = "in")]
    input: PathBuf,
    /// Interpolation method: natural, nearest or tin.
    #[arg(long, default_value = "natural", value_parser = InterpMethod::from_str)]
    method: InterpMethod,
    /// Grid cell size (m).
    #[arg(long, default_value_t = 1.0)]
    cell: f64,
    /// Remove the fitted global plane (and shift the minimum to zero)
    /// before interpolating.
    #[arg(long)]
    detrend: bool,
    /// Output Esri ASCII path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RoughnessArgs {
    /// Input DEM (Esri ASCII).
    #[arg(long)]
    dem: PathBuf,
    /// Descriptor: rmsh, ldre, rt, slope or curv.
    #[arg(long, value_parser = Descriptor::from_str)]
    descriptor: Descriptor,
    /// Window side length in cells (odd, >= 3).
    #[arg(long, default_value_t = 5, value_parser = parse_window)]
    window: usize,
    /// Rescale valid pixels to [0, 1].
    #[arg(long)]
    normalize: bool,
    /// Output Esri ASCII path; a .meta sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more map paths (Esri ASCII).
    #[arg(long, num_args = 2.., required = true)]
    maps: Vec<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Input DEM (Esri ASCII).
    #[arg(long)]
    dem: PathBuf,
    /// Comma-separated odd window sizes.
    #[arg(long, default_value = "3,5,7,9,11", value_parser = parse_windows)]
    windows: WindowList,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Input grid (Esri ASCII).
    #[arg(long)]
    map: PathBuf,
    /// Output PNG path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Palette::Viridis)]
    palette: Palette,
    /// Integer pixel size per map cell.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    scale: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Palette {
    Viridis,
    Gray,
}

#[derive(Clone, Debug)]
struct WindowList(Vec<usize>);

fn parse_window(s: &str) -> std::result::Result<usize, String> {
    let w: usize = s.parse().map_err(|_| format!("bad window `{s}`"))?;
    WindowSpec::new(w).map_err(|e| e.to_string())?;
    Ok(w)
}

fn parse_windows(s: &str) -> std::result::Result<WindowList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(parse_window(part.trim())?);
    }
    if out.is_empty() {
        return Err("no window sizes given".into());
    }
    Ok(WindowList(out))
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Rasterize(a) => cmd_rasterize(a),
        Cmd::Roughness(a) => cmd_roughness(a),
        Cmd::Compare(a) => cmd_compare(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Render(a) => cmd_render(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let spec = TerrainSpec::new(a.terrain, a.seed)
        .with_extent(a.extent)
        .with_spacing(a.spacing);
    let cloud = generate(&spec)?;
    write_xyz(&a.out, &cloud)?;
    eprintln!(
        "wrote {} {} points to {}",
        cloud.len(),
        a.terrain,
        a.out.display()
    );
    Ok(())
}

fn cmd_rasterize(a: RasterizeArgs) -> Result<()> {
    let mut cloud = load_xyz(&a.input)?;
    if a.detrend {
        let plane = fit_plane(&cloud)?;
        cloud = detrend(&cloud, &plane);
        eprintln!("removed trend {plane}");
    }
    let grid = rasterize(&cloud, a.method, a.cell)?;
    write_esri_ascii(&a.out, &grid)?;
    eprintln!(
        "wrote {}x{} grid ({} interpolation) to {}",
        grid.nrows(),
        grid.ncols(),
        a.method,
        a.out.display()
    );
    Ok(())
}

fn cmd_roughness(a: RoughnessArgs) -> Result<()> {
    let dem = read_esri_ascii(&a.dem)?;
    let w = WindowSpec::new(a.window)?;
    let mut map = roughness_map(&dem, a.descriptor, w)?;
    if a.normalize {
        map = analysis::normalize01(&map)?;
    }
    write_esri_ascii(&a.out, &map.grid)?;
    let meta = a.out.with_extension("meta");
    write_roughness_meta(&meta, &map)?;
    eprintln!(
        "wrote {}x{} {} map (w={}) to {}",
        map.grid.nrows(),
        map.grid.ncols(),
        a.descriptor,
        a.window,
        a.out.display()
    );
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let mut grids: Vec<(String, DemGrid)> = Vec::with_capacity(a.maps.len());
    for path in &a.maps {
        grids.push((label_for(path), read_esri_ascii(path)?));
    }
    let mut entries = Vec::new();
    for i in 0..grids.len() {
        for j in i + 1..grids.len() {
            let (r, n_pixels) = pearson_grids(&grids[i].1, &grids[j].1)?;
            entries.push(CorrEntry {
                label_a: grids[i].0.clone(),
                label_b: grids[j].0.clone(),
                r,
                n_pixels,
            });
        }
    }
    let report = CorrelationReport {
        context: "compare".into(),
        entries,
    };
    write_csv_out(a.out.as_deref(), |mut out| report.write_csv(&mut out))
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let dem = read_esri_ascii(&a.dem)?;
    let windows: Vec<WindowSpec> = a
        .windows
        .0
        .iter()
        .map(|&w| WindowSpec::new(w))
        .collect::<Result<_>>()?;
    let sweep = scale_sweep(&dem, &windows)?;
    write_csv_out(a.out.as_deref(), |mut out| sweep.write_csv(&mut out))
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let grid = read_esri_ascii(&a.map)?;
    let rgba = render_rgba(&grid, a.palette, a.scale);
    let width = grid.ncols() as u32 * a.scale;
    let height = grid.nrows() as u32 * a.scale;
    let file = BufWriter::new(File::create(&a.out)?);
    let mut enc = png::Encoder::new(file, width, height);
    enc.set_color(png::ColorType::Rgba);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(png_err)?;
    writer.write_image_data(&rgba).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    eprintln!("wrote {width}x{height} png to {}", a.out.display());
    Ok(())
}

fn png_err(e: png::EncodingError) -> RoughError {
    RoughError::Io(io::Error::other(e))
}

fn label_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

fn write_csv_out(path: Option<&Path>, emit: impl Fn(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            emit(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock)
        }
    }
}

/// 11 evenly spaced viridis anchors, linearly interpolated.
const VIRIDIS: [[u8; 3]; 11] = [
    [68, 1, 84],
    [72, 35, 116],
    [64, 67, 135],
    [52, 94, 141],
    [41, 120, 142],
    [32, 144, 140],
    [34, 167, 132],
    [66, 190, 113],
    [121, 209, 81],
    [186, 222, 39],
    [253, 231, 37],
];

fn color_at(t: f64, palette: Palette) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    match palette {
        Palette::Gray => {
            let g = (t * 255.0).round() as u8;
            [g, g, g]
        }
        Palette::Viridis => {
            let pos = t * (VIRIDIS.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(VIRIDIS.len() - 1);
            let frac = pos - lo as f64;
            let mut rgb = [0u8; 3];
            for (k, c) in rgb.iter_mut().enumerate() {
                let v = VIRIDIS[lo][k] as f64 + frac * (VIRIDIS[hi][k] as f64 - VIRIDIS[lo][k] as f64);
                *c = v.round() as u8;
            }
            rgb
        }
    }
}

/// Expand the grid to RGBA pixels, top row first. Nodata is transparent;
/// valid values map onto the palette over the grid's value range, with a
/// constant grid collapsing to the low end.
fn render_rgba(grid: &DemGrid, palette: Palette, scale: u32) -> Vec<u8> {
    let scale = scale as usize;
    let (nrows, ncols) = (grid.nrows(), grid.ncols());
    let (lo, hi) = grid.value_range().unwrap_or((0.0, 0.0));
    let range = hi - lo;
    let width = ncols * scale;
    let mut buf = vec![0u8; nrows * scale * width * 4];
    for row in 0..nrows {
        // Storage row 0 is the south row; images start at the north.
        let img_row0 = (nrows - 1 - row) * scale;
        for col in 0..ncols {
            let v = grid.get(row, col);
            let px = if v.is_finite() {
                let t = if range > 0.0 { (v - lo) / range } else { 0.0 };
                let [r, g, b] = color_at(t, palette);
                [r, g, b, 255]
            } else {
                [0, 0, 0, 0]
            };
            for dy in 0..scale {
                let base = (img_row0 + dy) * width + col * scale;
                for dx in 0..scale {
                    buf[(base + dx) * 4..(base + dx) * 4 + 4].copy_from_slice(&px);
                }
            }
        }
    }
    buf
}
