//! Local surface-roughness descriptors over non-overlapping windows.
//!
//! Five descriptors are supported, all reported as sample standard
//! deviations (n-1 denominator): raw elevation spread (rmsh), locally
//! detrended residual spread (ldre), residual-topography spread (rt), slope
//! spread (slope_sd) and curvature spread (curvature_sd). The per-cell
//! fields behind rt, slope_sd and curvature_sd are computed on the full DEM
//! before tiling, so tile boundaries never truncate their stencils.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Result, RoughError};
use crate::grid::DemGrid;
use crate::pointcloud::fit_plane_xyz;

/// The five roughness descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Rmsh,
    Ldre,
    Rt,
    SlopeSd,
    CurvatureSd,
}

impl Descriptor {
    pub const ALL: [Descriptor; 5] = [
        Descriptor::Rmsh,
        Descriptor::Ldre,
        Descriptor::Rt,
        Descriptor::SlopeSd,
        Descriptor::CurvatureSd,
    ];

    /// Canonical name used in file output and report labels.
    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Rmsh => "rmsh",
            Descriptor::Ldre => "ldre",
            Descriptor::Rt => "rt",
            Descriptor::SlopeSd => "slope_sd",
            Descriptor::CurvatureSd => "curvature_sd",
        }
    }

    /// Unit of the descriptor's values.
    pub fn units(self) -> &'static str {
        match self {
            Descriptor::Rmsh | Descriptor::Ldre | Descriptor::Rt => "m",
            Descriptor::SlopeSd => "degrees",
            Descriptor::CurvatureSd => "1/m",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = String;

    /// Accepts the canonical names plus the short command-line aliases.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rmsh" => Ok(Descriptor::Rmsh),
            "ldre" => Ok(Descriptor::Ldre),
            "rt" => Ok(Descriptor::Rt),
            "slope_sd" | "slope" => Ok(Descriptor::SlopeSd),
            "curvature_sd" | "curv" => Ok(Descriptor::CurvatureSd),
            _ => Err(format!(
                "unknown descriptor `{s}` (expected rmsh, ldre, rt, slope or curv)"
            )),
        }
    }
}

/// Side length of the square analysis window, in cells. Odd and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    w: usize,
}

/// The window sizes swept by default.
pub const DEFAULT_WINDOWS: [usize; 5] = [3, 5, 7, 9, 11];

impl WindowSpec {
    pub fn new(w: usize) -> Result<Self> {
        if w < 3 || w % 2 == 0 {
            return Err(RoughError::InvalidWindow(w));
        }
        Ok(WindowSpec { w })
    }

    pub fn size(self) -> usize {
        self.w
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.w)
    }
}

/// A coarse roughness raster: one value per w x w tile of the source DEM.
#[derive(Debug, Clone)]
pub struct RoughnessMap {
    pub grid: DemGrid,
    pub descriptor: Descriptor,
    pub window: WindowSpec,
    /// Cell size of the source DEM (the map's own cells are w times larger).
    pub source_cell: f64,
}

impl RoughnessMap {
    pub fn units(&self) -> &'static str {
        self.descriptor.units()
    }
}

/// Sample standard deviation of the valid (finite) values; NaN when fewer
/// than two are valid.
pub fn rmsh_window(cells: &[f64]) -> f64 {
    let mut n = 0usize;
    let mut sum = 0.0;
    for &v in cells {
        if v.is_finite() {
            n += 1;
            sum += v;
        }
    }
    if n < 2 {
        return f64::NAN;
    }
    let mean = sum / n as f64;
    let mut ss = 0.0;
    for &v in cells {
        if v.is_finite() {
            ss += (v - mean) * (v - mean);
        }
    }
    (ss / (n - 1) as f64).sqrt()
}

/// Sample standard deviation of the residuals after fitting a plane through
/// `(x, y, z)` samples; NaN when the fit is degenerate (fewer than three
/// samples or collinear xy locations).
pub fn ldre_window(samples: &[(f64, f64, f64)]) -> f64 {
    let plane = match fit_plane_xyz(samples.iter().copied()) {
        Ok(p) => p,
        Err(_) => return f64::NAN,
    };
    let residuals: Vec<f64> = samples
        .iter()
        .map(|&(x, y, z)| z - plane.eval(x, y))
        .collect();
    rmsh_window(&residuals)
}

/// Mean-smooth with a centered 5x5 neighborhood that shrinks at the DEM
/// edges. A cell is nodata in the output iff it is nodata in the input;
/// nodata neighbors simply drop out of the mean.
pub fn smooth_dem(dem: &DemGrid) -> DemGrid {
    let (nrows, ncols) = (dem.nrows(), dem.ncols());
    let mut out = dem.clone();
    let src = dem.data();
    out.data_mut()
        .par_chunks_mut(ncols)
        .enumerate()
        .for_each(|(r, row)| {
            for (c, v) in row.iter_mut().enumerate() {
                if !src[r * ncols + c].is_finite() {
                    *v = f64::NAN;
                    continue;
                }
                let mut sum = 0.0;
                let mut n = 0usize;
                for rr in r.saturating_sub(2)..(r + 3).min(nrows) {
                    for cc in c.saturating_sub(2)..(c + 3).min(ncols) {
                        let z = src[rr * ncols + cc];
                        if z.is_finite() {
                            sum += z;
                            n += 1;
                        }
                    }
                }
                *v = sum / n as f64;
            }
        });
    out
}

/// Original DEM minus its 5x5-mean smoothed counterpart.
pub fn residual_topography(dem: &DemGrid) -> DemGrid {
    let mut out = smooth_dem(dem);
    let src = dem.data();
    for (v, &z) in out.data_mut().iter_mut().zip(src) {
        *v = z - *v;
    }
    out
}

/// The 3x3 stencil around `(r, c)`, row-major west-to-east with indices
/// 0..=2 one row north, 3..=5 the center row, 6..=8 one row south. Missing
/// neighbors (off-grid or nodata) adopt the center value.
fn stencil(src: &[f64], nrows: usize, ncols: usize, r: usize, c: usize) -> [f64; 9] {
    let z5 = src[r * ncols + c];
    let mut z = [z5; 9];
    for (k, slot) in z.iter_mut().enumerate() {
        let dr = 1 - (k / 3) as isize;
        let dc = (k % 3) as isize - 1;
        let rr = r as isize + dr;
        let cc = c as isize + dc;
        if rr >= 0 && rr < nrows as isize && cc >= 0 && cc < ncols as isize {
            let v = src[rr as usize * ncols + cc as usize];
            if v.is_finite() {
                *slot = v;
            }
        }
    }
    z
}

/// Per-cell slope in degrees from the weighted finite-difference stencil.
/// Output nodata iff the center cell is nodata.
pub fn slope_map(dem: &DemGrid) -> DemGrid {
    let (nrows, ncols) = (dem.nrows(), dem.ncols());
    let el = 8.0 * dem.cell();
    let mut out = dem.clone();
    let src = dem.data();
    out.data_mut()
        .par_chunks_mut(ncols)
        .enumerate()
        .for_each(|(r, row)| {
            for (c, v) in row.iter_mut().enumerate() {
                if !src[r * ncols + c].is_finite() {
                    *v = f64::NAN;
                    continue;
                }
                let z = stencil(src, nrows, ncols, r, c);
                let dzdx = (z[2] + 2.0 * z[5] + z[8]) - (z[0] + 2.0 * z[3] + z[6]);
                let dzdy = (z[6] + 2.0 * z[7] + z[8]) - (z[0] + 2.0 * z[1] + z[2]);
                let grad = ((dzdx / el) * (dzdx / el) + (dzdy / el) * (dzdy / el)).sqrt();
                *v = grad.atan().to_degrees();
            }
        });
    out
}

/// Per-cell curvature (1/m): 2E + 2D with D and E the east-west and
/// north-south second differences. Positive for a bowl, negative for a
/// ridge; exact for quadratic surfaces. Output nodata iff the center cell
/// is nodata.
pub fn curvature_map(dem: &DemGrid) -> DemGrid {
    let (nrows, ncols) = (dem.nrows(), dem.ncols());
    let l2 = dem.cell() * dem.cell();
    let mut out = dem.clone();
    let src = dem.data();
    out.data_mut()
        .par_chunks_mut(ncols)
        .enumerate()
        .for_each(|(r, row)| {
            for (c, v) in row.iter_mut().enumerate() {
                if !src[r * ncols + c].is_finite() {
                    *v = f64::NAN;
                    continue;
                }
                let z = stencil(src, nrows, ncols, r, c);
                let d = ((z[3] + z[5]) / 2.0 - z[4]) / l2;
                let e = ((z[1] + z[7]) / 2.0 - z[4]) / l2;
                *v = 2.0 * e + 2.0 * d;
            }
        });
    out
}

/// Tile the DEM into non-overlapping w x w windows, anchored at the
/// top-left (north-west) corner of the map, and reduce each tile to one
/// roughness value. Trailing partial tiles on the south and east edges are
/// discarded; a tile containing any nodata cell in the relevant field
/// yields nodata.
pub fn roughness_map(dem: &DemGrid, d: Descriptor, w: WindowSpec) -> Result<RoughnessMap> {
    let (nrows, ncols) = (dem.nrows(), dem.ncols());
    let ws = w.size();
    if nrows < ws || ncols < ws {
        return Err(RoughError::WindowExceedsDem {
            window: ws,
            nrows,
            ncols,
        });
    }
    let nt_rows = nrows / ws;
    let nt_cols = ncols / ws;
    // Anchoring tiles at the display top keeps the discarded remainder on
    // the south edge, i.e. the lowest storage rows.
    let rem_rows = nrows % ws;

    let field = match d {
        Descriptor::Rmsh | Descriptor::Ldre => None,
        Descriptor::Rt => Some(residual_topography(dem)),
        Descriptor::SlopeSd => Some(slope_map(dem)),
        Descriptor::CurvatureSd => Some(curvature_map(dem)),
    };
    let src = field.as_ref().unwrap_or(dem);

    let mut grid = DemGrid::new(
        nt_rows,
        nt_cols,
        dem.x0(),
        dem.y0() + rem_rows as f64 * dem.cell(),
        ws as f64 * dem.cell(),
    )?;
    grid.data_mut()
        .par_chunks_mut(nt_cols)
        .enumerate()
        .for_each(|(oi, out_row)| {
            let r0 = rem_rows + oi * ws;
            let mut tile = Vec::with_capacity(ws * ws);
            let mut samples = Vec::with_capacity(ws * ws);
            for (oj, out) in out_row.iter_mut().enumerate() {
                let c0 = oj * ws;
                tile.clear();
                for r in r0..r0 + ws {
                    for c in c0..c0 + ws {
                        tile.push(src.get(r, c));
                    }
                }
                if tile.iter().any(|v| !v.is_finite()) {
                    *out = f64::NAN;
                    continue;
                }
                *out = match d {
                    Descriptor::Ldre => {
                        samples.clear();
                        let mut k = 0;
                        for r in r0..r0 + ws {
                            for c in c0..c0 + ws {
                                let (x, y) = dem.cell_center(r, c);
                                samples.push((x, y, tile[k]));
                                k += 1;
                            }
                        }
                        ldre_window(&samples)
                    }
                    _ => rmsh_window(&tile),
                };
            }
        });

    Ok(RoughnessMap {
        grid,
        descriptor: d,
        window: w,
        source_cell: dem.cell(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic LCG in [0, 1), enough for test scaffolding.
    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
        /// Box-Muller, one draw per call.
        fn next_gauss(&mut self) -> f64 {
            let u1 = self.next_f64().max(1e-12);
            let u2 = self.next_f64();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }
    }

    fn grid_from_fn(nrows: usize, ncols: usize, cell: f64, f: impl Fn(f64, f64) -> f64) -> DemGrid {
        let mut g = DemGrid::new(nrows, ncols, 0.0, 0.0, cell).unwrap();
        for r in 0..nrows {
            for c in 0..ncols {
                let (x, y) = g.cell_center(r, c);
                g.set(r, c, f(x, y));
            }
        }
        g
    }

    fn random_grid(seed: u64, nrows: usize, ncols: usize) -> DemGrid {
        let mut rng = Lcg(seed);
        let data: Vec<f64> = (0..nrows * ncols).map(|_| rng.next_f64() * 5.0).collect();
        DemGrid::from_data(nrows, ncols, 0.0, 0.0, 1.0, data).unwrap()
    }

    #[test]
    fn descriptor_names_round_trip() {
        for d in Descriptor::ALL {
            assert_eq!(d.name().parse::<Descriptor>().unwrap(), d);
        }
        assert_eq!("slope".parse::<Descriptor>().unwrap(), Descriptor::SlopeSd);
        assert_eq!("curv".parse::<Descriptor>().unwrap(), Descriptor::CurvatureSd);
        assert!("rug".parse::<Descriptor>().is_err());
    }

    #[test]
    fn window_spec_rejects_even_and_small() {
        assert!(WindowSpec::new(3).is_ok());
        assert!(WindowSpec::new(11).is_ok());
        for bad in [0, 1, 2, 4, 10] {
            assert!(matches!(
                WindowSpec::new(bad),
                Err(RoughError::InvalidWindow(_))
            ));
        }
    }

    #[test]
    fn rmsh_hand_values() {
        assert_eq!(rmsh_window(&[4.0; 9]), 0.0);
        // 0..8: mean 4, squared deviations sum to 60, variance 60/8.
        let cells: Vec<f64> = (0..9).map(|i| i as f64).collect();
        assert!((rmsh_window(&cells) - (7.5f64).sqrt()).abs() < 1e-12);
        // {1,2,3,4}: mean 2.5, squared deviations sum to 5, variance 5/3.
        let quad = [1.0, 2.0, 3.0, 4.0];
        assert!((rmsh_window(&quad) - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // Fewer than two valid cells.
        assert!(rmsh_window(&[1.0]).is_nan());
        assert!(rmsh_window(&[1.0, f64::NAN]).is_nan());
    }

    #[test]
    fn ldre_zero_on_planes_where_rmsh_is_not() {
        let mut samples = Vec::new();
        let mut raw = Vec::new();
        for r in 0..5 {
            for c in 0..5 {
                let (x, y) = (c as f64, r as f64);
                let z = 2.0 * x - 3.0 * y + 7.0;
                samples.push((x, y, z));
                raw.push(z);
            }
        }
        assert!(ldre_window(&samples).abs() < 1e-9);
        assert!(rmsh_window(&raw) > 1.0);
        // Constant window is still a plane.
        let flat: Vec<(f64, f64, f64)> =
            samples.iter().map(|&(x, y, _)| (x, y, 5.0)).collect();
        assert!(ldre_window(&flat).abs() < 1e-12);
    }

    #[test]
    fn ldre_degenerate_on_collinear_xy() {
        let line: Vec<(f64, f64, f64)> = (0..6)
            .map(|i| (i as f64, 2.0 * i as f64, i as f64))
            .collect();
        assert!(ldre_window(&line).is_nan());
        assert!(ldre_window(&[(0.0, 0.0, 1.0), (1.0, 1.0, 2.0)]).is_nan());
    }

    #[test]
    fn ldre_recovers_noise_sigma_and_matches_direct_fit() {
        // z = x + y + noise; detrending leaves roughly the injected sigma.
        let mut rng = Lcg(99);
        let mut samples = Vec::new();
        for r in 0..9 {
            for c in 0..9 {
                let (x, y) = (c as f64, r as f64);
                samples.push((x, y, x + y + 0.1 * rng.next_gauss()));
            }
        }
        let got = ldre_window(&samples);
        assert!((got - 0.1).abs() < 0.05, "sigma estimate {got}");

        // Direct normal-equation solve of the same least-squares problem.
        let n = samples.len() as f64;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y, z) in &samples {
            sx += x;
            sy += y;
            sz += z;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
            sxz += x * z;
            syz += y * z;
        }
        // Cramer's rule on the full (uncentered) 3x3 system.
        let det = sxx * (syy * n - sy * sy) - sxy * (sxy * n - sy * sx)
            + sx * (sxy * sy - syy * sx);
        let da = sxz * (syy * n - sy * sy) - sxy * (syz * n - sy * sz)
            + sx * (syz * sy - syy * sz);
        let db = sxx * (syz * n - sz * sy) - sxz * (sxy * n - sx * sy)
            + sx * (sxy * sz - syz * sx);
        let dc = sxx * (syy * sz - syz * sy) - sxy * (sxy * sz - syz * sx)
            + sxz * (sxy * sy - syy * sx);
        let (a, b, c) = (da / det, db / det, dc / det);
        let mut ss = 0.0;
        let mut mean = 0.0;
        let res: Vec<f64> = samples
            .iter()
            .map(|&(x, y, z)| z - (a * x + b * y + c))
            .collect();
        for &r in &res {
            mean += r;
        }
        mean /= n;
        for &r in &res {
            ss += (r - mean) * (r - mean);
        }
        let oracle = (ss / (n - 1.0)).sqrt();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn smooth_constant_is_identity() {
        let g = grid_from_fn(8, 8, 1.0, |_, _| 4.25);
        let s = smooth_dem(&g);
        for (&a, &b) in g.data().iter().zip(s.data()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn smooth_plane_interior_unchanged() {
        let g = grid_from_fn(9, 9, 1.0, |x, y| 3.0 * x - 2.0 * y + 1.0);
        let s = smooth_dem(&g);
        for r in 2..7 {
            for c in 2..7 {
                assert!((s.get(r, c) - g.get(r, c)).abs() < 1e-12, "({r},{c})");
            }
        }
        // Edge cells see an asymmetric neighborhood, so they move.
        assert!((s.get(0, 0) - g.get(0, 0)).abs() > 0.1);
    }

    #[test]
    fn smooth_matches_bruteforce_neighborhood_means() {
        let g = random_grid(17, 7, 7);
        let s = smooth_dem(&g);
        for r in 0..7i64 {
            for c in 0..7i64 {
                let mut sum = 0.0;
                let mut n = 0;
                for rr in r - 2..=r + 2 {
                    for cc in c - 2..=c + 2 {
                        if rr >= 0 && rr < 7 && cc >= 0 && cc < 7 {
                            sum += g.get(rr as usize, cc as usize);
                            n += 1;
                        }
                    }
                }
                let want = sum / n as f64;
                assert!((s.get(r as usize, c as usize) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smooth_preserves_nodata_mask_and_skips_nodata_neighbors() {
        let mut g = random_grid(21, 6, 6);
        g.set(2, 3, f64::NAN);
        let s = smooth_dem(&g);
        assert!(s.is_nodata(2, 3));
        // Cell (3,3)'s full 5x5 window contains the hole, so its mean runs
        // over the 24 remaining cells.
        let mut sum = 0.0;
        let mut n = 0;
        for rr in 1..6 {
            for cc in 1..6 {
                if g.get(rr, cc).is_finite() {
                    sum += g.get(rr, cc);
                    n += 1;
                }
            }
        }
        assert_eq!(n, 24);
        assert!((s.get(3, 3) - sum / 24.0).abs() < 1e-12);
    }

    #[test]
    fn residual_topography_zero_on_constant_and_plane_interior() {
        let flat = grid_from_fn(8, 8, 1.0, |_, _| 2.0);
        for &v in residual_topography(&flat).data() {
            assert_eq!(v, 0.0);
        }
        let plane = grid_from_fn(9, 9, 1.0, |x, y| x + 4.0 * y);
        let rt = residual_topography(&plane);
        for r in 2..7 {
            for c in 2..7 {
                assert!(rt.get(r, c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_topography_matches_cellwise_subtraction() {
        let g = random_grid(5, 9, 8);
        let s = smooth_dem(&g);
        let rt = residual_topography(&g);
        for i in 0..g.data().len() {
            assert_eq!(rt.data()[i], g.data()[i] - s.data()[i]);
        }
    }

    #[test]
    fn slope_flat_is_zero_everywhere() {
        let g = grid_from_fn(6, 6, 2.0, |_, _| 7.0);
        for &v in slope_map(&g).data() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn slope_unit_ramp_is_45_degrees_interior() {
        let g = grid_from_fn(7, 7, 1.0, |x, _| x);
        let s = slope_map(&g);
        for r in 1..6 {
            for c in 1..6 {
                assert!((s.get(r, c) - 45.0).abs() < 1e-9, "({r},{c}): {}", s.get(r, c));
            }
        }
        // Edge columns adopt the center for the off-grid side, halving dz/dx.
        let expect = 0.5f64.atan().to_degrees();
        assert!((s.get(3, 0) - expect).abs() < 1e-9);
        assert!((s.get(3, 6) - expect).abs() < 1e-9);
    }

    #[test]
    fn slope_values_stay_in_range() {
        let g = random_grid(33, 12, 12);
        for &v in slope_map(&g).data() {
            assert!((0.0..90.0).contains(&v));
        }
        // Cell size scales into the gradient.
        let steep = grid_from_fn(6, 6, 0.25, |x, _| 10.0 * x);
        let s = slope_map(&steep);
        assert!((s.get(3, 3) - (10.0f64).atan().to_degrees()).abs() < 1e-9);
    }

    #[test]
    fn curvature_hand_stencils() {
        // Bowl: four edge-neighbors high, center low.
        let mut bowl = DemGrid::new(3, 3, 0.0, 0.0, 1.0).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                bowl.set(r, c, if r == 1 && c == 1 { 0.0 } else { 1.0 });
            }
        }
        assert!((curvature_map(&bowl).get(1, 1) - 4.0).abs() < 1e-12);

        // Ridge: center above its four edge-neighbors.
        let mut ridge = DemGrid::new(3, 3, 0.0, 0.0, 1.0).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                ridge.set(r, c, if r == 1 && c == 1 { 3.0 } else { 2.0 });
            }
        }
        assert!((curvature_map(&ridge).get(1, 1) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_zero_on_planes_and_exact_on_quadratics() {
        // Interior cells only: adopted edge neighbors flatten one side of
        // the stencil, which reads as curvature on a tilted plane.
        let plane = grid_from_fn(7, 7, 1.5, |x, y| 2.0 * x - y + 3.0);
        let km = curvature_map(&plane);
        for r in 1..6 {
            for c in 1..6 {
                assert!(km.get(r, c).abs() < 1e-9);
            }
        }
        // A level plane cancels even at the edges.
        let flat = grid_from_fn(5, 5, 2.0, |_, _| 3.25);
        for &v in curvature_map(&flat).data() {
            assert_eq!(v, 0.0);
        }
        // z = c(x^2 + y^2) has curvature 4c at interior cells for any L.
        for (cell, cc) in [(1.0, 0.7), (0.5, -0.3), (2.0, 0.05)] {
            let g = grid_from_fn(9, 9, cell, |x, y| cc * (x * x + y * y));
            let k = curvature_map(&g);
            for r in 1..8 {
                for c in 1..8 {
                    assert!(
                        (k.get(r, c) - 4.0 * cc).abs() < 1e-9,
                        "cell {cell}, c {cc}: {}",
                        k.get(r, c)
                    );
                }
            }
        }
    }

    #[test]
    fn roughness_map_dims_and_georef() {
        let g = random_grid(2, 10, 10);
        let m = roughness_map(&g, Descriptor::Rmsh, WindowSpec::new(3).unwrap()).unwrap();
        assert_eq!((m.grid.nrows(), m.grid.ncols()), (3, 3));
        // One remainder row/col: the south row and east column are dropped.
        assert_eq!(m.grid.x0(), g.x0());
        assert_eq!(m.grid.y0(), g.y0() + 1.0);
        assert_eq!(m.grid.cell(), 3.0);
        for d in Descriptor::ALL {
            for w in [3usize, 5] {
                let m = roughness_map(&g, d, WindowSpec::new(w).unwrap()).unwrap();
                assert_eq!((m.grid.nrows(), m.grid.ncols()), (10 / w, 10 / w), "{d} w={w}");
            }
        }
    }

    #[test]
    fn roughness_map_rejects_oversized_window() {
        let g = random_grid(3, 6, 9);
        assert!(matches!(
            roughness_map(&g, Descriptor::Rmsh, WindowSpec::new(7).unwrap()),
            Err(RoughError::WindowExceedsDem { window: 7, .. })
        ));
    }

    #[test]
    fn constant_dem_gives_zero_maps() {
        let g = grid_from_fn(12, 12, 1.0, |_, _| 9.0);
        for d in Descriptor::ALL {
            let m = roughness_map(&g, d, WindowSpec::new(3).unwrap()).unwrap();
            assert_eq!((m.grid.nrows(), m.grid.ncols()), (4, 4));
            for &v in m.grid.data() {
                assert!(v.abs() < 1e-12, "{d}: {v}");
            }
        }
    }

    #[test]
    fn tilted_plane_separates_rmsh_from_the_rest() {
        // 15x15 plane, w=3: the middle 3x3 block of tiles sits fully interior.
        let g = grid_from_fn(15, 15, 1.0, |x, y| 0.4 * x + 0.2 * y);
        let w = WindowSpec::new(3).unwrap();
        let rmsh = roughness_map(&g, Descriptor::Rmsh, w).unwrap();
        for &v in rmsh.grid.data() {
            assert!(v > 0.1);
        }
        for d in [
            Descriptor::Ldre,
            Descriptor::Rt,
            Descriptor::SlopeSd,
            Descriptor::CurvatureSd,
        ] {
            let m = roughness_map(&g, d, w).unwrap();
            for oi in 1..4 {
                for oj in 1..4 {
                    assert!(m.grid.get(oi, oj).abs() < 1e-9, "{d} ({oi},{oj})");
                }
            }
        }
    }

    #[test]
    fn any_nodata_in_tile_poisons_it() {
        let mut g = random_grid(7, 9, 9);
        g.set(8, 0, f64::NAN);
        let m = roughness_map(&g, Descriptor::Rmsh, WindowSpec::new(3).unwrap()).unwrap();
        // Storage row 8 is the display-top row, so tile row 0 column 0 dies.
        assert!(m.grid.is_nodata(2, 0));
        assert_eq!(m.grid.valid_count(), 8);
        // Field-based descriptors poison through their stencils too.
        let m = roughness_map(&g, Descriptor::SlopeSd, WindowSpec::new(3).unwrap()).unwrap();
        assert!(m.grid.is_nodata(2, 0));
    }

    #[test]
    fn roughness_values_match_tile_loop_oracle() {
        let g = random_grid(1234, 15, 15);
        let w = WindowSpec::new(5).unwrap();
        for d in Descriptor::ALL {
            let m = roughness_map(&g, d, w).unwrap();
            // Independent per-tile recomputation on the relevant field.
            let field = match d {
                Descriptor::Rmsh | Descriptor::Ldre => g.clone(),
                Descriptor::Rt => residual_topography(&g),
                Descriptor::SlopeSd => slope_map(&g),
                Descriptor::CurvatureSd => curvature_map(&g),
            };
            for oi in 0..3 {
                for oj in 0..3 {
                    let want = if d == Descriptor::Ldre {
                        let mut s = Vec::new();
                        for r in oi * 5..oi * 5 + 5 {
                            for c in oj * 5..oj * 5 + 5 {
                                let (x, y) = g.cell_center(r, c);
                                s.push((x, y, g.get(r, c)));
                            }
                        }
                        ldre_window(&s)
                    } else {
                        let mut vals = Vec::new();
                        for r in oi * 5..oi * 5 + 5 {
                            for c in oj * 5..oj * 5 + 5 {
                                vals.push(field.get(r, c));
                            }
                        }
                        let n = vals.len() as f64;
                        let mean = vals.iter().sum::<f64>() / n;
                        let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
                        (ss / (n - 1.0)).sqrt()
                    };
                    assert!(
                        (m.grid.get(oi, oj) - want).abs() < 1e-12,
                        "{d} tile ({oi},{oj}): {} vs {want}",
                        m.grid.get(oi, oj)
                    );
                }
            }
        }
    }

    #[test]
    fn elevation_offset_leaves_maps_unchanged() {
        let g = random_grid(77, 12, 12);
        let mut shifted = g.clone();
        for v in shifted.data_mut() {
            *v += 100.0;
        }
        for d in Descriptor::ALL {
            let a = roughness_map(&g, d, WindowSpec::new(3).unwrap()).unwrap();
            let b = roughness_map(&shifted, d, WindowSpec::new(3).unwrap()).unwrap();
            for (&x, &y) in a.grid.data().iter().zip(b.grid.data()) {
                assert!((x - y).abs() < 1e-9, "{d}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn elevation_scaling_multiplies_metric_descriptors() {
        let g = random_grid(88, 12, 12);
        let mut doubled = g.clone();
        for v in doubled.data_mut() {
            *v *= 2.0;
        }
        for d in [Descriptor::Rmsh, Descriptor::Ldre, Descriptor::Rt] {
            let a = roughness_map(&g, d, WindowSpec::new(3).unwrap()).unwrap();
            let b = roughness_map(&doubled, d, WindowSpec::new(3).unwrap()).unwrap();
            for (&x, &y) in a.grid.data().iter().zip(b.grid.data()) {
                assert!((2.0 * x - y).abs() < 1e-12, "{d}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn units_follow_descriptor() {
        let g = random_grid(1, 6, 6);
        let m = roughness_map(&g, Descriptor::SlopeSd, WindowSpec::new(3).unwrap()).unwrap();
        assert_eq!(m.units(), "degrees");
        assert_eq!(m.source_cell, 1.0);
        assert_eq!(Descriptor::Rmsh.units(), "m");
        assert_eq!(Descriptor::CurvatureSd.units(), "1/m");
    }
}
