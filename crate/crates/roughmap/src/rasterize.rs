//! Scattered points to gridded DEM conversion.
//!
//! The grid spans the cloud's xy bounding box at a caller-chosen cell size;
//! values are interpolated at cell centers. Natural-neighbour and TIN-linear
//! leave centers outside the convex hull as nodata (centers exactly on the
//! hull boundary count as inside); nearest-neighbour assigns every cell.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{delaunay, NnScratch, Triangulation};
use crate::grid::DemGrid;
use crate::pointcloud::PointCloud;

/// Interpolation technique used to fill the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpMethod {
    NaturalNeighbour,
    NearestNeighbour,
    TinLinear,
}

impl InterpMethod {
    pub const ALL: [InterpMethod; 3] = [
        InterpMethod::NaturalNeighbour,
        InterpMethod::NearestNeighbour,
        InterpMethod::TinLinear,
    ];

    /// Canonical name used in file output and report labels.
    pub fn name(self) -> &'static str {
        match self {
            InterpMethod::NaturalNeighbour => "natural_neighbour",
            InterpMethod::NearestNeighbour => "nearest_neighbour",
            InterpMethod::TinLinear => "tin_linear",
        }
    }
}

impl fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterpMethod {
    type Err = String;

    /// Accepts the canonical names plus the short command-line aliases.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "natural_neighbour" | "natural" => Ok(InterpMethod::NaturalNeighbour),
            "nearest_neighbour" | "nearest" => Ok(InterpMethod::NearestNeighbour),
            "tin_linear" | "tin" => Ok(InterpMethod::TinLinear),
            _ => Err(format!(
                "unknown interpolation method `{s}` (expected natural, nearest or tin)"
            )),
        }
    }
}

/// Grid a point cloud. Duplicate xy sites collapse (keeping the last z)
/// before interpolation, so all three methods see the same site set and the
/// returned grids share georeferencing exactly.
pub fn rasterize(cloud: &PointCloud, method: InterpMethod, cell: f64) -> Result<DemGrid> {
    let cloud = cloud.dedup_xy();
    let bb = cloud.bbox();
    let nrows = ((bb.height() / cell).ceil() as usize).max(1);
    let ncols = ((bb.width() / cell).ceil() as usize).max(1);
    let mut grid = DemGrid::new(nrows, ncols, bb.xmin, bb.ymin, cell)?;

    let sites: Vec<[f64; 2]> = cloud.points().iter().map(|p| [p.x, p.y]).collect();
    let zvals: Vec<f64> = cloud.points().iter().map(|p| p.z).collect();

    let x0 = grid.x0();
    let y0 = grid.y0();
    match method {
        InterpMethod::NearestNeighbour => {
            let index = NearestIndex::build(&sites, bb.span());
            grid.data_mut()
                .par_chunks_mut(ncols)
                .enumerate()
                .for_each(|(row, out)| {
                    let y = y0 + (row as f64 + 0.5) * cell;
                    for (col, v) in out.iter_mut().enumerate() {
                        let x = x0 + (col as f64 + 0.5) * cell;
                        *v = zvals[index.nearest(x, y)];
                    }
                });
        }
        InterpMethod::TinLinear => {
            let tri = delaunay(&sites)?;
            grid.data_mut()
                .par_chunks_mut(ncols)
                .enumerate()
                .for_each(|(row, out)| {
                    let y = y0 + (row as f64 + 0.5) * cell;
                    let mut hint = None;
                    for (col, v) in out.iter_mut().enumerate() {
                        let x = x0 + (col as f64 + 0.5) * cell;
                        match tri.locate(x, y, hint) {
                            Some(t) => {
                                hint = Some(t);
                                *v = tin_value(&tri, &zvals, t, x, y);
                            }
                            None => *v = f64::NAN,
                        }
                    }
                });
        }
        InterpMethod::NaturalNeighbour => {
            let tri = delaunay(&sites)?;
            grid.data_mut()
                .par_chunks_mut(ncols)
                .enumerate()
                .for_each_init(
                    || (NnScratch::default(), Vec::new()),
                    |(scratch, weights), (row, out)| {
                        let y = y0 + (row as f64 + 0.5) * cell;
                        let mut hint = None;
                        for (col, v) in out.iter_mut().enumerate() {
                            let x = x0 + (col as f64 + 0.5) * cell;
                            match tri.locate(x, y, hint) {
                                Some(t) => {
                                    hint = Some(t);
                                    tri.sibson_weights_into(x, y, Some(t), scratch, weights)
                                        .expect("located point is inside the hull");
                                    *v = weights.iter().map(|&(s, w)| w * zvals[s]).sum();
                                }
                                None => *v = f64::NAN,
                            }
                        }
                    },
                );
        }
    }
    Ok(grid)
}

/// Linear interpolation over the containing Delaunay triangle; `None` outside
/// the hull. Queries at a site reproduce its elevation exactly.
pub fn tin_interp(tri: &Triangulation, zvals: &[f64], x: f64, y: f64) -> Option<f64> {
    let t = tri.locate(x, y, None)?;
    Some(tin_value(tri, zvals, t, x, y))
}

fn tin_value(tri: &Triangulation, zvals: &[f64], t: usize, x: f64, y: f64) -> f64 {
    // Exact reproduction at vertices; barycentric round-off would otherwise
    // leak neighbour elevations into the value.
    for &v in &tri.triangles()[t] {
        let s = tri.sites()[v];
        if s[0] == x && s[1] == y {
            return zvals[v];
        }
    }
    let l = tri.barycentric(t, x, y);
    let [a, b, c] = tri.triangles()[t];
    l[0] * zvals[a] + l[1] * zvals[b] + l[2] * zvals[c]
}

/// Sibson natural-neighbour interpolation; `None` outside the hull. Queries
/// at a site reproduce its elevation exactly.
pub fn natural_neighbour_interp(tri: &Triangulation, zvals: &[f64], x: f64, y: f64) -> Option<f64> {
    let weights = tri.sibson_weights(x, y).ok()?;
    Some(weights.iter().map(|&(s, w)| w * zvals[s]).sum())
}

/// Uniform spatial hash over sites, binned near the average point spacing.
/// Lookups are exact: ties in distance resolve to the lowest site index.
struct NearestIndex<'a> {
    sites: &'a [[f64; 2]],
    bins: HashMap<(i64, i64), Vec<u32>>,
    ox: f64,
    oy: f64,
    bin: f64,
}

impl<'a> NearestIndex<'a> {
    fn build(sites: &'a [[f64; 2]], span: f64) -> Self {
        // Average spacing for n points over the bbox; degenerate extents
        // fall back to a single-bin layout.
        let n = sites.len().max(1);
        let mut bin = span / (n as f64).sqrt();
        if !(bin > 0.0) || !bin.is_finite() {
            bin = 1.0;
        }
        let (mut ox, mut oy) = (f64::INFINITY, f64::INFINITY);
        for s in sites {
            ox = ox.min(s[0]);
            oy = oy.min(s[1]);
        }
        if !ox.is_finite() {
            ox = 0.0;
            oy = 0.0;
        }
        let mut bins: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, s) in sites.iter().enumerate() {
            let key = (
                ((s[0] - ox) / bin).floor() as i64,
                ((s[1] - oy) / bin).floor() as i64,
            );
            bins.entry(key).or_default().push(i as u32);
        }
        NearestIndex {
            sites,
            bins,
            ox,
            oy,
            bin,
        }
    }

    fn nearest(&self, x: f64, y: f64) -> usize {
        debug_assert!(!self.sites.is_empty());
        let cx = ((x - self.ox) / self.bin).floor() as i64;
        let cy = ((y - self.oy) / self.bin).floor() as i64;
        let mut best = usize::MAX;
        let mut best_d2 = f64::INFINITY;
        let mut ring: i64 = 0;
        loop {
            // Any site in a ring-r bin lies at distance >= (r-1)*bin, so once
            // a candidate beats that bound no farther ring can improve on it.
            if best != usize::MAX {
                let lower = (ring - 1) as f64 * self.bin;
                if lower > 0.0 && best_d2 <= lower * lower {
                    return best;
                }
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs().max(dy.abs()) != ring {
                        continue;
                    }
                    if let Some(ids) = self.bins.get(&(cx + dx, cy + dy)) {
                        for &i in ids {
                            let i = i as usize;
                            let s = self.sites[i];
                            let d2 = (s[0] - x) * (s[0] - x) + (s[1] - y) * (s[1] - y);
                            if d2 < best_d2 || (d2 == best_d2 && i < best) {
                                best_d2 = d2;
                                best = i;
                            }
                        }
                    }
                }
            }
            // Occupied bins sit at finite key distance, so a candidate is
            // always reached and the lower-bound test above then fires.
            ring += 1;
        }
    }
}
