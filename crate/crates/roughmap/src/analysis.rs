//! Map normalization and pairwise map correlation reports.
//!
//! Correlations run over jointly valid pixels only, and every report records
//! how many pixels that was, so hull-edge loss stays visible. Entry order is
//! canonical: labels sorted lexicographically within a pair, pairs sorted by
//! (label_a, label_b), windows ascending.

use std::io::Write;

use crate::descriptors::{roughness_map, Descriptor, RoughnessMap, WindowSpec};
use crate::error::{Result, RoughError};
use crate::grid::DemGrid;
use crate::pointcloud::PointCloud;
use crate::rasterize::{rasterize, InterpMethod};

/// One compared pair of maps.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrEntry {
    pub label_a: String,
    pub label_b: String,
    pub r: f64,
    /// Jointly valid pixels the correlation ran over.
    pub n_pixels: usize,
}

/// Pairwise correlations under one shared context (terrain, window, method).
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub context: String,
    pub entries: Vec<CorrEntry>,
}

impl CorrelationReport {
    /// Mean r over all entries.
    pub fn mean_r(&self) -> f64 {
        let n = self.entries.len();
        self.entries.iter().map(|e| e.r).sum::<f64>() / n as f64
    }

    /// Per-label mean of the r values of entries touching that label,
    /// sorted by label.
    pub fn label_means(&self) -> Vec<(String, f64)> {
        let mut labels: Vec<&str> = Vec::new();
        for e in &self.entries {
            for l in [e.label_a.as_str(), e.label_b.as_str()] {
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
        }
        labels.sort_unstable();
        labels
            .into_iter()
            .map(|l| {
                let rs: Vec<f64> = self
                    .entries
                    .iter()
                    .filter(|e| e.label_a == l || e.label_b == l)
                    .map(|e| e.r)
                    .collect();
                (l.to_string(), rs.iter().sum::<f64>() / rs.len() as f64)
            })
            .collect()
    }

    /// Look up the entry for an unordered label pair.
    pub fn entry(&self, a: &str, b: &str) -> Option<&CorrEntry> {
        self.entries.iter().find(|e| {
            (e.label_a == a && e.label_b == b) || (e.label_a == b && e.label_b == a)
        })
    }

    /// CSV rows under the `context,label_a,label_b,r,n_pixels` header.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "context,label_a,label_b,r,n_pixels")?;
        self.write_csv_rows(out)
    }

    fn write_csv_rows(&self, out: &mut impl Write) -> Result<()> {
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{:.6},{}",
                self.context, e.label_a, e.label_b, e.r, e.n_pixels
            )?;
        }
        Ok(())
    }
}

/// One correlation report per window size, ascending.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub reports: Vec<(usize, CorrelationReport)>,
}

impl SweepReport {
    /// Per pair, the spread of r across the swept windows (max minus min),
    /// sorted by (label_a, label_b).
    pub fn pair_ranges(&self) -> Vec<(String, String, f64)> {
        let mut out: Vec<(String, String, f64)> = Vec::new();
        let first = match self.reports.first() {
            Some((_, rep)) => rep,
            None => return out,
        };
        for e in &first.entries {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, rep) in &self.reports {
                if let Some(x) = rep.entry(&e.label_a, &e.label_b) {
                    lo = lo.min(x.r);
                    hi = hi.max(x.r);
                }
            }
            out.push((e.label_a.clone(), e.label_b.clone(), hi - lo));
        }
        out
    }

    /// All rows under one header, ordered by (window, label_a, label_b).
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "context,label_a,label_b,r,n_pixels")?;
        for (_, rep) in &self.reports {
            rep.write_csv_rows(out)?;
        }
        Ok(())
    }
}

/// Rescale valid pixels to [0, 1]; a constant map maps to all zeros. Nodata
/// pixels pass through.
pub fn normalize01(map: &RoughnessMap) -> Result<RoughnessMap> {
    let (lo, hi) = map.grid.value_range().ok_or(RoughError::EmptyMap)?;
    let range = hi - lo;
    let mut out = map.clone();
    for v in out.grid.data_mut() {
        if v.is_finite() {
            *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
        }
    }
    Ok(out)
}

/// Pearson correlation over the jointly valid pixels of two equally sized
/// grids, with the pixel count. Two-pass: means first, then centered
/// moments.
pub fn pearson_grids(a: &DemGrid, b: &DemGrid) -> Result<(f64, usize)> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(RoughError::DimensionMismatch {
            a_rows: a.nrows(),
            a_cols: a.ncols(),
            b_rows: b.nrows(),
            b_cols: b.ncols(),
        });
    }
    let mut n = 0usize;
    let (mut sa, mut sb) = (0.0f64, 0.0f64);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        if x.is_finite() && y.is_finite() {
            n += 1;
            sa += x;
            sb += y;
        }
    }
    if n < 2 {
        return Err(RoughError::UndefinedCorrelation);
    }
    let ma = sa / n as f64;
    let mb = sb / n as f64;
    let (mut vaa, mut vbb, mut vab) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        if x.is_finite() && y.is_finite() {
            let dx = x - ma;
            let dy = y - mb;
            vaa += dx * dx;
            vbb += dy * dy;
            vab += dx * dy;
        }
    }
    if vaa == 0.0 || vbb == 0.0 {
        return Err(RoughError::UndefinedCorrelation);
    }
    Ok((vab / (vaa * vbb).sqrt(), n))
}

/// Pearson correlation between two roughness maps.
pub fn pearson(a: &RoughnessMap, b: &RoughnessMap) -> Result<f64> {
    pearson_grids(&a.grid, &b.grid).map(|(r, _)| r)
}

/// Correlate all ten descriptor pairs at one window size.
pub fn descriptor_comparison(dem: &DemGrid, w: WindowSpec) -> Result<CorrelationReport> {
    let mut maps: Vec<RoughnessMap> = Descriptor::ALL
        .iter()
        .map(|&d| roughness_map(dem, d, w))
        .collect::<Result<_>>()?;
    maps.sort_by_key(|m| m.descriptor.name());
    let mut entries = Vec::with_capacity(10);
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let (r, n_pixels) = pearson_grids(&maps[i].grid, &maps[j].grid)?;
            entries.push(CorrEntry {
                label_a: maps[i].descriptor.name().to_string(),
                label_b: maps[j].descriptor.name().to_string(),
                r,
                n_pixels,
            });
        }
    }
    Ok(CorrelationReport {
        context: format!("w={}", w.size()),
        entries,
    })
}

/// Descriptor comparison per window size, ascending.
pub fn scale_sweep(dem: &DemGrid, windows: &[WindowSpec]) -> Result<SweepReport> {
    let mut sizes: Vec<usize> = windows.iter().map(|w| w.size()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut reports = Vec::with_capacity(sizes.len());
    for s in sizes {
        reports.push((s, descriptor_comparison(dem, WindowSpec::new(s)?)?));
    }
    Ok(SweepReport { reports })
}

/// Rasterize the cloud once per method on identical grid geometry, compute
/// the same descriptor map for each, and correlate all method pairs.
pub fn interpolation_comparison(
    cloud: &PointCloud,
    methods: &[InterpMethod],
    d: Descriptor,
    w: WindowSpec,
    cell: f64,
) -> Result<CorrelationReport> {
    if methods.len() < 2 {
        return Err(RoughError::TooFewMethods(methods.len()));
    }
    let maps: Vec<RoughnessMap> = methods
        .iter()
        .map(|&m| roughness_map(&rasterize(cloud, m, cell)?, d, w))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(methods.len() * (methods.len() - 1) / 2);
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let (r, n_pixels) = pearson_grids(&maps[i].grid, &maps[j].grid)?;
            let mut la = methods[i].name();
            let mut lb = methods[j].name();
            if la > lb {
                std::mem::swap(&mut la, &mut lb);
            }
            entries.push(CorrEntry {
                label_a: la.to_string(),
                label_b: lb.to_string(),
                r,
                n_pixels,
            });
        }
    }
    entries.sort_by(|a, b| (&a.label_a, &a.label_b).cmp(&(&b.label_a, &b.label_b)));
    Ok(CorrelationReport {
        context: format!("{}/w={}", d.name(), w.size()),
        entries,
    })
}
