//! Scattered elevation samples: ingestion, global plane fitting, detrending.
//!
//! Study data enters as XYZ text (one point per line, comma or whitespace
//! separated). Before rasterization the global elevation trend is removed by
//! subtracting the best-fitting plane and translating elevations so the
//! minimum residual is exactly zero.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, RoughError};

/// One elevation sample. Coordinates are metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Axis-aligned xy bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    /// Longest side, used as the characteristic length for tolerances.
    pub fn span(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.xmin + self.xmax),
            0.5 * (self.ymin + self.ymax),
        )
    }
}

/// An ordered collection of elevation samples with a derived bounding box.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Point3>,
    bbox: BBox,
}

impl PointCloud {
    /// Wrap a list of samples. Fails on non-finite coordinates or fewer than
    /// three points.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.len() < 3 {
            return Err(RoughError::InsufficientPoints {
                needed: 3,
                got: points.len(),
            });
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(RoughError::Parse {
                line: i + 1,
                msg: "non-finite coordinate".into(),
            });
        }
        let bbox = bbox_of(&points);
        Ok(Self { points, bbox })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Sample standard deviation of elevations (n-1 denominator).
    pub fn z_stddev(&self) -> f64 {
        let n = self.points.len() as f64;
        let mean = self.points.iter().map(|p| p.z).sum::<f64>() / n;
        let ss = self
            .points
            .iter()
            .map(|p| (p.z - mean) * (p.z - mean))
            .sum::<f64>();
        (ss / (n - 1.0)).sqrt()
    }

    /// Deduplicate exact xy duplicates keeping the z of the last occurrence,
    /// preserving first-seen order. Required before triangulation, which needs
    /// distinct sites.
    pub fn dedup_xy(&self) -> PointCloud {
        use std::collections::HashMap;
        let mut slot: HashMap<(u64, u64), usize> = HashMap::new();
        let mut out: Vec<Point3> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let key = (norm_bits(p.x), norm_bits(p.y));
            match slot.get(&key) {
                Some(&i) => out[i].z = p.z,
                None => {
                    slot.insert(key, out.len());
                    out.push(*p);
                }
            }
        }
        let bbox = bbox_of(&out);
        PointCloud { points: out, bbox }
    }
}

fn bbox_of(points: &[Point3]) -> BBox {
    let mut bb = BBox {
        xmin: f64::INFINITY,
        ymin: f64::INFINITY,
        xmax: f64::NEG_INFINITY,
        ymax: f64::NEG_INFINITY,
    };
    for p in points {
        bb.xmin = bb.xmin.min(p.x);
        bb.ymin = bb.ymin.min(p.y);
        bb.xmax = bb.xmax.max(p.x);
        bb.ymax = bb.ymax.max(p.y);
    }
    bb
}

// -0.0 and 0.0 must hash identically.
fn norm_bits(v: f64) -> u64 {
    if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() }
}

/// Global trend plane `z = a*x + b*y + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    /// Slope in x (m/m).
    pub a: f64,
    /// Slope in y (m/m).
    pub b: f64,
    /// Intercept (m).
    pub c: f64,
}

impl Plane {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z = {}*x + {}*y + {}", self.a, self.b, self.c)
    }
}

/// Read an XYZ text file: one point per line, fields separated by commas or
/// whitespace. Lines starting with `#` are comments; a single leading header
/// line is skipped when its first field is not numeric. Extra fields beyond
/// x, y, z are ignored.
pub fn load_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let file = File::open(path)?;
    parse_xyz(BufReader::new(file))
}

/// Parse XYZ text from any reader. See [`load_xyz`] for the format.
pub fn parse_xyz(reader: impl BufRead) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut saw_data = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        if fields.len() < 3 {
            return Err(RoughError::Parse {
                line: lineno,
                msg: format!("expected at least 3 fields, got {}", fields.len()),
            });
        }
        let first: std::result::Result<f64, _> = fields[0].parse();
        if first.is_err() && !saw_data {
            // Header line, e.g. "x,y,z".
            continue;
        }
        let parse_field = |i: usize| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|_| RoughError::Parse {
                line: lineno,
                msg: format!("field {} is not a number: {:?}", i + 1, fields[i]),
            })
        };
        let p = Point3::new(parse_field(0)?, parse_field(1)?, parse_field(2)?);
        if !p.is_finite() {
            return Err(RoughError::Parse {
                line: lineno,
                msg: "non-finite coordinate".into(),
            });
        }
        points.push(p);
        saw_data = true;
    }
    if points.len() < 3 {
        return Err(RoughError::InsufficientPoints {
            needed: 3,
            got: points.len(),
        });
    }
    Ok(PointCloud::new(points)?)
}

/// Write a cloud as whitespace-separated XYZ text. Full round-trip precision.
pub fn write_xyz(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in cloud.points() {
        writeln!(w, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z))?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips.
    let mut s = format!("{}", v);
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Least-squares plane through the cloud, minimizing the vertical residuals
/// `sum (z_i - a*x_i - b*y_i - c)^2`.
///
/// Coordinates are re-centered on the centroid before solving the normal
/// equations so that large absolute coordinates (UTM-style) stay well
/// conditioned. Errors with `degenerate geometry` when the xy locations are
/// collinear.
pub fn fit_plane(cloud: &PointCloud) -> Result<Plane> {
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(RoughError::InsufficientPoints {
            needed: 3,
            got: pts.len(),
        });
    }
    fit_plane_xyz(pts.iter().map(|p| (p.x, p.y, p.z)))
}

/// Plane fit over an iterator of (x, y, z) triples. Shared by the global
/// detrend and the per-window local detrending descriptor.
pub(crate) fn fit_plane_xyz(samples: impl Iterator<Item = (f64, f64, f64)> + Clone) -> Result<Plane> {
    let mut n = 0usize;
    let (mut sx, mut sy, mut sz) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y, z) in samples.clone() {
        n += 1;
        sx += x;
        sy += y;
        sz += z;
    }
    if n < 3 {
        return Err(RoughError::InsufficientPoints { needed: 3, got: n });
    }
    let nf = n as f64;
    let (cx, cy, cz) = (sx / nf, sy / nf, sz / nf);

    // Centered normal equations decouple: c' (the centered intercept) is the
    // mean, and (a, b) solve a symmetric 2x2 system.
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for (x, y, z) in samples {
        let dx = x - cx;
        let dy = y - cy;
        let dz = z - cz;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = sxx.max(syy);
    if det <= scale * scale * 1e-14 || scale == 0.0 {
        return Err(RoughError::DegenerateGeometry(
            "collinear xy locations, plane fit is singular".into(),
        ));
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;
    let c = cz - a * cx - b * cy;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(RoughError::DegenerateGeometry(
            "plane coefficients overflowed".into(),
        ));
    }
    Ok(Plane { a, b, c })
}

/// Remove the plane from every elevation, then translate upward so the
/// minimum residual elevation is exactly zero. xy coordinates and point order
/// are unchanged.
pub fn detrend(cloud: &PointCloud, plane: &Plane) -> PointCloud {
    let mut residuals: Vec<Point3> = cloud
        .points()
        .iter()
        .map(|p| Point3::new(p.x, p.y, p.z - plane.eval(p.x, p.y)))
        .collect();
    let zmin = residuals
        .iter()
        .map(|p| p.z)
        .fold(f64::INFINITY, f64::min);
    for p in &mut residuals {
        p.z -= zmin;
    }
    let bbox = bbox_of(&residuals);
    PointCloud {
        points: residuals,
        bbox,
    }
}
