//! Seeded synthetic terrain point clouds.
//!
//! Three archetypes cover the qualitative terrain classes the descriptors
//! are meant to separate: hilly-rough (tall smooth bumps plus strong noise),
//! flat-rough (strong noise only) and flat-smooth (faint bumps plus faint
//! noise). Sampling is a jittered grid at the requested mean spacing, and
//! generation is a pure function of the spec, bit for bit.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, RoughError};
use crate::pointcloud::{Point3, PointCloud};

/// Qualitative terrain class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Archetype {
    HillyRough,
    FlatRough,
    FlatSmooth,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [
        Archetype::HillyRough,
        Archetype::FlatRough,
        Archetype::FlatSmooth,
    ];

    /// Canonical name used in labels and file names.
    pub fn name(self) -> &'static str {
        match self {
            Archetype::HillyRough => "hilly_rough",
            Archetype::FlatRough => "flat_rough",
            Archetype::FlatSmooth => "flat_smooth",
        }
    }

    /// Default peak height of the smooth bump field (m).
    fn default_hill_height(self) -> f64 {
        match self {
            Archetype::HillyRough => 8.0,
            Archetype::FlatRough => 0.0,
            Archetype::FlatSmooth => 0.3,
        }
    }

    /// Default white-noise sigma (m).
    fn default_noise_sigma(self) -> f64 {
        match self {
            Archetype::HillyRough | Archetype::FlatRough => 0.4,
            Archetype::FlatSmooth => 0.03,
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Archetype {
    type Err = String;

    /// Accepts underscore and hyphen spellings.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hilly_rough" | "hilly-rough" => Ok(Archetype::HillyRough),
            "flat_rough" | "flat-rough" => Ok(Archetype::FlatRough),
            "flat_smooth" | "flat-smooth" => Ok(Archetype::FlatSmooth),
            _ => Err(format!(
                "unknown terrain `{s}` (expected hilly-rough, flat-rough or flat-smooth)"
            )),
        }
    }
}

/// Everything that determines a generated cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainSpec {
    pub archetype: Archetype,
    /// Side length of the square sampled area (m).
    pub extent: f64,
    /// Mean point spacing (m).
    pub spacing: f64,
    pub seed: u64,
    /// Peak height of the smooth bump field (m); zero disables it.
    pub hill_height: f64,
    /// White-noise standard deviation (m).
    pub noise_sigma: f64,
}

impl TerrainSpec {
    /// Spec with the archetype's default amplitudes over the default
    /// 350 m x 350 m area at 0.64 m mean spacing.
    pub fn new(archetype: Archetype, seed: u64) -> Self {
        TerrainSpec {
            archetype,
            extent: 350.0,
            spacing: 0.64,
            seed,
            hill_height: archetype.default_hill_height(),
            noise_sigma: archetype.default_noise_sigma(),
        }
    }

    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }
}

struct Bump {
    cx: f64,
    cy: f64,
    /// Gaussian radius (m).
    radius: f64,
    amp: f64,
}

/// Generate the cloud for a spec. Point count is close to
/// (extent / spacing)^2; elevations are the archetype's smooth signal plus
/// white noise.
pub fn generate(spec: &TerrainSpec) -> Result<PointCloud> {
    if !(spec.extent > 0.0) || !spec.extent.is_finite() {
        return Err(RoughError::InvalidSpec(format!(
            "extent must be positive, got {}",
            spec.extent
        )));
    }
    if !(spec.spacing > 0.0) || !spec.spacing.is_finite() {
        return Err(RoughError::InvalidSpec(format!(
            "spacing must be positive, got {}",
            spec.spacing
        )));
    }
    if !(spec.noise_sigma >= 0.0) || !spec.noise_sigma.is_finite() {
        return Err(RoughError::InvalidSpec(format!(
            "noise sigma must be nonnegative, got {}",
            spec.noise_sigma
        )));
    }
    let n = (spec.extent / spec.spacing).round() as usize;
    if n < 2 {
        return Err(RoughError::InvalidSpec(format!(
            "extent {} holds fewer than two rows at spacing {}",
            spec.extent, spec.spacing
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = n as f64 * spec.spacing;

    // The smooth signal: a handful of compact Gaussian hills, steep enough
    // that windows on their flanks carry a clear local trend. Parameters
    // come off the stream before any point draws so the field is fixed up
    // front.
    let bumps: Vec<Bump> = if spec.hill_height > 0.0 {
        (0..6)
            .map(|_| {
                let cx = (0.15 + 0.70 * rng.random::<f64>()) * side;
                let cy = (0.15 + 0.70 * rng.random::<f64>()) * side;
                let radius = (0.04 + 0.04 * rng.random::<f64>()) * side;
                let amp = (0.5 + 0.5 * rng.random::<f64>()) * spec.hill_height;
                Bump { cx, cy, radius, amp }
            })
            .collect()
    } else {
        Vec::new()
    };
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| RoughError::InvalidSpec(e.to_string()))?;

    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = (j as f64 + rng.random::<f64>()) * spec.spacing;
            let y = (i as f64 + rng.random::<f64>()) * spec.spacing;
            let mut z = noise.sample(&mut rng);
            for b in &bumps {
                let d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
                z += b.amp * (-d2 / (2.0 * b.radius * b.radius)).exp();
            }
            pts.push(Point3::new(x, y, z));
        }
    }
    PointCloud::new(pts)
}
