//! Delaunay triangulation and natural-neighbour weights.
//!
//! Construction is incremental Bowyer-Watson over a symbolic super-triangle:
//! three virtual vertices sit at infinity in fixed directions, so every real
//! site lies strictly inside the initial triangle and the predicates are
//! evaluated in the limit of the virtual vertices receding. The finished
//! triangulation keeps only real triangles. Exactly co-circular quads are
//! then re-flipped until each kept diagonal touches the lowest site index
//! involved, which makes the result independent of insertion order.

pub mod predicates;

use std::collections::HashMap;

use crate::error::{Result, RoughError};
use predicates::{
    cmp_dist2, cross_dir_sign, dot_dir_sign, incircle, orient2d, strictly_between,
};

/// First of the three virtual vertex ids.
const SUPER0: usize = usize::MAX - 2;

/// Directions to the virtual vertices: equal length, pairwise independent,
/// counter-clockwise. Small integer components keep the fast predicate paths
/// tight before the exact fallback.
const DIR: [[f64; 2]; 3] = [[2.0, 1.0], [-2.0, 1.0], [1.0, -2.0]];

/// Sign of cross(DIR[j], DIR[k]).
const DIR_CROSS: [[i8; 3]; 3] = [[0, 1, -1], [-1, 0, 1], [1, -1, 0]];

#[inline]
fn super_ix(v: usize) -> Option<usize> {
    (v >= SUPER0).then(|| v - SUPER0)
}

/// Distance within which a query point is treated as coinciding with a site.
pub const SITE_SNAP: f64 = 1e-9;

#[derive(Clone, Copy)]
struct BTri {
    v: [usize; 3],
    /// n[e] faces edge (v[e], v[(e+1)%3]).
    n: [Option<usize>; 3],
}

/// Build the Delaunay triangulation of the given sites.
///
/// Sites must be finite and pairwise distinct; fewer than three sites or an
/// entirely collinear set is an error. Triangles reference sites by their
/// index in the input slice, wind counter-clockwise, are listed with the
/// smallest index first, and are sorted, so equal site sets produce
/// identical output whatever the input order.
pub fn delaunay(sites: &[[f64; 2]]) -> Result<Triangulation> {
    if sites.len() < 3 {
        return Err(RoughError::InsufficientPoints {
            needed: 3,
            got: sites.len(),
        });
    }
    let mut seen = HashMap::with_capacity(sites.len());
    for (i, s) in sites.iter().enumerate() {
        if !(s[0].is_finite() && s[1].is_finite()) {
            return Err(RoughError::DegenerateGeometry(format!(
                "non-finite site at index {i}"
            )));
        }
        let key = (norm_bits(s[0]), norm_bits(s[1]));
        if let Some(j) = seen.insert(key, i) {
            return Err(RoughError::DegenerateGeometry(format!(
                "duplicate sites at indices {j} and {i}"
            )));
        }
    }
    let mut b = Builder::new(sites.to_vec());
    for i in 0..sites.len() {
        b.insert(i)?;
    }
    b.finalize()
}

fn norm_bits(v: f64) -> u64 {
    if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() }
}

struct Builder {
    sites: Vec<[f64; 2]>,
    center: [f64; 2],
    tris: Vec<BTri>,
    alive: Vec<bool>,
    free: Vec<usize>,
    stamp: Vec<u32>,
    conflict: Vec<bool>,
    queued: Vec<u32>,
    epoch: u32,
    hint: usize,
    cavity: Vec<usize>,
    stack: Vec<usize>,
    boundary: Vec<(usize, usize, Option<usize>)>,
    start_of: HashMap<usize, usize>,
    order: Vec<usize>,
    new_ids: Vec<usize>,
}

impl Builder {
    fn new(sites: Vec<[f64; 2]>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in &sites {
            for k in 0..2 {
                lo[k] = lo[k].min(s[k]);
                hi[k] = hi[k].max(s[k]);
            }
        }
        let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        Builder {
            sites,
            center,
            tris: vec![BTri {
                v: [SUPER0, SUPER0 + 1, SUPER0 + 2],
                n: [None; 3],
            }],
            alive: vec![true],
            free: Vec::new(),
            stamp: vec![0],
            conflict: vec![false],
            queued: vec![0],
            epoch: 0,
            hint: 0,
            cavity: Vec::new(),
            stack: Vec::new(),
            boundary: Vec::new(),
            start_of: HashMap::new(),
            order: Vec::new(),
            new_ids: Vec::new(),
        }
    }

    #[inline]
    fn site(&self, v: usize) -> [f64; 2] {
        self.sites[v]
    }

    /// Orientation of (u, w, p) where u and w may be virtual and p is a real
    /// position. Virtual vertices are rotated into the last slots (an even
    /// permutation) and resolved by their limit rules.
    fn orient_q(&self, u: usize, w: usize, p: [f64; 2]) -> i8 {
        match (super_ix(u), super_ix(w)) {
            (None, None) => orient2d(self.site(u), self.site(w), p),
            // (S_k, w, p) ~ (w, p, S_k)
            (Some(k), None) => limit_orient(self.site(w), p, k, self.center),
            // (u, S_k, p) ~ (p, u, S_k)
            (None, Some(k)) => limit_orient(p, self.site(u), k, self.center),
            // (S_j, S_k, p) ~ (p, S_j, S_k)
            (Some(j), Some(k)) => DIR_CROSS[j][k],
        }
    }

    /// Does the circumdisk of triangle t (in the limit) strictly contain p?
    fn conflict_sym(&self, t: usize, p: [f64; 2]) -> bool {
        let v = self.tris[t].v;
        let s = [super_ix(v[0]), super_ix(v[1]), super_ix(v[2])];
        let nsup = s.iter().filter(|x| x.is_some()).count();
        match nsup {
            0 => {
                incircle(self.site(v[0]), self.site(v[1]), self.site(v[2]), p) > 0
            }
            1 => {
                // Rotate the virtual vertex into the last slot: (a, b, S_k).
                // The limit disk is the open halfplane left of (a, b) plus
                // the open segment between them.
                let (a, b) = if s[0].is_some() {
                    (v[1], v[2])
                } else if s[1].is_some() {
                    (v[2], v[0])
                } else {
                    (v[0], v[1])
                };
                let a = self.site(a);
                let b = self.site(b);
                match orient2d(a, b, p) {
                    1 => true,
                    -1 => false,
                    _ => strictly_between(a, b, p),
                }
            }
            2 => {
                // Rotate the real vertex first: (a, S_j, S_k). The limit disk
                // is the halfplane past a in the mean direction; exactly on
                // its edge, nearer the anchor point than a wins.
                let (a, j, k) = if s[0].is_none() {
                    (v[0], s[1].unwrap(), s[2].unwrap())
                } else if s[1].is_none() {
                    (v[1], s[2].unwrap(), s[0].unwrap())
                } else {
                    (v[2], s[0].unwrap(), s[1].unwrap())
                };
                let a = self.site(a);
                let e = [DIR[j][0] + DIR[k][0], DIR[j][1] + DIR[k][1]];
                match dot_dir_sign(a, p, e) {
                    1 => true,
                    -1 => false,
                    _ => cmp_dist2(p, a, self.center) < 0,
                }
            }
            _ => true,
        }
    }

    fn memo_conflict(&mut self, t: usize, p: [f64; 2]) -> bool {
        if self.stamp[t] == self.epoch {
            return self.conflict[t];
        }
        let c = self.conflict_sym(t, p);
        self.stamp[t] = self.epoch;
        self.conflict[t] = c;
        c
    }

    fn locate_q(&self, p: [f64; 2]) -> Result<usize> {
        let mut t = self.hint;
        if t >= self.tris.len() || !self.alive[t] {
            return self.locate_scan(p);
        }
        let cap = 4 * self.tris.len() + 64;
        let mut steps = 0usize;
        'outer: loop {
            steps += 1;
            if steps > cap {
                return self.locate_scan(p);
            }
            let tri = self.tris[t];
            for e in 0..3 {
                if self.orient_q(tri.v[e], tri.v[(e + 1) % 3], p) < 0 {
                    match tri.n[e] {
                        Some(nt) => {
                            t = nt;
                            continue 'outer;
                        }
                        None => return self.locate_scan(p),
                    }
                }
            }
            return Ok(t);
        }
    }

    fn locate_scan(&self, p: [f64; 2]) -> Result<usize> {
        for t in 0..self.tris.len() {
            if !self.alive[t] {
                continue;
            }
            let tri = self.tris[t];
            if (0..3).all(|e| self.orient_q(tri.v[e], tri.v[(e + 1) % 3], p) >= 0) {
                return Ok(t);
            }
        }
        Err(RoughError::DegenerateGeometry(
            "point location failed".into(),
        ))
    }

    fn insert(&mut self, pi: usize) -> Result<()> {
        let p = self.sites[pi];
        let t0 = self.locate_q(p)?;
        self.epoch += 1;
        debug_assert!(self.memo_conflict(t0, p), "containing triangle must conflict");

        self.stack.clear();
        self.cavity.clear();
        self.stack.push(t0);
        self.queued[t0] = self.epoch;
        while let Some(t) = self.stack.pop() {
            self.cavity.push(t);
            let tri = self.tris[t];
            for e in 0..3 {
                if let Some(nt) = tri.n[e] {
                    if self.queued[nt] != self.epoch && self.memo_conflict(nt, p) {
                        self.queued[nt] = self.epoch;
                        self.stack.push(nt);
                    }
                }
            }
        }

        // Directed boundary edges of the cavity, then stitched into a cycle.
        self.boundary.clear();
        for ci in 0..self.cavity.len() {
            let tri = self.tris[self.cavity[ci]];
            for e in 0..3 {
                let outside = match tri.n[e] {
                    None => true,
                    Some(o) => self.queued[o] != self.epoch,
                };
                if outside {
                    self.boundary
                        .push((tri.v[e], tri.v[(e + 1) % 3], tri.n[e]));
                }
            }
        }
        let m = self.boundary.len();
        debug_assert!(m >= 3);
        self.start_of.clear();
        for (i, &(u, _, _)) in self.boundary.iter().enumerate() {
            if self.start_of.insert(u, i).is_some() {
                return Err(RoughError::DegenerateGeometry(
                    "cavity boundary pinched".into(),
                ));
            }
        }
        self.order.clear();
        let mut cur = 0usize;
        for _ in 0..m {
            self.order.push(cur);
            let w = self.boundary[cur].1;
            cur = *self.start_of.get(&w).ok_or_else(|| {
                RoughError::DegenerateGeometry("cavity boundary broken".into())
            })?;
        }

        for ci in 0..self.cavity.len() {
            let t = self.cavity[ci];
            self.alive[t] = false;
            self.free.push(t);
        }
        self.new_ids.clear();
        for _ in 0..m {
            let id = match self.free.pop() {
                Some(id) => id,
                None => {
                    self.tris.push(BTri {
                        v: [0; 3],
                        n: [None; 3],
                    });
                    self.alive.push(false);
                    self.stamp.push(0);
                    self.conflict.push(false);
                    self.queued.push(0);
                    self.tris.len() - 1
                }
            };
            self.new_ids.push(id);
        }
        for j in 0..m {
            let (u, w, out) = self.boundary[self.order[j]];
            let id = self.new_ids[j];
            self.tris[id] = BTri {
                v: [u, w, pi],
                n: [
                    out,
                    Some(self.new_ids[(j + 1) % m]),
                    Some(self.new_ids[(j + m - 1) % m]),
                ],
            };
            self.alive[id] = true;
            if let Some(o) = out {
                let ot = &mut self.tris[o];
                let slot = (0..3)
                    .find(|&s| ot.v[s] == w && ot.v[(s + 1) % 3] == u)
                    .ok_or_else(|| {
                        RoughError::DegenerateGeometry("neighbor link mismatch".into())
                    })?;
                ot.n[slot] = Some(id);
            }
        }
        self.hint = self.new_ids[0];
        Ok(())
    }

    fn finalize(self) -> Result<Triangulation> {
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        for (t, tri) in self.tris.iter().enumerate() {
            if self.alive[t] && tri.v.iter().all(|&v| super_ix(v).is_none()) {
                triangles.push(tri.v);
            }
        }
        if triangles.is_empty() {
            return Err(RoughError::DegenerateGeometry(
                "all sites are collinear".into(),
            ));
        }
        canonical_flips(&mut triangles, &self.sites);
        for t in &mut triangles {
            rotate_min_first(t);
        }
        triangles.sort_unstable();
        let neighbors = build_neighbors(&triangles)?;
        Ok(Triangulation {
            sites: self.sites,
            triangles,
            neighbors,
        })
    }
}

fn limit_orient(a: [f64; 2], b: [f64; 2], k: usize, c: [f64; 2]) -> i8 {
    let s = cross_dir_sign(a, b, DIR[k]);
    if s != 0 {
        s
    } else {
        orient2d(a, b, c)
    }
}

fn rotate_min_first(t: &mut [usize; 3]) {
    let k = (0..3).min_by_key(|&k| t[k]).unwrap();
    *t = [t[k], t[(k + 1) % 3], t[(k + 2) % 3]];
}

/// Re-flip every exactly co-circular strictly convex quad until each kept
/// diagonal touches the lowest site index among the four corners. Within a
/// maximal co-circular point class this converges to the fan from the lowest
/// index, so equal site sets triangulate identically regardless of the order
/// they were inserted in.
fn canonical_flips(tris: &mut [[usize; 3]], sites: &[[f64; 2]]) {
    let mut emap: HashMap<(usize, usize), usize> = HashMap::with_capacity(tris.len() * 3);
    for (t, v) in tris.iter().enumerate() {
        for e in 0..3 {
            emap.insert((v[e], v[(e + 1) % 3]), t);
        }
    }
    loop {
        let mut any = false;
        for t1 in 0..tris.len() {
            let mut e = 0;
            while e < 3 {
                let v1 = tris[t1];
                let (u, w) = (v1[e], v1[(e + 1) % 3]);
                if u > w {
                    e += 1;
                    continue;
                }
                let Some(&t2) = emap.get(&(w, u)) else {
                    e += 1;
                    continue;
                };
                let x = v1[(e + 2) % 3];
                let v2 = tris[t2];
                let e2 = (0..3)
                    .find(|&s| v2[s] == w && v2[(s + 1) % 3] == u)
                    .expect("edge map out of sync");
                let y = v2[(e2 + 2) % 3];
                let lo = u.min(w).min(x).min(y);
                if lo != x && lo != y {
                    e += 1;
                    continue;
                }
                let (su, sw, sx, sy) = (sites[u], sites[w], sites[x], sites[y]);
                if incircle(sx, su, sw, sy) != 0 {
                    e += 1;
                    continue;
                }
                // Quad cycle (x, u, y, w) must be strictly convex.
                if orient2d(sx, su, sy) <= 0
                    || orient2d(su, sy, sw) <= 0
                    || orient2d(sy, sw, sx) <= 0
                    || orient2d(sw, sx, su) <= 0
                {
                    e += 1;
                    continue;
                }
                for ee in 0..3 {
                    emap.remove(&(v1[ee], v1[(ee + 1) % 3]));
                    emap.remove(&(v2[ee], v2[(ee + 1) % 3]));
                }
                tris[t1] = [x, u, y];
                tris[t2] = [y, w, x];
                for (t, v) in [(t1, tris[t1]), (t2, tris[t2])] {
                    for ee in 0..3 {
                        emap.insert((v[ee], v[(ee + 1) % 3]), t);
                    }
                }
                any = true;
                e = 0;
            }
        }
        if !any {
            break;
        }
    }
}

fn build_neighbors(tris: &[[usize; 3]]) -> Result<Vec<[Option<usize>; 3]>> {
    let mut emap: HashMap<(usize, usize), usize> = HashMap::with_capacity(tris.len() * 3);
    for (t, v) in tris.iter().enumerate() {
        for e in 0..3 {
            if emap.insert((v[e], v[(e + 1) % 3]), t).is_some() {
                return Err(RoughError::DegenerateGeometry(
                    "non-manifold edge in triangulation".into(),
                ));
            }
        }
    }
    Ok(tris
        .iter()
        .map(|v| {
            [
                emap.get(&(v[1], v[0])).copied(),
                emap.get(&(v[2], v[1])).copied(),
                emap.get(&(v[0], v[2])).copied(),
            ]
        })
        .collect())
}

pub(crate) fn circumcenter_of(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [
        a[0] + (cy * b2 - by * c2) / d,
        a[1] + (bx * c2 - cx * b2) / d,
    ]
}

/// A Delaunay triangulation over real sites.
#[derive(Debug, Clone)]
pub struct Triangulation {
    sites: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    /// neighbors[t][e] faces edge (triangles[t][e], triangles[t][(e+1)%3]);
    /// None marks a hull edge.
    neighbors: Vec<[Option<usize>; 3]>,
}

/// Reusable workspace for natural-neighbour queries, so per-cell raster
/// loops avoid reallocating.
#[derive(Debug, Default)]
pub struct NnScratch {
    stamp: Vec<u32>,
    conflict: Vec<bool>,
    queued: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
    cavity: Vec<usize>,
    /// (u, w, cavity triangle owning the directed edge (u, w)).
    boundary: Vec<(usize, usize, usize)>,
    start_of: HashMap<usize, usize>,
    order: Vec<usize>,
    poly: Vec<[f64; 2]>,
}

impl Triangulation {
    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    /// Circumcenter of triangle t.
    pub fn circumcenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        circumcenter_of(self.sites[a], self.sites[b], self.sites[c])
    }

    /// Index of the triangle whose closed region contains (x, y), or None
    /// when the point lies outside the hull. `hint` seeds the walk. A point
    /// on a shared edge or vertex belongs to several triangles; the lowest
    /// index is returned.
    pub fn locate(&self, x: f64, y: f64, hint: Option<usize>) -> Option<usize> {
        let p = [x, y];
        let mut t = hint.filter(|&h| h < self.triangles.len()).unwrap_or(0);
        let cap = 4 * self.triangles.len() + 64;
        let mut steps = 0usize;
        'outer: loop {
            steps += 1;
            if steps > cap {
                return self.locate_scan(p).map(|t| self.lowest_containing(t, p));
            }
            let v = self.triangles[t];
            for e in 0..3 {
                let a = self.sites[v[e]];
                let b = self.sites[v[(e + 1) % 3]];
                if orient2d(a, b, p) < 0 {
                    match self.neighbors[t][e] {
                        Some(nt) => {
                            t = nt;
                            continue 'outer;
                        }
                        // Strictly right of a hull edge's supporting line.
                        None => return None,
                    }
                }
            }
            return Some(self.lowest_containing(t, p));
        }
    }

    fn locate_scan(&self, p: [f64; 2]) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| {
            let v = self.triangles[t];
            (0..3).all(|e| {
                orient2d(self.sites[v[e]], self.sites[v[(e + 1) % 3]], p) >= 0
            })
        })
    }

    /// Deterministic tie-break for points on edges or vertices: among all
    /// triangles whose closed region contains p, pick the lowest index.
    fn lowest_containing(&self, t: usize, p: [f64; 2]) -> usize {
        let v = self.triangles[t];
        let on_edge: Vec<usize> = (0..3)
            .filter(|&e| {
                orient2d(self.sites[v[e]], self.sites[v[(e + 1) % 3]], p) == 0
            })
            .collect();
        match on_edge.len() {
            0 => t,
            1 => match self.neighbors[t][on_edge[0]] {
                Some(o) => t.min(o),
                None => t,
            },
            _ => {
                // Two zero orientations meet at a vertex: sweep the fan of
                // triangles around it in both directions. Edges e and e+1
                // share vertex e+1; edges 0 and 2 share vertex 0.
                let site = v[if on_edge[1] == on_edge[0] + 1 {
                    on_edge[1]
                } else {
                    0
                }];
                debug_assert_eq!(dist2(p, self.sites[site]), 0.0);
                let mut best = t;
                for dir in 0..2 {
                    let mut cur = t;
                    loop {
                        let vc = self.triangles[cur];
                        let s = (0..3).find(|&k| vc[k] == site).unwrap();
                        // Edges at the pivot: (site, next) and (prev, site).
                        let e = if dir == 0 { s } else { (s + 2) % 3 };
                        match self.neighbors[cur][e] {
                            Some(nt) if nt != t => {
                                best = best.min(nt);
                                cur = nt;
                            }
                            _ => break,
                        }
                    }
                }
                best
            }
        }
    }

    /// Barycentric coordinates of (x, y) in triangle t; they sum to one and
    /// are non-negative (up to rounding) when the point is inside.
    pub fn barycentric(&self, t: usize, x: f64, y: f64) -> [f64; 3] {
        let [ia, ib, ic] = self.triangles[t];
        let a = self.sites[ia];
        let b = self.sites[ib];
        let c = self.sites[ic];
        let d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let l0 = ((c[0] - b[0]) * (y - b[1]) - (c[1] - b[1]) * (x - b[0])) / d;
        let l1 = ((a[0] - c[0]) * (y - c[1]) - (a[1] - c[1]) * (x - c[0])) / d;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Natural-neighbour (Sibson) weights of the query point: pairs of site
    /// index and weight, summing to one. Errors with `outside hull` when the
    /// point is not covered.
    pub fn sibson_weights(&self, x: f64, y: f64) -> Result<Vec<(usize, f64)>> {
        let mut scratch = NnScratch::default();
        let mut out = Vec::new();
        self.sibson_weights_into(x, y, None, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// As [`sibson_weights`](Self::sibson_weights), reusing caller-owned
    /// buffers. `hint` seeds point location.
    pub fn sibson_weights_into(
        &self,
        x: f64,
        y: f64,
        hint: Option<usize>,
        s: &mut NnScratch,
        out: &mut Vec<(usize, f64)>,
    ) -> Result<()> {
        out.clear();
        let q = [x, y];
        let t0 = self.locate(x, y, hint).ok_or(RoughError::OutsideHull)?;

        let snap2 = SITE_SNAP * SITE_SNAP;
        for &v in &self.triangles[t0] {
            if dist2(q, self.sites[v]) <= snap2 {
                out.push((v, 1.0));
                return Ok(());
            }
        }

        // Exactly on a hull edge: interpolate linearly along it. The cavity
        // construction below only covers strictly interior points.
        for e in 0..3 {
            if self.neighbors[t0][e].is_none() {
                let u = self.triangles[t0][e];
                let w = self.triangles[t0][(e + 1) % 3];
                let a = self.sites[u];
                let b = self.sites[w];
                if orient2d(a, b, q) == 0 {
                    let len2 = dist2(a, b);
                    let t = (((q[0] - a[0]) * (b[0] - a[0]) + (q[1] - a[1]) * (b[1] - a[1]))
                        / len2)
                        .clamp(0.0, 1.0);
                    out.push((u, 1.0 - t));
                    out.push((w, t));
                    return Ok(());
                }
            }
        }

        // Conflict cavity: all triangles whose circumdisk strictly contains q.
        let n = self.triangles.len();
        if s.stamp.len() < n {
            s.stamp.resize(n, 0);
            s.conflict.resize(n, false);
            s.queued.resize(n, 0);
        }
        s.epoch += 1;
        s.stack.clear();
        s.cavity.clear();
        s.stack.push(t0);
        s.queued[t0] = s.epoch;
        while let Some(t) = s.stack.pop() {
            s.cavity.push(t);
            for e in 0..3 {
                if let Some(nt) = self.neighbors[t][e] {
                    if s.queued[nt] != s.epoch {
                        let c = if s.stamp[nt] == s.epoch {
                            s.conflict[nt]
                        } else {
                            let [a, b, cc] = self.triangles[nt];
                            let c = incircle(
                                self.sites[a],
                                self.sites[b],
                                self.sites[cc],
                                q,
                            ) > 0;
                            s.stamp[nt] = s.epoch;
                            s.conflict[nt] = c;
                            c
                        };
                        if c {
                            s.queued[nt] = s.epoch;
                            s.stack.push(nt);
                        }
                    }
                }
            }
        }

        s.boundary.clear();
        for ci in 0..s.cavity.len() {
            let t = s.cavity[ci];
            let v = self.triangles[t];
            for e in 0..3 {
                let outside = match self.neighbors[t][e] {
                    None => true,
                    Some(o) => s.queued[o] != s.epoch,
                };
                if outside {
                    s.boundary.push((v[e], v[(e + 1) % 3], t));
                }
            }
        }
        let m = s.boundary.len();
        debug_assert!(m >= 3);

        // Natural neighbours are exactly the cavity boundary vertices; snap
        // to one if the query is close enough.
        for &(u, _, _) in &s.boundary {
            if dist2(q, self.sites[u]) <= snap2 {
                out.push((u, 1.0));
                return Ok(());
            }
        }

        s.start_of.clear();
        for (i, &(u, _, _)) in s.boundary.iter().enumerate() {
            if s.start_of.insert(u, i).is_some() {
                return Err(RoughError::DegenerateGeometry(
                    "cavity boundary pinched".into(),
                ));
            }
        }
        s.order.clear();
        let mut cur = 0usize;
        for _ in 0..m {
            s.order.push(cur);
            let w = s.boundary[cur].1;
            cur = *s
                .start_of
                .get(&w)
                .ok_or_else(|| RoughError::DegenerateGeometry("cavity boundary broken".into()))?;
        }

        // Stolen area per boundary vertex: the polygon walks from the new
        // Voronoi vertex before the site, across the old circumcenters of the
        // cavity fan around it, to the new Voronoi vertex after it.
        let mut total = 0.0;
        for j in 0..m {
            let (u_prev, u_i, t_prev) = s.boundary[s.order[(j + m - 1) % m]];
            let (u_chk, u_next, t_last) = s.boundary[s.order[j]];
            debug_assert_eq!(u_i, u_chk);

            s.poly.clear();
            s.poly
                .push(circumcenter_of(self.sites[u_prev], self.sites[u_i], q));
            let mut t = t_prev;
            loop {
                let v = self.triangles[t];
                s.poly.push(self.circumcenter(t));
                let su = (0..3).find(|&k| v[k] == u_i).ok_or_else(|| {
                    RoughError::DegenerateGeometry("cavity fan lost its pivot".into())
                })?;
                if v[(su + 1) % 3] == u_next {
                    debug_assert_eq!(t, t_last);
                    break;
                }
                t = self.neighbors[t][su].ok_or_else(|| {
                    RoughError::DegenerateGeometry("cavity fan crossed the hull".into())
                })?;
            }
            s.poly
                .push(circumcenter_of(self.sites[u_i], self.sites[u_next], q));

            // The polygon runs clockwise, so the signed area is negated.
            let mut a2 = 0.0;
            for i in 0..s.poly.len() {
                let p0 = s.poly[i];
                let p1 = s.poly[(i + 1) % s.poly.len()];
                a2 += p0[0] * p1[1] - p1[0] * p0[1];
            }
            let area = (-0.5 * a2).max(0.0);
            total += area;
            out.push((u_i, area));
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(RoughError::DegenerateGeometry(
                "natural neighbour weights degenerate".into(),
            ));
        }
        for w in out.iter_mut() {
            w.1 /= total;
        }
        Ok(())
    }

    /// Check the empty-circumcircle property of every triangle against every
    /// site. O(triangles x sites); intended for tests and diagnostics.
    pub fn is_delaunay(&self) -> bool {
        self.triangles.iter().all(|&[a, b, c]| {
            let (pa, pb, pc) = (self.sites[a], self.sites[b], self.sites[c]);
            if orient2d(pa, pb, pc) != 1 {
                return false;
            }
            (0..self.sites.len()).all(|s| {
                s == a || s == b || s == c || incircle(pa, pb, pc, self.sites[s]) <= 0
            })
        })
    }
}

#[inline]
fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}
