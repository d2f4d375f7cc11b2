//! Points, distances, exclusion discs, polyline paths and polar sample grids.

use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Div};

/// A point of the open unit disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 {
            Ok(DiscPoint(z))
        } else {
            Err(Error::outside(z))
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn get(self) -> Complex64 {
        self.0
    }

    pub fn origin() -> Self {
        DiscPoint(Complex64::new(0.0, 0.0))
    }
}

impl TryFrom<Complex64> for DiscPoint {
    type Error = Error;
    fn try_from(z: Complex64) -> Result<Self> {
        DiscPoint::new(z)
    }
}

impl From<DiscPoint> for Complex64 {
    fn from(p: DiscPoint) -> Complex64 {
        p.0
    }
}

pub fn to_disc_points(zs: &[Complex64]) -> Result<Vec<DiscPoint>> {
    zs.iter().map(|&z| DiscPoint::new(z)).collect()
}

/// The involution `(a - z) / (1 - conj(a) z)`.
pub fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (1.0 - a.conj() * z)
}

pub fn mobius_jet(a: Complex64, z: Jet) -> Jet {
    (a - z) / (1.0 - a.conj() * z)
}

/// `|z - w| / |1 - conj(w) z|`.
pub fn pseudo_hyperbolic(z: Complex64, w: Complex64) -> f64 {
    let d = (1.0 - w.conj() * z).norm();
    if d == 0.0 {
        return 1.0;
    }
    ((z - w).norm() / d).min(1.0)
}

pub fn hyperbolic(z: Complex64, w: Complex64) -> f64 {
    pseudo_hyperbolic(z, w).atanh()
}

/// Pseudo-hyperbolic disc `{z : rho_p(z, center) < radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub center: DiscPoint,
    pub radius: f64,
}

impl Exclusion {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::param("radius", radius, "must lie in (0, 1)"));
        }
        Ok(Exclusion {
            center: DiscPoint::new(center)?,
            radius,
        })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        pseudo_hyperbolic(z, self.center.get()) < self.radius
    }

    /// Euclidean center and radius of the same disc.
    pub fn euclidean(&self) -> (Complex64, f64) {
        let c = self.center.get();
        let d2 = self.radius * self.radius;
        let den = 1.0 - d2 * c.norm_sqr();
        (c * ((1.0 - d2) / den), self.radius * (1.0 - c.norm_sqr()) / den)
    }
}

pub fn check_disjoint(exclusions: &[Exclusion]) -> Result<()> {
    let discs: Vec<(Complex64, f64)> = exclusions.iter().map(|e| e.euclidean()).collect();
    for i in 0..discs.len() {
        for j in i + 1..discs.len() {
            if (discs[i].0 - discs[j].0).norm() < discs[i].1 + discs[j].1 {
                return Err(Error::OverlappingExclusions { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Pseudo-hyperbolic radius used around a family of points: half the smallest
/// pairwise gap, capped at `cap`.
pub fn exclusion_radius(points: &[Complex64], cap: f64) -> f64 {
    let mut gap: f64 = 2.0 * cap;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            gap = gap.min(pseudo_hyperbolic(points[i], points[j]));
        }
    }
    (0.5 * gap).min(cap)
}

/// A polyline in the disc together with the exclusions it was routed around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub vertices: Vec<Complex64>,
    pub exclusions: Vec<Exclusion>,
    /// Index of the exclusion containing the endpoint, if any.
    pub terminal: Option<usize>,
    pub length: f64,
    pub length_bound: f64,
}

impl PathSpec {
    pub fn straight(a: Complex64, b: Complex64) -> Result<Self> {
        DiscPoint::new(a)?;
        DiscPoint::new(b)?;
        let len = (b - a).norm();
        Ok(PathSpec {
            vertices: vec![a, b],
            exclusions: vec![],
            terminal: None,
            length: len,
            length_bound: len,
        })
    }

    /// Radial segment from the origin to `r e^{i theta}`.
    pub fn radial(theta: f64, r: f64) -> Result<Self> {
        Self::straight(Complex64::new(0.0, 0.0), Complex64::from_polar(r, theta))
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().expect("path has vertices")
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// `n` points evenly spaced in arclength, endpoints included.
    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        let n = n.max(2);
        let lens: Vec<f64> = self.segments().map(|(a, b)| (b - a).norm()).collect();
        let total: f64 = lens.iter().sum();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = total * k as f64 / (n - 1) as f64;
            let mut placed = false;
            for (i, (a, b)) in self.segments().enumerate() {
                if s <= lens[i] || i + 1 == lens.len() {
                    let t = if lens[i] > 0.0 { (s / lens[i]).min(1.0) } else { 0.0 };
                    out.push(a + (b - a) * t);
                    placed = true;
                    break;
                }
                s -= lens[i];
            }
            if !placed {
                out.push(self.end());
            }
        }
        out
    }

    /// Checks sampled points against every exclusion with the pseudo-hyperbolic distance.
    /// Returns the number of violations.
    pub fn audit(&self, n: usize) -> usize {
        let pts = self.sample(n);
        let mut bad = 0;
        let mut entered_terminal = false;
        for z in pts {
            if z.norm() >= 1.0 {
                bad += 1;
                continue;
            }
            for (i, ex) in self.exclusions.iter().enumerate() {
                let inside = pseudo_hyperbolic(z, ex.center.get()) < ex.radius * (1.0 - 1e-12);
                if Some(i) == self.terminal {
                    if inside {
                        entered_terminal = true;
                    } else if entered_terminal {
                        bad += 1;
                    }
                } else if inside {
                    bad += 1;
                }
            }
        }
        bad
    }
}

const ARC_SIDES: usize = 32;
const ARC_MARGIN: f64 = 1e-3;

fn segment_distance(c: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (c - a).norm();
    }
    let t = (((c - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * t - c).norm()
}

/// Parameters `t` where the line `a + t (b - a)` meets the circle `|z - c| = r`.
fn line_circle(a: Complex64, b: Complex64, c: Complex64, r: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sqr();
    let qb = 2.0 * (f * d.conj()).re;
    let qc = f.norm_sqr() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)))
}

struct Router {
    discs: Vec<(Complex64, f64)>,
    terminal: Option<usize>,
    /// Small disc around the terminal center, routed around inside the terminal disc.
    inner: Option<usize>,
}

impl Router {
    fn enlarged(&self, i: usize) -> f64 {
        self.discs[i].1 * (1.0 + ARC_MARGIN) / (PI / ARC_SIDES as f64).cos()
    }

    fn arc_ok(&self, pts: &[Complex64], skip: usize) -> bool {
        if pts.iter().any(|p| p.norm() >= 1.0 - 1e-9) {
            return false;
        }
        for w in pts.windows(2) {
            for (k, &(c, r)) in self.discs.iter().enumerate() {
                let exempt = k == skip || (Some(skip) == self.inner && Some(k) == self.terminal);
                if !exempt && segment_distance(c, w[0], w[1]) < r {
                    return false;
                }
            }
        }
        true
    }

    fn route(&self, from: Complex64, to: Complex64, depth: usize, out: &mut Vec<Complex64>) -> Result<()> {
        if depth > 4 * self.discs.len() + 8 {
            return Err(Error::PathBlocked("detour recursion did not terminate".into()));
        }
        let mut first: Option<(usize, f64)> = None;
        for (k, &(c, r)) in self.discs.iter().enumerate() {
            if Some(k) == self.terminal {
                continue;
            }
            if segment_distance(c, from, to) < r {
                let t_in = line_circle(from, to, c, r).map(|(t, _)| t).unwrap_or(0.0);
                if first.map_or(true, |(_, t)| t_in < t) {
                    first = Some((k, t_in));
                }
            }
        }
        let Some((k, _)) = first else {
            out.push(to);
            return Ok(());
        };
        let (c, _) = self.discs[k];
        let big = self.enlarged(k);
        let (t0, t1) = line_circle(from, to, c, big).expect("line meets the enlarged circle");
        let p_in = from + (to - from) * t0.max(0.0);
        let p_out = from + (to - from) * t1.min(1.0);
        let a_in = (p_in - c).arg();
        let a_out = (p_out - c).arg();
        let ccw = (a_out - a_in).rem_euclid(2.0 * PI);
        let mut options = [(ccw, 1.0), (2.0 * PI - ccw, -1.0)];
        if options[1].0 < options[0].0 {
            options.swap(0, 1);
        }
        for (sweep, dir) in options {
            let steps = ((sweep / (2.0 * PI) * ARC_SIDES as f64).ceil() as usize).max(1);
            let mut arc = Vec::with_capacity(steps + 3);
            if t0 < 0.0 {
                // `from` sits in the margin shell: step radially out first.
                arc.push(from);
            }
            for j in 0..=steps {
                let a = a_in + dir * sweep * j as f64 / steps as f64;
                arc.push(c + Complex64::from_polar(big, a));
            }
            if t1 > 1.0 {
                arc.push(to);
            }
            let mut check = vec![from];
            check.extend_from_slice(&arc);
            if !self.arc_ok(&check, k) {
                continue;
            }
            self.route(from, arc[0], depth + 1, out)?;
            out.extend_from_slice(&arc[1..]);
            let last = *arc.last().expect("nonempty arc");
            if last != to {
                self.route(last, to, depth + 1, out)?;
            }
            return Ok(());
        }
        Err(Error::PathBlocked(format!(
            "both detours around the disc centred at {} are obstructed",
            self.discs[k].0
        )))
    }
}

/// Polyline from `start` to `target` avoiding every exclusion disc except the one that
/// contains `target`, which is entered only on the final approach.
pub fn build_avoiding_path(start: Complex64, target: Complex64, exclusions: &[Exclusion]) -> Result<PathSpec> {
    DiscPoint::new(start)?;
    DiscPoint::new(target)?;
    check_disjoint(exclusions)?;
    let mut discs: Vec<(Complex64, f64)> = exclusions.iter().map(|e| e.euclidean()).collect();
    if let Some(i) = exclusions.iter().position(|e| e.contains(start)) {
        return Err(Error::PathBlocked(format!("start lies inside exclusion {i}")));
    }
    let terminal = exclusions.iter().position(|e| e.contains(target));
    let mut inner = None;
    if let Some(t) = terminal {
        let c = exclusions[t].center.get();
        let d = pseudo_hyperbolic(target, c);
        if d > 0.0 {
            discs.push(Exclusion::new(c, 0.5 * d)?.euclidean());
            inner = Some(discs.len() - 1);
        }
    }
    let router = Router {
        discs,
        terminal,
        inner,
    };
    let mut vertices = vec![start];
    router.route(start, target, 0, &mut vertices)?;
    vertices.dedup();
    let length = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let length_bound = (target - start).norm()
        + (0..router.discs.len())
            .map(|k| 2.0 * PI * router.enlarged(k) * 1.01)
            .sum::<f64>();
    Ok(PathSpec {
        vertices,
        exclusions: exclusions.to_vec(),
        terminal,
        length,
        length_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Uniform,
    BoundaryRefined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNode {
    pub z: Complex64,
    pub weight: f64,
    pub ring: usize,
    pub slot: usize,
}

/// Polar midpoint grid on `{|z| <= r_max}`. Node weights are exact cell areas.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub edges: Vec<f64>,
    pub angular_count: usize,
    pub spacing: Spacing,
    pub nodes: Vec<GridNode>,
}

fn refined_edges(radial_count: usize, r_max: f64) -> Result<Vec<f64>> {
    let mut breaks = vec![0.0];
    let mut j = 1;
    loop {
        let b = 1.0 - 0.5f64.powi(j);
        if b >= r_max {
            breaks.push(r_max);
            break;
        }
        breaks.push(b);
        j += 1;
    }
    let blocks = breaks.len() - 1;
    if radial_count < blocks {
        return Err(Error::param(
            "radial_count",
            radial_count as f64,
            format!("boundary refinement to this radius needs at least {blocks} radial cells"),
        ));
    }
    let mut edges = vec![0.0];
    for b in 0..blocks {
        let cells = radial_count / blocks + usize::from(b < radial_count % blocks);
        let (lo, hi) = (breaks[b], breaks[b + 1]);
        for k in 1..=cells {
            edges.push(if k == cells { hi } else { lo + (hi - lo) * k as f64 / cells as f64 });
        }
    }
    Ok(edges)
}

pub fn make_grid(radial_count: usize, angular_count: usize, r_max: f64, spacing: Spacing) -> Result<SampleGrid> {
    if radial_count == 0 {
        return Err(Error::param("radial_count", 0.0, "must be positive"));
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::param("r_max", r_max, "must lie in (0, 1)"));
    }
    let edges = match spacing {
        Spacing::Uniform => (0..=radial_count)
            .map(|k| r_max * k as f64 / radial_count as f64)
            .collect(),
        Spacing::BoundaryRefined => refined_edges(radial_count, r_max)?,
    };
    SampleGrid::from_edges(edges, angular_count, spacing)
}

impl SampleGrid {
    pub fn from_edges(edges: Vec<f64>, angular_count: usize, spacing: Spacing) -> Result<Self> {
        if angular_count == 0 {
            return Err(Error::param("angular_count", 0.0, "must be positive"));
        }
        if edges.len() < 2 || edges[0] != 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Degenerate("radial edges must increase from 0".into()));
        }
        let r_max = *edges.last().expect("edges");
        if r_max >= 1.0 {
            return Err(Error::param("r_max", r_max, "must lie in (0, 1)"));
        }
        let dtheta = 2.0 * PI / angular_count as f64;
        let mut nodes = Vec::with_capacity((edges.len() - 1) * angular_count);
        for (ring, w) in edges.windows(2).enumerate() {
            let rho = 0.5 * (w[0] + w[1]);
            let weight = rho * (w[1] - w[0]) * dtheta;
            for slot in 0..angular_count {
                nodes.push(GridNode {
                    z: Complex64::from_polar(rho, dtheta * slot as f64),
                    weight,
                    ring,
                    slot,
                });
            }
        }
        Ok(SampleGrid {
            edges,
            angular_count,
            spacing,
            nodes,
        })
    }

    pub fn radial_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().expect("edges")
    }

    pub fn ring_radii(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn node(&self, ring: usize, slot: usize) -> &GridNode {
        &self.nodes[ring * self.angular_count + slot]
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.nodes.iter().map(|n| n.z).collect()
    }

    /// Indices of the angular and radial neighbours of node `i`.
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let m = self.angular_count;
        let (ring, slot) = (i / m, i % m);
        let mut out = Vec::with_capacity(4);
        if m > 1 {
            out.push(ring * m + (slot + 1) % m);
            out.push(ring * m + (slot + m - 1) % m);
        }
        if ring > 0 {
            out.push((ring - 1) * m + slot);
        }
        if ring + 1 < self.radial_count() {
            out.push((ring + 1) * m + slot);
        }
        out
    }

    /// Every other radial edge and half the angular nodes.
    pub fn coarsened(&self) -> Result<Self> {
        let mut edges: Vec<f64> = self.edges.iter().copied().step_by(2).collect();
        if *edges.last().expect("edges") != self.r_max() {
            edges.push(self.r_max());
        }
        Self::from_edges(edges, (self.angular_count / 2).max(1), self.spacing)
    }

    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(Complex64) -> Result<f64> + Sync,
    {
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|n| f(n.z).map(|v| v * n.weight))
            .collect::<Result<_>>()?;
        Ok(vals.iter().sum())
    }

    /// Value on this grid and the halving estimate `|I_h - I_2h| / 3`.
    pub fn integrate_with_error<F>(&self, f: F) -> Result<(f64, f64)>
    where
        F: Fn(Complex64) -> Result<f64> + Sync,
    {
        let fine = self.integrate(&f)?;
        let coarse = self.coarsened()?.integrate(&f)?;
        Ok((fine, (fine - coarse).abs() / 3.0))
    }
}

#[derive(Serialize, Deserialize)]
struct GridRecord {
    spacing: Spacing,
    angular_count: usize,
    edges: Vec<f64>,
    nodes: Vec<[f64; 3]>,
}

impl Serialize for SampleGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRecord {
            spacing: self.spacing,
            angular_count: self.angular_count,
            edges: self.edges.clone(),
            nodes: self.nodes.iter().map(|n| [n.z.re, n.z.im, n.weight]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampleGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = GridRecord::deserialize(d)?;
        let grid = SampleGrid::from_edges(rec.edges, rec.angular_count, rec.spacing)
            .map_err(serde::de::Error::custom)?;
        if grid.nodes.len() != rec.nodes.len() {
            return Err(serde::de::Error::custom("node count does not match edges"));
        }
        Ok(grid)
    }
}

/// Mean of `f` over `n` equally spaced points of `|z| = r`, starting at angle 0.
pub fn circle_mean<T, F>(f: F, r: f64, n: usize) -> Result<T>
where
    F: Fn(Complex64) -> Result<T> + Sync,
    T: Copy + Send + Default + Add<Output = T> + Div<f64, Output = T>,
{
    if n == 0 {
        return Err(Error::param("angular_count", 0.0, "must be positive"));
    }
    let vals: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| f(Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(T::default(), |a, b| a + b) / n as f64)
}
