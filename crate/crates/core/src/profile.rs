//! Suprema over circles, three-radius profiles and the stabilize/grow verdict.

use crate::error::Result;
use crate::geometry::SampleGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const PROFILE_RADII: [f64; 3] = [0.9, 0.99, 0.999];
pub const PROFILE_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub r: f64,
    pub value: f64,
    pub at: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stabilized,
    Growing,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictRule {
    /// Largest `(max - min) / max` still counted as stabilized.
    pub stabilize_spread: f64,
    /// Smallest `last / first` counted as growth.
    pub growth_factor: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule {
            stabilize_spread: 0.1,
            growth_factor: 2.0,
        }
    }
}

pub fn spread(profile: &[ProfilePoint]) -> f64 {
    let max = profile.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let min = profile.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        (max - min) / max
    }
}

pub fn growth(profile: &[ProfilePoint]) -> f64 {
    match (profile.first(), profile.last()) {
        (Some(a), Some(b)) if a.value > 0.0 => b.value / a.value,
        (Some(_), Some(b)) if b.value > 0.0 => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn strictly_increasing(profile: &[ProfilePoint]) -> bool {
    profile.windows(2).all(|w| w[1].value > w[0].value)
}

impl VerdictRule {
    pub fn classify(&self, profile: &[ProfilePoint]) -> Verdict {
        if growth(profile) >= self.growth_factor {
            Verdict::Growing
        } else if spread(profile) <= self.stabilize_spread {
            Verdict::Stabilized
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Maximum of `f` on `|z| = r`: `n` samples from angle 0, then a golden-section
/// refinement around the best sample.
pub fn circle_sup<F>(f: F, r: f64, n: usize) -> Result<(f64, Complex64)>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let step = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| f(Complex64::from_polar(r, step * j as f64)))
        .collect::<Result<_>>()?;
    let (j, mut best) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 || v.is_nan() { (i, v) } else { acc });
    let mut at = Complex64::from_polar(r, step * j as f64);
    if !best.is_finite() {
        return Ok((best, at));
    }
    let g = |t: f64| f(Complex64::from_polar(r, t));
    let (mut a, mut b) = (step * (j as f64 - 1.0), step * (j as f64 + 1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut g1, mut g2) = (g(x1)?, g(x2)?);
    for _ in 0..60 {
        if g1 > g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2)?;
        }
    }
    for (t, v) in [(x1, g1), (x2, g2)] {
        if v > best {
            best = v;
            at = Complex64::from_polar(r, t);
        }
    }
    Ok((best, at))
}

pub fn radial_profile<F>(f: F, radii: &[f64], n: usize) -> Result<Vec<ProfilePoint>>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    radii
        .iter()
        .map(|&r| circle_sup(&f, r, n).map(|(value, at)| ProfilePoint { r, value, at }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupReport {
    pub sup: f64,
    pub argmax: Complex64,
    pub profile: Vec<ProfilePoint>,
}

/// Grid supremum of `f` with its argmax and the radial profile.
pub fn grid_sup<F>(grid: &SampleGrid, f: F) -> Result<SupReport>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let vals: Vec<(f64, Complex64)> = grid
        .nodes
        .par_iter()
        .map(|n| f(n.z).map(|v| (v, n.z)))
        .collect::<Result<_>>()?;
    let (sup, argmax) = vals
        .into_iter()
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |acc, v| if v.0 > acc.0 || v.0.is_nan() { v } else { acc });
    let profile = radial_profile(&f, &PROFILE_RADII, PROFILE_SAMPLES)?;
    Ok(SupReport { sup, argmax, profile })
}
