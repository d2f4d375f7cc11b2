//! Weighted suprema, Carleson constants of densities, the Ahlfors–Shimizu
//! characteristic and the area-integral balances built on it.

use crate::aux::{basis_mass, eval_aux};
use crate::error::{Error, Result};
use crate::geometry::{check_disjoint, circle_mean, make_grid, pseudo_hyperbolic, Exclusion, SampleGrid, Spacing};
use crate::ode::SolutionBasis;
use crate::profile::{circle_sup, grid_sup, ProfilePoint, SupReport, Verdict, VerdictRule, PROFILE_RADII, PROFILE_SAMPLES};
use crate::provider::JetProvider;
use crate::quad;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

type DensityFn = dyn Fn(Complex64) -> Result<f64> + Send + Sync;

/// `d mu = density dm`.
#[derive(Clone)]
pub struct DensityMeasure {
    pub density: Arc<DensityFn>,
    pub descriptor: String,
}

impl std::fmt::Debug for DensityMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DensityMeasure({})", self.descriptor)
    }
}

impl DensityMeasure {
    pub fn new(descriptor: impl Into<String>, density: impl Fn(Complex64) -> Result<f64> + Send + Sync + 'static) -> Self {
        DensityMeasure {
            density: Arc::new(density),
            descriptor: descriptor.into(),
        }
    }

    /// `|A|^2 (1-|z|^2)^3`.
    pub fn coefficient(a: Arc<dyn JetProvider>) -> Self {
        let name = format!("|A|^2(1-|z|^2)^3 [{}]", a.describe());
        Self::new(name, move |z| Ok(a.eval(z)?.norm_sqr() * (1.0 - z.norm_sqr()).powi(3)))
    }

    /// `(|f1'|^2 + |f2'|^2) (|f1|^2 + |f2|^2)^(eps-1) log(1/|z|)`.
    pub fn uchiyama(basis: &SolutionBasis, epsilon: f64) -> Self {
        let (f1, f2) = (basis.f1.clone(), basis.f2.clone());
        let name = format!("(|f1'|^2+|f2'|^2)(|f1|^2+|f2|^2)^({epsilon}-1) log(1/|z|)");
        Self::new(name, move |z| {
            let j1 = f1.jet(z, 1)?;
            let j2 = f2.jet(z, 1)?;
            let s = j1.value().norm_sqr() + j2.value().norm_sqr();
            let d = j1.derivative(1).norm_sqr() + j2.derivative(1).norm_sqr();
            Ok(d * s.powf(epsilon - 1.0) * (-z.norm().ln()))
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let v = (self.density)(z)?;
        if v < 0.0 || v.is_nan() {
            return Err(Error::Degenerate(format!("density {} is negative or undefined at {z}", self.descriptor)));
        }
        Ok(v)
    }
}

/// `sup |f(z)| (1-|z|^2)^alpha` over the grid, with the radial profile.
pub fn growth_norm(f: &dyn JetProvider, alpha: f64, grid: &SampleGrid) -> Result<SupReport> {
    if !(alpha >= 0.0) {
        return Err(Error::param("alpha", alpha, "must be nonnegative"));
    }
    grid_sup(grid, |z| Ok(f.eval(z)?.norm() * (1.0 - z.norm_sqr()).powf(alpha)))
}

fn nodes_outside<'g>(grid: &'g SampleGrid, exclusions: &[Exclusion]) -> Result<Vec<&'g crate::geometry::GridNode>> {
    check_disjoint(exclusions)?;
    let nodes: Vec<_> = grid
        .nodes
        .iter()
        .filter(|n| !exclusions.iter().any(|e| e.contains(n.z)))
        .collect();
    if nodes.is_empty() {
        return Err(Error::Degenerate("the exclusions cover every grid node".into()));
    }
    Ok(nodes)
}

/// Grid supremum of `|f| (1-|z|^2)^alpha` over nodes outside every exclusion disc.
pub fn growth_norm_outside(f: &dyn JetProvider, alpha: f64, grid: &SampleGrid, exclusions: &[Exclusion]) -> Result<(f64, Complex64)> {
    if !(alpha >= 0.0) {
        return Err(Error::param("alpha", alpha, "must be nonnegative"));
    }
    let nodes = nodes_outside(grid, exclusions)?;
    let vals: Vec<(f64, Complex64)> = nodes
        .par_iter()
        .map(|n| Ok((f.eval(n.z)?.norm() * (1.0 - n.z.norm_sqr()).powf(alpha), n.z)))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |a, v| if v.0 > a.0 { v } else { a }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinModulusReport {
    pub inf: f64,
    pub argmin: Complex64,
    /// `c = |W| / sqrt(M1^2 + M2^2)`, `Mk = sup |fk'| (1-|z|^2)` on the same nodes.
    pub floor_constant: f64,
    /// Nodes where `|f1| + |f2| < c (1-|z|^2)`.
    pub floor_violations: usize,
    /// Minimum of `(|f1|+|f2|) / (c (1-|z|^2))`.
    pub floor_ratio: f64,
    /// Minimum of `|f1|+|f2|` on the profile circles, outside the exclusions.
    pub profile: Vec<ProfilePoint>,
}

pub fn min_modulus_outside(basis: &SolutionBasis, grid: &SampleGrid, exclusions: &[Exclusion]) -> Result<MinModulusReport> {
    let nodes = nodes_outside(grid, exclusions)?;
    let vals: Vec<(Complex64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|n| {
            let j1 = basis.f1.jet(n.z, 1)?;
            let j2 = basis.f2.jet(n.z, 1)?;
            let w = 1.0 - n.z.norm_sqr();
            Ok((n.z, j1.value().norm() + j2.value().norm(), j1.derivative(1).norm() * w, j2.derivative(1).norm() * w))
        })
        .collect::<Result<_>>()?;
    let m1 = vals.iter().map(|v| v.2).fold(0.0, f64::max);
    let m2 = vals.iter().map(|v| v.3).fold(0.0, f64::max);
    let c = basis.wronskian.norm() / m1.hypot(m2);
    let (mut inf, mut argmin) = (f64::INFINITY, Complex64::new(0.0, 0.0));
    let mut violations = 0;
    let mut ratio = f64::INFINITY;
    for (z, m, _, _) in &vals {
        if *m < inf {
            inf = *m;
            argmin = *z;
        }
        let floor = c * (1.0 - z.norm_sqr());
        if *m < floor * (1.0 - 1e-12) {
            violations += 1;
        }
        ratio = ratio.min(m / floor);
    }
    let mut profile = vec![];
    for r in PROFILE_RADII {
        let (neg, at) = circle_sup(
            |z| {
                if exclusions.iter().any(|e| e.contains(z)) {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(-(basis.f1.eval(z)?.norm() + basis.f2.eval(z)?.norm()))
            },
            r,
            PROFILE_SAMPLES,
        )?;
        profile.push(ProfilePoint { r, value: -neg, at });
    }
    Ok(MinModulusReport {
        inf,
        argmin,
        floor_constant: c,
        floor_violations: violations,
        floor_ratio: ratio,
        profile,
    })
}

pub const CARLESON_BREAKS: [f64; 9] = [0.0, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonRule {
    pub radial_per_block: usize,
    pub angular: usize,
}

impl Default for CarlesonRule {
    fn default() -> Self {
        CarlesonRule {
            radial_per_block: 12,
            angular: 1024,
        }
    }
}

/// Integration grid whose radial edges contain every breakpoint below `r_max` and `r_max`.
pub fn carleson_grid(r_max: f64, rule: CarlesonRule) -> Result<SampleGrid> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::param("r_max", r_max, "must lie in (0, 1)"));
    }
    if rule.radial_per_block == 0 {
        return Err(Error::param("radial_per_block", 0.0, "must be positive"));
    }
    let mut breaks: Vec<f64> = CARLESON_BREAKS.iter().copied().filter(|&b| b < r_max).collect();
    breaks.push(r_max);
    let mut edges = vec![0.0];
    for w in breaks.windows(2) {
        for k in 1..=rule.radial_per_block {
            edges.push(if k == rule.radial_per_block {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * k as f64 / rule.radial_per_block as f64
            });
        }
    }
    SampleGrid::from_edges(edges, rule.angular, Spacing::BoundaryRefined)
}

/// Default test points: the origin and a boundary-refined grid out to 0.999.
pub fn default_a_grid() -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    pts.extend(make_grid(10, 64, 0.999, Spacing::BoundaryRefined).expect("fixed grid").points());
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub descriptor: String,
    /// Lower bound for the Möbius-kernel constant on `D(0, r_max)`.
    pub constant: f64,
    pub maximizing_a: Complex64,
    pub r_max: f64,
    /// Constant over the nested regions `D(0, r)`, `at` holding the maximizing `a`.
    pub profile: Vec<ProfilePoint>,
    pub verdict: Verdict,
}

/// `max_a int_{D(0,r_max)} (1-|a|^2)/|1-conj(a) z|^2 d mu` over the test points.
pub fn carleson_constant(mu: &DensityMeasure, a_grid: Option<&[Complex64]>, r_max: f64) -> Result<CarlesonReport> {
    carleson_constant_with(mu, a_grid, r_max, CarlesonRule::default())
}

pub fn carleson_constant_with(mu: &DensityMeasure, a_grid: Option<&[Complex64]>, r_max: f64, rule: CarlesonRule) -> Result<CarlesonReport> {
    let grid = carleson_grid(r_max, rule)?;
    let default;
    let a_pts: &[Complex64] = match a_grid {
        Some(a) => a,
        None => {
            default = default_a_grid();
            &default
        }
    };
    if a_pts.is_empty() {
        return Err(Error::Degenerate("empty test-point grid".into()));
    }
    for &a in a_pts {
        crate::provider::check_in_disc(a)?;
    }
    let mut radii: Vec<f64> = PROFILE_RADII.iter().copied().filter(|&r| r < r_max).collect();
    radii.push(r_max);
    // ring index after which each profile radius is complete
    let cut: Vec<usize> = radii
        .iter()
        .map(|&r| grid.edges.iter().position(|&e| e == r).expect("profile radius is an edge"))
        .collect();
    let mass: Vec<f64> = grid
        .nodes
        .par_iter()
        .map(|n| mu.eval(n.z).map(|d| d * n.weight))
        .collect::<Result<_>>()?;
    let per_a: Vec<Vec<f64>> = a_pts
        .par_iter()
        .map(|&a| {
            let s = 1.0 - a.norm_sqr();
            let mut sums = Vec::with_capacity(cut.len());
            let mut acc = 0.0;
            let mut k = 0;
            for (n, m) in grid.nodes.iter().zip(&mass) {
                while k < cut.len() && n.ring >= cut[k] {
                    sums.push(acc);
                    k += 1;
                }
                acc += s / (1.0 - a.conj() * n.z).norm_sqr() * m;
            }
            while sums.len() < cut.len() {
                sums.push(acc);
            }
            sums
        })
        .collect();
    let profile: Vec<ProfilePoint> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let (i, v) = per_a
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s[k] > acc.1 { (i, s[k]) } else { acc });
            ProfilePoint { r, value: v, at: a_pts[i] }
        })
        .collect();
    let last = *profile.last().expect("profile");
    let standard: Vec<ProfilePoint> = profile.iter().copied().filter(|p| PROFILE_RADII.contains(&p.r)).collect();
    let verdict = if standard.len() == PROFILE_RADII.len() {
        VerdictRule::default().classify(&standard)
    } else {
        Verdict::Inconclusive
    };
    Ok(CarlesonReport {
        descriptor: mu.descriptor.clone(),
        constant: last.value,
        maximizing_a: last.at,
        r_max,
        profile,
        verdict,
    })
}

/// Carleson report for the Uchiyama density of a bounded basis.
pub fn uchiyama_constant(basis: &SolutionBasis, epsilon: f64, a_grid: Option<&[Complex64]>, r_max: f64) -> Result<CarlesonReport> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be positive"));
    }
    let grid = make_grid(32, 128, r_max, Spacing::BoundaryRefined)?;
    for f in [&basis.f1, &basis.f2] {
        let sup = growth_norm(f.as_ref(), 0.0, &grid)?;
        if !sup.sup.is_finite() {
            return Err(Error::Degenerate("basis is not bounded on the grid".into()));
        }
    }
    carleson_constant(&DensityMeasure::uchiyama(basis, epsilon), a_grid, r_max)
}

/// Radial and angular resolution of log-kernel area integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogKernelRule {
    pub radial: usize,
    pub angular: usize,
}

impl Default for LogKernelRule {
    fn default() -> Self {
        LogKernelRule { radial: 256, angular: 256 }
    }
}

impl LogKernelRule {
    pub fn refined(self) -> Self {
        LogKernelRule {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
        }
    }
}

const INNER_PANELS: [(f64, f64); 5] = [(0.0, 1.0), (1.0, 3.0), (3.0, 7.0), (7.0, 15.0), (15.0, 40.0)];

/// `(1/pi) int_{D(0,r)} g(z) log(r/|z|) dm(z)`: midpoint rule in the radius (kernel
/// integrated exactly per cell) and the trapezoidal rule in the angle, with
/// `rho = rho_1 e^{-t}` on the innermost ring.
pub fn log_kernel_integral<F>(g: F, r: f64, rule: LogKernelRule) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param("r", r, "must lie in (0, 1)"));
    }
    if rule.radial == 0 || rule.angular == 0 {
        return Err(Error::param("radial", 0.0, "resolution must be positive"));
    }
    let h = r / rule.radial as f64;
    let mean = |rho: f64| circle_mean(&g, rho, rule.angular);
    let inner_kernel = |t: f64| -> Result<f64> {
        let rho = h * (-t).exp();
        Ok(2.0 * PI * rho * rho * ((r / h).ln() + t) * mean(rho)?)
    };
    let mut total = 0.0;
    for (a, b) in INNER_PANELS {
        total += quad::fixed(&|t: f64| inner_kernel(t).map(|v| Complex64::new(v, 0.0)), a, b, 32)?.re;
    }
    // exact weights int_a^b rho log(r/rho) d rho, circle means at cell midpoints
    let antideriv = |x: f64| 0.5 * x * x * (r / x).ln() + 0.25 * x * x;
    let rings: Vec<f64> = (1..rule.radial)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (h * k as f64, h * (k + 1) as f64);
            mean(0.5 * (a + b)).map(|m| 2.0 * PI * (antideriv(b) - antideriv(a)) * m)
        })
        .collect::<Result<_>>()?;
    total += rings.iter().sum::<f64>();
    Ok(total / PI)
}

/// `(1/pi) int_0^r (int_{D(0,t)} g dm) dt / t` by nested Gauss–Legendre.
pub fn log_kernel_integral_dual<F>(g: F, r: f64, panels: usize, angular: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param("r", r, "must lie in (0, 1)"));
    }
    let panels = panels.max(1);
    let nodes = quad::gauss_legendre(16);
    let ring = |rho: f64| -> Result<f64> { Ok(2.0 * PI * rho * circle_mean(&g, rho, angular)?) };
    let disc_mass = |t: f64| -> Result<f64> {
        let w = t / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let a = w * p as f64;
            for &(x, wt) in nodes {
                s += 0.5 * w * wt * ring(a + 0.5 * w * (x + 1.0))?;
            }
        }
        Ok(s)
    };
    let w = r / panels as f64;
    let outer: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| nodes.iter().map(move |&(x, wt)| (w * p as f64 + 0.5 * w * (x + 1.0), 0.5 * w * wt)))
        .collect();
    let vals: Vec<f64> = outer
        .par_iter()
        .map(|&(t, wt)| disc_mass(t).map(|n| wt * n / t))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / PI)
}

/// Source of a spherical derivative.
#[derive(Clone, Copy)]
pub enum Spherical<'a> {
    /// `|W| / (|f1|^2 + |f2|^2)` for the quotient `f1/f2`.
    Basis(&'a SolutionBasis),
    /// `|w'| / (1 + |w|^2)`.
    Map(&'a dyn JetProvider),
}

impl Spherical<'_> {
    pub fn value(&self, z: Complex64) -> Result<f64> {
        match self {
            Spherical::Basis(b) => Ok(b.wronskian.norm() / basis_mass(b, z)?),
            Spherical::Map(w) => Ok(crate::aux::spherical_derivative(&w.jet(z, 1)?)),
        }
    }
}

/// `T0(r) = (1/pi) int_{D(0,r)} (g^#)^2 log(r/|z|) dm`.
pub fn ahlfors_shimizu_t0(g: Spherical<'_>, r: f64, rule: LogKernelRule) -> Result<f64> {
    log_kernel_integral(|z| g.value(z).map(|v| v * v), r, rule)
}

/// The same characteristic through `(1/pi) int_0^r A(t) dt / t`.
pub fn ahlfors_shimizu_t0_dual(g: Spherical<'_>, r: f64) -> Result<f64> {
    log_kernel_integral_dual(|z| g.value(z).map(|v| v * v), r, 8, 256)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Balance {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// `circle_mean(u, r)` against `u(0) + 2 T0(r)`.
pub fn circle_mean_u_balance(basis: &SolutionBasis, r: f64, rule: LogKernelRule) -> Result<Balance> {
    let w = basis.wronskian.norm().ln();
    let lhs = circle_mean(|z| Ok(basis_mass(basis, z)?.ln() - w), r, rule.angular)?;
    let u0 = eval_aux(basis, Complex64::new(0.0, 0.0))?.u;
    let rhs = u0 + 2.0 * ahlfors_shimizu_t0(Spherical::Basis(basis), r, rule)?;
    Ok(Balance {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

pub const LITTLEWOOD_PALEY_RULE: LogKernelRule = LogKernelRule {
    radial: 4096,
    angular: 256,
};

/// `circle_mean(|f|^2, r_max)` against `|f(0)|^2 + (2/pi) int |f'|^2 log(r_max/|z|) dm`.
pub fn littlewood_paley_balance(f: &dyn JetProvider, r_max: f64, rule: LogKernelRule) -> Result<Balance> {
    let lhs = circle_mean(|z| Ok(f.eval(z)?.norm_sqr()), r_max, rule.angular)?;
    let f0 = f.eval(Complex64::new(0.0, 0.0))?.norm_sqr();
    let rhs = f0 + 2.0 * log_kernel_integral(|z| Ok(f.jet(z, 1)?.derivative(1).norm_sqr()), r_max, rule)?;
    Ok(Balance {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelReport {
    pub delta: f64,
    pub mass: f64,
    /// Mass inside `D(0, r)` for the profile radii below the grid radius and the grid radius.
    pub profile: Vec<(f64, f64)>,
}

/// `int dm / (1-|z|^2)` over grid cells where `|f1|^2 + |f2|^2 < delta`.
pub fn sublevel_mass(basis: &SolutionBasis, delta: f64, grid: &SampleGrid) -> Result<SublevelReport> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", delta, "must be positive"));
    }
    let vals: Vec<f64> = grid
        .nodes
        .par_iter()
        .map(|n| {
            let m = basis_mass(basis, n.z)?;
            Ok(if m < delta { n.weight / (1.0 - n.z.norm_sqr()) } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let mut radii: Vec<f64> = PROFILE_RADII.iter().copied().filter(|&r| r < grid.r_max()).collect();
    radii.push(grid.r_max());
    let profile = radii
        .iter()
        .map(|&r| {
            let m: f64 = grid
                .nodes
                .iter()
                .zip(&vals)
                .filter(|(n, _)| grid.edges[n.ring + 1] <= r)
                .map(|(_, v)| v)
                .sum();
            (r, m)
        })
        .collect();
    Ok(SublevelReport {
        delta,
        mass: vals.iter().sum(),
        profile,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    /// Empirical constant: max of the difference ratio over the pairs.
    pub constant: f64,
    pub worst_pair: (Complex64, Complex64),
    /// Grid estimate of the weighted norm used to scale the ratio.
    pub norm: f64,
}

/// `max | |f(z1)|(1-|z1|^2)^a - |f(z2)|(1-|z2|^2)^a | / (rho_p(z1, z2) ||f||)`.
pub fn lipschitz_audit(f: &dyn JetProvider, alpha: f64, pairs: &[(Complex64, Complex64)], grid: &SampleGrid) -> Result<LipschitzReport> {
    let norm = growth_norm(f, alpha, grid)?.sup;
    let weighted = |z: Complex64| -> Result<f64> { Ok(f.eval(z)?.norm() * (1.0 - z.norm_sqr()).powf(alpha)) };
    let mut rep = LipschitzReport {
        constant: 0.0,
        worst_pair: (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        norm,
    };
    for &(z1, z2) in pairs {
        let d = pseudo_hyperbolic(z1, z2);
        if d > 0.5 {
            return Err(Error::param("pair distance", d, "pairs must satisfy rho_p <= 1/2"));
        }
        if d == 0.0 {
            continue;
        }
        let ratio = if norm > 0.0 { (weighted(z1)? - weighted(z2)?).abs() / (d * norm) } else { 0.0 };
        if ratio > rep.constant {
            rep.constant = ratio;
            rep.worst_pair = (z1, z2);
        }
    }
    Ok(rep)
}

/// Pairs of radially and angularly adjacent grid nodes.
pub fn adjacent_pairs(grid: &SampleGrid) -> Vec<(Complex64, Complex64)> {
    let mut out = vec![];
    for (i, n) in grid.nodes.iter().enumerate() {
        for j in grid.neighbours(i) {
            if j > i {
                let m = &grid.nodes[j];
                if pseudo_hyperbolic(n.z, m.z) <= 0.5 {
                    out.push((n.z, m.z));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::entry;
    use crate::provider::{ClosedForm, Provider};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_z() -> SolutionBasis {
        SolutionBasis::new(ClosedForm::new("1", |z| z * 0.0 + 1.0), ClosedForm::new("z", |z| z), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn growth_norm_examples() {
        let grid = make_grid(64, 256, 0.999, Spacing::BoundaryRefined).unwrap();
        let one: Provider = ClosedForm::new("1", |z| z * 0.0 + 1.0);
        assert_abs_diff_eq!(growth_norm(one.as_ref(), 0.0, &grid).unwrap().sup, 1.0);
        let pole: Provider = ClosedForm::new("1/(1-z)", |z| (1.0 - z).recip());
        let rep = growth_norm(pole.as_ref(), 1.0, &grid).unwrap();
        assert!(rep.sup <= 2.0 && rep.sup > 1.99, "{}", rep.sup);
        assert!(rep.argmax.im.abs() < 1e-12 && rep.argmax.re > 0.99);
    }

    #[test]
    fn outside_sup_of_reciprocal_blaschke() {
        let grid = make_grid(32, 128, 0.9, Spacing::Uniform).unwrap();
        let b = crate::blaschke::FiniteBlaschke::new(&[c(0.5, 0.0)]).unwrap();
        let inv: Provider = crate::provider::Composite::new("1/B", move |z, k| Ok(b.eval_jet(z, k)?.recip()));
        let ex = [Exclusion::new(c(0.5, 0.0), 0.3).unwrap()];
        let (out, _) = growth_norm_outside(inv.as_ref(), 0.0, &grid, &ex).unwrap();
        assert!(out.is_finite() && out <= 1.0 / 0.3 + 1e-12);
        let full = growth_norm(inv.as_ref(), 0.0, &grid).unwrap().sup;
        assert!(full > out);
        let all = [Exclusion::new(c(0.0, 0.0), 0.95).unwrap()];
        assert!(growth_norm_outside(inv.as_ref(), 0.0, &grid, &all).is_err());
    }

    #[test]
    fn min_modulus_floor_holds() {
        let grid = make_grid(32, 128, 0.9, Spacing::Uniform).unwrap();
        let cs = SolutionBasis::new(ClosedForm::new("cos", |z| z.cos()), ClosedForm::new("sin", |z| z.sin()), c(1.0, 0.0)).unwrap();
        let rep = min_modulus_outside(&cs, &grid, &[]).unwrap();
        assert!(rep.inf > 0.5 && rep.floor_violations == 0 && rep.floor_ratio >= 1.0 - 1e-12);
        let leg = entry("legendre").unwrap().basis().unwrap();
        let rep = min_modulus_outside(&leg, &grid, &[]).unwrap();
        assert!(rep.profile.windows(2).all(|w| w[1].value < w[0].value), "{:?}", rep.profile);
        assert_eq!(rep.floor_violations, 0);
    }

    #[test]
    fn carleson_constant_of_normalized_indicator() {
        let mu = DensityMeasure::new("1_{D(0,1/2)} / area", |z| Ok(if z.norm() < 0.5 { 4.0 / PI } else { 0.0 }));
        let rep = carleson_constant(&mu, None, 0.9).unwrap();
        // The Poisson kernel averages to 1 - |a|^2 over centred discs; the max is 1 at a = 0.
        assert!((rep.constant - 1.0).abs() < 1e-2, "{}", rep.constant);
        let dense: Vec<Complex64> = make_grid(32, 128, 0.999, Spacing::Uniform).unwrap().points();
        let brute = carleson_constant(&mu, Some(&dense), 0.9).unwrap();
        assert!((brute.constant - rep.constant).abs() < 1e-2 * brute.constant);
        assert!(rep.profile.windows(2).all(|w| w[1].value >= w[0].value));
    }

    #[test]
    fn carleson_profile_of_thm1_grows() {
        let e = entry("thm1_i").unwrap();
        let rep = carleson_constant(&DensityMeasure::coefficient(e.a.clone()), None, 0.999).unwrap();
        assert_eq!(rep.profile.len(), 3);
        assert!(rep.profile.windows(2).all(|w| w[1].value > w[0].value));
    }

    #[test]
    fn t0_examples() {
        let flat: Provider = ClosedForm::new("3", |z| z * 0.0 + 3.0);
        assert_eq!(ahlfors_shimizu_t0(Spherical::Map(flat.as_ref()), 0.5, LogKernelRule::default()).unwrap(), 0.0);
        let id: Provider = ClosedForm::new("z", |z| z);
        let t = ahlfors_shimizu_t0(Spherical::Map(id.as_ref()), 0.5, LogKernelRule::default()).unwrap();
        let d = ahlfors_shimizu_t0_dual(Spherical::Map(id.as_ref()), 0.5).unwrap();
        assert!((t - d).abs() < 1e-6, "{t} {d}");
        // closed form: 2 T0(r) = log(1 + r^2) for w = z
        assert_abs_diff_eq!(d, 0.5 * 1.25f64.ln(), epsilon = 1e-12);
        let leg = entry("legendre").unwrap().basis().unwrap();
        let vals: Vec<f64> = [0.3, 0.6, 0.9]
            .iter()
            .map(|&r| ahlfors_shimizu_t0(Spherical::Basis(&leg), r, LogKernelRule::default()).unwrap())
            .collect();
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
    }

    #[test]
    fn balance_examples() {
        let leg = entry("legendre").unwrap().basis().unwrap();
        assert!(circle_mean_u_balance(&leg, 0.5, LogKernelRule::default()).unwrap().residual <= 1e-5);
        let b = circle_mean_u_balance(&one_z(), 0.7, LogKernelRule::default()).unwrap();
        assert!(b.residual <= 1e-6);
        assert_abs_diff_eq!(b.lhs, 1.49f64.ln(), epsilon = 1e-14);
        let tiny = circle_mean_u_balance(&leg, 1e-4, LogKernelRule::default()).unwrap();
        assert!(tiny.residual < 1e-8);
    }

    #[test]
    fn littlewood_paley_examples() {
        let id: Provider = ClosedForm::new("z", |z| z);
        let b = littlewood_paley_balance(id.as_ref(), 1.0 - 1e-9, LITTLEWOOD_PALEY_RULE).unwrap();
        assert!((b.lhs - 1.0).abs() < 1e-6 && (b.rhs - 1.0).abs() < 1e-6, "{b:?}");
        let k: Provider = ClosedForm::new("c", |z| z * 0.0 + c(0.3, 0.4));
        let b = littlewood_paley_balance(k.as_ref(), 0.9, LogKernelRule::default()).unwrap();
        assert_abs_diff_eq!(b.lhs, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b.rhs, 0.25, epsilon = 1e-15);
        let sq: Provider = ClosedForm::new("z^2", |z| z * z);
        assert!(littlewood_paley_balance(sq.as_ref(), 0.9, LITTLEWOOD_PALEY_RULE).unwrap().residual <= 1e-6);
    }

    #[test]
    fn sublevel_examples() {
        let grid = make_grid(64, 256, 0.99999, Spacing::BoundaryRefined).unwrap();
        let cs = SolutionBasis::new(ClosedForm::new("cos", |z| z.cos()), ClosedForm::new("sin", |z| z.sin()), c(1.0, 0.0)).unwrap();
        assert_eq!(sublevel_mass(&cs, 0.1, &grid).unwrap().mass, 0.0);
        let leg = entry("legendre").unwrap().basis().unwrap();
        let rep = sublevel_mass(&leg, 0.01, &grid).unwrap();
        // the set {|f1|^2 + |f2|^2 < 0.01} only starts beyond r = 0.9999, next to z = 1 and z = -1
        assert!(rep.mass > 0.0 && rep.mass.is_finite());
        assert!(rep.profile.windows(2).all(|w| w[1].1 >= w[0].1));
        assert_eq!(rep.profile[2].1, 0.0);
        let all = sublevel_mass(&cs, 1e300, &grid).unwrap();
        let total: f64 = grid.nodes.iter().map(|n| n.weight / (1.0 - n.z.norm_sqr())).sum();
        assert_abs_diff_eq!(all.mass, total, epsilon = 1e-9 * total);
    }

    #[test]
    fn lipschitz_examples() {
        let grid = make_grid(16, 64, 0.9, Spacing::Uniform).unwrap();
        let k: Provider = ClosedForm::new("c", |z| z * 0.0 + 2.0);
        let pairs = adjacent_pairs(&grid);
        assert_eq!(lipschitz_audit(k.as_ref(), 0.0, &pairs, &grid).unwrap().constant, 0.0);
        let id: Provider = ClosedForm::new("z", |z| z);
        let seg: Vec<(Complex64, Complex64)> = (0..20).map(|i| (c(0.025 * i as f64, 0.0), c(0.025 * (i + 1) as f64, 0.0))).collect();
        let rep = lipschitz_audit(id.as_ref(), 0.0, &seg, &grid).unwrap();
        assert!(rep.constant > 0.5 && rep.constant <= 1.5, "{rep:?}");
        assert!(lipschitz_audit(id.as_ref(), 0.0, &[(c(0.0, 0.0), c(0.9, 0.0))], &grid).is_err());
    }
}
