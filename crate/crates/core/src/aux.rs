//! The auxiliary field `u = log(|f1|^2 + |f2|^2) - log|W|` of a solution basis
//! and the identities it satisfies.

use crate::error::{Error, Result};
use crate::geometry::{mobius, SampleGrid};
use crate::jet::Jet;
use crate::ode::SolutionBasis;
use crate::profile::{grid_sup, SupReport};
use crate::provider::JetProvider;
use crate::quad;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_FD_STEP: f64 = 1e-3;
pub const POLYLINE_KNOTS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AuxFieldSample {
    pub z: Complex64,
    pub u: f64,
    /// `du/dz`.
    pub du: Complex64,
    pub grad_norm: f64,
    pub lap: f64,
    pub d2u: Complex64,
    /// `(f1/f2)^#`, pole free.
    pub quotient_spherical: f64,
}

/// `|f1|^2 + |f2|^2` at `z`.
pub fn basis_mass(basis: &SolutionBasis, z: Complex64) -> Result<f64> {
    let a = basis.f1.eval(z)?;
    let b = basis.f2.eval(z)?;
    Ok(a.norm_sqr() + b.norm_sqr())
}

pub fn eval_aux(basis: &SolutionBasis, z: Complex64) -> Result<AuxFieldSample> {
    let j1 = basis.f1.jet(z, 2)?;
    let j2 = basis.f2.jet(z, 2)?;
    let (a, b) = (j1.value(), j2.value());
    let s = a.norm_sqr() + b.norm_sqr();
    let w = basis.wronskian.norm();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonFinite("|f1|^2 + |f2|^2"));
    }
    let du = (j1.derivative(1) * a.conj() + j2.derivative(1) * b.conj()) / s;
    let d2u = (j1.derivative(2) * a.conj() + j2.derivative(2) * b.conj()) / s - du * du;
    Ok(AuxFieldSample {
        z,
        u: s.ln() - w.ln(),
        du,
        grad_norm: 2.0 * du.norm(),
        lap: 4.0 * w * w / (s * s),
        d2u,
        quotient_spherical: w / s,
    })
}

fn stencil(z: Complex64, h: f64) -> [Complex64; 4] {
    [
        z + Complex64::new(h, 0.0),
        z - Complex64::new(h, 0.0),
        z + Complex64::new(0.0, h),
        z - Complex64::new(0.0, h),
    ]
}

/// Five-point Laplacians of `log m` and of `m / m(z)` where `m = |f1|^2 + |f2|^2`,
/// from ratios to the centre value so that large `|u|` costs no accuracy.
fn fd_laplacians(basis: &SolutionBasis, z: Complex64, h: f64) -> Result<(f64, f64)> {
    let m0 = basis_mass(basis, z)?;
    let mut lap_log = 0.0;
    let mut lap_rel = 0.0;
    for w in stencil(z, h) {
        let q = basis_mass(basis, w)? / m0;
        lap_log += q.ln();
        lap_rel += q - 1.0;
    }
    Ok((lap_log / (h * h), lap_rel / (h * h)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `|Lap u - 4 e^{-2u}|`.
    pub r1: f64,
    /// `|Lap u + |grad u|^2 - e^{-u} Lap e^u|`.
    pub r2: f64,
    /// `|A + d2u + du^2|`.
    pub r3: f64,
}

fn check_interior(z: Complex64, h: f64) -> Result<()> {
    if z.norm() + 4.0 * h >= 1.0 {
        return Err(Error::param("fd_step", h, "stencil reaches too close to the boundary"));
    }
    Ok(())
}

fn residuals_from(basis: &SolutionBasis, a: &dyn JetProvider, z: Complex64, lap_log: f64, lap_rel: f64) -> Result<IdentityResiduals> {
    let s = eval_aux(basis, z)?;
    let av = a.eval(z)?;
    Ok(IdentityResiduals {
        r1: (lap_log - 4.0 * (-2.0 * s.u).exp()).abs(),
        r2: (lap_log + s.grad_norm * s.grad_norm - lap_rel).abs(),
        r3: (av + s.d2u + s.du * s.du).norm(),
    })
}

/// Residuals of the three identities with a plain five-point stencil.
pub fn identity_residuals(basis: &SolutionBasis, a: &dyn JetProvider, z: Complex64, fd_step: f64) -> Result<IdentityResiduals> {
    check_interior(z, fd_step)?;
    let (l, e) = fd_laplacians(basis, z, fd_step)?;
    residuals_from(basis, a, z, l, e)
}

/// As `identity_residuals`, with Laplacians extrapolated from steps `h` and `h/2`.
pub fn identity_residuals_richardson(basis: &SolutionBasis, a: &dyn JetProvider, z: Complex64, fd_step: f64) -> Result<IdentityResiduals> {
    check_interior(z, fd_step)?;
    let (l1, e1) = fd_laplacians(basis, z, fd_step)?;
    let (l2, e2) = fd_laplacians(basis, z, 0.5 * fd_step)?;
    residuals_from(basis, a, z, (4.0 * l2 - l1) / 3.0, (4.0 * e2 - e1) / 3.0)
}

/// `|Lap(-u) + 4 e^{-2u}|` with the five-point stencil.
pub fn liouville_residual(basis: &SolutionBasis, z: Complex64, fd_step: f64) -> Result<f64> {
    check_interior(z, fd_step)?;
    let (l, _) = fd_laplacians(basis, z, fd_step)?;
    let u = eval_aux(basis, z)?.u;
    Ok((-l + 4.0 * (-2.0 * u).exp()).abs())
}

fn schwarzian_of_jet(j: &Jet) -> Result<Complex64> {
    let d1 = j.derivative(1);
    if d1.norm() < 1e-14 {
        return Err(Error::near_zero("w'", Complex64::new(f64::NAN, f64::NAN), d1.norm()));
    }
    let r2 = j.derivative(2) / d1;
    let r3 = j.derivative(3) / d1;
    Ok(r3 - 1.5 * r2 * r2)
}

/// `w''' / w' - (3/2) (w'' / w')^2`.
pub fn schwarzian(w: &dyn JetProvider, z: Complex64) -> Result<Complex64> {
    let j = w.jet(z, 3)?;
    schwarzian_of_jet(&j).map_err(|e| match e {
        Error::NearZero { quantity, modulus, .. } => Error::near_zero(quantity, z, modulus),
        e => e,
    })
}

/// Schwarzian of `f1/f2`, computed from whichever of `f1/f2`, `f2/f1` has the larger
/// denominator (the two have the same Schwarzian).
pub fn basis_schwarzian(basis: &SolutionBasis, z: Complex64) -> Result<Complex64> {
    let j1 = basis.f1.jet(z, 3)?;
    let j2 = basis.f2.jet(z, 3)?;
    let w = if j2.value().norm() >= j1.value().norm() { j1 / j2 } else { j2 / j1 };
    schwarzian_of_jet(&w).map_err(|e| match e {
        Error::NearZero { quantity, modulus, .. } => Error::near_zero(quantity, z, modulus),
        e => e,
    })
}

/// `((E'/E)^2 - (W/E)^2 - 2 E''/E) / 4`.
pub fn bank_laine(e: &dyn JetProvider, w: Complex64, z: Complex64) -> Result<Complex64> {
    let j = e.jet(z, 2)?;
    let ev = j.value();
    if ev.norm() < 1e-14 {
        return Err(Error::near_zero("E", z, ev.norm()));
    }
    let l = j.derivative(1) / ev;
    let q = w / ev;
    Ok((l * l - q * q - 2.0 * j.derivative(2) / ev) / 4.0)
}

/// `|w'| / (1 + |w|^2)` from a jet of order at least one.
pub fn spherical_derivative(w: &Jet) -> f64 {
    w.derivative(1).norm() / (1.0 + w.value().norm_sqr())
}

/// Grid supremum of `w^#(z) (1 - |z|^2)` with the radial profile.
pub fn normality_sup(w: &dyn JetProvider, grid: &SampleGrid) -> Result<SupReport> {
    grid_sup(grid, |z| Ok(spherical_derivative(&w.jet(z, 1)?) * (1.0 - z.norm_sqr())))
}

/// `normality_sup` for `f1/f2` of a basis, via `|W| / (|f1|^2 + |f2|^2)`.
pub fn basis_normality_sup(basis: &SolutionBasis, grid: &SampleGrid) -> Result<SupReport> {
    let w = basis.wronskian.norm();
    grid_sup(grid, |z| Ok(w / basis_mass(basis, z)? * (1.0 - z.norm_sqr())))
}

/// Grid supremum of `|grad u(z)| omega(|z|)` with the radial profile.
pub fn grad_sup(basis: &SolutionBasis, grid: &SampleGrid, omega: &(dyn Fn(f64) -> f64 + Sync)) -> Result<SupReport> {
    grid_sup(grid, |z| Ok(eval_aux(basis, z)?.grad_norm * omega(z.norm())))
}

/// `integral |dz| / (1 - |z|^2)` along the hyperbolic segment from `z1` to `z2`,
/// polylined with `knots` pieces, 64-point Gauss on each.
pub fn hyperbolic_weight_distance(z1: Complex64, z2: Complex64, knots: usize) -> Result<f64> {
    let t_end = mobius(z1, z2);
    let gamma = |t: f64| mobius(z1, t_end * t);
    let mut total = 0.0;
    let mut prev = gamma(0.0);
    for k in 1..=knots.max(1) {
        let next = gamma(k as f64 / knots.max(1) as f64);
        let d = next - prev;
        let len = d.norm();
        if len > 0.0 {
            let a = prev;
            total += len * quad::fixed(&|s: f64| Ok(Complex64::new(1.0 / (1.0 - (a + d * s).norm_sqr()), 0.0)), 0.0, 1.0, 64)?.re;
        }
        prev = next;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub distance: f64,
    /// Smaller of the two log-gaps; negative when a bound fails.
    pub margin: f64,
    pub pass: bool,
}

/// `exp(-L d) <= m(z1)/m(z2) <= exp(L d)` with `m = |f1|^2 + |f2|^2` and `d` the
/// `1/(1-|z|^2)`-weighted length of the hyperbolic segment.
pub fn smoothness_check(basis: &SolutionBasis, z1: Complex64, z2: Complex64, lambda: f64) -> Result<SmoothnessReport> {
    smoothness_check_with(basis, z1, z2, lambda, POLYLINE_KNOTS)
}

pub fn smoothness_check_with(basis: &SolutionBasis, z1: Complex64, z2: Complex64, lambda: f64, knots: usize) -> Result<SmoothnessReport> {
    let ratio = basis_mass(basis, z1)? / basis_mass(basis, z2)?;
    let distance = hyperbolic_weight_distance(z1, z2, knots)?;
    let ld = lambda * distance;
    let lr = ratio.ln();
    let margin = (lr + ld).min(ld - lr);
    Ok(SmoothnessReport {
        ratio,
        lower: (-ld).exp(),
        upper: ld.exp(),
        distance,
        margin,
        pass: margin >= -1e-12 * (1.0 + ld),
    })
}

pub const FIELD_COLUMNS: &str = "z_re\tz_im\tu\tdu_re\tdu_im\tgrad_norm\tlap\tsph";

/// Tab-separated field dump, one row per point.
pub fn field_table(basis: &SolutionBasis, points: &[Complex64]) -> Result<String> {
    let rows: Vec<AuxFieldSample> = points.par_iter().map(|&z| eval_aux(basis, z)).collect::<Result<_>>()?;
    let mut out = String::from(FIELD_COLUMNS);
    out.push('\n');
    for s in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            s.z.re, s.z.im, s.u, s.du.re, s.du.im, s.grad_norm, s.lap, s.quotient_spherical
        ));
    }
    Ok(out)
}
