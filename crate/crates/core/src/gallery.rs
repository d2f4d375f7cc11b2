//! Explicit coefficient/solution pairs with their claimed properties.

use crate::error::{Error, Result};
use crate::geometry::SampleGrid;
use crate::jet::Jet;
use crate::ode::{residual, SecondSolution, SolutionBasis};
use crate::profile::{self, radial_profile, ProfilePoint, VerdictRule, PROFILE_RADII, PROFILE_SAMPLES};
use crate::provider::{ClosedForm, Provider};
use crate::report::{AuditRow, Report};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub const ENTRY_NAMES: [&str; 5] = ["thm1_i", "thm1_ii", "legendre", "log_univalent", "exp_singular"];

pub const DEFAULT_P: f64 = 0.25;

const I: Complex64 = Complex64::new(0.0, 1.0);

type Bound = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    F1,
    F2,
}

#[derive(Clone)]
pub enum ClaimKind {
    /// `lower(|z|) <= |f1(z)| <= upper(|z|)` at every grid node.
    Envelope { lower: Bound, upper: Bound },
    /// `|f(z)| <= bound` at every grid node.
    Bounded { which: Which, bound: f64 },
    /// `|f'' + A f| / (1 + |f|)` small on the grid.
    Residual { which: Which },
    /// `f1 f2' - f1' f2` equals the stored constant.
    Wronskian,
    /// `sup_{|z|=r} |A| (1-|z|^2)^alpha` grows strictly across the profile radii.
    Divergence { alpha: f64 },
    /// The same profile stabilizes.
    Membership { alpha: f64 },
    /// Observed `sup |f2| (1-|z|^2)^p` out to `r = 0.999`, reported.
    SecondSolutionGrowth { p: f64 },
}

#[derive(Clone)]
pub struct Claim {
    pub name: String,
    pub statement: String,
    pub domain: String,
    pub kind: ClaimKind,
}

impl std::fmt::Debug for Claim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Claim({}: {} on {})", self.name, self.statement, self.domain)
    }
}

fn claim(name: &str, statement: &str, domain: &str, kind: ClaimKind) -> Claim {
    Claim {
        name: name.into(),
        statement: statement.into(),
        domain: domain.into(),
        kind,
    }
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub a: Provider,
    pub f1: Provider,
    pub f2: Option<Provider>,
    pub wronskian: Option<Complex64>,
    pub claims: Vec<Claim>,
    /// Branch choices made by the formulas.
    pub notes: Vec<String>,
}

impl GalleryEntry {
    /// The closed-form basis when there is one, otherwise `f1` with the
    /// reduction-of-order solution based at the origin (normalized to `W = 1`).
    pub fn basis(&self) -> Result<SolutionBasis> {
        match (&self.f2, self.wronskian) {
            (Some(f2), Some(w)) => SolutionBasis::new(self.f1.clone(), f2.clone(), w),
            _ => {
                let f2: Provider = SecondSolution::new(self.f1.clone(), Complex64::new(0.0, 0.0), vec![])?;
                SolutionBasis::new(self.f1.clone(), f2, Complex64::new(1.0, 0.0))
            }
        }
    }
}

fn take_p(name: &str, params: &BTreeMap<String, f64>) -> Result<f64> {
    for k in params.keys() {
        if k != "p" {
            return Err(Error::Unknown {
                kind: "parameter",
                name: format!("{name}.{k}"),
            });
        }
    }
    let p = params.get("p").copied().unwrap_or(DEFAULT_P);
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::param("p", p, "must lie in (0, 1/2)"));
    }
    Ok(p)
}

fn no_params(name: &str, params: &BTreeMap<String, f64>) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(Error::Unknown {
            kind: "parameter",
            name: format!("{name}.{k}"),
        }),
        None => Ok(()),
    }
}

fn residual_claims(two: bool) -> Vec<Claim> {
    let mut v = vec![claim("residual_f1", "f1'' + A f1 = 0", "grid", ClaimKind::Residual { which: Which::F1 })];
    if two {
        v.push(claim("residual_f2", "f2'' + A f2 = 0", "grid", ClaimKind::Residual { which: Which::F2 }));
        v.push(claim("wronskian", "f1 f2' - f1' f2 = W", "grid", ClaimKind::Wronskian));
    }
    v
}

pub fn get_entry(name: &str, params: &BTreeMap<String, f64>) -> Result<GalleryEntry> {
    let mut parameters = BTreeMap::new();
    let one = Complex64::new(1.0, 0.0);
    let entry = match name {
        "thm1_i" => {
            let p = take_p(name, params)?;
            parameters.insert("p".into(), p);
            let log_arg = move |z: Jet| (1.0 - z).recip().scale(2.0 * I).ln();
            let f1 = ClosedForm::new(format!("thm1_i(p={p})"), move |z| {
                let l = log_arg(z);
                (l * l * (I * p / (2.0 * PI))).exp()
            });
            let a = ClosedForm::new(format!("A_thm1_i(p={p})"), move |z| {
                let l = log_arg(z);
                let w = 1.0 - z;
                (l * l * p - l * (I * PI) - I * PI) * p / (w * w * (PI * PI))
            });
            let mut claims = vec![claim(
                "envelope",
                "2^-p (1-|z|)^p <= |f1| <= 1",
                "grid",
                ClaimKind::Envelope {
                    lower: Arc::new(move |r| 2f64.powf(-p) * (1.0 - r).powf(p)),
                    upper: Arc::new(|_| 1.0),
                },
            )];
            claims.extend(residual_claims(false));
            claims.push(claim(
                "coefficient_not_h2",
                "A not in H-infinity_2",
                "profile radii",
                ClaimKind::Divergence { alpha: 2.0 },
            ));
            GalleryEntry {
                name: name.into(),
                parameters,
                a,
                f1,
                f2: None,
                wronskian: None,
                claims,
                notes: vec!["principal log of 2i/(1-z); the argument stays in Im > 1, away from the cut".into()],
            }
        }
        "thm1_ii" => {
            let p = take_p(name, params)?;
            parameters.insert("p".into(), p);
            let log_arg = |z: Jet| ((1.0 + z) / (1.0 - z)).ln();
            let f1 = ClosedForm::new(format!("thm1_ii(p={p})"), move |z| {
                let l = log_arg(z);
                (l * l * (I * p / PI)).exp()
            });
            let a = ClosedForm::new(format!("A_thm1_ii(p={p})"), move |z| {
                let l = log_arg(z);
                let w = 1.0 - z * z;
                (l * l * (2.0 * p) - z * l * (I * PI) - I * PI) * (8.0 * p) / (w * w * (PI * PI))
            });
            let mut claims = vec![claim(
                "envelope",
                "((1-|z|)/(1+|z|))^p <= |f1| <= ((1+|z|)/(1-|z|))^p",
                "grid",
                ClaimKind::Envelope {
                    lower: Arc::new(move |r| ((1.0 - r) / (1.0 + r)).powf(p)),
                    upper: Arc::new(move |r| ((1.0 + r) / (1.0 - r)).powf(p)),
                },
            )];
            claims.extend(residual_claims(false));
            claims.push(claim(
                "coefficient_not_h2",
                "A not in H-infinity_2",
                "profile radii",
                ClaimKind::Divergence { alpha: 2.0 },
            ));
            claims.push(claim(
                "second_solution_growth",
                "observed sup |f2| (1-|z|^2)^p",
                "|z| <= 0.999",
                ClaimKind::SecondSolutionGrowth { p },
            ));
            GalleryEntry {
                name: name.into(),
                parameters,
                a,
                f1,
                f2: None,
                wronskian: None,
                claims,
                notes: vec!["principal log of (1+z)/(1-z); the argument has positive real part".into()],
            }
        }
        "legendre" => {
            no_params(name, params)?;
            let f1 = ClosedForm::new("legendre_f1", |z| (1.0 - z * z).sqrt());
            let f2 = ClosedForm::new("legendre_f2", |z| (1.0 - z * z).sqrt() * ((1.0 + z) / (1.0 - z)).ln());
            let a = ClosedForm::new("A_legendre", |z| {
                let w = 1.0 - z * z;
                (w * w).recip()
            });
            let mut claims = residual_claims(true);
            claims.push(claim(
                "coefficient_in_h2",
                "A in H-infinity_2",
                "profile radii",
                ClaimKind::Membership { alpha: 2.0 },
            ));
            GalleryEntry {
                name: name.into(),
                parameters,
                a,
                f1,
                f2: Some(f2),
                wronskian: Some(2.0 * one),
                claims,
                notes: vec!["principal square root of 1-z^2 and log of (1+z)/(1-z); both arguments have positive real part".into()],
            }
        }
        "log_univalent" => {
            no_params(name, params)?;
            // i (1-z)^{1/2} and -i (1-z)^{1/2} log(1-z): quotient h = -log(1-z), W = 1.
            let f2 = ClosedForm::new("log_univalent_f2", |z| (1.0 - z).sqrt() * I);
            let f1 = ClosedForm::new("log_univalent_f1", |z| (1.0 - z).sqrt() * (1.0 - z).ln() * (-I));
            let a = ClosedForm::new("A_log_univalent", |z| {
                let w = 1.0 - z;
                (w * w * 4.0).recip()
            });
            let mut claims = residual_claims(true);
            claims.push(claim(
                "coefficient_in_h2",
                "A in H-infinity_2",
                "profile radii",
                ClaimKind::Membership { alpha: 2.0 },
            ));
            GalleryEntry {
                name: name.into(),
                parameters,
                a,
                f1,
                f2: Some(f2),
                wronskian: Some(one),
                claims,
                notes: vec!["principal branches of (1-z)^{1/2} and log(1-z); 1-z has positive real part".into()],
            }
        }
        "exp_singular" => {
            no_params(name, params)?;
            let f1 = ClosedForm::new("exp_singular", |z| (-(1.0 + z) / (1.0 - z)).exp());
            let a = ClosedForm::new("A_exp_singular", |z| {
                let w = 1.0 - z;
                -4.0 * z / (w * w * w * w)
            });
            let mut claims = residual_claims(false);
            claims.push(claim(
                "bounded",
                "|f1| <= 1",
                "grid",
                ClaimKind::Bounded {
                    which: Which::F1,
                    bound: 1.0,
                },
            ));
            claims.push(claim(
                "coefficient_not_h2",
                "A not in H-infinity_2",
                "profile radii",
                ClaimKind::Divergence { alpha: 2.0 },
            ));
            GalleryEntry {
                name: name.into(),
                parameters,
                a,
                f1,
                f2: None,
                wronskian: None,
                claims,
                notes: vec![],
            }
        }
        other => {
            return Err(Error::Unknown {
                kind: "gallery entry",
                name: other.into(),
            })
        }
    };
    Ok(entry)
}

pub fn entry(name: &str) -> Result<GalleryEntry> {
    get_entry(name, &BTreeMap::new())
}

/// `sup_{|z|=r} |A(z)| (1-|z|^2)^alpha` at the profile radii.
pub fn coefficient_profile(a: &Provider, alpha: f64) -> Result<Vec<ProfilePoint>> {
    radial_profile(
        |z| Ok(a.eval(z)?.norm() * (1.0 - z.norm_sqr()).powf(alpha)),
        &PROFILE_RADII,
        PROFILE_SAMPLES,
    )
}

/// Residual tolerance for `f'' + A f = 0` unless the caller supplies one.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Relative slack allowed in modulus envelopes.
pub const ENVELOPE_SLACK: f64 = 1e-12;

fn max_over<F>(points: &[Complex64], f: F) -> Result<(f64, Complex64)>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = points.par_iter().map(|&z| f(z)).collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
    for (v, z) in vals.into_iter().zip(points) {
        if v > best.0 || v.is_nan() {
            best = (v, *z);
        }
    }
    Ok(best)
}

fn check_claim(entry: &GalleryEntry, claim: &Claim, grid: &SampleGrid, tol: f64, basis: &dyn Fn() -> Result<SolutionBasis>) -> Result<AuditRow> {
    let key = format!("{}/{}", entry.name, claim.name);
    let text = format!("{} ({})", claim.statement, claim.domain);
    let points = grid.points();
    let pick = |w: Which| -> Result<Provider> {
        match w {
            Which::F1 => Ok(entry.f1.clone()),
            Which::F2 => match &entry.f2 {
                Some(f) => Ok(f.clone()),
                None => Ok(basis()?.f2),
            },
        }
    };
    let rule = VerdictRule::default();
    Ok(match &claim.kind {
        ClaimKind::Envelope { lower, upper } => {
            let f1 = &entry.f1;
            let (v, at) = max_over(&points, |z| {
                let m = f1.eval(z)?.norm();
                let r = z.norm();
                let (lo, hi) = (lower(r), upper(r));
                Ok(((lo - m) / lo).max((m - hi) / hi))
            })?;
            AuditRow::at_most(key, "worst relative envelope violation", v, ENVELOPE_SLACK, text).with_detail(at)
        }
        ClaimKind::Bounded { which, bound } => {
            let f = pick(*which)?;
            let (v, at) = max_over(&points, |z| Ok(f.eval(z)?.norm()))?;
            AuditRow::at_most(key, "max modulus", v, *bound * (1.0 + ENVELOPE_SLACK), text).with_detail(at)
        }
        ClaimKind::Residual { which } => {
            let f = pick(*which)?;
            let rep = residual(entry.a.as_ref(), f.as_ref(), grid)?;
            AuditRow::at_most(key, "max |f''+Af|/(1+|f|)", rep.max, tol, text).with_detail(rep)
        }
        ClaimKind::Wronskian => {
            let b = basis()?;
            let dev = b.audit_wronskian(&points)? * b.wronskian.norm();
            AuditRow::at_most(key, "max |W(z) - W|", dev, tol, text)
        }
        ClaimKind::Divergence { alpha } => {
            let prof = coefficient_profile(&entry.a, *alpha)?;
            let g = profile::growth(&prof);
            AuditRow::at_least(key, "profile growth 0.9 -> 0.999", g, rule.growth_factor, text)
                .require(profile::strictly_increasing(&prof))
                .with_detail(prof)
        }
        ClaimKind::Membership { alpha } => {
            let prof = coefficient_profile(&entry.a, *alpha)?;
            let s = profile::spread(&prof);
            AuditRow::at_most(key, "profile spread", s, rule.stabilize_spread, text).with_detail(prof)
        }
        ClaimKind::SecondSolutionGrowth { p } => {
            let f2 = pick(Which::F2)?;
            let prof = radial_profile(
                |z| Ok(f2.eval(z)?.norm() * (1.0 - z.norm_sqr()).powf(*p)),
                &PROFILE_RADII,
                256,
            )?;
            let sup = prof.iter().map(|q| q.value).fold(0.0, f64::max);
            AuditRow::report(key, "observed sup |f2|(1-|z|^2)^p", sup, text).with_detail(prof)
        }
    })
}

/// Evaluates every claim of the entry; numerical failures become failing rows.
pub fn verify_entry(entry: &GalleryEntry, grid: &SampleGrid, tol: f64) -> Report {
    let cache: std::sync::OnceLock<Result<SolutionBasis>> = std::sync::OnceLock::new();
    let basis = || cache.get_or_init(|| entry.basis()).clone();
    let mut report = Report::new();
    for c in &entry.claims {
        let row = check_claim(entry, c, grid, tol, &basis).unwrap_or_else(|e| {
            AuditRow::failure(format!("{}/{}", entry.name, c.name), c.statement.clone(), e.to_string())
        });
        report.push(row);
    }
    report.sorted()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_grid, Spacing};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coefficient_values_at_origin() {
        assert_abs_diff_eq!(entry("legendre").unwrap().a.eval(c(0.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entry("log_univalent").unwrap().a.eval(c(0.0, 0.0)).unwrap().re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(entry("exp_singular").unwrap().a.eval(c(0.0, 0.0)).unwrap().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn parameter_checks() {
        let mut p = BTreeMap::new();
        p.insert("p".to_string(), 0.5);
        assert!(get_entry("thm1_i", &p).is_err());
        p.insert("p".to_string(), 0.1);
        assert!(get_entry("thm1_ii", &p).is_ok());
        assert!(get_entry("legendre", &p).is_err());
        assert!(matches!(entry("nope"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn log_univalent_basis_is_normalized() {
        let e = entry("log_univalent").unwrap();
        let b = e.basis().unwrap();
        for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, -0.7)] {
            assert!((b.wronskian_at(z).unwrap() - 1.0).norm() < 1e-13);
            let h = -(1.0 - z).ln();
            assert!((b.quotient().eval(z).unwrap() - h).norm() < 1e-13);
        }
    }

    #[test]
    fn thm1_coefficients_match_the_equation() {
        // A = -f1''/f1 recomputed from the jet of f1.
        for name in ["thm1_i", "thm1_ii", "exp_singular"] {
            let e = entry(name).unwrap();
            for z in [c(0.2, 0.3), c(-0.6, 0.1), c(0.85, -0.2)] {
                let j = e.f1.jet(z, 2).unwrap();
                let a = -j.derivative(2) / j.value();
                let got = e.a.eval(z).unwrap();
                assert!((a - got).norm() <= 1e-12 * (1.0 + got.norm()), "{name} at {z}");
            }
        }
    }

    #[test]
    fn verify_small_grid() {
        let grid = make_grid(8, 32, 0.9, Spacing::BoundaryRefined).unwrap();
        for name in ["legendre", "log_univalent", "exp_singular"] {
            let rep = verify_entry(&entry(name).unwrap(), &grid, RESIDUAL_TOL);
            for r in &rep.rows {
                assert!(r.pass, "{r:?}");
            }
        }
    }
}
