//! Sweeps that turn identities and balances into audit rows.

use crate::aux::{bank_laine, basis_mass, basis_schwarzian, identity_residuals, identity_residuals_richardson};
use crate::error::Result;
use crate::geometry::{circle_mean, make_grid, pseudo_hyperbolic, DiscPoint, Spacing};
use crate::measures::{circle_mean_u_balance, littlewood_paley_balance, LogKernelRule, LITTLEWOOD_PALEY_RULE};
use crate::ode::{find_zeros, propagate_basis, radial_family, OdeOptions, SolutionBasis};
use crate::provider::{JetProvider, Provider};
use crate::report::AuditRow;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

const ORIGIN: Complex64 = Complex64::new(0.0, 0.0);

/// Default number of interior sample points per sweep.
pub const SWEEP_POINTS: usize = 200;
/// Radius of the interior sample region.
pub const SWEEP_RADIUS: f64 = 0.8;
/// Pseudo-hyperbolic radius of the discs around zeros of `f1 f2` skipped by Bank-Laine.
pub const ZERO_DISC: f64 = 0.05;

/// `n` points spread evenly over `|z| <= r_max` (sunflower arrangement).
pub fn interior_points(n: usize, r_max: f64) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| Complex64::from_polar(r_max * ((k as f64 + 0.5) / n as f64).sqrt(), golden * k as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Worst {
    value: f64,
    at: Complex64,
}

fn worst<F>(points: &[Complex64], f: F) -> Result<Worst>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = points.par_iter().map(|&z| f(z)).collect::<Result<_>>()?;
    let mut w = Worst {
        value: f64::NEG_INFINITY,
        at: ORIGIN,
    };
    for (v, &z) in vals.into_iter().zip(points) {
        if v > w.value || v.is_nan() {
            w = Worst { value: v, at: z };
        }
    }
    Ok(w)
}

/// `max |W - 1|` over every sample of a basis integrated from the origin along `count`
/// radial segments to radius `r`.
pub fn wronskian_propagation(name: &str, a: Provider, count: usize, r: f64, opts: &OdeOptions, tol: f64) -> Result<AuditRow> {
    let paths = radial_family(count, r)?;
    let basis = propagate_basis(a, DiscPoint::new(ORIGIN)?, &paths, opts)?;
    let mut w = Worst {
        value: 0.0,
        at: ORIGIN,
    };
    let mut samples = 0;
    for t in &basis.traces {
        for s in &t.samples {
            samples += 1;
            let d = (s.wronskian() - 1.0).norm();
            if d > w.value || d.is_nan() {
                w = Worst { value: d, at: s.z };
            }
        }
    }
    Ok(AuditRow::at_most(
        format!("{name}/wronskian_propagation"),
        format!("max |W - 1| over {samples} samples on {count} radial paths to r = {r}"),
        w.value,
        tol,
        "W = f1 f2' - f1' f2 is constant",
    )
    .with_detail(w))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityTolerances {
    /// Richardson-extrapolated `r1`, `r2`.
    pub richardson: f64,
    /// `r3`, which needs no stencil.
    pub exact: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        IdentityTolerances {
            richardson: 1e-7,
            exact: 1e-9,
        }
    }
}

/// Plain-stencil `r1`, `r2` (reported), Richardson `r1`, `r2` and `r3` (checked).
pub fn identity_rows(name: &str, basis: &SolutionBasis, a: &dyn JetProvider, points: &[Complex64], fd_step: f64, tols: IdentityTolerances) -> Result<Vec<AuditRow>> {
    let plain: Vec<_> = points.par_iter().map(|&z| identity_residuals(basis, a, z, fd_step)).collect::<Result<_>>()?;
    let rich: Vec<_> = points
        .par_iter()
        .map(|&z| identity_residuals_richardson(basis, a, z, fd_step))
        .collect::<Result<_>>()?;
    let pick = |v: &[crate::aux::IdentityResiduals], f: fn(&crate::aux::IdentityResiduals) -> f64| -> Worst {
        v.iter().zip(points).fold(
            Worst {
                value: f64::NEG_INFINITY,
                at: ORIGIN,
            },
            |w, (r, &z)| if f(r) > w.value || f(r).is_nan() { Worst { value: f(r), at: z } } else { w },
        )
    };
    let n = points.len();
    let lap = "Lap u = 4 e^{-2u}";
    let ric = "Lap u + |grad u|^2 = e^{-u} Lap e^u";
    let a_id = "A = -d2u - (du)^2";
    let (p1, p2) = (pick(&plain, |r| r.r1), pick(&plain, |r| r.r2));
    let (q1, q2, q3) = (pick(&rich, |r| r.r1), pick(&rich, |r| r.r2), pick(&rich, |r| r.r3));
    Ok(vec![
        AuditRow::report(format!("{name}/r1_stencil"), format!("max r1, five-point stencil h = {fd_step}, {n} points"), p1.value, lap).with_detail(p1),
        AuditRow::report(format!("{name}/r2_stencil"), format!("max r2, five-point stencil h = {fd_step}, {n} points"), p2.value, ric).with_detail(p2),
        AuditRow::at_most(format!("{name}/r1"), format!("max r1, Richardson h = {fd_step}, {n} points"), q1.value, tols.richardson, lap).with_detail(q1),
        AuditRow::at_most(format!("{name}/r2"), format!("max r2, Richardson h = {fd_step}, {n} points"), q2.value, tols.richardson, ric).with_detail(q2),
        AuditRow::at_most(format!("{name}/r3"), format!("max r3, {n} points"), q3.value, tols.exact, a_id).with_detail(q3),
    ])
}

/// `max |S_{f1/f2} - 2A|`.
pub fn schwarzian_row(name: &str, basis: &SolutionBasis, a: &dyn JetProvider, points: &[Complex64], tol: f64) -> Result<AuditRow> {
    let w = worst(points, |z| Ok((basis_schwarzian(basis, z)? - 2.0 * a.eval(z)?).norm()))?;
    Ok(AuditRow::at_most(
        format!("{name}/schwarzian"),
        format!("max |S(f1/f2) - 2A|, {} points", points.len()),
        w.value,
        tol,
        "S(f1/f2) = 2A",
    )
    .with_detail(w))
}

/// Zeros of `f1 f2` in `|z| <= r_max`.
pub fn product_zeros(basis: &SolutionBasis, r_max: f64) -> Result<Vec<Complex64>> {
    let grid = make_grid(32, 128, r_max, Spacing::Uniform)?;
    Ok(find_zeros(basis.product().as_ref(), &grid, r_max).into_iter().map(|p| p.get()).collect())
}

/// `max |bank_laine(f1 f2) - A|` over the points outside the zero-discs of `f1 f2`.
pub fn bank_laine_row(name: &str, basis: &SolutionBasis, a: &dyn JetProvider, points: &[Complex64], tol: f64) -> Result<AuditRow> {
    let r = points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zeros = product_zeros(basis, (r + 0.05).min(0.99))?;
    let kept: Vec<Complex64> = points
        .iter()
        .copied()
        .filter(|&z| zeros.iter().all(|&c| pseudo_hyperbolic(z, c) >= ZERO_DISC))
        .collect();
    let e = basis.product();
    let w = worst(&kept, |z| Ok((bank_laine(e.as_ref(), basis.wronskian, z)? - a.eval(z)?).norm()))?;
    Ok(AuditRow::at_most(
        format!("{name}/bank_laine"),
        format!("max |BL(f1 f2) - A|, {} of {} points off zero-discs", kept.len(), points.len()),
        w.value.max(0.0),
        tol,
        "4A = (E'/E)^2 - (W/E)^2 - 2E''/E",
    )
    .with_detail(serde_json::json!({ "worst": w, "zeros": zeros })))
}

/// Circle means of `u` at `r = 0.1, ..., 0.9`; the row value is the largest drop.
pub fn subharmonic_row(name: &str, basis: &SolutionBasis, angular: usize, slack: f64) -> Result<AuditRow> {
    let w = basis.wronskian.norm().ln();
    let radii: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let means = radii
        .iter()
        .map(|&r| circle_mean(|z| Ok(basis_mass(basis, z)?.ln() - w), r, angular))
        .collect::<Result<Vec<f64>>>()?;
    let drop = means.windows(2).map(|p| p[0] - p[1]).fold(f64::NEG_INFINITY, f64::max);
    Ok(AuditRow::at_most(
        format!("{name}/subharmonic"),
        "largest decrease of circle_mean(u, r) over r = 0.1..0.9",
        drop,
        slack,
        "u is subharmonic",
    )
    .with_detail(serde_json::json!({ "radii": radii, "means": means })))
}

/// For each radius: the balance residual and its reduction under one refinement.
pub fn balance_rows(name: &str, basis: &SolutionBasis, radii: &[f64], rule: LogKernelRule, tol: f64, min_ratio: f64) -> Result<Vec<AuditRow>> {
    let mut rows = vec![];
    for &r in radii {
        let coarse = circle_mean_u_balance(basis, r, rule)?;
        let fine = circle_mean_u_balance(basis, r, rule.refined())?;
        let claim = "circle_mean(u, r) = u(0) + 2 T0(r)";
        rows.push(AuditRow::at_most(format!("{name}/balance_r{r}"), format!("|lhs - rhs| at r = {r}"), coarse.residual, tol, claim).with_detail(coarse));
        rows.push(
            AuditRow::at_least(format!("{name}/balance_r{r}_refinement"), "residual ratio under one grid doubling", coarse.residual / fine.residual, min_ratio, claim)
                .with_detail(fine),
        );
    }
    Ok(rows)
}

/// Both sides of the Littlewood-Paley identity against the value 1.
pub fn littlewood_paley_rows(name: &str, f: &dyn JetProvider, expected: f64, tol: f64) -> Result<Vec<AuditRow>> {
    let b = littlewood_paley_balance(f, 1.0 - 1e-9, LITTLEWOOD_PALEY_RULE)?;
    let claim = "||f||_{H^2}^2 = |f(0)|^2 + (2/pi) int |f'|^2 log(1/|z|) dm";
    Ok(vec![
        AuditRow::at_most(format!("{name}/lp_lhs"), format!("|lhs - {expected}|"), (b.lhs - expected).abs(), tol, claim),
        AuditRow::at_most(format!("{name}/lp_rhs"), format!("|rhs - {expected}|"), (b.rhs - expected).abs(), tol, claim).with_detail(b),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::entry;

    #[test]
    fn sunflower_points_fill_the_disc() {
        let p = interior_points(200, 0.8);
        assert_eq!(p.len(), 200);
        assert!(p.iter().all(|z| z.norm() <= 0.8));
        let inner = p.iter().filter(|z| z.norm() <= 0.4).count();
        assert!((45..=55).contains(&inner));
    }

    #[test]
    fn legendre_sweeps() {
        let e = entry("legendre").unwrap();
        let b = e.basis().unwrap();
        let pts = interior_points(20, 0.8);
        for row in identity_rows("legendre", &b, e.a.as_ref(), &pts, 1e-3, IdentityTolerances::default()).unwrap() {
            assert!(row.pass, "{row:?}");
        }
        assert!(schwarzian_row("legendre", &b, e.a.as_ref(), &pts, 1e-8).unwrap().pass);
        assert!(bank_laine_row("legendre", &b, e.a.as_ref(), &pts, 1e-8).unwrap().pass);
        assert!(subharmonic_row("legendre", &b, 256, 1e-6).unwrap().pass);
        let w = wronskian_propagation("legendre", e.a.clone(), 2, 0.5, &OdeOptions::default(), 1e-7).unwrap();
        assert!(w.pass, "{w:?}");
    }
}
