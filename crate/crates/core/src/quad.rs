//! Gauss–Legendre rules and an adaptive composite integrator for complex integrands.

use crate::error::{Error, Result};
use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static R8: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R64: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let cell = match n {
        8 => &R8,
        16 => &R16,
        32 => &R32,
        64 => &R64,
        _ => panic!("unsupported Gauss-Legendre size {n}"),
    };
    cell.get_or_init(|| {
        let mut v = GaussLegendre::new(n)
            .expect("rule of size >= 2")
            .into_node_weight_pairs();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    })
}

pub fn fixed<F>(f: &F, a: f64, b: f64, n: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64> + ?Sized,
{
    Ok(fixed_with_l1(f, a, b, n)?.0)
}

/// Rule value together with the same rule applied to `|f|`.
fn fixed_with_l1<F>(f: &F, a: f64, b: f64, n: usize) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<Complex64> + ?Sized,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut s = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for &(x, w) in gauss_legendre(n) {
        let v = f(mid + half * x)?;
        s += v * w;
        l1 += v.norm() * w;
    }
    Ok((s * half, l1 * half.abs()))
}

fn refine<F>(f: &F, a: f64, b: f64, whole: Complex64, tol: f64, depth: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64> + ?Sized,
{
    let m = 0.5 * (a + b);
    let (left, l1a) = fixed_with_l1(f, a, m, 16)?;
    let (right, l1b) = fixed_with_l1(f, m, b, 16)?;
    let both = left + right;
    if !(both.re.is_finite() && both.im.is_finite()) {
        return Err(Error::NonFinite("quadrature"));
    }
    let diff = (both - whole).norm();
    let floor = 32.0 * f64::EPSILON * (l1a + l1b);
    if diff <= tol * both.norm() || diff <= floor || depth >= 30 {
        return Ok(both);
    }
    Ok(refine(f, a, m, left, tol, depth + 1)? + refine(f, m, b, right, tol, depth + 1)?)
}

/// Composite 16-point Gauss–Legendre on `[a, b]` with interval halving until two
/// successive levels agree to relative `tol` on each panel.
pub fn adaptive<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64> + ?Sized,
{
    let panels = 4;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + (b - a) * k as f64 / panels as f64;
        let hi = a + (b - a) * (k + 1) as f64 / panels as f64;
        let whole = fixed(f, lo, hi, 16)?;
        total += refine(f, lo, hi, whole, tol, 0)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [8, 16, 32, 64] {
            let deg = 2 * n - 1;
            let v = fixed(&|x: f64| Ok(Complex64::new(x.powi(deg as i32 - 1), 0.0)), 0.0, 1.0, n).unwrap();
            assert!((v.re - 1.0 / (deg as f64)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(&|x: f64| Ok(Complex64::new(1.0 / (1e-4 + x * x), 0.0)), -1.0, 1.0, 1e-13).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v.re - exact).abs() < 1e-10 * exact);
    }
}
