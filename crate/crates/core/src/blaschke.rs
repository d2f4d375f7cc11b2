//! Finite Blaschke products and discrete Carleson quantities.

use crate::error::{Error, Result};
use crate::geometry::{make_grid, mobius_jet, pseudo_hyperbolic, DiscPoint, Spacing};
use crate::jet::Jet;
use crate::provider::{check_in_disc, check_order, JetProvider};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

const LOG_SPACE_THRESHOLD: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBlaschke {
    zeros: Vec<DiscPoint>,
}

fn factor_jet(a: Complex64, z: Jet) -> Jet {
    if a == Complex64::new(0.0, 0.0) {
        z
    } else {
        mobius_jet(a, z) * (a.norm() / a)
    }
}

impl FiniteBlaschke {
    /// Zeros may repeat; repeated entries are multiple zeros.
    pub fn new(zeros: &[Complex64]) -> Result<Self> {
        Ok(FiniteBlaschke {
            zeros: zeros.iter().map(|&z| DiscPoint::new(z)).collect::<Result<_>>()?,
        })
    }

    pub fn zeros(&self) -> &[DiscPoint] {
        &self.zeros
    }

    pub fn zero_values(&self) -> Vec<Complex64> {
        self.zeros.iter().map(|p| p.get()).collect()
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// Jet at any `z` of the closed disc.
    pub fn eval_jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        if !(z.norm() <= 1.0) {
            return Err(Error::outside(z));
        }
        let var = Jet::variable(z, order);
        let mut acc = Jet::constant(Complex64::new(1.0, 0.0), order);
        let mut log_scale = 0.0;
        for p in &self.zeros {
            acc = acc * factor_jet(p.get(), var);
            if self.zeros.len() > LOG_SPACE_THRESHOLD {
                let m = acc.max_norm();
                if m > 0.0 && m < 1e-150 {
                    acc = acc * (1.0 / m);
                    log_scale += m.ln();
                }
            }
        }
        if self.zeros.len() > LOG_SPACE_THRESHOLD {
            let scale = log_scale.exp();
            acc = acc * scale;
            // Value in log-space with the phase carried separately.
            let (log_mod, phase) = self.log_polar(z);
            let mut coeffs: Vec<Complex64> = acc.taylor_coeffs().to_vec();
            coeffs[0] = Complex64::from_polar(log_mod.exp(), phase);
            acc = Jet::from_taylor(&coeffs);
        }
        Ok(acc)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_jet(z, 0)?.value())
    }

    /// `(log |B(z)|, arg B(z))` accumulated factor by factor.
    pub fn log_polar(&self, z: Complex64) -> (f64, f64) {
        let mut lm = 0.0;
        let mut ph = 0.0;
        for p in &self.zeros {
            let f = factor_jet(p.get(), Jet::variable(z, 0)).value();
            lm += f.norm().ln();
            ph += f.arg();
        }
        (lm, ph)
    }

    /// `B'(z_n)` at a simple zero.
    pub fn derivative_at_zero(&self, zn: Complex64) -> Result<Complex64> {
        let hits: Vec<usize> = (0..self.zeros.len())
            .filter(|&k| (self.zeros[k].get() - zn).norm() <= 1e-14)
            .collect();
        match hits.len() {
            0 => Err(Error::Degenerate(format!("{zn} is not a zero of the product"))),
            1 => {
                let k = hits[0];
                let a = self.zeros[k].get();
                let var = Jet::variable(a, 0);
                let mut rest = Complex64::new(1.0, 0.0);
                for (j, p) in self.zeros.iter().enumerate() {
                    if j != k {
                        rest *= factor_jet(p.get(), var).value();
                    }
                }
                let own = factor_jet(a, Jet::variable(a, 1)).derivative(1);
                Ok(own * rest)
            }
            _ => Err(Error::Degenerate(format!("{zn} is a multiple zero"))),
        }
    }
}

impl JetProvider for FiniteBlaschke {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_in_disc(z)?;
        self.eval_jet(z, order)
    }

    fn describe(&self) -> String {
        format!("blaschke:{} zeros", self.zeros.len())
    }
}

/// `min_n prod_{k != n} rho_p(z_k, z_n)`.
pub fn separation_constant(zeros: &[Complex64]) -> Result<f64> {
    for &z in zeros {
        DiscPoint::new(z)?;
    }
    let mut best = f64::INFINITY;
    for n in 0..zeros.len() {
        let mut prod = 1.0;
        for k in 0..zeros.len() {
            if k != n {
                let d = pseudo_hyperbolic(zeros[k], zeros[n]);
                if d == 0.0 {
                    return Err(Error::Duplicate {
                        first: k.min(n),
                        second: k.max(n),
                    });
                }
                prod *= d;
            }
        }
        best = best.min(prod);
    }
    Ok(if zeros.is_empty() { 1.0 } else { best })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMassReport {
    pub constant: f64,
    pub maximizing_a: Complex64,
    pub evaluated: usize,
}

/// `sup_a sum_n m_n (1 - |a|^2) / |1 - conj(a) z_n|^2` over a finite set of `a`,
/// with masses `m_n` defaulting to `1 - |z_n|^2`.
pub fn carleson_point_mass_constant(
    zeros: &[Complex64],
    masses: Option<&[f64]>,
    a_grid: Option<&[DiscPoint]>,
) -> Result<PointMassReport> {
    for &z in zeros {
        DiscPoint::new(z)?;
    }
    let masses: Vec<f64> = match masses {
        Some(m) if m.len() != zeros.len() => {
            return Err(Error::Degenerate(format!(
                "{} masses for {} points",
                m.len(),
                zeros.len()
            )))
        }
        Some(m) => {
            if let Some(bad) = m.iter().find(|w| !(**w >= 0.0)) {
                return Err(Error::param("mass", *bad, "masses must be non-negative"));
            }
            m.to_vec()
        }
        None => zeros.iter().map(|z| 1.0 - z.norm_sqr()).collect(),
    };
    let a_points: Vec<Complex64> = match a_grid {
        Some(g) => g.iter().map(|p| p.get()).collect(),
        None => {
            let mut pts = vec![Complex64::new(0.0, 0.0)];
            pts.extend_from_slice(zeros);
            pts.extend(make_grid(16, 64, 0.999, Spacing::BoundaryRefined)?.points());
            pts
        }
    };
    if a_points.is_empty() {
        return Err(Error::Degenerate("empty evaluation set".into()));
    }
    let vals: Vec<f64> = a_points
        .par_iter()
        .map(|a| {
            let s = 1.0 - a.norm_sqr();
            zeros
                .iter()
                .zip(&masses)
                .map(|(z, m)| m * s / (1.0 - a.conj() * z).norm_sqr())
                .sum()
        })
        .collect();
    let (idx, best) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(PointMassReport {
        constant: best,
        maximizing_a: a_points[idx],
        evaluated: a_points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_zero_product() {
        let b = FiniteBlaschke::new(&[c(0.5, 0.0)]).unwrap();
        assert!(b.eval(c(0.5, 0.0)).unwrap().norm() < 1e-16);
        assert!((b.eval(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-16);
        let d = b.derivative_at_zero(c(0.5, 0.0)).unwrap();
        assert!((d - c(-1.0 / 0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn origin_zero_is_identity_factor() {
        let b = FiniteBlaschke::new(&[c(0.0, 0.0)]).unwrap();
        let j = b.eval_jet(c(0.3, 0.1), 2).unwrap();
        assert_eq!(j.value(), c(0.3, 0.1));
        assert_eq!(j.derivative(1), c(1.0, 0.0));
        assert_eq!(b.derivative_at_zero(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn multiple_zero_rejected() {
        let b = FiniteBlaschke::new(&[c(0.2, 0.0), c(0.2, 0.0)]).unwrap();
        assert!(b.derivative_at_zero(c(0.2, 0.0)).is_err());
        assert!(b.derivative_at_zero(c(0.3, 0.0)).is_err());
    }

    #[test]
    fn separation_examples() {
        assert!((separation_constant(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(
            separation_constant(&[c(0.1, 0.0), c(0.1, 0.0)]),
            Err(Error::Duplicate { .. })
        ));
    }

    #[test]
    fn log_space_value_matches_direct_product() {
        let zeros: Vec<Complex64> = (0..80)
            .map(|k| Complex64::from_polar(0.3 + 0.6 * (k as f64 / 80.0), k as f64 * 0.7))
            .collect();
        let big = FiniteBlaschke::new(&zeros).unwrap();
        let z = c(0.1, -0.2);
        let direct: Complex64 = zeros
            .iter()
            .map(|&a| (a.norm() / a) * (a - z) / (1.0 - a.conj() * z))
            .product();
        let v = big.eval(z).unwrap();
        assert!((v - direct).norm() <= 1e-12 * direct.norm());
        let j = big.eval_jet(z, 2).unwrap();
        let d = crate::provider::jet_audit(&big, z, 2, 1e-3).unwrap();
        assert!(d < 1e-6, "{d}");
        assert!((j.value() - direct).norm() <= 1e-12 * direct.norm());
    }

    #[test]
    fn point_mass_constant_grows_with_more_masses() {
        let mut prev = 0.0;
        for n in [10usize, 20, 50] {
            let zs: Vec<Complex64> = (1..=n).map(|k| c(1.0 - 1.0 / k as f64, 0.0)).collect();
            let ms: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
            let r = carleson_point_mass_constant(&zs, Some(&ms), None).unwrap();
            assert!(r.constant > prev);
            prev = r.constant;
        }
    }
}
