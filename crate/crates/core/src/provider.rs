//! Analytic functions exposed through their jets.

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Anything that can return the value and first `order` derivatives at a disc point.
pub trait JetProvider: Send + Sync {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet>;

    fn describe(&self) -> String;

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z, 0)?.value())
    }
}

pub type Provider = Arc<dyn JetProvider>;

impl fmt::Debug for dyn JetProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetProvider({})", self.describe())
    }
}

pub fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::JetOrder {
            requested: order,
            max: MAX_ORDER,
        })
    } else {
        Ok(())
    }
}

pub fn check_in_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::outside(z))
    }
}

pub fn check_finite(jet: Jet, what: &'static str) -> Result<Jet> {
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::NonFinite(what))
    }
}

type JetFn = dyn Fn(Jet) -> Jet + Send + Sync;

/// A function given by a formula in the variable; jets come from Taylor arithmetic.
pub struct ClosedForm {
    name: String,
    f: Box<JetFn>,
}

impl ClosedForm {
    pub fn new(name: impl Into<String>, f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Provider {
        Arc::new(ClosedForm {
            name: name.into(),
            f: Box::new(f),
        })
    }
}

impl JetProvider for ClosedForm {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        check_in_disc(z)?;
        check_finite((self.f)(Jet::variable(z, order)), "closed form")
    }

    fn describe(&self) -> String {
        format!("closed-form:{}", self.name)
    }
}

type PointFn = dyn Fn(Complex64, usize) -> Result<Jet> + Send + Sync;

/// A provider assembled from other providers by an arbitrary rule.
pub struct Composite {
    name: String,
    f: Box<PointFn>,
}

impl Composite {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(Complex64, usize) -> Result<Jet> + Send + Sync + 'static,
    ) -> Provider {
        Arc::new(Composite {
            name: name.into(),
            f: Box::new(f),
        })
    }
}

impl JetProvider for Composite {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        check_in_disc(z)?;
        check_finite((self.f)(z, order)?, "composite")
    }

    fn describe(&self) -> String {
        format!("composite:{}", self.name)
    }
}

/// `f^(k)` as a provider of its own.
pub fn derivative_of(f: Provider, k: usize) -> Provider {
    let name = format!("d{k}[{}]", f.describe());
    Composite::new(name, move |z, order| {
        check_order(order + k)?;
        let mut j = f.jet(z, order + k)?;
        for _ in 0..k {
            j = j.differentiate();
        }
        Ok(j)
    })
}

/// Derivatives `f^(k)(z)`, `k = 0..=order`, from values on the circle `|w - z| = radius`
/// by the trapezoidal Cauchy formula with `n` nodes.
pub fn cauchy_derivatives(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    z: Complex64,
    radius: f64,
    n: usize,
    order: usize,
) -> Result<Vec<Complex64>> {
    let samples: Vec<(Complex64, Complex64)> = (0..n)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            f(z + w * radius).map(|v| (w, v))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        let s: Complex64 = samples.iter().map(|(w, v)| v * w.powi(-(k as i32))).sum();
        out.push(s * fact / (n as f64 * radius.powi(k as i32)));
    }
    Ok(out)
}

/// Largest discrepancy between the jet at `z` and derivatives recovered from order-0
/// values on a small circle, each measured against the Cauchy scale `M k! / radius^k`.
pub fn jet_audit(p: &dyn JetProvider, z: Complex64, order: usize, radius: f64) -> Result<f64> {
    let jet = p.jet(z, order)?;
    let n = 48;
    let eval = |w: Complex64| p.eval(w);
    let reference = cauchy_derivatives(&eval, z, radius, n, order)?;
    let mut m: f64 = 0.0;
    for j in 0..n {
        let w = z + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64);
        m = m.max(p.eval(w)?.norm());
    }
    let m = m.max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        let scale = m * fact / radius.powi(k as i32);
        worst = worst.max((jet.derivative(k) - reference[k]).norm() / scale);
    }
    Ok(worst)
}
