//! Truncated Taylor arithmetic in one complex variable.
//!
//! A [`Jet`] stores `c_j = f^(j)(z0) / j!` for `j = 0..=order`. Every operation
//! propagates the coefficients exactly up to the stored order, so a closed form
//! written once in terms of jets yields its own derivatives.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest supported order.
pub const MAX_ORDER: usize = 12;
const CAP: usize = MAX_ORDER + 1;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [Complex64; CAP],
    order: usize,
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

impl Jet {
    pub fn constant(value: Complex64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} > {MAX_ORDER}");
        let mut c = [ZERO; CAP];
        c[0] = value;
        Jet { c, order }
    }

    /// The identity map expanded at `z0`.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut j = Self::constant(z0, order);
        if order >= 1 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_taylor(coeffs: &[Complex64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= CAP);
        let mut c = [ZERO; CAP];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet {
            c,
            order: coeffs.len() - 1,
        }
    }

    pub fn from_derivatives(derivs: &[Complex64]) -> Self {
        let coeffs: Vec<Complex64> = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| d / factorial(k))
            .collect();
        Self::from_taylor(&coeffs)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// Taylor coefficient `f^(k)/k!`; zero beyond the stored order.
    pub fn taylor(&self, k: usize) -> Complex64 {
        if k <= self.order {
            self.c[k]
        } else {
            ZERO
        }
    }

    pub fn taylor_coeffs(&self) -> &[Complex64] {
        &self.c[..=self.order]
    }

    /// `f^(k)(z0)`.
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.taylor(k) * factorial(k)
    }

    pub fn derivatives(&self) -> Vec<Complex64> {
        (0..=self.order).map(|k| self.derivative(k)).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = *self;
        for k in order + 1..CAP {
            out.c[k] = ZERO;
        }
        out.order = order;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.taylor_coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        self.taylor_coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn zeros_like(order: usize) -> Self {
        Jet {
            c: [ZERO; CAP],
            order,
        }
    }

    /// Jet of `f'`, one order lower.
    pub fn differentiate(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Self::zeros_like(self.order - 1);
        for j in 0..self.order {
            out.c[j] = self.c[j + 1] * (j + 1) as f64;
        }
        out
    }

    /// Jet of the antiderivative with value `c0`, one order higher (capped).
    pub fn integrate(&self, c0: Complex64) -> Self {
        let order = (self.order + 1).min(MAX_ORDER);
        let mut out = Self::zeros_like(order);
        out.c[0] = c0;
        for j in 1..=order {
            out.c[j] = self.c[j - 1] / j as f64;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for k in 0..=self.order {
            out.c[k] *= s;
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut out = Self::zeros_like(self.order);
        out.c[0] = a0.inv();
        for n in 1..=self.order {
            let mut s = ZERO;
            for j in 1..=n {
                s += self.c[j] * out.c[n - j];
            }
            out.c[n] = -s * out.c[0];
        }
        out
    }

    pub fn exp(&self) -> Self {
        let mut out = Self::zeros_like(self.order);
        out.c[0] = self.c[0].exp();
        for n in 1..=self.order {
            let mut s = ZERO;
            for j in 1..=n {
                s += self.c[j] * out.c[n - j] * j as f64;
            }
            out.c[n] = s / n as f64;
        }
        out
    }

    /// Principal logarithm (branch chosen by the value).
    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut out = Self::zeros_like(self.order);
        out.c[0] = a0.ln();
        for n in 1..=self.order {
            let mut s = ZERO;
            for j in 1..n {
                s += out.c[j] * self.c[n - j] * j as f64;
            }
            out.c[n] = (self.c[n] - s / n as f64) / a0;
        }
        out
    }

    /// Principal power `f^p`.
    pub fn powc(&self, p: Complex64) -> Self {
        let a0 = self.c[0];
        let mut out = Self::zeros_like(self.order);
        out.c[0] = a0.powc(p);
        for n in 1..=self.order {
            let mut s = ZERO;
            for j in 1..=n {
                s += (p * j as f64 - (n - j) as f64) * self.c[j] * out.c[n - j];
            }
            out.c[n] = s / (a0 * n as f64);
        }
        out
    }

    pub fn powf(&self, p: f64) -> Self {
        self.powc(Complex64::new(p, 0.0))
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Self {
        let mut acc = Jet::constant(Complex64::new(1.0, 0.0), self.order);
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn cos(&self) -> Self {
        let iz = *self * Complex64::i();
        ((iz).exp() + (-iz).exp()) * 0.5
    }

    pub fn sin(&self) -> Self {
        let iz = *self * Complex64::i();
        ((iz).exp() - (-iz).exp()) * Complex64::new(0.0, -0.5)
    }

    /// Evaluate the polynomial `sum coeffs[k] t^k` on a jet argument.
    pub fn eval_poly(coeffs: &[Complex64], t: &Jet) -> Jet {
        let mut acc = Jet::constant(ZERO, t.order);
        for c in coeffs.iter().rev() {
            acc = acc * *t + *c;
        }
        acc
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = Jet::zeros_like(order);
        for k in 0..=order {
            out.c[k] = self.c[k] + rhs.c[k];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut out = self;
        for k in 0..=self.order {
            out.c[k] = -self.c[k];
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = Jet::zeros_like(order);
        for n in 0..=order {
            let mut s = ZERO;
            for j in 0..=n {
                s += self.c[j] * rhs.c[n - j];
            }
            out.c[n] = s;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let b0 = rhs.c[0];
        let mut out = Jet::zeros_like(order);
        for n in 0..=order {
            let mut s = self.c[n];
            for j in 1..=n {
                s -= rhs.c[j] * out.c[n - j];
            }
            out.c[n] = s / b0;
        }
        out
    }
}

impl Add<Complex64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Complex64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<Complex64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Complex64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: Complex64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<Complex64> for Jet {
    type Output = Jet;
    fn div(self, rhs: Complex64) -> Jet {
        self.scale(rhs.inv())
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self + Complex64::new(rhs, 0.0)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self - Complex64::new(rhs, 0.0)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(Complex64::new(1.0 / rhs, 0.0))
    }
}

impl Add<Jet> for Complex64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for Complex64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}

impl Mul<Jet> for Complex64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<Jet> for Complex64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_variable_has_inverse_factorial_coefficients() {
        let z0 = c(0.3, -0.2);
        let e = Jet::variable(z0, 8).exp();
        for k in 0..=8 {
            assert!((e.derivative(k) - z0.exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let z = Jet::variable(c(0.1, 0.4), 10);
        let back = z.exp().ln();
        for k in 0..=10 {
            assert!((back.taylor(k) - z.taylor(k)).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let f = Jet::variable(c(0.2, 0.1), 9) * 2.0 + 1.0;
        let s = f.sqrt();
        let back = s * s;
        for k in 0..=9 {
            assert!((back.taylor(k) - f.taylor(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn division_matches_reciprocal_product() {
        let z = Jet::variable(c(-0.4, 0.3), 7);
        let a = z.exp() + z * z;
        let b = 1.0 - z * c(0.2, 0.5);
        let q1 = a / b;
        let q2 = a * b.recip();
        for k in 0..=7 {
            assert!((q1.taylor(k) - q2.taylor(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn geometric_series() {
        // 1/(1-z) at 0 has all Taylor coefficients equal to 1.
        let g = (1.0 - Jet::variable(c(0.0, 0.0), 12)).recip();
        for k in 0..=12 {
            assert!((g.taylor(k) - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn powi_negative() {
        let z = Jet::variable(c(0.5, 0.0), 4);
        let p = (1.0 - z).powi(-2);
        // d^k/dz^k (1-z)^-2 = (k+1)! (1-z)^-(k+2)
        for k in 0..=4 {
            let expected = factorial(k + 1) * 0.5f64.powi(-(k as i32 + 2));
            assert!((p.derivative(k).re - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn sin_cos_pythagoras() {
        let z = Jet::variable(c(0.7, -0.3), 8);
        let one = z.sin() * z.sin() + z.cos() * z.cos();
        assert!((one.value() - 1.0).norm() < 1e-14);
        for k in 1..=8 {
            assert!(one.taylor(k).norm() < 1e-13);
        }
    }

    #[test]
    fn mixed_orders_truncate_to_min() {
        let a = Jet::variable(c(0.0, 0.0), 5);
        let b = Jet::variable(c(0.0, 0.0), 3);
        assert_eq!((a * b).order(), 3);
        assert_eq!((a + b).order(), 3);
    }

    #[test]
    fn integrate_then_differentiate() {
        let f = Jet::variable(c(0.2, 0.2), 6).exp();
        let back = f.integrate(c(1.0, 0.0)).differentiate();
        for k in 0..=6 {
            assert!((back.taylor(k) - f.taylor(k)).norm() < 1e-15);
        }
    }
}
