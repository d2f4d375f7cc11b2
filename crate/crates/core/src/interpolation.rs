//! Finite-node interpolation in the disc and the explicit equations built from it.

use crate::aux::eval_aux;
use crate::blaschke::{separation_constant, FiniteBlaschke};
use crate::error::{Error, Result};
use crate::geometry::{exclusion_radius, make_grid, mobius, mobius_jet, pseudo_hyperbolic, DiscPoint, Exclusion, SampleGrid, Spacing};
use crate::jet::{Jet, MAX_ORDER};
use crate::ode::{find_zeros, points_outside, residual_at, SecondSolution, SolutionBasis};
use crate::provider::{check_finite, check_in_disc, check_order, derivative_of, Composite, JetProvider, Provider};
use crate::report::{AuditRow, Report};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pseudo-hyperbolic radius inside which `-f''/f` comes from a local series.
pub const REMOVABLE_RADIUS: f64 = 1e-2;
/// Degree of that local series.
pub const REMOVABLE_ORDER: usize = 6;

fn check_distinct(nodes: &[Complex64]) -> Result<()> {
    if nodes.len() > 1 {
        separation_constant(nodes)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationProblem {
    pub nodes: Vec<DiscPoint>,
    pub targets: Vec<Complex64>,
}

impl InterpolationProblem {
    pub fn new(nodes: &[Complex64], targets: &[Complex64]) -> Result<Self> {
        if nodes.len() != targets.len() {
            return Err(Error::Degenerate(format!(
                "{} nodes but {} targets",
                nodes.len(),
                targets.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::Degenerate("no interpolation nodes".into()));
        }
        if targets.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::NonFinite("interpolation targets"));
        }
        let pts = nodes.iter().map(|&z| DiscPoint::new(z)).collect::<Result<Vec<_>>>()?;
        check_distinct(nodes)?;
        Ok(InterpolationProblem {
            nodes: pts,
            targets: targets.to_vec(),
        })
    }

    pub fn node_values(&self) -> Vec<Complex64> {
        self.nodes.iter().map(|p| p.get()).collect()
    }
}

/// `h(z) = sum_n w_n prod_{k != n} phi_{z_k}(z) / phi_{z_k}(z_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeBlaschke {
    nodes: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl LagrangeBlaschke {
    pub fn new(problem: &InterpolationProblem) -> Self {
        let nodes = problem.node_values();
        let coeffs = nodes
            .iter()
            .enumerate()
            .map(|(n, &zn)| {
                let d: Complex64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != n)
                    .map(|(_, &zk)| mobius(zk, zn))
                    .product();
                problem.targets[n] / d
            })
            .collect();
        LagrangeBlaschke { nodes, coeffs }
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Jet on the closed disc.
    pub fn eval_jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        if !(z.norm() <= 1.0) {
            return Err(Error::outside(z));
        }
        let var = Jet::variable(z, order);
        let factors: Vec<Jet> = self.nodes.iter().map(|&zk| mobius_jet(zk, var)).collect();
        let mut acc = Jet::constant(ZERO, order);
        for (n, c) in self.coeffs.iter().enumerate() {
            let mut term = Jet::constant(*c, order);
            for (k, f) in factors.iter().enumerate() {
                if k != n {
                    term = term * *f;
                }
            }
            acc = acc + term;
        }
        check_finite(acc, "interpolant")
    }

    /// Ascending coefficients of `h(z) prod_k (1 - conj(z_k) z)`.
    pub fn numerator(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.nodes.len() + 1];
        for (n, c) in self.coeffs.iter().enumerate() {
            let mut p = vec![*c];
            for (k, &zk) in self.nodes.iter().enumerate() {
                p = if k == n { poly_mul(&p, &[ONE, -zk.conj()]) } else { poly_mul(&p, &[zk, -ONE]) };
            }
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    /// Zeros in the open disc, polished by Newton on `h` itself.
    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        let mut out: Vec<Complex64> = vec![];
        for r in poly_roots(&self.numerator()) {
            if !(r.norm() < 1.0 - 1e-9) {
                continue;
            }
            let mut z = r;
            for _ in 0..50 {
                let j = self.eval_jet(z, 1)?;
                if j.derivative(1) == ZERO {
                    break;
                }
                let step = j.value() / j.derivative(1);
                z -= step;
                if step.norm() < 1e-16 {
                    break;
                }
            }
            if z.norm() < 1.0 && out.iter().all(|w| pseudo_hyperbolic(*w, z) > 1e-8) {
                out.push(z);
            }
        }
        out.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        Ok(out)
    }
}

impl JetProvider for LagrangeBlaschke {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_in_disc(z)?;
        self.eval_jet(z, order)
    }

    fn describe(&self) -> String {
        format!("lagrange-blaschke[{} nodes]", self.nodes.len())
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut d = ZERO;
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// All roots of the polynomial with ascending coefficients (Aberth iteration).
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut p: Vec<Complex64> = coeffs.to_vec();
    while p.len() > 1 && p.last().map_or(false, |c| c.norm() <= 1e-14 * scale) {
        p.pop();
    }
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let bound = 1.0 + p[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, d) = poly_eval(&p, z[i]);
            if v == ZERO {
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let w = ratio / (ONE - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    /// `sup |h|` on a grid out to `r = 0.999`.
    pub grid_norm: f64,
    pub argmax: Complex64,
    /// `sum |w_n| / prod_{k != n} rho_p(z_k, z_n)`.
    pub a_priori_bound: f64,
    /// `max |h(z_n) - w_n|`.
    pub node_error: f64,
}

pub fn lagrange_blaschke_solve(problem: &InterpolationProblem) -> Result<(Arc<LagrangeBlaschke>, NormReport)> {
    let h = Arc::new(LagrangeBlaschke::new(problem));
    let nodes = problem.node_values();
    let bound = nodes
        .iter()
        .enumerate()
        .map(|(n, &zn)| {
            let d: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != n)
                .map(|(_, &zk)| pseudo_hyperbolic(zk, zn))
                .product();
            problem.targets[n].norm() / d
        })
        .sum();
    let mut node_error: f64 = 0.0;
    for (z, w) in nodes.iter().zip(&problem.targets) {
        node_error = node_error.max((h.eval_jet(*z, 0)?.value() - w).norm());
    }
    let grid = norm_grid();
    let (grid_norm, argmax) = grid
        .nodes
        .par_iter()
        .map(|n| h.eval_jet(n.z, 0).map(|j| (j.value().norm(), n.z)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0, ZERO), |a, v| if v.0 > a.0 { v } else { a });
    Ok((
        h,
        NormReport {
            grid_norm,
            argmax,
            a_priori_bound: bound,
            node_error,
        },
    ))
}

fn norm_grid() -> &'static SampleGrid {
    static GRID: OnceLock<SampleGrid> = OnceLock::new();
    GRID.get_or_init(|| make_grid(64, 256, 0.999, Spacing::BoundaryRefined).expect("fixed grid"))
}

/// Relative margin taken off the root of `12 eta / (1 - eta)^2 = delta / 2`.
pub const EARL_MARGIN: f64 = 1e-12;

/// Largest `eta` in (0, 1) with `12 eta / (1 - eta)^2 < delta / 2`, up to the margin.
pub fn earl_eta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", delta, "must lie in (0, 1]"));
    }
    let b = 1.0 + 12.0 / delta;
    // smaller root of eta^2 - 2 b eta + 1, written without cancellation
    let root = 1.0 / (b + (b * b - 1.0).sqrt());
    Ok(root * (1.0 - EARL_MARGIN))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteProblem {
    pub nodes: Vec<DiscPoint>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
}

impl HermiteProblem {
    pub fn new(nodes: &[Complex64], values: &[Complex64], derivatives: &[Complex64]) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() != derivatives.len() {
            return Err(Error::Degenerate("nodes, values and derivatives differ in length".into()));
        }
        if nodes.is_empty() {
            return Err(Error::Degenerate("no interpolation nodes".into()));
        }
        let pts = nodes.iter().map(|&z| DiscPoint::new(z)).collect::<Result<Vec<_>>>()?;
        check_distinct(nodes)?;
        Ok(HermiteProblem {
            nodes: pts,
            values: values.to_vec(),
            derivatives: derivatives.to_vec(),
        })
    }
}

/// `g(z) = sum_n (a_n + b_n phi_{z_n}(z)) P_n(z)^2`, `P_n = prod_{k != n} phi_{z_k} / phi_{z_k}(z_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteInterpolant {
    nodes: Vec<Complex64>,
    denoms: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl HermiteInterpolant {
    fn basis_jet(&self, n: usize, var: Jet) -> Jet {
        let mut p = Jet::constant(ONE / self.denoms[n], var.order());
        for (k, &zk) in self.nodes.iter().enumerate() {
            if k != n {
                p = p * mobius_jet(zk, var);
            }
        }
        p
    }

    pub fn eval_jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        if !(z.norm() <= 1.0) {
            return Err(Error::outside(z));
        }
        let var = Jet::variable(z, order);
        let mut acc = Jet::constant(ZERO, order);
        for n in 0..self.nodes.len() {
            let p = self.basis_jet(n, var);
            acc = acc + (mobius_jet(self.nodes[n], var) * self.b[n] + self.a[n]) * p * p;
        }
        check_finite(acc, "hermite interpolant")
    }
}

impl JetProvider for HermiteInterpolant {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_in_disc(z)?;
        self.eval_jet(z, order)
    }

    fn describe(&self) -> String {
        format!("hermite[{} nodes]", self.nodes.len())
    }
}

pub fn hermite_solve(problem: &HermiteProblem) -> Result<Arc<HermiteInterpolant>> {
    let nodes: Vec<Complex64> = problem.nodes.iter().map(|p| p.get()).collect();
    let denoms: Vec<Complex64> = nodes
        .iter()
        .enumerate()
        .map(|(n, &zn)| {
            nodes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != n)
                .map(|(_, &zk)| mobius(zk, zn))
                .product()
        })
        .collect();
    let mut g = HermiteInterpolant {
        nodes: nodes.clone(),
        denoms,
        a: problem.values.clone(),
        b: vec![ZERO; nodes.len()],
    };
    for n in 0..nodes.len() {
        let zn = nodes[n];
        // P_n(z_n) = 1, so (P_n^2)'(z_n) = 2 P_n'(z_n); phi_a'(a) = -1/(1-|a|^2)
        let dp = g.basis_jet(n, Jet::variable(zn, 1)).derivative(1);
        let dphi = -1.0 / (1.0 - zn.norm_sqr());
        g.b[n] = (problem.derivatives[n] - problem.values[n] * 2.0 * dp) / dphi;
    }
    Ok(Arc::new(g))
}

/// `-f''/f` for an `f` whose zeros at the given centres are removable for the quotient.
/// Within `REMOVABLE_RADIUS` of a centre the value comes from a degree-6 local series.
pub struct RemovableQuotient {
    f: Provider,
    centres: Vec<Complex64>,
    series: Vec<OnceLock<Result<Vec<Complex64>>>>,
}

impl RemovableQuotient {
    pub fn new(f: Provider, centres: Vec<Complex64>) -> Arc<Self> {
        let series = centres.iter().map(|_| OnceLock::new()).collect();
        Arc::new(RemovableQuotient { f, centres, series })
    }

    pub fn centres(&self) -> &[Complex64] {
        &self.centres
    }

    fn local_series(&self, k: usize) -> Result<&Vec<Complex64>> {
        self.series[k]
            .get_or_init(|| {
                let n = REMOVABLE_ORDER + 3;
                let fj = self.f.jet(self.centres[k], n)?;
                let c = fj.taylor_coeffs();
                // -f'' and f around the centre, both divided by (z - centre)
                let num: Vec<Complex64> = (1..=REMOVABLE_ORDER + 1)
                    .map(|j| -(((j + 2) * (j + 1)) as f64) * c[j + 2])
                    .collect();
                let den: Vec<Complex64> = c[1..=n].to_vec();
                if den[0].norm() == 0.0 {
                    return Err(Error::Degenerate("zero of f is not simple".into()));
                }
                let q = Jet::from_taylor(&num) / Jet::from_taylor(&den);
                Ok(q.taylor_coeffs()[..=REMOVABLE_ORDER].to_vec())
            })
            .as_ref()
            .map_err(|e| e.clone())
    }
}

impl JetProvider for RemovableQuotient {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        check_in_disc(z)?;
        if let Some(k) = self
            .centres
            .iter()
            .position(|&c| pseudo_hyperbolic(z, c) <= REMOVABLE_RADIUS)
        {
            let coeffs = self.local_series(k)?;
            let t = Jet::variable(z, order) - self.centres[k];
            return check_finite(Jet::eval_poly(coeffs, &t), "local series");
        }
        if order + 2 > MAX_ORDER {
            return Err(Error::JetOrder {
                requested: order + 2,
                max: MAX_ORDER,
            });
        }
        let fj = self.f.jet(z, order + 2)?;
        let f2 = fj.differentiate().differentiate();
        if fj.value().norm() < 1e-300 {
            return Err(Error::near_zero("f", z, fj.value().norm()));
        }
        check_finite(-f2 / fj.truncate(order), "-f''/f")
    }

    fn describe(&self) -> String {
        format!("-f''/f[{}]", self.f.describe())
    }
}

/// An explicit equation `f'' + A f = 0` with its audit rows.
#[derive(Clone)]
pub struct Construction {
    pub kind: String,
    pub a: Provider,
    pub f1: Provider,
    pub basis: SolutionBasis,
    /// Centres of removable singularities of `A`.
    pub removable: Vec<Complex64>,
    pub exclusions: Vec<Exclusion>,
    pub report: Report,
    pub notes: Vec<String>,
}

impl std::fmt::Debug for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Construction")
            .field("kind", &self.kind)
            .field("removable", &self.removable)
            .field("rows", &self.report.rows.len())
            .finish()
    }
}

pub const SURROGATE_NOTE: &str =
    "finite Lagrange-Blaschke interpolant stands in for the Blaschke-form interpolant; zero displacement is measured, not assumed";

fn audit_grid() -> &'static SampleGrid {
    static GRID: OnceLock<SampleGrid> = OnceLock::new();
    GRID.get_or_init(|| make_grid(64, 256, 0.9, Spacing::BoundaryRefined).expect("fixed grid"))
}

/// Points at pseudo-hyperbolic distance 0, r/2 and r from each centre.
fn near_points(centres: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![];
    for &c in centres {
        out.push(c);
        for rho in [0.5 * REMOVABLE_RADIUS, REMOVABLE_RADIUS] {
            for k in 0..8 {
                let w = Complex64::from_polar(rho, 2.0 * PI * k as f64 / 8.0 + 0.1);
                let z = mobius(c, w);
                if z.norm() < 1.0 {
                    out.push(z);
                }
            }
        }
    }
    out
}

fn residual_rows(kind: &str, a: &Provider, f: &Provider, removable: &[Complex64], report: &mut Report) -> Result<()> {
    let discs: Vec<Exclusion> = removable
        .iter()
        .map(|&c| Exclusion::new(c, REMOVABLE_RADIUS))
        .collect::<Result<_>>()?;
    let off = points_outside(audit_grid(), &discs);
    let rep = residual_at(a.as_ref(), f.as_ref(), &off)?;
    report.push(
        AuditRow::at_most(format!("{kind}/residual"), "max |f''+Af|/(1+|f|) off removable discs", rep.max, 1e-8, "f'' + A f = 0").with_detail(rep),
    );
    if !removable.is_empty() {
        let rep = residual_at(a.as_ref(), f.as_ref(), &near_points(removable))?;
        report.push(
            AuditRow::at_most(format!("{kind}/residual_local"), "max |f''+Af|/(1+|f|) inside removable discs", rep.max, 1e-6, "f'' + A f = 0 (local series)")
                .with_detail(rep),
        );
    }
    Ok(())
}

fn base_point(exclusions: &[Exclusion]) -> Result<Complex64> {
    let mut candidates = vec![ZERO];
    for r in [0.25, 0.5, 0.75] {
        for k in 0..8 {
            candidates.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / 8.0 + 0.3));
        }
    }
    candidates
        .into_iter()
        .find(|&z| exclusions.iter().all(|e| pseudo_hyperbolic(z, e.center.get()) > 1.5 * e.radius))
        .ok_or_else(|| Error::Degenerate("no base point outside the exclusions".into()))
}

fn second_basis(f1: &Provider, zeros: &[Complex64]) -> Result<(SolutionBasis, Vec<Exclusion>)> {
    let delta = exclusion_radius(zeros, 0.2);
    let exclusions: Vec<Exclusion> = zeros.iter().map(|&z| Exclusion::new(z, delta)).collect::<Result<_>>()?;
    let alpha = base_point(&exclusions)?;
    let f2: Provider = SecondSolution::new(f1.clone(), alpha, exclusions.clone())?;
    Ok((SolutionBasis::new(f1.clone(), f2, ONE)?, exclusions))
}

/// `f1 = B e^{B k}` with simple zeros exactly at `zeros` and `A = -f1''/f1` analytic.
pub fn prescribed_zero_equation(zeros: &[Complex64]) -> Result<Construction> {
    if zeros.is_empty() {
        return Err(Error::Degenerate("no prescribed zeros".into()));
    }
    check_distinct(zeros)?;
    let b = Arc::new(FiniteBlaschke::new(zeros)?);
    let mut targets = vec![];
    for &z in zeros {
        let j = b.eval_jet(z, 2)?;
        let d1 = j.derivative(1);
        targets.push(-j.derivative(2) / (2.0 * d1 * d1));
    }
    let (k, norm) = lagrange_blaschke_solve(&InterpolationProblem::new(zeros, &targets)?)?;
    let bb = b.clone();
    let f1: Provider = Composite::new("B exp(B k)", move |z, order| {
        let bj = bb.eval_jet(z, order)?;
        Ok(bj * (bj * k.eval_jet(z, order)?).exp())
    });
    let a: Provider = RemovableQuotient::new(f1.clone(), zeros.to_vec());
    let (basis, exclusions) = second_basis(&f1, zeros)?;
    let kind = "prescribed_zeros";
    let mut report = Report::new();
    report.push(AuditRow::report(format!("{kind}/k_norm"), "grid sup |k| (r <= 0.999)", norm.grid_norm, "k bounded").with_detail(&norm));
    for (i, &z) in zeros.iter().enumerate() {
        let j = f1.jet(z, 2)?;
        report.push(AuditRow::at_most(format!("{kind}/zero_{i}/value"), "|f1(z_n)|", j.value().norm(), 1e-12, "f1(z_n) = 0"));
        report.push(AuditRow::at_least(format!("{kind}/zero_{i}/simple"), "|f1'(z_n)|", j.derivative(1).norm(), 1e-12, "the zero is simple"));
        let bp = b.derivative_at_zero(z)?;
        let w = 1.0 - z.norm_sqr();
        let lhs = eval_aux(&basis, z)?.quotient_spherical * w * w;
        let rhs = bp.norm_sqr() * w * w;
        report.push(
            AuditRow::at_most(
                format!("{kind}/zero_{i}/spherical"),
                "relative error of (f1/f2)^#(z_n)(1-|z_n|^2)^2",
                (lhs - rhs).abs() / rhs,
                1e-6,
                "(f1/f2)^#(z_n)(1-|z_n|^2)^2 = |B'(z_n)|^2(1-|z_n|^2)^2",
            )
            .with_detail((lhs, rhs)),
        );
    }
    residual_rows(kind, &a, &f1, zeros, &mut report)?;
    Ok(Construction {
        kind: kind.into(),
        a,
        f1,
        basis,
        removable: zeros.to_vec(),
        exclusions,
        report: report.sorted(),
        notes: vec![SURROGATE_NOTE.into()],
    })
}

/// `f = I e^{B g}` with `f(z_n) = w_n`, `A = -f''/f` analytic.
pub fn interpolating_solution_equation(problem: &InterpolationProblem) -> Result<Construction> {
    if problem.targets.iter().all(|w| *w == ZERO) {
        return Err(Error::Degenerate("all targets are zero".into()));
    }
    let nodes = problem.node_values();
    let b = Arc::new(FiniteBlaschke::new(&nodes)?);
    let mut notes = vec![];
    let constant = problem.targets.iter().all(|w| *w == problem.targets[0]);
    let (interp, zeros, norm): (Provider, Vec<Complex64>, Option<NormReport>) = if constant {
        let c = problem.targets[0];
        notes.push("equal targets: I is the constant target".into());
        (Composite::new("constant", move |z, order| Ok(Jet::constant(c, order) + Jet::variable(z, order) * 0.0)), vec![], None)
    } else {
        let (h, norm) = lagrange_blaschke_solve(problem)?;
        notes.push(SURROGATE_NOTE.into());
        let zeros = h.zeros()?;
        (h, zeros, Some(norm))
    };
    let mut g_targets = vec![];
    for &z in &zeros {
        let ij = interp.jet(z, 2)?;
        let bj = b.eval_jet(z, 1)?;
        if ij.derivative(1).norm() < 1e-12 {
            return Err(Error::Degenerate(format!("interpolant has a multiple zero at {z}")));
        }
        g_targets.push(-ij.derivative(2) / (2.0 * ij.derivative(1) * bj.derivative(1)));
    }
    let g: Option<Arc<HermiteInterpolant>> = if zeros.is_empty() {
        None
    } else {
        Some(hermite_solve(&HermiteProblem::new(&zeros, &g_targets, &vec![ZERO; zeros.len()])?)?)
    };
    let (ii, bb) = (interp.clone(), b.clone());
    let f1: Provider = Composite::new("I exp(B g)", move |z, order| {
        let ij = ii.jet(z, order)?;
        Ok(match &g {
            Some(g) => ij * (bb.eval_jet(z, order)? * g.eval_jet(z, order)?).exp(),
            None => ij,
        })
    });
    let a: Provider = RemovableQuotient::new(f1.clone(), zeros.clone());
    let (basis, exclusions) = if zeros.is_empty() {
        (SolutionBasis::new(f1.clone(), SecondSolution::new(f1.clone(), base_point(&[])?, vec![])?, ONE)?, vec![])
    } else {
        second_basis(&f1, &zeros)?
    };
    let kind = "interpolating";
    let mut report = Report::new();
    if let Some(norm) = &norm {
        report.push(AuditRow::report(format!("{kind}/interpolant_norm"), "grid sup |I| (r <= 0.999)", norm.grid_norm, "I bounded").with_detail(norm));
    }
    for (i, (&z, &w)) in nodes.iter().zip(&problem.targets).enumerate() {
        let v = f1.eval(z)?;
        report.push(AuditRow::at_most(format!("{kind}/node_{i}"), "|f(z_n) - w_n|", (v - w).norm(), 1e-9, "f(z_n) = w_n"));
    }
    for (i, &z) in zeros.iter().enumerate() {
        let d = nodes.iter().map(|&n| pseudo_hyperbolic(n, z)).fold(f64::INFINITY, f64::min);
        report.push(AuditRow::report(format!("{kind}/zero_{i}/displacement"), "rho_p(zero of I, nearest node)", d, "zero displacement of the surrogate").with_detail(z));
    }
    residual_rows(kind, &a, &f1, &zeros, &mut report)?;
    Ok(Construction {
        kind: kind.into(),
        a,
        f1,
        basis,
        removable: zeros,
        exclusions,
        report: report.sorted(),
        notes,
    })
}

/// Fixed points of `f`; see [`find_displacement_zeros`].
pub fn find_fixed_points(f: &Provider, grid: &SampleGrid) -> Vec<DiscPoint> {
    let ff = f.clone();
    let g: Provider = Composite::new("f - z", move |z, order| Ok(ff.jet(z, order)? - Jet::variable(z, order)));
    find_displacement_zeros(&g, grid)
}

/// Zeros of the displacement `g = f - z`, located through the simple zeros of `g / g'`
/// so that multiple fixed points converge quadratically. Passing `g` in closed form
/// avoids the cancellation in `f(z) - z` near a multiple fixed point.
pub fn find_displacement_zeros(g: &Provider, grid: &SampleGrid) -> Vec<DiscPoint> {
    let gg = g.clone();
    let ratio: Provider = Composite::new("g/g'", move |z, order| {
        check_order(order + 1)?;
        let j = gg.jet(z, order + 1)?;
        let d = j.differentiate();
        if d.value().norm() < 1e-300 {
            return Err(Error::near_zero("g'", z, d.value().norm()));
        }
        Ok(j.truncate(order) / d)
    });
    find_zeros(ratio.as_ref(), grid, grid.r_max())
        .into_iter()
        .filter(|p| g.eval(p.get()).map_or(false, |v| v.norm() <= 1e-10))
        .collect()
}

/// `f1 = z + eps z^3 B`.
pub fn fixed_point_simple(nodes: &[Complex64], epsilon: f64) -> Result<Construction> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 1)"));
    }
    check_distinct(nodes)?;
    let b = Arc::new(FiniteBlaschke::new(nodes)?);
    let bb = b.clone();
    let f1: Provider = Composite::new(format!("z + {epsilon} z^3 B"), move |z, order| {
        let v = Jet::variable(z, order);
        Ok(v + v * v * v * bb.eval_jet(z, order)? * epsilon)
    });
    let a: Provider = RemovableQuotient::new(f1.clone(), vec![ZERO]);
    let (basis, exclusions) = second_basis(&f1, &[ZERO])?;
    let kind = "fixed_point_simple";
    let mut report = Report::new();
    let j0 = f1.jet(ZERO, 2)?;
    report.push(AuditRow::at_most(format!("{kind}/origin/value"), "|f1(0)|", j0.value().norm(), 1e-15, "f1(0) = 0"));
    report.push(AuditRow::at_most(format!("{kind}/origin/derivative"), "|f1'(0) - 1|", (j0.derivative(1) - 1.0).norm(), 1e-15, "f1'(0) = 1"));
    report.push(AuditRow::at_most(format!("{kind}/origin/second"), "|f1''(0)|", j0.derivative(2).norm(), 1e-15, "f1''(0) = 0"));
    for (i, &z) in nodes.iter().enumerate() {
        let v = f1.eval(z)?;
        report.push(AuditRow::at_most(format!("{kind}/node_{i}"), "|f1(z_n) - z_n|", (v - z).norm(), 1e-9, "f1(z_n) = z_n"));
    }
    let grid = audit_grid();
    let mut sandwich: f64 = f64::NEG_INFINITY;
    let mut sup: f64 = 0.0;
    for n in &grid.nodes {
        let m = f1.eval(n.z)?.norm();
        let r = n.z.norm();
        sandwich = sandwich.max(((1.0 - epsilon) * r - m).max(m - (1.0 + epsilon) * r) / r);
        sup = sup.max(m);
    }
    report.push(AuditRow::at_most(format!("{kind}/sandwich"), "worst relative violation", sandwich, 1e-12, "(1-eps)|z| <= |f1(z)| <= (1+eps)|z|"));
    report.push(AuditRow::new(format!("{kind}/norm"), "grid sup |f1|", sup, crate::report::Relation::AtMost, 1.0 + epsilon, "||f1|| < 1 + eps").require(sup < 1.0 + epsilon));
    let bd = b.clone();
    let displacement: Provider = Composite::new(format!("{epsilon} z^3 B"), move |z, order| {
        let v = Jet::variable(z, order);
        Ok(v * v * v * bd.eval_jet(z, order)? * epsilon)
    });
    let found = find_displacement_zeros(&displacement, grid);
    let mut expected = vec![ZERO];
    expected.extend_from_slice(nodes);
    let stray = found
        .iter()
        .map(|p| expected.iter().map(|&e| (e - p.get()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    report.push(
        AuditRow::at_most(format!("{kind}/fixed_points"), "max distance of a detected fixed point from {0} and the nodes", stray, 1e-8, "no other fixed points in r <= 0.9")
            .with_detail(found.iter().map(|p| p.get()).collect::<Vec<_>>()),
    );
    residual_rows(kind, &a, &f1, &[ZERO], &mut report)?;
    Ok(Construction {
        kind: kind.into(),
        a,
        f1,
        basis,
        removable: vec![ZERO],
        exclusions,
        report: report.sorted(),
        notes: vec![],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointType {
    Attractive,
    Neutral,
    Repulsive,
}

impl FixedPointType {
    pub fn name(self) -> &'static str {
        match self {
            FixedPointType::Attractive => "attractive",
            FixedPointType::Neutral => "neutral",
            FixedPointType::Repulsive => "repulsive",
        }
    }

    /// Prescribed multiplier `f1'(z_n)`.
    pub fn multiplier(self) -> f64 {
        match self {
            FixedPointType::Attractive => 0.5,
            FixedPointType::Neutral => 1.0,
            FixedPointType::Repulsive => 2.0,
        }
    }
}

impl FromStr for FixedPointType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "attractive" => Ok(FixedPointType::Attractive),
            "neutral" => Ok(FixedPointType::Neutral),
            "repulsive" => Ok(FixedPointType::Repulsive),
            other => Err(Error::Unknown {
                kind: "fixed point type",
                name: other.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSpec {
    pub nodes: Vec<DiscPoint>,
    pub types: Vec<FixedPointType>,
}

/// Nodes closer than this to the negative real axis are rejected.
pub const BRANCH_GUARD: f64 = 1e-6;

impl FixedPointSpec {
    pub fn new(nodes: &[Complex64], types: &[FixedPointType]) -> Result<Self> {
        if nodes.len() != types.len() {
            return Err(Error::Degenerate("nodes and types differ in length".into()));
        }
        if nodes.is_empty() {
            return Err(Error::Degenerate("no fixed points requested".into()));
        }
        for &z in nodes {
            if z == ZERO {
                return Err(Error::param("node", 0.0, "the origin cannot be a prescribed fixed point"));
            }
            if z.re < 0.0 && z.im.abs() < BRANCH_GUARD {
                return Err(Error::BranchCut { re: z.re, im: z.im });
            }
        }
        let pts = nodes.iter().map(|&z| DiscPoint::new(z)).collect::<Result<Vec<_>>>()?;
        check_distinct(nodes)?;
        Ok(FixedPointSpec {
            nodes: pts,
            types: types.to_vec(),
        })
    }
}

/// `f1 = exp(h + B g)` with `f1(z_n) = z_n` and `f1'(z_n)` set by the type.
pub fn fixed_point_typed(spec: &FixedPointSpec) -> Result<Construction> {
    let spec = FixedPointSpec::new(&spec.nodes.iter().map(|p| p.get()).collect::<Vec<_>>(), &spec.types)?;
    let nodes: Vec<Complex64> = spec.nodes.iter().map(|p| p.get()).collect();
    let b = Arc::new(FiniteBlaschke::new(&nodes)?);
    let logs: Vec<Complex64> = nodes.iter().map(|z| z.ln()).collect();
    let (h, h_norm) = lagrange_blaschke_solve(&InterpolationProblem::new(&nodes, &logs)?)?;
    let mut g_targets = vec![];
    for (&z, t) in nodes.iter().zip(&spec.types) {
        let hp = h.eval_jet(z, 1)?.derivative(1);
        let bp = b.derivative_at_zero(z)?;
        g_targets.push((t.multiplier() / z - hp) / bp);
    }
    let (g, g_norm) = lagrange_blaschke_solve(&InterpolationProblem::new(&nodes, &g_targets)?)?;
    let (hh, gg, bb) = (h.clone(), g.clone(), b.clone());
    let exponent: Provider = Composite::new("h + B g", move |z, order| Ok(hh.eval_jet(z, order)? + bb.eval_jet(z, order)? * gg.eval_jet(z, order)?));
    let e1 = exponent.clone();
    let f1: Provider = Composite::new("exp(h + B g)", move |z, order| Ok(e1.jet(z, order)?.exp()));
    let e2 = exponent.clone();
    let a: Provider = Composite::new("-(p'' + p'^2), p = h + B g", move |z, order| {
        check_order(order + 2)?;
        let p = e2.jet(z, order + 2)?;
        let d1 = p.differentiate();
        let d2 = d1.differentiate();
        Ok(-(d2 + d1.truncate(order) * d1.truncate(order)))
    });
    let f2: Provider = SecondSolution::new(f1.clone(), ZERO, vec![])?;
    let basis = SolutionBasis::new(f1.clone(), f2, ONE)?;
    let kind = "fixed_point_typed";
    let mut report = Report::new();
    report.push(AuditRow::report(format!("{kind}/h_norm"), "grid sup |h| (r <= 0.999)", h_norm.grid_norm, "h bounded").with_detail(&h_norm));
    report.push(AuditRow::report(format!("{kind}/g_norm"), "grid sup |g| (r <= 0.999)", g_norm.grid_norm, "g bounded").with_detail(&g_norm));
    for (i, (&z, t)) in nodes.iter().zip(&spec.types).enumerate() {
        let j = f1.jet(z, 1)?;
        report.push(AuditRow::at_most(format!("{kind}/node_{i}/value"), "|f1(z_n) - z_n|", (j.value() - z).norm(), 1e-9, "f1(z_n) = z_n"));
        report.push(AuditRow::at_most(
            format!("{kind}/node_{i}/multiplier"),
            "|f1'(z_n) - C_n|",
            (j.derivative(1) - t.multiplier()).norm(),
            1e-9,
            format!("f1'(z_n) = {} ({})", t.multiplier(), t.name()),
        ));
    }
    residual_rows(kind, &a, &f1, &[], &mut report)?;
    Ok(Construction {
        kind: kind.into(),
        a,
        f1,
        basis,
        removable: vec![],
        exclusions: vec![],
        report: report.sorted(),
        notes: vec!["principal branch of log z_n".into(), SURROGATE_NOTE.into()],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    /// Zero and critical point of the same solution.
    ZeroCritical,
    /// Zero of `f1` and zero of `f2`.
    ZeroZero,
    /// Critical point of `f1` and critical point of `f2`.
    CriticalCritical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationPair {
    pub class: PairClass,
    pub z1: Complex64,
    pub z2: Complex64,
    pub rho: f64,
    /// `rho_p ||f1|| ||f2|| / (|W| max(1-|z1|, 1-|z2|))`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub norms: (f64, f64),
    pub zeros: (Vec<Complex64>, Vec<Complex64>),
    pub critical: (Vec<Complex64>, Vec<Complex64>),
    pub pairs: Vec<SeparationPair>,
    /// Smallest ratio; `None` when no pair is covered by the inequality.
    pub empirical_c: Option<f64>,
}

pub fn separation_audit(basis: &SolutionBasis, grid: &SampleGrid) -> Result<SeparationReport> {
    let r = grid.r_max();
    let sup = |f: &Provider| -> Result<f64> {
        let v: Vec<f64> = grid.nodes.par_iter().map(|n| f.eval(n.z).map(|v| v.norm())).collect::<Result<_>>()?;
        Ok(v.into_iter().fold(0.0, f64::max))
    };
    let norms = (sup(&basis.f1)?, sup(&basis.f2)?);
    let vals = |v: Vec<DiscPoint>| v.into_iter().map(|p| p.get()).collect::<Vec<_>>();
    let z1 = vals(find_zeros(basis.f1.as_ref(), grid, r));
    let z2 = vals(find_zeros(basis.f2.as_ref(), grid, r));
    let c1 = vals(find_zeros(derivative_of(basis.f1.clone(), 1).as_ref(), grid, r));
    let c2 = vals(find_zeros(derivative_of(basis.f2.clone(), 1).as_ref(), grid, r));
    let w = basis.wronskian.norm();
    let mut pairs = vec![];
    let mut add = |class, a: &[Complex64], b: &[Complex64]| {
        for &x in a {
            for &y in b {
                let rho = pseudo_hyperbolic(x, y);
                let m = (1.0 - x.norm()).max(1.0 - y.norm());
                pairs.push(SeparationPair {
                    class,
                    z1: x,
                    z2: y,
                    rho,
                    ratio: rho * norms.0 * norms.1 / (w * m),
                });
            }
        }
    };
    add(PairClass::ZeroCritical, &z1, &c1);
    add(PairClass::ZeroCritical, &z2, &c2);
    add(PairClass::ZeroZero, &z1, &z2);
    add(PairClass::CriticalCritical, &c1, &c2);
    let empirical_c = pairs.iter().map(|p| p.ratio).reduce(f64::min);
    Ok(SeparationReport {
        norms,
        zeros: (z1, z2),
        critical: (c1, c2),
        pairs,
        empirical_c,
    })
}
