//! Integration of `f'' + A f = 0` along polylines, solution bases and reduction of order.

use crate::error::{Error, Result};
use crate::geometry::{build_avoiding_path, pseudo_hyperbolic, DiscPoint, Exclusion, PathSpec, SampleGrid};
use crate::jet::Jet;
use crate::provider::{check_finite, check_in_disc, check_order, JetProvider, Provider};
use crate::quad;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// Step cap as a multiple of the distance `1 - |z|` to the boundary.
    pub max_step_factor: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            max_steps: 2_000_000,
            max_step_factor: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialData {
    pub z0: DiscPoint,
    pub f0: Complex64,
    pub f0_prime: Complex64,
}

impl InitialData {
    pub fn new(z0: Complex64, f0: Complex64, f0_prime: Complex64) -> Result<Self> {
        if f0 == ZERO && f0_prime == ZERO {
            return Err(Error::Degenerate("zero initial data gives the trivial solution".into()));
        }
        Ok(InitialData {
            z0: DiscPoint::new(z0)?,
            f0,
            f0_prime,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceSample {
    pub s: f64,
    pub z: Complex64,
    pub f: Complex64,
    pub fp: Complex64,
    /// `A(z)`, kept for dense output.
    pub a: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrace {
    pub path: PathSpec,
    pub samples: Vec<TraceSample>,
    /// Largest accepted local error estimate, in the units of the requested tolerance.
    pub tolerance_achieved: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn hermite(t: f64, dt: f64, y0: Complex64, d0: Complex64, y1: Complex64, d1: Complex64) -> Complex64 {
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + d0 * (dt * (t3 - 2.0 * t2 + t))
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + d1 * (dt * (t3 - t2))
}

impl SolutionTrace {
    /// Cubic Hermite dense output `(z, f, f')` at arclength `s`.
    pub fn at_arclength(&self, s: f64) -> (Complex64, Complex64, Complex64) {
        let n = self.samples.len();
        if n == 1 || s <= self.samples[0].s {
            let p = self.samples[0];
            return (p.z, p.f, p.fp);
        }
        let k = match self.samples.partition_point(|p| p.s <= s) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let (p, q) = (self.samples[k], self.samples[k + 1]);
        let dt = q.s - p.s;
        if dt <= 0.0 {
            return (q.z, q.f, q.fp);
        }
        let dir = (q.z - p.z) / (q.z - p.z).norm();
        let t = ((s - p.s) / dt).clamp(0.0, 1.0);
        let z = p.z + (q.z - p.z) * t;
        let f = hermite(t, dt, p.f, dir * p.fp, q.f, dir * q.fp);
        let fp = hermite(t, dt, p.fp, -dir * p.a * p.f, q.fp, -dir * q.a * q.f);
        (z, f, fp)
    }

    /// Table with columns z_re, z_im, f_re, f_im, fp_re, fp_im.
    pub fn to_table(&self) -> String {
        let mut out = String::from("z_re\tz_im\tf_re\tf_im\tfp_re\tfp_im\n");
        for p in &self.samples {
            out.push_str(&format!(
                "{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\n",
                p.z.re, p.z.im, p.f.re, p.f.im, p.fp.re, p.fp.im
            ));
        }
        out
    }
}

struct RawPoint<const N: usize> {
    s: f64,
    z: Complex64,
    y: [Complex64; N],
    a: Complex64,
}

struct RawTrace<const N: usize> {
    points: Vec<RawPoint<N>>,
    worst: f64,
    accepted: usize,
    rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn rhs<const N: usize>(dir: Complex64, a: Complex64, y: &[Complex64; N]) -> [Complex64; N] {
    let mut out = [ZERO; N];
    for k in 0..N / 2 {
        out[2 * k] = dir * y[2 * k + 1];
        out[2 * k + 1] = -dir * a * y[2 * k];
    }
    out
}

fn combo<const N: usize>(y: &[Complex64; N], h: f64, terms: &[(f64, &[Complex64; N])]) -> [Complex64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = ZERO;
        for (c, k) in terms {
            s += k[i] * *c;
        }
        out[i] += s * h;
    }
    out
}

fn run<const N: usize>(a: &dyn JetProvider, path: &PathSpec, y0: [Complex64; N], opts: &OdeOptions) -> Result<RawTrace<N>> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", opts.tol, "must be positive"));
    }
    for v in &path.vertices {
        if !(v.norm() <= 1.0 - 1e-6) {
            return Err(Error::outside(*v));
        }
    }
    let eval_a = |z: Complex64| -> Result<Complex64> {
        let v = a.eval(z)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("coefficient"))
        }
    };
    let z_start = path.start();
    let mut y = y0;
    let mut a_cur = eval_a(z_start)?;
    let mut points = vec![RawPoint { s: 0.0, z: z_start, y, a: a_cur }];
    let mut s_total = 0.0;
    let mut worst: f64 = 0.0;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut h_next: f64 = 1e-3;
    let mut err_old: f64 = 1e-4;
    for (p, q) in path.segments() {
        let len = (q - p).norm();
        if len == 0.0 {
            continue;
        }
        let dir = (q - p) / len;
        let mut s = 0.0;
        let mut k1 = rhs(dir, a_cur, &y);
        while s < len {
            let h = h_next;
            if accepted + rejected >= opts.max_steps {
                return Err(Error::StepBudget(opts.max_steps));
            }
            let z = p + dir * s;
            let h_cap = opts.max_step_factor * (1.0 - z.norm());
            let planned = h.min(h_cap);
            let last = len - s <= planned * (1.0 + 1e-12);
            let h = if last { len - s } else { planned };
            if h < 1e-14 * len.max(1.0) && !last {
                return Err(Error::StepUnderflow { re: z.re, im: z.im, h });
            }
            let at = |c: f64| p + dir * (s + c * h);
            let stage = || -> Result<([Complex64; N], [Complex64; N], Complex64)> {
                let y2 = combo(&y, h, &[(A21, &k1)]);
                let k2 = rhs(dir, eval_a(at(C2))?, &y2);
                let y3 = combo(&y, h, &[(A31, &k1), (A32, &k2)]);
                let k3 = rhs(dir, eval_a(at(C3))?, &y3);
                let y4 = combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
                let k4 = rhs(dir, eval_a(at(C4))?, &y4);
                let y5 = combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
                let k5 = rhs(dir, eval_a(at(C5))?, &y5);
                let y6 = combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
                let k6 = rhs(dir, eval_a(at(1.0))?, &y6);
                let ynew = combo(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let a_new = if last { eval_a(q)? } else { eval_a(at(1.0))? };
                let k7 = rhs(dir, a_new, &ynew);
                let mut err = [ZERO; N];
                for i in 0..N {
                    err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                }
                Ok((ynew, err, a_new))
            };
            let (ynew, errv, a_new) = stage()?;
            let mut err: f64 = 0.0;
            for i in 0..N {
                let sc = opts.tol * (1.0 + y[i].norm().max(ynew[i].norm()));
                err = err.max(errv[i].norm() / sc);
            }
            if !err.is_finite() {
                rejected += 1;
                h_next = h * 0.2;
                if h_next < 1e-14 {
                    return Err(Error::StepUnderflow { re: z.re, im: z.im, h: h_next });
                }
                continue;
            }
            if err <= 1.0 {
                accepted += 1;
                worst = worst.max(err);
                s = if last { len } else { s + h };
                y = ynew;
                a_cur = a_new;
                let z_new = if last { q } else { p + dir * s };
                points.push(RawPoint {
                    s: s_total + s,
                    z: z_new,
                    y,
                    a: a_cur,
                });
                k1 = rhs(dir, a_cur, &y);
                let e = err.max(1e-10);
                let fac = 0.9 * e.powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
                h_next = planned.max(h) * fac.clamp(0.2, 5.0);
                err_old = e;
            } else {
                rejected += 1;
                h_next = h * (0.9 * err.powf(-0.2)).max(0.2);
                if h_next < 1e-14 * len.max(1.0) {
                    return Err(Error::StepUnderflow { re: z.re, im: z.im, h: h_next });
                }
            }
        }
        s_total += len;
    }
    Ok(RawTrace {
        points,
        worst,
        accepted,
        rejected,
    })
}

pub fn integrate(a: &dyn JetProvider, init: &InitialData, path: &PathSpec, opts: &OdeOptions) -> Result<SolutionTrace> {
    if (path.start() - init.z0.get()).norm() > 1e-15 {
        return Err(Error::Degenerate("path does not start at the initial point".into()));
    }
    let raw = run::<2>(a, path, [init.f0, init.f0_prime], opts)?;
    Ok(SolutionTrace {
        path: path.clone(),
        samples: raw
            .points
            .iter()
            .map(|p| TraceSample {
                s: p.s,
                z: p.z,
                f: p.y[0],
                fp: p.y[1],
                a: p.a,
            })
            .collect(),
        tolerance_achieved: raw.worst * opts.tol,
        accepted: raw.accepted,
        rejected: raw.rejected,
    })
}

/// Taylor jet of the solution with `f(z) = f`, `f'(z) = fp`, from the jet of `A` at `z`.
pub fn taylor_from_ode(a: &Jet, f: Complex64, fp: Complex64, order: usize) -> Jet {
    let mut c = vec![ZERO; order + 1];
    c[0] = f;
    if order >= 1 {
        c[1] = fp;
    }
    for n in 0..order.saturating_sub(1) {
        let mut s = ZERO;
        for j in 0..=n {
            s += a.taylor(j) * c[n - j];
        }
        c[n + 2] = -s / ((n + 2) * (n + 1)) as f64;
    }
    Jet::from_taylor(&c)
}

#[derive(Clone, Copy, Debug)]
struct Anchor {
    z: Complex64,
    f: Complex64,
    fp: Complex64,
}

/// Solution known through stored samples; other points are reached by re-integration
/// from the nearest sample.
pub struct OdeTraceProvider {
    a: Provider,
    anchors: Arc<Vec<Anchor>>,
    opts: OdeOptions,
    name: String,
}

impl OdeTraceProvider {
    fn state_at(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let near = self
            .anchors
            .iter()
            .min_by(|p, q| (p.z - z).norm().total_cmp(&(q.z - z).norm()))
            .expect("trace has samples");
        if (near.z - z).norm() == 0.0 {
            return Ok((near.f, near.fp));
        }
        let path = PathSpec::straight(near.z, z)?;
        let raw = run::<2>(self.a.as_ref(), &path, [near.f, near.fp], &self.opts)?;
        let last = raw.points.last().expect("trace has points");
        Ok((last.y[0], last.y[1]))
    }
}

impl JetProvider for OdeTraceProvider {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        check_in_disc(z)?;
        let (f, fp) = self.state_at(z)?;
        let a = self.a.jet(z, order.saturating_sub(2))?;
        check_finite(taylor_from_ode(&a, f, fp, order), "ode trace")
    }

    fn describe(&self) -> String {
        format!("ode-trace:{}", self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisSample {
    pub s: f64,
    pub z: Complex64,
    pub f1: Complex64,
    pub df1: Complex64,
    pub f2: Complex64,
    pub df2: Complex64,
}

impl BasisSample {
    pub fn wronskian(&self) -> Complex64 {
        self.f1 * self.df2 - self.df1 * self.f2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisTrace {
    pub path: PathSpec,
    pub samples: Vec<BasisSample>,
}

/// Two independent solutions and their (constant) Wronskian.
#[derive(Clone)]
pub struct SolutionBasis {
    pub f1: Provider,
    pub f2: Provider,
    pub wronskian: Complex64,
    /// Integration traces when the basis came from the stepper.
    pub traces: Vec<BasisTrace>,
}

impl std::fmt::Debug for SolutionBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolutionBasis")
            .field("f1", &self.f1.describe())
            .field("f2", &self.f2.describe())
            .field("wronskian", &self.wronskian)
            .finish()
    }
}

impl SolutionBasis {
    pub fn new(f1: Provider, f2: Provider, wronskian: Complex64) -> Result<Self> {
        if wronskian == ZERO || !wronskian.norm().is_finite() {
            return Err(Error::Degenerate("Wronskian must be a nonzero constant".into()));
        }
        Ok(SolutionBasis {
            f1,
            f2,
            wronskian,
            traces: vec![],
        })
    }

    pub fn wronskian_at(&self, z: Complex64) -> Result<Complex64> {
        let j1 = self.f1.jet(z, 1)?;
        let j2 = self.f2.jet(z, 1)?;
        Ok(j1.value() * j2.derivative(1) - j1.derivative(1) * j2.value())
    }

    /// Largest `|W(z) - W| / |W|` over the points.
    pub fn audit_wronskian(&self, points: &[Complex64]) -> Result<f64> {
        let devs: Vec<f64> = points
            .par_iter()
            .map(|&z| self.wronskian_at(z).map(|w| (w - self.wronskian).norm() / self.wronskian.norm()))
            .collect::<Result<_>>()?;
        Ok(devs.into_iter().fold(0.0, f64::max))
    }

    /// `f1 / f2`.
    pub fn quotient(&self) -> Provider {
        let (f1, f2) = (self.f1.clone(), self.f2.clone());
        crate::provider::Composite::new("f1/f2", move |z, k| {
            let d = f2.jet(z, k)?;
            if d.value().norm() < 1e-300 {
                return Err(Error::near_zero("f2", z, d.value().norm()));
            }
            Ok(f1.jet(z, k)? / d)
        })
    }

    /// The product `f1 f2`.
    pub fn product(&self) -> Provider {
        let (f1, f2) = (self.f1.clone(), self.f2.clone());
        crate::provider::Composite::new("f1*f2", move |z, k| Ok(f1.jet(z, k)? * f2.jet(z, k)?))
    }
}

/// Radial segments from the origin at angles `2 pi k / count`.
pub fn radial_family(count: usize, r: f64) -> Result<Vec<PathSpec>> {
    (0..count)
        .map(|k| PathSpec::radial(2.0 * PI * k as f64 / count as f64, r))
        .collect()
}

/// Basis with initial jets (1, 0) and (0, 1) at `z0`, integrated along every path.
pub fn propagate_basis(a: Provider, z0: DiscPoint, paths: &[PathSpec], opts: &OdeOptions) -> Result<SolutionBasis> {
    for p in paths {
        if (p.start() - z0.get()).norm() > 1e-15 {
            return Err(Error::Degenerate("path does not start at the base point".into()));
        }
    }
    let raws: Vec<RawTrace<4>> = paths
        .par_iter()
        .map(|p| run::<4>(a.as_ref(), p, [ONE, ZERO, ZERO, ONE], opts))
        .collect::<Result<_>>()?;
    let mut anchors1 = vec![];
    let mut anchors2 = vec![];
    let mut traces = vec![];
    for (raw, path) in raws.iter().zip(paths) {
        let mut samples = vec![];
        for p in &raw.points {
            anchors1.push(Anchor { z: p.z, f: p.y[0], fp: p.y[1] });
            anchors2.push(Anchor { z: p.z, f: p.y[2], fp: p.y[3] });
            samples.push(BasisSample {
                s: p.s,
                z: p.z,
                f1: p.y[0],
                df1: p.y[1],
                f2: p.y[2],
                df2: p.y[3],
            });
        }
        traces.push(BasisTrace {
            path: path.clone(),
            samples,
        });
    }
    if paths.is_empty() {
        anchors1.push(Anchor { z: z0.get(), f: ONE, fp: ZERO });
        anchors2.push(Anchor { z: z0.get(), f: ZERO, fp: ONE });
    }
    let make = |anchors: Vec<Anchor>, name: &str| -> Provider {
        Arc::new(OdeTraceProvider {
            a: a.clone(),
            anchors: Arc::new(anchors),
            opts: *opts,
            name: format!("{name}[{}]", a.describe()),
        })
    };
    Ok(SolutionBasis {
        f1: make(anchors1, "f1"),
        f2: make(anchors2, "f2"),
        wronskian: ONE,
        traces,
    })
}

const QUAD_TOL: f64 = 1e-14;
const CAUCHY_NODES: usize = 128;

/// `f1(z) * integral from alpha to z of dzeta / f1(zeta)^2`, along a path avoiding the exclusions.
pub fn second_solution(f1: &dyn JetProvider, alpha: DiscPoint, z: DiscPoint, exclusions: &[Exclusion]) -> Result<Complex64> {
    let path = build_avoiding_path(alpha.get(), z.get(), exclusions)?;
    let i = path_integral(f1, &path)?;
    Ok(f1.eval(z.get())? * i)
}

fn path_integral(f1: &dyn JetProvider, path: &PathSpec) -> Result<Complex64> {
    let mut total = ZERO;
    for (a, b) in path.segments() {
        let d = b - a;
        let g = |t: f64| -> Result<Complex64> {
            let w = a + d * t;
            let v = f1.eval(w)?;
            if v.norm() < 1e-12 {
                return Err(Error::near_zero("f1 on the integration path", w, v.norm()));
            }
            Ok(d / (v * v))
        };
        total += quad::adaptive(&g, 0.0, 1.0, QUAD_TOL)?;
    }
    Ok(total)
}

/// Reduction-of-order solution as a provider. Inside half of an exclusion disc the
/// jet comes from the Cauchy formula on a circle within that disc.
pub struct SecondSolution {
    f1: Provider,
    alpha: Complex64,
    exclusions: Vec<Exclusion>,
    circles: Vec<OnceLock<Result<Vec<(Complex64, Complex64)>>>>,
}

impl SecondSolution {
    pub fn new(f1: Provider, alpha: Complex64, exclusions: Vec<Exclusion>) -> Result<Arc<Self>> {
        DiscPoint::new(alpha)?;
        if let Some(e) = exclusions.iter().find(|e| e.contains(alpha)) {
            return Err(Error::Degenerate(format!(
                "base point lies inside the exclusion around {}",
                e.center.get()
            )));
        }
        let circles = exclusions.iter().map(|_| OnceLock::new()).collect();
        Ok(Arc::new(SecondSolution {
            f1,
            alpha,
            exclusions,
            circles,
        }))
    }

    fn direct(&self, z: Complex64, order: usize) -> Result<Jet> {
        let path = build_avoiding_path(self.alpha, z, &self.exclusions)?;
        let i0 = path_integral(self.f1.as_ref(), &path)?;
        let f = self.f1.jet(z, order)?;
        if order == 0 {
            return Ok(f * i0);
        }
        let inv2 = (f * f).truncate(order - 1).recip();
        Ok(f * inv2.integrate(i0))
    }

    fn circle(&self, k: usize) -> (Complex64, f64) {
        let (c, r) = self.exclusions[k].euclidean();
        (c, 0.8 * r)
    }

    fn circle_values(&self, k: usize) -> Result<&Vec<(Complex64, Complex64)>> {
        let cached = self.circles[k].get_or_init(|| {
            let (c, rho) = self.circle(k);
            (0..CAUCHY_NODES)
                .into_par_iter()
                .map(|j| {
                    let w = c + Complex64::from_polar(rho, 2.0 * PI * j as f64 / CAUCHY_NODES as f64);
                    self.direct(w, 0).map(|v| (w, v.value()))
                })
                .collect()
        });
        cached.as_ref().map_err(|e| e.clone())
    }
}

impl JetProvider for SecondSolution {
    fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        check_order(order)?;
        check_in_disc(z)?;
        let inner = self
            .exclusions
            .iter()
            .position(|e| pseudo_hyperbolic(z, e.center.get()) < 0.5 * e.radius);
        let Some(k) = inner else {
            return check_finite(self.direct(z, order)?, "second solution");
        };
        let (c, rho) = self.circle(k);
        let vals = self.circle_values(k)?;
        let n = vals.len() as f64;
        let mut d = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for m in 0..=order {
            if m > 0 {
                fact *= m as f64;
            }
            let s: Complex64 = vals
                .iter()
                .map(|(w, v)| v * (w - c) / (w - z).powi(m as i32 + 1))
                .sum();
            d.push(s * fact / n);
        }
        let _ = rho;
        check_finite(Jet::from_derivatives(&d), "second solution")
    }

    fn describe(&self) -> String {
        format!("composite:reduction-of-order[{}]", self.f1.describe())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max: f64,
    pub argmax: Complex64,
    pub points: usize,
}

/// `max |f'' + A f| / (1 + |f|)` over the points.
pub fn residual_at(a: &dyn JetProvider, f: &dyn JetProvider, points: &[Complex64]) -> Result<ResidualReport> {
    let vals: Vec<f64> = points
        .par_iter()
        .map(|&z| -> Result<f64> {
            let fj = f.jet(z, 2)?;
            let av = a.eval(z)?;
            Ok((fj.derivative(2) + av * fj.value()).norm() / (1.0 + fj.value().norm()))
        })
        .collect::<Result<_>>()?;
    let mut rep = ResidualReport {
        max: 0.0,
        argmax: ZERO,
        points: points.len(),
    };
    for (v, z) in vals.iter().zip(points) {
        if *v > rep.max || v.is_nan() {
            rep.max = *v;
            rep.argmax = *z;
        }
    }
    Ok(rep)
}

pub fn residual(a: &dyn JetProvider, f: &dyn JetProvider, grid: &SampleGrid) -> Result<ResidualReport> {
    residual_at(a, f, &grid.points())
}

/// Grid points outside every exclusion disc.
pub fn points_outside(grid: &SampleGrid, exclusions: &[Exclusion]) -> Vec<Complex64> {
    grid.points()
        .into_iter()
        .filter(|z| !exclusions.iter().any(|e| e.contains(*z)))
        .collect()
}

/// Newton refinement from local minima of `|f|` on the grid.
pub fn find_zeros(f: &dyn JetProvider, grid: &SampleGrid, r_max: f64) -> Vec<DiscPoint> {
    let mods: Vec<f64> = grid
        .nodes
        .par_iter()
        .map(|n| f.eval(n.z).map(|v| v.norm()).unwrap_or(f64::INFINITY))
        .collect();
    let seeds: Vec<Complex64> = (0..grid.nodes.len())
        .filter(|&i| mods[i].is_finite() && grid.neighbours(i).iter().all(|&j| mods[i] <= mods[j]))
        .map(|i| grid.nodes[i].z)
        .collect();
    let found: Vec<Option<Complex64>> = seeds.par_iter().map(|&z| newton(f, z)).collect();
    let mut roots: Vec<Complex64> = vec![];
    for z in found.into_iter().flatten() {
        if z.norm() > r_max {
            continue;
        }
        match f.eval(z) {
            Ok(v) if v.norm() <= 1e-10 => {}
            _ => continue,
        }
        if roots.iter().all(|r| pseudo_hyperbolic(*r, z) >= 1e-6) {
            roots.push(z);
        }
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    roots.into_iter().filter_map(|z| DiscPoint::new(z).ok()).collect()
}

fn newton(f: &dyn JetProvider, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..200 {
        let j = f.jet(z, 1).ok()?;
        let (v, d) = (j.value(), j.derivative(1));
        if v == ZERO {
            return Some(z);
        }
        if d == ZERO {
            return None;
        }
        let step = v / d;
        let step = if step.norm() > 0.25 { step * (0.25 / step.norm()) } else { step };
        z -= step;
        if !(z.norm() < 1.0) {
            return None;
        }
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::FiniteBlaschke;
    use crate::geometry::{make_grid, Spacing};
    use crate::provider::ClosedForm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(v: f64) -> Provider {
        ClosedForm::new("const", move |z| z * 0.0 + v)
    }

    fn end_value(a: &dyn JetProvider, f0: Complex64, fp0: Complex64, to: Complex64) -> (Complex64, Complex64) {
        let init = InitialData::new(c(0.0, 0.0), f0, fp0).unwrap();
        let tr = integrate(a, &init, &PathSpec::straight(c(0.0, 0.0), to).unwrap(), &OdeOptions::default()).unwrap();
        let last = tr.samples.last().unwrap();
        (last.f, last.fp)
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let (f, fp) = end_value(constant(0.0).as_ref(), c(0.0, 0.0), c(1.0, 0.0), c(0.7, 0.0));
        assert!((f - c(0.7, 0.0)).norm() < 1e-13);
        assert!((fp - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn unit_coefficient_gives_sine() {
        let (f, _) = end_value(constant(1.0).as_ref(), c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0));
        assert!((f.re - 0.479_425_538_604_203).abs() < 1e-12);
    }

    #[test]
    fn legendre_coefficient_gives_root() {
        let a = ClosedForm::new("leg", |z| (1.0 - z * z).powi(-2));
        let (f, _) = end_value(a.as_ref(), c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!((f.re - 0.75f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_between_samples() {
        let init = InitialData::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let path = PathSpec::straight(c(0.0, 0.0), c(0.0, 0.6)).unwrap();
        let tr = integrate(constant(1.0).as_ref(), &init, &path, &OdeOptions::default()).unwrap();
        let (z, f, fp) = tr.at_arclength(0.3337);
        assert!((f - z.sin()).norm() < 1e-8);
        assert!((fp - z.cos()).norm() < 1e-8);
    }

    #[test]
    fn zero_initial_data_rejected() {
        assert!(InitialData::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn path_must_stay_away_from_boundary() {
        let init = InitialData::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let path = PathSpec::straight(c(0.0, 0.0), c(0.9999999, 0.0)).unwrap();
        assert!(matches!(
            integrate(constant(0.0).as_ref(), &init, &path, &OdeOptions::default()),
            Err(Error::OutsideDisc { .. })
        ));
    }

    #[test]
    fn propagated_basis_reproduces_cos_sin_off_trace() {
        let paths = radial_family(4, 0.8).unwrap();
        let b = propagate_basis(constant(1.0), DiscPoint::origin(), &paths, &OdeOptions::default()).unwrap();
        let z = c(0.3, 0.4);
        let j1 = b.f1.jet(z, 3).unwrap();
        let j2 = b.f2.jet(z, 3).unwrap();
        assert!((j1.value() - z.cos()).norm() < 1e-10);
        assert!((j2.value() - z.sin()).norm() < 1e-10);
        assert!((j1.derivative(3) - z.sin()).norm() < 1e-10);
        assert!((b.wronskian_at(z).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn reduction_of_order_examples() {
        let one = ClosedForm::new("one", |z| z * 0.0 + 1.0);
        let v = second_solution(one.as_ref(), DiscPoint::origin(), DiscPoint::from_re_im(0.4, 0.0).unwrap(), &[]).unwrap();
        assert!((v - c(0.4, 0.0)).norm() < 1e-15);
        let f1 = ClosedForm::new("leg", |z| (1.0 - z * z).sqrt());
        let v = second_solution(f1.as_ref(), DiscPoint::origin(), DiscPoint::from_re_im(0.5, 0.0).unwrap(), &[]).unwrap();
        assert!((v.re - 0.75f64.sqrt() * 0.5f64.atanh()).abs() < 1e-14);
    }

    #[test]
    fn second_solution_near_a_zero_uses_the_circle() {
        // f1 = z - 0.3 has W(f1, f2) = 1 with f2 = (z - 0.3) * integral of (zeta - 0.3)^-2.
        let f1 = ClosedForm::new("lin", |z| z - 0.3);
        let ex = vec![Exclusion::new(c(0.3, 0.0), 0.2).unwrap()];
        let f2 = SecondSolution::new(f1.clone(), c(-0.2, 0.0), ex).unwrap();
        let basis = SolutionBasis::new(f1, f2.clone(), c(1.0, 0.0)).unwrap();
        for z in [c(0.3, 0.0), c(0.32, 0.01), c(0.0, 0.5)] {
            let w = basis.wronskian_at(z).unwrap();
            assert!((w - 1.0).norm() < 1e-10, "{z} {w} {}", f2.eval(z).unwrap());
        }
        // Exact: f2 = (z - 0.3) (1/(-0.5) - 1/(z - 0.3)) = -2 (z - 0.3) - 1.
        assert!((f2.eval(c(0.3, 0.0)).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let grid = make_grid(32, 64, 0.9, Spacing::Uniform).unwrap();
        let cosf = ClosedForm::new("cos", |z| z.cos());
        assert!(residual(constant(1.0).as_ref(), cosf.as_ref(), &grid).unwrap().max <= 1e-12);
        let id = ClosedForm::new("id", |z| z);
        assert!(residual(constant(1.0).as_ref(), id.as_ref(), &grid).unwrap().max > 0.4);
    }

    #[test]
    fn zeros_of_blaschke_and_sine() {
        let grid = make_grid(32, 64, 0.9, Spacing::BoundaryRefined).unwrap();
        let b = FiniteBlaschke::new(&[c(0.3, 0.0), c(0.0, -0.5)]).unwrap();
        let zs = find_zeros(&b, &grid, 0.9);
        assert_eq!(zs.len(), 2);
        assert!((zs[0].get() - c(0.3, 0.0)).norm() < 1e-10);
        assert!((zs[1].get() - c(0.0, -0.5)).norm() < 1e-10);
        let s = ClosedForm::new("sin", |z| (z * PI).sin());
        let zs = find_zeros(s.as_ref(), &grid, 0.9);
        assert_eq!(zs.len(), 1);
        assert!(zs[0].get().norm() < 1e-12);
    }
}
