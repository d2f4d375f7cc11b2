//! Values checked against hand-derived formulas rather than the library's own jets.

use discode::aux::schwarzian;
use discode::blaschke::FiniteBlaschke;
use discode::gallery::{self, ENTRY_NAMES};
use discode::geometry::{circle_mean, make_grid, Spacing};
use discode::measures::{carleson_constant, DensityMeasure};
use discode::ode::find_zeros;
use discode::provider::ClosedForm;
use discode::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_points(n: usize, r_max: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::from_polar(r_max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

fn with_p(name: &str) -> gallery::GalleryEntry {
    let mut p = BTreeMap::new();
    if name.starts_with("thm1") {
        p.insert("p".to_string(), 0.25);
    }
    gallery::get_entry(name, &p).unwrap()
}

#[test]
fn legendre_wronskian_by_hand() {
    let e = gallery::entry("legendre").unwrap();
    let f2p = e.f2.clone().unwrap();
    for z in random_points(50, 0.95, 1) {
        let one = c(1.0, 0.0);
        let f1 = (one - z * z).sqrt();
        let l = ((one + z) / (one - z)).ln();
        let d1 = -z / f1;
        let f2 = f1 * l;
        let d2 = d1 * l + f1 * 2.0 / (one - z * z);
        let w = f1 * d2 - d1 * f2;
        assert!((w - 2.0).norm() <= 1e-10, "{z}: {w}");
        assert!((e.f1.eval(z).unwrap() - f1).norm() <= 1e-13 * (1.0 + f1.norm()));
        assert!((f2p.eval(z).unwrap() - f2).norm() <= 1e-13 * (1.0 + f2.norm()));
    }
}

#[test]
fn jets_agree_with_central_differences() {
    let h = 1e-5;
    for name in ENTRY_NAMES {
        let e = with_p(name);
        for z in random_points(20, 0.7, 2) {
            for p in [&e.f1, &e.a] {
                let j = p.jet(z, 2).unwrap();
                let fd = (p.eval(z + h).unwrap() - p.eval(z - h).unwrap()) / (2.0 * h);
                let fd2 = (p.eval(z + h).unwrap() - 2.0 * j.value() + p.eval(z - h).unwrap()) / (h * h);
                let d1 = j.derivative(1);
                assert!((fd - d1).norm() <= 1e-6 * (1.0 + d1.norm()), "{name} at {z}: {fd} vs {d1}");
                let d2 = j.derivative(2);
                let fdi = (p.eval(z + c(0.0, h)).unwrap() - p.eval(z - c(0.0, h)).unwrap()) / (2.0 * h);
                assert!((fdi - c(0.0, 1.0) * d1).norm() <= 1e-6 * (1.0 + d1.norm()), "{name}: not analytic at {z}");
                assert!((fd2 - d2).norm() <= 1e-4 * (1.0 + d2.norm()), "{name} at {z}: {fd2} vs {d2}");
            }
        }
    }
}

#[test]
fn exp_singular_is_bounded_by_one() {
    let e = gallery::entry("exp_singular").unwrap();
    let grid = make_grid(64, 256, 0.999, Spacing::BoundaryRefined).unwrap();
    let worst = grid.points().iter().map(|&z| e.f1.eval(z).unwrap().norm()).fold(0.0, f64::max);
    assert!(worst <= 1.0, "{worst}");
    assert!(worst > 0.9);
}

#[test]
fn log_univalent_schwarzian_by_hand() {
    // h = -log(1 - z): S_h = 1 / (2 (1 - z)^2), so A = 1 / (4 (1 - z)^2).
    let e = gallery::entry("log_univalent").unwrap();
    let hq = ClosedForm::new("-log(1-z)", |z| -(1.0 - z).ln());
    for z in random_points(30, 0.9, 3) {
        let expected = 0.25 / ((1.0 - z) * (1.0 - z));
        assert!((e.a.eval(z).unwrap() - expected).norm() <= 1e-12 * expected.norm());
        let s = schwarzian(hq.as_ref(), z).unwrap();
        assert!((s - 2.0 * expected).norm() <= 1e-10 * expected.norm());
    }
}

#[test]
fn circle_mean_of_harmonic_function() {
    let m: f64 = circle_mean(|z| Ok((1.0 / (1.0 - z)).re), 0.5, 64).unwrap();
    assert!((m - 1.0).abs() <= 1e-15);
    let m: f64 = circle_mean(|z| Ok(z.norm_sqr()), 0.5, 7).unwrap();
    assert!((m - 0.25).abs() <= 1e-15);
}

#[test]
fn zero_finder_examples() {
    let grid = make_grid(32, 128, 0.9, Spacing::Uniform).unwrap();
    let sine = ClosedForm::new("sin(pi z)", |z| (z * std::f64::consts::PI).sin());
    let zs = find_zeros(sine.as_ref(), &grid, 0.9);
    assert_eq!(zs.len(), 1);
    assert!(zs[0].get().norm() <= 1e-10);

    let b = FiniteBlaschke::new(&[c(0.3, 0.0), c(0.0, -0.5)]).unwrap();
    let mut zs: Vec<Complex64> = find_zeros(&b, &grid, 0.9).into_iter().map(|p| p.get()).collect();
    zs.sort_by(|a, b| a.re.total_cmp(&b.re));
    assert_eq!(zs.len(), 2);
    assert!((zs[0] - c(0.0, -0.5)).norm() <= 1e-10);
    assert!((zs[1] - c(0.3, 0.0)).norm() <= 1e-10);

    let e = with_p("thm1_i");
    assert!(find_zeros(e.f1.as_ref(), &grid, 0.9).is_empty());
}

#[test]
fn carleson_constant_is_linear_and_monotone() {
    let one = DensityMeasure::new("1", |_| Ok(1.0));
    let two = DensityMeasure::new("2", |_| Ok(2.0));
    let c1 = carleson_constant(&one, None, 0.9).unwrap().constant;
    let c2 = carleson_constant(&two, None, 0.9).unwrap().constant;
    assert!((c2 - 2.0 * c1).abs() <= 1e-12 * c2);

    let e = gallery::entry("legendre").unwrap();
    let mu = DensityMeasure::coefficient(e.a.clone());
    let small = carleson_constant(&mu, None, 0.9).unwrap().constant;
    let large = carleson_constant(&mu, None, 0.99).unwrap().constant;
    assert!(small <= large, "{small} > {large}");
}
