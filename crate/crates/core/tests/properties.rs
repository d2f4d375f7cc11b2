use discode::aux::{basis_schwarzian, identity_residuals_richardson};
use discode::blaschke::{separation_constant, FiniteBlaschke};
use discode::formats::{parse_exclusions, parse_fixed_point_spec, parse_point_list, read_points, write_point_list};
use discode::gallery;
use discode::geometry::{build_avoiding_path, check_disjoint, circle_mean, make_grid, mobius, pseudo_hyperbolic, Exclusion, PathSpec, Spacing};
use discode::interpolation::{earl_eta, lagrange_blaschke_solve, hermite_solve, HermiteProblem, InterpolationProblem};
use discode::jet::Jet;
use discode::ode::{integrate, InitialData, OdeOptions, SolutionBasis};
use discode::provider::{Composite, JetProvider, Provider};
use discode::report::{AuditRow, Report};
use discode::Complex64;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn disc(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..TAU).prop_map(|(m, t)| Complex64::from_polar(m, t))
}

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| Complex64::new(a, b))
}

fn separated(points: &[Complex64], gap: f64) -> bool {
    (0..points.len()).all(|i| (i + 1..points.len()).all(|j| pseudo_hyperbolic(points[i], points[j]) >= gap))
}

fn combine(f1: Provider, f2: Provider, a: Complex64, b: Complex64) -> Provider {
    Composite::new("a f1 + b f2", move |z, order| Ok(f1.jet(z, order)? * a + f2.jet(z, order)? * b))
}

proptest! {
    #[test]
    fn mobius_is_an_involution(a in disc(0.95), z in disc(0.95)) {
        prop_assert!((mobius(a, mobius(a, z)) - z).norm() <= 1e-12);
    }

    #[test]
    fn pseudo_hyperbolic_is_mobius_invariant(a in disc(0.9), z in disc(0.9), w in disc(0.9)) {
        let d = pseudo_hyperbolic(z, w);
        prop_assert!((pseudo_hyperbolic(mobius(a, z), mobius(a, w)) - d).abs() <= 1e-12);
        prop_assert!((pseudo_hyperbolic(w, z) - d).abs() <= 1e-15);
        prop_assert!((0.0..1.0).contains(&d));
    }

    #[test]
    fn separation_is_mobius_invariant(zs in prop::collection::vec(disc(0.9), 2..7), a in disc(0.8)) {
        let moved: Vec<Complex64> = zs.iter().map(|&z| mobius(a, z)).collect();
        let d0 = separation_constant(&zs).unwrap();
        let d1 = separation_constant(&moved).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-12, "{d0} vs {d1}");
    }

    #[test]
    fn blaschke_unimodular_on_circle(zs in prop::collection::vec(disc(0.99), 1..31)) {
        let b = FiniteBlaschke::new(&zs).unwrap();
        for k in 0..256 {
            let v = b.eval_jet(Complex64::from_polar(1.0, TAU * k as f64 / 256.0), 0).unwrap().value();
            prop_assert!((v.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn blaschke_schwarz_bound(zs in prop::collection::vec(disc(0.95), 1..12), z in disc(0.999)) {
        let b = FiniteBlaschke::new(&zs).unwrap();
        prop_assert!(b.eval(z).unwrap().norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn blaschke_deleted_product(zs in prop::collection::vec(disc(0.9), 2..8)) {
        prop_assume!(separated(&zs, 1e-3));
        let b = FiniteBlaschke::new(&zs).unwrap();
        for (n, &zn) in zs.iter().enumerate() {
            let deleted: f64 = zs.iter().enumerate().filter(|&(k, _)| k != n).map(|(_, &zk)| pseudo_hyperbolic(zk, zn)).product();
            let lhs = b.derivative_at_zero(zn).unwrap().norm() * (1.0 - zn.norm_sqr());
            prop_assert!((lhs - deleted).abs() <= 1e-12, "{lhs} vs {deleted}");
        }
    }

    #[test]
    fn circle_mean_kills_nonconstant_harmonics(k in 1i32..16, c in complex(2.0), r in 0.05f64..0.95) {
        let m: f64 = circle_mean(|z| Ok((c * z.powi(k)).re + 0.5), r, 16).unwrap();
        prop_assert!((m - 0.5).abs() <= 1e-14);
    }

    #[test]
    fn grid_area_is_exact(radial in 1usize..40, angular in 1usize..64, r_max in 0.1f64..0.99, refined in any::<bool>()) {
        let spacing = if refined { Spacing::BoundaryRefined } else { Spacing::Uniform };
        let grid = make_grid(radial, angular, r_max, spacing);
        prop_assume!(grid.is_ok() || (refined && radial < 3));
        let Ok(grid) = grid else { return Ok(()) };
        let area = grid.integrate(|_| Ok(1.0)).unwrap();
        prop_assert!((area - PI * r_max * r_max).abs() <= 1e-12);
    }

    #[test]
    fn lagrange_interpolates_nodes(nodes in prop::collection::vec(disc(0.8), 1..7), seed in prop::collection::vec(disc(1.0), 7)) {
        prop_assume!(separated(&nodes, 0.2));
        let targets = &seed[..nodes.len()];
        let problem = InterpolationProblem::new(&nodes, targets).unwrap();
        let (h, report) = lagrange_blaschke_solve(&problem).unwrap();
        for (z, w) in nodes.iter().zip(targets) {
            prop_assert!((h.eval(*z).unwrap() - w).norm() <= 1e-10);
        }
        prop_assert!(report.node_error <= 1e-10);
        prop_assert!(report.grid_norm <= report.a_priori_bound * (1.0 + 1e-9));
    }

    #[test]
    fn hermite_matches_values_and_slopes(nodes in prop::collection::vec(disc(0.8), 1..5), vals in prop::collection::vec(complex(1.0), 5), ders in prop::collection::vec(complex(1.0), 5)) {
        prop_assume!(separated(&nodes, 0.25));
        let n = nodes.len();
        let g = hermite_solve(&HermiteProblem::new(&nodes, &vals[..n], &ders[..n]).unwrap()).unwrap();
        for k in 0..n {
            let j = g.jet(nodes[k], 1).unwrap();
            prop_assert!((j.value() - vals[k]).norm() <= 1e-10);
            prop_assert!((j.derivative(1) - ders[k]).norm() <= 1e-10);
        }
    }

    #[test]
    fn earl_eta_is_small_and_monotone(d in 1e-6f64..1.0, t in 0.0f64..1.0) {
        let eta = earl_eta(d).unwrap();
        prop_assert!(eta > 0.0 && eta < d);
        let d2 = d + t * (1.0 - d);
        prop_assert!(earl_eta(d2).unwrap() >= eta);
    }

    #[test]
    fn point_lists_round_trip(zs in prop::collection::vec(complex(1e3), 0..20)) {
        let text = write_point_list(&zs);
        prop_assert_eq!(parse_point_list(&text).unwrap(), zs.clone());
        prop_assert_eq!(read_points(&text).unwrap(), zs);
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,80}") {
        let _ = parse_point_list(&text);
        let _ = read_points(&text);
        let _ = parse_fixed_point_spec(&text);
        let _ = parse_exclusions(&text);
    }

    #[test]
    fn parsers_never_panic_on_numeric_noise(text in "[-0-9.eE \n\\[\\],a-z{}\":]{0,80}") {
        let _ = read_points(&text);
        let _ = parse_fixed_point_spec(&text);
        let _ = parse_exclusions(&text);
    }

    #[test]
    fn jet_exp_ln_round_trip(c in prop::collection::vec(complex(1.0), 6)) {
        prop_assume!(c[0].norm() > 0.1);
        let j = Jet::from_taylor(&c);
        let back = j.ln().exp();
        for k in 0..6 {
            prop_assert!((back.taylor(k) - j.taylor(k)).norm() <= 1e-10 * (1.0 + j.max_norm()));
        }
        let one = j.recip() * j;
        prop_assert!((one.value() - 1.0).norm() <= 1e-12);
        for k in 1..6 {
            prop_assert!(one.taylor(k).norm() <= 1e-9);
        }
    }

    #[test]
    fn report_sorting_is_canonical(keys in prop::collection::vec("[a-z]{1,6}(/[a-z0-9]{1,4})?", 0..20)) {
        let mut rep = Report::new();
        for (i, k) in keys.iter().enumerate() {
            rep.push(AuditRow::at_most(k.clone(), "q", i as f64, 1e9, "claim"));
        }
        let sorted = rep.clone().sorted();
        prop_assert_eq!(sorted.rows.len(), keys.len());
        prop_assert!(sorted.rows.windows(2).all(|w| w[0].key <= w[1].key));
        let mut reversed = Report::new();
        for r in rep.rows.iter().rev() {
            reversed.push(r.clone());
        }
        let sorted_keys: Vec<_> = sorted.rows.iter().map(|r| r.key.clone()).collect();
        let other_keys: Vec<_> = reversed.sorted().rows.iter().map(|r| r.key.clone()).collect();
        prop_assert_eq!(sorted_keys, other_keys);
        prop_assert_eq!(rep.to_json_lines().lines().count(), keys.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_change_leaves_identities_invariant(a in complex(2.0), b in complex(2.0), c in complex(2.0), d in complex(2.0), z in disc(0.6)) {
        let det = a * d - b * c;
        prop_assume!(det.norm() >= 0.5);
        let e = gallery::entry("legendre").unwrap();
        let base = e.basis().unwrap();
        let g1 = combine(base.f1.clone(), base.f2.clone(), a, b);
        let g2 = combine(base.f1.clone(), base.f2.clone(), c, d);
        prop_assume!(g1.eval(z).unwrap().norm() + g2.eval(z).unwrap().norm() > 1e-3);
        let changed = SolutionBasis::new(g1, g2, det * base.wronskian).unwrap();
        let av = e.a.eval(z).unwrap();
        let s = basis_schwarzian(&changed, z).unwrap();
        prop_assert!((s - 2.0 * av).norm() <= 1e-8 * (1.0 + av.norm()), "S = {s}, 2A = {}", 2.0 * av);
        let r = identity_residuals_richardson(&changed, e.a.as_ref(), z, 1e-3).unwrap();
        prop_assert!(r.r3 <= 1e-9, "r3 = {}", r.r3);
        prop_assert!(r.r1 <= 1e-7, "r1 = {}", r.r1);
    }

    #[test]
    fn avoiding_paths_stay_out(centres in prop::collection::vec(disc(0.8), 1..4), radii in prop::collection::vec(0.02f64..0.2, 3), start in disc(0.9), target in disc(0.9)) {
        let ex: Vec<Exclusion> = centres.iter().zip(&radii).map(|(&c, &r)| Exclusion::new(c, r).unwrap()).collect();
        prop_assume!(check_disjoint(&ex).is_ok());
        prop_assume!(ex.iter().all(|e| !e.contains(start) && !e.contains(target)));
        if let Ok(path) = build_avoiding_path(start, target, &ex) {
            prop_assert_eq!(path.audit(10_000), 0);
            prop_assert!((path.start() - start).norm() <= 1e-15);
            prop_assert!((path.end() - target).norm() <= 1e-15);
            prop_assert!(path.vertices.iter().all(|v| v.norm() < 1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ode_is_linear_and_conserves_wronskian(a in complex(1.0), b in complex(1.0), theta in 0.0..TAU) {
        prop_assume!(a.norm() + b.norm() > 0.1);
        let e = gallery::entry("legendre").unwrap();
        let path = PathSpec::radial(theta, 0.7).unwrap();
        let opts = OdeOptions::default();
        let z0 = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let t1 = integrate(e.a.as_ref(), &InitialData::new(z0, one, zero).unwrap(), &path, &opts).unwrap();
        let t2 = integrate(e.a.as_ref(), &InitialData::new(z0, zero, one).unwrap(), &path, &opts).unwrap();
        let t = integrate(e.a.as_ref(), &InitialData::new(z0, a, b).unwrap(), &path, &opts).unwrap();
        let end = |tr: &discode::ode::SolutionTrace| *tr.samples.last().unwrap();
        let (s1, s2, s) = (end(&t1), end(&t2), end(&t));
        let scale = 1.0 + s1.f.norm() + s2.f.norm();
        prop_assert!((s.f - (a * s1.f + b * s2.f)).norm() <= 1e-9 * scale);
        prop_assert!((s.fp - (a * s1.fp + b * s2.fp)).norm() <= 1e-9 * (1.0 + s1.fp.norm() + s2.fp.norm()));
        let w = s1.f * s2.fp - s1.fp * s2.f;
        prop_assert!((w - 1.0).norm() <= 1e-7, "W = {w}");
    }
}
