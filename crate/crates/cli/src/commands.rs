use crate::config::{FileConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::{Check, ConstructArgs, Expect, GalleryArgs, IdentitiesArgs, Inputs, Kind, MeasuresArgs, PathsArgs, Source};
use discode::audit::{self, IdentityTolerances, SWEEP_POINTS, SWEEP_RADIUS};
use discode::formats;
use discode::gallery::{self, ENTRY_NAMES, RESIDUAL_TOL};
use discode::geometry::build_avoiding_path;
use discode::interpolation::{self, Construction, InterpolationProblem};
use discode::measures::{self, DensityMeasure, LogKernelRule};
use discode::ode::SolutionBasis;
use discode::profile::{Verdict, VerdictRule, PROFILE_RADII};
use discode::provider::{ClosedForm, Provider};
use discode::report::{AuditRow, Report};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::path::Path;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_file<T>(path: &Path, parse: impl Fn(&str) -> discode::Result<T>) -> CliResult<T> {
    parse(&read(path)?).map_err(|source| CliError::Input {
        path: path.display().to_string(),
        source,
    })
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, flag: &str, kind: &str) -> CliResult<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Usage(format!("{kind} needs --{flag}")))
}

fn params(name: &str, p: Option<f64>) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    if let Some(p) = p {
        if name.starts_with("thm1") {
            m.insert("p".to_string(), p);
        }
    }
    m
}

fn entry_names(sel: Option<&str>) -> Vec<String> {
    match sel {
        None | Some("all") => ENTRY_NAMES.iter().map(|s| s.to_string()).collect(),
        Some(s) => vec![s.to_string()],
    }
}

pub fn gallery(run: &RunConfig, file: &FileConfig, args: &GalleryArgs) -> CliResult<Report> {
    let grid = run.grid()?;
    let tol = run.audit_tol.unwrap_or(RESIDUAL_TOL);
    let p = args.p.or(file.p);
    let mut report = Report::new();
    for name in entry_names(args.entry.as_deref().or(file.entry.as_deref())) {
        let e = gallery::get_entry(&name, &params(&name, p))?;
        report.extend(gallery::verify_entry(&e, &grid, tol));
    }
    Ok(report)
}

pub fn build_construction(kind: Kind, inputs: &Inputs, file: &FileConfig) -> CliResult<Construction> {
    Ok(match kind {
        Kind::FixedSimple => {
            let nodes = parse_file(required(&inputs.lambda, "lambda", "fixed-simple")?, formats::read_points)?;
            let eps = inputs
                .eps
                .or(file.eps)
                .ok_or_else(|| CliError::Usage("fixed-simple needs --eps".into()))?;
            interpolation::fixed_point_simple(&nodes, eps)?
        }
        Kind::FixedTyped => {
            let spec = parse_file(required(&inputs.spec, "spec", "fixed-typed")?, formats::parse_fixed_point_spec)?;
            interpolation::fixed_point_typed(&spec)?
        }
        Kind::Zeros => {
            let zeros = parse_file(required(&inputs.lambda, "lambda", "zeros")?, formats::read_points)?;
            interpolation::prescribed_zero_equation(&zeros)?
        }
        Kind::Interp => {
            let nodes = parse_file(required(&inputs.nodes, "nodes", "interp")?, formats::read_points)?;
            let targets = parse_file(required(&inputs.targets, "targets", "interp")?, formats::read_points)?;
            interpolation::interpolating_solution_equation(&InterpolationProblem::new(&nodes, &targets)?)?
        }
    })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::FixedSimple => "fixed_point_simple",
        Kind::FixedTyped => "fixed_point_typed",
        Kind::Zeros => "prescribed_zeros",
        Kind::Interp => "interpolating",
    }
}

/// `(name, basis, A)` for every selected entry or the construction.
fn sources(src: &Source, file: &FileConfig) -> CliResult<Vec<(String, SolutionBasis, Provider)>> {
    if let Some(kind) = src.construct {
        let con = build_construction(kind, &src.inputs, file)?;
        return Ok(vec![(kind_name(kind).to_string(), con.basis, con.a)]);
    }
    let p = src.p.or(file.p);
    entry_names(src.entry.as_deref().or(file.entry.as_deref()))
        .into_iter()
        .map(|name| {
            let e = gallery::get_entry(&name, &params(&name, p))?;
            let b = e.basis()?;
            Ok((name, b, e.a))
        })
        .collect()
}

fn sample_points(run: &RunConfig, n: usize) -> Vec<Complex64> {
    match run.seed {
        None => audit::interior_points(n, SWEEP_RADIUS),
        Some(seed) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let r = SWEEP_RADIUS * rng.gen::<f64>().sqrt();
                    Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
                })
                .collect()
        }
    }
}

pub fn identities(run: &RunConfig, file: &FileConfig, args: &IdentitiesArgs) -> CliResult<Report> {
    let n = args.points.or(file.points).unwrap_or(SWEEP_POINTS);
    if n == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    let pts = sample_points(run, n);
    let checks: Vec<Check> = if args.check.is_empty() {
        vec![Check::Identities, Check::Schwarzian, Check::BankLaine]
    } else if args.check.contains(&Check::All) {
        vec![Check::Identities, Check::Schwarzian, Check::BankLaine, Check::Liouville, Check::Balance, Check::Subharmonic]
    } else {
        args.check.clone()
    };
    let tol = |d: f64| run.audit_tol.unwrap_or(d);
    let mut report = Report::new();
    for (name, basis, a) in sources(&args.source, file)? {
        for check in &checks {
            match check {
                Check::Identities => {
                    let t = IdentityTolerances {
                        richardson: tol(1e-7),
                        exact: tol(1e-9),
                    };
                    report.rows.extend(audit::identity_rows(&name, &basis, a.as_ref(), &pts, run.fd_step, t)?);
                }
                Check::Schwarzian => report.push(audit::schwarzian_row(&name, &basis, a.as_ref(), &pts, tol(1e-8))?),
                Check::BankLaine => report.push(audit::bank_laine_row(&name, &basis, a.as_ref(), &pts, tol(1e-8))?),
                Check::Liouville => {
                    let mut worst = (0.0f64, Complex64::new(0.0, 0.0));
                    for &z in &pts {
                        let v = discode::aux::liouville_residual(&basis, z, run.fd_step)?;
                        if v > worst.0 {
                            worst = (v, z);
                        }
                    }
                    report.push(
                        AuditRow::report(
                            format!("{name}/liouville"),
                            format!("max |Lap(-u) + 4e^{{-2u}}|, five-point stencil h = {}", run.fd_step),
                            worst.0,
                            "-u solves Liouville's equation",
                        )
                        .with_detail(worst.1),
                    );
                }
                Check::Balance => report.rows.extend(audit::balance_rows(&name, &basis, &[0.3, 0.5, 0.7], LogKernelRule::default(), tol(1e-5), 3.0)?),
                Check::Subharmonic => report.push(audit::subharmonic_row(&name, &basis, 256, tol(1e-6))?),
                Check::All => {}
            }
        }
    }
    Ok(report)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Stabilized => "stabilized",
        Verdict::Growing => "growing",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn verdict_row(key: String, quantity: &str, value: f64, verdict: Verdict, expect: Option<Expect>, claim: &str) -> AuditRow {
    let row = AuditRow::report(key, format!("{quantity} (verdict: {})", verdict_name(verdict)), value, claim);
    match expect {
        Some(Expect::Stabilized) => row.require(verdict == Verdict::Stabilized),
        Some(Expect::Growing) => row.require(verdict == Verdict::Growing),
        None => row,
    }
}

/// `monomial:k` as a provider.
pub fn test_function(spec: &str) -> CliResult<Provider> {
    let k = spec
        .strip_prefix("monomial:")
        .and_then(|k| k.parse::<i32>().ok())
        .filter(|k| (0..=64).contains(k))
        .ok_or_else(|| CliError::Usage(format!("unknown test function `{spec}` (expected monomial:k, 0 <= k <= 64)")))?;
    Ok(ClosedForm::new(format!("z^{k}"), move |z| z.powi(k)))
}

pub fn measures(run: &RunConfig, file: &FileConfig, args: &MeasuresArgs) -> CliResult<Report> {
    if !(args.coefficient_carleson || args.growth || args.littlewood_paley || args.uchiyama.is_some()) {
        return Err(CliError::Usage(
            "measures needs one of --coefficient-carleson, --uchiyama, --growth, --littlewood-paley".into(),
        ));
    }
    let r_top = PROFILE_RADII[PROFILE_RADII.len() - 1];
    let mut report = Report::new();
    if args.littlewood_paley {
        let spec = args.f.as_deref().unwrap_or("monomial:1");
        let f = test_function(spec)?;
        report.rows.extend(audit::littlewood_paley_rows(spec, f.as_ref(), 1.0, run.audit_tol.unwrap_or(1e-6))?);
    }
    if args.coefficient_carleson || args.growth || args.uchiyama.is_some() {
        for (name, basis, a) in sources(&args.source, file)? {
            if args.coefficient_carleson {
                let rep = measures::carleson_constant(&DensityMeasure::coefficient(a.clone()), None, r_top)?;
                report.push(
                    verdict_row(
                        format!("{name}/coefficient_carleson"),
                        "Carleson constant of |A|^2(1-|z|^2)^3",
                        rep.constant,
                        rep.verdict,
                        args.expect,
                        "|A|^2(1-|z|^2)^3 dm is a Carleson measure",
                    )
                    .with_detail(&rep),
                );
            }
            if let Some(eps) = args.uchiyama {
                let rep = measures::uchiyama_constant(&basis, eps, None, r_top)?;
                report.push(
                    verdict_row(format!("{name}/uchiyama"), "Carleson constant of the basis measure", rep.constant, rep.verdict, args.expect, "the basis measure is Carleson")
                        .with_detail(&rep),
                );
            }
            if args.growth {
                let alpha = args.alpha.or(file.alpha).unwrap_or(2.0);
                let prof = gallery::coefficient_profile(&a, alpha)?;
                let v = VerdictRule::default().classify(&prof);
                let top = prof.last().map_or(f64::NAN, |q| q.value);
                report.push(
                    verdict_row(
                        format!("{name}/growth_alpha{alpha}"),
                        &format!("sup |A|(1-|z|^2)^{alpha} at r = {r_top}"),
                        top,
                        v,
                        args.expect,
                        &format!("A in H^inf_{alpha}"),
                    )
                    .with_detail(prof),
                );
            }
        }
    }
    Ok(report)
}

/// Values of `A` and `f1` along 8 radial rays, 64 samples each.
pub fn trace_table(a: &Provider, f1: &Provider, r_max: f64) -> CliResult<String> {
    let mut out = String::from("z_re\tz_im\tA_re\tA_im\tf_re\tf_im\n");
    for k in 0..8 {
        for j in 0..=64 {
            let z = Complex64::from_polar(r_max * j as f64 / 64.0, std::f64::consts::TAU * k as f64 / 8.0);
            let (av, fv) = (a.eval(z)?, f1.eval(z)?);
            out.push_str(&format!("{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\n", z.re, z.im, av.re, av.im, fv.re, fv.im));
        }
    }
    Ok(out)
}

pub fn construct(run: &RunConfig, file: &FileConfig, args: &ConstructArgs) -> CliResult<Report> {
    let con = build_construction(args.kind, &args.inputs, file)?;
    if let Some(path) = &args.trace_out {
        let text = trace_table(&con.a, &con.f1, run.r_max)?;
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(con.report)
}

pub fn paths(args: &PathsArgs) -> CliResult<Report> {
    let exclusions = match &args.exclusions {
        Some(p) => parse_file(p, formats::parse_exclusions)?,
        None => vec![],
    };
    let path = build_avoiding_path(args.start, args.target, &exclusions)?;
    if let Some(p) = &args.trace_out {
        std::fs::write(p, formats::write_point_list(&path.vertices)).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?;
    }
    let violations = path.audit(4096);
    let mut report = Report::new();
    report.push(
        AuditRow::new(
            "paths/length",
            "Euclidean length",
            path.length,
            discode::report::Relation::AtMost,
            path.length_bound,
            "path length within the a-priori bound",
        )
        .with_detail(serde_json::json!({ "vertices": path.vertices.len(), "terminal": path.terminal })),
    );
    report.push(AuditRow::at_most("paths/violations", "sampled points inside a non-terminal exclusion (4096 samples)", violations as f64, 0.0, "path avoids the exclusion discs"));
    Ok(report)
}
