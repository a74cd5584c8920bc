//! One function per subcommand: resolve flags against the optional config,
//! run the library, write artifacts plus the manifest, and map outcomes to
//! exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ctint::experiments::{
    nls_sweep, oscillator_run, prothero_robinson_run, write_sweep_csv, ProjectiveVariant,
};
use ctint::models::{DampedOscillatorSystem, NlsProblem, ProtheroRobinsonProblem};
use ctint::optimize::{
    max_stable_step, CoeffDomain, OptimizationProblem, Spectrum, DEFAULT_TOL_FEAS, DEFAULT_TOL_H,
};
use ctint::paths::{enumerate_full_order_paths, StepPath};
use ctint::poly::{region_grid, RegionWindow, StabilityPolynomial};
use ctint::{presets, Complex64};
use serde_json::json;

use crate::config::{self, scalars_to_complex, Scalar};
use crate::manifest::{complex_json, complex_list_json, write_manifest};
use crate::parse;
use crate::{Failure, NlsArgs, OptimizeArgs, PathsArgs, PiArgs, RegionArgs, VerifyArgs};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))
}

fn create_file(path: &Path) -> Result<std::io::BufWriter<fs::File>, Failure> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| usage(format!("cannot write {}: {e}", path.display()))
}

fn write_json_file(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut file = create_file(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    writeln!(file).map_err(io_failure(path))?;
    file.flush().map_err(io_failure(path))
}

/// Where the region polynomial comes from; exactly one must be given.
enum RegionSource {
    Preset(String),
    Coeffs(Vec<Complex64>),
    Weights(Vec<Complex64>),
}

pub fn region(args: &RegionArgs) -> Result<(), Failure> {
    let cfg: config::RegionConfig = config::load(args.config.as_deref()).map_err(Failure::Usage)?;

    // Config source keys replace the flag sources as a group, so a config
    // can switch preset -> weights without inheriting a stale flag.
    let mut sources: Vec<RegionSource> = Vec::new();
    if cfg.preset.is_some() || cfg.coeffs.is_some() || cfg.weights.is_some() {
        if let Some(name) = &cfg.preset {
            sources.push(RegionSource::Preset(name.clone()));
        }
        if let Some(list) = &cfg.coeffs {
            sources.push(RegionSource::Coeffs(
                scalars_to_complex(list, "coeffs").map_err(Failure::Usage)?,
            ));
        }
        if let Some(list) = &cfg.weights {
            sources.push(RegionSource::Weights(
                scalars_to_complex(list, "weights").map_err(Failure::Usage)?,
            ));
        }
    } else {
        if let Some(name) = &args.preset {
            sources.push(RegionSource::Preset(name.clone()));
        }
        if let Some(raw) = &args.coeffs {
            sources.push(RegionSource::Coeffs(
                parse::parse_complex_list(raw, "coeffs").map_err(Failure::Usage)?,
            ));
        }
        if let Some(raw) = &args.weights {
            sources.push(RegionSource::Weights(
                parse::parse_complex_list(raw, "weights").map_err(Failure::Usage)?,
            ));
        }
    }
    let source = match sources.len() {
        1 => sources.pop().expect("one source"),
        n => {
            return Err(usage(format!(
                "region needs exactly one of --preset, --coeffs, --weights (got {n})"
            )))
        }
    };

    let window = match (&cfg.window, &args.window) {
        (Some(values), _) => parse::window_from_values(values).map_err(Failure::Usage)?,
        (None, Some(raw)) => parse::parse_window(raw).map_err(Failure::Usage)?,
        (None, None) => [-4.0, 2.0, -3.0, 3.0],
    };
    let (nx, ny) = match (&cfg.res, &args.res) {
        (Some(values), _) => parse::res_from_values(values).map_err(Failure::Usage)?,
        (None, Some(raw)) => parse::parse_res(raw).map_err(Failure::Usage)?,
        (None, None) => (400, 400),
    };
    let out = resolve_out(&cfg.out, &args.out, "out/region");

    let (polynomial, preset_name, weights) = match &source {
        RegionSource::Preset(name) => (presets::polynomial(name)?, Some(name.clone()), None),
        RegionSource::Coeffs(cs) => (StabilityPolynomial::new(cs.clone())?, None, None),
        RegionSource::Weights(ws) => (
            StepPath::new(ws.clone())?.stability_polynomial(),
            None,
            Some(ws.clone()),
        ),
    };
    let region_window = RegionWindow::new(window[0], window[1], window[2], window[3], nx, ny)?;
    let grid = region_grid(&polynomial, &region_window);

    prepare_dir(&out)?;
    let csv_path = out.join("region.csv");
    let mut file = create_file(&csv_path)?;
    grid.write_csv(&mut file).map_err(io_failure(&csv_path))?;
    file.flush().map_err(io_failure(&csv_path))?;

    let config_json = json!({
        "preset": preset_name,
        "coefficients": complex_list_json(polynomial.coefficients()),
        "weights": weights.as_deref().map(complex_list_json),
        "window": window,
        "res": [nx, ny],
        "out": out.display().to_string(),
    });
    write_manifest(&out, "region", config_json, &["region.csv"])?;
    println!("region: wrote {nx}x{ny} grid to {}", csv_path.display());
    Ok(())
}

pub fn paths(args: &PathsArgs) -> Result<(), Failure> {
    let cfg: config::PathsConfig = config::load(args.config.as_deref()).map_err(Failure::Usage)?;
    let n = cfg.n.or(args.n).ok_or_else(|| usage("paths needs --n (1 through 5)"))?;
    let out = resolve_out(&cfg.out, &args.out, "out/paths");

    let family = enumerate_full_order_paths(n)?;

    let mut family_json = Vec::new();
    family.write_json(&mut family_json).expect("writing to a vec cannot fail");
    let family_str = String::from_utf8(family_json).expect("serializer emits ascii");

    let mut doc = String::from("{\"family\":");
    doc.push_str(family_str.trim_end());
    doc.push_str(",\"polylines\":[");
    for (i, member) in family.members().iter().enumerate() {
        if i > 0 {
            doc.push(',');
        }
        doc.push('[');
        doc.push_str(&vertex_json(Complex64::new(0.0, 0.0)));
        for v in member.partial_sums() {
            doc.push(',');
            doc.push_str(&vertex_json(v));
        }
        doc.push(']');
    }
    doc.push_str("]}\n");

    prepare_dir(&out)?;
    let json_path = out.join("paths.json");
    fs::write(&json_path, doc).map_err(io_failure(&json_path))?;
    write_manifest(
        &out,
        "paths",
        json!({"n": n, "out": out.display().to_string()}),
        &["paths.json"],
    )?;
    println!(
        "paths: wrote {} path(s) of {} substep(s) at order {} to {}",
        family.members().len(),
        family.n_steps,
        family.order,
        json_path.display()
    );
    Ok(())
}

fn vertex_json(z: Complex64) -> String {
    format!("{{\"re\":{:.11e},\"im\":{:.11e}}}", z.re, z.im)
}

pub fn optimize(args: &OptimizeArgs) -> Result<(), Failure> {
    let cfg: config::OptimizeConfig =
        config::load(args.config.as_deref()).map_err(Failure::Usage)?;
    let spectrum_path = cfg
        .spectrum
        .clone()
        .or_else(|| args.spectrum.clone())
        .ok_or_else(|| usage("optimize needs --spectrum FILE.csv"))?;
    let stages = cfg.stages.or(args.stages).unwrap_or(2);
    let order = cfg.order.or(args.order).unwrap_or(1);
    let domain_raw = cfg
        .domain
        .clone()
        .or_else(|| args.domain.clone())
        .unwrap_or_else(|| "complex".into());
    let domain = match domain_raw.as_str() {
        "real" => CoeffDomain::Real,
        "complex" => CoeffDomain::Complex,
        other => return Err(usage(format!("domain must be `real` or `complex`, got `{other}`"))),
    };
    let tol_h = cfg.tol_h.or(args.tol_h).unwrap_or(DEFAULT_TOL_H);
    let tol_feas = cfg.tol_feas.or(args.tol_feas).unwrap_or(DEFAULT_TOL_FEAS);
    let seed = cfg.seed.or(args.seed).unwrap_or(0);
    let out = resolve_out(&cfg.out, &args.out, "out/optimize");

    let text = fs::read_to_string(&spectrum_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", spectrum_path.display())))?;
    let spectrum = Spectrum::parse_csv(&text)?;
    let problem = OptimizationProblem::new(spectrum.clone(), stages, order, domain)?
        .with_tolerances(tol_h, tol_feas)?;

    prepare_dir(&out)?;
    let config_json = json!({
        "spectrum_file": spectrum_path.display().to_string(),
        "eigenvalues": complex_list_json(spectrum.eigenvalues()),
        "stages": stages,
        "order": order,
        "domain": domain_raw,
        "tol_h": tol_h,
        "tol_feas": tol_feas,
        "seed": seed,
        "out": out.display().to_string(),
    });
    match max_stable_step(&problem) {
        Ok(result) => {
            let json_path = out.join("result.json");
            let mut file = create_file(&json_path)?;
            result.write_json(&mut file).map_err(io_failure(&json_path))?;
            file.flush().map_err(io_failure(&json_path))?;
            write_manifest(&out, "optimize", config_json, &["result.json"])?;
            println!(
                "optimize: h_max = {:.6e} with {stages} stage(s) at order {order} \
                 ({domain_raw} coefficients)",
                result.h_max
            );
            Ok(())
        }
        Err(ctint::Error::Infeasible(msg)) => {
            write_manifest(&out, "optimize", config_json, &[])?;
            Err(Failure::Infeasible(msg))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn nls(args: &NlsArgs) -> Result<(), Failure> {
    let cfg: config::NlsConfig = config::load(args.config.as_deref()).map_err(Failure::Usage)?;
    let dts: Vec<f64> = match (&cfg.dt, &args.dt) {
        (Some(values), _) => values.clone(),
        (None, Some(raw)) => parse::parse_f64_list(raw, "dt").map_err(Failure::Usage)?,
        (None, None) => vec![0.014, 0.007, 0.0035, 0.002, 0.001],
    };
    let c = match (&cfg.c, &args.c) {
        (Some(Scalar::Num(v)), _) => Complex64::new(*v, 0.0),
        (Some(Scalar::Str(s)), _) => {
            parse::parse_complex(s).map_err(|e| usage(format!("c: {e}")))?
        }
        (None, Some(raw)) => parse::parse_complex(raw).map_err(|e| usage(format!("c: {e}")))?,
        (None, None) => Complex64::new(1.0, 0.0),
    };
    let repeats = cfg.repeats.or(args.repeats).unwrap_or(5);
    let modes = cfg.modes.or(args.modes).unwrap_or(100);
    let t_end = cfg.t_end.or(args.t_end).unwrap_or(6.0);
    let out = resolve_out(&cfg.out, &args.out, "out/nls");

    let prob = NlsProblem::new(modes, t_end)?;
    let rows = nls_sweep(&prob, c, &dts, repeats)?;

    prepare_dir(&out)?;
    let csv_path = out.join("sweep.csv");
    let mut file = create_file(&csv_path)?;
    write_sweep_csv(&rows, &mut file).map_err(io_failure(&csv_path))?;
    file.flush().map_err(io_failure(&csv_path))?;

    write_manifest(
        &out,
        "nls",
        json!({
            "dt": dts,
            "c": complex_json(c),
            "repeats": repeats,
            "modes": modes,
            "t_end": t_end,
            "out": out.display().to_string(),
        }),
        &["sweep.csv"],
    )?;
    for row in &rows {
        println!(
            "nls: dt = {:<7} error = {:.4e} steps = {:>5} {}",
            row.dt,
            row.relative_l2_error,
            row.n_steps,
            if row.stable { "stable" } else { "UNSTABLE" }
        );
    }
    Ok(())
}

pub fn pi(args: &PiArgs) -> Result<(), Failure> {
    let cfg: config::PiConfig = config::load(args.config.as_deref()).map_err(Failure::Usage)?;
    let problem = cfg
        .problem
        .clone()
        .or_else(|| args.problem.clone())
        .ok_or_else(|| usage("pi needs --problem prothero|oscillator"))?;
    let scheme_raw = cfg
        .scheme
        .clone()
        .or_else(|| args.scheme.clone())
        .ok_or_else(|| usage("pi needs --scheme real|complex"))?;
    let variant = match scheme_raw.as_str() {
        "real" => ProjectiveVariant::Real,
        "complex" => ProjectiveVariant::Complex,
        other => return Err(usage(format!("scheme must be `real` or `complex`, got `{other}`"))),
    };
    let xi_flag = cfg.xi.or(args.xi);
    let dt_flag = cfg.dt.or(args.dt);
    let t_end_flag = cfg.t_end.or(args.t_end);
    let out = resolve_out(&cfg.out, &args.out, "out/pi");

    let (run, dt, t_end, xi) = match problem.as_str() {
        "prothero" => {
            let xi = xi_flag.unwrap_or(20.0);
            let dt = dt_flag.unwrap_or(0.05);
            let t_end = t_end_flag.unwrap_or(6.0);
            let prob = ProtheroRobinsonProblem::new(1e-6, xi)?;
            (prothero_robinson_run(&prob, variant, dt, t_end)?, dt, t_end, Some(xi))
        }
        "oscillator" => {
            if xi_flag.is_some() {
                return Err(usage("--xi applies only to the prothero problem"));
            }
            let dt = dt_flag.unwrap_or(0.1);
            let t_end = t_end_flag.unwrap_or(5.0);
            let sys = DampedOscillatorSystem::new(1.0, 0.1, 22.913, [4.0, 2.0, 5.0])?;
            (oscillator_run(&sys, variant, dt, t_end)?, dt, t_end, None)
        }
        other => {
            return Err(usage(format!(
                "problem must be `prothero` or `oscillator`, got `{other}`"
            )))
        }
    };

    prepare_dir(&out)?;
    let csv_path = out.join("trajectory.csv");
    let mut file = create_file(&csv_path)?;
    run.trajectory.write_csv(&mut file).map_err(io_failure(&csv_path))?;
    file.flush().map_err(io_failure(&csv_path))?;

    let event = run.trajectory.divergence();
    let summary = json!({
        "problem": problem,
        "scheme": scheme_raw,
        "dt": dt,
        "t_end": t_end,
        "xi": xi,
        "max_abs_error": run.max_error(),
        "max_component_errors": run.max_component_errors,
        "max_imag_residual": run.max_imag_residual,
        "diverged": event.is_some(),
        "failure_time": event.map(|e| e.time),
    });
    write_json_file(&out.join("summary.json"), &summary)?;
    write_manifest(
        &out,
        "pi",
        json!({
            "problem": problem,
            "scheme": scheme_raw,
            "dt": dt,
            "t_end": t_end,
            "xi": xi,
            "out": out.display().to_string(),
        }),
        &["trajectory.csv", "summary.json"],
    )?;
    match event {
        Some(e) => {
            println!(
                "pi: {problem}/{scheme_raw} diverged at t = {:.4}; artifacts in {}",
                e.time,
                out.display()
            );
            Err(Failure::Infeasible(format!(
                "run diverged at t = {:.6}; recorded in summary.json",
                e.time
            )))
        }
        None => {
            println!(
                "pi: {problem}/{scheme_raw} max |y - exact| = {:.4e}, \
                 max imag residual = {:.2e}",
                run.max_error(),
                run.max_imag_residual
            );
            Ok(())
        }
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let cfg: config::VerifyConfig = config::load(args.config.as_deref()).map_err(Failure::Usage)?;
    let out = resolve_out(&cfg.out, &args.out, "out/verify");

    let started = std::time::Instant::now();
    let reports = ctint::acceptance::run_all();
    let elapsed = started.elapsed().as_secs_f64();

    let total = reports.len();
    let passed_count = reports.iter().filter(|r| r.passed()).count();
    for (i, report) in reports.iter().enumerate() {
        let ok = report.passed();
        println!("{} [{:>2}/{total}] {}", if ok { "PASS" } else { "FAIL" }, i + 1, report.name);
        if !ok {
            for d in report.details.iter().filter(|d| !d.passed) {
                println!("      FAIL {}: measured {} (expected {})", d.name, d.measured, d.expected);
            }
        }
    }
    println!("verify: {passed_count}/{total} criteria passed in {elapsed:.2}s");

    let report_json = json!({
        "passed": passed_count == total,
        "criteria": reports
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "passed": r.passed(),
                    "details": r
                        .details
                        .iter()
                        .map(|d| {
                            json!({
                                "name": d.name,
                                "measured": d.measured,
                                "expected": d.expected,
                                "passed": d.passed,
                            })
                        })
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    });
    prepare_dir(&out)?;
    write_json_file(&out.join("report.json"), &report_json)?;
    write_manifest(
        &out,
        "verify",
        json!({"out": out.display().to_string()}),
        &["report.json"],
    )?;
    if passed_count == total {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{} of {total} verification criteria failed; see {}",
            total - passed_count,
            out.join("report.json").display()
        )))
    }
}

fn resolve_out(cfg: &Option<PathBuf>, flag: &Option<PathBuf>, default: &str) -> PathBuf {
    cfg.clone()
        .or_else(|| flag.clone())
        .unwrap_or_else(|| PathBuf::from(default))
}
