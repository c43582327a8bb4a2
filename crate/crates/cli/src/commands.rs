//! The seven subcommands: simulate, boxdim, overlap, classify,
//! centermanifold, hopfmap, sweep.

use crate::config::{CartesianConfig, EstimatorConfig, RunConfig, SystemSource};
use crate::svg::LogLogPlot;
use crate::{CliError, OutputFormat};
use rayon::prelude::*;
use serde_json::{json, Value as Json};
use spiraldim::center_manifold::{
    cm_lifted_orbit, cm_orbit_and_dimension, multipliers, CmOrbitParams,
};
use spiraldim::classification::{classify_polar, classify_restriction, ClassifySettings};
use spiraldim::dimension::{fit_box_dimension, DimensionEstimate};
use spiraldim::fit::{geomspace, proportional_fit, weighted_line_fit};
use spiraldim::neighborhood::{ladder_to_csv, EpsAreaSample, PointCloud};
use spiraldim::normal_forms::{PolarNormalForm, PolarPoint};
use spiraldim::orbits::{generate_spiral, StopReason};
use spiraldim::overlaps::{overlap_sequences_of, q0_of};
use std::fmt::Write as _;
use std::path::Path;

type CmdResult = Result<(), CliError>;

/// A polar orbit from either a [map] or a [flow] source, together with the
/// associated leading-order normal form.
struct PolarOrbit {
    points: Vec<PolarPoint>,
    stop_reason: StopReason,
    normal_form: PolarNormalForm,
}

fn polar_orbit(cfg: &RunConfig) -> Result<PolarOrbit, CliError> {
    let o = &cfg.orbit;
    match &cfg.source {
        SystemSource::Map(map) => {
            let spiral = generate_spiral(map, o.r0, o.phi0, o.max_iter, o.r_floor)
                .map_err(CliError::numeric)?;
            Ok(PolarOrbit {
                points: spiral.points().to_vec(),
                stop_reason: spiral.stop_reason(),
                normal_form: map.clone(),
            })
        }
        SystemSource::Flow { system, t, steps } => {
            if o.r_floor <= 0.0 || o.r_floor.is_nan() || o.r0 <= o.r_floor {
                return Err(CliError::config(anyhow::anyhow!(
                    "need r0 > r_floor > 0 for flow orbits"
                )));
            }
            let map = system
                .unit_time_map(*t, *steps)
                .map_err(CliError::numeric)?;
            let mut points = vec![PolarPoint::new(o.r0, o.phi0)];
            let mut stop_reason = StopReason::MaxIterations;
            while points.len() <= o.max_iter {
                let cur = *points.last().unwrap();
                match map.eval(cur) {
                    Err(_) => {
                        stop_reason = StopReason::Escape;
                        break;
                    }
                    Ok(next) => {
                        if !next.r.is_finite() || !next.phi.is_finite() || next.r < 0.0 {
                            stop_reason = StopReason::Escape;
                            break;
                        }
                        if next.r < o.r_floor {
                            stop_reason = StopReason::RadiusFloor;
                            break;
                        }
                        points.push(next);
                    }
                }
            }
            let normal_form = system.to_polar_normal_form().map_err(CliError::numeric)?;
            Ok(PolarOrbit {
                points,
                stop_reason,
                normal_form,
            })
        }
        SystemSource::Cartesian(_) => Err(CliError::config(anyhow::anyhow!(
            "this command needs a [map] or [flow] source"
        ))),
    }
}

fn cm_params(cfg: &RunConfig, cart: &CartesianConfig) -> CmOrbitParams {
    CmOrbitParams {
        max_iter: cfg.orbit.max_iter,
        x_floor: cart.x_floor,
        basin_radius: cart.basin_radius,
        eps_min: cfg.estimator.eps_min,
        eps_max: cfg.estimator.eps_max,
        rungs: cfg.estimator.rungs,
        method: cfg.estimator.method,
        mc_samples: cfg.estimator.mc_samples,
        seed: cfg.estimator.seed.unwrap_or(0),
        fd_step: cart.fd_step,
        c_override: cart.c_override,
    }
}

/// A seed is mandatory whenever Monte Carlo sampling actually runs.
fn require_seed(est: &EstimatorConfig) -> Result<u64, CliError> {
    match (est.method, est.seed) {
        (spiraldim::neighborhood::AreaMethod::MonteCarlo, None) => Err(CliError::config(
            anyhow::anyhow!("estimator.seed is mandatory for the monte-carlo method"),
        )),
        (_, seed) => Ok(seed.unwrap_or(0)),
    }
}

/// ε-ladder over a point cloud, rungs evaluated in parallel on independent
/// seed substreams: the result is identical for any thread count.
fn compute_ladder(
    cloud: &PointCloud,
    est: &EstimatorConfig,
) -> Result<Vec<EpsAreaSample>, CliError> {
    if !(0.0 < est.eps_min && est.eps_min < est.eps_max) || est.rungs < 5 {
        return Err(CliError::config(anyhow::anyhow!(
            "estimator needs 0 < eps_min < eps_max and at least 5 rungs"
        )));
    }
    let seed = require_seed(est)?;
    geomspace(est.eps_min, est.eps_max, est.rungs)
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            cloud
                .eps_area_rung(eps, est.method, est.mc_samples, seed, i as u64)
                .map_err(CliError::numeric)
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents)
        .map_err(|e| CliError::config(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Json) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("json serialization");
    text.push('\n');
    write_file(path, &text)
}

fn points_csv(points: &[PolarPoint], hash: &str) -> String {
    let mut out = format!("# config_hash={hash}\nk,r,phi,x,y\n");
    for (k, p) in points.iter().enumerate() {
        let [x, y] = p.to_cartesian();
        let _ = writeln!(out, "{k},{:.16e},{:.16e},{:.16e},{:.16e}", p.r, p.phi, x, y);
    }
    out
}

fn points_json(points: &[PolarPoint], hash: &str) -> Json {
    json!({
        "config_hash": hash,
        "points": points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let [x, y] = p.to_cartesian();
                json!({"k": k, "r": p.r, "phi": p.phi, "x": x, "y": y})
            })
            .collect::<Vec<_>>(),
    })
}

fn stop_reason_str(s: StopReason) -> &'static str {
    match s {
        StopReason::MaxIterations => "max-iterations",
        StopReason::RadiusFloor => "radius-floor",
        StopReason::Escape => "escape",
    }
}

fn write_orbit_files(
    points: &[PolarPoint],
    stop_reason: StopReason,
    cfg: &RunConfig,
    out: &Path,
    format: OutputFormat,
    stem: &str,
) -> CmdResult {
    match format {
        OutputFormat::Csv => write_file(
            &out.join(format!("{stem}.csv")),
            &points_csv(points, &cfg.config_hash),
        )?,
        OutputFormat::Json => write_json(
            &out.join(format!("{stem}.json")),
            &points_json(points, &cfg.config_hash),
        )?,
    }
    let winding =
        points.last().map(|p| p.phi).unwrap_or(0.0) - points.first().map(|p| p.phi).unwrap_or(0.0);
    let meta = json!({
        "config_hash": cfg.config_hash,
        "length": points.len(),
        "stop_reason": stop_reason_str(stop_reason),
        "first_radius": points.first().map(|p| p.r),
        "final_radius": points.last().map(|p| p.r),
        "winding_angle": winding,
        "seed": cfg.estimator.seed,
    });
    write_json(&out.join(format!("{stem}_meta.json")), &meta)
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path, format: OutputFormat) -> CmdResult {
    match &cfg.source {
        SystemSource::Cartesian(cart) => {
            let params = cm_params(cfg, cart);
            let lifted =
                cm_lifted_orbit(&cart.system, cart.x1, &params).map_err(CliError::numeric)?;
            let points: Vec<PolarPoint> = lifted
                .lifted
                .iter()
                .map(|&[x, y]| PolarPoint::new(x.hypot(y), y.atan2(x)))
                .collect();
            write_orbit_files(&points, StopReason::RadiusFloor, cfg, out, format, "orbit")
        }
        _ => {
            let orbit = polar_orbit(cfg)?;
            write_orbit_files(&orbit.points, orbit.stop_reason, cfg, out, format, "orbit")
        }
    }
}

/// Estimate + scenario for the boxdim and classify commands.
struct EstimateBundle {
    estimate: DimensionEstimate,
    n_points: usize,
    scenario_label: Option<String>,
    predicted: Option<f64>,
    predicted_str: Option<String>,
}

fn polar_estimate(cfg: &RunConfig, orbit: &PolarOrbit) -> Result<EstimateBundle, CliError> {
    let cartesian: Vec<[f64; 2]> = orbit.points.iter().map(|p| p.to_cartesian()).collect();
    let nucleus = orbit.points.last().map(|p| p.r);
    let cloud = PointCloud::new(cartesian)
        .map_err(CliError::numeric)?
        .with_nucleus(nucleus);
    let ladder = compute_ladder(&cloud, &cfg.estimator)?;
    let estimate = fit_box_dimension(&ladder).map_err(CliError::numeric)?;
    let settings = ClassifySettings {
        dim_tolerance: cfg.dim_tolerance,
        ..Default::default()
    };
    let (scenario_label, predicted, predicted_str) =
        match classify_polar(&orbit.normal_form, None, None, &settings) {
            Ok(report) => (
                Some(report.scenario.label()),
                Some(report.predicted.value_f64()),
                Some(report.predicted.value.to_string()),
            ),
            Err(_) => (None, None, None),
        };
    Ok(EstimateBundle {
        n_points: orbit.points.len(),
        estimate,
        scenario_label,
        predicted,
        predicted_str,
    })
}

fn write_estimate_files(
    cfg: &RunConfig,
    out: &Path,
    bundle: &EstimateBundle,
    title: &str,
) -> CmdResult {
    let mut csv = format!("# config_hash={}\n", cfg.config_hash);
    let mut body = Vec::new();
    ladder_to_csv(&bundle.estimate.ladder, &mut body).expect("in-memory write");
    csv.push_str(&String::from_utf8(body).expect("utf8"));
    write_file(&out.join("ladder.csv"), &csv)?;
    let ladder_meta = json!({
        "config_hash": cfg.config_hash,
        "seed": cfg.estimator.seed,
        "method": bundle.estimate.ladder.first().map(|s| s.method.as_str()),
        "mc_samples": cfg.estimator.mc_samples,
        "rungs": cfg.estimator.rungs,
        "eps_min": cfg.estimator.eps_min,
        "eps_max": cfg.estimator.eps_max,
        "n_points": bundle.n_points,
    });
    write_json(&out.join("ladder_meta.json"), &ladder_meta)?;

    let est = &bundle.estimate;
    let report = json!({
        "config_hash": cfg.config_hash,
        "dim": est.dim,
        "dim_lower": est.dim_lower,
        "dim_upper": est.dim_upper,
        "content_lower": est.content_lower,
        "content_upper": est.content_upper,
        "r2": est.r2,
        "slope_stderr": est.slope_stderr,
        "scenario": bundle.scenario_label,
        "predicted_dim": bundle.predicted_str,
        "ladder": "ladder.csv",
        "method": est.ladder.first().map(|s| s.method.as_str()),
        "seed": cfg.estimator.seed,
        "rungs": cfg.estimator.rungs,
        "eps_min": cfg.estimator.eps_min,
        "eps_max": cfg.estimator.eps_max,
        "mc_samples": cfg.estimator.mc_samples,
        "n_points": bundle.n_points,
        "fit_window_warning": if est.r2 < 0.99 {
            Some("log-log fit r2 below 0.99; the eps window may sit outside the asymptotic regime")
        } else {
            None
        },
    });
    write_json(&out.join("dimension.json"), &report)?;

    if cfg.svg {
        let plot = LogLogPlot {
            ladder: &est.ladder,
            fitted_dim: est.dim,
            predicted_dim: bundle.predicted,
            title: title.to_string(),
            config_hash: &cfg.config_hash,
        };
        write_file(&out.join("boxdim.svg"), &plot.render())?;
    }
    Ok(())
}

pub fn cmd_boxdim(cfg: &RunConfig, out: &Path) -> CmdResult {
    let bundle = match &cfg.source {
        SystemSource::Cartesian(cart) => {
            require_seed(&cfg.estimator)?;
            let params = cm_params(cfg, cart);
            let res = cm_orbit_and_dimension(&cart.system, cart.x1, &params)
                .map_err(CliError::numeric)?;
            EstimateBundle {
                n_points: res.orbit_1d.len(),
                scenario_label: None,
                predicted: res
                    .predicted_dim
                    .map(|r| *r.numer() as f64 / *r.denom() as f64),
                predicted_str: res.predicted_dim.map(|r| r.to_string()),
                estimate: res.estimate,
            }
        }
        _ => {
            let orbit = polar_orbit(cfg)?;
            polar_estimate(cfg, &orbit)?
        }
    };
    write_estimate_files(cfg, out, &bundle, "epsilon-neighbourhood area vs epsilon")
}

pub fn cmd_overlap(cfg: &RunConfig, out: &Path) -> CmdResult {
    let orbit = polar_orbit(cfg)?;
    let q0 = q0_of(orbit.normal_form.theta0()).map_err(CliError::numeric)?;
    let analysis = overlap_sequences_of(&orbit.points, q0)
        .map_err(CliError::numeric)?
        .with_overlap_indices(cfg.estimator.eps_min);

    let mut csv = format!("# config_hash={}\n", cfg.config_hash);
    let mut body = Vec::new();
    analysis.write_csv(&mut body).expect("in-memory write");
    csv.push_str(&String::from_utf8(body).expect("utf8"));
    write_file(&out.join("overlaps.csv"), &csv)?;

    let exponents = spiraldim::overlaps::overlap_exponents(&analysis).ok();
    let report = json!({
        "config_hash": cfg.config_hash,
        "q0": analysis.q0,
        "regime": analysis.regime,
        "k0": analysis.k0,
        "eps_used": cfg.estimator.eps_min,
        "m1_eps": analysis.m1_eps,
        "m2_eps": analysis.m2_eps,
        "sequence_length": analysis.y.len(),
        "tail_exponents": exponents.map(|e| {
            json!({
                "y": {"slope": e.y.exponent, "stderr": e.y.stderr, "r2": e.y.r2},
                "z": {"slope": e.z.exponent, "stderr": e.z.stderr, "r2": e.z.r2},
                "w": {"slope": e.w.exponent, "stderr": e.w.stderr, "r2": e.w.r2},
            })
        }),
    });
    write_json(&out.join("overlap_report.json"), &report)
}

pub fn cmd_classify(cfg: &RunConfig, out: &Path) -> CmdResult {
    let settings = ClassifySettings {
        dim_tolerance: cfg.dim_tolerance,
        ..Default::default()
    };
    let report_json = match &cfg.source {
        SystemSource::Cartesian(cart) => {
            require_seed(&cfg.estimator)?;
            let params = cm_params(cfg, cart);
            let res = cm_orbit_and_dimension(&cart.system, cart.x1, &params)
                .map_err(CliError::numeric)?;
            let report = classify_restriction(&res.report, Some(&res.estimate), &settings)
                .map_err(CliError::refused_or_numeric)?;
            json!({
                "config_hash": cfg.config_hash,
                "scenario": report.scenario.label(),
                "predicted_dim": report.predicted.value.to_string(),
                "predicted_bounds": report.predicted.bounds.map(|(lo, hi)| [lo.to_string(), hi.to_string()]),
                "estimated_dim": report.estimated_dim,
                "verdict": report.verdict,
                "tolerance": report.tolerance,
                "evidence": {
                    "sigma": res.report.sigma,
                    "delta": res.report.delta,
                    "nondegeneracy": res.report.nondegeneracy,
                    "orbit_length": res.orbit_1d.len(),
                },
                "notes": report.notes,
            })
        }
        _ => {
            let orbit = polar_orbit(cfg)?;
            let q0 = q0_of(orbit.normal_form.theta0()).map_err(CliError::refused_or_numeric)?;
            let regime = overlap_sequences_of(&orbit.points, q0)
                .ok()
                .map(|a| a.regime);
            let bundle = polar_estimate(cfg, &orbit)?;
            let report = classify_polar(
                &orbit.normal_form,
                regime,
                Some(&bundle.estimate),
                &settings,
            )
            .map_err(CliError::refused_or_numeric)?;
            json!({
                "config_hash": cfg.config_hash,
                "scenario": report.scenario.label(),
                "predicted_dim": report.predicted.value.to_string(),
                "predicted_bounds": report.predicted.bounds.map(|(lo, hi)| [lo.to_string(), hi.to_string()]),
                "estimated_dim": report.estimated_dim,
                "verdict": report.verdict,
                "tolerance": report.tolerance,
                "evidence": {
                    "rotation": report.rotation,
                    "overlap_regime": report.regime,
                    "q0": q0,
                    "orbit_length": orbit.points.len(),
                    "dim_lower": bundle.estimate.dim_lower,
                    "dim_upper": bundle.estimate.dim_upper,
                    "r2": bundle.estimate.r2,
                },
                "notes": report.notes,
            })
        }
    };
    write_json(&out.join("classification.json"), &report_json)
}

pub fn cmd_centermanifold(cfg: &RunConfig, out: &Path) -> CmdResult {
    let SystemSource::Cartesian(cart) = &cfg.source else {
        return Err(CliError::config(anyhow::anyhow!(
            "centermanifold needs a [system] source"
        )));
    };
    require_seed(&cfg.estimator)?;
    let params = cm_params(cfg, cart);
    let res = cm_orbit_and_dimension(&cart.system, cart.x1, &params).map_err(CliError::numeric)?;
    let sys = cart.system.clone();
    let mult = multipliers(
        move |x, y| sys.apply(x, y).0,
        {
            let sys = cart.system.clone();
            move |x, y| sys.apply(x, y).1
        },
        [0.0, 0.0],
        cart.fd_step,
        spiraldim::center_manifold::DEFAULT_UNIT_CIRCLE_TOL,
    )
    .map_err(CliError::numeric)?;

    let report = json!({
        "config_hash": cfg.config_hash,
        "lambda1": res.report.lambda1,
        "lambda2": res.report.lambda2,
        "sigma": res.report.sigma,
        "delta": res.report.delta,
        "a": res.report.a_coef,
        "b": res.report.b_coef,
        "omega": res.report.omega_cm,
        "cubic_coef": res.report.cubic_coef,
        "c_used": res.report.c_used,
        "nondegeneracy": res.report.nondegeneracy,
        "predicted_dim": res.predicted_dim.map(|r| r.to_string()),
        "multipliers": mult,
        "orbit_length": res.orbit_1d.len(),
        "estimate": {
            "dim": res.estimate.dim,
            "dim_lower": res.estimate.dim_lower,
            "dim_upper": res.estimate.dim_upper,
            "r2": res.estimate.r2,
        },
    });
    write_json(&out.join("center_manifold.json"), &report)
}

pub fn cmd_hopfmap(cfg: &RunConfig, out: &Path) -> CmdResult {
    let SystemSource::Flow { system, t, steps } = &cfg.source else {
        return Err(CliError::config(anyhow::anyhow!(
            "hopfmap needs a [flow] source"
        )));
    };
    let map = system
        .unit_time_map(*t, *steps)
        .map_err(CliError::numeric)?;
    let nominal = system.to_polar_normal_form().map_err(CliError::numeric)?;

    // fit the leading coefficients of the time-t map on small radii
    let radii = geomspace(1e-3, 1e-2, 16);
    let exp_r = 2 * system.k() as i32 + 1;
    let exp_phi = 2 * system.k() as i32;
    let mut xs_r = Vec::new();
    let mut ys_r = Vec::new();
    let mut xs_phi = Vec::new();
    let mut ys_phi = Vec::new();
    for &r in &radii {
        let q = map
            .eval(PolarPoint::new(r, 0.0))
            .map_err(CliError::numeric)?;
        xs_r.push(r.powi(exp_r));
        ys_r.push(q.r - r);
        xs_phi.push(r.powi(exp_phi));
        ys_phi.push(q.phi);
    }
    let a_fit = proportional_fit(&xs_r, &ys_r).map_err(CliError::numeric)?;
    let phi_fit = weighted_line_fit(&xs_phi, &ys_phi, None).map_err(CliError::numeric)?;
    let (omega_fit, b_fit) = (phi_fit.intercept, phi_fit.slope);

    let toml_out = format!(
        "# config_hash={hash}\n# leading-order polar normal form of the time-{t} flow map\n{map}",
        hash = cfg.config_hash,
        t = t,
        map = nominal.to_config_string(),
    );
    write_file(&out.join("hopf_map.toml"), &toml_out)?;

    let scale = *t; // time scales every leading coefficient linearly
    let report = json!({
        "config_hash": cfg.config_hash,
        "t": t,
        "steps_per_unit": steps,
        "nominal": {
            "a": nominal.a(), "alpha": nominal.alpha(), "b": nominal.b(),
            "theta0": nominal.theta0(), "d": nominal.d(), "c": nominal.c(), "mu": nominal.mu(),
        },
        "fitted": {"a": a_fit, "b": b_fit, "omega": omega_fit},
        "relative_errors": {
            "a": rel_err(a_fit, scale * system.a()),
            "b": rel_err(b_fit, scale * system.b()),
            "omega": rel_err(omega_fit, scale * system.omega()),
        },
        "map_file": "hopf_map.toml",
    });
    write_json(&out.join("hopf_map.json"), &report)
}

fn rel_err(fitted: f64, nominal: f64) -> f64 {
    if nominal == 0.0 {
        fitted.abs()
    } else {
        (fitted - nominal).abs() / nominal.abs()
    }
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, format: OutputFormat) -> CmdResult {
    let SystemSource::Map(map) = &cfg.source else {
        return Err(CliError::config(anyhow::anyhow!(
            "sweep needs a [map] source"
        )));
    };
    if cfg.sweep_mu.is_empty() {
        return Err(CliError::config(anyhow::anyhow!(
            "sweep needs a nonempty sweep.mu list"
        )));
    }
    let mut entries = Vec::new();
    for &mu in &cfg.sweep_mu {
        let m = map.at_mu(mu).map_err(CliError::numeric)?;
        let o = &cfg.orbit;
        let spiral =
            generate_spiral(&m, o.r0, o.phi0, o.max_iter, o.r_floor).map_err(CliError::numeric)?;
        let stem = format!("orbit_mu{mu}");
        write_orbit_files(
            spiral.points(),
            spiral.stop_reason(),
            cfg,
            out,
            format,
            &stem,
        )?;
        // for mu > 0, d != 0, a < 0 the orbit settles on the invariant
        // circle of radius sqrt(-d mu / a)
        let predicted_circle = if mu > 0.0 && map.d() != 0.0 && map.a() < 0.0 {
            Some((-map.d() * mu / map.a()).sqrt())
        } else {
            None
        };
        entries.push(json!({
            "mu": mu,
            "file": format!("{stem}.{}", match format { OutputFormat::Csv => "csv", OutputFormat::Json => "json" }),
            "length": spiral.len(),
            "stop_reason": stop_reason_str(spiral.stop_reason()),
            "final_radius": spiral.last_radius(),
            "predicted_invariant_circle_radius": predicted_circle,
        }));
    }
    let summary = json!({
        "config_hash": cfg.config_hash,
        "runs": entries,
    });
    write_json(&out.join("sweep.json"), &summary)
}
