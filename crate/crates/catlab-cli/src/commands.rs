//! The six subcommands: simulate, scan, fit, wigner, oracle-check, plan.

use std::path::{Path, PathBuf};

use catlab_core::error::Error as CoreError;
use catlab_core::observables::{
    brightness, contrast_closed_form, contrast_scan, fidelity_from_contrast, fit_peak_contrast,
    multi34_contrast_closed_form, sdk_fidelity_estimate, thermal_brightness, BrightnessSample,
    ModelKind, QuadratureSpec,
};
use catlab_core::oracle::{encode, oracle_run, recommended_n_max};
use catlab_core::phase::{Amplitude, SpinLabel, SpinMotionState, ThermalEnsemble, Tolerances};
use catlab_core::presets::{
    build_preset, plan_schedule, preset_names, Preset, PresetParams, Scheme,
};
use catlab_core::program::{execute, parse_program, Bindings, ExecParams};
use catlab_core::rng::SplitMix64;
use catlab_core::wigner::{wigner, WignerSpec};
use serde::Serialize;

use crate::config::RunConfig;
use crate::io;
use crate::pool::parallel_map;
use crate::CliError;

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::Parse { .. } | CoreError::UnboundVariable { .. } => {
            CliError::Parse(e.to_string())
        }
        other => CliError::Config(other.to_string()),
    }
}

/// Resolve `program` as a preset name first, then as a file path.
fn resolve_program(cfg: &RunConfig) -> Result<Preset, CliError> {
    if preset_names().contains(&cfg.program.as_str()) {
        let preset = build_preset(
            &cfg.program,
            &PresetParams {
                n_kicks: cfg.n_kicks,
                trap: cfg.trap,
            },
        )
        .map_err(core_err)?;
        return Ok(apply_init_override(preset, cfg));
    }
    let path = Path::new(&cfg.program);
    if !path.exists() {
        return Err(CliError::Config(format!(
            "`{}` is neither a preset ({}) nor a readable file",
            cfg.program,
            preset_names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("program");
    let program = parse_program(name, &text).map_err(core_err)?;
    let preset = Preset {
        name: name.to_string(),
        initial_spin: SpinLabel::Down,
        program,
    };
    Ok(apply_init_override(preset, cfg))
}

fn apply_init_override(mut preset: Preset, cfg: &RunConfig) -> Preset {
    if let Some(init) = &cfg.init {
        preset.initial_spin = match init.as_str() {
            "up" => SpinLabel::Up,
            _ => SpinLabel::Down,
        };
    }
    preset
}

fn exec_params(cfg: &RunConfig) -> ExecParams {
    ExecParams {
        eta: cfg.eta,
        phi_lambda: cfg.phi_lambda,
        tolerances: Tolerances::default(),
    }
}

fn out_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    let path = PathBuf::from(format!("{}{suffix}", cfg.output));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).ok();
        }
    }
    path
}

fn grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    let step = (stop - start) / (steps - 1) as f64;
    (0..steps).map(|i| start + step * i as f64).collect()
}

fn analysis_phases(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| std::f64::consts::TAU * i as f64 / n as f64)
        .collect()
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let preset = resolve_program(cfg)?;
    let bind = Bindings::theta_phi(cfg.theta, cfg.phi);
    let state = execute(
        &preset.program,
        &preset.initial_state(),
        &exec_params(cfg),
        &bind,
    )
    .map_err(core_err)?;
    let b = brightness(&state).map_err(core_err)?;

    let dump = io::StateDump {
        config_hash: cfg.hash(),
        program: preset.name.clone(),
        theta: cfg.theta,
        phi: cfg.phi,
        brightness: b,
        norm: state.norm(),
        terms: io::dump_terms(&state),
    };
    let path = out_path(cfg, "-state.json");
    io::write_json(&path, &dump)?;
    // The dump must reload to the identical state.
    let reloaded = io::state_from_dump(&io::read_state_dump(&path)?.terms)?;
    if reloaded != state {
        return Err(CliError::Verification(
            "state dump did not reload to the identical state".to_string(),
        ));
    }
    println!(
        "{}: brightness {:.12}, {} terms -> {}",
        preset.name,
        b,
        state.terms().len(),
        path.display()
    );
    Ok(())
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<(), CliError> {
    let preset = resolve_program(cfg)?;
    let params = exec_params(cfg);
    let ens = ThermalEnsemble::new(cfg.nbar).map_err(core_err)?;
    let quad = QuadratureSpec {
        nodes: cfg.quad_nodes,
        tol: cfg.quad_tol,
    };
    let phases = analysis_phases(cfg.scan.phases);
    let values = grid(cfg.scan.start, cfg.scan.stop, cfg.scan.steps);
    let threads = cfg.effective_threads();

    let (header, rows): (Vec<&str>, Vec<Vec<f64>>) = match cfg.scan.variable.as_str() {
        "phi" => {
            // Brightness fringe versus analysis phase at fixed theta.
            let results = parallel_map(values.len(), threads, |i| {
                thermal_brightness(
                    &preset.program,
                    preset.initial_spin,
                    &ens,
                    &quad,
                    &params,
                    &Bindings::theta_phi(cfg.theta, values[i]),
                )
                .map(|t| t.value)
            });
            let mut rows = Vec::with_capacity(values.len());
            for (phi, r) in values.iter().zip(results) {
                let sample = BrightnessSample {
                    theta: cfg.theta,
                    phi_analysis: *phi,
                    value: r.map_err(core_err)?,
                };
                rows.push(vec![sample.phi_analysis, sample.value]);
            }
            (vec!["phi_rad", "brightness"], rows)
        }
        variable => {
            // theta scan, or an omega scan mapped onto theta = omega * T.
            let thetas: Vec<f64> = match variable {
                "omega" => values.iter().map(|w| w * cfg.scan.delay_s).collect(),
                _ => values.clone(),
            };
            let results = parallel_map(thetas.len(), threads, |i| {
                contrast_scan(
                    &preset.program,
                    preset.initial_spin,
                    &thetas[i..=i],
                    &ens,
                    &phases,
                    &quad,
                    &params,
                    ModelKind::Eq4,
                )
                .map(|curve| curve.points[0])
            });
            let mut rows = Vec::with_capacity(thetas.len());
            for (i, r) in results.into_iter().enumerate() {
                let point = r.map_err(core_err)?;
                if variable == "omega" {
                    rows.push(vec![values[i], point.theta, point.contrast, point.stderr]);
                } else {
                    rows.push(vec![point.theta, point.contrast, point.stderr]);
                }
            }
            if variable == "omega" {
                (
                    vec!["omega_rad_s", "theta_rad", "contrast", "contrast_err"],
                    rows,
                )
            } else {
                (vec!["theta_rad", "contrast", "contrast_err"], rows)
            }
        }
    };

    let path = out_path(cfg, "-scan.csv");
    io::write_csv(&path, &cfg.hash(), &header, &rows)?;
    println!(
        "{}: {} scan points ({} workers) -> {}",
        preset.name,
        rows.len(),
        threads,
        path.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitReport {
    config_hash: String,
    model: String,
    data_points: usize,
    c0: f64,
    c0_stderr: f64,
    residual_rms: f64,
    fidelity: f64,
    n_kicks_per_set: usize,
    sdk_fidelity: Option<f64>,
}

pub struct FitArgs {
    pub data: PathBuf,
    pub model: String,
    pub alpha: Option<f64>,
}

pub fn cmd_fit(cfg: &RunConfig, args: &FitArgs) -> Result<(), CliError> {
    let (header, rows) = io::read_csv(&args.data)?;
    let theta_col = header
        .iter()
        .position(|h| h == "theta_rad")
        .ok_or_else(|| CliError::Config("data has no theta_rad column".to_string()))?;
    let contrast_col = header
        .iter()
        .position(|h| h == "contrast")
        .ok_or_else(|| CliError::Config("data has no contrast column".to_string()))?;
    let thetas: Vec<f64> = rows.iter().map(|r| r[theta_col]).collect();
    let data: Vec<f64> = rows.iter().map(|r| r[contrast_col]).collect();

    let template: Vec<f64> = match args.model.as_str() {
        "eq4" => {
            let alpha = args.alpha.ok_or_else(|| {
                CliError::Config("model eq4 needs --alpha (known separation / 2)".to_string())
            })?;
            thetas
                .iter()
                .map(|&t| contrast_closed_form(t, alpha, 1.0))
                .collect()
        }
        "multi34" => thetas
            .iter()
            .map(|&t| multi34_contrast_closed_form(t, cfg.eta, cfg.nbar, 0.0, 0.0))
            .collect(),
        "multi68" => {
            // No closed form: the template is the pure-state simulation
            // (initial motional state at the origin).
            let preset = build_preset(
                "cat68",
                &PresetParams {
                    n_kicks: cfg.n_kicks,
                    trap: cfg.trap,
                },
            )
            .map_err(core_err)?;
            let phases = analysis_phases(cfg.scan.phases.max(8));
            let curve = contrast_scan(
                &preset.program,
                preset.initial_spin,
                &thetas,
                &ThermalEnsemble::ground(),
                &phases,
                &QuadratureSpec::default(),
                &exec_params(cfg),
                ModelKind::Multi68,
            )
            .map_err(core_err)?;
            curve.contrasts()
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown model `{other}` (expected eq4, multi34 or multi68)"
            )))
        }
    };

    let fit = fit_peak_contrast(&data, &template).map_err(core_err)?;
    let fidelity = fidelity_from_contrast(fit.c0.max(0.0)).map_err(core_err)?;
    let sdk_fidelity = if fit.c0 > 0.0 {
        Some(sdk_fidelity_estimate(fit.c0, cfg.n_kicks).map_err(core_err)?)
    } else {
        None
    };
    let report = FitReport {
        config_hash: cfg.hash(),
        model: args.model.clone(),
        data_points: data.len(),
        c0: fit.c0,
        c0_stderr: fit.stderr,
        residual_rms: fit.residual_rms,
        fidelity,
        n_kicks_per_set: cfg.n_kicks,
        sdk_fidelity,
    };
    let path = out_path(cfg, "-fit.json");
    io::write_json(&path, &report)?;
    println!(
        "fit ({}): C0 = {:.6} +- {:.6}, F = {:.6} -> {}",
        args.model,
        fit.c0,
        fit.stderr,
        fidelity,
        path.display()
    );
    Ok(())
}

pub fn cmd_wigner(cfg: &RunConfig) -> Result<(), CliError> {
    let preset = resolve_program(cfg)?;
    let state = execute(
        &preset.program,
        &preset.initial_state(),
        &exec_params(cfg),
        &Bindings::theta_phi(cfg.theta, cfg.phi),
    )
    .map_err(core_err)?;

    let spec = if cfg.wigner.auto {
        WignerSpec::covering(&state, 5.0, cfg.wigner.nx)
    } else {
        WignerSpec {
            x_min: cfg.wigner.x_min,
            x_max: cfg.wigner.x_max,
            p_min: cfg.wigner.p_min,
            p_max: cfg.wigner.p_max,
            nx: cfg.wigner.nx,
            np: cfg.wigner.np,
        }
    };
    let grid = wigner(&state, &spec).map_err(core_err)?;

    let mut rows = Vec::with_capacity(grid.x.len() * grid.p.len());
    for (ip, &p) in grid.p.iter().enumerate() {
        for (ix, &x) in grid.x.iter().enumerate() {
            rows.push(vec![x, p, grid.value(ix, ip)]);
        }
    }
    let hash = cfg.hash();
    let csv_path = out_path(cfg, "-wigner.csv");
    io::write_csv(&csv_path, &hash, &["x", "p", "w"], &rows)?;
    let mat_path = out_path(cfg, "-wigner.mat");
    io::write_gnuplot_matrix(&mat_path, &hash, &grid)?;
    println!(
        "{}: {}x{} map, mass {:.6}, min {:.3e} -> {}, {}",
        preset.name,
        grid.x.len(),
        grid.p.len(),
        grid.total_mass(),
        grid.min_value(),
        csv_path.display(),
        mat_path.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleReport {
    config_hash: String,
    program: String,
    n_max: usize,
    samples: usize,
    max_brightness_deviation: f64,
    max_norm_drift: f64,
    tolerance: f64,
    pass: bool,
}

pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<(), CliError> {
    let preset = resolve_program(cfg)?;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut max_dev = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut n_max_used = cfg.oracle_n_max;

    for sample in 0..cfg.oracle_samples.max(1) {
        let params = ExecParams {
            eta: cfg.eta,
            phi_lambda: rng.uniform_in(0.0, std::f64::consts::TAU),
            tolerances: Tolerances::default(),
        };
        let bind = Bindings::theta_phi(
            rng.uniform_in(0.0, std::f64::consts::TAU),
            rng.uniform_in(0.0, std::f64::consts::TAU),
        );
        // Alternate the ground state with small thermal-like displacements.
        let init = if sample % 2 == 0 {
            SpinMotionState::ground(preset.initial_spin)
        } else {
            let beta = Amplitude::from_polar(
                rng.uniform_in(0.0, 1.5),
                rng.uniform_in(0.0, std::f64::consts::TAU),
            );
            SpinMotionState::coherent(preset.initial_spin, beta).map_err(core_err)?
        };

        let direct = execute(&preset.program, &init, &params, &bind).map_err(core_err)?;
        let direct_b = brightness(&direct).map_err(core_err)?;

        // The configured truncation is a floor; deep runs get what the
        // kick budget demands.
        let n_max = cfg
            .oracle_n_max
            .max(recommended_n_max(&init, &preset.program, params.eta));
        n_max_used = n_max_used.max(n_max);
        let (init_f, _) = encode(&init, n_max).map_err(core_err)?;
        let out = oracle_run(&preset.program, &init_f, &params, &bind).map_err(core_err)?;
        let oracle_b = out.brightness().map_err(core_err)?;

        max_dev = max_dev.max((direct_b - oracle_b).abs());
        max_drift = max_drift.max((out.norm_sqr() - init_f.norm_sqr()).abs());
    }

    let pass = max_dev <= cfg.oracle_tol;
    let report = OracleReport {
        config_hash: cfg.hash(),
        program: preset.name.clone(),
        n_max: n_max_used,
        samples: cfg.oracle_samples,
        max_brightness_deviation: max_dev,
        max_norm_drift: max_drift,
        tolerance: cfg.oracle_tol,
        pass,
    };
    let path = out_path(cfg, "-oracle.json");
    io::write_json(&path, &report)?;
    println!(
        "{}: max deviation {:.3e}, norm drift {:.3e} over {} samples -> {}",
        preset.name,
        max_dev,
        max_drift,
        cfg.oracle_samples,
        path.display()
    );
    if !pass {
        return Err(CliError::Verification(format!(
            "brightness deviation {max_dev:.3e} beyond {:.1e}",
            cfg.oracle_tol
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PlanReport {
    config_hash: String,
    scheme: String,
    target_delta_alpha: f64,
    n_kicks: usize,
    delta_alpha: f64,
    wall_time_s: f64,
    rate_warning: bool,
    every_pulse_kick_bound: f64,
}

pub fn cmd_plan(cfg: &RunConfig, delta_alpha: f64, scheme: &str) -> Result<(), CliError> {
    let scheme_enum = match scheme {
        "everypulse" => Scheme::EveryPulse,
        "halfperiod" => Scheme::HalfPeriod,
        other => {
            return Err(CliError::Config(format!(
                "unknown scheme `{other}` (expected everypulse or halfperiod)"
            )))
        }
    };
    let plan = plan_schedule(delta_alpha, scheme_enum, &cfg.trap, cfg.eta).map_err(core_err)?;
    let report = PlanReport {
        config_hash: cfg.hash(),
        scheme: scheme.to_string(),
        target_delta_alpha: delta_alpha,
        n_kicks: plan.n_kicks,
        delta_alpha: plan.delta_alpha,
        wall_time_s: plan.wall_time,
        rate_warning: plan.rate_warning,
        every_pulse_kick_bound: cfg.trap.every_pulse_kick_bound(),
    };
    let path = out_path(cfg, "-plan.json");
    io::write_json(&path, &report)?;
    println!(
        "{}: {} kicks, delta_alpha {:.3}, {:.3e} s{} -> {}",
        scheme,
        plan.n_kicks,
        plan.delta_alpha,
        plan.wall_time,
        if plan.rate_warning {
            " (warning: kick count approaches the linear-growth bound)"
        } else {
            ""
        },
        path.display()
    );
    Ok(())
}
