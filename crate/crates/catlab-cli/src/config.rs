//! Run configuration: defaults, flat `key = value` file, flag overrides
//! (flags win), and a stable hash of the resolved configuration for output
//! provenance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use catlab_core::operators::TrapParams;
use catlab_core::program::parse_angle;

use crate::CliError;

/// Everything a command might need, fully resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trap: TrapParams,
    pub eta: f64,
    pub nbar: f64,
    pub phi_lambda: f64,
    /// Preset name or program file path.
    pub program: String,
    pub n_kicks: usize,
    /// Initial qubit state override (`up` / `down`); presets otherwise
    /// choose their own.
    pub init: Option<String>,
    pub theta: f64,
    pub phi: f64,
    pub scan: ScanConfig,
    pub quad_nodes: usize,
    pub quad_tol: f64,
    pub seed: u64,
    pub threads: usize,
    /// Output path prefix.
    pub output: String,
    pub wigner: WignerConfig,
    pub oracle_n_max: usize,
    pub oracle_tol: f64,
    pub oracle_samples: usize,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// `theta`, `phi`, or `omega`.
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Analysis phases per scan point for the fringe fit.
    pub phases: usize,
    /// Fixed wall delay used to convert omega scans into trap phases.
    pub delay_s: f64,
}

#[derive(Debug, Clone)]
pub struct WignerConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
    /// When set, the grid is auto-sized to cover the state.
    pub auto: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trap: TrapParams::default(),
            eta: 0.2,
            nbar: 0.15,
            phi_lambda: 0.0,
            program: "cat2-halfperiod".to_string(),
            n_kicks: 10,
            init: None,
            theta: 0.0,
            phi: 0.0,
            scan: ScanConfig {
                variable: "theta".to_string(),
                start: 0.0,
                stop: std::f64::consts::TAU,
                steps: 101,
                phases: 16,
                delay_s: 1e-6,
            },
            quad_nodes: 24,
            quad_tol: 1e-8,
            seed: 1,
            threads: 0,
            output: "catlab-out".to_string(),
            wigner: WignerConfig {
                x_min: -4.0,
                x_max: 4.0,
                p_min: -4.0,
                p_max: 4.0,
                nx: 101,
                np: 101,
                auto: true,
            },
            oracle_n_max: 80,
            oracle_tol: 1e-6,
            oracle_samples: 8,
        }
    }
}

fn config_err(msg: String) -> CliError {
    CliError::Config(msg)
}

/// Angles and frequencies accept `pi`-expressions everywhere.
pub fn parse_angle_value(key: &str, value: &str) -> Result<f64, CliError> {
    parse_angle(value).map_err(|e| config_err(format!("key `{key}`: {e}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse::<usize>()
        .map_err(|_| config_err(format!("key `{key}`: expected an integer, got `{value}`")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, CliError> {
    value
        .parse::<u64>()
        .map_err(|_| config_err(format!("key `{key}`: expected an integer, got `{value}`")))
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "trap.omega" => self.trap.omega = parse_angle_value(key, value)?,
            "trap.f_rep" => self.trap.f_rep = parse_angle_value(key, value)?,
            "trap.omega_hf" => self.trap.omega_hf = parse_angle_value(key, value)?,
            "eta" => self.eta = parse_angle_value(key, value)?,
            "nbar" => self.nbar = parse_angle_value(key, value)?,
            "phi_lambda" => self.phi_lambda = parse_angle_value(key, value)?,
            "program" => self.program = value.to_string(),
            "n_kicks" => self.n_kicks = parse_usize(key, value)?,
            "init" => match value {
                "up" | "down" => self.init = Some(value.to_string()),
                other => {
                    return Err(config_err(format!(
                        "key `init`: expected up or down, got `{other}`"
                    )))
                }
            },
            "theta" => self.theta = parse_angle_value(key, value)?,
            "phi" => self.phi = parse_angle_value(key, value)?,
            "scan.variable" => match value {
                "theta" | "phi" | "omega" => self.scan.variable = value.to_string(),
                other => {
                    return Err(config_err(format!(
                        "key `scan.variable`: expected theta, phi or omega, got `{other}`"
                    )))
                }
            },
            "scan.start" => self.scan.start = parse_angle_value(key, value)?,
            "scan.stop" => self.scan.stop = parse_angle_value(key, value)?,
            "scan.steps" => self.scan.steps = parse_usize(key, value)?,
            "scan.phases" => self.scan.phases = parse_usize(key, value)?,
            "scan.delay_s" => self.scan.delay_s = parse_angle_value(key, value)?,
            "quad.nodes" => self.quad_nodes = parse_usize(key, value)?,
            "quad.tol" => self.quad_tol = parse_angle_value(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "threads" => self.threads = parse_usize(key, value)?,
            "output" => self.output = value.to_string(),
            "wigner.x_min" => set_wigner(&mut self.wigner, 0, parse_angle_value(key, value)?),
            "wigner.x_max" => set_wigner(&mut self.wigner, 1, parse_angle_value(key, value)?),
            "wigner.p_min" => set_wigner(&mut self.wigner, 2, parse_angle_value(key, value)?),
            "wigner.p_max" => set_wigner(&mut self.wigner, 3, parse_angle_value(key, value)?),
            "wigner.nx" => self.wigner.nx = parse_usize(key, value)?,
            "wigner.np" => self.wigner.np = parse_usize(key, value)?,
            "oracle.n_max" => self.oracle_n_max = parse_usize(key, value)?,
            "oracle.tol" => self.oracle_tol = parse_angle_value(key, value)?,
            "oracle.samples" => self.oracle_samples = parse_usize(key, value)?,
            other => return Err(config_err(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Read a flat `key = value` file (`#` comments, blank lines allowed).
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    idx + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.eta <= 0.0 {
            return Err(config_err(format!("eta must be > 0, got {}", self.eta)));
        }
        if self.nbar < 0.0 {
            return Err(config_err(format!("nbar must be >= 0, got {}", self.nbar)));
        }
        if self.scan.steps < 1 {
            return Err(config_err("scan.steps must be >= 1".to_string()));
        }
        if self.scan.phases < 4 {
            return Err(config_err("scan.phases must be >= 4".to_string()));
        }
        if self.n_kicks < 1 {
            return Err(config_err("n_kicks must be >= 1".to_string()));
        }
        TrapParams::new(self.trap.omega, self.trap.f_rep, self.trap.omega_hf)
            .map_err(|e| config_err(e.to_string()))?;
        Ok(())
    }

    /// Canonical text form of the resolved configuration (sorted keys).
    pub fn canonical(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("trap.omega", self.trap.omega.to_string());
        map.insert("trap.f_rep", self.trap.f_rep.to_string());
        map.insert("trap.omega_hf", self.trap.omega_hf.to_string());
        map.insert("eta", self.eta.to_string());
        map.insert("nbar", self.nbar.to_string());
        map.insert("phi_lambda", self.phi_lambda.to_string());
        map.insert("program", self.program.clone());
        map.insert("n_kicks", self.n_kicks.to_string());
        map.insert(
            "init",
            self.init.clone().unwrap_or_else(|| "auto".to_string()),
        );
        map.insert("theta", self.theta.to_string());
        map.insert("phi", self.phi.to_string());
        map.insert("scan.variable", self.scan.variable.clone());
        map.insert("scan.start", self.scan.start.to_string());
        map.insert("scan.stop", self.scan.stop.to_string());
        map.insert("scan.steps", self.scan.steps.to_string());
        map.insert("scan.phases", self.scan.phases.to_string());
        map.insert("scan.delay_s", self.scan.delay_s.to_string());
        map.insert("quad.nodes", self.quad_nodes.to_string());
        map.insert("quad.tol", self.quad_tol.to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("wigner.x_min", self.wigner.x_min.to_string());
        map.insert("wigner.x_max", self.wigner.x_max.to_string());
        map.insert("wigner.p_min", self.wigner.p_min.to_string());
        map.insert("wigner.p_max", self.wigner.p_max.to_string());
        map.insert("wigner.nx", self.wigner.nx.to_string());
        map.insert("wigner.np", self.wigner.np.to_string());
        map.insert("oracle.n_max", self.oracle_n_max.to_string());
        map.insert("oracle.tol", self.oracle_tol.to_string());
        map.insert("oracle.samples", self.oracle_samples.to_string());
        let mut out = String::new();
        for (k, v) in map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// FNV-1a hash of the canonical configuration, hex-encoded. Thread
    /// count is excluded: it never changes results.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.canonical().bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x1_0000_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Effective worker count: `--threads`, else `CATLAB_THREADS`, else all
    /// available cores.
    pub fn effective_threads(&self) -> usize {
        if self.threads > 0 {
            return self.threads;
        }
        if let Ok(env) = std::env::var("CATLAB_THREADS") {
            if let Ok(n) = env.parse::<usize>() {
                if n > 0 {
                    return n;
                }
            }
        }
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

fn set_wigner(w: &mut WignerConfig, which: usize, value: f64) {
    w.auto = false;
    match which {
        0 => w.x_min = value,
        1 => w.x_max = value,
        2 => w.p_min = value,
        3 => w.p_max = value,
        _ => unreachable!(),
    }
}
