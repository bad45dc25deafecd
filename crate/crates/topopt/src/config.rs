//! Run configuration: flat key=value files plus command-line overrides.
//!
//! Keys use the solver's parameter names (tau, CdF, GvMax, ...). An
//! empty configuration yields the cantilever defaults; bridge and radiator
//! selections swap in their own tau / GvMax / epsOpt (and, for the radiator,
//! the iteration at which the accelerated scheme falls back to plain
//! reaction-diffusion). Unknown keys are errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evolution::EvolutionBc;
use crate::fem;
use crate::levelset::InitKind;
use crate::mesh2d::{self, ModelSpec, TriMesh};
use crate::optimizer::{Method, OptParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Cantilever,
    Bridge,
    Radiator,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Cantilever => "cantilever",
            ModelKind::Bridge => "bridge",
            ModelKind::Radiator => "radiator",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    pub init: InitKind,
    pub res_mesh: usize,
    pub out_dir: PathBuf,
    /// VTK snapshot stride; 0 disables intermediate snapshots
    pub snapshot_stride: usize,
    pub params: OptParams,
}

impl RunConfig {
    pub fn build_model(&self) -> Result<(ModelSpec, TriMesh)> {
        match self.model {
            ModelKind::Cantilever => mesh2d::cantilever_model(self.res_mesh),
            ModelKind::Bridge => mesh2d::bridge_model(self.res_mesh),
            ModelKind::Radiator => mesh2d::radiator_model(self.res_mesh),
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(key, format!("not a number: `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| config_err(key, format!("not a non-negative integer: `{value}`")))
}

/// Read `key=value` lines; `#` starts a comment, blank lines are skipped.
fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(
                line,
                format!("line {}: expected key=value", lineno + 1),
            ));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Parse the configuration from an optional file plus override pairs (applied
/// after the file, so they win).
pub fn parse_config(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let text = match file {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    parse_config_text(&text, overrides)
}

pub fn parse_config_text(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut map: HashMap<String, String> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    for (k, v) in parse_pairs(text)?
        .into_iter()
        .chain(overrides.iter().cloned())
    {
        if !map.contains_key(&k) {
            order.push(k.clone());
        }
        map.insert(k, v);
    }

    let model = match map.remove("model").as_deref() {
        None | Some("cantilever") => ModelKind::Cantilever,
        Some("bridge") => ModelKind::Bridge,
        Some("radiator") => ModelKind::Radiator,
        Some(other) => return Err(config_err("model", format!("unknown model `{other}`"))),
    };
    let init = match map.remove("init").as_deref() {
        None | Some("perforated") => InitKind::Perforated,
        Some("full") => InitKind::Full,
        Some("upper") => InitKind::Upper,
        Some(other) => return Err(config_err("init", format!("unknown init `{other}`"))),
    };
    let method = match map.remove("method").as_deref() {
        None | Some("rd") => Method::Rd,
        Some("nlhp") => Method::Nlhp,
        Some(other) => return Err(config_err("method", format!("unknown method `{other}`"))),
    };

    let mut params = OptParams {
        method,
        ..OptParams::default()
    };
    // model-specific defaults
    match model {
        ModelKind::Cantilever => {}
        ModelKind::Bridge => {
            params.evolution.tau = 8e-5;
            params.multiplier.gv_max = 0.35;
            params.eps_opt = 1e-2;
        }
        ModelKind::Radiator => {
            params.evolution.tau = 2e-5;
            params.multiplier.gv_max = 0.5;
            params.eps_opt = 1e-2;
            params.evolution.switch_back_it = Some(match init {
                InitKind::Perforated => 15,
                InitKind::Full | InitKind::Upper => 50,
            });
        }
    }

    let mut res_mesh = 4usize;
    let mut out_dir = PathBuf::from("out");
    let mut snapshot_stride = 0usize;
    let mut youngs = params.material.youngs;
    let mut poisson = params.material.poisson;
    let mut traction = params.material.traction;

    for key in order {
        let Some(value) = map.remove(&key) else {
            continue; // consumed above (model / init / method)
        };
        let v = value.as_str();
        match key.as_str() {
            "resMesh" => res_mesh = parse_usize(&key, v)?,
            "out" => out_dir = PathBuf::from(v),
            "snapshot_stride" => snapshot_stride = parse_usize(&key, v)?,
            "E" => youngs = parse_f64(&key, v)?,
            "nu" => poisson = parse_f64(&key, v)?,
            "gx" => traction[0] = parse_f64(&key, v)?,
            "gy" => traction[1] = parse_f64(&key, v)?,
            "matd" => params.smoothing.matd = parse_f64(&key, v)?,
            "matw" => params.smoothing.matw = parse_f64(&key, v)?,
            "MaxLoop" => params.max_loop = parse_usize(&key, v)?,
            "epsOpt" => params.eps_opt = parse_f64(&key, v)?,
            "FlagOptMax" => params.flag_opt_max = parse_usize(&key, v)? as u32,
            "GvMax" => params.multiplier.gv_max = parse_f64(&key, v)?,
            "GvLoop" => params.multiplier.gv_loop = parse_usize(&key, v)?,
            "LagGvA" => params.multiplier.lag_gv_a = parse_f64(&key, v)?,
            "LagGvinit" => params.multiplier.lag_gv_init = parse_f64(&key, v)?,
            "LagGvC" => params.multiplier.lag_gv_c = parse_f64(&key, v)?,
            "LagGvMax" => params.multiplier.lag_gv_max = parse_f64(&key, v)?,
            "LagGvMin" => params.multiplier.lag_gv_min = parse_f64(&key, v)?,
            "StatIt" => params.evolution.stat_it = parse_usize(&key, v)?,
            "L" => params.evolution.length_scale = parse_f64(&key, v)?,
            "tau" => params.evolution.tau = parse_f64(&key, v)?,
            "CdF" => params.evolution.cdf = parse_f64(&key, v)?,
            "dt" => params.evolution.dt = parse_f64(&key, v)?,
            "SwitchBackIt" => {
                params.evolution.switch_back_it = match v {
                    "none" | "inf" => None,
                    _ => Some(parse_usize(&key, v)?),
                }
            }
            "upper_threshold" => params.upper_threshold = parse_f64(&key, v)?,
            "evolution_bc" => {
                params.evolution.bc = match v {
                    "phione" => EvolutionBc::PhiOne,
                    "zero" => EvolutionBc::ZeroWholeBoundary,
                    other => {
                        return Err(config_err(&key, format!("unknown boundary mode `{other}`")))
                    }
                }
            }
            "state_tol" => params.state_tol = parse_f64(&key, v)?,
            "evolution_tol" => params.evolution_tol = parse_f64(&key, v)?,
            other => return Err(config_err(other, "unknown key")),
        }
    }

    let mut mat = fem::material_data(youngs, poisson);
    mat.traction = traction;
    params.material = mat;

    validate(&params, res_mesh)?;
    Ok(RunConfig {
        model,
        init,
        res_mesh,
        out_dir,
        snapshot_stride,
        params,
    })
}

fn validate(p: &OptParams, res_mesh: usize) -> Result<()> {
    let positive = [
        ("tau", p.evolution.tau),
        ("dt", p.evolution.dt),
        ("L", p.evolution.length_scale),
        ("CdF", p.evolution.cdf),
        ("epsOpt", p.eps_opt),
        ("E", p.material.youngs),
        ("GvMax", p.multiplier.gv_max),
        ("state_tol", p.state_tol),
        ("evolution_tol", p.evolution_tol),
    ];
    for (key, v) in positive {
        if !v.is_finite() || v <= 0.0 {
            return Err(config_err(key, format!("must be positive (got {v})")));
        }
    }
    if res_mesh < 1 {
        return Err(config_err("resMesh", "must be >= 1"));
    }
    if p.evolution.stat_it < 1 {
        return Err(config_err("StatIt", "must be >= 1"));
    }
    if !(p.smoothing.matd > 0.0 && p.smoothing.matd < 1.0) {
        return Err(config_err("matd", "must lie in (0, 1)"));
    }
    if !(p.smoothing.matw > 0.0 && p.smoothing.matw <= 1.0) {
        return Err(config_err("matw", "must lie in (0, 1]"));
    }
    if !(p.material.poisson >= 0.0 && p.material.poisson < 0.5) {
        return Err(config_err("nu", "must lie in [0, 0.5)"));
    }
    if p.multiplier.gv_loop < 1 {
        return Err(config_err("GvLoop", "must be >= 1"));
    }
    if p.max_loop <= p.multiplier.gv_loop {
        return Err(config_err("MaxLoop", "must exceed GvLoop"));
    }
    if !(p.multiplier.lag_gv_min < p.multiplier.lag_gv_init
        && p.multiplier.lag_gv_init <= p.multiplier.lag_gv_max)
    {
        return Err(config_err(
            "LagGvinit",
            "needs LagGvMin < LagGvinit <= LagGvMax",
        ));
    }
    Ok(())
}
