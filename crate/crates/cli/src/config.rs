//! TOML run configuration.
//!
//! A config declares exactly one system under `[map]` (polar normal form),
//! `[flow]` (continuous rotational system, iterated through its time-T map)
//! or `[system]` (Cartesian planar map for center-manifold analysis), plus
//! `[orbit]`, `[estimator]`, `[tolerances]`, `[output]` and `[sweep]`
//! sections. Angles accept exact literals like "pi/6" or "-2pi/5" as well
//! as decimals.

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};
use spiraldim::angle::parse_angle;
use spiraldim::center_manifold::{PlanarMapSystem, Poly2};
use spiraldim::neighborhood::AreaMethod;
use spiraldim::normal_forms::{ContinuousHopfSystem, PolarNormalForm, DEFAULT_FLOW_STEPS};
use std::path::{Path, PathBuf};
use toml::Value;

#[derive(Debug, Clone)]
pub struct OrbitConfig {
    pub r0: f64,
    pub phi0: f64,
    pub max_iter: usize,
    pub r_floor: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            r0: 0.5,
            phi0: 0.0,
            max_iter: 2_000_000,
            r_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub method: AreaMethod,
    pub mc_samples: usize,
    pub seed: Option<u64>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub rungs: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: AreaMethod::MonteCarlo,
            mc_samples: spiraldim::neighborhood::DEFAULT_MC_SAMPLES,
            seed: None,
            eps_min: 2e-3,
            eps_max: 5e-2,
            rungs: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CartesianConfig {
    pub system: PlanarMapSystem,
    pub x1: f64,
    pub x_floor: f64,
    pub fd_step: f64,
    pub c_override: Option<f64>,
    pub basin_radius: f64,
}

#[derive(Debug, Clone)]
pub enum SystemSource {
    Map(PolarNormalForm),
    Flow {
        system: ContinuousHopfSystem,
        t: f64,
        steps: usize,
    },
    Cartesian(CartesianConfig),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: SystemSource,
    pub orbit: OrbitConfig,
    pub estimator: EstimatorConfig,
    pub dim_tolerance: f64,
    pub sweep_mu: Vec<f64>,
    pub svg: bool,
    pub out_dir: Option<PathBuf>,
    pub config_hash: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let hash = hex_digest(raw.as_bytes());
        let table: toml::Table = raw
            .parse()
            .with_context(|| format!("invalid TOML in {}", path.display()))?;
        Self::from_value(&Value::Table(table), hash)
    }

    fn from_value(root: &Value, config_hash: String) -> Result<Self> {
        let table = root
            .as_table()
            .ok_or_else(|| anyhow!("config root must be a table"))?;
        for key in table.keys() {
            if !matches!(
                key.as_str(),
                "map"
                    | "flow"
                    | "system"
                    | "orbit"
                    | "estimator"
                    | "tolerances"
                    | "output"
                    | "sweep"
            ) {
                bail!("unknown config section [{key}]");
            }
        }

        let sources = ["map", "flow", "system"]
            .iter()
            .filter(|k| table.contains_key(**k))
            .count();
        if sources != 1 {
            bail!("config must declare exactly one of [map], [flow], [system]");
        }

        let source = if let Some(m) = table.get("map") {
            SystemSource::Map(parse_map(m)?)
        } else if let Some(f) = table.get("flow") {
            parse_flow(f)?
        } else {
            SystemSource::Cartesian(parse_cartesian(table.get("system").unwrap())?)
        };

        let mut orbit = OrbitConfig::default();
        if let Some(o) = table.get("orbit") {
            let t = o
                .as_table()
                .ok_or_else(|| anyhow!("[orbit] must be a table"))?;
            if let Some(v) = t.get("r0") {
                orbit.r0 = as_f64(v, "orbit.r0")?;
            }
            if let Some(v) = t.get("phi0") {
                orbit.phi0 = as_angle(v, "orbit.phi0")?;
            }
            if let Some(v) = t.get("max_iter") {
                orbit.max_iter = as_usize(v, "orbit.max_iter")?;
            }
            if let Some(v) = t.get("r_floor") {
                orbit.r_floor = as_f64(v, "orbit.r_floor")?;
            }
        }

        let mut estimator = EstimatorConfig::default();
        if let Some(e) = table.get("estimator") {
            let t = e
                .as_table()
                .ok_or_else(|| anyhow!("[estimator] must be a table"))?;
            if let Some(v) = t.get("method") {
                let s = v
                    .as_str()
                    .ok_or_else(|| anyhow!("estimator.method must be a string"))?;
                estimator.method = match s {
                    "monte-carlo" => AreaMethod::MonteCarlo,
                    "pairwise-lens" => AreaMethod::PairwiseLens,
                    "grid-raster" => AreaMethod::GridRaster,
                    other => bail!("unknown estimator method {other:?}"),
                };
            }
            if let Some(v) = t.get("mc_samples") {
                estimator.mc_samples = as_usize(v, "estimator.mc_samples")?;
            }
            if let Some(v) = t.get("seed") {
                estimator.seed = Some(as_usize(v, "estimator.seed")? as u64);
            }
            if let Some(v) = t.get("eps_min") {
                estimator.eps_min = as_f64(v, "estimator.eps_min")?;
            }
            if let Some(v) = t.get("eps_max") {
                estimator.eps_max = as_f64(v, "estimator.eps_max")?;
            }
            if let Some(v) = t.get("rungs") {
                estimator.rungs = as_usize(v, "estimator.rungs")?;
            }
        }

        let mut dim_tolerance = spiraldim::classification::DEFAULT_DIM_TOLERANCE;
        if let Some(tols) = table.get("tolerances") {
            let t = tols
                .as_table()
                .ok_or_else(|| anyhow!("[tolerances] must be a table"))?;
            if let Some(v) = t.get("dim") {
                dim_tolerance = as_f64(v, "tolerances.dim")?;
            }
        }

        let mut svg = true;
        let mut out_dir = None;
        if let Some(out) = table.get("output") {
            let t = out
                .as_table()
                .ok_or_else(|| anyhow!("[output] must be a table"))?;
            if let Some(v) = t.get("svg") {
                svg = v
                    .as_bool()
                    .ok_or_else(|| anyhow!("output.svg must be a bool"))?;
            }
            if let Some(v) = t.get("dir") {
                out_dir = Some(PathBuf::from(
                    v.as_str()
                        .ok_or_else(|| anyhow!("output.dir must be a string"))?,
                ));
            }
        }

        let mut sweep_mu = Vec::new();
        if let Some(sw) = table.get("sweep") {
            let t = sw
                .as_table()
                .ok_or_else(|| anyhow!("[sweep] must be a table"))?;
            if let Some(v) = t.get("mu") {
                let arr = v
                    .as_array()
                    .ok_or_else(|| anyhow!("sweep.mu must be an array"))?;
                for item in arr {
                    sweep_mu.push(as_f64(item, "sweep.mu")?);
                }
            }
        }

        Ok(Self {
            source,
            orbit,
            estimator,
            dim_tolerance,
            sweep_mu,
            svg,
            out_dir,
            config_hash,
        })
    }
}

fn parse_map(v: &Value) -> Result<PolarNormalForm> {
    let t = v
        .as_table()
        .ok_or_else(|| anyhow!("[map] must be a table"))?;
    for key in t.keys() {
        if !matches!(
            key.as_str(),
            "a" | "alpha" | "b" | "theta0" | "d" | "c" | "mu" | "radial_tail" | "angular_tail"
        ) {
            bail!("unknown key map.{key}");
        }
    }
    let a = as_f64(t.get("a").ok_or_else(|| anyhow!("map.a missing"))?, "map.a")?;
    let alpha = t
        .get("alpha")
        .map(|v| as_usize(v, "map.alpha"))
        .transpose()?
        .unwrap_or(3) as u32;
    let b = t
        .get("b")
        .map(|v| as_f64(v, "map.b"))
        .transpose()?
        .unwrap_or(0.0);
    let theta0 = as_angle(
        t.get("theta0")
            .ok_or_else(|| anyhow!("map.theta0 missing"))?,
        "map.theta0",
    )?;
    let d = t
        .get("d")
        .map(|v| as_f64(v, "map.d"))
        .transpose()?
        .unwrap_or(0.0);
    let c = t
        .get("c")
        .map(|v| as_f64(v, "map.c"))
        .transpose()?
        .unwrap_or(0.0);
    let mu = t
        .get("mu")
        .map(|v| as_f64(v, "map.mu"))
        .transpose()?
        .unwrap_or(0.0);

    let mut map = PolarNormalForm::new(a, alpha, b, theta0)
        .map_err(|e| anyhow!("invalid [map]: {e}"))?
        .with_family(d, c, mu)
        .map_err(|e| anyhow!("invalid [map]: {e}"))?;
    if let Some(v) = t.get("radial_tail") {
        map = map
            .with_radial_tail(parse_tail(v, "map.radial_tail")?)
            .map_err(|e| anyhow!("invalid radial tail: {e}"))?;
    }
    if let Some(v) = t.get("angular_tail") {
        map = map
            .with_angular_tail(parse_tail(v, "map.angular_tail")?)
            .map_err(|e| anyhow!("invalid angular tail: {e}"))?;
    }
    Ok(map)
}

fn parse_flow(v: &Value) -> Result<SystemSource> {
    let t = v
        .as_table()
        .ok_or_else(|| anyhow!("[flow] must be a table"))?;
    let a = as_f64(
        t.get("a").ok_or_else(|| anyhow!("flow.a missing"))?,
        "flow.a",
    )?;
    let b = t
        .get("b")
        .map(|v| as_f64(v, "flow.b"))
        .transpose()?
        .unwrap_or(0.0);
    let omega = as_angle(
        t.get("omega")
            .ok_or_else(|| anyhow!("flow.omega missing"))?,
        "flow.omega",
    )?;
    let k = t
        .get("k")
        .map(|v| as_usize(v, "flow.k"))
        .transpose()?
        .unwrap_or(1) as u32;
    let d = t
        .get("d")
        .map(|v| as_f64(v, "flow.d"))
        .transpose()?
        .unwrap_or(0.0);
    let c = t
        .get("c")
        .map(|v| as_f64(v, "flow.c"))
        .transpose()?
        .unwrap_or(0.0);
    let mu = t
        .get("mu")
        .map(|v| as_f64(v, "flow.mu"))
        .transpose()?
        .unwrap_or(0.0);
    let time = t
        .get("t")
        .map(|v| as_f64(v, "flow.t"))
        .transpose()?
        .unwrap_or(1.0);
    let steps = t
        .get("steps")
        .map(|v| as_usize(v, "flow.steps"))
        .transpose()?
        .unwrap_or(DEFAULT_FLOW_STEPS);
    let system = ContinuousHopfSystem::new(a, b, omega, k)
        .map_err(|e| anyhow!("invalid [flow]: {e}"))?
        .with_family(d, c, mu)
        .map_err(|e| anyhow!("invalid [flow]: {e}"))?;
    Ok(SystemSource::Flow {
        system,
        t: time,
        steps,
    })
}

fn parse_cartesian(v: &Value) -> Result<CartesianConfig> {
    let t = v
        .as_table()
        .ok_or_else(|| anyhow!("[system] must be a table"))?;
    let lambda1 = as_f64(
        t.get("lambda1")
            .ok_or_else(|| anyhow!("system.lambda1 missing"))?,
        "system.lambda1",
    )?;
    let lambda2 = as_f64(
        t.get("lambda2")
            .ok_or_else(|| anyhow!("system.lambda2 missing"))?,
        "system.lambda2",
    )?;
    let f = t
        .get("f")
        .map(|v| parse_poly(v, "system.f"))
        .transpose()?
        .unwrap_or_else(Poly2::zero);
    let g = t
        .get("g")
        .map(|v| parse_poly(v, "system.g"))
        .transpose()?
        .unwrap_or_else(Poly2::zero);
    let system = PlanarMapSystem::new(lambda1, lambda2, f, g)
        .map_err(|e| anyhow!("invalid [system]: {e}"))?;
    Ok(CartesianConfig {
        system,
        x1: t
            .get("x1")
            .map(|v| as_f64(v, "system.x1"))
            .transpose()?
            .unwrap_or(-0.4),
        x_floor: t
            .get("x_floor")
            .map(|v| as_f64(v, "system.x_floor"))
            .transpose()?
            .unwrap_or(1e-4),
        fd_step: t
            .get("fd_step")
            .map(|v| as_f64(v, "system.fd_step"))
            .transpose()?
            .unwrap_or(spiraldim::center_manifold::DEFAULT_FD_STEP),
        c_override: t
            .get("c_override")
            .map(|v| as_f64(v, "system.c_override"))
            .transpose()?,
        basin_radius: t
            .get("basin_radius")
            .map(|v| as_f64(v, "system.basin_radius"))
            .transpose()?
            .unwrap_or(1.0),
    })
}

/// Polynomial terms as an array of [i, j, c] triples.
fn parse_poly(v: &Value, what: &str) -> Result<Poly2> {
    let arr = v
        .as_array()
        .ok_or_else(|| anyhow!("{what} must be an array of [i, j, c]"))?;
    let mut terms = Vec::new();
    for item in arr {
        let triple = item
            .as_array()
            .filter(|t| t.len() == 3)
            .ok_or_else(|| anyhow!("{what} entries must be [i, j, c] triples"))?;
        let i = as_usize(&triple[0], what)? as u32;
        let j = as_usize(&triple[1], what)? as u32;
        let c = as_f64(&triple[2], what)?;
        terms.push((i, j, c));
    }
    Ok(Poly2::new(terms))
}

fn parse_tail(v: &Value, what: &str) -> Result<Vec<(f64, f64)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| anyhow!("{what} must be an array of [coef, exp]"))?;
    let mut tail = Vec::new();
    for item in arr {
        let pair = item
            .as_array()
            .filter(|t| t.len() == 2)
            .ok_or_else(|| anyhow!("{what} entries must be [coef, exp] pairs"))?;
        tail.push((as_f64(&pair[0], what)?, as_f64(&pair[1], what)?));
    }
    Ok(tail)
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => bail!("{what} must be a number"),
    }
}

/// Angles additionally accept exact "pi/6"-style string literals.
fn as_angle(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::String(s) => parse_angle(s).map_err(|e| anyhow!("{what}: {e}")),
        other => as_f64(other, what),
    }
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => bail!("{what} must be a nonnegative integer"),
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
