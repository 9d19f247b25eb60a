//! Config files, flag overrides, seeds and density specs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use annealed_walk::governing::{
    floor_density, GaussianBump, GoverningFunction, IsingDensity, LastFraction, PottsDensity, TabulatedDensity,
};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const SEED_ENV: &str = "ANNEALED_WALK_SEED";

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CommonArgs {
    /// JSON config; flags given on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Base seed (falls back to ANNEALED_WALK_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for replica-parallel work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for CSV outputs and the resolved config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Overlays the non-null fields of `flags` onto the JSON object at `path`.
pub fn merge<T>(flags: &T, path: Option<&Path>, command: &str) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut base = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Usage("config must be a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("bad config JSON: {e}"))),
            }
        }
        None => Map::new(),
    };
    match base.remove("command") {
        Some(Value::String(c)) if c != command => {
            return Err(CliError::Usage(format!("config is for `{c}`, not `{command}`")));
        }
        Some(Value::String(_)) | None => {}
        Some(other) => return Err(CliError::Usage(format!("bad `command` in config: {other}"))),
    }
    if let Value::Object(known) = serde_json::to_value(T::default()).map_err(|e| CliError::Usage(e.to_string()))? {
        if let Some(k) = base.keys().find(|k| !known.contains_key(*k)) {
            return Err(CliError::Usage(format!("unknown config key `{k}` for `{command}`")));
        }
    }
    let flags = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Value::Object(m) = flags {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("bad config: {e}")))
}

/// Flag, then config, then environment, then 0.
pub fn resolve_seed(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn install_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second install in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

/// Writes the resolved config next to the outputs.
pub fn persist<T: Serialize>(out: Option<&Path>, command: &str, config: &T) -> Result<(), CliError> {
    let Some(dir) = out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let mut value = serde_json::to_value(config).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Value::Object(m) = &mut value {
        m.insert("command".into(), Value::String(command.into()));
        m.retain(|_, v| !v.is_null());
    }
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(dir.join("config.json"), text + "\n")?;
    Ok(())
}

/// Density selection shared by `sample`, `anneal` and `diagnose`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityArgs {
    /// ising | potts | gaussian | table
    #[arg(long)]
    #[serde(alias = "kind")]
    pub density: Option<String>,
    /// Ising field strength.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Ising coupling.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Potts fields, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub potts_alpha: Option<Vec<f64>>,
    /// Potts couplings, row-major q*q, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub potts_beta: Option<Vec<f64>>,
    /// Potts: `complement` or `sum` for the implicit last fraction.
    #[arg(long)]
    pub potts_last: Option<String>,
    /// Gaussian bump centre in [0,1]^d, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    pub curvature: Option<f64>,
    /// Tabulated density file.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Replace log f by max(log f, floor).
    #[arg(long, allow_hyphen_values = true)]
    pub log_floor: Option<f64>,
}

fn required<T: Copy>(v: Option<T>, name: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("density `{kind}` needs --{name}")))
}

impl DensityArgs {
    pub fn build(&self) -> Result<GoverningFunction, CliError> {
        let kind = self
            .density
            .as_deref()
            .ok_or_else(|| CliError::Usage("missing --density".into()))?;
        let base: GoverningFunction = match kind {
            "ising" => Arc::new(IsingDensity::new(
                required(self.alpha, "alpha", kind)?,
                required(self.beta, "beta", kind)?,
            )?),
            "potts" => {
                let alpha = self
                    .potts_alpha
                    .clone()
                    .ok_or_else(|| CliError::Usage("density `potts` needs --potts-alpha".into()))?;
                let flat = self
                    .potts_beta
                    .clone()
                    .ok_or_else(|| CliError::Usage("density `potts` needs --potts-beta".into()))?;
                let q = alpha.len();
                if flat.len() != q * q {
                    return Err(CliError::Usage(format!("--potts-beta needs {} values", q * q)));
                }
                let beta = flat.chunks(q).map(<[f64]>::to_vec).collect();
                let last = match self.potts_last.as_deref() {
                    None | Some("complement") => LastFraction::Complement,
                    Some("sum") => LastFraction::Sum,
                    Some(o) => return Err(CliError::Usage(format!("unknown --potts-last `{o}`"))),
                };
                Arc::new(PottsDensity::new(alpha, beta, last)?)
            }
            "gaussian" => {
                let center = self
                    .center
                    .clone()
                    .ok_or_else(|| CliError::Usage("density `gaussian` needs --center".into()))?;
                Arc::new(GaussianBump::new(center, required(self.curvature, "curvature", kind)?)?)
            }
            "table" => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("density `table` needs --table".into()))?;
                Arc::new(TabulatedDensity::from_file(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?)
            }
            other => return Err(CliError::Usage(format!("unknown density `{other}`"))),
        };
        match self.log_floor {
            Some(floor) => Ok(floor_density(base, floor)?),
            None => Ok(base),
        }
    }
}
