use std::fs;
use std::path::{Path, PathBuf};

use sdib::{Balance, MixtureSpec, Shape, SparseDibConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cli::InputArgs;
use crate::error::{CliError, CliResult};

/// Input data and preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub input: PathBuf,
    pub header: bool,
    pub standardize: bool,
    /// `"auto"` or the path of a bandwidth CSV.
    pub bandwidths: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            header: false,
            standardize: true,
            bandwidths: "auto".into(),
        }
    }
}

impl DataConfig {
    pub fn apply(&mut self, args: &InputArgs) {
        if let Some(input) = &args.input {
            self.input = input.clone();
        }
        if args.header {
            self.header = true;
        }
        if let Some(s) = args.standardize {
            self.standardize = s.is_on();
        }
        if let Some(b) = &args.bandwidths {
            self.bandwidths = b.clone();
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.input.as_os_str().is_empty() {
            return Err(CliError::Invalid("--input is required".into()));
        }
        require_file(&self.input)?;
        if self.bandwidths != "auto" {
            require_file(Path::new(&self.bandwidths))?;
        }
        Ok(())
    }
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{} does not exist or is not a file",
            path.display()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub data: DataConfig,
    pub solver: SparseDibConfig,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub data: DataConfig,
    pub solver: SparseDibConfig,
    pub u_grid: Vec<f64>,
    /// Also write an SVG plot of the trajectory.
    pub plot: bool,
    pub strict: bool,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            solver: SparseDibConfig::default(),
            u_grid: parse_grid("0.4:10:0.2").expect("valid default grid"),
            plot: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub n: usize,
    pub p: Vec<usize>,
    pub q: Vec<f64>,
    pub clusters: Vec<usize>,
    pub balance: Vec<Balance>,
    pub shape: Vec<Shape>,
    pub separation: Vec<f64>,
    pub replicates: usize,
    /// Base seed; per-replicate seeds derive from it.
    pub seed: u64,
    pub standardize: bool,
    pub emit_datasets: bool,
    /// Solver settings; `dib.k` and `dib.seed` are replaced per replicate.
    pub solver: SparseDibConfig,
    pub strict: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n: 200,
            p: vec![100],
            q: vec![0.2],
            clusters: vec![3],
            balance: vec![Balance::Balanced],
            shape: vec![Shape::Spherical],
            separation: vec![5.0],
            replicates: 10,
            seed: 0,
            standardize: true,
            emit_datasets: false,
            solver: SparseDibConfig {
                u: 4.0,
                ..SparseDibConfig::default()
            },
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    pub spec: MixtureSpec,
    pub header: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            spec: MixtureSpec {
                n: 200,
                p: 100,
                q_ratio: 0.2,
                k: 3,
                balance: Balance::Balanced,
                shape: Shape::Spherical,
                separation: 5.0,
                seed: 0,
                shuffle_columns: false,
            },
            header: false,
        }
    }
}

/// Loads a config file, accepting either a bare config or a summary whose
/// `config` field holds the echo.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let err = |message: String| CliError::Config {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| err(e.to_string()))
}

/// `min:max:step` (inclusive of `max` up to round-off) or `a,b,c`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Invalid(format!("cannot parse u grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(bad());
        };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?
    };
    if grid.is_empty()
        || grid.iter().any(|&u| !(u > 0.0) || !u.is_finite())
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(CliError::Invalid(format!(
            "u grid {spec:?} must be positive and strictly ascending"
        )));
    }
    Ok(grid)
}
