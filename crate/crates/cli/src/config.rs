//! Flag / config-file / default layering for the options every command shares.

use std::path::{Path, PathBuf};

use clap::Args;
use gq_core::grid::{QuadratureGrid, DEFAULT_EXTENT_SIGMAS, DEFAULT_RESOLUTION};
use gq_core::lloydmax::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use gq_core::sweep::{DEFAULT_LBG_MAX_ITER, DEFAULT_LBG_SAMPLES_PER_CELL, DEFAULT_LBG_TOL};
use gq_core::{DesignConfig, Init, LloydMaxConfig, RadiusConvention, SourceModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    Highrate,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Midpoint,
    RawClampLast,
}

/// Options shared by all commands. Unset flags fall back to `--config`, then to
/// the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Total source variance sigma^2 [default: 1]
    #[arg(long, global = true)]
    pub sigma2: Option<f64>,
    /// Seed for every random draw [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count [default: 1000000]
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Quadrature points per axis [default: 2048]
    #[arg(long = "grid-m", global = true)]
    pub grid_m: Option<usize>,
    /// Quadrature half-width (absolute) [default: 4.5 sigma]
    #[arg(long = "grid-extent", global = true)]
    pub grid_extent: Option<f64>,
    /// Constrain Lloyd-Max radii to be nondecreasing in n
    #[arg(long, global = true)]
    pub monotone: bool,
    /// Relative distortion-change tolerance for Lloyd-Max [default: 1e-7]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Lloyd-Max iteration cap [default: 500]
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Lloyd-Max starting radii [default: highrate]
    #[arg(long, value_enum, global = true)]
    pub init: Option<InitArg>,
    /// High-rate radius convention at n = N [default: midpoint]
    #[arg(long, value_enum, global = true)]
    pub convention: Option<ConventionArg>,
    /// LBG training samples per centroid [default: 4000]
    #[arg(long = "lbg-samples-per-cell", global = true)]
    pub lbg_samples_per_cell: Option<usize>,
    /// LBG relative tolerance per split stage [default: 1e-5]
    #[arg(long = "lbg-tol", global = true)]
    pub lbg_tol: Option<f64>,
    /// TOML file with any of the options above (snake_case keys)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub sigma2: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid_m: Option<usize>,
    pub grid_extent: Option<f64>,
    pub monotone: Option<bool>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub init: Option<InitArg>,
    pub convention: Option<ConventionArg>,
    pub lbg_samples_per_cell: Option<usize>,
    pub lbg_tol: Option<f64>,
    pub lbg_max_iter: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Data(format!("bad config {}: {e}", path.display())))
    }
}

/// Resolved options, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Effective {
    pub sigma2: f64,
    pub seed: u64,
    pub samples: usize,
    pub grid_m: usize,
    pub grid_extent: f64,
    pub monotone: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitArg,
    pub convention: ConventionArg,
    pub lbg_samples_per_cell: usize,
    pub lbg_tol: f64,
    pub lbg_max_iter: usize,
}

impl Effective {
    /// `default_sigma2` replaces the built-in variance default (e.g. the variance a
    /// codebook was designed for).
    pub fn resolve(args: &CommonArgs, default_sigma2: Option<f64>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let sigma2 = args.sigma2.or(file.sigma2).or(default_sigma2).unwrap_or(1.0);
        let source = SourceModel::new(sigma2)?;
        let eff = Effective {
            sigma2,
            seed: args.seed.or(file.seed).unwrap_or(0),
            samples: args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            grid_m: args.grid_m.or(file.grid_m).unwrap_or(DEFAULT_RESOLUTION),
            grid_extent: args
                .grid_extent
                .or(file.grid_extent)
                .unwrap_or(DEFAULT_EXTENT_SIGMAS * source.sigma()),
            monotone: args.monotone || file.monotone.unwrap_or(false),
            tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(DEFAULT_MAX_ITER),
            init: args.init.or(file.init).unwrap_or(InitArg::Highrate),
            convention: args.convention.or(file.convention).unwrap_or(ConventionArg::Midpoint),
            lbg_samples_per_cell: args
                .lbg_samples_per_cell
                .or(file.lbg_samples_per_cell)
                .unwrap_or(DEFAULT_LBG_SAMPLES_PER_CELL),
            lbg_tol: args.lbg_tol.or(file.lbg_tol).unwrap_or(DEFAULT_LBG_TOL),
            lbg_max_iter: file.lbg_max_iter.unwrap_or(DEFAULT_LBG_MAX_ITER),
        };
        if !(eff.tol >= 0.0 && eff.lbg_tol >= 0.0) {
            return Err(CliError::Usage("tolerances must be nonnegative".into()));
        }
        Ok(eff)
    }

    pub fn source(&self) -> SourceModel {
        SourceModel::new(self.sigma2).expect("validated in resolve")
    }

    pub fn grid(&self) -> Result<QuadratureGrid, CliError> {
        Ok(QuadratureGrid::new(self.grid_extent, self.grid_m)?)
    }

    pub fn design(&self) -> Result<DesignConfig, CliError> {
        Ok(DesignConfig {
            lloydmax: LloydMaxConfig {
                init: match self.init {
                    InitArg::Highrate => Init::HighRate,
                    InitArg::Uniform => Init::Uniform,
                },
                monotone: self.monotone,
                tol: self.tol,
                max_iter: self.max_iter,
                grid: Some(self.grid()?),
            },
            convention: match self.convention {
                ConventionArg::Midpoint => RadiusConvention::Midpoint,
                ConventionArg::RawClampLast => RadiusConvention::RawClampLast,
            },
            lbg_seed: self.seed,
            lbg_samples_per_cell: self.lbg_samples_per_cell,
            lbg_tol: self.lbg_tol,
            lbg_max_iter: self.lbg_max_iter,
        })
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain struct")
    }

    /// Single-line JSON for CSV comment headers.
    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}
