//! Flags, the optional TOML config file, and their merge into a validated run.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Top-level command line.
#[derive(Debug, Parser)]
#[command(
    name = "dispherical",
    version,
    about = "Deterministic datasets for the two-source trajectory model"
)]
pub struct Cli {
    /// Shared physical and numerical settings.
    #[command(flatten)]
    pub common: Common,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Task to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Settings every subcommand accepts.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Common {
    /// Wavenumber k.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Source separation a.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Particle mass m.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Reduced Planck constant.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub hbar: Option<f64>,
    /// Main CSV output; sibling files share its stem.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Corrector tolerance override.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Corrector iteration override.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Subcommands.
#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Physical constants, derived scales and the merge level.
    Params(ParamsArgs),
    /// Level sets of the unwrapped reduced action and their wrinkles.
    Contours(ContoursArgs),
    /// One trajectory and its turning points.
    Trajectory(TrajectoryArgs),
    /// A family of trajectories from one or both sources.
    Trajectories(TrajectoriesArgs),
    /// Loci of equal transit time and their cuts.
    Loci(LociArgs),
    /// Check of the erasure identity on a grid.
    ErasureCheck(ErasureArgs),
    /// The superposed wave function on a grid.
    Field(FieldArgs),
}

impl Command {
    /// Subcommand name as typed.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Params(_) => "params",
            Command::Contours(_) => "contours",
            Command::Trajectory(_) => "trajectory",
            Command::Trajectories(_) => "trajectories",
            Command::Loci(_) => "loci",
            Command::ErasureCheck(_) => "erasure-check",
            Command::Field(_) => "field",
        }
    }
}

/// `params` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ParamsArgs {
    /// Window `xi0:xi1,eta0:eta1` for the merge-level search.
    #[arg(long)]
    pub window: Option<String>,
}

/// `contours` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ContoursArgs {
    /// Levels in units of h as `start:step:end`.
    #[arg(long, conflicts_with = "levels_hbar")]
    pub levels_h: Option<String>,
    /// Levels in units of hbar as `start:step:end`.
    #[arg(long)]
    pub levels_hbar: Option<String>,
    /// Window `xi0:xi1,eta0:eta1`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Marching step in the `(xi, eta)` chart.
    #[arg(long)]
    pub step: Option<f64>,
}

/// `trajectory` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct TrajectoryArgs {
    /// Emitting source, `lower` or `upper`.
    #[arg(long)]
    pub source: Option<String>,
    /// Constant of the motion; `+0` and `-0` select the signed-zero limits.
    #[arg(long, allow_hyphen_values = true)]
    pub eta_a: Option<String>,
    /// Write every n-th sample; turning points and ends are always written.
    #[arg(long)]
    pub stride: Option<usize>,
}

/// `trajectories` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct TrajectoriesArgs {
    /// `lower`, `upper` or `both`.
    #[arg(long)]
    pub sources: Option<String>,
    /// Comma-separated constants; overrides `--family`.
    #[arg(long, allow_hyphen_values = true)]
    pub eta_a_list: Option<String>,
    /// Cells of the arcsin-uniform family.
    #[arg(long)]
    pub family: Option<usize>,
    /// Write every n-th sample; turning points and ends are always written.
    #[arg(long)]
    pub stride: Option<usize>,
}

/// `loci` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct LociArgs {
    /// Comma-separated target times.
    #[arg(long)]
    pub times: Option<String>,
    /// Cells of the arcsin-uniform family.
    #[arg(long)]
    pub family: Option<usize>,
    /// Cut threshold in mean family spacings.
    #[arg(long)]
    pub cut_factor: Option<f64>,
    /// Refinement rounds at gap ends.
    #[arg(long)]
    pub rounds: Option<usize>,
}

/// `erasure-check` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ErasureArgs {
    /// Nodes per side of the grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Window `xi0:xi1,eta0:eta1`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

/// `field` options.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct FieldArgs {
    /// Nodes per side of the grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Window `xi0:xi1,eta0:eta1`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

/// Field-wise `self.or(file)`.
pub trait Overlay {
    /// Fills unset fields from `file`.
    fn overlay(self, file: Self) -> Self;
}

macro_rules! overlay {
    ($t:ty { $($f:ident),* }) => {
        impl Overlay for $t {
            fn overlay(self, file: Self) -> Self {
                Self { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

overlay!(Common {
    k,
    a,
    mass,
    hbar,
    out,
    tol,
    max_iter,
    workers
});
overlay!(ParamsArgs { window });
overlay!(ContoursArgs {
    levels_h,
    levels_hbar,
    window,
    step
});
overlay!(TrajectoryArgs {
    source,
    eta_a,
    stride
});
overlay!(TrajectoriesArgs {
    sources,
    eta_a_list,
    family,
    stride
});
overlay!(LociArgs {
    times,
    family,
    cut_factor,
    rounds
});
overlay!(ErasureArgs { grid, window });
overlay!(FieldArgs { grid, window });

fn keys_of<T: Serialize + Default>() -> Vec<String> {
    match serde_json::to_value(T::default()) {
        Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn known_keys() -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    s.extend(keys_of::<Common>());
    s.extend(keys_of::<ParamsArgs>());
    s.extend(keys_of::<ContoursArgs>());
    s.extend(keys_of::<TrajectoryArgs>());
    s.extend(keys_of::<TrajectoriesArgs>());
    s.extend(keys_of::<LociArgs>());
    s.extend(keys_of::<ErasureArgs>());
    s.extend(keys_of::<FieldArgs>());
    s
}

fn pick<T: for<'de> Deserialize<'de>>(table: &toml::Table) -> Result<T, Failure> {
    table
        .clone()
        .try_into()
        .map_err(|e| Failure::Invalid(format!("config file: {e}")))
}

/// Applies the config file, if any, beneath the flags.
///
/// Keys of any subcommand are accepted so one file can serve several runs;
/// unknown keys are rejected.
pub fn merge(cli: Cli) -> Result<(Common, Command), Failure> {
    let Some(path) = cli.config.as_deref() else {
        return Ok((cli.common, cli.command));
    };
    let table = read_table(path)?;
    let known = known_keys();
    if let Some(bad) = table.keys().find(|k| !known.contains(*k)) {
        return Err(Failure::Invalid(format!(
            "config file: unknown key `{bad}`"
        )));
    }
    let common = cli.common.overlay(pick(&table)?);
    let command = match cli.command {
        Command::Params(a) => Command::Params(a.overlay(pick(&table)?)),
        Command::Contours(a) => Command::Contours(a.overlay(pick(&table)?)),
        Command::Trajectory(a) => Command::Trajectory(a.overlay(pick(&table)?)),
        Command::Trajectories(a) => Command::Trajectories(a.overlay(pick(&table)?)),
        Command::Loci(a) => Command::Loci(a.overlay(pick(&table)?)),
        Command::ErasureCheck(a) => Command::ErasureCheck(a.overlay(pick(&table)?)),
        Command::Field(a) => Command::Field(a.overlay(pick(&table)?)),
    };
    Ok((common, command))
}

fn read_table(path: &Path) -> Result<toml::Table, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("config file {}: {e}", path.display())))?;
    let mut table = text
        .parse::<toml::Table>()
        .map_err(|e| Failure::Invalid(format!("config file {}: {e}", path.display())))?;
    // a numeric constant is read as its token; a zero must still be written "+0" or "-0"
    if let Some(v) = table.get_mut("eta-a") {
        let token = match *v {
            toml::Value::Float(f) if f == 0.0 => Some("0".to_string()),
            toml::Value::Float(f) => Some(format!("{f:?}")),
            toml::Value::Integer(i) => Some(i.to_string()),
            _ => None,
        };
        if let Some(t) = token {
            *v = toml::Value::String(t);
        }
    }
    Ok(table)
}
