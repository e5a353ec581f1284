//! `dismem`: explore disaggregated-memory system designs from the command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub mod commands;
pub mod config;
pub mod output;

pub use output::{Format, RunManifest};

/// Exit status when every golden comparison passed and nothing failed.
pub const EXIT_OK: i32 = 0;
/// Runtime or configuration error.
pub const EXIT_ERROR: i32 = 1;
/// Unknown flag or subcommand.
pub const EXIT_USAGE: i32 = 2;
/// The run completed but at least one golden comparison is out of tolerance.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dismem", version, about = "Design-space, network, roofline and zone models for disaggregated-memory HPC systems")]
pub struct Cli {
    /// Machine config: `default`, a JSON file, or a name in the config directory.
    #[arg(long, global = true, default_value = "default")]
    pub machine: String,

    /// Directory searched for named machine configs (and `default.json`).
    #[arg(long, global = true, env = config::CONFIG_DIR_ENV)]
    pub config_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write artifacts and manifest.json into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: MachineOverrides,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override fields of the machine config.
#[derive(Debug, Clone, Default, Args)]
pub struct MachineOverrides {
    #[arg(long, global = true)]
    pub compute_nodes: Option<u64>,
    #[arg(long, global = true)]
    pub memory_nodes: Option<u64>,
    #[arg(long, global = true)]
    pub demand_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub rack_taper: Option<f64>,
    #[arg(long, global = true)]
    pub global_taper: Option<f64>,
    #[arg(long, global = true)]
    pub rack_memory_nodes: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remote capacity and bandwidth per compute node over memory-node counts and demand fractions.
    DesignSpace(DesignSpaceArgs),
    /// Dragonfly / fat-tree switch counts, link counts and bisection tapers.
    Topology(TopologyArgs),
    /// Memory roofline curves and machine balances.
    Roofline(RooflineArgs),
    /// Little's-Law bandwidth versus outstanding transfers.
    Concurrency(ConcurrencyArgs),
    /// Application L:R ratios and footprints.
    Apps(AppsArgs),
    /// Performance zone of each application on the configured machine.
    Classify(ClassifyArgs),
    /// Compute:memory node ratio for a workload mix.
    Workload(WorkloadArgs),
    /// Regenerate every figure and the golden comparison report.
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DesignSpace(_) => "design-space",
            Command::Topology(_) => "topology",
            Command::Roofline(_) => "roofline",
            Command::Concurrency(_) => "concurrency",
            Command::Apps(_) => "apps",
            Command::Classify(_) => "classify",
            Command::Workload(_) => "workload",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaperModeArg {
    Scale,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityArg {
    Capacity,
    Bandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeArg {
    Injection,
    Rack,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisaggArg {
    Rack,
    Global,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DesignSpaceArgs {
    /// Memory-node axis (columns), comma separated.
    #[arg(long = "memory-axis", value_delimiter = ',')]
    pub memory_axis: Option<Vec<u64>>,
    /// Demand-fraction axis (rows), comma separated.
    #[arg(long = "demand-axis", value_delimiter = ',')]
    pub demand_axis: Option<Vec<f64>>,
    /// Bisection taper applied to bandwidth cells, in (0,1].
    #[arg(long, conflicts_with = "taper_scope")]
    pub taper: Option<f64>,
    /// Take the taper from the machine's network section.
    #[arg(long, value_enum)]
    pub taper_scope: Option<ScopeArg>,
    #[arg(long, value_enum)]
    pub taper_mode: Option<TaperModeArg>,
    /// Quantity shown for csv/svg output.
    #[arg(long, value_enum)]
    pub quantity: Option<QuantityArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TopologyArgs {
    /// Network by name: a `topologies` entry in the machine config or a shipped reference; all of them when omitted.
    #[arg(long = "ref", conflicts_with = "spec")]
    pub reference: Option<String>,
    /// JSON file with a topology spec (`{"kind": "dragonfly", ...}`).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Per-link bandwidth; a bare number is GB/s.
    #[arg(long)]
    pub link_bandwidth: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RooflineArgs {
    #[arg(long)]
    pub lr_min: Option<f64>,
    #[arg(long)]
    pub lr_max: Option<f64>,
    #[arg(long)]
    pub per_decade: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub scopes: Option<Vec<ScopeArg>>,
    /// Evaluate these L:R values instead of sweeping.
    #[arg(long, value_delimiter = ',')]
    pub lr: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConcurrencyArgs {
    /// Transfer sizes, e.g. `4KiB,64KiB,256KiB`.
    #[arg(long, value_delimiter = ',')]
    pub quanta: Option<Vec<String>>,
    /// Round-trip latency; defaults to the compute NIC's.
    #[arg(long)]
    pub latency: Option<String>,
    /// Link cap; defaults to the compute NIC bandwidth. A bare number is GB/s.
    #[arg(long)]
    pub link: Option<String>,
    #[arg(long)]
    pub max_concurrency: Option<u64>,
    /// Report the concurrency each quantum needs to reach this bandwidth.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AppsArgs {
    /// JSON file `{"apps": [...]}` evaluated instead of the shipped set.
    #[arg(long)]
    pub apps_file: Option<PathBuf>,
    /// Include the shipped parameter variants.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub variants: Option<bool>,
    /// Profiler export (`counter,value` CSV) to turn into an L:R ratio.
    #[arg(long)]
    pub counters: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassifyArgs {
    /// Application names (shipped set and variants); all apps when omitted.
    #[arg(long, value_delimiter = ',')]
    pub app: Option<Vec<String>>,
    #[arg(long)]
    pub apps_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scope: Option<DisaggArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct WorkloadArgs {
    /// JSON list of `{"app": <name or app spec>, "node_hours": h}`.
    #[arg(long)]
    pub entries: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scope: Option<DisaggArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ReproduceArgs {
    /// Per-link bandwidth for the bisection table; a bare number is GB/s.
    #[arg(long)]
    pub link_bandwidth: Option<String>,
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match commands::execute(&cli, stdout) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
