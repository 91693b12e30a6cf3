use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filterscope_core::degeneracy::{ComponentSelection, Precedence};
use filterscope_core::shift::KlBase;
use filterscope_core::spectra::Eps0;
use filterscope_core::store::{Dimension, Selector};

#[derive(Debug, Parser)]
#[command(name = "filterscope", version, about = "Extract and analyse 3x3 convolution filters")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sparsity threshold: `rel:<factor>` of the layer's max-abs weight, or `abs:<value>`.
    #[arg(long, global = true, default_value = "rel:0.01")]
    pub eps0: Eps0,
    /// Logarithm base for KL divergences.
    #[arg(long, global = true, default_value = "e")]
    pub kl_base: KlBase,
    /// `builtin` or a JSON file with fields L, x0, k, b (e.g. from fit-threshold).
    #[arg(long, global = true, default_value = "builtin")]
    pub threshold_params: ThresholdSource,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSource {
    Builtin,
    File(PathBuf),
}

impl FromStr for ThresholdSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "builtin" => ThresholdSource::Builtin,
            _ => ThresholdSource::File(s.into()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSource {
    /// Fit on every selected filter.
    Corpus,
    File(PathBuf),
}

impl FromStr for BasisSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "corpus" => BasisSource::Corpus,
            _ => BasisSource::File(s.into()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RangeMode {
    /// Coefficient range of all selected filters.
    Global,
    /// Range of the two groups being compared.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecedenceArg {
    AndFirst,
    OrFirst,
}

impl From<PrecedenceArg> for Precedence {
    fn from(p: PrecedenceArg) -> Self {
        match p {
            PrecedenceArg::AndFirst => Precedence::AndFirst,
            PrecedenceArg::OrFirst => Precedence::OrFirst,
        }
    }
}

/// `i,j` or `all`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components(pub ComponentSelection);

impl FromStr for Components {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(Components(ComponentSelection::All));
        }
        let (i, j) = s.split_once(',').ok_or_else(|| format!("components '{s}' must be 'i,j' or 'all'"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("components '{s}': {e}"));
        let (i, j) = (parse(i)?, parse(j)?);
        if i >= 9 || j >= 9 || i == j {
            return Err(format!("components '{s}' must be two distinct indices in 0..9"));
        }
        Ok(Components(ComponentSelection::Pair(i, j)))
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err(format!("'{s}' must be a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(_) => Err(format!("'{s}' must lie in [0, 1]")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct StoreArgs {
    /// Store path without extension (as written by `extract`).
    #[arg(long)]
    pub store: PathBuf,
    /// Keep layers matching `dimension=value`; repeat to intersect.
    #[arg(long = "select", value_name = "DIM=VALUE")]
    pub select: Vec<Selector>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Use raw weights instead of dividing each filter by its max-abs weight.
    #[arg(long)]
    pub raw: bool,
    /// `corpus` or a basis JSON written by the `basis` command.
    #[arg(long, default_value = "corpus")]
    pub basis: BasisSource,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract 3x3 filters from ONNX models into a filter store.
    Extract {
        /// ONNX model files.
        models: Vec<PathBuf>,
        /// JSON manifest listing models and their tags.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Name of the store inside the output directory.
        #[arg(long, default_value = "filters")]
        store_name: String,
        /// Task tag for models given on the command line.
        #[arg(long, default_value = "")]
        task: String,
        #[arg(long, default_value = "")]
        visual_category: String,
        #[arg(long, default_value = "")]
        training_dataset: String,
    },
    /// Per-layer sparsity, entropy and degeneration labels.
    Stats {
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, value_enum, default_value = "and-first")]
        precedence: PrecedenceArg,
        #[arg(long, default_value_t = 0.02, value_parser = fraction)]
        random_margin: f64,
        #[arg(long, default_value_t = 0.5, value_parser = positive_f64)]
        low_entropy: f64,
        #[arg(long, default_value_t = 0.14, value_parser = fraction)]
        high_sparsity: f64,
    },
    /// Monte-Carlo minimum entropy of normal filters and sigmoid fit.
    FitThreshold {
        #[arg(long, default_value_t = 1)]
        log2_min: u32,
        #[arg(long, default_value_t = 17)]
        log2_max: u32,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
    },
    /// PCA basis per group with component images and cumulative variance.
    Basis {
        #[command(flatten)]
        store: StoreArgs,
        /// One of model, task, visual_category, training_dataset, conv_depth_decile, layer.
        #[arg(long)]
        group_by: Option<Dimension>,
        #[arg(long)]
        raw: bool,
    },
    /// Pairwise drift between groups.
    Shift {
        #[command(flatten)]
        store: StoreArgs,
        /// One of model, task, visual_category, training_dataset, conv_depth_decile, layer.
        #[arg(long)]
        group_by: Dimension,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Histogram range of each comparison.
        #[arg(long, value_enum, default_value = "global")]
        range: RangeMode,
        /// Also export per-group KDE curves of every component.
        #[arg(long)]
        kde: bool,
    },
    /// Model-to-model drift within each conv-depth decile.
    DecileShift {
        #[command(flatten)]
        store: StoreArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Histogram range of each comparison.
        #[arg(long, value_enum, default_value = "global")]
        range: RangeMode,
    },
    /// Heuristic phenotype of each group's coefficient distribution.
    Phenotype {
        #[command(flatten)]
        store: StoreArgs,
        /// One of model, task, visual_category, training_dataset, conv_depth_decile, layer.
        #[arg(long, default_value = "layer")]
        group_by: Dimension,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Component pair `i,j` or `all`.
        #[arg(long, default_value = "0,1")]
        components: Components,
        #[arg(long, default_value_t = 100)]
        min_coefficients: usize,
        #[arg(long, default_value_t = 0.6, value_parser = fraction)]
        point_fraction: f64,
        #[arg(long, default_value_t = 0.05, value_parser = fraction)]
        point_radius: f64,
        #[arg(long, default_value_t = 0.05, value_parser = fraction)]
        spike_mass: f64,
        #[arg(long, default_value_t = 10.0, value_parser = positive_f64)]
        max_excess_kurtosis: f64,
    },
    /// Filter grids of selected layers as PPM images.
    RenderFilters {
        #[command(flatten)]
        store: StoreArgs,
        /// Tiles per row; defaults to the layer's input channel count.
        #[arg(long)]
        columns: Option<usize>,
        /// Pixels per weight.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=256))]
        cell: u32,
        /// Background pixels between tiles.
        #[arg(long, default_value_t = 1)]
        gap: u32,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract { .. } => "extract",
            Command::Stats { .. } => "stats",
            Command::FitThreshold { .. } => "fit-threshold",
            Command::Basis { .. } => "basis",
            Command::Shift { .. } => "shift",
            Command::DecileShift { .. } => "decile-shift",
            Command::Phenotype { .. } => "phenotype",
            Command::RenderFilters { .. } => "render-filters",
        }
    }
}
