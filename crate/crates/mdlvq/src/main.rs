use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mdlvq::run::{self, AnalyzeCmd};
use mdlvq::CliError;

/// Multiple-description lattice vector quantization experiments:
/// build labelings, simulate erasure channels, emit analysis tables.
#[derive(Parser)]
#[command(name = "mdlvq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (changes speed, never output). 0 = all cores.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Construct an optimal labeling and write the table as JSON.
    BuildLabeling {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Quantize a source through a labeling and measure rates/distortions.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        /// Output path; `.csv` is written here, `.json` alongside.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Closed-form tables (CSV to stdout or --out).
    Analyze {
        #[command(subcommand)]
        what: AnalyzeSub,
    },
    /// Run the invariant suites and emit a machine-readable report.
    Verify {
        /// Comma-separated subset of: cost-split, identities, shell-oracle,
        /// matching. Default: all.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Samples per shell-oracle estimate.
        #[arg(long, default_value_t = 2_000_000)]
        mc_samples: u64,
        /// Fault injection for the oracle suite (testing aid).
        #[arg(long, hide = true)]
        perturb_beta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AnalyzeSub {
    /// Sphere-moment vs scheme-constant convergence table.
    Fig2 {
        #[arg(long, default_value_t = 21)]
        l_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-description rate loss of the symmetric three-description scheme.
    Rateloss {
        #[arg(long)]
        dim: usize,
        /// Central lattice constant: z, a2, d4 or bcc.
        #[arg(long, default_value = "z")]
        central: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expansion-factor table over odd dimensions.
    PsiTable {
        #[arg(long, default_value_t = 21)]
        l_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric three-description distortion product (central-rate sweep).
    Product {
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value = "z")]
        central: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gaussian inner-bound MMSE triple over a correlation grid.
    Pradhan {
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum binning rate for two-of-three decoding.
    BinningThreshold {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        nesting_ratio: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::BuildLabeling { config, out, common } => {
            let cfg = run::read_config(&config, common.seed)?;
            let summary = run::build_labeling(&cfg, &out)?;
            println!("product_index: {}", summary.product_index);
            println!("psi: {}", summary.psi);
            println!(
                "cost split: pairwise {} centroid {} (per-cell total {})",
                summary.pairwise, summary.centroid, summary.total
            );
            println!("labeling written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { config, labeling, out, common } => {
            let cfg = run::read_config(&config, common.seed)?;
            let lab = run::load_labeling(&labeling)?;
            let output = run::simulate(&cfg, &lab, common.workers)?;
            let csv_path = out.with_extension("csv");
            let json_path = out.with_extension("json");
            run::write_atomic(&csv_path, output.csv.as_bytes())?;
            run::write_atomic(&json_path, output.json.as_bytes())?;
            eprintln!(
                "simulated {} samples in {} ms; results at {} / {}",
                output.result.samples,
                output.wall_clock_ms,
                csv_path.display(),
                json_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { what } => {
            let (csv, target) = match what {
                AnalyzeSub::Fig2 { l_max, out } => (run::analyze(&AnalyzeCmd::Fig2 { l_max })?, out),
                AnalyzeSub::Rateloss { dim, central, out } => {
                    (run::analyze(&AnalyzeCmd::RateLoss { dim, central })?, out)
                }
                AnalyzeSub::PsiTable { l_max, out } => {
                    (run::analyze(&AnalyzeCmd::PsiTable { l_max })?, out)
                }
                AnalyzeSub::Product { rate, sigma2, dim, central, out } => {
                    (run::analyze(&AnalyzeCmd::Product { rate, sigma2, dim, central })?, out)
                }
                AnalyzeSub::Pradhan { rate, points, out } => {
                    (run::analyze(&AnalyzeCmd::Pradhan { rate, points })?, out)
                }
                AnalyzeSub::BinningThreshold { rate, nesting_ratio, dim, out } => (
                    run::analyze(&AnalyzeCmd::BinningThreshold { rate, nesting_ratio, dim })?,
                    out,
                ),
            };
            match target {
                Some(path) => run::write_atomic(&path, csv.as_bytes())?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suites, seed, mc_samples, perturb_beta, out } => {
            let outcome = run::verify(suites, seed, mc_samples, perturb_beta)?;
            for line in &outcome.lines {
                println!("{line}");
            }
            if let Some(w) = &outcome.warning {
                eprintln!("warning: {w}");
            }
            if let Some(path) = out {
                run::write_atomic(&path, outcome.json.as_bytes())?;
            }
            if outcome.passed {
                println!("verify: all selected suites passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verify: FAILED");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
