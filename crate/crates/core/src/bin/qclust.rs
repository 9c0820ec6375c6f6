use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qclust::pipeline::{self, parse_kernel_measurement, FileConfig, RunSpec};
use qclust::{Error, Result};

/// Cluster a known-exploited-vulnerabilities catalog with classical and
/// simulated-quantum K-means.
#[derive(Parser, Debug)]
#[command(name = "qclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster with one or all algorithms and write report, metrics,
    /// profiles and scatter plots.
    Run(Common),
    /// Sweep k and write the WCSS curve.
    Elbow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Run all algorithms and write the comparison table.
    Compare(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Catalog CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// kmeans, spectral, qcswap_kmeans, qkernel_kmeans or all.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Estimate fidelities from this many shots instead of exactly.
    #[arg(long)]
    shots: Option<u64>,
    /// Keep only records added in this year (default 2022).
    #[arg(long, conflicts_with = "all_years")]
    year: Option<i32>,
    /// Keep records from every year.
    #[arg(long)]
    all_years: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// all_zeros or first_qubit.
    #[arg(long)]
    kernel_measurement: Option<String>,
}

impl Common {
    fn spec(&self) -> Result<RunSpec> {
        let mut spec = RunSpec::default();
        if let Some(path) = &self.config {
            FileConfig::load(path)?.apply(&mut spec)?;
        }
        if let Some(v) = &self.input {
            spec.input = v.clone();
        }
        if let Some(v) = &self.algorithm {
            spec.algorithm = v.parse()?;
        }
        if let Some(v) = self.k {
            spec.k = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.restarts {
            spec.restarts = v;
        }
        if let Some(v) = self.shots {
            spec.shots = Some(v);
        }
        if let Some(v) = self.year {
            spec.year = Some(v);
        }
        if self.all_years {
            spec.year = None;
        }
        if let Some(v) = &self.out {
            spec.output_dir = v.clone();
        }
        if let Some(v) = &self.kernel_measurement {
            spec.kernel_measurement = parse_kernel_measurement(v)?;
        }
        Ok(spec)
    }
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let outcome = pipeline::cmd_run(&common.spec()?)?;
            for run in &outcome.runs {
                let m = run.metrics;
                println!(
                    "{:<20} silhouette={} davies_bouldin={} calinski_harabasz={} sizes={:?}",
                    run.algorithm.label(),
                    fmt_metric(m.map(|m| m.silhouette)),
                    fmt_metric(m.map(|m| m.davies_bouldin)),
                    fmt_metric(m.map(|m| m.calinski_harabasz)),
                    run.result.cluster_sizes()
                );
            }
            for path in &outcome.written {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Elbow {
            common,
            k_min,
            k_max,
        } => {
            let mut spec = common.spec()?;
            if let Some(v) = k_min {
                spec.k_min = v;
            }
            if let Some(v) = k_max {
                spec.k_max = v;
            }
            let outcome = pipeline::cmd_elbow(&spec)?;
            for (k, w) in &outcome.curve {
                println!("k={k:<3} wcss={w:.6}");
            }
            match outcome.suggested_k {
                Some(k) => println!("suggested k: {k}"),
                None => println!("suggested k: n/a (need at least 3 values of k)"),
            }
        }
        Command::Compare(common) => {
            let outcome = pipeline::cmd_compare(&common.spec()?)?;
            print!("{}", outcome.table);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(Error::Internal(String::new()).exit_code() as u8)
        }
    }
}
