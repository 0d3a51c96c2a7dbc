use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcs_core::diagnostics::{
    lpd_distortion_estimate, mean_width_sparse, rip_distortion_estimate, PairSampler, UnitSampler,
};
use qcs_core::harness::{
    audit_path, emit_plot, fit_loglog_slope, format_sig9, read_records, run_to_file, Column,
    ExperimentConfig, PlotStyle, Regressor, SlopeOptions, TrialRecord,
};
use qcs_core::quantizer::{dither_expectation_check, Dithering, QuantizerConfig};
use qcs_core::rng::seeded;
use qcs_core::sensing::{SensingKind, SensingOperator};
use qcs_core::signals::SignalModel;
use qcs_core::Error;

#[derive(Parser)]
#[command(name = "qcs", version, about = "Dithered quantized compressive sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write the trial CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to the config's `output` key, then
        /// `results/<experiment_id>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit log-log slopes of median (and mean) error per group.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated grouping columns.
        #[arg(long, value_delimiter = ',')]
        group_by: Option<Vec<String>>,
        /// Regress on delta instead of m.
        #[arg(long)]
        by_delta: bool,
        #[arg(long = "x-min", alias = "m-min")]
        x_min: Option<f64>,
        #[arg(long = "x-max", alias = "m-max")]
        x_max: Option<f64>,
    },
    /// Draw median error curves as SVG (plus a CSV of the plotted points).
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Error against delta instead of m.
        #[arg(long)]
        by_delta: bool,
        #[arg(long)]
        title: Option<String>,
    },
    /// Sampled distortion and width estimates.
    Diagnose {
        #[command(subcommand)]
        what: Diagnose,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    Sparse,
    Compressible,
    Lowrank,
}

#[derive(Clone, Copy, ValueEnum)]
enum SensingArg {
    Gaussian,
    Bernoulli,
    Pdct,
    Sors,
}

impl From<SensingArg> for SensingKind {
    fn from(s: SensingArg) -> Self {
        match s {
            SensingArg::Gaussian => SensingKind::Gaussian,
            SensingArg::Bernoulli => SensingKind::Bernoulli,
            SensingArg::Pdct => SensingKind::PartialDct,
            SensingArg::Sors => SensingKind::Sors,
        }
    }
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    sensing: SensingArg,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "sparse")]
    set: SetArg,
    /// Ambient dimension (vector sets).
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 32)]
    n1: usize,
    #[arg(long, default_value_t = 32)]
    n2: usize,
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Sample the difference set (2k-sparse, rank 2r) instead of the set.
    #[arg(long)]
    differences: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OperatorArgs {
    fn model(&self) -> SignalModel {
        match self.set {
            SetArg::Sparse => SignalModel::Sparse { n: self.n, k: self.k },
            SetArg::Compressible => SignalModel::Compressible { n: self.n, k: self.k },
            SetArg::Lowrank => SignalModel::LowRank {
                rows: self.n1,
                cols: self.n2,
                rank: self.r,
            },
        }
    }

    fn sampler(&self) -> UnitSampler {
        let model = self.model();
        if self.differences {
            return UnitSampler::for_differences(&model);
        }
        match model {
            SignalModel::Sparse { n, k } => UnitSampler::Sparse { n, k },
            SignalModel::Compressible { n, k } => UnitSampler::Compressible { n, k },
            SignalModel::LowRank { rows, cols, rank } => UnitSampler::LowRank { rows, cols, rank },
        }
    }

    fn operator(&self) -> Result<SensingOperator, Error> {
        self.model().validate()?;
        SensingOperator::new(self.sensing.into(), self.m, self.model().dim(), self.seed)
    }
}

#[derive(Subcommand)]
enum Diagnose {
    /// max |‖Φu‖²/m − 1| over sampled unit vectors.
    Rip(OperatorArgs),
    /// max (1/m)|⟨A(u) − Φu, Φv⟩| over sampled unit pairs.
    Lpd {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value = "on")]
        dithering: String,
        /// Redraw the dither for every pair.
        #[arg(long)]
        fresh_dither: bool,
    },
    /// Empirical mean of Q(a + ξ) against a.
    Dither {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo Gaussian mean width of unit k-sparse vectors.
    Width {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } => 3,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 2,
    }
}

fn load(path: &Path) -> Result<Vec<TrialRecord>, Error> {
    read_records(BufReader::new(File::open(path)?))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from(format!("results/{}.csv", cfg.experiment_id)));
            let start = Instant::now();
            let output = run_to_file(&cfg, &out, threads)?;
            eprintln!(
                "{}: {} trials in {:.1}s -> {}",
                cfg.experiment_id,
                output.records.len(),
                start.elapsed().as_secs_f64(),
                out.display()
            );
            if let Some(audits) = &output.audits {
                let holds = audits.iter().filter(|a| a.holds).count();
                eprintln!(
                    "bound held in {holds}/{} trials (estimates are lower bounds) -> {}",
                    audits.len(),
                    audit_path(&out).display()
                );
            }
        }
        Command::Slope {
            input,
            group_by,
            by_delta,
            x_min,
            x_max,
        } => {
            let records = load(&input)?;
            let mut opts = SlopeOptions {
                x_min,
                x_max,
                ..SlopeOptions::default()
            };
            if by_delta {
                opts.regressor = Regressor::Delta;
                opts.group_by = vec![Column::Set, Column::Sensing, Column::M, Column::Dithered];
            }
            if let Some(cols) = group_by {
                opts.group_by = cols.iter().map(|c| c.parse()).collect::<Result<_, _>>()?;
            }
            println!("group,points,slope_median,r2_median,slope_mean,r2_mean,note");
            for g in fit_loglog_slope(&records, &opts)? {
                let fmt = |f: Option<qcs_core::harness::Fit>| match f {
                    Some(f) => (format_sig9(f.slope), format_sig9(f.r2)),
                    None => ("nan".into(), "nan".into()),
                };
                let (sm, rm) = fmt(g.median_fit);
                let (sa, ra) = fmt(g.mean_fit);
                println!(
                    "\"{}\",{},{sm},{rm},{sa},{ra},{}",
                    g.series.label(),
                    g.series.points.len(),
                    g.flag.unwrap_or_default()
                );
            }
        }
        Command::Plot {
            input,
            out,
            by_delta,
            title,
        } => {
            let records = load(&input)?;
            let mut style = if by_delta {
                PlotStyle::error_vs_delta()
            } else {
                PlotStyle::error_vs_m()
            };
            if let Some(t) = title {
                style.title = t;
            }
            let summary = emit_plot(&records, &style, &out)?;
            eprintln!(
                "{} curves, {} guide lines -> {} (data: {})",
                summary.curves,
                summary.guide_lines,
                summary.svg_path.display(),
                summary.sidecar_path.display()
            );
        }
        Command::Diagnose { what } => diagnose(what)?,
    }
    Ok(())
}

fn diagnose(what: Diagnose) -> Result<(), Error> {
    match what {
        Diagnose::Rip(args) => {
            let op = args.operator()?;
            let mut rng = seeded(args.seed ^ 0x5eed);
            let rep = rip_distortion_estimate(&op, &args.sampler(), args.samples, &mut rng)?;
            println!("{rep}");
            println!("median sample distortion {}", format_sig9(rep.median()));
        }
        Diagnose::Lpd {
            op: args,
            delta,
            dithering,
            fresh_dither,
        } => {
            let op = args.operator()?;
            let dithering: Dithering = dithering.parse()?;
            let cfg = QuantizerConfig::new(delta, dithering)?;
            let pairs = PairSampler::Independent(args.sampler());
            let mut rng = seeded(args.seed ^ 0x5eed);
            let rep = lpd_distortion_estimate(&op, cfg, &pairs, args.samples, fresh_dither, &mut rng)?;
            println!("{rep}");
            println!("median sample distortion {}", format_sig9(rep.median()));
        }
        Diagnose::Dither { a, delta, samples, seed } => {
            let mean = dither_expectation_check(a, delta, samples, &mut seeded(seed))?;
            let band = 2.0 * delta / (samples as f64).sqrt();
            let dev = (mean - a).abs();
            println!(
                "E[Q(a+xi)] ~ {} for a = {a}; |mean - a| = {} (4-sigma band {}) {}",
                format_sig9(mean),
                format_sig9(dev),
                format_sig9(band),
                if dev <= band { "within" } else { "OUTSIDE" }
            );
        }
        Diagnose::Width { n, k, draws, seed } => {
            let w = mean_width_sparse(n, k, draws, &mut seeded(seed))?;
            let kf = k as f64;
            println!(
                "w(Sigma_{k} in B^{n}) ~ {} (w^2 = {}; k = {k}, k ln(n/k) = {})",
                format_sig9(w),
                format_sig9(w * w),
                format_sig9(kf * (n as f64 / kf).ln())
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
