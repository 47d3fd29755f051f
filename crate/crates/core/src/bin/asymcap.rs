use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use asymcap::chaining::chain_rate;
use asymcap::harness::{self, Approach, ChannelSpec, ExperimentSpec};
use asymcap::ldensity::{
    capacity_functional, conditional_entropy_functional, posterior_ldensities, prior_ldensities, symmetrize_posterior,
    symmetrize_prior,
};
use asymcap::polar::{PolarContext, Selection, DEFAULT_SAMPLES};
use asymcap::{Dmc, Error, InputDist, Result};

#[derive(Parser)]
#[command(name = "asymcap", version, about = "Coding for asymmetric discrete memoryless channels")]
struct Cli {
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, optimal input and symmetric capacity.
    Capacity {
        #[arg(long)]
        channel: String,
    },
    /// L-densities of a binary-input channel and their functionals.
    Inspect {
        #[arg(long)]
        channel: String,
        /// Input bias P(X = 1); defaults to the capacity-achieving one.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Gallager mapping with polar component codes.
    Gallager {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        #[arg(long, default_value_t = 0.75)]
        backoff: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
    #[command(subcommand)]
    Polar(PolarCommand),
    #[command(subcommand)]
    Sparse(SparseCommand),
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Run an experiment from a JSON spec file.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Also sweep a chaining spec over these k and write CSV here.
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "2,5,10,20")]
        ks: Vec<usize>,
    },
    /// Every applicable approach at a matched channel-use budget.
    Compare {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 1024)]
        blocklen: usize,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, alias = "n", default_value_t = 1024)]
    blocklen: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

#[derive(Subcommand)]
enum PolarCommand {
    /// Monte Carlo construction, saved as a reusable context.
    Construct {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Information rate as a fraction of I(X;Y); overrides `--delta`.
        #[arg(long)]
        info_fraction: Option<f64>,
        /// Plain threshold on the Bhattacharyya estimates.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        lossless_delta: f64,
    },
    /// Encode a 0/1 message string with a saved context.
    Encode {
        #[arg(long)]
        context: PathBuf,
        #[arg(long)]
        message: String,
        #[arg(long, default_value_t = 0)]
        shared_seed: u64,
    },
    /// Decode comma-separated channel outputs with a saved context.
    Decode {
        #[arg(long)]
        context: PathBuf,
        #[arg(long, value_delimiter = ',')]
        y: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        shared_seed: u64,
    },
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 0.75)]
        info_fraction: f64,
        #[arg(long, default_value_t = 1e-3)]
        lossless_delta: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Subcommand)]
enum SparseCommand {
    /// Syndrome decoding of biased words with an (l, r) regular graph.
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long, default_value_t = 6)]
        r: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Subcommand)]
enum ChainCommand {
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value = "polar")]
        source: String,
        #[arg(long, default_value = "polar")]
        code: String,
        #[arg(long, default_value_t = 0.75)]
        backoff: f64,
        #[arg(long, default_value_t = 0.05)]
        shaping_tolerance: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
}

/// A preset, a path to a JSON file, or inline JSON.
fn channel_spec(arg: &str) -> Result<ChannelSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let ch: Dmc = fs::read_to_string(path)?.trim().parse()?;
        return Ok(ChannelSpec::Matrix(ch));
    }
    let ch: Dmc = arg.parse()?;
    if arg.trim_start().starts_with('{') {
        Ok(ChannelSpec::Matrix(ch))
    } else {
        Ok(ChannelSpec::Preset(arg.to_string()))
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Config(format!("message must be 0/1 characters, found `{other}`"))),
        })
        .collect()
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn simulate(out: &Option<PathBuf>, channel: &str, sim: SimArgs, approach: Approach) -> Result<()> {
    let spec = ExperimentSpec {
        channel: channel_spec(channel)?,
        blocklen: sim.blocklen,
        trials: sim.trials,
        seed: sim.seed,
        samples: sim.samples,
        approach,
    };
    emit(out, &harness::run(&spec)?)
}

fn execute(cli: Cli) -> Result<()> {
    let out = &cli.out;
    match cli.command {
        Command::Capacity { channel } => {
            let ch = channel_spec(&channel)?.resolve()?;
            emit(out, &asymcap::dmc::capacity(&ch, asymcap::dmc::DEFAULT_CAPACITY_TOL)?)
        }
        Command::Inspect { channel, alpha } => {
            let ch = channel_spec(&channel)?.resolve()?;
            let alpha = match alpha {
                Some(a) => a,
                None => asymcap::dmc::capacity(&ch, asymcap::dmc::DEFAULT_CAPACITY_TOL)?.optimal_input[1],
            };
            let p = InputDist::bernoulli(alpha)?;
            let (aplus, aminus) = prior_ldensities(&ch)?;
            let (pplus, pminus) = posterior_ldensities(&ch, &p)?;
            let a = symmetrize_prior(&aplus, &aminus)?;
            let ap = symmetrize_posterior(&pplus, &pminus, &p)?;
            emit(
                out,
                &serde_json::json!({
                    "alpha": alpha,
                    "prior": { "plus": aplus, "minus": aminus, "symmetrized": a },
                    "posterior": { "plus": pplus, "minus": pminus, "symmetrized": ap },
                    "symmetric_capacity": capacity_functional(&a)?,
                    "conditional_entropy": conditional_entropy_functional(&ap)?,
                }),
            )
        }
        Command::Gallager { channel, delta, backoff, sim } => {
            simulate(out, &channel, sim, Approach::Gallager { delta, backoff })
        }
        Command::Polar(PolarCommand::Construct { channel, alpha, n, samples, seed, info_fraction, delta, lossless_delta }) => {
            let ch = channel_spec(&channel)?.resolve()?;
            let info = asymcap::dmc::capacity(&ch, asymcap::dmc::DEFAULT_CAPACITY_TOL)?;
            let alpha = alpha.unwrap_or(info.optimal_input[1]);
            let selection = match (info_fraction, delta) {
                (Some(f), _) => {
                    let i = asymcap::dmc::mutual_information(&ch, &InputDist::bernoulli(alpha)?)?;
                    Selection::RateTargeted { info_rate: f * i, lossless_delta }
                }
                (None, Some(d)) => Selection::Threshold { delta: d },
                (None, None) => Selection::default(),
            };
            let ctx = PolarContext::build(&ch, alpha, n, samples, seed, selection)?;
            match out {
                Some(p) => ctx.save(p),
                None => {
                    println!("{}", ctx.to_json()?);
                    Ok(())
                }
            }
        }
        Command::Polar(PolarCommand::Encode { context, message, shared_seed }) => {
            let ctx = PolarContext::load(&context)?;
            let (u, x) = ctx.encode_full(&parse_bits(&message)?, shared_seed)?;
            emit(out, &serde_json::json!({ "u": bits_string(&u), "x": bits_string(&x) }))
        }
        Command::Polar(PolarCommand::Decode { context, y, shared_seed }) => {
            let ctx = PolarContext::load(&context)?;
            let (msg, u) = ctx.decode(&y, shared_seed)?;
            emit(out, &serde_json::json!({ "message": bits_string(&msg), "u": bits_string(&u) }))
        }
        Command::Polar(PolarCommand::Simulate { channel, info_fraction, lossless_delta, sim }) => {
            simulate(out, &channel, sim, Approach::IntegratedPolar { info_fraction, lossless_delta })
        }
        Command::Sparse(SparseCommand::Simulate { channel, l, r, alpha, iterations, sim }) => {
            simulate(out, &channel, sim, Approach::SyndromeLdpc { l, r, alpha, iterations })
        }
        Command::Chain(ChainCommand::Simulate { channel, k, alpha, source, code, backoff, shaping_tolerance, sim }) => {
            simulate(out, &channel, sim, Approach::Chaining { k, source, code, backoff, shaping_tolerance, alpha })
        }
        Command::Run { spec, sweep_csv, ks } => {
            let spec = ExperimentSpec::from_json(&fs::read_to_string(&spec)?)?;
            emit(out, &harness::run(&spec)?)?;
            if let Some(path) = sweep_csv {
                let reports = harness::sweep_chain_k(&spec, &ks)?;
                harness::write_sweep_csv(&reports, fs::File::create(path)?)?;
            }
            Ok(())
        }
        Command::Compare { channel, blocklen, budget, seed, samples } => {
            let spec = channel_spec(&channel)?;
            let rows = harness::compare_approaches(&spec, blocklen, budget, seed, samples)?;
            let ch = spec.resolve()?;
            let info = asymcap::dmc::capacity(&ch, asymcap::dmc::DEFAULT_CAPACITY_TOL)?;
            // Asymptotic chaining rate at the block count used above.
            let h2 = asymcap::info::h2(info.optimal_input[1].clamp(0.0, 1.0));
            let chain = if ch.is_binary() {
                Some(chain_rate(h2, info.capacity, info.conditional_entropy_x_given_y, info.symmetric_capacity, 5))
            } else {
                None
            };
            emit(out, &serde_json::json!({ "capacity": info.capacity, "chain_rate_k5": chain, "rows": rows }))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
