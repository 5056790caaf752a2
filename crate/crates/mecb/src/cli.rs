//! Command-line front end: `mecbkit <ebim|mec|mecb|gridworld|mcg> ...`.
//!
//! Every experiment output embeds the full invocation (CSV comment header or
//! JSON field), and all randomness flows from `--seed` (falling back to the
//! `MECB_SEED` environment variable, then 0), so rerunning the same command
//! with the same seed reproduces every output byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::ebim::{self, EncoderMethod};
use crate::mcg::{self, MessageConfig, ProtocolOptions, SweepConfig};
use crate::mdp::{self, GridWorld, Policy};
use crate::mec::{self, CouplerMethod};
use crate::pipeline;
use crate::probdist::Distribution;
use crate::{sig12, Error, Result};

#[derive(Parser)]
#[command(
    name = "mecbkit",
    version,
    about = "Entropy-constrained coupling toolkit: EBIM, MEC, the bottleneck pipeline, and Markov coding games"
)]
struct Cli {
    /// RNG seed; falls back to the MECB_SEED environment variable, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all logical cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-bounded information maximization solvers
    #[command(subcommand)]
    Ebim(EbimCommand),
    /// Greedy minimum entropy coupling
    #[command(subcommand)]
    Mec(MecCommand),
    /// Encoder/decoder pipeline through a rate bottleneck
    #[command(subcommand)]
    Mecb(MecbCommand),
    /// Grid-world environment and policy training
    #[command(subcommand)]
    Gridworld(GridworldCommand),
    /// Rate-limited Markov coding games
    #[command(subcommand)]
    Mcg(McgCommand),
}

fn parse_encoder(s: &str) -> Result<EncoderMethod> {
    s.parse()
}

fn parse_coupler(s: &str) -> Result<CouplerMethod> {
    s.parse()
}

#[derive(Subcommand)]
enum EbimCommand {
    /// Solve for a maximal-information coupling under a rate budget
    Solve {
        /// Input distribution JSON ({"probs":[...]})
        #[arg(long)]
        dist: PathBuf,
        /// Rate budget in bits
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value = "alg1", value_parser = parse_encoder)]
        method: EncoderMethod,
        /// Output coupling JSON (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the rate/information frontier over a rate grid
    Frontier {
        #[arg(long)]
        dist: PathBuf,
        /// Rate grid as start:stop:step (inclusive)
        #[arg(long)]
        grid: String,
        /// Output CSV with columns rate,info,origin
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MecCommand {
    /// Couple two marginals with a greedy minimum entropy coupling
    Couple {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value = "max", value_parser = parse_coupler)]
        method: CouplerMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MecbCommand {
    /// Run the encoder/decoder pipeline at one rate budget
    Run {
        #[arg(long)]
        px: PathBuf,
        #[arg(long)]
        py: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value = "alg1", value_parser = parse_encoder)]
        encoder: EncoderMethod,
        #[arg(long, default_value = "max", value_parser = parse_coupler)]
        decoder: CouplerMethod,
        /// Output result JSON (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep rate budgets and export every end-to-end coupling
    Sweep {
        #[arg(long)]
        px: PathBuf,
        #[arg(long)]
        py: PathBuf,
        /// Rate grid as start:stop:step (inclusive)
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "alg1", value_parser = parse_encoder)]
        encoder: EncoderMethod,
        #[arg(long, default_value = "max", value_parser = parse_coupler)]
        decoder: CouplerMethod,
        /// Output CSV with columns compression_rate,x,y,mass
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct LayoutArg {
    /// Grid layout JSON (stock 8x8 layout if omitted)
    #[arg(long)]
    layout: Option<PathBuf>,
}

impl LayoutArg {
    fn load(&self) -> Result<GridWorld> {
        match &self.layout {
            Some(path) => read_json(path),
            None => Ok(GridWorld::default_8x8()),
        }
    }
}

#[derive(Subcommand)]
enum GridworldCommand {
    /// Learn a maximum-entropy policy by soft Q-value iteration
    Train {
        #[command(flatten)]
        layout: LayoutArg,
        /// Entropy temperature
        #[arg(long)]
        beta: f64,
        /// Convergence tolerance on the Q sup-norm
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Output policy JSON
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum McgCommand {
    /// Play one seeded episode and dump the full record
    Run {
        #[command(flatten)]
        layout: LayoutArg,
        /// Policy JSON from `gridworld train`
        #[arg(long)]
        policy: PathBuf,
        /// Message alphabet size (uniform prior)
        #[arg(long, default_value_t = 64)]
        messages: usize,
        /// Rate limit in bits per round
        #[arg(long)]
        rate: f64,
        /// Message priority weight in the combined score
        #[arg(long, default_value_t = 1.0)]
        priority: f64,
        /// True message index (sampled from the prior if omitted)
        #[arg(long)]
        message: Option<usize>,
        #[arg(long, default_value = "alg1", value_parser = parse_encoder)]
        encoder: EncoderMethod,
        /// Output episode JSON (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the reward/accuracy trade-off over beta and rate grids
    Sweep {
        #[command(flatten)]
        layout: LayoutArg,
        /// Beta grid, comma separated
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        betas: Vec<f64>,
        /// Rate grid in bits, comma separated
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        episodes: usize,
        #[arg(long, default_value_t = 512)]
        messages: usize,
        #[arg(long, default_value_t = 1.0)]
        priority: f64,
        #[arg(long, default_value = "alg1", value_parser = parse_encoder)]
        encoder: EncoderMethod,
        /// Output CSV: beta,rate,encoder,mean_return,accuracy,combined,steps_mean
        #[arg(long)]
        out: PathBuf,
        /// Optional belief-curve CSV: beta,rate,encoder,step,mean_true_belief
        #[arg(long)]
        curves: Option<PathBuf>,
    },
}

/// Parses arguments, runs the selected command and maps the outcome onto the
/// process exit code: 0 success, 1 validation/runtime error, 2 usage error.
pub fn dispatch(args: &[String]) -> i32 {
    let invocation = args.join(" ");
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(jobs) = cli.jobs {
        // a second build_global in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var("MECB_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    });
    match run(cli.command, seed, &invocation) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(command: Command, seed: u64, invocation: &str) -> Result<()> {
    match command {
        Command::Ebim(cmd) => run_ebim(cmd, seed, invocation),
        Command::Mec(cmd) => run_mec(cmd),
        Command::Mecb(cmd) => run_mecb(cmd, seed, invocation),
        Command::Gridworld(cmd) => run_gridworld(cmd),
        Command::Mcg(cmd) => run_mcg(cmd, seed, invocation),
    }
}

fn run_ebim(cmd: EbimCommand, seed: u64, invocation: &str) -> Result<()> {
    match cmd {
        EbimCommand::Solve {
            dist,
            rate,
            method,
            out,
        } => {
            let p: Distribution = read_json(&dist)?;
            let coupling = ebim::solve(&p, rate, method)?;
            let (_, p_t) = coupling.marginals();
            eprintln!(
                "method={method} rate_budget={rate} H(T)={} I(X;T)={}",
                sig12(p_t.entropy().0),
                sig12(coupling.mutual_information().0)
            );
            emit_json(&coupling, out.as_deref())
        }
        EbimCommand::Frontier { dist, grid, out } => {
            let p: Distribution = read_json(&dist)?;
            let rates = parse_grid(&grid)?;
            let points = ebim::frontier_sweep(&p, &rates)?;
            let mut w = file_writer(&out)?;
            write_provenance(&mut w, invocation, seed)?;
            writeln!(w, "rate,info,origin")?;
            for pt in &points {
                writeln!(w, "{},{},{}", sig12(pt.rate.0), sig12(pt.info.0), pt.origin)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn run_mec(cmd: MecCommand) -> Result<()> {
    let MecCommand::Couple { p, q, method, out } = cmd;
    let p: Distribution = read_json(&p)?;
    let q: Distribution = read_json(&q)?;
    let coupling = mec::couple(&p, &q, method);
    let (rows, cols) = coupling.marginals();
    let err_p = rows
        .probs()
        .iter()
        .zip(p.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let err_q = cols
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!(
        "joint_entropy_bits={} marginal_error_p={} marginal_error_q={}",
        sig12(mec::joint_entropy(&coupling).0),
        sig12(err_p),
        sig12(err_q)
    );
    emit_json(&coupling, out.as_deref())
}

fn run_mecb(cmd: MecbCommand, seed: u64, invocation: &str) -> Result<()> {
    match cmd {
        MecbCommand::Run {
            px,
            py,
            rate,
            encoder,
            decoder,
            out,
        } => {
            let p: Distribution = read_json(&px)?;
            let q: Distribution = read_json(&py)?;
            let result = pipeline::pipeline(&p, &q, rate, encoder, decoder)?;
            #[derive(Serialize)]
            struct Output<'a> {
                invocation: &'a str,
                #[serde(flatten)]
                result: &'a pipeline::PipelineResult,
            }
            emit_json(
                &Output {
                    invocation,
                    result: &result,
                },
                out.as_deref(),
            )
        }
        MecbCommand::Sweep {
            px,
            py,
            grid,
            encoder,
            decoder,
            out,
        } => {
            let p: Distribution = read_json(&px)?;
            let q: Distribution = read_json(&py)?;
            let rates = parse_grid(&grid)?;
            let results = pipeline::rate_sweep(&p, &q, &rates, encoder, decoder)?;
            let mut w = file_writer(&out)?;
            write_provenance(&mut w, invocation, seed)?;
            pipeline::write_coupling_grid(&results, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn run_gridworld(cmd: GridworldCommand) -> Result<()> {
    let GridworldCommand::Train {
        layout,
        beta,
        tol,
        out,
    } = cmd;
    let env = layout.load()?;
    let policy = mdp::soft_q_iteration(&env, beta, tol)?;
    eprintln!(
        "trained beta={beta} mean_action_entropy_bits={}",
        sig12(policy.mean_action_entropy(&env))
    );
    emit_json(&policy, Some(&out))
}

fn run_mcg(cmd: McgCommand, seed: u64, invocation: &str) -> Result<()> {
    match cmd {
        McgCommand::Run {
            layout,
            policy,
            messages,
            rate,
            priority,
            message,
            encoder,
            out,
        } => {
            let env = layout.load()?;
            let policy: Policy = read_json(&policy)?;
            let msg = MessageConfig::uniform(messages, priority, rate);
            let opts = ProtocolOptions {
                encoder,
                ..ProtocolOptions::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(mcg::mix_seed(&[seed, 0x6d6367]));
            let true_message = match message {
                Some(m) => m,
                None => {
                    use rand::Rng;
                    // inverse-CDF draw from the uniform prior
                    let u: f64 = rng.gen();
                    ((u * messages as f64) as usize).min(messages - 1)
                }
            };
            let result = mcg::run_episode(&env, &policy, &msg, &opts, true_message, &mut rng)?;
            #[derive(Serialize)]
            struct Output<'a> {
                invocation: &'a str,
                seed: u64,
                true_message: usize,
                #[serde(flatten)]
                result: &'a mcg::EpisodeResult,
            }
            emit_json(
                &Output {
                    invocation,
                    seed,
                    true_message,
                    result: &result,
                },
                out.as_deref(),
            )
        }
        McgCommand::Sweep {
            layout,
            betas,
            rates,
            episodes,
            messages,
            priority,
            encoder,
            out,
            curves,
        } => {
            let env = layout.load()?;
            let cfg = SweepConfig {
                betas,
                rates,
                episodes,
                messages,
                priority,
                encoder,
                coupler: CouplerMethod::MaxSeeking,
                seed,
            };
            let cells = mcg::sweep(&env, &cfg)?;
            let mut w = file_writer(&out)?;
            write_provenance(&mut w, invocation, seed)?;
            writeln!(
                w,
                "beta,rate,encoder,mean_return,accuracy,combined,steps_mean"
            )?;
            for cell in &cells {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    sig12(cell.beta),
                    sig12(cell.rate),
                    cell.encoder,
                    sig12(cell.mean_return),
                    sig12(cell.accuracy),
                    sig12(cell.mean_combined),
                    sig12(cell.steps_mean)
                )?;
            }
            w.flush()?;
            if let Some(curves_path) = curves {
                let mut w = file_writer(&curves_path)?;
                write_provenance(&mut w, invocation, seed)?;
                writeln!(w, "beta,rate,encoder,step,mean_true_belief")?;
                for cell in &cells {
                    for (step, &belief) in cell.belief_curve.iter().enumerate() {
                        writeln!(
                            w,
                            "{},{},{},{step},{}",
                            sig12(cell.beta),
                            sig12(cell.rate),
                            cell.encoder,
                            sig12(belief)
                        )?;
                    }
                }
                w.flush()?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// I/O helpers
// ---------------------------------------------------------------------------

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn file_writer(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn write_provenance(w: &mut impl Write, invocation: &str, seed: u64) -> Result<()> {
    writeln!(w, "# {invocation} | seed={seed}")?;
    Ok(())
}

/// Inclusive `start:stop:step` grid.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!(
            "grid `{spec}` must have the form start:stop:step"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid start `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid stop `{}`", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid step `{}`", parts[2])))?;
    if !(step > 0.0) || stop < start {
        return Err(Error::Domain(format!(
            "grid `{spec}` must have positive step and stop >= start"
        )));
    }
    let mut rates = Vec::new();
    let mut i = 0u64;
    loop {
        let x = start + step * i as f64;
        if x > stop + 1e-12 {
            break;
        }
        rates.push(x);
        i += 1;
    }
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        // no accumulation drift at many steps
        let g = parse_grid("0:3:0.1").unwrap();
        assert_eq!(g.len(), 31);
        assert!((g[30] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.5), "5.00000000000e-1");
        assert_eq!(sig12(1.0), "1.00000000000e0");
    }
}
