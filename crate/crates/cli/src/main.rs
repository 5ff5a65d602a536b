use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thag_core::exact::parse_decimal;
use thag_core::harness::bench::{sweep, sweep_csv};
use thag_core::harness::{plan_inputs_from_toml, run_protocol, selftest, ProtocolConfig};
use thag_core::planner::{interval_approx_check, plan, region_grid};
use thag_core::{Error, PlanInputs, Scheme};

#[derive(Parser)]
#[command(name = "thag", version, about = "Threshold additive HE for private average aggregation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum moduli, the cheaper scheme and RNS primes for one parameter set.
    Plan(PlanArgs),
    /// MBFV-vs-MCKKS verdict grid over (log2 t, log2 1/ε) as CSV.
    Region(RegionArgs),
    /// Run the aggregation protocol from a config file.
    Run(RunArgs),
    /// Protocol timings over a sweep of party counts, as CSV.
    Bench(BenchArgs),
    /// Small-parameter checks of every module.
    Selftest,
}

#[derive(Args)]
struct RingArgs {
    #[arg(long, default_value_t = 16384)]
    n: usize,
    #[arg(long = "parties", short = 'L', default_value_t = 16)]
    parties: usize,
    #[arg(long, default_value_t = 3.2)]
    sigma: f64,
    /// Noise bound B as a decimal; 6σ when omitted.
    #[arg(long)]
    bound: Option<String>,
    #[arg(long, default_value_t = 128)]
    lambda: u32,
}

impl RingArgs {
    fn inputs(&self, t_bits: u32, eps_bits: u32) -> Result<PlanInputs, Error> {
        let mut i = PlanInputs::new(self.n, self.parties, self.sigma, self.lambda, t_bits, eps_bits);
        if let Some(b) = &self.bound {
            i.bound = parse_decimal(b)?;
        }
        Ok(i)
    }
}

#[derive(Args)]
struct PlanArgs {
    /// TOML file with a [plan] section; overrides the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long, default_value_t = 45)]
    t_bits: u32,
    /// Explicit plaintext modulus t (decimal) instead of 2^t_bits.
    #[arg(long)]
    plaintext_modulus: Option<String>,
    #[arg(long, default_value_t = 45)]
    eps_bits: u32,
    /// Select primes for this scheme instead of the cheaper one.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Report but do not reject moduli above the security table.
    #[arg(long)]
    no_security: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Inclusive range, e.g. 8..120.
    #[arg(long, default_value = "8..120", value_parser = parse_range)]
    t_bits: RangeInclusive<u32>,
    #[arg(long, default_value = "8..120", value_parser = parse_range)]
    eps_bits: RangeInclusive<u32>,
    /// Also print the piecewise-linear boundary check to stderr.
    #[arg(long)]
    check_approx: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Transcript path; stdout when neither this nor the config names one.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long)]
    timings: Option<PathBuf>,
    #[arg(long)]
    aggregate: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    parties: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "bfv,ckks")]
    schemes: Vec<Scheme>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    Ok(a..=b)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_plan(a: PlanArgs) -> Result<ExitCode, Error> {
    let mut inputs = match &a.config {
        Some(path) => plan_inputs_from_toml(&fs::read_to_string(path)?)?,
        None => {
            let mut i = a.ring.inputs(a.t_bits, a.eps_bits)?;
            if let Some(t) = &a.plaintext_modulus {
                i.plaintext_modulus = Some(t.parse().map_err(|_| Error::Config(format!("bad plaintext modulus {t:?}")))?);
            }
            i.scheme = a.scheme;
            i
        }
    };
    if a.no_security {
        inputs.enforce_security = false;
    }
    emit(a.out.as_deref(), &plan(&inputs)?.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_region(a: RegionArgs) -> Result<ExitCode, Error> {
    let grid = region_grid(&a.ring.inputs(0, 0)?, a.t_bits, a.eps_bits)?;
    emit(a.out.as_deref(), &grid.to_csv())?;
    if a.check_approx {
        let r = interval_approx_check(&grid, 2.0);
        eprintln!(
            "crossover log2 t = {:.3}; max deviation outside ±2 bits: {:.4}",
            r.crossover, r.max_deviation_outside
        );
    }
    if let Some(x) = grid.onset_abscissa() {
        eprintln!("onset log2 t = {x}; MCKKS cells: {}/{}", grid.mckks_count(), grid.cells.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = ProtocolConfig::load(&a.config)?;
    if let Some(r) = a.rounds {
        cfg.rounds = r;
    }
    cfg.parallel_clients |= a.parallel;
    let out = run_protocol(&cfg)?;
    let t = &out.transcript;
    emit(a.transcript.as_deref().or(cfg.output.transcript.as_deref()), &t.to_text())?;
    if let Some(p) = a.timings.as_deref().or(cfg.output.timings.as_deref()) {
        fs::write(p, out.timings.to_csv())?;
    }
    if let Some(p) = a.aggregate.as_deref().or(cfg.output.aggregate.as_deref()) {
        let mut s = String::with_capacity(t.aggregate.len() * 24);
        for v in &t.aggregate {
            s.push_str(&format!("{v:e}\n"));
        }
        fs::write(p, s)?;
    }
    for (label, d) in out.timings.rows() {
        eprintln!("{label:<14} {:>10.3} s", d.as_secs_f64());
    }
    eprintln!(
        "{} over {} rounds: {} failures, max error {:.3e}",
        t.header.scheme,
        t.header.rounds,
        t.failures(),
        t.max_abs_error()
    );
    Ok(if t.failures() == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode, Error> {
    let cfg = ProtocolConfig::load(&a.config)?;
    let rows = sweep(&cfg, &a.schemes, &a.parties)?;
    emit(a.out.as_deref(), &sweep_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Region(a) => cmd_region(a),
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Selftest => {
            let r = selftest();
            println!("{r}");
            Ok(if r.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(if e.is_config_rejection() { 2 } else { 3 })
    })
}
