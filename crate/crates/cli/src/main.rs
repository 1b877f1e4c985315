use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ehfade_cli::commands::{cmd_bounds, cmd_simulate, cmd_solve_k, cmd_sweep, cmd_verify};
use ehfade_cli::{CliError, CliResult, Config, OutputOptions};

/// Throughput bounds and simulation for energy-harvesting fading links.
///
/// Outputs go to `--out`, or to $EHFADE_OUTPUT_DIR when that is set.
/// Exit codes: 0 ok, 1 verification or run failure, 2 configuration
/// error, 3 unsupported regime.
#[derive(Parser)]
#[command(name = "ehfade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Slots per replication (accepts `1e6`).
    #[arg(long, global = true)]
    slots: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    /// Primary output file; a `.manifest.json` is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON document instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Extra config entries, `KEY=VALUE`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Default)]
struct ModelFlags {
    /// tx or tx_rx.
    #[arg(long)]
    mode: Option<String>,
    /// e.g. `bernoulli:p=0.5,e=10`, `uniform:0,10`, `discrete:0:0.5,4:0.5`.
    #[arg(long)]
    arrivals: Option<String>,
    #[arg(long)]
    b_max: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    rx_policy: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every applicable throughput bound.
    Bounds {
        #[command(flatten)]
        model: ModelFlags,
        /// Capacity constant of the median-quantized lower bound.
        #[arg(long)]
        c: Option<String>,
    },
    /// Solve the gap recursion for the constant k(p).
    SolveK {
        #[arg(long)]
        p: Option<String>,
    },
    /// Run the Monte Carlo simulator.
    Simulate {
        #[command(flatten)]
        model: ModelFlags,
        /// Write every slot of replication 0 to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate bounds and simulations over a parameter grid (CSV).
    Sweep {
        /// Comma list of bernoulli, ctp, uniform.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        p_grid: Option<String>,
        #[arg(long)]
        q_grid: Option<String>,
        #[arg(long)]
        b_grid: Option<String>,
    },
    /// Run the acceptance checks and report pass/fail per criterion.
    Verify,
}

fn overrides(cli: &Cli) -> CliResult<Config> {
    let mut cfg = Config::default();
    let mut put = |k: &str, v: Option<&str>| -> CliResult<()> {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
        Ok(())
    };
    let c = &cli.common;
    put("seed", c.seed.map(|s| s.to_string()).as_deref())?;
    put("slots", c.slots.as_deref())?;
    put("reps", c.reps.as_deref())?;
    let model = |m: &ModelFlags| {
        [
            ("mode", m.mode.clone()),
            ("arrivals", m.arrivals.clone()),
            ("b_max", m.b_max.clone()),
            ("p", m.p.clone()),
            ("q", m.q.clone()),
            ("policy", m.policy.clone()),
            ("rx_policy", m.rx_policy.clone()),
        ]
    };
    let pairs: Vec<(&str, Option<String>)> = match &cli.command {
        Command::Bounds { model: m, c } => model(m).into_iter().chain([("c", c.clone())]).collect(),
        Command::Simulate { model: m, .. } => model(m).into_iter().collect(),
        Command::SolveK { p } => vec![("p", p.clone())],
        Command::Sweep { kind, p_grid, q_grid, b_grid } => vec![
            ("grid.kind", kind.clone()),
            ("grid.p", p_grid.clone()),
            ("grid.q", q_grid.clone()),
            ("grid.b_max", b_grid.clone()),
        ],
        Command::Verify => Vec::new(),
    };
    for (k, v) in pairs {
        put(k, v.as_deref())?;
    }
    for kv in &c.set {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        put(k.trim(), Some(v.trim()))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<u8> {
    let mut cfg = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    cfg.overlay(&overrides(cli)?);
    let trace = match &cli.command {
        Command::Simulate { trace, .. } => trace.clone(),
        _ => None,
    };
    let opts = OutputOptions { out: cli.common.out.clone(), trace, json: cli.common.json };
    let outcome = match cli.command {
        Command::Bounds { .. } => cmd_bounds(&cfg, &opts)?,
        Command::SolveK { .. } => cmd_solve_k(&cfg, &opts)?,
        Command::Simulate { .. } => cmd_simulate(&cfg, &opts)?,
        Command::Sweep { .. } => cmd_sweep(&cfg, &opts)?,
        Command::Verify => cmd_verify(&cfg, &opts)?,
    };
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(outcome.stdout.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ehfade: {e}");
            e.exit()
        }
    }
}
