use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use invisible_attractor::commands::{run, BaseSource, Command, RunConfig, Status, Suite};

#[derive(Parser)]
#[command(name = "invis", version, about = "Simulate and verify step skew products with an invisible attractor part")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the derived constants.
    Params(Common),
    /// Iterate orbits and write visit statistics.
    Simulate(Common),
    /// Run a certificate suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[command(flatten)]
        common: Common,
    },
    /// Find a critical word for a target point of Q-.
    CriticalWord {
        /// Target coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Option<Vec<f64>>,
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    orbits: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    norm_grid: Option<usize>,
    /// random, all-zero, all-one, descent or a file
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    trace_stride: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with the same keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

macro_rules! set {
    ($cfg:ident, $src:ident, $($f:ident),*) => {
        $(if let Some(v) = $src.$f { $cfg.$f = v; })*
    };
}

impl Common {
    fn apply(self, mut cfg: RunConfig) -> Result<RunConfig, String> {
        set!(cfg, self, n, k, seed, steps, orbits, delta, grid, norm_grid, targets, trials);
        if let Some(b) = self.base {
            cfg.base = b.parse::<BaseSource>().map_err(|e| e.to_string())?;
        }
        cfg.burn_in = self.burn_in.or(cfg.burn_in);
        cfg.trace_stride = self.trace_stride.or(cfg.trace_stride);
        cfg.out = self.out.or(cfg.out);
        cfg.threads = self.threads.or(cfg.threads);
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, suite, x, radius) = match cli.cmd {
        Cmd::Params(c) => (Command::Params, c, None, None, None),
        Cmd::Simulate(c) => (Command::Simulate, c, None, None, None),
        Cmd::Verify { suite, common } => (Command::Verify, common, suite, None, None),
        Cmd::CriticalWord { x, radius, common } => (Command::CriticalWord, common, None, x, radius),
    };
    let base = match &common.config {
        Some(path) => match RunConfig::from_json_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("invis: config {}: {e}", path.display());
                return ExitCode::from(Status::BadArguments as u8);
            }
        },
        None => RunConfig::default(),
    };
    let mut cfg = match common.apply(base) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invis: {e}");
            return ExitCode::from(Status::BadArguments as u8);
        }
    };
    cfg.suite = suite.unwrap_or(cfg.suite);
    cfg.x = x.or(cfg.x);
    cfg.radius = radius.unwrap_or(cfg.radius);

    let out = run(cmd, &cfg);
    print!("{}", out.stdout);
    if out.status != Status::Success {
        if let Some(msg) = serde_json::from_str::<serde_json::Value>(&out.stdout).ok().and_then(|v| v["result"]["error"].as_str().map(str::to_string)) {
            eprintln!("invis: {msg}");
        }
    }
    ExitCode::from(out.status as u8)
}
