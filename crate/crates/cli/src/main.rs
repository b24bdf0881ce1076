use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vastream::io::{self, RunConfig, TraceKind};
use vastream::model::{DecisionMode, FovExtent};

#[derive(Parser)]
#[command(name = "vastream", version, about = "Tiled 360-degree video streaming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one policy and write session.csv and summary.json.
    Simulate(RunArgs),
    /// Like `simulate`, also printing the regret analysis.
    Regret(RunArgs),
    /// Run several policies on the same traces.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Exhaustive offline optimum of a tiny instance.
    OfflineOpt(RunArgs),
    /// Check trace files (kind detected from the CSV header).
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML).
    #[arg(value_name = "CONFIG", required_unless_present = "config_flag")]
    config: Option<PathBuf>,
    #[arg(long = "config", value_name = "PATH", conflicts_with = "config")]
    config_flag: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    mode: Option<DecisionMode>,
    #[arg(long)]
    policy: Option<String>,
}

impl RunArgs {
    fn load(&self) -> vastream::Result<(RunConfig, PathBuf)> {
        let path = self
            .config
            .as_ref()
            .or(self.config_flag.as_ref())
            .expect("clap requires a config");
        let mut cfg = RunConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        if let Some(policy) = &self.policy {
            cfg.policy = policy.clone();
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

fn simulate(args: &RunArgs, verbose: bool) -> anyhow::Result<()> {
    let (cfg, out) = args.load()?;
    let scenario = cfg.scenario()?;
    let outcome = io::run_policy(&scenario, &cfg.policy)?;
    io::write_run(&out, &outcome)?;
    println!(
        "{}: QoE {:.4}, rebuffer {:.4} s",
        cfg.policy, outcome.qoe.total, outcome.log.total_rebuffer()
    );
    if verbose {
        println!(
            "regret {:.4} ({:.4} per segment), V_empty {}, V_r {:.4}",
            outcome.regret.total,
            outcome.regret.per_segment,
            outcome.stats.v_empty,
            outcome.stats.v_r
        );
        if let Some(b) = outcome.bound {
            println!("regret bound {b:.4}");
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn compare(args: &RunArgs, threads: Option<usize>) -> anyhow::Result<()> {
    let (cfg, out) = args.load()?;
    let names = if cfg.policies.is_empty() {
        vec![cfg.policy.clone()]
    } else {
        cfg.policies.clone()
    };
    let scenario = cfg.scenario()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building thread pool")?;
    let runs = pool.install(|| io::compare(&scenario, &names))?;
    io::write_compare(&out, &runs)?;
    for (name, outcome) in &runs {
        println!("{name}: QoE {:.4}", outcome.qoe.total);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn offline(args: &RunArgs) -> anyhow::Result<()> {
    let (cfg, out) = args.load()?;
    let opt = io::offline(&cfg.scenario()?)?;
    io::write_offline(&out, &opt)?;
    println!("offline optimum: QoE {:.4}", opt.qoe.total);
    println!("wrote {}", out.display());
    Ok(())
}

fn validate(files: &[PathBuf]) -> anyhow::Result<()> {
    for path in files {
        validate_one(path)?;
    }
    Ok(())
}

fn validate_one(path: &Path) -> vastream::Result<()> {
    let text = std::fs::read_to_string(path).map_err(|source| vastream::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.display().to_string();
    match io::detect_kind(&text) {
        Some(TraceKind::Capacity) => {
            let t = io::parse_capacity(&text, &name)?;
            println!(
                "{name}: capacity trace, {} samples, {:.3}..{:.3} Mbps",
                t.len(),
                t.d_min(),
                t.d_max()
            );
        }
        Some(TraceKind::Viewport) => {
            let t = io::parse_viewport(&text, &name, FovExtent::full_sphere())?;
            println!("{name}: viewport trace, {} segments", t.len());
        }
        None => {
            return Err(vastream::Error::Parse {
                path: name,
                line: 1,
                message: "header is neither `time_s,mbps` nor `segment,pitch_deg,yaw_deg`".into(),
            })
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, false),
        Command::Regret(a) => simulate(a, true),
        Command::Compare { run, threads } => compare(run, *threads),
        Command::OfflineOpt(a) => offline(a),
        Command::Validate { files } => validate(files),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<vastream::Error>()
                .map_or(1, vastream::Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
