use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qss_cli::scenario::{BackendChoice, Mode, Scenario};
use qss_cli::{parse_scenario, run_scenario, selftest};

#[derive(Parser)]
#[command(name = "qss", about = "Qupit secret sharing and multiparty computation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive Reed-Solomon codec check.
    Codec(Common),
    /// Verifiable sharing runs and catch-rate sweeps.
    Vqss(Common),
    /// Multiparty computation runs.
    Mpqc(Common),
    /// Fixed-seed invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb one suite's check (harness sensitivity).
        #[arg(long)]
        inject_fault: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated k values, e.g. 1,2,3,4.
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    backend: Option<BackendChoice>,
    /// Circuit file (mpqc without a scenario).
    #[arg(long)]
    circuit: Option<PathBuf>,
}

fn load(mode: Mode, c: &Common) -> qss_cli::Result<Scenario> {
    let mut s = match &c.scenario {
        Some(path) => parse_scenario(path)?,
        None => Scenario::defaults(mode),
    };
    if s.mode != mode {
        return Err(qss_cli::Error::Field {
            field: "mode".into(),
            message: format!("scenario is for `{}`, not `{mode}`", s.mode),
        });
    }
    if let Some(seed) = c.seed {
        s.network.seed = seed;
    }
    if let Some(t) = c.trials {
        s.trials = t;
    }
    if let Some(ks) = &c.k_sweep {
        s.k_sweep = ks.clone();
    }
    if let Some(b) = c.backend {
        s.backend = b;
    }
    if let Some(path) = &c.circuit {
        s.load_circuit(path)?;
    }
    s.validate()?;
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match &cli.command {
        Command::Codec(c) => (Mode::Codec, c),
        Command::Vqss(c) => (Mode::Vqss, c),
        Command::Mpqc(c) => (Mode::Mpqc, c),
        Command::Selftest { seed, inject_fault } => {
            let results = selftest::run_all(*seed, inject_fault.as_deref());
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            return if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    let result = load(mode, common).and_then(|s| run_scenario(&s, common.out.as_deref()));
    match result {
        Ok(report) => {
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
