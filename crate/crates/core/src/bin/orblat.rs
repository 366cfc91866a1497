use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orbifold_lattice::analysis::DEFAULT_BIN_SIZE;
use orbifold_lattice::runner::{self, RunError, RunOptions, ScanAxis};

#[derive(Parser)]
#[command(name = "orblat", version, about = "HMC for SU(N) lattice Yang-Mills with Wilson and orbifold actions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one Markov chain.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
        #[arg(long, hide = true)]
        stop_after: Option<u64>,
    },
    /// One independent run per value of a parameter.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// m2, a_t or a_iso (sets a = a_t).
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Parent directory for the runs; defaults to the base output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
    },
    /// Quadratic extrapolation in 1/m² over orbifold run directories.
    Extrapolate {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        observable: String,
        /// Wilson run to compare the extrapolated value with.
        #[arg(long)]
        wilson: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BIN_SIZE)]
        bin_size: usize,
        /// Where to write the fit summary CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Check the frozen-link identity between the two actions.
    CheckEquivalence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        n_configs: usize,
        #[arg(long, hide = true)]
        corrupt_coupling: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, RunError> {
    match cmd {
        Cmd::Run { config, resume, stop_after } => {
            let s = runner::cmd_run(&config, &RunOptions { resume, stop_after })?;
            println!(
                "{}: {} trajectories, acceptance {:.3}, {} measurements skipped{}",
                s.output_dir.display(),
                s.trajectories,
                s.acceptance(),
                s.invalid_measurements,
                if s.completed { "" } else { " (stopped early)" }
            );
            Ok(0)
        }
        Cmd::Scan { config, axis, values, out, resume } => {
            let axis = ScanAxis::parse(&axis).ok_or_else(|| RunError::Usage(format!("unknown axis '{axis}'; expected m2, a_t or a_iso")))?;
            for s in runner::cmd_scan(&config, axis, &values, out.as_deref(), resume)? {
                println!("{}: acceptance {:.3}", s.output_dir.display(), s.acceptance());
            }
            Ok(0)
        }
        Cmd::Extrapolate { runs, observable, wilson, bin_size, summary } => {
            let r = runner::cmd_extrapolate(&runs, &observable, wilson.as_deref(), bin_size, summary.as_deref())?;
            for (m2, e) in &r.points {
                println!("m2 = {m2}: {} ± {}", e.mean, e.err);
            }
            let f = &r.fit;
            println!("{} at 1/m2 = 0: {} ± {} (chi2/dof {:.3})", r.observable, f.a0, f.a0_err, f.chi2_per_dof);
            if let (Some(w), Some(p)) = (r.wilson, r.pull) {
                println!("wilson: {} ± {}, pull {:.2}", w.mean, w.err, p);
            }
            Ok(0)
        }
        Cmd::CheckEquivalence { config, n_configs, corrupt_coupling } => {
            let rc = runner::run_config(&config)?;
            let r = runner::cmd_check_equivalence(&rc, n_configs, corrupt_coupling)?;
            let verdict = if r.passed() { "pass" } else { "FAIL" };
            println!("{verdict}: max relative deviation {:.3e} over {} configurations (tolerance {:.0e})", r.max_rel_deviation, r.n_configs, r.tolerance);
            Ok(if r.passed() { 0 } else { 2 })
        }
    }
}
