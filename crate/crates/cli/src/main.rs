//! `rsma-sop`: analytic and Monte Carlo secrecy outage probabilities, sweeps
//! and the NOMA comparison, driven by flat TOML run files.
//!
//! Exit status is 0 on success, 1 when a result fails its own check (an error
//! row or flagged point in a sweep, a flagged comparison, RSMA above NOMA) and
//! 2 on bad input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsma_sop::config::{load_with_overrides, RunConfig};
use rsma_sop::mc::{estimate_sop, estimate_sop_fullvector, McEstimate};
use rsma_sop::noma::{noma_baseline, GridMin};
use rsma_sop::sweep::{fmt_float, run_sweep, write_csv, Mode, FLAG_ABS_TOL};
use rsma_sop::{sop_checked, QuadratureSpec};

#[derive(Parser)]
#[command(name = "rsma-sop", version, about = "Secrecy outage probability of a two-user mmWave RSMA downlink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run file; missing keys take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Scenario I, II, III or IV (overrides the file).
    #[arg(short, long)]
    scenario: Option<String>,
    /// Use this order for every closed-form quadrature sum.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Extra `key=value` settings, applied after the file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct Sampling {
    /// Monte Carlo trials.
    #[arg(short = 'n', long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form SOP at the base configuration.
    Analytic {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo SOP at the base configuration.
    Mc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Sample full complex channel vectors instead of gain norms.
        #[arg(long)]
        full_vector: bool,
    },
    /// Closed form against Monte Carlo at the base configuration.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Sweep the axes of the run file and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// analytic, mc or compare (overrides the file).
        #[arg(long)]
        mode: Option<Mode>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Minimum SOP over the power-split simplex against the NOMA slice.
    NomaCompare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Simplex step (1/step must be an integer ≥ 9).
        #[arg(long)]
        step: Option<f64>,
        /// Skip the Monte Carlo re-estimate of the minima.
        #[arg(long)]
        analytic_only: bool,
    },
}

#[derive(Debug)]
enum Failure {
    /// Bad input: config, arguments, I/O.
    Input(String),
    /// A computed result failed its check.
    Check(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load(common: &Common, sampling: Option<&Sampling>) -> Result<RunConfig, Failure> {
    let mut set = common.set.clone();
    if let Some(s) = &common.scenario {
        set.push(format!("scenario=\"{s}\""));
    }
    if let Some(s) = sampling {
        if let Some(n) = s.trials {
            set.push(format!("n_trials={n}"));
        }
        if let Some(seed) = s.seed {
            set.push(format!("seed={seed}"));
        }
    }
    let mut rc = load_with_overrides(common.config.as_deref(), &set)?;
    if let Some(order) = common.quad_order {
        let q = &rc.sweep.quad;
        rc.sweep.quad = QuadratureSpec { lambda_rule: q.lambda_rule, b_rule: q.b_rule, ..QuadratureSpec::uniform(order) };
        rc.sweep.quad.validate()?;
    }
    Ok(rc)
}

fn print_mc(out: &mut impl Write, label: &str, m: &McEstimate) -> io::Result<()> {
    writeln!(out, "{label}_sop = {}", fmt_float(m.sop_hat))?;
    writeln!(out, "{label}_std_err = {}", fmt_float(m.std_err))?;
    writeln!(out, "{label}_trials = {}", m.n_trials)?;
    writeln!(out, "{label}_seed = {}", m.seed)
}

fn print_min(out: &mut impl Write, label: &str, g: &GridMin) -> io::Result<()> {
    let t = g.tau;
    writeln!(
        out,
        "{label}: sop_analytic = {} at tau_c = {:.4}, tau_1 = {:.4}, tau_2 = {:.4}",
        fmt_float(g.sop),
        t.tau_c,
        t.tau_1,
        t.tau_2
    )?;
    if let Some(m) = &g.mc {
        writeln!(out, "{label}: sop_mc = {} ± {}", fmt_float(m.sop_hat), fmt_float(m.std_err))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Analytic { common } => {
            let rc = load(&common, None)?;
            let r = sop_checked(&rc.system, &rc.eve(), &rc.sweep.quad)?;
            writeln!(out, "scenario = {}", rc.scenario())?;
            writeln!(out, "sop = {}", fmt_float(r.sop))?;
            writeln!(out, "scp = {}", fmt_float(r.scp))?;
            writeln!(out, "converged = {}", r.converged)?;
            for (name, v) in &r.term_diagnostics {
                writeln!(out, "term {name} = {}", fmt_float(*v))?;
            }
        }
        Command::Mc { common, sampling, full_vector } => {
            let rc = load(&common, Some(&sampling))?;
            let (n, seed) = (rc.sweep.n_trials, rc.sweep.seed);
            let m = if full_vector {
                estimate_sop_fullvector(&rc.system, &rc.eve(), n, seed)?
            } else {
                estimate_sop(&rc.system, &rc.eve(), n, seed)?
            };
            writeln!(out, "scenario = {}", rc.scenario())?;
            print_mc(&mut out, "mc", &m)?;
        }
        Command::Compare { common, sampling } => {
            let rc = load(&common, Some(&sampling))?;
            let a = sop_checked(&rc.system, &rc.eve(), &rc.sweep.quad)?;
            let m = estimate_sop(&rc.system, &rc.eve(), rc.sweep.n_trials, rc.sweep.seed)?;
            let diff = (a.sop - m.sop_hat).abs();
            let flagged = diff > 3.0 * m.std_err + FLAG_ABS_TOL;
            writeln!(out, "scenario = {}", rc.scenario())?;
            writeln!(out, "analytic_sop = {}", fmt_float(a.sop))?;
            print_mc(&mut out, "mc", &m)?;
            writeln!(out, "abs_diff = {}", fmt_float(diff))?;
            writeln!(out, "flagged = {flagged}")?;
            if flagged {
                return Err(Failure::Check(format!("|analytic − MC| = {diff:e} exceeds 3·SE + {FLAG_ABS_TOL}")));
            }
        }
        Command::Sweep { common, sampling, mode, out: path } => {
            let mut rc = load(&common, Some(&sampling))?;
            if let Some(m) = mode {
                rc.sweep.mode = m;
            }
            let rows = run_sweep(&rc.sweep, &rc.system)?;
            match path {
                Some(p) => {
                    let f = File::create(&p).map_err(|e| Failure::Input(format!("cannot create {}: {e}", p.display())))?;
                    write_csv(&rc.sweep, &rows, BufWriter::new(f))?;
                }
                None => write_csv(&rc.sweep, &rows, &mut out)?,
            }
            let errors = rows.iter().filter(|r| r.is_error()).count();
            let flagged = rows.iter().filter(|r| r.is_flagged()).count();
            if errors + flagged > 0 {
                return Err(Failure::Check(format!("{errors} error row(s), {flagged} flagged point(s)")));
            }
        }
        Command::NomaCompare { common, sampling, step, analytic_only } => {
            let rc = load(&common, Some(&sampling))?;
            let mc = (!analytic_only).then_some((rc.sweep.n_trials, rc.sweep.seed));
            let r = noma_baseline(
                &rc.system,
                rc.scenario(),
                rc.eve_counts,
                step.unwrap_or(rc.tau_step),
                &rc.sweep.quad,
                mc,
            )?;
            writeln!(out, "scenario = {}", r.scenario)?;
            print_min(&mut out, "rsma", &r.rsma)?;
            print_min(&mut out, "noma_tau2_zero", &r.noma_tau2_zero)?;
            if let Some(g) = &r.noma_tau1_zero {
                print_min(&mut out, "noma_tau1_zero", g)?;
            }
            writeln!(out, "failed_points = {}", r.failed_points)?;
            writeln!(out, "rsma_le_noma = {}", r.holds())?;
            if !r.holds() {
                return Err(Failure::Check("RSMA minimum exceeds the NOMA minimum".into()));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("rsma-sop: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("rsma-sop: {msg}");
            ExitCode::from(2)
        }
    }
}
