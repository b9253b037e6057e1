use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gaugecool::checks::{run_suite, Suite, SuiteOptions};
use gaugecool::kl::{
    coord4_cg_basis, detection_check, edge_operator, kl_diagonal_defect, kl_product, multiplicity_map,
    residual_pauli_weights, sandwich_norm, ErrorOp,
};
use gaugecool::su2::pauli;
use gaugecool::tdesign::DesignSet;
use gaugecool::{Axis, Error, EvolveConfig, NoiseKind, NoiseSpec, Simulator, SpinLabel, TrotterConfig};

#[derive(Parser, Debug)]
#[command(name = "gaugecool", version, about = "Gauge cooling on a single SU(2) plaquette")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long, default_value = "depolarizing", value_parser = parse_noise)]
    noise: NoiseKind,
    /// Noise rate per edge per step [default: 0.01 for evolve, 0.005 for converge].
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    g2: f64,
    /// Total evolution time.
    #[arg(long, default_value_t = 3.0)]
    time: f64,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 10)]
    max_sweeps: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Noisy Trotter evolution from the vacuum, with optional cooling after each step.
    Evolve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        cool: Toggle,
    },
    /// One Trotter step, one round of noise, then cooling sweeps until convergence.
    Converge {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Detection norms, Knill-Laflamme products and residual weights at a degree-4 vertex.
    KlAudit {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite and report each check against its tolerance.
    Check {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Seed for the Haar Monte Carlo oracle.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Design set to verify instead of the built-in binary octahedral group.
        #[arg(long)]
        design_file: Option<PathBuf>,
    },
}

fn parse_noise(s: &str) -> Result<NoiseKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Maps library errors onto the exit-code contract.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } => Self::Usage(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

impl RunArgs {
    fn configs(&self, default_rate: f64) -> Result<(TrotterConfig, NoiseSpec), Failure> {
        let trotter = TrotterConfig::new(self.g2, self.time, self.steps)?;
        let noise = NoiseSpec::new(self.noise, self.rate.unwrap_or(default_rate))?;
        Ok((trotter, noise))
    }
}

fn evolve(run: &RunArgs, cool: Toggle) -> Result<ExitCode, Failure> {
    let (trotter, noise) = run.configs(0.01)?;
    let cfg = EvolveConfig::new(trotter, noise, cool == Toggle::On, run.tol, run.max_sweeps)?;
    let sim = Simulator::new(trotter)?;
    let rows = sim.run_evolve(&cfg, &mut |_, _| Ok(()))?;
    let mut csv = String::from("step,time,fidelity,gi_overlap,sweeps_used\n");
    for r in rows {
        writeln!(csv, "{},{},{},{},{}", r.step, num(r.time), num(r.fidelity), num(r.gi_overlap), r.sweeps_used).unwrap();
    }
    emit(run.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn converge(run: &RunArgs) -> Result<ExitCode, Failure> {
    let (trotter, noise) = run.configs(0.005)?;
    // validates tol and max_sweeps the same way evolve does
    EvolveConfig::new(trotter, noise, true, run.tol, run.max_sweeps)?;
    let sim = Simulator::new(trotter)?;
    let (rows, _) = sim.run_converge(&noise, run.tol, run.max_sweeps)?;
    let mut csv = String::from("sweep,gi_overlap,deficit\n");
    for r in rows {
        writeln!(csv, "{},{},{}", r.sweep, num(r.gi_overlap), num(r.deficit)).unwrap();
    }
    emit(run.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn kl_audit(out: Option<&Path>) -> Result<ExitCode, Failure> {
    let basis = coord4_cg_basis()?;
    let mut csv = String::from("section,label,values\n");
    for a in Axis::ALL {
        for k in 0..4 {
            let e = edge_operator(&pauli(a), k)?;
            let n0 = detection_check(&basis, ErrorOp::Pauli(a), k)?;
            let n2 = sandwich_norm(&basis, &e, SpinLabel::from_twice(4), SpinLabel::ZERO);
            writeln!(csv, "detection,{a:?}_{k},{},{}", num(n0), num(n2)).unwrap();
        }
    }
    let maps = (0..4)
        .map(|k| multiplicity_map(&basis, ErrorOp::Pauli(Axis::Z), k, 0))
        .collect::<Result<Vec<_>, _>>()?;
    for k in 0..4 {
        for l in k..4 {
            let p = kl_product(&maps[k], &maps[l])?;
            let mut line = format!("kl,Z_{k}-Z_{l}");
            for r in 0..2 {
                for c in 0..2 {
                    write!(line, ",{},{}", num(p[(r, c)].re), num(p[(r, c)].im)).unwrap();
                }
            }
            if k == l {
                write!(line, ",{}", num(kl_diagonal_defect(&p))).unwrap();
            }
            writeln!(csv, "{line}").unwrap();
        }
    }
    let table = residual_pauli_weights(&basis, ErrorOp::Pauli(Axis::Z), 0, 0)?;
    for row in &table.rows {
        let w: Vec<String> = row.weights.iter().map(|&x| num(x)).collect();
        writeln!(csv, "residual,{},{}", row.label, w.join(",")).unwrap();
    }
    emit(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn check(suite: Suite, seed: u64, design_file: Option<&Path>) -> Result<ExitCode, Failure> {
    let design = design_file
        .map(|p| DesignSet::from_file(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))))
        .transpose()?;
    let opts = SuiteOptions { design, seed, ..SuiteOptions::default() };
    let results = run_suite(suite, &opts)?;
    let mut text = String::new();
    for r in &results {
        writeln!(text, "{r}").unwrap();
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(text, "{suite}: {} passed, {failed} failed", results.len() - failed).unwrap();
    emit(None, &text)?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Evolve { run, cool } => evolve(run, *cool),
        Command::Converge { run } => converge(run),
        Command::KlAudit { out } => kl_audit(out.as_deref()),
        Command::Check { suite, seed, design_file } => check(*suite, *seed, design_file.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
