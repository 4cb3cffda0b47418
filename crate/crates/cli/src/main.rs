use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ale_idp::harness::{
    convergence_study, run_benchmark, write_table_csv, write_vtk, BenchmarkRun, HarnessError, RunConfig,
};
use ale_idp::scheme::write_reports_csv;

#[derive(Parser)]
#[command(
    name = "ale-idp",
    version,
    about = "Invariant-domain-preserving ALE solver for hyperbolic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark at one mesh level.
    Run {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Run a range of levels and write table.csv.
    Converge {
        #[command(flatten)]
        setup: Setup,
        /// Inclusive level range such as `0..4`.
        #[arg(long)]
        levels: String,
    },
    /// Run the property suites.
    Check {
        #[arg(long, default_value_t = 20240607)]
        seed: u64,
    },
}

#[derive(Args)]
struct Setup {
    #[arg(long)]
    problem: Option<String>,
    /// Plain-text key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["v1", "v2"])]
    scheme: Option<String>,
    #[arg(long, value_parser = ["euler", "ssp3"])]
    integrator: Option<String>,
    #[arg(long, value_parser = ["p1", "q1"])]
    fem: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    final_time: Option<f64>,
    #[arg(long)]
    no_viscosity: bool,
    /// Noh only: four-quadrant nonuniform mesh.
    #[arg(long)]
    nonuniform: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Setup {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => RunConfig::default(),
        };
        let mut flags = RunConfig::default();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.set(k, v);
            }
        };
        put("problem", self.problem.clone());
        put("scheme", self.scheme.clone());
        put("integrator", self.integrator.clone());
        put("fem", self.fem.clone());
        put("cfl", self.cfl.map(|c| c.to_string()));
        put("final_time", self.final_time.map(|c| c.to_string()));
        if self.no_viscosity {
            flags.set("viscosity", "off");
        }
        if self.nonuniform {
            flags.set("nonuniform", "on");
        }
        cfg = cfg.merged(&flags);
        Ok(cfg)
    }
}

fn parse_levels(s: &str) -> anyhow::Result<Vec<usize>> {
    let (a, b) = s.split_once("..").context("levels must look like k1..k2")?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().trim_start_matches('=').parse()?);
    anyhow::ensure!(a <= b, "empty level range");
    Ok((a..=b).collect())
}

fn write_artifacts(dir: &Path, run: &BenchmarkRun, n_components: usize) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let reports = File::create(dir.join("reports.csv"))?;
    write_reports_csv(BufWriter::new(reports), &run.outcome.reports)?;
    let s = &run.outcome.state;
    let names = ["u0", "u1", "u2", "u3"];
    let fields: Vec<(&str, Vec<f64>)> = (0..n_components)
        .map(|k| (names[k], s.u.iter().map(|u| u[k]).collect()))
        .collect();
    write_vtk(
        BufWriter::new(File::create(dir.join("solution.vtk"))?),
        &s.mesh,
        &fields,
    )?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<HarnessError>().map_or(2, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Run { setup, level } => {
            let cfg = setup.config()?;
            let level = if cfg.get("level").is_some() && level == 0 {
                cfg.level()?
            } else {
                level
            };
            let spec = cfg.to_spec()?;
            let run = run_benchmark(&spec, level)?;
            write_artifacts(&setup.out, &run, spec.system().n_components())?;
            println!(
                "{} level {} dofs {} steps {} t {:.6}",
                spec.problem,
                level,
                run.dofs,
                run.outcome.reports.len(),
                run.outcome.state.t()
            );
            if let Some((l1, l2)) = run.errors {
                println!("L1 {l1:.6e} L2 {l2:.6e}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Converge { setup, levels } => {
            let spec = setup.config()?.to_spec()?;
            let rows = convergence_study(&spec, &parse_levels(&levels)?)?;
            fs::create_dir_all(&setup.out)?;
            write_table_csv(BufWriter::new(File::create(setup.out.join("table.csv"))?), &rows)?;
            for r in &rows {
                let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
                println!(
                    "{:>7} {:.3e} {:>5} {:.3e} {:>5}",
                    r.dofs,
                    r.l1,
                    f(r.l1_rate),
                    r.l2,
                    f(r.l2_rate)
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { seed } => {
            let results = ale_idp::checks::run_all(seed);
            let mut ok = true;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}
