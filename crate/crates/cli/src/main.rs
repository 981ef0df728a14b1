//! Command-line driver: reads a `key = value` config, applies flag
//! overrides, runs the simulation and writes `energy.csv` plus VTK
//! snapshots into the output directory.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use smectic::diagnostics::EnergyReport;
use smectic::io::{parse_assignments, Assignment, ConfigError, CsvSink, RunConfig, VtkSink};
use smectic::timestepping::{run, Sink};

#[derive(Debug, Parser)]
#[command(name = "smectic", version, about = "Smectic-A liquid crystal flow simulator")]
struct Cli {
    /// Config file with one `key = value` per line; `#` starts a comment.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for energy.csv and snapshots.
    #[arg(long, value_name = "PATH")]
    out_dir: Option<PathBuf>,
    /// Potential discretization: od2 or mp.
    #[arg(long)]
    scheme: Option<String>,
    /// Cells per side of the structured mesh.
    #[arg(long)]
    nx: Option<String>,
    /// Time step.
    #[arg(long)]
    dt: Option<String>,
    /// Final time.
    #[arg(long)]
    t_end: Option<String>,
    /// Snapshot interval in steps.
    #[arg(long)]
    out_every: Option<String>,
    /// Run od2 even when dt violates the solvability bound.
    #[arg(long)]
    override_solvability: bool,
}

impl Cli {
    fn overrides(&self) -> Vec<Assignment> {
        let mut out = Vec::new();
        let mut add = |key: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push(Assignment::new(key, v.as_str()));
            }
        };
        add("scheme", &self.scheme);
        add("nx", &self.nx);
        add("dt", &self.dt);
        add("t_end", &self.t_end);
        add("out_every", &self.out_every);
        add("out_dir", &self.out_dir.as_ref().map(|p| p.display().to_string()));
        if self.override_solvability {
            out.push(Assignment::new("override_solvability", "true"));
        }
        out
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn config_errors(source: &str, errs: Vec<ConfigError>) -> Failure {
    let lines: Vec<String> = errs.iter().map(|e| format!("{source}: {e}")).collect();
    Failure::Config(lines.join("\n"))
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut assignments = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
            parse_assignments(&text).map_err(|errs| config_errors(&path.display().to_string(), errs))?
        }
        None => Vec::new(),
    };
    assignments.extend(cli.overrides());
    let source = cli.config.as_ref().map_or("config".to_string(), |p| p.display().to_string());
    RunConfig::from_assignments(&assignments).map_err(|errs| config_errors(&source, errs))
}

fn execute(config: &RunConfig) -> Result<Vec<EnergyReport>, Failure> {
    let runtime = |what: &str, path: &Path, e: std::io::Error| Failure::Runtime(format!("{what} {}: {e}", path.display()));
    fs::create_dir_all(&config.out_dir).map_err(|e| runtime("cannot create", &config.out_dir, e))?;
    let csv_path = config.out_dir.join("energy.csv");
    let mut csv = CsvSink::create(&csv_path).map_err(|e| runtime("cannot create", &csv_path, e))?;
    let mut vtk = VtkSink::new(&config.out_dir);
    let mut reports: Vec<EnergyReport> = Vec::new();
    {
        let mut sinks: Vec<&mut dyn Sink> = vec![&mut reports, &mut csv];
        if config.snapshots {
            sinks.push(&mut vtk);
        }
        run(&config.params, config.run_options(), &mut sinks).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    csv.finish().map_err(|e| runtime("cannot write", &csv_path, e))?;
    Ok(reports)
}

fn summary(config: &RunConfig, reports: &[EnergyReport]) {
    let p = &config.params;
    println!("scheme {}  nx {}  dt {:e}  t_end {:e}", p.scheme.name(), p.nx, p.dt, p.t_end);
    println!("total steps: {}", reports.len());
    if let Some(last) = reports.last() {
        let peak = reports.iter().fold(last, |best, r| if r.e_kin > best.e_kin { r } else { best });
        println!(
            "final energies at t = {:e}: kinetic {:.10e}  elastic {:.10e}  penalty {:.10e}  total {:.10e}",
            last.t, last.e_kin, last.e_ela, last.e_pen, last.e_tot
        );
        println!("peak kinetic energy: {:.10e} at t = {:e} (step {})", peak.e_kin, peak.t, peak.step);
    }
    println!("output: {}", config.out_dir.join("energy.csv").display());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = load(&cli).and_then(|config| execute(&config).map(|r| (config, r)));
    match result {
        Ok((config, reports)) => {
            summary(&config, &reports);
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_become_trailing_assignments() {
        let cli = Cli::try_parse_from(["smectic", "--nx", "8", "--scheme", "mp", "--override-solvability"]).unwrap();
        let keys: Vec<(String, String)> = cli.overrides().into_iter().map(|a| (a.key, a.value)).collect();
        assert_eq!(
            keys,
            [("scheme".into(), "mp".into()), ("nx".into(), "8".into()), ("override_solvability".into(), "true".into())]
        );
    }

    #[test]
    fn later_flag_wins_over_file() {
        let mut a = parse_assignments("nx = 4\nscheme = od2\n").unwrap();
        a.extend(Cli::try_parse_from(["smectic", "--nx", "6"]).unwrap().overrides());
        let c = RunConfig::from_assignments(&a).unwrap();
        assert_eq!(c.params.nx, 6);
    }
}
