use clap::{Parser, Subcommand};
use fxsim::kinematics::EndEffectorPose;
use fxsim::sim::{self, ScenarioConfig, SimError};
use std::error::Error;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fxsim", version, about = "Mobile-manipulator fire-extinguisher test simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prints the default scenario as TOML.
    Defaults,
    /// Working radii, boundary curves and reachable cloud of the arm (JSON).
    Workspace {
        /// Scenario file supplying the arm constants.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint angles in degrees for a tool pose in the arm base frame.
    Ik {
        /// mm
        x: f64,
        /// mm
        y: f64,
        /// mm
        z: f64,
        /// Tool pitch, degrees.
        #[arg(allow_hyphen_values = true)]
        phi: f64,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Circuit, stop plan and timing of a scenario (JSON).
    Plan {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs full missions and writes logs, metrics and plot tables.
    Simulate {
        /// One or more scenario files; several run in parallel, each into
        /// its own subdirectory named after the file.
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recomputes the report from a mission log (JSON).
    Metrics {
        csv: PathBuf,
        /// Scenario supplying the error band and discharge time.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn config(path: Option<&Path>) -> Result<ScenarioConfig, SimError> {
    match path {
        Some(p) => sim::load_scenario(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), SimError> {
    let text = serde_json::to_string_pretty(value).expect("values serialize") + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| SimError::Io(format!("{}: {e}", p.display()))),
        None => write_stdout(&text),
    }
}

fn write_stdout(text: &str) -> Result<(), SimError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(SimError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn simulate_one(path: &Path, out: &Path) -> Result<String, SimError> {
    let cfg = sim::load_scenario(path)?;
    let run = sim::run_mission(&cfg)?;
    sim::export(&run.log, &run.report, out)?;
    let r = &run.report;
    Ok(format!(
        "{}: stage I {:.3} s, stage II {:.3} s, total {:.3} s ({} vs {} s), ee error avg [{:.3}, {:.3}, {:.3}] mm, {} rows -> {}",
        path.display(),
        r.stage1_time,
        r.stage2_time,
        r.total_time,
        r.verdict(),
        r.discharge_time,
        r.ee_error_avg[0],
        r.ee_error_avg[1],
        r.ee_error_avg[2],
        run.log.rows.len(),
        out.display()
    ))
}

fn run(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::Defaults => Ok(write_stdout(&ScenarioConfig::default().to_toml())?),
        Command::Workspace { scenario, out } => {
            let cfg = config(scenario.as_deref())?;
            cfg.validate()?;
            let summary = cfg.manipulator().workspace_analysis_with(&cfg.workspace_options());
            Ok(emit(&summary, out.as_deref())?)
        }
        Command::Ik {
            x,
            y,
            z,
            phi,
            scenario,
        } => {
            let cfg = config(scenario.as_deref())?;
            cfg.validate()?;
            let pose = EndEffectorPose::new(x, y, z, phi.to_radians());
            let q = cfg
                .manipulator()
                .inverse_kinematics(&pose, cfg.tool())?;
            let [t1, t2, t3, t4] = q.to_degrees();
            Ok(write_stdout(&format!(
                "theta1 {t1:.6}\ntheta2 {t2:.6}\ntheta3 {t3:.6}\ntheta4 {t4:.6}\n"
            ))?)
        }
        Command::Plan { scenario, out } => {
            let plan = sim::load_scenario(&scenario)?.plan()?;
            Ok(emit(&sim::plan_summary(&plan), out.as_deref())?)
        }
        Command::Simulate { scenarios, out } => {
            if let [only] = scenarios.as_slice() {
                eprintln!("{}", simulate_one(only, &out)?);
                return Ok(());
            }
            let mut stems: Vec<_> = scenarios.iter().map(|p| p.file_stem()).collect();
            stems.sort();
            if stems.windows(2).any(|w| w[0] == w[1]) {
                return Err("scenario file names must be distinct when running several".into());
            }
            let results: Vec<Result<String, SimError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = scenarios
                    .iter()
                    .map(|p| {
                        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned());
                        let dir = out.join(stem.unwrap_or_else(|| "scenario".into()));
                        scope.spawn(move || simulate_one(p, &dir))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("simulation thread panicked"))
                    .collect()
            });
            let mut first_error = None;
            for r in results {
                match r {
                    Ok(line) => eprintln!("{line}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        first_error.get_or_insert(e);
                    }
                }
            }
            Ok(first_error.map_or(Ok(()), Err)?)
        }
        Command::Metrics { csv, scenario } => {
            let cfg = config(scenario.as_deref())?;
            let log = sim::SimLog::load_csv(&csv)?;
            let report = sim::compute_metrics(&log, &cfg.metrics_params())?;
            Ok(emit(&report, None)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
