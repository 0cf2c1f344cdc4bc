use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadmap::association::AssocMode;
use quadmap::io::{self, Overrides, RunConfig};
use quadmap::optimizer::ShapeMode;
use quadmap::par::Exec;
use quadmap::simulator::ScenarioSpec;
use quadmap::Error;

#[derive(Parser, Debug)]
#[command(
    name = "quadmap",
    version,
    about = "Object-level mapping with super-quadrics from 2D detections"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the scenario seed (simulate) or the recorded seed (run).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    assoc: Option<AssocArg>,
    /// Disable the category scale prior.
    #[arg(long, global = true)]
    no_prior: bool,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic scene with detections, trajectory and ground truth.
    Simulate,
    /// Build an object map from a detection log and a trajectory.
    Run {
        #[arg(long, value_name = "FILE")]
        detections: PathBuf,
        #[arg(long, value_name = "FILE")]
        trajectory: PathBuf,
        /// Also score the map and write report.json / report.csv.
        #[arg(long, value_name = "FILE")]
        ground_truth: Option<PathBuf>,
    },
    /// Score an existing map against ground truth.
    Evaluate {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        #[arg(long, value_name = "FILE")]
        ground_truth: PathBuf,
    },
    /// Write one PLY surface mesh per mapped object.
    ExportMesh {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        #[arg(long, default_value_t = 32)]
        grid_u: usize,
        #[arg(long, default_value_t = 64)]
        grid_v: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    Superquadric,
    Ellipsoid,
    Cuboid,
    NoOptimization,
}

impl From<ModeArg> for ShapeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Superquadric => ShapeMode::Superquadric,
            ModeArg::Ellipsoid => ShapeMode::Ellipsoid,
            ModeArg::Cuboid => ShapeMode::Cuboid,
            ModeArg::NoOptimization => ShapeMode::NoOptimization,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AssocArg {
    #[value(name = "3d")]
    ThreeD,
    #[value(name = "2d")]
    TwoD,
}

impl From<AssocArg> for AssocMode {
    fn from(a: AssocArg) -> Self {
        match a {
            AssocArg::ThreeD => AssocMode::ThreeD,
            AssocArg::TwoD => AssocMode::TwoD,
        }
    }
}

fn exec() -> Exec {
    if cfg!(feature = "parallel") {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn load_config(common: &Common, simulate: bool) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if simulate && cfg.scenario.is_none() {
        // a bare --seed selects the default scenario
        let seed = common.seed.ok_or_else(|| {
            Error::schema(
                "scenario",
                "missing field `seed` (give --seed or a scenario section)",
            )
        })?;
        cfg.scenario = Some(ScenarioSpec::with_seed(seed));
    }
    cfg.apply(&Overrides {
        seed: common.seed,
        shape_mode: common.mode.map(Into::into),
        assoc_mode: common.assoc.map(Into::into),
        no_prior: common.no_prior,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(report: &quadmap::evaluation::EvalReport) {
    for t in &report.thresholds {
        let m = &t.overall;
        println!(
            "IoU@{:.2}: tp {} fp {} fn {}  precision {:.3} recall {:.3} F1 {:.3}",
            t.threshold, m.counts.tp, m.counts.fp, m.counts.fn_, m.precision, m.recall, m.f1
        );
    }
    if let Some(a) = report.matching_accuracy {
        println!("matching accuracy {a:.4}");
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let out: &Path = &cli.common.out;
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(&cli.common, true)?;
            let sim = io::simulate(&cfg, out, exec())?;
            let detections: usize = sim.frames.iter().map(|f| f.detections.len()).sum();
            println!(
                "simulated {} objects, {} frames, {} detections into {}",
                sim.scene.objects.len(),
                sim.frames.len(),
                detections,
                out.display()
            );
        }
        Command::Run {
            detections,
            trajectory,
            ground_truth,
        } => {
            let cfg = load_config(&cli.common, false)?;
            let res = io::run(
                detections,
                trajectory,
                ground_truth.as_deref(),
                &cfg,
                cli.common.seed,
                out,
                exec(),
            )?;
            println!(
                "mapped {} objects into {}",
                res.map.objects.len(),
                out.display()
            );
            if let Some(r) = &res.report {
                print_report(r);
            }
        }
        Command::Evaluate { map, ground_truth } => {
            let cfg = load_config(&cli.common, false)?;
            print_report(&io::evaluate(map, ground_truth, &cfg, out)?);
        }
        Command::ExportMesh {
            map,
            grid_u,
            grid_v,
        } => {
            let paths = io::export_mesh(map, out, *grid_u, *grid_v)?;
            println!("wrote {} meshes into {}", paths.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors and 0 for --help / --version
    let cli = Cli::parse();
    log::debug!("{cli:?}");
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
