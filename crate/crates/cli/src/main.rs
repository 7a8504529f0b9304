//! `hanle-obe`: run magneto-optical lineshape scans from scenario files.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hanle_core::atomic_system::SYSTEM_PRESETS;
use hanle_core::scenario::{exit_code, figure_preset, parse_config, run_scenario, to_csv_string, write_csv, ScenarioConfig, FIGURE_PRESETS};
use hanle_core::validation::fast_subset;
use hanle_core::Error;

const CONFIG_HELP: &str = "\
Scenario files hold one `key = value` per line; `#` starts a comment.

  system                        preset key (see `presets list`)
  system.label                  inline transition label [custom]
  system.nuclear_spin           inline nuclear spin I, e.g. 3/2
  system.ground.{j,f,g}         inline ground J, F and g_F
  system.excited.{j,f,g}        inline excited J, F and g_F
  system.loss                   hyperfine | closed | <alpha> [hyperfine]
  polarization                  linear_x | sigma_plus | sigma_minus [linear_x]
  laser.rabi_over_gamma         Rabi frequency in units of Gamma
  laser.intensity_mw_cm2        intensity; rabi^2 = 2 I / I_sat
  laser.saturation_mw_cm2       I_sat [preset value]
  laser.detuning_over_gamma     detuning in units of Gamma [0]
  scan.min, scan.max            field range, mu_B B / (hbar Gamma) [-1, 1]
  scan.points                   grid size, >= 3 [201]
  mode                          steady | integrated [steady]
  mode.t_int_gamma              integration time in 1/Gamma (integrated only)
  outputs                       pi_e, chi_im, ground_populations, coherence [pi_e, chi_im]

Give exactly one of laser.rabi_over_gamma and laser.intensity_mw_cm2.

Exit status: 0 ok, 1 config error, 2 solver error, 3 I/O error.";

#[derive(Parser)]
#[command(name = "hanle-obe", version, about = "Multilevel optical Bloch lineshape scans in a static magnetic field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scan and write CSV.
    #[command(after_long_help = CONFIG_HELP)]
    Run(RunArgs),
    /// Shipped presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    /// Run the quick self-check subset.
    Check,
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List figure presets and transition presets.
    List,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// Scenario file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Shipped figure preset.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output path; CSV goes to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads for the scan (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn load(source: &Source) -> Result<ScenarioConfig, Error> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
            parse_config(&text)
        }
        (None, Some(name)) => figure_preset(name),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let cfg = load(&args.source)?;
    let scan = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?
            .install(|| run_scenario(&cfg))?,
        None => run_scenario(&cfg)?,
    };
    match &args.out {
        Some(path) => write_csv(&scan, &cfg, path),
        None => io::stdout()
            .lock()
            .write_all(to_csv_string(&scan, &cfg).as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), source: e }),
    }
}

fn list_presets() {
    println!("figure presets (run --preset NAME):");
    for p in FIGURE_PRESETS {
        println!("  {:<14} {}", p.name, p.description);
    }
    println!("transition presets (system = KEY):");
    for p in SYSTEM_PRESETS {
        println!("  {:<18} {} (I_sat {} mW/cm^2)", p.key, p.description, p.saturation_intensity);
    }
}

fn check() -> ExitCode {
    let reports = fast_subset();
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("hanle-obe: {e}");
                ExitCode::from(exit_code(&e) as u8)
            }
        },
        Command::Presets { action: PresetsAction::List } => {
            list_presets();
            ExitCode::SUCCESS
        }
        Command::Check => check(),
    }
}
