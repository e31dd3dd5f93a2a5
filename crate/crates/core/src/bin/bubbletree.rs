//! Command-line driver: run a scenario, validate a config, or generate a
//! metric family into a BTSEQ file.

use bubbletree::chart::{ChartKind, DomainChart};
use bubbletree::error::Error;
use bubbletree::families::{Family, FamilySpec, RotsymMode};
use bubbletree::io::save_btseq_file;
use bubbletree::pipeline::{exit_code_for, run_scenario, EXIT_OK};
use bubbletree::scenario::parse_scenario_file;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bubbletree",
    version,
    about = "Concentration analysis of conformal metric sequences: detection, blow-up, bubble trees, thick-thin decompositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        scenario: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// Generate a metric family and save it as a BTSEQ file.
    Gen {
        /// example1 | example2_disk | example2_glued | example3 | random_rotsym | flat
        family: String,
        /// Frame labels, e.g. --n-values 10,100,1000
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        n_values: Vec<u64>,
        #[arg(long, default_value = "plane_window")]
        kind: String,
        #[arg(long, default_value_t = 0.0)]
        center_x: f64,
        #[arg(long, default_value_t = 0.0)]
        center_y: f64,
        #[arg(long, default_value_t = 1.0)]
        outer_radius: f64,
        #[arg(long, default_value_t = 0.0)]
        inner_radius: f64,
        #[arg(long, default_value_t = 512)]
        grid_n: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_value = "1.0,2.0")]
        roots: Vec<f64>,
        #[arg(long, default_value_t = 0.33)]
        offset_exp: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        cap_cells: f64,
        /// random_rotsym only: constant | concentrating
        #[arg(long, default_value = "constant")]
        mode: String,
        /// Output path for the BTSEQ file.
        #[arg(long, default_value = "sequence.btseq")]
        out: PathBuf,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("BUBBLETREE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn real_main() -> Result<(), (i32, Error)> {
    init_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out } => {
            let sc = parse_scenario_file(&scenario).map_err(|e| (exit_code_for(&e), e))?;
            let outcome =
                run_scenario(&sc, out.as_deref()).map_err(|e| (exit_code_for(&e), e))?;
            for w in &outcome.record.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "ok: {} vertices, {} edges -> {}",
                outcome.tree.vertices.len(),
                outcome.tree.edges.len(),
                outcome.out_dir.display()
            );
            Ok(())
        }
        Command::Validate { scenario } => {
            parse_scenario_file(&scenario).map_err(|e| (exit_code_for(&e), e))?;
            println!("ok: scenario is valid");
            Ok(())
        }
        Command::Gen {
            family,
            n_values,
            kind,
            center_x,
            center_y,
            outer_radius,
            inner_radius,
            grid_n,
            beta,
            roots,
            offset_exp,
            seed,
            cap_cells,
            mode,
            out,
        } => {
            let run = || -> bubbletree::Result<()> {
                let kind = ChartKind::parse(&kind)?;
                let chart =
                    DomainChart::new(kind, [center_x, center_y], outer_radius, inner_radius, grid_n)?;
                let mut spec = FamilySpec::new(Family::parse(&family)?, chart, n_values);
                spec.beta = beta;
                spec.roots = roots;
                spec.offset_exp = offset_exp;
                spec.seed = seed;
                spec.cap_cells = cap_cells;
                spec.rotsym_mode = match mode.as_str() {
                    "constant" => RotsymMode::Constant,
                    "concentrating" => RotsymMode::Concentrating,
                    other => return Err(Error::Config(format!("unknown mode `{other}`"))),
                };
                let seq = spec.generate()?;
                save_btseq_file(&seq, &out)?;
                println!("ok: wrote {} frames to {}", seq.frames.len(), out.display());
                Ok(())
            };
            run().map_err(|e| (exit_code_for(&e), e))
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code as u8)
        }
    }
}
