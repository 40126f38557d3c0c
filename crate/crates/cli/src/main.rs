//! `ciarlet` command-line tool.

mod commands;
mod plot;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ciarlet", version, about = "Inspect, tabulate and compare Ciarlet finite elements")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// Relative rank tolerance for span and trace decisions.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Lattice points per direction (tabulation grid, or span-test lattice).
    #[arg(long, global = true)]
    pub lattice: Option<usize>,
    /// Compact single-line JSON instead of pretty-printed output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Vertices of an alternate-convention cell as a JSON array of points.
    #[arg(long, global = true, value_name = "JSON")]
    pub cell_vertices: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// DOF layout, value shape and map kind of an element.
    Info { spec: String },
    /// Basis function values as CSV.
    Tabulate {
        spec: String,
        /// File of points, one per line, coordinates separated by commas or spaces.
        #[arg(long, conflicts_with = "lattice")]
        points: Option<PathBuf>,
    },
    /// Check whether two elements are variants of each other.
    Verify {
        a: String,
        b: String,
        /// Vertices of the cell of the first element (`--cell-vertices` applies to the second).
        #[arg(long, value_name = "JSON")]
        a_vertices: Option<String>,
    },
    /// Polynomial and Lagrange sub/superdegrees.
    Degree {
        spec: String,
        /// Largest degree tried by the searches.
        #[arg(long)]
        k_cap: Option<usize>,
    },
    /// Uncontrolled and controlled trace spaces on one sub-entity.
    Trace {
        spec: String,
        /// Entity as `dim,index`.
        #[arg(long)]
        entity: String,
    },
    /// Run a JSON file of verification jobs.
    Batch {
        jobfile: PathBuf,
        /// Run the jobs one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// SVG plot of one basis function on an interval or triangle.
    Plot {
        spec: String,
        #[arg(long)]
        dof: usize,
        /// Value component to plot.
        #[arg(long, default_value_t = 0)]
        component: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Info { spec } => commands::info(g, spec),
        Command::Tabulate { spec, points } => commands::tabulate(g, spec, points.as_deref()),
        Command::Verify { a, b, a_vertices } => commands::verify(g, a, b, a_vertices.as_deref()),
        Command::Degree { spec, k_cap } => commands::degree(g, spec, *k_cap),
        Command::Trace { spec, entity } => commands::trace(g, spec, entity),
        Command::Batch { jobfile, sequential } => commands::batch(g, jobfile, *sequential),
        Command::Plot {
            spec,
            dof,
            component,
            output,
        } => commands::plot(g, spec, *dof, *component, output),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
