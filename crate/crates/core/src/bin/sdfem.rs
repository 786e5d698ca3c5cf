//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdfem_green::harness::{commands, Settings};

#[derive(Parser)]
#[command(
    name = "sdfem",
    version,
    about = "SDFEM on Shishkin meshes and discrete Green's function studies"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mesh sizes, comma separated (multiples of 6).
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    b: Option<String>,
    #[arg(long, global = true)]
    c: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    cstar: Option<String>,
    /// Weight scale factors, comma separated.
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true, requires = "star_j")]
    star_i: Option<usize>,
    #[arg(long, global = true, requires = "star_i")]
    star_j: Option<usize>,
    /// center-s, mid-x or i:j (comma separated).
    #[arg(long, global = true)]
    placement: Option<String>,
    #[arg(long, global = true)]
    quad_degree: Option<String>,
    #[arg(long, global = true)]
    load_degree: Option<String>,
    /// Allow capped transition points and eps > 1/N.
    #[arg(long, global = true)]
    no_strict: bool,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// constant-f, zero-f or manufactured-sine.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// banded-lu or bicgstab.
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    density: Option<String>,
    /// Lebesgue exponent for interp-check (`inf` allowed).
    #[arg(long, global = true)]
    p: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the mesh and write nodes and triangles.
    Mesh,
    /// Assemble the linear system.
    Assemble {
        #[arg(long)]
        dump: bool,
    },
    /// Solve the configured problem.
    Solve,
    /// Compute discrete Green's functions.
    Green,
    /// Per-element interpolation error report.
    InterpCheck,
    /// Weight-function property checks.
    Weights {
        #[arg(long)]
        check: bool,
    },
    /// Lemma quantities over the k grid.
    Lemmas {
        #[arg(long)]
        k_sweep: bool,
    },
    /// Green's function energy scaling study.
    Study,
    /// Empirical coercivity constant.
    Coercivity,
    /// SVG plot of two CSV columns.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        log_y: bool,
        /// Output file (default: the CSV path with an .svg extension).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn settings(common: &Common) -> sdfem_green::Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        s.apply_config_file(path)?;
    }
    let flags = [
        ("n", &common.n),
        ("epsilon", &common.epsilon),
        ("b", &common.b),
        ("c", &common.c),
        ("beta", &common.beta),
        ("cstar", &common.cstar),
        ("k", &common.k),
        ("placement", &common.placement),
        ("quad-degree", &common.quad_degree),
        ("load-degree", &common.load_degree),
        ("seed", &common.seed),
        ("out", &common.out),
        ("preset", &common.preset),
        ("method", &common.method),
        ("trials", &common.trials),
        ("density", &common.density),
        ("p", &common.p),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.apply(key, v)?;
        }
    }
    if common.no_strict {
        s.strict = false;
    }
    Ok(s)
}

fn run(cli: &Cli) -> sdfem_green::Result<commands::Outcome> {
    let s = settings(&cli.common)?;
    let star = cli.common.star_i.zip(cli.common.star_j);
    match &cli.command {
        Command::Mesh => commands::mesh(&s),
        Command::Assemble { dump } => commands::assemble(&s, *dump),
        Command::Solve => commands::solve(&s),
        Command::Green => commands::green(&s, star),
        Command::InterpCheck => commands::interp_check(&s),
        Command::Weights { .. } => commands::weights(&s, star),
        Command::Lemmas { .. } => commands::lemmas(&s, star),
        Command::Study => commands::study(&s),
        Command::Coercivity => commands::coercivity(&s),
        Command::Plot {
            csv,
            x,
            y,
            log_x,
            log_y,
            svg,
        } => {
            let svg = svg.clone().unwrap_or_else(|| csv.with_extension("svg"));
            commands::plot(csv, &svg, x, y, *log_x, *log_y)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
