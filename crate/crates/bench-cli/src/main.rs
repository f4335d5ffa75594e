use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pem_hull::{convex_hull_2d, hull_main, parse_planes, parse_points, HullConfig, Point2};
use pem_machine::{Machine, MachineConfig};
use pemlab::{check_bands, exit_code, override_seeds, parse_config, run_point, run_sweep, write_csv, Point, Sweep};

#[derive(Parser)]
#[command(name = "pemlab", about = "Sweeps and one-shot runs on the simulated PEM machine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every point of a config file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check bound-ratio bands; exits 0 if all pass, 1 on a failure, 2 if
    /// any series is inconclusive.
    Check {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        band: f64,
    },
    /// Sample sort of random keys; prints one CSV row.
    Sort {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 32)]
        x: u32,
    },
    /// Half-plane intersection of random bounded planes, or of a file.
    Hull {
        #[command(flatten)]
        point: PointArgs,
        /// "a b c" lines meaning a x + b y <= c, with the origin inside;
        /// prints the vertices.
        #[arg(long, conflicts_with = "points")]
        planes: Option<PathBuf>,
        /// "x y" lines; prints the convex hull.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Prefix sums of random words; prints one CSV row.
    Prefix {
        #[command(flatten)]
        point: PointArgs,
        /// Cores estimate their number and ids first.
        #[arg(long)]
        oblivious: bool,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 1 << 16)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long = "M", default_value_t = 4096)]
    m: usize,
    #[arg(long = "B", default_value_t = 64)]
    b: usize,
    #[arg(long, env = "PEMLAB_SEED", default_value_t = 1)]
    seed: u64,
    /// Run on max(1, n / M) cores when n < M p.
    #[arg(long)]
    clamp_p: bool,
}

fn one_row(name: &str, a: &PointArgs, tweak: impl FnOnce(&mut Sweep)) -> Result<()> {
    let mut s = Sweep::new(name)?;
    s.clamp_p = a.clamp_p;
    tweak(&mut s);
    let pt = Point { n: a.n, p: a.p, m: a.m, b: a.b, seed: a.seed };
    write_csv(&[run_point(&s, &pt)], io::stdout().lock())
}

fn hull_file(a: &PointArgs, planes: Option<PathBuf>, points: Option<PathBuf>) -> Result<()> {
    let mut m = Machine::new(MachineConfig::new(a.p, a.m, a.b)?)?;
    let g = m.all_cores();
    let cfg = HullConfig::with_seed(a.seed);
    let chain = if let Some(path) = planes {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        hull_main(&mut m, g, &parse_planes(&text)?, &Point2::origin(), &cfg)?.chain
    } else {
        let path = points.expect("one input file");
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        convex_hull_2d(&mut m, g, &parse_points(&text)?, &cfg)?.chain
    };
    io::stdout().lock().write_all(chain.to_text().as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Sweep { config, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut sweeps = parse_config(&text)?;
            if let Ok(spec) = std::env::var("PEMLAB_SEED") {
                override_seeds(&mut sweeps, &spec)?;
            }
            let rows = run_sweep(&sweeps);
            match out {
                Some(path) => {
                    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    write_csv(&rows, f)?;
                }
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
        Cmd::Check { csv, band } => {
            let f = fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let reports = check_bands(&pemlab::read_csv(f)?, band);
            for r in &reports {
                println!("{r}");
            }
            return Ok(exit_code(&reports) as u8);
        }
        Cmd::Sort { point, x } => one_row("sort", &point, |s| s.x = x)?,
        Cmd::Hull { point, planes, points } => {
            if planes.is_some() || points.is_some() {
                hull_file(&point, planes, points)?;
            } else {
                one_row("hull", &point, |_| {})?;
            }
        }
        Cmd::Prefix { point, oblivious } => {
            one_row(if oblivious { "oblivious_prefix" } else { "prefix" }, &point, |_| {})?
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pemlab: {e:#}");
            ExitCode::from(1)
        }
    }
}
