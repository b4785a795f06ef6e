//! `nterm`: generate functions, run the approximation pipeline, sweep `N`,
//! cover rings, check invariants and draw pictures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nterm::approximant::literal_covering;
use nterm::checks::check_approximation;
use nterm::config::{parse_n_list, PartialConfig, QValue, RunConfig};
use nterm::dyadic::DyadicCube;
use nterm::format::sig12;
use nterm::grid::{make_function, GridFunction};
use nterm::pipeline::{rate_sweep, Approximator};
use nterm::render;
use nterm::ring_cover::{cover_ring, verify_cover};
use nterm::tree::TreeDump;
use nterm::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "nterm", version, about = "N-term piecewise-polynomial approximation on dyadic cubes and rings")]
struct Cli {
    /// Cap on worker threads for fits and the variation table.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a function on the grid and write it as CSV.
    Gen(RunArgs),
    /// Build g_N for every N and write the approximant.
    Approx(RunArgs),
    /// Run the pipeline over an increasing N list and fit the rate.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Write 0 in the timing column.
        #[arg(long)]
        no_time: bool,
    },
    /// Cover the ring Q* \ Q by cubes of a Hamiltonian cycle.
    RingCover(RingArgs),
    /// Run the invariant suite; exits with 3 if a check fails.
    Verify(RunArgs),
    /// Draw a two-dimensional artifact as SVG.
    Render {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        what: Artifact,
        #[arg(long)]
        outer: Option<String>,
        #[arg(long)]
        inner: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Artifact {
    Covering,
    /// The covering before the fix-up.
    LiteralCovering,
    Rings,
    Function,
    RingCover,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Function spec such as `disk:0.3@0.5,0.5`, `sine:1`, `poly:1 + x_1*x_2`, `csv:PATH`.
    #[arg(long)]
    function: Option<String>,
    #[arg(short = 'd', long = "dim")]
    d: Option<usize>,
    /// Grid resolution level.
    #[arg(short = 'J', long = "level")]
    j: Option<u32>,
    /// Polynomials of total degree at most k-1.
    #[arg(short = 'k', long)]
    k: Option<usize>,
    #[arg(short = 'p', long)]
    p: Option<f64>,
    /// Error norm exponent, a number or `inf`.
    #[arg(short = 'q', long)]
    q: Option<String>,
    /// `16`, `8,16,32` or `8..1024`.
    #[arg(short = 'N', long = "n")]
    n: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_tree: bool,
    #[arg(long)]
    rings: bool,
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct RingArgs {
    /// Inner cube Q as `j:a_1,...,a_d`.
    #[arg(long)]
    inner: String,
    /// Outer cube Q* as `j:a_1,...,a_d`.
    #[arg(long)]
    outer: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write an SVG picture (d = 2 only).
    #[arg(long)]
    svg: bool,
}

impl RunArgs {
    fn resolve(&self) -> nterm::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => PartialConfig::load(p)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            function: self.function.clone(),
            d: self.d,
            j: self.j,
            k: self.k,
            p: self.p,
            q: self.q.clone().map(|q| q.parse::<f64>().map_or(QValue::Text(q), QValue::Number)),
            n: self.n.as_deref().map(parse_n_list).transpose()?,
            out: self.out.clone(),
            dump_tree: self.dump_tree.then_some(true),
            rings: self.rings.then_some(true),
            verify: self.verify.then_some(true),
        };
        RunConfig::from_partial(file.overlay(flags))
    }
}

enum Failure {
    Error(Error),
    Invariant,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant) => ExitCode::from(EXIT_INVARIANT),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_)
                | Error::BadFormat(_)
                | Error::BadDimension(_)
                | Error::DimensionMismatch(_)
                | Error::NotProperSubcube { .. }
                | Error::UnsupportedDimension(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(&a.resolve()?),
        Command::Approx(a) => approx(&a.resolve()?),
        Command::Sweep { run, no_time } => sweep(&run.resolve()?, !no_time),
        Command::RingCover(a) => ring_cover(&a),
        Command::Verify(a) => verify(&a.resolve()?),
        Command::Render { run, what, outer, inner } => render_cmd(&run, what, outer, inner),
    }
}

fn load(cfg: &RunConfig) -> nterm::Result<GridFunction> {
    make_function(&cfg.spec, cfg.d, cfg.j)
}

fn write(dir: &Path, name: &str, text: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)
}

fn gen(cfg: &RunConfig) -> Outcome {
    let f = load(cfg)?;
    write(&cfg.out, "function.csv", &f.to_csv())?;
    println!("wrote {} cells to {}", f.len(), cfg.out.join("function.csv").display());
    Ok(())
}

fn approx(cfg: &RunConfig) -> Outcome {
    let f = load(cfg)?;
    let ap = Approximator::new(&f, cfg.k, cfg.p, cfg.q)?;
    let mut ok = true;
    for &n in &cfg.n {
        let a = ap.run(n)?;
        write(&cfg.out, &format!("approx_N{n}.json"), &a.to_json()?)?;
        write(&cfg.out, &format!("reconstruction_N{n}.csv"), &a.piecewise.to_grid_function("g_N")?.to_csv())?;
        if cfg.rings {
            let g = GridFunction::from_values(f.dim(), f.level(), a.rings.eval_grid(), "rings")?;
            write(&cfg.out, &format!("rings_N{n}.csv"), &g.to_csv())?;
        }
        if cfg.dump_tree {
            if let (Some(bs), Some(bp)) = (&a.bad_set, &a.basic_paths) {
                let json = serde_json::to_string_pretty(&TreeDump::new(bs, bp)).map_err(Error::from)? + "\n";
                write(&cfg.out, &format!("tree_N{n}.json"), &json)?;
            }
        }
        println!(
            "N={n} card_covering={} card_basic_paths={} error_q={} error_q_rings={}{}",
            a.covering.len(),
            a.basic_paths.as_ref().map_or(0, |b| b.len()),
            sig12(a.error),
            sig12(a.ring_error),
            if a.degenerate { " degenerate" } else { "" }
        );
        if cfg.verify {
            ok &= report(&ap, &a, &f);
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

/// Prints each check; returns whether all passed.
fn report(ap: &Approximator, a: &nterm::pipeline::Approximation, f: &GridFunction) -> bool {
    let checks = match ap.table.weight() {
        Ok(w) => check_approximation(w, a, f.values()),
        Err(_) => check_approximation(&ap.table, a, f.values()),
    };
    let mut ok = true;
    for c in checks {
        println!("  {} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.pass;
    }
    ok
}

fn sweep(cfg: &RunConfig, with_time: bool) -> Outcome {
    let f = load(cfg)?;
    let ns = cfg.sweep_ns()?;
    let r = rate_sweep(&f, cfg.k, cfg.p, cfg.q, &ns)?;
    let csv = r.to_csv(with_time);
    write(&cfg.out, "sweep.csv", &csv)?;
    print!("{csv}");
    for (n, e) in &r.failures {
        eprintln!("N={n} failed: {e}");
    }
    match r.slope {
        Some(s) => println!("slope={} predicted={}", sig12(s), sig12(r.predicted_slope)),
        None => println!("slope=skipped errors-vanish predicted={}", sig12(r.predicted_slope)),
    }
    Ok(())
}

fn parse_cube(s: &str) -> nterm::Result<DyadicCube> {
    s.parse()
}

fn ring_cover(a: &RingArgs) -> Outcome {
    let (q, qstar) = (parse_cube(&a.inner)?, parse_cube(&a.outer)?);
    let cc = cover_ring(&q, &qstar)?;
    let rep = verify_cover(&cc, &q, &qstar);
    write(&a.out, "ring_cover.json", &(serde_json::to_string_pretty(&cc).map_err(Error::from)? + "\n"))?;
    if a.svg {
        write(&a.out, "ring_cover.svg", &render::cycle_cover_svg(&cc)?)?;
    }
    println!(
        "cubes={} interior={} containment_violations={} uncovered_cells={} overlap_violations={} face_violations={}",
        rep.count,
        cc.interior,
        rep.containment_violations.len(),
        rep.uncovered_cells,
        rep.overlap_violations.len(),
        rep.face_violations.len()
    );
    if rep.is_ok() {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

fn verify(cfg: &RunConfig) -> Outcome {
    let f = load(cfg)?;
    let ap = Approximator::new(&f, cfg.k, cfg.p, cfg.q)?;
    let mut ok = true;
    for &n in &cfg.n {
        let a = ap.run(n)?;
        println!("N={n}");
        ok &= report(&ap, &a, &f);
    }
    println!("{}", if ok { "all checks passed" } else { "some checks failed" });
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

fn render_cmd(run: &RunArgs, what: Artifact, outer: Option<String>, inner: Option<String>) -> Outcome {
    if let Artifact::RingCover = what {
        let need = |c: Option<String>, flag: &str| c.ok_or_else(|| Error::Config(format!("--{flag} is required")));
        let (q, qstar) = (parse_cube(&need(inner, "inner")?)?, parse_cube(&need(outer, "outer")?)?);
        let svg = render::cycle_cover_svg(&cover_ring(&q, &qstar)?)?;
        write(run.out.as_deref().unwrap_or(Path::new("out")), "ring_cover.svg", &svg)?;
        return Ok(());
    }
    let cfg = run.resolve()?;
    let f = load(&cfg)?;
    if let Artifact::Function = what {
        write(&cfg.out, "function.svg", &render::grid_svg(&f)?)?;
        return Ok(());
    }
    if f.dim() != 2 {
        return Err(Error::UnsupportedDimension(f.dim()).into());
    }
    let ap = Approximator::new(&f, cfg.k, cfg.p, cfg.q)?;
    for &n in &cfg.n {
        let a = ap.run(n)?;
        let (name, svg) = match what {
            Artifact::Covering => ("covering", render::covering_svg(&a.covering)?),
            Artifact::LiteralCovering => {
                let cov = match &a.basic_paths {
                    Some(bp) => literal_covering(bp, f.dim()),
                    None => a.covering.clone(),
                };
                ("literal_covering", render::covering_svg(&cov)?)
            }
            Artifact::Rings => ("rings", render::rings_svg(&a.rings)?),
            Artifact::Function | Artifact::RingCover => unreachable!(),
        };
        write(&cfg.out, &format!("{name}_N{n}.svg"), &svg)?;
    }
    Ok(())
}
