use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use num_rational::Rational64;
use serde_json::json;

use flatfiber::acceptance::{run_acceptance, Scope};
use flatfiber::counting::{build_report, count_series, CountKind};
use flatfiber::cover::{build, connected_sum, dsym_enumerate, CoverDatum};
use flatfiber::export::{self, rational64_text, Format};
use flatfiber::fiber::{build_fiber_origami, verify};
use flatfiber::geometry::direction_cylinders;
use flatfiber::sl2z::orbit_partial;
use flatfiber::{Origami, Perm};

#[derive(Parser)]
#[command(name = "flatfiber", version, about = "Square-tiled surfaces, modular fibers and Siegel-Veech counting")]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Reserved. Every computation is deterministic, so the seed has no effect.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Text => Format::OrigamiText,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form invariants and constants.
    Arith {
        #[command(subcommand)]
        cmd: ArithCmd,
    },
    /// Structural data of an origami file.
    Origami {
        #[command(subcommand)]
        cmd: OrigamiCmd,
    },
    /// SL(2,Z) orbit of an origami.
    Orbit {
        file: PathBuf,
        /// Stop after this many elements.
        #[arg(long, default_value_t = 1_000_000)]
        max: usize,
        #[arg(long)]
        emit_edges: bool,
        #[arg(long)]
        emit_elements: bool,
    },
    /// Cylinder decomposition in a rational direction.
    Cylinders {
        file: PathBuf,
        /// Primitive direction `p,q`.
        #[arg(long, default_value = "1,0")]
        direction: String,
    },
    /// Count cylinders or saddle connections by length.
    Count {
        kind: CountArg,
        file: PathBuf,
        #[arg(long)]
        tmax: String,
        /// Number of equally spaced bounds up to `tmax`.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Report the constant of the area-one rescaling.
        #[arg(long)]
        normalize_area: bool,
        /// Exact constant to compare against, e.g. `8/3`. For cylinders the
        /// orbit formula is used when no value is given.
        #[arg(long)]
        formula: Option<String>,
    },
    /// Branched torus covers.
    Cover {
        #[command(subcommand)]
        cmd: CoverCmd,
    },
    /// Modular fibers.
    Fiber {
        #[command(subcommand)]
        cmd: FiberCmd,
    },
    /// Run the acceptance checks.
    Accept {
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        /// Include the fiber structure checks for degrees 4 and 5.
        #[arg(long)]
        slow: bool,
    },
}

#[derive(Subcommand)]
enum ArithCmd {
    Table {
        #[arg(long, default_value_t = 2)]
        dmin: u64,
        #[arg(long, default_value_t = 12)]
        dmax: u64,
    },
}

#[derive(Subcommand)]
enum OrigamiCmd {
    Info { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum CountArg {
    Cylinders,
    Saddles,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    SAv,
    Dsym,
    Generic,
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Build a cover and print it in origami text format.
    Build {
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = CoverKind::SAv)]
        kind: CoverKind,
        #[arg(long, default_value_t = 1)]
        a: usize,
        /// Branch point `p/n,q/n`.
        #[arg(long, default_value = "1/2,1/2")]
        branch: String,
        /// Build the cyclic connected sum (same as `--kind dsym`).
        #[arg(long)]
        cyclic: bool,
        /// Monodromy for `--kind generic`, in cycle notation.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        v: Option<String>,
        #[arg(long)]
        c1: Option<String>,
    },
    /// Classes of d-symmetric covers over `(1/n)Z²`.
    Dsym {
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        denominator: i64,
    },
}

#[derive(Subcommand)]
enum FiberCmd {
    Build {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify {
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Arith,
    MarkedTorus,
    Fiber,
    Dsym,
    All,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Arith => Scope::Arith,
            ScopeArg::MarkedTorus => Scope::MarkedTorus,
            ScopeArg::Fiber => Scope::Fiber,
            ScopeArg::Dsym => Scope::Dsym,
            ScopeArg::All => Scope::All,
        }
    }
}

fn read_origami(path: &Path) -> Result<Origami> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Origami::parse_text(&text)?)
}

fn parse_pair(s: &str) -> Result<(i64, i64)> {
    let (p, q) = s.split_once(',').context("expected `p,q`")?;
    Ok((p.trim().parse()?, q.trim().parse()?))
}

/// `p/n,q/n` as `((a, b), denom)` over a common denominator, reduced to `[0, 1)`.
fn parse_branch(s: &str) -> Result<((i64, i64), i64)> {
    let (x, y) = s.split_once(',').context("expected `p/n,q/n`")?;
    let x: Rational64 = x.trim().parse().map_err(|e| anyhow::anyhow!("{x}: {e}"))?;
    let y: Rational64 = y.trim().parse().map_err(|e| anyhow::anyhow!("{y}: {e}"))?;
    let n = x.denom().lcm(y.denom());
    let a = (x * n).to_integer().rem_euclid(n);
    let b = (y * n).to_integer().rem_euclid(n);
    Ok(((a, b), n))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(s: &str) {
    print!("{s}");
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let fmt: Format = cli.format.into();
    match cli.command {
        Command::Arith { cmd: ArithCmd::Table { dmin, dmax } } => {
            emit(&export::arith_table(&export::arith_rows(dmin, dmax)?, fmt)?);
        }
        Command::Origami { cmd: OrigamiCmd::Info { file } } => {
            let o = read_origami(&file)?;
            let info = if o.is_connected() {
                let per = o.period_lattice()?;
                let basis: Vec<[String; 2]> =
                    per.basis().iter().map(|(x, y)| [rational64_text(x), rational64_text(y)]).collect();
                json!({
                    "squares": o.n_squares(),
                    "unit": rational64_text(&o.unit()),
                    "connected": true,
                    "genus": o.genus()?,
                    "euler_char": o.euler_char(),
                    "cone_data": o.singularities()?,
                    "period_lattice": basis,
                    "automorphisms": o.automorphism_count()?,
                })
            } else {
                json!({ "squares": o.n_squares(), "connected": false })
            };
            emit(&export::to_json(&info)?);
        }
        Command::Orbit { file, max, emit_edges, emit_elements } => {
            let o = read_origami(&file)?;
            let rec = orbit_partial(&o, max)?;
            let mut out = json!({
                "size": rec.elements.len(),
                "complete": rec.complete,
                "minus_id": rec.minus_id_in_stabilizer,
            });
            if emit_elements {
                out["elements"] = json!(rec.elements.iter().map(Origami::to_text).collect::<Vec<_>>());
            }
            if emit_edges {
                out["edges"] = json!(rec.edges);
            }
            emit(&export::to_json(&out)?);
        }
        Command::Cylinders { file, direction } => {
            let o = read_origami(&file)?;
            let (p, q) = parse_pair(&direction)?;
            emit(&export::to_json(&direction_cylinders(&o, p, q)?)?);
        }
        Command::Count { kind, file, tmax, samples, normalize_area, formula } => {
            let o = read_origami(&file)?;
            let tmax: Rational64 = tmax.parse().map_err(|e| anyhow::anyhow!("--tmax: {e}"))?;
            if samples == 0 {
                bail!("--samples must be positive");
            }
            let ts: Vec<Rational64> = (1..=samples as i64).map(|i| tmax * Rational64::new(i, samples as i64)).collect();
            let kind = match kind {
                CountArg::Cylinders => CountKind::Cylinders,
                CountArg::Saddles => CountKind::SaddleConnections,
            };
            let mut exact = match formula {
                Some(f) => Some(flatfiber::arith::parse_rational(&f)?),
                None if kind == CountKind::Cylinders => Some(flatfiber::acceptance::finite_orbit_constant(&o)?.0),
                None => None,
            };
            if normalize_area {
                let area = o.area();
                let area = num_rational::BigRational::new((*area.numer()).into(), (*area.denom()).into());
                exact = exact.map(|c| c * area);
            }
            let s = count_series(&o, kind, &ts, normalize_area)?;
            let r = if s.len() >= 3 {
                build_report(&file.display().to_string(), kind, s, exact.as_ref())?
            } else {
                bail!("need at least 3 samples for an estimate");
            };
            emit(&export::sv_report(&r, fmt)?);
        }
        Command::Cover { cmd } => match cmd {
            CoverCmd::Build { degree, kind, a, branch, cyclic, h, v, c1 } => {
                let (b, n) = parse_branch(&branch)?;
                let o = match kind {
                    CoverKind::SAv if !cyclic => connected_sum(a, degree, b, n, false)?,
                    CoverKind::SAv | CoverKind::Dsym => connected_sum(a, degree, b, n, true)?,
                    CoverKind::Generic => {
                        let cyc = |x: Option<String>, name: &str| -> Result<Perm> {
                            let x = x.with_context(|| format!("--kind generic needs --{name}"))?;
                            Ok(Perm::parse_cycles(degree, &x)?)
                        };
                        let datum = CoverDatum::new(cyc(h, "h")?, cyc(v, "v")?, cyc(c1, "c1")?, b, n)?;
                        build(&datum)?
                    }
                };
                let f = if fmt == Format::Json { Format::Json } else { Format::OrigamiText };
                emit(&export::origami(&o, f)?);
            }
            CoverCmd::Dsym { degree, denominator } => {
                emit(&export::to_json(&dsym_enumerate(degree, denominator)?)?);
            }
        },
        Command::Fiber { cmd } => match cmd {
            FiberCmd::Build { degree, out } => {
                let f = build_fiber_origami(degree)?;
                let text = f.origami.to_text();
                match out {
                    Some(path) => {
                        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
                        let summary = json!({
                            "degree": degree,
                            "squares": f.origami.n_squares(),
                            "genus": f.origami.genus()?,
                            "weighted_total": flatfiber::arith::format_rational(&f.enumeration.weighted_total),
                            "out": path.display().to_string(),
                        });
                        emit(&export::to_json(&summary)?);
                    }
                    None => emit(&text),
                }
            }
            FiberCmd::Verify { degree } => {
                let v = verify(degree)?;
                emit(&export::to_json(&v)?);
                if !v.all_passed() {
                    return Ok(ExitCode::FAILURE);
                }
            }
        },
        Command::Accept { scope, slow } => {
            let bundle = run_acceptance(scope.into(), slow);
            if fmt == Format::Json {
                emit(&export::to_json(&bundle)?);
            } else {
                for c in bundle.checks.values() {
                    println!("{}", c.line());
                }
            }
            if bundle.any_failed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
