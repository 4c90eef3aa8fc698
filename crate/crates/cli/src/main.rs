use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tropitile_core::graph::{admissible_extension, reduce, Divisor, MetricGraph, VertexFunction};
use tropitile_core::semistab::{mu_of_divisor, voronoi_report};
use tropitile_core::setfun::{ModularPair, SetFunction};
use tropitile_core::simplex::{brick_coarsening_report, nu_pair, simplex_tiling_verify, subspaces_from_json};
use tropitile_core::tiling::{enumerate_window, export_svg, periodicity_check, periodicity_lattice, regularity_certificate, verify_family, TileFamily, Window};
use tropitile_core::{rational, BasePolytope, Error};

#[derive(Parser)]
#[command(name = "tropitile", version, about = "Polymatroid tilings from divisors on metric graphs")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel checks.
    #[arg(long, global = true, env = "TROPITILE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Admissible extension D + div(f; D).
    Extend {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// μ table, center and subgraph of an admissible divisor.
    Semistab {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        /// Also list the vertices of the semistability polytope.
        #[arg(long)]
        vertices: bool,
    },
    /// Tile families: enumeration and verification.
    #[command(subcommand)]
    Tile(TileCommand),
    /// Checks the semistability polytope against the Voronoi description.
    Voronoi {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
    },
    /// The admissible v-reduced divisor equivalent to D.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long)]
        vertex: String,
    },
    /// Subspace polymatroids over Q or GF(p).
    #[command(subcommand)]
    Simplex(SimplexCommand),
    /// Brick coarsening check for an integral polymatroid in the simplex.
    Bricks {
        #[arg(long)]
        pair: PathBuf,
        /// Denominator of the sampling grid.
        #[arg(long, default_value_t = 4)]
        grid: i64,
    },
    /// Drawing tile families.
    #[command(subcommand)]
    Export(ExportCommand),
}

#[derive(Subcommand)]
enum TileCommand {
    /// Tiles whose centers lie in a window of H_d.
    Enumerate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        seed_divisor: PathBuf,
        /// e.g. "u:-4..4,v:-4..4,w:-4..4"
        #[arg(long)]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a CSV of tile centers.
        #[arg(long)]
        centers_csv: Option<PathBuf>,
    },
    /// Separation, closedness, facet pairing, positivity and coverage.
    Verify {
        family: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Builds and checks a convex piecewise-affine certificate.
    Regularity { family: PathBuf },
    /// Basis of the periodicity lattice; with a family, checks invariance.
    Periodicity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        family: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimplexCommand {
    /// Checks that the polytopes of the given subspaces tile the simplex.
    Verify {
        #[arg(long)]
        subspaces: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    Svg(SvgArgs),
}

#[derive(Args)]
struct SvgArgs {
    family: PathBuf,
    /// Two vertex labels, e.g. "u,v".
    #[arg(long)]
    proj: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    Unverified,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<MetricGraph, Failure> {
    Ok(MetricGraph::from_json(&read_json(path)?)?)
}

fn read_divisor(g: &MetricGraph, path: &Path) -> Result<Divisor, Failure> {
    let d = Divisor::from_json(g, &read_json(path)?)?;
    d.check_on(g)?;
    Ok(d)
}

fn read_family(path: &Path) -> Result<TileFamily, Failure> {
    Ok(TileFamily::from_json(&read_json(path)?)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Prints the report (JSON or the summary lines) and maps `ok` to the exit status.
fn verdict(json_mode: bool, report: &Value, lines: &[String], ok: bool) -> Outcome {
    if json_mode {
        print!("{}", pretty(report));
    } else {
        for l in lines {
            println!("{l}");
        }
        println!("{}", if ok { "PASS" } else { "FAIL" });
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Unverified)
    }
}

fn read_pair(v: &Value) -> Result<ModularPair, Failure> {
    if v.get("values").is_some() {
        return Ok(ModularPair::from_mu(SetFunction::from_json(v)?));
    }
    let mu = SetFunction::from_json(v.get("mu").ok_or_else(|| Failure::Invalid("pair needs \"mu\"".into()))?)?;
    Ok(match v.get("mu_star") {
        Some(s) => ModularPair::new(mu, SetFunction::from_json(s)?)?,
        None => ModularPair::from_mu(mu),
    })
}

fn run(cli: Cli) -> Outcome {
    let json_mode = cli.json;
    match cli.command {
        Command::Extend { graph, divisor, f, out } => {
            let g = read_graph(&graph)?;
            let d = read_divisor(&g, &divisor)?;
            let f = VertexFunction::from_json(&g, &read_json(&f)?)?;
            let (d2, _) = admissible_extension(&g, &d, &f);
            emit(out.as_deref(), &pretty(&d2.to_json(&g)))
        }
        Command::Semistab { graph, divisor, vertices } => {
            let g = read_graph(&graph)?;
            let d = read_divisor(&g, &divisor)?;
            let sd = mu_of_divisor(&g, &d)?;
            let mut v = sd.to_json(&g);
            v["mu_star"] = sd.pair.mu_star.to_json();
            v["full_dimensional"] = json!(sd.is_full_dimensional(&g));
            if vertices {
                let vs = sd.polytope().vertices()?.iter().map(|q| q.to_json(g.vertices())).collect::<Vec<_>>();
                v["vertices"] = Value::Array(vs);
            }
            emit(None, &pretty(&v))
        }
        Command::Tile(TileCommand::Enumerate { graph, seed_divisor, window, out, centers_csv }) => {
            let g = read_graph(&graph)?;
            let d = read_divisor(&g, &seed_divisor)?;
            let w = Window::parse(&g, &window)?;
            let fam = enumerate_window(&g, &d, &w)?;
            if let Some(p) = centers_csv {
                emit(Some(&p), &fam.centers_csv())?;
            }
            if out.is_some() && !json_mode {
                println!("{} tiles, {} with centers in the window", fam.tiles.len(), fam.centers_in_window().len());
            }
            emit(out.as_deref(), &pretty(&fam.to_json()))
        }
        Command::Tile(TileCommand::Verify { family, samples }) => {
            let fam = read_family(&family)?;
            let r = verify_family(&fam, samples, cli.seed)?;
            let lines = vec![
                format!("tiles: {}", r.tiles),
                format!("stored data consistent: {}", r.consistency_failures.is_empty()),
                format!("separation: {} pairs, {} failures", r.pairs_checked, r.separation_failures.len()),
                format!("closedness: {} faces, {} failures", r.closedness_checked, r.closedness_failures.len()),
                format!("facet pairing: {} facets, {} failures", r.facets_checked, r.facet_pairing_failures.len()),
                format!("positivity: min spread {}", r.min_spread.as_ref().map_or("-".into(), rational::format)),
                format!("coverage: {} samples, {} uncovered, {} multiply covered", r.samples, r.uncovered, r.multiply_covered),
            ];
            verdict(json_mode, &r.to_json(), &lines, r.ok())
        }
        Command::Tile(TileCommand::Regularity { family }) => {
            let fam = read_family(&family)?;
            let cert = regularity_certificate(&fam)?;
            let r = cert.check(&fam)?;
            let mut report = r.to_json();
            report["root"] = json!(cert.root);
            let lines = vec![
                format!("facets: {}, gluing failures: {}", r.margins.len(), r.gluing_failures.len()),
                format!("min margin: {}", r.min_margin().map_or("-".into(), rational::format)),
                format!("cycle edges: {}, nonzero residues: {}", r.residues.len(), report["nonzero_residues"]),
            ];
            verdict(json_mode, &report, &lines, r.ok())
        }
        Command::Tile(TileCommand::Periodicity { graph, family }) => {
            let g = read_graph(&graph)?;
            let basis = periodicity_lattice(&g)?;
            let mut report = json!({ "basis": basis.iter().map(|p| p.to_json(g.vertices())).collect::<Vec<_>>() });
            let mut lines: Vec<String> = basis.iter().map(|p| format!("{:?}", p.0.iter().map(rational::format).collect::<Vec<_>>())).collect();
            let ok = match family {
                Some(path) => {
                    let fam = read_family(&path)?;
                    let r = periodicity_check(&fam, &basis)?;
                    report["checked"] = json!(r.checked);
                    report["matched"] = json!(r.matched);
                    report["ok"] = json!(r.ok());
                    lines.push(format!("translates checked: {}, matched: {}", r.checked, r.matched));
                    r.ok()
                }
                None => {
                    if json_mode {
                        print!("{}", pretty(&report));
                    } else {
                        lines.iter().for_each(|l| println!("{l}"));
                    }
                    return Ok(());
                }
            };
            verdict(json_mode, &report, &lines, ok)
        }
        Command::Voronoi { graph, divisor } => {
            let g = read_graph(&graph)?;
            let d = read_divisor(&g, &divisor)?;
            let r = voronoi_report(&g, &d)?;
            let report = json!({
                "ok": r.holds(),
                "polytope_vertices": r.polytope_vertices,
                "voronoi_vertices": r.voronoi_vertices,
                "vertex_sets_equal": r.equal,
                "nearest_point_ok": r.nearest_point_ok,
            });
            let lines = vec![
                format!("polytope vertices: {}, translated Voronoi vertices: {}", r.polytope_vertices, r.voronoi_vertices),
                format!("vertex sets equal: {}", r.equal),
                format!("origin nearest to 0 among integer shifts: {}", r.nearest_point_ok),
            ];
            verdict(json_mode, &report, &lines, r.holds())
        }
        Command::Reduce { graph, divisor, vertex } => {
            let g = read_graph(&graph)?;
            let d = read_divisor(&g, &divisor)?;
            let v = g.vertex(&vertex)?;
            let r = reduce(&g, &d, v)?;
            let report = json!({
                "divisor": r.divisor.to_json(&g),
                "witness": r.witness.to_json(&g),
                "moves": r.moves.iter().map(|(s, t)| json!({ "fire": g.vertices().key(*s), "by": rational::to_json(t) })).collect::<Vec<_>>(),
            });
            emit(None, &pretty(&report))
        }
        Command::Simplex(SimplexCommand::Verify { subspaces, r, samples }) => {
            let ws = subspaces_from_json(&read_json(&subspaces)?)?;
            let rep = simplex_tiling_verify(&ws, r, samples, cli.seed)?;
            let mut report = rep.to_json();
            report["nu"] = Value::Array(ws.iter().map(|w| nu_pair(w).map(|p| p.mu.to_json())).collect::<Result<Vec<_>, _>>()?);
            let lines = vec![
                format!("subspaces: {} ({} distinct polytopes)", rep.subspaces, rep.distinct),
                format!("separation: {} pairs, {} failures", rep.pairs_checked, rep.separation_failures.len()),
                format!("facet pairing: {} facets, {} failures", rep.facets_checked, rep.facet_pairing_failures.len()),
                format!("coverage: {} samples, {} uncovered, {} multiply covered", rep.samples, rep.uncovered, rep.multiply_covered),
            ];
            verdict(json_mode, &report, &lines, rep.ok())
        }
        Command::Bricks { pair, grid } => {
            if grid < 1 {
                return Err(Failure::Invalid("--grid must be positive".into()));
            }
            let pair = read_pair(&read_json(&pair)?)?;
            let rep = brick_coarsening_report(&pair, grid)?;
            let vertices = BasePolytope::new(pair.clone()).vertices()?.iter().map(|q| q.to_json(pair.ground())).collect::<Vec<_>>();
            let mut report = rep.to_json();
            report["vertices"] = Value::Array(vertices);
            let mut lines = vec![format!("bricks: {}, contained: {}", rep.bricks, rep.contained)];
            lines.extend(rep.failures.iter().cloned());
            verdict(json_mode, &report, &lines, rep.ok())
        }
        Command::Export(ExportCommand::Svg(a)) => {
            let fam = read_family(&a.family)?;
            let (x, y) = a.proj.split_once(',').ok_or_else(|| Failure::Invalid("--proj takes two labels, e.g. u,v".into()))?;
            let (x, y) = (fam.graph.vertex(x.trim())?, fam.graph.vertex(y.trim())?);
            emit(a.out.as_deref(), &export_svg(&fam, x, y)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unverified) => ExitCode::from(1),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
