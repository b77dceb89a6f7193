use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use mpers2::bifiltration::{build_bifiltration, homology_module, PointCloud};
use mpers2::entropy::entropy_table;
use mpers2::interleaving::{search_interleaving, SearchOutcome};
use mpers2::io::{export_transform, module_from_json, module_to_json, table_to_csv};
use mpers2::lnti::{lnti_self, lnti_table};
use mpers2::mbi::{decompose_seeded, mbi_table};
use mpers2::rank::rank_table;
use mpers2::{GridBox, GridPoint, InvariantTable, PersistenceModule};

#[derive(Parser)]
#[command(
    name = "mpers2",
    version,
    about = "Invariants of multiparameter persistence modules on finite grids"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a module document parses and its squares commute.
    Validate { module: PathBuf },
    /// Rank invariant table.
    Rank {
        module: PathBuf,
        /// Restrict to the box `i,j..k,l` (grid indices).
        #[arg(long = "box", value_parser = parse_box)]
        region: Option<GridBox>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimensions of natural transformations on every box.
    Lnti {
        module: PathBuf,
        /// Second module; the self-table is computed when absent.
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long = "box", value_parser = parse_box)]
        region: Option<GridBox>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-box signatures (Betti numbers, ranks, summand dimensions) as JSON.
    Mbi {
        module: PathBuf,
        #[arg(long = "box", value_parser = parse_box)]
        region: Option<GridBox>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a module into indecomposable summands.
    Decompose {
        module: PathBuf,
        /// Directory receiving one document per summand and the witness.
        #[arg(long)]
        out: PathBuf,
    },
    /// Persistent entropy table.
    Entropy {
        module: PathBuf,
        /// Report in bits instead of nats.
        #[arg(long)]
        bits: bool,
        #[arg(long = "box", value_parser = parse_box)]
        region: Option<GridBox>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two modules at a shift and optionally search for an interleaving.
    Interleave {
        m: PathBuf,
        n: PathBuf,
        /// Shift in grid steps, one value or one per axis.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<usize>,
        /// Run the exhaustive certificate search (prime fields only).
        #[arg(long)]
        search: bool,
        /// Maximum number of candidates the search may enumerate.
        #[arg(long, default_value_t = 1_000_000, requires = "search")]
        budget: u64,
        /// Directory receiving the certificate maps when one is found.
        #[arg(long, requires = "search")]
        out: Option<PathBuf>,
    },
    /// Homology module of a point cloud's Rips and density bifiltration.
    Ingest {
        cloud: PathBuf,
        /// Increasing radius values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        radii: Vec<f64>,
        /// Increasing density thresholds.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        densities: Vec<f64>,
        /// Homological degree.
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
        /// Read each point's density from the last column.
        #[arg(long)]
        density_column: bool,
        /// Neighbour used by the default density estimate.
        #[arg(long, default_value_t = 2)]
        knn: usize,
        /// Largest simplex dimension; defaults to degree + 1.
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Rank, LNTI and entropy tables of two modules side by side.
    Compare {
        m: PathBuf,
        n: PathBuf,
        #[arg(long = "box", value_parser = parse_box)]
        region: Option<GridBox>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<GridPoint, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("{t:?} is not a grid index"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(GridPoint)
}

fn parse_box(s: &str) -> Result<GridBox, String> {
    let (lo, hi) = s.split_once("..").ok_or("expected a box like 0,0..2,3")?;
    GridBox::new(parse_point(lo)?, parse_point(hi)?).map_err(|e| e.to_string())
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read_module(path: &Path) -> Result<PersistenceModule, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    module_from_json(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> CliResult {
    if let Ok(value) = std::env::var("MPERS2_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Usage(format!("MPERS2_THREADS must be a positive integer, found {value:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Validate { module } => {
            let text =
                fs::read_to_string(&module).map_err(|e| Failure::Domain(format!("{}: {e}", module.display())))?;
            match module_from_json(&text) {
                Ok(_) => {
                    println!("OK");
                    Ok(())
                }
                Err(e) => {
                    println!("{e}");
                    Err(Failure::Domain(format!("{}: invalid module", module.display())))
                }
            }
        }
        Command::Rank { module, region, out } => {
            let m = read_module(&module)?;
            write_output(out.as_deref(), &table_to_csv(&rank_table(&m, region.as_ref())?))
        }
        Command::Lnti {
            module,
            other,
            region,
            out,
        } => {
            let m = read_module(&module)?;
            let table = match other {
                Some(path) => lnti_table(&m, &read_module(&path)?, region.as_ref())?,
                None => lnti_self(&m, region.as_ref())?,
            };
            write_output(out.as_deref(), &table_to_csv(&table))
        }
        Command::Mbi { module, region, out } => {
            let m = read_module(&module)?;
            let table = mbi_table(&m, region.as_ref())?;
            let rows: Vec<_> = table.iter().map(|(_, _, s)| s).collect();
            let mut text = serde_json::to_string_pretty(&rows)?;
            text.push('\n');
            write_output(out.as_deref(), &text)
        }
        Command::Decompose { module, out } => {
            let m = Arc::new(read_module(&module)?);
            let d = decompose_seeded(&m, cli.seed)?;
            fs::create_dir_all(&out)?;
            let mut names = Vec::new();
            for (i, s) in d.summands.iter().enumerate() {
                let name = format!("summand_{i:03}.json");
                fs::write(out.join(&name), module_to_json(s))?;
                names.push(name);
            }
            let target = module
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let doc = export_transform(&d.witness, &names.join("+"), &target);
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            fs::write(out.join("witness.json"), text)?;
            for (name, s) in names.iter().zip(&d.summands) {
                println!("{name}: {:?}", s.dimension_vector());
            }
            if !d.complete {
                println!("warning: indecomposability of some summands was not certified");
            }
            Ok(())
        }
        Command::Entropy {
            module,
            bits,
            region,
            out,
        } => {
            let m = read_module(&module)?;
            let mut table = entropy_table(&m, region.as_ref())?;
            if bits {
                table = table.map(|h| h / std::f64::consts::LN_2);
            }
            write_output(out.as_deref(), &table_to_csv(&table))
        }
        Command::Interleave {
            m,
            n,
            eps,
            search,
            budget,
            out,
        } => {
            let (mm, nn) = (read_module(&m)?, read_module(&n)?);
            interleave(&mm, &nn, &eps, search.then_some(budget), out.as_deref())
        }
        Command::Ingest {
            cloud,
            radii,
            densities,
            degree,
            out,
            density_column,
            knn,
            max_dim,
        } => {
            let text = fs::read_to_string(&cloud).map_err(|e| Failure::Domain(format!("{}: {e}", cloud.display())))?;
            let points = PointCloud::parse(&text, density_column)
                .map_err(|e| Failure::Domain(format!("{}: {e}", cloud.display())))?;
            let bif = build_bifiltration(&points, &radii, &densities, max_dim.unwrap_or(degree + 1), knn)?;
            let h = homology_module(&bif, degree)?;
            fs::write(&out, module_to_json(&h))?;
            let thresholds: Vec<String> = bif.thresholds().iter().map(|t| t.to_string()).collect();
            println!("axis 0: radius {:?}", radii);
            println!(
                "axis 1: density threshold, index j means density >= [{}][j]",
                thresholds.join(", ")
            );
            println!(
                "simplices: {}, total dimension: {}",
                bif.simplices().len(),
                h.total_dim()
            );
            Ok(())
        }
        Command::Compare { m, n, region, out } => {
            let (mm, nn) = (read_module(&m)?, read_module(&n)?);
            compare(&mm, &nn, region.as_ref(), out.as_deref())
        }
    }
}

fn interleave(
    m: &PersistenceModule,
    n: &PersistenceModule,
    eps: &[usize],
    budget: Option<u64>,
    out: Option<&Path>,
) -> CliResult {
    let eps: Vec<usize> = match eps.len() {
        1 => vec![eps[0]; m.nparams()],
        k if k == m.nparams() => eps.to_vec(),
        k => {
            return Err(Failure::Usage(format!(
                "--eps has {k} values for a {}-parameter module",
                m.nparams()
            )))
        }
    };
    let shifted = n.shift(&eps)?;
    let (a, b) = (lnti_self(m, None)?, lnti_self(&shifted, None)?);
    println!("eps: {eps:?}");
    println!("max self-LNTI difference against N shifted: {}", a.max_count_diff(&b));
    let Some(budget) = budget else {
        return Ok(());
    };
    match search_interleaving(m, n, &eps, budget)? {
        SearchOutcome::Found(cert) => {
            println!("interleaving: found");
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                for (name, map, src, tgt) in [
                    ("phi.json", &cert.phi, "M", "N[eps]"),
                    ("psi.json", &cert.psi, "N", "M[eps]"),
                ] {
                    let mut text = serde_json::to_string_pretty(&export_transform(map, src, tgt))?;
                    text.push('\n');
                    fs::write(dir.join(name), text)?;
                }
            }
        }
        SearchOutcome::NoneExists => println!("interleaving: none exists"),
        SearchOutcome::BudgetExceeded { required } => {
            println!("interleaving: undecided, search needs {required} candidates (budget {budget})")
        }
    }
    Ok(())
}

fn compare(m: &PersistenceModule, n: &PersistenceModule, region: Option<&GridBox>, out: Option<&Path>) -> CliResult {
    let (rm, rn) = (rank_table(m, region)?, rank_table(n, region)?);
    let (lm, ln) = (lnti_self(m, region)?, lnti_self(n, region)?);
    let (em, en) = (entropy_table(m, region)?, entropy_table(n, region)?);
    let grid = m.grid();
    let k = grid.nparams();
    let mut text = String::new();
    let header: Vec<String> = (0..k)
        .map(|i| format!("a_{i}"))
        .chain((0..k).map(|i| format!("b_{i}")))
        .chain(["rank_m", "rank_n", "lnti_m", "lnti_n", "entropy_m", "entropy_n"].map(String::from))
        .collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for (a, b, r) in rm.iter() {
        let row: Vec<String> = grid
            .coords(a)
            .into_iter()
            .chain(grid.coords(b))
            .map(|c| c.to_string())
            .chain([
                r.to_string(),
                value(&rn, a, b),
                value(&lm, a, b),
                value(&ln, a, b),
                value(&em, a, b),
                value(&en, a, b),
            ])
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_output(out, &text)?;
    println!("max rank difference: {}", rm.max_count_diff(&rn));
    println!("max lnti difference: {}", lm.max_count_diff(&ln));
    println!("max entropy difference: {}", em.max_abs_diff(&en));
    Ok(())
}

fn value<T: Display>(t: &InvariantTable<T>, a: &GridPoint, b: &GridPoint) -> String {
    t.get(a, b).map(|v| v.to_string()).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
