use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dpcover::density::{max_density_brute_force, max_density_exact};
use dpcover::experiment::{DEFAULT_LEVEL, DEFAULT_TRIALS};
use dpcover::report::{Cell, Table};
use dpcover::script::{run_experiment_script, write_atomic, Experiment, GraphSource, Mode};
use dpcover::transversal::find_bfold_transversal;
use dpcover::{graph, Cover, DegeneracyOrdering, Error, Graph, Seed};

#[derive(Parser)]
#[command(name = "dpcover", version, about = "Random DP-cover experiments")]
struct Cli {
    /// Worker threads (defaults to all cores). Never changes any output.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    b: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a graph file.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Density and maximum density with a densest vertex set.
    Density {
        #[arg(long)]
        graph: PathBuf,
        /// Use exhaustive subset enumeration (at most 20 vertices).
        #[arg(long)]
        brute_force: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest-last ordering and back degrees.
    Degeneracy {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Emit a uniformly random cover file.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, visible_alias = "a")]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a cover has an independent transversal.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, default_value_t = 1)]
        b: usize,
        /// Print one `v:index` line per vertex when colorable.
        #[arg(long)]
        witness: bool,
    },
    /// Monte Carlo colorability estimate with the exact solver.
    Estimate {
        #[arg(long, visible_alias = "a")]
        k: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// One estimate per fold count with moment bounds.
    Sweep {
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Greedy procedure survival statistics per vertex.
    Gt {
        #[arg(long, visible_alias = "a")]
        k: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Expected counts, bounds and threshold values.
    Analyze {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, visible_alias = "a")]
        k: usize,
        #[arg(long, default_value_t = 1)]
        b: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run a TOML experiment script.
    Run { script: PathBuf },
}

#[derive(Subcommand)]
enum Family {
    Complete {
        #[arg(long)]
        q: usize,
    },
    Multipartite {
        #[arg(long)]
        parts: usize,
        #[arg(long)]
        size: usize,
    },
    /// Disjoint copies of K_q.
    Copies {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: usize,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Degenerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Path {
        #[arg(long)]
        n: usize,
    },
    Cycle {
        #[arg(long)]
        n: usize,
    },
}

fn load_graph(path: &Path) -> dpcover::Result<Graph> {
    GraphSource::File {
        path: path.to_path_buf(),
    }
    .load(Path::new(""))
}

fn emit(text: &str, out: Option<&Path>) -> dpcover::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_table(t: &Table, output: &Output) -> dpcover::Result<()> {
    let text = match output.format {
        Format::Csv => t.to_csv(),
        Format::Text => t.to_text(),
    };
    emit(&text, output.out.as_deref())
}

fn run_mode(mode: Mode, k: Option<usize>, range: Option<(usize, usize)>, s: &Sampling) -> dpcover::Result<()> {
    let exp = Experiment {
        mode,
        output: None,
        graph: GraphSource::File {
            path: s.graph.clone(),
        },
        k,
        k_min: range.map(|r| r.0),
        k_max: range.map(|r| r.1),
        b: s.b,
        trials: s.trials,
        seed: s.seed,
        level: s.level,
    };
    let g = exp.graph.load(Path::new(""))?;
    emit_table(&exp.run_on(&g)?, &s.output)
}

fn run(cli: Cli) -> dpcover::Result<()> {
    match cli.command {
        Command::Gen { family, out } => {
            let g = match family {
                Family::Complete { q } => graph::complete(q)?,
                Family::Multipartite { parts, size } => graph::complete_multipartite(parts, size)?,
                Family::Copies { t, q } => graph::disjoint_copies(t, &graph::complete(q)?)?,
                Family::Random { n, p, seed } => graph::uniform_random(n, p, Seed(seed))?,
                Family::Degenerate { n, d, seed } => graph::random_degenerate(n, d, Seed(seed))?,
                Family::Path { n } => graph::path(n)?,
                Family::Cycle { n } => graph::cycle(n)?,
            };
            emit(&g.to_text(), out.as_deref())
        }
        Command::Density {
            graph,
            brute_force,
            output,
        } => {
            let g = load_graph(&graph)?;
            let r = if brute_force {
                max_density_brute_force(&g)?
            } else {
                max_density_exact(&g)
            };
            let comment = dpcover::report::provenance("density", &g, &[]);
            let mut t = Table::new(comment, &["density", "max_density", "witness"]);
            let witness: Vec<String> = r.witness.iter().map(|v| v.to_string()).collect();
            t.push(vec![
                r.density.into(),
                r.max_density.into(),
                Cell::Text(witness.join(" ")),
            ]);
            emit_table(&t, &output)
        }
        Command::Degeneracy { graph, output } => {
            let g = load_graph(&graph)?;
            let o = DegeneracyOrdering::smallest_last(&g);
            let comment = dpcover::report::provenance(
                "degeneracy",
                &g,
                &[("d", o.degeneracy.to_string())],
            );
            let mut t = Table::new(comment, &["position", "vertex", "back_degree"]);
            for (pos, (&v, &bd)) in o.order.iter().zip(&o.back_degrees).enumerate() {
                t.push(vec![pos.into(), (v as usize).into(), bd.into()]);
            }
            emit_table(&t, &output)
        }
        Command::Sample { graph, k, seed, out } => {
            let g = load_graph(&graph)?;
            let c = dpcover::sample_cover(&g, k, Seed(seed))?;
            emit(&c.to_text(), out.as_deref())
        }
        Command::Check {
            graph,
            cover,
            b,
            witness,
        } => {
            let g = load_graph(&graph)?;
            let c = Cover::parse(&g, &fs::read_to_string(cover)?)?;
            let mut text = String::new();
            match find_bfold_transversal(&c, b)? {
                Some(t) => {
                    text.push_str("COLORABLE\n");
                    if witness {
                        for (v, set) in t.choice.iter().enumerate() {
                            let set: Vec<String> = set.iter().map(|i| i.to_string()).collect();
                            text.push_str(&format!("{v}:{}\n", set.join(",")));
                        }
                    }
                }
                None => text.push_str("NOT-COLORABLE\n"),
            }
            emit(&text, None)
        }
        Command::Estimate { k, sampling } => run_mode(Mode::Estimate, Some(k), None, &sampling),
        Command::Sweep {
            k_min,
            k_max,
            sampling,
        } => run_mode(Mode::Sweep, None, Some((k_min, k_max)), &sampling),
        Command::Gt { k, sampling } => run_mode(Mode::Gt, Some(k), None, &sampling),
        Command::Analyze {
            graph,
            k,
            b,
            output,
        } => {
            let g = load_graph(&graph)?;
            let comment = dpcover::report::provenance(
                "analyze",
                &g,
                &[("a", k.to_string()), ("b", b.to_string())],
            );
            emit_table(&dpcover::script::analyze_table(comment, &g, k, b)?, &output)
        }
        Command::Run { script } => run_experiment_script(&script).map(|_| ()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GuardExceeded { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
