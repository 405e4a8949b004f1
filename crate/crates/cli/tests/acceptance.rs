//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use dpcover::analysis::{
    chebyshev_non_color_bound, markov_color_bound, pair_case_probability, rational_to_f64,
    MomentParams, PairCase,
};
use dpcover::cover::enumerate_covers;
use dpcover::density::{max_density_brute_force, max_density_exact};
use dpcover::graph::{complete, complete_multipartite, cycle, disjoint_copies, path, random_degenerate, uniform_random};
use dpcover::greedy::survival_stats;
use dpcover::report::Table;
use dpcover::stats::Method;
use dpcover::transversal::{count_bfold_transversals, count_transversals, exact_colorability_probability};
use dpcover::{estimate_probability, sweep_k, Cover, DegeneracyOrdering, Graph, Seed};

type Outcome = Result<String, String>;
type Criterion<'a> = (usize, &'static str, u64, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn int(a: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

/// Independent transversal count by trying all `k^n` choices.
fn brute_count(c: &Cover<'_>) -> u64 {
    let g = c.graph();
    let n = g.vertex_count();
    let k = c.k() as u64;
    (0..k.pow(n as u32))
        .filter(|&code| {
            let choice: Vec<u32> = (0..n).map(|v| (code / k.pow(v as u32) % k) as u32).collect();
            g.edges()
                .iter()
                .enumerate()
                .all(|(j, &(u, v))| c.perm(j)[choice[u as usize] as usize] != choice[v as usize])
        })
        .count() as u64
}

fn permutations(k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut x = p.clone();
            x.insert(pos, (k - 1) as u32);
            out.push(x);
        }
    }
    out
}

/// Every labelled graph on `n` vertices.
fn all_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
        .collect();
    (0..1u32 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Graph::new(n, edges).unwrap()
        })
        .collect()
}

struct Cli {
    dir: PathBuf,
}

impl Cli {
    fn new() -> Self {
        let dir = std::env::temp_dir().join(format!("dpcover-acceptance-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Cli { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn command(&self, threads: usize, args: &[&str]) -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_dpcover"));
        cmd.arg("--threads").arg(threads.to_string()).args(args);
        cmd
    }

    fn run(&self, threads: usize, args: &[&str]) -> Result<Vec<u8>, String> {
        let out = self
            .command(threads, args)
            .output()
            .map_err(|e| format!("spawn failed: {e}"))?;
        if !out.status.success() {
            return Err(format!(
                "dpcover {} exited with {}: {}",
                args.join(" "),
                out.status,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out.stdout)
    }

    fn graph(&self, name: &str, family: &[&str]) -> String {
        let p = self.path(name);
        let mut args = vec!["gen"];
        args.extend_from_slice(family);
        args.extend(["--out", p.to_str().unwrap()]);
        self.run(1, &args).unwrap();
        p.to_str().unwrap().to_string()
    }
}

impl Drop for Cli {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

fn c1_triangle_oracle() -> Outcome {
    let g = complete(3).unwrap();
    let exact = exact_colorability_probability(&g, 2, 1).map_err(|e| e.to_string())?;
    ensure(exact == q(1, 2), || format!("exact probability {exact}"))?;
    let covers: Vec<u64> = enumerate_covers(&g, 2).unwrap().map(|c| brute_count(&c)).collect();
    let colorable = covers.iter().filter(|&&x| x > 0).count();
    ensure(covers.len() == 8 && colorable == 4, || format!("{colorable} of {} covers", covers.len()))?;
    let e = estimate_probability(&g, 2, 1, 10_000, Seed(42), 0.999).map_err(|e| e.to_string())?;
    ensure(e.ci_low <= 0.5 && 0.5 <= e.ci_high, || format!("{e:?}"))?;
    Ok(format!("exact 1/2, estimate {} in [{:.4}, {:.4}]", e.point, e.ci_low, e.ci_high))
}

fn c2_first_moment() -> Outcome {
    let mut checked = 0;
    for g in [complete(2).unwrap(), path(3).unwrap(), complete(3).unwrap(), cycle(4).unwrap()] {
        for k in [2usize, 3] {
            let (n, m) = (g.vertex_count(), g.edge_count());
            let formula = num_traits::pow(int(k), n) * num_traits::pow(q(k as i64 - 1, k as i64), m);
            let mut total = 0u64;
            let mut covers = 0u64;
            for c in enumerate_covers(&g, k).unwrap() {
                let x = count_transversals(&c).unwrap();
                ensure(x == brute_count(&c), || format!("count mismatch on {g:?}"))?;
                total += x;
                covers += 1;
            }
            let avg = q(total as i64, covers as i64);
            ensure(avg == formula, || format!("n={n} m={m} k={k}: {avg} vs {formula}"))?;
            checked += 1;
        }
    }
    let edge = complete(2).unwrap();
    let mut total = 0u64;
    let mut covers = 0u64;
    for c in enumerate_covers(&edge, 4).unwrap() {
        total += count_bfold_transversals(&c, 2).unwrap();
        covers += 1;
    }
    ensure(q(total as i64, covers as i64) == int(6), || format!("b-fold average {total}/{covers}"))?;
    Ok(format!("{checked} (graph, k) pairs and the 2-fold edge case exact"))
}

fn c3_pair_events() -> Outcome {
    for k in 2..=6usize {
        let perms = permutations(k);
        let total = perms.len() as i64;
        let freq = |pred: &dyn Fn(&Vec<u32>) -> bool| q(perms.iter().filter(|p| pred(p)).count() as i64, total);
        let ki = k as i64;
        let p = q(ki - 1, ki);
        let cases = [
            (PairCase::A, freq(&|p| p[0] != 1), q(ki - 1, ki)),
            (PairCase::B, freq(&|p| p[0] != 0 && p[0] != 1), q(ki - 2, ki)),
            (PairCase::C, freq(&|p| p[0] != 0 && p[1] != 1), &p * &p + q(1, ki * ki * (ki - 1))),
        ];
        for (case, brute, formula) in cases {
            let lib = pair_case_probability(case, k).map_err(|e| e.to_string())?;
            ensure(brute == formula && lib == formula, || {
                format!("k={k} {case:?}: brute {brute}, formula {formula}, library {lib}")
            })?;
        }
    }
    Ok("k = 2..6, three cases".into())
}

fn c4_bound_conformance() -> Outcome {
    let mut instances = 0;
    for n in 1..=4 {
        for g in all_graphs(n) {
            for k in 1..=3usize {
                for b in 1..=k {
                    let exact = exact_colorability_probability(&g, k, b).map_err(|e| e.to_string())?;
                    let p = MomentParams::for_graph(&g, k, b).map_err(|e| e.to_string())?;
                    let markov = markov_color_bound(&p);
                    let exact_markov = markov.exact.clone().ok_or("markov bound without exact value")?;
                    ensure(exact <= exact_markov, || format!("{g:?} k={k} b={b}: {exact} > {exact_markov}"))?;
                    if b == 1 && k >= 2 {
                        let not = BigRational::one() - &exact;
                        match chebyshev_non_color_bound(&p) {
                            Ok(cheb) => ensure(rational_to_f64(&not) <= cheb.value, || {
                                format!("{g:?} k={k}: P(not) {not} > {}", cheb.value)
                            })?,
                            // Only undefined when no transversal is expected at all.
                            Err(_) => ensure(exact.is_zero(), || format!("{g:?} k={k}: no Chebyshev bound"))?,
                        }
                    }
                    instances += 1;
                }
            }
        }
    }
    Ok(format!("{instances} (graph, k, b) instances"))
}

fn c5_survival() -> Outcome {
    let g = random_degenerate(200, 5, Seed(5)).unwrap();
    let stats = survival_stats(&g, 40, 1, 2000, Seed(5)).map_err(|e| e.to_string())?;
    let means = 200 * 40;
    let joints = 200 * stats.subsets.len();
    let dev = stats.survival_deviations(4.0);
    let exc = stats.correlation_excesses(4.0);
    // Two-sided normal tail beyond 4 standard errors.
    let chance = means as f64 * 6.334e-5;
    let detail = format!(
        "{} of {means} means and {} of {joints} joint frequencies beyond 4 stderr \
         ({chance:.2} means expected by chance)",
        dev.len(),
        exc.len()
    );
    if dev.is_empty() && exc.is_empty() {
        Ok(detail)
    } else {
        let first = dev
            .first()
            .map(|d| format!("{d:?}"))
            .or_else(|| exc.first().map(|e| format!("{e:?}")))
            .unwrap();
        Err(format!("{detail}; first {first}"))
    }
}

fn c6_sandwich() -> Outcome {
    let g = complete(8).unwrap();
    let rows = sweep_k(&g, 1, 10, 1, 2000, Seed(6), 0.95).map_err(|e| e.to_string())?;
    for r in &rows {
        ensure(r.sandwich_violations == 0, || format!("k={}: {} violations", r.k, r.sandwich_violations))?;
        if r.k > 7 {
            ensure(
                r.estimate.method == Method::Certified && r.estimate.point == 1.0 && r.gt.is_none(),
                || format!("k={} not certified: {:?}", r.k, r.estimate),
            )?;
        } else {
            ensure(r.estimate.method == Method::ExactSolver, || format!("k={} certified", r.k))?;
            let gt = r.gt.as_ref().ok_or("sampled row without greedy rate")?;
            ensure(gt.successes <= r.estimate.successes, || format!("k={}", r.k))?;
        }
    }
    Ok("k = 1..10, no violations, k = 8..10 certified".into())
}

fn c7_sparse() -> Outcome {
    let g = disjoint_copies(6, &complete(3).unwrap()).unwrap();
    let e = estimate_probability(&g, 2, 1, 10_000, Seed(7), 0.95).map_err(|e| e.to_string())?;
    let bound = (-6.0f64 / 8.0).exp();
    ensure(e.point <= bound + e.half_width(), || format!("{} > {bound}", e.point))?;
    Ok(format!("estimate {} <= {bound:.4}", e.point))
}

const K60_DEADLINE: Duration = Duration::from_secs(600);

fn c8_threshold(cli: &Cli) -> Outcome {
    let graph = cli.graph("k60.txt", &["complete", "--q", "60"]);
    let out = cli.path("k60-sweep.csv");
    let log = cli.path("k60-sweep.log");
    let mut child = cli
        .command(
            1,
            &["sweep", "--graph", &graph, "--k-min", "4", "--k-max", "20", "--trials", "500", "--seed", "8"],
        )
        .env("RUST_LOG", "info")
        .stdout(fs::File::create(&out).unwrap())
        .stderr(fs::File::create(&log).unwrap())
        .stdin(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let status = loop {
        if let Some(s) = child.try_wait().map_err(|e| e.to_string())? {
            break s;
        }
        if start.elapsed() > K60_DEADLINE {
            let _ = child.kill();
            let _ = child.wait();
            let progress = fs::read_to_string(&log).unwrap_or_default();
            let last = progress.lines().last().unwrap_or("no progress logged").to_string();
            return Err(format!("sweep unfinished after {}s; last progress: {last}", K60_DEADLINE.as_secs()));
        }
        std::thread::sleep(Duration::from_millis(500));
    };
    ensure(status.success(), || format!("sweep exited with {status}"))?;
    let table = Table::parse_csv(&fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())?;
    let real = |row: usize, col: &str| table.get(row, col).and_then(|c| c.as_real()).unwrap();
    let rows: Vec<(usize, f64, f64)> = (0..table.rows.len())
        .map(|i| {
            let k = table.get(i, "k").and_then(|c| c.as_int()).unwrap() as usize;
            let hw = (real(i, "ci_high") - real(i, "ci_low")) / 2.0;
            (k, real(i, "estimate"), hw)
        })
        .collect();
    let at = |k: usize| rows.iter().find(|r| r.0 == k).map(|r| r.1).unwrap();
    ensure(at(5) <= 0.2, || format!("estimate at k=5 is {}", at(5)))?;
    ensure(at(18) >= 0.8, || format!("estimate at k=18 is {}", at(18)))?;
    let below = rows.iter().filter(|r| r.1 < 0.5).map(|r| r.0).max();
    let above = rows.iter().filter(|r| r.1 >= 0.5).map(|r| r.0).min();
    ensure(
        below.is_some_and(|k| k >= 5) && above.is_some_and(|k| k <= 18),
        || format!("crossing window {below:?}..{above:?}"),
    )?;
    for (i, r) in rows.iter().enumerate() {
        for s in &rows[i + 1..] {
            ensure(s.1 >= r.1 - r.2 - s.2, || format!("estimate drops from k={} to k={}", r.0, s.0))?;
        }
    }
    Ok(format!("crossing window {below:?}..{above:?}"))
}

fn c9_invariants() -> Outcome {
    for i in 0..50u64 {
        let n = 1 + (i as usize % 14);
        let p = 0.1 + 0.8 * (i as f64 / 49.0);
        let g = uniform_random(n, p, Seed(900 + i)).unwrap();
        let fast = max_density_exact(&g).max_density;
        let slow = max_density_brute_force(&g).map_err(|e| e.to_string())?.max_density;
        ensure(fast == slow, || format!("graph {i}: {fast} vs {slow}"))?;
    }
    for n in 1..=30usize {
        let kn = complete(n).unwrap();
        ensure(max_density_exact(&kn).max_density == q(n as i64 - 1, 2), || format!("rho(K_{n})"))?;
        ensure(DegeneracyOrdering::smallest_last(&kn).degeneracy == n - 1, || format!("d(K_{n})"))?;
        for m in 1..=5usize {
            let g = if m == 1 {
                Graph::new(n, Vec::new()).unwrap()
            } else {
                complete_multipartite(m, n).unwrap()
            };
            let want = q(((m - 1) * n) as i64, 2);
            ensure(max_density_exact(&g).max_density == want, || format!("rho(K_{{{m}x{n}}})"))?;
        }
    }
    Ok("50 random graphs, complete and multipartite families".into())
}

/// Every CLI configuration used above, run with one and with three worker
/// threads. The full K60 sweep is replaced by its fast ends.
fn c10_reproducibility(cli: &Cli) -> Outcome {
    let k3 = cli.graph("k3.txt", &["complete", "--q", "3"]);
    let k8 = cli.graph("k8.txt", &["complete", "--q", "8"]);
    let k60 = cli.graph("k60.txt", &["complete", "--q", "60"]);
    let copies = cli.graph("copies.txt", &["copies", "--t", "6", "--q", "3"]);
    let deg = cli.graph("deg.txt", &["degenerate", "--n", "200", "--d", "5", "--seed", "5"]);
    let rnd = cli.graph("rnd.txt", &["random", "--n", "14", "--p", "0.5", "--seed", "9"]);
    let runs: Vec<Vec<&str>> = vec![
        vec!["estimate", "--graph", &k3, "--k", "2", "--trials", "10000", "--seed", "42", "--level", "0.999"],
        vec!["analyze", "--graph", &k3, "--k", "2"],
        vec!["gt", "--graph", &deg, "--k", "40", "--trials", "2000", "--seed", "5"],
        vec!["sweep", "--graph", &k8, "--k-min", "1", "--k-max", "10", "--trials", "2000", "--seed", "6"],
        vec!["estimate", "--graph", &copies, "--k", "2", "--trials", "10000", "--seed", "7"],
        vec!["sweep", "--graph", &k60, "--k-min", "4", "--k-max", "6", "--trials", "500", "--seed", "8"],
        vec!["sweep", "--graph", &k60, "--k-min", "16", "--k-max", "20", "--trials", "500", "--seed", "8"],
        vec!["density", "--graph", &rnd],
        vec!["degeneracy", "--graph", &deg],
        vec!["sample", "--graph", &k8, "--k", "5", "--seed", "3"],
    ];
    for args in &runs {
        let one = cli.run(1, args)?;
        let three = cli.run(3, args)?;
        ensure(one == three, || format!("output differs across thread counts: {}", args.join(" ")))?;
        ensure(!one.is_empty(), || format!("empty output: {}", args.join(" ")))?;
    }
    // The CLI reports what the library computes.
    let table = Table::parse_csv(&String::from_utf8(cli.run(1, &runs[0])?).unwrap()).map_err(|e| e.to_string())?;
    let lib = estimate_probability(&complete(3).unwrap(), 2, 1, 10_000, Seed(42), 0.999).unwrap();
    let cli_successes = table.get(0, "successes").and_then(|c| c.as_int()).unwrap();
    ensure(cli_successes == lib.successes as i128, || "CLI and library disagree".into())?;
    Ok(format!("{} invocations byte-identical with 1 and 3 threads", runs.len()))
}

fn main() {
    let cli = Cli::new();
    let criteria: Vec<Criterion<'_>> = vec![
        (1, "exact probability oracle", 5, Box::new(c1_triangle_oracle)),
        (2, "first-moment identities", 30, Box::new(c2_first_moment)),
        (3, "pair-event probabilities", 1, Box::new(c3_pair_events)),
        (4, "bound conformance", 120, Box::new(c4_bound_conformance)),
        (5, "greedy survival statistics", 120, Box::new(c5_survival)),
        (6, "sandwich and certification", 120, Box::new(c6_sandwich)),
        (7, "sparse construction", 60, Box::new(c7_sparse)),
        (8, "threshold phenomenology on K60", 600, Box::new(|| c8_threshold(&cli))),
        (9, "graph invariants", 60, Box::new(c9_invariants)),
        (10, "reproducibility across thread counts", 900, Box::new(|| c10_reproducibility(&cli))),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, limit, f) in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(detail) if secs > *limit as f64 => Err(format!("{detail}; over the {limit}s limit")),
            other => other,
        };
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} {verdict} [{secs:.1}s / {limit}s] {name}: {detail}");
        if outcome.is_err() {
            failed.push(*id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
