//! Command-line front end: one subcommand per library operation, JSON
//! machine output on stdout (or `--out`), human summaries on stderr.
//!
//! Exit codes: 0 success/pass, 1 verification fail, 2 input error,
//! 3 budget or attempt exhaustion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use chainsparse::chain::{self, DEFAULT_NODE_BUDGET};
use chainsparse::code::{Code, WeightVector};
use chainsparse::contraction;
use chainsparse::density::{self, SearchMode};
use chainsparse::error::{Error, Result};
use chainsparse::generators::{self, LinearCodeSpec};
use chainsparse::rng::substream;
use chainsparse::sparsify::{self, Mode, SparsifyParams};
use chainsparse::verify;
use chainsparse::weighted;

#[derive(Parser)]
#[command(
    name = "chainsparse",
    version,
    about = "Chain-length-governed sparsification of set systems"
)]
struct Cli {
    /// Cap for the internal thread pool; CHAINSPARSE_THREADS is the fallback.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Theory,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliSearchMode {
    Exact,
    Heuristic,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate benchmark inputs.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Exact chain length with witness.
    Cl {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact non-redundancy with witness.
    Nrd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chain length via the union-closure formulation (oracle path).
    ClClosure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Code density Φ with witness subcode.
    Density {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: CliSearchMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Peeling decomposition at density threshold d.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        d: f64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: CliSearchMode,
        #[arg(long)]
        cl_bound: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized contraction: a single trace, a return-frequency table, or
    /// the survival-bound experiment when --target is given.
    Contract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        alpha: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Target word for the survival-bound experiment.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sparsify an unweighted code.
    Sparsify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "practical")]
        mode: CliMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cl_bound: Option<usize>,
        #[arg(long)]
        eta_constant: Option<f64>,
        #[arg(long)]
        denom_constant: Option<f64>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        attempt_cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sparsify a weighted code via the grouping reduction.
    SparsifyWeighted {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "practical")]
        mode: CliMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cl_bound: Option<usize>,
        #[arg(long)]
        eta_constant: Option<f64>,
        #[arg(long)]
        denom_constant: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dimension-free repeated sparsification.
    SparsifyDimfree {
        #[arg(long = "in")]
        input: PathBuf,
        /// Initial weights; all-ones when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "practical")]
        mode: CliMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pass-accuracy constant; defaults to 40 (theory) or 0.31
        /// (practical).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        cl_bound: Option<usize>,
        #[arg(long)]
        eta_constant: Option<f64>,
        #[arg(long)]
        denom_constant: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the sparsifier contract; exit 0 iff it passes.
    Verify {
        #[arg(long)]
        code: PathBuf,
        /// Original weights; all-ones when omitted.
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        wt: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Counting-bound audit; exit 0 iff every α passes.
    AuditCounting {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cl: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        alpha_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of the subsampling tail bound.
    McConcentration {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Cut code of a graph (edge-list file with an "n m" header).
    Cut {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Support code of a linear code given by a generator matrix JSON
    /// {"q": int, "rows": [[int, ...], ...]}.
    Linear {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel block code: block indicators plus the all-ones word.
    Blocks {
        /// Comma-separated block sizes, e.g. 250,250.
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random Bernoulli code.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random Erdős–Rényi graph, written in the edge-list format.
    Graph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn timestamp() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn read_code(path: &Path) -> Result<Code> {
    Code::from_json(&std::fs::read_to_string(path)?)
}

fn read_weights(path: &Path) -> Result<WeightVector> {
    WeightVector::from_json(&std::fs::read_to_string(path)?)
}

/// Print to stdout, ignoring a closed pipe (e.g. `chainsparse ... | head`).
fn print_stdout(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn emit(value: &Value, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => print_stdout(&text),
    }
    Ok(())
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|&i| i + 1).collect()
}

fn witness_json(w: &chain::ChainWitness) -> Value {
    json!({
        "coords": one_based(&w.coords),
        "words": w.words.iter().map(|x| x.to_bitstring()).collect::<Vec<_>>(),
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn write_code(code: &Code, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, code.to_json() + "\n")?,
        None => print_stdout(&code.to_json()),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_params(
    eps: f64,
    mode: CliMode,
    seed: u64,
    cl_bound: Option<usize>,
    eta_constant: Option<f64>,
    denom_constant: Option<f64>,
    max_depth: Option<usize>,
    attempt_cap: Option<usize>,
) -> SparsifyParams {
    let mut p = match mode {
        CliMode::Theory => SparsifyParams::theory(eps, seed),
        CliMode::Practical => SparsifyParams::practical(eps, seed),
    };
    p.cl_bound = cl_bound;
    if let Some(c) = eta_constant {
        p.eta_constant = c;
    }
    if let Some(c) = denom_constant {
        p.denom_constant = c;
    }
    if max_depth.is_some() {
        p.max_depth = max_depth;
    }
    if let Some(c) = attempt_cap {
        p.attempt_cap = c;
    }
    p
}

fn sparsify_mode(mode: CliMode) -> Mode {
    match mode {
        CliMode::Theory => Mode::Theory,
        CliMode::Practical => Mode::Practical,
    }
}

fn search_mode(mode: CliSearchMode) -> SearchMode {
    match mode {
        CliSearchMode::Exact => SearchMode::Exact,
        CliSearchMode::Heuristic => SearchMode::Heuristic,
    }
}

/// Returns the process exit code on the Ok path (verifier-style commands
/// exit 1 on a clean "fail" verdict).
fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Gen { what } => {
            match what {
                GenCmd::Cut { graph, out } => {
                    let g = generators::Graph::parse(&std::fs::read_to_string(&graph)?)?;
                    let code = generators::cut_code(&g)?;
                    eprintln!("gen cut: m = {}, |C| = {}", code.m(), code.word_count());
                    write_code(&code, &out)?;
                }
                GenCmd::Linear { spec, out } => {
                    let spec: LinearCodeSpec =
                        serde_json::from_str(&std::fs::read_to_string(&spec)?)?;
                    let code = generators::linear_support_code(&spec)?;
                    eprintln!(
                        "gen linear: q = {}, rank = {}, |C| = {}",
                        spec.q,
                        spec.rank()?,
                        code.word_count()
                    );
                    write_code(&code, &out)?;
                }
                GenCmd::Blocks { sizes, out } => {
                    let sizes: Vec<usize> = sizes
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse()
                                .map_err(|_| Error::InvalidInput(format!("bad block size {s:?}")))
                        })
                        .collect::<Result<_>>()?;
                    let code = generators::parallel_block_code(&sizes)?;
                    eprintln!("gen blocks: m = {}, |C| = {}", code.m(), code.word_count());
                    write_code(&code, &out)?;
                }
                GenCmd::Random {
                    m,
                    count,
                    density,
                    seed,
                    out,
                } => {
                    let mut rng = substream(seed, "gen-random-code");
                    let code = generators::random_code(m, count, density, &mut rng)?;
                    eprintln!("gen random: m = {m}, |C| = {}", code.word_count());
                    write_code(&code, &out)?;
                }
                GenCmd::Graph { n, p, seed, out } => {
                    let mut rng = substream(seed, "gen-random-graph");
                    let g = generators::random_graph(n, p, &mut rng)?;
                    eprintln!(
                        "gen graph: n = {n}, |E| = {}, connected = {}",
                        g.edges.len(),
                        g.is_connected()
                    );
                    match out {
                        Some(path) => std::fs::write(path, g.to_text())?,
                        None => print_stdout(g.to_text().trim_end()),
                    }
                }
            }
            Ok(0)
        }
        Cmd::Cl { input, budget, out } => {
            let code = read_code(&input)?;
            let (value, witness) = chain::chain_length_exact(&code, budget)?;
            eprintln!("cl: {value} (m = {}, |C| = {})", code.m(), code.word_count());
            emit(
                &json!({
                    "timestamp": timestamp(),
                    "value": value,
                    "witness": witness_json(&witness),
                    "budget": budget,
                }),
                &out,
            )?;
            Ok(0)
        }
        Cmd::Nrd { input, budget, out } => {
            let code = read_code(&input)?;
            let (value, witness) = chain::nrd_exact(&code, budget)?;
            eprintln!("nrd: {value}");
            emit(
                &json!({
                    "timestamp": timestamp(),
                    "value": value,
                    "witness": {
                        "set": one_based(&witness.set),
                        "words": witness.witnesses.iter().map(|x| x.to_bitstring()).collect::<Vec<_>>(),
                    },
                    "budget": budget,
                }),
                &out,
            )?;
            Ok(0)
        }
        Cmd::ClClosure { input, out } => {
            let code = read_code(&input)?;
            let value = chain::union_closure_chain_length(&code)?;
            eprintln!("cl-closure: {value}");
            emit(&json!({ "timestamp": timestamp(), "value": value }), &out)?;
            Ok(0)
        }
        Cmd::Density { input, mode, out } => {
            let code = read_code(&input)?;
            let r = density::density(&code, search_mode(mode))?;
            eprintln!("density: phi {} {}", if r.exact { "=" } else { "<=" }, r.phi);
            emit(
                &json!({
                    "timestamp": timestamp(),
                    "phi": r.phi,
                    "exact": r.exact,
                    "witness_words": r.witness.map(|w| w.words().iter().map(|x| x.to_bitstring()).collect::<Vec<_>>()),
                }),
                &out,
            )?;
            Ok(0)
        }
        Cmd::Decompose {
            input,
            d,
            mode,
            cl_bound,
            budget,
            out,
        } => {
            let code = read_code(&input)?;
            let r = density::decompose(&code, d, search_mode(mode), cl_bound, budget)?;
            eprintln!(
                "decompose: |T| = {} over {} rounds, counting bound {}",
                r.peeled.len(),
                r.rounds.len(),
                if r.counting.pass { "holds" } else { "fails" }
            );
            emit(
                &json!({
                    "timestamp": timestamp(),
                    "d": r.d,
                    "cl_value": r.cl_value,
                    "peeled": one_based(&r.peeled),
                    "rounds": r.rounds.iter().map(|round| json!({
                        "support": one_based(&round.support),
                        "support_size": round.support_size,
                        "cl_certified": round.cl_certified,
                        "cl_exact": round.cl_exact,
                    })).collect::<Vec<_>>(),
                    "peel_code": serde_json::from_str::<Value>(&r.peel_code.to_json())?,
                    "remaining_code": serde_json::from_str::<Value>(&r.remaining_code.to_json())?,
                    "size_ok": r.size_ok,
                    "phi_authoritative": r.phi_authoritative,
                    "counting": to_value(&r.counting)?,
                }),
                &out,
            )?;
            Ok(0)
        }
        Cmd::Contract {
            input,
            alpha,
            seed,
            trials,
            target,
            budget,
            out,
        } => {
            let code = read_code(&input)?;
            if let Some(target) = target {
                let word = chainsparse::BitWord::from_bitstring(&target)?;
                let r = contraction::survival_probability_experiment(
                    &code, &word, alpha, trials, budget, seed,
                )?;
                let pass = r.empirical >= r.lower_bound - 3.0 * r.sigma;
                eprintln!(
                    "contract survival: empirical {:.5} vs bound {:.5} ({})",
                    r.empirical,
                    r.lower_bound,
                    if pass { "pass" } else { "FAIL" }
                );
                let mut v = to_value(&r)?;
                v["timestamp"] = json!(timestamp());
                v["seed"] = json!(seed);
                v["pass"] = json!(pass);
                emit(&v, &out)?;
                return Ok(u8::from(!pass));
            }
            if trials == 1 {
                let mut rng = substream(seed, "contract-trial/0");
                let trace = contraction::contract(&code, alpha, budget, &mut rng)?;
                eprintln!(
                    "contract: {} steps, returned {}",
                    trace.picked.len(),
                    trace
                        .returned
                        .as_ref()
                        .map(|w| w.to_bitstring())
                        .unwrap_or_else(|| "none".into())
                );
                emit(
                    &json!({
                        "timestamp": timestamp(),
                        "seed": seed,
                        "alpha": trace.alpha,
                        "picked": one_based(&trace.picked),
                        "sizes": trace.sizes,
                        "returned": trace.returned.map(|w| w.to_bitstring()),
                    }),
                    &out,
                )?;
            } else {
                let mut counts: std::collections::BTreeMap<String, u64> = Default::default();
                for t in 0..trials {
                    let mut rng = substream(seed, &format!("contract-trial/{t}"));
                    let trace = contraction::contract(&code, alpha, budget, &mut rng)?;
                    let key = trace
                        .returned
                        .map(|w| w.to_bitstring())
                        .unwrap_or_else(|| "none".into());
                    *counts.entry(key).or_default() += 1;
                }
                eprintln!("contract: {trials} trials, {} distinct outcomes", counts.len());
                emit(
                    &json!({
                        "timestamp": timestamp(),
                        "seed": seed,
                        "alpha": alpha,
                        "trials": trials,
                        "counts": counts,
                    }),
                    &out,
                )?;
            }
            Ok(0)
        }
        Cmd::Sparsify {
            input,
            eps,
            mode,
            seed,
            cl_bound,
            eta_constant,
            denom_constant,
            max_depth,
            attempt_cap,
            out,
            report,
        } => {
            let code = read_code(&input)?;
            let params = build_params(
                eps,
                mode,
                seed,
                cl_bound,
                eta_constant,
                denom_constant,
                max_depth,
                attempt_cap,
            );
            let (w, rep) = sparsify::sparsify_unweighted(&code, &params)?;
            eprintln!(
                "sparsify: support {} of {}, max deviation {:.5}",
                rep.support_size,
                code.m(),
                rep.max_relative_error
            );
            match &out {
                Some(p) => std::fs::write(p, w.to_json() + "\n")?,
                None => print_stdout(&w.to_json()),
            }
            if let Some(path) = report {
                let mut v = to_value(&rep)?;
                v["timestamp"] = json!(timestamp());
                emit(&v, &Some(path))?;
            }
            Ok(0)
        }
        Cmd::SparsifyWeighted {
            input,
            weights,
            eps,
            mode,
            seed,
            cl_bound,
            eta_constant,
            denom_constant,
            out,
            report,
        } => {
            let code = read_code(&input)?;
            let w = read_weights(&weights)?;
            let params =
                build_params(eps, mode, seed, cl_bound, eta_constant, denom_constant, None, None);
            let (tilde, rep) = weighted::sparsify_weighted(&code, &w, eps, &params)?;
            eprintln!(
                "sparsify-weighted: support {} of {}, max deviation {:.5}",
                rep.support_size,
                w.support_size(),
                rep.verification.max_relative_error
            );
            match &out {
                Some(p) => std::fs::write(p, tilde.to_json() + "\n")?,
                None => print_stdout(&tilde.to_json()),
            }
            if let Some(path) = report {
                let mut v = to_value(&rep)?;
                v["timestamp"] = json!(timestamp());
                v["seed"] = json!(seed);
                emit(&v, &Some(path))?;
            }
            Ok(0)
        }
        Cmd::SparsifyDimfree {
            input,
            weights,
            eps,
            mode,
            seed,
            q,
            cl_bound,
            eta_constant,
            denom_constant,
            out,
            report,
        } => {
            let code = read_code(&input)?;
            let w = match weights {
                Some(p) => read_weights(&p)?,
                None => WeightVector::uniform(code.m(), 1.0),
            };
            let params =
                build_params(eps, mode, seed, cl_bound, eta_constant, denom_constant, None, None);
            let q = q.unwrap_or_else(|| weighted::default_q(sparsify_mode(mode)));
            let (tilde, rep) = weighted::sparsify_dimension_free(&code, &w, eps, &params, q)?;
            eprintln!(
                "sparsify-dimfree: {} passes, support {} -> {}, composed eps <= {:.4}",
                rep.passes.len(),
                w.support_size(),
                rep.support_size,
                rep.composed_epsilon
            );
            match &out {
                Some(p) => std::fs::write(p, tilde.to_json() + "\n")?,
                None => print_stdout(&tilde.to_json()),
            }
            if let Some(path) = report {
                let mut v = to_value(&rep)?;
                v["timestamp"] = json!(timestamp());
                v["seed"] = json!(seed);
                emit(&v, &Some(path))?;
            }
            Ok(0)
        }
        Cmd::Verify {
            code,
            w,
            wt,
            eps,
            report,
        } => {
            let code = read_code(&code)?;
            let w = match w {
                Some(p) => read_weights(&p)?,
                None => WeightVector::uniform(code.m(), 1.0),
            };
            let wt = read_weights(&wt)?;
            let r = verify::verify_sparsifier(&code, &w, &wt, eps)?;
            eprintln!(
                "verify: {} (max deviation {:.6} over {} words)",
                if r.pass { "pass" } else { "FAIL" },
                r.max_relative_error,
                r.words_checked
            );
            let pass = r.pass;
            let mut v = to_value(&r)?;
            v["timestamp"] = json!(timestamp());
            emit(&v, &report)?;
            Ok(u8::from(!pass))
        }
        Cmd::AuditCounting {
            input,
            cl,
            d,
            alpha_max,
            out,
        } => {
            let code = read_code(&input)?;
            let audit = verify::counting_bound_audit(&code, cl, d, alpha_max);
            eprintln!("audit-counting: {}", if audit.pass { "pass" } else { "FAIL" });
            let pass = audit.pass;
            let mut v = to_value(&audit)?;
            v["timestamp"] = json!(timestamp());
            emit(&v, &out)?;
            Ok(u8::from(!pass))
        }
        Cmd::McConcentration {
            ell,
            p,
            eps,
            trials,
            seed,
            out,
        } => {
            let r = verify::concentration_monte_carlo(ell, p, eps, trials, seed)?;
            let pass = r.empirical_rate <= r.bound + 3.0 * r.sigma;
            eprintln!(
                "mc-concentration: empirical {:.6} vs bound {:.6} ({})",
                r.empirical_rate,
                r.bound,
                if pass { "pass" } else { "FAIL" }
            );
            let mut v = to_value(&r)?;
            v["timestamp"] = json!(timestamp());
            v["seed"] = json!(seed);
            v["pass"] = json!(pass);
            emit(&v, &out)?;
            Ok(u8::from(!pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("CHAINSPARSE_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let _ = emit(&json!({ "timestamp": timestamp(), "error": e.to_string() }), &None);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
