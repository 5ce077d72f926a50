//! `hwy1`: command-line access to every stage of the highway-dimension-1
//! toolkit. Exit codes: 0 success, 1 infeasible or negative answer, 2 usage
//! or input error, 3 internal invariant violation.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hwy1::dp::{
    steiner_exact_td_with, tsp_exact_td_with, DpOptions, SteinerSolution, TourSolution,
    DEFAULT_MAX_BAG,
};
use hwy1::fptas::{fptas_steiner_with, fptas_tsp_with, FptasReport};
use hwy1::graph::{all_pairs_with, metric_preprocess_with};
use hwy1::oracles::{
    build_corpus, corpus_params, dreyfus_wagner_steiner, exact_highway_dimension,
    held_karp_tsp, oracle_cap, DREYFUS_WAGNER_CAP, HELD_KARP_CAP,
};
use hwy1::par::Execution;
use hwy1::reductions::{decide_stp, decide_tsp, gen_stp, gen_tsp, parse_dimacs, CnfFormula, Decision};
use hwy1::spcover::{spc1_for_scale, verify_hd1_with, Hd1Verdict, ScaleOutcome};
use hwy1::structure::{build_hierarchy_with, compute_net_with};
use hwy1::treedecomp::{
    certified_decomposition, make_nice, min_degree_decomposition, validate_decomposition,
    TreeDecomposition,
};
use hwy1::{Error, Graph, ScaleValue};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hwy1", version, about = "TSP and Steiner Tree on graphs of highway dimension 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write the main artifact to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Approximation parameter as a positive rational `p/q`.
    #[arg(long, global = true, default_value = "1/10")]
    eps: String,
    /// Write the approximation-scheme report (JSON) to this file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Results never depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest bag the exact solvers accept.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BAG)]
    max_bag: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Certify highway dimension 1 or print a witness scale.
    VerifyHd1 { input: PathBuf },
    /// Hubs of a shortest path cover at one scale.
    Spc {
        input: PathBuf,
        #[arg(long)]
        scale: String,
    },
    /// Level components, hubs and interface points.
    Hierarchy { input: PathBuf },
    /// Component-representative net at a radius.
    Net {
        input: PathBuf,
        #[arg(long)]
        radius: String,
    },
    /// Tree decomposition from the level hierarchy.
    Treedecomp {
        input: PathBuf,
        /// Use greedy min-degree elimination (no certificate needed).
        #[arg(long)]
        min_degree: bool,
    },
    /// Exact TSP by dynamic programming over a tree decomposition.
    SolveTsp {
        input: PathBuf,
        #[arg(long)]
        min_degree: bool,
    },
    /// Exact Steiner tree by dynamic programming over a tree decomposition.
    SolveSteiner {
        input: PathBuf,
        #[arg(long)]
        min_degree: bool,
        /// Comma-separated terminals; defaults to the `t` records.
        #[arg(long, value_delimiter = ',')]
        terminals: Option<Vec<usize>>,
    },
    /// (1+eps)-approximate TSP.
    FptasTsp { input: PathBuf },
    /// (1+eps)-approximate Steiner tree.
    FptasSteiner {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        terminals: Option<Vec<usize>>,
    },
    /// SAT to Steiner Tree gadget graph from a DIMACS file.
    GenStp {
        input: PathBuf,
        /// Sidecar JSON path; defaults to `<out>.json` when `--out` is set.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// (<=3,3)-SAT to TSP gadget graph from a DIMACS file.
    GenTsp {
        input: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Decide a formula through its Steiner Tree instance.
    DecideStp { input: PathBuf },
    /// Decide a (<=3,3) formula through its TSP instance.
    DecideTsp { input: PathBuf },
    /// Held-Karp optimum.
    OracleTsp { input: PathBuf },
    /// Dreyfus-Wagner optimum.
    OracleSteiner {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        terminals: Option<Vec<usize>>,
    },
    /// Exact highway dimension by branch and bound.
    OracleHd {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        h_max: usize,
    },
    /// Seeded corpus of certified instances plus a manifest.
    GenCorpus {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 40)]
        max_vertices: usize,
        /// Output directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) => 3,
            Error::Infeasible(_)
            | Error::Disconnected
            | Error::NotCertified(_)
            | Error::RetriesExhausted(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            msg: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

struct Ctx {
    common: Common,
    exec: Execution,
}

impl Ctx {
    fn opts(&self) -> DpOptions {
        DpOptions {
            max_bag: self.common.max_bag,
            exec: self.exec,
        }
    }

    fn eps(&self) -> Result<ScaleValue, Failure> {
        self.common.eps.parse().map_err(Failure::from)
    }

    /// Prints `value` as JSON or `text`, to `--out` when given.
    fn emit(&self, value: &Value, text: &str) -> Result<(), Failure> {
        let body = if self.common.json {
            let mut s = serde_json::to_string_pretty(value).expect("json");
            s.push('\n');
            s
        } else {
            text.to_string()
        };
        match &self.common.out {
            Some(p) => fs::write(p, body)?,
            None => io::stdout().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure {
            code: 2,
            msg: format!("{}: {e}", path.display()),
        })
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(Graph::parse(&read_text(path)?)?)
}

fn read_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    Ok(parse_dimacs(&read_text(path)?)?)
}

/// A length given in input units, rescaled to the graph's integer weights.
fn internal_scale(g: &Graph, text: &str) -> Result<ScaleValue, Failure> {
    let r: ScaleValue = text.parse()?;
    Ok(ScaleValue::from_ratio(r.ratio() * g.unit().clone()))
}

fn terminals_of(g: &Graph, flag: &Option<Vec<usize>>) -> Vec<usize> {
    let mut t = flag.clone().unwrap_or_else(|| g.terminals().to_vec());
    t.sort_unstable();
    t.dedup();
    t
}

fn decomposition(g: &Graph, min_degree: bool, exec: Execution) -> Result<(Graph, TreeDecomposition), Failure> {
    if min_degree {
        Ok((g.clone(), min_degree_decomposition(g)))
    } else {
        Ok(certified_decomposition(g, exec)?)
    }
}

fn tour_text(g: &Graph, t: &TourSolution) -> String {
    let walk: Vec<String> = t.walk.iter().map(|v| v.to_string()).collect();
    format!("cost {}\ntour {}\n", g.format_length(&t.cost), walk.join(" "))
}

fn tree_text(g: &Graph, s: &SteinerSolution) -> String {
    let mut out = format!("cost {}\n", g.format_length(&s.cost));
    for (u, v) in &s.edges {
        out.push_str(&format!("edge {u} {v}\n"));
    }
    out
}

fn write_trace(ctx: &Ctx, rep: &FptasReport) -> Result<(), Failure> {
    if let Some(p) = &ctx.common.trace {
        let mut s = serde_json::to_string_pretty(&rep.to_json()).expect("json");
        s.push('\n');
        fs::write(p, s)?;
    }
    Ok(())
}

fn decision_output(ctx: &Ctx, d: &Decision, solver: &str) -> CmdResult {
    let mut v = serde_json::to_value(d).expect("json");
    v["solver"] = json!(solver);
    let mut text = format!(
        "{} (optimum {}, threshold {}, {solver})\n",
        if d.satisfiable { "SAT" } else { "UNSAT" },
        d.cost,
        d.threshold
    );
    if let Some(a) = &d.assignment {
        let lits: Vec<String> = a
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { format!("{}", i + 1) } else { format!("-{}", i + 1) })
            .collect();
        text.push_str(&format!("v {} 0\n", lits.join(" ")));
    }
    ctx.emit(&v, &text)?;
    Ok(if d.satisfiable { 0 } else { 1 })
}

fn write_reduction(ctx: &Ctx, g: &Graph, sidecar: Value, path: &Option<PathBuf>) -> CmdResult {
    let side = path
        .clone()
        .or_else(|| ctx.common.out.as_ref().map(|o| o.with_extension("json")));
    let mut body = serde_json::to_string_pretty(&sidecar).expect("json");
    body.push('\n');
    match &side {
        Some(p) => fs::write(p, &body)?,
        None if ctx.common.json => {}
        None => eprint!("{body}"),
    }
    let value = json!({ "graph": g.to_text(), "sidecar": sidecar });
    ctx.emit(&value, &g.to_text())?;
    Ok(0)
}

fn run(cmd: Command, ctx: &Ctx) -> CmdResult {
    let exec = ctx.exec;
    match cmd {
        Command::VerifyHd1 { input } => {
            let g = read_graph(&input)?;
            if !g.is_connected() {
                return Err(Error::Disconnected.into());
            }
            match verify_hd1_with(&g, exec) {
                Hd1Verdict::Certified(cert) => {
                    let v = json!({ "certified": true, "certificate": cert });
                    ctx.emit(&v, &format!("certified: {} scales\n", cert.scales.len()))?;
                    Ok(0)
                }
                Hd1Verdict::Witness(w) => {
                    let v = json!({ "certified": false, "witness": w });
                    ctx.emit(&v, &format!("not certified at scale {}\n", w.scale))?;
                    Ok(1)
                }
            }
        }
        Command::Spc { input, scale } => {
            let g = read_graph(&input)?;
            let r = internal_scale(&g, &scale)?;
            let d = all_pairs_with(&g, exec);
            let gm = metric_preprocess_with(&g, &d);
            match spc1_for_scale(&gm, &d, &r) {
                ScaleOutcome::Hubs(hubs) => {
                    let mut set: Vec<usize> = hubs.values().copied().collect();
                    set.sort_unstable();
                    set.dedup();
                    let v = json!({ "scale": r, "hubs": hubs, "hub_set": set });
                    let list: Vec<String> = set.iter().map(|h| h.to_string()).collect();
                    ctx.emit(&v, &format!("hubs {}\n", list.join(" ")))?;
                    Ok(0)
                }
                ScaleOutcome::Failure(w) => {
                    let v = json!({ "scale": r, "witness": w });
                    ctx.emit(&v, &format!("no one-hub cover at scale {r}\n"))?;
                    Ok(1)
                }
            }
        }
        Command::Hierarchy { input } => {
            let g = read_graph(&input)?;
            let d = all_pairs_with(&g, exec);
            if !d.is_connected() {
                return Err(Error::Disconnected.into());
            }
            let gm = metric_preprocess_with(&g, &d);
            let cert = match verify_hd1_with(&gm, exec) {
                Hd1Verdict::Certified(c) => c,
                Hd1Verdict::Witness(w) => return Err(Error::NotCertified(w.scale.to_string()).into()),
            };
            let h = build_hierarchy_with(&gm, &d, &cert)?;
            let v = h.to_json()?;
            ctx.emit(&v, &format!("{} levels, {} components\n", h.l_max() + 1, h.all_components().len()))?;
            Ok(0)
        }
        Command::Net { input, radius } => {
            let g = read_graph(&input)?;
            let r = internal_scale(&g, &radius)?;
            let d = all_pairs_with(&g, exec);
            let net = compute_net_with(&g, &d, &r);
            let c = net.check(&g, &d);
            let v = json!({
                "net": net,
                "check": {
                    "separated": c.separated,
                    "covering": c.covering,
                    "one_per_component": c.one_per_component,
                    "eta_consistent": c.eta_consistent,
                },
            });
            let pts: Vec<String> = net.points.iter().map(|p| p.to_string()).collect();
            ctx.emit(&v, &format!("points {}\n", pts.join(" ")))?;
            Ok(if c.all() { 0 } else { 1 })
        }
        Command::Treedecomp { input, min_degree } => {
            let g = read_graph(&input)?;
            let (gm, td) = decomposition(&g, min_degree, exec)?;
            let valid = validate_decomposition(&gm, &td).is_valid();
            let nice = make_nice(&td);
            let mut v = td.to_json();
            v["valid"] = json!(valid);
            v["nice_nodes"] = json!(nice.nodes().len());
            ctx.emit(&v, &format!("{} bags, width {}\n", td.len(), td.width()))?;
            Ok(if valid { 0 } else { 3 })
        }
        Command::SolveTsp { input, min_degree } => {
            let g = read_graph(&input)?;
            let (gm, td) = decomposition(&g, min_degree, exec)?;
            let t = tsp_exact_td_with(&gm, &make_nice(&td), &ctx.opts())?;
            ctx.emit(&t.to_json(&g), &tour_text(&g, &t))?;
            Ok(0)
        }
        Command::SolveSteiner {
            input,
            min_degree,
            terminals,
        } => {
            let g = read_graph(&input)?;
            let ts = terminals_of(&g, &terminals);
            let (gm, td) = decomposition(&g, min_degree, exec)?;
            let s = steiner_exact_td_with(&gm, &ts, &make_nice(&td), &ctx.opts())?;
            ctx.emit(&s.to_json(&g), &tree_text(&g, &s))?;
            Ok(0)
        }
        Command::FptasTsp { input } => {
            let g = read_graph(&input)?;
            let (t, rep) = fptas_tsp_with(&g, &ctx.eps()?, &ctx.opts())?;
            write_trace(ctx, &rep)?;
            let mut v = t.to_json(&g);
            v["report"] = rep.to_json();
            ctx.emit(&v, &tour_text(&g, &t))?;
            Ok(0)
        }
        Command::FptasSteiner { input, terminals } => {
            let g = read_graph(&input)?;
            let ts = terminals_of(&g, &terminals);
            let (s, rep) = fptas_steiner_with(&g, &ts, &ctx.eps()?, &ctx.opts())?;
            write_trace(ctx, &rep)?;
            let mut v = s.to_json(&g);
            v["report"] = rep.to_json();
            ctx.emit(&v, &tree_text(&g, &s))?;
            Ok(0)
        }
        Command::GenStp { input, sidecar } => {
            let red = gen_stp(&read_cnf(&input)?);
            write_reduction(ctx, &red.graph, red.sidecar_json(), &sidecar)
        }
        Command::GenTsp { input, sidecar } => {
            let red = gen_tsp(&read_cnf(&input)?)?;
            write_reduction(ctx, &red.graph, red.sidecar_json(), &sidecar)
        }
        Command::DecideStp { input } => {
            let red = gen_stp(&read_cnf(&input)?);
            let ts = red.terminals();
            let (sol, solver) = if ts.len() <= oracle_cap(DREYFUS_WAGNER_CAP) {
                (dreyfus_wagner_steiner(&red.graph, ts)?, "dreyfus-wagner")
            } else {
                let ntd = make_nice(&min_degree_decomposition(&red.graph));
                (steiner_exact_td_with(&red.graph, ts, &ntd, &ctx.opts())?, "td-dp")
            };
            decision_output(ctx, &decide_stp(&red, &sol)?, solver)
        }
        Command::DecideTsp { input } => {
            let red = gen_tsp(&read_cnf(&input)?)?;
            let (sol, solver) = if red.graph.n() <= oracle_cap(HELD_KARP_CAP) {
                (held_karp_tsp(&red.graph)?, "held-karp")
            } else {
                let ntd = make_nice(&min_degree_decomposition(&red.graph));
                (tsp_exact_td_with(&red.graph, &ntd, &ctx.opts())?, "td-dp")
            };
            decision_output(ctx, &decide_tsp(&red, &sol)?, solver)
        }
        Command::OracleTsp { input } => {
            let g = read_graph(&input)?;
            let t = held_karp_tsp(&g)?;
            ctx.emit(&t.to_json(&g), &tour_text(&g, &t))?;
            Ok(0)
        }
        Command::OracleSteiner { input, terminals } => {
            let g = read_graph(&input)?;
            let ts = terminals_of(&g, &terminals);
            let s = dreyfus_wagner_steiner(&g, &ts)?;
            ctx.emit(&s.to_json(&g), &tree_text(&g, &s))?;
            Ok(0)
        }
        Command::OracleHd { input, h_max } => {
            let g = read_graph(&input)?;
            let hd = exact_highway_dimension(&g, h_max)?;
            let v = json!({ "highway_dimension": hd, "h_max": h_max });
            let text = match hd {
                Some(h) => format!("highway dimension {h}\n"),
                None => format!("highway dimension exceeds {h_max}\n"),
            };
            ctx.emit(&v, &text)?;
            Ok(if hd.is_some() { 0 } else { 1 })
        }
        Command::GenCorpus {
            count,
            max_vertices,
            dir,
        } => {
            let mut params = corpus_params(count, max_vertices);
            for p in &mut params {
                p.seed += ctx.common.seed;
            }
            let corpus = build_corpus(&params, exec)?;
            fs::create_dir_all(&dir)?;
            let mut manifest = Vec::with_capacity(corpus.len());
            for e in &corpus {
                let name = format!("hd1-{:04}.graph", e.params.seed);
                fs::write(dir.join(&name), e.instance.graph.to_text())?;
                let mut m = e.manifest_json();
                m["file"] = json!(name);
                manifest.push(m);
            }
            let v = json!({ "instances": manifest });
            let mut body = serde_json::to_string_pretty(&v).expect("json");
            body.push('\n');
            fs::write(dir.join("manifest.json"), &body)?;
            ctx.emit(&v, &format!("{} instances written to {}\n", corpus.len(), dir.display()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.common.threads;
    #[cfg(feature = "parallel")]
    if let Some(t) = threads.filter(|&t| t > 1) {
        // Only fails if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let exec = match threads {
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    };
    let ctx = Ctx {
        common: cli.common,
        exec,
    };
    match run(cli.command, &ctx) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
