use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use rigikit::builders::{
    body_bar_graph, body_hinge_graph, k_chain, one_extension, standard_body_hinge_config,
    verify_standard_config_rigid, zero_extension, BuildError, ChainSpec,
};
use rigikit::certify::checker::check_chain;
use rigikit::certify::{
    combine_check, deconstruction_certificate_2d, global_rigidity_2d, global_rigidity_nd,
    hendrickson_check, kchain_global_check, CertifyError, NdOptions, Piece, Status, Verdict,
};
use rigikit::corpus::nonisomorphic_graphs;
use rigikit::graph::{
    vertex_connectivity, Edge, Multigraph, RootedMinorWitness, SimpleGraph, VertexId,
};
use rigikit::io::{parse_auto, GraphJson};
use rigikit::oracle::{
    enumerate_equivalent, numeric_globally_rigid_probe, rounded_random_config, OracleError,
    Tolerances,
};
use rigikit::packing::{
    body_bar_global_check, body_bar_rigid_check, body_hinge_global_check, body_hinge_rigid_check,
    tree_packing,
};
use rigikit::rigidity::{
    generic_rank, ght_global_rigidity_test, infinitesimal_rigidity_exact, is_redundantly_rigid,
    is_rigid, is_vertex_redundantly_rigid, rigid_rank_target, Framework, GhtVerdict, RigidityError,
};
use rigikit::sparsity::{
    ear_decomposition, is_circuit_r2, is_independent, is_laman_rigid, m_components, pebble_rank,
    redundantly_rigid_2d, SparsityError,
};

#[derive(Parser)]
#[command(
    name = "rigikit",
    version,
    about = "Rigidity and global rigidity of graphs"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Ambient dimension d.
    #[arg(long, short = 'd', default_value_t = 2, global = true)]
    dim: usize,
    /// Seed for every randomized test; recorded in the report.
    #[arg(long, env = "RIGIKIT_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// Independent random trials per rank or stress test.
    #[arg(long, default_value_t = 3, global = true)]
    trials: usize,
    /// Recursion depth of the vertex-removal search.
    #[arg(long, default_value_t = 8, global = true)]
    depth: usize,
    /// Emit JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,
    /// Omit the timestamp so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Oracle solver residual tolerance.
    #[arg(long, default_value_t = 1e-10, global = true)]
    residual_tol: f64,
    /// Oracle class-merge tolerance on fingerprints.
    #[arg(long, default_value_t = 1e-6, global = true)]
    merge_tol: f64,
}

#[derive(Args)]
struct Input {
    /// Graph file (text edge list or JSON); `-` reads stdin.
    #[arg(default_value = "-")]
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generic rank of the rigidity matrix.
    Rank(Input),
    /// Generic rigidity.
    Rigid(Input),
    /// Rigidity after deleting any one edge.
    Redundant(Input),
    /// Rigidity after deleting any one vertex.
    Vredundant(Input),
    /// Planar (2,3)-sparsity counts.
    Laman(Input),
    /// Whether the graph is a circuit of the planar rigidity matroid.
    Circuit(Input),
    /// Connected components of the planar rigidity matroid.
    Mcomp(Input),
    /// Ear decomposition of an M-connected graph.
    Ears(Input),
    /// Global rigidity: exact in the plane, rule search plus stress test otherwise.
    Global(Input),
    /// Global rigidity with an independently re-checked certificate.
    Certify {
        #[command(flatten)]
        input: Input,
        /// Planar reduction sequence down to K4.
        #[arg(long)]
        deconstruct: bool,
    },
    /// Necessary conditions: connectivity and redundant rigidity.
    Hendrickson(Input),
    /// Edge-disjoint spanning trees in a multigraph.
    Pack {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        trees: usize,
    },
    /// Body-bar frameworks given by a multigraph.
    Bodybar {
        #[command(subcommand)]
        action: BodyBarAction,
    },
    /// Body-hinge frameworks given by a multigraph.
    Bodyhinge {
        #[command(subcommand)]
        action: BodyHingeAction,
    },
    /// Chains of complete graphs joined completely between consecutive parts.
    Kchain {
        #[command(subcommand)]
        action: KchainAction,
    },
    /// 0- and 1-extensions.
    Extend {
        #[command(flatten)]
        input: Input,
        #[arg(long, conflicts_with = "one", required_unless_present = "one")]
        zero: bool,
        #[arg(long)]
        one: bool,
        /// Neighbours of the new vertex (0-extension), comma separated.
        #[arg(long, value_delimiter = ',')]
        nbrs: Vec<VertexId>,
        /// Edge to split (1-extension), as `u,v`.
        #[arg(long, value_delimiter = ',')]
        edge: Vec<VertexId>,
        /// Extra neighbours of the new vertex (1-extension), comma separated.
        #[arg(long, value_delimiter = ',')]
        extra: Vec<VertexId>,
    },
    /// Gluing two globally rigid pieces along a common vertex set.
    Combine {
        /// JSON with `g1`, `g2`, `minor`, `x` and `witness`.
        #[arg(default_value = "-")]
        input: String,
    },
    /// Floating-point realization explorer.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Exhaustive small-graph consistency suite.
    Sweep {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
}

#[derive(Subcommand)]
enum BodyBarAction {
    Build(Input),
    Check(Input),
    Global(Input),
}

#[derive(Subcommand)]
enum BodyHingeAction {
    Build(Input),
    Check(Input),
    Global(Input),
    /// Exact standard-basis configuration for one deleted hinge.
    Witness {
        #[command(flatten)]
        input: Input,
        /// Edge copy whose hinge loses a vertex; defaults to the first.
        #[arg(long)]
        edge: Option<usize>,
    },
}

#[derive(Subcommand)]
enum KchainAction {
    Build {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    Check {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum OracleAction {
    /// Congruence classes of frameworks equivalent to one configuration.
    Enumerate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        /// JSON list of points; a seeded random configuration otherwise.
        #[arg(long)]
        config: Option<String>,
    },
    /// Search for an equivalent non-congruent framework at a random configuration.
    Probe {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
    },
}

#[derive(Deserialize)]
struct CombineInput {
    g1: Piece,
    g2: Piece,
    minor: Vec<Edge>,
    x: Vec<VertexId>,
    witness: RootedMinorWitness,
}

enum Failure {
    Input(String),
    Fault(String),
}

type Outcome = Result<(Value, bool), Failure>;

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read_source(path: &str) -> Result<String, Failure> {
    let mut s = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(input_err)?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    }
    Ok(s)
}

fn load_multi(input: &Input) -> Result<Multigraph, Failure> {
    parse_auto(&read_source(&input.input)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.input)))
}

/// Parallel edges are an error outside the multigraph commands.
fn load_simple(input: &Input) -> Result<SimpleGraph, Failure> {
    let h = load_multi(input)?;
    h.to_simple().map_err(|e| {
        Failure::Input(format!(
            "{}: parallel edges are not allowed here ({e})",
            input.input
        ))
    })
}

fn certify_failure(e: CertifyError) -> Failure {
    match e {
        CertifyError::InvariantFault(_) | CertifyError::Sparsity(SparsityError::InvariantFault) => {
            Failure::Fault(e.to_string())
        }
        _ => Failure::Input(e.to_string()),
    }
}

fn sparsity_failure(e: SparsityError) -> Failure {
    match e {
        SparsityError::InvariantFault => Failure::Fault(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn rigidity_failure(e: RigidityError) -> Failure {
    match e {
        RigidityError::StressRankFault { .. } => Failure::Fault(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn build_failure(e: BuildError) -> Failure {
    input_err(e)
}

fn verdict_value(v: &Verdict) -> Value {
    json!({
        "status": v.status,
        "dim": v.dim,
        "rules": v.steps.iter().map(|s| s.rule_name()).collect::<Vec<_>>(),
        "steps": v.steps,
        "error_bound": v.error_bound,
    })
}

fn global_verdict(g: &SimpleGraph, cfg: &RunConfig) -> Result<Verdict, Failure> {
    if cfg.dim == 2 {
        Ok(global_rigidity_2d(g))
    } else {
        let opts = NdOptions {
            depth: cfg.depth,
            trials: cfg.trials,
        };
        global_rigidity_nd(g, cfg.dim, opts, cfg.seed).map_err(certify_failure)
    }
}

fn redundancy(g: &SimpleGraph, cfg: &RunConfig) -> Value {
    let r = if cfg.dim == 2 {
        redundantly_rigid_2d(g)
    } else {
        is_redundantly_rigid(g, cfg.dim, cfg.seed)
    };
    json!({"redundantly_rigid": r.holds, "first_failure": r.first_failure, "exact": cfg.dim == 2 || !r.holds})
}

fn run(cmd: Command, cfg: &RunConfig) -> Outcome {
    let d = cfg.dim;
    let seed = cfg.seed;
    if d == 0 && !matches!(cmd, Command::Pack { .. } | Command::Sweep { .. }) {
        return Err(Failure::Input("--dim must be at least 1".into()));
    }
    let done = |v: Value| Ok((v, false));
    match cmd {
        Command::Rank(i) => {
            let g = load_simple(&i)?;
            let mut v = json!({
                "generic_rank": generic_rank(&g, d, seed),
                "rigid_rank": rigid_rank_target(g.n(), d),
            });
            if d == 2 {
                v["pebble_rank"] = json!(pebble_rank(&g).0);
            }
            done(v)
        }
        Command::Rigid(i) => {
            let g = load_simple(&i)?;
            let rigid = if d == 2 {
                is_laman_rigid(&g)
            } else {
                is_rigid(&g, d, seed)
            };
            done(json!({"rigid": rigid}))
        }
        Command::Redundant(i) => done(redundancy(&load_simple(&i)?, cfg)),
        Command::Vredundant(i) => {
            let r = is_vertex_redundantly_rigid(&load_simple(&i)?, d, seed);
            done(json!({"vertex_redundantly_rigid": r.holds, "first_failure": r.first_failure}))
        }
        Command::Laman(i) => {
            let g = load_simple(&i)?;
            let (rank, basis) = pebble_rank(&g);
            done(json!({
                "independent": is_independent(g.n(), &g.edges()),
                "laman_rigid": is_laman_rigid(&g),
                "rank": rank,
                "basis": basis,
            }))
        }
        Command::Circuit(i) => done(json!({"circuit": is_circuit_r2(&load_simple(&i)?)})),
        Command::Mcomp(i) => {
            let comps = m_components(&load_simple(&i)?);
            done(json!({"count": comps.len(), "components": comps}))
        }
        Command::Ears(i) => {
            let dec = ear_decomposition(&load_simple(&i)?).map_err(sparsity_failure)?;
            done(json!({"ears": dec.ears, "count": dec.ears.len()}))
        }
        Command::Global(i) => {
            let g = load_simple(&i)?;
            let v = global_verdict(&g, cfg)?;
            Ok((verdict_value(&v), v.status == Status::Unknown))
        }
        Command::Certify { input, deconstruct } => {
            let g = load_simple(&input)?;
            let (status, steps, bound) = if deconstruct {
                if d != 2 {
                    return Err(Failure::Input(
                        "--deconstruct is planar only (use --dim 2)".into(),
                    ));
                }
                let steps = deconstruction_certificate_2d(&g).map_err(certify_failure)?;
                (Status::GloballyRigid, steps, "exact".to_string())
            } else {
                let v = global_verdict(&g, cfg)?;
                (v.status, v.steps, v.error_bound)
            };
            let checked = check_chain(&g, d, seed, &steps, status);
            if let Err(e) = &checked {
                return Err(Failure::Fault(format!(
                    "certificate failed its own check: {e}"
                )));
            }
            let v = Verdict {
                status,
                dim: d,
                steps,
                seed,
                error_bound: bound,
            };
            let mut out = verdict_value(&v);
            out["checked"] = json!(true);
            Ok((out, status == Status::Unknown))
        }
        Command::Hendrickson(i) => {
            let g = load_simple(&i)?;
            done(json!({"result": hendrickson_check(&g, d, seed)}))
        }
        Command::Pack { input, trees } => {
            let h = load_multi(&input)?;
            let out = tree_packing(&h, trees).map_err(input_err)?;
            done(json!({"feasible": out.feasible(), "outcome": out}))
        }
        Command::Bodybar { action } => match action {
            BodyBarAction::Build(i) => {
                let layout = body_bar_graph(&load_multi(&i)?, d);
                done(json!({"graph": GraphJson::from_simple(&layout.graph), "layout": layout}))
            }
            BodyBarAction::Check(i) => {
                let out = body_bar_rigid_check(&load_multi(&i)?, d);
                done(json!({"rigid": out.feasible(), "outcome": out}))
            }
            BodyBarAction::Global(i) => {
                let r = body_bar_global_check(&load_multi(&i)?, d);
                done(json!({"globally_rigid": r.holds, "report": r}))
            }
        },
        Command::Bodyhinge { action } => match action {
            BodyHingeAction::Build(i) => {
                let layout = body_hinge_graph(&load_multi(&i)?, d).map_err(build_failure)?;
                done(json!({"graph": GraphJson::from_simple(&layout.graph), "layout": layout}))
            }
            BodyHingeAction::Check(i) => {
                let out = body_hinge_rigid_check(&load_multi(&i)?, d).map_err(input_err)?;
                done(json!({"rigid": out.feasible(), "outcome": out}))
            }
            BodyHingeAction::Global(i) => {
                let r = body_hinge_global_check(&load_multi(&i)?, d).map_err(input_err)?;
                done(json!({"globally_rigid": r.holds, "report": r}))
            }
            BodyHingeAction::Witness { input, edge } => {
                let h = load_multi(&input)?;
                let e = edge.or((h.m() > 0).then_some(0));
                let cfg = standard_body_hinge_config(&h, d, e, None).map_err(build_failure)?;
                let report =
                    infinitesimal_rigidity_exact(&cfg.framework).map_err(rigidity_failure)?;
                let points: Vec<Vec<String>> = cfg
                    .framework
                    .config
                    .iter()
                    .map(|p| p.iter().map(|x| x.to_string()).collect())
                    .collect();
                done(json!({
                    "edge": e,
                    "rigid": verify_standard_config_rigid(&cfg),
                    "kernel_dim": report.kernel_dim,
                    "trivial_dim": report.trivial_dim,
                    "graph": GraphJson::from_simple(&cfg.framework.graph),
                    "points": points,
                    "vertex_map": cfg.vertex_map,
                    "tree_pairs": cfg.tree_pairs,
                }))
            }
        },
        Command::Kchain { action } => match action {
            KchainAction::Build { sizes } => {
                let spec = ChainSpec::new(sizes).map_err(build_failure)?;
                done(
                    json!({"graph": GraphJson::from_simple(&k_chain(&spec)), "parts": spec.parts()}),
                )
            }
            KchainAction::Check { sizes } => {
                let spec = ChainSpec::new(sizes).map_err(build_failure)?;
                let v = kchain_global_check(&spec, d, seed).map_err(certify_failure)?;
                Ok((verdict_value(&v), v.status == Status::Unknown))
            }
        },
        Command::Extend {
            input,
            zero,
            nbrs,
            edge,
            extra,
            ..
        } => {
            let g = load_simple(&input)?;
            let out = if zero {
                zero_extension(&g, d, &nbrs)
            } else {
                let [u, v] = edge[..] else {
                    return Err(Failure::Input(
                        "--edge takes exactly two vertices `u,v`".into(),
                    ));
                };
                one_extension(&g, d, (u, v), &extra)
            }
            .map_err(build_failure)?;
            done(json!({"graph": GraphJson::from_simple(&out)}))
        }
        Command::Combine { input } => {
            let doc: CombineInput =
                serde_json::from_str(&read_source(&input)?).map_err(input_err)?;
            let v = combine_check(&doc.g1, &doc.g2, &doc.minor, &doc.x, &doc.witness, d, seed)
                .map_err(certify_failure)?;
            Ok((verdict_value(&v), v.status == Status::Unknown))
        }
        Command::Oracle { action } => {
            let tol = Tolerances {
                residual: cfg.residual_tol,
                merge: cfg.merge_tol,
            };
            match action {
                OracleAction::Enumerate {
                    input,
                    restarts,
                    config,
                } => {
                    let g = load_simple(&input)?;
                    let points: Vec<Vec<f64>> = match config {
                        Some(path) => {
                            serde_json::from_str(&read_source(&path)?).map_err(input_err)?
                        }
                        None => rounded_random_config(g.n(), d, seed),
                    };
                    let fw = Framework::new(g, d, points).map_err(rigidity_failure)?;
                    let r = enumerate_equivalent(&fw, restarts, tol, seed);
                    done(json!({"class_count": r.class_count(), "report": r}))
                }
                OracleAction::Probe { input, restarts } => {
                    let g = load_simple(&input)?;
                    let out =
                        numeric_globally_rigid_probe(&g, d, restarts, seed).map_err(
                            |e| match e {
                                OracleError::NotRigid(_) | OracleError::ZeroDimension => {
                                    input_err(e)
                                }
                            },
                        )?;
                    done(json!({"outcome": out}))
                }
            }
        }
        Command::Sweep { max_n } => sweep(max_n, seed, cfg.trials),
    }
}

/// Cross-checks on every graph with at most `max_n` vertices, up to isomorphism.
fn sweep(max_n: usize, seed: u64, trials: usize) -> Outcome {
    if max_n > 9 {
        return Err(Failure::Input("sweep supports --max-n up to 9".into()));
    }
    let graphs: Vec<SimpleGraph> = (1..=max_n).flat_map(nonisomorphic_graphs).collect();
    let problems: Vec<String> = graphs
        .par_iter()
        .flat_map_iter(|g| {
            let mut out = Vec::new();
            let label = || format!("{:?}", g.edges());
            if pebble_rank(g).0 != generic_rank(g, 2, seed) {
                out.push(format!("pebble rank != generic rank on {}", label()));
            }
            if g.n() >= 4 {
                let gr = global_rigidity_2d(g).status == Status::GloballyRigid;
                let connectivity = vertex_connectivity(g).map(|(k, _)| k).unwrap_or(0);
                if connectivity >= 3 {
                    let ght = ght_global_rigidity_test(g, 2, seed, trials)
                        .map(|o| o.verdict == GhtVerdict::ProbablyGloballyRigid)
                        .unwrap_or(false);
                    if gr != ght {
                        out.push(format!("characterization vs stress rank on {}", label()));
                    }
                }
                if gr && (connectivity < 3 || !is_redundantly_rigid(g, 2, seed).holds) {
                    out.push(format!(
                        "globally rigid verdict violates necessary conditions on {}",
                        label()
                    ));
                }
            }
            out
        })
        .collect();
    if !problems.is_empty() {
        return Err(Failure::Fault(format!(
            "{} sweep failures, first: {}",
            problems.len(),
            problems[0]
        )));
    }
    Ok((
        json!({"graphs": graphs.len(), "max_n": max_n, "failures": 0}),
        false,
    ))
}

fn render(report: &Value, as_json: bool) -> String {
    if as_json {
        return serde_json::to_string_pretty(report).expect("json value");
    }
    let Value::Object(map) = report else {
        return report.to_string();
    };
    map.iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}: {s}"),
            other => format!("{k}: {other}"),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = cli.run.clone();
    match run(cli.command, &cfg) {
        Ok((mut report, unknown)) => {
            report["seed"] = json!(cfg.seed);
            if !cfg.deterministic {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                report["generated_unix"] = json!(now);
            }
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{}", render(&report, cfg.json));
            if unknown {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Fault(msg)) => {
            eprintln!("internal invariant fault: {msg}");
            ExitCode::from(3)
        }
    }
}
