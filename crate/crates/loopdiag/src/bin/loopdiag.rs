//! Thin command-line front end: loads a graph file, runs one pipeline from
//! the library, and prints a single JSON report on standard output.
//! Exit codes: 0 success, 1 input error, 2 LBP non-convergence, 3 identity
//! check failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopdiag::{
    corollary_change_of_variables, cycle_rank, exact_marginal, exact_partition, loop_count_bound,
    loop_series_partition, marginal_via_transfer, one_loop_sign_check, rank2_transfer_check,
    susceptibility_check, Caps, Error, LbpConfig, LoopSeries, Mrf, Schedule,
};
use rand::SeedableRng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "loopdiag",
    version,
    about = "Loop-series expansion of binary pairwise MRFs: LBP, Bethe partition function, generalized-loop corrections, marginal reconstruction, Ising correspondence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on node count for brute-force sweeps.
    #[arg(long, global = true, default_value_t = 24)]
    max_nodes: usize,
    /// Cap on cut pairs for transfer tensors.
    #[arg(long, global = true, default_value_t = 8)]
    max_cut: usize,
    /// Cap on edge count for loop enumeration.
    #[arg(long, global = true, default_value_t = 30)]
    max_enum_edges: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct LbpArgs {
    /// Convergence tolerance on the message residual.
    #[arg(long, default_value_t = 1e-12, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Blend factor toward the old messages.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    damping: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Sync)]
    schedule: ScheduleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Sync,
    Seq,
}

impl From<&LbpArgs> for LbpConfig {
    fn from(a: &LbpArgs) -> Self {
        LbpConfig {
            tolerance: a.tol,
            max_iterations: a.max_iters,
            damping: a.damping,
            schedule: match a.schedule {
                ScheduleArg::Sync => Schedule::Sync,
                ScheduleArg::Seq => Schedule::Seq,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SortArg {
    /// Canonical edge-subset order.
    Canonical,
    /// Descending |r|.
    AbsR,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarginalMode {
    Transfer,
    Diagram,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum IsingCheck {
    Corollary,
    Susceptibility,
}

#[derive(Subcommand)]
enum Command {
    /// Run loopy belief propagation and report the fixed point.
    Lbp {
        graph: PathBuf,
        #[command(flatten)]
        lbp: LbpArgs,
    },
    /// Exact partition function and marginals by brute force.
    Exact { graph: PathBuf },
    /// Loop-series expansion Z = Z_B (1 + sum r(C)).
    Expand {
        graph: PathBuf,
        #[command(flatten)]
        lbp: LbpArgs,
        /// Emit at most this many terms.
        #[arg(long)]
        max_terms: Option<usize>,
        #[arg(long, value_enum, default_value_t = SortArg::Canonical)]
        sort: SortArg,
    },
    /// Edge coefficients beta and node coefficients gamma.
    Coeffs {
        graph: PathBuf,
        #[command(flatten)]
        lbp: LbpArgs,
    },
    /// Reconstruct one node's exact marginal from the fixed point.
    Marginal {
        graph: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long, value_enum, default_value_t = MarginalMode::Both)]
        mode: MarginalMode,
        #[command(flatten)]
        lbp: LbpArgs,
    },
    /// Generalized-loop count against the theta(1,1) bound.
    Bound { graph: PathBuf },
    /// Regular-graph Ising correspondence checks.
    Ising {
        /// Graph shape: `cycle:N`, `complete:N`, or a graph file path.
        #[arg(long)]
        graph: String,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        z: Option<f64>,
        /// Coupling K (alternative to --z for the susceptibility check).
        #[arg(long, visible_alias = "K", allow_negative_numbers = true)]
        coupling: Option<f64>,
        /// External field h (with --K, an alternative to --y/--z for the
        /// corollary check; the matching y is found by bisection).
        #[arg(long, visible_alias = "h", allow_negative_numbers = true)]
        field: Option<f64>,
        #[arg(long, value_enum)]
        check: IsingCheck,
    },
    /// Run the full identity suite on one graph.
    Verify {
        graph: PathBuf,
        #[command(flatten)]
        lbp: LbpArgs,
    },
    /// Emit a seeded random connected instance as a graph file.
    Random {
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        /// Extra edges beyond a random spanning tree.
        #[arg(long, default_value_t = 2)]
        extra_edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        psi_min: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        psi_max: f64,
    },
}

fn main() -> ExitCode {
    // Flag errors are input errors (exit 1); help/version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if cli.max_nodes == 0 || cli.max_enum_edges == 0 {
        return fail(&Error::InvalidInput("caps must be positive".into()));
    }
    let caps = Caps {
        max_nodes: cli.max_nodes,
        max_cut: cli.max_cut,
        max_enum_edges: cli.max_enum_edges,
    };
    if let Err(e) = validate_lbp_args(&cli.command) {
        return fail(&e);
    }
    match run(&cli, &caps) {
        Ok((value, code)) => {
            let text = serde_json::to_string_pretty(&value).expect("report serializes");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        return fail(&Error::Io(e));
                    }
                }
                None => println!("{text}"),
            }
            code
        }
        Err(e) => fail(&e),
    }
}

fn validate_lbp_args(command: &Command) -> Result<(), Error> {
    let lbp = match command {
        Command::Lbp { lbp, .. }
        | Command::Expand { lbp, .. }
        | Command::Coeffs { lbp, .. }
        | Command::Marginal { lbp, .. }
        | Command::Verify { lbp, .. } => lbp,
        _ => return Ok(()),
    };
    if lbp.tol <= 0.0 || lbp.tol.is_nan() {
        return Err(Error::InvalidInput(format!(
            "--tol must be positive, got {}",
            lbp.tol
        )));
    }
    if !(0.0..1.0).contains(&lbp.damping) {
        return Err(Error::InvalidInput(format!(
            "--damping must lie in [0, 1), got {}",
            lbp.damping
        )));
    }
    Ok(())
}

fn fail(e: &Error) -> ExitCode {
    let (kind, code) = classify(e);
    eprintln!("{}", json!({ "error": e.to_string(), "kind": kind }));
    ExitCode::from(code)
}

fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::NotConverged { .. } => ("non-convergence", 2),
        Error::IdentityCheck(_) | Error::PropagationRules { .. } => ("identity-failure", 3),
        _ => ("input", 1),
    }
}

fn run(cli: &Cli, caps: &Caps) -> Result<(Value, ExitCode), Error> {
    match &cli.command {
        Command::Lbp { graph, lbp } => {
            let m = loopdiag::read_graph(graph)?;
            let report = loopdiag::run_lbp(&m, &lbp.into())?;
            let value = fixed_point_json(&m, &report);
            if report.converged {
                Ok((value, ExitCode::SUCCESS))
            } else {
                eprintln!(
                    "{}",
                    json!({"error": "LBP did not converge", "kind": "non-convergence"})
                );
                Ok((value, ExitCode::from(2)))
            }
        }
        Command::Exact { graph } => {
            let m = loopdiag::read_graph(graph)?;
            let z = exact_partition(&m, caps)?;
            let marginals: Result<Vec<[f64; 2]>, Error> = (0..m.node_count())
                .map(|v| exact_marginal(&m, v, caps))
                .collect();
            Ok((json!({ "Z": z, "marginals": marginals? }), ExitCode::SUCCESS))
        }
        Command::Expand {
            graph,
            lbp,
            max_terms,
            sort,
        } => {
            let m = loopdiag::read_graph(graph)?;
            let series = loop_series_partition(&m, &lbp.into(), caps)?;
            Ok((
                expansion_json(&m, &series, *max_terms, *sort),
                ExitCode::SUCCESS,
            ))
        }
        Command::Coeffs { graph, lbp } => {
            let m = loopdiag::read_graph(graph)?;
            let report = loopdiag::run_lbp(&m, &lbp.into())?;
            if !report.converged {
                return Err(Error::NotConverged {
                    iterations: report.iterations,
                    residual: report.residual,
                });
            }
            let coeffs = loopdiag::coefficients(&m, &report.beliefs);
            let beta: std::collections::BTreeMap<String, f64> = m
                .edges()
                .iter()
                .zip(&coeffs.beta)
                .map(|(e, &b)| (format!("{}-{}", e.i, e.j), b))
                .collect();
            let gamma: std::collections::BTreeMap<String, f64> = coeffs
                .gamma
                .iter()
                .enumerate()
                .map(|(v, &g)| (v.to_string(), g))
                .collect();
            Ok((json!({ "beta": beta, "gamma": gamma }), ExitCode::SUCCESS))
        }
        Command::Marginal {
            graph,
            node,
            mode,
            lbp,
        } => {
            let m = loopdiag::read_graph(graph)?;
            let expansion = marginal_via_transfer(&m, *node, &lbp.into(), caps)?;
            let mut value = json!({
                "node": node,
                "proxy_node": expansion.node,
                "belief": expansion.belief,
                "z_ratio": expansion.z_ratio,
                "p_exactish": expansion.p_reconstructed,
            });
            if matches!(mode, MarginalMode::Transfer | MarginalMode::Both) {
                value["four_terms"] = json!({
                    "mu_mu": expansion.four_terms.mu_mu,
                    "nu_nu": expansion.four_terms.nu_nu,
                    "mu_nu": expansion.four_terms.mu_nu,
                    "nu_mu": expansion.four_terms.nu_mu,
                });
            }
            if matches!(mode, MarginalMode::Diagram | MarginalMode::Both) {
                value["diagram_terms"] = Value::Array(
                    expansion
                        .diagram_terms
                        .iter()
                        .map(|t| {
                            json!({
                                "edges": t.edges.iter().map(|&e| {
                                    let edge = &expansion.graph.edges()[e];
                                    json!([edge.i, edge.j])
                                }).collect::<Vec<_>>(),
                                "target_degree": t.target_degree,
                                "base": t.base,
                                "weight_plus": t.weight_plus(expansion.belief),
                                "weight_minus": t.weight_minus(expansion.belief),
                            })
                        })
                        .collect(),
                );
                let totals = expansion.diagram_totals();
                value["diagram_totals"] = json!(totals);
            }
            Ok((value, ExitCode::SUCCESS))
        }
        Command::Bound { graph } => {
            let m = loopdiag::read_graph(graph)?;
            let bound = loop_count_bound(&m, caps)?;
            Ok((
                json!({
                    "count": bound.count,
                    "bound": bound.bound,
                    "tight": bound.tight,
                    "cycle_rank": cycle_rank(&m),
                }),
                ExitCode::SUCCESS,
            ))
        }
        Command::Ising {
            graph,
            y,
            z,
            coupling,
            field,
            check,
        } => {
            let m = parse_shape(graph)?;
            match check {
                IsingCheck::Corollary => {
                    let (y, z) = match (y, z, coupling, field) {
                        (Some(y), Some(z), _, _) => (*y, *z),
                        (None, _, Some(k), Some(h)) => {
                            let z = k.tanh();
                            let degree = m.regular_degree().ok_or(Error::NotRegular)?;
                            (solve_y_for_field(*h, z, degree)?, z)
                        }
                        _ => {
                            return Err(Error::InvalidInput(
                                "the corollary check needs --y and --z (or --K and --h)".into(),
                            ))
                        }
                    };
                    let report = corollary_change_of_variables(&m, y, z, caps)?;
                    if report.rel_err <= 1e-8 {
                        Ok((serde_json::to_value(&report)?, ExitCode::SUCCESS))
                    } else {
                        Err(Error::IdentityCheck(format!(
                            "corollary identity rel err {:e} exceeds 1e-8",
                            report.rel_err
                        )))
                    }
                }
                IsingCheck::Susceptibility => {
                    let k = match (coupling, z) {
                        (Some(k), _) => *k,
                        (None, Some(z)) => z.atanh(),
                        _ => {
                            return Err(Error::InvalidInput(
                                "the susceptibility check needs --coupling (--K) or --z".into(),
                            ))
                        }
                    };
                    let report = susceptibility_check(&m, k, caps)?;
                    if report.rel_err <= 1e-5 {
                        Ok((serde_json::to_value(&report)?, ExitCode::SUCCESS))
                    } else {
                        Err(Error::IdentityCheck(format!(
                            "susceptibility formula rel err {:e} exceeds 1e-5",
                            report.rel_err
                        )))
                    }
                }
            }
        }
        Command::Verify { graph, lbp } => {
            let m = loopdiag::read_graph(graph)?;
            verify(&m, &lbp.into(), caps)
        }
        Command::Random {
            nodes,
            extra_edges,
            seed,
            psi_min,
            psi_max,
        } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let m = loopdiag::random::random_connected(
                &mut rng,
                *nodes,
                *extra_edges,
                (*psi_min, *psi_max),
            )?;
            let value = serde_json::to_value(loopdiag::GraphFile::from(&m))?;
            Ok((value, ExitCode::SUCCESS))
        }
    }
}

/// Inverts `h(y) = atanh(y) + (1 - d) atanh(y z)` by bisection on
/// `y in (-1, 1)`; `h` is continuous with limits -inf/+inf at the ends.
fn solve_y_for_field(h: f64, z: f64, degree: usize) -> Result<f64, Error> {
    let field_of = |y: f64| y.atanh() + (1.0 - degree as f64) * (y * z).atanh();
    let (mut lo, mut hi) = (-1.0 + 1e-12, 1.0 - 1e-12);
    if field_of(lo) > h || field_of(hi) < h {
        return Err(Error::InvalidInput(format!(
            "no y in (-1, 1) matches h = {h} at z = {z}"
        )));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if field_of(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / 2.0)
}

fn parse_shape(spec: &str) -> Result<Mrf, Error> {
    if let Some(n) = spec.strip_prefix("cycle:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad cycle size in {spec:?}")))?;
        return Mrf::cycle(n);
    }
    if let Some(n) = spec.strip_prefix("complete:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad complete-graph size in {spec:?}")))?;
        return Mrf::complete(n);
    }
    loopdiag::read_graph(spec)
}

fn fixed_point_json(m: &Mrf, report: &loopdiag::FixedPointReport) -> Value {
    json!({
        "converged": report.converged,
        "iterations": report.iterations,
        "residual": report.residual,
        "bethe_log_z": report.bethe_log_z,
        "z_bethe": report.z_bethe(),
        "node_beliefs": report.beliefs.node,
        "edge_beliefs": m.edges().iter().zip(&report.beliefs.edge).map(|(e, t)| {
            json!({ "i": e.i, "j": e.j, "table": t })
        }).collect::<Vec<_>>(),
        "messages": m.edges().iter().flat_map(|e| {
            [(e.i, e.j), (e.j, e.i)].into_iter().map(|(to, from)| {
                json!({
                    "to": to,
                    "from": from,
                    "value": report.messages.get(m, to, from).unwrap(),
                })
            })
        }).collect::<Vec<_>>(),
    })
}

fn expansion_json(m: &Mrf, series: &LoopSeries, max_terms: Option<usize>, sort: SortArg) -> Value {
    let mut terms: Vec<&loopdiag::LoopTerm> = series.terms.iter().collect();
    if matches!(sort, SortArg::AbsR) {
        terms.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()));
    }
    if let Some(cap) = max_terms {
        terms.truncate(cap);
    }
    json!({
        "Z_B": series.z_bethe,
        "theta": series.theta,
        "z_estimate": series.z_estimate,
        "term_count": series.terms.len(),
        "terms": terms.iter().map(|t| {
            json!({
                "edges": t.subgraph.edge_pairs(m),
                "r": t.r,
            })
        }).collect::<Vec<_>>(),
    })
}

fn verify(m: &Mrf, cfg: &LbpConfig, caps: &Caps) -> Result<(Value, ExitCode), Error> {
    let series = loop_series_partition(m, cfg, caps)?;
    let z_exact = exact_partition(m, caps)?;
    let mut failures: Vec<String> = Vec::new();

    let loop_identity_err = (z_exact - series.z_estimate).abs() / z_exact;
    if loop_identity_err > 1e-8 {
        failures.push(format!("loop-series identity rel err {loop_identity_err:e}"));
    }

    // Covariance route: r(C) equals the covariance-based term per loop.
    let mut cc_worst: f64 = 0.0;
    for term in &series.terms {
        let check = loopdiag::cc_term(&term.subgraph, m, &series.fixed_point.beliefs)?;
        cc_worst = cc_worst.max((check - term.r).abs() / term.r.abs().max(1.0));
    }
    if cc_worst > 1e-10 {
        failures.push(format!("covariance-term equivalence rel err {cc_worst:e}"));
    }

    // Propagation rules on the original graph and its degree-capped
    // transform.
    let mut rule_residuals = Vec::new();
    for (label, graph) in [
        ("original", m.clone()),
        ("transformed", loopdiag::transform_degree_three(m)?.0),
    ] {
        let fp = loopdiag::run_lbp(&graph, cfg)?;
        if !fp.converged {
            return Err(Error::NotConverged {
                iterations: fp.iterations,
                residual: fp.residual,
            });
        }
        let reparam = loopdiag::reparametrize(&graph, &fp)?;
        let mu = loopdiag::first_messages(&reparam, &fp.beliefs)?;
        let nu = loopdiag::secondary_messages(&reparam, &fp.beliefs)?;
        let coeffs = loopdiag::coefficients(&reparam, &fp.beliefs);
        match loopdiag::verify_propagation_rules(&reparam, &mu, &nu, &coeffs) {
            Ok(report) => rule_residuals.push(json!({
                "graph": label,
                "checks": report.checks.len(),
                "max_residual": report.max_residual,
            })),
            Err(e) => {
                failures.push(format!("propagation rules on {label}: {e}"));
                rule_residuals.push(json!({ "graph": label, "error": e.to_string() }));
            }
        }
    }

    // Marginal reconstruction at node 0 (or its degree-2 proxy).
    let expansion = marginal_via_transfer(m, 0, cfg, caps)?;
    let exact = exact_marginal(m, 0, caps)?;
    let marg_err = (expansion.p_reconstructed[0] - exact[0]).abs();
    if marg_err > 1e-8 {
        failures.push(format!("marginal reconstruction err {marg_err:e}"));
    }
    let diagram = expansion.diagram_totals();
    let transfer = expansion.unnormalized();
    let route_gap = (diagram[0] - transfer[0])
        .abs()
        .max((diagram[1] - transfer[1]).abs());
    if route_gap > 1e-10 {
        failures.push(format!("diagram/transfer route gap {route_gap:e}"));
    }

    let bound = loop_count_bound(m, caps)?;

    let rank2 = if cycle_rank(m) > 0 && cycle_rank(m) <= caps.max_cut {
        match rank2_transfer_check(m, cfg, caps) {
            Ok(report) => json!({
                "checked": report.checks.len(),
                "max_residual": report.checks.iter()
                    .map(|c| c.max_entry_residual)
                    .fold(0.0f64, f64::max),
            }),
            Err(e) => {
                failures.push(format!("rank-2 transfer representation: {e}"));
                json!({ "error": e.to_string() })
            }
        }
    } else {
        json!("skipped")
    };

    let one_loop = if cycle_rank(m) == 1 {
        let report = one_loop_sign_check(m, cfg, caps)?;
        if !report.checks.iter().all(|c| c.agrees) {
            failures.push("one-loop sign corollary violated".into());
        }
        json!({ "nodes_checked": report.checks.len(), "beta_product": report.beta_product })
    } else {
        json!("skipped")
    };

    // Expansion listing, Bethe term first.
    let mut expansion_terms = vec![json!({ "edges": Vec::<(usize, usize)>::new(), "r": 1.0 })];
    expansion_terms.extend(
        series
            .terms
            .iter()
            .map(|t| json!({ "edges": t.subgraph.edge_pairs(m), "r": t.r })),
    );

    let ok = failures.is_empty();
    let value = json!({
        "converged": true,
        "z_exact": z_exact,
        "z_bethe": series.z_bethe,
        "theta": series.theta,
        "z_estimate": series.z_estimate,
        "loop_series_rel_err": loop_identity_err,
        "covariance_rel_err": cc_worst,
        "expansion": expansion_terms,
        "propagation_rules": rule_residuals,
        "marginal": {
            "node": 0,
            "p_reconstructed": expansion.p_reconstructed,
            "p_exact": exact,
            "belief": expansion.belief,
            "route_gap": route_gap,
        },
        "count": bound.count,
        "bound": bound.bound,
        "tight": bound.tight,
        "rank2": rank2,
        "one_loop": one_loop,
        "ok": ok,
        "failures": failures,
    });
    if ok {
        Ok((value, ExitCode::SUCCESS))
    } else {
        let text = serde_json::to_string_pretty(&value).expect("report serializes");
        println!("{text}");
        Err(Error::IdentityCheck(format!(
            "{} verification checks failed",
            failures.len()
        )))
    }
}
