//! `algstat` — command-line front end for the exact/numerical toolkit:
//! tensor invariants, ML degrees, EM, gaussoids and discrete CI search.
//!
//! Every command emits a JSON report `{"meta": ..., "result": ...}`. The
//! `result` section is byte-identical across reruns with the same inputs
//! and seed; `meta.wall_ms` is the only varying field. Exit codes: 0 on
//! success, 1 on domain errors (with `{"error": ...}` on stdout), 2 on
//! usage errors.

mod jsonio;

use algstat_core::ci::{ci_signature, strict_model_search, CiWitness};
use algstat_core::gauss::{
    all_statements, entropy_vector, enumerate_gaussoids, find_representation,
    five_cycle_experiment, gaussoid_of, submodular_check, CIStatement, GaussoidCandidate,
    SubmodClass, Witness,
};
use algstat_core::invariants::{quintic_expand, span_dimension, strassen_expand, vanishing_report, Family};
use algstat_core::mle::{
    check_critical, det_critical_points, em_low_rank, ml_degree_plane, CountVector, PlaneCurve,
};
use algstat_core::rat::rat_to_string;
use algstat_core::tensor::Table3;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "algstat", version, about = "Exact and numerical kernels for algebraic statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Seed for all randomised phases (echoed in the report).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the informational line on stderr.
    #[arg(long, global = true, default_value_t = false)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Degree-5 and degree-9 invariants of 4x4x4 tables.
    Invariants {
        #[command(subcommand)]
        cmd: InvariantsCmd,
    },
    /// Likelihood geometry: plane curves, determinantal models, EM.
    Mle {
        #[command(subcommand)]
        cmd: MleCmd,
    },
    /// Gaussian conditional independence and the submodular cone.
    Gaussoid {
        #[command(subcommand)]
        cmd: GaussoidCmd,
    },
    /// Discrete conditional independence signatures and search.
    Ci {
        #[command(subcommand)]
        cmd: CiCmd,
    },
}

#[derive(Subcommand)]
enum InvariantsCmd {
    /// Evaluate all 576 quintic and 192 Strassen coordinates on a table.
    Check {
        #[arg(long)]
        table: PathBuf,
    },
    /// Expand an invariant symbolically.
    Expand {
        /// quintic | strassen
        #[arg(long)]
        which: String,
        /// Entry of the quintic commutator, as `row,col`.
        #[arg(long, default_value = "0,0")]
        entry: String,
        /// Report structure counts only (no coefficient list).
        #[arg(long, default_value_t = false)]
        count_terms: bool,
    },
    /// Span dimension of the GL-translates by evaluation rank over F_p.
    Dim {
        /// quintic | strassen
        #[arg(long)]
        family: String,
        /// Number of translates and of evaluation points.
        #[arg(long)]
        samples: usize,
        /// Prime modulus.
        #[arg(long, default_value_t = algstat_core::fp::DEFAULT_PRIME)]
        prime: u64,
    },
}

#[derive(Subcommand)]
enum MleCmd {
    /// Critical points of the likelihood on a plane curve.
    Plane {
        /// Homogeneous polynomial in p0, p1, p2, e.g. "p1^2 - 4*p0*p2".
        #[arg(long)]
        curve: String,
        /// Counts, e.g. "3,5,7".
        #[arg(long)]
        u: String,
    },
    /// Multi-start critical points on the determinantal hypersurface.
    Detrank {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Count matrix file (array of arrays).
        #[arg(long)]
        u: PathBuf,
        #[arg(long, default_value_t = 5000)]
        starts: usize,
    },
    /// Latent-class EM for a low-rank table.
    Em {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 10000)]
        max_iters: usize,
    },
    /// Projected-gradient criticality check of a table under a rank model.
    Check {
        /// Table file (array of arrays of rationals).
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum GaussoidCmd {
    /// Enumerate all gaussoids on n in {3, 4} as JSONL.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Search for an exactly certified positive definite witness.
    Represent {
        #[arg(long)]
        n: usize,
        /// Statements `"1,2|3;2,3|4"` (1-based; empty set as `"1,2|"`).
        #[arg(long)]
        statements: String,
        #[arg(long, default_value_t = 32)]
        budget: usize,
    },
    /// Entropy vector of a covariance matrix plus submodularity audit.
    Entropy {
        /// Symmetric matrix JSON `{"n":5,"upper":["2","1/3",...]}`.
        #[arg(long)]
        sigma: PathBuf,
    },
    /// The five-cycle experiment: symbolic, numeric and exact parts.
    Fivecycle {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum CiCmd {
    /// Exact CI signature of a discrete table.
    Signature {
        #[arg(long)]
        table: PathBuf,
    },
    /// Search for a positive rational table with a target signature.
    Search {
        /// Dimensions, e.g. "2,2,2".
        #[arg(long)]
        dims: String,
        /// Signature JSON `{"n":3,"dims":[2,2,2],"holds":["1,2|"]}`.
        #[arg(long)]
        signature: PathBuf,
        #[arg(long, default_value_t = 100000)]
        budget: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global();
    }
    let started = Instant::now();
    match run(&cli) {
        Ok(result) => {
            let report = json!({
                "meta": {
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": cli.global.seed,
                    "config": std::env::args().skip(1).collect::<Vec<_>>().join(" "),
                    "wall_ms": started.elapsed().as_millis() as u64,
                },
                "result": result,
            });
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            // enumerate already streamed JSONL to --out; keep that file and
            // put the envelope on stdout instead
            let out_taken = report["result"]["jsonl_written"] == serde_json::json!(true);
            match cli.global.out.as_ref().filter(|_| !out_taken) {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        std::process::exit(1);
                    }
                    if !cli.global.quiet {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => println!("{text}"),
            }
        }
        Err(e) => {
            let msg = json!({ "error": format!("{e:#}") });
            println!("{}", serde_json::to_string_pretty(&msg).unwrap());
            std::process::exit(1);
        }
    }
}

fn run(cli: &Cli) -> Result<Value> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Invariants { cmd } => run_invariants(cmd, seed),
        Command::Mle { cmd } => run_mle(cmd, seed),
        Command::Gaussoid { cmd } => run_gaussoid(cmd, seed, cli),
        Command::Ci { cmd } => run_ci(cmd, seed),
    }
}

fn run_invariants(cmd: &InvariantsCmd, seed: u64) -> Result<Value> {
    match cmd {
        InvariantsCmd::Check { table } => {
            let t = jsonio::read_table(table)?;
            if t.dims != vec![4, 4, 4] {
                bail!("invariants check needs a 4x4x4 table, got dims {:?}", t.dims);
            }
            let t3 = Table3::new((4, 4, 4), t.entries)?;
            let rep = vanishing_report(&t3)?;
            Ok(serde_json::to_value(rep)?)
        }
        InvariantsCmd::Expand { which, entry, count_terms } => {
            let (poly, meta) = match which.as_str() {
                "quintic" => {
                    let (r, c) = parse_pair(entry).context("parsing --entry")?;
                    if r > 3 || c > 3 {
                        bail!("entry out of range for a 4x4 commutator");
                    }
                    let p = quintic_expand((r, c));
                    (p, json!({"which": "quintic", "entry": [r, c]}))
                }
                "strassen" => (strassen_expand().clone(), json!({"which": "strassen"})),
                other => bail!("unknown invariant family `{other}`"),
            };
            let mut out = meta;
            out["terms"] = json!(poly.num_terms());
            out["degree"] = json!(poly.total_degree());
            out["support"] = json!(poly.support_size());
            if !count_terms {
                out["polynomial"] = serde_json::to_value(&poly)?;
            }
            Ok(out)
        }
        InvariantsCmd::Dim { family, samples, prime } => {
            let fam: Family = family.parse()?;
            let dim = span_dimension(fam, *samples, *samples, *prime, seed);
            Ok(json!({
                "family": family,
                "samples": samples,
                "prime": prime,
                "dimension": dim,
            }))
        }
    }
}

fn run_mle(cmd: &MleCmd, seed: u64) -> Result<Value> {
    match cmd {
        MleCmd::Plane { curve, u } => {
            let curve_poly = PlaneCurve::parse(curve)?;
            let counts = parse_u_list(u)?;
            if counts.len() != 3 {
                bail!("plane curves need exactly three counts");
            }
            let res = ml_degree_plane(&curve_poly, &CountVector::new(counts), seed)?;
            let transform: Vec<Vec<String>> = (0..3)
                .map(|i| (0..3).map(|j| rat_to_string(res.transform.at(i, j))).collect())
                .collect();
            Ok(json!({
                "curve": curve,
                "degree": curve_poly.degree(),
                "ml_degree": res.ml_degree(),
                "critical": serde_json::to_value(&res.critical)?,
                "transform": transform,
            }))
        }
        MleCmd::Detrank { m, n, r, u, starts } => {
            let counts = jsonio::read_counts(u)?;
            let cs = det_critical_points(*m, *n, *r, &counts, *starts, seed)?;
            Ok(json!({
                "m": m, "n": n, "r": r, "starts": starts,
                "count": cs.count,
                "critical": serde_json::to_value(&cs)?,
            }))
        }
        MleCmd::Em { u, r, starts, tol, max_iters } => {
            let counts = jsonio::read_counts(u)?;
            let res = em_low_rank(&counts, *r, *starts, *max_iters, *tol, seed, false)?;
            Ok(serde_json::to_value(res)?)
        }
        MleCmd::Check { p, u, r } => {
            let table = jsonio::read_rat_matrix(p)?;
            let counts = jsonio::read_counts(u)?;
            let rep = check_critical(&table, &counts, *r)?;
            let mut v = serde_json::to_value(&rep)?;
            v["is_critical"] = json!(rep.is_critical(1e-10));
            Ok(v)
        }
    }
}

fn run_gaussoid(cmd: &GaussoidCmd, seed: u64, cli: &Cli) -> Result<Value> {
    match cmd {
        GaussoidCmd::Enumerate { n } => {
            let found = enumerate_gaussoids(*n)?;
            let mut lines = String::new();
            for g in &found {
                let members: Vec<String> = g.members().iter().map(|s| s.display()).collect();
                lines.push_str(&serde_json::to_string(&json!({"n": n, "members": members}))?);
                lines.push('\n');
            }
            if let Some(path) = &cli.global.out {
                std::fs::write(path, &lines)?;
            }
            Ok(json!({
                "n": n,
                "count": found.len(),
                "jsonl_written": cli.global.out.is_some(),
            }))
        }
        GaussoidCmd::Represent { n, statements, budget } => {
            let stmts = parse_statements(*n, statements)?;
            let target = GaussoidCandidate::from_statements(*n, &stmts)?;
            match find_representation(&target, *budget, seed) {
                Witness::Found(cov) => Ok(json!({
                    "found": true,
                    "sigma": serde_json::to_value(jsonio::sigma_to_json(&cov))?,
                    "pattern": serde_json::to_value(
                        gaussoid_of(&cov)?.members().iter().map(|s| s.display()).collect::<Vec<_>>()
                    )?,
                })),
                Witness::NotFound { attempts } => {
                    Ok(json!({ "found": false, "attempts": attempts }))
                }
            }
        }
        GaussoidCmd::Entropy { sigma } => {
            let cov = jsonio::read_sigma(sigma)?;
            let h = entropy_vector(&cov)?;
            let entries = submodular_check(&h);
            let count = |c: SubmodClass| entries.iter().filter(|e| e.class == c).count();
            Ok(json!({
                "n": h.n,
                "values": h.values,
                "submodular": {
                    "violated": count(SubmodClass::Violated),
                    "tight": count(SubmodClass::Tight),
                    "slack": count(SubmodClass::Slack),
                },
            }))
        }
        GaussoidCmd::Fivecycle { samples } => {
            let rep = five_cycle_experiment(*samples, seed)?;
            Ok(serde_json::to_value(rep)?)
        }
    }
}

fn run_ci(cmd: &CiCmd, seed: u64) -> Result<Value> {
    match cmd {
        CiCmd::Signature { table } => {
            let t = jsonio::read_table(table)?;
            let sig = ci_signature(&t)?;
            Ok(serde_json::to_value(jsonio::signature_to_json(&sig))?)
        }
        CiCmd::Search { dims, signature, budget } => {
            let dims: Vec<usize> = dims
                .split(',')
                .map(|s| s.trim().parse::<usize>().context("parsing --dims"))
                .collect::<Result<_>>()?;
            let target = jsonio::read_signature(signature)?;
            if target.dims != dims {
                bail!(
                    "--dims {:?} disagree with the signature file dims {:?}",
                    dims,
                    target.dims
                );
            }
            match strict_model_search(&target, *budget, seed)? {
                CiWitness::Found(t) => Ok(json!({
                    "found": true,
                    "table": serde_json::to_value(&*t)?,
                    "signature": serde_json::to_value(jsonio::signature_to_json(&ci_signature(&t)?))?,
                })),
                CiWitness::NotFound { attempts } => {
                    Ok(json!({ "found": false, "attempts": attempts }))
                }
            }
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(',').context("expected `row,col`")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_u_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().context("parsing --u"))
        .collect()
}

fn parse_statements(n: usize, s: &str) -> Result<Vec<CIStatement>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    let stmts: Vec<CIStatement> = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| CIStatement::parse(n, t.trim()))
        .collect::<std::result::Result<_, _>>()?;
    // validate against the statement universe
    let universe = all_statements(n);
    for st in &stmts {
        if !universe.contains(st) {
            bail!("statement {st} outside the universe for n={n}");
        }
    }
    Ok(stmts)
}
