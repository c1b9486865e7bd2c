//! Command-line driver. Every subcommand prints one JSON document.
//!
//! Input objects are given inline as JSON or as a path to a JSON file. Groups
//! may also be named builtins such as `cyclic:2:1,1` or `sym:3:1,0,2;1,2,0`.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::action::{
    equal_refine_action, invariant_components, tensor_trivial, uniform_distance, validate_action, FkAction,
    Word,
};
use crate::algebra::{dist_max, dist_partition, validate_algebra, CellPartition, EventTuple, MeasuredAlgebra};
use crate::audit::{axiom_residual, check_c1, ec_in_extension_check, search_c2_witness};
use crate::constructions::{
    approx_conjugacy_search, embed_into_profinite_tensor, embed_transitive_into_quotient, eppa_extend, ergodize,
    joint_quotient, match_partitions, quotient_action, Embedding, MarkedGroup, PartialIsomorphism,
};
use crate::error::{Error, Result};
use crate::modeltheory::{independence_deficiency_with, type_distance, Metric};
use crate::perm::Perm;
use crate::rational::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "PMPLAB_THREADS";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    Tv,
    Max,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Tv => Metric::Tv,
            MetricArg::Max => Metric::Max,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pmplab", version, about = "Exact finite pmp F_k-systems")]
struct Cli {
    /// Seed for randomized choices; echoed in search reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Expected number of generators; actions with a different count are rejected.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long = "max-refine", global = true, default_value_t = 2)]
    max_refine: usize,
    #[arg(long, global = true, value_enum, default_value_t = MetricArg::Tv)]
    metric: MetricArg,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Haar-measure action of F_k on a marked finite group.
    GenQuotient { group: String },
    /// Subgroup of G1 × G2 generated by paired generators.
    JointQuotient { g1: String, g2: String },
    /// ACTION ⊗ trivial(ALGEBRA).
    Tensor { action: String, algebra: String },
    /// Split every atom into M equal parts.
    Refine { action: String, m: usize },
    /// d and d_P between two tuples.
    Dist { algebra: String, a: String, b: String },
    /// Distance between the types of B and C over BASE.
    Typedist { algebra: String, base: String, b: String, c: String },
    /// Independence deficiency of B from C over BASE.
    Indep {
        algebra: String,
        base: String,
        b: String,
        c: String,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Uniform distance between two automorphisms.
    Delta {
        g: String,
        h: String,
        /// Defaults to equal atoms.
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Automorphism of a refinement carrying A onto B.
    Match { algebra: String, a: String, b: String },
    /// Complete partial automorphisms on an equal-atom algebra.
    Eppa { algebra: String, partials: String },
    /// Make an action ergodic while fixing a partition.
    Ergodize {
        action: String,
        /// Blocks of the fixed partition; defaults to the trivial partition.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Embed an equal-atom action into a profinite quotient (⊗ trivial when not ergodic).
    Embed { action: String },
    /// Certified approximate conjugacy between two actions.
    Conjsearch {
        action1: String,
        action2: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        beam: usize,
    },
    /// Condition (C1).
    AuditC1 {
        action: String,
        a: String,
        bs: String,
        #[arg(long)]
        eps: String,
    },
    /// Search for a (C2) witness.
    AuditC2 {
        action: String,
        a: String,
        bs: String,
        #[arg(long)]
        eps: String,
    },
    /// Upper bound for the axiom residual.
    AuditResidual { action: String, a: String, bs: String },
    /// Realize an extension's triple-intersection pattern inside SMALL.
    AuditEc {
        small: String,
        big: String,
        embed: String,
        r#as: String,
        bs: String,
        words: String,
        #[arg(long)]
        eps: String,
    },
}

/// Reads `arg` as a file when such a file exists, else as inline text.
fn load(arg: &str) -> String {
    match std::fs::read_to_string(arg) {
        Ok(text) => text,
        Err(_) => arg.to_string(),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T> {
    serde_json::from_str(&load(arg)).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

#[derive(Deserialize)]
struct AlgebraJson {
    atoms: Vec<Rational>,
}

#[derive(Deserialize)]
struct ActionJson {
    algebra: AlgebraJson,
    #[serde(default)]
    k: Option<usize>,
    gens: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EventJson {
    Members { members: Vec<usize> },
    List(Vec<usize>),
}

impl EventJson {
    fn into_members(self) -> Vec<usize> {
        match self {
            EventJson::Members { members } | EventJson::List(members) => members,
        }
    }
}

pub fn parse_algebra(arg: &str) -> Result<MeasuredAlgebra> {
    let a: AlgebraJson = parse_json(arg, "algebra")?;
    validate_algebra(a.atoms)
}

pub fn parse_action(arg: &str) -> Result<FkAction> {
    let a: ActionJson = parse_json(arg, "action")?;
    if let Some(k) = a.k {
        if k != a.gens.len() {
            return Err(Error::GeneratorCountMismatch {
                expected: k,
                got: a.gens.len(),
            });
        }
    }
    validate_action(validate_algebra(a.algebra.atoms)?, a.gens)
}

pub fn parse_group(arg: &str) -> Result<MarkedGroup> {
    let text = load(arg);
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| Error::Parse(format!("group: {e}")))
    } else {
        MarkedGroup::parse_builtin(trimmed)
    }
}

fn tuple_from_lists(alg: &MeasuredAlgebra, lists: Vec<EventJson>) -> Result<EventTuple> {
    let events = lists
        .into_iter()
        .map(|e| alg.event(e.into_members()))
        .collect::<Result<Vec<_>>>()?;
    alg.tuple(events)
}

pub fn parse_tuple(alg: &MeasuredAlgebra, arg: &str) -> Result<EventTuple> {
    tuple_from_lists(alg, parse_json(arg, "tuple")?)
}

fn parse_tuples(alg: &MeasuredAlgebra, arg: &str) -> Result<Vec<EventTuple>> {
    let lists: Vec<Vec<EventJson>> = parse_json(arg, "tuple list")?;
    lists.into_iter().map(|l| tuple_from_lists(alg, l)).collect()
}

fn parse_perm(arg: &str) -> Result<Perm> {
    let images: Vec<usize> = parse_json(arg, "permutation")?;
    Perm::from_images(images).ok_or_else(|| Error::InvalidArgument(format!("{arg} is not a permutation")))
}

fn parse_rational(arg: &str) -> Result<Rational> {
    arg.trim().parse()
}

pub fn algebra_json(alg: &MeasuredAlgebra) -> Value {
    json!({ "atoms": alg.atoms().iter().map(|m| m.to_string()).collect::<Vec<_>>() })
}

pub fn action_json(act: &FkAction) -> Value {
    json!({
        "algebra": algebra_json(act.algebra()),
        "k": act.k(),
        "gens": act.gens().iter().map(|g| g.images().to_vec()).collect::<Vec<_>>(),
    })
}

pub fn tuple_json(t: &EventTuple) -> Value {
    Value::Array(
        t.events()
            .iter()
            .map(|e| json!({ "members": e.members() }))
            .collect(),
    )
}

fn exact(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn check_k(cli: &Cli, act: &FkAction) -> Result<()> {
    match cli.k {
        Some(k) if k != act.k() => Err(Error::GeneratorCountMismatch {
            expected: k,
            got: act.k(),
        }),
        _ => Ok(()),
    }
}

fn config(cli: &Cli) -> Value {
    json!({
        "seed": cli.seed,
        "k": cli.k,
        "max_refine": cli.max_refine,
        "metric": Metric::from(cli.metric),
    })
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn execute(cli: &Cli) -> Result<Value> {
    let metric = Metric::from(cli.metric);
    Ok(match &cli.command {
        Command::GenQuotient { group } => action_json(&quotient_action(&parse_group(group)?)?),
        Command::JointQuotient { g1, g2 } => {
            let j = joint_quotient(&parse_group(g1)?, &parse_group(g2)?)?;
            json!({ "group": to_value(&j.group), "proj1": j.proj1, "proj2": j.proj2 })
        }
        Command::Tensor { action, algebra } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            action_json(&tensor_trivial(&act, &parse_algebra(algebra)?))
        }
        Command::Refine { action, m } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            let (fine, proj) = equal_refine_action(&act, *m)?;
            json!({ "action": action_json(&fine), "parent": proj.parent })
        }
        Command::Dist { algebra, a, b } => {
            let alg = parse_algebra(algebra)?;
            let (a, b) = (parse_tuple(&alg, a)?, parse_tuple(&alg, b)?);
            json!({ "d": exact(&dist_max(&alg, &a, &b)?), "d_P": exact(&dist_partition(&alg, &a, &b)?) })
        }
        Command::Typedist { algebra, base, b, c } => {
            let alg = parse_algebra(algebra)?;
            let (base, b, c) = (parse_tuple(&alg, base)?, parse_tuple(&alg, b)?, parse_tuple(&alg, c)?);
            json!({ "metric": metric, "distance": exact(&type_distance(&alg, &base, &b, &c, metric)?) })
        }
        Command::Indep { algebra, base, b, c, eps } => {
            let alg = parse_algebra(algebra)?;
            let (base, b, c) = (parse_tuple(&alg, base)?, parse_tuple(&alg, b)?, parse_tuple(&alg, c)?);
            let d = independence_deficiency_with(&alg, &base, &b, &c, metric)?;
            let mut out = json!({ "metric": metric, "deficiency": exact(&d) });
            if let Some(eps) = eps {
                let eps = parse_rational(eps)?;
                if !eps.is_positive() {
                    return Err(Error::NonpositiveEps(eps));
                }
                out["independent"] = json!(d < eps);
            }
            out
        }
        Command::Delta { g, h, algebra } => {
            let (g, h) = (parse_perm(g)?, parse_perm(h)?);
            let alg = match algebra {
                Some(a) => parse_algebra(a)?,
                None => MeasuredAlgebra::uniform(g.len())?,
            };
            json!({ "delta": exact(&uniform_distance(&alg, &g, &h)?) })
        }
        Command::Match { algebra, a, b } => {
            let alg = parse_algebra(algebra)?;
            let (a, b) = (parse_tuple(&alg, a)?, parse_tuple(&alg, b)?);
            let m = match_partitions(&alg, &a, &b)?;
            let moved = uniform_distance(&m.algebra, &m.g, &Perm::identity(m.algebra.len()))?;
            json!({
                "algebra": algebra_json(&m.algebra),
                "parent": m.projection.parent,
                "g": m.g.images(),
                "delta_to_identity": exact(&moved),
                "d_P": exact(&dist_partition(&alg, &a, &b)?),
            })
        }
        Command::Eppa { algebra, partials } => {
            let alg = parse_algebra(algebra)?;
            type Pairs = Vec<(Vec<usize>, Vec<usize>)>;
            let raw: Vec<Pairs> = parse_json(partials, "partials")?;
            let partials = raw
                .into_iter()
                .map(|pairs| PartialIsomorphism::new(&alg, &alg, pairs))
                .collect::<Result<Vec<_>>>()?;
            let ext = eppa_extend(&alg, &partials)?;
            json!({ "action": action_json(&ext.action), "embedding": ext.embedding.images })
        }
        Command::Ergodize { action, partition } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            let fixed = match partition {
                Some(p) => CellPartition::from_blocks(act.algebra(), parse_json(p, "partition")?)?,
                None => CellPartition::trivial(act.algebra()),
            };
            let out = ergodize(&act, &fixed)?;
            json!({ "action": action_json(&out.action), "modifications": to_value(&out.modifications) })
        }
        Command::Embed { action } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            if invariant_components(&act).components.len() == 1 {
                let e = embed_transitive_into_quotient(&act)?;
                json!({
                    "mode": "quotient",
                    "group": to_value(&e.group),
                    "target": action_json(&e.quotient),
                    "sigma": e.embedding.images,
                })
            } else {
                let e = embed_into_profinite_tensor(&act)?;
                json!({
                    "mode": "tensor",
                    "group": to_value(&e.group),
                    "blocks": algebra_json(&e.blocks),
                    "target": action_json(&e.target),
                    "sigma": e.embedding.images,
                })
            }
        }
        Command::Conjsearch { action1, action2, depth, beam } => {
            let (a1, a2) = (parse_action(action1)?, parse_action(action2)?);
            check_k(cli, &a1)?;
            let cert = approx_conjugacy_search(&a1, &a2, *depth, *beam)?;
            json!({
                "config": config(cli),
                "left": action_json(&cert.left),
                "left_parent": cert.left_projection.parent,
                "right": action_json(&cert.right),
                "right_parent": cert.right_projection.parent,
                "h": cert.h.images(),
                "eps": { "exact": exact(&cert.eps), "decimal": cert.eps.to_decimal(crate::audit::DECIMAL_DIGITS) },
                "budget_exhausted": cert.budget_exhausted,
            })
        }
        Command::AuditC1 { action, a, bs, eps } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            let (a, bs) = (parse_tuple(act.algebra(), a)?, parse_tuples(act.algebra(), bs)?);
            let r = check_c1(&act, &a, &bs, &parse_rational(eps)?, metric)?;
            json!({ "config": config(cli), "report": to_value(&r) })
        }
        Command::AuditC2 { action, a, bs, eps } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            let (a, bs) = (parse_tuple(act.algebra(), a)?, parse_tuples(act.algebra(), bs)?);
            let r = search_c2_witness(&act, &a, &bs, &parse_rational(eps)?, cli.max_refine, metric)?;
            json!({
                "config": config(cli),
                "found": r.found,
                "upper_bound_only": !r.found,
                "witness": to_value(&r.best),
                "refined_action": action_json(&r.best.action),
            })
        }
        Command::AuditResidual { action, a, bs } => {
            let act = parse_action(action)?;
            check_k(cli, &act)?;
            let (a, bs) = (parse_tuple(act.algebra(), a)?, parse_tuples(act.algebra(), bs)?);
            let r = axiom_residual(&act, &a, &bs, cli.max_refine, metric)?;
            json!({ "config": config(cli), "report": to_value(&r) })
        }
        Command::AuditEc { small, big, embed, r#as, bs, words, eps } => {
            let (small, big) = (parse_action(small)?, parse_action(big)?);
            check_k(cli, &small)?;
            let images: Vec<Vec<usize>> = parse_json(embed, "embedding")?;
            let embed = Embedding {
                source: small.algebra().id(),
                target: big.algebra().id(),
                images: images
                    .into_iter()
                    .map(|mut v| {
                        v.sort_unstable();
                        v
                    })
                    .collect(),
            };
            let as_ = parse_tuple(small.algebra(), r#as)?;
            let bs = parse_tuple(big.algebra(), bs)?;
            let words: Vec<Vec<i64>> = parse_json(words, "words")?;
            let words: Vec<Word> = words.into_iter().map(Word::new).collect();
            let r = ec_in_extension_check(&small, &big, &embed, &as_, &bs, &words, &parse_rational(eps)?, cli.max_refine)?;
            json!({
                "config": config(cli),
                "found": r.found,
                "upper_bound_only": !r.found,
                "witness": to_value(&r),
                "refined_action": action_json(&r.action),
            })
        }
    })
}

fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}

/// Parses `argv` (including the program name) and runs it, returning the exit
/// code and the text for stdout.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            return (code, e.render().to_string());
        }
    };
    let (code, value) = match execute(&cli) {
        Ok(v) => (EXIT_OK, v),
        Err(e) => (EXIT_VALIDATION, error_json(&e)),
    };
    let text = serde_json::to_string(&value).expect("json values serialize");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            let err = Error::InvalidArgument(format!("cannot write {}: {e}", path.display()));
            return (EXIT_VALIDATION, serde_json::to_string(&error_json(&err)).expect("json"));
        }
    }
    (code, text)
}

/// Caps the global worker pool from [`THREADS_ENV`].
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which leaves the default.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        run(std::iter::once("pmplab").chain(args.iter().copied()))
    }

    #[test]
    fn quotient_output() {
        let (code, out) = call(&["gen-quotient", "cyclic:2:1,1"]);
        assert_eq!(code, 0);
        assert_eq!(out, r#"{"algebra":{"atoms":["1/2","1/2"]},"k":2,"gens":[[1,0],[1,0]]}"#);
    }

    #[test]
    fn delta_identical() {
        assert_eq!(call(&["delta", "[1,0,2]", "[1,0,2]"]), (0, r#"{"delta":"0/1"}"#.to_string()));
    }

    #[test]
    fn usage_and_validation_codes() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        let (code, out) = call(&["gen-quotient", "sym:3:1,0,2"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(out.contains(r#""kind":"NotGenerating""#));
    }
}
