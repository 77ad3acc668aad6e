//! `banach-lab`: deterministic CLI over the exact-arithmetic laboratory.
//!
//! Exit codes: 0 for any computed result (including honest "inconclusive"
//! outcomes), 2 for usage errors, 3 for budget refusals. Reports are
//! canonical JSON (sorted keys, rationals as strings) written atomically,
//! so identical invocations produce byte-identical files.

use anyhow::Context;
use banach_lab_core::certify::{
    block_rep_search, check_eps_lp_type, equivalence_constants, CertifyBudget, CertifyError,
    PExponent,
};
use banach_lab_core::convolution::{binomial_kernel, convolution_phi, ConvError, ConvOptions, ZVector};
use banach_lab_core::dividing::{
    default_sop_samples, double_limit_table, independence_witness_search, summing_basis_value,
    ConstantPhi, IndependenceConfig, IndependenceFamily, L2BasisPhi, LimitVerdict, MatrixFormula,
    SearchBudget, SummingBasisPhi,
};
use banach_lab_core::probe::{d_metric_lower, packing_stats, BallNet, ProbeError};
use banach_lab_core::report;
use banach_lab_core::tsirelson::{
    admissible_families, tsirelson_iterates, tsirelson_norm_with, TsBudget, TsirelsonError,
};
use banach_lab_core::vector::{FiniteVector, NormSpace, Rat};
use banach_lab_core::{ambient::NormError, rat_int};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "banach-lab", version, about = "Exact computations on finitely supported vectors: Tsirelson norm, lp/c0 equivalence certificates, dividing-line checkers")]
struct Cli {
    /// Cap on worker parallelism (fallback: BANACH_LAB_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized samplers; fully determines their behavior.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report to this path (atomic: temp file + rename).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the CSV matrix to this path, for commands that produce one.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Print the full JSON report to stdout instead of the terse summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tsirelson norm: exact value, defining iterates, admissible families.
    Tsirelson {
        #[command(subcommand)]
        cmd: TsirelsonCmd,
    },
    /// Equivalence constants and epsilon-lp/c0-type checks.
    Certify {
        #[command(subcommand)]
        cmd: CertifyCmd,
    },
    /// Dividing-line witnesses: independence, order property, SOP.
    Witness {
        #[command(subcommand)]
        cmd: WitnessCmd,
    },
    /// Worked tables.
    Table {
        #[command(subcommand)]
        cmd: TableCmd,
    },
    /// Convolution formula on l1(Z).
    Phi {
        #[command(subcommand)]
        cmd: PhiCmd,
    },
    /// Type-space probes: d-metric lower bounds and packing statistics.
    Probe {
        #[command(subcommand)]
        cmd: ProbeCmd,
    },
}

#[derive(Subcommand)]
enum TsirelsonCmd {
    /// Exact Tsirelson norm with the fixed-point witness tree.
    Norm {
        /// Vector: `e<k>`, `s<k>`, inline JSON entries, or @file.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 20)]
        max_support: usize,
        #[arg(long, default_value_t = 40)]
        max_span: u32,
        /// Also include the defining iterates up to this level.
        #[arg(long)]
        with_iterates: Option<usize>,
    },
    /// The defining iterates ||x||_0 .. ||x||_N.
    Iterates {
        #[arg(long)]
        vector: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 20)]
        max_support: usize,
        #[arg(long, default_value_t = 40)]
        max_span: u32,
    },
    /// Stream admissible interval families inside [lo, hi].
    Families {
        #[arg(long)]
        lo: u32,
        #[arg(long)]
        hi: u32,
        #[arg(long)]
        max_pieces: usize,
        /// Stop after this many families.
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
    },
}

#[derive(Args)]
struct CertifyCommon {
    /// Vector system: comma-separated shorthands (`e1,e2`) or repeated flags.
    #[arg(long, required = true)]
    vectors: Vec<String>,
    /// Reference exponent: a rational >= 1, or `inf` for the c0 type.
    #[arg(long)]
    p: String,
    /// Ambient norm: sup | c0 | tsirelson | l1 | l2 | lp:<rational>.
    #[arg(long)]
    ambient: String,
    #[arg(long, default_value_t = 200_000)]
    max_evals: usize,
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// Two-sided equivalence constants with witnesses.
    Constants {
        #[command(flatten)]
        common: CertifyCommon,
    },
    /// Check the epsilon-lp-type (or epsilon-c0-type) inequalities.
    Type {
        #[command(flatten)]
        common: CertifyCommon,
        #[arg(long)]
        eps: String,
    },
    /// Best-effort search for block vectors realizing the type.
    Blockrep {
        /// Ambient norm tag.
        #[arg(long)]
        ambient: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        eps: String,
        /// Number of successive blocks minus one (returns n+1 vectors).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        basis_range: u32,
        #[arg(long, default_value_t = 200_000)]
        max_evals: usize,
    },
}

#[derive(Subcommand)]
enum WitnessCmd {
    /// Fill every disjoint (P, M) pair with a verified witness.
    Independence {
        /// Bundled family: c0 | l2 (both are f_n(x) = ||x + e_n||).
        #[arg(long)]
        family: String,
        /// Threshold s: the P side needs f_n(x) < s.
        #[arg(long)]
        s: String,
        /// Threshold r: the M side needs f_n(x) > r.
        #[arg(long)]
        r: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        samples_per_pair: usize,
        #[arg(long, default_value_t = 500_000)]
        max_evals: usize,
        /// Include the full per-pair witness map in the report.
        #[arg(long)]
        full_pairs: bool,
    },
    /// Double-limit table and order-property verdict.
    OrderProperty {
        /// Bundled example: c0-summing | l2-basis | const:<rational>.
        #[arg(long)]
        example: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/10")]
        tol: String,
    },
    /// Monotone-plus-strict-chain check for psi on c0.
    Sop {
        #[arg(long)]
        depth: usize,
        /// Ball-net extent for the sampled monotone part.
        #[arg(long, default_value_t = 10)]
        max_index: u32,
    },
}

#[derive(Subcommand)]
enum TableCmd {
    /// The ||e_m + s_n|| table (2 when m <= n, else 1).
    SummingBasis {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Subcommand)]
enum PhiCmd {
    /// Certified enclosure of min { ||x*z - y||_1 : ||z||_1 <= 1 }.
    Conv {
        /// x on Z: `d<k>` (shifted delta), `b<i>` (binomial kernel), JSON, or @file.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        halfwidth: u32,
        #[arg(long, default_value = "1/1000000000")]
        tol: String,
        #[arg(long, default_value_t = 200_000)]
        max_pivots: usize,
    },
}

#[derive(Args)]
struct NetArgs {
    /// Net generation: largest coordinate index.
    #[arg(long, default_value_t = 3)]
    net_max_index: u32,
    /// Net generation: grid step denominator (step = 1/denominator).
    #[arg(long, default_value_t = 4)]
    net_step: u32,
    /// Refuse nets larger than this.
    #[arg(long, default_value_t = 200_000)]
    net_cap: usize,
    /// Use explicit net points instead of the generated grid.
    #[arg(long)]
    net_point: Vec<String>,
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Net-restricted lower bound on the d-metric between trivial types.
    Dmetric {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        ambient: String,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Greedy epsilon-packing of a family of trivial types.
    Packing {
        #[arg(long, required = true)]
        family: Vec<String>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        ambient: String,
        #[command(flatten)]
        net: NetArgs,
    },
}

/// A failure with a chosen exit code.
struct CliFailure {
    code: u8,
    message: String,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> Self {
        CliFailure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
    fn budget(message: impl Into<String>) -> Self {
        CliFailure {
            code: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for CliFailure {
    fn from(e: anyhow::Error) -> Self {
        CliFailure::usage(format!("{e:#}"))
    }
}

impl From<TsirelsonError> for CliFailure {
    fn from(e: TsirelsonError) -> Self {
        match e {
            TsirelsonError::SupportBudget { .. } | TsirelsonError::SpanBudget { .. } => {
                CliFailure::budget(e.to_string())
            }
            other => CliFailure::usage(other.to_string()),
        }
    }
}

impl From<NormError> for CliFailure {
    fn from(e: NormError) -> Self {
        match e {
            NormError::Tsirelson(t) => t.into(),
            other => CliFailure::usage(other.to_string()),
        }
    }
}

impl From<CertifyError> for CliFailure {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Norm(n) => n.into(),
            other => CliFailure::usage(other.to_string()),
        }
    }
}

impl From<ConvError> for CliFailure {
    fn from(e: ConvError) -> Self {
        match e {
            ConvError::Lp(lp) => CliFailure::budget(lp.to_string()),
            other => CliFailure::usage(other.to_string()),
        }
    }
}

impl From<ProbeError> for CliFailure {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::NetTooLarge(_, _) => CliFailure::budget(e.to_string()),
            ProbeError::Norm(n) => n.into(),
            other => CliFailure::usage(other.to_string()),
        }
    }
}

/// Parse a rational that may be written as `num/den`, an integer, or a
/// decimal like `0.1`.
fn parse_rat(s: &str) -> Result<Rat, CliFailure> {
    let s = s.trim();
    if let Some(dot) = s.find('.') {
        let (int_part, frac_part) = s.split_at(dot);
        let frac_part = &frac_part[1..];
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(CliFailure::usage(format!("bad decimal `{s}`")));
        }
        let negative = int_part.starts_with('-');
        let int_val: Rat = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            rat_int(0)
        } else {
            int_part
                .parse()
                .map_err(|e| CliFailure::usage(format!("bad number `{s}`: {e}")))?
        };
        let mut denom = rat_int(1);
        for _ in 0..frac_part.len() {
            denom *= rat_int(10);
        }
        let numer: Rat = frac_part
            .parse()
            .map_err(|e| CliFailure::usage(format!("bad decimal `{s}`: {e}")))?;
        let frac = numer / denom;
        Ok(if negative { int_val - frac } else { int_val + frac })
    } else {
        s.parse()
            .map_err(|e| CliFailure::usage(format!("bad rational `{s}`: {e}")))
    }
}

/// Parse a vector spec: `e<k>` (basis), `s<k>` (summing), `@path`, or
/// inline JSON (bare entries array or wrapped object).
fn parse_vector(spec: &str) -> Result<FiniteVector, CliFailure> {
    let spec = spec.trim();
    if let Some(k) = spec.strip_prefix('e').and_then(|t| t.parse::<u32>().ok()) {
        if k >= 1 {
            return Ok(FiniteVector::basis(k));
        }
    }
    if let Some(k) = spec.strip_prefix('s').and_then(|t| t.parse::<u32>().ok()) {
        return Ok(FiniteVector::summing(k));
    }
    let text = if let Some(path) = spec.strip_prefix('@') {
        std::fs::read_to_string(path)
            .with_context(|| format!("reading vector file {path}"))
            .map_err(CliFailure::from)?
    } else {
        spec.to_string()
    };
    FiniteVector::from_json_str(&text).map_err(|e| CliFailure::usage(e.to_string()))
}

/// Expand `e1,e2`-style shorthand lists; JSON specs pass through untouched.
fn parse_vector_list(specs: &[String]) -> Result<Vec<FiniteVector>, CliFailure> {
    let mut out = Vec::new();
    for spec in specs {
        if !spec.contains('[') && spec.contains(',') {
            for part in spec.split(',') {
                out.push(parse_vector(part)?);
            }
        } else {
            out.push(parse_vector(spec)?);
        }
    }
    Ok(out)
}

/// Parse a Z-indexed vector: `d<k>` (delta at k, `d0` is the identity),
/// `b<i>` (binomial kernel), `@path`, or inline JSON.
fn parse_zvector(spec: &str) -> Result<ZVector, CliFailure> {
    let spec = spec.trim();
    if let Some(k) = spec.strip_prefix('d').and_then(|t| t.parse::<i64>().ok()) {
        return Ok(ZVector::delta(k));
    }
    if let Some(i) = spec.strip_prefix('b').and_then(|t| t.parse::<u32>().ok()) {
        return Ok(binomial_kernel(i));
    }
    let text = if let Some(path) = spec.strip_prefix('@') {
        std::fs::read_to_string(path)
            .with_context(|| format!("reading vector file {path}"))
            .map_err(CliFailure::from)?
    } else {
        spec.to_string()
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliFailure::usage(format!(
            "malformed vector JSON: {e} (line {}, column {})",
            e.line(),
            e.column()
        ))
    })?;
    ZVector::from_json(&value).map_err(|e| CliFailure::usage(e.to_string()))
}

fn parse_space(tag: &str) -> Result<NormSpace, CliFailure> {
    NormSpace::parse(tag).map_err(|e| CliFailure::usage(e.to_string()))
}

fn parse_exponent(tag: &str) -> Result<PExponent, CliFailure> {
    if let Ok(p) = PExponent::parse(tag) {
        return Ok(p);
    }
    // allow decimals like 1.5
    let r = parse_rat(tag)?;
    PExponent::finite(r).map_err(|e| CliFailure::usage(e.to_string()))
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliFailure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| CliFailure::usage(format!("creating temp file: {e}")))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| CliFailure::usage(format!("writing report: {e}")))?;
    tmp.persist(path)
        .map_err(|e| CliFailure::usage(format!("renaming report into place: {e}")))?;
    Ok(())
}

struct Output {
    /// Terse one-line summary for stdout.
    summary: String,
    report: Value,
    csv: Option<String>,
}

fn net_from_args(ambient: &NormSpace, net: &NetArgs) -> Result<BallNet, CliFailure> {
    if net.net_point.is_empty() {
        if net.net_max_index < 1 || net.net_step < 1 {
            return Err(CliFailure::usage(
                "net-max-index and net-step must be at least 1",
            ));
        }
        Ok(BallNet::generate(
            ambient.clone(),
            net.net_max_index,
            net.net_step,
            net.net_cap,
        )?)
    } else {
        let points = parse_vector_list(&net.net_point)?;
        Ok(BallNet::from_points(ambient.clone(), points)?)
    }
}

fn run(cli: &Cli) -> Result<Output, CliFailure> {
    match &cli.command {
        Command::Tsirelson { cmd } => run_tsirelson(cmd),
        Command::Certify { cmd } => run_certify(cmd),
        Command::Witness { cmd } => run_witness(cmd, cli.seed),
        Command::Table { cmd } => run_table(cmd),
        Command::Phi { cmd } => run_phi(cmd),
        Command::Probe { cmd } => run_probe(cmd),
    }
}

fn run_tsirelson(cmd: &TsirelsonCmd) -> Result<Output, CliFailure> {
    match cmd {
        TsirelsonCmd::Norm {
            vector,
            max_support,
            max_span,
            with_iterates,
        } => {
            let x = parse_vector(vector)?;
            let budget = TsBudget {
                max_support: *max_support,
                max_span: *max_span,
            };
            let mut comp = tsirelson_norm_with(&x, &budget)?;
            if let Some(steps) = with_iterates {
                comp = comp.with_iterates(*steps, &budget)?;
            }
            Ok(Output {
                summary: comp.value.to_string(),
                report: report::envelope("tsirelson-norm", report::norm_computation_json(&comp)),
                csv: None,
            })
        }
        TsirelsonCmd::Iterates {
            vector,
            steps,
            max_support,
            max_span,
        } => {
            let x = parse_vector(vector)?;
            let budget = TsBudget {
                max_support: *max_support,
                max_span: *max_span,
            };
            let its = tsirelson_iterates(&x, *steps, &budget)?;
            let summary = its
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            Ok(Output {
                summary,
                report: report::envelope("tsirelson-iterates", report::iterates_json(&x, &its)),
                csv: None,
            })
        }
        TsirelsonCmd::Families {
            lo,
            hi,
            max_pieces,
            limit,
        } => {
            let stream = admissible_families(*lo, *hi, *max_pieces)?;
            let mut families = Vec::new();
            let mut truncated = false;
            for f in stream {
                if families.len() >= *limit {
                    truncated = true;
                    break;
                }
                families.push(f);
            }
            Ok(Output {
                summary: format!(
                    "{} families{}",
                    families.len(),
                    if truncated { " (truncated)" } else { "" }
                ),
                report: report::envelope(
                    "admissible-families",
                    report::families_json(&families, truncated),
                ),
                csv: None,
            })
        }
    }
}

fn certify_budget(max_evals: usize) -> CertifyBudget {
    CertifyBudget {
        max_evals,
        ..CertifyBudget::default()
    }
}

fn run_certify(cmd: &CertifyCmd) -> Result<Output, CliFailure> {
    match cmd {
        CertifyCmd::Constants { common } => {
            let xs = parse_vector_list(&common.vectors)?;
            let p = parse_exponent(&common.p)?;
            let ambient = parse_space(&common.ambient)?;
            let cert = equivalence_constants(&xs, &p, &ambient, &certify_budget(common.max_evals))?;
            Ok(Output {
                summary: format!(
                    "c_lower in {}, c_upper in {}{}",
                    cert.c_lower,
                    cert.c_upper,
                    if cert.conclusive { "" } else { " (inconclusive)" }
                ),
                report: report::envelope("equivalence-constants", report::certificate_json(&cert)),
                csv: None,
            })
        }
        CertifyCmd::Type { common, eps } => {
            let xs = parse_vector_list(&common.vectors)?;
            let p = parse_exponent(&common.p)?;
            let ambient = parse_space(&common.ambient)?;
            let eps = parse_rat(eps)?;
            if eps < rat_int(0) {
                return Err(CliFailure::usage("eps must be nonnegative"));
            }
            let res = check_eps_lp_type(&xs, &p, &eps, &ambient, &certify_budget(common.max_evals))?;
            let summary = match res.verdict {
                banach_lab_core::certify::TypeVerdict::Pass => "pass".to_string(),
                banach_lab_core::certify::TypeVerdict::Violation => format!(
                    "violation (margin {})",
                    res.margin.as_ref().expect("violations carry a margin")
                ),
                banach_lab_core::certify::TypeVerdict::Inconclusive => "inconclusive".to_string(),
            };
            Ok(Output {
                summary,
                report: report::envelope("eps-type-check", report::type_check_json(&res)),
                csv: None,
            })
        }
        CertifyCmd::Blockrep {
            ambient,
            p,
            eps,
            n,
            basis_range,
            max_evals,
        } => {
            let ambient = parse_space(ambient)?;
            let p = parse_exponent(p)?;
            let eps = parse_rat(eps)?;
            if *n < 1 {
                return Err(CliFailure::usage("n must be at least 1"));
            }
            if eps <= rat_int(0) {
                return Err(CliFailure::usage("eps must be positive"));
            }
            let res = block_rep_search(&ambient, *basis_range, &p, &eps, *n, &certify_budget(*max_evals))?;
            Ok(Output {
                summary: if res.blocks.is_some() {
                    format!("success after {} attempts", res.attempts)
                } else {
                    format!(
                        "no passing blocks found ({} attempts, best score {})",
                        res.attempts, res.best_score
                    )
                },
                report: report::envelope("block-representation", report::block_rep_json(&res)),
                csv: None,
            })
        }
    }
}

fn run_witness(cmd: &WitnessCmd, seed: u64) -> Result<Output, CliFailure> {
    match cmd {
        WitnessCmd::Independence {
            family,
            s,
            r,
            depth,
            samples_per_pair,
            max_evals,
            full_pairs,
        } => {
            let fam = match family.as_str() {
                "c0" => IndependenceFamily::c0_plus_basis(),
                "l2" => IndependenceFamily::l2_plus_basis(),
                other => {
                    return Err(CliFailure::usage(format!(
                        "unknown family `{other}` (expected c0 or l2)"
                    )))
                }
            };
            let cfg = IndependenceConfig {
                below: parse_rat(s)?,
                above: parse_rat(r)?,
                depth: *depth,
                seed,
                budget: SearchBudget {
                    samples_per_pair: *samples_per_pair,
                    max_evals: *max_evals,
                },
            };
            if cfg.below >= cfg.above {
                return Err(CliFailure::usage("need s < r"));
            }
            let rep = independence_witness_search(&fam, &cfg)
                .map_err(|e| CliFailure::usage(e.to_string()))?;
            Ok(Output {
                summary: if rep.independent_at_depth {
                    format!("independent at depth {} ({} pairs filled)", rep.depth, rep.pairs.len())
                } else {
                    let unfilled = rep
                        .pairs
                        .iter()
                        .filter(|p| !matches!(p.status, banach_lab_core::dividing::PairStatus::Filled { .. }))
                        .count();
                    format!("{unfilled} of {} pairs unfilled at depth {}", rep.pairs.len(), rep.depth)
                },
                report: report::envelope(
                    "independence-witnesses",
                    report::witness_report_json(&rep, *full_pairs),
                ),
                csv: None,
            })
        }
        WitnessCmd::OrderProperty { example, m, n, tol } => {
            let tol = parse_rat(tol)?;
            let formula: Box<dyn MatrixFormula> = match example.as_str() {
                "c0-summing" => Box::new(SummingBasisPhi),
                "l2-basis" => Box::new(L2BasisPhi::default()),
                other => {
                    if let Some(c) = other.strip_prefix("const:") {
                        Box::new(ConstantPhi(parse_rat(c)?))
                    } else {
                        return Err(CliFailure::usage(format!(
                            "unknown example `{other}` (expected c0-summing, l2-basis, const:<rational>)"
                        )));
                    }
                }
            };
            let rep = double_limit_table(formula.as_ref(), *m, *n, &tol)
                .map_err(|e| CliFailure::usage(e.to_string()))?;
            let verdict = match rep.verdict {
                LimitVerdict::OrderPropertyWitnessed => "order-property-witnessed",
                LimitVerdict::ConsistentWithStability => "consistent-with-stability",
                LimitVerdict::Inconclusive => "inconclusive",
            };
            let csv = report::matrix_csv(&rep);
            Ok(Output {
                summary: format!(
                    "{verdict}: iterated limits {} and {}",
                    rep.row_then_column, rep.column_then_row
                ),
                report: report::envelope("order-property", report::double_limit_json(&rep, true)),
                csv: Some(csv),
            })
        }
        WitnessCmd::Sop { depth, max_index } => {
            let samples = default_sop_samples(*max_index);
            let rep = sop_check(*depth, &samples);
            Ok(Output {
                summary: if rep.pass {
                    format!("pass at depth {depth} ({} samples)", rep.samples)
                } else {
                    format!("{} violations at depth {depth}", rep.violations.len())
                },
                report: report::envelope("sop-check", report::sop_report_json(&rep)),
                csv: None,
            })
        }
    }
}

fn sop_check(depth: usize, samples: &[FiniteVector]) -> banach_lab_core::dividing::SopReport {
    banach_lab_core::dividing::sop_monotonicity_check(depth, samples)
}

fn run_table(cmd: &TableCmd) -> Result<Output, CliFailure> {
    match cmd {
        TableCmd::SummingBasis { m, n } => {
            if *m < 1 || *n < 1 {
                return Err(CliFailure::usage("m and n must be at least 1"));
            }
            let mut rows = Vec::new();
            let mut csv = String::new();
            let mut header = vec!["m\\n".to_string()];
            for j in 1..=*n {
                header.push(j.to_string());
            }
            csv.push_str(&header.join(","));
            csv.push('\n');
            for i in 1..=*m {
                let mut row_json = Vec::new();
                let mut line = vec![i.to_string()];
                for j in 1..=*n {
                    let v = summing_basis_value(i, j);
                    line.push(v.to_string());
                    row_json.push(Value::String(v.to_string()));
                }
                csv.push_str(&line.join(","));
                csv.push('\n');
                rows.push(Value::Array(row_json));
            }
            Ok(Output {
                summary: csv.trim_end().to_string(),
                report: report::envelope(
                    "summing-basis-table",
                    json!({ "m": m, "n": n, "matrix": rows }),
                ),
                csv: Some(csv),
            })
        }
    }
}

fn run_phi(cmd: &PhiCmd) -> Result<Output, CliFailure> {
    match cmd {
        PhiCmd::Conv {
            x,
            y,
            halfwidth,
            tol,
            max_pivots,
        } => {
            let x = parse_zvector(x)?;
            let y = parse_zvector(y)?;
            let opts = ConvOptions {
                tol: parse_rat(tol)?,
                max_pivots: *max_pivots,
            };
            let rep = convolution_phi(&x, &y, *halfwidth, &opts)?;
            Ok(Output {
                summary: format!(
                    "{}{}",
                    rep.value,
                    if rep.optimal { "" } else { " (pivot budget hit, widened)" }
                ),
                report: report::envelope("convolution-phi", report::conv_report_json(&rep)),
                csv: None,
            })
        }
    }
}

fn run_probe(cmd: &ProbeCmd) -> Result<Output, CliFailure> {
    match cmd {
        ProbeCmd::Dmetric { a, b, ambient, net } => {
            let ambient = parse_space(ambient)?;
            let a = parse_vector(a)?;
            let b = parse_vector(b)?;
            let ball = net_from_args(&ambient, net)?;
            let d = d_metric_lower(&a, &b, &ball)?;
            Ok(Output {
                summary: format!("d >= {}", d),
                report: report::envelope(
                    "d-metric-lower",
                    json!({
                        "a": report::vector_json(&a),
                        "b": report::vector_json(&b),
                        "ambient": ambient.to_string(),
                        "net_points": ball.len(),
                        "lower_bound": report::enclosure_json(&d),
                    }),
                ),
                csv: None,
            })
        }
        ProbeCmd::Packing {
            family,
            eps,
            ambient,
            net,
        } => {
            let ambient = parse_space(ambient)?;
            let family = parse_vector_list(family)?;
            let eps = parse_rat(eps)?;
            let ball = net_from_args(&ambient, net)?;
            let rep = packing_stats(&family, &eps, &ball)?;
            let csv = report::packing_csv(&rep);
            Ok(Output {
                summary: format!("packing count {}", rep.selected.len()),
                report: report::envelope("packing-stats", report::packing_json(&rep)),
                csv: Some(csv),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.or_else(|| {
        std::env::var("BANACH_LAB_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        // a failure here only means the pool was already initialized
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match run(&cli) {
        Ok(output) => {
            let mut report = output.report;
            report["seed"] = json!(cli.seed);
            let text = report::to_canonical_string(&report);
            if cli.json {
                println!("{text}");
            } else {
                println!("{}", output.summary);
            }
            if let Some(path) = &cli.out {
                if let Err(f) = write_atomic(path, &text) {
                    eprintln!("error: {}", f.message);
                    return ExitCode::from(f.code);
                }
            }
            if let Some(path) = &cli.csv {
                match &output.csv {
                    Some(csv) => {
                        if let Err(f) = write_atomic(path, csv) {
                            eprintln!("error: {}", f.message);
                            return ExitCode::from(f.code);
                        }
                    }
                    None => {
                        eprintln!("error: this command does not produce a CSV matrix");
                        return ExitCode::from(EXIT_USAGE);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

