//! `zerosum`: invariants of zero-sum sequences over finite abelian groups.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 a verdict came out
//! false, 3 a resource cap or timeout was hit.

mod output;

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use zerosum::factorization::{factorizations, lengths};
use zerosum::invariants::{catenary_group, daleth, daleth_lower_bound, rho, Catenary, CatenaryReason, PairWitness};
use zerosum::krull::{transfer_check, TransferSummary};
use zerosum::report::{default_suite, InvariantReport, Workbench, SCHEMA_VERSION};
use zerosum::verify::{verify_catenary_classes, verify_near_maximal, verify_pair_pattern, Status, Target, Verdict};
use zerosum::{Error, GroupSpec, Limits, Sequence};

use output::{emit, join, Format, Render};

#[derive(Parser)]
#[command(name = "zerosum", version, about = "Invariants of zero-sum sequences over finite abelian groups")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Largest group order accepted
    #[arg(long, global = true, env = "ZEROSUM_MAX_GROUP_ORDER", default_value_t = 256,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_group_order: u64,

    /// Longest block that may be factored (default: 2 D(G))
    #[arg(long, global = true, env = "ZEROSUM_MAX_BLOCK_LEN", value_parser = clap::value_parser!(u64).range(1..))]
    max_block_len: Option<u64>,

    /// Most factorizations enumerated for one block
    #[arg(long, global = true, env = "ZEROSUM_MAX_FACTORIZATIONS", default_value_t = 2_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_factorizations: u64,

    /// Most automorphisms generated for orbit reduction
    #[arg(long, global = true, env = "ZEROSUM_MAX_AUTOMORPHISMS", default_value_t = 1_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_automorphisms: u64,

    /// Wall-clock budget per task, in seconds
    #[arg(long, global = true, env = "ZEROSUM_TIMEOUT", value_parser = clap::value_parser!(u64).range(1..))]
    timeout: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "ZEROSUM_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

impl RunConfig {
    fn limits(&self) -> Limits {
        Limits {
            max_group_order: self.max_group_order as usize,
            max_block_len: self.max_block_len.map(|n| n as usize),
            max_factorizations: self.max_factorizations as usize,
            max_automorphisms: self.max_automorphisms as usize,
            timeout: self.timeout.map(Duration::from_secs),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the minimal zero-sum sequences
    Atoms {
        #[arg(long)]
        group: GroupSpec,
        /// Only atoms of this length
        #[arg(long)]
        length: Option<usize>,
    },
    /// Davenport constant
    Davenport {
        #[arg(long)]
        group: GroupSpec,
    },
    /// Set of lengths of a zero-sum sequence
    Lengths {
        #[arg(long)]
        group: GroupSpec,
        /// Sequence literal such as "(1,0)^2 (0,1)"
        #[arg(long)]
        block: String,
    },
    /// Catenary degree of a zero-sum sequence
    CatenaryElement {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        block: String,
    },
    /// The invariant daleth: largest min (L \ {2}) over products of two atoms
    Daleth {
        #[arg(long)]
        group: GroupSpec,
    },
    /// Catenary degree of the group, exact or as an interval
    Catenary {
        #[arg(long)]
        group: GroupSpec,
    },
    /// Refined elasticity rho_k
    Rho {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Check a characterization on one group
    Verify {
        #[arg(long)]
        group: GroupSpec,
        /// catenary-classes, near-maximal, full-pair-top, full-pair-gap,
        /// mixed-pair-gap, short-pair-gap, or all
        #[arg(long, default_value = "all")]
        target: String,
    },
    /// Full invariant report for a list of groups
    Report {
        /// Groups separated by ';', e.g. "2,4;4,4" (default: the standard suite)
        #[arg(long)]
        groups: Option<String>,
    },
    /// Compare lengths in random Krull monoids with their block monoids
    TransferCheck {
        /// Fixed class group (default: random groups of order at most 8)
        #[arg(long)]
        group: Option<GroupSpec>,
        #[arg(long, default_value_t = 200)]
        models: usize,
        /// Random elements per model
        #[arg(long, default_value_t = 5)]
        elements: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.config.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out).and_then(|ok| Ok(out.flush().map(|_| ok)?)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { 3 } else { 1 })
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Runs one command; `Ok(false)` means some verdict is false.
fn run(cli: &Cli, out: &mut impl Write) -> Outcome {
    let limits = cli.config.limits();
    let format = cli.config.format;
    match &cli.command {
        Command::Atoms { group, length } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let atoms = bench.atoms();
            let chosen: Vec<&Sequence> = atoms.atoms().iter().filter(|a| length.is_none_or(|l| a.len() == l)).collect();
            let doc = AtomsOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                davenport: atoms.davenport(),
                count: chosen.len(),
                atoms: chosen.iter().map(|a| a.to_string()).collect(),
                lengths: chosen.iter().map(|a| a.len()).collect(),
            };
            emit(&[doc], format, out)?;
        }
        Command::Davenport { group } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let d = bench.atoms().davenport();
            let doc = DavenportOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                davenport: d,
                formula: group.davenport_formula(),
                matches_formula: d == group.davenport_formula(),
            };
            emit(&[doc], format, out)?;
        }
        Command::Lengths { group, block } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let b = Sequence::parse(bench.group().clone(), block)?;
            let l = lengths(&b, bench.atoms(), &limits)?;
            let doc = LengthsOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                block: b.to_string(),
                lengths: l,
            };
            emit(&[doc], format, out)?;
        }
        Command::CatenaryElement { group, block } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let b = Sequence::parse(bench.group().clone(), block)?;
            let z = factorizations(&b, bench.atoms(), &limits)?;
            let doc = ElementCatenaryOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                block: b.to_string(),
                catenary: z.catenary(),
                factorizations: z.factorizations().len(),
                lengths: z.lengths().clone(),
            };
            emit(&[doc], format, out)?;
        }
        Command::Daleth { group } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let space = bench.pair_space(&limits)?;
            let d = daleth(&space, &limits)?;
            let doc = DalethOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                daleth: d.value,
                lower_bound: daleth_lower_bound(group),
                witness: d.witness,
                pairs_examined: d.pairs_examined,
            };
            emit(&[doc], format, out)?;
        }
        Command::Catenary { group } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let space = bench.pair_space(&limits)?;
            let d = daleth(&space, &limits)?;
            let c = catenary_group(&space, &d, &limits)?;
            let doc = CatenaryOut {
                schema_version: SCHEMA_VERSION,
                group: group.to_string(),
                catenary: c.value,
                reason: c.reason,
                daleth: d.value,
                davenport: bench.atoms().davenport(),
            };
            emit(&[doc], format, out)?;
        }
        Command::Rho { group, k } => {
            let bench = Workbench::new(group.clone(), &limits)?;
            let space = bench.pair_space(&limits)?;
            let r = rho(&space, *k, &limits)?;
            let doc = RhoOut { schema_version: SCHEMA_VERSION, group: group.to_string(), k: *k, rho: r };
            emit(&[doc], format, out)?;
        }
        Command::Verify { group, target } => {
            let targets: Vec<Target> = if target == "all" { Target::ALL.to_vec() } else { vec![target.parse()?] };
            let verdicts = verify(group, &targets, &limits)?;
            let ok = !verdicts.iter().any(Verdict::is_failure);
            let doc = VerifyOut { schema_version: SCHEMA_VERSION, group: group.to_string(), all_hold: ok, verdicts };
            emit(&[doc], format, out)?;
            return Ok(ok);
        }
        Command::Report { groups } => {
            let specs = match groups {
                Some(g) => g
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(GroupSpec::parse)
                    .collect::<Result<Vec<_>, _>>()?,
                None => default_suite(),
            };
            let mut ok = true;
            for spec in &specs {
                // one line per group as soon as it is done
                let r = ReportOut(InvariantReport::compute(spec, &limits)?);
                ok &= !r.0.any_failure();
                for v in r.0.violations() {
                    eprintln!("warning: {}: {v}", r.0.group);
                    ok = false;
                }
                match format {
                    Format::Json => emit(&[r], format, out)?,
                    _ => emit_rows_only(&r, format, spec == &specs[0], out)?,
                }
                out.flush()?;
            }
            return Ok(ok);
        }
        Command::TransferCheck { group, models, elements, seed } => {
            let s = transfer_check(group.as_ref(), *models, *elements, *seed, &limits)?;
            for f in &s.failures {
                eprintln!("mismatch: {f}");
            }
            let ok = s.passed;
            emit(&[TransferOut(s)], format, out)?;
            return Ok(ok);
        }
    }
    Ok(true)
}

/// CSV/table output for streamed reports: header only before the first group.
fn emit_rows_only(r: &ReportOut, format: Format, first: bool, out: &mut impl Write) -> Result<(), Failure> {
    if first {
        return Ok(emit(std::slice::from_ref(r), format, out)?);
    }
    let mut buf = Vec::new();
    emit(std::slice::from_ref(r), format, &mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    let skip = if format == Format::Table { 2 } else { 1 };
    for line in text.lines().skip(skip) {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn verify(group: &GroupSpec, targets: &[Target], limits: &Limits) -> Result<Vec<Verdict>, Error> {
    let bench = Workbench::new(group.clone(), limits)?;
    let space = bench.pair_space(limits)?;
    let d = bench.atoms().davenport();
    let needs_catenary = targets.iter().any(|t| matches!(t, Target::CatenaryClasses | Target::NearMaximal));
    let invariants = if needs_catenary && group.order() >= 3 {
        let dal = daleth(&space, limits)?;
        let cat = catenary_group(&space, &dal, limits)?;
        Some((dal, cat))
    } else {
        None
    };
    let mut out = Vec::new();
    for &t in targets {
        out.push(match (t, &invariants) {
            (Target::CatenaryClasses, Some((_, c))) => verify_catenary_classes(group, d, c),
            (Target::NearMaximal, Some((dal, c))) => verify_near_maximal(group, d, dal, c),
            (Target::CatenaryClasses | Target::NearMaximal, None) => Verdict {
                target: t,
                status: Status::NotApplicable,
                detail: "requires |G| >= 3".into(),
                witness: None,
                construction: None,
                pairs_examined: None,
                matches: None,
            },
            _ => verify_pair_pattern(&space, t, limits)?,
        });
    }
    Ok(out)
}

fn status_cell(s: Status) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn witness_cells(w: &Option<PairWitness>) -> [String; 3] {
    match w {
        Some(w) => [w.u.clone(), w.v.clone(), join(&w.lengths, " ")],
        None => Default::default(),
    }
}

#[derive(Serialize)]
struct AtomsOut {
    schema_version: u32,
    group: String,
    davenport: usize,
    count: usize,
    atoms: Vec<String>,
    #[serde(skip)]
    lengths: Vec<usize>,
}

impl Render for AtomsOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "length", "atom"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.atoms.iter().zip(&self.lengths).map(|(a, l)| vec![self.group.clone(), l.to_string(), a.clone()]).collect()
    }
}

#[derive(Serialize)]
struct DavenportOut {
    schema_version: u32,
    group: String,
    davenport: usize,
    formula: usize,
    matches_formula: bool,
}

impl Render for DavenportOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "davenport", "formula", "matches_formula"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.group.clone(),
            self.davenport.to_string(),
            self.formula.to_string(),
            self.matches_formula.to_string(),
        ]]
    }
}

#[derive(Serialize)]
struct LengthsOut {
    schema_version: u32,
    group: String,
    block: String,
    lengths: BTreeSet<usize>,
}

impl Render for LengthsOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "block", "lengths"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![self.group.clone(), self.block.clone(), join(&self.lengths, " ")]]
    }
}

#[derive(Serialize)]
struct ElementCatenaryOut {
    schema_version: u32,
    group: String,
    block: String,
    catenary: usize,
    factorizations: usize,
    lengths: BTreeSet<usize>,
}

impl Render for ElementCatenaryOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "block", "catenary", "factorizations", "lengths"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.group.clone(),
            self.block.clone(),
            self.catenary.to_string(),
            self.factorizations.to_string(),
            join(&self.lengths, " "),
        ]]
    }
}

#[derive(Serialize)]
struct DalethOut {
    schema_version: u32,
    group: String,
    daleth: usize,
    lower_bound: usize,
    witness: Option<PairWitness>,
    pairs_examined: usize,
}

impl Render for DalethOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "daleth", "lower_bound", "witness_u", "witness_v", "witness_lengths", "pairs_examined"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let [u, v, l] = witness_cells(&self.witness);
        vec![vec![
            self.group.clone(),
            self.daleth.to_string(),
            self.lower_bound.to_string(),
            u,
            v,
            l,
            self.pairs_examined.to_string(),
        ]]
    }
}

#[derive(Serialize)]
struct CatenaryOut {
    schema_version: u32,
    group: String,
    catenary: Catenary,
    reason: CatenaryReason,
    daleth: usize,
    davenport: usize,
}

impl Render for CatenaryOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "catenary", "reason", "daleth", "davenport"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.group.clone(),
            self.catenary.to_string(),
            self.reason.to_string(),
            self.daleth.to_string(),
            self.davenport.to_string(),
        ]]
    }
}

#[derive(Serialize)]
struct RhoOut {
    schema_version: u32,
    group: String,
    k: usize,
    rho: usize,
}

impl Render for RhoOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "k", "rho"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![self.group.clone(), self.k.to_string(), self.rho.to_string()]]
    }
}

#[derive(Serialize)]
struct VerifyOut {
    schema_version: u32,
    group: String,
    all_hold: bool,
    verdicts: Vec<Verdict>,
}

impl Render for VerifyOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["group", "target", "status", "detail", "witness_u", "witness_v", "witness_lengths"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.verdicts
            .iter()
            .map(|v| {
                let [u, w, l] = witness_cells(&v.witness);
                vec![self.group.clone(), v.target.to_string(), status_cell(v.status), v.detail.clone(), u, w, l]
            })
            .collect()
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct ReportOut(InvariantReport);

impl Render for ReportOut {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "group",
            "davenport",
            "atoms",
            "daleth",
            "daleth_lower_bound",
            "catenary",
            "catenary_reason",
            "rho2",
            "delta_observed",
            "verdicts",
        ]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let r = &self.0;
        vec![vec![
            r.group.clone(),
            r.davenport.to_string(),
            r.atom_count.to_string(),
            r.daleth.to_string(),
            r.daleth_lower_bound.to_string(),
            r.catenary.map(|c| c.to_string()).unwrap_or_default(),
            r.catenary_exactness_reason.map(|c| c.to_string()).unwrap_or_default(),
            r.rho2.to_string(),
            join(&r.delta_observed, " "),
            join(r.verdicts.values().map(|v| format!("{}={}", v.target, status_cell(v.status))), " "),
        ]]
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct TransferOut(TransferSummary);

impl Render for TransferOut {
    fn header(&self) -> Vec<&'static str> {
        vec!["seed", "models", "elements_checked", "products_checked", "bijections_checked", "failures", "passed"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let s = &self.0;
        vec![vec![
            s.seed.to_string(),
            s.models.to_string(),
            s.elements_checked.to_string(),
            s.products_checked.to_string(),
            s.bijections_checked.to_string(),
            s.failures.len().to_string(),
            s.passed.to_string(),
        ]]
    }
}
