//! Command dispatch for the `lexchain` binary.
//!
//! Every command produces one [`Report`]; it is rendered either as
//! line-oriented text or, with `--machine`, as one JSON record with the
//! fields `kind`, `result`, `witness`, `trace` and `reason`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lexchain::chain::{self, ChainDesc, Elem, EqKind, Lookup};
use lexchain::fixpoint::{self, Solution};
use lexchain::lexpow::{Embedding, OneSelector};
use lexchain::oracle;
use lexchain::refuter::{self, Outcome, RefuterInput};
use lexchain::sample::Sampler;
use lexchain::{parse_chain, parse_elem, ChainError, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lexchain", version, about = "Lexicographic powers of chains and their fixed points")]
pub struct Cli {
    /// Step budget for the refuters.
    #[arg(long, global = true, default_value_t = 64)]
    pub budget: usize,
    /// Seed for sampled verification.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit one JSON record instead of text.
    #[arg(long, global = true)]
    pub machine: bool,
    /// Maximum nesting depth of sampled elements.
    #[arg(long, global = true, default_value_t = 4)]
    pub depth: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare two elements of a chain.
    Cmp { chain: String, a: String, b: String },
    /// Decide and build the fixed-point solution of equation K (1, 2 or 3).
    Solve { k: u8, chain: String, zero: String },
    /// Map an element of the equation's segment of Δ^Γ into Γ.
    IsoTo {
        k: u8,
        chain: String,
        zero: String,
        elem: String,
    },
    /// Map an element of Γ into the equation's segment of Δ^Γ.
    IsoFrom {
        k: u8,
        chain: String,
        zero: String,
        elem: String,
    },
    /// Run the convexity refuter against a claimed embedding into a power.
    RefuteConvex {
        /// The power `pow(BASE, ZERO, EXP)` receiving the embedding.
        power: String,
        #[arg(long, value_enum, default_value_t = IotaKind::ChiPrefix)]
        iota: IotaKind,
        /// Embedding as a map literal `{x:ι(x), …}` for `--iota table`.
        #[arg(long)]
        table: Option<String>,
        /// Source chain of a table embedding (defaults to the exponent).
        #[arg(long)]
        source: Option<String>,
        /// One above zero in the base (defaults to the cover of zero).
        #[arg(long)]
        one: Option<String>,
        /// First element of the run (defaults to the least source element).
        #[arg(long)]
        start: Option<String>,
    },
    /// Run the second-equation refuter against a claimed Γ ≃ Δ^Γ.
    RefuteEq2 {
        base: String,
        zero: String,
        gamma: String,
        /// Claimed map as a literal `{γ:i(γ), …}`; defaults to the order-preserving
        /// injection onto the least elements of Δ^Γ.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        one: Option<String>,
    },
    /// Brute-force ground truth.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
    /// List the elements of a finite chain in ascending order.
    Enumerate { chain: String },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Sorted table of all functions for a finite power.
    Power { chain: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IotaKind {
    /// `n_k ↦ χ{n0, …, n(k−1)}` on ω.
    ChiPrefix,
    /// Finite table given with `--table`.
    Table,
}

/// Result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: &'static str,
    pub result: String,
    pub lines: Vec<String>,
    pub witness: Option<String>,
    pub trace: Vec<String>,
    pub reason: Option<String>,
    pub code: i32,
}

impl Report {
    fn ok(kind: &'static str, result: impl Into<String>) -> Self {
        Report {
            kind,
            result: result.into(),
            lines: Vec::new(),
            witness: None,
            trace: Vec::new(),
            reason: None,
            code: EXIT_OK,
        }
    }

    fn error(kind: &'static str, code: &str, msg: String) -> Self {
        Report {
            reason: Some(format!("{code}: {msg}")),
            code: EXIT_ERROR,
            ..Report::ok(kind, "ERROR")
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "result": self.result,
            "witness": self.witness,
            "trace": self.trace.iter().chain(&self.lines).collect::<Vec<_>>(),
            "reason": self.reason,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.code == EXIT_ERROR {
            return out;
        }
        writeln!(out, "{}", self.result).ok();
        if let Some(r) = &self.reason {
            writeln!(out, "reason: {r}").ok();
        }
        for l in &self.lines {
            writeln!(out, "{l}").ok();
        }
        if let Some(w) = &self.witness {
            writeln!(out, "witness: {w}").ok();
        }
        if !self.trace.is_empty() {
            writeln!(out, "trace:").ok();
            for t in &self.trace {
                writeln!(out, "  {t}").ok();
            }
        }
        out
    }
}

/// Captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Parse(ParseError),
    Chain(ChainError),
    Usage(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        Failure::Chain(e)
    }
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Parse(e) => e.code(),
            Failure::Chain(e) => e.code(),
            Failure::Usage(_) => "E_USAGE",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Parse(e) => e.to_string(),
            Failure::Chain(e) => e.to_string(),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type CmdResult = std::result::Result<Report, Failure>;

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Output {
                        code: EXIT_OK,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Output {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: format!("error[E_USAGE]: {text}"),
                },
            };
        }
    };
    render(&cli, execute(&cli))
}

fn render(cli: &Cli, report: Report) -> Output {
    let stderr = match (&report.reason, report.code) {
        (Some(r), EXIT_ERROR) => {
            let (code, msg) = r.split_once(": ").unwrap_or(("E_UNKNOWN", r));
            format!("error[{code}]: {msg}\n")
        }
        _ => String::new(),
    };
    let stdout = if cli.machine {
        format!("{}\n", report.to_json())
    } else {
        report.to_text()
    };
    Output {
        code: report.code,
        stdout,
        stderr,
    }
}

pub fn execute(cli: &Cli) -> Report {
    let kind = command_kind(&cli.command);
    dispatch(cli).unwrap_or_else(|f| Report::error(kind, f.code(), f.message()))
}

fn command_kind(c: &Command) -> &'static str {
    match c {
        Command::Cmp { .. } => "cmp",
        Command::Solve { .. } => "solve",
        Command::IsoTo { .. } => "iso-to",
        Command::IsoFrom { .. } => "iso-from",
        Command::RefuteConvex { .. } => "refute-convex",
        Command::RefuteEq2 { .. } => "refute-eq2",
        Command::Oracle { .. } => "oracle-power",
        Command::Enumerate { .. } => "enumerate",
    }
}

fn eq_kind(k: u8) -> std::result::Result<EqKind, Failure> {
    EqKind::from_number(k).ok_or_else(|| Failure::Usage(format!("equation must be 1, 2 or 3, got {k}")))
}

fn elem_in(c: &ChainDesc, text: &str) -> std::result::Result<Elem, Failure> {
    let e = parse_elem(text)?;
    if !chain::member(c, &e) {
        return Err(ChainError::NotAMember {
            chain: c.to_string(),
            elem: e.to_string(),
        }
        .into());
    }
    Ok(e)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let kind = command_kind(&cli.command);
    match &cli.command {
        Command::Cmp { chain, a, b } => {
            let c = parse_chain(chain)?;
            let (a, b) = (elem_in(&c, a)?, elem_in(&c, b)?);
            let word = match chain::compare(&c, &a, &b)? {
                Ordering::Less => "LESS",
                Ordering::Equal => "EQUAL",
                Ordering::Greater => "GREATER",
            };
            Ok(Report::ok(kind, word))
        }
        Command::Solve { k, chain, zero } => solve(cli, *k, chain, zero),
        Command::IsoTo { k, chain, zero, elem } | Command::IsoFrom { k, chain, zero, elem } => {
            let kind_eq = eq_kind(*k)?;
            let base = parse_chain(chain)?;
            let zero = elem_in(&base, zero)?;
            let e = parse_elem(elem)?;
            let out = if matches!(cli.command, Command::IsoTo { .. }) {
                fixpoint::iso_to(kind_eq, &base, &zero, &e)?
            } else {
                fixpoint::iso_from(kind_eq, &base, &zero, &e)?
            };
            Ok(Report::ok(kind, out.to_string()))
        }
        Command::RefuteConvex {
            power,
            iota,
            table,
            source,
            one,
            start,
        } => refute_convex(cli, power, *iota, table.as_deref(), source.as_deref(), one.as_deref(), start.as_deref()),
        Command::RefuteEq2 {
            base,
            zero,
            gamma,
            map,
            one,
        } => refute_eq2(cli, base, zero, gamma, map.as_deref(), one.as_deref()),
        Command::Oracle {
            what: OracleCommand::Power { chain },
        } => {
            let c = parse_chain(chain)?;
            let ChainDesc::Pow { base, zero, exp } = &c else {
                return Err(ChainError::WrongShape {
                    expected: "a power",
                    got: c.to_string(),
                }
                .into());
            };
            let model = oracle::brute_power(base, zero, exp)?;
            let mut r = Report::ok(kind, format!("{} elements", model.len()));
            r.lines = model.elems.iter().map(Elem::to_string).collect();
            Ok(r)
        }
        Command::Enumerate { chain } => {
            let c = parse_chain(chain)?;
            let elems = chain::enumerate(&c)?;
            let mut r = Report::ok(kind, format!("{} elements", elems.len()));
            r.lines = elems.iter().map(Elem::to_string).collect();
            Ok(r)
        }
    }
}

fn solve(cli: &Cli, k: u8, chain: &str, zero: &str) -> CmdResult {
    let kind_eq = eq_kind(k)?;
    let base = parse_chain(chain)?;
    let zero = elem_in(&base, zero)?;
    let sol = match fixpoint::solve(kind_eq, &base, &zero) {
        Ok(sol) => sol,
        Err(ChainError::NotSolvable(reason)) => {
            return Ok(Report {
                reason: Some(reason),
                code: EXIT_NEGATIVE,
                ..Report::ok("solve", "NOT_SOLVABLE")
            })
        }
        Err(e) => return Err(e.into()),
    };
    let checked = verify_solution(&sol, cli)?;
    let mut r = Report::ok("solve", "SOLVABLE");
    r.lines = vec![
        format!("equation: {k}"),
        format!("gamma: {}", sol.gamma),
        format!("domain: {}", sol.iso.to.source),
        format!("top: {}", chain::last(&sol.gamma).found().map_or_else(|| "unknown".into(), |e| e.to_string())),
        format!("trivial: {}", yes_no(sol.trivial)),
        format!("simultaneous: {}", yes_no(fixpoint::simultaneous(&base, &zero).is_ok())),
        format!("verified: {checked} samples (seed {}, depth {})", cli.seed, cli.depth),
    ];
    Ok(r)
}

/// Round-trips sampled domain elements and checks order preservation on
/// consecutive pairs.
fn verify_solution(sol: &Solution, cli: &Cli) -> std::result::Result<usize, Failure> {
    const COUNT: usize = 64;
    let domain = &sol.iso.to.source;
    let mut sampler = Sampler::new(cli.seed);
    let samples = sampler.elems(domain, COUNT, cli.depth)?;
    let mut images = Vec::with_capacity(samples.len());
    for s in &samples {
        let g = sol.iso.to.apply(s)?;
        let back = sol.iso.from.apply(&g)?;
        if back != *s {
            return Err(ChainError::CheckFailed {
                reason: "round trip".into(),
                left: s.to_string(),
                right: back.to_string(),
            }
            .into());
        }
        images.push(g);
    }
    for (w, iw) in samples.windows(2).zip(images.windows(2)) {
        if chain::compare(domain, &w[0], &w[1])? != chain::compare(&sol.gamma, &iw[0], &iw[1])? {
            return Err(ChainError::CheckFailed {
                reason: "order".into(),
                left: w[0].to_string(),
                right: w[1].to_string(),
            }
            .into());
        }
    }
    Ok(samples.len())
}

/// The least element above zero, when it can be found structurally.
fn default_one(base: &ChainDesc, zero: &Elem) -> Option<Elem> {
    match (base, zero) {
        (ChainDesc::Omega, Elem::Nat(k)) => Some(Elem::Nat(k + 1)),
        (ChainDesc::OmegaStar, Elem::StarIdx(k)) => k.checked_sub(1).map(Elem::StarIdx),
        _ => {
            let elems = chain::enumerate(base).ok()?;
            let i = elems.iter().position(|e| e == zero)?;
            elems.get(i + 1).cloned()
        }
    }
}

fn pick_one(base: &ChainDesc, zero: &Elem, one: Option<&str>) -> std::result::Result<Elem, Failure> {
    match one {
        Some(text) => elem_in(base, text),
        None => default_one(base, zero).ok_or_else(|| ChainError::BadOne(format!("no element above {zero}")).into()),
    }
}

/// A finite embedding read from a map literal `{x:f(x), …}`.
fn table_embedding(source: &ChainDesc, target: &ChainDesc, text: &str) -> std::result::Result<Embedding, Failure> {
    let Elem::Map(pairs) = parse_elem(text)? else {
        return Err(Failure::Usage("a table is a map literal {x:f(x), ...}".into()));
    };
    pairs_embedding(source, target, pairs)
}

fn pairs_embedding(
    source: &ChainDesc,
    target: &ChainDesc,
    pairs: Vec<(Elem, Elem)>,
) -> std::result::Result<Embedding, Failure> {
    for (x, y) in &pairs {
        if !chain::member(source, x) {
            return Err(ChainError::not_member(source, x).into());
        }
        if !chain::member(target, y) {
            return Err(ChainError::not_member(target, y).into());
        }
    }
    let (fw, bw, src) = (pairs.clone(), pairs, source.clone());
    Ok(Embedding::new(
        source.clone(),
        target.clone(),
        move |x| {
            fw.iter()
                .find(|(k, _)| k == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| ChainError::not_member(&src, x))
        },
        move |y| bw.iter().find(|(_, v)| v == y).map(|(k, _)| k.clone()),
    ))
}

fn outcome_report(kind: &'static str, outcome: &Outcome) -> Report {
    let trace = outcome.trace().iter().map(|t| t.to_string()).collect();
    match outcome {
        Outcome::Witness { witness, .. } => Report {
            witness: Some(witness.to_string()),
            trace,
            code: EXIT_NEGATIVE,
            ..Report::ok(kind, format!("WITNESS {}", witness.kind()))
        },
        Outcome::Exhausted { trace: t } => Report {
            trace,
            ..Report::ok(kind, format!("EXHAUSTED after {} steps", t.len()))
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn refute_convex(
    cli: &Cli,
    power: &str,
    iota: IotaKind,
    table: Option<&str>,
    source: Option<&str>,
    one: Option<&str>,
    start: Option<&str>,
) -> CmdResult {
    let target = parse_chain(power)?;
    let ChainDesc::Pow { base, zero, exp } = &target else {
        return Err(ChainError::WrongShape {
            expected: "a power",
            got: target.to_string(),
        }
        .into());
    };
    let one = pick_one(base, zero, one)?;
    let (iota, successor, cofinal) = match iota {
        IotaKind::ChiPrefix => {
            if **exp != ChainDesc::Omega {
                return Err(Failure::Usage("chi-prefix needs the exponent omega".into()));
            }
            (
                refuter::chi_prefix(base, zero, &one),
                refuter::omega_successor(),
                refuter::identity_cofinal(),
            )
        }
        IotaKind::Table => {
            let text = table.ok_or_else(|| Failure::Usage("--iota table needs --table".into()))?;
            let src = match source {
                Some(s) => parse_chain(s)?,
                None => (**exp).clone(),
            };
            let emb = table_embedding(&src, &target, text)?;
            let (s, c) = refuter::finite_witnesses(&src, exp)?;
            (emb, s, c)
        }
    };
    let seed = match start {
        Some(text) => elem_in(&iota.source, text)?,
        None => match chain::first(&iota.source) {
            Lookup::Found(e) => e,
            _ => return Err(Failure::Usage("source has no least element; pass --start".into())),
        },
    };
    let input = RefuterInput {
        target: target.clone(),
        iota,
        seed,
        successor,
        cofinal,
        one: OneSelector::constant(one),
        budget: cli.budget,
    };
    let outcome = refuter::refute_convex(&input)?;
    if let Some(w) = outcome.witness() {
        if !refuter::recheck_convex(&input, w)? {
            return Err(ChainError::CheckFailed {
                reason: "witness did not re-validate".into(),
                left: w.to_string(),
                right: String::new(),
            }
            .into());
        }
    }
    Ok(outcome_report("refute-convex", &outcome))
}

fn refute_eq2(
    cli: &Cli,
    base: &str,
    zero: &str,
    gamma: &str,
    map: Option<&str>,
    one: Option<&str>,
) -> CmdResult {
    let base = parse_chain(base)?;
    let zero = elem_in(&base, zero)?;
    let gamma = parse_chain(gamma)?;
    let one = pick_one(&base, &zero, one)?;
    let power = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(gamma.clone()),
    };
    let claimed = match map {
        Some(text) => table_embedding(&gamma, &power, text)?,
        None => {
            let g = chain::enumerate(&gamma)?;
            let p = oracle::FiniteModel::of(&power)?;
            pairs_embedding(&gamma, &power, g.into_iter().zip(p.elems).collect())?
        }
    };
    let outcome = refuter::refute_iso_second(&base, &zero, &gamma, &claimed, &one, cli.budget)?;
    if let Some(w) = outcome.witness() {
        if !refuter::recheck_iso_second(&base, &zero, &gamma, &claimed, w)? {
            return Err(ChainError::CheckFailed {
                reason: "witness did not re-validate".into(),
                left: w.to_string(),
                right: String::new(),
            }
            .into());
        }
    }
    Ok(outcome_report("refute-eq2", &outcome))
}
