//! Batch front end for `quinfo`.
//!
//! Machine-readable payloads go to `--output` or stdout; human-readable
//! summaries go to stderr. Exit codes: 0 success, 1 inequality violation,
//! 2 input or validation error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quinfo::channels::{
    broadcast_code_error, broadcast_region_point, build_channel_state, build_three_stage, code_error_probabilities,
    converse_check, example_counterexample_table, outer_bound_region, RegionConfig, SamplerMode,
};
use quinfo::document::{read_kind, Code, Document, Kind, Object, StateObject};
use quinfo::fuzz::{run_fuzz, FuzzSummary};
use quinfo::inequalities::{self as ineq, InequalityVerdict, THEOREMS};
use quinfo::infotheory::{self as it, EntropyReport, Language};
use quinfo::observable::{as_operation, measure};
use quinfo::operation::Operation;
use quinfo::{check_compatible, tol, DensityState, InputDigest, KrausMap, Povm, SubalgebraEmbedding};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "quinfo", version, about = "Entropy and information calculus over finite-dimensional C*-algebras")]
pub struct Cli {
    /// Write the JSON payload here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LanguageArg {
    Obs,
    Alg,
    Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    #[value(name = "H")]
    H,
    #[value(name = "Hcond")]
    Hcond,
    #[value(name = "I")]
    I,
    #[value(name = "Icond")]
    Icond,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Product,
    Joint,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy, conditional entropy, mutual or conditional mutual information.
    ///
    /// Object references are `factor:K` (a subalgebra stored in the state file)
    /// or a path to a povm, algebra (with embedding) or kraus_map document.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        language: LanguageArg,
        #[arg(long, value_enum)]
        quantity: QuantityArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        z: Option<String>,
    },
    /// Run an inequality checker on random instances or on input documents.
    Check {
        #[arg(long)]
        theorem: String,
        #[arg(long, conflicts_with = "input")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Findings file for conjecture probes.
        #[arg(long, default_value = "separability_findings.jsonl")]
        findings: PathBuf,
    },
    /// The binary-channel example table with its closed forms.
    Example,
    /// Sampled outer bound of a multiway channel's capacity region.
    Region {
        #[arg(long)]
        multiway: PathBuf,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "product")]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        mixture: usize,
    },
    /// Outcome distribution of a POVM in a state.
    Measure {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        povm: PathBuf,
    },
    /// Channel state `Σ P(x) x ⊗ W_x`, or the three-stage state with `--phi`.
    ChannelState {
        #[arg(long)]
        channel: PathBuf,
        /// Input distribution, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Error probabilities of a multiway or broadcast code.
    CodeError {
        #[arg(long)]
        code: PathBuf,
        /// Multiway channel, for multiway codes.
        #[arg(long)]
        multiway: Option<PathBuf>,
        /// Also run the Fano converse chain (multiway codes).
        #[arg(long)]
        converse: bool,
        /// Channel and degrading map, for broadcast codes.
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Conjectured degraded broadcast bounds at `(Q, V)`.
    BroadcastPoint {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Kernel rows separated by `;`, entries by `,`.
        #[arg(long)]
        v: String,
    },
}

/// Failure carrying an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<quinfo::Error> for Failure {
    fn from(e: quinfo::Error) -> Self {
        invalid(e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Sink<'a> {
    path: Option<&'a Path>,
    out: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        match self.path {
            Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display()))),
            None => self.out.write_all(text.as_bytes()).map_err(|e| invalid(e.to_string())),
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))? + "\n";
        self.emit(&text)
    }

    fn document(&mut self, doc: &Document) -> Result<(), Failure> {
        self.emit(&(doc.to_json() + "\n"))
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut sink = Sink {
        path: cli.output.as_deref(),
        out,
    };
    match &cli.command {
        Command::Entropy {
            state,
            language,
            quantity,
            x,
            y,
            z,
        } => cmd_entropy(state, *language, *quantity, x, y.as_deref(), z.as_deref(), &mut sink, err),
        Command::Check {
            theorem,
            random,
            seed,
            input,
            findings,
        } => cmd_check(theorem, *random, *seed, input, findings, &mut sink, err),
        Command::Example => cmd_example(&mut sink, err),
        Command::Region {
            multiway,
            samples,
            seed,
            mode,
            mixture,
        } => cmd_region(multiway, *samples, *seed, *mode, *mixture, &mut sink, err),
        Command::Measure { state, povm } => cmd_measure(state, povm, &mut sink, err),
        Command::ChannelState { channel, p, phi } => cmd_channel_state(channel, p, phi.as_deref(), &mut sink, err),
        Command::CodeError {
            code,
            multiway,
            converse,
            channel,
            phi,
        } => cmd_code_error(code, multiway.as_deref(), *converse, channel.as_deref(), phi.as_deref(), &mut sink, err),
        Command::BroadcastPoint { channel, phi, q, v } => cmd_broadcast_point(channel, phi, q, v, &mut sink, err),
    }
}

fn note(err: &mut dyn Write, text: &str) {
    let _ = writeln!(err, "{text}");
}

fn read_state(path: &Path) -> Result<StateObject, Failure> {
    match read_kind(path, Kind::State)? {
        Object::State(s) => Ok(s),
        _ => unreachable!("read_kind checks the kind"),
    }
}

fn read_kraus(path: &Path) -> Result<KrausMap, Failure> {
    match read_kind(path, Kind::KrausMap)? {
        Object::KrausMap(k) => Ok(k),
        _ => unreachable!("read_kind checks the kind"),
    }
}

/// A resolved object reference.
enum Ref {
    Povm(Povm),
    Subalgebra(SubalgebraEmbedding),
    Map(KrausMap),
}

impl Ref {
    fn resolve(spec: &str, state: &StateObject) -> Result<Ref, Failure> {
        if let Some(k) = spec.strip_prefix("factor:") {
            let k: usize = k.parse().map_err(|_| invalid(format!("bad factor index in '{spec}'")))?;
            let f = state
                .factors
                .get(k)
                .ok_or_else(|| invalid(format!("state file has {} factors, no factor {k}", state.factors.len())))?;
            return Ok(Ref::Subalgebra(f.clone()));
        }
        let doc = Document::read(Path::new(spec))?;
        match doc.into_object()? {
            Object::Povm(x) => Ok(Ref::Povm(x)),
            Object::KrausMap(k) => Ok(Ref::Map(k)),
            Object::Algebra(a) => a
                .embedding
                .map(Ref::Subalgebra)
                .ok_or_else(|| invalid(format!("{spec}: algebra document has no embedding"))),
            other => Err(invalid(format!("{spec}: a {} document is not an observable, subalgebra or operation", other.kind().name()))),
        }
    }

    fn povm(&self, name: &str) -> Result<&Povm, Failure> {
        match self {
            Ref::Povm(x) => Ok(x),
            _ => Err(invalid(format!("--{name} must be a povm document in the observable language"))),
        }
    }

    fn subalgebra(&self, name: &str) -> Result<&SubalgebraEmbedding, Failure> {
        match self {
            Ref::Subalgebra(e) => Ok(e),
            _ => Err(invalid(format!("--{name} must be a subalgebra in the subalgebra language"))),
        }
    }

    fn operation(&self) -> Box<dyn Operation> {
        match self {
            Ref::Povm(x) => Box::new(as_operation(x)),
            Ref::Subalgebra(e) => Box::new(e.clone()),
            Ref::Map(k) => Box::new(k.clone()),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_entropy(
    state: &Path,
    language: LanguageArg,
    quantity: QuantityArg,
    x: &str,
    y: Option<&str>,
    z: Option<&str>,
    sink: &mut Sink,
    err: &mut dyn Write,
) -> CmdResult {
    let st = read_state(state)?;
    let rho = &st.state;
    let need = |r: Option<&str>, name: &str| -> Result<Ref, Failure> {
        let spec = r.ok_or_else(|| invalid(format!("quantity needs --{name}")))?;
        Ref::resolve(spec, &st)
    };
    let x = Ref::resolve(x, &st)?;
    let (y, z) = match quantity {
        QuantityArg::H => (None, None),
        QuantityArg::Hcond | QuantityArg::I => (Some(need(y, "y")?), None),
        QuantityArg::Icond => (Some(need(y, "y")?), Some(need(z, "z")?)),
    };
    let value = match language {
        LanguageArg::Obs => {
            let xo = x.povm("x")?;
            match quantity {
                QuantityArg::H => it::entropy_obs(xo, rho)?,
                QuantityArg::Hcond => it::cond_entropy_obs(xo, y.as_ref().unwrap().povm("y")?, rho)?,
                QuantityArg::I => it::mutual_info_obs(xo, y.as_ref().unwrap().povm("y")?, rho)?,
                QuantityArg::Icond => {
                    it::cond_mutual_info_obs(xo, y.as_ref().unwrap().povm("y")?, z.as_ref().unwrap().povm("z")?, rho)?
                }
            }
        }
        LanguageArg::Alg => {
            let xa = x.subalgebra("x")?;
            match quantity {
                QuantityArg::H => it::entropy_alg(xa, rho)?,
                QuantityArg::Hcond => it::cond_entropy_alg(xa, y.as_ref().unwrap().subalgebra("y")?, rho)?,
                QuantityArg::I => it::mutual_info_alg(xa, y.as_ref().unwrap().subalgebra("y")?, rho)?,
                QuantityArg::Icond => it::cond_mutual_info_alg(
                    xa,
                    y.as_ref().unwrap().subalgebra("y")?,
                    z.as_ref().unwrap().subalgebra("z")?,
                    rho,
                )?,
            }
        }
        LanguageArg::Op => {
            let xo = x.operation();
            let yo = y.as_ref().map(Ref::operation);
            let zo = z.as_ref().map(Ref::operation);
            match quantity {
                QuantityArg::H => it::entropy_op(xo.as_ref(), rho)?,
                QuantityArg::Hcond => it::cond_entropy_op(xo.as_ref(), yo.as_deref().unwrap(), rho)?,
                QuantityArg::I => it::mutual_info_op(xo.as_ref(), yo.as_deref().unwrap(), rho)?,
                QuantityArg::Icond => {
                    it::cond_mutual_info_op(xo.as_ref(), yo.as_deref().unwrap(), zo.as_deref().unwrap(), rho)?
                }
            }
        }
    };
    let (lang, symbol) = match language {
        LanguageArg::Obs => (Language::Observable, "X"),
        LanguageArg::Alg => (Language::Subalgebra, "𝒳"),
        LanguageArg::Op => (Language::Operation, "φ"),
    };
    let name = match quantity {
        QuantityArg::H => "H(X)",
        QuantityArg::Hcond => "H(X|Y)",
        QuantityArg::I => "I(X:Y)",
        QuantityArg::Icond => "I(X:Y|Z)",
    };
    let report = EntropyReport {
        quantity: name.into(),
        language: lang,
        value_bits: value,
        inputs_digest: InputDigest::new("entropy").state(rho).finish(),
    };
    sink.json(&report)?;
    note(err, &format!("{} [{symbol} {:?}] = {value:.9} bits", name, lang));
    Ok(EXIT_OK)
}

fn summary_table(s: &FuzzSummary) -> String {
    format!(
        "{:<28} {:>9} {:>9} {:>7} {:>6} {:>11} {:>12} {:>14}\n{:<28} {:>9} {:>9} {:>7} {:>6} {:>11} {:>12} {:>14.3e}{}",
        "theorem",
        "instances",
        "verdicts",
        "pass",
        "fail",
        "hypothesis",
        "precondition",
        "min slack",
        s.theorem,
        s.instances,
        s.verdicts,
        s.passed,
        s.failures,
        s.hypothesis_not_met,
        s.precondition_violated,
        s.min_slack_bits,
        if s.conjecture { "  [CONJECTURE]" } else { "" }
    )
}

fn cmd_check(
    theorem: &str,
    random: Option<usize>,
    seed: u64,
    inputs: &[PathBuf],
    findings: &Path,
    sink: &mut Sink,
    err: &mut dyn Write,
) -> CmdResult {
    if !THEOREMS.contains(&theorem) {
        return Err(invalid(format!("unknown theorem '{theorem}'; registered theorems: {}", THEOREMS.join(", "))));
    }
    let (instances, verdicts) = match random {
        Some(n) => (n, run_fuzz(theorem, n, seed)?.verdicts),
        None if inputs.is_empty() => return Err(invalid("give --random N or --input FILE...")),
        None => {
            let objects = inputs
                .iter()
                .map(|p| Ok(Document::read(p)?.into_object()?))
                .collect::<Result<Vec<_>, Failure>>()?;
            (1, file_instance(theorem, &objects)?)
        }
    };
    let mut lines = String::new();
    for v in &verdicts {
        lines.push_str(&serde_json::to_string(v).map_err(|e| invalid(e.to_string()))?);
        lines.push('\n');
    }
    sink.emit(&lines)?;
    let summary = FuzzSummary::from_verdicts(theorem, instances, &verdicts);
    note(err, &summary_table(&summary));
    if summary.conjecture {
        let found: Vec<&InequalityVerdict> = verdicts.iter().filter(|v| v.is_failure()).collect();
        let mut text = String::new();
        for v in &found {
            text.push_str(&serde_json::to_string(v).map_err(|e| invalid(e.to_string()))?);
            text.push('\n');
        }
        std::fs::write(findings, text).map_err(|e| invalid(format!("cannot write {}: {e}", findings.display())))?;
        note(
            err,
            &format!("{} counterexample candidates written to {}", found.len(), findings.display()),
        );
        return Ok(EXIT_OK);
    }
    Ok(if summary.failures > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

fn states_and_factors(objects: &[Object]) -> (Vec<&StateObject>, Vec<&KrausMap>) {
    let mut states = Vec::new();
    let mut maps = Vec::new();
    for o in objects {
        match o {
            Object::State(s) => states.push(s),
            Object::KrausMap(k) => maps.push(k),
            _ => {}
        }
    }
    (states, maps)
}

fn factors<'a>(s: &'a StateObject, n: usize, theorem: &str) -> Result<&'a [SubalgebraEmbedding], Failure> {
    if s.factors.len() < n {
        return Err(invalid(format!("{theorem} needs a state file with at least {n} factors, found {}", s.factors.len())));
    }
    Ok(&s.factors[..n])
}

fn pair(a: &SubalgebraEmbedding, b: &SubalgebraEmbedding) -> Result<quinfo::CompatiblePair, Failure> {
    Ok(check_compatible(a, b, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?)
}

/// Checks one instance read from documents: a state with its factors, plus a
/// second state and a Kraus map where the theorem needs them.
fn file_instance(theorem: &str, objects: &[Object]) -> Result<Vec<InequalityVerdict>, Failure> {
    let (states, maps) = states_and_factors(objects);
    let first = states.first().ok_or_else(|| invalid(format!("{theorem} needs a state document")))?;
    let rho = &first.state;
    let second = || -> Result<&DensityState, Failure> {
        states
            .get(1)
            .map(|s| &s.state)
            .ok_or_else(|| invalid(format!("{theorem} needs two state documents")))
    };
    let v = match theorem {
        "klein" => ineq::check_klein(rho.as_element(), second()?.as_element())?,
        "monotonicity" => {
            let phi = maps.first().ok_or_else(|| invalid("monotonicity needs a kraus_map document"))?;
            vec![ineq::check_monotonicity(rho, second()?, *phi)?]
        }
        "subadditivity" => {
            let f = factors(first, 2, theorem)?;
            vec![ineq::check_subadditivity(&f[0], &f[1], rho)?]
        }
        "ssa" => {
            let f = factors(first, 3, theorem)?;
            vec![ineq::check_strong_subadditivity(&f[0], &f[1], &f[2], rho)?]
        }
        "pure_common_state" => {
            let f = factors(first, 2, theorem)?;
            vec![ineq::check_pure_common_state(&pair(&f[0], &f[1])?, rho)?]
        }
        "triangle" => {
            let f = factors(first, 2, theorem)?;
            vec![ineq::check_triangle(&pair(&f[0], &f[1])?, rho)?]
        }
        "info_upper_bound" => {
            let f = factors(first, 2, theorem)?;
            vec![ineq::check_info_upper_bound(&pair(&f[0], &f[1])?, rho)?]
        }
        "holevo_chain" => {
            let f = factors(first, 2, theorem)?;
            let x = Povm::computational(f[0].domain());
            let y = Povm::computational(f[1].domain());
            ineq::check_holevo_chain(&x, &y, &pair(&f[0], &f[1])?, rho)?
        }
        "conditional_entropy_nonneg" => {
            let f = factors(first, 2, theorem)?;
            vec![ineq::check_conditional_entropy_nonneg(&f[0], &f[1], rho)?]
        }
        "info_subadditivity" => {
            let f = factors(first, 4, theorem)?;
            vec![ineq::check_info_subadditivity(&f[0], &f[1], &f[2], &f[3], rho)?]
        }
        "info_subadditivity_n" => {
            let n = first.factors.len() / 2;
            if n == 0 || first.factors.len() % 2 != 0 {
                return Err(invalid("info_subadditivity_n needs 2n factors: inputs then outputs"));
            }
            let xs: Vec<&SubalgebraEmbedding> = first.factors[..n].iter().collect();
            let ys: Vec<&SubalgebraEmbedding> = first.factors[n..].iter().collect();
            vec![ineq::check_info_subadditivity_n(&xs, &ys, rho)?]
        }
        "fano_corollary" => {
            let f = factors(first, 2, theorem)?;
            let y = Povm::computational(f[1].domain());
            vec![ineq::check_fano_corollary(&f[0], &f[1], &y, rho)?]
        }
        "knowledge_decreases" => {
            let f = factors(first, 2, theorem)?;
            let phi_prime = maps
                .first()
                .map(|k| (*k).clone())
                .unwrap_or_else(|| KrausMap::identity(f[1].domain()));
            ineq::check_knowledge_decreases(&f[0], &f[1], &phi_prime, rho)?
        }
        "entropy_increase" => {
            let f = factors(first, 1, theorem)?;
            let phi = maps.first().ok_or_else(|| invalid("entropy_increase needs a kraus_map document for φ"))?;
            vec![ineq::check_entropy_increase(*phi, &f[0], rho)?]
        }
        other => {
            return Err(invalid(format!(
                "theorem '{other}' has no document input form; use --random N"
            )))
        }
    };
    Ok(v)
}

fn cmd_example(sink: &mut Sink, err: &mut dyn Write) -> CmdResult {
    let table = example_counterexample_table()?;
    sink.json(&table)?;
    let mut ok = true;
    note(err, "scenario  quantity   value      printed  closed form");
    for r in &table.rows {
        let close = (r.value_bits - r.closed_form).abs() <= 1e-6;
        ok &= close;
        note(
            err,
            &format!(
                "{:>8}  {:<9} {:.6}   {:.3}    {:.9} = {}{}",
                r.scenario,
                r.quantity,
                r.value_bits,
                r.printed,
                r.closed_form,
                r.closed_form_expr,
                if close { "" } else { "  MISMATCH" }
            ),
        );
    }
    for (k, v) in table.cmi_z_given_y.iter().enumerate() {
        note(err, &format!("scenario {}: I(X:Z|Y) = {v:.6} bits", k + 1));
    }
    for n in &table.notes {
        note(err, &format!("note: {n}"));
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_region(
    path: &Path,
    samples: usize,
    seed: u64,
    mode: ModeArg,
    mixture: usize,
    sink: &mut Sink,
    err: &mut dyn Write,
) -> CmdResult {
    let Object::Multiway(mc) = read_kind(path, Kind::Multiway)? else {
        unreachable!("read_kind checks the kind")
    };
    let config = RegionConfig {
        mode: match mode {
            ModeArg::Product => SamplerMode::Product,
            ModeArg::Joint => SamplerMode::Joint,
        },
        num_samples: samples,
        mixture_size: mixture,
        seed,
    };
    let region = outer_bound_region(&mc, &config)?;
    note(err, region.summary().trim_end());
    sink.document(&Object::Region(region).to_document())?;
    Ok(EXIT_OK)
}

fn cmd_measure(state: &Path, povm: &Path, sink: &mut Sink, err: &mut dyn Write) -> CmdResult {
    let rho = read_state(state)?.state;
    let Object::Povm(x) = read_kind(povm, Kind::Povm)? else {
        unreachable!("read_kind checks the kind")
    };
    let dist = measure(&x, &rho)?;
    sink.json(&dist)?;
    note(err, &format!("H = {:.9} bits", dist.entropy()));
    Ok(EXIT_OK)
}

fn cmd_channel_state(channel: &Path, p: &[f64], phi: Option<&Path>, sink: &mut Sink, err: &mut dyn Write) -> CmdResult {
    let Object::Channel(w) = read_kind(channel, Kind::Channel)? else {
        unreachable!("read_kind checks the kind")
    };
    let gamma = match phi {
        None => build_channel_state(p, &w)?,
        Some(path) => build_three_stage(p, &w, &read_kraus(path)?)?,
    };
    let obj = StateObject {
        state: gamma.state.clone(),
        factors: gamma.factors.clone(),
    };
    sink.document(&Object::State(obj).to_document())?;
    note(
        err,
        &format!(
            "channel state on {:?} with {} factors (0 = input, 1 = output{})",
            gamma.state.algebra().block_dims(),
            gamma.factors.len(),
            if phi.is_some() { ", 2 = degraded output" } else { "" }
        ),
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MultiwayErrors {
    errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converse: Option<quinfo::channels::ConverseReport>,
}

#[derive(Serialize)]
struct BroadcastErrors {
    maximum: f64,
    average: f64,
}

fn cmd_code_error(
    code: &Path,
    multiway: Option<&Path>,
    converse: bool,
    channel: Option<&Path>,
    phi: Option<&Path>,
    sink: &mut Sink,
    err: &mut dyn Write,
) -> CmdResult {
    let Object::Code(code) = read_kind(code, Kind::Code)? else {
        unreachable!("read_kind checks the kind")
    };
    match code {
        Code::Multiway(code) => {
            let path = multiway.ok_or_else(|| invalid("a multiway code needs --multiway"))?;
            let Object::Multiway(mc) = read_kind(path, Kind::Multiway)? else {
                unreachable!("read_kind checks the kind")
            };
            let errors = code_error_probabilities(&mc, &code)?;
            let report = if converse { Some(converse_check(&mc, &code)?) } else { None };
            for (j, e) in errors.iter().enumerate() {
                note(err, &format!("receiver {}: average error {e:.9}", j + 1));
            }
            let code_out = match &report {
                Some(r) if !r.all_pass() => {
                    note(err, "converse chain violated");
                    EXIT_VIOLATION
                }
                Some(_) => {
                    note(err, "converse chain holds");
                    EXIT_OK
                }
                None => EXIT_OK,
            };
            sink.json(&MultiwayErrors {
                errors,
                converse: report,
            })?;
            Ok(code_out)
        }
        Code::Broadcast(code) => {
            let (Some(c), Some(p)) = (channel, phi) else {
                return Err(invalid("a broadcast code needs --channel and --phi"));
            };
            let Object::Channel(w) = read_kind(c, Kind::Channel)? else {
                unreachable!("read_kind checks the kind")
            };
            let phi = read_kraus(p)?;
            let e = broadcast_code_error(&w, &phi, &code)?;
            note(err, &format!("maximum error {:.9}, average error {:.9}", e.maximum, e.average));
            sink.json(&BroadcastErrors {
                maximum: e.maximum,
                average: e.average,
            })?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_kernel(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| invalid(format!("bad kernel entry '{x}'"))))
                .collect()
        })
        .collect()
}

fn cmd_broadcast_point(channel: &Path, phi: &Path, q: &[f64], v: &str, sink: &mut Sink, err: &mut dyn Write) -> CmdResult {
    let Object::Channel(w) = read_kind(channel, Kind::Channel)? else {
        unreachable!("read_kind checks the kind")
    };
    let phi = read_kraus(phi)?;
    let point = broadcast_region_point(q, &parse_kernel(v)?, &w, &phi)?;
    sink.json(&point)?;
    note(
        err,
        &format!(
            "[{}] R1 <= {:.6}, R0 + R2 <= {:.6}, R0 + R1 + R2 <= {:.6}",
            point.tag, point.r1_bits, point.r0_plus_r2_bits, point.total_bits
        ),
    );
    Ok(EXIT_OK)
}
