//! The `pst` command line.
//!
//! Exit status: 0 for valid / found / ok, 1 for invalid / not found, 2 for
//! usage and input errors. In machine format every check prints exactly
//! one `RESULT` line and nothing else on standard output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::algebra::{check_refinable, enumerate_heyting, HeytingAlgebra, ENUMERATION_CAP};
use crate::axioms::{check_all, check_axiom, AxiomId, AxiomReport};
use crate::fidel::{check_explosion, is_substructure, saturate, validate, FStructure, Kind};
use crate::files::{builtin_algebra, parse_model_file, write_fstructure, ModelFile};
use crate::kernel::{audit_soundness, check_derivation, AuditBudget};
use crate::lemmas::{check_hat_lemma, formula_family, hat_formulas};
use crate::search::{search, GoalKind, SearchBudget, SearchGoal, Space, MAX_ALGEBRA_CAP, MAX_ASSIGNMENTS_CAP, MAX_DOMAIN_CAP};
use crate::syntax::{parse_derivation, parse_formula, Formula, Signature, System};
use crate::universe::{enumerate_universe, universe_size, NameStore, Policy, MAX_RANK};
use crate::valuation::{check_leibniz, check_valid, Mode, Quant, SetModel};

#[derive(Debug, Parser)]
#[command(name = "pst", version, about = "Finite algebra-valued models of paraconsistent set theory")]
pub struct Cli {
    /// Output style; machine prints only RESULT lines.
    #[arg(long, value_enum, global = true, default_value = "human")]
    pub format: Format,
    /// Seed for every randomised step; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for enumeration and search.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..=256))]
    pub jobs: u16,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heyting algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Fidel F-structures.
    #[command(subcommand)]
    Fstructure(FstructureCmd),
    /// Name universes and the hat embedding.
    #[command(subcommand)]
    Universe(UniverseCmd),
    /// Evaluate a sentence in a set model.
    Eval(EvalArgs),
    /// Check the Leibniz law over a formula family.
    Leibniz(LeibnizArgs),
    /// Set-theoretic axiom checks.
    #[command(subcommand)]
    Axiom(AxiomCmd),
    /// Derivation checking and soundness audits.
    #[command(subcommand)]
    Prove(ProveCmd),
    /// Countermodel search.
    #[command(subcommand)]
    Counter(CounterCmd),
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Validate algebra blocks and print their implication tables.
    Check { file: PathBuf },
    /// Enumerate algebras up to isomorphism.
    Enum {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=ENUMERATION_CAP as u64))]
        max_size: u64,
    },
    /// Decide refinability of an algebra (file or built-in name).
    Refinable { algebra: String },
}

#[derive(Debug, Subcommand)]
pub enum FstructureCmd {
    /// Validate F-structure blocks against the clauses of their kind.
    Check { file: PathBuf },
    /// Print the saturated structure over an algebra and validate it.
    Saturate {
        /// Algebra file or built-in name.
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value = "n4")]
        kind: Kind,
    },
    /// Decide whether the first structure embeds into the second.
    Sub { small: PathBuf, large: PathBuf },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file (algebra or F-structure) or built-in algebra name.
    #[arg(long)]
    pub model: String,
    /// Name of the block to use when the file holds several.
    #[arg(long)]
    pub name: Option<String>,
    /// Rank bound of the name universe.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=MAX_RANK as u64))]
    pub rank: u64,
    /// full | restricted[:K] | sampled:K; default full, restricted at the top rank.
    #[arg(long)]
    pub policy: Option<String>,
    /// Override the mode implied by the model.
    #[arg(long)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Subcommand)]
pub enum UniverseCmd {
    /// Enumerate names and dump them.
    Enum {
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=MAX_RANK as u64))]
        rank: u64,
        #[arg(long)]
        policy: Option<String>,
    },
    /// Check the hat embedding lemma for HF sets up to a rank.
    Hat {
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=MAX_RANK as u64))]
        rank: u64,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub formula: String,
    #[arg(long, default_value = "all")]
    pub quant: Quant,
}

#[derive(Debug, Args)]
pub struct LeibnizArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// One-variable formula; default is a generated negation-free family.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long, default_value = "all")]
    pub quant: Quant,
}

#[derive(Debug, Subcommand)]
pub enum AxiomCmd {
    /// Check one axiom, or `all`.
    Check {
        #[arg(long)]
        axiom: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "all")]
        quant: Quant,
        /// Schema parameter for Separation, Induction or Collection.
        #[arg(long)]
        formula: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProveCmd {
    /// Check a derivation file.
    Check { file: PathBuf },
    /// Evaluate axiom instances over small Θ-structures.
    Audit {
        #[arg(long, default_value = "n4")]
        system: System,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=MAX_DOMAIN_CAP as u64))]
        max_domain: u64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=MAX_ALGEBRA_CAP as u64))]
        max_algebra: u64,
        #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..=MAX_ASSIGNMENTS_CAP as u64))]
        max_assignments: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum GoalArg {
    NonExplosion,
    RefuteFormula,
    RefuteSequent,
    #[value(name = "separate_n4_n3")]
    SeparateN4N3,
    Congruence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceKind {
    N4,
    N3,
    Comega,
}

#[derive(Debug, Subcommand)]
pub enum CounterCmd {
    /// Search small structures for a certificate.
    Search {
        #[arg(long, value_enum)]
        goal: GoalArg,
        /// Formula to refute, or the conclusion of a sequent.
        #[arg(long)]
        formula: Option<String>,
        /// Sequent premise; repeatable.
        #[arg(long)]
        premise: Vec<String>,
        #[arg(long, value_enum, default_value = "n4")]
        kind: SpaceKind,
        /// Only the saturated structure over each algebra.
        #[arg(long)]
        saturated: bool,
        /// Search exactly the structures in this file.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=MAX_ALGEBRA_CAP as u64))]
        max_algebra: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=MAX_DOMAIN_CAP as u64))]
        max_domain: u64,
        #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..=MAX_ASSIGNMENTS_CAP as u64))]
        max_assignments: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}: {message}")]
    File { path: String, line: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn run(e: impl std::fmt::Display) -> Self {
        CliError::Run(e.to_string())
    }
}

/// Verdict of a command: exit status 0 or 1.
type Verdict = Result<bool, CliError>;

struct Out {
    w: Vec<u8>,
    format: Format,
}

impl Out {
    fn human(&mut self, text: impl std::fmt::Display) {
        if self.format == Format::Human {
            let _ = writeln!(self.w, "{text}");
        }
    }

    fn result(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.w, "{line}");
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_model(path: &Path) -> Result<ModelFile, CliError> {
    parse_model_file(&read(path)?).map_err(|e| CliError::File {
        path: path.display().to_string(),
        line: e.line,
        message: e.message,
    })
}

enum Loaded {
    Algebra(String, HeytingAlgebra),
    Structure(String, FStructure),
}

/// A built-in algebra name or the first (or `name`d) block of a file;
/// F-structures take precedence over bare algebras.
fn load(source: &str, name: Option<&str>, o: &mut Out) -> Result<Loaded, CliError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(h) = builtin_algebra(source) {
            return Ok(Loaded::Algebra(source.to_string(), h));
        }
    }
    let file = read_model(path)?;
    let pick = |n: &String| name.is_none_or(|want| want == n);
    if let Some((n, s)) = file.structures.into_iter().find(|(n, _)| pick(n)) {
        if let Err(e) = validate(&s) {
            o.human(format_args!("warning: structure {n} fails its {} clauses: {e}", s.kind().as_str()));
        }
        return Ok(Loaded::Structure(n, s));
    }
    file.algebras
        .into_iter()
        .find(|(n, _)| pick(n))
        .map(|(n, h)| Loaded::Algebra(n, h))
        .ok_or_else(|| CliError::Input(format!("{source}: no matching algebra or fstructure block")))
}

fn load_algebra(source: &str, o: &mut Out) -> Result<(String, HeytingAlgebra), CliError> {
    match load(source, None, o)? {
        Loaded::Algebra(n, h) => Ok((n, h)),
        Loaded::Structure(n, s) => Ok((n, s.algebra().clone())),
    }
}

fn policy(text: Option<&str>, algebra_size: usize, rank: usize, seed: u64) -> Result<Policy, CliError> {
    let v2 = universe_size(algebra_size, 2).unwrap_or(u128::MAX) as usize;
    let default_restricted = Policy::DomainsRestricted { max_dom: v2 };
    let bad = || CliError::Input(format!("bad policy `{}`", text.unwrap_or("")));
    match text {
        None if rank >= MAX_RANK => Ok(default_restricted),
        None | Some("full") => Ok(Policy::Full),
        Some("restricted") => Ok(default_restricted),
        Some(t) => {
            let (head, k) = t.split_once(':').ok_or_else(bad)?;
            let k: usize = k.parse().map_err(|_| bad())?;
            match head {
                "restricted" => Ok(Policy::DomainsRestricted { max_dom: k }),
                "sampled" => Ok(Policy::Sampled { seed, k }),
                _ => Err(bad()),
            }
        }
    }
}

fn build_model(args: &ModelArgs, seed: u64, o: &mut Out) -> Result<SetModel, CliError> {
    let rank = args.rank as usize;
    let mut model = match load(&args.model, args.name.as_deref(), o)? {
        Loaded::Algebra(_, h) => {
            let p = policy(args.policy.as_deref(), h.size(), rank, seed)?;
            SetModel::heyting(h, rank, p)
        }
        Loaded::Structure(_, s) => {
            let p = policy(args.policy.as_deref(), s.algebra().size(), rank, seed)?;
            SetModel::with_structure(s, rank, p)
        }
    }
    .map_err(CliError::input)?;
    if let Some(m) = args.mode {
        model.set_mode(m).map_err(CliError::input)?;
    }
    Ok(model)
}

fn formula(text: &str) -> Result<Formula, CliError> {
    parse_formula(text, &mut Signature::permissive()).map_err(|e| CliError::Input(format!("formula: {e}")))
}

/// Parses `args` and runs the command, writing to `out` and `err`.
/// Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs as usize).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let (verdict, text) = pool.install(|| {
        let mut o = Out {
            w: Vec::new(),
            format: cli.format,
        };
        (dispatch(&cli, &mut o), o.w)
    });
    let _ = out.write_all(&text);
    match verdict {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli, o: &mut Out) -> Verdict {
    o.human(format_args!("seed {}", cli.seed));
    match &cli.command {
        Command::Algebra(c) => algebra_cmd(c, o),
        Command::Fstructure(c) => fstructure_cmd(c, o),
        Command::Universe(c) => universe_cmd(c, cli.seed, o),
        Command::Eval(a) => eval_cmd(a, cli.seed, o),
        Command::Leibniz(a) => leibniz_cmd(a, cli.seed, o),
        Command::Axiom(AxiomCmd::Check {
            axiom,
            model,
            quant,
            formula: f,
        }) => axiom_cmd(axiom, model, *quant, f.as_deref(), cli.seed, o),
        Command::Prove(c) => prove_cmd(c, o),
        Command::Counter(c) => counter_cmd(c, cli.seed, o),
    }
}

fn algebra_cmd(c: &AlgebraCmd, o: &mut Out) -> Verdict {
    match c {
        AlgebraCmd::Check { file } => {
            let text = read(file)?;
            match parse_model_file(&text) {
                Ok(m) if !m.algebras.is_empty() => {
                    for (n, h) in &m.algebras {
                        o.human(format_args!("algebra {n}"));
                        o.human(h);
                        o.result(format_args!(
                            "RESULT algebra={n} size={} valid=yes boolean={}",
                            h.size(),
                            yes(h.is_boolean())
                        ));
                    }
                    Ok(true)
                }
                Ok(_) => Err(CliError::Input(format!("{}: no algebra blocks", file.display()))),
                Err(e) => {
                    o.human(format_args!("{}: line {}: {}", file.display(), e.line, e.message));
                    o.result("RESULT algebra=? valid=no");
                    Ok(false)
                }
            }
        }
        AlgebraCmd::Enum { max_size } => {
            let all = enumerate_heyting(*max_size as usize).map_err(CliError::run)?;
            for (i, h) in all.iter().enumerate() {
                o.human(format_args!("#{i} size {} boolean {}", h.size(), yes(h.is_boolean())));
            }
            o.result(format_args!("RESULT enum=algebra max_size={max_size} count={}", all.len()));
            Ok(true)
        }
        AlgebraCmd::Refinable { algebra } => {
            let (n, h) = load_algebra(algebra, o)?;
            let r = check_refinable(&h).map_err(CliError::run)?;
            if let Some(s) = r.counterexample {
                o.human(format_args!("subset {s:#b} has no disjoint refinement"));
            } else {
                o.human(format_args!("{} subsets refined", r.certificates.len()));
            }
            o.result(format_args!("RESULT algebra={n} refinable={}", yes(r.refinable)));
            Ok(r.refinable)
        }
    }
}

fn fstructure_cmd(c: &FstructureCmd, o: &mut Out) -> Verdict {
    match c {
        FstructureCmd::Check { file } => {
            let m = read_model(file)?;
            if m.structures.is_empty() {
                return Err(CliError::Input(format!("{}: no fstructure blocks", file.display())));
            }
            let mut all = true;
            for (n, s) in &m.structures {
                let v = validate(s);
                let explosive = check_explosion(s).is_ok();
                o.human(format_args!("fstructure {n}"));
                o.human(s);
                if let Err(e) = &v {
                    o.human(format_args!("invalid: {e}"));
                }
                o.result(format_args!(
                    "RESULT fstructure={n} kind={} valid={} explosive={}",
                    s.kind().as_str(),
                    yes(v.is_ok()),
                    yes(explosive)
                ));
                all &= v.is_ok();
            }
            Ok(all)
        }
        FstructureCmd::Saturate { algebra, kind } => {
            let (n, h) = load_algebra(algebra, o)?;
            let s = saturate(&h, *kind);
            let v = validate(&s);
            o.human(write_fstructure(&format!("{n}_saturated"), &s).trim_end());
            if let Err(e) = &v {
                o.human(format_args!("# not a valid {} structure: {e}", kind.as_str()));
            }
            o.result(format_args!(
                "RESULT saturate algebra={n} kind={} valid={}",
                kind.as_str(),
                yes(v.is_ok())
            ));
            Ok(v.is_ok())
        }
        FstructureCmd::Sub { small, large } => {
            let first = |p: &PathBuf| -> Result<FStructure, CliError> {
                read_model(p)?
                    .structures
                    .into_iter()
                    .next()
                    .map(|(_, s)| s)
                    .ok_or_else(|| CliError::Input(format!("{}: no fstructure blocks", p.display())))
            };
            let (f, g) = (first(small)?, first(large)?);
            let emb = is_substructure(&f, &g);
            let text = emb
                .as_ref()
                .map_or("none".to_string(), |e| e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            o.result(format_args!("RESULT substructure={} embedding={text}", yes(emb.is_some())));
            Ok(emb.is_some())
        }
    }
}

fn universe_cmd(c: &UniverseCmd, seed: u64, o: &mut Out) -> Verdict {
    match c {
        UniverseCmd::Enum {
            algebra,
            rank,
            policy: p,
        } => {
            let (n, h) = load_algebra(algebra, o)?;
            let rank = *rank as usize;
            let p = policy(p.as_deref(), h.size(), rank, seed)?;
            let mut store = NameStore::new();
            let ids = enumerate_universe(&mut store, &h, rank, p).map_err(CliError::run)?;
            o.human(store.dump(&ids).trim_end());
            let expected = universe_size(h.size(), rank).map_or("overflow".into(), |c| c.to_string());
            o.result(format_args!(
                "RESULT universe algebra={n} rank={rank} policy={p} names={} full_size={expected} seed={seed}",
                ids.len()
            ));
            Ok(true)
        }
        UniverseCmd::Hat { algebra, rank } => {
            let (n, h) = load_algebra(algebra, o)?;
            let rank = *rank as usize;
            let p = policy(None, h.size(), 1, seed)?;
            let mut model = SetModel::heyting(h, 1, p).map_err(CliError::run)?;
            let r = check_hat_lemma(&mut model, rank, &hat_formulas()).map_err(CliError::run)?;
            o.human(&r);
            o.result(format_args!(
                "RESULT lemma=hat algebra={n} rank={rank} checked={} failures={} holds={}",
                r.checked,
                r.failures.len(),
                yes(r.holds())
            ));
            Ok(r.holds())
        }
    }
}

fn eval_cmd(a: &EvalArgs, seed: u64, o: &mut Out) -> Verdict {
    let mut model = build_model(&a.model, seed, o)?;
    let phi = formula(&a.formula)?;
    let v = check_valid(&phi, &mut model, a.quant).map_err(CliError::run)?;
    o.human(&v);
    o.result(v.result_line());
    Ok(v.valid)
}

fn leibniz_cmd(a: &LeibnizArgs, seed: u64, o: &mut Out) -> Verdict {
    let mut model = build_model(&a.model, seed, o)?;
    let family = match &a.formula {
        Some(t) => vec![formula(t)?],
        None => {
            let params: Vec<_> = model.scope.iter().copied().take(2).collect();
            formula_family(&params)
        }
    };
    let rank = model.rank_bound;
    let r = check_leibniz(&mut model, &family, rank, a.quant).map_err(CliError::run)?;
    o.human(format_args!("{} formulas, {} pairs", family.len(), r.pairs));
    if let Some(v) = &r.violation {
        o.human(format_args!(
            "violation: {} with u={} v={}: eq={} lhs={} rhs={} under {}",
            v.formula, v.u, v.v, v.eq, v.lhs, v.rhs, v.assignment
        ));
    }
    o.result(r.verdict.result_line());
    Ok(r.verdict.valid)
}

fn axiom_cmd(axiom: &str, m: &ModelArgs, quant: Quant, f: Option<&str>, seed: u64, o: &mut Out) -> Verdict {
    let mut model = build_model(m, seed, o)?;
    let phi = f.map(formula).transpose()?;
    let reports: Vec<AxiomReport> = if axiom == "all" {
        check_all(&mut model, quant).map_err(CliError::run)?
    } else {
        let id: AxiomId = axiom.parse().map_err(CliError::input)?;
        vec![check_axiom(&mut model, id, quant, phi.as_ref()).map_err(CliError::run)?]
    };
    let mut ok = true;
    for r in &reports {
        o.human(r);
        o.result(r.result_line());
        ok &= r.valid;
    }
    Ok(ok)
}

fn prove_cmd(c: &ProveCmd, o: &mut Out) -> Verdict {
    match c {
        ProveCmd::Check { file } => {
            let d = parse_derivation(&read(file)?).map_err(|e| CliError::File {
                path: file.display().to_string(),
                line: e.line,
                message: e.message,
            })?;
            match check_derivation(&d) {
                Ok(()) => {
                    o.human(format_args!("ok {} ({} lines, system {})", d.name, d.lines.len(), d.system.as_str()));
                    o.result(format_args!("RESULT derivation={} system={} status=ok", d.name, d.system.as_str()));
                    Ok(true)
                }
                Err(e) => {
                    o.human(&e);
                    if let Some(r) = e.reason() {
                        o.human(format_args!("  {r}"));
                    }
                    let line = e.line().map_or("none".into(), |l| l.to_string());
                    o.result(format_args!(
                        "RESULT derivation={} system={} status=error line={line}",
                        d.name,
                        d.system.as_str()
                    ));
                    Ok(false)
                }
            }
        }
        ProveCmd::Audit {
            system,
            max_domain,
            max_algebra,
            max_assignments,
        } => {
            let budget = AuditBudget {
                max_domain: *max_domain as usize,
                max_algebra: *max_algebra as usize,
                max_assignments: *max_assignments as usize,
            };
            let r = audit_soundness(*system, budget).map_err(CliError::run)?;
            o.human(format_args!(
                "{} structures, {} instances, {} table assignments",
                r.structures, r.instances, r.evaluations
            ));
            for f in &r.failures {
                o.human(format_args!("failure: {f}"));
            }
            for f in &r.findings {
                o.human(format_args!("finding (not an axiom of {}): {f}", system.as_str()));
            }
            o.result(r.result_line());
            Ok(r.sound())
        }
    }
}

fn counter_cmd(c: &CounterCmd, seed: u64, o: &mut Out) -> Verdict {
    let CounterCmd::Search {
        goal,
        formula: f,
        premise,
        kind,
        saturated,
        model,
        max_algebra,
        max_domain,
        max_assignments,
    } = c;
    let need = |f: &Option<String>| -> Result<Formula, CliError> {
        formula(f.as_deref().ok_or_else(|| CliError::Input("this goal needs --formula".into()))?)
    };
    let goal_kind = match goal {
        GoalArg::NonExplosion => GoalKind::NonExplosion,
        GoalArg::RefuteFormula => GoalKind::RefuteFormula(need(f)?),
        GoalArg::RefuteSequent => GoalKind::RefuteSequent(
            premise.iter().map(|p| formula(p)).collect::<Result<_, _>>()?,
            need(f)?,
        ),
        GoalArg::SeparateN4N3 => GoalKind::SeparateN4N3,
        GoalArg::Congruence => GoalKind::Congruence,
    };
    let space = match model {
        Some(p) => {
            let m = read_model(p)?;
            let mut list = Vec::new();
            for (n, s) in m.structures {
                if let Err(e) = validate(&s) {
                    o.human(format_args!("warning: structure {n} fails its {} clauses: {e}", s.kind().as_str()));
                }
                list.push(s);
            }
            if list.is_empty() {
                return Err(CliError::Input(format!("{}: no fstructure blocks", p.display())));
            }
            Space::Fixed(list)
        }
        None => {
            let (k, explosive) = match kind {
                SpaceKind::N4 => (Kind::N4, false),
                SpaceKind::N3 => (Kind::N4, true),
                SpaceKind::Comega => (Kind::Comega, false),
            };
            Space::Enumerated {
                kind: k,
                explosive,
                saturated: *saturated,
            }
        }
    };
    let g = SearchGoal::new(goal_kind)
        .with_space(space)
        .with_budget(SearchBudget {
            max_algebra: *max_algebra as usize,
            max_domain: *max_domain as usize,
            max_assignments: *max_assignments as usize,
        })
        .with_seed(seed);
    let r = search(&g).map_err(CliError::run)?;
    o.human(format_args!("{r}").to_string().trim_end());
    o.result(r.result_line());
    Ok(r.outcome.found())
}
