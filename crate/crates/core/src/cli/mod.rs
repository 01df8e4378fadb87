//! The `teamlab` command line. Exit codes: 0 true / holds, 1 false /
//! counterexample / mismatch, 2 usage, parse or evaluation error.

mod deps_file;
mod report;
mod structure_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::atoms::Registry;
use crate::lab::{
    nonjumping_probe, probe_all, reproduce_table1, step_search, ProbeOptions, StepOptions,
};
use crate::model::{Structure, Team};
use crate::syntax::{parse_formula, ParseContext, Property};
use crate::teamsem::{eval_team, required_vars, EvalOptions, Evaluator};
use crate::ucalc::{
    check_equivalence, parse_u_fixture, relativize_atom, translate_disjunction, translate_u, Bound,
    Side,
};

pub use deps_file::parse_deps;
pub use report::*;
pub use structure_file::{parse_structure, parse_team, render_structure, render_team, FileError};

const STEP_CAVEAT: &str = "witnesses replace elementary extension by rank-k equivalence of finite structures; they are heuristic evidence, and an empty list proves nothing";

#[derive(Parser, Debug)]
#[command(name = "teamlab", version, about = "Finite-model laboratory for team semantics")]
pub struct Cli {
    /// File of user dependencies: `dep NAME ARITY := SENTENCE` per line.
    #[arg(long, global = true)]
    deps: Option<PathBuf>,
    /// Seed for sampled modes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Bounds {
    /// Largest domain size searched.
    #[arg(long, default_value_t = 3)]
    nmax: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula on a team.
    Eval {
        structure: PathBuf,
        formula: String,
        /// `x=0,y=1; x=1,y=1`; a blank string is the empty team, omitting it
        /// gives the team holding only the empty assignment.
        #[arg(long)]
        team: Option<String>,
        /// Print the witnessing covers and choices.
        #[arg(long)]
        explain: bool,
        /// Explanation as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Search for closure-property counterexamples.
    Probe {
        dependency: String,
        #[command(flatten)]
        bounds: Bounds,
        /// Comma-separated subset of empty,down,union,up,domind.
        #[arg(long, value_delimiter = ',')]
        props: Vec<String>,
        /// Report every counterexample instead of the first.
        #[arg(long)]
        all: bool,
        /// Random relations per domain above the exhaustive cap.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Recompute the closure grid of the classical atoms.
    Table1 {
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
    /// Translate U-sentences and certify the translations.
    Translate {
        file: PathBuf,
        /// Comma-separated fresh variables `w⃗`.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        /// Extra team variables beyond `w⃗`.
        #[arg(long, value_delimiter = ',')]
        extra: Vec<String>,
        /// Also certify the global disjunction against this dependency.
        #[arg(long)]
        against: Option<String>,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Relativize a dependency to a unary predicate and certify it.
    Relativize {
        dependency: String,
        #[arg(long)]
        pred: String,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Search for forbidden steps among rank-equivalent structures.
    Stepsearch {
        dependency: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Check that every member reaches a maximal member through members.
    Nonjumping {
        dependency: String,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct CliError(String);

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn print_json(out: &mut dyn Write, v: &impl serde::Serialize) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(fail)?;
    writeln!(out, "{s}").map_err(fail)
}

fn code(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

fn default_vars(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = if is_help {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return if is_help { 0 } else { 2 };
        }
    };
    match execute(&cli, out, err) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let reg = match &cli.deps {
        Some(p) => parse_deps(&read(p)?).map_err(|e| CliError(format!("{}: {e}", p.display())))?,
        None => Registry::new(),
    };
    let jobs = (cli.jobs > 0).then_some(cli.jobs);
    let probe_opts = |nmax: usize| ProbeOptions {
        nmax,
        jobs,
        seed: cli.seed,
        ..ProbeOptions::default()
    };
    match &cli.command {
        Command::Eval {
            structure,
            formula,
            team,
            explain,
            json,
        } => {
            let m = parse_structure(&read(structure)?)
                .map_err(|e| CliError(format!("{}: {e}", structure.display())))?;
            let phi = parse_formula(formula, &context(&m, &reg)).map_err(fail)?;
            let x = match team {
                Some(t) => parse_team(&m, t, &required_vars(&phi)).map_err(fail)?,
                None => Team::unit(m.size()),
            };
            if *explain || *json {
                let mut ev =
                    Evaluator::new(&m, x.vars(), &phi, &reg, EvalOptions::default()).map_err(fail)?;
                let e = ev.explain(&x).map_err(fail)?;
                if *json {
                    print_json(out, &e)?;
                } else {
                    writeln!(out, "{}", e.holds).map_err(fail)?;
                    write!(out, "{}", e.render(&|i| m.label(i))).map_err(fail)?;
                }
                Ok(code(e.holds))
            } else {
                let holds = eval_team(&m, &x, &phi, &reg).map_err(fail)?;
                writeln!(out, "{holds}").map_err(fail)?;
                Ok(code(holds))
            }
        }
        Command::Probe {
            dependency,
            bounds,
            props,
            all,
            samples,
        } => {
            let spec = reg.lookup(dependency).map_err(fail)?;
            let properties = if props.is_empty() {
                Property::ALL.to_vec()
            } else {
                props
                    .iter()
                    .map(|p| {
                        Property::from_key(p.trim())
                            .ok_or_else(|| CliError(format!("unknown property `{p}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            let opts = ProbeOptions {
                collect_all: *all,
                samples: *samples,
                ..probe_opts(bounds.nmax)
            };
            let verdicts = probe_all(&spec, &properties, &opts).map_err(fail)?;
            let ok = verdicts.iter().all(|v| v.holds());
            print_json(
                out,
                &ProbeReport {
                    command: "probe",
                    seed: cli.seed,
                    verdicts,
                },
            )?;
            Ok(code(ok))
        }
        Command::Table1 { bounds, json } => {
            let report = reproduce_table1(&probe_opts(bounds.nmax)).map_err(fail)?;
            let ok = report.matches;
            if *json {
                print_json(
                    out,
                    &Table1Json {
                        command: "table1",
                        seed: cli.seed,
                        table: report,
                    },
                )?;
            } else {
                writeln!(out, "nmax {} seed {}", report.nmax, cli.seed).map_err(fail)?;
                write!(out, "{}", report.render()).map_err(fail)?;
                writeln!(out, "{}", if ok { "match" } else { "MISMATCH" }).map_err(fail)?;
            }
            Ok(code(ok))
        }
        Command::Translate {
            file,
            vars,
            extra,
            against,
            bounds,
            samples,
        } => {
            let us = parse_u_fixture(&read(file)?)
                .map_err(|e| CliError(format!("{}: {e}", file.display())))?;
            let first = us.first().ok_or_else(|| CliError("no U-sentences".into()))?;
            let w = if vars.is_empty() {
                default_vars("w", first.arity())
            } else {
                vars.clone()
            };
            let mut team_vars = w.clone();
            team_vars.extend(extra.iter().cloned());
            let constants: Vec<String> = us
                .iter()
                .flat_map(|u| u.constants())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let bound = Bound {
                samples: *samples,
                seed: cli.seed,
                ..Bound::teams(bounds.nmax, &team_vars, &constants, None)
            };
            let mut items = Vec::new();
            let mut ok = true;
            for u in &us {
                let t = translate_u(u, &w).map_err(fail)?;
                let source = u.to_formula();
                let cert = check_equivalence(
                    &Side::Team(&t),
                    &Side::Projected {
                        sentence: &source,
                        relation: &u.relation,
                        vars: &w,
                    },
                    &bound,
                    &reg,
                )
                .map_err(fail)?;
                ok &= cert.holds();
                items.push(TranslateItem {
                    source: source.to_string(),
                    translation: t.to_string(),
                    certification: cert,
                });
            }
            let disjunction = match against {
                None => None,
                Some(label) => {
                    let spec = reg.lookup(label).map_err(fail)?;
                    let t = translate_disjunction(&us, &w).map_err(fail)?;
                    let cert = check_equivalence(
                        &Side::Team(&t),
                        &Side::Dependency {
                            spec: &spec,
                            vars: &w,
                        },
                        &bound,
                        &reg,
                    )
                    .map_err(fail)?;
                    ok &= cert.holds();
                    Some(DisjunctionItem {
                        dependency: spec.label(),
                        translation: t.to_string(),
                        certification: cert,
                    })
                }
            };
            print_json(
                out,
                &TranslateReport {
                    command: "translate",
                    seed: cli.seed,
                    vars: w,
                    team_vars,
                    items,
                    disjunction,
                },
            )?;
            Ok(code(ok))
        }
        Command::Relativize {
            dependency,
            pred,
            vars,
            bounds,
        } => {
            let spec = reg.lookup(dependency).map_err(fail)?;
            let xs = if vars.is_empty() {
                default_vars("x", spec.arity())
            } else {
                vars.clone()
            };
            let f = relativize_atom(&reg, dependency, pred, &xs).map_err(fail)?;
            let bound = Bound {
                seed: cli.seed,
                ..Bound::teams(bounds.nmax, &xs, &[], Some(pred))
            };
            let cert = check_equivalence(
                &Side::Team(&f),
                &Side::Relativized {
                    spec: &spec,
                    vars: &xs,
                },
                &bound,
                &reg,
            )
            .map_err(fail)?;
            let ok = cert.holds();
            print_json(
                out,
                &RelativizeReport {
                    command: "relativize",
                    seed: cli.seed,
                    dependency: spec.label(),
                    predicate: pred.clone(),
                    formula: f.to_string(),
                    certification: cert,
                },
            )?;
            Ok(code(ok))
        }
        Command::Stepsearch {
            dependency,
            bounds,
            rank,
            limit,
        } => {
            let spec = reg.lookup(dependency).map_err(fail)?;
            let opts = StepOptions {
                nmax: bounds.nmax,
                rank: *rank,
                limit: *limit,
                ..StepOptions::default()
            };
            let witnesses = step_search(&spec, &opts).map_err(fail)?;
            writeln!(err, "note: rank {rank}: {STEP_CAVEAT}").map_err(fail)?;
            print_json(out, &witnesses)?;
            Ok(0)
        }
        Command::Nonjumping { dependency, bounds } => {
            let spec = reg.lookup(dependency).map_err(fail)?;
            let verdict = nonjumping_probe(&spec, &probe_opts(bounds.nmax)).map_err(fail)?;
            let ok = verdict.holds();
            print_json(
                out,
                &NonjumpingReport {
                    command: "nonjumping",
                    seed: cli.seed,
                    verdict,
                },
            )?;
            Ok(code(ok))
        }
    }
}

fn context(m: &Structure, reg: &Registry) -> ParseContext {
    ParseContext {
        deps: reg.arities(),
        constants: m.constants().keys().cloned().collect(),
        relations: m
            .relations()
            .iter()
            .map(|(n, r)| (n.clone(), r.arity()))
            .collect(),
        allow_reserved: false,
    }
}
