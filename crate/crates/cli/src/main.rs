use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use addlam_core::corpus::generate_corpus;
use addlam_core::derivation::check_add;
use addlam_core::elaborate::elaborate;
use addlam_core::files::{read_proof, write_proof, Proof};
use addlam_core::parse::{parse_aterm, parse_context, parse_fterm, parse_ftype, parse_term, parse_type};
use addlam_core::reduction::{check_sn, normalize_traced, Normalized, SnOutcome, DEFAULT_FUEL, DEFAULT_SN_BUDGET};
use addlam_core::sadd::{add_to_sadd, check_sadd, SaddDerivation};
use addlam_core::suite::{run_suite, Report, Suite, SuiteConfig};
use addlam_core::systemf::f_check;
use addlam_core::translate::{rev_term, rev_type, trans_term, DEFAULT_SEARCH_BUDGET};
use addlam_core::types::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const DEFAULT_CORPUS: usize = 500;
const DEFAULT_TERM_BUDGET: usize = 14;

#[derive(Parser)]
#[command(name = "addlam", version, about = "Typed lambda calculus with sums: checking, reduction and translation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Reduction step limit.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    /// Search budget: states for `reduce --graph`, terms per path search for `suite`.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true, env = "ADDLAM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Term,
    Type,
    Aterm,
    Fterm,
    Ftype,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and pretty-print.
    Parse {
        /// Input file, `-` for stdin.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Term)]
        kind: Kind,
    },
    /// Normalise a term, printing each step.
    Reduce {
        input: PathBuf,
        /// Explore the whole reduction graph instead.
        #[arg(long)]
        graph: bool,
    },
    /// Check a derivation file.
    Check { input: PathBuf },
    /// Elaborate an annotated term into a derivation file.
    Elaborate {
        input: PathBuf,
        /// Typing context, e.g. `a : A, f : A -> B`.
        #[arg(long, default_value = "")]
        ctx: String,
    },
    /// Convert a derivation file to the structured system.
    ToSadd { input: PathBuf },
    /// Translate a derivation into System F with pairs.
    Translate {
        input: PathBuf,
        /// Where to write the translated derivation file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reverse a System F derivation file instead.
        #[arg(long)]
        reverse: bool,
    },
    /// Check a System F derivation file.
    Fcheck { input: PathBuf },
    /// Read back the term and type of a System F derivation file.
    Reverse { input: PathBuf },
    /// Run a property suite, or `all`.
    Suite {
        name: String,
        /// Number of generated derivations.
        #[arg(long, default_value_t = DEFAULT_CORPUS)]
        count: usize,
        /// Largest generated term, in nodes.
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        term_budget: usize,
        /// Random checks for the algebraic suites.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

/// A failure to report: exit code and message.
struct Fail(u8, String);

fn usage(msg: impl ToString) -> Fail {
    Fail(2, msg.to_string())
}

fn read_input(p: &PathBuf) -> Result<String, Fail> {
    if p.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        Ok(s)
    } else {
        fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
    }
}

fn read_proof_file(p: &PathBuf) -> Result<Proof, Fail> {
    read_proof(&read_input(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn emit(cli: &Cli, text: String, value: serde_json::Value) {
    match cli.format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("json value")),
    }
}

fn system(p: &Proof) -> &'static str {
    match p {
        Proof::Add(_) => "add",
        Proof::Sadd(_) => "sadd",
        Proof::F(_) => "f",
    }
}

fn structured(p: Proof) -> Result<SaddDerivation, Fail> {
    match p {
        Proof::Add(d) => add_to_sadd(&d).map_err(|e| Fail(1, e.to_string())),
        Proof::Sadd(d) => Ok(d),
        Proof::F(_) => Err(usage("expected an add or sadd derivation")),
    }
}

fn run(cli: &Cli) -> Result<u8, Fail> {
    match &cli.cmd {
        Cmd::Parse { input, kind } => {
            let src = read_input(input)?;
            let printed = match kind {
                Kind::Term => parse_term(&src).map(|t| t.to_string()),
                Kind::Type => parse_type(&src).map(|t| t.to_string()),
                Kind::Aterm => parse_aterm(&src).map(|t| t.to_string()),
                Kind::Fterm => parse_fterm(&src).map(|t| t.to_string()),
                Kind::Ftype => parse_ftype(&src).map(|t| t.to_string()),
            }
            .map_err(usage)?;
            emit(cli, printed.clone(), json!({ "printed": printed }));
            Ok(0)
        }
        Cmd::Reduce { input, graph } => {
            let t = parse_term(&read_input(input)?).map_err(usage)?;
            if *graph {
                let budget = cli.budget.unwrap_or(DEFAULT_SN_BUDGET);
                return Ok(match check_sn(&t, budget) {
                    SnOutcome::Terminates { max_depth, states, normal_forms } => {
                        let nfs: Vec<String> = normal_forms.iter().map(|t| t.to_string()).collect();
                        let text = format!("terminates: {states} states, longest path {max_depth}\n{}", nfs.join("\n"));
                        emit(
                            cli,
                            text,
                            json!({ "terminates": true, "states": states, "max_depth": max_depth, "normal_forms": nfs }),
                        );
                        0
                    }
                    SnOutcome::BudgetExhausted { states, cycle } => {
                        let text = format!(
                            "budget exhausted after {states} states{}",
                            if cycle { " (cycle found)" } else { "" }
                        );
                        emit(cli, text, json!({ "terminates": false, "states": states, "cycle": cycle }));
                        1
                    }
                });
            }
            let mut steps = Vec::new();
            let out = normalize_traced(&t, cli.fuel, &mut |s| steps.push(s.to_string()));
            let normal = matches!(out, Normalized::Normal { .. });
            let mut text = steps.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&format!("{}{}", out.term(), if normal { "" } else { "  (fuel exhausted)" }));
            emit(cli, text, json!({ "steps": steps, "result": out.term().to_string(), "normal": normal }));
            Ok(if normal { 0 } else { 1 })
        }
        Cmd::Check { input } => {
            let p = read_proof_file(input)?;
            let res = match &p {
                Proof::Add(d) => check_add(d).map_err(|v| v.to_string()),
                Proof::Sadd(d) => check_sadd(d).map_err(|v| v.to_string()),
                Proof::F(d) => f_check(d).map_err(|v| v.to_string()),
            };
            report_check(cli, system(&p), res)
        }
        Cmd::Fcheck { input } => match read_proof_file(input)? {
            Proof::F(d) => report_check(cli, "f", f_check(&d).map_err(|v| v.to_string())),
            _ => Err(usage("expected a System F derivation")),
        },
        Cmd::Elaborate { input, ctx } => {
            let ctx: Context = parse_context(ctx).map_err(|e| usage(format!("context: {e}")))?;
            let t = parse_aterm(&read_input(input)?).map_err(usage)?;
            let d = elaborate(&t, &ctx).map_err(|e| Fail(1, e.to_string()))?;
            println!("{}", write_proof(&Proof::Add(d)));
            Ok(0)
        }
        Cmd::ToSadd { input } => {
            let d = structured(read_proof_file(input)?)?;
            println!("{}", write_proof(&Proof::Sadd(d)));
            Ok(0)
        }
        Cmd::Translate { input, out, reverse } => {
            if *reverse {
                return reverse_cmd(cli, input);
            }
            let d = structured(read_proof_file(input)?)?;
            let tr = trans_term(&d);
            let file = write_proof(&Proof::F(tr.fderivation));
            let text = format!("{} : {}", tr.fterm, tr.ftype);
            match out {
                Some(path) => fs::write(path, &file).map_err(|e| Fail(1, format!("{}: {e}", path.display())))?,
                None if cli.format == Format::Text => println!("{file}"),
                None => {}
            }
            let file_json: serde_json::Value = serde_json::from_str(&file).expect("written as json");
            emit(
                cli,
                text,
                json!({ "term": tr.fterm.to_string(), "type": tr.ftype.to_string(), "derivation": file_json }),
            );
            Ok(0)
        }
        Cmd::Reverse { input } => reverse_cmd(cli, input),
        Cmd::Suite { name, count, term_budget, samples } => {
            let suites: Vec<Suite> =
                if name == "all" { Suite::ALL.to_vec() } else { vec![name.parse().map_err(usage)?] };
            let corpus = generate_corpus(cli.seed, *count, *term_budget);
            let cfg = SuiteConfig {
                seed: cli.seed,
                sn_budget: DEFAULT_SN_BUDGET,
                search_budget: cli.budget.unwrap_or(DEFAULT_SEARCH_BUDGET),
                samples: *samples,
            };
            let reports: Vec<Report> = suites.iter().map(|s| run_suite(*s, &corpus, &cfg)).collect();
            let failed = reports.iter().any(|r| !r.passed());
            match cli.format {
                Format::Text => reports.iter().for_each(|r| print!("{r}")),
                Format::Json if reports.len() == 1 => {
                    println!("{}", serde_json::to_string_pretty(&reports[0]).expect("report"))
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("reports")),
            }
            Ok(if failed { 1 } else { 0 })
        }
    }
}

fn report_check(cli: &Cli, system: &str, res: Result<(), String>) -> Result<u8, Fail> {
    let (text, code) = match &res {
        Ok(()) => (format!("ok ({system})"), 0),
        Err(e) => (format!("rejected ({system}): {e}"), 1),
    };
    emit(cli, text, json!({ "system": system, "ok": res.is_ok(), "error": res.err() }));
    Ok(code)
}

fn reverse_cmd(cli: &Cli, input: &PathBuf) -> Result<u8, Fail> {
    let Proof::F(d) = read_proof_file(input)? else {
        return Err(usage("expected a System F derivation"));
    };
    let term = rev_term(&d.term).map(|t| t.to_string());
    let ty = rev_type(&d.ty).map(|t| t.to_string());
    let show = |x: &Option<String>| x.clone().unwrap_or_else(|| "undefined".into());
    emit(cli, format!("{} : {}", show(&term), show(&ty)), json!({ "term": term, "type": ty }));
    Ok(if term.is_some() && ty.is_some() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("addlam: {msg}");
            ExitCode::from(code)
        }
    }
}
