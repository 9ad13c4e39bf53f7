use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use phi_fst::compose::{compose, ProductMachine};
use phi_fst::failure::FailureTransducer;
use phi_fst::properties::{
    check_canonical, check_conditional_probabilistic, check_probabilistic, check_stochastic,
    local_canonical_residuals,
};
use phi_fst::push::{compute_sums, push_weights, sum_graph};
use phi_fst::specialized::compose_specialized;
use phi_fst::star::{normalize_for_star, star, StarReadyTransducer};
use phi_fst::text::{self, format_weight, Document, Machine, TextOutput};
use phi_fst::{Automaton, Error, PairOutput, Semiring, Transducer, Weight};

#[derive(Parser)]
#[command(name = "phi-fst", version, about = "Failure transducer toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// Input machine; `-` or absent reads standard input.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<String>,
    /// Where to write the result; standard output by default.
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemiringArg {
    Plus,
    Max,
}

impl From<SemiringArg> for Semiring {
    fn from(s: SemiringArg) -> Self {
        match s {
            SemiringArg::Plus => Semiring::PlusTimes,
            SemiringArg::Max => Semiring::MaxTimes,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Stochastic,
    Probabilistic,
    Conditional,
    Canonical,
    LocalCanonical,
    Monotonic,
    NoFailureCycles,
    StarReady,
}

#[derive(Subcommand)]
enum Command {
    /// Generic composition of a pair machine with a weight machine.
    Compose {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_name = "FILE")]
        right: String,
        #[arg(long, action = ArgAction::Set, default_value_t = true)]
        accessible_only: bool,
    },
    /// Kleene star of a machine already in star normal form.
    Star {
        #[command(flatten)]
        io: Io,
    },
    /// Bring a pair machine into star normal form.
    Normalize {
        #[command(flatten)]
        io: Io,
    },
    /// Specialized composition of star(V) with F, from the normalized V.
    ComposeSpecial {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_name = "FILE")]
        right: String,
    },
    /// Push a composed machine to canonical form.
    Push {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "plus")]
        semiring: SemiringArg,
    },
    /// Replace failure arcs by explicit arcs.
    Expand {
        #[command(flatten)]
        io: Io,
    },
    /// Output of one input word.
    Eval {
        #[command(flatten)]
        io: Io,
        #[arg(long = "input", value_name = "WORD")]
        word: String,
    },
    /// All accepted words up to a length.
    Enumerate {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Check a property; exits 1 when it does not hold.
    Check {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long, value_enum, default_value = "plus")]
        semiring: SemiringArg,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Edges of the augmented sum graph of a composed machine.
    GraphDump {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "plus")]
        semiring: SemiringArg,
    },
}

enum Failure {
    Domain(Error),
    Io(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read_text(path: Option<&str>) -> std::result::Result<String, Failure> {
    match path {
        None | Some("-") => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Io(format!("standard input: {e}")))?;
            Ok(s)
        }
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Io(format!("{p}: {e}"))),
    }
}

fn write_text(path: Option<&str>, text: &str) -> Outcome {
    match path {
        None | Some("-") => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("standard output: {e}"))),
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{p}: {e}"))),
    }
}

fn load(path: Option<&str>) -> std::result::Result<Document, Failure> {
    Ok(text::parse(&read_text(path)?)?)
}

fn kind_error(want: &str) -> Failure {
    Failure::Domain(Error::PreconditionViolation(format!(
        "expected a {want} machine"
    )))
}

fn weight_machine(doc: Document) -> std::result::Result<FailureTransducer<Weight>, Failure> {
    match doc.machine {
        Machine::Weight(m) => Ok(m),
        Machine::Pair(_) => Err(kind_error("weight-only")),
    }
}

/// A pair machine without failure arcs.
fn pair_machine(doc: Document) -> std::result::Result<Transducer<PairOutput>, Failure> {
    match doc.machine {
        Machine::Pair(m) if m.num_failures() == 0 => Ok(m.into_base()),
        Machine::Pair(_) => Err(Failure::Domain(Error::PreconditionViolation(
            "pair machine has failure arcs".into(),
        ))),
        Machine::Weight(_) => Err(kind_error("pair")),
    }
}

fn product(doc: Document) -> std::result::Result<ProductMachine, Failure> {
    let pairs = doc.pairs.clone();
    let fst = weight_machine(doc)?;
    let pairs = pairs.ok_or_else(|| {
        Failure::Domain(Error::PreconditionViolation(
            "machine has no P records; expected the output of a composition".into(),
        ))
    })?;
    Ok(ProductMachine { fst, pairs })
}

fn print_product(m: &ProductMachine) -> String {
    text::print_machine(&m.fst, Some(&m.pairs))
}

/// Round to 12 significant digits so that values such as 0.126 print as
/// written.
fn display_weight(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap();
    rounded.to_string()
}

fn eval_line<M: TextOutput>(
    ft: &FailureTransducer<M>,
    word: &str,
) -> std::result::Result<M, Failure> {
    // A symbol outside the alphabet cannot start a path.
    let alpha = ft
        .input_alphabet()
        .parse_word(word)
        .map_err(|_| Error::UndefinedPath)?;
    ft.output_of_failure(&alpha)
        .ok_or(Failure::Domain(Error::UndefinedPath))
}

fn enumerate_lines<M: TextOutput>(ft: &FailureTransducer<M>, max_len: usize) -> String {
    let sigma = ft.input_alphabet();
    let omega = ft.base().output_alphabet();
    let mut out = String::new();
    for e in ft.enumerate(max_len) {
        let input = if e.input.is_empty() {
            "-".to_string()
        } else {
            sigma.render(&e.input, ",")
        };
        out.push_str(&format!("{input} {}\n", e.value.write(omega)));
    }
    out
}

fn verdict(name: &str, passed: bool, detail: String) -> Outcome {
    if passed {
        println!("pass {name} {detail}");
        Ok(())
    } else {
        println!("fail {name} {detail}");
        Err(Failure::Check(name.to_string()))
    }
}

fn check(
    doc: Document,
    property: Property,
    semiring: Semiring,
    max_len: usize,
    tol: f64,
) -> Outcome {
    match property {
        Property::Stochastic => {
            let r = check_stochastic(&weight_machine(doc)?, tol);
            verdict(
                "stochastic",
                r.passed(),
                format!("max-residual {}", format_weight(r.max_residual())),
            )
        }
        Property::Probabilistic => {
            let r = check_probabilistic(&weight_machine(doc)?, max_len, tol);
            verdict(
                "probabilistic",
                r.passed(),
                format!(
                    "partial-sum {} exhaustive {}",
                    format_weight(r.partial_sum),
                    r.exhaustive
                ),
            )
        }
        Property::Conditional => {
            let m = match doc.machine {
                Machine::Pair(m) => m,
                Machine::Weight(_) => return Err(kind_error("pair")),
            };
            let r = check_conditional_probabilistic(&m, max_len, tol);
            verdict(
                "conditional",
                r.passed(),
                format!("groups {}", r.groups.len()),
            )
        }
        Property::Canonical => {
            let r = check_canonical(&weight_machine(doc)?, semiring, max_len, tol);
            let bad = (0..r.sums.len()).filter(|&q| !r.state_passed(q)).count();
            verdict("canonical", r.passed(), format!("failing-states {bad}"))
        }
        Property::LocalCanonical => {
            let res = local_canonical_residuals(&weight_machine(doc)?, semiring);
            let worst = res.iter().copied().fold(0.0, f64::max);
            verdict(
                "local-canonical",
                worst <= tol,
                format!("max-residual {}", format_weight(worst)),
            )
        }
        Property::Monotonic => {
            let r = match doc.machine {
                Machine::Weight(m) => m.check_monotonic(),
                Machine::Pair(m) => m.check_monotonic(),
            };
            verdict(
                "monotonic",
                r.passed(),
                format!("violations {}", r.violations.len()),
            )
        }
        Property::NoFailureCycles => {
            let cycle = match doc.machine {
                Machine::Weight(m) => m.find_failure_cycle(),
                Machine::Pair(m) => m.find_failure_cycle(),
            };
            let detail = cycle.map_or("none".to_string(), |q| format!("through {q}"));
            verdict("no-failure-cycles", cycle.is_none(), detail)
        }
        Property::StarReady => {
            StarReadyTransducer::new(pair_machine(doc)?)?;
            verdict("star-ready", true, String::new())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Compose {
            io,
            right,
            accessible_only,
        } => {
            let t = pair_machine(load(io.input.as_deref())?)?;
            let ft = weight_machine(load(Some(&right))?)?;
            let m = compose(&t, &ft, accessible_only)?;
            write_text(io.out.as_deref(), &print_product(&m))
        }
        Command::Star { io } => {
            let v = StarReadyTransducer::new(pair_machine(load(io.input.as_deref())?)?)?;
            let s = FailureTransducer::from_transducer(star(&v));
            write_text(io.out.as_deref(), &text::print_machine(&s, None))
        }
        Command::Normalize { io } => {
            let v = normalize_for_star(&pair_machine(load(io.input.as_deref())?)?)?;
            for a in v.missing_output_symbols() {
                let omega = v.base().output_alphabet().unwrap();
                eprintln!("warning: output symbol {} is never emitted", omega.label(a));
            }
            let out = FailureTransducer::from_transducer(v.into_base());
            write_text(io.out.as_deref(), &text::print_machine(&out, None))
        }
        Command::ComposeSpecial { io, right } => {
            let v = StarReadyTransducer::new(pair_machine(load(io.input.as_deref())?)?)?;
            let ft = weight_machine(load(Some(&right))?)?;
            let m = compose_specialized(&v, &ft)?;
            write_text(io.out.as_deref(), &print_product(&m))
        }
        Command::Push { io, semiring } => {
            let m = product(load(io.input.as_deref())?)?;
            let sums = compute_sums(&m, semiring.into())?;
            let pushed = ProductMachine {
                fst: push_weights(&m.fst, &sums)?,
                pairs: m.pairs,
            };
            write_text(io.out.as_deref(), &print_product(&pushed))
        }
        Command::Expand { io } => {
            let text = match load(io.input.as_deref())?.machine {
                Machine::Weight(m) => {
                    text::print_machine(&FailureTransducer::from_transducer(m.expand()?), None)
                }
                Machine::Pair(m) => {
                    text::print_machine(&FailureTransducer::from_transducer(m.expand()?), None)
                }
            };
            write_text(io.out.as_deref(), &text)
        }
        Command::Eval { io, word } => {
            let line = match load(io.input.as_deref())?.machine {
                Machine::Weight(m) => display_weight(eval_line(&m, &word)?.value()),
                Machine::Pair(m) => {
                    let o = eval_line(&m, &word)?;
                    let omega = m.base().output_alphabet().unwrap();
                    let w = if o.word.is_epsilon() {
                        "-".to_string()
                    } else {
                        omega.render(o.word.symbols(), ",")
                    };
                    format!("{w} {}", display_weight(o.weight.value()))
                }
            };
            write_text(io.out.as_deref(), &format!("{line}\n"))
        }
        Command::Enumerate { io, max_len } => {
            let text = match load(io.input.as_deref())?.machine {
                Machine::Weight(m) => enumerate_lines(&m, max_len),
                Machine::Pair(m) => enumerate_lines(&m, max_len),
            };
            write_text(io.out.as_deref(), &text)
        }
        Command::Check {
            io,
            property,
            semiring,
            max_len,
            tol,
        } => check(
            load(io.input.as_deref())?,
            property,
            semiring.into(),
            max_len,
            tol,
        ),
        Command::GraphDump { io, semiring } => {
            let m = product(load(io.input.as_deref())?)?;
            let g = sum_graph(&m, semiring.into())?;
            write_text(io.out.as_deref(), &g.graph.dump(m.fst.input_alphabet()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("io-error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(name)) => {
            eprintln!("check-failed: {name}");
            ExitCode::from(1)
        }
    }
}
