use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use irreducibility::corpus::{self, EXAMPLES};
use irreducibility::info_order::{is_equivalent, is_poorer, join, meet, DerivedVariable};
use irreducibility::irreducibility::fmt9;
use irreducibility::parts;
use irreducibility::union_info::{check_axioms, random_suite, AxiomCase};
use irreducibility::{full_report, Error, JointDistribution, MeasureKind, UnionMeasure, UnionSettings};

/// Irreducibility measures over finite joint distributions.
#[derive(Debug, Parser)]
#[command(name = "irreducibility", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// IbE, IbDp, Ib2p and IbAp of a distribution.
    Compute {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Numerical check of the union-information axioms.
    Axioms {
        #[command(flatten)]
        source: OptionalSource,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Random distributions to add when no input is given.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Built-in examples against their expected values.
    Examples {
        /// Restrict to one example.
        #[arg(long)]
        name: Option<String>,
        /// Print the example's distribution instead of evaluating it.
        #[arg(long, requires = "name")]
        emit_tsv: bool,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        output: Output,
    },
    /// List parts, bipartitions, Almosts or Almost pairs of n predictors.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = What::Parts)]
        what: What,
        #[command(flatten)]
        output: Output,
    },
    /// Entropies and order relations between variable selections.
    Lattice {
        #[command(flatten)]
        source: Source,
        /// Comma-separated variable names, e.g. `X1,X2`.
        #[arg(required = true, num_args = 1..)]
        selectors: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
struct Source {
    #[arg(long)]
    input: PathBuf,
    /// Target variable; defaults to the file's target.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Debug, Args)]
struct OptionalSource {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    target: Option<String>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[arg(long, value_enum, default_value_t = Measure::Minsyn)]
    measure: Measure,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Measure {
    Minsyn,
    Maxmi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Human,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Parts,
    Bipartitions,
    Almosts,
    AlmostPairs,
}

/// Failure of a run: the message and the exit status.
struct Failure(String, u8);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooFewPredictors(_)
            | Error::InvalidSettings(_)
            | Error::EnumerationTooLarge { .. }
            | Error::UnknownVariable(_)
            | Error::UnknownExample(_)
            | Error::EmptySelector => 2,
            _ => 1,
        };
        Failure(e.to_string(), code)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string(), 1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.0);
        return ExitCode::from(f.1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PID_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure(format!("PID_THREADS must be a positive integer, got `{raw}`"), 2))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure(e.to_string(), 1))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Compute { source, measure, output } => {
            let d = load(&source.input, source.target.as_deref())?;
            let report = full_report(&d, &union_measure(&measure)?)?;
            let text = match output.format {
                Format::Json => pretty(&report.to_json())?,
                Format::Tsv => report.to_tsv(),
                Format::Human => report.to_human(),
            };
            emit(&output, &text)
        }
        Command::Axioms { source, measure, trials, output } => {
            let m = union_measure(&measure)?;
            let cases = match &source.input {
                Some(path) => AxiomCase::standard("input", &load(path, source.target.as_deref())?)?,
                None => {
                    let mut cases = Vec::new();
                    for e in &EXAMPLES {
                        cases.extend(AxiomCase::standard(e.name, &e.distribution())?);
                    }
                    cases.extend(random_suite(trials, measure.seed)?);
                    cases
                }
            };
            let report = check_axioms(&m, &cases, measure.seed)?;
            let text = match output.format {
                Format::Json => pretty(&serde_json::to_value(&report).map_err(Error::from)?)?,
                Format::Tsv | Format::Human => {
                    let mut s = String::from("axiom\tpassed\tchecks\tmax_violation\n");
                    for r in &report.results {
                        s.push_str(&format!("{}\t{}\t{}\t{:.3e}\n", r.axiom, r.passed, r.checks, r.max_violation));
                    }
                    s
                }
            };
            emit(&output, &text)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.results.iter().filter(|r| !r.passed).map(|r| r.axiom).collect();
                Err(Failure(format!("axioms failed: {}", failed.join(", ")), 1))
            }
        }
        Command::Examples { name, emit_tsv, measure, output } => {
            let selected = match &name {
                Some(n) => vec![corpus::load_example(n)?],
                None => EXAMPLES.iter().collect(),
            };
            if emit_tsv {
                return emit(&output, &selected[0].distribution().to_tsv());
            }
            let m = union_measure(&measure)?;
            let mut rows = Vec::new();
            for e in &selected {
                rows.push(corpus::compare(e, &full_report(&e.distribution(), &m)?));
            }
            let text = match output.format {
                Format::Json => pretty(&json!({
                    "measure": m.kind.name(),
                    "tolerance": corpus::TABLE_TOL,
                    "rows": rows.iter().map(|r| json!({
                        "name": r.name,
                        "expected": r.expected.map(irreducibility::irreducibility::fixed),
                        "computed": r.computed.map(irreducibility::irreducibility::fixed),
                        "matches": r.matches,
                    })).collect::<Vec<_>>(),
                }))?,
                Format::Tsv => {
                    let mut s = String::from("example\twhole_mi\tibe\tibdp\tib2p\tibap\tstatus\n");
                    for r in &rows {
                        let v: Vec<String> = r.computed.iter().map(|&x| fmt9(x)).collect();
                        s.push_str(&format!("{}\t{}\t{}\n", r.name, v.join("\t"), status(r.matches)));
                    }
                    s
                }
                Format::Human => {
                    let mut s = format!("{:<12}{:>10}{:>10}{:>10}{:>10}{:>10}  status\n", "example", "I(X;Y)", "IbE", "IbDp", "Ib2p", "IbAp");
                    for r in &rows {
                        s.push_str(&format!("{:<12}", r.name));
                        for (c, e) in r.computed.iter().zip(&r.expected) {
                            let mark = if (c - e).abs() > corpus::TABLE_TOL { "*" } else { "" };
                            s.push_str(&format!("{:>10}", format!("{c:.4}{mark}")));
                        }
                        s.push_str(&format!("  {}\n", status(r.matches)));
                    }
                    s
                }
            };
            emit(&output, &text)?;
            let bad: Vec<&str> = rows.iter().filter(|r| !r.matches).map(|r| r.name).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure(format!("examples differ from the expected values: {}", bad.join(", ")), 1))
            }
        }
        Command::Enumerate { n, what, output } => {
            let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
            let labels: Vec<String> = match what {
                What::Parts => parts::all_parts(n)?.iter().map(|p| p.label(&names)).collect(),
                What::Bipartitions => parts::all_bipartitions(n)?.iter().map(|p| p.label(&names)).collect(),
                What::Almosts => parts::almosts(n)?.iter().map(|p| p.label(&names)).collect(),
                What::AlmostPairs => parts::almost_pairs(n)?.iter().map(|p| p.label(&names)).collect(),
            };
            let text = match output.format {
                Format::Json => pretty(&json!(labels))?,
                Format::Tsv | Format::Human => labels.iter().map(|l| format!("{l}\n")).collect(),
            };
            emit(&output, &text)
        }
        Command::Lattice { source, selectors, output } => {
            let d = load(&source.input, source.target.as_deref())?;
            let vars = selectors
                .iter()
                .map(|s| {
                    let names: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
                    DerivedVariable::from_selector(&d, &d.selector(&names)?)
                })
                .collect::<irreducibility::Result<Vec<_>>>()?;
            let mut entropies = Vec::new();
            for (s, v) in selectors.iter().zip(&vars) {
                entropies.push(json!({ "selector": s, "entropy": irreducibility::irreducibility::fixed(v.entropy()) }));
            }
            let mut pairs = Vec::new();
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    let (u, v) = (&vars[i], &vars[j]);
                    pairs.push((
                        i,
                        j,
                        is_poorer(u, v)?,
                        is_poorer(v, u)?,
                        is_equivalent(u, v)?,
                        meet(u, v)?.entropy(),
                        join(u, v)?.entropy(),
                    ));
                }
            }
            let text = match output.format {
                Format::Json => pretty(&json!({
                    "variables": entropies,
                    "pairs": pairs.iter().map(|&(i, j, le, ge, eq, m, jn)| json!({
                        "left": selectors[i],
                        "right": selectors[j],
                        "left_poorer": le,
                        "right_poorer": ge,
                        "equivalent": eq,
                        "meet_entropy": irreducibility::irreducibility::fixed(m),
                        "join_entropy": irreducibility::irreducibility::fixed(jn),
                    })).collect::<Vec<_>>(),
                }))?,
                Format::Tsv | Format::Human => {
                    let mut s = String::new();
                    for (sel, v) in selectors.iter().zip(&vars) {
                        s.push_str(&format!("H({sel}) = {}\n", fmt9(v.entropy())));
                    }
                    for &(i, j, le, ge, eq, m, jn) in &pairs {
                        let (a, b) = (&selectors[i], &selectors[j]);
                        let rel = match (eq, le, ge) {
                            (true, _, _) => "≅",
                            (_, true, _) => "⪯",
                            (_, _, true) => "⪰",
                            _ => "incomparable",
                        };
                        s.push_str(&format!("{a} {rel} {b}\tH(meet) = {}\tH(join) = {}\n", fmt9(m), fmt9(jn)));
                    }
                    s
                }
            };
            emit(&output, &text)
        }
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn load(path: &PathBuf, target: Option<&str>) -> Result<JointDistribution, Failure> {
    let d = JointDistribution::from_path(path).map_err(|e| match e {
        Error::Io(io) => Failure(format!("{}: {io}", path.display()), 1),
        e => Failure::from(e),
    })?;
    Ok(match target {
        Some(t) => {
            let idx = d.index_of(t)?;
            d.with_target(idx)?
        }
        None => d,
    })
}

fn union_measure(a: &MeasureArgs) -> Result<UnionMeasure, Failure> {
    let kind = match a.measure {
        Measure::Minsyn => MeasureKind::MinSynergy,
        Measure::Maxmi => MeasureKind::MaxSingleMI,
    };
    let settings = UnionSettings { tolerance: a.tol, seed: a.seed, ..UnionSettings::default() };
    settings.validate()?;
    Ok(UnionMeasure::new(kind, settings))
}

fn pretty(v: &Value) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
