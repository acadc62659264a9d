//! `clustalg`: seed mutation, positivity sweeps and rank-2 expansions from
//! the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use clustalg::chebyshev::{c, ChebError};
use clustalg::dyck::{edges_of, pair_counts, CompatChecker, CountEngine, DyckError};
use clustalg::expansion::{
    expand_word, verify_positivity, ExpansionError, Method, PositivityOptions,
};
use clustalg::laurent::LaurentError;
use clustalg::rank3::{classify_sequence, sbar, ArrowTriple, Rank3Error};
use clustalg::seed::{random_word, ExchangeMatrix, MutationWord, Seed, SeedError, SeedFile, WordFile};
use clustalg::Exec;

const DEFAULT_RNG_SEED: u64 = 0x5eed_c1a5;
const LIST_CAP: usize = 20;

#[derive(Parser)]
#[command(name = "clustalg", version, about = "Seed mutation and rank-2 Laurent expansions")]
struct Cli {
    /// Print a JSON run report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mutate a seed along a word and print the matrix and cluster.
    Mutate {
        #[arg(long)]
        seed: PathBuf,
        #[command(flatten)]
        word: WordArg,
    },
    /// Random words from a seed: Laurent and positivity checks on every cluster.
    Verify {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_word_len: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_RNG_SEED)]
        rng_seed: u64,
        /// Stop a word before an exchange that could exceed 2^BUDGET terms.
        /// Shortened words are reported, not counted as failures.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Expand x_{d1}^p x_{d2}^q at the end of an alternating word.
    Expand {
        #[arg(long)]
        seed: PathBuf,
        #[command(flatten)]
        word: WordArg,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, value_enum, default_value_t = MethodArg::Oracle)]
        method: MethodArg,
        /// Compare against every other method.
        #[arg(long)]
        cross_check: bool,
    },
    /// Count r-compatible pairs on the maximal Dyck path of type a1 x a2.
    Compat {
        a1: i64,
        a2: i64,
        r: i64,
        /// Print every pair of edge sets with its verdict.
        #[arg(long)]
        list: bool,
    },
    /// Classify the alternating sequence Q_0..Q_m of a rank-3 quiver.
    #[command(allow_negative_numbers = true)]
    Classify { r: i64, xi: i64, omega: i64, m: i64 },
    /// Print c_n for parameter r.
    #[command(allow_negative_numbers = true)]
    Cheb { r: i64, n: i64 },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct WordArg {
    /// Word file, `{"word": [..]}` with 1-based directions.
    #[arg(long)]
    word: Option<PathBuf>,
    /// Inline 1-based word, comma separated.
    #[arg(long, value_delimiter = ',')]
    dirs: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Oracle,
    Compat,
    Tau,
    Mixed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Oracle => Method::Oracle,
            MethodArg::Compat => Method::Compat,
            MethodArg::Tau => Method::Tau,
            MethodArg::Mixed => Method::Mixed,
        }
    }
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool) -> Self {
        Check { name: name.into(), passed, details: None }
    }
}

#[derive(Debug, Serialize)]
struct RunReport {
    command: Vec<String>,
    passed: bool,
    checks: Vec<Check>,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    term_count: Option<usize>,
    output: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Default)]
struct Outcome {
    lines: Vec<String>,
    checks: Vec<Check>,
    term_count: Option<usize>,
    data: Option<Value>,
}

enum Failure {
    Input(String),
    Math(String),
}

impl From<LaurentError> for Failure {
    fn from(e: LaurentError) -> Self {
        match e {
            LaurentError::NotDivisible | LaurentError::NonMonomialInverse(_) => Failure::Math(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<SeedError> for Failure {
    fn from(e: SeedError) -> Self {
        match e {
            SeedError::Laurent(l) => l.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<DyckError> for Failure {
    fn from(e: DyckError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ExpansionError> for Failure {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::Seed(s) => s.into(),
            ExpansionError::Laurent(l) => l.into(),
            ExpansionError::Cheb(ChebError::NonIntegral(..)) => Failure::Math(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_seed(path: &Path) -> Result<ExchangeMatrix, Failure> {
    Ok(read_json::<SeedFile>(path)?.into_matrix()?)
}

fn load_word(arg: &WordArg, n: usize) -> Result<MutationWord, Failure> {
    let word = match (&arg.word, &arg.dirs) {
        (Some(path), _) => read_json::<WordFile>(path)?,
        (None, Some(dirs)) => WordFile { word: dirs.clone() },
        (None, None) => return Err(Failure::Input("no word given".into())),
    };
    Ok(word.into_word(n)?)
}

fn fmt_word(w: &[usize]) -> String {
    format!("[{}]", w.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
}

fn cmd_mutate(seed: &Path, word: &WordArg) -> Result<Outcome, Failure> {
    let b0 = load_seed(seed)?;
    let w = load_word(word, b0.n_mutable())?;
    let end = Seed::initial(b0).mutate_word(&w)?;
    let mut lines = vec![format!("word: {}", fmt_word(&w.one_based())), "B:".to_string()];
    for row in end.matrix().rows() {
        lines.push(format!("  {}", fmt_row(row)));
    }
    for (name, x) in end.vars().names().iter().zip(end.cluster()) {
        lines.push(format!("{name} = {x}"));
    }
    let data = json!({
        "word": w.one_based(),
        "matrix": end.matrix().rows(),
        "cluster": end.cluster().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    });
    let term_count = end.cluster().iter().map(|x| x.len()).max();
    Ok(Outcome { lines, checks: vec![], term_count, data: Some(data) })
}

fn fmt_row(row: &[i64]) -> String {
    format!("[{}]", row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
}

fn cmd_verify(seed: &Path, max_len: usize, trials: usize, rng_seed: u64, budget: Option<f64>) -> Result<Outcome, Failure> {
    let b0 = load_seed(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for t in 1..=trials {
        let len = rng.random_range(0..=max_len);
        let w = random_word(&mut rng, b0.n_mutable(), len);
        let opts = PositivityOptions { size_budget_log2: budget, ..PositivityOptions::default() };
        let rep = verify_positivity(&b0, &w, opts)?;
        let word = fmt_word(&rep.word);
        let mut check = Check::new(format!("trial {t} {word} positivity"), rep.laurent && rep.all_nonneg);
        if !rep.failures.is_empty() {
            check.details = Some(rep.failures.join("; "));
        }
        out.checks.push(check);
        let verdict = if rep.no_failures() { "pass" } else { "FAIL" };
        out.lines.push(format!("trial {t}: word {word} {verdict} (max terms {})", rep.max_terms));
        if let Some(bound) = rep.stopped_at_bound {
            out.lines.push(format!("  stopped after {} of {} steps (size bound 2^{bound:.1})", rep.steps_done, rep.word.len()));
        }
        out.lines.extend(rep.failures.iter().map(|f| format!("  {f}")));
        if let Some(tail) = &rep.tail {
            if let Some(why) = &tail.skipped {
                out.lines.push(format!("  tail skipped: {why}"));
            }
            for c in &tail.checks {
                out.checks.push(Check::new(format!("trial {t} {word} tail {}", c.name), c.passed));
                if !c.passed {
                    out.lines.push(format!("  tail check failed: {}", c.name));
                }
            }
        }
        out.term_count = out.term_count.max(Some(rep.max_terms));
        reports.push(rep);
    }
    out.lines.push(format!("{} trials, rng seed {rng_seed}", trials));
    out.data = Some(serde_json::to_value(&reports).expect("reports serialize"));
    Ok(out)
}

fn cmd_expand(
    seed: &Path,
    word: &WordArg,
    p: i64,
    q: i64,
    method: Method,
    cross_check: bool,
) -> Result<Outcome, Failure> {
    let b0 = load_seed(seed)?;
    let w = load_word(word, b0.n_mutable())?;
    let exec = Exec::default();
    let main = expand_word(&b0, &w, p, q, method, exec)?;
    let mut checks = Vec::new();
    if cross_check {
        for other in Method::ALL.into_iter().filter(|&m| m != method) {
            let alt = expand_word(&b0, &w, p, q, other, exec)?;
            checks.push(Check::new(format!("{} = {}", method.name(), other.name()), alt.poly == main.poly));
        }
    }
    let summary = json!({
        "method": method.name(),
        "term_count": main.poly.len(),
        "min_coeff": main.poly.min_coeff().map(|c| c.to_string()),
        "cross_checks": checks,
    });
    let mut lines = vec![main.poly.to_string(), summary.to_string()];
    let mut data = summary;
    if let Some(native) = &main.native {
        data["native"] = Value::String(native.to_string());
    }
    if !main.poly.is_nonneg() {
        checks.push(Check::new("nonnegative coefficients", false));
        lines.push("negative coefficient in expansion".into());
    }
    Ok(Outcome { lines, checks, term_count: Some(main.poly.len()), data: Some(data) })
}

fn cmd_compat(a1: i64, a2: i64, r: i64, list: bool) -> Result<Outcome, Failure> {
    let total = pair_counts(a1, a2, r, CountEngine::Auto, Exec::default())?.total();
    let mut out = Outcome { lines: vec![total.to_string()], ..Outcome::default() };
    if list {
        let ch = CompatChecker::new(a1, a2, r)?;
        let (n1, n2) = (ch.path().a1(), ch.path().a2());
        if n1 + n2 > LIST_CAP {
            return Err(Failure::Input(DyckError::CapExceeded(n1 + n2, LIST_CAP).to_string()));
        }
        let mut listed = 0u64;
        for s1 in 0..1u64 << n1 {
            for s2 in 0..1u64 << n2 {
                let ok = ch.is_compatible(s1, s2);
                listed += ok as u64;
                let verdict = if ok { "compatible" } else { "incompatible" };
                out.lines.push(format!("{} {} {verdict}", edge_set('u', s1), edge_set('v', s2)));
            }
        }
        out.checks.push(Check::new("listing agrees with count", total == listed.into()));
    }
    out.data = Some(json!({ "a1": a1, "a2": a2, "r": r, "pairs": total.to_string() }));
    Ok(out)
}

fn edge_set(prefix: char, mask: u64) -> String {
    let names: Vec<String> = edges_of(mask).iter().map(|e| format!("{prefix}{e}")).collect();
    format!("{{{}}}", names.join(","))
}

fn cmd_classify(r: i64, xi: i64, omega: i64, m: i64) -> Result<Outcome, Failure> {
    if m < 0 {
        return Err(Failure::Input(format!("m must be nonnegative, got {m}")));
    }
    let trace: Vec<i64> = (1..=m).map(|n| sbar(r, xi, omega, n)).collect();
    let trace_line = format!("sbar(1..{m}): {}", trace.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
    match classify_sequence(ArrowTriple::new(r, xi, omega), m) {
        Ok(class) => Ok(Outcome {
            lines: vec![format!("{class:?}"), trace_line],
            data: Some(json!({ "class": class, "condition": class.condition(), "sbar": trace })),
            ..Outcome::default()
        }),
        Err(Rank3Error::NegativeR(_)) => Err(Failure::Input(format!("r must be nonnegative, got {r}"))),
        Err(e) => Ok(Outcome {
            lines: vec![format!("unclassified: {e}"), trace_line],
            checks: vec![Check::new("classified", false)],
            data: Some(json!({ "class": null, "sbar": trace })),
            ..Outcome::default()
        }),
    }
}

fn cmd_cheb(r: i64, n: i64) -> Outcome {
    let v = c(r, n);
    Outcome { lines: vec![v.to_string()], data: Some(json!({ "r": r, "n": n, "c": v.to_string() })), ..Outcome::default() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.cmd {
        Cmd::Mutate { seed, word } => cmd_mutate(seed, word),
        Cmd::Verify { seed, max_word_len, trials, rng_seed, budget } => {
            cmd_verify(seed, *max_word_len, *trials, *rng_seed, *budget)
        }
        Cmd::Expand { seed, word, p, q, method, cross_check } => {
            cmd_expand(seed, word, *p, *q, (*method).into(), *cross_check)
        }
        Cmd::Compat { a1, a2, r, list } => cmd_compat(*a1, *a2, *r, *list),
        Cmd::Classify { r, xi, omega, m } => cmd_classify(*r, *xi, *omega, *m),
        Cmd::Cheb { r, n } => Ok(cmd_cheb(*r, *n)),
    };
    let (outcome, error, code) = match result {
        Ok(o) => {
            let code = if o.checks.iter().all(|c| c.passed) { 0 } else { 1 };
            (o, None, code)
        }
        Err(Failure::Math(e)) => (Outcome::default(), Some(e), 1),
        Err(Failure::Input(e)) => (Outcome::default(), Some(e), 2),
    };
    if cli.json {
        let report = RunReport {
            command: std::env::args().collect(),
            passed: code == 0,
            checks: outcome.checks,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            term_count: outcome.term_count,
            output: outcome.lines,
            data: outcome.data,
            error,
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        for line in &outcome.lines {
            println!("{line}");
        }
        if let Some(e) = error {
            eprintln!("error: {e}");
        }
    }
    ExitCode::from(code)
}
