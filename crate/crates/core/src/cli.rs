//! Command-line front end. Record streams are NDJSON; integers that may
//! exceed 2^53 are written as decimal strings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::Rational64;
use serde_json::json;

use crate::ecc::inner::parse_ratio;
use crate::ecc::{build_code_c, Recipe};
use crate::error::{Error, Result};
use crate::lagged::{LaggedParams, TruncatedLagged, UntruncatedLagged};
use crate::linearcode::{IntTreeEncoder, TcAEncoder};
use crate::packing::PackedKind;
use crate::pascal::{
    is_totally_nonsingular, pascal_matrix, search_tns, SearchMode, DEFAULT_MINOR_BUDGET, DEFAULT_SEARCH_BUDGET,
};
use crate::pipeline::{boosted_config, Pipeline, PipelineConfig};
use crate::symbol::{BitString, Nat, StreamEncoder, ToSymbol};
use crate::verify::{
    exhaustive_code_distance, lagged_distance, sample_toeplitz_code, singleton_bound, toeplitz_tilde_distance,
    tree_distance_exhaustive, weight_distance_linear, DistanceReport, LagMode,
};

#[derive(Parser, Debug)]
#[command(name = "treecode", version, about = "Explicit tree codes and their distance oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Pascal matrix of order N as decimal rows.
    Pascal {
        #[arg(long)]
        n: usize,
        /// Also check every staircase minor.
        #[arg(long)]
        check_tns: bool,
    },
    /// Search for a totally non-singular lower-triangular matrix with entries in [-B, B].
    SearchTns {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: u64,
        /// Randomized search with this seed; exhaustive when omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        attempts: u64,
    },
    /// Encode newline-separated naturals with the integer tree code.
    EncodeInt(IoArgs),
    /// Encode bits with the binary-input pipeline.
    EncodeChs {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = ratio_arg)]
        eta: Option<Rational64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        recipe: Option<RecipeArg>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Print the level table for inputs of length N.
    Schedule {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        s_min: usize,
        #[arg(long, default_value_t = 6)]
        a: usize,
        #[arg(long, value_enum, default_value_t = RecipeArg::Concat)]
        recipe: RecipeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Error-correcting code utilities.
    Ecc {
        #[command(subcommand)]
        command: EccCommand,
    },
    /// Compute a distance report.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum EccCommand {
    /// Build C for s symbols and print its summary.
    Build {
        #[arg(long)]
        s: usize,
        #[arg(long, value_parser = ratio_arg)]
        delta: Rational64,
        #[arg(long, value_enum)]
        recipe: RecipeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input path, `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RecipeArg {
    Rs,
    Concat,
}

impl From<RecipeArg> for Recipe {
    fn from(r: RecipeArg) -> Self {
        match r {
            RecipeArg::Rs => Recipe::RsOnly,
            RecipeArg::Concat => Recipe::Concatenated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Distance,
    Tilde,
    Lagged,
    Singleton,
    Toeplitz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CodeArg {
    /// Emits the input symbol.
    Copy,
    /// `TC_P` over the integers `0..sigma`.
    Pascal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Variant {
    Truncated,
    Untruncated,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Maximum input length (singleton: the length).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<u64>,
    #[arg(long)]
    gamma: Option<u64>,
    #[arg(long, value_enum, default_value_t = CodeArg::Pascal)]
    code: CodeArg,
    /// Claimed lower bound; the exit code is 2 when the report falls below it.
    #[arg(long, value_parser = ratio_arg)]
    claim: Option<Rational64>,
    /// Require the value to exceed the claim strictly.
    #[arg(long)]
    strict: bool,
    /// Lagged: block width of the toy code.
    #[arg(long, default_value_t = 4)]
    s: usize,
    /// Lagged: lag ratio `ell / s`.
    #[arg(long, default_value_t = 4)]
    a: usize,
    #[arg(long, value_enum, default_value_t = Variant::Truncated)]
    variant: Variant,
    /// Lagged: upper end of the lag window (default n).
    #[arg(long)]
    max_lag: Option<usize>,
    /// Lagged: sample this many pairs instead of enumerating.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Toeplitz: field size.
    #[arg(long, default_value_t = 4)]
    q: usize,
    /// Toeplitz: expansion.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Toeplitz: target distance.
    #[arg(long, value_parser = ratio_arg)]
    delta: Option<Rational64>,
}

fn ratio_arg(s: &str) -> std::result::Result<Rational64, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = dispatch(cli.command, stdin, stdout);
    let _ = stdout.flush();
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Pascal { n, check_tns } => pascal(n, check_tns, stdout),
        Command::SearchTns {
            n,
            bound,
            seed,
            attempts,
        } => {
            let mode = match seed {
                Some(seed) => SearchMode::Randomized { seed, attempts },
                None => SearchMode::Exhaustive {
                    budget: DEFAULT_SEARCH_BUDGET,
                },
            };
            match search_tns(n, bound, mode)? {
                Some(m) => writeln!(stdout, "{m}")?,
                None => writeln!(stdout, "none")?,
            }
            Ok(())
        }
        Command::EncodeInt(io) => with_io(&io, stdin, stdout, encode_int),
        Command::EncodeChs {
            n,
            eta,
            seed,
            recipe,
            io,
        } => {
            let mut cfg = match eta {
                Some(eta) => boosted_config(n, eta)?,
                None => PipelineConfig::new(n),
            };
            cfg.seed = seed;
            if let Some(r) = recipe {
                cfg.recipe = r.into();
            }
            let pipeline = Arc::new(Pipeline::new(cfg)?);
            with_io(&io, stdin, stdout, |input, out| encode_chs(&pipeline, input, out))
        }
        Command::Schedule {
            n,
            s_min,
            a,
            recipe,
            seed,
        } => {
            let cfg = PipelineConfig {
                a,
                s_min,
                recipe: recipe.into(),
                seed,
                ..PipelineConfig::new(n)
            };
            let p = Pipeline::new(cfg)?;
            for (lvl, built) in p.schedule.levels.iter().zip(&p.levels) {
                let row = json!({
                    "g": lvl.g,
                    "ell": lvl.ell.to_string(),
                    "s": lvl.s.to_string(),
                    "lo": lvl.lo.to_string(),
                    "hi": lvl.hi.to_string(),
                    "c_delta": built.params.c(),
                });
                writeln!(stdout, "{row}")?;
            }
            Ok(())
        }
        Command::Ecc {
            command: EccCommand::Build { s, delta, recipe, seed },
        } => {
            let spec = build_code_c(s, delta, recipe.into(), seed)?;
            writeln!(stdout, "{}", spec.summary())?;
            Ok(())
        }
        Command::Verify(args) => verify(args, stdout),
    }
}

fn pascal(n: usize, check: bool, out: &mut dyn Write) -> CliResult {
    let p = pascal_matrix(n);
    writeln!(out, "{p}")?;
    if check {
        let rep = is_totally_nonsingular(&p, DEFAULT_MINOR_BUDGET)?;
        let row = json!({
            "tns": rep.is_tns(),
            "minors": rep.minors_checked.to_string(),
            "positive": rep.positive.to_string(),
            "negative": rep.negative.to_string(),
            "witness": rep.witness.as_ref().map(|w| json!({"rows": w.rows, "cols": w.cols})),
        });
        writeln!(out, "{row}")?;
        if !rep.is_tns() {
            return Err(Failure::Verification("a staircase minor vanishes".into()));
        }
    }
    Ok(())
}

fn with_io<F>(io: &IoArgs, stdin: &mut dyn BufRead, stdout: &mut dyn Write, f: F) -> CliResult
where
    F: FnOnce(&mut dyn BufRead, &mut dyn Write) -> CliResult,
{
    let mut file_in;
    let input: &mut dyn BufRead = if io.input.as_os_str() == "-" {
        stdin
    } else {
        file_in = BufReader::new(File::open(&io.input)?);
        &mut file_in
    };
    match &io.output {
        None => f(input, stdout),
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(input, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn encode_int(input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let mut enc = IntTreeEncoder::new();
    let mut line = String::new();
    let mut i = 0usize;
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: Nat = t
            .parse()
            .map_err(|_| Failure::Usage(format!("line {}: not a natural number: {t:?}", i + 1)))?;
        let pair = enc.push(v)?;
        let row = json!({"i": i, "a": pair.a.to_string(), "b": pair.b.to_string()});
        writeln!(out, "{row}")?;
        out.flush()?;
        i += 1;
    }
}

/// Lines holding a single `0` or `1` are bits; longer lines are packed hex.
fn line_bits(t: &str) -> Result<BitString> {
    match t {
        "0" | "1" => Ok(BitString::from_bits(&[t == "1"])),
        _ => BitString::from_hex(t, 4 * t.len()),
    }
}

fn encode_chs(pipeline: &Arc<Pipeline>, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let mut enc = pipeline.encoder();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        for bit in line_bits(t)?.iter() {
            let sym = enc.push(bit)?;
            let i = enc.consumed();
            let row = json!({
                "i": i,
                "symbol": sym.to_symbol().to_string(),
                "gamma_bits": pipeline.alphabet_at(i)?.total_bits,
            });
            writeln!(out, "{row}")?;
        }
        out.flush()?;
    }
}

fn need<T>(v: Option<T>, flag: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this mode")))
}

fn emit(report: &DistanceReport, claim: Option<Rational64>, strict: bool, out: &mut dyn Write) -> CliResult {
    let mut row = report.to_json();
    let holds = claim.map(|c| if strict { report.value > c } else { report.value >= c });
    if let Some(c) = claim {
        row["claim"] = json!(format!("{}{c}", if strict { ">" } else { ">=" }));
        row["holds"] = json!(holds);
    }
    writeln!(out, "{row}")?;
    match holds {
        Some(false) => Err(Failure::Verification(format!(
            "value {} does not meet claim {}",
            report.value,
            claim.unwrap()
        ))),
        _ => Ok(()),
    }
}

/// Emits its input symbol unchanged.
#[derive(Clone)]
struct CopyEncoder(usize);

impl StreamEncoder for CopyEncoder {
    type Input = BigInt;
    type Output = BigInt;

    fn push(&mut self, v: BigInt) -> Result<BigInt> {
        self.0 += 1;
        Ok(v)
    }

    fn consumed(&self) -> usize {
        self.0
    }
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CliResult {
    match a.mode {
        Mode::Singleton => {
            let b = singleton_bound(need(a.n, "n")?, need(a.sigma, "sigma")?, need(a.gamma, "gamma")?)?;
            writeln!(out, "{b}")?;
            Ok(())
        }
        Mode::Distance => {
            let n = need(a.n, "n")?;
            let sigma = a.sigma.unwrap_or(2);
            let alphabet: Vec<BigInt> = (0..sigma).map(BigInt::from).collect();
            let rep = match a.code {
                CodeArg::Copy => tree_distance_exhaustive(&CopyEncoder(0), &alphabet, n)?,
                CodeArg::Pascal => tree_distance_exhaustive(&TcAEncoder::new(Arc::new(pascal_matrix(n))), &alphabet, n)?,
            };
            emit(&rep, a.claim, a.strict, out)
        }
        Mode::Tilde => {
            let n = need(a.n, "n")?;
            let sigma = a.sigma.unwrap_or(3);
            let range: Vec<BigInt> = (0..sigma).map(BigInt::from).collect();
            let rep = weight_distance_linear(&pascal_matrix(n), &range, n)?;
            emit(&rep, a.claim, a.strict, out)
        }
        Mode::Lagged => {
            let n = need(a.n, "n")?;
            let spec = build_code_c(a.s, Rational64::new(1, 4), Recipe::RsOnly, a.seed)?;
            let measured = exhaustive_code_distance(&spec)?;
            let delta = Rational64::new(measured.min_distance as i64, a.s as i64);
            let ell = a.a * a.s;
            let params = Arc::new(LaggedParams::new(a.s, ell, Arc::new(spec), PackedKind::Systematic)?.with_delta(delta));
            let mode = match a.trials {
                Some(trials) => LagMode::Sampled { seed: a.seed, trials },
                None => LagMode::Exhaustive,
            };
            let hi = a.max_lag.unwrap_or(n);
            let bits = [false, true];
            let rep = match a.variant {
                Variant::Truncated => lagged_distance(&TruncatedLagged::new(params.clone()), ell, hi, &bits, n, mode)?,
                Variant::Untruncated => {
                    lagged_distance(&UntruncatedLagged::new(params.clone()), ell, hi, &bits, n, mode)?
                }
            };
            emit(&rep, Some(a.claim.unwrap_or(params.guaranteed())), a.strict, out)
        }
        Mode::Toeplitz => {
            let n = need(a.n, "n")?;
            let code = sample_toeplitz_code(a.q, a.d, n, a.seed)?;
            let rep = toeplitz_tilde_distance(&code, n)?;
            let claim = a.delta.or(a.claim);
            emit(&rep, claim, a.delta.is_some() || a.strict, out)
        }
    }
}
