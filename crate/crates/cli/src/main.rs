use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qmc_core::codes::{
    agreement, basis_change, corrupt, default_eval_set, dimension, distance_lb, encode_frm,
    encode_qmult, rate, CodeParams, Codeword,
};
use qmc_core::decode::{choose_config, list_decode, DEFAULT_CAP};
use qmc_core::poly::random_poly_with;
use qmc_core::qcalc::BasisDirection;
use qmc_core::{selftest, Error, FieldTower, MultiPoly};

#[derive(Parser)]
#[command(name = "qmc", about = "Q-multiplicity codes: encode, corrupt, list decode")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Code parameters and decoding thresholds.
    Params(CodeArgs),
    /// Encode a message polynomial.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "code", value_enum, default_value_t = CodeKind::Qmult)]
        code_kind: CodeKind,
    },
    /// Replace randomly chosen blocks of a codeword.
    Corrupt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        errors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List decode a received word.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long = "code", value_enum, default_value_t = CodeKind::Qmult)]
        code_kind: CodeKind,
    },
    /// Seeded encode / corrupt / decode trials, one CSV row each.
    Experiment {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        errors: usize,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeKind {
    Qmult,
    Frm,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    e: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    s: u32,
    #[arg(long)]
    k: u32,
    #[arg(long = "A-size")]
    a_size: Option<usize>,
    /// Explicit evaluation set as comma-separated F_q encodings.
    #[arg(long = "A", value_delimiter = ',')]
    a: Option<Vec<u32>>,
}

impl CodeArgs {
    fn build(&self) -> Result<CodeParams, Error> {
        let tower = Arc::new(FieldTower::build(self.p, self.e)?);
        let a = match (&self.a, self.a_size) {
            (Some(v), _) => v
                .iter()
                .map(|&x| tower.fq_elem(x))
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(n)) => default_eval_set(&tower, n)?,
            (None, None) => return Err(Error::Regime("one of --A or --A-size is required".into())),
        };
        CodeParams::new(tower, self.m, self.s, self.k, a)
    }
}

enum Failure {
    Core(Error),
    Io(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_params(args: &CodeArgs) -> Result<String, Failure> {
    let p = args.build()?;
    let t = p.tower();
    let mut out = String::new();
    let _ = writeln!(out, "q={} [3]_q={}", t.q(), t.bracket3());
    let _ = writeln!(out, "block_size={} N={}", p.block_size(), p.n_blocks());
    let _ = writeln!(out, "dimension={} rate={} distance_lb={}", dimension(&p), rate(&p), distance_lb(&p));
    for r in 1..=p.s() {
        match choose_config(&p, r) {
            Ok(c) => {
                let _ = write!(out, "r={r} d={} T_min={} T_stated={}", c.d, c.t_min, c.t_stated);
                if let Some(dc) = c.d_closed_form {
                    let _ = write!(out, " d_closed_form={dc}");
                }
                out.push('\n');
            }
            Err(e) => {
                let _ = writeln!(out, "r={r} unavailable: {e}");
            }
        }
    }
    Ok(out)
}

fn cmd_encode(code: &CodeArgs, input: &PathBuf, kind: CodeKind) -> Result<String, Failure> {
    let p = code.build()?;
    let text = read(input)?;
    let f = MultiPoly::parse(p.tower(), text.trim()).map_err(as_malformed)?;
    let cw = match kind {
        CodeKind::Qmult => encode_qmult(&p, &f),
        CodeKind::Frm => encode_frm(&p, &f),
    }
    .map_err(as_malformed)?;
    Ok(cw.to_text(&p))
}

fn as_malformed(e: Error) -> Error {
    match e {
        Error::Regime(_) | Error::Malformed(_) => e,
        other => Error::Malformed(other.to_string()),
    }
}

fn cmd_corrupt(input: &PathBuf, errors: usize, seed: u64) -> Result<String, Failure> {
    let (p, cw) = Codeword::parse(&read(input)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(corrupt(&p, &cw, errors, &mut rng)?.to_text(&p))
}

fn cmd_decode(input: &PathBuf, r: u32, cap: u64, kind: CodeKind) -> Result<String, Failure> {
    let (p, mut w) = Codeword::parse(&read(input)?)?;
    if let CodeKind::Frm = kind {
        w = basis_change(&p, &w, BasisDirection::Nu)?;
    }
    let out = list_decode(&p, &w, r, cap)?;
    let c = &out.config;
    let mut text = format!("d={} T_min={} r={}\n", c.d, c.t_min, c.r);
    if p.m() > 1 {
        let _ = writeln!(text, "deg_Z={}", out.interpolation.z_degree);
    }
    text.push_str(&out.to_text());
    Ok(text)
}

struct Trial {
    index: u64,
    seed: u64,
    agreement: usize,
    dim: Option<usize>,
    listed: Option<usize>,
    success: bool,
    z_degree: u32,
}

fn run_trial(p: &CodeParams, r: u32, errors: usize, cap: u64, index: u64, seed: u64) -> Result<Trial, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_poly_with(p.tower(), p.m(), p.k(), &mut rng);
    let cw = encode_qmult(p, &f)?;
    let w = corrupt(p, &cw, errors, &mut rng)?;
    let out = list_decode(p, &w, r, cap)?;
    let success = match out.listed() {
        Some(list) => list.iter().any(|(g, _)| *g == f),
        None => out.space().is_some_and(|s| s.contains(p.tower(), &f)),
    };
    Ok(Trial {
        index,
        seed,
        agreement: agreement(&cw, &w)?,
        dim: out.space().map(|s| s.dim()),
        listed: out.listed().map(|l| l.len()),
        success,
        z_degree: out.interpolation.z_degree,
    })
}

fn cmd_experiment(
    code: &CodeArgs,
    r: u32,
    errors: usize,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<String, Failure> {
    let p = code.build()?;
    if errors >= p.n_blocks() {
        return Err(Error::Regime(format!("errors must be below N = {}", p.n_blocks())).into());
    }
    choose_config(&p, r)?;
    let rows: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(&p, r, errors, cap, i, seed.wrapping_add(i)))
        .collect::<Result<_, _>>()?;
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
    let mut out = String::from("trial,seed,errors,agreement,dim,listed,deg_z,success\n");
    let mut ok = 0;
    for t in &rows {
        ok += t.success as u64;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t.index,
            t.seed,
            errors,
            t.agreement,
            opt(t.dim),
            opt(t.listed),
            t.z_degree,
            t.success
        );
    }
    let rate = if trials == 0 { 0.0 } else { ok as f64 / trials as f64 };
    let _ = writeln!(out, "# trials={trials} successes={ok} success_rate={rate:.4}");
    Ok(out)
}

fn cmd_selftest(seed: u64) -> Result<String, Failure> {
    let checks = selftest::run_all(seed);
    let mut out = String::new();
    for c in &checks {
        let _ = writeln!(out, "{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Check("self-test failed".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Params(args) => emit(&None, &cmd_params(&args)?),
        Cmd::Encode { code, input, out, code_kind } => emit(&out, &cmd_encode(&code, &input, code_kind)?),
        Cmd::Corrupt { input, out, errors, seed } => emit(&out, &cmd_corrupt(&input, errors, seed)?),
        Cmd::Decode { input, out, r, cap, code_kind } => {
            emit(&out, &cmd_decode(&input, r, cap, code_kind)?)
        }
        Cmd::Experiment { code, r, errors, trials, seed, cap, out } => {
            emit(&out, &cmd_experiment(&code, r, errors, trials, seed, cap)?)
        }
        Cmd::Selftest { seed } => emit(&None, &cmd_selftest(seed)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Regime(_) => ExitCode::from(2),
                Error::Malformed(_)
                | Error::ShapeMismatch(_)
                | Error::ArityMismatch { .. }
                | Error::DegreeTooLarge { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
