//! Command-line surface. Every command writes its outputs plus a
//! `manifest.json` (resolved config, seeds, version, UTC time, SHA-256 of each
//! output) into `--out-dir`; `replay` re-runs a manifest and compares digests.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::acf::{fit_decay, worst_case_curve, write_curve_csv};
use crate::cfrac::{
    convergents, expand_cf, ostrowski, phi_tau, type_profile, OstrowskiBasis,
};
use crate::error::{Error, Result};
use crate::qirr::{khinchin_min, QuadraticIrrational};
use crate::sensing::{
    build_from_spec, cond_mc, identify_experiment, rip_report, CondExperiment, SizeRule,
    ToeplitzKind,
};
use crate::sequences::{generate, write_binary, write_csv, SequenceKind, SequenceSpec, ValueMode};

/// Version tag of every JSON document the CLI emits.
pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Parser, Debug)]
#[command(
    name = "hocrip",
    version,
    about = "Higher-order chirp sequences, Toeplitz RIP certificates and continued-fraction diagnostics",
    after_help = "CSV columns:\n  gen       t,re,im (first line: # <sequence spec JSON>)\n  acf       n,max_ratio,argmax_tau per spec; acf_comparison.csv has n,<spec>...\n  cond      n,trial,cond,cond_eig,lambda_min,lambda_max\n\nExit codes: 0 ok, 1 usage/config error, 2 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "snake_case")]
pub enum Command {
    /// Generate a probing sequence (CSV or binary).
    Gen(GenArgs),
    /// Worst-case ACF curves for one or more sequences.
    Acf(AcfArgs),
    /// RIP order certificate with sampled eigenvalue checks.
    Rip(RipArgs),
    /// Condition-number Monte Carlo over random column subsets.
    Cond(CondArgs),
    /// Continued-fraction and Ostrowski diagnostics.
    #[command(subcommand)]
    Numtheory(NumCmd),
    /// Sparse FIR identification with OMP.
    Identify(IdentifyArgs),
    /// Re-run a manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Hoc3,
    Sine,
    Prbs,
    Const,
    Pulse,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Complex,
    Real,
    Imag,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Csv,
    Bin,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixArg {
    Lower,
    Fat,
    Steady,
}

impl From<MatrixArg> for ToeplitzKind {
    fn from(m: MatrixArg) -> Self {
        match m {
            MatrixArg::Lower => ToeplitzKind::LowerTriangular,
            MatrixArg::Fat => ToeplitzKind::ZeroPaddedFat,
            MatrixArg::Steady => ToeplitzKind::SteadyState,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "hoc3")]
    pub kind: KindArg,
    /// Preset (golden, sqrt2, sqrt3, golden-1, …) or a,b,c,d for (a+b√d)/c.
    #[arg(long, default_value = "golden")]
    pub alpha: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    #[arg(long, default_value_t = 0)]
    pub start: u64,
    #[arg(long, value_enum, default_value = "complex")]
    pub mode: ModeArg,
    /// LFSR degree for PRBS.
    #[arg(long, default_value_t = 15)]
    pub degree: u32,
    /// LFSR taps mask (bit k = coefficient of x^k), e.g. 0x4001.
    #[arg(long)]
    pub taps: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub lfsr_seed: u32,
    /// Frequency shift in cycles per sample.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub doppler: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AcfArgs {
    /// Sequence descriptors: hoc3:<alpha>, sine:<alpha>, prbs[:deg[:taps]], const, pulse.
    #[arg(long = "spec", required = true, num_args = 1..)]
    pub specs: Vec<String>,
    /// Comma-separated lengths; `2^a..2^b` expands to powers of two.
    #[arg(long, default_value = "2^6..2^12")]
    pub lengths: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RipArgs {
    #[arg(long, default_value = "hoc3:golden")]
    pub spec: String,
    #[arg(long)]
    pub n: usize,
    /// Columns; defaults to n.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum, default_value = "fat")]
    pub matrix: MatrixArg,
    /// Random subsets of the certified size to check by eigenvalues.
    #[arg(long, default_value_t = 20)]
    pub subsets: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// TOML schema for `cond --config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondConfig {
    pub n_values: Vec<usize>,
    #[serde(default = "default_p")]
    pub p_rule: SizeRule,
    #[serde(default = "default_q")]
    pub q_rule: SizeRule,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cond_sequence")]
    pub sequence: String,
}

fn default_p() -> SizeRule {
    "2n".parse().expect("valid rule")
}

fn default_q() -> SizeRule {
    "n/5".parse().expect("valid rule")
}

fn default_cond_sequence() -> String {
    "hoc3:golden:re".into()
}

impl CondConfig {
    pub fn desk() -> Self {
        let e = CondExperiment::desk(0);
        Self {
            n_values: e.n_values,
            p_rule: e.p_rule,
            q_rule: e.q_rule,
            trials: e.trials,
            seed: 0,
            sequence: default_cond_sequence(),
        }
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CondArgs {
    /// TOML file: n_values, p_rule, q_rule, trials, seed, sequence.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration (`desk`: n ∈ {50,100,200}, p=2n, q=n/5, 200 trials).
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured sequence descriptor.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Fully resolved configuration, recorded in manifests.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<CondConfig>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "sub", rename_all = "snake_case")]
pub enum NumCmd {
    /// Partial quotients and convergents A_k/B_k with D_k = B_k α − A_k.
    Convergents {
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Ostrowski digits of m with respect to β ∈ (0,1).
    Ostrowski {
        #[arg(long)]
        m: String,
        #[arg(long, default_value = "golden-1")]
        beta: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Type histogram over 1..=n.
    Types {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value = "golden-1")]
        beta: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Largest-type sums φ(τ) for τ = 1..=tau_max.
    Phi {
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long)]
        n: u64,
        /// Rational λ ≥ 1, e.g. 1 or 3/2.
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long)]
        tau_max: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// min over 1 ≤ j ≤ n of j·‖jα‖.
    Khinchin {
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long)]
        n: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct IdentifyArgs {
    #[arg(long, default_value = "hoc3:golden:re")]
    pub spec: String,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 400)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "steady")]
    pub matrix: MatrixArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where the re-run writes its outputs.
    #[arg(long, default_value = "replay")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: Command,
    pub library_version: String,
    pub seeds: Vec<u64>,
    pub timestamp_utc: String,
    pub outputs: Vec<OutputDigest>,
}

/// Maps a failure onto the stable exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Runs a parsed command; returns the manifest it wrote (none for `replay`).
pub fn run(command: Command) -> Result<Option<RunManifest>> {
    match command {
        Command::Replay(args) => {
            replay(&args)?;
            Ok(None)
        }
        other => execute(other).map(Some),
    }
}

fn execute(command: Command) -> Result<RunManifest> {
    let mut command = command;
    if let Command::Cond(args) = &mut command {
        if args.resolved.is_none() {
            args.resolved = Some(resolve_cond(args)?);
        }
    }
    let out_dir = out_dir_of(&command).to_path_buf();
    fs::create_dir_all(&out_dir)?;
    let (files, seeds) = match &command {
        Command::Gen(a) => (cmd_gen(a)?, vec![]),
        Command::Acf(a) => (cmd_acf(a)?, vec![]),
        Command::Rip(a) => (cmd_rip(a)?, vec![a.seed]),
        Command::Cond(a) => {
            let cfg = a.resolved.clone().expect("resolved above");
            (cmd_cond(&cfg, &a.out_dir)?, vec![cfg.seed])
        }
        Command::Numtheory(n) => (cmd_numtheory(n)?, vec![]),
        Command::Identify(a) => (cmd_identify(a)?, vec![a.seed]),
        Command::Replay(_) => unreachable!("handled by run"),
    };
    let outputs = files
        .iter()
        .map(|name| {
            Ok(OutputDigest {
                file: name.clone(),
                sha256: file_sha256(&out_dir.join(name))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command_name(&command).into(),
        config: command,
        library_version: env!("CARGO_PKG_VERSION").into(),
        seeds,
        timestamp_utc: chrono::Utc::now().to_rfc3339(),
        outputs,
    };
    write_json(&out_dir.join(MANIFEST_NAME), &serde_json::to_value(&manifest)?)?;
    Ok(manifest)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Acf(_) => "acf",
        Command::Rip(_) => "rip",
        Command::Cond(_) => "cond",
        Command::Numtheory(_) => "numtheory",
        Command::Identify(_) => "identify",
        Command::Replay(_) => "replay",
    }
}

fn out_dir_of(c: &Command) -> &Path {
    match c {
        Command::Gen(a) => &a.out_dir,
        Command::Acf(a) => &a.out_dir,
        Command::Rip(a) => &a.out_dir,
        Command::Cond(a) => &a.out_dir,
        Command::Identify(a) => &a.out_dir,
        Command::Replay(a) => &a.out_dir,
        Command::Numtheory(n) => match n {
            NumCmd::Convergents { out_dir, .. }
            | NumCmd::Ostrowski { out_dir, .. }
            | NumCmd::Types { out_dir, .. }
            | NumCmd::Phi { out_dir, .. }
            | NumCmd::Khinchin { out_dir, .. } => out_dir,
        },
    }
}

fn set_out_dir(c: &mut Command, dir: PathBuf) {
    match c {
        Command::Gen(a) => a.out_dir = dir,
        Command::Acf(a) => a.out_dir = dir,
        Command::Rip(a) => a.out_dir = dir,
        Command::Cond(a) => a.out_dir = dir,
        Command::Identify(a) => a.out_dir = dir,
        Command::Replay(a) => a.out_dir = dir,
        Command::Numtheory(n) => match n {
            NumCmd::Convergents { out_dir, .. }
            | NumCmd::Ostrowski { out_dir, .. }
            | NumCmd::Types { out_dir, .. }
            | NumCmd::Phi { out_dir, .. }
            | NumCmd::Khinchin { out_dir, .. } => *out_dir = dir,
        },
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    v
}

fn spec_label(desc: &str) -> String {
    desc.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// `64,128` or `2^6..2^12` (mixable, comma-separated).
pub fn parse_lengths(s: &str) -> Result<Vec<usize>> {
    let bad = |t: &str| Error::Config(format!("bad length item {t:?}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let exp = |t: &str| -> Result<u32> {
                t.trim()
                    .strip_prefix("2^")
                    .and_then(|e| e.parse().ok())
                    .filter(|&e: &u32| e < 40)
                    .ok_or_else(|| bad(item))
            };
            let (lo, hi) = (exp(a)?, exp(b)?);
            out.extend((lo..=hi).map(|e| 1usize << e));
        } else if let Some(e) = item.strip_prefix("2^") {
            let e: u32 = e.parse().map_err(|_| bad(item))?;
            out.push(1usize << e);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() || out[0] == 0 {
        return Err(Error::Config("lengths must be a nonempty list of positive integers".into()));
    }
    Ok(out)
}

fn cmd_gen(a: &GenArgs) -> Result<Vec<String>> {
    let length = a.length as usize;
    let alpha = || QuadraticIrrational::parse(&a.alpha);
    let mut spec = match a.kind {
        KindArg::Hoc3 => SequenceSpec::hoc3(alpha()?, length),
        KindArg::Sine => SequenceSpec::sine_sweep(alpha()?, length),
        KindArg::Prbs => {
            let desc = match &a.taps {
                Some(t) => format!("prbs:{}:{t}:{}", a.degree, a.lfsr_seed),
                None => format!("prbs:{}", a.degree),
            };
            let mut s = SequenceSpec::from_descriptor(&desc, length)?;
            s.seed = Some(a.lfsr_seed);
            s
        }
        KindArg::Const => SequenceSpec::constant(length),
        KindArg::Pulse => SequenceSpec::pulse(length),
    };
    spec = spec
        .with_start(a.start)
        .with_doppler(a.doppler)
        .with_mode(match a.mode {
            ModeArg::Complex => ValueMode::Complex,
            ModeArg::Real => ValueMode::RealPart,
            ModeArg::Imag => ValueMode::ImagPart,
        });
    let seq = generate(&spec)?;
    let name = match a.format {
        FormatArg::Csv => "sequence.csv",
        FormatArg::Bin => "sequence.bin",
    };
    let mut w = BufWriter::new(fs::File::create(a.out_dir.join(name))?);
    match a.format {
        FormatArg::Csv => write_csv(&seq, &mut w)?,
        FormatArg::Bin => write_binary(&seq, &mut w)?,
    }
    w.flush()?;
    println!("wrote {} samples ({:?}) to {}", seq.len(), spec.kind, a.out_dir.join(name).display());
    Ok(vec![name.into()])
}

fn cmd_acf(a: &AcfArgs) -> Result<Vec<String>> {
    let lengths = parse_lengths(&a.lengths)?;
    let specs = a
        .specs
        .iter()
        .map(|d| SequenceSpec::from_descriptor(d, 1).map(|s| (d.clone(), s)))
        .collect::<Result<Vec<_>>>()?;
    let mut files = Vec::new();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for (desc, spec) in &specs {
        let curve = worst_case_curve(spec, &lengths)?;
        let label = spec_label(desc);
        let name = format!("acf_{label}.csv");
        let mut w = BufWriter::new(fs::File::create(a.out_dir.join(&name))?);
        write_curve_csv(&curve, &mut w)?;
        w.flush()?;
        files.push(name);
        let fit = fit_decay(&curve).ok();
        summary.push(json!({ "spec": desc, "label": label, "curve": curve, "fit": fit }));
        curves.push((label, curve));
    }
    let mut table = String::from("n");
    for (label, _) in &curves {
        table.push(',');
        table.push_str(label);
    }
    table.push('\n');
    for (i, n) in lengths.iter().enumerate() {
        table.push_str(&n.to_string());
        for (_, c) in &curves {
            table.push_str(&format!(",{:e}", c[i].max_ratio));
        }
        table.push('\n');
    }
    fs::write(a.out_dir.join("acf_comparison.csv"), &table)?;
    files.push("acf_comparison.csv".into());
    write_json(
        &a.out_dir.join("acf_summary.json"),
        &with_schema(json!({ "lengths": lengths, "specs": summary })),
    )?;
    files.push("acf_summary.json".into());
    print!("{table}");
    Ok(files)
}

fn cmd_rip(a: &RipArgs) -> Result<Vec<String>> {
    let spec = SequenceSpec::from_descriptor(&a.spec, 1)?;
    let p = a.p.unwrap_or(a.n);
    let kind: ToeplitzKind = a.matrix.into();
    let u = build_from_spec(&spec, a.n, p, kind)?;
    let report = rip_report(&u, a.subsets, a.seed)?;
    println!(
        "certified RIP order q = {} (R = {:.6}, δ_q estimate {:.6} over {} subsets)",
        report.q,
        report.r_bound,
        report.delta_q_estimate,
        report.sampled_eigs.len()
    );
    write_json(
        &a.out_dir.join("rip_report.json"),
        &with_schema(json!({
            "spec": a.spec, "n": a.n, "p": p, "matrix": kind, "seed": a.seed, "report": report
        })),
    )?;
    Ok(vec!["rip_report.json".into()])
}

fn resolve_cond(a: &CondArgs) -> Result<CondConfig> {
    let mut cfg = match (&a.config, a.preset.as_deref()) {
        (Some(path), _) => CondConfig::parse_toml(&fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?)?,
        (None, None) | (None, Some("desk")) => CondConfig::desk(),
        (None, Some(other)) => return Err(Error::Config(format!("unknown preset {other:?}"))),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(spec) = &a.spec {
        cfg.sequence = spec.clone();
    }
    Ok(cfg)
}

fn cmd_cond(cfg: &CondConfig, out_dir: &Path) -> Result<Vec<String>> {
    let exp = CondExperiment {
        n_values: cfg.n_values.clone(),
        p_rule: cfg.p_rule,
        q_rule: cfg.q_rule,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let spec = SequenceSpec::from_descriptor(&cfg.sequence, 1)?;
    let results = cond_mc(&exp, &spec)?;
    let mut csv = String::from("n,trial,cond,cond_eig,lambda_min,lambda_max\n");
    for c in &results.cells {
        csv.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e}\n",
            c.n, c.trial, c.cond, c.cond_eig, c.lambda_min, c.lambda_max
        ));
    }
    fs::write(out_dir.join("cond_cells.csv"), csv)?;
    write_json(
        &out_dir.join("cond_summary.json"),
        &with_schema(json!({ "config": cfg, "summary": results.summary })),
    )?;
    println!("n,p,q,min,median,max,mean");
    for s in &results.summary {
        println!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6}",
            s.n, s.p, s.q, s.min, s.median, s.max, s.mean
        );
    }
    Ok(vec!["cond_cells.csv".into(), "cond_summary.json".into()])
}

fn parse_bigint(s: &str, what: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{what} must be an integer, got {s:?}")))
}

fn parse_rational(s: &str) -> Result<Rational64> {
    let bad = || Error::invalid(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(a, b))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn cmd_numtheory(cmd: &NumCmd) -> Result<Vec<String>> {
    let (name, doc, out_dir) = match cmd {
        NumCmd::Convergents { alpha, k, out_dir } => {
            let q = QuadraticIrrational::parse(alpha)?;
            let cf = expand_cf(&q, *k)?;
            let rows: Vec<Value> = convergents(&cf, *k)?
                .iter()
                .map(|c| {
                    println!("{:>4}  {:>24}/{:<24}  D = {}", c.k, c.numerator, c.denominator, c.d_value);
                    json!({
                        "k": c.k,
                        "a_k": cf.quotient(c.k).to_string(),
                        "numerator": c.numerator.to_string(),
                        "denominator": c.denominator.to_string(),
                        "d": c.d_value,
                    })
                })
                .collect();
            let doc = json!({
                "alpha": q, "period_start": cf.period_start, "period_length": cf.period_length,
                "convergents": rows
            });
            ("numtheory_convergents.json", doc, out_dir)
        }
        NumCmd::Ostrowski { m, beta, out_dir } => {
            let m = parse_bigint(m, "m")?;
            let b = QuadraticIrrational::parse(beta)?;
            let rep = ostrowski(&m, &b)?;
            let basis = OstrowskiBasis::new(&b, &m)?;
            let terms: Vec<String> = rep
                .coeffs
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| c.sign() != num_bigint::Sign::NoSign)
                .map(|(j, c)| format!("{c}·{}", basis.denominators[j]))
                .collect();
            println!("{m} = {}  (type {})", terms.join(" + "), rep.type_index());
            let doc = json!({
                "m": m.to_string(),
                "beta": b,
                "coefficients": rep.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "denominators": basis.denominators[..rep.coeffs.len()].iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "type": rep.type_index(),
                "reconstructed": rep.reconstruct(&basis).to_string(),
                "constraints_ok": rep.satisfies_constraints(&basis),
            });
            ("numtheory_ostrowski.json", doc, out_dir)
        }
        NumCmd::Types { n, beta, out_dir } => {
            let b = QuadraticIrrational::parse(beta)?;
            let prof = type_profile(*n, &b)?;
            let rows: Vec<Value> = prof
                .histogram
                .iter()
                .map(|(&(l, c), &count)| {
                    json!({ "type": l, "coeff": c, "count": count, "bound": prof.cardinality_bound(l) })
                })
                .collect();
            let violations = prof.cardinality_violations().len();
            println!(
                "n = {n}: max type {} (bound {:.3}), {} cells, {violations} cardinality violations",
                prof.max_type,
                prof.max_type_bound(),
                rows.len()
            );
            let doc = json!({
                "n": n, "beta": b, "max_type": prof.max_type, "max_type_bound": prof.max_type_bound(),
                "denominators": prof.denominators, "histogram": rows, "violations": violations
            });
            ("numtheory_types.json", doc, out_dir)
        }
        NumCmd::Phi { alpha, n, lambda, tau_max, out_dir } => {
            let q = QuadraticIrrational::parse(alpha)?;
            let lam = parse_rational(lambda)?;
            let reach = (lam * Rational64::from_integer(*n as i64)).floor().to_integer().max(0) as u64;
            let top = tau_max.unwrap_or(reach.min(64)).min(reach);
            let rows = (1..=top)
                .map(|tau| phi_tau(tau, &q, *n, lam))
                .collect::<Result<Vec<_>>>()?;
            for r in &rows {
                println!("τ = {:>5}  B = {:>8}  φ = {:.6}  φ/n = {:.3e}", r.tau, r.first_of_type, r.value, r.normalized);
            }
            let doc = json!({ "alpha": q, "n": n, "lambda": lambda, "rows": rows });
            ("numtheory_phi.json", doc, out_dir)
        }
        NumCmd::Khinchin { alpha, n, out_dir } => {
            let q = QuadraticIrrational::parse(alpha)?;
            let n = parse_bigint(n, "n")?;
            let (v, j) = khinchin_min(&q, &n)?;
            println!("min j·‖jα‖ over 1..={n} is {v} at j = {j}");
            let doc = json!({ "alpha": q, "n": n.to_string(), "min": v, "argmin": j.to_string() });
            ("numtheory_khinchin.json", doc, out_dir)
        }
    };
    write_json(&out_dir.join(name), &with_schema(doc))?;
    Ok(vec![name.into()])
}

fn cmd_identify(a: &IdentifyArgs) -> Result<Vec<String>> {
    if a.k > a.n {
        return Err(Error::domain(format!("sparsity k = {} exceeds n = {}", a.k, a.n)));
    }
    let spec = SequenceSpec::from_descriptor(&a.spec, 1)?;
    if matches!(spec.kind, SequenceKind::Hoc3 | SequenceKind::SineSweep)
        && spec.value_mode == ValueMode::Complex
    {
        return Err(Error::domain("identification needs a real sequence; append :re or :im"));
    }
    let u = build_from_spec(&spec, a.n, a.p, a.matrix.into())?;
    let report = identify_experiment(&u, a.k, a.sigma, a.trials, a.seed)?;
    println!(
        "support recovery {:.1}% over {} trials, median relative error {:.3e}, max abs error {:.3e}",
        100.0 * report.support_recovery_rate,
        a.trials,
        report.median_rel_error,
        report.max_abs_error
    );
    write_json(
        &a.out_dir.join("identify_report.json"),
        &with_schema(json!({ "spec": a.spec, "matrix": ToeplitzKind::from(a.matrix), "report": report })),
    )?;
    Ok(vec!["identify_report.json".into()])
}

/// Outcome of a replay: per-file digest comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayCheck {
    pub file: String,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

pub fn replay(a: &ReplayArgs) -> Result<Vec<ReplayCheck>> {
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.manifest.display())))?;
    let old: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))?;
    let mut cmd = old.config.clone();
    if matches!(cmd, Command::Replay(_)) {
        return Err(Error::Config("a manifest cannot replay a replay".into()));
    }
    set_out_dir(&mut cmd, a.out_dir.clone());
    let fresh = execute(cmd)?;
    let checks: Vec<ReplayCheck> = old
        .outputs
        .iter()
        .map(|o| {
            let actual = fresh
                .outputs
                .iter()
                .find(|f| f.file == o.file)
                .map(|f| f.sha256.clone())
                .unwrap_or_default();
            ReplayCheck {
                file: o.file.clone(),
                matches: actual == o.sha256,
                expected: o.sha256.clone(),
                actual,
            }
        })
        .collect();
    for c in &checks {
        println!("{} {}", if c.matches { "identical" } else { "DIFFERS  " }, c.file);
    }
    if checks.iter().any(|c| !c.matches) {
        return Err(Error::invalid("replayed outputs differ from the manifest"));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_grammar() {
        assert_eq!(parse_lengths("2^6..2^8").unwrap(), vec![64, 128, 256]);
        assert_eq!(parse_lengths("100, 50,2^4").unwrap(), vec![16, 50, 100]);
        assert!(parse_lengths("0").is_err());
        assert!(parse_lengths("abc").is_err());
    }

    #[test]
    fn cond_config_schema() {
        let cfg = CondConfig::parse_toml(
            "n_values = [50, 100]\np_rule = \"2n\"\nq_rule = \"n/5\"\ntrials = 3\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.n_values, vec![50, 100]);
        assert_eq!(cfg.q_rule.apply(100), 20);
        assert_eq!(cfg.sequence, "hoc3:golden:re");
        assert!(CondConfig::parse_toml("n_values = [50]\ntrials = 1\nbogus = 1\n").is_err());
        assert!(CondConfig::parse_toml("trials = 1\n").is_err());
    }

    #[test]
    fn manifest_round_trips_command() {
        let cmd = Command::Numtheory(NumCmd::Types {
            n: 100,
            beta: "golden-1".into(),
            out_dir: "x".into(),
        });
        let v = serde_json::to_string(&cmd).unwrap();
        let back: Command = serde_json::from_str(&v).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), v);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::IllConditioned("x".into())), 2);
        assert_eq!(
            exit_code(&Error::PrecisionInsufficient { digits: 3, context: "x".into() }),
            2
        );
    }
}
