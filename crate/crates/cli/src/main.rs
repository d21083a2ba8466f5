use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gpsk::analysis::{self, BoundMode};
use gpsk::constellation::{build_v1, build_v2, build_v3, v1_root, v2_r, v3_shell_counts};
use gpsk::tables;
use gpsk::{Constellation, ConstellationExport, DecoderKind, FamilySpec, SimConfig};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMAS: &str = "\
Output schemas (CSV with header row unless noted):
  build      JSON {family, label, n, M, L, codewords: [[[re, im], ...], ...]}
  diversity  family,n,L,rate,diversity_product,witness_i,witness_j
  table v1   n,r,o_term,shell_term,dp_analytic,dp_brute,ref_r,ref_o_term,ref_shell_term,ref_dp,match
  table v2   n,r,r_sin,sin,dp_analytic,dp_brute,o_dp,ref_r,ref_r_sin,ref_sin,ref_dp,ref_o_dp,match
  table v3   n,size,dp_analytic,dp_brute,ref_size,ref_dp,match
  simulate   family,n,N,snr_db,trials,errors,bler,ci95
  bound      family,n,N,mode,snr_db,union_bound

Reference columns are empty where no reference value exists; match is
'yes' when every reference value agrees within 1e-3.
A human-readable summary is written to stderr. Exit status is 2 on invalid
input.";

#[derive(Parser)]
#[command(name = "gpsk", version, about = "Generalized-PSK unitary space-time constellations", after_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a constellation and write it as JSON.
    Build(BuildArgs),
    /// Exhaustive diversity product of a constellation.
    Diversity(FamilyOut),
    /// Reproduce the V1, V2 or V3 reference table.
    Table(TableArgs),
    /// Monte Carlo block error rate of differential transmission.
    Simulate(SimulateArgs),
    /// Union bound on block error rate.
    Bound(BoundArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// o, v1, v2, v3, v4, diag3, real4-<base> or real8-<base>-<base>
    #[arg(long)]
    family: FamilySpec,
    /// Family parameter n (ignored for diag3).
    #[arg(long)]
    n: Option<usize>,
}

impl FamilyArgs {
    fn build(&self) -> Result<Constellation> {
        build_family(self.family, self.n)
    }
}

#[derive(Args)]
struct FamilyOut {
    #[command(flatten)]
    family: FamilyArgs,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// v1, v2 or v3
    #[arg(long)]
    family: String,
    /// Inclusive range `a..b` (default: the reference rows).
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    family: Option<FamilySpec>,
    #[arg(long)]
    n: Option<usize>,
    /// Receive antennas.
    #[arg(long = "N")]
    n_rx: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    /// Data blocks per SNR point (at least 100).
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// Data blocks per channel realization.
    #[arg(long)]
    frame_len: Option<usize>,
    /// JSON run description; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in comparison: fig1 (rate ≈ 4.5 families, N = 12) or fig3 (V4(2) vs diag3, N = 2).
    #[arg(long)]
    preset: Option<Preset>,
    /// Worker threads.
    #[arg(long, env = "GPSK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long = "N")]
    n_rx: usize,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    snr_db: Vec<f64>,
    /// coherent, noncoherent or differential
    #[arg(long, default_value = "differential")]
    mode: BoundMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum Preset {
    Fig1,
    Fig3,
}

/// Input rejected before any work was done.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn build_family(family: FamilySpec, n: Option<usize>) -> Result<Constellation> {
    let n = match (family, n) {
        (FamilySpec::Diag3, n) => n.unwrap_or(0),
        (_, Some(n)) => n,
        (_, None) => return Err(invalid(format!("--n is required for family {family}"))),
    };
    Ok(family.build(n)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_build(args: &BuildArgs) -> Result<()> {
    let c = args.family.build()?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer(&mut out, &ConstellationExport::from(&c))?;
    writeln!(out)?;
    eprintln!(
        "{}: L = {}, M = {}, rate = {:.4}",
        c.label(),
        c.len(),
        c.dimension(),
        c.rate()
    );
    Ok(())
}

#[derive(Serialize)]
struct DiversityRow {
    family: String,
    n: Option<usize>,
    #[serde(rename = "L")]
    l: usize,
    rate: f64,
    diversity_product: f64,
    witness_i: usize,
    witness_j: usize,
}

fn cmd_diversity(args: &FamilyOut) -> Result<()> {
    let c = args.family.build()?;
    let report = analysis::diversity_product(&c)?;
    let row = DiversityRow {
        family: args.family.family.to_string(),
        n: c.n(),
        l: c.len(),
        rate: c.rate(),
        diversity_product: report.value,
        witness_i: report.witness.0,
        witness_j: report.witness.1,
    };
    write_csv(args.out.as_deref(), &[row])?;
    eprintln!(
        "{}: L = {}, diversity product {:.6} at pair ({}, {}){}",
        c.label(),
        c.len(),
        report.value,
        report.witness.0,
        report.witness.1,
        if report.fully_diverse {
            ""
        } else {
            " (not fully diverse)"
        }
    );
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad range '{s}'")))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(invalid(format!("empty range '{s}'")));
    }
    Ok((lo..=hi).collect())
}

fn brute(c: &Constellation) -> Option<f64> {
    analysis::diversity_product(c).ok().map(|r| r.value)
}

fn flag(checks: &[(f64, Option<f64>)]) -> &'static str {
    let refs: Vec<_> = checks
        .iter()
        .filter_map(|(c, r)| r.map(|r| (*c, r)))
        .collect();
    if refs.is_empty() {
        ""
    } else if refs.iter().all(|&(c, r)| tables::matches(c, r)) {
        "yes"
    } else {
        "no"
    }
}

#[derive(Serialize)]
struct V1TableRow {
    n: usize,
    r: f64,
    o_term: f64,
    shell_term: f64,
    dp_analytic: f64,
    dp_brute: Option<f64>,
    ref_r: Option<f64>,
    ref_o_term: Option<f64>,
    ref_shell_term: Option<f64>,
    ref_dp: Option<f64>,
    r#match: &'static str,
}

#[derive(Serialize)]
struct V2TableRow {
    n: usize,
    r: f64,
    r_sin: f64,
    sin: f64,
    dp_analytic: f64,
    dp_brute: Option<f64>,
    o_dp: f64,
    ref_r: Option<f64>,
    ref_r_sin: Option<f64>,
    ref_sin: Option<f64>,
    ref_dp: Option<f64>,
    ref_o_dp: Option<f64>,
    r#match: &'static str,
}

#[derive(Serialize)]
struct V3TableRow {
    n: usize,
    size: usize,
    dp_analytic: f64,
    dp_brute: Option<f64>,
    ref_size: Option<usize>,
    ref_dp: Option<f64>,
    r#match: &'static str,
}

fn summarize_table(name: &str, flags: &[&str]) {
    let checked = flags.iter().filter(|f| !f.is_empty()).count();
    let ok = flags.iter().filter(|f| **f == "yes").count();
    eprintln!(
        "{name} table: {} rows, {ok}/{checked} reference rows match",
        flags.len()
    );
}

fn cmd_table(args: &TableArgs) -> Result<()> {
    let family = args.family.to_ascii_lowercase();
    let default = match family.as_str() {
        "v1" => "4..12",
        "v2" => "4..14",
        "v3" => "3..13",
        other => {
            return Err(invalid(format!(
                "table family must be v1, v2 or v3, got '{other}'"
            )))
        }
    };
    let ns = parse_range(args.n.as_deref().unwrap_or(default))?;
    let out = args.out.as_deref();
    match family.as_str() {
        "v1" => {
            let mut rows = Vec::new();
            for n in ns.into_iter().filter(|n| n % 2 == 0) {
                let r = v1_root(n)?;
                let reference = tables::v1_row(n);
                let (o_term, shell_term) = (analysis::o_product(n), analysis::v1_shell_term(r));
                let dp_brute = brute(&build_v1(n)?);
                let checks = [
                    (r, reference.map(|x| x.r)),
                    (o_term, reference.map(|x| x.o_term)),
                    (shell_term, reference.map(|x| x.shell_term)),
                    (dp_brute.unwrap_or(f64::NAN), reference.map(|x| x.dp)),
                ];
                rows.push(V1TableRow {
                    n,
                    r,
                    o_term,
                    shell_term,
                    dp_analytic: o_term.min(shell_term),
                    dp_brute,
                    ref_r: reference.map(|x| x.r),
                    ref_o_term: reference.map(|x| x.o_term),
                    ref_shell_term: reference.map(|x| x.shell_term),
                    ref_dp: reference.map(|x| x.dp),
                    r#match: flag(&checks),
                });
            }
            write_csv(out, &rows)?;
            summarize_table("V1", &rows.iter().map(|r| r.r#match).collect::<Vec<_>>());
        }
        "v2" => {
            let mut rows = Vec::new();
            for n in ns.into_iter().filter(|n| n % 2 == 0) {
                let r = v2_r(n)?;
                let reference = tables::v2_row(n);
                let r_sin = r * (2.0 * PI / n as f64).sin();
                let sin = (PI / n as f64).sin();
                let o_dp = FRAC_1_SQRT_2 * sin;
                let dp_brute = brute(&build_v2(n)?);
                let checks = [
                    (r, reference.map(|x| x.r)),
                    (r_sin, reference.map(|x| x.r_sin)),
                    (sin, reference.map(|x| x.sin)),
                    (dp_brute.unwrap_or(f64::NAN), reference.map(|x| x.dp)),
                    (o_dp, reference.map(|x| x.o_dp)),
                ];
                rows.push(V2TableRow {
                    n,
                    r,
                    r_sin,
                    sin,
                    dp_analytic: r_sin.min(sin),
                    dp_brute,
                    o_dp,
                    ref_r: reference.map(|x| x.r),
                    ref_r_sin: reference.map(|x| x.r_sin),
                    ref_sin: reference.map(|x| x.sin),
                    ref_dp: reference.map(|x| x.dp),
                    ref_o_dp: reference.map(|x| x.o_dp),
                    r#match: flag(&checks),
                });
            }
            write_csv(out, &rows)?;
            summarize_table("V2", &rows.iter().map(|r| r.r#match).collect::<Vec<_>>());
        }
        _ => {
            let mut rows = Vec::new();
            for n in ns {
                let size = v3_shell_counts(n)?.total();
                let reference = tables::v3_row(n);
                let dp_analytic = analysis::v3_product(n);
                let dp_brute = if size <= analysis::MAX_PAIR_SCAN {
                    brute(&build_v3(n)?)
                } else {
                    None
                };
                let size_ok = reference.is_none_or(|x| x.size == size);
                let mut f = flag(&[(dp_brute.unwrap_or(dp_analytic), reference.map(|x| x.dp))]);
                if !size_ok {
                    f = "no";
                }
                rows.push(V3TableRow {
                    n,
                    size,
                    dp_analytic,
                    dp_brute,
                    ref_size: reference.map(|x| x.size),
                    ref_dp: reference.map(|x| x.dp),
                    r#match: f,
                });
            }
            write_csv(out, &rows)?;
            summarize_table("V3", &rows.iter().map(|r| r.r#match).collect::<Vec<_>>());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSpec {
    family: FamilySpec,
    #[serde(default)]
    n: Option<usize>,
}

/// JSON form of a simulation request.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    #[serde(default)]
    runs: Vec<RunSpec>,
    #[serde(rename = "N")]
    n_rx: Option<usize>,
    snr_db: Option<Vec<f64>>,
    blocks: Option<usize>,
    seed: Option<u64>,
    decoder: Option<DecoderKind>,
    frame_len: Option<usize>,
}

fn preset(p: Preset) -> SimFile {
    let run = |family: &str, n: Option<usize>| RunSpec {
        family: family.parse().expect("valid preset family"),
        n,
    };
    match p {
        Preset::Fig1 => SimFile {
            runs: vec![
                run("o", Some(23)),
                run("v1", Some(16)),
                run("v2", Some(22)),
                run("v3", Some(5)),
            ],
            n_rx: Some(12),
            snr_db: Some(vec![4.0, 8.0, 12.0]),
            ..SimFile::default()
        },
        Preset::Fig3 => SimFile {
            runs: vec![run("v4", Some(2)), run("diag3", None)],
            n_rx: Some(2),
            snr_db: Some(vec![0.0, 3.0, 6.0, 9.0, 12.0]),
            ..SimFile::default()
        },
    }
}

#[derive(Serialize)]
struct SimRow {
    family: String,
    n: Option<usize>,
    #[serde(rename = "N")]
    n_rx: usize,
    snr_db: f64,
    trials: usize,
    errors: usize,
    bler: f64,
    ci95: f64,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SimFile>(&text)
                .map_err(|e| invalid(format!("config {}: {e}", path.display())))?
        }
        None => args.preset.map(preset).unwrap_or_default(),
    };
    if args.config.is_some() && args.preset.is_some() {
        return Err(invalid("--config and --preset are mutually exclusive"));
    }
    if let Some(family) = args.family {
        spec.runs = vec![RunSpec { family, n: args.n }];
    } else if args.n.is_some() {
        return Err(invalid("--n given without --family"));
    }
    if spec.runs.is_empty() {
        return Err(invalid(
            "no family given (use --family, --preset or --config)",
        ));
    }
    let n_rx = args
        .n_rx
        .or(spec.n_rx)
        .ok_or_else(|| invalid("--N is required"))?;
    let snr = args
        .snr_db
        .clone()
        .or(spec.snr_db.clone())
        .ok_or_else(|| invalid("--snr-db is required"))?;

    if matches!(args.preset, Some(Preset::Fig1)) && args.family.is_none() {
        eprintln!("note: the fig1 comparison set (O(23), V1(16), V2(22), V3(5)) is a reconstruction of a rate-4.5 comparison");
    }
    let mut rows = Vec::new();
    for run in &spec.runs {
        let c = build_family(run.family, run.n)?;
        let mut cfg = SimConfig::new(&c, n_rx, snr.clone());
        cfg.blocks_per_point = args.blocks.or(spec.blocks).unwrap_or(10_000);
        cfg.seed = args.seed.or(spec.seed).unwrap_or(0);
        cfg.decoder = args.decoder.or(spec.decoder).unwrap_or_default();
        cfg.frame_len = args.frame_len.or(spec.frame_len).unwrap_or(1);
        cfg.threads = args.threads;
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        let points = gpsk::run_bler(&cfg)?;
        for p in &points {
            eprintln!(
                "{:>14} rate {:.3}  {:>6.1} dB  BLER {:.3e} ± {:.1e}",
                c.label(),
                c.rate(),
                p.snr_db,
                p.bler,
                p.ci95_halfwidth
            );
            rows.push(SimRow {
                family: run.family.to_string(),
                n: c.n(),
                n_rx,
                snr_db: p.snr_db,
                trials: p.trials,
                errors: p.errors,
                bler: p.bler,
                ci95: p.ci95_halfwidth,
            });
        }
    }
    write_csv(args.out.as_deref(), &rows)
}

#[derive(Serialize)]
struct BoundRow {
    family: String,
    n: Option<usize>,
    #[serde(rename = "N")]
    n_rx: usize,
    mode: String,
    snr_db: f64,
    union_bound: f64,
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    if let Some(x) = args.snr_db.iter().find(|x| !x.is_finite()) {
        return Err(invalid(format!("SNR point {x} is not finite")));
    }
    let c = args.family.build()?;
    let mut rows = Vec::new();
    for &db in &args.snr_db {
        let u = analysis::union_bound_bler(&c, analysis::db_to_linear(db), args.n_rx, args.mode)?;
        eprintln!("{} {:>6.1} dB  union bound {:.3e}", c.label(), db, u);
        rows.push(BoundRow {
            family: args.family.family.to_string(),
            n: c.n(),
            n_rx: args.n_rx,
            mode: args.mode.to_string(),
            snr_db: db,
            union_bound: u,
        });
    }
    write_csv(args.out.as_deref(), &rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Diversity(a) => cmd_diversity(a),
        Command::Table(a) => cmd_table(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bound(a) => cmd_bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Invalid>() || e.is::<gpsk::Error>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
