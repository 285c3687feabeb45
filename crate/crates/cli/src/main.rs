//! Command-line front door: spectra, verification suites, and the operator
//! identity battery, with reproducible seeds and machine-readable output.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use dirac_sharp::report::{
    csv_escape, spectrum_to_csv, spectrum_to_json, spectrum_to_text, ReportRow,
    VerificationReport,
};
use dirac_sharp::sphere::{spectrum_table, OperatorKind};
use dirac_sharp::suites::{
    euclidean_suite, identities_suite, kernels_suite, sphere_suite, SuiteConfig, Tolerances,
    DEFAULT_SEED,
};

#[derive(Parser)]
#[command(name = "dirac-sharp", version)]
#[command(about = "Dirac-type operator spectra on S^n and sharp L2 inequality verification")]
struct Cli {
    /// Optional JSON config file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table of D_S^{(k)} (or a custom alpha chain) on S^n.
    Spectrum(SpectrumArgs),
    /// Run verification suites and emit a self-checking report.
    Verify(VerifyArgs),
    /// Run the operator-identity battery.
    Identities(IdentitiesArgs),
}

#[derive(Args)]
struct SpectrumArgs {
    /// Sphere dimension.
    #[arg(long)]
    n: Option<usize>,

    /// Operator order k of D_S^{(k)}.
    #[arg(long)]
    k: Option<usize>,

    /// Explicit factor offsets: the chain prod_i (D_S - alpha_i w).
    /// Overrides --k when given.
    #[arg(long = "alpha", num_args = 1.., allow_hyphen_values = true)]
    alphas: Vec<f64>,

    /// Largest degree m in the table.
    #[arg(long)]
    mmax: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite selection.
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,

    /// Sphere dimension (default: 2 and 3).
    #[arg(long)]
    n: Option<usize>,

    /// Operator order (default: 1, 2 and 4).
    #[arg(long)]
    k: Option<usize>,

    /// Band limit of random trial fields.
    #[arg(long)]
    band: Option<usize>,

    /// Random trials per row.
    #[arg(long)]
    trials: Option<usize>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args)]
struct IdentitiesArgs {
    /// Restrict to identities whose name contains this substring
    /// (e.g. eq1, ahlfors, lemma1, c1-convolution, c2-identity).
    #[arg(long)]
    identity: Option<String>,

    /// Moebius map for the ahlfors battery (only `cayley` is built in).
    #[arg(long)]
    map: Option<String>,

    #[arg(long)]
    n: Option<usize>,

    #[arg(long)]
    k: Option<usize>,

    #[arg(long)]
    band: Option<usize>,

    #[arg(long)]
    trials: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[command(flatten)]
    tols: TolArgs,
}

/// Named tolerance overrides (--tol-<name> <value>).
#[derive(Args, Clone)]
struct TolArgs {
    #[arg(long = "tol-lemma1")]
    tol_lemma1: Option<f64>,
    #[arg(long = "tol-identity")]
    tol_identity: Option<f64>,
    #[arg(long = "tol-eq1")]
    tol_eq1: Option<f64>,
    #[arg(long = "tol-c1-cross")]
    tol_c1_cross: Option<f64>,
    #[arg(long = "tol-c2-identity")]
    tol_c2_identity: Option<f64>,
    #[arg(long = "tol-isometry")]
    tol_isometry: Option<f64>,
    #[arg(long = "tol-parseval")]
    tol_parseval: Option<f64>,
    #[arg(long = "tol-sphere-ratio")]
    tol_sphere_ratio: Option<f64>,
    #[arg(long = "tol-sphere-extremal")]
    tol_sphere_extremal: Option<f64>,
    #[arg(long = "tol-euclid-ratio")]
    tol_euclid_ratio: Option<f64>,
    #[arg(long = "tol-euclid-extremal")]
    tol_euclid_extremal: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Sphere,
    Euclidean,
    Kernels,
    All,
}

/// Values an external JSON config may provide; flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    k: Option<usize>,
    mmax: Option<usize>,
    band: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    format: Option<String>,
    out: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| "parsing config JSON")
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("DIRAC_SHARP_THREADS") {
        if let Ok(cap) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(cap.max(1))
                .build_global();
        }
    }
}

fn apply_tols(tol: &mut Tolerances, args: &TolArgs) {
    if let Some(v) = args.tol_lemma1 {
        tol.lemma1 = v;
    }
    if let Some(v) = args.tol_identity {
        tol.identity = v;
    }
    if let Some(v) = args.tol_eq1 {
        tol.eq1 = v;
    }
    if let Some(v) = args.tol_c1_cross {
        tol.c1_cross = v;
    }
    if let Some(v) = args.tol_c2_identity {
        tol.c2_identity = v;
    }
    if let Some(v) = args.tol_isometry {
        tol.isometry = v;
    }
    if let Some(v) = args.tol_parseval {
        tol.parseval = v;
    }
    if let Some(v) = args.tol_sphere_ratio {
        tol.sphere_ratio = v;
    }
    if let Some(v) = args.tol_sphere_extremal {
        tol.sphere_extremal = v;
    }
    if let Some(v) = args.tol_euclid_ratio {
        tol.euclid_ratio = v;
    }
    if let Some(v) = args.tol_euclid_extremal {
        tol.euclid_extremal = v;
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn rows_to_text(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    for row in rows {
        match row {
            ReportRow::Sphere(r) => s.push_str(&format!(
                "[{}] sphere {} n={} k={} constant={:.12} min_ratio={:.12} extremal_gap={:.3e}{}\n",
                pass_str(r.pass),
                r.theorem,
                r.n,
                r.k,
                r.constant,
                r.min_ratio,
                r.extremal_gap,
                trivia(r.trivial)
            )),
            ReportRow::Euclid(r) => s.push_str(&format!(
                "[{}] euclid {} n={} k={} constant={:.12} ratio_min={:.12} ratio_extremal={:.12}{}\n",
                pass_str(r.pass),
                r.theorem,
                r.n,
                r.k,
                r.constant,
                r.ratio_min,
                r.ratio_extremal,
                trivia(r.trivial)
            )),
            ReportRow::Kernel(r) => s.push_str(&format!(
                "[{}] kernel {} n={} k={} bound={:.12} ratio_max={:.12} err={:.2e}{}\n",
                pass_str(r.pass),
                r.theorem,
                r.n,
                r.k,
                r.bound,
                r.ratio_max,
                r.quadrature_error,
                trivia(r.trivial)
            )),
            ReportRow::Identity(r) => s.push_str(&format!(
                "[{}] identity {} n={} k={} residual={:.3e} tol={:.1e}{}\n",
                pass_str(r.pass),
                r.identity,
                r.n,
                r.k,
                r.residual,
                r.tolerance,
                if r.detail.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", r.detail)
                }
            )),
        }
    }
    s
}

fn pass_str(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

fn trivia(t: bool) -> &'static str {
    if t {
        " (trivial)"
    } else {
        ""
    }
}

fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("type,theorem,n,k,constant,min_ratio,extremal,error,pass\r\n");
    for row in rows {
        match row {
            ReportRow::Sphere(r) => s.push_str(&format!(
                "sphere,{},{},{},{},{},{},,{}\r\n",
                csv_escape(&r.theorem), r.n, r.k, r.constant, r.min_ratio, r.extremal_gap, r.pass
            )),
            ReportRow::Euclid(r) => s.push_str(&format!(
                "euclid,{},{},{},{},{},{},{},{}\r\n",
                csv_escape(&r.theorem),
                r.n,
                r.k,
                r.constant,
                r.ratio_min,
                r.ratio_extremal,
                r.quadrature_error,
                r.pass
            )),
            ReportRow::Kernel(r) => s.push_str(&format!(
                "kernel,{},{},{},{},{},,{},{}\r\n",
                csv_escape(&r.theorem), r.n, r.k, r.bound, r.ratio_max, r.quadrature_error, r.pass
            )),
            ReportRow::Identity(r) => s.push_str(&format!(
                "identity,{},{},{},{},{},,,{}\r\n",
                csv_escape(&r.identity), r.n, r.k, r.tolerance, r.residual, r.pass
            )),
        }
    }
    s
}

fn run_spectrum(
    args: &SpectrumArgs,
    file: &FileConfig,
    format: Format,
    out: &Option<PathBuf>,
) -> anyhow::Result<bool> {
    let n = args.n.or(file.n).unwrap_or(3);
    if n == 0 || n > 7 {
        bail!("config: n={n} out of supported range 1..=7 for spectra");
    }
    let mmax = args.mmax.or(file.mmax).unwrap_or(6);
    let op = if !args.alphas.is_empty() {
        OperatorKind::AlphaChain(args.alphas.clone())
    } else {
        let k = args.k.or(file.k).unwrap_or(1);
        if k == 0 || k > 8 {
            bail!("config: k={k} out of supported range 1..=8");
        }
        OperatorKind::Dsk(k)
    };
    let table = spectrum_table(op, n, mmax);
    let text = match format {
        Format::Csv => spectrum_to_csv(&table),
        Format::Json => spectrum_to_json(&table) + "\n",
        Format::Text => spectrum_to_text(&table),
    };
    emit(out, &text)?;
    Ok(true)
}

fn suite_config(
    n: Option<usize>,
    k: Option<usize>,
    band: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    file: &FileConfig,
    tols: &TolArgs,
) -> anyhow::Result<SuiteConfig> {
    let mut cfg = SuiteConfig::default();
    if let Some(n) = n.or(file.n) {
        if n == 0 || n > 4 {
            bail!("config: quadrature-backed suites support n in 1..=4, got {n}");
        }
        cfg.n_list = vec![n];
    }
    if let Some(k) = k.or(file.k) {
        if k == 0 || k > 6 {
            bail!("config: k must be in 1..=6, got {k}");
        }
        cfg.k_list = vec![k];
    }
    cfg.band = band.or(file.band).unwrap_or(2);
    if cfg.band > 4 {
        bail!("config: band limit capped at 4, got {}", cfg.band);
    }
    cfg.trials = trials.or(file.trials).unwrap_or(100);
    cfg.seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    apply_tols(&mut cfg.tol, tols);
    Ok(cfg)
}

fn render_report(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json_pretty() + "\n",
        Format::Csv => rows_to_csv(&report.rows),
        Format::Text => {
            let mut t = rows_to_text(&report.rows);
            t.push_str(&format!("overall: {}\n", pass_str(report.pass)));
            t
        }
    }
}

fn run_verify(
    args: &VerifyArgs,
    file: &FileConfig,
    format: Format,
    out: &Option<PathBuf>,
) -> anyhow::Result<bool> {
    let started = Instant::now();
    let cfg = suite_config(
        args.n, args.k, args.band, args.trials, args.seed, file, &args.tols,
    )?;

    let mut rows: Vec<ReportRow> = Vec::new();
    if matches!(args.suite, Suite::Sphere | Suite::All) {
        rows.extend(sphere_suite(&cfg)?);
    }
    if matches!(args.suite, Suite::Euclidean | Suite::All) {
        rows.extend(euclidean_suite(&cfg)?);
    }
    if matches!(args.suite, Suite::Kernels | Suite::All) {
        let kernels_cfg = SuiteConfig {
            trials: cfg.trials.min(20),
            ..cfg.clone()
        };
        rows.extend(kernels_suite(&kernels_cfg)?);
    }

    let suite_name = match args.suite {
        Suite::Sphere => "sphere",
        Suite::Euclidean => "euclidean",
        Suite::Kernels => "kernels",
        Suite::All => "all",
    };
    let config_echo = serde_json::json!({
        "command": "verify",
        "suite": suite_name,
        "n": cfg.n_list,
        "k": cfg.k_list,
        "band": cfg.band,
        "trials": cfg.trials,
        "seed": cfg.seed,
    });
    let mut report = VerificationReport::new(config_echo, rows);
    report.total_wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    assert!(report.self_check());

    emit(out, &render_report(&report, format))?;
    Ok(report.pass)
}

fn run_identities(
    args: &IdentitiesArgs,
    file: &FileConfig,
    format: Format,
    out: &Option<PathBuf>,
) -> anyhow::Result<bool> {
    if let Some(map) = &args.map {
        if map != "cayley" {
            bail!("config: only --map cayley is built in, got {map}");
        }
    }
    let started = Instant::now();
    let mut cfg = suite_config(
        args.n, args.k, args.band, args.trials, args.seed, file, &args.tols,
    )?;
    if args.n.or(file.n).is_none() {
        cfg.n_list = vec![2, 3];
    }
    if args.k.or(file.k).is_none() {
        cfg.k_list = vec![1, 2, 3];
    }
    let filter = args.identity.as_deref();
    let rows = identities_suite(&cfg, filter)?;
    if rows.is_empty() {
        bail!("config: no identity matches filter {:?}", filter);
    }

    let config_echo = serde_json::json!({
        "command": "identities",
        "identity": filter,
        "n": cfg.n_list,
        "k": cfg.k_list,
        "band": cfg.band,
        "trials": cfg.trials,
        "seed": cfg.seed,
    });
    let mut report = VerificationReport::new(config_echo, rows);
    report.total_wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    assert!(report.self_check());

    emit(out, &render_report(&report, format))?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();

    let file = match load_config(&cli.config) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let format = cli.format.unwrap_or(match file.format.as_deref() {
        Some("csv") => Format::Csv,
        Some("text") => Format::Text,
        _ => Format::Json,
    });
    let out = cli.out.clone().or_else(|| file.out.clone());

    let result = match &cli.command {
        Command::Spectrum(args) => run_spectrum(args, &file, format, &out),
        Command::Verify(args) => run_verify(args, &file, format, &out),
        Command::Identities(args) => run_identities(args, &file, format, &out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
