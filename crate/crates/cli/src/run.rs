use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use quake_lab_core::lamination::{ls_norm_estimate, thurston_norm_estimate, LeafSpec};
use quake_lab_core::quake::{deform, PrecisionPolicy};
use quake_lab_core::spectrum::{
    counterexample_family, necessity_report, path_scan, theorem1_verdict, theorem2_partition,
    BlockFamily, Necessity, PathScanReport,
};
use quake_lab_core::QuakeError;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{check_t_grid, parse_counterexample, Analysis, Config, DEFAULT_OUT};
use crate::report::{float, scan_csv, summary_file, to_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Block diagnostics: lengths, dual axes, angles, winding numbers.
    Build,
    /// Length-spectrum and Thurston norm estimates.
    Norms,
    /// Deformed block states on the t grid.
    Quake,
    /// Earthquake path scan with per-t summaries.
    Scan,
    /// Membership, partition and necessity verdicts.
    Check,
    /// Generate the collapsing-cuff family and scan it.
    Counterexample,
}

#[derive(Debug, Parser)]
#[command(name = "quake-lab", version, about = "Earthquake paths through two-pants block families")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Config file (optional for `counterexample`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated earthquake times, e.g. `0,0.5,1`.
    #[arg(long = "t-grid", value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    /// Number of blocks, overriding the config.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Usage(_) => 4,
            CliError::Output { .. } => 5,
        }
    }
}

fn numerical(e: QuakeError) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Set by `check` when a verdict fails.
    pub verdict_failed: bool,
    pub files: Vec<PathBuf>,
    pub message: String,
}

struct Ctx {
    out: PathBuf,
    policy: PrecisionPolicy,
    files: Vec<PathBuf>,
    message: String,
}

impl Ctx {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.message.push_str(line.as_ref());
        self.message.push('\n');
    }
}

fn policy_name(p: PrecisionPolicy) -> &'static str {
    match p {
        PrecisionPolicy::Double => "double",
        PrecisionPolicy::Extended => "extended",
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn check_args(args: &Args) -> Result<(), CliError> {
    if args.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    if args.window == Some(0) {
        return Err(CliError::Usage("--window must be at least 1".into()));
    }
    if let Some(g) = &args.t_grid {
        check_t_grid(g).map_err(|m| CliError::Usage(format!("--t-grid: {m}")))?;
    }
    Ok(())
}

/// Runs one command, writing its report files.
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    check_args(args)?;
    let policy = PrecisionPolicy::from_env().map_err(|e| CliError::Config(e.to_string()))?;
    let text = args.config.as_deref().map(read_config).transpose()?;
    if text.is_none() && args.command != Command::Counterexample {
        return Err(CliError::Usage("--config is required for this command".into()));
    }
    // Settings needed before the pool exists.
    let pre = match args.command {
        Command::Counterexample => parse_counterexample(text.as_deref()).map(|r| r.1),
        _ => Config::parse(text.as_deref().unwrap(), Some(1)).map(|c| c.analysis),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let workers = args.workers.or(pre.workers);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers:?} workers: {e}")))?;
    let out = args
        .out
        .clone()
        .or_else(|| pre.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&out).map_err(|source| CliError::Output {
        path: out.clone(),
        source,
    })?;
    let mut ctx = Ctx {
        out,
        policy,
        files: Vec::new(),
        message: String::new(),
    };
    let verdict_failed = pool.install(|| dispatch(args, text.as_deref(), &mut ctx))?;
    Ok(Outcome {
        verdict_failed,
        files: ctx.files,
        message: ctx.message,
    })
}

fn dispatch(args: &Args, text: Option<&str>, ctx: &mut Ctx) -> Result<bool, CliError> {
    if args.command == Command::Counterexample {
        return counterexample(args, text, ctx).map(|_| false);
    }
    let mut cfg = Config::parse(text.unwrap(), args.window).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(g) = &args.t_grid {
        cfg.analysis.t_grid = g.clone();
    }
    match args.command {
        Command::Build => build(&cfg, ctx).map(|_| false),
        Command::Norms => norms(&cfg, ctx).map(|_| false),
        Command::Quake => quake(&cfg, ctx).map(|_| false),
        Command::Scan => scan(&cfg.family, &cfg.lamination, &cfg.analysis, ctx).map(|_| false),
        Command::Check => check(&cfg, ctx),
        Command::Counterexample => unreachable!(),
    }
}

fn build(cfg: &Config, ctx: &mut Ctx) -> Result<(), CliError> {
    let conv = cfg.analysis.constants.convention;
    let rows: Result<Vec<String>, QuakeError> = cfg
        .family
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let n = i + 1;
            let leaf = cfg.lamination.leaf(n);
            let j = leaf.center();
            let axis = b.dual_axis(j)?;
            let winding = if axis.is_obtuse(conv) {
                b.winding(j, conv)?.to_string()
            } else {
                String::new()
            };
            let len = b.curve_length(quake_lab_core::pants::CurveSpec::Dual(j)).value;
            Ok(format!(
                "{n},{},{},{},{j},{},{},{},{},{},{},{winding}",
                float(b.l_alpha),
                float(b.t_alpha),
                float(b.handle),
                float(len),
                float(axis.ln_neg_k1),
                float(axis.ln_k2),
                float(-axis.ln_neg_k1.exp()),
                float(axis.ln_k2.exp()),
                float(axis.cuff_angle(conv)),
            ))
        })
        .collect();
    let mut csv = String::from("n,l_alpha,t_alpha,handle,dual_index,dual_length,ln_neg_k1,ln_k2,k1,k2,angle,winding\n");
    for r in rows.map_err(numerical)? {
        csv.push_str(&r);
        csv.push('\n');
    }
    ctx.write("blocks.csv", &csv)?;
    ctx.say(format!("built {} blocks (L0 = {})", cfg.family.len(), cfg.family.l0()));
    Ok(())
}

#[derive(Serialize)]
struct NormsFile {
    window: usize,
    j_window: i64,
    ls_norm: quake_lab_core::lamination::NormEstimate,
    thurston_norm: quake_lab_core::lamination::NormEstimate,
    note: &'static str,
}

fn norms(cfg: &Config, ctx: &mut Ctx) -> Result<(), CliError> {
    let j = cfg.analysis.constants.j_window;
    let ls = ls_norm_estimate(&cfg.lamination, &cfg.family, j).map_err(numerical)?;
    let th = thurston_norm_estimate(&cfg.lamination, &cfg.family).map_err(numerical)?;
    ctx.write(
        "norms.json",
        &to_json(&NormsFile {
            window: cfg.family.len(),
            j_window: j,
            ls_norm: ls,
            thurston_norm: th,
            note: "lower estimates over the window: cuffs and dual curves within J of each leaf",
        }),
    )?;
    ctx.say(format!(
        "length-spectrum norm >= {:.6e} (block {}), Thurston norm >= {:.6e} (block {})",
        ls.value, ls.block, th.value, th.block
    ));
    Ok(())
}

fn quake(cfg: &Config, ctx: &mut Ctx) -> Result<(), CliError> {
    let grid = &cfg.analysis.t_grid;
    let n = cfg.family.len();
    let policy = ctx.policy;
    let rows: Result<Vec<String>, QuakeError> = (0..grid.len() * n)
        .into_par_iter()
        .map(|idx| {
            let t = grid[idx / n];
            let k = idx % n + 1;
            let s = deform(cfg.family.block(k).unwrap(), cfg.lamination.leaf(k), t, policy)?;
            Ok(format!(
                "{},{k},{},{},{},{},{},{},{}",
                float(t),
                float(s.l_deformed.value),
                float(s.twist_deformed),
                float(s.excess),
                float(s.ln_excess),
                float(s.fn_pair.0),
                float(s.fn_pair.1),
                float(s.dual_length),
            ))
        })
        .collect();
    let mut csv = String::from("t,n,l_deformed,twist_deformed,excess,ln_excess,log_ratio,twist_diff_norm,dual_length\n");
    for r in rows.map_err(numerical)? {
        csv.push_str(&r);
        csv.push('\n');
    }
    ctx.write("quake.csv", &csv)?;
    ctx.say(format!("deformed {n} blocks at {} times", grid.len()));
    Ok(())
}

fn scan(
    family: &BlockFamily,
    lam: &quake_lab_core::lamination::MeasuredLamination,
    analysis: &Analysis,
    ctx: &mut Ctx,
) -> Result<PathScanReport, CliError> {
    let report = path_scan(family, lam, &analysis.t_grid, ctx.policy, analysis.dip_threshold)
        .map_err(numerical)?;
    ctx.write("scan.csv", &scan_csv(&report))?;
    ctx.write(
        "summary.json",
        &to_json(&summary_file(&report, family.len(), policy_name(ctx.policy))),
    )?;
    let mut lines = String::new();
    for s in &report.summaries {
        let _ = writeln!(
            lines,
            "t = {:<6} inf ratio {:.3e}  sup |log ratio| {:.3e}{}",
            s.t,
            s.inf_ratio,
            s.sup_abs_log_ratio,
            if s.dip_flag { "  DIP" } else { "" }
        );
    }
    ctx.say(format!("scanned {} blocks (window-relative):", family.len()));
    ctx.message.push_str(&lines);
    let errors = report.error_count();
    if errors > 0 {
        return Err(CliError::Numerical(format!(
            "{errors} scan rows could not be resolved; see NaN rows in scan.csv"
        )));
    }
    Ok(report)
}

#[derive(Serialize)]
struct CheckFile {
    window: usize,
    theorem1: quake_lab_core::spectrum::MembershipVerdict,
    theorem2: quake_lab_core::spectrum::PartitionVerdict,
    necessity: quake_lab_core::spectrum::NecessityReport,
    note: &'static str,
}

fn check(cfg: &Config, ctx: &mut Ctx) -> Result<bool, CliError> {
    let a = &cfg.analysis;
    let t1 = theorem1_verdict(&cfg.family, &cfg.lamination, a.constants).map_err(numerical)?;
    let t2 = theorem2_partition(&cfg.family, &cfg.lamination, a.partition_c, a.thresholds, a.constants.convention)
        .map_err(numerical)?;
    let nec = necessity_report(&cfg.family, &cfg.lamination, a.constants.j_window, a.growth_factor)
        .map_err(numerical)?;
    let failed = !t1.pass || !t2.pass || nec.verdict == Necessity::Unbounded;
    ctx.say(format!(
        "membership (sufficient clauses): {}",
        if t1.pass { "pass" } else { "fail" }
    ));
    ctx.say(format!(
        "partition (necessary condition): {}",
        if t2.pass { "pass" } else { "fail" }
    ));
    ctx.say(format!("necessity ratios: {:?}", nec.verdict));
    ctx.write(
        "check.json",
        &to_json(&CheckFile {
            window: cfg.family.len(),
            theorem1: t1,
            theorem2: t2,
            necessity: nec,
            note: "verdicts are relative to the finite window of blocks",
        }),
    )?;
    Ok(failed)
}

fn counterexample(args: &Args, text: Option<&str>, ctx: &mut Ctx) -> Result<(), CliError> {
    let (mut spec, mut analysis) =
        parse_counterexample(text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(w) = args.window {
        spec.k_max = w;
    }
    if let Some(g) = &args.t_grid {
        analysis.t_grid = g.clone();
    }
    let generated = spec.to_config_text(&analysis);
    let cfg = Config::parse(&generated, None).map_err(|e| CliError::Config(e.to_string()))?;
    let ls: Vec<f64> = cfg.family.blocks().iter().map(|b| b.l_alpha).collect();
    let ws: Vec<i64> = cfg.lamination.leaves().iter().map(LeafSpec::center).collect();
    let (family, lam) = counterexample_family(
        spec.k_max,
        |k| ls[k - 1],
        |k| ws[k - 1],
        spec.weight_fraction,
        analysis.constants.convention,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    ctx.write("counterexample.toml", &generated)?;
    ctx.say(format!(
        "counterexample: l = {}, w = {}, weight = {} l; cuffs collapse at t = {}",
        spec.l_alpha,
        spec.w,
        spec.weight_fraction,
        spec.dip_time()
    ));
    scan(&family, &lam, &analysis, ctx)?;
    Ok(())
}
