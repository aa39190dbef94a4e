//! Run configuration: a TOML file with `[family]`, `[lamination]`,
//! `[analysis]` and `[counterexample]` sections.
//!
//! Sequences (`l_alpha`, `twist`, `boundaries`, `w`, `weight`, ...) accept a
//! number, a quoted expression in `n`, or an array with one value per block.
//! Every validation failure is reported with the line of the offending key.

use std::fmt;
use std::ops::Range;

use quake_lab_core::hyp2::AngleConvention;
use quake_lab_core::lamination::{LeafSpec, MeasuredLamination};
use quake_lab_core::pants::DEFAULT_BOUNDARY;
use quake_lab_core::spectrum::{BlockFamily, TailThresholds, Theorem1Constants, DEFAULT_DIP_THRESHOLD};
use serde::Deserialize;
use toml::{Spanned, Value};

use crate::expr::Expr;

pub const DEFAULT_L0: f64 = 2.0;
pub const DEFAULT_J: i64 = 20;
pub const DEFAULT_PARTITION_C: f64 = 1.0;
pub const DEFAULT_GROWTH_FACTOR: f64 = 10.0;
pub const DEFAULT_OUT: &str = "quake-lab-out";
pub const DEFAULT_COUNTEREXAMPLE_WINDOW: usize = 200;

/// `0, 0.5, ..., 4`.
pub fn default_t_grid() -> Vec<f64> {
    (0..=8).map(|i| 0.5 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: Option<Spanned<RawFamily>>,
    lamination: Option<Spanned<RawLamination>>,
    #[serde(default)]
    analysis: RawAnalysis,
    counterexample: Option<RawCounterexample>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(rename = "N")]
    n: Option<Spanned<i64>>,
    #[serde(rename = "L0")]
    l0: Option<Spanned<f64>>,
    l_alpha: Option<Spanned<Value>>,
    twist: Option<Spanned<Value>>,
    boundaries: Option<Spanned<Value>>,
    b1: Option<Spanned<Value>>,
    b2: Option<Spanned<Value>>,
    b3: Option<Spanned<Value>>,
    b4: Option<Spanned<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLamination {
    kind: Option<Spanned<String>>,
    w: Option<Spanned<Value>>,
    weight: Option<Spanned<Value>>,
    weight_over_l: Option<Spanned<Value>>,
    #[serde(default)]
    leaf: Vec<Spanned<RawLeaf>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeaf {
    n: i64,
    kind: String,
    w: Option<i64>,
    weight: Option<f64>,
    weight_over_l: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    t_grid: Option<Spanned<Vec<f64>>>,
    #[serde(rename = "J")]
    j: Option<Spanned<i64>>,
    #[serde(rename = "C0")]
    c0: Option<Spanned<f64>>,
    #[serde(rename = "C0_prime")]
    c0_prime: Option<Spanned<f64>>,
    #[serde(rename = "C1")]
    c1: Option<Spanned<f64>>,
    #[serde(rename = "C")]
    c: Option<Spanned<f64>>,
    slack: Option<Spanned<f64>>,
    factor: Option<Spanned<f64>>,
    dip_threshold: Option<Spanned<f64>>,
    growth_factor: Option<Spanned<f64>>,
    convention: Option<Spanned<String>>,
    workers: Option<Spanned<i64>>,
    out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCounterexample {
    k_max: Option<Spanned<i64>>,
    l_alpha: Option<Spanned<String>>,
    w: Option<Spanned<String>>,
    weight_fraction: Option<Spanned<f64>>,
}

/// Analysis settings with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub t_grid: Vec<f64>,
    pub constants: Theorem1Constants,
    pub partition_c: f64,
    pub thresholds: TailThresholds,
    pub dip_threshold: f64,
    pub growth_factor: f64,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            t_grid: default_t_grid(),
            constants: Theorem1Constants {
                j_window: DEFAULT_J,
                ..Theorem1Constants::default()
            },
            partition_c: DEFAULT_PARTITION_C,
            thresholds: TailThresholds::default(),
            dip_threshold: DEFAULT_DIP_THRESHOLD,
            growth_factor: DEFAULT_GROWTH_FACTOR,
            workers: None,
            out: None,
        }
    }
}

/// Parameters of the generated counterexample.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSpec {
    pub k_max: usize,
    pub l_alpha: String,
    pub w: String,
    pub weight_fraction: f64,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        CounterexampleSpec {
            k_max: DEFAULT_COUNTEREXAMPLE_WINDOW,
            l_alpha: "1/n".into(),
            w: "pow(n,2)".into(),
            weight_fraction: 0.5,
        }
    }
}

impl CounterexampleSpec {
    /// The earthquake time at which `t·ω = l` on every block.
    pub fn dip_time(&self) -> f64 {
        1.0 / self.weight_fraction
    }

    /// A config file reproducing this family for the other commands.
    pub fn to_config_text(&self, analysis: &Analysis) -> String {
        let grid: Vec<String> = analysis.t_grid.iter().map(|t| format!("{t:?}")).collect();
        let c = &analysis.constants;
        let conv = match c.convention {
            AngleConvention::CuffAlongHolonomy => "cuff_along_holonomy",
            AngleConvention::CuffUpward => "cuff_upward",
        };
        format!(
            "# Generated counterexample: dip expected at t = {dip:?}\n\
             [family]\n\
             N = {n}\n\
             L0 = {l0:?}\n\
             l_alpha = {l:?}\n\
             twist = 0.0\n\
             boundaries = {b:?}\n\
             \n\
             [lamination]\n\
             kind = \"transversal\"\n\
             w = {w:?}\n\
             weight_over_l = {wf:?}\n\
             \n\
             [analysis]\n\
             t_grid = [{grid}]\n\
             J = {j}\n\
             C0 = {c0:?}\n\
             C0_prime = {c0p:?}\n\
             C1 = {c1:?}\n\
             C = {pc:?}\n\
             slack = {slack:?}\n\
             factor = {factor:?}\n\
             dip_threshold = {dip_th:?}\n\
             growth_factor = {gf:?}\n\
             convention = \"{conv}\"\n",
            dip = self.dip_time(),
            n = self.k_max,
            l0 = DEFAULT_L0,
            l = self.l_alpha,
            b = DEFAULT_BOUNDARY,
            w = self.w,
            wf = self.weight_fraction,
            grid = grid.join(", "),
            j = c.j_window,
            c0 = c.c0,
            c0p = c.c0_prime,
            c1 = c.c1,
            pc = analysis.partition_c,
            slack = analysis.thresholds.slack,
            factor = analysis.thresholds.factor,
            dip_th = analysis.dip_threshold,
            gf = analysis.growth_factor,
        )
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub family: BlockFamily,
    pub lamination: MeasuredLamination,
    pub analysis: Analysis,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Res<T> {
        Err(ConfigError {
            line: Some(self.line(span)),
            message: message.into(),
        })
    }
}

fn no_line(message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        message: message.into(),
    }
}

fn parse_raw(text: &str) -> Res<RawConfig> {
    toml::from_str(text).map_err(|e| {
        let src = Source { text };
        ConfigError {
            line: e.span().map(|s| src.line(s)),
            message: e.message().to_string(),
        }
    })
}

/// A sequence over `n = 1..=len`.
fn sequence(src: &Source, key: &str, v: &Spanned<Value>, len: usize) -> Res<Vec<f64>> {
    let span = v.span();
    match v.get_ref() {
        Value::Integer(i) => Ok(vec![*i as f64; len]),
        Value::Float(x) => Ok(vec![*x; len]),
        Value::String(s) => {
            let e = Expr::parse(s).or_else(|e| src.err(span.clone(), format!("`{key}`: {e}")))?;
            e.eval_window(len)
                .or_else(|e| src.err(span.clone(), format!("`{key}`: {e}")))
        }
        Value::Array(items) => {
            if items.len() < len {
                return src.err(
                    span,
                    format!("`{key}` lists {} values but the window has {len} blocks", items.len()),
                );
            }
            items[..len]
                .iter()
                .enumerate()
                .map(|(i, x)| match x {
                    Value::Integer(i) => Ok(*i as f64),
                    Value::Float(f) => Ok(*f),
                    _ => src.err(span.clone(), format!("`{key}` entry {} is not a number", i + 1)),
                })
                .collect()
        }
        _ => src.err(span, format!("`{key}` must be a number, an expression string or an array")),
    }
}

fn integer_sequence(src: &Source, key: &str, v: &Spanned<Value>, len: usize) -> Res<Vec<i64>> {
    let xs = sequence(src, key, v, len)?;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let r = x.round();
            if (x - r).abs() <= 1e-9 * r.abs().max(1.0) && r.abs() < 9.0e15 {
                Ok(r as i64)
            } else {
                src.err(v.span(), format!("`{key}` is not an integer at n = {}: {x}", i + 1))
            }
        })
        .collect()
}

fn positive(src: &Source, key: &str, v: &Option<Spanned<f64>>, default: f64) -> Res<f64> {
    match v {
        None => Ok(default),
        Some(s) if *s.get_ref() > 0.0 && s.get_ref().is_finite() => Ok(*s.get_ref()),
        Some(s) => src.err(s.span(), format!("`{key}` must be positive, got {}", s.get_ref())),
    }
}

fn parse_convention(src: &Source, v: &Option<Spanned<String>>) -> Res<AngleConvention> {
    match v {
        None => Ok(AngleConvention::default()),
        Some(s) => match s.get_ref().as_str() {
            "cuff_along_holonomy" => Ok(AngleConvention::CuffAlongHolonomy),
            "cuff_upward" => Ok(AngleConvention::CuffUpward),
            other => src.err(
                s.span(),
                format!("unknown convention `{other}`; use `cuff_along_holonomy` or `cuff_upward`"),
            ),
        },
    }
}

/// Validates a `t` grid: finite and nonnegative.
pub fn check_t_grid(grid: &[f64]) -> std::result::Result<(), String> {
    if grid.is_empty() {
        return Err("the t grid is empty".into());
    }
    match grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        Some(t) => Err(format!("earthquake times must be finite and nonnegative, got {t}")),
        None => Ok(()),
    }
}

fn analysis(src: &Source, raw: &RawAnalysis) -> Res<Analysis> {
    let d = Analysis::default();
    let t_grid = match &raw.t_grid {
        None => d.t_grid,
        Some(g) => {
            check_t_grid(g.get_ref()).or_else(|m| src.err(g.span(), format!("`t_grid`: {m}")))?;
            g.get_ref().clone()
        }
    };
    let j_window = match &raw.j {
        None => DEFAULT_J,
        Some(j) if *j.get_ref() >= 1 => *j.get_ref(),
        Some(j) => return src.err(j.span(), format!("`J` must be at least 1, got {}", j.get_ref())),
    };
    let workers = match &raw.workers {
        None => None,
        Some(w) if *w.get_ref() >= 1 => Some(*w.get_ref() as usize),
        Some(w) => return src.err(w.span(), format!("`workers` must be at least 1, got {}", w.get_ref())),
    };
    let dc = Theorem1Constants::default();
    let slack = match &raw.slack {
        None => d.thresholds.slack,
        Some(s) if *s.get_ref() >= 0.0 && s.get_ref().is_finite() => *s.get_ref(),
        Some(s) => return src.err(s.span(), format!("`slack` must be nonnegative, got {}", s.get_ref())),
    };
    Ok(Analysis {
        t_grid,
        constants: Theorem1Constants {
            c0: positive(src, "C0", &raw.c0, dc.c0)?,
            c0_prime: positive(src, "C0_prime", &raw.c0_prime, dc.c0_prime)?,
            c1: positive(src, "C1", &raw.c1, dc.c1)?,
            j_window,
            convention: parse_convention(src, &raw.convention)?,
        },
        partition_c: positive(src, "C", &raw.c, d.partition_c)?,
        thresholds: TailThresholds {
            slack,
            factor: positive(src, "factor", &raw.factor, d.thresholds.factor)?,
        },
        dip_threshold: positive(src, "dip_threshold", &raw.dip_threshold, d.dip_threshold)?,
        growth_factor: positive(src, "growth_factor", &raw.growth_factor, d.growth_factor)?,
        workers,
        out: raw.out.clone(),
    })
}

fn family(src: &Source, raw: &Spanned<RawFamily>, window: Option<usize>) -> Res<BlockFamily> {
    let f = raw.get_ref();
    let n = match (window, &f.n) {
        (Some(w), _) => w,
        (None, Some(n)) if *n.get_ref() >= 1 => *n.get_ref() as usize,
        (None, Some(n)) => return src.err(n.span(), format!("`N` must be at least 1, got {}", n.get_ref())),
        (None, None) => return src.err(raw.span(), "[family] needs `N` (or pass --window)"),
    };
    let l0 = positive(src, "L0", &f.l0, DEFAULT_L0)?;
    let Some(l_key) = &f.l_alpha else {
        return src.err(raw.span(), "[family] needs `l_alpha`");
    };
    let ls = sequence(src, "l_alpha", l_key, n)?;
    let twists = match &f.twist {
        Some(t) => sequence(src, "twist", t, n)?,
        None => vec![0.0; n],
    };
    let base = match &f.boundaries {
        Some(b) => sequence(src, "boundaries", b, n)?,
        None => vec![DEFAULT_BOUNDARY; n],
    };
    let mut bs = [base.clone(), base.clone(), base.clone(), base];
    for (i, key) in [&f.b1, &f.b2, &f.b3, &f.b4].into_iter().enumerate() {
        if let Some(k) = key {
            bs[i] = sequence(src, &format!("b{}", i + 1), k, n)?;
        }
    }
    for k in 0..n {
        let l = ls[k];
        if !(l > 0.0 && l <= l0) {
            return src.err(l_key.span(), format!("`l_alpha` at n = {}: {l} outside (0, L0 = {l0}]", k + 1));
        }
        if !(twists[k] >= 0.0 && twists[k] < l) {
            let span = f.twist.as_ref().map_or(l_key.span(), |t| t.span());
            return src.err(span, format!("`twist` at n = {}: {} outside [0, l_alpha = {l})", k + 1, twists[k]));
        }
        for (i, b) in bs.iter().enumerate() {
            if !(b[k] > 0.0 && b[k] <= l0) {
                let span = [&f.b1, &f.b2, &f.b3, &f.b4][i]
                    .as_ref()
                    .or(f.boundaries.as_ref())
                    .map_or(raw.span(), |s| s.span());
                return src.err(span, format!("boundary b{} at n = {}: {} outside (0, L0 = {l0}]", i + 1, k + 1, b[k]));
            }
        }
    }
    BlockFamily::from_fn(n, l0, |k| ls[k - 1], |k| twists[k - 1], |k| {
        [bs[0][k - 1], bs[1][k - 1], bs[2][k - 1], bs[3][k - 1]]
    })
    .map_err(|e| ConfigError {
        line: Some(src.line(raw.span())),
        message: format!("[family]: {e}"),
    })
}

fn leaf_weight(
    src: &Source,
    span: Range<usize>,
    weight: Option<f64>,
    over_l: Option<f64>,
    l: f64,
    n: usize,
) -> Res<f64> {
    let w = match (weight, over_l) {
        (Some(w), None) => w,
        (None, Some(r)) => r * l,
        (Some(_), Some(_)) => return src.err(span, "give either `weight` or `weight_over_l`, not both"),
        (None, None) => return src.err(span, "leaf needs `weight` or `weight_over_l`"),
    };
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        src.err(span, format!("leaf weight at n = {n} must be positive, got {w}"))
    }
}

fn lamination(src: &Source, raw: Option<&Spanned<RawLamination>>, family: &BlockFamily) -> Res<MeasuredLamination> {
    let n = family.len();
    let Some(raw) = raw else {
        return Ok(MeasuredLamination::zero(n));
    };
    let r = raw.get_ref();
    let ls: Vec<f64> = family.blocks().iter().map(|b| b.l_alpha).collect();
    let kind = r.kind.as_ref().map_or("empty", |k| k.get_ref().as_str());
    let kind_span = r.kind.as_ref().map_or(raw.span(), |k| k.span());
    let weights = |src: &Source| -> Res<Vec<f64>> {
        let raw_w = match (&r.weight, &r.weight_over_l) {
            (Some(w), None) => sequence(src, "weight", w, n)?,
            (None, Some(w)) => sequence(src, "weight_over_l", w, n)?
                .iter()
                .zip(&ls)
                .map(|(a, l)| a * l)
                .collect(),
            (Some(w), Some(_)) => return src.err(w.span(), "give either `weight` or `weight_over_l`, not both"),
            (None, None) => return src.err(kind_span.clone(), "[lamination] needs `weight` or `weight_over_l`"),
        };
        for (k, w) in raw_w.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                let span = r.weight.as_ref().or(r.weight_over_l.as_ref()).unwrap().span();
                return src.err(span, format!("leaf weight at n = {} must be positive, got {w}", k + 1));
            }
        }
        Ok(raw_w)
    };
    let mut leaves: Vec<LeafSpec> = match kind {
        "empty" => vec![LeafSpec::Empty; n],
        "cuff_atom" => weights(src)?
            .into_iter()
            .map(|weight| LeafSpec::CuffAtom { weight })
            .collect(),
        "transversal" => {
            let Some(wk) = &r.w else {
                return src.err(kind_span, "transversal leaves need `w`");
            };
            let ws = integer_sequence(src, "w", wk, n)?;
            ws.into_iter()
                .zip(weights(src)?)
                .map(|(w, weight)| LeafSpec::Transversal { w, weight })
                .collect()
        }
        other => {
            return src.err(
                kind_span,
                format!("unknown leaf kind `{other}`; use `empty`, `cuff_atom` or `transversal`"),
            )
        }
    };
    for leaf in &r.leaf {
        let span = leaf.span();
        let lf = leaf.get_ref();
        if !(lf.n >= 1 && (lf.n as usize) <= n) {
            if lf.n >= 1 {
                // outside the current window: ignored
                continue;
            }
            return src.err(span, format!("leaf block index must be at least 1, got {}", lf.n));
        }
        let k = lf.n as usize;
        leaves[k - 1] = match lf.kind.as_str() {
            "empty" => LeafSpec::Empty,
            "cuff_atom" => LeafSpec::CuffAtom {
                weight: leaf_weight(src, span, lf.weight, lf.weight_over_l, ls[k - 1], k)?,
            },
            "transversal" => {
                let Some(w) = lf.w else {
                    return src.err(span, "transversal leaf needs `w`");
                };
                LeafSpec::Transversal {
                    w,
                    weight: leaf_weight(src, span, lf.weight, lf.weight_over_l, ls[k - 1], k)?,
                }
            }
            other => return src.err(span, format!("unknown leaf kind `{other}`")),
        };
    }
    MeasuredLamination::new(leaves).map_err(|e| no_line(e.to_string()))
}

impl Config {
    /// Parses and validates a config; `window` overrides `[family] N`.
    pub fn parse(text: &str, window: Option<usize>) -> Res<Config> {
        let src = Source { text };
        let raw = parse_raw(text)?;
        let Some(fam) = &raw.family else {
            return Err(no_line("missing [family] section"));
        };
        let family = family(&src, fam, window)?;
        let lamination = lamination(&src, raw.lamination.as_ref(), &family)?;
        let analysis = analysis(&src, &raw.analysis)?;
        Ok(Config {
            family,
            lamination,
            analysis,
        })
    }
}

/// The `[counterexample]` and `[analysis]` sections of an optional config.
pub fn parse_counterexample(text: Option<&str>) -> Res<(CounterexampleSpec, Analysis)> {
    let Some(text) = text else {
        return Ok((CounterexampleSpec::default(), Analysis::default()));
    };
    let src = Source { text };
    let raw = parse_raw(text)?;
    let analysis = analysis(&src, &raw.analysis)?;
    let d = CounterexampleSpec::default();
    let Some(c) = raw.counterexample else {
        return Ok((d, analysis));
    };
    let k_max = match &c.k_max {
        None => d.k_max,
        Some(k) if *k.get_ref() >= 2 => *k.get_ref() as usize,
        Some(k) => return src.err(k.span(), format!("`k_max` must be at least 2, got {}", k.get_ref())),
    };
    let checked = |v: &Option<Spanned<String>>, key: &str, default: String| -> Res<String> {
        match v {
            None => Ok(default),
            Some(s) => {
                Expr::parse(s.get_ref()).or_else(|e| src.err(s.span(), format!("`{key}`: {e}")))?;
                Ok(s.get_ref().clone())
            }
        }
    };
    let weight_fraction = match &c.weight_fraction {
        None => d.weight_fraction,
        Some(f) if *f.get_ref() > 0.0 && *f.get_ref() < 1.0 => *f.get_ref(),
        Some(f) => {
            return src.err(f.span(), format!("`weight_fraction` must lie in (0, 1), got {}", f.get_ref()))
        }
    };
    Ok((
        CounterexampleSpec {
            k_max,
            l_alpha: checked(&c.l_alpha, "l_alpha", d.l_alpha)?,
            w: checked(&c.w, "w", d.w)?,
            weight_fraction,
        },
        analysis,
    ))
}
