//! Membership analysis over finite windows of a block family, earthquake path
//! scans, and the construction of paths that leave and re-enter the
//! length-spectrum Teichmüller space.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QuakeError, Result};
use crate::hyp2::AngleConvention;
use crate::lamination::{ls_norm_estimate, necessity_ratios, LeafSpec, MeasuredLamination};
use crate::pants::{TwoPantsBlock, DEFAULT_BOUNDARY};
use crate::quake::{deform, PrecisionPolicy};

/// A finite window `n = 1..=N` of blocks with an upper bound `L0` on cuff
/// lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFamily {
    l0: f64,
    blocks: Vec<TwoPantsBlock>,
}

impl BlockFamily {
    pub fn from_fn<L, T, B>(n: usize, l0: f64, l_alpha: L, twist: T, boundaries: B) -> Result<Self>
    where
        L: Fn(usize) -> f64 + Sync,
        T: Fn(usize) -> f64 + Sync,
        B: Fn(usize) -> [f64; 4] + Sync,
    {
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(QuakeError::Construction(format!(
                "L0 must be positive and finite, got {l0}"
            )));
        }
        let blocks: Result<Vec<_>> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let l = l_alpha(k);
                let b = boundaries(k);
                if !(l > 0.0 && l <= l0) {
                    return Err(QuakeError::Construction(format!(
                        "block {k}: cuff length {l} outside (0, L0 = {l0}]"
                    )));
                }
                if let Some(x) = b.iter().find(|&&x| !(x > 0.0 && x <= l0)) {
                    return Err(QuakeError::Construction(format!(
                        "block {k}: boundary length {x} outside (0, L0 = {l0}]"
                    )));
                }
                TwoPantsBlock::build(l, twist(k), b).map_err(|e| {
                    QuakeError::Construction(format!("block {k}: {e}"))
                })
            })
            .collect();
        Ok(BlockFamily {
            l0,
            blocks: blocks?,
        })
    }

    pub fn from_blocks(l0: f64, blocks: Vec<TwoPantsBlock>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.l_alpha > l0 || b.boundaries.iter().any(|&x| x > l0) {
                return Err(QuakeError::Construction(format!(
                    "block {}: lengths exceed L0 = {l0}",
                    i + 1
                )));
            }
        }
        Ok(BlockFamily { l0, blocks })
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn blocks(&self) -> &[TwoPantsBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block `n`, 1-based.
    pub fn block(&self, n: usize) -> Option<&TwoPantsBlock> {
        n.checked_sub(1).and_then(|i| self.blocks.get(i))
    }

    /// The first `n` blocks.
    pub fn truncated(&self, n: usize) -> BlockFamily {
        BlockFamily {
            l0: self.l0,
            blocks: self.blocks[..n.min(self.blocks.len())].to_vec(),
        }
    }
}

/// Thresholds operationalizing "→ 0" and "→ ∞" on a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailThresholds {
    /// Allowed relative step against the trend in the last half.
    pub slack: f64,
    /// Required separation between the last value and the head statistic.
    pub factor: f64,
}

impl Default for TailThresholds {
    fn default() -> Self {
        TailThresholds {
            slack: 0.05,
            factor: 10.0,
        }
    }
}

/// Mean of the first tenth (at least one value).
pub fn head_statistic(seq: &[f64]) -> f64 {
    let k = (seq.len() / 10).max(1).min(seq.len());
    seq[..k].iter().sum::<f64>() / k as f64
}

/// Last half nonincreasing within slack and final value at most head/factor.
pub fn tends_to_zero(seq: &[f64], th: TailThresholds) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let tail = &seq[seq.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + th.slack));
    monotone && *seq.last().unwrap() <= head_statistic(seq) / th.factor
}

/// Last half nondecreasing within slack and final value at least factor·head.
pub fn tends_to_infinity(seq: &[f64], th: TailThresholds) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let tail = &seq[seq.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - th.slack));
    let head = head_statistic(seq);
    monotone && head >= 0.0 && *seq.last().unwrap() >= th.factor * head && *seq.last().unwrap() > 0.0
}

/// `μ(α)` for the block's leaf.
pub fn cuff_measure(leaf: LeafSpec) -> f64 {
    match leaf {
        LeafSpec::Transversal { weight, .. } => weight,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Constants {
    pub c0: f64,
    pub c0_prime: f64,
    pub c1: f64,
    /// Dual-curve window for the finiteness check of the norm.
    pub j_window: i64,
    pub convention: AngleConvention,
}

impl Default for Theorem1Constants {
    fn default() -> Self {
        Theorem1Constants {
            c0: 2.0,
            c0_prime: 4.0,
            c1: 5.0,
            j_window: 20,
            convention: AngleConvention::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// `μ(α) > C0 l`.
    LargeMeasure,
    /// `μ(α) < l / C0'`.
    SmallMeasure,
    /// The leaf meets `α` at angle at most `π/2`.
    Acute,
    /// Obtuse angle with winding below `C1 / l`.
    Sandwich,
    Fail,
}

impl Clause {
    pub fn number(&self) -> Option<u8> {
        match self {
            Clause::LargeMeasure => Some(1),
            Clause::SmallMeasure => Some(2),
            Clause::Acute => Some(3),
            Clause::Sandwich => Some(4),
            Clause::Fail => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDiagnostics {
    pub n: usize,
    pub l_alpha: f64,
    /// Angle from `α` to the leaf; absent when no leaf crosses `α`.
    pub angle: Option<f64>,
    pub winding: Option<i64>,
    pub mu_over_l: f64,
    pub clause: Clause,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub constants: Theorem1Constants,
    pub blocks: Vec<BlockDiagnostics>,
    pub ls_norm: f64,
    pub pass: bool,
}

fn leaf_geometry(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    convention: AngleConvention,
) -> Result<(Option<f64>, Option<i64>, bool)> {
    match leaf {
        LeafSpec::Transversal { w, .. } => {
            let axis = block.dual_axis(w)?;
            let obtuse = axis.is_obtuse(convention);
            let winding = if obtuse {
                Some(block.winding(w, convention)?)
            } else {
                None
            };
            Ok((Some(axis.cuff_angle(convention)), winding, obtuse))
        }
        _ => Ok((None, None, false)),
    }
}

pub fn theorem1_verdict(
    family: &BlockFamily,
    lam: &MeasuredLamination,
    constants: Theorem1Constants,
) -> Result<MembershipVerdict> {
    let norm = ls_norm_estimate(lam, family, constants.j_window)?.value;
    if !norm.is_finite() {
        return Err(QuakeError::NormNotFinite);
    }
    let blocks: Result<Vec<_>> = family
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let n = i + 1;
            let leaf = lam.leaf(n);
            let l = b.l_alpha;
            let mu = cuff_measure(leaf);
            let (angle, winding, obtuse) = leaf_geometry(b, leaf, constants.convention)?;
            let clause = if mu > constants.c0 * l {
                Clause::LargeMeasure
            } else if mu < l / constants.c0_prime {
                Clause::SmallMeasure
            } else if !obtuse {
                Clause::Acute
            } else if (winding.unwrap_or(i64::MAX) as f64) < constants.c1 / l {
                Clause::Sandwich
            } else {
                Clause::Fail
            };
            Ok(BlockDiagnostics {
                n,
                l_alpha: l,
                angle,
                winding,
                mu_over_l: mu / l,
                clause,
            })
        })
        .collect();
    let blocks = blocks?;
    let pass = blocks.iter().all(|b| b.clause != Clause::Fail);
    Ok(MembershipVerdict {
        constants,
        blocks,
        ls_norm: norm,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionVerdict {
    pub p_prime: Vec<usize>,
    pub p_double_prime: Vec<usize>,
    pub length_tends_to_zero: bool,
    pub ratio_tends_to_zero: bool,
    pub pass: bool,
}

pub fn theorem2_partition(
    family: &BlockFamily,
    lam: &MeasuredLamination,
    c: f64,
    thresholds: TailThresholds,
    convention: AngleConvention,
) -> Result<PartitionVerdict> {
    let mut p_prime = Vec::new();
    let mut p_dd = Vec::new();
    for (i, b) in family.blocks().iter().enumerate() {
        let n = i + 1;
        let (_, winding, obtuse) = leaf_geometry(b, lam.leaf(n), convention)?;
        let small_winding = winding.map_or(true, |w| (w as f64) <= c / b.l_alpha);
        if !obtuse || small_winding {
            p_prime.push(n);
        } else {
            p_dd.push(n);
        }
    }
    let (len_ok, ratio_ok) = if p_dd.is_empty() {
        (true, true)
    } else {
        let ls: Vec<f64> = p_dd
            .iter()
            .map(|&n| family.block(n).unwrap().l_alpha)
            .collect();
        let ratios: Vec<f64> = p_dd
            .iter()
            .zip(&ls)
            .map(|(&n, l)| cuff_measure(lam.leaf(n)) / l)
            .collect();
        (tends_to_zero(&ls, thresholds), tends_to_zero(&ratios, thresholds))
    };
    Ok(PartitionVerdict {
        p_prime,
        p_double_prime: p_dd,
        length_tends_to_zero: len_ok,
        ratio_tends_to_zero: ratio_ok,
        pass: len_ok && ratio_ok,
    })
}

pub const DEFAULT_DIP_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub n: usize,
    pub l0: f64,
    pub lt: f64,
    pub log_ratio: f64,
    pub twist_diff_norm: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub t: f64,
    pub sup_abs_log_ratio: f64,
    pub inf_ratio: f64,
    pub dip_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathScanReport {
    pub rows: Vec<ScanRow>,
    pub summaries: Vec<ScanSummary>,
    pub dip_threshold: f64,
}

impl PathScanReport {
    /// Summaries recomputed from rows, in grid order.
    pub fn summarize(rows: &[ScanRow], t_grid: &[f64], dip_threshold: f64) -> Vec<ScanSummary> {
        t_grid
            .iter()
            .map(|&t| {
                let mut sup = 0.0f64;
                let mut inf = f64::INFINITY;
                for r in rows.iter().filter(|r| r.t == t && r.error.is_none()) {
                    sup = sup.max(r.log_ratio.abs());
                    inf = inf.min(r.lt / r.l0);
                }
                ScanSummary {
                    t,
                    sup_abs_log_ratio: sup,
                    inf_ratio: inf,
                    dip_flag: inf < dip_threshold,
                }
            })
            .collect()
    }

    pub fn rows_at(&self, t: f64) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(move |r| r.t == t)
    }

    /// Sup-norm of the normalized Fenchel–Nielsen displacement at time `t`.
    pub fn fn_sup_norm(&self, t: f64) -> f64 {
        self.rows_at(t)
            .filter(|r| r.error.is_none())
            .map(|r| r.log_ratio.abs().max(r.twist_diff_norm.abs()))
            .fold(0.0, f64::max)
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

pub fn path_scan(
    family: &BlockFamily,
    lam: &MeasuredLamination,
    t_grid: &[f64],
    policy: PrecisionPolicy,
    dip_threshold: f64,
) -> Result<PathScanReport> {
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(QuakeError::Domain(format!(
            "earthquake times must be finite and nonnegative, got {t}"
        )));
    }
    let n = family.len();
    let rows: Vec<ScanRow> = (0..t_grid.len() * n)
        .into_par_iter()
        .map(|idx| {
            let t = t_grid[idx / n];
            let k = idx % n + 1;
            let b = family.block(k).unwrap();
            match deform(b, lam.leaf(k), t, policy) {
                Ok(s) => ScanRow {
                    t,
                    n: k,
                    l0: b.l_alpha,
                    lt: s.l_deformed.value,
                    log_ratio: s.fn_pair.0,
                    twist_diff_norm: s.fn_pair.1,
                    error: None,
                },
                Err(e) => ScanRow {
                    t,
                    n: k,
                    l0: b.l_alpha,
                    lt: f64::NAN,
                    log_ratio: f64::NAN,
                    twist_diff_norm: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let summaries = PathScanReport::summarize(&rows, t_grid, dip_threshold);
    Ok(PathScanReport {
        rows,
        summaries,
        dip_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Necessity {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityReport {
    pub ratios: Vec<(usize, f64)>,
    pub head: f64,
    pub tail_max: f64,
    pub growth_factor: f64,
    pub verdict: Necessity,
}

pub fn necessity_report(
    family: &BlockFamily,
    lam: &MeasuredLamination,
    j_window: i64,
    growth_factor: f64,
) -> Result<NecessityReport> {
    let ratios = necessity_ratios(lam, family, j_window)?;
    let values: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    let (head, tail_max) = if values.is_empty() {
        (0.0, 0.0)
    } else {
        let tail = &values[values.len() / 2..];
        (head_statistic(&values), tail.iter().copied().fold(0.0, f64::max))
    };
    let verdict = if tail_max > 0.0 && tail_max >= growth_factor * head {
        Necessity::Unbounded
    } else {
        Necessity::Bounded
    };
    Ok(NecessityReport {
        ratios,
        head,
        tail_max,
        growth_factor,
        verdict,
    })
}

/// The family `l_k`, leaves `Dual(w_k)` with weight `fraction · l_k`.
pub fn counterexample_family<L, W>(
    k_max: usize,
    l_seq: L,
    w_seq: W,
    weight_fraction: f64,
    convention: AngleConvention,
) -> Result<(BlockFamily, MeasuredLamination)>
where
    L: Fn(usize) -> f64 + Sync,
    W: Fn(usize) -> i64 + Sync,
{
    if !(weight_fraction > 0.0 && weight_fraction < 1.0) {
        return Err(QuakeError::Construction(format!(
            "weight fraction must lie in (0, 1), got {weight_fraction}"
        )));
    }
    if k_max < 2 {
        return Err(QuakeError::Construction(
            "counterexample window needs at least two blocks".into(),
        ));
    }
    let products: Vec<f64> = (1..=k_max).map(|k| l_seq(k) * w_seq(k) as f64).collect();
    if products.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(QuakeError::Construction(
            "w_k l_k must be strictly increasing over the window".into(),
        ));
    }
    if !(products[k_max - 1] >= 10.0 * products[0].abs().max(1.0)) {
        return Err(QuakeError::Construction(
            "w_k l_k does not grow without bound over the window".into(),
        ));
    }
    let l0 = (1..=k_max).map(&l_seq).fold(DEFAULT_BOUNDARY, f64::max);
    let family = BlockFamily::from_fn(k_max, l0, &l_seq, |_| 0.0, |_| [DEFAULT_BOUNDARY; 4])?;
    let leaves: Vec<LeafSpec> = (1..=k_max)
        .map(|k| LeafSpec::Transversal {
            w: w_seq(k),
            weight: weight_fraction * l_seq(k),
        })
        .collect();
    for (i, leaf) in leaves.iter().enumerate() {
        let b = &family.blocks()[i];
        let axis = b.dual_axis(leaf.center())?;
        if !axis.is_obtuse(convention) || axis.cuff_angle(convention) <= FRAC_PI_2 {
            return Err(QuakeError::Construction(format!(
                "block {}: leaf does not meet the cuff at an obtuse angle",
                i + 1
            )));
        }
    }
    Ok((family, MeasuredLamination::new(leaves)?))
}

/// The default construction: `l_k = 1/k`, `w_k = k²`, weight `l_k / 2`.
pub fn default_counterexample(k_max: usize) -> Result<(BlockFamily, MeasuredLamination)> {
    counterexample_family(
        k_max,
        |k| 1.0 / k as f64,
        |k| (k * k) as i64,
        0.5,
        AngleConvention::default(),
    )
}
