//! Measured laminations supported on closed leaves, one leaf class per block.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QuakeError, Result};
use crate::pants::{CurveSpec, TwoPantsBlock};
use crate::spectrum::BlockFamily;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LeafSpec {
    Empty,
    CuffAtom { weight: f64 },
    /// The curve `Dual(w)` with transverse weight `weight`.
    Transversal { w: i64, weight: f64 },
}

impl LeafSpec {
    pub fn weight(&self) -> f64 {
        match *self {
            LeafSpec::Empty => 0.0,
            LeafSpec::CuffAtom { weight } | LeafSpec::Transversal { weight, .. } => weight,
        }
    }

    /// Center of the window of dual curves searched by the norm estimates.
    pub fn center(&self) -> i64 {
        match *self {
            LeafSpec::Transversal { w, .. } => w,
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LeafSpec::Empty => Ok(()),
            LeafSpec::CuffAtom { weight } | LeafSpec::Transversal { weight, .. } => {
                if weight > 0.0 && weight.is_finite() {
                    Ok(())
                } else {
                    Err(QuakeError::Construction(format!(
                        "leaf weight must be positive and finite, got {weight}"
                    )))
                }
            }
        }
    }

    pub fn scaled(&self, t: f64) -> LeafSpec {
        match *self {
            LeafSpec::Empty => LeafSpec::Empty,
            LeafSpec::CuffAtom { weight } => LeafSpec::CuffAtom { weight: weight * t },
            LeafSpec::Transversal { w, weight } => LeafSpec::Transversal {
                w,
                weight: weight * t,
            },
        }
    }

    /// Mass deposited on curve `c` of the same block.
    pub fn transverse_measure(&self, c: CurveSpec) -> f64 {
        match (*self, c) {
            (LeafSpec::Empty, _) => 0.0,
            (LeafSpec::CuffAtom { .. }, CurveSpec::Cuff) => 0.0,
            (LeafSpec::CuffAtom { weight }, CurveSpec::Dual(_)) => weight,
            (LeafSpec::Transversal { weight, .. }, CurveSpec::Cuff) => weight,
            (LeafSpec::Transversal { w, weight }, CurveSpec::Dual(j)) => {
                weight * (j - w).unsigned_abs() as f64
            }
        }
    }
}

/// Leaves indexed by block; index 0 is block `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredLamination {
    leaves: Vec<LeafSpec>,
}

impl MeasuredLamination {
    pub fn new(leaves: Vec<LeafSpec>) -> Result<Self> {
        for l in &leaves {
            l.validate()?;
        }
        Ok(MeasuredLamination { leaves })
    }

    pub fn zero(len: usize) -> Self {
        MeasuredLamination {
            leaves: vec![LeafSpec::Empty; len],
        }
    }

    pub fn leaves(&self) -> &[LeafSpec] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Leaf of block `n` (1-based); blocks beyond the assignment are empty.
    pub fn leaf(&self, n: usize) -> LeafSpec {
        n.checked_sub(1)
            .and_then(|i| self.leaves.get(i))
            .copied()
            .unwrap_or(LeafSpec::Empty)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(QuakeError::Domain(format!(
                "lamination scale must be positive, got {t}"
            )));
        }
        Ok(MeasuredLamination {
            leaves: self.leaves.iter().map(|l| l.scaled(t)).collect(),
        })
    }

    pub fn transverse_measure(&self, n: usize, c: CurveSpec) -> f64 {
        self.leaf(n).transverse_measure(c)
    }
}

/// A norm estimate with the block and curve attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub block: usize,
    pub curve: Option<CurveSpec>,
}

impl NormEstimate {
    fn zero() -> Self {
        NormEstimate {
            value: 0.0,
            block: 0,
            curve: None,
        }
    }
}

/// First strict maximum in block order, so the arg-max is deterministic.
fn first_max(items: Vec<NormEstimate>) -> NormEstimate {
    items
        .into_iter()
        .fold(NormEstimate::zero(), |acc, e| if e.value > acc.value { e } else { acc })
}

fn check_window(j_window: i64) -> Result<()> {
    if j_window < 1 {
        return Err(QuakeError::Domain(format!(
            "dual-curve window J must be at least 1, got {j_window}"
        )));
    }
    Ok(())
}

fn block_ls_ratio(block: &TwoPantsBlock, n: usize, leaf: LeafSpec, j_window: i64) -> NormEstimate {
    let mut best = NormEstimate {
        value: leaf.transverse_measure(CurveSpec::Cuff) / block.l_alpha,
        block: n,
        curve: Some(CurveSpec::Cuff),
    };
    let best_dual = block_dual_ratio(block, n, leaf, j_window);
    if best_dual.value > best.value {
        best = best_dual;
    }
    best
}

fn block_dual_ratio(block: &TwoPantsBlock, n: usize, leaf: LeafSpec, j_window: i64) -> NormEstimate {
    let c = leaf.center();
    let mut best = NormEstimate {
        value: 0.0,
        block: n,
        curve: Some(CurveSpec::Dual(c)),
    };
    for j in (c - j_window)..=(c + j_window) {
        let curve = CurveSpec::Dual(j);
        let v = leaf.transverse_measure(curve) / block.curve_length(curve).value;
        if v > best.value {
            best = NormEstimate {
                value: v,
                block: n,
                curve: Some(curve),
            };
        }
    }
    best
}

/// Lower estimate of the length-spectrum norm over the curves `Cuff` and
/// `Dual(j)`, `|j - w_n| <= J`, of every block in the window.
pub fn ls_norm_estimate(
    lam: &MeasuredLamination,
    family: &BlockFamily,
    j_window: i64,
) -> Result<NormEstimate> {
    check_window(j_window)?;
    Ok(first_max(
        family
            .blocks()
            .par_iter()
            .enumerate()
            .map(|(i, b)| block_ls_ratio(b, i + 1, lam.leaf(i + 1), j_window))
            .collect(),
    ))
}

/// Number of leaf lifts crossed by a unit sub-arc of the half-orthogonals.
fn orthogonal_crossings(block: &TwoPantsBlock, w: i64) -> Result<u64> {
    let axis = block.dual_axis(w)?;
    let l = block.l_alpha;
    let ln_y0 = 0.5 * axis.ln_height_sq();
    let mut best = 0u64;
    for d in block.d {
        let r = (axis.skew.abs() * d.min(1.0).tanh()).asinh();
        let lo = (ln_y0 / l).ceil();
        let hi = ((ln_y0 + r) / l).floor();
        let count = if hi >= lo { (hi - lo) as u64 + 1 } else { 0 };
        best = best.max(count);
    }
    Ok(best)
}

/// Lower estimate of the Thurston norm: the heaviest unit arc among
/// sub-arcs of the cuffs and of the half-orthogonals.
pub fn thurston_norm_estimate(lam: &MeasuredLamination, family: &BlockFamily) -> Result<NormEstimate> {
    let per_block: Result<Vec<NormEstimate>> = family
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let n = i + 1;
            let value = match lam.leaf(n) {
                LeafSpec::Empty => 0.0,
                LeafSpec::CuffAtom { weight } => weight,
                LeafSpec::Transversal { w, weight } => {
                    let along_cuff = (1.0 / b.l_alpha).floor() + 1.0;
                    let across = orthogonal_crossings(b, w)? as f64;
                    weight * along_cuff.max(across)
                }
            };
            Ok(NormEstimate {
                value,
                block: n,
                curve: None,
            })
        })
        .collect();
    Ok(first_max(per_block?))
}

/// Per block, the largest `μ(Dual(j)) / l(Dual(j))` over `|j - w_n| <= J`.
pub fn necessity_ratios(
    lam: &MeasuredLamination,
    family: &BlockFamily,
    j_window: i64,
) -> Result<Vec<(usize, f64)>> {
    check_window(j_window)?;
    Ok(family
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, b)| (i + 1, block_dual_ratio(b, i + 1, lam.leaf(i + 1), j_window).value))
        .collect())
}
