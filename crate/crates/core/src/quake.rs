//! Left earthquakes of a block along its single leaf class.
//!
//! For a transversal leaf the fundamental arc of `α` crosses one lift of the
//! leaf, so the deformed cuff holonomy is `E ∘ A` with `E` a translation along
//! that lift. Its trace has the closed form
//!
//! ```text
//! tr(E ∘ A) - 2 = 4 sinh²((m - l)/4) + q · 2 sinh(m/2) sinh(l/2),
//! q = -2 k1 / (k2 - k1) = 2 / (1 + k2 / -k1),
//! ```
//!
//! which has no cancellation and is evaluated in the log domain when the
//! excess is far below machine epsilon.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{QuakeError, Result};
use crate::hyp2::{
    ln_cosh, log_add_exp, translation_along, translation_length, Geodesic, Isometry,
    TranslationLength,
};
use crate::lamination::LeafSpec;
use crate::pants::{handle_length, CurveSpec, DualAxis, TwoPantsBlock};

/// Below this excess the matrix route is replaced by the closed form.
pub const MATRIX_ROUTE_FLOOR: f64 = 1e-10;

/// Environment variable selecting [`PrecisionPolicy`].
pub const PRECISION_ENV: &str = "QUAKE_LAB_PRECISION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PrecisionPolicy {
    /// Matrix products, with the closed form below [`MATRIX_ROUTE_FLOOR`].
    #[default]
    Double,
    /// Closed form everywhere.
    Extended,
}

impl PrecisionPolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Some(PrecisionPolicy::Double),
            "extended" => Some(PrecisionPolicy::Extended),
            _ => None,
        }
    }

    /// Reads the policy from the environment; unset means `Double`.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Err(_) => Ok(PrecisionPolicy::Double),
            Ok(v) => PrecisionPolicy::parse(&v).ok_or_else(|| {
                QuakeError::Domain(format!(
                    "{PRECISION_ENV} must be `double` or `extended`, got `{v}`"
                ))
            }),
        }
    }
}

fn ln_sinh(x: f64) -> f64 {
    // x > 0
    x + (-(-2.0 * x).exp_m1()).ln() - LN_2
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(QuakeError::Domain(format!(
            "earthquake time must be finite and nonnegative, got {t}"
        )))
    }
}

/// `ln q` with `q = -2 k1 / (k2 - k1)`.
fn ln_q(ln_neg_k1: f64, ln_k2: f64) -> f64 {
    LN_2 - log_add_exp(0.0, ln_k2 - ln_neg_k1)
}

/// `ln(tr - 2)` of a translation of length `m` along a leaf `(k1, k2)`
/// composed with the cuff holonomy of length `l`, from log-endpoints.
pub fn ln_trace_formula_excess(l: f64, m: f64, ln_neg_k1: f64, ln_k2: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) || !(m >= 0.0 && m.is_finite()) {
        return Err(QuakeError::Domain(format!(
            "trace formula needs l > 0 and m >= 0, got l = {l}, m = {m}"
        )));
    }
    if ln_neg_k1.is_nan() || ln_k2.is_nan() {
        return Err(QuakeError::Domain("NaN leaf endpoint".into()));
    }
    let d = (m - l).abs();
    let shear = if d == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * (2.0 * (0.25 * d).sinh()).ln()
    };
    let cross = if m == 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_q(ln_neg_k1, ln_k2) + LN_2 + ln_sinh(0.5 * m) + ln_sinh(0.5 * l)
    };
    Ok(log_add_exp(shear, cross))
}

/// `tr(B^μ) - 2` for a leaf `g` with `k1 < 0 < k2`.
pub fn trace_formula_excess(l: f64, m: f64, g: &Geodesic) -> Result<f64> {
    if !(g.k1 < 0.0 && g.k2 > 0.0 && g.k1.is_finite() && g.k2.is_finite()) {
        return Err(QuakeError::Domain(format!(
            "leaf ({}, {}) must cross the cuff axis with k1 < 0 < k2",
            g.k1, g.k2
        )));
    }
    Ok(ln_trace_formula_excess(l, m, (-g.k1).ln(), g.k2.ln())?.exp())
}

/// The translation applied to `O1` by the earthquake of time `t`.
pub fn earthquake_translation(block: &TwoPantsBlock, leaf: LeafSpec, t: f64) -> Result<Isometry> {
    check_time(t)?;
    match leaf {
        LeafSpec::Transversal { w, weight } => {
            let axis = block.dual_axis(w)?.geodesic()?;
            translation_along(&axis, t * weight)
        }
        _ => Ok(Isometry::identity()),
    }
}

pub fn deformed_cuff_holonomy(block: &TwoPantsBlock, leaf: LeafSpec, t: f64) -> Result<Isometry> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(block.a);
    }
    Ok(earthquake_translation(block, leaf, t)?.compose(&block.a))
}

fn transversal_length(
    block: &TwoPantsBlock,
    axis: &DualAxis,
    m: f64,
    policy: PrecisionPolicy,
) -> Result<TranslationLength> {
    if policy == PrecisionPolicy::Double {
        let e = translation_along(&axis.geodesic()?, m)?.compose(&block.a);
        let len = translation_length(&e)?;
        if len.excess >= MATRIX_ROUTE_FLOOR {
            return Ok(len);
        }
    }
    let ln_e = ln_trace_formula_excess(block.l_alpha, m, axis.ln_neg_k1, axis.ln_k2)?;
    Ok(TranslationLength::from_ln_excess(ln_e))
}

pub fn deformed_cuff_length(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    policy: PrecisionPolicy,
) -> Result<TranslationLength> {
    check_time(t)?;
    match leaf {
        LeafSpec::Transversal { w, weight } if t > 0.0 => {
            transversal_length(block, &block.dual_axis(w)?, t * weight, policy)
        }
        _ => Ok(block.curve_length(CurveSpec::Cuff)),
    }
}

/// Deformed holonomy of `Dual(j)`.
///
/// Twisting along a curve crossing `α` once leaves the leaf's own holonomy
/// fixed and replaces `A` by `E ∘ A`, so `Dual(j) = (E ∘ A)^{-(j - w)} Dual(w)`.
pub fn deformed_dual_holonomy(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    j: i64,
) -> Result<Isometry> {
    check_time(t)?;
    match leaf {
        LeafSpec::Transversal { w, .. } if t > 0.0 => {
            let a_def = deformed_cuff_holonomy(block, leaf, t)?;
            Ok(a_def.pow(-(j - w)).compose(&block.dual_holonomy(w)?))
        }
        LeafSpec::CuffAtom { weight } if t > 0.0 => {
            let b = TwoPantsBlock::build_unwrapped(
                block.l_alpha,
                block.t_alpha + t * weight,
                block.boundaries,
            )?;
            b.dual_holonomy(j)
        }
        _ => block.dual_holonomy(j),
    }
}

/// Deformed length of `Dual(j)`, read from the block rebuilt from the
/// deformed `(l', t')`. Far from the leaf the product `(E ∘ A)^{-(j - w)}`
/// cancels catastrophically, while the rebuilt block gives the same length in
/// closed form.
pub fn deformed_dual_length(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    j: i64,
    policy: PrecisionPolicy,
) -> Result<TranslationLength> {
    check_time(t)?;
    match leaf {
        LeafSpec::Transversal { w, .. } if j == w => Ok(block.curve_length(CurveSpec::Dual(w))),
        LeafSpec::Empty => Ok(block.curve_length(CurveSpec::Dual(j))),
        _ if t == 0.0 => Ok(block.curve_length(CurveSpec::Dual(j))),
        _ => {
            let state = deform(block, leaf, t, policy)?;
            Ok(rebuilt_block(block, &state)?.curve_length(CurveSpec::Dual(j)))
        }
    }
}

/// The three logarithmic traces used to pin down the deformed twist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistTraces {
    pub ln_cuff: f64,
    pub ln_dual: f64,
    pub ln_next: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-13 * (1.0 + mid.abs()) {
            return mid;
        }
        let up = f(mid) > 0.0;
        if up == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves for the twist `t'` of a block with cuff length `l'` and the given
/// boundaries whose `Dual(w)` and `Dual(w + 1)` have the given log-traces.
pub fn extract_twist(
    l_def: f64,
    boundaries: &[f64; 4],
    w: i64,
    ln_dual: f64,
    ln_next: f64,
) -> Result<f64> {
    let kappa = crate::pants::handle_constant(boundaries);
    let h = handle_length(l_def, kappa);
    let ln_c = LN_2 + ln_cosh(0.5 * h);
    let target = ln_dual + ln_next - 2.0 * ln_c;
    // With σ = t' + w l', the traces are C cosh(σ/2) and C cosh((σ + l')/2);
    // their product is symmetric about σ = -l'/2 and monotone on each side.
    let f = |sigma: f64| ln_cosh(0.5 * sigma) + ln_cosh(0.5 * (sigma + l_def)) - target;
    let center = -0.5 * l_def;
    let reach = 2.0 * (target.abs() + 2.0 * LN_2) + l_def + 1.0;
    let right = ln_next > ln_dual;
    let (lo, hi) = if right {
        (center, center + reach)
    } else {
        (center - reach, center)
    };
    let fail = || QuakeError::TwistExtraction {
        lo,
        hi,
        ln_cuff: LN_2 + ln_cosh(0.5 * l_def),
        ln_dual,
        ln_next,
    };
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(fail());
    }
    let f_center = if right { f_lo } else { f_hi };
    let f_far = if right { f_hi } else { f_lo };
    let slack = 1e-12 * (1.0 + target.abs());
    let sigma = if f_center >= 0.0 {
        if f_center > slack {
            return Err(fail());
        }
        center
    } else if f_far <= 0.0 {
        return Err(fail());
    } else {
        bisect(f, lo, hi, right)
    };
    Ok(sigma - w as f64 * l_def)
}

pub fn deformed_twist(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    policy: PrecisionPolicy,
) -> Result<f64> {
    Ok(deform(block, leaf, t, policy)?.twist_deformed)
}

/// `(ln(l'/l), (t' - t) / max{1, |ln l|})`.
pub fn fn_coordinate(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    policy: PrecisionPolicy,
) -> Result<(f64, f64)> {
    Ok(deform(block, leaf, t, policy)?.fn_pair)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformedBlockState {
    pub t: f64,
    pub l_deformed: TranslationLength,
    pub twist_deformed: f64,
    /// `tr - 2` of the deformed cuff holonomy; may underflow to zero, in which
    /// case `ln_excess` is authoritative.
    pub excess: f64,
    pub ln_excess: f64,
    pub fn_pair: (f64, f64),
    /// Deformed length of the reference dual curve `Dual(0)`.
    pub dual_length: f64,
    pub traces: Option<TwistTraces>,
}

fn fn_pair(block: &TwoPantsBlock, l_def: f64, ln_l_def: f64, t_def: f64) -> (f64, f64) {
    let l = block.l_alpha;
    let first = if l_def == l { 0.0 } else { ln_l_def - l.ln() };
    (first, (t_def - block.t_alpha) / l.ln().abs().max(1.0))
}

fn ln_of_length(len: &TranslationLength, ln_excess: f64) -> f64 {
    if len.value > 0.0 && len.value.is_finite() && len.value > 1e-300 {
        len.value.ln()
    } else {
        // value ≈ 2 sqrt(excess) for tiny excess
        LN_2 + 0.5 * ln_excess
    }
}

/// Full deformed state of one block at time `t`.
pub fn deform(
    block: &TwoPantsBlock,
    leaf: LeafSpec,
    t: f64,
    policy: PrecisionPolicy,
) -> Result<DeformedBlockState> {
    check_time(t)?;
    let cuff = block.curve_length(CurveSpec::Cuff);
    let undeformed = |t_def: f64, dual: f64| DeformedBlockState {
        t,
        l_deformed: cuff,
        twist_deformed: t_def,
        excess: cuff.excess,
        ln_excess: cuff.excess.ln(),
        fn_pair: fn_pair(block, cuff.value, cuff.value.ln(), t_def),
        dual_length: dual,
        traces: None,
    };
    match leaf {
        _ if t == 0.0 => Ok(undeformed(
            block.t_alpha,
            block.curve_length(CurveSpec::Dual(0)).value,
        )),
        LeafSpec::Empty => Ok(undeformed(
            block.t_alpha,
            block.curve_length(CurveSpec::Dual(0)).value,
        )),
        LeafSpec::CuffAtom { weight } => {
            let t_def = block.t_alpha + t * weight;
            let dual = TwoPantsBlock::build_unwrapped(block.l_alpha, t_def, block.boundaries)?
                .curve_length(CurveSpec::Dual(0))
                .value;
            Ok(undeformed(t_def, dual))
        }
        LeafSpec::Transversal { w, weight } => {
            let axis = block.dual_axis(w)?;
            let m = t * weight;
            let ln_excess = ln_trace_formula_excess(block.l_alpha, m, axis.ln_neg_k1, axis.ln_k2)?;
            let len = transversal_length(block, &axis, m, policy)?;
            let ln_l = ln_of_length(&len, ln_excess);
            let ln_dual = block.dual_ln_trace(w);
            let next = deformed_dual_holonomy(block, leaf, t, w + 1)?;
            let ln_next = next.ln_abs_trace();
            let t_def = extract_twist(len.value, &block.boundaries, w, ln_dual, ln_next)?;
            let dual = TwoPantsBlock::build_unwrapped(len.value, t_def, block.boundaries)?
                .curve_length(CurveSpec::Dual(0))
                .value;
            Ok(DeformedBlockState {
                t,
                l_deformed: len,
                twist_deformed: t_def,
                excess: len.excess,
                ln_excess,
                fn_pair: fn_pair(block, len.value, ln_l, t_def),
                dual_length: dual,
                traces: Some(TwistTraces {
                    ln_cuff: LN_2 + ln_cosh(0.5 * len.value),
                    ln_dual,
                    ln_next,
                }),
            })
        }
    }
}

/// The block `(l', t')` read off the deformed state, with the Dehn index of
/// its duals matching the original labelling.
pub fn rebuilt_block(block: &TwoPantsBlock, state: &DeformedBlockState) -> Result<TwoPantsBlock> {
    TwoPantsBlock::build_unwrapped(state.l_deformed.value, state.twist_deformed, block.boundaries)
}
