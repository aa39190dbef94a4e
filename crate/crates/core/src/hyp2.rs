//! Isometries of the upper half-plane with a log-scale channel.
//!
//! An [`Isometry`] stores a real 2x2 matrix as `e^s * (w I + N)` where `N` is
//! traceless. Keeping the scalar part separate lets `tr - 2` be evaluated from
//! `p^2 + bc` without cancellation, and the explicit scale `s` keeps matrices
//! with translation length in the thousands representable.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{QuakeError, Result};

/// `|tr|` within this distance below 2 is classified as parabolic.
pub const PARABOLIC_TOLERANCE: f64 = 1e-12;

/// `arccosh(1 + u)` without forming `1 + u`.
pub fn acosh1p(u: f64) -> f64 {
    (u + (u * (2.0 + u)).sqrt()).ln_1p()
}

/// `ln cosh x`, finite for every finite `x`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn exp2i(k: i32) -> f64 {
    // Exact for the exponent range reached by renormalization.
    2f64.powi(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    w: f64,
    p: f64,
    b: f64,
    c: f64,
    log_scale: f64,
    det_sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            w: 1.0,
            p: 0.0,
            b: 0.0,
            c: 0.0,
            log_scale: 0.0,
            det_sign: 1.0,
        }
    }

    /// Builds from matrix entries; any nonzero determinant is accepted and
    /// absorbed into the scale.
    pub fn from_entries(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let all = [m11, m12, m21, m22];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(QuakeError::Domain("non-finite matrix entry".into()));
        }
        let mut g = Isometry {
            w: 0.5 * (m11 + m22),
            p: 0.5 * (m11 - m22),
            b: m12,
            c: m21,
            log_scale: 0.0,
            det_sign: 1.0,
        };
        if g.max_entry() == 0.0 {
            return Err(QuakeError::Domain("zero matrix".into()));
        }
        g.renormalize();
        let [a, b, c, d] = g.entries();
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(QuakeError::Domain("singular matrix".into()));
        }
        g.log_scale = -0.5 * det.abs().ln();
        g.det_sign = det.signum();
        Ok(g)
    }

    /// Entries with a known scale: `e^log_scale * M` must have determinant 1.
    pub fn from_scaled_entries(m11: f64, m12: f64, m21: f64, m22: f64, log_scale: f64) -> Self {
        Isometry {
            w: 0.5 * (m11 + m22),
            p: 0.5 * (m11 - m22),
            b: m12,
            c: m21,
            log_scale,
            det_sign: 1.0,
        }
        .renormalized()
    }

    /// `z -> e^shift z`.
    pub fn dilation(shift: f64) -> Self {
        let m = shift.abs();
        let sgn = if shift >= 0.0 { 1.0 } else { -1.0 };
        Self::hyperbolic_from_unit(m, sgn, 0.0, 0.0)
    }

    /// Rotation by `theta` about `i`.
    pub fn rotation_about_i(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Isometry {
            w: c,
            p: 0.0,
            b: -s,
            c: s,
            log_scale: 0.0,
            det_sign: 1.0,
        }
        .renormalized()
    }

    /// Orientation-reversing reflection `z -> -conj(z)` in the imaginary axis.
    pub fn reflection_in_vertical() -> Self {
        Isometry {
            w: 0.0,
            p: -1.0,
            b: 0.0,
            c: 0.0,
            log_scale: 0.0,
            det_sign: -1.0,
        }
    }

    /// `cosh(m/2) I + sinh(m/2) U` where `U = [[up, ub], [uc, -up]]`, `U^2 = I`.
    fn hyperbolic_from_unit(m: f64, up: f64, ub: f64, uc: f64) -> Self {
        let decay = (-m).exp();
        let spread = -(-m).exp_m1();
        Isometry {
            w: 1.0 + decay,
            p: spread * up,
            b: spread * ub,
            c: spread * uc,
            log_scale: 0.5 * m - LN_2,
            det_sign: 1.0,
        }
        .renormalized()
    }

    fn max_entry(&self) -> f64 {
        (self.w + self.p)
            .abs()
            .max((self.w - self.p).abs())
            .max(self.b.abs())
            .max(self.c.abs())
    }

    fn renormalize(&mut self) {
        let mx = self.max_entry();
        if mx == 0.0 || !mx.is_finite() {
            return;
        }
        let mut k = mx.log2().floor() as i32;
        // log2 can round across a power of two.
        if mx * exp2i(-k) >= 2.0 {
            k += 1;
        } else if mx * exp2i(-k) < 1.0 {
            k -= 1;
        }
        if k == 0 {
            return;
        }
        let f = exp2i(-k);
        self.w *= f;
        self.p *= f;
        self.b *= f;
        self.c *= f;
        self.log_scale += k as f64 * LN_2;
    }

    fn renormalized(mut self) -> Self {
        self.renormalize();
        self
    }

    /// Stored entries `[m11, m12, m21, m22]`; the isometry is `e^s` times these.
    pub fn entries(&self) -> [f64; 4] {
        [self.w + self.p, self.b, self.c, self.w - self.p]
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Sign of the determinant: `+1` preserves orientation.
    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.det_sign > 0.0
    }

    /// Same isometry with entries multiplied by `factor > 0` and scale adjusted.
    pub fn rescaled(&self, factor: f64) -> Self {
        Isometry {
            w: self.w * factor,
            p: self.p * factor,
            b: self.b * factor,
            c: self.c * factor,
            log_scale: self.log_scale - factor.ln(),
            det_sign: self.det_sign,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let (w1, p1, b1, c1) = (self.w, self.p, self.b, self.c);
        let (w2, p2, b2, c2) = (other.w, other.p, other.b, other.c);
        Isometry {
            w: w1 * w2 + p1 * p2 + 0.5 * (b1 * c2 + c1 * b2),
            p: w1 * p2 + w2 * p1 + 0.5 * (b1 * c2 - c1 * b2),
            b: w1 * b2 + w2 * b1 + p1 * b2 - b1 * p2,
            c: w1 * c2 + w2 * c1 + c1 * p2 - p1 * c2,
            log_scale: self.log_scale + other.log_scale,
            det_sign: self.det_sign * other.det_sign,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Isometry {
        // The adjugate has the same determinant, so the scale carries over.
        Isometry {
            w: self.w,
            p: -self.p,
            b: -self.b,
            c: -self.c,
            log_scale: self.log_scale,
            det_sign: self.det_sign,
        }
    }

    pub fn conjugate_by(&self, g: &Isometry) -> Isometry {
        g.compose(self).compose(&g.inverse())
    }

    pub fn pow(&self, n: i64) -> Isometry {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Isometry::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Action on the boundary `R ∪ {∞}`; infinity is `f64::INFINITY`.
    /// Orientation-reversing maps act through `z -> M conj(z)`, which agrees
    /// with the Möbius action on real points.
    pub fn apply_boundary(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.entries();
        if x.is_infinite() {
            return if c == 0.0 { f64::INFINITY } else { a / c };
        }
        let den = c * x + d;
        if den == 0.0 {
            return f64::INFINITY;
        }
        (a * x + b) / den
    }

    /// Action on a point `(x, y)` of the upper half-plane.
    pub fn apply_point(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d] = self.entries();
        let yy = if self.det_sign < 0.0 { -y } else { y };
        // (a z + b) / (c z + d) with z = x + i yy
        let nr = a * x + b;
        let ni = a * yy;
        let dr = c * x + d;
        let di = c * yy;
        let den = dr * dr + di * di;
        let re = (nr * dr + ni * di) / den;
        let im = (ni * dr - nr * di) / den;
        (re, im.abs())
    }

    /// Normalized trace `tr(M)/sqrt(det M)`; may overflow for huge translations.
    pub fn trace(&self) -> f64 {
        2.0 * self.w * self.log_scale.exp()
    }

    /// `ln |tr|`, finite even when the trace overflows.
    pub fn ln_abs_trace(&self) -> f64 {
        LN_2 + self.log_scale + self.w.abs().ln()
    }

    /// `|tr| - 2`, evaluated by whichever of two algebraically equal routes
    /// has the smaller rounding error.
    pub fn excess(&self) -> f64 {
        let es = self.log_scale.exp();
        let half = es * self.w.abs();
        if !half.is_finite() {
            return f64::INFINITY;
        }
        let disc = self.p * self.p + self.b * self.c;
        let disc_mag = self.p * self.p + (self.b * self.c).abs();
        let err_direct = half;
        let err_disc = es * es * disc_mag / (half + 1.0);
        if err_disc <= err_direct {
            2.0 * es * es * disc / (half + 1.0)
        } else {
            2.0 * (half - 1.0)
        }
    }

    pub fn kind(&self) -> Kind {
        let e = self.excess();
        if e > 0.0 {
            Kind::Hyperbolic
        } else if e >= -PARABOLIC_TOLERANCE {
            Kind::Parabolic
        } else {
            Kind::Elliptic
        }
    }

    /// Projective closeness of two isometries (entries compared after
    /// normalizing both to unit determinant up to sign).
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        if self.det_sign != other.det_sign {
            return false;
        }
        let d = self.log_scale - other.log_scale;
        let a = self.entries();
        let b = other.entries();
        let fa = if d >= 0.0 { 1.0 } else { d.exp() };
        let fb = if d >= 0.0 { (-d).exp() } else { 1.0 };
        let same = a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| (x * fa - y * fb).abs() <= tol * (1.0 + (x * fa).abs()));
        let flipped = a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| (x * fa + y * fb).abs() <= tol * (1.0 + (x * fa).abs()));
        same || flipped
    }
}

/// Oriented geodesic from `k1` to `k2`; `f64::INFINITY` is the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub k1: f64,
    pub k2: f64,
}

impl Geodesic {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if k1.is_nan() || k2.is_nan() {
            return Err(QuakeError::Domain("NaN geodesic endpoint".into()));
        }
        if k1 == k2 || (k1.is_infinite() && k2.is_infinite()) {
            return Err(QuakeError::Domain(format!(
                "geodesic endpoints coincide: {k1}, {k2}"
            )));
        }
        Ok(Geodesic { k1, k2 })
    }

    /// The imaginary axis oriented upward.
    pub fn vertical() -> Self {
        Geodesic {
            k1: 0.0,
            k2: f64::INFINITY,
        }
    }

    pub fn reversed(&self) -> Self {
        Geodesic {
            k1: self.k2,
            k2: self.k1,
        }
    }

    pub fn crosses_vertical(&self) -> bool {
        let (lo, hi) = (self.k1.min(self.k2), self.k1.max(self.k2));
        lo < 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()
    }

    /// Height at which a crossing geodesic meets the imaginary axis.
    pub fn vertical_crossing_height(&self) -> Result<f64> {
        if !self.crosses_vertical() {
            return Err(QuakeError::Domain(
                "geodesic does not cross the imaginary axis".into(),
            ));
        }
        Ok((-self.k1).sqrt() * self.k2.abs().sqrt())
    }

    pub fn image(&self, g: &Isometry) -> Geodesic {
        Geodesic {
            k1: g.apply_boundary(self.k1),
            k2: g.apply_boundary(self.k2),
        }
    }

    pub fn reflection(&self) -> Isometry {
        let (k1, k2) = (self.k1, self.k2);
        let m = if k2.is_infinite() {
            Isometry::from_entries(-1.0, 2.0 * k1, 0.0, 1.0)
        } else if k1.is_infinite() {
            Isometry::from_entries(-1.0, 2.0 * k2, 0.0, 1.0)
        } else {
            let d = k2 - k1;
            Isometry::from_entries(-(k1 + k2) / d, 2.0 * k1 * k2 / d, -2.0 / d, (k1 + k2) / d)
        };
        m.expect("reflection matrix is nonsingular")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslationLength {
    pub value: f64,
    pub excess: f64,
}

impl TranslationLength {
    pub fn zero() -> Self {
        TranslationLength {
            value: 0.0,
            excess: 0.0,
        }
    }

    pub fn from_excess(excess: f64) -> Self {
        if excess <= 0.0 {
            return Self::zero();
        }
        if excess > 1e300 {
            return TranslationLength {
                value: 2.0 * (excess + 2.0).ln(),
                excess,
            };
        }
        TranslationLength {
            value: 2.0 * acosh1p(0.5 * excess),
            excess,
        }
    }

    /// From `ln(|tr| - 2)`, for excesses outside the f64 range.
    pub fn from_ln_excess(ln_excess: f64) -> Self {
        if ln_excess > 690.0 {
            return TranslationLength {
                value: 2.0 * ln_excess,
                excess: f64::INFINITY,
            };
        }
        if ln_excess < -600.0 {
            // 2 arccosh(1 + e/2) = 2 sqrt(e) (1 - e/24 + ...)
            return TranslationLength {
                value: 2.0 * (0.5 * ln_excess).exp(),
                excess: ln_excess.exp(),
            };
        }
        Self::from_excess(ln_excess.exp())
    }
}

pub fn translation_length(t: &Isometry) -> Result<TranslationLength> {
    if !t.is_orientation_preserving() {
        return Err(QuakeError::Domain(
            "translation length of an orientation-reversing map".into(),
        ));
    }
    let ln_tr = t.ln_abs_trace();
    if ln_tr > 30.0 {
        return Ok(TranslationLength {
            value: 2.0 * ln_tr,
            excess: t.excess(),
        });
    }
    let e = t.excess();
    if e < -PARABOLIC_TOLERANCE {
        return Err(QuakeError::Domain(format!(
            "elliptic isometry (|tr| - 2 = {e:e})"
        )));
    }
    Ok(TranslationLength::from_excess(e.max(0.0)))
}

/// Fixed points of a hyperbolic isometry as `(repelling, attracting)`.
pub fn axis_endpoints(t: &Isometry) -> Result<Geodesic> {
    if !t.is_orientation_preserving() || t.kind() != Kind::Hyperbolic {
        return Err(QuakeError::Domain(
            "axis requested for a non-hyperbolic isometry".into(),
        ));
    }
    let (w, p, b, c) = (t.w, t.p, t.b, t.c);
    let sw = if w >= 0.0 { 1.0 } else { -1.0 };
    if c == 0.0 {
        // Fixed points are ∞ (eigenvalue w + p) and -b / 2p (eigenvalue w - p).
        let finite = -b / (2.0 * p);
        let inf_attracts = p * sw > 0.0;
        return Ok(if inf_attracts {
            Geodesic {
                k1: finite,
                k2: f64::INFINITY,
            }
        } else {
            Geodesic {
                k1: f64::INFINITY,
                k2: finite,
            }
        });
    }
    let disc = p * p + b * c;
    let r = disc.max(0.0).sqrt();
    let sp = if p >= 0.0 { 1.0 } else { -1.0 };
    let q = p + sp * r;
    // q / c has eigenvalue w + sp r; -b / q has w - sp r.
    let z1 = q / c;
    let z2 = if q == 0.0 { f64::INFINITY } else { -b / q };
    let z1_attracts = sp * sw > 0.0;
    Ok(if z1_attracts {
        Geodesic { k1: z2, k2: z1 }
    } else {
        Geodesic { k1: z1, k2: z2 }
    })
}

/// Translation of length `m` along `g`, moving points toward `g.k2`.
pub fn translation_along(g: &Geodesic, m: f64) -> Result<Isometry> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(QuakeError::Domain(format!(
            "translation length must be finite and nonnegative, got {m}"
        )));
    }
    let (k1, k2) = (g.k1, g.k2);
    let (up, ub, uc) = if k2.is_infinite() {
        (1.0, -2.0 * k1, 0.0)
    } else if k1.is_infinite() {
        (-1.0, 2.0 * k2, 0.0)
    } else {
        let d = k2 - k1;
        ((k2 + k1) / d, -2.0 * k1 * k2 / d, 2.0 / d)
    };
    Ok(Isometry::hyperbolic_from_unit(m, up, ub, uc))
}

/// Angle at the crossing from the upward imaginary axis to `g`, in `(0, π)`.
pub fn angle_with_vertical(g: &Geodesic) -> Result<f64> {
    if !(g.k1 < 0.0 && g.k2 > 0.0 && g.k1.is_finite() && g.k2.is_finite()) {
        return Err(QuakeError::Domain(format!(
            "geodesic ({}, {}) does not cross the positive imaginary axis from left to right",
            g.k1, g.k2
        )));
    }
    let s = 2.0 * (-g.k1).sqrt() * g.k2.sqrt();
    Ok(s.atan2(g.k1 + g.k2))
}

/// Orientation of the cuff when measuring the angle between cuff and leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AngleConvention {
    /// The cuff is oriented along its holonomy `z -> e^{-l} z`, i.e. downward;
    /// the leaf meets it obtusely when `k1 + k2 > 0`.
    #[default]
    CuffAlongHolonomy,
    /// The cuff is oriented upward; obtuse when `k1 + k2 < 0`.
    CuffUpward,
}

impl AngleConvention {
    pub fn cuff_angle(&self, g: &Geodesic) -> Result<f64> {
        let up = angle_with_vertical(g)?;
        Ok(match self {
            AngleConvention::CuffUpward => up,
            AngleConvention::CuffAlongHolonomy => PI - up,
        })
    }

    pub fn flipped(&self) -> Self {
        match self {
            AngleConvention::CuffUpward => AngleConvention::CuffAlongHolonomy,
            AngleConvention::CuffAlongHolonomy => AngleConvention::CuffUpward,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn identity_is_neutral() {
        let t = translation_along(&Geodesic::new(-2.0, 5.0).unwrap(), 0.7).unwrap();
        assert!(Isometry::identity().compose(&t).approx_eq(&t, 1e-15));
        assert!(t.compose(&Isometry::identity()).approx_eq(&t, 1e-15));
    }

    #[test]
    fn same_axis_lengths_add() {
        let h = Isometry::dilation(1.0);
        let e = Isometry::from_entries(1f64.exp(), 0.0, 0.0, (-1f64).exp()).unwrap();
        assert!(h.compose(&h).approx_eq(&e, 1e-14));
        assert!(close(translation_length(&h).unwrap().value, 1.0, 1e-15));
    }

    #[test]
    fn composition_of_separated_translations() {
        let s = translation_along(&Geodesic::new(-2.0, -1.0).unwrap(), 1.0).unwrap();
        let t = translation_along(&Geodesic::new(1.0, 2.0).unwrap(), 1.0).unwrap();
        let v = translation_length(&s.compose(&t)).unwrap().value;
        assert!(close(v, 3.7547420120005459677, 1e-13), "{v}");
        let t_rev = translation_along(&Geodesic::new(2.0, 1.0).unwrap(), 1.0).unwrap();
        let v = translation_length(&s.compose(&t_rev)).unwrap().value;
        assert!(close(v, 4.917451734112226678, 1e-13), "{v}");
    }

    #[test]
    fn identity_has_zero_length() {
        let l = translation_length(&Isometry::identity()).unwrap();
        assert_eq!(l.value, 0.0);
        assert_eq!(l.excess, 0.0);
    }

    #[test]
    fn tiny_excess_keeps_relative_precision() {
        // Excess 4e-30 belongs to translation length 4e-15.
        let t = translation_along(&Geodesic::new(-3.0, 0.5).unwrap(), 4e-15).unwrap();
        let l = translation_length(&t).unwrap();
        assert!(close(l.excess, 4e-30, 1e-9), "{:e}", l.excess);
        assert!(close(l.value, 4e-15, 1e-9));
        let l = TranslationLength::from_excess(4e-30);
        assert!(close(l.value, 4e-15, 1e-12));
        assert!(close(TranslationLength::from_ln_excess((1e-300f64).ln()).value, 2e-150, 1e-12));
    }

    #[test]
    fn elliptic_is_rejected() {
        let r = Isometry::rotation_about_i(0.3);
        assert_eq!(r.kind(), Kind::Elliptic);
        assert!(translation_length(&r).is_err());
        assert!(axis_endpoints(&r).is_err());
    }

    #[test]
    fn parabolic_classification() {
        let p = Isometry::from_entries(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(p.kind(), Kind::Parabolic);
        assert_eq!(translation_length(&p).unwrap().value, 0.0);
        assert!(axis_endpoints(&p).is_err());
    }

    #[test]
    fn vertical_axis_endpoints() {
        let g = axis_endpoints(&Isometry::dilation(1.0)).unwrap();
        assert_eq!(g.k1, 0.0);
        assert!(g.k2.is_infinite());
        let g = axis_endpoints(&Isometry::dilation(-1.0)).unwrap();
        assert!(g.k1.is_infinite());
        assert_eq!(g.k2, 0.0);
    }

    #[test]
    fn symmetric_axis_endpoints() {
        let m: f64 = 0.8;
        let t = Isometry::from_entries(
            (m / 2.0).cosh(),
            (m / 2.0).sinh(),
            (m / 2.0).sinh(),
            (m / 2.0).cosh(),
        )
        .unwrap();
        let g = axis_endpoints(&t).unwrap();
        assert!(close(g.k1, -1.0, 1e-14) && close(g.k2, 1.0, 1e-14));
    }

    #[test]
    fn translation_along_vertical_is_diagonal() {
        let t = translation_along(&Geodesic::vertical(), 0.4).unwrap();
        assert!(t.approx_eq(&Isometry::dilation(0.4), 1e-15));
        let id = translation_along(&Geodesic::new(-1.0, 1.0).unwrap(), 0.0).unwrap();
        assert!(id.approx_eq(&Isometry::identity(), 1e-15));
    }

    #[test]
    fn round_trip_with_infinite_endpoint() {
        for g in [
            Geodesic::new(3.0, f64::INFINITY).unwrap(),
            Geodesic::new(f64::INFINITY, -2.0).unwrap(),
        ] {
            let t = translation_along(&g, 1.3).unwrap();
            let h = axis_endpoints(&t).unwrap();
            assert_eq!(h.k1.is_infinite(), g.k1.is_infinite());
            assert_eq!(h.k2.is_infinite(), g.k2.is_infinite());
            assert!(close(translation_length(&t).unwrap().value, 1.3, 1e-14));
        }
    }

    #[test]
    fn huge_translation_stays_finite() {
        let t = Isometry::dilation(3000.0);
        assert!(close(translation_length(&t).unwrap().value, 3000.0, 1e-14));
        let g = Geodesic::new(-1.0, 2.0).unwrap();
        let big = translation_along(&g, 2000.0).unwrap().compose(&t);
        assert!(translation_length(&big).unwrap().value.is_finite());
    }

    #[test]
    fn angles() {
        let a = |k1, k2| angle_with_vertical(&Geodesic::new(k1, k2).unwrap()).unwrap();
        assert!(close(a(-1.0, 1.0), PI / 2.0, 1e-15));
        assert!(close(a(-1.0, 3.0), PI / 3.0, 1e-15));
        assert!(close(a(-3.0, 1.0), 2.0 * PI / 3.0, 1e-15));
        assert!(angle_with_vertical(&Geodesic::new(1.0, 3.0).unwrap()).is_err());
        let g = Geodesic::new(-1.0, 3.0).unwrap();
        let c = AngleConvention::default().cuff_angle(&g).unwrap();
        assert!(close(c, 2.0 * PI / 3.0, 1e-15));
    }

    #[test]
    fn reflections_square_to_identity() {
        let g = Geodesic::new(-0.5, 4.0).unwrap();
        let r = g.reflection();
        assert!(!r.is_orientation_preserving());
        assert!(r.compose(&r).approx_eq(&Isometry::identity(), 1e-14));
        assert!(close(r.apply_boundary(-0.5), -0.5, 1e-14));
        assert!(close(r.apply_boundary(4.0), 4.0, 1e-14));
    }

    #[test]
    fn inverse_and_pow() {
        let t = translation_along(&Geodesic::new(-0.3, 2.0).unwrap(), 0.9).unwrap();
        assert!(t.compose(&t.inverse()).approx_eq(&Isometry::identity(), 1e-14));
        let t5 = t.pow(5);
        assert!(close(translation_length(&t5).unwrap().value, 4.5, 1e-13));
        assert!(t.pow(-3).compose(&t.pow(3)).approx_eq(&Isometry::identity(), 1e-13));
    }
}
