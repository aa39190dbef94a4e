//! Pairs of pants from right-angled hexagons, and two-pants blocks glued along
//! a central cuff `α`.
//!
//! A block is normalized so that a lift of `α` is the imaginary axis with the
//! cuff holonomy `A(z) = e^{-l} z`. The dual curve `β` crossing `α` once has
//! holonomy `M0 = D(τ) P(H)`, where `D(s) = diag(e^{s/2}, e^{-s/2})`, `P(H)` is
//! the translation of length `H` along the axis `(-1, 1)` and
//! `sinh(H/2) sinh(l/2) = κ` is fixed by the outer cuffs. The relation keeps
//! the commutator `[A, M0]` peripheral with the prescribed boundary trace, so
//! `(l, τ)` together with the four outer lengths determine the block.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{QuakeError, Result};
use crate::hyp2::{
    acosh1p, ln_cosh, translation_along, AngleConvention, Geodesic, Isometry, TranslationLength,
};

/// Largest `|τ + j l|` for which dual axes are representable in f64.
pub const MAX_DUAL_SHIFT: f64 = 1380.0;

/// Default length of the four outer cuffs.
pub const DEFAULT_BOUNDARY: f64 = 1.0;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(QuakeError::Domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// Side of a right-angled hexagon between the alternate sides `a` and `b`,
/// i.e. opposite `c`.
pub fn hexagon_side(a: f64, b: f64, c: f64) -> Result<f64> {
    for (n, x) in [("a", a), ("b", b), ("c", c)] {
        check_positive(n, x)?;
    }
    let arg = (c.cosh() + a.cosh() * b.cosh()) / (a.sinh() * b.sinh());
    if !arg.is_finite() || arg < 1.0 {
        return Err(QuakeError::DegenerateHexagon { a, b, c });
    }
    Ok(acosh1p(arg - 1.0))
}

/// Distance from the side `a` of a right-angled hexagon with alternate sides
/// `a, b, c` to the opposite side.
pub fn hexagon_height(a: f64, b: f64, c: f64) -> Result<f64> {
    for (n, x) in [("a", a), ("b", b), ("c", c)] {
        check_positive(n, x)?;
    }
    let (ca, cb, cc) = (a.cosh(), b.cosh(), c.cosh());
    let sh2 = (cb * cb + cc * cc + 2.0 * ca * cb * cc) / (a.sinh() * a.sinh());
    if !sh2.is_finite() {
        return Err(QuakeError::DegenerateHexagon { a, b, c });
    }
    Ok(sh2.sqrt().asinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PantsData {
    pub cuffs: [f64; 3],
}

impl PantsData {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for x in [c1, c2, c3] {
            check_positive("cuff length", x)?;
        }
        Ok(PantsData {
            cuffs: [c1, c2, c3],
        })
    }

    /// Side lengths of one of the two congruent hexagons, in cyclic order
    /// starting with half of the first cuff and the seam that follows it.
    pub fn hexagon(&self) -> Result<[f64; 6]> {
        let [a, b, c] = self.cuffs.map(|x| 0.5 * x);
        Ok([
            a,
            hexagon_side(a, b, c)?,
            b,
            hexagon_side(b, c, a)?,
            c,
            hexagon_side(c, a, b)?,
        ])
    }

    /// Half of the simple orthogonal from cuff `i` to itself.
    pub fn half_orthogonal(&self, i: usize) -> Result<f64> {
        let h = self.cuffs.map(|x| 0.5 * x);
        hexagon_height(h[i], h[(i + 1) % 3], h[(i + 2) % 3])
    }

    /// Frames along the hexagon boundary: frame `k` sends `i` with the upward
    /// direction to the start of side `k`, pointing along it.
    pub fn hexagon_frames(&self) -> Result<Vec<Isometry>> {
        let sides = self.hexagon()?;
        let turn = Isometry::rotation_about_i(PI / 2.0);
        let mut frames = Vec::with_capacity(7);
        let mut g = Isometry::identity();
        frames.push(g);
        for s in sides {
            g = g.compose(&Isometry::dilation(s)).compose(&turn);
            frames.push(g);
        }
        Ok(frames)
    }

    /// Cuff holonomies obtained by doubling the hexagon across its seams.
    pub fn cuff_holonomies(&self) -> Result<[Isometry; 3]> {
        let frames = self.hexagon_frames()?;
        let refl = |k: usize| {
            Isometry::reflection_in_vertical().conjugate_by(&frames[k])
        };
        let seams = [refl(1), refl(3), refl(5)];
        Ok([
            seams[2].compose(&seams[0]),
            seams[0].compose(&seams[1]),
            seams[1].compose(&seams[2]),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CurveSpec {
    Cuff,
    Dual(i64),
}

/// Log-magnitudes of the endpoints of a normalized dual axis `(k1, k2)` with
/// `k1 < 0 < k2`, kept separately because they overflow long before the
/// quantities built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualAxis {
    pub ln_neg_k1: f64,
    pub ln_k2: f64,
    /// `sinh` of half the log-ratio `ln(k2 / -k1)`.
    pub skew: f64,
}

impl DualAxis {
    pub fn geodesic(&self) -> Result<Geodesic> {
        let k1 = -self.ln_neg_k1.exp();
        let k2 = self.ln_k2.exp();
        if !(k1 < 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
            return Err(QuakeError::NumericalRange(format!(
                "dual axis endpoints e^{} and e^{} are outside f64 range",
                self.ln_neg_k1, self.ln_k2
            )));
        }
        Geodesic::new(k1, k2)
    }

    /// `ln(-k1 k2)`, twice the log-height of the crossing with the cuff axis.
    pub fn ln_height_sq(&self) -> f64 {
        self.ln_neg_k1 + self.ln_k2
    }

    /// Whether the leaf meets the cuff at an angle greater than `π/2`.
    pub fn is_obtuse(&self, convention: AngleConvention) -> bool {
        match convention {
            AngleConvention::CuffAlongHolonomy => self.skew > 0.0,
            AngleConvention::CuffUpward => self.skew < 0.0,
        }
    }

    pub fn cuff_angle(&self, convention: AngleConvention) -> f64 {
        // cos of the angle from the upward vertical is tanh of half the log-ratio.
        let up = PI / 2.0 - (self.skew).asinh().tanh().asin();
        match convention {
            AngleConvention::CuffUpward => up,
            AngleConvention::CuffAlongHolonomy => PI - up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingDiagnostics {
    pub winding: i64,
    /// `r / l` on each side of the cuff: toward the first and second pants.
    pub r_over_l: [f64; 2],
    /// The angle `φ` at the foot of the orthogonal, on each side.
    pub phi: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPantsBlock {
    pub l_alpha: f64,
    pub t_alpha: f64,
    pub boundaries: [f64; 4],
    #[serde(skip)]
    pub a: Isometry,
    #[serde(skip)]
    pub m0: Isometry,
    /// `|γ_i^j|` ordered `(1,1), (1,2), (2,1), (2,2)`.
    pub gamma_half_lengths: [f64; 4],
    /// Distance from `α` to the opposite hexagon side, per pants.
    pub d: [f64; 2],
    /// Translation length of `P(H)`: the common orthogonal of `α` to itself
    /// through both pants.
    pub handle: f64,
    pub kappa: f64,
}

impl TwoPantsBlock {
    pub fn build(central: f64, twist: f64, boundaries: [f64; 4]) -> Result<Self> {
        check_positive("central cuff length", central)?;
        if !(twist >= 0.0 && twist < central) {
            return Err(QuakeError::Domain(format!(
                "twist {twist} outside [0, {central})"
            )));
        }
        Self::build_unwrapped(central, twist, boundaries)
    }

    /// Like [`TwoPantsBlock::build`] but accepts any real twist; a twist
    /// outside `[0, l)` differs from the wrapped one by Dehn twists, which
    /// relabel `Dual(j)`.
    pub fn build_unwrapped(central: f64, twist: f64, boundaries: [f64; 4]) -> Result<Self> {
        check_positive("central cuff length", central)?;
        if !twist.is_finite() {
            return Err(QuakeError::Domain(format!("twist must be finite, got {twist}")));
        }
        for b in boundaries {
            check_positive("boundary length", b)?;
        }
        let p1 = PantsData::new(central, boundaries[0], boundaries[1])?;
        let p2 = PantsData::new(central, boundaries[2], boundaries[3])?;
        p1.hexagon()?;
        p2.hexagon()?;
        let h1 = p1.half_orthogonal(0)?;
        let h2 = p2.half_orthogonal(0)?;
        let kappa = handle_constant(&boundaries);
        let handle = handle_length(central, kappa);
        if !handle.is_finite() {
            return Err(QuakeError::NumericalRange(format!(
                "dual curve length overflows for central length {central}"
            )));
        }
        let a = Isometry::dilation(-central);
        let hyp = translation_along(&Geodesic::new(-1.0, 1.0)?, handle)?;
        let m0 = Isometry::dilation(twist).compose(&hyp);
        Ok(TwoPantsBlock {
            l_alpha: central,
            t_alpha: twist,
            boundaries,
            a,
            m0,
            gamma_half_lengths: [h1, h1, h2, h2],
            d: [h1, h2],
            handle,
            kappa,
        })
    }

    pub fn with_default_boundaries(central: f64, twist: f64) -> Result<Self> {
        Self::build(central, twist, [DEFAULT_BOUNDARY; 4])
    }

    fn shift(&self, j: i64) -> f64 {
        self.t_alpha + j as f64 * self.l_alpha
    }

    fn check_shift(&self, j: i64) -> Result<f64> {
        let s = self.shift(j);
        if s.abs() > MAX_DUAL_SHIFT {
            return Err(QuakeError::NumericalRange(format!(
                "Dual({j}) needs |twist + j l| = {} > {MAX_DUAL_SHIFT}",
                s.abs()
            )));
        }
        Ok(s)
    }

    /// Power of `A` used to bring the axis of `Dual(j)` to height `[1, e^l)`.
    fn normalizing_shift(&self, s: f64) -> f64 {
        -self.l_alpha * (s / (2.0 * self.l_alpha)).floor()
    }

    /// Holonomy of `Dual(j)`, i.e. `A^{-j} M0` conjugated by a power of `A`
    /// so that its axis crosses the imaginary axis at height in `[1, e^l)`.
    pub fn dual_holonomy(&self, j: i64) -> Result<Isometry> {
        let s = self.check_shift(j)?;
        let u = self.normalizing_shift(s);
        let v = 0.5 * s + u;
        // Factor e^{|s|/2} cosh(H/2) out of the entries.
        let th = (0.5 * self.handle).tanh();
        let (m11, m22) = if s >= 0.0 {
            (1.0, (-s).exp())
        } else {
            (s.exp(), 1.0)
        };
        let m12 = (v - 0.5 * s.abs()).exp() * th;
        let m21 = (-v - 0.5 * s.abs()).exp() * th;
        let scale = 0.5 * s.abs() + ln_cosh(0.5 * self.handle);
        Ok(Isometry::from_scaled_entries(m11, m12, m21, m22, scale))
    }

    /// Analytic endpoints of the normalized axis of `Dual(j)`.
    pub fn dual_axis(&self, j: i64) -> Result<DualAxis> {
        let s = self.check_shift(j)?;
        let u = self.normalizing_shift(s);
        let skew = (0.5 * s).sinh() / (0.5 * self.handle).tanh();
        let a = skew.asinh();
        Ok(DualAxis {
            ln_neg_k1: u + 0.5 * s - a,
            ln_k2: u + 0.5 * s + a,
            skew,
        })
    }

    /// `ln tr` of the holonomy of `Dual(j)`.
    pub fn dual_ln_trace(&self, j: i64) -> f64 {
        std::f64::consts::LN_2 + ln_cosh(0.5 * self.handle) + ln_cosh(0.5 * self.shift(j))
    }

    pub fn curve_length(&self, c: CurveSpec) -> TranslationLength {
        match c {
            CurveSpec::Cuff => TranslationLength {
                value: self.l_alpha,
                excess: 4.0 * (0.25 * self.l_alpha).sinh().powi(2),
            },
            CurveSpec::Dual(j) => {
                let ln_tr = self.dual_ln_trace(j);
                if ln_tr > 30.0 {
                    return TranslationLength {
                        value: 2.0 * ln_tr,
                        excess: ln_tr.exp(),
                    };
                }
                let s = self.shift(j);
                let e = 4.0 * (0.25 * self.handle).sinh().powi(2) * (0.5 * s).cosh()
                    + 4.0 * (0.25 * s).sinh().powi(2);
                TranslationLength::from_excess(e)
            }
        }
    }

    /// Geometric winding number of `Dual(j)` about `α`: the number of lifts
    /// of a half-orthogonal crossed by one component of the leaf inside a
    /// pants, maximized over the two sides.
    pub fn winding_number_geometric(
        &self,
        j: i64,
        convention: AngleConvention,
    ) -> Result<WindingDiagnostics> {
        let axis = self.dual_axis(j)?;
        if !axis.is_obtuse(convention) {
            return Err(QuakeError::WindingUndefined { dual: j });
        }
        let x = axis.skew.abs();
        let mut r_over_l = [0.0; 2];
        let mut phi = [0.0; 2];
        for (side, d) in self.d.iter().enumerate() {
            // sin φ = 1 / cosh d, so cot φ = sinh d and cos φ = tanh d.
            phi[side] = (1.0 / d.cosh()).asin();
            r_over_l[side] = (x * d.tanh()).asinh() / self.l_alpha;
        }
        let winding = r_over_l[0].max(r_over_l[1]).round() as i64;
        Ok(WindingDiagnostics {
            winding,
            r_over_l,
            phi,
        })
    }

    pub fn winding(&self, j: i64, convention: AngleConvention) -> Result<i64> {
        Ok(self.winding_number_geometric(j, convention)?.winding)
    }
}

/// `κ = sqrt(K1 K2)` with `K_i` the sum of `cosh(b/2)` over the outer cuffs of
/// pants `i`.
pub fn handle_constant(boundaries: &[f64; 4]) -> f64 {
    let k1 = (0.5 * boundaries[0]).cosh() + (0.5 * boundaries[1]).cosh();
    let k2 = (0.5 * boundaries[2]).cosh() + (0.5 * boundaries[3]).cosh();
    (k1 * k2).sqrt()
}

/// Length of the orthogonal from `α` to itself crossing both pants.
pub fn handle_length(central: f64, kappa: f64) -> f64 {
    let sh = (0.5 * central).sinh();
    let x = kappa / sh;
    if x.is_finite() {
        2.0 * x.asinh()
    } else {
        // sinh underflow cannot happen for positive f64 inputs, but guard the
        // asymptotic anyway.
        2.0 * ((2.0 * kappa).ln() - sh.ln())
    }
}
