use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuakeError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate hexagon for alternate sides ({a}, {b}, {c})")]
    DegenerateHexagon { a: f64, b: f64, c: f64 },

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("winding number undefined: leaf meets the cuff at angle <= pi/2 (dual index {dual})")]
    WindingUndefined { dual: i64 },

    #[error(
        "twist extraction failed on [{lo}, {hi}]: ln traces cuff={ln_cuff}, dual={ln_dual}, next dual={ln_next}"
    )]
    TwistExtraction {
        lo: f64,
        hi: f64,
        ln_cuff: f64,
        ln_dual: f64,
        ln_next: f64,
    },

    #[error("length-spectrum norm estimate is not finite; finiteness of the norm is necessary for membership")]
    NormNotFinite,
}

pub type Result<T> = std::result::Result<T, QuakeError>;
