use crate::error::{Error, Result};

const TIE_TOL: f64 = 1e-14;

/// Coefficients of SSPMPRK2(α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sspmprk2Params {
    pub alpha: f64,
    pub beta: f64,
    pub beta20: f64,
    pub beta21: f64,
    /// Exponent of the Patankar weight `(yⁿ)^{1−s} (y⁽¹⁾)^s`.
    pub s: f64,
}

impl Sspmprk2Params {
    /// Validates `0 ≤ α ≤ 1`, `β > 0`, `αβ + 1/(2β) ≤ 1` and derives the
    /// remaining coefficients.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Parameter("alpha and beta must be finite".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Parameter(format!(
                "0 <= alpha <= 1 violated (alpha = {alpha})"
            )));
        }
        if beta <= 0.0 {
            return Err(Error::Parameter(format!("beta > 0 violated (beta = {beta})")));
        }
        let bound = alpha * beta + 1.0 / (2.0 * beta);
        if bound > 1.0 + TIE_TOL {
            return Err(Error::Parameter(format!(
                "alpha*beta + 1/(2 beta) <= 1 violated ({bound})"
            )));
        }
        let one_minus = 1.0 - alpha * beta;
        if one_minus <= 0.0 {
            return Err(Error::Parameter(format!(
                "1 - alpha*beta > 0 violated ({one_minus})"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            beta20: 1.0 - 1.0 / (2.0 * beta) - alpha * beta,
            beta21: 1.0 / (2.0 * beta),
            s: (alpha * beta * beta - alpha * beta + 1.0) / (beta * one_minus),
        })
    }
}

/// Upper end of the admissible `η₂` interval.
pub const ETA2_MAX: f64 = 0.37110619221712509;

/// Fixed coefficients of the third-order scheme.
pub mod sspmprk3_constants {
    pub const ALPHA10: f64 = 1.0;
    pub const ALPHA20: f64 = 9.2600312554031827e-1;
    pub const ALPHA21: f64 = 7.3996874459681783e-2;
    pub const ALPHA30: f64 = 7.0439040373427619e-1;
    pub const ALPHA31: f64 = 2.0662904223744017e-10;
    pub const ALPHA32: f64 = 2.9560959605909481e-1;
    pub const BETA10: f64 = 4.7620819268131703e-1;
    pub const BETA20: f64 = 7.7545442722396801e-2;
    pub const BETA21: f64 = 5.9197500149679749e-1;
    pub const BETA30: f64 = 2.0044747790361456e-1;
    pub const BETA31: f64 = 6.8214380786704851e-10;
    pub const BETA32: f64 = 5.9121918658514827e-1;
    pub const ZETA: f64 = 0.62889380778287493358;
    pub const ETA1_OFFSET: f64 = 0.37110619221712506642;
    pub const ETA3_SLOPE: f64 = -1.2832127371313151768;
    pub const ETA3_OFFSET: f64 = 0.6146025595987523739;
    pub const ETA4: f64 = 2.2248760403511226405;
    pub const N1: f64 = 0.25690460257320105191;
}

/// Coefficients of SSPMPRK3(η₂) with an explicit weight exponent `s`.
///
/// The exponent is not fixed by the coefficient table; see
/// [`crate::stability::third_order_s`] and [`crate::stability::derive_s`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sspmprk3Params {
    pub eta2: f64,
    pub s: f64,
    pub alpha10: f64,
    pub alpha20: f64,
    pub alpha21: f64,
    pub alpha30: f64,
    pub alpha31: f64,
    pub alpha32: f64,
    pub beta10: f64,
    pub beta20: f64,
    pub beta21: f64,
    pub beta30: f64,
    pub beta31: f64,
    pub beta32: f64,
    pub zeta: f64,
    pub eta1: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub n1: f64,
    pub n2: f64,
}

impl Sspmprk3Params {
    pub fn new(eta2: f64, s: f64) -> Result<Self> {
        use sspmprk3_constants as c;
        check_eta2(eta2)?;
        if !s.is_finite() {
            return Err(Error::Parameter(format!("exponent s must be finite ({s})")));
        }
        let p = Self {
            eta2,
            s,
            alpha10: c::ALPHA10,
            alpha20: c::ALPHA20,
            alpha21: c::ALPHA21,
            alpha30: c::ALPHA30,
            alpha31: c::ALPHA31,
            alpha32: c::ALPHA32,
            beta10: c::BETA10,
            beta20: c::BETA20,
            beta21: c::BETA21,
            beta30: c::BETA30,
            beta31: c::BETA31,
            beta32: c::BETA32,
            zeta: c::ZETA,
            eta1: c::ETA1_OFFSET - eta2,
            eta3: c::ETA3_SLOPE * eta2 + c::ETA3_OFFSET,
            eta4: c::ETA4,
            n1: c::N1,
            n2: 1.0 - c::N1,
        };
        let second = p.alpha20 + p.alpha21 - 1.0;
        let third = p.alpha30 + p.alpha31 + p.alpha32 - 1.0;
        if second.abs() > 1e-13 || third.abs() > 1e-13 {
            return Err(Error::Parameter(format!(
                "stage weights do not sum to one ({second:e}, {third:e})"
            )));
        }
        Ok(p)
    }

    pub fn beta3_sum(&self) -> f64 {
        self.beta30 + self.beta31 + self.beta32
    }
}

pub(crate) fn check_eta2(eta2: f64) -> Result<()> {
    if !(0.0..=ETA2_MAX).contains(&eta2) {
        return Err(Error::Parameter(format!(
            "eta2 must lie in [0, {ETA2_MAX}] (eta2 = {eta2})"
        )));
    }
    Ok(())
}
