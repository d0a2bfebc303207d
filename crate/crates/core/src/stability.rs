//! Stability functions of the SSPMPRK schemes.
//!
//! `R(z)` is the factor by which an eigenvalue `λ` of `A` is mapped to an
//! eigenvalue `R(Δtλ)` of the Jacobian of the one-step map at a positive
//! steady state.

use std::fmt;
use std::io::Write;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::ComplexValue;
use crate::schemes::{check_eta2, Sspmprk2Params, Sspmprk3Params};

const TIE_TOL: f64 = 1e-14;

fn pole(z: ComplexValue) -> Error {
    Error::Pole { re: z.re, im: z.im }
}

/// `R₂(z)` for SSPMPRK2(α, β).
pub fn r2(z: ComplexValue, alpha: f64, beta: f64) -> Result<ComplexValue> {
    let num = (2.0 * alpha * beta * beta - 2.0 * alpha * beta + 1.0) * z * z
        - 2.0 * beta * (alpha - 1.0) * z
        - 2.0;
    let den = 2.0 * (1.0 + (alpha * beta - 1.0) * z) * (beta * z - 1.0);
    if den.norm() <= f64::EPSILON * (1.0 + num.norm()) {
        return Err(pole(z));
    }
    Ok(num / den)
}

/// `lim_{z→−∞} R₂(z)`.
pub fn r2_limit(alpha: f64, beta: f64) -> Result<f64> {
    let ab = alpha * beta;
    if (ab - 1.0).abs() <= TIE_TOL || beta == 0.0 {
        return Err(Error::UndefinedLimit(format!(
            "alpha*beta = {ab} makes the leading denominator coefficient vanish"
        )));
    }
    Ok((2.0 * alpha * beta * beta - 2.0 * ab + 1.0) / (2.0 * beta * (ab - 1.0)))
}

/// Shape of the SSPMPRK2 stability region in the closed left half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sspmprk2Class {
    /// `α > 1/(2β)`: `|R| ≤ 1` only on a bounded part of ℂ⁻.
    BoundedRegion,
    /// `|R(z)| < 1` on all of ℂ⁻ except the origin.
    UnconditionalStrict,
    /// `|R(z)| < 1` for `Re z < 0` and `|R| = 1` on the imaginary axis.
    UnconditionalMarginalAxis,
}

impl fmt::Display for Sspmprk2Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sspmprk2Class::BoundedRegion => "bounded-region",
            Sspmprk2Class::UnconditionalStrict => "unconditional-strict",
            Sspmprk2Class::UnconditionalMarginalAxis => "unconditional-marginal-axis",
        };
        f.write_str(s)
    }
}

pub fn classify_sspmprk2(alpha: f64, beta: f64) -> Result<Sspmprk2Class> {
    Sspmprk2Params::new(alpha, beta)?;
    let threshold = 1.0 / (2.0 * beta);
    let corner = alpha.abs() <= TIE_TOL && (beta - 0.5).abs() <= TIE_TOL;
    Ok(if (alpha - threshold).abs() <= TIE_TOL || corner {
        Sspmprk2Class::UnconditionalMarginalAxis
    } else if alpha > threshold {
        Sspmprk2Class::BoundedRegion
    } else {
        Sspmprk2Class::UnconditionalStrict
    })
}

/// Numerator minus denominator of `|R₂(ib)|²` written as a quotient of even
/// polynomials in `b`; its sign is the sign of `|R₂(ib)|² − 1`.
pub fn imag_axis_margin(b: f64, alpha: f64, beta: f64) -> f64 {
    let ab = alpha * beta;
    -(2.0 * ab - 2.0 * beta - 1.0) * (2.0 * ab - 1.0) * (2.0 * beta - 1.0) * b.powi(4)
}

/// Denominator `|2(1 + (αβ−1)ib)(βib − 1)|²` of the `|R₂(ib)|²` quotient.
pub fn imag_axis_denominator(b: f64, alpha: f64, beta: f64) -> f64 {
    let ab = alpha * beta;
    4.0 * (1.0 + (ab - 1.0).powi(2) * b * b) * (beta * beta * b * b + 1.0)
}

/// Arithmetic needed to evaluate the nested third-order stability function.
trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    /// `|self|` at the evaluation point; used for pole detection.
    fn magnitude(&self) -> f64;
}

impl Scalar for ComplexValue {
    fn constant(c: f64) -> Self {
        ComplexValue::new(c, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Truncated power series in `z` up to `z⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Series([f64; 5]);

impl Series {
    fn z() -> Self {
        Series([0.0, 1.0, 0.0, 0.0, 0.0])
    }
}

impl Add for Series {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.0;
        c.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        Series(c)
    }
}

impl Sub for Series {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Series {
    type Output = Self;
    fn neg(self) -> Self {
        Series(self.0.map(|v| -v))
    }
}

impl Mul for Series {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(c)
    }
}

impl Div for Series {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // solve q * o = self term by term
        let mut q = [0.0; 5];
        for k in 0..5 {
            let mut acc = self.0[k];
            for j in 0..k {
                acc -= q[j] * o.0[k - j];
            }
            q[k] = acc / o.0[0];
        }
        Series(q)
    }
}

impl Scalar for Series {
    fn constant(c: f64) -> Self {
        Series([c, 0.0, 0.0, 0.0, 0.0])
    }

    fn magnitude(&self) -> f64 {
        self.0[0].abs()
    }
}

/// Nested form of `R₃`; `None` when a denominator vanishes.
fn r3_nested<T: Scalar>(z: T, p: &Sspmprk3Params) -> Option<T> {
    let c = T::constant;
    let one = c(1.0);
    let recip = |d: T| -> Option<T> {
        if d.magnitude() <= f64::EPSILON {
            None
        } else {
            Some(one / d)
        }
    };
    let b3 = p.beta3_sum();
    let b2 = p.beta20 + p.beta21;
    let e34 = p.eta3 + p.eta4;
    let e12 = p.eta1 + p.eta2;

    let q = recip(one - c(p.beta10) * z)?;
    let rho_term = c(-p.n2) + c(p.n1 + 2.0 * p.n2) * q;
    let inner = recip(one - c(b2) * z)?
        * (c(p.alpha20) + c(p.beta20) * z + (c(p.alpha21) + c(p.beta21) * z) * q
            - c(b2) * z * rho_term);
    let a_term = recip(one - c(e34) * z)?
        * (c(p.eta1)
            + c(e12) * z * c((p.s - 1.0) * e34 + p.eta3)
            + (c(p.eta2) + c(e12) * z * c(-p.s * e34 + p.eta4)) * q);
    let body = c(p.alpha30)
        + c(p.beta30) * z
        + (c(p.alpha31) + c(p.beta31) * z) * q
        + (c(p.alpha32) + c(p.beta32) * z) * inner
        - z * c(b3) * (c(p.zeta) + c(p.zeta) * inner - c(p.zeta) * rho_term + a_term);
    Some(recip(one - z * c(b3))? * body)
}

/// `R₃(z)` for SSPMPRK3(η₂) with the exponent stored in `p`.
pub fn r3(z: ComplexValue, p: &Sspmprk3Params) -> Result<ComplexValue> {
    r3_nested(z, p).ok_or_else(|| pole(z))
}

/// Polynomial coefficients `R₃ = Σ aⱼ zʲ / Σ bⱼ zʲ`, tabulated as functions of
/// `η₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R3Coefficients {
    pub a: [f64; 5],
    pub b: [f64; 5],
}

impl R3Coefficients {
    pub fn eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        let horner = |c: &[f64; 5]| {
            c.iter()
                .rev()
                .fold(ComplexValue::new(0.0, 0.0), |acc, &v| acc * z + v)
        };
        let den = horner(&self.b);
        if den.norm() <= f64::EPSILON {
            return Err(pole(z));
        }
        Ok(horner(&self.a) / den)
    }
}

pub fn r3_coeffs(eta2: f64) -> Result<R3Coefficients> {
    check_eta2(eta2)?;
    let e = eta2;
    let den = 0.47620819268131703 * e - 1.0537480911094114871;
    let a = [
        (0.47620819268131705757 * e - 1.0537480911094115481) / den,
        (-3.1507612671062001337 * e + 3.9798736646158920698 + 0.61107641837494959323 * e * e)
            / den,
        (2.4343280828365809236 * e - 2.5818776483048969774 - 0.57282016379130601724 * e * e)
            / den,
        (0.6548068883713070549 * e - 0.81603432814746304744 - 0.1292603911580354457 * e * e)
            / den,
        (-0.59574557514538034065 * e + 0.64052974630005292675 + 0.13841284380675759373 * e * e)
            / den,
    ];
    let b = [
        1.0,
        -4.7768739020212929733 + 1.2832127371313151768 * e,
        6.7270587897458664634 - 2.4860903284764154151 * e,
        -3.7332290665687486456 + 1.5730472371819288192 * e,
        0.71670702950202557447 - 0.32389312216150656421 * e,
    ];
    Ok(R3Coefficients { a, b })
}

/// Points at which [`derive_s`] re-checks the fitted exponent.
pub const DERIVE_S_CHECKPOINTS: [(f64, f64); 10] = [
    (-0.1, 0.0),
    (-2.0, 0.0),
    (-5.0, 0.0),
    (-10.0, 0.0),
    (-50.0, 0.0),
    (-0.5, 0.5),
    (-1.0, 1.0),
    (-3.0, 4.0),
    (-5.0, 1.0),
    (-1.0, -3.0),
];

/// Relative agreement required by [`derive_s`].
pub const DERIVE_S_TOL: f64 = 1e-9;

/// Exponent `s` for which the nested `R₃` reproduces the tabulated
/// coefficient form, solved at `z_fit`.
pub fn derive_s_at(eta2: f64, z_fit: ComplexValue) -> Result<f64> {
    let coeffs = r3_coeffs(eta2)?;
    let r0 = r3(z_fit, &Sspmprk3Params::new(eta2, 0.0)?)?;
    let r1 = r3(z_fit, &Sspmprk3Params::new(eta2, 1.0)?)?;
    let target = coeffs.eval(z_fit)?;
    let slope = r1 - r0;
    if slope.norm() <= f64::EPSILON {
        return Err(Error::Inconsistency(format!(
            "R3 does not depend on s at z = {z_fit}"
        )));
    }
    let s = (target - r0) / slope;
    if s.im.abs() > DERIVE_S_TOL * (1.0 + s.re.abs()) {
        return Err(Error::Inconsistency(format!("fitted s = {s} is not real")));
    }
    Ok(s.re)
}

/// Largest relative mismatch between nested and coefficient forms of `R₃`
/// over [`DERIVE_S_CHECKPOINTS`].
pub fn coefficient_form_residual(p: &Sspmprk3Params) -> Result<f64> {
    let coeffs = r3_coeffs(p.eta2)?;
    let mut worst: f64 = 0.0;
    for (re, im) in DERIVE_S_CHECKPOINTS {
        let z = ComplexValue::new(re, im);
        let nested = r3(z, p)?;
        let table = coeffs.eval(z)?;
        worst = worst.max((nested - table).norm() / (1.0 + table.norm()));
    }
    Ok(worst)
}

/// Exponent consistent with the tabulated `R₃` coefficients: fitted at
/// `z = −1` and verified at every checkpoint.
pub fn derive_s(eta2: f64) -> Result<f64> {
    let s = derive_s_at(eta2, ComplexValue::new(-1.0, 0.0))?;
    let residual = coefficient_form_residual(&Sspmprk3Params::new(eta2, s)?)?;
    if residual > DERIVE_S_TOL {
        return Err(Error::Inconsistency(format!(
            "nested and tabulated R3 disagree by {residual:e} with s = {s}"
        )));
    }
    Ok(s)
}

/// Taylor coefficients of the nested `R₃` at the origin, up to `z⁴`.
pub fn r3_taylor(p: &Sspmprk3Params) -> [f64; 5] {
    r3_nested(Series::z(), p)
        .expect("denominators are 1 at the origin")
        .0
}

/// Exponent for which `R₃(z) = e^z + O(z⁴)`, the linear third-order
/// condition. `R₃` is affine in `s`, so the `z³` condition fixes it.
pub fn third_order_s(eta2: f64) -> Result<f64> {
    let c0 = r3_taylor(&Sspmprk3Params::new(eta2, 0.0)?);
    let c1 = r3_taylor(&Sspmprk3Params::new(eta2, 1.0)?);
    let slope = c1[3] - c0[3];
    if slope.abs() <= f64::EPSILON {
        return Err(Error::Inconsistency(
            "z^3 coefficient does not depend on s".into(),
        ));
    }
    let s = (1.0 / 6.0 - c0[3]) / slope;
    let c = r3_taylor(&Sspmprk3Params::new(eta2, s)?);
    for (k, want) in [(0, 1.0), (1, 1.0), (2, 0.5), (3, 1.0 / 6.0)] {
        if (c[k] - want).abs() > 1e-10 {
            return Err(Error::Inconsistency(format!(
                "z^{k} coefficient {} differs from {want}",
                c[k]
            )));
        }
    }
    Ok(s)
}

/// Which stability function to scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityFunction {
    Sspmprk2 { alpha: f64, beta: f64 },
    Sspmprk3(Sspmprk3Params),
}

impl StabilityFunction {
    pub fn eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        match self {
            StabilityFunction::Sspmprk2 { alpha, beta } => r2(z, *alpha, *beta),
            StabilityFunction::Sspmprk3(p) => r3(z, p),
        }
    }
}

/// Default scan rectangle covering the calibration points.
pub const DEFAULT_RE_RANGE: (f64, f64) = (-15.0, 0.5);
pub const DEFAULT_IM_RANGE: (f64, f64) = (-8.0, 8.0);
pub const DEFAULT_RESOLUTION: usize = 600;

/// Grid evaluation of `|R(z)|`; index `(ix, iy)` maps to
/// `re_range.0 + ix·Δre + i·(im_range.0 + iy·Δim)`.
#[derive(Debug, Clone)]
pub struct StabilityScan {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    magnitudes: Vec<f64>,
}

impl StabilityScan {
    pub fn point(&self, ix: usize, iy: usize) -> ComplexValue {
        let t = |lo: f64, hi: f64, k: usize, n: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        ComplexValue::new(
            t(self.re_range.0, self.re_range.1, ix, self.nx),
            t(self.im_range.0, self.im_range.1, iy, self.ny),
        )
    }

    /// `|R|` at a grid point; `+∞` at poles.
    pub fn magnitude(&self, ix: usize, iy: usize) -> f64 {
        self.magnitudes[iy * self.nx + ix]
    }

    pub fn inside(&self, ix: usize, iy: usize) -> bool {
        self.magnitude(ix, iy) <= 1.0
    }

    pub fn count_inside(&self) -> usize {
        self.magnitudes.iter().filter(|m| **m <= 1.0).count()
    }

    /// Grid points with their magnitude, row by row in `im`.
    pub fn iter(&self) -> impl Iterator<Item = (ComplexValue, f64)> + '_ {
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| (self.point(ix, iy), self.magnitude(ix, iy)))
        })
    }

    /// CSV with header `re,im,abs_r,inside`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re,im,abs_r,inside")?;
        for (z, m) in self.iter() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{}",
                z.re,
                z.im,
                m,
                u8::from(m <= 1.0)
            )?;
        }
        Ok(())
    }
}

pub fn region_scan(
    which: &StabilityFunction,
    re_range: (f64, f64),
    im_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<StabilityScan> {
    if nx < 2 || ny < 2 {
        return Err(Error::Parameter(format!(
            "scan grid needs at least 2x2 points (got {nx}x{ny})"
        )));
    }
    if !(re_range.0 < re_range.1 && im_range.0 < im_range.1) {
        return Err(Error::Parameter("scan ranges must be increasing".into()));
    }
    match which {
        StabilityFunction::Sspmprk2 { alpha, beta } => {
            Sspmprk2Params::new(*alpha, *beta)?;
        }
        StabilityFunction::Sspmprk3(p) => check_eta2(p.eta2)?,
    }
    let mut scan = StabilityScan {
        re_range,
        im_range,
        nx,
        ny,
        magnitudes: Vec::with_capacity(nx * ny),
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let m = match which.eval(scan.point(ix, iy)) {
                Ok(r) => r.norm(),
                Err(Error::Pole { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            scan.magnitudes.push(m);
        }
    }
    Ok(scan)
}
