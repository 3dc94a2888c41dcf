//! Complex error-function family built on the Faddeeva function
//! `w(z) = exp(-z^2) erfc(-iz)`.
//!
//! `w` is evaluated in the first quadrant and extended with the symmetries
//! `w(-conj z) = conj w(z)` and `w(z) = 2 exp(-z^2) - w(-z)`. Inside the
//! quadrant the plane is split into three regions:
//!
//! * `|z| < 1`: Maclaurin series of the Dawson function,
//! * `Im z < 0.5`: the band along the real axis, where
//!   `w = exp(-z^2) (1 + 2i/sqrt(pi) sum z^(2k+1) / (k! (2k+1)))`
//!   loses at most `|z|^2 exp(2 Im(z)^2)` ulps; beyond `|z| = 12` the sum is
//!   replaced by its asymptotic expansion,
//! * everywhere else: the Laplace continued fraction, evaluated bottom-up
//!   with a depth that grows like `1 / Im(z)^2`.
//!
//! The regions agree to a few ulps across every seam, and the whole plane
//! `|z| <= 10` is good to roughly 1e-14 relative.

use std::f64::consts::FRAC_2_SQRT_PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

const SQRT_PI: f64 = 1.772_453_850_905_516;
const FRAC_1_SQRT_PI: f64 = 0.5 * FRAC_2_SQRT_PI;

const MACLAURIN_RADIUS: f64 = 1.0;
const BAND_HEIGHT: f64 = 0.5;
const ASYMPTOTIC_RADIUS: f64 = 12.0;
const ERF_SERIES_RADIUS: f64 = 0.5;
const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 4000;

fn check_finite(op: &'static str, z: Complex) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            op,
            reason: format!("non-finite argument {z}"),
        })
    }
}

fn check_result(op: &'static str, z: Complex) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow { op })
    }
}

/// `exp(-z^2)` with the real part of the exponent formed as `(y - x)(y + x)`.
fn exp_neg_sq(z: Complex) -> Complex {
    let (x, y) = (z.re, z.im);
    Complex::from_polar(((y - x) * (y + x)).exp(), -2.0 * x * y)
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.
pub fn faddeeva(z: Complex) -> Result<Complex> {
    check_finite("faddeeva", z)?;
    check_result("faddeeva", w(z))
}

/// Complex error function.
pub fn erf_complex(z: Complex) -> Result<Complex> {
    check_finite("erf_complex", z)?;
    check_result("erf_complex", erf(z))
}

/// Imaginary error function `erfi(z) = -i erf(iz)`.
pub fn erfi_complex(z: Complex) -> Result<Complex> {
    check_finite("erfi_complex", z)?;
    let iz = Complex::new(-z.im, z.re);
    let e = erf(iz);
    check_result("erfi_complex", Complex::new(e.im, -e.re))
}

/// Complementary error function of a real argument.
///
/// Underflows to zero past `x ~ 27.2`.
pub fn erfc_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            op: "erfc_real",
            reason: format!("non-finite argument {x}"),
        });
    }
    Ok(erfc(x))
}

/// Scaled complementary error function `exp(x^2) erfc(x)`, i.e. `w(ix)`.
pub fn erfcx_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            op: "erfcx_real",
            reason: format!("non-finite argument {x}"),
        });
    }
    let v = erfcx(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { op: "erfcx_real" })
    }
}

pub(crate) fn w(z: Complex) -> Complex {
    if z.im < 0.0 {
        return 2.0 * exp_neg_sq(z) - w_upper(-z);
    }
    w_upper(z)
}

fn w_upper(z: Complex) -> Complex {
    if z.re == 0.0 {
        // Pure imaginary argument: w is real.
        return Complex::new(erfcx(z.im), 0.0);
    }
    if z.re < 0.0 {
        return w_quadrant(Complex::new(-z.re, z.im)).conj();
    }
    w_quadrant(z)
}

fn w_quadrant(z: Complex) -> Complex {
    let r = z.norm();
    if r < MACLAURIN_RADIUS {
        w_maclaurin(z)
    } else if z.im < BAND_HEIGHT {
        if r < ASYMPTOTIC_RADIUS {
            w_band(z)
        } else {
            w_asymptotic(z)
        }
    } else {
        w_continued_fraction(z)
    }
}

/// `exp(-z^2) + 2i/sqrt(pi) D(z)` with the alternating Dawson series
/// `D(z) = sum (-2 z^2)^k z / (2k+1)!!`.
fn w_maclaurin(z: Complex) -> Complex {
    let ratio = -2.0 * z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..MAX_TERMS {
        term = term * ratio / (2 * k + 1) as f64;
        sum += term;
        if term.norm() <= SERIES_TOL * sum.norm() {
            break;
        }
    }
    exp_neg_sq(z) + Complex::new(0.0, FRAC_2_SQRT_PI) * sum
}

fn w_band(z: Complex) -> Complex {
    let z2 = z * z;
    let r2 = z2.norm();
    let mut power = z;
    let mut sum = z;
    for k in 1..MAX_TERMS {
        power = power * z2 / k as f64;
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if k as f64 > r2 && term.norm() <= SERIES_TOL * sum.norm() {
            break;
        }
    }
    exp_neg_sq(z) * (1.0 + Complex::new(0.0, FRAC_2_SQRT_PI) * sum)
}

fn w_asymptotic(z: Complex) -> Complex {
    let inv_2z2 = 1.0 / (2.0 * z * z);
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..60 {
        let next = term * inv_2z2 * (2 * k - 1) as f64;
        if next.norm() > term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() <= SERIES_TOL * sum.norm() {
            break;
        }
    }
    exp_neg_sq(z) + Complex::new(0.0, FRAC_1_SQRT_PI) * sum / z
}

fn continued_fraction_depth(y: f64) -> usize {
    (20.0 + 320.0 / (y * y)).min(1400.0) as usize
}

/// Laplace continued fraction
/// `w = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`.
fn w_continued_fraction(z: Complex) -> Complex {
    let depth = continued_fraction_depth(z.im);
    let mut t = z;
    for k in (1..=depth).rev() {
        t = z - (0.5 * k as f64) / t;
    }
    Complex::new(0.0, FRAC_1_SQRT_PI) / t
}

fn erf(z: Complex) -> Complex {
    if z.re == 0.0 {
        // erf(iy) = i exp(y^2) Im w(y), exactly imaginary.
        let y = z.im;
        return Complex::new(0.0, (y * y).exp() * w(Complex::new(y, 0.0)).im);
    }
    if z.norm() < ERF_SERIES_RADIUS {
        return erf_maclaurin(z);
    }
    if z.re < 0.0 {
        return -erf(-z);
    }
    let iz = Complex::new(-z.im, z.re);
    1.0 - exp_neg_sq(z) * w(iz)
}

/// `2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))`.
fn erf_maclaurin(z: Complex) -> Complex {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    for n in 1..MAX_TERMS {
        power = -power * z2 / n as f64;
        let term = power / (2 * n + 1) as f64;
        sum += term;
        if term.norm() <= SERIES_TOL * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn erf_real_series(x: f64) -> f64 {
    erf_maclaurin(Complex::new(x, 0.0)).re
}

/// `sqrt(pi) exp(x^2) erfc(x)` continued fraction, `x >= 0.5`.
fn erfc_fraction_scaled(x: f64) -> f64 {
    let depth = continued_fraction_depth(x);
    let mut t = x;
    for k in (1..=depth).rev() {
        t = x + (0.5 * k as f64) / t;
    }
    1.0 / t
}

/// `1 - sqrt(pi) x erfcx(x)` for `x >= 0`, without cancellation at large `x`.
///
/// Writing the fraction as `t = x + (1/2)/t1`, the complement is
/// `(1/2)/(t1 t)`.
pub(crate) fn mills_complement(x: f64) -> f64 {
    if x < ERF_SERIES_RADIUS {
        return 1.0 - SQRT_PI * x * erfcx(x);
    }
    let depth = continued_fraction_depth(x);
    let mut t = x;
    for k in (2..=depth).rev() {
        t = x + (0.5 * k as f64) / t;
    }
    let t1 = t;
    let t = x + 0.5 / t1;
    0.5 / (t1 * t)
}

fn erfc(x: f64) -> f64 {
    if x < -ERF_SERIES_RADIUS {
        2.0 - erfc(-x)
    } else if x < ERF_SERIES_RADIUS {
        1.0 - erf_real_series(x)
    } else {
        (-x * x).exp() * erfc_fraction_scaled(x) / SQRT_PI
    }
}

fn erfcx(x: f64) -> f64 {
    if x < -ERF_SERIES_RADIUS {
        2.0 * (x * x).exp() - erfcx(-x)
    } else if x < ERF_SERIES_RADIUS {
        (x * x).exp() * (1.0 - erf_real_series(x))
    } else {
        erfc_fraction_scaled(x) / SQRT_PI
    }
}
