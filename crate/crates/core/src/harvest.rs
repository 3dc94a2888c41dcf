//! Closed-form O(lambda^2) state of two static detectors separated by `L`,
//! switched on by the Gaussian `exp(-tau^2 / 2 sigma^2)`, and the steering
//! and concurrence harvested into it.
//!
//! Everything is in sigma units: `omega_a = Omega_A sigma`,
//! `omega_b = Omega_B sigma`, `separation = L / sigma`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{self, Complex};
use crate::xstate::{clamped_sqrt, max_with_zero, Direction, SteeringResult, XState};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Below this separation the correlation brackets switch to their Taylor
/// expansions in `L / sigma`.
pub const SMALL_SEPARATION: f64 = 1e-4;

/// `lambda^2 / 4 pi` above which the O(lambda^4) remainder is no longer small.
pub const PERTURBATIVE_LIMIT: f64 = 0.01;

static WARNED_STRONG_COUPLING: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPairParams {
    /// Coupling `lambda`. Zero is accepted as the decoupled limit.
    pub coupling: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub separation: f64,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        });
    }
    Ok(())
}

impl DetectorPairParams {
    pub fn new(coupling: f64, omega_a: f64, omega_b: f64, separation: f64) -> Result<Self> {
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::InvalidParameter {
                name: "coupling",
                value: coupling,
                reason: "must be finite and non-negative",
            });
        }
        positive("omega_a", omega_a)?;
        positive("omega_b", omega_b)?;
        positive("separation", separation)?;
        let params = DetectorPairParams {
            coupling,
            omega_a,
            omega_b,
            separation,
        };
        if let Some(message) = params.perturbative_warning() {
            if !WARNED_STRONG_COUPLING.swap(true, Ordering::Relaxed) {
                log::warn!("{message}");
            }
        }
        Ok(params)
    }

    /// `omega_b = omega_a (1 + gap_ratio)`.
    pub fn with_gap_ratio(
        coupling: f64,
        omega_a: f64,
        gap_ratio: f64,
        separation: f64,
    ) -> Result<Self> {
        if !gap_ratio.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gap_ratio",
                value: gap_ratio,
                reason: "must be finite",
            });
        }
        Self::new(coupling, omega_a, omega_a * (1.0 + gap_ratio), separation)
    }

    /// `Delta Omega sigma = omega_b - omega_a`; any sign.
    pub fn gap_difference(&self) -> f64 {
        self.omega_b - self.omega_a
    }

    pub fn gap_sum(&self) -> f64 {
        self.omega_a + self.omega_b
    }

    /// `Delta Omega / Omega_A`.
    pub fn gap_ratio(&self) -> f64 {
        self.gap_difference() / self.omega_a
    }

    pub fn perturbative_warning(&self) -> Option<String> {
        let scale = self.coupling * self.coupling / (4.0 * PI);
        (scale > PERTURBATIVE_LIMIT).then(|| {
            format!(
                "coupling {} gives lambda^2/4pi = {scale:.3e} > {PERTURBATIVE_LIMIT}; \
                 O(lambda^4) corrections are not negligible",
                self.coupling
            )
        })
    }
}

/// The O(lambda^2) amplitudes of the two-detector state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeState {
    pub p_a: f64,
    pub p_b: f64,
    pub corr_x: Complex,
    pub corr_c: Complex,
}

/// `(lambda^2 / 4 pi) [exp(-omega^2) - sqrt(pi) omega erfc(omega)]`.
pub fn transition_probability(omega: f64, coupling: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain {
            op: "transition_probability",
            reason: format!(
                "gap {omega} must be positive and finite (the omega -> 0 limit is lambda^2/4pi)"
            ),
        });
    }
    if !coupling.is_finite() || coupling < 0.0 {
        return Err(Error::InvalidParameter {
            name: "coupling",
            value: coupling,
            reason: "must be finite and non-negative",
        });
    }
    // exp(-w^2) - sqrt(pi) w erfc(w) = exp(-w^2) (1 - sqrt(pi) w erfcx(w))
    let bracket = (-omega * omega).exp() * specfun::mills_complement(omega);
    Ok(coupling * coupling / (4.0 * PI) * bracket)
}

/// The `|00> <-> |11>` amplitude `X`.
pub fn correlation_x(p: &DetectorPairParams) -> Result<Complex> {
    let (sum, diff, l) = (p.gap_sum(), p.gap_difference(), p.separation);
    let prefactor =
        p.coupling * p.coupling / (8.0 * SQRT_PI) * (-(sum * sum + l * l) / 4.0).exp();
    let bracket = if l < SMALL_SEPARATION {
        x_bracket_series(diff, l)?
    } else {
        x_bracket(diff, l)?
    };
    let value = Complex::i() * bracket * (prefactor / l);
    finite("correlation_x", value)
}

/// `e^{i D L/2} erfi((L - iD)/2) + e^{-i D L/2} erfi((L + iD)/2) + 2i cos(D L/2)`.
fn x_bracket(diff: f64, l: f64) -> Result<Complex> {
    let phase = Complex::from_polar(1.0, diff * l / 2.0);
    let minus = specfun::erfi_complex(Complex::new(l / 2.0, -diff / 2.0))?;
    let plus = specfun::erfi_complex(Complex::new(l / 2.0, diff / 2.0))?;
    Ok(phase * minus + phase.conj() * plus + Complex::new(0.0, 2.0 * (diff * l / 2.0).cos()))
}

/// Second-order Taylor expansion of [`x_bracket`] about `L = 0`.
///
/// The erfi pair is real and odd in `L`, so only its linear term survives to
/// this order: `d/dL = D erf(D/2) + 2 exp(-D^2/4) / sqrt(pi)`.
fn x_bracket_series(diff: f64, l: f64) -> Result<Complex> {
    let erf_half = specfun::erf_complex(Complex::new(diff / 2.0, 0.0))?.re;
    let slope = diff * erf_half + 2.0 * (-diff * diff / 4.0).exp() / SQRT_PI;
    Ok(Complex::new(slope * l, 2.0 - diff * diff * l * l / 4.0))
}

/// The `|01> <-> |10>` amplitude `C`, real for static detectors.
pub fn correlation_c(p: &DetectorPairParams) -> Result<Complex> {
    let (sum, diff, l) = (p.gap_sum(), p.gap_difference(), p.separation);
    let prefactor =
        p.coupling * p.coupling / (4.0 * SQRT_PI) * (-(l * l + diff * diff) / 4.0).exp();
    let ratio = if l < SMALL_SEPARATION {
        c_bracket_over_l_series(sum, l)?
    } else {
        c_bracket(sum, l)? / l
    };
    finite("correlation_c", Complex::new(prefactor * ratio, 0.0))
}

/// `Im[e^{i S L/2} erf((iL + S)/2)] - sin(S L/2)`, which is `O(L)`.
fn c_bracket(sum: f64, l: f64) -> Result<f64> {
    let phase = Complex::from_polar(1.0, sum * l / 2.0);
    let erf = specfun::erf_complex(Complex::new(sum / 2.0, l / 2.0))?;
    Ok((phase * erf).im - (sum * l / 2.0).sin())
}

/// [`c_bracket`]` / L` to second order in `L`.
///
/// The bracket equals `-exp((L^2 - S^2)/4) Im w(iS/2 - L/2)`. Expanding `w`
/// about `iy`, `y = S/2`, only odd derivatives have imaginary parts:
/// `Im w' = 2/sqrt(pi) - 2y w(iy)` and
/// `Im w''' = -(4 + 4y^2) Im w' + 4y w(iy)`.
fn c_bracket_over_l_series(sum: f64, l: f64) -> Result<f64> {
    let y = sum / 2.0;
    let scaled = specfun::erfcx_real(y)?;
    let d1 = 2.0 / SQRT_PI * specfun::mills_complement(y);
    let d3 = -(4.0 + 4.0 * y * y) * d1 + 4.0 * y * scaled;
    Ok(((l * l - sum * sum) / 4.0).exp() * (d1 / 2.0 + d3 * l * l / 48.0))
}

fn finite(op: &'static str, z: Complex) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow { op })
    }
}

impl PerturbativeState {
    pub fn compute(p: &DetectorPairParams) -> Result<Self> {
        Ok(PerturbativeState {
            p_a: transition_probability(p.omega_a, p.coupling)?,
            p_b: transition_probability(p.omega_b, p.coupling)?,
            corr_x: correlation_x(p)?,
            corr_c: correlation_c(p)?,
        })
    }

    /// Density matrix in the basis `|00>, |01>, |10>, |11>`.
    pub fn to_xstate(&self) -> Result<XState> {
        XState::new(
            [1.0 - self.p_a - self.p_b, self.p_b, self.p_a, 0.0],
            self.corr_x,
            self.corr_c,
        )
    }

    /// Signed largest branch before clamping, specialised to `rho44 = 0`.
    ///
    /// The affine part of each radicand, `P/2 - P^2/2`, uses the probability
    /// of the steered party: `P_A` for B->A, `P_B` for A->B.
    pub fn steering_inner(&self, direction: Direction) -> Result<f64> {
        let (pa, pb) = (self.p_a, self.p_b);
        let own = match direction {
            Direction::BToA => pa,
            Direction::AToB => pb,
        };
        let affine = 0.5 * own - 0.5 * own * own;
        let x_radicand = (1.0 + SQRT_3) / 2.0 * pa * pb + affine;
        let c_radicand = (1.0 - SQRT_3) / 2.0 * pa * pb + affine;
        let x_branch = self.corr_x.norm() - clamped_sqrt(x_radicand, "closed-form steering (X)")?;
        let c_branch = self.corr_c.norm() - clamped_sqrt(c_radicand, "closed-form steering (C)")?;
        Ok(x_branch.max(c_branch))
    }

    pub fn steering(&self) -> Result<SteeringResult> {
        let a_to_b = max_with_zero(&[self.steering_inner(Direction::AToB)?]);
        let b_to_a = max_with_zero(&[self.steering_inner(Direction::BToA)?]);
        Ok(SteeringResult::from_measures(a_to_b, b_to_a))
    }

    /// `|X| - sqrt(P_A P_B)`; the `|C|` branch is not used because
    /// `rho44` vanishes only by truncation.
    pub fn concurrence_inner(&self) -> f64 {
        self.corr_x.norm() - (self.p_a * self.p_b).sqrt()
    }

    pub fn concurrence(&self) -> f64 {
        2.0 * self.concurrence_inner().max(0.0)
    }
}

pub fn perturbative_state(p: &DetectorPairParams) -> Result<(PerturbativeState, XState)> {
    let amplitudes = PerturbativeState::compute(p)?;
    let rho = amplitudes.to_xstate()?;
    Ok((amplitudes, rho))
}

pub fn steering_closed_form(p: &DetectorPairParams) -> Result<SteeringResult> {
    PerturbativeState::compute(p)?.steering()
}

pub fn concurrence_harvested(p: &DetectorPairParams) -> Result<f64> {
    Ok(PerturbativeState::compute(p)?.concurrence())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xstate;

    fn params(omega_a: f64, omega_b: f64, l: f64) -> DetectorPairParams {
        DetectorPairParams::new(0.1, omega_a, omega_b, l).unwrap()
    }

    #[test]
    fn parameters_are_validated() {
        assert!(DetectorPairParams::new(0.1, 0.0, 1.0, 1.0).is_err());
        assert!(DetectorPairParams::new(0.1, 0.5, -1.0, 1.0).is_err());
        assert!(DetectorPairParams::new(0.1, 0.5, 1.0, 0.0).is_err());
        assert!(DetectorPairParams::new(f64::NAN, 0.5, 1.0, 1.0).is_err());
        assert!(DetectorPairParams::new(-0.1, 0.5, 1.0, 1.0).is_err());
        let p = DetectorPairParams::with_gap_ratio(0.1, 0.5, 1.0, 0.2).unwrap();
        assert_eq!(p.omega_b, 1.0);
        assert_eq!(p.gap_ratio(), 1.0);
        // Reversed gaps are allowed.
        assert!(DetectorPairParams::new(0.1, 1.0, 0.5, 0.2).is_ok());
    }

    #[test]
    fn perturbative_warning_threshold() {
        assert!(params(0.5, 1.0, 1.0).perturbative_warning().is_none());
        let strong = DetectorPairParams::new(0.4, 0.5, 1.0, 1.0).unwrap();
        assert!(strong.perturbative_warning().is_some());
    }

    #[test]
    fn transition_probability_limits_and_monotonicity() {
        let limit = 0.01 / (4.0 * PI);
        assert!((limit - 7.957_747e-4).abs() < 1e-10);
        let tiny = transition_probability(1e-12, 0.1).unwrap();
        assert!((tiny - limit).abs() < 1e-14);
        let (a, b, c) = (
            transition_probability(0.5, 0.1).unwrap(),
            transition_probability(1.2, 0.1).unwrap(),
            transition_probability(3.0, 0.1).unwrap(),
        );
        assert!(a > b && b > c && c > 0.0);
        assert!(transition_probability(0.0, 0.1).is_err());
        assert!(transition_probability(-1.0, 0.1).is_err());
    }

    #[test]
    fn transition_probability_matches_direct_formula() {
        for omega in [0.1_f64, 0.5, 1.0, 2.0, 3.0] {
            let direct = (-omega * omega).exp()
                - SQRT_PI * omega * specfun::erfc_real(omega).unwrap();
            let p = transition_probability(omega, 1.0).unwrap() * 4.0 * PI;
            assert!((p - direct).abs() <= 1e-13 * direct, "omega={omega}");
        }
    }

    #[test]
    fn x_reduces_for_identical_gaps() {
        for l in [0.05, 0.3, 1.0, 2.5] {
            let omega = 0.7;
            let x = correlation_x(&params(omega, omega, l)).unwrap();
            let erfi = specfun::erfi_complex(Complex::new(l / 2.0, 0.0)).unwrap();
            let expected = (Complex::i() * erfi - 1.0)
                * (0.01 / (4.0 * SQRT_PI * l) * (-omega * omega - l * l / 4.0_f64).exp());
            assert!((x - expected).norm() <= 1e-13 * expected.norm(), "l={l}");
        }
    }

    #[test]
    fn x_diverges_like_inverse_separation() {
        let at = |l| correlation_x(&params(0.5, 1.0, l)).unwrap().norm();
        assert!(at(1e-3) > at(1e-2));
        assert!(at(1e-2) > at(1e-1));
        let ratio = at(1e-3) * 1e-3 / (at(1e-5) * 1e-5);
        assert!((ratio - 1.0).abs() < 1e-4);
    }

    #[test]
    fn c_is_real() {
        for (a, b, l) in [(0.5, 0.6, 0.5), (1.2, 1.8, 0.01), (0.3, 2.0, 4.0)] {
            assert!(correlation_c(&params(a, b, l)).unwrap().im.abs() <= 1e-15);
        }
    }

    #[test]
    fn c_matches_faddeeva_route() {
        // C = lambda^2/(4 sqrt(pi) L) exp(-(D^2 + S^2)/4) Im w((L + iS)/2)
        for (a, b, l) in [(0.5, 0.6, 0.5), (1.2, 1.8, 0.01), (0.3, 2.0, 4.0), (0.5, 1.0, 1e-3)] {
            let p = params(a, b, l);
            let (s, d) = (p.gap_sum(), p.gap_difference());
            let w = specfun::faddeeva(Complex::new(l / 2.0, s / 2.0)).unwrap();
            let expected = 0.01 / (4.0 * SQRT_PI * l) * (-(d * d + s * s) / 4.0).exp() * w.im;
            let c = correlation_c(&p).unwrap().re;
            assert!((c - expected).abs() <= 1e-9 * expected.abs(), "{a} {b} {l}: {c} vs {expected}");
        }
    }

    #[test]
    fn c_at_vanishing_separation_equals_transition_probability_for_identical_gaps() {
        for omega in [0.3, 0.5, 1.2] {
            let c = correlation_c(&params(omega, omega, 1e-6)).unwrap().re;
            let p = transition_probability(omega, 0.1).unwrap();
            assert!((c - p).abs() <= 1e-10 * p);
        }
    }

    #[test]
    fn small_separation_seam_is_continuous() {
        let below = SMALL_SEPARATION * (1.0 - 1e-12);
        for (a, b) in [(0.5, 0.5), (0.5, 1.0), (1.2, 1.8), (0.5, 3.0), (1.0, 2.0)] {
            let lo = params(a, b, below);
            let hi = params(a, b, SMALL_SEPARATION);
            let (c_lo, c_hi) = (correlation_c(&lo).unwrap(), correlation_c(&hi).unwrap());
            assert!((c_lo - c_hi).norm() <= 1e-8 * c_hi.norm(), "C {a} {b}");
            let (x_lo, x_hi) = (correlation_x(&lo).unwrap(), correlation_x(&hi).unwrap());
            assert!((x_lo - x_hi).norm() <= 1e-8 * x_hi.norm(), "X {a} {b}");
        }
    }

    #[test]
    fn amplitudes_scale_with_coupling_squared() {
        let p1 = DetectorPairParams::new(0.1, 0.5, 1.0, 0.7).unwrap();
        let p2 = DetectorPairParams { coupling: 0.2, ..p1 };
        let s1 = PerturbativeState::compute(&p1).unwrap();
        let s2 = PerturbativeState::compute(&p2).unwrap();
        assert_eq!(s2.p_a, 4.0 * s1.p_a);
        assert_eq!(s2.p_b, 4.0 * s1.p_b);
        assert_eq!(s2.corr_x.norm(), 4.0 * s1.corr_x.norm());
        assert_eq!(s2.corr_c.norm(), 4.0 * s1.corr_c.norm());
    }

    #[test]
    fn state_assembly() {
        let p = params(0.5, 1.0, 0.1);
        let (amps, rho) = perturbative_state(&p).unwrap();
        assert!((rho.trace() - 1.0).abs() <= 2.0 * f64::EPSILON);
        assert_eq!(rho.rho44, 0.0);
        assert_eq!(rho.rho22, amps.p_b);
        assert_eq!(rho.rho33, amps.p_a);
        let max = 0.01 / (4.0 * PI);
        assert!(amps.p_a > 0.0 && amps.p_a <= max && amps.p_b > 0.0 && amps.p_b <= max);

        let generic = xstate::steering(&rho).unwrap();
        let closed = steering_closed_form(&p).unwrap();
        assert!((generic.s_a_to_b - closed.s_a_to_b).abs() <= 1e-12);
        assert!((generic.s_b_to_a - closed.s_b_to_a).abs() <= 1e-12);
    }

    #[test]
    fn decoupled_detectors_stay_in_the_ground_state() {
        let p = DetectorPairParams::new(0.0, 0.5, 1.0, 0.1).unwrap();
        let (_, rho) = perturbative_state(&p).unwrap();
        assert_eq!(rho.diagonal(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rho.rho14.norm(), 0.0);
        assert_eq!(rho.rho23.norm(), 0.0);
        assert_eq!(concurrence_harvested(&p).unwrap(), 0.0);
    }

    #[test]
    fn identical_detectors_have_no_asymmetry() {
        for l in [0.003, 0.05, 0.1, 0.5] {
            let s = steering_closed_form(&params(0.8, 0.8, l)).unwrap();
            assert_eq!(s.asymmetry, 0.0);
        }
    }

    #[test]
    fn concurrence_vanishes_at_large_separation() {
        assert_eq!(concurrence_harvested(&params(0.5, 1.0, 10.0)).unwrap(), 0.0);
    }
}
