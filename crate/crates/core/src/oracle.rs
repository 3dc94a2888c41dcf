//! Brute-force evaluation of the O(lambda^2) amplitudes straight from the
//! regularised Wightman function.
//!
//! For each regulator `eps` the double time integral is reduced to a single
//! integral over `u = tau - tau'` (the Gaussian in `v = tau + tau'` is done
//! analytically) and integrated with composite Gauss-Legendre panels that are
//! graded geometrically towards the near-singular points `u = 0` and
//! `u = +-L`. The sequence of estimates is then extrapolated to `eps -> 0` by
//! Neville's scheme. [`double_integral_at`] evaluates the unreduced double
//! integral for a single `eps` so the reduction itself can be checked.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harvest::{self, DetectorPairParams};
use crate::specfun::Complex;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Relative agreement required between oracle and closed form.
pub const AGREEMENT_TOLERANCE: f64 = 1e-3;

/// Panel width away from the singular points, in units of sigma.
const COARSE_PANEL: f64 = 1.0;

/// Graded panels start at `eps * GRADING_START` from a singular point and
/// double in width until they reach `COARSE_PANEL`.
const GRADING_START: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Regulator values `eps / sigma`, strictly descending.
    pub epsilons: Vec<f64>,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Switching truncation `|tau| <= half_width`, in units of sigma.
    pub half_width: f64,
    pub extrapolation_order: usize,
    /// Requested relative accuracy; an extrapolation residual above ten
    /// times this is reported as non-convergence.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            epsilons: vec![4e-2, 2e-2, 1e-2],
            nodes: 64,
            half_width: 8.0,
            extrapolation_order: 2,
            tolerance: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if self.epsilons.is_empty() {
            return invalid("at least one regulator value is required".into());
        }
        if self.epsilons.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return invalid(format!("regulators must be positive: {:?}", self.epsilons));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return invalid(format!(
                "regulators must be strictly descending: {:?}",
                self.epsilons
            ));
        }
        if self.nodes < 64 {
            return invalid(format!("nodes = {} is below 64", self.nodes));
        }
        if !self.half_width.is_finite() || self.half_width < 6.0 {
            return invalid(format!("half_width = {} is below 6", self.half_width));
        }
        if self.extrapolation_order < 1 || self.extrapolation_order >= self.epsilons.len() {
            return invalid(format!(
                "extrapolation order {} needs {} regulator values, have {}",
                self.extrapolation_order,
                self.extrapolation_order + 1,
                self.epsilons.len()
            ));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return invalid(format!("tolerance = {} must be positive", self.tolerance));
        }
        Ok(())
    }

    fn rule(&self) -> Vec<(f64, f64)> {
        let degree = NonZeroUsize::new(self.nodes).expect("validated node count");
        GaussLegendre::new(degree).as_node_weight_pairs().to_vec()
    }
}

/// Gaussian switching `chi(tau) = exp(-tau^2 / 2)` in sigma units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussianSwitching;

impl GaussianSwitching {
    pub fn eval(&self, tau: f64) -> f64 {
        (-0.5 * tau * tau).exp()
    }
}

/// `-1 / (4 pi^2 ((dt - i eps)^2 - dx^2))`.
pub fn wightman(dt: f64, dx: f64, eps: f64) -> Result<Complex> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain {
            op: "wightman",
            reason: format!("regulator {eps} must be positive"),
        });
    }
    if !dt.is_finite() || !dx.is_finite() {
        return Err(Error::Domain {
            op: "wightman",
            reason: "arguments must be finite".into(),
        });
    }
    Ok(kernel(dt, dx, eps))
}

fn kernel(dt: f64, dx: f64, eps: f64) -> Complex {
    let shifted = Complex::new(dt, -eps);
    -1.0 / (4.0 * PI * PI) / (shifted * shifted - dx * dx)
}

/// Breakpoints on `[a, b]`: a coarse uniform grid plus geometric grading
/// towards each singular point.
fn breakpoints(a: f64, b: f64, singular: &[f64], eps: f64) -> Vec<f64> {
    let mut points = vec![a, b];
    let coarse = ((b - a) / COARSE_PANEL).ceil() as usize;
    for j in 1..coarse {
        points.push(a + (b - a) * j as f64 / coarse as f64);
    }
    for &s in singular {
        if s < a || s > b {
            continue;
        }
        points.push(s);
        let mut d = eps * GRADING_START;
        while d < COARSE_PANEL {
            for x in [s - d, s + d] {
                if x > a && x < b {
                    points.push(x);
                }
            }
            d *= 2.0;
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * x.abs().max(1.0));
    points
}

fn integrate<F>(rule: &[(f64, f64)], breaks: &[f64], f: F) -> Complex
where
    F: Fn(f64) -> Complex,
{
    let mut total = Complex::new(0.0, 0.0);
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut panel = Complex::new(0.0, 0.0);
        for &(x, w) in rule {
            panel += f(mid + half * x) * w;
        }
        total += panel * half;
    }
    total
}

/// The three amplitudes the oracle knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// Single-detector excitation probability at the given gap.
    Transition { omega: f64 },
    C,
    X,
    /// `X` with the Heaviside factors dropped and the kernel symmetrised.
    XSymmetrized,
}

impl Amplitude {
    fn label(&self) -> &'static str {
        match self {
            Amplitude::Transition { .. } => "transition_probability",
            Amplitude::C => "corr_c",
            Amplitude::X => "corr_x",
            Amplitude::XSymmetrized => "corr_x_symmetrized",
        }
    }
}

/// Reduced single integral at one regulator value.
fn reduced_at(
    amplitude: Amplitude,
    p: &DetectorPairParams,
    rule: &[(f64, f64)],
    half_width: f64,
    eps: f64,
) -> Complex {
    let lambda2 = p.coupling * p.coupling;
    let (sum, diff, l) = (p.gap_sum(), p.gap_difference(), p.separation);
    let span = 2.0 * half_width;
    match amplitude {
        Amplitude::Transition { omega } => {
            let breaks = breakpoints(-span, span, &[0.0], eps);
            let value = integrate(rule, &breaks, |u| {
                Complex::from_polar((-0.25 * u * u).exp(), -omega * u) * kernel(u, 0.0, eps)
            });
            value * (lambda2 * SQRT_PI)
        }
        Amplitude::C => {
            let breaks = breakpoints(-span, span, &[-l, l], eps);
            let value = integrate(rule, &breaks, |u| {
                Complex::from_polar((-0.25 * u * u).exp(), -0.5 * sum * u) * kernel(u, l, eps)
            });
            value * (lambda2 * SQRT_PI * (-0.25 * diff * diff).exp())
        }
        Amplitude::X => {
            // tau' > tau carries W(u, L), tau > tau' carries W(-u, L); folding
            // u -> -u onto u > 0 pairs the two phases into a cosine.
            let breaks = breakpoints(0.0, span, &[l], eps);
            let value = integrate(rule, &breaks, |u| {
                kernel(-u, l, eps) * (2.0 * (-0.25 * u * u).exp() * (0.5 * diff * u).cos())
            });
            -value * (lambda2 * SQRT_PI * (-0.25 * sum * sum).exp())
        }
        Amplitude::XSymmetrized => {
            let breaks = breakpoints(-span, span, &[-l, l], eps);
            let value = integrate(rule, &breaks, |u| {
                let symmetric = 0.5 * (kernel(u, l, eps) + kernel(-u, l, eps));
                Complex::from_polar((-0.25 * u * u).exp(), 0.5 * diff * u) * symmetric
            });
            -value * (lambda2 * SQRT_PI * (-0.25 * sum * sum).exp())
        }
    }
}

/// Unreduced double integral over `[-h, h]^2` at one regulator value.
///
/// Much slower than the reduced form; meant only for spot checks.
pub fn double_integral_at(
    amplitude: Amplitude,
    p: &DetectorPairParams,
    spec: &QuadratureSpec,
    eps: f64,
) -> Result<Complex> {
    spec.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Domain {
            op: "double_integral_at",
            reason: format!("regulator {eps} must be positive"),
        });
    }
    let rule = spec.rule();
    let h = spec.half_width;
    let chi = GaussianSwitching;
    let (wa, wb, l) = (p.omega_a, p.omega_b, p.separation);
    let outer = breakpoints(-h, h, &[], eps);
    let outer_nodes: Vec<(f64, f64)> = outer
        .windows(2)
        .flat_map(|pair| {
            let (lo, hi) = (pair[0], pair[1]);
            let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
            rule.iter().map(move |&(x, w)| (mid + half * x, w * half))
        })
        .collect();

    let inner = |tau: f64| -> Complex {
        let singular: Vec<f64> = match amplitude {
            Amplitude::Transition { .. } => vec![tau],
            _ => vec![tau - l, tau, tau + l],
        };
        let breaks = breakpoints(-h, h, &singular, eps);
        integrate(&rule, &breaks, |tp| {
            let weight = chi.eval(tau) * chi.eval(tp);
            match amplitude {
                Amplitude::Transition { omega } => {
                    Complex::from_polar(weight, -omega * (tau - tp)) * kernel(tau - tp, 0.0, eps)
                }
                Amplitude::C => {
                    Complex::from_polar(weight, -(wa * tau - wb * tp)) * kernel(tau - tp, l, eps)
                }
                Amplitude::X => {
                    let w = if tp > tau {
                        kernel(tau - tp, l, eps)
                    } else {
                        kernel(tp - tau, l, eps)
                    };
                    -Complex::from_polar(weight, -(wa * tau + wb * tp)) * w
                }
                Amplitude::XSymmetrized => {
                    let w = 0.5 * (kernel(tau - tp, l, eps) + kernel(tp - tau, l, eps));
                    -Complex::from_polar(weight, -(wa * tau + wb * tp)) * w
                }
            }
        })
    };
    let total = outer_nodes
        .par_iter()
        .map(|&(tau, w)| inner(tau) * w)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Complex::new(0.0, 0.0), |acc, z| acc + z);
    Ok(total * (p.coupling * p.coupling))
}

/// Reduced single integral at one regulator value.
pub fn reduced_integral_at(
    amplitude: Amplitude,
    p: &DetectorPairParams,
    spec: &QuadratureSpec,
    eps: f64,
) -> Result<Complex> {
    spec.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Domain {
            op: "reduced_integral_at",
            reason: format!("regulator {eps} must be positive"),
        });
    }
    Ok(reduced_at(amplitude, p, &spec.rule(), spec.half_width, eps))
}

/// Extrapolated value together with the raw estimates it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub value: Complex,
    /// Relative gap between the two highest extrapolation levels.
    pub residual: f64,
    pub estimates: Vec<Complex>,
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`; returns the top entry
/// and the one below it built from the points nearest zero.
fn neville(xs: &[f64], ys: &[Complex]) -> (Complex, Complex) {
    let n = xs.len();
    let mut table = ys.to_vec();
    let mut below = ys[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            table[i] = (table[i + 1] * xi - table[i] * xj) / (xi - xj);
        }
        if level == n - 2 {
            below = table[1];
        }
    }
    (table[0], below)
}

pub fn estimate(
    amplitude: Amplitude,
    p: &DetectorPairParams,
    spec: &QuadratureSpec,
) -> Result<OracleEstimate> {
    spec.validate()?;
    let rule = spec.rule();
    let estimates: Vec<Complex> = spec
        .epsilons
        .par_iter()
        .map(|&eps| reduced_at(amplitude, p, &rule, spec.half_width, eps))
        .collect();
    let used = spec.extrapolation_order + 1;
    let start = spec.epsilons.len() - used;
    let (value, below) = neville(&spec.epsilons[start..], &estimates[start..]);
    let scale = value.norm().max(f64::MIN_POSITIVE);
    let residual = (value - below).norm() / scale;
    let limit = 10.0 * spec.tolerance;
    if !residual.is_finite() || residual > limit {
        return Err(Error::NonConvergence {
            quantity: amplitude.label(),
            residual,
            limit,
            estimates: estimates.iter().map(|z| z.norm()).collect(),
        });
    }
    Ok(OracleEstimate {
        value,
        residual,
        estimates,
    })
}

pub fn quad_transition_probability(omega: f64, coupling: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::Domain {
            op: "quad_transition_probability",
            reason: format!("gap {omega} must be finite"),
        });
    }
    // The separation is irrelevant for a single detector.
    let p = DetectorPairParams {
        coupling,
        omega_a: omega,
        omega_b: omega,
        separation: 1.0,
    };
    Ok(estimate(Amplitude::Transition { omega }, &p, spec)?.value.re)
}

pub fn quad_correlation_c(p: &DetectorPairParams, spec: &QuadratureSpec) -> Result<Complex> {
    Ok(estimate(Amplitude::C, p, spec)?.value)
}

pub fn quad_correlation_x(p: &DetectorPairParams, spec: &QuadratureSpec) -> Result<Complex> {
    Ok(estimate(Amplitude::X, p, spec)?.value)
}

pub fn quad_correlation_x_symmetrized(
    p: &DetectorPairParams,
    spec: &QuadratureSpec,
) -> Result<Complex> {
    Ok(estimate(Amplitude::XSymmetrized, p, spec)?.value)
}

/// The closed form an oracle value is compared against.
///
/// The time-ordered integral comes out as `i` times the closed-form `X`;
/// the factor is a global phase and drops out of every measure.
pub fn closed_form_reference(amplitude: Amplitude, p: &DetectorPairParams) -> Result<Complex> {
    match amplitude {
        Amplitude::Transition { omega } => Ok(Complex::new(
            harvest::transition_probability(omega, p.coupling)?,
            0.0,
        )),
        Amplitude::C => harvest::correlation_c(p),
        Amplitude::X => Ok(Complex::i() * harvest::correlation_x(p)?),
        Amplitude::XSymmetrized => Err(Error::Domain {
            op: "closed_form_reference",
            reason: "the symmetrised kernel has no closed form".into(),
        }),
    }
}

/// `{omega_a} x {omega_b - omega_a in (0, omega_a / 2)} x {L in (0.5, 1, 2)}`.
pub fn default_panel() -> Vec<DetectorPairParams> {
    let mut panel = Vec::with_capacity(12);
    for omega_a in [0.5, 1.2] {
        for ratio in [0.0, 0.5] {
            for separation in [0.5, 1.0, 2.0] {
                panel.push(DetectorPairParams {
                    coupling: 0.1,
                    omega_a,
                    omega_b: omega_a * (1.0 + ratio),
                    separation,
                });
            }
        }
    }
    panel
}

pub fn panel(name: &str) -> Result<Vec<DetectorPairParams>> {
    match name {
        "default" => Ok(default_panel()),
        other => Err(Error::InvalidSpec(format!(
            "unknown panel {other:?}; available: default"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub point: usize,
    pub quantity: &'static str,
    pub omega_a: f64,
    pub omega_b: f64,
    pub separation: f64,
    pub coupling: f64,
    pub reference_re: f64,
    pub reference_im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub rel_error: f64,
    pub residual: f64,
    pub pass: bool,
    /// Error kind when the row could not be evaluated.
    pub error: Option<&'static str>,
    pub error_message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub passed: bool,
    pub rows: Vec<VerificationRow>,
}

fn verify_one(
    point: usize,
    quantity: &'static str,
    amplitude: Amplitude,
    p: &DetectorPairParams,
    spec: &QuadratureSpec,
) -> VerificationRow {
    let mut row = VerificationRow {
        point,
        quantity,
        omega_a: p.omega_a,
        omega_b: p.omega_b,
        separation: p.separation,
        coupling: p.coupling,
        reference_re: f64::NAN,
        reference_im: f64::NAN,
        oracle_re: f64::NAN,
        oracle_im: f64::NAN,
        rel_error: f64::NAN,
        residual: f64::NAN,
        pass: false,
        error: None,
        error_message: None,
    };
    let outcome = closed_form_reference(amplitude, p).and_then(|reference| {
        row.reference_re = reference.re;
        row.reference_im = reference.im;
        estimate(amplitude, p, spec).map(|est| (reference, est))
    });
    match outcome {
        Ok((reference, est)) => {
            row.oracle_re = est.value.re;
            row.oracle_im = est.value.im;
            row.residual = est.residual;
            row.rel_error = (est.value - reference).norm() / reference.norm();
            row.pass = row.rel_error <= AGREEMENT_TOLERANCE;
        }
        Err(e) => {
            row.error = Some(e.kind());
            row.error_message = Some(e.to_string());
        }
    }
    row
}

/// Compares every amplitude at every panel point with its closed form.
pub fn verify(points: &[DetectorPairParams], spec: &QuadratureSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let jobs: Vec<(usize, &'static str, Amplitude, DetectorPairParams)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            [
                (i, "p_a", Amplitude::Transition { omega: p.omega_a }, *p),
                (i, "p_b", Amplitude::Transition { omega: p.omega_b }, *p),
                (i, "corr_c", Amplitude::C, *p),
                (i, "corr_x", Amplitude::X, *p),
            ]
        })
        .collect();
    let rows: Vec<VerificationRow> = jobs
        .par_iter()
        .map(|(i, q, a, p)| verify_one(*i, q, *a, p, spec))
        .collect();
    let passed = rows.iter().all(|r| r.pass);
    Ok(VerificationReport {
        tolerance: AGREEMENT_TOLERANCE,
        passed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wightman_examples() {
        let w = wightman(0.0, 1.0, 1e-6).unwrap();
        assert!((w.re - 1.0 / (4.0 * PI * PI)).abs() < 1e-12);
        assert!(w.im.abs() < 1e-12);
        let w = wightman(2.0, 0.0, 1e-4).unwrap();
        assert!((w.re + 1.0 / (16.0 * PI * PI)).abs() < 1e-9);
        for dt in [0.3, 1.0, 2.7] {
            let (plus, minus) = (wightman(dt, 0.8, 0.05).unwrap(), wightman(-dt, 0.8, 0.05).unwrap());
            assert!((plus.im + minus.im).abs() <= 1e-15 * plus.im.abs().max(1.0));
        }
        assert!(wightman(1.0, 1.0, 0.0).is_err());
        assert!(wightman(1.0, 1.0, -1e-3).is_err());
    }

    #[test]
    fn switching_profile() {
        let chi = GaussianSwitching;
        assert_eq!(chi.eval(0.0), 1.0);
        assert_eq!(chi.eval(1.3), chi.eval(-1.3));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = [
            QuadratureSpec { epsilons: vec![1e-2, 2e-2, 4e-2], ..Default::default() },
            QuadratureSpec { epsilons: vec![4e-2, 0.0], extrapolation_order: 1, ..Default::default() },
            QuadratureSpec { nodes: 32, ..Default::default() },
            QuadratureSpec { half_width: 5.0, ..Default::default() },
            QuadratureSpec { extrapolation_order: 3, ..Default::default() },
            QuadratureSpec { extrapolation_order: 0, ..Default::default() },
            QuadratureSpec { tolerance: 0.0, ..Default::default() },
        ];
        for spec in bad {
            assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn neville_is_exact_for_polynomials() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<Complex> = xs
            .iter()
            .map(|&x| Complex::new(3.0 - 2.0 * x + 5.0 * x * x, 1.0 + x))
            .collect();
        let (top, below) = neville(&xs, &ys);
        assert!((top - Complex::new(3.0, 1.0)).norm() < 1e-13);
        // Linear extrapolation through the last two points misses the curvature.
        let expected_below = Complex::new(3.0 - 5.0 * 0.2 * 0.1, 1.0);
        assert!((below - expected_below).norm() < 1e-13);
    }

    #[test]
    fn breakpoints_are_sorted_and_graded() {
        let b = breakpoints(-4.0, 4.0, &[-1.0, 1.0], 0.01);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(b[0], -4.0);
        assert_eq!(*b.last().unwrap(), 4.0);
        assert!(b.contains(&1.0) && b.contains(&-1.0));
        assert!(b.iter().any(|&x| (x - 1.0025).abs() < 1e-15));
    }

    #[test]
    fn non_convergence_is_reported_with_estimates() {
        let spec = QuadratureSpec { tolerance: 1e-14, ..Default::default() };
        let p = DetectorPairParams::new(0.1, 0.5, 1.0, 1.0).unwrap();
        match estimate(Amplitude::X, &p, &spec) {
            Err(Error::NonConvergence { estimates, limit, .. }) => {
                assert_eq!(estimates.len(), 3);
                assert_eq!(limit, 1e-13);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn unknown_panel_is_rejected() {
        assert_eq!(panel("default").unwrap().len(), 12);
        assert!(panel("tiny").is_err());
    }
}
