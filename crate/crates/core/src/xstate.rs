//! Two-qubit X states and the measures built on them: concurrence, the
//! steering-witness states, the J-terms, and directional steering.
//!
//! Basis ordering is `|00>, |01>, |10>, |11>` with Alice the first qubit.
//! Only `rho14` and `rho23` are stored; `rho41` and `rho32` are their
//! conjugates. Positivity is not required: the perturbative detector state
//! has `rho44 = 0` with `rho14 != 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::Complex;

/// Tolerance on the trace and on negative diagonal entries.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Radicands down to this value are treated as rounding noise and clamped.
pub const RADICAND_CLAMP: f64 = -1e-15;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho14: Complex,
    pub rho23: Complex,
}

impl XState {
    /// Builds and validates a state.
    pub fn new(
        diagonal: [f64; 4],
        rho14: Complex,
        rho23: Complex,
    ) -> Result<Self> {
        validate_xstate(XState {
            rho11: diagonal[0],
            rho22: diagonal[1],
            rho33: diagonal[2],
            rho44: diagonal[3],
            rho14,
            rho23,
        })
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [self.rho11, self.rho22, self.rho33, self.rho44]
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33 + self.rho44
    }

    /// Dense 4x4 matrix, row major.
    pub fn to_matrix(&self) -> [[Complex; 4]; 4] {
        let zero = Complex::new(0.0, 0.0);
        let d = |v: f64| Complex::new(v, 0.0);
        [
            [d(self.rho11), zero, zero, self.rho14],
            [zero, d(self.rho22), self.rho23, zero],
            [zero, self.rho23.conj(), d(self.rho33), zero],
            [self.rho14.conj(), zero, zero, d(self.rho44)],
        ]
    }
}

/// Which party's measurements do the steering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Alice steers Bob.
    AToB,
    /// Bob steers Alice.
    BToA,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::AToB => "a_to_b",
            Direction::BToA => "b_to_a",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JTerms {
    pub j_a: f64,
    pub j_b: f64,
    pub j_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    TwoWay,
    OneWayAtoB,
    OneWayBtoA,
    NoWay,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::TwoWay => "two_way",
            Regime::OneWayAtoB => "one_way_a_to_b",
            Regime::OneWayBtoA => "one_way_b_to_a",
            Regime::NoWay => "no_way",
        }
    }

    /// Strict positivity of each directional measure, no tolerance band.
    pub fn classify(s_a_to_b: f64, s_b_to_a: f64) -> Regime {
        match (s_a_to_b > 0.0, s_b_to_a > 0.0) {
            (true, true) => Regime::TwoWay,
            (true, false) => Regime::OneWayAtoB,
            (false, true) => Regime::OneWayBtoA,
            (false, false) => Regime::NoWay,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringResult {
    pub s_a_to_b: f64,
    pub s_b_to_a: f64,
    pub asymmetry: f64,
    pub regime: Regime,
}

impl SteeringResult {
    pub fn from_measures(s_a_to_b: f64, s_b_to_a: f64) -> Self {
        SteeringResult {
            s_a_to_b,
            s_b_to_a,
            asymmetry: (s_a_to_b - s_b_to_a).abs(),
            regime: Regime::classify(s_a_to_b, s_b_to_a),
        }
    }

    pub fn get(&self, direction: Direction) -> f64 {
        match direction {
            Direction::AToB => self.s_a_to_b,
            Direction::BToA => self.s_b_to_a,
        }
    }
}

/// Checks the trace and the diagonal. Nothing is renormalized.
pub fn validate_xstate(candidate: XState) -> Result<XState> {
    let diagonal = candidate.diagonal();
    for (i, &value) in diagonal.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::Domain {
                op: "validate_xstate",
                reason: format!("rho{0}{0} is not finite", i + 1),
            });
        }
        if value < -STATE_TOLERANCE {
            return Err(Error::NegativeDiagonal {
                index: i + 1,
                value,
                tolerance: STATE_TOLERANCE,
            });
        }
    }
    for (name, c) in [("rho14", candidate.rho14), ("rho23", candidate.rho23)] {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Domain {
                op: "validate_xstate",
                reason: format!("{name} is not finite"),
            });
        }
    }
    let trace = candidate.trace();
    if (trace - 1.0).abs() > STATE_TOLERANCE {
        return Err(Error::Trace {
            trace,
            tolerance: STATE_TOLERANCE,
        });
    }
    Ok(candidate)
}

/// `sqrt` with values in `[RADICAND_CLAMP, 0)` treated as zero.
pub(crate) fn clamped_sqrt(value: f64, context: &'static str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value.sqrt())
    } else if value >= RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { context, value })
    }
}

/// Largest of `0` and the branch values; the order of branches is irrelevant.
pub(crate) fn max_with_zero(branches: &[f64]) -> f64 {
    branches.iter().copied().fold(0.0, f64::max)
}

/// `2 max{0, |rho14| - sqrt(rho22 rho33), |rho23| - sqrt(rho11 rho44)}`.
pub fn concurrence(rho: &XState) -> Result<f64> {
    let outer = clamped_sqrt(rho.rho22 * rho.rho33, "concurrence (rho22 rho33)")?;
    let inner = clamped_sqrt(rho.rho11 * rho.rho44, "concurrence (rho11 rho44)")?;
    Ok(2.0 * max_with_zero(&[rho.rho14.norm() - outer, rho.rho23.norm() - inner]))
}

/// Witness state whose entanglement certifies steering in `direction`.
///
/// `BToA` mixes in `rho_A (x) I/2`, `AToB` mixes in `I/2 (x) rho_B`, both with
/// weight `(3 - sqrt 3)/3` against `rho/sqrt 3`.
pub fn witness_state(rho: &XState, direction: Direction) -> Result<XState> {
    let rho = validate_xstate(*rho)?;
    let w = 1.0 / SQRT_3;
    let mix = (3.0 - SQRT_3) / 6.0;
    // Reduced-state weights for the four diagonal slots.
    let shifts = match direction {
        Direction::BToA => {
            let f = mix * (rho.rho11 + rho.rho22);
            let h = mix * (rho.rho33 + rho.rho44);
            [f, f, h, h]
        }
        Direction::AToB => {
            let f = mix * (rho.rho11 + rho.rho33);
            let h = mix * (rho.rho22 + rho.rho44);
            [f, h, f, h]
        }
    };
    validate_xstate(XState {
        rho11: w * rho.rho11 + shifts[0],
        rho22: w * rho.rho22 + shifts[1],
        rho33: w * rho.rho33 + shifts[2],
        rho44: w * rho.rho44 + shifts[3],
        rho14: rho.rho14 * w,
        rho23: rho.rho23 * w,
    })
}

pub fn j_terms(rho: &XState) -> JTerms {
    let (r11, r22, r33, r44) = (rho.rho11, rho.rho22, rho.rho33, rho.rho44);
    let low = (2.0 - SQRT_3) / 2.0;
    let high = (2.0 + SQRT_3) / 2.0;
    let cross = 0.25 * (r11 + r44) * (r22 + r33);
    JTerms {
        j_a: low * r11 * r44 + high * r22 * r33 + cross,
        j_b: 0.25 * (r11 - r44) * (r22 - r33),
        j_c: high * r11 * r44 + low * r22 * r33 + cross,
    }
}

/// Signed branch maximum before clamping at zero, for one direction.
pub fn steering_inner(rho: &XState, direction: Direction) -> Result<f64> {
    let j = j_terms(rho);
    let sign = match direction {
        Direction::BToA => -1.0,
        Direction::AToB => 1.0,
    };
    let r14 = clamped_sqrt(j.j_a + sign * j.j_b, "steering (J_a -+ J_b)")?;
    let r23 = clamped_sqrt(j.j_c + sign * j.j_b, "steering (J_c -+ J_b)")?;
    Ok((rho.rho14.norm() - r14).max(rho.rho23.norm() - r23))
}

pub fn steering(rho: &XState) -> Result<SteeringResult> {
    let a_to_b = steering_inner(rho, Direction::AToB)?.max(0.0);
    let b_to_a = steering_inner(rho, Direction::BToA)?.max(0.0);
    Ok(SteeringResult::from_measures(a_to_b, b_to_a))
}
