//! Parameter sweeps, sudden-death boundaries and the asymmetry peak.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harvest::{DetectorPairParams, PerturbativeState};
use crate::xstate::{Direction, Regime, SteeringResult};

/// Death points are bisected until the bracket is below this times
/// `max(1, |x|)`.
pub const DEATH_TOLERANCE: f64 = 1e-9;

/// Golden-section refinement stops below this bracket width.
pub const PEAK_TOLERANCE: f64 = 1e-8;

/// Coarse grid size for the peak search.
pub const PEAK_GRID: usize = 401;

/// Peaks lower than this are treated as a flat landscape.
pub const PEAK_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Separation,
    OmegaA,
    OmegaB,
    /// `(omega_b - omega_a) / omega_a`.
    GapRatio,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Separation => "separation",
            Axis::OmegaA => "omega_a",
            Axis::OmegaB => "omega_b",
            Axis::GapRatio => "gap_ratio",
        }
    }

    /// Returns `params` with this axis set to `value`, revalidated.
    ///
    /// Setting `omega_a` leaves `omega_b` where it is; use `GapRatio` as a
    /// second axis to keep the ratio fixed instead.
    pub fn apply(self, params: &DetectorPairParams, value: f64) -> Result<DetectorPairParams> {
        let mut p = *params;
        match self {
            Axis::Separation => p.separation = value,
            Axis::OmegaA => p.omega_a = value,
            Axis::OmegaB => p.omega_b = value,
            Axis::GapRatio => {
                if !value.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "gap_ratio",
                        value,
                        reason: "must be finite",
                    });
                }
                p.omega_b = p.omega_a * (1.0 + value);
            }
        }
        DetectorPairParams::new(p.coupling, p.omega_a, p.omega_b, p.separation)
    }

    pub fn value(self, params: &DetectorPairParams) -> f64 {
        match self {
            Axis::Separation => params.separation,
            Axis::OmegaA => params.omega_a,
            Axis::OmegaB => params.omega_b,
            Axis::GapRatio => params.gap_ratio(),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separation" | "sep" => Ok(Axis::Separation),
            "omega_a" | "omega-a" => Ok(Axis::OmegaA),
            "omega_b" | "omega-b" => Ok(Axis::OmegaB),
            "gap_ratio" | "gap-ratio" => Ok(Axis::GapRatio),
            other => Err(Error::InvalidSpec(format!(
                "unknown axis {other:?}; expected separation, omega_a, omega_b or gap_ratio"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(axis: Axis, min: f64, max: f64, count: usize) -> Result<Self> {
        let spec = AxisSpec {
            axis,
            min,
            max,
            count,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `min == max` is allowed and yields `count` identical points.
    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "{} range must be finite",
                self.axis
            )));
        }
        if self.min > self.max {
            return Err(Error::InvalidSpec(format!(
                "{} range is reversed: min {} > max {}",
                self.axis, self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidSpec(format!(
                "{} needs at least 2 points, got {}",
                self.axis, self.count
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    SAToB,
    SBToA,
    Asymmetry,
    Concurrence,
    PA,
    PB,
    AbsX,
    AbsC,
    Regime,
}

impl Output {
    pub const ALL: [Output; 9] = [
        Output::PA,
        Output::PB,
        Output::AbsX,
        Output::AbsC,
        Output::SAToB,
        Output::SBToA,
        Output::Asymmetry,
        Output::Concurrence,
        Output::Regime,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Output::SAToB => "s_a_to_b",
            Output::SBToA => "s_b_to_a",
            Output::Asymmetry => "asymmetry",
            Output::Concurrence => "concurrence",
            Output::PA => "p_a",
            Output::PB => "p_b",
            Output::AbsX => "abs_x",
            Output::AbsC => "abs_c",
            Output::Regime => "regime",
        }
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown output column {s:?}")))
    }
}

/// Every quantity a sweep can report at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub p_a: f64,
    pub p_b: f64,
    pub abs_x: f64,
    pub abs_c: f64,
    pub steering: SteeringResult,
    pub concurrence: f64,
}

/// A single cell: numeric, or a regime label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    Label(&'static str),
}

impl PointValues {
    pub fn get(&self, output: Output) -> Cell {
        match output {
            Output::SAToB => Cell::Number(self.steering.s_a_to_b),
            Output::SBToA => Cell::Number(self.steering.s_b_to_a),
            Output::Asymmetry => Cell::Number(self.steering.asymmetry),
            Output::Concurrence => Cell::Number(self.concurrence),
            Output::PA => Cell::Number(self.p_a),
            Output::PB => Cell::Number(self.p_b),
            Output::AbsX => Cell::Number(self.abs_x),
            Output::AbsC => Cell::Number(self.abs_c),
            Output::Regime => Cell::Label(self.steering.regime.label()),
        }
    }
}

pub fn evaluate(p: &DetectorPairParams) -> Result<PointValues> {
    let state = PerturbativeState::compute(p)?;
    Ok(PointValues {
        p_a: state.p_a,
        p_b: state.p_b,
        abs_x: state.corr_x.norm(),
        abs_c: state.corr_c.norm(),
        steering: state.steering()?,
        concurrence: state.concurrence(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    pub fixed: DetectorPairParams,
    pub outputs: Vec<Output>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(axis2) = &self.axis2 {
            axis2.validate()?;
            if axis2.axis == self.axis1.axis {
                return Err(Error::InvalidSpec(format!(
                    "both sweep axes are {}",
                    axis2.axis
                )));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidSpec("no output columns requested".into()));
        }
        Ok(())
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut header = vec![self.axis1.axis.label()];
        if let Some(axis2) = &self.axis2 {
            header.push(axis2.axis.label());
        }
        header.extend(self.outputs.iter().map(|o| o.label()));
        header
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Axis values, axis1 first.
    pub coords: Vec<f64>,
    pub values: Result<PointValues>,
}

/// Axis1-major grid, evaluated in parallel, rows in deterministic order.
/// Per-point failures stay in their row.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let first = spec.axis1.values();
    let coords: Vec<Vec<f64>> = match &spec.axis2 {
        None => first.into_iter().map(|x| vec![x]).collect(),
        Some(axis2) => {
            let second = axis2.values();
            first
                .iter()
                .flat_map(|&x| second.iter().map(move |&y| vec![x, y]))
                .collect()
        }
    };
    let axes: Vec<Axis> = std::iter::once(spec.axis1.axis)
        .chain(spec.axis2.map(|a| a.axis))
        .collect();
    Ok(coords
        .into_par_iter()
        .map(|coords| {
            let values = axes
                .iter()
                .zip(&coords)
                .try_fold(spec.fixed, |p, (axis, &x)| axis.apply(&p, x))
                .and_then(|p| evaluate(&p));
            SweepRow { coords, values }
        })
        .collect())
}

pub fn classify(result: &SteeringResult) -> Regime {
    Regime::classify(result.s_a_to_b, result.s_b_to_a)
}

/// Quantity whose sudden death is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Steering(Direction),
    Concurrence,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::Steering(d) => d.label(),
            Measure::Concurrence => "concurrence",
        }
    }

    /// The signed expression inside `max(0, .)`.
    pub fn signed_inner(self, p: &DetectorPairParams) -> Result<f64> {
        let state = PerturbativeState::compute(p)?;
        match self {
            Measure::Steering(d) => state.steering_inner(d),
            Measure::Concurrence => Ok(state.concurrence_inner()),
        }
    }

    /// The clamped measure itself.
    pub fn value(self, p: &DetectorPairParams) -> Result<f64> {
        let state = PerturbativeState::compute(p)?;
        match self {
            Measure::Steering(d) => Ok(state.steering()?.get(d)),
            Measure::Concurrence => Ok(state.concurrence()),
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a_to_b" | "AtoB" | "a-to-b" => Ok(Measure::Steering(Direction::AToB)),
            "b_to_a" | "BtoA" | "b-to-a" => Ok(Measure::Steering(Direction::BToA)),
            "concurrence" => Ok(Measure::Concurrence),
            other => Err(Error::InvalidSpec(format!(
                "unknown measure {other:?}; expected a_to_b, b_to_a or concurrence"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeathPoint {
    pub measure: Measure,
    pub axis: Axis,
    pub location: f64,
    pub bracket_width: f64,
    /// Whether the measure is positive just below `location` (and zero just
    /// above), rather than the other way round.
    pub alive_below: bool,
    /// The post-hoc check at `location +- 10 * bracket_width` held.
    pub verified: bool,
}

/// Bisects the signed pre-clamp expression of `measure` along `axis`.
pub fn find_death_point(
    measure: Measure,
    fixed: &DetectorPairParams,
    axis: Axis,
    bracket: [f64; 2],
) -> Result<DeathPoint> {
    let [mut lo, mut hi] = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidSpec(format!(
            "death-point bracket [{lo}, {hi}] must be finite and increasing"
        )));
    }
    let g = |x: f64| axis.apply(fixed, x).and_then(|p| measure.signed_inner(&p));
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo == 0.0 || g_hi == 0.0 || (g_lo > 0.0) == (g_hi > 0.0) {
        return Err(Error::NoSignChange {
            lo,
            hi,
            g_lo,
            g_hi,
        });
    }
    let alive_below = g_lo > 0.0;
    while hi - lo > DEATH_TOLERANCE * lo.abs().max(hi.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if (g_mid > 0.0) == alive_below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let location = 0.5 * (lo + hi);
    let bracket_width = hi - lo;
    let m = |x: f64| axis.apply(fixed, x).and_then(|p| measure.value(&p));
    let (below, above) = (
        m(location - 10.0 * bracket_width)?,
        m(location + 10.0 * bracket_width)?,
    );
    let verified = if alive_below {
        below > 0.0 && above == 0.0
    } else {
        below == 0.0 && above > 0.0
    };
    Ok(DeathPoint {
        measure,
        axis,
        location,
        bracket_width,
        alive_below,
        verified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryPeak {
    pub axis: Axis,
    pub location: f64,
    pub value: f64,
    /// Width of the final bracket around `location`.
    pub tolerance: f64,
}

/// Grid search over `range`, then golden-section refinement of the best cell.
pub fn find_asymmetry_peak(
    fixed: &DetectorPairParams,
    axis: Axis,
    range: [f64; 2],
) -> Result<AsymmetryPeak> {
    let [lo, hi] = range;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidSpec(format!(
            "peak range [{lo}, {hi}] must be finite and non-decreasing"
        )));
    }
    let f = |x: f64| -> Result<f64> { Ok(evaluate(&axis.apply(fixed, x)?)?.steering.asymmetry) };
    let checked = |location: f64, value: f64, tolerance: f64| {
        if value < PEAK_FLOOR {
            Err(Error::NoPeak { peak: value })
        } else {
            Ok(AsymmetryPeak {
                axis,
                location,
                value,
                tolerance,
            })
        }
    };

    if hi - lo <= PEAK_TOLERANCE {
        let (f_lo, f_hi) = (f(lo)?, f(hi)?);
        let (location, value) = if f_hi > f_lo { (hi, f_hi) } else { (lo, f_lo) };
        return checked(location, value, hi - lo);
    }

    let grid = AxisSpec {
        axis,
        min: lo,
        max: hi,
        count: PEAK_GRID,
    }
    .values();
    let values = grid
        .par_iter()
        .map(|&x| f(x))
        .collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > PEAK_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (mut location, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    // The grid point itself may sit on the kink.
    if values[best] > value {
        location = grid[best];
        value = values[best];
    }
    checked(location, value, b - a)
}

/// The four figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(Error::InvalidSpec(format!(
                "unknown figure {other:?}; expected fig1..fig4"
            ))),
        }
    }
}

/// One curve: fixed parameters plus the swept axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    pub fixed: DetectorPairParams,
    pub axis: AxisSpec,
}

fn series(
    coupling: f64,
    omega_a: f64,
    omega_b: f64,
    separation: f64,
    axis: AxisSpec,
) -> Series {
    Series {
        fixed: DetectorPairParams {
            coupling,
            omega_a,
            omega_b,
            separation,
        },
        axis,
    }
}

/// Overrides for a figure's defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FigureOptions {
    pub coupling: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4];

    pub fn label(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn default_axis(self) -> AxisSpec {
        match self {
            Figure::Fig1 | Figure::Fig2 => AxisSpec {
                axis: Axis::Separation,
                min: 0.005,
                max: 0.25,
                count: 246,
            },
            Figure::Fig3 => AxisSpec {
                axis: Axis::OmegaB,
                min: 0.5,
                max: 5.0,
                count: 451,
            },
            Figure::Fig4 => AxisSpec {
                axis: Axis::GapRatio,
                min: 0.0,
                max: 3.0,
                count: 301,
            },
        }
    }

    pub fn series(self, options: &FigureOptions) -> Result<Vec<Series>> {
        let lambda = options.coupling.unwrap_or(0.1);
        let default = self.default_axis();
        let axis = AxisSpec::new(
            default.axis,
            options.min.unwrap_or(default.min),
            options.max.unwrap_or(default.max),
            options.count.unwrap_or(default.count),
        )?;
        // The swept coordinate in `fixed` is a placeholder.
        let out = match self {
            Figure::Fig1 => vec![
                series(lambda, 0.5, 1.0, 0.1, axis),
                series(lambda, 1.0, 2.0, 0.1, axis),
            ],
            Figure::Fig2 => [(0.5, 0.0), (0.5, 0.2), (0.5, 0.6), (1.2, 0.0), (1.2, 0.25), (1.2, 0.5)]
                .into_iter()
                .map(|(wa, r)| series(lambda, wa, wa * (1.0 + r), 0.1, axis))
                .collect(),
            Figure::Fig3 => [0.003, 0.01, 0.4, 1.0]
                .into_iter()
                .map(|l| series(lambda, 0.5, 0.5, l, axis))
                .collect(),
            Figure::Fig4 => [(0.5, 0.05), (0.5, 0.1), (1.2, 0.05), (1.2, 0.1)]
                .into_iter()
                .map(|(wa, l)| series(lambda, wa, wa, l, axis))
                .collect(),
        };
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureRow {
    pub omega_a: f64,
    pub omega_b: f64,
    pub gap_ratio: f64,
    #[serde(rename = "L_over_sigma")]
    pub separation: f64,
    pub s_a_to_b: f64,
    pub s_b_to_a: f64,
    pub asymmetry: f64,
}

impl FigureRow {
    pub const HEADER: [&'static str; 7] = [
        "omega_a",
        "omega_b",
        "gap_ratio",
        "L_over_sigma",
        "s_a_to_b",
        "s_b_to_a",
        "asymmetry",
    ];

    pub fn cells(&self) -> [f64; 7] {
        [
            self.omega_a,
            self.omega_b,
            self.gap_ratio,
            self.separation,
            self.s_a_to_b,
            self.s_b_to_a,
            self.asymmetry,
        ]
    }
}

/// All curves of a figure, series by series. Any failing point is fatal.
pub fn figure(fig: Figure, options: &FigureOptions) -> Result<Vec<FigureRow>> {
    let mut rows = Vec::new();
    for s in fig.series(options)? {
        let points = s
            .axis
            .values()
            .into_par_iter()
            .map(|x| {
                let p = s.axis.axis.apply(&s.fixed, x)?;
                let steering = evaluate(&p)?.steering;
                Ok(FigureRow {
                    omega_a: p.omega_a,
                    omega_b: p.omega_b,
                    gap_ratio: p.gap_ratio(),
                    separation: p.separation,
                    s_a_to_b: steering.s_a_to_b,
                    s_b_to_a: steering.s_b_to_a,
                    asymmetry: steering.asymmetry,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(points);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(omega_a: f64, omega_b: f64, l: f64) -> DetectorPairParams {
        DetectorPairParams::new(0.1, omega_a, omega_b, l).unwrap()
    }

    #[test]
    fn classify_examples() {
        let r = |a, b| classify(&SteeringResult::from_measures(a, b));
        assert_eq!(r(0.1, 0.05), Regime::TwoWay);
        assert_eq!(r(0.1, 0.0), Regime::OneWayAtoB);
        assert_eq!(r(0.0, 0.1), Regime::OneWayBtoA);
        assert_eq!(r(0.0, 0.0), Regime::NoWay);
    }

    #[test]
    fn axis_values_hit_both_endpoints() {
        let v = AxisSpec::new(Axis::Separation, 0.005, 0.25, 246).unwrap().values();
        assert_eq!(v.len(), 246);
        assert_eq!(v[0], 0.005);
        assert_eq!(v[245], 0.25);
        assert!((v[1] - 0.006).abs() < 1e-15);
        assert!(AxisSpec::new(Axis::Separation, 1.0, 0.5, 3).is_err());
        assert!(AxisSpec::new(Axis::Separation, 0.5, 1.0, 1).is_err());
    }

    #[test]
    fn single_point_sweep_gives_identical_rows() {
        let spec = SweepSpec {
            axis1: AxisSpec::new(Axis::Separation, 0.1, 0.1, 2).unwrap(),
            axis2: None,
            fixed: params(0.5, 1.0, 0.1),
            outputs: Output::ALL.to_vec(),
        };
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], rows[1]);
    }

    #[test]
    fn sweep_errors_stay_in_their_row() {
        let spec = SweepSpec {
            axis1: AxisSpec::new(Axis::Separation, 0.0, 0.2, 3).unwrap(),
            axis2: None,
            fixed: params(0.5, 1.0, 0.1),
            outputs: vec![Output::SAToB],
        };
        let rows = sweep(&spec).unwrap();
        assert!(rows[0].values.is_err());
        assert!(rows[1].values.is_ok() && rows[2].values.is_ok());
    }

    #[test]
    fn two_axis_sweep_is_axis1_major() {
        let spec = SweepSpec {
            axis1: AxisSpec::new(Axis::OmegaA, 0.5, 1.0, 2).unwrap(),
            axis2: Some(AxisSpec::new(Axis::GapRatio, 0.0, 1.0, 3).unwrap()),
            fixed: params(0.5, 1.0, 0.1),
            outputs: vec![Output::PA, Output::PB],
        };
        let rows = sweep(&spec).unwrap();
        let coords: Vec<_> = rows.iter().map(|r| r.coords.clone()).collect();
        assert_eq!(
            coords,
            vec![
                vec![0.5, 0.0],
                vec![0.5, 0.5],
                vec![0.5, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 0.5],
                vec![1.0, 1.0]
            ]
        );
        assert_eq!(spec.header(), vec!["omega_a", "gap_ratio", "p_a", "p_b"]);
    }

    #[test]
    fn death_point_requires_a_sign_change() {
        let p = params(0.5, 1.0, 0.1);
        let err = find_death_point(Measure::Steering(Direction::AToB), &p, Axis::Separation, [0.3, 1.0])
            .unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn identical_gaps_die_together() {
        let p = params(0.5, 0.5, 0.1);
        let ab = find_death_point(Measure::Steering(Direction::AToB), &p, Axis::Separation, [0.005, 0.5]).unwrap();
        let ba = find_death_point(Measure::Steering(Direction::BToA), &p, Axis::Separation, [0.005, 0.5]).unwrap();
        assert!((ab.location - ba.location).abs() <= 1e-9);
        assert!(ab.verified && ba.verified && ab.alive_below);
    }

    #[test]
    fn degenerate_peak_range_returns_an_endpoint() {
        let p = params(0.5, 1.0, 0.003);
        let peak = find_asymmetry_peak(&p, Axis::OmegaB, [2.0, 2.0 + 1e-12]).unwrap();
        assert!(peak.location == 2.0 || peak.location == 2.0 + 1e-12);
        assert!(peak.tolerance <= PEAK_TOLERANCE);
    }

    #[test]
    fn flat_landscape_is_no_peak() {
        let p = params(0.5, 0.5, 0.1);
        let err = find_asymmetry_peak(&p, Axis::OmegaA, [0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::NoPeak { .. }));
    }

    #[test]
    fn figure_presets_have_their_series() {
        let opts = FigureOptions::default();
        let counts: Vec<usize> = Figure::ALL.iter().map(|f| f.series(&opts).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 6, 4, 4]);
        let fig1 = Figure::Fig1.series(&opts).unwrap();
        assert!(fig1.iter().all(|s| s.fixed.gap_ratio() == 1.0 && s.fixed.coupling == 0.1));
    }
}
