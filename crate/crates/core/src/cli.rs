//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on rejected input, 2 on numerical failure or
//! a failed verification. Errors go to stderr as one JSON object per line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{
    self, Axis, AxisSpec, Cell, Figure, FigureOptions, FigureRow, Measure, Output, SweepSpec,
};
use crate::error::{Error, Result};
use crate::harvest::DetectorPairParams;
use crate::oracle::{self, QuadratureSpec, VerificationReport};

pub const THREADS_ENV: &str = "STEERHARVEST_THREADS";

/// Header of `eval` output, also the key order of its JSON object.
pub const EVAL_COLUMNS: [&str; 9] = [
    "p_a",
    "p_b",
    "abs_x",
    "abs_c",
    "s_a_to_b",
    "s_b_to_a",
    "asymmetry",
    "concurrence",
    "regime",
];

pub const DEATH_COLUMNS: [&str; 6] = [
    "measure",
    "axis",
    "location",
    "bracket_width",
    "alive_below",
    "verified",
];

pub const PEAK_COLUMNS: [&str; 4] = ["axis", "location", "value", "tolerance"];

pub const VERIFY_COLUMNS: [&str; 14] = [
    "point",
    "quantity",
    "omega_a",
    "omega_b",
    "separation",
    "coupling",
    "reference_re",
    "reference_im",
    "oracle_re",
    "oracle_im",
    "rel_error",
    "residual",
    "pass",
    "error",
];

#[derive(Debug, Parser)]
#[command(name = "steerharvest", version, about = "Steering harvested by two static detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long = "omega-a", allow_negative_numbers = true)]
    omega_a: Option<f64>,
    #[arg(long = "omega-b", conflicts_with = "gap_ratio", allow_negative_numbers = true)]
    omega_b: Option<f64>,
    /// (omega_b - omega_a) / omega_a.
    #[arg(long = "gap-ratio", allow_negative_numbers = true)]
    gap_ratio: Option<f64>,
    /// Separation L / sigma.
    #[arg(long, allow_negative_numbers = true)]
    sep: Option<f64>,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    coupling: f64,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long)]
    axis: String,
    #[arg(long, allow_negative_numbers = true)]
    min: f64,
    #[arg(long, allow_negative_numbers = true)]
    max: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Amplitudes and measures at one parameter point.
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dense grid over one or two axes.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        axis2: Option<String>,
        #[arg(long, requires_all = ["axis2", "max2", "count2"])]
        min2: Option<f64>,
        #[arg(long, requires = "axis2")]
        max2: Option<f64>,
        #[arg(long, requires = "axis2")]
        count2: Option<usize>,
        /// Comma-separated output columns; all when absent.
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<String>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sudden-death location of one measure along an axis.
    Death {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// a_to_b, b_to_a or concurrence.
        #[arg(long, alias = "direction")]
        measure: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum of the steering asymmetry along an axis.
    Peak {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Data behind one of the four figures.
    Figure {
        /// fig1, fig2, fig3 or fig4.
        name: String,
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Oracle quadrature against the closed forms.
    Verify {
        #[arg(long, default_value = "default")]
        panel: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            stderr_line(&json!({ "error": "usage", "message": e.kind().to_string() }));
            return 1;
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| execute(cli.command)));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            stderr_line(&json!({ "error": e.kind(), "message": e.to_string() }));
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn stderr_line(value: &Value) {
    let _ = writeln!(io::stderr(), "{value}");
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| {
                Error::InvalidSpec(format!("{THREADS_ENV}={raw:?} is not a positive integer"))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker threads: {e}")))
}

impl ParamArgs {
    /// Fixed parameters for a query over `swept`. Swept coordinates get a
    /// valid placeholder; the query sets the real values point by point.
    fn resolve(&self, swept: &[Axis]) -> Result<DetectorPairParams> {
        let sweeps = |axis| {
            swept.contains(&axis).then_some(if axis == Axis::GapRatio { 0.0 } else { 1.0 })
        };
        let missing = |flag: &str| Error::InvalidSpec(format!("--{flag} is required"));
        let omega_a = match sweeps(Axis::OmegaA) {
            Some(x) => {
                if self.gap_ratio.is_some() && sweeps(Axis::GapRatio).is_none() {
                    return Err(Error::InvalidSpec(
                        "--gap-ratio with an omega_a sweep: use --axis2 gap_ratio".into(),
                    ));
                }
                x
            }
            None => self.omega_a.ok_or_else(|| missing("omega-a"))?,
        };
        let omega_b = match (sweeps(Axis::OmegaB), sweeps(Axis::GapRatio)) {
            (Some(x), _) => x,
            (None, Some(r)) => omega_a * (1.0 + r),
            (None, None) => match (self.omega_b, self.gap_ratio) {
                (Some(b), _) => b,
                (None, Some(r)) => {
                    if !r.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "gap_ratio",
                            value: r,
                            reason: "must be finite",
                        });
                    }
                    omega_a * (1.0 + r)
                }
                (None, None) => return Err(missing("omega-b or --gap-ratio")),
            },
        };
        let separation = match sweeps(Axis::Separation) {
            Some(x) => x,
            None => self.sep.ok_or_else(|| missing("sep"))?,
        };
        DetectorPairParams::new(self.coupling, omega_a, omega_b, separation)
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Eval { params, output } => {
            let p = params.resolve(&[])?;
            let values = analysis::evaluate(&p)?;
            let cells: Vec<Cell> = EVAL_COLUMNS
                .iter()
                .map(|c| values.get(c.parse::<Output>().expect("eval columns are outputs")))
                .collect();
            let text = match output.format {
                Format::Csv => csv_table(&EVAL_COLUMNS, &[cells]),
                Format::Json => {
                    let object = json_object(EVAL_COLUMNS.iter().copied().zip(cells));
                    json_text(&Value::Object(object))?
                }
            };
            emit(&output, &text)?;
            Ok(0)
        }
        Command::Sweep {
            params,
            range,
            count,
            axis2,
            min2,
            max2,
            count2,
            outputs,
            output,
        } => {
            let axis1 = AxisSpec::new(range.axis.parse()?, range.min, range.max, count)?;
            let axis2 = match axis2 {
                None => None,
                Some(name) => {
                    let (Some(min), Some(max), Some(count)) = (min2, max2, count2) else {
                        return Err(Error::InvalidSpec(
                            "--axis2 needs --min2, --max2 and --count2".into(),
                        ));
                    };
                    Some(AxisSpec::new(name.parse()?, min, max, count)?)
                }
            };
            let outputs = match outputs {
                None => Output::ALL.to_vec(),
                Some(names) => names
                    .iter()
                    .map(|n| n.trim().parse())
                    .collect::<Result<Vec<Output>>>()?,
            };
            let mut swept = vec![axis1.axis];
            if let Some(a) = &axis2 {
                swept.push(a.axis);
            }
            let fixed = params.resolve(&swept)?;
            let spec = SweepSpec {
                axis1,
                axis2,
                fixed,
                outputs,
            };
            let rows = analysis::sweep(&spec)?;
            let mut header = spec.header();
            header.push("error");
            let table: Vec<Vec<Cell>> = rows
                .iter()
                .map(|row| {
                    let mut cells: Vec<Cell> = row.coords.iter().map(|&x| Cell::Number(x)).collect();
                    match &row.values {
                        Ok(v) => {
                            cells.extend(spec.outputs.iter().map(|&o| v.get(o)));
                            cells.push(Cell::Label(""));
                        }
                        Err(e) => {
                            cells.extend(spec.outputs.iter().map(|_| Cell::Label("")));
                            cells.push(Cell::Label(e.kind()));
                        }
                    }
                    cells
                })
                .collect();
            let text = match output.format {
                Format::Csv => csv_table(&header, &table),
                Format::Json => {
                    let array = rows
                        .iter()
                        .zip(&table)
                        .map(|(row, cells)| {
                            let mut object = json_object(
                                header[..header.len() - 1]
                                    .iter()
                                    .copied()
                                    .zip(cells.iter().copied()),
                            );
                            if let Err(e) = &row.values {
                                for o in &spec.outputs {
                                    object.insert(o.label().into(), Value::Null);
                                }
                                object.insert("error".into(), json!(e.to_string()));
                            } else {
                                object.insert("error".into(), Value::Null);
                            }
                            Value::Object(object)
                        })
                        .collect();
                    json_text(&Value::Array(array))?
                }
            };
            emit(&output, &text)?;
            Ok(0)
        }
        Command::Death {
            params,
            range,
            measure,
            output,
        } => {
            let axis: Axis = range.axis.parse()?;
            let measure: Measure = measure.parse()?;
            let fixed = params.resolve(&[axis])?;
            let dp = analysis::find_death_point(measure, &fixed, axis, [range.min, range.max])?;
            let cells = vec![
                Cell::Label(dp.measure.label()),
                Cell::Label(dp.axis.label()),
                Cell::Number(dp.location),
                Cell::Number(dp.bracket_width),
                Cell::Label(bool_label(dp.alive_below)),
                Cell::Label(bool_label(dp.verified)),
            ];
            emit_single(&output, &DEATH_COLUMNS, cells)?;
            Ok(0)
        }
        Command::Peak {
            params,
            range,
            output,
        } => {
            let axis: Axis = range.axis.parse()?;
            let fixed = params.resolve(&[axis])?;
            let peak = analysis::find_asymmetry_peak(&fixed, axis, [range.min, range.max])?;
            let cells = vec![
                Cell::Label(peak.axis.label()),
                Cell::Number(peak.location),
                Cell::Number(peak.value),
                Cell::Number(peak.tolerance),
            ];
            emit_single(&output, &PEAK_COLUMNS, cells)?;
            Ok(0)
        }
        Command::Figure {
            name,
            coupling,
            min,
            max,
            count,
            output,
        } => {
            let fig: Figure = name.parse()?;
            let options = FigureOptions {
                coupling,
                min,
                max,
                count,
            };
            let rows = analysis::figure(fig, &options)?;
            let text = match output.format {
                Format::Csv => {
                    let table: Vec<Vec<Cell>> = rows
                        .iter()
                        .map(|r| r.cells().iter().map(|&x| Cell::Number(x)).collect())
                        .collect();
                    csv_table(&FigureRow::HEADER, &table)
                }
                Format::Json => json_text(&rows)?,
            };
            emit(&output, &text)?;
            Ok(0)
        }
        Command::Verify { panel, output } => {
            let points = oracle::panel(&panel)?;
            let report = oracle::verify(&points, &QuadratureSpec::default())?;
            let text = match output.format {
                Format::Csv => verify_csv(&report),
                Format::Json => json_text(&report)?,
            };
            emit(&output, &text)?;
            let failed = report.rows.iter().filter(|r| !r.pass).count();
            report_summary(&report, failed);
            Ok(if report.passed { 0 } else { 2 })
        }
    }
}

fn report_summary(report: &VerificationReport, failed: usize) {
    let worst = report
        .rows
        .iter()
        .map(|r| r.rel_error)
        .fold(0.0_f64, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    stderr_line(&json!({
        "verify": if report.passed { "pass" } else { "fail" },
        "rows": report.rows.len(),
        "failed": failed,
        "max_rel_error": worst,
        "tolerance": report.tolerance,
    }));
}

fn bool_label(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Number(x) => number(*x),
        Cell::Label(s) => (*s).to_string(),
    }
}

fn csv_table(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let lines: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
    csv_lines(header, &lines)
}

fn csv_lines(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn cell_value(cell: Cell) -> Value {
    match cell {
        Cell::Number(x) => json!(x),
        Cell::Label("true") => Value::Bool(true),
        Cell::Label("false") => Value::Bool(false),
        Cell::Label(s) => json!(s),
    }
}

fn json_object<'a>(pairs: impl Iterator<Item = (&'a str, Cell)>) -> Map<String, Value> {
    pairs.map(|(k, c)| (k.to_string(), cell_value(c))).collect()
}

fn json_text<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidSpec(format!("cannot serialise output: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn emit_single(output: &OutputArgs, header: &[&str], cells: Vec<Cell>) -> Result<()> {
    let text = match output.format {
        Format::Csv => csv_table(header, &[cells]),
        Format::Json => {
            let object = json_object(header.iter().copied().zip(cells));
            json_text(&Value::Array(vec![Value::Object(object)]))?
        }
    };
    emit(output, &text)
}

fn verify_csv(report: &VerificationReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.point.to_string(), r.quantity.to_string()];
            cells.extend(
                [
                    r.omega_a,
                    r.omega_b,
                    r.separation,
                    r.coupling,
                    r.reference_re,
                    r.reference_im,
                    r.oracle_re,
                    r.oracle_im,
                    r.rel_error,
                    r.residual,
                ]
                .map(number),
            );
            cells.push(bool_label(r.pass).to_string());
            cells.push(r.error.unwrap_or("").to_string());
            cells
        })
        .collect();
    csv_lines(&VERIFY_COLUMNS, &rows)
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(-2.5), "-2.5000000000000000e0");
        let x = 0.123_456_789_012_345_67_f64;
        assert_eq!(number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_uses_lf_and_no_quoting() {
        let text = csv_table(&["a", "b"], &[vec![Cell::Number(1.0), Cell::Label("two_way")]]);
        assert_eq!(text, "a,b\n1.0000000000000000e0,two_way\n");
    }
}
