//! Command-line front end: file formats, argument parsing and rendering.
//!
//! Complex numbers in files are two-element `[re, im]` arrays. Exit codes are
//! 0 on success, 1 when a reproduction check fails and 2 on usage, parse or
//! input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::measurement::{basis_measurement, MeasurementOperators, Povm, ProjectiveMeasurement};
use crate::measures::{c_hv, i_go, i_lo, measure_report, StateEntropies};
use crate::optimize::{optimize, Objective, OptimizerConfig};
use crate::scenarios::{self, ScenarioReport, Target};
use crate::state::{DensityMatrix, PureState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping optimizer threads (0 or unset: default).
pub const THREADS_ENV: &str = "DEFICIT_LAB_THREADS";

type Cx = [f64; 2];

fn to_c64(z: &Cx) -> C64 {
    c64(z[0], z[1])
}

fn from_c64(z: C64) -> Cx {
    [z.re, z.im]
}

fn matrix_from_rows(rows: &[Vec<Cx>], field: &str) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(to_c64).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Field(field.to_string(), e.to_string()))
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    m.row_vectors()
        .into_iter()
        .map(|r| r.into_iter().map(from_c64).collect())
        .collect()
}

/// A bipartite state given either as a density matrix or as a pure vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Cx>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure: Option<Vec<Cx>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let (da, db) = rho.dims();
        Self {
            dims: [da, db],
            matrix: Some(matrix_to_rows(rho.matrix())),
            pure: None,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let (da, db) = psi.dims();
        Self {
            dims: [da, db],
            matrix: None,
            pure: Some(psi.amplitudes().iter().copied().map(from_c64).collect()),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix, CliError> {
        let dims = (self.dims[0], self.dims[1]);
        match (&self.matrix, &self.pure) {
            (Some(rows), None) => {
                let m = matrix_from_rows(rows, "matrix")?;
                DensityMatrix::new(dims, m).map_err(|e| CliError::Field("matrix".into(), e.to_string()))
            }
            (None, Some(amps)) => {
                let amps = amps.iter().map(to_c64).collect();
                PureState::new(dims, amps)
                    .map(|p| p.density())
                    .map_err(|e| CliError::Field("pure".into(), e.to_string()))
            }
            _ => Err(CliError::Field(
                "matrix/pure".into(),
                "exactly one of `matrix` and `pure` must be given".into(),
            )),
        }
    }
}

/// An Alice measurement: basis vectors, projectors or POVM elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasurementFile {
    Basis { vectors: Vec<Vec<Cx>> },
    Projectors { matrices: Vec<Vec<Vec<Cx>>> },
    Povm { matrices: Vec<Vec<Vec<Cx>>> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedMeasurement {
    Projective(ProjectiveMeasurement),
    Povm(Povm),
}

impl MeasurementFile {
    /// Basis form of a measurement given by the columns of `u`.
    pub fn from_basis(u: &ComplexMatrix) -> Self {
        MeasurementFile::Basis {
            vectors: u
                .columns()
                .into_iter()
                .map(|v| v.into_iter().map(from_c64).collect())
                .collect(),
        }
    }

    pub fn to_measurement(&self) -> Result<ParsedMeasurement, CliError> {
        let matrices = |ms: &[Vec<Vec<Cx>>]| -> Result<Vec<ComplexMatrix>, CliError> {
            ms.iter()
                .enumerate()
                .map(|(i, m)| matrix_from_rows(m, &format!("matrices[{i}]")))
                .collect()
        };
        match self {
            MeasurementFile::Basis { vectors } => {
                let vs: Vec<Vec<C64>> = vectors.iter().map(|v| v.iter().map(to_c64).collect()).collect();
                basis_measurement(&vs)
                    .map(ParsedMeasurement::Projective)
                    .map_err(|e| CliError::Field("vectors".into(), e.to_string()))
            }
            MeasurementFile::Projectors { matrices: ms } => ProjectiveMeasurement::new(matrices(ms)?)
                .map(ParsedMeasurement::Projective)
                .map_err(|e| CliError::Field("matrices".into(), e.to_string())),
            MeasurementFile::Povm { matrices: ms } => Povm::new(matrices(ms)?)
                .map(ParsedMeasurement::Povm)
                .map_err(|e| CliError::Field("matrices".into(), e.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("field `{0}`: {1}")]
    Field(String, String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }

    fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Field(field, message) => CliError::Parse {
                path: path.to_path_buf(),
                message: format!("field `{field}`: {message}"),
            },
            other => other,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    // serde_json reports the line and column of the offending token.
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    read_json::<StateFile>(path)?.to_density().map_err(|e| e.in_file(path))
}

pub fn load_measurement(path: &Path) -> Result<ParsedMeasurement, CliError> {
    read_json::<MeasurementFile>(path)?
        .to_measurement()
        .map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Chv,
    Dcl,
    Deficit,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Chv => Objective::CHv,
            ObjectiveArg::Dcl => Objective::DeltaCl,
            ObjectiveArg::Deficit => Objective::Deficit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Sw99,
    Knr01,
    Lemma1,
    Lemma2,
    Diagram,
    ChiScan,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Sw99 => Target::Sw99,
            TargetArg::Knr01 => Target::Knr01,
            TargetArg::Lemma1 => Target::Lemma1,
            TargetArg::Lemma2 => Target::Lemma2,
            TargetArg::Diagram => Target::Diagram,
            TargetArg::ChiScan => Target::ChiScan,
        }
    }
}

/// Information deficits and classical correlation measures.
#[derive(Debug, Parser)]
#[command(name = "deficit-lab", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rerun a built-in example and check it against its reference values.
    Reproduce {
        #[arg(value_enum)]
        target: TargetArg,
    },
    /// Entropies and information quantities of a state, optionally for one measurement.
    Measures {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        measurement: Option<PathBuf>,
    },
    /// Optimize a measure over rank-1 projective measurements on Alice.
    Optimize {
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        support_restricted: bool,
    },
    /// Print the version.
    Version,
}

/// Formats with six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (0.9999999 -> 1.000000).
    let carried = s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(mag + 1));
    if carried && decimals > 0 {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn render_report(r: &ScenarioReport) -> String {
    let mut out = format!("scenario: {}\n\n", r.name);
    let mut q = vec![vec!["quantity".to_string(), "value".to_string()]];
    q.extend(r.quantities.iter().map(|(k, v)| vec![k.clone(), sig6(*v)]));
    out.push_str(&render_table(&q));
    out.push('\n');
    let mut c = vec![["check", "achieved", "rel", "target", "tol", "status"].map(String::from).to_vec()];
    for ch in &r.checks {
        c.push(vec![
            ch.description.clone(),
            sig6(ch.actual),
            ch.relation.symbol().to_string(),
            sig6(ch.expected),
            sig6(ch.tolerance),
            if ch.passed { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    out.push_str(&render_table(&c));
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(out, "\noverall: {}", if r.overall { "PASS" } else { "FAIL" });
    out
}

fn kv_table(pairs: &[(String, f64)]) -> String {
    let rows: Vec<Vec<String>> = pairs.iter().map(|(k, v)| vec![k.clone(), sig6(*v)]).collect();
    render_table(&rows)
}

fn cmd_reproduce(target: Target, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = scenarios::run(target, &OptimizerConfig::default())?;
    match format {
        Format::Json => emit_json(out, &serde_json::to_value(&report).expect("serializable"))?,
        Format::Table => emit(out, &render_report(&report))?,
    }
    Ok(if report.overall { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_measures(state: &Path, measurement: Option<&Path>, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let rho = load_state(state)?;
    let ent = StateEntropies::of(&rho)?;
    let mut pairs = vec![
        ("S(rho_AB)".to_string(), ent.s_ab),
        ("S(rho_A)".to_string(), ent.s_a),
        ("S(rho_B)".to_string(), ent.s_b),
        ("I_M".to_string(), ent.mutual_information()),
        ("I_GO".to_string(), i_go(&rho)?),
        ("I_LO".to_string(), i_lo(&rho)?),
    ];
    let mut doc = json!({
        "dims": [rho.dim_a(), rho.dim_b()],
        "s_ab": ent.s_ab,
        "s_a": ent.s_a,
        "s_b": ent.s_b,
        "mutual_information": ent.mutual_information(),
        "i_go": pairs[4].1,
        "i_lo": pairs[5].1,
    });
    let mut extra = String::new();
    if let Some(path) = measurement {
        let parsed = load_measurement(path)?;
        let m_dim = match &parsed {
            ParsedMeasurement::Projective(m) => m.dim(),
            ParsedMeasurement::Povm(p) => p.dim(),
        };
        if m_dim != rho.dim_a() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                message: format!("measurement acts on dimension {m_dim}, state has d_A = {}", rho.dim_a()),
            });
        }
        match parsed {
            ParsedMeasurement::Projective(m) => {
                let r = measure_report(&rho, &m)?;
                pairs.extend([
                    ("c_HV".to_string(), r.c_hv),
                    ("delta_cl".to_string(), r.delta_cl),
                    ("deficit (this measurement)".to_string(), r.deficit_q),
                    ("S(rho'_A) - S(rho_A)".to_string(), r.alice_entropy_cost),
                ]);
                let rows: Vec<Vec<String>> = std::iter::once(["outcome", "weight", "S(rho_i^B)"].map(String::from).to_vec())
                    .chain(
                        r.outcome_weights
                            .iter()
                            .zip(&r.per_outcome_entropies)
                            .enumerate()
                            .map(|(i, (w, s))| vec![i.to_string(), sig6(*w), sig6(*s)]),
                    )
                    .collect();
                extra = render_table(&rows);
                doc["measurement"] = serde_json::to_value(&r).expect("serializable");
            }
            ParsedMeasurement::Povm(p) => {
                let v = c_hv(&rho, &p)?;
                pairs.push(("c_HV".to_string(), v));
                doc["measurement"] = json!({ "c_hv": v });
            }
        }
    }
    match format {
        Format::Json => emit_json(out, &doc)?,
        Format::Table => {
            let mut text = kv_table(&pairs);
            if !extra.is_empty() {
                text.push('\n');
                text.push_str(&extra);
            }
            emit(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_optimize(state: &Path, objective: Objective, cfg: OptimizerConfig, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let rho = load_state(state)?;
    let result = optimize(&rho, objective, &cfg)?;
    let basis = result.basis();
    match format {
        Format::Json => {
            let doc = json!({
                "objective": objective.name(),
                "value": result.value,
                "evaluations": result.evaluations,
                "starts": result.starts,
                "best_start": result.best_start,
                "converged": result.converged,
                "seed": cfg.seed,
                "support_restricted": cfg.support_restricted,
                "best_measurement": MeasurementFile::from_basis(basis),
                "history": result.history,
            });
            emit_json(out, &doc)?;
        }
        Format::Table => {
            let mut text = kv_table(&[
                (format!("best {}", objective.name()), result.value),
                ("evaluations".into(), result.evaluations as f64),
                ("starts".into(), result.starts as f64),
            ]);
            let _ = writeln!(text, "converged  {}", result.converged);
            text.push_str("\nbest basis (columns are measurement vectors)\n");
            for r in basis.row_vectors() {
                let cells: Vec<String> = r.iter().map(|z| format!("{} {:+}i", sig6(z.re), sig6(z.im))).collect();
                let _ = writeln!(text, "  {}", cells.join("   "));
            }
            emit(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn emit_json(out: &mut dyn Write, doc: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    emit(out, &text)
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `out`, diagnostics to `err`; the return value is the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Reproduce { target } => cmd_reproduce(target.into(), cli.format, out),
        Command::Measures { state, measurement } => cmd_measures(&state, measurement.as_deref(), cli.format, out),
        Command::Optimize {
            objective,
            state,
            restarts,
            grid,
            seed,
            support_restricted,
        } => {
            let cfg = OptimizerConfig {
                restarts,
                grid_points_per_angle: grid,
                seed,
                support_restricted,
                ..OptimizerConfig::default()
            };
            cfg.validate()
                .map_err(CliError::from)
                .and_then(|_| cmd_optimize(&state, objective.into(), cfg, cli.format, out))
        }
        Command::Version => emit(out, &format!("deficit-lab {}\n", env!("CARGO_PKG_VERSION"))).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Reads [`THREADS_ENV`]: `Ok(None)` for unset or 0.
pub fn thread_cap_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.4566701), "0.456670");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(-0.27213), "-0.272130");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(9.9999999), "10.0000");
        assert_eq!(sig6(0.99999999), "1.00000");
        assert_eq!(sig6(2e-10), "2.00000e-10");
    }

    #[test]
    fn state_file_round_trip() {
        let rho = DensityMatrix::bell();
        let text = serde_json::to_string(&StateFile::from_density(&rho)).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_density().unwrap(), rho);
    }

    #[test]
    fn state_file_needs_exactly_one_form() {
        let f = StateFile {
            dims: [2, 1],
            matrix: None,
            pure: None,
        };
        assert!(matches!(f.to_density(), Err(CliError::Field(..))));
    }

    #[test]
    fn measurement_file_kinds() {
        let basis: MeasurementFile =
            serde_json::from_str(r#"{"kind":"basis","vectors":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert!(matches!(basis.to_measurement().unwrap(), ParsedMeasurement::Projective(_)));
        let povm: MeasurementFile =
            serde_json::from_str(r#"{"kind":"povm","matrices":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]],[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#)
                .unwrap();
        assert!(matches!(povm.to_measurement().unwrap(), ParsedMeasurement::Povm(_)));
    }
}
