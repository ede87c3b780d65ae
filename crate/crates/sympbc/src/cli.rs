//! Batch command-line front end.
//!
//! Each subcommand reads a JSON problem specification, dispatches to the
//! computational modules, and writes a report to standard output as
//! JSON with sorted keys and floats printed with 17 significant digits,
//! so identical specifications produce byte-identical reports. Bulk
//! numeric data (solutions, frames) goes to CSV files named in the
//! report.
//!
//! Exit codes: `0` on pass/success, `1` on mathematical rejection (a
//! boundary condition that is not self-adjoint, a failed certificate),
//! `2` on input or validation errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::boundary::{self, BcVerdict, BoundaryForm, CalkinSystem, TestFunction};
use crate::connection::{self, Curve, Frame};
use crate::nonlinear::{self, NonlinearBC, NonlinearError, SolverOptions};
use crate::presets;
use crate::symplin::{self, Subspace};

/// Exit code for pass/success.
pub const EXIT_PASS: i32 = 0;
/// Exit code for a mathematical rejection.
pub const EXIT_REJECTED: i32 = 1;
/// Exit code for input/validation errors.
pub const EXIT_INVALID: i32 = 2;

/// Overridable tolerances with their floors. Overrides below the floor
/// are rejected as validation errors.
pub const TOLERANCE_FLOORS: &[(&str, f64, f64)] = &[
    // (name, default, floor)
    ("newton", nonlinear::NEWTON_TOL, 1e-14),
    ("cert", nonlinear::CERT_TOL, 1e-12),
];

/// Report plus the process exit code.
#[derive(Debug, Clone)]
pub struct CliOutcome {
    pub report: Value,
    pub exit_code: i32,
}

/// Runs one subcommand on raw specification bytes.
pub fn run(
    command: &str,
    spec_bytes: &[u8],
    out_dir: &Path,
    tol_overrides: &BTreeMap<String, f64>,
) -> CliOutcome {
    let digest = format!("sha256:{}", hex_digest(spec_bytes));
    let tolerances = match resolve_tolerances(tol_overrides) {
        Ok(t) => t,
        Err(msg) => return invalid(command, &digest, &msg),
    };
    if command == "presets" {
        let mut report = report_skeleton(command, &digest, &tolerances);
        report["catalog"] = presets::catalog();
        return CliOutcome { report, exit_code: EXIT_PASS };
    }
    let spec: Value = match serde_json::from_slice(spec_bytes) {
        Ok(v) => v,
        Err(e) => return invalid(command, &digest, &format!("malformed JSON: {e}")),
    };
    let result = match command {
        "classify" => run_classify(&spec),
        "transport" => run_transport(&spec, out_dir),
        "bvp" => run_bvp(&spec, out_dir, &tolerances),
        "defect" => run_defect(&spec),
        "calkin" => run_calkin(&spec),
        "frames" => run_frames(&spec, out_dir),
        other => Err(CmdError::Invalid(format!("unknown command '{other}'"))),
    };
    match result {
        Ok((body, exit_code)) => {
            let mut report = report_skeleton(command, &digest, &tolerances);
            merge(&mut report, body);
            CliOutcome { report, exit_code }
        }
        Err(CmdError::Invalid(msg)) => invalid(command, &digest, &msg),
        Err(CmdError::Rejected(msg, extra)) => {
            let mut report = report_skeleton(command, &digest, &tolerances);
            report["error"] = Value::String(msg);
            if let Some(extra) = extra {
                merge(&mut report, extra);
            }
            CliOutcome { report, exit_code: EXIT_REJECTED }
        }
    }
}

enum CmdError {
    /// Schema or argument problem: exit 2.
    Invalid(String),
    /// Mathematically well-posed but rejected: exit 1.
    Rejected(String, Option<Value>),
}

type CmdResult = Result<(Value, i32), CmdError>;

fn invalid(command: &str, digest: &str, msg: &str) -> CliOutcome {
    let mut report = Map::new();
    report.insert("command".into(), Value::String(command.into()));
    report.insert("error".into(), Value::String(msg.into()));
    report.insert(
        "provenance".into(),
        json!({"version": env!("CARGO_PKG_VERSION"), "input_digest": digest}),
    );
    CliOutcome { report: Value::Object(report), exit_code: EXIT_INVALID }
}

fn report_skeleton(command: &str, digest: &str, tolerances: &BTreeMap<String, f64>) -> Value {
    let mut tol = Map::new();
    tol.insert("rank_tol".into(), json!(symplin::RANK_TOL));
    tol.insert("proj_tol".into(), json!(symplin::PROJ_TOL));
    tol.insert("verdict_tol".into(), json!(boundary::VERDICT_TOL));
    tol.insert("lsa_tol".into(), json!(nonlinear::LSA_TOL));
    for (name, value) in tolerances {
        tol.insert(name.clone(), json!(value));
    }
    json!({
        "command": command,
        "provenance": {
            "version": env!("CARGO_PKG_VERSION"),
            "input_digest": digest,
            "tolerances": Value::Object(tol),
        }
    })
}

fn resolve_tolerances(overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>, String> {
    let mut resolved = BTreeMap::new();
    for (name, default, _) in TOLERANCE_FLOORS {
        resolved.insert((*name).to_string(), *default);
    }
    for (name, value) in overrides {
        let Some((_, _, floor)) = TOLERANCE_FLOORS.iter().find(|(n, _, _)| n == name) else {
            let known: Vec<&str> = TOLERANCE_FLOORS.iter().map(|(n, _, _)| *n).collect();
            return Err(format!(
                "unknown tolerance '{name}'; supported: {}",
                known.join(", ")
            ));
        };
        if !value.is_finite() || *value < *floor {
            return Err(format!(
                "tolerance '{name}' = {value:e} is below its floor {floor:e}"
            ));
        }
        resolved.insert(name.clone(), *value);
    }
    Ok(resolved)
}

fn merge(report: &mut Value, body: Value) {
    if let (Value::Object(dst), Value::Object(src)) = (report, body) {
        for (k, v) in src {
            dst.insert(k, v);
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------
// Deterministic rendering: sorted keys (BTreeMap-backed maps) plus a
// fixed 17-significant-digit float format.
// ---------------------------------------------------------------------

struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Renders a report deterministically.
pub fn render_report(report: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    serde::Serialize::serialize(report, &mut ser).expect("report serialization");
    let mut s = String::from_utf8(buf).expect("utf8 report");
    s.push('\n');
    s
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn matrix_to_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

fn parse_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CmdError> {
    if rows.is_empty() {
        return Err(CmdError::Invalid(format!("{what}: matrix must have rows")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(CmdError::Invalid(format!(
            "{what}: rows must be non-empty and of equal length"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if !flat.iter().all(|v| v.is_finite()) {
        return Err(CmdError::Invalid(format!("{what}: entries must be finite")));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<(), CmdError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CmdError::Invalid(format!("cannot create output directory: {e}")))?;
    let path = out_dir.join(name);
    std::fs::File::create(&path)
        .and_then(|mut f| f.write_all(content.as_bytes()))
        .map_err(|e| CmdError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn from_spec<T: serde::de::DeserializeOwned>(spec: &Value, what: &str) -> Result<T, CmdError> {
    serde_json::from_value(spec.clone()).map_err(|e| CmdError::Invalid(format!("{what}: {e}")))
}

// ---------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifySpec {
    preset: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    theta: Option<Vec<Vec<f64>>>,
}

fn run_classify(spec: &Value) -> CmdResult {
    let parsed: ClassifySpec = from_spec(spec, "classify spec")?;
    let theta = match (&parsed.preset, &parsed.theta) {
        (Some(name), None) => {
            let alpha = parsed.alpha.unwrap_or(0.0);
            let beta = parsed.beta.unwrap_or(0.0);
            presets::linear_bc_matrix(name, alpha, beta).ok_or_else(|| {
                CmdError::Invalid(format!("/preset: unknown boundary condition '{name}'"))
            })?
        }
        (None, Some(rows)) => {
            let m = parse_matrix(rows, "/theta")?;
            if m.ncols() != 4 {
                return Err(CmdError::Invalid("/theta: needs 4 columns".into()));
            }
            m
        }
        _ => {
            return Err(CmdError::Invalid(
                "classify spec needs exactly one of /preset or /theta".into(),
            ))
        }
    };
    let c = boundary::classify_bc(&theta).map_err(|e| CmdError::Invalid(e.to_string()))?;
    let mut residuals = Map::new();
    residuals.insert("isotropy".into(), json!(c.isotropy_residual));
    residuals.insert("coisotropy".into(), json!(c.coisotropy_residual));
    if let Some(p) = c.product_residual {
        residuals.insert("product".into(), json!(p));
    }
    let body = json!({
        "verdict": c.verdict.as_str(),
        "kernel_dim": c.kernel_dim,
        "theta_rank": c.theta_rank,
        "residuals": Value::Object(residuals),
    });
    let code = if c.verdict == BcVerdict::SelfAdjoint { EXIT_PASS } else { EXIT_REJECTED };
    Ok((body, code))
}

// ---------------------------------------------------------------------
// transport
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldSpec {
    name: String,
    dim: usize,
    #[serde(default = "one")]
    constant: f64,
    linear: Option<Vec<f64>>,
    quadratic_diag: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    fn build(&self) -> Result<connection::FormField, CmdError> {
        presets::form_field(
            &self.name,
            self.dim,
            self.constant,
            self.linear.clone().unwrap_or_else(|| vec![0.0; self.dim]),
            self.quadratic_diag.clone().unwrap_or_else(|| vec![0.0; self.dim]),
        )
        .map_err(|e| CmdError::Invalid(format!("/field: {e}")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportSpec {
    field: FieldSpec,
    curve: CurveSpec,
    /// Frame vectors, one per row.
    frame: Vec<Vec<f64>>,
    steps: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSpec {
    from: Vec<f64>,
    to: Vec<f64>,
}

fn run_transport(spec: &Value, out_dir: &Path) -> CmdResult {
    let parsed: TransportSpec = from_spec(spec, "transport spec")?;
    let field = parsed.field.build()?;
    let from = DVector::from_vec(parsed.curve.from.clone());
    let to = DVector::from_vec(parsed.curve.to.clone());
    let curve = Curve::segment(from, to).map_err(|e| CmdError::Invalid(format!("/curve: {e}")))?;
    let frame_rows = parse_matrix(&parsed.frame, "/frame")?;
    let frame = Frame::new(curve.start(), frame_rows.transpose())
        .map_err(|e| CmdError::Invalid(format!("/frame: {e}")))?;
    let (moved, report) = connection::parallel_transport(&field, &curve, &frame, parsed.steps)
        .map_err(|e| match e {
            connection::ConnectionError::InvalidArgument(m) => CmdError::Invalid(m),
            other => CmdError::Rejected(other.to_string(), None),
        })?;

    let mut csv = String::from("vector_index,component_index,value\n");
    for c in 0..moved.vectors.ncols() {
        for r in 0..moved.vectors.nrows() {
            csv.push_str(&format!("{c},{r},{}\n", fmt_f64(moved.vectors[(r, c)])));
        }
    }
    write_file(out_dir, "transported_frame.csv", &csv)?;

    let body = json!({
        "results": {
            "max_drift": report.max_drift,
            "closedness_residual": report.closedness_residual,
            "pairing_start": matrix_to_value(&report.pairing_start),
            "pairing_end": matrix_to_value(&report.pairing_end),
        },
        "outputs": {"frame_csv": "transported_frame.csv"},
    });
    Ok((body, EXIT_PASS))
}

// ---------------------------------------------------------------------
// bvp
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BvpSpec {
    n: usize,
    g: String,
    bc: BcSpec,
    f: ForcingSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BcSpec {
    name: Option<String>,
    #[serde(default)]
    c0: f64,
    #[serde(default)]
    c1: f64,
    theta: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForcingSpec {
    name: Option<String>,
    samples: Option<Vec<f64>>,
}

fn run_bvp(spec: &Value, out_dir: &Path, tolerances: &BTreeMap<String, f64>) -> CmdResult {
    let parsed: BvpSpec = from_spec(spec, "bvp spec")?;
    let op = presets::model_operator(parsed.n, &parsed.g)
        .map_err(|e| CmdError::Invalid(format!("/g: {e}")))?;
    let bc = build_bc(&parsed.bc)?;
    let f = match (&parsed.f.name, &parsed.f.samples) {
        (Some(name), None) => presets::forcing(name, &op)
            .ok_or_else(|| CmdError::Invalid(format!("/f/name: unknown forcing '{name}'")))?,
        (None, Some(samples)) => {
            if samples.len() != parsed.n {
                return Err(CmdError::Invalid(format!(
                    "/f/samples: expected {} values, got {}",
                    parsed.n,
                    samples.len()
                )));
            }
            DVector::from_vec(samples.clone())
        }
        _ => {
            return Err(CmdError::Invalid(
                "/f: needs exactly one of name or samples".into(),
            ))
        }
    };
    let options = SolverOptions {
        newton_tol: tolerances["newton"],
        cert_tol: tolerances["cert"],
        ..SolverOptions::default()
    };
    let sol = match nonlinear::solve_bvp_lsa_with(&op, &bc, &f, &options) {
        Ok(s) => s,
        Err(e @ NonlinearError::NoConvergence { .. })
        | Err(e @ NonlinearError::NotLocallySelfAdjoint { .. }) => {
            return Err(CmdError::Rejected(e.to_string(), None))
        }
        Err(e) => return Err(CmdError::Invalid(e.to_string())),
    };

    let mut csv = String::from("t,u\n");
    for (t, u) in sol.grid.iter().zip(sol.u.iter()) {
        csv.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*u)));
    }
    write_file(out_dir, "solution.csv", &csv)?;

    let cert = &sol.certificate;
    let body = json!({
        "certificate": {
            "iterations": cert.iterations,
            "final_residual": cert.final_residual,
            "newton_tol": cert.newton_tol,
            "lsa_residual": cert.lsa_residual,
            "lsa_tol": cert.lsa_tol,
            "green_residual": cert.green_residual,
            "kernel_pairing": cert.kernel_pairing,
            "cert_tol": cert.cert_tol,
            "passes": cert.passes,
        },
        "outputs": {"solution_csv": "solution.csv"},
    });
    let code = if cert.passes { EXIT_PASS } else { EXIT_REJECTED };
    Ok((body, code))
}

fn build_bc(spec: &BcSpec) -> Result<NonlinearBC, CmdError> {
    match (&spec.name, &spec.theta) {
        (Some(name), None) => presets::boundary_condition(name, spec.c0, spec.c1)
            .map_err(|e| CmdError::Invalid(format!("/bc/name: {e}"))),
        (None, Some(rows)) => {
            let m = parse_matrix(rows, "/bc/theta")?;
            NonlinearBC::linear(m).map_err(|e| CmdError::Invalid(format!("/bc/theta: {e}")))
        }
        _ => Err(CmdError::Invalid(
            "/bc: needs exactly one of name or theta".into(),
        )),
    }
}

// ---------------------------------------------------------------------
// defect
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefectSpec {
    n: usize,
    #[serde(default = "default_g")]
    g: String,
}

fn default_g() -> String {
    "linear".into()
}

fn run_defect(spec: &Value) -> CmdResult {
    let parsed: DefectSpec = from_spec(spec, "defect spec")?;
    let op = presets::model_operator(parsed.n, &parsed.g)
        .map_err(|e| CmdError::Invalid(format!("/g: {e}")))?;
    let zero = op.sample(|_| 0.0);
    let (min_g, max_g) = op
        .linearized_graphs(&zero)
        .map_err(|e| CmdError::Invalid(e.to_string()))?;
    let defect = symplin::graph_defect(&min_g, &max_g)
        .map_err(|e| CmdError::Rejected(e.to_string(), None))?;
    let body = json!({
        "results": {
            "defect": defect,
            "min_graph_dim": min_g.dim(),
            "max_graph_dim": max_g.dim(),
            "ambient_dim": 2 * parsed.n,
        }
    });
    Ok((body, EXIT_PASS))
}

// ---------------------------------------------------------------------
// calkin
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CalkinSpec {
    /// Polynomial coefficient lists, one per Calkin vector.
    vs: Vec<Vec<f64>>,
    #[serde(default = "default_quad_nodes")]
    quad_nodes: usize,
}

fn default_quad_nodes() -> usize {
    64
}

fn run_calkin(spec: &Value) -> CmdResult {
    let parsed: CalkinSpec = from_spec(spec, "calkin spec")?;
    if parsed.vs.is_empty() {
        return Err(CmdError::Invalid("/vs: needs at least one polynomial".into()));
    }
    let vs: Vec<TestFunction> = parsed
        .vs
        .iter()
        .map(|coeffs| TestFunction::polynomial(coeffs))
        .collect();
    let sys = CalkinSystem::new(vs);
    let rep = boundary::calkin_check(&sys, &BoundaryForm::standard(), parsed.quad_nodes)
        .map_err(|e| CmdError::Invalid(e.to_string()))?;
    let body = json!({
        "passes": rep.passes,
        "failed_clause": rep.failed_clause.map(|c| c.as_str()),
        "results": {
            "trace_matrix": matrix_to_value(&rep.trace_matrix),
            "trace_rank": rep.trace_rank,
            "pairing_boundary": matrix_to_value(&rep.pairing_boundary),
            "pairing_quadrature": matrix_to_value(&rep.pairing_quadrature),
            "induced_theta": matrix_to_value(&rep.induced_theta),
        },
        "residuals": {
            "agreement": rep.agreement_residual,
            "max_pairing": rep.max_pairing,
        },
    });
    let code = if rep.passes { EXIT_PASS } else { EXIT_REJECTED };
    Ok((body, code))
}

// ---------------------------------------------------------------------
// frames
// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FramesSpec {
    field: FieldSpec,
    /// Basis of the Lagrangian subspace, one vector per row.
    l_hat: Vec<Vec<f64>>,
    /// Basis of a complementary Lagrangian, one vector per row.
    f0: Vec<Vec<f64>>,
    /// Ray endpoints, one per row.
    points: Vec<Vec<f64>>,
    steps: usize,
}

fn run_frames(spec: &Value, out_dir: &Path) -> CmdResult {
    let parsed: FramesSpec = from_spec(spec, "frames spec")?;
    let field = parsed.field.build()?;
    let l_hat = Subspace::new(parse_matrix(&parsed.l_hat, "/l_hat")?.transpose())
        .map_err(|e| CmdError::Invalid(format!("/l_hat: {e}")))?;
    let f0 = parse_matrix(&parsed.f0, "/f0")?.transpose();
    let points: Vec<DVector<f64>> = parsed
        .points
        .iter()
        .map(|p| DVector::from_vec(p.clone()))
        .collect();
    let frames = connection::lagrangian_frame_field(&field, &l_hat, &f0, &points, parsed.steps)
        .map_err(|e| match e {
            connection::ConnectionError::InvalidArgument(m) => CmdError::Invalid(m),
            other => CmdError::Rejected(other.to_string(), None),
        })?;

    let mut csv = String::from("point_index,vector_kind,vector_index,component_index,value\n");
    for (pi, fr) in frames.iter().enumerate() {
        for (kind, mat) in [("e", &fr.e), ("f", &fr.f)] {
            for c in 0..mat.ncols() {
                for r in 0..mat.nrows() {
                    csv.push_str(&format!("{pi},{kind},{c},{r},{}\n", fmt_f64(mat[(r, c)])));
                }
            }
        }
    }
    write_file(out_dir, "frames.csv", &csv)?;

    let per_point: Vec<Value> = frames
        .iter()
        .map(|fr| {
            json!({
                "tangency": fr.tangency_residual,
                "duality": fr.duality_residual,
                "isotropy": fr.isotropy_residual,
            })
        })
        .collect();
    let body = json!({
        "results": {"frames": per_point.len()},
        "residuals": {"per_point": Value::Array(per_point)},
        "outputs": {"frames_csv": "frames.csv"},
    });
    Ok((body, EXIT_PASS))
}

// ---------------------------------------------------------------------
// argument parsing for the binary
// ---------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "sympbc", version, about = "Classify, construct, and certify self-adjoint boundary conditions")]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON problem specification file.
    #[arg(long)]
    spec: PathBuf,
    /// Directory for CSV outputs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Tolerance overrides as name=value; validated against floors.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a linear boundary condition.
    Classify(CommonArgs),
    /// Parallel transport of a frame with conservation certificate.
    Transport(CommonArgs),
    /// Solve a nonlinear BVP with a certified boundary condition.
    Bvp(CommonArgs),
    /// Defect of the discrete model operator from its graphs.
    Defect(CommonArgs),
    /// Check a Calkin system and emit its induced condition.
    Calkin(CommonArgs),
    /// Lagrangian frame fields along rays.
    Frames(CommonArgs),
    /// List the named presets.
    Presets,
}

fn parse_tol_args(items: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| format!("--tol expects NAME=VALUE, got '{item}'"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| format!("--tol {name}: '{value}' is not a number"))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Entry point used by the binary; prints the report and returns the
/// exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match CliArgs::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exit codes
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (name, common) = match &cli.command {
        Command::Classify(c) => ("classify", Some(c)),
        Command::Transport(c) => ("transport", Some(c)),
        Command::Bvp(c) => ("bvp", Some(c)),
        Command::Defect(c) => ("defect", Some(c)),
        Command::Calkin(c) => ("calkin", Some(c)),
        Command::Frames(c) => ("frames", Some(c)),
        Command::Presets => ("presets", None),
    };
    let outcome = match common {
        None => run(name, b"{}", Path::new("."), &BTreeMap::new()),
        Some(common) => {
            let overrides = match parse_tol_args(&common.tol) {
                Ok(o) => o,
                Err(msg) => {
                    eprintln!("{msg}");
                    return EXIT_INVALID;
                }
            };
            let bytes = match std::fs::read(&common.spec) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", common.spec.display());
                    return EXIT_INVALID;
                }
            };
            run(name, &bytes, &common.out, &overrides)
        }
    };
    print!("{}", render_report(&outcome.report));
    outcome.exit_code
}
