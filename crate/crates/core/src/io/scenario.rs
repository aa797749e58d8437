//! Scenario files and the task runner behind the `blab` command line.
//!
//! A scenario is a JSON document
//!
//! ```json
//! { "bundle": { "summands": [ { "degree": 4 } ] },
//!   "inner_product": { "Q": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]] },
//!   "task": "classify",
//!   "seed": 7,
//!   "params": { "grid": { "n_radii": 5, "n_angles": 9 } } }
//! ```
//!
//! where `inner_product` is either `{ "Q": … }` (a dual inner product) or
//! `{ "V_basis": …, "gram": … }` (a subspace with a form). Every run writes
//! `report.json` into the output directory, also on failure, plus the CSV
//! grids of the task.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::{BundleModel, ChartPoint, GridSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fubini_study::{
    classify, degeneration_path, example62, example62_q, fs_map, phi_map, PathSpec,
    DEFAULT_POSITIVITY_TOL,
};
use crate::hermitian::{CMatrix, ToleranceSpec};
use crate::inner_product::{delta, delta_inverse, DualInnerProduct, SubspaceWithForm};
use crate::io::grid_csv::{emit_grid_csv, read_grid_column, write_atomic};
use crate::io::json::MatrixJson;
use crate::kernel::{
    bergman_section, fit_q_from_kappa, fit_q_from_kernel, kappa_samples, kernel_at,
    kernel_from_signed_basis, sample_kernel_matrix,
};
use crate::spectrum::{minmax_oracle, point_spectrum, signed_trace_at, verify_sum_rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Kernel,
    Section,
    Kappa,
    Spectrum,
    Classify,
    Fs,
    Phi,
    Path,
    Example62,
    Fit,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Kernel => "kernel",
            Task::Section => "section",
            Task::Kappa => "kappa",
            Task::Spectrum => "spectrum",
            Task::Classify => "classify",
            Task::Fs => "fs",
            Task::Phi => "phi",
            Task::Path => "path",
            Task::Example62 => "example62",
            Task::Fit => "fit",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerProductJson {
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<MatrixJson>,
    #[serde(rename = "V_basis", default, skip_serializing_if = "Option::is_none")]
    pub v_basis: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<MatrixJson>,
}

/// Validated inner-product input.
#[derive(Clone, Debug)]
pub enum InnerProductInput {
    Dual(DualInnerProduct),
    Pair(SubspaceWithForm),
}

impl InnerProductJson {
    pub fn parse(&self, tol: &ToleranceSpec) -> Result<InnerProductInput> {
        match (&self.q, &self.v_basis, &self.gram) {
            (Some(q), None, None) => Ok(InnerProductInput::Dual(DualInnerProduct::new(
                q.to_matrix()?,
                tol,
            )?)),
            (None, Some(v), Some(g)) => Ok(InnerProductInput::Pair(SubspaceWithForm::new(
                v.to_matrix()?,
                g.to_matrix()?,
                tol,
            )?)),
            _ => Err(Error::InvalidScenario(
                "inner_product must be exactly one of {\"Q\"} or {\"V_basis\", \"gram\"}".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<ChartPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ChartPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<ChartPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product: Option<InnerProductJson>,
    pub task: Task,
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidScenario(format!("{}: {e}", path.display())))
}

/// Exit status of a run: 0 success, 1 I/O failure, 2 invalid input,
/// 3 mathematical failure.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Io { .. } => 1,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub error: Option<Error>,
    pub artifacts: Vec<String>,
}

/// A task failure together with partial results worth reporting.
struct Failure {
    error: Error,
    details: Option<Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            error,
            details: None,
        }
    }
}

struct Context<'a> {
    scenario: &'a ScenarioFile,
    task: Task,
    base_dir: PathBuf,
    out: &'a Path,
    tol: ToleranceSpec,
    positivity: f64,
    exec: Exec,
    artifacts: Vec<String>,
}

impl Context<'_> {
    fn missing(&self, what: &str) -> Error {
        Error::InvalidScenario(format!("task {} needs {what}", self.task.name()))
    }

    fn model(&self) -> Result<&BundleModel> {
        self.scenario
            .bundle
            .as_ref()
            .ok_or_else(|| self.missing("a bundle"))
    }

    fn input(&self) -> Result<InnerProductInput> {
        self.scenario
            .inner_product
            .as_ref()
            .ok_or_else(|| self.missing("an inner_product"))?
            .parse(&self.tol)
    }

    fn dual(&self) -> Result<DualInnerProduct> {
        Ok(match self.input()? {
            InnerProductInput::Dual(q) => q,
            InnerProductInput::Pair(pair) => delta(&pair),
        })
    }

    fn pair(&self) -> Result<SubspaceWithForm> {
        match self.input()? {
            InnerProductInput::Dual(q) => delta_inverse(&q, &self.tol),
            InnerProductInput::Pair(pair) => Ok(pair),
        }
    }

    fn grid(&self, model: &BundleModel) -> Result<GridSpec> {
        match self.scenario.params.grid {
            Some(g) => GridSpec::new(g.n_radii, g.n_angles),
            None => Ok(GridSpec::for_degree(model.max_degree())),
        }
    }

    fn point(&self) -> Result<ChartPoint> {
        let x = self
            .scenario
            .params
            .point
            .ok_or_else(|| self.missing("params.point"))?;
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(x)
    }

    fn emit(
        &mut self,
        name: &str,
        points: &[ChartPoint],
        columns: &[(&str, &[f64])],
    ) -> Result<()> {
        emit_grid_csv(&self.out.join(name), points, columns)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn matrix_value(m: &CMatrix) -> Value {
    to_value(&MatrixJson::from_matrix(m))
}

fn run_kernel(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let x = ctx.point()?;
    let y = ctx.scenario.params.y.unwrap_or(x);
    let direct = kernel_at(&model, &q, &x, &y)?.value;
    let pair = ctx.pair()?;
    let signed = kernel_from_signed_basis(&model, &pair, &x, &y, &ctx.tol)?;
    let mut out = json!({
        "x": x,
        "y": y,
        "value": matrix_value(&direct),
        "signed_basis_value": matrix_value(&signed),
        "route_discrepancy": (&direct - &signed).iter().fold(0.0f64, |m, z| m.max(z.norm())),
    });
    if let Some(nodes) = &ctx.scenario.params.nodes {
        let samples = sample_kernel_matrix(&model, &q, nodes)?;
        let fitted = fit_q_from_kernel(&model, nodes, &samples, &ctx.tol)?;
        out["node_samples"] = matrix_value(&samples);
        out["recovered_Q"] = matrix_value(fitted.matrix());
        out["recovery_error"] = json!(fitted.max_distance(&q));
    }
    Ok(out)
}

fn run_section(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let grid = ctx.grid(&model)?;
    let points = grid.points();
    let sections = ctx
        .exec
        .map(&points, |x| bergman_section(&model, &q, x))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let r = model.rank();
    let mut names = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for a in 0..r {
        for b in 0..r {
            names.push(format!("k{a}{b}_re"));
            cols.push(sections.iter().map(|k| k[(a, b)].re).collect());
            names.push(format!("k{a}{b}_im"));
            cols.push(sections.iter().map(|k| k[(a, b)].im).collect());
        }
    }
    let columns: Vec<(&str, &[f64])> = names
        .iter()
        .map(String::as_str)
        .zip(cols.iter().map(Vec::as_slice))
        .collect();
    ctx.emit("section.csv", &points, &columns)?;
    Ok(json!({ "grid": grid, "n_points": points.len(), "rank": r }))
}

fn run_kappa(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let grid = ctx.grid(&model)?;
    let samples = kappa_samples(&model, &q, &grid.points(), ctx.exec)?;
    ctx.emit("kappa.csv", &samples.points, &[("kappa", &samples.values)])?;
    let (argmin, min) = samples.min().ok_or(Error::EmptySamples)?;
    Ok(json!({
        "grid": grid,
        "n_points": samples.points.len(),
        "kappa_min": min,
        "kappa_argmin": argmin,
        "kappa_max": samples.max_value(),
    }))
}

fn run_spectrum(ctx: &mut Context) -> std::result::Result<Value, Failure> {
    let model = ctx.model()?.clone();
    let pair = ctx.pair()?;
    let x = ctx.point()?;
    let spectrum = match point_spectrum(&model, &pair, &x, &ctx.tol) {
        Ok(s) => s,
        Err(error @ Error::PencilDegenerate { .. }) => {
            let fallback = signed_trace_at(&model, &pair, &x, &ctx.tol)?;
            let direct = crate::kernel::kappa_at(&model, &delta(&pair), &x)?;
            return Err(Failure {
                error,
                details: Some(
                    json!({ "x": x, "trace_fallback": fallback, "kappa_direct": direct }),
                ),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let rule = verify_sum_rule(&model, &pair, &x, &ctx.tol)?;
    let mut out = json!({
        "x": x,
        "p": spectrum.p,
        "q": spectrum.q,
        "kappa_l": spectrum.kappa_l,
        "c_l": spectrum.c_l,
        "diagonalizable": spectrum.diagonalizable,
        "kappa_direct": rule.kappa_direct,
        "kappa_sum": rule.kappa_sum,
    });
    if let Some(l) = ctx.scenario.params.l {
        let n = ctx.scenario.params.n_samples.unwrap_or(2000);
        let oracle = minmax_oracle(&model, &pair, &x, l, n, ctx.scenario.seed, &ctx.tol)?;
        out["oracle"] = json!({ "l": l, "n_samples": n, "result": oracle });
    }
    Ok(out)
}

fn run_classify(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let grid = ctx.grid(&model)?;
    Ok(to_value(&classify(
        &model,
        &q,
        &grid,
        ctx.positivity,
        ctx.exec,
    )?))
}

fn run_fs(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let grid = ctx.grid(&model)?;
    let pair = match ctx.input()? {
        InnerProductInput::Pair(pair) => pair,
        InnerProductInput::Dual(_) => {
            return Err(
                ctx.missing("an inner product {\"V_basis\", \"gram\"} on the whole section space")
            )
        }
    };
    if pair.dim() != pair.ambient_dim() {
        return Err(ctx.missing("V_basis spanning the whole section space"));
    }
    // the form in monomial coordinates: S^{-*} G S^{-1}
    let s_inv = pair
        .basis()
        .clone()
        .try_inverse()
        .ok_or(Error::RankDeficient {
            rank: 0,
            cols: pair.dim(),
        })?;
    let g = s_inv.adjoint() * pair.gram() * &s_inv;
    let fs = fs_map(&model, &g, &grid, &ctx.tol, ctx.exec)?;
    ctx.emit("fs.csv", &fs.points, &[("log_kappa", &fs.values)])?;
    Ok(json!({ "grid": grid, "n_points": fs.points.len() }))
}

fn run_phi(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let grid = ctx.grid(&model)?;
    let phi = phi_map(&model, &q, &grid, ctx.positivity, ctx.exec)?;
    ctx.emit("phi.csv", &phi.points, &[("log_kappa", &phi.values)])?;
    Ok(json!({ "grid": grid, "n_points": phi.points.len() }))
}

fn run_path(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let q = ctx.dual()?;
    let grid = ctx.grid(&model)?;
    let params = &ctx.scenario.params;
    let direction = params
        .direction
        .as_ref()
        .ok_or_else(|| ctx.missing("params.direction"))?;
    let direction = DualInnerProduct::new(direction.to_matrix()?, &ctx.tol)?;
    let t_values = params
        .t_values
        .clone()
        .ok_or_else(|| ctx.missing("params.t_values"))?;
    let path = PathSpec::new(q, direction, t_values, params.exponent.unwrap_or(1))?;
    Ok(to_value(&degeneration_path(
        &model,
        &path,
        &grid,
        ctx.positivity,
        ctx.exec,
    )?))
}

fn run_example62(ctx: &mut Context) -> Result<Value> {
    let params = &ctx.scenario.params;
    let d = match (params.d, &ctx.scenario.bundle) {
        (Some(d), _) => d,
        (None, Some(model)) => model.require_line()?,
        (None, None) => 4,
    };
    let model = match &ctx.scenario.bundle {
        Some(model) if model.rank() != 1 || model.max_degree() != d => {
            return Err(Error::InvalidScenario(format!(
                "example62 needs a line bundle of degree {d}"
            )))
        }
        Some(model) => model.clone(),
        None => BundleModel::line(d),
    };
    let t_values = params
        .t_values
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.0]);
    let grid = ctx.grid(&model)?;
    let report = example62(&model, &t_values, &grid, ctx.positivity, ctx.exec)?;

    let points = grid.points();
    let names: Vec<String> = t_values.iter().map(|t| format!("kappa[t={t}]")).collect();
    let cols = t_values
        .iter()
        .map(|&t| Ok(kappa_samples(&model, &example62_q(d, t)?, &points, ctx.exec)?.values))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<(&str, &[f64])> = names
        .iter()
        .map(String::as_str)
        .zip(cols.iter().map(Vec::as_slice))
        .collect();
    ctx.emit("example62_kappa.csv", &points, &columns)?;
    Ok(to_value(&report))
}

fn run_fit(ctx: &mut Context) -> Result<Value> {
    let model = ctx.model()?.clone();
    let rel = ctx
        .scenario
        .params
        .kappa_csv
        .as_ref()
        .ok_or_else(|| ctx.missing("params.kappa_csv"))?;
    let samples = read_grid_column(&ctx.base_dir.join(rel), "kappa")?;
    let fit = fit_q_from_kappa(&model, &samples, &ctx.tol)?;
    Ok(json!({
        "n_samples": samples.points.len(),
        "Q": matrix_value(fit.q.matrix()),
        "residual": fit.residual,
    }))
}

fn execute(ctx: &mut Context) -> std::result::Result<Value, Failure> {
    let plain = |r: Result<Value>| r.map_err(Failure::from);
    match ctx.task {
        Task::Kernel => plain(run_kernel(ctx)),
        Task::Section => plain(run_section(ctx)),
        Task::Kappa => plain(run_kappa(ctx)),
        Task::Spectrum => run_spectrum(ctx),
        Task::Classify => plain(run_classify(ctx)),
        Task::Fs => plain(run_fs(ctx)),
        Task::Phi => plain(run_phi(ctx)),
        Task::Path => plain(run_path(ctx)),
        Task::Example62 => plain(run_example62(ctx)),
        Task::Fit => plain(run_fit(ctx)),
    }
}

fn write_report(out: &Path, report: &Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("json values serialize");
    bytes.push(b'\n');
    write_atomic(&out.join("report.json"), &bytes)
}

/// Runs a parsed scenario. `base_dir` resolves relative input paths.
pub fn run(
    scenario: &ScenarioFile,
    task: Option<Task>,
    base_dir: &Path,
    out: &Path,
    exec: Exec,
) -> RunOutcome {
    let task = task.unwrap_or(scenario.task);
    let params = &scenario.params;
    let setup = ToleranceSpec::new(
        params.rank_tol.unwrap_or(1e-10),
        params.residual_tol.unwrap_or(1e-9),
    )
    .and_then(|tol| match params.tol {
        Some(t) if !(t >= 0.0) => Err(Error::InvalidScenario(format!(
            "params.tol = {t} must be >= 0"
        ))),
        _ => Ok(tol),
    });
    let mut ctx = Context {
        scenario,
        task,
        base_dir: base_dir.to_path_buf(),
        out,
        tol: ToleranceSpec::default(),
        positivity: params.tol.unwrap_or(DEFAULT_POSITIVITY_TOL),
        exec,
        artifacts: Vec::new(),
    };
    let result = match setup {
        Ok(tol) => {
            ctx.tol = tol;
            execute(&mut ctx)
        }
        Err(e) => Err(e.into()),
    };
    let artifacts = ctx.artifacts;
    let mut report = json!({ "task": task.name(), "seed": scenario.seed });
    let error = match result {
        Ok(value) => {
            report["status"] = json!("ok");
            report["result"] = value;
            None
        }
        Err(Failure { error, details }) => {
            report["status"] = json!("error");
            report["error"] = json!({ "name": error.name(), "message": error.to_string() });
            if let Some(details) = details {
                report["details"] = details;
            }
            Some(error)
        }
    };
    report["artifacts"] = json!(&artifacts);
    finish(out, report, error, artifacts)
}

fn finish(
    out: &Path,
    report: Value,
    error: Option<Error>,
    mut artifacts: Vec<String>,
) -> RunOutcome {
    match write_report(out, &report) {
        Ok(()) => {
            artifacts.push("report.json".into());
            RunOutcome {
                exit_code: error.as_ref().map_or(0, exit_code_for),
                error,
                artifacts,
            }
        }
        Err(io) => RunOutcome {
            exit_code: 1,
            error: Some(error.unwrap_or(io)),
            artifacts,
        },
    }
}

/// Loads and runs a scenario file, optionally overriding its task.
pub fn run_scenario_as(path: &Path, task: Option<Task>, out: &Path, exec: Exec) -> RunOutcome {
    match load_scenario(path) {
        Ok(scenario) => {
            let base = path.parent().unwrap_or(Path::new("."));
            run(&scenario, task, base, out, exec)
        }
        Err(error) => {
            let report = json!({
                "task": task.map(Task::name),
                "status": "error",
                "error": { "name": error.name(), "message": error.to_string() },
                "artifacts": [],
            });
            finish(out, report, Some(error), Vec::new())
        }
    }
}

pub fn run_scenario(path: &Path, out: &Path) -> RunOutcome {
    run_scenario_as(path, None, out, Exec::default())
}

/// The built-in degenerating family as a scenario.
pub fn example62_scenario(d: usize, t_values: Vec<f64>, grid: Option<GridSpec>) -> ScenarioFile {
    ScenarioFile {
        bundle: None,
        inner_product: None,
        task: Task::Example62,
        seed: 0,
        params: Params {
            d: Some(d),
            t_values: Some(t_values),
            grid,
            ..Params::default()
        },
    }
}
