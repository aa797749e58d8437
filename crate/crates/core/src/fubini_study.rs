//! The Fubini–Study map and its extension `Φ` to positive semidefinite dual
//! inner products with rather ample support, grid certification of
//! rather-ampleness and curvature positivity, classification, and
//! degeneration paths.
//!
//! All certificates here are finite: each minimum is taken over a
//! [`GridSpec`] grid on both charts followed by one refinement pass on a
//! small patch around the grid argmin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::{refinement_patch, BundleModel, ChartPoint, GridSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hermitian::{inertia_of, singular_values, CMatrix, Inertia, ToleranceSpec};
use crate::inner_product::{
    classify_inertia, delta, delta_inverse, DualInnerProduct, SubspaceWithForm,
};
use crate::kernel::{fit_q_from_kappa, kappa_at, kappa_fit_grid, kappa_samples};

/// Default threshold for the positivity certificates (`κ`, curvature and
/// the second singular value of the jet matrix).
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-9;

/// Minimum of `f` over `points`, refined once around the argmin. Ties keep
/// the earliest point.
fn refined_min<F>(
    points: &[ChartPoint],
    spacing: f64,
    exec: Exec,
    f: F,
) -> Result<(f64, ChartPoint)>
where
    F: Fn(&ChartPoint) -> Result<f64> + Sync + Send,
{
    let scan = |pts: &[ChartPoint]| -> Result<Option<(f64, ChartPoint)>> {
        let values = exec.map(pts, &f);
        let mut best: Option<(f64, ChartPoint)> = None;
        for (x, v) in pts.iter().zip(values) {
            let v = v?;
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, *x));
            }
        }
        Ok(best)
    };
    let (coarse, at) = scan(points)?.ok_or(Error::EmptySamples)?;
    match scan(&refinement_patch(&at, spacing))? {
        Some((fine, at_fine)) if fine < coarse => Ok((fine, at_fine)),
        _ => Ok((coarse, at)),
    }
}

fn check_dim(model: &BundleModel, n: usize) -> Result<()> {
    if model.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "inner product has dimension {n}, bundle model has {}",
            model.dim()
        )));
    }
    Ok(())
}

/// `log κ` sampled on grid points.
#[derive(Clone, Debug, Serialize)]
pub struct LogKappa {
    pub points: Vec<ChartPoint>,
    pub values: Vec<f64>,
}

fn log_kappa(
    model: &BundleModel,
    q: &DualInnerProduct,
    points: &[ChartPoint],
    exec: Exec,
) -> Result<LogKappa> {
    let samples = kappa_samples(model, q, points, exec)?;
    Ok(LogKappa {
        points: samples.points,
        values: samples.values.iter().map(|v| v.ln()).collect(),
    })
}

/// `FS(G) = log κ` of the dual of a positive definite inner product `G` on
/// the full section space.
pub fn fs_map(
    model: &BundleModel,
    g: &CMatrix,
    grid: &GridSpec,
    tol: &ToleranceSpec,
    exec: Exec,
) -> Result<LogKappa> {
    model.require_line()?;
    check_dim(model, g.nrows())?;
    let inertia = inertia_of(g, tol)?;
    if !inertia.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            p: inertia.p,
            q: inertia.q,
            z: inertia.z,
        });
    }
    let pair = SubspaceWithForm::full(g.clone(), tol)?;
    log_kappa(model, &delta(&pair), &grid.points(), exec)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatherAmple {
    pub rather_ample: bool,
    pub min_sigma2: f64,
    pub argmin: ChartPoint,
}

/// Second singular value of `[E(x) U; E′(x) U]` with `U` an orthonormal
/// basis of the span of `basis`.
fn jet_sigma2(model: &BundleModel, u: &CMatrix, x: &ChartPoint) -> Result<f64> {
    if u.ncols() < 2 {
        return Ok(0.0);
    }
    let jet = model.jet_row(x)?;
    let mut m = CMatrix::zeros(2, u.ncols());
    m.row_mut(0).copy_from(&(&jet.value_row * u));
    m.row_mut(1).copy_from(&(&jet.derivative_row * u));
    Ok(singular_values(&m)[1])
}

/// Grid certificate that the span of the pair's basis is rather ample:
/// values and first derivatives of its sections span the 1-jets at every
/// point (both charts, including `∞`).
pub fn rather_ample_test(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    grid: &GridSpec,
    tol: f64,
    exec: Exec,
) -> Result<RatherAmple> {
    model.require_line()?;
    check_dim(model, pair.ambient_dim())?;
    let u = if pair.dim() == 0 {
        CMatrix::zeros(model.dim(), 0)
    } else {
        pair.basis().clone().qr().q()
    };
    let (min_sigma2, argmin) = refined_min(&grid.points(), grid.spacing(), exec, |x| {
        jet_sigma2(model, &u, x)
    })?;
    Ok(RatherAmple {
        rather_ample: min_sigma2 > tol,
        min_sigma2,
        argmin,
    })
}

/// `P = E Q E*`, `P_z = E′ Q E*`, `P_zz̄ = E′ Q E′*` at one point.
fn potential_jet(
    model: &BundleModel,
    q: &DualInnerProduct,
    x: &ChartPoint,
) -> Result<(f64, Complex64, f64)> {
    let jet = model.jet_row(x)?;
    let qm = q.matrix();
    let p = (&jet.value_row * qm * jet.value_row.adjoint())[(0, 0)].re;
    let p_z = (&jet.derivative_row * qm * jet.value_row.adjoint())[(0, 0)];
    let p_zz = (&jet.derivative_row * qm * jet.derivative_row.adjoint())[(0, 0)].re;
    Ok((p, p_z, p_zz))
}

/// `D = ∂∂̄ log P = (P·P_zz̄ − |P_z|²)/P²` in the chart coordinate of `x`.
pub fn curvature_at(model: &BundleModel, q: &DualInnerProduct, x: &ChartPoint) -> Result<f64> {
    check_dim(model, q.dim())?;
    let (p, p_z, p_zz) = potential_jet(model, q, x)?;
    if !(p > 0.0) {
        return Err(Error::NonpositiveKappa {
            point: *x,
            value: p,
        });
    }
    Ok((p * p_zz - p_z.norm_sqr()) / (p * p))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureCheck {
    pub min: f64,
    pub argmin: ChartPoint,
}

pub fn curvature_check(
    model: &BundleModel,
    q: &DualInnerProduct,
    grid: &GridSpec,
    exec: Exec,
) -> Result<CurvatureCheck> {
    model.require_line()?;
    check_dim(model, q.dim())?;
    let (min, argmin) = refined_min(&grid.points(), grid.spacing(), exec, |x| {
        curvature_at(model, q, x)
    })?;
    Ok(CurvatureCheck { min, argmin })
}

/// Rejects weights whose own curvature density is not positive on the grid.
fn check_weight_curvature(model: &BundleModel, grid: &GridSpec) -> Result<()> {
    let mut worst: Option<(f64, ChartPoint)> = None;
    for x in grid.points() {
        for density in model.weight_curvature_at(&x) {
            if worst.is_none_or(|(w, _)| density < w) {
                worst = Some((density, x));
            }
        }
    }
    match worst {
        Some((min_density, point)) if min_density <= 0.0 => {
            Err(Error::UnsupportedWeight { point, min_density })
        }
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub inertia: Inertia,
    pub kappa_min_on_grid: f64,
    pub kappa_argmin: ChartPoint,
    /// Absent when `κ` is not positive on the grid.
    pub curvature_min_on_grid: Option<f64>,
    pub curvature_argmin: Option<ChartPoint>,
    pub rather_ample: bool,
    pub min_sigma2: f64,
    #[serde(rename = "in_delta_HE")]
    pub in_delta_he: bool,
    #[serde(rename = "in_A_E")]
    pub in_a_e: bool,
    #[serde(rename = "in_P_E")]
    pub in_p_e: bool,
    pub grid: GridSpec,
    pub tol: f64,
}

/// Places `Q` relative to the image of positive definite inner products,
/// the set of positive semidefinite forms with rather ample support, and the
/// set of forms with positive `κ` and positive curvature.
///
/// For positive semidefinite `Q` with `κ > tol` on the grid, rather-ampleness
/// and curvature positivity must agree; a disagreement means `tol` does not
/// separate the two certificates and is reported as
/// [`Error::ConsistencyViolation`].
pub fn classify(
    model: &BundleModel,
    q: &DualInnerProduct,
    grid: &GridSpec,
    tol: f64,
    exec: Exec,
) -> Result<ClassificationReport> {
    model.require_line()?;
    check_dim(model, q.dim())?;
    check_weight_curvature(model, grid)?;
    let spec = ToleranceSpec::default();
    let inertia = classify_inertia(q, &spec)?;

    let (kappa_min, kappa_argmin) = refined_min(&grid.points(), grid.spacing(), exec, |x| {
        kappa_at(model, q, x)
    })?;
    let curvature = if kappa_min > tol {
        Some(curvature_check(model, q, grid, exec)?)
    } else {
        None
    };
    let pair = delta_inverse(q, &spec)?;
    let ample = rather_ample_test(model, &pair, grid, tol, exec)?;

    let psd = inertia.is_positive_semidefinite() && !inertia.is_zero();
    let curvature_positive = curvature.is_some_and(|c| c.min > tol);
    if psd && kappa_min > tol && ample.rather_ample != curvature_positive {
        return Err(Error::ConsistencyViolation {
            rather_ample: ample.rather_ample,
            curvature_positive,
        });
    }
    Ok(ClassificationReport {
        inertia,
        kappa_min_on_grid: kappa_min,
        kappa_argmin,
        curvature_min_on_grid: curvature.map(|c| c.min),
        curvature_argmin: curvature.map(|c| c.argmin),
        rather_ample: ample.rather_ample,
        min_sigma2: ample.min_sigma2,
        in_delta_he: inertia.is_positive_definite(),
        in_a_e: psd && ample.rather_ample,
        in_p_e: kappa_min > tol && curvature_positive,
        grid: *grid,
        tol,
    })
}

/// `Φ(Q) = log κ_Q`, defined for `Q` in the positive semidefinite, rather
/// ample class.
pub fn phi_map(
    model: &BundleModel,
    q: &DualInnerProduct,
    grid: &GridSpec,
    tol: f64,
    exec: Exec,
) -> Result<LogKappa> {
    let report = classify(model, q, grid, tol, exec)?;
    if !report.in_a_e {
        return Err(Error::NotInAE);
    }
    log_kappa(model, q, &grid.points(), exec)
}

/// The family `Q_t = Q_start + t^k · Q_direction`.
#[derive(Clone, Debug)]
pub struct PathSpec {
    pub q_start: DualInnerProduct,
    pub q_direction: DualInnerProduct,
    pub t_values: Vec<f64>,
    pub exponent: u32,
}

impl PathSpec {
    pub fn new(
        q_start: DualInnerProduct,
        q_direction: DualInnerProduct,
        t_values: Vec<f64>,
        exponent: u32,
    ) -> Result<Self> {
        if q_start.dim() != q_direction.dim() {
            return Err(Error::DimensionMismatch(format!(
                "path start has dimension {}, direction {}",
                q_start.dim(),
                q_direction.dim()
            )));
        }
        if let Some(t) = t_values.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidScenario(format!(
                "path parameter t = {t} must be finite and >= 0"
            )));
        }
        if exponent == 0 {
            return Err(Error::InvalidScenario("path exponent must be >= 1".into()));
        }
        Ok(PathSpec {
            q_start,
            q_direction,
            t_values,
            exponent,
        })
    }

    pub fn at(&self, t: f64) -> Result<DualInnerProduct> {
        self.q_start
            .add_scaled(&self.q_direction, t.powi(self.exponent as i32))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathStep {
    pub t: f64,
    pub report: ClassificationReport,
    /// `max |log κ_t − log κ_start|` on the grid; absent where either `κ`
    /// is not positive.
    pub sup_log_distance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitAnalysis {
    pub report: ClassificationReport,
    /// Max-norm distance between `Q_start` and the form refitted from its
    /// own `κ` samples.
    pub recovery_error: f64,
    pub fit_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub steps: Vec<PathStep>,
    pub limit: LimitAnalysis,
    /// Distances shrink as `t` decreases.
    pub monotone: bool,
}

pub fn degeneration_path(
    model: &BundleModel,
    path: &PathSpec,
    grid: &GridSpec,
    tol: f64,
    exec: Exec,
) -> Result<PathReport> {
    let d = model.require_line()?;
    check_dim(model, path.q_start.dim())?;
    let points = grid.points();
    let limit_kappa = kappa_samples(model, &path.q_start, &points, exec)?;

    // path steps run in parallel, each one sequentially inside
    let steps = exec.map(&path.t_values, |&t| -> Result<PathStep> {
        let q_t = path.at(t)?;
        let report = classify(model, &q_t, grid, tol, Exec::Sequential)?;
        let kappa_t = kappa_samples(model, &q_t, &points, Exec::Sequential)?;
        let mut dist = Some(0.0f64);
        for (a, b) in kappa_t.values.iter().zip(&limit_kappa.values) {
            dist = match dist {
                Some(m) if *a > 0.0 && *b > 0.0 => Some(m.max((a.ln() - b.ln()).abs())),
                _ => None,
            };
        }
        Ok(PathStep {
            t,
            report,
            sup_log_distance: dist,
        })
    });
    let steps: Vec<PathStep> = steps.into_iter().collect::<Result<_>>()?;

    let report = classify(model, &path.q_start, grid, tol, exec)?;
    let fit_samples = kappa_samples(model, &path.q_start, &kappa_fit_grid(d), exec)?;
    let fit = fit_q_from_kappa(model, &fit_samples, &ToleranceSpec::default())?;

    let mut by_t: Vec<&PathStep> = steps.iter().collect();
    by_t.sort_by(|a, b| b.t.total_cmp(&a.t));
    let monotone = by_t
        .windows(2)
        .all(|w| match (w[0].sup_log_distance, w[1].sup_log_distance) {
            (Some(a), Some(b)) => b <= a + 1e-12,
            _ => false,
        });
    Ok(PathReport {
        steps,
        limit: LimitAnalysis {
            report,
            recovery_error: fit.q.max_distance(&path.q_start),
            fit_residual: fit.residual,
        },
        monotone,
    })
}

/// `diag(1, 1, t², 1, …, 1)` on `O(d)`, `d ≥ 4`.
pub fn example62_q(d: usize, t: f64) -> Result<DualInnerProduct> {
    if d < 4 {
        return Err(Error::InvalidScenario(format!(
            "the degenerating family needs d >= 4, got {d}"
        )));
    }
    let mut diag = vec![1.0; d + 1];
    diag[2] = t * t;
    Ok(DualInnerProduct::from_real_diagonal(&diag))
}

/// The path `diag(1,1,0,1,…,1) + t²·e₂e₂*`.
pub fn example62_path(d: usize, t_values: Vec<f64>) -> Result<PathSpec> {
    let start = example62_q(d, 0.0)?;
    let mut dir = vec![0.0; d + 1];
    dir[2] = 1.0;
    PathSpec::new(
        start,
        DualInnerProduct::from_real_diagonal(&dir),
        t_values,
        2,
    )
}

/// `κ_t` in closed form: `a(x)·Σ_k c_k |x|^{2k}` with `c_k` the diagonal
/// read in the orientation of the chart.
pub fn example62_closed_form(model: &BundleModel, t: f64, x: &ChartPoint) -> Result<f64> {
    let d = model.require_line()?;
    let q = example62_q(d, t)?;
    let r2 = x.coord.norm_sqr();
    let sum: f64 = (0..=d)
        .map(|k| {
            let idx = match x.chart {
                crate::bundle::Chart::Z => k,
                crate::bundle::Chart::W => d - k,
            };
            q.matrix()[(idx, idx)].re * r2.powi(k as i32)
        })
        .sum();
    Ok(model.weight_at(x)[0] * sum)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub t: f64,
    pub max_relative_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example62Report {
    pub d: usize,
    pub closed_form: Vec<ClosedFormCheck>,
    pub path: PathReport,
    /// The limit is positive semidefinite with rather ample support but not
    /// positive definite.
    pub limit_in_closure_only: bool,
}

pub fn example62(
    model: &BundleModel,
    t_values: &[f64],
    grid: &GridSpec,
    tol: f64,
    exec: Exec,
) -> Result<Example62Report> {
    let d = model.require_line()?;
    let path = example62_path(d, t_values.to_vec())?;
    let points = grid.points();
    let closed_form = t_values
        .iter()
        .map(|&t| -> Result<ClosedFormCheck> {
            let q = example62_q(d, t)?;
            let computed = kappa_samples(model, &q, &points, exec)?;
            let mut worst = 0.0f64;
            for (x, v) in points.iter().zip(&computed.values) {
                let expected = example62_closed_form(model, t, x)?;
                worst = worst.max((v - expected).abs() / expected.abs());
            }
            Ok(ClosedFormCheck {
                t,
                max_relative_error: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let path = degeneration_path(model, &path, grid, tol, exec)?;
    let limit = &path.limit.report;
    let limit_in_closure_only = limit.in_a_e && !limit.in_delta_he;
    Ok(Example62Report {
        d,
        closed_form,
        path,
        limit_in_closure_only,
    })
}
