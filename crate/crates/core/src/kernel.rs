//! Bergman kernels `K`, Bergman sections `k` and Bergman functions `κ` of
//! dual inner products, together with their inverses from samples and the
//! finite-point positivity witness.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::bundle::{BundleModel, Chart, ChartPoint, Section};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hermitian::{
    check_finite, hermitian_eigen_unchecked, least_squares, signed_onb, singular_values,
    symmetrize, CMatrix, ToleranceSpec,
};
use crate::inner_product::{delta, DualInnerProduct, SubspaceWithForm};

fn check_model_dim(model: &BundleModel, n: usize) -> Result<()> {
    if model.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "inner product has dimension {n}, bundle model has {}",
            model.dim()
        )));
    }
    Ok(())
}

/// `K(x, y)` as an `r × r` matrix in the trivializations of the charts of
/// `x` and `y`.
#[derive(Clone, Debug)]
pub struct KernelValue {
    pub x: ChartPoint,
    pub y: ChartPoint,
    pub value: CMatrix,
}

pub fn kernel_at(
    model: &BundleModel,
    q: &DualInnerProduct,
    x: &ChartPoint,
    y: &ChartPoint,
) -> Result<KernelValue> {
    check_model_dim(model, q.dim())?;
    let value = model.evaluation_row(x) * q.matrix() * model.evaluation_row(y).adjoint();
    Ok(KernelValue {
        x: *x,
        y: *y,
        value,
    })
}

/// The same kernel assembled from a signed orthonormal basis `s_j` of the
/// pair: `K(x, y) = Σ_{j≤p} s_j(x) s_j(y)* − Σ_{j>p} s_j(x) s_j(y)*`.
pub fn kernel_from_signed_basis(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    y: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<CMatrix> {
    check_model_dim(model, pair.ambient_dim())?;
    let r = model.rank();
    if pair.dim() == 0 {
        return Ok(CMatrix::zeros(r, r));
    }
    let signed = signed_onb(pair.gram(), tol)?;
    let sections = pair.basis() * &signed.transform;
    let at_x = model.evaluation_row(x) * &sections;
    let at_y = model.evaluation_row(y) * &sections;
    let mut k = CMatrix::zeros(r, r);
    for (j, sign) in signed.signs.iter().enumerate() {
        k += (at_x.column(j) * at_y.column(j).adjoint()).scale(sign.value());
    }
    Ok(k)
}

/// `k(x) = K(x, x)`.
pub fn bergman_section(
    model: &BundleModel,
    q: &DualInnerProduct,
    x: &ChartPoint,
) -> Result<CMatrix> {
    Ok(kernel_at(model, q, x, x)?.value)
}

/// `κ(x) = Σ_a weight_a(x) · k_aa(x)`.
pub fn kappa_at(model: &BundleModel, q: &DualInnerProduct, x: &ChartPoint) -> Result<f64> {
    let k = bergman_section(model, q, x)?;
    Ok(model
        .weight_at(x)
        .iter()
        .enumerate()
        .map(|(a, w)| w * k[(a, a)].re)
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaSamples {
    pub points: Vec<ChartPoint>,
    pub values: Vec<f64>,
}

impl KappaSamples {
    pub fn new(points: Vec<ChartPoint>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(KappaSamples { points, values })
    }

    pub fn min(&self) -> Option<(ChartPoint, f64)> {
        self.points
            .iter()
            .zip(&self.values)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(p, v)| (*p, *v))
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn kappa_samples(
    model: &BundleModel,
    q: &DualInnerProduct,
    points: &[ChartPoint],
    exec: Exec,
) -> Result<KappaSamples> {
    check_model_dim(model, q.dim())?;
    let values = exec.map(points, |x| {
        kappa_at(model, q, x).expect("dimension checked")
    });
    Ok(KappaSamples {
        points: points.to_vec(),
        values,
    })
}

/// Residual of the reproducing identity `η s(y) = ⟨s, η̄K⟩`, maximized over
/// the unit covectors `η = e_a`. The right-hand side is evaluated in the
/// coordinates of the pair's basis.
pub fn reproducing_check(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    s: &Section,
    y: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<f64> {
    check_model_dim(model, pair.ambient_dim())?;
    check_model_dim(model, s.coeffs.len())?;
    let target = CMatrix::from_column_slice(s.coeffs.len(), 1, s.coeffs.as_slice());
    let (alpha, residual) = least_squares(pair.basis(), &target);
    if residual > tol.residual_tol * target.norm().max(1.0) {
        return Err(Error::NotInSubspace { residual });
    }
    let q = delta(pair);
    let rows = model.evaluation_row(y);
    let mut worst = 0.0f64;
    for a in 0..model.rank() {
        let row_a = rows.rows(a, 1).into_owned();
        let lhs = (&row_a * &target)[(0, 0)];
        // η̄K = (id ⊗ η̄) K(·, y) has coefficient vector Q E_a(y)*
        let coeffs = q.matrix() * row_a.adjoint();
        let (beta, _) = least_squares(pair.basis(), &coeffs);
        let rhs = (beta.adjoint() * pair.gram() * &alpha)[(0, 0)];
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `N` equally spaced nodes on the unit circle of the `z` chart; their
/// Vandermonde matrix is a scaled unitary.
pub fn circle_nodes(n: usize) -> Vec<ChartPoint> {
    (0..n)
        .map(|j| {
            ChartPoint::z(Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * j as f64 / n as f64,
            ))
        })
        .collect()
}

/// Rows `E(x_i)` stacked: `(r·n) × N`.
fn stacked_rows(model: &BundleModel, nodes: &[ChartPoint]) -> CMatrix {
    let r = model.rank();
    let mut w = CMatrix::zeros(r * nodes.len(), model.dim());
    for (i, x) in nodes.iter().enumerate() {
        w.rows_mut(i * r, r).copy_from(&model.evaluation_row(x));
    }
    w
}

/// Kernel block matrix `[K(x_i, x_j)]` over a node set.
pub fn sample_kernel_matrix(
    model: &BundleModel,
    q: &DualInnerProduct,
    nodes: &[ChartPoint],
) -> Result<CMatrix> {
    check_model_dim(model, q.dim())?;
    let w = stacked_rows(model, nodes);
    Ok(&w * q.matrix() * w.adjoint())
}

/// Condition number above which a node set is rejected.
const MAX_NODE_CONDITION: f64 = 1e12;

/// Inverts kernel sampling: `Q = V⁻¹ [K(x_i, x_j)] V⁻*` with `V` the stacked
/// evaluation rows at the nodes, which must form a square invertible matrix.
pub fn fit_q_from_kernel(
    model: &BundleModel,
    nodes: &[ChartPoint],
    kernel: &CMatrix,
    tol: &ToleranceSpec,
) -> Result<DualInnerProduct> {
    check_finite(kernel)?;
    let n = model.dim();
    if nodes.len() * model.rank() != n {
        return Err(Error::SingularNodes(format!(
            "need rank·nodes = {n} evaluation rows, got {}",
            nodes.len() * model.rank()
        )));
    }
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "kernel samples are {}x{}, expected {n}x{n}",
            kernel.nrows(),
            kernel.ncols()
        )));
    }
    let v = stacked_rows(model, nodes);
    let s = singular_values(&v);
    let (top, bottom) = (s[0], *s.last().expect("n >= 1"));
    if !(bottom > 0.0) || top / bottom > MAX_NODE_CONDITION {
        return Err(Error::SingularNodes(format!(
            "evaluation matrix has condition number {:e}",
            top / bottom
        )));
    }
    let lu = v.lu();
    let x = lu
        .solve(kernel)
        .ok_or_else(|| Error::SingularNodes("singular evaluation matrix".into()))?;
    // Q = X V⁻*  ⇔  V Q* = X*
    let q_adj = lu
        .solve(&x.adjoint())
        .ok_or_else(|| Error::SingularNodes("singular evaluation matrix".into()))?;
    DualInnerProduct::new(q_adj.adjoint(), tol)
}

/// `(d+1)` radii in `[1/2, 2]` times `(2d+1)` equally spaced angles: the
/// moment system of [`fit_q_from_kappa`] is uniquely solvable on
/// this grid for degree-`d` line bundles.
pub fn kappa_fit_grid(degree: usize) -> Vec<ChartPoint> {
    let n_radii = degree + 1;
    let n_angles = 2 * degree + 1;
    let mut out = Vec::with_capacity(n_radii * n_angles);
    for a in 0..n_radii {
        // Chebyshev nodes in log r on [1/2, 2]; radii beyond the unit circle
        // are placed in the W chart
        let u = ((2 * a + 1) as f64 * std::f64::consts::PI / (2 * n_radii) as f64).cos();
        let log_r = u * std::f64::consts::LN_2;
        for j in 0..n_angles {
            let angle = std::f64::consts::TAU * j as f64 / n_angles as f64;
            if log_r <= 0.0 {
                out.push(ChartPoint::z(Complex64::from_polar(log_r.exp(), angle)));
            } else {
                out.push(ChartPoint::w(Complex64::from_polar((-log_r).exp(), -angle)));
            }
        }
    }
    out
}

/// Result of a moment fit, with the quality numbers needed by callers.
#[derive(Clone, Debug)]
pub struct KappaFit {
    pub q: DualInnerProduct,
    /// Max absolute misfit `|κ_i − L(Q)(x_i)|` over the samples.
    pub residual: f64,
}

/// Recovers `Q` from Bergman-function samples of a line bundle by solving the
/// real linear moment system `κ(x) = a(x)·E(x) Q E(x)*` for the `N²` real
/// parameters of a hermitian `Q`.
pub fn fit_q_from_kappa(
    model: &BundleModel,
    samples: &KappaSamples,
    tol: &ToleranceSpec,
) -> Result<KappaFit> {
    model.require_line()?;
    let n = model.dim();
    let unknowns = n * n;
    let rows = samples.points.len();
    if rows < unknowns {
        return Err(Error::SingularNodes(format!(
            "{rows} samples cannot determine {unknowns} real parameters"
        )));
    }
    // parameter order: Q_ii (re), then (re, im) of Q_ij for i < j
    let mut a = DMatrix::<f64>::zeros(rows, unknowns);
    let mut b = DMatrix::<f64>::zeros(rows, 1);
    for (row, (x, &kappa)) in samples.points.iter().zip(&samples.values).enumerate() {
        let weight = model.weight_at(x)[0];
        let e = model.evaluation_row(x).scale(weight.sqrt());
        let mut col = 0;
        for i in 0..n {
            a[(row, col)] = e[(0, i)].norm_sqr();
            col += 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let c = e[(0, i)] * e[(0, j)].conj();
                a[(row, col)] = 2.0 * c.re;
                a[(row, col + 1)] = -2.0 * c.im;
                col += 2;
            }
        }
        b[(row, 0)] = kappa;
    }
    // column equilibration
    let scales: Vec<f64> = (0..unknowns)
        .map(|c| a.column(c).amax().max(f64::MIN_POSITIVE))
        .collect();
    for (c, s) in scales.iter().enumerate() {
        a.column_mut(c).unscale_mut(*s);
    }
    let svd = nalgebra::linalg::SVD::new(a.clone(), true, true);
    let top = svd.singular_values.max();
    let bottom = svd.singular_values.min();
    if !(bottom > 1e-13 * top) {
        return Err(Error::SingularNodes(format!(
            "moment system is rank deficient (singular values {top:e} .. {bottom:e})"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::SingularNodes(e.to_string()))?;

    let mut q = CMatrix::zeros(n, n);
    let mut col = 0;
    for i in 0..n {
        q[(i, i)] = Complex64::new(x[(col, 0)] / scales[col], 0.0);
        col += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(x[(col, 0)] / scales[col], x[(col + 1, 0)] / scales[col + 1]);
            q[(i, j)] = z;
            q[(j, i)] = z.conj();
            col += 2;
        }
    }
    let q = DualInnerProduct::from_hermitian_unchecked(q);
    let residual = samples
        .points
        .iter()
        .zip(&samples.values)
        .map(|(x, &kappa)| (kappa_at(model, &q, x).expect("dimension matches") - kappa).abs())
        .fold(0.0f64, f64::max);
    let scale = samples
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    if residual > tol.residual_tol * scale {
        return Err(Error::NotInRange { residual });
    }
    Ok(KappaFit { q, residual })
}

/// A witness point with a covector `ξ ∈ E_x^*` (length `r`).
#[derive(Clone, Debug)]
pub struct WitnessPoint {
    pub x: ChartPoint,
    pub covector: Vec<Complex64>,
}

impl WitnessPoint {
    /// `ξ = 1` in the chart trivialization of a line bundle.
    pub fn unit(x: ChartPoint) -> Self {
        WitnessPoint {
            x,
            covector: vec![Complex64::new(1.0, 0.0)],
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Witness {
    /// `+∞` when there are no points.
    pub min_eigenvalue: f64,
    pub dim: usize,
}

/// Smallest eigenvalue of `((ξ_i ⊗ ξ̄_j) K(x_i, x_j))_{ij} = W Q W*`, where
/// row `i` of `W` is `ξ_i E(x_i)`.
pub fn psd_witness(
    model: &BundleModel,
    q: &DualInnerProduct,
    points: &[WitnessPoint],
) -> Result<Witness> {
    check_model_dim(model, q.dim())?;
    if points.is_empty() {
        return Ok(Witness {
            min_eigenvalue: f64::INFINITY,
            dim: 0,
        });
    }
    let mut w = CMatrix::zeros(points.len(), model.dim());
    for (i, p) in points.iter().enumerate() {
        if p.covector.len() != model.rank() {
            return Err(Error::DimensionMismatch(format!(
                "covector has length {}, bundle rank is {}",
                p.covector.len(),
                model.rank()
            )));
        }
        let xi = CMatrix::from_row_slice(1, model.rank(), &p.covector);
        w.row_mut(i).copy_from(&(xi * model.evaluation_row(&p.x)));
    }
    let m = symmetrize(&(&w * q.matrix() * w.adjoint()));
    let eig = hermitian_eigen_unchecked(&m);
    Ok(Witness {
        min_eigenvalue: eig.values[0],
        dim: points.len(),
    })
}

/// Kernel and section values on chart points of the `W` chart use the
/// reversal-transformed coefficients; this helper exposes that transform of
/// `Q` for line bundles (`Π Q Π`, `Π` the reversal permutation).
pub fn reversal_transform(q: &DualInnerProduct) -> DualInnerProduct {
    let n = q.dim();
    let m = q.matrix();
    DualInnerProduct::from_hermitian_unchecked(CMatrix::from_fn(n, n, |i, j| {
        m[(n - 1 - i, n - 1 - j)]
    }))
}

/// `K(x, y)` for a line bundle written with the chart-`Z` monomial row only,
/// switching to the reversal-transformed `Q` on chart `W`.
pub fn line_kernel_via_reversal(
    model: &BundleModel,
    q: &DualInnerProduct,
    x: &ChartPoint,
    y: &ChartPoint,
) -> Result<Complex64> {
    let d = model.require_line()?;
    let monomials = |c: Complex64| CMatrix::from_fn(1, d + 1, |_, j| c.powi(j as i32));
    let reversed = reversal_transform(q);
    let pick = |p: &ChartPoint| match p.chart {
        Chart::Z => q.matrix().clone(),
        Chart::W => reversed.matrix().clone(),
    };
    if x.chart != y.chart {
        return Err(Error::DimensionMismatch("points must share a chart".into()));
    }
    Ok((monomials(x.coord) * pick(x) * monomials(y.coord).adjoint())[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::validation_grid;
    use crate::inner_product::{classify_inertia, delta_inverse};
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceSpec {
        ToleranceSpec::default()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kernel_examples_degree_one() {
        let m = BundleModel::line(1);
        let q = DualInnerProduct::identity(2);
        let k = |x: f64, y: f64| {
            kernel_at(&m, &q, &ChartPoint::z_re(x), &ChartPoint::z_re(y))
                .unwrap()
                .value[(0, 0)]
        };
        assert_eq!(k(1.0, 0.0), c(1.0));
        assert_eq!(k(1.0, 1.0), c(2.0));

        let q = DualInnerProduct::from_real_diagonal(&[1.0, -1.0]);
        for r in [0.0, 0.5, 1.0] {
            let x = ChartPoint::z(Complex64::from_polar(r, 0.7));
            let v = kernel_at(&m, &q, &x, &x).unwrap().value[(0, 0)];
            assert_abs_diff_eq!(v.re, 1.0 - r * r, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_at_origin_is_corner_entry() {
        let mut rng = crate::random::rng_from_seed(3);
        let m = BundleModel::line(3);
        let q = crate::random::random_dual(&mut rng, 4);
        let o = ChartPoint::z_re(0.0);
        assert_eq!(
            kernel_at(&m, &q, &o, &o).unwrap().value[(0, 0)],
            q.matrix()[(0, 0)]
        );
    }

    #[test]
    fn section_examples() {
        let m1 = BundleModel::line(1);
        assert_eq!(
            bergman_section(&m1, &DualInnerProduct::identity(2), &ChartPoint::z_re(1.0)).unwrap()
                [(0, 0)],
            c(2.0)
        );

        let m4 = BundleModel::line(4);
        let t: f64 = 0.7;
        let q = DualInnerProduct::from_real_diagonal(&[1.0, 1.0, t * t, 1.0, 1.0]);
        for x in validation_grid(3, 5)
            .into_iter()
            .filter(|p| p.chart == Chart::Z)
        {
            let r2 = x.coord.norm_sqr();
            let expected = 1.0 + r2 + r2.powi(3) + r2.powi(4) + t * t * r2 * r2;
            assert_abs_diff_eq!(
                bergman_section(&m4, &q, &x).unwrap()[(0, 0)].re,
                expected,
                epsilon = 1e-14
            );
        }
        let zero = DualInnerProduct::zero(5);
        assert!(validation_grid(2, 3)
            .iter()
            .all(|x| bergman_section(&m4, &zero, x).unwrap()[(0, 0)] == c(0.0)));
    }

    #[test]
    fn kappa_examples() {
        let m1 = BundleModel::line(1);
        for x in validation_grid(3, 4) {
            assert_abs_diff_eq!(
                kappa_at(&m1, &DualInnerProduct::identity(2), &x).unwrap(),
                1.0,
                epsilon = 1e-15
            );
        }
        let m4 = BundleModel::line(4);
        let t: f64 = 0.5;
        let q = DualInnerProduct::from_real_diagonal(&[1.0, 1.0, t * t, 1.0, 1.0]);
        assert_abs_diff_eq!(
            kappa_at(&m4, &q, &ChartPoint::z_re(1.0)).unwrap(),
            (4.0 + t * t) / 16.0,
            epsilon = 1e-15
        );

        let m2 = BundleModel::direct_sum(&[1, 1]);
        for x in validation_grid(3, 4) {
            assert_abs_diff_eq!(
                kappa_at(&m2, &DualInnerProduct::identity(4), &x).unwrap(),
                2.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn reversal_route_agrees_with_chart_rows() {
        let mut rng = crate::random::rng_from_seed(11);
        let m = BundleModel::line(4);
        let q = crate::random::random_dual(&mut rng, 5);
        for x in validation_grid(2, 3) {
            let y = ChartPoint {
                chart: x.chart,
                coord: x.coord * Complex64::new(0.3, 0.4),
            };
            let direct = kernel_at(&m, &q, &x, &y).unwrap().value[(0, 0)];
            let via = line_kernel_via_reversal(&m, &q, &x, &y).unwrap();
            assert_abs_diff_eq!((direct - via).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn reproducing_examples() {
        let m = BundleModel::line(1);
        let pair = SubspaceWithForm::full(CMatrix::identity(2, 2), &tol()).unwrap();
        let s = Section::monomial(&m, 0, 1);
        let res = reproducing_check(&m, &pair, &s, &ChartPoint::z_re(2.0), &tol()).unwrap();
        assert_abs_diff_eq!(res, 0.0, epsilon = 1e-14);
        assert_eq!(
            reproducing_check(&m, &pair, &m.zero_section(), &ChartPoint::z_re(2.0), &tol())
                .unwrap(),
            0.0
        );

        let m4 = BundleModel::line(4);
        let basis = DualInnerProduct::from_real_diagonal(&[1.0; 5]).into_matrix();
        let pair = SubspaceWithForm::new(basis, CMatrix::identity(5, 5), &tol()).unwrap();
        let res = reproducing_check(
            &m4,
            &pair,
            &Section::monomial(&m4, 0, 3),
            &ChartPoint::z_re(1.0),
            &tol(),
        )
        .unwrap();
        assert!(res <= 1e-10);
    }

    #[test]
    fn reproducing_rejects_outside_section() {
        let m = BundleModel::line(2);
        let basis = CMatrix::from_column_slice(3, 1, &[c(1.0), c(0.0), c(0.0)]);
        let pair = SubspaceWithForm::new(basis, CMatrix::identity(1, 1), &tol()).unwrap();
        assert!(matches!(
            reproducing_check(
                &m,
                &pair,
                &Section::monomial(&m, 0, 2),
                &ChartPoint::z_re(0.5),
                &tol()
            ),
            Err(Error::NotInSubspace { .. })
        ));
    }

    #[test]
    fn fit_from_kernel_examples() {
        let m = BundleModel::line(1);
        let nodes = [ChartPoint::z_re(0.0), ChartPoint::z_re(1.0)];
        let k = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(2.0)]);
        let q = fit_q_from_kernel(&m, &nodes, &k, &tol()).unwrap();
        assert_abs_diff_eq!(
            (q.into_matrix() - CMatrix::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-14
        );

        let q0 = fit_q_from_kernel(&m, &nodes, &CMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(q0.into_matrix(), CMatrix::zeros(2, 2));

        let dup = [ChartPoint::z_re(0.5), ChartPoint::z_re(0.5)];
        assert!(matches!(
            fit_q_from_kernel(&m, &dup, &CMatrix::zeros(2, 2), &tol()),
            Err(Error::SingularNodes(_))
        ));
    }

    #[test]
    fn fit_from_kappa_examples() {
        let m = BundleModel::line(1);
        let grid = kappa_fit_grid(1);
        assert_eq!(grid.len(), 2 * 3);
        let samples =
            kappa_samples(&m, &DualInnerProduct::identity(2), &grid, Exec::Sequential).unwrap();
        let fit = fit_q_from_kappa(&m, &samples, &tol()).unwrap();
        assert!(fit.q.max_distance(&DualInnerProduct::identity(2)) < 1e-12);

        let zeros = KappaSamples::new(grid.clone(), vec![0.0; grid.len()]).unwrap();
        let fit = fit_q_from_kappa(&m, &zeros, &tol()).unwrap();
        assert_eq!(fit.q.max_distance(&DualInnerProduct::zero(2)), 0.0);

        let m4 = BundleModel::line(4);
        let q0 = DualInnerProduct::from_real_diagonal(&[1.0, 1.0, 0.0, 1.0, 1.0]);
        let samples = kappa_samples(&m4, &q0, &kappa_fit_grid(4), Exec::Sequential).unwrap();
        let fit = fit_q_from_kappa(&m4, &samples, &tol()).unwrap();
        assert!(fit.q.max_distance(&q0) < 1e-8);
        let inertia = classify_inertia(&fit.q, &tol()).unwrap();
        assert!(inertia.is_positive_semidefinite() && !inertia.is_positive_definite());
    }

    #[test]
    fn fit_from_kappa_detects_non_bergman_samples() {
        let m = BundleModel::line(1);
        let grid = crate::bundle::validation_grid(4, 8);
        let values = grid
            .iter()
            .map(|x| (3.0 * x.coord.re).sin() + 2.0)
            .collect();
        let samples = KappaSamples::new(grid, values).unwrap();
        assert!(matches!(
            fit_q_from_kappa(&m, &samples, &tol()),
            Err(Error::NotInRange { .. })
        ));
    }

    #[test]
    fn fit_from_kappa_needs_enough_nodes() {
        let m = BundleModel::line(2);
        let grid: Vec<_> = (1..=9).map(|k| ChartPoint::z_re(k as f64 / 9.0)).collect();
        let samples =
            kappa_samples(&m, &DualInnerProduct::identity(3), &grid, Exec::Sequential).unwrap();
        // all nodes real: imaginary parts of Q are invisible
        assert!(matches!(
            fit_q_from_kappa(&m, &samples, &tol()),
            Err(Error::SingularNodes(_))
        ));
    }

    #[test]
    fn witness_examples() {
        let m = BundleModel::line(1);
        let nodes: Vec<_> = [0.0, 1.0]
            .iter()
            .map(|&x| WitnessPoint::unit(ChartPoint::z_re(x)))
            .collect();
        let w = psd_witness(
            &m,
            &DualInnerProduct::from_real_diagonal(&[1.0, -1.0]),
            &nodes,
        )
        .unwrap();
        // [[1,1],[1,0]] has eigenvalues (1 ± √5)/2
        assert_abs_diff_eq!(w.min_eigenvalue, (1.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-14);
        let w = psd_witness(&m, &DualInnerProduct::identity(2), &nodes).unwrap();
        assert!(w.min_eigenvalue >= -1e-10);
        let w = psd_witness(&m, &DualInnerProduct::identity(2), &[]).unwrap();
        assert_eq!((w.min_eigenvalue, w.dim), (f64::INFINITY, 0));
    }

    #[test]
    fn witness_accepts_general_covectors() {
        let m = BundleModel::direct_sum(&[1, 0]);
        let p = WitnessPoint {
            x: ChartPoint::z_re(0.5),
            covector: vec![c(1.0), Complex64::new(0.0, 2.0)],
        };
        let w = psd_witness(&m, &DualInnerProduct::identity(3), std::slice::from_ref(&p)).unwrap();
        // |ξ E|² = |1|² + |0.5|² + |2i|² = 5.25
        assert_abs_diff_eq!(w.min_eigenvalue, 5.25, epsilon = 1e-14);
        let bad = WitnessPoint::unit(ChartPoint::z_re(0.5));
        assert!(psd_witness(&m, &DualInnerProduct::identity(3), &[bad]).is_err());
    }

    #[test]
    fn signed_basis_route_on_example() {
        let m = BundleModel::line(1);
        let q = DualInnerProduct::from_real_diagonal(&[1.0, -1.0]);
        let pair = delta_inverse(&q, &tol()).unwrap();
        let x = ChartPoint::z(Complex64::new(0.3, 0.1));
        let y = ChartPoint::z(Complex64::new(-0.2, 0.5));
        let direct = kernel_at(&m, &q, &x, &y).unwrap().value;
        let signed = kernel_from_signed_basis(&m, &pair, &x, &y, &tol()).unwrap();
        assert_abs_diff_eq!((direct - signed).norm(), 0.0, epsilon = 1e-14);
    }
}
