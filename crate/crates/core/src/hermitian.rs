//! Complex hermitian linear algebra: eigendecomposition, inertia, signed
//! orthonormal bases and spectra of pencils `(M, diag(J))` with `M` positive
//! semidefinite and `J` a signature.

use nalgebra::linalg::{Cholesky, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Rank and residual thresholds shared by every module.
///
/// A quantity `λ` counts as zero when `|λ| <= rank_tol * max(scale, 1)`,
/// where `scale` is the spectral radius of the matrix being classified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            rank_tol: 1e-10,
            residual_tol: 1e-9,
        }
    }
}

impl ToleranceSpec {
    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        if !(rank_tol >= 0.0 && residual_tol >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "tolerances must be nonnegative (rank_tol {rank_tol}, residual_tol {residual_tol})"
            )));
        }
        Ok(ToleranceSpec {
            rank_tol,
            residual_tol,
        })
    }

    /// Zero threshold relative to `scale` with an absolute floor of `rank_tol`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.rank_tol * scale.abs().max(1.0)
    }
}

/// Counts of positive, negative and (numerically) zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub p: usize,
    pub q: usize,
    pub z: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.p + self.q + self.z
    }

    pub fn is_positive_definite(&self) -> bool {
        self.q == 0 && self.z == 0
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.q == 0
    }

    pub fn is_indefinite(&self) -> bool {
        self.p > 0 && self.q > 0
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// `max |A - A*|` entrywise.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// `(A + A*) / 2`.
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).unscale(2.0)
}

/// Validates a user-facing hermitian matrix. The residual threshold scales
/// with the largest entry.
pub fn ensure_hermitian(a: &CMatrix, tol: &ToleranceSpec) -> Result<()> {
    check_square(a, "hermitian matrix")?;
    check_finite(a)?;
    let residual = hermitian_residual(a);
    let tolerance = tol.residual_tol * max_abs(a).max(1.0);
    if residual > tolerance {
        return Err(Error::NotHermitian {
            residual,
            tolerance,
        });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `i` belongs to `values[i]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Column indices whose eigenvalue is outside `[-τ, τ]`.
    pub fn nonzero_indices(&self, tol: &ToleranceSpec) -> Vec<usize> {
        let tau = tol.threshold(self.spectral_radius());
        (0..self.values.len())
            .filter(|&i| self.values[i].abs() > tau)
            .collect()
    }
}

/// Rotates `v` so that its largest-modulus entry is real and positive.
fn normalize_phase(v: &mut nalgebra::DVectorViewMut<'_, Complex64>) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison with a small slack keeps the choice stable
        if z.norm() > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// `A = U diag(λ) U*` with `λ` ascending.
pub fn hermitian_eigen(a: &CMatrix, tol: &ToleranceSpec) -> Result<HermitianEigen> {
    ensure_hermitian(a, tol)?;
    Ok(hermitian_eigen_unchecked(&symmetrize(a)))
}

pub(crate) fn hermitian_eigen_unchecked(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &i) in order.iter().enumerate() {
        values.push(eig.eigenvalues[i]);
        vectors.set_column(col, &eig.eigenvectors.column(i));
        normalize_phase(&mut vectors.column_mut(col));
    }
    HermitianEigen { values, vectors }
}

pub fn inertia_from_values(values: &[f64], tol: &ToleranceSpec) -> Inertia {
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tau = tol.threshold(radius);
    let mut inertia = Inertia { p: 0, q: 0, z: 0 };
    for &v in values {
        if v > tau {
            inertia.p += 1;
        } else if v < -tau {
            inertia.q += 1;
        } else {
            inertia.z += 1;
        }
    }
    inertia
}

pub fn inertia_of(a: &CMatrix, tol: &ToleranceSpec) -> Result<Inertia> {
    let eig = hermitian_eigen(a, tol)?;
    Ok(inertia_from_values(&eig.values, tol))
}

/// A basis in which a nondegenerate hermitian form becomes `diag(J)`.
#[derive(Clone, Debug)]
pub struct SignedBasis {
    /// `T` with `T* G T = diag(J)`.
    pub transform: CMatrix,
    /// `p` positive signs followed by `q` negative ones.
    pub signs: Vec<Sign>,
}

impl SignedBasis {
    pub fn positive_count(&self) -> usize {
        self.signs.iter().filter(|s| **s == Sign::Positive).count()
    }

    pub fn signature_matrix(&self) -> CMatrix {
        signature_matrix(&self.signs)
    }
}

pub fn signature_matrix(signs: &[Sign]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        signs.len(),
        signs.iter().map(|s| Complex64::new(s.value(), 0.0)),
    ))
}

/// Signed orthonormal basis of a nondegenerate hermitian form.
pub fn signed_onb(g: &CMatrix, tol: &ToleranceSpec) -> Result<SignedBasis> {
    let eig = hermitian_eigen(g, tol)?;
    let inertia = inertia_from_values(&eig.values, tol);
    if inertia.z > 0 {
        return Err(Error::DegenerateForm { zero: inertia.z });
    }
    Ok(signed_basis_from_eigen(&eig))
}

fn signed_basis_from_eigen(eig: &HermitianEigen) -> SignedBasis {
    let n = eig.values.len();
    // positives ascending, then negatives by ascending magnitude
    let mut order: Vec<usize> = (0..n).filter(|&i| eig.values[i] > 0.0).collect();
    order.extend((0..n).filter(|&i| eig.values[i] <= 0.0).rev());
    let mut transform = CMatrix::zeros(n, n);
    let mut signs = Vec::with_capacity(n);
    for (col, &i) in order.iter().enumerate() {
        let lambda = eig.values[i];
        transform.set_column(col, &eig.vectors.column(i).unscale(lambda.abs().sqrt()));
        signs.push(Sign::of(lambda));
    }
    SignedBasis { transform, signs }
}

/// Eigen-data of the pencil `(M, diag(J))`, i.e. of the `J`-selfadjoint
/// matrix `diag(J) M`.
#[derive(Clone, Debug)]
pub struct PencilSpectrum {
    /// Eigenvalues `λ`: positive-type entries ascending, then negative-type
    /// entries ascending in `|λ|`.
    pub values: Vec<f64>,
    pub types: Vec<Sign>,
    /// Column `l` is an eigenvector `v` normalized so that `v* diag(J) v = type`.
    pub vectors: CMatrix,
    pub diagonalizable: bool,
}

impl PencilSpectrum {
    pub fn positive_count(&self) -> usize {
        self.types.iter().filter(|s| **s == Sign::Positive).count()
    }

    /// `Σ type·|λ|`, which equals `trace(diag(J) M)`.
    pub fn signed_sum(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.types)
            .map(|(v, t)| t.value() * v.abs())
            .sum()
    }
}

/// `trace(diag(J) M)`.
pub fn signed_trace(m: &CMatrix, signs: &[Sign]) -> f64 {
    signs
        .iter()
        .enumerate()
        .map(|(i, s)| s.value() * m[(i, i)].re)
        .sum()
}

fn lexicographic(a: &CMatrix, i: usize, j: usize) -> std::cmp::Ordering {
    for k in 0..a.nrows() {
        let (x, y) = (a[(k, i)], a[(k, j)]);
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord.is_ne() {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Simultaneous diagonalization of a PSD form `M` and the signature form
/// `diag(J)`.
///
/// Writing `M = R R*` with `R` of full column rank `k`, the nonzero
/// eigenvalues of `diag(J) M` are those of the `k×k` hermitian matrix
/// `H = R* J R`, with eigenvectors `J R y` of type `sign(μ)`. The remaining
/// eigenvalues are zero with eigenspace `ker M`. The pencil is diagonalizable
/// with non-neutral eigenvectors exactly when `H` is nonsingular; otherwise
/// `diag(J) M` has a nilpotent part and [`Error::PencilDegenerate`] is
/// returned carrying `trace(diag(J) M)`.
pub fn pencil_spectrum(m: &CMatrix, signs: &[Sign], tol: &ToleranceSpec) -> Result<PencilSpectrum> {
    if m.nrows() != signs.len() {
        return Err(Error::DimensionMismatch(format!(
            "pencil form is {}x{} but the signature has length {}",
            m.nrows(),
            m.ncols(),
            signs.len()
        )));
    }
    let eig_m = hermitian_eigen(m, tol)?;
    let n = signs.len();
    let tau_m = tol.threshold(eig_m.spectral_radius());
    if let Some(&min) = eig_m.values.first() {
        if min < -tau_m {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
    }
    let trace = signed_trace(m, signs);
    let kept: Vec<usize> = (0..n).filter(|&i| eig_m.values[i] > tau_m).collect();
    let kernel: Vec<usize> = (0..n).filter(|&i| eig_m.values[i] <= tau_m).collect();
    let jmat = signature_matrix(signs);

    let mut r = CMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        r.set_column(col, &eig_m.vectors.column(i).scale(eig_m.values[i].sqrt()));
    }
    let h = symmetrize(&(r.adjoint() * &jmat * &r));
    let eig_h = hermitian_eigen_unchecked(&h);
    let tau_h = tol.threshold(eig_h.spectral_radius());
    if eig_h.values.iter().any(|mu| mu.abs() <= tau_h) {
        return Err(Error::PencilDegenerate { trace });
    }

    let mut values = Vec::with_capacity(n);
    let mut types = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    let mut col = 0;
    for (i, &mu) in eig_h.values.iter().enumerate() {
        let v = &jmat * &r * eig_h.vectors.column(i);
        vectors.set_column(col, &v.unscale(mu.abs().sqrt()));
        values.push(mu);
        types.push(Sign::of(mu));
        col += 1;
    }

    // zero eigenvalues: a J-orthonormal basis of ker M
    let mut k0 = CMatrix::zeros(n, kernel.len());
    for (c, &i) in kernel.iter().enumerate() {
        k0.set_column(c, &eig_m.vectors.column(i));
    }
    let f = symmetrize(&(k0.adjoint() * &jmat * &k0));
    let eig_f = hermitian_eigen_unchecked(&f);
    if inertia_from_values(&eig_f.values, tol).z > 0 {
        return Err(Error::PencilDegenerate { trace });
    }
    let kernel_basis = signed_basis_from_eigen(&eig_f);
    let kv = &k0 * &kernel_basis.transform;
    for (c, sign) in kernel_basis.signs.iter().enumerate() {
        vectors.set_column(col, &kv.column(c));
        values.push(0.0);
        types.push(*sign);
        col += 1;
    }

    let expected_positive = signs.iter().filter(|s| **s == Sign::Positive).count();
    if types.iter().filter(|s| **s == Sign::Positive).count() != expected_positive {
        return Err(Error::PencilDegenerate { trace });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let group = |k: usize| (types[k] == Sign::Negative) as u8;
        group(i)
            .cmp(&group(j))
            .then(values[i].abs().total_cmp(&values[j].abs()))
            .then_with(|| lexicographic(&vectors, i, j))
    });
    let sorted_vectors = CMatrix::from_fn(n, n, |row, c| vectors[(row, order[c])]);
    Ok(PencilSpectrum {
        values: order.iter().map(|&i| values[i]).collect(),
        types: order.iter().map(|&i| types[i]).collect(),
        vectors: sorted_vectors,
        diagonalizable: true,
    })
}

/// Eigenvalues (ascending) of the definite pencil `A x = λ B x` with `B`
/// positive definite, via a Cholesky reduction.
pub fn definite_pencil_values(a: &CMatrix, b: &CMatrix) -> Result<Vec<f64>> {
    let n = b.nrows();
    let chol =
        Cholesky::new(symmetrize(b)).ok_or(Error::NotPositiveDefinite { p: 0, q: 0, z: n })?;
    let l = chol.l();
    let linv = l
        .solve_lower_triangular(&CMatrix::identity(n, n))
        .ok_or(Error::DegenerateForm { zero: 1 })?;
    let c = symmetrize(&(&linv * a * linv.adjoint()));
    Ok(hermitian_eigen_unchecked(&c).values)
}

/// Singular values, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(a.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical column rank under `rank_tol` relative to the largest singular value.
pub fn column_rank(a: &CMatrix, tol: &ToleranceSpec) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    let tau = tol.rank_tol * top.max(f64::MIN_POSITIVE);
    s.iter().filter(|&&v| v > tau).count()
}

/// Least-squares solve `A x ≈ b` through the SVD; returns the solution and
/// the residual norm `|A x - b|`.
pub fn least_squares(a: &CMatrix, b: &CMatrix) -> (CMatrix, f64) {
    if a.ncols() == 0 {
        return (CMatrix::zeros(0, b.ncols()), b.norm());
    }
    let svd = SVD::new(a.clone(), true, true);
    let top = svd.singular_values.max();
    let x = svd
        .solve(b, 1e-13 * top.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| CMatrix::zeros(a.ncols(), b.ncols()));
    let residual = (a * &x - b).norm();
    (x, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
    }

    fn diag(d: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| c(x)),
        ))
    }

    fn tol() -> ToleranceSpec {
        ToleranceSpec::default()
    }

    #[test]
    fn eigen_of_identity() {
        let e = hermitian_eigen(&CMatrix::identity(2, 2), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert_abs_diff_eq!(
            (e.vectors - CMatrix::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let e = hermitian_eigen(&diag(&[1.0, -1.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn eigen_of_swap_matrix() {
        // characteristic polynomial λ² - 1, eigenvectors (1, ∓1)/√2
        let a = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = hermitian_eigen(&a, &tol()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert_abs_diff_eq!((v0[0] * v0[1].conj()).re, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!((v1[0] * v1[1].conj()).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(v1[0].norm(), s, epsilon = 1e-14);
        let rebuilt = &e.vectors
            * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                e.values.iter().map(|&x| c(x)),
            ))
            * e.vectors.adjoint();
        assert_abs_diff_eq!((rebuilt - a).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            hermitian_eigen(&a, &tol()),
            Err(Error::NotHermitian { .. })
        ));
        let mut b = CMatrix::identity(2, 2);
        b[(0, 1)] = Complex64::new(0.0, 1.0);
        b[(1, 0)] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            inertia_of(&b, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_nan() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 0)] = c(f64::NAN);
        assert!(matches!(hermitian_eigen(&a, &tol()), Err(Error::NonFinite)));
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(
            inertia_of(&diag(&[1.0, 1.0, 0.0, 1.0, 1.0]), &tol()).unwrap(),
            Inertia { p: 4, q: 0, z: 1 }
        );
        assert_eq!(
            inertia_of(&CMatrix::zeros(3, 3), &tol()).unwrap(),
            Inertia { p: 0, q: 0, z: 3 }
        );
        assert_eq!(
            inertia_of(&diag(&[1.0, -1.0]), &tol()).unwrap(),
            Inertia { p: 1, q: 1, z: 0 }
        );
    }

    #[test]
    fn inertia_threshold_is_scale_aware() {
        // 1e-8 is not zero next to 1, but is zero next to 1e3 only if below 1e-7
        assert_eq!(inertia_of(&diag(&[1.0, 1e-8]), &tol()).unwrap().z, 0);
        assert_eq!(inertia_of(&diag(&[1e4, 1e-8]), &tol()).unwrap().z, 1);
        assert_eq!(inertia_of(&diag(&[1e-12, 0.0]), &tol()).unwrap().z, 2);
    }

    #[test]
    fn signed_onb_identity() {
        let b = signed_onb(&CMatrix::identity(3, 3), &tol()).unwrap();
        assert_eq!(b.signs, vec![Sign::Positive; 3]);
        assert_abs_diff_eq!(
            (b.transform - CMatrix::identity(3, 3)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn signed_onb_scaled_diagonal() {
        let b = signed_onb(&diag(&[4.0, -9.0]), &tol()).unwrap();
        assert_eq!(b.signs, vec![Sign::Positive, Sign::Negative]);
        assert_abs_diff_eq!(
            (b.transform - diag(&[0.5, 1.0 / 3.0])).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn signed_onb_swap_matrix() {
        let g = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = signed_onb(&g, &tol()).unwrap();
        assert_eq!(b.signs, vec![Sign::Positive, Sign::Negative]);
        let congruent = b.transform.adjoint() * &g * &b.transform;
        assert!(max_abs(&(congruent - diag(&[1.0, -1.0]))) <= tol().residual_tol);
    }

    #[test]
    fn signed_onb_rejects_degenerate() {
        assert!(matches!(
            signed_onb(&diag(&[1.0, 0.0]), &tol()),
            Err(Error::DegenerateForm { zero: 1 })
        ));
    }

    #[test]
    fn pencil_rank_one_definite_direction() {
        let s = pencil_spectrum(
            &diag(&[1.0, 0.0]),
            &[Sign::Positive, Sign::Negative],
            &tol(),
        )
        .unwrap();
        assert_eq!(s.types, vec![Sign::Positive, Sign::Negative]);
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 0.0, epsilon = 1e-14);
        assert!(s.diagonalizable);
    }

    #[test]
    fn pencil_nilpotent_is_degenerate() {
        // diag(1,-1)·½[[1,1],[1,1]] squares to zero
        let m = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        match pencil_spectrum(&m, &[Sign::Positive, Sign::Negative], &tol()) {
            Err(Error::PencilDegenerate { trace }) => {
                assert_abs_diff_eq!(trace, 0.0, epsilon = 1e-15)
            }
            other => panic!("expected PencilDegenerate, got {other:?}"),
        }
    }

    #[test]
    fn pencil_identity_definite() {
        let s = pencil_spectrum(&CMatrix::identity(2, 2), &[Sign::Positive; 2], &tol()).unwrap();
        assert_eq!(s.types, vec![Sign::Positive; 2]);
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn pencil_rejects_indefinite_m() {
        assert!(matches!(
            pencil_spectrum(&diag(&[1.0, -1.0]), &[Sign::Positive; 2], &tol()),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn pencil_eigenvectors_are_j_normalized() {
        let m = real(3, 3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.5, 0.0, 0.5, 3.0]);
        let signs = [Sign::Positive, Sign::Negative, Sign::Negative];
        let s = pencil_spectrum(&m, &signs, &tol()).unwrap();
        let j = signature_matrix(&signs);
        for l in 0..3 {
            let v = s.vectors.column(l);
            let jm_v = &j * &m * v;
            assert_abs_diff_eq!((jm_v - v.scale(s.values[l])).norm(), 0.0, epsilon = 1e-12);
            let norm = (v.adjoint() * &j * v)[(0, 0)].re;
            assert_abs_diff_eq!(norm, s.types[l].value(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.signed_sum(), signed_trace(&m, &signs), epsilon = 1e-12);
    }

    #[test]
    fn definite_pencil_matches_scaling() {
        let a = diag(&[2.0, 6.0]);
        let b = diag(&[1.0, 3.0]);
        let v = definite_pencil_values(&a, &b).unwrap();
        assert_abs_diff_eq!(v[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn least_squares_residual() {
        let a = real(3, 1, &[1.0, 0.0, 0.0]);
        let b = real(3, 1, &[2.0, 0.0, 1.0]);
        let (x, res) = least_squares(&a, &b);
        assert_abs_diff_eq!(x[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(res, 1.0, epsilon = 1e-14);
    }
}
