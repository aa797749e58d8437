//! Inner products on the dual section space, pairs `(V, ⟨,⟩)` of a subspace
//! with a nondegenerate form, and the duality between them.
//!
//! Coordinates: a dual inner product is the hermitian matrix `Q` with
//! Bergman kernel `K(x, y) = E(x) Q E(y)*`, where `E` is the evaluation row
//! of the bundle model. A pair is a basis `S` (columns, `N × m`) together
//! with a Gram matrix `G` such that `⟨S a, S b⟩ = b* G a`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    check_finite, column_rank, ensure_hermitian, hermitian_eigen, inertia_from_values, symmetrize,
    CMatrix, Inertia, ToleranceSpec,
};

#[derive(Clone, Debug, PartialEq)]
pub struct DualInnerProduct {
    q: CMatrix,
}

impl DualInnerProduct {
    /// Validates hermitian symmetry and stores the symmetrized matrix.
    pub fn new(q: CMatrix, tol: &ToleranceSpec) -> Result<Self> {
        ensure_hermitian(&q, tol)?;
        Ok(DualInnerProduct { q: symmetrize(&q) })
    }

    pub fn zero(n: usize) -> Self {
        DualInnerProduct {
            q: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        DualInnerProduct {
            q: CMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        DualInnerProduct {
            q: CMatrix::from_diagonal(&DVector::from_iterator(
                d.len(),
                d.iter().map(|&x| Complex64::new(x, 0.0)),
            )),
        }
    }

    pub(crate) fn from_hermitian_unchecked(q: CMatrix) -> Self {
        DualInnerProduct { q: symmetrize(&q) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.q
    }

    pub fn into_matrix(self) -> CMatrix {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &DualInnerProduct, t: f64) -> Result<DualInnerProduct> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine inner products of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(DualInnerProduct {
            q: &self.q + other.q.scale(t),
        })
    }

    pub fn max_distance(&self, other: &DualInnerProduct) -> f64 {
        (&self.q - &other.q)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// A subspace `V` (basis columns `S`) with a nondegenerate hermitian form `G`.
#[derive(Clone, Debug)]
pub struct SubspaceWithForm {
    basis: CMatrix,
    gram: CMatrix,
}

impl SubspaceWithForm {
    pub fn new(basis: CMatrix, gram: CMatrix, tol: &ToleranceSpec) -> Result<Self> {
        check_finite(&basis)?;
        if gram.nrows() != basis.ncols() || gram.ncols() != basis.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "basis has {} columns but gram is {}x{}",
                basis.ncols(),
                gram.nrows(),
                gram.ncols()
            )));
        }
        let eig = hermitian_eigen(&gram, tol)?;
        let inertia = inertia_from_values(&eig.values, tol);
        if inertia.z > 0 {
            return Err(Error::DegenerateForm { zero: inertia.z });
        }
        let rank = column_rank(&basis, tol);
        if rank < basis.ncols() {
            return Err(Error::RankDeficient {
                rank,
                cols: basis.ncols(),
            });
        }
        Ok(SubspaceWithForm {
            basis,
            gram: symmetrize(&gram),
        })
    }

    /// `V = O(E)` in the monomial basis.
    pub fn full(gram: CMatrix, tol: &ToleranceSpec) -> Result<Self> {
        let n = gram.nrows();
        Self::new(CMatrix::identity(n, n), gram, tol)
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Ambient dimension `N`.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `m = dim V`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Signature of the form on `V`.
    pub fn inertia(&self) -> Inertia {
        let eig = hermitian_eigen(&self.gram, &ToleranceSpec::default())
            .expect("gram validated on construction");
        inertia_from_values(&eig.values, &ToleranceSpec::default())
    }

    /// Same subspace and form in the basis `S·T`.
    pub fn change_basis(&self, t: &CMatrix, tol: &ToleranceSpec) -> Result<Self> {
        Self::new(&self.basis * t, t.adjoint() * &self.gram * t, tol)
    }
}

/// `Q = S G⁻¹ S*`.
pub fn delta(pair: &SubspaceWithForm) -> DualInnerProduct {
    let m = pair.dim();
    if m == 0 {
        return DualInnerProduct::zero(pair.ambient_dim());
    }
    let ginv = pair
        .gram
        .clone()
        .lu()
        .try_inverse()
        .expect("gram is nondegenerate by construction");
    DualInnerProduct::from_hermitian_unchecked(&pair.basis * ginv * pair.basis.adjoint())
}

/// The pair `(V, ⟨,⟩)` of a dual inner product: `V` is spanned by the
/// eigenvectors of `Q` with eigenvalue outside `[-τ, τ]` (positive ones
/// first) and `G` holds the inverted eigenvalues.
pub fn delta_inverse(q: &DualInnerProduct, tol: &ToleranceSpec) -> Result<SubspaceWithForm> {
    let (pair, _) = split_dual(q, tol)?;
    Ok(pair)
}

/// Orthonormal basis of the kernel `N` of `Q` (the discarded eigenspace of
/// [`delta_inverse`]).
pub fn dual_kernel(q: &DualInnerProduct, tol: &ToleranceSpec) -> Result<CMatrix> {
    let (_, kernel) = split_dual(q, tol)?;
    Ok(kernel)
}

fn split_dual(q: &DualInnerProduct, tol: &ToleranceSpec) -> Result<(SubspaceWithForm, CMatrix)> {
    let eig = hermitian_eigen(&q.q, tol)?;
    let n = eig.values.len();
    let kept = eig.nonzero_indices(tol);
    let mut order: Vec<usize> = kept
        .iter()
        .copied()
        .filter(|&i| eig.values[i] > 0.0)
        .collect();
    order.extend(kept.iter().copied().filter(|&i| eig.values[i] < 0.0).rev());
    let dropped: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();

    let basis = CMatrix::from_fn(n, order.len(), |r, c| eig.vectors[(r, order[c])]);
    let gram = CMatrix::from_diagonal(&DVector::from_iterator(
        order.len(),
        order
            .iter()
            .map(|&i| Complex64::new(1.0 / eig.values[i], 0.0)),
    ));
    let kernel = CMatrix::from_fn(n, dropped.len(), |r, c| eig.vectors[(r, dropped[c])]);
    Ok((SubspaceWithForm { basis, gram }, kernel))
}

/// Inertia of `Q`, which is the signature of the form on `V` padded with
/// `N - m` zeros. Positive definite exactly for duals of positive definite
/// inner products on the whole section space.
pub fn classify_inertia(q: &DualInnerProduct, tol: &ToleranceSpec) -> Result<Inertia> {
    let eig = hermitian_eigen(&q.q, tol)?;
    Ok(inertia_from_values(&eig.values, tol))
}
