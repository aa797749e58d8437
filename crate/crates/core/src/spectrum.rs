//! The evaluation form `h_x` of a subspace pair, its signed min-max values
//! `κ_l` computed through the pencil `(M′, J)`, the sum rule `Σ κ_l = κ`,
//! and a sampling oracle for the min-max characterization.

use serde::Serialize;

use crate::bundle::{BundleModel, ChartPoint};
use crate::error::{Error, Result};
use crate::hermitian::{
    definite_pencil_values, hermitian_eigen_unchecked, inertia_from_values, pencil_spectrum,
    signed_onb, signed_trace, symmetrize, CMatrix, PencilSpectrum, SignedBasis, ToleranceSpec,
};
use crate::inner_product::{delta, SubspaceWithForm};
use crate::kernel::kappa_at;
use crate::random::{gaussian_matrix, rng_from_seed};

/// `h_x` in the basis of the pair: `M = Σ_a weight_a(x) (E_a S)*(E_a S)`.
#[derive(Clone, Debug)]
pub struct EvaluationForm {
    pub m: CMatrix,
}

pub fn evaluation_form(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
) -> Result<EvaluationForm> {
    if model.dim() != pair.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "pair lives in dimension {}, bundle model has {}",
            pair.ambient_dim(),
            model.dim()
        )));
    }
    let values = model.evaluation_row(x) * pair.basis();
    let weights = model.weight_at(x);
    let mut m = CMatrix::zeros(pair.dim(), pair.dim());
    for (a, w) in weights.iter().enumerate() {
        let row = values.rows(a, 1);
        m += (row.adjoint() * row).scale(*w);
    }
    Ok(EvaluationForm { m: symmetrize(&m) })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSpectrum {
    pub x: ChartPoint,
    pub p: usize,
    pub q: usize,
    /// `κ_1 ≤ … ≤ κ_p` (all `≥ 0`), then `κ_{p+1} ≥ … ≥ κ_{p+q}` (all `≤ 0`).
    pub kappa_l: Vec<f64>,
    pub c_l: Vec<f64>,
    pub diagonalizable: bool,
    /// Pencil eigenvectors in signed-orthonormal coordinates, in `κ_l` order.
    #[serde(skip)]
    pub vectors: CMatrix,
}

impl PointSpectrum {
    pub fn sum(&self) -> f64 {
        self.kappa_l.iter().sum()
    }
}

/// The evaluation form written in a signed orthonormal basis of the pair.
struct SignedPencil {
    basis: SignedBasis,
    m_prime: CMatrix,
}

fn signed_pencil(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<SignedPencil> {
    let form = evaluation_form(model, pair, x)?;
    let basis = signed_onb(pair.gram(), tol)?;
    let m_prime = symmetrize(&(basis.transform.adjoint() * &form.m * &basis.transform));
    Ok(SignedPencil { basis, m_prime })
}

fn spectrum_of(
    x: &ChartPoint,
    pencil: &SignedPencil,
    tol: &ToleranceSpec,
) -> Result<(PointSpectrum, PencilSpectrum)> {
    let signs = &pencil.basis.signs;
    let ps = pencil_spectrum(&pencil.m_prime, signs, tol)?;
    let p = pencil.basis.positive_count();
    let spectrum = PointSpectrum {
        x: *x,
        p,
        q: signs.len() - p,
        kappa_l: ps.values.clone(),
        c_l: ps.values.iter().map(|v| v.abs()).collect(),
        diagonalizable: ps.diagonalizable,
        vectors: ps.vectors.clone(),
    };
    Ok((spectrum, ps))
}

pub fn point_spectrum(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<PointSpectrum> {
    let pencil = signed_pencil(model, pair, x, tol)?;
    Ok(spectrum_of(x, &pencil, tol)?.0)
}

/// `trace(diag(J) M′)`, available even where the pencil is not diagonalizable.
pub fn signed_trace_at(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<f64> {
    let pencil = signed_pencil(model, pair, x, tol)?;
    Ok(signed_trace(&pencil.m_prime, &pencil.basis.signs))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SumRule {
    pub kappa_direct: f64,
    pub kappa_sum: f64,
    pub discrepancy: f64,
}

pub fn verify_sum_rule(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<SumRule> {
    let spectrum = point_spectrum(model, pair, x, tol)?;
    let kappa_direct = kappa_at(model, &delta(pair), x)?;
    let kappa_sum = spectrum.sum();
    Ok(SumRule {
        kappa_direct,
        kappa_sum,
        discrepancy: (kappa_direct - kappa_sum).abs(),
    })
}

/// Indices `l` (1-based) at which `κ_l` is forced to vanish for a bundle of
/// rank `r`: `l ≤ p − r` and `1 ≤ l − p ≤ q − r`.
pub fn forced_zero_indices(p: usize, q: usize, rank: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=p.saturating_sub(rank)).collect();
    out.extend((1..=q.saturating_sub(rank)).map(|j| p + j));
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleResult {
    /// Best sampled value: an upper bound for `κ_l` when `l ≤ p`, a lower
    /// bound when `l > p`.
    pub bound: f64,
    /// The extremal ratio on the span of the first pencil eigenvectors.
    pub achieved_by_eigenbasis: f64,
    pub admissible_samples: usize,
}

/// Largest value of `h(s,s)/|⟨s,s⟩|` on the column span of `c`, or `None`
/// if the form `sign·⟨,⟩` is not positive definite there.
fn max_ratio(m: &CMatrix, j: &CMatrix, c: &CMatrix, sign: f64, tol: &ToleranceSpec) -> Option<f64> {
    let gram = symmetrize(&(c.adjoint() * j * c).scale(sign));
    let inertia = inertia_from_values(&hermitian_eigen_unchecked(&gram).values, tol);
    if inertia.p != c.ncols() {
        return None;
    }
    let form = c.adjoint() * m * c;
    definite_pencil_values(&form, &gram).ok()?.last().copied()
}

/// Samples `n_samples` random `l`-dimensional subspaces of the pair on which
/// the form is definite of the right sign and evaluates the inner extremum
/// of the min-max characterization of `κ_l` (`l` is 1-based).
pub fn minmax_oracle(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    l: usize,
    n_samples: usize,
    seed: u64,
    tol: &ToleranceSpec,
) -> Result<OracleResult> {
    let pencil = signed_pencil(model, pair, x, tol)?;
    let (spectrum, _) = spectrum_of(x, &pencil, tol)?;
    let (p, q) = (spectrum.p, spectrum.q);
    if l == 0 || l > p + q {
        return Err(Error::DimensionMismatch(format!(
            "index l = {l} outside 1..={}",
            p + q
        )));
    }
    // l ≤ p: positive side; otherwise the mirrored problem on the negative side
    let (sign, dim, first) = if l <= p {
        (1.0, l, 0)
    } else {
        (-1.0, l - p, p)
    };
    let m = &pencil.m_prime;
    let j = pencil.basis.signature_matrix();
    let n = m.nrows();

    let eigen_span = spectrum.vectors.columns(first, dim).into_owned();
    let achieved = max_ratio(m, &j, &eigen_span, sign, tol).ok_or(Error::PencilDegenerate {
        trace: signed_trace(m, &pencil.basis.signs),
    })?;

    let mut rng = rng_from_seed(seed);
    let mut best = f64::INFINITY;
    let mut admissible = 0;
    for _ in 0..n_samples {
        let c = gaussian_matrix(&mut rng, n, dim);
        if let Some(r) = max_ratio(m, &j, &c, sign, tol) {
            admissible += 1;
            best = best.min(r);
        }
    }
    if admissible == 0 {
        return Err(Error::NoAdmissibleSubspace {
            dim,
            samples: n_samples,
        });
    }
    Ok(OracleResult {
        bound: sign * best,
        achieved_by_eigenbasis: sign * achieved,
        admissible_samples: admissible,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineSpecialization {
    pub kappa_p: f64,
    pub kappa_pq: f64,
}

/// For line bundles only `κ_p` and `κ_{p+q}` can be nonzero; returns both
/// (a missing side reports 0).
pub fn indefinite_specialization(
    model: &BundleModel,
    pair: &SubspaceWithForm,
    x: &ChartPoint,
    tol: &ToleranceSpec,
) -> Result<LineSpecialization> {
    model.require_line()?;
    let s = point_spectrum(model, pair, x, tol)?;
    let kappa_p = if s.p > 0 { s.kappa_l[s.p - 1] } else { 0.0 };
    let kappa_pq = if s.q > 0 {
        s.kappa_l[s.p + s.q - 1]
    } else {
        0.0
    };
    Ok(LineSpecialization { kappa_p, kappa_pq })
}

/// `sup_s h_x(s,s)/⟨s,s⟩` for a positive definite pair, from the definite
/// generalized eigenproblem `(M, G)`.
pub fn sup_ratio(model: &BundleModel, pair: &SubspaceWithForm, x: &ChartPoint) -> Result<f64> {
    let inertia = pair.inertia();
    if !inertia.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            p: inertia.p,
            q: inertia.q,
            z: inertia.z,
        });
    }
    if pair.dim() == 0 {
        return Ok(0.0);
    }
    let form = evaluation_form(model, pair, x)?;
    Ok(definite_pencil_values(&form.m, pair.gram())?
        .last()
        .copied()
        .unwrap_or(0.0))
}
