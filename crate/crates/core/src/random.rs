//! Seeded random instances: complex Gaussian matrices, hermitian forms of a
//! prescribed signature, subspace pairs and chart points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bundle::{Chart, ChartPoint};
use crate::error::Result;
use crate::hermitian::{signature_matrix, CMatrix, Sign, ToleranceSpec};
use crate::inner_product::{DualInnerProduct, SubspaceWithForm};

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for instance `index` of a batch seeded with `seed`.
pub fn rng_for_instance(seed: u64, index: usize) -> InstanceRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Standard complex normal: `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. complex Gaussian entries; the column span is unitarily invariant.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = gaussian_matrix(rng, n, n);
    (&a + a.adjoint()).unscale(2.0)
}

/// `B B*` with `B` of size `n × rank`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let b = gaussian_matrix(rng, n, rank);
    &b * b.adjoint()
}

/// `A* diag(J) A` with `p` positive and `q` negative signs.
pub fn random_gram<R: Rng + ?Sized>(rng: &mut R, p: usize, q: usize) -> CMatrix {
    let mut signs = vec![Sign::Positive; p];
    signs.extend(std::iter::repeat_n(Sign::Negative, q));
    let a = gaussian_matrix(rng, p + q, p + q);
    a.adjoint() * signature_matrix(&signs) * a
}

/// A random `(p+q)`-dimensional subspace of `C^n` with a form of signature `(p, q)`.
pub fn random_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p: usize,
    q: usize,
    tol: &ToleranceSpec,
) -> Result<SubspaceWithForm> {
    let basis = gaussian_matrix(rng, n, p + q);
    let gram = random_gram(rng, p, q);
    SubspaceWithForm::new(basis, gram, tol)
}

pub fn random_dual<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DualInnerProduct {
    DualInnerProduct::from_hermitian_unchecked(random_hermitian(rng, n))
}

/// Uniform in the closed unit disk of a uniformly chosen chart.
pub fn random_chart_point<R: Rng + ?Sized>(rng: &mut R) -> ChartPoint {
    let chart = if rng.random_bool(0.5) {
        Chart::Z
    } else {
        Chart::W
    };
    let radius = rng.random::<f64>().sqrt();
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    ChartPoint {
        chart,
        coord: Complex64::from_polar(radius, angle),
    }
}
