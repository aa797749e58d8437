use blab_core::bundle::{BundleModel, ChartPoint, CustomWeight, MetricWeight};
use blab_core::hermitian::{inertia_of, pencil_spectrum, signed_onb, CMatrix, Sign, ToleranceSpec};
use blab_core::inner_product::{delta, delta_inverse, DualInnerProduct, SubspaceWithForm};
use blab_core::kernel::{kappa_at, kernel_at, kernel_from_signed_basis};
use blab_core::random::{
    gaussian_matrix, random_chart_point, random_hermitian, random_pair, random_psd, rng_from_seed,
};
use blab_core::spectrum::point_spectrum;
use blab_core::Error;
use nalgebra::linalg::Schur;
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> ToleranceSpec {
    ToleranceSpec::default()
}

fn model_for(n_summands: usize, seed: u64) -> BundleModel {
    let degrees: Vec<usize> = (0..n_summands)
        .map(|a| 1 + ((seed as usize >> (3 * a)) % 4))
        .collect();
    BundleModel::direct_sum(&degrees)
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signed_basis_diagonalizes_the_form(seed in any::<u64>(), p in 0usize..4, q in 0usize..4) {
        prop_assume!(p + q > 0);
        let mut rng = rng_from_seed(seed);
        let g = blab_core::random::random_gram(&mut rng, p, q);
        let basis = signed_onb(&g, &tol()).unwrap();
        let residual = basis.transform.adjoint() * &g * &basis.transform - basis.signature_matrix();
        prop_assert!(max_entry(&residual) <= 1e-9 * max_entry(&g).max(1.0));
        prop_assert_eq!(basis.positive_count(), p);
    }

    #[test]
    fn inertia_is_a_congruence_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let g = random_hermitian(&mut rng, n);
        let a = gaussian_matrix(&mut rng, n, n);
        let before = inertia_of(&g, &tol()).unwrap();
        let after = inertia_of(&(a.adjoint() * &g * &a), &tol()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn delta_is_basis_independent_and_inverted(seed in any::<u64>(), p in 0usize..3, q in 0usize..3) {
        prop_assume!(p + q > 0);
        let mut rng = rng_from_seed(seed);
        let pair = random_pair(&mut rng, 6, p, q, &tol()).unwrap();
        let t = gaussian_matrix(&mut rng, p + q, p + q);
        let q1 = delta(&pair);
        let q2 = delta(&pair.change_basis(&t, &tol()).unwrap());
        let scale = max_entry(q1.matrix()).max(1.0);
        prop_assert!(q1.max_distance(&q2) <= 1e-8 * scale);

        let back = delta_inverse(&q1, &tol()).unwrap();
        prop_assert_eq!(back.dim(), p + q);
        prop_assert_eq!(back.inertia().p, p);
        prop_assert!(delta(&back).max_distance(&q1) <= 1e-8 * scale);
    }

    #[test]
    fn kernel_is_hermitian_symmetric_and_linear(seed in any::<u64>(), r in 1usize..3) {
        let model = model_for(r, seed);
        let mut rng = rng_from_seed(seed);
        let n = model.dim();
        let q1 = random_hermitian(&mut rng, n);
        let q2 = random_hermitian(&mut rng, n);
        let t = 0.37;
        let x = random_chart_point(&mut rng);
        let y = random_chart_point(&mut rng);
        let d1 = DualInnerProduct::new(q1.clone(), &tol()).unwrap();
        let d2 = DualInnerProduct::new(q2.clone(), &tol()).unwrap();
        let sum = DualInnerProduct::new(&q1 + q2.scale(t), &tol()).unwrap();

        let kxy = kernel_at(&model, &d1, &x, &y).unwrap().value;
        let kyx = kernel_at(&model, &d1, &y, &x).unwrap().value;
        prop_assert!(max_entry(&(&kxy - kyx.adjoint())) <= 1e-12 * max_entry(&kxy).max(1.0));

        let lhs = kernel_at(&model, &sum, &x, &y).unwrap().value;
        let rhs = kxy + kernel_at(&model, &d2, &x, &y).unwrap().value.scale(t);
        prop_assert!(max_entry(&(&lhs - &rhs)) <= 1e-12 * max_entry(&lhs).max(1.0));
    }

    #[test]
    fn kernel_routes_agree(seed in any::<u64>(), p in 0usize..4, q in 0usize..3) {
        prop_assume!(p + q > 0);
        let model = model_for(2, seed);
        prop_assume!(p + q <= model.dim());
        let mut rng = rng_from_seed(seed);
        let pair = random_pair(&mut rng, model.dim(), p, q, &tol()).unwrap();
        let x = random_chart_point(&mut rng);
        let y = random_chart_point(&mut rng);
        let direct = kernel_at(&model, &delta(&pair), &x, &y).unwrap().value;
        let signed = kernel_from_signed_basis(&model, &pair, &x, &y, &tol()).unwrap();
        prop_assert!(max_entry(&(&direct - &signed)) <= 1e-9 * max_entry(&direct).max(1.0));
    }

    #[test]
    fn pencil_values_match_schur_eigenvalues(seed in any::<u64>(), p in 0usize..4, q in 0usize..4, rank in 1usize..4) {
        prop_assume!(p + q > 0);
        let n = p + q;
        let mut rng = rng_from_seed(seed);
        let m = random_psd(&mut rng, n, rank.min(n));
        let mut signs = vec![Sign::Positive; p];
        signs.extend(std::iter::repeat_n(Sign::Negative, q));
        let spectrum = match pencil_spectrum(&m, &signs, &tol()) {
            Ok(s) => s,
            Err(Error::PencilDegenerate { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let jm = blab_core::hermitian::signature_matrix(&signs) * &m;
        let schur = Schur::new(jm);
        let (_, t) = schur.unpack();
        let mut oracle: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
        let mut ours = spectrum.values.clone();
        oracle.sort_by(f64::total_cmp);
        ours.sort_by(f64::total_cmp);
        let scale = max_entry(&m).max(1.0);
        for (a, b) in oracle.iter().zip(&ours) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
        prop_assert!(t.diagonal().iter().all(|z: &Complex64| z.im.abs() <= 1e-8 * scale));
    }

    #[test]
    fn spectrum_scales_with_form_and_weight(seed in any::<u64>(), p in 1usize..4, q in 0usize..3) {
        let d = 4;
        let mut rng = rng_from_seed(seed);
        let pair = random_pair(&mut rng, d + 1, p, q, &tol()).unwrap();
        let x = random_chart_point(&mut rng);
        let fs = BundleModel::line(d);
        let base = match point_spectrum(&fs, &pair, &x, &tol()) {
            Ok(s) => s,
            Err(Error::PencilDegenerate { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let alpha = 2.75;
        let scaled = SubspaceWithForm::new(pair.basis().clone(), pair.gram().scale(alpha), &tol()).unwrap();
        let s_form = point_spectrum(&fs, &scaled, &x, &tol()).unwrap();
        let heavy = MetricWeight::Custom(CustomWeight::StretchedFubiniStudy { stretch: 1.0, factor: alpha });
        let weighted = BundleModel::line_with_weight(d, heavy).unwrap();
        let s_weight = point_spectrum(&weighted, &pair, &x, &tol()).unwrap();
        let scale = base.c_l.iter().fold(1.0f64, |m, c| m.max(*c));
        for l in 0..p + q {
            prop_assert!((s_form.kappa_l[l] * alpha - base.kappa_l[l]).abs() <= 1e-8 * scale);
            prop_assert!((s_weight.kappa_l[l] - alpha * base.kappa_l[l]).abs() <= 1e-8 * scale * alpha);
        }
    }
}

#[test]
fn kappa_is_chart_independent_on_the_overlap() {
    let mut rng = rng_from_seed(77);
    let model = BundleModel::direct_sum(&[2, 3]);
    let q = DualInnerProduct::new(random_hermitian(&mut rng, model.dim()), &tol()).unwrap();
    for k in 0..12 {
        let z = ChartPoint::z(Complex64::from_polar(1.0, 0.5 * k as f64));
        let w = z.switch_chart().unwrap();
        let a = kappa_at(&model, &q, &z).unwrap();
        let b = kappa_at(&model, &q, &w).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}
