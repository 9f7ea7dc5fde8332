use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use paraexp::algebra::{MultiIndex, Polynomial, WeylOperator};
use paraexp::engine::{adjoint_dilation_operators, dilation_operators};
use paraexp::gaussian::{
    apply_weyl_in_y, apply_weyl_to_kernel, gaussian_expectation, hermite_inner_products, GaussianKernel,
    Quadrature,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kernel_2d() -> GaussianKernel {
    let cov = DMatrix::from_row_slice(2, 2, &[0.4, 0.12, 0.12, 0.25]);
    GaussianKernel::new(0.0, 0.8, vec![0.15, -0.05], cov, -0.02).unwrap()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

#[test]
fn x_derivatives_match_finite_differences() {
    let k = kernel_2d();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-4;
    let xs = random_points(&mut rng, 20, 2, 0.5);
    let ys = random_points(&mut rng, 20, 2, 1.0);
    for (x, y) in xs.iter().zip(&ys) {
        for i in 0..2 {
            let op = WeylOperator::partial(2, i);
            let analytic = apply_weyl_to_kernel(&op, &k, x, &[0.0, 0.0]).unwrap().evaluate(y);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (k.density(&xp, y) - k.density(&xm, y)) / (2.0 * h);
            assert_abs_diff_eq!(analytic, fd, epsilon = 1e-6);

            let dy = apply_weyl_in_y(&op, &k, x, &[0.0, 0.0]).unwrap().evaluate(y);
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let fd_y = (k.density(x, &yp) - k.density(x, &ym)) / (2.0 * h);
            assert_abs_diff_eq!(dy, fd_y, epsilon = 1e-6);
        }
    }
}

#[test]
fn dilation_reproduces_multiplication_by_y() {
    let k = kernel_2d();
    let ops = dilation_operators(k.mean_offset(), k.covariance(), None);
    let adj = adjoint_dilation_operators(k.mean_offset(), k.covariance());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let origin = [0.0, 0.0];
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = k.density(&x, &y);
        for i in 0..2 {
            let my = apply_weyl_to_kernel(&ops[i], &k, &x, &origin).unwrap().evaluate(&y);
            assert_abs_diff_eq!(my, y[i] * g, epsilon = 1e-10);
            let mx = apply_weyl_in_y(&adj[i], &k, &x, &origin).unwrap().evaluate(&y);
            assert_abs_diff_eq!(mx, x[i] * g, epsilon = 1e-10);
        }
    }
}

#[test]
fn dilations_commute_on_the_kernel() {
    let k = kernel_2d();
    let m = dilation_operators(k.mean_offset(), k.covariance(), None);
    let x = [0.3, -0.2];
    let origin = [0.1, 0.05];
    for beta in [[0, 0], [1, 0], [0, 1], [1, 1], [2, 1]] {
        let d = WeylOperator::derivative(MultiIndex::new(beta));
        let a = m[0].compose(&m[1]).unwrap().compose(&d).unwrap();
        let b = m[1].compose(&m[0]).unwrap().compose(&d).unwrap();
        let pa = apply_weyl_to_kernel(&a, &k, &x, &origin).unwrap();
        let pb = apply_weyl_to_kernel(&b, &k, &x, &origin).unwrap();
        for y in [[0.0, 0.0], [0.7, -0.4], [-1.1, 0.9]] {
            assert_abs_diff_eq!(pa.evaluate(&y), pb.evaluate(&y), epsilon = 1e-11);
        }
    }
}

fn chapman_kolmogorov(d: usize, first: DMatrix<f64>, second: DMatrix<f64>, m1: Vec<f64>, m2: Vec<f64>) {
    let k1 = GaussianKernel::new(0.0, 0.4, m1.clone(), first.clone(), 0.0).unwrap();
    let k2 = GaussianKernel::new(0.4, 1.0, m2.clone(), second.clone(), 0.0).unwrap();
    let m: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a + b).collect();
    let full = GaussianKernel::new(0.0, 1.0, m, first + second, 0.0).unwrap();
    let x = vec![0.2; d];
    let q = Quadrature::GaussHermite { order: 40 };
    for y in [vec![0.0; d], vec![0.9; d], vec![-0.7; d]] {
        let composed =
            gaussian_expectation(&k1.mean(&x), k1.cholesky(), q, &[], |_, z| k2.density(z, &y)).unwrap();
        assert_abs_diff_eq!(composed, full.density(&x, &y), epsilon = 1e-7);
    }
}

#[test]
fn chapman_kolmogorov_one_dimension() {
    chapman_kolmogorov(
        1,
        DMatrix::from_element(1, 1, 0.3),
        DMatrix::from_element(1, 1, 0.5),
        vec![0.1],
        vec![-0.2],
    );
}

#[test]
fn chapman_kolmogorov_two_dimensions() {
    chapman_kolmogorov(
        2,
        DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]),
        DMatrix::from_row_slice(2, 2, &[0.5, -0.05, -0.05, 0.4]),
        vec![0.1, 0.0],
        vec![-0.2, 0.3],
    );
}

#[test]
fn second_x_derivative_closed_form() {
    let c = 0.6;
    let k = GaussianKernel::new(0.0, 1.0, vec![0.0], DMatrix::from_element(1, 1, c), 0.0).unwrap();
    let op = WeylOperator::derivative(MultiIndex::new([2]));
    let x = [0.25];
    let pg = apply_weyl_to_kernel(&op, &k, &x, &[0.0]).unwrap();
    for y in [-1.0, 0.0, 0.4, 1.3] {
        let expected = ((y - x[0]).powi(2) - c) / (c * c) * k.density(&x, &[y]);
        assert_abs_diff_eq!(pg.evaluate(&[y]), expected, epsilon = 1e-14);
    }
}

#[test]
fn hermite_coefficients_of_square() {
    let c = hermite_inner_products(|x| x[0] * x[0], &[0.0], &DMatrix::identity(1, 1), 4).unwrap();
    assert_abs_diff_eq!(c[&MultiIndex::new([0])], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c[&MultiIndex::new([1])], 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c[&MultiIndex::new([2])], 2f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(c[&MultiIndex::new([3])], 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c[&MultiIndex::new([4])], 0.0, epsilon = 1e-12);
}

#[test]
fn kernel_is_normalised_with_killing_factor_apart() {
    let k = kernel_2d();
    let q = Quadrature::GaussHermite { order: 10 };
    let mass = gaussian_expectation(&k.mean(&[0.0, 0.0]), k.cholesky(), q, &[], |_, _| 1.0).unwrap();
    assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-13);
    assert_abs_diff_eq!(k.killing_factor(), (-0.02f64).exp(), epsilon = 1e-15);
}

#[test]
fn mul_poly_y_matches_pointwise_product() {
    let k = kernel_2d();
    let base = apply_weyl_to_kernel(&WeylOperator::identity(2), &k, &[0.1, 0.2], &[0.0, 0.0]).unwrap();
    let p = Polynomial::from_terms(2, [(MultiIndex::new([1, 1]), 2.0), (MultiIndex::new([0, 0]), -0.5)]).unwrap();
    let prod = base.mul_poly_y(&p).unwrap();
    let y = [0.4, -0.3];
    assert_abs_diff_eq!(prod.evaluate(&y), (2.0 * y[0] * y[1] - 0.5) * base.evaluate(&y), epsilon = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_symmetry(x in -2.0f64..2.0, y in -2.0f64..2.0, m in -0.5f64..0.5, c in 0.05f64..2.0) {
        let cov = DMatrix::from_element(1, 1, c);
        let fwd = GaussianKernel::new(0.0, 1.0, vec![m], cov.clone(), 0.0).unwrap();
        let back = GaussianKernel::new(0.0, 1.0, vec![-m], cov, 0.0).unwrap();
        let a = fwd.density(&[x], &[y]);
        let b = back.density(&[y], &[x]);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0));
    }

    #[test]
    fn translation_invariance(x in -2.0f64..2.0, y in -2.0f64..2.0, h in -3.0f64..3.0) {
        let k = kernel_2d();
        let a = k.density(&[x, y], &[y, x]);
        let b = k.density(&[x + h, y + h], &[y + h, x + h]);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }
}
