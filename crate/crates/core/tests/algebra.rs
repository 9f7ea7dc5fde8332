use num_rational::BigRational;
use paraexp::algebra::{
    compositions, rational, simplex_monomial_integral, MultiIndex, Polynomial, TimeMonomial, TimePowers,
    WeylOperator,
};
use proptest::prelude::*;

type Q = BigRational;

fn q(n: i64) -> Q {
    rational(n, 1)
}

fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(q(1), |acc, k| acc * q(k))
}

fn binomial(n: u32, k: u32) -> Q {
    factorial(n) / (factorial(k) * factorial(n - k))
}

prop_compose! {
    fn exponents(d: usize)(e in prop::collection::vec(0u32..3, d)) -> MultiIndex {
        MultiIndex::new(e)
    }
}

prop_compose! {
    fn coefficient()(num in -9i64..10, den in 1i64..5) -> Q {
        rational(num, den)
    }
}

fn operator(d: usize) -> impl Strategy<Value = WeylOperator<Q>> {
    prop::collection::vec((exponents(d), exponents(d), coefficient()), 1..=20).prop_map(move |terms| {
        let mut op = WeylOperator::zero(d);
        for (mult, deriv, c) in terms {
            op.add_assign(&WeylOperator::term(mult, deriv, TimeMonomial::constant(c))).unwrap();
        }
        op
    })
}

fn polynomial(d: usize) -> impl Strategy<Value = Polynomial<Q>> {
    prop::collection::vec((exponents(d), coefficient()), 1..=8)
        .prop_map(move |terms| Polynomial::from_terms(d, terms).unwrap())
}

fn triple() -> impl Strategy<Value = (WeylOperator<Q>, WeylOperator<Q>, WeylOperator<Q>)> {
    (1usize..=3).prop_flat_map(|d| (operator(d), operator(d), operator(d)))
}

fn pair_with_poly() -> impl Strategy<Value = (WeylOperator<Q>, WeylOperator<Q>, Polynomial<Q>)> {
    (1usize..=3).prop_flat_map(|d| (operator(d), operator(d), polynomial(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composition_is_associative((a, b, c) in triple()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left == right);
    }

    #[test]
    fn composition_matches_successive_action((a, b, p) in pair_with_poly()) {
        let composed = a.compose(&b).unwrap().apply_to_polynomial(&p).unwrap();
        let nested = a.apply_to_polynomial(&b.apply_to_polynomial(&p).unwrap()).unwrap();
        prop_assert!(composed == nested);
    }
}

#[test]
fn canonical_commutation() {
    for d in 1..=3 {
        for i in 0..d {
            for j in 0..d {
                let dx = WeylOperator::<Q>::partial(d, i).compose(&WeylOperator::coordinate(d, j)).unwrap();
                let xd = WeylOperator::<Q>::coordinate(d, j).compose(&WeylOperator::partial(d, i)).unwrap();
                let mut expected = xd.clone();
                if i == j {
                    expected = expected.add(&WeylOperator::identity(d)).unwrap();
                }
                assert!(dx == expected, "D_{i} x_{j} in d = {d}");
            }
        }
    }
}

#[test]
fn difference_of_squares() {
    let x = Polynomial::<Q>::variable(1, 0);
    let one = Polynomial::<Q>::one(1);
    let prod = x.add(&one).unwrap().mul(&x.sub(&one).unwrap()).unwrap();
    let expected = Polynomial::from_terms(1, [(MultiIndex::new(vec![2]), q(1)), (MultiIndex::new(vec![0]), q(-1))])
        .unwrap();
    assert!(prod == expected);
}

#[test]
fn simplex_volume_is_exact() {
    let horizon = rational(7, 3);
    for h in 1..=6 {
        let op = WeylOperator::<Q>::identity(2).simplex_integrate(h, &horizon).unwrap();
        let expected = (0..h).fold(q(1), |acc, _| acc * horizon.clone()) / factorial(h as u32);
        let zero = MultiIndex::zeros(2);
        assert_eq!(op.coefficient(&zero, &zero, &TimePowers::none()), expected, "h = {h}");
        assert_eq!(op.len(), 1);
    }
}

#[test]
fn beta_identity_against_recursive_integrator() {
    // ∫_t^T (T−s)^n (s−t)^k ds via (T−s)^n = Σ_j C(n,j) v^{n−j} (−1)^j (s−t)^j
    let v = rational(5, 2);
    let pow = |e: u32| (0..e).fold(q(1), |acc, _| acc * v.clone());
    for n in 0..=4u32 {
        for k in 0..=4u32 {
            let mut total = q(0);
            for j in 0..=n {
                let sign = if j % 2 == 0 { q(1) } else { q(-1) };
                let inner = simplex_monomial_integral(&TimePowers::single(1, k + j), 1, &v).unwrap();
                total = total + binomial(n, j) * pow(n - j) * sign * inner;
            }
            let expected = factorial(k) * factorial(n) / factorial(k + n + 1) * pow(k + n + 1);
            assert_eq!(total, expected, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn ordered_simplex_monomials() {
    // ∫_{0<s1<s2<v} s1 ds = v³/6, ∫ s2 ds = v³/3
    let v = rational(3, 1);
    let a = simplex_monomial_integral(&TimePowers::single(1, 1), 2, &v).unwrap();
    let b = simplex_monomial_integral(&TimePowers::single(2, 1), 2, &v).unwrap();
    assert_eq!(a, rational(27, 6));
    assert_eq!(b, rational(27, 3));
    assert!(simplex_monomial_integral::<Q>(&TimePowers::single(3, 1), 2, &v).is_err());
}

#[test]
fn compositions_of_three() {
    assert_eq!(compositions(3, 1).unwrap(), vec![vec![3]]);
    assert_eq!(compositions(3, 2).unwrap(), vec![vec![1, 2], vec![2, 1]]);
    assert_eq!(compositions(3, 3).unwrap(), vec![vec![1, 1, 1]]);
}

#[test]
fn composition_counts_are_powers_of_two() {
    for n in 1..=8usize {
        let total: usize = (1..=n).map(|h| compositions(n, h).unwrap().len()).sum();
        assert_eq!(total, 1 << (n - 1), "n = {n}");
        for h in 1..=n {
            for c in compositions(n, h).unwrap() {
                assert_eq!(c.len(), h);
                assert_eq!(c.iter().sum::<usize>(), n);
                assert!(c.iter().all(|&i| i >= 1));
            }
        }
    }
}

#[test]
fn float_and_rational_modes_agree() {
    let build = |c: fn(i64, i64) -> f64| {
        let mut op = WeylOperator::<f64>::zero(2);
        op.add_assign(&WeylOperator::term(
            MultiIndex::new(vec![1, 0]),
            MultiIndex::new(vec![0, 2]),
            TimeMonomial::constant(c(3, 2)),
        ))
        .unwrap();
        op.add_assign(&WeylOperator::term(
            MultiIndex::new(vec![0, 1]),
            MultiIndex::new(vec![1, 1]),
            TimeMonomial::constant(c(-1, 3)),
        ))
        .unwrap();
        op
    };
    let f = build(|a, b| a as f64 / b as f64);
    let sq = f.compose(&f).unwrap();
    let r = f.map_coefficients(|c| {
        let scaled = (c * 6.0).round() as i64;
        rational(scaled, 6)
    });
    let rsq = r.compose(&r).unwrap();
    for (key, c) in rsq.terms() {
        let fc = sq.coefficient(&key.mult, &key.deriv, &key.time);
        let exact = num_traits::ToPrimitive::to_f64(c).unwrap();
        assert!((fc - exact).abs() < 1e-14 * exact.abs().max(1.0));
    }
    assert_eq!(sq.len(), rsq.len());
}
