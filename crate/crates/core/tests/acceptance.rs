//! Acceptance suite: one PASS/FAIL line per criterion, run with `--nocapture`
//! to see the report.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_rational::BigRational;
use paraexp::algebra::{
    compositions, rational, simplex_monomial_integral, Polynomial, TimeMonomial, TimePowers, WeylOperator,
};
use paraexp::basis::{CoefficientField, PolynomialModel};
use paraexp::engine::{adjoint_dilation_operators, dilation_operators, duhamel_u1, DuhamelQuadrature};
use paraexp::gaussian::{apply_weyl_in_y, apply_weyl_to_kernel, gaussian_expectation, GaussianKernel, Quadrature};
use paraexp::lab::{preset, run_bootstrap, run_convergence, run_density, ExperimentConfig, PRESET_NAMES};
use paraexp::oracles::{exact_constant_solution, fd_value, mc_solve, ConstantCoefficients, GridSpec, McSettings};
use paraexp::{ExpansionPlan, ExpansionScheme, FrozenPoint, MultiIndex, Payoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, title: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = check();
    let elapsed = start.elapsed();
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let pass = out.pass && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0} s", l.as_secs_f64()));
    println!(
        "criterion {id:>2} [{}] {title}: {} ({:.2} s{budget})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn tanh_plan(order: usize) -> ExpansionPlan {
    let p = preset("tanh_localvol").unwrap();
    ExpansionPlan::new(p.field, ExpansionScheme::taylor(p.spot), order).unwrap()
}

fn bump() -> Payoff {
    Payoff::GaussianBump { center: 0.4, width: 0.5 }
}

fn constant_exactness() -> Outcome {
    let p = preset("black_scholes").unwrap();
    let c = ConstantCoefficients::frozen(&p.field, 0.0, &p.spot).unwrap();
    let payoffs = ["call", "digital", "bump"].map(|n| p.payoff(n).unwrap());
    let mut worst: f64 = 0.0;
    for order in 0..=3 {
        let plan = ExpansionPlan::new(p.field.clone(), ExpansionScheme::taylor(p.spot.clone()), order).unwrap();
        for v in [0.1, 0.5, 1.0, 2.0] {
            for x in [-0.2, 0.0, 0.15] {
                for payoff in &payoffs {
                    let u = plan.solve(payoff, 0.0, &[x], v).unwrap().value;
                    let exact = exact_constant_solution(&c, payoff, 0.0, &[x], v).unwrap();
                    worst = worst.max((u - exact).abs());
                }
            }
        }
    }
    outcome(worst < 1e-9, format!("max |ū_N − exact| = {worst:.1e} over N = 0..3, 4 horizons, 3 payoffs"))
}

fn duhamel_agreement() -> Outcome {
    let plan = tanh_plan(1);
    let x = [0.4];
    let mut worst: f64 = 0.0;
    for v in [0.25, 0.5] {
        let u1 = plan.solve(&bump(), 0.0, &x, v).unwrap().terms[1];
        let d = duhamel_u1(&plan, &bump(), 0.0, &x, v, DuhamelQuadrature::default()).unwrap();
        worst = worst.max((u1 - d).abs() / u1.abs());
    }
    outcome(worst < 1e-5, format!("max relative gap between u_1 and the Duhamel integral = {worst:.1e}"))
}

fn random_point(rng: &mut ChaCha8Rng, center: &[f64], spread: f64) -> Vec<f64> {
    center.iter().map(|c| c + rng.random_range(-spread..spread)).collect()
}

fn identity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let cov = DMatrix::from_row_slice(2, 2, &[0.4, 0.12, 0.12, 0.25]);
    let k = GaussianKernel::new(0.0, 0.8, vec![0.15, -0.05], cov, 0.0).unwrap();
    let origin = [0.0, 0.0];

    // derivative duality and multiplication identities
    let (mut dual, mut mult): (f64, f64) = (0.0, 0.0);
    let m = dilation_operators(k.mean_offset(), k.covariance(), None);
    let m_bar = adjoint_dilation_operators(k.mean_offset(), k.covariance());
    let h = 1e-4;
    for _ in 0..20 {
        let x = random_point(&mut rng, &[0.0, 0.0], 0.5);
        let y = random_point(&mut rng, &[0.1, 0.0], 1.0);
        let g = k.density(&x, &y);
        for i in 0..2 {
            let bump_at = |p: &[f64], s: f64| {
                let mut q = p.to_vec();
                q[i] += s;
                q
            };
            let dx = (k.density(&bump_at(&x, h), &y) - k.density(&bump_at(&x, -h), &y)) / (2.0 * h);
            let dy = (k.density(&x, &bump_at(&y, h)) - k.density(&x, &bump_at(&y, -h))) / (2.0 * h);
            dual = dual.max((dx + dy).abs());
            let my = apply_weyl_to_kernel(&m[i], &k, &x, &origin).unwrap().evaluate(&y);
            let mx = apply_weyl_in_y(&m_bar[i], &k, &x, &origin).unwrap().evaluate(&y);
            mult = mult.max((my - y[i] * g).abs()).max((mx - x[i] * g).abs());
        }
    }
    if dual >= 1e-6 {
        failures.push(format!("derivative duality {dual:.1e}"));
    }
    if mult >= 1e-10 {
        failures.push(format!("multiplication {mult:.1e}"));
    }

    // G / Ḡ duality, n ≤ 2, d ≤ 2
    let mut gdual: f64 = 0.0;
    for (name, center, spread) in [("tanh_localvol", vec![0.1], 0.3), ("heston_like_2d", vec![0.0, 0.04], 0.02)] {
        let p = preset(name).unwrap();
        let plan = ExpansionPlan::new(p.field, ExpansionScheme::taylor(center.clone()), 2)
            .unwrap()
            .with_frozen_point(FrozenPoint::Fixed);
        let rates = plan.local_expansion(0.0, &center, 1.0).unwrap().kernel.clone();
        let v = 0.6;
        let mean: Vec<f64> = rates.mean_offset().iter().map(|m| m * v).collect();
        let kernel = GaussianKernel::new(0.0, v, mean, rates.covariance() * v, 0.0).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut rng, &center, spread);
            let s = rng.random_range(0.0..v);
            let y: Vec<f64> = kernel
                .mean(&x)
                .iter()
                .enumerate()
                .map(|(i, mu)| mu + rng.random_range(-1.5..1.5) * kernel.covariance()[(i, i)].sqrt())
                .collect();
            for n in 1..=2 {
                let (g, g_bar, o) = plan.generator_pair(n, 0.0, s, v, &x).unwrap();
                let lhs = apply_weyl_to_kernel(&g, &kernel, &x, &o).unwrap().evaluate(&y);
                let rhs = apply_weyl_in_y(&g_bar, &kernel, &x, &o).unwrap().evaluate(&y);
                gdual = gdual.max((lhs - rhs).abs() / kernel.density(&x, &y).max(1.0));
            }
        }
    }
    if gdual >= 1e-8 {
        failures.push(format!("G/Ḡ duality {gdual:.1e}"));
    }

    // commutation of M_1 M_2 D^β on Γ_0, d = 2, |β| ≤ 2
    let mut comm: f64 = 0.0;
    for beta in MultiIndex::all_up_to(2, 2) {
        let d = WeylOperator::derivative(beta);
        let a = m[0].compose(&m[1]).unwrap().compose(&d).unwrap();
        let b = m[1].compose(&m[0]).unwrap().compose(&d).unwrap();
        let x = [0.3, -0.2];
        let pa = apply_weyl_to_kernel(&a, &k, &x, &[0.1, 0.05]).unwrap();
        let pb = apply_weyl_to_kernel(&b, &k, &x, &[0.1, 0.05]).unwrap();
        for y in [[0.0, 0.0], [0.7, -0.4], [-1.1, 0.9]] {
            comm = comm.max((pa.evaluate(&y) - pb.evaluate(&y)).abs());
        }
    }
    if comm >= 1e-11 {
        failures.push(format!("commutation {comm:.1e}"));
    }

    // Chapman–Kolmogorov, d = 1, 2
    let mut ck: f64 = 0.0;
    let cases = [
        (DMatrix::from_element(1, 1, 0.3), DMatrix::from_element(1, 1, 0.5), vec![0.1], vec![-0.2]),
        (
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]),
            DMatrix::from_row_slice(2, 2, &[0.5, -0.05, -0.05, 0.4]),
            vec![0.1, 0.0],
            vec![-0.2, 0.3],
        ),
    ];
    for (c1, c2, m1, m2) in cases {
        let d = m1.len();
        let k1 = GaussianKernel::new(0.0, 0.4, m1.clone(), c1.clone(), 0.0).unwrap();
        let k2 = GaussianKernel::new(0.4, 1.0, m2.clone(), c2.clone(), 0.0).unwrap();
        let total: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a + b).collect();
        let full = GaussianKernel::new(0.0, 1.0, total, c1 + c2, 0.0).unwrap();
        let x = vec![0.2; d];
        for y in [vec![0.0; d], vec![0.9; d], vec![-0.7; d]] {
            let q = Quadrature::GaussHermite { order: 40 };
            let lhs = gaussian_expectation(&k1.mean(&x), k1.cholesky(), q, &[], |_, z| k2.density(z, &y)).unwrap();
            ck = ck.max((lhs - full.density(&x, &y)).abs());
        }
    }
    if ck >= 1e-7 {
        failures.push(format!("Chapman–Kolmogorov {ck:.1e}"));
    }
    let detail = format!(
        "duality {dual:.1e}, multiplication {mult:.1e}, G/Ḡ {gdual:.1e}, commutation {comm:.1e}, \
         Chapman–Kolmogorov {ck:.1e}"
    );
    outcome(failures.is_empty(), detail)
}

fn slope_report(report_fits: &[paraexp::lab::SlopeFit]) -> (bool, String) {
    let pass = report_fits.iter().all(|f| f.passes == Some(true));
    let text = report_fits
        .iter()
        .map(|f| match f.slope {
            Some(s) => format!("N={} slope {s:.2} (≥ {:.2})", f.order, f.expected - 0.3),
            None => format!("N={} no fit", f.order),
        })
        .collect::<Vec<_>>()
        .join(", ");
    (pass, text)
}

fn price_rate() -> Outcome {
    let exp = ExperimentConfig::from_toml_str(
        r#"
[model]
preset = "tanh_localvol"
[scheme]
orders = [0, 1, 2]
[payoff]
kind = "bump"
center = 0.4
width = 0.5
[evaluation]
points = [[0.4]]
horizons = [0.05, 0.1, 0.2, 0.4, 0.8]
[oracle]
kind = "fd"
"#,
    )
    .unwrap()
    .build()
    .unwrap();
    let report = run_convergence(&exp).unwrap();
    let oracle = report.rows.iter().fold(0.0_f64, |m, r| m.max(r.oracle_error));
    let all_used = report.fits.iter().all(|f| f.used == 5);
    let (pass, text) = slope_report(&report.fits);
    outcome(
        pass && oracle < 1e-6 && all_used,
        format!("{text}; oracle self-error ≤ {oracle:.1e}"),
    )
}

fn density_rate() -> Outcome {
    let exp = ExperimentConfig::from_toml_str(
        r#"
[model]
preset = "tanh_localvol"
[scheme]
orders = [1, 2]
[evaluation]
horizons = [0.05, 0.1, 0.2, 0.4, 0.8]
[oracle]
kind = "fd"
"#,
    )
    .unwrap()
    .build()
    .unwrap();
    let report = run_density(&exp).unwrap();
    let lattice = report.rows.len() == 2 * 5 * 81;
    let finite = report.rows.iter().all(|r| r.ratio.is_finite());
    let (pass, text) = slope_report(&report.fits);
    outcome(pass && lattice && finite, format!("sampled max of |Γ − Γ̄_N| / Γ^(M+ε) on 9×9 lattice: {text}"))
}

fn bootstrap_rate() -> Outcome {
    let exp = ExperimentConfig::from_toml_str(
        r#"
[model]
preset = "tanh_localvol"
[scheme]
orders = [1]
[payoff]
kind = "bump"
center = 0.4
width = 0.5
[evaluation]
points = [[0.4]]
bootstrap_steps = [1, 2, 4, 8, 16]
bootstrap_horizon = 1.0
[oracle]
kind = "fd"
"#,
    )
    .unwrap()
    .build()
    .unwrap();
    let report = run_bootstrap(&exp).unwrap();
    let first = report.rows.first().unwrap().error.abs();
    let last = report.rows.last().unwrap().error.abs();
    let ratio = last / first;
    let (pass, text) = slope_report(&report.fits);
    outcome(
        pass && ratio <= 0.25 && report.fits[0].used == 5,
        format!("{text}; |error(m=16)| / |error(m=1)| = {ratio:.3} (≤ 0.25)"),
    )
}

fn basis_equivalences() -> Outcome {
    let tanh = preset("tanh_localvol").unwrap().field;
    let taylor = ExpansionScheme::taylor(vec![0.3]).centred_expansion(&tanh, 4, 0.0).unwrap();
    let enhanced = ExpansionScheme::EnhancedTaylor {
        center: vec![0.3],
        groups: vec![1, 2, 3, 4],
    }
    .centred_expansion(&tanh, 4, 0.0)
    .unwrap();
    let bit_exact = taylor.terms == enhanced.terms;

    let p = |terms: &[(u32, f64)]| Polynomial::from_terms(1, terms.iter().map(|&(e, c)| (MultiIndex::from([e]), c))).unwrap();
    let model = PolynomialModel::new(
        1,
        vec![
            (MultiIndex::from([2]), p(&[(0, 0.05), (1, 0.01), (2, 0.02)])),
            (MultiIndex::from([1]), p(&[(0, 0.1), (3, -0.03)])),
            (MultiIndex::from([0]), p(&[(2, -0.01)])),
        ],
    )
    .unwrap();
    let field = CoefficientField::new(model, 6, 1e6).unwrap();
    let n = 3;
    let hermite = ExpansionScheme::Hermite {
        center: vec![0.2],
        weight: DMatrix::from_element(1, 1, 0.5),
    }
    .centred_expansion(&field, n, 0.0)
    .unwrap();
    let taylor = ExpansionScheme::taylor(vec![0.2]).centred_expansion(&field, n, 0.0).unwrap();
    let mut gap: f64 = 0.0;
    for alpha in field.terms() {
        for z in [-1.0, -0.3, 0.0, 0.5, 1.2] {
            let sum = |terms: &[std::collections::BTreeMap<MultiIndex, Polynomial<f64>>]| -> f64 {
                terms.iter().filter_map(|t| t.get(alpha)).map(|q| q.evaluate(&[z]).unwrap()).sum()
            };
            gap = gap.max((sum(&hermite.terms) - sum(&taylor.terms)).abs());
        }
    }
    outcome(
        bit_exact && gap < 1e-10,
        format!("enhanced Taylor with M_n = n bit-exact: {bit_exact}; Hermite vs Taylor partial sums {gap:.1e}"),
    )
}

fn random_operator(rng: &mut ChaCha8Rng, d: usize) -> WeylOperator<Q> {
    let mut op = WeylOperator::zero(d);
    for _ in 0..rng.random_range(1..=20) {
        let mult = MultiIndex::new((0..d).map(|_| rng.random_range(0..3u32)));
        let deriv = MultiIndex::new((0..d).map(|_| rng.random_range(0..3u32)));
        let c = rational(rng.random_range(-9..10), rng.random_range(1..5));
        op.add_assign(&WeylOperator::term(mult, deriv, TimeMonomial::constant(c))).unwrap();
    }
    op
}

fn random_polynomial(rng: &mut ChaCha8Rng, d: usize) -> Polynomial<Q> {
    let terms = (0..rng.random_range(1..=8)).map(|_| {
        let e = MultiIndex::new((0..d).map(|_| rng.random_range(0..4u32)));
        (e, rational(rng.random_range(-9..10), rng.random_range(1..5)))
    });
    Polynomial::from_terms(d, terms.collect::<Vec<_>>()).unwrap()
}

fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(rational(1, 1), |acc, k| acc * rational(k, 1))
}

fn algebra_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut assoc, mut action) = (0, 0);
    for _ in 0..200 {
        let d = rng.random_range(1..=3);
        let (a, b, c) = (random_operator(&mut rng, d), random_operator(&mut rng, d), random_operator(&mut rng, d));
        if a.compose(&b).unwrap().compose(&c).unwrap() == a.compose(&b.compose(&c).unwrap()).unwrap() {
            assoc += 1;
        }
        let p = random_polynomial(&mut rng, d);
        let lhs = a.compose(&b).unwrap().apply_to_polynomial(&p).unwrap();
        let rhs = a.apply_to_polynomial(&b.apply_to_polynomial(&p).unwrap()).unwrap();
        if lhs == rhs {
            action += 1;
        }
    }
    let horizon = rational(7, 3);
    let volume = (1..=6).all(|h| {
        let expected = (0..h).fold(rational(1, 1), |acc, _| acc * horizon.clone()) / factorial(h as u32);
        simplex_monomial_integral(&TimePowers::none(), h, &horizon).unwrap() == expected
    });
    let v = rational(5, 2);
    let pow = |e: u32| (0..e).fold(rational(1, 1), |acc, _| acc * v.clone());
    let mut beta = true;
    for n in 0..=4u32 {
        for k in 0..=4u32 {
            let mut total = rational(0, 1);
            for j in 0..=n {
                let sign = if j % 2 == 0 { rational(1, 1) } else { rational(-1, 1) };
                let binom = factorial(n) / (factorial(j) * factorial(n - j));
                let inner = simplex_monomial_integral(&TimePowers::single(1, k + j), 1, &v).unwrap();
                total = total + binom * pow(n - j) * sign * inner;
            }
            beta &= total == factorial(k) * factorial(n) / factorial(k + n + 1) * pow(k + n + 1);
        }
    }
    outcome(
        assoc == 200 && action == 200 && volume && beta,
        format!("associativity {assoc}/200, action {action}/200, simplex volume h ≤ 6: {volume}, Beta n,k ≤ 4: {beta}"),
    )
}

fn combinatorics() -> Outcome {
    let verbatim = compositions(3, 1).unwrap() == vec![vec![3]]
        && compositions(3, 2).unwrap() == vec![vec![1, 2], vec![2, 1]]
        && compositions(3, 3).unwrap() == vec![vec![1, 1, 1]];
    let counts = (1..=8usize).all(|n| {
        (1..=n).map(|h| compositions(n, h).unwrap().len()).sum::<usize>() == 1 << (n - 1)
    });
    outcome(verbatim && counts, format!("I_(3,·) verbatim: {verbatim}; Σ_h |I_(n,h)| = 2^(n−1) for n ≤ 8: {counts}"))
}

fn oracle_concordance() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    let v = 0.5;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let payoff = p.payoff("call").unwrap();
        let spec = if p.field.dim() == 2 {
            Some(GridSpec::around(&p.field, 0.0, &p.spot, v, 10.0).unwrap().with_points(161).with_steps(160))
        } else {
            None
        };
        let (fd, _) = fd_value(&p.field, &payoff, 0.0, &p.spot, v, spec).unwrap();
        let settings = McSettings {
            paths: 1_000_000,
            steps: 50,
            richardson: true,
            ..McSettings::default()
        };
        let mc = mc_solve(&p.field, &payoff, 0.0, &p.spot, v, settings).unwrap();
        let z = (mc.value - fd) / mc.std_error;
        worst = worst.max(z.abs());
        lines.push(format!("{name} {z:+.2}"));
    }
    outcome(worst <= 3.0, format!("(MC − FD)/SE: {}", lines.join(", ")))
}

#[test]
fn acceptance() {
    let results = [
        run(1, "constant-coefficient exactness", secs(1), constant_exactness),
        run(2, "first-order operator vs Duhamel", secs(30), duhamel_agreement),
        run(3, "kernel identity suite", secs(60), identity_suite),
        run(4, "price convergence rate", secs(600), price_rate),
        run(5, "density rate", secs(600), density_rate),
        run(6, "bootstrap rate", secs(900), bootstrap_rate),
        run(7, "basis equivalences", None, basis_equivalences),
        run(8, "algebra suite", None, algebra_suite),
        run(9, "combinatorics", None, combinatorics),
        run(10, "oracle concordance", None, oracle_concordance),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len(), "acceptance criteria failed");
}
