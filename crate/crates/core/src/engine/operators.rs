//! Construction of `G_n`, its adjoint `Ḡ_n` and `L_n` in the Weyl algebra.
//!
//! Operators act on the local coordinate `z = x − x̄`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::algebra::{compositions, MultiIndex, Polynomial, TimeMonomial, TimePowers, WeylOperator};
use crate::error::{ensure_dim, Result};

/// `M_i = z_i + m_i + Σ_k C_ik ∂_k`.
///
/// With `time_var = Some(j)` the mean and covariance are rates and both carry
/// the symbolic factor `τ_j = s_j − t`, which is the time-homogeneous case
/// `m(t,s) = m·(s−t)`, `C(t,s) = C·(s−t)`.
pub fn dilation_operators(mean: &[f64], cov: &DMatrix<f64>, time_var: Option<usize>) -> Vec<WeylOperator> {
    affine_operators(mean, cov, time_var, 1.0)
}

/// `M̄_i = y_i − m_i + Σ_k C_ik ∂_{y_k}`.
pub fn adjoint_dilation_operators(mean: &[f64], cov: &DMatrix<f64>) -> Vec<WeylOperator> {
    affine_operators(mean, cov, None, -1.0)
}

fn affine_operators(mean: &[f64], cov: &DMatrix<f64>, time_var: Option<usize>, mean_sign: f64) -> Vec<WeylOperator> {
    let d = mean.len();
    let powers = match time_var {
        Some(j) => TimePowers::single(j, 1),
        None => TimePowers::none(),
    };
    let zero = MultiIndex::zeros(d);
    (0..d)
        .map(|i| {
            let mut op = WeylOperator::coordinate(d, i);
            let shift = WeylOperator::term(
                zero.clone(),
                zero.clone(),
                TimeMonomial::new(mean_sign * mean[i], powers.clone()),
            );
            op.add_assign(&shift).expect("same dimension");
            for k in 0..d {
                let c = cov[(i, k)];
                if c != 0.0 {
                    let term = WeylOperator::term(
                        zero.clone(),
                        MultiIndex::unit(d, k),
                        TimeMonomial::new(c, powers.clone()),
                    );
                    op.add_assign(&term).expect("same dimension");
                }
            }
            op
        })
        .collect()
}

/// `p(M_1, …, M_d)` for pairwise commuting operators `M_i`.
pub fn substitute_operators(p: &Polynomial<f64>, ops: &[WeylOperator]) -> Result<WeylOperator> {
    let d = p.dim();
    ensure_dim(d, ops.len())?;
    let mut powers: Vec<Vec<WeylOperator>> = ops.iter().map(|m| vec![WeylOperator::identity(d), m.clone()]).collect();
    let mut out = WeylOperator::zero(d);
    for (beta, c) in p.terms() {
        let mut term = WeylOperator::scalar(d, *c);
        for (i, b) in beta.iter().enumerate() {
            let b = b as usize;
            while powers[i].len() <= b {
                let next = powers[i].last().expect("non-empty").compose(&ops[i])?;
                powers[i].push(next);
            }
            if b > 0 {
                term = term.compose(&powers[i][b])?;
            }
        }
        out.add_assign(&term)?;
    }
    Ok(out)
}

/// `G = Σ_α p_α(M) D^α`.
pub fn g_operator(coefficients: &BTreeMap<MultiIndex, Polynomial<f64>>, dilation: &[WeylOperator]) -> Result<WeylOperator> {
    let d = dilation.len();
    let mut out = WeylOperator::zero(d);
    for (alpha, p) in coefficients {
        let a = substitute_operators(p, dilation)?;
        out.add_assign(&a.compose(&WeylOperator::derivative(alpha.clone()))?)?;
    }
    Ok(out)
}

/// `Ḡ = Σ_α (−1)^{|α|} D^α p_α(M̄)`, acting in the backward variable.
pub fn g_bar_operator(coefficients: &BTreeMap<MultiIndex, Polynomial<f64>>, adjoint_dilation: &[WeylOperator]) -> Result<WeylOperator> {
    let d = adjoint_dilation.len();
    let mut out = WeylOperator::zero(d);
    for (alpha, p) in coefficients {
        let a = substitute_operators(p, adjoint_dilation)?;
        let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
        let term = WeylOperator::derivative(alpha.clone()).compose(&a)?.scale(&sign);
        out.add_assign(&term)?;
    }
    Ok(out)
}

/// `L_n = Σ_h ∫_{t<s_1<⋯<s_h<T} Σ_{i∈I_{n,h}} G_{i_1}(s_1)⋯G_{i_h}(s_h)` with exact
/// simplex integration.
///
/// `g(k, j)` must return `G_k` with its time dependence carried by the symbolic
/// variable `τ_j`, `j ≥ 1`.
pub fn l_operator_exact<F>(n: usize, horizon: f64, prune: f64, mut g: F) -> Result<WeylOperator>
where
    F: FnMut(usize, usize) -> Result<WeylOperator>,
{
    let mut factors: HashMap<(usize, usize), WeylOperator> = HashMap::new();
    let mut suffixes: HashMap<(usize, Vec<usize>), WeylOperator> = HashMap::new();
    let mut total: Option<WeylOperator> = None;
    for h in 1..=n {
        let mut level: Option<WeylOperator> = None;
        for comp in compositions(n, h)? {
            let product = suffix_product(&comp, 1, &mut factors, &mut suffixes, &mut g)?;
            match &mut level {
                Some(acc) => acc.add_assign(&product)?,
                None => level = Some(product),
            }
        }
        let integrated = level.expect("I_{n,h} is non-empty").simplex_integrate(h, &horizon)?;
        match &mut total {
            Some(acc) => acc.add_assign(&integrated)?,
            None => total = Some(integrated),
        }
    }
    let total = total.expect("n ≥ 1");
    Ok(if prune > 0.0 { total.prune_relative(prune) } else { total })
}

fn suffix_product<F>(
    comp: &[usize],
    var: usize,
    factors: &mut HashMap<(usize, usize), WeylOperator>,
    suffixes: &mut HashMap<(usize, Vec<usize>), WeylOperator>,
    g: &mut F,
) -> Result<WeylOperator>
where
    F: FnMut(usize, usize) -> Result<WeylOperator>,
{
    let key = (var, comp.to_vec());
    if let Some(op) = suffixes.get(&key) {
        return Ok(op.clone());
    }
    let head = match factors.get(&(comp[0], var)) {
        Some(op) => op.clone(),
        None => {
            let op = g(comp[0], var)?;
            factors.insert((comp[0], var), op.clone());
            op
        }
    };
    let product = if comp.len() == 1 {
        head
    } else {
        let rest = suffix_product(&comp[1..], var + 1, factors, suffixes, g)?;
        head.compose(&rest)?
    };
    suffixes.insert(key, product.clone());
    Ok(product)
}
