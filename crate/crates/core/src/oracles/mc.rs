use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::algebra::MultiIndex;
use crate::basis::CoefficientField;
use crate::error::{ensure_dim, Error, Result};
use crate::payoff::Payoff;

/// Euler–Maruyama settings for [`mc_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McSettings {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Pair every path with its reflection; a pair counts as two paths.
    pub antithetic: bool,
    /// Paths per RNG stream.
    pub block: usize,
    /// Combine each path with a coupled path of half as many steps,
    /// `2φ(X^{Δt}) − φ(X^{2Δt})`, cancelling the first-order Euler bias.
    /// Needs an even step count.
    pub richardson: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            paths: 1_000_000,
            steps: 100,
            seed: 0,
            antithetic: true,
            block: 8192,
            richardson: false,
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// `E[e^{∫_t^T γ(s,X_s)ds} φ(X_T) | X_t = x]` for `dX = m dt + √C dW`.
///
/// Block `b` draws from stream `b` of a ChaCha8 generator seeded with `seed`,
/// and blocks are reduced in order, so results do not depend on the thread
/// count.
pub fn mc_solve(
    field: &CoefficientField,
    payoff: &Payoff,
    t: f64,
    x: &[f64],
    maturity: f64,
    settings: McSettings,
) -> Result<McEstimate> {
    let d = field.dim();
    ensure_dim(d, x.len())?;
    if !(t < maturity)
        || settings.steps == 0
        || settings.paths < 2
        || settings.block == 0
        || (settings.richardson && settings.steps % 2 == 1)
    {
        return Err(Error::InvalidInput(format!(
            "need t < T, steps ≥ 1, paths ≥ 2 and a positive block size, got {settings:?}"
        )));
    }
    let dt = (maturity - t) / settings.steps as f64;
    let units = if settings.antithetic { settings.paths / 2 } else { settings.paths };
    let blocks = units.div_ceil(settings.block);
    let sim = Simulator::new(field, payoff, t, dt, settings.steps);
    let sums = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(b as u64);
            let count = settings.block.min(units - b * settings.block);
            let mut noise = vec![0.0; d * settings.steps];
            let mut ws = sim.workspace();
            let mut acc = Moments::default();
            let draw = |sign: f64, noise: &[f64], ws: &mut Workspace| -> Result<f64> {
                let fine = sim.path(x, noise, sign, 1, ws)?;
                if settings.richardson {
                    Ok(2.0 * fine - sim.path(x, noise, sign, 2, ws)?)
                } else {
                    Ok(fine)
                }
            };
            for _ in 0..count {
                for z in noise.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                let mut sample = draw(1.0, &noise, &mut ws)?;
                if settings.antithetic {
                    sample = 0.5 * (sample + draw(-1.0, &noise, &mut ws)?);
                }
                acc.push(sample);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Moments>>>()?;
    let total = sums.iter().fold(Moments::default(), |a, b| a.merge(b));
    let n = units as f64;
    let mean = total.mean;
    let var = total.m2 / (n - 1.0);
    if !mean.is_finite() {
        return Err(Error::Numerical("Monte Carlo estimate is not finite".into()));
    }
    Ok(McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        paths: if settings.antithetic { 2 * units } else { units },
    })
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&self, other: &Moments) -> Moments {
        let count = self.count + other.count;
        if count == 0.0 {
            return Moments::default();
        }
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

struct Simulator<'a> {
    field: &'a CoefficientField,
    payoff: &'a Payoff,
    t: f64,
    dt: f64,
    steps: usize,
    drift: Vec<MultiIndex>,
    /// `(i, j, α)` with `α = e_i + e_j`, `j ≤ i`.
    second: Vec<(usize, usize, MultiIndex)>,
    killing: MultiIndex,
}

/// Per-path scratch space.
struct Workspace {
    x: Vec<f64>,
    drift: Vec<f64>,
    cov: Vec<f64>,
    root: Vec<f64>,
}

impl<'a> Simulator<'a> {
    fn new(field: &'a CoefficientField, payoff: &'a Payoff, t: f64, dt: f64, steps: usize) -> Self {
        let d = field.dim();
        let unit = |i| MultiIndex::unit(d, i);
        let second = (0..d)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .map(|(i, j): (usize, usize)| (i, j, unit(i).add(&unit(j))))
            .collect();
        Simulator {
            field,
            payoff,
            t,
            dt,
            steps,
            drift: (0..d).map(unit).collect(),
            second,
            killing: MultiIndex::zeros(d),
        }
    }

    fn workspace(&self) -> Workspace {
        let d = self.drift.len();
        Workspace {
            x: vec![0.0; d],
            drift: vec![0.0; d],
            cov: vec![0.0; d * d],
            root: vec![0.0; d * d],
        }
    }

    /// Discounted payoff along one Euler path with `steps / stride` steps of
    /// size `stride·dt`; each increment sums `stride` consecutive draws.
    fn path(&self, x0: &[f64], noise: &[f64], sign: f64, stride: usize, ws: &mut Workspace) -> Result<f64> {
        let d = x0.len();
        let field = self.field;
        let h = stride as f64 * self.dt;
        let sqrt_dt = self.dt.sqrt();
        ws.x.copy_from_slice(x0);
        let mut gamma_prev = field.value(&self.killing, self.t, &ws.x);
        let mut log_discount = 0.0;
        for k in 0..self.steps / stride {
            let s = self.t + k as f64 * h;
            for (i, j, alpha) in &self.second {
                // C_ii = 2 a_{2e_i}, C_ij = a_{e_i+e_j}
                let v = field.value(alpha, s, &ws.x);
                if i == j {
                    ws.cov[i * d + i] = 2.0 * v;
                } else {
                    ws.cov[i * d + j] = v;
                    ws.cov[j * d + i] = v;
                }
            }
            if !psd_cholesky(&ws.cov, d, &mut ws.root) {
                return Err(Error::ModelRejected(format!(
                    "diffusion matrix is not positive semi-definite at {:?}",
                    ws.x
                )));
            }
            for i in 0..d {
                ws.drift[i] = field.value(&self.drift[i], s, &ws.x);
            }
            for i in 0..d {
                let mut shock = 0.0;
                for j in 0..=i {
                    let z: f64 = (0..stride).map(|r| noise[(k * stride + r) * d + j]).sum();
                    shock += ws.root[i * d + j] * z;
                }
                ws.drift[i] = ws.drift[i] * h + sign * sqrt_dt * shock;
            }
            for i in 0..d {
                ws.x[i] += ws.drift[i];
            }
            let gamma = field.value(&self.killing, s + h, &ws.x);
            log_discount += 0.5 * (gamma_prev + gamma) * h;
            gamma_prev = gamma;
        }
        Ok(log_discount.exp() * self.payoff.value(&ws.x))
    }
}

/// Lower Cholesky factor (row-major) of a positive semi-definite `d × d`
/// matrix; vanishing pivots give zero columns. Returns false when indefinite.
fn psd_cholesky(c: &[f64], d: usize, l: &mut [f64]) -> bool {
    let scale = c.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    l.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..d {
        let mut pivot = c[j * d + j];
        for k in 0..j {
            pivot -= l[j * d + k] * l[j * d + k];
        }
        if pivot < -tol {
            return false;
        }
        if pivot <= tol {
            continue;
        }
        let root = pivot.sqrt();
        l[j * d + j] = root;
        for i in j + 1..d {
            let mut v = c[i * d + j];
            for k in 0..j {
                v -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = v / root;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FnModel;

    #[test]
    fn psd_root_handles_rank_deficiency() {
        let mut l = [0.0; 4];
        assert!(psd_cholesky(&[4.0, 2.0, 2.0, 1.0], 2, &mut l));
        assert_eq!(l, [2.0, 0.0, 1.0, 0.0]);
        assert!(!psd_cholesky(&[-1.0], 1, &mut l[..1]));
    }

    #[test]
    fn deterministic_flow_has_zero_error() {
        // dX = (1 − X) dt from X_0 = 0, no noise; Euler gives 1 − (1 − dt)^n.
        let model = FnModel::new(
            1,
            vec![MultiIndex::from(vec![1])],
            |_, _, x: &[f64]| 1.0 - x[0],
            true,
        );
        let field = CoefficientField::new(model, 2, 1.0).unwrap();
        let settings = McSettings {
            paths: 1000,
            steps: 50,
            ..McSettings::default()
        };
        let est = mc_solve(&field, &Payoff::Linear, 0.0, &[0.0], 1.0, settings).unwrap();
        let expected = 1.0 - (1.0f64 - 0.02).powi(50);
        assert!((est.value - expected).abs() < 1e-14);
        assert!(est.std_error < 1e-14);
    }
}
