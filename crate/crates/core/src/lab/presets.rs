//! Built-in models for the backward Kolmogorov equation
//! `A = ½Σ(σσᵀ)_{ij}∂_{ij} + Σμ_i∂_i − λ`.

use crate::algebra::MultiIndex;
use crate::basis::{CoefficientField, CoefficientModel};
use crate::error::{Error, Result};
use crate::payoff::Payoff;

/// `Q(u) e^{k u}` with `u = tanh(x / L)`; closed under differentiation.
#[derive(Clone, Debug, PartialEq)]
pub struct TanhExp {
    /// Ascending coefficients of `Q`.
    pub poly: Vec<f64>,
    pub k: f64,
    pub scale: f64,
}

impl TanhExp {
    pub fn constant(c: f64) -> Self {
        TanhExp {
            poly: vec![c],
            k: 0.0,
            scale: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = (x / self.scale).tanh();
        horner(&self.poly, u) * (self.k * u).exp()
    }

    /// `d^n/dx^n` at `x`.
    pub fn derivative(&self, n: u32, x: f64) -> f64 {
        let mut q = self.poly.clone();
        for _ in 0..n {
            // (Q' + kQ)(1 − u²)/L
            let mut inner = vec![0.0; q.len()];
            for (i, c) in q.iter().enumerate() {
                inner[i] += self.k * c;
                if i > 0 {
                    inner[i - 1] += i as f64 * c;
                }
            }
            let mut next = vec![0.0; inner.len() + 2];
            for (i, c) in inner.iter().enumerate() {
                next[i] += c / self.scale;
                next[i + 2] -= c / self.scale;
            }
            q = next;
        }
        let u = (x / self.scale).tanh();
        horner(&q, u) * (self.k * u).exp()
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * u + v)
}

/// One-dimensional log-price model with `a_2 = σ²/2`, `a_1 = r − σ²/2`,
/// `a_0 = −r − λ`.
#[derive(Clone, Debug)]
pub struct LocalVolModel {
    pub half_variance: TanhExp,
    pub drift: TanhExp,
    pub killing: TanhExp,
}

impl LocalVolModel {
    /// `σ²(x) = sigma_sq`, constant rate `r` and killing `λ(x)`.
    pub fn new(sigma_sq: TanhExp, rate: f64, lambda: TanhExp) -> Self {
        let half = TanhExp {
            poly: sigma_sq.poly.iter().map(|c| 0.5 * c).collect(),
            ..sigma_sq.clone()
        };
        let mut drift = TanhExp {
            poly: sigma_sq.poly.iter().map(|c| -0.5 * c).collect(),
            ..sigma_sq
        };
        if rate != 0.0 {
            assert!(drift.k == 0.0, "a rate needs a polynomial variance");
            drift.poly[0] += rate;
        }
        let killing = TanhExp {
            poly: lambda.poly.iter().map(|c| -c).collect(),
            ..lambda
        };
        let mut killing = killing;
        killing.poly[0] -= rate;
        LocalVolModel {
            half_variance: half,
            drift,
            killing,
        }
    }

    fn part(&self, alpha: &MultiIndex) -> Option<&TanhExp> {
        match alpha.get(0) {
            2 => Some(&self.half_variance),
            1 => Some(&self.drift),
            0 => Some(&self.killing),
            _ => None,
        }
    }
}

impl CoefficientModel for LocalVolModel {
    fn dim(&self) -> usize {
        1
    }

    fn terms(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::from([2]), MultiIndex::from([1])];
        if self.killing.poly.iter().any(|c| *c != 0.0) {
            out.push(MultiIndex::from([0]));
        }
        out
    }

    fn coefficient(&self, alpha: &MultiIndex, _t: f64, x: &[f64]) -> f64 {
        self.part(alpha).map_or(0.0, |f| f.value(x[0]))
    }

    fn derivative(&self, alpha: &MultiIndex, beta: &MultiIndex, _t: f64, x: &[f64]) -> Option<f64> {
        Some(self.part(alpha).map_or(0.0, |f| f.derivative(beta.get(0), x[0])))
    }
}

/// Two-factor log-price / variance model with a softplus-floored variance
/// `v̂(v) = ε + ln(1 + e^{s(v−ε)})/s`.
#[derive(Clone, Debug)]
pub struct HestonLikeModel {
    pub kappa: f64,
    pub theta: f64,
    pub eta: f64,
    pub rho: f64,
    pub floor: f64,
    pub sharpness: f64,
}

impl HestonLikeModel {
    /// `d^n v̂ / dv^n`
    pub fn floored_variance(&self, n: u32, v: f64) -> f64 {
        let z = self.sharpness * (v - self.floor);
        if n == 0 {
            // stable softplus
            let sp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            return self.floor + sp / self.sharpness;
        }
        let s = 1.0 / (1.0 + (-z).exp());
        // d/dv P(s) = P'(s) · sharpness · s(1 − s), starting from P(s) = s
        let mut p = vec![0.0, 1.0];
        for _ in 1..n {
            let mut next = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate().skip(1) {
                let d = i as f64 * c * self.sharpness;
                next[i] += d;
                next[i + 1] -= d;
            }
            p = next;
        }
        horner(&p, s)
    }

    fn scale(&self, alpha: &MultiIndex) -> Option<f64> {
        match alpha.as_slice() {
            [2, 0] => Some(0.5),
            [1, 1] => Some(self.rho * self.eta),
            [0, 2] => Some(0.5 * self.eta * self.eta),
            [1, 0] => Some(-0.5),
            _ => None,
        }
    }
}

impl CoefficientModel for HestonLikeModel {
    fn dim(&self) -> usize {
        2
    }

    fn terms(&self) -> Vec<MultiIndex> {
        vec![
            MultiIndex::from([2, 0]),
            MultiIndex::from([1, 1]),
            MultiIndex::from([0, 2]),
            MultiIndex::from([1, 0]),
            MultiIndex::from([0, 1]),
        ]
    }

    fn coefficient(&self, alpha: &MultiIndex, t: f64, x: &[f64]) -> f64 {
        self.derivative(alpha, &MultiIndex::zeros(2), t, x).expect("closed form")
    }

    fn derivative(&self, alpha: &MultiIndex, beta: &MultiIndex, _t: f64, x: &[f64]) -> Option<f64> {
        let v = x[1];
        if beta.get(0) > 0 {
            return Some(0.0);
        }
        let n = beta.get(1);
        Some(match self.scale(alpha) {
            Some(c) => c * self.floored_variance(n, v),
            None if alpha.as_slice() == [0, 1] => match n {
                0 => self.kappa * (self.theta - v),
                1 => -self.kappa,
                _ => 0.0,
            },
            None => 0.0,
        })
    }
}

/// A named model with its payoff catalog and a box where ellipticity holds.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub field: CoefficientField,
    pub payoffs: Vec<(&'static str, Payoff)>,
    pub spot: Vec<f64>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

impl Preset {
    pub fn payoff(&self, name: &str) -> Result<Payoff> {
        self.payoffs
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| {
                Error::Config(format!(
                    "preset {} has no payoff {name:?}; available: {:?}",
                    self.name,
                    self.payoffs.iter().map(|(n, _)| *n).collect::<Vec<_>>()
                ))
            })
    }
}

pub const PRESET_NAMES: [&str; 5] = [
    "black_scholes",
    "cev_smoothed",
    "tanh_localvol",
    "heston_like_2d",
    "killed_localvol",
];

/// Derivative order declared by the closed-form presets.
const PRESET_DERIVATIVE_ORDER: u32 = 8;

fn tanh_sigma_sq() -> TanhExp {
    // (0.2 + 0.1 u)²
    TanhExp {
        poly: vec![0.04, 0.04, 0.01],
        k: 0.0,
        scale: 1.0,
    }
}

fn log_price_payoffs() -> Vec<(&'static str, Payoff)> {
    vec![
        ("call", Payoff::Call { strike: 1.0, log_price: true }),
        ("digital", Payoff::Digital { strike: 1.0, log_price: true }),
        ("bump", Payoff::GaussianBump { center: 0.0, width: 0.25 }),
    ]
}

pub fn preset(name: &str) -> Result<Preset> {
    let one_d = |name, description, model: LocalVolModel, ellipticity| -> Result<Preset> {
        Ok(Preset {
            name,
            description,
            field: CoefficientField::new(model, PRESET_DERIVATIVE_ORDER, ellipticity)?,
            payoffs: log_price_payoffs(),
            spot: vec![0.0],
            box_lo: vec![-3.0],
            box_hi: vec![3.0],
        })
    };
    match name {
        "black_scholes" => one_d(
            "black_scholes",
            "constant volatility 0.2, rate 0.02",
            LocalVolModel::new(TanhExp::constant(0.04), 0.02, TanhExp::constant(0.0)),
            50.0,
        ),
        "tanh_localvol" => one_d(
            "tanh_localvol",
            "local volatility 0.2 + 0.1 tanh(x)",
            LocalVolModel::new(tanh_sigma_sq(), 0.0, TanhExp::constant(0.0)),
            200.0,
        ),
        "killed_localvol" => one_d(
            "killed_localvol",
            "tanh local volatility with killing rate 0.01 (2 − tanh²x)",
            LocalVolModel::new(
                tanh_sigma_sq(),
                0.0,
                TanhExp {
                    poly: vec![0.02, 0.0, -0.01],
                    k: 0.0,
                    scale: 1.0,
                },
            ),
            200.0,
        ),
        "cev_smoothed" => {
            // σ(x) = σ0 exp((β−1) L tanh(x/L)), σ0 = 0.2, β = 0.5, L = 2
            let (sigma0, beta, l) = (0.2_f64, 0.5_f64, 2.0_f64);
            let sigma_sq = TanhExp {
                poly: vec![sigma0 * sigma0],
                k: 2.0 * (beta - 1.0) * l,
                scale: l,
            };
            one_d(
                "cev_smoothed",
                "CEV-type volatility 0.2 exp(−tanh(x/2)) in log price",
                LocalVolModel::new(sigma_sq, 0.0, TanhExp::constant(0.0)),
                400.0,
            )
        }
        "heston_like_2d" => {
            let model = HestonLikeModel {
                kappa: 1.5,
                theta: 0.04,
                eta: 0.3,
                rho: -0.5,
                floor: 0.01,
                sharpness: 50.0,
            };
            Ok(Preset {
                name: "heston_like_2d",
                description: "log price and softplus-floored variance, κ=1.5 θ=0.04 η=0.3 ρ=−0.5",
                field: CoefficientField::new(model, PRESET_DERIVATIVE_ORDER, 5000.0)?,
                payoffs: log_price_payoffs(),
                spot: vec![0.0, 0.04],
                box_lo: vec![-2.0, 0.0],
                box_hi: vec![2.0, 0.2],
            })
        }
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; available: {PRESET_NAMES:?}"
        ))),
    }
}
