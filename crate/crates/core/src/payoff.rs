//! Terminal data `φ` for the Cauchy problem. Catalog payoffs act on the first
//! coordinate; [`Payoff::custom`] accepts any function of the full state.

use std::fmt;
use std::sync::Arc;

type PayoffFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Payoff {
    Constant(f64),
    /// `φ(y) = y_1`
    Linear,
    /// `(e^{y_1} − K)^+` when `log_price`, else `(y_1 − K)^+`.
    Call { strike: f64, log_price: bool },
    Put { strike: f64, log_price: bool },
    /// `1{e^{y_1} > K}` when `log_price`, else `1{y_1 > K}`.
    Digital { strike: f64, log_price: bool },
    /// `exp(−(y_1 − c)² / (2w²))`
    GaussianBump { center: f64, width: f64 },
    Custom {
        f: Arc<PayoffFn>,
        kinks: Vec<f64>,
        smoothness: u8,
    },
}

impl Payoff {
    /// A user payoff with declared kink locations on the first axis and
    /// smoothness class `k` (`φ ∈ C_b^{k−1,1}`).
    pub fn custom<F>(f: F, kinks: Vec<f64>, smoothness: u8) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Payoff::Custom {
            f: Arc::new(f),
            kinks,
            smoothness,
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let y1 = y[0];
        match self {
            Payoff::Constant(c) => *c,
            Payoff::Linear => y1,
            Payoff::Call { strike, log_price } => {
                let s = if *log_price { y1.exp() } else { y1 };
                (s - strike).max(0.0)
            }
            Payoff::Put { strike, log_price } => {
                let s = if *log_price { y1.exp() } else { y1 };
                (strike - s).max(0.0)
            }
            Payoff::Digital { .. } => {
                if y1 > self.threshold().expect("digital has a threshold") {
                    1.0
                } else {
                    0.0
                }
            }
            Payoff::GaussianBump { center, width } => {
                let z = (y1 - center) / width;
                (-0.5 * z * z).exp()
            }
            Payoff::Custom { f, .. } => f(y),
        }
    }

    /// Location of the non-smooth point on the first axis, if any.
    fn threshold(&self) -> Option<f64> {
        match self {
            Payoff::Call { strike, log_price }
            | Payoff::Put { strike, log_price }
            | Payoff::Digital { strike, log_price } => {
                Some(if *log_price { strike.ln() } else { *strike })
            }
            _ => None,
        }
    }

    /// Points on the first axis where the payoff or its derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Payoff::Custom { kinks, .. } => kinks.clone(),
            _ => self.threshold().into_iter().collect(),
        }
    }

    /// Smoothness class `k ∈ {0, 1, 2}` with `φ ∈ C_b^{k−1,1}`.
    ///
    /// Calls and puts report 1 (locally Lipschitz); they are unbounded in the
    /// log-price case, so the class is only a local statement.
    pub fn smoothness(&self) -> u8 {
        match self {
            Payoff::Constant(_) | Payoff::Linear | Payoff::GaussianBump { .. } => 2,
            Payoff::Call { .. } | Payoff::Put { .. } => 1,
            Payoff::Digital { .. } => 0,
            Payoff::Custom { smoothness, .. } => *smoothness,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.kinks().is_empty()
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Constant(c) => write!(f, "Constant({c})"),
            Payoff::Linear => write!(f, "Linear"),
            Payoff::Call { strike, log_price } => write!(f, "Call(K={strike}, log={log_price})"),
            Payoff::Put { strike, log_price } => write!(f, "Put(K={strike}, log={log_price})"),
            Payoff::Digital { strike, log_price } => {
                write!(f, "Digital(K={strike}, log={log_price})")
            }
            Payoff::GaussianBump { center, width } => write!(f, "GaussianBump({center}, {width})"),
            Payoff::Custom { kinks, smoothness, .. } => {
                write!(f, "Custom(kinks={kinks:?}, k={smoothness})")
            }
        }
    }
}
