//! Propagation regimes over `(m, alpha, beta)` and the level-set envelopes
//! `x-(t) < E_lambda(t) < x+(t)` attached to each accelerating regime.

use serde::Serialize;

use crate::closedform;
use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};

/// Relative tolerance used to decide that a parameter sits on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "regime")]
pub enum RegimeKind {
    NoAcceleration,
    /// Level sets grow like `exp(r * gamma * t)`.
    ExponentialAcceleration { gamma: f64 },
    /// Level sets grow like `t^exponent`.
    PolynomialAcceleration { exponent: f64 },
    /// Infinite speed of propagation; no monomial localization is available.
    InfiniteSpeedUnlocalized,
    /// Polynomial lower bound with this exponent; the upper bound uses a
    /// larger exponent.
    PolynomialLowerOnly { lower_exponent: f64 },
    /// An equality case of the region inequalities.
    Boundary { label: String },
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::NoAcceleration => "NoAcceleration",
            RegimeKind::ExponentialAcceleration { .. } => "ExponentialAcceleration",
            RegimeKind::PolynomialAcceleration { .. } => "PolynomialAcceleration",
            RegimeKind::InfiniteSpeedUnlocalized => "InfiniteSpeedUnlocalized",
            RegimeKind::PolynomialLowerOnly { .. } => "PolynomialLowerOnly",
            RegimeKind::Boundary { .. } => "Boundary",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            RegimeKind::ExponentialAcceleration { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            RegimeKind::PolynomialAcceleration { exponent } => Some(exponent),
            RegimeKind::PolynomialLowerOnly { lower_exponent } => Some(lower_exponent),
            _ => None,
        }
    }

    pub fn is_accelerating(&self) -> bool {
        !matches!(self, RegimeKind::NoAcceleration | RegimeKind::Boundary { .. })
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUNDARY_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `min(alpha, 2/(1-m))` for `0 < m < 1`.
pub fn gamma_effective(m: f64, alpha: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!(
            "effective tail exponent needs 0 < m < 1, got m = {m}"
        )));
    }
    Ok(alpha.min(2.0 / (1.0 - m)))
}

/// Tail exponent that governs acceleration: `alpha` for `m >= 1`,
/// `min(alpha, 2/(1-m))` below.
pub fn alpha_effective(m: f64, alpha: f64) -> f64 {
    if m < 1.0 {
        alpha.min(2.0 / (1.0 - m))
    } else {
        alpha
    }
}

pub fn classify(m: f64, alpha: f64, beta: f64) -> Result<RegimeKind> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("m must be positive, got {m}")));
    }
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be >= 1, got {beta}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let boundary = |label: &str| RegimeKind::Boundary {
        label: label.to_string(),
    };

    if m >= 1.0 {
        if beta == 1.0 {
            return Ok(if alpha.is_finite() {
                RegimeKind::ExponentialAcceleration { gamma: 1.0 / alpha }
            } else {
                RegimeKind::NoAcceleration
            });
        }
        let h1 = 1.0 + 1.0 / alpha;
        return Ok(if near(beta, h1) {
            boundary("beta = 1 + 1/alpha")
        } else if beta < h1 {
            RegimeKind::PolynomialAcceleration {
                exponent: 1.0 / (alpha * (beta - 1.0)),
            }
        } else {
            RegimeKind::NoAcceleration
        });
    }

    let critical = 2.0 / (1.0 - m);
    let a = alpha.min(critical);
    if beta == 1.0 {
        if alpha.is_finite() && near(alpha, critical) {
            return Ok(boundary("alpha = 2/(1-m), beta = 1"));
        }
        return Ok(RegimeKind::ExponentialAcceleration { gamma: 1.0 / a });
    }

    let h1 = 1.0 + 1.0 / a;
    let h2 = m + 2.0 / a;
    let b = 2.0 - m;
    let top = h1.max(b);
    if beta >= top || near(beta, top) {
        if near(beta, top) {
            let label = if near(h1, b) {
                "beta = 1 + 1/alpha = 2 - m"
            } else if h1 > b {
                "beta = 1 + 1/alpha"
            } else {
                "beta = 2 - m"
            };
            return Ok(boundary(label));
        }
        return Ok(RegimeKind::NoAcceleration);
    }
    if near(beta, h1) {
        return Ok(boundary("beta = 1 + 1/alpha"));
    }
    if beta > h1 {
        return Ok(RegimeKind::InfiniteSpeedUnlocalized);
    }
    if near(beta, h2) {
        return Ok(boundary("beta = m + 2/alpha"));
    }
    let exponent = 1.0 / (a * (beta - 1.0));
    if beta < h2 {
        Ok(RegimeKind::PolynomialAcceleration { exponent })
    } else {
        Ok(RegimeKind::PolynomialLowerOnly {
            lower_exponent: exponent,
        })
    }
}

/// Monotone growth law of an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// `x(t) = exp(rate * t)`.
    Exponential { rate: f64 },
    /// `x(t) = (k * t)^exponent`.
    Power { k: f64, exponent: f64 },
}

impl Curve {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Curve::Exponential { rate } => (rate * t).exp(),
            Curve::Power { k, exponent } => (k * t).powf(exponent),
        }
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        match *self {
            Curve::Exponential { rate } => rate * t,
            Curve::Power { k, exponent } => exponent * (k * t).ln(),
        }
    }
}

/// Lower and upper level-set bounds valid for `t > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub regime: RegimeKind,
    pub lower: Option<Curve>,
    pub upper: Option<Curve>,
    /// Time after which `lower < upper` strictly.
    pub threshold: f64,
    pub epsilon: f64,
    /// Set when the two bounds grow at different rates and the true law is
    /// not pinned down.
    pub gap: bool,
}

impl Envelope {
    pub fn x_minus(&self, t: f64) -> Option<f64> {
        self.lower.map(|c| c.eval(t))
    }

    pub fn x_plus(&self, t: f64) -> Option<f64> {
        self.upper.map(|c| c.eval(t))
    }
}

/// Default slack `0.1 r`.
pub fn default_epsilon(params: &ModelParams) -> f64 {
    0.1 * params.r
}

pub fn envelopes(params: &ModelParams, epsilon: f64) -> Result<Envelope> {
    params.validate()?;
    if !(epsilon > 0.0 && epsilon < params.r) {
        return Err(Error::Parameter(format!(
            "slack {epsilon} must lie in (0, r = {})",
            params.r
        )));
    }
    let p = params;
    let regime = classify(p.m, p.alpha, p.beta)?;
    let lo_rate = p.r - epsilon;
    let hi_rate = p.r_bar + epsilon;
    let power = |rate: f64, c: f64, exponent: f64| Curve::Power {
        k: rate * c.powf(p.beta - 1.0) * (p.beta - 1.0),
        exponent,
    };

    let (lower, upper, gap) = match &regime {
        RegimeKind::ExponentialAcceleration { gamma } => (
            Some(Curve::Exponential {
                rate: lo_rate * gamma,
            }),
            Some(Curve::Exponential {
                rate: hi_rate * gamma,
            }),
            false,
        ),
        RegimeKind::Boundary { label } if label == "alpha = 2/(1-m), beta = 1" => {
            // the exponential law covers the critical tail as well
            let gamma = (1.0 - p.m) / 2.0;
            (
                Some(Curve::Exponential {
                    rate: lo_rate * gamma,
                }),
                Some(Curve::Exponential {
                    rate: hi_rate * gamma,
                }),
                false,
            )
        }
        RegimeKind::PolynomialAcceleration { exponent } => (
            Some(power(lo_rate, p.c_lower, *exponent)),
            Some(power(hi_rate, p.c_upper, *exponent)),
            false,
        ),
        RegimeKind::PolynomialLowerOnly { lower_exponent } => {
            let upper_exponent = (p.beta - p.m + epsilon) / (2.0 * (p.beta - 1.0));
            (
                Some(power(lo_rate, p.c_lower, *lower_exponent)),
                Some(power(hi_rate, p.c_upper, upper_exponent)),
                true,
            )
        }
        RegimeKind::InfiniteSpeedUnlocalized => (None, None, true),
        RegimeKind::NoAcceleration => {
            return Err(Error::RegimeMismatch(
                "no accelerating envelope in the no-acceleration regime".into(),
            ))
        }
        RegimeKind::Boundary { label } => {
            return Err(Error::RegimeMismatch(format!(
                "no envelope on the boundary {label}"
            )))
        }
    };
    let threshold = match (lower, upper) {
        (Some(lo), Some(hi)) => crossing_time(lo, hi),
        _ => 0.0,
    };
    Ok(Envelope {
        regime,
        lower,
        upper,
        threshold,
        epsilon,
        gap,
    })
}

/// Last time at which `lower >= upper`; beyond it `lower < upper`.
fn crossing_time(lower: Curve, upper: Curve) -> f64 {
    match (lower, upper) {
        (Curve::Power { k: k1, exponent: e1 }, Curve::Power { k: k2, exponent: e2 }) => {
            if e1 == e2 {
                0.0
            } else {
                // e1 ln(k1 t) = e2 ln(k2 t)
                let ln_t = (e2 * k2.ln() - e1 * k1.ln()) / (e1 - e2);
                ln_t.exp().max(0.0)
            }
        }
        _ => 0.0,
    }
}

/// Certified linear speed bound `c` in the no-acceleration regime.
pub fn linear_speed_bound(params: &ModelParams) -> Result<f64> {
    match classify(params.m, params.alpha, params.beta)? {
        RegimeKind::NoAcceleration if params.beta > 1.0 => {
            let spec = closedform::constant_speed_super(&Model::new(*params))?;
            Ok(spec.c)
        }
        other => Err(Error::RegimeMismatch(format!(
            "linear speed bound needs the no-acceleration regime with beta > 1, got {}",
            other.name()
        ))),
    }
}
