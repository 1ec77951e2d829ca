//! Supersolution `min(1, eps + exp(-mu (x - x0 - tau)))` of `v_tau = (v^m)_xx`.
//!
//! In the rescaled time `tau = tau_of_t(m, r_bar, t)` it bounds the solution
//! and shows the level sets above `eps` stay at finite distance.

use serde::Serialize;

use super::{tau_of_t, Barrier, Ledger, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RightTailSuper {
    pub m: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub x0: f64,
    /// Smallest sampled value of `1 - mu m w^(m-1) - mu m (m-1) (w - eps) w^(m-2)`.
    pub min_factor: f64,
    pub ledger: Ledger,
}

fn factor(m: f64, eps: f64, mu: f64, w: f64) -> f64 {
    1.0 - mu * m * w.powf(m - 1.0) - mu * m * (m - 1.0) * (w - eps) * w.powf(m - 2.0)
}

/// Builds the barrier; `mu = None` picks a rate from an a priori bound.
pub fn right_tail_super(m: f64, epsilon: f64, mu: Option<f64>, x0: f64) -> Result<RightTailSuper> {
    if !(m > 0.0) {
        return Err(Error::Parameter(format!("m must be positive, got {m}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {epsilon}")));
    }
    let mu = match mu {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::Parameter(format!("mu must be positive, got {v}"))),
        None => {
            let bound = m * epsilon.powf(m - 1.0).max(1.0)
                + m * (m - 1.0).max(0.0) * epsilon.powf(m - 2.0).max(1.0);
            0.5 / bound
        }
    };
    let n = 20_000;
    let min_factor = (0..n)
        .map(|i| epsilon + (1.0 - epsilon) * i as f64 / n as f64)
        .map(|w| factor(m, epsilon, mu, w))
        .fold(f64::INFINITY, f64::min);
    let mut ledger = Ledger::default();
    ledger.lt("0 < mu", 0.0, mu);
    ledger.le("positivity factor on [eps, 1)", 0.0, min_factor);
    ledger.verify()?;
    Ok(RightTailSuper {
        m,
        epsilon,
        mu,
        x0,
        min_factor,
        ledger,
    })
}

impl RightTailSuper {
    /// Value in rescaled time `tau`.
    pub fn eval_tau(&self, tau: f64, x: f64) -> f64 {
        (self.epsilon + (-self.mu * (x - self.x0 - tau)).exp()).min(1.0)
    }

    /// Value at physical time `t` for reaction bound `r_bar`.
    pub fn eval_t(&self, r_bar: f64, t: f64, x: f64) -> f64 {
        self.eval_tau(tau_of_t(self.m, r_bar, t), x)
    }
}

impl Barrier for RightTailSuper {
    fn side(&self) -> Side {
        Side::Super
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.eval_tau(t, x))
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= 0.0 && self.epsilon + (-self.mu * (x - self.x0 - t)).exp() < 1.0 - 1e-9
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        // x - x0 - tau ranges over the part where the exponential lies in (1e-12, 1 - eps)
        let lo = -(1.0 - self.epsilon).ln() / self.mu;
        let hi = 12.0 * std::f64::consts::LN_10 / self.mu;
        let mut pts = Vec::new();
        for tau in [0.0, 1.0, 10.0] {
            for i in 0..n {
                let s = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                pts.push((tau, self.x0 + tau + s));
            }
        }
        pts
    }

    fn time_step(&self, _t: f64, _x: f64) -> f64 {
        1e-3 / self.mu.max(1.0)
    }

    fn with_reaction(&self) -> bool {
        false
    }
}
