//! Plateau subsolution for the fast-diffusion range `m + 2/alpha <= beta < 1 + 1/alpha`.
//!
//! Same shape as [`super::FdePlateau`] but built on the reduced datum
//! `(C - eps)/x^alpha`, valid only after a start time `T`, and compared with
//! the datum through a spatial shift: `u(t, x) >= v(T + t, x + shift)`.

use serde::Serialize;

use super::{
    a_bound_s0, enlarge_until, geomspace, level_curve, peak_level, rho_interval, Barrier,
    GrowthSolution, Ledger, Overrides, Profile, Side,
};
use crate::error::{Error, Result};
use crate::model::{InitialData, Model};

#[derive(Debug, Clone, Serialize)]
pub struct AppendixPlateau {
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub rho: f64,
    pub a: f64,
    pub kappa: f64,
    pub delta: f64,
    pub theta_star: f64,
    pub plateau: f64,
    /// Start time from which the subsolution inequality holds.
    pub t_start: f64,
    /// Abscissa `X'` beyond which `v(T, x) <= C/x^alpha`.
    pub x_prime: f64,
    pub shift: f64,
    pub c: f64,
    pub c_reduced: f64,
    pub x0: f64,
    pub r: f64,
    pub growth: GrowthSolution,
    pub ledger: Ledger,
}

/// Left side of the `delta` condition, minus its bound `m + beta - 1`.
fn delta_gap(m: f64, beta: f64, eta: f64, a: f64, d: f64) -> f64 {
    let q = a * d.powf(eta);
    let ratio = q / (1.0 - q);
    ratio * (2.0 * m * eta + eta * (beta + eta - 1.0) + (1.0 - m) * eta * eta * ratio)
        - (m + beta - 1.0)
}

pub fn appendix_sub_params(model: &Model, epsilon: f64) -> Result<AppendixPlateau> {
    appendix_sub_params_with(model, epsilon, &Overrides::default())
}

pub fn appendix_sub_params_with(
    model: &Model,
    epsilon: f64,
    ov: &Overrides,
) -> Result<AppendixPlateau> {
    let p = &model.params;
    let (m, alpha, beta, c, x0) = (p.m, p.alpha, p.beta, p.c_lower, p.x0);
    let in_range = m < 1.0
        && alpha > 1.0 / (1.0 - m)
        && alpha <= 2.0 / (1.0 - m)
        && beta > 1.0
        && beta >= m + 2.0 / alpha
        && beta < 1.0 + 1.0 / alpha;
    if !in_range {
        return Err(Error::RegimeMismatch(format!(
            "appendix subsolution needs 0 < m < 1, 1/(1-m) < alpha <= 2/(1-m), \
             max(1, m + 2/alpha) <= beta < 1 + 1/alpha; got m = {m}, alpha = {alpha}, beta = {beta}"
        )));
    }
    let (r, _) = model.certified_rates();
    if !(epsilon > 0.0 && epsilon < r && epsilon < c) {
        return Err(Error::infeasible(format!(
            "need 0 < eps = {epsilon} < min(r, C) = {}",
            r.min(c)
        )));
    }
    let u0 = InitialData::algebraic(c, alpha, x0, 1.0)?;
    let c_red = c - epsilon;

    let eta = ov.eta.unwrap_or(beta + 2.5);
    let (rho_lo, rho_hi) = rho_interval(r, beta, eta, epsilon);
    let rho = ov.rho.unwrap_or(0.5 * (rho_lo + rho_hi));
    let kappa = c_red / c * u0.eval(x0);
    let a = ov.a.unwrap_or(
        2.0 * (1.0f64)
            .max(1.0 / (kappa.powf(eta) * (1.0 + eta)))
            .max(a_bound_s0(eta, p.s0)),
    );
    let theta_star = peak_level(a, eta);
    let plateau = theta_star * eta / (1.0 + eta);

    let delta = match ov.delta {
        Some(d) => d,
        None => {
            let g = |d: f64| delta_gap(m, beta, eta, a, d);
            let root = if g(theta_star) < 0.0 {
                theta_star
            } else {
                let (mut lo, mut hi) = (0.0, theta_star);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            0.5 * root
        }
    };

    // derivative bound on x >= X(T), decreasing in x
    let k = alpha + 1.0 - alpha * beta;
    let lhs_at = |x: f64| {
        let phi2 = alpha * alpha / (c_red.powf(2.0 * beta - 2.0) * x.powf(2.0 * k));
        let dphi = alpha * k / (c_red.powf(beta - 1.0) * x.powf(alpha + 2.0 - alpha * beta));
        phi2 * a.powf(-(m + beta - 2.0) / eta)
            * (2.0 * m + beta + eta - 1.0 + 2.0 * (1.0 - m) * eta)
            + dphi * a.powf(-(m - 1.0) / eta)
    };
    let rhs_t = (r - rho) / (2f64.powf(1.0 - m) * m * eta);
    let x_of_t = |t: f64| level_curve(theta_star, t, c_red, alpha, beta, rho);
    let base = (c_red / theta_star).powf(beta - 1.0);
    let scale = rho * c_red.powf(beta - 1.0) * (beta - 1.0);
    let t_start = match ov.t_start {
        Some(t) => t,
        None if rhs_t > 0.0 && theta_star < c_red => {
            let x_star = enlarge_until(x_of_t(0.0)?, "X(T)", |x| lhs_at(x) <= rhs_t)?;
            ((x_star.powf(alpha * (beta - 1.0)) - base) / scale).max(0.0)
        }
        None => 0.0,
    };
    let x_t = if theta_star < c_red {
        x_of_t(t_start)?
    } else {
        f64::NAN
    };

    let gap = c_red.powf(1.0 - beta) - c.powf(1.0 - beta);
    let x_prime = ((rho * (beta - 1.0) * t_start / gap).powf(1.0 / (alpha * (beta - 1.0))))
        .max(x0)
        * (1.0 + 1e-6);
    let shift = x_prime - x0;

    let growth = GrowthSolution::new(rho, beta, Profile::Power { c: c_red, alpha });
    let v_at_start = |x: f64| -> f64 {
        if x <= x_t {
            plateau
        } else {
            match growth.eval(t_start, x) {
                Ok(w) => w * (1.0 - a * w.powf(eta)),
                Err(_) => f64::INFINITY,
            }
        }
    };
    let mut worst = f64::INFINITY;
    let hi = 10.0 * x_prime;
    for i in 0..=20_000 {
        let x = -shift + (hi + shift) * i as f64 / 20_000.0;
        worst = worst.min(u0.eval(x - shift) - v_at_start(x));
    }
    for x in geomspace(hi, hi * 1e6, 2000) {
        worst = worst.min(u0.eval(x - shift) - v_at_start(x));
    }

    let mut ledger = Ledger::default();
    ledger.lt("eta > beta + 2", beta + 2.0, eta);
    ledger.lt("max(r beta/(1+eta), r - eps) < rho", rho_lo, rho);
    ledger.lt("rho < r", rho, rho_hi);
    ledger.lt("A > 1", 1.0, a);
    ledger.lt("1/(kappa^eta (1+eta)) < A", 1.0 / (kappa.powf(eta) * (1.0 + eta)), a);
    ledger.le("plateau value <= s0", plateau, p.s0);
    ledger.lt("0 < delta", 0.0, delta);
    ledger.lt("delta < (A(1+eta))^(-1/eta)", delta, theta_star);
    ledger.lt(
        "delta condition",
        delta_gap(m, beta, eta, a, delta) + (m + beta - 1.0),
        m + beta - 1.0,
    );
    ledger.le("derivative bound at X(T)", lhs_at(x_t), rhs_t);
    ledger.le("u0(x - shift) >= v(T, x) on grid", 0.0, worst);
    ledger.verify()?;

    Ok(AppendixPlateau {
        m,
        alpha,
        beta,
        eta,
        rho,
        a,
        kappa,
        delta,
        theta_star,
        plateau,
        t_start,
        x_prime,
        shift,
        c,
        c_reduced: c_red,
        x0,
        r,
        growth,
        ledger,
    })
}

impl AppendixPlateau {
    pub fn junction(&self, t: f64) -> f64 {
        level_curve(self.theta_star, t, self.c_reduced, self.alpha, self.beta, self.rho)
            .expect("theta* lies below the reduced tail constant")
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if x <= self.junction(t) {
            return Ok(self.plateau);
        }
        let w = self.growth.eval(t, x)?;
        Ok(w * (1.0 - self.a * w.powf(self.eta)))
    }

    /// Lower bound `v(T + t, x + shift)` on the solution started from the datum.
    pub fn lower_bound(&self, t: f64, x: f64) -> Result<f64> {
        self.eval(self.t_start + t, x + self.shift)
    }
}

impl Barrier for AppendixPlateau {
    fn side(&self) -> Side {
        Side::Sub
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        AppendixPlateau::eval(self, t, x)
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= self.t_start && x > self.junction(t)
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        let t0 = self.t_start.max(1.0);
        let mut pts = Vec::new();
        for t in [t0 * 1.001, 1.5 * t0, 3.0 * t0] {
            let left = self.junction(t);
            for x in geomspace(left * 1.01, left * 1e3, n) {
                pts.push((t, x));
            }
        }
        pts
    }

    fn time_step(&self, t: f64, _x: f64) -> f64 {
        1e-3 * (t - self.t_start).max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn model() -> Model {
        Model::new(ModelParams::new(0.5, 3.0, 1.2))
    }

    #[test]
    fn feasible_example() {
        let s = appendix_sub_params(&model(), 0.2).unwrap();
        assert!(s.eta > 3.2);
        assert!(s.delta < s.theta_star);
        assert!(s.shift >= 0.0);
        assert!(s.ledger.entries.iter().all(|e| e.holds()));
    }

    #[test]
    fn delta_at_bound_is_rejected() {
        let s = appendix_sub_params(&model(), 0.2).unwrap();
        let ov = Overrides {
            delta: Some(s.theta_star),
            ..Default::default()
        };
        assert!(matches!(
            appendix_sub_params_with(&model(), 0.2, &ov),
            Err(Error::InfeasibleSelection { .. })
        ));
    }

    #[test]
    fn early_start_is_rejected() {
        let s = appendix_sub_params(&model(), 0.2).unwrap();
        assert!(s.t_start > 0.0);
        let ov = Overrides {
            t_start: Some(0.5 * s.t_start),
            ..Default::default()
        };
        assert!(appendix_sub_params_with(&model(), 0.2, &ov).is_err());
    }

    #[test]
    fn ordering_with_shift() {
        let s = appendix_sub_params(&model(), 0.2).unwrap();
        let u0 = InitialData::algebraic(1.0, 3.0, 2.0, 1.0).unwrap();
        for x in geomspace(1.0, 1e4 * s.x_prime, 500) {
            let v = s.lower_bound(0.0, x).unwrap();
            assert!(u0.eval(x) >= v, "x = {x}");
        }
    }

    #[test]
    fn outside_range_is_mismatch() {
        let m = Model::new(ModelParams::new(0.5, 3.0, 1.1));
        assert!(matches!(
            appendix_sub_params(&m, 0.2),
            Err(Error::RegimeMismatch(_))
        ));
    }
}
