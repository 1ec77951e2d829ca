//! Accelerating small-bump subsolution `max(0, w - A w^(1+eta))` for `m > 1`.

use serde::Serialize;

use super::{
    a_bound_s0, enlarge_until, geomspace, level_curve, peak_level, rho_interval, Barrier,
    GrowthSolution, Ledger, Overrides, Profile, Side,
};
use crate::error::{Error, Result};
use crate::model::{InitialData, Model};

#[derive(Debug, Clone, Serialize)]
pub struct PmeBump {
    pub m: f64,
    pub beta: f64,
    pub eta: f64,
    pub rho: f64,
    pub x1: f64,
    pub kappa: f64,
    pub a: f64,
    /// Tail constant and exponent of the datum the bump is built on.
    pub c: f64,
    pub alpha: f64,
    /// Lower reaction rate actually certified on `[0, s0]`.
    pub r: f64,
    pub growth: GrowthSolution,
    pub ledger: Ledger,
}

/// `m |phi'(x)|` and `phi(x)^2` for `phi = u0'/u0^beta` on the tail `c/x^alpha`.
fn phi_terms(c: f64, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let k = alpha * (beta - 1.0);
    let dphi = alpha * (1.0 - k) / (c.powf(beta - 1.0) * x.powf(2.0 - k));
    let phi = alpha / (c.powf(beta - 1.0) * x.powf(1.0 - k));
    (dphi.abs(), phi * phi)
}

pub fn pme_bump_params(model: &Model, epsilon: f64, u0: &InitialData) -> Result<PmeBump> {
    pme_bump_params_with(model, epsilon, u0, &Overrides::default())
}

pub fn pme_bump_params_with(
    model: &Model,
    epsilon: f64,
    u0: &InitialData,
    ov: &Overrides,
) -> Result<PmeBump> {
    let p = &model.params;
    let (m, beta) = (p.m, p.beta);
    if m <= 1.0 {
        return Err(Error::RegimeMismatch(format!(
            "small-bump subsolution needs m > 1, got {m}"
        )));
    }
    let (c, alpha, x0) = u0
        .algebraic_tail()
        .ok_or_else(|| Error::RegimeMismatch("small bump needs an exact algebraic tail".into()))?;
    if !(beta < 1.0 + 1.0 / alpha) {
        return Err(Error::RegimeMismatch(format!(
            "small bump needs beta < 1 + 1/alpha, got beta = {beta}, alpha = {alpha}"
        )));
    }
    let (r, _) = model.certified_rates();
    if !(epsilon > 0.0 && epsilon < r) {
        return Err(Error::infeasible(format!(
            "rho interval empty: need 0 < eps = {epsilon} < r = {r}"
        )));
    }

    let eta = ov.eta.unwrap_or(1.5 * (beta - 1.0).max(1.0));
    let (rho_lo, rho_hi) = rho_interval(r, beta, eta, epsilon);
    let rho = ov.rho.unwrap_or(0.5 * (rho_lo + rho_hi));
    let gap1 = r - rho;
    let gap2 = rho - r * beta / (1.0 + eta);
    let coef = m * (2.0 * m + beta + eta - 1.0);
    let far = |x: f64| {
        let (dphi, phi2) = phi_terms(c, alpha, beta, x);
        m * dphi <= gap1 && m * dphi + coef * phi2 <= gap2
    };
    let x1 = match ov.x1 {
        Some(x) => x,
        None => {
            if gap1 <= 0.0 || gap2 <= 0.0 {
                x0
            } else {
                enlarge_until(x0, "x1", far)?
            }
        }
    };
    let kappa = u0.eval(x1);
    let a = ov
        .a
        .unwrap_or(2.0 * kappa.powf(-eta).max(a_bound_s0(eta, p.s0)));

    let (dphi, phi2) = phi_terms(c, alpha, beta, x1);
    let mut ledger = Ledger::default();
    ledger.lt("beta < 1 + eta", beta, 1.0 + eta);
    ledger.lt("max(r beta/(1+eta), r - eps) < rho", rho_lo, rho);
    ledger.lt("rho < r", rho, rho_hi);
    ledger.le("x1 >= x0", x0, x1);
    ledger.le("m|phi'(x1)| <= r - rho", m * dphi, gap1);
    ledger.le(
        "m|phi'(x1)| + m(2m+beta+eta-1) phi(x1)^2 <= rho - r beta/(1+eta)",
        m * dphi + coef * phi2,
        gap2,
    );
    ledger.lt("1/kappa^eta < A", kappa.powf(-eta), a);
    ledger.le(
        "(eta/(1+eta)) (A(1+eta))^(-1/eta) <= s0",
        eta / (1.0 + eta) * peak_level(a, eta),
        p.s0,
    );
    ledger.verify()?;

    Ok(PmeBump {
        m,
        beta,
        eta,
        rho,
        x1,
        kappa,
        a,
        c,
        alpha,
        r,
        growth: GrowthSolution::new(rho, beta, Profile::Data(*u0)),
        ledger,
    })
}

impl PmeBump {
    /// Level `A^(-1/eta)` below which the bump is positive.
    pub fn cut_level(&self) -> f64 {
        self.a.powf(-1.0 / self.eta)
    }

    /// Largest value of the bump, `(eta/(1+eta)) (A(1+eta))^(-1/eta)`.
    pub fn max_value(&self) -> f64 {
        self.eta / (1.0 + self.eta) * peak_level(self.a, self.eta)
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let w = self.growth.eval(t, x)?;
        Ok((w - self.a * w.powf(1.0 + self.eta)).max(0.0))
    }

    /// Left edge of the positive part at time `t`.
    pub fn support_left(&self, t: f64) -> f64 {
        level_curve(self.cut_level(), t, self.c, self.alpha, self.beta, self.rho)
            .unwrap_or(f64::INFINITY)
    }
}

impl Barrier for PmeBump {
    fn side(&self) -> Side {
        Side::Sub
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        PmeBump::eval(self, t, x)
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= 0.0
            && x >= self.x1
            && matches!(self.growth.eval(t, x), Ok(w) if w < self.cut_level() * (1.0 - 1e-9))
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let t_end = 50.0;
        for t in [0.5, 0.1 * t_end, 0.5 * t_end, t_end] {
            let left = self.support_left(t);
            for x in geomspace(left * 1.01, left * 1e3, n) {
                pts.push((t, x));
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn setup() -> (Model, InitialData) {
        let p = ModelParams::new(2.0, 2.0, 1.25);
        (Model::new(p), InitialData::from_params(&p, 1.0).unwrap())
    }

    #[test]
    fn accepts_half_eta_and_rho() {
        let (model, u0) = setup();
        let ov = Overrides {
            eta: Some(0.5),
            rho: Some(0.9),
            ..Overrides::default()
        };
        let b = pme_bump_params_with(&model, 0.2, &u0, &ov).unwrap();
        assert!(b.ledger.entries.iter().all(|e| e.holds()));
        assert!(b.x1 > 2.0);
    }

    #[test]
    fn default_selection_is_certified() {
        let (model, u0) = setup();
        let b = pme_bump_params(&model, 0.2, &u0).unwrap();
        assert!((b.eta - 1.5).abs() < 1e-15);
        assert!(b.max_value() <= 0.05);
        assert!(b.a > b.kappa.powf(-b.eta));
    }

    #[test]
    fn epsilon_equal_r_is_infeasible() {
        let (model, u0) = setup();
        assert!(matches!(
            pme_bump_params(&model, 1.0, &u0),
            Err(Error::InfeasibleSelection { .. })
        ));
    }

    #[test]
    fn perturbed_constants_are_rejected() {
        let (model, u0) = setup();
        let b = pme_bump_params(&model, 0.2, &u0).unwrap();
        let bad = [
            Overrides { eta: Some(0.2), ..Default::default() },
            Overrides { rho: Some(0.99), ..Default::default() },
            Overrides { rho: Some(0.5), ..Default::default() },
            Overrides { x1: Some(b.x1 * 0.5), ..Default::default() },
            Overrides { a: Some(b.kappa.powf(-b.eta) * 0.9), ..Default::default() },
        ];
        for ov in bad {
            assert!(
                matches!(
                    pme_bump_params_with(&model, 0.2, &u0, &ov),
                    Err(Error::InfeasibleSelection { .. })
                ),
                "{ov:?}"
            );
        }
    }

    #[test]
    fn larger_tail_constant_does_not_push_x1_right() {
        let (model, _) = setup();
        let small = InitialData::algebraic(1.0, 2.0, 2.0, 1.0).unwrap();
        let large = InitialData::algebraic(2.0, 2.0, 2.0, 1.0).unwrap();
        let b1 = pme_bump_params(&model, 0.2, &small).unwrap();
        let b2 = pme_bump_params(&model, 0.2, &large).unwrap();
        assert!(b2.x1 <= b1.x1);
    }

    #[test]
    fn eval_cut_and_peak() {
        let (model, u0) = setup();
        let b = pme_bump_params(&model, 0.2, &u0).unwrap();
        // bump value as a function of w
        let v = |w: f64| (w - b.a * w.powf(1.0 + b.eta)).max(0.0);
        assert!(v(b.cut_level()).abs() < 1e-15);
        let peak = peak_level(b.a, b.eta);
        assert!((v(peak) - b.max_value()).abs() < 1e-15);
        assert!(v(peak * 1.01) < v(peak) && v(peak * 0.99) < v(peak));
        // A = 16, eta = 1, w = 0.1 clamps to 0
        assert_eq!((0.1f64 - 16.0 * 0.01).max(0.0), 0.0);
    }
}
