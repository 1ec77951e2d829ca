//! Plateau-cut accelerating subsolution for fast diffusion (`0 < m < 1`).

use serde::Serialize;

use super::{
    a_bound_s0, enlarge_until, geomspace, level_curve, peak_level, rho_interval, Barrier,
    GrowthSolution, Ledger, Overrides, Profile, Side,
};
use crate::error::{Error, Result};
use crate::model::{InitialData, Model};
use crate::regimes::{gamma_effective, BOUNDARY_TOL};

#[derive(Debug, Clone, Serialize)]
pub struct FdePlateau {
    pub m: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub rho: f64,
    /// Tail constant after enlargement (only changes in the critical case).
    pub c: f64,
    /// Tail onset after enlargement.
    pub x0: f64,
    pub kappa: f64,
    pub a: f64,
    /// `theta* = (A(1+eta))^(-1/eta)`, the level tracked by `X(t)`.
    pub theta_star: f64,
    pub plateau: f64,
    pub r: f64,
    /// Datum `C/x^gamma` for `x >= x0` the subsolution sits under.
    pub datum: InitialData,
    pub growth: GrowthSolution,
    pub ledger: Ledger,
}

/// The three `x0` conditions; returns `(lhs, rhs)` pairs.
struct FdeTerms {
    m: f64,
    beta: f64,
    gamma: f64,
    eta: f64,
    gap1: f64,
    gap2: f64,
}

impl FdeTerms {
    fn theta(&self) -> f64 {
        let (m, b, e) = (self.m, self.beta, self.eta);
        2.0 * m + b + e - 1.0 + (1.0 - m) * 2.0 * e / (1.0 + e)
    }

    fn eval(&self, c: f64, x0: f64) -> [(f64, f64); 3] {
        let (m, b, g, e) = (self.m, self.beta, self.gamma, self.eta);
        let e1 = 2.0 + (m - b) * g;
        let e2 = 2.0 + 2.0 * g * (1.0 - b);
        let base = g * c.powf(m - b) / x0.powf(e1);
        let pre = 2f64.powf(1.0 - m) * m * e;
        let lhs1 = m * base * (g + 1.0 - g * b);
        let lhs2 = pre * base * (2.0 * m * g + 1.0 + g * e + 2.0 * (1.0 - m) * e / (1.0 + e) * g);
        let lhs3 = pre
            * (base * (g + 1.0 - g * b) + self.theta() * g * g * c.powf(2.0 - 2.0 * b) / x0.powf(e2));
        [(lhs1, self.gap1), (lhs2, self.gap2), (lhs3, self.gap2)]
    }

    fn all_hold(&self, c: f64, x0: f64) -> bool {
        self.eval(c, x0).iter().all(|(l, r)| l <= r)
    }

    /// Parts that do not decay in `x0` when `2 + (m - beta) gamma = 0`.
    fn c_only_hold(&self, c: f64) -> bool {
        let (m, b, g, e) = (self.m, self.beta, self.gamma, self.eta);
        let base = g * c.powf(m - b);
        let pre = 2f64.powf(1.0 - m) * m * e;
        m * base * (g + 1.0 - g * b) <= self.gap1
            && pre * base * (2.0 * m * g + 1.0 + g * e + 2.0 * (1.0 - m) * e / (1.0 + e) * g)
                <= self.gap2
            && pre * base * (g + 1.0 - g * b) <= 0.5 * self.gap2
    }
}

pub fn fde_sub_params(model: &Model, epsilon: f64, plateau: f64) -> Result<FdePlateau> {
    fde_sub_params_with(model, epsilon, plateau, &Overrides::default())
}

pub fn fde_sub_params_with(
    model: &Model,
    epsilon: f64,
    plateau: f64,
    ov: &Overrides,
) -> Result<FdePlateau> {
    let p = &model.params;
    let (m, beta) = (p.m, p.beta);
    let gamma = gamma_effective(m, p.alpha)?;
    let critical = (gamma - 2.0 / (1.0 - m)).abs() <= BOUNDARY_TOL * gamma && beta == 1.0;
    let h1 = 1.0 + 1.0 / gamma;
    let h2 = m + 2.0 / gamma;
    if !critical && !(beta < h1 && beta < h2 && (h2 - beta) > BOUNDARY_TOL * h2) {
        return Err(Error::RegimeMismatch(format!(
            "plateau subsolution needs beta < min(1 + 1/gamma, m + 2/gamma) = {}, got {beta}",
            h1.min(h2)
        )));
    }
    let (r, _) = model.certified_rates();
    if !(epsilon > 0.0 && epsilon < r) {
        return Err(Error::infeasible(format!(
            "rho interval empty: need 0 < eps = {epsilon} < r = {r}"
        )));
    }

    let eta = ov.eta.unwrap_or((beta - 1.0).max(1.0) + 0.5);
    let (rho_lo, rho_hi) = rho_interval(r, beta, eta, epsilon);
    let rho = ov.rho.unwrap_or(0.5 * (rho_lo + rho_hi));
    let terms = FdeTerms {
        m,
        beta,
        gamma,
        eta,
        gap1: r - rho,
        gap2: rho * (1.0 + eta) - r * beta,
    };
    let gaps_ok = terms.gap1 > 0.0 && terms.gap2 > 0.0;

    let mut c = p.c_lower;
    if critical && gaps_ok {
        let mut doublings = 0;
        while !terms.c_only_hold(c) {
            c *= 2.0;
            doublings += 1;
            if doublings > 2000 {
                return Err(Error::infeasible("no tail constant satisfies the C conditions"));
            }
        }
    }
    // the datum must stay below 1 at its onset
    let mut x0 = p.x0.max(c.powf(1.0 / gamma) * (1.0 + 1e-9));
    if gaps_ok {
        x0 = match ov.x1 {
            Some(x) => x,
            None => enlarge_until(x0, "x0", |x| terms.all_hold(c, x))?,
        };
    }
    let datum = InitialData::algebraic(c, gamma, x0, plateau)?;
    let kappa = datum.eval(x0);
    let a = ov.a.unwrap_or(
        2.0 * (1.0f64)
            .max(1.0 / (kappa.powf(eta) * (1.0 + eta)))
            .max(a_bound_s0(eta, p.s0)),
    );
    let theta_star = peak_level(a, eta);
    let plateau_value = theta_star * eta / (1.0 + eta);

    let mut ledger = Ledger::default();
    ledger.lt("eta > max(beta - 1, 1)", (beta - 1.0).max(1.0), eta);
    ledger.lt("max(r beta/(1+eta), r - eps) < rho", rho_lo, rho);
    ledger.lt("rho < r", rho, rho_hi);
    let names = [
        "x0 condition (diffusion vs r - rho)",
        "x0 condition (beta <= 2 - m branch)",
        "x0 condition (beta > 2 - m branch)",
    ];
    for (name, (lhs, rhs)) in names.iter().zip(terms.eval(c, x0)) {
        ledger.le(name, lhs, rhs);
    }
    ledger.lt("A > 1", 1.0, a);
    ledger.lt("1/(kappa^eta (1+eta)) < A", 1.0 / (kappa.powf(eta) * (1.0 + eta)), a);
    ledger.le("plateau value <= s0", plateau_value, p.s0);
    ledger.verify()?;

    Ok(FdePlateau {
        m,
        beta,
        gamma,
        eta,
        rho,
        c,
        x0,
        kappa,
        a,
        theta_star,
        plateau: plateau_value,
        r,
        datum,
        growth: GrowthSolution::new(rho, beta, Profile::Power { c, alpha: gamma }),
        ledger,
    })
}

impl FdePlateau {
    /// Junction `X(t)` where `w(t, X(t)) = theta*`.
    pub fn junction(&self, t: f64) -> f64 {
        level_curve(self.theta_star, t, self.c, self.gamma, self.beta, self.rho)
            .expect("theta* lies below the tail constant")
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if x <= self.junction(t) {
            return Ok(self.plateau);
        }
        let w = self.growth.eval(t, x)?;
        Ok(w * (1.0 - self.a * w.powf(self.eta)))
    }
}

impl Barrier for FdePlateau {
    fn side(&self) -> Side {
        Side::Sub
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        FdePlateau::eval(self, t, x)
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= 0.0 && x > self.junction(t)
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for t in [0.5, 2.0, 10.0, 30.0] {
            let left = self.junction(t);
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

    #[test]
    fn feasible_for_lower_only_neighbour() {
        let p = ModelParams::new(0.5, 3.0, 1.1);
        let s = fde_sub_params(&Model::new(p), 0.2, 1.0).unwrap();
        assert!(s.plateau < p.s0);
        assert!(p.m + 2.0 / s.gamma > p.beta);
        assert!(s.junction(0.0) > s.x0);
    }

    #[test]
    fn boundary_beta_is_rejected() {
        let p = ModelParams::new(0.5, 3.0, 0.5 + 2.0 / 3.0);
        assert!(matches!(
            fde_sub_params(&Model::new(p), 0.2, 1.0),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn critical_case_enlarges_constant() {
        let p = ModelParams::new(0.5, 8.0, 1.0);
        let s = fde_sub_params(&Model::new(p), 0.1, 1.0).unwrap();
        assert!(s.c > p.c_lower);
        assert!((s.gamma - 4.0).abs() < 1e-12);
        assert!(s.c / s.x0.powf(s.gamma) <= 1.0);
    }

    #[test]
    fn c1_across_junction() {
        let p = ModelParams::new(0.5, 3.0, 1.1);
        let s = fde_sub_params(&Model::new(p), 0.2, 1.0).unwrap();
        let t = 3.0;
        let xj = s.junction(t);
        let v_left = s.eval(t, xj).unwrap();
        let v_right = s.eval(t, xj * (1.0 + 1e-12)).unwrap();
        assert!((v_left - v_right).abs() < 1e-12 * v_left.max(1e-300) + 1e-15);
        let mut prev = f64::INFINITY;
        for k in [1e-2, 1e-3, 1e-4] {
            let h = k * xj;
            let dr = (s.eval(t, xj + h).unwrap() - v_left) / h;
            assert!(dr <= 0.0);
            assert!(dr.abs() < prev);
            prev = dr.abs();
        }
    }

    #[test]
    fn perturbed_a_is_rejected() {
        let p = ModelParams::new(0.5, 3.0, 1.1);
        let model = Model::new(p);
        let ov = Overrides {
            a: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            fde_sub_params_with(&model, 0.2, 1.0, &ov),
            Err(Error::InfeasibleSelection { .. })
        ));
        let ov = Overrides {
            eta: Some(0.9),
            ..Default::default()
        };
        assert!(fde_sub_params_with(&model, 0.2, 1.0, &ov).is_err());
    }
}
