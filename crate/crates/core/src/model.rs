//! Equation parameters, the reaction family, front-like initial data and
//! spatial grids for `u_t = (u^m)_xx + f(u)` on the line.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serde adapter for tail exponents: `alpha = inf` is written as the string
/// `"inf"`, finite values as plain numbers.
pub mod tail_exponent {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        struct AlphaVisitor;

        impl Visitor<'_> for AlphaVisitor {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "Infinity" | "infinity" => Ok(f64::INFINITY),
                    other => other.parse::<f64>().map_err(E::custom),
                }
            }
        }

        deserializer.deserialize_any(AlphaVisitor)
    }
}

/// Parameters of the model: diffusion exponent, initial tail, and the
/// power-law bounds `r s^beta <= f(s) <= r_bar s^beta` on the reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    /// Tail exponent; `f64::INFINITY` stands for exponentially bounded data.
    #[serde(with = "tail_exponent")]
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub r_bar: f64,
    #[serde(rename = "C")]
    pub c_lower: f64,
    #[serde(rename = "C_bar")]
    pub c_upper: f64,
    pub s0: f64,
    pub x0: f64,
}

impl ModelParams {
    /// Parameters with `r = r_bar = 1`, `C = C_bar = 1`, `s0 = 0.05`, `x0 = 2`.
    pub fn new(m: f64, alpha: f64, beta: f64) -> Self {
        ModelParams {
            m,
            alpha,
            beta,
            r: 1.0,
            r_bar: 1.0,
            c_lower: 1.0,
            c_upper: 1.0,
            s0: 0.05,
            x0: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self;
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Parameter(msg.to_string()))
            }
        };
        check(p.m > 0.0 && p.m.is_finite(), "m must be positive")?;
        check(p.alpha > 0.0, "alpha must be positive (or inf)")?;
        check(p.beta >= 1.0 && p.beta.is_finite(), "beta must be >= 1")?;
        check(p.r > 0.0, "r must be positive")?;
        check(p.r_bar >= p.r, "r_bar must be >= r")?;
        check(p.c_lower > 0.0, "C must be positive")?;
        check(p.c_upper >= p.c_lower, "C_bar must be >= C")?;
        check(p.s0 > 0.0 && p.s0 < 1.0, "s0 must lie in (0, 1)")?;
        check(p.x0 > 1.0, "x0 must exceed 1")?;
        Ok(())
    }

    pub fn has_heavy_tail(&self) -> bool {
        self.alpha.is_finite()
    }
}

/// Evaluates the default family `f(s) = r s^beta (1 - s)`.
pub fn reaction_eval(params: &ModelParams, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("density {s} outside [0, 1]")));
    }
    Ok(params.r * s.powf(params.beta) * (1.0 - s))
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A reaction term `s -> f(s)` on `[0, 1]` together with the power `beta`
/// it behaves like at zero.
#[derive(Clone)]
pub struct ReactionFn {
    label: String,
    beta: f64,
    eval: Arc<ScalarFn>,
}

impl fmt::Debug for ReactionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionFn")
            .field("label", &self.label)
            .field("beta", &self.beta)
            .finish()
    }
}

impl ReactionFn {
    /// `f(s) = r s^beta (1 - s)`.
    pub fn monostable(r: f64, beta: f64) -> Self {
        ReactionFn {
            label: format!("{r}*s^{beta}*(1-s)"),
            beta,
            eval: Arc::new(move |s: f64| r * s.powf(beta) * (1.0 - s)),
        }
    }

    /// The default family built from `params.r` and `params.beta`.
    pub fn from_params(params: &ModelParams) -> Self {
        Self::monostable(params.r, params.beta)
    }

    /// `f = 0`: pure porous-medium / fast-diffusion dynamics.
    pub fn zero() -> Self {
        ReactionFn {
            label: "0".to_string(),
            beta: 1.0,
            eval: Arc::new(|_| 0.0),
        }
    }

    pub fn custom<F>(label: impl Into<String>, beta: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ReactionFn {
            label: label.into(),
            beta,
            eval: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_zero(&self) -> bool {
        self.label == "0"
    }

    /// Sampled infimum of `f(s)/s^beta` over `(0, s0]`.
    pub fn lower_rate(&self, beta: f64, s0: f64, n: usize) -> f64 {
        sample_points(s0, n)
            .map(|s| self.eval(s) / s.powf(beta))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sampled supremum of `f(s)/s^beta` over `(0, 1]`.
    pub fn upper_rate(&self, beta: f64, n: usize) -> f64 {
        sample_points(1.0, n)
            .map(|s| self.eval(s) / s.powf(beta))
            .fold(0.0, f64::max)
    }

    /// Sampled supremum of `f` over `[0, 1]`.
    pub fn sup(&self, n: usize) -> f64 {
        (0..=n)
            .map(|i| self.eval(i as f64 / n as f64))
            .fold(0.0, f64::max)
    }

    /// Checks the monostable shape and the two power-law bounds on a dense
    /// sample.
    ///
    /// `lower = (r, beta, s0)` asks for `f(s) >= r s^beta` on `[0, s0]`;
    /// `upper = (r_bar, beta)` asks for `f(s) <= r_bar s^beta` on `[0, 1]`.
    pub fn certify(
        &self,
        lower: (f64, f64, f64),
        upper: (f64, f64),
        n_samples: usize,
    ) -> Result<CertificateReport> {
        if n_samples < 1000 {
            return Err(Error::Parameter(
                "certification needs at least 1000 samples".into(),
            ));
        }
        let (r, beta_lo, s0) = lower;
        let (r_bar, beta_hi) = upper;
        const TOL: f64 = 1e-12;

        let f0 = self.eval(0.0);
        let f1 = self.eval(1.0);
        if f0.abs() > 1e-14 {
            return Err(Error::CertificateViolation {
                bound: "monostable f(0) = 0",
                s: 0.0,
                margin: -f0.abs(),
            });
        }
        if f1.abs() > 1e-14 {
            return Err(Error::CertificateViolation {
                bound: "monostable f(1) = 0",
                s: 1.0,
                margin: -f1.abs(),
            });
        }

        let mut lower_margin = f64::INFINITY;
        let mut lower_at = 0.0;
        let mut upper_margin = f64::INFINITY;
        let mut upper_at = 0.0;
        for i in 0..=n_samples {
            let s = i as f64 / n_samples as f64;
            let fs = self.eval(s);
            if s > 0.0 && s < 1.0 && fs <= 0.0 {
                return Err(Error::CertificateViolation {
                    bound: "monostable positivity",
                    s,
                    margin: fs,
                });
            }
            let up = r_bar * s.powf(beta_hi) - fs;
            if up < upper_margin {
                upper_margin = up;
                upper_at = s;
            }
        }
        for i in 0..=n_samples {
            let s = s0 * i as f64 / n_samples as f64;
            let lo = self.eval(s) - r * s.powf(beta_lo);
            if lo < lower_margin {
                lower_margin = lo;
                lower_at = s;
            }
        }
        if lower_margin < -TOL {
            return Err(Error::CertificateViolation {
                bound: "lower",
                s: lower_at,
                margin: lower_margin,
            });
        }
        if upper_margin < -TOL {
            return Err(Error::CertificateViolation {
                bound: "upper",
                s: upper_at,
                margin: upper_margin,
            });
        }
        Ok(CertificateReport {
            lower_margin,
            lower_argmin: lower_at,
            upper_margin,
            upper_argmin: upper_at,
            n_samples,
        })
    }
}

/// Log-spaced points in `(0, top]` down to `1e-12 * top`, plus a uniform
/// sweep; ratios `f(s)/s^beta` need both ends resolved.
fn sample_points(top: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(10);
    let logs = (0..n).map(move |i| top * 10f64.powf(-12.0 * i as f64 / n as f64));
    let lin = (1..=n).map(move |i| top * i as f64 / n as f64);
    logs.chain(lin)
}

/// Outcome of [`ReactionFn::certify`]: the smallest sampled margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    pub lower_margin: f64,
    pub lower_argmin: f64,
    pub upper_margin: f64,
    pub upper_argmin: f64,
    pub n_samples: usize,
}

/// Parameters bundled with the reaction they describe.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub reaction: ReactionFn,
}

impl Model {
    /// Model with the default reaction `r s^beta (1 - s)`.
    pub fn new(params: ModelParams) -> Self {
        let reaction = ReactionFn::from_params(&params);
        Model { params, reaction }
    }

    pub fn with_reaction(params: ModelParams, reaction: ReactionFn) -> Self {
        Model { params, reaction }
    }

    /// Rates actually certified for this reaction: the lower rate is capped by
    /// the sampled infimum of `f/s^beta` on `(0, s0]`, the upper one raised to
    /// the sampled supremum on `(0, 1]`.
    pub fn certified_rates(&self) -> (f64, f64) {
        let p = &self.params;
        let lo = self.reaction.lower_rate(p.beta, p.s0, 20_000) * (1.0 - 1e-9);
        let hi = self.reaction.upper_rate(p.beta, 20_000) * (1.0 + 1e-9);
        (p.r.min(lo), p.r_bar.max(hi))
    }
}

/// Shape of the initial datum to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `u0(x) = c / x^alpha` for `x >= x0`.
    Algebraic { c: f64, alpha: f64, x0: f64 },
    /// Logistic profile `level / (1 + exp(decay (x - x0)))`.
    Light { x0: f64, decay: f64 },
}

/// Front-like initial datum: a plateau on the left, a prescribed tail on the
/// right, joined monotonically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub tail: Tail,
    /// Value of the datum for `x <= x0 - 1`.
    pub left_level: f64,
    /// Hermite slope used at `x0` by the join (tail slope unless limited).
    join_slope: f64,
}

impl InitialData {
    /// Exact algebraic tail `c / x^alpha` for `x >= x0`, constant
    /// `max(plateau, c / x0^alpha)` for `x <= x0 - 1`, monotone cubic join.
    pub fn algebraic(c: f64, alpha: f64, x0: f64, plateau: f64) -> Result<Self> {
        if !(c > 0.0 && alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(
                "tail constant and exponent must be positive and finite".into(),
            ));
        }
        if x0 <= 1.0 {
            return Err(Error::Parameter("x0 must exceed 1".into()));
        }
        if !(plateau > 0.0 && plateau <= 1.0) {
            return Err(Error::Parameter("plateau must lie in (0, 1]".into()));
        }
        let at_x0 = c / x0.powf(alpha);
        if at_x0 > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!(
                "tail value c/x0^alpha = {at_x0} exceeds 1"
            )));
        }
        let left = plateau.max(at_x0);
        let tail_slope = -alpha * c / x0.powf(alpha + 1.0);
        // Fritsch-Carlson: slope at x0 relative to the secant must stay <= 3.
        let secant = at_x0 - left;
        let join_slope = if secant == 0.0 {
            0.0
        } else if tail_slope / secant > 3.0 {
            3.0 * secant
        } else {
            tail_slope
        };
        Ok(InitialData {
            tail: Tail::Algebraic { c, alpha, x0 },
            left_level: left,
            join_slope,
        })
    }

    /// Exponentially decaying (light-tailed) front-like datum.
    pub fn light_tail(plateau: f64, x0: f64, decay: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau <= 1.0) || decay <= 0.0 {
            return Err(Error::Parameter(
                "light tail needs plateau in (0,1] and positive decay".into(),
            ));
        }
        Ok(InitialData {
            tail: Tail::Light { x0, decay },
            left_level: plateau,
            join_slope: 0.0,
        })
    }

    /// Datum matching `params`: exact lower tail `C / x^alpha`, or a light
    /// tail with unit decay rate 4 when `alpha = inf`.
    pub fn from_params(params: &ModelParams, plateau: f64) -> Result<Self> {
        if params.alpha.is_finite() {
            Self::algebraic(params.c_lower, params.alpha, params.x0, plateau)
        } else {
            Self::light_tail(plateau, params.x0, 4.0)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.tail {
            Tail::Light { x0, decay } => {
                let z = decay * (x - x0);
                if z > 700.0 {
                    0.0
                } else {
                    self.left_level / (1.0 + z.exp())
                }
            }
            Tail::Algebraic { c, alpha, x0 } => {
                if x >= x0 {
                    c / x.powf(alpha)
                } else if x <= x0 - 1.0 {
                    self.left_level
                } else {
                    let at_x0 = c / x0.powf(alpha);
                    hermite(x - (x0 - 1.0), self.left_level, 0.0, at_x0, self.join_slope)
                }
            }
        }
    }

    /// `inf_{y < x} u0(y)`; equals `u0(x)` because the datum is nonincreasing.
    pub fn inf_below(&self, x: f64) -> f64 {
        self.eval(x)
    }

    /// `(c, alpha, x0)` of an algebraic tail.
    pub fn algebraic_tail(&self) -> Option<(f64, f64, f64)> {
        match self.tail {
            Tail::Algebraic { c, alpha, x0 } => Some((c, alpha, x0)),
            Tail::Light { .. } => None,
        }
    }
}

/// Cubic Hermite on the unit interval.
fn hermite(s: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Largest admissible ratio between adjacent cells of a geometric grid.
pub const MAX_GEOMETRIC_RATIO: f64 = 1.05;

/// Strictly increasing node abscissas `x_0 < ... < x_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    kind: GridKind,
    ratio: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn uniform(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        check_bounds(x_left, x_right, n)?;
        let h = (x_right - x_left) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| x_left + h * i as f64).collect();
        nodes[n] = x_right;
        Ok(Grid {
            kind: GridKind::Uniform,
            ratio: 1.0,
            nodes,
        })
    }

    /// Nodes `x_left + L (q^i - 1)/(q^n - 1)`: cells grow by the factor `q`.
    pub fn geometric(x_left: f64, x_right: f64, n: usize, ratio: f64) -> Result<Self> {
        check_bounds(x_left, x_right, n)?;
        if !(ratio > 1.0 && ratio <= MAX_GEOMETRIC_RATIO) {
            return Err(Error::Parameter(format!(
                "geometric ratio {ratio} outside (1, {MAX_GEOMETRIC_RATIO}]"
            )));
        }
        let len = x_right - x_left;
        let denom = ratio.powi(n as i32) - 1.0;
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| x_left + len * (ratio.powi(i as i32) - 1.0) / denom)
            .collect();
        nodes[n] = x_right;
        Ok(Grid {
            kind: GridKind::Geometric,
            ratio,
            nodes,
        })
    }

    /// Geometric grid whose first (finest) cell has width `finest`.
    ///
    /// Falls back to a uniform grid when `finest >= (x_right - x_left)/n`.
    pub fn geometric_with_finest(x_left: f64, x_right: f64, n: usize, finest: f64) -> Result<Self> {
        check_bounds(x_left, x_right, n)?;
        let len = x_right - x_left;
        if finest >= len / n as f64 {
            return Self::uniform(x_left, x_right, n);
        }
        let first_cell = |q: f64| len * (q - 1.0) / (q.powi(n as i32) - 1.0);
        if first_cell(MAX_GEOMETRIC_RATIO) > finest {
            return Err(Error::Parameter(format!(
                "{n} cells cannot reach a finest cell of {finest} with ratio <= {MAX_GEOMETRIC_RATIO}"
            )));
        }
        let (mut lo, mut hi) = (1.0 + 1e-12, MAX_GEOMETRIC_RATIO);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if first_cell(mid) > finest {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::geometric(x_left, x_right, n, hi)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Width of cell `i`, i.e. `x_{i+1} - x_i`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn finest_cell(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Whether the finest cell is at most a tenth of `front_width`.
    pub fn resolves(&self, front_width: f64) -> bool {
        self.finest_cell() <= 0.1 * front_width
    }

    /// Index of the cell containing `x` (clamped to the grid).
    pub fn locate(&self, x: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("NaN node"))
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.nodes.len() - 2),
        }
    }
}

fn check_bounds(x_left: f64, x_right: f64, n: usize) -> Result<()> {
    if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
        return Err(Error::Parameter(format!(
            "grid bounds [{x_left}, {x_right}] are not increasing"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("a grid needs at least 2 cells".into()));
    }
    Ok(())
}

/// Builds a grid of `n` cells; `ratio` is mandatory for geometric grids.
pub fn grid_build(
    kind: GridKind,
    x_left: f64,
    x_right: f64,
    n: usize,
    ratio: Option<f64>,
) -> Result<Grid> {
    match kind {
        GridKind::Uniform => Grid::uniform(x_left, x_right, n),
        GridKind::Geometric => {
            let q = ratio.unwrap_or(1.02);
            Grid::geometric(x_left, x_right, n, q)
        }
    }
}

/// Nodal values in `[0, 1]` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub t: f64,
    values: Vec<f64>,
}

/// Slack tolerated outside `[0, 1]` before a field is rejected.
pub const FIELD_SLACK: f64 = 1e-12;

impl Field {
    /// Rejects values outside `[-1e-12, 1 + 1e-12]` and clamps the rest.
    pub fn new(t: f64, mut values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter_mut().enumerate() {
            if !(*v >= -FIELD_SLACK && *v <= 1.0 + FIELD_SLACK) {
                return Err(Error::Domain(format!("field value {v} at node {i}")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Field { t, values })
    }

    pub fn from_initial(grid: &Grid, u0: &InitialData) -> Self {
        let values = grid.nodes().iter().map(|&x| u0.eval(x).clamp(0.0, 1.0)).collect();
        Field { t: 0.0, values }
    }

    /// Trusted constructor for values already known to lie in `[0, 1]`.
    pub(crate) fn from_clamped(t: f64, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Field { t, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `grid` section of a model configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub kind: GridKind,
    pub x_left: f64,
    pub x_right: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Target width of the finest geometric cell; used when `ratio` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finest: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        match (self.kind, self.ratio, self.finest) {
            (GridKind::Geometric, None, Some(h)) => {
                Grid::geometric_with_finest(self.x_left, self.x_right, self.n, h)
            }
            _ => grid_build(self.kind, self.x_left, self.x_right, self.n, self.ratio),
        }
    }
}

fn default_plateau() -> f64 {
    1.0
}

/// JSON model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
    pub grid: GridConfig,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::Parameter(e.to_string()))?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        InitialData::from_params(&self.params, self.plateau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaction_fixed_points_and_value() {
        let p = ModelParams {
            r: 1.0,
            beta: 2.0,
            ..ModelParams::new(1.0, 2.0, 2.0)
        };
        assert_eq!(reaction_eval(&p, 0.0).unwrap(), 0.0);
        assert_eq!(reaction_eval(&p, 1.0).unwrap(), 0.0);
        assert!((reaction_eval(&p, 0.5).unwrap() - 0.125).abs() < 1e-15);
        assert!(matches!(reaction_eval(&p, 1.5), Err(Error::Domain(_))));
        assert!(matches!(reaction_eval(&p, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn certify_quadratic_family() {
        let f = ReactionFn::monostable(1.0, 2.0);
        let rep = f.certify((0.5, 2.0, 0.5), (1.0, 2.0), 100_000).unwrap();
        assert!(rep.lower_margin >= -1e-12 && rep.upper_margin >= -1e-12);
    }

    #[test]
    fn certify_rejects_wrong_upper_power() {
        // s(1-s) > s^2 for s < 1/2
        let f = ReactionFn::monostable(1.0, 1.0);
        match f.certify((0.1, 1.0, 0.5), (1.0, 2.0), 100_000) {
            Err(Error::CertificateViolation { bound, s, .. }) => {
                assert_eq!(bound, "upper");
                assert!(s > 0.0 && s < 0.5);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn certify_three_halves_family() {
        // 2 s^1.5 (1-s) >= s^1.5 holds exactly on [0, 1/2]
        let f = ReactionFn::custom("2s^1.5(1-s)", 1.5, |s| 2.0 * s.powf(1.5) * (1.0 - s));
        f.certify((1.0, 1.5, 0.5), (2.0, 1.5), 100_000).unwrap();
        match f.certify((1.0, 1.5, 0.9), (2.0, 1.5), 100_000) {
            Err(Error::CertificateViolation { bound, s, .. }) => {
                assert_eq!(bound, "lower");
                assert!(s > 0.5);
            }
            other => panic!("expected lower violation past s = 1/2, got {other:?}"),
        }
    }

    #[test]
    fn certify_rejects_non_monostable() {
        let f = ReactionFn::custom("bistable", 1.0, |s| s * (1.0 - s) * (s - 0.3));
        assert!(matches!(
            f.certify((0.0, 1.0, 0.1), (1.0, 1.0), 10_000),
            Err(Error::CertificateViolation { .. })
        ));
        assert!(f.certify((0.0, 1.0, 0.1), (1.0, 1.0), 10).is_err());
    }

    #[test]
    fn certified_rates_of_default_family() {
        let mut p = ModelParams::new(2.0, 2.0, 1.25);
        p.s0 = 0.1;
        let (lo, hi) = Model::new(p).certified_rates();
        assert!((lo - 0.9).abs() < 1e-6, "{lo}");
        assert!((hi - 1.0).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn initial_data_tail_and_plateau() {
        let u0 = InitialData::algebraic(1.0, 2.0, 2.0, 0.25).unwrap();
        assert!((u0.eval(4.0) - 0.0625).abs() < 1e-15);
        assert!((u0.eval(-10.0) - 0.25).abs() < 1e-15);
        let u0 = InitialData::algebraic(3.0, 0.5, 9.0, 1.0).unwrap();
        assert!((u0.eval(100.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn initial_data_rejects_bad_input() {
        assert!(InitialData::algebraic(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(InitialData::algebraic(1.0, 2.0, 2.0, 0.0).is_err());
        assert!(InitialData::algebraic(10.0, 1.0, 2.0, 1.0).is_err());
        assert!(InitialData::algebraic(-1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn initial_data_join_is_c1_when_unlimited() {
        let u0 = InitialData::algebraic(1.0, 2.0, 2.0, 1.0).unwrap();
        let h = 1e-6;
        let left = (u0.eval(2.0) - u0.eval(2.0 - h)) / h;
        let right = (u0.eval(2.0 + h) - u0.eval(2.0)) / h;
        assert!((left - right).abs() < 1e-4, "{left} vs {right}");
        let left = (u0.eval(1.0) - u0.eval(1.0 - h)) / h;
        let right = (u0.eval(1.0 + h) - u0.eval(1.0)) / h;
        assert!(left.abs() < 1e-4 && right.abs() < 1e-4);
    }

    #[test]
    fn light_tail_is_front_like() {
        let u0 = InitialData::light_tail(1.0, 0.0, 4.0).unwrap();
        assert!((u0.eval(-50.0) - 1.0).abs() < 1e-12);
        assert!(u0.eval(200.0) < 1e-300);
        assert!((u0.eval(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_grid_nodes() {
        let g = grid_build(GridKind::Uniform, 0.0, 1.0, 4, None).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(grid_build(GridKind::Uniform, 1.0, 0.0, 4, None).is_err());
    }

    #[test]
    fn geometric_grid_spacing_ratio() {
        let g = grid_build(GridKind::Geometric, 0.0, 1000.0, 200, Some(1.03)).unwrap();
        let h = g.spacings();
        let ratio = h[199] / h[0];
        assert!((ratio / 1.03f64.powi(199) - 1.0).abs() < 1e-9);
        assert_eq!(g.len(), 201);
        assert!(grid_build(GridKind::Geometric, 0.0, 1.0, 200, Some(1.2)).is_err());
    }

    #[test]
    fn geometric_grid_resolution_flag() {
        // finest cell = L (q-1)/(q^N-1) computed by hand
        let g = Grid::geometric(0.0, 1000.0, 200, 1.03).unwrap();
        let finest = 1000.0 * 0.03 / (1.03f64.powi(200) - 1.0);
        assert!((g.finest_cell() - finest).abs() < 1e-9);
        assert!(finest < 0.1);
        assert!(g.resolves(1.0));
        let coarse = Grid::uniform(0.0, 1000.0, 200).unwrap();
        assert!(!coarse.resolves(1.0));
    }

    #[test]
    fn geometric_with_finest_hits_target() {
        let g = Grid::geometric_with_finest(0.0, 1.0e4, 2000, 0.05).unwrap();
        assert!((g.finest_cell() - 0.05).abs() < 1e-6);
        assert!(g.ratio() <= MAX_GEOMETRIC_RATIO);
        assert!((g.x_right() - 1.0e4).abs() < 1e-9);
    }

    #[test]
    fn field_clamps_and_rejects() {
        let f = Field::new(0.0, vec![-1e-13, 0.5, 1.0 + 1e-13]).unwrap();
        assert_eq!(f.values(), &[0.0, 0.5, 1.0]);
        assert!(Field::new(0.0, vec![1.1]).is_err());
        assert!(Field::new(0.0, vec![-1e-6]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2.0, 2.0, 1.25).validate().is_ok());
        assert!(ModelParams::new(0.0, 2.0, 1.25).validate().is_err());
        assert!(ModelParams::new(2.0, 2.0, 0.5).validate().is_err());
        let mut p = ModelParams::new(2.0, f64::INFINITY, 1.0);
        assert!(p.validate().is_ok());
        p.x0 = 1.0;
        assert!(p.validate().is_err());
    }
}
