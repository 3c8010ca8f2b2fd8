//! Worker ability distributions, their fractional moments, mean-preserving
//! spreads and stochastic-dominance checks.
//!
//! Worker mass is normalised to one, so every integral over the workforce
//! is an expectation under a probability law.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Float-equality tolerance for dominance comparisons and weight sums.
pub const DOMINANCE_TOL: f64 = 1e-12;

/// Log-convexity checks on cached moments allow this relative slack.
const LOG_CONVEXITY_TOL: f64 = 1e-10;

/// `b^power` is lognormal with location `mu` and variance `sigma2` of the
/// underlying normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "LognormalRaw")]
pub struct Lognormal {
    pub mu: f64,
    pub sigma2: f64,
    pub power: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LognormalRaw {
    mu: f64,
    sigma2: f64,
    #[serde(default = "unit_power")]
    power: f64,
}

fn unit_power() -> f64 {
    1.0
}

impl TryFrom<LognormalRaw> for Lognormal {
    type Error = ModelError;

    fn try_from(raw: LognormalRaw) -> Result<Self> {
        Lognormal::with_power(raw.mu, raw.sigma2, raw.power)
    }
}

impl Lognormal {
    /// `b` itself lognormal.
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        Self::with_power(mu, sigma2, 1.0)
    }

    /// `b^power` lognormal.
    pub fn with_power(mu: f64, sigma2: f64, power: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(ModelError::invalid("mu", "must be finite"));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(ModelError::invalid("sigma2", "must be finite and >= 0"));
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(ModelError::invalid("power", "must be finite and > 0"));
        }
        Ok(Self { mu, sigma2, power })
    }

    /// `E[b^p] = exp((p/q) mu + sigma2 (p/q)^2 / 2)` where `q` is the power
    /// whose transform is lognormal.
    pub fn fractional_moment(&self, p: f64) -> f64 {
        let n = p / self.power;
        (n * self.mu + 0.5 * self.sigma2 * n * n).exp()
    }

    /// Mean of the lognormal transform `b^power`.
    pub fn transform_mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma2).exp()
    }

    /// Variance of the lognormal transform `b^power`.
    pub fn transform_variance(&self) -> f64 {
        (self.sigma2.exp() - 1.0) * (2.0 * self.mu + self.sigma2).exp()
    }

    /// Raises `sigma2` by `gamma` and lowers `mu` by `gamma / 2`, which keeps
    /// the mean of `b^power` fixed.
    pub fn mean_preserving_spread(&self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(ModelError::invalid("gamma", "must be finite and >= 0"));
        }
        Self::with_power(self.mu - 0.5 * gamma, self.sigma2 + gamma, self.power)
    }
}

/// Finite-support probability law with strictly increasing positive support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "EmpiricalRaw")]
pub struct Empirical {
    support: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmpiricalRaw {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<EmpiricalRaw> for Empirical {
    type Error = ModelError;

    fn try_from(raw: EmpiricalRaw) -> Result<Self> {
        Empirical::new(raw.support, raw.weights)
    }
}

impl Empirical {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(ModelError::invalid("support", "must not be empty"));
        }
        if support.len() != weights.len() {
            return Err(ModelError::invalid(
                "weights",
                format!(
                    "length {} does not match support length {}",
                    weights.len(),
                    support.len()
                ),
            ));
        }
        if let Some(i) = support.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(ModelError::invalid(
                format!("support[{i}]"),
                "support points must be finite and > 0",
            ));
        }
        if let Some(i) = support.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ModelError::invalid(
                format!("support[{}]", i + 1),
                "support must be strictly increasing",
            ));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ModelError::invalid(
                format!("weights[{i}]"),
                "weights must be finite and > 0",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DOMINANCE_TOL {
            return Err(ModelError::invalid(
                "weights",
                format!("must sum to 1 within 1e-12 (sum = {total})"),
            ));
        }
        Ok(Self { support, weights })
    }

    /// Equal-weight law over `samples`; repeated values are merged.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(ModelError::invalid("support", "must not be empty"));
        }
        let mut sorted = samples.to_vec();
        if sorted.iter().any(|x| x.is_nan()) {
            return Err(ModelError::invalid("support", "NaN sample"));
        }
        sorted.sort_by(f64::total_cmp);
        let unit = 1.0 / samples.len() as f64;
        let mut support: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for x in sorted {
            match support.last() {
                Some(&last) if last == x => *counts.last_mut().unwrap() += 1,
                _ => {
                    support.push(x);
                    counts.push(1);
                }
            }
        }
        let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64 * unit).collect();
        // absorb rounding so the sum check is exact to the last ulp
        let drift = 1.0 - weights.iter().sum::<f64>();
        *weights.last_mut().unwrap() += drift;
        Self::new(support, weights)
    }

    /// Degenerate law at `b`.
    pub fn point_mass(b: f64) -> Result<Self> {
        Self::new(vec![b], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fractional_moment(&self, p: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| w * b.powf(p))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.fractional_moment(1.0)
    }

    /// Every support point moved up by `shift`; a first-order dominant law
    /// for `shift >= 0`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let support = self.support.iter().map(|b| b + shift).collect();
        Self::new(support, self.weights.clone())
    }

    /// `P(b <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .take_while(|(b, _)| **b <= t)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Probability law of worker ability `b > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TalentDistribution {
    Lognormal(Lognormal),
    Empirical(Empirical),
}

impl TalentDistribution {
    pub fn point_mass(b: f64) -> Result<Self> {
        Ok(TalentDistribution::Empirical(Empirical::point_mass(b)?))
    }

    /// `E[b^p]`.
    pub fn fractional_moment(&self, p: f64) -> f64 {
        match self {
            TalentDistribution::Lognormal(d) => d.fractional_moment(p),
            TalentDistribution::Empirical(d) => d.fractional_moment(p),
        }
    }

    pub fn mean(&self) -> f64 {
        self.fractional_moment(1.0)
    }

    /// Lognormal mean-preserving spread of the transform `b^power`.
    pub fn mean_preserving_spread(&self, gamma: f64) -> Result<Self> {
        match self {
            TalentDistribution::Lognormal(d) => Ok(TalentDistribution::Lognormal(
                d.mean_preserving_spread(gamma)?,
            )),
            TalentDistribution::Empirical(_) => Err(ModelError::Unsupported(
                "mean-preserving spread is only defined for lognormal distributions".into(),
            )),
        }
    }

    pub fn as_lognormal(&self) -> Option<&Lognormal> {
        match self {
            TalentDistribution::Lognormal(d) => Some(d),
            TalentDistribution::Empirical(_) => None,
        }
    }

    pub fn as_empirical(&self) -> Option<&Empirical> {
        match self {
            TalentDistribution::Empirical(d) => Some(d),
            TalentDistribution::Lognormal(_) => None,
        }
    }
}

impl From<Lognormal> for TalentDistribution {
    fn from(d: Lognormal) -> Self {
        TalentDistribution::Lognormal(d)
    }
}

impl From<Empirical> for TalentDistribution {
    fn from(d: Empirical) -> Self {
        TalentDistribution::Empirical(d)
    }
}

/// The five fractional moments `E[b^p]`, `p in {1/3, 2/3, 1, 4/3, 2}`, that
/// every closed form of the model is written in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBundle {
    pub m13: f64,
    pub m23: f64,
    pub m1: f64,
    pub m43: f64,
    pub m2: f64,
}

impl MomentBundle {
    pub const EXPONENTS: [f64; 5] = [1.0 / 3.0, 2.0 / 3.0, 1.0, 4.0 / 3.0, 2.0];

    /// Validates positivity, finiteness and log-convexity in the exponent.
    pub fn new(m13: f64, m23: f64, m1: f64, m43: f64, m2: f64) -> Result<Self> {
        let named = [
            ("m13", m13),
            ("m23", m23),
            ("m1", m1),
            ("m43", m43),
            ("m2", m2),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::invalid(
                    name,
                    format!("moment must be finite and > 0 (got {v})"),
                ));
            }
        }
        if m23 * m23 > m13 * m1 * (1.0 + LOG_CONVEXITY_TOL) {
            return Err(ModelError::invalid("moments", "m23^2 <= m13*m1 violated"));
        }
        if m1 * m1 > m23 * m43 * (1.0 + LOG_CONVEXITY_TOL) {
            return Err(ModelError::invalid("moments", "m1^2 <= m23*m43 violated"));
        }
        Ok(Self {
            m13,
            m23,
            m1,
            m43,
            m2,
        })
    }

    pub fn from_distribution(dist: &TalentDistribution) -> Result<Self> {
        let [m13, m23, m1, m43, m2] = Self::EXPONENTS.map(|p| dist.fractional_moment(p));
        Self::new(m13, m23, m1, m43, m2)
    }

    /// All moments of a point mass at one.
    pub fn unit() -> Self {
        Self {
            m13: 1.0,
            m23: 1.0,
            m1: 1.0,
            m43: 1.0,
            m2: 1.0,
        }
    }

    /// `m1 - m43 / m13`.
    ///
    /// Never positive: `b^(1/3)` and `b` are comonotone, so
    /// `E[b^(4/3)] >= E[b^(1/3)] E[b]`, with equality only for a point mass.
    pub fn condition_a3_margin(&self) -> f64 {
        self.m1 - self.m43 / self.m13
    }

    /// Weak form of condition A3: rejects a margin below `-1e-12` (relative
    /// to `m1`), which admits exactly the degenerate laws.
    pub fn check_condition_a3(&self) -> Result<()> {
        let margin = self.condition_a3_margin();
        if margin < -DOMINANCE_TOL * self.m1.max(1.0) {
            Err(ModelError::ConditionA3 { margin })
        } else {
            Ok(())
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.m13, self.m23, self.m1, self.m43, self.m2]
    }
}

/// Outcome of a pairwise stochastic-dominance check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    YDominates,
    XDominates,
    Incomparable,
    Equal,
}

impl Dominance {
    fn from_flags(y_weakly_below: bool, x_weakly_below: bool) -> Self {
        match (y_weakly_below, x_weakly_below) {
            (true, true) => Dominance::Equal,
            (true, false) => Dominance::YDominates,
            (false, true) => Dominance::XDominates,
            (false, false) => Dominance::Incomparable,
        }
    }
}

fn merged_support(x: &Empirical, y: &Empirical) -> Vec<f64> {
    let mut pts: Vec<f64> = x.support.iter().chain(&y.support).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Step CDF evaluated at each (sorted) point.
fn cdf_on(dist: &Empirical, points: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    let mut j = 0;
    for &t in points {
        while j < dist.support.len() && dist.support[j] <= t {
            acc += dist.weights[j];
            j += 1;
        }
        out.push(acc);
    }
    out
}

/// `int_{-inf}^t F(s) ds` at each merged point. Exact: `F` is constant
/// between consecutive points.
fn integrated_cdf_on(cdf: &[f64], points: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    for k in 0..points.len() {
        if k > 0 {
            acc += cdf[k - 1] * (points[k] - points[k - 1]);
        }
        out.push(acc);
    }
    out
}

fn compare_pointwise(fy: &[f64], fx: &[f64], tol: f64) -> Dominance {
    let y_below = fy.iter().zip(fx).all(|(a, b)| a - b <= tol);
    let x_below = fy.iter().zip(fx).all(|(a, b)| b - a <= tol);
    Dominance::from_flags(y_below, x_below)
}

/// First-order dominance: `Y` dominates when `F_Y <= F_X` everywhere.
pub fn fosd_check(x: &Empirical, y: &Empirical) -> Dominance {
    let pts = merged_support(x, y);
    compare_pointwise(&cdf_on(y, &pts), &cdf_on(x, &pts), DOMINANCE_TOL)
}

/// Second-order dominance: `Y` dominates when `int F_Y <= int F_X` for
/// every upper limit. Beyond the last support point both integrals grow
/// with slope one, so the merged support points are sufficient.
pub fn sosd_check(x: &Empirical, y: &Empirical) -> Dominance {
    let pts = merged_support(x, y);
    let scale = 1.0 + pts.last().copied().unwrap_or(0.0).abs();
    let iy = integrated_cdf_on(&cdf_on(y, &pts), &pts);
    let ix = integrated_cdf_on(&cdf_on(x, &pts), &pts);
    compare_pointwise(&iy, &ix, DOMINANCE_TOL * scale)
}
