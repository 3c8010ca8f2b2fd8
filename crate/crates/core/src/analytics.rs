//! Steady-state utility and profit, comparative statics and the
//! worker-owned benchmark.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::exec::Execution;
use crate::firm::{
    reduced_objective_with, steady_state, steady_state_with, FirmParams, Shares, SteadyState,
};
use crate::worker::WorkerParams;

/// Who owns the firm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OwnershipMode {
    /// Workers keep `alpha`, owners keep `1 - alpha`.
    InvestorOwned,
    /// Workers keep all output and the firm's objective counts all of it:
    /// both shares are set to one independently.
    WorkerOwned,
}

impl OwnershipMode {
    fn shares(self, fp: &FirmParams) -> Shares {
        match self {
            OwnershipMode::InvestorOwned => fp.investor_shares(),
            OwnershipMode::WorkerOwned => Shares::WORKER_OWNED,
        }
    }
}

impl fmt::Display for OwnershipMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OwnershipMode::InvestorOwned => "investor_owned",
            OwnershipMode::WorkerOwned => "worker_owned",
        })
    }
}

/// Steady-state per-period utility of a worker with ability `b`:
///
/// `b^(4/3) 3(a+b)^2/(8 A_k) m13^2 r* + lambda (a+b) b m* + b^2 a^2 / (2 A_e)`.
pub fn steady_state_utility(b: f64, fp: &FirmParams) -> f64 {
    utility_with(b, fp, fp.investor_shares())
}

fn utility_with(b: f64, fp: &FirmParams, shares: Shares) -> f64 {
    let ss = steady_state_with(fp, shares);
    let w = &fp.worker;
    let mb = fp.moments();
    let g = shares.worker + w.beta;
    b.powf(4.0 / 3.0) * 3.0 * g * g / (8.0 * w.a_k) * mb.m13 * mb.m13 * ss.r_star
        + fp.lambda * g * b * ss.m_star
        + b * b * shares.worker * shares.worker / (2.0 * w.a_e)
}

/// Discounted firm value when the economy sits at its steady state:
/// the per-period payoff at `(m*, m*)` divided by `1 - delta`.
pub fn steady_state_profit(fp: &FirmParams) -> f64 {
    surplus_with(fp, fp.investor_shares())
}

fn surplus_with(fp: &FirmParams, shares: Shares) -> f64 {
    let m = steady_state_with(fp, shares).m_star;
    let per_period = reduced_objective_with(m, m, fp, shares).expect("steady state is feasible");
    per_period / (1.0 - fp.delta)
}

/// Coefficients of the three moment products in the meaning part of the
/// steady-state profit:
///
/// `Pi* = (1-a) a m2 / ((1-d) A_e)
///      + (1-a)^2 (a+b)^2 / ((1-d) 4 C A_k^2)
///        * (q m13^4 m43^2 + x m13^5 m1 m43 + p m13^6 m1^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketCoefficients {
    pub quartic: f64,
    pub cross: f64,
    pub persistence: f64,
}

impl BracketCoefficients {
    /// The coefficients implied by evaluating the payoff at the steady state:
    /// `1/2`, `l/(1-l)` and `d l^2 (2 - d - d l) / (2 (1-d l)^2 (1-l))`.
    pub fn consistent(delta: f64, lambda: f64) -> Self {
        let dl = delta * lambda;
        Self {
            quartic: 0.5,
            cross: lambda / (1.0 - lambda),
            persistence: delta * lambda * lambda * (2.0 - delta - dl)
                / (2.0 * (1.0 - dl) * (1.0 - dl) * (1.0 - lambda)),
        }
    }

    /// A circulating variant whose cross coefficient is
    /// `l (1 + 2d - 3 d l) / ((1-l)(1-d l))`. It exceeds the consistent one
    /// by `2 d l / (1 - d l)`, so it overstates profit whenever
    /// `delta lambda > 0` (0.80556 instead of 13/18 at the reference point).
    pub fn with_inflated_cross_term(delta: f64, lambda: f64) -> Self {
        let dl = delta * lambda;
        Self {
            cross: lambda * (1.0 + 2.0 * delta - 3.0 * dl) / ((1.0 - lambda) * (1.0 - dl)),
            ..Self::consistent(delta, lambda)
        }
    }

    /// A circulating variant whose persistence coefficient is
    /// `d l^2 (4 - 3 d l - d) / (4 (1-d l)^2 (1-l))`.
    pub fn with_inflated_persistence_term(delta: f64, lambda: f64) -> Self {
        let dl = delta * lambda;
        Self {
            persistence: delta * lambda * lambda * (4.0 - 3.0 * dl - delta)
                / (4.0 * (1.0 - dl) * (1.0 - dl) * (1.0 - lambda)),
            ..Self::consistent(delta, lambda)
        }
    }
}

/// Steady-state profit from the moment-product closed form with the given
/// bracket coefficients.
pub fn profit_closed_form(fp: &FirmParams, coeffs: BracketCoefficients) -> f64 {
    let w = &fp.worker;
    let mb = fp.moments();
    let (a, d) = (w.alpha, fp.delta);
    let effort = (1.0 - a) / (1.0 - d) * a / w.a_e * mb.m2;
    let pre = (1.0 - a) * (1.0 - a) * (a + w.beta) * (a + w.beta)
        / ((1.0 - d) * 4.0 * fp.c * w.a_k * w.a_k);
    let bracket = coeffs.quartic * mb.m13.powi(4) * mb.m43 * mb.m43
        + coeffs.cross * mb.m13.powi(5) * mb.m1 * mb.m43
        + coeffs.persistence * mb.m13.powi(6) * mb.m1 * mb.m1;
    effort + pre * bracket
}

/// Mean socialization effort `int b^(2/3) k = m23 k`.
pub fn average_socialization(ss: &SteadyState, fp: &FirmParams) -> f64 {
    fp.moments().m23 * ss.k_star
}

/// Scalar model parameters that comparative statics can move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Alpha,
    Beta,
    Delta,
    Lambda,
    C,
    AE,
    AK,
}

impl Parameter {
    pub const ALL: [Parameter; 7] = [
        Parameter::Alpha,
        Parameter::Beta,
        Parameter::Delta,
        Parameter::Lambda,
        Parameter::C,
        Parameter::AE,
        Parameter::AK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Alpha => "alpha",
            Parameter::Beta => "beta",
            Parameter::Delta => "delta",
            Parameter::Lambda => "lambda",
            Parameter::C => "c",
            Parameter::AE => "a_e",
            Parameter::AK => "a_k",
        }
    }

    pub fn get(self, fp: &FirmParams) -> f64 {
        match self {
            Parameter::Alpha => fp.worker.alpha,
            Parameter::Beta => fp.worker.beta,
            Parameter::Delta => fp.delta,
            Parameter::Lambda => fp.lambda,
            Parameter::C => fp.c,
            Parameter::AE => fp.worker.a_e,
            Parameter::AK => fp.worker.a_k,
        }
    }

    /// Copy of `fp` with this parameter set to `value`, revalidated.
    pub fn set(self, fp: &FirmParams, value: f64) -> Result<FirmParams> {
        let mut w: WorkerParams = fp.worker;
        let (mut delta, mut lambda, mut c) = (fp.delta, fp.lambda, fp.c);
        match self {
            Parameter::Alpha => w.alpha = value,
            Parameter::Beta => w.beta = value,
            Parameter::Delta => delta = value,
            Parameter::Lambda => lambda = value,
            Parameter::C => c = value,
            Parameter::AE => w.a_e = value,
            Parameter::AK => w.a_k = value,
        }
        FirmParams::new(w, delta, lambda, c, fp.dist.clone())
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                ModelError::invalid(
                    "parameter",
                    format!("unknown parameter {s:?}; expected one of alpha, beta, delta, lambda, c, a_e, a_k"),
                )
            })
    }
}

/// Steady-state outcome reported by comparative statics and experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MStar,
    RStar,
    KStar,
    Utility,
    Profit,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::MStar,
        Outcome::RStar,
        Outcome::KStar,
        Outcome::Utility,
        Outcome::Profit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::MStar => "m_star",
            Outcome::RStar => "r_star",
            Outcome::KStar => "k_star",
            Outcome::Utility => "utility",
            Outcome::Profit => "profit",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All five steady-state outcomes, with utility taken at a fixed ability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcomes {
    pub m_star: f64,
    pub r_star: f64,
    pub k_star: f64,
    pub utility: f64,
    pub profit: f64,
}

impl Outcomes {
    pub fn evaluate(fp: &FirmParams, reference_ability: f64) -> Self {
        let ss = steady_state(fp);
        Self {
            m_star: ss.m_star,
            r_star: ss.r_star,
            k_star: ss.k_star,
            utility: steady_state_utility(reference_ability, fp),
            profit: steady_state_profit(fp),
        }
    }

    pub fn get(&self, o: Outcome) -> f64 {
        match o {
            Outcome::MStar => self.m_star,
            Outcome::RStar => self.r_star,
            Outcome::KStar => self.k_star,
            Outcome::Utility => self.utility,
            Outcome::Profit => self.profit,
        }
    }
}

/// Sign of a derivative or difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    /// Classifies `x`; anything within `zero_tol` of zero counts as zero.
    pub fn classify(x: f64, zero_tol: f64) -> Self {
        if x > zero_tol {
            Sign::Positive
        } else if x < -zero_tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn of_threshold(q: f64) -> Self {
        Sign::classify(q, 1e-14)
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Zero => "zero",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default relative step of the central differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Derivatives below this (relative to the outcome's size) count as zero.
pub const FD_ZERO_TOL: f64 = 1e-8;

/// Sign the model's threshold conditions predict for `d outcome / d param`,
/// or `None` where they say nothing.
pub fn predicted_sign(param: Parameter, outcome: Outcome, fp: &FirmParams) -> Option<Sign> {
    use Outcome::*;
    use Parameter::*;
    let (a, b) = (fp.worker.alpha, fp.worker.beta);
    match param {
        Beta | Delta | Lambda => Some(Sign::Positive),
        C | AK => Some(Sign::Negative),
        AE => match outcome {
            MStar | RStar | KStar => Some(Sign::Zero),
            Utility | Profit => Some(Sign::Negative),
        },
        Alpha => match outcome {
            MStar => Some(Sign::of_threshold(2.0 - 3.0 * a - b)),
            RStar => Some(Sign::of_threshold(1.0 - 2.0 * a - b)),
            KStar => Some(Sign::of_threshold(3.0 - 4.0 * a - b)),
            // sufficient conditions only
            Utility => (a < (1.0 - b) / 2.0).then_some(Sign::Positive),
            Profit => {
                if 1.0 - 2.0 * a - b > 0.0 {
                    Some(Sign::Positive)
                } else if 1.0 - 2.0 * a < 0.0 {
                    Some(Sign::Negative)
                } else {
                    None
                }
            }
        },
    }
}

/// One outcome's line in a [`ComparativeReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparativeRow {
    pub outcome: Outcome,
    pub value: f64,
    pub derivative: f64,
    pub numeric_sign: Sign,
    pub predicted_sign: Option<Sign>,
    pub agrees: bool,
}

/// Central finite-difference sensitivities of all outcomes to one
/// parameter, with the predicted signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparativeReport {
    pub parameter: Parameter,
    pub base_value: f64,
    pub step: f64,
    pub reference_ability: f64,
    pub rows: Vec<ComparativeRow>,
    /// True when every row with a prediction agrees with it.
    pub agreement: bool,
}

impl ComparativeReport {
    pub fn row(&self, o: Outcome) -> &ComparativeRow {
        self.rows
            .iter()
            .find(|r| r.outcome == o)
            .expect("all outcomes present")
    }
}

/// Comparative statics with utility at the distribution's mean ability.
pub fn comparative_statics(
    fp: &FirmParams,
    param: Parameter,
    rel_step: f64,
) -> Result<ComparativeReport> {
    comparative_statics_at(fp, param, rel_step, fp.moments().m1)
}

pub fn comparative_statics_at(
    fp: &FirmParams,
    param: Parameter,
    rel_step: f64,
    reference_ability: f64,
) -> Result<ComparativeReport> {
    if !(rel_step.is_finite() && rel_step > 0.0) {
        return Err(ModelError::Domain(format!(
            "step must be > 0 (got {rel_step})"
        )));
    }
    let base = param.get(fp);
    let h = if base == 0.0 {
        rel_step
    } else {
        rel_step * base.abs()
    };
    let shifted = |v: f64| {
        param
            .set(fp, v)
            .map_err(|e| ModelError::Domain(format!("{param} = {v} leaves the valid domain: {e}")))
    };
    let up = Outcomes::evaluate(&shifted(base + h)?, reference_ability);
    let down = Outcomes::evaluate(&shifted(base - h)?, reference_ability);
    let at = Outcomes::evaluate(fp, reference_ability);

    let rows: Vec<ComparativeRow> = Outcome::ALL
        .iter()
        .map(|&o| {
            let derivative = (up.get(o) - down.get(o)) / (2.0 * h);
            let scale = at.get(o).abs().max(1.0) / base.abs().max(1.0);
            let numeric_sign = Sign::classify(derivative, FD_ZERO_TOL * scale);
            let predicted_sign = predicted_sign(param, o, fp);
            let agrees = predicted_sign.is_none_or(|s| s == numeric_sign);
            ComparativeRow {
                outcome: o,
                value: at.get(o),
                derivative,
                numeric_sign,
                predicted_sign,
                agrees,
            }
        })
        .collect();
    let agreement = rows.iter().all(|r| r.agrees);
    Ok(ComparativeReport {
        parameter: param,
        base_value: base,
        step: h,
        reference_ability,
        rows,
        agreement,
    })
}

/// Reports for several parameters, evaluated with the given strategy and
/// returned in input order.
pub fn comparative_sweep(
    fp: &FirmParams,
    params: &[Parameter],
    rel_step: f64,
    reference_ability: f64,
    exec: Execution,
) -> Result<Vec<ComparativeReport>> {
    exec.map_slice(params, |&p| {
        comparative_statics_at(fp, p, rel_step, reference_ability)
    })
    .into_iter()
    .collect()
}

/// Steady state and welfare of one ownership form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwnershipOutcome {
    pub mode: OwnershipMode,
    pub steady_state: SteadyState,
    /// Steady-state utility at the reference ability.
    pub utility: f64,
    /// Discounted steady-state value of the firm's objective.
    pub surplus: f64,
}

pub fn ownership_outcome(
    fp: &FirmParams,
    mode: OwnershipMode,
    reference_ability: f64,
) -> OwnershipOutcome {
    let shares = mode.shares(fp);
    OwnershipOutcome {
        mode,
        steady_state: steady_state_with(fp, shares),
        utility: utility_with(reference_ability, fp, shares),
        surplus: surplus_with(fp, shares),
    }
}

/// Worker-owned steady state, evaluated at the mean ability.
pub fn worker_owned_steady_state(fp: &FirmParams) -> OwnershipOutcome {
    ownership_outcome(fp, OwnershipMode::WorkerOwned, fp.moments().m1)
}

/// Investor-owned and worker-owned outcomes side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwnershipComparison {
    pub investor: OwnershipOutcome,
    pub worker_owned: OwnershipOutcome,
}

impl OwnershipComparison {
    /// `m_wo >= m*`, `r_wo >= r*` and `k_wo >= k*`.
    pub fn worker_owned_dominates(&self) -> bool {
        let (i, w) = (self.investor.steady_state, self.worker_owned.steady_state);
        w.m_star >= i.m_star && w.r_star >= i.r_star && w.k_star >= i.k_star
    }
}

pub fn compare_ownership(fp: &FirmParams, reference_ability: f64) -> OwnershipComparison {
    OwnershipComparison {
        investor: ownership_outcome(fp, OwnershipMode::InvestorOwned, reference_ability),
        worker_owned: ownership_outcome(fp, OwnershipMode::WorkerOwned, reference_ability),
    }
}
