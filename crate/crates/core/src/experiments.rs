//! Effects of dispersion and level shifts in the ability distribution on
//! the steady state.
//!
//! Spreads are parameterised by `gamma`, a mean-preserving increase in the
//! log-variance of the lognormal transform `b^power`. A positive `gamma`
//! is the reverse of a second-order dominance improvement, so its predicted
//! effects are the negatives of the ones stated for dispersion decreases.

use serde::{Deserialize, Serialize};

use crate::analytics::{Outcome, Outcomes, Sign};
use crate::distribution::{Empirical, Lognormal, TalentDistribution};
use crate::error::{ModelError, Result};
use crate::exec::Execution;
use crate::firm::FirmParams;

/// Deltas within this (relative to the outcome) count as zero.
pub const DELTA_ZERO_TOL: f64 = 1e-12;

/// One outcome before and after a distribution change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDelta {
    pub outcome: Outcome,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
    pub sign: Sign,
    pub predicted_sign: Option<Sign>,
    pub agrees: bool,
}

fn compare(
    before: &Outcomes,
    after: &Outcomes,
    predict: impl Fn(Outcome) -> Option<Sign>,
) -> Vec<OutcomeDelta> {
    Outcome::ALL
        .iter()
        .map(|&o| {
            let (b, a) = (before.get(o), after.get(o));
            let delta = a - b;
            let sign = Sign::classify(delta, DELTA_ZERO_TOL * b.abs().max(1.0));
            let predicted_sign = predict(o);
            let agrees = predicted_sign.is_none_or(|p| p == sign);
            OutcomeDelta {
                outcome: o,
                before: b,
                after: a,
                delta,
                sign,
                predicted_sign,
                agrees,
            }
        })
        .collect()
}

/// Mean-preserving spread of a lognormal baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadExperiment {
    pub baseline: Lognormal,
    pub spread: Lognormal,
    pub gamma: f64,
    /// Ability at which utility is compared, the baseline mean.
    pub reference_ability: f64,
    pub before: Outcomes,
    pub after: Outcomes,
    pub deltas: Vec<OutcomeDelta>,
    pub agreement: bool,
}

impl SpreadExperiment {
    pub fn delta(&self, o: Outcome) -> &OutcomeDelta {
        self.deltas
            .iter()
            .find(|d| d.outcome == o)
            .expect("all outcomes present")
    }
}

/// The three baselines the predictions cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Baseline {
    CubeRoot,
    Level,
    Square,
}

fn classify_power(power: f64) -> Option<Baseline> {
    const TOL: f64 = 1e-12;
    if (power - 1.0 / 3.0).abs() < TOL {
        Some(Baseline::CubeRoot)
    } else if (power - 1.0).abs() < TOL {
        Some(Baseline::Level)
    } else if (power - 2.0).abs() < TOL {
        Some(Baseline::Square)
    } else {
        None
    }
}

/// Predicted sign of each outcome's response to a positive spread.
///
/// Spreading `b^(1/3)` raises every moment of order above 1/3 and keeps
/// `m13`, so everything rises. Spreading `b^2` lowers every moment below
/// order 2, so everything falls. Spreading `b` itself lowers the low-order
/// moments the meaning channel runs on; profit also carries the rising
/// `m2` from effort and is left open. With `delta lambda = 0` the purpose
/// flow depends on `m1^2` alone and does not move.
fn spread_prediction(base: Baseline, outcome: Outcome, fp: &FirmParams) -> Option<Sign> {
    match base {
        Baseline::CubeRoot => Some(Sign::Positive),
        Baseline::Square => Some(Sign::Negative),
        Baseline::Level => match outcome {
            Outcome::Profit => None,
            Outcome::RStar if fp.delta * fp.lambda == 0.0 => Some(Sign::Zero),
            _ => Some(Sign::Negative),
        },
    }
}

/// Steady states before and after a mean-preserving spread of size
/// `gamma >= 0`. `gamma = 0` gives exactly zero deltas.
pub fn run_spread_experiment(fp: &FirmParams, gamma: f64) -> Result<SpreadExperiment> {
    let baseline = *fp.dist.as_lognormal().ok_or_else(|| {
        ModelError::Unsupported("spread experiments need a lognormal ability distribution".into())
    })?;
    let base = classify_power(baseline.power).ok_or_else(|| {
        ModelError::Unsupported(format!(
            "spread experiments cover powers 1/3, 1 and 2 (got {})",
            baseline.power
        ))
    })?;
    let spread = baseline.mean_preserving_spread(gamma)?;
    let after_fp = fp.with_distribution(spread.into())?;
    let reference_ability = fp.moments().m1;
    let before = Outcomes::evaluate(fp, reference_ability);
    let after = Outcomes::evaluate(&after_fp, reference_ability);
    let deltas = compare(&before, &after, |o| {
        if gamma == 0.0 {
            Some(Sign::Zero)
        } else {
            spread_prediction(base, o, fp)
        }
    });
    let agreement = deltas.iter().all(|d| d.agrees);
    Ok(SpreadExperiment {
        baseline,
        spread,
        gamma,
        reference_ability,
        before,
        after,
        deltas,
        agreement,
    })
}

/// Spread experiments for several `gamma`, in input order.
pub fn spread_sweep(
    fp: &FirmParams,
    gammas: &[f64],
    exec: Execution,
) -> Result<Vec<SpreadExperiment>> {
    exec.map_slice(gammas, |&g| run_spread_experiment(fp, g))
        .into_iter()
        .collect()
}

/// A cost-parameter pair and the profit response to the spread there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitWitness {
    pub a_e: f64,
    pub a_k: f64,
    pub delta_profit: f64,
}

/// Result of searching for cost parameters where a spread of `b` raises
/// profit and others where it lowers it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySearch {
    pub gamma: f64,
    pub points_searched: usize,
    /// Positive response with the smallest `a_e / a_k`.
    pub positive: Option<ProfitWitness>,
    /// Negative response with the largest `a_e / a_k`.
    pub negative: Option<ProfitWitness>,
    /// Why a witness is missing, if one is.
    pub diagnostic: Option<String>,
}

impl AmbiguitySearch {
    pub fn is_ambiguous(&self) -> bool {
        self.positive.is_some() && self.negative.is_some()
    }
}

/// Default search box for each cost parameter.
pub const AMBIGUITY_RANGE: (f64, f64) = (1e-2, 1e2);

/// Grid points per axis of the default search.
pub const AMBIGUITY_POINTS: usize = 21;

pub fn profit_ambiguity_search(fp: &FirmParams, gamma: f64) -> Result<AmbiguitySearch> {
    profit_ambiguity_search_with(
        fp,
        gamma,
        AMBIGUITY_RANGE,
        AMBIGUITY_POINTS,
        Execution::default(),
    )
}

/// Log-spaced `points x points` search over `(a_e, a_k)` in `range^2` for
/// a power-1 lognormal baseline. Missing witnesses are reported in
/// `diagnostic`, not as errors.
pub fn profit_ambiguity_search_with(
    fp: &FirmParams,
    gamma: f64,
    range: (f64, f64),
    points: usize,
    exec: Execution,
) -> Result<AmbiguitySearch> {
    let ln = fp.dist.as_lognormal().ok_or_else(|| {
        ModelError::Unsupported("profit search needs a lognormal ability distribution".into())
    })?;
    if classify_power(ln.power) != Some(Baseline::Level) {
        return Err(ModelError::Unsupported(format!(
            "profit search covers the power-1 baseline (got power {})",
            ln.power
        )));
    }
    if !(range.0 > 0.0 && range.1 > range.0 && points >= 2) {
        return Err(ModelError::Domain(format!(
            "bad search box {range:?} with {points} points"
        )));
    }
    let (lo, hi) = (range.0.ln(), range.1.ln());
    let axis: Vec<f64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let pairs: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&e| axis.iter().map(move |&k| (e, k)))
        .collect();

    let evaluated: Vec<Result<ProfitWitness>> = exec.map_slice(&pairs, |&(a_e, a_k)| {
        let mut w = fp.worker;
        w.a_e = a_e;
        w.a_k = a_k;
        let at = FirmParams::new(w, fp.delta, fp.lambda, fp.c, fp.dist.clone())?;
        let exp = run_spread_experiment(&at, gamma)?;
        Ok(ProfitWitness {
            a_e,
            a_k,
            delta_profit: exp.delta(Outcome::Profit).delta,
        })
    });
    let evaluated: Vec<ProfitWitness> = evaluated.into_iter().collect::<Result<_>>()?;

    let ratio = |w: &ProfitWitness| w.a_e / w.a_k;
    let positive = evaluated
        .iter()
        .filter(|w| w.delta_profit > 0.0)
        .min_by(|a, b| ratio(a).total_cmp(&ratio(b)))
        .copied();
    let negative = evaluated
        .iter()
        .filter(|w| w.delta_profit < 0.0)
        .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
        .copied();
    let diagnostic = match (&positive, &negative) {
        (Some(_), Some(_)) => None,
        (None, None) => Some("profit did not move anywhere on the grid".into()),
        (None, Some(_)) => Some("no grid point where the spread raises profit".into()),
        (Some(_), None) => Some(if fp.lambda == 0.0 {
            "no grid point where the spread lowers profit; with lambda = 0 the meaning part of profit does not respond".into()
        } else {
            "no grid point where the spread lowers profit".into()
        }),
    };
    Ok(AmbiguitySearch {
        gamma,
        points_searched: pairs.len(),
        positive,
        negative,
        diagnostic,
    })
}

/// Steady states before and after moving every support point up by `shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FosdExperiment {
    pub baseline: Empirical,
    pub shifted: Empirical,
    pub shift: f64,
    pub reference_ability: f64,
    pub before: Outcomes,
    pub after: Outcomes,
    pub deltas: Vec<OutcomeDelta>,
    pub agreement: bool,
}

impl FosdExperiment {
    pub fn delta(&self, o: Outcome) -> &OutcomeDelta {
        self.deltas
            .iter()
            .find(|d| d.outcome == o)
            .expect("all outcomes present")
    }

    /// Every delta at least `-1e-12`.
    pub fn weakly_increasing(&self) -> bool {
        self.deltas.iter().all(|d| d.delta >= -DELTA_ZERO_TOL)
    }
}

/// Upward shift of an empirical distribution, `shift >= 0`. Every outcome
/// is predicted to rise (or stay put for a zero shift).
pub fn run_fosd_experiment(fp: &FirmParams, shift: f64) -> Result<FosdExperiment> {
    let baseline = fp.dist.as_empirical().cloned().ok_or_else(|| {
        ModelError::Unsupported("shift experiments need an empirical ability distribution".into())
    })?;
    if !(shift.is_finite() && shift >= 0.0) {
        return Err(ModelError::Domain(format!(
            "shift must be finite and >= 0 (got {shift})"
        )));
    }
    let shifted = baseline.shifted(shift)?;
    let after_fp = fp.with_distribution(TalentDistribution::Empirical(shifted.clone()))?;
    let reference_ability = fp.moments().m1;
    let before = Outcomes::evaluate(fp, reference_ability);
    let after = Outcomes::evaluate(&after_fp, reference_ability);
    let predicted = if shift == 0.0 {
        Sign::Zero
    } else {
        Sign::Positive
    };
    let deltas = compare(&before, &after, |_| Some(predicted));
    let agreement = deltas.iter().all(|d| d.agrees);
    Ok(FosdExperiment {
        baseline,
        shifted,
        shift,
        reference_ability,
        before,
        after,
        deltas,
        agreement,
    })
}

/// Shift experiments for several shifts, in input order.
pub fn fosd_sweep(fp: &FirmParams, shifts: &[f64], exec: Execution) -> Result<Vec<FosdExperiment>> {
    exec.map_slice(shifts, |&s| run_fosd_experiment(fp, s))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lognormal_fp(power: f64) -> FirmParams {
        let s0 = FirmParams::s0();
        s0.with_distribution(Lognormal::with_power(0.0, 0.25, power).unwrap().into())
            .unwrap()
    }

    #[test]
    fn spread_signs_per_baseline() {
        for power in [1.0 / 3.0, 1.0, 2.0] {
            let exp = run_spread_experiment(&lognormal_fp(power), 0.3).unwrap();
            assert!(exp.agreement, "power {power}: {:#?}", exp.deltas);
        }
        let cube = run_spread_experiment(&lognormal_fp(1.0 / 3.0), 0.3).unwrap();
        assert!(cube.deltas.iter().all(|d| d.delta > 0.0));
        let square = run_spread_experiment(&lognormal_fp(2.0), 0.3).unwrap();
        assert!(square.deltas.iter().all(|d| d.delta < 0.0));
    }

    #[test]
    fn zero_spread_is_exactly_neutral() {
        for power in [1.0 / 3.0, 1.0, 2.0] {
            let exp = run_spread_experiment(&lognormal_fp(power), 0.0).unwrap();
            assert!(exp.deltas.iter().all(|d| d.delta == 0.0));
        }
    }

    #[test]
    fn spread_needs_lognormal() {
        assert!(matches!(
            run_spread_experiment(&FirmParams::s0(), 0.1),
            Err(ModelError::Unsupported(_))
        ));
        assert!(matches!(
            run_spread_experiment(&lognormal_fp(1.5), 0.1),
            Err(ModelError::Unsupported(_))
        ));
    }

    #[test]
    fn ambiguity_witnesses() {
        let search = profit_ambiguity_search(&lognormal_fp(1.0), 0.3).unwrap();
        assert!(search.is_ambiguous(), "{search:?}");
        let pos = search.positive.unwrap();
        let neg = search.negative.unwrap();
        assert!(pos.a_e < pos.a_k && neg.a_e > neg.a_k);
    }

    #[test]
    fn ambiguity_without_persistence_has_no_negative_witness() {
        let fp = lognormal_fp(1.0);
        let fp = FirmParams::new(fp.worker, 0.5, 0.0, 1.0, fp.dist.clone()).unwrap();
        let search = profit_ambiguity_search(&fp, 0.3).unwrap();
        assert!(search.negative.is_none());
        assert!(search.diagnostic.is_some());
    }

    #[test]
    fn fosd_examples() {
        let two = Empirical::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let fp = FirmParams::s0().with_distribution(two.into()).unwrap();
        let exp = run_fosd_experiment(&fp, 0.5).unwrap();
        assert!(exp.deltas.iter().all(|d| d.delta > 0.0));
        assert!(exp.agreement);

        let exp = run_fosd_experiment(&FirmParams::s0(), 1.0).unwrap();
        assert_relative_eq!(
            exp.after.m_star,
            8.0 * exp.before.m_star,
            max_relative = 1e-14
        );

        let exp = run_fosd_experiment(&FirmParams::s0(), 0.0).unwrap();
        assert!(exp.deltas.iter().all(|d| d.delta == 0.0));
    }

    #[test]
    fn sweeps_keep_input_order() {
        let fp = lognormal_fp(1.0);
        let gammas = [0.4, 0.1, 0.2];
        let seq = spread_sweep(&fp, &gammas, Execution::Sequential).unwrap();
        let par = spread_sweep(&fp, &gammas, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.iter().map(|e| e.gamma).collect::<Vec<_>>(), gammas);
    }
}
