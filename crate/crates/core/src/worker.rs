//! Within-period worker choices.
//!
//! Given the firm's purpose flow `r` and last period's average meaning, each
//! worker picks directly productive effort `e` and socialization effort `k`.
//! Workers are atomistic: the aggregate `int k_j^(1/2)` is taken as given.

use serde::{Deserialize, Serialize};

use crate::distribution::MomentBundle;
use crate::error::{ModelError, Result};
use crate::optimize::golden_section_max;

/// Worker-side preference and cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerParams {
    /// Share of output retained by the worker, in `(0, 1)`.
    pub alpha: f64,
    /// Weight on meaning in utility.
    pub beta: f64,
    /// Work-effort cost coefficient.
    pub a_e: f64,
    /// Socialization cost coefficient.
    pub a_k: f64,
}

impl WorkerParams {
    pub fn new(alpha: f64, beta: f64, a_e: f64, a_k: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            a_e,
            a_k,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::invalid(
                "alpha",
                format!("must lie in (0, 1) (got {})", self.alpha),
            ));
        }
        positive("beta", self.beta)?;
        positive("a_e", self.a_e)?;
        positive("a_k", self.a_k)?;
        Ok(())
    }

    /// `(alpha + beta) / (2 A_k)`, the coefficient shared by socialization
    /// and meaning.
    pub fn meaning_gain(&self) -> f64 {
        (self.alpha + self.beta) / (2.0 * self.a_k)
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::invalid(
            name,
            format!("must be finite and > 0 (got {v})"),
        ))
    }
}

/// Period inputs that are fixed when workers choose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodState {
    /// Purpose flow chosen by the firm this period.
    pub r: f64,
    /// Average meaning carried over from last period.
    pub m_prev: f64,
    /// Persistence of meaning, in `[0, 1)`.
    pub lambda: f64,
}

impl PeriodState {
    pub fn new(r: f64, m_prev: f64, lambda: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(ModelError::invalid("r", "must be finite and >= 0"));
        }
        if !(m_prev.is_finite() && m_prev >= 0.0) {
            return Err(ModelError::invalid("m_prev", "must be finite and >= 0"));
        }
        if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
            return Err(ModelError::invalid("lambda", "must lie in [0, 1)"));
        }
        Ok(Self { r, m_prev, lambda })
    }
}

/// `e_i = b alpha / A_e`.
pub fn optimal_work_effort(b: f64, p: &WorkerParams) -> f64 {
    b * p.alpha / p.a_e
}

/// Common socialization factor `k_t = (alpha+beta)/(2 A_k) sqrt(r) E[b^(1/3)]`;
/// worker `i` supplies `b_i^(2/3) k_t`.
pub fn common_socialization(r: f64, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    p.meaning_gain() * r.sqrt() * mb.m13
}

/// `b^(2/3) k_t`.
pub fn individual_socialization(b: f64, r: f64, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    b.powf(2.0 / 3.0) * common_socialization(r, p, mb)
}

/// Aggregate `int k_j^(1/2)` under the equilibrium profile.
pub fn socialization_aggregate(r: f64, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    common_socialization(r, p, mb).sqrt() * mb.m13
}

/// Equilibrium meaning of a worker with ability `b`.
pub fn individual_meaning(b: f64, s: &PeriodState, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    p.meaning_gain() * s.r * b.cbrt() * mb.m13 * mb.m13 + s.lambda * s.m_prev
}

/// `z_i = b (e_i + m_i)`; effort and meaning are perfect substitutes.
pub fn individual_output(b: f64, s: &PeriodState, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    b * (optimal_work_effort(b, p) + individual_meaning(b, s, p, mb))
}

/// Worker utility at arbitrary own choices `(e, k)` with the others'
/// aggregate `int k_j^(1/2)` held fixed.
pub fn utility_at_choice(
    b: f64,
    e: f64,
    k: f64,
    k_aggregate: f64,
    s: &PeriodState,
    p: &WorkerParams,
) -> f64 {
    let meaning = k.sqrt() * k_aggregate * s.r.sqrt() + s.lambda * s.m_prev;
    (p.alpha + p.beta) * b * meaning + p.alpha * b * e - 0.5 * p.a_e * e * e - 0.5 * p.a_k * k * k
}

/// Utility at the equilibrium choices.
pub fn worker_utility(b: f64, s: &PeriodState, p: &WorkerParams, mb: &MomentBundle) -> f64 {
    let e = optimal_work_effort(b, p);
    let k = individual_socialization(b, s.r, p, mb);
    let m = individual_meaning(b, s, p, mb);
    (p.alpha + p.beta) * b * m + p.alpha * b * e - 0.5 * p.a_e * e * e - 0.5 * p.a_k * k * k
}

/// Numerically maximised own choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub e: f64,
    pub k: f64,
}

/// Bracket tolerance for the best-response search.
pub const BEST_RESPONSE_TOL: f64 = 1e-12;

/// Best response found by golden-section search on each own choice,
/// holding `k_aggregate = int k_j^(1/2)` fixed.
///
/// Utility is additively separable in `e` and `k`, so the two searches are
/// independent. Search intervals come from the utility itself: beyond
/// `2 alpha b / A_e` the effort cost exceeds its return, and beyond
/// `(2 (alpha+beta) b sqrt(r) K / A_k)^(2/3)` the same holds for `k`. Each
/// bound is widened tenfold.
pub fn best_response_oracle(
    b: f64,
    k_aggregate: f64,
    s: &PeriodState,
    p: &WorkerParams,
) -> Result<BestResponse> {
    let e_bound = 10.0 * (2.0 * p.alpha * b / p.a_e) + 1e-9;
    let k_pull = (p.alpha + p.beta) * b * s.r.sqrt() * k_aggregate;
    let k_bound = 10.0 * (2.0 * k_pull / p.a_k).powf(2.0 / 3.0) + 1e-9;

    let e = golden_section_max(
        |e| p.alpha * b * e - 0.5 * p.a_e * e * e,
        0.0,
        e_bound,
        BEST_RESPONSE_TOL,
    )?;
    let k = golden_section_max(
        |k| k_pull * k.sqrt() - 0.5 * p.a_k * k * k,
        0.0,
        k_bound,
        BEST_RESPONSE_TOL,
    )?;
    Ok(BestResponse { e: e.x, k: k.x })
}

/// Residuals of the two first-order conditions at `(e, k)`.
pub fn foc_residuals(
    b: f64,
    e: f64,
    k: f64,
    k_aggregate: f64,
    s: &PeriodState,
    p: &WorkerParams,
) -> (f64, f64) {
    let re = p.alpha * b - p.a_e * e;
    let rk = 0.5 * (p.alpha + p.beta) * b * s.r.sqrt() * k_aggregate / k.sqrt() - p.a_k * k;
    (re, rk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s0() -> WorkerParams {
        WorkerParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn work_effort_examples() {
        assert_eq!(optimal_work_effort(8.0, &s0()), 4.0);
        assert_eq!(optimal_work_effort(0.0, &s0()), 0.0);
        let p = WorkerParams::new(0.3, 0.5, 0.6, 1.0).unwrap();
        assert_relative_eq!(optimal_work_effort(1.0, &p), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn socialization_examples() {
        let mb = MomentBundle::unit();
        assert_eq!(common_socialization(0.0, &s0(), &mb), 0.0);
        assert_eq!(common_socialization(1.0, &s0(), &mb), 0.5);
        let p = WorkerParams::new(0.25, 0.25, 1.0, 0.5).unwrap();
        let mb2 = MomentBundle::new(2.0, 4.0, 8.0, 16.0, 64.0).unwrap();
        assert_eq!(common_socialization(4.0, &p, &mb2), 2.0);
    }

    #[test]
    fn meaning_examples() {
        let mb = MomentBundle::unit();
        let zero = PeriodState::new(0.0, 0.0, 0.5).unwrap();
        assert_eq!(individual_meaning(1.0, &zero, &s0(), &mb), 0.0);
        let s = PeriodState::new(1.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(
            individual_meaning(8.0, &s, &s0(), &mb),
            1.0,
            max_relative = 1e-15
        );
        let persist = PeriodState::new(0.0, 2.0, 0.5).unwrap();
        assert_eq!(individual_meaning(1.0, &persist, &s0(), &mb), 1.0);
    }

    #[test]
    fn output_examples() {
        let mb = MomentBundle::unit();
        let zero = PeriodState::new(0.0, 0.0, 0.5).unwrap();
        assert_eq!(individual_output(1.0, &zero, &s0(), &mb), 0.5);
        assert_eq!(individual_output(0.0, &zero, &s0(), &mb), 0.0);
        let ss = PeriodState::new(1.0 / 3.0, 1.0 / 3.0, 0.5).unwrap();
        assert_relative_eq!(
            individual_output(1.0, &ss, &s0(), &mb),
            5.0 / 6.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn utility_examples() {
        let mb = MomentBundle::unit();
        let zero = PeriodState::new(0.0, 0.0, 0.5).unwrap();
        assert_eq!(worker_utility(1.0, &zero, &s0(), &mb), 0.125);
        assert_eq!(worker_utility(0.0, &zero, &s0(), &mb), 0.0);
        let ss = PeriodState::new(1.0 / 3.0, 1.0 / 3.0, 0.5).unwrap();
        assert_relative_eq!(
            worker_utility(1.0, &ss, &s0(), &mb),
            5.0 / 12.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn equilibrium_beats_zero_effort() {
        let mb = MomentBundle::unit();
        let ss = PeriodState::new(0.7, 0.2, 0.5).unwrap();
        let agg = socialization_aggregate(ss.r, &s0(), &mb);
        for b in [0.2, 1.0, 3.0] {
            let u = worker_utility(b, &ss, &s0(), &mb);
            assert!(u >= utility_at_choice(b, 0.0, 0.0, agg, &ss, &s0()));
        }
    }

    #[test]
    fn oracle_examples() {
        let mb = MomentBundle::unit();
        let p = s0();
        let idle = PeriodState::new(0.0, 0.0, 0.5).unwrap();
        let br = best_response_oracle(2.0, 1.0, &idle, &p).unwrap();
        assert_eq!(br.k, 0.0);
        assert!((br.e - 1.0).abs() < 1e-8);

        let s = PeriodState::new(1.0, 0.0, 0.5).unwrap();
        let agg = socialization_aggregate(1.0, &p, &mb);
        let one = best_response_oracle(1.0, agg, &s, &p).unwrap();
        assert!((one.e - 0.5).abs() < 1e-8, "{one:?}");
        assert!((one.k - 0.5).abs() < 1e-8, "{one:?}");
        let eight = best_response_oracle(8.0, agg, &s, &p).unwrap();
        assert!((eight.e - 4.0).abs() < 1e-6, "{eight:?}");
        assert!((eight.k - 2.0).abs() < 1e-6, "{eight:?}");
    }

    #[test]
    fn params_validation() {
        assert!(WorkerParams::new(1.2, 0.5, 1.0, 1.0).is_err());
        assert!(WorkerParams::new(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(PeriodState::new(-1.0, 0.0, 0.5).is_err());
        assert!(PeriodState::new(1.0, 0.0, 1.0).is_err());
    }
}
