//! The firm's infinite-horizon purpose investment problem.
//!
//! The state is average meaning `m`. Purpose is recovered from two
//! consecutive states through the law of motion, which turns the problem
//! into a scalar linear-quadratic program in `m`. The per-period payoff
//! `F(m_prev, m_next)` is quadratic, its Euler equation is a second-order
//! linear difference equation, and the steady state and transition path
//! follow in closed form.

use serde::{Deserialize, Serialize};

use crate::distribution::{MomentBundle, TalentDistribution};
use crate::error::{ModelError, Result};
use crate::worker::{positive, WorkerParams};

/// Slack allowed on `m_next >= lambda m_prev` before a transition counts as
/// infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Full parameter set of the firm problem with cached ability moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmParams {
    pub worker: WorkerParams,
    /// Discount factor, in `(0, 1)`.
    pub delta: f64,
    /// Persistence of meaning, in `[0, 1)`.
    pub lambda: f64,
    /// Purpose cost coefficient: cost is `c r^2 / 2`.
    pub c: f64,
    pub dist: TalentDistribution,
    #[serde(skip)]
    moments: MomentBundle,
}

impl FirmParams {
    pub fn new(
        worker: WorkerParams,
        delta: f64,
        lambda: f64,
        c: f64,
        dist: TalentDistribution,
    ) -> Result<Self> {
        worker.validate()?;
        if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
            return Err(ModelError::invalid(
                "delta",
                format!("must lie in (0, 1) (got {delta})"),
            ));
        }
        if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
            return Err(ModelError::invalid(
                "lambda",
                format!("must lie in [0, 1) (got {lambda})"),
            ));
        }
        if delta * lambda >= 1.0 {
            return Err(ModelError::invalid(
                "delta*lambda",
                "delta*lambda must be < 1",
            ));
        }
        positive("c", c)?;
        let moments = MomentBundle::from_distribution(&dist)?;
        Ok(Self {
            worker,
            delta,
            lambda,
            c,
            dist,
            moments,
        })
    }

    /// The reference parameterisation: `alpha = beta = 1/2`,
    /// `A_e = A_k = C = 1`, `delta = lambda = 1/2`, all ability at `b = 1`.
    pub fn s0() -> Self {
        Self::new(
            WorkerParams::new(0.5, 0.5, 1.0, 1.0).expect("valid"),
            0.5,
            0.5,
            1.0,
            TalentDistribution::point_mass(1.0).expect("valid"),
        )
        .expect("valid")
    }

    pub fn moments(&self) -> &MomentBundle {
        &self.moments
    }

    /// Same parameters with a different ability distribution.
    pub fn with_distribution(&self, dist: TalentDistribution) -> Result<Self> {
        Self::new(self.worker, self.delta, self.lambda, self.c, dist)
    }

    pub(crate) fn investor_shares(&self) -> Shares {
        Shares {
            worker: self.worker.alpha,
            firm: 1.0 - self.worker.alpha,
        }
    }

    /// `4 C A_k^2 / ((alpha+beta)^2 m13^6)` for the given worker share: the
    /// curvature of the payoff in `m_next`.
    fn curvature(&self, shares: Shares) -> f64 {
        let g = (shares.worker + self.worker.beta) * self.moments.m13.powi(3);
        4.0 * self.c * self.worker.a_k * self.worker.a_k / (g * g)
    }

    /// `(alpha+beta)/(2 A_k) m13^3`: purpose-to-meaning conversion rate.
    fn conversion(&self, shares: Shares) -> f64 {
        (shares.worker + self.worker.beta) / (2.0 * self.worker.a_k) * self.moments.m13.powi(3)
    }
}

/// Output shares: the worker's retained share in utility and the firm's
/// retained share in its objective. An investor-owned firm uses
/// `(alpha, 1 - alpha)`; a worker-owned firm sets both to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Shares {
    pub worker: f64,
    pub firm: f64,
}

impl Shares {
    pub const WORKER_OWNED: Shares = Shares {
        worker: 1.0,
        firm: 1.0,
    };
}

/// Steady-state meaning, purpose and common socialization factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub m_star: f64,
    pub r_star: f64,
    pub k_star: f64,
}

/// One period of a transition path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub m_bar: f64,
    pub r: f64,
    pub per_period_profit: f64,
}

/// Meaning path from a given initial stock. `points[i]` is period `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_meaning: f64,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// `m_0, m_1, ..., m_T`.
    pub fn meaning_series(&self) -> Vec<f64> {
        std::iter::once(self.initial_meaning)
            .chain(self.points.iter().map(|p| p.m_bar))
            .collect()
    }
}

/// `m_t = (alpha+beta)/(2 A_k) r m13^3 + lambda m_{t-1}`.
pub fn law_of_motion(m_prev: f64, r: f64, fp: &FirmParams) -> f64 {
    law_of_motion_with(m_prev, r, fp, fp.investor_shares())
}

pub(crate) fn law_of_motion_with(m_prev: f64, r: f64, fp: &FirmParams, shares: Shares) -> f64 {
    fp.conversion(shares) * r + fp.lambda * m_prev
}

fn meaning_gap(m_prev: f64, m_next: f64, fp: &FirmParams) -> Result<f64> {
    let floor = fp.lambda * m_prev;
    let gap = m_next - floor;
    let scale = 1.0f64.max(m_next.abs()).max(m_prev.abs());
    if gap < -FEASIBILITY_TOL * scale || !gap.is_finite() {
        return Err(ModelError::Infeasible { m_next, floor });
    }
    Ok(gap.max(0.0))
}

/// Purpose that moves meaning from `m_prev` to `m_next`; the inverse of
/// [`law_of_motion`] in `r`.
pub fn purpose_from_meaning(m_prev: f64, m_next: f64, fp: &FirmParams) -> Result<f64> {
    purpose_from_meaning_with(m_prev, m_next, fp, fp.investor_shares())
}

pub(crate) fn purpose_from_meaning_with(
    m_prev: f64,
    m_next: f64,
    fp: &FirmParams,
    shares: Shares,
) -> Result<f64> {
    Ok(meaning_gap(m_prev, m_next, fp)? / fp.conversion(shares))
}

/// Aggregate output `int z_j` when purpose is `r` and last period's meaning
/// is `m_prev`.
pub fn aggregate_output(m_prev: f64, r: f64, fp: &FirmParams) -> f64 {
    aggregate_output_with(m_prev, r, fp, fp.investor_shares())
}

pub(crate) fn aggregate_output_with(m_prev: f64, r: f64, fp: &FirmParams, shares: Shares) -> f64 {
    let mb = fp.moments();
    let w = &fp.worker;
    let gain = (shares.worker + w.beta) / (2.0 * w.a_k);
    mb.m2 * shares.worker / w.a_e + gain * r * mb.m43 * mb.m13 * mb.m13 + fp.lambda * mb.m1 * m_prev
}

/// Firm payoff of one period written in purpose: retained output minus the
/// cost of purpose.
pub fn period_profit(m_prev: f64, r: f64, fp: &FirmParams) -> f64 {
    period_profit_with(m_prev, r, fp, fp.investor_shares())
}

pub(crate) fn period_profit_with(m_prev: f64, r: f64, fp: &FirmParams, shares: Shares) -> f64 {
    shares.firm * aggregate_output_with(m_prev, r, fp, shares) - 0.5 * fp.c * r * r
}

/// The payoff `F(m_prev, m_next)` with purpose substituted out.
pub fn reduced_objective(m_prev: f64, m_next: f64, fp: &FirmParams) -> Result<f64> {
    reduced_objective_with(m_prev, m_next, fp, fp.investor_shares())
}

pub(crate) fn reduced_objective_with(
    m_prev: f64,
    m_next: f64,
    fp: &FirmParams,
    shares: Shares,
) -> Result<f64> {
    let gap = meaning_gap(m_prev, m_next, fp)?;
    Ok(reduced_objective_unchecked(m_prev, gap, fp, shares))
}

#[inline]
fn reduced_objective_unchecked(m_prev: f64, gap: f64, fp: &FirmParams, shares: Shares) -> f64 {
    let mb = fp.moments();
    let retained =
        mb.m2 * shares.worker / fp.worker.a_e + gap / mb.m13 * mb.m43 + fp.lambda * mb.m1 * m_prev;
    shares.firm * retained - 0.5 * fp.curvature(shares) * gap * gap
}

/// Partial derivatives of `F` with respect to its first and second argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePartials {
    pub d_prev: f64,
    pub d_next: f64,
}

/// Closed-form gradient of [`reduced_objective`].
pub fn objective_partials(m_prev: f64, m_next: f64, fp: &FirmParams) -> Result<ObjectivePartials> {
    let shares = fp.investor_shares();
    let gap = meaning_gap(m_prev, m_next, fp)?;
    let mb = fp.moments();
    let k = fp.curvature(shares);
    let lambda = fp.lambda;
    Ok(ObjectivePartials {
        d_prev: shares.firm * lambda * (mb.m1 - mb.m43 / mb.m13) + k * lambda * gap,
        d_next: shares.firm * mb.m43 / mb.m13 - k * gap,
    })
}

/// `F_2(m_prev, m_now) + delta F_1(m_now, m_next)`; zero along the optimal
/// path.
pub fn euler_residual(m_prev: f64, m_now: f64, m_next: f64, fp: &FirmParams) -> Result<f64> {
    let today = objective_partials(m_prev, m_now, fp)?;
    let tomorrow = objective_partials(m_now, m_next, fp)?;
    Ok(today.d_next + fp.delta * tomorrow.d_prev)
}

/// Constant Hessian of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveHessian {
    pub d_prev_prev: f64,
    pub d_next_next: f64,
    pub d_prev_next: f64,
}

pub fn objective_hessian(fp: &FirmParams) -> ObjectiveHessian {
    let k = fp.curvature(fp.investor_shares());
    let lambda = fp.lambda;
    ObjectiveHessian {
        d_prev_prev: -k * lambda * lambda,
        d_next_next: -k,
        d_prev_next: k * lambda,
    }
}

/// Saddle-point stability index `F_22 + delta F_11 + |F_12| (1 + delta)`;
/// negative for every valid parameter set.
pub fn saddle_condition(fp: &FirmParams) -> f64 {
    let h = objective_hessian(fp);
    h.d_next_next + fp.delta * h.d_prev_prev + h.d_prev_next.abs() * (1.0 + fp.delta)
}

/// Closed-form steady state.
pub fn steady_state(fp: &FirmParams) -> SteadyState {
    steady_state_with(fp, fp.investor_shares())
}

pub(crate) fn steady_state_with(fp: &FirmParams, shares: Shares) -> SteadyState {
    let mb = fp.moments();
    let w = &fp.worker;
    let (delta, lambda, c) = (fp.delta, fp.lambda, fp.c);
    let g = shares.worker + w.beta;
    let dl = delta * lambda;

    let m_star = shares.firm * mb.m43 * g * g * mb.m13.powi(5)
        / (c * 4.0 * w.a_k * w.a_k * (1.0 - lambda))
        + shares.firm * dl * mb.m1 * g * g * mb.m13.powi(6)
            / (c * (1.0 - dl) * 4.0 * w.a_k * w.a_k * (1.0 - lambda));
    let r_star = shares.firm * mb.m43 * g * mb.m13 * mb.m13 / (2.0 * c * w.a_k)
        + shares.firm * dl * mb.m1 * g * mb.m13.powi(3) / (2.0 * c * w.a_k * (1.0 - dl));
    let k_star = g / (2.0 * w.a_k) * r_star.sqrt() * mb.m13;
    SteadyState {
        m_star,
        r_star,
        k_star,
    }
}

/// Roots of the characteristic equation of the Euler difference equation,
/// ordered `mu2 <= mu1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoots {
    pub mu1: f64,
    pub mu2: f64,
}

/// `mu = ((1 + delta lambda^2)/(delta lambda) -/+ sqrt(...)) / 2`.
///
/// With `lambda = 0` the equation degenerates; the convention is `mu2 = 0`
/// (the path jumps to the steady state in one period) and `mu1 = inf`.
pub fn characteristic_roots(fp: &FirmParams) -> CharacteristicRoots {
    let (delta, lambda) = (fp.delta, fp.lambda);
    if lambda == 0.0 {
        return CharacteristicRoots {
            mu1: f64::INFINITY,
            mu2: 0.0,
        };
    }
    let sum = (1.0 + delta * lambda * lambda) / (delta * lambda);
    let disc = (sum * sum - 4.0 / delta).max(0.0);
    let mu1 = 0.5 * (sum + disc.sqrt());
    // product of the roots is 1/delta; dividing avoids cancellation
    let mu2 = 1.0 / (delta * mu1);
    CharacteristicRoots { mu1, mu2 }
}

/// Optimal meaning path `m_t = m* + mu2^t (m0 - m*)` for `t = 1..=horizon`,
/// with purpose and per-period profit recovered from consecutive states.
pub fn transition_path(m0: f64, horizon: usize, fp: &FirmParams) -> Result<Trajectory> {
    if !(m0.is_finite() && m0 >= 0.0) {
        return Err(ModelError::invalid(
            "initial_meaning",
            "must be finite and >= 0",
        ));
    }
    if horizon == 0 {
        return Err(ModelError::invalid("horizon", "must be >= 1"));
    }
    let ss = steady_state(fp);
    let mu2 = characteristic_roots(fp).mu2;
    let mut points = Vec::with_capacity(horizon);
    let mut prev = m0;
    let mut decay = 1.0;
    for t in 1..=horizon {
        decay *= mu2;
        let m = ss.m_star + decay * (m0 - ss.m_star);
        let r = purpose_from_meaning(prev, m, fp).map_err(|_| ModelError::Infeasible {
            m_next: m,
            floor: fp.lambda * prev,
        })?;
        let per_period_profit = reduced_objective(prev, m, fp)?;
        points.push(TrajectoryPoint {
            t,
            m_bar: m,
            r,
            per_period_profit,
        });
        prev = m;
    }
    Ok(Trajectory {
        initial_meaning: m0,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Empirical;
    use approx::assert_relative_eq;

    fn with_lambda(lambda: f64) -> FirmParams {
        let s0 = FirmParams::s0();
        FirmParams::new(s0.worker, s0.delta, lambda, s0.c, s0.dist.clone()).unwrap()
    }

    #[test]
    fn law_of_motion_examples() {
        let s0 = FirmParams::s0();
        assert_eq!(law_of_motion(0.0, 0.0, &s0), 0.0);
        assert_relative_eq!(
            law_of_motion(1.0 / 3.0, 1.0 / 3.0, &s0),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_eq!(law_of_motion(0.0, 1.0, &with_lambda(0.9)), 0.5);
    }

    #[test]
    fn purpose_examples() {
        let s0 = FirmParams::s0();
        assert_eq!(purpose_from_meaning(2.0, 1.0, &s0).unwrap(), 0.0);
        assert_relative_eq!(
            purpose_from_meaning(1.0 / 3.0, 1.0 / 3.0, &s0).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_eq!(purpose_from_meaning(0.0, 1.0, &s0).unwrap(), 2.0);
        assert!(matches!(
            purpose_from_meaning(1.0, 0.4, &s0),
            Err(ModelError::Infeasible { .. })
        ));
    }

    #[test]
    fn reduced_objective_examples() {
        let s0 = FirmParams::s0();
        assert_eq!(reduced_objective(0.0, 0.0, &s0).unwrap(), 0.25);
        assert_relative_eq!(
            reduced_objective(1.0 / 3.0, 1.0 / 3.0, &s0).unwrap(),
            13.0 / 36.0,
            max_relative = 1e-15
        );
        // (0, 1/3): r = 2/3, retained output (0.5 + 1/3), cost 0.5 * 4/9
        let f = reduced_objective(0.0, 1.0 / 3.0, &s0).unwrap();
        let direct = period_profit(0.0, purpose_from_meaning(0.0, 1.0 / 3.0, &s0).unwrap(), &s0);
        assert_relative_eq!(f, 0.5 * (0.5 + 1.0 / 3.0) - 2.0 / 9.0, max_relative = 1e-14);
        assert!((f - direct).abs() < 1e-12);
    }

    #[test]
    fn euler_examples() {
        let s0 = FirmParams::s0();
        let m = 1.0 / 3.0;
        assert!(euler_residual(m, m, m, &s0).unwrap().abs() < 1e-12);
        // building meaning from zero in one step is too steep: marginal cost
        // today exceeds the marginal value tomorrow
        let off = euler_residual(0.0, m, m, &s0).unwrap();
        assert!(off < 0.0, "{off}");
    }

    #[test]
    fn steady_state_examples() {
        let ss = steady_state(&FirmParams::s0());
        assert_relative_eq!(ss.m_star, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ss.r_star, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ss.k_star, (1.0f64 / 3.0).sqrt() / 2.0, max_relative = 1e-15);

        let no_persist = with_lambda(0.0);
        let ss0 = steady_state(&no_persist);
        // (1-a) m43 (a+b)^2 m13^5 / (4 C A_k^2) with unit moments
        assert_relative_eq!(ss0.m_star, 0.125, max_relative = 1e-15);

        let near_one = FirmParams::new(
            WorkerParams::new(1.0 - 1e-9, 0.5, 1.0, 1.0).unwrap(),
            0.5,
            0.5,
            1.0,
            TalentDistribution::point_mass(1.0).unwrap(),
        )
        .unwrap();
        let ss1 = steady_state(&near_one);
        assert!(ss1.m_star < 1e-8 && ss1.r_star < 1e-8 && ss1.k_star < 1e-4);
    }

    #[test]
    fn steady_state_invariants_with_heterogeneity() {
        let dist = Empirical::new(vec![0.5, 1.0, 2.5], vec![0.2, 0.5, 0.3]).unwrap();
        let fp = FirmParams::s0().with_distribution(dist.into()).unwrap();
        let ss = steady_state(&fp);
        let mb = fp.moments();
        let w = fp.worker;
        let r_from_m =
            2.0 * w.a_k * (1.0 - fp.lambda) * ss.m_star / ((w.alpha + w.beta) * mb.m13.powi(3));
        assert_relative_eq!(ss.r_star, r_from_m, max_relative = 1e-12);
        assert_relative_eq!(
            law_of_motion(ss.m_star, ss.r_star, &fp),
            ss.m_star,
            max_relative = 1e-12
        );
    }

    #[test]
    fn roots_examples() {
        let roots = characteristic_roots(&FirmParams::s0());
        assert_eq!(roots.mu2, 0.5);
        assert_eq!(roots.mu1, 4.0);
        let degenerate = characteristic_roots(&with_lambda(0.0));
        assert_eq!(degenerate.mu2, 0.0);
    }

    #[test]
    fn transition_examples() {
        let s0 = FirmParams::s0();
        let flat = transition_path(1.0 / 3.0, 5, &s0).unwrap();
        assert!(flat
            .points
            .iter()
            .all(|p| (p.m_bar - 1.0 / 3.0).abs() < 1e-15));

        let path = transition_path(0.0, 10, &s0).unwrap();
        assert_relative_eq!(path.points[0].m_bar, 1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(path.points[1].m_bar, 0.25, max_relative = 1e-15);
        for p in &path.points {
            let expect = (1.0 - 0.5f64.powi(p.t as i32)) / 3.0;
            assert!((p.m_bar - expect).abs() < 1e-15);
            assert!(p.r >= 0.0);
        }
        assert!(transition_path(-1.0, 3, &s0).is_err());
        assert!(transition_path(0.0, 0, &s0).is_err());
    }

    #[test]
    fn saddle_example() {
        assert_relative_eq!(
            saddle_condition(&FirmParams::s0()),
            -1.5,
            max_relative = 1e-15
        );
        assert!(saddle_condition(&with_lambda(0.999_999)) > -1e-5);
    }

    #[test]
    fn params_validation() {
        let s0 = FirmParams::s0();
        assert!(FirmParams::new(s0.worker, 1.0, 0.5, 1.0, s0.dist.clone()).is_err());
        assert!(FirmParams::new(s0.worker, 0.5, 1.0, 1.0, s0.dist.clone()).is_err());
        assert!(FirmParams::new(s0.worker, 0.5, 0.5, 0.0, s0.dist.clone()).is_err());
    }
}
