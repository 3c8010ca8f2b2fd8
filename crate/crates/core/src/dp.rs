//! Brute-force dynamic-programming oracle for the firm problem.
//!
//! Backward induction on a uniform grid of meaning levels. Each sweep
//! evaluates every feasible transition `m' >= lambda m` on the grid, so the
//! result depends only on the payoff `F` and never on the closed forms it
//! is used to check (apart from choosing the grid's upper end).

use crate::error::{ModelError, Result};
use crate::exec::Execution;
use crate::firm::{reduced_objective, steady_state, FirmParams};

/// Grid and horizon of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    pub grid_size: usize,
    pub horizon: usize,
    /// Upper end of the grid; `None` means three times the closed-form
    /// steady state.
    pub upper: Option<f64>,
}

impl DpConfig {
    pub fn new(grid_size: usize, horizon: usize) -> Self {
        Self {
            grid_size,
            horizon,
            upper: None,
        }
    }

    pub fn with_upper(mut self, upper: f64) -> Self {
        self.upper = Some(upper);
        self
    }
}

/// Discrete value function, greedy policy and its stationary point.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub grid: Vec<f64>,
    pub value: Vec<f64>,
    /// `policy[i]` is the grid index chosen from state `grid[i]`.
    pub policy: Vec<usize>,
    /// Midpoint of the run of grid states the policy maps to themselves.
    pub fixed_point: f64,
    pub cell_width: f64,
}

impl DpSolution {
    pub fn nearest_index(&self, m: f64) -> usize {
        let i = ((m - self.grid[0]) / self.cell_width).round();
        i.clamp(0.0, (self.grid.len() - 1) as f64) as usize
    }

    /// Greedy path `m_0, m_1, ..., m_steps` starting from the grid point
    /// nearest to `m0`.
    pub fn simulate(&self, m0: f64, steps: usize) -> Vec<f64> {
        let mut i = self.nearest_index(m0);
        let mut out = Vec::with_capacity(steps + 1);
        out.push(self.grid[i]);
        for _ in 0..steps {
            i = self.policy[i];
            out.push(self.grid[i]);
        }
        out
    }
}

/// Oracle on `grid_size` points over `[0, 3 m*]` with `horizon` backward
/// steps.
pub fn dp_oracle(fp: &FirmParams, grid_size: usize, horizon: usize) -> Result<DpSolution> {
    dp_oracle_with(fp, &DpConfig::new(grid_size, horizon), Execution::default())
}

pub fn dp_oracle_with(fp: &FirmParams, cfg: &DpConfig, exec: Execution) -> Result<DpSolution> {
    if cfg.grid_size < 3 {
        return Err(ModelError::Domain("grid needs at least 3 points".into()));
    }
    if fp.delta.powi(cfg.horizon as i32) >= 1e-8 {
        return Err(ModelError::Domain(format!(
            "horizon {} too short: delta^horizon = {:e} >= 1e-8",
            cfg.horizon,
            fp.delta.powi(cfg.horizon as i32)
        )));
    }
    let m_star = steady_state(fp).m_star;
    let upper = cfg.upper.unwrap_or(3.0 * m_star);
    if !(upper.is_finite() && upper > 0.0) {
        return Err(ModelError::Domain(format!("bad grid upper end {upper}")));
    }
    let n = cfg.grid_size;
    let h = upper / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    if m_star > upper - h {
        return Err(ModelError::Numerical(format!(
            "grid [0, {upper}] does not bracket the steady state {m_star}"
        )));
    }

    // first feasible successor of each state
    let lambda = fp.lambda;
    let first_feasible: Vec<usize> = grid
        .iter()
        .map(|&m| grid.partition_point(|&x| x < lambda * m - 1e-15 * m))
        .collect();

    let mut value = vec![0.0; n];
    let mut policy = vec![0usize; n];
    for _ in 0..cfg.horizon {
        let v = &value;
        let step: Vec<(f64, usize)> = exec.map_indices(n, |i| {
            let m = grid[i];
            let mut best = f64::NEG_INFINITY;
            let mut arg = first_feasible[i];
            for j in first_feasible[i]..n {
                let f = reduced_objective(m, grid[j], fp).unwrap_or(f64::NEG_INFINITY);
                let total = f + fp.delta * v[j];
                if total > best {
                    best = total;
                    arg = j;
                }
            }
            (best, arg)
        });
        for (i, (b, a)) in step.into_iter().enumerate() {
            value[i] = b;
            policy[i] = a;
        }
    }

    let fixed: Vec<usize> = (0..n).filter(|&i| policy[i] == i).collect();
    let fixed_point = match (fixed.first(), fixed.last()) {
        (Some(&lo), Some(&hi)) => 0.5 * (grid[lo] + grid[hi]),
        _ => {
            // no exact fixed cell: look for a sign change of policy(i) - i
            let cross = (0..n - 1).find(|&i| policy[i] > i && policy[i + 1] < i + 1);
            match cross {
                Some(i) => grid[i] + 0.5 * h,
                None => {
                    return Err(ModelError::Numerical(
                        "grid too coarse: greedy policy has no stationary point".into(),
                    ))
                }
            }
        }
    };
    Ok(DpSolution {
        grid,
        value,
        policy,
        fixed_point,
        cell_width: h,
    })
}
